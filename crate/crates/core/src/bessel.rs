//! Integer-order Bessel functions of the first kind.
//!
//! Rows `J_0(x) ..= J_n(x)` are produced by Miller's backward recurrence,
//! normalized with the Neumann sum `J_0 + 2 Σ_k J_{2k} = 1`. Backward
//! recurrence is stable in the `n > x` tail, which is where wavefronts of the
//! chain propagator live. An ascending-series oracle evaluated in
//! double-double arithmetic is provided for testing on a bounded box.

use crate::error::{Error, Result};

/// Magnitudes below this are flushed to zero after normalization.
pub const FLUSH_THRESHOLD: f64 = 1e-300;

const RESCALE_TRIGGER: f64 = 1e250;
const RESCALE_FACTOR: f64 = 1e-250;

/// Validity box for [`bessel_j_series_oracle`].
pub const ORACLE_MAX_ARGUMENT: f64 = 30.0;
pub const ORACLE_MAX_ORDER: u32 = 40;

/// `J_0(x) ..= J_{order_max}(x)` at a single argument.
#[derive(Debug, Clone, PartialEq)]
pub struct BesselRow {
    pub order_max: usize,
    pub argument: f64,
    pub values: Vec<f64>,
}

impl BesselRow {
    /// `J_n(x)` for any integer `n`, using `J_{-n} = (-1)^n J_n`.
    /// Orders beyond `order_max` return `None`.
    pub fn get(&self, order: i64) -> Option<f64> {
        let n = order.unsigned_abs() as usize;
        let v = *self.values.get(n)?;
        Some(if order < 0 && n % 2 == 1 { -v } else { v })
    }
}

/// Order at which the backward recurrence is started for a row that must be
/// accurate up to `order_max` at `argument`.
pub fn miller_start_order(order_max: usize, argument: f64) -> usize {
    // The recurrence must begin above the turning point even when only low
    // orders are requested, so the top is lifted to the argument.
    let top = order_max.max(argument.ceil() as usize);
    let scale = (top as f64).max(argument);
    top + 20 + (10.0 * scale.sqrt()).ceil() as usize
}

fn check_argument(argument: f64) -> Result<()> {
    if argument.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "Bessel argument must be finite, got {argument}"
        )))
    }
}

/// Miller backward recurrence for `x > 0`.
fn miller_row(order_max: usize, x: f64) -> Vec<f64> {
    let start = miller_start_order(order_max, x);
    let mut vals = vec![0.0_f64; start + 2];
    vals[start] = 1.0;
    let two_over_x = 2.0 / x;
    for n in (1..=start).rev() {
        let next = (n as f64) * two_over_x * vals[n] - vals[n + 1];
        vals[n - 1] = next;
        if next.abs() > RESCALE_TRIGGER {
            for v in &mut vals[n - 1..=start] {
                *v *= RESCALE_FACTOR;
            }
        }
    }

    let mut norm = vals[0];
    let mut k = 2;
    while k <= start {
        norm += 2.0 * vals[k];
        k += 2;
    }

    vals.truncate(order_max + 1);
    for v in &mut vals {
        *v /= norm;
        if v.abs() < FLUSH_THRESHOLD {
            *v = 0.0;
        }
    }
    vals
}

/// All orders `0..=order_max` at `argument` in one backward sweep.
///
/// Negative arguments are accepted through `J_n(-x) = (-1)^n J_n(x)`.
pub fn bessel_row(order_max: usize, argument: f64) -> Result<BesselRow> {
    check_argument(argument)?;
    let values = if argument == 0.0 {
        let mut v = vec![0.0; order_max + 1];
        v[0] = 1.0;
        v
    } else {
        let mut v = miller_row(order_max, argument.abs());
        if argument < 0.0 {
            for (n, value) in v.iter_mut().enumerate() {
                if n % 2 == 1 {
                    *value = -*value;
                }
            }
        }
        v
    };
    Ok(BesselRow {
        order_max,
        argument,
        values,
    })
}

/// `J_order(argument)` for any integer order.
pub fn bessel_j(order: i64, argument: f64) -> Result<f64> {
    let n = order.unsigned_abs() as usize;
    let row = bessel_row(n, argument)?;
    Ok(row.get(order).expect("row covers requested order"))
}

// --- double-double arithmetic for the series oracle --------------------------

#[derive(Debug, Clone, Copy)]
struct DoubleDouble {
    hi: f64,
    lo: f64,
}

impl DoubleDouble {
    const ZERO: Self = Self { hi: 0.0, lo: 0.0 };

    fn from_f64(v: f64) -> Self {
        Self { hi: v, lo: 0.0 }
    }

    fn two_sum(a: f64, b: f64) -> Self {
        let s = a + b;
        let bb = s - a;
        let err = (a - (s - bb)) + (b - bb);
        Self { hi: s, lo: err }
    }

    fn quick_two_sum(a: f64, b: f64) -> Self {
        let s = a + b;
        Self {
            hi: s,
            lo: b - (s - a),
        }
    }

    fn two_prod(a: f64, b: f64) -> Self {
        let p = a * b;
        Self {
            hi: p,
            lo: a.mul_add(b, -p),
        }
    }

    fn add(self, other: Self) -> Self {
        let s = Self::two_sum(self.hi, other.hi);
        Self::quick_two_sum(s.hi, s.lo + self.lo + other.lo)
    }

    fn mul(self, other: Self) -> Self {
        let p = Self::two_prod(self.hi, other.hi);
        Self::quick_two_sum(p.hi, p.lo + self.hi * other.lo + self.lo * other.hi)
    }

    fn div_f64(self, d: f64) -> Self {
        let q1 = self.hi / d;
        let p = Self::two_prod(q1, d);
        let r = ((self.hi - p.hi) - p.lo + self.lo) / d;
        Self::quick_two_sum(q1, r)
    }

    fn neg(self) -> Self {
        Self {
            hi: -self.hi,
            lo: -self.lo,
        }
    }

    fn to_f64(self) -> f64 {
        self.hi + self.lo
    }
}

fn check_oracle_box(order: u32, argument: f64) -> Result<()> {
    if !(0.0..=ORACLE_MAX_ARGUMENT).contains(&argument) || order > ORACLE_MAX_ORDER {
        return Err(Error::Domain(format!(
            "series oracle is only valid for 0 <= x <= {ORACLE_MAX_ARGUMENT} and n <= {ORACLE_MAX_ORDER} \
             (got n = {order}, x = {argument})"
        )));
    }
    Ok(())
}

/// Partial sum of the ascending series
/// `J_n(x) = Σ_m (-1)^m (x/2)^{2m+n} / (m! (m+n)!)` with `terms` terms.
///
/// Terms are accumulated in double-double arithmetic so the cancellation
/// between large alternating terms (up to ~1e11 at `x = 30`) does not
/// destroy the result. The truncation error is bounded by
/// [`series_truncation_bound`].
pub fn bessel_j_series_oracle(order: u32, argument: f64, terms: u32) -> Result<f64> {
    check_oracle_box(order, argument)?;
    if terms == 0 {
        return Err(Error::Domain(
            "series oracle needs at least one term".into(),
        ));
    }
    let half = argument / 2.0;
    let q = DoubleDouble::two_prod(half, half);

    let mut term = DoubleDouble::from_f64(1.0);
    for k in 1..=order {
        term = term.mul(DoubleDouble::from_f64(half)).div_f64(k as f64);
    }

    let mut sum = DoubleDouble::ZERO;
    for m in 0..terms {
        sum = sum.add(term);
        let m1 = (m + 1) as f64;
        term = term.mul(q).neg().div_f64(m1 * (m1 + order as f64));
    }
    Ok(sum.to_f64())
}

/// Magnitude of the first omitted term of the series after `terms` terms.
/// Once the terms are decreasing (`m² > (x/2)²` suffices) the series is
/// alternating and this bounds the truncation error.
pub fn series_truncation_bound(order: u32, argument: f64, terms: u32) -> f64 {
    let half = argument.abs() / 2.0;
    if half == 0.0 {
        return if terms == 0 && order == 0 { 1.0 } else { 0.0 };
    }
    let log_term =
        (order + 2 * terms) as f64 * half.ln() - ln_factorial(terms) - ln_factorial(terms + order);
    log_term.exp()
}

fn ln_factorial(n: u32) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

// --- identity helpers --------------------------------------------------------

/// One-sided even-order moment `Σ_{k=1}^{k_max} (2k)² J_{2k}(a)`, which
/// converges to `a²/2`. (The two-sided sum over all integers `k` is `a²`.)
pub fn even_order_second_moment(a: f64, k_max: usize) -> Result<f64> {
    let row = bessel_row(2 * k_max, a)?;
    Ok((1..=k_max)
        .map(|k| {
            let order = (2 * k) as f64;
            order * order * row.values[2 * k]
        })
        .sum())
}

/// `J_0(x)² + 2 Σ_{k=1}^{order_max} J_k(x)²`, equal to one for a complete
/// row. This is independent of the linear normalization used by Miller.
pub fn squared_sum(row: &BesselRow) -> f64 {
    let tail: f64 = row.values.iter().skip(1).map(|v| v * v).sum();
    row.values[0] * row.values[0] + 2.0 * tail
}

/// Largest defect of `J_{n-1} + J_{n+1} = (2n/x) J_n` over `1 <= n < order_max`,
/// relative to the largest of the three magnitudes involved. Triples that
/// touch a flushed entry are skipped.
pub fn recurrence_defect(row: &BesselRow) -> f64 {
    let x = row.argument;
    if x == 0.0 {
        return 0.0;
    }
    let v = &row.values;
    (1..row.order_max)
        .filter(|&n| v[n - 1] != 0.0 && v[n] != 0.0 && v[n + 1] != 0.0)
        .map(|n| {
            let lhs = v[n - 1] + v[n + 1];
            let rhs = 2.0 * n as f64 / x * v[n];
            let scale = v[n - 1].abs().max(v[n].abs()).max(v[n + 1].abs());
            (lhs - rhs).abs() / scale
        })
        .fold(0.0, f64::max)
}

/// `J_0 + 2 Σ_{k>=1} J_{2k}` over the orders held in `row`.
pub fn neumann_sum(row: &BesselRow) -> f64 {
    row.values[0] + 2.0 * row.values.iter().skip(2).step_by(2).sum::<f64>()
}
