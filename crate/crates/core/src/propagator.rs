//! Time evolution of single-excitation states under a tridiagonal Hamiltonian.
//!
//! The production path is a Chebyshev expansion
//!
//! ```text
//! e^{-iHt} = e^{-iat} Σ_k (2 - δ_k0) (-i)^k J_k(bt) T_k(H̃),   H̃ = (H - a) / b
//! ```
//!
//! with `a`, `b` the center and half-width of the Gershgorin interval. Only
//! tridiagonal matrix-vector products are needed. A dense eigendecomposition
//! route is kept as an oracle for small chains.

use nalgebra::{DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::bessel::bessel_row;
use crate::chain::{spectral_bounds, Hamiltonian};
use crate::error::{Error, Result};

/// Largest chain accepted by [`evolve_diagonalization`].
pub const DIAGONALIZATION_MAX_SITES: usize = 2048;

/// Sites kept free between the outermost wavefront and the chain ends.
pub const BOUNDARY_MARGIN: usize = 10;

/// Amplitudes `α_x` in the site basis at a given time.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveState {
    pub amplitudes: Vec<Complex64>,
    pub time: f64,
    pub origin: usize,
}

impl WaveState {
    /// The excitation sitting on `origin` at `t = 0`.
    pub fn localized(num_sites: usize, origin: usize) -> Result<Self> {
        if origin >= num_sites {
            return Err(Error::Domain(format!(
                "origin {origin} outside a {num_sites}-site chain"
            )));
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); num_sites];
        amplitudes[origin] = Complex64::new(1.0, 0.0);
        Ok(Self {
            amplitudes,
            time: 0.0,
            origin,
        })
    }

    pub fn num_sites(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Amplitude at signed offset `x` from the origin, zero off the chain.
    pub fn at_offset(&self, x: i64) -> Complex64 {
        let idx = self.origin as i64 + x;
        if idx < 0 || idx >= self.amplitudes.len() as i64 {
            Complex64::new(0.0, 0.0)
        } else {
            self.amplitudes[idx as usize]
        }
    }
}

fn check_inputs(h: &Hamiltonian, initial: &WaveState, delta_t: f64) -> Result<()> {
    if !delta_t.is_finite() {
        return Err(Error::Domain(format!(
            "time step must be finite, got {delta_t}"
        )));
    }
    if initial.num_sites() != h.num_sites() {
        return Err(Error::Domain(format!(
            "state has {} sites but Hamiltonian has {}",
            initial.num_sites(),
            h.num_sites()
        )));
    }
    if initial
        .amplitudes
        .iter()
        .any(|a| !a.re.is_finite() || !a.im.is_finite())
    {
        return Err(Error::Domain("state amplitudes must be finite".into()));
    }
    Ok(())
}

/// Number of Chebyshev terms used for a step with `b·|Δt| = x`.
pub fn chebyshev_order(x: f64) -> usize {
    x.ceil() as usize + 40 + (10.0 * x.ln_1p()).ceil() as usize
}

/// `e^{-iHΔt} |initial⟩` by Chebyshev expansion. Negative steps evolve
/// backwards in time.
pub fn evolve_chebyshev(h: &Hamiltonian, initial: &WaveState, delta_t: f64) -> Result<WaveState> {
    check_inputs(h, initial, delta_t)?;
    if delta_t == 0.0 {
        return Ok(initial.clone());
    }
    let (emin, emax) = spectral_bounds(h);
    let center = 0.5 * (emax + emin);
    let half_width = 0.5 * (emax - emin);
    let global_phase = Complex64::from_polar(1.0, -center * delta_t);
    let time = initial.time + delta_t;

    if half_width == 0.0 {
        let amplitudes = initial
            .amplitudes
            .iter()
            .map(|a| a * global_phase)
            .collect();
        return Ok(WaveState {
            amplitudes,
            time,
            origin: initial.origin,
        });
    }

    let x = half_width * delta_t.abs();
    let order = chebyshev_order(x);
    let row = bessel_row(order, x)?;
    // (-i)^k J_k(b Δt); for Δt < 0 the parity of J_k turns this into i^k J_k(b|Δt|).
    let step_phase = if delta_t > 0.0 {
        Complex64::new(0.0, -1.0)
    } else {
        Complex64::new(0.0, 1.0)
    };

    let n = h.num_sites();
    let inv_b = 1.0 / half_width;
    let diag: Vec<f64> = h.diag.iter().map(|d| (d - center) * inv_b).collect();
    let off: Vec<f64> = h.offdiag.iter().map(|t| t * inv_b).collect();

    let mut prev = initial.amplitudes.clone();
    let mut cur = vec![Complex64::new(0.0, 0.0); n];
    scaled_apply(&diag, &off, &prev, &mut cur);

    let mut phase = step_phase;
    let c1 = phase * (2.0 * row.values[1.min(order)]);
    let c0 = row.values[0];
    let mut acc: Vec<Complex64> = prev
        .iter()
        .zip(&cur)
        .map(|(p, c)| p * c0 + c * c1)
        .collect();

    for k in 2..=order {
        phase *= step_phase;
        let jk = row.values[k];
        // Past the turning point J_k only decreases; a flushed coefficient
        // means every later one is zero too.
        if jk == 0.0 && k as f64 > x {
            break;
        }
        let coeff = phase * (2.0 * jk);
        // prev <- 2 H̃ cur - prev, accumulated in a single sweep.
        for i in 0..n {
            let mut hv = cur[i] * diag[i];
            if i > 0 {
                hv += cur[i - 1] * off[i - 1];
            }
            if i + 1 < n {
                hv += cur[i + 1] * off[i];
            }
            let next = hv * 2.0 - prev[i];
            prev[i] = next;
            acc[i] += next * coeff;
        }
        std::mem::swap(&mut prev, &mut cur);
    }

    for a in &mut acc {
        *a *= global_phase;
    }
    Ok(WaveState {
        amplitudes: acc,
        time,
        origin: initial.origin,
    })
}

fn scaled_apply(diag: &[f64], off: &[f64], v: &[Complex64], out: &mut [Complex64]) {
    let n = diag.len();
    for i in 0..n {
        let mut acc = v[i] * diag[i];
        if i > 0 {
            acc += v[i - 1] * off[i - 1];
        }
        if i + 1 < n {
            acc += v[i + 1] * off[i];
        }
        out[i] = acc;
    }
}

/// Exact evolution through the dense eigendecomposition `H = Q Λ Qᵀ`.
/// Intended as a test oracle; chains above [`DIAGONALIZATION_MAX_SITES`]
/// are refused.
pub fn evolve_diagonalization(
    h: &Hamiltonian,
    initial: &WaveState,
    delta_t: f64,
) -> Result<WaveState> {
    let n = h.num_sites();
    if n > DIAGONALIZATION_MAX_SITES {
        return Err(Error::Capacity {
            what: "chain length for dense diagonalization",
            size: n,
            limit: DIAGONALIZATION_MAX_SITES,
        });
    }
    check_inputs(h, initial, delta_t)?;
    if delta_t == 0.0 {
        return Ok(initial.clone());
    }
    let eig = SymmetricEigen::new(h.to_dense());
    let q = &eig.eigenvectors;
    let re = DVector::from_iterator(n, initial.amplitudes.iter().map(|a| a.re));
    let im = DVector::from_iterator(n, initial.amplitudes.iter().map(|a| a.im));
    let proj_re = q.tr_mul(&re);
    let proj_im = q.tr_mul(&im);

    let mut rot_re = DVector::zeros(n);
    let mut rot_im = DVector::zeros(n);
    for k in 0..n {
        let c = Complex64::new(proj_re[k], proj_im[k])
            * Complex64::from_polar(1.0, -eig.eigenvalues[k] * delta_t);
        rot_re[k] = c.re;
        rot_im[k] = c.im;
    }
    let out_re = q * rot_re;
    let out_im = q * rot_im;
    let amplitudes = (0..n)
        .map(|k| Complex64::new(out_re[k], out_im[k]))
        .collect();
    Ok(WaveState {
        amplitudes,
        time: initial.time + delta_t,
        origin: initial.origin,
    })
}

/// Raised when the light cone of a run can reach the chain ends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BudgetViolation {
    pub t_max: f64,
    /// `2 t_max + (2L + 1)` sites.
    pub required: f64,
    /// Distance from the origin to the nearer chain end, minus the margin.
    pub available: f64,
}

/// Checks the no-reflection budget `2 t_max + (2L + 1) <= d - 10`, where `d`
/// is the distance from the origin to the nearer chain end. The wavefront of
/// the unit-hopping chain travels two sites per unit time.
pub fn check_boundary_budget(
    num_sites: usize,
    origin: usize,
    half_width: usize,
    t_max: f64,
) -> Option<BudgetViolation> {
    let dist = origin.min(num_sites.saturating_sub(1).saturating_sub(origin));
    let required = 2.0 * t_max + (2 * half_width + 1) as f64;
    let available = dist as f64 - BOUNDARY_MARGIN as f64;
    (required > available).then_some(BudgetViolation {
        t_max,
        required,
        available,
    })
}

/// Evolves the excitation launched at `origin` through the ascending sample
/// `times`, chaining one Chebyshev step per gap, and hands each state to
/// `visit`. Returns the boundary-budget violation, if any (also logged).
pub fn evolve_series_with<F>(
    h: &Hamiltonian,
    origin: usize,
    times: &[f64],
    half_width: usize,
    mut visit: F,
) -> Result<Option<BudgetViolation>>
where
    F: FnMut(&WaveState) -> Result<()>,
{
    validate_times(times)?;
    let mut state = WaveState::localized(h.num_sites(), origin)?;
    let violation = times
        .last()
        .and_then(|&t_max| check_boundary_budget(h.num_sites(), origin, half_width, t_max));
    if let Some(v) = violation {
        log::warn!(
            "boundary budget exceeded: wavefront needs {} sites, {} available",
            v.required,
            v.available
        );
    }
    for &t in times {
        let dt = t - state.time;
        if dt > 0.0 {
            state = evolve_chebyshev(h, &state, dt)?;
            // Pin the clock to the sample grid so gaps do not accumulate rounding.
            state.time = t;
        }
        visit(&state)?;
    }
    Ok(violation)
}

/// Collecting form of [`evolve_series_with`]; keeps every state in memory.
pub fn evolve_series(
    h: &Hamiltonian,
    origin: usize,
    times: &[f64],
    half_width: usize,
) -> Result<(Vec<WaveState>, Option<BudgetViolation>)> {
    let mut states = Vec::with_capacity(times.len());
    let violation = evolve_series_with(h, origin, times, half_width, |s| {
        states.push(s.clone());
        Ok(())
    })?;
    Ok((states, violation))
}

fn validate_times(times: &[f64]) -> Result<()> {
    if let Some(&first) = times.first() {
        if !(first >= 0.0) {
            return Err(Error::Domain(format!(
                "sample times must start at t >= 0, got {first}"
            )));
        }
    }
    if times.iter().any(|t| !t.is_finite()) {
        return Err(Error::Domain("sample times must be finite".into()));
    }
    if let Some(w) = times.windows(2).find(|w| w[1] <= w[0]) {
        return Err(Error::Domain(format!(
            "sample times must be strictly ascending ({} then {})",
            w[0], w[1]
        )));
    }
    Ok(())
}
