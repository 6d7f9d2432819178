//! Time-series analytics on moment curves: oscillation averaging, log-log
//! power-law fits, bound reports and emission-model fits.

use serde::{Deserialize, Serialize};

use crate::analytic::{emission_amplitude, infinite_chain_state, w_bounds_ordered, EmissionModel};
use crate::bessel::bessel_j;
use crate::error::{Error, Result};
use crate::observables::{moment_m, MomentSample};

/// Default averaging window: two periods of `|cos(2t - ...)|`.
pub const DEFAULT_AVERAGE_WINDOW: f64 = std::f64::consts::PI;

/// Tolerance on `W >= 2t²` in [`verify_bounds`].
pub const LOWER_BOUND_TOLERANCE: f64 = 1e-9;

/// The upper bound on `W` is only asymptotic; it is checked from here on.
pub const UPPER_BOUND_FROM: f64 = 5.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentSeries {
    pub samples: Vec<MomentSample>,
    pub spec_digest: String,
}

impl MomentSeries {
    pub fn new(samples: Vec<MomentSample>, spec_digest: impl Into<String>) -> Result<Self> {
        if let Some(w) = samples.windows(2).find(|w| w[1].time <= w[0].time) {
            return Err(Error::Domain(format!(
                "series times must be strictly increasing ({} then {})",
                w[0].time, w[1].time
            )));
        }
        Ok(Self {
            samples,
            spec_digest: spec_digest.into(),
        })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|s| s.time)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    M,
    W,
}

impl Field {
    pub fn get(self, s: &MomentSample) -> f64 {
        match self {
            Field::M => s.m,
            Field::W => s.w,
        }
    }
}

/// Moment series of the infinite ordered chain, from the Bessel solution.
pub fn ordered_analytic_series(times: &[f64], half_width: usize) -> Result<MomentSeries> {
    let samples = times
        .iter()
        .map(|&t| infinite_chain_state(t).map(|s| moment_m(&s, half_width)))
        .collect::<Result<Vec<_>>>()?;
    MomentSeries::new(samples, "analytic-ordered")
}

/// Centered moving average of every field over `window_width`.
///
/// Samples closer than half a window to either end are dropped.
pub fn time_average(series: &MomentSeries, window_width: f64) -> Result<MomentSeries> {
    let samples = &series.samples;
    if samples.is_empty() {
        return Err(Error::Domain("cannot average an empty series".into()));
    }
    if !(window_width.is_finite() && window_width > 0.0) {
        return Err(Error::Domain(format!(
            "window width must be positive, got {window_width}"
        )));
    }
    let n = samples.len();
    let first = samples[0].time;
    let last = samples[n - 1].time;
    if n < 2 || last - first < window_width {
        return Err(Error::Domain(format!(
            "series spanning {} cannot hold an averaging window of {window_width}",
            last - first
        )));
    }
    let spacing = (last - first) / (n - 1) as f64;
    if window_width < 2.0 * spacing {
        return Err(Error::Domain(format!(
            "window {window_width} holds fewer than two samples at spacing {spacing}"
        )));
    }

    let half = 0.5 * window_width;
    let slack = 1e-12 * window_width.max(last.abs());
    let mut out = Vec::new();
    let mut lo = 0;
    let mut hi = 0;
    for (i, s) in samples.iter().enumerate() {
        let t = s.time;
        while samples[lo].time < t - half - slack {
            lo += 1;
        }
        while hi + 1 < n && samples[hi + 1].time <= t + half + slack {
            hi += 1;
        }
        if t - first < half - slack || last - t < half - slack {
            continue;
        }
        let window = &samples[lo..=hi];
        let count = window.len() as f64;
        let mean = |f: fn(&MomentSample) -> f64| window.iter().map(f).sum::<f64>() / count;
        out.push(MomentSample {
            time: samples[i].time,
            m: mean(|s| s.m),
            w: mean(|s| s.w),
            alpha0_abs: mean(|s| s.alpha0_abs),
            m_o: mean(|s| s.m_o),
            m_d: mean(|s| s.m_d),
            norm_error: mean(|s| s.norm_error),
        });
    }
    if out.is_empty() {
        return Err(Error::Domain("averaging window trims every sample".into()));
    }
    MomentSeries::new(out, series.spec_digest.clone())
}

/// `field ≈ prefactor · t^exponent` over a time window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    pub exponent: f64,
    pub prefactor: f64,
    pub window: (f64, f64),
    /// Root-mean-square residual of the log-log line.
    pub rms_residual: f64,
    pub num_points: usize,
}

fn log_point(t: f64, value: f64) -> Result<(f64, f64)> {
    if !(t > 0.0) || !(value > 0.0) {
        return Err(Error::Domain(format!(
            "log-log analysis needs positive time and value (t = {t}, value = {value})"
        )));
    }
    Ok((t.ln(), value.ln()))
}

/// Ordinary least-squares line through `(ln t, ln field)` for `t` in `window`.
pub fn fit_power_law(
    series: &MomentSeries,
    field: Field,
    window: (f64, f64),
) -> Result<PowerLawFit> {
    let (t_lo, t_hi) = window;
    if !(t_lo < t_hi) {
        return Err(Error::Domain(format!(
            "fit window must satisfy lo < hi, got {t_lo}:{t_hi}"
        )));
    }
    let points = series
        .samples
        .iter()
        .filter(|s| s.time >= t_lo && s.time <= t_hi)
        .map(|s| log_point(s.time, field.get(s)))
        .collect::<Result<Vec<_>>>()?;
    if points.len() < 2 {
        return Err(Error::Domain(format!(
            "fit window {t_lo}:{t_hi} contains {} samples, need at least 2",
            points.len()
        )));
    }
    let n = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    if sxx == 0.0 {
        return Err(Error::Domain(
            "fit window holds a single distinct time".into(),
        ));
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let sse: f64 = points
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum();
    Ok(PowerLawFit {
        exponent: slope,
        prefactor: intercept.exp(),
        window,
        rms_residual: (sse / n).sqrt(),
        num_points: points.len(),
    })
}

/// Centered log-log slopes `d ln field / d ln t` at interior samples.
pub fn local_exponent(series: &MomentSeries, field: Field) -> Result<Vec<(f64, f64)>> {
    if series.len() < 3 {
        return Err(Error::Domain(
            "local exponents need at least three samples".into(),
        ));
    }
    let logs = series
        .samples
        .iter()
        .map(|s| log_point(s.time, field.get(s)))
        .collect::<Result<Vec<_>>>()?;
    Ok(logs
        .windows(3)
        .zip(&series.samples[1..])
        .map(|(w, s)| (s.time, (w[2].1 - w[0].1) / (w[2].0 - w[0].0)))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub time: f64,
    pub lower_ok: bool,
    /// True when the sample is below [`UPPER_BOUND_FROM`] (not checked).
    pub upper_ok: bool,
    pub upper_checked: bool,
    pub w: f64,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub rows: Vec<BoundCheck>,
    pub lower_failures: usize,
    pub upper_failures: usize,
    pub upper_checked: usize,
}

impl BoundReport {
    pub fn passed(&self) -> bool {
        self.lower_failures == 0 && self.upper_failures == 0
    }
}

/// Evaluates `2t² <= W(t)` everywhere and `W(t) <= 16/√π t^{5/2}` for
/// `t >= 5`. Only meaningful for ordered chains.
pub fn verify_bounds(series: &MomentSeries) -> BoundReport {
    let rows: Vec<BoundCheck> = series
        .samples
        .iter()
        .map(|s| {
            let (lower, upper) = w_bounds_ordered(s.time);
            let upper_checked = s.time >= UPPER_BOUND_FROM;
            BoundCheck {
                time: s.time,
                lower_ok: s.w >= lower - LOWER_BOUND_TOLERANCE,
                upper_ok: !upper_checked || s.w <= upper,
                upper_checked,
                w: s.w,
                lower,
                upper,
            }
        })
        .collect();
    BoundReport {
        lower_failures: rows.iter().filter(|r| !r.lower_ok).count(),
        upper_failures: rows.iter().filter(|r| !r.upper_ok).count(),
        upper_checked: rows.iter().filter(|r| r.upper_checked).count(),
        rows,
    }
}

/// Number of grid points in the emission-time scan.
const TAU_GRID: usize = 2000;

/// Least-squares `|β|` and residual for a fixed emission time.
fn emission_cost(trace: &[(f64, f64)], site: i64, tau: f64) -> (f64, f64) {
    let mut sum_ag = 0.0;
    let mut sum_gg = 0.0;
    let mut sum_aa = 0.0;
    for &(t, a) in trace {
        sum_aa += a * a;
        if t > tau {
            let elapsed = t - tau;
            let j = bessel_j(site, 2.0 * elapsed).unwrap_or(0.0);
            let g = (site as f64 / elapsed * j).abs();
            sum_ag += a * g;
            sum_gg += g * g;
        }
    }
    if sum_gg == 0.0 {
        return (0.0, sum_aa);
    }
    let beta = (sum_ag / sum_gg).max(0.0);
    let cost = (sum_aa - 2.0 * beta * sum_ag + beta * beta * sum_gg).max(0.0);
    (beta, cost)
}

/// Fits `|β|` and `τ` of the delta-emission model to `|α|` observed `site`
/// sites beyond the core boundary.
///
/// `τ` is scanned on a grid over `[0, t_last)` and refined by golden-section
/// search; for each `τ` the amplitude enters linearly, so `|β|` is the
/// closed-form least-squares slope. Phases of `β` and `γ` are not observable
/// from magnitudes and the returned `β` is real and non-negative. When an
/// origin trace `(t, |α_0|)` is supplied, `|γ|` is the mean of
/// `|α_0| / √(1 - 2|β|²)` over samples after `τ`, clamped to `[0, 1]`;
/// otherwise it is taken from `model_init`.
pub fn fit_emission(
    amplitude_trace: &[(f64, f64)],
    site: i64,
    model_init: &EmissionModel,
    origin_trace: Option<&[(f64, f64)]>,
) -> Result<EmissionModel> {
    if site < 1 {
        return Err(Error::Domain(format!(
            "lead site offset must be >= 1, got {site}"
        )));
    }
    if amplitude_trace
        .iter()
        .any(|&(t, a)| !t.is_finite() || !a.is_finite() || t < 0.0)
    {
        return Err(Error::FitFailure("trace contains invalid samples".into()));
    }
    if amplitude_trace.iter().all(|&(_, a)| a == 0.0) {
        return Err(Error::FitFailure("trace carries no amplitude".into()));
    }
    let t_last = amplitude_trace.iter().map(|p| p.0).fold(0.0, f64::max);
    if t_last <= 0.0 {
        return Err(Error::FitFailure(
            "trace has no positive sample times".into(),
        ));
    }

    let step = t_last / TAU_GRID as f64;
    let mut best_tau = 0.0;
    let mut best_cost = f64::INFINITY;
    for k in 0..TAU_GRID {
        let tau = k as f64 * step;
        let (_, cost) = emission_cost(amplitude_trace, site, tau);
        if cost < best_cost {
            best_cost = cost;
            best_tau = tau;
        }
    }

    let mut a = (best_tau - step).max(0.0);
    let mut b = (best_tau + step).min(t_last);
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = emission_cost(amplitude_trace, site, c).1;
    let mut fd = emission_cost(amplitude_trace, site, d).1;
    while b - a > 1e-11 * t_last.max(1.0) {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = emission_cost(amplitude_trace, site, c).1;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = emission_cost(amplitude_trace, site, d).1;
        }
    }
    let refined = 0.5 * (a + b);
    let (tau, (beta, _)) = [best_tau, refined]
        .into_iter()
        .map(|tau| (tau, emission_cost(amplitude_trace, site, tau)))
        .min_by(|x, y| x.1 .1.total_cmp(&y.1 .1))
        .expect("two candidates");

    let beta = beta.min(std::f64::consts::FRAC_1_SQRT_2);
    let mut model = EmissionModel {
        beta: num_complex::Complex64::new(beta, 0.0),
        tau,
        gamma_mag: model_init.gamma_mag,
        half_width: model_init.half_width,
    };
    if let Some(origin) = origin_trace {
        let retained = model.retained();
        let after: Vec<f64> = origin.iter().filter(|p| p.0 > tau).map(|p| p.1).collect();
        if retained > 0.0 && !after.is_empty() {
            let mean = after.iter().sum::<f64>() / after.len() as f64;
            model.gamma_mag = (mean / retained).clamp(0.0, 1.0);
        }
    }
    Ok(model)
}

/// Synthetic `|α|` trace of the emission model, as consumed by [`fit_emission`].
pub fn emission_trace(model: &EmissionModel, site: i64, times: &[f64]) -> Result<Vec<(f64, f64)>> {
    times
        .iter()
        .map(|&t| emission_amplitude(site, t, model).map(|a| (t, a.norm())))
        .collect()
}

/// Median and quartiles (linear interpolation between order statistics).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quartiles {
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
}

impl Quartiles {
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let q = |p: f64| {
            let pos = p * (v.len() - 1) as f64;
            let lo = pos.floor() as usize;
            let hi = pos.ceil() as usize;
            v[lo] + (v[hi] - v[lo]) * (pos - lo as f64)
        };
        Some(Self {
            q1: q(0.25),
            median: q(0.5),
            q3: q(0.75),
        })
    }

    pub fn iqr(&self) -> f64 {
        self.q3 - self.q1
    }
}
