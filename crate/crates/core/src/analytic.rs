//! Closed forms for ordered chains and the delta-emission model.
//!
//! Ordered infinite chain, excitation at the origin:
//! `α_x(t) = (-i)^x J_x(2t)`. Ordered half chain, excitation on its first
//! site: `α_x(t) = (-i)^x (x+1)/t · J_{x+1}(2t)`. A disordered core of
//! half-width `L` is modelled as emitting amplitude `β` into each lead at
//! time `τ`, after which the lead carries a shifted half-chain wave.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bessel::{bessel_j, bessel_row};
use crate::error::{Error, Result};
use crate::propagator::WaveState;

/// Pad beyond the light cone `|x| <= 2t` used for every truncated lattice sum.
pub const LIGHT_CONE_PAD: usize = 60;

/// `(-i)^x` for any integer `x`.
pub fn minus_i_pow(x: i64) -> Complex64 {
    match x.rem_euclid(4) {
        0 => Complex64::new(1.0, 0.0),
        1 => Complex64::new(0.0, -1.0),
        2 => Complex64::new(-1.0, 0.0),
        _ => Complex64::new(0.0, 1.0),
    }
}

fn check_time(t: f64) -> Result<()> {
    if t.is_finite() && t >= 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "time must be finite and non-negative, got {t}"
        )))
    }
}

/// Truncation radius `ceil(2t) + 60` for sums over the infinite chain.
pub fn light_cone_radius(t: f64) -> usize {
    (2.0 * t).ceil() as usize + LIGHT_CONE_PAD
}

pub fn infinite_amplitude(x: i64, t: f64) -> Result<Complex64> {
    check_time(t)?;
    Ok(minus_i_pow(x) * bessel_j(x, 2.0 * t)?)
}

/// The infinite-chain solution at time `t` on sites `|x| <= ceil(2t) + 60`.
pub fn infinite_chain_state(t: f64) -> Result<WaveState> {
    check_time(t)?;
    let radius = light_cone_radius(t);
    let row = bessel_row(radius, 2.0 * t)?;
    let amplitudes = (-(radius as i64)..=radius as i64)
        .map(|x| minus_i_pow(x) * row.get(x).expect("row covers radius"))
        .collect();
    Ok(WaveState {
        amplitudes,
        time: t,
        origin: radius,
    })
}

/// Half-chain amplitude at site `x >= 0` (excitation started on `x = 0`).
pub fn semi_infinite_amplitude(x: i64, t: f64) -> Result<Complex64> {
    if x < 0 {
        return Err(Error::Domain(format!(
            "half-chain site must be >= 0, got {x}"
        )));
    }
    check_time(t)?;
    if t == 0.0 {
        let v = if x == 0 { 1.0 } else { 0.0 };
        return Ok(Complex64::new(v, 0.0));
    }
    let j = bessel_j(x + 1, 2.0 * t)?;
    Ok(minus_i_pow(x) * ((x + 1) as f64 / t * j))
}

/// Half-chain solution at time `t` on sites `0..=ceil(2t) + 60`; the origin
/// of the returned state is site 0.
pub fn semi_infinite_state(t: f64) -> Result<WaveState> {
    check_time(t)?;
    let radius = light_cone_radius(t);
    let amplitudes = if t == 0.0 {
        let mut v = vec![Complex64::new(0.0, 0.0); radius + 1];
        v[0] = Complex64::new(1.0, 0.0);
        v
    } else {
        let row = bessel_row(radius + 1, 2.0 * t)?;
        (0..=radius)
            .map(|x| minus_i_pow(x as i64) * ((x + 1) as f64 / t * row.values[x + 1]))
            .collect()
    };
    Ok(WaveState {
        amplitudes,
        time: t,
        origin: 0,
    })
}

/// Delta-function emission from a disordered core into the ordered leads.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmissionModel {
    /// Amplitude emitted into each lead; `|β| <= 1/√2`.
    pub beta: Complex64,
    /// Emission time.
    pub tau: f64,
    /// `|γ|`, the origin's share of the amplitude left in the core.
    pub gamma_mag: f64,
    pub half_width: usize,
}

impl EmissionModel {
    pub fn new(beta: f64, tau: f64, gamma_mag: f64, half_width: usize) -> Result<Self> {
        let m = Self {
            beta: Complex64::new(beta, 0.0),
            tau,
            gamma_mag,
            half_width,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        if 1.0 - 2.0 * self.beta.norm_sqr() < -1e-15 {
            return Err(Error::Domain(format!(
                "|beta| = {} exceeds 1/sqrt(2)",
                self.beta.norm()
            )));
        }
        if !(self.tau.is_finite() && self.tau >= 0.0) {
            return Err(Error::Domain(format!(
                "tau must be finite and >= 0, got {}",
                self.tau
            )));
        }
        if !(0.0..=1.0).contains(&self.gamma_mag) {
            return Err(Error::Domain(format!(
                "|gamma| must lie in [0, 1], got {}",
                self.gamma_mag
            )));
        }
        Ok(())
    }

    /// `√(1 - 2|β|²)`, the amplitude left inside the core.
    pub fn retained(&self) -> f64 {
        let remaining = 1.0 - 2.0 * self.beta.norm_sqr();
        // |β| = 1/√2 is not representable; treat rounding-level residue as empty.
        if remaining <= 1e-15 {
            0.0
        } else {
            remaining.sqrt()
        }
    }
}

/// Lead amplitude `x >= 1` sites beyond the core boundary.
pub fn emission_amplitude(x: i64, t: f64, model: &EmissionModel) -> Result<Complex64> {
    if x < 1 {
        return Err(Error::Domain(format!(
            "lead site offset must be >= 1, got {x}"
        )));
    }
    if t <= model.tau {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let elapsed = t - model.tau;
    let j = bessel_j(x, 2.0 * elapsed)?;
    Ok(model.beta * minus_i_pow(x - 1) * (x as f64 / elapsed * j))
}

/// `(2t², 16/√π · t^{5/2})`; the upper value is an asymptotic bound for `t ≫ 1`.
pub fn w_bounds_ordered(t: f64) -> (f64, f64) {
    (2.0 * t * t, 16.0 / PI.sqrt() * t.powf(2.5))
}

pub fn w_asymptote_coefficient() -> f64 {
    32.0 / (3.0 * PI.powf(1.5))
}

pub fn m_asymptote_coefficient() -> f64 {
    128.0 / (3.0 * PI.powi(3))
}

/// Oscillation-averaged ordered-chain growth `(W, M)` at time `t`.
pub fn asymptotes_ordered(t: f64) -> (f64, f64) {
    (
        w_asymptote_coefficient() * t.powf(2.5),
        m_asymptote_coefficient() * t * t,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MoExpansion {
    /// `32 |βγ| √(1-2|β|²) / π^{3/2} · T^{5/2}`.
    Leading,
    /// Leading term plus the `L`-dependent polynomial corrections in `T`.
    Full,
}

/// Ordered-lead moment `M_o(t)` of the emission model, `T = t - τ > 0`.
pub fn m_o_asymptote(t: f64, model: &EmissionModel) -> Result<f64> {
    m_o_asymptote_with(t, model, MoExpansion::Leading)
}

pub fn m_o_asymptote_with(t: f64, model: &EmissionModel, form: MoExpansion) -> Result<f64> {
    if !(t > model.tau) {
        return Err(Error::Domain(format!(
            "M_o is only defined after emission (t = {t}, tau = {})",
            model.tau
        )));
    }
    let big_t = t - model.tau;
    let weight = model.beta.norm() * model.gamma_mag * model.retained();
    Ok(match form {
        MoExpansion::Leading => 32.0 * weight / PI.powf(1.5) * big_t.powf(2.5),
        MoExpansion::Full => {
            let l = model.half_width as f64;
            let poly = 8.0 * big_t.powi(4)
                + (32.0 * l / 3.0 - 8.0) * big_t.powi(3)
                + (4.0 * l * l - 8.0 * l + 3.0) * big_t.powi(2)
                + (4.0 * l - 2.0 - 2.0 * l * l) * big_t
                - (18.0 + 16.0 * l / 3.0 + 2.0 * l * l);
            4.0 * weight / (big_t.powf(1.5) * PI.powf(1.5)) * poly
        }
    })
}

/// Upper limit `4 |γ| √(1-2|β|²) L²` on the core's contribution `M_d`.
pub fn m_d_bound(model: &EmissionModel) -> f64 {
    let l = model.half_width as f64;
    4.0 * model.gamma_mag * model.retained() * l * l
}

/// Light-cone approximation of `J_x(z)`: `√(2/(πz)) cos(z - xπ/2 - π/4)`
/// for `|x| <= z` and zero outside.
pub fn wavefront_approximation(x: i64, z: f64) -> Result<f64> {
    if !(z > 0.0) {
        return Err(Error::Domain(format!("argument must be positive, got {z}")));
    }
    if (x.unsigned_abs() as f64) > z {
        return Ok(0.0);
    }
    Ok((2.0 / (PI * z)).sqrt() * (z - x as f64 * PI / 2.0 - PI / 4.0).cos())
}
