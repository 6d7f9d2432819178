//! Single-excitation Hamiltonians for ordered and centrally disordered XXZ chains.
//!
//! With `Jx = Jy = Γ` the total z-spin is conserved and the one-up-spin sector
//! of an `N`-site chain is spanned by `|k⟩`, the state with site `k` excited.
//! In that basis the Hamiltonian is real symmetric tridiagonal: hopping `Γ`
//! on the off-diagonals and on-site energies on the diagonal.
//!
//! # Energy units
//!
//! The hopping is normalized to `Γ` (the Pauli operator `σxσx + σyσy` has
//! matrix element `2Γ`, so the whole Hamiltonian is divided by two). The same
//! factor applies to the Ising part: exciting site `k` changes the
//! `Jz σzσz` energy by `-2 (Jz_{k-1,k} + Jz_{k,k+1})` in Pauli units, i.e. by
//! `-(Jz_{k-1,k} + Jz_{k,k+1})` in hopping units. The constant `Σ Jz` is a
//! global phase and is dropped, and the overall sign is selectable.
//!
//! # Disorder streams
//!
//! Realization `r` of a spec with seed `s` draws from a ChaCha8 generator
//! seeded (via `SeedableRng::seed_from_u64`) with
//! `splitmix64(s ^ splitmix64(r))`, where `splitmix64` is the standard
//! SplitMix64 output function applied to `z + 0x9E3779B97F4A7C15`. Each draw
//! takes the top 53 bits of `next_u64()` as `u ∈ [0, 1)` and returns
//! `low + (high - low) u`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DisorderMode {
    /// Random `Jz` on the bonds inside the region, mapped onto the diagonal.
    #[default]
    JzCoupling,
    /// Random z-field on each site of the region.
    OnsiteField,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DiagSign {
    #[default]
    Plus,
    Minus,
}

impl DiagSign {
    pub fn factor(self) -> f64 {
        match self {
            DiagSign::Plus => 1.0,
            DiagSign::Minus => -1.0,
        }
    }
}

/// A disordered region covering sites `-L..=+L` around the origin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DisorderSpec {
    #[serde(default)]
    pub mode: DisorderMode,
    pub half_width: usize,
    pub low: f64,
    pub high: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub diag_sign: DiagSign,
}

impl DisorderSpec {
    pub fn ordered() -> Self {
        Self {
            mode: DisorderMode::JzCoupling,
            half_width: 0,
            low: 0.0,
            high: 0.0,
            seed: 0,
            diag_sign: DiagSign::Plus,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !self.low.is_finite() || !self.high.is_finite() {
            return Err(Error::Spec("disorder bounds must be finite".into()));
        }
        if self.low > self.high {
            return Err(Error::Spec(format!(
                "disorder bounds out of order: low {} > high {}",
                self.low, self.high
            )));
        }
        Ok(())
    }

    /// True when every realization yields the ordered chain.
    pub fn is_ordered(&self) -> bool {
        (self.low == 0.0 && self.high == 0.0)
            || (self.mode == DisorderMode::JzCoupling && self.half_width == 0)
    }

    pub fn region_len(&self) -> usize {
        2 * self.half_width + 1
    }
}

impl Default for DisorderSpec {
    fn default() -> Self {
        Self::ordered()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainSpec {
    pub num_sites: usize,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    #[serde(default)]
    pub disorder: DisorderSpec,
}

fn default_gamma() -> f64 {
    1.0
}

impl ChainSpec {
    pub fn ordered(num_sites: usize) -> Self {
        Self {
            num_sites,
            gamma: 1.0,
            disorder: DisorderSpec::ordered(),
        }
    }

    pub fn with_disorder(num_sites: usize, disorder: DisorderSpec) -> Self {
        Self {
            num_sites,
            gamma: 1.0,
            disorder,
        }
    }

    /// Index of the initially excited site.
    pub fn origin(&self) -> usize {
        (self.num_sites - 1) / 2
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_sites == 0 || self.num_sites % 2 == 0 {
            return Err(Error::Spec(format!(
                "num_sites must be odd and positive, got {}",
                self.num_sites
            )));
        }
        if !self.gamma.is_finite() {
            return Err(Error::Spec("gamma must be finite".into()));
        }
        self.disorder.validate()?;
        if self.disorder.region_len() > self.num_sites {
            return Err(Error::Spec(format!(
                "disordered region of {} sites does not fit in a {}-site chain",
                self.disorder.region_len(),
                self.num_sites
            )));
        }
        Ok(())
    }
}

/// SplitMix64 output function.
pub fn splitmix64(z: u64) -> u64 {
    let mut z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn realization_seed(seed: u64, realization_index: u64) -> u64 {
    splitmix64(seed ^ splitmix64(realization_index))
}

/// `2L + 1` uniform draws in `[low, high)` for one realization.
pub fn sample_disorder(spec: &DisorderSpec, realization_index: u64) -> Result<Vec<f64>> {
    spec.validate()?;
    let n = spec.region_len();
    if spec.low == spec.high {
        return Ok(vec![spec.low; n]);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(realization_seed(spec.seed, realization_index));
    let width = spec.high - spec.low;
    Ok((0..n)
        .map(|_| {
            let u = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
            let v = spec.low + width * u;
            if v >= spec.high {
                spec.high.next_down()
            } else {
                v
            }
        })
        .collect())
}

/// Real symmetric tridiagonal Hamiltonian in the single-excitation basis.
#[derive(Debug, Clone, PartialEq)]
pub struct Hamiltonian {
    pub diag: Vec<f64>,
    pub offdiag: Vec<f64>,
}

impl Hamiltonian {
    pub fn new(diag: Vec<f64>, offdiag: Vec<f64>) -> Result<Self> {
        if diag.is_empty() || offdiag.len() + 1 != diag.len() {
            return Err(Error::Spec(format!(
                "tridiagonal shape mismatch: {} diagonal and {} off-diagonal entries",
                diag.len(),
                offdiag.len()
            )));
        }
        if diag.iter().chain(&offdiag).any(|v| !v.is_finite()) {
            return Err(Error::Domain("Hamiltonian entries must be finite".into()));
        }
        Ok(Self { diag, offdiag })
    }

    /// Uniform hopping `gamma`, zero diagonal.
    pub fn ordered(num_sites: usize, gamma: f64) -> Self {
        Self {
            diag: vec![0.0; num_sites],
            offdiag: vec![gamma; num_sites.saturating_sub(1)],
        }
    }

    pub fn num_sites(&self) -> usize {
        self.diag.len()
    }

    /// `out = H v`.
    pub fn apply(&self, v: &[Complex64], out: &mut [Complex64]) {
        let n = self.diag.len();
        debug_assert_eq!(v.len(), n);
        debug_assert_eq!(out.len(), n);
        for k in 0..n {
            let mut acc = v[k] * self.diag[k];
            if k > 0 {
                acc += v[k - 1] * self.offdiag[k - 1];
            }
            if k + 1 < n {
                acc += v[k + 1] * self.offdiag[k];
            }
            out[k] = acc;
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.num_sites();
        let mut m = DMatrix::zeros(n, n);
        for k in 0..n {
            m[(k, k)] = self.diag[k];
        }
        for (k, &t) in self.offdiag.iter().enumerate() {
            m[(k, k + 1)] = t;
            m[(k + 1, k)] = t;
        }
        m
    }
}

/// Builds the tridiagonal Hamiltonian for one disorder realization.
///
/// In `jz_coupling` mode the first `2L` draws are the `Jz` of the bonds
/// strictly inside the region (between sites `-L..=+L`); the bonds that
/// connect the region to the leads carry no `Jz`. Each bond adds
/// `±Jz` to both sites it joins.
pub fn build_hamiltonian(spec: &ChainSpec, realization_index: u64) -> Result<Hamiltonian> {
    spec.validate()?;
    let n = spec.num_sites;
    let mut h = Hamiltonian::ordered(n, spec.gamma);
    let disorder = &spec.disorder;
    if disorder.is_ordered() {
        return Ok(h);
    }
    let draws = sample_disorder(disorder, realization_index)?;
    let first = spec.origin() - disorder.half_width;
    match disorder.mode {
        DisorderMode::JzCoupling => {
            let sign = disorder.diag_sign.factor();
            for (j, &jz) in draws.iter().take(2 * disorder.half_width).enumerate() {
                let left = first + j;
                h.diag[left] += sign * jz;
                h.diag[left + 1] += sign * jz;
            }
        }
        DisorderMode::OnsiteField => {
            for (j, &field) in draws.iter().enumerate() {
                h.diag[first + j] = field;
            }
        }
    }
    Ok(h)
}

/// Gershgorin enclosure `(emin, emax)` of the spectrum.
pub fn spectral_bounds(h: &Hamiltonian) -> (f64, f64) {
    let n = h.num_sites();
    let mut emin = f64::INFINITY;
    let mut emax = f64::NEG_INFINITY;
    for k in 0..n {
        let mut radius = 0.0;
        if k > 0 {
            radius += h.offdiag[k - 1].abs();
        }
        if k + 1 < n {
            radius += h.offdiag[k].abs();
        }
        emin = emin.min(h.diag[k] - radius);
        emax = emax.max(h.diag[k] + radius);
    }
    (emin, emax)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn jz_spec(n: usize, l: usize, low: f64, high: f64, seed: u64) -> ChainSpec {
        ChainSpec::with_disorder(
            n,
            DisorderSpec {
                mode: DisorderMode::JzCoupling,
                half_width: l,
                low,
                high,
                seed,
                diag_sign: DiagSign::Plus,
            },
        )
    }

    #[test]
    fn ordered_chain() {
        let h = build_hamiltonian(&ChainSpec::ordered(5), 0).unwrap();
        assert_eq!(h.diag, vec![0.0; 5]);
        assert_eq!(h.offdiag, vec![1.0; 4]);
    }

    #[test]
    fn onsite_degenerate() {
        let spec = ChainSpec::with_disorder(
            7,
            DisorderSpec {
                mode: DisorderMode::OnsiteField,
                half_width: 1,
                low: 0.5,
                high: 0.5,
                seed: 3,
                diag_sign: DiagSign::Plus,
            },
        );
        let h = build_hamiltonian(&spec, 0).unwrap();
        assert_eq!(h.diag, vec![0.0, 0.0, 0.5, 0.5, 0.5, 0.0, 0.0]);
    }

    #[test]
    fn jz_degenerate_adds_bond_values_to_both_ends() {
        let h = build_hamiltonian(&jz_spec(7, 1, 1.0, 1.0, 0), 0).unwrap();
        assert_eq!(h.diag, vec![0.0, 0.0, 1.0, 2.0, 1.0, 0.0, 0.0]);
        let mut spec = jz_spec(7, 1, 1.0, 1.0, 0);
        spec.disorder.diag_sign = DiagSign::Minus;
        let h = build_hamiltonian(&spec, 0).unwrap();
        assert_eq!(h.diag, vec![0.0, 0.0, -1.0, -2.0, -1.0, 0.0, 0.0]);
    }

    /// Applies `Σ_i [Γ(σxσx + σyσy) + Jz_i σzσz]` to computational basis
    /// states of a 7-spin chain (bit set = excited) and compares the
    /// one-excitation block with the tridiagonal construction.
    #[test]
    fn jz_mapping_matches_full_spin_operator() {
        let n = 7usize;
        let mut spec = jz_spec(n, 2, 0.0, 2.5, 11);
        spec.disorder.diag_sign = DiagSign::Minus;
        let draws = sample_disorder(&spec.disorder, 4).unwrap();
        let mut bond_jz = vec![0.0; n - 1];
        let first = spec.origin() - 2;
        for j in 0..4 {
            bond_jz[first + j] = draws[j];
        }

        let dim = 1usize << n;
        let mut full = vec![vec![Complex64::new(0.0, 0.0); dim]; dim];
        let zsign = |bit: bool| if bit { -1.0 } else { 1.0 };
        for state in 0..dim {
            for (i, &jz) in bond_jz.iter().enumerate() {
                let a = state >> i & 1 == 1;
                let b = state >> (i + 1) & 1 == 1;
                full[state][state] += jz * zsign(a) * zsign(b);
                let flipped = state ^ (1 << i) ^ (1 << (i + 1));
                // σx σx: flip both, amplitude 1.
                full[flipped][state] += Complex64::new(1.0, 0.0);
                // σy σy: σy|0⟩ = i|1⟩, σy|1⟩ = -i|0⟩.
                let ya = if a {
                    Complex64::new(0.0, -1.0)
                } else {
                    Complex64::new(0.0, 1.0)
                };
                let yb = if b {
                    Complex64::new(0.0, -1.0)
                } else {
                    Complex64::new(0.0, 1.0)
                };
                full[flipped][state] += ya * yb;
            }
        }

        let shift: f64 = bond_jz.iter().sum();
        let h = build_hamiltonian(&spec, 4).unwrap();
        let dense = h.to_dense();
        for r in 0..n {
            for c in 0..n {
                let mut e = full[1 << r][1 << c];
                if r == c {
                    e -= shift;
                }
                let scaled = e / 2.0;
                assert!(scaled.im.abs() < 1e-14);
                assert!((scaled.re - dense[(r, c)]).abs() < 1e-14, "({r},{c})");
            }
        }
    }

    #[test]
    fn disorder_is_local() {
        let spec = jz_spec(101, 10, 0.0, 2.5, 9);
        let h = build_hamiltonian(&spec, 3).unwrap();
        let o = spec.origin();
        for (k, &d) in h.diag.iter().enumerate() {
            if k + 11 < o || k > o + 11 {
                assert_eq!(d, 0.0);
            }
        }
        assert!(h.offdiag.iter().all(|&t| t == 1.0));
    }

    #[test]
    fn sampling_is_deterministic_and_in_range() {
        let d = DisorderSpec {
            half_width: 50,
            low: 0.0,
            high: 2.5,
            seed: 42,
            ..DisorderSpec::ordered()
        };
        let a = sample_disorder(&d, 0).unwrap();
        let b = sample_disorder(&d, 0).unwrap();
        let c = sample_disorder(&d, 1).unwrap();
        assert_eq!(a.len(), 101);
        assert!(a.iter().zip(&b).all(|(x, y)| x.to_bits() == y.to_bits()));
        assert_ne!(a, c);
        assert!(a.iter().all(|v| (0.0..2.5).contains(v)));
    }

    #[test]
    fn sample_mean_within_three_sigma() {
        let l = 5000;
        let d = DisorderSpec {
            half_width: l,
            low: 0.0,
            high: 2.5,
            seed: 42,
            ..DisorderSpec::ordered()
        };
        let v = sample_disorder(&d, 0).unwrap();
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        let sigma = 2.5 / (12.0 * (2 * l + 1) as f64).sqrt();
        assert!((mean - 1.25).abs() < 3.0 * sigma, "mean {mean}");
    }

    #[test]
    fn degenerate_distribution() {
        let d = DisorderSpec {
            half_width: 3,
            low: 0.7,
            high: 0.7,
            seed: 1,
            ..DisorderSpec::ordered()
        };
        assert_eq!(sample_disorder(&d, 9).unwrap(), vec![0.7; 7]);
    }

    #[test]
    fn invalid_specs() {
        assert!(ChainSpec::ordered(4).validate().is_err());
        assert!(ChainSpec::ordered(0).validate().is_err());
        assert!(build_hamiltonian(&jz_spec(5, 3, 0.0, 1.0, 0), 0).is_err());
        assert!(build_hamiltonian(&jz_spec(5, 1, 2.0, 1.0, 0), 0).is_err());
        assert!(Hamiltonian::new(vec![0.0; 3], vec![1.0; 3]).is_err());
    }

    #[test]
    fn gershgorin_examples() {
        assert_eq!(spectral_bounds(&Hamiltonian::ordered(9, 1.0)), (-2.0, 2.0));
        let single = Hamiltonian::new(vec![5.0], vec![]).unwrap();
        assert_eq!(spectral_bounds(&single), (5.0, 5.0));
    }

    #[test]
    fn gershgorin_encloses_dense_spectrum() {
        let spec = jz_spec(65, 10, 0.0, 2.5, 7);
        let h = build_hamiltonian(&spec, 0).unwrap();
        let (lo, hi) = spectral_bounds(&h);
        let eig = nalgebra::SymmetricEigen::new(h.to_dense());
        assert!(eig
            .eigenvalues
            .iter()
            .all(|&e| e >= lo - 1e-12 && e <= hi + 1e-12));
    }

    #[test]
    fn dense_form_is_symmetric() {
        let h = build_hamiltonian(&jz_spec(15, 3, 0.0, 2.5, 5), 2).unwrap();
        let m = h.to_dense();
        assert_eq!(m, m.transpose());
    }
}
