//! Pairwise concurrence and spatial moments of single-excitation states.

use nalgebra::{DMatrix, Matrix4, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::propagator::WaveState;

/// Tolerance for the Hermitian / trace / positivity checks on density matrices.
pub const DENSITY_TOLERANCE: f64 = 1e-10;

/// Eigenvalues of `ρ` at or below this are treated as exact zeros when
/// factoring `ρ = B B†`.
const RANK_CUTOFF: f64 = 1e-14;

const PURE_STATE_TOLERANCE: f64 = 1e-8;

/// One row of a moment time series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentSample {
    pub time: f64,
    /// Second moment of concurrence with the origin, `M(t)`.
    pub m: f64,
    /// `W(t) = Σ_{x≠0} x² |α_x|`.
    pub w: f64,
    pub alpha0_abs: f64,
    /// Contribution of sites with `|x| > L`.
    pub m_o: f64,
    /// Contribution of sites with `0 < |x| <= L`.
    pub m_d: f64,
    /// `|1 - Σ |α_x|²|`.
    pub norm_error: f64,
}

fn check_pair(state: &WaveState, i: usize, j: usize) -> Result<()> {
    let n = state.num_sites();
    if i == j {
        return Err(Error::Domain(format!(
            "concurrence needs two distinct sites, got {i} twice"
        )));
    }
    if i >= n || j >= n {
        return Err(Error::Domain(format!(
            "site pair ({i}, {j}) outside a {n}-site chain"
        )));
    }
    Ok(())
}

/// Two-site reduced density matrix of a pure single-excitation state.
///
/// Basis order is `|0_i 0_j⟩, |1_i 0_j⟩, |0_i 1_j⟩, |1_i 1_j⟩`, so the
/// `(0, 0)` entry is `μ = 1 - |α_i|² - |α_j|²` and the middle block holds
/// `|α_i|², α_i α_j*, α_j α_i*, |α_j|²`.
pub fn reduced_density_pair(state: &WaveState, i: usize, j: usize) -> Result<Matrix4<Complex64>> {
    check_pair(state, i, j)?;
    let norm_error = (state.norm_sqr() - 1.0).abs();
    if norm_error > PURE_STATE_TOLERANCE {
        return Err(Error::Domain(format!(
            "reduced density needs a normalized pure state (norm error {norm_error:e})"
        )));
    }
    let ai = state.amplitudes[i];
    let aj = state.amplitudes[j];
    let mut rho = Matrix4::zeros();
    rho[(0, 0)] = Complex64::new(1.0 - ai.norm_sqr() - aj.norm_sqr(), 0.0);
    rho[(1, 1)] = Complex64::new(ai.norm_sqr(), 0.0);
    rho[(1, 2)] = ai * aj.conj();
    rho[(2, 1)] = aj * ai.conj();
    rho[(2, 2)] = Complex64::new(aj.norm_sqr(), 0.0);
    Ok(rho)
}

/// `σy ⊗ σy`, which is the same real matrix in either qubit order.
fn sigma_yy() -> Matrix4<Complex64> {
    let one = Complex64::new(1.0, 0.0);
    let mut s = Matrix4::zeros();
    s[(0, 3)] = -one;
    s[(1, 2)] = one;
    s[(2, 1)] = one;
    s[(3, 0)] = -one;
    s
}

/// Concurrence `max(λ1 - λ2 - λ3 - λ4, 0)` of a general two-qubit state,
/// where `λk²` are the eigenvalues of `ρ (σy⊗σy) ρ* (σy⊗σy)`.
///
/// The `λk` are obtained as singular values of `G = B† (σy⊗σy) B*` for any
/// factor `ρ = B B†`, since `G G†` shares the nonzero spectrum of `ρρ̃`.
/// This avoids square roots of numerically-zero eigenvalues.
pub fn wootters_concurrence(rho: &Matrix4<Complex64>) -> Result<f64> {
    let hermitian_defect = (rho - rho.adjoint())
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    if hermitian_defect > DENSITY_TOLERANCE {
        return Err(Error::Domain(format!(
            "density matrix not Hermitian (defect {hermitian_defect:e})"
        )));
    }
    let trace = rho.trace();
    if (trace - Complex64::new(1.0, 0.0)).norm() > DENSITY_TOLERANCE {
        return Err(Error::Domain(format!(
            "density matrix trace is {trace}, expected 1"
        )));
    }
    let hermitian = (rho + rho.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(hermitian);
    if let Some(min) = eig.eigenvalues.iter().cloned().reduce(f64::min) {
        if min < -DENSITY_TOLERANCE {
            return Err(Error::Domain(format!(
                "density matrix not positive (eigenvalue {min:e})"
            )));
        }
    }

    let kept: Vec<usize> = (0..4)
        .filter(|&k| eig.eigenvalues[k] > RANK_CUTOFF)
        .collect();
    if kept.is_empty() {
        return Ok(0.0);
    }
    let factor = DMatrix::from_fn(4, kept.len(), |r, c| {
        let k = kept[c];
        eig.eigenvectors[(r, k)] * eig.eigenvalues[k].sqrt()
    });
    let syy = DMatrix::from_iterator(4, 4, sigma_yy().iter().cloned());
    let g = factor.adjoint() * syy * factor.map(|z| z.conj());
    let mut lambdas: Vec<f64> = g.singular_values().iter().cloned().collect();
    lambdas.sort_by(|a, b| b.total_cmp(a));
    let lead = lambdas[0];
    let rest: f64 = lambdas[1..].iter().sum();
    Ok((lead - rest).clamp(0.0, 1.0))
}

/// `C_ij = 2 |α_i| |α_j|` for a single-excitation state.
pub fn concurrence_pair(state: &WaveState, i: usize, j: usize) -> Result<f64> {
    check_pair(state, i, j)?;
    Ok(2.0 * state.amplitudes[i].norm() * state.amplitudes[j].norm())
}

/// `W = Σ_{x≠0} x² |α_{origin+x}|` over all sites of the state.
pub fn moment_w(state: &WaveState) -> f64 {
    let (inner, outer) = split_w(state, usize::MAX);
    inner + outer
}

/// `W` split into `(|x| <= half_width, |x| > half_width)` parts.
fn split_w(state: &WaveState, half_width: usize) -> (f64, f64) {
    let origin = state.origin as i64;
    let mut inner = 0.0;
    let mut outer = 0.0;
    for (k, a) in state.amplitudes.iter().enumerate() {
        let x = k as i64 - origin;
        if x == 0 {
            continue;
        }
        let term = (x * x) as f64 * a.norm();
        if x.unsigned_abs() as usize <= half_width {
            inner += term;
        } else {
            outer += term;
        }
    }
    (inner, outer)
}

/// All moment observables of `state`, with the ordered/disordered split at
/// `half_width` (sites `|x| <= L` count as the disordered core).
pub fn moment_m(state: &WaveState, half_width: usize) -> MomentSample {
    let alpha0_abs = state.amplitudes[state.origin].norm();
    let (w_d, w_o) = split_w(state, half_width);
    let m_d = 2.0 * alpha0_abs * w_d;
    let m_o = 2.0 * alpha0_abs * w_o;
    MomentSample {
        time: state.time,
        m: m_d + m_o,
        w: w_d + w_o,
        alpha0_abs,
        m_o,
        m_d,
        norm_error: (1.0 - state.norm_sqr()).abs(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::infinite_chain_state;
    use proptest::prelude::*;

    fn state(amps: &[Complex64], origin: usize) -> WaveState {
        WaveState {
            amplitudes: amps.to_vec(),
            time: 0.0,
            origin,
        }
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Partial trace of the full 2^n pure state down to sites (i, j), in the
    /// basis order used by `reduced_density_pair`.
    fn brute_force_pair(amps: &[Complex64], i: usize, j: usize) -> Matrix4<Complex64> {
        let n = amps.len();
        let dim = 1usize << n;
        let mut psi = vec![c(0.0, 0.0); dim];
        for (k, a) in amps.iter().enumerate() {
            psi[1 << k] = *a;
        }
        let local = |s: usize| (s >> i & 1) | ((s >> j & 1) << 1);
        let env_mask = !((1 << i) | (1 << j)) & (dim - 1);
        let mut rho = Matrix4::zeros();
        for s in 0..dim {
            for t in 0..dim {
                if s & env_mask == t & env_mask {
                    rho[(local(s), local(t))] += psi[s] * psi[t].conj();
                }
            }
        }
        rho
    }

    #[test]
    fn reduced_density_examples() {
        let st = state(&[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)], 1);
        let rho = reduced_density_pair(&st, 1, 2).unwrap();
        assert_eq!(
            rho,
            Matrix4::from_diagonal(&nalgebra::Vector4::new(
                c(0.0, 0.0),
                c(1.0, 0.0),
                c(0.0, 0.0),
                c(0.0, 0.0)
            ))
        );

        let h = std::f64::consts::FRAC_1_SQRT_2;
        let st = state(&[c(h, 0.0), c(h, 0.0)], 0);
        let rho = reduced_density_pair(&st, 0, 1).unwrap();
        assert!(rho[(0, 0)].norm() < 1e-15);
        for (r, cc) in [(1, 1), (1, 2), (2, 1), (2, 2)] {
            assert!((rho[(r, cc)] - c(0.5, 0.0)).norm() < 1e-15);
        }

        let amps = [c(0.0, 0.0), c(0.6, 0.0), c(0.0, 0.8), c(0.0, 0.0)];
        let rho = reduced_density_pair(&state(&amps, 0), 1, 2).unwrap();
        assert!(rho[(0, 0)].norm() < 1e-15);
        assert!((rho[(1, 2)] - c(0.0, -0.48)).norm() < 1e-15);
        let brute = brute_force_pair(&amps, 1, 2);
        assert!((rho - brute).iter().all(|z| z.norm() < 1e-15));
    }

    #[test]
    fn reduced_density_matches_partial_trace_on_generic_state() {
        let raw = [c(0.3, -0.1), c(-0.2, 0.5), c(0.4, 0.4), c(0.1, -0.45)];
        let norm = raw.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let amps: Vec<_> = raw.iter().map(|z| z / norm).collect();
        let st = state(&amps, 0);
        for (i, j) in [(0, 1), (2, 0), (1, 3)] {
            let rho = reduced_density_pair(&st, i, j).unwrap();
            let brute = brute_force_pair(&amps, i, j);
            assert!((rho - brute).iter().all(|z| z.norm() < 1e-14), "({i}, {j})");
        }
    }

    #[test]
    fn reduced_density_errors() {
        let st = state(&[c(1.0, 0.0), c(0.0, 0.0)], 0);
        assert!(reduced_density_pair(&st, 1, 1).is_err());
        assert!(reduced_density_pair(&st, 0, 2).is_err());
        let unnormalized = state(&[c(1.0, 0.0), c(1.0, 0.0)], 0);
        assert!(reduced_density_pair(&unnormalized, 0, 1).is_err());
    }

    #[test]
    fn wootters_examples() {
        let mixed = Matrix4::identity() * c(0.25, 0.0);
        assert!(wootters_concurrence(&mixed).unwrap().abs() < 1e-14);

        let h = std::f64::consts::FRAC_1_SQRT_2;
        let phi = nalgebra::Vector4::new(c(h, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(h, 0.0));
        let bell = phi * phi.adjoint();
        assert!((wootters_concurrence(&bell).unwrap() - 1.0).abs() < 1e-14);

        let st = state(&[c(0.6, 0.0), c(0.8, 0.0)], 0);
        let rho = reduced_density_pair(&st, 0, 1).unwrap();
        assert!((wootters_concurrence(&rho).unwrap() - 0.96).abs() < 1e-14);
    }

    #[test]
    fn wootters_rejects_invalid_matrices() {
        let mut m = Matrix4::identity() * c(0.25, 0.0);
        m[(0, 1)] = c(0.1, 0.0);
        assert!(wootters_concurrence(&m).is_err());
        let m = Matrix4::identity() * c(0.5, 0.0);
        assert!(wootters_concurrence(&m).is_err());
        let m = Matrix4::from_diagonal(&nalgebra::Vector4::new(
            c(1.2, 0.0),
            c(-0.2, 0.0),
            c(0.0, 0.0),
            c(0.0, 0.0),
        ));
        assert!(wootters_concurrence(&m).is_err());
    }

    #[test]
    fn concurrence_examples() {
        let st = state(&[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)], 1);
        assert_eq!(concurrence_pair(&st, 0, 2).unwrap(), 0.0);
        assert_eq!(concurrence_pair(&st, 1, 2).unwrap(), 0.0);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let st = state(&[c(h, 0.0), c(0.0, h)], 0);
        assert!((concurrence_pair(&st, 0, 1).unwrap() - 1.0).abs() < 1e-15);
        assert!(concurrence_pair(&st, 0, 0).is_err());

        let st = infinite_chain_state(1.0).unwrap();
        let v = concurrence_pair(&st, st.origin, st.origin + 1).unwrap();
        assert!((v - 0.258_246_733_117_5).abs() < 1e-12);
    }

    #[test]
    fn moment_examples() {
        let st = state(&[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)], 1);
        assert_eq!(moment_w(&st), 0.0);
        let s = moment_m(&st, 0);
        assert_eq!((s.m, s.w, s.alpha0_abs), (0.0, 0.0, 1.0));

        let st = infinite_chain_state(1.0).unwrap();
        assert!((moment_w(&st) - 7.843_963_500_043).abs() < 1e-9);
        let s = moment_m(&st, 0);
        assert!((s.m - 3.512_382_199_160).abs() < 1e-9);
        assert_eq!(s.m_d, 0.0);
        assert!(s.norm_error < 1e-12);

        let s = moment_m(&st, st.num_sites());
        assert_eq!(s.m_o, 0.0);
        assert_eq!(s.m_d, s.m);
    }

    #[test]
    fn ordered_w_exceeds_lower_bound() {
        for t in [1.0, 5.0, 25.0] {
            assert!(moment_w(&infinite_chain_state(t).unwrap()) >= 2.0 * t * t);
        }
    }

    #[test]
    fn zero_padding_changes_nothing() {
        let amps = [c(0.1, 0.2), c(0.5, -0.3), c(-0.4, 0.1), c(0.3, 0.3)];
        let norm = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let amps: Vec<_> = amps.iter().map(|z| z / norm).collect();
        let a = moment_m(&state(&amps, 1), 1);
        let mut padded = vec![c(0.0, 0.0); 3];
        padded.extend_from_slice(&amps);
        padded.extend(vec![c(0.0, 0.0); 5]);
        let b = moment_m(&state(&padded, 4), 1);
        assert_eq!(a, b);
    }

    #[test]
    fn symmetric_state_has_symmetric_partial_sums() {
        let st = infinite_chain_state(12.0).unwrap();
        let o = st.origin as i64;
        let side = |sign: i64| -> f64 {
            (1..=o)
                .map(|x| (x * x) as f64 * st.amplitudes[(o + sign * x) as usize].norm())
                .sum()
        };
        assert!((side(1) - side(-1)).abs() < 1e-10 * side(1));
    }

    fn arb_state() -> impl Strategy<Value = WaveState> {
        (2usize..24)
            .prop_flat_map(|n| (prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n), 0..n))
            .prop_filter_map("nonzero", |(raw, origin)| {
                let amps: Vec<Complex64> = raw.iter().map(|&(r, i)| c(r, i)).collect();
                let norm = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                (norm > 1e-3).then(|| WaveState {
                    amplitudes: amps.iter().map(|z| z / norm).collect(),
                    time: 0.0,
                    origin,
                })
            })
    }

    proptest! {
        #[test]
        fn shortcut_matches_wootters(st in arb_state(), a in any::<prop::sample::Index>(), b in any::<prop::sample::Index>()) {
            let n = st.num_sites();
            let i = a.index(n);
            let j = (i + 1 + b.index(n - 1)) % n;
            let rho = reduced_density_pair(&st, i, j).unwrap();
            let full = wootters_concurrence(&rho).unwrap();
            let short = concurrence_pair(&st, i, j).unwrap();
            prop_assert!((full - short).abs() <= 1e-12, "{} vs {}", full, short);
        }

        #[test]
        fn m_factorizes(st in arb_state(), l in 0usize..12) {
            let s = moment_m(&st, l);
            let scale = s.m.abs().max(1.0);
            prop_assert!((s.m - 2.0 * s.alpha0_abs * s.w).abs() <= 1e-10 * scale);
            prop_assert!((s.m - (s.m_o + s.m_d)).abs() <= 1e-10 * scale);
            prop_assert!(s.m >= 0.0 && s.m_o >= 0.0 && s.m_d >= 0.0 && s.w >= 0.0);
        }
    }
}
