//! Acceptance suite: one pass/fail line per criterion, with measured values
//! and runtimes. Exits nonzero if any criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::time::{Duration, Instant};

use chainspread::commands::{run_sweep, RunOptions};
use chainspread::ExperimentConfig;
use chainspread_core::analysis::{
    emission_trace, fit_emission, fit_power_law, ordered_analytic_series, time_average, Field,
    MomentSeries, DEFAULT_AVERAGE_WINDOW,
};
use chainspread_core::analytic::{
    m_asymptote_coefficient, minus_i_pow, w_asymptote_coefficient, w_bounds_ordered, EmissionModel,
};
use chainspread_core::bessel::{
    bessel_j, bessel_j_series_oracle, bessel_row, even_order_second_moment, neumann_sum,
    recurrence_defect, squared_sum,
};
use chainspread_core::chain::{
    build_hamiltonian, ChainSpec, DisorderMode, DisorderSpec, Hamiltonian,
};
use chainspread_core::observables::{concurrence_pair, reduced_density_pair, wootters_concurrence};
use chainspread_core::propagator::{evolve_chebyshev, evolve_diagonalization, WaveState};
use chainspread_core::Complex64;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn criterion(id: u32, name: &str, budget: Duration, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let result = catch_unwind(AssertUnwindSafe(f));
    let elapsed = start.elapsed();
    let (pass, detail) = match result {
        Ok(o) => (o.pass, o.detail),
        Err(e) => {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            (false, format!("panicked: {msg}"))
        }
    };
    let in_time = elapsed <= budget;
    let ok = pass && in_time;
    println!(
        "[{}] {id:>2}. {name}: {detail}; runtime {:.2} s (limit {} s{})",
        if ok { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64(),
        budget.as_secs(),
        if in_time { "" } else { ", exceeded" },
    );
    ok
}

fn secs(s: u64) -> Duration {
    Duration::from_secs(s)
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
        .collect()
}

fn max_amplitude_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

fn jz_disorder(half_width: usize, seed: u64) -> DisorderSpec {
    DisorderSpec {
        mode: DisorderMode::JzCoupling,
        half_width,
        low: 0.0,
        high: 2.5,
        seed,
        ..Default::default()
    }
}

fn c1_bessel_accuracy() -> Outcome {
    let mut oracle_err: f64 = 0.0;
    for k in 0..=300 {
        let x = k as f64 * 0.1;
        for n in 0..=40u32 {
            let value = bessel_j(n as i64, x).unwrap();
            let oracle = bessel_j_series_oracle(n, x, 90).unwrap();
            oracle_err = oracle_err.max((value - oracle).abs());
        }
    }
    let mut norm_err: f64 = 0.0;
    let mut norm_worst_x = 0.0;
    let mut wide_norm_err: f64 = 0.0;
    let mut rec_err: f64 = 0.0;
    let mut sq_err: f64 = 0.0;
    for x in [
        0.5, 1.0, 2.0, 7.5, 20.0, 55.5, 100.0, 199.0, 260.0, 333.3, 450.0, 517.0, 600.0,
    ] {
        let order_max = 300usize.max(x as usize + 40);
        let row = bessel_row(order_max, x).unwrap();
        let e = (neumann_sum(&row) - 1.0).abs();
        if e > norm_err {
            norm_err = e;
            norm_worst_x = x;
        }
        rec_err = rec_err.max(recurrence_defect(&row));
        sq_err = sq_err.max((squared_sum(&row) - 1.0).abs());
        let wide = bessel_row(x as usize + 20 + (10.0 * x.cbrt()).ceil() as usize, x).unwrap();
        wide_norm_err = wide_norm_err.max((neumann_sum(&wide) - 1.0).abs());
    }
    outcome(
        oracle_err <= 1e-12 && norm_err <= 1e-12 && rec_err <= 1e-10 && sq_err <= 1e-10,
        format!(
            "max |J - oracle| = {oracle_err:.2e} (<= 1e-12), normalization at order max(300, x+40) \
             {norm_err:.2e} (<= 1e-12, worst x = {norm_worst_x}; {wide_norm_err:.2e} at order \
             x + 20 + 10 x^(1/3)), recurrence {rec_err:.2e} (<= 1e-10), squared sum {sq_err:.2e} (<= 1e-10)"
        ),
    )
}

fn c2_identities() -> Outcome {
    let mut rec_err: f64 = 0.0;
    for a in [2.0, 20.0, 100.0] {
        let top = 2 * a as usize;
        let row = bessel_row(top + 1, a).unwrap();
        for x in -(top as i64)..=top as i64 {
            let lhs = x as f64 * row.get(x).unwrap();
            let rhs = 0.5 * a * (row.get(x - 1).unwrap() + row.get(x + 1).unwrap());
            rec_err = rec_err.max((lhs - rhs).abs());
        }
    }
    let mut moment_err: f64 = 0.0;
    let mut detail = Vec::new();
    for a in [2.0, 50.0, 100.0] {
        let value = even_order_second_moment(a, a as usize + 90).unwrap();
        moment_err = moment_err.max((value - a * a / 2.0).abs());
        detail.push(format!("a={a}: {value:.9}"));
    }
    outcome(
        rec_err <= 1e-10 && moment_err <= 1e-6,
        format!(
            "max |xJ_x - (a/2)(J_x-1 + J_x+1)| = {rec_err:.2e} (<= 1e-10); \
             sum_(k>=1) (2k)^2 J_2k(a) [{}], max error vs a^2/2 = {moment_err:.2e} (<= 1e-6)",
            detail.join(", ")
        ),
    )
}

fn c3_propagator_oracle() -> Outcome {
    // 64 sites: the seeded 65-site chain with its last (ordered) site removed.
    let spec = ChainSpec::with_disorder(65, jz_disorder(10, 7));
    let full = build_hamiltonian(&spec, 0).unwrap();
    let h = Hamiltonian::new(full.diag[..64].to_vec(), full.offdiag[..63].to_vec()).unwrap();
    let init = WaveState::localized(64, spec.origin()).unwrap();
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for t in [1.0, 5.0, 20.0] {
        let a = evolve_chebyshev(&h, &init, t).unwrap();
        let b = evolve_diagonalization(&h, &init, t).unwrap();
        let d = max_amplitude_diff(&a.amplitudes, &b.amplitudes);
        parts.push(format!("t={t}: {d:.2e}"));
        worst = worst.max(d);
    }
    outcome(
        worst <= 1e-10,
        format!(
            "N=64, seed 7, max |cheb - diag| {} (<= 1e-10)",
            parts.join(", ")
        ),
    )
}

fn c4_ordered_agreement() -> Outcome {
    let n = 4001;
    let origin = 2000;
    let h = Hamiltonian::ordered(n, 1.0);
    let state = evolve_chebyshev(&h, &WaveState::localized(n, origin).unwrap(), 100.0).unwrap();
    let row = bessel_row(origin, 200.0).unwrap();
    let worst = (-(origin as i64)..=origin as i64)
        .map(|x| (state.at_offset(x) - minus_i_pow(x) * row.get(x).unwrap()).norm())
        .fold(0.0, f64::max);
    outcome(
        worst <= 1e-8,
        format!("N=4001, t=100, max |alpha_x - (-i)^x J_x(200)| = {worst:.2e} (<= 1e-8)"),
    )
}

fn c5_lower_bound() -> Outcome {
    let series = ordered_analytic_series(&linspace(1.0, 200.0, 200), 0).unwrap();
    let (failures, min_ratio) = series.samples.iter().fold((0, f64::INFINITY), |(f, r), s| {
        let lower = w_bounds_ordered(s.time).0;
        (f + usize::from(s.w < lower - 1e-9), r.min(s.w / lower))
    });
    outcome(
        failures == 0,
        format!("200 times in [1, 200]: {failures} violations of W >= 2t^2 - 1e-9, min W/(2t^2) = {min_ratio:.4}"),
    )
}

fn c6_upper_bound() -> Outcome {
    let series = ordered_analytic_series(&linspace(5.0, 200.0, 200), 0).unwrap();
    let (failures, max_ratio) = series.samples.iter().fold((0, 0.0f64), |(f, r), s| {
        let upper = w_bounds_ordered(s.time).1;
        (f + usize::from(s.w > upper), r.max(s.w / upper))
    });
    outcome(
        failures == 0,
        format!(
            "200 times in [5, 200]: {failures} violations of W <= (16/sqrt(pi)) t^(5/2), \
             max ratio = {max_ratio:.4}"
        ),
    )
}

/// Ordered analytic series on a fine grid around `[100, 500]`, averaged over
/// the default window.
fn averaged_ordered_series() -> MomentSeries {
    let times = linspace(95.0, 505.0, 8201);
    let series = ordered_analytic_series(&times, 0).unwrap();
    time_average(&series, DEFAULT_AVERAGE_WINDOW).unwrap()
}

fn c7_asymptotes() -> Outcome {
    let avg = averaged_ordered_series();
    let in_range: Vec<_> = avg
        .samples
        .iter()
        .filter(|s| (100.0..=500.0).contains(&s.time))
        .collect();
    let cw = w_asymptote_coefficient();
    let cm = m_asymptote_coefficient();
    let range = |f: &dyn Fn(f64, f64) -> f64,
                 field: fn(&&chainspread_core::observables::MomentSample) -> f64| {
        in_range
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| {
                let r = f(field(s), s.time);
                (lo.min(r), hi.max(r))
            })
    };
    let (w_lo, w_hi) = range(&|w, t| w / t.powf(2.5), |s| s.w);
    let (m_lo, m_hi) = range(&|m, t| m / (t * t), |s| s.m);
    let w_dev = ((w_lo - cw).abs().max((w_hi - cw).abs())) / cw;
    let m_dev = ((m_lo - cm).abs().max((m_hi - cm).abs())) / cm;
    outcome(
        w_dev <= 0.1 && m_dev <= 0.1,
        format!(
            "{} averaged samples in [100, 500]: W/t^(5/2) in [{w_lo:.4}, {w_hi:.4}] vs {cw:.6} \
             (max dev {:.1}%), M/t^2 in [{m_lo:.4}, {m_hi:.4}] vs {cm:.6} (max dev {:.1}%), limit 10%",
            in_range.len(),
            100.0 * w_dev,
            100.0 * m_dev
        ),
    )
}

fn c8_ordered_exponent() -> Outcome {
    let fit = fit_power_law(&averaged_ordered_series(), Field::M, (100.0, 500.0)).unwrap();
    outcome(
        (1.9..=2.1).contains(&fit.exponent),
        format!(
            "exponent {:.4} on [100, 500] from {} points (in [1.9, 2.1])",
            fit.exponent, fit.num_points
        ),
    )
}

fn c9_desk_figure() -> Outcome {
    let config_path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/fig1_desk.json");
    let config = ExperimentConfig::load(&config_path).unwrap();
    let window = (100.0, 1000.0);
    let out = tempfile::tempdir().unwrap();
    let opts = RunOptions {
        out: Some(out.path().to_path_buf()),
        jobs: 4,
        window: Some(window),
        ..RunOptions::default()
    };
    let outcome_ = run_sweep(&config, &opts).unwrap();
    assert!(outcome_.manifest.failures.is_empty(), "realizations failed");

    let ordered = ordered_analytic_series(&config.sample_times(), 0).unwrap();
    let ordered = time_average(&ordered, DEFAULT_AVERAGE_WINDOW).unwrap();
    let ordered_exp = fit_power_law(&ordered, Field::M, window).unwrap().exponent;

    let t_end = config.times.t_end;
    let exps = outcome_.report.exponents();
    let in_band = exps.iter().filter(|e| (2.2..=2.7).contains(*e)).count();
    let all_exceed = exps.iter().all(|&e| e > ordered_exp);
    // Octave windows [t, 2t] that close by the middle of the run.
    let early_max = outcome_
        .report
        .entries
        .iter()
        .flat_map(|e| e.octaves.iter())
        .filter(|o| 2.0 * o.t_lo <= 0.5 * t_end)
        .map(|o| o.exponent)
        .fold(f64::NEG_INFINITY, f64::max);
    let formatted: Vec<String> = exps.iter().map(|e| format!("{e:.3}")).collect();
    outcome(
        exps.len() == 10 && in_band >= 8 && all_exceed && early_max > 2.5,
        format!(
            "exponents on [100, 1000] = [{}]; {in_band}/10 in [2.2, 2.7] (need 8); ordered exponent {ordered_exp:.4}, \
             all exceed: {all_exceed}; max early octave exponent {early_max:.3} (need > 2.5)",
            formatted.join(", ")
        ),
    )
}

fn c10_half_chain() -> Outcome {
    let n = 2001;
    let h = Hamiltonian::ordered(n, 1.0);
    let init = WaveState::localized(n, 0).unwrap();
    let mut worst: f64 = 0.0;
    for t in [0.5, 1.0, 5.0, 10.0, 25.0, 50.0, 75.0, 100.0] {
        let state = evolve_chebyshev(&h, &init, t).unwrap();
        let row = bessel_row(n + 1, 2.0 * t).unwrap();
        for x in 0..n {
            let exact = minus_i_pow(x as i64) * ((x + 1) as f64 / t * row.values[x + 1]);
            worst = worst.max((state.amplitudes[x] - exact).norm());
        }
    }
    outcome(
        worst <= 1e-8,
        format!("2001 sites, 8 times in (0, 100]: max |alpha_x - (-i)^x (x+1)/t J_x+1(2t)| = {worst:.2e} (<= 1e-8)"),
    )
}

fn c11_emission_round_trip() -> Outcome {
    let times = linspace(0.0, 60.0, 1201);
    let mut worst_beta: f64 = 0.0;
    let mut worst_tau: f64 = 0.0;
    let cases = [(0.3, 7.3, 3), (0.62, 2.05, 1), (0.1, 15.7, 5)];
    for (beta, tau, site) in cases {
        let truth = EmissionModel::new(beta, tau, 0.4, 50).unwrap();
        let trace = emission_trace(&truth, site, &times).unwrap();
        let core: Vec<(f64, f64)> = times.iter().map(|&t| (t, 0.4 * truth.retained())).collect();
        let init = EmissionModel::new(0.5, 1.0, 0.9, 50).unwrap();
        let fit = fit_emission(&trace, site, &init, Some(&core)).unwrap();
        worst_beta = worst_beta.max((fit.beta.norm() - beta).abs());
        worst_tau = worst_tau.max((fit.tau - tau).abs());
    }
    outcome(
        worst_beta <= 1e-6 && worst_tau <= 1e-6,
        format!(
            "3 models: max |beta| error {worst_beta:.2e}, max tau error {worst_tau:.2e} (<= 1e-6)"
        ),
    )
}

fn c12_concurrence_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut uniform = || (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let n = 2 + (uniform() * 15.0) as usize;
        let mut amps: Vec<Complex64> = (0..n)
            .map(|_| Complex64::new(2.0 * uniform() - 1.0, 2.0 * uniform() - 1.0))
            .collect();
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        amps.iter_mut().for_each(|a| *a /= norm);
        let i = (uniform() * n as f64) as usize;
        let j = (i + 1 + (uniform() * (n - 1) as f64) as usize) % n;
        let state = WaveState {
            amplitudes: amps,
            time: 0.0,
            origin: 0,
        };
        let shortcut = concurrence_pair(&state, i, j).unwrap();
        let full = wootters_concurrence(&reduced_density_pair(&state, i, j).unwrap()).unwrap();
        worst = worst.max((shortcut - full).abs());
    }
    outcome(
        worst <= 1e-12,
        format!("1000 random states: max |2|a_i||a_j| - C_wootters| = {worst:.2e} (<= 1e-12)"),
    )
}

fn main() {
    let results = [
        criterion(1, "Bessel accuracy", secs(5), c1_bessel_accuracy),
        criterion(2, "Bessel identity suite", secs(1), c2_identities),
        criterion(
            3,
            "Propagator oracle equivalence",
            secs(5),
            c3_propagator_oracle,
        ),
        criterion(
            4,
            "Analytic-numeric agreement",
            secs(30),
            c4_ordered_agreement,
        ),
        criterion(5, "Lower bound", secs(10), c5_lower_bound),
        criterion(6, "Upper bound", secs(10), c6_upper_bound),
        criterion(7, "Asymptotic coefficients", secs(60), c7_asymptotes),
        criterion(8, "Ordered exponent", secs(60), c8_ordered_exponent),
        criterion(
            9,
            "Desk-scale disordered ensemble",
            secs(1800),
            c9_desk_figure,
        ),
        criterion(10, "Semi-infinite solution", secs(30), c10_half_chain),
        criterion(11, "Emission round trip", secs(5), c11_emission_round_trip),
        criterion(12, "Concurrence oracle", secs(5), c12_concurrence_oracle),
    ];
    let passed = results.iter().filter(|&&ok| ok).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    if passed != results.len() {
        std::process::exit(1);
    }
}
