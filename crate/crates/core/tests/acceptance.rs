//! Acceptance checks, one printed line per criterion.
//!
//! Run with `cargo test --release --test acceptance`. Seeds are fixed, so
//! every number printed here is reproducible.

use std::f64::consts::{PI, SQRT_2};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use spacing_lab::cd_kernel::{recurrence_coefficients, unfolded_kernel_error, DEFAULT_QUAD_POINTS};
use spacing_lab::equilibrium::{build_measure, mrs_endpoints, repulsive_fixed_point, rescaled_density, FixedPointOptions};
use spacing_lab::experiments::{
    limiting_measure, replica_stream, run_convergence_study, run_intensity_study, run_rate_study, Normalization,
    StudyConfig,
};
use spacing_lab::gaudin::{default_table, gap_probability, gaudin_series_truncated, GaudinTable};
use spacing_lab::sampling::{sample, McmcParams, SamplerChoice};
use spacing_lab::spacing::{
    gamma_k_mass, ks_distance, spacing_multiset, two_sample_ks, window_spacings, EmpiricalCdf, IntervalSpec,
};
use spacing_lab::{Interaction, Interval, Model, Potential};

struct Outcome {
    pass: bool,
    detail: String,
}

fn check(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn run(id: u32, name: &str, budget: Duration, f: impl FnOnce() -> Outcome) -> bool {
    let start = Instant::now();
    let out = f();
    let elapsed = start.elapsed();
    let in_time = elapsed <= budget;
    let pass = out.pass && in_time;
    let timing = if in_time {
        format!("{:.1} s", elapsed.as_secs_f64())
    } else {
        format!("{:.1} s, over the {} s budget", elapsed.as_secs_f64(), budget.as_secs())
    };
    println!(
        "criterion {id:2} {}: {name}: {} [{timing}]",
        if pass { "PASS" } else { "FAIL" },
        out.detail
    );
    pass
}

fn equilibrium_exactness() -> Outcome {
    let quad = Potential::gaussian();
    let half = Potential::polynomial(vec![0.0, 0.0, 0.5], Interval::REAL_LINE).unwrap();
    let (a1, b1) = mrs_endpoints(&quad, 1e-13).unwrap();
    let (a2, b2) = mrs_endpoints(&half, 1e-13).unwrap();
    let end_err = [(a1 + SQRT_2).abs(), (b1 - SQRT_2).abs(), (a2 + 2.0).abs(), (b2 - 2.0).abs()]
        .into_iter()
        .fold(0.0, f64::max);
    let rho = rescaled_density(&quad, a1, b1, 256).unwrap();
    let dens_err = rho
        .iter()
        .map(|&(x, r)| (r - 2.0 / PI * (1.0 - x * x).max(0.0).sqrt()).abs())
        .fold(0.0, f64::max);
    check(
        end_err < 1e-9 && dens_err < 1e-8,
        format!("endpoint error {end_err:.1e} (< 1e-9), density node error {dens_err:.1e} (< 1e-8)"),
    )
}

fn brute_gamma(lo: f64, hi: f64, y: &[f64], k: usize, s: f64) -> f64 {
    let n = y.len();
    let mut count = 0usize;
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize != k {
            continue;
        }
        let first = mask.trailing_zeros() as usize;
        let last = 31 - mask.leading_zeros() as usize;
        let inside = |t: f64| lo <= t && t <= hi;
        if inside(y[first]) && inside(y[last]) && y[last] - y[first] <= s {
            count += 1;
        }
    }
    count as f64 / (hi - lo)
}

fn combinatorial_identities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut identity_err, mut oracle_err, mut bound_violations) = (0.0f64, 0.0f64, 0usize);
    for _ in 0..100 {
        let n = rng.random_range(2..=12);
        let mut y: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..10.0)).collect();
        y.sort_by(f64::total_cmp);
        let lo = rng.random_range(-1.0..6.0);
        let hi = lo + rng.random_range(0.5..6.0);
        let s = rng.random_range(0.0..5.0);
        let sigma = spacing_multiset(lo, hi, &y).iter().filter(|&&d| d <= s).count() as f64 / (hi - lo);
        let gammas: Vec<f64> = (2..=n)
            .map(|k| {
                let brute = brute_gamma(lo, hi, &y, k, s);
                if k <= 8 {
                    let fast = gamma_k_mass(lo, hi, &y, k, s).unwrap();
                    oracle_err = oracle_err.max((fast - brute).abs());
                    fast
                } else {
                    brute
                }
            })
            .collect();
        let alt = |m: usize| -> f64 {
            (2..=m)
                .map(|k| if k % 2 == 0 { gammas[k - 2] } else { -gammas[k - 2] })
                .sum()
        };
        identity_err = identity_err.max((sigma - alt(n)).abs());
        for m in 2..=4usize.min(n) {
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            if sign * sigma > sign * alt(m) + 1e-12 {
                bound_violations += 1;
            }
        }
    }
    check(
        identity_err < 1e-12 && oracle_err < 1e-12 && bound_violations == 0,
        format!(
            "identity error {identity_err:.1e} (< 1e-12), fast vs brute γ^k {oracle_err:.1e}, alternating-bound violations {bound_violations}"
        ),
    )
}

fn gaudin_cross_validation(table: &GaudinTable) -> Outcome {
    let mut series_err = 0.0f64;
    for i in 0..=20 {
        let s = i as f64 * 0.05;
        let g = table.eval(s).unwrap();
        series_err = series_err.max((g - gaudin_series_truncated(s, 4).unwrap()).abs());
    }
    let s = 0.1f64;
    let small = (gap_probability(s, 40).unwrap() - (1.0 - s + PI * PI * s.powi(4) / 36.0)).abs();
    let mean = table.mean_spacing();
    let mut refine = 0.0f64;
    for &s in &[0.5, 1.0, 2.0, 3.0, 4.0, 5.0] {
        let m = table.params().order;
        refine = refine.max((gap_probability(s, m).unwrap() - gap_probability(s, 2 * m).unwrap()).abs());
    }
    check(
        series_err < 1e-4 && small < 1e-6 && (mean - 1.0).abs() < 1e-3 && refine < 1e-9,
        format!(
            "series gap {series_err:.1e} (< 1e-4), E(0.1) error {small:.1e} (< 1e-6), ∫(1−G) = {mean:.6}, m→2m change {refine:.1e} (< 1e-9)"
        ),
    )
}

fn sine_kernel_universality() -> Outcome {
    let v = Potential::gaussian();
    let m = build_measure(&v, 256, 1e-12).unwrap();
    let err = |n: usize| {
        let r = recurrence_coefficients(&v, None, n, n, DEFAULT_QUAD_POINTS).unwrap();
        let nf = n as f64;
        unfolded_kernel_error(&r, &m, (0.25 * nf, 0.75 * nf), 64).unwrap()
    };
    let (e64, e128) = (err(64), err(128));
    let ratio = e128 / e64;
    check(
        (0.3..=0.8).contains(&ratio) && e128 < 0.06,
        format!("error(64) = {e64:.5}, error(128) = {e128:.5} (< 0.06), ratio {ratio:.3} (in [0.3, 0.8])"),
    )
}

fn spacing_convergence(table: &GaudinTable) -> Outcome {
    let c = StudyConfig::gue(vec![200], vec![IntervalSpec::central_half()], 100, 11);
    let report = run_convergence_study(&c, table).unwrap();
    let hat = report.find(200, &c.intervals[0], Normalization::Count).unwrap();
    let len = report.find(200, &c.intervals[0], Normalization::Length).unwrap();
    let gap = (hat.mean_distance - len.mean_distance).abs();
    check(
        hat.mean_distance < 0.12 && gap < 0.02,
        format!(
            "mean distance {:.4} ± {:.4} (< 0.12), normalisations differ by {gap:.4} (< 0.02)",
            hat.mean_distance, hat.std_error
        ),
    )
}

fn rate_config() -> StudyConfig {
    let windows = [25.0, 50.0, 100.0, 200.0]
        .iter()
        .map(|&length| IntervalSpec::Centered { length })
        .collect();
    StudyConfig::gue(vec![400], windows, 200, 12)
}

fn rate_study(table: &GaudinTable) -> Outcome {
    let study = run_rate_study(&rate_config(), table).unwrap();
    let fit = &study.fits[0].1;
    let means: Vec<String> = fit.points.iter().map(|p| format!("{:.4}", p.1.exp())).collect();
    check(
        (-0.65..=-0.2).contains(&fit.slope) && fit.r2 >= 0.8,
        format!(
            "slope {:.3} (in [−0.65, −0.2]), r² {:.3} (≥ 0.8), mean distances {}",
            fit.slope,
            fit.r2,
            means.join(" / ")
        ),
    )
}

fn intensity_improvement(table: &GaudinTable) -> Outcome {
    let report = run_intensity_study(&rate_config(), table).unwrap();
    let pass = report.rows.iter().all(|r| r.pooled_distance < r.single_median);
    let cells: Vec<String> = report
        .rows
        .iter()
        .map(|r| format!("L={}: {:.4} vs {:.4}", r.interval_length, r.pooled_distance, r.single_median))
        .collect();
    check(pass, format!("pooled vs median single: {}", cells.join(", ")))
}

fn repulsive_pipeline(table: &GaudinTable) -> Outcome {
    let q = Potential::gaussian();
    let h = Interaction::gaussian(-0.1, 1.0).unwrap();
    let fp = repulsive_fixed_point(&q, &h, &FixedPointOptions::default()).unwrap();
    let residual = *fp.residual_history.last().unwrap();
    let model = Model::repulsive("repulsive", q, h);
    let measure = limiting_measure(&model).unwrap();
    let n = 100;
    let replicas = 50;
    let configs: Vec<_> = (0..replicas)
        .map(|r| {
            sample(&model, n, SamplerChoice::Auto, &McmcParams::default(), 8, replica_stream(n, 0, r)).unwrap()
        })
        .collect();
    let pooled: Vec<f64> = configs.iter().flat_map(|c| c.points().to_vec()).collect();
    let total = pooled.len() as f64;
    let ecdf = EmpiricalCdf::with_normalizer(pooled, total).unwrap();
    let point_ks = ks_distance(&ecdf, |t| measure.cdf(t));
    let spec = IntervalSpec::central_half();
    let distances: Vec<f64> = configs
        .iter()
        .map(|c| {
            let (s, _) = window_spacings(c, &measure, &spec).unwrap();
            spacing_lab::spacing::kolmogorov_distance(&spacing_lab::spacing::empirical_spacing_cdf(&s).unwrap(), table)
        })
        .collect();
    let mean = distances.iter().sum::<f64>() / distances.len() as f64;
    check(
        residual < 1e-8 && point_ks < 0.1 && mean < 0.2,
        format!(
            "fixed point residual {residual:.1e} after {} iterations, point ECDF distance {point_ks:.4} (< 0.1), mean spacing distance {mean:.4} (< 0.2)",
            fp.iterations
        ),
    )
}

fn sampler_equivalence() -> Outcome {
    let model = Model::gue();
    let n = 50;
    let measure = limiting_measure(&model).unwrap();
    let spec = IntervalSpec::central_half();
    let pooled = |choice: SamplerChoice, seed: u64| -> Vec<f64> {
        (0..200)
            .flat_map(|r| {
                let x = sample(&model, n, choice, &McmcParams::default(), seed, replica_stream(n, 0, r)).unwrap();
                window_spacings(&x, &measure, &spec).unwrap().0
            })
            .collect()
    };
    let exact = pooled(SamplerChoice::Tridiagonal, 21);
    let chain = pooled(SamplerChoice::Mcmc, 22);
    let d = two_sample_ks(&exact, &chain);
    check(
        d < 0.05,
        format!("two-sample distance {d:.4} (< 0.05) over {} vs {} spacings", exact.len(), chain.len()),
    )
}

fn reports_at(threads: usize, table: &GaudinTable) -> String {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
    pool.install(|| {
        let gue = StudyConfig::gue(
            vec![60, 120],
            vec![IntervalSpec::central_half(), IntervalSpec::Full, "loc:0,0.5".parse().unwrap()],
            50,
            31,
        );
        let mut out = run_convergence_study(&gue, table).unwrap().to_csv();
        out += &run_intensity_study(&gue, table).unwrap().to_csv();
        let q = Potential::polynomial(vec![0.0, 0.0, 0.5, 0.0, 0.25], Interval::REAL_LINE).unwrap();
        let mut quartic = StudyConfig::gue(vec![30], vec![IntervalSpec::central_half()], 8, 32);
        quartic.model = Model::invariant("quartic", q, None);
        quartic.mcmc.burn_in = 300;
        out += &run_convergence_study(&quartic, table).unwrap().to_csv();
        out
    })
}

fn determinism(table: &GaudinTable) -> Outcome {
    let one = reports_at(1, table);
    let four = reports_at(4, table);
    let again = reports_at(4, table);
    check(
        one == four && four == again,
        format!("{} report bytes identical at 1 thread, 4 threads and a repeat at 4", one.len()),
    )
}

fn main() -> ExitCode {
    let secs = Duration::from_secs;
    let mut results = vec![
        run(1, "equilibrium exactness", secs(1), equilibrium_exactness),
        run(2, "combinatorial identities", secs(10), combinatorial_identities),
    ];
    // The table build counts against the Gaudin budget.
    let mut table = None;
    results.push(run(3, "Gaudin cross-validation", secs(60), || {
        let t = default_table().expect("Gaudin table");
        let out = gaudin_cross_validation(&t);
        table = Some(t);
        out
    }));
    let table = table.expect("Gaudin table");
    results.push(run(4, "sine-kernel universality", secs(300), sine_kernel_universality));
    results.push(run(5, "spacing convergence", secs(300), || spacing_convergence(&table)));
    results.push(run(6, "rate study", secs(1200), || rate_study(&table)));
    results.push(run(7, "intensity improvement", secs(1200), || intensity_improvement(&table)));
    results.push(run(8, "repulsive pipeline", secs(900), || repulsive_pipeline(&table)));
    results.push(run(9, "sampler equivalence", secs(900), sampler_equivalence));
    results.push(run(10, "determinism", secs(900), || determinism(&table)));
    let passed = results.iter().filter(|&&p| p).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    if passed == results.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
