//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails. Criteria run concurrently.

use std::process::ExitCode;
use std::thread;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use dbconv::annealing::{anneal, grid_search_minimum, AnnealConfig, CoolingSchedule};
use dbconv::chain::{autocorrelation, check_detailed_balance, EmpiricalCounts, TransitionMatrix};
use dbconv::diagnostic::{
    abs_z2m1_cubed_moment, build_c_matrix, compute_vn, efficiency_measure, null_approximation, sigma_analytic_mb,
    sigma_full_analytic, stationarity_test, CMode, Decision, DiagnosticSeries,
};
use dbconv::samplers::{
    coordinate_kernel, cube_kernel, EnergyModel, EnergyTarget, HastingsCorrection, ProposalSpec, Sampler,
    SamplerConfig, TabulatedEnergy,
};
use dbconv::targets::{simulate_changepoint, ChangepointModel, FunnelModel, FunnelSpec, TauLaw, N_OBS, N_PATIENTS};

struct Outcome {
    id: u32,
    name: &'static str,
    pass: bool,
    detail: String,
    seconds: f64,
}

type Check = fn() -> (bool, String);

fn main() -> ExitCode {
    let criteria: [(u32, &'static str, Check); 9] = [
        (1, "detailed balance of enumerated kernels", detailed_balance),
        (2, "Sigma closed form vs series vs Monte Carlo", sigma_oracles),
        (3, "null calibration on a 3-state chain", null_calibration),
        (4, "moment constant E|Z^2-1|^3", moment_constant),
        (5, "annealing recovers the grid minimum", annealing_recovery),
        (6, "uniform vs slice annealing efficiency > 1", annealing_efficiency),
        (7, "funnel lag-100 autocorrelation, slice < MH", funnel_mixing),
        (8, "overdispersed funnel chain shows a jump after control stop", nonstationarity_detection),
        (9, "efficiency formula on reported iteration counts", reported_efficiencies),
    ];
    let mut outcomes: Vec<Outcome> = thread::scope(|s| {
        let handles: Vec<_> = criteria
            .iter()
            .map(|&(id, name, check)| {
                s.spawn(move || {
                    let start = Instant::now();
                    let (pass, detail) = check();
                    Outcome { id, name, pass, detail, seconds: start.elapsed().as_secs_f64() }
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("criterion panicked")).collect()
    });
    outcomes.sort_by_key(|o| o.id);
    println!();
    for o in &outcomes {
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {} {tag}  {} ({:.1}s): {}", o.id, o.name, o.seconds, o.detail);
    }
    let failed = outcomes.iter().filter(|o| !o.pass).count();
    println!("acceptance: {} passed, {failed} failed", outcomes.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn detailed_balance() -> (bool, String) {
    let mut worst = 0.0_f64;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..20 {
        let energies: Vec<f64> = (0..5).map(|_| rng.random_range(0.0..3.0)).collect();
        let tab = TabulatedEnergy::line(energies).unwrap();
        let pi = tab.distribution(1.0);
        let target = EnergyTarget::new(&tab);
        let kernels = [
            cube_kernel(&target, 2.5).unwrap(),
            coordinate_kernel(
                &target,
                0,
                ProposalSpec::TruncatedNormal { sd: 1.5, correction: HastingsCorrection::Corrected },
            )
            .unwrap(),
            coordinate_kernel(&target, 0, ProposalSpec::Slice { interval: 2.0, max_steps: None }).unwrap(),
        ];
        for k in &kernels {
            worst = worst.max(check_detailed_balance(k, &pi, 1e-10).unwrap().gap);
        }
    }
    (worst <= 1e-10, format!("largest |pi_i p_ij - pi_j p_ji| over 60 kernels = {worst:.2e} (tol 1e-10)"))
}

/// Stationary two-state chain; returns `sqrt(n) (pihat_0 - pi_0)`.
fn two_state_replicate(rng: &mut ChaCha8Rng, a: f64, b: f64, n: usize) -> f64 {
    let pi0 = b / (a + b);
    let mut s = usize::from(rng.random::<f64>() >= pi0);
    let mut zeros = 0usize;
    for _ in 0..n {
        zeros += usize::from(s == 0);
        let u: f64 = rng.random();
        s = match s {
            0 if u < a => 1,
            1 if u < b => 0,
            other => other,
        };
    }
    (n as f64).sqrt() * (zeros as f64 / n as f64 - pi0)
}

fn sigma_oracles() -> (bool, String) {
    let (a, b) = (0.1_f64, 0.5_f64);
    let p = TransitionMatrix::two_state(a, b).unwrap();
    let series = sigma_full_analytic(&p, &[5.0 / 6.0, 1.0 / 6.0], 1000).unwrap().sigma[(0, 0)];
    let closed = sigma_analytic_mb(5.0 / 6.0, 0.9).unwrap();
    let agree = (series - closed).abs();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let reps: Vec<f64> = (0..500).map(|_| two_state_replicate(&mut rng, a, b, 100_000)).collect();
    let mc = reps.iter().map(|w| w * w).sum::<f64>() / reps.len() as f64;
    let rel = (mc / closed - 1.0).abs();
    (
        agree < 1e-8 && rel < 0.05,
        format!("closed {closed:.6}, series {series:.6} (diff {agree:.1e}); Monte Carlo {mc:.6} (rel err {rel:.3}, tol 0.05)"),
    )
}

fn null_calibration() -> (bool, String) {
    let pi = [0.25, 0.5, 0.25];
    let rows = [vec![0.5, 0.5, 0.0], vec![0.25, 0.5, 0.25], vec![0.0, 0.5, 0.5]];
    let p = TransitionMatrix::from_rows(&rows).unwrap();
    let energies: Vec<f64> = pi.iter().map(|x: &f64| -x.ln()).collect();
    let sigma = sigma_full_analytic(&p, &pi, 500).unwrap().sigma;
    let c = build_c_matrix(&energies, CMode::Full).unwrap();
    let null = null_approximation(&c, &sigma).unwrap();
    let n = 10_000;
    let chains = 2000;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut total = 0.0;
    let mut rejections = 0;
    for _ in 0..chains {
        let u: f64 = rng.random();
        let mut s = if u < 0.25 {
            0
        } else if u < 0.75 {
            1
        } else {
            2
        };
        let mut counts = EmpiricalCounts::zeros(3);
        for _ in 0..n {
            counts.record(s);
            let u: f64 = rng.random();
            let row = &rows[s];
            s = if u < row[0] {
                0
            } else if u < row[0] + row[1] {
                1
            } else {
                2
            };
        }
        let out = stationarity_test(&counts, &energies, CMode::Full, &sigma, 0.05).unwrap();
        total += out.vn.value;
        rejections += usize::from(out.decision == Decision::Continue);
    }
    let mean = total / chains as f64;
    let rel = (mean / null.lambda_sum - 1.0).abs();
    let rate = rejections as f64 / chains as f64;
    (
        rel < 0.10 && rate <= 0.15,
        format!(
            "mean V_n {mean:.4} vs trace {:.4} (rel err {rel:.3}, tol 0.10); rejection rate {rate:.3} (max 0.15); Lyapunov ratio {:.3}",
            null.lambda_sum,
            null.lyapunov_ratio.unwrap_or(f64::NAN)
        ),
    )
}

fn moment_constant() -> (bool, String) {
    let v = abs_z2m1_cubed_moment();
    ((v - 8.6916).abs() <= 0.001, format!("{v:.7} vs 8.6916 +- 0.001"))
}

struct AnnealRun {
    gap_uniform: f64,
    gap_slice: f64,
    iters_uniform: u64,
    iters_slice: u64,
}

const ANNEAL_DATASETS: u64 = 10;

fn anneal_dataset(seed: u64) -> AnnealRun {
    let data = simulate_changepoint(seed, N_PATIENTS, N_OBS, TauLaw::Interior).unwrap();
    let model = ChangepointModel::<f64>::new(&data, 0.1).unwrap();
    let tab = TabulatedEnergy::from_model(&model).unwrap();
    let (_, e_min) = grid_search_minimum(&tab);
    let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
    let space = tab.space();
    let init: Vec<usize> = (0..2).map(|d| rng.random_range(0..space.points(d))).collect();
    let schedule = CoolingSchedule::new(50.0, 0.5, 6).unwrap();

    let widths = [12.0, 7.0, 4.0, 2.5, 1.7, 1.2];
    let mut uniform = AnnealConfig::new(
        schedule,
        SamplerConfig::single(ProposalSpec::UniformCube { width: widths[0] }).unwrap(),
        0.05,
        25,
    );
    uniform.samplers =
        widths.iter().map(|&w| SamplerConfig::single(ProposalSpec::UniformCube { width: w }).unwrap()).collect();
    let slice = AnnealConfig::new(
        schedule,
        SamplerConfig::new(ProposalSpec::Slice { interval: 0.1, max_steps: None }, 2).unwrap(),
        0.05,
        25,
    );
    let ru = anneal(&tab, init.clone(), &uniform, &mut ChaCha8Rng::seed_from_u64(2000 + seed)).unwrap();
    let rs = anneal(&tab, init, &slice, &mut ChaCha8Rng::seed_from_u64(3000 + seed)).unwrap();
    AnnealRun {
        gap_uniform: ru.best_energy - e_min,
        gap_slice: rs.best_energy - e_min,
        iters_uniform: ru.total_iterations(),
        iters_slice: rs.total_iterations(),
    }
}

fn anneal_all() -> Vec<AnnealRun> {
    thread::scope(|s| {
        let hs: Vec<_> = (1..=ANNEAL_DATASETS).map(|seed| s.spawn(move || anneal_dataset(seed))).collect();
        hs.into_iter().map(|h| h.join().unwrap()).collect()
    })
}

fn annealing_recovery() -> (bool, String) {
    let runs = anneal_all();
    let worst_u = runs.iter().map(|r| r.gap_uniform).fold(0.0, f64::max);
    let worst_s = runs.iter().map(|r| r.gap_slice).fold(0.0, f64::max);
    (
        worst_u <= 1.0 && worst_s <= 1.0,
        format!("largest gap to grid minimum over {ANNEAL_DATASETS} datasets: uniform {worst_u:.4}, slice {worst_s:.4} (tol 1.0)"),
    )
}

fn annealing_efficiency() -> (bool, String) {
    let runs = anneal_all();
    let ratios: Vec<f64> = runs.iter().map(|r| r.iters_uniform as f64 / r.iters_slice as f64).collect();
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    let avg = |f: fn(&AnnealRun) -> u64| runs.iter().map(f).sum::<u64>() as f64 / runs.len() as f64;
    (
        mean > 1.0,
        format!(
            "mean ratio {mean:.3} (need > 1); mean iterations uniform {:.0}, slice {:.0}",
            avg(|r| r.iters_uniform),
            avg(|r| r.iters_slice)
        ),
    )
}

const FUNNEL_ITERATIONS: usize = 2000;

fn funnel_presets() -> [SamplerConfig<f64>; 2] {
    [
        SamplerConfig::new(ProposalSpec::TruncatedNormal { sd: 1.0, correction: HastingsCorrection::Corrected }, 1300)
            .unwrap(),
        SamplerConfig::new(ProposalSpec::Slice { interval: 1.0, max_steps: None }, 1200).unwrap(),
    ]
}

/// X values and X-index visit counts, with a `V_n` series every 100 iterations.
fn funnel_chain(
    model: &FunnelModel<f64>,
    config: SamplerConfig<f64>,
    init: Vec<usize>,
    seed: u64,
) -> (Vec<f64>, DiagnosticSeries<f64>) {
    let target = EnergyTarget::new(model);
    let energies = model.x_marginal_energies();
    let mut sampler = Sampler::new(&target, config, init).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let space = model.space();
    let mut xs = Vec::with_capacity(FUNNEL_ITERATIONS);
    let mut counts = EmpiricalCounts::zeros(space.points(0));
    let mut series = DiagnosticSeries::new();
    for it in 1..=FUNNEL_ITERATIONS {
        sampler.iterate(&mut rng);
        let p = &sampler.state().point;
        xs.push(space.value(0, p[0]));
        counts.record(p[0]);
        if it % 100 == 0 {
            let (vn, _) = compute_vn(&counts, &energies).unwrap();
            series.push(it as u64, vn).unwrap();
        }
    }
    (xs, series)
}

fn funnel_mixing() -> (bool, String) {
    let model = FunnelModel::new(FunnelSpec::default()).unwrap();
    let init = model.start_at(0.0).unwrap();
    let [mh, slice] = funnel_presets();
    let (acf_mh, acf_slice) = thread::scope(|s| {
        let a = s.spawn(|| autocorrelation(&funnel_chain(&model, mh, init.clone(), 7).0, 100).unwrap()[100]);
        let b = s.spawn(|| autocorrelation(&funnel_chain(&model, slice, init.clone(), 8).0, 100).unwrap()[100]);
        (a.join().unwrap(), b.join().unwrap())
    });
    (
        acf_slice.abs() < acf_mh.abs(),
        format!(
            "lag-100 autocorrelation of X over {FUNNEL_ITERATIONS} iterations: slice {acf_slice:.4}, MH {acf_mh:.4}"
        ),
    )
}

fn nonstationarity_detection() -> (bool, String) {
    let model = FunnelModel::new(FunnelSpec::default()).unwrap();
    let [_, slice] = funnel_presets();
    // control starts from an exact draw of the funnel
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let x: f64 = 3.0 * rng.sample::<f64, _>(StandardNormal);
    let mut coords = vec![x];
    for _ in 1..10 {
        let y: f64 = (x / 2.0).exp() * rng.sample::<f64, _>(StandardNormal);
        coords.push(y.clamp(-29.99, 29.99));
    }
    let control_init = model.space().encode_point(&coords).unwrap();
    let over_init = model.quantile_start(0.9).unwrap();
    let (control, over) = thread::scope(|s| {
        let a = s.spawn(|| funnel_chain(&model, slice, control_init, 10).1);
        let b = s.spawn(|| funnel_chain(&model, slice, over_init, 11).1);
        (a.join().unwrap(), b.join().unwrap())
    });
    let Some(stop) = control.first_stop(0.2) else {
        return (false, "control chain never reached relative difference < 0.2".into());
    };
    let jumps: Vec<(u64, f64)> = over
        .checkpoints()
        .iter()
        .filter(|c| c.iteration > stop)
        .filter_map(|c| c.rel_diff.filter(|&r| r > 0.5).map(|r| (c.iteration, r)))
        .collect();
    let detail = match jumps.first() {
        Some((it, r)) => format!(
            "control stops at {stop}; overdispersed chain jumps {r:.3} at {it} ({} such checkpoints)",
            jumps.len()
        ),
        None => format!("control stops at {stop}; no relative difference > 0.5 afterwards in the overdispersed chain"),
    };
    (!jumps.is_empty(), detail)
}

fn stopping_series(interval: u64, checkpoints: u64) -> DiagnosticSeries<f64> {
    // strictly decreasing by more than the threshold until the last step, which repeats
    let mut pts: Vec<(u64, f64)> = (1..checkpoints).map(|k| (k * interval, 2f64.powi(-(k as i32)))).collect();
    let last = pts.last().map_or(1.0, |p| p.1);
    pts.push((checkpoints * interval, last));
    DiagnosticSeries::from_values(&pts).unwrap()
}

fn reported_efficiencies() -> (bool, String) {
    let eps = 0.05;
    let a = efficiency_measure(&stopping_series(1121, 5), &stopping_series(1581, 2), eps).unwrap();
    let b = efficiency_measure(&stopping_series(100, 308), &stopping_series(100, 198), eps).unwrap();
    let round2 = |v: f64| (v * 100.0).round() / 100.0;
    (
        round2(a) == 1.77 && round2(b) == 1.56,
        format!("5605/3162 -> {a:.4} ({:.2}); 30800/19800 -> {b:.4} ({:.2})", round2(a), round2(b)),
    )
}
