use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use dbconv::chain::{accumulate, check_detailed_balance, stationary_distribution, ChainTrace, GridSpace, TraceMeta};
use dbconv::samplers::{
    coordinate_kernel, cube_kernel, iteration_kernel, run_chain, sweep_kernel, EnergyTarget, HastingsCorrection,
    Projection, ProposalSpec, SamplerConfig, TabulatedEnergy,
};
use dbconv::targets::{three_state, toy_targets};

fn grid(a: usize, b: usize) -> GridSpace<f64> {
    GridSpace::new(vec![0.0, 0.0], vec![(a - 1) as f64, (b - 1) as f64], 1.0).unwrap()
}

fn left_apply(pi: &[f64], p: &dbconv::Kernel) -> Vec<f64> {
    (0..pi.len()).map(|j| (0..pi.len()).map(|i| pi[i] * p.get(i, j)).sum()).collect()
}

fn max_gap(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn coordinate_proposals(sd: f64, interval: f64) -> [ProposalSpec<f64>; 3] {
    [
        ProposalSpec::TruncatedNormal { sd, correction: HastingsCorrection::Corrected },
        ProposalSpec::Slice { interval, max_steps: None },
        ProposalSpec::Slice { interval, max_steps: Some(2) },
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn kernels_balance_on_small_grids(
        a in 2usize..5,
        b in 2usize..5,
        e in prop::collection::vec(0.0..3.0f64, 16),
        width in 0.6..5.0f64,
        sd in 0.3..3.0f64,
        interval in 0.5..4.0f64,
    ) {
        let tab = TabulatedEnergy::new(grid(a, b), e[..a * b].to_vec()).unwrap();
        let pi = tab.distribution(1.0);
        let target = EnergyTarget::new(&tab);
        let cube = cube_kernel(&target, width).unwrap();
        prop_assert!(check_detailed_balance(&cube, &pi, 1e-10).unwrap().holds);
        prop_assert!(max_gap(&left_apply(&pi, &cube), &pi) < 1e-12);
        for proposal in coordinate_proposals(sd, interval) {
            for d in 0..2 {
                let k = coordinate_kernel(&target, d, proposal).unwrap();
                let report = check_detailed_balance(&k, &pi, 1e-10).unwrap();
                prop_assert!(report.holds, "{} dim {d}: gap {}", proposal.label(), report.gap);
            }
            // a systematic sweep is not reversible, only pi-invariant
            let sweep = sweep_kernel(&target, proposal).unwrap();
            prop_assert!(max_gap(&left_apply(&pi, &sweep), &pi) < 1e-12);
        }
    }

    #[test]
    fn metropolis_stationary_law_is_balanced(
        e in prop::collection::vec(0.0..4.0f64, 2..7),
        width in 1.0..6.0f64,
    ) {
        let tab = TabulatedEnergy::line(e).unwrap();
        let p = cube_kernel(&EnergyTarget::new(&tab), width).unwrap();
        let pi = stationary_distribution(&p).unwrap();
        prop_assert!(check_detailed_balance(&p, &pi, 1e-10).unwrap().holds);
        prop_assert!(max_gap(&pi, &tab.distribution(1.0)) < 1e-10);
    }

    #[test]
    fn chains_stay_on_the_grid(
        a in 2usize..6,
        b in 2usize..6,
        kind in 0usize..3,
        seed in any::<u64>(),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let e: Vec<f64> = (0..a * b).map(|_| rng.random_range(0.0..2.0)).collect();
        let tab = TabulatedEnergy::new(grid(a, b), e).unwrap();
        let target = EnergyTarget::new(&tab);
        let proposal = match kind {
            0 => ProposalSpec::UniformCube { width: 7.0 },
            1 => ProposalSpec::TruncatedNormal { sd: 4.0, correction: HastingsCorrection::Uncorrected },
            _ => ProposalSpec::Slice { interval: 3.0, max_steps: None },
        };
        let config = SamplerConfig::new(proposal, 2).unwrap();
        let trace = run_chain(vec![0, b - 1], &target, config, 500, 0, Projection::Full, seed, &mut rng).unwrap();
        prop_assert!(trace.states().iter().all(|&s| s < a * b));
        for s in trace.states() {
            let p = tab_space_decode(&tab, *s);
            prop_assert!(p[0] < a && p[1] < b);
        }
    }

    #[test]
    fn counts_ignore_order_after_burn_in(
        states in prop::collection::vec(0usize..6, 1..200),
        burn in 0usize..20,
        seed in any::<u64>(),
    ) {
        let mut head: Vec<usize> = (0..burn).map(|k| k % 6).collect();
        head.extend(&states);
        let a = ChainTrace::new(head.clone(), 6, burn, TraceMeta::default()).unwrap();
        let mut tail = states.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for i in (1..tail.len()).rev() {
            tail.swap(i, rng.random_range(0..=i));
        }
        let mut shuffled = head[..burn].to_vec();
        shuffled.extend(tail);
        let b = ChainTrace::new(shuffled, 6, burn, TraceMeta::default()).unwrap();
        prop_assert_eq!(accumulate(&a).unwrap(), accumulate(&b).unwrap());
    }
}

fn tab_space_decode(tab: &TabulatedEnergy<f64>, s: usize) -> Vec<usize> {
    dbconv::samplers::EnergyModel::space(tab).decode(s).unwrap()
}

#[test]
fn transition_frequencies_match_enumerated_kernel() {
    let tab = TabulatedEnergy::line(vec![0.4, 0.0, 1.1, 0.3, 0.8]).unwrap();
    let target = EnergyTarget::new(&tab);
    for proposal in coordinate_proposals(1.5, 1.3) {
        let config = SamplerConfig::single(proposal).unwrap();
        let p = iteration_kernel(&target, &config).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let trace = run_chain(vec![2], &target, config, 1_000_000, 0, Projection::Full, 11, &mut rng).unwrap();
        let mut pairs = [[0u64; 5]; 5];
        for w in trace.states().windows(2) {
            pairs[w[0]][w[1]] += 1;
        }
        for (i, row) in pairs.iter().enumerate() {
            let n: u64 = row.iter().sum();
            for (j, &c) in row.iter().enumerate() {
                let q = p.get(i, j);
                let se = (q * (1.0 - q) / n as f64).sqrt();
                let hat = c as f64 / n as f64;
                if q == 0.0 {
                    assert_eq!(c, 0, "{}: impossible move {i}->{j}", proposal.label());
                } else {
                    assert!((hat - q).abs() <= 3.0 * se, "{}: {i}->{j} {hat} vs {q} (se {se})", proposal.label());
                }
            }
        }
    }
}

#[test]
fn wider_cubes_accept_less_on_a_unimodal_target() {
    let space = GridSpace::cube(2, -5.0, 5.0, 0.25).unwrap();
    let e: Vec<f64> = (0..space.state_count().unwrap())
        .map(|s| {
            let x = space.coords(&space.decode(s).unwrap());
            (x[0] * x[0] + x[1] * x[1]) / 2.0
        })
        .collect();
    let tab = TabulatedEnergy::new(space, e).unwrap();
    let target = EnergyTarget::new(&tab);
    let rates: Vec<(f64, f64)> = [0.5, 1.0, 2.0, 4.0, 8.0]
        .iter()
        .map(|&width| {
            let config = SamplerConfig::single(ProposalSpec::UniformCube { width }).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(12);
            let t = run_chain(vec![20, 20], &target, config, 50_000, 1000, Projection::Full, 12, &mut rng).unwrap();
            let r = t.meta.acceptance_rate();
            (r, (r * (1.0 - r) / t.meta.proposals as f64).sqrt())
        })
        .collect();
    for w in rates.windows(2) {
        let ((a, sa), (b, sb)) = (w[0], w[1]);
        assert!(b <= a + 3.0 * (sa * sa + sb * sb).sqrt(), "{rates:?}");
    }
}

fn total_variation(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}

#[test]
fn toy_targets_are_recovered() {
    for toy in toy_targets::<f64>().unwrap() {
        let target = EnergyTarget::new(&toy.energy);
        let m = toy.pi.len();
        let proposals = [
            ProposalSpec::UniformCube { width: 3.0 },
            ProposalSpec::TruncatedNormal { sd: 2.0, correction: HastingsCorrection::Corrected },
            ProposalSpec::Slice { interval: 2.0, max_steps: None },
        ];
        for proposal in proposals {
            let mut rng = ChaCha8Rng::seed_from_u64(13);
            let config = SamplerConfig::single(proposal).unwrap();
            let trace = run_chain(vec![0], &target, config, 4_000_000, 1000, Projection::Full, 13, &mut rng).unwrap();
            let hat: Vec<f64> = accumulate(&trace).unwrap().probabilities();
            let tv = total_variation(&hat, &toy.pi);
            assert!(tv < 0.01, "{} / {}: TV {tv} over {m} states", toy.name, proposal.label());
        }
    }
}

#[test]
fn three_state_slice_marginals() {
    let toy = three_state::<f64>().unwrap();
    let target = EnergyTarget::new(&toy.energy);
    let config = SamplerConfig::single(ProposalSpec::Slice { interval: 1.0, max_steps: None }).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let trace = run_chain(vec![1], &target, config, 1_000_000, 0, Projection::Full, 14, &mut rng).unwrap();
    let hat: Vec<f64> = accumulate(&trace).unwrap().probabilities();
    for (h, p) in hat.iter().zip([0.25, 0.5, 0.25]) {
        assert!((h - p).abs() < 0.01, "{hat:?}");
    }
}

#[test]
fn run_length_and_reproducibility() {
    let toy = three_state::<f64>().unwrap();
    let target = EnergyTarget::new(&toy.energy);
    let config = SamplerConfig::single(ProposalSpec::UniformCube { width: 2.0 }).unwrap();
    let run = |seed| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        run_chain(vec![2], &target, config, 1, 7, Projection::Full, seed, &mut rng).unwrap()
    };
    let t = run(15);
    assert_eq!(t.len(), 8);
    assert_eq!(t.states()[0], 2);
    assert_eq!(t.retained().len(), 1);
    assert_eq!(t, run(15));
    let long = |seed| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        run_chain(vec![0], &target, config, 5000, 0, Projection::Full, seed, &mut rng).unwrap()
    };
    assert_eq!(long(16), long(16));
    assert_ne!(long(16).states(), long(17).states());
}

#[test]
fn f32_sampler_and_kernel() {
    let tab = TabulatedEnergy::<f32>::line(vec![0.5, 0.0, 1.0, 0.2]).unwrap();
    let target = EnergyTarget::new(&tab);
    let pi = tab.distribution(1.0);
    let k = coordinate_kernel(&target, 0, ProposalSpec::Slice { interval: 1.5f32, max_steps: None }).unwrap();
    assert!(check_detailed_balance(&k, &pi, 1e-6).unwrap().holds);
    let config =
        SamplerConfig::single(ProposalSpec::TruncatedNormal { sd: 1.5f32, correction: HastingsCorrection::Corrected })
            .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(18);
    let trace = run_chain(vec![0], &target, config, 400_000, 100, Projection::Full, 18, &mut rng).unwrap();
    let hat: Vec<f32> = accumulate(&trace).unwrap().probabilities();
    for (h, p) in hat.iter().zip(&pi) {
        assert!((h - p).abs() < 0.01, "{hat:?} vs {pi:?}");
    }
}
