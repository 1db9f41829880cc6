use proptest::prelude::*;
use reservoir_qec::compiler::{GateSchedule, Protocol, Step};
use reservoir_qec::dynamics::*;
use reservoir_qec::qstate::{DensityMatrix, Register, StateVector};

fn reference_noise() -> NoiseParams<f64> {
    NoiseParams::new(1e-3, 3.0, 1e-2).unwrap()
}

fn measured(noise: NoiseParams<f64>) -> Simulation<f64> {
    Simulation::for_protocol(Protocol::Measured, noise, SimConfig::default()).unwrap()
}

fn max_gap(a: &DensityMatrix<f64>, b: &DensityMatrix<f64>) -> f64 {
    a.elements()
        .iter()
        .zip(b.elements())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

fn oracle_round_ends(sim: &Simulation<f64>, rounds: usize) -> Vec<DensityMatrix<f64>> {
    let last = sim.steps_per_round() - 1;
    let mut ends = Vec::new();
    let rho = sim.ground_state().unwrap().to_density();
    MasterEquation::new(sim)
        .evolve(&rho, rounds, &mut |_, step, r| {
            if step == last {
                ends.push(r.clone())
            }
        })
        .unwrap();
    ends
}

#[test]
fn bit_flip_counts_are_poissonian() {
    let mut schedule = GateSchedule::new();
    schedule.push(Step::idle("idle")).unwrap();
    let reg = Register { n_data: 1, n_ancilla: 0 };
    let noise = NoiseParams::new(1e-3, 0.0, 0.0).unwrap();
    let sim = Simulation::new(schedule, reg, noise, SimConfig::default()).unwrap();
    let psi = StateVector::zero(1).unwrap();
    let n = 500;
    let total: usize = (0..n)
        .map(|i| sim.run_trajectory(&psi, 10_000, 21, i, &mut |_, _, _| {}).unwrap().1.jump_count)
        .sum();
    let mean = total as f64 / n as f64;
    let sigma = (10.0 / n as f64).sqrt();
    assert!((mean - 10.0).abs() <= 3.0 * sigma, "mean flips {mean}");
}

#[test]
fn jump_times_are_ordered() {
    let config = SimConfig { record_jumps: true, ..SimConfig::default() };
    let sim = Simulation::for_protocol(Protocol::Measured, NoiseParams::new(0.02, 3.0, 0.1).unwrap(), config).unwrap();
    let (_, record) = sim.run_trajectory(&sim.ground_state().unwrap(), 20, 5, 2, &mut |_, _, _| {}).unwrap();
    assert!(record.jumps.len() > 10);
    assert_eq!(record.jumps.len(), record.jump_count);
    assert!(record.jumps.windows(2).all(|w| w[0].time <= w[1].time));
}

#[test]
fn ensemble_runs_are_reproducible() {
    let sim = measured(reference_noise());
    let plan = SamplePlan::round_ends(3, 16);
    let psi = sim.ground_state().unwrap();
    let a = run_ensemble(&sim, &psi, &plan, 99, 0..100).unwrap();
    let b = run_ensemble(&sim, &psi, &plan, 99, 0..100).unwrap();
    for slot in 0..3 {
        assert_eq!(a.total_density(slot).unwrap(), b.total_density(slot).unwrap());
    }
    let c = run_ensemble(&sim, &psi, &plan, 100, 0..100).unwrap();
    assert_ne!(a.total_density(2).unwrap(), c.total_density(2).unwrap());
}

#[test]
fn ensemble_stays_within_five_over_root_n_of_the_oracle() {
    let sim = measured(reference_noise());
    let ends = oracle_round_ends(&sim, 5);
    let n = 1000;
    let acc = run_ensemble(&sim, &sim.ground_state().unwrap(), &SamplePlan::round_ends(5, 16), 4, 0..n).unwrap();
    for (k, rho) in ends.iter().enumerate() {
        let d = acc.total_density(k).unwrap().unwrap().trace_distance(rho).unwrap();
        assert!(d <= 5.0 / (n as f64).sqrt(), "round {}: {d}", k + 1);
    }
}

#[test]
fn oracle_gap_shrinks_like_inverse_root_n() {
    let sim = measured(reference_noise());
    let target = &oracle_round_ends(&sim, 2)[1];
    let plan = SamplePlan::round_ends(2, 16);
    let psi = sim.ground_state().unwrap();
    let sizes = [500u64, 2000, 8000];
    let replicas = 4;
    let mut points = Vec::new();
    for &n in &sizes {
        let mut gap = 0.0;
        for r in 0..replicas {
            let acc = run_ensemble(&sim, &psi, &plan, 1000 + r, 0..n).unwrap();
            gap += acc.total_density(1).unwrap().unwrap().trace_distance(target).unwrap();
        }
        points.push(((n as f64).ln(), (gap / replicas as f64).ln()));
    }
    let mx = points.iter().map(|p| p.0).sum::<f64>() / 3.0;
    let my = points.iter().map(|p| p.1).sum::<f64>() / 3.0;
    let slope = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>()
        / points.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
    assert!((slope + 0.5).abs() <= 0.15, "slope {slope}");
}

#[test]
fn gated_cooling_ensemble_matches_zero_rate() {
    let gated = NoiseParams {
        cooling_gate: false,
        ..NoiseParams::new(5e-3, 3.0, 0.1).unwrap()
    };
    let off = NoiseParams::new(5e-3, 0.0, 0.1).unwrap();
    let plan = SamplePlan::every_step(2, 16);
    let a = measured(gated);
    let b = measured(off);
    let psi = a.ground_state().unwrap();
    let x = run_ensemble(&a, &psi, &plan, 8, 0..64).unwrap();
    let y = run_ensemble(&b, &psi, &plan, 8, 0..64).unwrap();
    for slot in 0..32 {
        assert_eq!(x.total_density(slot).unwrap(), y.total_density(slot).unwrap());
    }
}

#[test]
fn cooled_ancilla_fidelity_is_steady_from_round_to_round() {
    let sim = measured(reference_noise());
    let rounds = 12;
    let plan = SamplePlan::at_steps(rounds, 16, &[0]).with_full_state(false);
    let acc = run_ensemble(&sim, &sim.ground_state().unwrap(), &plan, 17, 0..2000).unwrap();
    let stats: Vec<SampleStats<f64>> = (0..rounds).map(|k| acc.f2_ancilla_stats(k).unwrap()).collect();
    for w in stats.windows(2) {
        let sigma = (w[0].std_err.powi(2) + w[1].std_err.powi(2)).sqrt();
        assert!((w[1].mean - w[0].mean).abs() <= 3.0 * sigma, "{:?}", w);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn merge_order_does_not_matter(split in 1u64..63, seed in 0u64..1000) {
        let sim = measured(NoiseParams::new(0.01, 3.0, 0.05).unwrap());
        let plan = SamplePlan::at_steps(1, 16, &[0, 14, 15]);
        let psi = sim.ground_state().unwrap();
        let whole = run_ensemble(&sim, &psi, &plan, seed, 0..64).unwrap();
        let left = run_ensemble(&sim, &psi, &plan, seed, 0..split).unwrap();
        let right = run_ensemble(&sim, &psi, &plan, seed, split..64).unwrap();
        let mut lr = left.clone();
        lr.merge(&right).unwrap();
        let mut rl = right.clone();
        rl.merge(&left).unwrap();
        prop_assert_eq!(lr.count(), 64);
        for slot in 0..3 {
            let w = whole.total_density(slot).unwrap().unwrap();
            prop_assert!(max_gap(&lr.total_density(slot).unwrap().unwrap(), &w) < 1e-12);
            prop_assert!(max_gap(&rl.total_density(slot).unwrap().unwrap(), &w) < 1e-12);
            prop_assert!(max_gap(&lr.ancilla_density(slot).unwrap(), &whole.ancilla_density(slot).unwrap()) < 1e-12);
        }
    }

    #[test]
    fn merge_is_associative(a in 1u64..20, b in 1u64..20, c in 1u64..20) {
        let sim = measured(NoiseParams::new(0.02, 1.0, 0.0).unwrap());
        let plan = SamplePlan::round_ends(1, 16);
        let psi = sim.ground_state().unwrap();
        let part = |r: std::ops::Range<u64>| run_ensemble(&sim, &psi, &plan, 3, r).unwrap();
        let (x, y, z) = (part(0..a), part(a..a + b), part(a + b..a + b + c));
        let mut left = x.clone();
        left.merge(&y).unwrap();
        left.merge(&z).unwrap();
        let mut yz = y.clone();
        yz.merge(&z).unwrap();
        let mut right = x.clone();
        right.merge(&yz).unwrap();
        prop_assert!(max_gap(&left.data_density(0).unwrap(), &right.data_density(0).unwrap()) < 1e-12);
    }
}
