use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use reservoir_qec::compiler::Protocol;
use reservoir_qec::dynamics::{run_ensemble, EnsembleAccumulator, MasterEquation, SamplePlan, Simulation};
use reservoir_qec::metrics::{compute_step_metrics, density_metrics, format_sig, RoundMetrics, CSV_HEADER};
use reservoir_qec::ratemodel::{
    ancilla_steady_fidelity, event_probabilities, first_round_p0, fit_decay_constant, flow_coefficients,
    iterate_round_chain, FlowMatrix, RoundChainState, RoundEventParams, FIT_WINDOW,
};
use reservoir_qec::{DensityMatrix64, StateVector64};

use crate::config::{invalid, ExperimentConfig, Sampling};
use crate::RunArgs;

fn sig(v: f64) -> String {
    format_sig(v, 12)
}

fn load(args: &RunArgs, oracle: bool) -> anyhow::Result<(ExperimentConfig, PathBuf)> {
    let mut cfg = ExperimentConfig::load(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.run.master_seed = seed;
    }
    if let Some(n) = args.traj {
        cfg.run.n_traj = n;
    }
    if let Some(n) = args.rounds {
        cfg.run.rounds = n;
    }
    cfg.run.oracle |= oracle;
    cfg.validate()?;
    let out = match (&args.out, &cfg.run.output) {
        (Some(dir), _) | (None, Some(dir)) => dir.clone(),
        (None, None) => {
            let stem = args.config.file_stem().unwrap_or_default();
            Path::new("results").join(stem)
        }
    };
    fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
    Ok((cfg, out))
}

fn simulate(cfg: &ExperimentConfig, plan: &SamplePlan) -> anyhow::Result<(Simulation<f64>, EnsembleAccumulator<f64>)> {
    let sim = Simulation::for_protocol(cfg.protocol(), cfg.noise()?, cfg.sim_config())?;
    let psi = sim.ground_state()?;
    let acc = run_ensemble(&sim, &psi, plan, cfg.run.master_seed, 0..cfg.run.n_traj)?;
    Ok((sim, acc))
}

fn write_metrics<'a>(path: &Path, rows: impl Iterator<Item = &'a RoundMetrics<f64>>) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("writing {}", path.display()))?;
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record(r.csv_fields())?;
    }
    w.flush()?;
    Ok(())
}

/// Rate-equation chain for the measured protocol: ancilla fidelity from the
/// cold-reservoir occupancy, ancilla error `15γ_h` and data error `16γ_h`
/// per round.
struct ChainPrediction {
    f_a: f64,
    alpha: f64,
    beta: f64,
    flows: FlowMatrix<f64>,
}

impl ChainPrediction {
    fn new(cfg: &ExperimentConfig) -> anyhow::Result<Self> {
        let m = &cfg.model;
        let f_a = ancilla_steady_fidelity(m.n_c)?;
        let (alpha, beta) = (15.0 * m.gamma_h, 16.0 * m.gamma_h);
        let params = RoundEventParams::new(f_a, alpha, beta)?;
        let flows = flow_coefficients(&event_probabilities(&params))?;
        Ok(ChainPrediction { f_a, alpha, beta, flows })
    }

    fn iterates(&self, rounds: usize) -> Vec<f64> {
        iterate_round_chain(&RoundChainState::perfect(), &self.flows, rounds)
            .iter()
            .map(|s| s.p0)
            .collect()
    }
}

fn prediction_lines(cfg: &ExperimentConfig, s: &mut String) -> anyhow::Result<()> {
    if cfg.protocol() != Protocol::Measured {
        writeln!(s, "rate_model = not applicable to the measurement-free round")?;
        return Ok(());
    }
    let chain = match ChainPrediction::new(cfg) {
        Ok(c) => c,
        Err(e) => {
            writeln!(s, "rate_model = unavailable ({e})")?;
            return Ok(());
        }
    };
    writeln!(s, "model_ancilla_fidelity = {}", sig(chain.f_a))?;
    writeln!(s, "model_alpha = {}", sig(chain.alpha))?;
    writeln!(s, "model_beta = {}", sig(chain.beta))?;
    writeln!(s, "model_first_round_p0 = {}", sig(first_round_p0(chain.f_a, chain.alpha, chain.beta)))?;
    match chain.flows.stationary() {
        Ok(q) => writeln!(s, "model_chain_steady_p0 = {}", sig(q[0]))?,
        Err(e) => writeln!(s, "model_chain_steady_p0 = unavailable ({e})")?,
    }
    writeln!(s, "model_approx_steady_p0 = {}", sig(chain.flows.approximate_steady_p0()))?;
    // start late enough for the faster chain modes to have died out
    let skip = 20;
    match fit_decay_constant(&chain.iterates(FIT_WINDOW + skip + 1), skip) {
        Ok(fit) => writeln!(s, "model_delta0 = {}", sig(fit.delta))?,
        Err(e) => writeln!(s, "model_delta0 = unavailable ({e})")?,
    }
    Ok(())
}

fn header_lines(cfg: &ExperimentConfig, s: &mut String) -> anyhow::Result<()> {
    let (m, r) = (&cfg.model, &cfg.run);
    writeln!(s, "protocol = {:?}", cfg.protocol())?;
    writeln!(s, "gamma_h = {}", sig(m.gamma_h))?;
    writeln!(s, "gamma_c = {}", sig(m.gamma_c))?;
    writeln!(s, "n_c = {}", sig(m.n_c))?;
    writeln!(s, "rounds = {}", r.rounds)?;
    writeln!(s, "steps_per_round = {}", cfg.protocol().steps_per_round())?;
    writeln!(s, "n_traj = {}", r.n_traj)?;
    writeln!(s, "n_sub = {}", r.n_sub)?;
    writeln!(s, "master_seed = {}", r.master_seed)?;
    writeln!(
        s,
        "rng = ChaCha8, seeded from master_seed, stream = trajectory index (0..{})",
        r.n_traj
    )?;
    Ok(())
}

/// Round-end rows and, when sampled, the rows right after cooling.
fn split_rows(rows: &[RoundMetrics<f64>], spr: usize) -> (Vec<&RoundMetrics<f64>>, Vec<&RoundMetrics<f64>>) {
    let ends = rows.iter().filter(|r| r.step == spr).collect();
    let cooled = rows.iter().filter(|r| r.step == 1).collect();
    (ends, cooled)
}

fn plan_for(cfg: &ExperimentConfig) -> SamplePlan {
    let spr = cfg.protocol().steps_per_round();
    let plan = match cfg.run.sampling {
        Sampling::EveryStep => SamplePlan::every_step(cfg.run.rounds, spr),
        Sampling::RoundEnds => SamplePlan::at_steps(cfg.run.rounds, spr, &[0, spr - 1]),
    };
    plan.with_full_state(cfg.run.full_state || cfg.run.oracle)
}

/// Integrates the master equation and returns the oracle metrics at every
/// sample point together with the trace distance to the ensemble.
fn oracle_rows(
    sim: &Simulation<f64>,
    acc: &EnsembleAccumulator<f64>,
) -> anyhow::Result<Vec<(RoundMetrics<f64>, f64)>> {
    let plan = acc.plan();
    let spr = plan.steps_per_round();
    let reference = StateVector64::zero(sim.register.n_data)?;
    let mut states: Vec<Option<DensityMatrix64>> = vec![None; plan.points().len()];
    let rho = sim.ground_state()?.to_density();
    MasterEquation::new(sim).evolve(&rho, plan.rounds(), &mut |round, step, r| {
        if let Some(k) = plan.slot(round, step) {
            states[k] = Some(r.clone());
        }
    })?;
    plan.points()
        .iter()
        .zip(states)
        .enumerate()
        .map(|(k, (p, rho))| {
            let rho = rho.context("oracle skipped a sample point")?;
            let (f2_data, f2_ancilla, s_total, s_data, s_ancilla) =
                density_metrics(&rho, sim.register.n_data, &reference)?;
            let ens = acc.total_density(k)?.context("ensemble kept no full-register state")?;
            let metrics = RoundMetrics {
                round: p.round + 1,
                step: p.step + 1,
                time: (p.round * spr + p.step + 1) as f64,
                f2_data,
                f2_ancilla,
                s_total: Some(s_total),
                s_data,
                s_ancilla,
                n_traj: 0,
                f2_data_err: 0.0,
                f2_ancilla_err: 0.0,
            };
            Ok((metrics, ens.trace_distance(&rho)?))
        })
        .collect()
}

pub fn cmd_run(args: &RunArgs, oracle: bool) -> anyhow::Result<()> {
    let (cfg, out) = load(args, oracle)?;
    let plan = plan_for(&cfg);
    let (sim, acc) = simulate(&cfg, &plan)?;
    let rows = compute_step_metrics(&acc, &StateVector64::zero(sim.register.n_data)?)?;
    let spr = sim.steps_per_round();

    write_metrics(&out.join("metrics.csv"), rows.iter())?;
    let (ends, cooled) = split_rows(&rows, spr);
    write_metrics(&out.join("rounds.csv"), ends.iter().copied())?;

    let mut s = String::new();
    header_lines(&cfg, &mut s)?;
    let first = ends.first().context("no round-end samples")?;
    let last = ends.last().context("no round-end samples")?;
    writeln!(s, "f2_data_round_1 = {} +- {}", sig(first.f2_data), sig(first.f2_data_err))?;
    writeln!(s, "f2_data_final = {} +- {}", sig(last.f2_data), sig(last.f2_data_err))?;
    let from = ends.len() - ends.len().div_ceil(4);
    let tail = &ends[from..];
    let plateau = tail.iter().map(|r| r.f2_data).sum::<f64>() / tail.len() as f64;
    writeln!(s, "f2_data_plateau = {} (mean over rounds {}-{})", sig(plateau), from + 1, ends.len())?;
    if let (Some(a), Some(b)) = (cooled.first(), cooled.last()) {
        writeln!(s, "f2_ancilla_after_cooling_round_1 = {} +- {}", sig(a.f2_ancilla), sig(a.f2_ancilla_err))?;
        writeln!(s, "f2_ancilla_after_cooling_final = {} +- {}", sig(b.f2_ancilla), sig(b.f2_ancilla_err))?;
    }
    prediction_lines(&cfg, &mut s)?;

    if cfg.run.oracle {
        let oracle = oracle_rows(&sim, &acc)?;
        let path = out.join("oracle.csv");
        let mut w = csv::Writer::from_path(&path).with_context(|| format!("writing {}", path.display()))?;
        let mut header: Vec<&str> = CSV_HEADER.to_vec();
        header.push("trace_distance");
        w.write_record(&header)?;
        for (m, d) in &oracle {
            let mut rec = m.csv_fields().to_vec();
            rec.push(sig(*d));
            w.write_record(&rec)?;
        }
        w.flush()?;
        let worst = oracle.iter().map(|(_, d)| *d).fold(0.0, f64::max);
        let final_d = oracle.last().map_or(f64::NAN, |(_, d)| *d);
        writeln!(s, "oracle_trace_distance_max = {}", sig(worst))?;
        writeln!(s, "oracle_trace_distance_final = {}", sig(final_d))?;
        writeln!(s, "oracle_bound_5_over_sqrt_n = {}", sig(5.0 / (cfg.run.n_traj as f64).sqrt()))?;
    }
    fs::write(out.join("summary.txt"), &s)?;
    print!("{s}");
    Ok(())
}

pub fn cmd_compare(args: &RunArgs) -> anyhow::Result<()> {
    let (mut cfg, out) = load(args, false)?;
    if cfg.protocol() != Protocol::Measured {
        return Err(invalid("compare needs the measured protocol"));
    }
    cfg.run.sampling = Sampling::RoundEnds;
    cfg.run.full_state = false;
    let chain = ChainPrediction::new(&cfg).map_err(|e| invalid(format!("rate model: {e:#}")))?;
    let plan = plan_for(&cfg);
    let (sim, acc) = simulate(&cfg, &plan)?;
    let rows = compute_step_metrics(&acc, &StateVector64::zero(sim.register.n_data)?)?;
    let (ends, cooled) = split_rows(&rows, sim.steps_per_round());
    let p0 = chain.iterates(cfg.run.rounds);

    let path = out.join("compare.csv");
    let mut w = csv::Writer::from_path(&path).with_context(|| format!("writing {}", path.display()))?;
    w.write_record([
        "round",
        "f2_data",
        "f2_data_err",
        "p0_chain",
        "f2_ancilla_cooled",
        "f2_ancilla_cooled_err",
        "f_a_model",
        "n_traj",
    ])?;
    for ((e, c), p) in ends.iter().zip(&cooled).zip(&p0) {
        w.write_record([
            e.round.to_string(),
            sig(e.f2_data),
            sig(e.f2_data_err),
            sig(*p),
            sig(c.f2_ancilla),
            sig(c.f2_ancilla_err),
            sig(chain.f_a),
            e.n_traj.to_string(),
        ])?;
    }
    w.flush()?;
    println!("wrote {}", path.display());
    Ok(())
}
