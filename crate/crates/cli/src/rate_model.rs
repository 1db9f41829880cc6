use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::Path;

use anyhow::Context;
use clap::Subcommand;
use reservoir_qec::metrics::format_sig;
use reservoir_qec::ratemodel::{
    ancilla_steady_fidelity, cooling_closed_form, cooling_steady_state, event_probabilities, first_round_p0,
    fit_decay_constant, flow_coefficients, integrate_cooling, iterate_round_chain, perturbative_delta, perturbative_p0,
    perturbative_steady_p0, slow_cooling_fss, AncillaPopulations, CoolingRates, RoundChainState, RoundEventParams,
};

use crate::config::invalid;

#[derive(Subcommand)]
pub enum RateModel {
    /// Ancilla populations while cooling from one basis state.
    Cooling {
        #[arg(long, default_value_t = 3.0)]
        gamma_c: f64,
        #[arg(long, default_value_t = 0.0)]
        n_c: f64,
        /// Initial ancilla basis state, 0..=7 (bit 2 is the first ancilla).
        #[arg(long, default_value_t = 7)]
        initial: usize,
        #[arg(long, default_value_t = 2.0)]
        t_max: f64,
        #[arg(long, default_value_t = 40)]
        points: usize,
    },
    /// Stationary ancilla fidelity over cold-reservoir occupancies.
    Ancilla {
        #[arg(long, value_delimiter = ',', default_values_t = [0.0, 1e-3, 1e-2, 1e-1, 0.5, 1.0])]
        n_c: Vec<f64>,
        #[arg(long, default_value_t = 3.0)]
        gamma_c: f64,
    },
    /// Slow-cooling self-consistent ancilla fidelity over (alpha, x).
    Fss {
        #[arg(long, value_delimiter = ',', default_values_t = [0.0, 0.01, 0.05, 0.096, 0.2])]
        alpha: Vec<f64>,
        /// Grid points for x in [0, 1).
        #[arg(long, default_value_t = 20)]
        points: usize,
    },
    /// Round-to-round data chain, its stationary state and fitted decay.
    Chain {
        /// Ancilla fidelity after cooling; defaults to the thermal value for `--n-c`.
        #[arg(long)]
        f_a: Option<f64>,
        #[arg(long, default_value_t = 0.0)]
        n_c: f64,
        /// Ancilla error probability per round.
        #[arg(long, default_value_t = 1e-3)]
        alpha: f64,
        /// Data error probability per round; defaults to `alpha`.
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long, default_value_t = 400)]
        rounds: usize,
        /// First round of the decay fit.
        #[arg(long, default_value_t = 4)]
        skip: usize,
    },
}

impl RateModel {
    fn name(&self) -> &'static str {
        match self {
            RateModel::Cooling { .. } => "cooling",
            RateModel::Ancilla { .. } => "ancilla",
            RateModel::Fss { .. } => "fss",
            RateModel::Chain { .. } => "chain",
        }
    }
}

fn sig(v: f64) -> String {
    format_sig(v, 12)
}

struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: &[&str]) -> Self {
        Table {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, values: &[f64]) {
        self.rows.push(values.iter().map(|v| sig(*v)).collect());
    }

    fn write(&self, out: impl Write) -> anyhow::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn cooling(gamma_c: f64, n_c: f64, initial: usize, t_max: f64, points: usize) -> anyhow::Result<(Table, String)> {
    let rates = CoolingRates::new(gamma_c, n_c).map_err(|e| invalid(e.to_string()))?;
    if !(t_max > 0.0) || points == 0 {
        return Err(invalid("t_max must be positive and points at least 1"));
    }
    let mut p = AncillaPopulations::basis(initial).map_err(|e| invalid(e.to_string()))?;
    let labels: Vec<String> = (0..8).map(|i| format!("p{i:03b}")).collect();
    let mut header = vec!["t"];
    header.extend(labels.iter().map(String::as_str));
    header.extend(["fidelity", "closed_form_fidelity"]);
    let mut table = Table::new(&header);
    let dt = t_max / points as f64;
    for k in 0..=points {
        if k > 0 {
            p = integrate_cooling(&p, &rates, dt, 100);
        }
        let t = k as f64 * dt;
        let closed = if n_c == 0.0 {
            cooling_closed_form(initial, rates.a, t)?.fidelity()
        } else {
            f64::NAN
        };
        let mut row = vec![t];
        row.extend(p.0);
        row.extend([p.fidelity(), closed]);
        table.push(&row);
    }
    let mut report = String::new();
    writeln!(report, "decay rate A = {}, excitation rate B = {}", sig(rates.a), sig(rates.b))?;
    writeln!(report, "fidelity at t = {}: {}", sig(t_max), sig(p.fidelity()))?;
    Ok((table, report))
}

fn ancilla(n_cs: &[f64], gamma_c: f64) -> anyhow::Result<(Table, String)> {
    let mut table = Table::new(&["n_c", "closed_form", "rate_steady_state", "integrated"]);
    let mut worst: f64 = 0.0;
    for &n_c in n_cs {
        let rates = CoolingRates::new(gamma_c, n_c).map_err(|e| invalid(e.to_string()))?;
        let closed = ancilla_steady_fidelity(n_c).map_err(|e| invalid(e.to_string()))?;
        let steady = cooling_steady_state(&rates).map_err(|e| invalid(e.to_string()))?.fidelity();
        // 40 relaxation times from the fully mixed state
        let t = 40.0 / (rates.a + rates.b);
        let integrated = integrate_cooling(&AncillaPopulations::uniform(), &rates, t, 4000).fidelity();
        worst = worst.max((closed - steady).abs());
        table.push(&[n_c, closed, steady, integrated]);
    }
    let report = format!("max |closed_form - rate_steady_state| = {}\n", sig(worst));
    Ok((table, report))
}

fn fss(alphas: &[f64], points: usize) -> anyhow::Result<(Table, String)> {
    if points == 0 {
        return Err(invalid("points must be at least 1"));
    }
    let mut table = Table::new(&["alpha", "x", "f_ss"]);
    for &alpha in alphas {
        for i in 0..points {
            let x = i as f64 / points as f64;
            let f = slow_cooling_fss(alpha, x).map_err(|e| invalid(e.to_string()))?;
            table.push(&[alpha, x, f]);
        }
    }
    Ok((table, String::new()))
}

fn chain(
    f_a: Option<f64>,
    n_c: f64,
    alpha: f64,
    beta: Option<f64>,
    rounds: usize,
    skip: usize,
) -> anyhow::Result<(Table, String)> {
    let f_a = match f_a {
        Some(f) => f,
        None => ancilla_steady_fidelity(n_c).map_err(|e| invalid(e.to_string()))?,
    };
    let beta = beta.unwrap_or(alpha);
    let params = RoundEventParams::new(f_a, alpha, beta).map_err(|e| invalid(e.to_string()))?;
    let flows = flow_coefficients(&event_probabilities(&params))?;
    let states = iterate_round_chain(&RoundChainState::perfect(), &flows, rounds);
    // the second-order series assumes perfect cooling and equal error rates
    let series = f_a == 1.0 && beta == alpha;

    let mut table = Table::new(&["round", "p0", "pa", "pb", "p7", "p0_series"]);
    for (i, s) in states.iter().enumerate() {
        let n = i + 1;
        let p0_series = if series { perturbative_p0(n, alpha) } else { f64::NAN };
        table.push(&[n as f64, s.p0, s.pa, s.pb, s.p7, p0_series]);
    }

    let mut r = String::new();
    writeln!(r, "f_a = {}, alpha = {}, beta = {}", sig(f_a), sig(alpha), sig(beta))?;
    if let Some(s) = states.first() {
        writeln!(r, "round 1 p0: chain {}, first order {}", sig(s.p0), sig(first_round_p0(f_a, alpha, beta)))?;
    }
    writeln!(r, "stationary p0: {}", sig(flows.stationary()?[0]))?;
    writeln!(r, "stationary p0 (leading-flow approximation): {}", sig(flows.approximate_steady_p0()))?;
    if series {
        writeln!(r, "stationary p0 (second-order series): {}", sig(perturbative_steady_p0(alpha)))?;
    }
    let p0: Vec<f64> = states.iter().map(|s| s.p0).collect();
    match fit_decay_constant(&p0, skip) {
        Ok(fit) => {
            writeln!(r, "fitted stationary p0: {}", sig(fit.steady_state))?;
            writeln!(r, "fitted delta0: {}", sig(fit.delta))?;
            writeln!(r, "fitted delta0 - 1: {}", sig(fit.delta - 1.0))?;
            if alpha > 0.0 {
                writeln!(r, "(delta0 - 1)/alpha^2: {}", sig((fit.delta - 1.0) / (alpha * alpha)))?;
            }
            writeln!(r, "fit relative residual: {}", sig(fit.relative_residual))?;
        }
        Err(e) => writeln!(r, "decay fit unavailable: {e}")?,
    }
    if series {
        writeln!(r, "second-order delta0 - 1: {}", sig(perturbative_delta(alpha) - 1.0))?;
    }
    Ok((table, r))
}

pub fn cmd_rate_model(model: &RateModel, out: Option<&Path>) -> anyhow::Result<()> {
    let (table, report) = match model {
        RateModel::Cooling {
            gamma_c,
            n_c,
            initial,
            t_max,
            points,
        } => cooling(*gamma_c, *n_c, *initial, *t_max, *points)?,
        RateModel::Ancilla { n_c, gamma_c } => ancilla(n_c, *gamma_c)?,
        RateModel::Fss { alpha, points } => fss(alpha, *points)?,
        RateModel::Chain {
            f_a,
            n_c,
            alpha,
            beta,
            rounds,
            skip,
        } => chain(*f_a, *n_c, *alpha, *beta, *rounds, *skip)?,
    };
    match out {
        Some(dir) => {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            let csv_path = dir.join(format!("{}.csv", model.name()));
            table.write(fs::File::create(&csv_path).with_context(|| format!("writing {}", csv_path.display()))?)?;
            if !report.is_empty() {
                fs::write(dir.join(format!("{}_report.txt", model.name())), &report)?;
            }
            print!("{report}");
        }
        None => {
            table.write(io::stdout().lock())?;
            eprint!("{report}");
        }
    }
    Ok(())
}
