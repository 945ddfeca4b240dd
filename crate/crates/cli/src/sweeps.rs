//! Sweep commands: each turns a config into a table.

use rayon::prelude::*;

use repqed::analytic::{self, CodeParams};
use repqed::protocol::{self, ErrorKind, ProtocolConfig, ProtocolKind, PulseShape};
use repqed::scenario::{multicycle_simulate, scenario_report, BlochAverager, PiPulsePlacement};
use repqed::report::FidelityReport;

use crate::config::{Command, SweepConfig};
use crate::output::{fmt_num, fmt_opt, Table};
use crate::CliError;

/// Evenly spaced grid with `steps` intervals.
pub fn grid(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    if steps == 0 {
        return vec![lo];
    }
    (0..=steps).map(|i| lo + (hi - lo) * i as f64 / steps as f64).collect()
}

fn p_grid(cfg: &SweepConfig, default_max: f64, default_steps: usize) -> Result<Vec<f64>, CliError> {
    let lo = cfg.number("p_min")?.unwrap_or(0.0);
    let hi = cfg.number("p_max")?.unwrap_or(default_max);
    let steps = cfg.count("p_steps")?.unwrap_or(default_steps);
    if !(0.0..=1.0).contains(&lo) || !(0.0..=1.0).contains(&hi) || lo > hi {
        return Err(CliError::Config(format!("need 0 <= p_min <= p_max <= 1, got {lo} and {hi}")));
    }
    Ok(grid(lo, hi, steps))
}

const FIDELITY_COLUMNS: [&str; 7] = ["n", "p", "f_1q", "f_ign", "f_qed_uniform", "f_qed_weighted", "f_qec"];

fn fidelity_row(n: usize, p: f64, r: &FidelityReport<f64>) -> Vec<String> {
    vec![
        n.to_string(),
        fmt_num(p),
        fmt_opt(r.f_1q),
        fmt_opt(r.f_ign),
        fmt_opt(r.f_qed),
        fmt_opt(r.f_qed_weighted),
        fmt_opt(r.f_qec),
    ]
}

fn code_sizes(cfg: &SweepConfig) -> Result<Vec<usize>, CliError> {
    let ns = cfg.counts("n")?.unwrap_or_default();
    if ns.is_empty() || ns.contains(&0) {
        return Err(CliError::Config("'n' needs one or more positive code sizes".into()));
    }
    Ok(ns)
}

fn fidelity_table(
    ns: &[usize],
    ps: &[f64],
    eval: impl Fn(usize, f64) -> repqed::Result<FidelityReport<f64>> + Sync,
) -> Result<Table, CliError> {
    let points: Vec<(usize, f64)> = ns.iter().flat_map(|&n| ps.iter().map(move |&p| (n, p))).collect();
    let rows = points
        .par_iter()
        .map(|&(n, p)| eval(n, p).map(|r| fidelity_row(n, p, &r)))
        .collect::<repqed::Result<Vec<_>>>()?;
    let mut t = Table::new(&FIDELITY_COLUMNS);
    rows.into_iter().for_each(|r| t.push(r));
    Ok(t)
}

/// Closed-form fidelities on a p grid for each code size.
pub fn run_analytic(cfg: &SweepConfig) -> Result<Table, CliError> {
    let ns = code_sizes(cfg)?;
    let ps = p_grid(cfg, 1.0, 200)?;
    fidelity_table(&ns, &ps, |n, p| {
        let mut r = analytic::report(&CodeParams::uniform(n, p)?)?;
        if n == 1 {
            r.f_1q = r.f_ign;
        }
        Ok(r)
    })
}

fn averager(cfg: &SweepConfig, seed: u64) -> Result<BlochAverager, CliError> {
    let a = match cfg.text("averager").unwrap_or("quadrature") {
        "quadrature" => BlochAverager::Quadrature {
            nodes: cfg.count("nodes")?.unwrap_or(64),
            azimuths: 1,
        },
        "six" | "six_state" => BlochAverager::SixState,
        "mc" | "monte_carlo" => BlochAverager::MonteCarlo {
            samples: cfg.count("samples")?.unwrap_or(100_000),
            seed,
        },
        other => {
            return Err(CliError::Config(format!(
                "unknown averager '{other}' (expected quadrature, six or mc)"
            )))
        }
    };
    a.validate()?;
    Ok(a)
}

/// Scenario-engine fidelities, with f_1q from the closed form.
pub fn run_nqubit(cfg: &SweepConfig, seed: u64) -> Result<Table, CliError> {
    let ns = code_sizes(cfg)?;
    let ps = p_grid(cfg, 1.0, 100)?;
    let avg = averager(cfg, seed)?;
    fidelity_table(&ns, &ps, |n, p| {
        let mut r = scenario_report(n, &vec![p; n], &avg)?;
        r.f_1q = Some(analytic::f_av_1q(p)?);
        Ok(r)
    })
}

pub fn run_multicycle(cfg: &SweepConfig) -> Result<Table, CliError> {
    let ns = code_sizes(cfg)?;
    let cycles = cfg.counts("cycles")?.unwrap_or_default();
    let ratios = cfg.numbers("t_over_t1")?.unwrap_or_else(|| vec![0.2]);
    let pulses: PiPulsePlacement = cfg.parsed_one("pulses")?.unwrap_or_default();
    let mut points = Vec::new();
    for &n in &ns {
        for &m in &cycles {
            for &r in &ratios {
                points.push((n, m, r));
            }
        }
    }
    let rows = points
        .par_iter()
        .map(|&(n, m, ratio)| -> repqed::Result<Vec<String>> {
            let sim = multicycle_simulate(n, m, ratio, 1.0, pulses)?;
            let est = analytic::f_qed_multicycle_estimate(n, m, ratio, 1.0).ok();
            Ok(vec![
                n.to_string(),
                m.to_string(),
                fmt_num(ratio),
                pulses.to_string(),
                fmt_num(sim.fidelity),
                fmt_num(sim.fidelity_uniform),
                fmt_num(sim.p_select),
                fmt_opt(est.map(|e| e.fidelity)),
                fmt_opt(est.map(|e| e.p_select)),
            ])
        })
        .collect::<repqed::Result<Vec<_>>>()?;
    let mut t = Table::new(&[
        "n",
        "cycles",
        "t_over_t1",
        "pulses",
        "f_qed_weighted",
        "f_qed_uniform",
        "p_select",
        "f_estimate",
        "p_select_estimate",
    ]);
    rows.into_iter().for_each(|r| t.push(r));
    Ok(t)
}

/// (T1, T2) pairs in nanoseconds; T2 defaults to T1.
fn lifetimes(cfg: &SweepConfig) -> Result<Vec<(f64, f64)>, CliError> {
    let t1 = cfg.durations("t1")?.unwrap_or_default();
    let t2 = cfg.durations("t2")?.unwrap_or_else(|| t1.clone());
    let t2 = match t2.len() {
        1 => vec![t2[0]; t1.len()],
        n if n == t1.len() => t2,
        n => {
            return Err(CliError::Config(format!(
                "'t2' has {n} values but 't1' has {}",
                t1.len()
            )))
        }
    };
    Ok(t1.into_iter().zip(t2).map(|(a, b)| (a * 1e9, b * 1e9)).collect())
}

fn base_protocol(cfg: &SweepConfig, kind: ProtocolKind, error: ErrorKind, t1: f64, t2: f64) -> Result<ProtocolConfig<f64>, CliError> {
    let mut c = ProtocolConfig::new(kind, error).with_t1_t2(t1, t2)?;
    if let Some(dt) = cfg.duration("dt")? {
        c.dt = dt * 1e9;
    }
    if let Some(p) = cfg.parsed_one::<PulseShape>("pulse")? {
        c.pulse = p;
    }
    if let Some(d) = cfg.flag("decohere_error_slot")? {
        c.decohere_error_slot = d;
    }
    if let Some(d) = cfg.flag("decohere_during_gates")? {
        c.decohere_during_gates = d;
    }
    Ok(c)
}

/// Fidelities against the error rotation angle 2θ.
pub fn run_protocol(cfg: &SweepConfig) -> Result<Table, CliError> {
    let kind: ProtocolKind = cfg.parsed_one("protocol")?.unwrap_or(ProtocolKind::Basic);
    let errors: Vec<ErrorKind> = cfg.parsed("errors")?.unwrap_or_else(|| vec![ErrorKind::R1X]);
    let theta_max = cfg.number("theta_max")?.unwrap_or(1.0);
    let thetas = grid(0.0, theta_max, cfg.count("theta_steps")?.unwrap_or(100));
    let mut t = Table::new(&["two_theta_over_pi", "t1_ns", "error_kind", "f_ign", "f_qed_weighted", "f_qec"]);
    for (t1, t2) in lifetimes(cfg)? {
        for &e in &errors {
            let c = base_protocol(cfg, kind, e, t1, t2)?;
            let angles: Vec<f64> = thetas.iter().map(|x| x * std::f64::consts::PI).collect();
            let reports = protocol::sweep_theta(&c, &angles)?;
            for (x, r) in thetas.iter().zip(&reports) {
                t.push(vec![
                    fmt_num(*x),
                    fmt_num(t1),
                    e.to_string(),
                    fmt_opt(r.f_ign),
                    fmt_opt(r.f_qed_weighted),
                    fmt_opt(r.f_qec),
                ]);
            }
        }
    }
    Ok(t)
}

/// Ancilla-rotated protocol with relaxation during storage.
pub fn run_storage(cfg: &SweepConfig) -> Result<Table, CliError> {
    let ps = p_grid(cfg, 0.5, 50)?;
    let mut t = Table::new(&["p_storage", "t1_ns", "f_ign", "f_qed_weighted"]);
    for (t1, t2) in lifetimes(cfg)? {
        let c = base_protocol(cfg, ProtocolKind::AncillaRotated, ErrorKind::StorageDamping, t1, t2)?;
        let reports = protocol::sweep_storage(&c, &ps)?;
        for (p, r) in ps.iter().zip(&reports) {
            t.push(vec![fmt_num(*p), fmt_num(t1), fmt_opt(r.f_ign), fmt_opt(r.f_qed_weighted)]);
        }
    }
    Ok(t)
}

/// Runs a sweep command on an already checked config.
pub fn run_sweep(command: Command, cfg: &SweepConfig, seed: u64) -> Result<Table, CliError> {
    match command {
        Command::Analytic => run_analytic(cfg),
        Command::Nqubit => run_nqubit(cfg, seed),
        Command::Multicycle => run_multicycle(cfg),
        Command::Protocol => run_protocol(cfg),
        Command::Storage => run_storage(cfg),
        Command::Verify => Err(CliError::Usage("verify does not produce a table".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;

    #[test]
    fn grid_endpoints() {
        assert_eq!(grid(0.0, 1.0, 4), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(grid(0.3, 0.3, 0), vec![0.3]);
    }

    #[test]
    fn analytic_rows() {
        let cfg = parse_config("n = 1, 2\np_steps = 4").unwrap();
        let t = run_analytic(&cfg).unwrap();
        assert_eq!(t.rows.len(), 10);
        assert!(t.rows[5][2..].iter().all(|v| v == "1"), "{:?}", t.rows[5]);
    }

    #[test]
    fn protocol_ideal_start() {
        let cfg = parse_config("t1 = inf\ntheta_steps = 2\nerrors = R1X, R2Z").unwrap();
        let t = run_protocol(&cfg).unwrap();
        assert_eq!(t.rows.len(), 6);
        assert_eq!(&t.rows[0][3..], ["1", "1", "1"]);
        assert_eq!(t.rows[3][2], "R2Z");
    }

    #[test]
    fn storage_and_multicycle() {
        let cfg = parse_config("t1 = 500\np_steps = 5").unwrap();
        assert_eq!(run_storage(&cfg).unwrap().rows.len(), 6);
        let cfg = parse_config("n = 2\ncycles = 2, 3\npulses = off").unwrap();
        let t = run_multicycle(&cfg).unwrap();
        assert_eq!(t.rows.len(), 2);
        assert_eq!(t.rows[1][7], "");
    }

    #[test]
    fn bad_averager() {
        let cfg = parse_config("n = 2\naverager = magic").unwrap();
        assert!(run_nqubit(&cfg, 1).is_err());
    }
}
