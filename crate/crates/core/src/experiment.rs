//! The workflows behind the command-line tool. Each `cmd_*` function returns
//! its results and writes its files; printing is left to the caller.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::analysis::{default_decay_window, fit_decay, verify_trace, CertifiedRate, TraceRecord, VerificationReport};
use crate::certificate::{
    build_phi, find_feasible, max_decay_rate, offending_diagonal, CertificateParams, FeasibilityReport, SearchOptions,
};
use crate::config::ExperimentConfig;
use crate::error::{require_positive, Error, Result};
use crate::io::{self, fmt_num};
use crate::simulation::{simulate, SimulationOutput, SimulationSetup};
use crate::trigger::ControllerPolicy;

#[derive(Clone, Debug, PartialEq)]
pub struct CertifyOutcome {
    pub report: FeasibilityReport,
    /// Non-negative diagonal entries of `Φ`, 0-based.
    pub offending: Vec<(usize, f64)>,
    /// Best rate over the search grid; absent for audits.
    pub best: Option<(f64, CertificateParams)>,
}

impl CertifyOutcome {
    pub fn render(&self) -> String {
        let mut out = self.report.to_key_value();
        for (i, v) in &self.offending {
            let _ = writeln!(out, "offending entry ({},{}) = {}", i + 1, i + 1, fmt_num(*v));
        }
        if let Some((delta, p)) = &self.best {
            let _ = writeln!(
                out,
                "delta_star={} (epsilon={}, lambda1={}, lambda2={}, gamma={})",
                fmt_num(*delta),
                fmt_num(p.epsilon),
                fmt_num(p.lambda1),
                fmt_num(p.lambda2),
                fmt_num(p.gamma)
            );
        }
        out
    }
}

/// Audits `explicit` when given, otherwise searches for a certificate.
pub fn cmd_certify(alpha: f64, c_omega: f64, explicit: Option<CertificateParams>) -> Result<CertifyOutcome> {
    match explicit {
        Some(params) => {
            params.validate()?;
            let report = FeasibilityReport::audit(&params)?;
            let offending = offending_diagonal(&build_phi(&params)?);
            Ok(CertifyOutcome {
                report,
                offending,
                best: None,
            })
        }
        None => {
            let opts = SearchOptions::default();
            let report = find_feasible(alpha, c_omega, &opts)?;
            let best = max_decay_rate(alpha, c_omega, &opts)?;
            Ok(CertifyOutcome {
                report,
                offending: Vec::new(),
                best: Some(best),
            })
        }
    }
}

fn run(config: &ExperimentConfig, cert: &CertificateParams, policy: ControllerPolicy) -> Result<SimulationOutput> {
    let mut setup = SimulationSetup::new(config.grid()?, policy, config.horizon).with_lyapunov(cert.epsilon);
    if let Some(every) = config.snapshot_every {
        setup = setup.with_snapshots(every);
    }
    simulate(&setup, config.initial_state()?)
}

fn prepared(config: &ExperimentConfig) -> Result<CertificateParams> {
    config.validate()?;
    config.certificate()
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimulateOutcome {
    pub certificate: CertificateParams,
    pub output: SimulationOutput,
    pub files: Vec<PathBuf>,
}

fn trace_path(dir: &Path, stem: &str) -> PathBuf {
    dir.join(format!("{stem}.csv"))
}

/// Runs the configured policy and writes `trace_<policy>.csv`,
/// `events_<policy>.csv` and, with snapshots on, `snapshots_<policy>.csv`.
pub fn cmd_simulate(config: &ExperimentConfig) -> Result<SimulateOutcome> {
    let cert = prepared(config)?;
    let policy = config.policy(cert.gamma)?;
    let output = run(config, &cert, policy)?;
    let name = policy.name();
    let dir = &config.out_dir;
    let mut files = Vec::new();
    let trace = trace_path(dir, &format!("trace_{name}"));
    io::write_trace(&trace, &output.trace)?;
    files.push(trace);
    let events = trace_path(dir, &format!("events_{name}"));
    io::write_events(&events, &output.events)?;
    files.push(events);
    if config.snapshot_every.is_some() {
        let path = trace_path(dir, &format!("snapshots_{name}"));
        io::write_text(&path, &io::snapshots_to_csv(&config.grid()?.nodes(), &output.snapshots))?;
        files.push(path);
    }
    Ok(SimulateOutcome {
        certificate: cert,
        output,
        files,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct CompareOutcome {
    pub certificate: CertificateParams,
    /// `T/N_up` from the event-triggered run.
    pub tau: f64,
    /// Continuous, event-triggered, fixed, periodic.
    pub runs: [SimulationOutput; 4],
    pub files: Vec<PathBuf>,
}

impl CompareOutcome {
    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "tau=T/N_up={}", fmt_num(self.tau));
        for r in &self.runs {
            let _ = writeln!(
                out,
                "{:<16} N_up={:<5} E(T)={}",
                r.trace.meta.policy,
                r.trace.n_up(),
                fmt_num(r.trace.final_energy())
            );
        }
        out
    }
}

fn columns_csv(schema: &str, runs: &[SimulationOutput; 4], value: impl Fn(&crate::analysis::TraceRow) -> f64) -> String {
    let mut out = format!("{schema}\n{}\n", io::COMPARE_HEADER);
    let n = runs.iter().map(|r| r.trace.rows.len()).min().unwrap_or(0);
    for i in 0..n {
        out.push_str(&fmt_num(runs[0].trace.rows[i].t));
        for r in runs {
            out.push(',');
            out.push_str(&fmt_num(value(&r.trace.rows[i])));
        }
        out.push('\n');
    }
    out
}

/// Runs the four controllers on the same grid and initial data. The periodic
/// period is `T/N_up` of the event-triggered run. Writes `compare_energy.csv`,
/// `compare_control.csv` and one trace per policy.
pub fn cmd_compare(config: &ExperimentConfig) -> Result<CompareOutcome> {
    let cert = prepared(config)?;
    let gamma = config.gamma.unwrap_or(cert.gamma);
    let event = run(config, &cert, ControllerPolicy::event_triggered(config.alpha, gamma))?;
    let tau = event.trace.end_time() / event.trace.n_up() as f64;
    let others: Vec<SimulationOutput> = [
        ControllerPolicy::continuous(config.alpha),
        ControllerPolicy::fixed(config.alpha),
        ControllerPolicy::periodic(config.alpha, tau),
    ]
    .into_par_iter()
    .map(|p| run(config, &cert, p))
    .collect::<Result<_>>()?;
    let [continuous, fixed, periodic]: [SimulationOutput; 3] =
        others.try_into().expect("three policies were run");
    let runs = [continuous, event, fixed, periodic];

    let dir = &config.out_dir;
    let mut files = Vec::new();
    let energy = dir.join("compare_energy.csv");
    io::write_text(&energy, &columns_csv(io::COMPARE_SCHEMA, &runs, |r| r.energy))?;
    files.push(energy);
    let control = dir.join("compare_control.csv");
    io::write_text(&control, &columns_csv(io::COMPARE_SCHEMA, &runs, |r| r.control_norm))?;
    files.push(control);
    for r in &runs {
        let path = trace_path(dir, &format!("trace_{}", r.trace.meta.policy));
        io::write_trace(&path, &r.trace)?;
        files.push(path);
    }
    let events = dir.join("events_event_triggered.csv");
    io::write_events(&events, &runs[1].events)?;
    files.push(events);
    Ok(CompareOutcome {
        certificate: cert,
        tau,
        runs,
        files,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub enum SweepKind {
    Gamma(Vec<f64>),
    Tau(Vec<f64>),
}

impl SweepKind {
    fn name(&self) -> &'static str {
        match self {
            SweepKind::Gamma(_) => "gamma",
            SweepKind::Tau(_) => "tau",
        }
    }

    fn values(&self) -> &[f64] {
        match self {
            SweepKind::Gamma(v) | SweepKind::Tau(v) => v,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    pub n_up: usize,
    pub min_dwell: Option<f64>,
    pub initial_energy: f64,
    pub final_energy: f64,
    /// Absent when the energy vanishes on the fitting window.
    pub delta_fit: Option<f64>,
}

impl SweepRow {
    pub fn decaying(&self) -> bool {
        self.final_energy < self.initial_energy
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepOutcome {
    pub kind: &'static str,
    pub rows: Vec<SweepRow>,
    /// `T/N_up` of the event-triggered run at the certified `γ` (τ sweeps only).
    pub reference_tau: Option<f64>,
    pub files: Vec<PathBuf>,
}

impl SweepOutcome {
    /// Largest decaying and smallest growing swept value.
    pub fn boundary(&self) -> (Option<f64>, Option<f64>) {
        let last_decaying = self
            .rows
            .iter()
            .filter(|r| r.decaying())
            .map(|r| r.value)
            .reduce(f64::max);
        let first_growing = self
            .rows
            .iter()
            .filter(|r| !r.decaying())
            .map(|r| r.value)
            .reduce(f64::min);
        (last_decaying, first_growing)
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("{}\n# kind={}\n", io::SWEEP_SCHEMA, self.kind);
        if let Some(t) = self.reference_tau {
            let _ = writeln!(out, "# reference_tau={}", fmt_num(t));
        }
        out.push_str("value,n_up,min_dwell,final_energy,delta_fit,decaying\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                fmt_num(r.value),
                r.n_up,
                r.min_dwell.map(fmt_num).unwrap_or_default(),
                fmt_num(r.final_energy),
                r.delta_fit.map(fmt_num).unwrap_or_default(),
                u8::from(r.decaying())
            );
        }
        out
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        if let Some(t) = self.reference_tau {
            let _ = writeln!(out, "reference tau=T/N_up={}", fmt_num(t));
        }
        let _ = writeln!(
            out,
            "{:>12} {:>6} {:>12} {:>14} {:>12} {:>9}",
            self.kind, "N_up", "min_dwell", "E(T)", "delta_fit", "decaying"
        );
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{:>12.6} {:>6} {:>12} {:>14.6e} {:>12} {:>9}",
                r.value,
                r.n_up,
                r.min_dwell.map_or_else(|| "-".into(), |d| format!("{d:.6}")),
                r.final_energy,
                r.delta_fit.map_or_else(|| "-".into(), |d| format!("{d:.6}")),
                r.decaying()
            );
        }
        if self.kind == "tau" {
            let (lo, hi) = self.boundary();
            let show = |v: Option<f64>| v.map_or_else(|| "none".to_string(), fmt_num);
            let _ = writeln!(out, "stability boundary between tau={} and tau={}", show(lo), show(hi));
        }
        out
    }
}

fn sweep_row(value: f64, trace: &TraceRecord) -> SweepRow {
    SweepRow {
        value,
        n_up: trace.n_up(),
        min_dwell: trace.dwells().into_iter().reduce(f64::min),
        initial_energy: trace.rows.first().map_or(0.0, |r| r.energy),
        final_energy: trace.final_energy(),
        delta_fit: fit_decay(trace, default_decay_window(trace)).ok(),
    }
}

/// Runs one simulation per swept value in parallel. `γ` sweeps use the
/// event-triggered policy, `τ` sweeps the periodic one. Writes
/// `sweep_<kind>.csv` plus `sweep_<kind>_<i>.csv` traces.
pub fn cmd_sweep(config: &ExperimentConfig, sweep: &SweepKind) -> Result<SweepOutcome> {
    let values = sweep.values();
    if values.is_empty() {
        return Err(Error::invalid(sweep.name(), "sweep list is empty"));
    }
    for v in values {
        require_positive(sweep.name(), *v)?;
    }
    let cert = prepared(config)?;
    let alpha = config.alpha;
    let policies: Vec<ControllerPolicy> = values
        .iter()
        .map(|&v| match sweep {
            SweepKind::Gamma(_) => ControllerPolicy::event_triggered(alpha, v),
            SweepKind::Tau(_) => ControllerPolicy::periodic(alpha, v),
        })
        .collect();
    let traces: Vec<TraceRecord> = policies
        .par_iter()
        .map(|p| run(config, &cert, *p).map(|o| o.trace))
        .collect::<Result<_>>()?;
    let reference_tau = match sweep {
        SweepKind::Tau(_) => {
            let gamma = config.gamma.unwrap_or(cert.gamma);
            let event = run(config, &cert, ControllerPolicy::event_triggered(alpha, gamma))?.trace;
            Some(event.end_time() / event.n_up() as f64)
        }
        SweepKind::Gamma(_) => None,
    };

    let kind = sweep.name();
    let mut files = Vec::new();
    for (i, t) in traces.iter().enumerate() {
        let path = config.out_dir.join(format!("sweep_{kind}_{i}.csv"));
        io::write_trace(&path, t)?;
        files.push(path);
    }
    let outcome = SweepOutcome {
        kind,
        rows: values.iter().zip(&traces).map(|(v, t)| sweep_row(*v, t)).collect(),
        reference_tau,
        files,
    };
    let summary = config.out_dir.join(format!("sweep_{kind}.csv"));
    io::write_text(&summary, &outcome.to_csv())?;
    let mut outcome = outcome;
    outcome.files.insert(0, summary);
    Ok(outcome)
}

/// Verifies each trace file. `delta` defaults to the searched certificate
/// for the trace's `α`.
pub fn cmd_verify(
    paths: &[PathBuf],
    delta: Option<f64>,
    c_omega: f64,
) -> Result<Vec<(PathBuf, VerificationReport)>> {
    if paths.is_empty() {
        return Err(Error::invalid("traces", "no trace files given"));
    }
    require_positive("c_omega", c_omega)?;
    paths
        .iter()
        .map(|path| {
            let trace = io::read_trace(path)?;
            let delta = match delta {
                Some(d) => d,
                None if trace.meta.alpha > 0.0 => {
                    find_feasible(trace.meta.alpha, c_omega, &SearchOptions::default())?
                        .params
                        .delta
                }
                None => 0.0,
            };
            let report = verify_trace(&trace, CertifiedRate { delta, c_omega })?;
            Ok((path.clone(), report))
        })
        .collect()
}
