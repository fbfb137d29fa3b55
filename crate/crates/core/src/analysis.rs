//! Post-hoc checks of the certified properties on simulation traces.

use std::fmt::Write as _;

use serde::Serialize;

use crate::certificate::norm_equivalence_constant;
use crate::error::{Error, Result};
use crate::trigger::{envelope_rate, ZenoConstants};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceMeta {
    pub policy: String,
    pub alpha: f64,
    pub gamma: Option<f64>,
    pub tau: Option<f64>,
    /// Weight used for the `lyapunov` column.
    pub epsilon: Option<f64>,
    pub length: f64,
    pub n_interior: usize,
    pub dt: f64,
    pub horizon: f64,
    pub e0: f64,
    /// Largest discrete `‖Δz‖` seen during the run.
    pub c1: f64,
}

/// One row per grid time. `control_norm` is the norm of the control applied
/// from this row to the next; `error_norm_sq` is measured before any refresh.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TraceRow {
    pub t: f64,
    pub energy: f64,
    pub lyapunov: Option<f64>,
    pub lyapunov_rate: Option<f64>,
    pub error_norm_sq: f64,
    pub threshold: Option<f64>,
    pub control_norm: f64,
    pub event: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TraceRecord {
    pub meta: TraceMeta,
    pub rows: Vec<TraceRow>,
}

impl TraceRecord {
    pub fn event_times(&self) -> Vec<f64> {
        self.rows.iter().filter(|r| r.event).map(|r| r.t).collect()
    }

    pub fn n_up(&self) -> usize {
        self.rows.iter().filter(|r| r.event).count()
    }

    pub fn final_energy(&self) -> f64 {
        self.rows.last().map_or(0.0, |r| r.energy)
    }

    pub fn end_time(&self) -> f64 {
        self.rows.last().map_or(0.0, |r| r.t)
    }

    pub fn dwells(&self) -> Vec<f64> {
        self.event_times().windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// Checks the row invariants: constant positive step, non-negative energy.
    pub fn validate(&self) -> Result<()> {
        let dt = self.meta.dt;
        for (i, pair) in self.rows.windows(2).enumerate() {
            let step = pair[1].t - pair[0].t;
            if !(step > 0.0) || (step - dt).abs() > 1e-9 * dt.max(1.0) {
                return Err(Error::invalid(
                    "trace",
                    format!("row {} breaks the constant time step", i + 1),
                ));
            }
        }
        if let Some(r) = self.rows.iter().find(|r| !(r.energy >= 0.0)) {
            return Err(Error::invalid("trace", format!("negative energy at t={}", r.t)));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerificationEntry {
    pub name: String,
    pub passed: bool,
    /// Hard entries decide the overall verdict; soft ones are reported only.
    pub hard: bool,
    pub worst_residual: f64,
    pub at_t: Option<f64>,
    pub detail: String,
}

impl VerificationEntry {
    fn new(name: &str, hard: bool, worst: Worst, tolerance: f64, detail: String) -> Self {
        VerificationEntry {
            name: name.to_string(),
            passed: worst.value <= tolerance,
            hard,
            worst_residual: worst.value,
            at_t: worst.at,
            detail,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct VerificationReport {
    pub entries: Vec<VerificationEntry>,
}

impl VerificationReport {
    pub fn hard_failures(&self) -> impl Iterator<Item = &VerificationEntry> {
        self.entries.iter().filter(|e| e.hard && !e.passed)
    }

    pub fn all_hard_passed(&self) -> bool {
        self.hard_failures().next().is_none()
    }

    pub fn get(&self, name: &str) -> Option<&VerificationEntry> {
        self.entries.iter().find(|e| e.name == name)
    }

    pub fn render_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<26} {:<6} {:<5} {:>14} {:>12}  detail",
            "property", "status", "kind", "worst", "at_t"
        );
        for e in &self.entries {
            let at = e.at_t.map_or_else(|| "-".to_string(), |t| format!("{t:.6}"));
            let _ = writeln!(
                out,
                "{:<26} {:<6} {:<5} {:>14.6e} {:>12}  {}",
                e.name,
                if e.passed { "PASS" } else { "FAIL" },
                if e.hard { "hard" } else { "soft" },
                e.worst_residual,
                at,
                e.detail
            );
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

#[derive(Clone, Copy, Debug)]
struct Worst {
    value: f64,
    at: Option<f64>,
}

impl Worst {
    fn start() -> Self {
        Worst {
            value: f64::NEG_INFINITY,
            at: None,
        }
    }

    fn update(&mut self, value: f64, t: f64) {
        if value > self.value {
            self.value = value;
            self.at = Some(t);
        }
    }

    fn or_zero(self) -> Self {
        if self.value == f64::NEG_INFINITY {
            Worst { value: 0.0, at: None }
        } else {
            self
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LyapunovTolerance {
    pub abs: f64,
    pub rel: f64,
}

impl LyapunovTolerance {
    /// `rel = 1e-2·dt + 1e-6`.
    pub fn for_step(dt: f64) -> Self {
        LyapunovTolerance {
            abs: 1e-14,
            rel: 1e-2 * dt + 1e-6,
        }
    }
}

fn lyapunov_column(trace: &TraceRecord) -> Result<Vec<f64>> {
    trace
        .rows
        .iter()
        .map(|r| r.lyapunov)
        .collect::<Option<Vec<_>>>()
        .ok_or(Error::MissingColumn {
            what: "trace",
            column: "lyapunov",
        })
}

/// Indices `n` such that neither row `n` nor row `n+1` is an event.
fn smooth_steps(trace: &TraceRecord) -> impl Iterator<Item = usize> + '_ {
    (0..trace.rows.len().saturating_sub(1))
        .filter(move |&n| !trace.rows[n].event && !trace.rows[n + 1].event)
}

/// Forward-difference check of `V̇ + 2δV ≤ 0` on steps that do not touch an event.
/// `worst_residual` is the largest `(V_{n+1}-V_n)/dt + 2δV_n`.
pub fn verify_lyapunov_decrease(
    trace: &TraceRecord,
    delta: f64,
    tol: LyapunovTolerance,
) -> Result<VerificationEntry> {
    let v = lyapunov_column(trace)?;
    let dt = trace.meta.dt;
    let mut worst = Worst::start();
    let mut excess = Worst::start();
    let mut checked = 0usize;
    for n in smooth_steps(trace) {
        let residual = (v[n + 1] - v[n]) / dt + 2.0 * delta * v[n];
        worst.update(residual, trace.rows[n].t);
        excess.update(residual - (tol.abs + tol.rel * v[n]), trace.rows[n].t);
        checked += 1;
    }
    let worst = worst.or_zero();
    let excess = excess.or_zero();
    Ok(VerificationEntry {
        name: "lyapunov_decrease".into(),
        passed: excess.value <= 0.0,
        hard: true,
        worst_residual: worst.value,
        at_t: if excess.value > 0.0 { excess.at } else { worst.at },
        detail: format!("delta={delta}, {checked} inter-event steps, worst excess {:.3e}", excess.value),
    })
}

/// Largest `|(V_{n+1}-V_n)/dt - V̇_n|` over inter-event steps, where `V̇_n` is the
/// instantaneous rate recorded with the trace. Shrinks linearly with `dt`.
pub fn lyapunov_discretization_gap(trace: &TraceRecord) -> Result<f64> {
    let v = lyapunov_column(trace)?;
    let dt = trace.meta.dt;
    let mut gap = 0.0f64;
    for n in smooth_steps(trace) {
        let rate = trace.rows[n].lyapunov_rate.ok_or(Error::MissingColumn {
            what: "trace",
            column: "lyapunov_rate",
        })?;
        gap = gap.max(((v[n + 1] - v[n]) / dt - rate).abs());
    }
    Ok(gap)
}

const ENVELOPE_TOL: f64 = 1e-6;

fn relative_excess(value: f64, bound: f64) -> f64 {
    if bound > 0.0 {
        (value - bound) / bound
    } else if value > bound {
        f64::INFINITY
    } else {
        0.0
    }
}

/// `E(0)e^{-2Ct} ≤ E(t) ≤ E(0)e^{2Ct}` with `C = α(1+√γ)`, relative tolerance `1e-6`.
pub fn verify_envelope(trace: &TraceRecord, alpha: f64, gamma: f64) -> VerificationEntry {
    let c = envelope_rate(alpha, gamma);
    let e0 = trace.rows.first().map_or(0.0, |r| r.energy);
    let mut worst = Worst::start();
    for r in &trace.rows {
        let lower = e0 * (-2.0 * c * r.t).exp();
        let upper = e0 * (2.0 * c * r.t).exp();
        let below = if lower > 0.0 { (lower - r.energy) / lower } else { 0.0 };
        worst.update(below, r.t);
        worst.update(relative_excess(r.energy, upper), r.t);
    }
    VerificationEntry::new(
        "energy_envelope",
        true,
        worst.or_zero(),
        ENVELOPE_TOL,
        format!("C={c}"),
    )
}

const NORM_EQUIVALENCE_TOL: f64 = 1e-9;

fn check_epsilon(trace: &TraceRecord, epsilon: f64) -> Result<()> {
    match trace.meta.epsilon {
        Some(e) if e == epsilon => Ok(()),
        Some(e) => Err(Error::invalid(
            "epsilon",
            format!("trace lyapunov column was recorded with epsilon={e}, not {epsilon}"),
        )),
        None => Err(Error::MissingColumn {
            what: "trace",
            column: "lyapunov",
        }),
    }
}

/// `E ≤ V ≤ C_r·E` with `C_r = 1 + εC_Ω + εαC_Ω²`, relative tolerance `1e-9`.
///
/// Returns the lower and upper bound as separate entries. The lower bound is
/// reported as soft: `V - E = ε((α/2)‖z‖² + ⟨z, w⟩)` is negative whenever
/// `‖z‖²` decays faster than `e^{-αt}`.
pub fn verify_norm_equivalence(
    trace: &TraceRecord,
    epsilon: f64,
    alpha: f64,
    c_omega: f64,
) -> Result<[VerificationEntry; 2]> {
    check_epsilon(trace, epsilon)?;
    let v = lyapunov_column(trace)?;
    let cr = norm_equivalence_constant(epsilon, alpha, c_omega);
    let mut lower = Worst::start();
    let mut upper = Worst::start();
    for (r, &vn) in trace.rows.iter().zip(&v) {
        let scale = r.energy.max(f64::MIN_POSITIVE);
        lower.update((r.energy - vn) / scale, r.t);
        upper.update((vn - cr * r.energy) / (cr * scale), r.t);
    }
    Ok([
        VerificationEntry::new(
            "norm_equivalence_lower",
            false,
            lower.or_zero(),
            NORM_EQUIVALENCE_TOL,
            "E <= V".into(),
        ),
        VerificationEntry::new(
            "norm_equivalence_upper",
            true,
            upper.or_zero(),
            NORM_EQUIVALENCE_TOL,
            format!("V <= C_r E, C_r={cr}"),
        ),
    ])
}

/// Least-squares slope of `ln E` divided by `-2`.
pub fn fit_log_decay(samples: &[(f64, f64)]) -> Result<f64> {
    if samples.len() < 2 {
        return Err(Error::invalid("window", "needs at least two samples"));
    }
    if let Some((t, e)) = samples.iter().find(|(_, e)| !(*e > 0.0)) {
        return Err(Error::invalid(
            "window",
            format!("non-positive energy {e} at t={t}"),
        ));
    }
    let n = samples.len() as f64;
    let mean_t = samples.iter().map(|(t, _)| t).sum::<f64>() / n;
    let mean_y = samples.iter().map(|(_, e)| e.ln()).sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (t, e) in samples {
        let dx = t - mean_t;
        sxy += dx * (e.ln() - mean_y);
        sxx += dx * dx;
    }
    Ok(-(sxy / sxx) / 2.0)
}

/// Decay-rate estimate over rows with `t ∈ [start, end]`.
pub fn fit_decay(trace: &TraceRecord, window: (f64, f64)) -> Result<f64> {
    let samples: Vec<(f64, f64)> = trace
        .rows
        .iter()
        .filter(|r| r.t >= window.0 - 1e-12 && r.t <= window.1 + 1e-12)
        .map(|r| (r.t, r.energy))
        .collect();
    fit_log_decay(&samples)
}

/// Default fitting window: skip the transient `[0, 2]`.
pub fn default_decay_window(trace: &TraceRecord) -> (f64, f64) {
    let end = trace.end_time();
    let start = if end > 4.0 { 2.0 } else { 0.0 };
    (start, end)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ZenoReport {
    pub entry: VerificationEntry,
    pub n_up: usize,
    pub min_dwell: Option<f64>,
    pub mean_dwell: Option<f64>,
    pub max_dwell: Option<f64>,
}

/// Checks `min dwell ≥ max(dt, dwell_bound)`.
pub fn zeno_report(trace: &TraceRecord, constants: &ZenoConstants) -> ZenoReport {
    let times = trace.event_times();
    let dwells = trace.dwells();
    let n_up = times.len();
    let floor = trace.meta.dt.max(constants.dwell_bound);
    let min = dwells.iter().copied().reduce(f64::min);
    let max = dwells.iter().copied().reduce(f64::max);
    let mean = (!dwells.is_empty()).then(|| dwells.iter().sum::<f64>() / dwells.len() as f64);
    let mut worst = Worst::start();
    for (pair, d) in times.windows(2).zip(&dwells) {
        worst.update((floor - d) / floor, pair[1]);
    }
    let entry = VerificationEntry::new(
        "zeno_dwell",
        true,
        worst.or_zero(),
        1e-9,
        format!(
            "N_up={n_up}, bound={:.3e}, min dwell={}",
            constants.dwell_bound,
            min.map_or_else(|| "-".to_string(), |m| format!("{m:.6}"))
        ),
    );
    ZenoReport {
        entry,
        n_up,
        min_dwell: min,
        mean_dwell: mean,
        max_dwell: max,
    }
}

/// Smallest `K` with `E(t) ≤ K·E(0)·e^{-2δt}` on the trace.
pub fn empirical_decay_constant(trace: &TraceRecord, delta: f64) -> Option<f64> {
    let e0 = trace.rows.first()?.energy;
    if !(e0 > 0.0) {
        return None;
    }
    trace
        .rows
        .iter()
        .map(|r| r.energy * (2.0 * delta * r.t).exp() / e0)
        .reduce(f64::max)
}

/// Inputs for [`verify_trace`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CertifiedRate {
    pub delta: f64,
    pub c_omega: f64,
}

/// Runs every applicable check. Which entries are hard depends on the policy:
/// the certificate covers the continuous and event-triggered controllers.
pub fn verify_trace(trace: &TraceRecord, cert: CertifiedRate) -> Result<VerificationReport> {
    trace.validate()?;
    let meta = &trace.meta;
    let certified = matches!(meta.policy.as_str(), "event_triggered" | "continuous" | "open_loop");
    let mut entries = Vec::new();

    if meta.epsilon.is_some() {
        let mut lyap = verify_lyapunov_decrease(trace, cert.delta, LyapunovTolerance::for_step(meta.dt))?;
        lyap.hard = certified;
        entries.push(lyap);
        let epsilon = meta.epsilon.unwrap_or_default();
        let [lower, mut upper] = verify_norm_equivalence(trace, epsilon, meta.alpha, cert.c_omega)?;
        upper.hard = certified;
        entries.push(lower);
        entries.push(upper);
        let cr = norm_equivalence_constant(epsilon, meta.alpha, cert.c_omega);
        if let Some(k) = empirical_decay_constant(trace, cert.delta) {
            entries.push(VerificationEntry {
                name: "decay_constant".into(),
                passed: k <= cr,
                hard: false,
                worst_residual: k - cr,
                at_t: None,
                detail: format!("empirical K={k:.6}, C_r={cr}"),
            });
        }
    }

    let mut envelope = verify_envelope(trace, meta.alpha, meta.gamma.unwrap_or(0.0));
    envelope.hard = certified;
    entries.push(envelope);

    let window = default_decay_window(trace);
    match fit_decay(trace, window) {
        Ok(fit) => entries.push(VerificationEntry {
            name: "decay_fit".into(),
            passed: fit >= cert.delta,
            hard: certified && meta.policy != "open_loop",
            worst_residual: cert.delta - fit,
            at_t: None,
            detail: format!("delta_fit={fit:.6} on [{}, {}]", window.0, window.1),
        }),
        Err(_) => entries.push(VerificationEntry {
            name: "decay_fit".into(),
            passed: true,
            hard: false,
            worst_residual: 0.0,
            at_t: None,
            detail: "skipped: energy not positive on the window".into(),
        }),
    }

    if let Some(gamma) = meta.gamma {
        if meta.c1 > 0.0 && meta.e0 > 0.0 {
            let constants = crate::trigger::zeno_constants(meta.alpha, gamma, meta.c1, meta.e0, meta.horizon)?;
            entries.push(zeno_report(trace, &constants).entry);
        }
    }
    Ok(VerificationReport { entries })
}
