//! Triggering rule and controller policies.
//!
//! The event-triggered controller holds `f = -α·w(t_k)` and refreshes the
//! held velocity at the first grid time where `‖w - w(t_k)‖² > 2γE`.

use std::fmt;

use crate::error::{require_positive, Error, Result};
use crate::wave1d::{energy, Grid1D, WaveState};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PolicyKind {
    /// `f = -α·w(t)` recomputed every step.
    Continuous,
    /// `f = -α·w(t_k)`, refreshed by the triggering rule with threshold `gamma`.
    EventTriggered { gamma: f64 },
    /// `f = -α·w(jτ)`, sample instants rounded to the nearest step.
    Periodic { tau: f64 },
    /// `f = -α·w(0)` for all time.
    Fixed,
    OpenLoop,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ControllerPolicy {
    pub kind: PolicyKind,
    pub alpha: f64,
}

impl ControllerPolicy {
    pub fn continuous(alpha: f64) -> Self {
        ControllerPolicy {
            kind: PolicyKind::Continuous,
            alpha,
        }
    }

    pub fn event_triggered(alpha: f64, gamma: f64) -> Self {
        ControllerPolicy {
            kind: PolicyKind::EventTriggered { gamma },
            alpha,
        }
    }

    pub fn periodic(alpha: f64, tau: f64) -> Self {
        ControllerPolicy {
            kind: PolicyKind::Periodic { tau },
            alpha,
        }
    }

    pub fn fixed(alpha: f64) -> Self {
        ControllerPolicy {
            kind: PolicyKind::Fixed,
            alpha,
        }
    }

    pub fn open_loop() -> Self {
        ControllerPolicy {
            kind: PolicyKind::OpenLoop,
            alpha: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self.kind {
            PolicyKind::OpenLoop => {}
            _ => require_positive("alpha", self.alpha)?,
        }
        match self.kind {
            PolicyKind::EventTriggered { gamma } => require_positive("gamma", gamma),
            PolicyKind::Periodic { tau } => require_positive("tau", tau),
            _ => Ok(()),
        }
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            PolicyKind::Continuous => "continuous",
            PolicyKind::EventTriggered { .. } => "event_triggered",
            PolicyKind::Periodic { .. } => "periodic",
            PolicyKind::Fixed => "fixed",
            PolicyKind::OpenLoop => "open_loop",
        }
    }

    pub fn gamma(&self) -> Option<f64> {
        match self.kind {
            PolicyKind::EventTriggered { gamma } => Some(gamma),
            _ => None,
        }
    }

    pub fn tau(&self) -> Option<f64> {
        match self.kind {
            PolicyKind::Periodic { tau } => Some(tau),
            _ => None,
        }
    }

    /// Whether the policy holds a sampled velocity (and so keeps an event log).
    pub fn is_sampled(&self) -> bool {
        matches!(
            self.kind,
            PolicyKind::EventTriggered { .. } | PolicyKind::Periodic { .. } | PolicyKind::Fixed
        )
    }
}

impl fmt::Display for ControllerPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EventRecord {
    pub k: usize,
    pub t: f64,
    /// `t_k - t_{k-1}`; absent for the initial sample.
    pub dwell: Option<f64>,
    /// Error just before the refresh.
    pub error_norm_sq: f64,
    pub energy: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TriggerState {
    pub held_w: Vec<f64>,
    pub t_k: f64,
    pub k: usize,
    events: Vec<EventRecord>,
    next_periodic_sample: usize,
}

impl TriggerState {
    /// Takes the first sample at `t₀` for sampled policies.
    pub fn start(policy: &ControllerPolicy, state: &WaveState, grid: &Grid1D) -> Self {
        let events = if policy.is_sampled() {
            vec![EventRecord {
                k: 0,
                t: state.t,
                dwell: None,
                error_norm_sq: 0.0,
                energy: energy(state, grid),
            }]
        } else {
            Vec::new()
        };
        TriggerState {
            held_w: state.w.clone(),
            t_k: state.t,
            k: 0,
            events,
            next_periodic_sample: 1,
        }
    }

    pub fn events(&self) -> &[EventRecord] {
        &self.events
    }

    fn refresh(&mut self, state: &WaveState, error_norm_sq: f64, energy: f64) -> EventRecord {
        let dwell = state.t - self.t_k;
        self.k += 1;
        self.t_k = state.t;
        self.held_w.clone_from(&state.w);
        let record = EventRecord {
            k: self.k,
            t: state.t,
            dwell: Some(dwell),
            error_norm_sq,
            energy,
        };
        self.events.push(record);
        record
    }

    /// Post-step sampling decision at grid index `step_index` (time `step_index·dt`).
    /// Returns the event when the held velocity was refreshed.
    pub fn observe(
        &mut self,
        policy: &ControllerPolicy,
        state: &WaveState,
        grid: &Grid1D,
        step_index: usize,
    ) -> Result<Option<EventRecord>> {
        match policy.kind {
            PolicyKind::EventTriggered { gamma } => {
                let err = error_norm_sq(state, self, grid)?;
                let e = energy(state, grid);
                if err > 2.0 * gamma * e {
                    return Ok(Some(self.refresh(state, err, e)));
                }
                Ok(None)
            }
            PolicyKind::Periodic { tau } => {
                let target = |j: usize| (j as f64 * tau / grid.dt()).round() as usize;
                if step_index >= target(self.next_periodic_sample) {
                    while target(self.next_periodic_sample) <= step_index {
                        self.next_periodic_sample += 1;
                    }
                    let err = error_norm_sq(state, self, grid)?;
                    let e = energy(state, grid);
                    return Ok(Some(self.refresh(state, err, e)));
                }
                Ok(None)
            }
            _ => Ok(None),
        }
    }
}

/// `‖w - held_w‖²`.
pub fn error_norm_sq(state: &WaveState, trig: &TriggerState, grid: &Grid1D) -> Result<f64> {
    grid.check_len(&state.w)?;
    grid.check_len(&trig.held_w)?;
    Ok(grid.dx()
        * state
            .w
            .iter()
            .zip(&trig.held_w)
            .map(|(w, h)| (w - h) * (w - h))
            .sum::<f64>())
}

/// `‖e_k‖² > 2γE`. With zero energy any nonzero error fires.
pub fn check_trigger(state: &WaveState, trig: &TriggerState, gamma: f64, grid: &Grid1D) -> Result<bool> {
    require_positive("gamma", gamma)?;
    Ok(error_norm_sq(state, trig, grid)? > 2.0 * gamma * energy(state, grid))
}

pub fn control_field(
    policy: &ControllerPolicy,
    state: &WaveState,
    trig: &TriggerState,
    grid: &Grid1D,
) -> Result<Vec<f64>> {
    grid.check_len(&state.w)?;
    grid.check_len(&trig.held_w)?;
    let alpha = policy.alpha;
    Ok(match policy.kind {
        PolicyKind::Continuous => state.w.iter().map(|w| -alpha * w).collect(),
        PolicyKind::EventTriggered { .. } | PolicyKind::Periodic { .. } | PolicyKind::Fixed => {
            trig.held_w.iter().map(|w| -alpha * w).collect()
        }
        PolicyKind::OpenLoop => vec![0.0; grid.n_interior()],
    })
}

/// Constants of the dwell-time lower bound
/// `t_{k+1} - t_k ≥ 1 / (A + B·e^{CT}/√E(0))`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ZenoConstants {
    /// Energy envelope rate `α(1 + √γ)`.
    pub c: f64,
    pub a: f64,
    pub b: f64,
    /// Bound on `‖Δz‖` over the run.
    pub c1: f64,
    pub dwell_bound: f64,
}

pub fn envelope_rate(alpha: f64, gamma: f64) -> f64 {
    alpha * (1.0 + gamma.sqrt())
}

pub fn zeno_constants(alpha: f64, gamma: f64, c1: f64, e0: f64, horizon: f64) -> Result<ZenoConstants> {
    for (field, v) in [
        ("alpha", alpha),
        ("gamma", gamma),
        ("c1", c1),
        ("e0", e0),
        ("horizon", horizon),
    ] {
        require_positive(field, v)?;
    }
    let sg = gamma.sqrt();
    let c = envelope_rate(alpha, gamma);
    let a = 2.0 * alpha / sg + alpha * (2.0 + sg);
    let b = c1 * (2.0 / gamma).sqrt();
    let dwell_bound = 1.0 / (a + b * (c * horizon).exp() / e0.sqrt());
    if !(dwell_bound > 0.0) {
        return Err(Error::invalid(
            "horizon",
            format!("dwell bound underflows for horizon {horizon}"),
        ));
    }
    Ok(ZenoConstants {
        c,
        a,
        b,
        c1,
        dwell_bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn setup() -> (Grid1D, WaveState) {
        let grid = Grid1D::new(PI, 127, 0.5).unwrap();
        let state = WaveState::from_fns(&grid, f64::sin, |x| (2.0 * x).sin());
        (grid, state)
    }

    #[test]
    fn error_vanishes_at_event() {
        let (grid, state) = setup();
        let policy = ControllerPolicy::event_triggered(1.0, 0.02);
        let trig = TriggerState::start(&policy, &state, &grid);
        assert_eq!(error_norm_sq(&state, &trig, &grid).unwrap(), 0.0);
        assert!(!check_trigger(&state, &trig, 0.02, &grid).unwrap());
    }

    #[test]
    fn constant_shift_error() {
        let (grid, mut state) = setup();
        let policy = ControllerPolicy::event_triggered(1.0, 0.02);
        let trig = TriggerState::start(&policy, &state, &grid);
        for w in state.w.iter_mut() {
            *w += 0.3;
        }
        assert_abs_diff_eq!(
            error_norm_sq(&state, &trig, &grid).unwrap(),
            0.09 * grid.dx() * 127.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn zero_energy_with_held_velocity_fires() {
        let (grid, state) = setup();
        let policy = ControllerPolicy::event_triggered(1.0, 0.02);
        let trig = TriggerState::start(&policy, &state, &grid);
        let rest = WaveState::zero(&grid);
        assert!(check_trigger(&rest, &trig, 0.02, &grid).unwrap());
        assert!(check_trigger(&rest, &trig, 0.0, &grid).is_err());
    }

    #[test]
    fn first_hold_is_initial_velocity() {
        let (grid, state) = setup();
        let policy = ControllerPolicy::event_triggered(2.0, 0.02);
        let trig = TriggerState::start(&policy, &state, &grid);
        let f = control_field(&policy, &state, &trig, &grid).unwrap();
        for (fi, z1) in f.iter().zip(grid.sample(|x| (2.0 * x).sin())) {
            assert_eq!(*fi, -2.0 * z1);
        }
        assert_eq!(trig.events().len(), 1);
        assert_eq!(trig.events()[0].dwell, None);
    }

    #[test]
    fn continuous_and_open_loop_fields() {
        let (grid, _) = setup();
        let rest = WaveState::zero(&grid);
        let policy = ControllerPolicy::continuous(1.0);
        let trig = TriggerState::start(&policy, &rest, &grid);
        assert!(control_field(&policy, &rest, &trig, &grid).unwrap().iter().all(|v| *v == 0.0));
        assert!(trig.events().is_empty());
        let (_, state) = setup();
        let open = ControllerPolicy::open_loop();
        let trig = TriggerState::start(&open, &state, &grid);
        assert!(control_field(&open, &state, &trig, &grid).unwrap().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn policy_validation() {
        assert!(ControllerPolicy::event_triggered(1.0, 0.0).validate().is_err());
        assert!(ControllerPolicy::periodic(1.0, -1.0).validate().is_err());
        assert!(ControllerPolicy::continuous(0.0).validate().is_err());
        assert!(ControllerPolicy::open_loop().validate().is_ok());
    }

    #[test]
    fn periodic_samples_on_rounded_grid_steps() {
        let (grid, mut state) = setup();
        let dt = grid.dt();
        let policy = ControllerPolicy::periodic(1.0, 10.4 * dt);
        let mut trig = TriggerState::start(&policy, &state, &grid);
        let mut fired = Vec::new();
        for n in 1..=40 {
            state.t = n as f64 * dt;
            if trig.observe(&policy, &state, &grid, n).unwrap().is_some() {
                fired.push(n);
            }
        }
        // round(10.4) = 10, round(20.8) = 21, round(31.2) = 31
        assert_eq!(fired, vec![10, 21, 31]);
    }

    #[test]
    fn zeno_constants_arithmetic() {
        let z = zeno_constants(1.0, 0.02, 1.0, PI / 2.0, 10.0).unwrap();
        assert_abs_diff_eq!(z.c, 1.0 + 0.02f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(z.c, 1.1414, epsilon = 1e-4);
        assert_abs_diff_eq!(z.a, 16.2836, epsilon = 1e-4);
        assert_abs_diff_eq!(z.b, 10.0, epsilon = 1e-12);
        assert!(z.dwell_bound > 0.0);
        let longer = zeno_constants(1.0, 0.02, 1.0, PI / 2.0, 20.0).unwrap();
        assert!(longer.dwell_bound < z.dwell_bound);
        assert!(zeno_constants(1.0, 0.0, 1.0, 1.0, 1.0).is_err());
        assert!(zeno_constants(1.0, 0.1, 1.0, -1.0, 1.0).is_err());
    }

    #[test]
    fn threshold_growth_dominates_a() {
        let a_small = zeno_constants(1.0, 1.0, 1.0, 1.0, 1.0).unwrap().a;
        let a_big = zeno_constants(1.0, 1e4, 1.0, 1.0, 1.0).unwrap().a;
        assert!(a_big > a_small);
        assert_abs_diff_eq!(a_big / 1e4f64.sqrt(), 1.0, epsilon = 0.05);
    }
}
