//! Closed-loop time integration: solver step, sampling decision, trace row.

use crate::analysis::{TraceMeta, TraceRecord, TraceRow};
use crate::error::{require_positive, Error, Result};
use crate::trigger::{control_field, error_norm_sq, ControllerPolicy, EventRecord, TriggerState};
use crate::wave1d::{energy, laplacian, lyapunov, lyapunov_rate, step, Grid1D, WaveState};

#[derive(Clone, Debug, PartialEq)]
pub struct SimulationSetup {
    pub grid: Grid1D,
    pub policy: ControllerPolicy,
    pub horizon: f64,
    /// Records `V` with this weight when set.
    pub lyapunov_epsilon: Option<f64>,
    /// Stores `z` every this many steps when set.
    pub snapshot_every: Option<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub z: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimulationOutput {
    pub trace: TraceRecord,
    pub events: Vec<EventRecord>,
    pub snapshots: Vec<Snapshot>,
    pub final_state: WaveState,
}

impl SimulationSetup {
    pub fn new(grid: Grid1D, policy: ControllerPolicy, horizon: f64) -> Self {
        SimulationSetup {
            grid,
            policy,
            horizon,
            lyapunov_epsilon: None,
            snapshot_every: None,
        }
    }

    pub fn with_lyapunov(mut self, epsilon: f64) -> Self {
        self.lyapunov_epsilon = Some(epsilon);
        self
    }

    pub fn with_snapshots(mut self, every: usize) -> Self {
        self.snapshot_every = Some(every);
        self
    }

    /// Number of steps: `horizon/dt` rounded to the nearest integer.
    pub fn n_steps(&self) -> usize {
        ((self.horizon / self.grid.dt()).round() as usize).max(1)
    }

    fn validate(&self) -> Result<()> {
        require_positive("horizon", self.horizon)?;
        self.policy.validate()?;
        if let Some(e) = self.lyapunov_epsilon {
            require_positive("epsilon", e)?;
        }
        if self.snapshot_every == Some(0) {
            return Err(Error::invalid("snapshot_every", "must be at least 1"));
        }
        Ok(())
    }
}

struct RowBuilder<'a> {
    grid: &'a Grid1D,
    policy: &'a ControllerPolicy,
    epsilon: Option<f64>,
}

impl RowBuilder<'_> {
    fn row(&self, state: &WaveState, control: &[f64], error_norm_sq: f64, event: bool) -> Result<TraceRow> {
        let e = energy(state, self.grid);
        let alpha = self.policy.alpha;
        let (v, rate) = match self.epsilon {
            Some(eps) => (
                Some(lyapunov(state, self.grid, alpha, eps)),
                Some(lyapunov_rate(state, control, self.grid, alpha, eps)?),
            ),
            None => (None, None),
        };
        Ok(TraceRow {
            t: state.t,
            energy: e,
            lyapunov: v,
            lyapunov_rate: rate,
            error_norm_sq,
            threshold: self.policy.gamma().map(|g| 2.0 * g * e),
            control_norm: self.grid.norm(control),
            event,
        })
    }
}

pub fn simulate(setup: &SimulationSetup, initial: WaveState) -> Result<SimulationOutput> {
    setup.validate()?;
    let grid = &setup.grid;
    let policy = &setup.policy;
    grid.check_len(&initial.z)?;
    grid.check_len(&initial.w)?;

    let builder = RowBuilder {
        grid,
        policy,
        epsilon: setup.lyapunov_epsilon,
    };
    let n_steps = setup.n_steps();
    let mut state = WaveState { t: 0.0, ..initial };
    let mut trig = TriggerState::start(policy, &state, grid);
    let mut control = control_field(policy, &state, &trig, grid)?;
    let mut rows = Vec::with_capacity(n_steps + 1);
    let mut snapshots = Vec::new();
    let e0 = energy(&state, grid);
    let mut c1 = grid.norm(&laplacian(&state.z, grid)?);

    rows.push(builder.row(&state, &control, 0.0, policy.is_sampled())?);
    if setup.snapshot_every.is_some() {
        snapshots.push(Snapshot {
            t: 0.0,
            z: state.z.clone(),
        });
    }

    for n in 1..=n_steps {
        state = step(&state, &control, grid)?;
        state.t = n as f64 * grid.dt();
        c1 = c1.max(grid.norm(&laplacian(&state.z, grid)?));
        let err = if policy.is_sampled() {
            error_norm_sq(&state, &trig, grid)?
        } else {
            0.0
        };
        let event = trig.observe(policy, &state, grid, n)?.is_some();
        control = control_field(policy, &state, &trig, grid)?;
        rows.push(builder.row(&state, &control, err, event)?);
        if let Some(every) = setup.snapshot_every {
            if n % every == 0 {
                snapshots.push(Snapshot {
                    t: state.t,
                    z: state.z.clone(),
                });
            }
        }
    }

    let meta = TraceMeta {
        policy: policy.name().to_string(),
        alpha: policy.alpha,
        gamma: policy.gamma(),
        tau: policy.tau(),
        epsilon: setup.lyapunov_epsilon,
        length: grid.length(),
        n_interior: grid.n_interior(),
        dt: grid.dt(),
        horizon: n_steps as f64 * grid.dt(),
        e0,
        c1,
    };
    Ok(SimulationOutput {
        trace: TraceRecord { meta, rows },
        events: trig.events().to_vec(),
        snapshots,
        final_state: state,
    })
}
