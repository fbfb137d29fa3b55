// Undamped standing wave `z = cos(t) sin(x)`: energy drift and spatial
// convergence order of the solver.

use std::f64::consts::PI;

use etm_wave::simulation::{simulate, SimulationSetup};
use etm_wave::trigger::ControllerPolicy;
use etm_wave::wave1d::{Grid1D, WaveState};

fn max_error(n: usize, horizon: f64) -> etm_wave::Result<(f64, f64)> {
    let grid = Grid1D::new(PI, n, 0.5)?;
    let setup = SimulationSetup::new(grid, ControllerPolicy::open_loop(), horizon);
    let out = simulate(&setup, WaveState::from_fns(&grid, f64::sin, |_| 0.0))?;
    let e_ref = PI / 4.0;
    let drift = out
        .trace
        .rows
        .iter()
        .map(|r| (r.energy - e_ref).abs() / e_ref)
        .fold(0.0, f64::max);
    let t = out.final_state.t;
    let err = grid
        .nodes()
        .iter()
        .zip(&out.final_state.z)
        .map(|(x, z)| (z - t.cos() * x.sin()).abs())
        .fold(0.0, f64::max);
    Ok((drift, err))
}

pub fn run_example() -> etm_wave::Result<()> {
    let (drift, _) = max_error(255, 10.0)?;
    println!("relative energy drift over [0,10] at n=255: {drift:.3e}");
    let (_, coarse) = max_error(63, 2.0)?;
    let (_, fine) = max_error(127, 2.0)?;
    println!("max nodal error n=63: {coarse:.3e}, n=127: {fine:.3e}, order {:.3}", (coarse / fine).log2());
    assert!(drift < 1e-3);
    Ok(())
}

#[allow(dead_code)]
fn main() -> etm_wave::Result<()> {
    run_example()
}
