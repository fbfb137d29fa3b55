mod common;

use std::f64::consts::PI;

use common::{reference_grid, reference_state, run};
use etm_wave::simulation::{simulate, SimulationSetup};
use etm_wave::trigger::ControllerPolicy;
use etm_wave::wave1d::{energy, laplacian, step, Grid1D, WaveState};
use proptest::prelude::*;

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn order(coarse: f64, fine: f64) -> f64 {
    (coarse / fine).log2()
}

#[test]
fn laplacian_converges_at_second_order() {
    let err = |n: usize| {
        let grid = Grid1D::new(PI, n, 0.5).unwrap();
        let z = grid.sample(|x| (3.0 * x).sin() + 0.2 * x * (PI - x));
        let exact = grid.sample(|x| -9.0 * (3.0 * x).sin() - 0.4);
        max_abs_diff(&laplacian(&z, &grid).unwrap(), &exact)
    };
    let p = order(err(63), err(127));
    assert!(p >= 1.9, "order {p}");
}

fn standing_wave_error(n: usize, z0: fn(f64) -> f64, z1: fn(f64) -> f64, exact: fn(f64, f64) -> f64) -> f64 {
    let grid = Grid1D::new(PI, n, 0.5).unwrap();
    let setup = SimulationSetup::new(grid, ControllerPolicy::open_loop(), 2.0);
    let out = simulate(&setup, WaveState::from_fns(&grid, z0, z1)).unwrap();
    let t = out.final_state.t;
    let expected = grid.sample(|x| exact(t, x));
    max_abs_diff(&out.final_state.z, &expected)
}

#[test]
fn standing_waves_converge_at_second_order() {
    let cos_mode = |n| standing_wave_error(n, f64::sin, |_| 0.0, |t, x| t.cos() * x.sin());
    let sin_mode = |n| standing_wave_error(n, |_| 0.0, f64::sin, |t, x| t.sin() * x.sin());
    for (name, f) in [("cos", &cos_mode as &dyn Fn(usize) -> f64), ("sin", &sin_mode)] {
        let p = order(f(63), f(127));
        assert!(p >= 1.9, "{name} mode order {p}");
    }
}

#[test]
fn undamped_energy_is_conserved() {
    let start = std::time::Instant::now();
    let grid = reference_grid(255);
    let setup = SimulationSetup::new(grid, ControllerPolicy::open_loop(), 10.0);
    let out = simulate(&setup, WaveState::from_fns(&grid, f64::sin, |_| 0.0)).unwrap();
    let e_ref = PI / 4.0;
    let drift = out
        .trace
        .rows
        .iter()
        .map(|r| (r.energy - e_ref).abs() / e_ref)
        .fold(0.0, f64::max);
    assert!(drift < 1e-3, "drift {drift}");
    assert!(start.elapsed().as_secs_f64() < 5.0);
}

#[test]
fn reference_initial_energy() {
    let grid = reference_grid(511);
    let e0 = energy(&reference_state(&grid), &grid);
    assert!((e0 - PI / 2.0).abs() / (PI / 2.0) < 1e-3, "E(0)={e0}");
}

#[test]
fn continuous_damping_never_increases_energy() {
    let out = run(reference_grid(255), ControllerPolicy::continuous(1.0), 10.0, None);
    let e0 = out.trace.rows[0].energy;
    for pair in out.trace.rows.windows(2) {
        assert!(pair[1].energy - pair[0].energy <= 1e-10 * e0, "increase at t={}", pair[1].t);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn step_is_linear(
        seed in proptest::collection::vec(-1.0f64..1.0, 6 * 15),
        a in -3.0f64..3.0,
        b in -3.0f64..3.0,
    ) {
        let grid = Grid1D::new(PI, 15, 0.9).unwrap();
        let chunk = |k: usize| seed[15 * k..15 * (k + 1)].to_vec();
        let s1 = WaveState::new(&grid, chunk(0), chunk(1)).unwrap();
        let s2 = WaveState::new(&grid, chunk(2), chunk(3)).unwrap();
        let (f1, f2) = (chunk(4), chunk(5));
        let mix = |u: &[f64], v: &[f64]| u.iter().zip(v).map(|(x, y)| a * x + b * y).collect::<Vec<_>>();
        let combined = WaveState::new(&grid, mix(&s1.z, &s2.z), mix(&s1.w, &s2.w)).unwrap();
        let lhs = step(&combined, &mix(&f1, &f2), &grid).unwrap();
        let r1 = step(&s1, &f1, &grid).unwrap();
        let r2 = step(&s2, &f2, &grid).unwrap();
        prop_assert!(max_abs_diff(&lhs.z, &mix(&r1.z, &r2.z)) < 1e-11);
        prop_assert!(max_abs_diff(&lhs.w, &mix(&r1.w, &r2.w)) < 1e-11);
    }
}
