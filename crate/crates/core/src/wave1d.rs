//! Explicit finite differences for `∂ₜ²z = ∂ₓ²z + f` on `(0, L)` with `z = 0`
//! at both ends.
//!
//! The state is the first-order pair `(z, w = ∂ₜz)` on interior nodes
//! `xᵢ = (i+1)·dx`; boundary values are implicit zeros. Time stepping is
//! Störmer–Verlet (kick, drift, kick) with the source held constant over a step.

use crate::error::{require_positive, Error, Result};

/// Uniform grid with a fixed time step. Unit wave speed, so the CFL
/// condition is `dt/dx ≤ 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid1D {
    length: f64,
    n_interior: usize,
    dx: f64,
    dt: f64,
}

impl Grid1D {
    pub fn new(length: f64, n_interior: usize, courant: f64) -> Result<Self> {
        require_positive("length", length)?;
        require_positive("courant", courant)?;
        if n_interior == 0 {
            return Err(Error::invalid("n_interior", "must be at least 1"));
        }
        if courant > 1.0 {
            return Err(Error::Cfl { courant });
        }
        let dx = length / (n_interior + 1) as f64;
        Ok(Grid1D {
            length,
            n_interior,
            dx,
            dt: courant * dx,
        })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn n_interior(&self) -> usize {
        self.n_interior
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn courant(&self) -> f64 {
        self.dt / self.dx
    }

    /// Interior node coordinates.
    pub fn nodes(&self) -> Vec<f64> {
        (1..=self.n_interior).map(|i| i as f64 * self.dx).collect()
    }

    pub fn sample(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        self.nodes().into_iter().map(f).collect()
    }

    pub(crate) fn check_len(&self, field: &[f64]) -> Result<()> {
        if field.len() == self.n_interior {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: self.n_interior,
                actual: field.len(),
            })
        }
    }

    /// Rectangle-rule `∫ u v`.
    pub fn inner(&self, u: &[f64], v: &[f64]) -> f64 {
        self.dx * u.iter().zip(v).map(|(a, b)| a * b).sum::<f64>()
    }

    pub fn norm_sq(&self, u: &[f64]) -> f64 {
        self.inner(u, u)
    }

    pub fn norm(&self, u: &[f64]) -> f64 {
        self.norm_sq(u).sqrt()
    }

    /// `‖∂ₓz‖²` over all `n+1` cell edges, boundary ghosts included.
    pub fn gradient_norm_sq(&self, z: &[f64]) -> f64 {
        let mut prev = 0.0;
        let mut sum = 0.0;
        for &v in z.iter().chain(std::iter::once(&0.0)) {
            let d = v - prev;
            sum += d * d;
            prev = v;
        }
        sum / self.dx
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct WaveState {
    pub t: f64,
    pub z: Vec<f64>,
    pub w: Vec<f64>,
}

impl WaveState {
    pub fn new(grid: &Grid1D, z: Vec<f64>, w: Vec<f64>) -> Result<Self> {
        grid.check_len(&z)?;
        grid.check_len(&w)?;
        Ok(WaveState { t: 0.0, z, w })
    }

    /// Samples closed-form initial data at the interior nodes.
    pub fn from_fns(grid: &Grid1D, z0: impl Fn(f64) -> f64, z1: impl Fn(f64) -> f64) -> Self {
        WaveState {
            t: 0.0,
            z: grid.sample(z0),
            w: grid.sample(z1),
        }
    }

    pub fn zero(grid: &Grid1D) -> Self {
        WaveState {
            t: 0.0,
            z: vec![0.0; grid.n_interior()],
            w: vec![0.0; grid.n_interior()],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnergySample {
    pub t: f64,
    pub energy: f64,
    pub lyapunov: Option<f64>,
}

impl EnergySample {
    pub fn of(state: &WaveState, grid: &Grid1D, lyapunov_weights: Option<(f64, f64)>) -> Self {
        EnergySample {
            t: state.t,
            energy: energy(state, grid),
            lyapunov: lyapunov_weights.map(|(alpha, epsilon)| lyapunov(state, grid, alpha, epsilon)),
        }
    }
}

fn laplacian_into(z: &[f64], inv_dx2: f64, out: &mut [f64]) {
    let n = z.len();
    for i in 0..n {
        let left = if i > 0 { z[i - 1] } else { 0.0 };
        let right = if i + 1 < n { z[i + 1] } else { 0.0 };
        out[i] = (right - 2.0 * z[i] + left) * inv_dx2;
    }
}

/// Three-point second difference with zero Dirichlet ghosts.
pub fn laplacian(z: &[f64], grid: &Grid1D) -> Result<Vec<f64>> {
    grid.check_len(z)?;
    let mut out = vec![0.0; z.len()];
    laplacian_into(z, 1.0 / (grid.dx() * grid.dx()), &mut out);
    Ok(out)
}

/// Advances one `dt` with `control` held constant:
/// half kick with `Δz + f`, full drift, half kick with the updated `Δz + f`.
pub fn step(state: &WaveState, control: &[f64], grid: &Grid1D) -> Result<WaveState> {
    grid.check_len(&state.z)?;
    grid.check_len(&state.w)?;
    grid.check_len(control)?;
    let dt = grid.dt();
    let half = 0.5 * dt;
    let inv_dx2 = 1.0 / (grid.dx() * grid.dx());
    let n = state.z.len();
    let mut lap = vec![0.0; n];

    laplacian_into(&state.z, inv_dx2, &mut lap);
    let mut w: Vec<f64> = (0..n)
        .map(|i| state.w[i] + half * (lap[i] + control[i]))
        .collect();
    let z: Vec<f64> = (0..n).map(|i| state.z[i] + dt * w[i]).collect();
    laplacian_into(&z, inv_dx2, &mut lap);
    for i in 0..n {
        w[i] += half * (lap[i] + control[i]);
    }
    Ok(WaveState {
        t: state.t + dt,
        z,
        w,
    })
}

/// `E = ½(‖w‖² + ‖∂ₓz‖²)`.
pub fn energy(state: &WaveState, grid: &Grid1D) -> f64 {
    0.5 * (grid.norm_sq(&state.w) + grid.gradient_norm_sq(&state.z))
}

/// `V = E + (αε/2)‖z‖² + ε⟨z, w⟩`.
pub fn lyapunov(state: &WaveState, grid: &Grid1D, alpha: f64, epsilon: f64) -> f64 {
    energy(state, grid)
        + 0.5 * alpha * epsilon * grid.norm_sq(&state.z)
        + epsilon * grid.inner(&state.z, &state.w)
}

/// Instantaneous `V̇` for the semi-discrete system `ż = w`, `ẇ = Δz + f`.
///
/// Uses the discrete summation-by-parts identity `Ė = ⟨w, f⟩`.
pub fn lyapunov_rate(
    state: &WaveState,
    control: &[f64],
    grid: &Grid1D,
    alpha: f64,
    epsilon: f64,
) -> Result<f64> {
    let lap = laplacian(&state.z, grid)?;
    grid.check_len(control)?;
    let accel: Vec<f64> = lap.iter().zip(control).map(|(l, f)| l + f).collect();
    Ok(grid.inner(&state.w, control)
        + alpha * epsilon * grid.inner(&state.z, &state.w)
        + epsilon * grid.norm_sq(&state.w)
        + epsilon * grid.inner(&state.z, &accel))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn cfl_violation_rejected() {
        assert!(matches!(Grid1D::new(PI, 10, 1.5), Err(Error::Cfl { .. })));
        assert!(Grid1D::new(PI, 10, 1.0).is_ok());
        assert!(Grid1D::new(0.0, 10, 0.5).is_err());
        assert!(Grid1D::new(PI, 0, 0.5).is_err());
    }

    #[test]
    fn laplacian_of_quadratic_is_exact() {
        let grid = Grid1D::new(PI, 63, 0.5).unwrap();
        let z = grid.sample(|x| x * (PI - x));
        for v in laplacian(&z, &grid).unwrap() {
            assert_abs_diff_eq!(v, -2.0, epsilon = 1e-9);
        }
        let zero = laplacian(&vec![0.0; 63], &grid).unwrap();
        assert!(zero.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn length_mismatch_is_an_error() {
        let grid = Grid1D::new(PI, 8, 0.5).unwrap();
        assert!(matches!(
            laplacian(&[0.0; 3], &grid),
            Err(Error::DimensionMismatch { expected: 8, actual: 3 })
        ));
        let state = WaveState::zero(&grid);
        assert!(step(&state, &[0.0; 2], &grid).is_err());
    }

    #[test]
    fn zero_state_stays_zero() {
        let grid = Grid1D::new(PI, 16, 0.5).unwrap();
        let next = step(&WaveState::zero(&grid), &[0.0; 16], &grid).unwrap();
        assert!(next.z.iter().chain(&next.w).all(|v| *v == 0.0));
        assert_abs_diff_eq!(next.t, grid.dt());
        assert_eq!(energy(&next, &grid), 0.0);
        assert_eq!(lyapunov(&next, &grid, 1.0, 0.5), 0.0);
    }

    #[test]
    fn initial_energy_of_reference_data() {
        let grid = Grid1D::new(PI, 511, 0.5).unwrap();
        let state = WaveState::from_fns(&grid, f64::sin, |x| (2.0 * x).sin());
        let e = energy(&state, &grid);
        assert!(((e - PI / 2.0) / (PI / 2.0)).abs() < 1e-3, "E(0) = {e}");
    }

    #[test]
    fn lyapunov_reduces_to_energy_for_vanishing_weight() {
        let grid = Grid1D::new(PI, 63, 0.5).unwrap();
        let state = WaveState::from_fns(&grid, f64::sin, |x| (2.0 * x).sin());
        let e = energy(&state, &grid);
        assert_abs_diff_eq!(lyapunov(&state, &grid, 1.0, 1e-12), e, epsilon = 1e-10);
        let v = lyapunov(&state, &grid, 1.0, 0.5);
        assert!(v <= 2.0 * e);
    }

    #[test]
    fn gradient_norm_counts_boundary_edges() {
        let grid = Grid1D::new(3.0, 2, 0.5).unwrap();
        // dx = 1, z = [1, 1]: edges 1, 0, -1
        assert_abs_diff_eq!(grid.gradient_norm_sq(&[1.0, 1.0]), 2.0);
    }
}
