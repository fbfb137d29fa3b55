#![allow(dead_code, clippy::needless_range_loop)]

use std::f64::consts::PI;

use etm_wave::certificate::{find_feasible, CertificateParams, SearchOptions};
use etm_wave::simulation::{simulate, SimulationOutput, SimulationSetup};
use etm_wave::trigger::ControllerPolicy;
use etm_wave::wave1d::{Grid1D, WaveState};

/// Cyclic Jacobi eigenvalue iteration for a small symmetric matrix. Kept
/// separate from the library's solver so the two can be compared.
pub fn jacobi_eigenvalues(mut a: [[f64; 4]; 4]) -> [f64; 4] {
    for _sweep in 0..100 {
        let off: f64 = (0..4)
            .flat_map(|i| (0..4).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..4 {
            for q in p + 1..4 {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..4 {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..4 {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev = [a[0][0], a[1][1], a[2][2], a[3][3]];
    ev.sort_by(f64::total_cmp);
    ev
}

pub fn jacobi_max(a: [[f64; 4]; 4]) -> f64 {
    jacobi_eigenvalues(a)[3]
}

/// `Φ` written out entry by entry, independent of the library builder.
pub fn phi_by_hand(p: &CertificateParams) -> [[f64; 4]; 4] {
    let (a, e, d, l1, l2, g, c) = (p.alpha, p.epsilon, p.delta, p.lambda1, p.lambda2, p.gamma, p.c_omega);
    [
        [-l1 + a * e * d, d * e, a * e / 2.0, 0.0],
        [d * e, e - a + d + l2 * g, a / 2.0, 0.0],
        [a * e / 2.0, a / 2.0, -l2, 0.0],
        [0.0, 0.0, 0.0, d - e + l1 * c * c + l2 * g],
    ]
}

pub fn reference_grid(n: usize) -> Grid1D {
    Grid1D::new(PI, n, 0.5).unwrap()
}

/// `z₀ = sin x`, `z₁ = sin 2x`.
pub fn reference_state(grid: &Grid1D) -> WaveState {
    WaveState::from_fns(grid, f64::sin, |x| (2.0 * x).sin())
}

pub fn certificate() -> CertificateParams {
    find_feasible(1.0, 1.0, &SearchOptions::default()).unwrap().params
}

pub fn run(grid: Grid1D, policy: ControllerPolicy, horizon: f64, epsilon: Option<f64>) -> SimulationOutput {
    let mut setup = SimulationSetup::new(grid, policy, horizon);
    if let Some(e) = epsilon {
        setup = setup.with_lyapunov(e);
    }
    simulate(&setup, reference_state(&grid)).unwrap()
}

pub fn certified_run(grid: Grid1D, horizon: f64) -> (CertificateParams, SimulationOutput) {
    let cert = certificate();
    let out = run(grid, ControllerPolicy::event_triggered(1.0, cert.gamma), horizon, Some(cert.epsilon));
    (cert, out)
}
