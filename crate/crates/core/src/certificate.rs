//! Stability certificate for the event-triggered damped wave equation.
//!
//! The certificate is a 4×4 symmetric matrix `Φ` acting on the quadratic-form
//! variable `ψ = (z, ∂ₜz, e_k, ∇z)`. If `Φ ≺ 0` for positive multipliers
//! `(ε, λ₁, λ₂, γ)` and a rate `δ ≥ 0`, then the Lyapunov functional
//!
//! ```text
//! V = E + (αε/2)‖z‖² + ε⟨z, ∂ₜz⟩
//! ```
//!
//! satisfies `V̇ + 2δV ≤ 0` between events, so `E(t) ≤ K·E(0)·e^{-2δt}`.
//!
//! `Φ` splits as `M₁ + λ₁M₂ + λ₂M₃` where `M₁` is the Lyapunov derivative form,
//! `M₂` encodes the Poincaré inequality and `M₃` the triggering constraint
//! `‖e_k‖² ≤ 2γE`. Feasibility search follows a constructive route: the
//! scalar conditions on `(ε, λ₁, γ̄ = λ₂γ)` are satisfied on a grid, `λ₂` is
//! taken from the closed-form Schur complement bound, then `δ` is raised from
//! zero by bisection.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul};

use nalgebra::{Matrix4, SymmetricEigen};
use serde::Serialize;

use crate::error::{require_non_negative, require_positive, Error, Result};

/// Strict negative-definiteness threshold on the largest eigenvalue.
pub const DEFINITENESS_MARGIN: f64 = 1e-9;

/// Exactly symmetric 4×4 matrix, rows and columns ordered as `(z, ∂ₜz, e_k, ∇z)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SymMatrix4 {
    entries: [[f64; 4]; 4],
}

impl SymMatrix4 {
    pub const ZERO: SymMatrix4 = SymMatrix4 {
        entries: [[0.0; 4]; 4],
    };

    /// Builds from a full row array, rejecting any entry that differs from its transpose.
    pub fn from_rows(entries: [[f64; 4]; 4]) -> Result<Self> {
        for row in 0..4 {
            for col in row + 1..4 {
                if entries[row][col] != entries[col][row] {
                    return Err(Error::Asymmetric { row, col });
                }
            }
        }
        Ok(SymMatrix4 { entries })
    }

    /// Builds from the upper triangle; the lower triangle is mirrored.
    pub fn from_upper(upper: [[f64; 4]; 4]) -> Self {
        let mut entries = upper;
        for row in 0..4 {
            for col in 0..row {
                entries[row][col] = upper[col][row];
            }
        }
        SymMatrix4 { entries }
    }

    pub fn diag(d: [f64; 4]) -> Self {
        let mut entries = [[0.0; 4]; 4];
        for (i, v) in d.into_iter().enumerate() {
            entries[i][i] = v;
        }
        SymMatrix4 { entries }
    }

    pub fn identity() -> Self {
        Self::diag([1.0; 4])
    }

    /// Zero-based entry access.
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.entries[row][col]
    }

    pub fn entries(&self) -> &[[f64; 4]; 4] {
        &self.entries
    }

    pub fn transpose(&self) -> Self {
        let mut entries = [[0.0; 4]; 4];
        for (row, line) in self.entries.iter().enumerate() {
            for (col, v) in line.iter().enumerate() {
                entries[col][row] = *v;
            }
        }
        SymMatrix4 { entries }
    }

    pub fn eigenvalues(&self) -> [f64; 4] {
        let m = Matrix4::from_fn(|r, c| self.entries[r][c]);
        let eig = SymmetricEigen::new(m).eigenvalues;
        let mut out = [eig[0], eig[1], eig[2], eig[3]];
        out.sort_by(f64::total_cmp);
        out
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues()[3]
    }

    /// Attempts `LLᵀ` of `-self - shift·I`; succeeds iff every eigenvalue of
    /// `self` lies strictly below `-shift`.
    pub fn negated_cholesky_succeeds(&self, shift: f64) -> bool {
        let mut a = [[0.0; 4]; 4];
        for (r, line) in a.iter_mut().enumerate() {
            for (c, v) in line.iter_mut().enumerate() {
                *v = -self.entries[r][c];
            }
            line[r] -= shift;
        }
        let mut l = [[0.0; 4]; 4];
        for j in 0..4 {
            let mut pivot = a[j][j];
            for k in 0..j {
                pivot -= l[j][k] * l[j][k];
            }
            if !(pivot > 0.0) {
                return false;
            }
            let d = pivot.sqrt();
            l[j][j] = d;
            for i in j + 1..4 {
                let mut s = a[i][j];
                for k in 0..j {
                    s -= l[i][k] * l[j][k];
                }
                l[i][j] = s / d;
            }
        }
        true
    }
}

impl Add for SymMatrix4 {
    type Output = SymMatrix4;

    fn add(self, rhs: SymMatrix4) -> SymMatrix4 {
        let mut entries = self.entries;
        for (line, other) in entries.iter_mut().zip(rhs.entries.iter()) {
            for (v, o) in line.iter_mut().zip(other.iter()) {
                *v += *o;
            }
        }
        SymMatrix4 { entries }
    }
}

impl Mul<SymMatrix4> for f64 {
    type Output = SymMatrix4;

    fn mul(self, rhs: SymMatrix4) -> SymMatrix4 {
        let mut entries = rhs.entries;
        for line in entries.iter_mut() {
            for v in line.iter_mut() {
                *v *= self;
            }
        }
        SymMatrix4 { entries }
    }
}

impl fmt::Display for SymMatrix4 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for line in &self.entries {
            writeln!(
                f,
                "[{:>12.6} {:>12.6} {:>12.6} {:>12.6}]",
                line[0], line[1], line[2], line[3]
            )?;
        }
        Ok(())
    }
}

/// Parameters of the certificate matrix inequality.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CertificateParams {
    pub alpha: f64,
    pub epsilon: f64,
    pub delta: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub gamma: f64,
    pub c_omega: f64,
}

impl CertificateParams {
    /// The tuple quoted alongside the numerical experiment on `(0, π)`. It is
    /// kept for auditing: its `(1,1)` entry evaluates to `+0.1`.
    pub fn reference_point() -> Self {
        CertificateParams {
            alpha: 1.0,
            epsilon: 0.8,
            delta: 0.25,
            lambda1: 0.1,
            lambda2: 1.0,
            gamma: 0.02,
            c_omega: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        require_positive("alpha", self.alpha)?;
        require_positive("epsilon", self.epsilon)?;
        require_non_negative("delta", self.delta)?;
        require_positive("lambda1", self.lambda1)?;
        require_positive("lambda2", self.lambda2)?;
        require_positive("gamma", self.gamma)?;
        require_positive("c_omega", self.c_omega)?;
        Ok(())
    }

    /// `γ̄ = λ₂γ`.
    pub fn gamma_bar(&self) -> f64 {
        self.lambda2 * self.gamma
    }

    pub fn reduced(&self) -> ReducedParams {
        ReducedParams {
            alpha: self.alpha,
            epsilon: self.epsilon,
            lambda1: self.lambda1,
            lambda2: self.lambda2,
            gamma_bar: self.gamma_bar(),
            c_omega: self.c_omega,
        }
    }

    /// Norm-equivalence constant `C_r = 1 + εC_Ω + εαC_Ω²` in `V ≤ C_r·E`.
    pub fn norm_equivalence_constant(&self) -> f64 {
        norm_equivalence_constant(self.epsilon, self.alpha, self.c_omega)
    }
}

pub fn norm_equivalence_constant(epsilon: f64, alpha: f64, c_omega: f64) -> f64 {
    1.0 + epsilon * c_omega + epsilon * alpha * c_omega * c_omega
}

/// Default Poincaré constant `L/π` on `(0, L)`.
pub fn poincare_constant(length: f64) -> f64 {
    length / std::f64::consts::PI
}

/// Certificate parameters after the change of variables `γ̄ = λ₂γ`; `δ` is
/// supplied separately. Unlike [`CertificateParams`] a zero `γ̄` is allowed.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReducedParams {
    pub alpha: f64,
    pub epsilon: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub gamma_bar: f64,
    pub c_omega: f64,
}

impl ReducedParams {
    /// Recovers `γ = γ̄/λ₂` and attaches `δ`.
    pub fn with_delta(&self, delta: f64) -> CertificateParams {
        CertificateParams {
            alpha: self.alpha,
            epsilon: self.epsilon,
            delta,
            lambda1: self.lambda1,
            lambda2: self.lambda2,
            gamma: self.gamma_bar / self.lambda2,
            c_omega: self.c_omega,
        }
    }

    /// `Φ` in reduced variables. No validation.
    pub fn phi(&self, delta: f64) -> SymMatrix4 {
        let ReducedParams {
            alpha: a,
            epsilon: e,
            lambda1: l1,
            lambda2: l2,
            gamma_bar: gb,
            c_omega: c,
        } = *self;
        // Association mirrors the M₁ + λ₁M₂ + λ₂M₃ sum so recomposition is exact.
        SymMatrix4::from_upper([
            [-l1 + a * e * delta, delta * e, a * e / 2.0, 0.0],
            [0.0, e - a + delta + gb, a / 2.0, 0.0],
            [0.0, 0.0, -l2, 0.0],
            [0.0, 0.0, 0.0, delta - e + l1 * (c * c) + gb],
        ])
    }

    /// `M₀ = -Φ` at `δ = 0`.
    pub fn m0(&self) -> SymMatrix4 {
        -1.0 * self.phi(0.0)
    }
}

/// The rate-dependent part of `Φ = -M₀ + δ·P`.
///
/// `P` is positive semidefinite whenever `ε ≤ α`, which makes feasibility
/// monotone in `δ` for frozen multipliers.
pub fn decay_perturbation(alpha: f64, epsilon: f64) -> SymMatrix4 {
    SymMatrix4::from_upper([
        [alpha * epsilon, epsilon, 0.0, 0.0],
        [0.0, 1.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
    ])
}

pub fn build_phi(p: &CertificateParams) -> Result<SymMatrix4> {
    p.validate()?;
    Ok(p.reduced().phi(p.delta))
}

/// Returns `(M₁, M₂, M₃)` with `Φ = M₁ + λ₁M₂ + λ₂M₃`.
pub fn decompose_phi(p: &CertificateParams) -> Result<(SymMatrix4, SymMatrix4, SymMatrix4)> {
    p.validate()?;
    let CertificateParams {
        alpha: a,
        epsilon: e,
        delta: d,
        gamma: g,
        c_omega: c,
        ..
    } = *p;
    let m1 = SymMatrix4::from_upper([
        [a * e * d, d * e, a * e / 2.0, 0.0],
        [0.0, e - a + d, a / 2.0, 0.0],
        [0.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, d - e],
    ]);
    let m2 = SymMatrix4::diag([-1.0, 0.0, 0.0, c * c]);
    let m3 = SymMatrix4::diag([0.0, g, -1.0, g]);
    Ok((m1, m2, m3))
}

/// Recomposes `M₁ + λ₁M₂ + λ₂M₃`.
pub fn recompose(
    m1: &SymMatrix4,
    m2: &SymMatrix4,
    m3: &SymMatrix4,
    lambda1: f64,
    lambda2: f64,
) -> SymMatrix4 {
    *m1 + lambda1 * *m2 + lambda2 * *m3
}

/// `(feasible, margin)`: feasibility from a shifted Cholesky attempt, margin
/// from the eigenvalue solver. Both use [`DEFINITENESS_MARGIN`].
pub fn is_negative_definite(m: &SymMatrix4) -> (bool, f64) {
    let feasible = m.negated_cholesky_succeeds(DEFINITENESS_MARGIN);
    (feasible, m.max_eigenvalue())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Condition {
    pub name: &'static str,
    pub holds: bool,
    /// Positive when the condition holds.
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConditionReport {
    pub conditions: Vec<Condition>,
}

impl ConditionReport {
    pub fn all_hold(&self) -> bool {
        self.conditions.iter().all(|c| c.holds)
    }

    pub fn get(&self, name: &str) -> Option<&Condition> {
        self.conditions.iter().find(|c| c.name == name)
    }
}

/// Minimal `λ₂` for which the 2×2 Schur complement of `M₀` is positive definite:
/// `λ₂ > (α²/4)(ε²/λ₁ + 1/(α − ε − γ̄))`.
pub fn schur_lambda2_bound(alpha: f64, epsilon: f64, lambda1: f64, gamma_bar: f64) -> f64 {
    let velocity = alpha - epsilon - gamma_bar;
    alpha * alpha / 4.0 * (epsilon * epsilon / lambda1 + 1.0 / velocity)
}

/// Schur complement of `M₀`'s leading 3×3 block with respect to its `λ₂` pivot.
pub fn schur_block(p: &ReducedParams) -> [[f64; 2]; 2] {
    let k = p.alpha * p.alpha / (4.0 * p.lambda2);
    let e = p.epsilon;
    [
        [p.lambda1 - k * e * e, -k * e],
        [-k * e, (p.alpha - p.epsilon - p.gamma_bar) - k],
    ]
}

/// Evaluates the scalar conditions that together are equivalent to `M₀ ≻ 0`
/// (that is, `Φ ≺ 0` at `δ = 0`).
pub fn check_zero_decay_conditions(p: &ReducedParams) -> ConditionReport {
    let multipliers = p.lambda1.min(p.lambda2);
    let velocity = p.alpha - p.epsilon - p.gamma_bar;
    let gradient = p.epsilon - p.lambda1 * (p.c_omega * p.c_omega) - p.gamma_bar;
    let conditions = if p.lambda2 > 0.0 {
        let s = schur_block(p);
        // smallest eigenvalue of the 2×2 block
        let mean = 0.5 * (s[0][0] + s[1][1]);
        let half_gap = (0.25 * (s[0][0] - s[1][1]).powi(2) + s[0][1] * s[0][1]).sqrt();
        let schur_min = mean - half_gap;
        let schur_holds = s[0][0] > 0.0 && s[0][0] * s[1][1] - s[0][1] * s[1][0] > 0.0;
        vec![
            Condition {
                name: "multipliers_positive",
                holds: p.lambda1 > 0.0 && p.lambda2 > 0.0,
                residual: multipliers,
            },
            Condition {
                name: "velocity_margin",
                holds: velocity > 0.0,
                residual: velocity,
            },
            Condition {
                name: "gradient_margin",
                holds: gradient > 0.0,
                residual: gradient,
            },
            Condition {
                name: "schur_block",
                holds: schur_holds,
                residual: schur_min,
            },
        ]
    } else {
        vec![
            Condition {
                name: "multipliers_positive",
                holds: false,
                residual: multipliers,
            },
            Condition {
                name: "velocity_margin",
                holds: velocity > 0.0,
                residual: velocity,
            },
            Condition {
                name: "gradient_margin",
                holds: gradient > 0.0,
                residual: gradient,
            },
            Condition {
                name: "schur_block",
                holds: false,
                residual: f64::NEG_INFINITY,
            },
        ]
    };
    ConditionReport { conditions }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchOptions {
    /// Points per axis of the `(ε, γ̄, λ₁)` grid.
    pub grid_points: usize,
    /// Spacing of the `δ` bisection grid.
    pub delta_resolution: f64,
    /// Factor applied to the closed-form minimal `λ₂`.
    pub lambda2_inflation: f64,
    /// When false the search stops at `δ = 0`.
    pub lift_delta: bool,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            grid_points: 12,
            delta_resolution: 1e-4,
            lambda2_inflation: 1.1,
            lift_delta: true,
        }
    }
}

impl SearchOptions {
    fn validate(&self) -> Result<()> {
        if self.grid_points == 0 {
            return Err(Error::invalid("grid_points", "must be at least 1"));
        }
        require_positive("delta_resolution", self.delta_resolution)?;
        if !(self.lambda2_inflation > 1.0) {
            return Err(Error::invalid(
                "lambda2_inflation",
                format!("must exceed 1, got {}", self.lambda2_inflation),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FeasibilityReport {
    pub params: CertificateParams,
    pub max_eigenvalue: f64,
    pub feasible: bool,
    pub search_iterations: usize,
}

#[derive(Serialize)]
struct FlatReport {
    alpha: f64,
    epsilon: f64,
    delta: f64,
    lambda1: f64,
    lambda2: f64,
    gamma: f64,
    c_omega: f64,
    margin: f64,
    feasible: bool,
}

impl FeasibilityReport {
    /// Audits an explicit tuple.
    pub fn audit(params: &CertificateParams) -> Result<Self> {
        let phi = build_phi(params)?;
        let (feasible, margin) = is_negative_definite(&phi);
        Ok(FeasibilityReport {
            params: *params,
            max_eigenvalue: margin,
            feasible,
            search_iterations: 0,
        })
    }

    fn flat(&self) -> FlatReport {
        let p = &self.params;
        FlatReport {
            alpha: p.alpha,
            epsilon: p.epsilon,
            delta: p.delta,
            lambda1: p.lambda1,
            lambda2: p.lambda2,
            gamma: p.gamma,
            c_omega: p.c_omega,
            margin: self.max_eigenvalue,
            feasible: self.feasible,
        }
    }

    pub fn to_key_value(&self) -> String {
        let f = self.flat();
        format!(
            "alpha={}\nepsilon={}\ndelta={}\nlambda1={}\nlambda2={}\ngamma={}\nc_omega={}\nmargin={}\nfeasible={}\n",
            f.alpha, f.epsilon, f.delta, f.lambda1, f.lambda2, f.gamma, f.c_omega, f.margin, f.feasible
        )
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.flat()).expect("flat report serializes")
    }
}

/// Diagonal entries of `Φ` that are non-negative; any one of them rules out `Φ ≺ 0`.
pub fn offending_diagonal(phi: &SymMatrix4) -> Vec<(usize, f64)> {
    (0..4)
        .map(|i| (i, phi.get(i, i)))
        .filter(|(_, v)| *v >= 0.0)
        .collect()
}

#[derive(Clone, Copy, Debug)]
struct Candidate {
    epsilon: f64,
    gamma_bar: f64,
    lambda1: f64,
}

fn log_fractions(n: usize, lo: f64, hi: f64) -> Vec<f64> {
    if n == 1 {
        return vec![(lo * hi).sqrt()];
    }
    let step = (hi / lo).ln() / (n - 1) as f64;
    (0..n).map(|i| hi * (-(i as f64) * step).exp()).collect()
}

/// Candidate `(ε, γ̄, λ₁)` triples satisfying `λ₁C_Ω² + γ̄ < ε < α − γ̄`,
/// starting with a closed-form midpoint and followed by the grid in order.
fn candidates(alpha: f64, c_omega: f64, n: usize) -> Vec<Candidate> {
    let c2 = c_omega * c_omega;
    let mut out = Vec::with_capacity(1 + n * n * n);
    let epsilon = alpha / 2.0;
    let gamma_bar = alpha / 8.0;
    out.push(Candidate {
        epsilon,
        gamma_bar,
        lambda1: (epsilon - gamma_bar) / (2.0 * c2),
    });
    let fractions = log_fractions(n, 1e-3, 0.9);
    for i in 1..=n {
        let epsilon = alpha * i as f64 / (n + 1) as f64;
        for &v in &fractions {
            let gamma_bar = v * epsilon.min(alpha - epsilon);
            for &w in &fractions {
                out.push(Candidate {
                    epsilon,
                    gamma_bar,
                    lambda1: w * (epsilon - gamma_bar) / c2,
                });
            }
        }
    }
    out
}

fn feasible_at(reduced: &ReducedParams, delta: f64) -> bool {
    reduced.phi(delta).negated_cholesky_succeeds(DEFINITENESS_MARGIN)
}

/// Largest `δ = j·resolution` keeping `Φ ≺ 0` for frozen multipliers.
/// Relies on monotonicity in `δ`, which holds because `ε < α` on every candidate.
fn lift_delta(reduced: &ReducedParams, resolution: f64, evaluations: &mut usize) -> f64 {
    let upper = (reduced.alpha - reduced.epsilon - reduced.gamma_bar)
        .min(reduced.epsilon - reduced.lambda1 * reduced.c_omega * reduced.c_omega - reduced.gamma_bar);
    if upper <= 0.0 {
        return 0.0;
    }
    let mut lo: u64 = 0;
    let mut hi: u64 = (upper / resolution).floor() as u64 + 1;
    // invariant: lo feasible, hi infeasible
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        *evaluations += 1;
        if feasible_at(reduced, mid as f64 * resolution) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo as f64 * resolution
}

fn certify_candidate(
    alpha: f64,
    c_omega: f64,
    cand: Candidate,
    opts: &SearchOptions,
    evaluations: &mut usize,
) -> Option<CertificateParams> {
    let lambda2 = opts.lambda2_inflation
        * schur_lambda2_bound(alpha, cand.epsilon, cand.lambda1, cand.gamma_bar);
    let reduced = ReducedParams {
        alpha,
        epsilon: cand.epsilon,
        lambda1: cand.lambda1,
        lambda2,
        gamma_bar: cand.gamma_bar,
        c_omega,
    };
    *evaluations += 1;
    if !lambda2.is_finite() || !feasible_at(&reduced, 0.0) {
        return None;
    }
    let delta = if opts.lift_delta {
        lift_delta(&reduced, opts.delta_resolution, evaluations)
    } else {
        0.0
    };
    Some(reduced.with_delta(delta))
}

fn validate_search_inputs(alpha: f64, c_omega: f64, opts: &SearchOptions) -> Result<()> {
    require_positive("alpha", alpha)?;
    require_positive("c_omega", c_omega)?;
    opts.validate()
}

/// Returns the first candidate in search order that certifies `Φ ≺ 0`,
/// with `δ` lifted to its bisection maximum unless `opts.lift_delta` is off.
pub fn find_feasible(alpha: f64, c_omega: f64, opts: &SearchOptions) -> Result<FeasibilityReport> {
    validate_search_inputs(alpha, c_omega, opts)?;
    let mut evaluations = 0;
    for cand in candidates(alpha, c_omega, opts.grid_points) {
        if let Some(params) = certify_candidate(alpha, c_omega, cand, opts, &mut evaluations) {
            let mut report = FeasibilityReport::audit(&params)?;
            report.search_iterations = evaluations;
            return Ok(report);
        }
    }
    Err(Error::NotFound {
        iterations: evaluations,
    })
}

fn tuple_order(a: &CertificateParams, b: &CertificateParams) -> Ordering {
    b.delta
        .total_cmp(&a.delta)
        .then(a.epsilon.total_cmp(&b.epsilon))
        .then(a.lambda1.total_cmp(&b.lambda1))
        .then(a.lambda2.total_cmp(&b.lambda2))
        .then(a.gamma.total_cmp(&b.gamma))
}

/// Largest certified `δ` over the whole candidate grid. Ties go to the
/// lexicographically smallest `(ε, λ₁, λ₂, γ)`.
pub fn max_decay_rate(
    alpha: f64,
    c_omega: f64,
    opts: &SearchOptions,
) -> Result<(f64, CertificateParams)> {
    validate_search_inputs(alpha, c_omega, opts)?;
    let opts = SearchOptions {
        lift_delta: true,
        ..opts.clone()
    };
    let mut evaluations = 0;
    let best = candidates(alpha, c_omega, opts.grid_points)
        .into_iter()
        .filter_map(|cand| certify_candidate(alpha, c_omega, cand, &opts, &mut evaluations))
        .min_by(tuple_order);
    match best {
        Some(p) => Ok((p.delta, p)),
        None => Err(Error::NotFound {
            iterations: evaluations,
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn params(alpha: f64, epsilon: f64, delta: f64, l1: f64, l2: f64, gamma: f64) -> CertificateParams {
        CertificateParams {
            alpha,
            epsilon,
            delta,
            lambda1: l1,
            lambda2: l2,
            gamma,
            c_omega: 1.0,
        }
    }

    #[test]
    fn reference_point_entries() {
        let phi = build_phi(&CertificateParams::reference_point()).unwrap();
        assert_abs_diff_eq!(phi.get(0, 0), 0.1, epsilon = 1e-15);
        assert_abs_diff_eq!(phi.get(1, 1), 0.07, epsilon = 1e-15);
        assert_abs_diff_eq!(phi.get(2, 2), -1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(phi.get(3, 3), -0.43, epsilon = 1e-15);
        assert_abs_diff_eq!(phi.get(0, 1), 0.2, epsilon = 1e-15);
        assert_abs_diff_eq!(phi.get(0, 2), 0.4, epsilon = 1e-15);
        assert_abs_diff_eq!(phi.get(1, 2), 0.5, epsilon = 1e-15);
        assert_eq!(phi, phi.transpose());
        let (feasible, margin) = is_negative_definite(&phi);
        assert!(!feasible);
        assert!(margin > 0.0);
    }

    #[test]
    fn zero_rate_entries() {
        let phi = build_phi(&params(1.0, 0.5, 0.0, 0.05, 5.0, 0.04)).unwrap();
        assert_abs_diff_eq!(phi.get(0, 0), -0.05, epsilon = 1e-15);
        assert_abs_diff_eq!(phi.get(1, 1), -0.3, epsilon = 1e-15);
        assert_abs_diff_eq!(phi.get(3, 3), -0.25, epsilon = 1e-15);
        assert_eq!(phi.get(0, 1), 0.0);
    }

    #[test]
    fn build_phi_rejects_bad_inputs() {
        assert!(build_phi(&params(0.0, 0.5, 0.0, 0.05, 5.0, 0.04)).is_err());
        assert!(build_phi(&params(1.0, 0.5, -0.1, 0.05, 5.0, 0.04)).is_err());
        assert!(build_phi(&params(1.0, 0.5, 0.0, 0.0, 5.0, 0.04)).is_err());
        assert!(build_phi(&params(1.0, 0.5, 0.0, 0.05, 5.0, 0.0)).is_err());
        assert!(build_phi(&params(1.0, -0.5, 0.0, 0.05, 5.0, 0.04)).is_err());
    }

    #[test]
    fn decomposition_pieces() {
        let p = CertificateParams {
            lambda1: 1.0,
            ..params(1.0, 0.5, 0.1, 1.0, 2.0, 0.02)
        };
        let (m1, m2, m3) = decompose_phi(&p).unwrap();
        assert_eq!(m2, SymMatrix4::diag([-1.0, 0.0, 0.0, 1.0]));
        assert_eq!(m3, SymMatrix4::diag([0.0, 0.02, -1.0, 0.02]));
        assert_eq!(recompose(&m1, &m2, &m3, p.lambda1, p.lambda2), build_phi(&p).unwrap());
    }

    #[test]
    fn definiteness_basics() {
        assert_eq!(is_negative_definite(&(-1.0 * SymMatrix4::identity())), (true, -1.0));
        let (feasible, margin) = is_negative_definite(&SymMatrix4::diag([-1.0, -1.0, -1.0, 0.0]));
        assert!(!feasible);
        assert_abs_diff_eq!(margin, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn asymmetric_rows_rejected() {
        let mut rows = [[0.0; 4]; 4];
        rows[0][1] = 1.0;
        assert!(matches!(
            SymMatrix4::from_rows(rows),
            Err(Error::Asymmetric { row: 0, col: 1 })
        ));
    }

    #[test]
    fn zero_decay_conditions_examples() {
        let good = ReducedParams {
            alpha: 1.0,
            epsilon: 0.5,
            lambda1: 0.05,
            lambda2: 5.0,
            gamma_bar: 0.2,
            c_omega: 1.0,
        };
        let report = check_zero_decay_conditions(&good);
        assert!(report.all_hold(), "{report:?}");
        let s = schur_block(&good);
        assert_abs_diff_eq!(s[0][0], 0.0375, epsilon = 1e-15);
        assert_abs_diff_eq!(s[0][1], -0.025, epsilon = 1e-15);
        assert_abs_diff_eq!(s[1][1], 0.25, epsilon = 1e-15);

        let too_large = ReducedParams {
            epsilon: 1.2,
            gamma_bar: 0.0,
            ..good
        };
        assert!(!check_zero_decay_conditions(&too_large).get("velocity_margin").unwrap().holds);

        let too_small = ReducedParams {
            epsilon: 0.05,
            gamma_bar: 0.0,
            lambda1: 0.1,
            ..good
        };
        assert!(!check_zero_decay_conditions(&too_small).get("gradient_margin").unwrap().holds);
    }

    #[test]
    fn search_finds_certificate() {
        let report = find_feasible(1.0, 1.0, &SearchOptions::default()).unwrap();
        assert!(report.feasible);
        assert!(report.max_eigenvalue < -DEFINITENESS_MARGIN);
        assert!(report.params.delta > 0.0);
        assert!(report.search_iterations > 0);
    }

    #[test]
    fn search_without_lift_stays_at_zero_rate() {
        let opts = SearchOptions {
            lift_delta: false,
            ..SearchOptions::default()
        };
        let report = find_feasible(1.0, 1.0, &opts).unwrap();
        assert!(report.feasible);
        assert_eq!(report.params.delta, 0.0);
        let phi = build_phi(&report.params).unwrap();
        assert_eq!(phi.get(0, 0), -report.params.lambda1);
    }

    #[test]
    fn search_rejects_non_positive_alpha() {
        let err = find_feasible(0.0, 1.0, &SearchOptions::default()).unwrap_err();
        assert!(matches!(err, Error::InvalidInput { field: "alpha", .. }));
        assert!(max_decay_rate(-1.0, 1.0, &SearchOptions::default()).is_err());
    }

    #[test]
    fn max_rate_dominates_first_feasible() {
        let opts = SearchOptions::default();
        let first = find_feasible(1.0, 1.0, &opts).unwrap();
        let (delta_star, best) = max_decay_rate(1.0, 1.0, &opts).unwrap();
        assert!(delta_star >= first.params.delta);
        assert_eq!(best.delta, delta_star);
        assert!(FeasibilityReport::audit(&best).unwrap().feasible);
    }

    #[test]
    fn serialized_report_keys() {
        let report = FeasibilityReport::audit(&CertificateParams::reference_point()).unwrap();
        let kv = report.to_key_value();
        for key in ["alpha", "epsilon", "delta", "lambda1", "lambda2", "gamma", "c_omega", "margin", "feasible"] {
            assert!(kv.contains(&format!("{key}=")), "missing {key}");
        }
        let json: serde_json::Value = serde_json::from_str(&report.to_json()).unwrap();
        assert_eq!(json["feasible"], serde_json::Value::Bool(false));
        assert_eq!(json["lambda2"], 1.0);
    }

    #[test]
    fn offending_entries_of_reference_point() {
        let phi = build_phi(&CertificateParams::reference_point()).unwrap();
        let bad = offending_diagonal(&phi);
        assert_eq!(bad.len(), 2);
        assert_eq!(bad[0].0, 0);
        assert_abs_diff_eq!(bad[0].1, 0.1, epsilon = 1e-15);
    }
}
