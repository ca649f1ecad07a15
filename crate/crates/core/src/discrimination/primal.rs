//! Projected ascent over PPT measurements.
//!
//! The feasible set for `M₀` is `{0 ⪯ M ⪯ 1} ∩ {M^PT ⪰ 0} ∩ {(1 − M)^PT ⪰ 0}`.
//! The last two sets together are `{0 ⪯ M^PT ⪯ 1}`, the image of the first
//! under the partial transpose, so the projection is Dykstra's method on two
//! sets, each projected by clipping eigenvalues to `[0, 1]`.
//!
//! The objective `η₁ + Tr(Λ M₀)` is linear; there is no optimality
//! certificate, and the value is only a lower bound on the PPT optimum.

use super::{SolveParams, Stall, TwoOutcomeMeasurement};
use crate::ensemble::TwoStateEnsemble;
use crate::error::Result;
use crate::operator::BipartiteOperator;

#[derive(Clone, Debug)]
pub struct PrimalSolution {
    pub measurement: TwoOutcomeMeasurement,
    /// `η₁ + Tr(Λ·M₀)` for the returned measurement.
    pub value: f64,
    pub iterations: usize,
    /// Outer stopping rule met before the cap.
    pub converged: bool,
    /// Every inner projection met its tolerance.
    pub projection_converged: bool,
    /// Weight of `1/2` mixed in at the end to remove residual infeasibility.
    pub repair_weight: f64,
}

fn clip_unit(x: &BipartiteOperator) -> Result<BipartiteOperator> {
    let spec = x.eig()?;
    let m = spec.apply(|l| l.clamp(0.0, 1.0));
    Ok(BipartiteOperator::from_parts_hermitized(x.factors().to_vec(), m))
}

fn clip_unit_pt(x: &BipartiteOperator) -> Result<BipartiteOperator> {
    Ok(clip_unit(&x.partial_transpose())?.partial_transpose())
}

/// Dykstra projection onto `{0 ⪯ M ⪯ 1} ∩ {0 ⪯ M^PT ⪯ 1}`.
///
/// `(p, q)` are the correction terms of the two sets. Dykstra keeps
/// `x + p + q = v` and is block-coordinate ascent on the dual of the projection
/// problem, so it may start from any `(p, q)`; passing the pair left by the
/// previous call warm-starts a nearby projection.
fn project_ppt_box(
    v: &BipartiteOperator,
    corr: &mut (BipartiteOperator, BipartiteOperator),
    cap: usize,
    tol: f64,
) -> Result<(BipartiteOperator, bool)> {
    let (p, q) = corr;
    let mut x = &(v - &*p) - &*q;
    for _ in 0..cap {
        let xp = &x + &*p;
        let y = clip_unit(&xp)?;
        *p = &xp - &y;
        let yq = &y + &*q;
        let next = clip_unit_pt(&yq)?;
        *q = &yq - &next;
        let change = next.max_abs_diff(&x);
        let gap = next.max_abs_diff(&y);
        x = next;
        if change < tol && gap < tol {
            return Ok((x, true));
        }
    }
    Ok((x, false))
}

/// Mixes in `1/2` just enough to make all four PPT conditions hold.
fn repair(m0: BipartiteOperator) -> Result<(TwoOutcomeMeasurement, f64)> {
    let meas = TwoOutcomeMeasurement::from_m0(m0);
    let worst = meas.min_ppt_eigenvalue()?;
    if worst >= 0.0 {
        return Ok((meas, 0.0));
    }
    // (1−s)·λ + s/2 ≥ 0 for λ ≥ worst; a little margin absorbs rounding
    let eps = -worst * (1.0 + 1e-6) + 1e-15;
    let s = 2.0 * eps / (1.0 + 2.0 * eps);
    let half = meas.m0.identity_like().scale(0.5);
    let mixed = &meas.m0.scale(1.0 - s) + &half.scale(s);
    Ok((TwoOutcomeMeasurement::from_m0(mixed), s))
}

/// Maximizes `η₀Tr(ρ₀M₀) + η₁Tr(ρ₁M₁)` over PPT measurements by projected
/// ascent `M₀ ← Π(M₀ + step·Λ)`, starting from `M₀ = 1/2`.
pub fn primal_ppt_ascent(e: &TwoStateEnsemble, p: &SolveParams) -> Result<PrimalSolution> {
    p.validate()?;
    let lam = e.lambda();
    let objective = |m0: &BipartiteOperator| e.eta1() + lam.trace_with(m0);
    let mut m0 = lam.identity_like().scale(0.5);
    let norm = lam.op_norm()?;
    if norm == 0.0 {
        let measurement = TwoOutcomeMeasurement::from_m0(m0);
        let value = measurement.success_probability(e);
        return Ok(PrimalSolution {
            measurement,
            value,
            iterations: 0,
            converged: true,
            projection_converged: true,
            repair_weight: 0.0,
        });
    }
    let step = p.step.unwrap_or(1.0 / norm);
    let mut corr = (lam.zeros_like(), lam.zeros_like());
    let mut stall = Stall::new();
    let mut projection_converged = true;
    let mut converged = false;
    let mut iterations = 0;

    for k in 1..=p.max_iters {
        iterations = k;
        let target = &m0 + &lam.scale(step);
        let (next, ok) = project_ppt_box(&target, &mut corr, p.inner_iters, p.tol_residual)?;
        projection_converged &= ok;
        m0 = next;
        if stall.push(objective(&m0), p.tol_objective) {
            converged = true;
            break;
        }
    }

    let (measurement, repair_weight) = repair(m0)?;
    let value = e.eta1() + lam.trace_with(&measurement.m0);
    Ok(PrimalSolution {
        measurement,
        value,
        iterations,
        converged,
        projection_converged,
        repair_weight,
    })
}
