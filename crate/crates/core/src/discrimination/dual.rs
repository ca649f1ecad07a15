//! Trace-norm minimization over the affine set `{H : H + H^PT = Λ}`.
//!
//! For PT-invariant `Λ` the feasible set is `Λ/2 + {K : K^PT = −K}`, and the
//! orthogonal projection onto it is `X ↦ Λ/2 + ½(X − X^PT)`. The solver is a
//! Douglas–Rachford splitting between that projection and the trace-norm
//! proximal map (eigenvalue soft-thresholding).

use super::{DualCertificate, SolveParams, Stall, PT_INVARIANCE_TOL};
use crate::ensemble::TwoStateEnsemble;
use crate::error::{Error, Result};
use crate::operator::BipartiteOperator;

/// Result of [`minimize_q`].
#[derive(Clone, Debug)]
pub struct PptSolution {
    /// Best feasible certificate seen; always a valid upper bound.
    pub certificate: DualCertificate,
    pub iterations: usize,
    /// Stopping rule met before the iteration cap.
    pub converged: bool,
    /// Final `max|x − y|` between the proximal and projected iterates.
    pub splitting_residual: f64,
}

impl PptSolution {
    pub fn value(&self) -> f64 {
        self.certificate.q_value()
    }
}

const DECAY_EVERY: usize = 100;
const DECAY: f64 = 0.999;

fn project(x: &BipartiteOperator, half_lambda: &BipartiteOperator) -> BipartiteOperator {
    half_lambda + &(x - &x.partial_transpose()).scale(0.5)
}

fn soft_threshold(z: &BipartiteOperator, t: f64) -> Result<BipartiteOperator> {
    let spec = z.eig()?;
    let m = spec.apply(|l| l.signum() * (l.abs() - t).max(0.0));
    Ok(BipartiteOperator::from_parts_hermitized(z.factors().to_vec(), m))
}

/// Minimizes `q(H) = ½ + Tr|H|` subject to `H + H^PT = Λ`.
///
/// Requires a PT-invariant ensemble. The returned certificate is exactly
/// feasible up to rounding (it is the projection of a splitting iterate), so
/// its `q` value is an upper bound on the PPT optimum even when the stopping
/// rule was not met.
pub fn minimize_q(e: &TwoStateEnsemble, p: &SolveParams) -> Result<PptSolution> {
    p.validate()?;
    let lam = e.lambda();
    let pt_res = e.pt_residual();
    if pt_res > PT_INVARIANCE_TOL * lam.max_abs().max(1.0) {
        return Err(Error::NotPtInvariant(pt_res));
    }
    let tol = PT_INVARIANCE_TOL.max(pt_res);
    let half = lam.scale(0.5);
    let norm = lam.op_norm()?;
    if norm == 0.0 {
        return Ok(PptSolution {
            certificate: DualCertificate::certify(lam.zeros_like(), &lam, tol)?,
            iterations: 0,
            converged: true,
            splitting_residual: 0.0,
        });
    }

    let mut step = p.step.unwrap_or(0.5 / norm);
    let mut z = half.clone();
    let mut best_h = half.clone();
    let mut best = half.trace_norm()?;
    let mut stall = Stall::new();
    let mut residual = f64::INFINITY;
    let mut converged = false;
    let mut iterations = 0;

    for k in 1..=p.max_iters {
        iterations = k;
        let mut x = soft_threshold(&z, step)?;
        if k % DECAY_EVERY == 0 {
            // keep z − x (the scaled dual) consistent with the new step
            let next = step * DECAY;
            z = &x + &(&z - &x).scale(next / step);
            step = next;
            x = soft_threshold(&z, step)?;
        }
        let reflected = &x.scale(2.0) - &z;
        let y = project(&reflected, &half);
        z = &(&z + &y) - &x;
        residual = (&x - &y).max_abs();

        let candidate = project(&x, &half);
        let objective = candidate.trace_norm()?;
        if objective < best {
            best = objective;
            best_h = candidate;
        }
        if stall.push(objective, p.tol_objective) && residual < p.tol_residual {
            converged = true;
            break;
        }
    }

    Ok(PptSolution {
        certificate: DualCertificate::certify(best_h, &lam, tol)?,
        iterations,
        converged,
        splitting_residual: residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{r, CVector};

    fn basis_pure(i: usize) -> BipartiteOperator {
        let mut v = CVector::zeros(4);
        v[i] = r(1.0);
        BipartiteOperator::pure(2, 2, &v).unwrap()
    }

    #[test]
    fn identical_states_give_one_half() {
        let rho = basis_pure(1);
        let e = TwoStateEnsemble::new(0.5, rho.clone(), rho).unwrap();
        let sol = minimize_q(&e, &SolveParams::default()).unwrap();
        assert_eq!(sol.value(), 0.5);
        assert!(sol.converged);
    }

    #[test]
    fn orthogonal_product_pair_reaches_one() {
        let e = TwoStateEnsemble::new(0.5, basis_pure(0), basis_pure(3)).unwrap();
        let sol = minimize_q(&e, &SolveParams::default()).unwrap();
        assert!((sol.value() - 1.0).abs() < 1e-6, "{}", sol.value());
        assert!(sol.certificate.feasibility_residual() < 1e-12);
    }

    #[test]
    fn refuses_non_pt_invariant_input() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let phi = CVector::from_vec(vec![r(s), r(0.0), r(0.0), r(s)]);
        let e = TwoStateEnsemble::new(
            0.5,
            BipartiteOperator::pure(2, 2, &phi).unwrap(),
            basis_pure(1),
        )
        .unwrap();
        assert!(matches!(
            minimize_q(&e, &SolveParams::default()),
            Err(Error::NotPtInvariant(_))
        ));
    }
}
