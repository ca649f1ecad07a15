//! Minimum-error discrimination of two-state ensembles: the global (Helstrom)
//! optimum, dual certificates `H` with `H + H^PT = Λ` bounding the PPT
//! optimum by `½ + Tr|H|`, and numerical solvers approaching the PPT optimum
//! from above ([`minimize_q`]) and from below ([`primal_ppt_ascent`]).

mod dual;
mod primal;

pub use dual::{minimize_q, PptSolution};
pub use primal::{primal_ppt_ascent, PrimalSolution};

use crate::ensemble::TwoStateEnsemble;
use crate::error::Result;
use crate::operator::BipartiteOperator;

/// Tolerance on `max|Λ − Λ^PT|` (relative to `max(1, max|Λ|)`) below which an
/// ensemble counts as PT-invariant for the solvers.
pub const PT_INVARIANCE_TOL: f64 = 1e-10;

/// `½ + ½·Tr|Λ|`, the optimum over all measurements.
pub fn helstrom(e: &TwoStateEnsemble) -> Result<f64> {
    Ok(0.5 + 0.5 * e.lambda().trace_norm()?)
}

/// Guessing the a-priori likelier state: `max(η₀, η₁)`.
pub fn locc_floor(e: &TwoStateEnsemble) -> f64 {
    e.eta0().max(e.eta1())
}

/// A Hermitian `H` together with its trace norms and the residual of `H + H^PT = Λ`.
#[derive(Clone, Debug)]
pub struct DualCertificate {
    h: BipartiteOperator,
    h_pt: BipartiteOperator,
    tr_abs_h: f64,
    tr_abs_h_pt: f64,
    feasibility_residual: f64,
    tolerance: f64,
}

impl DualCertificate {
    /// Evaluates `h` against the target `Λ`; the certificate is valid when
    /// `max|H + H^PT − Λ| ≤ tol`.
    pub fn certify(h: BipartiteOperator, target: &BipartiteOperator, tol: f64) -> Result<Self> {
        let h_pt = h.partial_transpose();
        let tr_abs_h = h.trace_norm()?;
        let tr_abs_h_pt = h_pt.trace_norm()?;
        let feasibility_residual = (&h + &h_pt).max_abs_diff(target);
        Ok(Self {
            h,
            h_pt,
            tr_abs_h,
            tr_abs_h_pt,
            feasibility_residual,
            tolerance: tol,
        })
    }

    pub fn h(&self) -> &BipartiteOperator {
        &self.h
    }

    pub fn h_pt(&self) -> &BipartiteOperator {
        &self.h_pt
    }

    pub fn tr_abs_h(&self) -> f64 {
        self.tr_abs_h
    }

    pub fn tr_abs_h_pt(&self) -> f64 {
        self.tr_abs_h_pt
    }

    pub fn feasibility_residual(&self) -> f64 {
        self.feasibility_residual
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    pub fn is_valid(&self) -> bool {
        self.feasibility_residual <= self.tolerance
    }

    /// Recomputes the residual against another target.
    pub fn residual_against(&self, target: &BipartiteOperator) -> f64 {
        (&self.h + &self.h_pt).max_abs_diff(target)
    }

    /// `½ + Tr|H|`. An upper bound on the PPT success probability when valid.
    pub fn q_value(&self) -> f64 {
        0.5 + self.tr_abs_h
    }
}

pub fn q_value(cert: &DualCertificate) -> f64 {
    cert.q_value()
}

pub fn check_feasible(
    h: BipartiteOperator,
    e: &TwoStateEnsemble,
    tol: f64,
) -> Result<DualCertificate> {
    DualCertificate::certify(h, &e.lambda(), tol)
}

/// `max|(η₀ρ₀ + H⁻ + H⁻^PT) − (η₁ρ₁ + H⁺ + H⁺^PT)|`, zero for any feasible certificate.
pub fn balance_residual(cert: &DualCertificate, e: &TwoStateEnsemble) -> Result<f64> {
    let j = cert.h().jordan()?;
    let left = &(&e.rho0().scale(e.eta0()) + &j.minus) + &j.minus.partial_transpose();
    let right = &(&e.rho1().scale(e.eta1()) + &j.plus) + &j.plus.partial_transpose();
    Ok(left.max_abs_diff(&right))
}

/// `Tr[(H^± + H^{±PT}) M_i]` for `(±, i)` in the order `(+,0), (+,1), (−,0), (−,1)`.
/// Nonnegative whenever the measurement is PPT.
pub fn pairing_values(cert: &DualCertificate, m: &TwoOutcomeMeasurement) -> Result<[f64; 4]> {
    let j = cert.h().jordan()?;
    let plus = &j.plus + &j.plus.partial_transpose();
    let minus = &j.minus + &j.minus.partial_transpose();
    Ok([
        plus.trace_with(&m.m0),
        plus.trace_with(&m.m1),
        minus.trace_with(&m.m0),
        minus.trace_with(&m.m1),
    ])
}

/// `{M₀, M₁}` with `M₀ + M₁ = 1`; outcome `i` guesses `ρ_i`.
#[derive(Clone, Debug)]
pub struct TwoOutcomeMeasurement {
    pub m0: BipartiteOperator,
    pub m1: BipartiteOperator,
}

impl TwoOutcomeMeasurement {
    pub fn from_m0(m0: BipartiteOperator) -> Self {
        let m1 = &m0.identity_like() - &m0;
        Self { m0, m1 }
    }

    /// `Σ η_i Tr(ρ_i M_i)`.
    pub fn success_probability(&self, e: &TwoStateEnsemble) -> f64 {
        e.eta0() * e.rho0().trace_with(&self.m0) + e.eta1() * e.rho1().trace_with(&self.m1)
    }

    /// Smallest eigenvalue among `M₀, M₁, M₀^PT, M₁^PT`.
    pub fn min_ppt_eigenvalue(&self) -> Result<f64> {
        let mut worst = f64::INFINITY;
        for m in [&self.m0, &self.m1] {
            worst = worst.min(m.min_eigenvalue()?);
            worst = worst.min(m.partial_transpose().min_eigenvalue()?);
        }
        Ok(worst)
    }

    pub fn completeness_residual(&self) -> f64 {
        (&self.m0 + &self.m1).max_abs_diff(&self.m0.identity_like())
    }

    pub fn is_ppt_measurement(&self, tol: f64) -> Result<bool> {
        Ok(self.min_ppt_eigenvalue()? >= -tol && self.completeness_residual() <= tol)
    }
}

/// Solver settings shared by [`minimize_q`] and [`primal_ppt_ascent`].
#[derive(Clone, Debug, PartialEq)]
pub struct SolveParams {
    pub max_iters: usize,
    /// Inner projection cap (primal ascent only).
    pub inner_iters: usize,
    pub tol_residual: f64,
    pub tol_objective: f64,
    /// Step length; `None` picks the default scaled by `1/‖Λ‖_op`.
    pub step: Option<f64>,
    /// Recorded for provenance; both solvers are deterministic.
    pub seed: u64,
}

impl Default for SolveParams {
    fn default() -> Self {
        Self {
            max_iters: 50_000,
            inner_iters: 500,
            tol_residual: 1e-9,
            tol_objective: 1e-8,
            step: None,
            seed: 0,
        }
    }
}

impl SolveParams {
    /// Defaults for the primal ascent: 5 000 outer and 500 projection steps.
    pub fn primal() -> Self {
        Self {
            max_iters: 5_000,
            inner_iters: 500,
            tol_residual: 1e-9,
            tol_objective: 1e-9,
            step: None,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        use crate::error::Error;
        if self.max_iters == 0 || self.inner_iters == 0 {
            return Err(Error::InvalidParameter("iteration caps must be at least 1".into()));
        }
        if !(self.tol_residual > 0.0 && self.tol_objective > 0.0) {
            return Err(Error::InvalidParameter("tolerances must be positive".into()));
        }
        if let Some(s) = self.step {
            if !(s > 0.0 && s.is_finite()) {
                return Err(Error::InvalidParameter(format!("step must be positive, got {s}")));
            }
        }
        Ok(())
    }
}

/// Counts consecutive iterations whose relative objective change stays below a tolerance.
#[derive(Debug)]
pub(crate) struct Stall {
    last: Option<f64>,
    run: usize,
}

pub(crate) const STALL_WINDOW: usize = 25;

impl Stall {
    pub(crate) fn new() -> Self {
        Self { last: None, run: 0 }
    }

    pub(crate) fn push(&mut self, value: f64, tol: f64) -> bool {
        if let Some(prev) = self.last {
            if (value - prev).abs() <= tol * value.abs().max(f64::MIN_POSITIVE) {
                self.run += 1;
            } else {
                self.run = 0;
            }
        }
        self.last = Some(value);
        self.run >= STALL_WINDOW
    }
}
