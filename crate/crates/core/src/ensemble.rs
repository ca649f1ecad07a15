//! Two-state ensembles `{η₀, ρ₀; η₁, ρ₁}` and their parity-coarse-grained
//! L-fold versions.

use log::warn;

use crate::error::{Error, Result};
use crate::operator::{BipartiteOperator, DEFAULT_MAX_SIDE};

/// `|η₀ + η₁ − 1|` admitted.
pub const PRIOR_SUM_TOL: f64 = 1e-12;
/// `|Tr ρ − 1|` admitted.
pub const TRACE_TOL: f64 = 1e-10;
/// Negative eigenvalues down to this are fine as they are.
pub const PSD_TOL: f64 = 1e-10;
/// Negative eigenvalues down to this are clipped away; anything worse is rejected.
pub const PSD_CLIP_LIMIT: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct TwoStateEnsemble {
    eta0: f64,
    eta1: f64,
    rho0: BipartiteOperator,
    rho1: BipartiteOperator,
}

/// Checks that `rho` is a density operator, clipping tiny negative eigenvalues.
fn admit_density(rho: BipartiteOperator, label: &str) -> Result<BipartiteOperator> {
    let tr = rho.trace();
    if (tr - 1.0).abs() > TRACE_TOL {
        return Err(Error::InvalidEnsemble(format!(
            "{label} has trace {tr}, expected 1"
        )));
    }
    let spec = rho.eig()?;
    let min = spec.eigenvalues.last().copied().unwrap_or(0.0);
    if min >= -PSD_TOL {
        return Ok(rho);
    }
    if min < -PSD_CLIP_LIMIT {
        return Err(Error::InvalidEnsemble(format!(
            "{label} is not positive semidefinite (min eigenvalue {min:.3e})"
        )));
    }
    warn!("{label}: clipping negative eigenvalue {min:.3e} and renormalizing");
    let clipped: f64 = spec.eigenvalues.iter().map(|l| l.max(0.0)).sum();
    let mat = spec.apply(|l| l.max(0.0) / clipped);
    Ok(BipartiteOperator::from_parts_hermitized(
        rho.factors().to_vec(),
        mat,
    ))
}

impl TwoStateEnsemble {
    /// Builds `{eta0, rho0; 1 − eta0, rho1}`.
    pub fn new(eta0: f64, rho0: BipartiteOperator, rho1: BipartiteOperator) -> Result<Self> {
        Self::with_priors(eta0, 1.0 - eta0, rho0, rho1)
    }

    pub fn with_priors(
        eta0: f64,
        eta1: f64,
        rho0: BipartiteOperator,
        rho1: BipartiteOperator,
    ) -> Result<Self> {
        if !(eta0.is_finite() && eta1.is_finite()) || eta0 < 0.0 || eta1 < 0.0 {
            return Err(Error::InvalidEnsemble(format!(
                "priors must be nonnegative, got ({eta0}, {eta1})"
            )));
        }
        if (eta0 + eta1 - 1.0).abs() > PRIOR_SUM_TOL {
            return Err(Error::InvalidEnsemble(format!(
                "priors sum to {}, expected 1",
                eta0 + eta1
            )));
        }
        if !rho0.same_structure(&rho1) {
            return Err(Error::Dimension(format!(
                "states live on different spaces: {:?} vs {:?}",
                rho0.factors(),
                rho1.factors()
            )));
        }
        Ok(Self {
            eta0,
            eta1,
            rho0: admit_density(rho0, "rho0")?,
            rho1: admit_density(rho1, "rho1")?,
        })
    }

    pub fn eta0(&self) -> f64 {
        self.eta0
    }

    pub fn eta1(&self) -> f64 {
        self.eta1
    }

    pub fn rho0(&self) -> &BipartiteOperator {
        &self.rho0
    }

    pub fn rho1(&self) -> &BipartiteOperator {
        &self.rho1
    }

    pub fn prior(&self, i: u8) -> f64 {
        if i == 0 {
            self.eta0
        } else {
            self.eta1
        }
    }

    pub fn state(&self, i: u8) -> &BipartiteOperator {
        if i == 0 {
            &self.rho0
        } else {
            &self.rho1
        }
    }

    pub fn d_a(&self) -> usize {
        self.rho0.d_a()
    }

    pub fn d_b(&self) -> usize {
        self.rho0.d_b()
    }

    /// The ensemble with the roles of the two states exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            eta0: self.eta1,
            eta1: self.eta0,
            rho0: self.rho1.clone(),
            rho1: self.rho0.clone(),
        }
    }

    /// `Λ = η₀ρ₀ − η₁ρ₁`.
    pub fn lambda(&self) -> BipartiteOperator {
        &self.rho0.scale(self.eta0) - &self.rho1.scale(self.eta1)
    }

    /// `η₀ρ₀ + η₁ρ₁`.
    pub fn average(&self) -> BipartiteOperator {
        &self.rho0.scale(self.eta0) + &self.rho1.scale(self.eta1)
    }

    /// `max|Λ − Λ^PT|`.
    pub fn pt_residual(&self) -> f64 {
        let lam = self.lambda();
        lam.max_abs_diff(&lam.partial_transpose())
    }

    pub fn is_pt_invariant(&self, tol: f64) -> bool {
        self.pt_residual() <= tol
    }

    /// `Tr(ρ₀ρ₁)`.
    pub fn overlap(&self) -> f64 {
        self.rho0.trace_with(&self.rho1)
    }

    pub fn are_orthogonal(&self, tol: f64) -> bool {
        self.overlap() <= tol
    }
}

pub fn lambda_op(e: &TwoStateEnsemble) -> BipartiteOperator {
    e.lambda()
}

pub fn is_pt_invariant(e: &TwoStateEnsemble, tol: f64) -> bool {
    e.is_pt_invariant(tol)
}

pub fn are_orthogonal(e: &TwoStateEnsemble, tol: f64) -> bool {
    e.are_orthogonal(tol)
}

/// `Λ^{⊗L}` with its copy structure, so the partial transpose acts on every B factor.
pub fn lambda_fold(e: &TwoStateEnsemble, copies: usize) -> Result<BipartiteOperator> {
    e.lambda()
        .tensor_power(copies, DEFAULT_MAX_SIDE)
        .map_err(|err| fold_error(err, copies))
}

fn fold_error(err: Error, copies: usize) -> Error {
    match err {
        Error::CapExceeded { side, cap } => Error::FoldTooLarge { copies, side, cap },
        other => other,
    }
}

/// Closed-form parity priors `½(1 ± (η₀ − η₁)^L)`.
pub fn parity_priors(e: &TwoStateEnsemble, copies: usize) -> (f64, f64) {
    let bias = (e.eta0 - e.eta1).powi(copies as i32);
    (0.5 * (1.0 + bias), 0.5 * (1.0 - bias))
}

/// The two-state ensemble obtained by guessing the parity of the bit string
/// labelling an L-fold product state.
#[derive(Clone, Debug)]
pub struct ParityEnsemble {
    copies: usize,
    base: TwoStateEnsemble,
    eta0: f64,
    eta1: f64,
    /// `(η₀^(L)ρ₀^(L), η₁^(L)ρ₁^(L))`, present only when materialized.
    weighted: Option<(BipartiteOperator, BipartiteOperator)>,
}

impl ParityEnsemble {
    pub fn priors_only(base: &TwoStateEnsemble, copies: usize) -> Result<Self> {
        if copies == 0 {
            return Err(Error::InvalidParameter("copies must be positive".into()));
        }
        let (eta0, eta1) = parity_priors(base, copies);
        Ok(Self {
            copies,
            base: base.clone(),
            eta0,
            eta1,
            weighted: None,
        })
    }

    /// Materializes `½[(η₀ρ₀+η₁ρ₁)^{⊗L} ± (η₀ρ₀−η₁ρ₁)^{⊗L}]`.
    pub fn materialize(base: &TwoStateEnsemble, copies: usize) -> Result<Self> {
        let mut out = Self::priors_only(base, copies)?;
        let avg = base
            .average()
            .tensor_power(copies, DEFAULT_MAX_SIDE)
            .map_err(|err| fold_error(err, copies))?;
        let lam = lambda_fold(base, copies)?;
        let w0 = (&avg + &lam).scale(0.5);
        let w1 = (&avg - &lam).scale(0.5);
        out.weighted = Some((w0, w1));
        Ok(out)
    }

    pub fn copies(&self) -> usize {
        self.copies
    }

    pub fn base(&self) -> &TwoStateEnsemble {
        &self.base
    }

    pub fn eta0(&self) -> f64 {
        self.eta0
    }

    pub fn eta1(&self) -> f64 {
        self.eta1
    }

    pub fn is_materialized(&self) -> bool {
        self.weighted.is_some()
    }

    pub fn weighted0(&self) -> Option<&BipartiteOperator> {
        self.weighted.as_ref().map(|w| &w.0)
    }

    pub fn weighted1(&self) -> Option<&BipartiteOperator> {
        self.weighted.as_ref().map(|w| &w.1)
    }

    /// `weighted0 − weighted1`, i.e. `Λ^{⊗L}`.
    pub fn lambda(&self) -> Option<BipartiteOperator> {
        self.weighted.as_ref().map(|(w0, w1)| w0 - w1)
    }

    /// Normalizes the weighted parts into an ordinary ensemble.
    pub fn to_ensemble(&self) -> Result<TwoStateEnsemble> {
        let (w0, w1) = self.weighted.as_ref().ok_or_else(|| {
            Error::InvalidParameter("parity ensemble was built in priors-only mode".into())
        })?;
        if self.eta0 <= 0.0 || self.eta1 <= 0.0 {
            return Err(Error::InvalidEnsemble(
                "one parity class has zero probability".into(),
            ));
        }
        TwoStateEnsemble::with_priors(
            self.eta0,
            self.eta1,
            w0.scale(1.0 / self.eta0),
            w1.scale(1.0 / self.eta1),
        )
    }
}

pub fn parity_ensemble(e: &TwoStateEnsemble, copies: usize) -> Result<ParityEnsemble> {
    ParityEnsemble::materialize(e, copies)
}
