//! Scalar bounds on parity ensembles and the certificate lifts behind them.
//!
//! A certificate `H` for `Λ` with `Tr|H| + Tr|H^PT| ≤ 1` lifts to a certificate
//! for `Λ^{⊗3}` whose trace norm is at most `f(Tr|H|)`, `f(x) = x²(3 − 2x)`.
//! Iterating gives `p_PPT(E^(3^m)) ≤ ½ + f^[m](Tr|H|)`.

use num::{BigInt, BigRational, One, ToPrimitive};
use serde::Serialize;

use crate::discrimination::{DualCertificate, PT_INVARIANCE_TOL};
use crate::error::{Error, Result};
use crate::operator::BipartiteOperator;

/// Slack on `Tr|H| + Tr|H^PT| ≤ 1`.
pub const SUM_TOL: f64 = 1e-9;
/// Feasibility tolerance for lifted certificates.
pub const LIFT_TOL: f64 = 1e-8;
/// Largest base side [`lift3`] will fold (9³ = 729).
pub const LIFT3_MAX_BASE_SIDE: usize = 9;
/// Largest `m` for [`bound_series`].
pub const MAX_M: u32 = 40;
pub const DEFAULT_M_MAX: u32 = 12;
/// Exact iterates beyond this get expensive: the denominator of
/// `f^[m](p/q)` has about `3^m·log q` digits.
pub const EXACT_MAX_M: u32 = 8;

pub fn f(x: f64) -> f64 {
    x * x * (3.0 - 2.0 * x)
}

pub fn f_iterate(x: f64, m: u32) -> f64 {
    (0..m).fold(x, |acc, _| f(acc))
}

pub fn f_exact(x: &BigRational) -> BigRational {
    let three = BigRational::from_integer(BigInt::from(3));
    let two = BigRational::from_integer(BigInt::from(2));
    x * x * (three - two * x)
}

pub fn f_iterate_exact(x: &BigRational, m: u32) -> BigRational {
    (0..m).fold(x.clone(), |acc, _| f_exact(&acc))
}

/// `x·(f(x)/x)^m`, the geometric envelope of `f^[m](x)`.
pub fn envelope(x: f64, m: u32) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    x * (f(x) / x).powi(m as i32)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundRow {
    pub m: u32,
    /// `L = 3^m`.
    #[serde(rename = "L")]
    pub copies: u64,
    pub f_m: f64,
    /// `½ + f_m`.
    pub bound: f64,
    pub envelope: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundSeries {
    pub tr_h: f64,
    pub rows: Vec<BoundRow>,
}

impl BoundSeries {
    /// The row for the largest `3^m ≤ copies`. By monotonicity in `L` its bound
    /// also holds at `copies`.
    pub fn at_copies(&self, copies: u64) -> Option<&BoundRow> {
        self.rows.iter().take_while(|r| r.copies <= copies).last()
    }

    pub fn row(&self, m: u32) -> Option<&BoundRow> {
        self.rows.get(m as usize)
    }
}

fn check_scalar(tr_h: f64, m_max: u32) -> Result<()> {
    if !(0.0..=1.0).contains(&tr_h) {
        return Err(Error::InvalidParameter(format!(
            "trace norm must lie in [0, 1], got {tr_h}"
        )));
    }
    if m_max > MAX_M {
        return Err(Error::InvalidParameter(format!(
            "m_max {m_max} exceeds the limit {MAX_M}"
        )));
    }
    Ok(())
}

fn row(m: u32, f_m: f64, tr_h: f64) -> BoundRow {
    BoundRow {
        m,
        copies: 3u64.pow(m),
        f_m,
        bound: 0.5 + f_m,
        envelope: envelope(tr_h, m),
    }
}

/// Rows `m = 0..=m_max` of `½ + f^[m](tr_h)`, in binary floating point.
pub fn bound_series(tr_h: f64, m_max: u32) -> Result<BoundSeries> {
    check_scalar(tr_h, m_max)?;
    let mut rows = Vec::with_capacity(m_max as usize + 1);
    let mut x = tr_h;
    for m in 0..=m_max {
        rows.push(row(m, x, tr_h));
        x = f(x);
    }
    Ok(BoundSeries { tr_h, rows })
}

/// Like [`bound_series`], but iterates in exact rationals for
/// `m ≤ EXACT_MAX_M` and rounds each row once.
pub fn bound_series_exact(tr_h: &BigRational, m_max: u32) -> Result<BoundSeries> {
    let x0 = tr_h
        .to_f64()
        .ok_or_else(|| Error::InvalidParameter("trace norm is not representable".into()))?;
    check_scalar(x0, m_max)?;
    if *tr_h < BigRational::from_integer(BigInt::from(0)) || *tr_h > BigRational::one() {
        return Err(Error::InvalidParameter(format!("trace norm {tr_h} outside [0, 1]")));
    }
    let mut rows = Vec::with_capacity(m_max as usize + 1);
    let mut exact = tr_h.clone();
    let mut x = x0;
    for m in 0..=m_max {
        if m <= EXACT_MAX_M {
            x = exact.to_f64().unwrap_or(0.0);
            if m < EXACT_MAX_M {
                exact = f_exact(&exact);
            }
        }
        rows.push(row(m, x, x0));
        x = f(x);
    }
    Ok(BoundSeries { tr_h: x0, rows })
}

/// A certificate together with the hypotheses the concealment bound needs.
#[derive(Clone, Debug)]
pub struct HidingCertificate {
    pub cert: DualCertificate,
    pub feasible: bool,
    /// `Tr|H| + Tr|H^PT| ≤ 1`.
    pub sum_ok: bool,
    /// `Tr|H| < ½`.
    pub half_ok: bool,
}

impl HidingCertificate {
    pub fn is_hiding(&self) -> bool {
        self.feasible && self.sum_ok && self.half_ok
    }

    /// Why the bound series is not a hiding guarantee, if it is not.
    pub fn failure(&self) -> Option<String> {
        let (h, hp) = (self.cert.tr_abs_h(), self.cert.tr_abs_h_pt());
        if !self.feasible {
            Some(format!(
                "certificate is infeasible: residual {:.3e} exceeds {:.1e}",
                self.cert.feasibility_residual(),
                self.cert.tolerance()
            ))
        } else if !self.sum_ok {
            Some(format!(
                "Tr|H| + Tr|H^PT| = {} exceeds 1, so the three-copy lift does not apply",
                h + hp
            ))
        } else if !self.half_ok {
            Some(format!(
                "Tr|H| = {h} is not below 1/2, so the bound does not tend to 1/2"
            ))
        } else {
            None
        }
    }

    pub fn bound_series(&self, m_max: u32) -> Result<BoundSeries> {
        if let Some(why) = self.failure() {
            return Err(Error::Hypothesis(why));
        }
        bound_series(self.cert.tr_abs_h(), m_max)
    }
}

pub fn validate_hiding(cert: &DualCertificate) -> HidingCertificate {
    let (h, hp) = (cert.tr_abs_h(), cert.tr_abs_h_pt());
    HidingCertificate {
        cert: cert.clone(),
        feasible: cert.is_valid(),
        sum_ok: h + hp <= 1.0 + SUM_TOL,
        half_ok: h < 0.5,
    }
}

fn require_feasible(cert: &DualCertificate, lam: &BipartiteOperator) -> Result<()> {
    if !cert.h().same_structure(lam) {
        return Err(Error::Dimension(format!(
            "certificate on {:?} but target on {:?}",
            cert.h().factors(),
            lam.factors()
        )));
    }
    let res = cert.residual_against(lam);
    if res > cert.tolerance().max(PT_INVARIANCE_TOL) {
        return Err(Error::Hypothesis(format!(
            "certificate is not feasible for the target (residual {res:.3e})"
        )));
    }
    Ok(())
}

/// `H′ = H⊗H⊗H + H^PT⊗H⊗H + H⊗H^PT⊗H + H⊗H⊗H^PT`, certified against `Λ^{⊗3}`.
///
/// Requires `Tr|H| + Tr|H^PT| ≤ 1`; then `Tr|H′| ≤ f(Tr|H|)` and the lifted
/// certificate satisfies the same hypothesis.
pub fn lift3(cert: &DualCertificate, lam: &BipartiteOperator) -> Result<DualCertificate> {
    require_feasible(cert, lam)?;
    let sum = cert.tr_abs_h() + cert.tr_abs_h_pt();
    if sum > 1.0 + SUM_TOL {
        return Err(Error::Hypothesis(format!(
            "Tr|H| + Tr|H^PT| = {sum} exceeds 1"
        )));
    }
    let side = lam.side();
    if side > LIFT3_MAX_BASE_SIDE {
        return Err(Error::CapExceeded {
            side: side.pow(3),
            cap: LIFT3_MAX_BASE_SIDE.pow(3),
        });
    }
    let (h, hp) = (cert.h(), cert.h_pt());
    let hh = h.kron(h)?;
    let mixed = &h.kron(hp)? + &hp.kron(h)?;
    let lifted = &(h + hp).kron(&hh)? + &h.kron(&mixed)?;
    let target = lam.tensor_power(3, LIFT3_MAX_BASE_SIDE.pow(3))?;
    DualCertificate::certify(lifted, &target, LIFT_TOL.max(cert.tolerance()))
}

/// `H′ = ½H⊗Λ + ½Λ⊗H`, taking a certificate for `Λ^{⊗L}` to one for `Λ^{⊗(L+1)}`
/// with `q(H′) ≤ q(H)`.
pub fn lift_step(
    cert: &DualCertificate,
    lam: &BipartiteOperator,
    lam_l: &BipartiteOperator,
) -> Result<DualCertificate> {
    require_feasible(cert, lam_l)?;
    if lam.copies() != 1 || lam_l.factors().iter().any(|f| *f != lam.factors()[0]) {
        return Err(Error::Dimension(
            "the folded target must be a power of the single-copy target".into(),
        ));
    }
    let pt_res = lam.max_abs_diff(&lam.partial_transpose());
    if pt_res > PT_INVARIANCE_TOL * lam.max_abs().max(1.0) {
        return Err(Error::NotPtInvariant(pt_res));
    }
    let lifted = &cert.h().kron(lam)?.scale(0.5) + &lam.kron(cert.h())?.scale(0.5);
    let target = lam_l.kron(lam)?;
    DualCertificate::certify(lifted, &target, LIFT_TOL.max(cert.tolerance()))
}
