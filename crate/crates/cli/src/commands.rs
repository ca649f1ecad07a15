use std::fs;
use std::path::PathBuf;

use num::{BigRational, ToPrimitive};
use serde::Serialize;
use sephide_core::bounds::{self, bound_series_exact, validate_hiding, BoundSeries, HidingCertificate};
use sephide_core::constructions::{self, verify_decomposition, verify_sign_sums, Construction, CERT_TOL};
use sephide_core::discrimination::{
    helstrom, locc_floor, minimize_q, primal_ppt_ascent, DualCertificate, SolveParams, PT_INVARIANCE_TOL,
};
use sephide_core::ensemble::TwoStateEnsemble;
use sephide_core::sim::{run_sim, AdversaryStrategy, SimConfig, SimReport};
use sephide_core::{io, Error};

use crate::report::{fmt_f64, CheckRow, Payload, Provenance, Report, Status};

/// Sampling tripwire: an adversary this many standard errors above the bound fails the run.
pub const TRIPWIRE_SIGMAS: f64 = 4.0;
/// Trace norms must match their exact values to this.
pub const NORM_TOL: f64 = 1e-9;
pub const ORTHOGONAL_TOL: f64 = 1e-12;
/// The primal value may exceed the dual by rounding only.
pub const SANDWICH_SLACK: f64 = 1e-9;
/// Eigenvalue floor for the repaired primal measurement.
pub const PSD_TOL: f64 = 1e-12;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        Self::Core(e)
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Usage(s) => f.write_str(s),
            Self::Core(e) => e.fmt(f),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Usage(_) => 2,
            Self::Core(e) => match e {
                Error::Hypothesis(_) | Error::NotOrthogonal(_) | Error::NotPtInvariant(_) => 1,
                Error::EigenNonConvergence(_) => 3,
                Error::NotHermitian { .. }
                | Error::Dimension(_)
                | Error::CapExceeded { .. }
                | Error::FoldTooLarge { .. }
                | Error::InvalidEnsemble(_)
                | Error::InvalidParameter(_)
                | Error::Parse(_) => 2,
            },
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Where an ensemble comes from.
pub enum Source {
    Built(Construction),
    File { path: PathBuf, bytes: Vec<u8> },
}

impl Source {
    pub fn read(path: PathBuf) -> CliResult<Self> {
        let bytes = fs::read(&path)
            .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
        Ok(Self::File { path, bytes })
    }

    pub fn label(&self) -> String {
        match self {
            Self::Built(c) => c.label(),
            Self::File { path, .. } => path.display().to_string(),
        }
    }

    pub fn provenance(&self, seed: u64) -> Provenance {
        match self {
            Self::Built(c) => Provenance::new(seed, c.label(), c.label().as_bytes()),
            Self::File { path, bytes } => Provenance::new(seed, path.display().to_string(), bytes),
        }
    }

    pub fn ensemble(&self) -> CliResult<TwoStateEnsemble> {
        match self {
            Self::Built(c) => Ok(c.ensemble()?),
            Self::File { bytes, .. } => {
                let text = std::str::from_utf8(bytes)
                    .map_err(|e| CliError::Core(Error::Parse(e.to_string())))?;
                Ok(io::parse_ensemble(text)?)
            }
        }
    }
}

fn ratio_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

fn hiding_checks(h: &HidingCertificate) -> Vec<CheckRow> {
    let c = &h.cert;
    vec![
        CheckRow::at_most("feasibility residual", c.feasibility_residual(), c.tolerance()),
        CheckRow::at_most("Tr|H| + Tr|H^PT|", c.tr_abs_h() + c.tr_abs_h_pt(), 1.0 + bounds::SUM_TOL),
        CheckRow::flag("Tr|H| < 1/2", h.half_ok),
    ]
}

#[derive(Serialize)]
pub struct VerifyResult {
    pub construction: String,
    pub tr_h: String,
    pub tr_h_pt: String,
    pub q_value: f64,
}

impl Payload for VerifyResult {
    fn rows(&self) -> (Vec<&'static str>, Vec<Vec<String>>) {
        (Vec::new(), Vec::new())
    }
}

pub fn verify(c: Construction, seed: u64) -> CliResult<Report<VerifyResult>> {
    let e = c.ensemble()?;
    let cert = c.certificate()?;
    let (th, thp) = c.trace_norms();
    let closed = c.h_pt_closed_form()?;
    let (m0, m1) = c.mixtures()?;

    let mut checks = vec![
        CheckRow::at_most("Tr(rho0 rho1)", e.overlap().abs(), ORTHOGONAL_TOL),
        CheckRow::at_most("PT invariance residual", e.pt_residual(), PT_INVARIANCE_TOL),
        CheckRow::at_most("mixture norm defect", m0.norm_defect().max(m1.norm_defect()), CERT_TOL),
        CheckRow::at_most("feasibility residual", cert.feasibility_residual(), CERT_TOL),
        CheckRow::at_most("H^PT closed form", cert.h_pt().max_abs_diff(&closed), CERT_TOL),
        CheckRow::near("Tr|H|", cert.tr_abs_h(), ratio_f64(&th), NORM_TOL).exact(&th),
        CheckRow::near("Tr|H^PT|", cert.tr_abs_h_pt(), ratio_f64(&thp), NORM_TOL).exact(&thp),
    ];
    let hiding = validate_hiding(&cert);
    checks.extend(hiding_checks(&hiding).into_iter().skip(1));

    if let Construction::ExampleD(d) = c {
        let ops = constructions::d_operators(d)?;
        checks.push(CheckRow::at_most("projector algebra", ops.algebra_residual(), CERT_TOL));
        let pt = ops.pt_identities();
        for (i, r) in pt.residuals.iter().enumerate() {
            checks.push(CheckRow::at_most(format!("PT identity {}", i + 1), *r, CERT_TOL));
        }
        let dec = verify_decomposition(d)?;
        checks.push(CheckRow::at_most("rho0 decomposition", dec.residual0, CERT_TOL));
        checks.push(CheckRow::at_most("rho1 decomposition", dec.residual1, CERT_TOL));
        let signs = verify_sign_sums(d)?;
        checks.push(CheckRow::near("pair sign sums", signs.max_abs_pair_sum as f64, 0.0, 0.0));
        checks.push(CheckRow::near("quad sign sums", signs.max_abs_quad_sum as f64, 0.0, 0.0));
        checks.push(CheckRow::flag("subset count 2^(d-1)", signs.passed()));
    }

    let provenance = Source::Built(c)
        .provenance(seed)
        .tol("orthogonality", ORTHOGONAL_TOL)
        .tol("pt_invariance", PT_INVARIANCE_TOL)
        .tol("certificate", CERT_TOL)
        .tol("trace_norm", NORM_TOL);
    let result = VerifyResult {
        construction: c.label(),
        tr_h: th.to_string(),
        tr_h_pt: thp.to_string(),
        q_value: cert.q_value(),
    };
    Ok(Report::new("verify", provenance, checks, result))
}

#[derive(Serialize)]
pub struct BoundResult {
    pub source: String,
    /// Exact `Tr|H|` when the certificate is a known construction.
    pub tr_h_exact: Option<String>,
    pub solver_converged: Option<bool>,
    pub series: BoundSeries,
}

impl Payload for BoundResult {
    fn rows(&self) -> (Vec<&'static str>, Vec<Vec<String>>) {
        let rows = self
            .series
            .rows
            .iter()
            .map(|r| vec![r.m.to_string(), r.copies.to_string(), fmt_f64(r.f_m), fmt_f64(r.bound), fmt_f64(r.envelope)])
            .collect();
        (vec!["m", "L", "f_m", "bound", "envelope"], rows)
    }
}

fn certificate_for(source: &Source, params: &SolveParams) -> CliResult<(DualCertificate, Option<bool>)> {
    match source {
        Source::Built(c) => Ok((c.certificate()?, None)),
        Source::File { .. } => {
            let sol = minimize_q(&source.ensemble()?, params)?;
            Ok((sol.certificate, Some(sol.converged)))
        }
    }
}

pub fn bound(source: Source, m_max: u32, params: &SolveParams, seed: u64) -> CliResult<Report<BoundResult>> {
    let (cert, converged) = certificate_for(&source, params)?;
    let hiding = validate_hiding(&cert);
    if let Some(why) = hiding.failure() {
        return Err(Error::Hypothesis(format!(
            "{why}; the concealment bound needs a feasible certificate with Tr|H| < 1/2 and Tr|H| + Tr|H^PT| <= 1"
        ))
        .into());
    }
    let mut checks = hiding_checks(&hiding);
    let (series, exact) = match &source {
        Source::Built(c) => {
            let (th, _) = c.trace_norms();
            checks.push(CheckRow::near("Tr|H|", cert.tr_abs_h(), ratio_f64(&th), NORM_TOL).exact(&th));
            (bound_series_exact(&th, m_max)?, Some(th.to_string()))
        }
        Source::File { .. } => (hiding.bound_series(m_max)?, None),
    };
    let provenance = source
        .provenance(seed)
        .tol("certificate", cert.tolerance())
        .tol("sum", bounds::SUM_TOL)
        .tol("solver_residual", params.tol_residual)
        .tol("solver_objective", params.tol_objective);
    let mut report = Report::new(
        "bound",
        provenance,
        checks,
        BoundResult { source: source.label(), tr_h_exact: exact, solver_converged: converged, series },
    );
    if converged == Some(false) {
        report
            .messages
            .push("solver stopped at its iteration cap; the certificate is feasible, so the bound holds".into());
    }
    Ok(report)
}

#[derive(Serialize)]
pub struct PptResult {
    pub dual: f64,
    pub primal: f64,
    pub gap: f64,
    pub helstrom: f64,
    pub locc_floor: f64,
    pub tr_h: f64,
    pub tr_h_pt: f64,
    pub feasibility_residual: f64,
    pub splitting_residual: f64,
    pub dual_iterations: usize,
    pub dual_converged: bool,
    pub primal_iterations: usize,
    pub primal_converged: bool,
    pub projection_converged: bool,
    pub repair_weight: f64,
    pub min_ppt_eigenvalue: f64,
}

impl Payload for PptResult {
    fn rows(&self) -> (Vec<&'static str>, Vec<Vec<String>>) {
        let header = vec![
            "dual", "primal", "gap", "helstrom", "tr_h", "tr_h_pt", "feasibility_residual",
            "dual_iterations", "dual_converged", "primal_iterations", "primal_converged",
        ];
        let row = vec![
            fmt_f64(self.dual),
            fmt_f64(self.primal),
            fmt_f64(self.gap),
            fmt_f64(self.helstrom),
            fmt_f64(self.tr_h),
            fmt_f64(self.tr_h_pt),
            fmt_f64(self.feasibility_residual),
            self.dual_iterations.to_string(),
            self.dual_converged.to_string(),
            self.primal_iterations.to_string(),
            self.primal_converged.to_string(),
        ];
        (header, vec![row])
    }
}

pub fn ppt(
    source: Source,
    dual_params: &SolveParams,
    primal_params: &SolveParams,
    seed: u64,
) -> CliResult<Report<PptResult>> {
    let e = source.ensemble()?;
    let dual = minimize_q(&e, dual_params)?;
    let primal = primal_ppt_ascent(&e, primal_params)?;
    let cert = &dual.certificate;
    let min_eig = primal.measurement.min_ppt_eigenvalue()?;
    let result = PptResult {
        dual: dual.value(),
        primal: primal.value,
        gap: dual.value() - primal.value,
        helstrom: helstrom(&e)?,
        locc_floor: locc_floor(&e),
        tr_h: cert.tr_abs_h(),
        tr_h_pt: cert.tr_abs_h_pt(),
        feasibility_residual: cert.feasibility_residual(),
        splitting_residual: dual.splitting_residual,
        dual_iterations: dual.iterations,
        dual_converged: dual.converged,
        primal_iterations: primal.iterations,
        primal_converged: primal.converged,
        projection_converged: primal.projection_converged,
        repair_weight: primal.repair_weight,
        min_ppt_eigenvalue: min_eig,
    };
    let checks = vec![
        CheckRow::at_most("feasibility residual", cert.feasibility_residual(), cert.tolerance()),
        CheckRow::at_most("PPT measurement negativity", (-min_eig).max(0.0), PSD_TOL),
        CheckRow::at_most("primal - dual", primal.value - dual.value(), SANDWICH_SLACK),
        CheckRow::at_most("primal - helstrom", primal.value - result.helstrom, SANDWICH_SLACK),
    ];
    let provenance = source
        .provenance(seed)
        .tol("dual_residual", dual_params.tol_residual)
        .tol("dual_objective", dual_params.tol_objective)
        .tol("primal_residual", primal_params.tol_residual)
        .tol("primal_objective", primal_params.tol_objective)
        .tol("sandwich_slack", SANDWICH_SLACK)
        .tol("psd", PSD_TOL);
    let mut report = Report::new("ppt", provenance, checks, result);
    if report.status == Status::Pass && !(dual.converged && primal.converged && primal.projection_converged) {
        report.status = Status::Unconverged;
        report.messages.push("a solver reached its iteration cap before meeting its tolerances".into());
    }
    Ok(report)
}

#[derive(Serialize)]
pub struct SimResult {
    #[serde(flatten)]
    pub sim: SimReport,
    pub adversary: Option<&'static str>,
}

impl Payload for SimResult {
    fn rows(&self) -> (Vec<&'static str>, Vec<Vec<String>>) {
        let s = &self.sim;
        let opt = |x: Option<f64>| x.map(fmt_f64).unwrap_or_default();
        let header = vec![
            "m", "L", "trials", "seed", "global_success", "global_stderr", "adversary_success",
            "adversary_stderr", "bound", "odd_parities", "broadcast_ones",
        ];
        let row = vec![
            s.m.to_string(),
            s.copies.to_string(),
            s.trials.to_string(),
            s.seed.to_string(),
            fmt_f64(s.global_success),
            fmt_f64(s.global_stderr),
            opt(s.adversary_success),
            opt(s.adversary_stderr),
            opt(s.bound),
            s.odd_parities.to_string(),
            s.broadcast_ones.to_string(),
        ];
        (header, vec![row])
    }
}

pub fn simulate(
    source: Source,
    m: u32,
    trials: u64,
    adversary: bool,
    params: &SolveParams,
    seed: u64,
) -> CliResult<Report<SimResult>> {
    if trials == 0 {
        return Err(CliError::Usage("--trials must be at least 1".into()));
    }
    let e = source.ensemble()?;
    let mut messages = Vec::new();
    let tr_h = if !adversary {
        None
    } else {
        match &source {
            Source::Built(c) => Some(ratio_f64(&c.trace_norms().0)),
            Source::File { .. } => {
                let (cert, _) = certificate_for(&source, params)?;
                let hiding = validate_hiding(&cert);
                match hiding.failure() {
                    None => Some(cert.tr_abs_h()),
                    Some(why) => {
                        messages.push(format!("no concealment bound: {why}"));
                        None
                    }
                }
            }
        }
    };
    let cfg = SimConfig {
        m,
        trials,
        seed,
        adversary: adversary.then(|| AdversaryStrategy::computational(e.d_a(), e.d_b())),
        tr_h,
    };
    let sim = run_sim(&e, &cfg)?;
    let mut checks = vec![CheckRow::near("global decode success", sim.global_success, 1.0, 0.0)];
    if let (Some(rate), Some(err), Some(b)) = (sim.adversary_success, sim.adversary_stderr, sim.bound) {
        checks.push(CheckRow::at_most(
            "adversary success vs bound + 4 sigma",
            rate,
            b + TRIPWIRE_SIGMAS * err,
        ));
    }
    let provenance = source.provenance(seed).tol("tripwire_sigmas", TRIPWIRE_SIGMAS);
    let result = SimResult { sim, adversary: adversary.then_some("computational") };
    let mut report = Report::new("simulate", provenance, checks, result);
    report.messages = messages;
    Ok(report)
}

pub fn export(c: Construction) -> CliResult<Vec<u8>> {
    let mut s = constructions::export(c)?;
    if !s.ends_with('\n') {
        s.push('\n');
    }
    Ok(s.into_bytes())
}
