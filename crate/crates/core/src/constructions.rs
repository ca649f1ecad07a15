//! Two explicit hiding ensembles: the 3⊗3 ensemble built from four "α" product
//! states and six "β" cross terms, and its generalization to any odd `d ≥ 3`
//! built from sign-flipped uniform vectors `φ_S` and the pair states `ψ±_ij`.
//! Each comes with a closed-form certificate `H`.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num::{BigInt, BigRational};

use crate::discrimination::DualCertificate;
use crate::ensemble::TwoStateEnsemble;
use crate::error::{Error, Result};
use crate::io;
use crate::operator::{c, kron_vec, r, BipartiteOperator, CMatrix, CVector, Factor};

/// Largest odd `d` for which the `d⊗d` ensemble is assembled (`2^(d−1)` terms).
pub const MAX_D: usize = 15;
/// Largest `d` whose certificate trace norms are computed by eigendecomposition.
pub const MAX_D_EIGEN: usize = 9;
/// Feasibility tolerance used when certifying the closed-form operators.
pub const CERT_TOL: f64 = 1e-9;

fn real_ket(v: &[f64]) -> CVector {
    CVector::from_iterator(v.len(), v.iter().map(|&x| r(x)))
}

fn basis(d: usize, i: usize) -> CVector {
    let mut v = CVector::zeros(d);
    v[i] = r(1.0);
    v
}

/// One weighted product projector `w·|a⟩⟨a|⊗|b⟩⟨b|`.
#[derive(Clone, Debug)]
pub struct ProductTerm {
    pub weight: f64,
    pub a: CVector,
    pub b: CVector,
}

/// A state written as an explicit convex mixture of product projectors,
/// which certifies separability.
#[derive(Clone, Debug)]
pub struct ProductMixture {
    pub d_a: usize,
    pub d_b: usize,
    pub terms: Vec<ProductTerm>,
}

impl ProductMixture {
    pub fn total_weight(&self) -> f64 {
        self.terms.iter().map(|t| t.weight).sum()
    }

    /// Largest `| ‖a‖ − 1 |` or `| ‖b‖ − 1 |` over the terms.
    pub fn norm_defect(&self) -> f64 {
        self.terms
            .iter()
            .flat_map(|t| [t.a.norm(), t.b.norm()])
            .fold(0.0, |m, n| m.max((n - 1.0).abs()))
    }

    /// Sums the terms in order.
    pub fn to_operator(&self) -> BipartiteOperator {
        let n = self.d_a * self.d_b;
        let mut mat = CMatrix::zeros(n, n);
        for t in &self.terms {
            let v = kron_vec(&t.a, &t.b);
            mat.gerc(r(t.weight), &v, &v, r(1.0));
        }
        BipartiteOperator::from_parts_hermitized(vec![Factor::new(self.d_a, self.d_b)], mat)
    }
}

/// The four vectors `α_i`, normalized.
pub fn alpha_vectors() -> [CVector; 4] {
    let s = 1.0 / 3f64.sqrt();
    [
        real_ket(&[s, s, s]),
        real_ket(&[s, -s, -s]),
        real_ket(&[s, -s, s]),
        real_ket(&[s, s, -s]),
    ]
}

/// `(β_j^+, β_j^−)` with `β_j^± = (|j⟩ ± |j+1 mod 3⟩)/√2`.
pub fn beta_vectors() -> [(CVector, CVector); 3] {
    let pair = |j: usize| {
        let (a, b) = (basis(3, j), basis(3, (j + 1) % 3));
        ((&a + &b) * r(FRAC_1_SQRT_2), (&a - &b) * r(FRAC_1_SQRT_2))
    };
    [pair(0), pair(1), pair(2)]
}

/// `(ρ₀, ρ₁)` of the 3⊗3 ensemble as product mixtures.
pub fn example1_mixtures() -> (ProductMixture, ProductMixture) {
    let rho0 = ProductMixture {
        d_a: 3,
        d_b: 3,
        terms: alpha_vectors()
            .into_iter()
            .map(|a| ProductTerm { weight: 0.25, a: a.clone(), b: a })
            .collect(),
    };
    let mut terms = Vec::with_capacity(6);
    for (plus, minus) in beta_vectors() {
        let w = 1.0 / 6.0;
        terms.push(ProductTerm { weight: w, a: plus.clone(), b: minus.clone() });
        terms.push(ProductTerm { weight: w, a: minus, b: plus });
    }
    (rho0, ProductMixture { d_a: 3, d_b: 3, terms })
}

/// Equal priors, `ρ₀ = ¼Σ|α_i α_i⟩⟨α_i α_i|`, `ρ₁ = ⅙Σ(|β_j^+ β_j^−⟩⟨·| + |β_j^− β_j^+⟩⟨·|)`.
pub fn example1_ensemble() -> Result<TwoStateEnsemble> {
    let (rho0, rho1) = example1_mixtures();
    TwoStateEnsemble::new(0.5, rho0.to_operator(), rho1.to_operator())
}

/// An orthonormal basis of C³⊗C³: the three twisted maximally entangled
/// vectors `Γ_k = Σ_i ω^{ki}|ii⟩/√3` followed by `Γ_k^±`, where `Γ_0^±`,
/// `Γ_1^±`, `Γ_2^±` are `(|12⟩ ± |21⟩)/√2`, `(|20⟩ ± |02⟩)/√2`, `(|01⟩ ± |10⟩)/√2`.
pub struct GammaBasis {
    pub gamma: [CVector; 3],
    pub plus: [CVector; 3],
    pub minus: [CVector; 3],
}

impl GammaBasis {
    pub fn new() -> Self {
        let idx = |i: usize, j: usize| 3 * i + j;
        let gamma = std::array::from_fn(|k| {
            let mut v = CVector::zeros(9);
            for i in 0..3 {
                let angle = 2.0 * PI * (k * i) as f64 / 3.0;
                v[idx(i, i)] = c(angle.cos(), angle.sin()) / 3f64.sqrt();
            }
            v
        });
        let pairs = [(1, 2), (2, 0), (0, 1)];
        let sym = |sign: f64| {
            std::array::from_fn(|k| {
                let (i, j) = pairs[k];
                let mut v = CVector::zeros(9);
                v[idx(i, j)] = r(FRAC_1_SQRT_2);
                v[idx(j, i)] = r(sign * FRAC_1_SQRT_2);
                v
            })
        };
        Self { gamma, plus: sym(1.0), minus: sym(-1.0) }
    }

    pub fn vectors(&self) -> Vec<&CVector> {
        self.gamma.iter().chain(&self.plus).chain(&self.minus).collect()
    }

    fn projector(v: &CVector) -> BipartiteOperator {
        BipartiteOperator::pure(3, 3, v).expect("9-dimensional basis vector")
    }

    /// `Σ_k g_k|Γ_k⟩⟨Γ_k| + Σ_k p_k|Γ_k^+⟩⟨Γ_k^+| + Σ_k m_k|Γ_k^−⟩⟨Γ_k^−|`.
    pub fn combine(&self, g: [f64; 3], p: [f64; 3], m: [f64; 3]) -> BipartiteOperator {
        let mut acc = BipartiteOperator::zeros(3, 3);
        for (vs, ws) in [(&self.gamma, g), (&self.plus, p), (&self.minus, m)] {
            for (v, w) in vs.iter().zip(ws) {
                if w != 0.0 {
                    acc = &acc + &Self::projector(v).scale(w);
                }
            }
        }
        acc
    }
}

impl Default for GammaBasis {
    fn default() -> Self {
        Self::new()
    }
}

/// `H = Γ_0/6 − 5(Γ_1 + Γ_2)/48 + Σ_k Γ_k^+/72` (projectors).
pub fn example1_h() -> BipartiteOperator {
    let g = GammaBasis::new();
    let e = 1.0 / 72.0;
    g.combine([1.0 / 6.0, -5.0 / 48.0, -5.0 / 48.0], [e; 3], [0.0; 3])
}

/// `H^PT = −(Γ_1 + Γ_2)/48 + Σ_k (7Γ_k^+/72 − Γ_k^−/12)`.
pub fn example1_h_pt_closed_form() -> BipartiteOperator {
    let g = GammaBasis::new();
    g.combine(
        [0.0, -1.0 / 48.0, -1.0 / 48.0],
        [7.0 / 72.0; 3],
        [-1.0 / 12.0; 3],
    )
}

pub fn example1_certificate() -> Result<DualCertificate> {
    let e = example1_ensemble()?;
    DualCertificate::certify(example1_h(), &e.lambda(), CERT_TOL)
}

/// `(Tr|H|, Tr|H^PT|) = (5/12, 7/12)`.
pub fn example1_trace_norms() -> (BigRational, BigRational) {
    (ratio(5, 12), ratio(7, 12))
}

fn ratio(p: i64, q: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

fn check_d(d: usize, cap: usize) -> Result<()> {
    if d < 3 || d.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!("d must be odd and at least 3, got {d}")));
    }
    if d > cap {
        return Err(Error::InvalidParameter(format!("d = {d} exceeds the limit {cap}")));
    }
    Ok(())
}

/// A subset `S ⊂ {0..d−1}` with `|S| < d/2`, stored as a bitmask.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SubsetSign {
    pub d: usize,
    pub mask: u32,
}

impl SubsetSign {
    /// `μ_S(i)`: −1 on S, +1 elsewhere.
    pub fn mu(&self, i: usize) -> i64 {
        if self.mask >> i & 1 == 1 {
            -1
        } else {
            1
        }
    }

    pub fn len(&self) -> usize {
        self.mask.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.mask == 0
    }

    pub fn contains(&self, i: usize) -> bool {
        self.mask >> i & 1 == 1
    }

    /// `|φ_S⟩ = Σ_i μ_S(i)|i⟩/√d`.
    pub fn phi(&self) -> CVector {
        let s = 1.0 / (self.d as f64).sqrt();
        CVector::from_iterator(self.d, (0..self.d).map(|i| r(self.mu(i) as f64 * s)))
    }
}

/// All subsets with `|S| < d/2`, in increasing bitmask order.
pub fn small_subsets(d: usize) -> Vec<SubsetSign> {
    (0u32..1 << d)
        .filter(|m| 2 * (m.count_ones() as usize) < d)
        .map(|mask| SubsetSign { d, mask })
        .collect()
}

/// `(ψ_ij^+, ψ_ij^−)` for `i < j`, in lexicographic order of `(i, j)`.
pub fn pair_vectors(d: usize) -> Vec<((usize, usize), CVector, CVector)> {
    let mut out = Vec::with_capacity(d * (d - 1) / 2);
    for i in 0..d {
        for j in (i + 1)..d {
            let (a, b) = (basis(d, i), basis(d, j));
            out.push((
                (i, j),
                (&a + &b) * r(FRAC_1_SQRT_2),
                (&a - &b) * r(FRAC_1_SQRT_2),
            ));
        }
    }
    out
}

pub fn exampled_mixtures(d: usize) -> Result<(ProductMixture, ProductMixture)> {
    check_d(d, MAX_D)?;
    let subsets = small_subsets(d);
    let w0 = 1.0 / subsets.len() as f64;
    let rho0 = ProductMixture {
        d_a: d,
        d_b: d,
        terms: subsets
            .iter()
            .map(|s| {
                let v = s.phi();
                ProductTerm { weight: w0, a: v.clone(), b: v }
            })
            .collect(),
    };
    let w1 = 1.0 / (d * (d - 1)) as f64;
    let mut terms = Vec::with_capacity(d * (d - 1));
    for (_, plus, minus) in pair_vectors(d) {
        terms.push(ProductTerm { weight: w1, a: plus.clone(), b: minus.clone() });
        terms.push(ProductTerm { weight: w1, a: minus, b: plus });
    }
    Ok((rho0, ProductMixture { d_a: d, d_b: d, terms }))
}

/// Equal priors, `ρ₀` uniform over `|φ_S φ_S⟩`, `ρ₁` uniform over `|ψ^± ψ^∓⟩`.
pub fn exampled_ensemble(d: usize) -> Result<TwoStateEnsemble> {
    let (rho0, rho1) = exampled_mixtures(d)?;
    TwoStateEnsemble::new(0.5, rho0.to_operator(), rho1.to_operator())
}

/// Projectors on `C^d⊗C^d`: `Π` onto span{|ii⟩}, `Φ` onto `Σ|ii⟩/√d`, and
/// `Ψ^±` onto the symmetric / antisymmetric off-diagonal pair states.
#[derive(Clone, Debug)]
pub struct DOperators {
    pub d: usize,
    pub pi: BipartiteOperator,
    pub phi: BipartiteOperator,
    pub psi_plus: BipartiteOperator,
    pub psi_minus: BipartiteOperator,
}

/// Residuals of the partial-transpose identities, in the order
/// `Π`, `Φ`, `Ψ^+`, `Ψ^−`.
#[derive(Clone, Debug, PartialEq)]
pub struct PtIdentityReport {
    pub d: usize,
    pub residuals: [f64; 4],
}

impl PtIdentityReport {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().fold(0.0, |m, &x| m.max(x))
    }
}

impl DOperators {
    pub fn new(d: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::InvalidParameter(format!("d must be at least 2, got {d}")));
        }
        let n = d * d;
        let mut pi = CMatrix::zeros(n, n);
        let mut phi = CMatrix::zeros(n, n);
        let mut psi_plus = CMatrix::zeros(n, n);
        let mut psi_minus = CMatrix::zeros(n, n);
        for i in 0..d {
            pi[(i * d + i, i * d + i)] = r(1.0);
            for j in 0..d {
                phi[(i * d + i, j * d + j)] = r(1.0 / d as f64);
                if i != j {
                    let (ij, ji) = (i * d + j, j * d + i);
                    psi_plus[(ij, ij)] = r(0.5);
                    psi_plus[(ij, ji)] = r(0.5);
                    psi_minus[(ij, ij)] = r(0.5);
                    psi_minus[(ij, ji)] = r(-0.5);
                }
            }
        }
        let op = |m| BipartiteOperator::new(d, d, m);
        Ok(Self {
            d,
            pi: op(pi)?,
            phi: op(phi)?,
            psi_plus: op(psi_plus)?,
            psi_minus: op(psi_minus)?,
        })
    }

    /// Checks `Π^PT = Π`, `Φ^PT = (Π + Ψ^+ − Ψ^−)/d` and
    /// `Ψ^{±PT} = ±(d/2)Φ ∓ ½Π + ½(Ψ^+ + Ψ^−)`.
    pub fn pt_identities(&self) -> PtIdentityReport {
        let d = self.d as f64;
        let off = (&self.psi_plus + &self.psi_minus).scale(0.5);
        let phi_pt = (&(&self.pi + &self.psi_plus) - &self.psi_minus).scale(1.0 / d);
        let plus_pt = &(&self.phi.scale(d / 2.0) - &self.pi.scale(0.5)) + &off;
        let minus_pt = &(&self.pi.scale(0.5) - &self.phi.scale(d / 2.0)) + &off;
        PtIdentityReport {
            d: self.d,
            residuals: [
                self.pi.partial_transpose().max_abs_diff(&self.pi),
                self.phi.partial_transpose().max_abs_diff(&phi_pt),
                self.psi_plus.partial_transpose().max_abs_diff(&plus_pt),
                self.psi_minus.partial_transpose().max_abs_diff(&minus_pt),
            ],
        }
    }

    /// Largest residual among `Π² = Π`, `Φ² = Φ`, `(Ψ^±)² = Ψ^±`, `ΠΦ = Φ`,
    /// `Ψ^+Ψ^− = 0` and `Ψ^+ + Ψ^− = 1 − Π`.
    pub fn algebra_residual(&self) -> f64 {
        let (pi, phi) = (self.pi.matrix(), self.phi.matrix());
        let (pp, pm) = (self.psi_plus.matrix(), self.psi_minus.matrix());
        let n = pi.nrows();
        let checks = [
            pi * pi - pi,
            phi * phi - phi,
            pp * pp - pp,
            pm * pm - pm,
            pi * phi - phi,
            pp * pm,
            pp + pm - (CMatrix::identity(n, n) - pi),
        ];
        checks
            .iter()
            .map(|m| m.iter().fold(0.0f64, |acc, z| acc.max(z.norm())))
            .fold(0.0, f64::max)
    }
}

pub fn d_operators(d: usize) -> Result<DOperators> {
    DOperators::new(d)
}

/// Residuals of `η₀ρ₀ = Φ/(2d) + Ψ^+/d²` and
/// `η₁ρ₁ = (Π − Φ)/(4(d−1)) + Ψ^−/(2d(d−1))` against the subset-by-subset sums.
#[derive(Clone, Debug, PartialEq)]
pub struct DecompositionReport {
    pub d: usize,
    pub subsets: usize,
    pub residual0: f64,
    pub residual1: f64,
}

pub fn verify_decomposition(d: usize) -> Result<DecompositionReport> {
    let e = exampled_ensemble(d)?;
    let ops = DOperators::new(d)?;
    let df = d as f64;
    let want0 = &ops.phi.scale(1.0 / (2.0 * df)) + &ops.psi_plus.scale(1.0 / (df * df));
    let want1 = &(&ops.pi - &ops.phi).scale(1.0 / (4.0 * (df - 1.0)))
        + &ops.psi_minus.scale(1.0 / (2.0 * df * (df - 1.0)));
    Ok(DecompositionReport {
        d,
        subsets: small_subsets(d).len(),
        residual0: e.rho0().scale(e.eta0()).max_abs_diff(&want0),
        residual1: e.rho1().scale(e.eta1()).max_abs_diff(&want1),
    })
}

/// Integer sign sums over the small subsets: `Σ_S μ_S(i)μ_S(j)` for `i < j`
/// and `Σ_S μ_S(i)μ_S(j)μ_S(k)μ_S(l)` for `i < j < k < l`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SignSumReport {
    pub d: usize,
    pub subset_count: u64,
    pub pairs_checked: u64,
    pub max_abs_pair_sum: i64,
    pub quads_checked: u64,
    pub max_abs_quad_sum: i64,
}

impl SignSumReport {
    pub fn passed(&self) -> bool {
        self.subset_count == 1u64 << (self.d - 1)
            && self.max_abs_pair_sum == 0
            && self.max_abs_quad_sum == 0
    }
}

pub fn verify_sign_sums(d: usize) -> Result<SignSumReport> {
    check_d(d, MAX_D)?;
    let subsets = small_subsets(d);
    let mu: Vec<Vec<i64>> = subsets.iter().map(|s| (0..d).map(|i| s.mu(i)).collect()).collect();
    let sum = |idx: &[usize]| -> i64 { mu.iter().map(|m| idx.iter().map(|&i| m[i]).product::<i64>()).sum() };

    let mut report = SignSumReport {
        d,
        subset_count: subsets.len() as u64,
        pairs_checked: 0,
        max_abs_pair_sum: 0,
        quads_checked: 0,
        max_abs_quad_sum: 0,
    };
    for i in 0..d {
        for j in (i + 1)..d {
            report.pairs_checked += 1;
            report.max_abs_pair_sum = report.max_abs_pair_sum.max(sum(&[i, j]).abs());
            for k in (j + 1)..d {
                for l in (k + 1)..d {
                    report.quads_checked += 1;
                    report.max_abs_quad_sum = report.max_abs_quad_sum.max(sum(&[i, j, k, l]).abs());
                }
            }
        }
    }
    Ok(report)
}

/// `H = Φ/(2d) − (d+2)/(8d(d−1))·(Π − Φ) + (d−2)/(4d²(d−1))·Ψ^+`.
pub fn exampled_h(d: usize) -> Result<BipartiteOperator> {
    check_d(d, MAX_D)?;
    let ops = DOperators::new(d)?;
    let df = d as f64;
    Ok(&(&ops.phi.scale(1.0 / (2.0 * df))
        - &(&ops.pi - &ops.phi).scale((df + 2.0) / (8.0 * df * (df - 1.0))))
        + &ops.psi_plus.scale((df - 2.0) / (4.0 * df * df * (df - 1.0))))
}

/// `H^PT = (d−2)/(8d(d−1))·(Φ − Π) + (3d−2)/(4d²(d−1))·Ψ^+ − Ψ^−/(2d(d−1))`.
pub fn exampled_h_pt_closed_form(d: usize) -> Result<BipartiteOperator> {
    check_d(d, MAX_D)?;
    let ops = DOperators::new(d)?;
    let df = d as f64;
    Ok(&(&(&ops.phi - &ops.pi).scale((df - 2.0) / (8.0 * df * (df - 1.0)))
        + &ops.psi_plus.scale((3.0 * df - 2.0) / (4.0 * df * df * (df - 1.0))))
        - &ops.psi_minus.scale(1.0 / (2.0 * df * (df - 1.0))))
}

pub fn exampled_certificate(d: usize) -> Result<DualCertificate> {
    check_d(d, MAX_D_EIGEN)?;
    let e = exampled_ensemble(d)?;
    DualCertificate::certify(exampled_h(d)?, &e.lambda(), CERT_TOL)
}

/// `(Tr|H|, Tr|H^PT|) = ((d+2)/(4d), (3d−2)/(4d))`.
pub fn exampled_trace_norms(d: usize) -> (BigRational, BigRational) {
    let d = d as i64;
    (ratio(d + 2, 4 * d), ratio(3 * d - 2, 4 * d))
}

/// A named construction, as selected on the command line.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Construction {
    Example1,
    ExampleD(usize),
}

impl Construction {
    pub fn label(&self) -> String {
        match self {
            Self::Example1 => "example1".into(),
            Self::ExampleD(d) => format!("exampled(d={d})"),
        }
    }

    pub fn ensemble(&self) -> Result<TwoStateEnsemble> {
        match *self {
            Self::Example1 => example1_ensemble(),
            Self::ExampleD(d) => exampled_ensemble(d),
        }
    }

    pub fn certificate(&self) -> Result<DualCertificate> {
        match *self {
            Self::Example1 => example1_certificate(),
            Self::ExampleD(d) => exampled_certificate(d),
        }
    }

    /// Closed-form `H^PT` to compare the computed partial transpose against.
    pub fn h_pt_closed_form(&self) -> Result<BipartiteOperator> {
        match *self {
            Self::Example1 => Ok(example1_h_pt_closed_form()),
            Self::ExampleD(d) => exampled_h_pt_closed_form(d),
        }
    }

    pub fn trace_norms(&self) -> (BigRational, BigRational) {
        match *self {
            Self::Example1 => example1_trace_norms(),
            Self::ExampleD(d) => exampled_trace_norms(d),
        }
    }

    pub fn mixtures(&self) -> Result<(ProductMixture, ProductMixture)> {
        match *self {
            Self::Example1 => Ok(example1_mixtures()),
            Self::ExampleD(d) => exampled_mixtures(d),
        }
    }
}

/// The ensemble as an ensemble JSON document.
pub fn export(c: Construction) -> Result<String> {
    Ok(io::ensemble_to_json(&c.ensemble()?))
}
