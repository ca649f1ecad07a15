//! Monte-Carlo simulation of the one-bit hiding protocol.
//!
//! The hider draws `b⃗ ∈ Z₂^L` with `P(b_l = i) = η_i`, prepares `ρ_{b_1}⊗…⊗ρ_{b_L}`
//! and broadcasts `z = x ⊕ ω₂(b⃗)`. Decoders measure copy by copy, so nothing
//! of size `L` is ever materialized.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::bound_series;
use crate::ensemble::TwoStateEnsemble;
use crate::error::{Error, Result};
use crate::operator::{kron_vec, BipartiteOperator, CMatrix, ZERO_EIGEN_REL};

/// `Tr(ρ₀ρ₁)` above this makes the global decoder refuse the ensemble.
pub const ORTHOGONALITY_TOL: f64 = 1e-10;
/// Tolerance on `U†U = 1` for adversary bases.
pub const UNITARY_TOL: f64 = 1e-10;
/// Born probabilities this close to 0 or 1 are snapped.
const SNAP: f64 = 1e-12;
/// Posterior biases smaller than this count as ties.
const DELTA_ZERO: f64 = 1e-12;
/// Largest `m` accepted by [`run_sim`] (`L = 3^m` copies per trial).
pub const MAX_SIM_M: u32 = 12;

pub fn parity(bits: &[u8]) -> u8 {
    bits.iter().fold(0, |acc, b| acc ^ (b & 1))
}

/// One run of the hider: the secret, the sampled labels and the broadcast bit.
#[derive(Clone, Debug)]
pub struct HidingInstance<'a> {
    pub base: &'a TwoStateEnsemble,
    pub secret_bit: u8,
    pub string: Vec<u8>,
    pub broadcast: u8,
}

impl HidingInstance<'_> {
    pub fn copies(&self) -> usize {
        self.string.len()
    }

    pub fn parity(&self) -> u8 {
        parity(&self.string)
    }

    pub fn is_consistent(&self) -> bool {
        self.broadcast ^ self.parity() == self.secret_bit
    }
}

pub fn hide<'a, R: Rng + ?Sized>(
    base: &'a TwoStateEnsemble,
    copies: usize,
    secret_bit: u8,
    rng: &mut R,
) -> HidingInstance<'a> {
    let string: Vec<u8> = (0..copies)
        .map(|_| u8::from(rng.random::<f64>() >= base.eta0()))
        .collect();
    let broadcast = (secret_bit & 1) ^ parity(&string);
    HidingInstance { base, secret_bit: secret_bit & 1, string, broadcast }
}

fn snap(p: f64) -> f64 {
    let p = p.clamp(0.0, 1.0);
    if p < SNAP {
        0.0
    } else if p > 1.0 - SNAP {
        1.0
    } else {
        p
    }
}

/// Projective measurement `{P, 1 − P}` with `P` the support projector of `ρ₀`.
#[derive(Clone, Debug)]
pub struct GlobalDecoder {
    /// `Tr(ρ_i P)` for `i = 0, 1`.
    hit: [f64; 2],
}

impl GlobalDecoder {
    pub fn new(base: &TwoStateEnsemble) -> Result<Self> {
        let overlap = base.overlap();
        if overlap > ORTHOGONALITY_TOL {
            return Err(Error::NotOrthogonal(overlap));
        }
        let spec = base.rho0().eig()?;
        let cutoff = ZERO_EIGEN_REL * spec.max_abs();
        let p = spec.apply(|l| if l > cutoff { 1.0 } else { 0.0 });
        let proj = BipartiteOperator::with_factors(base.rho0().factors().to_vec(), p)?;
        Ok(Self {
            hit: [snap(base.rho0().trace_with(&proj)), snap(base.rho1().trace_with(&proj))],
        })
    }

    /// Samples the outcome for one copy prepared in `ρ_label`; outcome 0 means `ρ₀`.
    pub fn measure<R: Rng + ?Sized>(&self, label: u8, rng: &mut R) -> u8 {
        u8::from(rng.random::<f64>() >= self.hit[label as usize])
    }
}

/// Measures every copy and returns `z ⊕ ω₂(outcomes)`.
pub fn global_decode<R: Rng + ?Sized>(
    inst: &HidingInstance<'_>,
    dec: &GlobalDecoder,
    rng: &mut R,
) -> u8 {
    let y = inst.string.iter().fold(0, |acc, &b| acc ^ dec.measure(b, rng));
    inst.broadcast ^ y
}

/// Each party measures every copy in a fixed orthonormal basis (the columns of
/// `basis_a`, `basis_b`); the guess is the likelier parity given all outcomes.
#[derive(Clone, Debug)]
pub struct AdversaryStrategy {
    pub basis_a: CMatrix,
    pub basis_b: CMatrix,
}

fn unitary_defect(u: &CMatrix) -> f64 {
    let n = u.nrows();
    (u.adjoint() * u - CMatrix::identity(n, n))
        .iter()
        .fold(0.0, |m, z| m.max(z.norm()))
}

impl AdversaryStrategy {
    pub fn computational(d_a: usize, d_b: usize) -> Self {
        Self {
            basis_a: CMatrix::identity(d_a, d_a),
            basis_b: CMatrix::identity(d_b, d_b),
        }
    }

    pub fn new(basis_a: CMatrix, basis_b: CMatrix) -> Result<Self> {
        for (name, u) in [("A", &basis_a), ("B", &basis_b)] {
            if !u.is_square() {
                return Err(Error::Dimension(format!("basis {name} is not square")));
            }
            let defect = unitary_defect(u);
            if defect > UNITARY_TOL {
                return Err(Error::InvalidParameter(format!(
                    "basis {name} is not orthonormal (defect {defect:.3e})"
                )));
            }
        }
        Ok(Self { basis_a, basis_b })
    }
}

/// Outcome statistics of one copy under a fixed product basis.
#[derive(Clone, Debug)]
pub struct AdversaryDecoder {
    /// Cumulative outcome distribution for each label.
    cumulative: [Vec<f64>; 2],
    /// `P(b=0|k) − P(b=1|k)` per outcome `k`.
    delta: Vec<f64>,
}

impl AdversaryDecoder {
    pub fn new(base: &TwoStateEnsemble, strat: &AdversaryStrategy) -> Result<Self> {
        let (d_a, d_b) = (base.d_a(), base.d_b());
        if strat.basis_a.nrows() != d_a || strat.basis_b.nrows() != d_b || base.rho0().copies() != 1 {
            return Err(Error::Dimension(format!(
                "strategy bases {}x{} do not fit a {d_a}x{d_b} ensemble",
                strat.basis_a.nrows(),
                strat.basis_b.nrows()
            )));
        }
        let mut probs = [Vec::new(), Vec::new()];
        for a in 0..d_a {
            for b in 0..d_b {
                let w = kron_vec(&strat.basis_a.column(a).into(), &strat.basis_b.column(b).into());
                for (i, p) in probs.iter_mut().enumerate() {
                    let rho = base.state(i as u8).matrix();
                    p.push(w.dotc(&(rho * &w)).re.max(0.0));
                }
            }
        }
        let delta = probs[0]
            .iter()
            .zip(&probs[1])
            .map(|(&p0, &p1)| {
                let (w0, w1) = (base.eta0() * p0, base.eta1() * p1);
                let d = if w0 + w1 > 0.0 { (w0 - w1) / (w0 + w1) } else { 0.0 };
                if d.abs() < DELTA_ZERO {
                    0.0
                } else {
                    d
                }
            })
            .collect();
        let cumulative = probs.map(|p| {
            let total: f64 = p.iter().sum();
            let mut acc = 0.0;
            p.iter()
                .map(|x| {
                    acc += x / total;
                    acc
                })
                .collect()
        });
        Ok(Self { cumulative, delta })
    }

    /// Outcome distribution for a copy prepared in `ρ_label`.
    pub fn outcome_probabilities(&self, label: u8) -> Vec<f64> {
        let cdf = &self.cumulative[label as usize];
        let mut prev = 0.0;
        cdf.iter()
            .map(|&c| {
                let p = c - prev;
                prev = c;
                p
            })
            .collect()
    }

    pub fn outcome_bias(&self) -> &[f64] {
        &self.delta
    }

    pub fn sample<R: Rng + ?Sized>(&self, label: u8, rng: &mut R) -> usize {
        let cdf = &self.cumulative[label as usize];
        let u = rng.random::<f64>();
        cdf.iter().position(|&c| u < c).unwrap_or(cdf.len() - 1)
    }
}

/// Guesses parity 0 when `Π_l δ_l ≥ 0`, and returns `z ⊕ guess`.
pub fn adversary_decode<R: Rng + ?Sized>(
    inst: &HidingInstance<'_>,
    dec: &AdversaryDecoder,
    rng: &mut R,
) -> u8 {
    let mut negative = false;
    let mut zero = false;
    for &b in &inst.string {
        let d = dec.delta[dec.sample(b, rng)];
        zero |= d == 0.0;
        negative ^= d < 0.0;
    }
    let guess = u8::from(!zero && negative);
    inst.broadcast ^ guess
}

#[derive(Clone, Debug)]
pub struct SimConfig {
    /// `L = 3^m` copies per trial.
    pub m: u32,
    pub trials: u64,
    pub seed: u64,
    pub adversary: Option<AdversaryStrategy>,
    /// `Tr|H|` of a hiding certificate, used to attach the bound for this `m`.
    pub tr_h: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimReport {
    pub m: u32,
    #[serde(rename = "L")]
    pub copies: u64,
    pub trials: u64,
    pub seed: u64,
    pub global_successes: u64,
    pub global_success: f64,
    pub global_stderr: f64,
    pub adversary_successes: Option<u64>,
    pub adversary_success: Option<f64>,
    pub adversary_stderr: Option<f64>,
    /// Trials whose hidden string had odd parity.
    pub odd_parities: u64,
    /// Trials whose broadcast bit was 1.
    pub broadcast_ones: u64,
    pub bound: Option<f64>,
}

impl SimReport {
    /// `None` without an adversary or a bound.
    pub fn adversary_within_bound(&self, sigmas: f64) -> Option<bool> {
        let (rate, err, bound) = (self.adversary_success?, self.adversary_stderr?, self.bound?);
        Some(rate <= bound + sigmas * err)
    }
}

/// `(p̂, √(p̂(1 − p̂)/n))`.
pub fn binomial_rate(successes: u64, trials: u64) -> (f64, f64) {
    let p = successes as f64 / trials as f64;
    (p, (p * (1.0 - p) / trials as f64).sqrt())
}

/// The RNG for one trial: stream `trial` of the master seed.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

#[derive(Clone, Copy, Default)]
struct Tally {
    global: u64,
    adversary: u64,
    odd: u64,
    ones: u64,
}

impl Tally {
    fn merge(self, o: Self) -> Self {
        Self {
            global: self.global + o.global,
            adversary: self.adversary + o.adversary,
            odd: self.odd + o.odd,
            ones: self.ones + o.ones,
        }
    }
}

/// Runs `trials` independent hiding rounds with uniformly random secrets.
///
/// Each trial draws from its own stream, so the report does not depend on how
/// rayon schedules the work.
pub fn run_sim(base: &TwoStateEnsemble, cfg: &SimConfig) -> Result<SimReport> {
    if cfg.trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    if cfg.m > MAX_SIM_M {
        return Err(Error::InvalidParameter(format!(
            "m = {} exceeds the limit {MAX_SIM_M}",
            cfg.m
        )));
    }
    let copies = 3usize.pow(cfg.m);
    let global = GlobalDecoder::new(base)?;
    let adversary = cfg
        .adversary
        .as_ref()
        .map(|s| AdversaryDecoder::new(base, s))
        .transpose()?;
    let bound = cfg
        .tr_h
        .map(|t| bound_series(t, cfg.m).map(|s| s.rows[cfg.m as usize].bound))
        .transpose()?;

    let tally = (0..cfg.trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(cfg.seed, t);
            let secret = u8::from(rng.random::<bool>());
            let inst = hide(base, copies, secret, &mut rng);
            let mut out = Tally {
                odd: inst.parity() as u64,
                ones: inst.broadcast as u64,
                ..Tally::default()
            };
            out.global = u64::from(global_decode(&inst, &global, &mut rng) == secret);
            if let Some(dec) = &adversary {
                out.adversary = u64::from(adversary_decode(&inst, dec, &mut rng) == secret);
            }
            out
        })
        .reduce(Tally::default, Tally::merge);

    let (global_success, global_stderr) = binomial_rate(tally.global, cfg.trials);
    let adv = adversary.as_ref().map(|_| binomial_rate(tally.adversary, cfg.trials));
    Ok(SimReport {
        m: cfg.m,
        copies: copies as u64,
        trials: cfg.trials,
        seed: cfg.seed,
        global_successes: tally.global,
        global_success,
        global_stderr,
        adversary_successes: adv.map(|_| tally.adversary),
        adversary_success: adv.map(|a| a.0),
        adversary_stderr: adv.map(|a| a.1),
        odd_parities: tally.odd,
        broadcast_ones: tally.ones,
        bound,
    })
}
