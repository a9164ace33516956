//! Large deviations of the pairwise log-likelihood ratio.
//!
//! For two output laws `P = P_{Y|x}` and `P' = P_{Y|x̃}` the per-letter ratio
//! is `L^b = log P_b / P'_b`. The exponent
//! `E(v) = sup_{λ≥0} −log Σ_b P_b e^{−λ L^b} − λ v`
//! governs `P[Σ_i L^{Y_i} ≤ d v]` under `P`, and equals the Sanov minimum
//! `min {D(Q‖P) : E_Q[L] ≤ v}`; [`primal_sanov_oracle`] evaluates the latter
//! by brute force for cross-checking.

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::multiview_dmc::{map_type_partitions, Dmc, EvalConfig, Likelihoods};
use crate::prob_core::{kl_divergence, log_sum_exp, softplus, FiniteDistribution, NeumaierSum};
use crate::search::{maximize_concave_halfline, maximize_unimodal};

/// Largest alphabet accepted by the primal oracle.
pub const ORACLE_MAX_ALPHABET: usize = 4;
/// Default simplex grid resolution of the primal oracle.
pub const DEFAULT_GRID_RESOLUTION: u32 = 2000;
const LAMBDA_CAP: f64 = 1e8;
const LAMBDA_TOL: f64 = 1e-12;
const ZOOM_STEPS: i64 = 20;
const ZOOM_ROUNDS: usize = 3;

/// Letter-wise log-likelihood ratio of `base` against `alt`.
#[derive(Clone, Debug, PartialEq)]
pub struct LlrProfile {
    pub base: FiniteDistribution,
    pub alt: FiniteDistribution,
    /// `+∞` where only `base` has mass, `−∞` where only `alt` has, 0 where
    /// neither has.
    pub llr: Vec<f64>,
}

impl LlrProfile {
    pub fn new(base: FiniteDistribution, alt: FiniteDistribution) -> Result<Self> {
        if base.alphabet_size() != alt.alphabet_size() {
            return Err(Error::AlphabetMismatch(base.alphabet_size(), alt.alphabet_size()));
        }
        let llr = base
            .log_probs()
            .iter()
            .zip(alt.log_probs())
            .map(|(&a, &b)| match (a.is_finite(), b.is_finite()) {
                (true, true) => a - b,
                (true, false) => f64::INFINITY,
                (false, true) => f64::NEG_INFINITY,
                (false, false) => 0.0,
            })
            .collect();
        Ok(LlrProfile { base, alt, llr })
    }

    /// Profile of rows `x` against `x_tilde` of a channel.
    pub fn from_channel(channel: &Dmc, x: usize, x_tilde: usize) -> Result<Self> {
        let k = channel.input_size();
        if x >= k || x_tilde >= k {
            return Err(Error::InvalidParameter(format!("inputs ({x}, {x_tilde}) out of range for {k} inputs")));
        }
        Self::new(channel.row(x).clone(), channel.row(x_tilde).clone())
    }

    pub fn alphabet_size(&self) -> usize {
        self.llr.len()
    }

    /// Letters where both laws have mass.
    fn finite_letters(&self) -> Vec<usize> {
        (0..self.llr.len()).filter(|&b| self.base.prob(b) > 0.0 && self.alt.prob(b) > 0.0).collect()
    }

    /// `min_b L^b` over the support of `base`.
    pub fn min_llr(&self) -> f64 {
        self.base.support().map(|b| self.llr[b]).fold(f64::INFINITY, f64::min)
    }

    /// `max_b L^b` over the support of `base`.
    pub fn max_llr(&self) -> f64 {
        self.base.support().map(|b| self.llr[b]).fold(f64::NEG_INFINITY, f64::max)
    }

    /// `E_base[L] = D(base‖alt)`, possibly `+∞`.
    pub fn mean_llr(&self) -> f64 {
        kl_divergence(&self.base, &self.alt).expect("alphabets checked at construction")
    }

    /// `log Σ_b base_b e^{−λ L^b}` over letters where both laws have mass.
    /// This is the value for every λ > 0 and its limit as λ → 0⁺.
    fn ln_partition_interior(&self, lam: f64) -> f64 {
        let lb = self.base.log_probs();
        log_sum_exp(self.finite_letters().into_iter().map(|b| lb[b] - lam * self.llr[b]))
    }
}

/// The exponential family `Q*_λ ∝ base · e^{−λ L}`.
#[derive(Clone, Debug)]
pub struct TiltedFamily {
    pub profile: LlrProfile,
}

impl TiltedFamily {
    pub fn new(profile: LlrProfile) -> Self {
        TiltedFamily { profile }
    }

    /// `Z(λ) = Σ_b base_b e^{−λ L^b}`. Letters with `L = +∞` drop out for
    /// λ > 0.
    pub fn partition(&self, lam: f64) -> f64 {
        if lam == 0.0 {
            1.0
        } else {
            self.profile.ln_partition_interior(lam).exp()
        }
    }

    /// `Q*_λ`. For λ > 0 its support is the common support of the two laws.
    pub fn tilted(&self, lam: f64) -> Result<FiniteDistribution> {
        if lam == 0.0 {
            return Ok(self.profile.base.clone());
        }
        let lz = self.profile.ln_partition_interior(lam);
        if lz == f64::NEG_INFINITY {
            return Err(Error::Degenerate("tilted family is empty: supports are disjoint".into()));
        }
        let lb = self.profile.base.log_probs();
        let mut w = vec![0.0; self.profile.alphabet_size()];
        for b in self.profile.finite_letters() {
            w[b] = (lb[b] - lam * self.profile.llr[b] - lz).exp();
        }
        FiniteDistribution::from_weights(&w)
    }

    /// `E_{Q*_λ}[L]`.
    pub fn tilted_mean(&self, lam: f64) -> Result<f64> {
        if lam == 0.0 {
            return Ok(self.profile.mean_llr());
        }
        let q = self.tilted(lam)?;
        Ok(q.support().map(|b| q.prob(b) * self.profile.llr[b]).collect::<NeumaierSum>().value())
    }
}

/// `−log Z(λ) − λ v`, continued from λ > 0 to λ = 0.
fn dual_objective(profile: &LlrProfile, v: f64, lam: f64) -> f64 {
    -profile.ln_partition_interior(lam) - lam * v
}

/// `E(v) = sup_{λ≥0} −log Z(λ) − λ v`, or `+∞` when `v` is below every
/// attainable ratio.
pub fn exponent(profile: &LlrProfile, v: f64) -> f64 {
    let min = profile.min_llr();
    if v < min {
        return f64::INFINITY;
    }
    let mean = profile.mean_llr();
    if v >= mean {
        return 0.0;
    }
    if v == min {
        // supremum approached as λ → ∞: all mass on the minimizing letters
        let lb = profile.base.log_probs();
        let on_min = profile.base.support().filter(|&b| profile.llr[b] == min).map(|b| lb[b]);
        return -log_sum_exp(on_min);
    }
    let (_, value) = maximize_concave_halfline(|l| dual_objective(profile, v, l), LAMBDA_CAP, LAMBDA_TOL);
    value.max(0.0)
}

/// The same supremum restricted to `λ ∈ [0, 1]`. Equals [`exponent`] at
/// `v = 0` whenever `alt` is absolutely continuous with respect to `base`.
pub fn exponent_unit_interval(profile: &LlrProfile, v: f64) -> f64 {
    if profile.finite_letters().is_empty() {
        return f64::INFINITY;
    }
    let (_, value) = maximize_unimodal(|l| dual_objective(profile, v, l), 0.0, 1.0, LAMBDA_TOL);
    value.max(0.0)
}

fn divergence(q: &[f64], ln_base: &[f64]) -> f64 {
    q.iter().zip(ln_base).filter(|(p, _)| **p > 0.0).map(|(&p, &lb)| p * (p.ln() - lb)).sum()
}

fn constraint(q: &[f64], llr: &[f64]) -> f64 {
    q.iter().zip(llr).map(|(p, l)| p * l).sum()
}

/// Calls `f` on every composition of `total` into `k` parts whose first part
/// equals `first`.
fn for_each_grid_point<F: FnMut(&[i64])>(k: usize, total: i64, first: i64, f: &mut F) {
    fn rec<F: FnMut(&[i64])>(c: &mut Vec<i64>, k: usize, left: i64, f: &mut F) {
        if c.len() + 1 == k {
            c.push(left);
            f(c);
            c.pop();
            return;
        }
        for a in 0..=left {
            c.push(a);
            rec(c, k, left - a, f);
            c.pop();
        }
    }
    let mut c = vec![first];
    if k == 1 {
        if first == total {
            f(&c);
        }
        return;
    }
    rec(&mut c, k, total - first, f);
}

/// `min {D(Q‖base) : E_Q[L] ≤ v}` over a simplex grid of resolution `R`
/// (`Q_b ∈ {0, 1/R, …, 1}`), followed by three rounds of a local grid around the
/// best point, each five times finer than the last. `base` itself is always a candidate. Returns `+∞`
/// if no candidate is feasible.
pub fn primal_sanov_oracle(profile: &LlrProfile, v: f64, grid_resolution: u32, exec: Exec) -> Result<f64> {
    if profile.alphabet_size() > ORACLE_MAX_ALPHABET {
        return Err(Error::InvalidParameter(format!(
            "primal oracle supports alphabets up to {ORACLE_MAX_ALPHABET}, got {}",
            profile.alphabet_size()
        )));
    }
    if grid_resolution == 0 {
        return Err(Error::InvalidParameter("grid resolution must be positive".into()));
    }
    // Q must avoid letters outside the base support (infinite divergence) and
    // letters with L = +∞ (infinite constraint value).
    let letters = profile.finite_letters();
    let k = letters.len();
    if k == 0 {
        return Ok(f64::INFINITY);
    }
    let lb: Vec<f64> = letters.iter().map(|&b| profile.base.log_probs()[b]).collect();
    let llr: Vec<f64> = letters.iter().map(|&b| profile.llr[b]).collect();
    let feasible = |q: &[f64]| constraint(q, &llr) <= v;

    let mut best: (f64, Vec<f64>) = (f64::INFINITY, vec![]);
    if letters.len() == profile.base.support().count() {
        let q: Vec<f64> = letters.iter().map(|&b| profile.base.prob(b)).collect();
        if feasible(&q) {
            return Ok(0.0);
        }
    }

    let r = grid_resolution as i64;
    let rows = exec.map((0..=r).collect(), |first| {
        let mut local: (f64, Vec<f64>) = (f64::INFINITY, vec![]);
        let mut q = vec![0.0; k];
        for_each_grid_point(k, r, first, &mut |c| {
            for (qi, &ci) in q.iter_mut().zip(c) {
                *qi = ci as f64 / r as f64;
            }
            if feasible(&q) {
                let dv = divergence(&q, &lb);
                if dv < local.0 {
                    local = (dv, q.clone());
                }
            }
        });
        local
    });
    for row in rows {
        if row.0 < best.0 {
            best = row;
        }
    }
    if best.0.is_infinite() {
        return Ok(f64::INFINITY);
    }

    let mut h = 1.0 / r as f64;
    for _ in 0..ZOOM_ROUNDS {
        let step = 2.0 * h / ZOOM_STEPS as f64;
        let center = best.1.clone();
        let offsets: Vec<i64> = (-ZOOM_STEPS..=ZOOM_STEPS).collect();
        let mut idx = vec![0usize; k - 1];
        let mut q = vec![0.0; k];
        loop {
            let mut last = 1.0;
            let mut ok = true;
            for i in 0..k - 1 {
                q[i] = center[i] + offsets[idx[i]] as f64 * step;
                ok &= q[i] >= 0.0;
                last -= q[i];
            }
            q[k - 1] = last;
            if ok && last >= 0.0 && feasible(&q) {
                let dv = divergence(&q, &lb);
                if dv < best.0 {
                    best = (dv, q.clone());
                }
            }
            let mut i = 0;
            while i < k - 1 {
                idx[i] += 1;
                if idx[i] < offsets.len() {
                    break;
                }
                idx[i] = 0;
                i += 1;
            }
            if i == k - 1 {
                break;
            }
        }
        h = step * 2.0;
    }
    Ok(best.0.max(0.0))
}

/// `d·v` for the event of `Γ`: the per-view ratio sum is at most
/// `log c − log(e^z − 1) − log(P(x)/P(x̃))`.
pub fn gamma_llr_threshold(input: &FiniteDistribution, x: usize, x_tilde: usize, z: f64, c: f64) -> f64 {
    c.ln() - z.exp_m1().ln() - (input.log_probs()[x] - input.log_probs()[x_tilde])
}

/// The `z` at which the event of `Γ` reads `Σ_i L^{Y_i} ≤ d v`.
pub fn z_for_rate(input: &FiniteDistribution, x: usize, x_tilde: usize, d: u32, v: f64, c: f64) -> f64 {
    softplus(c.ln() - (input.log_probs()[x] - input.log_probs()[x_tilde]) - d as f64 * v)
}

/// `Γ_{x,x̃}(z) = P[P(x)P(Y^d|x) / (P(x̃)P(Y^d|x̃)) ≤ c e^{−z}/(1−e^{−z}) | X = x]`,
/// exactly, by summing type-class masses.
#[allow(clippy::too_many_arguments)]
pub fn gamma_probability(
    channel: &Dmc,
    input: &FiniteDistribution,
    x: usize,
    x_tilde: usize,
    d: u32,
    z: f64,
    c: f64,
    cfg: &EvalConfig,
) -> Result<f64> {
    let k = channel.input_size();
    if input.alphabet_size() != k {
        return Err(Error::AlphabetMismatch(input.alphabet_size(), k));
    }
    if x >= k || x_tilde >= k || x == x_tilde {
        return Err(Error::InvalidParameter(format!("need distinct inputs below {k}, got ({x}, {x_tilde})")));
    }
    if !(z > 0.0) || !(c > 0.0) {
        return Err(Error::InvalidParameter(format!("z = {z} and c = {c} must be positive")));
    }
    if input.prob(x) == 0.0 {
        return Err(Error::InvalidParameter(format!("input {x} has no probability mass")));
    }
    // log c − log(e^z − 1); the event compares ℓ_x − ℓ_x̃ against it
    let threshold = c.ln() - z.exp_m1().ln();
    let lik = Likelihoods::new(channel, input);
    let parts = map_type_partitions(d, channel.output_size(), cfg, |visit| {
        let mut acc = NeumaierSum::new();
        let mut ell = vec![0.0; k];
        visit(&mut |counts, lm| {
            lik.fill(counts, &mut ell);
            if ell[x] > f64::NEG_INFINITY && ell[x] - ell[x_tilde] <= threshold {
                acc.add((lm + lik.log_conditional(x, counts)).exp());
            }
        });
        acc.value()
    })?;
    Ok(parts.into_iter().collect::<NeumaierSum>().value().min(1.0))
}
