//! Finite distributions, divergences and the discrete mass functions used
//! throughout the crate.
//!
//! All logarithms are natural. Sums over many terms go through log-sum-exp
//! or [`NeumaierSum`].

use std::fmt;
use std::ops::{Add, Mul};

use libm::lgamma as ln_gamma;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::search::minimize_unimodal;

/// Tolerance on the total mass of a [`FiniteDistribution`].
pub const MASS_TOL: f64 = 1e-12;

/// Bracket width for the λ-search in [`chernoff_information`].
pub const LAMBDA_TOL: f64 = 1e-12;

/// `log Σ exp(x_i)`, returning `-∞` for an empty or all-`-∞` input.
pub fn log_sum_exp<I: IntoIterator<Item = f64>>(terms: I) -> f64 {
    let terms: Vec<f64> = terms.into_iter().collect();
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if max == f64::INFINITY {
        return f64::INFINITY;
    }
    let s: f64 = terms.iter().map(|&t| (t - max).exp()).sum();
    max + s.ln()
}

/// `log(1 + e^x)` without overflow or loss of precision for very negative `x`.
pub fn softplus(x: f64) -> f64 {
    if x == f64::NEG_INFINITY {
        0.0
    } else if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// `k · ln(base)` with the convention `0^0 = 1`.
pub(crate) fn ln_pow(ln_base: f64, k: f64) -> f64 {
    if k == 0.0 {
        0.0
    } else {
        k * ln_base
    }
}

/// Neumaier-compensated running sum.
#[derive(Clone, Copy, Debug, Default)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for NeumaierSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = NeumaierSum::new();
        for x in iter {
            s.add(x);
        }
        s
    }
}

/// A nonnegative real stored by its natural logarithm, with an explicit flag
/// for exact zero.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogReal {
    log_value: f64,
    zero: bool,
}

impl LogReal {
    pub const ZERO: LogReal = LogReal { log_value: f64::NEG_INFINITY, zero: true };
    pub const ONE: LogReal = LogReal { log_value: 0.0, zero: false };

    pub fn from_ln(log_value: f64) -> Self {
        if log_value == f64::NEG_INFINITY {
            Self::ZERO
        } else {
            LogReal { log_value, zero: false }
        }
    }

    /// Panics on negative or NaN input.
    pub fn from_value(x: f64) -> Self {
        assert!(x >= 0.0, "LogReal requires a nonnegative value, got {x}");
        Self::from_ln(x.ln())
    }

    pub fn ln(self) -> f64 {
        self.log_value
    }

    pub fn value(self) -> f64 {
        if self.zero {
            0.0
        } else {
            self.log_value.exp()
        }
    }

    pub fn is_zero(self) -> bool {
        self.zero
    }
}

/// Log-domain addition.
impl Add for LogReal {
    type Output = LogReal;

    fn add(self, rhs: LogReal) -> LogReal {
        match (self.zero, rhs.zero) {
            (true, _) => rhs,
            (_, true) => self,
            _ => LogReal::from_ln(log_sum_exp([self.log_value, rhs.log_value])),
        }
    }
}

impl Mul for LogReal {
    type Output = LogReal;

    fn mul(self, rhs: LogReal) -> LogReal {
        if self.zero || rhs.zero {
            LogReal::ZERO
        } else {
            LogReal::from_ln(self.log_value + rhs.log_value)
        }
    }
}

impl fmt::Display for LogReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value())
    }
}

/// Probability vector over a finite alphabet, with cached logarithms.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteDistribution {
    probs: Vec<f64>,
    log_probs: Vec<f64>,
}

impl FiniteDistribution {
    /// Validates nonnegativity and unit mass within [`MASS_TOL`].
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidDistribution("empty alphabet".into()));
        }
        if let Some(bad) = probs.iter().find(|p| !p.is_finite() || **p < 0.0) {
            return Err(Error::InvalidDistribution(format!("entry {bad} is not a probability")));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > MASS_TOL {
            return Err(Error::InvalidDistribution(format!("mass sums to {total}")));
        }
        let log_probs = probs.iter().map(|p| p.ln()).collect();
        Ok(FiniteDistribution { probs, log_probs })
    }

    /// Normalizes nonnegative weights into a distribution.
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidDistribution("weights must be finite and nonnegative".into()));
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(Error::InvalidDistribution("weights sum to zero".into()));
        }
        Self::new(weights.iter().map(|w| w / total).collect())
    }

    pub fn uniform(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidDistribution("empty alphabet".into()));
        }
        Self::new(vec![1.0 / k as f64; k])
    }

    pub fn point_mass(k: usize, at: usize) -> Result<Self> {
        if at >= k {
            return Err(Error::InvalidDistribution(format!("index {at} outside alphabet of size {k}")));
        }
        let mut probs = vec![0.0; k];
        probs[at] = 1.0;
        Self::new(probs)
    }

    /// Bernoulli(a) as the distribution (1 − a, a) on {0, 1}.
    pub fn bernoulli(a: f64) -> Result<Self> {
        Self::new(vec![1.0 - a, a])
    }

    pub fn alphabet_size(&self) -> usize {
        self.probs.len()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn log_probs(&self) -> &[f64] {
        &self.log_probs
    }

    pub fn prob(&self, i: usize) -> f64 {
        self.probs[i]
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.probs.iter().enumerate().filter(|(_, p)| **p > 0.0).map(|(i, _)| i)
    }

    /// Product distribution `self ⊗ other`, indexed as `i * |other| + j`.
    pub fn product(&self, other: &FiniteDistribution) -> FiniteDistribution {
        let probs: Vec<f64> = self.probs.iter().flat_map(|a| other.probs.iter().map(move |b| a * b)).collect();
        let log_probs = probs.iter().map(|p| p.ln()).collect();
        FiniteDistribution { probs, log_probs }
    }
}

fn check_same_alphabet(p: &FiniteDistribution, q: &FiniteDistribution) -> Result<()> {
    if p.alphabet_size() != q.alphabet_size() {
        Err(Error::AlphabetMismatch(p.alphabet_size(), q.alphabet_size()))
    } else {
        Ok(())
    }
}

/// Shannon entropy in nats.
pub fn entropy(p: &FiniteDistribution) -> f64 {
    p.support().map(|i| -p.probs[i] * p.log_probs[i]).collect::<NeumaierSum>().value()
}

/// Variance of the self-information `−log p(X)`, in nats².
pub fn varentropy(p: &FiniteDistribution) -> f64 {
    let h = entropy(p);
    p.support()
        .map(|i| {
            let dev = -p.log_probs[i] - h;
            p.probs[i] * dev * dev
        })
        .collect::<NeumaierSum>()
        .value()
}

/// `D(p‖q)` in nats; `+∞` when `p` puts mass where `q` does not.
pub fn kl_divergence(p: &FiniteDistribution, q: &FiniteDistribution) -> Result<f64> {
    check_same_alphabet(p, q)?;
    let mut acc = NeumaierSum::new();
    for i in p.support() {
        if q.probs[i] == 0.0 {
            return Ok(f64::INFINITY);
        }
        acc.add(p.probs[i] * (p.log_probs[i] - q.log_probs[i]));
    }
    Ok(acc.value().max(0.0))
}

/// `g(λ) = log Σ p^{1−λ} q^λ`, summed over the common support of `p` and `q`.
///
/// Restricting to the common support gives the interior-λ value of the sum;
/// at λ ∈ {0, 1} this is the one-sided limit.
pub fn chernoff_objective(p: &FiniteDistribution, q: &FiniteDistribution, lam: f64) -> f64 {
    log_sum_exp(
        p.probs
            .iter()
            .zip(&q.probs)
            .enumerate()
            .filter(|(_, (a, b))| **a > 0.0 && **b > 0.0)
            .map(|(i, _)| (1.0 - lam) * p.log_probs[i] + lam * q.log_probs[i]),
    )
}

/// Chernoff information together with the minimizing λ, or `None` for the
/// minimizer when the supports are disjoint.
pub fn chernoff_with_lambda(p: &FiniteDistribution, q: &FiniteDistribution) -> Result<(f64, Option<f64>)> {
    check_same_alphabet(p, q)?;
    let common = p.probs.iter().zip(&q.probs).any(|(a, b)| *a > 0.0 && *b > 0.0);
    if !common {
        return Ok((f64::INFINITY, None));
    }
    let (lam, g) = minimize_unimodal(|l| chernoff_objective(p, q, l), 0.0, 1.0, LAMBDA_TOL);
    Ok(((-g).max(0.0), Some(lam)))
}

/// Chernoff information `C(p, q) = −min_{λ∈[0,1]} log Σ p^{1−λ} q^λ` in nats.
pub fn chernoff_information(p: &FiniteDistribution, q: &FiniteDistribution) -> Result<f64> {
    chernoff_with_lambda(p, q).map(|(c, _)| c)
}

/// Bhattacharyya coefficient `Σ √(p_i q_i)`.
pub fn bhattacharyya(p: &FiniteDistribution, q: &FiniteDistribution) -> Result<f64> {
    check_same_alphabet(p, q)?;
    let z = p.probs.iter().zip(&q.probs).map(|(a, b)| (a * b).sqrt()).collect::<NeumaierSum>().value();
    Ok(z.min(1.0))
}

/// Binary entropy in nats.
pub fn binary_entropy(a: f64) -> f64 {
    let mut h = 0.0;
    if a > 0.0 {
        h -= a * a.ln();
    }
    if a < 1.0 {
        h -= (1.0 - a) * (-a).ln_1p();
    }
    h
}

/// Bhattacharyya parameter `Z(p) = 2√(p(1−p))` of a BSC(p).
pub fn bsc_bhattacharyya(p: f64) -> f64 {
    2.0 * (p * (1.0 - p)).sqrt()
}

/// `log C(n, k)` via log-gamma.
pub fn ln_choose(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    if k == 0 || k == n {
        return 0.0;
    }
    ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0)
}

/// `Pr[Bin(n, a) = k]` in the log domain.
pub fn binomial_pmf(n: u64, k: u64, a: f64) -> Result<LogReal> {
    if k > n {
        return Err(Error::InvalidParameter(format!("binomial outcome {k} exceeds trials {n}")));
    }
    if !(0.0..=1.0).contains(&a) {
        return Err(Error::InvalidParameter(format!("binomial success probability {a} outside [0,1]")));
    }
    let ln = ln_choose(n, k) + ln_pow(a.ln(), k as f64) + ln_pow((-a).ln_1p(), (n - k) as f64);
    Ok(LogReal::from_ln(ln))
}

/// Log mass of `Bin(n, a)` at every outcome `0..=n`.
pub(crate) fn binomial_ln_masses(n: u64, a: f64) -> Vec<f64> {
    let (la, lb) = (a.ln(), (-a).ln_1p());
    (0..=n).map(|k| ln_choose(n, k) + ln_pow(la, k as f64) + ln_pow(lb, (n - k) as f64)).collect()
}

/// `Pr[Poi(mean) = k]` in the log domain. A zero mean is the point mass at 0.
pub fn poisson_pmf(k: u64, mean: f64) -> LogReal {
    assert!(mean >= 0.0 && mean.is_finite(), "Poisson mean must be finite and nonnegative");
    if mean == 0.0 {
        return if k == 0 { LogReal::ONE } else { LogReal::ZERO };
    }
    LogReal::from_ln(-mean + k as f64 * mean.ln() - ln_gamma(k as f64 + 1.0))
}

/// Chernoff bound on `Pr[Poi(mean) ≥ k]`, valid for `k > mean`.
fn poisson_upper_tail_bound(mean: f64, k: u64) -> f64 {
    let k = k as f64;
    if mean == 0.0 {
        return 0.0;
    }
    (-mean + k * (1.0 + mean.ln() - k.ln())).exp()
}

/// Smallest `K` with `Pr[Poi(mean) > K] < tol`.
///
/// A Chernoff bound gives a certified starting radius; the tail below it is
/// then summed directly to find the smallest admissible `K`.
pub fn poisson_truncation(mean: f64, tol: f64) -> u64 {
    assert!(tol > 0.0 && tol < 1.0);
    if mean == 0.0 {
        return 0;
    }
    let mut hi = (mean + 12.0 * mean.sqrt() + 40.0).ceil() as u64;
    while poisson_upper_tail_bound(mean, hi + 1) >= tol * 1e-3 {
        hi += (mean.sqrt().ceil() as u64).max(1);
    }
    let residual = poisson_upper_tail_bound(mean, hi + 1);
    // tail[k] = Pr[k < X ≤ hi] + certified bound beyond hi
    let mut tail = residual;
    let mut k = hi;
    while k > 0 {
        let next = tail + poisson_pmf(k, mean).value();
        if next >= tol {
            return k;
        }
        tail = next;
        k -= 1;
    }
    0
}

/// `E[L^λ]` for `L ~ Bin(n, a)`, with `0^0 = 1`.
pub fn binomial_fractional_moment(n: u64, a: f64, lam: f64) -> f64 {
    binomial_ln_masses(n, a)
        .into_iter()
        .enumerate()
        .map(|(k, lm)| (lm + ln_pow((k as f64).ln(), lam)).exp())
        .collect::<NeumaierSum>()
        .value()
}

/// `log E[L^λ 1{L > 0}]` for `L ~ Bin(n, a)`: the fractional moment with the
/// `L = 0` outcome dropped, which is its value for every λ > 0.
pub(crate) fn ln_binomial_positive_moment(ln_masses: &[f64], lam: f64) -> f64 {
    log_sum_exp(ln_masses.iter().enumerate().skip(1).map(|(k, lm)| lm + lam * (k as f64).ln()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn dist(v: &[f64]) -> FiniteDistribution {
        FiniteDistribution::new(v.to_vec()).unwrap()
    }

    fn bsc_rows(p: f64) -> (FiniteDistribution, FiniteDistribution) {
        (dist(&[1.0 - p, p]), dist(&[p, 1.0 - p]))
    }

    #[test]
    fn rejects_bad_distributions() {
        assert!(FiniteDistribution::new(vec![0.5, 0.4]).is_err());
        assert!(FiniteDistribution::new(vec![1.5, -0.5]).is_err());
        assert!(FiniteDistribution::new(vec![]).is_err());
        assert!(FiniteDistribution::new(vec![0.25; 4]).is_ok());
    }

    #[test]
    fn log_real_round_trip() {
        for x in [1e-12, 3.1e-7, 0.37, 1.0, 12345.678, 1e15] {
            let r = LogReal::from_value(x);
            assert!(((r.value() - x) / x).abs() <= 1e-14, "{x}");
        }
        assert!(LogReal::from_value(0.0).is_zero());
        assert_eq!(LogReal::ZERO.value(), 0.0);
        let s = LogReal::from_value(0.25) + LogReal::from_value(0.5);
        assert_abs_diff_eq!(s.value(), 0.75, epsilon = 1e-15);
        assert!((LogReal::from_value(3.0) * LogReal::ZERO).is_zero());
    }

    #[test]
    fn entropy_examples() {
        assert_abs_diff_eq!(entropy(&dist(&[0.5, 0.5])), std::f64::consts::LN_2, epsilon = 1e-15);
        assert_eq!(entropy(&dist(&[0.0, 1.0, 0.0])), 0.0);
        // −0.1 ln 0.1 − 0.9 ln 0.9
        assert_abs_diff_eq!(entropy(&dist(&[0.1, 0.9])), 0.325_082_973_391_448_2, epsilon = 1e-15);
        assert_abs_diff_eq!(binary_entropy(0.1), 0.325_082_973_391_448_2, epsilon = 1e-15);
    }

    #[test]
    fn varentropy_examples() {
        assert_abs_diff_eq!(varentropy(&dist(&[0.2; 5])), 0.0, epsilon = 1e-15);
        assert_eq!(varentropy(&dist(&[1.0, 0.0])), 0.0);
        let expected = 0.1 * 0.9 * 9f64.ln().powi(2);
        assert_abs_diff_eq!(varentropy(&dist(&[0.1, 0.9])), expected, epsilon = 1e-14);
        assert_abs_diff_eq!(expected, 0.434_6, epsilon = 1e-4);
    }

    #[test]
    fn kl_examples() {
        let p = dist(&[0.3, 0.7]);
        assert_eq!(kl_divergence(&p, &p).unwrap(), 0.0);
        let half = dist(&[0.5, 0.5]);
        let kl = kl_divergence(&half, &dist(&[0.9, 0.1])).unwrap();
        assert_abs_diff_eq!(kl, -(2.0 * 0.09f64.sqrt()).ln(), epsilon = 1e-15);
        let kl = kl_divergence(&dist(&[1.0, 0.0]), &half).unwrap();
        assert_abs_diff_eq!(kl, std::f64::consts::LN_2, epsilon = 1e-15);
        assert_eq!(kl_divergence(&half, &dist(&[1.0, 0.0])).unwrap(), f64::INFINITY);
        assert!(matches!(kl_divergence(&half, &dist(&[1.0, 0.0, 0.0])), Err(Error::AlphabetMismatch(2, 3))));
    }

    #[test]
    fn chernoff_closed_forms() {
        let p = dist(&[0.2, 0.3, 0.5]);
        assert_abs_diff_eq!(chernoff_information(&p, &p).unwrap(), 0.0, epsilon = 1e-15);

        let (a, b) = bsc_rows(0.1);
        assert_abs_diff_eq!(chernoff_information(&a, &b).unwrap(), -(0.6f64).ln(), epsilon = 1e-12);

        // BEC(0.3): outputs {0, e, 1}
        let a = dist(&[0.7, 0.3, 0.0]);
        let b = dist(&[0.0, 0.3, 0.7]);
        assert_abs_diff_eq!(chernoff_information(&a, &b).unwrap(), -(0.3f64).ln(), epsilon = 1e-12);

        // Z-channel(0.25): input 1 reads as 0 with probability 0.25
        let a = dist(&[1.0, 0.0]);
        let b = dist(&[0.25, 0.75]);
        assert_abs_diff_eq!(chernoff_information(&a, &b).unwrap(), -(0.25f64).ln(), epsilon = 1e-12);

        let c = chernoff_information(&dist(&[1.0, 0.0]), &dist(&[0.0, 1.0])).unwrap();
        assert_eq!(c, f64::INFINITY);
    }

    #[test]
    fn bhattacharyya_examples() {
        let p = dist(&[0.2, 0.8]);
        assert_abs_diff_eq!(bhattacharyya(&p, &p).unwrap(), 1.0, epsilon = 1e-15);
        let (a, b) = bsc_rows(0.1);
        assert_abs_diff_eq!(bhattacharyya(&a, &b).unwrap(), 0.6, epsilon = 1e-15);
        assert_eq!(bhattacharyya(&dist(&[1.0, 0.0]), &dist(&[0.0, 1.0])).unwrap(), 0.0);
    }

    #[test]
    fn binomial_examples() {
        assert_eq!(binomial_pmf(0, 0, 0.0).unwrap().value(), 1.0);
        assert_abs_diff_eq!(binomial_pmf(4, 2, 0.5).unwrap().value(), 0.375, epsilon = 1e-15);
        assert_abs_diff_eq!(binomial_pmf(1, 1, 0.3).unwrap().value(), 0.3, epsilon = 1e-15);
        assert!(binomial_pmf(3, 4, 0.5).is_err());
        for n in [1u64, 7, 60, 1000] {
            let total: NeumaierSum = (0..=n).map(|k| binomial_pmf(n, k, 0.37).unwrap().value()).collect();
            assert_abs_diff_eq!(total.value(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn poisson_examples() {
        assert_abs_diff_eq!(poisson_pmf(0, 1.0).value(), (-1.0f64).exp(), epsilon = 1e-15);
        assert_abs_diff_eq!(poisson_pmf(2, 2.0).value(), 2.0 * (-2.0f64).exp(), epsilon = 1e-15);
        for mean in [0.3, 3.0, 24.0, 150.0] {
            let k = poisson_truncation(mean, 1e-12);
            let head: NeumaierSum = (0..=k).map(|j| poisson_pmf(j, mean).value()).collect();
            // cumulative-sum oracle
            let tail = 1.0 - head.value();
            assert!(tail < 1e-12 + 1e-15, "mean {mean}: tail {tail}");
            // minimality: dropping one more term pushes the tail over
            let shorter: NeumaierSum = (0..k).map(|j| poisson_pmf(j, mean).value()).collect();
            assert!(1.0 - shorter.value() >= 1e-12 - 1e-15, "mean {mean}");
        }
    }

    #[test]
    fn fractional_moment_examples() {
        assert_abs_diff_eq!(binomial_fractional_moment(10, 0.3, 1.0), 3.0, epsilon = 1e-13);
        assert_abs_diff_eq!(binomial_fractional_moment(10, 0.3, 0.0), 1.0, epsilon = 1e-14);
        let direct: f64 = (0..=10u32)
            .map(|k| {
                let c = (1..=k).fold(1.0, |acc, j| acc * (10 - j + 1) as f64 / j as f64);
                c * 0.5f64.powi(10) * (k as f64).sqrt()
            })
            .sum();
        assert_abs_diff_eq!(binomial_fractional_moment(10, 0.5, 0.5), direct, epsilon = 1e-13);
    }

    #[test]
    fn bims_minimizer_is_one_half() {
        for p in [0.01, 0.1, 0.25, 0.4] {
            let (a, b) = bsc_rows(p);
            let (c, lam) = chernoff_with_lambda(&a, &b).unwrap();
            assert!((lam.unwrap() - 0.5).abs() < 1e-6);
            assert_abs_diff_eq!(c, -bhattacharyya(&a, &b).unwrap().ln(), epsilon = 1e-9);
        }
    }

    #[test]
    fn product_additivity() {
        let (p1, q1) = (dist(&[0.2, 0.5, 0.3]), dist(&[0.6, 0.1, 0.3]));
        let (p2, q2) = (dist(&[0.9, 0.1]), dist(&[0.4, 0.6]));
        let z = bhattacharyya(&p1.product(&p2), &q1.product(&q2)).unwrap();
        let expect = bhattacharyya(&p1, &q1).unwrap() * bhattacharyya(&p2, &q2).unwrap();
        assert_abs_diff_eq!(z, expect, epsilon = 1e-14);

        let c1 = chernoff_information(&p1, &q1).unwrap();
        let (mut pd, mut qd) = (p1.clone(), q1.clone());
        for d in 2..=4 {
            pd = pd.product(&p1);
            qd = qd.product(&q1);
            assert_abs_diff_eq!(chernoff_information(&pd, &qd).unwrap(), d as f64 * c1, epsilon = 1e-10);
        }
    }

    fn arb_dist(k: usize) -> impl Strategy<Value = FiniteDistribution> {
        prop::collection::vec(0.0f64..1.0, k).prop_filter_map("nonzero", |w| {
            if w.iter().sum::<f64>() > 1e-6 {
                FiniteDistribution::from_weights(&w).ok()
            } else {
                None
            }
        })
    }

    fn arb_pair() -> impl Strategy<Value = (FiniteDistribution, FiniteDistribution)> {
        (2usize..=6).prop_flat_map(|k| (arb_dist(k), arb_dist(k)))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn chernoff_is_symmetric((p, q) in arb_pair()) {
            let a = chernoff_information(&p, &q).unwrap();
            let b = chernoff_information(&q, &p).unwrap();
            prop_assert!((a - b).abs() <= 1e-10 * (1.0 + a.abs()));
        }

        #[test]
        fn chernoff_below_both_kls((p, q) in arb_pair()) {
            let c = chernoff_information(&p, &q).unwrap();
            let k1 = kl_divergence(&p, &q).unwrap();
            let k2 = kl_divergence(&q, &p).unwrap();
            prop_assert!(c <= k1.min(k2) + 1e-12);
        }

        #[test]
        fn chernoff_objective_is_midpoint_convex((p, q) in arb_pair()) {
            for i in 0..20 {
                let a = i as f64 / 20.0;
                let b = (i + 1) as f64 / 20.0;
                let mid = chernoff_objective(&p, &q, 0.5 * (a + b));
                let avg = 0.5 * (chernoff_objective(&p, &q, a) + chernoff_objective(&p, &q, b));
                prop_assert!(mid <= avg + 1e-12);
            }
        }

        #[test]
        fn entropy_matches_defining_expectation(p in (1usize..=6).prop_flat_map(arb_dist)) {
            // brute force: expectation of the surprisal and its square
            let mut e1 = 0.0;
            let mut e2 = 0.0;
            for &pi in p.probs() {
                if pi > 0.0 {
                    let s = -pi.ln();
                    e1 += pi * s;
                    e2 += pi * s * s;
                }
            }
            prop_assert!((entropy(&p) - e1).abs() <= 1e-12);
            prop_assert!((varentropy(&p) - (e2 - e1 * e1)).abs() <= 1e-12);
            prop_assert!(entropy(&p) <= (p.alphabet_size() as f64).ln() + 1e-12);
        }

        #[test]
        fn bhattacharyya_in_unit_interval((p, q) in arb_pair()) {
            let z = bhattacharyya(&p, &q).unwrap();
            prop_assert!((0.0..=1.0).contains(&z));
        }
    }
}
