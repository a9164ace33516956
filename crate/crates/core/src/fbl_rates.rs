//! Normal-approximation rates for `n` uses of a d-view channel.
//!
//! `R(n, ε) ≈ I^(d) + Φ⁻¹(ε) √(V^(d)/n) + log n / (2n)`, with the exact
//! mutual information and dispersion substituted. This is an approximation,
//! not a certified bound; the channel is assumed non-singular.

use libm::erfc;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc_inv;

use crate::error::{Error, Result};
use crate::multiview_dmc::{multi_view_report_with, Dmc, EvalConfig};
use crate::prob_core::FiniteDistribution;

/// Label carried by every rate produced here.
pub const RATE_LABEL: &str = "normal approximation";

/// `Φ(t)`, the standard normal CDF.
pub fn gaussian_cdf(t: f64) -> f64 {
    0.5 * erfc(-t / std::f64::consts::SQRT_2)
}

fn gaussian_pdf(t: f64) -> f64 {
    (-0.5 * t * t).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// `Φ⁻¹(q)` for `q ∈ (0, 1)`.
pub fn inverse_gaussian_cdf(q: f64) -> Result<f64> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::InvalidParameter(format!("quantile level {q} must lie in (0,1)")));
    }
    if q == 0.5 {
        return Ok(0.0);
    }
    let mut t = -std::f64::consts::SQRT_2 * erfc_inv(2.0 * q);
    // the seed is only accurate to about 1e-10; Newton steps against the
    // accurate CDF, with the residual taken in the smaller tail
    for _ in 0..2 {
        let pdf = gaussian_pdf(t);
        if pdf > 0.0 {
            let residual = if q < 0.5 { gaussian_cdf(t) - q } else { (1.0 - q) - gaussian_cdf(-t) };
            t -= residual / pdf;
        }
    }
    Ok(t)
}

/// Blocklength, target error probability and number of views.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FblQuery {
    pub n: u64,
    pub epsilon: f64,
    pub d: u32,
}

impl FblQuery {
    pub fn new(n: u64, epsilon: f64, d: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("blocklength must be positive".into()));
        }
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::InvalidParameter(format!("error probability {epsilon} must lie in (0,1)")));
        }
        if d == 0 {
            return Err(Error::InvalidParameter("number of views must be positive".into()));
        }
        Ok(FblQuery { n, epsilon, d })
    }
}

/// One evaluated rate, in nats per channel use.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FblRate {
    pub query: FblQuery,
    pub label: String,
    pub mutual_info: f64,
    pub dispersion: f64,
    pub rate: f64,
    /// `H(X) − rate`.
    pub gap_to_entropy: f64,
}

/// The normal-approximation rate with exact `I^(d)` and `V^(d)`.
pub fn normal_approx_rate(
    channel: &Dmc,
    input: &FiniteDistribution,
    query: FblQuery,
    cfg: &EvalConfig,
) -> Result<FblRate> {
    let query = FblQuery::new(query.n, query.epsilon, query.d)?;
    let report = multi_view_report_with(channel, input, query.d, cfg)?;
    if !(report.dispersion > 0.0) {
        return Err(Error::ZeroDispersion);
    }
    let n = query.n as f64;
    let rate =
        report.mutual_info + inverse_gaussian_cdf(query.epsilon)? * (report.dispersion / n).sqrt() + n.ln() / (2.0 * n);
    Ok(FblRate {
        query,
        label: RATE_LABEL.to_string(),
        mutual_info: report.mutual_info,
        dispersion: report.dispersion,
        rate,
        gap_to_entropy: report.input_entropy - rate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn uniform2() -> FiniteDistribution {
        FiniteDistribution::uniform(2).unwrap()
    }

    #[test]
    fn gaussian_examples() {
        assert_eq!(gaussian_cdf(0.0), 0.5);
        assert_eq!(inverse_gaussian_cdf(0.5).unwrap(), 0.0);
        assert_abs_diff_eq!(gaussian_cdf(1.6448536269514722), 0.95, epsilon = 1e-15);
        assert_abs_diff_eq!(inverse_gaussian_cdf(0.975).unwrap(), 1.959963984540054, epsilon = 1e-12);
        assert!(inverse_gaussian_cdf(0.0).is_err());
        assert!(inverse_gaussian_cdf(1.0).is_err());
        assert!(inverse_gaussian_cdf(f64::NAN).is_err());
    }

    #[test]
    fn inverse_round_trip_grid() {
        let mut q = 1e-10;
        while q < 1.0 - 1e-10 {
            let t = inverse_gaussian_cdf(q).unwrap();
            assert!((gaussian_cdf(t) - q).abs() <= 1e-12, "q={q}");
            q = if q < 0.01 { q * 1.7 } else { q + 0.0037 };
        }
        for q in [1e-10, 1.0 - 1e-10] {
            let t = inverse_gaussian_cdf(q).unwrap();
            assert!((gaussian_cdf(t) - q).abs() <= 1e-12);
        }
    }

    #[test]
    fn median_error_leaves_only_the_log_term() {
        let ch = Dmc::bsc(0.11).unwrap();
        let cfg = EvalConfig::default();
        let r = normal_approx_rate(&ch, &uniform2(), FblQuery::new(500, 0.5, 3).unwrap(), &cfg).unwrap();
        assert_abs_diff_eq!(r.rate, r.mutual_info + (500f64).ln() / 1000.0, epsilon = 1e-15);
        assert_eq!(r.label, "normal approximation");
    }

    #[test]
    fn zero_dispersion_is_reported() {
        let ch = Dmc::from_matrix(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let q = FblQuery::new(100, 0.1, 1).unwrap();
        assert_eq!(normal_approx_rate(&ch, &uniform2(), q, &EvalConfig::default()), Err(Error::ZeroDispersion));
        assert!(FblQuery::new(100, 1.0, 1).is_err());
        assert!(FblQuery::new(0, 0.1, 1).is_err());
    }

    #[test]
    fn monotone_in_views() {
        let ch = Dmc::bsc(0.1).unwrap();
        let cfg = EvalConfig::default();
        let rates: Vec<f64> = (1..=12)
            .map(|d| normal_approx_rate(&ch, &uniform2(), FblQuery::new(1000, 0.01, d).unwrap(), &cfg).unwrap().rate)
            .collect();
        assert!(rates.windows(2).all(|w| w[1] >= w[0]), "{rates:?}");
    }

    #[test]
    fn gaussian_term_shrinks_like_inverse_root_n() {
        let ch = Dmc::bsc(0.1).unwrap();
        let cfg = EvalConfig::default();
        let gap = |n: u64| {
            let r = normal_approx_rate(&ch, &uniform2(), FblQuery::new(n, 0.05, 4).unwrap(), &cfg).unwrap();
            (r.rate - r.mutual_info - (n as f64).ln() / (2.0 * n as f64)).abs()
        };
        let ns = [100u64, 1000, 10_000, 100_000];
        for w in ns.windows(2) {
            assert_abs_diff_eq!(gap(w[0]) / gap(w[1]), 10f64.sqrt(), epsilon = 1e-9);
        }
        // √n (rate − I) tends to Φ⁻¹(ε)√V, with a log n / √n correction
        let r = normal_approx_rate(&ch, &uniform2(), FblQuery::new(100, 0.05, 4).unwrap(), &cfg).unwrap();
        let limit = inverse_gaussian_cdf(0.05).unwrap() * r.dispersion.sqrt();
        let dev: Vec<f64> = ns
            .iter()
            .map(|&n| {
                let r = normal_approx_rate(&ch, &uniform2(), FblQuery::new(n, 0.05, 4).unwrap(), &cfg).unwrap();
                ((r.rate - r.mutual_info) * (n as f64).sqrt() - limit).abs()
            })
            .collect();
        assert!(dev.windows(2).all(|w| w[1] < w[0]), "{dev:?}");
    }

    #[test]
    fn log_many_views_approach_entropy() {
        let ch = Dmc::bsc(0.1).unwrap();
        let cfg = EvalConfig::default();
        let n = 1000u64;
        let rho = 0.5108256237659907;
        let d = ((n as f64).ln() / rho).ceil() as u32;
        let r = normal_approx_rate(&ch, &uniform2(), FblQuery::new(n, 0.5, d).unwrap(), &cfg).unwrap();
        let entropy_gap = std::f64::consts::LN_2 - r.mutual_info;
        assert!(entropy_gap > 0.0 && entropy_gap <= 1.0 / n as f64, "{entropy_gap}");
        let bound = (n as f64).ln() / n as f64;
        assert!(r.gap_to_entropy.abs() <= bound, "{} vs {bound}", r.gap_to_entropy);
    }

    proptest! {
        #[test]
        fn monotone_in_epsilon(e1 in 0.001f64..0.999, e2 in 0.001f64..0.999, p in 0.01f64..0.45) {
            let ch = Dmc::bsc(p).unwrap();
            let cfg = EvalConfig::default();
            let rate = |e: f64| normal_approx_rate(&ch, &uniform2(), FblQuery::new(200, e, 2).unwrap(), &cfg).unwrap().rate;
            let (lo, hi) = if e1 < e2 { (e1, e2) } else { (e2, e1) };
            prop_assert!(rate(lo) <= rate(hi));
        }
    }
}
