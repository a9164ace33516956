//! Binomial and Poisson approximation channels, and BSC decompositions of
//! binary-input symmetric channels.
//!
//! The binomial channel `Bin_d(p)` is the sufficient-statistic form of the
//! d-view BSC(p). The Poisson approximation channel `Poi_d(p)` emits a pair
//! of independent Poisson counts with means `dp` and `d(1−p)`, in an order
//! chosen by the input bit. Capacities are reported in nats; both leading
//! constants of the closed forms are `log 2`.

use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::multiview_dmc::Dmc;
use crate::prob_core::{
    bsc_bhattacharyya, ln_choose, ln_pow, poisson_pmf, poisson_truncation, softplus, FiniteDistribution, NeumaierSum,
};

/// Default truncation mass for the Poisson series.
pub const DEFAULT_TAIL_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BinomialChannelSpec {
    pub d: u64,
    pub p: f64,
}

impl BinomialChannelSpec {
    pub fn new(d: u64, p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidParameter(format!("crossover {p} outside [0,1]")));
        }
        Ok(BinomialChannelSpec { d, p })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoissonChannelSpec {
    pub d: f64,
    pub p: f64,
    pub tail_tol: f64,
}

impl PoissonChannelSpec {
    pub fn new(d: f64, p: f64, tail_tol: f64) -> Result<Self> {
        if !(d.is_finite() && d >= 0.0) {
            return Err(Error::InvalidParameter(format!("Poisson scale {d} must be finite and nonnegative")));
        }
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidParameter(format!("crossover {p} outside [0,1]")));
        }
        if !(tail_tol > 0.0 && tail_tol <= 1e-6) {
            return Err(Error::InvalidParameter(format!("tail tolerance {tail_tol} outside (0, 1e-6]")));
        }
        Ok(PoissonChannelSpec { d, p, tail_tol })
    }
}

/// `C(Bin_d(p))` in nats.
pub fn binomial_capacity(spec: BinomialChannelSpec) -> f64 {
    let BinomialChannelSpec { d, p } = spec;
    if p == 0.5 {
        return 0.0;
    }
    let (lp, lq) = (p.ln(), (-p).ln_1p());
    let mut h = NeumaierSum::new();
    let mut mass = NeumaierSum::new();
    for i in 0..=d {
        let (i_f, j_f) = (i as f64, (d - i) as f64);
        let la = ln_pow(lp, i_f) + ln_pow(lq, j_f);
        if la == f64::NEG_INFINITY {
            continue;
        }
        let lb = ln_pow(lp, j_f) + ln_pow(lq, i_f);
        let w = (ln_choose(d, i) + la).exp();
        mass.add(w);
        h.add(w * softplus(lb - la));
    }
    (LN_2 - h.value() / mass.value()).clamp(0.0, LN_2)
}

/// `C(Bin_d(p))` for every `d` in `0..=d_max`.
pub fn binomial_capacity_curve(d_max: u64, p: f64) -> Vec<f64> {
    (0..=d_max).map(|d| binomial_capacity(BinomialChannelSpec { d, p })).collect()
}

/// Capacity of the Poisson approximation channel with its certified
/// truncation error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoissonCapacity {
    pub capacity: f64,
    /// Upper bound on the mass of the series dropped by truncation, times `log 2`.
    pub truncation_bound: f64,
    /// Each count is summed over `0..=radius`.
    pub radius: u64,
}

fn poisson_ln_masses(mean: f64, k_max: u64) -> Vec<f64> {
    (0..=k_max).map(|k| poisson_pmf(k, mean).ln()).collect()
}

/// `C(Poi_d(p))` in nats.
///
/// The series is summed as `log 2 − Σ_r P_R(r) h(P(X=0|r))` over the box
/// `[0, K]²`, where `K` leaves less than `tail_tol / 2` of each Poisson
/// marginal outside. Every dropped output contributes at most `P_R(r) log 2`,
/// so the truncation error is below `tail_tol · log 2`. The sum is
/// normalized by the mass inside the box, which keeps the same bound.
pub fn poisson_capacity(spec: PoissonChannelSpec) -> PoissonCapacity {
    let PoissonChannelSpec { d, p, tail_tol } = spec;
    if p == 0.5 {
        return PoissonCapacity { capacity: 0.0, truncation_bound: tail_tol * LN_2, radius: 0 };
    }
    let (m1, m2) = (d * p, d * (1.0 - p));
    let k = poisson_truncation(m1, tail_tol / 2.0).max(poisson_truncation(m2, tail_tol / 2.0));
    let (l1, l2) = (poisson_ln_masses(m1, k), poisson_ln_masses(m2, k));
    let mut h = NeumaierSum::new();
    let mut mass = NeumaierSum::new();
    for r1 in 0..=k as usize {
        for r2 in 0..=k as usize {
            // ln P(r | X=0) and ln P(r | X=1)
            let a = l1[r1] + l2[r2];
            let b = l2[r1] + l1[r2];
            if a > f64::NEG_INFINITY {
                mass.add(0.5 * a.exp());
                h.add(0.5 * a.exp() * softplus(b - a));
            }
            if b > f64::NEG_INFINITY {
                mass.add(0.5 * b.exp());
                h.add(0.5 * b.exp() * softplus(a - b));
            }
        }
    }
    PoissonCapacity {
        capacity: (LN_2 - h.value() / mass.value()).clamp(0.0, LN_2),
        truncation_bound: tail_tol * LN_2,
        radius: k,
    }
}

/// `|C(Poi_d(p)) − E_{N~Poi(d)}[C(Bin_N(p))]|`, with the mixture truncated by
/// the same tail rule.
pub fn poisson_mixture_identity_check(spec: PoissonChannelSpec) -> f64 {
    let direct = poisson_capacity(spec).capacity;
    let n_max = poisson_truncation(spec.d, spec.tail_tol);
    let mixture: NeumaierSum = (0..=n_max)
        .map(|n| poisson_pmf(n, spec.d).value() * binomial_capacity(BinomialChannelSpec { d: n, p: spec.p }))
        .collect();
    (direct - mixture.value()).abs()
}

/// Width of the Poisson–binomial sandwich, `exp(−d(1−Z(p))) − Z(p)^{2d}`.
pub fn poisson_sandwich_width(d: f64, p: f64) -> f64 {
    let z = bsc_bhattacharyya(p);
    (-d * (1.0 - z)).exp() - z.powf(2.0 * d)
}

/// One row of the binomial vs Poisson capacity comparison.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Figure1Row {
    pub d: u64,
    pub p: f64,
    pub c_bin: f64,
    pub c_poi: f64,
    pub gap: f64,
    pub thm3_bound: f64,
}

impl Figure1Row {
    /// `C_poi ≤ C_bin ≤ C_poi + width`, each side with slack `tol`.
    pub fn sandwich_holds(&self, tol: f64) -> bool {
        self.gap >= -tol && self.gap <= self.thm3_bound + tol
    }
}

/// Evaluates both capacities and the sandwich width on the grid
/// `d_values × p_grid`, in row-major order.
pub fn figure1_sweep(d_values: &[u64], p_grid: &[f64], exec: Exec) -> Result<Vec<Figure1Row>> {
    if d_values.is_empty() || p_grid.is_empty() {
        return Err(Error::InvalidParameter("sweep needs at least one d and one p".into()));
    }
    let mut cells = Vec::with_capacity(d_values.len() * p_grid.len());
    for &d in d_values {
        for &p in p_grid {
            BinomialChannelSpec::new(d, p)?;
            cells.push((d, p));
        }
    }
    Ok(exec.map(cells, |(d, p)| {
        let c_bin = binomial_capacity(BinomialChannelSpec { d, p });
        let c_poi = poisson_capacity(PoissonChannelSpec { d: d as f64, p, tail_tol: DEFAULT_TAIL_TOL }).capacity;
        Figure1Row { d, p, c_bin, c_poi, gap: c_bin - c_poi, thm3_bound: poisson_sandwich_width(d as f64, p) }
    }))
}

/// A BIMS channel written as a mixture of BSC subchannels.
#[derive(Clone, Debug, PartialEq)]
pub struct BimsDecomposition {
    /// Subchannel probabilities `ε_i`.
    pub weights: FiniteDistribution,
    /// Crossovers `p_i ∈ [0, 1/2]`, ascending.
    pub crossovers: Vec<f64>,
    /// Output orbit of each subchannel as `(more likely under 0, other)`;
    /// fixed points repeat the same output.
    pub orbits: Vec<(usize, usize)>,
}

impl BimsDecomposition {
    /// Rebuilds the channel rows from the subchannels.
    pub fn reconstruct(&self, output_size: usize) -> [Vec<f64>; 2] {
        let mut r0 = vec![0.0; output_size];
        let mut r1 = vec![0.0; output_size];
        for ((&eps, &p), &(a, b)) in self.weights.probs().iter().zip(&self.crossovers).zip(&self.orbits) {
            if a == b {
                r0[a] += eps;
                r1[a] += eps;
            } else {
                r0[a] += eps * (1.0 - p);
                r0[b] += eps * p;
                r1[a] += eps * p;
                r1[b] += eps * (1.0 - p);
            }
        }
        [r0, r1]
    }
}

/// Splits a BIMS channel into BSC subchannels, one per output orbit of its
/// involution. Orbits with zero mass are dropped.
pub fn bims_decompose(channel: &Dmc) -> Result<BimsDecomposition> {
    let pi = channel.bims_involution().ok_or(Error::NotBims)?;
    let mut parts: Vec<(f64, f64, (usize, usize))> = Vec::new();
    for (y, &z) in pi.iter().enumerate() {
        if z < y {
            continue;
        }
        let (a, b) = (channel.prob(0, y), channel.prob(0, z));
        let eps = if z == y { a } else { a + b };
        if eps == 0.0 {
            continue;
        }
        let (p, orbit) = if z == y {
            (0.5, (y, y))
        } else if a >= b {
            (if a == b { 0.5 } else { b / eps }, (y, z))
        } else {
            (a / eps, (z, y))
        };
        parts.push((eps, p, orbit));
    }
    parts.sort_by(|l, r| l.1.total_cmp(&r.1));
    let weights = FiniteDistribution::from_weights(&parts.iter().map(|t| t.0).collect::<Vec<_>>())?;
    Ok(BimsDecomposition {
        weights,
        crossovers: parts.iter().map(|t| t.1).collect(),
        orbits: parts.iter().map(|t| t.2).collect(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CapacityBounds {
    pub lower: f64,
    pub upper: f64,
}

/// Bounds the d-view capacity of a BIMS channel through its least and most
/// noisy subchannels:
/// `C(Poi_d(p_K)) ≤ C^(d) ≤ C(Poi_d(p_1)) + exp(−d(1−Z(p_1))) − Z(p_1)^{2d}`.
pub fn bims_capacity_bounds(decomp: &BimsDecomposition, d: u64) -> Result<CapacityBounds> {
    let (Some(&p1), Some(&pk)) = (decomp.crossovers.first(), decomp.crossovers.last()) else {
        return Err(Error::Degenerate("empty decomposition".into()));
    };
    if let Some(bad) = decomp.crossovers.iter().find(|p| !(**p > 0.0 && **p < 0.5)) {
        return Err(Error::Degenerate(format!("crossover {bad} is not in (0, 1/2)")));
    }
    let spec = |p| PoissonChannelSpec { d: d as f64, p, tail_tol: DEFAULT_TAIL_TOL };
    Ok(CapacityBounds {
        lower: poisson_capacity(spec(pk)).capacity,
        upper: poisson_capacity(spec(p1)).capacity + poisson_sandwich_width(d as f64, p1),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multiview_dmc::multi_view_report;
    use crate::prob_core::binary_entropy;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn bin(d: u64, p: f64) -> f64 {
        binomial_capacity(BinomialChannelSpec::new(d, p).unwrap())
    }

    fn poi(d: f64, p: f64) -> f64 {
        poisson_capacity(PoissonChannelSpec::new(d, p, DEFAULT_TAIL_TOL).unwrap()).capacity
    }

    #[test]
    fn binomial_examples() {
        for d in [1, 5, 40] {
            assert_abs_diff_eq!(bin(d, 0.5), 0.0, epsilon = 1e-15);
            assert_abs_diff_eq!(bin(d, 0.0), LN_2, epsilon = 1e-15);
            assert_abs_diff_eq!(bin(d, 1.0), LN_2, epsilon = 1e-15);
        }
        assert_abs_diff_eq!(bin(1, 0.1), LN_2 - binary_entropy(0.1), epsilon = 1e-15);
        assert_abs_diff_eq!(bin(1, 0.1), 0.368, epsilon = 1e-3);
        for d in [3, 17] {
            assert_abs_diff_eq!(bin(d, 0.2), bin(d, 0.8), epsilon = 1e-14);
        }
    }

    #[test]
    fn binomial_matches_multiview_bsc() {
        let u = FiniteDistribution::uniform(2).unwrap();
        for p in [0.05, 0.2, 0.4] {
            let ch = Dmc::bsc(p).unwrap();
            for d in 0..=25u32 {
                let mi = multi_view_report(&ch, &u, d).unwrap().mutual_info;
                assert_abs_diff_eq!(bin(d as u64, p), mi, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn bsc_gap_between_bhattacharyya_powers() {
        // conditional entropy in bits: Z^{2d} ≤ H ≤ Z^d
        for p in [0.05, 0.1, 0.25, 0.4] {
            let z = bsc_bhattacharyya(p);
            for d in 1..=40 {
                let h_bits = (LN_2 - bin(d, p)) / LN_2;
                assert!(h_bits >= z.powi(2 * d as i32) - 1e-12, "p={p} d={d}");
                assert!(h_bits <= z.powi(d as i32) + 1e-12, "p={p} d={d}");
            }
        }
    }

    #[test]
    fn poisson_examples() {
        assert_abs_diff_eq!(poi(6.0, 0.5), 0.0, epsilon = 1e-15);
        assert!(poi(1e-9, 0.2) < 1e-9);
        // p = 0: only the all-zero output is uninformative
        assert_abs_diff_eq!(poi(3.0, 0.0), LN_2 * (1.0 - (-3.0f64).exp()), epsilon = 1e-12);
        let (c_poi, c_bin) = (poi(6.0, 0.1), bin(6, 0.1));
        assert!(c_poi <= c_bin);
        assert!(c_bin - c_poi <= (-6.0f64 * 0.4).exp() - 0.6f64.powi(12));
        for (d, p) in [(3.0, 0.1), (12.0, 0.3), (24.0, 0.45)] {
            assert_abs_diff_eq!(poi(d, p), poi(d, 1.0 - p), epsilon = 1e-10);
        }
        let full = poisson_capacity(PoissonChannelSpec::new(5.0, 0.3, 1e-8).unwrap());
        assert!(full.truncation_bound <= 1e-8 * LN_2);
    }

    #[test]
    fn spec_validation() {
        assert!(PoissonChannelSpec::new(3.0, 0.2, 1e-3).is_err());
        assert!(PoissonChannelSpec::new(3.0, 1.2, 1e-9).is_err());
        assert!(BinomialChannelSpec::new(3, -0.1).is_err());
    }

    #[test]
    fn mixture_identity() {
        assert_eq!(poisson_mixture_identity_check(PoissonChannelSpec::new(4.0, 0.5, 1e-10).unwrap()), 0.0);
        let gap = poisson_mixture_identity_check(PoissonChannelSpec::new(3.0, 0.2, 1e-10).unwrap());
        assert!(gap <= 1.4e-10, "{gap}");
        let tol = 1e-12;
        let gap = poisson_mixture_identity_check(PoissonChannelSpec::new(24.0, 0.4, tol).unwrap());
        assert!(gap <= 2.0 * tol * LN_2, "{gap}");
    }

    #[test]
    fn sweep_rows() {
        let rows = figure1_sweep(&[3, 24], &[0.0, 0.2, 0.5, 1.0], Exec::Sequential).unwrap();
        assert_eq!(rows.len(), 8);
        for r in &rows {
            assert!(r.sandwich_holds(1e-9), "{r:?}");
            if r.p == 0.5 {
                assert_abs_diff_eq!(r.c_bin, 0.0, epsilon = 1e-15);
                assert_abs_diff_eq!(r.c_poi, 0.0, epsilon = 1e-15);
            }
        }
        assert!(figure1_sweep(&[], &[0.1], Exec::Sequential).is_err());
    }

    #[test]
    fn binomial_concave_in_d() {
        for p in [0.05, 0.1, 0.25, 0.4] {
            let c = binomial_capacity_curve(51, p);
            for d in 2..=50 {
                assert!(c[d + 1] - 2.0 * c[d] + c[d - 1] <= 1e-12, "p={p} d={d}");
            }
        }
    }

    #[test]
    fn decompositions() {
        let d = bims_decompose(&Dmc::bsc(0.2).unwrap()).unwrap();
        assert_eq!(d.weights.probs(), &[1.0]);
        assert_abs_diff_eq!(d.crossovers[0], 0.2, epsilon = 1e-15);

        let d = bims_decompose(&Dmc::bec(0.3).unwrap()).unwrap();
        assert_abs_diff_eq!(d.weights.prob(0), 0.7, epsilon = 1e-15);
        assert_abs_diff_eq!(d.weights.prob(1), 0.3, epsilon = 1e-15);
        assert_eq!(d.crossovers, vec![0.0, 0.5]);

        assert!(matches!(bims_decompose(&Dmc::z_channel(0.3).unwrap()), Err(Error::NotBims)));
    }

    fn random_bims<R: Rng>(rng: &mut R, pairs: usize, fixed: usize) -> Dmc {
        let n = 2 * pairs + fixed;
        let mut r0 = vec![0.0; n];
        let mut r1 = vec![0.0; n];
        for i in 0..pairs {
            let (a, b) = (rng.gen_range(0.05..1.0), rng.gen_range(0.05..1.0));
            r0[2 * i] = a;
            r0[2 * i + 1] = b;
            r1[2 * i] = b;
            r1[2 * i + 1] = a;
        }
        for j in 0..fixed {
            let c = rng.gen_range(0.05..1.0);
            r0[2 * pairs + j] = c;
            r1[2 * pairs + j] = c;
        }
        let total: f64 = r0.iter().sum();
        let norm = |v: Vec<f64>| v.into_iter().map(|x| x / total).collect::<Vec<_>>();
        Dmc::from_matrix(&[norm(r0), norm(r1)]).unwrap()
    }

    #[test]
    fn random_bims_reconstructs() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..20 {
            let ch = random_bims(&mut rng, 2, 2);
            assert_eq!(ch.output_size(), 6);
            let dec = bims_decompose(&ch).unwrap();
            let [r0, r1] = dec.reconstruct(6);
            for y in 0..6 {
                assert!((r0[y] - ch.prob(0, y)).abs() <= 1e-10);
                assert!((r1[y] - ch.prob(1, y)).abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn bims_bounds_contain_exact_capacity() {
        let u = FiniteDistribution::uniform(2).unwrap();
        let bsc = Dmc::bsc(0.15).unwrap();
        let dec = bims_decompose(&bsc).unwrap();
        for d in [1u64, 4, 10] {
            let b = bims_capacity_bounds(&dec, d).unwrap();
            let exact = multi_view_report(&bsc, &u, d as u32).unwrap().mutual_info;
            assert!(b.lower <= exact + 1e-12 && exact <= b.upper + 1e-12, "{d}: {b:?} vs {exact}");
            assert_abs_diff_eq!(b.upper - b.lower, poisson_sandwich_width(d as f64, 0.15), epsilon = 1e-15);
        }

        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..5 {
            let ch = random_bims(&mut rng, 2, 0);
            let dec = bims_decompose(&ch).unwrap();
            if dec.crossovers.iter().any(|p| *p <= 0.0 || *p >= 0.5) {
                continue;
            }
            let b = bims_capacity_bounds(&dec, 8).unwrap();
            let exact = multi_view_report(&ch, &u, 8).unwrap().mutual_info;
            assert!(b.lower <= exact + 1e-12 && exact <= b.upper + 1e-12, "{b:?} vs {exact}");
        }

        let bec = bims_decompose(&Dmc::bec(0.3).unwrap()).unwrap();
        assert!(matches!(bims_capacity_bounds(&bec, 4), Err(Error::Degenerate(_))));
    }
}
