//! Exact multi-view quantities of a discrete memoryless channel.
//!
//! A d-view channel emits d iid outputs of `W(·|x)` for a single input `x`.
//! The posterior of `X` depends on the outputs only through their type (the
//! vector of symbol counts), so every expectation over `Y^d` is a sum over
//! the `C(d+|Y|−1, |Y|−1)` compositions of `d` instead of the `|Y|^d` raw
//! tuples.

use libm::lgamma as ln_gamma;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::prob_core::{
    bhattacharyya, chernoff_information, entropy, ln_pow, log_sum_exp, softplus, varentropy, FiniteDistribution,
    LogReal, NeumaierSum,
};

/// Default cap on the number of type classes summed by a single report.
pub const DEFAULT_TYPE_BUDGET: u128 = 10_000_000;

/// Default cap on the number of matrix entries of a product channel.
pub const DEFAULT_PRODUCT_BUDGET: u128 = 1 << 16;

/// Row-sum tolerance for channel files.
pub const FILE_ROW_TOL: f64 = 1e-9;

const BIMS_TOL: f64 = 1e-12;

/// Budget and execution strategy shared by the enumeration routines.
#[derive(Clone, Copy, Debug)]
pub struct EvalConfig {
    pub type_budget: u128,
    pub exec: Exec,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig { type_budget: DEFAULT_TYPE_BUDGET, exec: Exec::default() }
    }
}

/// A discrete memoryless channel `W(y|x)` over finite alphabets.
#[derive(Clone, Debug, PartialEq)]
pub struct Dmc {
    rows: Vec<FiniteDistribution>,
    output_size: usize,
    log_rows: Vec<Vec<f64>>,
    bims_involution: Option<Vec<usize>>,
}

impl Dmc {
    pub fn new(rows: Vec<FiniteDistribution>) -> Result<Self> {
        let output_size = rows
            .first()
            .ok_or_else(|| Error::InvalidParameter("channel needs at least one input".into()))?
            .alphabet_size();
        if let Some(r) = rows.iter().find(|r| r.alphabet_size() != output_size) {
            return Err(Error::AlphabetMismatch(output_size, r.alphabet_size()));
        }
        let log_rows = rows.iter().map(|r| r.log_probs().to_vec()).collect();
        let mut dmc = Dmc { rows, output_size, log_rows, bims_involution: None };
        if dmc.input_size() == 2 {
            dmc.bims_involution = detect_bims(&dmc)?;
        }
        Ok(dmc)
    }

    pub fn from_matrix(matrix: &[Vec<f64>]) -> Result<Self> {
        let rows = matrix.iter().map(|r| FiniteDistribution::new(r.clone())).collect::<Result<Vec<_>>>()?;
        Self::new(rows)
    }

    /// Binary symmetric channel with crossover `p`.
    pub fn bsc(p: f64) -> Result<Self> {
        check_unit("crossover", p)?;
        Self::from_matrix(&[vec![1.0 - p, p], vec![p, 1.0 - p]])
    }

    /// Binary erasure channel; outputs are ordered `0, e, 1`.
    pub fn bec(eps: f64) -> Result<Self> {
        check_unit("erasure probability", eps)?;
        Self::from_matrix(&[vec![1.0 - eps, eps, 0.0], vec![0.0, eps, 1.0 - eps]])
    }

    /// Z-channel: input 0 is noiseless, input 1 is read as 0 with probability `delta`.
    pub fn z_channel(delta: f64) -> Result<Self> {
        check_unit("Z-channel parameter", delta)?;
        Self::from_matrix(&[vec![1.0, 0.0], vec![delta, 1.0 - delta]])
    }

    /// Channel whose rows are iid uniform weights, normalized.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, input_size: usize, output_size: usize) -> Result<Self> {
        let rows = (0..input_size)
            .map(|_| {
                let w: Vec<f64> = (0..output_size).map(|_| rng.gen_range(0.01..1.0)).collect();
                FiniteDistribution::from_weights(&w)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(rows)
    }

    /// Parses the plain-text matrix format: a header line `|X| |Y|` followed
    /// by `|X|` rows of `|Y|` probabilities. Blank lines and `#` comments are
    /// ignored. Rows must sum to one within [`FILE_ROW_TOL`] and are then
    /// renormalized.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().map(|l| l.split('#').next().unwrap_or("").trim()).filter(|l| !l.is_empty());
        let header = lines.next().ok_or_else(|| Error::MalformedChannel("empty file".into()))?;
        let dims: Vec<usize> = header
            .split_whitespace()
            .map(|t| t.parse::<usize>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::MalformedChannel(format!("bad header {header:?}: {e}")))?;
        let [nx, ny] = dims[..] else {
            return Err(Error::MalformedChannel(format!("header must hold two sizes, got {header:?}")));
        };
        if nx == 0 || ny == 0 {
            return Err(Error::MalformedChannel("alphabet sizes must be positive".into()));
        }
        let mut rows = Vec::with_capacity(nx);
        for x in 0..nx {
            let line = lines.next().ok_or_else(|| Error::MalformedChannel(format!("missing row {x}")))?;
            let row: Vec<f64> = line
                .split_whitespace()
                .map(|t| t.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::MalformedChannel(format!("row {x}: {e}")))?;
            if row.len() != ny {
                return Err(Error::MalformedChannel(format!("row {x} has {} entries, expected {ny}", row.len())));
            }
            if row.iter().any(|p| !p.is_finite() || *p < 0.0) {
                return Err(Error::MalformedChannel(format!("row {x} has a negative or non-finite entry")));
            }
            let total: f64 = row.iter().sum();
            if (total - 1.0).abs() > FILE_ROW_TOL {
                return Err(Error::MalformedChannel(format!("row {x} sums to {total}")));
            }
            rows.push(
                FiniteDistribution::from_weights(&row).map_err(|e| Error::MalformedChannel(format!("row {x}: {e}")))?,
            );
        }
        if lines.next().is_some() {
            return Err(Error::MalformedChannel(format!("more than {nx} rows")));
        }
        Self::new(rows)
    }

    /// Serializes to the format read by [`Dmc::parse`].
    pub fn to_text(&self) -> String {
        let mut s = format!("{} {}\n", self.input_size(), self.output_size);
        for r in &self.rows {
            let cells: Vec<String> = r.probs().iter().map(|p| format!("{p:e}")).collect();
            s.push_str(&cells.join(" "));
            s.push('\n');
        }
        s
    }

    pub fn input_size(&self) -> usize {
        self.rows.len()
    }

    pub fn output_size(&self) -> usize {
        self.output_size
    }

    pub fn row(&self, x: usize) -> &FiniteDistribution {
        &self.rows[x]
    }

    pub fn rows(&self) -> &[FiniteDistribution] {
        &self.rows
    }

    pub fn prob(&self, x: usize, y: usize) -> f64 {
        self.rows[x].prob(y)
    }

    /// Output involution making this a BIMS channel, when one was detected.
    pub fn bims_involution(&self) -> Option<&[usize]> {
        self.bims_involution.as_deref()
    }

    /// Minimum Chernoff information over ordered pairs of distinct inputs,
    /// restricted to inputs with positive probability under `support` when
    /// given.
    pub fn min_pair_chernoff(&self, support: Option<&FiniteDistribution>) -> Result<f64> {
        let active: Vec<usize> = match support {
            Some(p) => {
                check_input(self, p)?;
                p.support().collect()
            }
            None => (0..self.input_size()).collect(),
        };
        let mut best = f64::INFINITY;
        for &a in &active {
            for &b in &active {
                if a != b {
                    best = best.min(chernoff_information(&self.rows[a], &self.rows[b])?);
                }
            }
        }
        Ok(best)
    }

    /// The d-view channel written out over raw output tuples, indexed
    /// big-endian in base `|Y|`. Only for small `|Y|^d`.
    pub fn views(&self, d: u32, max_outputs: u128) -> Result<Dmc> {
        let outputs = (self.output_size as u128).checked_pow(d).unwrap_or(u128::MAX);
        if outputs > max_outputs {
            return Err(Error::BudgetExceeded { needed: outputs, budget: max_outputs });
        }
        let rows = self
            .rows
            .iter()
            .map(|r| (1..d).fold(r.clone(), |acc, _| acc.product(r)))
            .map(|r| if d == 0 { FiniteDistribution::new(vec![1.0]).expect("unit mass") } else { r })
            .collect();
        Dmc::new(rows)
    }
}

fn check_unit(name: &str, v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} {v} outside [0,1]")))
    }
}

fn check_input(channel: &Dmc, input: &FiniteDistribution) -> Result<()> {
    if input.alphabet_size() != channel.input_size() {
        Err(Error::AlphabetMismatch(channel.input_size(), input.alphabet_size()))
    } else {
        Ok(())
    }
}

/// Searches for an output involution `π` with `W(y|0) = W(π(y)|1)` for all `y`.
pub fn detect_bims(channel: &Dmc) -> Result<Option<Vec<usize>>> {
    if channel.input_size() != 2 {
        return Err(Error::InvalidParameter(format!(
            "BIMS detection needs a binary-input channel, got {} inputs",
            channel.input_size()
        )));
    }
    let ny = channel.output_size();
    let (r0, r1) = (channel.row(0).probs(), channel.row(1).probs());
    let close = |a: f64, b: f64| (a - b).abs() <= BIMS_TOL;
    let mut perm: Vec<Option<usize>> = vec![None; ny];
    for y in 0..ny {
        if perm[y].is_some() {
            continue;
        }
        if close(r0[y], r1[y]) {
            perm[y] = Some(y);
            continue;
        }
        let partner = (0..ny).find(|&z| z != y && perm[z].is_none() && close(r0[z], r1[y]) && close(r1[z], r0[y]));
        match partner {
            Some(z) => {
                perm[y] = Some(z);
                perm[z] = Some(y);
            }
            None => return Ok(None),
        }
    }
    Ok(Some(perm.into_iter().map(|p| p.expect("every output assigned")).collect()))
}

/// Extends an output involution coordinatewise to the d-view output tuples
/// used by [`Dmc::views`].
pub fn extend_involution(pi: &[usize], d: u32) -> Vec<usize> {
    let k = pi.len();
    let total = k.pow(d);
    (0..total)
        .map(|mut idx| {
            let mut digits = vec![0usize; d as usize];
            for slot in digits.iter_mut().rev() {
                *slot = idx % k;
                idx /= k;
            }
            digits.iter().fold(0, |acc, &y| acc * k + pi[y])
        })
        .collect()
}

/// The n-letter product channel `W(y^n|x^n) = ∏ W(y_i|x_i)`, with input and
/// output tuples indexed big-endian.
pub fn product_channel(channel: &Dmc, n: u32, max_entries: u128) -> Result<Dmc> {
    if n == 0 {
        return Err(Error::InvalidParameter("product length must be positive".into()));
    }
    let nx = (channel.input_size() as u128).checked_pow(n).unwrap_or(u128::MAX);
    let ny = (channel.output_size() as u128).checked_pow(n).unwrap_or(u128::MAX);
    let entries = nx.saturating_mul(ny);
    if entries > max_entries {
        return Err(Error::BudgetExceeded { needed: entries, budget: max_entries });
    }
    let mut rows: Vec<FiniteDistribution> = channel.rows().to_vec();
    for _ in 1..n {
        rows = rows.iter().flat_map(|prefix| channel.rows().iter().map(move |r| prefix.product(r))).collect();
    }
    Dmc::new(rows)
}

/// Scaled Bhattacharyya parameter `Σ_{x≠x'} Σ_y √(P(x)W(y|x)P(x')W(y|x'))`.
pub fn z_general(channel: &Dmc, input: &FiniteDistribution) -> Result<f64> {
    check_input(channel, input)?;
    let mut acc = NeumaierSum::new();
    for a in 0..channel.input_size() {
        for b in 0..channel.input_size() {
            if a != b {
                let bc = bhattacharyya(channel.row(a), channel.row(b))?;
                acc.add((input.prob(a) * input.prob(b)).sqrt() * bc);
            }
        }
    }
    Ok(acc.value())
}

/// `Σ_{x≠x'} √(P(x)P(x')) · BC(x, x')^d`: the scaled Bhattacharyya parameter
/// of the d-view channel itself.
pub fn z_general_views(channel: &Dmc, input: &FiniteDistribution, d: u32) -> Result<f64> {
    check_input(channel, input)?;
    let mut acc = NeumaierSum::new();
    for a in 0..channel.input_size() {
        for b in 0..channel.input_size() {
            if a != b {
                let bc = bhattacharyya(channel.row(a), channel.row(b))?;
                acc.add((input.prob(a) * input.prob(b)).sqrt() * bc.powi(d as i32));
            }
        }
    }
    Ok(acc.value())
}

// ---------------------------------------------------------------------------
// Type classes

/// A composition `(t_y)` of `d` output symbols with its multinomial weight.
#[derive(Clone, Debug, PartialEq)]
pub struct TypeClass {
    pub counts: Vec<u32>,
    pub log_multinomial: LogReal,
}

/// Number of compositions of `d` into `k` parts, `C(d+k−1, k−1)`, saturating.
pub fn type_class_count(d: u32, k: usize) -> u128 {
    if k == 0 {
        return 0;
    }
    let n = d as u128 + k as u128 - 1;
    let r = (k as u128 - 1).min(d as u128);
    let mut c: u128 = 1;
    for i in 0..r {
        c = match c.checked_mul(n - i) {
            Some(v) => v / (i + 1),
            None => return u128::MAX,
        };
    }
    c
}

/// Table of `ln k!` for `k = 0..=d`.
fn ln_factorials(d: u32) -> Vec<f64> {
    (0..=d).map(|k| if k < 2 { 0.0 } else { ln_gamma(k as f64 + 1.0) }).collect()
}

/// Advances `counts` to the next composition, or returns false after the last.
fn next_composition(counts: &mut [u32]) -> bool {
    let k = counts.len();
    if k < 2 {
        return false;
    }
    let Some(i) = (0..k - 1).rev().find(|&i| counts[i] > 0) else {
        return false;
    };
    let tail = counts[k - 1];
    counts[k - 1] = 0;
    counts[i] -= 1;
    counts[i + 1] = tail + 1;
    true
}

/// Iterator over all compositions of `d` into `k` parts, starting at
/// `(d, 0, …, 0)` and ending at `(0, …, 0, d)`.
pub struct TypeClasses {
    counts: Vec<u32>,
    ln_fact: Vec<f64>,
    done: bool,
}

impl Iterator for TypeClasses {
    type Item = TypeClass;

    fn next(&mut self) -> Option<TypeClass> {
        if self.done {
            return None;
        }
        let counts = self.counts.clone();
        let d = counts.iter().sum::<u32>() as usize;
        let lm = self.ln_fact[d] - counts.iter().map(|&t| self.ln_fact[t as usize]).sum::<f64>();
        self.done = !next_composition(&mut self.counts);
        Some(TypeClass { counts, log_multinomial: LogReal::from_ln(lm) })
    }
}

/// Streams every type class of `d` symbols over an alphabet of `output_size`.
pub fn enumerate_type_classes(d: u32, output_size: usize) -> TypeClasses {
    assert!(output_size >= 1, "output alphabet must be nonempty");
    let mut counts = vec![0; output_size];
    counts[0] = d;
    TypeClasses { counts, ln_fact: ln_factorials(d), done: false }
}

/// Calls `f(counts, ln multinomial)` for every type whose first count is `first`.
fn for_each_type_with_first<F: FnMut(&[u32], f64)>(d: u32, k: usize, first: u32, ln_fact: &[f64], mut f: F) {
    let mut counts = vec![0u32; k];
    counts[0] = first;
    if k == 1 {
        if first == d {
            f(&counts, 0.0);
        }
        return;
    }
    counts[1] = d - first;
    loop {
        let lm = ln_fact[d as usize] - counts.iter().map(|&t| ln_fact[t as usize]).sum::<f64>();
        f(&counts, lm);
        if !next_composition(&mut counts[1..]) {
            break;
        }
    }
}

/// Receives `(counts, log multinomial)` for each type class.
pub(crate) type ClassSink<'a> = dyn FnMut(&[u32], f64) + 'a;

/// Calls its argument once per type class of one partition.
pub(crate) type PartitionVisit<'a> = dyn for<'s> FnMut(&'s mut ClassSink<'s>) + 'a;

/// Maps `f` over the partitions of the type space by first count and
/// returns the per-partition results in order.
pub(crate) fn map_type_partitions<R, F>(d: u32, k: usize, cfg: &EvalConfig, f: F) -> Result<Vec<R>>
where
    R: Send,
    F: Fn(&mut PartitionVisit<'_>) -> R + Sync + Send,
{
    let needed = type_class_count(d, k);
    if needed > cfg.type_budget {
        return Err(Error::BudgetExceeded { needed, budget: cfg.type_budget });
    }
    let ln_fact = ln_factorials(d);
    let firsts: Vec<u32> = if k == 1 { vec![d] } else { (0..=d).collect() };
    Ok(cfg.exec.map(firsts, |first| {
        let mut visit = |g: &mut dyn FnMut(&[u32], f64)| for_each_type_with_first(d, k, first, &ln_fact, g);
        f(&mut visit)
    }))
}

/// Per-input log-likelihoods of a type: `ℓ_x = log P(x) + Σ_y t_y log W(y|x)`.
pub(crate) struct Likelihoods<'a> {
    channel: &'a Dmc,
    log_prior: Vec<f64>,
}

impl<'a> Likelihoods<'a> {
    pub(crate) fn new(channel: &'a Dmc, input: &FiniteDistribution) -> Self {
        Likelihoods { channel, log_prior: input.log_probs().to_vec() }
    }

    /// `Σ_y t_y log W(y|x)`, with `0 · log 0 = 0`.
    pub(crate) fn log_conditional(&self, x: usize, counts: &[u32]) -> f64 {
        let lw = &self.channel.log_rows[x];
        counts.iter().zip(lw).map(|(&t, &l)| ln_pow(l, t as f64)).sum()
    }

    pub(crate) fn fill(&self, counts: &[u32], out: &mut [f64]) {
        for (x, slot) in out.iter_mut().enumerate() {
            *slot = if self.log_prior[x] == f64::NEG_INFINITY {
                f64::NEG_INFINITY
            } else {
                self.log_prior[x] + self.log_conditional(x, counts)
            };
        }
    }
}

/// `log Σ_{x'≠x} exp(ℓ_{x'} − ℓ_x)`; the posterior surprisal of `x` is the
/// softplus of this value.
pub(crate) fn log_rival_ratio(ell: &[f64], x: usize) -> f64 {
    let lx = ell[x];
    log_sum_exp(ell.iter().enumerate().filter(|&(j, l)| j != x && *l > f64::NEG_INFINITY).map(|(_, l)| l - lx))
}

// ---------------------------------------------------------------------------
// Reports

/// Exact d-view information quantities for a fixed input distribution.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MultiViewReport {
    pub d: u32,
    /// `H(X)`.
    pub input_entropy: f64,
    /// `V(X)`, the varentropy of the input.
    pub input_varentropy: f64,
    /// `H(X|Y^d)`.
    pub cond_entropy: f64,
    /// `I(X;Y^d) = H(X) − H(X|Y^d)`.
    pub mutual_info: f64,
    /// `E[(ι − I)²]` evaluated from the definition.
    pub dispersion: f64,
    /// `V(X) + Var(−log P(X|Y^d)) + θ_d`.
    pub dispersion_decomposed: f64,
    /// `Var(−log P(X|Y^d))`.
    pub posterior_variance: f64,
    /// The cross term `θ_d`.
    pub cross_term: f64,
    /// `V(X) − V^(d)`, formed without cancellation against `V(X)`.
    pub dispersion_gap: f64,
}

/// Exact `H(X|Y^d)`, `I^(d)`, `V^(d)` and `θ_d` by summation over type classes.
pub fn multi_view_report(channel: &Dmc, input: &FiniteDistribution, d: u32) -> Result<MultiViewReport> {
    multi_view_report_with(channel, input, d, &EvalConfig::default())
}

pub fn multi_view_report_with(
    channel: &Dmc,
    input: &FiniteDistribution,
    d: u32,
    cfg: &EvalConfig,
) -> Result<MultiViewReport> {
    check_input(channel, input)?;
    let nx = channel.input_size();
    let k = channel.output_size();
    let lik = Likelihoods::new(channel, input);
    let h_x = entropy(input);
    let v_x = varentropy(input);

    // visits (P(x, t), posterior surprisal of x, x) for every positive-mass cell
    let visit_cells = |visit: &mut PartitionVisit<'_>, sink: &mut dyn FnMut(f64, f64, usize)| {
        let mut ell = vec![0.0; nx];
        visit(&mut |counts, lm| {
            lik.fill(counts, &mut ell);
            for x in 0..nx {
                if ell[x] == f64::NEG_INFINITY {
                    continue;
                }
                let w = (lm + ell[x]).exp();
                if w == 0.0 {
                    continue;
                }
                let s = softplus(log_rival_ratio(&ell, x));
                sink(w, s, x);
            }
        });
    };

    let first: Vec<f64> = map_type_partitions(d, k, cfg, |visit| {
        let mut acc = NeumaierSum::new();
        visit_cells(visit, &mut |w, s, _| acc.add(w * s));
        acc.value()
    })?;
    let cond_entropy = first.into_iter().collect::<NeumaierSum>().value().max(0.0);
    let mutual_info = h_x - cond_entropy;

    let log_prior = input.log_probs();
    let second: Vec<[f64; 3]> = map_type_partitions(d, k, cfg, |visit| {
        let mut def = NeumaierSum::new();
        let mut var = NeumaierSum::new();
        let mut cross = NeumaierSum::new();
        visit_cells(visit, &mut |w, s, x| {
            let iota = -s - log_prior[x];
            let dev = iota - mutual_info;
            def.add(w * dev * dev);
            let ds = s - cond_entropy;
            var.add(w * ds * ds);
            cross.add(2.0 * w * (-ds) * (-log_prior[x] - h_x));
        });
        [def.value(), var.value(), cross.value()]
    })?;
    let sum_col = |i: usize| second.iter().map(|v| v[i]).collect::<NeumaierSum>().value();
    let (dispersion, posterior_variance, cross_term) = (sum_col(0), sum_col(1), sum_col(2));
    let dispersion_decomposed = v_x + posterior_variance + cross_term;

    Ok(MultiViewReport {
        d,
        input_entropy: h_x,
        input_varentropy: v_x,
        cond_entropy,
        mutual_info,
        dispersion,
        dispersion_decomposed,
        posterior_variance,
        cross_term,
        dispersion_gap: -(posterior_variance + cross_term),
    })
}

/// `P[−log P(x|Y^d) ≥ t | X = x]`, exactly.
///
/// The event is evaluated in the equivalent form
/// `log Σ_{x'≠x} P(x')P(Y^d|x') / (P(x)P(Y^d|x)) ≥ log(e^t − 1)`.
pub fn posterior_tail(
    channel: &Dmc,
    input: &FiniteDistribution,
    x: usize,
    d: u32,
    t: f64,
    cfg: &EvalConfig,
) -> Result<f64> {
    check_input(channel, input)?;
    if x >= channel.input_size() || input.prob(x) == 0.0 {
        return Err(Error::InvalidParameter(format!("input {x} has no probability mass")));
    }
    if t <= 0.0 {
        return Ok(1.0);
    }
    let threshold = t.exp_m1().ln();
    let nx = channel.input_size();
    let lik = Likelihoods::new(channel, input);
    let parts = map_type_partitions(d, channel.output_size(), cfg, |visit| {
        let mut acc = NeumaierSum::new();
        let mut ell = vec![0.0; nx];
        visit(&mut |counts, lm| {
            lik.fill(counts, &mut ell);
            if ell[x] > f64::NEG_INFINITY && log_rival_ratio(&ell, x) >= threshold {
                acc.add((lm + lik.log_conditional(x, counts)).exp());
            }
        });
        acc.value()
    })?;
    Ok(parts.into_iter().collect::<NeumaierSum>().value().min(1.0))
}

// ---------------------------------------------------------------------------
// Convergence-rate fitting

/// Which vanishing gap a rate fit regresses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GapTarget {
    /// `H(X|Y^d)`, equivalently `H(X) − I^(d)`.
    EntropyGap,
    /// `|V(X) − V^(d)|`.
    DispersionGap,
}

impl GapTarget {
    pub fn of(self, report: &MultiViewReport) -> f64 {
        match self {
            GapTarget::EntropyGap => report.cond_entropy,
            GapTarget::DispersionGap => report.dispersion_gap.abs(),
        }
    }
}

/// Smallest gap treated as representable.
pub const GAP_FLOOR: f64 = 1e-290;

/// Fitted exponential decay rate of a gap sequence against the predicted
/// minimum pairwise Chernoff information.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentReport {
    pub target: GapTarget,
    pub d_min: u32,
    pub d_max: u32,
    pub fitted_rate: f64,
    pub log_d_coefficient: f64,
    pub predicted_rate: f64,
    pub relative_gap: f64,
}

/// Least squares of `y` on the columns `[1, d, ln d]`; returns the three
/// coefficients.
pub fn fit_log_linear(ds: &[f64], ys: &[f64]) -> [f64; 3] {
    assert_eq!(ds.len(), ys.len());
    assert!(ds.len() >= 3, "need at least three points");
    let n = ds.len() as f64;
    let mean = |v: &[f64]| v.iter().sum::<f64>() / n;
    let lds: Vec<f64> = ds.iter().map(|d| d.ln()).collect();
    let (md, ml, my) = (mean(ds), mean(&lds), mean(ys));
    // centered 2×2 normal equations
    let (mut sdd, mut sdl, mut sll, mut sdy, mut sly) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for i in 0..ds.len() {
        let (a, b, y) = (ds[i] - md, lds[i] - ml, ys[i] - my);
        sdd += a * a;
        sdl += a * b;
        sll += b * b;
        sdy += a * y;
        sly += b * y;
    }
    let det = sdd * sll - sdl * sdl;
    let beta_d = (sdy * sll - sly * sdl) / det;
    let beta_l = (sly * sdd - sdy * sdl) / det;
    [my - beta_d * md - beta_l * ml, beta_d, beta_l]
}

/// Regresses `log gap_d` on `(d, log d)` over `d_min..=d_max` and compares
/// the slope with the minimum pairwise Chernoff information over the input
/// support.
pub fn fit_convergence_rate(
    channel: &Dmc,
    input: &FiniteDistribution,
    d_min: u32,
    d_max: u32,
    target: GapTarget,
    cfg: &EvalConfig,
) -> Result<ExponentReport> {
    if d_min < 2 || d_max < d_min + 2 {
        return Err(Error::InvalidParameter(format!(
            "rate window [{d_min}, {d_max}] needs d_min ≥ 2 and at least three points"
        )));
    }
    let ds: Vec<u32> = (d_min..=d_max).collect();
    let inner = EvalConfig { exec: Exec::Sequential, ..*cfg };
    let reports = cfg.exec.map(ds.clone(), |d| multi_view_report_with(channel, input, d, &inner));
    let mut gaps = Vec::with_capacity(ds.len());
    let mut largest_usable = None;
    for (d, r) in ds.iter().zip(reports) {
        let g = target.of(&r?);
        if !(g > GAP_FLOOR) {
            return Err(Error::GapUnderflow { d: *d as usize, largest_usable });
        }
        largest_usable = Some(*d as usize);
        gaps.push(g.ln());
    }
    let xs: Vec<f64> = ds.iter().map(|&d| d as f64).collect();
    let [_, slope, log_coef] = fit_log_linear(&xs, &gaps);
    let fitted_rate = -slope;
    let predicted_rate = channel.min_pair_chernoff(Some(input))?;
    Ok(ExponentReport {
        target,
        d_min,
        d_max,
        fitted_rate,
        log_d_coefficient: log_coef,
        predicted_rate,
        relative_gap: (fitted_rate - predicted_rate).abs() / predicted_rate,
    })
}

/// The largest window of `width` consecutive `d ≤ d_cap` whose gaps all
/// exceed [`GAP_FLOOR`].
pub fn auto_window(
    channel: &Dmc,
    input: &FiniteDistribution,
    target: GapTarget,
    width: u32,
    d_cap: u32,
    cfg: &EvalConfig,
) -> Result<(u32, u32)> {
    let mut run_start = 2;
    let mut best = None;
    for d in 2..=d_cap {
        let g = target.of(&multi_view_report_with(channel, input, d, cfg)?);
        if g > GAP_FLOOR {
            if d + 1 >= run_start + width {
                best = Some((d + 1 - width, d));
            }
        } else {
            run_start = d + 1;
            if best.is_some() {
                break;
            }
        }
    }
    best.ok_or(Error::GapUnderflow { d: run_start as usize, largest_usable: None })
}
