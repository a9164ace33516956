//! Binary deletion channel: subsequence counts, the `f_λ` overlap between the
//! output laws of two inputs, the exact pairwise rate `ρ_n` for short blocks,
//! and three upper bounds on it.
//!
//! Under `Del(δ)` an input `x` of length `n` produces `y` of length `m` with
//! probability `δ^{n−m}(1−δ)^m N(x→y)`, where `N(x→y)` counts the index
//! subsets of `x` spelling `y`. Counts are exact `u128`; they enter floating
//! point only as logarithms inside `f_λ`.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::prob_core::{binomial_ln_masses, ln_binomial_positive_moment, log_sum_exp};
use crate::search::maximize_unimodal;

/// Longest supported string.
pub const MAX_LEN: usize = 64;
/// Bracket tolerance of the λ searches.
pub const LAMBDA_SEARCH_TOL: f64 = 1e-10;
/// Unordered pairs at `n = 8`; the default ceiling of the exhaustive search.
pub const DEFAULT_PAIR_BUDGET: u128 = 32_640;
/// Ceiling on distinct subsequences stored per count table.
pub const DEFAULT_TABLE_BUDGET: usize = 1 << 22;

/// A binary string of length at most 64. Symbol `i` is bit `i` of `bits`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct BitString {
    len: u8,
    bits: u64,
}

fn mask(len: usize) -> u64 {
    if len == 64 {
        u64::MAX
    } else {
        (1u64 << len) - 1
    }
}

impl BitString {
    pub const EMPTY: BitString = BitString { len: 0, bits: 0 };

    pub fn new(len: usize, bits: u64) -> Result<Self> {
        if len > MAX_LEN {
            return Err(Error::InvalidParameter(format!("string length {len} exceeds {MAX_LEN}")));
        }
        if bits & !mask(len) != 0 {
            return Err(Error::InvalidParameter(format!("bits {bits:#x} do not fit in length {len}")));
        }
        Ok(BitString { len: len as u8, bits })
    }

    pub fn parse(s: &str) -> Result<Self> {
        if s.len() > MAX_LEN {
            return Err(Error::InvalidParameter(format!("string length {} exceeds {MAX_LEN}", s.len())));
        }
        let mut bits = 0u64;
        for (i, c) in s.chars().enumerate() {
            match c {
                '0' => {}
                '1' => bits |= 1 << i,
                _ => return Err(Error::InvalidParameter(format!("'{s}' is not a binary string"))),
            }
        }
        Ok(BitString { len: s.len() as u8, bits })
    }

    pub fn zeros(n: usize) -> Result<Self> {
        Self::new(n, 0)
    }

    /// `0101…` (or `1010…` when `first` is 1).
    pub fn alternating(n: usize, first: u8) -> Result<Self> {
        let even = 0x5555_5555_5555_5555u64 & mask(n.min(MAX_LEN));
        let bits = if first == 0 { !even & mask(n.min(MAX_LEN)) } else { even };
        Self::new(n, bits)
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn bits(&self) -> u64 {
        self.bits
    }

    pub fn get(&self, i: usize) -> u8 {
        ((self.bits >> i) & 1) as u8
    }

    pub fn complement(&self) -> Self {
        BitString { len: self.len, bits: !self.bits & mask(self.len()) }
    }

    pub fn reverse(&self) -> Self {
        if self.len == 0 {
            return *self;
        }
        BitString { len: self.len, bits: self.bits.reverse_bits() >> (64 - self.len()) }
    }

    /// Appends one symbol. Panics past 64 symbols.
    pub fn push(&self, b: u8) -> Self {
        assert!(self.len() < MAX_LEN, "bit string overflow");
        BitString { len: self.len + 1, bits: self.bits | ((b as u64 & 1) << self.len) }
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len() {
            f.write_str(if self.get(i) == 1 { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl TryFrom<String> for BitString {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        BitString::parse(&s)
    }
}

impl From<BitString> for String {
    fn from(b: BitString) -> String {
        b.to_string()
    }
}

/// Number of index subsets of `u` that spell `v`.
pub fn subsequence_count(u: &BitString, v: &BitString) -> Result<u128> {
    if v.len() > u.len() {
        return Err(Error::InvalidParameter(format!("pattern length {} exceeds string length {}", v.len(), u.len())));
    }
    let m = v.len();
    let mut dp = vec![0u128; m + 1];
    dp[0] = 1;
    for i in 0..u.len() {
        let c = u.get(i);
        for j in (1..=m).rev() {
            if v.get(j - 1) == c {
                dp[j] += dp[j - 1];
            }
        }
    }
    Ok(dp[m])
}

/// Exact binomial coefficient.
pub fn choose_u128(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut c: u128 = 1;
    for i in 0..k {
        c = c * (n - i) as u128 / (i + 1) as u128;
    }
    c
}

/// Both sides of the two Chu–Vandermonde identities for even `n` and output
/// length `m ≤ n`, with `h = n/2`:
/// `Σ_w C(m,w)C(h,w) = C(h+m, m)` and `Σ_w C(h,w)C(h, n−m−w) = C(n, n−m)`.
pub fn vandermonde_identities(n: u64, m: u64) -> [(u128, u128); 2] {
    let h = n / 2;
    let lhs1 = (0..=m).map(|w| choose_u128(m, w) * choose_u128(h, w)).sum();
    let lhs2 = (0..=(n - m)).map(|w| choose_u128(h, w) * choose_u128(h, n - m - w)).sum();
    [(lhs1, choose_u128(h + m, m)), (lhs2, choose_u128(n, n - m))]
}

/// `N(x→y)` for every distinct subsequence `y` of `x`, sorted by `y`.
#[derive(Clone, Debug, PartialEq)]
pub struct CountTable {
    source: BitString,
    entries: Vec<(BitString, u128)>,
}

impl CountTable {
    /// Builds the table by extending every distinct subsequence one symbol at
    /// a time. Fails once more than `max_entries` distinct subsequences exist.
    pub fn build(x: &BitString, max_entries: usize) -> Result<Self> {
        let mut map: HashMap<BitString, u128> = HashMap::new();
        map.insert(BitString::EMPTY, 1);
        for i in 0..x.len() {
            let c = x.get(i);
            let snapshot: Vec<(BitString, u128)> = map.iter().map(|(k, v)| (*k, *v)).collect();
            for (y, cnt) in snapshot {
                *map.entry(y.push(c)).or_insert(0) += cnt;
            }
            if map.len() > max_entries {
                return Err(Error::BudgetExceeded { needed: map.len() as u128, budget: max_entries as u128 });
            }
        }
        let mut entries: Vec<_> = map.into_iter().collect();
        entries.sort_unstable_by_key(|e| e.0);
        Ok(CountTable { source: *x, entries })
    }

    pub fn source(&self) -> &BitString {
        &self.source
    }

    pub fn entries(&self) -> &[(BitString, u128)] {
        &self.entries
    }

    pub fn get(&self, y: &BitString) -> u128 {
        self.entries.binary_search_by_key(y, |e| e.0).map(|i| self.entries[i].1).unwrap_or(0)
    }

    /// `Σ_{|y| = m} N(x→y)` for `m = 0..=n`.
    pub fn mass_by_length(&self) -> Vec<u128> {
        let mut out = vec![0u128; self.source.len() + 1];
        for (y, c) in &self.entries {
            out[y.len()] += c;
        }
        out
    }
}

/// `(log-weight, log-ratio)` for each common output `y`: `f_λ = Σ exp(w + λ r)`
/// with `w = log(δ^{n−m}(1−δ)^m N(x→y))` and `r = log N(x̃→y) − log N(x→y)`.
fn pair_kernel(a: &CountTable, b: &CountTable, delta: f64) -> Vec<(f64, f64)> {
    let n = a.source.len() as f64;
    let (ld, le) = (delta.ln(), (-delta).ln_1p());
    let (ea, eb) = (&a.entries, &b.entries);
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < ea.len() && j < eb.len() {
        match ea[i].0.cmp(&eb[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                let m = ea[i].0.len() as f64;
                let (na, nb) = ((ea[i].1 as f64).ln(), (eb[j].1 as f64).ln());
                out.push(((n - m) * ld + m * le + na, nb - na));
                i += 1;
                j += 1;
            }
        }
    }
    out
}

/// `−log f_λ` from the kernel, continued to the closed interval.
fn kernel_objective(kernel: &[(f64, f64)], lam: f64) -> f64 {
    -log_sum_exp(kernel.iter().map(|&(w, r)| w + lam * r))
}

fn kernel_rate(kernel: &[(f64, f64)]) -> f64 {
    maximize_unimodal(|l| kernel_objective(kernel, l), 0.0, 1.0, LAMBDA_SEARCH_TOL).1.max(0.0)
}

fn check_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("deletion probability {delta} must lie in (0,1)")))
    }
}

/// Two equal-length inputs to `Del(δ)` with their count tables.
#[derive(Clone, Debug)]
pub struct DeletionInstance {
    pub n: usize,
    pub delta: f64,
    pub x: BitString,
    pub x_tilde: BitString,
    pub count_tables: [CountTable; 2],
    kernel: Vec<(f64, f64)>,
}

impl DeletionInstance {
    pub fn new(x: BitString, x_tilde: BitString, delta: f64) -> Result<Self> {
        Self::with_budget(x, x_tilde, delta, DEFAULT_TABLE_BUDGET)
    }

    pub fn with_budget(x: BitString, x_tilde: BitString, delta: f64, max_entries: usize) -> Result<Self> {
        check_delta(delta)?;
        if x.len() != x_tilde.len() || x.is_empty() {
            return Err(Error::InvalidParameter(format!(
                "strings must be nonempty and of equal length (got {} and {})",
                x.len(),
                x_tilde.len()
            )));
        }
        let ta = CountTable::build(&x, max_entries)?;
        let tb = CountTable::build(&x_tilde, max_entries)?;
        let kernel = pair_kernel(&ta, &tb, delta);
        Ok(DeletionInstance { n: x.len(), delta, x, x_tilde, count_tables: [ta, tb], kernel })
    }
}

/// `f_λ(x, x̃) = Σ_m δ^{n−m}(1−δ)^m Σ_y N(x→y)^{1−λ} N(x̃→y)^λ`, equal to 1 at
/// `λ ∈ {0, 1}` by convention.
pub fn f_lambda(inst: &DeletionInstance, lam: f64) -> f64 {
    if !(lam > 0.0 && lam < 1.0) {
        return 1.0;
    }
    (-kernel_objective(&inst.kernel, lam)).exp().min(1.0)
}

/// `sup_{λ∈(0,1)} −log f_λ(x, x̃)` in nats.
pub fn rho_pair(inst: &DeletionInstance) -> Result<f64> {
    if inst.x == inst.x_tilde {
        return Err(Error::IdenticalStrings);
    }
    Ok(kernel_rate(&inst.kernel))
}

/// `−n log δ`.
pub fn bound_naive(n: usize, delta: f64) -> f64 {
    -(n as f64) * delta.ln()
}

/// `max_{λ∈[0,1]} λ log n − log E[L^λ]`, `L ~ Bin(n, δ)`. This is the rate of
/// the pair `(0ⁿ, 0ⁿ⁻¹1)`.
pub fn bound_fractional(n: u64, delta: f64) -> Result<f64> {
    check_delta(delta)?;
    if n == 0 {
        return Err(Error::InvalidParameter("block length must be positive".into()));
    }
    let masses = binomial_ln_masses(n, delta);
    let ln_n = (n as f64).ln();
    let g = |l: f64| l * ln_n - ln_binomial_positive_moment(&masses, l);
    Ok(maximize_unimodal(g, 0.0, 1.0, LAMBDA_SEARCH_TOL).1.max(0.0))
}

/// Exact rate of the alternating pair `(0101…, 1010…)` for even `n`.
pub fn bound_alternating(n: usize, delta: f64, max_entries: usize) -> Result<f64> {
    if n == 0 || n % 2 == 1 || n > MAX_LEN {
        return Err(Error::InvalidParameter(format!("alternating bound needs even n in 2..=64, got {n}")));
    }
    let inst = DeletionInstance::with_budget(
        BitString::alternating(n, 0)?,
        BitString::alternating(n, 1)?,
        delta,
        max_entries,
    )?;
    rho_pair(&inst)
}

/// Exhaustive-search settings.
#[derive(Clone, Copy, Debug)]
pub struct PairSearchConfig {
    pub pair_budget: u128,
    pub table_budget: usize,
    pub exec: Exec,
}

impl Default for PairSearchConfig {
    fn default() -> Self {
        PairSearchConfig { pair_budget: DEFAULT_PAIR_BUDGET, table_budget: DEFAULT_TABLE_BUDGET, exec: Exec::default() }
    }
}

/// Unordered pairs of distinct length-`n` strings, before symmetry pruning.
pub fn pair_search_cost(n: usize) -> Option<u128> {
    if n >= 64 {
        return None;
    }
    let s = 1u128 << n;
    Some(s * (s - 1) / 2)
}

/// `ρ_n` and the three bounds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RhoBoundReport {
    pub n: usize,
    pub delta: f64,
    pub rho_exact: Option<f64>,
    pub bound_naive: f64,
    /// Absent for odd `n`.
    pub bound_alternating: Option<f64>,
    pub bound_fractional: f64,
    pub argmin_pair: Option<(BitString, BitString)>,
}

/// One evaluated pair of the search.
#[derive(Clone, Debug, PartialEq)]
pub struct PairTrace {
    pub x: BitString,
    pub x_tilde: BitString,
    pub rho: f64,
}

/// Whether `(a, b)` with `a < b` is the smallest member of its orbit under
/// complementation and reversal applied to both strings.
fn is_canonical(a: BitString, b: BitString) -> bool {
    let ord = |p: BitString, q: BitString| if p < q { (p, q) } else { (q, p) };
    [
        ord(a.complement(), b.complement()),
        ord(a.reverse(), b.reverse()),
        ord(a.complement().reverse(), b.complement().reverse()),
    ]
    .iter()
    .all(|&img| (a, b) <= img)
}

/// Bounds that do not need the pair search.
pub fn rho_bounds(n: usize, delta: f64, table_budget: usize) -> Result<RhoBoundReport> {
    check_delta(delta)?;
    if n == 0 || n > MAX_LEN {
        return Err(Error::InvalidParameter(format!("block length {n} must lie in 1..=64")));
    }
    let bound_alternating = if n.is_multiple_of(2) { Some(bound_alternating(n, delta, table_budget)?) } else { None };
    Ok(RhoBoundReport {
        n,
        delta,
        rho_exact: None,
        bound_naive: bound_naive(n, delta),
        bound_alternating,
        bound_fractional: bound_fractional(n as u64, delta)?,
        argmin_pair: None,
    })
}

/// `ρ_n` by exhaustive search over pair orbits, with all bounds.
pub fn rho_n_exact(n: usize, delta: f64, cfg: &PairSearchConfig) -> Result<RhoBoundReport> {
    rho_n_search(n, delta, cfg, false).map(|r| r.0)
}

/// As [`rho_n_exact`], optionally returning every evaluated pair in search
/// order.
pub fn rho_n_search(
    n: usize,
    delta: f64,
    cfg: &PairSearchConfig,
    keep_trace: bool,
) -> Result<(RhoBoundReport, Vec<PairTrace>)> {
    let mut report = rho_bounds(n, delta, cfg.table_budget)?;
    let needed = pair_search_cost(n).unwrap_or(u128::MAX);
    if needed > cfg.pair_budget {
        return Err(Error::BudgetExceeded { needed, budget: cfg.pair_budget });
    }
    let strings: Vec<BitString> = (0..1u64 << n).map(|b| BitString { len: n as u8, bits: b }).collect();
    let tables = cfg.exec.map(strings.clone(), |s| CountTable::build(&s, cfg.table_budget));
    let tables = tables.into_iter().collect::<Result<Vec<_>>>()?;
    let rows = cfg.exec.map((0..strings.len()).collect(), |i| {
        let mut best: Option<PairTrace> = None;
        let mut trace = Vec::new();
        for j in i + 1..strings.len() {
            if !is_canonical(strings[i], strings[j]) {
                continue;
            }
            let rho = kernel_rate(&pair_kernel(&tables[i], &tables[j], delta));
            let t = PairTrace { x: strings[i], x_tilde: strings[j], rho };
            if best.as_ref().is_none_or(|b| rho < b.rho) {
                best = Some(t.clone());
            }
            if keep_trace {
                trace.push(t);
            }
        }
        (best, trace)
    });
    let mut best: Option<PairTrace> = None;
    let mut trace = Vec::new();
    for (b, t) in rows {
        if let Some(b) = b {
            if best.as_ref().is_none_or(|cur| b.rho < cur.rho) {
                best = Some(b);
            }
        }
        trace.extend(t);
    }
    let best = best.expect("n >= 1 has at least one pair");
    report.rho_exact = Some(best.rho);
    report.argmin_pair = Some((best.x, best.x_tilde));
    Ok((report, trace))
}
