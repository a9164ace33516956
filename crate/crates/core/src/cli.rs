//! Command-line front end.
//!
//! [`run`] parses arguments, evaluates one command and writes a CSV or JSON
//! report. Output depends only on the arguments, so repeated runs are
//! byte-identical. Exit codes: 0 success, 2 invalid input, 3 budget
//! exceeded, 4 failed invariant check.

use std::ffi::OsString;
use std::io::Write;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::deletion::{self, PairSearchConfig, DEFAULT_PAIR_BUDGET, DEFAULT_TABLE_BUDGET};
use crate::error::Error;
use crate::exec::Exec;
use crate::fbl_rates::{normal_approx_rate, FblQuery, RATE_LABEL};
use crate::largedev::{exponent, primal_sanov_oracle, LlrProfile, DEFAULT_GRID_RESOLUTION};
use crate::multiview_dmc::{
    auto_window, fit_convergence_rate, multi_view_report_with, Dmc, EvalConfig, GapTarget, DEFAULT_TYPE_BUDGET,
};
use crate::prob_core::{chernoff_with_lambda, FiniteDistribution};
use crate::report::{Cell, Format, Kind, Table, Unit};
use crate::special_channels::{
    binomial_capacity, figure1_sweep, poisson_capacity, BinomialChannelSpec, PoissonChannelSpec, DEFAULT_TAIL_TOL,
};

/// Seed used when `--seed` is not given.
pub const DEFAULT_SEED: u64 = 24_301;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_BUDGET: i32 = 3;
pub const EXIT_INVARIANT: i32 = 4;

const INVARIANT_TOL: f64 = 1e-9;

#[derive(Parser, Debug)]
#[command(name = "multiview", version, about = "Exact multi-view channel quantities and related special channels")]
pub struct Cli {
    /// Information unit of the output (computation is always in nats).
    #[arg(long, value_enum, default_value_t = Unit::Nats, global = true)]
    pub unit: Unit,
    #[arg(long, value_enum, default_value_t = Format::Csv, global = true)]
    pub format: Format,
    /// Seed for randomly generated channels (`random:KxM`).
    #[arg(long, default_value_t = DEFAULT_SEED, global = true)]
    pub seed: u64,
    /// Worker threads; 0 uses every core, 1 runs sequentially.
    #[arg(long, default_value_t = 0, global = true)]
    pub threads: usize,
    /// Maximum number of output type classes per evaluation.
    #[arg(long, default_value_t = DEFAULT_TYPE_BUDGET, global = true)]
    pub type_budget: u128,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Chernoff information between every pair of channel rows.
    Chernoff(ChannelArgs),
    /// Conditional entropy and mutual information of the d-view channel.
    Mvinfo(ViewsArgs),
    /// Dispersion of the d-view channel and its decomposition.
    Dispersion(ViewsArgs),
    /// Fit the exponential decay rate of a vanishing gap.
    RateFit(RateFitArgs),
    /// Capacity of the binomial channel.
    BinCap(BinCapArgs),
    /// Capacity of the Poisson approximation channel.
    PoiCap(PoiCapArgs),
    /// Binomial vs Poisson capacity sweep with the sandwich bound.
    PoiSandwich(SandwichArgs),
    /// Exact deletion-channel rate for one block length, with bounds.
    DelRho(DelRhoArgs),
    /// Deletion-channel upper bounds over a grid.
    DelBounds(DelBoundsArgs),
    /// Dual exponent vs primal grid oracle.
    Sanov(SanovArgs),
    /// Normal-approximation rates.
    Fbl(FblArgs),
}

#[derive(Args, Debug)]
pub struct ChannelArgs {
    /// `bsc:p`, `bec:e`, `zchan:d`, `random:KxM` or `file:path`.
    #[arg(long)]
    pub channel: String,
    /// `uniform` or comma-separated probabilities.
    #[arg(long, default_value = "uniform")]
    pub input: String,
}

#[derive(Args, Debug)]
pub struct ViewsArgs {
    #[command(flatten)]
    pub channel: ChannelArgs,
    /// Comma-separated view counts.
    #[arg(long, value_delimiter = ',', required = true)]
    pub d: Vec<u32>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum TargetArg {
    Entropy,
    Dispersion,
}

#[derive(Args, Debug)]
pub struct RateFitArgs {
    #[command(flatten)]
    pub channel: ChannelArgs,
    #[arg(long, value_enum, default_value_t = TargetArg::Entropy)]
    pub target: TargetArg,
    /// Window start; with `--d-max` omitted a window is chosen automatically.
    #[arg(long)]
    pub d_min: Option<u32>,
    #[arg(long)]
    pub d_max: Option<u32>,
    /// Width of the automatic window.
    #[arg(long, default_value_t = 21)]
    pub width: u32,
    /// Largest d considered by the automatic window.
    #[arg(long, default_value_t = 200)]
    pub d_cap: u32,
}

#[derive(Args, Debug)]
pub struct BinCapArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    pub d: Vec<u64>,
    #[arg(long, value_delimiter = ',', required = true)]
    pub p: Vec<f64>,
}

#[derive(Args, Debug)]
pub struct PoiCapArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    pub d: Vec<f64>,
    #[arg(long, value_delimiter = ',', required = true)]
    pub p: Vec<f64>,
    #[arg(long, default_value_t = DEFAULT_TAIL_TOL)]
    pub tail_tol: f64,
}

#[derive(Args, Debug)]
pub struct SandwichArgs {
    #[arg(long, value_delimiter = ',', default_value = "3,6,12,24")]
    pub d: Vec<u64>,
    /// `start:stop:step`, inclusive of both ends.
    #[arg(long, default_value = "0:1:0.01")]
    pub p_grid: Grid,
}

#[derive(Args, Debug)]
pub struct DelRhoArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub delta: f64,
    /// Lift the default pair budget (n ≤ 8); the cost estimate is printed first.
    #[arg(long)]
    pub allow_large: bool,
    /// Write every evaluated pair to this CSV file.
    #[arg(long)]
    pub trace: Option<std::path::PathBuf>,
    #[arg(long, default_value_t = DEFAULT_TABLE_BUDGET)]
    pub table_budget: usize,
}

#[derive(Args, Debug)]
pub struct DelBoundsArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    pub n: Vec<usize>,
    #[arg(long, value_delimiter = ',', required = true)]
    pub delta: Vec<f64>,
    /// Also run the exact search where the default pair budget allows it.
    #[arg(long)]
    pub exact: bool,
    #[arg(long, default_value_t = DEFAULT_TABLE_BUDGET)]
    pub table_budget: usize,
}

#[derive(Args, Debug)]
pub struct SanovArgs {
    #[command(flatten)]
    pub channel: ChannelArgs,
    #[arg(long, default_value_t = 0)]
    pub x: usize,
    #[arg(long, default_value_t = 1)]
    pub x_tilde: usize,
    /// Comma-separated thresholds.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, conflicts_with = "v_grid")]
    pub v: Vec<f64>,
    /// `start:stop:step` grid of thresholds.
    #[arg(long, allow_hyphen_values = true)]
    pub v_grid: Option<Grid>,
    #[arg(long, default_value_t = DEFAULT_GRID_RESOLUTION)]
    pub resolution: u32,
}

#[derive(Args, Debug)]
pub struct FblArgs {
    #[command(flatten)]
    pub channel: ChannelArgs,
    #[arg(long, value_delimiter = ',', required = true)]
    pub n: Vec<u64>,
    #[arg(long, value_delimiter = ',', required = true)]
    pub epsilon: Vec<f64>,
    #[arg(long, value_delimiter = ',', required = true)]
    pub d: Vec<u32>,
}

/// An inclusive arithmetic grid `start:stop:step`.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid(pub Vec<f64>);

impl FromStr for Grid {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<f64> = s
            .split(':')
            .map(|t| t.trim().parse::<f64>().map_err(|e| format!("bad grid {s:?}: {e}")))
            .collect::<Result<_, _>>()?;
        let [lo, hi, step] = parts[..] else {
            return Err(format!("grid {s:?} must be start:stop:step"));
        };
        if !(step > 0.0) || !(hi >= lo) || !lo.is_finite() || !hi.is_finite() {
            return Err(format!("grid {s:?} needs start ≤ stop and a positive step"));
        }
        let n = ((hi - lo) / step + 1e-9).floor() as u64;
        if n > 10_000_000 {
            return Err(format!("grid {s:?} has too many points"));
        }
        // points computed from the endpoints so that 0:1:0.01 ends exactly at 1
        let span = n as f64 * step;
        Ok(Grid(
            (0..=n).map(|i| if i == n { lo + span } else { lo + i as f64 * step }).map(|x| clean(x, step)).collect(),
        ))
    }
}

/// Rounds away representation noise below `step · 1e-9`.
fn clean(x: f64, step: f64) -> f64 {
    let digits = (-(step.log10()).floor() as i32 + 9).clamp(0, 15);
    let scale = 10f64.powi(digits);
    (x * scale).round() / scale
}

/// Why a run failed.
#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    Compute(Error),
    Input(String),
    Invariant(Vec<String>),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Compute(e)
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Compute(Error::BudgetExceeded { .. }) => EXIT_BUDGET,
            CliError::Compute(_) | CliError::Input(_) => EXIT_INVALID,
            CliError::Invariant(_) => EXIT_INVARIANT,
        }
    }
}

/// Parses a channel specification. `random:KxM` draws from `seed`.
pub fn parse_channel(spec: &str, seed: u64) -> Result<Dmc, CliError> {
    let (kind, arg) = spec
        .split_once(':')
        .ok_or_else(|| CliError::Input(format!("channel {spec:?} must look like kind:argument")))?;
    let num = || arg.parse::<f64>().map_err(|e| CliError::Input(format!("channel {spec:?}: {e}")));
    Ok(match kind {
        "bsc" => Dmc::bsc(num()?)?,
        "bec" => Dmc::bec(num()?)?,
        "zchan" => Dmc::z_channel(num()?)?,
        "random" => {
            let (a, b) = arg
                .split_once('x')
                .ok_or_else(|| CliError::Input(format!("random channel {spec:?} must be random:KxM")))?;
            let parse = |t: &str| t.parse::<usize>().map_err(|e| CliError::Input(format!("channel {spec:?}: {e}")));
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            Dmc::random(&mut rng, parse(a)?, parse(b)?)?
        }
        "file" => {
            let text = std::fs::read_to_string(arg)
                .map_err(|e| CliError::Compute(Error::MalformedChannel(format!("{arg}: {e}"))))?;
            Dmc::parse(&text)?
        }
        _ => return Err(CliError::Input(format!("unknown channel kind {kind:?}"))),
    })
}

/// Parses `uniform` or comma-separated probabilities for `k` inputs.
pub fn parse_input(spec: &str, k: usize) -> Result<FiniteDistribution, CliError> {
    if spec == "uniform" {
        return Ok(FiniteDistribution::uniform(k)?);
    }
    let probs: Vec<f64> = spec
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| CliError::Input(format!("input {spec:?}: {e}"))))
        .collect::<Result<_, _>>()?;
    if probs.len() != k {
        return Err(Error::AlphabetMismatch(probs.len(), k).into());
    }
    Ok(FiniteDistribution::new(probs)?)
}

struct Ctx {
    seed: u64,
    exec: Exec,
    cfg: EvalConfig,
}

impl Ctx {
    fn channel(&self, a: &ChannelArgs) -> Result<(Dmc, FiniteDistribution), CliError> {
        let ch = parse_channel(&a.channel, self.seed)?;
        let input = parse_input(&a.input, ch.input_size())?;
        Ok((ch, input))
    }

    fn table(&self, command: &str) -> Table {
        Table::new(command).meta("seed", self.seed)
    }
}

/// A rendered table plus the messages of any failed invariant checks.
struct Outcome {
    table: Table,
    violations: Vec<String>,
}

impl Outcome {
    fn ok(table: Table) -> Self {
        Outcome { table, violations: vec![] }
    }
}

fn check(violations: &mut Vec<String>, ok: bool, msg: impl FnOnce() -> String) {
    if !ok {
        violations.push(msg());
    }
}

fn cmd_chernoff(ctx: &Ctx, a: &ChannelArgs) -> Result<Outcome, CliError> {
    let (ch, input) = ctx.channel(a)?;
    let mut t = ctx
        .table("chernoff")
        .meta("channel", &a.channel)
        .column("x", Kind::Plain)
        .column("x_tilde", Kind::Plain)
        .column("chernoff", Kind::Info)
        .column("lambda", Kind::Plain);
    let support: Vec<usize> = input.support().collect();
    for (i, &x) in support.iter().enumerate() {
        for &y in &support[i + 1..] {
            let (c, lam) = chernoff_with_lambda(ch.row(x), ch.row(y))?;
            t.push(vec![x.into(), y.into(), c.into(), lam.into()]);
        }
    }
    Ok(Outcome::ok(t))
}

fn cmd_mvinfo(ctx: &Ctx, a: &ViewsArgs) -> Result<Outcome, CliError> {
    let (ch, input) = ctx.channel(&a.channel)?;
    let mut t = ctx
        .table("mvinfo")
        .meta("channel", &a.channel.channel)
        .meta("input", &a.channel.input)
        .column("d", Kind::Plain)
        .column("input_entropy", Kind::Info)
        .column("cond_entropy", Kind::Info)
        .column("mutual_info", Kind::Info);
    let mut violations = vec![];
    let inner = EvalConfig { exec: Exec::Sequential, ..ctx.cfg };
    let reports = ctx.exec.map(a.d.clone(), |d| multi_view_report_with(&ch, &input, d, &inner));
    for r in reports {
        let r = r?;
        check(
            &mut violations,
            r.cond_entropy >= -INVARIANT_TOL && r.cond_entropy <= r.input_entropy + INVARIANT_TOL,
            || format!("d={}: H(X|Y^d) = {} outside [0, H(X)]", r.d, r.cond_entropy),
        );
        t.push(vec![r.d.into(), r.input_entropy.into(), r.cond_entropy.into(), r.mutual_info.into()]);
    }
    Ok(Outcome { table: t, violations })
}

fn cmd_dispersion(ctx: &Ctx, a: &ViewsArgs) -> Result<Outcome, CliError> {
    let (ch, input) = ctx.channel(&a.channel)?;
    let mut t = ctx
        .table("dispersion")
        .meta("channel", &a.channel.channel)
        .meta("input", &a.channel.input)
        .column("d", Kind::Plain)
        .column("dispersion", Kind::Info2)
        .column("dispersion_decomposed", Kind::Info2)
        .column("input_varentropy", Kind::Info2)
        .column("posterior_variance", Kind::Info2)
        .column("cross_term", Kind::Info2)
        .column("dispersion_gap", Kind::Info2);
    let mut violations = vec![];
    let inner = EvalConfig { exec: Exec::Sequential, ..ctx.cfg };
    let reports = ctx.exec.map(a.d.clone(), |d| multi_view_report_with(&ch, &input, d, &inner));
    for r in reports {
        let r = r?;
        check(&mut violations, (r.dispersion - r.dispersion_decomposed).abs() <= INVARIANT_TOL, || {
            format!("d={}: dispersion {} vs decomposition {}", r.d, r.dispersion, r.dispersion_decomposed)
        });
        t.push(vec![
            r.d.into(),
            r.dispersion.into(),
            r.dispersion_decomposed.into(),
            r.input_varentropy.into(),
            r.posterior_variance.into(),
            r.cross_term.into(),
            r.dispersion_gap.into(),
        ]);
    }
    Ok(Outcome { table: t, violations })
}

fn cmd_rate_fit(ctx: &Ctx, a: &RateFitArgs) -> Result<Outcome, CliError> {
    let (ch, input) = ctx.channel(&a.channel)?;
    let target = match a.target {
        TargetArg::Entropy => GapTarget::EntropyGap,
        TargetArg::Dispersion => GapTarget::DispersionGap,
    };
    let (lo, hi) = match (a.d_min, a.d_max) {
        (Some(lo), Some(hi)) => (lo, hi),
        (None, None) => auto_window(&ch, &input, target, a.width, a.d_cap, &ctx.cfg)?,
        _ => return Err(CliError::Input("give both --d-min and --d-max, or neither".into())),
    };
    let r = fit_convergence_rate(&ch, &input, lo, hi, target, &ctx.cfg)?;
    let name = match target {
        GapTarget::EntropyGap => "entropy",
        GapTarget::DispersionGap => "dispersion",
    };
    let mut t = ctx
        .table("rate-fit")
        .meta("channel", &a.channel.channel)
        .meta("input", &a.channel.input)
        .column("target", Kind::Plain)
        .column("d_min", Kind::Plain)
        .column("d_max", Kind::Plain)
        .column("fitted_rate", Kind::Info)
        .column("log_d_coefficient", Kind::Plain)
        .column("predicted_rate", Kind::Info)
        .column("relative_gap", Kind::Plain);
    t.push(vec![
        name.into(),
        r.d_min.into(),
        r.d_max.into(),
        r.fitted_rate.into(),
        r.log_d_coefficient.into(),
        r.predicted_rate.into(),
        r.relative_gap.into(),
    ]);
    Ok(Outcome::ok(t))
}

fn cmd_bin_cap(ctx: &Ctx, a: &BinCapArgs) -> Result<Outcome, CliError> {
    let mut cells = vec![];
    for &d in &a.d {
        for &p in &a.p {
            cells.push(BinomialChannelSpec::new(d, p)?);
        }
    }
    let caps = ctx.exec.map(cells.clone(), binomial_capacity);
    let mut t = ctx.table("bin-cap").column("d", Kind::Plain).column("p", Kind::Plain).column("c_bin", Kind::Info);
    for (s, c) in cells.iter().zip(caps) {
        t.push(vec![s.d.into(), s.p.into(), c.into()]);
    }
    Ok(Outcome::ok(t))
}

fn cmd_poi_cap(ctx: &Ctx, a: &PoiCapArgs) -> Result<Outcome, CliError> {
    let mut cells = vec![];
    for &d in &a.d {
        for &p in &a.p {
            cells.push(PoissonChannelSpec::new(d, p, a.tail_tol)?);
        }
    }
    let caps = ctx.exec.map(cells.clone(), poisson_capacity);
    let mut t = ctx
        .table("poi-cap")
        .meta("tail_tol", a.tail_tol)
        .column("d", Kind::Plain)
        .column("p", Kind::Plain)
        .column("c_poi", Kind::Info)
        .column("truncation_bound", Kind::Info)
        .column("radius", Kind::Plain);
    for (s, c) in cells.iter().zip(caps) {
        t.push(vec![s.d.into(), s.p.into(), c.capacity.into(), c.truncation_bound.into(), c.radius.into()]);
    }
    Ok(Outcome::ok(t))
}

fn cmd_poi_sandwich(ctx: &Ctx, a: &SandwichArgs) -> Result<Outcome, CliError> {
    let rows = figure1_sweep(&a.d, &a.p_grid.0, ctx.exec)?;
    let mut t = ctx
        .table("poi-sandwich")
        .column("d", Kind::Plain)
        .column("p", Kind::Plain)
        .column("c_bin", Kind::Info)
        .column("c_poi", Kind::Info)
        .column("gap", Kind::InfoBare)
        .column("thm3_bound", Kind::InfoBare);
    let mut violations = vec![];
    for r in rows {
        check(&mut violations, r.sandwich_holds(INVARIANT_TOL), || {
            format!("d={} p={}: gap {} outside [0, {}]", r.d, r.p, r.gap, r.thm3_bound)
        });
        t.push(vec![r.d.into(), r.p.into(), r.c_bin.into(), r.c_poi.into(), r.gap.into(), r.thm3_bound.into()]);
    }
    Ok(Outcome { table: t, violations })
}

fn rho_columns(t: Table) -> Table {
    t.column("n", Kind::Plain)
        .column("delta", Kind::Plain)
        .column("rho_exact", Kind::Info)
        .column("bound_naive", Kind::Info)
        .column("bound_alternating", Kind::Info)
        .column("bound_fractional", Kind::Info)
        .column("argmin_x", Kind::Plain)
        .column("argmin_x_tilde", Kind::Plain)
}

fn rho_row(r: &deletion::RhoBoundReport, violations: &mut Vec<String>) -> Vec<Cell> {
    if let Some(rho) = r.rho_exact {
        for (name, b) in [
            ("naive", Some(r.bound_naive)),
            ("alternating", r.bound_alternating),
            ("fractional", Some(r.bound_fractional)),
        ] {
            if let Some(b) = b {
                check(violations, rho <= b + INVARIANT_TOL, || {
                    format!("n={} delta={}: rho {rho} exceeds the {name} bound {b}", r.n, r.delta)
                });
            }
        }
    }
    let (ax, ay) = match &r.argmin_pair {
        Some((x, y)) => (Cell::Text(x.to_string()), Cell::Text(y.to_string())),
        None => (Cell::Missing, Cell::Missing),
    };
    vec![
        r.n.into(),
        r.delta.into(),
        r.rho_exact.into(),
        r.bound_naive.into(),
        r.bound_alternating.into(),
        r.bound_fractional.into(),
        ax,
        ay,
    ]
}

fn cmd_del_rho(ctx: &Ctx, a: &DelRhoArgs, err: &mut dyn Write, unit: Unit) -> Result<Outcome, CliError> {
    let mut search = PairSearchConfig { table_budget: a.table_budget, exec: ctx.exec, ..Default::default() };
    if a.allow_large {
        let cost = deletion::pair_search_cost(a.n)
            .ok_or_else(|| CliError::Input(format!("block length {} is too large to search", a.n)))?;
        let _ = writeln!(err, "searching {cost} unordered pairs (before symmetry pruning) at n = {}", a.n);
        search.pair_budget = u128::MAX;
    } else {
        search.pair_budget = DEFAULT_PAIR_BUDGET;
    }
    let (report, trace) = deletion::rho_n_search(a.n, a.delta, &search, a.trace.is_some())?;
    if let Some(path) = &a.trace {
        let mut tt = ctx
            .table("del-rho-trace")
            .column("x", Kind::Plain)
            .column("x_tilde", Kind::Plain)
            .column("rho_pair", Kind::Info);
        for p in &trace {
            tt.push(vec![p.x.to_string().into(), p.x_tilde.to_string().into(), p.rho.into()]);
        }
        std::fs::write(path, tt.to_csv(unit))
            .map_err(|e| CliError::Input(format!("cannot write trace {}: {e}", path.display())))?;
    }
    let mut t = rho_columns(ctx.table("del-rho"));
    let mut violations = vec![];
    t.push(rho_row(&report, &mut violations));
    Ok(Outcome { table: t, violations })
}

fn cmd_del_bounds(ctx: &Ctx, a: &DelBoundsArgs) -> Result<Outcome, CliError> {
    let mut cells = vec![];
    for &n in &a.n {
        for &delta in &a.delta {
            cells.push((n, delta));
        }
    }
    let search = PairSearchConfig { table_budget: a.table_budget, exec: Exec::Sequential, ..Default::default() };
    let reports = ctx.exec.map(cells, |(n, delta)| {
        let within = deletion::pair_search_cost(n).is_some_and(|c| c <= search.pair_budget);
        if a.exact && within {
            deletion::rho_n_exact(n, delta, &search)
        } else {
            deletion::rho_bounds(n, delta, a.table_budget)
        }
    });
    let mut t = rho_columns(ctx.table("del-bounds"));
    let mut violations = vec![];
    for r in reports {
        t.push(rho_row(&r?, &mut violations));
    }
    Ok(Outcome { table: t, violations })
}

fn cmd_sanov(ctx: &Ctx, a: &SanovArgs) -> Result<Outcome, CliError> {
    let ch = parse_channel(&a.channel.channel, ctx.seed)?;
    let profile = LlrProfile::from_channel(&ch, a.x, a.x_tilde)?;
    let vs = match &a.v_grid {
        Some(g) => g.0.clone(),
        None if !a.v.is_empty() => a.v.clone(),
        None => return Err(CliError::Input("give --v or --v-grid".into())),
    };
    let mut t = ctx
        .table("sanov")
        .meta("channel", &a.channel.channel)
        .meta("pair", format!("{}-{}", a.x, a.x_tilde))
        .meta("resolution", a.resolution)
        .column("v", Kind::Info)
        .column("e_dual", Kind::Info)
        .column("e_primal", Kind::Info)
        .column("gap", Kind::Info);
    let mut violations = vec![];
    for v in vs {
        let dual = exponent(&profile, v);
        let primal = primal_sanov_oracle(&profile, v, a.resolution, ctx.exec)?;
        let gap = if dual.is_infinite() && primal.is_infinite() { 0.0 } else { primal - dual };
        // every grid point is feasible, so the oracle can only overshoot
        check(&mut violations, gap >= -INVARIANT_TOL, || format!("v={v}: primal {primal} below dual {dual}"));
        t.push(vec![v.into(), dual.into(), primal.into(), gap.into()]);
    }
    Ok(Outcome { table: t, violations })
}

fn cmd_fbl(ctx: &Ctx, a: &FblArgs) -> Result<Outcome, CliError> {
    let (ch, input) = ctx.channel(&a.channel)?;
    let mut queries = vec![];
    for &n in &a.n {
        for &e in &a.epsilon {
            for &d in &a.d {
                queries.push(FblQuery::new(n, e, d)?);
            }
        }
    }
    let inner = EvalConfig { exec: Exec::Sequential, ..ctx.cfg };
    let rates = ctx.exec.map(queries, |q| normal_approx_rate(&ch, &input, q, &inner));
    let mut t = ctx
        .table("fbl")
        .meta("channel", &a.channel.channel)
        .meta("input", &a.channel.input)
        .meta("method", RATE_LABEL)
        .column("n", Kind::Plain)
        .column("epsilon", Kind::Plain)
        .column("d", Kind::Plain)
        .column("rate", Kind::Info)
        .column("gap_to_entropy", Kind::Info);
    for r in rates {
        let r = r?;
        t.push(vec![
            r.query.n.into(),
            r.query.epsilon.into(),
            r.query.d.into(),
            r.rate.into(),
            r.gap_to_entropy.into(),
        ]);
    }
    Ok(Outcome::ok(t))
}

fn execute(cli: &Cli, ctx: &Ctx, err: &mut dyn Write) -> Result<Outcome, CliError> {
    match &cli.command {
        Command::Chernoff(a) => cmd_chernoff(ctx, a),
        Command::Mvinfo(a) => cmd_mvinfo(ctx, a),
        Command::Dispersion(a) => cmd_dispersion(ctx, a),
        Command::RateFit(a) => cmd_rate_fit(ctx, a),
        Command::BinCap(a) => cmd_bin_cap(ctx, a),
        Command::PoiCap(a) => cmd_poi_cap(ctx, a),
        Command::PoiSandwich(a) => cmd_poi_sandwich(ctx, a),
        Command::DelRho(a) => cmd_del_rho(ctx, a, err, cli.unit),
        Command::DelBounds(a) => cmd_del_bounds(ctx, a),
        Command::Sanov(a) => cmd_sanov(ctx, a),
        Command::Fbl(a) => cmd_fbl(ctx, a),
    }
}

#[cfg(feature = "parallel")]
fn with_pool<R: Send>(threads: usize, f: impl FnOnce() -> R + Send) -> Result<R, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Input(format!("cannot start {threads} worker threads: {e}")))?;
    Ok(pool.install(f))
}

#[cfg(not(feature = "parallel"))]
fn with_pool<R: Send>(_threads: usize, f: impl FnOnce() -> R + Send) -> Result<R, CliError> {
    Ok(f())
}

/// Runs the command line `args` (including the program name), writing the
/// report to `out` and diagnostics to `err`. Returns the exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = out.write_all(text.as_bytes());
                EXIT_OK
            } else {
                let _ = err.write_all(text.as_bytes());
                EXIT_INVALID
            };
        }
    };
    let exec = if cli.threads == 1 { Exec::Sequential } else { Exec::Parallel };
    let ctx = Ctx { seed: cli.seed, exec, cfg: EvalConfig { type_budget: cli.type_budget, exec } };
    let mut diag: Vec<u8> = vec![];
    let result = with_pool(cli.threads, || execute(&cli, &ctx, &mut diag)).and_then(|r| r);
    let _ = err.write_all(&diag);
    let outcome = match result {
        Ok(o) => o,
        Err(e) => {
            let msg = match &e {
                CliError::Compute(c) => c.to_string(),
                CliError::Input(s) => s.clone(),
                CliError::Invariant(v) => v.join("; "),
            };
            let _ = writeln!(err, "error: {msg}");
            return e.exit_code();
        }
    };
    let _ = out.write_all(outcome.table.render(cli.unit, cli.format).as_bytes());
    if outcome.violations.is_empty() {
        EXIT_OK
    } else {
        for v in &outcome.violations {
            let _ = writeln!(err, "invariant violated: {v}");
        }
        CliError::Invariant(outcome.violations).exit_code()
    }
}
