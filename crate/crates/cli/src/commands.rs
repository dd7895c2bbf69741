//! Command implementations. Each returns its rendered output and whether
//! every check it ran passed.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use heckelab::charmod::{enumerate_characters, UnitGroup};
use heckelab::dseries::{build_f, extract_u, l_factor_series, Factorization, FormalDirichletSeries, LKind};
use heckelab::eigencore::{compute_tau_series, read_tau_cache, write_tau_cache, EigenSystem};
use heckelab::kfull::{enumerate_kfull, kfull_count_table, KernelFunction};
use heckelab::sumlab::{
    compute_c2, main_term, progression_sum, shifted_sum, progression_trend, shifted_trend, C1Model, C1Value, C2Value,
};
use heckelab::LabError;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::args::{
    C1Cutoffs, C2Cutoffs, Cli, Command, ConstantsArgs, KfullCommand, ProgsumArgs, SeriesCommand, SeriesKind,
    ShiftsumArgs, SplitParam, Suite, VerifyArgs,
};
use crate::output::{Cell, Table};
use crate::suites::{self, Check};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Lab(#[from] LabError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, CliError>;

pub struct Outcome {
    pub text: String,
    pub passed: bool,
}

impl Outcome {
    fn table(cli: &Cli, table: Table) -> Self {
        Self { text: table.render(cli.format), passed: true }
    }
}

/// Column order shared by every sum and constant report.
pub const REPORT_COLUMNS: [&str; 12] =
    ["experiment", "x", "q", "k", "kernel", "S", "c1", "main", "ratio", "fitA", "fitB", "bracket"];

pub fn run(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::Tau => tau(cli),
        Command::Verify(args) => verify(cli, args),
        Command::Progsum(args) => progsum(cli, args),
        Command::Shiftsum(args) => shiftsum(cli, args),
        Command::Constants(args) => constants(cli, args),
        Command::Chars { q } => chars(cli, *q),
        Command::Series(cmd) => series(cli, cmd),
        Command::Kfull(cmd) => kfull(cli, cmd),
    }
}

/// `--n` if given (it must cover `needed`), else `needed`.
fn resolve_range(cli: &Cli, needed: usize) -> Result<usize> {
    match cli.n {
        Some(n) if n < needed => Err(CliError::Usage(format!("--n {n} is below the range {needed} this command needs"))),
        Some(n) => Ok(n),
        None => Ok(needed),
    }
}

/// `--n` if given, else `default`; either way at least `min`.
fn range_or(cli: &Cli, default: usize, min: usize) -> Result<usize> {
    let n = cli.n.unwrap_or(default);
    if n < min {
        return Err(CliError::Usage(format!("--n must be >= {min}, got {n}")));
    }
    Ok(n)
}

/// τ(1..=n), from the cache when it covers `n`; otherwise computed and,
/// with a cache path, written back.
fn load_tau(cache: Option<&Path>, n: usize) -> Result<Vec<i128>> {
    if let Some(path) = cache.filter(|p| p.exists()) {
        let mut tau = read_tau_cache(BufReader::new(File::open(path)?))?;
        if tau.len() > n {
            tau.truncate(n + 1);
            return Ok(tau);
        }
    }
    let tau = compute_tau_series(n)?;
    if let Some(path) = cache {
        let mut out = BufWriter::new(File::create(path)?);
        write_tau_cache(&mut out, &tau)?;
        out.flush()?;
    }
    Ok(tau)
}

fn load_eigen(cli: &Cli, n: usize) -> Result<EigenSystem> {
    Ok(EigenSystem::from_tau(load_tau(cli.cache.as_deref(), n)?)?)
}

fn tau(cli: &Cli) -> Result<Outcome> {
    let n = cli.n.ok_or_else(|| CliError::Usage("tau needs --n".into()))?;
    if n == 0 {
        return Err(CliError::Usage("--n must be >= 1".into()));
    }
    let tau = load_tau(cli.cache.as_deref(), n)?;
    let mut canonical = Vec::new();
    write_tau_cache(&mut canonical, &tau)?;
    let digest = Sha256::digest(&canonical);
    let mut table = Table::new(&["n", "tau_n", "sha256"]);
    table.push(vec![n.into(), tau[n].into(), format!("{digest:x}").into()]);
    Ok(Outcome::table(cli, table))
}

fn non_empty<'a, T: Clone>(given: &'a [T], default: &'a [T]) -> Vec<T> {
    if given.is_empty() { default.to_vec() } else { given.to_vec() }
}

fn verify(cli: &Cli, args: &VerifyArgs) -> Result<Outcome> {
    let suite_name = match args.suite {
        Suite::Hecke => "hecke",
        Suite::Characters => "characters",
        Suite::Factorization => "factorization",
        Suite::Kfull => "kfull",
        Suite::Mertens => "lemma210",
        Suite::Totient => "lemma211",
        Suite::Split => "split",
    };
    let checks: Vec<Check> = match args.suite {
        Suite::Hecke => suites::hecke(&load_eigen(cli, range_or(cli, 100_000, 2)?)?)?,
        Suite::Characters => {
            let moduli = non_empty(&args.q, &(1..=60).collect::<Vec<_>>());
            let xs = non_empty(&args.x, &[10_000]);
            let top = *xs.iter().max().expect("non-empty") as usize + 1;
            suites::characters(&load_eigen(cli, resolve_range(cli, top)?)?, &moduli, &xs)?
        }
        Suite::Factorization => {
            let moduli = non_empty(&args.q, &[1, 3, 4, 5, 8, 12]);
            let n = range_or(cli, 100_000, 2)?;
            suites::factorization(&load_eigen(cli, n)?, &moduli, n.min(EXACT_RANGE))?
        }
        Suite::Kfull => suites::kfull(range_or(cli, 1_000_000, 2)?)?,
        Suite::Mertens => suites::mertens(range_or(cli, 1_000_000, 3)? as u64)?,
        Suite::Totient => {
            suites::totient(range_or(cli, 1_000_000, 100)? as u64)?
        }
        Suite::Split => {
            let xs = non_empty(&args.x, &[1000, 10_000, 100_000]);
            let ks = non_empty(&args.k, &[2, 3]);
            let hs = non_empty(&args.h, &[SplitParam::Value(1), SplitParam::Value(10), SplitParam::Value(100), SplitParam::X]);
            let top = *xs.iter().max().expect("non-empty") as usize + 1;
            suites::split(&load_eigen(cli, resolve_range(cli, top)?)?, args.kernel, &xs, &ks, &hs)?
        }
    };
    let mut table = Table::new(&["suite", "check", "status", "max_residual"]);
    for c in &checks {
        table.push(vec![suite_name.into(), c.name.clone().into(), if c.pass { "pass" } else { "fail" }.into(), c.residual.into()]);
    }
    Ok(Outcome { text: table.render(cli.format), passed: checks.iter().all(|c| c.pass) })
}

/// Range of the exact (integer) series checks in the factorization suite.
pub const EXACT_RANGE: usize = 10_000;

fn c1_model(eigen: &EigenSystem, cut: C1Cutoffs) -> Result<C1Model> {
    if cut.p < 1000 || cut.u < 10_000 {
        return Err(CliError::Usage("--cutoff-p must be >= 1000 and --cutoff-u >= 10000".into()));
    }
    Ok(C1Model::new(eigen, cut.p, cut.u)?)
}

fn c2_value(model: &C1Model, kernel: KernelFunction, k: u32, cut: C2Cutoffs) -> Result<C2Value> {
    if cut.k_max < 100 || cut.d_max < 100 {
        return Err(CliError::Usage("--cutoff-k and --cutoff-d must be >= 100".into()));
    }
    Ok(compute_c2(kernel, k, |primes: &[u64]| model.c1_for_primes(primes), cut.k_max, cut.d_max)?)
}

fn sorted_unique(v: &[u64]) -> Vec<u64> {
    let mut v = v.to_vec();
    v.sort_unstable();
    v.dedup();
    v
}

fn progsum(cli: &Cli, args: &ProgsumArgs) -> Result<Outcome> {
    let xs = sorted_unique(&args.x);
    let top = *xs.last().expect("clap requires --x") as usize + 1;
    let eigen = load_eigen(cli, resolve_range(cli, top.max(args.c1.p).max(args.c1.u))?)?;
    let model = c1_model(&eigen, args.c1)?;
    let mut table = Table::new(&REPORT_COLUMNS);
    for &q in &args.q {
        let c1 = model.c1(q)?;
        if xs.len() >= 3 {
            for r in progression_trend(&eigen, q, &xs, &c1)? {
                table.push(report_row("progsum", r.x, Some(q), None, None, r.s, r.c1, r.main, Some((r.fit_a, r.fit_b)), r.bracket));
            }
        } else {
            for &x in &xs {
                let s = progression_sum(&eigen, x, q)?;
                let main = main_term(c1.c1, x as f64, q);
                table.push(report_row("progsum", x, Some(q), None, None, s, c1.c1, main, None, c1.bracket));
            }
        }
    }
    Ok(Outcome::table(cli, table))
}

#[allow(clippy::too_many_arguments)]
fn report_row(
    experiment: &str,
    x: u64,
    q: Option<u64>,
    k: Option<u32>,
    kernel: Option<KernelFunction>,
    s: f64,
    constant: f64,
    main: f64,
    fit: Option<(f64, f64)>,
    bracket: f64,
) -> Vec<Cell> {
    vec![
        experiment.into(),
        x.into(),
        q.into(),
        k.into(),
        kernel.map(|k| k.id()).into(),
        s.into(),
        constant.into(),
        main.into(),
        (s / main).into(),
        fit.map(|f| f.0).into(),
        fit.map(|f| f.1).into(),
        bracket.into(),
    ]
}

fn shiftsum(cli: &Cli, args: &ShiftsumArgs) -> Result<Outcome> {
    let xs = sorted_unique(&args.x);
    let top = *xs.last().expect("clap requires --x") as usize + 1;
    let eigen = load_eigen(cli, resolve_range(cli, top.max(args.c1.p).max(args.c1.u))?)?;
    let model = c1_model(&eigen, args.c1)?;
    let mut table = Table::new(&REPORT_COLUMNS);
    for &k in &args.k {
        let c2 = c2_value(&model, args.kernel, k, args.c2)?;
        if xs.len() >= 3 {
            for r in shifted_trend(&eigen, args.kernel, k, &xs, &c2)? {
                table.push(report_row("shiftsum", r.x, None, Some(k), Some(args.kernel), r.s, r.c2, r.main, Some((r.fit_a, r.fit_b)), r.bracket));
            }
        } else {
            for &x in &xs {
                let s = shifted_sum(&eigen, args.kernel, x, k)?;
                let main = c2.value * x as f64 * (x as f64).ln();
                table.push(report_row("shiftsum", x, None, Some(k), Some(args.kernel), s, c2.value, main, None, c2.bracket));
            }
        }
    }
    Ok(Outcome::table(cli, table))
}

fn constant_row(experiment: &str, q: Option<u64>, k: Option<u32>, kernel: Option<KernelFunction>, value: f64, bracket: f64) -> Vec<Cell> {
    vec![
        experiment.into(),
        Cell::Empty,
        q.into(),
        k.into(),
        kernel.map(|k| k.id()).into(),
        Cell::Empty,
        value.into(),
        Cell::Empty,
        Cell::Empty,
        Cell::Empty,
        Cell::Empty,
        bracket.into(),
    ]
}

fn constants(cli: &Cli, args: &ConstantsArgs) -> Result<Outcome> {
    let eigen = load_eigen(cli, resolve_range(cli, args.c1.p.max(args.c1.u))?)?;
    let model = c1_model(&eigen, args.c1)?;
    let mut table = Table::new(&REPORT_COLUMNS);
    for &q in &args.q {
        let C1Value { c1, bracket, .. } = model.c1(q)?;
        table.push(constant_row("c1", Some(q), None, None, c1, bracket));
    }
    for &k in &args.k {
        let c2 = c2_value(&model, args.kernel, k, args.c2)?;
        table.push(constant_row("c2", None, Some(k), Some(args.kernel), c2.value, c2.bracket));
    }
    Ok(Outcome::table(cli, table))
}

fn chars(cli: &Cli, q: u64) -> Result<Outcome> {
    if q == 0 {
        return Err(CliError::Usage("q must be >= 1".into()));
    }
    let mut table = Table::new(&["modulus", "index", "order", "conductor", "primitive"]);
    for chi in UnitGroup::new(q).characters() {
        table.push(vec![q.into(), chi.index().into(), chi.order().into(), chi.conductor().into(), chi.is_primitive().into()]);
    }
    Ok(Outcome::table(cli, table))
}

fn dump_series(eigen: &EigenSystem, kind: SeriesKind, q: u64, index: u64, n: usize) -> Result<FormalDirichletSeries> {
    let group = UnitGroup::new(q);
    if index >= group.phi() {
        return Err(CliError::Usage(format!("character index {index} out of range for modulus {q} (phi = {})", group.phi())));
    }
    let chi = group.character(index);
    let series = match kind {
        SeriesKind::F => build_f(eigen, &chi, n),
        SeriesKind::L => l_factor_series(LKind::Dirichlet, eigen, &chi, n, 1),
        SeriesKind::Sym2 => l_factor_series(LKind::Sym2, eigen, &chi, n, 1),
        SeriesKind::Sym4 => l_factor_series(LKind::Sym4, eigen, &chi, n, 1),
        SeriesKind::U => extract_u(eigen, &chi, n).map(|c| c.u),
    };
    Ok(series?)
}

fn series(cli: &Cli, cmd: &SeriesCommand) -> Result<Outcome> {
    match cmd {
        SeriesCommand::Dump { kind, q, index } => {
            let n = range_or(cli, 1000, 1)?;
            let series = dump_series(&load_eigen(cli, n)?, *kind, *q, *index, n)?;
            let mut table = Table::new(&["n", "re", "im"]);
            for i in 1..=n {
                let c = series.coeff(i);
                table.push(vec![i.into(), c.re.into(), c.im.into()]);
            }
            Ok(Outcome::table(cli, table))
        }
        SeriesCommand::VerifyFactorization { q } => {
            let n = range_or(cli, 10_000, 1)?;
            let eigen = load_eigen(cli, n)?;
            let mut table = Table::new(&["q", "index", "conductor", "status", "max_residual"]);
            let mut passed = true;
            for &modulus in q {
                for chi in enumerate_characters(modulus).characters() {
                    let residual = Factorization::build(&eigen, chi, n)?.residual()?;
                    let ok = residual < 1e-9;
                    passed &= ok;
                    table.push(vec![
                        modulus.into(),
                        chi.index().into(),
                        chi.conductor().into(),
                        if ok { "pass" } else { "fail" }.into(),
                        residual.into(),
                    ]);
                }
            }
            Ok(Outcome { text: table.render(cli.format), passed })
        }
    }
}

fn kfull(cli: &Cli, cmd: &KfullCommand) -> Result<Outcome> {
    match cmd {
        KfullCommand::List { x, k } => {
            let mut table = Table::new(&["n"]);
            for v in enumerate_kfull(*x, *k) {
                table.push(vec![v.into()]);
            }
            Ok(Outcome::table(cli, table))
        }
        KfullCommand::CountTable { x, k } => {
            let mut table = Table::new(&["x", "count", "count/x^(1/k)"]);
            for row in kfull_count_table(&sorted_unique(x), *k) {
                table.push(vec![row.x.into(), row.count.into(), row.normalized.into()]);
            }
            Ok(Outcome::table(cli, table))
        }
    }
}
