//! Command-line surface.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use heckelab::kfull::KernelFunction;

use crate::output::Format;

#[derive(Debug, Parser)]
#[command(name = "heckelab", version, about = "Hecke eigenvalue experiments and verification suites")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,

    /// Worker threads; defaults to the number of available cores.
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    pub threads: Option<u64>,

    /// τ cache (`n,tau` CSV). Reused when it covers the range, rewritten otherwise.
    #[arg(long, global = true)]
    pub cache: Option<PathBuf>,

    /// Eigen range N; defaults to the smallest range the command needs.
    #[arg(long = "n", global = true)]
    pub n: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build or refresh the τ table and print its checksum.
    Tau,
    /// Run a named invariant suite; exits 1 if any check fails.
    Verify(VerifyArgs),
    /// Progression sums of λ⁴ over n ≡ 1 (mod q) against c₁ x log x φ(q)/q².
    Progsum(ProgsumArgs),
    /// Shifted sums Σ a(n) λ⁴(n+1) against c₂ x log x.
    Shiftsum(ShiftsumArgs),
    /// The main-term constants c₁(q) and c₂ with truncation brackets.
    Constants(ConstantsArgs),
    /// List the Dirichlet characters modulo q.
    Chars {
        q: u64,
    },
    /// Dirichlet series built from the eigen system.
    #[command(subcommand)]
    Series(SeriesCommand),
    /// k-full numbers.
    #[command(subcommand)]
    Kfull(KfullCommand),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Hecke,
    Characters,
    Factorization,
    Kfull,
    /// Mertens-type prime sum bound.
    #[value(name = "lemma210")]
    Mertens,
    /// Totient ratio bound.
    #[value(name = "lemma211")]
    Totient,
    Split,
}

/// The split parameter: a number or the literal `x` (H equal to the sum length).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitParam {
    Value(u64),
    X,
}

impl SplitParam {
    pub fn resolve(self, x: u64) -> u64 {
        match self {
            SplitParam::Value(h) => h,
            SplitParam::X => x,
        }
    }
}

fn parse_split_param(s: &str) -> Result<SplitParam, String> {
    if s == "x" {
        return Ok(SplitParam::X);
    }
    match s.parse::<u64>() {
        Ok(h) if h >= 1 => Ok(SplitParam::Value(h)),
        _ => Err(format!("expected a positive integer or `x`, got `{s}`")),
    }
}

fn parse_kernel(s: &str) -> Result<KernelFunction, String> {
    KernelFunction::from_id(s).ok_or_else(|| {
        let ids: Vec<&str> = KernelFunction::ALL.iter().map(|k| k.id()).collect();
        format!("unknown kernel `{s}` (expected one of {})", ids.join(", "))
    })
}

fn parse_order(s: &str) -> Result<u32, String> {
    match s.parse::<u32>() {
        Ok(k) if (2..=16).contains(&k) => Ok(k),
        _ => Err(format!("k must be an integer in 2..=16, got `{s}`")),
    }
}

fn parse_positive(s: &str) -> Result<u64, String> {
    match s.parse::<u64>() {
        Ok(v) if v >= 1 => Ok(v),
        _ => Err(format!("expected a positive integer, got `{s}`")),
    }
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    pub suite: Suite,
    /// Sum lengths (characters: projection x; split: the x axis of the matrix).
    #[arg(long, value_delimiter = ',', value_parser = parse_positive)]
    pub x: Vec<u64>,
    /// Moduli (characters, factorization).
    #[arg(long, value_delimiter = ',', value_parser = parse_positive)]
    pub q: Vec<u64>,
    /// k-full orders (split).
    #[arg(long, value_delimiter = ',', value_parser = parse_order)]
    pub k: Vec<u32>,
    /// Split parameters H (split); `x` stands for H = x.
    #[arg(long = "H", value_delimiter = ',', value_parser = parse_split_param)]
    pub h: Vec<SplitParam>,
    #[arg(long, value_parser = parse_kernel, default_value = "const_one")]
    pub kernel: KernelFunction,
}

#[derive(Debug, Clone, Copy, Args)]
pub struct C1Cutoffs {
    /// Prime cutoff P of the truncated Euler products at s = 1.
    #[arg(long = "cutoff-p", default_value_t = 100_000)]
    pub p: usize,
    /// Range N_U of the correction series summed for U(1).
    #[arg(long = "cutoff-u", default_value_t = 100_000)]
    pub u: usize,
}

#[derive(Debug, Clone, Copy, Args)]
pub struct C2Cutoffs {
    /// Truncation K_max of the k-full sum in c₂.
    #[arg(long = "cutoff-k", default_value_t = 100_000)]
    pub k_max: u64,
    /// Truncation D_max of the Möbius sum in c₂.
    #[arg(long = "cutoff-d", default_value_t = 1000)]
    pub d_max: u64,
}

#[derive(Debug, Args)]
pub struct ProgsumArgs {
    #[arg(long, value_delimiter = ',', required = true, value_parser = parse_positive)]
    pub x: Vec<u64>,
    #[arg(long, value_delimiter = ',', default_value = "1", value_parser = parse_positive)]
    pub q: Vec<u64>,
    #[command(flatten)]
    pub c1: C1Cutoffs,
}

#[derive(Debug, Args)]
pub struct ShiftsumArgs {
    #[arg(long, value_delimiter = ',', required = true, value_parser = parse_positive)]
    pub x: Vec<u64>,
    #[arg(long, value_delimiter = ',', default_value = "2", value_parser = parse_order)]
    pub k: Vec<u32>,
    #[arg(long, value_parser = parse_kernel, default_value = "const_one")]
    pub kernel: KernelFunction,
    #[command(flatten)]
    pub c1: C1Cutoffs,
    #[command(flatten)]
    pub c2: C2Cutoffs,
}

#[derive(Debug, Args)]
pub struct ConstantsArgs {
    #[arg(long, value_delimiter = ',', default_value = "1", value_parser = parse_positive)]
    pub q: Vec<u64>,
    #[arg(long, value_delimiter = ',', default_value = "2", value_parser = parse_order)]
    pub k: Vec<u32>,
    #[arg(long, value_parser = parse_kernel, default_value = "const_one")]
    pub kernel: KernelFunction,
    #[command(flatten)]
    pub c1: C1Cutoffs,
    #[command(flatten)]
    pub c2: C2Cutoffs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SeriesKind {
    /// Σ λ⁴(n) χ(n) n^-s.
    F,
    L,
    Sym2,
    Sym4,
    /// The correction series U.
    U,
}

#[derive(Debug, Subcommand)]
pub enum SeriesCommand {
    /// Print the coefficients `n,re,im` of one series twisted by χ.
    Dump {
        #[arg(long, value_enum)]
        kind: SeriesKind,
        #[arg(long, default_value_t = 1, value_parser = parse_positive)]
        q: u64,
        /// Character index modulo q (0 is principal).
        #[arg(long, default_value_t = 0)]
        index: u64,
    },
    /// Check F = L²·(sym²)³·sym⁴·U coefficientwise for every χ mod each q.
    VerifyFactorization {
        #[arg(long, value_delimiter = ',', default_value = "1,3,4,5,8,12", value_parser = parse_positive)]
        q: Vec<u64>,
    },
}

#[derive(Debug, Subcommand)]
pub enum KfullCommand {
    /// All k-full numbers up to x.
    List {
        #[arg(long, value_parser = parse_positive)]
        x: u64,
        #[arg(long, default_value_t = 2, value_parser = parse_order)]
        k: u32,
    },
    /// Counts of k-full numbers up to each x, normalized by x^(1/k).
    CountTable {
        #[arg(long, value_delimiter = ',', required = true, value_parser = parse_positive)]
        x: Vec<u64>,
        #[arg(long, default_value_t = 2, value_parser = parse_order)]
        k: u32,
    },
}
