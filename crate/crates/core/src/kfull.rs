//! Sieve infrastructure, the k-free × k-full decomposition, k-full kernel
//! functions and the counting / Mertens / totient diagnostics built on them.

use serde::Serialize;

use crate::error::{LabError, Result};
use crate::numerics::NeumaierSum;

/// Largest range accepted by [`FactorTable::new`] (four bytes per entry).
pub const MAX_SIEVE_RANGE: usize = 400_000_000;

/// Smallest-prime-factor table from a linear sieve.
#[derive(Debug, Clone)]
pub struct FactorTable {
    spf: Vec<u32>,
    primes: Vec<u32>,
}

impl FactorTable {
    pub fn new(n: usize) -> Result<Self> {
        if n > MAX_SIEVE_RANGE {
            return Err(LabError::SieveTooLarge {
                requested: n,
                limit: MAX_SIEVE_RANGE,
                bytes: (n + 1) * std::mem::size_of::<u32>(),
            });
        }
        let n = n.max(2);
        let mut spf = vec![0u32; n + 1];
        let mut primes = Vec::new();
        for i in 2..=n {
            if spf[i] == 0 {
                spf[i] = i as u32;
                primes.push(i as u32);
            }
            let si = spf[i];
            for &p in &primes {
                let m = i * p as usize;
                if p > si || m > n {
                    break;
                }
                spf[m] = p;
            }
        }
        Ok(Self { spf, primes })
    }

    pub fn range(&self) -> usize {
        self.spf.len() - 1
    }

    fn check(&self, n: u64) -> Result<usize> {
        if n == 0 || n as usize > self.range() {
            return Err(LabError::RangeExceeded { needed: n, available: self.range() as u64 });
        }
        Ok(n as usize)
    }

    /// Smallest prime factor; `spf(1) == 1`.
    #[inline]
    pub fn spf(&self, n: usize) -> usize {
        if n <= 1 {
            1
        } else {
            self.spf[n] as usize
        }
    }

    pub fn primes(&self) -> &[u32] {
        &self.primes
    }

    pub fn primes_up_to(&self, x: usize) -> &[u32] {
        let end = self.primes.partition_point(|&p| p as usize <= x);
        &self.primes[..end]
    }

    #[inline]
    pub fn is_prime(&self, n: usize) -> bool {
        n >= 2 && self.spf[n] as usize == n
    }

    /// Prime factorization as `(p, e)` pairs in increasing order of `p`.
    pub fn factorize(&self, n: u64) -> Result<Vec<(u64, u32)>> {
        let mut n = self.check(n)?;
        let mut out = Vec::new();
        while n > 1 {
            let p = self.spf[n] as usize;
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p as u64, e));
        }
        Ok(out)
    }

    /// Splits `n` as `(p^e, n / p^e)` with `p = spf(n)`; `n >= 2`.
    #[inline]
    pub fn strip_smallest(&self, n: usize) -> (usize, u32, usize) {
        let p = self.spf[n] as usize;
        let mut m = n / p;
        let mut e = 1;
        while m % p == 0 {
            m /= p;
            e += 1;
        }
        (p, e, m)
    }

    pub fn kfull_split(&self, n: u64, k: u32) -> Result<KFullSplit> {
        Ok(KFullSplit::from_factors(n, k, &self.factorize(n)?))
    }

    /// Möbius function on `1..=range`, index 0 unused.
    pub fn mobius_table(&self) -> Vec<i8> {
        let n = self.range();
        let mut mu = vec![0i8; n + 1];
        mu[1] = 1;
        for i in 2..=n {
            let p = self.spf[i] as usize;
            let m = i / p;
            mu[i] = if m % p == 0 { 0 } else { -mu[m] };
        }
        mu
    }

    /// Divisor counts on `1..=range`, index 0 unused.
    pub fn divisor_count_table(&self) -> Vec<u32> {
        multiplicative_table(self, |_, e| e + 1)
    }

    /// Euler totient on `1..=range`, index 0 unused.
    pub fn totient_table(&self) -> Vec<u64> {
        multiplicative_table(self, |p, e| (p as u64 - 1) * (p as u64).pow(e - 1))
    }
}

fn multiplicative_table<T>(table: &FactorTable, local: impl Fn(usize, u32) -> T) -> Vec<T>
where
    T: Copy + std::ops::Mul<Output = T> + From<u8>,
{
    let n = table.range();
    let mut out = vec![T::from(0u8); n + 1];
    out[1] = T::from(1u8);
    for i in 2..=n {
        let (p, e, m) = table.strip_smallest(i);
        out[i] = local(p, e) * out[m];
    }
    out
}

/// Trial-division factorization for values outside any sieve.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p * p <= n {
        if n % p == 0 {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// `n = q_part · k_part` with `q_part` k-free, `k_part` k-full and the two coprime.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct KFullSplit {
    pub n: u64,
    pub k: u32,
    pub q_part: u64,
    pub k_part: u64,
}

impl KFullSplit {
    fn from_factors(n: u64, k: u32, factors: &[(u64, u32)]) -> Self {
        let (mut q_part, mut k_part) = (1u64, 1u64);
        for &(p, e) in factors {
            let pe = p.pow(e);
            if e >= k {
                k_part *= pe;
            } else {
                q_part *= pe;
            }
        }
        Self { n, k, q_part, k_part }
    }
}

pub fn kfull_split(n: u64, k: u32) -> KFullSplit {
    assert!(n >= 1 && k >= 2, "kfull_split needs n >= 1 and k >= 2");
    KFullSplit::from_factors(n, k, &factorize(n))
}

/// No prime power `p^k` divides `n`.
pub fn is_kfree(n: u64, k: u32) -> bool {
    factorize(n).iter().all(|&(_, e)| e < k)
}

/// Every prime dividing `n` divides it at least `k` times.
pub fn is_kfull(n: u64, k: u32) -> bool {
    factorize(n).iter().all(|&(_, e)| e >= k)
}

pub fn mobius(n: u64) -> i8 {
    let f = factorize(n);
    if f.iter().any(|&(_, e)| e > 1) {
        0
    } else if f.len() % 2 == 0 {
        1
    } else {
        -1
    }
}

/// `g(l) = Σ_{m·d^k = l} μ(d)`, which is 1 on k-free `l` and 0 otherwise.
pub fn mobius_kfree_indicator(l: u64, k: u32) -> i64 {
    assert!(l >= 1);
    let mut g = 0i64;
    let mut d = 1u64;
    while let Some(dk) = d.checked_pow(k).filter(|&dk| dk <= l) {
        if l % dk == 0 {
            g += mobius(d) as i64;
        }
        d += 1;
    }
    g
}

/// k-full parts `k(n)` for every `n <= range` of a sieve, index 0 unused.
#[derive(Debug, Clone)]
pub struct KPartTable {
    k: u32,
    kpart: Vec<u64>,
}

impl KPartTable {
    pub fn new(table: &FactorTable, k: u32) -> Self {
        assert!(k >= 2);
        let n = table.range();
        let mut kpart = vec![0u64; n + 1];
        kpart[1] = 1;
        for i in 2..=n {
            let (p, e, m) = table.strip_smallest(i);
            kpart[i] = if e >= k { kpart[m] * (p as u64).pow(e) } else { kpart[m] };
        }
        Self { k, kpart }
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn range(&self) -> usize {
        self.kpart.len() - 1
    }

    #[inline]
    pub fn kpart(&self, n: usize) -> u64 {
        self.kpart[n]
    }
}

/// The fixed library of k-full kernel functions `a(n) = a(k(n))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelFunction {
    /// `a ≡ 1`.
    ConstOne,
    /// `a(n) = 1` iff `k(n) = 1`, i.e. `n` is k-free.
    KfreeIndicator,
    /// Number of distinct primes of `k(n)`; not multiplicative in `n`.
    OmegaOfKpart,
    /// Divisor count of `k(n)`.
    DivisorsOfKpart,
}

impl KernelFunction {
    pub const ALL: [KernelFunction; 4] = [
        KernelFunction::ConstOne,
        KernelFunction::KfreeIndicator,
        KernelFunction::OmegaOfKpart,
        KernelFunction::DivisorsOfKpart,
    ];

    pub fn id(self) -> &'static str {
        match self {
            KernelFunction::ConstOne => "const_one",
            KernelFunction::KfreeIndicator => "kfree_indicator",
            KernelFunction::OmegaOfKpart => "omega_of_kpart",
            KernelFunction::DivisorsOfKpart => "divisors_of_kpart",
        }
    }

    pub fn from_id(id: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.id() == id)
    }

    /// Value on a k-full number `kappa`.
    pub fn eval_kpart(self, kappa: u64) -> f64 {
        match self {
            KernelFunction::ConstOne => 1.0,
            KernelFunction::KfreeIndicator => (kappa == 1) as u8 as f64,
            KernelFunction::OmegaOfKpart => factorize(kappa).len() as f64,
            KernelFunction::DivisorsOfKpart => {
                factorize(kappa).iter().map(|&(_, e)| (e + 1) as f64).product()
            }
        }
    }

    pub fn eval(self, n: u64, k: u32) -> f64 {
        self.eval_kpart(kfull_split(n, k).k_part)
    }
}

impl std::fmt::Display for KernelFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.id())
    }
}

fn small_primes(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let mut composite = vec![false; limit as usize + 1];
    let mut out = Vec::new();
    for i in 2..=limit as usize {
        if !composite[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= limit as usize {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

/// Integer `floor(x^(1/k))`.
pub fn integer_root(x: u64, k: u32) -> u64 {
    let mut r = (x as f64).powf(1.0 / k as f64) as u64;
    while r > 0 && r.checked_pow(k).is_none_or(|v| v > x) {
        r -= 1;
    }
    while (r + 1).checked_pow(k).is_some_and(|v| v <= x) {
        r += 1;
    }
    r
}

/// All k-full numbers `<= x`, ascending.
///
/// For `k = 2` each squarefull number is produced once as `a²·b³` with `b`
/// squarefree; other `k` use a bounded depth-first search over prime powers.
pub fn enumerate_kfull(x: u64, k: u32) -> Vec<u64> {
    assert!(k >= 2);
    if x == 0 {
        return Vec::new();
    }
    let mut out = if k == 2 { squarefull_by_a2b3(x) } else { kfull_dfs(x, k) };
    out.sort_unstable();
    out
}

fn squarefull_by_a2b3(x: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let bmax = integer_root(x, 3);
    for b in 1..=bmax {
        if mobius(b) == 0 {
            continue;
        }
        let b3 = b * b * b;
        let amax = integer_root(x / b3, 2);
        out.extend((1..=amax).map(|a| a * a * b3));
    }
    out
}

pub(crate) fn kfull_dfs(x: u64, k: u32) -> Vec<u64> {
    let primes = small_primes(integer_root(x, k));
    let mut out = Vec::new();
    fn walk(start: usize, cur: u64, x: u64, k: u32, primes: &[u64], out: &mut Vec<u64>) {
        out.push(cur);
        for (i, &p) in primes.iter().enumerate().skip(start) {
            let Some(mut pe) = p.checked_pow(k).and_then(|pk| cur.checked_mul(pk)).filter(|&v| v <= x) else {
                break;
            };
            loop {
                walk(i + 1, pe, x, k, primes, out);
                match pe.checked_mul(p) {
                    Some(v) if v <= x => pe = v,
                    _ => break,
                }
            }
        }
    }
    walk(0, 1, x, k, &primes, &mut out);
    out
}

/// One row of the k-full counting table.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct KFullCount {
    pub x: u64,
    pub k: u32,
    pub count: u64,
    /// `count / x^(1/k)`, the running estimate of the constant `K`.
    pub normalized: f64,
}

pub fn kfull_count_table(xs: &[u64], k: u32) -> Vec<KFullCount> {
    let max = xs.iter().copied().max().unwrap_or(0);
    let all = enumerate_kfull(max, k);
    xs.iter()
        .map(|&x| {
            let count = all.partition_point(|&v| v <= x) as u64;
            KFullCount { x, k, count, normalized: count as f64 / (x as f64).powf(1.0 / k as f64) }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct TailSum {
    pub x: u64,
    pub k: u32,
    pub x_max: u64,
    /// `Σ 1/κ` over k-full `x < κ <= x_max`.
    pub tail: f64,
    /// `tail / x^(1/k - 1)`.
    pub ratio: f64,
}

pub fn kfull_tail_sum(x: u64, k: u32, x_max: u64) -> TailSum {
    let tail = if x >= x_max {
        0.0
    } else {
        enumerate_kfull(x_max, k)
            .into_iter()
            .filter(|&v| v > x)
            .map(|v| 1.0 / v as f64)
            .rev()
            .collect::<NeumaierSum>()
            .value()
    };
    let scale = (x as f64).powf(1.0 / k as f64 - 1.0);
    TailSum { x, k, x_max, tail, ratio: tail / scale }
}

/// The constant in the explicit upper bound for the prime harmonic sum.
pub const MERTENS_B: f64 = 0.261497212847643;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct MertensPoint {
    pub x: u64,
    /// `Σ_{p <= x} 1/p`.
    pub prime_sum: f64,
    /// `ln ln x + B + 1/ln² x`.
    pub bound: f64,
    pub holds: bool,
}

/// Evaluates `Σ_{p<=x} 1/p < ln ln x + B + 1/ln²x` on a grid of `x >= 3`.
pub fn mertens_check(x_grid: &[u64]) -> Result<Vec<MertensPoint>> {
    if let Some(&bad) = x_grid.iter().find(|&&x| x < 3) {
        return Err(LabError::InvalidArgument(format!("mertens grid needs x >= 3, got {bad}")));
    }
    let mut grid = x_grid.to_vec();
    grid.sort_unstable();
    let max = grid.last().copied().unwrap_or(3);
    let table = FactorTable::new(max as usize)?;
    let mut acc = NeumaierSum::new();
    let mut primes = table.primes().iter().peekable();
    let mut out = Vec::with_capacity(grid.len());
    for x in grid {
        while let Some(&&p) = primes.peek() {
            if p as u64 > x {
                break;
            }
            acc.add(1.0 / p as f64);
            primes.next();
        }
        let lx = (x as f64).ln();
        let bound = lx.ln() + MERTENS_B + 1.0 / (lx * lx);
        let prime_sum = acc.value();
        out.push(MertensPoint { x, prime_sum, bound, holds: prime_sum < bound });
    }
    Ok(out)
}

/// Integer grid `3 <= x <= max` with `per_decade` logarithmically spaced points.
pub fn log_grid(min: u64, max: u64, per_decade: u32) -> Vec<u64> {
    let (lo, hi) = ((min as f64).log10(), (max as f64).log10());
    let steps = ((hi - lo) * per_decade as f64).ceil().max(1.0) as u32;
    let mut out: Vec<u64> = (0..=steps)
        .map(|i| 10f64.powf(lo + (hi - lo) * i as f64 / steps as f64).round() as u64)
        .map(|x| x.clamp(min, max))
        .collect();
    out.dedup();
    out
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct TotientReport {
    pub q_max: u64,
    /// Largest `q / (φ(q) · ln ln q)` over `100 <= q <= q_max`.
    pub max_ratio: f64,
    pub argmax: u64,
}

pub fn totient_ratio_check(q_max: u64) -> Result<TotientReport> {
    if q_max < 100 {
        return Err(LabError::InvalidArgument(format!("q_max must be >= 100, got {q_max}")));
    }
    let table = FactorTable::new(q_max as usize)?;
    let phi = table.totient_table();
    let (mut max_ratio, mut argmax) = (f64::NEG_INFINITY, 0);
    for q in 100..=q_max {
        let r = q as f64 / (phi[q as usize] as f64 * (q as f64).ln().ln());
        if r > max_ratio {
            max_ratio = r;
            argmax = q;
        }
    }
    Ok(TotientReport { q_max, max_ratio, argmax })
}
