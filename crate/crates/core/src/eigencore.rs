//! Fourier coefficients of the discriminant form Δ, normalized Hecke
//! eigenvalues, Satake angles and symmetric-power local data.

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Read, Write};

use num_bigint::BigUint;
use num_complex::Complex64;

use crate::error::{LabError, Result};
use crate::kfull::FactorTable;
use crate::ntt;

/// Weight of Δ.
pub const DELTA_WEIGHT: u32 = 12;

/// Largest `N` for which [`compute_tau_series`] is exact.
///
/// With `|τ(n)| <= d(n)·n^{11/2}` every coefficient up to 10^7 is below
/// 2^137, well inside the symmetric range of the five-prime CRT modulus
/// (about 2^148). Coefficients that then fail to fit in `i128` are reported
/// as overflow rather than wrapped.
pub const MAX_TAU_RANGE: usize = 10_000_000;

/// Below this length the squarings are done by schoolbook multiplication.
const SCHOOLBOOK_LIMIT: usize = 2048;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EigenSource {
    DeltaSeries,
    UserPrimeSeed,
}

/// Normalized Hecke eigenvalues `λ_f(1..=N)` of a level-one eigenform.
///
/// All arrays are indexed by `n` directly; slot 0 is unused.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    weight: u32,
    tau: Option<Vec<i128>>,
    lambda: Vec<f64>,
    source: EigenSource,
}

impl EigenSystem {
    /// Builds the system of Δ from its exact coefficients up to `n`.
    pub fn delta(n: usize) -> Result<Self> {
        Self::from_tau(compute_tau_series(n)?)
    }

    /// Wraps an exact τ table (slot 0 unused), e.g. one loaded from a cache.
    pub fn from_tau(tau: Vec<i128>) -> Result<Self> {
        if tau.len() < 2 || tau[1] != 1 {
            return Err(LabError::InvalidArgument("tau table must start with tau(1) = 1".into()));
        }
        let lambda = normalize(&tau, DELTA_WEIGHT)?;
        Ok(Self { weight: DELTA_WEIGHT, tau: Some(tau), lambda, source: EigenSource::DeltaSeries })
    }

    /// Extends prime values multiplicatively; see [`hecke_extend`].
    pub fn from_prime_seed(weight: u32, seed: &BTreeMap<u64, f64>, n: usize) -> Result<Self> {
        if weight < 2 || weight % 2 != 0 {
            return Err(LabError::InvalidWeight(weight));
        }
        let lambda = hecke_extend(seed, n)?;
        Ok(Self { weight, tau: None, lambda, source: EigenSource::UserPrimeSeed })
    }

    pub fn weight(&self) -> u32 {
        self.weight
    }

    pub fn source(&self) -> EigenSource {
        self.source
    }

    /// Largest `n` with a stored eigenvalue.
    pub fn range(&self) -> usize {
        self.lambda.len() - 1
    }

    pub fn ensure_range(&self, n: usize) -> Result<()> {
        if n > self.range() {
            return Err(LabError::RangeExceeded { needed: n as u64, available: self.range() as u64 });
        }
        Ok(())
    }

    #[inline]
    pub fn lambda(&self, n: usize) -> f64 {
        self.lambda[n]
    }

    #[inline]
    pub fn lambda4(&self, n: usize) -> f64 {
        let l2 = self.lambda[n] * self.lambda[n];
        l2 * l2
    }

    /// `λ_f(0..=N)` with slot 0 set to zero.
    pub fn lambdas(&self) -> &[f64] {
        &self.lambda
    }

    pub fn tau(&self) -> Option<&[i128]> {
        self.tau.as_deref()
    }

    /// Prime values `p -> λ_f(p)` for all primes up to `limit`.
    pub fn prime_seed(&self, limit: usize) -> BTreeMap<u64, f64> {
        let limit = limit.min(self.range());
        let table = FactorTable::new(limit.max(2)).expect("sieve within range");
        table.primes_up_to(limit).iter().map(|&p| (p as u64, self.lambda[p as usize])).collect()
    }

    pub fn satake(&self, p: usize) -> SatakeAngle {
        SatakeAngle::from_lambda(p as u64, self.lambda[p])
    }
}

/// Exact `τ(1..=n)` (slot 0 unused) from `Δ = q·(η³)^8`, where
/// `q^{-1/8}η³ = Σ_{m>=0} (-1)^m (2m+1) q^{m(m+1)/2}` is sparse and the eighth
/// power is three successive squarings.
pub fn compute_tau_series(n: usize) -> Result<Vec<i128>> {
    if n == 0 {
        return Err(LabError::InvalidArgument("tau range must be >= 1".into()));
    }
    if n > MAX_TAU_RANGE {
        return Err(LabError::TauRangeTooLarge { requested: n, max: MAX_TAU_RANGE });
    }
    let mut eta_cubed = vec![0i64; n];
    let mut m = 0usize;
    while m * (m + 1) / 2 < n {
        let c = (2 * m + 1) as i64;
        eta_cubed[m * (m + 1) / 2] = if m % 2 == 0 { c } else { -c };
        m += 1;
    }
    let eighth = if n <= SCHOOLBOOK_LIMIT {
        schoolbook_eighth_power(&eta_cubed)?
    } else {
        ntt::exact_repeated_square(&eta_cubed, n, 3).map_err(|e| match e {
            LabError::TauOverflow { n } => LabError::TauOverflow { n: n + 1 },
            other => other,
        })?
    };
    let mut tau = Vec::with_capacity(n + 1);
    tau.push(0);
    tau.extend(eighth);
    Ok(tau)
}

fn schoolbook_eighth_power(series: &[i64]) -> Result<Vec<i128>> {
    let len = series.len();
    let mut cur: Vec<i128> = series.iter().map(|&c| c as i128).collect();
    for _ in 0..3 {
        let mut next = vec![0i128; len];
        for (i, &a) in cur.iter().enumerate().filter(|(_, a)| **a != 0) {
            for (j, &b) in cur[..len - i].iter().enumerate() {
                let t = a.checked_mul(b).and_then(|t| next[i + j].checked_add(t));
                next[i + j] = t.ok_or(LabError::TauOverflow { n: i + j + 1 })?;
            }
        }
        cur = next;
    }
    Ok(cur)
}

/// `λ_f(n) = τ(n) / n^{(κ-1)/2}` for `n >= 1`; slot 0 is zero.
pub fn normalize(tau: &[i128], weight: u32) -> Result<Vec<f64>> {
    if weight < 2 || weight % 2 != 0 {
        return Err(LabError::InvalidWeight(weight));
    }
    let exponent = (weight as f64 - 1.0) / 2.0;
    let mut out = vec![0.0; tau.len()];
    for (n, (&t, slot)) in tau.iter().zip(out.iter_mut()).enumerate().skip(1) {
        *slot = t as f64 / (n as f64).powf(exponent);
    }
    Ok(out)
}

/// Extends prime eigenvalues to `λ_f(1..=n)`: on prime powers by
/// `λ(p^{j+1}) = λ(p)λ(p^j) - λ(p^{j-1})`, on coprime products by
/// multiplicativity.
pub fn hecke_extend(seed: &BTreeMap<u64, f64>, n: usize) -> Result<Vec<f64>> {
    let table = FactorTable::new(n.max(2))?;
    for &p in table.primes_up_to(n) {
        match seed.get(&(p as u64)) {
            None => return Err(LabError::MissingPrime(p as u64)),
            Some(&v) if !(v.abs() <= 2.0) => return Err(LabError::SeedOutOfRange { p: p as u64, value: v }),
            Some(_) => {}
        }
    }
    let mut lambda = vec![0.0; n + 1];
    lambda[1] = 1.0;
    for i in 2..=n {
        let (p, e, m) = table.strip_smallest(i);
        lambda[i] = if m > 1 {
            lambda[i / m] * lambda[m]
        } else if e == 1 {
            seed[&(p as u64)]
        } else {
            lambda[p] * lambda[i / p] - lambda[i / (p * p)]
        };
    }
    Ok(lambda)
}

/// `λ_f(p) = 2·cos θ` with Satake parameters `e^{±iθ}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SatakeAngle {
    pub p: u64,
    pub theta: f64,
}

impl SatakeAngle {
    pub fn from_lambda(p: u64, lambda_p: f64) -> Self {
        Self { p, theta: (lambda_p / 2.0).clamp(-1.0, 1.0).acos() }
    }

    pub fn lambda(&self) -> f64 {
        2.0 * self.theta.cos()
    }

    pub fn alpha(&self) -> Complex64 {
        Complex64::from_polar(1.0, self.theta)
    }

    /// The `m + 1` Satake values `α^{m-2j}`, `j = 0..=m`, of the m-th symmetric power.
    pub fn sym_roots(&self, m: u32) -> Vec<Complex64> {
        (0..=m)
            .map(|j| Complex64::from_polar(1.0, (m as f64 - 2.0 * j as f64) * self.theta))
            .collect()
    }

    /// `λ_f(p^j) = sin((j+1)θ)/sin θ`, evaluated by the three-term recursion.
    pub fn prime_power_lambdas(&self, j_max: usize) -> Vec<f64> {
        let l = self.lambda();
        let mut out = Vec::with_capacity(j_max + 1);
        out.push(1.0);
        if j_max >= 1 {
            out.push(l);
        }
        for j in 2..=j_max {
            out.push(l * out[j - 1] - out[j - 2]);
        }
        out
    }
}

/// Series coefficients `b(0..=J)` of `∏_{0<=j<=m} (1 - α^{m-2j} X)^{-1}`.
pub fn sym_power_local_factor(m: u32, theta: &SatakeAngle, j_max: usize) -> Vec<f64> {
    let coeffs = inverse_root_product(&theta.sym_roots(m), j_max);
    coeffs
        .into_iter()
        .map(|c| {
            assert!(c.im.abs() < 1e-12 * (1.0 + c.re.abs()), "local factor has imaginary part {}", c.im);
            c.re
        })
        .collect()
}

/// Power-series coefficients of `∏_r (1 - r X)^{-1}` up to `X^{j_max}`.
pub fn inverse_root_product(roots: &[Complex64], j_max: usize) -> Vec<Complex64> {
    let mut c = vec![Complex64::new(0.0, 0.0); j_max + 1];
    c[0] = Complex64::new(1.0, 0.0);
    for &r in roots {
        for j in 1..=j_max {
            let prev = c[j - 1];
            c[j] += r * prev;
        }
    }
    c
}

/// Polynomial coefficients of `∏_r (1 - r X)`.
pub fn root_product(roots: &[Complex64]) -> Vec<Complex64> {
    let mut c = vec![Complex64::new(1.0, 0.0)];
    for &r in roots {
        c.push(Complex64::new(0.0, 0.0));
        for j in (1..c.len()).rev() {
            let prev = c[j - 1];
            c[j] -= r * prev;
        }
    }
    c
}


/// First `n` (if any) where `|τ(n)| > ⌊n^{11/2}⌋·d(n)`.
///
/// The integer square root floors `n^{11/2}` before the product with
/// `d(n)`, so this is never weaker than the real-valued inequality.
pub fn deligne_violation(tau: &[i128]) -> Option<usize> {
    let table = FactorTable::new(tau.len().max(3) - 1).ok()?;
    let divisors = table.divisor_count_table();
    (1..tau.len()).find(|&n| {
        let bound = BigUint::from(n as u64).pow(11u32).sqrt() * BigUint::from(divisors[n]);
        BigUint::from(tau[n].unsigned_abs()) > bound
    })
}

/// `σ_11(n) mod 691` for `n <= limit`, slot 0 unused.
pub fn sigma11_mod691(limit: usize) -> Vec<u32> {
    let mut out = vec![0u32; limit + 1];
    for d in 1..=limit {
        let p = ntt::pow_mod(d as u64, 11, 691) as u32;
        for m in (d..=limit).step_by(d) {
            out[m] = (out[m] + p) % 691;
        }
    }
    out
}

/// First `n` where `τ(n) ≢ σ_11(n) (mod 691)`.
pub fn ramanujan_691_violation(tau: &[i128]) -> Option<usize> {
    let sigma = sigma11_mod691(tau.len().saturating_sub(1));
    (1..tau.len()).find(|&n| tau[n].rem_euclid(691) as u32 != sigma[n])
}

/// Writes `n,tau` CSV with decimal values.
pub fn write_tau_cache<W: Write>(mut out: W, tau: &[i128]) -> Result<()> {
    writeln!(out, "n,tau")?;
    for (n, t) in tau.iter().enumerate().skip(1) {
        writeln!(out, "{n},{t}")?;
    }
    Ok(())
}

/// Reads and validates an `n,tau` CSV cache.
pub fn read_tau_cache<R: Read>(input: R) -> Result<Vec<i128>> {
    let mut lines = BufReader::new(input).lines();
    match lines.next() {
        Some(Ok(h)) if h.trim() == "n,tau" => {}
        _ => return Err(LabError::Cache("missing `n,tau` header".into())),
    }
    let mut tau = vec![0i128];
    for (i, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let (n, t) = line
            .split_once(',')
            .ok_or_else(|| LabError::Cache(format!("malformed row {}", i + 2)))?;
        let n: usize = n.trim().parse().map_err(|_| LabError::Cache(format!("bad index on row {}", i + 2)))?;
        if n != tau.len() {
            return Err(LabError::Cache(format!("expected n = {}, found {n}", tau.len())));
        }
        let t: i128 = t.trim().parse().map_err(|_| LabError::Cache(format!("bad tau value at n = {n}")))?;
        tau.push(t);
    }
    if tau.len() < 2 || tau[1] != 1 {
        return Err(LabError::Cache("tau(1) must equal 1".into()));
    }
    if let Some(n) = ramanujan_691_violation(&tau) {
        return Err(LabError::Cache(format!("tau({n}) fails the mod-691 congruence")));
    }
    Ok(tau)
}
