//! Sums of `λ_f(n)^4` over progressions `n ≡ 1 (mod q)` and shifted sums
//! `Σ a(n) λ_f(n+1)^4` with k-full kernels, the main-term constants they are
//! compared against, and the finite Möbius rewriting of the shifted sum.

use num_integer::Integer;
use serde::Serialize;

use crate::charmod::{enumerate_characters, orthogonality_project, UnitGroup};
use crate::dseries::{extract_u, l_value_at_one, prime_divisors, LKind, LValue};
use crate::eigencore::EigenSystem;
use crate::error::{LabError, Result};
use crate::kfull::{enumerate_kfull, FactorTable, KPartTable, KernelFunction};
use crate::numerics::{fit_xlogx, log_log_slope, ordered_par_sum, NeumaierSum, XLogXFit};

/// Error exponent attached to the progression sums for general moduli.
pub const PROGRESSION_EXPONENT: &str = "158/181";
/// Error exponent attached to the progression sums for prime moduli.
pub const PRIME_MODULUS_EXPONENT: &str = "20/23";
/// Smallest modulus covered by the asymptotic statements.
pub const MIN_STATED_MODULUS: u64 = 100;

/// `(520k + 23) / 543k`, the exponent attached to the shifted sums.
pub fn shifted_exponent(k: u32) -> String {
    format!("{}/{}", 520 * k + 23, 543 * k)
}

/// `Σ_{n <= x+1, n ≡ 1 (mod q)} λ_f(n)^4`.
pub fn progression_sum(eigen: &EigenSystem, x: u64, q: u64) -> Result<f64> {
    if x == 0 || q == 0 {
        return Err(LabError::InvalidArgument("progression sums need x >= 1 and q >= 1".into()));
    }
    let top = x as usize + 1;
    eigen.ensure_range(top)?;
    let q = q as usize;
    Ok(ordered_par_sum(0..(top - 1) / q + 1, |i| eigen.lambda4(1 + i * q)))
}

/// The same sum through characters: `(1/φ(q)) Σ_χ χ̄(1) Σ_{n<=x+1} λ_f(n)^4 χ(n)`.
pub fn progression_sum_by_characters(eigen: &EigenSystem, x: u64, q: u64) -> Result<f64> {
    let top = x as usize + 1;
    eigen.ensure_range(top)?;
    let values: Vec<f64> = (0..=top).map(|n| if n == 0 { 0.0 } else { eigen.lambda4(n) }).collect();
    Ok(orthogonality_project(&values, &enumerate_characters(q), 1)?.re)
}

/// `φ(q)/q²`, the density factor of the main term.
pub fn main_term_density(q: u64) -> f64 {
    UnitGroup::new(q).phi() as f64 / (q as f64 * q as f64)
}

/// `∏_{p|q} (1 − 1/p)² / φ(q)`, the same factor as it arises from the
/// principal-character residue.
pub fn residue_density(q: u64) -> f64 {
    let prod: f64 = prime_divisors(q).iter().map(|&p| 1.0 - 1.0 / p as f64).product();
    prod * prod / UnitGroup::new(q).phi() as f64
}

/// `c₁·x·ln x·φ(q)/q²`.
pub fn main_term(c1: f64, x: f64, q: u64) -> f64 {
    c1 * x * x.ln() * main_term_density(q)
}

/// `c₁(q) = L(1, sym²f⊗χ₀)³ · L(1, sym⁴f⊗χ₀) · U_{χ₀}(1)` with its pieces.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct C1Value {
    pub q: u64,
    pub c1: f64,
    pub sym2: LValue,
    pub sym4: LValue,
    /// `Σ_{n <= N_U, (n,q)=1} u(n)/n`.
    pub u_at_one: f64,
    /// Spread of the partial sums of `U(1)` over `(N_U/2, N_U]`.
    pub u_bracket: f64,
    /// Propagated truncation uncertainty of `c1`.
    pub bracket: f64,
}

/// Precomputed data for evaluating `c₁(q)` at many moduli.
#[derive(Debug, Clone)]
pub struct C1Model {
    eigen: EigenSystem,
    cutoff_p: usize,
    cutoff_u: usize,
    /// Nonzero `(n, u(n))` of the untwisted correction series.
    u_terms: Vec<(u64, f64)>,
    base: C1Value,
}

impl C1Model {
    /// `cutoff_p` is the Euler-product prime cutoff (>= 10³), `cutoff_u` the
    /// range of `U` (>= 10⁴). The eigen system must cover both.
    pub fn new(eigen: &EigenSystem, cutoff_p: usize, cutoff_u: usize) -> Result<Self> {
        if cutoff_p < 1000 || cutoff_u < 10_000 {
            return Err(LabError::InvalidArgument(format!(
                "c1 needs a prime cutoff >= 1000 and U range >= 10000, got {cutoff_p} and {cutoff_u}"
            )));
        }
        eigen.ensure_range(cutoff_p.max(cutoff_u))?;
        let triv = UnitGroup::new(1).character(0);
        let u = extract_u(eigen, &triv, cutoff_u)?;
        let u_terms = (1..=cutoff_u)
            .filter_map(|n| {
                let v = u.coeff(n).re;
                (v != 0.0 && u.coeff(n).norm() > 1e-12).then_some((n as u64, v))
            })
            .collect();
        let mut model = Self { eigen: eigen.clone(), cutoff_p, cutoff_u, u_terms, base: placeholder() };
        model.base = model.c1(1)?;
        Ok(model)
    }

    pub fn cutoffs(&self) -> (usize, usize) {
        (self.cutoff_p, self.cutoff_u)
    }

    /// Nonzero terms of `U` used for `U(1)`.
    pub fn u_terms(&self) -> &[(u64, f64)] {
        &self.u_terms
    }

    /// `Σ_{n<=N_U, (n,q)=1} u(n)/n` and the largest deviation of its partial
    /// sums over `n` in `(N_U/2, N_U]` from that value.
    fn u_at_one(&self, q: u64) -> (f64, f64) {
        let limit = self.cutoff_u as u64;
        let mut acc = NeumaierSum::new();
        let mut window = vec![];
        let mut entered = false;
        for &(n, u) in self.u_terms.iter().take_while(|t| t.0 <= limit) {
            if n > limit / 2 && !entered {
                window.push(acc.value());
                entered = true;
            }
            if n.gcd(&q) == 1 {
                acc.add(u / n as f64);
                if entered {
                    window.push(acc.value());
                }
            }
        }
        let total = acc.value();
        (total, window.iter().map(|v| (v - total).abs()).fold(0.0, f64::max))
    }

    /// `c₁(q)` from truncated Euler products and the truncated `U(1)`.
    pub fn c1(&self, q: u64) -> Result<C1Value> {
        let sym2 = l_value_at_one(LKind::Sym2, q, self.cutoff_p, &self.eigen)?;
        let sym4 = l_value_at_one(LKind::Sym4, q, self.cutoff_p, &self.eigen)?;
        let (u_at_one, u_bracket) = self.u_at_one(q);
        let c1 = sym2.value.powi(3) * sym4.value * u_at_one;
        let rel = 3.0 * sym2.bracket / sym2.value + sym4.bracket / sym4.value + u_bracket / u_at_one.abs();
        Ok(C1Value { q, c1, sym2, sym4, u_at_one, u_bracket, bracket: c1.abs() * rel })
    }

    /// `c₁(1)`.
    pub fn base(&self) -> &C1Value {
        &self.base
    }

    /// `F_p(1/p) = Σ_j λ_f(p^j)^4 p^{-j}` from the Satake angle.
    pub fn local_f_at_one(&self, p: u64) -> f64 {
        let x = 1.0 / p as f64;
        let j_max = (40.0 / (p as f64).log2()).ceil() as usize + 2;
        let lam = self.eigen.satake(p as usize).prime_power_lambdas(j_max);
        let mut acc = NeumaierSum::new();
        let mut xj = 1.0;
        for l in lam {
            acc.add(l.powi(4) * xj);
            xj *= x;
        }
        acc.value()
    }

    /// `c₁(q)/c₁(1) = ∏_{p|q} (1 − 1/p)^{-2} F_p(1/p)^{-1}`, the closed form of
    /// the removed Euler factors.
    pub fn closed_form_ratio(&self, primes: &[u64]) -> f64 {
        primes
            .iter()
            .map(|&p| {
                let w = 1.0 - 1.0 / p as f64;
                1.0 / (w * w * self.local_f_at_one(p))
            })
            .product()
    }

    /// `c₁` for a modulus with the given prime divisors, via the closed form.
    pub fn c1_for_primes(&self, primes: &[u64]) -> f64 {
        self.base.c1 * self.closed_form_ratio(primes)
    }
}

fn placeholder() -> C1Value {
    let l = LValue { value: f64::NAN, bracket: f64::NAN, cutoff: 0 };
    C1Value { q: 0, c1: f64::NAN, sym2: l, sym4: l, u_at_one: f64::NAN, u_bracket: f64::NAN, bracket: f64::NAN }
}

/// `c₁(q)` with prime cutoff `cutoff_p` and `U` range `cutoff_u`.
pub fn compute_c1(q: u64, eigen: &EigenSystem, cutoff_p: usize, cutoff_u: usize) -> Result<C1Value> {
    C1Model::new(eigen, cutoff_p, cutoff_u)?.c1(q)
}

/// One row of the progression-sum experiment.
#[derive(Debug, Clone, Serialize)]
pub struct ProgressionSumReport {
    pub x: u64,
    pub q: u64,
    pub residue: u64,
    pub s: f64,
    pub c1: f64,
    pub main: f64,
    pub ratio: f64,
    pub fit_a: f64,
    pub fit_b: f64,
    /// `c₁(q)·φ(q)/q²`, the coefficient the fitted `A` is compared to.
    pub predicted_a: f64,
    pub bracket: f64,
    /// `q >= 100`, the range covered by the asymptotic statements.
    pub in_stated_range: bool,
    pub error_exponent: &'static str,
}

/// Progression sums over `x_grid` with the two-term fit `A·x ln x + B·x`.
pub fn progression_trend(eigen: &EigenSystem, q: u64, x_grid: &[u64], c1: &C1Value) -> Result<Vec<ProgressionSumReport>> {
    if x_grid.len() < 3 {
        return Err(LabError::GridTooShort(x_grid.len()));
    }
    let mut grid = x_grid.to_vec();
    grid.sort_unstable();
    let sums = grid.iter().map(|&x| progression_sum(eigen, x, q)).collect::<Result<Vec<_>>>()?;
    let fit = fit_xlogx(&grid.iter().zip(&sums).map(|(&x, &s)| (x as f64, s)).collect::<Vec<_>>())?;
    let exponent = if is_prime(q) { PRIME_MODULUS_EXPONENT } else { PROGRESSION_EXPONENT };
    Ok(grid
        .iter()
        .zip(sums)
        .map(|(&x, s)| {
            let main = main_term(c1.c1, x as f64, q);
            ProgressionSumReport {
                x,
                q,
                residue: 1,
                s,
                c1: c1.c1,
                main,
                ratio: s / main,
                fit_a: fit.a,
                fit_b: fit.b,
                predicted_a: c1.c1 * main_term_density(q),
                bracket: c1.bracket,
                in_stated_range: q >= MIN_STATED_MODULUS,
                error_exponent: exponent,
            }
        })
        .collect())
}

fn is_prime(q: u64) -> bool {
    q >= 2 && crate::kfull::factorize(q) == [(q, 1)]
}

/// Slope of `ln|S − main|` against `ln x`, for juxtaposition with the
/// stated error exponents only.
pub fn error_exponent_estimate(points: &[(f64, f64)]) -> Result<f64> {
    log_log_slope(points)
}

/// `Σ_{n<=x} a(n) λ_f(n+1)^4`.
pub fn shifted_sum(eigen: &EigenSystem, kernel: KernelFunction, x: u64, k: u32) -> Result<f64> {
    let table = FactorTable::new(x as usize)?;
    shifted_sum_with(eigen, kernel, x, &KPartTable::new(&table, k))
}

/// As [`shifted_sum`] with a precomputed k-full part table covering `x`.
pub fn shifted_sum_with(eigen: &EigenSystem, kernel: KernelFunction, x: u64, kparts: &KPartTable) -> Result<f64> {
    eigen.ensure_range(x as usize + 1)?;
    if (x as usize) > kparts.range() {
        return Err(LabError::RangeExceeded { needed: x, available: kparts.range() as u64 });
    }
    Ok(ordered_par_sum(1..x as usize + 1, |n| {
        let a = kernel.eval_kpart(kparts.kpart(n));
        if a == 0.0 {
            0.0
        } else {
            a * eigen.lambda4(n + 1)
        }
    }))
}

/// The three reconstructions of a shifted sum.
#[derive(Debug, Clone, Serialize)]
pub struct SplitReport {
    pub x: u64,
    pub k: u32,
    pub kernel: KernelFunction,
    pub h: u64,
    /// (i) `Σ_{n<=x} a(n) λ_f(n+1)^4`.
    pub direct: f64,
    /// Terms with `k(n) <= H`.
    pub head: f64,
    /// Terms with `k(n) > H`.
    pub tail: f64,
    /// The head rewritten with `d <= H^{1/k}`.
    pub sigma1_star: f64,
    /// The head rewritten with `d > H^{1/k}`.
    pub sigma2_star: f64,
    /// (ii) `head + tail`.
    pub split_total: f64,
    /// (iii) `Σ₁* + Σ₂* + tail`.
    pub mobius_total: f64,
    pub residual_split: f64,
    pub residual_mobius: f64,
}

impl SplitReport {
    pub fn max_residual(&self) -> f64 {
        self.residual_split.max(self.residual_mobius)
    }
}

/// Checks the exact identity behind the shifted-sum decomposition.
///
/// The head `Σ_{k(n)<=H}` is rewritten as
/// `Σ_κ a(κ) Σ_{(d,κ)=1} μ(d) Σ_{δ|κ} μ(δ) Σ_{m ≥ 1, mQ <= x} λ_f(mQ+1)^4`
/// with `Q = δκd^k`, where the innermost sum is a progression sum mod `Q`
/// without its `n = 1` term.
pub fn split_check(eigen: &EigenSystem, kernel: KernelFunction, x: u64, k: u32, h: u64) -> Result<SplitReport> {
    if h == 0 || h > x {
        return Err(LabError::InvalidArgument(format!("split parameter must satisfy 1 <= H <= x, got H = {h}")));
    }
    eigen.ensure_range(x as usize + 1)?;
    let table = FactorTable::new(x as usize)?;
    let kparts = KPartTable::new(&table, k);
    let mu = table.mobius_table();

    let (mut head, mut tail) = (NeumaierSum::new(), NeumaierSum::new());
    for n in 1..=x as usize {
        let kappa = kparts.kpart(n);
        let a = kernel.eval_kpart(kappa);
        if a == 0.0 {
            continue;
        }
        let term = a * eigen.lambda4(n + 1);
        if kappa <= h {
            head.add(term);
        } else {
            tail.add(term);
        }
    }
    let direct = shifted_sum_with(eigen, kernel, x, &kparts)?;

    let d_split = crate::kfull::integer_root(h, k);
    let (mut s1, mut s2) = (NeumaierSum::new(), NeumaierSum::new());
    for kappa in enumerate_kfull(h.min(x), k) {
        let a = kernel.eval_kpart(kappa);
        if a == 0.0 {
            continue;
        }
        let deltas = squarefree_divisors(&table, kappa);
        let d_max = crate::kfull::integer_root(x / kappa, k);
        for d in 1..=d_max {
            if mu[d as usize] == 0 || d.gcd(&kappa) != 1 {
                continue;
            }
            let dk = d.pow(k);
            let mut inner = NeumaierSum::new();
            for &(delta, mu_delta) in &deltas {
                let modulus = delta * kappa * dk;
                let s = if modulus > x { 0.0 } else { progression_sum(eigen, x, modulus)? - 1.0 };
                inner.add(mu_delta as f64 * s);
            }
            let term = a * mu[d as usize] as f64 * inner.value();
            if d <= d_split {
                s1.add(term);
            } else {
                s2.add(term);
            }
        }
    }
    let (head, tail) = (head.value(), tail.value());
    let (sigma1_star, sigma2_star) = (s1.value(), s2.value());
    let split_total = head + tail;
    let mobius_total = sigma1_star + sigma2_star + tail;
    let scale = direct.abs().max(1.0);
    Ok(SplitReport {
        x,
        k,
        kernel,
        h,
        direct,
        head,
        tail,
        sigma1_star,
        sigma2_star,
        split_total,
        mobius_total,
        residual_split: (split_total - direct).abs() / scale,
        residual_mobius: (mobius_total - direct).abs() / scale,
    })
}

/// Squarefree divisors `δ | n` with `μ(δ)`.
fn squarefree_divisors(table: &FactorTable, n: u64) -> Vec<(u64, i8)> {
    let primes: Vec<u64> = table.factorize(n).expect("within sieve").into_iter().map(|(p, _)| p).collect();
    let mut out = vec![(1u64, 1i8)];
    for p in primes {
        let extra: Vec<(u64, i8)> = out.iter().map(|&(d, m)| (d * p, -m)).collect();
        out.extend(extra);
    }
    out
}

/// Truncated value of the shifted-sum main-term constant.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct C2Value {
    pub k: u32,
    pub kernel: KernelFunction,
    pub value: f64,
    /// `|value(K, D) − value(K/2, D/2)|`.
    pub bracket: f64,
    pub k_max: u64,
    pub d_max: u64,
}

/// `c₂ = Σ_κ a(κ)/κ Σ_{δ|κ} μ(δ)/δ Σ_{(d,κ)=1} μ(d)/d^k · c₁(Q)·φ(Q)/Q`
/// with `Q = δκd^k`, over k-full `κ <= K_max` and `d <= D_max`.
///
/// `c1_at` receives the distinct primes of `Q` (which are those of `κd`);
/// `c₁` and `φ(Q)/Q` depend on nothing else.
pub fn compute_c2<F>(kernel: KernelFunction, k: u32, c1_at: F, k_max: u64, d_max: u64) -> Result<C2Value>
where
    F: Fn(&[u64]) -> f64,
{
    if k < 2 {
        return Err(LabError::InvalidArgument(format!("k must be >= 2, got {k}")));
    }
    if k_max < 100 || d_max < 100 {
        return Err(LabError::InvalidArgument("c2 truncation bounds must be >= 100".into()));
    }
    let table = FactorTable::new(k_max.max(d_max) as usize)?;
    let full = c2_truncated(&table, kernel, k, &c1_at, k_max, d_max);
    let half = c2_truncated(&table, kernel, k, &c1_at, k_max / 2, d_max / 2);
    Ok(C2Value { k, kernel, value: full, bracket: (full - half).abs(), k_max, d_max })
}

fn c2_truncated<F>(table: &FactorTable, kernel: KernelFunction, k: u32, c1_at: &F, k_max: u64, d_max: u64) -> f64
where
    F: Fn(&[u64]) -> f64,
{
    let mu = table.mobius_table();
    let d_terms: Vec<(u64, f64, Vec<u64>)> = (1..=d_max)
        .filter(|&d| mu[d as usize] != 0)
        .map(|d| {
            let primes = table.factorize(d).expect("within sieve").into_iter().map(|(p, _)| p).collect();
            (d, mu[d as usize] as f64 / (d as f64).powi(k as i32), primes)
        })
        .collect();
    let mut total = NeumaierSum::new();
    for kappa in enumerate_kfull(k_max, k) {
        let a = kernel.eval_kpart(kappa);
        if a == 0.0 {
            continue;
        }
        let kappa_primes: Vec<u64> = table.factorize(kappa).expect("within sieve").into_iter().map(|(p, _)| p).collect();
        let delta_sum: f64 = squarefree_divisors(table, kappa).iter().map(|&(d, m)| m as f64 / d as f64).sum();
        let mut inner = NeumaierSum::new();
        let mut primes = Vec::new();
        for (d, weight, d_primes) in &d_terms {
            if d.gcd(&kappa) != 1 {
                continue;
            }
            primes.clear();
            primes.extend_from_slice(&kappa_primes);
            primes.extend_from_slice(d_primes);
            primes.sort_unstable();
            let density: f64 = primes.iter().map(|&p| 1.0 - 1.0 / p as f64).product();
            inner.add(weight * c1_at(&primes) * density);
        }
        total.add(a / kappa as f64 * delta_sum * inner.value());
    }
    total.value()
}

/// One row of the shifted-sum experiment.
#[derive(Debug, Clone, Serialize)]
pub struct ShiftedSumReport {
    pub x: u64,
    pub k: u32,
    pub kernel: KernelFunction,
    pub s: f64,
    pub c2: f64,
    pub main: f64,
    pub ratio: f64,
    pub fit_a: f64,
    pub fit_b: f64,
    pub bracket: f64,
    pub h: u64,
    pub error_exponent: String,
}

/// Shifted sums over `x_grid` with the two-term fit, compared with `c₂ x ln x`.
/// `H` is reported as `⌊x^{23/543}⌋`, the split the asymptotic argument uses.
pub fn shifted_trend(
    eigen: &EigenSystem,
    kernel: KernelFunction,
    k: u32,
    x_grid: &[u64],
    c2: &C2Value,
) -> Result<Vec<ShiftedSumReport>> {
    if x_grid.len() < 3 {
        return Err(LabError::GridTooShort(x_grid.len()));
    }
    let mut grid = x_grid.to_vec();
    grid.sort_unstable();
    let max = *grid.last().expect("non-empty grid");
    let table = FactorTable::new(max as usize)?;
    let kparts = KPartTable::new(&table, k);
    let sums = grid.iter().map(|&x| shifted_sum_with(eigen, kernel, x, &kparts)).collect::<Result<Vec<_>>>()?;
    let fit: XLogXFit = fit_xlogx(&grid.iter().zip(&sums).map(|(&x, &s)| (x as f64, s)).collect::<Vec<_>>())?;
    Ok(grid
        .iter()
        .zip(sums)
        .map(|(&x, s)| {
            let main = c2.value * x as f64 * (x as f64).ln();
            ShiftedSumReport {
                x,
                k,
                kernel,
                s,
                c2: c2.value,
                main,
                ratio: s / main,
                fit_a: fit.a,
                fit_b: fit.b,
                bracket: c2.bracket,
                h: (x as f64).powf(23.0 / 543.0).floor() as u64,
                error_exponent: shifted_exponent(k),
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::sync::OnceLock;
    use crate::kfull::is_kfree;

    fn delta(n: usize) -> EigenSystem {
        EigenSystem::delta(n).unwrap()
    }

    #[test]
    fn progression_examples() {
        let e = delta(200);
        let l4 = |n: usize| e.lambda4(n);
        assert_eq!(progression_sum(&e, 1, 1).unwrap(), l4(1) + l4(2));
        let expected = l4(1) + l4(4) + l4(7) + l4(10);
        assert!((progression_sum(&e, 10, 3).unwrap() - expected).abs() < 1e-15);
        assert!(matches!(progression_sum(&e, 200, 1), Err(LabError::RangeExceeded { .. })));
        assert!(progression_sum(&e, 0, 1).is_err());
    }

    #[test]
    fn progression_matches_character_side() {
        let e = delta(10_001);
        for q in [1u64, 2, 5, 7, 12] {
            let direct = progression_sum(&e, 10_000, q).unwrap();
            let chars = progression_sum_by_characters(&e, 10_000, q).unwrap();
            assert!((direct - chars).abs() < 1e-9 * direct, "q = {q}");
        }
    }

    #[test]
    fn main_term_forms_agree() {
        for q in 1..=300u64 {
            assert!((main_term_density(q) - residue_density(q)).abs() < 1e-15 * main_term_density(q));
        }
    }

    #[test]
    fn fitter_calibration_on_constant_eigenvalues() {
        // With λ_f^4 replaced by 1 and q = 1 the sum is S(x) = x + 1.
        let grid = [10_000u64, 100_000, 1_000_000];
        let pts: Vec<(f64, f64)> = grid.iter().map(|&x| (x as f64, x as f64 + 1.0)).collect();
        let fit = fit_xlogx(&pts).unwrap();
        assert!(fit.a.abs() < 1e-4 && (fit.b - 1.0).abs() < 1e-3, "{fit:?}");
    }

    #[test]
    fn trend_needs_three_points() {
        let e = delta(2000);
        let c1 = placeholder();
        assert!(matches!(progression_trend(&e, 1, &[100, 1000], &c1), Err(LabError::GridTooShort(2))));
    }

    #[test]
    fn shifted_examples() {
        let e = delta(20);
        let l4 = |n: usize| e.lambda4(n);
        let s = shifted_sum(&e, KernelFunction::ConstOne, 3, 2).unwrap();
        assert!((s - (l4(2) + l4(3) + l4(4))).abs() < 1e-15);
        let s = shifted_sum(&e, KernelFunction::KfreeIndicator, 10, 2).unwrap();
        let expected: f64 = [1usize, 2, 3, 5, 6, 7, 10].iter().map(|&n| l4(n + 1)).sum();
        assert!((s - expected).abs() < 1e-14);
        assert!((1..=10u64).filter(|&n| is_kfree(n, 2)).eq([1, 2, 3, 5, 6, 7, 10]));
    }

    #[test]
    fn split_identity_small() {
        let e = delta(1001);
        for kernel in KernelFunction::ALL {
            for k in [2u32, 3] {
                for h in [1u64, 4, 10, 100, 1000] {
                    let r = split_check(&e, kernel, 1000, k, h).unwrap();
                    assert!(r.max_residual() < 1e-12, "{r:?}");
                }
            }
        }
        let r = split_check(&e, KernelFunction::ConstOne, 100, 2, 4).unwrap();
        let brute: f64 = (1..=100usize).map(|n| e.lambda4(n + 1)).sum();
        assert!((r.direct - brute).abs() < 1e-12 * brute);
        let full = split_check(&e, KernelFunction::ConstOne, 100, 2, 100).unwrap();
        assert_eq!(full.tail, 0.0);
        let kfree = split_check(&e, KernelFunction::ConstOne, 100, 2, 1).unwrap();
        let non_kfree: f64 = (1..=100u64).filter(|&n| !is_kfree(n, 2)).map(|n| e.lambda4(n as usize + 1)).sum();
        assert!((kfree.tail - non_kfree).abs() < 1e-12 * non_kfree);
        assert!(split_check(&e, KernelFunction::ConstOne, 100, 2, 101).is_err());
    }

    #[test]
    fn c2_support_collapse_for_kfree_kernel() {
        // Only κ = 1 contributes: c₂ = Σ_d μ(d)/d^k · c₁(rad d)·φ(d)/d.
        let c1_at = |primes: &[u64]| 1.0 + primes.len() as f64;
        let v = compute_c2(KernelFunction::KfreeIndicator, 2, c1_at, 1000, 200).unwrap();
        let mut expected = 0.0;
        for d in 1..=200u64 {
            let f = crate::kfull::factorize(d);
            if f.iter().any(|&(_, e)| e > 1) {
                continue;
            }
            let mu = if f.len() % 2 == 0 { 1.0 } else { -1.0 };
            let density: f64 = f.iter().map(|&(p, _)| 1.0 - 1.0 / p as f64).product();
            expected += mu / (d * d) as f64 * (1.0 + f.len() as f64) * density;
        }
        assert!((v.value - expected).abs() < 1e-12);
    }

    #[test]
    fn error_exponent_calibration() {
        let flat: Vec<(f64, f64)> = [1e3, 1e4, 1e5].iter().map(|&x| (x, 5.0)).collect();
        assert!(error_exponent_estimate(&flat).unwrap().abs() < 1e-12);
        let pow: Vec<(f64, f64)> = [1e3, 1e4, 1e5, 1e6].iter().map(|&x: &f64| (x, x.powf(0.9))).collect();
        assert!((error_exponent_estimate(&pow).unwrap() - 0.9).abs() < 0.05);
    }

    #[test]
    fn shifted_exponent_metadata() {
        assert_eq!(shifted_exponent(2), "1063/1086");
    }

    fn shared() -> &'static EigenSystem {
        static SYSTEM: OnceLock<EigenSystem> = OnceLock::new();
        SYSTEM.get_or_init(|| delta(5001))
    }

    proptest! {
        #[test]
        fn progression_sum_is_monotone(x in 1u64..5000, step in 0u64..1000, q in 1u64..60) {
            let e = shared();
            let small = progression_sum(e, x, q).unwrap();
            let large = progression_sum(e, (x + step).min(5000), q).unwrap();
            prop_assert!(small >= 0.0);
            prop_assert!(large >= small);
        }

        #[test]
        fn split_identity_holds(x in 1u64..=5000, k in 2u32..5, h_frac in 0.0f64..=1.0, kernel in 0usize..4) {
            let h = ((x as f64 * h_frac) as u64).clamp(1, x);
            let r = split_check(shared(), KernelFunction::ALL[kernel], x, k, h).unwrap();
            prop_assert!(r.max_residual() < 1e-9);
        }
    }
}
