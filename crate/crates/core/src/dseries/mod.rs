//! Formal Dirichlet series truncated at `N`: convolution, division, Euler
//! product assembly, the L-factors of `Σ λ_f(n)^4 χ(n) n^{-s}` and the
//! correction series that completes its factorization.
//!
//! Coefficient vectors are indexed by `n` directly with slot 0 unused.

mod exact;
mod lfactors;
mod ring;

pub use exact::*;
pub use lfactors::*;
pub use ring::{CycloInt, QuadInt, SatakeRing, Turn};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::charmod::DirichletCharacter;
use crate::eigencore::{inverse_root_product, EigenSystem};
use crate::error::{LabError, Result};
use crate::kfull::FactorTable;
use crate::numerics::{ComplexSum, NeumaierSum, REDUCTION_BLOCK};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[inline]
fn is_zero(z: Complex64) -> bool {
    z.re == 0.0 && z.im == 0.0
}

/// Coefficients `a(1..=N)` of `Σ a(n) n^{-s}`.
#[derive(Debug, Clone, PartialEq)]
pub struct FormalDirichletSeries {
    label: String,
    coeffs: Vec<Complex64>,
}

impl FormalDirichletSeries {
    /// Wraps `coeffs`, where `coeffs[n] = a(n)` and `coeffs[0]` is ignored.
    pub fn new(label: impl Into<String>, mut coeffs: Vec<Complex64>) -> Self {
        assert!(coeffs.len() >= 2, "series needs at least one coefficient");
        coeffs[0] = ZERO;
        Self { label: label.into(), coeffs }
    }

    pub fn from_fn(label: impl Into<String>, n: usize, f: impl Fn(usize) -> Complex64) -> Self {
        let mut coeffs = vec![ZERO; n + 1];
        for (i, c) in coeffs.iter_mut().enumerate().skip(1) {
            *c = f(i);
        }
        Self::new(label, coeffs)
    }

    pub fn from_real(label: impl Into<String>, values: &[f64]) -> Self {
        Self::new(label, values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    /// The unit `e` of convolution.
    pub fn identity(n: usize) -> Self {
        Self::from_fn("e", n, |i| if i == 1 { ONE } else { ZERO })
    }

    /// `ζ(s)`: every coefficient 1.
    pub fn ones(n: usize) -> Self {
        Self::from_fn("1", n, |_| ONE)
    }

    pub fn mobius(n: usize) -> Result<Self> {
        let mu = FactorTable::new(n)?.mobius_table();
        Ok(Self::from_fn("mu", n, |i| Complex64::new(mu[i] as f64, 0.0)))
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn range(&self) -> usize {
        self.coeffs.len() - 1
    }

    #[inline]
    pub fn coeff(&self, n: usize) -> Complex64 {
        self.coeffs[n]
    }

    /// All coefficients, slot 0 included (always zero).
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// `a(n)·χ(n)`.
    pub fn twist(&self, chi: &DirichletCharacter) -> Self {
        Self::from_fn(format!("{}.chi", self.label), self.range(), |n| self.coeffs[n] * chi.value(n as u64))
    }

    /// `max_n |a(n) − b(n)| / max(|b(n)|, 1)`.
    pub fn max_residual(&self, reference: &Self) -> Result<f64> {
        check_lengths(self, reference)?;
        Ok(self
            .coeffs
            .iter()
            .zip(&reference.coeffs)
            .skip(1)
            .map(|(a, b)| (a - b).norm() / b.norm().max(1.0))
            .fold(0.0, f64::max))
    }
}

fn check_lengths(a: &FormalDirichletSeries, b: &FormalDirichletSeries) -> Result<()> {
    if a.range() != b.range() {
        return Err(LabError::LengthMismatch { left: a.range(), right: b.range() });
    }
    Ok(())
}

/// `c(n) = Σ_{d|n} a(d)·b(n/d)`.
///
/// Output indices are split into fixed blocks computed in parallel; each
/// coefficient is accumulated over `d` in increasing order, so the result
/// does not depend on the thread count.
pub fn dirichlet_convolve(a: &FormalDirichletSeries, b: &FormalDirichletSeries) -> Result<FormalDirichletSeries> {
    check_lengths(a, b)?;
    let n = a.range();
    let starts: Vec<usize> = (1..=n).step_by(REDUCTION_BLOCK).collect();
    let blocks: Vec<Vec<Complex64>> = starts
        .par_iter()
        .map(|&lo| {
            let hi = (lo + REDUCTION_BLOCK - 1).min(n);
            let mut acc = vec![ComplexSum::default(); hi - lo + 1];
            for d in 1..=hi {
                let ad = a.coeffs[d];
                if is_zero(ad) {
                    continue;
                }
                for m in lo.div_ceil(d)..=hi / d {
                    let bm = b.coeffs[m];
                    if !is_zero(bm) {
                        acc[d * m - lo].add(ad * bm);
                    }
                }
            }
            acc.iter().map(ComplexSum::value).collect()
        })
        .collect();
    let mut coeffs = Vec::with_capacity(n + 1);
    coeffs.push(ZERO);
    for block in blocks {
        coeffs.extend(block);
    }
    Ok(FormalDirichletSeries::new(format!("{}*{}", a.label, b.label), coeffs))
}

/// Convolution of several series, left to right.
pub fn convolve_all(series: &[&FormalDirichletSeries]) -> Result<FormalDirichletSeries> {
    let (first, rest) = series.split_first().ok_or_else(|| LabError::InvalidArgument("empty product".into()))?;
    let mut acc = (*first).clone();
    for s in rest {
        acc = dirichlet_convolve(&acc, s)?;
    }
    Ok(acc)
}

/// The series `A` with `A * B = C`.
///
/// Each `a(n)` depends on all `a(d)`, `d | n`, so this runs serially in `n`.
pub fn dirichlet_divide(c: &FormalDirichletSeries, b: &FormalDirichletSeries) -> Result<FormalDirichletSeries> {
    check_lengths(c, b)?;
    let b1 = b.coeffs[1];
    if b1.norm() == 0.0 {
        return Err(LabError::SingularDivisor);
    }
    let n = c.range();
    let inv = b1.inv();
    let tail: Vec<(usize, Complex64)> = (2..=n).map(|m| (m, b.coeffs[m])).filter(|&(_, v)| !is_zero(v)).collect();
    let mut acc = vec![ComplexSum::default(); n + 1];
    let mut a = vec![ZERO; n + 1];
    for i in 1..=n {
        let v = (c.coeffs[i] - acc[i].value()) * inv;
        a[i] = v;
        if is_zero(v) {
            continue;
        }
        for &(m, bm) in &tail {
            if i * m > n {
                break;
            }
            acc[i * m].add(v * bm);
        }
    }
    Ok(FormalDirichletSeries::new(format!("{}/{}", c.label, b.label), a))
}

/// Largest `j` with `p^j <= n`.
pub(crate) fn max_exponent(p: usize, n: usize) -> usize {
    let mut j = 0;
    let mut pk = 1usize;
    while pk <= n / p {
        pk *= p;
        j += 1;
    }
    j
}

/// Multiplicative series with `a(p^j) = local(p, J)[j]`, where `J` is the
/// largest exponent with `p^J <= n`. Every local factor must start with 1.
pub fn build_from_euler<F>(label: impl Into<String>, n: usize, local: F) -> Result<FormalDirichletSeries>
where
    F: Fn(u64, usize) -> Vec<Complex64> + Sync,
{
    let table = FactorTable::new(n)?;
    build_from_euler_with(&table, label, n, local)
}

pub(crate) fn build_from_euler_with<F>(
    table: &FactorTable,
    label: impl Into<String>,
    n: usize,
    local: F,
) -> Result<FormalDirichletSeries>
where
    F: Fn(u64, usize) -> Vec<Complex64> + Sync,
{
    let primes = table.primes_up_to(n);
    let locals: Vec<Vec<Complex64>> = primes
        .par_iter()
        .map(|&p| local(p as u64, max_exponent(p as usize, n)))
        .collect();
    let mut coeffs = vec![ZERO; n + 1];
    coeffs[1] = ONE;
    for (&p, l) in primes.iter().zip(&locals) {
        let p = p as usize;
        let j_max = max_exponent(p, n);
        if l.len() <= j_max || (l[0] - ONE).norm() > 1e-12 {
            return Err(LabError::BadLocalFactor(p as u64));
        }
        let mut pk = p;
        for &v in &l[1..=j_max] {
            coeffs[pk] = v;
            pk = pk.saturating_mul(p);
        }
    }
    for i in 2..=n {
        let (_, _, m) = table.strip_smallest(i);
        if m > 1 {
            coeffs[i] = coeffs[i / m] * coeffs[m];
        }
    }
    Ok(FormalDirichletSeries::new(label, coeffs))
}

/// Which L-function a factor series represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LKind {
    /// `L(s, χ)`, one Satake value 1.
    Dirichlet,
    /// `L(s, sym²f ⊗ χ)`.
    Sym2,
    /// `L(s, sym⁴f ⊗ χ)`.
    Sym4,
}

impl LKind {
    pub const ALL: [LKind; 3] = [LKind::Dirichlet, LKind::Sym2, LKind::Sym4];

    /// Symmetric power `m`; the factor has degree `m + 1`.
    pub fn power(self) -> u32 {
        match self {
            LKind::Dirichlet => 0,
            LKind::Sym2 => 2,
            LKind::Sym4 => 4,
        }
    }

    pub fn degree(self) -> usize {
        self.power() as usize + 1
    }

    pub fn name(self) -> &'static str {
        match self {
            LKind::Dirichlet => "L",
            LKind::Sym2 => "sym2",
            LKind::Sym4 => "sym4",
        }
    }

    /// Local roots `α_p^{m-2j}χ(p)`, `j = 0..=m`, taken `power` times.
    pub fn twisted_roots(self, eigen: &EigenSystem, p: u64, chi: &DirichletCharacter, power: usize) -> Vec<Complex64> {
        let c = chi.value(p);
        let base: Vec<Complex64> = match self {
            LKind::Dirichlet => vec![c],
            _ => eigen.satake(p as usize).sym_roots(self.power()).into_iter().map(|r| r * c).collect(),
        };
        base.iter().cycle().take(base.len() * power).copied().collect()
    }
}

/// Coefficients of `L(s, ·⊗χ)^power` from its Euler product.
pub fn l_factor_series(
    kind: LKind,
    eigen: &EigenSystem,
    chi: &DirichletCharacter,
    n: usize,
    power: usize,
) -> Result<FormalDirichletSeries> {
    eigen.ensure_range(n)?;
    let label = if power == 1 { kind.name().to_string() } else { format!("{}^{power}", kind.name()) };
    build_from_euler(label, n, |p, j| inverse_root_product(&kind.twisted_roots(eigen, p, chi, power), j))
}

/// `F(s, χ) = Σ λ_f(n)^4 χ(n) n^{-s}`.
pub fn build_f(eigen: &EigenSystem, chi: &DirichletCharacter, n: usize) -> Result<FormalDirichletSeries> {
    eigen.ensure_range(n)?;
    Ok(FormalDirichletSeries::from_fn("F", n, |i| chi.value(i as u64) * eigen.lambda4(i)))
}

/// The series `U` completing `F = L²·(sym²)³·sym⁴·U`.
#[derive(Debug, Clone)]
pub struct CorrectionSeries {
    pub u: FormalDirichletSeries,
    pub chi_label: String,
}

/// How far a computed `U` is from its structural properties.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CorrectionInvariants {
    pub u1_error: f64,
    /// `max |u(p)|` over primes `p <= N`.
    pub max_at_primes: f64,
    /// `max |u(n)|` over `n` that are not squarefull.
    pub max_off_squarefull: f64,
}

impl CorrectionSeries {
    pub fn coeff(&self, n: usize) -> Complex64 {
        self.u.coeff(n)
    }

    pub fn range(&self) -> usize {
        self.u.range()
    }

    pub fn invariants(&self) -> Result<CorrectionInvariants> {
        let n = self.range();
        let table = FactorTable::new(n)?;
        let mut inv = CorrectionInvariants { u1_error: (self.coeff(1) - ONE).norm(), max_at_primes: 0.0, max_off_squarefull: 0.0 };
        for i in 2..=n {
            let v = self.coeff(i).norm();
            if table.is_prime(i) {
                inv.max_at_primes = inv.max_at_primes.max(v);
            }
            if !is_squarefull(&table, i) {
                inv.max_off_squarefull = inv.max_off_squarefull.max(v);
            }
        }
        Ok(inv)
    }

    /// Indices `n <= N` where `|u(n)|` exceeds `tol`.
    pub fn support(&self, tol: f64) -> Vec<usize> {
        (1..=self.range()).filter(|&n| self.coeff(n).norm() > tol).collect()
    }
}

pub(crate) fn is_squarefull(table: &FactorTable, mut n: usize) -> bool {
    while n > 1 {
        let (_, e, m) = table.strip_smallest(n);
        if e < 2 {
            return false;
        }
        n = m;
    }
    true
}

/// All series entering the factorization of `F(s, χ)` at range `N`.
#[derive(Debug, Clone)]
pub struct Factorization {
    pub f: FormalDirichletSeries,
    pub l: FormalDirichletSeries,
    pub sym2: FormalDirichletSeries,
    pub sym2_cubed: FormalDirichletSeries,
    pub sym4: FormalDirichletSeries,
    pub u: CorrectionSeries,
}

impl Factorization {
    pub fn build(eigen: &EigenSystem, chi: &DirichletCharacter, n: usize) -> Result<Self> {
        let f = build_f(eigen, chi, n)?;
        let l = l_factor_series(LKind::Dirichlet, eigen, chi, n, 1)?;
        let sym2 = l_factor_series(LKind::Sym2, eigen, chi, n, 1)?;
        let sym2_cubed = l_factor_series(LKind::Sym2, eigen, chi, n, 3)?;
        let sym4 = l_factor_series(LKind::Sym4, eigen, chi, n, 1)?;
        let mut u = f.clone();
        for divisor in [&l, &l, &sym2_cubed, &sym4] {
            u = dirichlet_divide(&u, divisor)?;
        }
        let u = CorrectionSeries { u: u.with_label("U"), chi_label: character_label(chi) };
        Ok(Self { f, l, sym2, sym2_cubed, sym4, u })
    }

    /// `L·L·sym2·sym2·sym2·sym4·U`, built from the single factors.
    pub fn reconstruct(&self) -> Result<FormalDirichletSeries> {
        convolve_all(&[&self.l, &self.l, &self.sym2, &self.sym2, &self.sym2, &self.sym4, &self.u.u])
    }

    /// Largest floored relative residual between the reconstruction and `F`.
    pub fn residual(&self) -> Result<f64> {
        self.reconstruct()?.max_residual(&self.f)
    }
}

/// `U` for the given character; see [`Factorization::build`].
pub fn extract_u(eigen: &EigenSystem, chi: &DirichletCharacter, n: usize) -> Result<CorrectionSeries> {
    Ok(Factorization::build(eigen, chi, n)?.u)
}

pub fn character_label(chi: &DirichletCharacter) -> String {
    format!("chi[{}:{}]", chi.modulus(), chi.index())
}

/// Partial sums of `Σ |u(n)| n^{-σ}` at increasing cutoffs.
#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceReport {
    pub sigma: f64,
    /// `(X, Σ_{n<=X} |u(n)| n^{-σ})`.
    pub partial_sums: Vec<(usize, f64)>,
    /// Increment over the last window.
    pub last_increment: f64,
    /// Increment over the window before it (zero with fewer than three cutoffs).
    pub previous_increment: f64,
    /// Set when the last increment is not smaller than the previous one.
    pub non_cauchy: bool,
}

pub fn convergence_diagnostic(u: &CorrectionSeries, sigma: f64, windows: &[usize]) -> Result<ConvergenceReport> {
    if !(sigma > 0.5 && sigma <= 1.0) {
        return Err(LabError::InvalidArgument(format!("sigma must lie in (0.5, 1], got {sigma}")));
    }
    let mut cutoffs: Vec<usize> = windows.to_vec();
    cutoffs.sort_unstable();
    cutoffs.dedup();
    if let Some(&last) = cutoffs.last() {
        if last > u.range() {
            return Err(LabError::RangeExceeded { needed: last as u64, available: u.range() as u64 });
        }
    }
    let mut acc = NeumaierSum::new();
    let mut partial_sums = Vec::with_capacity(cutoffs.len());
    let mut next = 1;
    for &x in &cutoffs {
        while next <= x {
            let v = u.coeff(next).norm();
            if v != 0.0 {
                acc.add(v * (next as f64).powf(-sigma));
            }
            next += 1;
        }
        partial_sums.push((x, acc.value()));
    }
    let inc = |i: usize| partial_sums[i].1 - partial_sums[i - 1].1;
    let k = partial_sums.len();
    let last_increment = if k >= 2 { inc(k - 1) } else { 0.0 };
    let previous_increment = if k >= 3 { inc(k - 2) } else { 0.0 };
    let non_cauchy = k >= 3 && last_increment > 0.0 && last_increment >= previous_increment;
    Ok(ConvergenceReport { sigma, partial_sums, last_increment, previous_increment, non_cauchy })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use crate::charmod::enumerate_characters;
    use crate::kfull::factorize;

    fn real(s: &FormalDirichletSeries, n: usize) -> f64 {
        s.coeff(n).re
    }

    #[test]
    fn convolution_examples() {
        let one = FormalDirichletSeries::ones(100);
        let d = dirichlet_convolve(&one, &one).unwrap();
        assert_eq!(real(&d, 6), 4.0);
        assert_eq!(real(&d, 64), 7.0);
        let e = FormalDirichletSeries::identity(100);
        assert_eq!(dirichlet_convolve(&d, &e).unwrap().coeffs(), d.coeffs());
        let mu = FormalDirichletSeries::mobius(100).unwrap();
        assert_eq!(dirichlet_convolve(&mu, &one).unwrap().coeffs(), e.coeffs());
        assert!(dirichlet_convolve(&one, &FormalDirichletSeries::ones(99)).is_err());
    }

    #[test]
    fn division_examples() {
        let one = FormalDirichletSeries::ones(200);
        let e = FormalDirichletSeries::identity(200);
        let d = dirichlet_convolve(&one, &one).unwrap();
        assert_eq!(dirichlet_divide(&d, &one).unwrap().coeffs(), one.coeffs());
        assert_eq!(dirichlet_divide(&d, &d).unwrap().coeffs(), e.coeffs());
        let mu = FormalDirichletSeries::mobius(200).unwrap();
        assert_eq!(dirichlet_divide(&e, &one).unwrap().coeffs(), mu.coeffs());
        let singular = FormalDirichletSeries::from_fn("z", 200, |n| if n == 1 { ZERO } else { ONE });
        assert!(matches!(dirichlet_divide(&one, &singular), Err(LabError::SingularDivisor)));
    }

    #[test]
    fn convolution_blocks_cover_long_ranges() {
        // Crosses several reduction blocks; compare d(n) with trial division.
        let n = 3 * REDUCTION_BLOCK + 17;
        let one = FormalDirichletSeries::ones(n);
        let d = dirichlet_convolve(&one, &one).unwrap();
        for i in [1, REDUCTION_BLOCK - 1, REDUCTION_BLOCK, REDUCTION_BLOCK + 1, 2 * REDUCTION_BLOCK + 5, n] {
            let expected: u32 = factorize(i as u64).iter().map(|&(_, e)| e + 1).product();
            assert_eq!(real(&d, i), expected as f64, "n = {i}");
        }
    }

    #[test]
    fn euler_examples() {
        let zeta = build_from_euler("zeta", 500, |_, j| vec![ONE; j + 1]).unwrap();
        assert_eq!(zeta.coeffs(), FormalDirichletSeries::ones(500).coeffs());

        let bad = build_from_euler("bad", 50, |_, j| vec![Complex64::new(2.0, 0.0); j + 1]);
        assert!(matches!(bad, Err(LabError::BadLocalFactor(2))));

        // L(s, χ₀ mod q) is ζ with the coefficients at gcd(n, q) > 1 removed.
        let chi0 = enumerate_characters(6).principal().clone();
        let l = build_from_euler("L", 300, |p, j| {
            inverse_root_product(&[chi0.value(p)], j)
        })
        .unwrap();
        for n in 1..=300usize {
            let expected = if n % 2 == 0 || n % 3 == 0 { 0.0 } else { 1.0 };
            assert_eq!(real(&l, n), expected);
        }
    }

    #[test]
    fn sym2_coefficient_at_p_squared_with_zero_eigenvalue() {
        let seed = (2..=100u64).map(|p| (p, 0.0)).collect();
        let eigen = EigenSystem::from_prime_seed(12, &seed, 100).unwrap();
        let triv = enumerate_characters(1).principal().clone();
        let s = l_factor_series(LKind::Sym2, &eigen, &triv, 100, 1).unwrap();
        assert!((real(&s, 4) - 2.0).abs() < 1e-12);
        assert!((real(&s, 2) + 1.0).abs() < 1e-12);
    }

    #[test]
    fn f_series_examples() {
        let eigen = EigenSystem::delta(64).unwrap();
        let triv = enumerate_characters(1).principal().clone();
        let f = build_f(&eigen, &triv, 64).unwrap();
        assert_eq!(f.coeff(1), ONE);
        let lam2 = -24.0 / 2f64.powf(5.5);
        assert!((real(&f, 2) - lam2.powi(4)).abs() < 1e-14);
        let chi0 = enumerate_characters(2).principal().clone();
        let f2 = build_f(&eigen, &chi0, 64).unwrap();
        assert!((2..=64).step_by(2).all(|n| is_zero(f2.coeff(n))));
    }

    /// Expands `F_p(X) / (L_p² (sym²)_p³ sym⁴_p)` as a power series in `X`
    /// to order `J` directly from the Satake angle, independently of the
    /// global divisions.
    fn local_u_oracle(theta: f64, j_max: usize) -> Vec<f64> {
        let s = crate::eigencore::SatakeAngle { p: 0, theta };
        let lam = s.prime_power_lambdas(j_max);
        let f: Vec<f64> = lam.iter().map(|l| l.powi(4)).collect();
        let mut roots = vec![ONE, ONE];
        for _ in 0..3 {
            roots.extend(s.sym_roots(2));
        }
        roots.extend(s.sym_roots(4));
        // Multiplying by ∏(1 − rX) divides by the L-factors.
        let poly = crate::eigencore::root_product(&roots);
        (0..=j_max)
            .map(|j| (0..=j.min(poly.len() - 1)).map(|i| poly[i].re * f[j - i]).sum())
            .collect()
    }

    #[test]
    fn correction_series_for_delta() {
        let n = 3000;
        let eigen = EigenSystem::delta(n).unwrap();
        let triv = enumerate_characters(1).principal().clone();
        let fac = Factorization::build(&eigen, &triv, n).unwrap();
        let inv = fac.u.invariants().unwrap();
        assert!(inv.u1_error == 0.0);
        assert!(inv.max_at_primes < 1e-10, "{inv:?}");
        assert!(inv.max_off_squarefull < 1e-9, "{inv:?}");
        assert!(fac.residual().unwrap() < 1e-9);

        for (p, ks) in [(2usize, [4usize, 8]), (3, [9, 27])] {
            let oracle = local_u_oracle(eigen.satake(p).theta, 3);
            assert!((fac.u.coeff(ks[0]).re - oracle[2]).abs() < 1e-9);
            assert!((fac.u.coeff(ks[1]).re - oracle[3]).abs() < 1e-9);
        }
        assert!((fac.u.coeff(36) - fac.u.coeff(4) * fac.u.coeff(9)).norm() < 1e-9);
    }

    #[test]
    fn twisted_correction_is_pointwise_twist() {
        let n = 2000;
        let eigen = EigenSystem::delta(n).unwrap();
        let triv = enumerate_characters(1).principal().clone();
        let u = extract_u(&eigen, &triv, n).unwrap();
        for chi in enumerate_characters(5).characters() {
            let uc = extract_u(&eigen, chi, n).unwrap();
            for i in 1..=n {
                assert!((uc.coeff(i) - u.coeff(i) * chi.value(i as u64)).norm() < 1e-9 * u.coeff(i).norm().max(1.0));
            }
        }
    }

    #[test]
    fn convergence_examples() {
        let e = CorrectionSeries { u: FormalDirichletSeries::identity(1000), chi_label: "e".into() };
        let r = convergence_diagnostic(&e, 0.75, &[10, 100, 1000]).unwrap();
        assert!(r.partial_sums.iter().all(|&(_, s)| s == 1.0));
        assert_eq!(r.last_increment, 0.0);
        assert!(!r.non_cauchy);
        assert!(convergence_diagnostic(&e, 0.5, &[10]).is_err());
        assert!(convergence_diagnostic(&e, 0.75, &[2000]).is_err());

        let eigen = EigenSystem::delta(5000).unwrap();
        let u = extract_u(&eigen, enumerate_characters(1).principal(), 5000).unwrap();
        let lo = convergence_diagnostic(&u, 0.51, &[50, 500, 5000]).unwrap();
        let hi = convergence_diagnostic(&u, 1.0, &[50, 500, 5000]).unwrap();
        for (a, b) in hi.partial_sums.iter().zip(&lo.partial_sums) {
            assert!(a.1 <= b.1);
        }
        assert!(lo.partial_sums.windows(2).all(|w| w[1].1 >= w[0].1));
    }

    fn random_series(values: &[(f64, f64)]) -> FormalDirichletSeries {
        FormalDirichletSeries::from_fn("r", values.len(), |n| {
            if n == 1 { ONE } else { Complex64::new(values[n - 1].0, values[n - 1].1) }
        })
    }

    proptest! {
        #[test]
        fn divide_undoes_convolve(
            a in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 120),
            b in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 120),
        ) {
            let (a, b) = (random_series(&a), random_series(&b));
            let c = dirichlet_convolve(&a, &b).unwrap();
            prop_assert!(dirichlet_divide(&c, &b).unwrap().max_residual(&a).unwrap() < 1e-9);
            prop_assert!(dirichlet_convolve(&b, &a).unwrap().max_residual(&c).unwrap() < 1e-12);
        }
    }
}
