//! Exact versions of the factor series for the built-in τ system.
//!
//! Every coefficient `a(n)` is stored as `a(n)·n^{2(κ-1)}`. The shift
//! `s → s − 2(κ−1)` commutes with convolution and makes all series here
//! integral: `λ_f(n)^4 n^{2(κ-1)} = τ(n)^4`, and the scaled Satake roots of
//! sym^m are `α^{m-j} β^j p^{(κ-1)(4-m)/2}` with `α, β` the arithmetic
//! Satake parameters. Character values stay exact as roots of unity.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::Pow;
use serde::Serialize;

use super::ring::{CycloInt, QuadInt, SatakeRing, Turn};
use super::{max_exponent, removed_primes, FormalDirichletSeries, LKind};
use crate::charmod::DirichletCharacter;
use crate::eigencore::EigenSystem;
use crate::error::{LabError, Result};
use crate::kfull::FactorTable;

/// Coefficients `a(n)·n^{scale}` for `n = 1..=N`, slot 0 unused.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactSeries {
    label: String,
    scale: u32,
    coeffs: Vec<CycloInt>,
}

impl ExactSeries {
    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn range(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Exponent `e` with stored value `a(n)·n^e`.
    pub fn scale(&self) -> u32 {
        self.scale
    }

    pub fn coeff(&self, n: usize) -> &CycloInt {
        &self.coeffs[n]
    }

    /// The unscaled coefficient `a(n)` as a complex double.
    pub fn value(&self, n: usize) -> Complex64 {
        self.coeffs[n].to_complex_scaled(&BigInt::from(n).pow(self.scale))
    }

    pub fn to_formal(&self) -> FormalDirichletSeries {
        FormalDirichletSeries::from_fn(self.label.clone(), self.range(), |n| self.value(n))
    }

    /// Indices where the two series differ.
    pub fn mismatches(&self, other: &Self) -> Result<Vec<usize>> {
        check(self, other)?;
        Ok((1..=self.range()).filter(|&n| self.coeffs[n] != other.coeffs[n]).collect())
    }

    /// `max_n |a(n) − f(n)| / max(|a(n)|, 1)` against a floating series.
    pub fn max_float_discrepancy(&self, float: &FormalDirichletSeries) -> Result<f64> {
        if float.range() != self.range() {
            return Err(LabError::LengthMismatch { left: self.range(), right: float.range() });
        }
        Ok((1..=self.range())
            .map(|n| {
                let exact = self.value(n);
                (exact - float.coeff(n)).norm() / exact.norm().max(1.0)
            })
            .fold(0.0, f64::max))
    }
}

fn check(a: &ExactSeries, b: &ExactSeries) -> Result<()> {
    if a.range() != b.range() {
        return Err(LabError::LengthMismatch { left: a.range(), right: b.range() });
    }
    if a.scale != b.scale {
        return Err(LabError::InvalidArgument(format!("scales differ: {} vs {}", a.scale, b.scale)));
    }
    Ok(())
}

pub fn exact_convolve(a: &ExactSeries, b: &ExactSeries) -> Result<ExactSeries> {
    check(a, b)?;
    let n = a.range();
    let mut out = vec![CycloInt::zero(); n + 1];
    for d in 1..=n {
        if a.coeffs[d].is_zero() {
            continue;
        }
        for m in 1..=n / d {
            if !b.coeffs[m].is_zero() {
                out[d * m].add_product(&a.coeffs[d], &b.coeffs[m]);
            }
        }
    }
    Ok(ExactSeries { label: format!("{}*{}", a.label, b.label), scale: a.scale, coeffs: out })
}

/// Exact division by a series with `b(1) = 1`.
pub fn exact_divide(c: &ExactSeries, b: &ExactSeries) -> Result<ExactSeries> {
    check(c, b)?;
    if !b.coeffs[1].is_one() {
        return Err(LabError::SingularDivisor);
    }
    let n = c.range();
    let tail: Vec<usize> = (2..=n).filter(|&m| !b.coeffs[m].is_zero()).collect();
    let mut acc = vec![CycloInt::zero(); n + 1];
    let mut a = vec![CycloInt::zero(); n + 1];
    for i in 1..=n {
        let mut v = c.coeffs[i].clone();
        v.sub_assign(&acc[i]);
        if !v.is_zero() {
            for &m in &tail {
                if i * m > n {
                    break;
                }
                let t = v.mul(&b.coeffs[m]);
                acc[i * m].add_assign(&t);
            }
        }
        a[i] = v;
    }
    Ok(ExactSeries { label: format!("{}/{}", c.label, b.label), scale: c.scale, coeffs: a })
}

fn exact_from_euler<F>(label: String, n: usize, scale: u32, local: F) -> Result<ExactSeries>
where
    F: Fn(u64, usize) -> Vec<CycloInt>,
{
    let table = FactorTable::new(n)?;
    let mut coeffs = vec![CycloInt::zero(); n + 1];
    coeffs[1] = CycloInt::one();
    for &p in table.primes_up_to(n) {
        let p = p as usize;
        let j_max = max_exponent(p, n);
        let l = local(p as u64, j_max);
        if l.len() <= j_max || !l[0].is_one() {
            return Err(LabError::BadLocalFactor(p as u64));
        }
        let mut pk = p;
        for v in l.into_iter().skip(1).take(j_max) {
            coeffs[pk] = v;
            pk = pk.saturating_mul(p);
        }
    }
    for i in 2..=n {
        let (_, _, m) = table.strip_smallest(i);
        if m > 1 {
            coeffs[i] = coeffs[i / m].mul(&coeffs[m]);
        }
    }
    Ok(ExactSeries { label, scale, coeffs })
}

/// Exact local data of a τ-backed eigen system.
#[derive(Debug, Clone, Copy)]
pub struct ExactEigen<'a> {
    weight: u32,
    tau: &'a [i128],
}

impl<'a> ExactEigen<'a> {
    pub fn new(eigen: &'a EigenSystem) -> Result<Self> {
        let tau = eigen
            .tau()
            .ok_or_else(|| LabError::InvalidArgument("exact series need an exact tau table".into()))?;
        Ok(Self { weight: eigen.weight(), tau })
    }

    pub fn range(&self) -> usize {
        self.tau.len() - 1
    }

    /// Scale exponent `2(κ − 1)`.
    pub fn scale(&self) -> u32 {
        2 * (self.weight - 1)
    }

    fn ring(&self, p: u64) -> SatakeRing {
        SatakeRing::new(BigInt::from(self.tau[p as usize]), BigInt::from(p).pow(self.weight - 1))
    }

    /// Scaled roots `α^{m-j}β^j p^{(κ-1)(4-m)/2}`, `j = 0..=m`, with the ring they live in.
    pub fn scaled_roots(&self, kind: LKind, p: u64) -> (SatakeRing, Vec<QuadInt>) {
        let ring = self.ring(p);
        let m = kind.power();
        let factor = QuadInt::int(BigInt::from(p).pow((self.weight - 1) * (4 - m) / 2));
        let (alpha, beta) = (ring.alpha(), ring.beta());
        let roots = (0..=m)
            .map(|j| {
                let r = ring.mul(&ring.pow(&alpha, m - j), &ring.pow(&beta, j));
                ring.mul(&r, &factor)
            })
            .collect();
        (ring, roots)
    }

    /// Integer coefficients of `∏_j (1 − r_j X)` over the scaled roots.
    pub fn local_polynomial(&self, kind: LKind, p: u64) -> Vec<BigInt> {
        let (ring, roots) = self.scaled_roots(kind, p);
        ring.root_product(&roots)
    }
}

fn twisted_power(c: &BigInt, turn: Option<Turn>, j: usize) -> CycloInt {
    match turn {
        _ if j == 0 => CycloInt::from_int(c.clone()),
        None => CycloInt::zero(),
        Some((num, den)) => CycloInt::monomial(c.clone(), ((num * j as u64) % den, den)),
    }
}

/// Exact `L(s, ·⊗χ)^power` coefficients.
pub fn exact_l_factor_series(
    kind: LKind,
    eigen: &ExactEigen,
    chi: &DirichletCharacter,
    n: usize,
    power: usize,
) -> Result<ExactSeries> {
    check_range(eigen, n)?;
    let label = if power == 1 { kind.name().to_string() } else { format!("{}^{power}", kind.name()) };
    exact_from_euler(label, n, eigen.scale(), |p, j_max| {
        let (ring, roots) = eigen.scaled_roots(kind, p);
        let roots: Vec<QuadInt> = roots.iter().cycle().take(roots.len() * power).cloned().collect();
        let turn = chi.turn(p);
        ring.inverse_root_product(&roots, j_max)
            .iter()
            .enumerate()
            .map(|(j, h)| twisted_power(h, turn, j))
            .collect()
    })
}

fn check_range(eigen: &ExactEigen, n: usize) -> Result<()> {
    if n > eigen.range() {
        return Err(LabError::RangeExceeded { needed: n as u64, available: eigen.range() as u64 });
    }
    Ok(())
}

/// `τ(n)^4 χ(n)`, the scaled coefficients of `F(s, χ)`.
pub fn exact_f(eigen: &ExactEigen, chi: &DirichletCharacter, n: usize) -> Result<ExactSeries> {
    check_range(eigen, n)?;
    let coeffs = (0..=n)
        .map(|i| match chi.turn(i as u64) {
            Some(t) if i > 0 => CycloInt::monomial(BigInt::from(eigen.tau[i]).pow(4u32), t),
            _ => CycloInt::zero(),
        })
        .collect();
    Ok(ExactSeries { label: "F".into(), scale: eigen.scale(), coeffs })
}

/// Exact `U = F / (L·L·(sym²)³·sym⁴)`.
pub fn exact_extract_u(eigen: &ExactEigen, chi: &DirichletCharacter, n: usize) -> Result<ExactSeries> {
    let l = exact_l_factor_series(LKind::Dirichlet, eigen, chi, n, 1)?;
    let sym2_cubed = exact_l_factor_series(LKind::Sym2, eigen, chi, n, 3)?;
    let sym4 = exact_l_factor_series(LKind::Sym4, eigen, chi, n, 1)?;
    let mut u = exact_f(eigen, chi, n)?;
    for divisor in [&l, &l, &sym2_cubed, &sym4] {
        u = exact_divide(&u, divisor)?;
    }
    u.label = "U".into();
    Ok(u)
}

/// Exact finite series `∏_{p ∈ primes} ∏_j (1 − α_p^{m-2j}χ*(p) p^{-s})`.
pub fn exact_correction_product(
    kind: LKind,
    eigen: &ExactEigen,
    chi_star: &DirichletCharacter,
    primes: &[u64],
    n: usize,
) -> Result<ExactSeries> {
    check_range(eigen, n)?;
    exact_from_euler(format!("P_{}", kind.name()), n, eigen.scale(), |p, j_max| {
        let mut v = vec![CycloInt::zero(); j_max + 1];
        v[0] = CycloInt::one();
        if primes.contains(&p) {
            let turn = chi_star.turn(p);
            for (j, c) in eigen.local_polynomial(kind, p).iter().enumerate().take(j_max + 1) {
                v[j] = twisted_power(c, turn, j);
            }
        }
        v
    })
}

/// Result of comparing `L(s, ·⊗χ)` with `L(s, ·⊗χ*)` times its finite
/// correction product, coefficient by coefficient.
#[derive(Debug, Clone, Serialize)]
pub struct InducedIdentityReport {
    pub q: u64,
    pub index: u64,
    pub conductor: u64,
    pub kind: LKind,
    pub range: usize,
    pub mismatches: usize,
    pub first_mismatch: Option<usize>,
}

impl InducedIdentityReport {
    pub fn holds(&self) -> bool {
        self.mismatches == 0
    }
}

/// Exact check of `L(s, ·⊗χ) = L(s, ·⊗χ*) ∏_{p|q, p∤q₁} ∏_j (1 − α^{m-2j}χ*(p)p^{-s})`
/// for `n <= N`. For principal `χ` this is the removal of all `p | q`.
pub fn induced_identity_check(
    kind: LKind,
    eigen: &ExactEigen,
    chi: &DirichletCharacter,
    n: usize,
) -> Result<InducedIdentityReport> {
    let (_, star) = chi.factor_through();
    let lhs = exact_l_factor_series(kind, eigen, chi, n, 1)?;
    let primitive = exact_l_factor_series(kind, eigen, &star, n, 1)?;
    let correction = exact_correction_product(kind, eigen, &star, &removed_primes(chi), n)?;
    let rhs = exact_convolve(&primitive, &correction)?;
    let bad = lhs.mismatches(&rhs)?;
    Ok(InducedIdentityReport {
        q: chi.modulus(),
        index: chi.index(),
        conductor: chi.conductor(),
        kind,
        range: n,
        mismatches: bad.len(),
        first_mismatch: bad.first().copied(),
    })
}

/// Structural checks on an exact `U`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ExactCorrectionReport {
    pub u1_is_one: bool,
    pub nonzero_at_primes: usize,
    pub nonzero_off_squarefull: usize,
}

pub fn exact_correction_report(u: &ExactSeries) -> Result<ExactCorrectionReport> {
    let table = FactorTable::new(u.range())?;
    let mut report = ExactCorrectionReport { u1_is_one: u.coeff(1).is_one(), nonzero_at_primes: 0, nonzero_off_squarefull: 0 };
    for n in 2..=u.range() {
        if u.coeff(n).is_zero() {
            continue;
        }
        if table.is_prime(n) {
            report.nonzero_at_primes += 1;
        }
        if !super::is_squarefull(&table, n) {
            report.nonzero_off_squarefull += 1;
        }
    }
    Ok(report)
}

/// `true` when the series is multiplicative on `1..=N`.
///
/// Checking `a(n) = a(p^e)·a(n/p^e)` with `p` the smallest prime factor of
/// every `n` is equivalent to multiplicativity on the whole range.
pub fn exact_is_multiplicative(a: &ExactSeries) -> Result<bool> {
    let table = FactorTable::new(a.range())?;
    Ok(a.coeff(1).is_one()
        && (2..=a.range()).all(|n| {
            let (_, _, m) = table.strip_smallest(n);
            m == 1 || a.coeff(n) == &a.coeff(n / m).mul(a.coeff(m))
        }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::charmod::enumerate_characters;
    use crate::dseries::Factorization;

    #[test]
    fn exact_u_structure_for_delta() {
        let n = 1500;
        let eigen = EigenSystem::delta(n).unwrap();
        let exact = ExactEigen::new(&eigen).unwrap();
        assert_eq!(exact.scale(), 22);
        let triv = enumerate_characters(1).principal().clone();
        let u = exact_extract_u(&exact, &triv, n).unwrap();
        let report = exact_correction_report(&u).unwrap();
        assert!(report.u1_is_one);
        assert_eq!(report.nonzero_at_primes, 0);
        assert_eq!(report.nonzero_off_squarefull, 0);
        assert!(exact_is_multiplicative(&u).unwrap());

        let float = Factorization::build(&eigen, &triv, n).unwrap();
        assert!(u.max_float_discrepancy(&float.u.u).unwrap() < 1e-9);
        // F itself is exactly reproduced by multiplying back.
        let f = exact_f(&exact, &triv, n).unwrap();
        let l = exact_l_factor_series(LKind::Dirichlet, &exact, &triv, n, 1).unwrap();
        let s2 = exact_l_factor_series(LKind::Sym2, &exact, &triv, n, 1).unwrap();
        let s4 = exact_l_factor_series(LKind::Sym4, &exact, &triv, n, 1).unwrap();
        let mut prod = u.clone();
        for s in [&l, &l, &s2, &s2, &s2, &s4] {
            prod = exact_convolve(&prod, s).unwrap();
        }
        assert!(prod.mismatches(&f).unwrap().is_empty());
    }

    #[test]
    fn exact_twisted_u_is_pointwise_twist() {
        let n = 600;
        let eigen = EigenSystem::delta(n).unwrap();
        let exact = ExactEigen::new(&eigen).unwrap();
        let triv = enumerate_characters(1).principal().clone();
        let u = exact_extract_u(&exact, &triv, n).unwrap();
        for chi in enumerate_characters(8).characters() {
            let uc = exact_extract_u(&exact, chi, n).unwrap();
            for i in 1..=n {
                let expected = match chi.turn(i as u64) {
                    Some(t) => u.coeff(i).rotate(t),
                    None => CycloInt::zero(),
                };
                assert_eq!(uc.coeff(i), &expected, "n = {i}");
            }
        }
    }

    #[test]
    fn exact_factors_match_floating_factors() {
        let n = 400;
        let eigen = EigenSystem::delta(n).unwrap();
        let exact = ExactEigen::new(&eigen).unwrap();
        for chi in enumerate_characters(5).characters() {
            for kind in LKind::ALL {
                let e = exact_l_factor_series(kind, &exact, chi, n, 1).unwrap();
                let f = crate::dseries::l_factor_series(kind, &eigen, chi, n, 1).unwrap();
                assert!(e.max_float_discrepancy(&f).unwrap() < 1e-10, "{kind:?}");
            }
        }
    }

    #[test]
    fn induced_identities_hold_exactly() {
        let n = 800;
        let eigen = EigenSystem::delta(n).unwrap();
        let exact = ExactEigen::new(&eigen).unwrap();
        for q in [6u64, 12, 15] {
            for chi in enumerate_characters(q).characters().iter().filter(|c| !c.is_primitive()) {
                for kind in LKind::ALL {
                    let r = induced_identity_check(kind, &exact, chi, n).unwrap();
                    assert!(r.holds(), "{r:?}");
                }
            }
        }
    }

    #[test]
    fn identity_check_detects_a_wrong_correction() {
        // Omitting the correction product must break the identity for a
        // non-primitive character.
        let n = 200;
        let eigen = EigenSystem::delta(n).unwrap();
        let exact = ExactEigen::new(&eigen).unwrap();
        let chi = enumerate_characters(6).principal().clone();
        let lhs = exact_l_factor_series(LKind::Sym2, &exact, &chi, n, 1).unwrap();
        let (_, star) = chi.factor_through();
        let rhs = exact_l_factor_series(LKind::Sym2, &exact, &star, n, 1).unwrap();
        assert_eq!(lhs.mismatches(&rhs).unwrap().first(), Some(&2));
    }

    #[test]
    fn exact_divide_rejects_non_unit_leading_coefficient() {
        let n = 50;
        let eigen = EigenSystem::delta(n).unwrap();
        let exact = ExactEigen::new(&eigen).unwrap();
        let triv = enumerate_characters(1).principal().clone();
        let f = exact_f(&exact, &triv, n).unwrap();
        let zero = ExactSeries { label: "0".into(), scale: 22, coeffs: vec![CycloInt::zero(); n + 1] };
        assert!(matches!(exact_divide(&f, &zero), Err(LabError::SingularDivisor)));
        let seeded = EigenSystem::from_prime_seed(12, &eigen.prime_seed(n), n).unwrap();
        assert!(ExactEigen::new(&seeded).is_err());
    }
}
