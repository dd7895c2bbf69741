//! Euler products at `s = 1` with the primes dividing `q` removed, and the
//! finite correction products relating imprimitive twists to primitive ones.

use num_complex::Complex64;
use serde::Serialize;

use super::{build_from_euler_with, FormalDirichletSeries, LKind};
use crate::charmod::DirichletCharacter;
use crate::eigencore::{root_product, EigenSystem};
use crate::error::{LabError, Result};
use crate::kfull::{factorize, FactorTable};
use crate::numerics::NeumaierSum;

/// A truncated Euler product with an empirical truncation error.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct LValue {
    pub value: f64,
    /// Largest deviation of the partial products over primes in `(P/2, P]`
    /// from the final value.
    pub bracket: f64,
    pub cutoff: usize,
}

/// Distinct primes dividing `q`.
pub fn prime_divisors(q: u64) -> Vec<u64> {
    factorize(q).into_iter().map(|(p, _)| p).collect()
}

/// `∏_r (1 − r/p)` over the untwisted local roots of `kind` at `p`; the Euler
/// factor removed for `p | q`.
pub fn removed_euler_factor(kind: LKind, eigen: &EigenSystem, p: u64) -> f64 {
    let triv = crate::charmod::UnitGroup::new(1).character(0);
    local_polynomial_at(&kind.twisted_roots(eigen, p, &triv, 1), Complex64::new(1.0 / p as f64, 0.0)).re
}

fn local_polynomial_at(roots: &[Complex64], x: Complex64) -> Complex64 {
    roots.iter().map(|r| Complex64::new(1.0, 0.0) - r * x).product()
}

/// `L(1, sym^m f ⊗ χ₀)` for `χ₀` principal mod `q`, as the Euler product over
/// primes `p <= P`, `p ∤ q`.
pub fn l_value_at_one(kind: LKind, q: u64, cutoff: usize, eigen: &EigenSystem) -> Result<LValue> {
    l_value_with_correction(kind, q, cutoff, eigen, &[])
}

/// As [`l_value_at_one`], multiplied by the explicitly given removed factors
/// at the primes `extra` (an empty list leaves the value unchanged).
pub fn l_value_with_correction(
    kind: LKind,
    q: u64,
    cutoff: usize,
    eigen: &EigenSystem,
    extra: &[u64],
) -> Result<LValue> {
    if cutoff < 100 {
        return Err(LabError::InvalidArgument(format!("prime cutoff must be >= 100, got {cutoff}")));
    }
    if kind == LKind::Dirichlet {
        return Err(LabError::InvalidArgument("L(1, chi_0) has a pole".into()));
    }
    eigen.ensure_range(cutoff)?;
    let table = FactorTable::new(cutoff)?;
    let removed = prime_divisors(q);
    let mut log = NeumaierSum::new();
    // Partial log-products after each prime in (P/2, P]; the product
    // oscillates, so its spread over that window is the truncation bracket.
    let mut window = Vec::new();
    for &p in table.primes_up_to(cutoff) {
        let p = p as u64;
        if !removed.contains(&p) {
            log.add(-removed_euler_factor(kind, eigen, p).ln());
        }
        if p as usize > cutoff / 2 {
            window.push(log.value());
        }
    }
    let extra_log: f64 = extra.iter().map(|&p| removed_euler_factor(kind, eigen, p).ln()).sum();
    let last = log.value();
    let spread = window.iter().map(|v| (v - last).abs()).fold(0.0, f64::max);
    let value = (last + extra_log).exp();
    Ok(LValue { value, bracket: value * spread.exp_m1(), cutoff })
}

/// Local polynomial coefficients of `∏_j (1 − α_p^{m-2j} χ*(p) X)`.
pub fn twisted_local_polynomial(kind: LKind, eigen: &EigenSystem, p: u64, chi_star: &DirichletCharacter) -> Vec<Complex64> {
    root_product(&kind.twisted_roots(eigen, p, chi_star, 1))
}

/// The finite series `∏_{p ∈ primes} ∏_j (1 − α_p^{m-2j}χ*(p) p^{-s})`.
pub fn correction_product_series(
    kind: LKind,
    eigen: &EigenSystem,
    chi_star: &DirichletCharacter,
    primes: &[u64],
    n: usize,
) -> Result<FormalDirichletSeries> {
    let table = FactorTable::new(n)?;
    build_from_euler_with(&table, format!("P_{}", kind.name()), n, |p, j| {
        let mut v = vec![Complex64::new(0.0, 0.0); j + 1];
        v[0] = Complex64::new(1.0, 0.0);
        if primes.contains(&p) {
            for (slot, c) in v.iter_mut().zip(twisted_local_polynomial(kind, eigen, p, chi_star)) {
                *slot = c;
            }
        }
        v
    })
}

/// Primes dividing `q` but not the conductor of `χ`.
pub fn removed_primes(chi: &DirichletCharacter) -> Vec<u64> {
    let q1 = chi.conductor();
    prime_divisors(chi.modulus()).into_iter().filter(|p| q1 % p != 0).collect()
}

/// One evaluation of a correction product at `s = σ + it` against its bounds.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CorrectionBoundSample {
    pub q: u64,
    pub index: u64,
    pub kind: LKind,
    pub sigma: f64,
    pub t: f64,
    pub modulus: f64,
    /// `∏_p (1 + p^{-σ})^{m+1}`, the triangle-inequality bound.
    pub bound: f64,
    /// `∏_p (1 + (m+1)/p^σ)`, which coincides with `bound` for one factor.
    pub linear_bound: f64,
}

impl CorrectionBoundSample {
    pub fn holds(&self) -> bool {
        self.modulus <= self.bound * (1.0 + 1e-12)
    }
}

pub fn correction_bound_sample(
    kind: LKind,
    eigen: &EigenSystem,
    chi: &DirichletCharacter,
    s: Complex64,
) -> CorrectionBoundSample {
    let (_, star) = chi.factor_through();
    let degree = kind.degree() as i32;
    let mut modulus = 1.0;
    let mut bound = 1.0;
    let mut linear_bound = 1.0;
    for p in removed_primes(chi) {
        let x = Complex64::new(p as f64, 0.0).powc(-s);
        modulus *= local_polynomial_at(&kind.twisted_roots(eigen, p, &star, 1), x).norm();
        let ps = (p as f64).powf(-s.re);
        bound *= (1.0 + ps).powi(degree);
        linear_bound *= 1.0 + degree as f64 * ps;
    }
    CorrectionBoundSample { q: chi.modulus(), index: chi.index(), kind, sigma: s.re, t: s.im, modulus, bound, linear_bound }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::charmod::enumerate_characters;
    use crate::dseries::{dirichlet_convolve, l_factor_series};

    #[test]
    fn empty_correction_is_identity() {
        let eigen = EigenSystem::delta(1000).unwrap();
        let a = l_value_at_one(LKind::Sym2, 1, 1000, &eigen).unwrap();
        let b = l_value_with_correction(LKind::Sym2, 1, 1000, &eigen, &[]).unwrap();
        assert_eq!(a.value, b.value);
        assert!(l_value_at_one(LKind::Sym2, 1, 99, &eigen).is_err());
    }

    #[test]
    fn principal_twist_removes_euler_factors() {
        let eigen = EigenSystem::delta(2000).unwrap();
        for kind in [LKind::Sym2, LKind::Sym4] {
            let full = l_value_at_one(kind, 1, 2000, &eigen).unwrap().value;
            let six = l_value_at_one(kind, 6, 2000, &eigen).unwrap().value;
            let expected = full * removed_euler_factor(kind, &eigen, 2) * removed_euler_factor(kind, &eigen, 3);
            assert!((six - expected).abs() < 1e-12 * expected);
            let back = l_value_with_correction(kind, 1, 2000, &eigen, &[2, 3]).unwrap().value;
            assert!((six - back).abs() < 1e-12 * six);
        }
    }

    #[test]
    fn removed_factor_is_positive_and_matches_roots() {
        let eigen = EigenSystem::delta(100).unwrap();
        for p in [2u64, 3, 5, 7, 97] {
            let x = 1.0 / p as f64;
            let c2 = (2.0 * eigen.satake(p as usize).theta).cos();
            let sym2 = (1.0 - x) * (1.0 - 2.0 * c2 * x + x * x);
            assert!((removed_euler_factor(LKind::Sym2, &eigen, p) - sym2).abs() < 1e-14);
            assert!(removed_euler_factor(LKind::Sym4, &eigen, p) > 0.0);
        }
    }

    #[test]
    fn principal_identity_coefficientwise() {
        // L(s, sym²f ⊗ χ₀) = L(s, sym²f)·∏_{p|q}∏_j(1 − α^{2-2j}/p^s), in floating point.
        let n = 2000;
        let eigen = EigenSystem::delta(n).unwrap();
        let triv = enumerate_characters(1).principal().clone();
        for q in [6u64, 10, 12] {
            let chi0 = enumerate_characters(q).principal().clone();
            for kind in LKind::ALL {
                let lhs = l_factor_series(kind, &eigen, &chi0, n, 1).unwrap();
                let full = l_factor_series(kind, &eigen, &triv, n, 1).unwrap();
                let corr = correction_product_series(kind, &eigen, &triv, &prime_divisors(q), n).unwrap();
                let rhs = dirichlet_convolve(&full, &corr).unwrap();
                assert!(rhs.max_residual(&lhs).unwrap() < 1e-9, "q = {q} {kind:?}");
            }
        }
    }

    #[test]
    fn bound_samples_hold() {
        let eigen = EigenSystem::delta(100).unwrap();
        for chi in enumerate_characters(12).characters() {
            for kind in LKind::ALL {
                for (sigma, t) in [(0.6, 0.0), (0.8, 1.0), (1.0, 10.0)] {
                    let s = correction_bound_sample(kind, &eigen, chi, Complex64::new(sigma, t));
                    assert!(s.holds(), "{s:?}");
                    if kind == LKind::Dirichlet {
                        assert_eq!(s.bound, s.linear_bound);
                    }
                }
            }
        }
    }
}
