//! Dirichlet characters modulo q: CRT construction from prime-power
//! components, conductors, induced-character factoring and orthogonality.
//!
//! Values are kept exactly as exponents `k` of `e^{2πik/ord}`; cached complex
//! doubles are used for summation only.

use std::f64::consts::PI;

use num_complex::Complex64;
use num_integer::Integer;
use rayon::prelude::*;

use crate::error::{LabError, Result};
use crate::kfull::factorize;
use crate::ntt::primitive_root;
use crate::numerics::ComplexSum;

const NON_UNIT: u32 = u32::MAX;

/// One cyclic factor of `(ℤ/q)^*`: a generator's discrete logs on residues
/// modulo the prime power `modulus`.
#[derive(Debug, Clone)]
struct CyclicComponent {
    modulus: u64,
    order: u64,
    /// Discrete log of each residue mod `modulus` (NON_UNIT off units).
    log: Vec<u32>,
}

impl CyclicComponent {
    fn from_generator(modulus: u64, generator: u64, order: u64, sign_quotient: bool) -> Self {
        let mut log = vec![NON_UNIT; modulus as usize];
        let mut g = 1u64;
        for i in 0..order {
            log[g as usize] = i as u32;
            if sign_quotient {
                log[(modulus - g) as usize] = i as u32;
            }
            g = g * generator % modulus;
        }
        Self { modulus, order, log }
    }
}

/// Structure of `(ℤ/q)^*` as a product of cyclic groups.
#[derive(Debug, Clone)]
pub struct UnitGroup {
    modulus: u64,
    components: Vec<CyclicComponent>,
    /// Per-residue exponent vectors, flattened; row `r` starts at `r * components.len()`.
    logs: Vec<u32>,
    phi: u64,
    exponent: u64,
}

impl UnitGroup {
    pub fn new(q: u64) -> Self {
        assert!(q >= 1, "modulus must be positive");
        let mut components = Vec::new();
        for (p, a) in factorize(q) {
            let pa = p.pow(a);
            if p == 2 {
                if a >= 2 {
                    // -1 generates the sign factor.
                    let mut c = CyclicComponent { modulus: pa, order: 2, log: vec![NON_UNIT; pa as usize] };
                    for r in (1..pa).step_by(2) {
                        c.log[r as usize] = if r % 4 == 1 { 0 } else { 1 };
                    }
                    components.push(c);
                }
                if a >= 3 {
                    // 5 generates the residues ≡ 1 (mod 4); ±5^i covers all units.
                    components.push(CyclicComponent::from_generator(pa, 5, pa / 4, true));
                }
            } else {
                let g = odd_prime_power_root(p, a);
                components.push(CyclicComponent::from_generator(pa, g, pa / p * (p - 1), false));
            }
        }
        let r = components.len();
        let mut logs = vec![NON_UNIT; q as usize * r];
        for n in 0..q {
            if n.gcd(&q) != 1 {
                continue;
            }
            for (i, c) in components.iter().enumerate() {
                logs[n as usize * r + i] = c.log[(n % c.modulus) as usize];
            }
        }
        let phi = components.iter().map(|c| c.order).product();
        let exponent = components.iter().fold(1, |acc, c| acc.lcm(&c.order));
        Self { modulus: q, components, logs, phi, exponent }
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn phi(&self) -> u64 {
        self.phi
    }

    /// Orders of the cyclic factors.
    pub fn component_orders(&self) -> Vec<u64> {
        self.components.iter().map(|c| c.order).collect()
    }

    /// The character with mixed-radix index `index` over the component orders;
    /// index 0 is principal.
    pub fn character(&self, index: u64) -> DirichletCharacter {
        assert!(index < self.phi);
        let r = self.components.len();
        let mut rest = index;
        let mut weights = Vec::with_capacity(r);
        for c in &self.components {
            // Exponent contribution of this component, scaled to the group exponent.
            weights.push((rest % c.order) * (self.exponent / c.order));
            rest /= c.order;
        }
        let l = self.exponent;
        let raw: Vec<u32> = (0..self.modulus as usize)
            .map(|n| {
                let row = &self.logs[n * r..(n + 1) * r];
                if r == 0 {
                    if (n as u64).gcd(&self.modulus) == 1 { 0 } else { NON_UNIT }
                } else if row[0] == NON_UNIT {
                    NON_UNIT
                } else {
                    (row.iter().zip(&weights).map(|(&e, &w)| e as u64 * w).sum::<u64>() % l) as u32
                }
            })
            .collect();
        let g = raw.iter().filter(|&&e| e != NON_UNIT).fold(l, |acc, &e| acc.gcd(&(e as u64)));
        let order = l / g;
        let exponents = raw.into_iter().map(|e| if e == NON_UNIT { e } else { (e as u64 / g) as u32 }).collect();
        DirichletCharacter::from_exponents(self.modulus, index, order, exponents)
    }

    pub fn characters(&self) -> impl Iterator<Item = DirichletCharacter> + '_ {
        (0..self.phi).map(|i| self.character(i))
    }
}

fn odd_prime_power_root(p: u64, a: u32) -> u64 {
    let g = primitive_root(p);
    if a == 1 {
        return g;
    }
    // g generates mod p^a unless g^{p-1} ≡ 1 (mod p²), in which case g + p does.
    let p2 = p * p;
    if crate::ntt::pow_mod(g, p - 1, p2) == 1 {
        g + p
    } else {
        g
    }
}

/// A Dirichlet character modulo `q`.
#[derive(Debug, Clone)]
pub struct DirichletCharacter {
    modulus: u64,
    index: u64,
    order: u64,
    /// `χ(n) = e^{2πi·exponent[n]/order}` for units, `NON_UNIT` elsewhere.
    exponents: Vec<u32>,
    values: Vec<Complex64>,
    conductor: u64,
}

impl DirichletCharacter {
    fn from_exponents(modulus: u64, index: u64, order: u64, exponents: Vec<u32>) -> Self {
        let values = exponents
            .iter()
            .map(|&e| {
                if e == NON_UNIT {
                    Complex64::new(0.0, 0.0)
                } else {
                    root_of_unity(e as u64, order)
                }
            })
            .collect();
        let mut chi = Self { modulus, index, order, exponents, values, conductor: 0 };
        chi.conductor = chi.compute_conductor();
        chi
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn index(&self) -> u64 {
        self.index
    }

    /// Multiplicative order of the character.
    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn conductor(&self) -> u64 {
        self.conductor
    }

    pub fn is_primitive(&self) -> bool {
        self.conductor == self.modulus
    }

    pub fn is_principal(&self) -> bool {
        self.order == 1
    }

    /// Exact value as an exponent of `e^{2πi/order}`; `None` off units.
    #[inline]
    pub fn exponent(&self, n: u64) -> Option<u32> {
        let e = self.exponents[(n % self.modulus) as usize];
        (e != NON_UNIT).then_some(e)
    }

    #[inline]
    pub fn value(&self, n: u64) -> Complex64 {
        self.values[(n % self.modulus) as usize]
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Exact value as a reduced fraction of a full turn, `χ(n) = e^{2πi·num/den}`.
    pub fn turn(&self, n: u64) -> Option<(u64, u64)> {
        self.exponent(n).map(|e| {
            let g = (e as u64).gcd(&self.order);
            (e as u64 / g, self.order / g)
        })
    }

    /// Smallest `m | q` such that χ is trivial on units `u ≡ 1 (mod m)`.
    fn compute_conductor(&self) -> u64 {
        let q = self.modulus;
        let mut divisors: Vec<u64> = (1..=q).filter(|d| q % d == 0).collect();
        divisors.sort_unstable();
        for m in divisors {
            let trivial = (0..q)
                .step_by(m as usize)
                .map(|t| (t + 1) % q)
                .all(|u| matches!(self.exponent(u), None | Some(0)));
            if trivial {
                return m;
            }
        }
        q
    }

    /// Factors `χ = χ₀ · χ*` with `χ₀` principal mod `q` and `χ*` primitive
    /// modulo the conductor.
    pub fn factor_through(&self) -> (DirichletCharacter, DirichletCharacter) {
        let q = self.modulus;
        let q1 = self.conductor;
        let principal = UnitGroup::new(q).character(0);
        let mut exps = vec![NON_UNIT; q1 as usize];
        for v in 0..q1 {
            if v.gcd(&q1) != 1 && q1 > 1 {
                continue;
            }
            let lift = (0..q / q1).map(|t| v + t * q1).find(|u| u.gcd(&q) == 1);
            exps[v as usize] = match lift {
                Some(u) => self.exponents[u as usize],
                None => 0,
            };
        }
        let g = exps.iter().filter(|&&e| e != NON_UNIT).fold(self.order, |acc, &e| acc.gcd(&(e as u64)));
        let exps = exps.into_iter().map(|e| if e == NON_UNIT { e } else { (e as u64 / g) as u32 }).collect();
        let star = DirichletCharacter::from_exponents(q1, self.index, self.order / g, exps);
        (principal, star)
    }
}

fn root_of_unity(k: u64, order: u64) -> Complex64 {
    let k = k % order;
    // Exact values at the quarter turns.
    if 4 * k % order == 0 {
        return match 4 * k / order {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, 1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, -1.0),
        };
    }
    Complex64::from_polar(1.0, 2.0 * PI * k as f64 / order as f64)
}

/// All `φ(q)` characters modulo `q`.
#[derive(Debug, Clone)]
pub struct CharacterGroup {
    modulus: u64,
    phi: u64,
    characters: Vec<DirichletCharacter>,
}

impl CharacterGroup {
    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn phi(&self) -> u64 {
        self.phi
    }

    pub fn characters(&self) -> &[DirichletCharacter] {
        &self.characters
    }

    pub fn principal(&self) -> &DirichletCharacter {
        &self.characters[0]
    }
}

pub fn enumerate_characters(q: u64) -> CharacterGroup {
    let group = UnitGroup::new(q);
    CharacterGroup { modulus: q, phi: group.phi(), characters: group.characters().collect() }
}

/// `(1/φ(q)) Σ_χ χ̄(a) Σ_{n<=X} v(n)χ(n)`, which isolates the terms with
/// `n ≡ a (mod q)`. `values[n]` holds `v(n)`; slot 0 is ignored.
pub fn orthogonality_project(values: &[f64], group: &CharacterGroup, a: u64) -> Result<Complex64> {
    let q = group.modulus();
    if a.gcd(&q) != 1 {
        return Err(LabError::NonUnitResidue { a, q });
    }
    let partials: Vec<Complex64> = group
        .characters()
        .par_iter()
        .map(|chi| {
            let mut twisted = ComplexSum::default();
            for (n, &v) in values.iter().enumerate().skip(1) {
                twisted.add(chi.value(n as u64) * v);
            }
            chi.value(a).conj() * twisted.value()
        })
        .collect();
    let mut total = ComplexSum::default();
    for z in partials {
        total.add(z);
    }
    Ok(total.value() / group.phi() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
        (a - b).norm() < tol
    }

    #[test]
    fn small_groups() {
        let g1 = enumerate_characters(1);
        assert_eq!(g1.phi(), 1);
        assert!(g1.principal().is_principal());
        assert_eq!(g1.principal().value(17), Complex64::new(1.0, 0.0));

        let g4 = enumerate_characters(4);
        assert_eq!(g4.characters().len(), 2);
        assert_eq!(g4.characters()[1].value(3), Complex64::new(-1.0, 0.0));

        let g6 = enumerate_characters(6);
        assert_eq!(g6.characters().len(), 2);
        let chi = &g6.characters()[1];
        assert_eq!(chi.conductor(), 3);
        assert!(!chi.is_primitive());
    }

    #[test]
    fn group_axioms_for_small_moduli() {
        for q in 1..=120u64 {
            let g = enumerate_characters(q);
            let phi = (1..=q).filter(|n| n.gcd(&q) == 1).count() as u64;
            assert_eq!(g.phi(), phi, "q = {q}");
            assert_eq!(g.characters().iter().filter(|c| c.is_principal()).count(), 1);
            for chi in g.characters() {
                assert_eq!(chi.exponent(1), Some(0));
                for a in 0..q {
                    assert_eq!(chi.exponent(a).is_none(), a.gcd(&q) > 1 && q > 1);
                    for b in 0..q {
                        let ab = chi.exponent(a * b % q);
                        let sum = chi.exponent(a).zip(chi.exponent(b)).map(|(x, y)| ((x + y) as u64 % chi.order()) as u32);
                        assert_eq!(ab, sum, "q = {q}");
                    }
                }
            }
            // Distinctness.
            for (i, c) in g.characters().iter().enumerate() {
                for d in &g.characters()[..i] {
                    assert!((0..q).any(|n| c.turn(n) != d.turn(n)), "q = {q}");
                }
            }
        }
    }

    #[test]
    fn orthogonality_relations() {
        for q in [3u64, 8, 12, 15, 16, 21, 35, 64, 100] {
            let g = enumerate_characters(q);
            for chi in g.characters() {
                let s: Complex64 = (0..q).map(|n| chi.value(n)).sum();
                let expected = if chi.is_principal() { g.phi() as f64 } else { 0.0 };
                assert!(close(s, Complex64::new(expected, 0.0), 1e-12), "q = {q}");
            }
            for n in (1..q).filter(|n| n.gcd(&q) == 1) {
                let s: Complex64 = g.characters().iter().map(|c| c.value(n) * c.value(1).conj()).sum();
                let expected = if n == 1 { g.phi() as f64 } else { 0.0 };
                assert!(close(s, Complex64::new(expected, 0.0), 1e-12));
            }
        }
    }

    #[test]
    fn conductor_examples() {
        for q in [5u64, 7, 11, 13, 97] {
            let g = enumerate_characters(q);
            assert_eq!(g.principal().conductor(), 1);
            assert_eq!(g.characters().iter().filter(|c| !c.is_primitive()).count(), 1);
            assert!(g.characters().iter().skip(1).all(|c| c.conductor() == q));
        }
    }

    #[test]
    fn factor_through_reconstructs_every_value() {
        for q in 1..=200u64 {
            for chi in enumerate_characters(q).characters() {
                let (chi0, star) = chi.factor_through();
                assert_eq!(star.modulus(), chi.conductor());
                assert!(star.is_primitive(), "q = {q}, index {}", chi.index());
                for n in 0..2 * q {
                    let lhs = chi.turn(n);
                    let rhs = chi0.turn(n).and(star.turn(n));
                    assert_eq!(lhs, rhs, "q = {q} n = {n}");
                }
            }
        }
    }

    #[test]
    fn conductor_is_minimal() {
        // Brute force: the conductor is the least m | q for which some character
        // mod m agrees with χ on all units mod q.
        for q in 1..=60u64 {
            for chi in enumerate_characters(q).characters() {
                let brute = (1..=q)
                    .filter(|m| q % m == 0)
                    .find(|&m| {
                        enumerate_characters(m).characters().iter().any(|psi| {
                            (0..q).filter(|n| n.gcd(&q) == 1).all(|n| psi.turn(n) == chi.turn(n))
                        })
                    })
                    .unwrap();
                assert_eq!(chi.conductor(), brute, "q = {q}");
            }
        }
    }

    #[test]
    fn projection_examples() {
        let ones = vec![1.0; 8];
        let g = enumerate_characters(7);
        assert!(close(orthogonality_project(&ones, &g, 1).unwrap(), Complex64::new(1.0, 0.0), 1e-12));

        let v: Vec<f64> = (0..=50).map(|n| (n as f64).sqrt()).collect();
        let g2 = enumerate_characters(2);
        let odd: f64 = (1..=50).step_by(2).map(|n| (n as f64).sqrt()).sum();
        assert!((orthogonality_project(&v, &g2, 1).unwrap().re - odd).abs() < 1e-9 * odd);

        assert!(matches!(orthogonality_project(&v, &enumerate_characters(6), 3), Err(LabError::NonUnitResidue { .. })));
    }

    proptest! {
        #[test]
        fn characters_are_periodic_completely_multiplicative(q in 1u64..400, pick in 0u64..1_000_000, a in 0u64..2000, b in 0u64..2000) {
            let group = UnitGroup::new(q);
            let chi = group.character(pick % group.phi());
            let add = |x: u32, y: u32| ((x as u64 + y as u64) % chi.order()) as u32;
            prop_assert_eq!(chi.exponent(a * b), chi.exponent(a).zip(chi.exponent(b)).map(|(x, y)| add(x, y)));
            prop_assert_eq!(chi.exponent(a + q), chi.exponent(a));
            prop_assert_eq!(chi.exponent(a).is_some(), num_integer::gcd(a, q) == 1);
        }

        #[test]
        fn conductor_divides_modulus(q in 1u64..400, pick in 0u64..1_000_000) {
            let group = UnitGroup::new(q);
            let chi = group.character(pick % group.phi());
            prop_assert_eq!(q % chi.conductor(), 0);
            let (_, star) = chi.factor_through();
            prop_assert!(star.is_primitive());
            prop_assert_eq!(star.modulus(), chi.conductor());
            prop_assert_eq!(chi.order() % star.order(), 0);
        }
    }
}
