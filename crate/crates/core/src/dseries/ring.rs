//! Exact coefficient rings: integer combinations of roots of unity, and the
//! quadratic ring generated by one arithmetic Satake parameter.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// A root of unity `e^{2πi·num/den}` with `0 <= num < den`, `gcd(num, den) = 1`.
pub type Turn = (u64, u64);

fn reduce_turn(num: u64, den: u64) -> Turn {
    let num = num % den;
    let g = num.gcd(&den);
    if num == 0 {
        (0, 1)
    } else {
        (num / g, den / g)
    }
}

fn add_turns(a: Turn, b: Turn) -> Turn {
    let den = a.1.lcm(&b.1);
    reduce_turn(a.0 * (den / a.1) + b.0 * (den / b.1), den)
}

/// Element of the group ring `ℤ[ℚ/ℤ]`: a finite integer combination of
/// roots of unity. Two elements equal here are equal as complex numbers;
/// the identities checked with it never need cyclotomic relations.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CycloInt {
    terms: BTreeMap<Turn, BigInt>,
}

impl CycloInt {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::from_int(BigInt::one())
    }

    pub fn from_int(c: BigInt) -> Self {
        Self::monomial(c, (0, 1))
    }

    /// `c · e^{2πi·num/den}`.
    pub fn monomial(c: BigInt, turn: Turn) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(reduce_turn(turn.0, turn.1), c);
        }
        Self { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms.get(&(0, 1)).is_some_and(|c| c.is_one())
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Turn, &BigInt)> {
        self.terms.iter()
    }

    fn add_term(&mut self, turn: Turn, c: BigInt) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(turn).or_insert_with(BigInt::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&turn);
        }
    }

    pub fn add_assign(&mut self, other: &Self) {
        for (&t, c) in &other.terms {
            self.add_term(t, c.clone());
        }
    }

    pub fn sub_assign(&mut self, other: &Self) {
        for (&t, c) in &other.terms {
            self.add_term(t, -c);
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (&a, ca) in &self.terms {
            for (&b, cb) in &other.terms {
                out.add_term(add_turns(a, b), ca * cb);
            }
        }
        out
    }

    /// Adds `a · b` in place.
    pub fn add_product(&mut self, a: &Self, b: &Self) {
        for (&ta, ca) in &a.terms {
            for (&tb, cb) in &b.terms {
                self.add_term(add_turns(ta, tb), ca * cb);
            }
        }
    }

    pub fn mul_int(&self, c: &BigInt) -> Self {
        let mut out = Self::zero();
        for (&t, v) in &self.terms {
            out.add_term(t, v * c);
        }
        out
    }

    /// Multiplies by `e^{2πi·num/den}`.
    pub fn rotate(&self, turn: Turn) -> Self {
        Self { terms: self.terms.iter().map(|(&t, c)| (add_turns(t, turn), c.clone())).collect() }
    }

    /// Complex value of `self / scale`.
    pub fn to_complex_scaled(&self, scale: &BigInt) -> Complex64 {
        let mut z = Complex64::new(0.0, 0.0);
        for (&(num, den), c) in &self.terms {
            let v = BigRational::new(c.clone(), scale.clone()).to_f64().unwrap_or(f64::NAN);
            z += Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * num as f64 / den as f64) * v;
        }
        z
    }

    pub fn to_complex(&self) -> Complex64 {
        self.to_complex_scaled(&BigInt::one())
    }

    /// Largest absolute integer coefficient.
    pub fn max_abs_coefficient(&self) -> BigInt {
        self.terms.values().map(|c| c.abs()).max().unwrap_or_else(BigInt::zero)
    }
}

/// `ℤ[α]` with `α² = t·α − P`, where `α` is one arithmetic Satake parameter
/// at `p` (`t = τ(p)`, `P = p^{κ-1}`) and `β = t − α` is its conjugate.
#[derive(Debug, Clone)]
pub struct SatakeRing {
    t: BigInt,
    norm: BigInt,
}

/// `a + b·α`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuadInt {
    pub a: BigInt,
    pub b: BigInt,
}

impl QuadInt {
    pub fn int(a: BigInt) -> Self {
        Self { a, b: BigInt::zero() }
    }

    /// The rational-integer value of a symmetric element.
    pub fn to_int(&self) -> Option<BigInt> {
        self.b.is_zero().then(|| self.a.clone())
    }
}

impl SatakeRing {
    pub fn new(t: BigInt, norm: BigInt) -> Self {
        Self { t, norm }
    }

    pub fn alpha(&self) -> QuadInt {
        QuadInt { a: BigInt::zero(), b: BigInt::one() }
    }

    pub fn beta(&self) -> QuadInt {
        QuadInt { a: self.t.clone(), b: -BigInt::one() }
    }

    pub fn mul(&self, x: &QuadInt, y: &QuadInt) -> QuadInt {
        let bd = &x.b * &y.b;
        QuadInt { a: &x.a * &y.a - &bd * &self.norm, b: &x.a * &y.b + &x.b * &y.a + &bd * &self.t }
    }

    pub fn add(&self, x: &QuadInt, y: &QuadInt) -> QuadInt {
        QuadInt { a: &x.a + &y.a, b: &x.b + &y.b }
    }

    pub fn pow(&self, x: &QuadInt, e: u32) -> QuadInt {
        let mut out = QuadInt::int(BigInt::one());
        for _ in 0..e {
            out = self.mul(&out, x);
        }
        out
    }

    /// Integer coefficients of `∏_r (1 − r X)^{-1}` up to `X^{j_max}`.
    ///
    /// Panics if a coefficient is not a rational integer, which would mean
    /// the roots were not a Galois-stable set.
    pub fn inverse_root_product(&self, roots: &[QuadInt], j_max: usize) -> Vec<BigInt> {
        let mut c = vec![QuadInt::int(BigInt::zero()); j_max + 1];
        c[0] = QuadInt::int(BigInt::one());
        for r in roots {
            for j in 1..=j_max {
                let t = self.mul(r, &c[j - 1]);
                c[j] = self.add(&c[j], &t);
            }
        }
        c.into_iter().map(|v| v.to_int().expect("symmetric coefficient")).collect()
    }

    /// Integer coefficients of `∏_r (1 − r X)`.
    pub fn root_product(&self, roots: &[QuadInt]) -> Vec<BigInt> {
        let mut c = vec![QuadInt::int(BigInt::one())];
        for r in roots {
            c.push(QuadInt::int(BigInt::zero()));
            for j in (1..c.len()).rev() {
                let t = self.mul(r, &c[j - 1]);
                c[j] = QuadInt { a: &c[j].a - &t.a, b: &c[j].b - &t.b };
            }
        }
        c.into_iter().map(|v| v.to_int().expect("symmetric coefficient")).collect()
    }
}
