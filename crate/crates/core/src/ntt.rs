//! Exact truncated squaring of integer power series through number-theoretic
//! transforms over five word-sized primes, reassembled by Garner's algorithm.

use crate::error::{LabError, Result};

/// NTT-friendly primes `c·2^e + 1`, each supporting transforms of length 2^25.
pub(crate) const PRIMES: [u32; 5] = [167_772_161, 469_762_049, 1_811_939_329, 2_013_265_921, 2_113_929_217];

/// Longest transform supported by every prime in [`PRIMES`].
pub(crate) const MAX_TRANSFORM: usize = 1 << 25;

#[inline]
fn mul<const P: u32>(a: u32, b: u32) -> u32 {
    ((a as u64 * b as u64) % P as u64) as u32
}

#[inline]
fn add<const P: u32>(a: u32, b: u32) -> u32 {
    let s = a as u64 + b as u64;
    if s >= P as u64 {
        (s - P as u64) as u32
    } else {
        s as u32
    }
}

#[inline]
fn sub<const P: u32>(a: u32, b: u32) -> u32 {
    if a >= b {
        a - b
    } else {
        (a as u64 + P as u64 - b as u64) as u32
    }
}

fn pow<const P: u32>(mut base: u32, mut e: u64) -> u32 {
    let mut acc = 1u32;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul::<P>(acc, base);
        }
        base = mul::<P>(base, base);
        e >>= 1;
    }
    acc
}

pub(crate) fn pow_mod(base: u64, e: u64, m: u64) -> u64 {
    let (mut b, mut e, mut acc) = (base % m, e, 1u64 % m);
    while e > 0 {
        if e & 1 == 1 {
            acc = ((acc as u128 * b as u128) % m as u128) as u64;
        }
        b = ((b as u128 * b as u128) % m as u128) as u64;
        e >>= 1;
    }
    acc
}

/// Smallest primitive root of the prime `p`.
pub(crate) fn primitive_root(p: u64) -> u64 {
    let mut factors = Vec::new();
    let mut m = p - 1;
    let mut d = 2;
    while d * d <= m {
        if m % d == 0 {
            factors.push(d);
            while m % d == 0 {
                m /= d;
            }
        }
        d += 1;
    }
    if m > 1 {
        factors.push(m);
    }
    (2..p)
        .find(|&g| factors.iter().all(|&f| pow_mod(g, (p - 1) / f, p) != 1))
        .expect("prime modulus has a primitive root")
}

fn transform<const P: u32>(a: &mut [u32], root: u32, invert: bool) {
    let n = a.len();
    let mut j = 0usize;
    for i in 1..n {
        let mut bit = n >> 1;
        while j & bit != 0 {
            j ^= bit;
            bit >>= 1;
        }
        j |= bit;
        if i < j {
            a.swap(i, j);
        }
    }
    let mut twiddles = Vec::with_capacity(n / 2);
    let mut len = 2;
    while len <= n {
        let mut w = pow::<P>(root, (P as u64 - 1) / len as u64);
        if invert {
            w = pow::<P>(w, P as u64 - 2);
        }
        let half = len / 2;
        twiddles.clear();
        let mut cur = 1u32;
        for _ in 0..half {
            twiddles.push(cur);
            cur = mul::<P>(cur, w);
        }
        for chunk in a.chunks_exact_mut(len) {
            let (lo, hi) = chunk.split_at_mut(half);
            for ((u, v), &t) in lo.iter_mut().zip(hi.iter_mut()).zip(&twiddles) {
                let x = *u;
                let y = mul::<P>(*v, t);
                *u = add::<P>(x, y);
                *v = sub::<P>(x, y);
            }
        }
        len <<= 1;
    }
    if invert {
        let inv_n = pow::<P>(n as u32 % P, P as u64 - 2);
        for x in a.iter_mut() {
            *x = mul::<P>(*x, inv_n);
        }
    }
}

/// Reduces the signed integer series modulo `P`, then squares it `rounds`
/// times, keeping the first `len` coefficients after each squaring.
fn repeated_square<const P: u32>(series: &[i64], len: usize, rounds: u32) -> Vec<u32> {
    let root = primitive_root(P as u64) as u32;
    let mut cur: Vec<u32> = series
        .iter()
        .take(len)
        .map(|&c| c.rem_euclid(P as i64) as u32)
        .collect();
    cur.resize(len, 0);
    let size = (2 * len - 1).next_power_of_two();
    let mut buf = vec![0u32; size];
    for _ in 0..rounds {
        buf[..len].copy_from_slice(&cur);
        buf[len..].fill(0);
        transform::<P>(&mut buf, root, false);
        for x in buf.iter_mut() {
            *x = mul::<P>(*x, *x);
        }
        transform::<P>(&mut buf, root, true);
        cur.copy_from_slice(&buf[..len]);
    }
    cur
}

/// Exact coefficients of `series^(2^rounds)` truncated to `len` terms.
///
/// The caller guarantees that every true coefficient is below half the
/// product of [`PRIMES`] in absolute value; values that do not fit in
/// `i128` are reported as overflow at the offending (0-based) index.
pub(crate) fn exact_repeated_square(series: &[i64], len: usize, rounds: u32) -> Result<Vec<i128>> {
    assert!(len >= 1);
    if (2 * len - 1).next_power_of_two() > MAX_TRANSFORM {
        return Err(LabError::InvalidArgument(format!(
            "series length {len} exceeds the transform limit"
        )));
    }
    let residues = [
        repeated_square::<{ PRIMES[0] }>(series, len, rounds),
        repeated_square::<{ PRIMES[1] }>(series, len, rounds),
        repeated_square::<{ PRIMES[2] }>(series, len, rounds),
        repeated_square::<{ PRIMES[3] }>(series, len, rounds),
        repeated_square::<{ PRIMES[4] }>(series, len, rounds),
    ];
    let garner = Garner::new();
    (0..len)
        .map(|i| {
            let r = [residues[0][i], residues[1][i], residues[2][i], residues[3][i], residues[4][i]];
            garner.reconstruct(&r).ok_or(LabError::TauOverflow { n: i })
        })
        .collect()
}

/// Balanced mixed-radix reconstruction from residues modulo [`PRIMES`].
struct Garner {
    /// `radix_mod[i][j]` = (m_0 ⋯ m_{j-1}) mod m_i for j < i.
    radix_mod: [[u64; 5]; 5],
    /// Inverse of (m_0 ⋯ m_{i-1}) modulo m_i.
    radix_inv: [u64; 5],
    /// m_0 ⋯ m_{i-1} as exact integers.
    radix: [i128; 5],
}

impl Garner {
    fn new() -> Self {
        let m = PRIMES.map(|p| p as u64);
        let mut radix_mod = [[0u64; 5]; 5];
        let mut radix_inv = [0u64; 5];
        let mut radix = [1i128; 5];
        for i in 0..5 {
            let mut prod = 1u64;
            for j in 0..i {
                radix_mod[i][j] = prod;
                prod = prod * m[j] % m[i];
            }
            radix_inv[i] = pow_mod(prod, m[i] - 2, m[i]);
            if i > 0 {
                radix[i] = radix[i - 1] * m[i - 1] as i128;
            }
        }
        Self { radix_mod, radix_inv, radix }
    }

    fn reconstruct(&self, residues: &[u32; 5]) -> Option<i128> {
        let m = PRIMES.map(|p| p as i64);
        let mut digits = [0i64; 5];
        for i in 0..5 {
            let mi = m[i];
            let mut t = residues[i] as i64;
            for j in 0..i {
                let term = (digits[j].rem_euclid(mi) as i128 * self.radix_mod[i][j] as i128 % mi as i128) as i64;
                t = (t - term).rem_euclid(mi);
            }
            let mut d = (t as i128 * self.radix_inv[i] as i128 % mi as i128) as i64;
            if d > mi / 2 {
                d -= mi;
            }
            digits[i] = d;
        }
        let mut value: i128 = 0;
        for i in 0..5 {
            value = value.checked_add((digits[i] as i128).checked_mul(self.radix[i])?)?;
        }
        Some(value)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn schoolbook_square(a: &[i128], len: usize) -> Vec<i128> {
        let mut out = vec![0i128; len];
        for i in 0..len.min(a.len()) {
            for j in 0..len - i {
                if j < a.len() {
                    out[i + j] += a[i] * a[j];
                }
            }
        }
        out
    }

    fn is_prime(n: u64) -> bool {
        n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| n % d != 0)
    }

    #[test]
    fn primes_support_required_transform_length() {
        for &p in &PRIMES {
            assert!(is_prime(p as u64), "{p}");
            assert_eq!((p as usize - 1) % MAX_TRANSFORM, 0, "{p}");
        }
    }

    #[test]
    fn ntt_square_matches_schoolbook() {
        let series: Vec<i64> = (0..300).map(|i| ((i * 7919) % 201) as i64 - 100).collect();
        let wide: Vec<i128> = series.iter().map(|&c| c as i128).collect();
        let once = exact_repeated_square(&series, 300, 1).unwrap();
        assert_eq!(once, schoolbook_square(&wide, 300));
        let twice = exact_repeated_square(&series, 300, 2).unwrap();
        assert_eq!(twice, schoolbook_square(&schoolbook_square(&wide, 300), 300));
    }

    #[test]
    fn garner_handles_large_signed_values() {
        let g = Garner::new();
        for &v in &[0i128, 1, -1, 1i128 << 100, -(1i128 << 120) + 12345, i128::MAX / 3] {
            let r = PRIMES.map(|p| v.rem_euclid(p as i128) as u32);
            assert_eq!(g.reconstruct(&r), Some(v));
        }
    }
}
