//! Exact 64-bit integer arithmetic: square-free factorization, Jacobi
//! symbols, residue profiles and the root number of `ny^2 = x^3 - x`.

use crate::error::{Error, Result};

const TRIAL_LIMIT: u64 = 1_000_000;

/// Factorization of a square-free positive integer together with the
/// residue bookkeeping the parity criteria need.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PrimeProfile {
    pub n: u64,
    /// Distinct primes in increasing order; empty for `n = 1`.
    pub primes: Vec<u64>,
    /// Number of odd prime factors.
    pub k: u32,
    /// 0 if `n` is even, 1 if `n` is odd.
    pub a: u32,
    pub residue8: u8,
}

impl PrimeProfile {
    pub fn is_even(&self) -> bool {
        self.a == 0
    }

    /// Number of prime factors congruent to `r` modulo `m`.
    pub fn count_residue(&self, m: u64, r: u64) -> usize {
        self.primes.iter().filter(|&&p| p % m == r).count()
    }
}

/// Factors `n`, rejecting anything with a repeated prime.
pub fn factor_squarefree(n: u64) -> Result<PrimeProfile> {
    if n == 0 {
        return Err(Error::InvalidInput("n must be positive".into()));
    }
    let mut primes = factor(n);
    primes.sort_unstable();
    if primes.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::NotSquarefree(n));
    }
    let k = primes.iter().filter(|&&p| p != 2).count() as u32;
    Ok(PrimeProfile {
        n,
        k,
        a: (n & 1) as u32,
        residue8: (n % 8) as u8,
        primes,
    })
}

pub fn is_squarefree(n: u64) -> bool {
    n != 0 && factor_squarefree(n).is_ok()
}

/// Square-free flags for `0..=limit` (index 0 is `false`).
pub fn squarefree_sieve(limit: u64) -> Vec<bool> {
    let len = limit as usize + 1;
    let mut flags = vec![true; len];
    flags[0] = false;
    let mut p = 2usize;
    while p * p < len {
        let sq = p * p;
        let mut m = sq;
        while m < len {
            flags[m] = false;
            m += sq;
        }
        p += 1;
    }
    flags
}

/// Prime factors of `n` with multiplicity, unsorted.
pub fn factor(mut n: u64) -> Vec<u64> {
    let mut out = Vec::new();
    if n <= 1 {
        return out;
    }
    while n % 2 == 0 {
        out.push(2);
        n /= 2;
    }
    let mut p = 3u64;
    while p <= TRIAL_LIMIT && p * p <= n {
        while n % p == 0 {
            out.push(p);
            n /= p;
        }
        p += 2;
    }
    if n > 1 {
        split_large(n, &mut out);
    }
    out
}

fn split_large(n: u64, out: &mut Vec<u64>) {
    if n == 1 {
        return;
    }
    if is_prime(n) {
        out.push(n);
        return;
    }
    if let Some(r) = exact_sqrt(n) {
        split_large(r, out);
        split_large(r, out);
        return;
    }
    let d = pollard_rho(n);
    split_large(d, out);
    split_large(n / d, out);
}

#[inline]
pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1u64;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin for all 64-bit inputs.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n % p == 0 {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

// Brent's variant; n must be odd composite.
fn pollard_rho(n: u64) -> u64 {
    let mut c = 1u64;
    loop {
        let f = |x: u64| (mul_mod(x, x, n) + c) % n;
        let (mut x, mut y, mut g) = (2u64, 2u64, 1u64);
        let mut q = 1u64;
        let mut ys = 2u64;
        let mut r = 1u64;
        let m = 128u64;
        while g == 1 {
            x = y;
            for _ in 0..r {
                y = f(y);
            }
            let mut k = 0;
            while k < r && g == 1 {
                ys = y;
                for _ in 0..m.min(r - k) {
                    y = f(y);
                    q = mul_mod(q, x.abs_diff(y), n);
                }
                g = gcd(q, n);
                k += m;
            }
            r *= 2;
        }
        if g == n {
            loop {
                ys = f(ys);
                g = gcd(x.abs_diff(ys), n);
                if g > 1 {
                    break;
                }
            }
        }
        if g != n {
            return g;
        }
        c += 1;
    }
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

pub fn isqrt(n: u64) -> u64 {
    if n == 0 {
        return 0;
    }
    let mut r = (n as f64).sqrt() as u64;
    while r.checked_mul(r).map_or(true, |sq| sq > n) {
        r -= 1;
    }
    while (r + 1).checked_mul(r + 1).map_or(false, |sq| sq <= n) {
        r += 1;
    }
    r
}

pub fn exact_sqrt(n: u64) -> Option<u64> {
    let r = isqrt(n);
    (r * r == n).then_some(r)
}

/// Jacobi symbol `(a/m)` for odd positive `m`.
pub fn jacobi(a: i64, m: i64) -> Result<i8> {
    if m <= 0 || m % 2 == 0 {
        return Err(Error::InvalidInput(format!(
            "jacobi modulus must be odd and positive, got {m}"
        )));
    }
    Ok(jacobi_unchecked(a, m as u64))
}

pub(crate) fn jacobi_unchecked(a: i64, m: u64) -> i8 {
    let mut a = a.rem_euclid(m as i64) as u64;
    let mut m = m;
    let mut t = 1i8;
    while a != 0 {
        while a % 2 == 0 {
            a /= 2;
            if m % 8 == 3 || m % 8 == 5 {
                t = -t;
            }
        }
        std::mem::swap(&mut a, &mut m);
        if a % 4 == 3 && m % 4 == 3 {
            t = -t;
        }
        a %= m;
    }
    if m == 1 {
        t
    } else {
        0
    }
}

/// Kronecker symbol `(a/p)` for a prime `p`, including `p = 2`.
pub(crate) fn kronecker_prime(a: i64, p: u64) -> i8 {
    if p == 2 {
        if a % 2 == 0 {
            0
        } else {
            match a.rem_euclid(8) {
                1 | 7 => 1,
                _ => -1,
            }
        }
    } else {
        jacobi_unchecked(a, p)
    }
}

/// Sign of the functional equation of `L(E_n, s)` for square-free `n`.
pub fn root_number(n: u64) -> Result<i8> {
    match n % 8 {
        1 | 2 | 3 => Ok(1),
        5 | 6 | 7 => Ok(-1),
        _ => Err(Error::InvalidInput(format!(
            "{n} is divisible by 4, no root number"
        ))),
    }
}
