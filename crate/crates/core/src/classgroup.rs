//! Class groups of imaginary quadratic fields `Q(sqrt(-d))` through reduced
//! positive definite binary quadratic forms, plus the Rédei-matrix route to
//! the parity of the genus class number `g(d) = #(2 Cl)`.

use std::collections::HashMap;
use std::fmt;

use dashmap::DashMap;
use serde::{Deserialize, Serialize};

use crate::arith::{factor, factor_squarefree, kronecker_prime};
use crate::error::{Error, Result};

/// Largest |D| handled by exhaustive reduced-form enumeration.
pub const MAX_ABS_DISCRIMINANT: i64 = 10_000_000;

/// `a x^2 + b x y + c y^2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct QuadraticForm {
    pub a: i64,
    pub b: i64,
    pub c: i64,
}

impl fmt::Display for QuadraticForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.a, self.b, self.c)
    }
}

impl QuadraticForm {
    pub fn new(a: i64, b: i64, c: i64) -> Self {
        QuadraticForm { a, b, c }
    }

    pub fn discriminant(&self) -> i64 {
        self.b * self.b - 4 * self.a * self.c
    }

    pub fn is_reduced(&self) -> bool {
        let QuadraticForm { a, b, c } = *self;
        a > 0 && b.abs() <= a && a <= c && (b >= 0 || (b.abs() != a && a != c))
    }

    /// The principal form of discriminant `disc`.
    pub fn principal(disc: i64) -> Self {
        let b = disc.rem_euclid(2);
        QuadraticForm::new(1, b, (b * b - disc) / 4)
    }

    pub fn inverse(&self) -> Self {
        reduce(self.a as i128, -(self.b as i128), self.c as i128)
    }
}

fn reduce(mut a: i128, mut b: i128, mut c: i128) -> QuadraticForm {
    debug_assert!(a > 0 && c > 0);
    loop {
        // bring b into (-a, a]
        if b <= -a || b > a {
            let two_a = 2 * a;
            let r = (a - b).div_euclid(two_a);
            let b_new = b + two_a * r;
            c += r * (b + a * r);
            b = b_new;
        }
        if a > c {
            std::mem::swap(&mut a, &mut c);
            b = -b;
            continue;
        }
        if a == c && b < 0 {
            b = -b;
        }
        break;
    }
    QuadraticForm::new(a as i64, b as i64, c as i64)
}

fn xgcd(a: i128, b: i128) -> (i128, i128, i128) {
    // returns (g, x, y) with a x + b y = g >= 0
    let (mut old_r, mut r) = (a, b);
    let (mut old_s, mut s) = (1i128, 0i128);
    let (mut old_t, mut t) = (0i128, 1i128);
    while r != 0 {
        let q = old_r.div_euclid(r);
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
        (old_t, t) = (t, old_t - q * t);
    }
    if old_r < 0 {
        (-old_r, -old_s, -old_t)
    } else {
        (old_r, old_s, old_t)
    }
}

/// Gauss composition of two forms of the same discriminant, reduced.
pub fn compose(f: &QuadraticForm, g: &QuadraticForm) -> Result<QuadraticForm> {
    let disc = f.discriminant();
    if disc != g.discriminant() {
        return Err(Error::DiscriminantMismatch(disc, g.discriminant()));
    }
    let (f1, f2) = if f.a > g.a { (g, f) } else { (f, g) };
    let (a1, b1) = (f1.a as i128, f1.b as i128);
    let (a2, b2, c2) = (f2.a as i128, f2.b as i128, f2.c as i128);
    let s = (b1 + b2) / 2;
    let n = b2 - s;

    let (d, y1) = if a2 % a1 == 0 {
        (a1, 0)
    } else {
        // u a2 + v a1 = d
        let (d, u, _v) = xgcd(a2, a1);
        (d, u)
    };
    let (d1, x2, y2) = if s % d == 0 {
        (d, 0, -1)
    } else {
        // u s + v d = d1
        let (d1, u, v) = xgcd(s, d);
        (d1, u, -v)
    };
    let v1 = a1 / d1;
    let v2 = a2 / d1;
    let r = (y1 * y2 * n - x2 * c2).rem_euclid(v1);
    let b3 = b2 + 2 * v2 * r;
    let a3 = v1 * v2;
    let c3 = (b3 * b3 - disc as i128) / (4 * a3);
    Ok(reduce(a3, b3, c3))
}

/// `D = -d` if `d = 3 (mod 4)`, else `-4d`.
pub fn fundamental_discriminant(d: u64) -> Result<i64> {
    factor_squarefree(d)?;
    let d = d as i64;
    Ok(if d % 4 == 3 { -d } else { -4 * d })
}

/// Recovers the square-free `d` with `fundamental_discriminant(d) = disc`.
pub fn field_of_discriminant(disc: i64) -> Result<u64> {
    if disc >= 0 {
        return Err(Error::InvalidDiscriminant(disc));
    }
    let m = -disc;
    let d = match m % 4 {
        3 => m,
        0 if matches!((m / 4) % 4, 1 | 2) => m / 4,
        _ => return Err(Error::InvalidDiscriminant(disc)),
    };
    match factor_squarefree(d as u64) {
        Ok(_) => Ok(d as u64),
        Err(_) => Err(Error::InvalidDiscriminant(disc)),
    }
}

/// All reduced forms of a negative fundamental discriminant, sorted by `(a, b)`.
pub fn reduced_forms(disc: i64) -> Result<Vec<QuadraticForm>> {
    field_of_discriminant(disc)?;
    if -disc > MAX_ABS_DISCRIMINANT {
        return Err(Error::DiscriminantTooLarge(disc));
    }
    let bound = ((-disc) as f64 / 3.0).sqrt() as i64 + 1;
    let mut forms = Vec::new();
    for a in 1..=bound {
        let four_a = 4 * a;
        let mut b = -a + 1;
        if (b - disc).rem_euclid(2) != 0 {
            b += 1;
        }
        while b <= a {
            let num = b * b - disc;
            if num % four_a == 0 {
                let c = num / four_a;
                let f = QuadraticForm::new(a, b, c);
                if f.is_reduced() {
                    forms.push(f);
                }
            }
            b += 2;
        }
    }
    forms.sort();
    Ok(forms)
}

/// Class group of `Q(sqrt(-d))` with its structure and genus data.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassGroupData {
    pub d: u64,
    pub discriminant: i64,
    pub forms: Vec<QuadraticForm>,
    pub h: u64,
    /// Invariant factors `d1 | d2 | ...`, all greater than 1.
    pub elementary_divisors: Vec<u64>,
    pub h2: u32,
    pub g: u64,
}

struct FiniteGroup {
    forms: Vec<QuadraticForm>,
    index: HashMap<QuadraticForm, usize>,
}

impl FiniteGroup {
    fn new(forms: Vec<QuadraticForm>) -> Self {
        let index = forms.iter().enumerate().map(|(i, f)| (*f, i)).collect();
        FiniteGroup { forms, index }
    }

    fn mul(&self, i: usize, j: usize) -> usize {
        let f = compose(&self.forms[i], &self.forms[j]).expect("same discriminant");
        self.index[&f]
    }

    fn orders(&self, identity: usize) -> Vec<u64> {
        let mut orders = vec![0u64; self.forms.len()];
        for i in 0..self.forms.len() {
            if orders[i] != 0 {
                continue;
            }
            let mut cur = i;
            let mut k = 1u64;
            while cur != identity {
                cur = self.mul(cur, i);
                k += 1;
            }
            orders[i] = k;
            let inv = self.index[&self.forms[i].inverse()];
            orders[inv] = k;
        }
        orders
    }
}

fn invariant_factors(h: u64, orders: &[u64]) -> Vec<u64> {
    let mut primes = factor(h);
    primes.sort_unstable();
    primes.dedup();
    // per prime, cyclic exponents in decreasing order
    let mut columns: Vec<Vec<u64>> = Vec::new();
    for p in primes {
        let mut counts = Vec::new();
        let mut pj = 1u64;
        loop {
            let c = orders.iter().filter(|&&o| pj % o == 0).count() as u64;
            counts.push(c);
            if counts.len() > 1 && c == counts[counts.len() - 2] {
                break;
            }
            pj *= p;
        }
        // r_j = number of cyclic factors with exponent >= j
        let mut ranks = Vec::new();
        for w in counts.windows(2) {
            let mut ratio = w[1] / w[0];
            let mut r = 0;
            while ratio > 1 {
                ratio /= p;
                r += 1;
            }
            if r > 0 {
                ranks.push(r);
            }
        }
        let width = ranks.first().copied().unwrap_or(0);
        let mut powers = Vec::with_capacity(width);
        for i in 0..width {
            let e = ranks.iter().filter(|&&r| r > i).count() as u32;
            powers.push(p.pow(e));
        }
        columns.push(powers);
    }
    let width = columns.iter().map(Vec::len).max().unwrap_or(0);
    let mut out: Vec<u64> = (0..width)
        .map(|i| columns.iter().map(|c| c.get(i).copied().unwrap_or(1)).product())
        .collect();
    out.reverse();
    out
}

pub fn class_group(d: u64) -> Result<ClassGroupData> {
    let discriminant = fundamental_discriminant(d)?;
    let forms = reduced_forms(discriminant)?;
    let group = FiniteGroup::new(forms);
    let identity = group.index[&QuadraticForm::principal(discriminant)];
    let orders = group.orders(identity);
    let h = group.forms.len() as u64;
    let elementary_divisors = invariant_factors(h, &orders);
    let h2 = elementary_divisors.iter().filter(|&&e| e % 2 == 0).count() as u32;
    let mut squares: Vec<usize> = (0..group.forms.len()).map(|i| group.mul(i, i)).collect();
    squares.sort_unstable();
    squares.dedup();
    Ok(ClassGroupData {
        d,
        discriminant,
        h,
        elementary_divisors,
        h2,
        g: squares.len() as u64,
        forms: group.forms,
    })
}

pub fn group_structure(disc: i64) -> Result<Vec<u64>> {
    Ok(class_group(field_of_discriminant(disc)?)?.elementary_divisors)
}

/// `g(d) = #(2 Cl(Q(sqrt(-d))))`.
pub fn genus_number(d: u64) -> Result<u64> {
    Ok(class_group(d)?.g)
}

/// `dim_F2 Cl / 2Cl` from the elementary divisors.
pub fn two_rank(d: u64) -> Result<u32> {
    Ok(class_group(d)?.h2)
}

/// Prime discriminants `p*` whose product is the fundamental discriminant,
/// paired with their primes, in increasing prime order.
pub fn prime_discriminants(d: u64) -> Result<Vec<(u64, i64)>> {
    let disc = fundamental_discriminant(d)?;
    let profile = factor_squarefree(d)?;
    let mut out = Vec::new();
    let mut odd_part = 1i64;
    for &p in profile.primes.iter().filter(|&&p| p != 2) {
        let star = if p % 4 == 1 { p as i64 } else { -(p as i64) };
        odd_part *= star;
        out.push((p, star));
    }
    let two_part = disc / odd_part;
    if two_part != 1 {
        debug_assert!(matches!(two_part, -4 | 8 | -8));
        out.insert(0, (2, two_part));
    }
    Ok(out)
}

/// Rédei matrix over F2 of `Q(sqrt(-d))`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RedeiMatrix {
    pub d: u64,
    /// Row `i` has bit `j` set iff entry `(i, j)` is 1.
    pub rows: Vec<u64>,
    pub mu: usize,
}

impl RedeiMatrix {
    /// Entry `(i, j)` for `i != j` records whether `p_j*` is a non-square at
    /// `p_i`; the diagonal makes every row sum vanish.
    pub fn new(d: u64) -> Result<Self> {
        let parts = prime_discriminants(d)?;
        let mu = parts.len();
        let mut rows = vec![0u64; mu];
        for (i, &(pi, _)) in parts.iter().enumerate() {
            let mut row = 0u64;
            for (j, &(_, qj)) in parts.iter().enumerate() {
                if i != j && kronecker_prime(qj, pi) == -1 {
                    row |= 1 << j;
                }
            }
            if row.count_ones() % 2 == 1 {
                row |= 1 << i;
            }
            rows[i] = row;
        }
        Ok(RedeiMatrix { d, rows, mu })
    }

    pub fn entry(&self, i: usize, j: usize) -> u8 {
        ((self.rows[i] >> j) & 1) as u8
    }

    pub fn rank(&self) -> usize {
        f2_rank(self.rows.clone())
    }

    /// `dim_F2 2Cl / 4Cl`.
    pub fn four_rank(&self) -> usize {
        self.mu - 1 - self.rank()
    }
}

pub(crate) fn f2_rank(mut rows: Vec<u64>) -> usize {
    let mut rank = 0;
    for bit in 0..64 {
        let Some(pivot) = (rank..rows.len()).find(|&r| rows[r] >> bit & 1 == 1) else {
            continue;
        };
        rows.swap(rank, pivot);
        let p = rows[rank];
        for (r, row) in rows.iter_mut().enumerate() {
            if r != rank && *row >> bit & 1 == 1 {
                *row ^= p;
            }
        }
        rank += 1;
    }
    rank
}

/// 1 iff `g(d)` is odd, i.e. the class group has no element of exact order 4.
pub fn genus_parity_redei(d: u64) -> Result<u8> {
    if d == 1 {
        return Ok(1);
    }
    Ok((RedeiMatrix::new(d)?.four_rank() == 0) as u8)
}

/// Class group numbers kept in the persistent cache.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenusEntry {
    pub g: u64,
    pub h: u64,
    pub h2: u32,
}

impl From<&ClassGroupData> for GenusEntry {
    fn from(c: &ClassGroupData) -> Self {
        GenusEntry { g: c.g, h: c.h, h2: c.h2 }
    }
}

/// Concurrent memo of genus data keyed by `d`.  Values are functions of the
/// key, so racing inserts are harmless.
#[derive(Debug, Default)]
pub struct GenusTable {
    parity: DashMap<u64, u8>,
    entries: DashMap<u64, GenusEntry>,
}

impl GenusTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// `g(d) mod 2` through the Rédei matrix, memoized.
    pub fn parity(&self, d: u64) -> Result<u8> {
        if let Some(p) = self.parity.get(&d) {
            return Ok(*p);
        }
        let p = match self.entries.get(&d) {
            Some(e) => (e.g % 2) as u8,
            None => genus_parity_redei(d)?,
        };
        self.parity.insert(d, p);
        Ok(p)
    }

    /// Exact `(g, h, h2)` through the class group, memoized.
    pub fn entry(&self, d: u64) -> Result<GenusEntry> {
        if let Some(e) = self.entries.get(&d) {
            return Ok(*e);
        }
        let e = GenusEntry::from(&class_group(d)?);
        self.entries.insert(d, e);
        Ok(e)
    }

    pub fn insert(&self, d: u64, entry: GenusEntry) {
        self.entries.insert(d, entry);
    }

    /// Snapshot of the exact entries, sorted by `d`.
    pub fn entries(&self) -> Vec<(u64, GenusEntry)> {
        let mut out: Vec<_> = self.entries.iter().map(|e| (*e.key(), *e.value())).collect();
        out.sort_unstable_by_key(|e| e.0);
        out
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}
