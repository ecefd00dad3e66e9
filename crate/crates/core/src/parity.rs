//! Mod-2 decomposition sums over set partitions of the prime factors of `n`,
//! weighted by products of genus class numbers, and the single-genus
//! shortcut criteria built on top of them.
//!
//! A decomposition `n = d_0 d_1 ... d_l` with coprime parts `d_i > 1` is a set
//! partition of the primes of `n`.  Two counting conventions are supported:
//! [`Convention::MultisetOnce`] counts each partition once if some slot
//! labeling is valid, [`Convention::LabeledSlots`] counts it once per valid
//! choice of the distinguished blocks.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::arith::{factor_squarefree, PrimeProfile};
use crate::classgroup::GenusTable;
use crate::error::{Error, Result};

pub const MAX_DP_PRIMES: usize = 20;
pub const MAX_BRUTE_FORCE_PRIMES: usize = 8;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Convention {
    #[default]
    MultisetOnce,
    LabeledSlots,
}

impl Convention {
    pub fn as_str(self) -> &'static str {
        match self {
            Convention::MultisetOnce => "multiset",
            Convention::LabeledSlots => "labeled",
        }
    }
}

impl fmt::Display for Convention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Convention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "multiset" => Ok(Convention::MultisetOnce),
            "labeled" => Ok(Convention::LabeledSlots),
            other => Err(Error::InvalidInput(format!("unknown convention {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Shape {
    /// One free block `d_0`, every other block `= 1 (mod 8)`.
    FreeLeader,
    /// `d_0 = 5,6,7`, `d_1 = 1,2,3`, the rest `= 1 (mod 8)`, at least two blocks.
    TwoSlot,
    /// Every block `= 1 (mod 8)`.
    AllOnes,
}

pub const ALL_SHAPES: [Shape; 3] = [Shape::FreeLeader, Shape::TwoSlot, Shape::AllOnes];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PartitionConstraint {
    pub shape: Shape,
    pub convention: Convention,
}

impl PartitionConstraint {
    pub fn new(shape: Shape, convention: Convention) -> Self {
        PartitionConstraint { shape, convention }
    }
}

/// Both sums attached to a square-free `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParityResult {
    /// The free-leader sum.
    pub s1: u8,
    /// The two-slot sum.
    pub s2: u8,
    pub terms_evaluated: u64,
    pub convention_used: Convention,
}

/// True when the prime shape of a block alone forces `g(block)` to be even.
pub fn forced_even_genus(primes: &[u64]) -> bool {
    let odd: Vec<u64> = primes.iter().copied().filter(|&p| p != 2).collect();
    if odd.is_empty() {
        return false;
    }
    let has_two = odd.len() != primes.len();
    let all_pm1 = odd.iter().all(|&p| p % 8 == 1 || p % 8 == 7);
    if has_two {
        return all_pm1;
    }
    let prod8 = odd.iter().fold(1u64, |acc, &p| acc * (p % 8) % 8);
    prod8 == 1 && (all_pm1 || odd.iter().all(|&p| p % 4 == 1))
}

/// Per-subset data for a prime list: product residue mod 8 and `g` parity.
struct SubsetTable {
    residue: Vec<u8>,
    genus: Vec<u8>,
}

impl SubsetTable {
    fn build(primes: &[u64], table: &GenusTable) -> Result<Self> {
        let k = primes.len();
        let size = 1usize << k;
        let mut residue = vec![1u8; size];
        let mut product = vec![1u64; size];
        let mut genus = vec![1u8; size];
        for mask in 1..size {
            let low = mask.trailing_zeros() as usize;
            let rest = mask & (mask - 1);
            product[mask] = product[rest] * primes[low];
            residue[mask] = (product[mask] % 8) as u8;
            let members: Vec<u64> = (0..k).filter(|i| mask >> i & 1 == 1).map(|i| primes[i]).collect();
            genus[mask] = if forced_even_genus(&members) {
                0
            } else {
                table.parity(product[mask])?
            };
        }
        Ok(SubsetTable { residue, genus })
    }

    /// `ones[S]`: parity of the number of partitions of `S` into blocks that
    /// are `= 1 (mod 8)`, weighted by `prod g`.  `ones[0] = 1`.
    fn ones(&self, terms: &mut u64) -> Vec<u8> {
        let size = self.residue.len();
        let mut f = vec![0u8; size];
        f[0] = 1;
        for s in 1..size {
            let low = s & s.wrapping_neg();
            let rest = s ^ low;
            let mut acc = 0u8;
            // blocks B = low | sub for every sub of rest
            let mut sub = rest;
            loop {
                let block = low | sub;
                *terms += 1;
                if self.residue[block] == 1 && self.genus[block] == 1 {
                    acc ^= f[s ^ block];
                }
                if sub == 0 {
                    break;
                }
                sub = (sub - 1) & rest;
            }
            f[s] = acc;
        }
        f
    }
}

fn check_primes(profile: &PrimeProfile, max: usize) -> Result<()> {
    if profile.primes.len() > max {
        return Err(Error::TooManyPrimes(profile.primes.len(), max));
    }
    Ok(())
}

/// Nonempty submasks of `set`.
fn submasks(set: usize) -> impl Iterator<Item = usize> {
    let mut sub = set;
    let mut done = set == 0;
    std::iter::from_fn(move || {
        if done {
            return None;
        }
        let cur = sub;
        if sub == 0 {
            done = true;
            return None;
        }
        sub = (sub - 1) & set;
        Some(cur)
    })
}

fn evaluate(tab: &SubsetTable, constraint: PartitionConstraint, terms: &mut u64) -> u8 {
    let size = tab.residue.len();
    let full = size - 1;
    let ones = tab.ones(terms);
    let labeled = constraint.convention == Convention::LabeledSlots;
    match constraint.shape {
        Shape::AllOnes => ones[full],
        Shape::FreeLeader => {
            if full == 0 {
                return 1;
            }
            let mut acc = if labeled { 0 } else { ones[full] };
            for b0 in submasks(full) {
                *terms += 1;
                if (labeled || tab.residue[b0] != 1) && tab.genus[b0] == 1 {
                    acc ^= ones[full ^ b0];
                }
            }
            acc
        }
        Shape::TwoSlot => {
            let mut acc = 0u8;
            for b0 in submasks(full) {
                *terms += 1;
                if !matches!(tab.residue[b0], 5..=7) || tab.genus[b0] == 0 {
                    continue;
                }
                let rest = full ^ b0;
                let mut inner = if labeled || rest == 0 { 0 } else { ones[rest] };
                for b1 in submasks(rest) {
                    *terms += 1;
                    let r = tab.residue[b1];
                    let slot_ok = matches!(r, 2 | 3) || (labeled && r == 1);
                    if slot_ok && tab.genus[b1] == 1 {
                        inner ^= ones[rest ^ b1];
                    }
                }
                acc ^= inner;
            }
            acc
        }
    }
}

/// Constrained partition-sum parity by subset dynamic programming.
pub fn partition_sum_parity(
    profile: &PrimeProfile,
    constraint: PartitionConstraint,
    table: &GenusTable,
) -> Result<u8> {
    check_primes(profile, MAX_DP_PRIMES)?;
    let tab = SubsetTable::build(&profile.primes, table)?;
    Ok(evaluate(&tab, constraint, &mut 0))
}

/// Restricted growth strings of length `k`: every set partition once.
fn for_each_set_partition(k: usize, mut visit: impl FnMut(&[usize])) {
    let mut rgs = vec![0usize; k];
    if k == 0 {
        visit(&[]);
        return;
    }
    loop {
        let blocks = rgs.iter().max().unwrap() + 1;
        let mut masks = vec![0usize; blocks];
        for (i, &b) in rgs.iter().enumerate() {
            masks[b] |= 1 << i;
        }
        visit(&masks);
        // next restricted growth string
        let mut i = k - 1;
        loop {
            if i == 0 {
                return;
            }
            let prefix_max = rgs[..i].iter().max().copied().unwrap_or(0);
            if rgs[i] <= prefix_max {
                rgs[i] += 1;
                for x in &mut rgs[i + 1..] {
                    *x = 0;
                }
                break;
            }
            i -= 1;
        }
    }
}

/// Explicit enumeration of every set partition; exponential, testing only.
pub fn brute_force_partition_parity(
    profile: &PrimeProfile,
    constraint: PartitionConstraint,
    table: &GenusTable,
) -> Result<u8> {
    check_primes(profile, MAX_BRUTE_FORCE_PRIMES)?;
    let primes = &profile.primes;
    let block_product = |mask: usize| -> u64 {
        (0..primes.len()).filter(|i| mask >> i & 1 == 1).map(|i| primes[i]).product()
    };
    let mut sum = 0u64;
    let mut failure = None;
    let labeled = constraint.convention == Convention::LabeledSlots;
    for_each_set_partition(primes.len(), |blocks| {
        if failure.is_some() {
            return;
        }
        let products: Vec<u64> = blocks.iter().map(|&m| block_product(m)).collect();
        let res: Vec<u64> = products.iter().map(|p| p % 8).collect();
        let count = |pred: &dyn Fn(u64) -> bool| res.iter().filter(|&&r| pred(r)).count();
        let ones = count(&|r| r == 1);
        let weight = match constraint.shape {
            Shape::AllOnes => (ones == blocks.len()) as u64,
            Shape::FreeLeader => {
                let others = blocks.len() - ones;
                match (others, labeled) {
                    (0, _) if blocks.is_empty() => 1,
                    (0, false) => 1,
                    (0, true) => ones as u64,
                    (1, _) => 1,
                    _ => 0,
                }
            }
            Shape::TwoSlot => {
                let leaders = count(&|r| matches!(r, 5..=7));
                let seconds = count(&|r| matches!(r, 2 | 3));
                if leaders != 1 || seconds > 1 || leaders + seconds + ones != blocks.len() || blocks.len() < 2 {
                    0
                } else {
                    debug_assert!(res.iter().filter(|&&r| matches!(r, 5..=7)).count() == 1);
                    match (seconds, labeled) {
                        (1, _) => 1,
                        (_, false) => 1,
                        (_, true) => ones as u64,
                    }
                }
            }
        };
        if weight % 2 == 0 {
            return;
        }
        let mut term = 1u64;
        for &p in &products {
            match table.parity(p) {
                Ok(g) => term &= g as u64,
                Err(e) => {
                    failure = Some(e);
                    return;
                }
            }
        }
        sum ^= term;
    });
    match failure {
        Some(e) => Err(e),
        None => Ok(sum as u8),
    }
}

fn profile_in(n: u64, classes: &[u8]) -> Result<PrimeProfile> {
    let profile = factor_squarefree(n)?;
    if !classes.contains(&profile.residue8) {
        return Err(Error::WrongResidueClass { n, residue: profile.residue8 });
    }
    Ok(profile)
}

/// Parity of the decomposition sum for `n = 1, 2, 3 (mod 8)`.
pub fn rank_zero_parity(n: u64, table: &GenusTable, convention: Convention) -> Result<u8> {
    let profile = profile_in(n, &[1, 2, 3])?;
    partition_sum_parity(&profile, PartitionConstraint::new(Shape::FreeLeader, convention), table)
}

/// Both decomposition sums for `n = 5, 6, 7 (mod 8)`.
pub fn rank_one_sums(n: u64, table: &GenusTable, convention: Convention) -> Result<ParityResult> {
    let profile = profile_in(n, &[5, 6, 7])?;
    check_primes(&profile, MAX_DP_PRIMES)?;
    let tab = SubsetTable::build(&profile.primes, table)?;
    let mut terms = 0;
    let s1 = evaluate(&tab, PartitionConstraint::new(Shape::FreeLeader, convention), &mut terms);
    let s2 = evaluate(&tab, PartitionConstraint::new(Shape::TwoSlot, convention), &mut terms);
    Ok(ParityResult { s1, s2, terms_evaluated: terms, convention_used: convention })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GenusFamily {
    /// At most `r` prime factors `= 3 (mod 4)`.
    A,
    /// At most `r` prime factors `= 3, 5 (mod 8)`.
    B,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GenusConclusion {
    NonCongruent,
    Congruent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SingleGenusTrigger {
    pub conclusion: GenusConclusion,
    pub family: GenusFamily,
    pub r: u8,
}

impl SingleGenusTrigger {
    pub fn rule_id(&self) -> String {
        let fam = match self.family {
            GenusFamily::A => 'A',
            GenusFamily::B => 'B',
        };
        format!("corollary:{fam}{}", self.r)
    }
}

/// Residue condition part of the single-genus criteria, ignoring the class
/// group hypothesis.
pub fn single_genus_condition(profile: &PrimeProfile) -> Option<SingleGenusTrigger> {
    use GenusConclusion::*;
    let a_count = profile.count_residue(4, 3);
    let b_count = profile.count_residue(8, 3) + profile.count_residue(8, 5);
    let (conclusion, ra, rb) = match profile.residue8 {
        1 => (NonCongruent, 2, 2),
        // B_2 is too weak here: 210 = 2*3*5*7 has g odd and is congruent
        2 => (NonCongruent, 0, 1),
        3 => (NonCongruent, 1, 1),
        5 => (Congruent, 0, 1),
        7 => (Congruent, 1, 0),
        _ => return None,
    };
    if a_count <= ra {
        Some(SingleGenusTrigger { conclusion, family: GenusFamily::A, r: ra as u8 })
    } else if b_count <= rb {
        Some(SingleGenusTrigger { conclusion, family: GenusFamily::B, r: rb as u8 })
    } else {
        None
    }
}

/// Applies the single-genus criteria when `Q(sqrt(-n))` has no class of
/// exact order 4.
pub fn single_genus_classify(n: u64, table: &GenusTable) -> Result<Option<SingleGenusTrigger>> {
    let profile = factor_squarefree(n)?;
    let Some(trigger) = single_genus_condition(&profile) else {
        return Ok(None);
    };
    if table.parity(n)? == 0 {
        return Ok(None);
    }
    Ok(Some(trigger))
}
