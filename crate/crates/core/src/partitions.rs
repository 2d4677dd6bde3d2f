//! Set partitions of {1,…,n}, Bell numbers, and the moment ↔ cumulant
//! (truncated-function) inversion on the partition lattice.
//!
//! Blocks are stored as bitmasks over the element indices 0..n, so a
//! partition is a sorted list of disjoint masks covering (1 << n) − 1.

use crate::error::{Error, Result};
use std::collections::HashMap;

/// Enumeration guard: Bell(10) = 115975 keeps desk-scale runs instant;
/// anything beyond is a caller bug.
pub const MAX_PARTITION_ORDER: usize = 10;

/// A partition of {0,…,n−1} into disjoint nonempty blocks (bitmasks).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SetPartition {
    n: usize,
    blocks: Vec<u32>,
}

impl SetPartition {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Disjoint nonempty block masks, ascending by lowest element.
    pub fn blocks(&self) -> &[u32] {
        &self.blocks
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    /// Element indices of one block, ascending.
    pub fn block_elements(mask: u32) -> Vec<usize> {
        (0..32).filter(|i| mask & (1 << i) != 0).collect()
    }
}

/// Exhaustive, duplicate-free enumeration of all partitions of {1,…,n}
/// by restricted growth strings. The count equals Bell(n).
pub fn set_partitions(n: usize) -> Result<Vec<SetPartition>> {
    if n < 1 || n > MAX_PARTITION_ORDER {
        return Err(Error::OrderOutOfRange(n, 1, MAX_PARTITION_ORDER));
    }
    let mut out = Vec::new();
    let mut rgs = vec![0usize; n];
    loop {
        let nblocks = rgs.iter().copied().max().unwrap() + 1;
        let mut blocks = vec![0u32; nblocks];
        for (elem, &b) in rgs.iter().enumerate() {
            blocks[b] |= 1 << elem;
        }
        out.push(SetPartition { n, blocks });

        // next restricted growth string
        let mut i = n;
        loop {
            if i == 1 {
                return Ok(out);
            }
            i -= 1;
            let cap = 1 + rgs[..i].iter().copied().max().unwrap();
            if rgs[i] < cap {
                rgs[i] += 1;
                for slot in rgs.iter_mut().skip(i + 1) {
                    *slot = 0;
                }
                break;
            }
        }
    }
}

/// Bell number via the Bell triangle (n ≤ MAX_PARTITION_ORDER).
pub fn bell_number(n: usize) -> u64 {
    let mut row = vec![1u64];
    for _ in 1..=n {
        let mut next = Vec::with_capacity(row.len() + 1);
        next.push(*row.last().unwrap());
        for &v in &row {
            next.push(next.last().unwrap() + v);
        }
        row = next;
    }
    row[0]
}

/// Partitions of an arbitrary subset mask (elements of `mask` only).
fn partitions_of_mask(mask: u32) -> Vec<Vec<u32>> {
    if mask == 0 {
        return vec![vec![]];
    }
    let lowest = mask & mask.wrapping_neg();
    let rest = mask ^ lowest;
    // Enumerate the block containing the lowest element as lowest | sub,
    // sub ⊆ rest, then recurse on the complement.
    let mut out = Vec::new();
    let mut sub = rest;
    loop {
        let block = lowest | sub;
        for mut tail in partitions_of_mask(rest ^ sub) {
            tail.insert(0, block);
            out.push(tail);
        }
        if sub == 0 {
            break;
        }
        sub = (sub - 1) & rest;
    }
    out
}

/// Table of values indexed by nonempty sub-multisets of {0,…,n−1}
/// (bitmask keys). Used in both directions of the moment ↔ truncated
/// (cumulant) correspondence.
pub type SubsetTable = HashMap<u32, f64>;

/// Compose moments from truncated values:
/// M(S) = Σ_{partitions π of S} ∏_{B ∈ π} T(B).
pub fn moments_from_truncated(truncated: &SubsetTable, n: usize) -> Result<SubsetTable> {
    check_complete(truncated, n)?;
    let full = ((1u64 << n) - 1) as u32;
    let mut out = HashMap::new();
    for mask in 1..=full {
        let mut total = 0.0;
        for partition in partitions_of_mask(mask) {
            let mut prod = 1.0;
            for block in partition {
                prod *= truncated[&block];
            }
            total += prod;
        }
        out.insert(mask, total);
    }
    Ok(out)
}

/// Invert the partition sum (Möbius inversion on the partition lattice):
/// T(S) = Σ_{π ∈ P(S)} (−1)^{|π|−1} (|π|−1)! ∏_{B ∈ π} M(B).
pub fn truncated_from_moments(moments: &SubsetTable, n: usize) -> Result<SubsetTable> {
    if n > 6 {
        return Err(Error::OrderOutOfRange(n, 1, 6));
    }
    check_complete(moments, n)?;
    let full = ((1u64 << n) - 1) as u32;
    let mut out = HashMap::new();
    for mask in 1..=full {
        let mut total = 0.0;
        for partition in partitions_of_mask(mask) {
            let blocks = partition.len();
            let sign = if (blocks - 1) % 2 == 0 { 1.0 } else { -1.0 };
            let mut term = sign * factorial(blocks - 1);
            for block in partition {
                term *= moments[&block];
            }
            total += term;
        }
        out.insert(mask, total);
    }
    Ok(out)
}

fn check_complete(table: &SubsetTable, n: usize) -> Result<()> {
    let full = ((1u64 << n) - 1) as u32;
    for mask in 1..=full {
        if !table.contains_key(&mask) {
            return Err(Error::IncompleteTable(mask));
        }
    }
    Ok(())
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}
