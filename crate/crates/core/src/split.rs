//! Enumeration of two-sided splittings of a list of insertions.
//!
//! Recursion steps sum over all ways to distribute marks between the two
//! components of a boundary divisor. Since values only depend on the
//! multiset of insertions, equal insertions are grouped and each
//! sub-multiset is visited once, weighted by the number of subsets it
//! stands for.

use crate::correlator::Insertion;

/// Distinct insertions with their multiplicities, in sorted order.
pub fn group(insertions: &[Insertion]) -> Vec<(Insertion, u32)> {
    let mut sorted = insertions.to_vec();
    sorted.sort_unstable();
    let mut groups: Vec<(Insertion, u32)> = Vec::new();
    for ins in sorted {
        match groups.last_mut() {
            Some((last, count)) if *last == ins => *count += 1,
            _ => groups.push((ins, 1)),
        }
    }
    groups
}

pub fn binomial(n: u32, k: u32) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k) as u64;
    let n = n as u64;
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

/// Calls `visit(selected, rest, weight)` for every sub-multiset `selected`
/// of `insertions`; `weight` counts the index subsets mapping onto it.
pub fn for_each_submultiset<F>(insertions: &[Insertion], mut visit: F)
where
    F: FnMut(&[Insertion], &[Insertion], u64),
{
    let groups = group(insertions);
    let mut counts = vec![0u32; groups.len()];
    let mut selected = Vec::with_capacity(insertions.len());
    let mut rest = Vec::with_capacity(insertions.len());
    loop {
        selected.clear();
        rest.clear();
        let mut weight = 1u64;
        for ((ins, total), &k) in groups.iter().zip(&counts) {
            selected.extend(std::iter::repeat_n(*ins, k as usize));
            rest.extend(std::iter::repeat_n(*ins, (total - k) as usize));
            weight *= binomial(*total, k);
        }
        visit(&selected, &rest, weight);

        // odometer over counts[i] in 0..=groups[i].1
        let mut i = 0;
        loop {
            if i == groups.len() {
                return;
            }
            if counts[i] < groups[i].1 {
                counts[i] += 1;
                break;
            }
            counts[i] = 0;
            i += 1;
        }
    }
}

/// All index subsets of `0..n`, as bitmasks. Only for `n < 64`.
pub fn subsets(n: usize) -> impl Iterator<Item = u64> {
    assert!(n < 64);
    0..(1u64 << n)
}
