//! Twisted descendants `<prod tau_{u_i}^{m_i}(c_i)>_d`, where `m_i` is the
//! exponent of the modified psi class `psibar_i = psi_i - beta_i`.
//!
//! With `m_p > 0` at a pivot mark `p`,
//!
//! ```text
//! <prod tau_{u_i}^{m_i}(c_i)>_d = <tau_{u_p+1}^{m_p-1}(c_p) prod_{i != p} ...>_d
//!     - sum_A (n_A - 2)!/prod_{i in A} u_i!  <tau_0^{M-1}(C) prod_{i in B} tau_{u_i}^{m_i}(c_i)>_d
//! ```
//!
//! summed over partitions `A u B` of the marks with `p` in `A`, `|A| >= 2`,
//! where `M` and `C` add up the `m_i` and `c_i` over `A`. The coefficient is
//! the integral over `M_{0, A u {x}}` and vanishes unless
//! `sum_{i in A} u_i = n_A - 2`. Each step lowers the total `m`; on a
//! one-pointed space `psibar = psi` and the usual descendants take over.

use crate::correlator::{km_integral, Correlator, Insertion};
use crate::engine::{Engine, MAX_DEPTH};
use crate::error::{Error, Result};
use crate::rational::ExactRational;
use crate::split::for_each_submultiset;

/// One partition of the marks for the boundary sum.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitTerm {
    pub a: Vec<usize>,
    pub b: Vec<usize>,
    /// sum of `m_i` over `a`
    pub m_total: u32,
    /// sum of `c_i` over `a`
    pub c_total: u32,
}

fn check_pivot(corr: &Correlator, pivot: usize) -> Result<()> {
    if corr.d() == 0 {
        return Err(Error::ModifiedPsiInDegreeZero);
    }
    if corr.n() < 2 {
        return Err(Error::InvalidReduction("one-pointed spaces have psibar = psi; no splitting".into()));
    }
    match corr.insertions().get(pivot) {
        None => Err(Error::InvalidReduction(format!("pivot {pivot} out of range"))),
        Some(ins) if ins.m == 0 => Err(Error::InvalidReduction("pivot has no modified psi exponent".into())),
        Some(_) => Ok(()),
    }
}

/// Every `A` containing the pivot with `|A| >= 2`; `B` may be empty.
pub fn twisted_splittings(corr: &Correlator, pivot: usize) -> Result<Vec<SplitTerm>> {
    check_pivot(corr, pivot)?;
    let ins = corr.insertions();
    let others: Vec<usize> = (0..corr.n()).filter(|&i| i != pivot).collect();
    let mut splits = Vec::with_capacity(1 << others.len());
    for mask in 1..(1u64 << others.len()) {
        let mut a = vec![pivot];
        let mut b = Vec::new();
        for (bit, &i) in others.iter().enumerate() {
            if mask >> bit & 1 == 1 {
                a.push(i);
            } else {
                b.push(i);
            }
        }
        a.sort_unstable();
        let m_total = a.iter().map(|&i| ins[i].m).sum();
        let c_total = a.iter().map(|&i| ins[i].c).sum();
        splits.push(SplitTerm { a, b, m_total, c_total });
    }
    Ok(splits)
}

/// Coefficient `-(n_A - 2)!/prod u_i!` of a boundary term, from the integral
/// over `M_{0, A u {x}}` with the gluing mark carrying no psi class.
fn boundary_coefficient(a_us: impl Iterator<Item = u32>) -> ExactRational {
    let mut us: Vec<u32> = a_us.collect();
    us.push(0);
    -km_integral(&us).expect("|A| >= 2")
}

/// The recursion step at `pivot`: the shifted correlator with coefficient 1,
/// then one term per splitting with a nonzero coefficient.
pub fn twisted_reduce(corr: &Correlator, pivot: usize) -> Result<Vec<(ExactRational, Correlator)>> {
    let splits = twisted_splittings(corr, pivot)?;
    let (r, d) = (corr.r(), corr.d());
    let ins = corr.insertions();
    let mut shifted = ins.to_vec();
    shifted[pivot].u += 1;
    shifted[pivot].m -= 1;
    let mut terms = vec![(ExactRational::one(), Correlator::from_parts(r, d, shifted))];
    for split in splits {
        let coeff = boundary_coefficient(split.a.iter().map(|&i| ins[i].u));
        if coeff.is_zero() {
            continue;
        }
        let mut b_side = vec![Insertion::new(0, split.m_total - 1, split.c_total)];
        b_side.extend(split.b.iter().map(|&i| ins[i]));
        terms.push((coeff, Correlator::from_parts(r, d, b_side)));
    }
    Ok(terms)
}

impl Engine {
    pub fn eval_twisted(&self, corr: &Correlator) -> Result<ExactRational> {
        if corr.d() == 0 && corr.has_modified_psi() {
            return Err(Error::ModifiedPsiInDegreeZero);
        }
        Ok(self.twisted_value(corr.sorted(), 0))
    }

    pub(crate) fn twisted_value(&self, corr: Correlator, depth: u32) -> ExactRational {
        debug_assert!(depth < MAX_DEPTH, "twisted recursion too deep at {corr}");
        if corr.eta_overflow() || !corr.is_top() {
            return ExactRational::zero();
        }
        if corr.n() == 1 {
            let ins = corr.insertions()[0];
            let folded = Correlator::from_parts(corr.r(), corr.d(), vec![Insertion::new(ins.u + ins.m, 0, ins.c)]);
            return self.descendant_value(folded, depth + 1);
        }
        if !corr.has_modified_psi() {
            return self.descendant_value(corr, depth + 1);
        }
        let key = corr.key();
        if let Some(v) = self.cache.get(&key) {
            return v;
        }
        let value = self.twisted_step(&corr, depth);
        self.cache.insert(key, value.clone());
        value
    }

    /// Recursion step with grouped splittings.
    fn twisted_step(&self, corr: &Correlator, depth: u32) -> ExactRational {
        let (r, d) = (corr.r(), corr.d());
        let ins = corr.insertions();
        let candidates: Vec<usize> = (0..ins.len()).filter(|&i| ins[i].m > 0).collect();
        let pivot = candidates[self.strategy.pick(&corr.key(), 30, candidates.len())];
        let p = ins[pivot];
        let total_m: u32 = ins.iter().map(|i| i.m).sum();

        let mut shifted = ins.to_vec();
        shifted[pivot].u += 1;
        shifted[pivot].m -= 1;
        let mut terms = vec![(ExactRational::one(), Correlator::from_parts(r, d, shifted))];

        let others: Vec<Insertion> = ins.iter().enumerate().filter(|&(i, _)| i != pivot).map(|(_, &x)| x).collect();
        for_each_submultiset(&others, |a, b, weight| {
            if a.is_empty() {
                return;
            }
            let c_total = p.c + a.iter().map(|i| i.c).sum::<u32>();
            if c_total > r {
                return;
            }
            let coeff = boundary_coefficient(std::iter::once(p.u).chain(a.iter().map(|i| i.u)));
            if coeff.is_zero() {
                return;
            }
            let m_total = p.m + a.iter().map(|i| i.m).sum::<u32>();
            let mut b_side = Vec::with_capacity(b.len() + 1);
            b_side.push(Insertion::new(0, m_total - 1, c_total));
            b_side.extend_from_slice(b);
            debug_assert_eq!(b_side.iter().map(|i| i.m).sum::<u32>(), total_m - 1);
            terms.push((coeff * ExactRational::from(weight as i64), Correlator::from_parts(r, d, b_side)));
        });
        self.weighted_sum(terms, |c| self.twisted_value(c.sorted(), depth + 1))
    }
}
