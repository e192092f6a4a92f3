//! Genus-0 Gromov-Witten invariants `<tau_0(c_1) ... tau_0(c_n)>_d` of `P^r`.
//!
//! Codimension-0 insertions vanish in positive degree, codimension-1
//! insertions are removed with the divisor equation, and everything else is
//! solved from the associativity (WDVV) relation
//!
//! ```text
//! sum <x1 x2 S_A T_e>_{dA} <T_{r-e} x3 x4 S_B>_{dB}
//!   = sum <x1 x3 S_A T_e>_{dA} <T_{r-e} x2 x4 S_B>_{dB}
//! ```
//!
//! applied with `x1 = H`, `x2 = T_{c-1}`, where `T_c` is the insertion being
//! split. The left side contains the target once (the degree-0 three-point
//! bubble `<H T_{c-1} T_{r-c}>_0 = 1`). With `c` the smallest codimension
//! and `x3 = T_a` some insertion with `a >= c`, every other term has lower
//! degree, fewer marks after divisor removal, or the same marks with the
//! codimensions spread further apart (`(c, a) -> (c - 1, a + 1)`), so the
//! recursion terminates on the measure `(d, n, -sum c_i^2)`.

use crate::correlator::{dimension_unchecked, CanonicalKey, Insertion};
use crate::engine::{Engine, MAX_DEPTH};
use crate::error::{Error, Result};
use crate::exec;
use crate::rational::ExactRational;
use crate::split::for_each_submultiset;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GwQuery {
    pub r: u32,
    pub d: u32,
    pub codims: Vec<u32>,
}

impl GwQuery {
    pub fn new(r: u32, d: u32, codims: Vec<u32>) -> Self {
        Self { r, d, codims }
    }

    pub fn is_top(&self) -> bool {
        let total: i64 = self.codims.iter().map(|&c| c as i64).sum();
        total == dimension_unchecked(self.r, self.d, self.codims.len())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// `(x1 x2 | x3 x4)`
    Left,
    /// `(x1 x3 | x2 x4)`
    Right,
}

/// One boundary term of the associativity relation. `a_marks`/`b_marks`
/// list the non-distinguished marks on each component.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WdvvTerm {
    pub side: Side,
    pub a_marks: Vec<usize>,
    pub b_marks: Vec<usize>,
    pub d_a: u32,
    pub d_b: u32,
    pub e: u32,
}

/// All terms of both sides of the relation for `q` with distinguished marks
/// `[x1, x2, x3, x4]`. The A component carries `x1` and `x2` (left) or `x1`
/// and `x3` (right) plus the gluing insertion `T_e`; the B component carries
/// `T_{r-e}` and the other two.
pub fn wdvv_terms(q: &GwQuery, distinguished: [usize; 4]) -> Result<Vec<(WdvvTerm, GwQuery, GwQuery)>> {
    let n = q.codims.len();
    if distinguished.iter().any(|&i| i >= n) {
        return Err(Error::InvalidReduction(format!("distinguished mark out of range for {n} marks")));
    }
    for i in 0..4 {
        for j in i + 1..4 {
            if distinguished[i] == distinguished[j] {
                return Err(Error::InvalidReduction("distinguished marks must be distinct".into()));
            }
        }
    }
    let [x1, x2, x3, x4] = distinguished;
    let spectators: Vec<usize> = (0..n).filter(|i| !distinguished.contains(i)).collect();
    let mut terms = Vec::new();
    for (side, a_pair, b_pair) in [(Side::Left, [x1, x2], [x3, x4]), (Side::Right, [x1, x3], [x2, x4])] {
        for mask in 0..(1u64 << spectators.len()) {
            let (a_marks, b_marks): (Vec<usize>, Vec<usize>) = {
                let mut a = Vec::new();
                let mut b = Vec::new();
                for (bit, &i) in spectators.iter().enumerate() {
                    if mask >> bit & 1 == 1 {
                        a.push(i);
                    } else {
                        b.push(i);
                    }
                }
                (a, b)
            };
            for d_a in 0..=q.d {
                let d_b = q.d - d_a;
                for e in 0..=q.r {
                    let mut a_codims: Vec<u32> = a_pair.iter().chain(&a_marks).map(|&i| q.codims[i]).collect();
                    a_codims.push(e);
                    let mut b_codims = vec![q.r - e];
                    b_codims.extend(b_pair.iter().chain(&b_marks).map(|&i| q.codims[i]));
                    terms.push((
                        WdvvTerm { side, a_marks: a_marks.clone(), b_marks: b_marks.clone(), d_a, d_b, e },
                        GwQuery::new(q.r, d_a, a_codims),
                        GwQuery::new(q.r, d_b, b_codims),
                    ));
                }
            }
        }
    }
    Ok(terms)
}

impl Engine {
    pub fn gw_invariant(&self, q: &GwQuery) -> Result<ExactRational> {
        if q.r == 0 {
            return Err(Error::InvalidCorrelator("target dimension r must be at least 1".into()));
        }
        if q.d == 0 && q.codims.len() < 3 {
            return Err(Error::InvalidCorrelator(format!(
                "degree 0 needs at least 3 marks, got {}",
                q.codims.len()
            )));
        }
        Ok(self.gw_value(q.r, q.d, q.codims.clone(), 0))
    }

    pub(crate) fn gw_value(&self, r: u32, d: u32, mut codims: Vec<u32>, depth: u32) -> ExactRational {
        debug_assert!(depth < MAX_DEPTH, "GW recursion too deep");
        let n = codims.len();
        if codims.iter().any(|&c| c > r) {
            return ExactRational::zero();
        }
        let total: i64 = codims.iter().map(|&c| c as i64).sum();
        if total != dimension_unchecked(r, d, n) {
            return ExactRational::zero();
        }
        if d == 0 {
            // M_{0,n} x P^r with only pulled-back classes
            return if n == 3 { ExactRational::one() } else { ExactRational::zero() };
        }
        if codims.contains(&0) {
            return ExactRational::zero();
        }
        if let Some(pos) = codims.iter().position(|&c| c == 1) {
            codims.remove(pos);
            return ExactRational::from(d as i64) * self.gw_value(r, d, codims, depth + 1);
        }
        match n {
            // top-dimensional only for r = d = 1
            0 => return ExactRational::one(),
            // top-dimensional only as the line through two points
            2 => return ExactRational::one(),
            _ => {}
        }
        debug_assert!(n >= 3);
        codims.sort_unstable();
        let key = CanonicalKey::from_parts(r, d, &self::etas(&codims));
        if let Some(v) = self.cache.get(&key) {
            return v;
        }
        let value = self.gw_solve(r, d, &codims, &key, depth);
        self.cache.insert(key, value.clone());
        value
    }

    fn gw_solve(&self, r: u32, d: u32, codims: &[u32], key: &CanonicalKey, depth: u32) -> ExactRational {
        let n = codims.len();
        // split T_c = H . T_{c-1}; x3 = T_a with a >= c; x4 = T_b
        let split_candidates: Vec<usize> = (0..n)
            .filter(|&i| (0..n).any(|j| j != i && codims[j] >= codims[i]))
            .collect();
        let i_c = split_candidates[self.strategy.pick(key, 1, split_candidates.len())];
        let a_candidates: Vec<usize> = (0..n).filter(|&j| j != i_c && codims[j] >= codims[i_c]).collect();
        let i_a = match self.strategy {
            crate::engine::Strategy::Deterministic => *a_candidates.last().unwrap(),
            _ => a_candidates[self.strategy.pick(key, 2, a_candidates.len())],
        };
        let b_candidates: Vec<usize> = (0..n).filter(|&j| j != i_c && j != i_a).collect();
        let i_b = b_candidates[self.strategy.pick(key, 3, b_candidates.len())];
        let (c, a, b) = (codims[i_c], codims[i_a], codims[i_b]);
        let rest: Vec<u32> = (0..n).filter(|&j| j != i_c && j != i_a && j != i_b).map(|j| codims[j]).collect();

        let (right, left) = exec::join(
            self.exec,
            || self.wdvv_side(r, d, [1, a, c - 1, b], &rest, None, depth),
            || self.wdvv_side(r, d, [1, c - 1, a, b], &rest, Some(r - c), depth),
        );
        right - left
    }

    /// One side of the relation for `(x1 x2 | x3 x4)`, optionally leaving out
    /// the degree-0 term with no spectators on A and diagonal exponent `skip_e`.
    fn wdvv_side(
        &self,
        r: u32,
        d: u32,
        [x1, x2, x3, x4]: [u32; 4],
        rest: &[u32],
        skip_e: Option<u32>,
        depth: u32,
    ) -> ExactRational {
        let rest_ins = etas(rest);
        let mut jobs: Vec<(Vec<u32>, Vec<u32>, u64)> = Vec::new();
        for_each_submultiset(&rest_ins, |sel, other, weight| {
            jobs.push((sel.iter().map(|i| i.c).collect(), other.iter().map(|i| i.c).collect(), weight));
        });
        exec::sum(self.exec, &jobs, |(s_a, s_b, weight)| {
            let mut acc = ExactRational::zero();
            for d_a in 0..=d {
                let d_b = d - d_a;
                for e in 0..=r {
                    if d_a == 0 && s_a.is_empty() && skip_e == Some(e) {
                        continue;
                    }
                    let mut a_side = vec![x1, x2];
                    a_side.extend_from_slice(s_a);
                    a_side.push(e);
                    let left = self.gw_value(r, d_a, a_side, depth + 1);
                    if left.is_zero() {
                        continue;
                    }
                    let mut b_side = vec![r - e, x3, x4];
                    b_side.extend_from_slice(s_b);
                    let right = self.gw_value(r, d_b, b_side, depth + 1);
                    if !right.is_zero() {
                        acc += left * right;
                    }
                }
            }
            acc * ExactRational::from(*weight as i64)
        })
    }
}

fn etas(codims: &[u32]) -> Vec<Insertion> {
    codims.iter().map(|&c| Insertion::eta(c)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::Strategy;
    use crate::split::binomial;

    fn gw(r: u32, d: u32, codims: &[u32]) -> ExactRational {
        Engine::new().gw_invariant(&GwQuery::new(r, d, codims.to_vec())).unwrap()
    }

    /// Kontsevich's closed recursion for plane rational curves through
    /// `3d - 1` points, written out independently of the WDVV solver.
    fn kontsevich_plane(d: u32) -> i128 {
        let mut n = vec![0i128, 1];
        for k in 2..=d {
            let mut total = 0i128;
            for da in 1..k {
                let db = k - da;
                let (na, nb) = (n[da as usize], n[db as usize]);
                let (da_, db_) = (da as i128, db as i128);
                let first = db_ * binomial(3 * k - 4, 3 * da - 2) as i128;
                let second = if 3 * da - 1 <= 3 * k - 4 { da_ * binomial(3 * k - 4, 3 * da - 1) as i128 } else { 0 };
                total += na * nb * da_ * da_ * db_ * (first - second);
            }
            n.push(total);
        }
        n[d as usize]
    }

    #[test]
    fn base_values() {
        assert_eq!(gw(2, 1, &[2, 2]), 1.into());
        assert_eq!(gw(2, 2, &[2; 5]), 1.into());
        assert_eq!(gw(2, 3, &[2; 8]), 12.into());
        assert_eq!(gw(3, 3, &[3; 6]), 1.into());
        // lines meeting four lines in P^3
        assert_eq!(gw(3, 1, &[2; 4]), 2.into());
        assert_eq!(gw(1, 1, &[1]), 1.into());
        assert_eq!(gw(2, 0, &[1, 1, 0]), 1.into());
        assert!(gw(2, 1, &[2, 1]).is_zero());
    }

    #[test]
    fn plane_counts_match_kontsevich() {
        assert_eq!(kontsevich_plane(3), 12);
        assert_eq!(kontsevich_plane(4), 620);
        for d in 1..=5u32 {
            let expected = kontsevich_plane(d);
            assert_eq!(gw(2, d, &vec![2; (3 * d - 1) as usize]), ExactRational::from(expected as i64), "d = {d}");
        }
    }

    #[test]
    fn twelve_line_incidences() {
        assert_eq!(gw(3, 3, &[2; 12]), 80160.into());
    }

    #[test]
    fn invalid_queries() {
        let e = Engine::new();
        assert!(e.gw_invariant(&GwQuery::new(0, 1, vec![1])).is_err());
        assert!(e.gw_invariant(&GwQuery::new(2, 0, vec![1, 1])).is_err());
        assert!(e.gw_invariant(&GwQuery::new(2, 1, vec![3, 1])).unwrap().is_zero());
    }

    #[test]
    fn degree_split_and_diagonal_enumeration() {
        let q = GwQuery::new(2, 1, vec![1, 1, 2, 2]);
        let terms = wdvv_terms(&q, [0, 1, 2, 3]).unwrap();
        // no spectators: one splitting per side, 2 degree splits, 3 diagonals
        assert_eq!(terms.len(), 2 * 2 * 3);
        let splits: std::collections::BTreeSet<_> = terms.iter().map(|(t, _, _)| (t.d_a, t.d_b)).collect();
        assert_eq!(splits.into_iter().collect::<Vec<_>>(), vec![(0, 1), (1, 0)]);
        assert!(terms.iter().filter(|(t, _, _)| t.side == Side::Left && t.d_a == 0).count() == 3);
    }

    #[test]
    fn relation_solves_conics_through_five_points() {
        // x1 = H, x2 = T_1 split off a point class, x3 = x4 = point, two more points
        let q = GwQuery::new(2, 2, vec![1, 1, 2, 2, 2, 2]);
        let e = Engine::new();
        let terms = wdvv_terms(&q, [0, 1, 2, 3]).unwrap();
        let mut target_coeff = ExactRational::zero();
        let mut left_rest = ExactRational::zero();
        let mut right = ExactRational::zero();
        for (t, a, b) in &terms {
            let is_target = t.side == Side::Left && t.d_a == 0 && t.a_marks.is_empty();
            if is_target {
                // <H T_1 T_e>_0 <T_{2-e} pt pt pt pt>_2 with e = 0
                if t.e == 0 {
                    target_coeff = e.gw_invariant(a).unwrap();
                    assert_eq!(b.codims.iter().filter(|&&c| c == 2).count(), 5);
                    continue;
                }
            }
            let v = e.gw_invariant(a).unwrap() * e.gw_invariant(b).unwrap();
            match t.side {
                Side::Left => left_rest += v,
                Side::Right => right += v,
            }
        }
        assert_eq!(target_coeff, 1.into());
        assert_eq!(right - left_rest, 1.into());
    }

    #[test]
    fn wdvv_sides_agree() {
        let e = Engine::new();
        let cases: Vec<GwQuery> = vec![
            GwQuery::new(2, 2, vec![2, 2, 2, 2, 1, 1]),
            GwQuery::new(3, 1, vec![2, 2, 2, 3, 1]),
            GwQuery::new(3, 2, vec![3, 3, 2, 2, 2, 1, 1]),
        ];
        for q in cases {
            let n = q.codims.len();
            for dist in [[0, 1, 2, 3], [n - 1, 0, n - 2, 1], [2, 3, 0, 1]] {
                let mut sides = [ExactRational::zero(), ExactRational::zero()];
                for (t, a, b) in wdvv_terms(&q, dist).unwrap() {
                    let v = e.gw_invariant(&a).unwrap() * e.gw_invariant(&b).unwrap();
                    sides[(t.side == Side::Right) as usize] += v;
                }
                assert_eq!(sides[0], sides[1], "{q:?} {dist:?}");
            }
        }
    }

    #[test]
    fn choice_independent() {
        for seed in 0..8 {
            let e = Engine::new().strategy(Strategy::Randomized { seed });
            let v = e.gw_invariant(&GwQuery::new(3, 3, vec![3, 3, 3, 2, 2, 2, 2, 2, 2])).unwrap();
            let reference = gw(3, 3, &[3, 3, 3, 2, 2, 2, 2, 2, 2]);
            assert_eq!(v, reference, "seed {seed}");
        }
    }
}
