//! Gravitational descendants `<prod tau_{u_i}(c_i)>_d`, reduced to
//! Gromov-Witten invariants with the puncture, dilaton and divisor
//! equations, the backwards divisor equation, and the topological
//! recursion relation (TRR).
//!
//! The term producers below are exact transcriptions of those equations and
//! work on index subsets. The evaluator uses the same equations but groups
//! equal insertions (see [`crate::split`]).

use crate::correlator::{degree_zero_value, Correlator, Insertion};
use crate::engine::{Engine, MAX_DEPTH};
use crate::error::{Error, Result};
use crate::exec;
use crate::rational::ExactRational;
use crate::split::for_each_submultiset;

const PUNCTURE: Insertion = Insertion::new(0, 0, 0);
const DILATON: Insertion = Insertion::new(1, 0, 0);
const DIVISOR: Insertion = Insertion::new(0, 0, 1);

/// A weighted product of two correlators, one per component of a boundary
/// divisor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProductTerm {
    pub coeff: ExactRational,
    pub left: Correlator,
    pub right: Correlator,
}

fn remove_first(corr: &Correlator, target: Insertion, name: &'static str) -> Result<Vec<Insertion>> {
    let pos = corr
        .insertions()
        .iter()
        .position(|&i| i == target)
        .ok_or(Error::MissingInsertion(name))?;
    let mut rest = corr.insertions().to_vec();
    rest.remove(pos);
    let stable = if corr.d() == 0 { rest.len() >= 3 } else { !rest.is_empty() };
    if !stable {
        return Err(Error::InvalidReduction(format!("removing {name} from {corr} leaves an unstable space")));
    }
    Ok(rest)
}

/// `<X tau_0(0)>_d = sum_j <X with u_j - 1>_d`. Terms with a negative
/// exponent are omitted. Modified psi exponents are carried along.
pub fn puncture_reduce(corr: &Correlator) -> Result<Vec<(ExactRational, Correlator)>> {
    let rest = remove_first(corr, PUNCTURE, "tau_0(0)")?;
    let mut terms = Vec::new();
    for j in 0..rest.len() {
        if rest[j].u == 0 {
            continue;
        }
        let mut ins = rest.clone();
        ins[j].u -= 1;
        terms.push((ExactRational::one(), Correlator::from_parts(corr.r(), corr.d(), ins)));
    }
    Ok(terms)
}

/// `<X tau_1(0)>_d = (n - 2) <X>_d` with `n` the number of marks of `X`.
pub fn dilaton_reduce(corr: &Correlator) -> Result<(ExactRational, Correlator)> {
    let rest = remove_first(corr, DILATON, "tau_1(0)")?;
    let coeff = ExactRational::from(rest.len() as i64 - 2);
    Ok((coeff, Correlator::from_parts(corr.r(), corr.d(), rest)))
}

/// `<X tau_0(1)>_d = d <X>_d + sum_j <X with u_j - 1, c_j + 1>_d`.
///
/// Shift terms with `c_j + 1 > r` are kept; they evaluate to 0.
pub fn divisor_reduce(corr: &Correlator) -> Result<Vec<(ExactRational, Correlator)>> {
    let rest = remove_first(corr, DIVISOR, "tau_0(1)")?;
    let mut terms = vec![(ExactRational::from(corr.d() as i64), Correlator::from_parts(corr.r(), corr.d(), rest.clone()))];
    for j in 0..rest.len() {
        if rest[j].u == 0 {
            continue;
        }
        let mut ins = rest.clone();
        ins[j].u -= 1;
        ins[j].c += 1;
        terms.push((ExactRational::one(), Correlator::from_parts(corr.r(), corr.d(), ins)));
    }
    Ok(terms)
}

/// The divisor equation solved for its right-hand side:
/// `<X>_d = (1/d) ( <X tau_0(1)>_d - sum_j <X with u_j - 1, c_j + 1>_d )`.
pub fn divisor_lift(corr: &Correlator) -> Result<Vec<(ExactRational, Correlator)>> {
    if corr.d() == 0 {
        return Err(Error::InvalidReduction("divisor lift divides by the degree; d = 0".into()));
    }
    let inv_d = ExactRational::new(1, corr.d());
    let mut lifted = corr.insertions().to_vec();
    lifted.push(DIVISOR);
    let mut terms = vec![(inv_d.clone(), Correlator::from_parts(corr.r(), corr.d(), lifted))];
    let ins = corr.insertions();
    for j in 0..ins.len() {
        if ins[j].u == 0 {
            continue;
        }
        let mut shifted = ins.to_vec();
        shifted[j].u -= 1;
        shifted[j].c += 1;
        terms.push((-inv_d.clone(), Correlator::from_parts(corr.r(), corr.d(), shifted)));
    }
    Ok(terms)
}

/// Topological recursion relation from `psi_p = (p | j, k)`:
///
/// ```text
/// <prod tau_{u_i}(c_i)>_d = sum <tau_{u_p - 1}(c_p) prod_{A \ p} tau(c) tau_0(e)>_{dA}
///                              . <tau_0(r - e) prod_B tau(c)>_{dB}
/// ```
///
/// over splittings with `p` in A and the spectators `j, k` in B, all degree
/// splits and `e = 0..=r`. Components of degree 0 with fewer than three
/// special points are skipped.
pub fn trr_reduce(corr: &Correlator, pivot: usize, spectators: (usize, usize)) -> Result<Vec<ProductTerm>> {
    let n = corr.n();
    let (j, k) = spectators;
    if n < 3 {
        return Err(Error::InvalidReduction(format!("TRR needs at least 3 marks, got {n}")));
    }
    if pivot >= n || j >= n || k >= n || pivot == j || pivot == k || j == k {
        return Err(Error::InvalidReduction("pivot and spectators must be distinct marks".into()));
    }
    if corr.has_modified_psi() {
        return Err(Error::InvalidReduction("TRR applies to usual psi classes only".into()));
    }
    let ins = corr.insertions();
    if ins[pivot].u == 0 {
        return Err(Error::InvalidReduction("TRR pivot needs a psi exponent".into()));
    }
    let (r, d) = (corr.r(), corr.d());
    let others: Vec<usize> = (0..n).filter(|&i| i != pivot && i != j && i != k).collect();
    let mut pivot_ins = ins[pivot];
    pivot_ins.u -= 1;
    let mut terms = Vec::new();
    for mask in 0..(1u64 << others.len()) {
        let a_marks: Vec<Insertion> = others.iter().enumerate().filter(|(b, _)| mask >> b & 1 == 1).map(|(_, &i)| ins[i]).collect();
        let b_marks: Vec<Insertion> = others.iter().enumerate().filter(|(b, _)| mask >> b & 1 == 0).map(|(_, &i)| ins[i]).collect();
        for d_a in 0..=d {
            if d_a == 0 && a_marks.is_empty() {
                continue;
            }
            for e in 0..=r {
                let mut left = vec![pivot_ins];
                left.extend_from_slice(&a_marks);
                left.push(Insertion::eta(e));
                let mut right = vec![Insertion::eta(r - e), ins[j], ins[k]];
                right.extend_from_slice(&b_marks);
                terms.push(ProductTerm {
                    coeff: ExactRational::one(),
                    left: Correlator::from_parts(r, d_a, left),
                    right: Correlator::from_parts(r, d - d_a, right),
                });
            }
        }
    }
    Ok(terms)
}

#[derive(Clone, Copy)]
enum Strip {
    Puncture,
    Dilaton,
    Divisor,
}

impl Engine {
    /// Value of a descendant with no modified psi classes.
    pub fn eval_descendant(&self, corr: &Correlator) -> Result<ExactRational> {
        if corr.has_modified_psi() {
            return Err(Error::InvalidReduction(format!("{corr} has modified psi classes; use eval_twisted")));
        }
        Ok(self.descendant_value(corr.sorted(), 0))
    }

    pub(crate) fn descendant_value(&self, corr: Correlator, depth: u32) -> ExactRational {
        debug_assert!(depth < MAX_DEPTH, "descendant recursion too deep at {corr}");
        debug_assert!(!corr.has_modified_psi());
        if corr.eta_overflow() || !corr.is_top() {
            return ExactRational::zero();
        }
        if corr.d() == 0 {
            return degree_zero_value(&corr).expect("degree-0 correlators are stable");
        }
        if corr.insertions().iter().all(|i| i.u == 0) {
            let codims = corr.insertions().iter().map(|i| i.c).collect();
            return self.gw_value(corr.r(), corr.d(), codims, depth + 1);
        }
        let key = corr.key();
        if let Some(v) = self.cache.get(&key) {
            return v;
        }
        let value = self.descendant_step(&corr, depth);
        self.cache.insert(key, value.clone());
        value
    }

    fn descendant_step(&self, corr: &Correlator, depth: u32) -> ExactRational {
        let n = corr.n();
        let ins = corr.insertions();
        let mut strips = Vec::with_capacity(3);
        if n >= 2 && ins.contains(&PUNCTURE) {
            strips.push(Strip::Puncture);
        }
        if n >= 2 && ins.contains(&DILATON) {
            strips.push(Strip::Dilaton);
        }
        // the divisor is only stripped while TRR stays applicable afterwards,
        // otherwise it would undo a lift
        if n >= 4 && ins.contains(&DIVISOR) {
            strips.push(Strip::Divisor);
        }
        if !strips.is_empty() {
            let key = corr.key();
            let terms = match strips[self.strategy.pick(&key, 10, strips.len())] {
                Strip::Puncture => puncture_reduce(corr),
                Strip::Dilaton => dilaton_reduce(corr).map(|t| vec![t]),
                Strip::Divisor => divisor_reduce(corr),
            }
            .expect("strip preconditions checked");
            return self.weighted_sum(terms, |c| self.descendant_value(c.sorted(), depth + 1));
        }
        if n >= 3 {
            return self.trr_value(corr, depth);
        }
        let terms = divisor_lift(corr).expect("positive degree");
        self.weighted_sum(terms, |c| self.descendant_value(c.sorted(), depth + 1))
    }

    pub(crate) fn weighted_sum<F>(&self, terms: Vec<(ExactRational, Correlator)>, eval: F) -> ExactRational
    where
        F: Fn(Correlator) -> ExactRational + Sync + Send,
    {
        exec::sum(self.exec, &terms, |(coeff, c)| {
            if coeff.is_zero() {
                return ExactRational::zero();
            }
            let v = eval(c.clone());
            if v.is_zero() {
                v
            } else {
                coeff * &v
            }
        })
    }

    /// TRR with grouped spectator splittings.
    fn trr_value(&self, corr: &Correlator, depth: u32) -> ExactRational {
        let (r, d) = (corr.r(), corr.d());
        let ins = corr.insertions();
        let n = ins.len();
        let key = corr.key();
        let max_u = ins.iter().map(|i| i.u).max().unwrap();
        let pivot = match self.strategy {
            crate::engine::Strategy::Deterministic => ins.iter().position(|i| i.u == max_u).unwrap(),
            _ => {
                let candidates: Vec<usize> = (0..n).filter(|&i| ins[i].u > 0).collect();
                candidates[self.strategy.pick(&key, 20, candidates.len())]
            }
        };
        let mut others: Vec<usize> = (0..n).filter(|&i| i != pivot).collect();
        let j = others.remove(self.strategy.pick(&key, 21, others.len()));
        let k = others.remove(self.strategy.pick(&key, 22, others.len()));
        let rest: Vec<Insertion> = others.iter().map(|&i| ins[i]).collect();
        let mut pivot_ins = ins[pivot];
        pivot_ins.u -= 1;

        let mut jobs: Vec<(Vec<Insertion>, Vec<Insertion>, u64)> = Vec::new();
        for_each_submultiset(&rest, |a, b, w| jobs.push((a.to_vec(), b.to_vec(), w)));
        exec::sum(self.exec, &jobs, |(a_marks, b_marks, weight)| {
            let mut acc = ExactRational::zero();
            for d_a in 0..=d {
                if d_a == 0 && a_marks.is_empty() {
                    continue;
                }
                for e in 0..=r {
                    let mut left = Vec::with_capacity(a_marks.len() + 2);
                    left.push(pivot_ins);
                    left.extend_from_slice(a_marks);
                    left.push(Insertion::eta(e));
                    let left = Correlator::from_parts(r, d_a, left);
                    if !left.is_top() {
                        continue;
                    }
                    let lv = self.descendant_value(left.sorted(), depth + 1);
                    if lv.is_zero() {
                        continue;
                    }
                    let mut right = Vec::with_capacity(b_marks.len() + 3);
                    right.push(Insertion::eta(r - e));
                    right.push(ins[j]);
                    right.push(ins[k]);
                    right.extend_from_slice(b_marks);
                    let rv = self.descendant_value(Correlator::from_parts(r, d - d_a, right).sorted(), depth + 1);
                    if !rv.is_zero() {
                        acc += lv * rv;
                    }
                }
            }
            acc * ExactRational::from(*weight as i64)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::Strategy;

    fn corr(r: u32, d: u32, ins: &[(u32, u32)]) -> Correlator {
        Correlator::new(r, d, ins.iter().map(|&(u, c)| Insertion::new(u, 0, c)).collect()).unwrap()
    }

    fn eval(c: &Correlator) -> ExactRational {
        Engine::new().eval_descendant(c).unwrap()
    }

    fn eval_terms(terms: &[(ExactRational, Correlator)]) -> ExactRational {
        terms.iter().map(|(k, c)| k * &eval(c)).sum()
    }

    #[test]
    fn puncture_examples() {
        let c = corr(2, 1, &[(0, 0), (1, 2), (0, 2)]);
        let terms = puncture_reduce(&c).unwrap();
        assert_eq!(terms, vec![(ExactRational::one(), corr(2, 1, &[(0, 2), (0, 2)]))]);
        assert_eq!(eval(&c), 1.into());
        assert!(puncture_reduce(&corr(2, 1, &[(0, 0), (0, 2), (0, 2)])).unwrap().is_empty());
        assert_eq!(puncture_reduce(&corr(2, 1, &[(1, 2)])), Err(Error::MissingInsertion("tau_0(0)")));
    }

    #[test]
    fn dilaton_examples() {
        let (k, rest) = dilaton_reduce(&corr(2, 1, &[(1, 0), (0, 2), (0, 2)])).unwrap();
        assert_eq!(k, 0.into());
        assert_eq!(rest, corr(2, 1, &[(0, 2), (0, 2)]));
        assert!(eval(&corr(2, 1, &[(1, 0), (0, 2), (0, 2)])).is_zero());
        let (k, rest) = dilaton_reduce(&corr(2, 1, &[(1, 0), (0, 2), (0, 2), (0, 2)])).unwrap();
        assert_eq!(k, 1.into());
        assert_eq!((rest.r(), rest.d(), rest.n()), (2, 1, 3));
    }

    #[test]
    fn divisor_examples() {
        let terms = divisor_reduce(&corr(2, 1, &[(0, 1), (0, 2), (0, 2)])).unwrap();
        assert_eq!(terms.len(), 1);
        assert_eq!(eval_terms(&terms), 1.into());

        let terms = divisor_reduce(&corr(3, 2, &[(0, 1), (1, 1)])).unwrap();
        assert_eq!(
            terms,
            vec![
                (ExactRational::from(2), corr(3, 2, &[(1, 1)])),
                (ExactRational::one(), corr(3, 2, &[(0, 2)])),
            ]
        );
        // shift past r is kept
        let terms = divisor_reduce(&corr(2, 1, &[(0, 1), (1, 2), (0, 2)])).unwrap();
        assert!(terms.iter().any(|(_, c)| c.insertions()[0].c == 3));
    }

    #[test]
    fn lift_examples() {
        let c = corr(2, 1, &[(2, 1)]);
        assert_eq!(
            divisor_lift(&c).unwrap(),
            vec![
                (ExactRational::one(), corr(2, 1, &[(2, 1), (0, 1)])),
                (-ExactRational::one(), corr(2, 1, &[(1, 2)])),
            ]
        );
        let thirds = divisor_lift(&corr(2, 3, &[(1, 2), (0, 2)])).unwrap();
        assert_eq!(thirds[0].0, ExactRational::new(1, 3));
        assert!(divisor_lift(&corr(2, 0, &[(0, 2), (0, 0), (0, 0)])).is_err());
    }

    #[test]
    fn lift_reduce_round_trip() {
        for c in [corr(2, 1, &[(2, 1)]), corr(3, 2, &[(3, 3), (2, 2)]), corr(2, 3, &[(4, 2), (2, 2), (1, 2)])] {
            let lifted = divisor_lift(&c).unwrap();
            assert_eq!(eval_terms(&lifted), eval(&c), "{c}");
            // forward-reducing the added mark recovers d <X> plus the shifts
            let forward = divisor_reduce(&lifted[0].1).unwrap();
            let shifts: ExactRational = lifted[1..].iter().map(|(_, s)| eval(s)).sum();
            let expected = ExactRational::from(c.d() as i64) * eval(&c) + shifts;
            assert_eq!(eval_terms(&forward), expected);
        }
    }

    #[test]
    fn trr_example() {
        let c = corr(2, 1, &[(1, 2), (0, 1), (0, 1)]);
        let terms = trr_reduce(&c, 0, (1, 2)).unwrap();
        // A = {pivot}: only d_A = 1 is stable; 3 diagonal exponents
        assert_eq!(terms.len(), 3);
        assert!(terms.iter().all(|t| t.left.d() == 1 && t.left.n() == 2));
        let e = Engine::new();
        let surviving: Vec<_> = terms
            .iter()
            .filter(|t| !(e.eval_descendant(&t.left).unwrap() * e.eval_descendant(&t.right).unwrap()).is_zero())
            .collect();
        assert_eq!(surviving.len(), 1);
        assert_eq!(surviving[0].left.insertions()[1], Insertion::eta(2));
        assert_eq!(eval(&c), 1.into());
        assert!(trr_reduce(&corr(2, 1, &[(0, 2), (0, 1), (0, 1)]), 0, (1, 2)).is_err());
        assert!(trr_reduce(&corr(2, 1, &[(3, 2), (0, 1)]), 0, (1, 1)).is_err());
    }

    #[test]
    fn trr_terms_sum_to_value() {
        let c = corr(3, 2, &[(2, 2), (1, 3), (0, 3), (0, 2), (0, 2)]);
        let e = Engine::new();
        for (p, j, k) in [(0, 1, 2), (1, 3, 4), (0, 4, 2)] {
            let total: ExactRational = trr_reduce(&c, p, (j, k))
                .unwrap()
                .iter()
                .map(|t| &t.coeff * &(e.eval_descendant(&t.left).unwrap() * e.eval_descendant(&t.right).unwrap()))
                .sum();
            assert_eq!(total, eval(&c));
        }
    }

    #[test]
    fn small_known_values() {
        // psi on M_{0,1}(P^1, 1) = P^1 is the canonical class
        let c = corr(1, 1, &[(1, 0)]);
        assert_eq!(eval(&c), (-2).into());
        assert_eq!(eval(&corr(1, 1, &[(0, 1)])), 1.into());
    }

    #[test]
    fn randomized_paths_agree() {
        let cases = [
            corr(2, 2, &[(3, 2), (1, 1), (0, 2), (0, 2)]),
            corr(3, 2, &[(2, 2), (1, 3), (0, 3), (0, 2), (0, 2)]),
            corr(2, 3, &[(2, 2), (0, 1), (0, 2), (0, 2), (0, 2), (0, 2), (0, 2), (1, 0)]),
        ];
        for c in &cases {
            let reference = eval(c);
            for seed in 0..6 {
                let v = Engine::new().strategy(Strategy::Randomized { seed }).eval_descendant(c).unwrap();
                assert_eq!(v, reference, "{c} seed {seed}");
            }
        }
    }

    #[test]
    fn rejects_modified_psi() {
        let c = Correlator::new(2, 1, vec![Insertion::new(0, 1, 2), Insertion::eta(2)]).unwrap();
        assert!(Engine::new().eval_descendant(&c).is_err());
    }
}
