//! Correlators, canonical keys, dimension bookkeeping and the closed-form
//! integrals on `M_{0,n}` and on degree-0 map spaces `M_{0,n} x P^r`.

use std::fmt;
use std::sync::{OnceLock, RwLock};

use num_bigint::BigInt;

use crate::error::{Error, Result};
use crate::rational::ExactRational;

/// Exponents carried by one marked point: usual psi `u`, modified psi `m`,
/// and the pulled-back hyperplane class `c`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Insertion {
    pub u: u32,
    pub m: u32,
    pub c: u32,
}

impl Insertion {
    pub const fn new(u: u32, m: u32, c: u32) -> Self {
        Self { u, m, c }
    }

    /// A pure incidence insertion `tau_0(c)`.
    pub const fn eta(c: u32) -> Self {
        Self { u: 0, m: 0, c }
    }

    pub const fn codim(&self) -> u32 {
        self.u + self.m + self.c
    }
}

impl fmt::Display for Insertion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut fields = Vec::new();
        if self.u > 0 {
            fields.push(format!("u={}", self.u));
        }
        if self.m > 0 {
            fields.push(format!("m={}", self.m));
        }
        if self.c > 0 || fields.is_empty() {
            fields.push(format!("c={}", self.c));
        }
        write!(f, "tau[{}]", fields.join(","))
    }
}

/// The bracket `<prod tau_{u_i}^{m_i}(c_i)>_d` on `M_{0,n}(P^r, d)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Correlator {
    r: u32,
    d: u32,
    insertions: Vec<Insertion>,
}

impl Correlator {
    /// Validates the stability and definability constraints.
    pub fn new(r: u32, d: u32, insertions: Vec<Insertion>) -> Result<Self> {
        if r == 0 {
            return Err(Error::InvalidCorrelator("target dimension r must be at least 1".into()));
        }
        if insertions.is_empty() {
            return Err(Error::InvalidCorrelator("at least one mark is required".into()));
        }
        if d == 0 && insertions.len() < 3 {
            return Err(Error::InvalidCorrelator(format!(
                "degree 0 needs at least 3 marks, got {}",
                insertions.len()
            )));
        }
        if d == 0 && insertions.iter().any(|i| i.m > 0) {
            return Err(Error::ModifiedPsiInDegreeZero);
        }
        Ok(Self { r, d, insertions })
    }

    /// Skips validation; recursion steps only produce stable correlators.
    pub(crate) fn from_parts(r: u32, d: u32, insertions: Vec<Insertion>) -> Self {
        debug_assert!(r >= 1);
        debug_assert!(d > 0 || insertions.len() >= 3);
        debug_assert!(d > 0 || insertions.iter().all(|i| i.m == 0));
        Self { r, d, insertions }
    }

    pub fn r(&self) -> u32 {
        self.r
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn insertions(&self) -> &[Insertion] {
        &self.insertions
    }

    pub fn n(&self) -> usize {
        self.insertions.len()
    }

    pub fn into_insertions(self) -> Vec<Insertion> {
        self.insertions
    }

    /// Same correlator with insertions in canonical (sorted) order.
    pub fn sorted(&self) -> Correlator {
        let mut insertions = self.insertions.clone();
        insertions.sort_unstable();
        Correlator { r: self.r, d: self.d, insertions }
    }

    pub fn has_modified_psi(&self) -> bool {
        self.insertions.iter().any(|i| i.m > 0)
    }

    /// True when some `c` exceeds `r`, which kills the integrand.
    pub fn eta_overflow(&self) -> bool {
        self.insertions.iter().any(|i| i.c > self.r)
    }

    pub fn dimension(&self) -> i64 {
        dimension_unchecked(self.r, self.d, self.n())
    }

    pub fn codimension(&self) -> i64 {
        codimension(self)
    }

    pub fn is_top(&self) -> bool {
        is_top(self)
    }

    pub fn key(&self) -> CanonicalKey {
        canonical_key(self)
    }
}

impl fmt::Display for Correlator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<")?;
        for (i, ins) in self.insertions.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{ins}")?;
        }
        write!(f, ">_{{r={},d={}}}", self.r, self.d)
    }
}

/// Permutation-invariant identity of a correlator: `r`, `d` and the sorted
/// insertion triples, each number big-endian so byte order is numeric order.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CanonicalKey(Box<[u8]>);

impl CanonicalKey {
    pub fn from_parts(r: u32, d: u32, insertions: &[Insertion]) -> Self {
        let mut sorted = insertions.to_vec();
        sorted.sort_unstable();
        let mut bytes = Vec::with_capacity(8 + 12 * sorted.len());
        bytes.extend_from_slice(&r.to_be_bytes());
        bytes.extend_from_slice(&d.to_be_bytes());
        for ins in &sorted {
            bytes.extend_from_slice(&ins.u.to_be_bytes());
            bytes.extend_from_slice(&ins.m.to_be_bytes());
            bytes.extend_from_slice(&ins.c.to_be_bytes());
        }
        Self(bytes.into_boxed_slice())
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    /// Recovers `(r, d, sorted insertions)`.
    pub fn decode(&self) -> (u32, u32, Vec<Insertion>) {
        let word = |i: usize| u32::from_be_bytes(self.0[4 * i..4 * i + 4].try_into().unwrap());
        let n = (self.0.len() - 8) / 12;
        let insertions = (0..n)
            .map(|k| Insertion::new(word(2 + 3 * k), word(3 + 3 * k), word(4 + 3 * k)))
            .collect();
        (word(0), word(1), insertions)
    }
}

impl fmt::Debug for CanonicalKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (r, d, ins) = self.decode();
        write!(f, "CanonicalKey(r={r}, d={d}, {ins:?})")
    }
}

/// `dim M_{0,n}(P^r, d) = rd + r + d - 3 + n`.
///
/// `n = 0` is accepted for positive degree (the unmarked space).
pub fn dimension(r: u32, d: u32, n: usize) -> Result<i64> {
    if r == 0 {
        return Err(Error::InvalidCorrelator("target dimension r must be at least 1".into()));
    }
    if d == 0 && n < 3 {
        return Err(Error::InvalidCorrelator(format!("degree 0 needs at least 3 marks, got {n}")));
    }
    Ok(dimension_unchecked(r, d, n))
}

pub(crate) fn dimension_unchecked(r: u32, d: u32, n: usize) -> i64 {
    let (r, d) = (r as i64, d as i64);
    r * d + r + d - 3 + n as i64
}

pub fn codimension(corr: &Correlator) -> i64 {
    corr.insertions.iter().map(|i| i.codim() as i64).sum()
}

pub fn is_top(corr: &Correlator) -> bool {
    codimension(corr) == corr.dimension()
}

pub fn canonical_key(corr: &Correlator) -> CanonicalKey {
    CanonicalKey::from_parts(corr.r, corr.d, &corr.insertions)
}

static FACTORIALS: OnceLock<RwLock<Vec<BigInt>>> = OnceLock::new();

/// `n!`, memoized up to the largest `n` requested so far.
pub fn factorial(n: usize) -> BigInt {
    let table = FACTORIALS.get_or_init(|| RwLock::new(vec![BigInt::from(1)]));
    if let Some(v) = table.read().unwrap().get(n) {
        return v.clone();
    }
    let mut table = table.write().unwrap();
    while table.len() <= n {
        let k = table.len();
        let next = &table[k - 1] * BigInt::from(k);
        table.push(next);
    }
    table[n].clone()
}

/// `int psi_1^{u_1} ... psi_n^{u_n}` over `M_{0,n}`: the multinomial
/// `(n-3)! / prod u_i!` when `sum u_i = n - 3`, else 0.
pub fn km_integral(us: &[u32]) -> Result<ExactRational> {
    let n = us.len();
    if n < 3 {
        return Err(Error::InvalidSpace { n });
    }
    let total: u64 = us.iter().map(|&u| u as u64).sum();
    if total != (n - 3) as u64 {
        return Ok(ExactRational::zero());
    }
    let den = us.iter().fold(BigInt::from(1), |acc, &u| acc * factorial(u as usize));
    Ok(ExactRational::new(factorial(n - 3), den))
}

/// Value on `M_{0,n}(P^r, 0) = M_{0,n} x P^r`.
pub fn degree_zero_value(corr: &Correlator) -> Result<ExactRational> {
    if corr.d != 0 {
        return Err(Error::InvalidReduction(format!(
            "degree_zero_value needs d = 0, got d = {}",
            corr.d
        )));
    }
    if corr.n() < 3 {
        return Err(Error::InvalidSpace { n: corr.n() });
    }
    if corr.has_modified_psi() {
        return Err(Error::ModifiedPsiInDegreeZero);
    }
    let eta: u64 = corr.insertions.iter().map(|i| i.c as u64).sum();
    if eta != corr.r as u64 {
        return Ok(ExactRational::zero());
    }
    let us: Vec<u32> = corr.insertions.iter().map(|i| i.u).collect();
    km_integral(&us)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn corr(r: u32, d: u32, ins: &[(u32, u32, u32)]) -> Correlator {
        Correlator::new(r, d, ins.iter().map(|&(u, m, c)| Insertion::new(u, m, c)).collect()).unwrap()
    }

    #[test]
    fn dimension_examples() {
        assert_eq!(dimension(2, 3, 0).unwrap(), 8);
        assert_eq!(dimension(3, 3, 0).unwrap(), 12);
        assert_eq!(dimension(2, 0, 3).unwrap(), 2);
        assert!(dimension(0, 1, 1).is_err());
        assert!(dimension(2, 0, 2).is_err());
    }

    #[test]
    fn codimension_and_top() {
        let six_points = corr(3, 3, &[(0, 0, 3); 6]);
        assert_eq!(codimension(&six_points), 18);
        assert!(is_top(&six_points));
        assert_eq!(codimension(&corr(2, 1, &[(0, 1, 2), (1, 0, 0)])), 4);
        assert_eq!(codimension(&corr(2, 1, &[(0, 0, 0)])), 0);
        assert!(is_top(&corr(2, 1, &[(0, 0, 2), (0, 0, 2)])));
        assert!(!is_top(&corr(2, 1, &[(0, 0, 2)])));
    }

    #[test]
    fn key_examples() {
        let a = corr(3, 1, &[(1, 0, 2), (0, 0, 3)]);
        let b = corr(3, 1, &[(0, 0, 3), (1, 0, 2)]);
        assert_eq!(a.key(), b.key());
        assert_ne!(a.key(), corr(3, 2, &[(1, 0, 2), (0, 0, 3)]).key());
        assert_ne!(corr(2, 1, &[(1, 0, 0)]).key(), corr(2, 1, &[(0, 1, 0)]).key());
        let (r, d, ins) = a.key().decode();
        assert_eq!((r, d), (3, 1));
        assert_eq!(ins, vec![Insertion::new(0, 0, 3), Insertion::new(1, 0, 2)]);
    }

    #[test]
    fn invariants_rejected() {
        assert!(Correlator::new(2, 1, vec![]).is_err());
        assert!(Correlator::new(2, 0, vec![Insertion::eta(1); 2]).is_err());
        assert_eq!(
            Correlator::new(2, 0, vec![Insertion::new(0, 1, 0); 3]),
            Err(Error::ModifiedPsiInDegreeZero)
        );
    }

    #[test]
    fn km_examples() {
        assert_eq!(km_integral(&[0, 0, 0]).unwrap(), ExactRational::one());
        // A-side factor with n_A = 3: one extra tau_0 slot.
        assert_eq!(km_integral(&[1, 0, 0, 0]).unwrap(), ExactRational::one());
        assert_eq!(km_integral(&[1, 1, 0, 0, 0]).unwrap(), ExactRational::from(2));
        assert!(km_integral(&[2, 0, 0, 0]).unwrap().is_zero());
        assert_eq!(km_integral(&[0, 0]), Err(Error::InvalidSpace { n: 2 }));
    }

    #[test]
    fn degree_zero_examples() {
        assert_eq!(degree_zero_value(&corr(2, 0, &[(1, 0, 1), (0, 0, 1), (0, 0, 0), (0, 0, 0)])).unwrap(), 1.into());
        assert_eq!(degree_zero_value(&corr(2, 0, &[(0, 0, 2), (0, 0, 0), (0, 0, 0)])).unwrap(), 1.into());
        assert!(degree_zero_value(&corr(2, 0, &[(0, 0, 1); 3])).unwrap().is_zero());
        assert!(degree_zero_value(&corr(2, 1, &[(0, 0, 2); 2])).is_err());
    }

    /// Independent route: the string equation applied repeatedly, bottoming
    /// out at `<tau_0^3> = 1` on `M_{0,3}`.
    fn string_equation_oracle(us: &mut Vec<u32>) -> u64 {
        let n = us.len();
        if us.iter().map(|&u| u as usize).sum::<usize>() != n - 3 {
            return 0;
        }
        if n == 3 {
            return 1;
        }
        // some u_i must vanish since sum u = n - 3 < n
        let zero = us.iter().position(|&u| u == 0).unwrap();
        let removed = us.remove(zero);
        let mut total = 0;
        for j in 0..us.len() {
            if us[j] > 0 {
                us[j] -= 1;
                total += string_equation_oracle(us);
                us[j] += 1;
            }
        }
        us.insert(zero, removed);
        total
    }

    proptest! {
        #[test]
        fn key_is_permutation_invariant(
            ins in prop::collection::vec((0u32..4, 0u32..3, 0u32..4), 1..8),
            seed in any::<u64>(),
        ) {
            let insertions: Vec<Insertion> = ins.iter().map(|&(u, m, c)| Insertion::new(u, m, c)).collect();
            let mut shuffled = insertions.clone();
            let mut s = seed;
            for i in (1..shuffled.len()).rev() {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                shuffled.swap(i, (s >> 33) as usize % (i + 1));
            }
            let a = Correlator::new(3, 2, insertions).unwrap();
            let b = Correlator::new(3, 2, shuffled).unwrap();
            prop_assert_eq!(a.key(), b.key());
        }

        #[test]
        fn dimension_grows_with_marks(r in 1u32..6, d in 0u32..6, n in 3usize..12) {
            prop_assert_eq!(dimension(r, d, n + 1).unwrap(), dimension(r, d, n).unwrap() + 1);
        }

        #[test]
        fn km_is_a_nonnegative_integer(us in prop::collection::vec(0u32..5, 3..9)) {
            let v = km_integral(&us).unwrap();
            prop_assert!(!v.is_negative());
            prop_assert!(v.is_integer());
            let sum: usize = us.iter().map(|&u| u as usize).sum();
            prop_assert_eq!(v.is_zero(), sum != us.len() - 3);
        }

        #[test]
        fn degree_zero_matches_string_equation(
            us in prop::collection::vec(0u32..4, 3..=6),
            cs in prop::collection::vec(0u32..3, 6),
        ) {
            let n = us.len();
            let ins: Vec<Insertion> = (0..n).map(|i| Insertion::new(us[i], 0, cs[i])).collect();
            let c = Correlator::new(2, 0, ins).unwrap();
            let eta: u32 = cs[..n].iter().sum();
            let expected = if eta == 2 { string_equation_oracle(&mut us.clone()) } else { 0 };
            prop_assert_eq!(degree_zero_value(&c).unwrap(), ExactRational::from(expected as i64));
        }
    }
}
