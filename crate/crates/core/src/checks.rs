//! Randomized identity suites: associativity, the puncture, dilaton and
//! divisor equations, recursion path independence, permutation invariance,
//! the divisor lift round trip, integrality of characteristic numbers and
//! cross-table consistency.
//!
//! Every random case is checked against a second evaluation route: the
//! equations' right-hand sides are assembled here, independently of the
//! term producers in the engine modules, and path-independence checks
//! evaluate with [`Strategy::Randomized`] on a fresh cache.

use num_bigint::BigInt;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::charnum::{CharnumQuery, ConditionSpec, TableName};
use crate::correlator::{dimension_unchecked, Correlator, Insertion};
use crate::descendant::{divisor_lift, trr_reduce};
use crate::engine::{Engine, Strategy};
use crate::exec;
use crate::gw::{wdvv_terms, GwQuery, Side};
use crate::rational::ExactRational;
use crate::twisted::twisted_reduce;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckLevel {
    /// A few dozen cases per suite and only the table cells the
    /// cross-table identities touch.
    Quick,
    /// 200 cases per suite and the complete tables.
    Full,
}

impl CheckLevel {
    pub fn cases(self) -> usize {
        match self {
            CheckLevel::Quick => 30,
            CheckLevel::Full => 200,
        }
    }
}

impl std::str::FromStr for CheckLevel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "quick" => Ok(CheckLevel::Quick),
            "full" => Ok(CheckLevel::Full),
            other => Err(format!("unknown check level {other:?}; expected quick or full")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub cases: usize,
    pub failures: Vec<String>,
}

impl CheckOutcome {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

#[derive(Debug, Clone)]
pub struct CheckReport {
    pub outcomes: Vec<CheckOutcome>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.outcomes.iter().all(CheckOutcome::passed)
    }
}

pub const SUITES: [&str; 12] = [
    "wdvv",
    "puncture",
    "dilaton",
    "divisor",
    "twisted-equations",
    "trr-choice",
    "twisted-pivot",
    "permutation",
    "divisor-round-trip",
    "charnum-integrality",
    "cross-table",
    "plane-curves",
];

/// Runs every suite; `engine` supplies the shared reference cache.
pub fn run_checks(engine: &Engine, level: CheckLevel, seed: u64) -> CheckReport {
    let cases = level.cases();
    let outcomes = exec::map_collect(engine.exec, &SUITES, |&name| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ fxhash(name));
        run_suite(name, engine, &mut rng, cases, level)
    });
    CheckReport { outcomes }
}

pub fn run_suite(name: &'static str, engine: &Engine, rng: &mut ChaCha8Rng, cases: usize, level: CheckLevel) -> CheckOutcome {
    let mut failures = Vec::new();
    let mut ran = 0;
    match name {
        "cross-table" => {
            ran = cross_table(engine, level, &mut failures);
        }
        "plane-curves" => {
            ran = plane_curves(engine, &mut failures);
        }
        _ => {
            for _ in 0..cases {
                if let Some(msg) = run_case(name, engine, rng) {
                    failures.push(msg);
                }
                ran += 1;
            }
        }
    }
    CheckOutcome { name, cases: ran, failures }
}

fn fxhash(s: &str) -> u64 {
    s.bytes().fold(0xcbf29ce484222325u64, |h, b| (h ^ b as u64).wrapping_mul(0x100000001b3))
}

fn run_case(name: &str, engine: &Engine, rng: &mut ChaCha8Rng) -> Option<String> {
    match name {
        "wdvv" => wdvv_case(engine, rng),
        "puncture" => puncture_case(engine, rng, false),
        "dilaton" => dilaton_case(engine, rng, false),
        "divisor" => divisor_case(engine, rng, false),
        "twisted-equations" => match rng.gen_range(0..3) {
            0 => puncture_case(engine, rng, true),
            1 => dilaton_case(engine, rng, true),
            _ => divisor_case(engine, rng, true),
        },
        "trr-choice" => trr_case(engine, rng),
        "twisted-pivot" => twisted_pivot_case(engine, rng),
        "permutation" => permutation_case(engine, rng),
        "divisor-round-trip" => round_trip_case(engine, rng),
        "charnum-integrality" => integrality_case(engine, rng),
        other => Some(format!("unknown suite {other}")),
    }
}

/// Distributes `total` units of codimension over `n` marks, keeping
/// `c <= r`; `m` only when `twisted`.
pub fn random_insertions(rng: &mut impl Rng, r: u32, n: usize, total: i64, twisted: bool) -> Vec<Insertion> {
    let mut ins = vec![Insertion::default(); n];
    for _ in 0..total.max(0) {
        let i = rng.gen_range(0..n);
        let kind = rng.gen_range(0..if twisted { 3 } else { 2 });
        match kind {
            0 if ins[i].c < r => ins[i].c += 1,
            2 => ins[i].m += 1,
            _ => ins[i].u += 1,
        }
    }
    ins
}

fn random_space(rng: &mut impl Rng, min_n: usize, max_n: usize, twisted: bool) -> (u32, u32, usize) {
    let r = rng.gen_range(1..=3);
    let d = if twisted { rng.gen_range(1..=2) } else { rng.gen_range(0..=2) };
    let lo = if d == 0 { min_n.max(3) } else { min_n };
    let n = rng.gen_range(lo..=max_n.max(lo));
    (r, d, n)
}

fn eval(engine: &Engine, r: u32, d: u32, ins: Vec<Insertion>) -> ExactRational {
    let c = Correlator::new(r, d, ins).expect("random correlators are stable");
    engine.eval_twisted(&c).expect("valid correlator")
}

fn mismatch(what: &str, r: u32, d: u32, ins: &[Insertion], lhs: &ExactRational, rhs: &ExactRational) -> Option<String> {
    if lhs == rhs {
        return None;
    }
    let c = Correlator::from_parts(r, d, ins.to_vec());
    Some(format!("{what} fails at {c}: {lhs} != {rhs}"))
}

fn fresh_randomized(engine: &Engine, rng: &mut impl Rng) -> Engine {
    Engine::new().exec(engine.exec).strategy(Strategy::Randomized { seed: rng.gen() })
}

fn wdvv_case(engine: &Engine, rng: &mut ChaCha8Rng) -> Option<String> {
    let r = rng.gen_range(1..=3);
    let d = rng.gen_range(0..=2);
    let n = rng.gen_range(4..=6);
    // the relation lives on a space one dimension above the integrand
    let total = dimension_unchecked(r, d, n) - 1;
    if total > (n as i64) * r as i64 {
        return wdvv_case(engine, rng);
    }
    let mut codims = vec![0u32; n];
    let mut placed = 0;
    while placed < total {
        let i = rng.gen_range(0..n);
        if codims[i] < r {
            codims[i] += 1;
            placed += 1;
        }
    }
    let q = GwQuery::new(r, d, codims);
    let mut marks: Vec<usize> = (0..n).collect();
    marks.shuffle(rng);
    let dist = [marks[0], marks[1], marks[2], marks[3]];
    let mut sides = [ExactRational::zero(), ExactRational::zero()];
    for (t, a, b) in wdvv_terms(&q, dist).expect("valid marks") {
        let v = engine.gw_invariant(&a).unwrap() * engine.gw_invariant(&b).unwrap();
        sides[(t.side == Side::Right) as usize] += v;
    }
    (sides[0] != sides[1]).then(|| format!("WDVV fails for {q:?} with marks {dist:?}: {} != {}", sides[0], sides[1]))
}

fn puncture_case(engine: &Engine, rng: &mut ChaCha8Rng, twisted: bool) -> Option<String> {
    let (r, d, n) = random_space(rng, 1, 5, twisted);
    let x = random_insertions(rng, r, n, dimension_unchecked(r, d, n) + 1, twisted);
    let mut lhs_ins = x.clone();
    lhs_ins.push(Insertion::new(0, 0, 0));
    let lhs = eval(&fresh_randomized(engine, rng), r, d, lhs_ins.clone());
    let mut rhs = ExactRational::zero();
    for j in 0..n {
        if x[j].u > 0 {
            let mut t = x.clone();
            t[j].u -= 1;
            rhs += eval(engine, r, d, t);
        }
    }
    mismatch("puncture", r, d, &lhs_ins, &lhs, &rhs)
}

fn dilaton_case(engine: &Engine, rng: &mut ChaCha8Rng, twisted: bool) -> Option<String> {
    let (r, d, n) = random_space(rng, 1, 5, twisted);
    let x = random_insertions(rng, r, n, dimension_unchecked(r, d, n), twisted);
    let mut lhs_ins = x.clone();
    lhs_ins.push(Insertion::new(1, 0, 0));
    let lhs = eval(&fresh_randomized(engine, rng), r, d, lhs_ins.clone());
    let rhs = ExactRational::from(n as i64 - 2) * eval(engine, r, d, x);
    mismatch("dilaton", r, d, &lhs_ins, &lhs, &rhs)
}

fn divisor_case(engine: &Engine, rng: &mut ChaCha8Rng, twisted: bool) -> Option<String> {
    let (r, d, n) = random_space(rng, 1, 5, twisted);
    let x = random_insertions(rng, r, n, dimension_unchecked(r, d, n), twisted);
    let mut lhs_ins = x.clone();
    lhs_ins.push(Insertion::new(0, 0, 1));
    let lhs = eval(&fresh_randomized(engine, rng), r, d, lhs_ins.clone());
    let mut rhs = ExactRational::from(d as i64) * eval(engine, r, d, x.clone());
    for j in 0..n {
        if x[j].u > 0 {
            let mut t = x.clone();
            t[j].u -= 1;
            t[j].c += 1;
            rhs += eval(engine, r, d, t);
        }
    }
    mismatch("divisor", r, d, &lhs_ins, &lhs, &rhs)
}

fn descendant_with_psi(rng: &mut ChaCha8Rng, min_n: usize, twisted: bool) -> (u32, u32, Vec<Insertion>) {
    loop {
        let (r, d, n) = random_space(rng, min_n, 6, twisted);
        let d = if twisted { d } else { d.max(1) };
        let ins = random_insertions(rng, r, n, dimension_unchecked(r, d, n), twisted);
        let wanted = if twisted { ins.iter().any(|i| i.m > 0) } else { ins.iter().any(|i| i.u > 0) };
        if wanted {
            return (r, d, ins);
        }
    }
}

fn trr_case(engine: &Engine, rng: &mut ChaCha8Rng) -> Option<String> {
    let (r, d, ins) = descendant_with_psi(rng, 3, false);
    let n = ins.len();
    let c = Correlator::new(r, d, ins.clone()).unwrap();
    let pivots: Vec<usize> = (0..n).filter(|&i| ins[i].u > 0).collect();
    let pivot = *pivots.choose(rng).unwrap();
    let mut others: Vec<usize> = (0..n).filter(|&i| i != pivot).collect();
    others.shuffle(rng);
    let via_trr: ExactRational = trr_reduce(&c, pivot, (others[0], others[1]))
        .unwrap()
        .iter()
        .map(|t| &t.coeff * &(engine.eval_descendant(&t.left).unwrap() * engine.eval_descendant(&t.right).unwrap()))
        .sum();
    let reference = engine.eval_descendant(&c).unwrap();
    let randomized = fresh_randomized(engine, rng).eval_descendant(&c).unwrap();
    mismatch("TRR choice", r, d, &ins, &via_trr, &reference).or_else(|| mismatch("randomized path", r, d, &ins, &randomized, &reference))
}

fn twisted_pivot_case(engine: &Engine, rng: &mut ChaCha8Rng) -> Option<String> {
    let (r, d, ins) = descendant_with_psi(rng, 2, true);
    let c = Correlator::new(r, d, ins.clone()).unwrap();
    let reference = engine.eval_twisted(&c).unwrap();
    for pivot in (0..ins.len()).filter(|&i| ins[i].m > 0) {
        let v: ExactRational = twisted_reduce(&c, pivot)
            .unwrap()
            .iter()
            .map(|(k, t)| k * &engine.eval_twisted(t).unwrap())
            .sum();
        if let Some(msg) = mismatch("twisted pivot", r, d, &ins, &v, &reference) {
            return Some(msg);
        }
    }
    let randomized = fresh_randomized(engine, rng).eval_twisted(&c).unwrap();
    mismatch("randomized twisted path", r, d, &ins, &randomized, &reference)
}

fn permutation_case(engine: &Engine, rng: &mut ChaCha8Rng) -> Option<String> {
    let twisted = rng.gen_bool(0.5);
    let (r, d, n) = random_space(rng, 1, 6, twisted);
    let ins = random_insertions(rng, r, n, dimension_unchecked(r, d, n), twisted);
    let mut shuffled = ins.clone();
    shuffled.shuffle(rng);
    let a = eval(engine, r, d, ins.clone());
    let b = eval(&fresh_randomized(engine, rng), r, d, shuffled);
    mismatch("permutation", r, d, &ins, &a, &b)
}

fn round_trip_case(engine: &Engine, rng: &mut ChaCha8Rng) -> Option<String> {
    let (r, d, n) = random_space(rng, 1, 5, false);
    let d = d.max(1);
    let ins = random_insertions(rng, r, n, dimension_unchecked(r, d, n), false);
    let c = Correlator::new(r, d, ins.clone()).unwrap();
    let lifted: ExactRational = divisor_lift(&c)
        .unwrap()
        .iter()
        .map(|(k, t)| k * &engine.eval_descendant(t).unwrap())
        .sum();
    mismatch("divisor lift", r, d, &ins, &lifted, &engine.eval_descendant(&c).unwrap())
}

fn random_charnum(rng: &mut ChaCha8Rng) -> CharnumQuery {
    loop {
        let r = rng.gen_range(2..=3u32);
        let d = rng.gen_range(1..=2u32);
        let mut remaining = (r * d + r + d - 3) as i64;
        let mut conditions = Vec::new();
        while remaining > 0 && conditions.len() < 6 {
            let cond = if d >= 2 && rng.gen_bool(0.5) {
                ConditionSpec::tangency(rng.gen_range(0..r))
            } else {
                ConditionSpec::incidence(rng.gen_range(1..=r))
            };
            if cond.net_codim() <= remaining {
                remaining -= cond.net_codim();
                conditions.push(cond);
            }
        }
        if remaining == 0 && (d > 0 || conditions.len() >= 3) {
            if let Ok(q) = CharnumQuery::new(r, d, conditions) {
                return q;
            }
        }
    }
}

fn integrality_case(engine: &Engine, rng: &mut ChaCha8Rng) -> Option<String> {
    let q = random_charnum(rng);
    match engine.characteristic_number(&q) {
        Ok(_) => None,
        Err(e) => Some(format!("{q:?}: {e}")),
    }
}

fn cell(engine: &Engine, table: TableName, row: u32, col: u32) -> BigInt {
    engine.characteristic_number(&table.query(row, col).unwrap()).unwrap()
}

fn cross_table(engine: &Engine, level: CheckLevel, failures: &mut Vec<String>) -> usize {
    let mut checked = 0;
    let mut expect_eq = |what: String, a: BigInt, b: BigInt| {
        checked += 1;
        if a != b {
            failures.push(format!("{what}: {a} != {b}"));
        }
    };
    match level {
        CheckLevel::Full => {
            let pp = engine.table(TableName::PlanesPoints).unwrap();
            let pl = engine.table(TableName::PlanesLines).unwrap();
            let tm = engine.table(TableName::TangencyMix).unwrap();
            for e in 0..=4 {
                expect_eq(format!("planes-points(c=0,e={e}) vs tangency-mix(d=0,e={e})"), pp.get(0, e).unwrap().clone(), tm.get(0, e).unwrap().clone());
            }
            expect_eq("planes-points(0,0) vs planes-lines(12,0)".into(), pp.get(0, 0).unwrap().clone(), pl.get(12, 0).unwrap().clone());
            expect_eq("planes-lines(12,0)".into(), pl.get(12, 0).unwrap().clone(), BigInt::from(56960));
            // b-column of tangency-mix with e = 0 is the d-row of planes-lines with a = 0
            for d in 0..=6u32 {
                let b = 12 - 2 * d;
                expect_eq(format!("tangency-mix(d={d},e=0) vs planes-lines(b={b},d={d})"), tm.get(d, 0).unwrap().clone(), pl.get(b, d).unwrap().clone());
            }
        }
        CheckLevel::Quick => {
            for e in 2..=4 {
                expect_eq(
                    format!("planes-points(c=0,e={e}) vs tangency-mix(d=0,e={e})"),
                    cell(engine, TableName::PlanesPoints, 0, e),
                    cell(engine, TableName::TangencyMix, 0, e),
                );
            }
            expect_eq(
                "tangency-mix(d=6,e=0) vs planes-lines(b=0,d=6)".into(),
                cell(engine, TableName::TangencyMix, 6, 0),
                cell(engine, TableName::PlanesLines, 0, 6),
            );
        }
    }
    checked
}

fn plane_curves(engine: &Engine, failures: &mut Vec<String>) -> usize {
    let mut checked = 0;
    for d in 1..=4u32 {
        let points = 3 * d - 1;
        let q = CharnumQuery::plane_curves(d, points, 0, 0).unwrap();
        let n = engine.characteristic_number(&q).unwrap();
        let gw = engine.gw_invariant(&GwQuery::new(2, d, vec![2; points as usize])).unwrap();
        checked += 1;
        if ExactRational::from(n.clone()) != gw {
            failures.push(format!("N_{d}({points},0) = {n} but the GW invariant is {gw}"));
        }
    }
    checked
}
