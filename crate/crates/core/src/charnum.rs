//! Characteristic numbers of rational curves in `P^r`.
//!
//! Each condition occupies one mark. Incidence to a codimension-`k` linear
//! space is `eta^k`. Tangency to a hyperplane `H` at a specified linear
//! subspace of codimension `k` in `H` is `Phi . eta^k`, with
//! `Phi = eta (eta + psibar)`, so it expands into the two insertions
//! `eta^{k+2}` and `eta^{k+1} psibar`. A query with `t` tangencies is the sum
//! of up to `2^t` twisted descendants.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;

use crate::correlator::{Correlator, Insertion};
use crate::engine::Engine;
use crate::error::{Error, Result};
use crate::exec;
use crate::rational::ExactRational;
use crate::split::binomial;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ConditionSpec {
    pub tangent: bool,
    pub k: u32,
}

impl ConditionSpec {
    /// Incidence to a linear subspace of codimension `k`.
    pub const fn incidence(k: u32) -> Self {
        Self { tangent: false, k }
    }

    /// Tangency to a hyperplane at a subspace of codimension `k` inside it.
    pub const fn tangency(k: u32) -> Self {
        Self { tangent: true, k }
    }

    /// Codimension of the class on the marked space.
    pub fn class_codim(&self) -> u32 {
        if self.tangent {
            self.k + 2
        } else {
            self.k
        }
    }

    /// Codimension on the unmarked space (the mark itself adds one dimension).
    pub fn net_codim(&self) -> i64 {
        self.class_codim() as i64 - 1
    }

    fn validate(&self, r: u32) -> Result<()> {
        if self.tangent && self.k >= r {
            return Err(Error::InvalidCondition(format!(
                "tangency needs k <= r - 1 = {}, got k = {}",
                r as i64 - 1,
                self.k
            )));
        }
        if !self.tangent && !(1..=r).contains(&self.k) {
            return Err(Error::InvalidCondition(format!("incidence needs 1 <= k <= r = {r}, got k = {}", self.k)));
        }
        Ok(())
    }
}

impl fmt::Display for ConditionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.tangent {
            write!(f, "tangent(k={})", self.k)
        } else {
            write!(f, "incidence(k={})", self.k)
        }
    }
}

/// `Phi . eta^k` as a sum of insertions: `eta^{k+2}` (dropped when `k + 2 > r`)
/// and `eta^{k+1} psibar`.
pub fn phi_expand(k: u32, r: u32) -> Result<Vec<Insertion>> {
    if k >= r {
        return Err(Error::InvalidCondition(format!("tangency locus is empty for k = {k} >= r = {r}")));
    }
    let mut out = Vec::with_capacity(2);
    if k + 2 <= r {
        out.push(Insertion::new(0, 0, k + 2));
    }
    out.push(Insertion::new(0, 1, k + 1));
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CharnumQuery {
    r: u32,
    d: u32,
    conditions: Vec<ConditionSpec>,
}

impl CharnumQuery {
    /// Checks each condition and the dimension gate
    /// `sum net codim = rd + r + d - 3`.
    pub fn new(r: u32, d: u32, conditions: Vec<ConditionSpec>) -> Result<Self> {
        if r == 0 {
            return Err(Error::InvalidCondition("target dimension r must be at least 1".into()));
        }
        if conditions.is_empty() {
            return Err(Error::InvalidCondition("at least one condition is required".into()));
        }
        for c in &conditions {
            c.validate(r)?;
        }
        if d < 2 && conditions.iter().any(|c| c.tangent) {
            return Err(Error::InvalidCondition(format!("tangency conditions need degree d >= 2, got d = {d}")));
        }
        if d == 0 && conditions.len() < 3 {
            return Err(Error::InvalidCondition("degree 0 needs at least 3 conditions".into()));
        }
        let required = r as i64 * d as i64 + r as i64 + d as i64 - 3;
        let provided: i64 = conditions.iter().map(ConditionSpec::net_codim).sum();
        if required != provided {
            return Err(Error::NotFiniteCount { required, provided });
        }
        Ok(Self { r, d, conditions })
    }

    /// `N_d(a, b, c, dd, e)` in `P^3`: `a` lines, `b` tangent planes, `c`
    /// points, `dd` planes tangent at a given line, `e` planes tangent at a
    /// given point.
    pub fn space_curves(d: u32, a: u32, b: u32, c: u32, dd: u32, e: u32) -> Result<Self> {
        let mut conditions = Vec::new();
        conditions.extend(std::iter::repeat_n(ConditionSpec::incidence(2), a as usize));
        conditions.extend(std::iter::repeat_n(ConditionSpec::tangency(0), b as usize));
        conditions.extend(std::iter::repeat_n(ConditionSpec::incidence(3), c as usize));
        conditions.extend(std::iter::repeat_n(ConditionSpec::tangency(1), dd as usize));
        conditions.extend(std::iter::repeat_n(ConditionSpec::tangency(2), e as usize));
        Self::new(3, d, conditions)
    }

    /// `N_d(a, b, c)` in `P^2`: `a` points, `b` tangent lines, `c` lines
    /// tangent at a specified point.
    pub fn plane_curves(d: u32, a: u32, b: u32, c: u32) -> Result<Self> {
        let mut conditions = Vec::new();
        conditions.extend(std::iter::repeat_n(ConditionSpec::incidence(2), a as usize));
        conditions.extend(std::iter::repeat_n(ConditionSpec::tangency(0), b as usize));
        conditions.extend(std::iter::repeat_n(ConditionSpec::tangency(1), c as usize));
        Self::new(2, d, conditions)
    }

    pub fn r(&self) -> u32 {
        self.r
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn conditions(&self) -> &[ConditionSpec] {
        &self.conditions
    }

    /// Whether the count is known to be enumerative: no tangencies, or
    /// tangencies with `d >= 2` and `r >= 2`. Otherwise the result is only an
    /// intersection number.
    pub fn is_enumerative(&self) -> bool {
        !self.conditions.iter().any(|c| c.tangent) || (self.d >= 2 && self.r >= 2)
    }
}

/// All correlators whose values add up to the characteristic number.
pub fn build_correlators(q: &CharnumQuery) -> Result<Vec<Correlator>> {
    let mut partial: Vec<Vec<Insertion>> = vec![Vec::with_capacity(q.conditions.len())];
    for cond in &q.conditions {
        let choices = if cond.tangent { phi_expand(cond.k, q.r)? } else { vec![Insertion::eta(cond.k)] };
        partial = partial
            .into_iter()
            .flat_map(|prefix| {
                choices.iter().map(move |&ins| {
                    let mut next = prefix.clone();
                    next.push(ins);
                    next
                })
            })
            .collect();
    }
    partial.into_iter().map(|ins| Correlator::new(q.r, q.d, ins)).collect()
}

/// Distinct expansion terms with multiplicities; identical conditions are
/// expanded together, so `t` equal tangencies give `t + 1` terms, not `2^t`.
pub fn weighted_correlators(q: &CharnumQuery) -> Result<Vec<(Correlator, u64)>> {
    let mut groups: BTreeMap<(bool, u32), u32> = BTreeMap::new();
    for cond in &q.conditions {
        *groups.entry((cond.tangent, cond.k)).or_default() += 1;
    }
    let mut partial: Vec<(Vec<Insertion>, u64)> = vec![(Vec::with_capacity(q.conditions.len()), 1)];
    for ((tangent, k), t) in groups {
        let choices = if tangent { phi_expand(k, q.r)? } else { vec![Insertion::eta(k)] };
        let mut next = Vec::new();
        for (prefix, w) in &partial {
            if choices.len() == 1 {
                let mut ins = prefix.clone();
                ins.extend(std::iter::repeat_n(choices[0], t as usize));
                next.push((ins, *w));
                continue;
            }
            for j in 0..=t {
                let mut ins = prefix.clone();
                ins.extend(std::iter::repeat_n(choices[0], (t - j) as usize));
                ins.extend(std::iter::repeat_n(choices[1], j as usize));
                next.push((ins, w * binomial(t, j)));
            }
        }
        partial = next;
    }
    partial
        .into_iter()
        .map(|(ins, w)| Correlator::new(q.r, q.d, ins).map(|c| (c, w)))
        .collect()
}

impl Engine {
    pub fn characteristic_number(&self, q: &CharnumQuery) -> Result<BigInt> {
        let weighted = weighted_correlators(q)?;
        let values = exec::map_collect(self.exec, &weighted, |(c, count)| {
            self.eval_twisted(c).map(|v| v * ExactRational::from(BigInt::from(*count)))
        });
        let total = values.into_iter().sum::<Result<ExactRational>>()?;
        let n = total
            .to_integer()
            .ok_or_else(|| Error::Inconsistent(format!("characteristic number {total} is not an integer")))?;
        if n < BigInt::from(0) {
            return Err(Error::Inconsistent(format!("characteristic number {n} is negative")));
        }
        Ok(n)
    }

    /// Computes every cell of a table; cells run concurrently on a shared cache.
    pub fn table(&self, name: TableName) -> Result<Grid> {
        let cells = name.cells();
        let values = exec::map_collect(self.exec, &cells, |&(row, col)| {
            name.query(row, col).and_then(|q| self.characteristic_number(&q))
        });
        let mut rows: Vec<GridRow> = Vec::new();
        for (&(row, _), value) in cells.iter().zip(values) {
            let value = value?;
            match rows.last_mut() {
                Some(last) if last.index == row => last.cells.push(value),
                _ => rows.push(GridRow { index: row, cells: vec![value] }),
            }
        }
        Ok(Grid { name, rows })
    }
}

/// The three twisted-cubic tables in `P^3`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TableName {
    /// `N_3(0, b, c, 0, e)`, rows `c`, columns `e`, `b = 12 - 3e - 2c`.
    PlanesPoints,
    /// `N_3(a, b, 0, d, 0)`, rows `b`, columns `d`, `a = 12 - 2d - b`.
    PlanesLines,
    /// `N_3(0, b, 0, d, e)`, rows `d`, columns `e`, `b = 12 - 3e - 2d`.
    TangencyMix,
}

impl TableName {
    pub const ALL: [TableName; 3] = [TableName::PlanesPoints, TableName::PlanesLines, TableName::TangencyMix];

    pub fn as_str(&self) -> &'static str {
        match self {
            TableName::PlanesPoints => "planes-points",
            TableName::PlanesLines => "planes-lines",
            TableName::TangencyMix => "tangency-mix",
        }
    }

    /// Row and column variable names.
    pub fn axes(&self) -> (&'static str, &'static str) {
        match self {
            TableName::PlanesPoints => ("c", "e"),
            TableName::PlanesLines => ("b", "d"),
            TableName::TangencyMix => ("d", "e"),
        }
    }

    fn shape(&self) -> (u32, u32) {
        match self {
            TableName::PlanesPoints => (6, 4),
            TableName::PlanesLines => (12, 6),
            TableName::TangencyMix => (6, 4),
        }
    }

    /// The free condition count, or `None` outside the triangle.
    fn remainder(&self, row: u32, col: u32) -> Option<u32> {
        let rem = match self {
            TableName::PlanesPoints | TableName::TangencyMix => 12 - 3 * col as i64 - 2 * row as i64,
            TableName::PlanesLines => 12 - 2 * col as i64 - row as i64,
        };
        (rem >= 0).then_some(rem as u32)
    }

    /// `(row, col)` of every entry, row-major.
    pub fn cells(&self) -> Vec<(u32, u32)> {
        let (rows, cols) = self.shape();
        (0..=rows)
            .flat_map(|row| (0..=cols).map(move |col| (row, col)))
            .filter(|&(row, col)| self.remainder(row, col).is_some())
            .collect()
    }

    pub fn query(&self, row: u32, col: u32) -> Result<CharnumQuery> {
        let rem = self
            .remainder(row, col)
            .ok_or_else(|| Error::InvalidCondition(format!("cell ({row}, {col}) is outside table {}", self.as_str())))?;
        match self {
            TableName::PlanesPoints => CharnumQuery::space_curves(3, 0, rem, row, 0, col),
            TableName::PlanesLines => CharnumQuery::space_curves(3, rem, row, 0, col, 0),
            TableName::TangencyMix => CharnumQuery::space_curves(3, 0, rem, 0, row, col),
        }
    }
}

impl fmt::Display for TableName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TableName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TableName::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| Error::InvalidCondition(format!("unknown table {s:?}; expected planes-points, planes-lines or tangency-mix")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GridRow {
    pub index: u32,
    pub cells: Vec<BigInt>,
}

/// A triangular table; row `i` holds columns `0..cells.len()`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grid {
    pub name: TableName,
    pub rows: Vec<GridRow>,
}

impl Grid {
    pub fn get(&self, row: u32, col: u32) -> Option<&BigInt> {
        self.rows.iter().find(|r| r.index == row)?.cells.get(col as usize)
    }

    pub fn len(&self) -> usize {
        self.rows.iter().map(|r| r.cells.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn columns(&self) -> usize {
        self.rows.iter().map(|r| r.cells.len()).max().unwrap_or(0)
    }

    /// Aligned text: a header of column labels, then one line per row.
    pub fn to_plain(&self) -> String {
        let (row_var, col_var) = self.name.axes();
        let ncols = self.columns();
        let mut labels: Vec<Vec<String>> = vec![std::iter::once(String::new())
            .chain((0..ncols).map(|c| format!("{col_var}={c}")))
            .collect()];
        for row in &self.rows {
            labels.push(
                std::iter::once(format!("{row_var}={}", row.index))
                    .chain(row.cells.iter().map(|v| v.to_string()))
                    .collect(),
            );
        }
        let widths: Vec<usize> = (0..=ncols)
            .map(|c| labels.iter().filter_map(|l| l.get(c)).map(String::len).max().unwrap_or(0))
            .collect();
        let mut out = String::new();
        for line in labels {
            let cells: Vec<String> = line
                .iter()
                .enumerate()
                .map(|(i, s)| if i == 0 { format!("{s:<w$}", w = widths[0]) } else { format!("{s:>w$}", w = widths[i]) })
                .collect();
            out.push_str(cells.join("  ").trim_end());
            out.push('\n');
        }
        out
    }

    pub fn to_tsv(&self) -> String {
        let (row_var, col_var) = self.name.axes();
        let mut out = format!("{row_var}\\{col_var}");
        for c in 0..self.columns() {
            out.push_str(&format!("\t{c}"));
        }
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.index.to_string());
            for v in &row.cells {
                out.push_str(&format!("\t{v}"));
            }
            out.push('\n');
        }
        out
    }
}
