//! Numerical checks of the order properties behind equilibrium existence:
//! weak single crossing of `V` in (bid, type), weak quasi-supermodularity of
//! `V` in the bid, supermodularity of `Q3`, and the pointwise `H - D` case
//! analysis of the both-win probability.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};
use std::io::Write;

use rayon::prelude::*;

use crate::distribution::{induced_bid_distribution, BidDistribution, TypeGrid};
use crate::error::PropertyError;
use crate::interim::{InterimTable, TypeValues};
use crate::model::{q_both, BidGrid, BidPair, Quarters, UtilitySpec};
use crate::scalar::Scalar;
use crate::solver::format_real;
use crate::strategy::random_monotone;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Property {
    /// Weak single crossing.
    Wsc,
    /// Weak quasi-supermodularity.
    Wqs,
    /// Supermodularity of the both-win probability.
    IneqW,
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Property::Wsc => "WSC",
            Property::Wqs => "WQS",
            Property::IneqW => "IneqW",
        })
    }
}

/// A failed implication, with everything needed to replay it.
///
/// * `Wsc`: `bids = [b, b']` with `b' >= b`, `types = [x, x']` with
///   `x' >= x`; `lhs = V(b', x')`, `rhs = V(b, x')`.
/// * `Wqs`: `bids = [b, b', b meet b', b join b']`, `types = [x]`;
///   `lhs = V(b join b', x)`, `rhs = V(b', x)`.
/// * `IneqW`: `bids = [(h,h), (h,l), (l,h), (l,l)]`, no types;
///   `lhs` is the cross difference of `Q3`, `rhs = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct ViolationReport<T> {
    pub property: Property,
    pub bids: Vec<BidPair>,
    pub types: Vec<usize>,
    pub strategy_seed: Option<u64>,
    pub lhs: T,
    pub rhs: T,
}

impl<T: Scalar> ViolationReport<T> {
    /// Recomputes `(lhs, rhs)` from scratch.
    pub fn replay(&self, mu: &BidDistribution<T>, grid: &TypeGrid<T>, spec: &UtilitySpec<T>) -> (T, T) {
        let table = InterimTable::new(mu);
        let v = |b: BidPair, k: usize| table.utility(b, &TypeValues::new(spec, grid.point(k)));
        match self.property {
            Property::Wsc => (v(self.bids[1], self.types[1]), v(self.bids[0], self.types[1])),
            Property::Wqs => (v(self.bids[3], self.types[0]), v(self.bids[1], self.types[0])),
            Property::IneqW => (cross_difference(&table, &self.bids), T::zero()),
        }
    }
}

fn cross_difference<T: Scalar>(table: &InterimTable<T>, corners: &[BidPair]) -> T {
    let q = |k: usize| table.q3(corners[k]).clone();
    (q(0) - q(1)) - (q(2) - q(3))
}

/// `V(b, x)` for every type and bid pair: `rows[type][pair_index]`.
fn utility_rows<T: Scalar>(table: &InterimTable<T>, grid: &TypeGrid<T>, spec: &UtilitySpec<T>) -> Vec<Vec<T>> {
    grid.points()
        .iter()
        .map(|x| table.utilities(&TypeValues::new(spec, x)))
        .collect()
}

/// Comparable pairs `(lo, hi)` of grid types with `hi >= lo`, `hi != lo`.
fn comparable_types<T: Scalar>(grid: &TypeGrid<T>) -> Vec<(usize, usize)> {
    let n = grid.len();
    let mut pairs = Vec::new();
    for lo in 0..n {
        for hi in 0..n {
            if lo != hi && grid.point(hi).dominates(grid.point(lo)) {
                pairs.push((lo, hi));
            }
        }
    }
    pairs
}

/// Every `(b, b', x, x')` with `b' >= b`, `x' >= x` where `V(b', x) >= V(b, x)`
/// but `V(b', x') < V(b, x')`, both up to tolerance.
pub fn check_wsc<T: Scalar>(
    spec: &UtilitySpec<T>,
    mu: &BidDistribution<T>,
    grid: &TypeGrid<T>,
    bids: &BidGrid,
) -> Vec<ViolationReport<T>> {
    let table = InterimTable::new(mu);
    let rows = utility_rows(&table, grid, spec);
    let type_pairs = comparable_types(grid);
    let tol = T::tolerance();
    let neg_tol = T::zero() - tol.clone();
    let mut out = Vec::new();
    let mut diff = vec![T::zero(); grid.len()];
    for lo in bids.pairs() {
        for hi in bids.pairs().filter(|b| b.dominates(&lo) && *b != lo) {
            let (il, ih) = (bids.pair_index(lo), bids.pair_index(hi));
            for (k, row) in rows.iter().enumerate() {
                diff[k] = row[ih].clone() - row[il].clone();
            }
            for &(x, x_up) in &type_pairs {
                if diff[x] >= neg_tol && diff[x_up] < neg_tol {
                    out.push(ViolationReport {
                        property: Property::Wsc,
                        bids: vec![lo, hi],
                        types: vec![x, x_up],
                        strategy_seed: None,
                        lhs: rows[x_up][ih].clone(),
                        rhs: rows[x_up][il].clone(),
                    });
                }
            }
        }
    }
    out
}

/// Every `(b, b', x)` where `V(b, x) >= V(b meet b', x)` but
/// `V(b join b', x) < V(b', x)`, both up to tolerance.
pub fn check_wqs<T: Scalar>(
    spec: &UtilitySpec<T>,
    mu: &BidDistribution<T>,
    grid: &TypeGrid<T>,
    bids: &BidGrid,
) -> Vec<ViolationReport<T>> {
    let table = InterimTable::new(mu);
    let rows = utility_rows(&table, grid, spec);
    let tol = T::tolerance();
    let mut out = Vec::new();
    for b in bids.pairs() {
        for b2 in bids.pairs() {
            let (meet, join) = (b.meet(&b2), b.join(&b2));
            let idx = [b, b2, meet, join].map(|p| bids.pair_index(p));
            for (k, row) in rows.iter().enumerate() {
                let premise = row[idx[0]] >= row[idx[2]].clone() - tol.clone();
                if premise && row[idx[3]] < row[idx[1]].clone() - tol.clone() {
                    out.push(ViolationReport {
                        property: Property::Wqs,
                        bids: vec![b, b2, meet, join],
                        types: vec![k],
                        strategy_seed: None,
                        lhs: row[idx[3]].clone(),
                        rhs: row[idx[1]].clone(),
                    });
                }
            }
        }
    }
    out
}

/// Every quadruple `b1h > b1l`, `b2h > b2l` where
/// `[Q3(h,h) - Q3(h,l)] - [Q3(l,h) - Q3(l,l)] < 0` (up to tolerance).
pub fn check_ineq_w<T: Scalar>(mu: &BidDistribution<T>, bids: &BidGrid) -> Vec<ViolationReport<T>> {
    let table = InterimTable::new(mu);
    let neg_tol = T::zero() - T::tolerance();
    let mut out = Vec::new();
    let top = bids.top();
    for b1l in 0..=top {
        for b1h in b1l + 1..=top {
            for b2l in 0..=top {
                for b2h in b2l + 1..=top {
                    let corners = vec![
                        BidPair::new(b1h, b2h),
                        BidPair::new(b1h, b2l),
                        BidPair::new(b1l, b2h),
                        BidPair::new(b1l, b2l),
                    ];
                    let lhs = cross_difference(&table, &corners);
                    if lhs < neg_tol {
                        out.push(ViolationReport {
                            property: Property::IneqW,
                            bids: corners,
                            types: Vec::new(),
                            strategy_seed: None,
                            lhs,
                            rhs: T::zero(),
                        });
                    }
                }
            }
        }
    }
    out
}

/// One opponent bid `beta` against the four corners of a bid rectangle.
///
/// `main_category` places `beta.b2` relative to `b2h > b2l`:
/// 1: `b2h > beta > b2l`, 2: `beta = b2l`, 3: `beta < b2l`, 4: `beta = b2h`,
/// 5: `beta > b2h`. Sub-cases place `beta.b1` relative to one first-object
/// bid: 1 below it, 2 equal, 3 above.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct HDRecord {
    pub main_category: u8,
    /// Sub-case of `b1h`.
    pub h_sub: u8,
    /// Sub-case of `b1l`.
    pub d_sub: u8,
    /// `q(b1h, b2h) - q(b1h, b2l)`.
    pub h: Quarters,
    /// `q(b1l, b2h) - q(b1l, b2l)`.
    pub d: Quarters,
}

impl HDRecord {
    pub fn h_minus_d(&self) -> Quarters {
        self.h - self.d
    }
}

fn main_category(b2h: u32, b2l: u32, beta2: u32) -> u8 {
    if beta2 > b2h {
        5
    } else if beta2 == b2h {
        4
    } else if beta2 > b2l {
        1
    } else if beta2 == b2l {
        2
    } else {
        3
    }
}

fn sub_case(bid: u32, beta1: u32) -> u8 {
    match beta1.cmp(&bid) {
        std::cmp::Ordering::Greater => 1,
        std::cmp::Ordering::Equal => 2,
        std::cmp::Ordering::Less => 3,
    }
}

pub fn hd_table(b1h: u32, b1l: u32, b2h: u32, b2l: u32, beta: BidPair) -> Result<HDRecord, PropertyError> {
    if b1h <= b1l || b2h <= b2l {
        return Err(PropertyError::NotOrdered { b1h, b1l, b2h, b2l });
    }
    let q = |b1, b2| q_both(BidPair::new(b1, b2), beta);
    Ok(HDRecord {
        main_category: main_category(b2h, b2l, beta.b2),
        h_sub: sub_case(b1h, beta.b1),
        d_sub: sub_case(b1l, beta.b1),
        h: q(b1h, b2h) - q(b1h, b2l),
        d: q(b1l, b2h) - q(b1l, b2l),
    })
}

/// Closed-form values of `H` (and `D`) per main category and sub-case.
pub const CASE_VALUES: [[Quarters; 3]; 5] = [
    [Quarters(0), Quarters(2), Quarters(4)],
    [Quarters(0), Quarters(1), Quarters(2)],
    [Quarters(0), Quarters(0), Quarters(0)],
    [Quarters(0), Quarters(1), Quarters(2)],
    [Quarters(0), Quarters(0), Quarters(0)],
];

/// Observations collected in one `(category, d_sub, h_sub)` cell.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct HdCell {
    pub count: usize,
    pub h_minus_d: BTreeSet<Quarters>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HdEnumeration {
    pub records: usize,
    /// Quintuples `(b1h, b1l, b2h, b2l, beta)` with `H - D < 0`.
    pub negatives: Vec<(u32, u32, u32, u32, BidPair)>,
    /// Keyed by `(category, d_sub, h_sub)`.
    pub cells: BTreeMap<(u8, u8, u8), HdCell>,
    /// Observed `H` values per `(category, h_sub)`.
    pub h_values: BTreeMap<(u8, u8), BTreeSet<Quarters>>,
    /// Observed `D` values per `(category, d_sub)`.
    pub d_values: BTreeMap<(u8, u8), BTreeSet<Quarters>>,
}

/// Cells that can occur: `b1l` at or below `beta.b1` whenever `b1h` is, and
/// never both equal to it.
pub fn cell_defined(d_sub: u8, h_sub: u8) -> bool {
    h_sub > d_sub || (h_sub == d_sub && h_sub != 2)
}

/// Runs [`hd_table`] on every admissible quintuple of the grid.
pub fn hd_full_enumeration(bids: &BidGrid) -> HdEnumeration {
    let top = bids.top();
    let mut out = HdEnumeration {
        records: 0,
        negatives: Vec::new(),
        cells: BTreeMap::new(),
        h_values: BTreeMap::new(),
        d_values: BTreeMap::new(),
    };
    for b1l in 0..=top {
        for b1h in b1l + 1..=top {
            for b2l in 0..=top {
                for b2h in b2l + 1..=top {
                    for beta in bids.pairs() {
                        let r = hd_table(b1h, b1l, b2h, b2l, beta).expect("ordered by construction");
                        out.records += 1;
                        if r.h_minus_d().0 < 0 {
                            out.negatives.push((b1h, b1l, b2h, b2l, beta));
                        }
                        let cell = out.cells.entry((r.main_category, r.d_sub, r.h_sub)).or_default();
                        cell.count += 1;
                        cell.h_minus_d.insert(r.h_minus_d());
                        out.h_values.entry((r.main_category, r.h_sub)).or_default().insert(r.h);
                        out.d_values.entry((r.main_category, r.d_sub)).or_default().insert(r.d);
                    }
                }
            }
        }
    }
    out
}

impl HdEnumeration {
    /// The single `H` value seen for `(category, sub)`, if exactly one was seen.
    pub fn h_value(&self, category: u8, sub: u8) -> Option<Quarters> {
        single(self.h_values.get(&(category, sub))?)
    }

    pub fn d_value(&self, category: u8, sub: u8) -> Option<Quarters> {
        single(self.d_values.get(&(category, sub))?)
    }

    /// True when every category's `H` and `D` sub-case values are single
    /// valued, coincide, and equal [`CASE_VALUES`].
    pub fn matches_case_values(&self) -> bool {
        (1..=5u8).all(|c| {
            (1..=3u8).all(|s| {
                let expected = Some(CASE_VALUES[c as usize - 1][s as usize - 1]);
                self.h_value(c, s) == expected && self.d_value(c, s) == expected
            })
        })
    }

    /// True when exactly the defined cells occur.
    pub fn undefined_cells_absent(&self) -> bool {
        (1..=5u8).all(|c| {
            (1..=3u8).all(|d| (1..=3u8).all(|h| self.cells.contains_key(&(c, d, h)) == cell_defined(d, h)))
        })
    }

    pub fn write_csv<W: Write>(&self, out: W) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["category", "d_case", "h_case", "h", "d", "h_minus_d", "count"])?;
        for c in 1..=5u8 {
            for d in 1..=3u8 {
                for h in 1..=3u8 {
                    let fmt_opt = |q: Option<Quarters>| q.map_or("undefined".to_string(), |q| q.to_string());
                    match self.cells.get(&(c, d, h)) {
                        Some(cell) => {
                            let diffs: Vec<String> = cell.h_minus_d.iter().map(|q| q.to_string()).collect();
                            w.write_record([
                                c.to_string(),
                                d.to_string(),
                                h.to_string(),
                                fmt_opt(self.h_value(c, h)),
                                fmt_opt(self.d_value(c, d)),
                                diffs.join("|"),
                                cell.count.to_string(),
                            ])?;
                        }
                        None => w.write_record([
                            c.to_string(),
                            d.to_string(),
                            h.to_string(),
                            "undefined".into(),
                            "undefined".into(),
                            "undefined".into(),
                            "0".into(),
                        ])?,
                    }
                }
            }
        }
        w.flush()
    }

    /// One 3x3 block per category: rows are `D` sub-cases, columns `H`
    /// sub-cases, entries `H - D`; `⊘` marks cells that cannot occur.
    pub fn render_text(&self) -> String {
        let mut s = String::new();
        for c in 1..=5u8 {
            let _ = writeln!(s, "category {c}");
            let _ = writeln!(s, "{:>8}{:>8}{:>8}{:>8}", "", "H1", "H2", "H3");
            for d in 1..=3u8 {
                let _ = write!(s, "{:>8}", format!("D{d}"));
                for h in 1..=3u8 {
                    let entry = match self.cells.get(&(c, d, h)) {
                        Some(cell) => cell.h_minus_d.iter().map(|q| q.to_string()).collect::<Vec<_>>().join("|"),
                        None => "⊘".to_string(),
                    };
                    let _ = write!(s, "{entry:>8}");
                }
                s.push('\n');
            }
        }
        s
    }
}

fn single(set: &BTreeSet<Quarters>) -> Option<Quarters> {
    (set.len() == 1).then(|| *set.iter().next().expect("one element"))
}

/// Counts for one property over a strategy sweep.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct PropertyTally {
    pub strategies: usize,
    pub failing_strategies: usize,
    pub violations: usize,
}

impl PropertyTally {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

#[derive(Clone, Debug)]
pub struct SweepReport<T> {
    pub base_seed: u64,
    pub samples: usize,
    pub wsc: PropertyTally,
    pub wqs: PropertyTally,
    pub ineq_w: PropertyTally,
    /// Sorted by seed, then property.
    pub violations: Vec<ViolationReport<T>>,
}

impl<T: Scalar> SweepReport<T> {
    pub fn passed(&self) -> bool {
        self.wsc.passed() && self.wqs.passed() && self.ineq_w.passed()
    }

    pub fn write_counts_csv<W: Write>(&self, out: W) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["property", "strategies", "failing_strategies", "violations", "base_seed", "status"])?;
        for (p, t) in [(Property::Wsc, self.wsc), (Property::Wqs, self.wqs), (Property::IneqW, self.ineq_w)] {
            w.write_record([
                p.to_string(),
                t.strategies.to_string(),
                t.failing_strategies.to_string(),
                t.violations.to_string(),
                self.base_seed.to_string(),
                if t.passed() { "pass".into() } else { "fail".into() },
            ])?;
        }
        w.flush()
    }

    pub fn write_witnesses_csv<W: Write>(&self, out: W) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["property", "seed", "bids", "types", "lhs", "rhs"])?;
        for v in &self.violations {
            let bids: Vec<String> = v.bids.iter().map(|b| format!("{}:{}", b.b1, b.b2)).collect();
            let types: Vec<String> = v.types.iter().map(|t| t.to_string()).collect();
            w.write_record([
                v.property.to_string(),
                v.strategy_seed.map_or(String::new(), |s| s.to_string()),
                bids.join(" "),
                types.join(" "),
                format_real(v.lhs.to_real()),
                format_real(v.rhs.to_real()),
            ])?;
        }
        w.flush()
    }
}

/// Which checks a sweep runs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SweepChecks {
    pub wsc: bool,
    pub wqs: bool,
    pub ineq_w: bool,
}

impl SweepChecks {
    pub const ALL: SweepChecks = SweepChecks {
        wsc: true,
        wqs: true,
        ineq_w: true,
    };
}

/// Runs the selected checks against `samples` random monotone opponent
/// strategies with seeds `base_seed, base_seed + 1, ...`.
pub fn lemma_sweep<T: Scalar>(
    spec: &UtilitySpec<T>,
    grid: &TypeGrid<T>,
    bids: &BidGrid,
    samples: usize,
    base_seed: u64,
    checks: SweepChecks,
) -> SweepReport<T> {
    let per_seed: Vec<[Vec<ViolationReport<T>>; 3]> = (0..samples as u64)
        .into_par_iter()
        .map(|k| {
            let seed = base_seed + k;
            let s = random_monotone(grid, *bids, seed);
            let mu = induced_bid_distribution(&s, grid).expect("strategy built on this grid");
            let mut found = [Vec::new(), Vec::new(), Vec::new()];
            if checks.wsc {
                found[0] = check_wsc(spec, &mu, grid, bids);
            }
            if checks.wqs {
                found[1] = check_wqs(spec, &mu, grid, bids);
            }
            if checks.ineq_w {
                found[2] = check_ineq_w(&mu, bids);
            }
            for v in found.iter_mut().flatten() {
                v.strategy_seed = Some(seed);
            }
            found
        })
        .collect();

    let tally = |which: usize, enabled: bool| PropertyTally {
        strategies: if enabled { samples } else { 0 },
        failing_strategies: per_seed.iter().filter(|f| !f[which].is_empty()).count(),
        violations: per_seed.iter().map(|f| f[which].len()).sum(),
    };
    let wsc = tally(0, checks.wsc);
    let wqs = tally(1, checks.wqs);
    let ineq_w = tally(2, checks.ineq_w);
    let violations = per_seed.into_iter().flat_map(|f| f.into_iter().flatten()).collect();
    SweepReport {
        base_seed,
        samples,
        wsc,
        wqs,
        ineq_w,
        violations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Quarters as Qt;

    #[test]
    fn hd_category_examples() {
        // category 1: b2h = 3 > beta2 = 2 > b2l = 1
        let cat1: Vec<HDRecord> = [3, 2, 1]
            .iter()
            .map(|&beta1| hd_table(2, 1, 3, 1, BidPair::new(beta1, 2)).unwrap())
            .collect();
        assert!(cat1.iter().all(|r| r.main_category == 1));
        // beta1 = 3: both first bids below; beta1 = 2: b1h tied; beta1 = 1: b1l tied
        assert_eq!((cat1[0].h, cat1[0].d), (Qt(0), Qt(0)));
        assert_eq!((cat1[1].h, cat1[1].d), (Qt(2), Qt(0)));
        assert_eq!((cat1[2].h, cat1[2].d), (Qt(4), Qt(2)));
        let above = hd_table(2, 1, 3, 1, BidPair::new(0, 2)).unwrap();
        assert_eq!((above.h, above.d), (Qt(4), Qt(4)));

        // category 2: beta2 = b2l
        let r = hd_table(2, 1, 3, 1, BidPair::new(1, 1)).unwrap();
        assert_eq!(r.main_category, 2);
        assert_eq!((r.h_sub, r.d_sub), (3, 2));
        assert_eq!((r.h, r.d), (Qt(2), Qt(1)));

        // category 5: beta2 above both second bids
        for beta1 in 0..4 {
            let r = hd_table(2, 1, 3, 1, BidPair::new(beta1, 4)).unwrap();
            assert_eq!(r.main_category, 5);
            assert_eq!((r.h, r.d), (Qt(0), Qt(0)));
        }
        assert!(hd_table(1, 1, 3, 1, BidPair::ZERO).is_err());
        assert!(hd_table(2, 1, 1, 1, BidPair::ZERO).is_err());
    }

    #[test]
    fn full_enumeration_on_small_grid() {
        let e = hd_full_enumeration(&BidGrid::new(2, 2).unwrap());
        assert!(e.negatives.is_empty());
        assert!(e.matches_case_values());
        assert!(e.undefined_cells_absent());
        let text = e.render_text();
        assert!(text.contains("category 5"));
        assert!(text.contains('⊘'));
    }

    #[test]
    fn point_mass_satisfies_supermodularity() {
        let bids = BidGrid::new(4, 8).unwrap();
        for beta in bids.pairs() {
            let mu = BidDistribution::<f64>::point_mass(bids, beta).unwrap();
            assert!(check_ineq_w(&mu, &bids).is_empty(), "beta {beta}");
        }
    }
}
