//! Certificate-game values.
//!
//! The non-signaling value is an explicit polynomial-size LP over the
//! non-signaling polytope (joint output distributions with input-independent
//! marginals). The public-coin value is computed by cutting planes on its
//! dual: the hard-distribution LP over input pairs, with a separation oracle
//! that searches deterministic strategy pairs. Private-coin values are
//! reported as certified sandwiches; single-bit variants restrict the game to
//! input pairs at Hamming distance 1.

use crate::boolfn::{format_bits, BoolFn, Word};
use crate::linprog::{
    rat, solve_with_cuts, ArithMode, CutRow, LinearProgram, LpStatus, Relation, SeparationOracle,
    Sense, DEFAULT_ROW_CAP,
};
use crate::measures::{self, CertVariant};
use crate::report::{rational_str, Value};
use crate::rng::Stream;
use crate::{Error, Result};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::collections::BTreeMap;

// ---------------------------------------------------------------------------
// Report types
// ---------------------------------------------------------------------------

/// A deterministic strategy pair: an index per 0-input and per 1-input
/// (positions 1-based).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeterministicPair {
    pub a: BTreeMap<Word, usize>,
    pub b: BTreeMap<Word, usize>,
}

/// Non-signaling strategy: for every pair (x, y) a joint distribution over
/// output pairs (i, j), with marginals independent of the partner's input.
#[derive(Clone, Debug)]
pub struct NsStrategy {
    pub n: usize,
    pub zeros: Vec<Word>,
    pub ones: Vec<Word>,
    /// probs[q][i * n + j] = p(i+1, j+1 | x, y) where q = xi * |ones| + yi.
    pub probs: Vec<Vec<BigRational>>,
}

impl NsStrategy {
    pub fn prob(&self, xi: usize, yi: usize, i: usize, j: usize) -> &BigRational {
        &self.probs[xi * self.ones.len() + yi][i * self.n + j]
    }

    /// Maximum violation of the normalization and non-signaling constraints,
    /// exactly (zero means the strategy is non-signaling).
    pub fn ns_violation(&self) -> BigRational {
        let n = self.n;
        let mut worst = BigRational::zero();
        let mut bump = |v: BigRational| {
            let v = v.abs();
            if v > worst {
                worst = v;
            }
        };
        for q in 0..self.probs.len() {
            let total: BigRational = self.probs[q].iter().sum();
            bump(total - BigRational::one());
            for p in self.probs[q].iter() {
                if p.is_negative() {
                    bump(p.clone());
                }
            }
        }
        // Alice marginals must not depend on y.
        for xi in 0..self.zeros.len() {
            for i in 0..n {
                let reference: BigRational = (0..n).map(|j| self.prob(xi, 0, i, j).clone()).sum();
                for yi in 1..self.ones.len() {
                    let m: BigRational = (0..n).map(|j| self.prob(xi, yi, i, j).clone()).sum();
                    bump(m - reference.clone());
                }
            }
        }
        // Bob marginals must not depend on x.
        for yi in 0..self.ones.len() {
            for j in 0..n {
                let reference: BigRational = (0..n).map(|i| self.prob(0, yi, i, j).clone()).sum();
                for xi in 1..self.zeros.len() {
                    let m: BigRational = (0..n).map(|i| self.prob(xi, yi, i, j).clone()).sum();
                    bump(m - reference.clone());
                }
            }
        }
        worst
    }
}

/// `true` iff the strategy satisfies the non-signaling constraints exactly
/// (rational data), together with the largest violation found.
pub fn ns_check(p: &NsStrategy) -> (bool, BigRational) {
    let v = p.ns_violation();
    (v.is_zero(), v)
}

#[derive(Clone, Debug, Default)]
pub struct Certificates {
    /// Hard distribution over (x, y) pairs.
    pub mu: Option<Vec<(Word, Word, BigRational)>>,
    /// Game value (winning probability) certified by `mu`.
    pub delta: Option<BigRational>,
    /// Support of the optimal public-coin strategy.
    pub strategy_pairs: Option<Vec<(BigRational, DeterministicPair)>>,
    pub ns_strategy: Option<NsStrategy>,
    /// Per-input output distributions of a private-coin strategy.
    pub private_strategy: Option<BTreeMap<Word, Vec<BigRational>>>,
    pub notes: BTreeMap<String, serde_json::Value>,
}

#[derive(Clone, Debug)]
pub struct GameValueReport {
    pub game: String,
    pub lower: Value,
    pub upper: Value,
    pub exact: bool,
    /// Winning probability omega when the value is exact (value = 1/omega).
    pub omega: Option<Value>,
    pub certificates: Certificates,
    pub flags: Vec<String>,
}

impl GameValueReport {
    pub fn value(&self) -> f64 {
        self.upper.as_f64()
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut obj = serde_json::json!({
            "game": self.game,
            "lower": self.lower.json(),
            "upper": self.upper.json(),
            "exact": self.exact,
        });
        if let Some(o) = &self.omega {
            obj["omega"] = o.json();
        }
        let mut certs = serde_json::Map::new();
        if let Some(mu) = &self.certificates.mu {
            certs.insert(
                "mu".into(),
                serde_json::Value::Object(
                    mu.iter()
                        .filter(|(_, _, w)| !w.is_zero())
                        .map(|(x, y, w)| {
                            (
                                format!("{}|{}", format_bits(*x, self.arity(x, y)), {
                                    format_bits(*y, self.arity(x, y))
                                }),
                                serde_json::json!(rational_str(w)),
                            )
                        })
                        .collect(),
                ),
            );
        }
        if let Some(d) = &self.certificates.delta {
            certs.insert("delta".into(), serde_json::json!(rational_str(d)));
        }
        if let Some(pairs) = &self.certificates.strategy_pairs {
            certs.insert(
                "strategy_pairs".into(),
                serde_json::json!(pairs
                    .iter()
                    .map(|(w, p)| {
                        serde_json::json!({
                            "weight": rational_str(w),
                            "a": p.a.iter().map(|(k, v)| (k.to_string(), *v)).collect::<BTreeMap<_, _>>(),
                            "b": p.b.iter().map(|(k, v)| (k.to_string(), *v)).collect::<BTreeMap<_, _>>(),
                        })
                    })
                    .collect::<Vec<_>>()),
            );
        }
        if self.certificates.ns_strategy.is_some() {
            certs.insert("ns_strategy".into(), serde_json::json!("attached"));
        }
        for (k, v) in self.certificates.notes.iter() {
            certs.insert(k.clone(), v.clone());
        }
        obj["certificates"] = serde_json::Value::Object(certs);
        if !self.flags.is_empty() {
            obj["flags"] = serde_json::json!(self.flags);
        }
        obj
    }

    fn arity(&self, _x: &Word, _y: &Word) -> usize {
        // Bit width for formatting is stored in notes by the producer.
        self.certificates
            .notes
            .get("arity")
            .and_then(|v| v.as_u64())
            .unwrap_or(0) as usize
    }
}

// ---------------------------------------------------------------------------
// Pair structure shared by the game solvers
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub(crate) struct PairSet {
    pub n: usize,
    pub xs: Vec<Word>,
    pub ys: Vec<Word>,
    /// (x index, y index, differing-position mask).
    pub pairs: Vec<(u32, u32, Word)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PairFilter {
    All,
    DistanceOne,
}

pub(crate) fn pair_set(f: &BoolFn, filter: PairFilter) -> Result<PairSet> {
    let n = f.arity();
    let keep = |x: Word, y: Word| match filter {
        PairFilter::All => true,
        PairFilter::DistanceOne => (x ^ y).count_ones() == 1,
    };
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut xi_of = BTreeMap::new();
    let mut yi_of = BTreeMap::new();
    let mut pairs = Vec::new();
    for &x in f.zero_set() {
        for &y in f.one_set() {
            if keep(x, y) {
                let xi = *xi_of.entry(x).or_insert_with(|| {
                    xs.push(x);
                    (xs.len() - 1) as u32
                });
                let yi = *yi_of.entry(y).or_insert_with(|| {
                    ys.push(y);
                    (ys.len() - 1) as u32
                });
                pairs.push((xi, yi, x ^ y));
            }
        }
    }
    if pairs.is_empty() {
        return Err(Error::Invalid(
            "game needs at least one admissible input pair".into(),
        ));
    }
    Ok(PairSet { n, xs, ys, pairs })
}

// ---------------------------------------------------------------------------
// Non-signaling value: the polytope LP
// ---------------------------------------------------------------------------

/// Exact CG^ns: maximize delta subject to the strategy lying in the
/// non-signaling polytope and winning every pair with probability >= delta.
/// CG^ns = 1/delta.
pub fn cg_ns(f: &BoolFn) -> Result<GameValueReport> {
    let n = f.arity();
    let xs = f.zero_set().to_vec();
    let ys = f.one_set().to_vec();
    if xs.is_empty() || ys.is_empty() {
        return Err(Error::Invalid("both value sets must be non-empty".into()));
    }
    let npairs = xs.len() * ys.len();
    let nvars = 1 + npairs * n * n;
    if n * xs.len() * ys.len() * n > 500_000 {
        return Err(Error::CapExceeded(format!(
            "CG^ns LP would need {} variables",
            nvars - 1
        )));
    }
    let pvar = |q: usize, i: usize, j: usize| 1 + q * n * n + i * n + j;
    let mut lp = LinearProgram::new(Sense::Maximize, nvars);
    lp.objective[0] = rat(1);

    // Normalization per pair.
    for q in 0..npairs {
        let mut row = vec![rat(0); nvars];
        for i in 0..n {
            for j in 0..n {
                row[pvar(q, i, j)] = rat(1);
            }
        }
        lp.push_row(row, Relation::Eq, rat(1));
    }
    // Alice marginal independent of y.
    for xi in 0..xs.len() {
        for i in 0..n {
            for yi in 1..ys.len() {
                let mut row = vec![rat(0); nvars];
                for j in 0..n {
                    row[pvar(xi * ys.len() + yi, i, j)] = rat(1);
                    row[pvar(xi * ys.len(), i, j)] -= rat(1);
                }
                lp.push_row(row, Relation::Eq, rat(0));
            }
        }
    }
    // Bob marginal independent of x.
    for yi in 0..ys.len() {
        for j in 0..n {
            for xi in 1..xs.len() {
                let mut row = vec![rat(0); nvars];
                for i in 0..n {
                    row[pvar(xi * ys.len() + yi, i, j)] = rat(1);
                    row[pvar(yi, i, j)] -= rat(1);
                }
                lp.push_row(row, Relation::Eq, rat(0));
            }
        }
    }
    // Winning probability per pair.
    let win_rows_start = lp.rows.len();
    for (q, (&x, &y)) in xs
        .iter()
        .flat_map(|x| ys.iter().map(move |y| (x, y)))
        .enumerate()
    {
        let mut row = vec![rat(0); nvars];
        row[0] = rat(-1);
        let diff = x ^ y;
        for i in 0..n {
            if diff >> (n - 1 - i) & 1 == 1 {
                row[pvar(q, i, i)] = rat(1);
            }
        }
        lp.push_row(row, Relation::Ge, rat(0));
    }

    let sol = lp.solve_rational()?;
    if sol.status != LpStatus::Optimal {
        return Err(Error::Invalid(format!("CG^ns LP status {:?}", sol.status)));
    }
    let delta = sol.objective.clone();
    if delta.is_zero() {
        return Err(Error::Invalid(
            "CG^ns winning probability is zero, which cannot happen for distinct inputs".into(),
        ));
    }
    let value = delta.recip();

    let probs: Vec<Vec<BigRational>> = (0..npairs)
        .map(|q| {
            (0..n * n)
                .map(|ij| sol.primal[1 + q * n * n + ij].clone())
                .collect()
        })
        .collect();
    let ns = NsStrategy { n, zeros: xs.clone(), ones: ys.clone(), probs };
    debug_assert!(ns.ns_violation().is_zero());

    // Dual certificate: the winning-row multipliers form the hard
    // distribution mu (nonpositive under the max/>= sign convention).
    let mut mu = Vec::with_capacity(npairs);
    let mut total = BigRational::zero();
    for (q, (&x, &y)) in xs
        .iter()
        .flat_map(|x| ys.iter().map(move |y| (x, y)))
        .enumerate()
    {
        let w = -sol.dual[win_rows_start + q].clone();
        debug_assert!(!w.is_negative());
        total += &w;
        mu.push((x, y, w));
    }
    debug_assert!(total.is_one(), "winning-row duals sum to {total}");

    let mut certificates = Certificates {
        mu: Some(mu),
        delta: Some(delta.clone()),
        ns_strategy: Some(ns),
        ..Default::default()
    };
    certificates
        .notes
        .insert("arity".into(), serde_json::json!(n));
    Ok(GameValueReport {
        game: "cgns".into(),
        lower: Value::from_rational(value.clone()),
        upper: Value::from_rational(value),
        exact: true,
        omega: Some(Value::from_rational(delta)),
        certificates,
        flags: vec![],
    })
}

// ---------------------------------------------------------------------------
// Public-coin value: cutting planes over the dual
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CgPubMode {
    Exact,
    Interval,
}

/// Strategy metadata recorded per generated cut row.
#[derive(Clone, Debug)]
struct StrategyRow {
    a: Vec<usize>,             // output (0-based) per x index
    b: Vec<usize>,             // output (0-based) per y index
    correct: Vec<u32>,         // pair indices on which the pair is correct
}

struct CgPubOracle<'p> {
    ps: &'p PairSet,
    exhaustive: bool,
    heuristic_starts: u64,
    rows: Vec<StrategyRow>,
    // pairs grouped by y index for fast mass accumulation
    by_y: Vec<Vec<(u32, u32)>>, // per yi: (pair index, xi)
}

impl<'p> CgPubOracle<'p> {
    fn new(ps: &'p PairSet, exhaustive: bool) -> Self {
        let mut by_y = vec![Vec::new(); ps.ys.len()];
        for (q, &(xi, yi, _)) in ps.pairs.iter().enumerate() {
            by_y[yi as usize].push((q as u32, xi));
        }
        CgPubOracle { ps, exhaustive, heuristic_starts: 64, rows: Vec::new(), by_y }
    }

    fn swap_roles(&self) -> bool {
        // Enumerate the smaller side; the game is symmetric in the roles.
        self.ps.xs.len() < self.ps.ys.len()
    }

    /// Given an enumerated-side map, derive the other side greedily against
    /// mu (ties towards the smallest index) and return (a, b, mass).
    fn derive(&self, mu: &[BigRational], map: &[usize], swapped: bool) -> StrategyRow {
        let n = self.ps.n;
        let (n_fixed, n_derived) = if swapped {
            (self.ps.xs.len(), self.ps.ys.len())
        } else {
            (self.ps.ys.len(), self.ps.xs.len())
        };
        debug_assert_eq!(map.len(), n_fixed);
        let mut acc: Vec<Vec<BigRational>> = vec![vec![BigRational::zero(); n]; n_derived];
        for (q, &(xi, yi, diff)) in self.ps.pairs.iter().enumerate() {
            if mu[q].is_zero() {
                continue;
            }
            let (fixed_idx, derived_idx) = if swapped {
                (xi as usize, yi as usize)
            } else {
                (yi as usize, xi as usize)
            };
            let i = map[fixed_idx];
            if diff >> (n - 1 - i) & 1 == 1 {
                acc[derived_idx][i] += &mu[q];
            }
        }
        let derived: Vec<usize> = acc
            .iter()
            .map(|row| {
                let mut best = 0usize;
                for i in 1..n {
                    if row[i] > row[best] {
                        best = i;
                    }
                }
                best
            })
            .collect();
        let (a, b) = if swapped {
            (map.to_vec(), derived)
        } else {
            (derived, map.to_vec())
        };
        let correct: Vec<u32> = self
            .ps
            .pairs
            .iter()
            .enumerate()
            .filter(|(_, &(xi, yi, diff))| {
                let i = a[xi as usize];
                i == b[yi as usize] && diff >> (n - 1 - i) & 1 == 1
            })
            .map(|(q, _)| q as u32)
            .collect();
        StrategyRow { a, b, correct }
    }

    fn mass(&self, mu: &[BigRational], row: &StrategyRow) -> BigRational {
        row.correct.iter().map(|&q| mu[q as usize].clone()).sum()
    }

    /// Exhaustive exact scan for the best strategy against mu.
    fn best_exhaustive(&self, mu: &[BigRational]) -> StrategyRow {
        let swapped = self.swap_roles();
        let n_fixed = if swapped { self.ps.xs.len() } else { self.ps.ys.len() };
        let n = self.ps.n;
        let mut map = vec![0usize; n_fixed];
        let mut best: Option<(BigRational, StrategyRow)> = None;
        loop {
            let row = self.derive(mu, &map, swapped);
            let m = self.mass(mu, &row);
            if best.as_ref().is_none_or(|(bm, _)| &m > bm) {
                best = Some((m, row));
            }
            // odometer
            let mut pos = 0;
            loop {
                if pos == n_fixed {
                    return best.unwrap().1;
                }
                map[pos] += 1;
                if map[pos] < n {
                    break;
                }
                map[pos] = 0;
                pos += 1;
            }
        }
    }

    /// Alternating best-response from seeded random starts.
    fn best_heuristic(&self, mu: &[BigRational]) -> StrategyRow {
        let swapped = self.swap_roles();
        let n_fixed = if swapped { self.ps.xs.len() } else { self.ps.ys.len() };
        let n = self.ps.n;
        let mut best: Option<(BigRational, StrategyRow)> = None;
        for start in 0..self.heuristic_starts {
            let mut stream = Stream::new(crate::rng::key2(0xC69B1, start));
            let mut map: Vec<usize> = (0..n_fixed).map(|_| stream.below(n as u64) as usize).collect();
            let mut current = self.derive(mu, &map, swapped);
            for _ in 0..50 {
                // Best-response on the enumerated side given the derived side:
                // re-derive with roles flipped.
                let other_map: Vec<usize> = if swapped { current.b.clone() } else { current.a.clone() };
                let re = self.derive(mu, &other_map, !swapped);
                let next_map: Vec<usize> = if swapped { re.a.clone() } else { re.b.clone() };
                if next_map == map {
                    break;
                }
                map = next_map;
                current = self.derive(mu, &map, swapped);
            }
            let m = self.mass(mu, &current);
            if best.as_ref().is_none_or(|(bm, _)| &m > bm) {
                best = Some((m, current));
            }
        }
        best.expect("at least one start").1
    }
}

impl<'p> SeparationOracle for CgPubOracle<'p> {
    fn most_violated(&mut self, point: &[BigRational]) -> Option<CutRow> {
        let npairs = self.ps.pairs.len();
        let mu = &point[..npairs];
        let delta = &point[npairs];
        let best = if self.exhaustive {
            self.best_exhaustive(mu)
        } else {
            self.best_heuristic(mu)
        };
        let mass = self.mass(mu, &best);
        if &mass <= delta {
            return None;
        }
        let mut coeffs = vec![rat(0); npairs + 1];
        for &q in best.correct.iter() {
            coeffs[q as usize] = rat(1);
        }
        coeffs[npairs] = rat(-1);
        let violation = &mass - delta;
        self.rows.push(best);
        Some(CutRow { coeffs, rel: Relation::Le, rhs: rat(0), violation })
    }
}

pub(crate) struct CgPubOutcome {
    pub omega: BigRational,
    pub mu: Vec<BigRational>,
    pub mixture: Vec<(BigRational, StrategyRowPublic)>,
    /// Exact worst-pair winning probability of the mixture.
    pub mixture_worst: BigRational,
    pub exhaustive: bool,
    pub converged: bool,
}

pub(crate) struct StrategyRowPublic {
    pub a: Vec<usize>,
    pub b: Vec<usize>,
    pub correct: Vec<u32>,
}

pub(crate) fn cg_pub_core(ps: &PairSet, exhaustive: bool) -> Result<CgPubOutcome> {
    let npairs = ps.pairs.len();
    let mut base = LinearProgram::new(Sense::Minimize, npairs + 1);
    base.objective[npairs] = rat(1);
    base.push_row(
        (0..npairs + 1)
            .map(|j| if j < npairs { rat(1) } else { rat(0) })
            .collect(),
        Relation::Eq,
        rat(1),
    );
    let mut oracle = CgPubOracle::new(ps, exhaustive);
    let res = solve_with_cuts(&base, &mut oracle, DEFAULT_ROW_CAP)?;
    let sol = &res.solution;
    if sol.status != LpStatus::Optimal {
        return Err(Error::Invalid(format!("CG^pub dual LP status {:?}", sol.status)));
    }
    let omega = sol.objective.clone();
    let mu = sol.primal[..npairs].to_vec();
    // Strategy-row duals (skip the normalization row dual at index 0); for a
    // min problem with <= rows the multipliers are nonpositive and their
    // negatives form the optimal mixture over generated strategies.
    let mut mixture = Vec::new();
    for (ri, row) in oracle.rows.iter().enumerate() {
        let w = -sol.dual[1 + ri].clone();
        debug_assert!(!w.is_negative());
        if !w.is_zero() {
            mixture.push((
                w,
                StrategyRowPublic { a: row.a.clone(), b: row.b.clone(), correct: row.correct.clone() },
            ));
        }
    }
    let total: BigRational = mixture.iter().map(|(w, _)| w.clone()).sum();
    debug_assert!(total.is_one(), "mixture weights sum to {total}");
    // Exact worst-pair winning probability of the mixture.
    let mut worst: Option<BigRational> = None;
    for q in 0..npairs {
        let win: BigRational = mixture
            .iter()
            .filter(|(_, r)| r.correct.binary_search(&(q as u32)).is_ok())
            .map(|(w, _)| w.clone())
            .sum();
        if worst.as_ref().is_none_or(|cur| &win < cur) {
            worst = Some(win);
        }
    }
    let mixture_worst = worst.expect("pairs non-empty");
    if exhaustive && res.converged {
        debug_assert_eq!(mixture_worst, omega);
    }
    Ok(CgPubOutcome { omega, mu, mixture, mixture_worst, exhaustive, converged: res.converged })
}

fn exact_mode_allowed(ps: &PairSet) -> bool {
    let min_side = ps.xs.len().min(ps.ys.len()) as f64;
    min_side * (ps.n as f64).log2() <= 20.0 + 1e-9
}

fn pub_report_from_outcome(
    game: &str,
    ps: &PairSet,
    out: CgPubOutcome,
) -> GameValueReport {
    let exact = out.exhaustive && out.converged;
    let lower = Value::from_rational(out.omega.clone().recip());
    let upper = if out.mixture_worst.is_zero() {
        Value::from_f64(f64::INFINITY)
    } else {
        Value::from_rational(out.mixture_worst.clone().recip())
    };
    let mu = out
        .mu
        .iter()
        .enumerate()
        .map(|(q, w)| {
            let (xi, yi, _) = ps.pairs[q];
            (ps.xs[xi as usize], ps.ys[yi as usize], w.clone())
        })
        .collect();
    let strategy_pairs = out
        .mixture
        .iter()
        .map(|(w, r)| {
            let a = ps
                .xs
                .iter()
                .enumerate()
                .map(|(xi, &x)| (x, r.a[xi] + 1))
                .collect();
            let b = ps
                .ys
                .iter()
                .enumerate()
                .map(|(yi, &y)| (y, r.b[yi] + 1))
                .collect();
            (w.clone(), DeterministicPair { a, b })
        })
        .collect();
    let mut certificates = Certificates {
        mu: Some(mu),
        delta: Some(out.omega.clone()),
        strategy_pairs: Some(strategy_pairs),
        ..Default::default()
    };
    certificates.notes.insert("arity".into(), serde_json::json!(ps.n));
    let mut flags = Vec::new();
    if !out.exhaustive {
        flags.push("oracle_heuristic".into());
    }
    if !out.converged {
        flags.push("row_cap_reached".into());
    }
    GameValueReport {
        game: game.into(),
        lower,
        upper,
        exact,
        omega: Some(Value::from_rational(out.omega)),
        certificates,
        flags,
    }
}

/// CG^pub by cutting planes on the hard-distribution dual. Exact mode needs
/// the smaller input side to satisfy min(|X|,|Y|) log2(n) <= 20 (the oracle
/// enumerates that side's maps); interval mode uses alternating best-response
/// from 64 seeded starts and reports a certified interval.
pub fn cg_pub(f: &BoolFn, mode: CgPubMode) -> Result<GameValueReport> {
    let ps = pair_set(f, PairFilter::All)?;
    cg_pub_on(&ps, mode, "cgpub")
}

fn cg_pub_on(ps: &PairSet, mode: CgPubMode, game: &str) -> Result<GameValueReport> {
    let exhaustive = match mode {
        CgPubMode::Exact => {
            if !exact_mode_allowed(ps) {
                return Err(Error::CapExceeded(format!(
                    "exact CG^pub needs min(|X|,|Y|) log2(n) <= 20; got {} * {:.2}",
                    ps.xs.len().min(ps.ys.len()),
                    (ps.n as f64).log2()
                )));
            }
            true
        }
        CgPubMode::Interval => false,
    };
    let out = cg_pub_core(ps, exhaustive)?;
    Ok(pub_report_from_outcome(game, ps, out))
}

// ---------------------------------------------------------------------------
// Single-bit games
// ---------------------------------------------------------------------------

/// CG_[1] = lambda^2, cross-checked by the single-bit weight program built
/// from the per-component singular vectors (its optimum equals lambda).
pub fn cg_single_bit(f: &BoolFn) -> Result<GameValueReport> {
    let srep = measures::sensitivity(f);
    if srep.value() == 0.0 {
        return Err(Error::Invalid(
            "single-bit games need sensitivity >= 1".into(),
        ));
    }
    let lam = measures::spectral_sensitivity(f)?.value();
    let value = lam * lam;
    let program = single_bit_weight_program_value(f)?;
    let cross = program * program;
    let disagree = (cross - value).abs() > 0.05 * value.max(1e-12);
    let mut certificates = Certificates::default();
    certificates
        .notes
        .insert("lambda".into(), serde_json::json!(lam));
    certificates
        .notes
        .insert("weight_program_upper".into(), serde_json::json!(cross));
    certificates.notes.insert("arity".into(), serde_json::json!(f.arity()));
    let mut flags = Vec::new();
    if disagree {
        flags.push("weight_program_disagrees".into());
    }
    Ok(GameValueReport {
        game: "cg1".into(),
        lower: Value::from_f64(value),
        upper: Value::from_f64(value),
        exact: true,
        omega: Some(Value::from_f64(1.0 / value)),
        certificates,
        flags,
    })
}

/// Value of the single-bit weight program min max_z sum_i w_{z,i} subject to
/// w_{x,i} w_{x^(i)},i >= 1 on sensitive edges, via the explicit
/// singular-vector construction per connected component of the sensitivity
/// graph (each component's rows all sum to its singular value).
fn single_bit_weight_program_value(f: &BoolFn) -> Result<f64> {
    let g = measures::sensitivity_graph(f);
    let nz = g.zero.len();
    let no = g.one.len();
    // Union-find over zero-side and one-side vertices.
    let mut parent: Vec<usize> = (0..nz + no).collect();
    fn find(parent: &mut Vec<usize>, v: usize) -> usize {
        if parent[v] != v {
            let r = find(parent, parent[v]);
            parent[v] = r;
        }
        parent[v]
    }
    for (xi, nbrs) in g.adj.iter().enumerate() {
        for &yi in nbrs.iter() {
            let a = find(&mut parent, xi);
            let b = find(&mut parent, nz + yi as usize);
            parent[a] = b;
        }
    }
    let mut roots: Vec<usize> = Vec::new();
    for xi in 0..nz {
        if !g.adj[xi].is_empty() {
            let r = find(&mut parent, xi);
            if !roots.contains(&r) {
                roots.push(r);
            }
        }
    }
    let mut worst: f64 = 0.0;
    for root in roots {
        // Restricted subgraph on this component.
        let zs: Vec<usize> = (0..nz)
            .filter(|&xi| !g.adj[xi].is_empty() && find(&mut parent, xi) == root)
            .collect();
        let mut ys: Vec<u32> = zs
            .iter()
            .flat_map(|&xi| g.adj[xi].iter().copied())
            .collect();
        ys.sort_unstable();
        ys.dedup();
        let yindex: BTreeMap<u32, u32> = ys.iter().enumerate().map(|(i, &y)| (y, i as u32)).collect();
        let sub = measures::SensitivityGraph {
            zero: zs.iter().map(|&xi| g.zero[xi]).collect(),
            one: ys.iter().map(|&yi| g.one[yi as usize]).collect(),
            adj: zs
                .iter()
                .map(|&xi| g.adj[xi].iter().map(|y| yindex[y]).collect())
                .collect(),
        };
        let sigma = measures::power_iteration(&sub).0;
        worst = worst.max(sigma);
    }
    Ok(worst)
}

/// Single-bit FC and EC both collapse to sensitivity: each sensitive edge
/// needs weight 1 on its endpoint rows and weight 1 everywhere is feasible.
pub fn single_bit_fc_ec(f: &BoolFn) -> Result<(BigRational, BigRational)> {
    let s = measures::sensitivity(f).value();
    if s == 0.0 {
        return Err(Error::Invalid("single-bit measures need sensitivity >= 1".into()));
    }
    let v = rat(s as i64);
    Ok((v.clone(), v))
}

/// CG^pub_[1]: the interval [s, e^2 s]; at small scale the exact value of the
/// distance-1 restricted game is computed and attached.
pub fn cg_pub_single_bit(f: &BoolFn) -> Result<GameValueReport> {
    let srep = measures::sensitivity(f);
    let s = srep.value();
    if s == 0.0 {
        return Err(Error::Invalid(
            "single-bit games need sensitivity >= 1".into(),
        ));
    }
    let ps = pair_set(f, PairFilter::DistanceOne)?;
    // Star dual certificate: the max-sensitivity input with uniform mass on
    // its sensitive neighbors pins every deterministic pair to mass <= 1/s.
    let arg = srep
        .witness
        .as_ref()
        .and_then(|w| w.get("argmax"))
        .and_then(|v| v.as_str())
        .map(|t| crate::boolfn::parse_bits(t).expect("witness bitstring").1)
        .expect("sensitivity witness");
    let star_val = f.value(arg).expect("witness in domain");
    let mut mu = Vec::new();
    let share = BigRational::new(1.into(), (s as i64).into());
    for p in f.sensitive_positions(arg).expect("in domain") {
        let nb = f.flip(arg, p);
        let (x, y) = if star_val { (nb, arg) } else { (arg, nb) };
        mu.push((x, y, share.clone()));
    }
    let mut certificates = Certificates {
        mu: Some(mu),
        delta: Some(share.clone()),
        ..Default::default()
    };
    certificates.notes.insert("arity".into(), serde_json::json!(f.arity()));
    let mut flags = vec!["upper_is_theorem_bound".into()];
    let mut exact_restricted = None;
    if exact_mode_allowed(&ps) && ps.pairs.len() <= 64 {
        let out = cg_pub_core(&ps, true)?;
        exact_restricted = Some(out.omega.clone().recip());
        certificates.notes.insert(
            "restricted_exact".into(),
            serde_json::json!(rational_str(exact_restricted.as_ref().unwrap())),
        );
    } else {
        flags.push("restricted_exact_skipped".into());
    }
    let e2 = std::f64::consts::E * std::f64::consts::E;
    Ok(GameValueReport {
        game: "cgpub1".into(),
        lower: Value::from_rational(rat(s as i64)),
        upper: Value::from_f64(e2 * s),
        exact: false,
        omega: exact_restricted.map(|v| Value::from_rational(v.recip())),
        certificates,
        flags,
    })
}

// ---------------------------------------------------------------------------
// Private-coin sandwich
// ---------------------------------------------------------------------------

/// Evaluate a private strategy (per-input output distributions) exactly:
/// worst-case over pairs of sum_{i: x_i != y_i} p_x(i) p_y(i).
pub fn private_worst_win(
    f: &BoolFn,
    p: &BTreeMap<Word, Vec<BigRational>>,
) -> Result<(BigRational, (Word, Word))> {
    let n = f.arity();
    let mut worst: Option<(BigRational, (Word, Word))> = None;
    for &x in f.zero_set() {
        for &y in f.one_set() {
            let px = p
                .get(&x)
                .ok_or_else(|| Error::Invalid(format!("missing row {}", format_bits(x, n))))?;
            let py = p
                .get(&y)
                .ok_or_else(|| Error::Invalid(format!("missing row {}", format_bits(y, n))))?;
            let mut win = BigRational::zero();
            for i in 0..n {
                if (x ^ y) >> (n - 1 - i) & 1 == 1 {
                    win += &px[i] * &py[i];
                }
            }
            if worst.as_ref().is_none_or(|(w, _)| &win < w) {
                worst = Some((win, (x, y)));
            }
        }
    }
    worst.ok_or_else(|| Error::Invalid("no pairs".into()))
}

/// The certificate strategy: each input outputs a uniformly random position
/// of its minimal strong certificate.
pub fn certificate_private_strategy(f: &BoolFn) -> Result<BTreeMap<Word, Vec<BigRational>>> {
    let n = f.arity();
    let mut p = BTreeMap::new();
    for &z in f.domain().iter() {
        let mask = measures::minimal_certificate(f, z, true)?;
        let size = mask.count_ones() as i64;
        let row: Vec<BigRational> = (1..=n)
            .map(|pos| {
                if mask >> (n - pos) & 1 == 1 {
                    BigRational::new(1.into(), size.into())
                } else {
                    BigRational::zero()
                }
            })
            .collect();
        p.insert(z, row);
    }
    Ok(p)
}

/// Alternating optimization of the private-coin weight program
/// (min max_z (sum_i w_{z,i})^2 with pairwise product constraints), without
/// the EC box; geometric rebalancing between the two sides after each pass.
fn sqrt_cg_program(f: &BoolFn, init: measures::WeightTable, rounds: usize) -> Option<BigRational> {
    let n = f.arity();
    let feasible = |w: &measures::WeightTable| {
        f.zero_set().iter().all(|x| {
            f.one_set().iter().all(|y| {
                let mut s = BigRational::zero();
                for i in 0..n {
                    if (x ^ y) >> (n - 1 - i) & 1 == 1 {
                        s += &w[x][i] * &w[y][i];
                    }
                }
                s >= BigRational::one()
            })
        })
    };
    if !feasible(&init) {
        return None;
    }
    let side_max = |w: &measures::WeightTable, one_side: bool| -> BigRational {
        let set = if one_side { f.one_set() } else { f.zero_set() };
        set.iter()
            .map(|z| w[z].iter().sum::<BigRational>())
            .max()
            .unwrap_or_else(BigRational::zero)
    };
    let value = |w: &measures::WeightTable| {
        let m0 = side_max(w, false);
        let m1 = side_max(w, true);
        let m = if m0 > m1 { m0 } else { m1 };
        &m * &m
    };
    let rebalance = |w: &mut measures::WeightTable| {
        // Scale side 0 by t and side 1 by 1/t with t^2 = m1/m0; products are
        // invariant. Rationals lack square roots, so use the best rational
        // approximation from the float ratio.
        let m0 = side_max(w, false).to_f64().unwrap_or(1.0);
        let m1 = side_max(w, true).to_f64().unwrap_or(1.0);
        if m0 <= 0.0 || m1 <= 0.0 {
            return;
        }
        let t = (m1 / m0).sqrt();
        let tq = BigRational::from_float(t).unwrap_or_else(BigRational::one);
        if tq.is_zero() {
            return;
        }
        for &x in f.zero_set() {
            for v in w.get_mut(&x).unwrap().iter_mut() {
                *v *= &tq;
            }
        }
        let inv = tq.recip();
        for &y in f.one_set() {
            for v in w.get_mut(&y).unwrap().iter_mut() {
                *v *= &inv;
            }
        }
    };
    let mut cur = init;
    rebalance(&mut cur);
    let mut best = value(&cur);
    for round in 0..rounds {
        let side = round % 2 == 0;
        match ec_like_side_opt(f, &cur, side) {
            Some(mut next) => {
                rebalance(&mut next);
                let v = value(&next);
                if v < best {
                    best = v.clone();
                }
                cur = next;
            }
            None => break,
        }
    }
    Some(best)
}

/// Side re-optimization without the [0,1] box (shared with the EC machinery
/// in shape, but weights may exceed 1).
fn ec_like_side_opt(
    f: &BoolFn,
    w: &measures::WeightTable,
    side_value: bool,
) -> Option<measures::WeightTable> {
    let n = f.arity();
    let side: &[Word] = if side_value { f.one_set() } else { f.zero_set() };
    let other: &[Word] = if side_value { f.zero_set() } else { f.one_set() };
    let idx: BTreeMap<Word, usize> = side.iter().enumerate().map(|(i, &z)| (z, i)).collect();
    let nvars = side.len() * n + 1;
    let tvar = nvars - 1;
    let mut lp = LinearProgram::new(Sense::Minimize, nvars);
    lp.objective[tvar] = rat(1);
    for &z in side.iter() {
        let mut row = vec![rat(0); nvars];
        for i in 0..n {
            row[idx[&z] * n + i] = rat(1);
        }
        row[tvar] = rat(-1);
        lp.push_row(row, Relation::Le, rat(0));
    }
    for &z in side.iter() {
        for &u in other.iter() {
            let mut row = vec![rat(0); nvars];
            for i in 0..n {
                if (z ^ u) >> (n - 1 - i) & 1 == 1 {
                    row[idx[&z] * n + i] = w[&u][i].clone();
                }
            }
            lp.push_row(row, Relation::Ge, rat(1));
        }
    }
    let sol = lp.solve_rational().ok()?;
    if sol.status != LpStatus::Optimal {
        return None;
    }
    let mut out = w.clone();
    for &z in side.iter() {
        out.insert(z, (0..n).map(|i| sol.primal[idx[&z] * n + i].clone()).collect());
    }
    Some(out)
}

/// Private-coin CG sandwich:
/// lower = max(lambda^2, MM-lower^2, CG^ns);
/// upper = min(certificate-strategy value, EC-upper^2, weight-program value).
pub fn cg_private_bounds(f: &BoolFn, seed: u64) -> Result<GameValueReport> {
    if f.domain_size() > 512 {
        return Err(Error::CapExceeded(format!(
            "private-coin sandwich needs |Dom(f)| <= 512, got {}",
            f.domain_size()
        )));
    }
    let lam = measures::spectral_sensitivity(f)?.value();
    let mm = measures::mm_bounds(f)?;
    let mut lower_f = (lam * lam).max(mm.lower.as_f64() * mm.lower.as_f64());
    let mut lower_exact: Option<BigRational> = None;
    let mut flags = Vec::new();
    match cg_ns(f) {
        Ok(ns) => {
            let v = ns.lower.exact().cloned().expect("cgns exact");
            if v.to_f64().unwrap_or(0.0) >= lower_f {
                lower_f = v.to_f64().unwrap_or(lower_f);
                lower_exact = Some(v);
            }
        }
        Err(Error::CapExceeded(_)) => flags.push("cgns_skipped_cap".into()),
        Err(e) => return Err(e),
    }

    let mut upper_candidates: Vec<(String, BigRational)> = Vec::new();
    let cert_strategy = certificate_private_strategy(f)?;
    let (win, _) = private_worst_win(f, &cert_strategy)?;
    if !win.is_zero() {
        upper_candidates.push(("certificate_strategy".into(), win.clone().recip()));
    }
    let ec = measures::ec_upper(f, 2, seed)?;
    if let Some(u) = ec.upper.exact() {
        upper_candidates.push(("ec_squared".into(), u * u));
    }
    let (_, ec_table) = measures::ec_witness_table(f, 2, seed)?;
    if let Some(v) = sqrt_cg_program(f, ec_table, 6) {
        upper_candidates.push(("weight_program".into(), v));
    }
    let (route, upper) = upper_candidates
        .into_iter()
        .min_by(|a, b| a.1.cmp(&b.1))
        .ok_or_else(|| Error::Invalid("no upper bound route".into()))?;

    let upper_f = upper.to_f64().unwrap_or(f64::INFINITY);
    let exact = (upper_f - lower_f).abs() <= 1e-6 * upper_f.max(1.0);
    let mut certificates = Certificates {
        private_strategy: Some(cert_strategy),
        ..Default::default()
    };
    certificates.notes.insert("arity".into(), serde_json::json!(f.arity()));
    certificates
        .notes
        .insert("upper_route".into(), serde_json::json!(route));
    certificates
        .notes
        .insert("lambda_squared".into(), serde_json::json!(lam * lam));
    Ok(GameValueReport {
        game: "cg".into(),
        lower: match lower_exact {
            Some(v) if v.to_f64().unwrap_or(0.0) >= lower_f => Value::from_rational(v),
            _ => Value::from_f64(lower_f),
        },
        upper: Value::from_rational(upper),
        exact,
        omega: None,
        certificates,
        flags,
    })
}

/// The shared-entanglement value is not computed; it is bracketed by the
/// non-signaling and public-coin values.
pub fn cg_star_bracket(f: &BoolFn) -> Result<GameValueReport> {
    let ns = cg_ns(f)?;
    let ps = pair_set(f, PairFilter::All)?;
    let mode = if exact_mode_allowed(&ps) { CgPubMode::Exact } else { CgPubMode::Interval };
    let pubv = cg_pub(f, mode)?;
    let mut certificates = Certificates::default();
    certificates.notes.insert("arity".into(), serde_json::json!(f.arity()));
    Ok(GameValueReport {
        game: "cgstar".into(),
        lower: ns.lower.clone(),
        upper: pubv.upper.clone(),
        exact: false,
        omega: None,
        certificates,
        flags: vec!["not_computed_quantum".into()],
    })
}

/// Dispatch by CLI game name.
pub fn compute_game(f: &BoolFn, name: &str, mode: CgPubMode, seed: u64) -> Result<GameValueReport> {
    match name {
        "cgns" => cg_ns(f),
        "cgpub" => cg_pub(f, mode),
        "cg" => cg_private_bounds(f, seed),
        "cg1" => cg_single_bit(f),
        "cgpub1" => cg_pub_single_bit(f),
        "cgstar" => cg_star_bracket(f),
        other => Err(Error::Invalid(format!("unknown game {other:?}"))),
    }
}

pub const GAME_NAMES: &[&str] = &["cgns", "cgpub", "cg", "cg1", "cgpub1", "cgstar"];

/// Re-verify a report's certificates: mu is a distribution respecting delta
/// on the generated strategy pairs, strategy maps are total, and the
/// non-signaling witness satisfies its constraints.
pub fn verify_report(f: &BoolFn, report: &GameValueReport) -> Result<()> {
    let n = f.arity();
    if let Some(mu) = &report.certificates.mu {
        let mut total = BigRational::zero();
        for (x, y, w) in mu.iter() {
            if w.is_negative() {
                return Err(Error::Invalid("negative mu weight".into()));
            }
            if f.value(*x) != Some(false) || f.value(*y) != Some(true) {
                return Err(Error::Invalid("mu supported outside f^-1(0) x f^-1(1)".into()));
            }
            total += w;
        }
        if !total.is_one() {
            return Err(Error::Invalid(format!("mu sums to {total}")));
        }
        if let (Some(delta), Some(pairs)) = (&report.certificates.delta, &report.certificates.strategy_pairs) {
            for (_, dp) in pairs.iter() {
                let mut mass = BigRational::zero();
                for (x, y, w) in mu.iter() {
                    let (Some(&i), Some(&j)) = (dp.a.get(x), dp.b.get(y)) else {
                        return Err(Error::Invalid("strategy map not total".into()));
                    };
                    if i == j && (x ^ y) >> (n - i) & 1 == 1 {
                        mass += w;
                    }
                }
                if &mass > delta {
                    return Err(Error::Invalid(format!(
                        "strategy achieves mass {mass} > delta {delta}"
                    )));
                }
            }
        }
    }
    if let Some(pairs) = &report.certificates.strategy_pairs {
        let mut total = BigRational::zero();
        for (w, dp) in pairs.iter() {
            if w.is_negative() {
                return Err(Error::Invalid("negative strategy weight".into()));
            }
            total += w;
            for (&x, &i) in dp.a.iter() {
                if f.value(x) != Some(false) || i < 1 || i > n {
                    return Err(Error::Invalid("bad A map".into()));
                }
            }
            for (&y, &j) in dp.b.iter() {
                if f.value(y) != Some(true) || j < 1 || j > n {
                    return Err(Error::Invalid("bad B map".into()));
                }
            }
        }
        if !pairs.is_empty() && !total.is_one() {
            return Err(Error::Invalid(format!("strategy weights sum to {total}")));
        }
    }
    if let Some(ns) = &report.certificates.ns_strategy {
        let (ok, viol) = ns_check(ns);
        if !ok {
            return Err(Error::Invalid(format!("ns witness violates constraints by {viol}")));
        }
    }
    if let Some(p) = &report.certificates.private_strategy {
        for (z, row) in p.iter() {
            if f.value(*z).is_none() || row.len() != n {
                return Err(Error::Invalid("bad private strategy row".into()));
            }
            let total: BigRational = row.iter().sum();
            if !total.is_one() || row.iter().any(|v| v.is_negative()) {
                return Err(Error::Invalid("private strategy row not a distribution".into()));
            }
        }
    }
    Ok(())
}

pub use crate::linprog::ArithMode as GameArithMode;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boolfn::{zoo, ZooSpec};
    use crate::linprog::ratio;

    fn f(spec: ZooSpec) -> BoolFn {
        zoo(spec).unwrap()
    }

    #[test]
    fn cgns_promise_or_is_n() {
        for n in 2..=5usize {
            let rep = cg_ns(&f(ZooSpec::PromiseOr(n))).unwrap();
            assert_eq!(rep.lower.exact().unwrap(), &rat(n as i64), "n={n}");
            assert!(rep.exact);
            verify_report(&f(ZooSpec::PromiseOr(n)), &rep).unwrap();
        }
    }

    #[test]
    fn cgns_parity2_is_2() {
        let rep = cg_ns(&f(ZooSpec::Parity(2))).unwrap();
        assert_eq!(rep.lower.exact().unwrap(), &rat(2));
    }

    #[test]
    fn cgns_witness_is_nonsignaling() {
        let g = f(ZooSpec::Tribes(2, 2));
        let rep = cg_ns(&g).unwrap();
        let ns = rep.certificates.ns_strategy.as_ref().unwrap();
        let (ok, viol) = ns_check(ns);
        assert!(ok, "violation {viol}");
    }

    #[test]
    fn ns_check_flags_signaling_strategy() {
        // Alice "copies" something about y: her marginal depends on y.
        let g = f(ZooSpec::Parity(2));
        let n = 2;
        let zeros = g.zero_set().to_vec();
        let ones = g.one_set().to_vec();
        let mut probs = Vec::new();
        for (_xi, _x) in zeros.iter().enumerate() {
            for (yi, _y) in ones.iter().enumerate() {
                let mut p = vec![BigRational::zero(); n * n];
                let i = yi % n; // depends on y: signaling
                p[i * n + i] = BigRational::one();
                probs.push(p);
            }
        }
        let ns = NsStrategy { n, zeros, ones, probs };
        let (ok, viol) = ns_check(&ns);
        assert!(!ok);
        assert_eq!(viol, rat(1));
    }

    #[test]
    fn product_of_private_strategies_is_nonsignaling() {
        let g = f(ZooSpec::Or(2));
        let n = 2;
        let zeros = g.zero_set().to_vec();
        let ones = g.one_set().to_vec();
        // Alice uniform, Bob uniform: p(i,j|x,y) = 1/4.
        let probs: Vec<Vec<BigRational>> = (0..zeros.len() * ones.len())
            .map(|_| vec![ratio(1, 4); n * n])
            .collect();
        let ns = NsStrategy { n, zeros, ones, probs };
        let (ok, v) = ns_check(&ns);
        assert!(ok, "violation {v}");
    }

    #[test]
    fn cgpub_or2_exact_2() {
        let g = f(ZooSpec::Or(2));
        let rep = cg_pub(&g, CgPubMode::Exact).unwrap();
        assert!(rep.exact);
        assert_eq!(rep.lower.exact().unwrap(), &rat(2));
        assert_eq!(rep.upper.exact().unwrap(), &rat(2));
        verify_report(&g, &rep).unwrap();
    }

    #[test]
    fn cgpub_parity2_exact_2() {
        let g = f(ZooSpec::Parity(2));
        let rep = cg_pub(&g, CgPubMode::Exact).unwrap();
        assert_eq!(rep.lower.exact().unwrap(), &rat(2));
        verify_report(&g, &rep).unwrap();
    }

    #[test]
    fn cgpub_interval_brackets_exact_value() {
        let g = f(ZooSpec::Tribes(2, 2));
        let exact = cg_pub(&g, CgPubMode::Exact).unwrap();
        let interval = cg_pub(&g, CgPubMode::Interval).unwrap();
        let ev = exact.lower.exact().unwrap();
        assert!(interval.lower.exact().unwrap() <= ev);
        assert!(interval.upper.exact().unwrap() >= ev);
        assert!(interval.flags.contains(&"oracle_heuristic".to_string()));
    }

    #[test]
    fn hierarchy_fc_cmm_cgns_cgpub_on_zoo() {
        for spec in [
            ZooSpec::Or(3),
            ZooSpec::Parity(3),
            ZooSpec::Tribes(2, 2),
            ZooSpec::PromiseOr(3),
            ZooSpec::Gth(4),
        ] {
            let g = f(spec);
            let fc = measures::fractional_certificate(&g).unwrap();
            let cmm = measures::classical_adversary(&g).unwrap();
            let ns = cg_ns(&g).unwrap();
            let pubv = cg_pub(&g, CgPubMode::Exact).unwrap();
            let fcv = fc.lower.exact().unwrap();
            let cmmv = cmm.lower.exact().unwrap();
            let nsv = ns.lower.exact().unwrap();
            let pv = pubv.lower.exact().unwrap();
            assert!(fcv <= cmmv, "{spec}: FC > CMM");
            assert!(cmmv <= nsv, "{spec}: CMM > CGns");
            assert!(nsv <= pv, "{spec}: CGns > CGpub");
        }
    }

    #[test]
    fn cgns_equals_cmm_exactly() {
        // The diagonal of a non-signaling box can reach min(p_x(i), p_y(i))
        // and no more, so the polytope LP and the classical adversary LP have
        // the same optimum. Two independent routes to one number.
        for spec in [ZooSpec::Or(3), ZooSpec::Gth(4), ZooSpec::Tribes(2, 2), ZooSpec::Parity(3)] {
            let g = f(spec);
            let ns = cg_ns(&g).unwrap();
            let cmm = measures::classical_adversary(&g).unwrap();
            assert_eq!(
                ns.lower.exact().unwrap(),
                cmm.lower.exact().unwrap(),
                "{spec}"
            );
        }
    }

    #[test]
    fn cgpub_at_least_fc_via_derived_weights() {
        // From an optimal mu-certificate, v_{x,i} = CGpub * Pr[A outputs i]
        // is FC-feasible; spot-check feasibility on the zoo.
        for spec in [ZooSpec::Or(3), ZooSpec::Parity(2), ZooSpec::Tribes(2, 2)] {
            let g = f(spec);
            let n = g.arity();
            let rep = cg_pub(&g, CgPubMode::Exact).unwrap();
            let cstar = rep.lower.exact().unwrap().clone();
            let pairs = rep.certificates.strategy_pairs.as_ref().unwrap();
            for &x in g.zero_set() {
                let mut v = vec![BigRational::zero(); n];
                for (w, dp) in pairs.iter() {
                    v[dp.a[&x] - 1] += w;
                }
                for e in v.iter_mut() {
                    *e *= &cstar;
                }
                for &y in g.one_set() {
                    let s: BigRational = (0..n)
                        .filter(|&i| (x ^ y) >> (n - 1 - i) & 1 == 1)
                        .map(|i| v[i].clone())
                        .sum();
                    assert!(s >= BigRational::one(), "{spec}: derived weights infeasible");
                }
            }
        }
    }

    #[test]
    fn cg1_values() {
        let rep = cg_single_bit(&f(ZooSpec::Parity(3))).unwrap();
        assert!((rep.value() - 9.0).abs() < 1e-6);
        assert!(rep.flags.is_empty(), "flags: {:?}", rep.flags);
        let rep = cg_single_bit(&f(ZooSpec::Or(4))).unwrap();
        assert!((rep.value() - 4.0).abs() < 1e-6);
        assert!(cg_single_bit(&f(ZooSpec::Gth(4))).is_err());
    }

    #[test]
    fn cg1_weight_program_cross_check_on_zoo() {
        for spec in [ZooSpec::Or(5), ZooSpec::Parity(4), ZooSpec::Tribes(2, 2), ZooSpec::And(3)] {
            let rep = cg_single_bit(&f(spec)).unwrap();
            assert!(
                !rep.flags.contains(&"weight_program_disagrees".to_string()),
                "{spec}: weight-program cross-check flagged {:?}",
                rep.certificates.notes
            );
        }
    }

    #[test]
    fn cgpub1_intervals_contain_exact() {
        for (spec, s) in [(ZooSpec::Or(3), 3.0), (ZooSpec::Parity(2), 2.0)] {
            let rep = cg_pub_single_bit(&f(spec)).unwrap();
            assert_eq!(rep.lower.as_f64(), s);
            let exact: f64 = rep
                .certificates
                .notes
                .get("restricted_exact")
                .and_then(|v| v.as_str())
                .map(|t| {
                    let parts: Vec<&str> = t.split('/').collect();
                    if parts.len() == 2 {
                        parts[0].parse::<f64>().unwrap() / parts[1].parse::<f64>().unwrap()
                    } else {
                        t.parse::<f64>().unwrap()
                    }
                })
                .expect("small case computes the restricted value");
            assert!(rep.lower.as_f64() <= exact + 1e-9, "{spec}");
            assert!(exact <= rep.upper.as_f64() + 1e-9, "{spec}");
            // At these tiny scales the restricted game value equals s.
            assert_eq!(exact, s, "{spec}");
        }
    }

    #[test]
    fn single_bit_fc_ec_equal_sensitivity() {
        for spec in [ZooSpec::Or(3), ZooSpec::Parity(4), ZooSpec::Tribes(2, 2)] {
            let g = f(spec);
            let s = measures::sensitivity(&g).value();
            let (fc1, ec1) = single_bit_fc_ec(&g).unwrap();
            assert_eq!(fc1, rat(s as i64), "{spec}");
            assert_eq!(ec1, rat(s as i64), "{spec}");
        }
    }

    #[test]
    fn cg_private_parity2_is_4() {
        let rep = cg_private_bounds(&f(ZooSpec::Parity(2)), 7).unwrap();
        assert!((rep.lower.as_f64() - 4.0).abs() < 1e-6, "lower {}", rep.lower.as_f64());
        assert_eq!(rep.upper.exact().unwrap(), &rat(4));
        assert!(rep.exact);
    }

    #[test]
    fn cg_private_upper_routes() {
        // OR_n: the certificate strategy gives exactly n.
        let rep = cg_private_bounds(&f(ZooSpec::Or(5)), 7).unwrap();
        assert!(rep.upper.exact().unwrap() <= &rat(5));
        // Tribes_{2,2}: C0*C1 = 4 and lambda^2 = 4 force the exact value 4.
        let rep = cg_private_bounds(&f(ZooSpec::Tribes(2, 2)), 7).unwrap();
        assert!((rep.lower.as_f64() - 4.0).abs() < 1e-6);
        assert_eq!(rep.upper.exact().unwrap(), &rat(4));
        assert!(rep.exact);
    }

    #[test]
    fn cg_star_bracketed() {
        let g = f(ZooSpec::Parity(2));
        let rep = cg_star_bracket(&g).unwrap();
        assert_eq!(rep.lower.as_f64(), 2.0);
        assert_eq!(rep.upper.as_f64(), 2.0);
        assert!(rep.flags.contains(&"not_computed_quantum".to_string()));
    }

    #[test]
    fn private_strategy_eval_examples() {
        let g = f(ZooSpec::Or(3));
        let p = certificate_private_strategy(&g).unwrap();
        let (win, pair) = private_worst_win(&g, &p).unwrap();
        assert_eq!(win, ratio(1, 3));
        assert_eq!(f64::from(pair.0 == 0) as i64, 1);
    }
}
