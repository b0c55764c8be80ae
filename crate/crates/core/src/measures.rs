//! Classical complexity measures: sensitivity, block sensitivity, certificate
//! complexity (weak/strong partial-function variants), fractional certificate
//! complexity and its LP dual, spectral sensitivity, the classical adversary
//! bound, and certified intervals for the non-convex EC and MM programs.

use crate::boolfn::{format_bits, BoolFn, Word};
use crate::linprog::{rat, ratio, ArithMode, LinearProgram, LpStatus, Relation, Sense};
use crate::report::Value;
use crate::rng::Stream;
use crate::{Error, Result};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use std::collections::BTreeMap;

/// A measure result: certified lower/upper bounds (equal when exact), an
/// optional witness, and a per-input breakdown for max-over-inputs measures.
#[derive(Clone, Debug)]
pub struct MeasureReport {
    pub measure: String,
    pub lower: Value,
    pub upper: Value,
    pub exact: bool,
    pub witness: Option<serde_json::Value>,
    pub per_input: Option<Vec<(String, Value)>>,
    pub flags: Vec<String>,
}

impl MeasureReport {
    fn exact_point(measure: &str, v: BigRational) -> Self {
        MeasureReport {
            measure: measure.into(),
            lower: Value::from_rational(v.clone()),
            upper: Value::from_rational(v),
            exact: true,
            witness: None,
            per_input: None,
            flags: Vec::new(),
        }
    }

    pub fn value(&self) -> f64 {
        self.upper.as_f64()
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut obj = serde_json::json!({
            "measure": self.measure,
            "lower": self.lower.json(),
            "upper": self.upper.json(),
            "exact": self.exact,
        });
        if let Some(w) = &self.witness {
            obj["witness"] = w.clone();
        }
        if let Some(per) = &self.per_input {
            obj["per_input"] = serde_json::Value::Object(
                per.iter().map(|(k, v)| (k.clone(), v.json())).collect(),
            );
        }
        if !self.flags.is_empty() {
            obj["flags"] = serde_json::json!(self.flags);
        }
        obj
    }
}

// ---------------------------------------------------------------------------
// Sensitivity and block sensitivity
// ---------------------------------------------------------------------------

pub fn sensitivity(f: &BoolFn) -> MeasureReport {
    let mut best = 0usize;
    let mut arg: Word = 0;
    let mut per_input = Vec::new();
    for &z in f.zero_set().iter().chain(f.one_set().iter()) {
        let s = f.sensitive_positions(z).expect("domain element").len();
        per_input.push((format_bits(z, f.arity()), Value::from_rational(rat(s as i64))));
        if s > best {
            best = s;
            arg = z;
        }
    }
    per_input.sort_by(|a, b| a.0.cmp(&b.0));
    let mut rep = MeasureReport::exact_point("s", rat(best as i64));
    rep.witness = Some(serde_json::json!({ "argmax": format_bits(arg, f.arity()) }));
    rep.per_input = Some(per_input);
    if best == 0 {
        rep.flags.push("sensitivity_zero".into());
    }
    rep
}

/// Minimal sensitive blocks of `z`, as position masks in word space.
fn minimal_sensitive_blocks(f: &BoolFn, z: Word, masks_by_weight: &[Vec<Word>]) -> Vec<Word> {
    let v = f.value(z).expect("domain element");
    let mut minimal: Vec<Word> = Vec::new();
    for group in masks_by_weight.iter() {
        for &mask in group.iter() {
            if f.value(z ^ mask) == Some(!v)
                && !minimal.iter().any(|&m| m & mask == m)
            {
                minimal.push(mask);
            }
        }
    }
    minimal
}

fn max_disjoint(blocks: &[Word]) -> usize {
    fn go(blocks: &[Word], used: Word, picked: usize, best: &mut usize) {
        *best = (*best).max(picked);
        for (i, &b) in blocks.iter().enumerate() {
            if b & used == 0 {
                // Upper bound: everything left could be packable.
                if picked + (blocks.len() - i) <= *best {
                    return;
                }
                go(&blocks[i + 1..], used | b, picked + 1, best);
            }
        }
    }
    let mut best = 0;
    go(blocks, 0, 0, &mut best);
    best
}

pub fn block_sensitivity(f: &BoolFn) -> Result<MeasureReport> {
    let n = f.arity();
    if n > 14 {
        return Err(Error::CapExceeded(format!(
            "block sensitivity enumerates 2^n blocks; n={n} > 14"
        )));
    }
    let mut masks_by_weight: Vec<Vec<Word>> = vec![Vec::new(); n + 1];
    for mask in 1..(1u32 << n) {
        masks_by_weight[mask.count_ones() as usize].push(mask);
    }
    let mut best = 0usize;
    let mut arg: Word = 0;
    let mut witness_blocks: Vec<Word> = Vec::new();
    let mut per_input = Vec::new();
    for &z in f.zero_set().iter().chain(f.one_set().iter()) {
        let blocks = minimal_sensitive_blocks(f, z, &masks_by_weight);
        let bs = max_disjoint(&blocks);
        per_input.push((format_bits(z, n), Value::from_rational(rat(bs as i64))));
        if bs > best {
            best = bs;
            arg = z;
            witness_blocks = blocks;
        }
    }
    per_input.sort_by(|a, b| a.0.cmp(&b.0));
    let mut rep = MeasureReport::exact_point("bs", rat(best as i64));
    rep.per_input = Some(per_input);
    rep.witness = Some(serde_json::json!({
        "argmax": format_bits(arg, n),
        "minimal_blocks": witness_blocks
            .iter()
            .map(|&m| mask_positions(m, n))
            .collect::<Vec<_>>(),
    }));
    Ok(rep)
}

fn mask_positions(mask: Word, n: usize) -> Vec<usize> {
    (1..=n).filter(|&p| mask >> (n - p) & 1 == 1).collect()
}

fn positions_mask(positions: &[usize], n: usize) -> Word {
    positions.iter().fold(0, |acc, &p| acc | 1 << (n - p))
}

// ---------------------------------------------------------------------------
// Certificate complexity
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CertVariant {
    /// Strong 0-side: all consistent completions are defined with value 0.
    C0,
    /// Strong 1-side.
    C1,
    /// max of the {0,*}- and {1,*}-side certificate complexities.
    Weak,
    /// max of the strong sides.
    Strong,
}

impl CertVariant {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "c0" => Some(CertVariant::C0),
            "c1" => Some(CertVariant::C1),
            "c_weak" | "c" => Some(CertVariant::Weak),
            "c_strong" | "c'" => Some(CertVariant::Strong),
            _ => None,
        }
    }
}

/// Minimum hitting set of the difference masks, by size-increasing lexicographic
/// search (ties resolve to the lexicographically smallest position set).
fn min_hitting_set(targets: &[Word], n: usize) -> Option<Word> {
    if targets.iter().any(|&t| t == 0) {
        return None; // an opponent agrees with z everywhere; no certificate
    }
    if targets.is_empty() {
        return Some(0);
    }
    // Iterative deepening over certificate size.
    for k in 1..=n {
        let mut chosen: Vec<usize> = Vec::with_capacity(k);
        if search_hitting(targets, n, k, 1, &mut chosen) {
            return Some(positions_mask(&chosen, n));
        }
    }
    None
}

fn search_hitting(
    targets: &[Word],
    n: usize,
    k: usize,
    from: usize,
    chosen: &mut Vec<usize>,
) -> bool {
    if chosen.len() == k {
        let mask = positions_mask(chosen, n);
        return targets.iter().all(|&t| t & mask != 0);
    }
    // Prune: some target must still be hittable by chosen + available suffix.
    let avail = positions_mask(&(from..=n).collect::<Vec<_>>(), n)
        | positions_mask(chosen, n);
    if targets.iter().any(|&t| t & avail == 0) {
        return false;
    }
    for p in from..=n.saturating_sub(k - chosen.len() - 1) {
        chosen.push(p);
        if search_hitting(targets, n, k, p + 1, chosen) {
            return true;
        }
        chosen.pop();
    }
    false
}

/// Minimal certificate of `z` as a position mask. `strong` certificates must
/// exclude undefined completions as well as opposite-value ones.
pub fn minimal_certificate(f: &BoolFn, z: Word, strong: bool) -> Result<Word> {
    let n = f.arity();
    if n > 16 {
        return Err(Error::CapExceeded(format!(
            "certificate search needs n <= 16, got {n}"
        )));
    }
    let v = f
        .value(z)
        .ok_or_else(|| Error::Invalid(format!("{} not in domain", format_bits(z, n))))?;
    let mut targets: Vec<Word> = Vec::new();
    if strong {
        for u in 0..(1u32 << n) {
            if f.value(u) != Some(v) && u != z {
                targets.push(u ^ z);
            }
        }
    } else {
        let opp = if v { f.zero_set() } else { f.one_set() };
        for &u in opp.iter() {
            targets.push(u ^ z);
        }
    }
    min_hitting_set(&targets, n)
        .ok_or_else(|| Error::Invalid("no certificate exists".into()))
}

fn side_certificate_max(f: &BoolFn, inputs: &[Word], strong: bool) -> Result<(usize, Word, Word)> {
    let mut best = 0usize;
    let mut arg = inputs[0];
    let mut witness = 0;
    for &z in inputs.iter() {
        let mask = minimal_certificate(f, z, strong)?;
        let size = mask.count_ones() as usize;
        if size > best {
            best = size;
            arg = z;
            witness = mask;
        }
    }
    Ok((best, arg, witness))
}

pub fn certificate_complexity(f: &BoolFn, variant: CertVariant) -> Result<MeasureReport> {
    let n = f.arity();
    let name = match variant {
        CertVariant::C0 => "c0",
        CertVariant::C1 => "c1",
        CertVariant::Weak => "c_weak",
        CertVariant::Strong => "c_strong",
    };
    let sides: Vec<(&[Word], bool)> = match variant {
        CertVariant::C0 => vec![(f.zero_set(), true)],
        CertVariant::C1 => vec![(f.one_set(), true)],
        CertVariant::Strong => vec![(f.zero_set(), true), (f.one_set(), true)],
        CertVariant::Weak => vec![(f.zero_set(), false), (f.one_set(), false)],
    };
    let mut best = 0usize;
    let mut arg = None;
    for (inputs, strong) in sides {
        if inputs.is_empty() {
            continue;
        }
        let (v, z, w) = side_certificate_max(f, inputs, strong)?;
        if v >= best {
            best = v;
            arg = Some((z, w));
        }
    }
    let mut rep = MeasureReport::exact_point(name, rat(best as i64));
    if let Some((z, w)) = arg {
        rep.witness = Some(serde_json::json!({
            "argmax": format_bits(z, n),
            "certificate_positions": mask_positions(w, n),
        }));
    }
    Ok(rep)
}

// ---------------------------------------------------------------------------
// Fractional certificate complexity and its dual
// ---------------------------------------------------------------------------

fn check_domain_cap(f: &BoolFn, cap: usize, what: &str) -> Result<()> {
    if f.domain_size() > cap {
        return Err(Error::CapExceeded(format!(
            "{what} needs |Dom(f)| <= {cap}, got {}",
            f.domain_size()
        )));
    }
    Ok(())
}

fn opposite_of(f: &BoolFn, z: Word) -> &[Word] {
    if f.value(z) == Some(false) {
        f.one_set()
    } else {
        f.zero_set()
    }
}

/// FC(f, z): the per-input packing LP, exactly.
pub fn fractional_certificate_at(f: &BoolFn, z: Word) -> Result<(BigRational, Vec<BigRational>)> {
    let n = f.arity();
    let opp = opposite_of(f, z);
    let mut lp = LinearProgram::new(Sense::Minimize, n);
    lp.objective = vec![rat(1); n];
    for &u in opp.iter() {
        let diff = u ^ z;
        let coeffs: Vec<BigRational> = (1..=n)
            .map(|p| if diff >> (n - p) & 1 == 1 { rat(1) } else { rat(0) })
            .collect();
        lp.push_row(coeffs, Relation::Ge, rat(1));
    }
    let sol = lp.solve_rational()?;
    if sol.status != LpStatus::Optimal {
        return Err(Error::Invalid(format!("FC LP status {:?}", sol.status)));
    }
    Ok((sol.objective, sol.primal))
}

/// fbs(f, z): the explicit dual of the FC LP (weights on opposite inputs).
pub fn fractional_block_sensitivity_at(
    f: &BoolFn,
    z: Word,
) -> Result<(BigRational, Vec<BigRational>)> {
    let n = f.arity();
    let opp = opposite_of(f, z);
    let mut lp = LinearProgram::new(Sense::Maximize, opp.len());
    lp.objective = vec![rat(1); opp.len()];
    for p in 1..=n {
        let coeffs: Vec<BigRational> = opp
            .iter()
            .map(|&u| if (u ^ z) >> (n - p) & 1 == 1 { rat(1) } else { rat(0) })
            .collect();
        lp.push_row(coeffs, Relation::Le, rat(1));
    }
    let sol = lp.solve_rational()?;
    if sol.status != LpStatus::Optimal {
        return Err(Error::Invalid(format!("fbs LP status {:?}", sol.status)));
    }
    Ok((sol.objective, sol.primal))
}

fn max_over_inputs(
    f: &BoolFn,
    name: &str,
    eval: impl Fn(Word) -> Result<BigRational> + Sync,
) -> Result<MeasureReport> {
    let inputs: Vec<Word> = f.domain();
    let values: Vec<(Word, BigRational)> = inputs
        .par_iter()
        .map(|&z| eval(z).map(|v| (z, v)))
        .collect::<Result<_>>()?;
    let (arg, best) = values
        .iter()
        .max_by(|a, b| a.1.cmp(&b.1))
        .map(|(z, v)| (*z, v.clone()))
        .expect("non-empty domain");
    let mut rep = MeasureReport::exact_point(name, best);
    rep.per_input = Some(
        values
            .iter()
            .map(|(z, v)| (format_bits(*z, f.arity()), Value::from_rational(v.clone())))
            .collect(),
    );
    rep.witness = Some(serde_json::json!({ "argmax": format_bits(arg, f.arity()) }));
    Ok(rep)
}

pub fn fractional_certificate(f: &BoolFn) -> Result<MeasureReport> {
    check_domain_cap(f, 4096, "fractional certificate")?;
    max_over_inputs(f, "fc", |z| fractional_certificate_at(f, z).map(|(v, _)| v))
}

pub fn fractional_block_sensitivity(f: &BoolFn) -> Result<MeasureReport> {
    check_domain_cap(f, 4096, "fractional block sensitivity")?;
    max_over_inputs(f, "fbs", |z| {
        fractional_block_sensitivity_at(f, z).map(|(v, _)| v)
    })
}

// ---------------------------------------------------------------------------
// Spectral sensitivity
// ---------------------------------------------------------------------------

/// Sparse distance-1 bipartite incidence structure of f.
pub(crate) struct SensitivityGraph {
    pub zero: Vec<Word>,
    pub one: Vec<Word>,
    /// For each zero-input index, the one-input indices at Hamming distance 1.
    pub adj: Vec<Vec<u32>>,
}

pub(crate) fn sensitivity_graph(f: &BoolFn) -> SensitivityGraph {
    let one_index: BTreeMap<Word, u32> = f
        .one_set()
        .iter()
        .enumerate()
        .map(|(i, &w)| (w, i as u32))
        .collect();
    let adj = f
        .zero_set()
        .iter()
        .map(|&x| {
            (1..=f.arity())
                .filter_map(|p| one_index.get(&f.flip(x, p)).copied())
                .collect()
        })
        .collect();
    SensitivityGraph {
        zero: f.zero_set().to_vec(),
        one: f.one_set().to_vec(),
        adj,
    }
}

/// Largest singular value of the incidence matrix by power iteration on
/// F^T F, with the singular vector pair as witness.
pub fn spectral_sensitivity(f: &BoolFn) -> Result<MeasureReport> {
    check_domain_cap(f, 4096, "spectral sensitivity")?;
    let g = sensitivity_graph(f);
    let edges: usize = g.adj.iter().map(|a| a.len()).sum();
    if edges == 0 {
        let mut rep = MeasureReport::exact_point("lambda", rat(0));
        rep.flags.push("sensitivity_zero".into());
        return Ok(rep);
    }
    let (sigma, u, v) = power_iteration(&g);
    let mut rep = MeasureReport {
        measure: "lambda".into(),
        lower: Value::from_f64(sigma),
        upper: Value::from_f64(sigma),
        exact: true,
        witness: None,
        per_input: None,
        flags: Vec::new(),
    };
    if g.zero.len() + g.one.len() <= 64 {
        rep.witness = Some(serde_json::json!({
            "singular_value": sigma,
            "left_vector": u,
            "right_vector": v,
        }));
    }
    Ok(rep)
}

/// Power iteration on F^T F; returns (sigma_max, left vector on zero side,
/// right vector on one side).
pub(crate) fn power_iteration(g: &SensitivityGraph) -> (f64, Vec<f64>, Vec<f64>) {
    let nz = g.zero.len();
    let no = g.one.len();
    // v lives on the one side; w = F v on the zero side.
    let mut v: Vec<f64> = (0..no).map(|i| 1.0 + 1e-7 * (i as f64 + 1.0)).collect();
    normalize(&mut v);
    let mut prev = 0.0f64;
    let mut lam = 0.0f64;
    for _ in 0..200_000 {
        let mut w = vec![0.0; nz];
        for (xi, nbrs) in g.adj.iter().enumerate() {
            for &yi in nbrs.iter() {
                w[xi] += v[yi as usize];
            }
        }
        let mut next = vec![0.0; no];
        for (xi, nbrs) in g.adj.iter().enumerate() {
            for &yi in nbrs.iter() {
                next[yi as usize] += w[xi];
            }
        }
        // Rayleigh quotient with the normalized v: lambda = v . (F^T F v).
        lam = v.iter().zip(next.iter()).map(|(a, b)| a * b).sum();
        let norm = normalize(&mut next);
        if norm == 0.0 {
            break;
        }
        v = next;
        if (lam - prev).abs() <= 1e-10 * lam.max(1.0) {
            break;
        }
        prev = lam;
    }
    let sigma = lam.max(0.0).sqrt();
    let mut u = vec![0.0; nz];
    for (xi, nbrs) in g.adj.iter().enumerate() {
        for &yi in nbrs.iter() {
            u[xi] += v[yi as usize];
        }
    }
    if sigma > 0.0 {
        for x in u.iter_mut() {
            *x /= sigma;
        }
    }
    (sigma, u, v)
}

fn normalize(v: &mut [f64]) -> f64 {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        for x in v.iter_mut() {
            *x /= norm;
        }
    }
    norm
}

// ---------------------------------------------------------------------------
// Classical adversary (CMM)
// ---------------------------------------------------------------------------

/// CMM via the LP `max t` s.t. per-pair `sum_i m_i >= t`, `m_i <= p_x(i)`,
/// `m_i <= p_y(i)`, rows of p sum to 1; CMM = 1/t.
pub fn classical_adversary(f: &BoolFn) -> Result<MeasureReport> {
    check_domain_cap(f, 512, "classical adversary")?;
    let n = f.arity();
    let domain = f.domain();
    let npairs = f.zero_set().len() * f.one_set().len();
    let nvars = 1 + domain.len() * n + npairs * n;
    if nvars > 50_000 {
        return Err(Error::CapExceeded(format!(
            "classical adversary LP would need {nvars} variables"
        )));
    }
    let index_of: BTreeMap<Word, usize> = domain.iter().enumerate().map(|(i, &w)| (w, i)).collect();
    let p_var = |z: Word, i: usize| 1 + index_of[&z] * n + (i - 1);
    let mut lp = LinearProgram::new(Sense::Maximize, nvars);
    lp.objective[0] = rat(1);
    let mut zero_row = || vec![rat(0); nvars];
    for &z in domain.iter() {
        let mut row = zero_row();
        for i in 1..=n {
            row[p_var(z, i)] = rat(1);
        }
        lp.push_row(row, Relation::Eq, rat(1));
    }
    let m_base = 1 + domain.len() * n;
    for (pi, (&x, &y)) in pairs_iter(f).enumerate() {
        let mut cover = vec![rat(0); nvars];
        cover[0] = rat(-1);
        for i in 1..=n {
            if x >> (n - i) & 1 != y >> (n - i) & 1 {
                let m = m_base + pi * n + (i - 1);
                cover[m] = rat(1);
                let mut le_x = vec![rat(0); nvars];
                le_x[m] = rat(1);
                le_x[p_var(x, i)] = rat(-1);
                lp.push_row(le_x, Relation::Le, rat(0));
                let mut le_y = vec![rat(0); nvars];
                le_y[m] = rat(1);
                le_y[p_var(y, i)] = rat(-1);
                lp.push_row(le_y, Relation::Le, rat(0));
            }
        }
        lp.push_row(cover, Relation::Ge, rat(0));
    }
    let sol = lp.solve_rational()?;
    if sol.status != LpStatus::Optimal {
        return Err(Error::Invalid(format!("CMM LP status {:?}", sol.status)));
    }
    let t = sol.objective.clone();
    if t.is_zero() {
        return Err(Error::Invalid("CMM program value is zero".into()));
    }
    let cmm = t.recip();
    let mut rep = MeasureReport::exact_point("cmm", cmm);
    if domain.len() <= 64 {
        let p_table: BTreeMap<String, Vec<String>> = domain
            .iter()
            .map(|&z| {
                (
                    format_bits(z, n),
                    (1..=n)
                        .map(|i| crate::report::rational_str(&sol.primal[p_var(z, i)]))
                        .collect(),
                )
            })
            .collect();
        rep.witness = Some(serde_json::json!({ "p": p_table }));
    }
    Ok(rep)
}

fn pairs_iter<'a>(f: &'a BoolFn) -> impl Iterator<Item = (&'a Word, &'a Word)> + 'a {
    f.zero_set()
        .iter()
        .flat_map(move |x| f.one_set().iter().map(move |y| (x, y)))
}

// ---------------------------------------------------------------------------
// EC: certified interval via alternating optimization
// ---------------------------------------------------------------------------

/// A per-(input, position) weight table over the domain.
pub type WeightTable = BTreeMap<Word, Vec<BigRational>>;

fn ec_feasible(f: &BoolFn, w: &WeightTable) -> bool {
    let n = f.arity();
    let one = BigRational::one();
    for (x, y) in pairs_iter(f) {
        let mut sum = BigRational::zero();
        for i in 1..=n {
            if (x ^ y) >> (n - i) & 1 == 1 {
                sum += &w[x][i - 1] * &w[y][i - 1];
            }
        }
        if sum < one {
            return false;
        }
    }
    true
}

fn ec_value(w: &WeightTable) -> BigRational {
    w.values()
        .map(|row| row.iter().sum::<BigRational>())
        .max()
        .unwrap_or_else(BigRational::zero)
}

/// One alternating step: re-optimize the weights of `side` (the inputs of one
/// function value) with the other side fixed, minimizing the max row sum
/// subject to the bilinear constraints (linear once one side is fixed) and
/// the [0,1] box. Returns None when infeasible.
fn ec_optimize_side(f: &BoolFn, w: &WeightTable, side_value: bool) -> Option<WeightTable> {
    let n = f.arity();
    let side: &[Word] = if side_value { f.one_set() } else { f.zero_set() };
    let other: &[Word] = if side_value { f.zero_set() } else { f.one_set() };
    let idx: BTreeMap<Word, usize> = side.iter().enumerate().map(|(i, &z)| (z, i)).collect();
    let nvars = side.len() * n + 1; // weights then t
    let tvar = nvars - 1;
    let mut lp = LinearProgram::new(Sense::Minimize, nvars);
    lp.objective[tvar] = rat(1);
    for j in 0..side.len() * n {
        lp.upper[j] = Some(rat(1));
    }
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
            for i in 1..=n {
                if (z ^ u) >> (n - i) & 1 == 1 {
                    row[idx[&z] * n + (i - 1)] = w[&u][i - 1].clone();
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
        let row: Vec<BigRational> = (0..n).map(|i| sol.primal[idx[&z] * n + i].clone()).collect();
        out.insert(z, row);
    }
    Some(out)
}

fn ec_alternate(f: &BoolFn, init: WeightTable, rounds: usize) -> Option<(BigRational, WeightTable)> {
    if !ec_feasible(f, &init) {
        return None;
    }
    let mut best_w = init;
    let mut best = ec_value(&best_w);
    let mut cur = best_w.clone();
    for round in 0..rounds {
        let side = round % 2 == 0;
        match ec_optimize_side(f, &cur, side) {
            Some(next) => {
                debug_assert!(ec_feasible(f, &next));
                let v = ec_value(&next);
                if v < best {
                    best = v.clone();
                    best_w = next.clone();
                }
                cur = next;
            }
            None => break,
        }
    }
    Some((best, best_w))
}

/// EC sandwich: lower bound FC(f), upper bound the best feasible point found
/// by alternating convex optimization from certificate / FC / all-ones /
/// random initializations.
pub fn ec_upper(f: &BoolFn, restarts: u32, seed: u64) -> Result<MeasureReport> {
    check_domain_cap(f, 512, "expectational certificate")?;
    let n = f.arity();
    let fc = fractional_certificate(f)?;
    let fc_lower = fc.lower.exact().expect("fc is rational").clone();

    let mut inits: Vec<WeightTable> = Vec::new();
    // Certificate indicator weights (strong side), feasible for any f whose
    // strong certificates exist: conflicting assignments guarantee a shared
    // differing position of weight 1.
    if n <= 16 {
        let mut table = WeightTable::new();
        let mut ok = true;
        for &z in f.domain().iter() {
            match minimal_certificate(f, z, true) {
                Ok(mask) => {
                    table.insert(
                        z,
                        (1..=n)
                            .map(|p| if mask >> (n - p) & 1 == 1 { rat(1) } else { rat(0) })
                            .collect(),
                    );
                }
                Err(_) => {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            inits.push(table);
        }
    }
    // FC witness clamped into the box.
    {
        let mut table = WeightTable::new();
        for &z in f.domain().iter() {
            let (_, v) = fractional_certificate_at(f, z)?;
            table.insert(z, v.into_iter().map(|q| q.min(rat(1))).collect());
        }
        inits.push(table);
    }
    // All-ones: always feasible (opposite-value inputs differ somewhere).
    inits.push(
        f.domain()
            .iter()
            .map(|&z| (z, vec![rat(1); n]))
            .collect(),
    );
    let mut stream = Stream::new(seed);
    for _ in 0..restarts {
        let table: WeightTable = f
            .domain()
            .iter()
            .map(|&z| {
                (
                    z,
                    (0..n)
                        .map(|_| ratio(1 + stream.below(4) as i64, 4))
                        .collect(),
                )
            })
            .collect();
        inits.push(table);
    }

    let mut best: Option<(BigRational, WeightTable)> = None;
    for init in inits {
        if let Some((v, w)) = ec_alternate(f, init, 8) {
            if best.as_ref().is_none_or(|(b, _)| &v < b) {
                best = Some((v, w));
            }
        }
    }
    let (upper, witness) = best.ok_or_else(|| Error::Invalid("no feasible EC point".into()))?;
    let exact = upper == fc_lower;
    let witness_json = if f.domain_size() <= 64 {
        Some(serde_json::json!({
            "weights": witness
                .iter()
                .map(|(z, row)| {
                    (
                        format_bits(*z, n),
                        row.iter().map(crate::report::rational_str).collect::<Vec<_>>(),
                    )
                })
                .collect::<BTreeMap<_, _>>(),
        }))
    } else {
        None
    };
    Ok(MeasureReport {
        measure: "ec".into(),
        lower: Value::from_rational(fc_lower),
        upper: Value::from_rational(upper),
        exact,
        witness: witness_json,
        per_input: None,
        flags: Vec::new(),
    })
}

/// Best feasible EC weight table (used by the EC hashing strategy).
pub fn ec_witness_table(f: &BoolFn, restarts: u32, seed: u64) -> Result<(BigRational, WeightTable)> {
    check_domain_cap(f, 512, "expectational certificate")?;
    let n = f.arity();
    let mut table = WeightTable::new();
    let mut ok = n <= 16;
    if ok {
        for &z in f.domain().iter() {
            match minimal_certificate(f, z, true) {
                Ok(mask) => {
                    table.insert(
                        z,
                        (1..=n)
                            .map(|p| if mask >> (n - p) & 1 == 1 { rat(1) } else { rat(0) })
                            .collect(),
                    );
                }
                Err(_) => {
                    ok = false;
                    break;
                }
            }
        }
    }
    if !ok || !ec_feasible(f, &table) {
        table = f.domain().iter().map(|&z| (z, vec![rat(1); n])).collect();
    }
    let mut best = (ec_value(&table), table);
    if let Some((v, w)) = ec_alternate(f, best.1.clone(), 6) {
        if v < best.0 {
            best = (v, w);
        }
    }
    let _ = (restarts, seed);
    Ok(best)
}

// ---------------------------------------------------------------------------
// MM: certified interval via projected subgradient ascent
// ---------------------------------------------------------------------------

fn mm_objective(f: &BoolFn, p: &BTreeMap<Word, Vec<f64>>) -> f64 {
    let n = f.arity();
    let mut worst = f64::INFINITY;
    for (x, y) in pairs_iter(f) {
        let mut s = 0.0;
        for i in 1..=n {
            if (x ^ y) >> (n - i) & 1 == 1 {
                s += (p[x][i - 1] * p[y][i - 1]).sqrt();
            }
        }
        worst = worst.min(s);
    }
    worst
}

fn project_simplex(row: &mut [f64]) {
    // Euclidean projection onto the probability simplex.
    let mut sorted: Vec<f64> = row.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut acc = 0.0;
    let mut theta = 0.0;
    for (k, &v) in sorted.iter().enumerate() {
        acc += v;
        let t = (acc - 1.0) / (k as f64 + 1.0);
        if v - t > 0.0 {
            theta = t;
        }
    }
    for v in row.iter_mut() {
        *v = (*v - theta).max(0.0);
    }
    let s: f64 = row.iter().sum();
    if s > 0.0 {
        for v in row.iter_mut() {
            *v /= s;
        }
    } else {
        let u = 1.0 / row.len() as f64;
        for v in row.iter_mut() {
            *v = u;
        }
    }
}

/// MM sandwich: lower bound lambda(f), upper bound from the best distribution
/// family found by projected subgradient ascent on the concave min-pair
/// objective (200 iterations, 5 restarts).
pub fn mm_bounds(f: &BoolFn) -> Result<MeasureReport> {
    check_domain_cap(f, 512, "adversary minimax")?;
    let n = f.arity();
    let lam = spectral_sensitivity(f)?;
    let lambda = lam.lower.as_f64();
    let domain = f.domain();

    let uniform: BTreeMap<Word, Vec<f64>> = domain
        .iter()
        .map(|&z| (z, vec![1.0 / n as f64; n]))
        .collect();
    let mut inits = vec![uniform.clone()];
    if n <= 16 {
        let mut cert_init = BTreeMap::new();
        let mut ok = true;
        for &z in domain.iter() {
            match minimal_certificate(f, z, true) {
                Ok(mask) => {
                    let size = mask.count_ones() as f64;
                    cert_init.insert(
                        z,
                        (1..=n)
                            .map(|p| if mask >> (n - p) & 1 == 1 { 1.0 / size } else { 0.0 })
                            .collect::<Vec<f64>>(),
                    );
                }
                Err(_) => {
                    ok = false;
                    break;
                }
            }
        }
        if ok {
            inits.push(cert_init);
        }
    }
    let mut stream = Stream::new(0x4d4d);
    while inits.len() < 5 {
        inits.push(
            domain
                .iter()
                .map(|&z| {
                    let mut row: Vec<f64> = (0..n).map(|_| stream.unit_f64() + 1e-3).collect();
                    let s: f64 = row.iter().sum();
                    row.iter_mut().for_each(|v| *v /= s);
                    (z, row)
                })
                .collect(),
        );
    }

    let mut best_val = f64::NEG_INFINITY;
    let mut best_p = uniform.clone();
    for init in inits {
        let mut p = init;
        let mut val = mm_objective(f, &p);
        if val > best_val {
            best_val = val;
            best_p = p.clone();
        }
        for iter in 0..200 {
            // Subgradient at the worst pair.
            let mut worst_pair = None;
            let mut worst = f64::INFINITY;
            for (x, y) in pairs_iter(f) {
                let mut s = 0.0;
                for i in 1..=n {
                    if (x ^ y) >> (n - i) & 1 == 1 {
                        s += (p[x][i - 1] * p[y][i - 1]).sqrt();
                    }
                }
                if s < worst {
                    worst = s;
                    worst_pair = Some((*x, *y));
                }
            }
            let Some((x, y)) = worst_pair else { break };
            let eta = 0.3 / ((iter + 1) as f64).sqrt();
            let mut px = p[&x].clone();
            let mut py = p[&y].clone();
            for i in 1..=n {
                if (x ^ y) >> (n - i) & 1 == 1 {
                    let (a, b) = (px[i - 1].max(1e-12), py[i - 1].max(1e-12));
                    px[i - 1] += eta * 0.5 * (b / a).sqrt();
                    py[i - 1] += eta * 0.5 * (a / b).sqrt();
                }
            }
            project_simplex(&mut px);
            project_simplex(&mut py);
            p.insert(x, px);
            p.insert(y, py);
            val = mm_objective(f, &p);
            if val > best_val {
                best_val = val;
                best_p = p.clone();
            }
        }
    }

    let mut rep = MeasureReport {
        measure: "mm".into(),
        lower: Value::from_f64(lambda),
        upper: Value::from_f64(if best_val > 0.0 { 1.0 / best_val } else { f64::INFINITY }),
        exact: false,
        witness: None,
        per_input: None,
        flags: lam.flags.clone(),
    };
    if f.domain_size() <= 64 {
        rep.witness = Some(serde_json::json!({
            "p": best_p
                .iter()
                .map(|(z, row)| (format_bits(*z, n), row.clone()))
                .collect::<BTreeMap<_, _>>(),
        }));
    }
    Ok(rep)
}

/// Dispatch by CLI measure name.
pub fn compute_measure(f: &BoolFn, name: &str, seed: u64) -> Result<MeasureReport> {
    match name {
        "s" => Ok(sensitivity(f)),
        "bs" => block_sensitivity(f),
        "c0" => certificate_complexity(f, CertVariant::C0),
        "c1" => certificate_complexity(f, CertVariant::C1),
        "c_weak" => certificate_complexity(f, CertVariant::Weak),
        "c_strong" => certificate_complexity(f, CertVariant::Strong),
        "fc" => fractional_certificate(f),
        "fbs" => fractional_block_sensitivity(f),
        "lambda" => spectral_sensitivity(f),
        "cmm" => classical_adversary(f),
        "ec" => ec_upper(f, 3, seed),
        "mm" => mm_bounds(f),
        other => Err(Error::Invalid(format!("unknown measure {other:?}"))),
    }
}

pub const MEASURE_NAMES: &[&str] = &[
    "s", "bs", "c0", "c1", "c_weak", "c_strong", "fc", "fbs", "lambda", "cmm", "ec", "mm",
];

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boolfn::{zoo, ZooSpec};

    fn f(spec: ZooSpec) -> BoolFn {
        zoo(spec).unwrap()
    }

    #[test]
    fn sensitivity_zoo() {
        assert_eq!(sensitivity(&f(ZooSpec::Or(3))).value(), 3.0);
        assert_eq!(sensitivity(&f(ZooSpec::Gth(4))).value(), 0.0);
        assert_eq!(sensitivity(&f(ZooSpec::Tribes(2, 2))).value(), 2.0);
        assert!(sensitivity(&f(ZooSpec::Gth(4))).flags.contains(&"sensitivity_zero".to_string()));
    }

    #[test]
    fn block_sensitivity_zoo() {
        assert_eq!(block_sensitivity(&f(ZooSpec::Or(3))).unwrap().value(), 3.0);
        assert_eq!(block_sensitivity(&f(ZooSpec::Parity(4))).unwrap().value(), 4.0);
        assert_eq!(block_sensitivity(&f(ZooSpec::Tribes(2, 2))).unwrap().value(), 2.0);
    }

    #[test]
    fn block_sensitivity_exhaustive_oracle_n3() {
        // Independent oracle: maximum over all families of disjoint (not
        // necessarily minimal) sensitive blocks, by brute force over the 3^n
        // assignments of blocks... n=3 is small enough to enumerate subsets
        // of the 7 masks directly.
        for table in 0u32..256 {
            let func = match BoolFn::from_values(3, (0..8u32).map(|w| (w, table >> w & 1 == 1))) {
                Ok(func) => func,
                Err(_) => continue,
            };
            let masks: Vec<Word> = (1..8).collect();
            let mut oracle_best = 0;
            for &z in func.domain().iter() {
                let v = func.value(z).unwrap();
                let sensitive: Vec<Word> = masks
                    .iter()
                    .copied()
                    .filter(|&m| func.value(z ^ m) == Some(!v))
                    .collect();
                // all subsets of sensitive blocks
                for sel in 0u32..1 << sensitive.len() {
                    let mut used = 0u32;
                    let mut count = 0;
                    let mut ok = true;
                    for (i, &m) in sensitive.iter().enumerate() {
                        if sel >> i & 1 == 1 {
                            if used & m != 0 {
                                ok = false;
                                break;
                            }
                            used |= m;
                            count += 1;
                        }
                    }
                    if ok {
                        oracle_best = oracle_best.max(count);
                    }
                }
            }
            let got = block_sensitivity(&func).unwrap().value() as usize;
            assert_eq!(got, oracle_best, "table {table:08b}");
        }
    }

    #[test]
    fn certificates_or3() {
        let or3 = f(ZooSpec::Or(3));
        assert_eq!(certificate_complexity(&or3, CertVariant::C0).unwrap().value(), 3.0);
        assert_eq!(certificate_complexity(&or3, CertVariant::C1).unwrap().value(), 1.0);
        assert_eq!(certificate_complexity(&or3, CertVariant::Weak).unwrap().value(), 3.0);
        assert_eq!(certificate_complexity(&or3, CertVariant::Strong).unwrap().value(), 3.0);
    }

    #[test]
    fn certificates_gth() {
        for n in [4usize, 6, 8] {
            let g = f(ZooSpec::Gth(n));
            assert_eq!(
                certificate_complexity(&g, CertVariant::Weak).unwrap().value(),
                1.0,
                "weak at n={n}"
            );
            // A strong certificate must pin every free bit, else some
            // completion leaves the weight-1 domain.
            assert_eq!(
                certificate_complexity(&g, CertVariant::Strong).unwrap().value(),
                n as f64
            );
        }
    }

    #[test]
    fn weak_equals_strong_for_total_functions() {
        for spec in [ZooSpec::Or(4), ZooSpec::Parity(3), ZooSpec::Tribes(2, 2), ZooSpec::And(4)] {
            let g = f(spec);
            let w = certificate_complexity(&g, CertVariant::Weak).unwrap().value();
            let s = certificate_complexity(&g, CertVariant::Strong).unwrap().value();
            assert_eq!(w, s, "{spec}");
        }
    }

    #[test]
    fn lex_smallest_certificate_tiebreak() {
        // OR3 at a 1-input with several ones: the minimal 1-certificate is a
        // single 1-position; the smallest position wins.
        let or3 = f(ZooSpec::Or(3));
        let (_, w) = crate::boolfn::parse_bits("011").map(|(n, w)| (n, w)).unwrap();
        let mask = minimal_certificate(&or3, w, true).unwrap();
        assert_eq!(mask_positions(mask, 3), vec![2]);
    }

    #[test]
    fn fc_zoo_values() {
        assert_eq!(fractional_certificate(&f(ZooSpec::Or(3))).unwrap().value(), 3.0);
        assert_eq!(fractional_certificate(&f(ZooSpec::Parity(2))).unwrap().value(), 2.0);
        let gth8 = fractional_certificate(&f(ZooSpec::Gth(8))).unwrap();
        assert!(gth8.value() <= 2.0, "FC(GTH_8) = {}", gth8.value());
    }

    #[test]
    fn fbs_equals_fc_by_duality() {
        for spec in [
            ZooSpec::Or(3),
            ZooSpec::Parity(3),
            ZooSpec::Tribes(2, 2),
            ZooSpec::Gth(6),
            ZooSpec::PromiseOr(4),
        ] {
            let g = f(spec);
            for &z in g.domain().iter() {
                let (fc, _) = fractional_certificate_at(&g, z).unwrap();
                let (fbs, _) = fractional_block_sensitivity_at(&g, z).unwrap();
                assert_eq!(fc, fbs, "{spec} at {z:b}");
            }
        }
    }

    #[test]
    fn promise_or_fbs_at_zero() {
        let g = f(ZooSpec::PromiseOr(4));
        let (v, duals) = fractional_block_sensitivity_at(&g, 0).unwrap();
        assert_eq!(v, rat(4));
        assert_eq!(duals, vec![rat(1); 4]);
    }

    #[test]
    fn lambda_zoo() {
        let par = spectral_sensitivity(&f(ZooSpec::Parity(4))).unwrap();
        assert!((par.value() - 4.0).abs() < 1e-8, "parity4 lambda {}", par.value());
        let or4 = spectral_sensitivity(&f(ZooSpec::Or(4))).unwrap();
        assert!((or4.value() - 2.0).abs() < 1e-8);
        let gth = spectral_sensitivity(&f(ZooSpec::Gth(4))).unwrap();
        assert_eq!(gth.value(), 0.0);
        assert!(gth.flags.contains(&"sensitivity_zero".to_string()));
    }

    #[test]
    fn lambda_matches_dense_eigendecomposition() {
        use nalgebra::DMatrix;
        for spec in [
            ZooSpec::Or(4),
            ZooSpec::Parity(5),
            ZooSpec::Tribes(2, 2),
            ZooSpec::PromiseOr(5),
        ] {
            let g = f(spec);
            let graph = sensitivity_graph(&g);
            let (nz, no) = (graph.zero.len(), graph.one.len());
            let mut m = DMatrix::<f64>::zeros(nz, no);
            for (xi, nbrs) in graph.adj.iter().enumerate() {
                for &yi in nbrs.iter() {
                    m[(xi, yi as usize)] = 1.0;
                }
            }
            let sym = &m * m.transpose();
            let eig = sym.symmetric_eigen();
            let oracle = eig.eigenvalues.iter().cloned().fold(0.0f64, f64::max).sqrt();
            let got = spectral_sensitivity(&g).unwrap().value();
            assert!((got - oracle).abs() <= 1e-8, "{spec}: {got} vs {oracle}");
        }
    }

    #[test]
    fn cmm_zoo() {
        assert_eq!(classical_adversary(&f(ZooSpec::Parity(2))).unwrap().value(), 2.0);
        for n in [4usize, 6, 8] {
            let v = classical_adversary(&f(ZooSpec::Gth(n))).unwrap();
            assert!(
                v.value() >= n as f64 / 4.0,
                "CMM(GTH_{n}) = {} < n/4",
                v.value()
            );
        }
    }

    #[test]
    fn cmm_equals_fc_on_random_total_functions() {
        let mut stream = Stream::new(31);
        let mut done = 0;
        while done < 50 {
            let table: u32 = (stream.next_u64() & 0xff) as u32;
            if table == 0 || table == 255 {
                continue;
            }
            let g = BoolFn::from_values(3, (0..8u32).map(|w| (w, table >> w & 1 == 1))).unwrap();
            let cmm = classical_adversary(&g).unwrap();
            let fc = fractional_certificate(&g).unwrap();
            assert_eq!(
                cmm.lower.exact().unwrap(),
                fc.lower.exact().unwrap(),
                "table {table:08b}"
            );
            done += 1;
        }
    }

    #[test]
    fn ec_zoo_intervals() {
        let or3 = ec_upper(&f(ZooSpec::Or(3)), 2, 7).unwrap();
        assert!(or3.upper.as_f64() <= 3.0 + 1e-12);
        let tribes = ec_upper(&f(ZooSpec::Tribes(2, 2)), 2, 7).unwrap();
        assert_eq!(tribes.lower.exact().unwrap(), &rat(2));
        assert_eq!(tribes.upper.exact().unwrap(), &rat(2));
        assert!(tribes.exact);
        let par3 = ec_upper(&f(ZooSpec::Parity(3)), 2, 7).unwrap();
        assert_eq!(par3.lower.exact().unwrap(), &rat(3));
        assert_eq!(par3.upper.exact().unwrap(), &rat(3));
    }

    #[test]
    fn ec_within_fc_cstrong_for_total_functions() {
        for spec in [ZooSpec::Or(4), ZooSpec::And(3), ZooSpec::Tribes(2, 2), ZooSpec::Parity(3)] {
            let g = f(spec);
            let rep = ec_upper(&g, 2, 1).unwrap();
            let cs = certificate_complexity(&g, CertVariant::Strong).unwrap();
            assert!(
                rep.lower.as_f64() <= rep.upper.as_f64() + 1e-12,
                "{spec}: interval inverted"
            );
            assert!(
                rep.upper.as_f64() <= cs.value() + 1e-12,
                "{spec}: EC upper exceeds C_strong"
            );
        }
    }

    #[test]
    fn mm_zoo_intervals() {
        let par4 = mm_bounds(&f(ZooSpec::Parity(4))).unwrap();
        assert!((par4.lower.as_f64() - 4.0).abs() < 1e-6);
        assert!(par4.upper.as_f64() <= 4.0 * 1.02, "upper {}", par4.upper.as_f64());
        let or9 = mm_bounds(&f(ZooSpec::Or(9))).unwrap();
        assert!((or9.lower.as_f64() - 3.0).abs() < 1e-6);
        assert!(or9.upper.as_f64() <= 3.2);
        let gth4 = mm_bounds(&f(ZooSpec::Gth(4))).unwrap();
        assert_eq!(gth4.lower.as_f64(), 0.0);
        assert!(gth4.flags.contains(&"sensitivity_zero".to_string()));
    }

    #[test]
    fn chain_on_all_nonconstant_n3_functions() {
        // lambda <= s <= bs <= FC <= C_weak = C_strong on every non-constant
        // total function of 3 bits.
        let mut count = 0;
        for table in 1u32..255 {
            let g = BoolFn::from_values(3, (0..8u32).map(|w| (w, table >> w & 1 == 1))).unwrap();
            let lam = spectral_sensitivity(&g).unwrap().value();
            let s = sensitivity(&g).value();
            let bs = block_sensitivity(&g).unwrap().value();
            let fc = fractional_certificate(&g).unwrap();
            let fcv = fc.lower.exact().unwrap().to_f64().unwrap();
            let cw = certificate_complexity(&g, CertVariant::Weak).unwrap().value();
            let cs = certificate_complexity(&g, CertVariant::Strong).unwrap().value();
            assert!(lam <= s + 1e-6, "table {table}: lambda {lam} > s {s}");
            assert!(s <= bs, "table {table}");
            assert!(bs as i64 <= fcv.ceil() as i64, "table {table}: bs {bs} > fc {fcv}");
            assert!(bs <= fcv + 1e-9, "table {table}");
            assert!(fcv <= cw + 1e-9, "table {table}");
            assert_eq!(cw, cs, "table {table}");
            count += 1;
        }
        assert_eq!(count, 254);
    }
}
