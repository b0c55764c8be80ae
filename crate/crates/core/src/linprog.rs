//! Dense linear programming with floating and exact-rational modes.
//!
//! The solver is a two-phase tableau simplex. Exact mode uses Bland's rule
//! (termination guaranteed) and runs over machine-word fractions first,
//! promoting the whole solve to arbitrary-precision rationals if any
//! intermediate value overflows 128 bits. Float mode uses Dantzig's rule with
//! an epsilon tolerance and retries in exact mode when the result fails its
//! residual checks.
//!
//! Duals follow the convention that at optimality the primal objective equals
//! `sum_i dual[i] * rhs[i]` (plus lower-bound terms when bounds are shifted):
//! for a minimization problem, `>=` rows get nonnegative duals and `<=` rows
//! nonpositive ones; for maximization the signs are mirrored.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

/// Arithmetic mode of a solve.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub enum ArithMode {
    #[serde(rename = "float64")]
    Float64,
    #[serde(rename = "exact-rational")]
    ExactRational,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

impl std::fmt::Display for Relation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Relation::Le => "<=",
            Relation::Eq => "=",
            Relation::Ge => ">=",
        })
    }
}

#[derive(Clone, Debug)]
pub struct Row {
    pub coeffs: Vec<BigRational>,
    pub rel: Relation,
    pub rhs: BigRational,
}

/// Dense LP: objective sense, objective vector, constraint rows and
/// per-variable bounds (default `[0, +inf)`; `lower: None` means free).
#[derive(Clone, Debug)]
pub struct LinearProgram {
    pub sense: Sense,
    pub objective: Vec<BigRational>,
    pub rows: Vec<Row>,
    pub lower: Vec<Option<BigRational>>,
    pub upper: Vec<Option<BigRational>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub enum LpStatus {
    #[serde(rename = "optimal")]
    Optimal,
    #[serde(rename = "infeasible")]
    Infeasible,
    #[serde(rename = "unbounded")]
    Unbounded,
}

/// Result of a solve. `primal`/`dual`/`objective` are meaningful only when
/// `status == Optimal`; the dual vector has one multiplier per user row.
#[derive(Clone, Debug)]
pub struct LpSolution {
    pub status: LpStatus,
    pub objective: BigRational,
    pub primal: Vec<BigRational>,
    pub dual: Vec<BigRational>,
    pub mode: ArithMode,
}

impl LpSolution {
    fn empty(status: LpStatus, mode: ArithMode) -> Self {
        LpSolution {
            status,
            objective: rat(0),
            primal: Vec::new(),
            dual: Vec::new(),
            mode,
        }
    }

    pub fn objective_f64(&self) -> f64 {
        self.objective.to_f64().unwrap_or(f64::NAN)
    }
}

#[derive(Debug, Error)]
pub enum LpError {
    #[error("row {0} has {1} coefficients, expected {2}")]
    RowDimension(usize, usize, usize),
    #[error("unsupported bounds for variable {0}: free variable with finite upper bound")]
    UnsupportedBounds(usize),
    #[error("float mode failed residual checks and the LP exceeds the exact-retry cap")]
    FloatUnstable,
    #[error("cutting-plane row cap of {0} exceeded")]
    RowCapExceeded(usize),
}

// ---------------------------------------------------------------------------
// Scalar abstraction
// ---------------------------------------------------------------------------

/// Arithmetic used inside the simplex. Operations return `None` on overflow,
/// which aborts the solve so the caller can rerun with a wider type.
pub(crate) trait Scalar: Clone + std::fmt::Debug {
    const EXACT: bool;
    fn zero() -> Self;
    fn one() -> Self;
    fn from_rational(q: &BigRational) -> Option<Self>;
    fn to_rational(&self) -> BigRational;
    fn try_add(&self, o: &Self) -> Option<Self>;
    fn try_sub(&self, o: &Self) -> Option<Self>;
    fn try_mul(&self, o: &Self) -> Option<Self>;
    fn try_div(&self, o: &Self) -> Option<Self>;
    fn neg(&self) -> Self;
    /// -1, 0, +1; the float impl applies its feasibility tolerance.
    fn sign(&self) -> i8;
    fn ratio_lt(&self, o: &Self) -> bool {
        matches!(self.try_sub(o).map(|d| d.sign()), Some(-1))
    }
}

#[inline]
fn vanishes<T: Scalar>(v: &T) -> bool {
    v.sign() == 0
}

const F64_EPS: f64 = 1e-9;

impl Scalar for f64 {
    const EXACT: bool = false;
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_rational(q: &BigRational) -> Option<Self> {
        q.to_f64()
    }
    fn to_rational(&self) -> BigRational {
        BigRational::from_float(*self).unwrap_or_else(|| rat(0))
    }
    fn try_add(&self, o: &Self) -> Option<Self> {
        Some(self + o)
    }
    fn try_sub(&self, o: &Self) -> Option<Self> {
        Some(self - o)
    }
    fn try_mul(&self, o: &Self) -> Option<Self> {
        Some(self * o)
    }
    fn try_div(&self, o: &Self) -> Option<Self> {
        Some(self / o)
    }
    fn neg(&self) -> Self {
        -self
    }
    fn sign(&self) -> i8 {
        if *self > F64_EPS {
            1
        } else if *self < -F64_EPS {
            -1
        } else {
            0
        }
    }
    fn ratio_lt(&self, o: &Self) -> bool {
        self + F64_EPS < *o
    }
}

/// Reduced fraction over i128 with overflow-checked arithmetic.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct Frac128 {
    n: i128,
    d: i128, // always > 0
}

impl Frac128 {
    fn new_reduced(n: i128, d: i128) -> Option<Self> {
        debug_assert!(d != 0);
        let (mut n, mut d) = if d < 0 { (n.checked_neg()?, d.checked_neg()?) } else { (n, d) };
        if n == 0 {
            return Some(Frac128 { n: 0, d: 1 });
        }
        let g = n.unsigned_abs().gcd(&d.unsigned_abs());
        if g > 1 {
            n /= g as i128;
            d /= g as i128;
        }
        Some(Frac128 { n, d })
    }
}

impl Scalar for Frac128 {
    const EXACT: bool = true;
    fn zero() -> Self {
        Frac128 { n: 0, d: 1 }
    }
    fn one() -> Self {
        Frac128 { n: 1, d: 1 }
    }
    fn from_rational(q: &BigRational) -> Option<Self> {
        let n = q.numer().to_i128()?;
        let d = q.denom().to_i128()?;
        Frac128::new_reduced(n, d)
    }
    fn to_rational(&self) -> BigRational {
        BigRational::new(BigInt::from(self.n), BigInt::from(self.d))
    }
    fn try_add(&self, o: &Self) -> Option<Self> {
        let g = self.d.unsigned_abs().gcd(&o.d.unsigned_abs()) as i128;
        let rd = o.d / g;
        let n = self.n.checked_mul(rd)?.checked_add(o.n.checked_mul(self.d / g)?)?;
        let d = self.d.checked_mul(rd)?;
        Frac128::new_reduced(n, d)
    }
    fn try_sub(&self, o: &Self) -> Option<Self> {
        self.try_add(&o.neg())
    }
    fn try_mul(&self, o: &Self) -> Option<Self> {
        let g1 = self.n.unsigned_abs().gcd(&o.d.unsigned_abs()) as i128;
        let g2 = o.n.unsigned_abs().gcd(&self.d.unsigned_abs()) as i128;
        let n = (self.n / g1).checked_mul(o.n / g2)?;
        let d = (self.d / g2).checked_mul(o.d / g1)?;
        Frac128::new_reduced(n, d)
    }
    fn try_div(&self, o: &Self) -> Option<Self> {
        if o.n == 0 {
            return None;
        }
        self.try_mul(&Frac128 {
            n: o.d * o.n.signum(),
            d: o.n.unsigned_abs() as i128,
        })
    }
    fn neg(&self) -> Self {
        Frac128 { n: -self.n, d: self.d }
    }
    fn sign(&self) -> i8 {
        self.n.signum() as i8
    }
    fn ratio_lt(&self, o: &Self) -> bool {
        // a/b < c/d with b,d > 0; compare via i128 -> may overflow, widen.
        let l = (self.n as i64 as i128 == self.n && o.d as i64 as i128 == o.d)
            .then(|| self.n * o.d);
        match l {
            Some(lhs) if o.n as i64 as i128 == o.n && self.d as i64 as i128 == self.d => {
                lhs < o.n * self.d
            }
            _ => {
                // widen through BigInt; rare
                BigInt::from(self.n) * BigInt::from(o.d) < BigInt::from(o.n) * BigInt::from(self.d)
            }
        }
    }
}

impl Scalar for BigRational {
    const EXACT: bool = true;
    fn zero() -> Self {
        <BigRational as Zero>::zero()
    }
    fn one() -> Self {
        <BigRational as One>::one()
    }
    fn from_rational(q: &BigRational) -> Option<Self> {
        Some(q.clone())
    }
    fn to_rational(&self) -> BigRational {
        self.clone()
    }
    fn try_add(&self, o: &Self) -> Option<Self> {
        Some(self + o)
    }
    fn try_sub(&self, o: &Self) -> Option<Self> {
        Some(self - o)
    }
    fn try_mul(&self, o: &Self) -> Option<Self> {
        Some(self * o)
    }
    fn try_div(&self, o: &Self) -> Option<Self> {
        if o.is_zero() {
            None
        } else {
            Some(self / o)
        }
    }
    fn neg(&self) -> Self {
        -self
    }
    fn sign(&self) -> i8 {
        if Signed::is_positive(self) {
            1
        } else if Signed::is_negative(self) {
            -1
        } else {
            0
        }
    }
    fn ratio_lt(&self, o: &Self) -> bool {
        self < o
    }
}

// ---------------------------------------------------------------------------
// Simplex core
// ---------------------------------------------------------------------------

#[derive(Debug)]
enum SimplexOutcome<T> {
    Optimal {
        primal: Vec<T>,    // structural columns (normalized space)
        dual: Vec<T>,      // per internal row, internal sign convention
        objective: T,      // internal (minimize) objective, without constant
    },
    Infeasible,
    Unbounded,
}

#[derive(Debug)]
enum SimplexFailure {
    Overflow,
}

/// Normalized problem: min c.x, rows A x (rel) b, x >= 0.
struct NormLp<T> {
    c: Vec<T>,
    rows: Vec<(Vec<T>, Relation, T)>,
}

struct Tableau<T> {
    m: usize,
    ncols: usize, // without rhs
    nstruct: usize,
    rows: Vec<Vec<T>>, // m x (ncols+1), last entry rhs
    obj: Vec<T>,       // ncols+1, last entry = -objective value
    basis: Vec<usize>,
    art_start: usize, // columns >= art_start are artificial
    unit_col: Vec<(usize, bool)>, // per row: (initial unit column, negated?)
}

fn simplex<T: Scalar>(lp: &NormLp<T>) -> Result<SimplexOutcome<T>, SimplexFailure> {
    let m = lp.rows.len();
    let nstruct = lp.c.len();
    let of = || SimplexFailure::Overflow;

    // Row normalization: rhs >= 0.
    let mut rows = Vec::with_capacity(m);
    for (coeffs, rel, rhs) in lp.rows.iter() {
        if rhs.sign() < 0 {
            let c: Vec<T> = coeffs.iter().map(|v| v.neg()).collect();
            let r = match rel {
                Relation::Le => Relation::Ge,
                Relation::Eq => Relation::Eq,
                Relation::Ge => Relation::Le,
            };
            rows.push((c, r, rhs.neg()));
        } else {
            rows.push((coeffs.clone(), *rel, rhs.clone()));
        }
    }

    // Column layout: structural | slack/surplus | artificial.
    let n_ineq = rows.iter().filter(|(_, r, _)| *r != Relation::Eq).count();
    let n_art = rows.iter().filter(|(_, r, _)| *r != Relation::Le).count();
    let slack_start = nstruct;
    let art_start = nstruct + n_ineq;
    let ncols = art_start + n_art;

    let mut tab = Tableau {
        m,
        ncols,
        nstruct,
        rows: vec![vec![T::zero(); ncols + 1]; m],
        obj: vec![T::zero(); ncols + 1],
        basis: vec![0; m],
        art_start,
        unit_col: vec![(0, false); m],
    };

    let mut next_slack = slack_start;
    let mut next_art = art_start;
    for (i, (coeffs, rel, rhs)) in rows.iter().enumerate() {
        for (j, v) in coeffs.iter().enumerate() {
            tab.rows[i][j] = v.clone();
        }
        tab.rows[i][ncols] = rhs.clone();
        match rel {
            Relation::Le => {
                tab.rows[i][next_slack] = T::one();
                tab.basis[i] = next_slack;
                tab.unit_col[i] = (next_slack, false);
                next_slack += 1;
            }
            Relation::Ge => {
                tab.rows[i][next_slack] = T::one().neg();
                tab.unit_col[i] = (next_slack, true);
                next_slack += 1;
                tab.rows[i][next_art] = T::one();
                tab.basis[i] = next_art;
                next_art += 1;
            }
            Relation::Eq => {
                tab.rows[i][next_art] = T::one();
                tab.basis[i] = next_art;
                tab.unit_col[i] = (next_art, false);
                next_art += 1;
            }
        }
    }

    // Phase 1.
    if n_art > 0 {
        let art_costs: Vec<T> = (0..ncols)
            .map(|j| if j >= art_start { T::one() } else { T::zero() })
            .collect();
        recompute_obj(&mut tab, &art_costs).ok_or_else(of)?;
        pivot_to_optimality(&mut tab, false).ok_or_else(of)?;
        // Objective cell holds -(sum of artificials).
        if tab.obj[ncols].sign() != 0 {
            return Ok(SimplexOutcome::Infeasible);
        }
        // Drive basic artificials out where possible.
        for i in 0..m {
            if tab.basis[i] >= art_start {
                if let Some(j) = (0..art_start).find(|&j| !vanishes(&tab.rows[i][j])) {
                    pivot(&mut tab, i, j).ok_or_else(of)?;
                }
            }
        }
    }

    // Phase 2.
    let full_costs: Vec<T> = (0..ncols)
        .map(|j| if j < nstruct { lp.c[j].clone() } else { T::zero() })
        .collect();
    recompute_obj(&mut tab, &full_costs).ok_or_else(of)?;
    if !pivot_to_optimality(&mut tab, true).ok_or_else(of)? {
        return Ok(SimplexOutcome::Unbounded);
    }

    // Extract.
    let mut primal = vec![T::zero(); nstruct];
    for i in 0..m {
        if tab.basis[i] < nstruct {
            primal[tab.basis[i]] = tab.rows[i][ncols].clone();
        }
    }
    let mut dual = Vec::with_capacity(m);
    for i in 0..m {
        let (col, negated) = tab.unit_col[i];
        // reduced cost r = c_col - y_i * (+-1) with c_col = 0.
        let y = if negated { tab.obj[col].clone() } else { tab.obj[col].neg() };
        dual.push(y);
    }
    let objective = tab.obj[ncols].neg();
    Ok(SimplexOutcome::Optimal { primal, dual, objective })
}

fn recompute_obj<T: Scalar>(tab: &mut Tableau<T>, costs: &[T]) -> Option<()> {
    let ncols = tab.ncols;
    let mut obj = costs.to_vec();
    obj.push(T::zero());
    for i in 0..tab.m {
        let cb = &costs[tab.basis[i]];
        if vanishes(cb) {
            continue;
        }
        for j in 0..=ncols {
            if !vanishes(&tab.rows[i][j]) {
                obj[j] = obj[j].try_sub(&cb.try_mul(&tab.rows[i][j])?)?;
            }
        }
    }
    tab.obj = obj;
    Some(())
}

/// Bland's rule pivoting until no entering column remains. Returns
/// `Some(true)` at optimality, `Some(false)` when unbounded, `None` on
/// arithmetic overflow. During phase 2 (`bar_artificials`) artificial columns
/// may not enter.
fn pivot_to_optimality<T: Scalar>(tab: &mut Tableau<T>, bar_artificials: bool) -> Option<bool> {
    let mut iters = 0u64;
    loop {
        iters += 1;
        if iters % 1000 == 0 && std::env::var("LP_TRACE").is_ok() {
            eprintln!("pivot iteration {iters} (m={}, ncols={})", tab.m, tab.ncols);
        }
        let limit = if bar_artificials { tab.art_start } else { tab.ncols };
        // Bland: smallest-index column with negative reduced cost.
        let entering = (0..limit).find(|&j| tab.obj[j].sign() < 0);
        let Some(j) = entering else {
            return Some(true);
        };
        // Ratio test; Bland tie-break on the basic variable index.
        let mut best: Option<(T, usize, usize)> = None; // (ratio, basisvar, row)
        for i in 0..tab.m {
            if tab.rows[i][j].sign() > 0 {
                let ratio = tab.rows[i][tab.ncols].try_div(&tab.rows[i][j])?;
                let replace = match &best {
                    None => true,
                    Some((r, bv, _)) => {
                        ratio.ratio_lt(r) || (!r.ratio_lt(&ratio) && tab.basis[i] < *bv)
                    }
                };
                if replace {
                    best = Some((ratio, tab.basis[i], i));
                }
            }
        }
        let Some((_, _, row)) = best else {
            return Some(false);
        };
        pivot(tab, row, j)?;
    }
}

fn pivot<T: Scalar>(tab: &mut Tableau<T>, row: usize, col: usize) -> Option<()> {
    let ncols = tab.ncols;
    let piv = tab.rows[row][col].clone();
    for j in 0..=ncols {
        tab.rows[row][j] = tab.rows[row][j].try_div(&piv)?;
    }
    for i in 0..tab.m {
        if i != row && !vanishes(&tab.rows[i][col]) {
            let factor = tab.rows[i][col].clone();
            for j in 0..=ncols {
                if !vanishes(&tab.rows[row][j]) {
                    let delta = factor.try_mul(&tab.rows[row][j])?;
                    tab.rows[i][j] = tab.rows[i][j].try_sub(&delta)?;
                }
            }
            tab.rows[i][col] = T::zero();
        }
    }
    if !vanishes(&tab.obj[col]) {
        let factor = tab.obj[col].clone();
        for j in 0..=ncols {
            if !vanishes(&tab.rows[row][j]) {
                let delta = factor.try_mul(&tab.rows[row][j])?;
                tab.obj[j] = tab.obj[j].try_sub(&delta)?;
            }
        }
        tab.obj[col] = T::zero();
    }
    tab.basis[row] = col;
    Some(())
}

// ---------------------------------------------------------------------------
// Problem normalization and the public solve API
// ---------------------------------------------------------------------------

enum VarKind {
    Shifted(BigRational), // x = l + x'
    Split(usize),         // x = x'_pos - x'_neg, value holds pos column; neg = pos+1
}

struct Normalized {
    kinds: Vec<VarKind>,
    ncols: usize,
    c: Vec<BigRational>,
    rows: Vec<(Vec<BigRational>, Relation, BigRational)>,
    obj_const: BigRational,
    n_user_rows: usize,
    maximize: bool,
}

impl LinearProgram {
    pub fn new(sense: Sense, nvars: usize) -> Self {
        LinearProgram {
            sense,
            objective: vec![rat(0); nvars],
            rows: Vec::new(),
            lower: vec![Some(rat(0)); nvars],
            upper: vec![None; nvars],
        }
    }

    pub fn nvars(&self) -> usize {
        self.objective.len()
    }

    pub fn push_row(&mut self, coeffs: Vec<BigRational>, rel: Relation, rhs: BigRational) {
        self.rows.push(Row { coeffs, rel, rhs });
    }

    /// Mark a variable as free (no lower bound).
    pub fn set_free(&mut self, j: usize) {
        self.lower[j] = None;
    }

    fn validate(&self) -> Result<(), LpError> {
        let n = self.nvars();
        for (i, row) in self.rows.iter().enumerate() {
            if row.coeffs.len() != n {
                return Err(LpError::RowDimension(i, row.coeffs.len(), n));
            }
        }
        for j in 0..n {
            if self.lower[j].is_none() && self.upper[j].is_some() {
                return Err(LpError::UnsupportedBounds(j));
            }
        }
        Ok(())
    }

    fn normalize(&self) -> Result<Normalized, LpError> {
        self.validate()?;
        let n = self.nvars();
        let maximize = self.sense == Sense::Maximize;
        let mut kinds = Vec::with_capacity(n);
        let mut col = 0usize;
        for j in 0..n {
            match &self.lower[j] {
                Some(l) => {
                    kinds.push(VarKind::Shifted(l.clone()));
                    col += 1;
                }
                None => {
                    kinds.push(VarKind::Split(col));
                    col += 2;
                }
            }
        }
        let ncols = col;
        let mut c = vec![rat(0); ncols];
        let mut obj_const = rat(0);
        for j in 0..n {
            let cj = if maximize { -&self.objective[j] } else { self.objective[j].clone() };
            match &kinds[j] {
                VarKind::Shifted(l) => {
                    let idx = column_of(&kinds, j);
                    c[idx] = cj.clone();
                    obj_const += &cj * l;
                }
                VarKind::Split(p) => {
                    c[*p] = cj.clone();
                    c[*p + 1] = -cj;
                }
            }
        }
        let mut rows = Vec::new();
        for row in self.rows.iter() {
            let mut coeffs = vec![rat(0); ncols];
            let mut rhs = row.rhs.clone();
            for j in 0..n {
                let a = &row.coeffs[j];
                if a.is_zero() {
                    continue;
                }
                match &kinds[j] {
                    VarKind::Shifted(l) => {
                        let idx = column_of(&kinds, j);
                        coeffs[idx] = a.clone();
                        rhs -= a * l;
                    }
                    VarKind::Split(p) => {
                        coeffs[*p] = a.clone();
                        coeffs[*p + 1] = -a.clone();
                    }
                }
            }
            rows.push((coeffs, row.rel, rhs));
        }
        let n_user_rows = rows.len();
        // Upper bounds become rows x' <= u - l.
        for j in 0..n {
            if let Some(u) = &self.upper[j] {
                let l = self.lower[j].as_ref().expect("validated");
                let mut coeffs = vec![rat(0); ncols];
                coeffs[column_of(&kinds, j)] = rat(1);
                rows.push((coeffs, Relation::Le, u - l));
            }
        }
        Ok(Normalized { kinds, ncols, c, rows, obj_const, n_user_rows, maximize })
    }

    /// Solve in the requested mode.
    pub fn solve(&self, mode: ArithMode) -> Result<LpSolution, LpError> {
        match mode {
            ArithMode::ExactRational => self.solve_rational(),
            ArithMode::Float64 => self.solve_float(),
        }
    }

    /// Exact solve: i128 fractions first, arbitrary precision on overflow.
    pub fn solve_rational(&self) -> Result<LpSolution, LpError> {
        let norm = self.normalize()?;
        match run::<Frac128>(&norm) {
            Ok(sol) => Ok(sol),
            Err(SimplexFailure::Overflow) => {
                run::<BigRational>(&norm).map_err(|_| unreachable!("bigint cannot overflow"))
            }
        }
    }

    /// Float solve with residual verification; on failure retries exactly
    /// when the LP is at most 2000 x 2000.
    pub fn solve_float(&self) -> Result<LpSolution, LpError> {
        let norm = self.normalize()?;
        let sol = run::<f64>(&norm).map_err(|_| LpError::FloatUnstable)?;
        if sol.status != LpStatus::Optimal || self.float_residuals_ok(&sol) {
            return Ok(sol);
        }
        if self.nvars() <= 2000 && self.rows.len() <= 2000 {
            return self.solve_rational();
        }
        Err(LpError::FloatUnstable)
    }

    fn float_residuals_ok(&self, sol: &LpSolution) -> bool {
        let x: Vec<f64> = sol.primal.iter().map(|v| v.to_f64().unwrap_or(f64::NAN)).collect();
        let mut dual_obj = 0.0;
        for (row, y) in self.rows.iter().zip(sol.dual.iter()) {
            let lhs: f64 = row
                .coeffs
                .iter()
                .zip(x.iter())
                .map(|(a, v)| a.to_f64().unwrap_or(0.0) * v)
                .sum();
            let b = row.rhs.to_f64().unwrap_or(0.0);
            let viol = match row.rel {
                Relation::Le => (lhs - b).max(0.0),
                Relation::Ge => (b - lhs).max(0.0),
                Relation::Eq => (lhs - b).abs(),
            };
            let scale = 1.0 + b.abs();
            if viol > 1e-9 * scale {
                return false;
            }
            dual_obj += sol.dual_f64(y) * b;
        }
        let obj = sol.objective_f64();
        // Duality gap only meaningful without bound rows folded in.
        if self.upper.iter().all(|u| u.is_none())
            && self.lower.iter().all(|l| l.as_ref().is_some_and(|v| v.is_zero()))
            && (obj - dual_obj).abs() > 1e-7 * (1.0 + obj.abs())
        {
            return false;
        }
        true
    }
}

impl LpSolution {
    fn dual_f64(&self, y: &BigRational) -> f64 {
        y.to_f64().unwrap_or(f64::NAN)
    }
}

fn column_of(kinds: &[VarKind], j: usize) -> usize {
    let mut col = 0;
    for kind in kinds.iter().take(j) {
        col += match kind {
            VarKind::Shifted(_) => 1,
            VarKind::Split(_) => 2,
        };
    }
    match &kinds[j] {
        VarKind::Shifted(_) => col,
        VarKind::Split(p) => *p,
    }
}

fn run<T: Scalar>(norm: &Normalized) -> Result<LpSolution, SimplexFailure> {
    let mode = if T::EXACT { ArithMode::ExactRational } else { ArithMode::Float64 };
    let c: Option<Vec<T>> = norm.c.iter().map(T::from_rational).collect();
    let c = c.ok_or(SimplexFailure::Overflow)?;
    let mut rows = Vec::with_capacity(norm.rows.len());
    for (coeffs, rel, rhs) in norm.rows.iter() {
        let cv: Option<Vec<T>> = coeffs.iter().map(T::from_rational).collect();
        rows.push((
            cv.ok_or(SimplexFailure::Overflow)?,
            *rel,
            T::from_rational(rhs).ok_or(SimplexFailure::Overflow)?,
        ));
    }
    let lp = NormLp { c, rows };
    match simplex(&lp)? {
        SimplexOutcome::Infeasible => Ok(LpSolution::empty(LpStatus::Infeasible, mode)),
        SimplexOutcome::Unbounded => Ok(LpSolution::empty(LpStatus::Unbounded, mode)),
        SimplexOutcome::Optimal { primal, dual, objective } => {
            // Map structural columns back to user variables.
            let mut x = Vec::with_capacity(norm.kinds.len());
            for (j, kind) in norm.kinds.iter().enumerate() {
                match kind {
                    VarKind::Shifted(l) => {
                        let idx = column_of(&norm.kinds, j);
                        x.push(primal[idx].to_rational() + l);
                    }
                    VarKind::Split(p) => {
                        x.push(primal[*p].to_rational() - primal[*p + 1].to_rational());
                    }
                }
            }
            let mut obj = objective.to_rational() + &norm.obj_const;
            let mut y: Vec<BigRational> = dual
                .iter()
                .take(norm.n_user_rows)
                .map(|v| v.to_rational())
                .collect();
            if norm.maximize {
                obj = -obj;
                for v in y.iter_mut() {
                    *v = -v.clone();
                }
            }
            Ok(LpSolution {
                status: LpStatus::Optimal,
                objective: obj,
                primal: x,
                dual: y,
                mode,
            })
        }
    }
}

/// Plain-text dump for inspection.
pub fn dump_text(lp: &LinearProgram) -> String {
    use std::fmt::Write;
    let mut s = String::new();
    let sense = match lp.sense {
        Sense::Minimize => "min",
        Sense::Maximize => "max",
    };
    let term = |c: &BigRational, j: usize| format!("{c}*x{j}");
    writeln!(
        s,
        "{sense} {}",
        lp.objective
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(j, c)| term(c, j))
            .collect::<Vec<_>>()
            .join(" + ")
    )
    .unwrap();
    for row in lp.rows.iter() {
        writeln!(
            s,
            "  {} {} {}",
            row.coeffs
                .iter()
                .enumerate()
                .filter(|(_, c)| !c.is_zero())
                .map(|(j, c)| term(c, j))
                .collect::<Vec<_>>()
                .join(" + "),
            row.rel,
            row.rhs
        )
        .unwrap();
    }
    s
}

// ---------------------------------------------------------------------------
// Cutting-plane driver
// ---------------------------------------------------------------------------

/// A violated constraint produced by a separation oracle, in user-variable
/// space of the base LP.
#[derive(Clone, Debug)]
pub struct CutRow {
    pub coeffs: Vec<BigRational>,
    pub rel: Relation,
    pub rhs: BigRational,
    pub violation: BigRational,
}

/// Separation oracle: given the current optimal point of the relaxation,
/// return a most-violated row, or `None` when every constraint it represents
/// is satisfied within the driver's tolerance.
pub trait SeparationOracle {
    fn most_violated(&mut self, point: &[BigRational]) -> Option<CutRow>;
}

#[derive(Debug)]
pub struct CutResult {
    pub solution: LpSolution,
    /// All generated rows, for auditability.
    pub rows: Vec<CutRow>,
    /// False when the row cap stopped generation before the oracle was clean.
    pub converged: bool,
    pub iterations: usize,
}

pub const DEFAULT_ROW_CAP: usize = 10_000;

/// Lazily-constrained solve: repeatedly solve the relaxation in rational mode
/// and add the oracle's most violated row until none remains (or the row cap
/// is hit, in which case the best relaxation is returned with
/// `converged = false`).
pub fn solve_with_cuts(
    base: &LinearProgram,
    oracle: &mut dyn SeparationOracle,
    row_cap: usize,
) -> Result<CutResult, LpError> {
    let mut lp = base.clone();
    let mut rows = Vec::new();
    let mut iterations = 0usize;
    loop {
        let solution = lp.solve_rational()?;
        iterations += 1;
        if solution.status != LpStatus::Optimal {
            return Ok(CutResult { solution, rows, converged: true, iterations });
        }
        match oracle.most_violated(&solution.primal) {
            None => {
                return Ok(CutResult { solution, rows, converged: true, iterations });
            }
            Some(cut) => {
                if rows.len() >= row_cap {
                    return Ok(CutResult { solution, rows, converged: false, iterations });
                }
                lp.push_row(cut.coeffs.clone(), cut.rel, cut.rhs.clone());
                rows.push(cut);
            }
        }
    }
}

/// Convenience constructors for rational constants.
pub fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lp(sense: Sense, c: &[i64]) -> LinearProgram {
        let mut p = LinearProgram::new(sense, c.len());
        p.objective = c.iter().map(|&v| rat(v)).collect();
        p
    }

    fn row(p: &mut LinearProgram, coeffs: &[i64], rel: Relation, rhs: i64) {
        p.push_row(coeffs.iter().map(|&v| rat(v)).collect(), rel, rat(rhs));
    }

    #[test]
    fn min_x_at_least_3() {
        let mut p = lp(Sense::Minimize, &[1]);
        row(&mut p, &[1], Relation::Ge, 3);
        let s = p.solve_rational().unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert_eq!(s.objective, rat(3));
        assert_eq!(s.primal, vec![rat(3)]);
        // >= row in a min problem: nonnegative dual; y*b = objective.
        assert_eq!(s.dual, vec![rat(1)]);
    }

    #[test]
    fn max_x_plus_y_box() {
        let mut p = lp(Sense::Maximize, &[1, 1]);
        row(&mut p, &[1, 1], Relation::Le, 1);
        let s = p.solve_rational().unwrap();
        assert_eq!(s.objective, rat(1));
        assert_eq!(&s.primal[0] + &s.primal[1], rat(1));
        assert_eq!(s.dual, vec![rat(1)]);
    }

    #[test]
    fn infeasible_detected() {
        let mut p = lp(Sense::Minimize, &[0]);
        row(&mut p, &[1], Relation::Le, -1);
        let s = p.solve_rational().unwrap();
        assert_eq!(s.status, LpStatus::Infeasible);
    }

    #[test]
    fn unbounded_detected() {
        let mut p = lp(Sense::Maximize, &[1]);
        row(&mut p, &[-1], Relation::Le, 1);
        let s = p.solve_rational().unwrap();
        assert_eq!(s.status, LpStatus::Unbounded);
    }

    #[test]
    fn degenerate_zero_rows() {
        let p = lp(Sense::Minimize, &[1, 0]);
        let s = p.solve_rational().unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert_eq!(s.objective, rat(0));
        let q = lp(Sense::Maximize, &[1]);
        assert_eq!(q.solve_rational().unwrap().status, LpStatus::Unbounded);
        // Empty objective with rows is fine too.
        let mut r0 = lp(Sense::Minimize, &[0, 0]);
        row(&mut r0, &[1, 1], Relation::Ge, 2);
        assert_eq!(r0.solve_rational().unwrap().status, LpStatus::Optimal);
    }

    #[test]
    fn free_variables_split() {
        // min x s.t. x >= -5, x free
        let mut p = lp(Sense::Minimize, &[1]);
        p.set_free(0);
        row(&mut p, &[1], Relation::Ge, -5);
        let s = p.solve_rational().unwrap();
        assert_eq!(s.objective, rat(-5));
        assert_eq!(s.primal, vec![rat(-5)]);
    }

    #[test]
    fn upper_bounds_as_rows() {
        let mut p = lp(Sense::Maximize, &[3, 2]);
        p.upper[0] = Some(rat(2));
        p.upper[1] = Some(rat(3));
        row(&mut p, &[1, 1], Relation::Le, 4);
        let s = p.solve_rational().unwrap();
        assert_eq!(s.objective, rat(10));
        assert_eq!(s.primal, vec![rat(2), rat(2)]);
    }

    #[test]
    fn shifted_lower_bounds() {
        let mut p = lp(Sense::Minimize, &[2]);
        p.lower[0] = Some(rat(7));
        let s = p.solve_rational().unwrap();
        assert_eq!(s.objective, rat(14));
        assert_eq!(s.primal, vec![rat(7)]);
    }

    #[test]
    fn float_mode_agrees_with_exact() {
        let mut p = lp(Sense::Maximize, &[5, 4]);
        row(&mut p, &[6, 4], Relation::Le, 24);
        row(&mut p, &[1, 2], Relation::Le, 6);
        let e = p.solve_rational().unwrap();
        let f = p.solve_float().unwrap();
        assert_eq!(e.status, LpStatus::Optimal);
        assert!((e.objective_f64() - f.objective_f64()).abs() < 1e-7);
        assert_eq!(e.objective, rat(21));
    }

    #[test]
    fn matching_pennies_through_cut_driver() {
        // Row player maximizes v with mixed strategy p over 2 actions;
        // columns arrive through the oracle: p.M_j >= v for payoff matrix
        // M = [[1,0],[0,1]].
        struct Oracle;
        impl SeparationOracle for Oracle {
            fn most_violated(&mut self, point: &[BigRational]) -> Option<CutRow> {
                let (p0, p1, v) = (&point[0], &point[1], &point[2]);
                let mut worst: Option<(BigRational, usize)> = None;
                for (col, lhs) in [(0usize, p0.clone()), (1usize, p1.clone())] {
                    let slack = v - &lhs; // violation of p.M_col - v >= 0
                    if slack > rat(0)
                        && worst.as_ref().is_none_or(|(w, _)| &slack > w)
                    {
                        worst = Some((slack, col));
                    }
                }
                worst.map(|(violation, col)| {
                    let mut coeffs = vec![rat(0); 3];
                    coeffs[col] = rat(1);
                    coeffs[2] = rat(-1);
                    CutRow { coeffs, rel: Relation::Ge, rhs: rat(0), violation }
                })
            }
        }
        let mut base = lp(Sense::Maximize, &[0, 0, 1]);
        row(&mut base, &[1, 1, 0], Relation::Eq, 1);
        row(&mut base, &[0, 0, 1], Relation::Le, 1); // win probability cap
        let res = solve_with_cuts(&base, &mut Oracle, DEFAULT_ROW_CAP).unwrap();
        assert!(res.converged);
        assert_eq!(res.solution.objective, ratio(1, 2));
    }

    #[test]
    fn cut_driver_with_clean_oracle_returns_base_optimum() {
        struct Never;
        impl SeparationOracle for Never {
            fn most_violated(&mut self, _point: &[BigRational]) -> Option<CutRow> {
                None
            }
        }
        let mut p = lp(Sense::Minimize, &[1]);
        row(&mut p, &[1], Relation::Ge, 2);
        let res = solve_with_cuts(&p, &mut Never, 10).unwrap();
        assert!(res.converged);
        assert_eq!(res.rows.len(), 0);
        assert_eq!(res.solution.objective, rat(2));
    }

    #[test]
    fn frac128_promotes_on_overflow() {
        // Large coefficients force i128 overflow during elimination; the
        // exact path must still return the right answer via BigRational.
        let big = BigRational::new(BigInt::from(u128::MAX) * 7 + 3, BigInt::from(11));
        let mut p = LinearProgram::new(Sense::Minimize, 2);
        p.objective = vec![rat(1), rat(1)];
        p.push_row(vec![big.clone(), rat(1)], Relation::Ge, big.clone());
        p.push_row(vec![rat(1), big.clone()], Relation::Ge, rat(1));
        let s = p.solve_rational().unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        // Feasibility of the reported point, exactly.
        let lhs0 = &big * &s.primal[0] + &s.primal[1];
        assert!(lhs0 >= big);
    }

    #[test]
    fn strong_duality_and_complementary_slackness_random_battery() {
        use crate::rng::Stream;
        let mut stream = Stream::new(2024);
        let mut optimal_seen = 0;
        let mut case = 0;
        while optimal_seen < 100 && case < 500 {
            case += 1;
            let minimize = case % 2 == 0;
            let n = 1 + stream.below(10) as usize;
            let m = 1 + stream.below(6) as usize;
            let mut p = LinearProgram::new(
                if minimize { Sense::Minimize } else { Sense::Maximize },
                n,
            );
            // Bounded by construction: min-LPs get nonnegative objectives,
            // max-LPs get a box row.
            p.objective = (0..n)
                .map(|_| {
                    if minimize {
                        rat(stream.below(6) as i64)
                    } else {
                        rat(stream.below(11) as i64 - 5)
                    }
                })
                .collect();
            for _ in 0..m {
                let coeffs: Vec<BigRational> =
                    (0..n).map(|_| rat(stream.below(7) as i64 - 3)).collect();
                let rel = match stream.below(3) {
                    0 => Relation::Le,
                    1 => Relation::Ge,
                    _ => Relation::Eq,
                };
                p.push_row(coeffs, rel, rat(stream.below(9) as i64));
            }
            if !minimize {
                p.push_row(vec![rat(1); n], Relation::Le, rat(20));
            }
            let s = p.solve_rational().unwrap();
            if s.status != LpStatus::Optimal {
                continue;
            }
            optimal_seen += 1;
            // Strong duality: c.x == y.b exactly.
            let primal_obj = &s.objective;
            let dual_obj: BigRational = p
                .rows
                .iter()
                .zip(s.dual.iter())
                .map(|(r, y)| &r.rhs * y)
                .sum();
            assert_eq!(primal_obj, &dual_obj, "case {case}");
            // Feasibility and complementary slackness, exactly.
            for (r, y) in p.rows.iter().zip(s.dual.iter()) {
                let lhs: BigRational =
                    r.coeffs.iter().zip(s.primal.iter()).map(|(a, x)| a * x).sum();
                let slack = &lhs - &r.rhs;
                match r.rel {
                    Relation::Le => assert!(slack <= rat(0)),
                    Relation::Ge => assert!(slack >= rat(0)),
                    Relation::Eq => assert!(slack.is_zero()),
                }
                assert!((y * &slack).is_zero(), "case {case}: y*slack != 0");
                // Dual sign convention.
                let sgn = y.sign();
                match (p.sense, r.rel) {
                    (Sense::Minimize, Relation::Ge) => assert!(sgn >= 0),
                    (Sense::Minimize, Relation::Le) => assert!(sgn <= 0),
                    (Sense::Maximize, Relation::Ge) => assert!(sgn <= 0),
                    (Sense::Maximize, Relation::Le) => assert!(sgn >= 0),
                    _ => {}
                }
            }
            // Dual feasibility: reduced costs have the right sign.
            for j in 0..n {
                let ya: BigRational = p
                    .rows
                    .iter()
                    .zip(s.dual.iter())
                    .map(|(r, y)| &r.coeffs[j] * y)
                    .sum();
                let rc = &p.objective[j] - &ya;
                match p.sense {
                    Sense::Minimize => assert!(rc >= rat(0), "case {case} var {j}"),
                    Sense::Maximize => assert!(rc <= rat(0), "case {case} var {j}"),
                }
                if s.primal[j] != rat(0) {
                    assert!(rc.is_zero(), "case {case} var {j}: x>0 needs rc=0");
                }
            }
        }
        assert_eq!(optimal_seen, 100, "battery too degenerate after {case} attempts");
    }

    #[test]
    fn explicit_dual_solve_matches_dual_vector() {
        use crate::rng::Stream;
        // min c.x, Ax >= b, x >= 0  <->  max b.y, A^T y <= c, y >= 0.
        let mut stream = Stream::new(99);
        let mut checked = 0;
        for case in 0..300 {
            if checked >= 100 {
                break;
            }
            let n = 1 + stream.below(10) as usize;
            let m = 1 + stream.below(5) as usize;
            let mut p = LinearProgram::new(Sense::Minimize, n);
            p.objective = (0..n).map(|_| rat(stream.below(9) as i64 + 1)).collect();
            let mut a = vec![vec![rat(0); n]; m];
            let mut b = vec![rat(0); m];
            for i in 0..m {
                for j in 0..n {
                    a[i][j] = rat(stream.below(5) as i64 - 1);
                }
                b[i] = rat(stream.below(8) as i64);
                p.push_row(a[i].clone(), Relation::Ge, b[i].clone());
            }
            let s = p.solve_rational().unwrap();
            if s.status != LpStatus::Optimal {
                continue;
            }
            let mut d = LinearProgram::new(Sense::Maximize, m);
            d.objective = b.clone();
            for j in 0..n {
                let coeffs: Vec<BigRational> = (0..m).map(|i| a[i][j].clone()).collect();
                d.push_row(coeffs, Relation::Le, p.objective[j].clone());
            }
            let t = d.solve_rational().unwrap();
            assert_eq!(t.status, LpStatus::Optimal, "case {case}");
            assert_eq!(t.objective, s.objective, "case {case}");
            // The primal's dual vector is feasible and optimal for the dual LP.
            let dual_val: BigRational =
                b.iter().zip(s.dual.iter()).map(|(bi, yi)| bi * yi).sum();
            assert_eq!(dual_val, s.objective, "case {case}");
            checked += 1;
        }
        assert!(checked >= 100, "only {checked} optimal dual cases");
    }
}
