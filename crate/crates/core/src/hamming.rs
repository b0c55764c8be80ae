//! Exact combinatorics on the Hamming cube: big-integer binomials, the
//! hypergeometric distribution P_{k,m,r}, sphere/ball intersection counts,
//! and the symmetry / monotonicity / concentration / outer-layer checks used
//! by the Hamming-ball intersection analysis.
//!
//! All values are exact (`BigUint` counts, `BigRational` ratios). Radius and
//! distance rounding for the lemma-regime parameter family is centralized in
//! [`lemma_params`]: logarithms are base 2 and square roots are ceiled.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum HammingError {
    #[error("invalid parameters: {0}")]
    Params(String),
    #[error("length cap exceeded: {0} > {1}")]
    LengthCap(u64, u64),
}

/// Exact binomial coefficient, 0 when j > k.
pub fn binomial(k: u64, j: u64) -> BigUint {
    if j > k {
        return BigUint::zero();
    }
    let j = j.min(k - j);
    let mut acc = BigUint::one();
    for i in 1..=j {
        acc = acc * BigUint::from(k - j + i) / BigUint::from(i);
    }
    acc
}

fn big_ratio(num: BigUint, den: BigUint) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// ceil(sqrt(x)) on integers.
pub fn ceil_sqrt(x: u64) -> u64 {
    let s = x.isqrt();
    if s * s < x {
        s + 1
    } else {
        s
    }
}

/// Base-2 logarithm used in the radius formulas; exact for powers of two.
pub fn log2_of(k: u64) -> f64 {
    if k.is_power_of_two() {
        k.trailing_zeros() as f64
    } else {
        (k as f64).log2()
    }
}

/// Parameters (k, m, r) of the hypergeometric distribution P_{k,m,r}:
/// the probability that a uniform r-subset of [k] hits j out of m marked
/// coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HypergeomParams {
    pub k: u64,
    pub m: u64,
    pub r: u64,
}

impl HypergeomParams {
    pub fn new(k: u64, m: u64, r: u64) -> Result<Self, HammingError> {
        if k == 0 || m > k || r > k {
            return Err(HammingError::Params(format!(
                "need 0 < k, m <= k, r <= k; got k={k}, m={m}, r={r}"
            )));
        }
        Ok(HypergeomParams { k, m, r })
    }

    /// Support [lo, hi] of j.
    pub fn support(&self) -> (u64, u64) {
        (self.r.saturating_sub(self.k - self.m), self.m.min(self.r))
    }

    /// Expected value E = m r / k.
    pub fn expectation(&self) -> BigRational {
        big_ratio(
            BigUint::from(self.m) * BigUint::from(self.r),
            BigUint::from(self.k),
        )
    }
}

/// Tabulated distribution: numerators C(m,j) C(k-m, r-j) over the support and
/// the common denominator C(k,r).
#[derive(Clone, Debug)]
pub struct Hypergeom {
    pub params: HypergeomParams,
    lo: u64,
    numerators: Vec<BigUint>,
    total: BigUint,
}

impl Hypergeom {
    pub fn new(params: HypergeomParams) -> Self {
        let (k, m, r) = (params.k, params.m, params.r);
        let (lo, hi) = params.support();
        let km = k - m;
        let mut numerators = Vec::with_capacity((hi - lo + 1) as usize);
        let mut left = binomial(m, lo);
        let mut right = binomial(km, r - lo);
        for j in lo..=hi {
            numerators.push(&left * &right);
            if j < hi {
                // C(m, j+1) = C(m, j) (m-j)/(j+1)
                left = left * BigUint::from(m - j) / BigUint::from(j + 1);
                // C(km, r-j-1) = C(km, r-j) (r-j)/(km-r+j+1)
                right = right * BigUint::from(r - j) / BigUint::from(km - (r - j) + 1);
            }
        }
        let total = binomial(k, r);
        debug_assert_eq!(
            numerators.iter().sum::<BigUint>(),
            total,
            "Vandermonde identity"
        );
        Hypergeom { params, lo, numerators, total }
    }

    /// Exact pmf value at j (zero outside the support).
    pub fn pmf(&self, j: u64) -> BigRational {
        big_ratio(self.numerator(j), self.total.clone())
    }

    fn numerator(&self, j: u64) -> BigUint {
        let (lo, hi) = self.params.support();
        if j < lo || j > hi {
            BigUint::zero()
        } else {
            self.numerators[(j - self.lo) as usize].clone()
        }
    }

    /// Exact sum of pmf over lo..=hi (intersected with the support).
    pub fn mass(&self, lo: u64, hi: u64) -> BigRational {
        let (slo, shi) = self.params.support();
        let a = lo.max(slo);
        let b = hi.min(shi);
        if a > b {
            return BigRational::zero();
        }
        let sum: BigUint = (a..=b).map(|j| self.numerator(j)).sum();
        big_ratio(sum, self.total.clone())
    }
}

/// Exact pmf without building the table.
pub fn hypergeom_pmf(params: HypergeomParams, j: u64) -> BigRational {
    let (k, m, r) = (params.k, params.m, params.r);
    if j > m || j > r || r - j > k - m {
        return BigRational::zero();
    }
    big_ratio(binomial(m, j) * binomial(k - m, r - j), binomial(k, r))
}

/// Size of the intersection of a Hamming sphere S_a(r_sphere) with a ball
/// B_b(r_ball), where d(a,b) = m. A point at distance r' from a that flips j
/// of the m coordinates where a and b differ sits at distance m + r' - 2j
/// from b.
pub fn sphere_ball_intersection_radii(k: u64, m: u64, r_sphere: u64, r_ball: u64) -> BigUint {
    if m > k || r_sphere > k {
        return BigUint::zero();
    }
    let km = k - m;
    let lo_support = r_sphere.saturating_sub(km);
    let hi = m.min(r_sphere);
    // need m + r_sphere - 2j <= r_ball, i.e. j >= ceil((m + r_sphere - r_ball)/2)
    let need = (m + r_sphere).saturating_sub(r_ball);
    let lo = lo_support.max(need.div_ceil(2));
    if lo > hi {
        return BigUint::zero();
    }
    let mut count = BigUint::zero();
    for j in lo..=hi {
        count += binomial(m, j) * binomial(km, r_sphere - j);
    }
    count
}

/// Sphere/ball intersection at equal radius r with centers at distance m:
/// exact count and its ratio to |S_a(r)| = C(k,r).
pub fn sphere_ball_intersection(
    k: u64,
    m: u64,
    r: u64,
) -> Result<(BigUint, BigRational), HammingError> {
    if m > k || r > k {
        return Err(HammingError::Params(format!(
            "need m <= k and r <= k; got k={k}, m={m}, r={r}"
        )));
    }
    let count = sphere_ball_intersection_radii(k, m, r, r);
    let total = binomial(k, r);
    let ratio = big_ratio(count.clone(), total);
    Ok((count, ratio))
}

/// Ball/ball intersection at equal radius r, centers at distance m, as a
/// count and its ratio to the ball volume.
pub fn ball_ball_intersection(k: u64, m: u64, r: u64) -> (BigUint, BigRational) {
    let mut count = BigUint::zero();
    for rp in 0..=r.min(k) {
        count += sphere_ball_intersection_radii(k, m, rp, r);
    }
    let total: BigUint = (0..=r.min(k)).map(|j| binomial(k, j)).sum();
    let ratio = big_ratio(count.clone(), total);
    (count, ratio)
}

/// Brute-force oracle: |{z : d(a,z) = r and d(b,z) <= r}| by full enumeration
/// of the k-cube.
pub fn brute_force_intersection(a: u64, b: u64, k: u64, r: u32) -> Result<u64, HammingError> {
    if k > 20 {
        return Err(HammingError::LengthCap(k, 20));
    }
    let mut count = 0u64;
    for z in 0..(1u64 << k) {
        if (a ^ z).count_ones() == r && (b ^ z).count_ones() <= r {
            count += 1;
        }
    }
    Ok(count)
}

/// Lemma-regime parameter family derived from k: distance m = floor(k/log2 k)
/// and radius r = k/2 - ceil(sqrt(k log2 k)). `m_even` rounds m down to even
/// for the symmetry check, whose center assumes an even m.
#[derive(Clone, Copy, Debug)]
pub struct LemmaRegime {
    pub k: u64,
    pub m: u64,
    pub m_even: u64,
    pub r: u64,
    pub sqrt_klogk: u64,
}

pub fn lemma_params(k: u64) -> Result<LemmaRegime, HammingError> {
    if k < 4 {
        return Err(HammingError::Params(format!("k={k} too small")));
    }
    let log2k = log2_of(k);
    let m = (k as f64 / log2k).floor() as u64;
    let sqrt_klogk = ceil_sqrt((k as f64 * log2k).ceil() as u64);
    if k / 2 <= sqrt_klogk {
        return Err(HammingError::Params(format!(
            "radius k/2 - sqrt(k log2 k) is not positive at k={k}"
        )));
    }
    let r = k / 2 - sqrt_klogk;
    Ok(LemmaRegime { k, m, m_even: m - m % 2, r, sqrt_klogk })
}

/// Result of the symmetry check: minimum over 0 <= j <= j_max of
/// P(c + j) / P(c - j) with c = floor(m/2).
#[derive(Clone, Debug)]
pub struct SymmetricReport {
    pub center: u64,
    pub j_max: u64,
    pub min_ratio: BigRational,
    pub min_at: u64,
    /// Set when a probed pmf value was zero; `min_ratio` is 0 and `min_at`
    /// points at the offending offset.
    pub zero_hit: bool,
    /// True when m is odd and the center was shifted down half a step.
    pub half_step_shift: bool,
}

pub fn check_symmetric(
    params: HypergeomParams,
    j_max: u64,
) -> Result<SymmetricReport, HammingError> {
    let dist = Hypergeom::new(params);
    let center = params.m / 2;
    if j_max > center {
        return Err(HammingError::Params(format!(
            "j_max={j_max} exceeds center {center}"
        )));
    }
    let mut min_ratio: Option<(BigRational, u64)> = None;
    for j in 0..=j_max {
        let up = dist.numerator(center + j);
        let down = dist.numerator(center - j);
        if down.is_zero() || up.is_zero() {
            return Ok(SymmetricReport {
                center,
                j_max,
                min_ratio: BigRational::zero(),
                min_at: j,
                zero_hit: true,
                half_step_shift: params.m % 2 == 1,
            });
        }
        let ratio = big_ratio(up, down);
        if min_ratio.as_ref().is_none_or(|(best, _)| &ratio < best) {
            min_ratio = Some((ratio, j));
        }
    }
    let (min_ratio, min_at) = min_ratio.expect("at least j=0 probed");
    Ok(SymmetricReport {
        center,
        j_max,
        min_ratio,
        min_at,
        zero_hit: false,
        half_step_shift: params.m % 2 == 1,
    })
}

/// Result of the monotonicity check: P increases up to the mode and decreases
/// after it; in the lemma regime the mode sits within one step of E = mr/k.
#[derive(Clone, Debug)]
pub struct MonotoneReport {
    pub mode: u64,
    pub unimodal: bool,
    pub first_violation: Option<u64>,
    pub mode_near_expectation: bool,
}

pub fn check_monotone(params: HypergeomParams) -> MonotoneReport {
    let dist = Hypergeom::new(params);
    let (lo, hi) = params.support();
    let mut mode = lo;
    let mut best = dist.numerator(lo);
    for j in lo + 1..=hi {
        let v = dist.numerator(j);
        if v > best {
            best = v;
            mode = j;
        }
    }
    let mut first_violation = None;
    let mut prev = dist.numerator(lo);
    for j in lo + 1..=hi {
        let v = dist.numerator(j);
        let ok = if j <= mode { v >= prev } else { v <= prev };
        if !ok && first_violation.is_none() {
            first_violation = Some(j);
        }
        prev = v;
    }
    let e = params.expectation();
    let mode_q = BigRational::from_integer(BigInt::from(mode));
    let mode_near_expectation = (mode_q - e).abs() <= BigRational::one();
    MonotoneReport {
        mode,
        unimodal: first_violation.is_none(),
        first_violation,
        mode_near_expectation,
    }
}

/// Exact central mass sum_{|j - E| <= w} P(j).
pub fn tail_mass(params: HypergeomParams, width: u64) -> BigRational {
    let dist = Hypergeom::new(params);
    let e = params.expectation();
    let w = BigRational::from_integer(BigInt::from(width));
    let lo_q = (&e - &w).ceil();
    let hi_q = (&e + &w).floor();
    if hi_q < BigRational::zero() {
        return BigRational::zero();
    }
    let lo = lo_q.to_integer().to_u64().unwrap_or(0);
    let hi = hi_q.to_integer().to_u64().unwrap_or(0);
    dist.mass(lo, hi)
}

/// Outer-layer weight of the Hamming ball: the exact ratio
/// `sum_{j <= k/2 - c sqrt(k log2 k)} C(k,j) / sum_{j <= k/2 - sqrt(k log2 k)} C(k,j)`.
///
/// The literal constant c = 100 only yields a positive inner radius for
/// k around 2^21 and beyond; below that the scaled constant 3 is used and
/// flagged in the report.
#[derive(Clone, Debug)]
pub struct OuterLayerReport {
    pub k: u64,
    pub constant: u64,
    pub scaled: bool,
    pub inner_radius: u64,
    pub outer_radius: u64,
    pub ratio: BigRational,
}

pub fn outer_layer_mass(k: u64) -> Result<OuterLayerReport, HammingError> {
    let regime = lemma_params(k)?;
    let s = regime.sqrt_klogk;
    let (constant, scaled) = if k / 2 > 100 * s { (100u64, false) } else { (3u64, true) };
    if k / 2 <= constant * s {
        return Err(HammingError::Params(format!(
            "inner radius k/2 - {constant}*sqrt(k log2 k) is negative at k={k}; increase k"
        )));
    }
    let inner_radius = k / 2 - constant * s;
    let outer_radius = k / 2 - s;
    let mut cur = BigUint::one(); // C(k, 0)
    let mut inner_sum = BigUint::zero();
    let mut outer_sum = BigUint::zero();
    for j in 0..=outer_radius {
        if j > 0 {
            cur = cur * BigUint::from(k - j + 1) / BigUint::from(j);
        }
        if j <= inner_radius {
            inner_sum += &cur;
        }
        outer_sum += &cur;
    }
    Ok(OuterLayerReport {
        k,
        constant,
        scaled,
        inner_radius,
        outer_radius,
        ratio: big_ratio(inner_sum, outer_sum),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Stream;

    #[test]
    fn binomial_basics() {
        assert_eq!(binomial(10, 4), BigUint::from(210u32));
        for k in [0u64, 1, 5, 17] {
            assert_eq!(binomial(k, 0), BigUint::one());
        }
        assert_eq!(binomial(3, 7), BigUint::zero());
    }

    #[test]
    fn binomial_52_26_vs_pascal_oracle() {
        // Repeated-addition Pascal triangle as an independent oracle.
        let mut row: Vec<BigUint> = vec![BigUint::one()];
        for _ in 1..=52u32 {
            let mut next = vec![BigUint::one()];
            for w in row.windows(2) {
                next.push(&w[0] + &w[1]);
            }
            next.push(BigUint::one());
            row = next;
        }
        assert_eq!(binomial(52, 26), row[26]);
        assert_eq!(row[26], BigUint::from(495_918_532_948_104u64));
    }

    #[test]
    fn pmf_example_and_edges() {
        let p = HypergeomParams::new(4, 2, 2).unwrap();
        assert_eq!(hypergeom_pmf(p, 1), crate::linprog::ratio(2, 3));
        assert_eq!(hypergeom_pmf(p, 3), BigRational::zero());
        let d = Hypergeom::new(p);
        assert_eq!(d.mass(0, 4), BigRational::one());
    }

    #[test]
    fn pmf_sums_to_one_random_params() {
        let mut s = Stream::new(5);
        for _ in 0..50 {
            let k = 1 + s.below(60);
            let m = s.below(k + 1);
            let r = s.below(k + 1);
            let d = Hypergeom::new(HypergeomParams::new(k, m, r).unwrap());
            let (lo, hi) = d.params.support();
            assert_eq!(d.mass(lo, hi), BigRational::one(), "k={k} m={m} r={r}");
        }
    }

    #[test]
    fn sphere_ball_example_k10() {
        let (count, ratio) = sphere_ball_intersection(10, 2, 4).unwrap();
        assert_eq!(count, BigUint::from(140u32));
        assert_eq!(ratio, crate::linprog::ratio(2, 3));
    }

    #[test]
    fn sphere_ball_m0_is_whole_sphere() {
        for (k, r) in [(8u64, 3u64), (12, 5), (9, 0)] {
            let (count, ratio) = sphere_ball_intersection(k, 0, r).unwrap();
            assert_eq!(count, binomial(k, r));
            assert_eq!(ratio, BigRational::one());
        }
    }

    #[test]
    fn brute_force_matches_formula_small_k() {
        for k in 1u64..=12 {
            for m in 0..=k {
                let a = 0u64;
                let b = (1u64 << m) - 1; // canonical string at distance m
                for r in 0..=k {
                    let bf = brute_force_intersection(a, b, k, r as u32).unwrap();
                    let (count, _) = sphere_ball_intersection(k, m, r).unwrap();
                    assert_eq!(BigUint::from(bf), count, "mismatch at k={k} m={m} r={r}");
                }
            }
        }
    }

    #[test]
    fn brute_force_edge_cases() {
        // r=0: the sphere is {a}; intersection nonempty iff a == b.
        assert_eq!(brute_force_intersection(0, 0, 6, 0).unwrap(), 1);
        assert_eq!(brute_force_intersection(0, 1, 6, 0).unwrap(), 0);
        // a = b: whole sphere.
        assert_eq!(
            BigUint::from(brute_force_intersection(5, 5, 10, 4).unwrap()),
            binomial(10, 4)
        );
        assert!(brute_force_intersection(0, 0, 21, 1).is_err());
    }

    #[test]
    fn ball_intersection_grows_as_centers_approach() {
        for k in 2u64..=14 {
            let r = k / 3;
            let mut prev: Option<BigRational> = None;
            for m in 0..=k {
                let (_, ratio) = ball_ball_intersection(k, m, r);
                if let Some(p) = &prev {
                    assert!(&ratio <= p, "k={k} m={m}");
                }
                prev = Some(ratio);
            }
        }
    }

    #[test]
    fn symmetric_identity_at_j0() {
        let p = HypergeomParams::new(100, 10, 40).unwrap();
        let rep = check_symmetric(p, 0).unwrap();
        assert_eq!(rep.min_ratio, BigRational::one());
    }

    #[test]
    fn symmetric_small_case_matches_direct_quotients() {
        let p = HypergeomParams::new(100, 10, 40).unwrap();
        let rep = check_symmetric(p, 2).unwrap();
        let d = Hypergeom::new(p);
        let direct: BigRational = (0..=2u64)
            .map(|j| d.pmf(5 + j) / d.pmf(5 - j))
            .min()
            .unwrap();
        assert_eq!(rep.min_ratio, direct);
        assert!(!rep.zero_hit);
    }

    #[test]
    fn monotone_small_case() {
        // k=10, m=2, r=4: mode at j=1 (E=0.8).
        let p = HypergeomParams::new(10, 2, 4).unwrap();
        let rep = check_monotone(p);
        assert_eq!(rep.mode, 1);
        assert!(rep.unimodal);
        assert!(rep.mode_near_expectation);
    }

    #[test]
    fn monotone_degenerate_m_equals_k() {
        let p = HypergeomParams::new(12, 12, 5).unwrap();
        let rep = check_monotone(p);
        assert_eq!(rep.mode, 5);
        assert!(rep.unimodal);
    }

    #[test]
    fn tail_mass_full_width_is_one() {
        let p = HypergeomParams::new(64, 9, 20).unwrap();
        assert_eq!(tail_mass(p, p.m), BigRational::one());
    }

    #[test]
    fn lemma_regime_is_deterministic() {
        let r = lemma_params(1024).unwrap();
        assert_eq!(r.m, 102);
        assert_eq!(r.sqrt_klogk, ceil_sqrt(10240));
        assert_eq!(r.r, 512 - r.sqrt_klogk);
        assert!(lemma_params(4).is_err());
    }

    #[test]
    fn outer_layer_scaled_at_moderate_k() {
        let rep = outer_layer_mass(4096).unwrap();
        assert!(rep.scaled);
        assert_eq!(rep.constant, 3);
        assert!(rep.ratio < BigRational::one());
        assert!(rep.ratio > BigRational::zero());
    }
}
