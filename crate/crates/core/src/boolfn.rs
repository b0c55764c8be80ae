//! Total and partial Boolean functions as explicit truth tables, the zoo of
//! named example functions, and Hamming-cube helpers.
//!
//! Bit order convention: position 1 is the leftmost character of the string
//! form of an input. Internally an input is a `u32` word where position `p`
//! occupies bit `n - p`, which makes lexicographic order of strings coincide
//! with numeric order of words.

use serde::Serialize;
use std::collections::BTreeMap;
use thiserror::Error;

/// An assignment to the n input positions, packed into a word.
pub type Word = u32;

/// Maximum supported arity; full-domain enumeration stays desk-scale.
pub const MAX_ARITY: usize = 24;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BoolFnError {
    #[error("arity {0} out of range 1..={MAX_ARITY}")]
    ArityOutOfRange(usize),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("duplicate key {0}")]
    DuplicateKey(String),
    #[error("function has an empty domain")]
    EmptyDomain,
    #[error("input {0} is not in the domain")]
    NotInDomain(String),
    #[error("unknown zoo function {0}")]
    UnknownZoo(String),
    #[error("invalid zoo parameters: {0}")]
    ZooParams(String),
    #[error("bitstring length mismatch")]
    LengthMismatch,
}

/// A (possibly partial) Boolean function given by an explicit value table.
///
/// Immutable after construction; the zero and one sets are cached as sorted
/// word lists.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoolFn {
    n: usize,
    defined: Vec<u64>,
    value: Vec<u64>,
    zero_set: Vec<Word>,
    one_set: Vec<Word>,
}

#[inline]
fn bit_get(bits: &[u64], i: usize) -> bool {
    bits[i >> 6] >> (i & 63) & 1 == 1
}

#[inline]
fn bit_set(bits: &mut [u64], i: usize) {
    bits[i >> 6] |= 1 << (i & 63);
}

impl BoolFn {
    /// Build from explicit `(word, value)` pairs. Duplicate words are
    /// rejected, and at least one value must be defined.
    pub fn from_values(
        n: usize,
        values: impl IntoIterator<Item = (Word, bool)>,
    ) -> Result<Self, BoolFnError> {
        if n == 0 || n > MAX_ARITY {
            return Err(BoolFnError::ArityOutOfRange(n));
        }
        let words = 1usize << n;
        let blocks = words.div_ceil(64);
        let mut defined = vec![0u64; blocks];
        let mut value = vec![0u64; blocks];
        for (w, v) in values {
            let i = w as usize;
            if i >= words {
                return Err(BoolFnError::Parse(format!("key {w} exceeds 2^{n}")));
            }
            if bit_get(&defined, i) {
                return Err(BoolFnError::DuplicateKey(format_bits(w, n)));
            }
            bit_set(&mut defined, i);
            if v {
                bit_set(&mut value, i);
            }
        }
        let mut zero_set = Vec::new();
        let mut one_set = Vec::new();
        for i in 0..words {
            if bit_get(&defined, i) {
                if bit_get(&value, i) {
                    one_set.push(i as Word);
                } else {
                    zero_set.push(i as Word);
                }
            }
        }
        if zero_set.is_empty() && one_set.is_empty() {
            return Err(BoolFnError::EmptyDomain);
        }
        Ok(BoolFn { n, defined, value, zero_set, one_set })
    }

    /// Parse the compact table form: a string over `{0,1,*}` of length `2^n`
    /// in lexicographic key order, `*` meaning undefined.
    pub fn from_compact(n: usize, table: &str) -> Result<Self, BoolFnError> {
        if n == 0 || n > MAX_ARITY {
            return Err(BoolFnError::ArityOutOfRange(n));
        }
        if table.len() != 1usize << n {
            return Err(BoolFnError::Parse(format!(
                "table has {} cells, expected 2^{n}",
                table.len()
            )));
        }
        let mut vals = Vec::new();
        for (i, c) in table.chars().enumerate() {
            match c {
                '0' => vals.push((i as Word, false)),
                '1' => vals.push((i as Word, true)),
                '*' => {}
                other => return Err(BoolFnError::Parse(format!("bad table cell {other:?}"))),
            }
        }
        Self::from_values(n, vals)
    }

    /// Parse a truth-table document. Two JSON forms are accepted:
    /// `{"n": int, "values": {bitstring: 0|1, ...}}` (absent keys undefined)
    /// and `{"n": int, "table": "01*..."}` (compact form).
    pub fn from_document(doc: &str) -> Result<Self, BoolFnError> {
        let v: serde_json::Value = serde_json::from_str(doc)
            .map_err(|e| BoolFnError::Parse(format!("not valid JSON: {e}")))?;
        let n = v
            .get("n")
            .and_then(|x| x.as_u64())
            .ok_or_else(|| BoolFnError::Parse("missing integer field \"n\"".into()))?
            as usize;
        if let Some(table) = v.get("table") {
            let s = table
                .as_str()
                .ok_or_else(|| BoolFnError::Parse("\"table\" must be a string".into()))?;
            return Self::from_compact(n, s);
        }
        let values = v
            .get("values")
            .and_then(|x| x.as_object())
            .ok_or_else(|| BoolFnError::Parse("missing \"values\" or \"table\"".into()))?;
        let mut pairs = Vec::with_capacity(values.len());
        for (key, val) in values {
            let (kn, w) = parse_bits(key)?;
            if kn != n {
                return Err(BoolFnError::Parse(format!(
                    "key {key:?} has {kn} bits, expected {n}"
                )));
            }
            let b = match val.as_u64() {
                Some(0) => false,
                Some(1) => true,
                _ => return Err(BoolFnError::Parse(format!("value for {key:?} must be 0 or 1"))),
            };
            pairs.push((w, b));
        }
        Self::from_values(n, pairs)
    }

    /// Serialize in the sparse JSON form (form (a) of the file format).
    pub fn to_document(&self) -> String {
        let mut values = BTreeMap::new();
        for &w in self.zero_set.iter() {
            values.insert(format_bits(w, self.n), 0u8);
        }
        for &w in self.one_set.iter() {
            values.insert(format_bits(w, self.n), 1u8);
        }
        #[derive(Serialize)]
        struct Doc {
            n: usize,
            values: BTreeMap<String, u8>,
        }
        serde_json::to_string(&Doc { n: self.n, values }).expect("serializable")
    }

    pub fn arity(&self) -> usize {
        self.n
    }

    pub fn zero_set(&self) -> &[Word] {
        &self.zero_set
    }

    pub fn one_set(&self) -> &[Word] {
        &self.one_set
    }

    pub fn domain_size(&self) -> usize {
        self.zero_set.len() + self.one_set.len()
    }

    pub fn is_total(&self) -> bool {
        self.domain_size() == 1usize << self.n
    }

    /// Value at `w`, `None` when undefined.
    #[inline]
    pub fn value(&self, w: Word) -> Option<bool> {
        let i = w as usize;
        if i < 1usize << self.n && bit_get(&self.defined, i) {
            Some(bit_get(&self.value, i))
        } else {
            None
        }
    }

    /// Sorted domain (zero set followed by one set would not be sorted, so
    /// this merges them).
    pub fn domain(&self) -> Vec<Word> {
        let mut d: Vec<Word> = self.zero_set.iter().chain(self.one_set.iter()).copied().collect();
        d.sort_unstable();
        d
    }

    /// Word with position `p` (1-based) flipped.
    #[inline]
    pub fn flip(&self, w: Word, p: usize) -> Word {
        debug_assert!(p >= 1 && p <= self.n);
        w ^ (1 << (self.n - p))
    }

    /// Bit at position `p` (1-based).
    #[inline]
    pub fn bit(&self, w: Word, p: usize) -> bool {
        debug_assert!(p >= 1 && p <= self.n);
        w >> (self.n - p) & 1 == 1
    }

    /// Sensitive positions of `z`: flips that stay inside the domain and
    /// change the value. Flips landing outside the domain are not sensitive.
    pub fn sensitive_positions(&self, z: Word) -> Result<Vec<usize>, BoolFnError> {
        let v = self
            .value(z)
            .ok_or_else(|| BoolFnError::NotInDomain(format_bits(z, self.n)))?;
        let mut out = Vec::new();
        for p in 1..=self.n {
            if self.value(self.flip(z, p)) == Some(!v) {
                out.push(p);
            }
        }
        Ok(out)
    }

    /// Positions (1-based) where `a` and `b` differ.
    pub fn differing_positions(&self, a: Word, b: Word) -> Vec<usize> {
        let mut x = a ^ b;
        let mut out = Vec::new();
        while x != 0 {
            let bit = x.trailing_zeros() as usize;
            out.push(self.n - bit);
            x &= x - 1;
        }
        out.sort_unstable();
        out
    }
}

/// Hamming distance between two equal-length bitstrings given as words.
#[inline]
pub fn hamming(a: Word, b: Word) -> u32 {
    (a ^ b).count_ones()
}

/// Flip exactly the masked positions.
#[inline]
pub fn flip_block(z: Word, mask: Word) -> Word {
    z ^ mask
}

/// Parse a bitstring, returning its length and word form.
pub fn parse_bits(s: &str) -> Result<(usize, Word), BoolFnError> {
    let n = s.len();
    if n == 0 || n > MAX_ARITY {
        return Err(BoolFnError::ArityOutOfRange(n));
    }
    let mut w: Word = 0;
    for c in s.chars() {
        w <<= 1;
        match c {
            '0' => {}
            '1' => w |= 1,
            other => return Err(BoolFnError::Parse(format!("bad bit {other:?}"))),
        }
    }
    Ok((n, w))
}

/// Format a word as an n-character bitstring, position 1 leftmost.
pub fn format_bits(w: Word, n: usize) -> String {
    (1..=n)
        .map(|p| if w >> (n - p) & 1 == 1 { '1' } else { '0' })
        .collect()
}

/// Named example functions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ZooSpec {
    Or(usize),
    And(usize),
    Parity(usize),
    /// Tribes_{s,t}: OR of s ANDs of t bits each.
    Tribes(usize, usize),
    /// OR restricted to 0^n and the weight-1 strings.
    PromiseOr(usize),
    /// Defined on weight-1 strings only; 1 iff the set bit is in the second half.
    Gth(usize),
    /// Approximate index, Boolean-encoded table alphabet (two bits per cell).
    ApInd(usize),
}

impl ZooSpec {
    /// Parse the CLI syntax `name:params` with comma-separated integers.
    pub fn parse(s: &str) -> Result<Self, BoolFnError> {
        let (name, params) = match s.split_once(':') {
            Some((a, b)) => (a, b),
            None => (s, ""),
        };
        let nums: Vec<usize> = if params.is_empty() {
            vec![]
        } else {
            params
                .split(',')
                .map(|p| {
                    p.trim()
                        .parse::<usize>()
                        .map_err(|_| BoolFnError::ZooParams(format!("bad integer {p:?}")))
                })
                .collect::<Result<_, _>>()?
        };
        let one = |kind: fn(usize) -> ZooSpec| {
            if nums.len() == 1 {
                Ok(kind(nums[0]))
            } else {
                Err(BoolFnError::ZooParams(format!("{name} takes one parameter")))
            }
        };
        match name.to_ascii_lowercase().as_str() {
            "or" => one(ZooSpec::Or),
            "and" => one(ZooSpec::And),
            "parity" => one(ZooSpec::Parity),
            "promise_or" => one(ZooSpec::PromiseOr),
            "gth" => one(ZooSpec::Gth),
            "apind" => one(ZooSpec::ApInd),
            "tribes" => {
                if nums.len() == 2 {
                    Ok(ZooSpec::Tribes(nums[0], nums[1]))
                } else {
                    Err(BoolFnError::ZooParams("tribes takes two parameters".into()))
                }
            }
            other => Err(BoolFnError::UnknownZoo(other.into())),
        }
    }
}

impl std::fmt::Display for ZooSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ZooSpec::Or(n) => write!(f, "or:{n}"),
            ZooSpec::And(n) => write!(f, "and:{n}"),
            ZooSpec::Parity(n) => write!(f, "parity:{n}"),
            ZooSpec::Tribes(s, t) => write!(f, "tribes:{s},{t}"),
            ZooSpec::PromiseOr(n) => write!(f, "promise_or:{n}"),
            ZooSpec::Gth(n) => write!(f, "gth:{n}"),
            ZooSpec::ApInd(k) => write!(f, "apind:{k}"),
        }
    }
}

/// Build a zoo function.
pub fn zoo(spec: ZooSpec) -> Result<BoolFn, BoolFnError> {
    match spec {
        ZooSpec::Or(n) => total(n, |w| w != 0),
        ZooSpec::And(n) => total(n, move |w| w == (1u32 << n) - 1),
        ZooSpec::Parity(n) => total(n, |w| w.count_ones() % 2 == 1),
        ZooSpec::Tribes(s, t) => {
            if s == 0 || t == 0 || s * t > MAX_ARITY {
                return Err(BoolFnError::ZooParams(format!(
                    "tribes needs s,t >= 1 with s*t <= {MAX_ARITY}, got {s},{t}"
                )));
            }
            let n = s * t;
            // Block i (0-based) covers positions i*t+1 ..= (i+1)*t, i.e. the
            // word bits n-(i+1)*t .. n-i*t.
            total(n, move |w| {
                (0..s).any(|i| {
                    let shift = n - (i + 1) * t;
                    let mask = ((1u32 << t) - 1) << shift;
                    w & mask == mask
                })
            })
        }
        ZooSpec::PromiseOr(n) => {
            check_arity(n)?;
            let mut vals = vec![(0, false)];
            for p in 1..=n {
                vals.push((1 << (n - p), true));
            }
            BoolFn::from_values(n, vals)
        }
        ZooSpec::Gth(n) => {
            check_arity(n)?;
            if n % 2 != 0 {
                return Err(BoolFnError::ZooParams(format!("gth needs even n, got {n}")));
            }
            let mut vals = Vec::new();
            for p in 1..=n {
                vals.push(((1u32 << (n - p)), p > n / 2));
            }
            BoolFn::from_values(n, vals)
        }
        ZooSpec::ApInd(k) => apind_truth_table(k),
    }
}

fn check_arity(n: usize) -> Result<(), BoolFnError> {
    if n == 0 || n > MAX_ARITY {
        Err(BoolFnError::ArityOutOfRange(n))
    } else {
        Ok(())
    }
}

fn total(n: usize, f: impl Fn(Word) -> bool) -> Result<BoolFn, BoolFnError> {
    check_arity(n)?;
    BoolFn::from_values(n, (0..1u32 << n).map(|w| (w, f(w))))
}

/// Approximate-index promise radius: floor(k/2 - sqrt(k*log2(k))), clamped at
/// zero so the table cell addressed by `a` itself is always inside the ball.
/// All radius rounding for ApInd is centralized here.
pub fn apind_radius(k: usize) -> i64 {
    let kk = k as f64;
    (kk / 2.0 - (kk * kk.log2()).sqrt()).floor() as i64
}

/// Boolean-encoded ApInd truth table. The table alphabet {0,1,2} is encoded
/// in two bits per cell (00 -> 0, 01 -> 1, 10 -> 2), so the encoded arity is
/// k + 2*2^k, which fits the arity cap only for k in {2,3}. Larger k are
/// served by the native strategy simulator instead of a truth table.
fn apind_truth_table(k: usize) -> Result<BoolFn, BoolFnError> {
    if !(2..=3).contains(&k) {
        return Err(BoolFnError::ZooParams(format!(
            "apind truth table needs k in {{2,3}} (encoded arity k+2*2^k <= {MAX_ARITY}), got {k}"
        )));
    }
    let cells = 1usize << k;
    let n = k + 2 * cells;
    let radius = apind_radius(k).max(0) as u32;
    let mut vals = Vec::new();
    // Valid inputs: address a, value v; cell b holds v when d(a,b) <= radius
    // and 2 otherwise. Everything else maps to *.
    for a in 0..cells as u32 {
        for v in [false, true] {
            let mut w: Word = (a as Word) << (2 * cells);
            for b in 0..cells as u32 {
                let cell: u32 = if hamming(a, b) <= radius {
                    v as u32
                } else {
                    0b10
                };
                let shift = 2 * (cells - 1 - b as usize);
                w |= cell << shift;
            }
            vals.push((w, v));
        }
    }
    debug_assert!(n <= MAX_ARITY);
    BoolFn::from_values(n, vals)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compact_or2() {
        let f = BoolFn::from_compact(2, "0111").unwrap();
        assert_eq!(f.zero_set(), &[0b00]);
        assert_eq!(f.one_set(), &[0b01, 0b10, 0b11]);
    }

    #[test]
    fn compact_partial() {
        let f = BoolFn::from_compact(2, "01**").unwrap();
        assert_eq!(f.domain_size(), 2);
        assert_eq!(f.value(0b00), Some(false));
        assert_eq!(f.value(0b01), Some(true));
        assert_eq!(f.value(0b10), None);
    }

    #[test]
    fn json_forms() {
        let f = BoolFn::from_document(r#"{"n":2,"values":{"00":0,"11":1}}"#).unwrap();
        assert_eq!(f.domain_size(), 2);
        assert_eq!(f.value(0b11), Some(true));
        let g = BoolFn::from_document(r#"{"n":2,"table":"0111"}"#).unwrap();
        assert!(g.is_total());
        // Writer round-trips through form (a).
        let h = BoolFn::from_document(&g.to_document()).unwrap();
        assert_eq!(g, h);
    }

    #[test]
    fn rejects_bad_documents() {
        assert!(matches!(
            BoolFn::from_compact(2, "011"),
            Err(BoolFnError::Parse(_))
        ));
        assert!(matches!(
            BoolFn::from_compact(2, "****"),
            Err(BoolFnError::EmptyDomain)
        ));
        assert!(matches!(
            BoolFn::from_document(r#"{"n":2,"values":{"001":1}}"#),
            Err(BoolFnError::Parse(_))
        ));
        assert!(BoolFn::from_values(2, [(0, true), (0, false)]).is_err());
    }

    #[test]
    fn gth4_domain_and_values() {
        let f = zoo(ZooSpec::Gth(4)).unwrap();
        let keys: Vec<String> = f.domain().iter().map(|&w| format_bits(w, 4)).collect();
        assert_eq!(keys, ["0001", "0010", "0100", "1000"]);
        assert_eq!(f.value(parse_bits("1000").unwrap().1), Some(false));
        assert_eq!(f.value(parse_bits("0100").unwrap().1), Some(false));
        assert_eq!(f.value(parse_bits("0010").unwrap().1), Some(true));
        assert_eq!(f.value(parse_bits("0001").unwrap().1), Some(true));
    }

    #[test]
    fn tribes22_matches_dnf() {
        let f = zoo(ZooSpec::Tribes(2, 2)).unwrap();
        assert!(f.is_total());
        for w in 0..16u32 {
            let x = |p: usize| f.bit(w, p);
            let expect = (x(1) && x(2)) || (x(3) && x(4));
            assert_eq!(f.value(w), Some(expect), "w={w:04b}");
        }
    }

    #[test]
    fn tribes_matches_dnf_up_to_12_bits() {
        for (s, t) in [(1, 1), (2, 3), (3, 2), (2, 6), (6, 2), (3, 4), (4, 3), (2, 2)] {
            let n = s * t;
            if n > 12 {
                continue;
            }
            let f = zoo(ZooSpec::Tribes(s, t)).unwrap();
            for w in 0..1u32 << n {
                let expect = (0..s).any(|i| (1..=t).all(|j| f.bit(w, i * t + j)));
                assert_eq!(f.value(w), Some(expect));
            }
        }
    }

    #[test]
    fn promise_or_is_restriction_of_or() {
        for n in 1..=6 {
            let p = zoo(ZooSpec::PromiseOr(n)).unwrap();
            let o = zoo(ZooSpec::Or(n)).unwrap();
            assert_eq!(p.domain_size(), n + 1);
            for &w in p.domain().iter() {
                assert_eq!(p.value(w), o.value(w));
            }
        }
    }

    #[test]
    fn sensitivity_examples() {
        let or3 = zoo(ZooSpec::Or(3)).unwrap();
        assert_eq!(or3.sensitive_positions(0).unwrap(), vec![1, 2, 3]);
        let gth4 = zoo(ZooSpec::Gth(4)).unwrap();
        assert_eq!(gth4.sensitive_positions(0b1000).unwrap(), Vec::<usize>::new());
        let par2 = zoo(ZooSpec::Parity(2)).unwrap();
        assert_eq!(par2.sensitive_positions(0b01).unwrap(), vec![1, 2]);
        assert!(matches!(
            gth4.sensitive_positions(0b1100),
            Err(BoolFnError::NotInDomain(_))
        ));
    }

    #[test]
    fn sensitivity_is_symmetric_on_edges() {
        for spec in [
            ZooSpec::Or(4),
            ZooSpec::Parity(3),
            ZooSpec::Tribes(2, 2),
            ZooSpec::Gth(6),
            ZooSpec::PromiseOr(4),
        ] {
            let f = zoo(spec).unwrap();
            for &z in f.domain().iter() {
                for p in f.sensitive_positions(z).unwrap() {
                    let nb = f.flip(z, p);
                    assert!(
                        f.sensitive_positions(nb).unwrap().contains(&p),
                        "{spec} edge ({z:b},{p}) not symmetric"
                    );
                }
            }
        }
    }

    #[test]
    fn hamming_helpers() {
        assert_eq!(hamming(0b0011, 0b0101), 2);
        assert_eq!(flip_block(0b0000, 0b1010), 0b1010);
        for z in [0u32, 7, 12, 255] {
            assert_eq!(hamming(z, z), 0);
        }
    }

    #[test]
    fn bit_position_convention() {
        // "01": position 1 is '0', position 2 is '1'.
        let (n, w) = parse_bits("01").unwrap();
        assert_eq!((n, w), (2, 1));
        let f = BoolFn::from_compact(2, "0111").unwrap();
        assert!(!f.bit(w, 1));
        assert!(f.bit(w, 2));
        assert_eq!(format_bits(w, 2), "01");
    }

    #[test]
    fn apind_truth_table_small() {
        let f = zoo(ZooSpec::ApInd(2)).unwrap();
        assert_eq!(f.arity(), 10);
        // Radius clamps to 0 at k=2: cell a holds the value, others hold 2.
        assert_eq!(f.domain_size(), 8);
        // a=00, v=1: address 00, cells: (01,10,10,10) -> 01 10 10 10.
        let (_, w) = parse_bits("0001101010").unwrap();
        assert_eq!(f.value(w), Some(true));
        assert!(zoo(ZooSpec::ApInd(4)).is_err());
    }
}
