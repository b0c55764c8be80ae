//! Shared report plumbing: values that carry an exact rational alongside a
//! float approximation, serialized as JSON numbers plus `"p/q"` strings.

use num_rational::BigRational;
use num_traits::ToPrimitive;

/// A reported quantity. Exact-rational results keep the rational; heuristic
/// or float-mode results carry only the approximation.
#[derive(Clone, Debug, PartialEq)]
pub struct Value {
    approx: f64,
    exact: Option<BigRational>,
}

impl Value {
    pub fn from_rational(q: BigRational) -> Self {
        let approx = q.to_f64().unwrap_or(f64::NAN);
        Value { approx, exact: Some(q) }
    }

    pub fn from_f64(x: f64) -> Self {
        Value { approx: x, exact: None }
    }

    pub fn as_f64(&self) -> f64 {
        self.approx
    }

    pub fn exact(&self) -> Option<&BigRational> {
        self.exact.as_ref()
    }

    /// JSON form: the float approximation, or `{"approx": .., "exact": "p/q"}`
    /// when an exact value is attached.
    pub fn json(&self) -> serde_json::Value {
        match &self.exact {
            None => serde_json::json!(self.approx),
            Some(q) => serde_json::json!({
                "approx": self.approx,
                "exact": rational_str(q),
            }),
        }
    }
}

/// `"p/q"` rendering (plain integer when the denominator is 1).
pub fn rational_str(q: &BigRational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}
