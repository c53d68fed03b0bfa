use num_bigint::BigUint;
use num_rational::BigRational;
use serde::Serializer;

/// Big integers travel as decimal strings.
pub fn big_decimal<S: Serializer>(v: &BigUint, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

/// Exact rationals travel as `"p/q"` strings.
pub fn ratio_string<S: Serializer>(v: &BigRational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&format!("{}/{}", v.numer(), v.denom()))
}
