//! Exact truth values.

use std::fmt;
use std::ops::{Add, Div, Mul, Sub};
use std::str::FromStr;

use num_rational::Ratio;
use num_traits::{One, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// A reduced fraction; truth values live in `[0, 1]`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Rational(Ratio<i64>);

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RationalError {
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("malformed rational `{0}`")]
    Malformed(String),
}

impl Rational {
    pub fn new(num: i64, den: i64) -> Result<Self, RationalError> {
        if den == 0 {
            return Err(RationalError::ZeroDenominator);
        }
        Ok(Rational(Ratio::new(num, den)))
    }

    pub fn zero() -> Self {
        Rational(Ratio::zero())
    }

    pub fn one() -> Self {
        Rational(Ratio::one())
    }

    pub fn from_int(n: i64) -> Self {
        Rational(Ratio::from_integer(n))
    }

    /// `k / n` for grid points.
    pub fn frac(k: usize, n: usize) -> Self {
        Rational(Ratio::new(k as i64, n as i64))
    }

    pub fn numer(&self) -> i64 {
        *self.0.numer()
    }

    pub fn denom(&self) -> i64 {
        *self.0.denom()
    }

    pub fn in_unit(&self) -> bool {
        *self >= Rational::zero() && *self <= Rational::one()
    }

    /// The Goedel residuum: `1` if `self <= y`, otherwise `y`.
    pub fn residuum(self, y: Rational) -> Rational {
        if self <= y {
            Rational::one()
        } else {
            y
        }
    }
}

impl Add for Rational {
    type Output = Rational;
    fn add(self, o: Rational) -> Rational {
        Rational(self.0 + o.0)
    }
}

impl Sub for Rational {
    type Output = Rational;
    fn sub(self, o: Rational) -> Rational {
        Rational(self.0 - o.0)
    }
}

impl Mul for Rational {
    type Output = Rational;
    fn mul(self, o: Rational) -> Rational {
        Rational(self.0 * o.0)
    }
}

impl Div for Rational {
    type Output = Rational;
    fn div(self, o: Rational) -> Rational {
        Rational(self.0 / o.0)
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.denom() == 1 {
            write!(f, "{}", self.numer())
        } else {
            write!(f, "{}/{}", self.numer(), self.denom())
        }
    }
}

impl FromStr for Rational {
    type Err = RationalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || RationalError::Malformed(s.to_string());
        match s.trim().split_once('/') {
            Some((n, d)) => {
                let n: i64 = n.trim().parse().map_err(|_| bad())?;
                let d: i64 = d.trim().parse().map_err(|_| bad())?;
                Rational::new(n, d)
            }
            None => s.trim().parse().map(Rational::from_int).map_err(|_| bad()),
        }
    }
}

/// Serialized as a `[numerator, denominator]` pair.
impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        [self.numer(), self.denom()].serialize(s)
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let [n, den] = <[i64; 2]>::deserialize(d)?;
        Rational::new(n, den).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduced_and_ordered() {
        let a = Rational::new(2, 4).unwrap();
        assert_eq!(a, Rational::new(1, 2).unwrap());
        assert_eq!(a.numer(), 1);
        assert!(Rational::new(1, 3).unwrap() < a);
        assert_eq!(Rational::new(1, 0), Err(RationalError::ZeroDenominator));
    }

    #[test]
    fn residuum() {
        let h = Rational::new(1, 2).unwrap();
        let q = Rational::new(1, 4).unwrap();
        assert_eq!(h.residuum(q), q);
        assert_eq!(q.residuum(h), Rational::one());
        assert_eq!(h.residuum(h), Rational::one());
    }

    #[test]
    fn text_and_json() {
        assert_eq!("1/4".parse::<Rational>().unwrap(), Rational::new(1, 4).unwrap());
        assert_eq!("1".parse::<Rational>().unwrap(), Rational::one());
        assert!("x".parse::<Rational>().is_err());
        assert_eq!(Rational::new(1, 4).unwrap().to_string(), "1/4");
        assert_eq!(Rational::zero().to_string(), "0");
        let j = serde_json::to_string(&Rational::new(3, 6).unwrap()).unwrap();
        assert_eq!(j, "[1,2]");
        let back: Rational = serde_json::from_str("[2,8]").unwrap();
        assert_eq!(back, Rational::new(1, 4).unwrap());
        assert!(serde_json::from_str::<Rational>("[1,0]").is_err());
    }
}
