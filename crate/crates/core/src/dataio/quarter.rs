use crate::error::{Error, Result};
use serde::{de, Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;
use std::ops::{Add, Sub};
use std::str::FromStr;

/// A calendar quarter, ordered, with "YYYYQn" text form.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Quarter {
    year: i32,
    quarter: u8,
}

impl Quarter {
    pub fn new(year: i32, quarter: u8) -> Result<Self> {
        if !(1..=4).contains(&quarter) {
            return Err(Error::Domain(format!(
                "quarter must be 1..4, got {quarter}"
            )));
        }
        Ok(Quarter { year, quarter })
    }

    pub fn year(self) -> i32 {
        self.year
    }

    pub fn quarter(self) -> u8 {
        self.quarter
    }

    fn ordinal(self) -> i64 {
        self.year as i64 * 4 + (self.quarter as i64 - 1)
    }

    fn from_ordinal(o: i64) -> Self {
        Quarter {
            year: o.div_euclid(4) as i32,
            quarter: (o.rem_euclid(4) + 1) as u8,
        }
    }

    pub fn next(self) -> Self {
        self + 1
    }
}

/// Advance by a signed number of quarters; (y, 4) + 1 = (y + 1, 1).
impl Add<i64> for Quarter {
    type Output = Quarter;
    fn add(self, rhs: i64) -> Quarter {
        Quarter::from_ordinal(self.ordinal() + rhs)
    }
}

impl Sub<i64> for Quarter {
    type Output = Quarter;
    fn sub(self, rhs: i64) -> Quarter {
        Quarter::from_ordinal(self.ordinal() - rhs)
    }
}

/// Number of quarters from `rhs` up to `self`.
impl Sub<Quarter> for Quarter {
    type Output = i64;
    fn sub(self, rhs: Quarter) -> i64 {
        self.ordinal() - rhs.ordinal()
    }
}

impl fmt::Display for Quarter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}Q{}", self.year, self.quarter)
    }
}

impl FromStr for Quarter {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Domain(format!("`{s}` is not a quarter label (want e.g. 1999Q1)"));
        let (y, q) = s.split_once(['Q', 'q']).ok_or_else(bad)?;
        let year: i32 = y.trim().parse().map_err(|_| bad())?;
        let quarter: u8 = q.trim().parse().map_err(|_| bad())?;
        Quarter::new(year, quarter)
    }
}

impl Serialize for Quarter {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Quarter {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(de::Error::custom)
    }
}
