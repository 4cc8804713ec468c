use super::quarter::Quarter;
use crate::error::{Error, Result};

/// The shared quarterly axis of a panel: `len` consecutive quarters
/// starting at `start`. Series refer to it by index.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Axis {
    pub start: Quarter,
    pub len: usize,
}

impl Axis {
    pub fn new(start: Quarter, len: usize) -> Self {
        Axis { start, len }
    }

    pub fn from_span(start: Quarter, end: Quarter) -> Result<Self> {
        let len = end - start + 1;
        if len <= 0 {
            return Err(Error::Alignment(format!("span {start}..{end} is empty")));
        }
        Ok(Axis {
            start,
            len: len as usize,
        })
    }

    pub fn quarter(&self, idx: usize) -> Quarter {
        self.start + idx as i64
    }

    pub fn index_of(&self, q: Quarter) -> Option<usize> {
        let d = q - self.start;
        if d >= 0 && (d as usize) < self.len {
            Some(d as usize)
        } else {
            None
        }
    }

    pub fn last(&self) -> Quarter {
        self.start + (self.len as i64 - 1)
    }

    pub fn contains(&self, q: Quarter) -> bool {
        self.index_of(q).is_some()
    }
}

/// A contiguous run of values on an [`Axis`]. `offset` is the axis index
/// of the first value; everything before `offset` and from
/// `offset + len` onward is undefined (head gaps come from trailing
/// transforms, tail gaps from series that end early).
#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    offset: usize,
    values: Vec<f64>,
}

impl Series {
    pub fn new(offset: usize, values: Vec<f64>) -> Self {
        Series { offset, values }
    }

    pub fn offset(&self) -> usize {
        self.offset
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// One past the last defined axis index.
    pub fn end(&self) -> usize {
        self.offset + self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, idx: usize) -> Option<f64> {
        idx.checked_sub(self.offset)
            .and_then(|i| self.values.get(i))
            .copied()
    }

    /// The values on `[from, to)` in axis indices, or `None` when the
    /// range is not fully covered.
    pub fn slice(&self, from: usize, to: usize) -> Option<&[f64]> {
        if from < self.offset || to > self.end() || from > to {
            return None;
        }
        Some(&self.values[from - self.offset..to - self.offset])
    }

    /// Like [`Series::slice`] but error-reporting: names the first
    /// uncovered quarter.
    pub fn require(&self, axis: &Axis, who: &str, from: usize, to: usize) -> Result<&[f64]> {
        self.slice(from, to).ok_or_else(|| {
            let missing = if from < self.offset { from } else { self.end() };
            Error::DateGap {
                country: who.to_string(),
                quarter: axis.quarter(missing.min(axis.len.saturating_sub(1))),
            }
        })
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Series {
        Series {
            offset: self.offset,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Pointwise combination over the overlap of the defined ranges.
    pub fn zip(&self, other: &Series, f: impl Fn(f64, f64) -> f64) -> Series {
        let from = self.offset.max(other.offset);
        let to = self.end().min(other.end());
        if to <= from {
            return Series {
                offset: from,
                values: Vec::new(),
            };
        }
        let values = (from..to)
            .map(|i| {
                f(
                    self.values[i - self.offset],
                    other.values[i - other.offset],
                )
            })
            .collect();
        Series {
            offset: from,
            values,
        }
    }

    pub fn add(&self, other: &Series) -> Series {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Series) -> Series {
        self.zip(other, |a, b| a - b)
    }

    /// The series of values lagged by `lag` quarters: output at index t
    /// is the input at t - lag.
    pub fn lag(&self, lag: usize) -> Series {
        Series {
            offset: self.offset + lag,
            values: self.values.clone(),
        }
    }

    /// Drop everything from axis index `end_exclusive` onward.
    pub fn truncated(&self, end_exclusive: usize) -> Series {
        if end_exclusive <= self.offset {
            return Series {
                offset: self.offset,
                values: Vec::new(),
            };
        }
        let keep = (end_exclusive - self.offset).min(self.values.len());
        Series {
            offset: self.offset,
            values: self.values[..keep].to_vec(),
        }
    }

    pub fn iter_indexed(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(move |(i, &v)| (self.offset + i, v))
    }
}
