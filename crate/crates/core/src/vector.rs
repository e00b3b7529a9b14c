//! Controller output encodings: bipolar supports and signed 8-bit queries.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Class label as emitted by the controller.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ClassId(pub u32);

impl fmt::Display for ClassId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// A `±1` vector; stored as `i8` with every element exactly `-1` or `+1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BipolarVector(Vec<i8>);

impl BipolarVector {
    /// Fails with the index of the first element that is not `±1`.
    pub fn new(elements: Vec<i8>) -> std::result::Result<Self, usize> {
        match elements.iter().position(|&e| e != 1 && e != -1) {
            Some(i) => Err(i),
            None => Ok(BipolarVector(elements)),
        }
    }

    pub fn from_signs(signs: impl IntoIterator<Item = bool>) -> Self {
        BipolarVector(signs.into_iter().map(|p| if p { 1 } else { -1 }).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[i8] {
        &self.0
    }

    pub fn negated(&self) -> Self {
        BipolarVector(self.0.iter().map(|&e| -e).collect())
    }

    pub fn dot(&self, other: &BipolarVector) -> i64 {
        self.0.iter().zip(&other.0).map(|(&a, &b)| (a as i64) * (b as i64)).sum()
    }

    pub fn hamming(&self, other: &BipolarVector) -> usize {
        self.0.iter().zip(&other.0).filter(|(a, b)| a != b).count()
    }

    /// Query at full 8-bit scale: `127 * self`.
    pub fn to_full_scale_query(&self) -> QueryVector {
        QueryVector(self.0.iter().map(|&e| e * QueryVector::MAX).collect())
    }

    pub(crate) fn check_len(&self, expected: usize) -> Result<()> {
        if self.len() != expected {
            return Err(Error::DimensionMismatch { expected, got: self.len() });
        }
        Ok(())
    }
}

/// Signed 8-bit query; every element lies in `[-127, 127]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct QueryVector(Vec<i8>);

impl QueryVector {
    pub const MAX: i8 = 127;

    /// Fails with the index of the first element equal to `-128`.
    pub fn new(elements: Vec<i8>) -> std::result::Result<Self, usize> {
        match elements.iter().position(|&e| e == i8::MIN) {
            Some(i) => Err(i),
            None => Ok(QueryVector(elements)),
        }
    }

    pub fn zeros(len: usize) -> Self {
        QueryVector(vec![0; len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[i8] {
        &self.0
    }

    pub(crate) fn check_len(&self, expected: usize) -> Result<()> {
        if self.len() != expected {
            return Err(Error::DimensionMismatch { expected, got: self.len() });
        }
        Ok(())
    }
}
