//! Exact digital explicit memory.
//!
//! Class vectors are integer sums of bipolar supports and similarity is an
//! exact signed dot product. This is both the software baseline that the
//! analog memory is compared against and the brute-force reference for the
//! noiseless-equivalence checks.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::vector::{BipolarVector, ClassId, QueryVector};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleMemory {
    dim: usize,
    accumulators: BTreeMap<ClassId, Vec<i32>>,
    shots_seen: BTreeMap<ClassId, u32>,
}

impl OracleMemory {
    pub fn new(dim: usize) -> Self {
        OracleMemory { dim, accumulators: BTreeMap::new(), shots_seen: BTreeMap::new() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_classes(&self) -> usize {
        self.accumulators.len()
    }

    pub fn accumulator(&self, class: ClassId) -> Option<&[i32]> {
        self.accumulators.get(&class).map(Vec::as_slice)
    }

    pub fn shots_seen(&self, class: ClassId) -> u32 {
        self.shots_seen.get(&class).copied().unwrap_or(0)
    }

    pub fn learn(&mut self, class: ClassId, support: &BipolarVector) -> Result<()> {
        support.check_len(self.dim)?;
        let acc = self.accumulators.entry(class).or_insert_with(|| vec![0; self.dim]);
        for (a, &s) in acc.iter_mut().zip(support.as_slice()) {
            *a += s as i32;
        }
        *self.shots_seen.entry(class).or_insert(0) += 1;
        Ok(())
    }

    /// Exact dot products, keyed by class.
    pub fn scores(&self, query: &QueryVector) -> Result<BTreeMap<ClassId, i64>> {
        query.check_len(self.dim)?;
        if self.accumulators.is_empty() {
            return Err(Error::EmptyMemory);
        }
        let q = query.as_slice();
        Ok(self
            .accumulators
            .iter()
            .map(|(&c, acc)| (c, acc.iter().zip(q).map(|(&a, &x)| a as i64 * x as i64).sum()))
            .collect())
    }

    /// Highest-scoring class; ties go to the smallest class id.
    pub fn classify(&self, query: &QueryVector) -> Result<ClassId> {
        Ok(argmax(self.scores(query)?))
    }
}

/// Argmax over a class-keyed score map with smallest-id tie-break.
pub(crate) fn argmax<S: Ord + Copy>(scores: BTreeMap<ClassId, S>) -> ClassId {
    let mut best: Option<(ClassId, S)> = None;
    // ascending id order; strict comparison keeps the earliest among equals
    for (c, s) in scores {
        if best.is_none_or(|(_, b)| s > b) {
            best = Some((c, s));
        }
    }
    best.expect("non-empty score map").0
}
