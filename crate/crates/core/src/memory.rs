//! The explicit memory: a crossbar plus a class-to-column allocation table.
//!
//! A first-seen class takes the next fully reset column (expansion); later
//! supports of the same class are added onto that column with further SET
//! pulses (in-situ superposition). Classification is one MVM over all
//! allocated columns followed by an argmax.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use rand::Rng;

use crate::crossbar::{AdcConfig, CrossbarArray};
use crate::error::{Error, Result};
use crate::oracle::argmax;
use crate::vector::{BipolarVector, ClassId, QueryVector};

/// Non-fatal notice that a column has a device pinned at `g_sat`, so further
/// supports of that class no longer add fully to its class vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SaturationWarning {
    pub class: ClassId,
    pub column: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LearnOutcome {
    pub column: usize,
    /// A new column was allocated for this call.
    pub expanded: bool,
    pub saturation: Option<SaturationWarning>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExplicitMemory {
    array: CrossbarArray,
    allocation: BTreeMap<ClassId, usize>,
    // column -> class, for columns 0..next_free
    owners: Vec<ClassId>,
    shots_seen: BTreeMap<ClassId, u32>,
}

impl ExplicitMemory {
    pub fn new(array: CrossbarArray) -> Self {
        ExplicitMemory { array, allocation: BTreeMap::new(), owners: Vec::new(), shots_seen: BTreeMap::new() }
    }

    pub fn array(&self) -> &CrossbarArray {
        &self.array
    }

    pub fn array_mut(&mut self) -> &mut CrossbarArray {
        &mut self.array
    }

    pub fn dim(&self) -> usize {
        self.array.rows()
    }

    pub fn num_classes(&self) -> usize {
        self.owners.len()
    }

    /// Next column to be allocated; equals the number of stored classes.
    pub fn next_free(&self) -> usize {
        self.owners.len()
    }

    pub fn column_of(&self, class: ClassId) -> Option<usize> {
        self.allocation.get(&class).copied()
    }

    pub fn class_at(&self, column: usize) -> Option<ClassId> {
        self.owners.get(column).copied()
    }

    pub fn shots_seen(&self, class: ClassId) -> u32 {
        self.shots_seen.get(&class).copied().unwrap_or(0)
    }

    pub fn classes(&self) -> impl Iterator<Item = ClassId> + '_ {
        self.allocation.keys().copied()
    }

    pub fn learn_support<R: Rng + ?Sized>(
        &mut self,
        class: ClassId,
        support: &BipolarVector,
        rng: &mut R,
    ) -> Result<LearnOutcome> {
        support.check_len(self.array.rows())?;
        let (column, expanded) = match self.allocation.get(&class) {
            Some(&col) => (col, false),
            None => {
                let col = self.owners.len();
                if col >= self.array.cols() {
                    return Err(Error::CapacityExceeded { cols: self.array.cols(), class });
                }
                (col, true)
            }
        };
        self.array.program_column_bipolar(column, support, rng)?;
        if expanded {
            self.allocation.insert(class, column);
            self.owners.push(class);
        }
        *self.shots_seen.entry(class).or_insert(0) += 1;
        let saturation = self
            .array
            .column_saturated(column)?
            .then_some(SaturationWarning { class, column });
        Ok(LearnOutcome { column, expanded, saturation })
    }

    /// Digitized similarity for every stored class, from one MVM over the
    /// allocated columns.
    pub fn similarity_scores<R: Rng + ?Sized>(
        &self,
        query: &QueryVector,
        adc: &AdcConfig,
        rng: &mut R,
    ) -> Result<BTreeMap<ClassId, i32>> {
        if self.owners.is_empty() {
            return Err(Error::EmptyMemory);
        }
        let cols: Vec<usize> = (0..self.owners.len()).collect();
        let scores = self.array.mvm(query, adc, &cols, rng)?;
        Ok(self.owners.iter().copied().zip(scores).collect())
    }

    /// Highest-scoring class; ties go to the smallest class id.
    pub fn classify<R: Rng + ?Sized>(&self, query: &QueryVector, adc: &AdcConfig, rng: &mut R) -> Result<ClassId> {
        Ok(argmax(self.similarity_scores(query, adc, rng)?))
    }

    pub fn write_allocation_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{ALLOCATION_CSV_HEADER}")?;
        for (col, class) in self.owners.iter().enumerate() {
            writeln!(w, "{class},{col},{}", self.shots_seen(*class))?;
        }
        Ok(())
    }

    /// Reassembles a memory from a crossbar snapshot and its allocation table.
    pub fn from_parts<R: BufRead>(array: CrossbarArray, allocation_csv: R) -> Result<Self> {
        let mut em = ExplicitMemory::new(array);
        for (i, line) in allocation_csv.lines().enumerate() {
            let lineno = i as u64 + 1;
            let line = line.map_err(|e| Error::Parse { line: lineno, msg: e.to_string() })?;
            if i == 0 {
                if line.trim() != ALLOCATION_CSV_HEADER {
                    return Err(Error::Parse { line: 1, msg: format!("expected header `{ALLOCATION_CSV_HEADER}`") });
                }
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split(',').collect();
            let parse = |s: &str| s.trim().parse::<u64>().map_err(|_| Error::Parse { line: lineno, msg: format!("bad integer `{s}`") });
            if f.len() != 3 {
                return Err(Error::Parse { line: lineno, msg: "expected class_id,column,shots_seen".into() });
            }
            let class = ClassId(parse(f[0])? as u32);
            let col = parse(f[1])? as usize;
            let shots = parse(f[2])? as u32;
            if col != em.owners.len() || col >= em.array.cols() || em.allocation.contains_key(&class) || shots == 0 {
                return Err(Error::RangeViolation {
                    line: lineno,
                    msg: "allocation must list distinct classes on columns 0,1,2,... with shots >= 1".into(),
                });
            }
            em.allocation.insert(class, col);
            em.owners.push(class);
            em.shots_seen.insert(class, shots);
        }
        Ok(em)
    }
}

pub const ALLOCATION_CSV_HEADER: &str = "class_id,column,shots_seen";
