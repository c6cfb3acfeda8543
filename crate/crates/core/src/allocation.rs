//! Allocations of items to bidders and exact welfare.

use thiserror::Error;

use crate::bundle::Bundle;
use crate::exact::ExactValue;
use crate::oracle::Valuation;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AllocationError {
    #[error("parts {0} and {1} overlap")]
    OverlappingParts(usize, usize),
    #[error("allocation has {parts} parts but {valuations} valuations were given")]
    ArityMismatch { parts: usize, valuations: usize },
    #[error("part {0} lives in a different universe than part 0")]
    MixedUniverses(usize),
}

/// One bundle per bidder, pairwise disjoint. Items may stay unallocated
/// (free disposal).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Allocation {
    parts: Vec<Bundle>,
}

impl Allocation {
    pub fn new(parts: Vec<Bundle>) -> Result<Self, AllocationError> {
        for i in 1..parts.len() {
            if parts[i].universe_size() != parts[0].universe_size() {
                return Err(AllocationError::MixedUniverses(i));
            }
        }
        for i in 0..parts.len() {
            for j in i + 1..parts.len() {
                if !parts[i].is_disjoint_from(&parts[j]) {
                    return Err(AllocationError::OverlappingParts(i, j));
                }
            }
        }
        Ok(Allocation { parts })
    }

    pub fn empty(m: u32, n: usize) -> Self {
        Allocation { parts: vec![Bundle::empty(m); n] }
    }

    pub fn parts(&self) -> &[Bundle] {
        &self.parts
    }

    pub fn part(&self, bidder: usize) -> &Bundle {
        &self.parts[bidder]
    }

    pub fn num_bidders(&self) -> usize {
        self.parts.len()
    }
}

/// `Σᵢ vᵢ(Sᵢ)`, exactly.
pub fn welfare<V: Valuation>(
    alloc: &Allocation,
    valuations: &[V],
) -> Result<ExactValue, AllocationError> {
    if valuations.len() != alloc.parts.len() {
        return Err(AllocationError::ArityMismatch {
            parts: alloc.parts.len(),
            valuations: valuations.len(),
        });
    }
    Ok(valuations.iter().zip(&alloc.parts).map(|(v, part)| v.value(part)).sum())
}
