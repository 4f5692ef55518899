//! Contiguous year-block partitions (the d_1..d_t grouping).

use crate::error::{Error, Result};
use std::fmt;

/// An inclusive range of calendar years.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct YearRange {
    pub start: i32,
    pub end: i32,
}

impl YearRange {
    pub fn new(start: i32, end: i32) -> Result<Self> {
        if start > end {
            return Err(Error::arg(format!("empty year range {start}..{end}")));
        }
        Ok(YearRange { start, end })
    }

    pub fn len(&self) -> usize {
        (self.end - self.start + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

impl fmt::Display for YearRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.start, self.end)
    }
}

/// An ordered list of contiguous, non-overlapping year blocks covering a span.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockPartition {
    blocks: Vec<YearRange>,
}

impl BlockPartition {
    /// Blocks must be non-empty, ordered, and exactly contiguous.
    pub fn new(blocks: Vec<YearRange>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::arg("partition has no blocks"));
        }
        for pair in blocks.windows(2) {
            if pair[1].start != pair[0].end + 1 {
                return Err(Error::arg(format!(
                    "blocks must be contiguous: {} then {}",
                    pair[0], pair[1]
                )));
            }
        }
        Ok(BlockPartition { blocks })
    }

    /// Build from consecutive block sizes starting at `start_year`.
    pub fn from_sizes(start_year: i32, sizes: &[usize]) -> Result<Self> {
        if sizes.contains(&0) {
            return Err(Error::arg("block sizes must be positive"));
        }
        let mut blocks = Vec::with_capacity(sizes.len());
        let mut year = start_year;
        for &s in sizes {
            let end = year + s as i32 - 1;
            blocks.push(YearRange { start: year, end });
            year = end + 1;
        }
        BlockPartition::new(blocks)
    }

    /// Split `n_years` years into `t` near-equal blocks, smaller blocks
    /// first. For 37 years this gives (18,19), (9,9,9,10), (7,7,7,8,8) for
    /// t = 2, 4, 5.
    pub fn even_blocks(start_year: i32, n_years: usize, t: usize) -> Result<Self> {
        if t == 0 || t > n_years {
            return Err(Error::arg(format!(
                "cannot split {n_years} years into {t} blocks"
            )));
        }
        let q = n_years / t;
        let r = n_years % t;
        let sizes: Vec<usize> = (0..t).map(|i| if i < t - r { q } else { q + 1 }).collect();
        BlockPartition::from_sizes(start_year, &sizes)
    }

    /// The three-decade split (13, 12, 12) used for mean and variance
    /// analysis of a 37-year span.
    pub fn decades(start_year: i32) -> Self {
        BlockPartition::from_sizes(start_year, &[13, 12, 12]).expect("static sizes")
    }

    /// The (12, 11, 14) three-block split used for band analysis of a
    /// 37-year span.
    pub fn bands_t3(start_year: i32) -> Self {
        BlockPartition::from_sizes(start_year, &[12, 11, 14]).expect("static sizes")
    }

    /// The whole span as one block.
    pub fn single(start_year: i32, end_year: i32) -> Result<Self> {
        Ok(BlockPartition {
            blocks: vec![YearRange::new(start_year, end_year)?],
        })
    }

    pub fn blocks(&self) -> &[YearRange] {
        &self.blocks
    }

    pub fn n_blocks(&self) -> usize {
        self.blocks.len()
    }

    /// Inclusive (first, last) year covered by the partition.
    pub fn span(&self) -> (i32, i32) {
        (
            self.blocks.first().expect("non-empty").start,
            self.blocks.last().expect("non-empty").end,
        )
    }

    /// Does the partition cover exactly this year span?
    pub fn covers(&self, start: i32, end: i32) -> bool {
        self.span() == (start, end)
    }
}

impl fmt::Display for BlockPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.blocks.iter().map(|b| b.to_string()).collect();
        write!(f, "{}", parts.join(","))
    }
}
