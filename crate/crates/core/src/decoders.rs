//! Detectors over the SM tree: branches are the `M·Nt` hypotheses, levels
//! the `Nr` receive dimensions, and node `(i, j)` holds the partial metric
//! `v(i, j) = Σ_{n<=i} |y_n - x_{n,j}|²`.
//!
//! Ties are always broken towards the lowest flat index.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64;

use crate::error::Result;
use crate::model::{validate_psi, CandidateSet};

/// Result of decoding one received vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DecodeOutcome {
    pub estimated_index: usize,
    /// Visited nodes counted from the `ψ_col` retained level-1 nodes.
    pub visited_paper: usize,
    /// Visited nodes counted from all `M·Nt` level-1 nodes.
    pub visited_total: usize,
    /// The best-first loop ran into its iteration cap.
    pub cap_hit: bool,
}

#[inline]
fn node_increment(y: Complex64, x: Complex64) -> f64 {
    (y - x).norm_sqr()
}

/// Partial squared distance over the first `depth` receive dimensions.
pub fn level_metric(y: &[Complex64], x: &[Complex64], depth: usize) -> f64 {
    y.iter()
        .zip(x)
        .take(depth)
        .fold(0.0, |acc, (&a, &b)| acc + node_increment(a, b))
}

#[inline]
fn better(a: (f64, usize), b: (f64, usize)) -> bool {
    match a.0.total_cmp(&b.0) {
        Ordering::Less => true,
        Ordering::Equal => a.1 < b.1,
        Ordering::Greater => false,
    }
}

/// Exhaustive ML over all `M·Nt` full-depth metrics.
pub fn ml_decode(y: &[Complex64], candidates: &CandidateSet) -> DecodeOutcome {
    let depth = candidates.depth();
    let mut best = (f64::INFINITY, 0);
    for j in 0..candidates.len() {
        let m = level_metric(y, candidates.vector(j), depth);
        if better((m, j), best) {
            best = (m, j);
        }
    }
    let nodes = candidates.len() * depth;
    DecodeOutcome {
        estimated_index: best.1,
        visited_paper: nodes,
        visited_total: nodes,
        cap_hit: false,
    }
}

/// The `ψ_col` branches with the smallest level-1 metric, as
/// `(metric, index)` pairs in no particular order.
fn screen(y: &[Complex64], candidates: &CandidateSet, psi_col: usize) -> Vec<(f64, usize)> {
    let mut level1: Vec<(f64, usize)> = (0..candidates.len())
        .map(|j| (node_increment(y[0], candidates.element(0, j)), j))
        .collect();
    if psi_col < level1.len() {
        level1.select_nth_unstable_by(psi_col - 1, |a, b| {
            a.0.total_cmp(&b.0).then(a.1.cmp(&b.1))
        });
        level1.truncate(psi_col);
    }
    level1
}

/// Indices of the `ψ_col` smallest level-1 metrics, ascending by index.
pub fn first_level_survivors(
    y: &[Complex64],
    candidates: &CandidateSet,
    psi_col: usize,
) -> Result<Vec<usize>> {
    validate_psi(1, psi_col, candidates.depth(), candidates.len())?;
    let mut kept: Vec<usize> = screen(y, candidates, psi_col).into_iter().map(|(_, j)| j).collect();
    kept.sort_unstable();
    Ok(kept)
}

/// Exhaustive search of the reduced `ψ_row × ψ_col` tree.
///
/// Reference for [`rsd_decode`]: both must always agree.
pub fn reduced_exhaustive_decode(
    y: &[Complex64],
    candidates: &CandidateSet,
    psi_row: usize,
    psi_col: usize,
) -> Result<usize> {
    validate_psi(psi_row, psi_col, candidates.depth(), candidates.len())?;
    let best = screen(y, candidates, psi_col)
        .into_iter()
        .map(|(_, j)| (level_metric(y, candidates.vector(j), psi_row), j))
        .fold((f64::INFINITY, usize::MAX), |best, cur| if better(cur, best) { cur } else { best });
    Ok(best.1)
}

/// Best-first reliable sphere decoding of one received vector.
pub fn rsd_decode(
    y: &[Complex64],
    candidates: &CandidateSet,
    psi_row: usize,
    psi_col: usize,
) -> Result<DecodeOutcome> {
    Ok(TreeState::new(y, candidates, psi_row, psi_col)?.run())
}

/// One retained branch: its current depth and frontier metric.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frontier {
    pub index: usize,
    pub depth: usize,
    pub metric: f64,
}

impl Eq for Frontier {}

impl Ord for Frontier {
    // Reversed so that BinaryHeap pops the smallest (metric, index).
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .metric
            .total_cmp(&self.metric)
            .then(other.index.cmp(&self.index))
    }
}

impl PartialOrd for Frontier {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Outcome of one best-first iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Step {
    /// The minimal branch grew by one level.
    Extended(Frontier),
    /// The minimal branch already sits at depth `ψ_row`.
    Decided(usize),
    /// `ψ_row·ψ_col` iterations elapsed without a decision.
    CapHit(usize),
}

/// Per-call search state of the reliable sphere decoder.
#[derive(Debug, Clone)]
pub struct TreeState<'a> {
    y: &'a [Complex64],
    candidates: &'a CandidateSet,
    psi_row: usize,
    psi_col: usize,
    frontier: BinaryHeap<Frontier>,
    iterations: usize,
    extensions: usize,
}

impl<'a> TreeState<'a> {
    /// Expands every level-1 node and keeps the `ψ_col` smallest.
    pub fn new(
        y: &'a [Complex64],
        candidates: &'a CandidateSet,
        psi_row: usize,
        psi_col: usize,
    ) -> Result<Self> {
        validate_psi(psi_row, psi_col, candidates.depth(), candidates.len())?;
        let frontier = screen(y, candidates, psi_col)
            .into_iter()
            .map(|(metric, index)| Frontier {
                index,
                depth: 1,
                metric,
            })
            .collect::<Vec<_>>()
            .into();
        Ok(TreeState {
            y,
            candidates,
            psi_row,
            psi_col,
            frontier,
            iterations: 0,
            extensions: 0,
        })
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn extensions(&self) -> usize {
        self.extensions
    }

    pub fn iteration_cap(&self) -> usize {
        self.psi_row * self.psi_col
    }

    /// Retained branch indices, ascending.
    pub fn kept_indices(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.frontier.iter().map(|f| f.index).collect();
        v.sort_unstable();
        v
    }

    /// Frontier of every retained branch, ascending by index.
    pub fn frontier(&self) -> Vec<Frontier> {
        let mut v: Vec<Frontier> = self.frontier.iter().copied().collect();
        v.sort_unstable_by_key(|f| f.index);
        v
    }

    pub fn step(&mut self) -> Step {
        let top = *self.frontier.peek().expect("psi_col >= 1");
        if self.iterations >= self.iteration_cap() {
            return Step::CapHit(top.index);
        }
        if top.depth == self.psi_row {
            return Step::Decided(top.index);
        }
        let mut grown = self.frontier.pop().expect("non-empty");
        grown.metric += node_increment(
            self.y[grown.depth],
            self.candidates.element(grown.depth, grown.index),
        );
        grown.depth += 1;
        self.frontier.push(grown);
        self.extensions += 1;
        self.iterations += 1;
        Step::Extended(grown)
    }

    pub fn run(mut self) -> DecodeOutcome {
        let (estimated_index, cap_hit) = loop {
            match self.step() {
                Step::Extended(_) => continue,
                Step::Decided(j) => break (j, false),
                Step::CapHit(j) => break (j, true),
            }
        };
        let visited_paper = self.psi_col + self.extensions;
        DecodeOutcome {
            estimated_index,
            visited_paper,
            visited_total: visited_paper + (self.candidates.len() - self.psi_col),
            cap_hit,
        }
    }
}

/// A detector usable by the simulation harness.
pub trait Detector: Send + Sync {
    fn decode(&self, y: &[Complex64], candidates: &CandidateSet) -> DecodeOutcome;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct MlDecoder;

impl Detector for MlDecoder {
    fn decode(&self, y: &[Complex64], candidates: &CandidateSet) -> DecodeOutcome {
        ml_decode(y, candidates)
    }
}

/// Reliable sphere decoder with fixed `(ψ_row, ψ_col)`.
#[derive(Debug, Clone, Copy)]
pub struct RsdDecoder {
    psi_row: usize,
    psi_col: usize,
}

impl RsdDecoder {
    /// Validates the parameters against an `nr`-level, `branches`-wide tree.
    pub fn new(psi_row: usize, psi_col: usize, nr: usize, branches: usize) -> Result<Self> {
        validate_psi(psi_row, psi_col, nr, branches)?;
        Ok(RsdDecoder { psi_row, psi_col })
    }

    pub fn psi_row(&self) -> usize {
        self.psi_row
    }

    pub fn psi_col(&self) -> usize {
        self.psi_col
    }
}

impl Detector for RsdDecoder {
    fn decode(&self, y: &[Complex64], candidates: &CandidateSet) -> DecodeOutcome {
        rsd_decode(y, candidates, self.psi_row, self.psi_col)
            .expect("parameters validated at construction")
    }
}
