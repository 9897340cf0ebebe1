//! Best-first branch and bound over axis-aligned boxes.
//!
//! The engine is problem-agnostic: a [`Bounder`] supplies a lower bound (with
//! a witness parameter achieving it) and an upper bound for any box. Boxes are
//! popped in order of decreasing upper bound; the search stops as soon as a
//! popped box's upper bound equals the best lower bound found so far, or when
//! the queue runs dry. Boxes at the depth limit are still evaluated for their
//! lower bound but never split.

use alloc::collections::BinaryHeap;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

use crate::interval::Interval;
use crate::math;

/// Axis-aligned search box with a depth counter.
#[derive(Debug, Clone, PartialEq)]
pub struct Cube {
    lo: Vec<f64>,
    hi: Vec<f64>,
    depth: u32,
}

/// Error raised when a search is misconfigured.
#[derive(Debug, Clone, PartialEq)]
pub enum EngineError {
    /// Bounder dimension differs from the initial cube's.
    DimensionMismatch { bounder: usize, cube: usize },
    /// The initial cube must start at depth 0.
    NonZeroInitialDepth(u32),
    /// Cube sides must be finite with `lo <= hi`.
    InvalidCube,
}

impl fmt::Display for EngineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::DimensionMismatch { bounder, cube } => {
                write!(f, "bounder branches over {bounder} dimensions but the cube has {cube}")
            }
            Self::NonZeroInitialDepth(d) => write!(f, "initial cube has depth {d}, expected 0"),
            Self::InvalidCube => f.write_str("cube sides must be finite with lo <= hi"),
        }
    }
}

impl core::error::Error for EngineError {}

impl Cube {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self, EngineError> {
        if lo.len() != hi.len()
            || lo.iter().zip(&hi).any(|(a, b)| !a.is_finite() || !b.is_finite() || a > b)
        {
            return Err(EngineError::InvalidCube);
        }
        Ok(Self { lo, hi, depth: 0 })
    }

    /// Product of the given side intervals.
    pub fn from_sides(sides: &[Interval]) -> Self {
        Self {
            lo: sides.iter().map(Interval::lo).collect(),
            hi: sides.iter().map(Interval::hi).collect(),
            depth: 0,
        }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    pub fn side(&self, k: usize) -> Interval {
        Interval::raw(self.lo[k], self.hi[k])
    }

    pub fn center(&self) -> Vec<f64> {
        self.lo.iter().zip(&self.hi).map(|(a, b)| 0.5 * (a + b)).collect()
    }

    /// Euclidean length of the main diagonal.
    pub fn diameter(&self) -> f64 {
        math::sqrt(self.lo.iter().zip(&self.hi).map(|(a, b)| (b - a) * (b - a)).sum())
    }

    pub fn volume(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(a, b)| b - a).product()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x.iter().zip(self.lo.iter().zip(&self.hi)).all(|(v, (a, b))| a <= v && v <= b)
    }

    /// Halve every side, producing `2^n` children one level deeper.
    pub fn split(&self) -> Vec<Cube> {
        let n = self.dim();
        let mid = self.center();
        (0..1usize << n)
            .map(|mask| {
                let mut lo = self.lo.clone();
                let mut hi = self.hi.clone();
                for k in 0..n {
                    if mask >> k & 1 == 0 {
                        hi[k] = mid[k];
                    } else {
                        lo[k] = mid[k];
                    }
                }
                Cube { lo, hi, depth: self.depth + 1 }
            })
            .collect()
    }
}

/// Diameter of a depth-`depth` cell of an `n`-dimensional cube with equal
/// initial sides `side`.
pub fn leaf_diameter(n: usize, depth: u32, side: f64) -> f64 {
    math::sqrt(n as f64) / math::powi(2.0, depth as i32) * side
}

/// Result of a lower-bound evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct LowerBound {
    pub count: usize,
    /// Full parameter vector achieving `count`. ACM bounders append the
    /// stabbed coordinate to the branched ones.
    pub witness: Vec<f64>,
}

/// Both bounds of one cube, as observed during a search.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundEval {
    pub lower: usize,
    pub lower_witness: Vec<f64>,
    pub upper: usize,
}

/// Per-problem bounding functions consumed by [`solve`].
pub trait Bounder {
    /// Dimension of the branching space.
    fn dim(&self) -> usize;

    /// A consensus count achieved somewhere in `cube` (for ACM bounders, with
    /// the stabbed coordinate free) together with its witness.
    fn lower(&self, cube: &Cube) -> LowerBound;

    /// A count no parameter inside `cube` can exceed.
    fn upper(&self, cube: &Cube) -> usize;
}

impl<B: Bounder + ?Sized> Bounder for &B {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn lower(&self, cube: &Cube) -> LowerBound {
        (**self).lower(cube)
    }
    fn upper(&self, cube: &Cube) -> usize {
        (**self).upper(cube)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SearchMode {
    /// Algorithm with pruning and early termination.
    #[default]
    BestFirst,
    /// Never prune, never stop early: visit every cube down to the depth
    /// limit. Only useful as a reference on tiny instances.
    Exhaustive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolveOptions {
    pub max_depth: u32,
    pub mode: SearchMode,
    pub record_trace: bool,
}

impl SolveOptions {
    pub fn with_depth(max_depth: u32) -> Self {
        Self { max_depth, mode: SearchMode::BestFirst, record_trace: false }
    }
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self::with_depth(10)
    }
}

/// One row of the bound trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TracePoint {
    pub iteration: u64,
    pub best_lower: usize,
    pub popped_upper: usize,
    pub queue_len: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub best_param: Vec<f64>,
    pub best_count: usize,
    /// Queue pops.
    pub iterations: u64,
    pub cubes_pruned: u64,
    pub cubes_split: u64,
    pub max_queue_len: usize,
    /// Seconds spent inside the search; zero without the `std` feature.
    pub wall_time: f64,
    pub bound_trace: Option<Vec<TracePoint>>,
}

/// A cube popped from the queue, handed to observers.
#[derive(Debug)]
pub struct Visit<'a> {
    pub cube: &'a Cube,
    pub iteration: u64,
    pub bounds: BoundEval,
}

struct Entry {
    upper: usize,
    seq: u64,
    cube: Cube,
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Entry {
    // max-heap: larger upper first, then deeper, then earlier insertion
    fn cmp(&self, other: &Self) -> Ordering {
        self.upper
            .cmp(&other.upper)
            .then(self.cube.depth.cmp(&other.cube.depth))
            .then(other.seq.cmp(&self.seq))
    }
}

/// Run branch and bound from `initial`.
pub fn solve<B: Bounder + ?Sized>(
    bounder: &B,
    initial: Cube,
    opts: &SolveOptions,
) -> Result<SolveReport, EngineError> {
    solve_observed(bounder, initial, opts, |_| {})
}

/// [`solve`], calling `observe` for every popped cube.
pub fn solve_observed<B, F>(
    bounder: &B,
    initial: Cube,
    opts: &SolveOptions,
    mut observe: F,
) -> Result<SolveReport, EngineError>
where
    B: Bounder + ?Sized,
    F: FnMut(&Visit<'_>),
{
    if bounder.dim() != initial.dim() {
        return Err(EngineError::DimensionMismatch { bounder: bounder.dim(), cube: initial.dim() });
    }
    if initial.depth != 0 {
        return Err(EngineError::NonZeroInitialDepth(initial.depth));
    }
    #[cfg(feature = "std")]
    let started = std::time::Instant::now();

    let exhaustive = opts.mode == SearchMode::Exhaustive;
    let mut best = bounder.lower(&initial);
    let mut pending_root_lower = Some(best.clone());
    let mut heap = BinaryHeap::new();
    let mut seq = 0u64;
    heap.push(Entry { upper: bounder.upper(&initial), seq, cube: initial });

    let mut iterations = 0u64;
    let mut pruned = 0u64;
    let mut split = 0u64;
    let mut max_queue = 1usize;
    let mut trace = opts.record_trace.then(Vec::new);

    while let Some(Entry { upper, cube, .. }) = heap.pop() {
        iterations += 1;
        let lb = pending_root_lower.take().unwrap_or_else(|| bounder.lower(&cube));
        observe(&Visit {
            cube: &cube,
            iteration: iterations,
            bounds: BoundEval { lower: lb.count, lower_witness: lb.witness.clone(), upper },
        });
        if lb.count > best.count {
            best = lb;
        }
        if let Some(t) = trace.as_mut() {
            t.push(TracePoint {
                iteration: iterations,
                best_lower: best.count,
                popped_upper: upper,
                queue_len: heap.len(),
            });
        }

        if !exhaustive && upper == best.count {
            break;
        }
        if exhaustive || upper > best.count {
            if cube.depth >= opts.max_depth {
                continue;
            }
            split += 1;
            for child in cube.split() {
                // a child can never hold more than its parent
                let u = bounder.upper(&child).min(upper);
                if !exhaustive && u < best.count {
                    pruned += 1;
                    continue;
                }
                seq += 1;
                heap.push(Entry { upper: u, seq, cube: child });
            }
            max_queue = max_queue.max(heap.len());
        } else {
            pruned += 1;
        }
    }

    #[cfg(feature = "std")]
    let wall_time = started.elapsed().as_secs_f64();
    #[cfg(not(feature = "std"))]
    let wall_time = 0.0;

    Ok(SolveReport {
        best_param: best.witness,
        best_count: best.count,
        iterations,
        cubes_pruned: pruned,
        cubes_split: split,
        max_queue_len: max_queue,
        wall_time,
        bound_trace: trace,
    })
}
