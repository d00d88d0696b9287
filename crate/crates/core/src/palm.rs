//! Two-dimensional histograms by alternating partitioning and greedy merging.
//!
//! The partitioning step starts from `{S}` and repeatedly splits every region
//! along the current direction with the MDL-optimal 1-D histogram of its
//! projected points, flipping direction after each pass. It stops once a pass
//! in each direction leaves every region whole. The merging step then joins
//! neighboring regions greedily while the NML code length of the data does
//! not increase; the model prior is uniform there, so only the data term
//! is compared.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::geometry::{Axis, Dataset2D, DensityVector, Partition, Rect, Region};
use crate::hist1d::{select_from_counts, Extent1D};
use crate::nml::{log_comp, ml_densities, neg_log_likelihood, region_loglik, CodeLength};

/// Which sample space S the fit runs on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SampleSpace {
    /// Smallest lattice rectangle covering the data.
    #[default]
    BoundingBox,
    /// The sample space of the dataset's own grid.
    Grid,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PalmConfig {
    /// Maximum number of bins per region in one partitioning pass.
    pub k_max: usize,
    pub initial_direction: Axis,
    pub sample_space: SampleSpace,
}

impl PalmConfig {
    pub fn new(k_max: usize) -> Result<Self> {
        let c = Self {
            k_max,
            ..Self::default()
        };
        c.validate()?;
        Ok(c)
    }

    pub fn with_direction(mut self, dir: Axis) -> Self {
        self.initial_direction = dir;
        self
    }

    pub fn with_sample_space(mut self, space: SampleSpace) -> Self {
        self.sample_space = space;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.k_max < 2 {
            return invalid(format!("k_max must be at least 2, got {}", self.k_max));
        }
        Ok(())
    }
}

impl Default for PalmConfig {
    fn default() -> Self {
        Self {
            k_max: 300,
            initial_direction: Axis::Vertical,
            sample_space: SampleSpace::BoundingBox,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Partition,
    Merge,
}

/// Partition size and data code length after one pass or one merge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceEntry {
    pub phase: Phase,
    pub regions: usize,
    pub code_bits: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub data: Dataset2D,
    pub partition: Partition,
    pub densities: DensityVector,
    pub code_length: CodeLength,
    pub trace: Vec<TraceEntry>,
}

fn resolve_space(data: &Dataset2D, config: &PalmConfig) -> Dataset2D {
    match config.sample_space {
        SampleSpace::BoundingBox => data.crop_to_bounding_box(),
        SampleSpace::Grid => data.clone(),
    }
}

struct Cell {
    rect: Rect,
    members: Vec<u32>,
    // settled[axis]: the 1-D search along that axis already chose K = 1.
    settled: [bool; 2],
}

enum PassOutcome {
    Whole(Cell),
    Split(Vec<Cell>),
}

fn split_cell(cell: Cell, axis: Axis, data: &Dataset2D, k_max: usize) -> PassOutcome {
    let d = axis.coord();
    if cell.settled[d] {
        return PassOutcome::Whole(cell);
    }
    let (lo, hi) = (cell.rect.lo(axis), cell.rect.hi(axis));
    let points = data.points();
    let mut counts = vec![0u32; (hi - lo + 1) as usize];
    for &m in &cell.members {
        counts[(points[m as usize][d] - lo) as usize] += 1;
    }
    let extent = Extent1D::new(lo, hi, data.grid().epsilon()).expect("cells have positive width");
    let result = select_from_counts(&counts, &extent, k_max);
    let e = extent.interior_positions();
    debug_assert!(result.evaluations <= (k_max as u64) * e.max(1) * e.max(1));

    if result.chosen_k == 1 {
        let mut cell = cell;
        cell.settled[d] = true;
        return PassOutcome::Whole(cell);
    }
    let cuts = result.chosen_cuts().cuts();
    let rects = cell.rect.split(axis, cuts);
    let mut members: Vec<Vec<u32>> = vec![Vec::new(); rects.len()];
    for &m in &cell.members {
        let v = points[m as usize][d];
        members[cuts.partition_point(|&c| c <= v)].push(m);
    }
    PassOutcome::Split(
        rects
            .into_iter()
            .zip(members)
            .map(|(rect, members)| Cell {
                rect,
                members,
                settled: [false; 2],
            })
            .collect(),
    )
}

fn cells_to_partition(data: &Dataset2D, cells: &[Cell]) -> Partition {
    let regions = cells
        .iter()
        .map(|c| Region::from_parts_unchecked(vec![c.rect], c.rect.area(), c.members.len()))
        .collect();
    Partition::new_unchecked(data.grid().clone(), regions)
}

fn code_bits(partition: &Partition, n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    neg_log_likelihood(partition, n) + log_comp(n, partition.len()).expect("K >= 1").get(partition.len())
}

fn partition_with_trace(data: &Dataset2D, config: &PalmConfig) -> (Partition, Vec<TraceEntry>) {
    let n = data.len();
    let mut cells = vec![Cell {
        rect: data.grid().bounds(),
        members: (0..n as u32).collect(),
        settled: [false; 2],
    }];
    let mut trace = Vec::new();
    let mut axis = config.initial_direction;
    let mut idle_passes = 0;
    while idle_passes < 2 {
        let outcomes: Vec<PassOutcome> = std::mem::take(&mut cells)
            .into_par_iter()
            .map(|c| split_cell(c, axis, data, config.k_max))
            .collect();
        let mut split_any = false;
        for o in outcomes {
            match o {
                PassOutcome::Whole(c) => cells.push(c),
                PassOutcome::Split(children) => {
                    split_any = true;
                    cells.extend(children);
                }
            }
        }
        if split_any {
            idle_passes = 0;
            let p = cells_to_partition(data, &cells);
            trace.push(TraceEntry {
                phase: Phase::Partition,
                regions: p.len(),
                code_bits: code_bits(&p, n),
            });
        } else {
            idle_passes += 1;
        }
        axis = axis.flip();
    }
    let p = cells_to_partition(data, &cells);
    if trace.is_empty() {
        trace.push(TraceEntry {
            phase: Phase::Partition,
            regions: 1,
            code_bits: code_bits(&p, n),
        });
    }
    (p, trace)
}

/// Partitioning step: alternating MDL-optimal splits of every region until a
/// pass in each direction changes nothing. All regions are single rectangles.
pub fn partition_step(data: &Dataset2D, config: &PalmConfig) -> Result<Partition> {
    config.validate()?;
    let data = resolve_space(data, config);
    Ok(partition_with_trace(&data, config).0)
}

fn merge_with_trace(partition: Partition, n: usize) -> (Partition, Vec<TraceEntry>) {
    let k0 = partition.len();
    let grid = partition.grid().clone();
    let comp = log_comp(n, k0).expect("K >= 1");
    let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); k0];
    for (a, b) in partition.neighbor_pairs() {
        adj[a].insert(b);
        adj[b].insert(a);
    }
    let mut regions: Vec<Option<Region>> = partition.regions().iter().cloned().map(Some).collect();
    let mut loglik: Vec<f64> = partition
        .regions()
        .iter()
        .map(|r| region_loglik(r.count(), r.area_cells(), n))
        .collect();

    // Increase in -log2 P caused by merging the pair.
    let cost = |regions: &[Option<Region>], loglik: &[f64], a: usize, b: usize| -> f64 {
        let (ra, rb) = (regions[a].as_ref().unwrap(), regions[b].as_ref().unwrap());
        let joint = region_loglik(ra.count() + rb.count(), ra.area_cells() + rb.area_cells(), n);
        loglik[a] + loglik[b] - joint
    };
    let mut pairs: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for (a, nb) in adj.iter().enumerate() {
        for &b in nb.range(a + 1..) {
            pairs.insert((a, b), cost(&regions, &loglik, a, b));
        }
    }

    let mut nll = -loglik.iter().sum::<f64>();
    let mut k = k0;
    let mut trace = vec![TraceEntry {
        phase: Phase::Merge,
        regions: k,
        code_bits: nll + comp.get(k),
    }];
    while k > 1 {
        let mut best: Option<((usize, usize), f64)> = None;
        for (&pair, &delta) in &pairs {
            if best.is_none_or(|(_, d)| delta < d) {
                best = Some((pair, delta));
            }
        }
        let Some(((a, b), delta)) = best else { break };
        // Candidate nll + delta + COMP(K-1) against current nll + COMP(K);
        // ties merge.
        if delta > comp.get(k) - comp.get(k - 1) {
            break;
        }
        let rb = regions[b].take().unwrap();
        let ra = regions[a].take().unwrap();
        regions[a] = Some(ra.merged(&rb));
        loglik[a] = region_loglik(
            regions[a].as_ref().unwrap().count(),
            regions[a].as_ref().unwrap().area_cells(),
            n,
        );
        loglik[b] = 0.0;

        let b_nbrs = std::mem::take(&mut adj[b]);
        for &c in &b_nbrs {
            adj[c].remove(&b);
            pairs.remove(&(c.min(b), c.max(b)));
            if c != a {
                adj[c].insert(a);
                adj[a].insert(c);
            }
        }
        adj[a].remove(&b);
        for &c in &adj[a] {
            pairs.insert((a.min(c), a.max(c)), cost(&regions, &loglik, a, c));
        }

        nll += delta;
        k -= 1;
        trace.push(TraceEntry {
            phase: Phase::Merge,
            regions: k,
            code_bits: nll + comp.get(k),
        });
    }
    let merged = Partition::new_unchecked(grid, regions.into_iter().flatten().collect());
    (merged, trace)
}

/// Merging step: greedily joins the neighboring pair with the smallest
/// resulting code length while that does not exceed the current one.
/// Equal-score pairs resolve to the smallest region indices.
pub fn merge_step(partition: Partition, data: &Dataset2D) -> Partition {
    merge_with_trace(partition, data.len()).0
}

/// Fits a two-dimensional MDL histogram: partitioning, then merging.
pub fn palm_fit(data: &Dataset2D, config: &PalmConfig) -> Result<FitResult> {
    config.validate()?;
    let data = resolve_space(data, config);
    let n = data.len();
    let (split, mut trace) = partition_with_trace(&data, config);
    let (partition, merge_trace) = merge_with_trace(split, n);
    trace.extend(merge_trace);

    #[cfg(debug_assertions)]
    if n.saturating_mul(partition.len()) <= 5_000_000 {
        partition.validate()?;
        partition.validate_counts(&data)?;
    }

    let densities = if n == 0 {
        let area = partition.grid().extent()[0] * partition.grid().extent()[1];
        DensityVector(vec![1.0 / area; partition.len()])
    } else {
        ml_densities(&partition, &data)?
    };
    let data_bits = code_bits(&partition, n);
    Ok(FitResult {
        data,
        partition,
        densities,
        // Partitions reachable by merging share one uniform prior, so the
        // model part is a constant and reported as zero.
        code_length: CodeLength::new(data_bits, 0.0),
        trace,
    })
}
