//! Quality measures for a fitted histogram against a known truth: integrated
//! squared error, boundary losses between pixelized inner boundaries, and the
//! equally spaced grid baseline.

use std::collections::{BTreeSet, HashMap};

use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::geometry::{Axis, Dataset2D, DensityVector, GridSpec, Partition, Rect, Region};
use crate::nml::ml_densities;
use crate::synth::{sine_curve, GroundTruth};

/// Boundary pixel spacing used throughout the benchmarks (10 ε at ε = 0.001).
pub const DEFAULT_PIXEL: f64 = 0.01;

/// Pixel centers on the inner boundary of a partition, in coordinate units.
#[derive(Debug, Clone, PartialEq)]
pub struct PixelSet {
    pub pixel_size: f64,
    pub pixels: Vec<[f64; 2]>,
}

impl PixelSet {
    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }
}

fn pixel_cells(grid: &GridSpec, pixel_size: f64) -> Result<i64> {
    let t = pixel_size / grid.epsilon();
    let k = t.round();
    if k < 1.0 || (t - k).abs() > 1e-6 * t {
        return invalid(format!(
            "pixel size {pixel_size} is not a multiple of epsilon {}",
            grid.epsilon()
        ));
    }
    Ok(k as i64)
}

/// Breaks every inner boundary segment into pixels of side `pixel_size`.
///
/// Pixels sit on a global grid anchored at the origin of S: a vertical
/// segment at `x` yields centers `(x, (k + 1/2) p)` for every pixel row `k`
/// it passes through. Segments shared by several region pairs are emitted
/// once; the outer boundary of S is never included.
pub fn boundary_pixels(partition: &Partition, pixel_size: f64) -> Result<PixelSet> {
    let grid = partition.grid();
    let p = pixel_cells(grid, pixel_size)?;
    // Keys in half-lattice units so pixel centers stay integral.
    let mut keys: BTreeSet<[i64; 2]> = BTreeSet::new();
    for seg in partition.inner_segments() {
        let first = seg.lo.div_euclid(p);
        let last = (seg.hi + p - 1).div_euclid(p);
        for k in first..last {
            let along = (2 * k + 1) * p;
            let across = 2 * seg.at;
            keys.insert(match seg.orientation {
                Axis::Vertical => [across, along],
                Axis::Horizontal => [along, across],
            });
        }
    }
    let eps = grid.epsilon();
    let [ox, oy] = grid.origin();
    Ok(PixelSet {
        pixel_size,
        pixels: keys
            .into_iter()
            .map(|[x, y]| [ox + x as f64 * eps / 2.0, oy + y as f64 * eps / 2.0])
            .collect(),
    })
}

/// Pixels of side `pixel_size` crossed by the sine curve on S.
pub fn sine_pixels(grid: &GridSpec, m: u32, pixel_size: f64) -> PixelSet {
    let [ox, oy] = grid.origin();
    let width = grid.extent()[0];
    let steps = ((width / pixel_size) * 20.0).ceil() as i64;
    let mut keys = BTreeSet::new();
    for s in 0..=steps {
        let x = ox + width * s as f64 / steps as f64;
        let y = sine_curve(m, x);
        let i = ((x - ox) / pixel_size).floor().min((width / pixel_size).ceil() - 1.0) as i64;
        let j = ((y - oy) / pixel_size).floor() as i64;
        keys.insert([i, j]);
    }
    PixelSet {
        pixel_size,
        pixels: keys
            .into_iter()
            .map(|[i, j]| {
                [
                    ox + (i as f64 + 0.5) * pixel_size,
                    oy + (j as f64 + 0.5) * pixel_size,
                ]
            })
            .collect(),
    }
}

/// Euclidean distance from `p` to the graph of the sine curve over [0, 1],
/// measured against a polyline of 20 000 segments.
pub fn distance_to_sine(m: u32, p: [f64; 2]) -> f64 {
    const STEPS: usize = 20_000;
    let pts: Vec<[f64; 2]> = (0..=STEPS)
        .map(|i| {
            let x = i as f64 / STEPS as f64;
            [x, sine_curve(m, x)]
        })
        .collect();
    pts.windows(2)
        .map(|w| point_segment_distance(p, w[0], w[1]))
        .fold(f64::INFINITY, f64::min)
}

fn point_segment_distance(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let d = [b[0] - a[0], b[1] - a[1]];
    let len2 = d[0] * d[0] + d[1] * d[1];
    let t = if len2 == 0.0 {
        0.0
    } else {
        (((p[0] - a[0]) * d[0] + (p[1] - a[1]) * d[1]) / len2).clamp(0.0, 1.0)
    };
    let q = [a[0] + t * d[0], a[1] + t * d[1]];
    ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt()
}

/// Uniform bucket grid for exact nearest-neighbor queries.
struct BucketIndex<'a> {
    cell: f64,
    buckets: HashMap<(i64, i64), Vec<&'a [f64; 2]>>,
    lo: (i64, i64),
    hi: (i64, i64),
}

impl<'a> BucketIndex<'a> {
    fn new(points: &'a [[f64; 2]], cell: f64) -> Self {
        let mut buckets: HashMap<(i64, i64), Vec<&[f64; 2]>> = HashMap::new();
        let mut lo = (i64::MAX, i64::MAX);
        let mut hi = (i64::MIN, i64::MIN);
        for p in points {
            let k = Self::key(cell, p);
            lo = (lo.0.min(k.0), lo.1.min(k.1));
            hi = (hi.0.max(k.0), hi.1.max(k.1));
            buckets.entry(k).or_default().push(p);
        }
        Self { cell, buckets, lo, hi }
    }

    fn key(cell: f64, p: &[f64; 2]) -> (i64, i64) {
        ((p[0] / cell).floor() as i64, (p[1] / cell).floor() as i64)
    }

    /// Squared distance to the nearest indexed point.
    fn nearest_sq(&self, q: &[f64; 2]) -> f64 {
        let (qx, qy) = Self::key(self.cell, q);
        let r_max = [qx - self.lo.0, self.hi.0 - qx, qy - self.lo.1, self.hi.1 - qy]
            .into_iter()
            .max()
            .unwrap_or(0)
            .max(0);
        let mut best = f64::INFINITY;
        let visit = |kx: i64, ky: i64, best: &mut f64| {
            if let Some(pts) = self.buckets.get(&(kx, ky)) {
                for p in pts {
                    let d = (p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2);
                    if d < *best {
                        *best = d;
                    }
                }
            }
        };
        for r in 0..=r_max {
            if r == 0 {
                visit(qx, qy, &mut best);
            } else {
                for dx in -r..=r {
                    visit(qx + dx, qy - r, &mut best);
                    visit(qx + dx, qy + r, &mut best);
                }
                for dy in (-r + 1)..r {
                    visit(qx - r, qy + dy, &mut best);
                    visit(qx + r, qy + dy, &mut best);
                }
            }
            let reach = r as f64 * self.cell;
            if best <= reach * reach {
                break;
            }
        }
        best
    }
}

/// Directed boundary losses between a learned and a true pixel set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryLosses {
    /// Σ over learned pixels of the squared distance to the nearest true pixel.
    pub l_learn: f64,
    /// Σ over true pixels of the squared distance to the nearest learned pixel.
    pub l_true: f64,
    /// `l_learn` divided by the number of learned pixels (0 if none).
    pub mean_learn: f64,
    /// `l_true` divided by the number of true pixels (0 if none).
    pub mean_true: f64,
    /// The learned partition has no inner boundary while the truth does;
    /// `l_true` is then `+inf`.
    pub learned_empty: bool,
    /// The truth has no inner boundary while the learned partition does;
    /// `l_learn` is then `+inf`.
    pub truth_empty: bool,
}

fn directed_sum(from: &PixelSet, to: &PixelSet) -> f64 {
    let cell = to.pixel_size.max(from.pixel_size);
    let index = BucketIndex::new(&to.pixels, cell);
    let d: Vec<f64> = from.pixels.par_iter().map(|p| index.nearest_sq(p)).collect();
    d.iter().sum()
}

/// Sums of squared nearest-pixel distances in both directions.
pub fn boundary_losses(learned: &PixelSet, truth: &PixelSet) -> BoundaryLosses {
    let (l_learn, l_true) = match (learned.is_empty(), truth.is_empty()) {
        (true, true) => (0.0, 0.0),
        (true, false) => (0.0, f64::INFINITY),
        (false, true) => (f64::INFINITY, 0.0),
        (false, false) => (directed_sum(learned, truth), directed_sum(truth, learned)),
    };
    let mean = |v: f64, n: usize| if n == 0 { 0.0 } else { v / n as f64 };
    BoundaryLosses {
        l_learn,
        l_true,
        mean_learn: mean(l_learn, learned.len()),
        mean_true: mean(l_true, truth.len()),
        learned_empty: learned.is_empty() && !truth.is_empty(),
        truth_empty: truth.is_empty() && !learned.is_empty(),
    }
}

fn abs_rect(grid: &GridSpec, r: &Rect) -> [f64; 4] {
    let a = grid.to_coord([r.x0, r.y0]);
    let b = grid.to_coord([r.x1, r.y1]);
    [a[0], a[1], b[0], b[1]]
}

/// ∫_S (f - f̂)² for a piecewise-constant truth, by overlaying rectangles.
/// Exact when both partitions share a lattice.
fn mise_overlay(truth: &Partition, truth_f: &[f64], est: &Partition, est_f: &[f64]) -> f64 {
    let same_grid = truth.grid() == est.grid();
    let cell = truth.grid().cell_area();
    let mut total = 0.0;
    for (tr, &ft) in truth.regions().iter().zip(truth_f) {
        for t in tr.rects() {
            let mut covered = 0.0;
            let t_area;
            if same_grid {
                t_area = t.area() as f64 * cell;
                for (er, &fe) in est.regions().iter().zip(est_f) {
                    for e in er.rects() {
                        if let Some(i) = t.intersection(e) {
                            let a = i.area() as f64 * cell;
                            covered += a;
                            total += (ft - fe).powi(2) * a;
                        }
                    }
                }
            } else {
                let ta = abs_rect(truth.grid(), t);
                t_area = (ta[2] - ta[0]) * (ta[3] - ta[1]);
                for (er, &fe) in est.regions().iter().zip(est_f) {
                    for e in er.rects() {
                        let ea = abs_rect(est.grid(), e);
                        let w = ta[2].min(ea[2]) - ta[0].max(ea[0]);
                        let h = ta[3].min(ea[3]) - ta[1].max(ea[1]);
                        if w > 0.0 && h > 0.0 {
                            covered += w * h;
                            total += (ft - fe).powi(2) * w * h;
                        }
                    }
                }
            }
            total += ft * ft * (t_area - covered).max(0.0);
        }
    }
    total
}

/// Truth-cell ranges `x0..x1, y0..y1` covered by an estimate rectangle, and
/// its density.
type Span = (i64, i64, i64, i64, f64);

/// ∫_S (f - f̂)² by the midpoint rule on the ε-cells of the truth's S, for
/// several estimates at once so the truth is evaluated once per cell.
fn mise_midpoint(truth: &GroundTruth, ests: &[(&Partition, &[f64])]) -> Vec<f64> {
    let grid = truth.grid();
    let eps = grid.epsilon();
    let [ox, oy] = grid.origin();
    let [w, h] = grid.cells();
    // Est rectangles as ranges of truth cells whose centers they contain.
    let first_center = |lo: f64, o: f64| ((lo - o) / eps - 0.5).ceil() as i64;
    let spans: Vec<Vec<Span>> = ests
        .iter()
        .map(|&(est, est_f)| {
            est.regions()
                .iter()
                .zip(est_f)
                .flat_map(|(r, &f)| {
                    r.rects().iter().map(move |rect| {
                        let a = abs_rect(est.grid(), rect);
                        (
                            first_center(a[0], ox).clamp(0, w),
                            first_center(a[2], ox).clamp(0, w),
                            first_center(a[1], oy).clamp(0, h),
                            first_center(a[3], oy).clamp(0, h),
                            f,
                        )
                    })
                })
                .collect()
        })
        .collect();
    let rows: Vec<Vec<f64>> = (0..h)
        .into_par_iter()
        .map(|j| {
            let y = oy + (j as f64 + 0.5) * eps;
            let f: Vec<f64> = (0..w)
                .map(|i| truth.density([ox + (i as f64 + 0.5) * eps, y]))
                .collect();
            let mut row = vec![0.0f64; w as usize];
            spans
                .iter()
                .map(|sp| {
                    row.fill(0.0);
                    for &(x0, x1, y0, y1, v) in sp {
                        if y0 <= j && j < y1 {
                            row[x0 as usize..x1 as usize].fill(v);
                        }
                    }
                    f.iter().zip(&row).map(|(a, b)| (a - b).powi(2)).sum::<f64>()
                })
                .collect()
        })
        .collect();
    // Summed in row order so the result does not depend on thread count.
    (0..ests.len())
        .map(|e| rows.iter().map(|r| r[e]).sum::<f64>() * eps * eps)
        .collect()
}

/// Integrated squared error of one estimate against the truth over the
/// truth's sample space. Averaging over repetitions is left to the caller.
pub fn mise_single(truth: &GroundTruth, est: &Partition, est_densities: &DensityVector) -> f64 {
    mise_many(truth, &[(est, est_densities)])[0]
}

/// [`mise_single`] for several estimates of the same truth.
pub fn mise_many(truth: &GroundTruth, ests: &[(&Partition, &DensityVector)]) -> Vec<f64> {
    match truth {
        GroundTruth::Histogram(h) => ests
            .iter()
            .map(|(est, f)| mise_overlay(&h.partition, h.densities.values(), est, f.values()))
            .collect(),
        _ => {
            let plain: Vec<(&Partition, &[f64])> = ests.iter().map(|(p, f)| (*p, f.values())).collect();
            mise_midpoint(truth, &plain)
        }
    }
}

/// Boundary pixels of a ground truth; `None` for families without an inner
/// boundary (the Gaussian).
pub fn truth_pixels(truth: &GroundTruth, pixel_size: f64) -> Result<Option<PixelSet>> {
    Ok(match truth {
        GroundTruth::Histogram(h) => Some(boundary_pixels(&h.partition, pixel_size)?),
        GroundTruth::Sine { grid, m } => Some(sine_pixels(grid, *m, pixel_size)),
        GroundTruth::Gaussian { .. } => None,
    })
}

/// Columns and rows of the equally spaced baseline grid for `target` regions:
/// the most nearly square shape (`|a - b| <= 1`) with the fewest cells not
/// below `target`; ties prefer more columns.
pub fn grid_shape(target: usize) -> (usize, usize) {
    let target = target.max(1);
    let mut best: Option<(usize, usize)> = None;
    let mut a: usize = 1;
    loop {
        for b in [a.saturating_sub(1), a, a + 1] {
            if b == 0 || a * b < target {
                continue;
            }
            let better = match best {
                None => true,
                Some((ba, bb)) => a * b < ba * bb || (a * b == ba * bb && a > ba),
            };
            if better {
                best = Some((a, b));
            }
        }
        if let Some((ba, bb)) = best {
            if (a - 1) * (a - 1) > ba * bb {
                break;
            }
        }
        a += 1;
    }
    best.unwrap()
}

/// Equally spaced grid on `grid`'s sample space with about `target` cells
/// and maximum likelihood densities from `data`.
pub fn fixed_grid(data: &Dataset2D, grid: &GridSpec, target: usize) -> Result<(Partition, DensityVector)> {
    if target < 1 {
        return invalid("target region count must be at least 1");
    }
    let (a, b) = grid_shape(target);
    let [w, h] = grid.cells();
    let (a, b) = (a.min(w as usize), b.min(h as usize));
    let xs: Vec<i64> = (0..=a).map(|i| (i as i64 * w + a as i64 / 2) / a as i64).collect();
    let ys: Vec<i64> = (0..=b).map(|j| (j as i64 * h + b as i64 / 2) / b as i64).collect();
    let mut counts = vec![0usize; a * b];
    for p in data.points() {
        let col = (xs.partition_point(|&x| x <= p[0]) - 1).min(a - 1);
        let row = (ys.partition_point(|&y| y <= p[1]) - 1).min(b - 1);
        counts[row * a + col] += 1;
    }
    let mut regions = Vec::with_capacity(a * b);
    for row in 0..b {
        for col in 0..a {
            let r = Rect::new(xs[col], ys[row], xs[col + 1], ys[row + 1])?;
            regions.push(Region::with_count(vec![r], counts[row * a + col])?);
        }
    }
    let partition = Partition::new(grid.clone(), regions)?;
    let densities = if data.is_empty() {
        let area = grid.extent()[0] * grid.extent()[1];
        DensityVector(vec![1.0 / area; partition.len()])
    } else {
        ml_densities(&partition, data)?
    };
    Ok((partition, densities))
}

/// Summary of one fitted partition against its truth.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub mise: f64,
    pub losses: Option<BoundaryLosses>,
    pub region_count_learned: usize,
    pub region_count_true: Option<usize>,
    pub runtime_seconds: f64,
}

/// MISE and boundary losses of an estimate. `runtime_seconds` is left at
/// zero for the caller to fill in.
pub fn evaluate(
    truth: &GroundTruth,
    est: &Partition,
    est_densities: &DensityVector,
    pixel_size: f64,
) -> Result<EvalReport> {
    let mise = mise_single(truth, est, est_densities);
    let losses = match truth_pixels(truth, pixel_size)? {
        Some(tp) => {
            let lp = boundary_pixels(est, pixel_size)?;
            Some(boundary_losses(&lp, &tp))
        }
        None => None,
    };
    Ok(EvalReport {
        mise,
        losses,
        region_count_learned: est.len(),
        region_count_true: truth.as_histogram().map(|h| h.partition.len()),
        runtime_seconds: 0.0,
    })
}
