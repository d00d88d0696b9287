//! Seeded generators for the synthetic benchmark families, with their ground
//! truths.
//!
//! Every stream comes from xoshiro256++ seeded through SplitMix64
//! (`seed_from_u64`). Derived draws use fixed rules so other implementations
//! can reproduce them bit for bit:
//!
//! * `uniform()` = `(next_u64 >> 11) * 2^-53`, in `[0, 1)`;
//! * `below(k)` = `(next_u64 * k) >> 64` (128-bit product), in `0..k`;
//! * normals come in pairs from Box-Muller with `u1 = 1 - uniform()`,
//!   `u2 = uniform()`.
//!
//! Sampled positions are lattice cells chosen uniformly inside a rectangle;
//! the point recorded is the lower-left corner of the cell, so every sample
//! lies in its generating region under the half-open convention.

use std::f64::consts::PI;

use rand_core::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use statrs::function::erf::erf;

use crate::error::{invalid, Result};
use crate::geometry::{Dataset2D, DensityVector, GridSpec, Partition, Rect, Region};

/// Lattice precision of every synthetic family.
pub const DEFAULT_EPSILON: f64 = 0.001;

/// Reproducible random stream.
pub struct SeedRng(Xoshiro256PlusPlus);

impl SeedRng {
    pub fn new(seed: u64) -> Self {
        Self(Xoshiro256PlusPlus::seed_from_u64(seed))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn below(&mut self, k: u64) -> u64 {
        ((self.next_u64() as u128 * k as u128) >> 64) as u64
    }

    pub fn normal_pair(&mut self) -> (f64, f64) {
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        let r = (-2.0 * u1.ln()).sqrt();
        (r * (2.0 * PI * u2).cos(), r * (2.0 * PI * u2).sin())
    }

    fn cell_in(&mut self, r: &Rect) -> [i64; 2] {
        [
            r.x0 + self.below(r.width() as u64) as i64,
            r.y0 + self.below(r.height() as u64) as i64,
        ]
    }
}

/// Piecewise-constant truth: a partition with one density per region.
#[derive(Debug, Clone, PartialEq)]
pub struct HistogramTruth {
    pub partition: Partition,
    pub densities: DensityVector,
    /// `(V_x, H_y)` lattice positions for the quadrant family.
    pub lines: Option<[i64; 2]>,
}

/// The true density of a synthetic family.
#[derive(Debug, Clone, PartialEq)]
pub enum GroundTruth {
    Histogram(HistogramTruth),
    /// Density 4/3 above `g(x) = sin(2 m π x) / 4 + 1/2`, 2/3 below, on [0,1]².
    Sine { grid: GridSpec, m: u32 },
    /// Standard bivariate normal truncated to S and renormalized by `mass`,
    /// the probability it assigns to S.
    Gaussian {
        grid: GridSpec,
        correlation: f64,
        mass: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TruthKind {
    Partition,
    Quadrant,
    Sine,
    Gaussian,
}

/// `g(x) = sin(2 m π x) / 4 + 1/2`.
pub fn sine_curve(m: u32, x: f64) -> f64 {
    0.25 * (2.0 * m as f64 * PI * x).sin() + 0.5
}

fn std_normal_cdf(t: f64) -> f64 {
    0.5 * (1.0 + erf(t / std::f64::consts::SQRT_2))
}

impl GroundTruth {
    pub fn kind(&self) -> TruthKind {
        match self {
            GroundTruth::Histogram(h) if h.lines.is_some() => TruthKind::Quadrant,
            GroundTruth::Histogram(_) => TruthKind::Partition,
            GroundTruth::Sine { .. } => TruthKind::Sine,
            GroundTruth::Gaussian { .. } => TruthKind::Gaussian,
        }
    }

    pub fn grid(&self) -> &GridSpec {
        match self {
            GroundTruth::Histogram(h) => h.partition.grid(),
            GroundTruth::Sine { grid, .. } | GroundTruth::Gaussian { grid, .. } => grid,
        }
    }

    pub fn as_histogram(&self) -> Option<&HistogramTruth> {
        match self {
            GroundTruth::Histogram(h) => Some(h),
            _ => None,
        }
    }

    /// True density at a point in coordinate units; zero outside S.
    pub fn density(&self, p: [f64; 2]) -> f64 {
        let grid = self.grid();
        let o = grid.origin();
        let e = grid.extent();
        if p[0] < o[0] || p[1] < o[1] || p[0] > o[0] + e[0] || p[1] > o[1] + e[1] {
            return 0.0;
        }
        match self {
            GroundTruth::Histogram(h) => {
                let eps = grid.epsilon();
                let [w, hh] = grid.cells();
                let cell = [
                    (((p[0] - o[0]) / eps).floor() as i64).clamp(0, w - 1),
                    (((p[1] - o[1]) / eps).floor() as i64).clamp(0, hh - 1),
                ];
                h.partition
                    .region_of(cell)
                    .map_or(0.0, |j| h.densities.values()[j])
            }
            GroundTruth::Sine { m, .. } => {
                if p[1] > sine_curve(*m, p[0]) {
                    4.0 / 3.0
                } else {
                    2.0 / 3.0
                }
            }
            GroundTruth::Gaussian {
                correlation, mass, ..
            } => {
                let r = *correlation;
                let s2 = 1.0 - r * r;
                let q = (p[0] * p[0] - 2.0 * r * p[0] * p[1] + p[1] * p[1]) / s2;
                (-0.5 * q).exp() / (2.0 * PI * s2.sqrt()) / mass
            }
        }
    }
}

fn distinct_cuts(rng: &mut SeedRng, count: usize, span: i64) -> Result<Vec<i64>> {
    if count as i64 > span - 1 {
        return invalid(format!("cannot place {count} distinct cuts in {span} cells"));
    }
    let mut cuts: Vec<i64> = Vec::with_capacity(count);
    while cuts.len() < count {
        let c = 1 + rng.below((span - 1) as u64) as i64;
        if !cuts.contains(&c) {
            cuts.push(c);
        }
    }
    cuts.sort_unstable();
    Ok(cuts)
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

/// Random ground-truth histogram on the unit square at ε = 0.001.
pub fn gen_true_partition(seed: u64, k1: usize, k2_each: usize, p_merge: f64) -> Result<GroundTruth> {
    gen_true_partition_on(&GridSpec::unit_square(DEFAULT_EPSILON)?, seed, k1, k2_each, p_merge)
}

/// Random ground-truth histogram on `grid`: `k1` columns from random
/// vertical cuts, each split into `k2_each` rows by its own random horizontal
/// cuts; every neighboring pair of cells is then merged with probability
/// `p_merge`. Densities are drawn from Uniform(0, 1) and normalized.
pub fn gen_true_partition_on(
    grid: &GridSpec,
    seed: u64,
    k1: usize,
    k2_each: usize,
    p_merge: f64,
) -> Result<GroundTruth> {
    if k1 < 1 || k2_each < 1 {
        return invalid("k1 and k2 must be at least 1");
    }
    if !(0.0..=1.0).contains(&p_merge) {
        return invalid(format!("p_merge must lie in [0, 1], got {p_merge}"));
    }
    let [w, h] = grid.cells();
    let mut rng = SeedRng::new(seed);
    let xs = distinct_cuts(&mut rng, k1 - 1, w)?;
    let mut rects = Vec::with_capacity(k1 * k2_each);
    let column = Rect::new(0, 0, w, h)?;
    for col in column.split(crate::geometry::Axis::Vertical, &xs) {
        let ys = distinct_cuts(&mut rng, k2_each - 1, h)?;
        rects.extend(col.split(crate::geometry::Axis::Horizontal, &ys));
    }

    let cells = Partition::new(
        grid.clone(),
        rects
            .iter()
            .map(|r| Region::with_count(vec![*r], 0))
            .collect::<Result<Vec<_>>>()?,
    )?;
    let mut parent: Vec<usize> = (0..rects.len()).collect();
    for (a, b) in cells.neighbor_pairs() {
        if rng.uniform() < p_merge {
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            if ra != rb {
                parent[ra.max(rb)] = ra.min(rb);
            }
        }
    }
    // Group rects by component, ordered by their smallest member.
    let mut groups: Vec<(usize, Vec<Rect>)> = Vec::new();
    for (i, r) in rects.iter().enumerate() {
        let root = find(&mut parent, i);
        match groups.iter_mut().find(|(g, _)| *g == root) {
            Some((_, v)) => v.push(*r),
            None => groups.push((root, vec![*r])),
        }
    }
    let regions = groups
        .into_iter()
        .map(|(_, rs)| Region::with_count(rs, 0))
        .collect::<Result<Vec<_>>>()?;
    let partition = Partition::new(grid.clone(), regions)?;

    let raw: Vec<f64> = (0..partition.len()).map(|_| rng.uniform()).collect();
    let mut mass: f64 = raw
        .iter()
        .zip(partition.regions())
        .map(|(f, r)| f * r.area(grid))
        .sum();
    if mass <= 0.0 {
        // All draws were exactly zero; fall back to a flat density.
        mass = grid.extent()[0] * grid.extent()[1];
        let densities = DensityVector(vec![1.0 / mass; partition.len()]);
        return Ok(GroundTruth::Histogram(HistogramTruth { partition, densities, lines: None }));
    }
    let densities = DensityVector(raw.iter().map(|f| f / mass).collect());
    Ok(GroundTruth::Histogram(HistogramTruth {
        partition,
        densities,
        lines: None,
    }))
}

/// Random truth plus `n` samples from it; the truth's regions carry the
/// sample counts. Structure and samples use independent streams of `seed`.
pub fn gen_partition_data(
    seed: u64,
    k1: usize,
    k2_each: usize,
    p_merge: f64,
    n: usize,
) -> Result<(Dataset2D, GroundTruth)> {
    let truth = gen_true_partition(seed, k1, k2_each, p_merge)?;
    let h = truth.as_histogram().expect("histogram truth");
    let data = sample_histogram(h, n, seed ^ SAMPLE_STREAM);
    let counted = with_counts(h, &data)?;
    Ok((data, GroundTruth::Histogram(counted)))
}

const SAMPLE_STREAM: u64 = 0x5DEE_CE66_D1CE_5EED;

/// Draws `n` points from a piecewise-constant truth: region by
/// `f_j |S_j|`, rectangle by area, then a uniform lattice cell.
pub fn sample_histogram(truth: &HistogramTruth, n: usize, seed: u64) -> Dataset2D {
    let grid = truth.partition.grid().clone();
    let mut rng = SeedRng::new(seed);
    let regions = truth.partition.regions();
    let mut cum = Vec::with_capacity(regions.len());
    let mut acc = 0.0;
    for (f, r) in truth.densities.values().iter().zip(regions) {
        acc += f * r.area_cells() as f64;
        cum.push(acc);
    }
    let mut points = Vec::with_capacity(n);
    for _ in 0..n {
        let u = rng.uniform() * acc;
        let j = cum.partition_point(|&c| c <= u).min(regions.len() - 1);
        let region = &regions[j];
        let a = rng.below(region.area_cells() as u64) as i64;
        let mut seen = 0;
        let rect = region
            .rects()
            .iter()
            .find(|r| {
                seen += r.area();
                a < seen
            })
            .expect("area index within region");
        points.push(rng.cell_in(rect));
    }
    Dataset2D::new(grid, points).expect("samples lie inside S")
}

/// Sine family on [0,1]² at ε = 0.001: `ceil(2n/3)` points uniform above
/// `g`, `floor(n/3)` below, by rejection.
pub fn gen_sine(m: u32, n: usize, seed: u64) -> Result<(Dataset2D, GroundTruth)> {
    if m < 1 {
        return invalid("m must be at least 1");
    }
    let grid = GridSpec::unit_square(DEFAULT_EPSILON)?;
    let want_above = (2 * n).div_ceil(3);
    let want_below = n - want_above;
    let (mut above, mut below) = (0, 0);
    let mut rng = SeedRng::new(seed);
    let s = grid.bounds();
    let mut points = Vec::with_capacity(n);
    while above < want_above || below < want_below {
        let p = rng.cell_in(&s);
        let [x, y] = grid.to_coord(p);
        if y > sine_curve(m, x) {
            if above < want_above {
                above += 1;
                points.push(p);
            }
        } else if below < want_below {
            below += 1;
            points.push(p);
        }
    }
    let data = Dataset2D::new(grid.clone(), points)?;
    Ok((data, GroundTruth::Sine { grid, m }))
}

/// Bivariate normal family on [-5,5]² at ε = 0.001.
pub fn gen_gaussian(correlation: f64, n: usize, seed: u64) -> Result<(Dataset2D, GroundTruth)> {
    let grid = GridSpec::new(DEFAULT_EPSILON, [-5.0, -5.0], [10.0, 10.0])?;
    gen_gaussian_on(&grid, correlation, n, seed)
}

/// Standard bivariate normal with the given correlation, rejection-truncated
/// to the sample space of `grid` and snapped to its lattice.
pub fn gen_gaussian_on(
    grid: &GridSpec,
    correlation: f64,
    n: usize,
    seed: u64,
) -> Result<(Dataset2D, GroundTruth)> {
    if correlation.is_nan() || correlation.abs() >= 1.0 {
        return invalid(format!("correlation must lie in (-1, 1), got {correlation}"));
    }
    let s = (1.0 - correlation * correlation).sqrt();
    let mut rng = SeedRng::new(seed);
    let mut points = Vec::with_capacity(n);
    while points.len() < n {
        let (z0, z1) = rng.normal_pair();
        let p = [z0, correlation * z0 + s * z1];
        if let Some(q) = grid.snap(p) {
            points.push(q);
        }
    }
    let mass = gaussian_mass(grid, correlation);
    let data = Dataset2D::new(grid.clone(), points)?;
    Ok((
        data,
        GroundTruth::Gaussian {
            grid: grid.clone(),
            correlation,
            mass,
        },
    ))
}

/// Probability of S under the bivariate normal: midpoint rule along x over
/// the ε-cells, exact conditional normal integral along y.
pub(crate) fn gaussian_mass(grid: &GridSpec, r: f64) -> f64 {
    let s = (1.0 - r * r).sqrt();
    let eps = grid.epsilon();
    let [ox, oy] = grid.origin();
    let (y0, y1) = (oy, oy + grid.extent()[1]);
    let norm = 1.0 / (2.0 * PI).sqrt();
    (0..grid.cells()[0])
        .map(|i| {
            let x = ox + (i as f64 + 0.5) * eps;
            norm * (-0.5 * x * x).exp()
                * (std_normal_cdf((y1 - r * x) / s) - std_normal_cdf((y0 - r * x) / s))
                * eps
        })
        .sum()
}

/// Quadrant family on [0,1]² at ε = 0.001: one random vertical and one
/// random horizontal line, `n / 4` points per quadrant (the remainder goes
/// one each to the first quadrants in order bottom-left, bottom-right,
/// top-left, top-right).
pub fn gen_quadrant(seed: u64, n: usize) -> Result<(Dataset2D, GroundTruth)> {
    let grid = GridSpec::unit_square(DEFAULT_EPSILON)?;
    let [w, h] = grid.cells();
    let mut rng = SeedRng::new(seed);
    let mut line = |span: i64| loop {
        let v = rng.below(span as u64 + 1) as i64;
        if v > 0 && v < span {
            break v;
        }
    };
    let vx = line(w);
    let hy = line(h);
    let rects = [
        Rect::new(0, 0, vx, hy)?,
        Rect::new(vx, 0, w, hy)?,
        Rect::new(0, hy, vx, h)?,
        Rect::new(vx, hy, w, h)?,
    ];
    let mut points = Vec::with_capacity(n);
    let mut regions = Vec::with_capacity(4);
    let mut densities = Vec::with_capacity(4);
    for (q, r) in rects.iter().enumerate() {
        let count = n / 4 + usize::from(q < n % 4);
        for _ in 0..count {
            points.push(rng.cell_in(r));
        }
        regions.push(Region::with_count(vec![*r], count)?);
        let share = if n == 0 { 0.25 } else { count as f64 / n as f64 };
        densities.push(share / (r.area() as f64 * grid.cell_area()));
    }
    let partition = Partition::new(grid.clone(), regions)?;
    let data = Dataset2D::new(grid, points)?;
    Ok((
        data,
        GroundTruth::Histogram(HistogramTruth {
            partition,
            densities: DensityVector(densities),
            lines: Some([vx, hy]),
        }),
    ))
}

/// Copy of a histogram truth whose region counts are recounted on `data`.
pub fn with_counts(truth: &HistogramTruth, data: &Dataset2D) -> Result<HistogramTruth> {
    let regions = truth
        .partition
        .regions()
        .iter()
        .map(|r| Region::new(r.rects().to_vec(), data))
        .collect::<Result<Vec<_>>>()?;
    Ok(HistogramTruth {
        partition: Partition::new(truth.partition.grid().clone(), regions)?,
        densities: truth.densities.clone(),
        lines: truth.lines,
    })
}
