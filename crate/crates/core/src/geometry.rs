//! Lattice geometry shared by every other module.
//!
//! All positions are integer offsets from the grid origin in units of
//! `epsilon`. A rectangle `[x0, x1) x [y0, y1)` is half-open, except that an
//! edge lying on the top or right boundary of the sample space is closed, so
//! the regions of a partition count every point exactly once.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{invalid, Error, Result};

/// Relative slack used when converting real coordinates to lattice offsets.
const SNAP_SLACK: f64 = 1e-9;

/// Direction of the cut lines placed in one partitioning pass.
///
/// `Vertical` cut lines split a region along x; `Horizontal` ones along y.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Axis {
    Vertical,
    Horizontal,
}

impl Axis {
    pub fn flip(self) -> Self {
        match self {
            Axis::Vertical => Axis::Horizontal,
            Axis::Horizontal => Axis::Vertical,
        }
    }

    /// Index of the coordinate this axis splits (0 = x, 1 = y).
    pub fn coord(self) -> usize {
        match self {
            Axis::Vertical => 0,
            Axis::Horizontal => 1,
        }
    }
}

/// The ε-lattice and the rectangular sample space S it covers.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    epsilon: f64,
    origin: [f64; 2],
    cells: [i64; 2],
}

impl GridSpec {
    /// `extent` is the width and height of S in coordinate units; it must be a
    /// multiple of `epsilon`.
    pub fn new(epsilon: f64, origin: [f64; 2], extent: [f64; 2]) -> Result<Self> {
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return invalid(format!("epsilon must be positive, got {epsilon}"));
        }
        let mut cells = [0i64; 2];
        for d in 0..2 {
            let t = extent[d] / epsilon;
            if !t.is_finite() || t < 0.5 {
                return invalid(format!("extent {:?} is smaller than one cell", extent));
            }
            let k = t.round();
            if (t - k).abs() > SNAP_SLACK * t.max(1.0) {
                return invalid(format!(
                    "extent {} is not a multiple of epsilon {epsilon}",
                    extent[d]
                ));
            }
            cells[d] = k as i64;
        }
        Self::from_cells(epsilon, origin, cells)
    }

    pub fn from_cells(epsilon: f64, origin: [f64; 2], cells: [i64; 2]) -> Result<Self> {
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return invalid(format!("epsilon must be positive, got {epsilon}"));
        }
        if !(origin[0].is_finite() && origin[1].is_finite()) {
            return invalid("origin must be finite");
        }
        if cells[0] < 1 || cells[1] < 1 {
            return invalid(format!("grid needs at least one cell per axis, got {cells:?}"));
        }
        Ok(Self { epsilon, origin, cells })
    }

    /// S = [0,1] x [0,1].
    pub fn unit_square(epsilon: f64) -> Result<Self> {
        Self::new(epsilon, [0.0, 0.0], [1.0, 1.0])
    }

    /// Smallest rectangle on the global ε lattice (anchored at 0) that covers
    /// `points`, at least one cell wide per axis. No points gives [0, ε]².
    pub fn covering(points: &[[f64; 2]], epsilon: f64) -> Result<Self> {
        let anchor = Self::from_cells(epsilon, [0.0, 0.0], [1, 1])?;
        let mut lo = [i64::MAX; 2];
        let mut hi = [i64::MIN; 2];
        for p in points {
            if !(p[0].is_finite() && p[1].is_finite()) {
                return invalid(format!("non-finite point {p:?}"));
            }
            for d in 0..2 {
                let k = anchor.lattice_index(d, p[d]);
                lo[d] = lo[d].min(k);
                hi[d] = hi[d].max(k);
            }
        }
        if points.is_empty() {
            lo = [0, 0];
            hi = [1, 1];
        }
        let cells = [(hi[0] - lo[0]).max(1), (hi[1] - lo[1]).max(1)];
        Self::from_cells(epsilon, [lo[0] as f64 * epsilon, lo[1] as f64 * epsilon], cells)
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn origin(&self) -> [f64; 2] {
        self.origin
    }

    /// Width and height of S in lattice units.
    pub fn cells(&self) -> [i64; 2] {
        self.cells
    }

    pub fn extent(&self) -> [f64; 2] {
        [
            self.cells[0] as f64 * self.epsilon,
            self.cells[1] as f64 * self.epsilon,
        ]
    }

    /// Area of one lattice cell.
    pub fn cell_area(&self) -> f64 {
        self.epsilon * self.epsilon
    }

    /// S itself as a lattice rectangle.
    pub fn bounds(&self) -> Rect {
        Rect {
            x0: 0,
            y0: 0,
            x1: self.cells[0],
            y1: self.cells[1],
        }
    }

    pub fn to_coord(&self, p: [i64; 2]) -> [f64; 2] {
        [self.coord(0, p[0]), self.coord(1, p[1])]
    }

    /// Real coordinate of lattice offset `k` along dimension `dim`.
    pub fn coord(&self, dim: usize, k: i64) -> f64 {
        self.origin[dim] + k as f64 * self.epsilon
    }

    /// Nearest lattice offset along `dim`, ties rounded up.
    pub fn lattice_index(&self, dim: usize, v: f64) -> i64 {
        let t = (v - self.origin[dim]) / self.epsilon;
        (t + 0.5 + SNAP_SLACK * t.abs().max(1.0)).floor() as i64
    }

    /// Snaps a real point to the lattice; `None` if it falls outside S.
    pub fn snap(&self, p: [f64; 2]) -> Option<[i64; 2]> {
        if !(p[0].is_finite() && p[1].is_finite()) {
            return None;
        }
        let q = [self.lattice_index(0, p[0]), self.lattice_index(1, p[1])];
        self.bounds().covers_point(q).then_some(q)
    }
}

/// A point set snapped to the lattice of its grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset2D {
    grid: GridSpec,
    points: Vec<[i64; 2]>,
}

impl Dataset2D {
    /// Builds a dataset from lattice offsets, rejecting any outside S.
    pub fn new(grid: GridSpec, points: Vec<[i64; 2]>) -> Result<Self> {
        let bounds = grid.bounds();
        let bad: Vec<usize> = points
            .iter()
            .enumerate()
            .filter(|(_, p)| !bounds.covers_point(**p))
            .map(|(i, _)| i)
            .collect();
        if !bad.is_empty() {
            return Err(Error::OutOfBounds { indices: bad });
        }
        Ok(Self { grid, points })
    }

    pub fn empty(grid: GridSpec) -> Self {
        Self {
            grid,
            points: Vec::new(),
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn points(&self) -> &[[i64; 2]] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Real coordinates of point `i`.
    pub fn coords(&self, i: usize) -> [f64; 2] {
        self.grid.to_coord(self.points[i])
    }

    /// Smallest lattice rectangle covering all points, widened to one cell
    /// along any axis where the data is degenerate.
    pub fn bounding_box(&self) -> Option<Rect> {
        let first = self.points.first()?;
        let mut r = [first[0], first[1], first[0], first[1]];
        for p in &self.points {
            r[0] = r[0].min(p[0]);
            r[1] = r[1].min(p[1]);
            r[2] = r[2].max(p[0]);
            r[3] = r[3].max(p[1]);
        }
        if r[2] == r[0] {
            r[2] += 1;
        }
        if r[3] == r[1] {
            r[3] += 1;
        }
        Some(Rect {
            x0: r[0],
            y0: r[1],
            x1: r[2],
            y1: r[3],
        })
    }

    /// Re-expresses the data on the grid whose sample space is the bounding
    /// box of the points. An empty dataset is returned unchanged.
    pub fn crop_to_bounding_box(&self) -> Dataset2D {
        let Some(bb) = self.bounding_box() else {
            return self.clone();
        };
        let grid = GridSpec {
            epsilon: self.grid.epsilon,
            origin: self.grid.to_coord([bb.x0, bb.y0]),
            cells: [bb.width(), bb.height()],
        };
        let points = self
            .points
            .iter()
            .map(|p| [p[0] - bb.x0, p[1] - bb.y0])
            .collect();
        Dataset2D { grid, points }
    }
}

/// Rounds raw points onto the lattice of `grid` (ties half-up).
///
/// Fails with the indices of every point that lands outside S.
pub fn snap_to_grid(raw_points: &[[f64; 2]], grid: &GridSpec) -> Result<Dataset2D> {
    let mut points = Vec::with_capacity(raw_points.len());
    let mut bad = Vec::new();
    for (i, p) in raw_points.iter().enumerate() {
        match grid.snap(*p) {
            Some(q) => points.push(q),
            None => bad.push(i),
        }
    }
    if !bad.is_empty() {
        return Err(Error::OutOfBounds { indices: bad });
    }
    Ok(Dataset2D {
        grid: grid.clone(),
        points,
    })
}

/// Axis-aligned lattice rectangle `[x0, x1) x [y0, y1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Rect {
    pub x0: i64,
    pub y0: i64,
    pub x1: i64,
    pub y1: i64,
}

impl Rect {
    pub fn new(x0: i64, y0: i64, x1: i64, y1: i64) -> Result<Self> {
        if x0 >= x1 || y0 >= y1 {
            return invalid(format!("degenerate rectangle [{x0},{x1}) x [{y0},{y1})"));
        }
        Ok(Self { x0, y0, x1, y1 })
    }

    pub fn width(&self) -> i64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> i64 {
        self.y1 - self.y0
    }

    /// Area in lattice cells.
    pub fn area(&self) -> i64 {
        self.width() * self.height()
    }

    pub fn lo(&self, axis: Axis) -> i64 {
        match axis {
            Axis::Vertical => self.x0,
            Axis::Horizontal => self.y0,
        }
    }

    pub fn hi(&self, axis: Axis) -> i64 {
        match axis {
            Axis::Vertical => self.x1,
            Axis::Horizontal => self.y1,
        }
    }

    /// Closed containment, used for "inside S" checks.
    pub fn covers_point(&self, p: [i64; 2]) -> bool {
        p[0] >= self.x0 && p[0] <= self.x1 && p[1] >= self.y0 && p[1] <= self.y1
    }

    /// Half-open containment; edges on the top/right boundary of `space`
    /// are closed.
    pub fn contains(&self, p: [i64; 2], space: &Rect) -> bool {
        let inside = |v: i64, lo: i64, hi: i64, outer: i64| v >= lo && (v < hi || (v == hi && hi == outer));
        inside(p[0], self.x0, self.x1, space.x1) && inside(p[1], self.y0, self.y1, space.y1)
    }

    pub fn intersection(&self, other: &Rect) -> Option<Rect> {
        let r = Rect {
            x0: self.x0.max(other.x0),
            y0: self.y0.max(other.y0),
            x1: self.x1.min(other.x1),
            y1: self.y1.min(other.y1),
        };
        (r.x0 < r.x1 && r.y0 < r.y1).then_some(r)
    }

    /// True when the two rectangles share a boundary segment of positive
    /// length. Corner contact does not count.
    pub fn shares_edge(&self, other: &Rect) -> bool {
        let overlap = |a0: i64, a1: i64, b0: i64, b1: i64| a0.max(b0) < a1.min(b1);
        ((self.x1 == other.x0 || other.x1 == self.x0) && overlap(self.y0, self.y1, other.y0, other.y1))
            || ((self.y1 == other.y0 || other.y1 == self.y0)
                && overlap(self.x0, self.x1, other.x0, other.x1))
    }

    /// Cuts the rectangle at the given interior positions along `axis`.
    pub fn split(&self, axis: Axis, cuts: &[i64]) -> Vec<Rect> {
        let mut bounds = Vec::with_capacity(cuts.len() + 2);
        bounds.push(self.lo(axis));
        bounds.extend_from_slice(cuts);
        bounds.push(self.hi(axis));
        bounds
            .windows(2)
            .map(|w| match axis {
                Axis::Vertical => Rect { x0: w[0], x1: w[1], ..*self },
                Axis::Horizontal => Rect { y0: w[0], y1: w[1], ..*self },
            })
            .collect()
    }
}

/// A union of interior-disjoint rectangles with cached area and point count.
#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    rects: Vec<Rect>,
    area: i64,
    count: usize,
}

impl Region {
    /// Builds a region and counts the points of `data` that fall inside it.
    pub fn new(rects: Vec<Rect>, data: &Dataset2D) -> Result<Self> {
        let mut region = Self::with_count(rects, 0)?;
        region.count = count_points(&region, data);
        Ok(region)
    }

    /// Builds a region whose point count is already known.
    pub fn with_count(rects: Vec<Rect>, count: usize) -> Result<Self> {
        if rects.is_empty() {
            return invalid("region needs at least one rectangle");
        }
        for (i, a) in rects.iter().enumerate() {
            Rect::new(a.x0, a.y0, a.x1, a.y1)?;
            if rects[i + 1..].iter().any(|b| a.intersection(b).is_some()) {
                return Err(Error::InvalidPartition(format!(
                    "overlapping rectangles in region: {a:?}"
                )));
            }
        }
        let area = rects.iter().map(Rect::area).sum();
        Ok(Self { rects, area, count })
    }

    pub(crate) fn from_parts_unchecked(rects: Vec<Rect>, area: i64, count: usize) -> Self {
        Self { rects, area, count }
    }

    pub fn rects(&self) -> &[Rect] {
        &self.rects
    }

    /// Area in lattice cells.
    pub fn area_cells(&self) -> i64 {
        self.area
    }

    /// Area in coordinate units, |S_j|.
    pub fn area(&self, grid: &GridSpec) -> f64 {
        self.area as f64 * grid.cell_area()
    }

    /// Number of data points in the region, h_j.
    pub fn count(&self) -> usize {
        self.count
    }

    pub fn contains(&self, p: [i64; 2], space: &Rect) -> bool {
        self.rects.iter().any(|r| r.contains(p, space))
    }

    /// Union of two regions; the caller guarantees they are disjoint.
    pub fn merged(&self, other: &Region) -> Region {
        let mut rects = self.rects.clone();
        rects.extend_from_slice(&other.rects);
        Region {
            rects,
            area: self.area + other.area,
            count: self.count + other.count,
        }
    }
}

/// Number of points of `data` inside `region` (h_j).
pub fn count_points(region: &Region, data: &Dataset2D) -> usize {
    let space = data.grid().bounds();
    data.points()
        .iter()
        .filter(|p| region.contains(**p, &space))
        .count()
}

/// Whether two regions share a boundary segment of positive length.
pub fn are_neighbors(r1: &Region, r2: &Region) -> bool {
    if r1 == r2 {
        return false;
    }
    r1.rects()
        .iter()
        .any(|a| r2.rects().iter().any(|b| a.shares_edge(b)))
}

/// The chosen coordinate (real units) of every point inside `rect`, in data
/// order. `Axis::Vertical` returns x values, `Axis::Horizontal` y values.
pub fn project(data: &Dataset2D, rect: &Rect, axis: Axis) -> Vec<f64> {
    let space = data.grid().bounds();
    let d = axis.coord();
    data.points()
        .iter()
        .filter(|p| rect.contains(**p, &space))
        .map(|p| data.grid().coord(d, p[d]))
        .collect()
}

/// Per-region densities f̂_j.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityVector(pub Vec<f64>);

impl DensityVector {
    pub fn values(&self) -> &[f64] {
        &self.0
    }

    /// Σ f̂_j |S_j|; equals one for a valid density.
    pub fn mass(&self, partition: &Partition) -> f64 {
        self.0
            .iter()
            .zip(partition.regions())
            .map(|(f, r)| f * r.area(partition.grid()))
            .sum()
    }
}

/// Axis-parallel lattice segment. A `Vertical` segment lies on the line
/// `x = at` and spans `[lo, hi]` in y.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Segment {
    pub orientation: Axis,
    pub at: i64,
    pub lo: i64,
    pub hi: i64,
}

impl Segment {
    pub fn len(&self) -> i64 {
        self.hi - self.lo
    }

    pub fn is_empty(&self) -> bool {
        self.hi <= self.lo
    }

    /// End points in lattice coordinates.
    pub fn endpoints(&self) -> [[i64; 2]; 2] {
        match self.orientation {
            Axis::Vertical => [[self.at, self.lo], [self.at, self.hi]],
            Axis::Horizontal => [[self.lo, self.at], [self.hi, self.at]],
        }
    }
}

/// A piece of edge where two different regions touch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Contact {
    pub segment: Segment,
    pub regions: (usize, usize),
}

/// A set of disjoint regions covering S.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    grid: GridSpec,
    regions: Vec<Region>,
}

impl Partition {
    /// Validates that the regions tile S: areas add up and no two
    /// rectangles overlap, and every rectangle lies within S.
    pub fn new(grid: GridSpec, regions: Vec<Region>) -> Result<Self> {
        let p = Self { grid, regions };
        p.validate()?;
        Ok(p)
    }

    pub(crate) fn new_unchecked(grid: GridSpec, regions: Vec<Region>) -> Self {
        Self { grid, regions }
    }

    /// The one-region partition {S} with all `n` points in it.
    pub fn whole(grid: GridSpec, n: usize) -> Self {
        let s = grid.bounds();
        let region = Region::from_parts_unchecked(vec![s], s.area(), n);
        Self {
            grid,
            regions: vec![region],
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn regions(&self) -> &[Region] {
        &self.regions
    }

    pub fn len(&self) -> usize {
        self.regions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.regions.is_empty()
    }

    pub fn total_count(&self) -> usize {
        self.regions.iter().map(Region::count).sum()
    }

    pub fn validate(&self) -> Result<()> {
        if self.regions.is_empty() {
            return Err(Error::InvalidPartition("no regions".into()));
        }
        let s = self.grid.bounds();
        let mut rects: Vec<Rect> = Vec::new();
        for (j, region) in self.regions.iter().enumerate() {
            if region.rects.is_empty() {
                return Err(Error::InvalidPartition(format!("region {j} is empty")));
            }
            let mut area = 0;
            for r in &region.rects {
                if r.x0 >= r.x1 || r.y0 >= r.y1 {
                    return Err(Error::InvalidPartition(format!("degenerate rectangle {r:?}")));
                }
                if r.intersection(&s) != Some(*r) {
                    return Err(Error::InvalidPartition(format!("rectangle {r:?} leaves S")));
                }
                area += r.area();
                rects.push(*r);
            }
            if area != region.area {
                return Err(Error::InvalidPartition(format!(
                    "region {j} caches area {} but its rectangles cover {area}",
                    region.area
                )));
            }
        }
        let total: i64 = rects.iter().map(Rect::area).sum();
        if total != s.area() {
            return Err(Error::InvalidPartition(format!(
                "regions cover {total} cells, S has {}",
                s.area()
            )));
        }
        // Equal total area plus pairwise disjointness implies full cover.
        rects.sort_unstable();
        for (i, a) in rects.iter().enumerate() {
            for b in &rects[i + 1..] {
                if b.x0 >= a.x1 {
                    break;
                }
                if a.intersection(b).is_some() {
                    return Err(Error::InvalidPartition(format!("{a:?} overlaps {b:?}")));
                }
            }
        }
        Ok(())
    }

    /// Checks the cached counts against a full recount of `data`.
    pub fn validate_counts(&self, data: &Dataset2D) -> Result<()> {
        for (j, region) in self.regions.iter().enumerate() {
            let h = count_points(region, data);
            if h != region.count {
                return Err(Error::InvalidPartition(format!(
                    "region {j} caches count {} but contains {h} points",
                    region.count
                )));
            }
        }
        Ok(())
    }

    /// Index of the region containing lattice point `p`.
    pub fn region_of(&self, p: [i64; 2]) -> Option<usize> {
        let s = self.grid.bounds();
        self.regions.iter().position(|r| r.contains(p, &s))
    }

    /// All places where two different regions share an edge, found with a
    /// sweep over the rectangle edges on each lattice line.
    pub(crate) fn contacts(&self) -> Vec<Contact> {
        let s = self.grid.bounds();
        let mut out = Vec::new();
        for orientation in [Axis::Vertical, Axis::Horizontal] {
            // line position -> (intervals of rects ending there, intervals of rects starting there)
            type Side = Vec<(i64, i64, usize)>;
            let mut lines: BTreeMap<i64, (Side, Side)> = BTreeMap::new();
            for (j, region) in self.regions.iter().enumerate() {
                for r in &region.rects {
                    let (lo, hi, a, b) = match orientation {
                        Axis::Vertical => (r.x0, r.x1, r.y0, r.y1),
                        Axis::Horizontal => (r.y0, r.y1, r.x0, r.x1),
                    };
                    let outer = match orientation {
                        Axis::Vertical => s.x1,
                        Axis::Horizontal => s.y1,
                    };
                    if hi < outer {
                        lines.entry(hi).or_default().0.push((a, b, j));
                    }
                    if lo > 0 {
                        lines.entry(lo).or_default().1.push((a, b, j));
                    }
                }
            }
            for (at, (mut before, mut after)) in lines {
                before.sort_unstable();
                after.sort_unstable();
                let (mut i, mut k) = (0, 0);
                while i < before.len() && k < after.len() {
                    let (b0, b1, rb) = before[i];
                    let (a0, a1, ra) = after[k];
                    let lo = b0.max(a0);
                    let hi = b1.min(a1);
                    if lo < hi && rb != ra {
                        out.push(Contact {
                            segment: Segment { orientation, at, lo, hi },
                            regions: (rb.min(ra), rb.max(ra)),
                        });
                    }
                    if b1 <= a1 {
                        i += 1;
                    } else {
                        k += 1;
                    }
                }
            }
        }
        out
    }

    /// Unordered pairs of neighboring regions, `(i, j)` with `i < j`.
    pub fn neighbor_pairs(&self) -> BTreeSet<(usize, usize)> {
        self.contacts().into_iter().map(|c| c.regions).collect()
    }

    /// Inner boundary of the partition as maximal collinear segments.
    /// The outer boundary of S is not included.
    pub fn inner_segments(&self) -> Vec<Segment> {
        let mut pieces: Vec<Segment> = self.contacts().into_iter().map(|c| c.segment).collect();
        pieces.sort_unstable();
        let mut out: Vec<Segment> = Vec::new();
        for seg in pieces {
            match out.last_mut() {
                Some(last)
                    if last.orientation == seg.orientation && last.at == seg.at && seg.lo <= last.hi =>
                {
                    last.hi = last.hi.max(seg.hi);
                }
                _ => out.push(seg),
            }
        }
        out
    }
}
