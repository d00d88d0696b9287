//! File formats: partitions and analytic truths as JSON, points as CSV.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::{Dataset2D, DensityVector, GridSpec, Partition, Rect, Region};
use crate::synth::{gaussian_mass, GroundTruth, HistogramTruth};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionRecord {
    /// Rectangles as `[x0, y0, x1, y1]` in lattice units from the origin.
    pub rects: Vec<[i64; 4]>,
    pub density: f64,
    pub count: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    #[serde(default)]
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub total_bits: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_max: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direction: Option<String>,
    #[serde(default)]
    pub seed: Option<u64>,
}

/// A histogram on a lattice. `extent` is in lattice units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartitionFile {
    pub epsilon: f64,
    pub origin: [f64; 2],
    pub extent: [i64; 2],
    pub regions: Vec<RegionRecord>,
    #[serde(default)]
    pub meta: Meta,
}

impl PartitionFile {
    pub fn from_partition(partition: &Partition, densities: &DensityVector, meta: Meta) -> Self {
        let grid = partition.grid();
        Self {
            epsilon: grid.epsilon(),
            origin: grid.origin(),
            extent: grid.cells(),
            regions: partition
                .regions()
                .iter()
                .zip(densities.values())
                .map(|(r, &density)| RegionRecord {
                    rects: r.rects().iter().map(|q| [q.x0, q.y0, q.x1, q.y1]).collect(),
                    density,
                    count: r.count(),
                })
                .collect(),
            meta,
        }
    }

    pub fn grid(&self) -> Result<GridSpec> {
        GridSpec::from_cells(self.epsilon, self.origin, self.extent)
    }

    /// Rebuilds and validates the partition and its densities.
    pub fn to_partition(&self) -> Result<(Partition, DensityVector)> {
        let grid = self.grid()?;
        let regions = self
            .regions
            .iter()
            .map(|r| {
                let rects = r
                    .rects
                    .iter()
                    .map(|&[x0, y0, x1, y1]| Rect::new(x0, y0, x1, y1))
                    .collect::<Result<Vec<_>>>()?;
                Region::with_count(rects, r.count)
            })
            .collect::<Result<Vec<_>>>()?;
        let partition = Partition::new(grid, regions)?;
        let densities = DensityVector(self.regions.iter().map(|r| r.density).collect());
        if densities.values().iter().any(|f| !f.is_finite() || *f < 0.0) {
            return invalid("densities must be finite and non-negative");
        }
        Ok((partition, densities))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// JSON description of an analytic density.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum AnalyticTruthFile {
    Sine {
        m: u32,
        epsilon: f64,
        #[serde(default)]
        seed: Option<u64>,
    },
    Gaussian {
        correlation: f64,
        epsilon: f64,
        origin: [f64; 2],
        extent: [i64; 2],
        #[serde(default)]
        seed: Option<u64>,
    },
}

/// Writes a ground truth in whichever JSON form fits it.
pub fn truth_to_json(truth: &GroundTruth, seed: Option<u64>) -> Result<String> {
    let s = match truth {
        GroundTruth::Histogram(h) => {
            let n = h.partition.total_count();
            PartitionFile::from_partition(&h.partition, &h.densities, Meta { n, seed, ..Meta::default() }).to_json()?
        }
        GroundTruth::Sine { grid, m } => {
            serde_json::to_string_pretty(&AnalyticTruthFile::Sine { m: *m, epsilon: grid.epsilon(), seed })? + "\n"
        }
        GroundTruth::Gaussian { grid, correlation, .. } => {
            serde_json::to_string_pretty(&AnalyticTruthFile::Gaussian {
                correlation: *correlation,
                epsilon: grid.epsilon(),
                origin: grid.origin(),
                extent: grid.cells(),
                seed,
            })? + "\n"
        }
    };
    Ok(s)
}

/// Reads either a partition file or an analytic truth.
pub fn truth_from_json(s: &str) -> Result<GroundTruth> {
    let value: serde_json::Value = serde_json::from_str(s)?;
    if value.get("kind").is_some() {
        return Ok(match serde_json::from_value::<AnalyticTruthFile>(value)? {
            AnalyticTruthFile::Sine { m, epsilon, .. } => GroundTruth::Sine { grid: GridSpec::unit_square(epsilon)?, m },
            AnalyticTruthFile::Gaussian { correlation, epsilon, origin, extent, .. } => {
                if correlation.is_nan() || correlation.abs() >= 1.0 {
                    return invalid("correlation must lie in (-1, 1)");
                }
                let grid = GridSpec::from_cells(epsilon, origin, extent)?;
                let mass = gaussian_mass(&grid, correlation);
                GroundTruth::Gaussian { grid, correlation, mass }
            }
        });
    }
    let file: PartitionFile = serde_json::from_value(value)?;
    let (partition, densities) = file.to_partition()?;
    Ok(GroundTruth::Histogram(HistogramTruth { partition, densities, lines: None }))
}

/// Number of decimals that represent every multiple of `epsilon` exactly.
pub fn decimals_for(epsilon: f64) -> usize {
    (0..=12)
        .find(|&d| {
            let scaled = epsilon * 10f64.powi(d as i32);
            (scaled - scaled.round()).abs() < 1e-9 * scaled.max(1.0)
        })
        .unwrap_or(12)
}

/// Writes lattice points as `x,y` coordinates.
pub fn write_points<W: Write>(data: &Dataset2D, out: W) -> Result<()> {
    let d = decimals_for(data.grid().epsilon());
    let mut w = std::io::BufWriter::new(out);
    writeln!(w, "x,y")?;
    for i in 0..data.len() {
        let [x, y] = data.coords(i);
        writeln!(w, "{x:.d$},{y:.d$}")?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a two-column CSV of coordinates. A header row is optional.
pub fn read_points<R: Read>(input: R) -> Result<Vec<[f64; 2]>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(input);
    let mut points = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let line = |r: &csv::StringRecord| r.position().map_or(i as u64 + 1, |p| p.line());
        let record = record.map_err(|e| Error::Parse {
            line: e.position().map_or(i as u64 + 1, |p| p.line()),
            message: e.to_string(),
        })?;
        if record.len() != 2 {
            return Err(Error::Parse {
                line: line(&record),
                message: format!("expected 2 fields, found {}", record.len()),
            });
        }
        let parsed = (record[0].parse::<f64>(), record[1].parse::<f64>());
        match parsed {
            (Ok(x), Ok(y)) if x.is_finite() && y.is_finite() => points.push([x, y]),
            (Ok(_), Ok(_)) => {
                return Err(Error::Parse { line: line(&record), message: "non-finite coordinate".into() })
            }
            _ if i == 0 => continue,
            _ => {
                return Err(Error::Parse {
                    line: line(&record),
                    message: format!("cannot parse '{},{}' as numbers", &record[0], &record[1]),
                })
            }
        }
    }
    Ok(points)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimals() {
        assert_eq!(decimals_for(0.001), 3);
        assert_eq!(decimals_for(0.5), 1);
        assert_eq!(decimals_for(1.0), 0);
        assert_eq!(decimals_for(0.25), 2);
    }

    #[test]
    fn csv_with_and_without_header() {
        let a = read_points("x,y\n0.1,0.2\n0.3, 0.4\n".as_bytes()).unwrap();
        let b = read_points("0.1,0.2\n0.3,0.4\n".as_bytes()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, vec![[0.1, 0.2], [0.3, 0.4]]);
    }

    #[test]
    fn csv_errors_carry_line_numbers() {
        match read_points("x,y\n0.1,0.2\n0.3,abc\n".as_bytes()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        match read_points("x,y\n0.1\n".as_bytes()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn points_round_trip_through_csv() {
        let g = GridSpec::unit_square(0.001).unwrap();
        let data = Dataset2D::new(g.clone(), vec![[0, 0], [1000, 1000], [123, 457]]).unwrap();
        let mut buf = Vec::new();
        write_points(&data, &mut buf).unwrap();
        let back = crate::geometry::snap_to_grid(&read_points(&buf[..]).unwrap(), &g).unwrap();
        assert_eq!(back.points(), data.points());
    }

    #[test]
    fn partition_round_trip() {
        let t = crate::synth::gen_true_partition(3, 4, 4, 0.5).unwrap();
        let s = truth_to_json(&t, Some(3)).unwrap();
        let back = truth_from_json(&s).unwrap();
        let (a, b) = (t.as_histogram().unwrap(), back.as_histogram().unwrap());
        assert_eq!(a.partition, b.partition);
        assert_eq!(a.densities, b.densities);
    }

    #[test]
    fn analytic_truths_round_trip() {
        let (_, sine) = crate::synth::gen_sine(5, 10, 1).unwrap();
        let back = truth_from_json(&truth_to_json(&sine, None).unwrap()).unwrap();
        assert!(matches!(back, GroundTruth::Sine { m: 5, .. }));
        let (_, g) = crate::synth::gen_gaussian(0.5, 10, 1).unwrap();
        let back = truth_from_json(&truth_to_json(&g, None).unwrap()).unwrap();
        assert!((back.density([0.1, 0.2]) - g.density([0.1, 0.2])).abs() < 1e-12);
    }

    #[test]
    fn invalid_partition_is_rejected() {
        let f = PartitionFile {
            epsilon: 0.5,
            origin: [0.0, 0.0],
            extent: [2, 2],
            regions: vec![RegionRecord { rects: vec![[0, 0, 1, 2]], density: 1.0, count: 0 }],
            meta: Meta::default(),
        };
        assert!(f.to_partition().is_err());
    }
}
