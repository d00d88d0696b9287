//! Unsupervised discretization of 1-D and 2-D data by minimum description
//! length: exact NML code lengths, optimal 1-D histograms, and the PALM
//! partition-and-merge search for 2-D histograms.

pub mod cli;
pub mod error;
pub mod eval;
pub mod format;
pub mod geometry;
pub mod hist1d;
pub mod nml;
pub mod palm;
pub mod svg;
pub mod synth;

pub use error::{Error, Result};
pub use geometry::{
    are_neighbors, count_points, project, snap_to_grid, Axis, Dataset2D, DensityVector, GridSpec, Partition, Rect,
    Region, Segment,
};
pub use hist1d::{select_mdl_histogram, CutSet, DpResult, Extent1D};
pub use nml::{log_comp, CodeLength, CompTable};
pub use palm::{merge_step, palm_fit, partition_step, FitResult, PalmConfig, SampleSpace};
