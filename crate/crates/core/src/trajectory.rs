//! Time grids and replicated sample paths.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scaling::ScalingConstants;
use crate::stats::EmpiricalDistribution;

const GRID_EPS: f64 = 1e-9;

/// Sorted, nonnegative record times in scaled units.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    times: Vec<f64>,
}

impl TimeGrid {
    /// `0, step, 2 step, ...` up to and including `horizon`.
    pub fn uniform(horizon: f64, step: f64) -> Result<Self> {
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::invalid(format!("horizon must be > 0, got {horizon}")));
        }
        if !(step.is_finite() && step > 0.0 && step <= horizon) {
            return Err(Error::invalid(format!("grid step must lie in (0, horizon], got {step}")));
        }
        let n = (horizon / step + GRID_EPS).floor() as usize;
        let mut times: Vec<f64> = (0..=n).map(|k| k as f64 * step).collect();
        if horizon - times[n] > GRID_EPS * horizon.max(1.0) {
            times.push(horizon);
        } else {
            times[n] = horizon;
        }
        Ok(TimeGrid { times })
    }

    pub fn from_times(times: Vec<f64>) -> Result<Self> {
        if times.is_empty() {
            return Err(Error::invalid("time grid is empty"));
        }
        if times.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
            return Err(Error::invalid("grid times must be finite and >= 0"));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("grid times must be strictly increasing"));
        }
        Ok(TimeGrid { times })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn horizon(&self) -> f64 {
        *self.times.last().expect("grid is nonempty")
    }

    /// Maps each time to an integer index `floor(t * scale)`.
    pub(crate) fn floor_indices(&self, scale: f64) -> Vec<u64> {
        self.times
            .iter()
            .map(|t| (t * scale + GRID_EPS).floor() as u64)
            .collect()
    }
}

/// Which process a batch samples.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProcessKind {
    MaxWait,
    Auxiliary,
    DriftedSup,
    AuxLimit,
}

/// Replications x grid matrix of scaled path values, row major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryBatch {
    pub kind: ProcessKind,
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub replications: usize,
    pub scaling: Option<ScalingConstants>,
    pub seed: u64,
}

impl TrajectoryBatch {
    pub(crate) fn from_rows(
        kind: ProcessKind,
        grid: &TimeGrid,
        rows: Vec<Vec<f64>>,
        scaling: Option<ScalingConstants>,
        seed: u64,
    ) -> Self {
        let replications = rows.len();
        let values = rows.into_iter().flatten().collect();
        TrajectoryBatch {
            kind,
            grid: grid.times().to_vec(),
            values,
            replications,
            scaling,
            seed,
        }
    }

    pub fn row(&self, rep: usize) -> &[f64] {
        let w = self.grid.len();
        &self.values[rep * w..(rep + 1) * w]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.grid.len())
    }

    pub fn column(&self, k: usize) -> Vec<f64> {
        self.rows().map(|r| r[k]).collect()
    }

    /// Index of the grid point equal to `t` (up to rounding).
    pub fn index_of(&self, t: f64) -> Option<usize> {
        self.grid
            .iter()
            .position(|&g| (g - t).abs() <= GRID_EPS * t.abs().max(1.0))
    }

    pub fn column_at(&self, t: f64) -> Result<Vec<f64>> {
        self.index_of(t)
            .map(|k| self.column(k))
            .ok_or_else(|| Error::invalid(format!("t = {t} is not a grid point")))
    }

    /// Values at the last grid time.
    pub fn endpoint(&self) -> Vec<f64> {
        self.column(self.grid.len() - 1)
    }

    pub fn distribution_at(&self, t: f64) -> Result<EmpiricalDistribution> {
        EmpiricalDistribution::new(self.column_at(t)?)
    }
}
