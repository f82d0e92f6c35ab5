//! Sample-path containers for the absorbing and time-changed systems.

use crate::error::{Error, Result};
use crate::graph::TimeVector;

/// Per-coordinate absorption state. Absorbed coordinates carry the refined
/// (sub-grid) hitting time; pending ones were still positive at the horizon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Absorption {
    Absorbed(f64),
    Pending,
}

impl Absorption {
    pub fn time(&self) -> f64 {
        match self {
            Absorption::Absorbed(t) => *t,
            Absorption::Pending => f64::INFINITY,
        }
    }

    pub fn is_absorbed(&self) -> bool {
        matches!(self, Absorption::Absorbed(_))
    }
}

/// Piecewise-linear multi-coordinate path on a uniform grid with per-vertex
/// absorption times. Once a coordinate is absorbed its grid values are 0, and
/// they are strictly positive before.
#[derive(Debug, Clone)]
pub struct MultiPath {
    pub dt: f64,
    /// values[vertex][step]
    pub values: Vec<Vec<f64>>,
    pub absorption: Vec<Absorption>,
    /// Brownian increments per vertex per step (0 after absorption), stored
    /// only on request.
    pub brownian_increments: Option<Vec<Vec<f64>>>,
}

impl MultiPath {
    pub fn n(&self) -> usize {
        self.values.len()
    }

    /// Number of grid points (steps + 1).
    pub fn len(&self) -> usize {
        self.values.first().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn grid_time(&self, k: usize) -> f64 {
        k as f64 * self.dt
    }

    pub fn fully_absorbed(&self) -> bool {
        self.absorption.iter().all(Absorption::is_absorbed)
    }

    /// Refined hitting times as a time vector; errors if any coordinate is
    /// still pending.
    pub fn hitting_times(&self) -> Result<TimeVector> {
        let mut t = Vec::with_capacity(self.n());
        for (i, a) in self.absorption.iter().enumerate() {
            match a {
                Absorption::Absorbed(v) => t.push(*v),
                Absorption::Pending => return Err(Error::Unabsorbed { vertex: i }),
            }
        }
        TimeVector::new(t)
    }

    /// Linear interpolation of coordinate `i` at time `t`; 0 at and beyond the
    /// absorption time, and an error past the simulated horizon of a pending
    /// coordinate.
    pub fn value_at(&self, i: usize, t: f64) -> Result<f64> {
        let t0 = self.absorption[i].time();
        if t >= t0 {
            return Ok(0.0);
        }
        let horizon = self.grid_time(self.len() - 1);
        if t > horizon {
            return Err(Error::MalformedGrid(format!(
                "time {t} beyond simulated horizon {horizon} on pending coordinate {i}"
            )));
        }
        let k = ((t / self.dt).floor() as usize).min(self.len() - 2);
        let t_k = self.grid_time(k);
        let frac = ((t - t_k) / self.dt).clamp(0.0, 1.0);
        let (a, b) = (self.values[i][k], self.values[i][k + 1]);
        // between t_k and the sub-grid absorption time the path is linear to 0
        if b == 0.0 && t0 < self.grid_time(k + 1) {
            let local = (t - t_k) / (t0 - t_k);
            return Ok((a * (1.0 - local)).max(0.0));
        }
        Ok(a + frac * (b - a))
    }
}

/// Paired (rho, T) trajectories on a uniform u-grid. A coordinate's entries
/// are meaningful up to its `valid_len` (transforms of absorbed paths cover a
/// finite u-range; direct simulation covers the whole grid).
#[derive(Debug, Clone)]
pub struct TimeChangedPath {
    pub du: f64,
    /// rho[vertex][k] = log X_i(T_i(u_k))
    pub rho: Vec<Vec<f64>>,
    /// t[vertex][k] = T_i(u_k)
    pub t: Vec<Vec<f64>>,
    pub valid_len: Vec<usize>,
    /// Driving Gaussian increments of the time-changed Brownian motion,
    /// stored only on request.
    pub driving_increments: Option<Vec<Vec<f64>>>,
}

impl TimeChangedPath {
    pub fn n(&self) -> usize {
        self.rho.len()
    }

    pub fn grid_u(&self, k: usize) -> f64 {
        k as f64 * self.du
    }

    /// Index of the grid point at u (must be on-grid within rounding).
    pub fn index_of(&self, u: f64) -> usize {
        (u / self.du).round() as usize
    }
}
