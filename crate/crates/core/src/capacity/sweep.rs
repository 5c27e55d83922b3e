use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{optimize_private_capacity, CapacityResult, Constraints, Scheme};
use crate::channels::LinkEnvironment;
use crate::error::{Error, Result};

/// Grid of (noise, interception) cells for one scheme.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub delta_values: Vec<f64>,
    pub gamma_values: Vec<f64>,
    pub scheme: Scheme,
    #[serde(default)]
    pub constraints: Option<Constraints>,
    #[serde(default = "unit_efficiency")]
    pub eta: f64,
    #[serde(default = "enabled")]
    pub eve_includes_receiver_efficiency: bool,
}

fn unit_efficiency() -> f64 {
    1.0
}

fn enabled() -> bool {
    true
}

impl SweepGrid {
    pub fn new(scheme: Scheme, delta_values: Vec<f64>, gamma_values: Vec<f64>) -> Result<Self> {
        let grid = SweepGrid {
            delta_values,
            gamma_values,
            scheme,
            constraints: None,
            eta: 1.0,
            eve_includes_receiver_efficiency: true,
        };
        grid.validate()?;
        Ok(grid)
    }

    pub fn with_constraints(mut self, constraints: Constraints) -> Self {
        self.constraints = Some(constraints);
        self
    }

    pub fn validate(&self) -> Result<()> {
        for (name, values) in [("delta", &self.delta_values), ("gamma", &self.gamma_values)] {
            if values.is_empty() {
                return Err(Error::usage(format!("{name} list is empty")));
            }
            if values.windows(2).any(|w| w[1] <= w[0]) {
                return Err(Error::usage(format!("{name} values must be strictly increasing")));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.delta_values.len() * self.gamma_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Cell coordinates in row-major order: gamma outer, delta inner.
    pub fn cells(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.gamma_values
            .iter()
            .flat_map(move |&g| self.delta_values.iter().map(move |&d| (g, d)))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepCell {
    pub gamma: f64,
    pub delta: f64,
    /// A failed cell keeps its error; the rest of the sweep still runs.
    pub result: Result<CapacityResult>,
}

/// Optimizes every cell of the grid. Cells run in parallel; the output is in
/// row-major order (gamma outer, delta inner) regardless of completion order.
pub fn capacity_sweep(grid: &SweepGrid) -> Result<Vec<SweepCell>> {
    grid.validate()?;
    let constraints = grid.constraints.clone().unwrap_or_default();
    constraints.resolve(grid.scheme)?;
    let cells: Vec<(f64, f64)> = grid.cells().collect();
    Ok(cells
        .into_par_iter()
        .map(|(gamma, delta)| {
            let result = LinkEnvironment::new(grid.eta, delta, gamma)
                .map(|e| e.with_eve_receiver_efficiency(grid.eve_includes_receiver_efficiency))
                .and_then(|env| optimize_private_capacity(grid.scheme, &env, &constraints));
            SweepCell { gamma, delta, result }
        })
        .collect())
}
