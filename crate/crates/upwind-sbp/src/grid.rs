//! Grids with shifted near-boundary spacings.
//!
//! A grid has N cells (N+1 nodes). The first K and last K spacings take the
//! values h_1..h_K (in units of the interior spacing); everything between is
//! uniform. In `Unit` mode the interior spacing is 1; in `Scaled` mode the
//! whole grid is scaled onto [0, 1], so h = 1 / (N - 2K + 2*sum h_i).

use crate::dd::Dd;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridMode {
    Unit,
    Scaled,
}

/// Boundary spacing parameters, kept both as the source decimal strings (for
/// digit-exact serialization) and as parsed extended-precision values.
#[derive(Clone, Debug)]
pub struct ShiftParams {
    strings: Vec<String>,
    values: Vec<Dd>,
}

impl ShiftParams {
    pub fn none() -> ShiftParams {
        ShiftParams { strings: Vec::new(), values: Vec::new() }
    }

    pub fn from_strings<S: AsRef<str>>(strings: &[S]) -> Result<ShiftParams> {
        let mut values = Vec::with_capacity(strings.len());
        for (index, s) in strings.iter().enumerate() {
            let v = Dd::parse(s.as_ref())?;
            if v.to_f64() <= 0.0 {
                return Err(Error::NonPositiveSpacing { index, value: v.to_f64() });
            }
            values.push(v);
        }
        Ok(ShiftParams {
            strings: strings.iter().map(|s| s.as_ref().to_string()).collect(),
            values,
        })
    }

    /// For optimizer output: store the shortest decimal string that round-trips.
    pub fn from_f64s(values: &[f64]) -> Result<ShiftParams> {
        let strings: Vec<String> = values.iter().map(|v| format!("{v}")).collect();
        ShiftParams::from_strings(&strings)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn strings(&self) -> &[String] {
        &self.strings
    }

    pub fn values(&self) -> &[Dd] {
        &self.values
    }

    pub fn values_f64(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.to_f64()).collect()
    }
}

#[derive(Clone, Debug)]
pub struct Grid {
    p: usize,
    shifts: ShiftParams,
    n_cells: usize,
    mode: GridMode,
    /// Interior spacing: 1 in unit mode, 1/(N - 2K + 2 sum h_i) in scaled mode.
    h: f64,
    spacings: Vec<f64>,
    nodes: Vec<f64>,
}

impl Grid {
    /// Build a symmetric grid. Requires N+1 >= 4p+2 so the two boundary
    /// closures of 2p rows each never overlap and at least two interior rows
    /// remain.
    pub fn new(p: usize, shifts: ShiftParams, n_cells: usize, mode: GridMode) -> Result<Grid> {
        let required = 4 * p + 2;
        if n_cells + 1 < required {
            return Err(Error::GridTooSmall { required, got: n_cells + 1 });
        }
        let k = shifts.len();
        if 2 * k > n_cells {
            return Err(Error::InvalidParameter(format!(
                "{k} shifted spacings on each side need at least {} cells",
                2 * k
            )));
        }
        let h = match mode {
            GridMode::Unit => 1.0,
            GridMode::Scaled => {
                let mut sum = Dd::from_i128((n_cells - 2 * k) as i128);
                for v in shifts.values() {
                    sum = sum + *v + *v;
                }
                (Dd::ONE / sum).to_f64()
            }
        };
        let mut spacings = vec![h; n_cells];
        for (i, v) in shifts.values_f64().iter().enumerate() {
            spacings[i] = v * h;
            spacings[n_cells - 1 - i] = v * h;
        }
        let mut nodes = Vec::with_capacity(n_cells + 1);
        nodes.push(0.0);
        let mut acc = 0.0;
        for s in &spacings {
            acc += s;
            nodes.push(acc);
        }
        Ok(Grid { p, shifts, n_cells, mode, h, spacings, nodes })
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn order(&self) -> usize {
        2 * self.p
    }

    pub fn shift_count(&self) -> usize {
        self.shifts.len()
    }

    pub fn shifts(&self) -> &ShiftParams {
        &self.shifts
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn mode(&self) -> GridMode {
        self.mode
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn spacings(&self) -> &[f64] {
        &self.spacings
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Node positions of the left closure in units of the interior spacing,
    /// computed in extended precision; the accuracy system is built on these.
    pub fn unit_nodes_dd(&self, count: usize) -> Vec<Dd> {
        let mut xs = Vec::with_capacity(count);
        let mut acc = Dd::ZERO;
        xs.push(acc);
        for i in 1..count {
            let step = self
                .shifts
                .values()
                .get(i - 1)
                .copied()
                .unwrap_or(Dd::ONE);
            acc = acc + step;
            xs.push(acc);
        }
        xs
    }

    pub fn to_json(&self) -> GridJson {
        GridJson {
            p: self.p,
            K: self.shifts.len(),
            N: self.n_cells,
            mode: self.mode,
            spacings: self.spacings.clone(),
            nodes: self.nodes.clone(),
        }
    }
}

/// Serialization schema: spacings and nodes are emitted as shortest
/// round-tripping decimals, so parse -> serialize is byte-stable.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct GridJson {
    pub p: usize,
    pub K: usize,
    pub N: usize,
    pub mode: GridMode,
    pub spacings: Vec<f64>,
    pub nodes: Vec<f64>,
}
