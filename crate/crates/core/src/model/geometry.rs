use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Bravais lattice data in units of the lattice constant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeGeometry {
    /// Basis vectors `γ_1 … γ_d`, one per row.
    pub basis: Vec<Vec<f64>>,
    /// Nearest-neighbour vectors `δ_0, δ_1, δ_2` (honeycomb only).
    pub nearest_neighbors: Option<[[f64; 2]; 3]>,
}

impl LatticeGeometry {
    pub fn new(basis: Vec<Vec<f64>>) -> Result<Self> {
        let d = basis.len();
        if d == 0 || basis.iter().any(|v| v.len() != d) {
            return Err(Error::invalid("basis must be d vectors of length d"));
        }
        let geometry = LatticeGeometry { basis, nearest_neighbors: None };
        if geometry.cell_volume() <= 1e-12 {
            return Err(Error::invalid("basis vectors are linearly dependent"));
        }
        Ok(geometry)
    }

    /// The graphene honeycomb lattice with carbon-carbon distance `a`.
    pub fn honeycomb(a: f64) -> Self {
        let s3 = 3f64.sqrt();
        LatticeGeometry {
            basis: vec![vec![1.5 * a, 0.5 * s3 * a], vec![1.5 * a, -0.5 * s3 * a]],
            nearest_neighbors: Some([
                [a, 0.0],
                [-0.5 * a, 0.5 * s3 * a],
                [-0.5 * a, -0.5 * s3 * a],
            ]),
        }
    }

    pub fn dimension(&self) -> usize {
        self.basis.len()
    }

    /// `|det(γ_1, …, γ_d)|`.
    pub fn cell_volume(&self) -> f64 {
        determinant(&self.basis).abs()
    }
}

fn determinant(rows: &[Vec<f64>]) -> f64 {
    let n = rows.len();
    DMatrix::from_fn(n, n, |i, j| rows[i][j]).determinant()
}
