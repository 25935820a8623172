//! Strategies shared by the property tests.

#![allow(dead_code)]

use proptest::prelude::*;

use piezo::linalg::{CMatrix, C64};
use piezo::model::{clifford_basis, Expr, HoppingModel, HoppingTerm};

/// Coefficients of one hop on `span{I, Σ_1, …, Σ_{2m+1}}`.
#[derive(Debug, Clone)]
pub struct HopSpec {
    pub displacement: Vec<i64>,
    pub coeffs: Vec<(f64, f64)>,
}

#[derive(Debug, Clone)]
pub struct ModelSpec {
    pub dimension: usize,
    pub rank: usize,
    pub with_identity: bool,
    pub onsite: Vec<f64>,
    pub hops: Vec<HopSpec>,
}

impl ModelSpec {
    /// Hermitian by construction: each hop `M` at `n` comes with `M†` at `-n`.
    pub fn build(&self) -> HoppingModel {
        let basis = clifford_basis(self.rank).unwrap();
        let size = 1usize << self.rank;
        let combine = |coeffs: &[(f64, f64)]| -> CMatrix {
            let mut m = CMatrix::zeros(size, size);
            for (a, (re, im)) in coeffs.iter().enumerate() {
                if a == 0 && !self.with_identity {
                    continue;
                }
                let g = if a == 0 { CMatrix::identity(size, size) } else { basis[a - 1].clone() };
                m += g * C64::new(*re, *im);
            }
            m
        };
        let onsite: Vec<(f64, f64)> = self.onsite.iter().map(|v| (*v, 0.0)).collect();
        let mut terms = vec![HoppingTerm { displacement: vec![0; self.dimension], coeff: Expr::constant(1.0), matrix: combine(&onsite) }];
        for hop in &self.hops {
            let m = combine(&hop.coeffs);
            let back: Vec<i64> = hop.displacement.iter().map(|v| -v).collect();
            terms.push(HoppingTerm { displacement: back, coeff: Expr::constant(1.0), matrix: m.adjoint() });
            terms.push(HoppingTerm { displacement: hop.displacement.clone(), coeff: Expr::constant(1.0), matrix: m });
        }
        HoppingModel::new("random", self.dimension, self.rank, 0, terms).unwrap()
    }
}

fn displacement(d: usize) -> impl Strategy<Value = Vec<i64>> {
    prop::collection::vec(-1i64..=1, d).prop_filter("non-zero hop", |n| n.iter().any(|v| *v != 0))
}

/// Random nearest-neighbour models of rank 1 or 2 in dimension 1 or 2.
pub fn random_model(with_identity: bool) -> impl Strategy<Value = ModelSpec> {
    (1usize..=2, 1usize..=2).prop_flat_map(move |(dimension, rank)| {
        let comps = 2 * rank + 2;
        let hop = (displacement(dimension), prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), comps))
            .prop_map(|(displacement, coeffs)| HopSpec { displacement, coeffs });
        (prop::collection::vec(-1.0..1.0f64, comps), prop::collection::vec(hop, 1..=3)).prop_map(move |(onsite, hops)| {
            ModelSpec { dimension, rank, with_identity, onsite, hops }
        })
    })
}

pub fn k_point(d: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-std::f64::consts::PI..std::f64::consts::PI, d)
}

/// Uniaxial parameters with `q3 = 0` exactly half of the time.
pub fn uniaxial_q() -> impl Strategy<Value = Vec<f64>> {
    (-2.0..2.0f64, -2.0..2.0f64, prop_oneof![Just(0.0), -1.0..1.0f64]).prop_map(|(a, b, c)| vec![a, b, c])
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}
