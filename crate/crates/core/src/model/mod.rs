//! Parameter-dependent hopping models and their Bloch symbols.
//!
//! A model is a finite list of hopping terms `(n, c(q), M)` and stands for
//! the Bloch symbol
//!
//! ```text
//! H(k; q) = Σ_terms c(q) e^{-i k·n} M
//! ```
//!
//! The same list builds the real-space operator in [`crate::disorder`], so
//! both representations share one source of truth. Symbols are decomposed on
//! the Clifford basis `{I, Σ_1, …, Σ_{2m+1}}`; models whose hopping matrices
//! leave that span are rejected when a symbol is formed.

mod clifford;
mod document;
mod expr;
mod geometry;

use std::collections::BTreeMap;
use std::ops::Deref;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use clifford::clifford_basis;
pub use document::{ModelDocument, ModelSpec, TermDocument};
pub use expr::Expr;
pub use geometry::LatticeGeometry;

use crate::error::{Error, Result};
use crate::linalg::{identity, max_abs, CMatrix, C64, ONE, ZERO};

/// A point `q` in parameter space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ParameterPoint(pub Vec<f64>);

impl ParameterPoint {
    pub fn new(values: impl Into<Vec<f64>>) -> Self {
        ParameterPoint(values.into())
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    pub fn distance(&self, other: &ParameterPoint) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt()
    }
}

impl Deref for ParameterPoint {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl From<Vec<f64>> for ParameterPoint {
    fn from(v: Vec<f64>) -> Self {
        ParameterPoint(v)
    }
}

impl<const N: usize> From<[f64; N]> for ParameterPoint {
    fn from(v: [f64; N]) -> Self {
        ParameterPoint(v.to_vec())
    }
}

/// One contribution `coeff(q) · e^{-i k·n} · matrix` to the Bloch symbol.
#[derive(Debug, Clone)]
pub struct HoppingTerm {
    pub displacement: Vec<i64>,
    pub coeff: Expr,
    pub matrix: CMatrix,
}

#[derive(Debug, Clone)]
pub struct HoppingModel {
    name: String,
    dimension: usize,
    rank: usize,
    parameters: usize,
    terms: Vec<HoppingTerm>,
    basis: Arc<Vec<CMatrix>>,
    admissible: Option<Vec<[f64; 2]>>,
}

/// Tolerance used for the Hermiticity-closure and Clifford-span checks.
const STRUCTURE_TOLERANCE: f64 = 1e-12;

impl HoppingModel {
    /// Builds a model and checks its structure on sampled parameter points.
    pub fn new(
        name: impl Into<String>,
        dimension: usize,
        rank: usize,
        parameters: usize,
        terms: Vec<HoppingTerm>,
    ) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::invalid("lattice dimension must be positive"));
        }
        let basis = Arc::new(clifford_basis(rank)?);
        let size = 1usize << rank;
        for term in &terms {
            if term.displacement.len() != dimension {
                return Err(Error::invalid(format!(
                    "displacement {:?} does not have dimension {dimension}",
                    term.displacement
                )));
            }
            if term.matrix.shape() != (size, size) {
                return Err(Error::invalid(format!(
                    "hopping matrix must be {size}x{size}, got {:?}",
                    term.matrix.shape()
                )));
            }
            if term.coeff.arity() > parameters {
                return Err(Error::invalid(format!(
                    "coefficient {} references more than {parameters} parameters",
                    term.coeff
                )));
            }
        }
        let model = HoppingModel {
            name: name.into(),
            dimension,
            rank,
            parameters,
            terms,
            basis,
            admissible: None,
        };
        model.validate()?;
        Ok(model)
    }

    fn validate(&self) -> Result<()> {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        for _ in 0..16 {
            let q: Vec<f64> = (0..self.parameters).map(|_| rng.gen_range(-2.0..2.0)).collect();
            self.symbol(&q)?;
        }
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Restricts parameter scans to the box `[lo_i, hi_i]`.
    pub fn with_admissible_box(mut self, bounds: Vec<[f64; 2]>) -> Result<Self> {
        if bounds.len() != self.parameters || bounds.iter().any(|[lo, hi]| !(lo <= hi)) {
            return Err(Error::invalid("admissible box must give lo <= hi per parameter"));
        }
        self.admissible = Some(bounds);
        Ok(self)
    }

    pub fn admissible_box(&self) -> Option<&[[f64; 2]]> {
        self.admissible.as_deref()
    }

    /// Lattice dimension `d`.
    pub fn dimension(&self) -> usize {
        self.dimension
    }

    /// Clifford rank `m`; matrices are `2^m × 2^m`.
    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn orbitals(&self) -> usize {
        1 << self.rank
    }

    pub fn parameters(&self) -> usize {
        self.parameters
    }

    pub fn terms(&self) -> &[HoppingTerm] {
        &self.terms
    }

    pub fn clifford(&self) -> &[CMatrix] {
        &self.basis
    }

    /// Largest `|n_j|` over the hopping support.
    pub fn max_hop(&self) -> i64 {
        self.terms
            .iter()
            .flat_map(|t| t.displacement.iter().map(|n| n.abs()))
            .max()
            .unwrap_or(0)
    }

    /// Hopping matrices `M_n(q)` summed per displacement.
    pub fn hoppings(&self, q: &[f64]) -> BTreeMap<Vec<i64>, CMatrix> {
        let size = self.orbitals();
        let mut out: BTreeMap<Vec<i64>, CMatrix> = BTreeMap::new();
        for term in &self.terms {
            let c = C64::new(term.coeff.eval(q), 0.0);
            let entry = out
                .entry(term.displacement.clone())
                .or_insert_with(|| CMatrix::zeros(size, size));
            *entry += &term.matrix * c;
        }
        out
    }

    /// Freezes the parameters and decomposes the symbol on the Clifford basis.
    pub fn symbol(&self, q: &[f64]) -> Result<BlochSymbol> {
        if q.len() != self.parameters {
            return Err(Error::invalid(format!(
                "model {} takes {} parameters, got {}",
                self.name,
                self.parameters,
                q.len()
            )));
        }
        if q.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("parameter point is not finite"));
        }
        let hoppings = self.hoppings(q);
        let size = self.orbitals();
        let scale = 1.0 / size as f64;
        let components = 2 * self.rank + 2;

        for (n, m) in &hoppings {
            let minus: Vec<i64> = n.iter().map(|v| -v).collect();
            let partner = hoppings.get(&minus);
            let defect = match partner {
                Some(p) => max_abs(&(p - m.adjoint())),
                None => max_abs(m),
            };
            if defect > STRUCTURE_TOLERANCE * (1.0 + max_abs(m)) {
                return Err(Error::NotHermitian(format!(
                    "M_{minus:?} != M_{n:?}^† at q = {q:?} (defect {defect:.3e})"
                )));
            }
        }

        let mut displacements = Vec::with_capacity(hoppings.len() * self.dimension);
        let mut coeffs = Vec::with_capacity(hoppings.len() * components);
        for (n, m) in &hoppings {
            let mut rebuilt = identity(size) * (m.trace() * scale);
            coeffs.push(m.trace() * scale);
            for sigma in self.basis.iter() {
                let c = (sigma * m).trace() * scale;
                rebuilt += sigma * c;
                coeffs.push(c);
            }
            let residual = max_abs(&(m - rebuilt));
            if residual > STRUCTURE_TOLERANCE * (1.0 + max_abs(m)) {
                return Err(Error::NotTwoBand { residual });
            }
            displacements.extend(n.iter().map(|&v| v as f64));
        }
        Ok(BlochSymbol {
            dimension: self.dimension,
            rank: self.rank,
            q: q.to_vec(),
            displacements,
            coeffs,
            basis: Arc::clone(&self.basis),
        })
    }

    /// `(h_0, h, H)` at `(k, q)`.
    pub fn eval_symbol(&self, k: &[f64], q: &[f64]) -> Result<SymbolValue> {
        let symbol = self.symbol(q)?;
        Ok(symbol.value(k))
    }

    /// `∂_{k_j} H(k; q)` for `j = 1..d`.
    pub fn symbol_k_gradient(&self, k: &[f64], q: &[f64]) -> Result<Vec<CMatrix>> {
        Ok(self.symbol(q)?.k_gradient(k))
    }
}

/// The symbol `H(k; q)` at a fixed parameter point, stored as Clifford
/// coefficients per hopping displacement.
#[derive(Debug, Clone)]
pub struct BlochSymbol {
    dimension: usize,
    rank: usize,
    q: Vec<f64>,
    /// Flattened displacements, `dimension` entries per hop.
    displacements: Vec<f64>,
    /// Flattened coefficients, `2m + 2` entries per hop (identity first).
    coeffs: Vec<C64>,
    basis: Arc<Vec<CMatrix>>,
}

/// Clifford decomposition of the symbol at one `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolValue {
    pub h0: f64,
    pub h: Vec<f64>,
    pub matrix: CMatrix,
}

impl SymbolValue {
    pub fn norm(&self) -> f64 {
        self.h.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

impl BlochSymbol {
    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn size(&self) -> usize {
        1 << self.rank
    }

    /// Number of Clifford components including `h_0`.
    pub fn components(&self) -> usize {
        2 * self.rank + 2
    }

    pub fn parameters(&self) -> &[f64] {
        &self.q
    }

    pub fn clifford(&self) -> &[CMatrix] {
        &self.basis
    }

    pub(crate) fn hops(&self) -> impl Iterator<Item = (&[f64], &[C64])> {
        self.displacements
            .chunks_exact(self.dimension)
            .zip(self.coeffs.chunks_exact(self.components()))
    }

    /// Writes `(h_0, h_1, …, h_{2m+1})` into `out`.
    pub fn components_into(&self, k: &[f64], out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.components());
        out.iter_mut().for_each(|v| *v = 0.0);
        for (n, c) in self.hops() {
            let phase: f64 = n.iter().zip(k).map(|(a, b)| a * b).sum();
            let (s, co) = phase.sin_cos();
            // Re[(co - i s) c]
            for (o, ci) in out.iter_mut().zip(c) {
                *o += co * ci.re + s * ci.im;
            }
        }
    }

    /// Writes `∂_{k_dir}(h_0, h_1, …)` into `out`.
    pub fn gradient_into(&self, k: &[f64], dir: usize, out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        for (n, c) in self.hops() {
            if n[dir] == 0.0 {
                continue;
            }
            let phase: f64 = n.iter().zip(k).map(|(a, b)| a * b).sum();
            let (s, co) = phase.sin_cos();
            // Re[-i n_dir (co - i s) c] = -n_dir Re[(s + i co) c]
            for (o, ci) in out.iter_mut().zip(c) {
                *o -= n[dir] * (s * ci.re - co * ci.im);
            }
        }
    }

    /// Largest imaginary part left over by the Clifford projection at `k`.
    pub fn reality_defect(&self, k: &[f64]) -> f64 {
        let mut acc = vec![ZERO; self.components()];
        for (n, c) in self.hops() {
            let phase: f64 = n.iter().zip(k).map(|(a, b)| a * b).sum();
            let e = C64::new(phase.cos(), -phase.sin());
            for (a, ci) in acc.iter_mut().zip(c) {
                *a += e * ci;
            }
        }
        acc.iter().map(|z| z.im.abs()).fold(0.0, f64::max)
    }

    pub fn assemble(&self, comps: &[f64]) -> CMatrix {
        let mut m = identity(self.size()) * C64::new(comps[0], 0.0);
        for (sigma, &h) in self.basis.iter().zip(&comps[1..]) {
            m += sigma * C64::new(h, 0.0);
        }
        m
    }

    pub fn value(&self, k: &[f64]) -> SymbolValue {
        let mut comps = vec![0.0; self.components()];
        self.components_into(k, &mut comps);
        SymbolValue {
            h0: comps[0],
            h: comps[1..].to_vec(),
            matrix: self.assemble(&comps),
        }
    }

    pub fn matrix(&self, k: &[f64]) -> CMatrix {
        self.value(k).matrix
    }

    /// `|h|(k)`.
    pub fn h_norm(&self, k: &[f64]) -> f64 {
        let mut comps = vec![0.0; self.components()];
        self.components_into(k, &mut comps);
        comps[1..].iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Analytic `∂_{k_j} H`, one matrix per lattice direction.
    pub fn k_gradient(&self, k: &[f64]) -> Vec<CMatrix> {
        let mut comps = vec![0.0; self.components()];
        (0..self.dimension)
            .map(|dir| {
                self.gradient_into(k, dir, &mut comps);
                self.assemble(&comps)
            })
            .collect()
    }
}

fn matrix2(entries: [C64; 4]) -> CMatrix {
    CMatrix::from_row_slice(2, 2, &entries)
}

fn term(displacement: [i64; 2], coeff: Expr, matrix: CMatrix) -> HoppingTerm {
    HoppingTerm { displacement: displacement.to_vec(), coeff, matrix }
}

fn honeycomb_terms(q0: Expr, q1: Expr, q2: Expr) -> Vec<HoppingTerm> {
    let upper = matrix2([ZERO, ONE, ZERO, ZERO]);
    let lower = matrix2([ZERO, ZERO, ONE, ZERO]);
    vec![
        term([0, 0], q0, &upper + &lower),
        term([1, 0], q1.clone(), upper.clone()),
        term([-1, 0], q1, lower.clone()),
        term([0, 1], q2.clone(), upper),
        term([0, -1], q2, lower),
    ]
}

/// Uniaxial strain model for graphene with stagger potential, parameters
/// `q = (q1, q2, q3)` and the `δ_0` hopping fixed to one:
///
/// ```text
/// h_1 = 1 + q1 cos k1 + q2 cos k2,  h_2 = q1 sin k1 + q2 sin k2,  h_3 = q3
/// ```
pub fn uniaxial_model() -> HoppingModel {
    let mut terms = honeycomb_terms(Expr::constant(1.0), Expr::param(1), Expr::param(2));
    terms.push(term([0, 0], Expr::param(3), matrix2([ONE, ZERO, ZERO, -ONE])));
    HoppingModel::new("uniaxial", 2, 1, 3, terms)
        .and_then(|m| m.with_admissible_box(vec![[0.0, 2.0], [0.0, 2.0], [-1.0, 1.0]]))
        .expect("preset is well formed")
}

/// Uniaxial model with a free `δ_0` amplitude, `q = (q0, q1, q2, q3)`.
pub fn uniaxial_model_general() -> HoppingModel {
    let mut terms = honeycomb_terms(Expr::param(1), Expr::param(2), Expr::param(3));
    terms.push(term([0, 0], Expr::param(4), matrix2([ONE, ZERO, ZERO, -ONE])));
    HoppingModel::new("uniaxial-general", 2, 1, 4, terms).expect("preset is well formed")
}

/// Nearest-neighbour graphene `T(q1, q2)` without stagger.
pub fn nn_graphene_model() -> HoppingModel {
    let terms = honeycomb_terms(Expr::constant(1.0), Expr::param(1), Expr::param(2));
    HoppingModel::new("nn-graphene", 2, 1, 2, terms).expect("preset is well formed")
}

/// Looks up a preset by name.
pub fn preset(name: &str) -> Result<HoppingModel> {
    match name {
        "uniaxial" => Ok(uniaxial_model()),
        "uniaxial-general" => Ok(uniaxial_model_general()),
        "nn-graphene" => Ok(nn_graphene_model()),
        other => Err(Error::invalid(format!("unknown model preset {other:?}"))),
    }
}
