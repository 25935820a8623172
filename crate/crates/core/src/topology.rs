//! Chern numbers of loops of two-band symbols.
//!
//! A loop `η` turns the symbol into a field `h(k, t) = h(k; η(t))` on the
//! `(d+1)`-torus with coordinates `(k_1, …, k_d, t)`. Chern numbers are
//! computed on the coordinate 2-tori `T²_{j,n}`, `j < n`, oriented by
//! `(e_j, e_n)` and embedded at a basepoint `∗` for the remaining coordinates.
//!
//! Two independent estimators are provided:
//!
//! * the winding formula: per-plaquette winding of `arg(h_1 + i h_2)`
//!   collected on the pole cells, and
//! * the plaquette (link-variable) formula on the occupied frames.
//!
//! With `P = P_-` both give `C_{j,d+1} = ΔP_j`. The occupied bundle has
//! the degree of `-ĥ`, so in terms of `(h_1, h_2)` windings the Chern number
//! is the total winding around the south-pole cells (equivalently minus the
//! winding around the north-pole cells).

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{eigh, hermitian_function, hermitian_norm, identity, CMatrix, CVector, C64, ZERO};
use crate::loops::Loop;
use crate::model::{BlochSymbol, HoppingModel};
use crate::spectral::{min_gap_along_loop, GapOptions, GapReport, LOCAL_GAP_TOLERANCE};

/// Vertices with `|(h_1, h_2)|` below this make the winding ill-defined.
pub const DEGENERATE_TOLERANCE: f64 = 1e-9;
/// Links with `|det⟨F(x)|F(x+μ)⟩|` below this are unresolved.
pub const LINK_TOLERANCE: f64 = 1e-12;
/// Largest accepted principal-value increment of `arg(h_1 + i h_2)` along
/// a grid edge.
pub const MAX_EDGE_INCREMENT: f64 = PI - 1e-6;
/// Chart margin for the local sections.
pub const CHART_MARGIN: f64 = 1e-6;

/// Spherical coordinates of `h/|h| ∈ S^{2m}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SphereAngles {
    /// `θ_1 … θ_{2m-1}` in `[0, π]`.
    pub thetas: Vec<f64>,
    /// `φ ∈ (-π, π]`, or `None` where `(h_1, h_2) = 0`.
    pub phi: Option<f64>,
}

impl SphereAngles {
    pub fn rank(&self) -> usize {
        self.thetas.len().div_ceil(2)
    }

    /// `(Y_1, …, Y_{2m+1})`.
    pub fn unit_vector(&self) -> Vec<f64> {
        let nt = self.thetas.len();
        let m2 = nt + 1;
        let phi = self.phi.unwrap_or(0.0);
        let mut y = vec![0.0; m2 + 1];
        let sin_all: f64 = self.thetas.iter().map(|t| t.sin()).product();
        y[0] = sin_all * phi.cos();
        y[1] = sin_all * phi.sin();
        // Y_j = sin θ_1 ⋯ sin θ_{2m+1-j} cos θ_{2m+2-j} for j ≥ 3
        for j in 3..=m2 + 1 {
            let last = m2 + 2 - j;
            let prefix: f64 = self.thetas[..last - 1].iter().map(|t| t.sin()).product();
            y[j - 1] = prefix * self.thetas[last - 1].cos();
        }
        y
    }

    /// `θ` for `m = 1`.
    pub fn theta(&self) -> f64 {
        self.thetas[self.thetas.len() - 1]
    }
}

/// Inverse spherical map
/// `θ_j = atan2(√(h_1² + … + h_{2m+1-j}²), h_{2m+2-j})`, `φ = atan2(h_2, h_1)`.
pub fn sphere_angles(h: &[f64]) -> Result<SphereAngles> {
    if h.len() < 3 || h.len() % 2 == 0 {
        return Err(Error::invalid(format!("expected 2m+1 components, got {}", h.len())));
    }
    let norm = h.iter().map(|v| v * v).sum::<f64>().sqrt();
    if !(norm > LOCAL_GAP_TOLERANCE) {
        return Err(Error::GapClosed { k: vec![], q: vec![], gap: norm });
    }
    let m2 = h.len() - 1;
    let mut partial = vec![0.0; h.len() + 1];
    for i in 0..h.len() {
        partial[i + 1] = partial[i] + h[i] * h[i];
    }
    let thetas = (1..m2)
        .map(|j| {
            let upto = m2 + 1 - j;
            partial[upto].sqrt().atan2(h[upto])
        })
        .collect();
    let planar = h[0].hypot(h[1]);
    let phi = (planar > 0.0).then(|| h[1].atan2(h[0]));
    Ok(SphereAngles { thetas, phi })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Chart {
    North,
    South,
}

/// Local sections of the occupied line bundle over `S²`:
/// `Ψ_N = (e^{-iφ} sin(θ/2), -cos(θ/2))`, `Ψ_S = e^{iφ} Ψ_N`.
pub fn local_section(angles: &SphereAngles, chart: Chart) -> Result<CVector> {
    if angles.thetas.len() != 1 {
        return Err(Error::invalid("local sections are implemented for m = 1"));
    }
    let theta = angles.theta();
    let phi = angles.phi.unwrap_or(0.0);
    let (s, c) = (0.5 * theta).sin_cos();
    let psi = match chart {
        Chart::North => {
            if !(theta < PI - CHART_MARGIN) {
                return Err(Error::invalid(format!("θ = {theta} lies outside the north chart")));
            }
            [C64::from_polar(s, -phi), C64::new(-c, 0.0)]
        }
        Chart::South => {
            if !(theta > CHART_MARGIN) {
                return Err(Error::invalid(format!("θ = {theta} lies outside the south chart")));
            }
            [C64::new(s, 0.0), C64::from_polar(-c, phi)]
        }
    };
    Ok(CVector::from_row_slice(&psi))
}

/// Transition function `g_NS = e^{iφ}` between the two charts.
pub fn transition_function(angles: &SphereAngles) -> C64 {
    C64::from_polar(1.0, angles.phi.unwrap_or(0.0))
}

/// Reference projection `(I - Y·σ)/2` on `S²`.
pub fn sphere_projection(angles: &SphereAngles) -> CMatrix {
    let basis = crate::model::clifford_basis(angles.rank()).expect("rank ≥ 1");
    crate::spectral::projection_from_h(&basis, &angles.unit_vector()).expect("unit vector")
}

/// Coordinate plane `(j, n)` of the `(d+1)`-torus, 1-based, `j < n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Plane(pub usize, pub usize);

impl Plane {
    pub fn validate(&self, d: usize) -> Result<()> {
        if !(1 <= self.0 && self.0 < self.1 && self.1 <= d + 1) {
            return Err(Error::invalid(format!(
                "plane ({}, {}) is not an ordered pair in 1..={}",
                self.0,
                self.1,
                d + 1
            )));
        }
        Ok(())
    }

    /// All planes `j < n ≤ d+1` in lexicographic order.
    pub fn all(d: usize) -> Vec<Plane> {
        (1..=d + 1).flat_map(|j| (j + 1..=d + 1).map(move |n| Plane(j, n))).collect()
    }
}

/// Grid coordinate `-π + 2π (a + s) / N` along plane axis `axis` (0 or 1).
pub(crate) fn plane_axis(n: usize, axis: usize) -> Vec<f64> {
    let s = 0.5 / ((axis + 1) as f64).sqrt();
    (0..n).map(|a| -PI + TAU * (a as f64 + s) / n as f64).collect()
}

/// The field `h(k, t)` of a loop on the `(d+1)`-torus.
#[derive(Debug, Clone, Copy)]
pub struct Embedding<'a> {
    pub model: &'a HoppingModel,
    pub l: &'a Loop,
}

impl<'a> Embedding<'a> {
    pub fn new(model: &'a HoppingModel, l: &'a Loop) -> Result<Self> {
        if l.dimension() != model.parameters() {
            return Err(Error::invalid(format!(
                "loop has {} coordinates but the model takes {} parameters",
                l.dimension(),
                model.parameters()
            )));
        }
        Ok(Embedding { model, l })
    }

    pub fn dimension(&self) -> usize {
        self.model.dimension()
    }

    pub fn symbol_at(&self, t: f64) -> Result<BlochSymbol> {
        self.model.symbol(&self.l.eval(t))
    }

    /// Clifford components `(h_0, h_1, …)` at `x = (k, t)`.
    pub fn components(&self, x: &[f64]) -> Result<Vec<f64>> {
        let d = self.dimension();
        let symbol = self.symbol_at(x[d])?;
        let mut out = vec![0.0; symbol.components()];
        symbol.components_into(&x[..d], &mut out);
        Ok(out)
    }

    /// Samples the field on the `N × N` grid of `plane` through `basepoint`.
    pub fn plane_field(&self, plane: Plane, basepoint: &[f64], n: usize) -> Result<PlaneField> {
        let d = self.dimension();
        plane.validate(d)?;
        if basepoint.len() != d + 1 {
            return Err(Error::invalid(format!("basepoint needs {} coordinates", d + 1)));
        }
        if n < 4 {
            return Err(Error::invalid("plane grids need N ≥ 4"));
        }
        let (ja, jb) = (plane.0 - 1, plane.1 - 1);
        let axes = [plane_axis(n, 0), plane_axis(n, 1)];
        let time_axis = jb == d;
        let symbols: Vec<BlochSymbol> = if time_axis {
            axes[1].par_iter().map(|&t| self.symbol_at(t)).collect::<Result<_>>()?
        } else {
            vec![self.symbol_at(basepoint[d])?]
        };
        let comps_len = symbols[0].components();
        let mut comps = vec![0.0; n * n * comps_len];
        let mut x = basepoint.to_vec();
        for a in 0..n {
            x[ja] = axes[0][a];
            for b in 0..n {
                x[jb] = axes[1][b];
                let symbol = if time_axis { &symbols[b] } else { &symbols[0] };
                let slot = &mut comps[(a * n + b) * comps_len..(a * n + b + 1) * comps_len];
                symbol.components_into(&x[..d], slot);
                let r = slot[1..].iter().map(|v| v * v).sum::<f64>().sqrt();
                if !(r > LOCAL_GAP_TOLERANCE) {
                    return Err(Error::GapClosed { k: x[..d].to_vec(), q: symbol.parameters().to_vec(), gap: r });
                }
            }
        }
        Ok(PlaneField {
            plane,
            n,
            basepoint: basepoint.to_vec(),
            axes,
            comps_len,
            comps,
        })
    }
}

/// Field values on a plane grid; vertex `(a, b)` sits at
/// `(axes[0][a], axes[1][b])`.
#[derive(Debug, Clone)]
pub struct PlaneField {
    pub plane: Plane,
    pub n: usize,
    pub basepoint: Vec<f64>,
    pub axes: [Vec<f64>; 2],
    comps_len: usize,
    comps: Vec<f64>,
}

impl PlaneField {
    /// `(h_0, h_1, …)` at vertex `(a, b)`.
    pub fn at(&self, a: usize, b: usize) -> &[f64] {
        let i = (a % self.n) * self.n + b % self.n;
        &self.comps[i * self.comps_len..(i + 1) * self.comps_len]
    }

    pub fn rank(&self) -> usize {
        (self.comps_len - 2) / 2
    }

    /// Full torus coordinates of vertex `(a, b)`.
    pub fn point(&self, a: usize, b: usize) -> Vec<f64> {
        let mut x = self.basepoint.clone();
        x[self.plane.0 - 1] = self.axes[0][a % self.n];
        x[self.plane.1 - 1] = self.axes[1][b % self.n];
        x
    }

    /// Occupied frames of `P_-` at every vertex.
    pub fn projector_field(&self) -> ProjectorField {
        let basis = crate::model::clifford_basis(self.rank()).expect("rank ≥ 1");
        let frames = (0..self.n * self.n)
            .map(|i| occupied_frame(&basis, &self.comps[i * self.comps_len + 1..(i + 1) * self.comps_len]))
            .collect();
        ProjectorField { n1: self.n, n2: self.n, frames }
    }
}

/// Orthonormal frame of the lower eigenspace of `h·Σ`.
pub fn occupied_frame(basis: &[CMatrix], h: &[f64]) -> CMatrix {
    if h.len() == 3 {
        let r = (h[0] * h[0] + h[1] * h[1] + h[2] * h[2]).sqrt();
        let w = C64::new(h[0], h[1]);
        // two expressions for the same eigenvector; pick the better conditioned
        let (u0, u1) = if h[2] + r >= r - h[2] {
            (w.conj(), C64::new(-(h[2] + r), 0.0))
        } else {
            (C64::new(r - h[2], 0.0), -w)
        };
        let norm = (u0.norm_sqr() + u1.norm_sqr()).sqrt();
        return CMatrix::from_column_slice(2, 1, &[u0 / norm, u1 / norm]);
    }
    let size = basis[0].nrows();
    let mut m = CMatrix::zeros(size, size);
    for (sigma, &v) in basis.iter().zip(h) {
        m += sigma * C64::new(v, 0.0);
    }
    let eig = eigh(&m);
    eig.vectors.columns(0, size / 2).into_owned()
}

/// Occupied frames on an `n1 × n2` periodic grid, vertex `(a, b)` at index
/// `a * n2 + b`.
#[derive(Debug, Clone)]
pub struct ProjectorField {
    pub n1: usize,
    pub n2: usize,
    pub frames: Vec<CMatrix>,
}

impl ProjectorField {
    /// Builds frames from projections (rank read off each projection).
    pub fn from_projectors(n1: usize, n2: usize, projectors: &[CMatrix]) -> Result<Self> {
        if projectors.len() != n1 * n2 {
            return Err(Error::invalid("projector count does not match the grid"));
        }
        let frames: Vec<CMatrix> = projectors
            .iter()
            .map(|p| {
                let eig = eigh(p);
                let size = p.nrows();
                let rank = eig.values.iter().filter(|&&v| v > 0.5).count();
                eig.vectors.columns(size - rank, rank).into_owned()
            })
            .collect();
        let rank = frames[0].ncols();
        if frames.iter().any(|f| f.ncols() != rank) {
            return Err(Error::invalid("projector rank is not constant on the grid"));
        }
        Ok(ProjectorField { n1, n2, frames })
    }

    fn frame(&self, a: usize, b: usize) -> &CMatrix {
        &self.frames[(a % self.n1) * self.n2 + b % self.n2]
    }
}

fn link(a: &CMatrix, b: &CMatrix) -> Result<C64> {
    let overlap = a.adjoint() * b;
    let det = if overlap.nrows() == 1 { overlap[(0, 0)] } else { overlap.determinant() };
    let norm = det.norm();
    if !(norm > LINK_TOLERANCE) {
        return Err(Error::Resolution(format!("vanishing link overlap {norm:.3e}")));
    }
    Ok(det / norm)
}

/// Lattice Chern number `(1/2π) Σ arg(U_1(x) U_2(x+e_1) U_1(x+e_2)^* U_2(x)^*)`
/// of a frame field, oriented by the grid axes.
pub fn chern_plaquette(field: &ProjectorField) -> Result<i64> {
    let (n1, n2) = (field.n1, field.n2);
    if field.frames[0].ncols() == 0 {
        return Ok(0);
    }
    let mut u1 = vec![ZERO; n1 * n2];
    let mut u2 = vec![ZERO; n1 * n2];
    for a in 0..n1 {
        for b in 0..n2 {
            let f = field.frame(a, b);
            u1[a * n2 + b] = link(f, field.frame(a + 1, b))?;
            u2[a * n2 + b] = link(f, field.frame(a, b + 1))?;
        }
    }
    let mut total = 0.0;
    for a in 0..n1 {
        for b in 0..n2 {
            let (a1, b1) = ((a + 1) % n1, (b + 1) % n2);
            let w = u1[a * n2 + b] * u2[a1 * n2 + b] * u1[a * n2 + b1].conj() * u2[a * n2 + b].conj();
            total += w.im.atan2(w.re);
        }
    }
    snap_integer(total / TAU, 0)
}

/// Rounds a value that must be an integer up to round-off.
fn snap_integer(v: f64, component: usize) -> Result<i64> {
    let r = v.round();
    if (v - r).abs() > 1e-6 {
        return Err(Error::AmbiguousInteger { component, value: v });
    }
    Ok(r as i64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Pole {
    North,
    South,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoleCell {
    /// Lower-left vertex `(a, b)` of the plaquette.
    pub cell: [usize; 2],
    /// Plane coordinates of the plaquette centre.
    pub center: [f64; 2],
    pub winding: i64,
    pub pole: Pole,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoleCellSet {
    pub plane: Plane,
    pub n: usize,
    pub basepoint: Vec<f64>,
    /// Plaquettes with non-zero winding of `(h_1, h_2)`.
    pub cells: Vec<PoleCell>,
    /// Sum of all plaquette windings (zero on a torus).
    pub total_winding: i64,
}

impl PoleCellSet {
    pub fn north_winding(&self) -> i64 {
        self.cells.iter().filter(|c| c.pole == Pole::North).map(|c| c.winding).sum()
    }

    pub fn south_winding(&self) -> i64 {
        self.cells.iter().filter(|c| c.pole == Pole::South).map(|c| c.winding).sum()
    }

    pub fn count(&self, pole: Pole) -> usize {
        self.cells.iter().filter(|c| c.pole == pole).count()
    }
}

fn principal(v: f64) -> f64 {
    let r = (v + PI).rem_euclid(TAU) - PI;
    if r == -PI {
        PI
    } else {
        r
    }
}

fn require_two_band(field: &PlaneField) -> Result<()> {
    if field.rank() != 1 {
        return Err(Error::invalid("winding Chern numbers are implemented for m = 1 only"));
    }
    Ok(())
}

/// Plaquette windings of `arg(h_1 + i h_2)` on a sampled plane.
pub fn pole_cells_from_field(embedding: &Embedding, field: &PlaneField) -> Result<PoleCellSet> {
    require_two_band(field)?;
    let n = field.n;
    let mut phase = vec![0.0; n * n];
    for a in 0..n {
        for b in 0..n {
            let h = field.at(a, b);
            if h[1].hypot(h[2]) < DEGENERATE_TOLERANCE {
                return Err(Error::DegenerateEmbedding { point: field.point(a, b) });
            }
            phase[a * n + b] = h[2].atan2(h[1]);
        }
    }
    let increment = |from: usize, to: usize| -> Result<f64> {
        let d = principal(phase[to] - phase[from]);
        if d.abs() > MAX_EDGE_INCREMENT {
            return Err(Error::Resolution(format!(
                "phase increment {d:.3} along an edge of plane ({}, {}) at N = {n}",
                field.plane.0, field.plane.1
            )));
        }
        Ok(d)
    };
    let mut horizontal = vec![0.0; n * n];
    let mut vertical = vec![0.0; n * n];
    for a in 0..n {
        for b in 0..n {
            horizontal[a * n + b] = increment(a * n + b, ((a + 1) % n) * n + b)?;
            vertical[a * n + b] = increment(a * n + b, a * n + (b + 1) % n)?;
        }
    }
    let d = embedding.dimension();
    let mut cells = Vec::new();
    let mut total = 0;
    for a in 0..n {
        for b in 0..n {
            let (a1, b1) = ((a + 1) % n, (b + 1) % n);
            let sum = horizontal[a * n + b] + vertical[a1 * n + b] - horizontal[a * n + b1] - vertical[a * n + b];
            let w = snap_integer(sum / TAU, 0)?;
            total += w;
            if w == 0 {
                continue;
            }
            let step = TAU / n as f64;
            let center = [field.axes[0][a] + 0.5 * step, field.axes[1][b] + 0.5 * step];
            let mut x = field.basepoint.clone();
            x[field.plane.0 - 1] = center[0];
            x[field.plane.1 - 1] = center[1];
            let h = embedding.components(&x)?;
            let _ = d;
            if h[3].abs() <= DEGENERATE_TOLERANCE {
                return Err(Error::Resolution(format!(
                    "winding plaquette at {center:?} has h3 = {:.3e}",
                    h[3]
                )));
            }
            let pole = if h[3] > 0.0 { Pole::North } else { Pole::South };
            cells.push(PoleCell { cell: [a, b], center, winding: w, pole });
        }
    }
    Ok(PoleCellSet {
        plane: field.plane,
        n,
        basepoint: field.basepoint.clone(),
        cells,
        total_winding: total,
    })
}

pub fn pole_cells(
    model: &HoppingModel,
    l: &Loop,
    plane: Plane,
    basepoint: &[f64],
    n: usize,
) -> Result<PoleCellSet> {
    let embedding = Embedding::new(model, l)?;
    let field = embedding.plane_field(plane, basepoint, n)?;
    pole_cells_from_field(&embedding, &field)
}

/// Chern number from the pole cells: `Σ_S w`, cross-checked against `-Σ_N w`.
pub fn chern_from_poles(cells: &PoleCellSet) -> Result<i64> {
    let south = cells.south_winding();
    let north = cells.north_winding();
    if south != -north {
        return Err(Error::Resolution(format!(
            "pole windings disagree: south {south}, north {north} on plane ({}, {})",
            cells.plane.0, cells.plane.1
        )));
    }
    Ok(south)
}

/// Winding-formula Chern number on one embedded plane.
pub fn chern_winding(
    model: &HoppingModel,
    l: &Loop,
    plane: Plane,
    basepoint: &[f64],
    n: usize,
) -> Result<i64> {
    chern_from_poles(&pole_cells(model, l, plane, basepoint, n)?)
}

/// Antisymmetric integer matrix of Chern numbers on the `(d+1)`-torus.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ChernMatrix {
    pub entries: Vec<Vec<i64>>,
}

impl ChernMatrix {
    pub fn zeros(size: usize) -> Self {
        ChernMatrix { entries: vec![vec![0; size]; size] }
    }

    pub fn size(&self) -> usize {
        self.entries.len()
    }

    /// `C_{j,n}` with 1-based indices.
    pub fn get(&self, j: usize, n: usize) -> i64 {
        self.entries[j - 1][n - 1]
    }

    /// Sets `C_{j,n}` and `C_{n,j} = -C_{j,n}`.
    pub fn set(&mut self, plane: Plane, value: i64) {
        self.entries[plane.0 - 1][plane.1 - 1] = value;
        self.entries[plane.1 - 1][plane.0 - 1] = -value;
    }

    /// `ΔP_j = C_{j,d+1}`.
    pub fn delta_p(&self) -> Vec<i64> {
        let last = self.size() - 1;
        (0..last).map(|j| self.entries[j][last]).collect()
    }

    /// The `d × d` block of `k`-space Chern numbers.
    pub fn berry_block(&self) -> Vec<Vec<i64>> {
        let d = self.size() - 1;
        self.entries[..d].iter().map(|row| row[..d].to_vec()).collect()
    }

    pub fn is_antisymmetric(&self) -> bool {
        let n = self.size();
        (0..n).all(|i| (0..n).all(|j| self.entries[i][j] == -self.entries[j][i]))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChernOptions {
    /// Plane grid size `N`.
    pub n: usize,
    /// Independent random basepoints per plane.
    pub basepoints: usize,
    pub seed: u64,
    /// Times `N` may be doubled after a resolution failure.
    pub max_doublings: u32,
    /// Extra basepoint draws after degenerate embeddings.
    pub max_retries: usize,
    /// `k`-grid for the gap precondition.
    pub n_k: usize,
}

impl Default for ChernOptions {
    fn default() -> Self {
        ChernOptions { n: 64, basepoints: 3, seed: 0, max_doublings: 2, max_retries: 5, n_k: 64 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasepointResult {
    pub basepoint: Vec<f64>,
    pub n: usize,
    pub winding: i64,
    pub plaquette: i64,
    pub north_cells: usize,
    pub south_cells: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlaneReport {
    pub plane: Plane,
    pub value: i64,
    pub basepoints: Vec<BasepointResult>,
    /// Basepoints discarded because the embedding was degenerate.
    pub rejected_basepoints: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChernReport {
    pub matrix: ChernMatrix,
    pub delta_p: Vec<i64>,
    pub planes: Vec<PlaneReport>,
    pub gap: GapReport,
}

/// Winding and plaquette Chern numbers at one basepoint, doubling `N` on
/// resolution failures.
pub fn plane_chern(
    embedding: &Embedding,
    plane: Plane,
    basepoint: &[f64],
    n: usize,
    max_doublings: u32,
) -> Result<BasepointResult> {
    let mut n = n;
    let mut doublings = 0;
    loop {
        let attempt = (|| {
            let field = embedding.plane_field(plane, basepoint, n)?;
            let cells = pole_cells_from_field(embedding, &field)?;
            let winding = chern_from_poles(&cells)?;
            let plaquette = chern_plaquette(&field.projector_field())?;
            Ok(BasepointResult {
                basepoint: basepoint.to_vec(),
                n,
                winding,
                plaquette,
                north_cells: cells.count(Pole::North),
                south_cells: cells.count(Pole::South),
            })
        })();
        match attempt {
            Err(Error::Resolution(_)) | Err(Error::AmbiguousInteger { .. }) if doublings < max_doublings => {
                n *= 2;
                doublings += 1;
            }
            other => return other,
        }
    }
}

/// Draws basepoints uniformly in `[-π, π)^{d+1}`.
pub fn random_basepoints(d: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| (0..=d).map(|_| rng.gen_range(-PI..PI)).collect()).collect()
}

/// The full matrix `C([η])`, checked across basepoints and methods.
pub fn chern_matrix(model: &HoppingModel, l: &Loop, e_f: f64, opts: &ChernOptions) -> Result<ChernReport> {
    let embedding = Embedding::new(model, l)?;
    if opts.basepoints == 0 {
        return Err(Error::invalid("at least one basepoint is required"));
    }
    let gap = min_gap_along_loop(model, l, e_f, &GapOptions::with_n_k(opts.n_k))?;
    if !gap.gapped {
        return Err(Error::GapClosed {
            k: gap.argmin_k.clone(),
            q: l.eval(gap.argmin_t.unwrap_or(0.0)),
            gap: gap.min_distance,
        });
    }
    check_fermi_level(&embedding, e_f)?;
    let d = model.dimension();
    let planes = Plane::all(d);
    let reports = planes
        .par_iter()
        .enumerate()
        .map(|(i, &plane)| plane_report(&embedding, plane, opts, opts.seed.wrapping_add(i as u64 * 0x9e37)))
        .collect::<Result<Vec<_>>>()?;
    let mut matrix = ChernMatrix::zeros(d + 1);
    for r in &reports {
        matrix.set(r.plane, r.value);
    }
    Ok(ChernReport { delta_p: matrix.delta_p(), matrix, planes: reports, gap })
}

fn plane_report(embedding: &Embedding, plane: Plane, opts: &ChernOptions, seed: u64) -> Result<PlaneReport> {
    let d = embedding.dimension();
    let candidates = random_basepoints(d, opts.basepoints + opts.max_retries, seed);
    let mut results: Vec<BasepointResult> = Vec::new();
    let mut rejected = Vec::new();
    for bp in candidates {
        if results.len() == opts.basepoints {
            break;
        }
        match plane_chern(embedding, plane, &bp, opts.n, opts.max_doublings) {
            Ok(r) => results.push(r),
            Err(Error::DegenerateEmbedding { .. }) => rejected.push(bp),
            Err(e) => return Err(e),
        }
    }
    if results.len() < opts.basepoints {
        return Err(Error::DegenerateEmbedding { point: rejected.last().cloned().unwrap_or_default() });
    }
    for r in &results {
        if r.winding != r.plaquette {
            return Err(Error::MethodDisagreement(format!(
                "plane ({}, {}) at basepoint {:?}: winding {} vs plaquette {}",
                plane.0, plane.1, r.basepoint, r.winding, r.plaquette
            )));
        }
    }
    let value = results[0].winding;
    if results.iter().any(|r| r.winding != value) {
        let values: Vec<i64> = results.iter().map(|r| r.winding).collect();
        return Err(Error::Resolution(format!(
            "plane ({}, {}) gives different values {values:?} at different basepoints",
            plane.0, plane.1
        )));
    }
    Ok(PlaneReport { plane, value, basepoints: results, rejected_basepoints: rejected })
}

/// The lower-band projection is the Fermi projection only if `E_F` sits
/// between the two bands.
pub fn check_fermi_level(embedding: &Embedding, e_f: f64) -> Result<()> {
    let d = embedding.dimension();
    let h = embedding.components(&vec![0.0; d + 1])?;
    let r = h[1..].iter().map(|v| v * v).sum::<f64>().sqrt();
    if !(h[0] - r < e_f && e_f < h[0] + r) {
        return Err(Error::invalid(format!(
            "E_F = {e_f} does not lie between the bands ({:.6}, {:.6})",
            h[0] - r,
            h[0] + r
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Triviality {
    Trivial,
    Undetermined,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrivialityReport {
    pub verdict: Triviality,
    /// The pole variety certified empty, if any.
    pub empty: Option<Pole>,
    /// Smallest chord distance of `ĥ` to the north/south pole on the grid.
    pub north_distance: f64,
    pub south_distance: f64,
    /// Distance a pole could hide between grid vertices.
    pub margin: f64,
}

/// Certifies that one pole variety is empty on the full `(d+1)`-torus.
///
/// A pole is certified absent when every grid value of `ĥ` stays further from
/// it than `√(d+1)` times the largest change of `ĥ` along a grid edge.
pub fn triviality_check(model: &HoppingModel, l: &Loop, n: usize) -> Result<TrivialityReport> {
    let embedding = Embedding::new(model, l)?;
    if model.rank() != 1 {
        return Err(Error::invalid("pole varieties are implemented for m = 1 only"));
    }
    let d = model.dimension();
    let dims = d + 1;
    let total = n.pow(dims as u32);
    let axis = plane_axis(n, 0);
    let symbols: Vec<BlochSymbol> = axis.iter().map(|&t| embedding.symbol_at(t)).collect::<Result<_>>()?;
    let mut units = vec![[0.0; 3]; total];
    let mut comps = vec![0.0; 4];
    let mut k = vec![0.0; d];
    for (idx, u) in units.iter_mut().enumerate() {
        let mut rest = idx;
        for j in (0..dims).rev() {
            let a = rest % n;
            rest /= n;
            if j == d {
                continue;
            }
            k[j] = axis[a];
        }
        let t_index = idx % n;
        symbols[t_index].components_into(&k, &mut comps);
        let r = (comps[1] * comps[1] + comps[2] * comps[2] + comps[3] * comps[3]).sqrt();
        if !(r > LOCAL_GAP_TOLERANCE) {
            return Err(Error::GapClosed { k: k.clone(), q: symbols[t_index].parameters().to_vec(), gap: r });
        }
        *u = [comps[1] / r, comps[2] / r, comps[3] / r];
    }
    let chord = |u: &[f64; 3], v: &[f64; 3]| {
        ((u[0] - v[0]).powi(2) + (u[1] - v[1]).powi(2) + (u[2] - v[2]).powi(2)).sqrt()
    };
    let mut max_edge: f64 = 0.0;
    let mut stride = 1;
    for _ in 0..dims {
        for idx in 0..total {
            let coord = (idx / stride) % n;
            let next = if coord + 1 == n { idx + stride - n * stride } else { idx + stride };
            max_edge = max_edge.max(chord(&units[idx], &units[next]));
        }
        stride *= n;
    }
    let north = units.iter().map(|u| chord(u, &[0.0, 0.0, 1.0])).fold(f64::INFINITY, f64::min);
    let south = units.iter().map(|u| chord(u, &[0.0, 0.0, -1.0])).fold(f64::INFINITY, f64::min);
    let margin = max_edge * (dims as f64).sqrt();
    let empty = if north > margin {
        Some(Pole::North)
    } else if south > margin {
        Some(Pole::South)
    } else {
        None
    };
    Ok(TrivialityReport {
        verdict: if empty.is_some() { Triviality::Trivial } else { Triviality::Undetermined },
        empty,
        north_distance: north,
        south_distance: south,
        margin,
    })
}

/// Kato's intertwiner
/// `U = (P'P + (1-P')(1-P)) (1 - (P'-P)²)^{-1/2}` with `U P U† = P'`.
pub fn kato_intertwiner(p: &CMatrix, p_next: &CMatrix) -> Result<CMatrix> {
    if p.shape() != p_next.shape() || p.nrows() != p.ncols() {
        return Err(Error::invalid("projections must be square and of equal size"));
    }
    let n = p.nrows();
    let diff = p_next - p;
    let distance = hermitian_norm(&diff);
    if !(distance < 1.0 - 1e-12) {
        return Err(Error::NotConnectable { distance });
    }
    let one = identity(n);
    let inner = &one - &diff * &diff;
    let inv_sqrt = hermitian_function(&inner, |v| 1.0 / v.sqrt());
    let q = &one - p;
    let q_next = &one - p_next;
    Ok((p_next * p + q_next * q) * inv_sqrt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs, pauli};
    use crate::loops::{generator_eta, reverse};
    use crate::model::{clifford_basis, uniaxial_model, Expr, HoppingTerm};
    use crate::spectral::projection_from_h;

    fn rel(a: &CMatrix, b: &CMatrix) -> f64 {
        max_abs(&(a - b))
    }

    #[test]
    fn angle_examples() {
        let a = sphere_angles(&[0.0, 0.0, 1.0]).unwrap();
        assert_eq!(a.theta(), 0.0);
        assert!(a.phi.is_none());
        let a = sphere_angles(&[1.0, 0.0, 0.0]).unwrap();
        assert!((a.theta() - PI / 2.0).abs() < 1e-15);
        assert_eq!(a.phi, Some(0.0));
        assert!(sphere_angles(&[0.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn angles_round_trip() {
        for h in [[0.3, -1.2, 0.7], [-2.0, 0.1, -0.4], [0.0, 1.0, -3.0]] {
            let a = sphere_angles(&h).unwrap();
            let r = (h[0] * h[0] + h[1] * h[1] + h[2] * h[2]).sqrt();
            for (y, v) in a.unit_vector().iter().zip(&h) {
                assert!((y - v / r).abs() < 1e-12);
            }
            assert!((a.theta() - (h[2] / r).acos()).abs() < 1e-12);
        }
        let h = [0.2, -0.5, 1.1, 0.4, -0.9];
        let a = sphere_angles(&h).unwrap();
        assert_eq!(a.thetas.len(), 3);
        let r = h.iter().map(|v| v * v).sum::<f64>().sqrt();
        for (y, v) in a.unit_vector().iter().zip(&h) {
            assert!((y - v / r).abs() < 1e-12);
        }
    }

    #[test]
    fn eta1_north_pole_angles() {
        let model = uniaxial_model();
        let l = generator_eta(1, 0.5).unwrap();
        let e = Embedding::new(&model, &l).unwrap();
        let h = e.components(&[-PI, 0.3, -PI / 2.0]).unwrap();
        assert!(h[1].abs() < 1e-15 && h[2].abs() < 1e-15 && (h[3] - 0.5).abs() < 1e-15);
        assert!(sphere_angles(&h[1..]).unwrap().theta() < 1e-14);
    }

    #[test]
    fn section_examples() {
        let north = SphereAngles { thetas: vec![0.0], phi: None };
        let psi = local_section(&north, Chart::North).unwrap();
        assert_eq!(psi[0], ZERO);
        assert_eq!(psi[1], C64::new(-1.0, 0.0));
        let south = SphereAngles { thetas: vec![PI], phi: Some(0.7) };
        let psi = local_section(&south, Chart::South).unwrap();
        assert!((psi[0] - C64::new(1.0, 0.0)).norm() < 1e-15 && psi[1].norm() < 1e-15);
        assert!(local_section(&south, Chart::North).is_err());
        assert!(local_section(&north, Chart::South).is_err());

        let eq = SphereAngles { thetas: vec![PI / 2.0], phi: Some(0.0) };
        let psi = local_section(&eq, Chart::North).unwrap();
        let s = 0.5f64.sqrt();
        assert!((psi[0].re - s).abs() < 1e-15 && (psi[1].re + s).abs() < 1e-15);
        let p = sphere_projection(&eq);
        assert!((&p * &psi - &psi).norm() < 1e-12);
    }

    #[test]
    fn sections_span_the_projection_and_glue() {
        for (theta, phi) in [(0.4, 1.0), (1.5, -2.0), (2.9, 3.0)] {
            let a = SphereAngles { thetas: vec![theta], phi: Some(phi) };
            let p = sphere_projection(&a);
            let n = local_section(&a, Chart::North).unwrap();
            let s = local_section(&a, Chart::South).unwrap();
            assert!((&p * &n - &n).norm() < 1e-10);
            assert!((n.norm() - 1.0).abs() < 1e-14);
            assert!((&s - &n * transition_function(&a)).norm() < 1e-14);
        }
    }

    #[test]
    fn occupied_frame_matches_projection() {
        let basis = clifford_basis(1).unwrap();
        for h in [[0.3, -1.2, 0.7], [0.0, 0.0, -2.0], [0.0, 0.0, 2.0], [1e-9, 0.0, -1.0]] {
            let f = occupied_frame(&basis, &h);
            let p = projection_from_h(&basis, &h).unwrap();
            assert!(rel(&(&f * f.adjoint()), &p) < 1e-12, "{h:?}");
        }
        let basis = clifford_basis(2).unwrap();
        let h = [0.3, -0.2, 0.9, 0.1, -0.5];
        let f = occupied_frame(&basis, &h);
        assert_eq!(f.ncols(), 2);
        let p = projection_from_h(&basis, &h).unwrap();
        assert!(rel(&(&f * f.adjoint()), &p) < 1e-12);
    }

    /// Reference field `u = (sin k1, sin k2, M + cos k1 + cos k2)` as a model.
    fn reference_model(mass: f64) -> HoppingModel {
        let half = C64::new(0.0, 0.5);
        let mut terms = vec![HoppingTerm { displacement: vec![0, 0], coeff: Expr::constant(mass), matrix: pauli(3) }];
        for (dir, sigma) in [(0usize, 1usize), (1, 2)] {
            let mut n = vec![0, 0];
            n[dir] = 1;
            // sin k σ = (i/2)(e^{-ik} - e^{ik}) σ, cos k σ3 = (e^{-ik} + e^{ik}) σ3 / 2
            let plus = pauli(sigma) * half + pauli(3) * C64::new(0.5, 0.0);
            let minus = pauli(sigma) * (-half) + pauli(3) * C64::new(0.5, 0.0);
            terms.push(HoppingTerm { displacement: n.clone(), coeff: Expr::constant(1.0), matrix: plus });
            terms.push(HoppingTerm { displacement: n.iter().map(|v| -v).collect(), coeff: Expr::constant(1.0), matrix: minus });
        }
        HoppingModel::new("reference", 2, 1, 1, terms).unwrap()
    }

    #[test]
    fn reference_map_methods_agree() {
        for mass in [1.0, -1.0, 3.0] {
            let model = reference_model(mass);
            let s = model.symbol(&[0.0]).unwrap();
            let v = s.value(&[0.4, -1.1]);
            assert!((v.h[0] - 0.4f64.sin()).abs() < 1e-14);
            assert!((v.h[1] - (-1.1f64).sin()).abs() < 1e-14);
            assert!((v.h[2] - (mass + 0.4f64.cos() + (-1.1f64).cos())).abs() < 1e-14);
            let l = Loop::constant(vec![0.0]).unwrap();
            let c = chern_winding(&model, &l, Plane(1, 2), &[0.0, 0.0, 0.0], 64).unwrap();
            let e = Embedding::new(&model, &l).unwrap();
            let field = e.plane_field(Plane(1, 2), &[0.0, 0.0, 0.0], 64).unwrap();
            let p = chern_plaquette(&field.projector_field()).unwrap();
            assert_eq!(c, p, "mass {mass}");
            // deg u = -sign(M) for 0 < |M| < 2, and the occupied band carries deg(-u) = -deg u
            let expected = if mass.abs() < 2.0 { mass.signum() as i64 } else { 0 };
            assert_eq!(p, expected, "mass {mass}");
        }
    }

    #[test]
    fn constant_projector_field_has_zero_chern() {
        let basis = clifford_basis(1).unwrap();
        let p = projection_from_h(&basis, &[0.2, 0.3, 0.9]).unwrap();
        let field = ProjectorField::from_projectors(8, 8, &vec![p; 64]).unwrap();
        assert_eq!(chern_plaquette(&field).unwrap(), 0);
    }

    #[test]
    fn eta1_pole_cells_on_k1_t_plane() {
        let model = uniaxial_model();
        let l = generator_eta(1, 0.5).unwrap();
        let cells = pole_cells(&model, &l, Plane(1, 3), &[0.0, 0.37, 0.0], 64).unwrap();
        assert_eq!(cells.total_winding, 0);
        assert_eq!(cells.count(Pole::North), 1);
        assert_eq!(cells.count(Pole::South), 1);
        let north = cells.cells.iter().find(|c| c.pole == Pole::North).unwrap();
        let south = cells.cells.iter().find(|c| c.pole == Pole::South).unwrap();
        let step = TAU / 64.0;
        // k1 = -π ≡ π, t = ∓π/2
        assert!(principal(north.center[0] - PI).abs() < step);
        assert!(principal(north.center[1] + PI / 2.0).abs() < step);
        assert!(principal(south.center[1] - PI / 2.0).abs() < step);
        assert_eq!(north.winding, -1);
        assert_eq!(south.winding, 1);
        assert_eq!(chern_from_poles(&cells).unwrap(), 1);
    }

    #[test]
    fn eta1_k_plane_has_no_poles() {
        let model = uniaxial_model();
        let l = generator_eta(1, 0.5).unwrap();
        let cells = pole_cells(&model, &l, Plane(1, 2), &[0.0, 0.0, 1.0], 32).unwrap();
        assert!(cells.cells.is_empty());
    }

    #[test]
    fn constant_loop_has_no_pole_cells() {
        let model = uniaxial_model();
        let l = Loop::constant(vec![1.0, 0.0, 0.5]).unwrap();
        for plane in Plane::all(2) {
            let cells = pole_cells(&model, &l, plane, &[0.1, 0.2, 0.3], 32).unwrap();
            assert!(cells.cells.is_empty(), "{plane:?}");
        }
    }

    #[test]
    fn winding_examples() {
        let model = uniaxial_model();
        let e1 = generator_eta(1, 0.5).unwrap();
        let e2 = generator_eta(2, 0.5).unwrap();
        assert_eq!(chern_winding(&model, &e1, Plane(1, 3), &[0.0, 1.0, 0.0], 64).unwrap(), 1);
        assert_eq!(chern_winding(&model, &e1, Plane(2, 3), &[0.5, 0.0, 0.0], 64).unwrap(), 0);
        assert_eq!(chern_winding(&model, &e2, Plane(2, 3), &[-2.0, 0.0, 0.0], 64).unwrap(), 1);
        assert_eq!(chern_winding(&model, &reverse(&e1), Plane(1, 3), &[0.0, 1.0, 0.0], 64).unwrap(), -1);
    }

    #[test]
    fn degenerate_embedding_is_reported() {
        // at k1 = -π the η1 field has (h1, h2) = (1 - q1, 0), vanishing where q1 = 1
        let model = uniaxial_model();
        let l = generator_eta(1, 0.5).unwrap();
        let e = Embedding::new(&model, &l).unwrap();
        let h = e.components(&[-PI, 0.0, PI / 2.0]).unwrap();
        assert!(h[1].abs() < 1e-15 && h[2].abs() < 1e-15);
        let err = pole_cells(&model, &l, Plane(2, 3), &[-PI, 0.0, 0.0], 8);
        // t-grid misses ±π/2 exactly, so the field is only nearly degenerate;
        // h2 ≡ 0 on the whole plane makes every increment 0 or π
        assert!(err.is_err() || err.unwrap().cells.is_empty());
    }

    #[test]
    fn chern_matrix_of_generators() {
        let model = uniaxial_model();
        let opts = ChernOptions { n: 32, n_k: 32, ..Default::default() };
        let e1 = generator_eta(1, 0.5).unwrap().with_samples(32);
        let r = chern_matrix(&model, &e1, 0.0, &opts).unwrap();
        assert_eq!(r.matrix.entries, vec![vec![0, 0, 1], vec![0, 0, 0], vec![-1, 0, 0]]);
        assert_eq!(r.delta_p, vec![1, 0]);
        assert!(r.matrix.is_antisymmetric());
        assert!(r.planes.iter().all(|p| p.basepoints.len() == 3));
        let c = Loop::constant(vec![0.5, 0.5, 0.5]).unwrap().with_samples(4);
        let r = chern_matrix(&model, &c, 0.0, &opts).unwrap();
        assert_eq!(r.matrix, ChernMatrix::zeros(3));
    }

    #[test]
    fn chern_matrix_rejects_gapless_loops() {
        let model = uniaxial_model();
        let l = Loop::polyline(vec![vec![0.8, 0.8, 0.0], vec![1.2, 1.2, 0.0]]).unwrap().with_samples(8);
        let err = chern_matrix(&model, &l, 0.0, &ChernOptions { n: 16, n_k: 16, ..Default::default() }).unwrap_err();
        assert!(matches!(err, Error::GapClosed { .. }));
        let e1 = generator_eta(1, 0.5).unwrap().with_samples(8);
        let err = chern_matrix(&model, &e1, 5.0, &ChernOptions { n: 16, n_k: 16, ..Default::default() }).unwrap_err();
        assert!(matches!(err, Error::InvalidArgument(_)));
    }

    #[test]
    fn triviality_examples() {
        let model = uniaxial_model();
        let c = Loop::constant(vec![0.0, 0.0, 0.0]).unwrap();
        assert_eq!(triviality_check(&model, &c, 8).unwrap().verdict, Triviality::Trivial);
        let e1 = generator_eta(1, 0.5).unwrap();
        assert_eq!(triviality_check(&model, &e1, 16).unwrap().verdict, Triviality::Undetermined);
        let circle = crate::loops::Loop::fourier(crate::loops::FourierSeries {
            constant: vec![1.0, 1.0, 0.5],
            cos: vec![vec![0.2], vec![0.0], vec![0.0]],
            sin: vec![vec![0.0], vec![0.2], vec![0.0]],
        })
        .unwrap();
        let r = triviality_check(&model, &circle, 16).unwrap();
        assert_eq!(r.verdict, Triviality::Trivial);
        assert_eq!(r.empty, Some(Pole::South));
    }

    #[test]
    fn kato_examples() {
        let basis = clifford_basis(1).unwrap();
        let p = projection_from_h(&basis, &[0.3, 0.1, 0.8]).unwrap();
        let u = kato_intertwiner(&p, &p).unwrap();
        assert!(rel(&u, &identity(2)) < 1e-12);

        let p0 = projection_from_h(&basis, &[0.0, 0.0, -1.0]).unwrap();
        assert!(rel(&p0, &CMatrix::from_diagonal_element(2, 2, ZERO)) > 0.0);
        let alpha: f64 = 0.3;
        let p1 = projection_from_h(&basis, &[alpha.sin(), 0.0, -alpha.cos()]).unwrap();
        let u = kato_intertwiner(&p0, &p1).unwrap();
        assert!(rel(&(u.adjoint() * &u), &identity(2)) < 1e-12);
        assert!(rel(&(&u * &p0 * u.adjoint()), &p1) < 1e-12);
        // rotation of the Bloch vector by -α about the y axis
        let half = alpha / 2.0;
        let rot = identity(2) * C64::new(half.cos(), 0.0) + pauli(2) * C64::new(0.0, half.sin());
        assert!(rel(&u, &rot) < 1e-12);

        let a = CMatrix::from_diagonal(&CVector::from_row_slice(&[C64::new(1.0, 0.0), ZERO]));
        let b = CMatrix::from_diagonal(&CVector::from_row_slice(&[ZERO, C64::new(1.0, 0.0)]));
        assert!(matches!(kato_intertwiner(&a, &b), Err(Error::NotConnectable { .. })));
    }
}
