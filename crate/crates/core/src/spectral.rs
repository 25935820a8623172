//! Band energies, Fermi projections and spectral gaps.
//!
//! For a two-band Clifford symbol `H = h_0 I + Σ_j h_j Σ_j` the spectrum at
//! each `k` is `E_± = h_0 ± |h|`. The lower-band projection
//! `P_- = (I - ĥ·Σ)/2` does not depend on `h_0`.

use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{identity, CMatrix, C64};
use crate::loops::Loop;
use crate::model::{BlochSymbol, HoppingModel};

/// Default threshold below which a spectral distance counts as closed.
pub const GAP_TOLERANCE: f64 = 1e-6;
/// Smallest `|h|` accepted when normalizing the symbol.
pub const LOCAL_GAP_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GridMode {
    /// Offset `0.5 / √(j+1)` grid spacings along axis `j`.
    Shifted,
    /// Contains `k = -π` and all `-π + 2πa/N`.
    Aligned,
}

/// Uniform product grid on the torus `[-π, π)^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct KGrid {
    n: usize,
    dimension: usize,
    axes: Vec<Vec<f64>>,
}

impl KGrid {
    pub fn new(n: usize, dimension: usize, mode: GridMode) -> Self {
        let axes = (0..dimension)
            .map(|j| {
                let shift = match mode {
                    GridMode::Shifted => 0.5 / ((j + 1) as f64).sqrt(),
                    GridMode::Aligned => 0.0,
                };
                (0..n).map(|a| -PI + TAU * (a as f64 + shift) / n as f64).collect()
            })
            .collect();
        KGrid { n, dimension, axes }
    }

    pub fn shifted(n: usize, dimension: usize) -> Self {
        KGrid::new(n, dimension, GridMode::Shifted)
    }

    pub fn aligned(n: usize, dimension: usize) -> Self {
        KGrid::new(n, dimension, GridMode::Aligned)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.n.pow(self.dimension as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn axis(&self, j: usize) -> &[f64] {
        &self.axes[j]
    }

    /// Point with flat index `idx`; the last axis runs fastest.
    pub fn point(&self, idx: usize) -> Vec<f64> {
        let mut k = vec![0.0; self.dimension];
        let mut rest = idx;
        for j in (0..self.dimension).rev() {
            k[j] = self.axes[j][rest % self.n];
            rest /= self.n;
        }
        k
    }

    pub fn points(&self) -> impl Iterator<Item = Vec<f64>> + '_ {
        (0..self.len()).map(|i| self.point(i))
    }
}

/// Evaluates Clifford components of a symbol on a whole grid, using
/// per-axis phase tables instead of trigonometric calls per point.
struct GridEvaluator<'a> {
    symbol: &'a BlochSymbol,
    grid: &'a KGrid,
    /// `e^{-i n_j k_{j,a}}` indexed `[hop][j][a]`.
    tables: Vec<Vec<Vec<C64>>>,
    coeffs: Vec<&'a [C64]>,
}

impl<'a> GridEvaluator<'a> {
    fn new(symbol: &'a BlochSymbol, grid: &'a KGrid) -> Self {
        let mut tables = Vec::new();
        let mut coeffs = Vec::new();
        for (n, c) in symbol.hops() {
            tables.push(
                (0..grid.dimension)
                    .map(|j| {
                        grid.axes[j]
                            .iter()
                            .map(|&k| C64::new(0.0, -n[j] * k).exp())
                            .collect()
                    })
                    .collect(),
            );
            coeffs.push(c);
        }
        GridEvaluator { symbol, grid, tables, coeffs }
    }

    fn components(&self, idx: usize, out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        let n = self.grid.n;
        for (table, c) in self.tables.iter().zip(&self.coeffs) {
            let mut rest = idx;
            let mut phase = C64::new(1.0, 0.0);
            for j in (0..self.grid.dimension).rev() {
                phase *= table[j][rest % n];
                rest /= n;
            }
            for (o, ci) in out.iter_mut().zip(c.iter()) {
                *o += phase.re * ci.re - phase.im * ci.im;
            }
        }
    }

    /// `(distance, flat index)` of the grid point closest to the spectrum.
    fn min_distance(&self, e_f: f64) -> (f64, usize) {
        let mut comps = vec![0.0; self.symbol.components()];
        let mut best = (f64::INFINITY, 0);
        for idx in 0..self.grid.len() {
            self.components(idx, &mut comps);
            let d = distance_from_components(&comps, e_f);
            if d < best.0 {
                best = (d, idx);
            }
        }
        best
    }
}

fn h_norm(comps: &[f64]) -> f64 {
    comps[1..].iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn distance_from_components(comps: &[f64], e_f: f64) -> f64 {
    let r = h_norm(comps);
    let lower = comps[0] - r - e_f;
    let upper = comps[0] + r - e_f;
    lower.abs().min(upper.abs())
}

/// `(E_-, E_+) = (h_0 - |h|, h_0 + |h|)`.
pub fn band_energies(symbol: &BlochSymbol, k: &[f64]) -> (f64, f64) {
    let mut comps = vec![0.0; symbol.components()];
    symbol.components_into(k, &mut comps);
    let r = h_norm(&comps);
    (comps[0] - r, comps[0] + r)
}

/// `P_- = (I - Σ_j ĥ_j Σ_j) / 2` from Clifford components `h_1 … h_{2m+1}`.
pub fn projection_from_h(basis: &[CMatrix], h: &[f64]) -> Option<CMatrix> {
    let r = h.iter().map(|v| v * v).sum::<f64>().sqrt();
    if !(r > LOCAL_GAP_TOLERANCE) {
        return None;
    }
    let size = basis[0].nrows();
    let mut p = identity(size) * C64::new(0.5, 0.0);
    for (sigma, &hj) in basis.iter().zip(h) {
        p -= sigma * C64::new(0.5 * hj / r, 0.0);
    }
    Some(p)
}

/// Lower-band projection `P_-(k)`.
pub fn fermi_projection(symbol: &BlochSymbol, k: &[f64]) -> Result<CMatrix> {
    let mut comps = vec![0.0; symbol.components()];
    symbol.components_into(k, &mut comps);
    projection_from_h(symbol.clifford(), &comps[1..]).ok_or_else(|| Error::GapClosed {
        k: k.to_vec(),
        q: symbol.parameters().to_vec(),
        gap: h_norm(&comps),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapOptions {
    pub n_k: usize,
    pub mode: GridMode,
    pub tolerance: f64,
    /// Pattern-search refinement around the best grid point.
    pub refine: bool,
}

impl Default for GapOptions {
    fn default() -> Self {
        GapOptions { n_k: 128, mode: GridMode::Shifted, tolerance: GAP_TOLERANCE, refine: true }
    }
}

impl GapOptions {
    pub fn with_n_k(n_k: usize) -> Self {
        GapOptions { n_k, ..Default::default() }
    }

    fn validate(&self) -> Result<()> {
        if self.n_k < 8 {
            return Err(Error::invalid(format!("N_k must be at least 8, got {}", self.n_k)));
        }
        if !(self.tolerance >= 0.0) {
            return Err(Error::invalid("gap tolerance must be non-negative"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub min_distance: f64,
    pub argmin_k: Vec<f64>,
    /// Loop time of the minimum, for reports along loops.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub argmin_t: Option<f64>,
    pub gapped: bool,
    pub tolerance: f64,
}

/// Compass search with a `5^d` stencil: move to the best stencil point, and
/// halve the spacing whenever the centre is already best.
fn refine_minimum(symbol: &BlochSymbol, e_f: f64, start: Vec<f64>, spacing: f64) -> (f64, Vec<f64>) {
    let d = start.len();
    let mut comps = vec![0.0; symbol.components()];
    let mut eval = |k: &[f64]| {
        symbol.components_into(k, &mut comps);
        distance_from_components(&comps, e_f)
    };
    let mut center = start;
    let mut best = eval(&center);
    let mut h = spacing;
    let stencil = 5usize.pow(d as u32);
    let mut trial = vec![0.0; d];
    for _ in 0..400 {
        if h < 1e-13 || best == 0.0 {
            break;
        }
        let mut moved: Option<Vec<f64>> = None;
        for s in 0..stencil {
            let mut rest = s;
            for j in 0..d {
                trial[j] = center[j] + h * ((rest % 5) as f64 - 2.0);
                rest /= 5;
            }
            let v = eval(&trial);
            if v < best {
                best = v;
                moved = Some(trial.clone());
            }
        }
        match moved {
            Some(k) => center = k,
            None => h *= 0.5,
        }
    }
    (best, center.iter().map(|&k| wrap_k(k)).collect())
}

fn wrap_k(k: f64) -> f64 {
    (k + PI).rem_euclid(TAU) - PI
}

/// `min_k dist(E_F, {E_-(k), E_+(k)})` over the grid, optionally refined.
pub fn spectral_distance(symbol: &BlochSymbol, e_f: f64, opts: &GapOptions) -> Result<GapReport> {
    opts.validate()?;
    let grid = KGrid::new(opts.n_k, symbol.dimension(), opts.mode);
    Ok(distance_on_grid(symbol, &grid, e_f, opts))
}

fn distance_on_grid(symbol: &BlochSymbol, grid: &KGrid, e_f: f64, opts: &GapOptions) -> GapReport {
    let (mut dist, idx) = GridEvaluator::new(symbol, grid).min_distance(e_f);
    let mut k = grid.point(idx);
    if opts.refine && dist > 0.0 {
        let (refined, at) = refine_minimum(symbol, e_f, k.clone(), TAU / grid.n() as f64);
        if refined < dist {
            dist = refined;
            k = at;
        }
    }
    GapReport {
        min_distance: dist,
        argmin_k: k,
        argmin_t: None,
        gapped: dist > opts.tolerance,
        tolerance: opts.tolerance,
    }
}

/// Analytic gapless set of the uniaxial model at `E_F = 0` (`q_0 = 1`):
/// gapless iff `q3 = 0` and `||q1| - |q2|| ≤ 1 ≤ |q1| + |q2|`.
///
/// The `q_0 = 0` branch is not covered.
pub fn gapless_predicate_uniaxial(q: &[f64]) -> Result<bool> {
    let [q1, q2, q3] = uniaxial_coordinates(q)?;
    let (a, b) = (q1.abs(), q2.abs());
    Ok(q3 == 0.0 && (a - b).abs() <= 1.0 && 1.0 <= a + b)
}

/// Membership in the margin region `Q_{0,g}` whose points keep a spectral
/// distance of at least `g/2` from zero energy.
pub fn margin_predicate_uniaxial(q: &[f64], g: f64) -> Result<bool> {
    if !(g > 0.0) {
        return Err(Error::invalid(format!("margin g must be positive, got {g}")));
    }
    let [q1, q2, q3] = uniaxial_coordinates(q)?;
    let h = g / 2.0;
    Ok(q2 < q1 - 1.0 - h || q2 > q1 + 1.0 + h || q2 < -q1 + 1.0 - h || q3.abs() > h)
}

fn uniaxial_coordinates(q: &[f64]) -> Result<[f64; 3]> {
    match q {
        [a, b, c] if q.iter().all(|v| v.is_finite()) => Ok([*a, *b, *c]),
        _ => Err(Error::invalid(format!("expected a finite (q1, q2, q3), got {q:?}"))),
    }
}

/// Axis-aligned box in parameter space sampled at `resolution[i]` nodes per
/// axis (a single node sits at the lower bound).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub resolution: Vec<usize>,
}

impl Region {
    pub fn validate(&self, model: &HoppingModel) -> Result<()> {
        let n = model.parameters();
        if self.lower.len() != n || self.upper.len() != n || self.resolution.len() != n {
            return Err(Error::invalid(format!("region must have {n} coordinates per field")));
        }
        for i in 0..n {
            let (lo, hi) = (self.lower[i], self.upper[i]);
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(Error::invalid(format!("region axis {} has bad bounds [{lo}, {hi}]", i + 1)));
            }
            if self.resolution[i] == 0 {
                return Err(Error::invalid("region resolution must be positive"));
            }
            if let Some(bounds) = model.admissible_box() {
                let [a, b] = bounds[i];
                if lo < a || hi > b {
                    return Err(Error::invalid(format!(
                        "region axis {} leaves the admissible interval [{a}, {b}]",
                        i + 1
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.resolution.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Node with flat index `idx`, first axis slowest.
    pub fn point(&self, idx: usize) -> Vec<f64> {
        let n = self.resolution.len();
        let mut q = vec![0.0; n];
        let mut rest = idx;
        for i in (0..n).rev() {
            let r = self.resolution[i];
            let a = rest % r;
            rest /= r;
            q[i] = if r == 1 {
                self.lower[i]
            } else {
                self.lower[i] + (self.upper[i] - self.lower[i]) * a as f64 / (r - 1) as f64
            };
        }
        q
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapCell {
    pub q: Vec<f64>,
    pub report: GapReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapMap {
    pub region: Region,
    pub cells: Vec<GapCell>,
}

impl GapMap {
    pub fn gapless_count(&self) -> usize {
        self.cells.iter().filter(|c| !c.report.gapped).count()
    }

    /// CSV with header `q1,…,qN,min_distance,gapped`, row-major.
    pub fn to_csv(&self) -> String {
        let n = self.region.lower.len();
        let mut out = String::new();
        let header: Vec<String> = (1..=n).map(|i| format!("q{i}")).collect();
        writeln!(out, "{},min_distance,gapped", header.join(",")).expect("write to string");
        for cell in &self.cells {
            for v in &cell.q {
                write!(out, "{},", fmt_g17(*v)).expect("write to string");
            }
            writeln!(out, "{},{}", fmt_g17(cell.report.min_distance), cell.report.gapped)
                .expect("write to string");
        }
        out
    }
}

/// Seventeen significant digits, round-trip exact.
pub fn fmt_g17(v: f64) -> String {
    format!("{v:.16e}")
}

/// Spectral distance at every node of `region`.
pub fn gap_map(model: &HoppingModel, region: &Region, e_f: f64, opts: &GapOptions) -> Result<GapMap> {
    opts.validate()?;
    region.validate(model)?;
    let grid = KGrid::new(opts.n_k, model.dimension(), opts.mode);
    let cells = (0..region.len())
        .into_par_iter()
        .map(|idx| {
            let q = region.point(idx);
            let symbol = model.symbol(&q)?;
            let report = distance_on_grid(&symbol, &grid, e_f, opts);
            Ok(GapCell { q, report })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GapMap { region: region.clone(), cells })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandRanges {
    /// `[E_min, E_max]` per band, sorted by lower edge.
    pub bands: Vec<[f64; 2]>,
}

pub fn band_ranges(symbol: &BlochSymbol, n_k: usize, mode: GridMode) -> BandRanges {
    let grid = KGrid::new(n_k, symbol.dimension(), mode);
    let eval = GridEvaluator::new(symbol, &grid);
    let mut comps = vec![0.0; symbol.components()];
    let mut lower = [f64::INFINITY, f64::NEG_INFINITY];
    let mut upper = lower;
    for idx in 0..grid.len() {
        eval.components(idx, &mut comps);
        let r = h_norm(&comps);
        let (a, b) = (comps[0] - r, comps[0] + r);
        lower = [lower[0].min(a), lower[1].max(a)];
        upper = [upper[0].min(b), upper[1].max(b)];
    }
    BandRanges { bands: vec![lower, upper] }
}

/// Minimum of the spectral distance over the loop's sample times.
pub fn min_gap_along_loop(
    model: &HoppingModel,
    l: &Loop,
    e_f: f64,
    opts: &GapOptions,
) -> Result<GapReport> {
    opts.validate()?;
    let grid = KGrid::new(opts.n_k, model.dimension(), opts.mode);
    let times = l.sample_times();
    let reports = times
        .par_iter()
        .map(|&t| {
            let symbol = model.symbol(&l.eval(t))?;
            let mut r = distance_on_grid(&symbol, &grid, e_f, opts);
            r.argmin_t = Some(t);
            Ok(r)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(reports
        .into_iter()
        .reduce(|a, b| if b.min_distance < a.min_distance { b } else { a })
        .expect("loops have at least one sample"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{eigvalsh, max_abs, pauli};
    use crate::loops::generator_eta;
    use crate::model::{uniaxial_model, uniaxial_model_general};

    fn symbol(q: [f64; 3]) -> BlochSymbol {
        uniaxial_model().symbol(&q).unwrap()
    }

    /// `(q0, q1, q2, q3)` with a free `δ_0` amplitude.
    fn general(q: [f64; 4]) -> BlochSymbol {
        uniaxial_model_general().symbol(&q).unwrap()
    }

    #[test]
    fn grid_layouts() {
        let g = KGrid::aligned(6, 2);
        assert_eq!(g.len(), 36);
        assert!(g.axis(0).iter().any(|&k| (k - 2.0 * PI / 3.0).abs() < 1e-15));
        assert!(g.axis(1).iter().any(|&k| (k + 2.0 * PI / 3.0).abs() < 1e-15));
        assert_eq!(g.point(7), vec![g.axis(0)[1], g.axis(1)[1]]);
        let s = KGrid::shifted(8, 2);
        assert!((s.axis(0)[0] + PI - TAU * 0.5 / 8.0).abs() < 1e-15);
        assert!((s.axis(1)[0] + PI - TAU * 0.5 / 2f64.sqrt() / 8.0).abs() < 1e-15);
    }

    #[test]
    fn grid_evaluator_matches_direct_evaluation() {
        let s = symbol([0.7, 1.3, 0.2]);
        let grid = KGrid::shifted(9, 2);
        let eval = GridEvaluator::new(&s, &grid);
        let mut a = vec![0.0; 4];
        let mut b = vec![0.0; 4];
        for idx in 0..grid.len() {
            eval.components(idx, &mut a);
            s.components_into(&grid.point(idx), &mut b);
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn band_energy_examples() {
        let (lo, hi) = band_energies(&general([0.0, 0.0, 0.0, 1.0]), &[0.3, -2.0]);
        assert!((lo + 1.0).abs() < 1e-15 && (hi - 1.0).abs() < 1e-15);
        assert_eq!(band_energies(&symbol([1.0, 1.0, 0.0]), &[0.0, 0.0]), (-3.0, 3.0));
        let (lo, hi) = band_energies(&symbol([1.0, 1.0, 0.0]), &[2.0 * PI / 3.0, -2.0 * PI / 3.0]);
        assert!(lo.abs() < 1e-15 && hi.abs() < 1e-15);
    }

    #[test]
    fn band_energies_match_eigensolver() {
        let s = symbol([0.4, 1.6, -0.3]);
        for k in [[0.1, 0.2], [2.5, -1.0], [-3.0, 0.7]] {
            let (lo, hi) = band_energies(&s, &k);
            let ev = eigvalsh(&s.matrix(&k));
            assert!((ev[0] - lo).abs() < 1e-10 && (ev[1] - hi).abs() < 1e-10);
            assert_eq!(lo, -hi);
        }
    }

    #[test]
    fn projection_examples() {
        let basis = crate::model::clifford_basis(1).unwrap();
        let p = projection_from_h(&basis, &[0.0, 0.0, 1.0]).unwrap();
        let expected = CMatrix::from_row_slice(2, 2, &[C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(1.0, 0.0)]);
        assert!(max_abs(&(p - expected)) < 1e-15);
        let p = projection_from_h(&basis, &[1.0, 0.0, 0.0]).unwrap();
        let half = C64::new(0.5, 0.0);
        let expected = CMatrix::from_row_slice(2, 2, &[half, -half, -half, half]);
        assert!(max_abs(&(p - expected)) < 1e-15);

        let eps = 0.25;
        let s = symbol([1.0, 0.0, eps]);
        let p = fermi_projection(&s, &[-PI, 0.4]).unwrap();
        assert!(max_abs(&(p - (identity(2) - pauli(3)) * C64::new(0.5, 0.0))) < 1e-15);
    }

    #[test]
    fn projection_requires_local_gap() {
        let s = symbol([1.0, 1.0, 0.0]);
        let err = fermi_projection(&s, &[2.0 * PI / 3.0, -2.0 * PI / 3.0]).unwrap_err();
        assert!(matches!(err, Error::GapClosed { .. }));
    }

    #[test]
    fn spectral_distance_examples() {
        let opts = GapOptions::with_n_k(32);
        let r = spectral_distance(&general([1.0, 0.0, 0.0, 0.0]), 0.0, &opts).unwrap();
        assert!((r.min_distance - 1.0).abs() < 1e-12);
        let r = spectral_distance(&symbol([1.5, 0.25, 0.0]), 0.0, &opts).unwrap();
        assert!((r.min_distance - 0.25).abs() < 1e-9, "{}", r.min_distance);
        assert!(r.gapped);

        let aligned = GapOptions { n_k: 12, mode: GridMode::Aligned, refine: false, ..Default::default() };
        let r = spectral_distance(&symbol([1.0, 1.0, 0.0]), 0.0, &aligned).unwrap();
        assert!(r.min_distance < 1e-6);
        assert!(!r.gapped);
        assert!(spectral_distance(&symbol([1.0, 1.0, 0.0]), 0.0, &GapOptions::with_n_k(4)).is_err());
    }

    #[test]
    fn refinement_finds_off_grid_dirac_points() {
        let r = spectral_distance(&symbol([0.8, 0.9, 0.0]), 0.0, &GapOptions::with_n_k(16)).unwrap();
        assert!(r.min_distance < 1e-9, "{}", r.min_distance);
    }

    #[test]
    fn predicates() {
        assert!(gapless_predicate_uniaxial(&[1.0, 1.0, 0.0]).unwrap());
        assert!(!gapless_predicate_uniaxial(&[1.5, 0.25, 0.0]).unwrap());
        assert!(!gapless_predicate_uniaxial(&[1.0, 1.0, 0.2]).unwrap());
        assert!(gapless_predicate_uniaxial(&[1.0, 1.0]).is_err());

        assert!(margin_predicate_uniaxial(&[0.5, 2.0, 0.0], 0.2).unwrap());
        assert!(!margin_predicate_uniaxial(&[1.0, 1.0, 0.0], 0.2).unwrap());
        assert!(margin_predicate_uniaxial(&[1.0, 1.0, 0.2], 0.2).unwrap());
        assert!(margin_predicate_uniaxial(&[1.0, 1.0, 0.0], 0.0).is_err());
    }

    #[test]
    fn band_range_examples() {
        for q in [[1.0, 0.0, 0.0, 0.0], [0.0, 0.0, 0.0, 1.0]] {
            let r = band_ranges(&general(q), 16, GridMode::Shifted);
            for (band, e) in r.bands.iter().zip([-1.0, 1.0]) {
                assert!((band[0] - e).abs() < 1e-12 && (band[1] - e).abs() < 1e-12);
            }
        }
        let r = band_ranges(&symbol([1.0, 1.0, 0.0]), 12, GridMode::Aligned);
        assert!((r.bands[0][0] + 3.0).abs() < 1e-12 && r.bands[0][1].abs() < 1e-12);
        assert!(r.bands[1][0].abs() < 1e-12 && (r.bands[1][1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn gap_along_generator() {
        let model = uniaxial_model();
        let l = generator_eta(1, 0.5).unwrap().with_samples(16);
        let r = min_gap_along_loop(&model, &l, 0.0, &GapOptions::with_n_k(32)).unwrap();
        assert!((r.min_distance - 0.5).abs() < 1e-9, "{}", r.min_distance);
        assert!(r.argmin_t.is_some());
        let c = Loop::constant(vec![1.0, 0.0, 0.0, 0.0]).unwrap().with_samples(4);
        let r = min_gap_along_loop(&uniaxial_model_general(), &c, 0.0, &GapOptions::with_n_k(16))
            .unwrap();
        assert!((r.min_distance - 1.0).abs() < 1e-12);
        let through = Loop::polyline(vec![vec![0.8, 0.8, 0.0], vec![1.2, 1.2, 0.0]]).unwrap();
        let r = min_gap_along_loop(&model, &through, 0.0, &GapOptions::with_n_k(16)).unwrap();
        assert!(!r.gapped);
    }

    #[test]
    fn small_gap_map_csv() {
        let model = uniaxial_model();
        let region = Region { lower: vec![0.0, 0.0, 0.3], upper: vec![2.0, 2.0, 0.3], resolution: vec![3, 4, 1] };
        let map = gap_map(&model, &region, 0.0, &GapOptions::with_n_k(16)).unwrap();
        assert_eq!(map.cells.len(), 12);
        assert_eq!(map.gapless_count(), 0);
        assert_eq!(map.cells[1].q, vec![0.0, 2.0 / 3.0, 0.3]);
        let csv = map.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "q1,q2,q3,min_distance,gapped");
        assert_eq!(lines.len(), 13);
        let first: Vec<f64> = lines[1].split(',').take(4).map(|v| v.parse().unwrap()).collect();
        assert_eq!(first[..3], [0.0, 0.0, 0.3]);
        assert_eq!(first[3], map.cells[0].report.min_distance);

        let outside = Region { lower: vec![0.0, 0.0, 0.0], upper: vec![3.0, 2.0, 0.0], resolution: vec![2, 2, 1] };
        assert!(gap_map(&model, &outside, 0.0, &GapOptions::with_n_k(16)).is_err());
    }
}
