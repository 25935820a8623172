//! Polarization transported by a loop of gapped symbols.
//!
//! Three estimators of `ΔP_j = i ∫ dt ∫ dk/(2π)^d tr(P [∂_t P, ∂_{k_j} P])`:
//!
//! * [`ksv_riemann`]: the integral as a Riemann sum on a `(k, t)` grid;
//! * [`ksv_quantized`]: lattice Chern numbers of every `(k_j, t)` slice;
//! * [`dynamical_polarization`]: the charge pumped by slow Liouville
//!   evolution over a finite period.

use std::f64::consts::TAU;

use nalgebra::Vector3;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{eigh, identity, CMatrix, C64, I};
use crate::loops::{sample_times, Loop};
use crate::model::{BlochSymbol, HoppingModel, LatticeGeometry};
use crate::spectral::{min_gap_along_loop, projection_from_h, GapOptions, KGrid, LOCAL_GAP_TOLERANCE};
use crate::topology::{check_fermi_level, chern_plaquette, occupied_frame, plane_axis, Embedding, ProjectorField};

/// Largest accepted `‖ρ² - ρ‖` during dynamical runs.
pub const DRIFT_TOLERANCE: f64 = 1e-6;
/// Minimum number of integrator steps per unit of physical period.
pub const STEPS_PER_UNIT_TIME: f64 = 50.0;
/// Residuals above this are treated as ties between two integers.
pub const TIE_THRESHOLD: f64 = 0.49;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Riemann,
    PerSlicePlaquette,
    Dynamical,
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "riemann" => Ok(Method::Riemann),
            "per-slice-plaquette" | "plaquette" | "quantized" => Ok(Method::PerSlicePlaquette),
            "dynamical" => Ok(Method::Dynamical),
            other => Err(Error::invalid(format!("unknown polarization method '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolarizationResult {
    pub method: Method,
    pub delta_p: Vec<f64>,
    /// `|ΔP_j - round(ΔP_j)|`.
    pub residual: Vec<f64>,
    pub n_k: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_t: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub period: Option<f64>,
    /// Largest `‖ρ² - ρ‖` seen by the integrator.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_drift: Option<f64>,
}

impl PolarizationResult {
    fn new(method: Method, delta_p: Vec<f64>, n_k: usize) -> Self {
        let residual = delta_p.iter().map(|v| (v - v.round()).abs()).collect();
        PolarizationResult { method, delta_p, residual, n_k, n_t: None, steps: None, period: None, max_drift: None }
    }

    pub fn max_residual(&self) -> f64 {
        self.residual.iter().copied().fold(0.0, f64::max)
    }

    /// The nearest integer vector; refuses near-ties.
    pub fn nearest_integers(&self) -> Result<Vec<i64>> {
        self.delta_p
            .iter()
            .zip(&self.residual)
            .enumerate()
            .map(|(j, (v, r))| {
                if *r > TIE_THRESHOLD {
                    Err(Error::AmbiguousInteger { component: j + 1, value: *v })
                } else {
                    Ok(v.round() as i64)
                }
            })
            .collect()
    }
}

fn check_gapped(model: &HoppingModel, l: &Loop, e_f: f64, n_k: usize) -> Result<()> {
    let embedding = Embedding::new(model, l)?;
    let gap = min_gap_along_loop(model, l, e_f, &GapOptions::with_n_k(n_k.max(8)))?;
    if !gap.gapped {
        return Err(Error::GapClosed {
            k: gap.argmin_k,
            q: l.eval(gap.argmin_t.unwrap_or(0.0)),
            gap: gap.min_distance,
        });
    }
    check_fermi_level(&embedding, e_f)
}

fn symbols_at(model: &HoppingModel, l: &Loop, times: &[f64]) -> Result<Vec<BlochSymbol>> {
    times.par_iter().map(|&t| model.symbol(&l.eval(t))).collect()
}

/// `P_-` and its analytic `k`-derivatives at one point.
fn projection_with_gradient(symbol: &BlochSymbol, k: &[f64], comps: &mut [f64], grad: &mut [f64]) -> Result<(CMatrix, Vec<CMatrix>)> {
    symbol.components_into(k, comps);
    let h = &comps[1..];
    let r = h.iter().map(|v| v * v).sum::<f64>().sqrt();
    if !(r > LOCAL_GAP_TOLERANCE) {
        return Err(Error::GapClosed { k: k.to_vec(), q: symbol.parameters().to_vec(), gap: r });
    }
    let basis = symbol.clifford();
    let p = projection_from_h(basis, h).expect("gapped");
    let unit: Vec<f64> = h.iter().map(|v| v / r).collect();
    let size = symbol.size();
    let dp = (0..symbol.dimension())
        .map(|dir| {
            symbol.gradient_into(k, dir, grad);
            let dh = &grad[1..];
            let radial: f64 = unit.iter().zip(dh).map(|(u, g)| u * g).sum();
            // ∂P = -½ Σ_a ∂ĥ_a Γ_a, ∂ĥ = (∂h - ĥ (ĥ·∂h)) / |h|
            let mut m = CMatrix::zeros(size, size);
            for ((sigma, u), g) in basis.iter().zip(&unit).zip(dh) {
                m -= sigma * C64::new(0.5 * (g - u * radial) / r, 0.0);
            }
            m
        })
        .collect();
    Ok((p, dp))
}

/// Riemann sum of the King-Smith–Vanderbilt integral on a shifted
/// `N_k^d × N_t` grid, with `∂_t` by central differences.
pub fn ksv_riemann(model: &HoppingModel, l: &Loop, e_f: f64, n_k: usize, n_t: usize) -> Result<PolarizationResult> {
    if n_k < 2 || n_t < 3 {
        return Err(Error::invalid("ksv_riemann needs N_k ≥ 2 and N_t ≥ 3"));
    }
    check_gapped(model, l, e_f, n_k)?;
    let d = model.dimension();
    let times = sample_times(n_t);
    let symbols = symbols_at(model, l, &times)?;
    let grid = KGrid::shifted(n_k, d);
    let dt = TAU / n_t as f64;
    let per_k = (0..grid.len())
        .into_par_iter()
        .map(|idx| {
            let k = grid.point(idx);
            let mut comps = vec![0.0; symbols[0].components()];
            let mut grad = comps.clone();
            let fields = symbols
                .iter()
                .map(|s| projection_with_gradient(s, &k, &mut comps, &mut grad))
                .collect::<Result<Vec<_>>>()?;
            let mut acc = vec![0.0; d];
            for i in 0..n_t {
                let (p, dp) = &fields[i];
                let next = &fields[(i + 1) % n_t].0;
                let prev = &fields[(i + n_t - 1) % n_t].0;
                let dtp = (next - prev) * C64::new(0.5 / dt, 0.0);
                for (j, dpj) in dp.iter().enumerate() {
                    let comm = &dtp * dpj - dpj * &dtp;
                    // i tr(P [∂_t P, ∂_j P]) is real
                    acc[j] -= (p * comm).trace().im;
                }
            }
            Ok(acc)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut delta_p = vec![0.0; d];
    for acc in &per_k {
        for (s, a) in delta_p.iter_mut().zip(acc) {
            *s += a;
        }
    }
    let scale = dt / grid.len() as f64;
    delta_p.iter_mut().for_each(|v| *v *= scale);
    let mut result = PolarizationResult::new(Method::Riemann, delta_p, n_k);
    result.n_t = Some(n_t);
    Ok(result)
}

/// `ΔP_j` as the lattice Chern number of the `(k_j, t)` torus, computed on
/// every slice of the remaining momenta, which must all agree.
pub fn ksv_quantized(model: &HoppingModel, l: &Loop, e_f: f64, n: usize) -> Result<PolarizationResult> {
    if n < 4 {
        return Err(Error::invalid("ksv_quantized needs N ≥ 4"));
    }
    check_gapped(model, l, e_f, n)?;
    let d = model.dimension();
    let k_axis = plane_axis(n, 0);
    let t_axis = plane_axis(n, 1);
    let symbols = symbols_at(model, l, &t_axis)?;
    let basis = model.clifford().to_vec();
    let slices = n.pow(d as u32 - 1);
    let mut delta_p = Vec::with_capacity(d);
    for j in 0..d {
        let values = (0..slices)
            .into_par_iter()
            .map(|slice| {
                let mut k = vec![0.0; d];
                let mut rest = slice;
                for i in (0..d).filter(|&i| i != j) {
                    k[i] = k_axis[rest % n];
                    rest /= n;
                }
                let mut comps = vec![0.0; symbols[0].components()];
                let mut frames = Vec::with_capacity(n * n);
                for &kj in &k_axis {
                    k[j] = kj;
                    for s in &symbols {
                        s.components_into(&k, &mut comps);
                        let r = comps[1..].iter().map(|v| v * v).sum::<f64>().sqrt();
                        if !(r > LOCAL_GAP_TOLERANCE) {
                            return Err(Error::GapClosed { k: k.clone(), q: s.parameters().to_vec(), gap: r });
                        }
                        frames.push(occupied_frame(&basis, &comps[1..]));
                    }
                }
                chern_plaquette(&ProjectorField { n1: n, n2: n, frames })
            })
            .collect::<Result<Vec<i64>>>()?;
        let first = values[0];
        if values.iter().any(|&v| v != first) {
            let mut distinct = values.clone();
            distinct.sort_unstable();
            distinct.dedup();
            return Err(Error::Resolution(format!(
                "slices of the (k{}, t) torus disagree: {distinct:?} at N = {n}",
                j + 1
            )));
        }
        delta_p.push(first as f64);
    }
    let mut result = PolarizationResult::new(Method::PerSlicePlaquette, delta_p, n);
    result.n_t = Some(n);
    Ok(result)
}

/// Integrator settings for [`dynamical_polarization`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DynamicalOptions {
    /// Physical period `T` of one traversal of the loop.
    pub period: f64,
    pub n_k: usize,
    /// Number of steps; defaults to `⌈50 T⌉`.
    pub steps: Option<usize>,
}

impl DynamicalOptions {
    pub fn new(period: f64, n_k: usize) -> Self {
        DynamicalOptions { period, n_k, steps: None }
    }

    pub fn resolved_steps(&self) -> Result<usize> {
        if !(self.period > 0.0 && self.period.is_finite()) {
            return Err(Error::invalid(format!("period must be positive, got {}", self.period)));
        }
        if self.n_k < 2 {
            return Err(Error::invalid("N_k must be at least 2"));
        }
        let minimum = (STEPS_PER_UNIT_TIME * self.period).ceil().max(1.0) as usize;
        match self.steps {
            None => Ok(minimum),
            Some(s) if s >= minimum => Ok(s),
            Some(s) => Err(Error::invalid(format!(
                "{s} steps do not resolve a period of {}; at least {minimum} are required",
                self.period
            ))),
        }
    }
}

const GAUSS_OFFSET: f64 = 0.288_675_134_594_812_9; // √3 / 6
const COMMUTATOR_WEIGHT: f64 = 0.144_337_567_297_406_43; // √3 / 12

/// Charge transported in one period of slow driving:
/// `ΔP_j = ∫_0^T ds ∫ dk/(2π)^d tr(ρ_k(s) ∂_{k_j} H(k, s))`, with
/// `i ∂_s ρ = [H, ρ]` and `ρ_k(0) = P_-(k, 0)`.
///
/// Each `ρ_k` is propagated by the fourth-order Magnus integrator
/// `U = exp(-i h (H_1 + H_2)/2 - (√3/12) h² [H_2, H_1])` at the Gauss
/// points; the current is integrated by the trapezoidal rule.
pub fn dynamical_polarization(
    model: &HoppingModel,
    l: &Loop,
    e_f: f64,
    opts: &DynamicalOptions,
) -> Result<PolarizationResult> {
    let steps = opts.resolved_steps()?;
    check_gapped(model, l, e_f, opts.n_k)?;
    let d = model.dimension();
    let h = opts.period / steps as f64;
    let to_loop = TAU / opts.period;
    let mut times = Vec::with_capacity(3 * steps + 1);
    for n in 0..steps {
        let s = n as f64 * h;
        times.push(s * to_loop);
        times.push((s + (0.5 - GAUSS_OFFSET) * h) * to_loop);
        times.push((s + (0.5 + GAUSS_OFFSET) * h) * to_loop);
    }
    times.push(opts.period * to_loop);
    let symbols = symbols_at(model, l, &times)?;
    let grid = KGrid::shifted(opts.n_k, d);
    let propagate = if model.rank() == 1 { propagate_two_band } else { propagate_generic };
    let per_k = (0..grid.len())
        .into_par_iter()
        .map(|idx| propagate(&symbols, &grid.point(idx), h))
        .collect::<Result<Vec<_>>>()?;
    let mut delta_p = vec![0.0; d];
    let mut drift: f64 = 0.0;
    for (acc, dr) in &per_k {
        for (s, a) in delta_p.iter_mut().zip(acc) {
            *s += a;
        }
        drift = drift.max(*dr);
    }
    if drift > DRIFT_TOLERANCE {
        return Err(Error::StepSize { drift });
    }
    delta_p.iter_mut().for_each(|v| *v /= grid.len() as f64);
    let mut result = PolarizationResult::new(Method::Dynamical, delta_p, opts.n_k);
    result.steps = Some(steps);
    result.period = Some(opts.period);
    result.max_drift = Some(drift);
    Ok(result)
}

type Propagation = Result<(Vec<f64>, f64)>;

fn gapped_components(symbol: &BlochSymbol, k: &[f64], comps: &mut [f64]) -> Result<()> {
    symbol.components_into(k, comps);
    let r = comps[1..].iter().map(|v| v * v).sum::<f64>().sqrt();
    if !(r > LOCAL_GAP_TOLERANCE) {
        return Err(Error::GapClosed { k: k.to_vec(), q: symbol.parameters().to_vec(), gap: r });
    }
    Ok(())
}

/// Two-band propagation on the Bloch vector `s` of `ρ = (I + s·σ)/2`, on
/// which `U ρ U†` acts as a rotation. `‖ρ² - ρ‖ = ||s|² - 1| / 4`.
fn propagate_two_band(symbols: &[BlochSymbol], k: &[f64], h: f64) -> Propagation {
    let d = k.len();
    let steps = (symbols.len() - 1) / 3;
    let mut comps = [0.0; 4];
    let mut grad = [0.0; 4];
    gapped_components(&symbols[0], k, &mut comps)?;
    let r = (comps[1] * comps[1] + comps[2] * comps[2] + comps[3] * comps[3]).sqrt();
    let mut s = -Vector3::new(comps[1], comps[2], comps[3]) / r;
    let mut acc = vec![0.0; d];
    let mut drift: f64 = 0.0;
    let current = |symbol: &BlochSymbol, s: &Vector3<f64>, acc: &mut [f64], weight: f64, grad: &mut [f64; 4]| {
        for (j, a) in acc.iter_mut().enumerate() {
            symbol.gradient_into(k, j, grad);
            *a += weight * (grad[0] + s.x * grad[1] + s.y * grad[2] + s.z * grad[3]);
        }
    };
    current(&symbols[0], &s, &mut acc, 0.5 * h, &mut grad);
    for n in 0..steps {
        gapped_components(&symbols[3 * n + 1], k, &mut comps)?;
        let b1 = Vector3::new(comps[1], comps[2], comps[3]);
        gapped_components(&symbols[3 * n + 2], k, &mut comps)?;
        let b2 = Vector3::new(comps[1], comps[2], comps[3]);
        // K = κ_0 + κ·σ; [b2·σ, b1·σ] = 2i (b2 × b1)·σ
        let kappa = (b1 + b2) * (0.5 * h) + b2.cross(&b1) * (2.0 * COMMUTATOR_WEIGHT * h * h);
        let angle = 2.0 * kappa.norm();
        if angle > 0.0 {
            let axis = kappa / kappa.norm();
            let (sin, cos) = angle.sin_cos();
            s = s * cos + axis.cross(&s) * sin + axis * (axis.dot(&s) * (1.0 - cos));
        }
        drift = drift.max((s.norm_squared() - 1.0).abs() / 4.0);
        let weight = if n + 1 == steps { 0.5 * h } else { h };
        current(&symbols[3 * n + 3], &s, &mut acc, weight, &mut grad);
    }
    Ok((acc, drift))
}

/// Dense propagation `ρ = U P U†` for any number of orbitals.
fn propagate_generic(symbols: &[BlochSymbol], k: &[f64], h: f64) -> Propagation {
    let d = k.len();
    let steps = (symbols.len() - 1) / 3;
    let size = symbols[0].size();
    let mut comps = vec![0.0; symbols[0].components()];
    gapped_components(&symbols[0], k, &mut comps)?;
    let p0 = projection_from_h(symbols[0].clifford(), &comps[1..]).expect("gapped");
    let mut u = identity(size);
    let mut acc = vec![0.0; d];
    let mut drift: f64 = 0.0;
    let current = |symbol: &BlochSymbol, rho: &CMatrix, acc: &mut [f64], weight: f64| {
        for (j, dh) in symbol.k_gradient(k).iter().enumerate() {
            acc[j] += weight * (rho * dh).trace().re;
        }
    };
    current(&symbols[0], &p0, &mut acc, 0.5 * h);
    for n in 0..steps {
        gapped_components(&symbols[3 * n + 1], k, &mut comps)?;
        let h1 = symbols[3 * n + 1].assemble(&comps);
        gapped_components(&symbols[3 * n + 2], k, &mut comps)?;
        let h2 = symbols[3 * n + 2].assemble(&comps);
        let comm = &h2 * &h1 - &h1 * &h2;
        let generator = (&h1 + &h2) * C64::new(0.5 * h, 0.0) - comm * (I * COMMUTATOR_WEIGHT * h * h);
        let eig = eigh(&generator);
        let phases = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            size,
            eig.values.iter().map(|&v| C64::from_polar(1.0, -v)),
        ));
        u = &eig.vectors * phases * eig.vectors.adjoint() * u;
        let rho = &u * &p0 * u.adjoint();
        let defect = &rho * &rho - &rho;
        drift = drift.max(defect.iter().map(|z| z.norm()).fold(0.0, f64::max));
        let weight = if n + 1 == steps { 0.5 * h } else { h };
        current(&symbols[3 * n + 3], &rho, &mut acc, weight);
    }
    Ok((acc, drift))
}

/// `e/|V| Σ_j ΔP_j γ_j`, in units of charge per length^{d-1}.
pub fn physical_polarization(delta_p: &[i64], geometry: &LatticeGeometry, charge: f64) -> Result<Vec<f64>> {
    let d = geometry.dimension();
    if delta_p.len() != d {
        return Err(Error::invalid(format!("ΔP has {} components, the lattice {d}", delta_p.len())));
    }
    let scale = charge / geometry.cell_volume();
    let mut out = vec![0.0; d];
    for (gamma, &p) in geometry.basis.iter().zip(delta_p) {
        for (o, g) in out.iter_mut().zip(gamma) {
            *o += scale * p as f64 * g;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::loops::{generator_eta, repeat, reverse};
    use crate::model::uniaxial_model;

    #[test]
    fn riemann_generators() {
        let model = uniaxial_model();
        let e1 = generator_eta(1, 0.5).unwrap();
        let r = ksv_riemann(&model, &e1, 0.0, 48, 48).unwrap();
        assert!((r.delta_p[0] - 1.0).abs() < 1e-2 && r.delta_p[1].abs() < 1e-2, "{:?}", r.delta_p);
        assert_eq!(r.nearest_integers().unwrap(), vec![1, 0]);
        let e2 = generator_eta(2, 0.5).unwrap();
        let r = ksv_riemann(&model, &e2, 0.0, 48, 48).unwrap();
        assert_eq!(r.nearest_integers().unwrap(), vec![0, 1]);
    }

    #[test]
    fn riemann_constant_loop_is_exactly_zero() {
        let model = uniaxial_model();
        let c = Loop::constant(vec![0.4, 0.3, 0.2]).unwrap();
        let r = ksv_riemann(&model, &c, 0.0, 16, 8).unwrap();
        assert_eq!(r.delta_p, vec![0.0, 0.0]);
    }

    #[test]
    fn quantized_generators() {
        let model = uniaxial_model();
        let e1 = generator_eta(1, 0.5).unwrap();
        let e2 = generator_eta(2, 0.5).unwrap();
        assert_eq!(ksv_quantized(&model, &e1, 0.0, 32).unwrap().delta_p, vec![1.0, 0.0]);
        assert_eq!(ksv_quantized(&model, &repeat(&e1, 2).unwrap(), 0.0, 32).unwrap().delta_p, vec![2.0, 0.0]);
        let r = ksv_quantized(&model, &reverse(&e2), 0.0, 32).unwrap();
        assert_eq!(r.delta_p, vec![0.0, -1.0]);
        assert_eq!(r.residual, vec![0.0, 0.0]);
    }

    #[test]
    fn dynamical_constant_loop_is_stationary() {
        let model = uniaxial_model();
        let c = Loop::constant(vec![0.4, 0.3, 0.2]).unwrap();
        let r = dynamical_polarization(&model, &c, 0.0, &DynamicalOptions::new(3.0, 24)).unwrap();
        assert!(r.delta_p.iter().all(|v| v.abs() < 1e-10), "{:?}", r.delta_p);
        assert!(r.max_drift.unwrap() < 1e-12);
    }

    #[test]
    fn dynamical_pumps_one_charge() {
        let model = uniaxial_model();
        let e1 = generator_eta(1, 0.5).unwrap();
        let r = dynamical_polarization(&model, &e1, 0.0, &DynamicalOptions::new(40.0, 12)).unwrap();
        assert!((r.delta_p[0] - 1.0).abs() < 0.1 && r.delta_p[1].abs() < 0.1, "{:?}", r.delta_p);
    }

    #[test]
    fn generic_propagation_matches_two_band() {
        let model = uniaxial_model();
        let e1 = generator_eta(1, 0.5).unwrap();
        let steps = 400;
        let h = 4.0 / steps as f64;
        let mut times = Vec::new();
        for n in 0..steps {
            let s = n as f64 * h;
            times.push(s * TAU / 4.0);
            times.push((s + (0.5 - GAUSS_OFFSET) * h) * TAU / 4.0);
            times.push((s + (0.5 + GAUSS_OFFSET) * h) * TAU / 4.0);
        }
        times.push(TAU);
        let symbols = symbols_at(&model, &e1, &times).unwrap();
        let k = [2.5, -0.7];
        let (a, da) = propagate_two_band(&symbols, &k, h).unwrap();
        let (b, db) = propagate_generic(&symbols, &k, h).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-10, "{a:?} vs {b:?}");
        }
        assert!(da < 1e-12 && db < 1e-10);
    }

    #[test]
    fn step_count_floor() {
        let opts = DynamicalOptions { period: 10.0, n_k: 4, steps: Some(100) };
        assert!(opts.resolved_steps().is_err());
        assert_eq!(DynamicalOptions::new(10.0, 4).resolved_steps().unwrap(), 500);
        assert!(DynamicalOptions::new(0.0, 4).resolved_steps().is_err());
    }

    #[test]
    fn physical_units() {
        let g = LatticeGeometry::honeycomb(1.0);
        let v = 1.5 * 3f64.sqrt();
        let p = physical_polarization(&[1, 0], &g, 1.0).unwrap();
        assert!((p[0] - 1.5 / v).abs() < 1e-14 && (p[1] - 0.5 * 3f64.sqrt() / v).abs() < 1e-14);
        assert_eq!(physical_polarization(&[0, 0], &g, 1.0).unwrap(), vec![0.0, 0.0]);
        let p = physical_polarization(&[1, 1], &g, 1.0).unwrap();
        assert!((p[0] - 3.0 / v).abs() < 1e-14 && p[1].abs() < 1e-14);
    }

    #[test]
    fn ties_are_refused() {
        let r = PolarizationResult::new(Method::Riemann, vec![0.5, 1.0], 8);
        assert!(matches!(r.nearest_integers(), Err(Error::AmbiguousInteger { component: 1, .. })));
        let r = PolarizationResult::new(Method::Riemann, vec![0.98, -1.02], 8);
        assert_eq!(r.nearest_integers().unwrap(), vec![1, -1]);
    }
}
