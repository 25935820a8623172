//! Finite periodic lattices, Anderson disorder and real-space polarization.
//!
//! Sites are indexed `cell · r + s` with the cell index running over
//! `x_1 · L_2 ⋯ L_d + … + x_d` (first direction slowest) and `s` the orbital.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{distance_to_spectrum, eigh, hermitian_norm, hermiticity_defect, identity, projection_below, CMatrix, C64};
use crate::loops::{sample_times, Loop};
use crate::model::HoppingModel;
use crate::polarization::{Method, PolarizationResult};
use crate::spectral::GAP_TOLERANCE;
use crate::topology::kato_intertwiner;

/// Residuals above this indicate a lattice too small for the loop.
pub const MAX_REALSPACE_RESIDUAL: f64 = 0.25;

/// A dense operator on `ℓ²(Z_{L_1} × ⋯ × Z_{L_d}) ⊗ C^r`.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteLatticeOperator {
    pub sizes: Vec<usize>,
    pub orbitals: usize,
    pub matrix: CMatrix,
}

impl FiniteLatticeOperator {
    pub fn zeros(sizes: &[usize], orbitals: usize) -> Self {
        let n = sizes.iter().product::<usize>() * orbitals;
        FiniteLatticeOperator { sizes: sizes.to_vec(), orbitals, matrix: CMatrix::zeros(n, n) }
    }

    pub fn cells(&self) -> usize {
        self.sizes.iter().product()
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Row of orbital `s` in the cell with coordinates `x`.
    pub fn index(&self, x: &[usize], s: usize) -> usize {
        cell_index(&self.sizes, x) * self.orbitals + s
    }

    /// Cell coordinates of a row.
    pub fn cell_of(&self, row: usize) -> Vec<usize> {
        cell_coordinates(&self.sizes, row / self.orbitals)
    }

    pub fn hermiticity_defect(&self) -> f64 {
        hermiticity_defect(&self.matrix)
    }

    fn same_lattice(&self, other: &FiniteLatticeOperator) -> Result<()> {
        if self.sizes != other.sizes || self.orbitals != other.orbitals {
            return Err(Error::invalid("operators live on different lattices"));
        }
        Ok(())
    }

    /// `self + λ other`.
    pub fn add_scaled(&self, other: &FiniteLatticeOperator, lambda: f64) -> Result<Self> {
        self.same_lattice(other)?;
        Ok(FiniteLatticeOperator {
            sizes: self.sizes.clone(),
            orbitals: self.orbitals,
            matrix: &self.matrix + &other.matrix * C64::new(lambda, 0.0),
        })
    }
}

fn cell_index(sizes: &[usize], x: &[usize]) -> usize {
    x.iter().zip(sizes).fold(0, |acc, (&xi, &li)| acc * li + xi % li)
}

fn cell_coordinates(sizes: &[usize], mut cell: usize) -> Vec<usize> {
    let mut x = vec![0; sizes.len()];
    for j in (0..sizes.len()).rev() {
        x[j] = cell % sizes[j];
        cell /= sizes[j];
    }
    x
}

/// `H = Σ_x Σ_n |x⟩⟨x - n| ⊗ M_n(q)` with periodic boundary conditions.
pub fn realspace_hamiltonian(model: &HoppingModel, q: &[f64], sizes: &[usize]) -> Result<FiniteLatticeOperator> {
    let d = model.dimension();
    if sizes.len() != d {
        return Err(Error::invalid(format!("expected {d} lattice sizes, got {}", sizes.len())));
    }
    if q.len() != model.parameters() {
        return Err(Error::invalid(format!("expected {} parameters, got {}", model.parameters(), q.len())));
    }
    let reach = 2 * model.max_hop().max(1) as usize;
    if let Some(&l) = sizes.iter().find(|&&l| l < reach) {
        return Err(Error::invalid(format!("L = {l} is below twice the hopping range ({reach})")));
    }
    let r = model.orbitals();
    let mut op = FiniteLatticeOperator::zeros(sizes, r);
    let hoppings = model.hoppings(q);
    for cell in 0..op.cells() {
        let x = cell_coordinates(sizes, cell);
        for (n, m) in &hoppings {
            let y: Vec<usize> = x
                .iter()
                .zip(n)
                .zip(sizes)
                .map(|((&xi, &ni), &li)| (xi as i64 - ni).rem_euclid(li as i64) as usize)
                .collect();
            let (row, col) = (cell * r, cell_index(sizes, &y) * r);
            for a in 0..r {
                for b in 0..r {
                    op.matrix[(row + a, col + b)] += m[(a, b)];
                }
            }
        }
    }
    Ok(op)
}

/// One draw of the Anderson disorder `ω_γ ∈ [0, 1)`, one value per cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisorderRealization {
    pub seed: u64,
    pub sizes: Vec<usize>,
    pub omega: Vec<f64>,
}

impl DisorderRealization {
    pub fn draw(sizes: &[usize], seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cells = sizes.iter().product();
        DisorderRealization { seed, sizes: sizes.to_vec(), omega: (0..cells).map(|_| rng.gen::<f64>()).collect() }
    }

    pub fn from_values(sizes: &[usize], omega: Vec<f64>) -> Result<Self> {
        if omega.len() != sizes.iter().product::<usize>() {
            return Err(Error::invalid("one disorder value per cell is required"));
        }
        if omega.iter().any(|w| !(0.0..=1.0).contains(w)) {
            return Err(Error::invalid("disorder values must lie in [0, 1]"));
        }
        Ok(DisorderRealization { seed: 0, sizes: sizes.to_vec(), omega })
    }

    /// `V_ω = Σ_γ ω_γ |γ⟩⟨γ| ⊗ id_r`.
    pub fn potential(&self, orbitals: usize) -> FiniteLatticeOperator {
        let mut op = FiniteLatticeOperator::zeros(&self.sizes, orbitals);
        for (cell, w) in self.omega.iter().enumerate() {
            for s in 0..orbitals {
                op.matrix[(cell * orbitals + s, cell * orbitals + s)] = C64::new(*w, 0.0);
            }
        }
        op
    }
}

/// Anderson potential for rank-`m` Clifford models (`2^m` orbitals per cell).
pub fn anderson_potential(sizes: &[usize], seed: u64, m: usize) -> FiniteLatticeOperator {
    DisorderRealization::draw(sizes, seed).potential(1 << m)
}

/// `Tr(A) / (L_1 ⋯ L_d)`.
pub fn trace_per_volume(a: &FiniteLatticeOperator) -> f64 {
    a.matrix.trace().re / a.cells() as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapPersistence {
    pub lambda: f64,
    /// `dist(E_F, σ(H_0))`.
    pub unperturbed: f64,
    /// `dist(E_F, σ(H_0 + λV))`.
    pub perturbed: f64,
    pub v_norm: f64,
    /// `dist(E_F, σ(H_0)) - λ‖V‖`.
    pub lower_bound: f64,
    pub bound_holds: bool,
    pub gapped: bool,
}

pub fn gap_persistence(
    h0: &FiniteLatticeOperator,
    v: &FiniteLatticeOperator,
    lambda: f64,
    e_f: f64,
) -> Result<GapPersistence> {
    if !(lambda >= 0.0) {
        return Err(Error::invalid("λ must be non-negative"));
    }
    let h = h0.add_scaled(v, lambda)?;
    let unperturbed = distance_to_spectrum(&eigh(&h0.matrix).values, e_f);
    let perturbed = distance_to_spectrum(&eigh(&h.matrix).values, e_f);
    let v_norm = hermitian_norm(&v.matrix);
    let lower_bound = unperturbed - lambda * v_norm;
    Ok(GapPersistence {
        lambda,
        unperturbed,
        perturbed,
        v_norm,
        lower_bound,
        bound_holds: perturbed >= lower_bound - 1e-12,
        gapped: perturbed > GAP_TOLERANCE,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HomotopyLink {
    pub from: f64,
    pub to: f64,
    /// `‖P_{λ_{i+1}} - P_{λ_i}‖`.
    pub jump: f64,
    /// `‖U P U† - P'‖_max`.
    pub conjugation_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HomotopyReport {
    pub lambda_max: f64,
    pub steps: usize,
    pub links: Vec<HomotopyLink>,
    /// `‖W P_0 W† - P_{λ_max}‖_max` for the product `W` of all intertwiners.
    pub overall_error: f64,
    pub min_gap: f64,
    /// First λ at which the spectrum reached `E_F`.
    pub closed_at: Option<f64>,
    pub success: bool,
    #[serde(skip)]
    pub intertwiner: Option<CMatrix>,
}

/// Chain of Kato intertwiners along `λ ↦ P_λ = χ(H_0 + λV < E_F)`.
///
/// Steps are doubled (up to four times) when two consecutive projections
/// are at distance ≥ 1.
pub fn projector_homotopy_check(
    h0: &FiniteLatticeOperator,
    v: &FiniteLatticeOperator,
    lambda_max: f64,
    steps: usize,
    e_f: f64,
) -> Result<HomotopyReport> {
    h0.same_lattice(v)?;
    if !(lambda_max >= 0.0) || steps == 0 {
        return Err(Error::invalid("need λ_max ≥ 0 and at least one step"));
    }
    let mut steps = steps;
    for _ in 0..=4 {
        match homotopy_chain(h0, v, lambda_max, steps, e_f)? {
            Some(report) => return Ok(report),
            None => steps *= 2,
        }
    }
    Err(Error::NotConnectable { distance: 1.0 })
}

fn homotopy_chain(
    h0: &FiniteLatticeOperator,
    v: &FiniteLatticeOperator,
    lambda_max: f64,
    steps: usize,
    e_f: f64,
) -> Result<Option<HomotopyReport>> {
    let n = h0.dim();
    let lambdas: Vec<f64> = (0..=steps).map(|i| lambda_max * i as f64 / steps as f64).collect();
    let mut projections = Vec::with_capacity(lambdas.len());
    let mut min_gap = f64::INFINITY;
    for &lambda in &lambdas {
        let eig = eigh(&h0.add_scaled(v, lambda)?.matrix);
        let gap = distance_to_spectrum(&eig.values, e_f);
        min_gap = min_gap.min(gap);
        if !(gap > GAP_TOLERANCE) {
            return Ok(Some(HomotopyReport {
                lambda_max,
                steps,
                links: Vec::new(),
                overall_error: f64::NAN,
                min_gap,
                closed_at: Some(lambda),
                success: false,
                intertwiner: None,
            }));
        }
        projections.push(projection_below(&eig, e_f));
    }
    let mut links = Vec::with_capacity(steps);
    let mut w = identity(n);
    for i in 0..steps {
        let (p, p_next) = (&projections[i], &projections[i + 1]);
        let u = match kato_intertwiner(p, p_next) {
            Ok(u) => u,
            Err(Error::NotConnectable { .. }) => return Ok(None),
            Err(e) => return Err(e),
        };
        let jump = hermitian_norm(&(p_next - p));
        let conjugation_error = max_abs(&(&u * p * u.adjoint() - p_next));
        links.push(HomotopyLink { from: lambdas[i], to: lambdas[i + 1], jump, conjugation_error });
        w = u * w;
    }
    let overall_error = max_abs(&(&w * &projections[0] * w.adjoint() - &projections[steps]));
    let success = overall_error < 1e-8 && links.iter().all(|l| l.conjugation_error < 1e-8);
    Ok(Some(HomotopyReport {
        lambda_max,
        steps,
        links,
        overall_error,
        min_gap,
        closed_at: None,
        success,
        intertwiner: Some(w),
    }))
}

fn max_abs(m: &CMatrix) -> f64 {
    crate::linalg::max_abs(m)
}

/// `(i[P, X_j])_{ab} = i P_{ab} (x_j(b) - x_j(a))` with the displacement
/// wrapped to the minimal image; displacements of exactly `L_j/2` get weight
/// zero so that the result stays Hermitian.
pub fn position_derivation(p: &CMatrix, sizes: &[usize], orbitals: usize, j: usize) -> CMatrix {
    let n = p.nrows();
    let l = sizes[j] as i64;
    let coord: Vec<i64> = (0..n).map(|row| cell_coordinates(sizes, row / orbitals)[j] as i64).collect();
    CMatrix::from_fn(n, n, |a, b| {
        let mut d = (coord[b] - coord[a]).rem_euclid(l);
        if 2 * d > l {
            d -= l;
        } else if 2 * d == l {
            d = 0;
        }
        p[(a, b)] * C64::new(0.0, d as f64)
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealspaceOptions {
    pub sizes: Vec<usize>,
    pub n_t: usize,
    pub lambda: f64,
    pub seed: u64,
}

/// Unchecked real-space polarization plus the smallest gap seen along the loop.
pub fn realspace_polarization_raw(
    model: &HoppingModel,
    l: &Loop,
    e_f: f64,
    opts: &RealspaceOptions,
) -> Result<(PolarizationResult, f64)> {
    if opts.n_t < 3 {
        return Err(Error::invalid("N_t must be at least 3"));
    }
    if !(opts.lambda >= 0.0) {
        return Err(Error::invalid("λ must be non-negative"));
    }
    let d = model.dimension();
    let r = model.orbitals();
    let v = DisorderRealization::draw(&opts.sizes, opts.seed).potential(r);
    let times = sample_times(opts.n_t);
    let dt = TAU / opts.n_t as f64;
    let projection = |t: f64| -> Result<(CMatrix, f64)> {
        let q = l.eval(t);
        let h = realspace_hamiltonian(model, &q, &opts.sizes)?.add_scaled(&v, opts.lambda)?;
        let eig = eigh(&h.matrix);
        let gap = distance_to_spectrum(&eig.values, e_f);
        if !(gap > GAP_TOLERANCE) {
            return Err(Error::GapClosed { k: vec![], q, gap });
        }
        Ok((projection_below(&eig, e_f), gap))
    };
    let projections: Vec<(CMatrix, f64)> = times.par_iter().map(|&t| projection(t)).collect::<Result<_>>()?;
    let min_gap = projections.iter().map(|(_, g)| *g).fold(f64::INFINITY, f64::min);
    let cells = opts.sizes.iter().product::<usize>() as f64;
    let n_t = opts.n_t;
    let per_t: Vec<Vec<f64>> = (0..n_t)
        .into_par_iter()
        .map(|i| {
            let p = &projections[i].0;
            let dtp = (&projections[(i + 1) % n_t].0 - &projections[(i + n_t - 1) % n_t].0) * C64::new(0.5 / dt, 0.0);
            let pa = p * &dtp;
            let ap = &dtp * p;
            (0..d)
                .map(|j| {
                    let grad = position_derivation(p, &opts.sizes, r, j);
                    // i tr(P [A, B]) = i tr(P A B) - i tr(A P B)
                    let value = crate::linalg::trace_of_product(&pa, &grad) - crate::linalg::trace_of_product(&ap, &grad);
                    -value.im / cells
                })
                .collect()
        })
        .collect();
    let mut delta_p = vec![0.0; d];
    for row in &per_t {
        for (s, v) in delta_p.iter_mut().zip(row) {
            *s += v * dt;
        }
    }
    let residual = delta_p.iter().map(|v| (v - v.round()).abs()).collect();
    Ok((
        PolarizationResult {
            method: Method::Riemann,
            delta_p,
            residual,
            n_k: opts.sizes[0],
            n_t: Some(n_t),
            steps: None,
            period: None,
            max_drift: None,
        },
        min_gap,
    ))
}

/// `ΔP_j = i Σ_t T(P(t) [∂_t P(t), i[P(t), X_j]]) Δt` on a periodic,
/// possibly disordered lattice.
pub fn realspace_polarization(model: &HoppingModel, l: &Loop, e_f: f64, opts: &RealspaceOptions) -> Result<PolarizationResult> {
    let (result, _) = realspace_polarization_raw(model, l, e_f, opts)?;
    if result.max_residual() > MAX_REALSPACE_RESIDUAL {
        return Err(Error::Resolution(format!(
            "real-space ΔP = {:?} is not near an integer; increase L",
            result.delta_p
        )));
    }
    Ok(result)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub lambda: f64,
    pub seed: u64,
    pub l: usize,
    pub delta_p: Vec<f64>,
    pub residual: f64,
    pub min_gap: f64,
    /// Set when the row could not be computed or does not snap to an integer.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
}

impl SweepRow {
    pub fn failed(&self) -> bool {
        self.failure.is_some()
    }
}

/// Real-space polarization for every `(λ, seed)` pair. Numerical failures
/// (a closed gap, a value too far from an integer) are recorded in the row
/// and the sweep continues.
pub fn disorder_sweep(
    model: &HoppingModel,
    l: &Loop,
    e_f: f64,
    lambdas: &[f64],
    seeds: &[u64],
    size: usize,
    n_t: usize,
) -> Result<Vec<SweepRow>> {
    let d = model.dimension();
    let sizes = vec![size; d];
    let clean_gap = clean_gap_along_loop(model, l, e_f, &sizes, n_t)?;
    let mut rows = Vec::with_capacity(lambdas.len() * seeds.len());
    for &lambda in lambdas {
        for &seed in seeds {
            let opts = RealspaceOptions { sizes: sizes.clone(), n_t, lambda, seed };
            let strength = lambda * DisorderRealization::draw(&sizes, seed).omega.iter().copied().fold(0.0, f64::max);
            let row = match realspace_polarization_raw(model, l, e_f, &opts) {
                Ok((r, min_gap)) => {
                    let residual = r.max_residual();
                    let failure = if residual > MAX_REALSPACE_RESIDUAL {
                        Some(format!("ΔP = {:?} is not near an integer", r.delta_p))
                    } else if strength >= clean_gap {
                        Some(format!("λ‖V‖ = {strength:.3e} reaches the clean gap {clean_gap:.3e}"))
                    } else {
                        None
                    };
                    SweepRow { lambda, seed, l: size, residual, delta_p: r.delta_p, min_gap, failure }
                }
                Err(Error::GapClosed { gap, .. }) => SweepRow {
                    lambda,
                    seed,
                    l: size,
                    delta_p: vec![f64::NAN; d],
                    residual: f64::NAN,
                    min_gap: gap,
                    failure: Some(format!("gap closed (distance {gap:.3e})")),
                },
                Err(e) => return Err(e),
            };
            rows.push(row);
        }
    }
    Ok(rows)
}

/// `min_t dist(E_F, σ(H_0(t)))` on the clean lattice.
pub fn clean_gap_along_loop(model: &HoppingModel, l: &Loop, e_f: f64, sizes: &[usize], n_t: usize) -> Result<f64> {
    let gaps: Vec<f64> = sample_times(n_t)
        .par_iter()
        .map(|&t| {
            let h = realspace_hamiltonian(model, &l.eval(t), sizes)?;
            Ok(distance_to_spectrum(&eigh(&h.matrix).values, e_f))
        })
        .collect::<Result<_>>()?;
    Ok(gaps.into_iter().fold(f64::INFINITY, f64::min))
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    use crate::spectral::fmt_g17;
    let mut out = String::from("lambda,seed,L,dP1,dP2,residual,min_gap\n");
    for r in rows {
        let dp = |j: usize| r.delta_p.get(j).map_or_else(String::new, |v| fmt_g17(*v));
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            fmt_g17(r.lambda),
            r.seed,
            r.l,
            dp(0),
            dp(1),
            fmt_g17(r.residual),
            fmt_g17(r.min_gap)
        ));
    }
    out
}
