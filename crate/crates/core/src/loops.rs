//! Closed loops `η: [0, 2π) → Q` in parameter space.
//!
//! Loops are immutable trees built from primitive curves (generators,
//! Fourier series, polylines) and the group operations reverse, repeat and
//! lasso concatenation. Every loop is evaluated on `[0, 2π)`; the physical
//! period only enters the dynamical solver.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ParameterPoint;

pub const DEFAULT_SAMPLES: usize = 256;
const CLOSURE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Smoothness {
    Continuous,
    PiecewiseC1,
    C1,
    Smooth,
}

/// Per-coordinate trigonometric polynomial
/// `x_i(t) = c_i + Σ_m (a_{i,m} cos(m t) + b_{i,m} sin(m t))`, `m = 1, 2, …`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourierSeries {
    pub constant: Vec<f64>,
    pub cos: Vec<Vec<f64>>,
    pub sin: Vec<Vec<f64>>,
}

impl FourierSeries {
    fn validate(&self) -> Result<()> {
        let n = self.constant.len();
        if n == 0 || self.cos.len() != n || self.sin.len() != n {
            return Err(Error::invalid(
                "Fourier loop needs matching constant/cos/sin lists per coordinate",
            ));
        }
        Ok(())
    }

    fn eval(&self, t: f64) -> Vec<f64> {
        (0..self.constant.len())
            .map(|i| {
                let mut x = self.constant[i];
                for (m, a) in self.cos[i].iter().enumerate() {
                    x += a * ((m + 1) as f64 * t).cos();
                }
                for (m, b) in self.sin[i].iter().enumerate() {
                    x += b * ((m + 1) as f64 * t).sin();
                }
                x
            })
            .collect()
    }

    fn derivative(&self, t: f64) -> Vec<f64> {
        (0..self.constant.len())
            .map(|i| {
                let mut x = 0.0;
                for (m, a) in self.cos[i].iter().enumerate() {
                    let w = (m + 1) as f64;
                    x -= a * w * (w * t).sin();
                }
                for (m, b) in self.sin[i].iter().enumerate() {
                    let w = (m + 1) as f64;
                    x += b * w * (w * t).cos();
                }
                x
            })
            .collect()
    }
}

/// An open polygonal path, parametrized on `[0, 1]` with equal time per
/// segment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Path {
    pub points: Vec<Vec<f64>>,
}

impl Path {
    pub fn new(points: Vec<Vec<f64>>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::invalid("path needs at least one point"));
        }
        let n = points[0].len();
        if points.iter().any(|p| p.len() != n || p.iter().any(|v| !v.is_finite())) {
            return Err(Error::invalid("path points must be finite and of equal length"));
        }
        Ok(Path { points })
    }

    pub fn segment(from: &[f64], to: &[f64]) -> Self {
        Path { points: vec![from.to_vec(), to.to_vec()] }
    }

    pub fn start(&self) -> &[f64] {
        &self.points[0]
    }

    pub fn end(&self) -> &[f64] {
        self.points.last().expect("non-empty")
    }

    pub fn length(&self) -> f64 {
        self.points.windows(2).map(|w| distance(&w[0], &w[1])).sum()
    }

    pub fn eval(&self, s: f64) -> Vec<f64> {
        let segs = self.points.len() - 1;
        if segs == 0 {
            return self.points[0].clone();
        }
        let x = s.clamp(0.0, 1.0) * segs as f64;
        let i = (x.floor() as usize).min(segs - 1);
        let f = x - i as f64;
        lerp(&self.points[i], &self.points[i + 1], f)
    }

    fn derivative(&self, s: f64) -> Vec<f64> {
        let segs = self.points.len() - 1;
        if segs == 0 {
            return vec![0.0; self.points[0].len()];
        }
        let x = s.clamp(0.0, 1.0) * segs as f64;
        let i = (x.floor() as usize).min(segs - 1);
        self.points[i + 1]
            .iter()
            .zip(&self.points[i])
            .map(|(b, a)| (b - a) * segs as f64)
            .collect()
    }
}

fn lerp(a: &[f64], b: &[f64], f: f64) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + f * (y - x)).collect()
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// Document form of a loop; also what reports echo back.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum LoopSpec {
    Eta1 { eps: f64 },
    Eta2 { eps: f64 },
    Constant { point: Vec<f64> },
    Fourier(FourierSeries),
    /// Closed polygon through the listed vertices.
    Polyline { points: Vec<Vec<f64>> },
    Reverse { of: Box<LoopSpec> },
    Repeat { of: Box<LoopSpec>, n: u32 },
    /// `a · (connector · b · connector⁻¹)`. An omitted connector means a
    /// straight segment from `a(0)` to `b(0)`.
    Concat {
        a: Box<LoopSpec>,
        b: Box<LoopSpec>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        connector: Option<Vec<Vec<f64>>>,
    },
    Perturb { of: Box<LoopSpec>, amplitude: f64, modes: usize, seed: u64 },
}

impl LoopSpec {
    pub fn build(&self) -> Result<Loop> {
        match self {
            LoopSpec::Eta1 { eps } => generator_eta(1, *eps),
            LoopSpec::Eta2 { eps } => generator_eta(2, *eps),
            LoopSpec::Constant { point } => Loop::constant(point.clone()),
            LoopSpec::Fourier(series) => Loop::fourier(series.clone()),
            LoopSpec::Polyline { points } => Loop::polyline(points.clone()),
            LoopSpec::Reverse { of } => Ok(reverse(&of.build()?)),
            LoopSpec::Repeat { of, n } => repeat(&of.build()?, *n),
            LoopSpec::Concat { a, b, connector } => {
                let a = a.build()?;
                let b = b.build()?;
                let path = match connector {
                    Some(points) => Path::new(points.clone())?,
                    None => Path::segment(&a.eval(0.0), &b.eval(0.0)),
                };
                concat_with_path(&a, &b, &path)
            }
            LoopSpec::Perturb { of, amplitude, modes, seed } => {
                perturb(&of.build()?, *amplitude, *modes, *seed)
            }
        }
    }
}

#[derive(Debug, Clone)]
enum Kind {
    Constant(Vec<f64>),
    Generator { index: u8, eps: f64 },
    Fourier(FourierSeries),
    Polyline(Vec<Vec<f64>>),
    Reverse(Box<Loop>),
    Repeat(Box<Loop>, u32),
    Lasso { a: Box<Loop>, b: Box<Loop>, connector: Option<Path> },
    Perturbed { base: Box<Loop>, shift: FourierSeries, amplitude: f64, modes: usize, seed: u64 },
}

/// A closed curve in parameter space.
#[derive(Debug, Clone)]
pub struct Loop {
    kind: Kind,
    smoothness: Smoothness,
    samples: usize,
}

/// Reduces `t` to `[0, 2π)`.
fn wrap(t: f64) -> f64 {
    let r = t.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

impl Loop {
    fn from_kind(kind: Kind, smoothness: Smoothness) -> Result<Self> {
        let l = Loop { kind, smoothness, samples: DEFAULT_SAMPLES };
        let gap = l.closure_gap();
        if !(gap < CLOSURE_TOLERANCE) {
            return Err(Error::invalid(format!("loop is not closed (endpoint gap {gap:.3e})")));
        }
        Ok(l)
    }

    pub fn constant(point: impl Into<Vec<f64>>) -> Result<Self> {
        let point = point.into();
        if point.is_empty() || point.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("constant loop needs a finite point"));
        }
        Loop::from_kind(Kind::Constant(point), Smoothness::Smooth)
    }

    pub fn fourier(series: FourierSeries) -> Result<Self> {
        series.validate()?;
        Loop::from_kind(Kind::Fourier(series), Smoothness::Smooth)
    }

    /// Closed polygon visiting `points` in order and returning to the first.
    pub fn polyline(points: Vec<Vec<f64>>) -> Result<Self> {
        let path = Path::new(points)?;
        Loop::from_kind(Kind::Polyline(path.points), Smoothness::PiecewiseC1)
    }

    pub fn smoothness(&self) -> Smoothness {
        self.smoothness
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    pub fn with_samples(mut self, samples: usize) -> Self {
        self.samples = samples.max(1);
        self
    }

    /// Number of parameter coordinates.
    pub fn dimension(&self) -> usize {
        self.eval(0.0).len()
    }

    /// Uniform sample times `2π i / N`.
    pub fn sample_times(&self) -> Vec<f64> {
        sample_times(self.samples)
    }

    pub fn sample_points(&self) -> Vec<ParameterPoint> {
        self.sample_times().into_iter().map(|t| self.point(t)).collect()
    }

    pub fn point(&self, t: f64) -> ParameterPoint {
        ParameterPoint(self.eval(t))
    }

    pub fn closure_gap(&self) -> f64 {
        distance(&self.eval(0.0), &self.eval(TAU * (1.0 - 1e-13)))
    }

    /// `η(t)`; `t` is taken modulo `2π`.
    pub fn eval(&self, t: f64) -> Vec<f64> {
        let t = wrap(t);
        match &self.kind {
            Kind::Constant(p) => p.clone(),
            Kind::Generator { index, eps } => {
                let r = 1.0 + eps * t.cos();
                let s = -eps * t.sin();
                if *index == 1 {
                    vec![r, 0.0, s]
                } else {
                    vec![0.0, r, s]
                }
            }
            Kind::Fourier(series) => series.eval(t),
            Kind::Polyline(points) => {
                let n = points.len();
                let x = t / TAU * n as f64;
                let i = (x.floor() as usize).min(n - 1);
                lerp(&points[i], &points[(i + 1) % n], x - i as f64)
            }
            Kind::Reverse(inner) => inner.eval(TAU - t),
            Kind::Repeat(inner, n) => inner.eval(*n as f64 * t),
            Kind::Lasso { a, b, connector } => match connector {
                None => {
                    if t < TAU / 2.0 {
                        a.eval(2.0 * t)
                    } else {
                        b.eval(2.0 * t - TAU)
                    }
                }
                Some(path) => {
                    let quarter = TAU / 4.0;
                    let s = (t / quarter).fract();
                    match (t / quarter) as usize {
                        0 => a.eval(s * TAU),
                        1 => path.eval(s),
                        2 => b.eval(s * TAU),
                        _ => path.eval(1.0 - s),
                    }
                }
            },
            Kind::Perturbed { base, shift, .. } => {
                let mut x = base.eval(t);
                for (xi, di) in x.iter_mut().zip(shift.eval(t)) {
                    *xi += di;
                }
                x
            }
        }
    }

    /// Analytic `dη/dt`; one-sided (from the right) at seams.
    pub fn derivative(&self, t: f64) -> Vec<f64> {
        let t = wrap(t);
        match &self.kind {
            Kind::Constant(p) => vec![0.0; p.len()],
            Kind::Generator { index, eps } => {
                let dr = -eps * t.sin();
                let ds = -eps * t.cos();
                if *index == 1 {
                    vec![dr, 0.0, ds]
                } else {
                    vec![0.0, dr, ds]
                }
            }
            Kind::Fourier(series) => series.derivative(t),
            Kind::Polyline(points) => {
                let n = points.len();
                let x = t / TAU * n as f64;
                let i = (x.floor() as usize).min(n - 1);
                let scale = n as f64 / TAU;
                points[(i + 1) % n]
                    .iter()
                    .zip(&points[i])
                    .map(|(b, a)| (b - a) * scale)
                    .collect()
            }
            Kind::Reverse(inner) => inner.derivative(TAU - t).into_iter().map(|v| -v).collect(),
            Kind::Repeat(inner, n) => {
                let f = *n as f64;
                inner.derivative(f * t).into_iter().map(|v| f * v).collect()
            }
            Kind::Lasso { a, b, connector } => match connector {
                None => {
                    let inner = if t < TAU / 2.0 {
                        a.derivative(2.0 * t)
                    } else {
                        b.derivative(2.0 * t - TAU)
                    };
                    inner.into_iter().map(|v| 2.0 * v).collect()
                }
                Some(path) => {
                    let quarter = TAU / 4.0;
                    let s = (t / quarter).fract();
                    let (v, scale) = match (t / quarter) as usize {
                        0 => (a.derivative(s * TAU), 4.0),
                        1 => (path.derivative(s), 1.0 / quarter),
                        2 => (b.derivative(s * TAU), 4.0),
                        _ => (path.derivative(1.0 - s), -1.0 / quarter),
                    };
                    v.into_iter().map(|x| x * scale).collect()
                }
            },
            Kind::Perturbed { base, shift, .. } => base
                .derivative(t)
                .into_iter()
                .zip(shift.derivative(t))
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    /// The document that rebuilds this loop.
    pub fn spec(&self) -> LoopSpec {
        match &self.kind {
            Kind::Constant(p) => LoopSpec::Constant { point: p.clone() },
            Kind::Generator { index: 1, eps } => LoopSpec::Eta1 { eps: *eps },
            Kind::Generator { eps, .. } => LoopSpec::Eta2 { eps: *eps },
            Kind::Fourier(series) => LoopSpec::Fourier(series.clone()),
            Kind::Polyline(points) => LoopSpec::Polyline { points: points.clone() },
            Kind::Reverse(inner) => LoopSpec::Reverse { of: Box::new(inner.spec()) },
            Kind::Repeat(inner, n) => LoopSpec::Repeat { of: Box::new(inner.spec()), n: *n },
            Kind::Lasso { a, b, connector } => LoopSpec::Concat {
                a: Box::new(a.spec()),
                b: Box::new(b.spec()),
                connector: Some(match connector {
                    Some(p) => p.points.clone(),
                    None => vec![a.eval(0.0), b.eval(0.0)],
                }),
            },
            Kind::Perturbed { base, amplitude, modes, seed, .. } => LoopSpec::Perturb {
                of: Box::new(base.spec()),
                amplitude: *amplitude,
                modes: *modes,
                seed: *seed,
            },
        }
    }
}

pub fn sample_times(n: usize) -> Vec<f64> {
    (0..n).map(|i| TAU * i as f64 / n as f64).collect()
}

/// The generators of the fundamental group of the gapped uniaxial parameter
/// space: circles of radius `eps` in the `(q_index, q3)` plane around the
/// gapless point `e_index`,
///
/// ```text
/// η_1(t) = (1 + ε cos t, 0, -ε sin t),   η_2(t) = (0, 1 + ε cos t, -ε sin t).
/// ```
pub fn generator_eta(index: u8, eps: f64) -> Result<Loop> {
    if !(index == 1 || index == 2) {
        return Err(Error::invalid(format!("generator index must be 1 or 2, got {index}")));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::invalid(format!("eps must lie in (0, 1), got {eps}")));
    }
    Loop::from_kind(Kind::Generator { index, eps }, Smoothness::Smooth)
}

/// `η⁻(t) = η(2π - t)`.
pub fn reverse(l: &Loop) -> Loop {
    Loop {
        kind: Kind::Reverse(Box::new(l.clone())),
        smoothness: l.smoothness,
        samples: l.samples,
    }
}

/// Traverses `l` `n` times during one period.
pub fn repeat(l: &Loop, n: u32) -> Result<Loop> {
    if n == 0 {
        return Err(Error::invalid("repeat count must be at least 1"));
    }
    let seam = distance(&l.derivative(0.0), &l.derivative(TAU * (1.0 - 1e-12)));
    let smoothness = if n == 1 || seam < 1e-6 {
        l.smoothness
    } else {
        l.smoothness.min(Smoothness::PiecewiseC1)
    };
    Ok(Loop { kind: Kind::Repeat(Box::new(l.clone()), n), smoothness, samples: l.samples })
}

/// Lasso product `a · (c · b · c⁻¹)` based at `a(0)`, where `c` runs from
/// `a(0)` to `b(0)`. A zero-length connector degenerates to plain
/// concatenation.
pub fn concat_with_path(a: &Loop, b: &Loop, connector: &Path) -> Result<Loop> {
    let a0 = a.eval(0.0);
    let b0 = b.eval(0.0);
    if connector.start().len() != a0.len() || b0.len() != a0.len() {
        return Err(Error::invalid("loops and connector live in different parameter spaces"));
    }
    let gap_start = distance(connector.start(), &a0);
    let gap_end = distance(connector.end(), &b0);
    if gap_start > CLOSURE_TOLERANCE || gap_end > CLOSURE_TOLERANCE {
        return Err(Error::invalid(format!(
            "connector endpoints miss a(0)/b(0) by {gap_start:.3e}/{gap_end:.3e}"
        )));
    }
    let connector = (connector.length() > 0.0).then(|| connector.clone());
    let smoothness = a.smoothness.min(b.smoothness).min(Smoothness::PiecewiseC1);
    Loop::from_kind(
        Kind::Lasso { a: Box::new(a.clone()), b: Box::new(b.clone()), connector },
        smoothness,
    )
    .map(|l| l.with_samples(a.samples.max(b.samples)))
}

/// Adds a smooth random trigonometric displacement with `|δ_i(t)| ≤ amplitude`
/// in every coordinate. Deterministic in `seed`.
pub fn perturb(l: &Loop, amplitude: f64, modes: usize, seed: u64) -> Result<Loop> {
    if !(amplitude >= 0.0) || !amplitude.is_finite() {
        return Err(Error::invalid("perturbation amplitude must be a finite non-negative number"));
    }
    let dim = l.dimension();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cos = vec![vec![0.0; modes]; dim];
    let mut sin = vec![vec![0.0; modes]; dim];
    for i in 0..dim {
        for m in 0..modes {
            cos[i][m] = rng.gen_range(-1.0..1.0);
            sin[i][m] = rng.gen_range(-1.0..1.0);
        }
        let total: f64 = cos[i].iter().chain(&sin[i]).map(|v: &f64| v.abs()).sum();
        let scale = if total > 0.0 { amplitude / total } else { 0.0 };
        cos[i].iter_mut().chain(sin[i].iter_mut()).for_each(|v| *v *= scale);
    }
    let shift = FourierSeries { constant: vec![0.0; dim], cos, sin };
    Ok(Loop {
        kind: Kind::Perturbed { base: Box::new(l.clone()), shift, amplitude, modes, seed },
        smoothness: l.smoothness,
        samples: l.samples,
    })
}
