//! Small dense complex linear-algebra helpers on top of `nalgebra`.

use nalgebra::{Complex, DMatrix, DVector};

pub type C64 = Complex<f64>;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

/// Pauli matrices `σ_1, σ_2, σ_3`.
pub fn pauli(index: usize) -> CMatrix {
    match index {
        1 => CMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]),
        2 => CMatrix::from_row_slice(2, 2, &[ZERO, -I, I, ZERO]),
        3 => CMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]),
        _ => panic!("pauli index must be 1, 2 or 3"),
    }
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Largest absolute entry.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `max |A - A†|`.
pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    max_abs(&(m - m.adjoint()))
}

/// Spectral decomposition of a Hermitian matrix with eigenvalues sorted in
/// ascending order.
pub struct Eigh {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

pub fn eigh(m: &CMatrix) -> Eigh {
    let n = m.nrows();
    // Symmetrize so round-off in the caller never leaks into the solver.
    let sym = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let eig = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (col, &i) in order.iter().enumerate() {
        vectors.set_column(col, &eig.eigenvectors.column(i));
    }
    Eigh { values, vectors }
}

pub fn eigvalsh(m: &CMatrix) -> Vec<f64> {
    eigh(m).values
}

/// Operator norm of a Hermitian matrix.
pub fn hermitian_norm(m: &CMatrix) -> f64 {
    eigvalsh(m).iter().fold(0.0, |acc, v| acc.max(v.abs()))
}

/// Spectral projection onto eigenvectors with eigenvalue below `energy`.
pub fn projection_below(eig: &Eigh, energy: f64) -> CMatrix {
    let n = eig.vectors.nrows();
    let occupied: Vec<usize> = (0..n).filter(|&i| eig.values[i] < energy).collect();
    let mut frame = CMatrix::zeros(n, occupied.len());
    for (col, &i) in occupied.iter().enumerate() {
        frame.set_column(col, &eig.vectors.column(i));
    }
    &frame * frame.adjoint()
}

/// Applies a real function to the eigenvalues of a Hermitian matrix.
pub fn hermitian_function(m: &CMatrix, f: impl Fn(f64) -> f64) -> CMatrix {
    let eig = eigh(m);
    let n = m.nrows();
    let mut scaled = eig.vectors.clone();
    for (col, &v) in eig.values.iter().enumerate() {
        let s = C64::new(f(v), 0.0);
        for row in 0..n {
            scaled[(row, col)] *= s;
        }
    }
    scaled * eig.vectors.adjoint()
}

/// `Tr(A B)` without forming the product.
pub fn trace_of_product(a: &CMatrix, b: &CMatrix) -> C64 {
    let n = a.nrows();
    let mut acc = ZERO;
    for i in 0..n {
        for j in 0..n {
            acc += a[(i, j)] * b[(j, i)];
        }
    }
    acc
}

/// Distance from `energy` to the nearest value in `values`.
pub fn distance_to_spectrum(values: &[f64], energy: f64) -> f64 {
    values
        .iter()
        .map(|v| (v - energy).abs())
        .fold(f64::INFINITY, f64::min)
}
