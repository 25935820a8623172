//! Discrete symmetries of two-band Clifford hamiltonians `H = Σ_j h_j Σ_j`.
//!
//! On symbols, the parity `℘` acts as `k ↦ -k` and complex conjugation as
//! entrywise conjugation combined with `k ↦ -k`. For odd `m = 2ν - 1` the
//! matrix `Θ = Σ_1 Σ_3 ⋯ Σ_{4ν-1}` gives a particle-hole symmetry
//! `Θ H(k) Θ* = -conj(H(k))`; for even `m = 2ν` the matrix `Υ = Θ Σ_{4ν+1}`
//! gives a time-reversal symmetry `Υ H(k) Υ* = conj(H(k))`. Both follow from
//! the matrix relations checked here and the reality of the `h_j`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{identity, max_abs, pauli, CMatrix, C64};
use crate::model::{clifford_basis, BlochSymbol};
use crate::spectral::KGrid;

/// Components `|h_0|` above this make a model unclassified.
pub const H0_TOLERANCE: f64 = 1e-12;
/// Tolerance of symbol-level identities.
pub const SYMBOL_TOLERANCE: f64 = 1e-10;

fn nu(m: usize) -> usize {
    m.div_ceil(2)
}

/// `Θ = Σ_1 Σ_3 ⋯ Σ_{2m+1}` for odd `m`.
pub fn theta_matrix(m: usize) -> Result<CMatrix> {
    if m == 0 || m % 2 == 0 {
        return Err(Error::invalid(format!("Θ is defined for odd m, got {m}")));
    }
    Ok(odd_product(&clifford_basis(m)?, m + 1))
}

/// `Υ = Σ_1 Σ_3 ⋯ Σ_{2m-1} Σ_{2m+1}` for even `m`.
pub fn upsilon_matrix(m: usize) -> Result<CMatrix> {
    if m == 0 || m % 2 == 1 {
        return Err(Error::invalid(format!("Υ is defined for even m, got {m}")));
    }
    Ok(odd_product(&clifford_basis(m)?, m + 1))
}

/// Product of the first `count` odd-indexed matrices `Σ_1 Σ_3 ⋯`.
fn odd_product(basis: &[CMatrix], count: usize) -> CMatrix {
    let mut acc = identity(basis[0].nrows());
    for sigma in basis.iter().step_by(2).take(count) {
        acc *= sigma;
    }
    acc
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    /// 1-based index of the offending matrix (0 for relations of `Θ`/`Υ` alone).
    pub j: usize,
    pub relation: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelationReport {
    pub m: usize,
    pub checked: usize,
    pub max_residual: f64,
    pub violations: Vec<Violation>,
}

impl RelationReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks the relations of the standard Clifford basis of rank `m`.
pub fn verify_symmetry_relations(m: usize) -> Result<RelationReport> {
    verify_relations_for(&clifford_basis(m)?, m)
}

/// Checks anticommutation, conjugation parities `conj(Σ_j) = (-1)^{j+1} Σ_j`,
/// unitarity and involution sign of `Θ`/`Υ`, and its commutation signs with
/// every `Σ_j`, for an arbitrary candidate set of matrices.
pub fn verify_relations_for(basis: &[CMatrix], m: usize) -> Result<RelationReport> {
    if basis.len() != 2 * m + 1 {
        return Err(Error::invalid(format!("expected {} matrices, got {}", 2 * m + 1, basis.len())));
    }
    let n = basis[0].nrows();
    let id = identity(n);
    let mut report = RelationReport { m, checked: 0, max_residual: 0.0, violations: Vec::new() };
    let mut check = |residual: f64, j: usize, relation: &str| {
        report.checked += 1;
        report.max_residual = report.max_residual.max(residual);
        if residual > 0.0 {
            report.violations.push(Violation { j, relation: relation.to_string() });
        }
    };
    for (a, sa) in basis.iter().enumerate() {
        for (b, sb) in basis.iter().enumerate().skip(a) {
            let expected = if a == b { &id * C64::new(2.0, 0.0) } else { CMatrix::zeros(n, n) };
            check(max_abs(&(sa * sb + sb * sa - expected)), a + 1, &format!("anticommutator with Σ_{}", b + 1));
        }
    }
    for (i, s) in basis.iter().enumerate() {
        let j = i + 1;
        let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
        check(max_abs(&(s.map(|z| z.conj()) - s * C64::new(sign, 0.0))), j, "conjugation parity");
    }
    let sym = odd_product(basis, m + 1);
    let involution = if nu(m) % 2 == 0 { 1.0 } else { -1.0 };
    check(max_abs(&(sym.adjoint() * &sym - &id)), 0, "unitarity");
    check(max_abs(&(&sym * &sym - &id * C64::new(involution, 0.0))), 0, "involution sign");
    for (i, s) in basis.iter().enumerate() {
        let j = i + 1;
        // Θ Σ_j = (-1)^j Σ_j Θ for odd m, Υ Σ_j = (-1)^{j+1} Σ_j Υ for even m
        let exponent = if m % 2 == 1 { j } else { j + 1 };
        let sign = if exponent % 2 == 0 { 1.0 } else { -1.0 };
        check(max_abs(&(&sym * s - s * &sym * C64::new(sign, 0.0))), j, "commutation sign");
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Cartan {
    AI,
    AII,
    D,
    C,
    #[serde(rename = "unclassified")]
    Unclassified,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymmetryVerdict {
    pub m: usize,
    pub nu: usize,
    /// Sign of `U_Θ²`, 0 when absent.
    pub ph: i8,
    /// Sign of `U_Υ²`, 0 when absent.
    pub tr: i8,
    pub cartan: Cartan,
    pub relations_checked: usize,
    pub max_residual: f64,
}

/// Table lookup from the parities of `m` and `ν`, certified by the matrix
/// relations.
pub fn symmetry_class(m: usize) -> Result<SymmetryVerdict> {
    if m == 0 {
        return Err(Error::invalid("m must be at least 1"));
    }
    let nu = nu(m);
    let (ph, tr, cartan) = match (m % 2 == 0, nu % 2 == 0) {
        (true, true) => (0, 1, Cartan::AI),
        (true, false) => (0, -1, Cartan::AII),
        (false, true) => (1, 0, Cartan::D),
        (false, false) => (-1, 0, Cartan::C),
    };
    let relations = verify_symmetry_relations(m)?;
    if !relations.passed() {
        return Err(Error::MethodDisagreement(format!(
            "Clifford relations fail for m = {m}: {:?}",
            relations.violations
        )));
    }
    let sym = odd_product(&clifford_basis(m)?, m + 1);
    let square = (&sym * &sym)[(0, 0)].re;
    if square.round() as i8 != ph + tr {
        return Err(Error::MethodDisagreement(format!("table sign {} but squared symmetry {square}", ph + tr)));
    }
    Ok(SymmetryVerdict {
        m,
        nu,
        ph,
        tr,
        cartan,
        relations_checked: relations.checked,
        max_residual: relations.max_residual,
    })
}

/// Verdict for a concrete symbol: the class of its rank, after checking
/// `h_0 ≡ 0` and the symmetry identity on a `k`-grid. Models with a
/// non-vanishing `h_0` are reported as unclassified.
pub fn classify_symbol(symbol: &BlochSymbol, n_k: usize) -> Result<SymmetryVerdict> {
    let m = symbol.rank();
    let mut verdict = symmetry_class(m)?;
    let grid = KGrid::shifted(n_k.max(2), symbol.dimension());
    let mut comps = vec![0.0; symbol.components()];
    let h0 = grid
        .points()
        .map(|k| {
            symbol.components_into(&k, &mut comps);
            comps[0].abs()
        })
        .fold(0.0, f64::max);
    if h0 > H0_TOLERANCE {
        verdict.ph = 0;
        verdict.tr = 0;
        verdict.cartan = Cartan::Unclassified;
        return Ok(verdict);
    }
    let sym = odd_product(symbol.clifford(), m + 1);
    let sign = if m % 2 == 1 { -1.0 } else { 1.0 };
    let residual = grid
        .points()
        .map(|k| {
            let h = symbol.matrix(&k);
            max_abs(&(&sym * &h * sym.adjoint() - h.map(|z| z.conj()) * C64::new(sign, 0.0)))
        })
        .fold(0.0, f64::max);
    verdict.relations_checked += grid.len();
    verdict.max_residual = verdict.max_residual.max(residual);
    if residual > SYMBOL_TOLERANCE {
        return Err(Error::MethodDisagreement(format!(
            "symbol violates the {} identity by {residual:.3e}",
            if m % 2 == 1 { "particle-hole" } else { "time-reversal" }
        )));
    }
    Ok(verdict)
}

/// `max_k ‖σ_1 H(-k) σ_1 - H(k)‖` on a shifted grid, for `m = 1`.
pub fn inversion_residual(symbol: &BlochSymbol, n_k: usize) -> Result<f64> {
    if symbol.rank() != 1 {
        return Err(Error::invalid("the inversion test is defined for m = 1"));
    }
    let s1 = pauli(1);
    let grid = KGrid::shifted(n_k.max(2), symbol.dimension());
    Ok(grid
        .points()
        .map(|k| {
            let minus: Vec<f64> = k.iter().map(|v| -v).collect();
            max_abs(&(&s1 * symbol.matrix(&minus) * &s1 - symbol.matrix(&k)))
        })
        .fold(0.0, f64::max))
}

pub fn check_inversion(symbol: &BlochSymbol, n_k: usize) -> Result<bool> {
    Ok(inversion_residual(symbol, n_k)? < SYMBOL_TOLERANCE)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::I;
    use crate::model::{uniaxial_model, HoppingModel, HoppingTerm, Expr};

    #[test]
    fn theta_for_m1() {
        let t = theta_matrix(1).unwrap();
        assert_eq!(t, pauli(1) * pauli(3));
        assert_eq!(&t * &t, -identity(2));
        assert!(theta_matrix(2).is_err());
        assert!(upsilon_matrix(1).is_err());
    }

    #[test]
    fn involution_signs() {
        let u = upsilon_matrix(2).unwrap();
        assert_eq!(&u * &u, -identity(4));
        let t = theta_matrix(3).unwrap();
        assert_eq!(&t * &t, identity(8));
        let u = upsilon_matrix(4).unwrap();
        assert_eq!(&u * &u, identity(16));
    }

    #[test]
    fn relations_hold_exactly() {
        for m in 1..=4 {
            let r = verify_symmetry_relations(m).unwrap();
            assert!(r.passed(), "m = {m}: {:?}", r.violations);
            assert_eq!(r.max_residual, 0.0);
            let n = 2 * m + 1;
            assert_eq!(r.checked, n * (n + 1) / 2 + n + 2 + n);
        }
    }

    #[test]
    fn corrupted_basis_is_caught() {
        let mut b = clifford_basis(1).unwrap();
        b.swap(0, 1);
        let r = verify_relations_for(&b, 1).unwrap();
        assert!(!r.passed());
        assert!(r.violations.contains(&Violation { j: 1, relation: "conjugation parity".into() }));
        let mut b = clifford_basis(2).unwrap();
        b[2] = &b[2] * I;
        let r = verify_relations_for(&b, 2).unwrap();
        assert!(r.violations.iter().any(|v| v.j == 3 && v.relation.starts_with("anticommutator")));
    }

    #[test]
    fn table_rows() {
        let c = symmetry_class(1).unwrap();
        assert_eq!((c.nu, c.ph, c.tr, c.cartan), (1, -1, 0, Cartan::C));
        let c = symmetry_class(2).unwrap();
        assert_eq!((c.nu, c.ph, c.tr, c.cartan), (1, 0, -1, Cartan::AII));
        let c = symmetry_class(3).unwrap();
        assert_eq!((c.nu, c.ph, c.tr, c.cartan), (2, 1, 0, Cartan::D));
        let c = symmetry_class(4).unwrap();
        assert_eq!((c.nu, c.ph, c.tr, c.cartan), (2, 0, 1, Cartan::AI));
        assert!(symmetry_class(0).is_err());
    }

    #[test]
    fn inversion_examples() {
        let model = uniaxial_model();
        assert!(check_inversion(&model.symbol(&[1.0, 1.0, 0.0]).unwrap(), 16).unwrap());
        assert!(!check_inversion(&model.symbol(&[1.0, 1.0, 0.3]).unwrap(), 16).unwrap());
        assert!(check_inversion(&model.symbol(&[0.7, 1.9, 0.0]).unwrap(), 16).unwrap());
    }

    #[test]
    fn uniaxial_symbol_is_class_c() {
        let s = uniaxial_model().symbol(&[0.4, 1.2, 0.3]).unwrap();
        assert_eq!(classify_symbol(&s, 12).unwrap().cartan, Cartan::C);
    }

    #[test]
    fn h0_makes_a_model_unclassified() {
        let terms = vec![
            HoppingTerm { displacement: vec![0], coeff: Expr::constant(1.0), matrix: pauli(3) },
            HoppingTerm { displacement: vec![1], coeff: Expr::constant(0.5), matrix: identity(2) },
            HoppingTerm { displacement: vec![-1], coeff: Expr::constant(0.5), matrix: identity(2) },
        ];
        let model = HoppingModel::new("staggered", 1, 1, 0, terms).unwrap();
        let v = classify_symbol(&model.symbol(&[]).unwrap(), 8).unwrap();
        assert_eq!(v.cartan, Cartan::Unclassified);
        assert_eq!((v.ph, v.tr), (0, 0));
    }
}
