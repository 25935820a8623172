//! Irreducible representation of the complex Clifford algebra by tensor
//! products of Pauli matrices.

use crate::error::{Error, Result};
use crate::linalg::{identity, kron, pauli, CMatrix};

/// Returns `Σ_1 … Σ_{2m+1}`, Hermitian `2^m × 2^m` matrices with
/// `{Σ_i, Σ_j} = 2 δ_ij`.
///
/// For `p = 1..=m` the pair `Σ_{2p-1}, Σ_{2p}` carries `σ_1, σ_2` in tensor
/// slot `p`, identities before it and `σ_3` after it; `Σ_{2m+1}` is
/// `σ_3 ⊗ … ⊗ σ_3`. With this choice `conj(Σ_j) = (-1)^{j+1} Σ_j`.
pub fn clifford_basis(m: usize) -> Result<Vec<CMatrix>> {
    if m < 1 {
        return Err(Error::invalid("Clifford rank m must be at least 1"));
    }
    let id = identity(2);
    let s3 = pauli(3);
    let chain = |slot: usize, center: &CMatrix| -> CMatrix {
        let mut acc: Option<CMatrix> = None;
        for pos in 0..m {
            let factor = if pos < slot {
                &id
            } else if pos == slot {
                center
            } else {
                &s3
            };
            acc = Some(match acc {
                None => factor.clone(),
                Some(a) => kron(&a, factor),
            });
        }
        acc.expect("m >= 1")
    };

    let mut basis = Vec::with_capacity(2 * m + 1);
    for slot in 0..m {
        basis.push(chain(slot, &pauli(1)));
        basis.push(chain(slot, &pauli(2)));
    }
    let mut last = s3.clone();
    for _ in 1..m {
        last = kron(&last, &s3);
    }
    basis.push(last);
    Ok(basis)
}
