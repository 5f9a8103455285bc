//! Fano (Bloch) decomposition of a two-qubit state.
//!
//! Two conventions are carried side by side. The Pauli convention writes
//! `ρ = ¼(I⊗I + a·σ⊗I + I⊗b·σ + Σ cᵢⱼ σᵢ⊗σⱼ)`. The orthonormal convention
//! expands in `Xᵢ = σᵢ/√2`, `Yⱼ = σⱼ/√2`, which halves every component:
//! `x = a/2`, `y = b/2`, `T = C/2`, and Γ gains a `γ₀₀ = ½` corner so that
//! `‖Γ‖² = Tr ρ²`.

use nalgebra::{Matrix3, Matrix4, Vector3};

use crate::error::Result;
use crate::linalg::{kron, ComplexMatrix};
use crate::model::DensityMatrix;

/// Threshold on `‖a‖` below which the local Bloch vector counts as zero.
pub const X_ZERO_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct FanoForm {
    /// `aᵢ = Tr(ρ σᵢ⊗I)`.
    pub bloch_a: Vector3<f64>,
    /// `bⱼ = Tr(ρ I⊗σⱼ)`.
    pub bloch_b: Vector3<f64>,
    /// `cᵢⱼ = Tr(ρ σᵢ⊗σⱼ)`.
    pub pauli_corr: Matrix3<f64>,
    pub x: Vector3<f64>,
    pub y: Vector3<f64>,
    pub t: Matrix3<f64>,
    /// Rows/columns indexed 0..=3, with index 0 the identity component.
    pub gamma_full: Matrix4<f64>,
}

impl FanoForm {
    pub fn from_pauli(bloch_a: Vector3<f64>, bloch_b: Vector3<f64>, pauli_corr: Matrix3<f64>) -> Self {
        let x = bloch_a / 2.0;
        let y = bloch_b / 2.0;
        let t = pauli_corr / 2.0;
        let mut gamma_full = Matrix4::zeros();
        gamma_full[(0, 0)] = 0.5;
        for i in 0..3 {
            gamma_full[(0, i + 1)] = y[i];
            gamma_full[(i + 1, 0)] = x[i];
            for j in 0..3 {
                gamma_full[(i + 1, j + 1)] = t[(i, j)];
            }
        }
        FanoForm { bloch_a, bloch_b, pauli_corr, x, y, t, gamma_full }
    }

    /// Whether the first qubit's Bloch vector is zero (within [`X_ZERO_TOL`]).
    pub fn x_is_zero(&self) -> bool {
        self.bloch_a.norm() <= X_ZERO_TOL
    }

    /// Largest off-diagonal `|cᵢⱼ|`.
    pub fn corr_offdiag(&self) -> f64 {
        let c = &self.pauli_corr;
        (0..3)
            .flat_map(|i| (0..3).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| c[(i, j)].abs())
            .fold(0.0, f64::max)
    }

    /// Diagonal of the Pauli correlation matrix.
    pub fn corr_diag(&self) -> Vector3<f64> {
        self.pauli_corr.diagonal()
    }

    /// `‖Γ‖² = Σ γᵢⱼ²`.
    pub fn gamma_norm_sq(&self) -> f64 {
        self.gamma_full.norm_squared()
    }
}

pub fn fano_decompose(rho: &DensityMatrix) -> FanoForm {
    let m = rho.matrix();
    let id = ComplexMatrix::identity(2);
    let paulis = ComplexMatrix::paulis();
    let expect = |op: ComplexMatrix| m.trace_product(&op).re;

    let mut a = Vector3::zeros();
    let mut b = Vector3::zeros();
    let mut c = Matrix3::zeros();
    for i in 0..3 {
        a[i] = expect(kron(&paulis[i], &id).unwrap());
        b[i] = expect(kron(&id, &paulis[i]).unwrap());
        for j in 0..3 {
            c[(i, j)] = expect(kron(&paulis[i], &paulis[j]).unwrap());
        }
    }
    FanoForm::from_pauli(a, b, c)
}

/// Rebuilds the density matrix from the Pauli-convention components.
pub fn reconstruct(f: &FanoForm) -> Result<DensityMatrix> {
    let id = ComplexMatrix::identity(2);
    let paulis = ComplexMatrix::paulis();
    let mut m = ComplexMatrix::identity(4);
    for i in 0..3 {
        m = m + kron(&paulis[i], &id).unwrap().scale(f.bloch_a[i]);
        m = m + kron(&id, &paulis[i]).unwrap().scale(f.bloch_b[i]);
        for j in 0..3 {
            m = m + kron(&paulis[i], &paulis[j]).unwrap().scale(f.pauli_corr[(i, j)]);
        }
    }
    DensityMatrix::new(m.scale(0.25))
}
