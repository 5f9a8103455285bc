//! Two-spin XYZ Hamiltonian with an inhomogeneous longitudinal field, its
//! closed-form spectrum and the Gibbs state `exp(-βH)/Z`.
//!
//! Basis ordering is the computational basis |00⟩, |01⟩, |10⟩, |11⟩.

use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix, C64};

/// Tolerance on the trace and Hermiticity of a density matrix.
pub const STATE_TOL: f64 = 1e-12;
/// Most negative eigenvalue tolerated in a density matrix.
pub const POSITIVITY_TOL: f64 = 1e-10;

/// Hamiltonian couplings and inverse temperature.
///
/// `gamma` is the XY anisotropy, `b` the uniform field and `lambda` the
/// field inhomogeneity. Energies are dimensionless.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelParams {
    pub j: f64,
    pub jz: f64,
    pub gamma: f64,
    pub b: f64,
    pub lambda: f64,
    pub beta: f64,
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams { j: 0.0, jz: 0.0, gamma: 0.0, b: 0.0, lambda: 0.0, beta: 1.0 }
    }
}

impl ModelParams {
    pub fn new(j: f64, jz: f64, gamma: f64, b: f64, lambda: f64) -> Self {
        ModelParams { j, jz, gamma, b, lambda, beta: 1.0 }
    }

    /// Isotropic XXX point `J = Jz`, no field.
    pub fn xxx(j: f64) -> Self {
        Self::new(j, j, 0.0, 0.0, 0.0)
    }

    pub fn with_beta(mut self, beta: f64) -> Self {
        self.beta = beta;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("J", self.j),
            ("Jz", self.jz),
            ("gamma", self.gamma),
            ("B", self.b),
            ("lambda", self.lambda),
            ("beta", self.beta),
        ];
        if let Some((name, v)) = fields.iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::InvalidParams(format!("{name} must be finite, got {v}")));
        }
        if self.beta <= 0.0 {
            return Err(Error::InvalidParams(format!("beta must be positive, got {}", self.beta)));
        }
        Ok(())
    }

    /// `γJ`, the corner coupling of the Hamiltonian.
    #[inline]
    pub fn gamma_j(&self) -> f64 {
        self.gamma * self.j
    }

    /// `η = sqrt(B² + (γJ)²)`.
    #[inline]
    pub fn eta(&self) -> f64 {
        self.b.hypot(self.gamma_j())
    }

    /// `δ = sqrt(λ² + J²)`.
    #[inline]
    pub fn delta(&self) -> f64 {
        self.lambda.hypot(self.j)
    }
}

/// `sinh(x)/x` with the removable singularity filled in.
pub(crate) fn sinhc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 + x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sinh() / x
    }
}

/// The 4×4 Hamiltonian in the computational basis.
pub fn build_hamiltonian(p: &ModelParams) -> ComplexMatrix {
    let half = p.jz / 2.0;
    let gj = p.gamma_j();
    #[rustfmt::skip]
    let h = [
        half + p.b, 0.0,               0.0,                gj,
        0.0,        -half + p.lambda,  p.j,                0.0,
        0.0,        p.j,               -half - p.lambda,   0.0,
        gj,         0.0,               0.0,                half - p.b,
    ];
    ComplexMatrix::from_real(4, &h).expect("4x4 literal")
}

/// Closed-form eigenpairs of [`build_hamiltonian`].
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralDecomposition {
    pub eta: f64,
    pub delta: f64,
    /// `E1, E2 = Jz/2 ± η`, `E3, E4 = -Jz/2 ± δ`.
    pub energies: [f64; 4],
    /// Unit eigenvectors matching `energies`, real in the computational basis.
    pub eigenvectors: [[f64; 4]; 4],
}

impl SpectralDecomposition {
    pub fn eigenvector(&self, k: usize) -> Vec<C64> {
        self.eigenvectors[k].iter().map(|&x| C64::new(x, 0.0)).collect()
    }
}

// Unit eigenvector of [[d, g], [g, -d]] for eigenvalue `sign * r`, r = hypot(d, g).
// The two algebraically equivalent forms (d ± r, g) and (g, ±r - d) are chosen
// between so the larger one is used; r = 0 falls back to the basis vectors.
fn two_level_vector(d: f64, g: f64, r: f64, upper: bool) -> [f64; 2] {
    let (u, w) = if upper {
        if d >= 0.0 { (d + r, g) } else { (g, r - d) }
    } else if d <= 0.0 {
        (d - r, g)
    } else {
        (g, -r - d)
    };
    let n = u.hypot(w);
    if n == 0.0 {
        return if upper { [1.0, 0.0] } else { [0.0, 1.0] };
    }
    [u / n, w / n]
}

/// Eigenvalues and eigenvectors from the analytic two-block structure.
///
/// The |00⟩,|11⟩ block has eigenvectors ∝ ((B ± η)/(γJ))|00⟩ + |11⟩ and the
/// |01⟩,|10⟩ block ∝ ((λ ± δ)/J)|01⟩ + |10⟩; they are evaluated in a form that
/// stays finite when γJ or J vanishes.
pub fn closed_form_spectrum(p: &ModelParams) -> SpectralDecomposition {
    let eta = p.eta();
    let delta = p.delta();
    let half = p.jz / 2.0;
    let energies = [half + eta, half - eta, -half + delta, -half - delta];

    let [a1, d1] = two_level_vector(p.b, p.gamma_j(), eta, true);
    let [a2, d2] = two_level_vector(p.b, p.gamma_j(), eta, false);
    let [b3, c3] = two_level_vector(p.lambda, p.j, delta, true);
    let [b4, c4] = two_level_vector(p.lambda, p.j, delta, false);

    SpectralDecomposition {
        eta,
        delta,
        energies,
        eigenvectors: [
            [a1, 0.0, 0.0, d1],
            [a2, 0.0, 0.0, d2],
            [0.0, b3, c3, 0.0],
            [0.0, b4, c4, 0.0],
        ],
    }
}

/// Unnormalized matrix elements of `exp(-βH)` and the partition function.
///
/// The thermal state is `[[μ₋,0,0,κ],[0,ν₋,ε,0],[0,ε,ν₊,0],[κ,0,0,μ₊]] / Z`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThermalElements {
    pub mu_plus: f64,
    pub mu_minus: f64,
    pub nu_plus: f64,
    pub nu_minus: f64,
    pub kappa: f64,
    pub epsilon: f64,
    pub z: f64,
}

impl ThermalElements {
    /// Sum of squared diagonal elements `μ₋² + ν₊² + ν₋² + μ₊²`.
    pub fn diagonal_sq(&self) -> f64 {
        self.mu_minus.powi(2) + self.nu_plus.powi(2) + self.nu_minus.powi(2) + self.mu_plus.powi(2)
    }
}

pub fn thermal_elements(p: &ModelParams) -> ThermalElements {
    let beta = p.beta;
    let (eta, delta) = (p.eta(), p.delta());
    let (be, bd) = (beta * eta, beta * delta);
    let e_minus = (-beta * p.jz / 2.0).exp();
    let e_plus = (beta * p.jz / 2.0).exp();
    // (a/η) sinh(βη) == βa · sinh(βη)/(βη)
    let b_term = beta * p.b * sinhc(be);
    let l_term = beta * p.lambda * sinhc(bd);
    ThermalElements {
        mu_plus: e_minus * (be.cosh() + b_term),
        mu_minus: e_minus * (be.cosh() - b_term),
        nu_plus: e_plus * (bd.cosh() + l_term),
        nu_minus: e_plus * (bd.cosh() - l_term),
        kappa: -beta * p.gamma_j() * sinhc(be) * e_minus,
        epsilon: -beta * p.j * sinhc(bd) * e_plus,
        z: 2.0 * (e_minus * be.cosh() + e_plus * bd.cosh()),
    }
}

/// A validated two-qubit density matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    /// Checks Hermiticity, unit trace and positivity.
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if matrix.dim() != 4 {
            return Err(Error::StateInvalid(format!("expected 4x4, got {}x{}", matrix.dim(), matrix.dim())));
        }
        let defect = matrix.hermiticity_defect();
        if defect > STATE_TOL {
            return Err(Error::StateInvalid(format!("not Hermitian (defect {defect:e})")));
        }
        let tr = matrix.trace();
        if (tr - C64::new(1.0, 0.0)).norm() > STATE_TOL {
            return Err(Error::StateInvalid(format!("trace {tr} != 1")));
        }
        let min_eig = linalg::hermitian_eigenvalues(&matrix)?[3];
        if min_eig < -POSITIVITY_TOL {
            return Err(Error::StateInvalid(format!("negative eigenvalue {min_eig:e}")));
        }
        Ok(DensityMatrix { matrix })
    }

    pub fn maximally_mixed() -> Self {
        DensityMatrix { matrix: ComplexMatrix::identity(4).scale(0.25) }
    }

    /// Projector onto a (not necessarily normalized) pure state.
    pub fn pure(psi: &[C64]) -> Result<Self> {
        let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if psi.len() != 4 || norm == 0.0 {
            return Err(Error::StateInvalid("pure state needs a nonzero 4-vector".into()));
        }
        let v: Vec<C64> = psi.iter().map(|z| z / norm).collect();
        Self::new(ComplexMatrix::outer(&v, &v))
    }

    /// |Φ+⟩ = (|00⟩ + |11⟩)/√2.
    pub fn bell_phi_plus() -> Self {
        let one = C64::new(1.0, 0.0);
        let zero = C64::new(0.0, 0.0);
        Self::pure(&[one, zero, zero, one]).expect("Bell state")
    }

    /// Convex combination `w·self + (1-w)·other`.
    pub fn mix(&self, other: &Self, w: f64) -> Result<Self> {
        Self::new(self.matrix.scale(w) + other.matrix.scale(1.0 - w))
    }

    /// `(U⊗V) ρ (U⊗V)†` for single-qubit unitaries `u`, `v`.
    pub fn local_conjugate(&self, u: &ComplexMatrix, v: &ComplexMatrix) -> Result<Self> {
        let uv = linalg::kron(u, v)?;
        Self::new(uv * self.matrix * uv.adjoint())
    }

    #[inline]
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    /// `Tr ρ²`.
    pub fn purity(&self) -> f64 {
        self.matrix.trace_product(&self.matrix).re
    }
}

/// Assembles the closed-form X-shaped Gibbs state.
pub fn thermal_state(p: &ModelParams) -> Result<DensityMatrix> {
    p.validate()?;
    DensityMatrix::new(thermal_matrix(&thermal_elements(p)))
}

pub(crate) fn thermal_matrix(t: &ThermalElements) -> ComplexMatrix {
    #[rustfmt::skip]
    let m = [
        t.mu_minus, 0.0,        0.0,        t.kappa,
        0.0,        t.nu_minus, t.epsilon,  0.0,
        0.0,        t.epsilon,  t.nu_plus,  0.0,
        t.kappa,    0.0,        0.0,        t.mu_plus,
    ];
    ComplexMatrix::from_real(4, &m).expect("4x4 literal").scale(1.0 / t.z)
}
