//! Closed-form correlation measures: concurrence, the zero-concurrence
//! window in `Jz`, and the Hilbert-Schmidt, trace-distance and fidelity
//! flavors of measurement-induced nonlocality.
//!
//! Functions taking a [`FanoForm`] work for any two-qubit state (the trace
//! variant needs a diagonal correlation matrix). Functions taking
//! [`ThermalElements`] are the specializations to the X-shaped Gibbs state.

use nalgebra::{Matrix3, Matrix4, SymmetricEigen, Vector3};

use crate::decomp::{fano_decompose, FanoForm};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eig, kron, ComplexMatrix, ZERO};
use crate::model::{thermal_elements, thermal_state, DensityMatrix, ModelParams, ThermalElements};
use crate::oracle;

/// Off-diagonal tolerance on the Pauli correlation matrix for [`min_trace`].
pub const DIAGONAL_TOL: f64 = 1e-10;
/// Agreement required between the two fidelity-MIN routes in [`min_fidelity`].
pub const FIDELITY_CONVENTION_TOL: f64 = 1e-6;

/// Wootters concurrence `max{0, √λ₁ − √λ₂ − √λ₃ − √λ₄}` of any two-qubit state.
///
/// The λᵢ are the eigenvalues of ρρ̃ with ρ̃ = (σy⊗σy)ρ*(σy⊗σy); they are
/// taken from the Hermitian matrix √ρ ρ̃ √ρ, which has the same spectrum.
///
/// States whose only nonzero entries sit on the diagonal and anti-diagonal
/// use `2·max{0, |ρ₁₄| − √(ρ₂₂ρ₃₃), |ρ₂₃| − √(ρ₁₁ρ₄₄)}`, which keeps full
/// precision near purity where the spin-flip spectrum route loses about half
/// the digits.
pub fn concurrence(rho: &DensityMatrix) -> f64 {
    let m = rho.matrix();
    let mut off_x = (0..4).flat_map(|i| (0..4).map(move |j| (i, j))).filter(|&(i, j)| i != j && i + j != 3);
    if off_x.all(|(i, j)| m[(i, j)] == ZERO) {
        let d = |i: usize| m[(i, i)].re.max(0.0);
        let a = m[(0, 3)].norm() - (d(1) * d(2)).sqrt();
        let b = m[(1, 2)].norm() - (d(0) * d(3)).sqrt();
        return 2.0 * a.max(b).max(0.0);
    }
    concurrence_spin_flip(rho)
}

/// Spin-flip spectrum route, valid for every state: `max{0, λ₁−λ₂−λ₃−λ₄}`
/// with `λᵢ²` the eigenvalues of `√ρ ρ̃ √ρ`.
pub fn concurrence_spin_flip(rho: &DensityMatrix) -> f64 {
    let m = rho.matrix();
    let sy = ComplexMatrix::pauli_y();
    let yy = kron(&sy, &sy).unwrap();
    let flipped = yy * m.conj() * yy;
    let sqrt_rho = hermitian_eig(m).expect("density matrix is Hermitian").map_spectrum(|v| v.max(0.0).sqrt());
    let r = sqrt_rho * flipped * sqrt_rho;
    // r is Hermitian up to round-off in the products
    let r = (r + r.adjoint()).scale(0.5);
    let lambdas = hermitian_eig(&r).expect("symmetrized").values;
    let s: Vec<f64> = lambdas.iter().map(|&v| v.max(0.0).sqrt()).collect();
    (s[0] - s[1] - s[2] - s[3]).max(0.0)
}

/// `2·max{0, (|κ| − √(ν₊ν₋))/Z, (|ε| − √(μ₊μ₋))/Z}`.
pub fn concurrence_thermal(t: &ThermalElements) -> f64 {
    let a = (t.kappa.abs() - (t.nu_plus * t.nu_minus).sqrt()) / t.z;
    let b = (t.epsilon.abs() - (t.mu_plus * t.mu_minus).sqrt()) / t.z;
    2.0 * a.max(b).max(0.0)
}

/// Interval of `Jz` on which the thermal concurrence vanishes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CriticalWindow {
    /// Lower edge; `None` when the window is unbounded below (γJ = 0).
    pub jc1: Option<f64>,
    pub jc2: f64,
}

impl CriticalWindow {
    /// Whether `jz` lies in `[jc1, jc2]`.
    pub fn contains(&self, jz: f64) -> bool {
        self.jc1.is_none_or(|lo| jz >= lo) && jz <= self.jc2
    }

    pub fn is_empty(&self) -> bool {
        self.jc1.is_some_and(|lo| lo > self.jc2)
    }
}

/// Edges of the zero-concurrence window in `Jz` (the value of `p.jz` is ignored).
///
/// `jc1 = ln(|γJ| sinh η / (η cosh J))` and
/// `jc2 = ½ ln((cosh²η − (B/η)² sinh²η) / sinh²J)` at β = 1, λ = 0. The
/// general form keeps δ and β: `cosh J` becomes `√(ν₊ν₋)·e^{−βJz/2}` and
/// `sinh J` becomes `|ε|·e^{−βJz/2}`, both independent of `Jz`.
pub fn critical_window(p: &ModelParams) -> Result<CriticalWindow> {
    p.validate()?;
    if p.j == 0.0 {
        return Err(Error::DomainError("sinh J = 0: upper critical point undefined for J = 0".into()));
    }
    let beta = p.beta;
    let (be, bd) = (beta * p.eta(), beta * p.delta());
    let shc_eta = crate::model::sinhc(be);
    let shc_delta = crate::model::sinhc(bd);

    // cosh²x − (a/x)² sinh²x = 1 + (g/x)² sinh²x when x² = a² + g²
    let sqrt_nu = (1.0 + (beta * p.j * shc_delta).powi(2)).sqrt();
    let sqrt_mu = (1.0 + (beta * p.gamma_j() * shc_eta).powi(2)).sqrt();
    let kappa_amp = beta * p.gamma_j().abs() * shc_eta;
    let eps_amp = beta * p.j.abs() * shc_delta;

    let jc1 = (kappa_amp > 0.0).then(|| (kappa_amp / sqrt_nu).ln() / beta);
    let jc2 = (sqrt_mu / eps_amp).ln() / beta;
    Ok(CriticalWindow { jc1, jc2 })
}

fn symmetric_min_eigenvalue(m: &Matrix3<f64>) -> f64 {
    SymmetricEigen::new(*m).eigenvalues.min()
}

/// Hilbert-Schmidt MIN in the orthonormal-operator convention.
///
/// `Tr(TTᵗ) − xᵗTTᵗx/‖x‖²` for `x ≠ 0`, else `Tr(TTᵗ) − λ_min(TTᵗ)`.
pub fn min_hs(f: &FanoForm) -> f64 {
    let ttt = f.t * f.t.transpose();
    let value = if f.x_is_zero() {
        ttt.trace() - symmetric_min_eigenvalue(&ttt)
    } else {
        ttt.trace() - (f.x.transpose() * ttt * f.x)[0] / f.x.norm_squared()
    };
    value.max(0.0)
}

/// Trace-distance MIN for states with a diagonal Pauli correlation matrix.
///
/// For `x ≠ 0`: `(√χ₊ + √χ₋)/(2‖x‖)` with `χ± = α ± 2√β̃‖x‖`,
/// `α = ‖c‖²‖x‖² − Σcᵢ²xᵢ²`, `β̃ = Σ_cyclic xᵢ²cⱼ²c_k²`, all norms Euclidean
/// and `x` the Pauli-convention Bloch vector. For `x = 0`: `max|cᵢ|`.
///
/// The `x ≠ 0` value is the largest singular value of `(I − x̂x̂ᵗ)C`; it is
/// evaluated as the top eigenvalue of the 2×2 block of `C²` on the plane
/// orthogonal to `x`, since `χ₋` cancels badly when the two singular values
/// nearly coincide.
pub fn min_trace(f: &FanoForm) -> Result<f64> {
    let offdiag = f.corr_offdiag();
    if offdiag > DIAGONAL_TOL {
        return Err(Error::NotDiagonalCorrelation { offdiag });
    }
    let c = f.corr_diag();
    if f.x_is_zero() {
        return Ok(c.abs().max());
    }
    let n = f.bloch_a.normalize();
    // least-aligned coordinate axis keeps the cross product well conditioned
    let k = n.iamin();
    let e1 = n.cross(&Vector3::ith(k, 1.0)).normalize();
    let e2 = n.cross(&e1);
    let c2 = c.component_mul(&c);
    let g = |u: &Vector3<f64>, v: &Vector3<f64>| c2.dot(&u.component_mul(v));
    let (a, b, d) = (g(&e1, &e1), g(&e1, &e2), g(&e2, &e2));
    let top = 0.5 * (a + d) + (0.5 * (a - d)).hypot(b);
    Ok(top.max(0.0).sqrt())
}

/// Fidelity MIN: the spectral form from [`oracle::fidelity_min_spectral`],
/// cross-checked against the Γ-matrix closed form [`fidelity_min_closed`].
pub fn min_fidelity(f: &FanoForm) -> Result<f64> {
    let spectral = oracle::fidelity_min_spectral(f);
    let closed = fidelity_min_closed(f);
    if (spectral - closed).abs() > FIDELITY_CONVENTION_TOL {
        return Err(Error::ConventionMismatch { closed, spectral });
    }
    Ok(spectral)
}

/// Fidelity MIN from the full 4×4 Γ.
///
/// For `x ≠ 0`, `(‖Γ‖² − Tr(AΓΓᵗAᵗ))/‖Γ‖²` with the 2×4 operator
/// `A = (1/√2)[[1, x̂ᵗ], [1, −x̂ᵗ]]` acting on the identity row and the
/// x̂-direction of Γ. For `x = 0` the subtracted term is
/// `‖γ₀‖² + λ_min(Γ̃Γ̃ᵗ)`, with γ₀ the identity row and Γ̃ the three
/// remaining rows.
pub fn fidelity_min_closed(f: &FanoForm) -> f64 {
    let g = &f.gamma_full;
    let norm_sq = f.gamma_norm_sq();
    let retained = if f.x_is_zero() {
        let lower = g.fixed_view::<3, 4>(1, 0);
        let gram: Matrix3<f64> = lower * lower.transpose();
        g.row(0).norm_squared() + symmetric_min_eigenvalue(&gram)
    } else {
        let xh = f.x / f.x.norm();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mut a = nalgebra::Matrix2x4::zeros();
        a[(0, 0)] = s;
        a[(1, 0)] = s;
        for i in 0..3 {
            a[(0, i + 1)] = s * xh[i];
            a[(1, i + 1)] = -s * xh[i];
        }
        let ag = a * g;
        (ag * ag.transpose()).trace()
    };
    ((norm_sq - retained) / norm_sq).max(0.0)
}

/// The `x = 0` branch read with μ₁ as the smallest eigenvalue of the full
/// 4×4 ΓΓᵗ. Kept as a diagnostic: it gives ¾ on a Bell state, where the
/// definition gives ½.
pub fn fidelity_min_closed_full_gram(f: &FanoForm) -> f64 {
    if !f.x_is_zero() {
        return fidelity_min_closed(f);
    }
    let gram: Matrix4<f64> = f.gamma_full * f.gamma_full.transpose();
    let mu1 = SymmetricEigen::new(gram).eigenvalues.min();
    let norm_sq = f.gamma_norm_sq();
    (norm_sq - mu1) / norm_sq
}

/// `2(κ² + ε²)/Z²`.
pub fn min_hs_thermal(t: &ThermalElements) -> f64 {
    2.0 * (t.kappa.powi(2) + t.epsilon.powi(2)) / (t.z * t.z)
}

/// `(|κ| + |ε|)/Z`. Half of the definition-based trace MIN for `x ≠ 0`.
pub fn min_trace_thermal(t: &ThermalElements) -> f64 {
    (t.kappa.abs() + t.epsilon.abs()) / t.z
}

/// `2(κ² + ε²) / (2(κ² + ε²) + μ₋² + ν₊² + ν₋² + μ₊²)`.
pub fn min_fidelity_thermal(t: &ThermalElements) -> f64 {
    let coh = 2.0 * (t.kappa.powi(2) + t.epsilon.powi(2));
    let denom = coh + t.diagonal_sq();
    if denom == 0.0 {
        0.0
    } else {
        coh / denom
    }
}

/// All measures at one parameter point.
///
/// `min_hs`, `min_trace` and `min_fidelity` are the definition-consistent
/// values (general two-qubit formulas evaluated on the thermal state);
/// `min_trace_paper` is [`min_trace_thermal`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeasureReport {
    pub concurrence: f64,
    pub min_hs: f64,
    pub min_trace: f64,
    pub min_trace_paper: f64,
    pub min_fidelity: f64,
}

impl MeasureReport {
    pub fn for_params(p: &ModelParams) -> Result<Self> {
        let t = thermal_elements(p);
        let rho = thermal_state(p)?;
        let f = fano_decompose(&rho);
        Ok(MeasureReport {
            concurrence: concurrence_thermal(&t),
            min_hs: min_hs(&f),
            min_trace: min_trace(&f)?,
            min_trace_paper: min_trace_thermal(&t),
            min_fidelity: min_fidelity(&f)?,
        })
    }

    /// Same measures for an arbitrary state; the trace MIN comes from the
    /// oracle when the correlation matrix is not diagonal.
    pub fn for_state(rho: &DensityMatrix) -> Result<Self> {
        let f = fano_decompose(rho);
        let min_trace_value = match min_trace(&f) {
            Ok(v) => v,
            Err(Error::NotDiagonalCorrelation { .. }) => {
                oracle::max_over_measurements(rho, oracle::ObjectiveKind::Trace).value
            }
            Err(e) => return Err(e),
        };
        Ok(MeasureReport {
            concurrence: concurrence(rho),
            min_hs: min_hs(&f),
            min_trace: min_trace_value,
            min_trace_paper: f64::NAN,
            min_fidelity: min_fidelity(&f)?,
        })
    }

    pub fn values(&self) -> [f64; 5] {
        [self.concurrence, self.min_hs, self.min_trace, self.min_trace_paper, self.min_fidelity]
    }
}
