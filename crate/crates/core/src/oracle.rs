//! Definition-level ground truth for the closed formulas.
//!
//! Nothing here uses the closed MIN formulas: the post-measurement state is
//! built from projectors, distances are taken with matrix norms, and the
//! best measurement is found by a grid over the Bloch sphere followed by a
//! Nelder-Mead polish in a tangent-plane chart.
//!
//! MIN only admits measurements that leave the first qubit's marginal
//! unchanged. When that marginal is not maximally mixed the only such
//! measurement is along its Bloch vector, so the search collapses to a
//! single evaluation; otherwise the whole sphere is searched.

use nalgebra::{SymmetricEigen, Vector3};
use rayon::prelude::*;

use crate::decomp::{FanoForm, X_ZERO_TOL};
use crate::error::Result;
use crate::linalg::{self, hermitian_eig, hs_norm, kron, partial_trace_second, ComplexMatrix, C64};
use crate::model::{build_hamiltonian, DensityMatrix, ModelParams};

/// Default grid: 181 polar × 361 azimuthal nodes over the full sphere, of
/// which only the upper hemisphere is evaluated.
pub const GRID_THETA: usize = 181;
pub const GRID_PHI: usize = 361;
/// Target simplex diameter of the refinement, in chart units (≈ radians).
pub const AXIS_TOL: f64 = 1e-9;
const REFINE_CANDIDATES: usize = 8;
const MAX_REFINE_ITERS: usize = 4000;

/// A von Neumann measurement on qubit a, parameterized by its Bloch axis.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeasurementAxis {
    pub theta: f64,
    pub phi: f64,
}

impl MeasurementAxis {
    pub fn new(theta: f64, phi: f64) -> Self {
        MeasurementAxis { theta, phi: phi.rem_euclid(std::f64::consts::TAU) }
    }

    pub fn z() -> Self {
        Self::new(0.0, 0.0)
    }

    /// Axis through a nonzero vector.
    pub fn from_vector(v: [f64; 3]) -> Self {
        let r = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        let theta = (v[2] / r).clamp(-1.0, 1.0).acos();
        Self::new(theta, v[1].atan2(v[0]))
    }

    /// `(sin θ cos φ, sin θ sin φ, cos θ)`.
    pub fn n(&self) -> [f64; 3] {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        [st * cp, st * sp, ct]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ObjectiveKind {
    /// `‖ρ − Π(ρ)‖²` in the Hilbert-Schmidt norm.
    HsSq,
    /// `‖ρ − Π(ρ)‖₁`.
    Trace,
    /// `1 − F(ρ, Π(ρ))` with the Wang fidelity.
    OneMinusFidelity,
}

impl ObjectiveKind {
    pub const ALL: [ObjectiveKind; 3] = [ObjectiveKind::HsSq, ObjectiveKind::Trace, ObjectiveKind::OneMinusFidelity];

    pub fn name(&self) -> &'static str {
        match self {
            ObjectiveKind::HsSq => "hs_sq",
            ObjectiveKind::Trace => "trace",
            ObjectiveKind::OneMinusFidelity => "one_minus_fidelity",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OracleResult {
    pub value: f64,
    pub argmax_axis: MeasurementAxis,
    /// `(θ nodes, φ nodes)` of the sphere grid; `(0, 0)` when the
    /// measurement was fixed by a non-degenerate marginal.
    pub grid_resolution: (usize, usize),
    pub refined: bool,
}

fn projector_pair(n: [f64; 3]) -> (ComplexMatrix, ComplexMatrix) {
    let [sx, sy, sz] = ComplexMatrix::paulis();
    let ns = sx.scale(n[0]) + sy.scale(n[1]) + sz.scale(n[2]);
    let id = ComplexMatrix::identity(2);
    ((id + ns).scale(0.5), (id - ns).scale(0.5))
}

fn post_measurement_matrix(m: &ComplexMatrix, n: [f64; 3]) -> ComplexMatrix {
    let id = ComplexMatrix::identity(2);
    let (p, q) = projector_pair(n);
    let (p, q) = (kron(&p, &id).unwrap(), kron(&q, &id).unwrap());
    (p * *m * p) + (q * *m * q)
}

/// `Σ± (Π±⊗I) ρ (Π±⊗I)` with `Π± = (I ± n·σ)/2`.
pub fn post_measurement_state(rho: &DensityMatrix, axis: &MeasurementAxis) -> DensityMatrix {
    DensityMatrix::new(post_measurement_matrix(rho.matrix(), axis.n()))
        .expect("a projective measurement maps states to states")
}

fn wang_fidelity_matrices(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    let overlap = a.trace_product(b).re;
    let pa = a.trace_product(a).re;
    let pb = b.trace_product(b).re;
    overlap * overlap / (pa * pb)
}

/// `(Tr ρσ)² / (Tr ρ² · Tr σ²)`.
pub fn fidelity_wang(rho: &DensityMatrix, sigma: &DensityMatrix) -> f64 {
    wang_fidelity_matrices(rho.matrix(), sigma.matrix())
}

fn objective_at(m: &ComplexMatrix, kind: ObjectiveKind, n: [f64; 3]) -> f64 {
    let post = post_measurement_matrix(m, n);
    match kind {
        ObjectiveKind::HsSq => hs_norm(&(*m - post)).powi(2),
        ObjectiveKind::Trace => {
            linalg::trace_norm(&(*m - post)).expect("difference of Hermitian matrices")
        }
        ObjectiveKind::OneMinusFidelity => 1.0 - wang_fidelity_matrices(m, &post),
    }
}

/// Objective value for a single measurement axis.
pub fn objective(rho: &DensityMatrix, kind: ObjectiveKind, axis: &MeasurementAxis) -> f64 {
    objective_at(rho.matrix(), kind, axis.n())
}

/// Unconstrained maximum of the objective over every measurement axis.
pub fn max_over_axes(rho: &DensityMatrix, kind: ObjectiveKind) -> OracleResult {
    max_over_axes_with_grid(rho, kind, GRID_THETA, GRID_PHI)
}

/// As [`max_over_axes`] with an explicit grid. `n_theta` nodes span `[0, π]`
/// and `n_phi` nodes span `[0, 2π]` inclusive; antipodal axes are the same
/// measurement, so only `θ ≤ π/2` is visited. Both poles and the equator
/// lie on the grid whenever `n_theta` is odd.
pub fn max_over_axes_with_grid(rho: &DensityMatrix, kind: ObjectiveKind, n_theta: usize, n_phi: usize) -> OracleResult {
    assert!(n_theta >= 3 && n_phi >= 3, "grid too coarse");
    let m = *rho.matrix();
    let d_theta = std::f64::consts::PI / (n_theta - 1) as f64;
    let d_phi = std::f64::consts::TAU / (n_phi - 1) as f64;
    let half = (n_theta - 1) / 2;

    let mut nodes = vec![MeasurementAxis::z()];
    for i in 1..=half {
        for j in 0..n_phi - 1 {
            nodes.push(MeasurementAxis::new(i as f64 * d_theta, j as f64 * d_phi));
        }
    }
    let mut scored: Vec<(f64, MeasurementAxis)> =
        nodes.par_iter().map(|a| (objective_at(&m, kind, a.n()), *a)).collect();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0));

    let best = scored
        .iter()
        .take(REFINE_CANDIDATES)
        .map(|&(v, a)| refine(&m, kind, a, v, d_theta))
        .max_by(|a, b| a.0.total_cmp(&b.0))
        .expect("grid is non-empty");

    OracleResult { value: best.0, argmax_axis: best.1, grid_resolution: (n_theta, n_phi), refined: true }
}

// Polishes a grid node with Nelder-Mead in the chart n(u, v) = normalize(n0 + u e1 + v e2).
fn refine(m: &ComplexMatrix, kind: ObjectiveKind, start: MeasurementAxis, start_value: f64, step: f64) -> (f64, MeasurementAxis) {
    let n0 = Vector3::from(start.n());
    let helper = if n0.x.abs() < 0.9 { Vector3::x() } else { Vector3::y() };
    let e1 = n0.cross(&helper).normalize();
    let e2 = n0.cross(&e1);
    let chart = |u: [f64; 2]| {
        let v = (n0 + e1 * u[0] + e2 * u[1]).normalize();
        [v.x, v.y, v.z]
    };
    let (u, neg) = nelder_mead_2d(|u| -objective_at(m, kind, chart(u)), [0.0, 0.0], step, AXIS_TOL, MAX_REFINE_ITERS);
    if -neg >= start_value {
        (-neg, MeasurementAxis::from_vector(chart(u)))
    } else {
        (start_value, start)
    }
}

/// Minimizes `f` over the plane from `x0` with an initial simplex of edge `step`.
/// Stops once the simplex diameter drops below `xtol` or after `max_iter` steps.
pub fn nelder_mead_2d(f: impl Fn([f64; 2]) -> f64, x0: [f64; 2], step: f64, xtol: f64, max_iter: usize) -> ([f64; 2], f64) {
    const REFLECT: f64 = 1.0;
    const EXPAND: f64 = 2.0;
    const CONTRACT: f64 = 0.5;
    const SHRINK: f64 = 0.5;

    let lerp = |a: [f64; 2], b: [f64; 2], t: f64| [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];
    let mut simplex: Vec<([f64; 2], f64)> = [x0, [x0[0] + step, x0[1]], [x0[0], x0[1] + step]]
        .into_iter()
        .map(|p| (p, f(p)))
        .collect();

    for _ in 0..max_iter {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let diameter = (1..3)
            .map(|k| ((simplex[k].0[0] - simplex[0].0[0]).powi(2) + (simplex[k].0[1] - simplex[0].0[1]).powi(2)).sqrt())
            .fold(0.0, f64::max);
        if diameter < xtol {
            break;
        }
        let centroid = lerp(simplex[0].0, simplex[1].0, 0.5);
        let worst = simplex[2];
        let reflected = lerp(centroid, worst.0, -REFLECT);
        let fr = f(reflected);
        if fr < simplex[0].1 {
            let expanded = lerp(centroid, worst.0, -EXPAND);
            let fe = f(expanded);
            simplex[2] = if fe < fr { (expanded, fe) } else { (reflected, fr) };
        } else if fr < simplex[1].1 {
            simplex[2] = (reflected, fr);
        } else {
            let (target, ft) = if fr < worst.1 { (reflected, fr) } else { worst };
            let contracted = lerp(centroid, target, CONTRACT);
            let fc = f(contracted);
            if fc < ft {
                simplex[2] = (contracted, fc);
            } else {
                let best = simplex[0].0;
                for vertex in simplex.iter_mut().skip(1) {
                    let p = lerp(best, vertex.0, SHRINK);
                    *vertex = (p, f(p));
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    simplex[0]
}

/// Maximum over the measurements that leave qubit a's marginal invariant.
///
/// If the marginal has distinct eigenvalues (gap above [`X_ZERO_TOL`]) the
/// only admissible axis is its eigenbasis; otherwise every axis is admissible
/// and [`max_over_axes`] is used.
pub fn max_over_measurements(rho: &DensityMatrix, kind: ObjectiveKind) -> OracleResult {
    match invariant_axis(rho) {
        Some(axis) => OracleResult {
            value: objective(rho, kind, &axis),
            argmax_axis: axis,
            grid_resolution: (0, 0),
            refined: false,
        },
        None => max_over_axes(rho, kind),
    }
}

/// Bloch axis of the first qubit's marginal, when the marginal is not ∝ I.
pub fn invariant_axis(rho: &DensityMatrix) -> Option<MeasurementAxis> {
    let reduced = partial_trace_second(rho.matrix());
    let eig = hermitian_eig(&reduced).expect("marginal is Hermitian");
    if eig.values[0] - eig.values[1] <= X_ZERO_TOL {
        return None;
    }
    let v: [C64; 2] = [eig.vectors[(0, 0)], eig.vectors[(1, 0)]];
    let cross = v[0].conj() * v[1];
    Some(MeasurementAxis::from_vector([
        2.0 * cross.re,
        2.0 * cross.im,
        v[0].norm_sqr() - v[1].norm_sqr(),
    ]))
}

/// Fidelity MIN from the Fano components, with no optimization.
///
/// In Pauli components the Wang fidelity between ρ and its measured image is
/// `(1 + ‖b‖² + nᵗWn) / (1 + ‖a‖² + ‖b‖² + ‖C‖²)` with `W = aaᵗ + CCᵗ`.
/// The admissible axis is `n = â` when `a ≠ 0`; otherwise the fidelity is
/// minimized over all axes, giving `λ_min(W)`.
pub fn fidelity_min_spectral(f: &FanoForm) -> f64 {
    let a = &f.bloch_a;
    let b = &f.bloch_b;
    let c = &f.pauli_corr;
    let w = a * a.transpose() + c * c.transpose();
    let retained = if f.x_is_zero() {
        SymmetricEigen::new(w).eigenvalues.min()
    } else {
        let n = a / a.norm();
        (n.transpose() * w * n)[0]
    };
    let denom = 1.0 + a.norm_squared() + b.norm_squared() + c.norm_squared();
    (1.0 - (1.0 + b.norm_squared() + retained) / denom).max(0.0)
}

/// `exp(-βH)/Tr exp(-βH)` from a numerical eigendecomposition of H.
/// `β = 0` gives the maximally mixed state.
pub fn thermal_state_exp(p: &ModelParams) -> Result<DensityMatrix> {
    let h = build_hamiltonian(p);
    let eig = hermitian_eig(&h)?;
    let e_min = eig.values[3];
    let weights: Vec<f64> = eig.values.iter().map(|&e| (-p.beta * (e - e_min)).exp()).collect();
    let z: f64 = weights.iter().sum();
    let scaled = linalg::HermitianEigen {
        values: weights.iter().map(|w| w / z).collect(),
        vectors: eig.vectors,
    };
    let m = scaled.reconstruct();
    // symmetrize away round-off from the reconstruction
    DensityMatrix::new((m + m.adjoint()).scale(0.5))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decomp::fano_decompose;
    use crate::model::thermal_state;
    use crate::sampling;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn axis_roundtrip() {
        for v in [[0.0, 0.0, 1.0], [1.0, 0.0, 0.0], [0.3, -0.4, -0.2], [0.0, 1.0, 0.0]] {
            let a = MeasurementAxis::from_vector(v);
            let n = a.n();
            let r = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
            for k in 0..3 {
                assert!(close(n[k], v[k] / r, 1e-15));
            }
        }
    }

    #[test]
    fn maximally_mixed_is_invariant() {
        let rho = DensityMatrix::maximally_mixed();
        let a = MeasurementAxis::new(0.7, 2.1);
        let post = post_measurement_state(&rho, &a);
        assert!(post.matrix().max_abs_diff(rho.matrix()) < 1e-16);
    }

    #[test]
    fn z_measurement_dephases_x_states() {
        // Only the diagonal survives; the first-qubit marginal is untouched.
        let rho = thermal_state(&ModelParams::new(1.2, -0.3, 0.4, 0.5, 0.1)).unwrap();
        let post = post_measurement_state(&rho, &MeasurementAxis::z());
        let m = rho.matrix();
        let diag = ComplexMatrix::diag_real(&[m[(0, 0)].re, m[(1, 1)].re, m[(2, 2)].re, m[(3, 3)].re]);
        assert!(post.matrix().max_abs_diff(&diag) < 1e-16);
        let before = partial_trace_second(m);
        assert!(partial_trace_second(post.matrix()).max_abs_diff(&before) < 1e-16);
    }

    #[test]
    fn x_measurement_on_bell() {
        let bell = DensityMatrix::bell_phi_plus();
        let post = post_measurement_state(&bell, &MeasurementAxis::new(std::f64::consts::FRAC_PI_2, 0.0));
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let plus = [C64::new(r, 0.0), C64::new(r, 0.0)];
        let minus = [C64::new(r, 0.0), C64::new(-r, 0.0)];
        let prod = |u: &[C64; 2], v: &[C64; 2]| -> Vec<C64> { (0..4).map(|k| u[k / 2] * v[k % 2]).collect() };
        let pp = prod(&plus, &plus);
        let mm = prod(&minus, &minus);
        let expect = (ComplexMatrix::outer(&pp, &pp) + ComplexMatrix::outer(&mm, &mm)).scale(0.5);
        assert!(post.matrix().max_abs_diff(&expect) < 1e-15);
    }

    #[test]
    fn measurement_is_idempotent() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..50 {
            let rho = sampling::random_state(&mut rng);
            let a = MeasurementAxis::new(rng.random_range(0.0..std::f64::consts::PI), rng.random_range(0.0..std::f64::consts::TAU));
            let once = post_measurement_state(&rho, &a);
            let twice = post_measurement_state(&once, &a);
            assert!(once.matrix().max_abs_diff(twice.matrix()) < 1e-12);
        }
    }

    #[test]
    fn wang_fidelity_examples() {
        let bell = DensityMatrix::bell_phi_plus();
        assert!(close(fidelity_wang(&bell, &bell), 1.0, 1e-15));
        let z = post_measurement_state(&bell, &MeasurementAxis::z());
        assert!(close(fidelity_wang(&bell, &z), 0.5, 1e-15));
        assert!(close(fidelity_wang(&z, &bell), 0.5, 1e-15));

        let up = DensityMatrix::new(ComplexMatrix::diag_real(&[0.5, 0.5, 0.0, 0.0])).unwrap();
        let down = DensityMatrix::new(ComplexMatrix::diag_real(&[0.0, 0.0, 0.5, 0.5])).unwrap();
        assert_eq!(fidelity_wang(&up, &down), 0.0);
    }

    #[test]
    fn bell_oracle_values() {
        let bell = DensityMatrix::bell_phi_plus();
        let hs = max_over_measurements(&bell, ObjectiveKind::HsSq);
        let tr = max_over_measurements(&bell, ObjectiveKind::Trace);
        let fi = max_over_measurements(&bell, ObjectiveKind::OneMinusFidelity);
        assert!(close(hs.value, 0.5, 1e-12));
        assert!(close(tr.value, 1.0, 1e-12));
        assert!(close(fi.value, 0.5, 1e-12));
        assert!(hs.refined && hs.grid_resolution == (GRID_THETA, GRID_PHI));
    }

    #[test]
    fn product_state_has_zero_hs_min() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..10 {
            let rho = sampling::random_product_state(&mut rng);
            let r = max_over_measurements(&rho, ObjectiveKind::HsSq);
            assert!(r.value < 1e-14);
            assert!(!r.refined);
        }
    }

    #[test]
    fn spectral_fidelity_reference_values() {
        assert!(close(fidelity_min_spectral(&fano_decompose(&DensityMatrix::bell_phi_plus())), 0.5, 1e-15));
        assert_eq!(fidelity_min_spectral(&fano_decompose(&DensityMatrix::maximally_mixed())), 0.0);
    }

    #[test]
    fn unconstrained_maximum_dominates_random_axes() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..4 {
            let rho = sampling::random_state(&mut rng);
            for kind in ObjectiveKind::ALL {
                let best = max_over_axes(&rho, kind);
                for _ in 0..64 {
                    let v: [f64; 3] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
                    let a = MeasurementAxis::from_vector(v);
                    assert!(best.value + 1e-10 >= objective(&rho, kind, &a), "{kind:?}");
                }
            }
        }
    }

    #[test]
    fn exp_oracle_limits() {
        let mixed = DensityMatrix::maximally_mixed();
        let rho = thermal_state_exp(&ModelParams::default()).unwrap();
        assert!(rho.matrix().max_abs_diff(mixed.matrix()) < 1e-16);
        let rho = thermal_state_exp(&ModelParams::new(1.0, 2.0, 0.5, 1.0, 0.3).with_beta(0.0)).unwrap();
        assert!(rho.matrix().max_abs_diff(mixed.matrix()) < 1e-16);
    }

    #[test]
    fn nelder_mead_quadratic() {
        let (x, fx) = nelder_mead_2d(|p| (p[0] - 0.3).powi(2) + 2.0 * (p[1] + 0.1).powi(2), [0.0, 0.0], 0.1, 1e-10, 5000);
        assert!(close(x[0], 0.3, 1e-9) && close(x[1], -0.1, 1e-9));
        assert!(fx < 1e-18);
    }
}
