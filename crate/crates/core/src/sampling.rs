//! Seeded random draws of parameters, local unitaries and two-qubit states,
//! shared by the verification harness and the test suites.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::linalg::{ComplexMatrix, C64, I, ONE};
use crate::model::{thermal_state, DensityMatrix, ModelParams};

/// Uniform draw of the five couplings in `[-range, range]`, β = 1.
pub fn random_params(rng: &mut impl Rng, range: f64) -> ModelParams {
    let mut r = || rng.random_range(-range..=range);
    ModelParams::new(r(), r(), r(), r(), r())
}

/// Random parameters with `B = λ = 0`, so the first qubit's Bloch vector vanishes.
pub fn random_params_zero_field(rng: &mut impl Rng, range: f64) -> ModelParams {
    let mut p = random_params(rng, range);
    p.b = 0.0;
    p.lambda = 0.0;
    p
}

/// Haar-random SU(2) element from a uniformly drawn unit quaternion.
pub fn random_unitary(rng: &mut impl Rng) -> ComplexMatrix {
    let q: [f64; 4] = std::array::from_fn(|_| rng.sample(StandardNormal));
    let n = q.iter().map(|x| x * x).sum::<f64>().sqrt();
    let [w, x, y, z] = q.map(|v| v / n);
    let [sx, sy, sz] = ComplexMatrix::paulis();
    ComplexMatrix::identity(2) * C64::new(w, 0.0) - (sx.scale(x) + sy.scale(y) + sz.scale(z)) * I
}

fn random_conjugated_thermal(rng: &mut impl Rng, zero_field: bool) -> DensityMatrix {
    let p = if zero_field { random_params_zero_field(rng, 3.0) } else { random_params(rng, 3.0) };
    let rho = thermal_state(&p).expect("thermal state");
    let (u, v) = (random_unitary(rng), random_unitary(rng));
    rho.local_conjugate(&u, &v).expect("unitary conjugation preserves states")
}

/// Mixture of two thermal states, each rotated by independent local unitaries.
pub fn random_state(rng: &mut impl Rng) -> DensityMatrix {
    let r1 = random_conjugated_thermal(rng, false);
    let r2 = random_conjugated_thermal(rng, false);
    r1.mix(&r2, rng.random_range(0.0..1.0)).expect("convex mixture")
}

/// As [`random_state`] but with a maximally mixed first-qubit marginal.
pub fn random_state_zero_x(rng: &mut impl Rng) -> DensityMatrix {
    let r1 = random_conjugated_thermal(rng, true);
    let r2 = random_conjugated_thermal(rng, true);
    r1.mix(&r2, rng.random_range(0.0..1.0)).expect("convex mixture")
}

fn x_state_from(diag: [f64; 4], rng: &mut impl Rng) -> DensityMatrix {
    let [p1, p2, p3, p4] = diag;
    let r14 = rng.random_range(-1.0..=1.0) * (p1 * p4).sqrt();
    let r23 = rng.random_range(-1.0..=1.0) * (p2 * p3).sqrt();
    #[rustfmt::skip]
    let m = [
        p1,  0.0, 0.0, r14,
        0.0, p2,  r23, 0.0,
        0.0, r23, p3,  0.0,
        r14, 0.0, 0.0, p4,
    ];
    DensityMatrix::new(ComplexMatrix::from_real(4, &m).unwrap()).expect("X-state is positive by construction")
}

/// Real X-state: random populations, anti-diagonal coherences within the positivity bound.
pub fn random_x_state(rng: &mut impl Rng) -> DensityMatrix {
    let w: [f64; 4] = std::array::from_fn(|_| rng.random_range(0.0..1.0));
    let s: f64 = w.iter().sum();
    x_state_from(w.map(|v| v / s), rng)
}

/// Real X-state with `p₁ + p₂ = p₃ + p₄`, i.e. zero first-qubit Bloch vector.
pub fn random_x_state_zero_x(rng: &mut impl Rng) -> DensityMatrix {
    let p1 = rng.random_range(0.0..0.5);
    let p3 = rng.random_range(0.0..0.5);
    x_state_from([p1, 0.5 - p1, p3, 0.5 - p3], rng)
}

/// Product of two pure qubit states along random axes.
pub fn random_product_state(rng: &mut impl Rng) -> DensityMatrix {
    let u = random_unitary(rng);
    let v = random_unitary(rng);
    let zero = C64::new(0.0, 0.0);
    let basis = DensityMatrix::pure(&[ONE, zero, zero, zero]).unwrap();
    basis.local_conjugate(&u, &v).unwrap()
}
