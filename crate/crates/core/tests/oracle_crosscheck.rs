use heisenberg_min::decomp::{fano_decompose, reconstruct, FanoForm};
use heisenberg_min::measures;
use heisenberg_min::model::{self, DensityMatrix, ModelParams};
use heisenberg_min::oracle::{self, ObjectiveKind};
use nalgebra::{Matrix3, SymmetricEigen, Vector3};

#[test]
fn xxx_reference_values() {
    let p = ModelParams::xxx(1.0);
    let t = model::thermal_elements(&p);
    assert!((t.z - 6.301281049475966).abs() < 1e-12);
    let f = fano_decompose(&model::thermal_state(&p).unwrap());
    assert!((measures::min_hs(&f) - 0.18909986747759386).abs() < 1e-14);
    let rho = model::thermal_state(&p).unwrap();
    let brute = oracle::max_over_measurements(&rho, ObjectiveKind::HsSq);
    assert!((brute.value - 0.18909986747759386).abs() < 1e-9);
    assert_eq!(brute.grid_resolution, (oracle::GRID_THETA, oracle::GRID_PHI));
}

#[test]
fn nonzero_marginal_fixes_the_measurement() {
    let rho = model::thermal_state(&ModelParams::new(2.0, -1.0, 0.5, 1.0, 0.0)).unwrap();
    let r = oracle::max_over_measurements(&rho, ObjectiveKind::Trace);
    assert_eq!(r.grid_resolution, (0, 0));
    assert!(r.argmax_axis.n()[2].abs() > 1.0 - 1e-12);
    // an unrestricted search over all axes finds more disturbance than the admissible one
    let free = oracle::max_over_axes(&rho, ObjectiveKind::HsSq);
    let fixed = oracle::max_over_measurements(&rho, ObjectiveKind::HsSq);
    assert!(free.value > fixed.value + 1e-3);
}

/// `1 − (1 + |b|² + w)/(1 + |a|² + |b|² + ‖C‖²)` for a chosen weight `w` of `W = aaᵗ + CCᵗ`.
fn fidelity_with_weight(f: &FanoForm, largest: bool) -> f64 {
    let w_mat = f.bloch_a * f.bloch_a.transpose() + f.pauli_corr * f.pauli_corr.transpose();
    let w = if largest {
        SymmetricEigen::new(w_mat).eigenvalues.max()
    } else {
        let a = f.bloch_a.normalize();
        (a.transpose() * w_mat * a)[0]
    };
    let (a2, b2, c2) = (f.bloch_a.norm_squared(), f.bloch_b.norm_squared(), f.pauli_corr.norm_squared());
    1.0 - (1.0 + b2 + w) / (1.0 + a2 + b2 + c2)
}

#[test]
fn fidelity_weight_uses_marginal_direction_not_top_eigenvalue() {
    let rho = model::thermal_state(&ModelParams::new(2.0, 0.0, 0.0, 0.1, 0.0)).unwrap();
    let f = fano_decompose(&rho);
    let brute = oracle::max_over_measurements(&rho, ObjectiveKind::OneMinusFidelity).value;
    assert!((fidelity_with_weight(&f, false) - brute).abs() < 1e-12);
    assert!((measures::min_fidelity(&f).unwrap() - brute).abs() < 1e-12);
    let top = fidelity_with_weight(&f, true);
    assert!((top - brute).abs() > 1e-2, "top-eigenvalue weight {top} vs oracle {brute}");
}

#[test]
fn full_gram_reading_misses_bell_value() {
    let f = fano_decompose(&DensityMatrix::bell_phi_plus());
    assert!((measures::fidelity_min_closed(&f) - 0.5).abs() < 1e-12);
    assert!((measures::fidelity_min_closed_full_gram(&f) - 0.75).abs() < 1e-12);
}

#[test]
fn trace_formula_for_oblique_marginal() {
    let a = Vector3::new(0.25, -0.15, 0.1);
    let b = Vector3::new(0.05, 0.1, -0.2);
    let c = Matrix3::from_diagonal(&Vector3::new(0.4, -0.3, 0.2));
    let rho = reconstruct(&FanoForm::from_pauli(a, b, c)).unwrap();
    let f = fano_decompose(&rho);
    let closed = measures::min_trace(&f).unwrap();
    let brute = oracle::max_over_measurements(&rho, ObjectiveKind::Trace).value;
    assert!((closed - brute).abs() < 1e-12, "{closed} vs {brute}");
    let hs = oracle::max_over_measurements(&rho, ObjectiveKind::HsSq).value;
    assert!((measures::min_hs(&f) - hs).abs() < 1e-12);
}

#[test]
fn zero_marginal_uses_whole_sphere() {
    let a = Vector3::zeros();
    let b = Vector3::new(0.1, 0.0, 0.2);
    let c = Matrix3::from_diagonal(&Vector3::new(0.5, -0.2, 0.3));
    let rho = reconstruct(&FanoForm::from_pauli(a, b, c)).unwrap();
    let f = fano_decompose(&rho);
    for kind in ObjectiveKind::ALL {
        let brute = oracle::max_over_measurements(&rho, kind);
        assert_eq!(brute.grid_resolution, (oracle::GRID_THETA, oracle::GRID_PHI));
        let closed = match kind {
            ObjectiveKind::HsSq => measures::min_hs(&f),
            ObjectiveKind::Trace => measures::min_trace(&f).unwrap(),
            ObjectiveKind::OneMinusFidelity => measures::min_fidelity(&f).unwrap(),
        };
        assert!((closed - brute.value).abs() < 1e-9, "{}: {closed} vs {}", kind.name(), brute.value);
    }
}

#[test]
fn thermal_trace_formula_is_half_the_definition() {
    for p in [ModelParams::new(2.0, -1.0, 0.5, 1.0, 0.0), ModelParams::new(1.0, 0.3, 0.0, 2.0, 0.4), ModelParams::new(-1.5, 2.0, 1.2, -0.7, 0.9)] {
        let t = model::thermal_elements(&p);
        let rho = model::thermal_state(&p).unwrap();
        let brute = oracle::max_over_measurements(&rho, ObjectiveKind::Trace).value;
        let ratio = brute / measures::min_trace_thermal(&t);
        assert!((ratio - 2.0).abs() < 1e-12, "{p:?}: ratio {ratio}");
    }
}

#[test]
fn zero_field_thermal_hs_formula_can_undershoot() {
    let p = ModelParams::new(1.0, -3.0, 1.0, 0.0, 0.0);
    let t = model::thermal_elements(&p);
    let rho = model::thermal_state(&p).unwrap();
    let brute = oracle::max_over_measurements(&rho, ObjectiveKind::HsSq).value;
    assert!((measures::min_hs(&fano_decompose(&rho)) - brute).abs() < 1e-9);
    assert!(brute - measures::min_hs_thermal(&t) > 0.05);
}
