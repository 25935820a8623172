mod common;

use proptest::prelude::*;

use common::{random_model, uniaxial_q};
use piezo::disorder::{
    anderson_potential, gap_persistence, realspace_hamiltonian, realspace_polarization, trace_per_volume, RealspaceOptions,
};
use piezo::linalg::eigvalsh;
use piezo::loops::generator_eta;
use piezo::model::uniaxial_model;
use piezo::polarization::{dynamical_polarization, DynamicalOptions};
use piezo::symmetry::{check_inversion, symmetry_class, verify_symmetry_relations, Cartan};

/// Momenta `2π a / L` of the periodic `L^d` lattice.
fn torus_momenta(l: usize, d: usize) -> Vec<Vec<f64>> {
    let mut points = vec![vec![]];
    for _ in 0..d {
        points = points
            .into_iter()
            .flat_map(|p| (0..l).map(move |a| [p.clone(), vec![std::f64::consts::TAU * a as f64 / l as f64]].concat()))
            .collect();
    }
    points
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn lattice_spectrum_is_the_union_of_bloch_spectra(spec in random_model(true), l in 3usize..=5) {
        let model = spec.build();
        let sizes = vec![l; spec.dimension];
        let h = realspace_hamiltonian(&model, &[], &sizes).unwrap();
        let mut lattice = eigvalsh(&h.matrix);
        let symbol = model.symbol(&[]).unwrap();
        let mut bloch: Vec<f64> = torus_momenta(l, spec.dimension).iter().flat_map(|k| eigvalsh(&symbol.matrix(k))).collect();
        lattice.sort_by(f64::total_cmp);
        bloch.sort_by(f64::total_cmp);
        prop_assert_eq!(lattice.len(), bloch.len());
        for (a, b) in lattice.iter().zip(&bloch) {
            prop_assert!((a - b).abs() < 1e-10, "{a} vs {b}");
        }
    }

    #[test]
    fn trace_per_volume_is_the_bloch_average(spec in random_model(true), l in 3usize..=5) {
        let model = spec.build();
        let h = realspace_hamiltonian(&model, &[], &vec![l; spec.dimension]).unwrap();
        let symbol = model.symbol(&[]).unwrap();
        let momenta = torus_momenta(l, spec.dimension);
        let bloch = momenta.iter().map(|k| symbol.matrix(k).trace().re).sum::<f64>() / momenta.len() as f64;
        prop_assert!((trace_per_volume(&h) - bloch).abs() < 1e-12);
    }

    #[test]
    fn gap_never_shrinks_faster_than_the_perturbation(q in uniaxial_q(), lambda in 0.0..1.0f64, seed in 0u64..1000) {
        let sizes = [4, 4];
        let h0 = realspace_hamiltonian(&uniaxial_model(), &q, &sizes).unwrap();
        let v = anderson_potential(&sizes, seed, 1);
        let r = gap_persistence(&h0, &v, lambda, 0.0).unwrap();
        prop_assert!(r.bound_holds, "{r:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn inversion_holds_exactly_without_stagger(q in uniaxial_q()) {
        let symbol = uniaxial_model().symbol(&q).unwrap();
        prop_assert_eq!(check_inversion(&symbol, 16).unwrap(), q[2] == 0.0);
    }
}

#[test]
fn clifford_relations_for_higher_ranks() {
    for m in 1..=6 {
        let r = verify_symmetry_relations(m).unwrap();
        assert!(r.passed(), "m = {m}: {:?}", r.violations);
        assert_eq!(r.max_residual, 0.0);
    }
    let classes: Vec<Cartan> = (1..=8).map(|m| symmetry_class(m).unwrap().cartan).collect();
    assert_eq!(classes, [Cartan::C, Cartan::AII, Cartan::D, Cartan::AI, Cartan::C, Cartan::AII, Cartan::D, Cartan::AI]);
}

#[test]
fn clean_realspace_pump_converges_in_system_size() {
    let model = uniaxial_model();
    let e2 = generator_eta(2, 0.5).unwrap();
    let mut previous = f64::INFINITY;
    for l in [8, 12, 16] {
        let opts = RealspaceOptions { sizes: vec![l, l], n_t: 24, lambda: 0.0, seed: 0 };
        let r = realspace_polarization(&model, &e2, 0.0, &opts).unwrap();
        assert_eq!(r.nearest_integers().unwrap(), vec![0, 1]);
        let residual = r.max_residual();
        assert!(residual < previous, "L = {l}: {residual} after {previous}");
        previous = residual;
    }
    assert!(previous < 0.05);
}

#[test]
fn liouville_flow_preserves_the_projection() {
    let model = uniaxial_model();
    let e1 = generator_eta(1, 0.5).unwrap();
    let r = dynamical_polarization(&model, &e1, 0.0, &DynamicalOptions::new(20.0, 12)).unwrap();
    assert!(r.max_drift.unwrap() < 1e-6);
}
