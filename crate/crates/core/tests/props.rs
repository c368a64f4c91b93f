use std::f64::consts::PI;

use proptest::prelude::*;
use threshold_lab::env::correlator;
use threshold_lab::{
    coupling_j, fidelity_slice_product_with_coupling, ising_slice_energy, leading_divergence,
    onsager_critical_coupling, threshold_lambda, CodeLattice, CorrelatorKind, CorrelatorMode, Divergence,
    EnvironmentSpec, LatticeVector, QuadratureOptions, SliceProductOptions,
};

fn vector() -> impl Strategy<Value = LatticeVector> {
    // Displacements between qubits differ by half-spacings in both axes at once.
    (-6i32..=6, -6i32..=6, prop::bool::ANY).prop_map(|(x, y, half)| {
        let h = half as i32;
        LatticeVector::new(2 * x + h, 2 * y + h)
    })
}

fn kind() -> impl Strategy<Value = CorrelatorKind> {
    prop::sample::select(CorrelatorKind::ALL.to_vec())
}

fn spins(len: usize) -> impl Strategy<Value = Vec<i8>> {
    prop::collection::vec(prop::bool::ANY.prop_map(|b| if b { 1i8 } else { -1 }), len)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn correlator_parity_and_lambda_scaling(r in vector(), n in 0usize..4, kind in kind(), lambda in 0.05f64..3.0, mode_continuum in prop::bool::ANY) {
        let (mode, env) = if mode_continuum {
            (CorrelatorMode::Continuum, EnvironmentSpec::superohmic(1.0, 1.0, 1.0, 6.0))
        } else {
            (CorrelatorMode::Discrete, EnvironmentSpec::superohmic(1.0, 1.0, 1.0, 6.0).with_box_len(12.0))
        };
        let opts = QuadratureOptions::default();
        let c = |env: &EnvironmentSpec<f64>, r| correlator(env, kind, r, n, mode, &opts).unwrap();
        let plus = c(&env, r);
        let minus = c(&env, -r);
        let sign = if kind.is_odd() { -1.0 } else { 1.0 };
        prop_assert!((minus - sign * plus).abs() <= 1e-12 * plus.abs().max(1e-3));
        let scaled = c(&env.with_lambda(lambda), r);
        prop_assert!((scaled - lambda * lambda * plus).abs() <= 1e-12 * plus.abs().max(1e-12));
    }

    #[test]
    fn divergence_capture(cutoff in 50.0f64..2000.0, v in 0.5f64..2.0, delta in 0.5f64..2.0, omega0 in 0.5f64..2.0) {
        // F₁(0,0) = (leading) × (1 − sin(vΔΛ)/(vΔΛ)).
        let env = EnvironmentSpec::superohmic(1.0, v, omega0, cutoff).with_delta(delta);
        let got = correlator(&env, CorrelatorKind::F1, LatticeVector::new(0, 0), 0, CorrelatorMode::Continuum, &QuadratureOptions::default()).unwrap();
        let lead = leading_divergence(&env, Divergence::F1Origin).unwrap();
        let x = v * delta * cutoff;
        prop_assert!((got / lead - 1.0).abs() <= 1.0 / x + 1e-9);
        prop_assert!((got / lead - (1.0 - x.sin() / x)).abs() < 1e-9);
    }

    #[test]
    fn threshold_solves_onsager_coupling(v in 0.1f64..10.0, omega0 in 0.1f64..10.0, cutoff in 0.1f64..1000.0, lambda in 0.0f64..5.0) {
        let env = EnvironmentSpec::superohmic(lambda, v, omega0, cutoff);
        let lc = threshold_lambda(&env).unwrap();
        prop_assert!(lc > 0.0);
        let jc = coupling_j(&env.with_lambda(lc)).unwrap();
        prop_assert!((jc - onsager_critical_coupling::<f64>()).abs() < 1e-12);
    }

    #[test]
    fn slice_fidelity_stays_in_range(d in 2usize..=4, n in 1usize..=3, j in 0.0f64..20.0) {
        let lat = CodeLattice::new(d).unwrap();
        let f = fidelity_slice_product_with_coupling(&lat, j, n, &SliceProductOptions::default()).unwrap();
        prop_assert!(f.in_range());
        // ρ = (1 + Z₋/Z₊)/2 with Z₋ >= 0.
        let floor = if n == 1 { 0.5 } else { 0.25 };
        prop_assert!(f.value >= floor - 1e-15 && f.value <= 1.0 + 1e-15);
    }

    #[test]
    fn global_flip_keeps_bulk_and_negates_fields((d, s) in (2usize..=5).prop_flat_map(|d| (Just(d), spins(d * (d - 1)))), j in 0.01f64..5.0) {
        let lat = CodeLattice::new(d).unwrap();
        let flipped: Vec<i8> = s.iter().map(|x| -x).collect();
        let e = ising_slice_energy(&lat, &s, 1, j).unwrap();
        let ef = ising_slice_energy(&lat, &flipped, 1, j).unwrap();
        let bulk: i64 = lat.dual_bonds().map(|(p, q)| (s[p] * s[q]) as i64).sum();
        prop_assert!(((e + ef) / 2.0 + j / 4.0 * bulk as f64).abs() < 1e-12 * j.max(1.0) * 64.0);
        let fields: i64 = lat.top_boundary_sites().chain(lat.bottom_boundary_sites()).map(|p| s[p] as i64).sum();
        prop_assert!(((e - ef) / 2.0 + j / 4.0 * fields as f64).abs() < 1e-12 * j.max(1.0) * 64.0);
    }

    #[test]
    fn single_flip_changes_energy_by_local_field(s in spins(6), p in 0usize..6, eta in prop::sample::select(vec![1i8, -1]), j in 0.01f64..5.0) {
        // d = 3: six dual sites, counted by hand from neighbours and boundary multiplicities.
        let lat = CodeLattice::new(3).unwrap();
        let mut local = 0i64;
        for (a, b) in lat.dual_bonds() {
            if a == p { local += s[b] as i64; }
            if b == p { local += s[a] as i64; }
        }
        local += lat.top_boundary_sites().filter(|&q| q == p).count() as i64;
        local += eta as i64 * lat.bottom_boundary_sites().filter(|&q| q == p).count() as i64;
        let mut t = s.clone();
        t[p] = -t[p];
        let delta = ising_slice_energy(&lat, &t, eta, j).unwrap() - ising_slice_energy(&lat, &s, eta, j).unwrap();
        prop_assert!((delta - j / 2.0 * (s[p] as i64 * local) as f64).abs() < 1e-12 * j.max(1.0) * 16.0);
    }
}

#[test]
fn discrete_sum_converges_to_continuum() {
    let opts = QuadratureOptions::default();
    let cutoff = 2.0 * PI;
    let env = EnvironmentSpec::superohmic(1.0, 1.0, 1.0, cutoff);
    let origin = LatticeVector::new(0, 0);
    let scale = correlator(&env, CorrelatorKind::F1, origin, 0, CorrelatorMode::Continuum, &opts).unwrap().abs();
    let lat = CodeLattice::new(3).unwrap();
    for r in lat.displacements().into_iter().filter(|r| r.x2 >= 0).take(8) {
        for n in 0..=2 {
            let exact = correlator(&env, CorrelatorKind::F1, r, n, CorrelatorMode::Continuum, &opts).unwrap();
            let errs: Vec<f64> = [50.0, 100.0, 200.0]
                .iter()
                .map(|ll| {
                    let e = env.with_box_len(ll / cutoff);
                    (correlator(&e, CorrelatorKind::F1, r, n, CorrelatorMode::Discrete, &opts).unwrap() - exact).abs()
                        / scale
                })
                .collect();
            assert!(errs[0] > errs[1] && errs[1] > errs[2], "{r:?} n={n}: {errs:?}");
            assert!(errs[2] < 1e-4, "{r:?} n={n}: {errs:?}");
        }
    }
}
