use proptest::prelude::*;

use qthermo::chain::{chain_spectrum, ChainSpec, CouplingFamily};
use qthermo::gaussian::{qfi_from_derivatives, thermal_mode_covariance, thermal_mode_derivatives};
use qthermo::thermo::{
    gap_prefactor_exponent, ising_heat_capacity, lattice_heat_capacity, low_temperature_bound, mode_heat_capacity,
    IsingMode, IsingSpec, ModeSystem, Statistics,
};

fn mean_energy(m: &ModeSystem, t: f64) -> f64 {
    let sign = match m.statistics() {
        Statistics::Bosonic => -1.0,
        _ => 1.0,
    };
    m.energies().iter().map(|&e| e / ((e / t).exp() + sign)).sum()
}

#[test]
fn heat_capacity_is_energy_derivative() {
    for stats in [Statistics::Bosonic, Statistics::Fermionic] {
        let m = ModeSystem::new(stats, vec![0.3, 0.7, 1.1, 2.5, 4.0]).unwrap();
        for t in [0.1, 0.5, 2.0, 10.0] {
            let h = 1e-4 * t;
            let fd = (mean_energy(&m, t + h) - mean_energy(&m, t - h)) / (2.0 * h);
            let c = lattice_heat_capacity(&m, t).unwrap();
            assert!((fd - c).abs() < 1e-6 * c, "{stats:?} T = {t}: {fd} vs {c}");
        }
    }
}

#[test]
fn doubling_identical_spectrum_doubles_capacity() {
    let e = vec![0.2, 0.9, 1.7];
    let one = ModeSystem::new(Statistics::Bosonic, e.clone()).unwrap();
    let two = ModeSystem::new(Statistics::Bosonic, [e.clone(), e].concat()).unwrap();
    for t in [0.05, 1.0, 20.0] {
        let (c1, c2) = (lattice_heat_capacity(&one, t).unwrap(), lattice_heat_capacity(&two, t).unwrap());
        assert!((c2 - 2.0 * c1).abs() <= 4.0 * f64::EPSILON * c2, "T = {t}");
    }
}

#[test]
fn global_chain_qfi_is_heat_capacity_over_t_squared() {
    let c = ChainSpec::gapped(CouplingFamily::PowerLaw { g: 1.0, s: 2.5 }.couplings(50), 0.2).unwrap();
    let spec = chain_spectrum(&c).unwrap();
    let mut energies = Vec::new();
    for (a, w2) in spec.non_repeated.iter().enumerate() {
        let copies = if a == 0 { 1 } else { 2 };
        energies.extend(vec![w2.sqrt(); copies]);
    }
    let m = ModeSystem::new(Statistics::Bosonic, energies).unwrap();
    for t in [0.02, 0.3, 4.0] {
        let f: f64 = m
            .energies()
            .iter()
            .map(|&w| {
                qfi_from_derivatives(&thermal_mode_covariance(w, t).unwrap(), &thermal_mode_derivatives(w, t).unwrap())
                    .unwrap()
            })
            .sum();
        let c = lattice_heat_capacity(&m, t).unwrap();
        assert!((f - c / (t * t)).abs() < 1e-8 * f, "T = {t}");
    }
}

#[test]
fn ising_ratio_error_halves_with_beta_gap() {
    let spec = IsingSpec::new(0.5, 1.0, 10_000).unwrap();
    let err = |bd: f64| {
        let t = spec.gap() / bd;
        let e = ising_heat_capacity(&spec, t, IsingMode::Exact).unwrap();
        let a = ising_heat_capacity(&spec, t, IsingMode::Asymptotic).unwrap();
        (e / a - 1.0).abs()
    };
    let r = err(10.0) / err(20.0);
    assert!((1.6..=2.4).contains(&r), "error ratio {r}");
}

#[test]
fn critical_ising_gap_closes() {
    let eps = |n| qthermo::thermo::ising_spectrum(&IsingSpec::new(1.0, 1.0, n).unwrap());
    assert_eq!(eps(100).into_iter().fold(f64::INFINITY, f64::min), 0.0);
    let lowest_excited = |n| eps(n).into_iter().filter(|&e| e > 0.0).fold(f64::INFINITY, f64::min);
    assert!(lowest_excited(1000) < 0.2 * lowest_excited(100));
    assert!((lowest_excited(10_000) - 4.0 * (std::f64::consts::PI / 1e4).sin()).abs() < 1e-15);
}

#[test]
fn prefactor_exponent_of_single_gap() {
    // Isolated gap: C ∝ (βΔ)² e^{−βΔ} asymptotically.
    let m = ModeSystem::new(Statistics::Qubit, vec![1.0]).unwrap();
    let xs: Vec<f64> = (0..20).map(|i| 10.0 + 2.0 * i as f64).collect();
    let fit = gap_prefactor_exponent(&m, &xs, (10.0, 48.0)).unwrap();
    assert!((fit.exponent_or_gap - 2.0).abs() < 1e-3);
}

#[test]
fn bound_needs_low_temperature() {
    let m = ModeSystem::new(Statistics::Bosonic, vec![1.0, 2.0]).unwrap();
    assert!(low_temperature_bound(&m, 0.5).is_err());
    assert!(low_temperature_bound(&m, 0.2).is_ok());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn low_temperature_bound_holds(
        stats in prop_oneof![Just(Statistics::Bosonic), Just(Statistics::Fermionic), Just(Statistics::Qubit)],
        gap in 1e-3f64..10.0,
        extra in prop::collection::vec(0.0f64..20.0, 0..100),
        beta_gap in 4.0f64..100.0,
    ) {
        let mut e = vec![gap];
        e.extend(extra.iter().map(|x| gap * (1.0 + x)));
        let m = ModeSystem::new(stats, e).unwrap();
        let t = gap / beta_gap;
        let c = lattice_heat_capacity(&m, t).unwrap();
        prop_assert!(c >= 0.0);
        prop_assert!(c <= low_temperature_bound(&m, t).unwrap() * (1.0 + 1e-12));
    }

    #[test]
    fn mode_capacity_is_bounded(eps in 1e-3f64..1e3, t in 1e-3f64..1e3) {
        let b = mode_heat_capacity(Statistics::Bosonic, eps, t).unwrap();
        let f = mode_heat_capacity(Statistics::Fermionic, eps, t).unwrap();
        prop_assert!((0.0..=1.0).contains(&b));
        prop_assert!((0.0..=0.5).contains(&f));
        prop_assert!(f <= b);
    }
}
