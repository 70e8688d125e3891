//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fails.
//!
//! Run with `cargo test -p qthermo-core --test acceptance`.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qthermo::chain::{
    chain_spectrum, gap_error_scaling, gapless_frequency_sq, ChainSpec, CouplingFamily, NodeThermometer,
    ZeroModePolicy,
};
use qthermo::clm::{default_omega_min_sequence, free_probe_qfi_limit, ClmProbe, DEFAULT_QUAD_TOL};
use qthermo::fit::{fit_exponential_gap, fit_power_law, fit_power_law_xy, log_space};
use qthermo::gaussian::{
    qfi_from_derivatives, thermal_mode_covariance, thermal_mode_derivatives, uhlmann_fidelity, QfiCurve,
};
use qthermo::mapping::{chain_to_star, clm_normal_modes, star_coupling_scaling, star_to_chain};
use qthermo::spectral::{discretize_clm, susceptibility_abs_sq, SpectralDensity, StarSpec, PV_TOL};
use qthermo::thermo::{
    ising_heat_capacity, lattice_heat_capacity, low_temperature_bound, IsingMode, IsingSpec, ModeSystem, Statistics,
};

type Outcome = Result<(bool, String), String>;

struct Suite {
    passed: usize,
    failed: usize,
}

impl Suite {
    fn run(&mut self, id: &str, title: &str, budget: Duration, body: impl FnOnce() -> Outcome) {
        let start = Instant::now();
        let result = body();
        let elapsed = start.elapsed();
        let (ok, detail) = match result {
            Ok((ok, detail)) => (ok, detail),
            Err(e) => (false, format!("error: {e}")),
        };
        let in_time = elapsed <= budget;
        let pass = ok && in_time;
        if pass {
            self.passed += 1;
        } else {
            self.failed += 1;
        }
        let timing = if in_time {
            format!("{:.2}s", elapsed.as_secs_f64())
        } else {
            format!("{:.2}s over budget {:.0}s", elapsed.as_secs_f64(), budget.as_secs_f64())
        };
        println!("{} [{id}] {title}: {detail} ({timing})", if pass { "PASS" } else { "FAIL" });
    }
}

fn secs(s: u64) -> Duration {
    Duration::from_secs(s)
}

fn within(x: f64, target: f64, tol: f64) -> bool {
    (x - target).abs() <= tol
}

fn ld_star(omega0: f64, gamma: f64, omega_c: f64) -> Result<StarSpec, String> {
    let sd = SpectralDensity::lorentz_drude(gamma, omega_c).map_err(|e| e.to_string())?;
    StarSpec::new(omega0 * omega0, sd).map_err(|e| e.to_string())
}

fn clm_curve(omega0: f64, temps: &[f64]) -> Result<QfiCurve, String> {
    let probe = ClmProbe::new(&ld_star(omega0, 0.1, 100.0)?, 0.0, DEFAULT_QUAD_TOL).map_err(|e| e.to_string())?;
    QfiCurve::sample(temps, |t| probe.qfi(t)).map_err(|e| e.to_string())
}

fn thermal_qfi_oracle(omega: f64, t: f64) -> f64 {
    let x = omega / t;
    let s = (0.5 * x).sinh();
    x * x / (4.0 * t * t * s * s)
}

fn criterion_1() -> Outcome {
    let omegas = log_space(1e-2, 1e2, 20);
    let temps = log_space(0.15, 1e2, 20);
    let mut worst = 0.0f64;
    for &w in &omegas {
        for &t in &temps {
            let cov = thermal_mode_covariance(w, t).map_err(|e| e.to_string())?;
            let d = thermal_mode_derivatives(w, t).map_err(|e| e.to_string())?;
            let f = qfi_from_derivatives(&cov, &d).map_err(|e| e.to_string())?;
            let exact = thermal_qfi_oracle(w, t);
            worst = worst.max(((f - exact) / exact).abs());
        }
    }
    Ok((worst <= 1e-8, format!("max relative deviation {worst:.2e} (tol 1e-8)")))
}

fn criterion_2() -> Outcome {
    let curve = clm_curve(1.0, &log_space(1e-3, 1e-2, 12))?;
    let fit = fit_power_law(&curve, (1e-3, 1e-2)).map_err(|e| e.to_string())?;
    let p = fit.exponent_or_gap;
    Ok((within(p, 2.0, 0.05), format!("exponent {p:.4} (target 2.00 +/- 0.05)")))
}

fn criterion_3() -> Outcome {
    let window = (1e-3, 1e-1);
    let curve = clm_curve(1e-3, &log_space(window.0, window.1, 17))?;
    let fit = fit_power_law(&curve, window).map_err(|e| e.to_string())?;
    let p = fit.exponent_or_gap;
    let errs: Vec<f64> = curve.samples().iter().map(|s| s.rel_error_single_shot()).collect();
    let mut sorted = errs.clone();
    sorted.sort_by(f64::total_cmp);
    let median = sorted[sorted.len() / 2];
    let spread = errs.iter().map(|e| (e / median - 1.0).abs()).fold(0.0, f64::max);
    let ok = within(p, -2.0, 0.05) && spread <= 0.05;
    Ok((ok, format!("exponent {p:.4} (target -2.00 +/- 0.05), 1/(T sqrt F) spread {:.2}% (tol 5%)", 100.0 * spread)))
}

fn criterion_4() -> Outcome {
    let t = 1e-3;
    let star = ld_star(0.0, 0.1, 100.0)?;
    let lim = free_probe_qfi_limit(&star, t, &default_omega_min_sequence(1e-4, 4), DEFAULT_QUAD_TOL)
        .map_err(|e| e.to_string())?;
    let v = 2.0 * t * t * lim.limit_estimate;
    Ok(((0.9..=1.1).contains(&v), format!("extrapolated 2T^2 F = {v:.5} (target [0.9, 1.1])")))
}

fn criterion_5() -> Outcome {
    let (gamma, wc) = (0.1, 100.0);
    let sd = SpectralDensity::lorentz_drude(gamma, wc).map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    for i in 0..=60 {
        let w = 10.0 * wc * i as f64 / 60.0;
        let num = sd.self_energy_pv(w, PV_TOL).map_err(|e| e.to_string())?;
        let exact = gamma * wc.powi(3) / (w * w + wc * wc);
        worst = worst.max(((num - exact) / exact).abs());
    }
    let w0 = 1.0;
    let a0 = susceptibility_abs_sq(&ld_star(w0, gamma, wc)?, 0.0).map_err(|e| e.to_string())?;
    let dev = (a0 - w0.powi(4)).abs() / w0.powi(4);
    let ok = worst <= 1e-6 && dev <= 1e-10;
    Ok((ok, format!("PV self-energy max rel dev {worst:.2e} (tol 1e-6), |alpha(0)|^2 rel dev {dev:.1e} (tol 1e-10)")))
}

fn criterion_6() -> Outcome {
    let couplings = CouplingFamily::PowerLaw { g: 1.0, s: 2.5 }.couplings(100);
    let gapless_sq = gapless_frequency_sq(&couplings);

    let gapped = ChainSpec::gapped(couplings.clone(), 0.01).map_err(|e| e.to_string())?;
    let probe = NodeThermometer::new(&gapped, ZeroModePolicy::Reject).map_err(|e| e.to_string())?;
    let temps: Vec<f64> = (0..27).map(|i| 1.0 / (200.0 + 50.0 * i as f64)).collect();
    let curve = QfiCurve::sample(&temps, |t| probe.qfi(t)).map_err(|e| e.to_string())?;
    let gap = fit_exponential_gap(&curve, (200.0, 1500.0)).map_err(|e| e.to_string())?.exponent_or_gap;

    let gapless = ChainSpec::gapless(couplings).map_err(|e| e.to_string())?;
    let probe = NodeThermometer::new(&gapless, ZeroModePolicy::Regularize).map_err(|e| e.to_string())?;
    let curve = QfiCurve::sample(&log_space(1e-3, 1e-2, 12), |t| probe.qfi(t)).map_err(|e| e.to_string())?;
    let p = fit_power_law(&curve, (1e-3, 1e-2)).map_err(|e| e.to_string())?.exponent_or_gap;

    let ok_a = within(gap, 0.01, 0.001);
    let ok_b = within(p, -2.0, 0.1);
    let ok_c = (1.7342..=1.7345).contains(&gapless_sq);
    Ok((
        ok_a && ok_b && ok_c,
        format!(
            "(a) fitted gap {gap:.5} (target 0.01 +/- 10%) {}; (b) exponent {p:.4} (target -2.0 +/- 0.1) {}; gapless Omega^2 = {gapless_sq:.7} (target [1.7342, 1.7345]) {}",
            tag(ok_a), tag(ok_b), tag(ok_c)
        ),
    ))
}

fn tag(ok: bool) -> &'static str {
    if ok {
        "ok"
    } else {
        "MISS"
    }
}

fn criterion_7() -> Outcome {
    let family = CouplingFamily::PowerLaw { g: 1.0, s: 2.5 };
    let mut lowest = Vec::new();
    let mut slope = f64::NAN;
    for n in [50, 100, 200] {
        let star = chain_to_star(&ChainSpec::gapless(family.couplings(n)).map_err(|e| e.to_string())?)
            .map_err(|e| e.to_string())?;
        lowest.push(star.coupled_modes[0].0);
        if n == 100 {
            let sd = star.spectral_density().map_err(|e| e.to_string())?;
            let SpectralDensity::Discrete(modes) = sd else { unreachable!() };
            let est = modes.density_estimates();
            let k = est.len() / 4;
            let xs: Vec<f64> = est[..k].iter().map(|e| e.0).collect();
            let ys: Vec<f64> = est[..k].iter().map(|e| e.1).collect();
            slope = fit_power_law_xy(&xs, &ys, (xs[0], xs[k - 1])).map_err(|e| e.to_string())?.exponent_or_gap;
        }
    }
    let shrinking = lowest.windows(2).all(|w| w[1] < 0.6 * w[0]);
    let linear = within(slope, 1.0, 0.2);
    let gapped = ChainSpec::gapped(family.couplings(100), 0.5).map_err(|e| e.to_string())?;
    let star = chain_to_star(&gapped).map_err(|e| e.to_string())?;
    let low = star.coupled_modes[0].0;
    let finite = low > 0.4 * 0.5;
    Ok((
        shrinking && linear && finite,
        format!(
            "gapless lowest coupled omega {:.4}/{:.4}/{:.4} at N=50/100/200 {}; small-omega J exponent {slope:.3} (near-linear, 1 +/- 0.2) {}; gapped lowest {low:.5} > 0.2 {}",
            lowest[0], lowest[1], lowest[2], tag(shrinking), tag(linear), tag(finite)
        ),
    ))
}

fn discretized_chain(n: usize, omega_max: f64) -> Result<(f64, f64, f64), String> {
    let sd = SpectralDensity::lorentz_drude(0.1, 2.0).map_err(|e| e.to_string())?;
    let disc = discretize_clm(&sd, n, omega_max).map_err(|e| e.to_string())?;
    let sum = disc.omega_r_sq;
    let star = disc.into_star(0.2 * 0.2).map_err(|e| e.to_string())?;
    let modes = clm_normal_modes(&star).map_err(|e| e.to_string())?;
    let rec = star_to_chain(&modes).map_err(|e| e.to_string())?;
    let g = rec.chain.couplings();
    let hi = 500.min(n / 4);
    let xs: Vec<f64> = (10..=hi).map(|k| k as f64).collect();
    let ys: Vec<f64> = (10..=hi).map(|k| g[k - 1].abs()).collect();
    let p = fit_power_law_xy(&xs, &ys, (10.0, hi as f64)).map_err(|e| e.to_string())?.exponent_or_gap;
    Ok((sum, rec.chain.omega_sq().sqrt(), -p))
}

fn criterion_8_full() -> Outcome {
    let (sum, omega, c) = discretized_chain(2000, 100.0)?;
    let ok_sum = within(sum, 0.195853, 1e-3);
    let ok_omega = within(omega, 57.7278, 0.05);
    let ok_c = within(c, 2.0, 0.15);
    Ok((
        ok_sum && ok_omega && ok_c,
        format!(
            "sum g^2/omega^2 = {sum:.6} (0.195853 +/- 1e-3) {}; Omega = {omega:.4} (57.7278 +/- 0.05) {}; G_n exponent {c:.4} over n in [10, 500] (2.0 +/- 0.15) {}",
            tag(ok_sum), tag(ok_omega), tag(ok_c)
        ),
    ))
}

fn criterion_8_scaled() -> Outcome {
    let (_, omega, c) = discretized_chain(400, 40.0)?;
    Ok((within(c, 2.0, 0.2), format!("G_n exponent {c:.4} over n in [10, 100] (2.0 +/- 0.2), Omega = {omega:.4}")))
}

fn criterion_9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst = 0.0f64;
    let mut count = 0;
    while count < 100 {
        let n = rng.gen_range(1..=100);
        let lead = rng.gen_range(0.5..2.0);
        let decay = rng.gen_range(2.0..4.0);
        let couplings: Vec<f64> =
            (1..=n).map(|k| lead * rng.gen_range(0.5..1.0) * (k as f64).powf(-decay) / if k > 1 { 2.0 } else { 1.0 }).collect();
        let chain = ChainSpec::gapped(couplings, rng.gen_range(0.05..2.0)).map_err(|e| e.to_string())?;
        let spec = chain_spectrum(&chain).map_err(|e| e.to_string())?;
        if spec.non_repeated.windows(2).any(|w| w[1] >= w[0]) {
            continue;
        }
        count += 1;
        let rec = star_to_chain(&spec.non_repeated).map_err(|e| e.to_string())?;
        let scale = chain.omega_sq().abs().max(1.0);
        worst = worst.max((rec.chain.omega_sq() - chain.omega_sq()).abs() / scale);
        for (a, b) in rec.chain.couplings().iter().zip(chain.couplings()) {
            worst = worst.max((a - b).abs() / scale);
        }
    }
    Ok((worst <= 1e-8, format!("max deviation {worst:.2e} over {count} chains (tol 1e-8)")))
}

fn criterion_10() -> Outcome {
    let sizes = [50, 100, 200, 400, 800, 1600];
    let e3 = gap_error_scaling(3.0, 1.0, &sizes).map_err(|e| e.to_string())?.fit.exponent_or_gap;
    let e15 = gap_error_scaling(1.5, 1.0, &sizes).map_err(|e| e.to_string())?.fit.exponent_or_gap;
    let cs = star_coupling_scaling(CouplingFamily::PowerLaw { g: 1.0, s: 2.5 }, &[50, 100, 200])
        .map_err(|e| e.to_string())?;
    let ok3 = within(e3, -2.0, 0.1);
    let ok15 = within(e15, -1.5, 0.1);
    let okn = within(cs.n_exponent, 1.0, 0.15);
    let oks = within(cs.size_exponent, -1.5, 0.15);
    Ok((
        ok3 && ok15 && okn && oks,
        format!(
            "gap error s=3 exponent {e3:.3} (-2.0 +/- 0.1) {}; s=1.5 exponent {e15:.3} (-1.5 +/- 0.1) {}; coupling n-exponent {:.3} (1.0 +/- 0.15) {}, N-exponent {:.3} (-1.5 +/- 0.15) {}",
            tag(ok3), tag(ok15), cs.n_exponent, tag(okn), cs.size_exponent, tag(oks)
        ),
    ))
}

fn criterion_11() -> Outcome {
    let spec = IsingSpec::new(0.5, 1.0, 10_000).map_err(|e| e.to_string())?;
    let t = 0.05;
    let exact = ising_heat_capacity(&spec, t, IsingMode::Exact).map_err(|e| e.to_string())?;
    let asym = ising_heat_capacity(&spec, t, IsingMode::Asymptotic).map_err(|e| e.to_string())?;
    let ratio = exact / asym;

    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut violations = 0;
    for _ in 0..1000 {
        let statistics = [Statistics::Bosonic, Statistics::Fermionic, Statistics::Qubit][rng.gen_range(0..3)];
        let n = rng.gen_range(1..=200);
        let gap = rng.gen_range(0.01..10.0);
        let energies: Vec<f64> = (0..n).map(|_| gap * (1.0 + rng.gen_range(0.0..5.0f64).powi(2))).collect();
        let mut energies = energies;
        energies[0] = gap;
        let m = ModeSystem::new(statistics, energies).map_err(|e| e.to_string())?;
        let t = gap / rng.gen_range(4.0..60.0);
        let c = lattice_heat_capacity(&m, t).map_err(|e| e.to_string())?;
        let bound = low_temperature_bound(&m, t).map_err(|e| e.to_string())?;
        if c > bound * (1.0 + 1e-12) {
            violations += 1;
        }
    }
    let ok_ratio = (0.9..=1.1).contains(&ratio);
    Ok((
        ok_ratio && violations == 0,
        format!("Ising exact/asymptotic {ratio:.4} at beta*gap=20 (target [0.9, 1.1]) {}; bound violations {violations}/1000 {}", tag(ok_ratio), tag(violations == 0)),
    ))
}

fn criterion_12() -> Outcome {
    let mut worst_route = 0.0f64;
    for omega0 in [1.0, 0.1, 1e-3] {
        let probe = ClmProbe::new(&ld_star(omega0, 0.1, 100.0)?, 0.0, DEFAULT_QUAD_TOL).map_err(|e| e.to_string())?;
        for t in log_space(1e-3, 10.0, 9) {
            let a = probe.qfi(t).map_err(|e| e.to_string())?;
            let b = probe.qfi_fidelity_route(t, 1e-3).map_err(|e| e.to_string())?;
            worst_route = worst_route.max(((a - b) / a).abs());
        }
    }
    let mut worst_fock = 0.0f64;
    let pairs = [(1.0, 0.5, 0.6), (1.0, 1.0, 1.1), (1.0, 2.0, 2.5), (2.0, 5.0, 6.0), (0.5, 0.3, 0.2), (1.0, 4.0, 5.0)];
    for (w, ta, tb) in pairs {
        let g = uhlmann_fidelity(
            &thermal_mode_covariance(w, ta).map_err(|e| e.to_string())?,
            &thermal_mode_covariance(w, tb).map_err(|e| e.to_string())?,
        )
        .map_err(|e| e.to_string())?;
        let f = fock_fidelity(w / ta, w / tb, 200);
        worst_fock = worst_fock.max((g - f).abs());
    }
    let ok_r = worst_route <= 1e-3;
    let ok_f = worst_fock <= 1e-8;
    Ok((
        ok_r && ok_f,
        format!("derivative vs fidelity route max rel dev {worst_route:.2e} (tol 1e-3) {}; Fock oracle max dev {worst_fock:.2e} (tol 1e-8) {}", tag(ok_r), tag(ok_f)),
    ))
}

/// Fidelity `(Σ_n √(p_n q_n))²` of two thermal states on the basis `n ≤ n_max`.
fn fock_fidelity(ya: f64, yb: f64, n_max: usize) -> f64 {
    let pa = |n: usize| (1.0 - (-ya).exp()) * (-(n as f64) * ya).exp();
    let pb = |n: usize| (1.0 - (-yb).exp()) * (-(n as f64) * yb).exp();
    let s: f64 = (0..=n_max).map(|n| (pa(n) * pb(n)).sqrt()).sum();
    s * s
}

fn main() -> ExitCode {
    let mut suite = Suite { passed: 0, failed: 0 };
    suite.run("1", "thermal-mode QFI oracle", secs(1), criterion_1);
    suite.run("2", "trapped probe F_T ~ T^2", secs(60), criterion_2);
    suite.run("3", "weakly trapped probe F_T ~ T^-2", secs(60), criterion_3);
    suite.run("4", "free-probe limit 2T^2 F", secs(120), criterion_4);
    suite.run("5", "Lorentz-Drude self-energy", secs(10), criterion_5);
    suite.run("6", "harmonic chain local thermometry", secs(120), criterion_6);
    suite.run("7", "chain to star classification", secs(60), criterion_7);
    suite.run("8", "reservoir discretization, N=2000", secs(1800), criterion_8_full);
    suite.run("8s", "reservoir discretization, N=400", secs(120), criterion_8_scaled);
    suite.run("9", "star/chain round trip", secs(60), criterion_9);
    suite.run("10", "finite-size scaling", secs(300), criterion_10);
    suite.run("11", "heat capacities", secs(60), criterion_11);
    suite.run("12", "route agreement", secs(120), criterion_12);
    println!("acceptance: {} passed, {} failed", suite.passed, suite.failed);
    if suite.failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
