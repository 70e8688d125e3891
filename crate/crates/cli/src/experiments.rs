//! Experiment runners. Each one reads and validates its keys before computing.

use rayon::prelude::*;
use serde_json::{json, Value};

use qthermo::chain::{
    chain_spectrum, gap_error_scaling, ChainSpec, CouplingFamily, NodeThermometer, ZeroModePolicy,
};
use qthermo::clm::{default_omega_min_sequence, free_probe_qfi_limit, ClmProbe, DEFAULT_QUAD_TOL};
use qthermo::fit::{fit_exponential_gap, fit_power_law, fit_power_law_xy};
use qthermo::gaussian::{QfiCurve, QfiSample, SingleModeCovariance};
use qthermo::mapping::{chain_to_star, clm_normal_modes, probe_delocalization, star_to_chain};
use qthermo::spectral::{discretization_residual, discretize_clm, SpectralDensity, StarSpec};
use qthermo::thermo::{ising_heat_capacity, IsingMode, IsingSpec, ISING_ASYMPTOTIC_MIN_BETA_GAP};

use crate::config::{Config, FitChoice, FitRequest, TemperatureGrid};
use crate::error::CliError;
use crate::output::{FitSummary, Report, Table};

pub const EXPERIMENTS: [&str; 8] =
    ["clm-qfi", "free-probe-limit", "tihc-qfi", "chain-to-star", "star-to-chain", "discretize", "heatcap", "gap-error"];

pub struct Outcome {
    pub report: Report,
    pub tolerances: Value,
}

pub fn run(name: &str, cfg: &Config, tol: Option<f64>) -> Result<Outcome, CliError> {
    match name {
        "clm-qfi" => clm_qfi(cfg, tol),
        "free-probe-limit" => free_probe_limit(cfg, tol),
        "tihc-qfi" => tihc_qfi(cfg),
        "chain-to-star" => chain_to_star_run(cfg),
        "star-to-chain" => star_to_chain_run(cfg),
        "discretize" => discretize(cfg),
        "heatcap" => heatcap(cfg),
        "gap-error" => gap_error(cfg),
        other => Err(CliError::Config(format!("unknown experiment `{other}`"))),
    }
}

fn config_error(e: qthermo::Error) -> CliError {
    CliError::Config(e.to_string())
}

fn spectral_density(cfg: &Config) -> Result<SpectralDensity, CliError> {
    let gamma = cfg.positive("gamma")?;
    let omega_c = cfg.positive("omega_c")?;
    match cfg.str_or("spectral", "lorentz-drude")? {
        "lorentz-drude" => SpectralDensity::lorentz_drude(gamma, omega_c),
        "exponential" => SpectralDensity::exponential_cutoff(gamma, omega_c, cfg.f64_or("s", 1.0)?),
        other => return Err(CliError::Config(format!("unknown spectral density `{other}`"))),
    }
    .map_err(config_error)
}

fn star(cfg: &Config) -> Result<StarSpec, CliError> {
    let sd = spectral_density(cfg)?;
    let omega0 = cfg.f64("omega0")?;
    if !(omega0 >= 0.0) {
        return Err(CliError::Config(format!("omega0 must be non-negative, got {omega0}")));
    }
    StarSpec::new(omega0 * omega0, sd).map_err(config_error)
}

fn quad_tol(cfg: &Config, tol: Option<f64>) -> Result<f64, CliError> {
    let t = match tol {
        Some(t) => t,
        None => cfg.f64_or("quad_tol", DEFAULT_QUAD_TOL)?,
    };
    if t > 0.0 && t < 1e-2 {
        Ok(t)
    } else {
        Err(CliError::Config(format!("quadrature tolerance must lie in (0, 1e-2), got {t}")))
    }
}

const QFI_COLUMNS: [&str; 6] = ["T", "beta", "sigma11", "sigma22", "qfi", "rel_error_M1"];

fn qfi_table(points: &[(f64, SingleModeCovariance, f64)]) -> Table {
    let mut t = Table::new(QFI_COLUMNS.to_vec());
    for (temp, cov, f) in points {
        t.push(vec![*temp, 1.0 / temp, cov.s11(), cov.s22(), *f, 1.0 / (temp * f.sqrt())]);
    }
    t
}

fn apply_fit(report: &mut Report, points: &[(f64, SingleModeCovariance, f64)], fit: Option<FitRequest>) -> Result<(), CliError> {
    let Some(fit) = fit else { return Ok(()) };
    let curve = QfiCurve::new(points.iter().map(|p| QfiSample { temperature: p.0, qfi: p.2 }).collect())?;
    let result = match fit.kind {
        FitChoice::PowerLaw => fit_power_law(&curve, fit.window)?,
        FitChoice::ExponentialGap => fit_exponential_gap(&curve, (1.0 / fit.window.1, 1.0 / fit.window.0))?,
    };
    report.fits.push(FitSummary::new("qfi", &result));
    Ok(())
}

fn sweep<F>(temps: &[f64], f: F) -> Result<Vec<(f64, SingleModeCovariance, f64)>, CliError>
where
    F: Fn(f64) -> qthermo::Result<(SingleModeCovariance, f64)> + Sync,
{
    let points: qthermo::Result<Vec<_>> = temps.par_iter().map(|&t| f(t).map(|(c, q)| (t, c, q))).collect();
    Ok(points?)
}

fn clm_qfi(cfg: &Config, tol: Option<f64>) -> Result<Outcome, CliError> {
    let star = star(cfg)?;
    let omega_min = cfg.f64_or("omega_min", 0.0)?;
    let quad_tol = quad_tol(cfg, tol)?;
    let grid = TemperatureGrid::from_config(cfg)?;
    let fit = FitRequest::from_config(cfg, &grid)?;
    cfg.reject_unknown()?;

    let probe = ClmProbe::new(&star, omega_min, quad_tol)?;
    let points = sweep(&grid.values(), |t| {
        let cov = probe.covariances(t)?;
        Ok((cov, probe.qfi(t)?))
    })?;
    let mut report = Report::new(qfi_table(&points));
    apply_fit(&mut report, &points, fit)?;
    report.result("omega_r_sq", star.omega_r_sq());
    report.result("resonance", probe.resonance());
    Ok(Outcome { report, tolerances: json!({ "quad_tol": quad_tol }) })
}

fn free_probe_limit(cfg: &Config, tol: Option<f64>) -> Result<Outcome, CliError> {
    let sd = spectral_density(cfg)?;
    let t = cfg.positive("T")?;
    let quad_tol = quad_tol(cfg, tol)?;
    let seq = match cfg.opt_f64_list("omega_min")? {
        Some(list) => list,
        None => default_omega_min_sequence(cfg.f64_or("omega_min_start", 1e-4)?, cfg.opt_usize("omega_min_count")?.unwrap_or(4)),
    };
    cfg.reject_unknown()?;
    let star = StarSpec::new(0.0, sd).map_err(config_error)?;

    let lim = free_probe_qfi_limit(&star, t, &seq, quad_tol)?;
    let mut table = Table::new(vec!["omega_min", "sigma11", "sigma22", "qfi", "two_T2_qfi"]);
    for p in &lim.sequence {
        table.push(vec![p.omega_min, p.covariance.s11(), p.covariance.s22(), p.qfi, 2.0 * t * t * p.qfi]);
    }
    let mut report = Report::new(table);
    report.result("limit_estimate", lim.limit_estimate);
    report.result("two_T2_limit", 2.0 * t * t * lim.limit_estimate);
    Ok(Outcome { report, tolerances: json!({ "quad_tol": quad_tol }) })
}

fn chain(cfg: &Config) -> Result<ChainSpec, CliError> {
    let couplings = match cfg.opt_f64_list("couplings")? {
        Some(list) => list,
        None => {
            let n = cfg.usize("N")?;
            let g = cfg.f64_or("G", 1.0)?;
            let family = match cfg.str_or("family", "power-law")? {
                "power-law" => CouplingFamily::PowerLaw { g, s: cfg.positive("s")? },
                "exponential" => CouplingFamily::Exponential { g, c: cfg.positive("c")? },
                other => return Err(CliError::Config(format!("unknown coupling family `{other}`"))),
            };
            family.couplings(n)
        }
    };
    if couplings.is_empty() {
        return Err(CliError::Config("a chain needs N >= 1".into()));
    }
    let c = match cfg.opt_f64("gap")? {
        Some(gap) if gap > 0.0 => ChainSpec::gapped(couplings, gap),
        Some(gap) => return Err(CliError::Config(format!("gap must be positive, got {gap}"))),
        None => match cfg.opt_f64("omega_sq")? {
            Some(w2) => ChainSpec::new(w2, couplings),
            None => ChainSpec::gapless(couplings),
        },
    }
    .map_err(config_error)?;
    Ok(c)
}

fn tihc_qfi(cfg: &Config) -> Result<Outcome, CliError> {
    let c = chain(cfg)?;
    let policy = match cfg.str_or("zero_mode", "regularize")? {
        "regularize" => ZeroModePolicy::Regularize,
        "reject" => ZeroModePolicy::Reject,
        other => return Err(CliError::Config(format!("unknown zero_mode policy `{other}`"))),
    };
    let grid = TemperatureGrid::from_config(cfg)?;
    let fit = FitRequest::from_config(cfg, &grid)?;
    cfg.reject_unknown()?;

    let spec = chain_spectrum(&c)?;
    let probe = NodeThermometer::new(&c, policy)?;
    let points = sweep(&grid.values(), |t| {
        let cov = probe.covariances(t)?;
        Ok((cov, probe.qfi(t)?))
    })?;
    let mut report = Report::new(qfi_table(&points));
    apply_fit(&mut report, &points, fit)?;
    report.result("N", c.n());
    report.result("omega_sq", c.omega_sq());
    report.result("gap", spec.gap);
    report.result("max_freq", spec.max_freq);
    Ok(Outcome { report, tolerances: json!({}) })
}

fn chain_to_star_run(cfg: &Config) -> Result<Outcome, CliError> {
    let c = chain(cfg)?;
    cfg.reject_unknown()?;
    chain_spectrum(&c)?;
    let star = chain_to_star(&c)?;
    let mut table = Table::new(vec!["omega", "g"]);
    for &(w, g) in &star.coupled_modes {
        table.push(vec![w, g]);
    }
    let mut report = Report::new(table);
    report.warnings.extend(star.warnings.iter().cloned());
    report.result("probe_omega_sq", star.probe_omega_sq);
    report.result("renormalization", star.renormalization());
    report.result("coupled_count", star.coupled_modes.len());
    report.result("decoupled_count", star.decoupled_count);
    report.result("lowest_coupled_omega", star.coupled_modes.first().map(|m| m.0));
    Ok(Outcome { report, tolerances: json!({ "cluster_rel_width": qthermo::mapping::CLUSTER_REL_WIDTH, "decoupled_rel": qthermo::mapping::DECOUPLED_REL }) })
}

fn star_to_chain_run(cfg: &Config) -> Result<Outcome, CliError> {
    let explicit = cfg.opt_f64_list("normal_freqs_sq")?;
    let (star, freqs) = match explicit {
        Some(f) => (None, f),
        None => {
            let sd = SpectralDensity::lorentz_drude(cfg.positive("gamma")?, cfg.positive("omega_c")?).map_err(config_error)?;
            let n = cfg.usize("N")?;
            let omega_max = cfg.positive("omega_max")?;
            let omega0 = cfg.f64("omega0")?;
            (Some((sd, n, omega_max, omega0)), Vec::new())
        }
    };
    let fit_window = match (cfg.opt_usize("fit_n_lo")?, cfg.opt_usize("fit_n_hi")?) {
        (Some(lo), Some(hi)) if lo >= 1 && lo < hi => Some((lo, hi)),
        (None, None) => None,
        _ => return Err(CliError::Config("fit_n_lo and fit_n_hi must be given together with 1 <= lo < hi".into())),
    };
    let delocalization = cfg.bool_or("delocalization", false)?;
    if delocalization && star.is_none() {
        return Err(CliError::Config("delocalization needs a discretized reservoir".into()));
    }
    cfg.reject_unknown()?;

    let mut warnings = Vec::new();
    let mut omega_r_sq = None;
    let (freqs, star_spec) = match star {
        None => (freqs, None),
        Some((sd, n, omega_max, omega0)) => {
            let disc = discretize_clm(&sd, n, omega_max)?;
            warnings.extend(disc.regime_warning.clone());
            omega_r_sq = Some(disc.omega_r_sq);
            let s = disc.into_star(omega0 * omega0)?;
            (clm_normal_modes(&s)?, Some(s))
        }
    };
    if let Some((_, hi)) = fit_window {
        if hi > freqs.len().saturating_sub(1) {
            return Err(CliError::Config(format!("fit_n_hi = {hi} exceeds N = {}", freqs.len().saturating_sub(1))));
        }
    }
    let rec = star_to_chain(&freqs)?;
    let g = rec.chain.couplings();
    let mut table = Table::new(vec!["n", "G"]);
    for (k, gk) in g.iter().enumerate() {
        table.push(vec![(k + 1) as f64, *gk]);
    }
    let mut report = Report::new(table);
    report.warnings = warnings;
    if !rec.physical {
        report.warnings.push("reconstructed chain is unphysical".into());
    }
    if let Some((lo, hi)) = fit_window {
        let xs: Vec<f64> = (lo..=hi).map(|k| k as f64).collect();
        let ys: Vec<f64> = (lo..=hi).map(|k| g[k - 1].abs()).collect();
        let fit = fit_power_law_xy(&xs, &ys, (lo as f64, hi as f64))?;
        report.fits.push(FitSummary::new("abs_G_n", &fit));
    }
    if let Some(s) = star_spec.filter(|_| delocalization) {
        let prof = probe_delocalization(&s)?;
        let mut t = Table::new(vec!["node_index", "d"]);
        for (i, d) in prof.coefficients.iter().enumerate() {
            t.push(vec![i as f64, *d]);
        }
        report.result("delocalization_normalization", prof.normalization);
        report.extra.push(("delocalization", t));
    }
    report.result("omega_sq", rec.chain.omega_sq());
    report.result("omega", rec.chain.omega_sq().sqrt());
    report.result("condition_number", rec.condition_number);
    report.result("physical", rec.physical);
    report.result("omega_r_sq", omega_r_sq);
    Ok(Outcome { report, tolerances: json!({ "max_condition": qthermo::mapping::MAX_CONDITION }) })
}

fn discretize(cfg: &Config) -> Result<Outcome, CliError> {
    let sd = spectral_density(cfg)?;
    let n = cfg.usize("N")?;
    let omega_max = cfg.positive("omega_max")?;
    cfg.reject_unknown()?;
    let disc = discretize_clm(&sd, n, omega_max)?;
    let mut table = Table::new(vec!["omega", "g"]);
    for (w, g) in disc.modes.omega().iter().zip(disc.modes.g()) {
        table.push(vec![*w, *g]);
    }
    let mut report = Report::new(table);
    report.warnings.extend(disc.regime_warning.clone());
    report.result("omega_r_sq", disc.omega_r_sq);
    report.result("continuum_omega_r_sq", sd.renormalization_frequency_sq()?);
    if matches!(sd, SpectralDensity::LorentzDrude { .. }) {
        let r = discretization_residual(&sd, n, omega_max)?;
        report.result("deficit", r.deficit);
        report.result("predicted_deficit", r.predicted + r.tail);
    }
    Ok(Outcome { report, tolerances: json!({}) })
}

fn heatcap(cfg: &Config) -> Result<Outcome, CliError> {
    let spec = IsingSpec::new(cfg.positive("J")?, cfg.positive("h")?, cfg.usize("N")?).map_err(config_error)?;
    let grid = TemperatureGrid::from_config(cfg)?;
    cfg.reject_unknown()?;
    let gap = spec.gap();
    let rows: qthermo::Result<Vec<Vec<f64>>> = grid
        .values()
        .par_iter()
        .map(|&t| {
            let exact = ising_heat_capacity(&spec, t, IsingMode::Exact)?;
            let asym = if gap > 0.0 && gap / t >= ISING_ASYMPTOTIC_MIN_BETA_GAP {
                ising_heat_capacity(&spec, t, IsingMode::Asymptotic)?
            } else {
                f64::NAN
            };
            Ok(vec![t, 1.0 / t, exact, asym, exact / asym])
        })
        .collect();
    let mut table = Table::new(vec!["T", "beta", "C_exact", "C_asymptotic", "ratio"]);
    for r in rows? {
        table.push(r);
    }
    let mut report = Report::new(table);
    report.result("gap", gap);
    Ok(Outcome { report, tolerances: json!({ "asymptotic_min_beta_gap": ISING_ASYMPTOTIC_MIN_BETA_GAP }) })
}

fn gap_error(cfg: &Config) -> Result<Outcome, CliError> {
    let s = cfg.positive("s")?;
    let g = cfg.f64_or("G", 1.0)?;
    let sizes = cfg.opt_usize_list("sizes")?.ok_or_else(|| CliError::Config("missing key `sizes`".into()))?;
    cfg.reject_unknown()?;
    let r = gap_error_scaling(s, g, &sizes)?;
    let mut table = Table::new(vec!["N", "xi"]);
    for (n, xi) in &r.points {
        table.push(vec![*n as f64, *xi]);
    }
    let mut report = Report::new(table);
    report.fits.push(FitSummary::new("abs_xi", &r.fit));
    Ok(Outcome { report, tolerances: json!({}) })
}
