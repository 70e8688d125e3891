//! Exact steady state of a Brownian probe coupled linearly to an Ohmic reservoir
//! (Caldeira-Leggett model):
//!
//! `σ11 = (1/π)∫ J/|α|² coth(ω/2T) dω`, `σ22 = (1/π)∫ ω² J/|α|² coth(ω/2T) dω`,
//! integrated from the infrared cutoff `ω_min` (0 means none) to infinity.
//!
//! `coth = 1 + 2n` splits each integral into a temperature-independent vacuum part and
//! a thermal part weighted by the Bose occupation `n`. The vacuum part is computed
//! once per probe, so finite differences in `T` see only the thermal part.

use std::f64::consts::PI;

use crate::error::{ensure_non_negative, ensure_positive, Error, Result};
use crate::gaussian::{
    bose_occupation, occupation_variance, qfi_from_derivatives, qfi_from_fidelity, CovarianceDerivatives,
    SingleModeCovariance,
};
use crate::quad::{half_line_segments, Quadrature, Segment};
use crate::spectral::StarSpec;

pub const DEFAULT_QUAD_TOL: f64 = 1e-9;

/// Tolerance on `det σ ≥ 1/4` for steady states, allowing for quadrature error.
pub const STEADY_STATE_DET_TOL: f64 = 1e-9;

/// Default step fraction for the fidelity route.
pub const DEFAULT_STEP_FRACTION: f64 = 1e-3;

#[derive(Debug, Clone)]
pub struct SteadyStateQuery {
    pub star: StarSpec,
    pub temperature: f64,
    pub omega_min: f64,
    pub quad_tol: f64,
}

impl SteadyStateQuery {
    pub fn new(star: StarSpec, temperature: f64) -> Self {
        SteadyStateQuery { star, temperature, omega_min: 0.0, quad_tol: DEFAULT_QUAD_TOL }
    }

    pub fn with_omega_min(mut self, omega_min: f64) -> Self {
        self.omega_min = omega_min;
        self
    }

    pub fn with_quad_tol(mut self, quad_tol: f64) -> Self {
        self.quad_tol = quad_tol;
        self
    }

    fn probe(&self) -> Result<ClmProbe> {
        ensure_positive("temperature", self.temperature)?;
        ClmProbe::new(&self.star, self.omega_min, self.quad_tol)
    }
}

pub fn steady_covariances(q: &SteadyStateQuery) -> Result<SingleModeCovariance> {
    q.probe()?.covariances(q.temperature)
}

pub fn covariance_t_derivatives(q: &SteadyStateQuery) -> Result<CovarianceDerivatives> {
    q.probe()?.derivatives(q.temperature)
}

/// QFI through the derivative formula.
pub fn clm_qfi(q: &SteadyStateQuery) -> Result<f64> {
    q.probe()?.qfi(q.temperature)
}

/// QFI through finite differences of the fidelity.
pub fn clm_qfi_fidelity_route(q: &SteadyStateQuery, step_fraction: f64) -> Result<f64> {
    q.probe()?.qfi_fidelity_route(q.temperature, step_fraction)
}

/// Steady-state probe for a fixed reservoir and infrared cutoff.
///
/// Holds the integration breakpoints and the vacuum integrals; temperature sweeps reuse
/// one instance.
#[derive(Debug, Clone)]
pub struct ClmProbe {
    star: StarSpec,
    omega_min: f64,
    quad_tol: f64,
    breakpoints: Vec<f64>,
    resonance: Option<f64>,
    vacuum: (f64, f64),
}

impl ClmProbe {
    pub fn new(star: &StarSpec, omega_min: f64, quad_tol: f64) -> Result<Self> {
        ensure_non_negative("omega_min", omega_min)?;
        if !(quad_tol > 0.0 && quad_tol < 1e-2) {
            return Err(Error::InvalidParameter(format!("quad_tol must lie in (0, 1e-2), got {quad_tol}")));
        }
        let sd = star.spectral_density();
        if sd.is_discrete() {
            return Err(Error::InvalidParameter("steady-state integrals need a continuous density".into()));
        }
        if star.omega0_sq() == 0.0 && omega_min == 0.0 {
            return Err(Error::Divergence("omega0 = 0 requires an infrared cutoff omega_min > 0".into()));
        }
        let resonance = find_resonance(star)?;
        let mut breakpoints = vec![sd.cutoff(), 10.0 * sd.cutoff()];
        let slope = sd.ohmic_slope();
        if let Some(k) = slope {
            breakpoints.push(k);
            if star.omega0_sq() > 0.0 {
                breakpoints.push(star.omega0_sq() / k);
            }
        }
        if star.omega0_sq() > 0.0 {
            breakpoints.push(star.omega0_sq().sqrt());
        }
        if let Some(wr) = resonance {
            breakpoints.push(wr);
            let rel = sd.evaluate(wr)? / (2.0 * wr * wr);
            let mut w = rel;
            while w > 0.0 && w <= 0.5 {
                breakpoints.push(wr * (1.0 - w));
                breakpoints.push(wr * (1.0 + w));
                w *= 10.0;
            }
        }
        let mut probe = ClmProbe {
            star: star.clone(),
            omega_min,
            quad_tol,
            breakpoints,
            resonance,
            vacuum: (0.0, 0.0),
        };
        let segs = probe.segments(None);
        let v11 = probe.integrate("vacuum sigma11", |_, k| k, &segs)?;
        let v22 = probe.integrate("vacuum sigma22", |w, k| w * w * k, &segs)?;
        probe.vacuum = (v11, v22);
        Ok(probe)
    }

    pub fn star(&self) -> &StarSpec {
        &self.star
    }

    pub fn omega_min(&self) -> f64 {
        self.omega_min
    }

    /// Root of `Re α(ω) = 0`, when the probe is trapped.
    pub fn resonance(&self) -> Option<f64> {
        self.resonance
    }

    /// Zero-temperature covariances `(σ11, σ22)`.
    pub fn vacuum(&self) -> (f64, f64) {
        self.vacuum
    }

    fn segments(&self, temperature: Option<f64>) -> Vec<Segment> {
        let mut pts = self.breakpoints.clone();
        if let Some(t) = temperature {
            pts.extend([t, 10.0 * t, 40.0 * t]);
        }
        half_line_segments(self.omega_min, &pts)
    }

    /// `(1/π)∫ g(ω, J/|α|²)` over `[ω_min, ∞)`.
    fn integrate<G>(&self, what: &str, g: G, segs: &[Segment]) -> Result<f64>
    where
        G: Fn(f64, f64) -> f64,
    {
        let sd = self.star.spectral_density();
        let detuning = self.star.omega_r_sq() - sd.renormalization_frequency_sq()?;
        let w0 = self.star.omega0_sq() + detuning;
        let kernel = |w: f64| -> f64 {
            let j = sd.evaluate(w).unwrap_or(f64::NAN);
            let re = w0 + sd.frequency_shift(w).unwrap_or(f64::NAN) - w * w;
            let k = j / (re * re + j * j);
            if j == 0.0 {
                0.0
            } else {
                g(w, k)
            }
        };
        let q = Quadrature::new(self.quad_tol, 0.0);
        Ok(q.integrate(what, kernel, segs)?.value / PI)
    }

    pub fn covariances(&self, temperature: f64) -> Result<SingleModeCovariance> {
        ensure_positive("temperature", temperature)?;
        let segs = self.segments(Some(temperature));
        let n = |w: f64| bose_occupation(w / temperature);
        let t11 = self.integrate("thermal sigma11", |w, k| 2.0 * k * n(w), &segs)?;
        let t22 = self.integrate("thermal sigma22", |w, k| 2.0 * w * w * k * n(w), &segs)?;
        let (s11, s22) = (self.vacuum.0 + t11, self.vacuum.1 + t22);
        SingleModeCovariance::with_tolerance(s11, s22, 0.0, STEADY_STATE_DET_TOL).map_err(|e| {
            Error::InvalidState(format!("steady state at T = {temperature}: {e}"))
        })
    }

    /// Differentiates under the integral with `d coth(ω/2T)/dT = 2ω n(n+1)/T²`.
    pub fn derivatives(&self, temperature: f64) -> Result<CovarianceDerivatives> {
        ensure_positive("temperature", temperature)?;
        let segs = self.segments(Some(temperature));
        let t2 = temperature * temperature;
        let dk = |w: f64| 2.0 * w * occupation_variance(w / temperature) / t2;
        let a1 = self.integrate("d sigma11/dT", |w, k| k * dk(w), &segs)?;
        let a2 = self.integrate("d sigma22/dT", |w, k| w * w * k * dk(w), &segs)?;
        Ok(CovarianceDerivatives { a1, a2 })
    }

    pub fn qfi(&self, temperature: f64) -> Result<f64> {
        let cov = self.covariances(temperature)?;
        let d = self.derivatives(temperature)?;
        qfi_from_derivatives(&cov, &d)
    }

    pub fn qfi_fidelity_route(&self, temperature: f64, step_fraction: f64) -> Result<f64> {
        qfi_from_fidelity(|t| self.covariances(t), temperature, step_fraction)
    }
}

/// Bisection for the root of `Re α`, which starts at `ω₀² > 0` and eventually turns
/// negative.
fn find_resonance(star: &StarSpec) -> Result<Option<f64>> {
    let re0 = star.susceptibility_re(0.0)?;
    if re0 <= 0.0 {
        return Ok(None);
    }
    let mut hi = 2.0 * (star.omega0_sq() + star.omega_r_sq()).sqrt().max(1e-300);
    let mut lo = 0.0;
    let mut tries = 0;
    while star.susceptibility_re(hi)? >= 0.0 {
        lo = hi;
        hi *= 2.0;
        tries += 1;
        if tries > 200 {
            return Ok(None);
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if star.susceptibility_re(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Some(0.5 * (lo + hi)))
}

/// One point of the infrared-cutoff sequence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FreeProbePoint {
    pub omega_min: f64,
    pub covariance: SingleModeCovariance,
    pub qfi: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FreeProbeLimit {
    /// `F(ω_min → 0)` from a linear fit in `ω_min` over the last three points.
    pub limit_estimate: f64,
    pub sequence: Vec<FreeProbePoint>,
}

/// Geometric sequence `start, start/10, …` with `count` entries.
pub fn default_omega_min_sequence(start: f64, count: usize) -> Vec<f64> {
    (0..count).map(|k| start / 10f64.powi(k as i32)).collect()
}

/// QFI of an untrapped probe (`ω₀ = 0`) in the limit of vanishing infrared cutoff.
pub fn free_probe_qfi_limit(
    star: &StarSpec,
    temperature: f64,
    omega_min_sequence: &[f64],
    quad_tol: f64,
) -> Result<FreeProbeLimit> {
    if star.omega0_sq() != 0.0 {
        return Err(Error::InvalidParameter("free-probe limit needs omega0 = 0".into()));
    }
    ensure_positive("temperature", temperature)?;
    if omega_min_sequence.len() < 3 {
        return Err(Error::InvalidParameter("need at least three infrared cutoffs".into()));
    }
    for w in omega_min_sequence {
        ensure_positive("omega_min", *w)?;
    }
    if omega_min_sequence.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidParameter("omega_min sequence must be strictly decreasing".into()));
    }
    let mut sequence = Vec::with_capacity(omega_min_sequence.len());
    for &w in omega_min_sequence {
        let probe = ClmProbe::new(star, w, quad_tol)?;
        let covariance = probe.covariances(temperature)?;
        let qfi = qfi_from_derivatives(&covariance, &probe.derivatives(temperature)?)?;
        sequence.push(FreeProbePoint { omega_min: w, covariance, qfi });
    }
    let k = sequence.len();
    let diffs: Vec<f64> = sequence.windows(2).map(|p| (p[1].qfi - p[0].qfi).abs()).collect();
    let last = diffs[diffs.len() - 1];
    let prev = diffs[diffs.len() - 2];
    if !(last < prev && last <= 0.1 * sequence[k - 1].qfi) {
        return Err(Error::Convergence(format!(
            "QFI increments {prev:e}, {last:e} do not shrink along the omega_min sequence"
        )));
    }
    let tail = &sequence[k - 3..];
    let xs: Vec<f64> = tail.iter().map(|p| p.omega_min).collect();
    let ys: Vec<f64> = tail.iter().map(|p| p.qfi).collect();
    let (intercept, _, _) = crate::fit::linear_regression(&xs, &ys)?;
    Ok(FreeProbeLimit { limit_estimate: intercept, sequence })
}
