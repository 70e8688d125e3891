//! Single-mode Gaussian states: covariance matrices, Uhlmann fidelity, Bures distance
//! and the quantum Fisher information for temperature.
//!
//! Units: ħ = k_B = 1. A covariance stores the excess `4 det σ − 1` next to its
//! entries; constructors that know this quantity analytically (thermal modes) keep it
//! exact, which keeps near-vacuum states free of catastrophic cancellation.

use crate::error::{ensure_finite, ensure_positive, Error, Result};

/// Tolerance on `det σ ≥ 1/4`.
pub const PHYSICALITY_TOL: f64 = 1e-12;

/// Covariance matrix of one bosonic mode with zero first moments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingleModeCovariance {
    s11: f64,
    s22: f64,
    s12: f64,
    excess: f64,
    exact_excess: bool,
}

impl SingleModeCovariance {
    /// Validates physicality with the default tolerance.
    pub fn new(s11: f64, s22: f64, s12: f64) -> Result<Self> {
        Self::with_tolerance(s11, s22, s12, PHYSICALITY_TOL)
    }

    /// Validates physicality allowing `det σ ≥ 1/4 − det_tol`.
    pub fn with_tolerance(s11: f64, s22: f64, s12: f64, det_tol: f64) -> Result<Self> {
        check_entries(s11, s22, s12)?;
        let excess = 4.0 * s11.mul_add(s22, -s12 * s12) - 1.0;
        if excess < -4.0 * det_tol {
            return Err(Error::InvalidState(format!(
                "det = {:e} violates the uncertainty bound 1/4",
                (1.0 + excess) / 4.0
            )));
        }
        Ok(SingleModeCovariance { s11, s22, s12, excess: excess.max(0.0), exact_excess: false })
    }

    /// Builds a covariance whose excess `4 det − 1` is known more accurately than the
    /// entries can represent.
    pub fn with_exact_excess(s11: f64, s22: f64, s12: f64, excess: f64) -> Result<Self> {
        check_entries(s11, s22, s12)?;
        ensure_finite("excess", excess)?;
        if excess < 0.0 {
            return Err(Error::InvalidState(format!("negative determinant excess {excess:e}")));
        }
        let computed = 4.0 * s11.mul_add(s22, -s12 * s12) - 1.0;
        let slack = 1e-12 * (1.0 + 4.0 * (s11 * s22).abs());
        if (computed - excess).abs() > slack.max(1e-9 * excess) {
            return Err(Error::InvalidState(format!(
                "excess {excess:e} inconsistent with entries (4det-1 = {computed:e})"
            )));
        }
        Ok(SingleModeCovariance { s11, s22, s12, excess, exact_excess: true })
    }

    pub fn s11(&self) -> f64 {
        self.s11
    }

    pub fn s22(&self) -> f64 {
        self.s22
    }

    pub fn s12(&self) -> f64 {
        self.s12
    }

    pub fn det(&self) -> f64 {
        0.25 * (1.0 + self.excess)
    }

    /// `4 det σ − 1`, non-negative.
    pub fn excess(&self) -> f64 {
        self.excess
    }
}

fn check_entries(s11: f64, s22: f64, s12: f64) -> Result<()> {
    for (name, v) in [("s11", s11), ("s22", s22), ("s12", s12)] {
        if !v.is_finite() {
            return Err(Error::InvalidState(format!("{name} is not finite ({v})")));
        }
    }
    if s11 <= 0.0 || s22 <= 0.0 {
        return Err(Error::InvalidState(format!("variances must be positive (s11 = {s11}, s22 = {s22})")));
    }
    Ok(())
}

/// Temperature derivatives `a1 = dσ11/dT`, `a2 = dσ22/dT`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovarianceDerivatives {
    pub a1: f64,
    pub a2: f64,
}

/// One point of a QFI temperature sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QfiSample {
    pub temperature: f64,
    pub qfi: f64,
}

impl QfiSample {
    /// Best-case single-shot relative error `1/(T √F)`.
    pub fn rel_error_single_shot(&self) -> f64 {
        1.0 / (self.temperature * self.qfi.sqrt())
    }
}

/// Sampled `(T, F_T)` data with strictly increasing temperatures.
#[derive(Debug, Clone, PartialEq)]
pub struct QfiCurve {
    samples: Vec<QfiSample>,
}

impl QfiCurve {
    pub fn new(samples: Vec<QfiSample>) -> Result<Self> {
        for s in &samples {
            ensure_positive("temperature", s.temperature)?;
            if !(s.qfi.is_finite() && s.qfi >= 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "QFI must be finite and non-negative, got {} at T = {}",
                    s.qfi, s.temperature
                )));
            }
        }
        if samples.windows(2).any(|w| w[1].temperature <= w[0].temperature) {
            return Err(Error::InvalidParameter("temperatures must be strictly increasing".into()));
        }
        Ok(QfiCurve { samples })
    }

    /// Evaluates `qfi` on each temperature of `temperatures`, which is sorted first.
    pub fn sample<F>(temperatures: &[f64], mut qfi: F) -> Result<Self>
    where
        F: FnMut(f64) -> Result<f64>,
    {
        let mut ts = temperatures.to_vec();
        ts.sort_by(f64::total_cmp);
        let samples = ts
            .into_iter()
            .map(|t| Ok(QfiSample { temperature: t, qfi: qfi(t)? }))
            .collect::<Result<Vec<_>>>()?;
        Self::new(samples)
    }

    pub fn samples(&self) -> &[QfiSample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// `1/expm1(y)`, the Bose occupation at `y = ω/T`.
#[inline]
pub fn bose_occupation(y: f64) -> f64 {
    1.0 / y.exp_m1()
}

/// `n (n + 1) = e^{-y}/(1 − e^{-y})²`, the occupation variance.
#[inline]
pub fn occupation_variance(y: f64) -> f64 {
    let em = (-y).exp_m1();
    (-y).exp() / (em * em)
}

/// `coth(x)` evaluated as `1 + 2/expm1(2x)` for `x > 0`.
#[inline]
pub fn coth(x: f64) -> f64 {
    1.0 + 2.0 / (2.0 * x).exp_m1()
}

/// Covariance of a harmonic mode of frequency `omega` in equilibrium at `temperature`.
pub fn thermal_mode_covariance(omega: f64, temperature: f64) -> Result<SingleModeCovariance> {
    ensure_positive("omega", omega)?;
    ensure_positive("temperature", temperature)?;
    let y = omega / temperature;
    let c = 1.0 + 2.0 * bose_occupation(y);
    let excess = 4.0 * occupation_variance(y);
    SingleModeCovariance::with_exact_excess(c / (2.0 * omega), omega * c / 2.0, 0.0, excess)
}

/// Analytic temperature derivatives of [`thermal_mode_covariance`].
pub fn thermal_mode_derivatives(omega: f64, temperature: f64) -> Result<CovarianceDerivatives> {
    ensure_positive("omega", omega)?;
    ensure_positive("temperature", temperature)?;
    let k = occupation_variance(omega / temperature) / (temperature * temperature);
    Ok(CovarianceDerivatives { a1: k, a2: omega * omega * k })
}

/// Uhlmann fidelity of two zero-mean single-mode Gaussian states.
pub fn uhlmann_fidelity(a: &SingleModeCovariance, b: &SingleModeCovariance) -> Result<f64> {
    let d = fidelity_defect(a, b)?;
    Ok(1.0 / (1.0 + d))
}

/// `1 − F`, computed without forming `F`.
pub fn infidelity(a: &SingleModeCovariance, b: &SingleModeCovariance) -> Result<f64> {
    let d = fidelity_defect(a, b)?;
    Ok(d / (1.0 + d))
}

/// Squared Bures distance `2(1 − √F)`.
pub fn bures_distance_sq(a: &SingleModeCovariance, b: &SingleModeCovariance) -> Result<f64> {
    let d = fidelity_defect(a, b)?;
    let f = 1.0 / (1.0 + d);
    Ok(2.0 * (d / (1.0 + d)) / (1.0 + f.sqrt()))
}

/// Returns `D` with `F = 1/(1 + D)`.
///
/// Algebraically identical to `F = 2/(√(Λ+Δ̂) − √Λ)`, rearranged so every term is
/// built from differences of the two states.
fn fidelity_defect(a: &SingleModeCovariance, b: &SingleModeCovariance) -> Result<f64> {
    let (a11, a22, a12) = (a.s11, a.s22, a.s12);
    let (b11, b22, b12) = (b.s11, b.s22, b.s12);
    let (ea, eb) = (a.excess, b.excess);
    let (u, v) = (1.0 + ea, 1.0 + eb);
    let (da, db) = (0.25 * u, 0.25 * v);
    let m = a11 * b22 + a22 * b11 - 2.0 * a12 * b12;

    let d11 = b11 - a11;
    let d22 = b22 - a22;
    let d12 = b12 - a12;
    let m11_m22 = a22 * d11 - a11 * d22;
    let m12 = a22 * d12 - a12 * d22;
    let m21 = a11 * d12 - a12 * d11;
    let disc = (m11_m22 * m11_m22 + 4.0 * m12 * m21).max(0.0);
    let p = disc / (m + 2.0 * (da * db).sqrt());

    let du = if a.exact_excess && b.exact_excess {
        ea - eb
    } else {
        4.0 * (a11 * (a22 - b22) + b22 * (a11 - b11) + d12 * (a12 + b12))
    };
    let su = u.sqrt() + v.sqrt();
    let q = (du / su) * (du / su);
    let r = (ea * eb).sqrt();
    let uv_m1 = ea + eb + ea * eb;
    let den = uv_m1 / ((u * v).sqrt() + 1.0) + r;
    let t = if den > 0.0 { q / den } else { 0.0 };
    let e = q + 4.0 * t + 4.0 * p;

    let radicand = r * r + 4.0 * (da + db + m);
    if !(radicand >= 0.0) {
        return Err(Error::NumericalDomain(format!("negative fidelity radicand {radicand:e}")));
    }
    let s = radicand.sqrt();
    let d = e / (2.0 * (s + r + 2.0));
    if !(d.is_finite() && d >= 0.0) {
        return Err(Error::NumericalDomain(format!("fidelity defect {d:e} out of range")));
    }
    Ok(d)
}

/// QFI from the symmetric difference `4(1 − F(σ(T−δ/2), σ(T+δ/2)))/δ²` with
/// `δ = step_fraction·T` and one Richardson step.
pub fn qfi_from_fidelity<F>(cov_at: F, temperature: f64, step_fraction: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<SingleModeCovariance>,
{
    let (delta, coarse) = difference_quotient(&cov_at, temperature, step_fraction)?;
    let fine = quotient(&cov_at, temperature, 0.5 * delta)?;
    Ok(((4.0 * fine - coarse) / 3.0).max(0.0))
}

/// The plain second-order difference quotient, without extrapolation.
pub fn qfi_central_difference<F>(cov_at: F, temperature: f64, step_fraction: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<SingleModeCovariance>,
{
    Ok(difference_quotient(&cov_at, temperature, step_fraction)?.1)
}

fn difference_quotient<F>(cov_at: &F, temperature: f64, step_fraction: f64) -> Result<(f64, f64)>
where
    F: Fn(f64) -> Result<SingleModeCovariance>,
{
    ensure_positive("temperature", temperature)?;
    if !(step_fraction > 0.0 && step_fraction <= 0.1) {
        return Err(Error::InvalidParameter(format!("step_fraction must lie in (0, 0.1], got {step_fraction}")));
    }
    let delta = step_fraction * temperature;
    if 0.5 * delta < 1e3 * f64::EPSILON * temperature {
        return Err(Error::StepTooSmall { delta, temperature });
    }
    Ok((delta, quotient(cov_at, temperature, delta)?))
}

fn quotient<F>(cov_at: &F, temperature: f64, delta: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<SingleModeCovariance>,
{
    let lo = cov_at(temperature - 0.5 * delta)?;
    let hi = cov_at(temperature + 0.5 * delta)?;
    Ok(4.0 * infidelity(&lo, &hi)? / (delta * delta))
}

/// QFI of a diagonal covariance family from its temperature derivatives:
/// `4(a1 a2 + 2σ11² a2² + 2σ22² a1²)/(16σ11²σ22² − 1)`.
pub fn qfi_from_derivatives(cov: &SingleModeCovariance, deriv: &CovarianceDerivatives) -> Result<f64> {
    ensure_finite("a1", deriv.a1)?;
    ensure_finite("a2", deriv.a2)?;
    if cov.s12 != 0.0 {
        return Err(Error::InvalidState("derivative formula requires s12 = 0".into()));
    }
    // 16 det² − 1 = excess (excess + 2)
    let ex = cov.excess;
    if !(ex > 0.0) {
        return Err(Error::DegenerateState("state on the minimal-uncertainty boundary".into()));
    }
    let scale = deriv.a1.abs().max(deriv.a2.abs());
    if scale == 0.0 {
        return Ok(0.0);
    }
    let (b1, b2) = (deriv.a1 / scale, deriv.a2 / scale);
    let (s11, s22) = (cov.s11, cov.s22);
    let num = 4.0 * (b1 * b2 + 2.0 * (s11 * b2) * (s11 * b2) + 2.0 * (s22 * b1) * (s22 * b1));
    let f = (scale / ex) * scale * (num / (ex + 2.0));
    if !f.is_finite() {
        return Err(Error::NumericalDomain(format!("QFI overflow (scale {scale:e}, excess {ex:e})")));
    }
    Ok(f.max(0.0))
}
