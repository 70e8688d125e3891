//! Least-squares scaling fits: power laws in log-log and exponential gaps in semilog-β.

use crate::error::{Error, Result};
use crate::gaussian::QfiCurve;

/// Minimum number of points a fit accepts.
pub const MIN_FIT_POINTS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitKind {
    /// `y = A x^p`, fitted on `(ln x, ln y)`.
    PowerLaw,
    /// `F = A e^{−Δβ}`, fitted on `(β, ln F)`; the reported value is `Δ`.
    ExponentialGap,
}

impl FitKind {
    pub fn name(&self) -> &'static str {
        match self {
            FitKind::PowerLaw => "power_law",
            FitKind::ExponentialGap => "exponential_gap",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingFit {
    pub kind: FitKind,
    pub exponent_or_gap: f64,
    pub prefactor: f64,
    pub r_squared: f64,
    /// Closed window in the fit variable (`x` for power laws, `β` for gaps).
    pub window: (f64, f64),
    pub n_points: usize,
}

/// Ordinary least squares `y = c0 + c1 x`, returning `(c0, c1, r²)`.
pub fn linear_regression(xs: &[f64], ys: &[f64]) -> Result<(f64, f64, f64)> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::Fit(format!("need matching inputs with at least 2 points, got {}", xs.len())));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (&x, &y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    if sxx == 0.0 {
        return Err(Error::Fit("abscissae are all equal".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs.iter().zip(ys).map(|(&x, &y)| (y - intercept - slope * x).powi(2)).sum();
    let r2 = if syy == 0.0 { 1.0 } else { (1.0 - ss_res / syy).clamp(0.0, 1.0) };
    Ok((intercept, slope, r2))
}

fn in_window(x: f64, window: (f64, f64)) -> bool {
    let slack = 1e-12 * window.0.abs().max(window.1.abs());
    x >= window.0 - slack && x <= window.1 + slack
}

fn check_window(window: (f64, f64)) -> Result<()> {
    if window.0.is_finite() && window.1.is_finite() && window.0 < window.1 {
        Ok(())
    } else {
        Err(Error::Fit(format!("invalid window [{}, {}]", window.0, window.1)))
    }
}

/// Power-law fit of arbitrary positive data restricted to `x ∈ window`.
pub fn fit_power_law_xy(xs: &[f64], ys: &[f64], window: (f64, f64)) -> Result<ScalingFit> {
    check_window(window)?;
    let (mut lx, mut ly) = (Vec::new(), Vec::new());
    for (&x, &y) in xs.iter().zip(ys) {
        if in_window(x, window) {
            if !(x > 0.0 && y > 0.0 && y.is_finite()) {
                return Err(Error::Fit(format!("non-positive value ({x}, {y}) in power-law window")));
            }
            lx.push(x.ln());
            ly.push(y.ln());
        }
    }
    if lx.len() < MIN_FIT_POINTS {
        return Err(Error::Fit(format!("{} points in window, need {MIN_FIT_POINTS}", lx.len())));
    }
    let (c0, c1, r2) = linear_regression(&lx, &ly)?;
    Ok(ScalingFit {
        kind: FitKind::PowerLaw,
        exponent_or_gap: c1,
        prefactor: c0.exp(),
        r_squared: r2,
        window,
        n_points: lx.len(),
    })
}

/// Log-log fit of `F_T` against `T` for `T ∈ window`.
pub fn fit_power_law(curve: &QfiCurve, window: (f64, f64)) -> Result<ScalingFit> {
    let (ts, fs): (Vec<f64>, Vec<f64>) = curve.samples().iter().map(|s| (s.temperature, s.qfi)).unzip();
    fit_power_law_xy(&ts, &fs, window)
}

/// Semilog fit of `ln F_T` against `β = 1/T` for `β ∈ beta_window`.
pub fn fit_exponential_gap(curve: &QfiCurve, beta_window: (f64, f64)) -> Result<ScalingFit> {
    check_window(beta_window)?;
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for s in curve.samples() {
        let beta = 1.0 / s.temperature;
        if in_window(beta, beta_window) {
            if !(s.qfi > 0.0) {
                return Err(Error::Fit(format!("non-positive QFI at beta = {beta}")));
            }
            xs.push(beta);
            ys.push(s.qfi.ln());
        }
    }
    if xs.len() < MIN_FIT_POINTS {
        return Err(Error::Fit(format!("{} points in window, need {MIN_FIT_POINTS}", xs.len())));
    }
    let (c0, c1, r2) = linear_regression(&xs, &ys)?;
    Ok(ScalingFit {
        kind: FitKind::ExponentialGap,
        exponent_or_gap: -c1,
        prefactor: c0.exp(),
        r_squared: r2,
        window: beta_window,
        n_points: xs.len(),
    })
}

/// `points` values log-spaced on `[lo, hi]`, endpoints included.
pub fn log_space(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    if points == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..points)
        .map(|i| {
            if i == 0 {
                lo
            } else if i + 1 == points {
                hi
            } else {
                (a + (b - a) * i as f64 / (points - 1) as f64).exp()
            }
        })
        .collect()
}
