//! Spectral densities of Ohmic reservoirs, the renormalization frequency, the
//! principal-value self-energy and the probe susceptibility, plus discretization of a
//! continuous reservoir into a finite star of modes.
//!
//! Convention: `ω_R² = (1/π)∫₀^∞ J(ω)/ω dω` and
//! `S(ω) = (1/π) P∫₀^∞ J(ω′) ω′/(ω′² − ω²) dω′`, so that `S(0) = ω_R²` and
//! `Re α(0) = ω₀²` exactly.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::error::{ensure_non_negative, ensure_positive, Error, Result};
use crate::quad::{half_line_segments, Quadrature, Segment};

/// Smallest Ohmicity `s` accepted for the exponential-cutoff family; below it the
/// renormalization integral is treated as divergent.
pub const MIN_OHMICITY: f64 = 1e-2;

/// Default relative tolerance for principal-value integrals.
pub const PV_TOL: f64 = 1e-10;

/// Dimensionless cutoff `f` of a generic Ohmic density `J = γ ω f(ω/ω_c)`.
#[derive(Clone)]
pub struct CutoffFn(Arc<dyn Fn(f64) -> f64 + Send + Sync>);

impl CutoffFn {
    pub fn new<F: Fn(f64) -> f64 + Send + Sync + 'static>(f: F) -> Self {
        CutoffFn(Arc::new(f))
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        (self.0)(x)
    }
}

impl fmt::Debug for CutoffFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("CutoffFn(..)")
    }
}

/// Finite list of bath modes `(ω_n, g_n)` with strictly increasing `ω_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteModes {
    omega: Vec<f64>,
    g: Vec<f64>,
}

impl DiscreteModes {
    pub fn new(omega: Vec<f64>, g: Vec<f64>) -> Result<Self> {
        if omega.is_empty() || omega.len() != g.len() {
            return Err(Error::InvalidParameter(format!(
                "need a non-empty mode list with matching lengths ({} frequencies, {} couplings)",
                omega.len(),
                g.len()
            )));
        }
        for (&w, &c) in omega.iter().zip(&g) {
            ensure_positive("mode frequency", w)?;
            ensure_non_negative("mode coupling", c)?;
        }
        if omega.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter("mode frequencies must be strictly increasing".into()));
        }
        Ok(DiscreteModes { omega, g })
    }

    pub fn omega(&self) -> &[f64] {
        &self.omega
    }

    pub fn g(&self) -> &[f64] {
        &self.g
    }

    pub fn len(&self) -> usize {
        self.omega.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omega.is_empty()
    }

    /// `Σ g_n²/ω_n²`.
    pub fn renormalization(&self) -> f64 {
        self.omega.iter().zip(&self.g).map(|(w, g)| (g / w) * (g / w)).sum()
    }

    /// Local spacing: symmetric in the bulk, one-sided at the ends.
    fn spacing(&self, i: usize) -> f64 {
        let w = &self.omega;
        let n = w.len();
        if n == 1 {
            w[0]
        } else if i == 0 {
            w[1] - w[0]
        } else if i == n - 1 {
            w[n - 1] - w[n - 2]
        } else {
            0.5 * (w[i + 1] - w[i - 1])
        }
    }

    /// Kernel estimates `Ĵ(ω_i) = π g_i²/(ω_i δω_i)`.
    pub fn density_estimates(&self) -> Vec<(f64, f64)> {
        (0..self.len())
            .map(|i| {
                let (w, g) = (self.omega[i], self.g[i]);
                (w, PI * g * g / (w * self.spacing(i)))
            })
            .collect()
    }
}

/// Reservoir spectral density `J(ω)`.
#[derive(Debug, Clone)]
pub enum SpectralDensity {
    /// `J = 2γω ω_c²/(ω² + ω_c²)`.
    LorentzDrude { gamma: f64, omega_c: f64 },
    /// `J = (γπ/2) ω^s ω_c^{1−s} e^{−ω/ω_c}`.
    ExponentialCutoff { gamma: f64, omega_c: f64, s: f64 },
    /// `J = γ ω f(ω/ω_c)` with `f(0) = 1`.
    GenericOhmic { gamma: f64, omega_c: f64, cutoff: CutoffFn },
    Discrete(DiscreteModes),
}

impl SpectralDensity {
    pub fn lorentz_drude(gamma: f64, omega_c: f64) -> Result<Self> {
        ensure_positive("gamma", gamma)?;
        ensure_positive("omega_c", omega_c)?;
        Ok(SpectralDensity::LorentzDrude { gamma, omega_c })
    }

    pub fn exponential_cutoff(gamma: f64, omega_c: f64, s: f64) -> Result<Self> {
        ensure_positive("gamma", gamma)?;
        ensure_positive("omega_c", omega_c)?;
        ensure_positive("s", s)?;
        Ok(SpectralDensity::ExponentialCutoff { gamma, omega_c, s })
    }

    pub fn generic_ohmic(gamma: f64, omega_c: f64, cutoff: CutoffFn) -> Result<Self> {
        ensure_positive("gamma", gamma)?;
        ensure_positive("omega_c", omega_c)?;
        let f0 = cutoff.eval(0.0);
        if (f0 - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!("cutoff must satisfy f(0) = 1, got {f0}")));
        }
        Ok(SpectralDensity::GenericOhmic { gamma, omega_c, cutoff })
    }

    pub fn discrete(modes: DiscreteModes) -> Self {
        SpectralDensity::Discrete(modes)
    }

    pub fn is_discrete(&self) -> bool {
        matches!(self, SpectralDensity::Discrete(_))
    }

    /// Cutoff frequency of a continuous model; the top mode frequency of a discrete one.
    pub fn cutoff(&self) -> f64 {
        match self {
            SpectralDensity::LorentzDrude { omega_c, .. }
            | SpectralDensity::ExponentialCutoff { omega_c, .. }
            | SpectralDensity::GenericOhmic { omega_c, .. } => *omega_c,
            SpectralDensity::Discrete(m) => *m.omega.last().unwrap(),
        }
    }

    /// `J′(0)`, or `None` when it is not finite and positive.
    pub fn ohmic_slope(&self) -> Option<f64> {
        match self {
            SpectralDensity::LorentzDrude { gamma, .. } => Some(2.0 * gamma),
            SpectralDensity::ExponentialCutoff { gamma, s, .. } if *s == 1.0 => Some(0.5 * PI * gamma),
            SpectralDensity::GenericOhmic { gamma, .. } => Some(*gamma),
            _ => None,
        }
    }

    /// Continuous evaluation; callers have already checked `ω ≥ 0`.
    #[inline]
    fn j(&self, w: f64) -> f64 {
        match self {
            SpectralDensity::LorentzDrude { gamma, omega_c } => {
                2.0 * gamma * w * omega_c * omega_c / (w * w + omega_c * omega_c)
            }
            SpectralDensity::ExponentialCutoff { gamma, omega_c, s } => {
                if w == 0.0 {
                    0.0
                } else {
                    let x = w / omega_c;
                    0.5 * PI * gamma * omega_c * x.powf(*s) * (-x).exp()
                }
            }
            SpectralDensity::GenericOhmic { gamma, omega_c, cutoff } => gamma * w * cutoff.eval(w / omega_c),
            SpectralDensity::Discrete(_) => unreachable!("discrete densities use estimates"),
        }
    }

    /// `J(ω)/ω`, finite at `ω = 0` for Ohmic and super-Ohmic models.
    #[inline]
    fn j_over_omega(&self, w: f64) -> f64 {
        match self {
            SpectralDensity::LorentzDrude { gamma, omega_c } => {
                2.0 * gamma * omega_c * omega_c / (w * w + omega_c * omega_c)
            }
            SpectralDensity::ExponentialCutoff { gamma, omega_c, s } => {
                let x = w / omega_c;
                0.5 * PI * gamma * x.powf(s - 1.0) * (-x).exp()
            }
            SpectralDensity::GenericOhmic { gamma, omega_c, cutoff } => gamma * cutoff.eval(w / omega_c),
            SpectralDensity::Discrete(_) => unreachable!("discrete densities use estimates"),
        }
    }

    /// Evaluates `J(ω)`; for discrete models a linear interpolation of the kernel
    /// estimates inside `[ω_1, ω_N]`.
    pub fn evaluate(&self, omega: f64) -> Result<f64> {
        ensure_non_negative("omega", omega)?;
        match self {
            SpectralDensity::Discrete(m) => {
                let est = m.density_estimates();
                let (lo, hi) = (est[0].0, est[est.len() - 1].0);
                if omega < lo || omega > hi {
                    return Err(Error::OutsideSupport { omega, lo, hi });
                }
                let k = est.partition_point(|e| e.0 < omega);
                if est[k].0 == omega {
                    return Ok(est[k].1);
                }
                let (w0, j0) = est[k - 1];
                let (w1, j1) = est[k];
                Ok(j0 + (j1 - j0) * (omega - w0) / (w1 - w0))
            }
            _ => Ok(self.j(omega)),
        }
    }

    /// `ω_R² = (1/π)∫₀^∞ J/ω`, or `Σ g²/ω²` for discrete models.
    pub fn renormalization_frequency_sq(&self) -> Result<f64> {
        match self {
            SpectralDensity::LorentzDrude { gamma, omega_c } => Ok(gamma * omega_c),
            SpectralDensity::ExponentialCutoff { gamma, omega_c, s } => {
                if *s < MIN_OHMICITY {
                    return Err(Error::Divergence(format!(
                        "sub-Ohmic s = {s} below {MIN_OHMICITY}: renormalization integral treated as divergent"
                    )));
                }
                Ok(0.5 * gamma * omega_c * statrs::function::gamma::gamma(*s))
            }
            SpectralDensity::GenericOhmic { gamma, omega_c, cutoff } => {
                let q = Quadrature::new(1e-12, 0.0);
                let r = q
                    .integrate(
                        "cutoff integral",
                        |x| cutoff.eval(x),
                        &[Segment::Linear(0.0, 1.0), Segment::Log(1.0, 100.0), Segment::Tail(100.0)],
                    )
                    .map_err(|e| Error::Divergence(format!("renormalization integral: {e}")))?;
                Ok(gamma * omega_c * r.value / PI)
            }
            SpectralDensity::Discrete(m) => Ok(m.renormalization()),
        }
    }

    /// Self-energy `S(ω)`: closed form for Lorentz-Drude, pole sum for discrete
    /// models, numerical principal value otherwise.
    pub fn self_energy(&self, omega: f64) -> Result<f64> {
        ensure_non_negative("omega", omega)?;
        match self {
            SpectralDensity::LorentzDrude { gamma, omega_c } => {
                let c2 = omega_c * omega_c;
                Ok(gamma * omega_c * c2 / (omega * omega + c2))
            }
            SpectralDensity::Discrete(m) => {
                let mut s = 0.0;
                for (&w, &g) in m.omega.iter().zip(&m.g) {
                    let d = (w - omega) * (w + omega);
                    if d.abs() <= 1e-12 * w * w {
                        return Err(Error::Pole { omega });
                    }
                    s += g * g / d;
                }
                Ok(s)
            }
            _ => self.self_energy_pv(omega, PV_TOL),
        }
    }

    /// Principal value `(1/π)∫₀^∞ [J(ω′)ω′ − J(ω)ω]/(ω′² − ω²) dω′` by adaptive
    /// quadrature, for any continuous model.
    pub fn self_energy_pv(&self, omega: f64, rel_tol: f64) -> Result<f64> {
        ensure_non_negative("omega", omega)?;
        if self.is_discrete() {
            return Err(Error::InvalidParameter("numerical principal value needs a continuous density".into()));
        }
        let jw = self.j(omega) * omega;
        let f = |x: f64| {
            if omega == 0.0 {
                self.j_over_omega(x)
            } else {
                (self.j(x) * x - jw) / ((x - omega) * (x + omega))
            }
        };
        let scale = self.renormalization_frequency_sq()?;
        let q = Quadrature::new(rel_tol, 1e-3 * rel_tol * PI * scale);
        let r = q.integrate("self-energy", f, &self.pv_segments(omega))?;
        Ok(r.value / PI)
    }

    /// `ω_R² − S(ω) = −(ω²/π) ∫₀^∞ [J(ω′)/ω′ − J(ω)/ω]/(ω′² − ω²) dω′`.
    ///
    /// Evaluated directly so the small-ω behaviour `O(ω²)` carries no cancellation.
    pub fn frequency_shift(&self, omega: f64) -> Result<f64> {
        ensure_non_negative("omega", omega)?;
        match self {
            SpectralDensity::LorentzDrude { gamma, omega_c } => {
                let w2 = omega * omega;
                Ok(gamma * omega_c * w2 / (w2 + omega_c * omega_c))
            }
            SpectralDensity::Discrete(m) => {
                Ok(m.renormalization() - self.self_energy(omega)?)
            }
            _ => {
                if omega == 0.0 {
                    return Ok(0.0);
                }
                let jw = self.j_over_omega(omega);
                let f = |x: f64| (self.j_over_omega(x) - jw) / ((x - omega) * (x + omega));
                let scale = self.renormalization_frequency_sq()?;
                let q = Quadrature::new(PV_TOL, 1e-3 * PV_TOL * PI * scale / (omega * omega).max(1e-300));
                let r = q.integrate("frequency shift", f, &self.pv_segments(omega))?;
                Ok(-omega * omega * r.value / PI)
            }
        }
    }

    fn pv_segments(&self, omega: f64) -> Vec<Segment> {
        let c = self.cutoff();
        let mut pts = vec![0.1 * c, c, 10.0 * c];
        if omega > 0.0 {
            pts.extend([0.5 * omega, omega, 2.0 * omega]);
        }
        half_line_segments(0.0, &pts)
    }
}

/// Probe plus reservoir: `H = p²/2 + (ω₀² + ω_R²) q²/2 + bath`.
#[derive(Debug, Clone)]
pub struct StarSpec {
    omega0_sq: f64,
    omega_r_sq: f64,
    sd: SpectralDensity,
}

impl StarSpec {
    /// Uses the renormalization implied by `sd`.
    pub fn new(omega0_sq: f64, sd: SpectralDensity) -> Result<Self> {
        let omega_r_sq = sd.renormalization_frequency_sq()?;
        Self::with_renormalization(omega0_sq, omega_r_sq, sd)
    }

    pub fn with_renormalization(omega0_sq: f64, omega_r_sq: f64, sd: SpectralDensity) -> Result<Self> {
        ensure_non_negative("omega0_sq", omega0_sq)?;
        ensure_non_negative("omega_R_sq", omega_r_sq)?;
        if omega0_sq + omega_r_sq <= 0.0 {
            return Err(Error::InvalidParameter("total trapping omega0^2 + omega_R^2 must be positive".into()));
        }
        if let SpectralDensity::Discrete(m) = &sd {
            let sum = m.renormalization();
            if (sum - omega_r_sq).abs() > 1e-10 * sum.max(omega_r_sq) {
                return Err(Error::InvalidParameter(format!(
                    "omega_R^2 = {omega_r_sq} differs from the mode sum {sum}"
                )));
            }
        }
        Ok(StarSpec { omega0_sq, omega_r_sq, sd })
    }

    pub fn omega0_sq(&self) -> f64 {
        self.omega0_sq
    }

    pub fn omega_r_sq(&self) -> f64 {
        self.omega_r_sq
    }

    pub fn spectral_density(&self) -> &SpectralDensity {
        &self.sd
    }

    /// `Re α(ω) = ω₀² + ω_R² − ω² − S(ω)`.
    pub fn susceptibility_re(&self, omega: f64) -> Result<f64> {
        let detuning = self.omega_r_sq - self.sd.renormalization_frequency_sq()?;
        Ok(self.omega0_sq + detuning + self.sd.frequency_shift(omega)? - omega * omega)
    }
}

/// `|α(ω)|²` with `α = ω₀² + ω_R² − ω² − S(ω) − iJ(ω)`.
pub fn susceptibility_abs_sq(star: &StarSpec, omega: f64) -> Result<f64> {
    if star.sd.is_discrete() {
        return Err(Error::InvalidParameter("susceptibility needs a continuous density".into()));
    }
    let re = star.susceptibility_re(omega)?;
    let im = star.sd.evaluate(omega)?;
    Ok(re * re + im * im)
}

/// A discretized reservoir.
#[derive(Debug, Clone)]
pub struct Discretization {
    pub modes: DiscreteModes,
    /// `Σ g_n²/ω_n²`.
    pub omega_r_sq: f64,
    /// Set when `N ≤ ω_max/ω_c`.
    pub regime_warning: Option<String>,
}

impl Discretization {
    pub fn into_star(self, omega0_sq: f64) -> Result<StarSpec> {
        StarSpec::with_renormalization(omega0_sq, self.omega_r_sq, SpectralDensity::Discrete(self.modes))
    }
}

/// Uniform modes `ω_n = n ω_max/N` with `g_n² = (ω_n/π)∫ J` over `(n ± ½) ω_max/N`.
pub fn discretize_clm(sd: &SpectralDensity, n: usize, omega_max: f64) -> Result<Discretization> {
    if sd.is_discrete() {
        return Err(Error::InvalidParameter("cannot discretize a discrete density".into()));
    }
    if n == 0 {
        return Err(Error::InvalidParameter("N must be at least 1".into()));
    }
    ensure_positive("omega_max", omega_max)?;
    let wc = sd.cutoff();
    if omega_max <= wc {
        return Err(Error::InvalidParameter(format!("omega_max = {omega_max} must exceed omega_c = {wc}")));
    }
    let a = omega_max / n as f64;
    let quad = Quadrature::new(1e-12, 0.0);
    let mut omega = Vec::with_capacity(n);
    let mut g = Vec::with_capacity(n);
    for k in 1..=n {
        let w = k as f64 * a;
        let (lo, hi) = ((k as f64 - 0.5) * a, (k as f64 + 0.5) * a);
        let integral = match sd {
            SpectralDensity::LorentzDrude { gamma, omega_c } => {
                let c2 = omega_c * omega_c;
                gamma * c2 * ((hi * hi + c2) / (lo * lo + c2)).ln()
            }
            _ => quad.integrate("bin integral", |x| sd.j(x), &[Segment::Linear(lo, hi)])?.value,
        };
        omega.push(w);
        g.push((w * integral / PI).sqrt());
    }
    let modes = DiscreteModes::new(omega, g)?;
    let omega_r_sq = modes.renormalization();
    let regime_warning = if (n as f64) <= omega_max / wc {
        Some(format!("N = {n} does not exceed omega_max/omega_c = {}", omega_max / wc))
    } else {
        None
    };
    Ok(Discretization { modes, omega_r_sq, regime_warning })
}

/// Shortfall of the discretized renormalization against the continuum value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscretizationResidual {
    /// `γω_c − Σ g_n²/ω_n²`.
    pub deficit: f64,
    /// Leading bin-width term `γω_c · ω_max/(π N ω_c)`.
    pub predicted: f64,
    /// Spectral weight above the grid, `(2γω_c/π)(π/2 − arctan(ω_max/ω_c))`.
    pub tail: f64,
}

/// Residual of [`discretize_clm`] for a Lorentz-Drude density.
pub fn discretization_residual(sd: &SpectralDensity, n: usize, omega_max: f64) -> Result<DiscretizationResidual> {
    let SpectralDensity::LorentzDrude { gamma, omega_c } = *sd else {
        return Err(Error::InvalidParameter("discretization residual is defined for Lorentz-Drude only".into()));
    };
    let d = discretize_clm(sd, n, omega_max)?;
    let a = omega_max / (n as f64 * omega_c);
    Ok(DiscretizationResidual {
        deficit: gamma * omega_c - d.omega_r_sq,
        predicted: gamma * omega_c * a / PI,
        tail: 2.0 * gamma * omega_c / PI * (0.5 * PI - (omega_max / omega_c).atan()),
    })
}
