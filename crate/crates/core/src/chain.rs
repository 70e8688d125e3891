//! Translationally invariant harmonic chains with periodic boundaries.
//!
//! A chain of `2N+1` nodes has potential matrix `V_ij = Ω² δ_ij + G_{d(i,j)}` with
//! `d` the ring distance. The normal frequencies are
//! `Ω_a² = Ω² + 2 Σ_k G_k cos(2πka/(2N+1))`, doubly degenerate for `a = 1…N`.

use std::f64::consts::PI;

use crate::error::{ensure_finite, ensure_positive, Error, Result};
use crate::fit::{fit_power_law_xy, ScalingFit};
use crate::gaussian::{
    bose_occupation, occupation_variance, qfi_from_derivatives, CovarianceDerivatives, SingleModeCovariance,
};

/// Relative gap floor used when regularizing a zero mode.
pub const GAP_FLOOR_REL: f64 = 1e-8;

/// Tolerance (relative to `max(1, Ω_max²)`) for negative squared frequencies.
pub const NEGATIVE_MODE_TOL: f64 = 1e-12;

/// Coupling families `G_n`, `n = 1…N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CouplingFamily {
    /// `G_n = G / n^s`.
    PowerLaw { g: f64, s: f64 },
    /// `G_n = G e^{−c n}`.
    Exponential { g: f64, c: f64 },
}

impl CouplingFamily {
    pub fn couplings(&self, n: usize) -> Vec<f64> {
        (1..=n)
            .map(|k| match *self {
                CouplingFamily::PowerLaw { g, s } => g * (k as f64).powf(-s),
                CouplingFamily::Exponential { g, c } => g * (-c * k as f64).exp(),
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainSpec {
    omega_sq: f64,
    couplings: Vec<f64>,
}

impl ChainSpec {
    /// Chain with `N = couplings.len()` (at least 1). Boundedness is checked by
    /// [`chain_spectrum`], so reconstructed unphysical chains remain representable.
    pub fn new(omega_sq: f64, couplings: Vec<f64>) -> Result<Self> {
        ensure_finite("omega_sq", omega_sq)?;
        if couplings.is_empty() {
            return Err(Error::InvalidParameter("a chain needs N >= 1 couplings".into()));
        }
        for g in &couplings {
            ensure_finite("coupling", *g)?;
        }
        Ok(ChainSpec { omega_sq, couplings })
    }

    /// Chain tuned so that its smallest normal frequency vanishes.
    pub fn gapless(couplings: Vec<f64>) -> Result<Self> {
        let w2 = gapless_frequency_sq(&couplings);
        Self::new(w2, couplings)
    }

    /// Chain with spectral gap `gap`, i.e. `Ω² = Ω²_gapless + gap²`.
    pub fn gapped(couplings: Vec<f64>, gap: f64) -> Result<Self> {
        ensure_finite("gap", gap)?;
        let w2 = gapless_frequency_sq(&couplings) + gap * gap;
        Self::new(w2, couplings)
    }

    /// Half-size `N`.
    pub fn n(&self) -> usize {
        self.couplings.len()
    }

    pub fn nodes(&self) -> usize {
        2 * self.n() + 1
    }

    pub fn omega_sq(&self) -> f64 {
        self.omega_sq
    }

    pub fn couplings(&self) -> &[f64] {
        &self.couplings
    }

    /// Coupling between nodes `i` and `j`, or `Ω²` on the diagonal.
    pub fn potential(&self, i: usize, j: usize) -> f64 {
        let m = self.nodes();
        let d = i.abs_diff(j) % m;
        let d = d.min(m - d);
        if d == 0 {
            self.omega_sq
        } else {
            self.couplings[d - 1]
        }
    }
}

/// `2 Σ_k G_k cos(2πka/M)` with the angle reduced exactly modulo `M`.
fn dispersion(couplings: &[f64], a: usize) -> f64 {
    let m = 2 * couplings.len() + 1;
    let mut s = 0.0;
    for (k, g) in couplings.iter().enumerate() {
        let r = ((k + 1) * a) % m;
        s += g * (2.0 * PI * r as f64 / m as f64).cos();
    }
    2.0 * s
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainSpectrum {
    /// `Ω_a²` for `a = 0…N`.
    pub non_repeated: Vec<f64>,
    /// Smallest normal frequency.
    pub gap: f64,
    /// Largest normal frequency.
    pub max_freq: f64,
}

/// Squared normal frequencies in index order `a = 0…N`.
pub fn chain_spectrum(c: &ChainSpec) -> Result<ChainSpectrum> {
    let n = c.n();
    let mut values: Vec<f64> = (0..=n).map(|a| c.omega_sq + dispersion(&c.couplings, a)).collect();
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let tol = NEGATIVE_MODE_TOL * max.abs().max(1.0);
    if min < -tol {
        return Err(Error::UnstableChain { min_sq: min });
    }
    for v in values.iter_mut() {
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    Ok(ChainSpectrum { non_repeated: values, gap: min.max(0.0).sqrt(), max_freq: max.max(0.0).sqrt() })
}

/// `Ω²` at which the spectrum touches zero: `−min_a 2Σ_k G_k cos(2πka/(2N+1))`.
///
/// For positive decreasing couplings the minimum sits at `a = N`.
pub fn gapless_frequency_sq(couplings: &[f64]) -> f64 {
    let n = couplings.len();
    -(0..=n).map(|a| dispersion(couplings, a)).fold(f64::INFINITY, f64::min)
}

/// `Σ_{n≥1} (−1)^{n−1} a(n)` by the Cohen-Rodriguez Villegas-Zagier acceleration,
/// accurate for completely monotone terms such as `n^{−s}`.
pub fn alternating_sum<F: Fn(usize) -> f64>(a: F, terms: usize) -> f64 {
    let n = terms as f64;
    let mut d = (3.0 + 8f64.sqrt()).powf(n);
    d = 0.5 * (d + 1.0 / d);
    let mut b = -1.0;
    let mut c = -d;
    let mut s = 0.0;
    for k in 0..terms {
        c = b - c;
        s += c * a(k + 1);
        let kf = k as f64;
        b *= (kf + n) * (kf - n) / ((kf + 0.5) * (kf + 1.0));
    }
    s / d
}

#[derive(Debug, Clone, PartialEq)]
pub struct GapErrorScaling {
    /// `(N, Ξ(N))`.
    pub points: Vec<(usize, f64)>,
    /// Power law of `|Ξ|` against `N`.
    pub fit: ScalingFit,
}

/// Finite-size error of the infinite-chain gapless condition for `G_n = G/n^s`:
/// `Ξ(N) = Δ²(N) − [Ω² − 2Σ_{n≥1}(−1)^{n−1} G_n]` with `Δ²(N) = Ω_N²`.
pub fn gap_error_scaling(s: f64, g: f64, n_list: &[usize]) -> Result<GapErrorScaling> {
    ensure_positive("s", s)?;
    ensure_finite("G", g)?;
    if n_list.len() < crate::fit::MIN_FIT_POINTS {
        return Err(Error::Fit(format!("need at least {} chain sizes", crate::fit::MIN_FIT_POINTS)));
    }
    if n_list[0] == 0 || n_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("chain sizes must be positive and increasing".into()));
    }
    let eta = alternating_sum(|k| (k as f64).powf(-s), 60);
    let family = CouplingFamily::PowerLaw { g, s };
    let points: Vec<(usize, f64)> = n_list
        .iter()
        .map(|&n| {
            let couplings = family.couplings(n);
            (n, dispersion(&couplings, n) + 2.0 * g * eta)
        })
        .collect();
    let xs: Vec<f64> = points.iter().map(|p| p.0 as f64).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.abs()).collect();
    let fit = fit_power_law_xy(&xs, &ys, (xs[0], xs[xs.len() - 1]))?;
    Ok(GapErrorScaling { points, fit })
}

/// Treatment of a vanishing normal frequency at the probe node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZeroModePolicy {
    Reject,
    /// Clamp frequencies below `GAP_FLOOR_REL · Ω_max` to that floor.
    Regularize,
}

/// Local thermometry of one chain node, built from the analytic circulant eigenbasis:
/// weight `1/(2N+1)` on `a = 0` and `2/(2N+1)` on each degenerate pair.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeThermometer {
    frequencies: Vec<f64>,
    weights: Vec<f64>,
}

impl NodeThermometer {
    pub fn new(c: &ChainSpec, policy: ZeroModePolicy) -> Result<Self> {
        let spec = chain_spectrum(c)?;
        let floor = GAP_FLOOR_REL * spec.max_freq;
        let m = c.nodes() as f64;
        let mut frequencies = Vec::with_capacity(spec.non_repeated.len());
        for (a, &w2) in spec.non_repeated.iter().enumerate() {
            let mut w = w2.sqrt();
            if policy == ZeroModePolicy::Regularize && w < floor {
                w = floor;
            }
            if w <= 0.0 {
                return Err(Error::ZeroMode { index: a });
            }
            frequencies.push(w);
        }
        let weights = (0..frequencies.len()).map(|a| if a == 0 { 1.0 / m } else { 2.0 / m }).collect();
        Ok(NodeThermometer { frequencies, weights })
    }

    pub fn frequencies(&self) -> &[f64] {
        &self.frequencies
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn covariances(&self, temperature: f64) -> Result<SingleModeCovariance> {
        ensure_positive("temperature", temperature)?;
        let (mut s11, mut s22) = (0.0, 0.0);
        for (&w, &p) in self.frequencies.iter().zip(&self.weights) {
            let c = 1.0 + 2.0 * bose_occupation(w / temperature);
            s11 += p * c / (2.0 * w);
            s22 += p * w * c / 2.0;
        }
        SingleModeCovariance::with_tolerance(s11, s22, 0.0, 1e-12)
    }

    pub fn derivatives(&self, temperature: f64) -> Result<CovarianceDerivatives> {
        ensure_positive("temperature", temperature)?;
        let t2 = temperature * temperature;
        let (mut a1, mut a2) = (0.0, 0.0);
        for (&w, &p) in self.frequencies.iter().zip(&self.weights) {
            let k = p * occupation_variance(w / temperature) / t2;
            a1 += k;
            a2 += k * w * w;
        }
        Ok(CovarianceDerivatives { a1, a2 })
    }

    pub fn qfi(&self, temperature: f64) -> Result<f64> {
        qfi_from_derivatives(&self.covariances(temperature)?, &self.derivatives(temperature)?)
    }
}

/// Covariances of one node; zero modes are rejected.
pub fn node_covariances(c: &ChainSpec, temperature: f64) -> Result<SingleModeCovariance> {
    NodeThermometer::new(c, ZeroModePolicy::Reject)?.covariances(temperature)
}

pub fn node_qfi(c: &ChainSpec, temperature: f64) -> Result<f64> {
    NodeThermometer::new(c, ZeroModePolicy::Reject)?.qfi(temperature)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decoupled_chain_is_flat() {
        let c = ChainSpec::new(2.0, vec![0.0; 5]).unwrap();
        let s = chain_spectrum(&c).unwrap();
        assert!(s.non_repeated.iter().all(|&v| v == 2.0));
    }

    #[test]
    fn nearest_neighbour_formula() {
        let c = ChainSpec::new(3.0, vec![0.7, 0.0, 0.0, 0.0]).unwrap();
        let s = chain_spectrum(&c).unwrap();
        for (a, v) in s.non_repeated.iter().enumerate() {
            let e = 3.0 + 1.4 * (2.0 * PI * a as f64 / 9.0).cos();
            assert!((v - e).abs() < 1e-14);
        }
    }

    #[test]
    fn single_coupling_gapless_limit() {
        let mut cs = vec![0.0; 500];
        cs[0] = 0.3;
        assert!((gapless_frequency_sq(&cs) - 0.6).abs() < 1e-5);
    }

    #[test]
    fn unstable_chain_rejected() {
        let c = ChainSpec::new(0.0, vec![1.0, 0.5]).unwrap();
        assert!(matches!(chain_spectrum(&c), Err(Error::UnstableChain { .. })));
    }

    #[test]
    fn gapless_tuning_hits_zero() {
        let cs = CouplingFamily::PowerLaw { g: 1.0, s: 2.5 }.couplings(100);
        let c = ChainSpec::gapless(cs).unwrap();
        let s = chain_spectrum(&c).unwrap();
        assert_eq!(s.gap, 0.0);
        assert!(matches!(node_covariances(&c, 1e-3), Err(Error::ZeroMode { index: 100 })));
        assert!(NodeThermometer::new(&c, ZeroModePolicy::Regularize).is_ok());
    }

    #[test]
    fn eta_values() {
        let ln2 = alternating_sum(|k| 1.0 / k as f64, 60);
        assert!((ln2 - 2f64.ln()).abs() < 1e-15);
        let eta2 = alternating_sum(|k| (k as f64).powi(-2), 60);
        assert!((eta2 - PI * PI / 12.0).abs() < 1e-15);
    }

    #[test]
    fn weights_sum_to_one() {
        let c = ChainSpec::gapped(vec![0.3, 0.1, 0.05], 0.5).unwrap();
        let t = NodeThermometer::new(&c, ZeroModePolicy::Reject).unwrap();
        assert!((t.weights().iter().sum::<f64>() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn ring_distance() {
        let c = ChainSpec::new(1.0, vec![0.1, 0.2]).unwrap();
        assert_eq!(c.potential(0, 4), 0.1);
        assert_eq!(c.potential(3, 1), 0.2);
        assert_eq!(c.potential(2, 2), 1.0);
    }
}
