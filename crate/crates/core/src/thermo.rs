//! Heat capacities of free-mode lattices and the transverse-field Ising chain.

use std::f64::consts::PI;

use crate::error::{ensure_positive, Error, Result};
use crate::fit::{fit_power_law_xy, ScalingFit};

/// Above this `βε` a mode contributes exactly zero.
pub const MAX_BETA_EPSILON: f64 = 700.0;

/// Smallest `βΔ` at which the low-temperature bound is asserted.
pub const LOW_T_BOUND_MIN_BETA_GAP: f64 = 4.0;

/// Smallest `βΔ` accepted by the asymptotic Ising formula.
pub const ISING_ASYMPTOTIC_MIN_BETA_GAP: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Statistics {
    Bosonic,
    Fermionic,
    /// Two-level system; same capacity as a fermionic mode.
    Qubit,
}

/// `(βε)² e^{−βε} / (1 ∓ e^{−βε})²`, `−` for bosons.
pub fn mode_heat_capacity(statistics: Statistics, epsilon: f64, temperature: f64) -> Result<f64> {
    ensure_positive("epsilon", epsilon)?;
    ensure_positive("temperature", temperature)?;
    Ok(mode_capacity_unchecked(statistics, epsilon / temperature))
}

fn mode_capacity_unchecked(statistics: Statistics, x: f64) -> f64 {
    if x > MAX_BETA_EPSILON {
        return 0.0;
    }
    match statistics {
        Statistics::Bosonic => {
            // x² e^{-x}/(1-e^{-x})² = (x / (2 sinh(x/2)))²
            let r = x / (2.0 * (0.5 * x).sinh());
            if x == 0.0 { 1.0 } else { r * r }
        }
        Statistics::Fermionic | Statistics::Qubit => {
            let r = x / (2.0 * (0.5 * x).cosh());
            r * r
        }
    }
}

/// Free modes with a common statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeSystem {
    statistics: Statistics,
    energies: Vec<f64>,
}

impl ModeSystem {
    /// Energies are sorted ascending; all must be positive.
    pub fn new(statistics: Statistics, mut energies: Vec<f64>) -> Result<Self> {
        if energies.is_empty() {
            return Err(Error::InvalidParameter("mode system needs at least one mode".into()));
        }
        for &e in &energies {
            ensure_positive("mode energy", e)?;
        }
        energies.sort_by(f64::total_cmp);
        Ok(Self { statistics, energies })
    }

    pub fn statistics(&self) -> Statistics {
        self.statistics
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    pub fn gap(&self) -> f64 {
        self.energies[0]
    }
}

/// Sum of the mode capacities.
pub fn lattice_heat_capacity(m: &ModeSystem, temperature: f64) -> Result<f64> {
    ensure_positive("temperature", temperature)?;
    Ok(m.energies.iter().map(|&e| mode_capacity_unchecked(m.statistics, e / temperature)).sum())
}

/// `N (βΔ)² e^{−βΔ} / (1 ∓ e^{−βΔ})²`, valid once `βΔ ≥ 4`.
pub fn low_temperature_bound(m: &ModeSystem, temperature: f64) -> Result<f64> {
    ensure_positive("temperature", temperature)?;
    let x = m.gap() / temperature;
    if x < LOW_T_BOUND_MIN_BETA_GAP {
        return Err(Error::AsymptoticDomain(format!(
            "beta * gap = {x} is below {LOW_T_BOUND_MIN_BETA_GAP}"
        )));
    }
    Ok(m.len() as f64 * mode_capacity_unchecked(m.statistics, x))
}

/// Power-law exponent `b` in `C ≈ A (βΔ)^b e^{−βΔ}` fitted over `βΔ ∈ window`.
pub fn gap_prefactor_exponent(m: &ModeSystem, beta_gap: &[f64], window: (f64, f64)) -> Result<ScalingFit> {
    let mut xs = Vec::with_capacity(beta_gap.len());
    let mut ys = Vec::with_capacity(beta_gap.len());
    for &x in beta_gap {
        ensure_positive("beta * gap", x)?;
        let c = lattice_heat_capacity(m, m.gap() / x)?;
        xs.push(x);
        ys.push(c * x.exp());
    }
    fit_power_law_xy(&xs, &ys, window)
}

/// Transverse-field Ising chain in its free-fermion form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IsingSpec {
    pub j: f64,
    pub h: f64,
    pub n: usize,
}

impl IsingSpec {
    pub fn new(j: f64, h: f64, n: usize) -> Result<Self> {
        ensure_positive("J", j)?;
        ensure_positive("h", h)?;
        if n < 2 {
            return Err(Error::InvalidParameter(format!("Ising chain needs N >= 2 sites, got {n}")));
        }
        Ok(Self { j, h, n })
    }

    /// `Δ = 2|h − J|`.
    pub fn gap(&self) -> f64 {
        2.0 * (self.h - self.j).abs()
    }
}

/// `ε_k = 2√(J² + h² − 2hJ cos(2πk/N))` for `k = −⌊N/2⌋ … ⌊N/2⌋−1`, in that order.
pub fn ising_spectrum(spec: &IsingSpec) -> Vec<f64> {
    let n = spec.n as i64;
    let half = n / 2;
    let d = spec.h - spec.j;
    let hj = spec.h * spec.j;
    (-half..half + n % 2)
        .map(|k| {
            let s = (PI * k as f64 / n as f64).sin();
            2.0 * (d * d + 4.0 * hj * s * s).sqrt()
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IsingMode {
    Exact,
    Asymptotic,
}

/// Exact sum of qubit capacities, or `N (βΔ)^{3/2} e^{−βΔ} √(Δ²/(8πhJ))` for `βΔ ≥ 5`.
pub fn ising_heat_capacity(spec: &IsingSpec, temperature: f64, mode: IsingMode) -> Result<f64> {
    ensure_positive("temperature", temperature)?;
    match mode {
        IsingMode::Exact => Ok(ising_spectrum(spec)
            .into_iter()
            .map(|e| if e > 0.0 { mode_capacity_unchecked(Statistics::Qubit, e / temperature) } else { 0.0 })
            .sum()),
        IsingMode::Asymptotic => {
            let gap = spec.gap();
            if gap == 0.0 {
                return Err(Error::AsymptoticDomain("critical chain (h = J) has no gap".into()));
            }
            let x = gap / temperature;
            if x < ISING_ASYMPTOTIC_MIN_BETA_GAP {
                return Err(Error::AsymptoticDomain(format!(
                    "beta * gap = {x} is below {ISING_ASYMPTOTIC_MIN_BETA_GAP}"
                )));
            }
            let amp = (gap * gap / (8.0 * PI * spec.h * spec.j)).sqrt();
            Ok(spec.n as f64 * x.powf(1.5) * (-x).exp() * amp)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_mode_limits() {
        let c = mode_heat_capacity(Statistics::Bosonic, 1.0, 1e3).unwrap();
        assert!((c - 1.0).abs() < 1e-5);
        let e = 1f64.exp();
        let c = mode_heat_capacity(Statistics::Fermionic, 1.0, 1.0).unwrap();
        assert!((c - e / ((1.0 + e) * (1.0 + e))).abs() < 1e-15);
        for s in [Statistics::Bosonic, Statistics::Fermionic, Statistics::Qubit] {
            assert!(mode_heat_capacity(s, 50.0, 1.0).unwrap() < 1e-18);
            assert_eq!(mode_heat_capacity(s, 800.0, 1.0).unwrap(), 0.0);
        }
        assert!(mode_heat_capacity(Statistics::Fermionic, 1.0, 1e6).unwrap() < 1e-12);
    }

    #[test]
    fn identical_modes_are_additive() {
        let one = mode_heat_capacity(Statistics::Bosonic, 0.7, 0.3).unwrap();
        let m = ModeSystem::new(Statistics::Bosonic, vec![0.7; 5]).unwrap();
        assert_eq!(lattice_heat_capacity(&m, 0.3).unwrap(), 5.0 * one);
    }

    #[test]
    fn ising_spectrum_range() {
        let spec = IsingSpec::new(0.5, 1.0, 10_000).unwrap();
        let eps = ising_spectrum(&spec);
        assert_eq!(eps.len(), 10_000);
        let lo = eps.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = eps.iter().copied().fold(0.0, f64::max);
        assert!((lo - 1.0).abs() < 1e-12);
        assert!((hi - 3.0).abs() < 1e-12);
    }

    #[test]
    fn asymptotic_domain_gate() {
        let spec = IsingSpec::new(0.5, 1.0, 100).unwrap();
        assert!(matches!(ising_heat_capacity(&spec, 0.5, IsingMode::Asymptotic), Err(Error::AsymptoticDomain(_))));
        let crit = IsingSpec::new(1.0, 1.0, 100).unwrap();
        assert!(ising_heat_capacity(&crit, 0.01, IsingMode::Asymptotic).is_err());
        assert!(ising_heat_capacity(&crit, 0.01, IsingMode::Exact).unwrap() >= 0.0);
    }
}
