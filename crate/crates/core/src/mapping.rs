//! Chain ↔ star mappings.
//!
//! Chain → star: remove the probe row and column of the circulant potential, diagonalize
//! the remaining Toeplitz block and project the probe couplings onto its eigenvectors.
//!
//! Star → chain: a chain whose non-repeated normal frequencies match those of the star
//! solves `A G⃗ = Ω⃗` with `A_jk = cos(2πjk/(2N+1))`, giving `Ω² = G⃗₀` and `G_n = G⃗_n/2`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::chain::{chain_spectrum, ChainSpec, CouplingFamily};
use crate::error::{Error, Result};
use crate::spectral::{DiscreteModes, SpectralDensity, StarSpec};

/// Relative width of a degenerate eigenvalue cluster.
pub const CLUSTER_REL_WIDTH: f64 = 1e-8;

/// Couplings at or below this fraction of the largest one count as decoupled.
pub const DECOUPLED_REL: f64 = 1e-10;

/// Largest acceptable condition estimate of the cosine system.
pub const MAX_CONDITION: f64 = 1e12;

/// Probe coupled to independent modes, obtained from a chain.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveStar {
    pub probe_omega_sq: f64,
    /// `(ω_i, g_i)` sorted by frequency, `g_i ≥ 0` aggregated per degenerate cluster.
    pub coupled_modes: Vec<(f64, f64)>,
    pub decoupled_count: usize,
    pub warnings: Vec<String>,
}

impl EffectiveStar {
    /// `Σ g_i²/ω_i²` over the coupled modes.
    pub fn renormalization(&self) -> f64 {
        self.coupled_modes.iter().map(|(w, g)| (g / w) * (g / w)).sum()
    }

    /// The coupled modes as a discrete spectral density.
    pub fn spectral_density(&self) -> Result<SpectralDensity> {
        let (w, g) = self.coupled_modes.iter().copied().unzip();
        Ok(SpectralDensity::Discrete(DiscreteModes::new(w, g)?))
    }
}

pub fn chain_to_star(c: &ChainSpec) -> Result<EffectiveStar> {
    let m = 2 * c.n();
    let block = DMatrix::from_fn(m, m, |i, j| c.potential(i + 1, j + 1));
    let border = DVector::from_fn(m, |j, _| c.potential(0, j + 1));
    let eig = SymmetricEigen::try_new(block, f64::EPSILON, 0)
        .ok_or_else(|| Error::LinearAlgebra("symmetric eigensolver did not converge".into()))?;
    let mut modes: Vec<(f64, f64)> = (0..m)
        .map(|i| (eig.eigenvalues[i], eig.eigenvectors.column(i).dot(&border)))
        .collect();
    modes.sort_by(|a, b| a.0.total_cmp(&b.0));

    let scale = modes.iter().map(|p| p.0.abs()).fold(0.0, f64::max);
    let mut clusters: Vec<(f64, f64, usize)> = Vec::new();
    let mut start = 0;
    while start < m {
        let mut end = start + 1;
        while end < m && modes[end].0 - modes[start].0 <= CLUSTER_REL_WIDTH * scale {
            end += 1;
        }
        let lam = modes[start..end].iter().map(|p| p.0).sum::<f64>() / (end - start) as f64;
        let g2: f64 = modes[start..end].iter().map(|p| p.1 * p.1).sum();
        clusters.push((lam, g2.sqrt(), end - start));
        start = end;
    }
    let gmax = clusters.iter().map(|c| c.1).fold(0.0, f64::max);
    let mut coupled = Vec::new();
    let mut decoupled = 0;
    for (lam, g, size) in clusters {
        if gmax == 0.0 || g <= DECOUPLED_REL * gmax {
            decoupled += size;
        } else {
            if lam <= 0.0 {
                return Err(Error::LinearAlgebra(format!("coupled mode with non-positive eigenvalue {lam:e}")));
            }
            coupled.push((lam.sqrt(), g));
        }
    }
    let mut warnings = Vec::new();
    if gmax > 0.0 && decoupled != c.n() {
        warnings.push(format!(
            "expected {} decoupled modes from reflection symmetry, found {decoupled}",
            c.n()
        ));
    }
    Ok(EffectiveStar { probe_omega_sq: c.omega_sq(), coupled_modes: coupled, decoupled_count: decoupled, warnings })
}

/// `A_jk = cos(2πjk/(2N+1))` for `j, k = 0…N`.
pub fn cosine_matrix(n: usize) -> DMatrix<f64> {
    let m = 2 * n + 1;
    DMatrix::from_fn(n + 1, n + 1, |j, k| (2.0 * PI * ((j * k) % m) as f64 / m as f64).cos())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainReconstruction {
    pub chain: ChainSpec,
    /// 1-norm condition estimate of the cosine system.
    pub condition_number: f64,
    /// False for unbounded spectra or negative couplings.
    pub physical: bool,
}

/// Chain whose non-repeated squared frequencies `Ω_0² > … > Ω_N²` are given.
pub fn star_to_chain(normal_freqs_sq: &[f64]) -> Result<ChainReconstruction> {
    let len = normal_freqs_sq.len();
    if len < 2 {
        return Err(Error::InvalidParameter("need at least two normal frequencies".into()));
    }
    let top = normal_freqs_sq[0].abs().max(1.0);
    for &v in normal_freqs_sq {
        if !v.is_finite() || v < -1e-12 * top {
            return Err(Error::InvalidParameter(format!("squared frequency {v} must be finite and non-negative")));
        }
    }
    if normal_freqs_sq.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidParameter("squared frequencies must be distinct and descending".into()));
    }
    let n = len - 1;
    let a = cosine_matrix(n);
    let norm1 = one_norm(&a);
    let lu = a.lu();
    let solve = |b: &DVector<f64>| -> Result<DVector<f64>> {
        lu.solve(b).ok_or_else(|| Error::LinearAlgebra("singular cosine matrix".into()))
    };
    let condition_number = norm1 * inverse_one_norm_estimate(n + 1, &solve)?;
    if !(condition_number <= MAX_CONDITION) {
        return Err(Error::IllConditioned { condition: condition_number });
    }
    let rhs = DVector::from_column_slice(normal_freqs_sq);
    let gv = solve(&rhs)?;
    let couplings: Vec<f64> = (1..=n).map(|k| 0.5 * gv[k]).collect();
    let gscale = couplings.iter().map(|g| g.abs()).fold(0.0, f64::max);
    let no_negative = couplings.iter().all(|&g| g >= -1e-12 * gscale);
    let chain = ChainSpec::new(gv[0], couplings)?;
    let physical = no_negative && chain_spectrum(&chain).is_ok();
    Ok(ChainReconstruction { chain, condition_number, physical })
}

fn one_norm(a: &DMatrix<f64>) -> f64 {
    a.column_iter().map(|c| c.iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max)
}

/// Hager's estimate of `‖A⁻¹‖₁` for symmetric `A`, given a solver for `A x = b`.
fn inverse_one_norm_estimate<S>(n: usize, solve: &S) -> Result<f64>
where
    S: Fn(&DVector<f64>) -> Result<DVector<f64>>,
{
    let mut x = DVector::from_element(n, 1.0 / n as f64);
    let mut est = 0.0;
    for _ in 0..5 {
        let y = solve(&x)?;
        est = y.iter().map(|v| v.abs()).sum::<f64>();
        let xi = y.map(|v| if v >= 0.0 { 1.0 } else { -1.0 });
        let z = solve(&xi)?;
        let (j, zj) = z.iter().enumerate().fold((0, 0.0), |acc, (i, v)| if v.abs() > acc.1 { (i, v.abs()) } else { acc });
        if zj <= z.dot(&x) {
            break;
        }
        x = DVector::zeros(n);
        x[j] = 1.0;
    }
    Ok(est)
}

/// Eigenpair summary of the bordered potential matrix: eigenvalue and the probe
/// component of its unit eigenvector (largest component positive).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalMode {
    pub omega_sq: f64,
    pub probe_component: f64,
}

/// Normal modes of `[[ω₀²+ω_R², gᵀ], [g, diag(ω_n²)]]`, descending.
///
/// Solves the secular equation `ω₀² + ω_R² − λ − Σ g_n²/(ω_n² − λ) = 0` root by root,
/// with each root measured from its nearest pole.
pub fn clm_normal_mode_decomposition(star: &StarSpec) -> Result<Vec<NormalMode>> {
    let SpectralDensity::Discrete(modes) = star.spectral_density() else {
        return Err(Error::InvalidParameter("normal modes need a discrete reservoir".into()));
    };
    let d0 = star.omega0_sq() + star.omega_r_sq();
    let poles: Vec<f64> = modes.omega().iter().map(|w| w * w).collect();
    let z = modes.g();
    let norm = d0.abs().max(poles[poles.len() - 1]).max(z.iter().map(|v| v * v).sum::<f64>().sqrt());
    let mut out = Vec::with_capacity(poles.len() + 1);
    let mut active_d = Vec::new();
    let mut active_z = Vec::new();
    for (&d, &g) in poles.iter().zip(z) {
        if g <= 1e-15 * norm {
            out.push(NormalMode { omega_sq: d, probe_component: 0.0 });
        } else {
            active_d.push(d);
            active_z.push(g);
        }
    }
    out.extend(secular_roots(d0, &active_d, &active_z));
    out.sort_by(|a, b| b.omega_sq.total_cmp(&a.omega_sq));
    let floor = -1e-12 * norm.max(1.0);
    for m in out.iter_mut() {
        if m.omega_sq < floor {
            return Err(Error::LinearAlgebra(format!("negative squared normal frequency {:e}", m.omega_sq)));
        }
        m.omega_sq = m.omega_sq.max(0.0);
    }
    Ok(out)
}

/// Squared normal frequencies of a discrete star, descending.
pub fn clm_normal_modes(star: &StarSpec) -> Result<Vec<f64>> {
    Ok(clm_normal_mode_decomposition(star)?.into_iter().map(|m| m.omega_sq).collect())
}

fn secular_roots(d0: f64, d: &[f64], z: &[f64]) -> Vec<NormalMode> {
    let k = d.len();
    if k == 0 {
        return vec![NormalMode { omega_sq: d0, probe_component: 1.0 }];
    }
    let zsum: f64 = z.iter().map(|v| v.abs()).sum();
    let zmax = z.iter().copied().fold(0.0, f64::max);
    let lower = (d0 - zsum).min(d[0] - zmax);
    let upper = (d0 + zsum).max(d[k - 1] + zmax);
    let margin = 1.0 + 1e-3 * (upper - lower).abs();
    let phi = |o: usize, mu: f64| -> f64 {
        let origin = d[o];
        let mut s = (d0 - origin) - mu;
        for (&dn, &zn) in d.iter().zip(z) {
            s -= zn * zn / ((dn - origin) - mu);
        }
        s
    };
    let mut roots = Vec::with_capacity(k + 1);
    for i in 0..=k {
        let (origin, mut lo, mut hi) = if i == 0 {
            (0, lower - d[0] - margin, 0.0)
        } else if i == k {
            (k - 1, 0.0, upper - d[k - 1] + margin)
        } else {
            let gap = d[i] - d[i - 1];
            if phi(i - 1, 0.5 * gap) > 0.0 {
                (i, -0.5 * gap, 0.0)
            } else {
                (i - 1, 0.0, 0.5 * gap)
            }
        };
        for _ in 0..300 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if phi(origin, mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let mu = if lo == 0.0 {
            hi
        } else if hi == 0.0 {
            lo
        } else {
            0.5 * (lo + hi)
        };
        roots.push(eigen_summary(d0, d, z, origin, mu));
    }
    roots
}

fn eigen_summary(_d0: f64, d: &[f64], z: &[f64], origin: usize, mu: f64) -> NormalMode {
    let o = d[origin];
    let mut norm2 = 1.0;
    let mut largest = 1.0f64;
    for (&dn, &zn) in d.iter().zip(z) {
        let v = -zn / ((dn - o) - mu);
        norm2 += v * v;
        if v.abs() > largest.abs() {
            largest = v;
        }
    }
    let sign = if largest >= 0.0 { 1.0 } else { -1.0 };
    NormalMode { omega_sq: o + mu, probe_component: sign / norm2.sqrt() }
}

/// Coefficients `d_a` of the probe position on the chain nodes, `q₀ = Σ_a d_a Q_a`.
#[derive(Debug, Clone, PartialEq)]
pub struct DelocalizationProfile {
    pub coefficients: Vec<f64>,
    pub normalization: f64,
}

/// Expands the probe of a discrete star on the nodes of its equivalent chain.
pub fn probe_delocalization(star: &StarSpec) -> Result<DelocalizationProfile> {
    let modes = clm_normal_mode_decomposition(star)?;
    let lam: Vec<f64> = modes.iter().map(|m| m.omega_sq).collect();
    let rec = star_to_chain(&lam)?;
    let chain = &rec.chain;
    let n = chain.n();
    let m = chain.nodes();
    let top = lam[0].abs().max(f64::MIN_POSITIVE);
    for (a, &target) in lam.iter().enumerate() {
        let got = chain.omega_sq() + 2.0 * (1..=n).map(|k| {
            chain.couplings()[k - 1] * (2.0 * PI * ((k * a) % m) as f64 / m as f64).cos()
        }).sum::<f64>();
        if (got - target).abs() > 1e-6 * target.abs() + 1e-10 * top {
            return Err(Error::ModeMatching(format!(
                "chain mode {a} has squared frequency {got} but the star mode is {target}"
            )));
        }
    }
    let mf = m as f64;
    let uniform = 1.0 / mf.sqrt();
    let pair = (2.0 / mf).sqrt();
    let coefficients: Vec<f64> = (0..m)
        .map(|j| {
            let mut s = modes[0].probe_component * uniform;
            for (a, mode) in modes.iter().enumerate().skip(1) {
                s += mode.probe_component * pair * (2.0 * PI * ((a * j) % m) as f64 / mf).cos();
            }
            s
        })
        .collect();
    let normalization = coefficients.iter().map(|c| c * c).sum();
    Ok(DelocalizationProfile { coefficients, normalization })
}

/// Joint fit `ln g_n = c + p ln n + q ln N` of the star couplings of gapless chains.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingScaling {
    pub n_exponent: f64,
    pub size_exponent: f64,
    pub prefactor: f64,
    pub r_squared: f64,
    pub n_points: usize,
}

/// Fits the star couplings of gapless chains over `n ∈ [1, N/4]` (ordered by frequency)
/// for every `N` in `n_list`.
pub fn star_coupling_scaling(family: CouplingFamily, n_list: &[usize]) -> Result<CouplingScaling> {
    if n_list.len() < 2 {
        return Err(Error::Fit("need at least two chain sizes".into()));
    }
    let mut rows: Vec<[f64; 3]> = Vec::new();
    let mut ys = Vec::new();
    for &n in n_list {
        if n < 8 {
            return Err(Error::Fit(format!("chain size {n} too small for a coupling fit")));
        }
        let star = chain_to_star(&ChainSpec::gapless(family.couplings(n))?)?;
        for (i, &(_, g)) in star.coupled_modes.iter().take(n / 4).enumerate() {
            if g > 0.0 {
                rows.push([1.0, ((i + 1) as f64).ln(), (n as f64).ln()]);
                ys.push(g.ln());
            }
        }
    }
    let x = DMatrix::from_fn(rows.len(), 3, |i, j| rows[i][j]);
    let y = DVector::from_vec(ys);
    let xtx = x.transpose() * &x;
    let coef = xtx
        .cholesky()
        .ok_or_else(|| Error::Fit("degenerate design matrix".into()))?
        .solve(&(x.transpose() * &y));
    let fitted = &x * &coef;
    let mean = y.mean();
    let ss_tot: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    let ss_res: f64 = y.iter().zip(fitted.iter()).map(|(a, b)| (a - b).powi(2)).sum();
    Ok(CouplingScaling {
        n_exponent: coef[1],
        size_exponent: coef[2],
        prefactor: coef[0].exp(),
        r_squared: if ss_tot > 0.0 { (1.0 - ss_res / ss_tot).clamp(0.0, 1.0) } else { 1.0 },
        n_points: y.len(),
    })
}
