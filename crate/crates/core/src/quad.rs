//! Globally adaptive Gauss-Kronrod (10/21) quadrature over a union of mapped segments.
//!
//! Each [`Segment`] is mapped onto a finite parameter interval; the integrator keeps
//! a priority queue of subintervals keyed by error estimate and bisects the worst one
//! until the summed error meets `max(abs_tol, rel_tol * |total|)`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_208_015_457_248,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

/// Gauss weights for the odd-indexed Kronrod abscissae.
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// A piece of the integration domain together with its change of variables.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Segment {
    /// `[a, b]` integrated in the original variable.
    Linear(f64, f64),
    /// `[a, b]` with `0 < a < b`, integrated in `ln x`.
    Log(f64, f64),
    /// `[a, ∞)` with `a > 0`, integrated in `t = a / x`.
    Tail(f64),
}

impl Segment {
    fn parameter_range(&self) -> (f64, f64) {
        match *self {
            Segment::Linear(a, b) => (a, b),
            Segment::Log(a, b) => (a.ln(), b.ln()),
            Segment::Tail(_) => (0.0, 1.0),
        }
    }

    /// Maps a parameter value to `(x, dx/dt)`.
    #[inline]
    fn map(&self, t: f64) -> (f64, f64) {
        match *self {
            Segment::Linear(..) => (t, 1.0),
            Segment::Log(..) => {
                let x = t.exp();
                (x, x)
            }
            Segment::Tail(a) => (a / t, a / (t * t)),
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            Segment::Linear(a, b) => a.is_finite() && b.is_finite() && a < b,
            Segment::Log(a, b) => a.is_finite() && b.is_finite() && 0.0 < a && a < b,
            Segment::Tail(a) => a.is_finite() && a > 0.0,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("malformed quadrature segment {self:?}")))
        }
    }
}

/// Builds a segment list covering `[lower, ∞)` split at `points`.
///
/// The first piece is linear when `lower == 0`; later pieces are logarithmic and the
/// last one maps the tail to a finite interval.
pub fn half_line_segments(lower: f64, points: &[f64]) -> Vec<Segment> {
    let mut pts: Vec<f64> = points
        .iter()
        .copied()
        .filter(|p| p.is_finite() && *p > lower * (1.0 + 1e-12) && *p > 0.0)
        .collect();
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs());
    let mut segments = Vec::with_capacity(pts.len() + 1);
    let mut left = lower;
    for p in pts {
        if left == 0.0 {
            segments.push(Segment::Linear(0.0, p));
        } else {
            segments.push(Segment::Log(left, p));
        }
        left = p;
    }
    if left == 0.0 {
        segments.push(Segment::Linear(0.0, 1.0));
        left = 1.0;
    }
    segments.push(Segment::Tail(left));
    segments
}

/// Result of a converged integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub abs_error: f64,
    pub intervals: usize,
}

/// Integrator settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_intervals: usize,
}

impl Default for Quadrature {
    fn default() -> Self {
        Quadrature { rel_tol: 1e-10, abs_tol: 0.0, max_intervals: 4000 }
    }
}

#[derive(Debug, Clone, Copy)]
struct Interval {
    segment: usize,
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Interval {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Interval {}
impl PartialOrd for Interval {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Interval {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

impl Quadrature {
    pub fn new(rel_tol: f64, abs_tol: f64) -> Self {
        Quadrature { rel_tol, abs_tol, ..Default::default() }
    }

    /// Integrates `f` over the union of `segments`.
    ///
    /// `what` labels the integral in error diagnostics.
    pub fn integrate<F>(&self, what: &str, f: F, segments: &[Segment]) -> Result<Estimate>
    where
        F: Fn(f64) -> f64,
    {
        if segments.is_empty() {
            return Ok(Estimate { value: 0.0, abs_error: 0.0, intervals: 0 });
        }
        let mut heap = BinaryHeap::new();
        let mut settled: Vec<Interval> = Vec::new();
        let mut total = 0.0;
        let mut total_err = 0.0;
        for (i, seg) in segments.iter().enumerate() {
            seg.validate()?;
            let (a, b) = seg.parameter_range();
            let iv = self.rule(what, &f, seg, i, a, b)?;
            total += iv.value;
            total_err += iv.error;
            heap.push(iv);
        }
        let mut count = segments.len();
        loop {
            let tol = self.abs_tol.max(self.rel_tol * total.abs());
            if total_err <= tol {
                break;
            }
            let Some(worst) = heap.pop() else {
                return Err(failure(what, total, total_err, count));
            };
            let mid = 0.5 * (worst.a + worst.b);
            let resolvable = mid > worst.a && mid < worst.b
                && (worst.b - worst.a) > 1e-13 * (worst.a.abs() + worst.b.abs()).max(1e-300);
            if !resolvable {
                settled.push(worst);
                continue;
            }
            if count >= self.max_intervals {
                return Err(failure(what, total, total_err, count));
            }
            let seg = &segments[worst.segment];
            let left = self.rule(what, &f, seg, worst.segment, worst.a, mid)?;
            let right = self.rule(what, &f, seg, worst.segment, mid, worst.b)?;
            total += left.value + right.value - worst.value;
            total_err += left.error + right.error - worst.error;
            heap.push(left);
            heap.push(right);
            count += 1;
        }
        // Resum to remove drift from the incremental updates.
        let all = heap.iter().chain(settled.iter());
        let (mut value, mut abs_error) = (0.0, 0.0);
        for iv in all {
            value += iv.value;
            abs_error += iv.error;
        }
        Ok(Estimate { value, abs_error, intervals: count })
    }

    fn rule<F>(&self, what: &str, f: &F, seg: &Segment, index: usize, a: f64, b: f64) -> Result<Interval>
    where
        F: Fn(f64) -> f64,
    {
        let center = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        let eval = |t: f64| -> Result<f64> {
            let (x, jac) = seg.map(t);
            let y = f(x) * jac;
            if y.is_finite() {
                Ok(y)
            } else {
                Err(Error::Integration {
                    what: format!("{what} (non-finite integrand at x = {x:e})"),
                    value: f64::NAN,
                    abs_error: f64::INFINITY,
                    intervals: 0,
                })
            }
        };
        let fc = eval(center)?;
        let mut res_k = fc * WGK[10];
        let mut res_g = 0.0;
        let mut res_abs = res_k.abs();
        let mut fv1 = [0.0; 10];
        let mut fv2 = [0.0; 10];
        for j in 0..10 {
            let dx = half * XGK[j];
            let f1 = eval(center - dx)?;
            let f2 = eval(center + dx)?;
            fv1[j] = f1;
            fv2[j] = f2;
            res_k += WGK[j] * (f1 + f2);
            res_abs += WGK[j] * (f1.abs() + f2.abs());
            if j % 2 == 1 {
                res_g += WG[j / 2] * (f1 + f2);
            }
        }
        let mean = 0.5 * res_k;
        let mut res_asc = WGK[10] * (fc - mean).abs();
        for j in 0..10 {
            res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
        }
        let scale = half.abs();
        let value = res_k * half;
        res_abs *= scale;
        res_asc *= scale;
        let mut error = ((res_k - res_g) * half).abs();
        if res_asc != 0.0 && error != 0.0 {
            error = res_asc * (200.0 * error / res_asc).powf(1.5).min(1.0);
        }
        if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
            error = error.max(50.0 * f64::EPSILON * res_abs);
        }
        Ok(Interval { segment: index, a, b, value, error })
    }
}

fn failure(what: &str, value: f64, abs_error: f64, intervals: usize) -> Error {
    Error::Integration { what: what.to_string(), value, abs_error, intervals }
}
