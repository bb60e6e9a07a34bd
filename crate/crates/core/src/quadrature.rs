//! Globally adaptive Gauss–Kronrod integration over a set of breakpoints.

use crate::error::{Error, Result};
use std::cmp::Ordering;
use std::collections::BinaryHeap;

#[allow(clippy::excessive_precision)]
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

#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

/// 21-point Kronrod rule with the embedded 10-point Gauss error estimate.
pub fn gk21<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut resk = fc * WGK[10];
    let mut resg = 0.0;
    let mut resabs = (fc * WGK[10]).abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        resk += WGK[j] * (f1 + f2);
        resabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            resg += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * resk;
    let mut resasc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        resasc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let result = resk * half;
    resabs *= half.abs();
    resasc *= half.abs();
    let mut err = ((resk - resg) * half).abs();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * resabs);
    }
    (result, err)
}

#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_intervals: usize,
}

impl Tolerance {
    pub fn relative(rel: f64) -> Self {
        Self {
            abs: 0.0,
            rel,
            max_intervals: 100_000,
        }
    }
}

struct Piece {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// Integrates `f` over `[points[0], points[last]]`, starting from the panels
/// delimited by `points` and bisecting the worst panel until the summed error
/// estimate meets the tolerance.
pub fn integrate<F: Fn(f64) -> f64>(f: &F, points: &[f64], tol: Tolerance) -> Result<(f64, f64)> {
    if points.len() < 2 {
        return Ok((0.0, 0.0));
    }
    let mut heap = BinaryHeap::with_capacity(points.len() * 2);
    let mut total = 0.0;
    let mut total_err = 0.0;
    for w in points.windows(2) {
        if w[1] <= w[0] {
            continue;
        }
        let (value, err) = gk21(f, w[0], w[1]);
        total += value;
        total_err += err;
        heap.push(Piece {
            a: w[0],
            b: w[1],
            value,
            err,
        });
    }
    let mut count = heap.len();
    loop {
        if !total.is_finite() {
            return Err(Error::Quadrature(
                "integrand produced a non-finite value".into(),
            ));
        }
        if total_err <= tol.abs.max(tol.rel * total.abs()) {
            return Ok((total, total_err));
        }
        if count >= tol.max_intervals {
            return Err(Error::Quadrature(format!(
                "tolerance not met within {} subintervals (estimate {total:.6e}, error {total_err:.3e})",
                tol.max_intervals
            )));
        }
        let worst = match heap.pop() {
            Some(p) => p,
            None => return Ok((total, total_err)),
        };
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // interval at machine resolution: accept its contribution as is
            heap.push(Piece { err: 0.0, ..worst });
            total_err -= worst.err;
            continue;
        }
        let (v1, e1) = gk21(f, worst.a, mid);
        let (v2, e2) = gk21(f, mid, worst.b);
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.err;
        heap.push(Piece {
            a: worst.a,
            b: mid,
            value: v1,
            err: e1,
        });
        heap.push(Piece {
            a: mid,
            b: worst.b,
            value: v2,
            err: e2,
        });
        count += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn polynomial_exact() {
        let (v, _) = gk21(&|x: f64| x.powi(9) - 3.0 * x * x, 0.0, 2.0);
        assert!((v - (102.4 - 8.0)).abs() < 1e-12);
    }

    #[test]
    fn oscillatory_with_breakpoints() {
        let pts: Vec<f64> = (0..=40).map(|k| k as f64 * PI / 2.0).collect();
        let (v, err) = integrate(
            &|x: f64| x.sin() * (-0.1 * x).exp(),
            &pts,
            Tolerance::relative(1e-12),
        )
        .unwrap();
        let b = 20.0 * PI;
        let want = (1.0 - (-0.1 * b).exp() * (0.1 * b.sin() + b.cos())) / 1.01;
        assert!((v - want).abs() < 1e-12, "{v} vs {want}, err {err}");
    }

    #[test]
    fn endpoint_singularity_converges() {
        let (v, _) = integrate(
            &|x: f64| x.sqrt().ln(),
            &[0.0, 1.0],
            Tolerance::relative(1e-10),
        )
        .unwrap();
        assert!((v + 0.5).abs() < 1e-9);
    }

    #[test]
    fn budget_exhaustion_is_an_error() {
        let tol = Tolerance {
            abs: 0.0,
            rel: 1e-14,
            max_intervals: 3,
        };
        let r = integrate(&|x: f64| (1.0 / x).sin(), &[1e-4, 1.0], tol);
        assert!(matches!(r, Err(Error::Quadrature(_))));
    }
}
