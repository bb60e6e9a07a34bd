//! Real-order special functions: log-gamma, Bessel J of real order and the
//! generalized hypergeometric 3F2 on the unit interval.

use crate::error::{domain, Error, Result};
use std::f64::consts::PI;

/// Truncation control for hypergeometric series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesControl {
    pub rel_tol: f64,
    pub max_terms: usize,
}

impl SeriesControl {
    pub const TERM_CAP: usize = 100_000;

    pub fn new(rel_tol: f64, max_terms: usize) -> Result<Self> {
        if !(rel_tol > 0.0 && rel_tol < 1e-3) {
            return Err(domain(format!(
                "rel_tol must lie in (0, 1e-3), got {rel_tol}"
            )));
        }
        if max_terms < 100 {
            return Err(domain(format!(
                "max_terms must be at least 100, got {max_terms}"
            )));
        }
        Ok(Self {
            rel_tol,
            max_terms: max_terms.min(Self::TERM_CAP),
        })
    }
}

impl Default for SeriesControl {
    fn default() -> Self {
        Self {
            rel_tol: 1e-16,
            max_terms: Self::TERM_CAP,
        }
    }
}

/// ln Γ(x) for x > 0.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(domain(format!("log_gamma requires x > 0, got {x}")));
    }
    Ok(libm::lgamma_r(x).0)
}

/// (ln|Γ(x)|, sign Γ(x)) for any non-pole real x.
pub(crate) fn ln_gamma_signed(x: f64) -> (f64, f64) {
    let (v, s) = libm::lgamma_r(x);
    (v, if s < 0 { -1.0 } else { 1.0 })
}

/// Γ(x) for real x away from the poles.
pub(crate) fn gamma(x: f64) -> f64 {
    let (v, s) = ln_gamma_signed(x);
    s * v.exp()
}

/// ∏Γ(num) / ∏Γ(den), evaluated in log space.
pub(crate) fn gamma_ratio(num: &[f64], den: &[f64]) -> f64 {
    let mut ln = 0.0;
    let mut sign = 1.0;
    for &a in num {
        let (v, s) = ln_gamma_signed(a);
        ln += v;
        sign *= s;
    }
    for &b in den {
        let (v, s) = ln_gamma_signed(b);
        ln -= v;
        sign *= s;
    }
    sign * ln.exp()
}

const SERIES_MAX_X: f64 = 12.0;
const HANKEL_MIN_X: f64 = 25.0;

/// Bessel function of the first kind J_ν(x), ν ≥ 0, x ≥ 0.
pub fn bessel_j(nu: f64, x: f64) -> Result<f64> {
    if !(nu >= 0.0) || !nu.is_finite() {
        return Err(domain(format!("bessel_j requires nu >= 0, got {nu}")));
    }
    if !(x >= 0.0) || !x.is_finite() {
        return Err(domain(format!("bessel_j requires x >= 0, got {x}")));
    }
    Ok(bessel_j_unchecked(nu, x))
}

pub(crate) fn bessel_j_unchecked(nu: f64, x: f64) -> f64 {
    if x == 0.0 {
        return if nu == 0.0 { 1.0 } else { 0.0 };
    }
    if x < SERIES_MAX_X {
        (nu * (0.5 * x).ln()).exp() * ascending_series(nu, x)
    } else if x >= HANKEL_MIN_X.max(0.5 * nu * nu) {
        hankel_asymptotic(nu, x)
    } else {
        steed(nu, x)
    }
}

/// J_ν(x) / (x/2)^ν, finite at x = 0 where it equals 1/Γ(ν+1).
pub(crate) fn bessel_j_scaled(nu: f64, x: f64) -> f64 {
    if x < SERIES_MAX_X {
        ascending_series(nu, x)
    } else {
        bessel_j_unchecked(nu, x) / (nu * (0.5 * x).ln()).exp()
    }
}

/// Σ_k (−x²/4)^k / (k! Γ(ν+k+1)).
fn ascending_series(nu: f64, x: f64) -> f64 {
    let q = -0.25 * x * x;
    let mut term = (-libm::lgamma_r(nu + 1.0).0).exp();
    let mut sum = term;
    for k in 1..400 {
        let kf = k as f64;
        term *= q / (kf * (nu + kf));
        sum += term;
        if term.abs() < 1e-17 * sum.abs() && kf * kf > -q {
            break;
        }
    }
    sum
}

fn hankel_asymptotic(nu: f64, x: f64) -> f64 {
    let mu = 4.0 * nu * nu;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term: f64 = 1.0;
    let mut prev = f64::INFINITY;
    for k in 1..200usize {
        let odd = (2 * k - 1) as f64;
        term *= (mu - odd * odd) / (k as f64 * 8.0 * x);
        if term == 0.0 {
            break;
        }
        if term.abs() > prev && k as f64 > nu {
            break;
        }
        prev = term.abs();
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 0 {
            p += sign * term;
        } else {
            q += sign * term;
        }
        if term.abs() < 1e-17 {
            break;
        }
    }
    let phase = (0.5 * nu + 0.25) * PI;
    let (sx, cx) = x.sin_cos();
    let (sp, cp) = phase.sin_cos();
    let cos_chi = cx * cp + sx * sp;
    let sin_chi = sx * cp - cx * sp;
    (2.0 / (PI * x)).sqrt() * (p * cos_chi - q * sin_chi)
}

/// Continued-fraction evaluation (CF1 for J'/J, then the complex CF2 of
/// Steed's method at a reduced order μ, followed by upward normalisation).
/// Valid for x ≥ 2.
fn steed(nu: f64, x: f64) -> f64 {
    const EPS: f64 = 1e-16;
    const FPMIN: f64 = 1e-300;
    const MAXIT: usize = 100_000;

    let nl = ((nu - x + 1.5).floor()).max(0.0) as usize;
    let xmu = nu - nl as f64;
    let xi = 1.0 / x;
    let xi2 = 2.0 * xi;
    let w = xi2 / PI;

    let mut isign = 1.0;
    let mut h = (nu * xi).max(FPMIN);
    let mut b = xi2 * nu;
    let mut d = 0.0;
    let mut c = h;
    for _ in 0..MAXIT {
        b += xi2;
        d = b - d;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = b - 1.0 / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        let del = c * d;
        h *= del;
        if d < 0.0 {
            isign = -isign;
        }
        if (del - 1.0).abs() < EPS {
            break;
        }
    }

    let mut rjl = isign * 1e-30;
    let mut rjpl = h * rjl;
    let rjl1 = rjl;
    let mut fact = nu * xi;
    for _ in 0..nl {
        let rjtemp = fact * rjl + rjpl;
        fact -= xi;
        rjpl = fact * rjtemp - rjl;
        rjl = rjtemp;
    }
    if rjl == 0.0 {
        rjl = EPS;
    }
    let f = rjpl / rjl;

    let xmu2 = xmu * xmu;
    let mut a = 0.25 - xmu2;
    let mut p = -0.5 * xi;
    let mut q = 1.0;
    let br = 2.0 * x;
    let mut bi = 2.0;
    let mut fact = a * xi / (p * p + q * q);
    let mut cr = br + q * fact;
    let mut ci = bi + p * fact;
    let mut den = br * br + bi * bi;
    let mut dr = br / den;
    let mut di = -bi / den;
    let mut dlr = cr * dr - ci * di;
    let mut dli = cr * di + ci * dr;
    let mut temp = p * dlr - q * dli;
    q = p * dli + q * dlr;
    p = temp;
    for i in 2..MAXIT {
        a += 2.0 * (i - 1) as f64;
        bi += 2.0;
        dr = a * dr + br;
        di = a * di + bi;
        if dr.abs() + di.abs() < FPMIN {
            dr = FPMIN;
        }
        fact = a / (cr * cr + ci * ci);
        cr = br + cr * fact;
        ci = bi - ci * fact;
        if cr.abs() + ci.abs() < FPMIN {
            cr = FPMIN;
        }
        den = dr * dr + di * di;
        dr /= den;
        di /= -den;
        dlr = cr * dr - ci * di;
        dli = cr * di + ci * dr;
        temp = p * dlr - q * dli;
        q = p * dli + q * dlr;
        p = temp;
        if (dlr - 1.0).abs() + dli.abs() < EPS {
            break;
        }
    }
    let gam = (p - f) / q;
    let rjmu = (w / ((p - f) * gam + q)).sqrt().copysign(rjl);
    rjl1 * (rjmu / rjl)
}

/// Λ_D(x) = Γ(D/2) (2/x)^{D/2−1} J_{D/2−1}(x), the angular average of e^{ik·x}
/// over the unit sphere in D dimensions. Λ_D(0) = 1.
pub(crate) fn angular_kernel(dim: u32, x: f64) -> f64 {
    match dim {
        1 => x.cos(),
        3 => {
            if x.abs() < 1e-4 {
                let x2 = x * x;
                1.0 - x2 / 6.0 + x2 * x2 / 120.0
            } else {
                x.sin() / x
            }
        }
        _ => {
            let nu = 0.5 * dim as f64 - 1.0;
            gamma(nu + 1.0) * bessel_j_scaled(nu, x.abs())
        }
    }
}

/// ₃F₂(a1,a2,a3; b1,b2; x) for |x| < 1 with the default series control.
pub fn hyper_3f2(a: [f64; 3], b: [f64; 2], x: f64) -> Result<f64> {
    hyper_3f2_with(a, b, x, &SeriesControl::default())
}

pub fn hyper_3f2_with(a: [f64; 3], b: [f64; 2], x: f64, ctl: &SeriesControl) -> Result<f64> {
    if !(x.abs() < 1.0) {
        return Err(domain(format!("hyper_3f2 requires |x| < 1, got {x}")));
    }
    check_lower(&b)?;
    sum_3f2(a, b, x, ctl).map(|(s, _)| s)
}

/// ₃F₂ at unit argument, convergent when the parameter excess
/// b1 + b2 − a1 − a2 − a3 is positive. The truncated sum is completed with
/// the integral estimate of its algebraic tail.
pub fn hyper_3f2_unit(a: [f64; 3], b: [f64; 2], ctl: &SeriesControl) -> Result<f64> {
    check_lower(&b)?;
    let excess = b[0] + b[1] - a[0] - a[1] - a[2];
    if !(excess > 0.0) {
        return Err(domain(format!(
            "hyper_3f2 at x = 1 diverges for parameter excess {excess}"
        )));
    }
    let (sum, (n, last)) = sum_3f2(a, b, 1.0, ctl)?;
    if n == 0 || last == 0.0 {
        return Ok(sum);
    }
    let nf = n as f64;
    let tail = last * nf.powf(1.0 + excess) * (nf + 0.5).powf(-excess) / excess;
    Ok(sum + tail)
}

fn check_lower(b: &[f64; 2]) -> Result<()> {
    for &bj in b {
        if bj <= 0.0 && bj == bj.round() {
            return Err(domain(format!(
                "lower parameter {bj} is a non-positive integer"
            )));
        }
    }
    Ok(())
}

/// Returns the compensated partial sum and (index, value) of the last term.
fn sum_3f2(a: [f64; 3], b: [f64; 2], x: f64, ctl: &SeriesControl) -> Result<(f64, (usize, f64))> {
    let mut sum = 1.0;
    let mut comp = 0.0;
    let mut term = 1.0;
    if x == 0.0 {
        return Ok((1.0, (0, 0.0)));
    }
    for n in 0..ctl.max_terms {
        let nf = n as f64;
        let ratio =
            (a[0] + nf) * (a[1] + nf) * (a[2] + nf) / ((b[0] + nf) * (b[1] + nf) * (nf + 1.0)) * x;
        term *= ratio;
        let t = sum + term;
        if sum.abs() >= term.abs() {
            comp += (sum - t) + term;
        } else {
            comp += (term - t) + sum;
        }
        sum = t;
        if term == 0.0 {
            return Ok((sum + comp, (n + 1, 0.0)));
        }
        if term.abs() <= ctl.rel_tol * (sum + comp).abs() && ratio.abs() < 1.0 {
            return Ok((sum + comp, (n + 1, term)));
        }
    }
    Err(Error::NonConvergence {
        what: "hypergeometric 3F2",
        terms: ctl.max_terms,
    })
}
