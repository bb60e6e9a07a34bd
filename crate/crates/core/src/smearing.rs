//! Compactly supported, spherically symmetric smearing functions.
//!
//! Every family is described by an unnormalised radial profile `f̄(r)`; the
//! normalisation constant `A` is fixed by `c ∫ (A f̄)² dᴰx = 1`, so the smeared
//! field and momentum built from one profile form a canonical pair.

use crate::error::{domain, Error, Result};
use crate::quadrature::{self, Tolerance};
use crate::specfun::{angular_kernel, bessel_j_scaled, gamma};
use nalgebra::Complex;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Family {
    /// `(1 − r²)^δ`
    PolyBump { delta: f64 },
    /// `cosⁿ(πr/2)`
    CosPower { n: u32 },
    /// `exp(−1/(1 − r²))`
    ExpBump,
    /// Flat plateau out to the stored radius, then a linear ramp of width `δR`.
    Trapezoid { delta: f64 },
    /// `1 − rⁿ`
    PolyCap { n: u32 },
    /// `sin(2πnr)/(2πnr)`
    Sinc { n: u32 },
    /// `sin²(π(r − inner)/thickness)` on `[inner, inner + thickness]`.
    ShellSin2 { inner: f64, thickness: f64 },
    /// `cos²(πr/2)`
    BallCos2,
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::PolyBump { .. } => "poly_bump",
            Family::CosPower { .. } => "cos_power",
            Family::ExpBump => "exp_bump",
            Family::Trapezoid { .. } => "trapezoid",
            Family::PolyCap { .. } => "poly_cap",
            Family::Sinc { .. } => "sinc",
            Family::ShellSin2 { .. } => "shell_sin2",
            Family::BallCos2 => "ball_cos2",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SmearingSpec {
    pub family: Family,
    pub center: Vec<f64>,
    pub radius: f64,
    #[serde(rename = "dimension")]
    pub dim: u32,
    /// Inverse-energy constant multiplying the smeared momentum. Defaults to
    /// the radius, which makes every covariance entry dimensionless.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale_c: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalizationConstant {
    pub value: f64,
    pub scale_c: f64,
}

impl SmearingSpec {
    pub fn new(family: Family, center: Vec<f64>, radius: f64, dim: u32) -> Result<Self> {
        let spec = Self {
            family,
            center,
            radius,
            dim,
            scale_c: None,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Origin-centred spec, handy as a template for the geometry generators.
    pub fn centered(family: Family, radius: f64, dim: u32) -> Result<Self> {
        Self::new(family, vec![0.0; dim as usize], radius, dim)
    }

    pub fn poly_bump(delta: f64, radius: f64, dim: u32) -> Result<Self> {
        Self::centered(Family::PolyBump { delta }, radius, dim)
    }

    pub fn shell_sin2(inner: f64, thickness: f64, dim: u32) -> Result<Self> {
        Self::centered(
            Family::ShellSin2 { inner, thickness },
            inner + thickness,
            dim,
        )
    }

    pub fn with_scale_c(mut self, c: f64) -> Result<Self> {
        self.scale_c = Some(c);
        self.validate()?;
        Ok(self)
    }

    pub fn at(&self, center: Vec<f64>) -> Result<Self> {
        let mut s = self.clone();
        s.center = center;
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.radius > 0.0) || !self.radius.is_finite() {
            return Err(domain(format!(
                "radius must be positive, got {}",
                self.radius
            )));
        }
        if self.dim < 1 {
            return Err(domain("dimension must be at least 1"));
        }
        if self.center.len() != self.dim as usize {
            return Err(domain(format!(
                "center has {} components but the dimension is {}",
                self.center.len(),
                self.dim
            )));
        }
        if self.center.iter().any(|x| !x.is_finite()) {
            return Err(domain("center must be finite"));
        }
        if let Some(c) = self.scale_c {
            if !(c > 0.0) || !c.is_finite() {
                return Err(domain(format!("scale_c must be positive, got {c}")));
            }
        }
        match self.family {
            Family::PolyBump { delta } => {
                if !(delta >= 1.0 || delta == 0.0) || !delta.is_finite() {
                    return Err(domain(format!(
                        "poly_bump needs delta >= 1 (or 0), got {delta}"
                    )));
                }
            }
            Family::CosPower { n } | Family::PolyCap { n } => {
                if n < 2 {
                    return Err(domain(format!(
                        "{} needs n > 1, got {n}",
                        self.family.name()
                    )));
                }
            }
            Family::Sinc { n } => {
                if n < 1 {
                    return Err(domain("sinc needs n >= 1"));
                }
            }
            Family::Trapezoid { delta } => {
                if !(delta > 0.0) || !delta.is_finite() {
                    return Err(domain(format!("trapezoid needs delta > 0, got {delta}")));
                }
            }
            Family::ShellSin2 { inner, thickness } => {
                if !(inner > 0.0) || !(thickness > 0.0) {
                    return Err(domain(
                        "shell_sin2 needs positive inner radius and thickness",
                    ));
                }
                if (inner + thickness - self.radius).abs() > 1e-12 * self.radius {
                    return Err(domain("shell_sin2 radius must equal inner + thickness"));
                }
            }
            Family::ExpBump | Family::BallCos2 => {}
        }
        Ok(())
    }

    /// False only for the discontinuous δ = 0 bump, whose momentum
    /// fluctuations diverge.
    pub fn is_regular(&self) -> bool {
        !matches!(self.family, Family::PolyBump { delta } if delta == 0.0)
    }

    pub fn scale_c(&self) -> f64 {
        self.scale_c.unwrap_or(self.radius)
    }

    /// Radial interval `[r_in, r_out]` carrying the support.
    pub fn support(&self) -> (f64, f64) {
        match self.family {
            Family::Trapezoid { delta } => (0.0, self.radius * (1.0 + delta)),
            Family::ShellSin2 { inner, thickness } => (inner, inner + thickness),
            _ => (0.0, self.radius),
        }
    }

    pub fn outer_radius(&self) -> f64 {
        self.support().1
    }

    /// Radii where the profile is not smooth.
    pub(crate) fn kinks(&self) -> Vec<f64> {
        let (a, b) = self.support();
        match self.family {
            Family::Trapezoid { .. } => vec![a, self.radius, b],
            _ => vec![a, b],
        }
    }

    /// Order of vanishing of the profile at its non-smooth points; sets the
    /// power-law decay of the Fourier transform. `None` for smooth profiles.
    pub(crate) fn boundary_order(&self) -> Option<f64> {
        match self.family {
            Family::PolyBump { delta } => Some(delta),
            Family::CosPower { n } => Some(n as f64),
            Family::ExpBump => None,
            Family::Trapezoid { .. } | Family::PolyCap { .. } | Family::Sinc { .. } => Some(1.0),
            Family::ShellSin2 { .. } | Family::BallCos2 => Some(2.0),
        }
    }

    /// Shortest length on which the profile varies; the Fourier transform
    /// reaches its asymptotic power law for k well above its inverse.
    pub(crate) fn feature_length(&self) -> f64 {
        match self.family {
            Family::Trapezoid { delta } => self.radius * delta.min(1.0),
            Family::ShellSin2 { thickness, .. } => thickness,
            Family::Sinc { n } => self.radius / n as f64,
            _ => self.radius,
        }
    }

    /// Unnormalised radial profile at physical radius `r`.
    pub fn profile(&self, r: f64) -> f64 {
        let (r_in, r_out) = self.support();
        if r < r_in || r > r_out {
            return 0.0;
        }
        let u = r / self.radius;
        match self.family {
            Family::PolyBump { delta } => {
                if delta == 0.0 {
                    1.0
                } else {
                    (1.0 - u * u).max(0.0).powf(delta)
                }
            }
            Family::CosPower { n } => (0.5 * PI * u).cos().max(0.0).powi(n as i32),
            Family::ExpBump => {
                let s = 1.0 - u * u;
                if s <= 0.0 {
                    0.0
                } else {
                    (-1.0 / s).exp()
                }
            }
            Family::Trapezoid { delta } => {
                if u <= 1.0 {
                    1.0
                } else {
                    (1.0 - (u - 1.0) / delta).max(0.0)
                }
            }
            Family::PolyCap { n } => 1.0 - u.powi(n as i32),
            Family::Sinc { n } => {
                let z = 2.0 * PI * n as f64 * u;
                if z.abs() < 1e-6 {
                    1.0 - z * z / 6.0
                } else {
                    z.sin() / z
                }
            }
            Family::ShellSin2 { inner, thickness } => {
                let s = (PI * (r - inner) / thickness).sin();
                s * s
            }
            Family::BallCos2 => {
                let c = (0.5 * PI * u).cos();
                c * c
            }
        }
    }

    pub fn normalization(&self) -> Result<NormalizationConstant> {
        let c = self.scale_c();
        let d = self.dim as f64;
        let value = match self.family {
            Family::PolyBump { delta } => {
                c.powf(-0.5)
                    * self.radius.powf(-0.5 * d)
                    * PI.powf(-0.25 * d)
                    * (gamma(1.0 + 0.5 * d + 2.0 * delta) / gamma(1.0 + 2.0 * delta)).sqrt()
            }
            _ => {
                let norm = self.radial_moment(|r| self.profile(r).powi(2))?;
                (c * norm).powf(-0.5)
            }
        };
        Ok(NormalizationConstant { value, scale_c: c })
    }

    /// `S_{D−1} ∫ g(r) r^{D−1} dr` over the support.
    fn radial_moment<G: Fn(f64) -> f64>(&self, g: G) -> Result<f64> {
        let pts = self.radial_grid(0.0);
        let dm1 = self.dim as i32 - 1;
        let (v, _) = quadrature::integrate(
            &|r: f64| g(r) * r.powi(dm1),
            &pts,
            Tolerance::relative(1e-12),
        )
        .map_err(|e| {
            Error::Quadrature(format!("radial integral of {}: {e}", self.family.name()))
        })?;
        Ok(sphere_area(self.dim) * v)
    }

    /// Panel edges on the support, fine enough for the profile's own
    /// oscillations and for a kernel of wavenumber `k`.
    fn radial_grid(&self, k: f64) -> Vec<f64> {
        let kinks = self.kinks();
        let own = match self.family {
            Family::Sinc { n } => 2.0 * PI * n as f64 / self.radius,
            Family::ShellSin2 { thickness, .. } => 2.0 * PI / thickness,
            _ => PI / self.radius,
        };
        let width = 2.0 * PI / (k + own);
        let mut pts = Vec::new();
        for w in kinks.windows(2) {
            let (a, b) = (w[0], w[1]);
            if b <= a {
                continue;
            }
            let panels = ((b - a) / width).ceil().max(2.0) as usize;
            for i in 0..panels {
                pts.push(a + (b - a) * i as f64 / panels as f64);
            }
        }
        pts.push(*kinks.last().unwrap());
        pts
    }

    /// Normalised smearing function at point `x`.
    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim as usize {
            return Err(domain("point dimension does not match the smearing"));
        }
        let r = distance(x, &self.center);
        Ok(self.normalization()?.value * self.profile(r))
    }

    /// `f̃(k) = ∫ e^{ik·x} f(x) dᴰx`.
    pub fn fourier_transform(&self, k: &[f64]) -> Result<Complex<f64>> {
        if k.len() != self.dim as usize {
            return Err(domain("wavevector dimension does not match the smearing"));
        }
        let kmag = k.iter().map(|v| v * v).sum::<f64>().sqrt();
        let phase: f64 = k.iter().zip(&self.center).map(|(a, b)| a * b).sum();
        let radial = self.radial_transform(kmag)?;
        Ok(Complex::from_polar(1.0, phase) * radial)
    }

    /// Radial part of the Fourier transform, a function of |k| only.
    pub fn radial_transform(&self, k: f64) -> Result<f64> {
        let a = self.normalization()?.value;
        self.radial_transform_with(a, k)
    }

    pub(crate) fn radial_transform_with(&self, norm: f64, k: f64) -> Result<f64> {
        match self.family {
            Family::PolyBump { delta } => Ok(norm * self.poly_bump_shape(delta, k)),
            Family::Sinc { n } if self.dim == 3 => Ok(norm * self.sinc_shape_3d(n, k)),
            _ => Ok(norm * self.hankel_numeric(k)?),
        }
    }

    fn poly_bump_shape(&self, delta: f64, k: f64) -> f64 {
        let d = self.dim as f64;
        let nu = 0.5 * d + delta;
        gamma(delta + 1.0)
            * 2f64.powf(delta - nu)
            * (2.0 * PI).powf(0.5 * d)
            * self.radius.powf(d)
            * bessel_j_scaled(nu, k * self.radius)
    }

    /// In three dimensions the sinc transform is elementary:
    /// `−4π sin(kR) / (k (a² − k²))` with `a = 2πn/R`.
    fn sinc_shape_3d(&self, n: u32, k: f64) -> f64 {
        let r = self.radius;
        let a = 2.0 * PI * n as f64 / r;
        // sin(kR) = sin((k − a)R) because aR is a multiple of 2π
        let e = k - a;
        let sinc_e = if (e * r).abs() < 1e-4 {
            let x2 = (e * r) * (e * r);
            r * (1.0 - x2 / 6.0 + x2 * x2 / 120.0)
        } else {
            (e * r).sin() / e
        };
        if k * r < 1e-8 {
            return -4.0 * PI * r / (a * a);
        }
        4.0 * PI * sinc_e / (k * (a + k))
    }

    pub(crate) fn has_closed_transform(&self) -> bool {
        matches!(self.family, Family::PolyBump { .. })
            || matches!(self.family, Family::Sinc { .. } if self.dim == 3)
    }

    /// Generic radial transform of the unnormalised profile.
    pub(crate) fn hankel_numeric(&self, k: f64) -> Result<f64> {
        let pts = self.radial_grid(k);
        let dm1 = self.dim as i32 - 1;
        let dim = self.dim;
        let scale = self.radial_moment_abs_estimate();
        let tol = Tolerance {
            abs: 1e-13 * scale,
            rel: 1e-11,
            max_intervals: 20_000,
        };
        let (v, _) = quadrature::integrate(
            &|r: f64| self.profile(r) * r.powi(dm1) * angular_kernel(dim, k * r),
            &pts,
            tol,
        )
        .map_err(|e| {
            Error::Quadrature(format!("Fourier transform of {}: {e}", self.family.name()))
        })?;
        Ok(sphere_area(self.dim) * v)
    }

    fn radial_moment_abs_estimate(&self) -> f64 {
        let (a, b) = self.support();
        let n = 64;
        let h = (b - a) / n as f64;
        let dm1 = self.dim as i32 - 1;
        (0..n)
            .map(|i| {
                let r = a + (i as f64 + 0.5) * h;
                self.profile(r).abs() * r.powi(dm1) * h
            })
            .sum::<f64>()
            .max(f64::MIN_POSITIVE)
    }

    /// Truncated homogeneous Sobolev norm `∫_{|k|<K} dᴰk/(2π)ᴰ |k|^{2s} |f̃(k)|²`.
    pub fn sobolev_norm_sq(&self, s: f64, uv_cutoff: f64) -> Result<f64> {
        if !(uv_cutoff > 0.0) {
            return Err(domain(format!(
                "uv cutoff must be positive, got {uv_cutoff}"
            )));
        }
        let power = self.dim as f64 - 1.0 + 2.0 * s;
        if power <= -1.0 {
            return Err(Error::InfraredDivergence);
        }
        let a = self.normalization()?.value;
        let r_out = self.outer_radius();
        let width = PI / (2.0 * r_out);
        let mut pts = vec![0.0];
        let mut q = width.min(uv_cutoff) / 64.0;
        while q < width.min(uv_cutoff) {
            pts.push(q);
            q *= 2.0;
        }
        let mut edge = width;
        while edge < uv_cutoff {
            pts.push(edge);
            edge += width;
        }
        pts.push(uv_cutoff);
        let (v, _) = quadrature::integrate(
            &|k: f64| {
                let f = self.radial_transform_with(a, k).unwrap_or(f64::NAN);
                k.powf(power) * f * f
            },
            &pts,
            Tolerance::relative(1e-11),
        )?;
        Ok(sphere_area(self.dim) * v / (2.0 * PI).powi(self.dim as i32))
    }
}

/// `∫ f g dᴰx` between two normalised smearings. Supported for disjoint (or
/// touching) supports and for concentric profiles; anything else is rejected.
pub fn overlap(f: &SmearingSpec, g: &SmearingSpec) -> Result<f64> {
    if f.dim != g.dim {
        return Err(domain("smearings live in different dimensions"));
    }
    let d = distance(&f.center, &g.center);
    let tol = 1e-12 * (f.outer_radius() + g.outer_radius());
    if d >= f.outer_radius() + g.outer_radius() - tol {
        return Ok(0.0);
    }
    if d > tol {
        return Err(Error::Unsupported(
            "overlap integral of off-center overlapping supports".into(),
        ));
    }
    let (fa, fb) = f.support();
    let (ga, gb) = g.support();
    let (lo, hi) = (fa.max(ga), fb.min(gb));
    if hi <= lo {
        return Ok(0.0);
    }
    let mut pts: Vec<f64> = f
        .radial_grid(0.0)
        .into_iter()
        .chain(g.radial_grid(0.0))
        .filter(|r| *r >= lo && *r <= hi)
        .chain([lo, hi])
        .collect();
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let dm1 = f.dim as i32 - 1;
    let na = f.normalization()?.value;
    let nb = g.normalization()?.value;
    let scale = (na * nb).abs().max(f64::MIN_POSITIVE) / (f.scale_c() * g.scale_c()).sqrt();
    let tol = Tolerance {
        abs: 1e-14 * scale,
        rel: 1e-12,
        max_intervals: 20_000,
    };
    let (v, _) = quadrature::integrate(
        &|r: f64| f.profile(r) * g.profile(r) * r.powi(dm1),
        &pts,
        tol,
    )?;
    Ok(na * nb * sphere_area(f.dim) * v)
}

/// Surface area of the unit sphere S^{D−1}.
pub fn sphere_area(dim: u32) -> f64 {
    let h = 0.5 * dim as f64;
    2.0 * PI.powf(h) / gamma(h)
}

pub(crate) fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn spec(family: Family, dim: u32) -> SmearingSpec {
        SmearingSpec::centered(family, 1.0, dim).unwrap()
    }

    #[test]
    fn validation() {
        assert!(SmearingSpec::poly_bump(0.5, 1.0, 3).is_err());
        assert!(SmearingSpec::poly_bump(0.0, 1.0, 3).is_ok());
        assert!(!SmearingSpec::poly_bump(0.0, 1.0, 3).unwrap().is_regular());
        assert!(SmearingSpec::poly_bump(1.0, -1.0, 3).is_err());
        assert!(SmearingSpec::new(Family::BallCos2, vec![0.0; 2], 1.0, 3).is_err());
        assert!(SmearingSpec::centered(Family::CosPower { n: 1 }, 1.0, 2).is_err());
        assert!(SmearingSpec::centered(Family::Sinc { n: 0 }, 1.0, 3).is_err());
        assert!(SmearingSpec::centered(
            Family::ShellSin2 {
                inner: 1.0,
                thickness: 0.5
            },
            1.0,
            3
        )
        .is_err());
        assert!(SmearingSpec::poly_bump(1.0, 1.0, 3)
            .unwrap()
            .with_scale_c(0.0)
            .is_err());
    }

    #[test]
    fn poly_bump_pointwise() {
        let s = SmearingSpec::poly_bump(1.0, 1.0, 3).unwrap();
        let a = s.normalization().unwrap().value;
        assert_relative_eq!(a, 1.021_985_476_433_282_3, max_relative = 1e-14);
        assert_relative_eq!(
            s.evaluate(&[0.0, 0.0, 0.0]).unwrap(),
            a,
            max_relative = 1e-15
        );
        assert_eq!(s.evaluate(&[1.0, 0.0, 0.0]).unwrap(), 0.0);
        assert_eq!(s.evaluate(&[0.0, 1.5, 0.0]).unwrap(), 0.0);
        let s2 = SmearingSpec::poly_bump(1.0, 2.0, 3)
            .unwrap()
            .with_scale_c(1.0)
            .unwrap();
        assert_relative_eq!(
            s2.normalization().unwrap().value,
            a * 2f64.powf(-1.5),
            max_relative = 1e-14
        );
    }

    #[test]
    fn shell_peak_value() {
        let s = SmearingSpec::shell_sin2(1.0, 0.5, 3).unwrap();
        let a = s.normalization().unwrap().value;
        assert_relative_eq!(
            a,
            0.520_343_811_977_645_3 / 1.5f64.sqrt(),
            max_relative = 1e-10
        );
        assert_relative_eq!(
            s.evaluate(&[1.25, 0.0, 0.0]).unwrap(),
            a,
            max_relative = 1e-14
        );
        assert_eq!(s.evaluate(&[0.5, 0.0, 0.0]).unwrap(), 0.0);
    }

    #[test]
    fn numeric_normalizations_match_extended_precision() {
        // unit radius and unit c; reference values from 40-digit quadrature
        let cases = [
            (Family::CosPower { n: 2 }, 3, 1.628_365_941_778_329),
            (Family::BallCos2, 3, 1.628_365_941_778_329),
            (Family::ExpBump, 2, 2.912_132_452_513_200_4),
            (Family::Trapezoid { delta: 0.5 }, 2, 0.481_142_493_491_020_7),
            (Family::PolyCap { n: 3 }, 2, 0.841_044_174_006_72),
            (Family::Sinc { n: 1 }, 3, (2.0 * PI).sqrt()),
        ];
        for (family, dim, want) in cases {
            let s = spec(family.clone(), dim).with_scale_c(1.0).unwrap();
            assert_relative_eq!(s.normalization().unwrap().value, want, max_relative = 1e-10);
        }
    }

    #[test]
    fn canonical_normalization_all_families() {
        for dim in 1..=4 {
            for family in [
                Family::PolyBump { delta: 1.5 },
                Family::CosPower { n: 3 },
                Family::ExpBump,
                Family::Trapezoid { delta: 0.3 },
                Family::PolyCap { n: 2 },
                Family::Sinc { n: 2 },
                Family::BallCos2,
            ] {
                let s = SmearingSpec::centered(family, 1.7, dim).unwrap();
                let c = s.scale_c();
                let o = overlap(&s, &s).unwrap();
                assert_relative_eq!(c * o, 1.0, max_relative = 1e-10);
            }
        }
    }

    #[test]
    fn transform_at_zero_is_the_integral() {
        let s = spec(Family::BallCos2, 3);
        let a = s.normalization().unwrap().value;
        let integral = a * s.radial_moment(|r| s.profile(r)).unwrap();
        assert_relative_eq!(
            s.radial_transform(0.0).unwrap(),
            integral,
            max_relative = 1e-11
        );
        assert!(integral > 0.0);
        let p = SmearingSpec::poly_bump(1.0, 1.0, 3).unwrap();
        let want = p.normalization().unwrap().value * PI.powf(1.5) * gamma(2.0) / gamma(3.5);
        assert_relative_eq!(p.radial_transform(0.0).unwrap(), want, max_relative = 1e-13);
    }

    #[test]
    fn poly_bump_transform_zero_at_bessel_zero() {
        // first zero of J_{5/2}
        let s = SmearingSpec::poly_bump(1.0, 1.0, 3).unwrap();
        let z = 5.763_459_196_894_55;
        assert!(s.radial_transform(z).unwrap().abs() < 1e-14);
    }

    #[test]
    fn sinc_transform_reference() {
        let s = spec(Family::Sinc { n: 1 }, 3).with_scale_c(1.0).unwrap();
        let f = s.fourier_transform(&[1.0, 0.0, 0.0]).unwrap();
        assert_relative_eq!(f.re, -0.688_845_364_049_819_3, max_relative = 1e-10);
        assert!(f.im.abs() < 1e-15);
    }

    #[test]
    fn off_center_phase() {
        let s = SmearingSpec::poly_bump(1.0, 1.0, 2)
            .unwrap()
            .at(vec![3.0, 0.0])
            .unwrap();
        let f = s.fourier_transform(&[0.5, 0.0]).unwrap();
        let radial = s.radial_transform(0.5).unwrap();
        assert_relative_eq!(f.re, radial * 1.5f64.cos(), max_relative = 1e-14);
        assert_relative_eq!(f.im, radial * 1.5f64.sin(), max_relative = 1e-14);
    }

    #[test]
    fn closed_form_matches_generic_transform() {
        for dim in [1, 2, 3, 4] {
            for delta in [1.0, 1.5, 2.0] {
                let s = SmearingSpec::poly_bump(delta, 1.0, dim).unwrap();
                let a = s.normalization().unwrap().value;
                let mut kr = 0.1;
                while kr <= 50.0 {
                    let closed = s.radial_transform(kr).unwrap();
                    let numeric = a * s.hankel_numeric(kr).unwrap();
                    let scale = closed.abs().max(1e-6 * s.radial_transform(0.0).unwrap());
                    assert!(
                        (closed - numeric).abs() <= 1e-8 * scale,
                        "D={dim} δ={delta} kR={kr}: {closed} vs {numeric}"
                    );
                    kr *= 1.37;
                }
            }
        }
    }

    #[test]
    fn sinc_closed_form_matches_generic_transform() {
        for n in 1..4 {
            let s = SmearingSpec::centered(Family::Sinc { n }, 1.3, 3).unwrap();
            let a = s.normalization().unwrap().value;
            for k in [0.0, 0.3, 2.0 * PI * n as f64 / 1.3, 5.0, 17.2, 80.0] {
                let closed = s.radial_transform(k).unwrap();
                let numeric = a * s.hankel_numeric(k).unwrap();
                assert!(
                    (closed - numeric).abs() < 1e-10 * a,
                    "n={n} k={k}: {closed} vs {numeric}"
                );
            }
        }
    }

    #[test]
    fn parseval() {
        for (family, dim) in [
            (Family::PolyBump { delta: 2.0 }, 3),
            (Family::BallCos2, 2),
            (Family::ExpBump, 3),
            (Family::Sinc { n: 2 }, 3),
            (Family::CosPower { n: 3 }, 1),
        ] {
            let s = spec(family.clone(), dim);
            let direct = overlap(&s, &s).unwrap();
            let spectral = s.sobolev_norm_sq(0.0, 1500.0).unwrap();
            assert_relative_eq!(spectral, direct, max_relative = 1e-8);
        }
    }

    #[test]
    fn sinc_orthogonality_in_three_dimensions() {
        for n in 1..5 {
            for m in (n + 1)..6 {
                let a = spec(Family::Sinc { n }, 3);
                let b = spec(Family::Sinc { n: m }, 3);
                let diag = overlap(&a, &a).unwrap();
                assert!(overlap(&a, &b).unwrap().abs() <= 1e-8 * diag, "n={n} m={m}");
            }
        }
    }

    #[test]
    fn non_negative_families() {
        for family in [
            Family::PolyBump { delta: 1.3 },
            Family::CosPower { n: 4 },
            Family::ExpBump,
            Family::Trapezoid { delta: 0.7 },
            Family::PolyCap { n: 5 },
            Family::BallCos2,
        ] {
            let s = spec(family, 2);
            for i in 0..=400 {
                assert!(s.profile(i as f64 * 0.005) >= 0.0);
            }
        }
    }

    #[test]
    fn overlap_cases() {
        let a = SmearingSpec::poly_bump(1.0, 1.0, 2).unwrap();
        let b = a.at(vec![2.0, 0.0]).unwrap();
        assert_eq!(overlap(&a, &b).unwrap(), 0.0);
        let c = a.at(vec![1.0, 0.0]).unwrap();
        assert!(matches!(overlap(&a, &c), Err(Error::Unsupported(_))));
        let ball = spec(Family::BallCos2, 3);
        let shell = SmearingSpec::shell_sin2(1.0, 0.5, 3).unwrap();
        assert_eq!(overlap(&ball, &shell).unwrap(), 0.0);
    }

    #[test]
    fn serde_round_trip() {
        let s = SmearingSpec::shell_sin2(1.0, 0.25, 3).unwrap();
        let text = serde_json::to_string(&s).unwrap();
        assert!(text.contains("\"kind\":\"shell_sin2\""));
        let back: SmearingSpec = serde_json::from_str(&text).unwrap();
        assert_eq!(back, s);
    }
}
