//! Vacuum two-point functions of smeared field and momentum operators of a
//! free scalar field.
//!
//! Lengths are measured in units of a reference radius (set to 1), so the
//! dimensionless mass `μ` doubles as the mass in inverse length units.
//! Entries are symmetrised moments `⟨{A, B}⟩`.

use crate::error::{domain, Error, Result};
use crate::quadrature::{self, Tolerance};
use crate::smearing::{distance, overlap, sphere_area, Family, SmearingSpec};
use crate::specfun::{angular_kernel, gamma_ratio, hyper_3f2_unit, hyper_3f2_with, SeriesControl};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldParams {
    #[serde(rename = "dimension")]
    pub dim: u32,
    #[serde(default)]
    pub mu: f64,
}

impl FieldParams {
    pub fn new(dim: u32, mu: f64) -> Result<Self> {
        let p = Self { dim, mu };
        p.validate()?;
        Ok(p)
    }

    pub fn massless(dim: u32) -> Result<Self> {
        Self::new(dim, 0.0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim < 1 {
            return Err(domain("dimension must be at least 1"));
        }
        if !(self.mu >= 0.0) || !self.mu.is_finite() {
            return Err(domain(format!(
                "mass must be non-negative, got {}",
                self.mu
            )));
        }
        if self.dim == 1 && self.mu == 0.0 {
            return Err(Error::InfraredDivergence);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrelatorKind {
    PhiPhi,
    PiPi,
    PhiPi,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Closed form where it applies, quadrature otherwise.
    #[default]
    Auto,
    Analytic,
    Numeric,
}

/// One smearing's contribution `phi·Φ[f] + pi·Π[f]` to a linear operator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Term {
    pub smearing: SmearingSpec,
    #[serde(default)]
    pub phi: f64,
    #[serde(default)]
    pub pi: f64,
}

impl Term {
    pub fn field(smearing: SmearingSpec, coeff: f64) -> Self {
        Self {
            smearing,
            phi: coeff,
            pi: 0.0,
        }
    }

    pub fn momentum(smearing: SmearingSpec, coeff: f64) -> Self {
        Self {
            smearing,
            phi: 0.0,
            pi: coeff,
        }
    }
}

/// A bosonic mode: a pair of operators `(x, p)`, each a finite linear
/// combination of smeared fields and momenta.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeSpec {
    pub x: Vec<Term>,
    pub p: Vec<Term>,
}

impl ModeSpec {
    /// The canonical pair `(Φ[f], Π[f])`.
    pub fn simple(smearing: SmearingSpec) -> Self {
        Self {
            x: vec![Term::field(smearing.clone(), 1.0)],
            p: vec![Term::momentum(smearing, 1.0)],
        }
    }

    /// The single smearing of a simple mode, if that is what this is.
    pub fn as_simple(&self) -> Option<&SmearingSpec> {
        match (self.x.as_slice(), self.p.as_slice()) {
            ([a], [b])
                if a.phi == 1.0
                    && a.pi == 0.0
                    && b.phi == 0.0
                    && b.pi == 1.0
                    && a.smearing == b.smearing =>
            {
                Some(&a.smearing)
            }
            _ => None,
        }
    }

    pub fn smearings(&self) -> impl Iterator<Item = &SmearingSpec> {
        self.x.iter().chain(&self.p).map(|t| &t.smearing)
    }

    pub fn validate(&self, index: usize, params: &FieldParams) -> Result<()> {
        let invalid = |reason: String| Error::InvalidMode { index, reason };
        if self.x.is_empty() || self.p.is_empty() {
            return Err(invalid("both operators need at least one term".into()));
        }
        for t in self.x.iter().chain(&self.p) {
            if t.smearing.dim != params.dim {
                return Err(invalid(format!(
                    "smearing is {}-dimensional but the field lives in {} dimensions",
                    t.smearing.dim, params.dim
                )));
            }
            if !t.phi.is_finite() || !t.pi.is_finite() {
                return Err(invalid("coefficients must be finite".into()));
            }
            t.smearing.validate().map_err(|e| invalid(e.to_string()))?;
        }
        Ok(())
    }
}

/// `N_δ² = 2^{2δ} Γ(1+D/2+2δ) Γ(1+δ)² / (Γ(1+2δ) Γ(D/2))`.
pub fn n_delta_sq(delta: f64, dim: u32) -> f64 {
    let d = dim as f64;
    2f64.powf(2.0 * delta)
        * gamma_ratio(
            &[1.0 + 0.5 * d + 2.0 * delta, 1.0 + delta, 1.0 + delta],
            &[1.0 + 2.0 * delta, 0.5 * d],
        )
}

fn check_closed_form_args(lambda: f64, delta: f64, dim: u32) -> Result<()> {
    if dim <= 1 {
        return Err(domain("closed-form correlators need D > 1"));
    }
    if lambda != 1.0 && lambda != -1.0 {
        return Err(domain(format!("lambda must be +1 or -1, got {lambda}")));
    }
    if !(delta >= 1.0) || !delta.is_finite() {
        return Err(domain(format!("delta must be at least 1, got {delta}")));
    }
    Ok(())
}

/// Dimensionless self-correlation coefficient of the polynomial bump.
pub fn j_coeff(lambda: f64, delta: f64, dim: u32) -> Result<f64> {
    check_closed_form_args(lambda, delta, dim)?;
    let d = dim as f64;
    Ok(2f64.powf(-1.0 - 2.0 * delta + lambda)
        * gamma_ratio(
            &[0.5 * (d + lambda), 1.0 + 2.0 * delta - lambda],
            &[
                1.0 + delta - 0.5 * lambda,
                1.0 + delta - 0.5 * lambda,
                0.5 * (d - lambda) + 2.0 * delta + 1.0,
            ],
        ))
}

/// Dimensionless cross-correlation coefficient of two polynomial bumps whose
/// centers are `rho` radii apart. `rho = 2` (touching supports) is allowed.
pub fn l_coeff(lambda: f64, delta: f64, rho: f64, dim: u32) -> Result<f64> {
    l_coeff_with(lambda, delta, rho, dim, &SeriesControl::default())
}

pub fn l_coeff_with(
    lambda: f64,
    delta: f64,
    rho: f64,
    dim: u32,
    ctl: &SeriesControl,
) -> Result<f64> {
    check_closed_form_args(lambda, delta, dim)?;
    if !(rho >= 2.0) || !rho.is_finite() {
        return Err(domain(format!(
            "supports overlap: rho must be at least 2, got {rho}"
        )));
    }
    let d = dim as f64;
    let pre = rho.powf(-(d + lambda))
        * 2f64.powf(-(1.0 + 2.0 * delta - lambda))
        * gamma_ratio(
            &[0.5 * (d + lambda), 0.5 * d],
            &[0.5 * d + 1.0 + delta, 0.5 * d + 1.0 + delta, -0.5 * lambda],
        );
    let a = [
        1.0 + 0.5 * lambda,
        0.5 * (d + lambda),
        0.5 * (d + 1.0) + delta,
    ];
    let b = [0.5 * d + 1.0 + delta, d + 1.0 + 2.0 * delta];
    let x = 4.0 / (rho * rho);
    let h = if x >= 1.0 {
        hyper_3f2_unit(a, b, ctl)?
    } else {
        hyper_3f2_with(a, b, x, ctl)?
    };
    Ok(pre * h)
}

/// Leading large-distance coefficients: `⟨{Φ_A,Φ_B}⟩ ≈ (R/c) u ρ^{−(D−1)}` and
/// `⟨{Π_A,Π_B}⟩ ≈ −(c/R) v ρ^{−(D+1)}`.
pub fn asymptotic_u_v(delta: f64, dim: u32) -> Result<(f64, f64)> {
    check_closed_form_args(-1.0, delta, dim)?;
    let d = dim as f64;
    let u = 2f64.powf(-2.0 * delta - 1.0)
        * gamma_ratio(
            &[0.5 * (d - 1.0), delta + 1.0, 0.5 * (d + 4.0 * delta + 2.0)],
            &[delta + 0.5, 0.5 * d + delta + 1.0, 0.5 * d + delta + 1.0],
        );
    let v = 2f64.powf(-2.0 * delta)
        * delta
        * gamma_ratio(
            &[0.5 * (d + 1.0), delta, 0.5 * (d + 4.0 * delta + 2.0)],
            &[delta + 0.5, 0.5 * d + delta + 1.0, 0.5 * d + delta + 1.0],
        );
    Ok((u, v))
}

/// Symplectic eigenvalue of a single polynomial-bump mode in the massless
/// vacuum.
pub fn single_mode_nu(delta: f64, dim: u32) -> Result<f64> {
    check_closed_form_args(1.0, delta, dim)?;
    let d = dim as f64;
    let inner = gamma_ratio(
        &[
            0.5 * (d - 1.0),
            0.5 * (d + 1.0),
            2.0 * delta,
            2.0 * delta + 2.0,
        ],
        &[0.5 * (d + 4.0 * delta + 1.0), 0.5 * (d + 4.0 * delta + 3.0)],
    );
    let outer = gamma_ratio(
        &[delta + 1.0, delta + 1.0, 0.5 * d + 2.0 * delta + 1.0],
        &[0.5 * d, delta + 0.5, delta + 1.5, 2.0 * delta + 1.0],
    );
    Ok(outer * inner.sqrt())
}

/// Large-dimension limit of [`single_mode_nu`].
pub fn single_mode_nu_limit(delta: f64) -> Result<f64> {
    if !(delta >= 1.0) || !delta.is_finite() {
        return Err(domain(format!("delta must be at least 1, got {delta}")));
    }
    let sq = gamma_ratio(
        &[
            2.0 * delta,
            delta + 1.0,
            delta + 1.0,
            delta + 1.0,
            delta + 1.0,
            2.0 * delta + 2.0,
        ],
        &[
            delta + 0.5,
            delta + 0.5,
            delta + 1.5,
            delta + 1.5,
            2.0 * delta + 1.0,
            2.0 * delta + 1.0,
        ],
    );
    Ok(sq.sqrt())
}

fn poly_bump_delta(s: &SmearingSpec) -> Option<f64> {
    match s.family {
        Family::PolyBump { delta } if delta >= 1.0 => Some(delta),
        _ => None,
    }
}

/// Closed-form correlator of two polynomial bumps with equal δ and radius in
/// the massless vacuum, for identical or non-overlapping supports.
pub fn correlator_analytic(
    f: &SmearingSpec,
    g: &SmearingSpec,
    params: &FieldParams,
    kind: CorrelatorKind,
) -> Result<f64> {
    if kind == CorrelatorKind::PhiPi {
        return Ok(0.0);
    }
    let unsupported = |why: &str| Err(Error::Unsupported(format!("no closed form: {why}")));
    let (df, dg) = match (poly_bump_delta(f), poly_bump_delta(g)) {
        (Some(a), Some(b)) => (a, b),
        _ => return unsupported("both smearings must be polynomial bumps with delta >= 1"),
    };
    if df != dg {
        return unsupported("bumps have different delta");
    }
    if (f.radius - g.radius).abs() > 1e-12 * f.radius {
        return unsupported("bumps have different radii");
    }
    if params.mu != 0.0 {
        return unsupported("massive field");
    }
    if params.dim <= 1 || f.dim != params.dim || g.dim != params.dim {
        return unsupported("needs D > 1 and matching dimensions");
    }
    let r = f.radius;
    let rho = distance(&f.center, &g.center) / r;
    let lambda = match kind {
        CorrelatorKind::PhiPhi => -1.0,
        _ => 1.0,
    };
    let coeff = if rho < 1e-12 {
        j_coeff(lambda, df, params.dim)?
    } else if rho >= 2.0 - 1e-12 {
        l_coeff(lambda, df, rho.max(2.0), params.dim)?
    } else {
        return unsupported("supports partially overlap");
    };
    let cc = (f.scale_c() * g.scale_c()).sqrt();
    let units = match kind {
        CorrelatorKind::PhiPhi => r / cc,
        _ => cc / r,
    };
    Ok(2.0 * n_delta_sq(df, params.dim) * units * coeff)
}

/// Correlator by radial quadrature in wavenumber space; any family, dimension
/// and mass.
pub fn correlator_numeric(
    f: &SmearingSpec,
    g: &SmearingSpec,
    params: &FieldParams,
    kind: CorrelatorKind,
) -> Result<f64> {
    Correlators::new(*params)?
        .with_method(Method::Numeric)
        .smeared(f, g, kind)
}

type Cache = Mutex<HashMap<u64, f64>>;

/// Correlator evaluator with memoisation of repeated smearing pairs and of
/// numerically computed Fourier transforms.
pub struct Correlators {
    params: FieldParams,
    method: Method,
    pairs: Mutex<HashMap<(String, String, u64, CorrelatorKind), f64>>,
    transforms: Mutex<HashMap<String, Arc<Cache>>>,
}

impl Correlators {
    pub fn new(params: FieldParams) -> Result<Self> {
        params.validate()?;
        Ok(Self {
            params,
            method: Method::Auto,
            pairs: Mutex::new(HashMap::new()),
            transforms: Mutex::new(HashMap::new()),
        })
    }

    pub fn with_method(mut self, method: Method) -> Self {
        self.method = method;
        self
    }

    pub fn params(&self) -> &FieldParams {
        &self.params
    }

    /// `⟨{O_a, O_b}⟩` for two linear operators.
    pub fn operators(&self, a: &[Term], b: &[Term]) -> Result<f64> {
        let mut acc = 0.0;
        for s in a {
            for t in b {
                if s.phi != 0.0 && t.phi != 0.0 {
                    acc += s.phi
                        * t.phi
                        * self.smeared(&s.smearing, &t.smearing, CorrelatorKind::PhiPhi)?;
                }
                if s.pi != 0.0 && t.pi != 0.0 {
                    acc += s.pi
                        * t.pi
                        * self.smeared(&s.smearing, &t.smearing, CorrelatorKind::PiPi)?;
                }
            }
        }
        Ok(acc)
    }

    /// `⟨{x_i, x_j}⟩`, `⟨{p_i, p_j}⟩` or `⟨{x_i, p_j}⟩` depending on `kind`.
    pub fn modes(&self, i: &ModeSpec, j: &ModeSpec, kind: CorrelatorKind) -> Result<f64> {
        match kind {
            CorrelatorKind::PhiPhi => self.operators(&i.x, &j.x),
            CorrelatorKind::PiPi => self.operators(&i.p, &j.p),
            CorrelatorKind::PhiPi => self.operators(&i.x, &j.p),
        }
    }

    /// Correlator of the smeared operators attached to `f` and `g`.
    pub fn smeared(&self, f: &SmearingSpec, g: &SmearingSpec, kind: CorrelatorKind) -> Result<f64> {
        if kind == CorrelatorKind::PhiPi {
            return Ok(0.0);
        }
        if f.dim != self.params.dim || g.dim != self.params.dim {
            return Err(domain("smearing dimension does not match the field"));
        }
        let d = distance(&f.center, &g.center);
        let (kf, kg) = (shape_key(f), shape_key(g));
        let key = if kf <= kg {
            (kf, kg, d.to_bits(), kind)
        } else {
            (kg, kf, d.to_bits(), kind)
        };
        if let Some(v) = self.pairs.lock().unwrap().get(&key) {
            return Ok(*v);
        }
        let v = match self.method {
            Method::Analytic => correlator_analytic(f, g, &self.params, kind)?,
            Method::Numeric => self.numeric(f, g, kind)?,
            Method::Auto => match correlator_analytic(f, g, &self.params, kind) {
                Ok(v) => v,
                Err(Error::Unsupported(_)) | Err(Error::NonConvergence { .. }) => {
                    self.numeric(f, g, kind)?
                }
                Err(e) => return Err(e),
            },
        };
        self.pairs.lock().unwrap().insert(key, v);
        Ok(v)
    }

    fn transform(&self, s: &SmearingSpec) -> Result<Transform> {
        let norm = s.normalization()?.value;
        if s.has_closed_transform() {
            return Ok(Transform {
                spec: s.clone(),
                norm,
                cache: None,
            });
        }
        let key = format!("{:?}|{:x}|{}", s.family, s.radius.to_bits(), s.dim);
        let cache = self
            .transforms
            .lock()
            .unwrap()
            .entry(key)
            .or_default()
            .clone();
        Ok(Transform {
            spec: s.clone(),
            norm,
            cache: Some(cache),
        })
    }

    fn numeric(&self, f: &SmearingSpec, g: &SmearingSpec, kind: CorrelatorKind) -> Result<f64> {
        let dim = self.params.dim;
        let m = self.params.mu;
        if kind == CorrelatorKind::PiPi && (!f.is_regular() || !g.is_regular()) {
            return Err(domain(
                "momentum fluctuations of a discontinuous profile diverge",
            ));
        }
        let d = distance(&f.center, &g.center);
        let (tf, tg) = (self.transform(f)?, self.transform(g)?);
        let momentum = kind == CorrelatorKind::PiPi;
        let cc = if momentum {
            f.scale_c() * g.scale_c()
        } else {
            1.0
        };
        let dm1 = dim as i32 - 1;
        let integrand = |k: f64| -> f64 {
            let w = (k * k + m * m).sqrt();
            let w = if momentum {
                w
            } else if w > 0.0 {
                1.0 / w
            } else {
                0.0
            };
            let lam = if d > 0.0 {
                angular_kernel(dim, k * d)
            } else {
                1.0
            };
            tf.eval(k) * tg.eval(k) * w * k.powi(dm1) * lam
        };

        let omega = f.outer_radius() + g.outer_radius() + d;
        let h = PI / omega;
        let orders = (f.boundary_order(), g.boundary_order());
        let sharpest = match orders {
            (Some(a), Some(b)) => a.min(b),
            (Some(a), None) | (None, Some(a)) => a,
            (None, None) => f64::INFINITY,
        };
        let cut = if sharpest <= 1.5 { 1000.0 } else { 200.0 };
        let k_max = (cut / f.feature_length().min(g.feature_length()))
            .max(50.0 * m)
            .max(40.0 * h);
        let panels = (k_max / h).ceil() as usize;
        let k_max = panels as f64 * h;
        let window = (panels * 3) / 4;

        let mut pts = vec![0.0];
        let mut small: Vec<f64> = (1..=8).map(|j| h * 0.5f64.powi(j)).collect();
        if m > 0.0 {
            small.extend((-12..=3).map(|j| m * 2f64.powi(j)).filter(|k| *k < h));
        }
        small.sort_by(f64::total_cmp);
        pts.extend(small);
        pts.extend((1..=window).map(|i| i as f64 * h));

        let self_pair = d == 0.0 && shape_key(f) == shape_key(g);
        let abs = if self_pair {
            0.0
        } else {
            let ff = self.smeared(
                &f.at(vec![0.0; dim as usize])?,
                &f.at(vec![0.0; dim as usize])?,
                kind,
            )?;
            let gg = self.smeared(
                &g.at(vec![0.0; dim as usize])?,
                &g.at(vec![0.0; dim as usize])?,
                kind,
            )?;
            1e-13 * (ff * gg).abs().sqrt() / (cc * sphere_area(dim) / (2.0 * PI).powi(dim as i32))
        };
        let tol = Tolerance {
            abs,
            rel: 1e-10,
            max_intervals: 100_000,
        };
        let fail = |e: Error| {
            Error::Quadrature(format!(
                "{kind:?} correlator of {} and {}: {e}",
                f.family.name(),
                g.family.name()
            ))
        };
        let (head, _) = quadrature::integrate(&integrand, &pts, tol).map_err(fail)?;
        let wpts: Vec<f64> = (window..=panels).map(|i| i as f64 * h).collect();
        let tol = Tolerance {
            abs: abs.max(1e-12 * head.abs()),
            ..tol
        };
        let (body, _) = quadrature::integrate(&integrand, &wpts, tol).map_err(fail)?;

        let tail = match orders {
            (Some(sf), Some(sg)) => {
                let mut p = if momentum { 1.0 } else { 3.0 } + sf + sg;
                if d > 0.0 {
                    p += 0.5 * (dim as f64 - 1.0);
                }
                let (a, b) = (window as f64 * h, k_max);
                let (weighted, _) =
                    quadrature::integrate(&|k: f64| integrand(k) * (k / b).powf(p), &wpts, tol)
                        .map_err(fail)?;
                let mean = weighted * b.powf(p) / (b - a);
                mean * b.powf(1.0 - p) / (p - 1.0)
            }
            _ => 0.0,
        };
        let total = head + body + tail;
        Ok(cc * sphere_area(dim) / (2.0 * PI).powi(dim as i32) * total)
    }
}

/// Imaginary coefficient of `[O_a, O_b]`, from `[Φ[f], Π[g]] = i c_g ∫ f g`.
pub fn commutator(a: &[Term], b: &[Term]) -> Result<f64> {
    let mut acc = 0.0;
    for s in a {
        for t in b {
            let cross = s.phi * t.pi * t.smearing.scale_c() - s.pi * t.phi * s.smearing.scale_c();
            if cross != 0.0 {
                acc += cross * overlap(&s.smearing, &t.smearing)?;
            }
        }
    }
    Ok(acc)
}

fn shape_key(s: &SmearingSpec) -> String {
    format!(
        "{:?}|{:x}|{:x}|{}",
        s.family,
        s.radius.to_bits(),
        s.scale_c().to_bits(),
        s.dim
    )
}

struct Transform {
    spec: SmearingSpec,
    norm: f64,
    cache: Option<Arc<Cache>>,
}

impl Transform {
    fn eval(&self, k: f64) -> f64 {
        match &self.cache {
            None => self
                .spec
                .radial_transform_with(self.norm, k)
                .unwrap_or(f64::NAN),
            Some(cache) => {
                if let Some(v) = cache.lock().unwrap().get(&k.to_bits()) {
                    return self.norm * v;
                }
                let v = self.spec.hankel_numeric(k).unwrap_or(f64::NAN);
                cache.lock().unwrap().insert(k.to_bits(), v);
                self.norm * v
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn bump(delta: f64, dim: u32, x0: f64) -> SmearingSpec {
        let mut c = vec![0.0; dim as usize];
        c[0] = x0;
        SmearingSpec::poly_bump(delta, 1.0, dim)
            .unwrap()
            .at(c)
            .unwrap()
    }

    #[test]
    fn field_params_reject_massless_line() {
        assert!(matches!(
            FieldParams::new(1, 0.0),
            Err(Error::InfraredDivergence)
        ));
        assert!(FieldParams::new(1, 0.01).is_ok());
        assert!(FieldParams::new(3, -1.0).is_err());
    }

    #[test]
    fn coefficient_reference_values() {
        // 30-digit evaluations of the gamma-function expressions
        assert_relative_eq!(
            j_coeff(-1.0, 1.0, 3).unwrap(),
            0.008_841_941_282_883_074,
            max_relative = 1e-13
        );
        assert_relative_eq!(
            j_coeff(1.0, 1.0, 3).unwrap(),
            0.053_051_647_697_298_45,
            max_relative = 1e-13
        );
        assert_relative_eq!(
            j_coeff(-1.0, 2.0, 2).unwrap(),
            0.001_045_211_875_748_602_4,
            max_relative = 1e-13
        );
        assert_relative_eq!(
            l_coeff(-1.0, 1.0, 4.0, 3).unwrap(),
            0.000_180_158_787_586_730_92,
            max_relative = 1e-13
        );
        assert_relative_eq!(
            l_coeff(1.0, 1.0, 4.0, 3).unwrap(),
            -0.000_024_798_943_580_387_062,
            max_relative = 1e-13
        );
        assert_relative_eq!(
            l_coeff(-1.0, 1.5, 2.01, 2).unwrap(),
            0.001_467_010_726_436_673,
            max_relative = 1e-11
        );
        assert_relative_eq!(n_delta_sq(1.0, 3), 26.25, max_relative = 1e-14);
        assert!(j_coeff(-1.0, 1.0, 1).is_err());
        assert!(l_coeff(-1.0, 1.0, 1.9, 3).is_err());
    }

    #[test]
    fn contact_coefficients() {
        let cases = [
            (2, -1.0, 0.008_215_141_582_847_862),
            (2, 1.0, -0.003_531_797_859_232_957),
            (3, -1.0, 0.000_772_071_351_688_891_4),
            (3, 1.0, -0.000_684_782_248_112_574),
        ];
        for (dim, lambda, want) in cases {
            assert_relative_eq!(
                l_coeff(lambda, 1.0, 2.0, dim).unwrap(),
                want,
                max_relative = 1e-10
            );
        }
    }

    #[test]
    fn self_correlators_match_quadrature_oracle() {
        let p = FieldParams::massless(3).unwrap();
        let f = bump(1.0, 3, 0.0);
        let phi = correlator_analytic(&f, &f, &p, CorrelatorKind::PhiPhi).unwrap();
        let pi = correlator_analytic(&f, &f, &p, CorrelatorKind::PiPi).unwrap();
        assert_relative_eq!(phi, 0.464_201_917_351_361_4, max_relative = 1e-13);
        assert_relative_eq!(pi, 2.785_211_504_108_168_4, max_relative = 1e-13);
        assert_eq!(
            correlator_analytic(&f, &f, &p, CorrelatorKind::PhiPi).unwrap(),
            0.0
        );
        assert_relative_eq!(
            single_mode_nu(1.0, 3).unwrap(),
            (phi * pi).sqrt(),
            max_relative = 1e-13
        );
    }

    #[test]
    fn numeric_path_reproduces_closed_forms() {
        for (dim, rho) in [(3, 0.0), (3, 4.0), (2, 0.0), (2, 2.5)] {
            let p = FieldParams::massless(dim).unwrap();
            let (f, g) = (bump(1.0, dim, 0.0), bump(1.0, dim, rho));
            for kind in [CorrelatorKind::PhiPhi, CorrelatorKind::PiPi] {
                let a = correlator_analytic(&f, &g, &p, kind).unwrap();
                let n = correlator_numeric(&f, &g, &p, kind).unwrap();
                assert_relative_eq!(n, a, max_relative = 1e-6);
            }
        }
    }

    #[test]
    fn asymptotic_coefficients_match_leading_terms() {
        for dim in 2..=5 {
            for delta in [1.0, 1.5, 2.0] {
                let (u, v) = asymptotic_u_v(delta, dim).unwrap();
                assert!(u > 0.0 && v > 0.0);
                let n2 = 2.0 * n_delta_sq(delta, dim);
                let rho: f64 = 1e4;
                let phi = n2 * l_coeff(-1.0, delta, rho, dim).unwrap() * rho.powi(dim as i32 - 1);
                let pi = n2 * l_coeff(1.0, delta, rho, dim).unwrap() * rho.powi(dim as i32 + 1);
                assert_relative_eq!(phi, u, max_relative = 1e-6);
                assert_relative_eq!(pi, -v, max_relative = 1e-6);
            }
        }
    }

    #[test]
    fn single_mode_nu_approaches_large_dimension_limit() {
        for delta in [1.0, 2.0] {
            let limit = single_mode_nu_limit(delta).unwrap();
            let mut prev = f64::INFINITY;
            for dim in [2, 3, 5, 10, 50, 400] {
                let nu = single_mode_nu(delta, dim).unwrap();
                assert!(nu > 1.0 && nu < prev);
                prev = nu;
            }
            assert_relative_eq!(
                single_mode_nu(delta, 4000).unwrap(),
                limit,
                max_relative = 1e-3
            );
        }
    }

    #[test]
    fn rescaling_invariance_of_the_product() {
        let p = FieldParams::massless(3).unwrap();
        let a = SmearingSpec::poly_bump(1.0, 1.0, 3).unwrap();
        let b = SmearingSpec::poly_bump(1.0, 2.5, 3)
            .unwrap()
            .with_scale_c(0.3)
            .unwrap();
        let prod = |s: &SmearingSpec| {
            correlator_numeric(s, s, &p, CorrelatorKind::PhiPhi).unwrap()
                * correlator_numeric(s, s, &p, CorrelatorKind::PiPi).unwrap()
        };
        assert_relative_eq!(prod(&a), prod(&b), max_relative = 1e-8);
    }

    #[test]
    fn massive_line_correlators() {
        let p = FieldParams::new(1, 0.01).unwrap();
        let (f, g) = (bump(1.0, 1, 0.0), bump(1.0, 1, 2.01));
        let s_phi = correlator_numeric(&f, &f, &p, CorrelatorKind::PhiPhi).unwrap();
        let c_phi = correlator_numeric(&f, &g, &p, CorrelatorKind::PhiPhi).unwrap();
        let c_pi = correlator_numeric(&f, &g, &p, CorrelatorKind::PiPi).unwrap();
        assert!(s_phi > c_phi && c_phi > 0.0);
        assert!(c_pi < 0.0);
        // infrared growth as the mass decreases
        let lighter = FieldParams::new(1, 0.001).unwrap();
        assert!(correlator_numeric(&f, &f, &lighter, CorrelatorKind::PhiPhi).unwrap() > s_phi);
    }

    #[test]
    fn commutators() {
        let f = bump(1.0, 3, 0.0);
        let m = ModeSpec::simple(f.clone());
        assert_relative_eq!(commutator(&m.x, &m.p).unwrap(), 1.0, max_relative = 1e-10);
        assert_relative_eq!(commutator(&m.p, &m.x).unwrap(), -1.0, max_relative = 1e-10);
        assert_eq!(commutator(&m.x, &m.x).unwrap(), 0.0);
        let g = bump(1.0, 3, 3.0);
        assert_eq!(commutator(&m.x, &ModeSpec::simple(g).p).unwrap(), 0.0);
    }

    #[test]
    fn mode_round_trip_and_validation() {
        let m = ModeSpec::simple(bump(1.0, 2, 0.0));
        assert!(m.as_simple().is_some());
        let p2 = FieldParams::massless(2).unwrap();
        let p3 = FieldParams::massless(3).unwrap();
        assert!(m.validate(0, &p2).is_ok());
        assert!(matches!(
            m.validate(4, &p3),
            Err(Error::InvalidMode { index: 4, .. })
        ));
        let back: ModeSpec = serde_json::from_str(&serde_json::to_string(&m).unwrap()).unwrap();
        assert_eq!(back, m);
    }
}
