//! Spatial arrangements of modes: ball pairs, hexagonal and close-packed
//! lattices, lines, concentric shells and stacks of orthogonal profiles
//! sharing one region.

use crate::correlators::{ModeSpec, Term};
use crate::error::{domain, Result};
use crate::gaussian::{Bipartition, Side};
use crate::smearing::{distance, Family, SmearingSpec};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::f64::consts::PI;

const CONTACT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Configuration {
    pub name: String,
    pub dim: u32,
    pub modes: Vec<ModeSpec>,
    pub bipartition: Bipartition,
    /// Modes share support by design and rely on orthogonality instead of
    /// disjointness.
    #[serde(default)]
    pub overlapping: bool,
    #[serde(default)]
    pub parameters: BTreeMap<String, f64>,
}

impl Configuration {
    fn new(
        name: &str,
        dim: u32,
        modes: Vec<ModeSpec>,
        labels: Vec<Side>,
        parameters: &[(&str, f64)],
    ) -> Result<Self> {
        let config = Self {
            name: name.to_string(),
            dim,
            modes,
            bipartition: Bipartition::new(labels)?,
            overlapping: false,
            parameters: parameters
                .iter()
                .map(|(k, v)| (k.to_string(), *v))
                .collect(),
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.bipartition.len() != self.modes.len() {
            return Err(domain(format!(
                "bipartition labels {} modes but there are {}",
                self.bipartition.len(),
                self.modes.len()
            )));
        }
        if !self.overlapping {
            self.check_disjoint()?;
        }
        Ok(())
    }

    /// Every smearing of one mode must be disjoint from every smearing of any
    /// other mode, touching allowed.
    pub fn check_disjoint(&self) -> Result<()> {
        for i in 0..self.modes.len() {
            for j in (i + 1)..self.modes.len() {
                for f in self.modes[i].smearings() {
                    for g in self.modes[j].smearings() {
                        if !supports_disjoint(f, g) {
                            return Err(domain(format!("supports of modes {i} and {j} overlap")));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Smallest gap between the supports of modes in different subsystems,
    /// in units of the first mode's radius.
    pub fn min_gap(&self) -> f64 {
        let a = self.bipartition.indices(Side::A);
        let b = self.bipartition.indices(Side::B);
        let mut gap = f64::INFINITY;
        for &i in &a {
            for &j in &b {
                for f in self.modes[i].smearings() {
                    for g in self.modes[j].smearings() {
                        gap = gap.min(support_gap(f, g));
                    }
                }
            }
        }
        gap
    }
}

fn support_gap(f: &SmearingSpec, g: &SmearingSpec) -> f64 {
    let d = distance(&f.center, &g.center);
    if d <= CONTACT_TOL {
        let (fa, fb) = f.support();
        let (ga, gb) = g.support();
        return (ga - fb).max(fa - gb);
    }
    d - f.outer_radius() - g.outer_radius()
}

pub fn supports_disjoint(f: &SmearingSpec, g: &SmearingSpec) -> bool {
    let scale = f.outer_radius().max(g.outer_radius());
    support_gap(f, g) >= -CONTACT_TOL * scale
}

fn point(dim: u32, xy: &[f64]) -> Vec<f64> {
    let mut c = vec![0.0; dim as usize];
    for (k, v) in xy.iter().enumerate().take(dim as usize) {
        c[k] = *v;
    }
    c
}

fn bump(delta: f64, dim: u32) -> Result<SmearingSpec> {
    SmearingSpec::poly_bump(delta, 1.0, dim)
}

fn placed(template: &SmearingSpec, centers: &[Vec<f64>]) -> Result<Vec<ModeSpec>> {
    centers
        .iter()
        .map(|c| Ok(ModeSpec::simple(template.at(c.clone())?)))
        .collect()
}

fn one_vs_rest(n: usize) -> Vec<Side> {
    std::iter::once(Side::A)
        .chain(std::iter::repeat_n(Side::B, n))
        .collect()
}

/// Two copies of `template` with centers `rho` radii apart; touching
/// supports (`rho = 2`) are accepted.
pub fn ball_pair(rho: f64, template: &SmearingSpec) -> Result<Configuration> {
    let r = template.outer_radius();
    if !(rho >= 2.0 * r / template.radius - CONTACT_TOL) || !rho.is_finite() {
        return Err(domain(format!("supports overlap at rho = {rho}")));
    }
    let centers = [
        point(template.dim, &[0.0]),
        point(template.dim, &[rho * template.radius]),
    ];
    Configuration::new(
        "ball_pair",
        template.dim,
        placed(template, &centers)?,
        vec![Side::A, Side::B],
        &[("rho", rho)],
    )
}

/// Two strictly disjoint copies of `template`.
pub fn two_balls(rho: f64, template: &SmearingSpec) -> Result<Configuration> {
    if !(rho > 2.0 * template.outer_radius() / template.radius) {
        return Err(domain(format!(
            "two_balls needs disjoint supports, got rho = {rho}"
        )));
    }
    let mut c = ball_pair(rho, template)?;
    c.name = "two_balls".into();
    Ok(c)
}

/// Hexagonal lattice of contact-spaced unit disks (nearest-neighbour
/// distance 2) without the origin, ordered by distance and then by polar
/// angle in [0, 2π).
pub fn hex_lattice_points(count: usize) -> Vec<[f64; 2]> {
    let mut layers = 1;
    while 3 * layers * (layers + 1) < count {
        layers += 1;
    }
    let l = layers as i64 + 1;
    let s3 = 3f64.sqrt();
    let mut pts: Vec<(f64, f64, [f64; 2])> = Vec::new();
    for i in -2 * l..=2 * l {
        for j in -2 * l..=2 * l {
            if i == 0 && j == 0 {
                continue;
            }
            let (x, y) = (2.0 * i as f64 + j as f64, s3 * j as f64);
            let r = x.hypot(y);
            if r > 2.0 * l as f64 + 1e-9 {
                continue;
            }
            pts.push((r, polar_angle(x, y), [x, y]));
        }
    }
    sort_by_distance_then_angle(&mut pts);
    pts.into_iter().take(count).map(|p| p.2).collect()
}

fn polar_angle(x: f64, y: f64) -> f64 {
    let a = y.atan2(x);
    if a < 0.0 {
        a + 2.0 * PI
    } else {
        a
    }
}

fn sort_by_distance_then_angle<T>(pts: &mut [(f64, f64, T)]) {
    pts.sort_by(|a, b| {
        let (ra, rb) = ((a.0 * 1e9).round(), (b.0 * 1e9).round());
        ra.total_cmp(&rb)
            .then(((a.1 * 1e9).round()).total_cmp(&(b.1 * 1e9).round()))
    });
}

/// Central disk A surrounded by `n_modes_b` contact-spaced disks filling the
/// hexagonal lattice nearest-first.
pub fn hex_layers(n_modes_b: usize, delta: f64) -> Result<Configuration> {
    if n_modes_b < 1 {
        return Err(domain("hex_layers needs at least one B mode"));
    }
    let t = bump(delta, 2)?;
    let mut centers = vec![vec![0.0, 0.0]];
    centers.extend(
        hex_lattice_points(n_modes_b)
            .into_iter()
            .map(|p| p.to_vec()),
    );
    Configuration::new(
        "hex_layers",
        2,
        placed(&t, &centers)?,
        one_vs_rest(n_modes_b),
        &[("n_modes_b", n_modes_b as f64), ("delta", delta)],
    )
}

/// Central disk A and six B disks at distance `rho` in the hexagonal
/// directions.
pub fn hex_ring_at_distance(rho: f64, delta: f64) -> Result<Configuration> {
    if !(rho > 2.0) || !rho.is_finite() {
        return Err(domain(format!("hex ring needs rho > 2, got {rho}")));
    }
    let t = bump(delta, 2)?;
    let mut centers = vec![vec![0.0, 0.0]];
    centers.extend((0..6).map(|k| {
        let a = k as f64 * PI / 3.0;
        vec![rho * a.cos(), rho * a.sin()]
    }));
    Configuration::new(
        "hex_ring",
        2,
        placed(&t, &centers)?,
        one_vs_rest(6),
        &[("rho", rho), ("delta", delta)],
    )
}

/// `2 n_per_side` touching disks on a line, alternating between A and B.
pub fn alternating_line(n_per_side: usize, delta: f64) -> Result<Configuration> {
    if n_per_side < 1 {
        return Err(domain("alternating_line needs at least one mode per side"));
    }
    let t = bump(delta, 2)?;
    let n = 2 * n_per_side;
    let centers: Vec<Vec<f64>> = (0..n).map(|i| vec![2.0 * i as f64, 0.0]).collect();
    let labels = (0..n)
        .map(|i| if i % 2 == 0 { Side::A } else { Side::B })
        .collect();
    Configuration::new(
        "alternating_line",
        2,
        placed(&t, &centers)?,
        labels,
        &[("n_per_side", n_per_side as f64), ("delta", delta)],
    )
}

/// Two interlocking hexagonal patches of `n_per_cell` contact-spaced disks.
/// Patch B is patch A translated by `(L+1)a₁ + L a₂` on the lattice (so the
/// patches touch along a zig-zag face) and then pushed apart by `gap` radii
/// along the translation.
pub fn two_hex_cells(gap: f64, n_per_cell: usize, delta: f64) -> Result<Configuration> {
    if !(gap >= 0.0) || !gap.is_finite() {
        return Err(domain(format!("gap must be non-negative, got {gap}")));
    }
    if n_per_cell < 1 {
        return Err(domain("two_hex_cells needs at least one mode per cell"));
    }
    let mut layers = 0usize;
    while 1 + 3 * layers * (layers + 1) < n_per_cell {
        layers += 1;
    }
    let t = bump(delta, 2)?;
    let mut cell = vec![[0.0, 0.0]];
    cell.extend(hex_lattice_points(n_per_cell - 1));
    let l = layers as f64;
    let shift = [2.0 * (l + 1.0) + l, 3f64.sqrt() * l];
    let norm = shift[0].hypot(shift[1]);
    let off = [
        shift[0] + gap * shift[0] / norm,
        shift[1] + gap * shift[1] / norm,
    ];
    let centers: Vec<Vec<f64>> = cell
        .iter()
        .map(|p| p.to_vec())
        .chain(cell.iter().map(|p| vec![p[0] + off[0], p[1] + off[1]]))
        .collect();
    let labels = std::iter::repeat_n(Side::A, n_per_cell)
        .chain(std::iter::repeat_n(Side::B, n_per_cell))
        .collect();
    Configuration::new(
        "two_hex_cells",
        2,
        placed(&t, &centers)?,
        labels,
        &[
            ("gap", gap),
            ("n_per_cell", n_per_cell as f64),
            ("delta", delta),
        ],
    )
}

/// Hexagonal close packing of unit spheres (contact distance 2) without the
/// origin, nearest-first with a deterministic tie-break on layer and angle.
pub fn hcp_points(count: usize) -> Vec<[f64; 3]> {
    let a = 2.0;
    let s3 = 3f64.sqrt();
    let h = a * (2.0f64 / 3.0).sqrt();
    let mut reach = 2i64;
    loop {
        let radius = reach as f64 * h;
        let mut pts: Vec<(f64, f64, [f64; 3], i64)> = Vec::new();
        let span = (radius / a).ceil() as i64 + 2;
        for k in -reach..=reach {
            let odd = k.rem_euclid(2) as f64;
            for i in -span..=span {
                for j in -span..=span {
                    if i == 0 && j == 0 && k == 0 {
                        continue;
                    }
                    let x = a * (i as f64 + 0.5 * j as f64 + 0.5 * odd);
                    let y = a * (0.5 * s3 * j as f64 + s3 / 6.0 * odd);
                    let z = h * k as f64;
                    let r = (x * x + y * y + z * z).sqrt();
                    if r <= radius + 1e-9 {
                        pts.push((r, polar_angle(x, y), [x, y, z], k));
                    }
                }
            }
        }
        // every site within `radius` is present, so the nearest `count` are exact
        if pts.len() >= count {
            let mut sorted: Vec<(f64, (i64, f64), [f64; 3])> =
                pts.iter().map(|p| (p.0, (p.3, p.1), p.2)).collect();
            sorted.sort_by(|p, q| {
                let (ra, rb) = ((p.0 * 1e9).round(), (q.0 * 1e9).round());
                ra.total_cmp(&rb)
                    .then(p.1 .0.cmp(&q.1 .0))
                    .then(((p.1 .1 * 1e9).round()).total_cmp(&(q.1 .1 * 1e9).round()))
            });
            return sorted.into_iter().take(count).map(|p| p.2).collect();
        }
        reach += 1;
    }
}

/// Central sphere A and `n_modes_b` B spheres filling the close packing.
pub fn hcp_packing(n_modes_b: usize, delta: f64) -> Result<Configuration> {
    if n_modes_b < 1 {
        return Err(domain("hcp_packing needs at least one B mode"));
    }
    let t = bump(delta, 3)?;
    let mut centers = vec![vec![0.0; 3]];
    centers.extend(hcp_points(n_modes_b).into_iter().map(|p| p.to_vec()));
    Configuration::new(
        "hcp_packing",
        3,
        placed(&t, &centers)?,
        one_vs_rest(n_modes_b),
        &[("n_modes_b", n_modes_b as f64), ("delta", delta)],
    )
}

/// Ball of unit radius (A) inside a concentric shell (B) with inner radius
/// `r_b` and thickness `d_b`.
pub fn ball_and_shell(r_b: f64, d_b: f64, dim: u32) -> Result<Configuration> {
    if !(r_b >= 1.0) || !(d_b > 0.0) || !r_b.is_finite() || !d_b.is_finite() {
        return Err(domain(format!(
            "ball_and_shell needs r_b >= 1 and d_b > 0, got {r_b}, {d_b}"
        )));
    }
    if dim < 2 {
        return Err(domain("ball_and_shell needs D >= 2"));
    }
    let ball = SmearingSpec::centered(Family::BallCos2, 1.0, dim)?;
    let shell = SmearingSpec::shell_sin2(r_b, d_b, dim)?;
    Configuration::new(
        "ball_and_shell",
        dim,
        vec![ModeSpec::simple(ball), ModeSpec::simple(shell)],
        vec![Side::A, Side::B],
        &[("r_b", r_b), ("d_b", d_b), ("dimension", dim as f64)],
    )
}

/// Unit ball followed by `n_shells` touching shells of equal thickness,
/// labelled A, B, A, … outwards.
pub fn onion(n_shells: usize, dim: u32, thickness: f64) -> Result<Configuration> {
    if n_shells < 1 {
        return Err(domain("onion needs at least one shell"));
    }
    if dim < 2 {
        return Err(domain("onion needs D >= 2"));
    }
    let mut modes = vec![ModeSpec::simple(SmearingSpec::centered(
        Family::BallCos2,
        1.0,
        dim,
    )?)];
    for k in 0..n_shells {
        modes.push(ModeSpec::simple(SmearingSpec::shell_sin2(
            1.0 + k as f64 * thickness,
            thickness,
            dim,
        )?));
    }
    let labels = (0..=n_shells)
        .map(|i| if i % 2 == 0 { Side::A } else { Side::B })
        .collect();
    Configuration::new(
        "onion",
        dim,
        modes,
        labels,
        &[
            ("n_shells", n_shells as f64),
            ("dimension", dim as f64),
            ("thickness", thickness),
        ],
    )
}

fn check_sinc_dim(dim: u32) -> Result<()> {
    if dim != 3 {
        return Err(domain(format!(
            "sinc profiles are mutually orthogonal only in D = 3, got D = {dim}"
        )));
    }
    Ok(())
}

/// Two sinc modes of orders `n_a` and `n_b` on the same unit ball.
pub fn sinc_stack(n_a: u32, n_b: u32, dim: u32) -> Result<Configuration> {
    check_sinc_dim(dim)?;
    if n_a == n_b {
        return Err(domain("sinc_stack needs two different orders"));
    }
    let a = SmearingSpec::centered(Family::Sinc { n: n_a }, 1.0, dim)?;
    let b = SmearingSpec::centered(Family::Sinc { n: n_b }, 1.0, dim)?;
    let mut config = Configuration {
        name: "sinc_stack".into(),
        dim,
        modes: vec![ModeSpec::simple(a), ModeSpec::simple(b)],
        bipartition: Bipartition::new(vec![Side::A, Side::B])?,
        overlapping: true,
        parameters: BTreeMap::new(),
    };
    config.parameters.insert("n_a".into(), n_a as f64);
    config.parameters.insert("n_b".into(), n_b as f64);
    config.validate()?;
    Ok(config)
}

/// A mode mixing field and momentum of the first `2 n_terms` sinc profiles
/// on the unit ball at `center`:
/// `x = Σ (Φ⁽²ⁱ⁻¹⁾ − Π⁽²ⁱ⁾)/√(2N)`, `p = Σ (Π⁽²ⁱ⁻¹⁾ + Φ⁽²ⁱ⁾)/√(2N)`.
pub fn sinc_mixture_mode(n_terms: u32, center: Vec<f64>) -> Result<ModeSpec> {
    if n_terms < 1 {
        return Err(domain("mixture needs at least one pair of profiles"));
    }
    let dim = center.len() as u32;
    check_sinc_dim(dim)?;
    let w = 1.0 / (2.0 * n_terms as f64).sqrt();
    let mut x = Vec::new();
    let mut p = Vec::new();
    for i in 1..=n_terms {
        let odd = SmearingSpec::new(Family::Sinc { n: 2 * i - 1 }, center.clone(), 1.0, dim)?;
        let even = SmearingSpec::new(Family::Sinc { n: 2 * i }, center.clone(), 1.0, dim)?;
        x.push(Term::field(odd.clone(), w));
        x.push(Term::momentum(even.clone(), -w));
        p.push(Term::momentum(odd, w));
        p.push(Term::field(even, w));
    }
    Ok(ModeSpec { x, p })
}

/// Two mixture modes on touching unit balls.
pub fn sinc_mixture_pair(n_terms: u32) -> Result<Configuration> {
    let a = sinc_mixture_mode(n_terms, vec![0.0; 3])?;
    let b = sinc_mixture_mode(n_terms, vec![2.0, 0.0, 0.0])?;
    Configuration::new(
        "sinc_mixture_pair",
        3,
        vec![a, b],
        vec![Side::A, Side::B],
        &[("n_terms", n_terms as f64)],
    )
}

/// Serializable description of a generator call.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "generator", rename_all = "snake_case", deny_unknown_fields)]
pub enum Generator {
    TwoBalls {
        rho: f64,
        delta: f64,
        dimension: u32,
    },
    BallPair {
        rho: f64,
        delta: f64,
        dimension: u32,
    },
    HexLayers {
        n_modes_b: usize,
        delta: f64,
    },
    HexRing {
        rho: f64,
        delta: f64,
    },
    AlternatingLine {
        n_per_side: usize,
        delta: f64,
    },
    TwoHexCells {
        gap: f64,
        n_per_cell: usize,
        delta: f64,
    },
    HcpPacking {
        n_modes_b: usize,
        delta: f64,
    },
    BallAndShell {
        r_b: f64,
        d_b: f64,
        dimension: u32,
    },
    Onion {
        n_shells: usize,
        dimension: u32,
        #[serde(default = "default_thickness")]
        thickness: f64,
    },
    SincStack {
        n_a: u32,
        n_b: u32,
        dimension: u32,
    },
    SincMixturePair {
        n_terms: u32,
    },
}

fn default_thickness() -> f64 {
    0.5
}

impl Generator {
    pub fn build(&self) -> Result<Configuration> {
        match *self {
            Generator::TwoBalls {
                rho,
                delta,
                dimension,
            } => two_balls(rho, &bump(delta, dimension)?),
            Generator::BallPair {
                rho,
                delta,
                dimension,
            } => ball_pair(rho, &bump(delta, dimension)?),
            Generator::HexLayers { n_modes_b, delta } => hex_layers(n_modes_b, delta),
            Generator::HexRing { rho, delta } => hex_ring_at_distance(rho, delta),
            Generator::AlternatingLine { n_per_side, delta } => alternating_line(n_per_side, delta),
            Generator::TwoHexCells {
                gap,
                n_per_cell,
                delta,
            } => two_hex_cells(gap, n_per_cell, delta),
            Generator::HcpPacking { n_modes_b, delta } => hcp_packing(n_modes_b, delta),
            Generator::BallAndShell {
                r_b,
                d_b,
                dimension,
            } => ball_and_shell(r_b, d_b, dimension),
            Generator::Onion {
                n_shells,
                dimension,
                thickness,
            } => onion(n_shells, dimension, thickness),
            Generator::SincStack {
                n_a,
                n_b,
                dimension,
            } => sinc_stack(n_a, n_b, dimension),
            Generator::SincMixturePair { n_terms } => sinc_mixture_pair(n_terms),
        }
    }
}
