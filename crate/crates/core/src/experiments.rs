//! Named parameter sweeps. Each experiment declares its parameters with
//! defaults, evaluates one row per point of the Cartesian product of its grid
//! parameters, and reports numeric columns plus an optional summary.

use crate::correlators::{
    single_mode_nu, single_mode_nu_limit, CorrelatorKind, Correlators, FieldParams,
};
use crate::error::{Error, Result};
use crate::gaussian::{
    build_covariance_with, entanglement_threshold, entropy_of_spectrum, log_negativity_of_spectrum,
    mutual_information, partial_transpose_spectrum, rindler_two_mode, symplectic_spectrum,
    SymplecticSpectrum,
};
use crate::geometry::{
    alternating_line, ball_and_shell, ball_pair, hcp_packing, hex_layers, hex_ring_at_distance,
    onion, sinc_stack, two_hex_cells, Configuration,
};
use crate::smearing::SmearingSpec;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    #[default]
    Ci,
    Full,
}

/// Parameter overrides: every value is a list, scalars have one element.
pub type Overrides = BTreeMap<String, Vec<f64>>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ParamKind {
    Scalar,
    Grid,
}

struct Param {
    key: &'static str,
    kind: ParamKind,
    default: Vec<f64>,
}

fn scalar(key: &'static str, v: f64) -> Param {
    Param {
        key,
        kind: ParamKind::Scalar,
        default: vec![v],
    }
}

fn grid(key: &'static str, values: Vec<f64>) -> Param {
    Param {
        key,
        kind: ParamKind::Grid,
        default: values,
    }
}

type RowFn = fn(&Row) -> Result<Vec<f64>>;
type SummaryFn = fn(&ExperimentResult) -> BTreeMap<String, f64>;

struct Experiment {
    name: &'static str,
    description: &'static str,
    params: fn(Scale) -> Vec<Param>,
    columns: &'static [&'static str],
    row: RowFn,
    summary: Option<SummaryFn>,
}

/// Resolved parameter values for one row.
#[derive(Debug, Clone)]
pub struct Row {
    values: BTreeMap<String, f64>,
}

impl Row {
    pub fn get(&self, key: &str) -> f64 {
        self.values[key]
    }

    pub fn count(&self, key: &str) -> Result<usize> {
        let v = self.get(key);
        if v < 0.0 || v.fract() != 0.0 || !v.is_finite() {
            return Err(Error::InvalidParameter {
                key: key.into(),
                reason: format!("expected a non-negative integer, got {v}"),
            });
        }
        Ok(v as usize)
    }

    pub fn dim(&self, key: &str) -> Result<u32> {
        let d = self.count(key)?;
        if d < 1 {
            return Err(Error::InvalidParameter {
                key: key.into(),
                reason: "dimension must be at least 1".into(),
            });
        }
        Ok(d as u32)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub axes: Vec<f64>,
    /// Empty when the row failed.
    pub values: Vec<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub name: String,
    pub axes: Vec<String>,
    pub columns: Vec<String>,
    pub rows: Vec<ResultRow>,
    pub summary: BTreeMap<String, f64>,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub version: String,
    pub scale: Scale,
    pub parameters: BTreeMap<String, Vec<f64>>,
}

impl ExperimentResult {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.columns.iter().position(|c| c == name)?;
        Some(
            self.rows
                .iter()
                .map(|r| r.values.get(idx).copied().unwrap_or(f64::NAN))
                .collect(),
        )
    }

    pub fn axis(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.axes.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r.axes[idx]).collect())
    }

    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| r.error.is_some()).count()
    }

    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let header: Vec<&str> = self
            .axes
            .iter()
            .chain(&self.columns)
            .map(String::as_str)
            .chain(std::iter::once("error"))
            .collect();
        w.write_record(&header)?;
        for row in &self.rows {
            let mut rec: Vec<String> = row.axes.iter().map(|v| v.to_string()).collect();
            if row.error.is_some() {
                rec.extend(self.columns.iter().map(|_| String::new()));
            } else {
                rec.extend(row.values.iter().map(|v| v.to_string()));
            }
            rec.push(row.error.clone().unwrap_or_default());
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Writes `<name>.csv` and the `<name>.json` sidecar into `dir`.
    pub fn write_outputs(&self, dir: &Path) -> Result<(PathBuf, PathBuf)> {
        std::fs::create_dir_all(dir)?;
        let csv_path = dir.join(format!("{}.csv", self.name));
        let json_path = dir.join(format!("{}.json", self.name));
        self.write_csv(std::fs::File::create(&csv_path)?)?;
        let sidecar = serde_json::json!({
            "name": self.name,
            "provenance": self.provenance,
            "axes": self.axes,
            "columns": self.columns,
            "summary": self.summary,
            "rows": self.rows.len(),
            "failed_rows": self.failures(),
        });
        std::fs::write(&json_path, serde_json::to_string_pretty(&sidecar)? + "\n")?;
        Ok((csv_path, json_path))
    }
}

pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    if n <= 1 {
        return vec![a];
    }
    (0..n)
        .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
        .collect()
}

pub fn logspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    let mut v: Vec<f64> = linspace(a.ln(), b.ln(), n)
        .into_iter()
        .map(f64::exp)
        .collect();
    v[0] = a;
    if n > 1 {
        v[n - 1] = b;
    }
    v
}

/// `a, a+step, …` up to and including `b`, with values rounded to 12
/// significant digits so grids read cleanly.
pub fn stepped(a: f64, b: f64, step: f64) -> Vec<f64> {
    let n = ((b - a) / step + 1e-9).floor() as usize;
    (0..=n).map(|i| round12(a + step * i as f64)).collect()
}

fn round12(x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let mag = 10f64.powi(11 - x.abs().log10().floor() as i32);
    (x * mag).round() / mag
}

fn counts(a: usize, b: usize) -> Vec<f64> {
    (a..=b).map(|v| v as f64).collect()
}

/// Least-squares line `y = slope·x + intercept` and its coefficient of
/// determination.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let syy: f64 = y.iter().map(|b| (b - my) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy == 0.0 {
        1.0
    } else {
        sxy * sxy / (sxx * syy)
    };
    (slope, intercept, r2)
}

/// Entanglement figures of a configuration in the field vacuum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Analysis {
    pub log_neg: f64,
    pub nu_tilde_min: f64,
    pub nu_min: f64,
    pub mutual_info: Option<f64>,
}

pub fn analyze(config: &Configuration, params: FieldParams, with_mi: bool) -> Result<Analysis> {
    let corr = Correlators::new(params)?;
    let state = build_covariance_with(&config.modes, &corr)?;
    let pt: SymplecticSpectrum = partial_transpose_spectrum(&state, &config.bipartition)?;
    let nu_min = symplectic_spectrum(&state)?.min();
    let mutual_info = if with_mi {
        Some(mutual_information(&state, &config.bipartition)?)
    } else {
        None
    };
    Ok(Analysis {
        log_neg: log_negativity_of_spectrum(&pt),
        nu_tilde_min: pt.min(),
        nu_min,
        mutual_info,
    })
}

fn bump(delta: f64, dim: u32) -> Result<SmearingSpec> {
    SmearingSpec::poly_bump(delta, 1.0, dim)
}

fn ln_row(config: Result<Configuration>, params: Result<FieldParams>) -> Result<Vec<f64>> {
    let a = analyze(&config?, params?, false)?;
    Ok(vec![a.log_neg, a.nu_tilde_min])
}

fn ln_mi_row(config: Result<Configuration>, params: Result<FieldParams>) -> Result<Vec<f64>> {
    let a = analyze(&config?, params?, true)?;
    Ok(vec![
        a.log_neg,
        a.nu_tilde_min,
        a.mutual_info.unwrap_or(f64::NAN),
    ])
}

const LN: &[&str] = &["log_neg", "nu_tilde_min"];
const LN_MI: &[&str] = &["log_neg", "nu_tilde_min", "mutual_info"];

fn registry() -> Vec<Experiment> {
    vec![
        Experiment {
            name: "correlations_vs_rho",
            description:
                "self and cross correlators of two polynomial bumps against center distance",
            params: |_| {
                vec![
                    scalar("delta", 1.0),
                    scalar("dimension", 3.0),
                    scalar("mu", 0.0),
                    grid("rho", logspace(2.01, 100.0, 40)),
                ]
            },
            columns: &["phiphi_self", "pipi_self", "phiphi_cross", "pipi_cross"],
            row: |r| {
                let dim = r.dim("dimension")?;
                let corr = Correlators::new(FieldParams::new(dim, r.get("mu"))?)?;
                let c = ball_pair(r.get("rho"), &bump(r.get("delta"), dim)?)?;
                let (f, g) = (
                    c.modes[0].as_simple().unwrap(),
                    c.modes[1].as_simple().unwrap(),
                );
                Ok(vec![
                    corr.smeared(f, f, CorrelatorKind::PhiPhi)?,
                    corr.smeared(f, f, CorrelatorKind::PiPi)?,
                    corr.smeared(f, g, CorrelatorKind::PhiPhi)?,
                    corr.smeared(f, g, CorrelatorKind::PiPi)?,
                ])
            },
            summary: None,
        },
        Experiment {
            name: "entropy_vs_D",
            description:
                "symplectic eigenvalue and entropy of a single bump mode against dimension",
            params: |s| {
                let top = if s == Scale::Full { 60 } else { 20 };
                vec![
                    grid("delta", vec![1.0, 1.5, 2.0, 3.0]),
                    grid("dimension", counts(2, top)),
                ]
            },
            columns: &["nu", "entropy", "nu_large_d_limit"],
            row: |r| {
                let delta = r.get("delta");
                let nu = single_mode_nu(delta, r.dim("dimension")?)?;
                let s = entropy_of_spectrum(&SymplecticSpectrum { values: vec![nu] })?;
                Ok(vec![nu, s, single_mode_nu_limit(delta)?])
            },
            summary: None,
        },
        Experiment {
            name: "mi_vs_rho",
            description: "mutual information and symplectic spectra of two bumps against distance",
            params: |_| {
                vec![
                    scalar("delta", 1.0),
                    scalar("dimension", 3.0),
                    scalar("mu", 0.0),
                    grid("rho", logspace(2.01, 100.0, 40)),
                ]
            },
            columns: &[
                "mutual_info",
                "nu_plus",
                "nu_minus",
                "nu_tilde_min",
                "log_neg",
            ],
            row: |r| {
                let dim = r.dim("dimension")?;
                let c = ball_pair(r.get("rho"), &bump(r.get("delta"), dim)?)?;
                let corr = Correlators::new(FieldParams::new(dim, r.get("mu"))?)?;
                let st = build_covariance_with(&c.modes, &corr)?;
                let spec = symplectic_spectrum(&st)?;
                let pt = partial_transpose_spectrum(&st, &c.bipartition)?;
                Ok(vec![
                    mutual_information(&st, &c.bipartition)?,
                    spec.values[1],
                    spec.values[0],
                    pt.min(),
                    log_negativity_of_spectrum(&pt),
                ])
            },
            summary: Some(|res| {
                let mut out = BTreeMap::new();
                if let (Some(rho), Some(mi)) = (res.axis("rho"), res.column("mutual_info")) {
                    let (x, y): (Vec<f64>, Vec<f64>) = rho
                        .iter()
                        .zip(&mi)
                        .filter(|(r, m)| **r >= 10.0 && m.is_finite() && **m > 0.0)
                        .map(|(r, m)| (r.ln(), m.ln()))
                        .unzip();
                    if x.len() >= 2 {
                        out.insert("loglog_slope_rho_ge_10".into(), linear_fit(&x, &y).0);
                    }
                }
                out
            }),
        },
        Experiment {
            name: "ln_vs_mass_d1",
            description: "logarithmic negativity of two touching intervals against mass and delta",
            params: |_| {
                vec![
                    grid("delta", stepped(1.0, 2.0, 0.05)),
                    grid("mu", logspace(1e-3, 10.0, 9)),
                    scalar("rho", 2.0),
                ]
            },
            columns: LN,
            row: |r| {
                ln_row(
                    ball_pair(r.get("rho"), &bump(r.get("delta"), 1)?),
                    FieldParams::new(1, r.get("mu")),
                )
            },
            summary: Some(|res| {
                // smallest delta on the grid from which every row is separable
                let mut out = BTreeMap::new();
                let (Some(delta), Some(ln)) = (res.axis("delta"), res.column("log_neg")) else {
                    return out;
                };
                let mut ds: Vec<f64> = delta.clone();
                ds.sort_by(f64::total_cmp);
                ds.dedup();
                let entangled =
                    |d: f64| delta.iter().zip(&ln).any(|(x, v)| *x == d && !(*v == 0.0));
                let mut threshold = f64::NAN;
                for &d in ds.iter().rev() {
                    if entangled(d) {
                        break;
                    }
                    threshold = d;
                }
                out.insert("delta_threshold".into(), threshold);
                out
            }),
        },
        Experiment {
            name: "ln_vs_rho_d1",
            description: "logarithmic negativity of two intervals against center distance",
            params: |_| {
                vec![
                    scalar("delta", 1.0),
                    scalar("mu", 0.01),
                    grid("rho", stepped(2.0, 2.5, 0.02)),
                ]
            },
            columns: LN,
            row: |r| {
                ln_row(
                    ball_pair(r.get("rho"), &bump(r.get("delta"), 1)?),
                    FieldParams::new(1, r.get("mu")),
                )
            },
            summary: Some(|res| last_entangled(res, "rho", "last_entangled_rho")),
        },
        Experiment {
            name: "ln_vs_nb_hex",
            description: "central disk against hexagonal layers of touching disks",
            params: |s| {
                let top = if s == Scale::Full { 60 } else { 30 };
                vec![scalar("delta", 1.0), grid("n_modes_b", counts(1, top))]
            },
            columns: LN_MI,
            row: |r| {
                ln_mi_row(
                    hex_layers(r.count("n_modes_b")?, r.get("delta")),
                    FieldParams::massless(2),
                )
            },
            summary: None,
        },
        Experiment {
            name: "ln_vs_rho_hexring",
            description: "central disk against a ring of six disks at distance rho",
            params: |_| vec![scalar("delta", 1.0), grid("rho", stepped(2.01, 2.5, 0.01))],
            columns: LN,
            row: |r| {
                ln_row(
                    hex_ring_at_distance(r.get("rho"), r.get("delta")),
                    FieldParams::massless(2),
                )
            },
            summary: Some(|res| last_entangled(res, "rho", "last_entangled_rho")),
        },
        Experiment {
            name: "ln_vs_n_line",
            description: "alternating A/B touching disks on a line",
            params: |s| {
                let top = if s == Scale::Full { 20 } else { 10 };
                vec![scalar("delta", 1.0), grid("n_per_side", counts(1, top))]
            },
            columns: LN,
            row: |r| {
                ln_row(
                    alternating_line(r.count("n_per_side")?, r.get("delta")),
                    FieldParams::massless(2),
                )
            },
            summary: Some(|res| {
                let mut out = BTreeMap::new();
                if let (Some(n), Some(ln)) = (res.axis("n_per_side"), res.column("log_neg")) {
                    let (x, y): (Vec<f64>, Vec<f64>) = n
                        .iter()
                        .zip(&ln)
                        .filter(|(n, v)| **n >= 2.0 && v.is_finite())
                        .map(|(a, b)| (*a, *b))
                        .unzip();
                    if x.len() >= 2 {
                        let (slope, intercept, r2) = linear_fit(&x, &y);
                        out.insert("slope".into(), slope);
                        out.insert("intercept".into(), intercept);
                        out.insert("r_squared".into(), r2);
                    }
                }
                out
            }),
        },
        Experiment {
            name: "ln_vs_gap_hexcells",
            description: "two interlocking hexagonal patches against the gap between them",
            params: |_| {
                vec![
                    scalar("delta", 1.0),
                    scalar("n_per_cell", 19.0),
                    grid("gap", stepped(0.0, 0.4, 0.02)),
                ]
            },
            columns: LN,
            row: |r| {
                ln_row(
                    two_hex_cells(r.get("gap"), r.count("n_per_cell")?, r.get("delta")),
                    FieldParams::massless(2),
                )
            },
            summary: Some(|res| last_entangled(res, "gap", "last_entangled_gap")),
        },
        Experiment {
            name: "ln_hcp_d3",
            description: "central ball against hexagonal close-packed balls",
            params: |s| {
                let mut n = vec![12.0, 18.0, 30.0, 57.0, 100.0];
                if s == Scale::Full {
                    n.extend([200.0, 400.0, 700.0, 1088.0]);
                }
                vec![scalar("delta", 1.0), grid("n_modes_b", n)]
            },
            columns: LN,
            row: |r| {
                ln_row(
                    hcp_packing(r.count("n_modes_b")?, r.get("delta")),
                    FieldParams::massless(3),
                )
            },
            summary: None,
        },
        Experiment {
            name: "ln_sinc_stack",
            description: "two sinc modes of different order on the same ball",
            params: |s| {
                let top = if s == Scale::Full { 12 } else { 8 };
                vec![
                    scalar("n_a", 1.0),
                    grid("n_b", counts(2, top)),
                    scalar("dimension", 3.0),
                ]
            },
            columns: LN_MI,
            row: |r| {
                let dim = r.dim("dimension")?;
                let (na, nb) = (r.count("n_a")? as u32, r.count("n_b")? as u32);
                ln_mi_row(sinc_stack(na, nb, dim), FieldParams::massless(dim))
            },
            summary: None,
        },
        Experiment {
            name: "ln_shell_vs_D",
            description: "ball against a touching concentric shell, against dimension",
            params: |s| {
                let top = if s == Scale::Full { 12 } else { 9 };
                vec![
                    scalar("r_b", 1.0),
                    scalar("d_b", 0.5),
                    grid("dimension", counts(2, top)),
                ]
            },
            columns: LN,
            row: |r| {
                let dim = r.dim("dimension")?;
                ln_row(
                    ball_and_shell(r.get("r_b"), r.get("d_b"), dim),
                    FieldParams::massless(dim),
                )
            },
            summary: Some(|res| last_entangled(res, "dimension", "last_entangled_dimension")),
        },
        Experiment {
            name: "ln_shell_vs_gap",
            description: "ball against a concentric shell, against the radial gap",
            params: |_| {
                vec![
                    scalar("dimension", 3.0),
                    scalar("d_b", 0.5),
                    grid("gap", stepped(0.0, 0.2, 0.01)),
                ]
            },
            columns: LN,
            row: |r| {
                let dim = r.dim("dimension")?;
                ln_row(
                    ball_and_shell(1.0 + r.get("gap"), r.get("d_b"), dim),
                    FieldParams::massless(dim),
                )
            },
            summary: Some(|res| last_entangled(res, "gap", "last_entangled_gap")),
        },
        Experiment {
            name: "ln_shell_vs_db",
            description: "ball against a touching concentric shell, against shell thickness",
            params: |_| {
                vec![
                    scalar("dimension", 3.0),
                    scalar("r_b", 1.0),
                    grid("d_b", stepped(0.1, 2.5, 0.1)),
                ]
            },
            columns: LN,
            row: |r| {
                let dim = r.dim("dimension")?;
                ln_row(
                    ball_and_shell(r.get("r_b"), r.get("d_b"), dim),
                    FieldParams::massless(dim),
                )
            },
            summary: Some(|res| {
                let mut out = BTreeMap::new();
                if let (Some(db), Some(ln)) = (res.axis("d_b"), res.column("log_neg")) {
                    let pos: Vec<f64> = db
                        .iter()
                        .zip(&ln)
                        .filter(|(_, v)| **v > 0.0)
                        .map(|(d, _)| *d)
                        .collect();
                    if let (Some(lo), Some(hi)) = (pos.first(), pos.last()) {
                        out.insert("entangled_d_b_min".into(), *lo);
                        out.insert("entangled_d_b_max".into(), *hi);
                    }
                }
                out
            }),
        },
        Experiment {
            name: "ln_onion",
            description: "ball and nested touching shells alternating between A and B",
            params: |s| {
                let top = if s == Scale::Full { 10 } else { 6 };
                vec![
                    scalar("dimension", 3.0),
                    scalar("thickness", 0.5),
                    grid("n_shells", counts(1, top)),
                ]
            },
            columns: LN_MI,
            row: |r| {
                let dim = r.dim("dimension")?;
                ln_mi_row(
                    onion(r.count("n_shells")?, dim, r.get("thickness")),
                    FieldParams::massless(dim),
                )
            },
            summary: None,
        },
        Experiment {
            name: "rindler_ln",
            description: "left/right Rindler mode pair against omega/a",
            params: |_| vec![grid("omega_over_a", logspace(0.01, 3.0, 30))],
            columns: &["log_neg", "nu_tilde_min", "tanh_pi_omega_over_2a"],
            row: |r| {
                let w = r.get("omega_over_a");
                let st = rindler_two_mode(w)?;
                let pt =
                    partial_transpose_spectrum(&st, &crate::gaussian::Bipartition::split(1, 1)?)?;
                Ok(vec![
                    log_negativity_of_spectrum(&pt),
                    pt.min(),
                    (std::f64::consts::PI * w / 2.0).tanh(),
                ])
            },
            summary: None,
        },
        Experiment {
            name: "mixing_threshold",
            description: "smallest two-mode squeezing that entangles two bump modes",
            params: |_| {
                vec![
                    scalar("delta", 1.0),
                    scalar("dimension", 3.0),
                    grid("rho", vec![2.01, 2.2, 3.0, 5.0, 10.0]),
                ]
            },
            columns: &["z_threshold", "log_neg_unmixed"],
            row: |r| {
                let dim = r.dim("dimension")?;
                let c = ball_pair(r.get("rho"), &bump(r.get("delta"), dim)?)?;
                let corr = Correlators::new(FieldParams::new(dim, 0.0)?)?;
                let st = build_covariance_with(&c.modes, &corr)?;
                let ln =
                    log_negativity_of_spectrum(&partial_transpose_spectrum(&st, &c.bipartition)?);
                Ok(vec![entanglement_threshold(&st, 0, 1)?, ln])
            },
            summary: None,
        },
    ]
}

fn last_entangled(res: &ExperimentResult, axis: &str, key: &str) -> BTreeMap<String, f64> {
    let mut out = BTreeMap::new();
    if let (Some(x), Some(ln)) = (res.axis(axis), res.column("log_neg")) {
        let last = x
            .iter()
            .zip(&ln)
            .filter(|(_, v)| **v > 0.0)
            .map(|(x, _)| *x)
            .fold(f64::NAN, f64::max);
        out.insert(key.into(), last);
    }
    out
}

/// `(name, description)` of every registered experiment.
pub fn list() -> Vec<(&'static str, &'static str)> {
    registry().iter().map(|e| (e.name, e.description)).collect()
}

/// Parameter names and defaults of an experiment at the given scale.
pub fn defaults(name: &str, scale: Scale) -> Result<BTreeMap<String, Vec<f64>>> {
    let exp = find(name)?;
    Ok((exp.params)(scale)
        .into_iter()
        .map(|p| (p.key.to_string(), p.default))
        .collect())
}

fn find(name: &str) -> Result<Experiment> {
    registry()
        .into_iter()
        .find(|e| e.name == name)
        .ok_or_else(|| Error::UnknownExperiment(name.to_string()))
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    pub scale: Scale,
    /// Worker threads; `None` uses the global pool.
    pub jobs: Option<usize>,
}

pub fn run(name: &str, overrides: &Overrides, opts: RunOptions) -> Result<ExperimentResult> {
    let exp = find(name)?;
    let mut params = (exp.params)(opts.scale);
    for (key, values) in overrides {
        let p =
            params
                .iter_mut()
                .find(|p| p.key == key)
                .ok_or_else(|| Error::InvalidParameter {
                    key: key.clone(),
                    reason: format!("not a parameter of `{name}`"),
                })?;
        if values.is_empty() {
            return Err(Error::InvalidParameter {
                key: key.clone(),
                reason: "no values given".into(),
            });
        }
        if p.kind == ParamKind::Scalar && values.len() != 1 {
            return Err(Error::InvalidParameter {
                key: key.clone(),
                reason: "expects a single value".into(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter {
                key: key.clone(),
                reason: "values must be finite".into(),
            });
        }
        p.default = values.clone();
    }

    let axes: Vec<&Param> = params
        .iter()
        .filter(|p| p.kind == ParamKind::Grid || p.default.len() > 1)
        .collect();
    let mut points: Vec<Vec<f64>> = vec![vec![]];
    for axis in &axes {
        points = points
            .into_iter()
            .flat_map(|prefix| {
                axis.default.iter().map(move |v| {
                    let mut p = prefix.clone();
                    p.push(*v);
                    p
                })
            })
            .collect();
    }
    let fixed: BTreeMap<String, f64> = params
        .iter()
        .filter(|p| !axes.iter().any(|a| a.key == p.key))
        .map(|p| (p.key.to_string(), p.default[0]))
        .collect();
    let axis_names: Vec<String> = axes.iter().map(|a| a.key.to_string()).collect();

    let eval = |point: &Vec<f64>| -> ResultRow {
        let mut values = fixed.clone();
        for (k, v) in axis_names.iter().zip(point) {
            values.insert(k.clone(), *v);
        }
        match (exp.row)(&Row { values }) {
            Ok(v) => ResultRow {
                axes: point.clone(),
                values: v,
                error: None,
            },
            Err(e) => ResultRow {
                axes: point.clone(),
                values: vec![],
                error: Some(e.to_string()),
            },
        }
    };
    let rows: Vec<ResultRow> = match opts.jobs {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| Error::InvalidParameter {
                key: "jobs".into(),
                reason: e.to_string(),
            })?
            .install(|| points.par_iter().map(eval).collect()),
        None => points.par_iter().map(eval).collect(),
    };

    let mut result = ExperimentResult {
        name: exp.name.to_string(),
        axes: axis_names,
        columns: exp.columns.iter().map(|c| c.to_string()).collect(),
        rows,
        summary: BTreeMap::new(),
        provenance: Provenance {
            version: env!("CARGO_PKG_VERSION").to_string(),
            scale: opts.scale,
            parameters: params
                .iter()
                .map(|p| (p.key.to_string(), p.default.clone()))
                .collect(),
        },
    };
    if let Some(s) = exp.summary {
        result.summary = s(&result);
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(pairs: &[(&str, &[f64])]) -> Overrides {
        pairs
            .iter()
            .map(|(k, v)| (k.to_string(), v.to_vec()))
            .collect()
    }

    #[test]
    fn registry_is_complete_and_unique() {
        let names: Vec<_> = list().into_iter().map(|(n, _)| n).collect();
        assert_eq!(names.len(), 17);
        let mut sorted = names.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), 17);
    }

    #[test]
    fn unknown_names_and_keys() {
        assert!(matches!(
            run("nope", &Overrides::new(), RunOptions::default()),
            Err(Error::UnknownExperiment(_))
        ));
        let bad = set(&[("bogus", &[1.0])]);
        assert!(matches!(
            run("rindler_ln", &bad, RunOptions::default()),
            Err(Error::InvalidParameter { .. })
        ));
        let two = set(&[("delta", &[1.0, 2.0])]);
        assert!(matches!(
            run("ln_vs_n_line", &two, RunOptions::default()),
            Err(Error::InvalidParameter { .. })
        ));
    }

    #[test]
    fn row_errors_do_not_abort() {
        let o = set(&[("rho", &[1.5, 4.0])]);
        let res = run("mi_vs_rho", &o, RunOptions::default()).unwrap();
        assert_eq!(res.rows.len(), 2);
        assert!(res.rows[0].error.is_some());
        assert!(res.rows[1].error.is_none());
        let mut buf = Vec::new();
        res.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("rho,mutual_info,nu_plus,nu_minus,nu_tilde_min,log_neg,error\n"));
    }

    #[test]
    fn deterministic_output() {
        let o = set(&[("n_modes_b", &[3.0, 5.0, 6.0])]);
        let render = |jobs| {
            let res = run(
                "ln_vs_nb_hex",
                &o,
                RunOptions {
                    scale: Scale::Ci,
                    jobs: Some(jobs),
                },
            )
            .unwrap();
            let mut buf = Vec::new();
            res.write_csv(&mut buf).unwrap();
            buf
        };
        assert_eq!(render(1), render(3));
    }

    #[test]
    fn grids() {
        assert_eq!(stepped(1.0, 2.0, 0.05).len(), 21);
        assert_eq!(stepped(1.0, 2.0, 0.05)[14], 1.7);
        let l = logspace(1e-3, 10.0, 5);
        assert_eq!((l[0], l[4]), (1e-3, 10.0));
        let (s, i, r2) = linear_fit(&[1.0, 2.0, 3.0], &[3.0, 5.0, 7.0]);
        assert!((s - 2.0).abs() < 1e-14 && (i - 1.0).abs() < 1e-14 && (r2 - 1.0).abs() < 1e-14);
    }
}
