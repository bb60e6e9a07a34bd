use anyhow::{anyhow, bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use vacent::correlators::{Correlators, FieldParams, Method, ModeSpec};
use vacent::experiments::{self, Overrides, RunOptions, Scale};
use vacent::gaussian::{
    build_covariance_with, log_negativity_of_spectrum, partial_transpose_spectrum,
    rindler_two_mode, symplectic_spectrum, verdict, von_neumann_entropy, write_covariance,
    Bipartition, GaussianState, Side,
};
use vacent::geometry::Generator;

/// Entanglement of smeared scalar field modes in the Minkowski vacuum.
///
/// All lengths are in units of the reference radius R and masses are given
/// as the dimensionless mu = mR.
#[derive(Parser)]
#[command(name = "vacent", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a registered experiment and write <out>/<name>.csv and .json.
    Run(RunArgs),
    /// Evaluate a single configuration described in a TOML file.
    Eval {
        modes_file: PathBuf,
        /// Also write the covariance matrix to this file.
        #[arg(long)]
        covariance: Option<PathBuf>,
    },
    /// List registered experiments.
    List,
}

#[derive(clap::Args)]
struct RunArgs {
    /// Experiment name; may instead come from --config.
    name: Option<String>,
    /// Parameter override `key=value`. Values: `1.5`, `1,2,3`,
    /// `lin:a:b:n`, `log:a:b:n` or `step:a:b:h`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    scale: Option<ScaleArg>,
    #[arg(long)]
    jobs: Option<usize>,
    /// TOML run configuration; command-line flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum, Deserialize)]
#[serde(rename_all = "snake_case")]
enum ScaleArg {
    Ci,
    Full,
}

impl From<ScaleArg> for Scale {
    fn from(s: ScaleArg) -> Self {
        match s {
            ScaleArg::Ci => Scale::Ci,
            ScaleArg::Full => Scale::Full,
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RunConfig {
    experiment: Option<String>,
    output_dir: Option<PathBuf>,
    scale: Option<ScaleArg>,
    jobs: Option<usize>,
    #[serde(default)]
    overrides: BTreeMap<String, OverrideValue>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum OverrideValue {
    One(f64),
    Many(Vec<f64>),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct EvalFile {
    field: Option<FieldParams>,
    #[serde(default)]
    method: Method,
    generator: Option<Generator>,
    modes: Option<Vec<ModeSpec>>,
    bipartition: Option<Bipartition>,
    rindler: Option<Rindler>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Rindler {
    omega_over_a: f64,
}

/// Failure with the process exit code it maps to.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

fn parse_err(error: anyhow::Error) -> Failure {
    Failure { code: 2, error }
}

impl From<vacent::Error> for Failure {
    fn from(e: vacent::Error) -> Self {
        let code = match e {
            vacent::Error::UnknownExperiment(_) => 4,
            vacent::Error::InvalidParameter { .. } | vacent::Error::InvalidMode { .. } => 2,
            _ => 3,
        };
        Failure {
            code,
            error: e.into(),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Eval {
            modes_file,
            covariance,
        } => cmd_eval(&modes_file, covariance.as_deref()),
        Command::List => {
            for (name, description) in experiments::list() {
                println!("{name:<22} {description}");
            }
            Ok(())
        }
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}

fn canonical_key(key: &str) -> &str {
    match key {
        "D" | "d" => "dimension",
        "μ" => "mu",
        "δ" => "delta",
        "ρ" => "rho",
        "N_B" => "n_modes_b",
        "N_A" => "n_a",
        other => other,
    }
}

fn parse_values(text: &str) -> anyhow::Result<Vec<f64>> {
    let num = |s: &str| {
        s.trim()
            .parse::<f64>()
            .with_context(|| format!("`{s}` is not a number"))
    };
    let parts: Vec<&str> = text.split(':').collect();
    match parts.as_slice() {
        ["lin", a, b, n] | ["log", a, b, n] => {
            let n: usize = n
                .trim()
                .parse()
                .with_context(|| format!("`{n}` is not a count"))?;
            let (a, b) = (num(a)?, num(b)?);
            if parts[0] == "lin" {
                Ok(experiments::linspace(a, b, n))
            } else if a > 0.0 && b > 0.0 {
                Ok(experiments::logspace(a, b, n))
            } else {
                bail!("log grid needs positive bounds")
            }
        }
        ["step", a, b, h] => {
            let h = num(h)?;
            if h <= 0.0 {
                bail!("step must be positive");
            }
            Ok(experiments::stepped(num(a)?, num(b)?, h))
        }
        [_] => text.split(',').map(num).collect(),
        _ => bail!("unrecognized value `{text}`"),
    }
}

fn cmd_run(args: RunArgs) -> Result<(), Failure> {
    let file: Option<RunConfig> = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))
                .map_err(parse_err)?;
            Some(
                toml::from_str(&text)
                    .with_context(|| format!("parsing {}", path.display()))
                    .map_err(parse_err)?,
            )
        }
        None => None,
    };
    let (file_name, file_out, file_scale, file_jobs, file_overrides) = match file {
        Some(c) => (c.experiment, c.output_dir, c.scale, c.jobs, c.overrides),
        None => Default::default(),
    };

    let name = args.name.or(file_name).ok_or_else(|| {
        parse_err(anyhow!(
            "no experiment named on the command line or in the config"
        ))
    })?;
    let mut overrides = Overrides::new();
    for (k, v) in file_overrides {
        let values = match v {
            OverrideValue::One(x) => vec![x],
            OverrideValue::Many(xs) => xs,
        };
        overrides.insert(canonical_key(&k).to_string(), values);
    }
    for item in &args.set {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| parse_err(anyhow!("--set expects key=value, got `{item}`")))?;
        let values = parse_values(v)
            .with_context(|| format!("--set {k}"))
            .map_err(parse_err)?;
        overrides.insert(canonical_key(k.trim()).to_string(), values);
    }
    let opts = RunOptions {
        scale: args
            .scale
            .or(file_scale)
            .map(Scale::from)
            .unwrap_or_default(),
        jobs: args.jobs.or(file_jobs),
    };
    let out_dir = args
        .out
        .or(file_out)
        .unwrap_or_else(|| PathBuf::from("results"));

    let result = experiments::run(&name, &overrides, opts)?;
    let (csv, json) = result.write_outputs(&out_dir)?;
    println!("wrote {} and {}", csv.display(), json.display());
    for (k, v) in &result.summary {
        println!("{k} = {v}");
    }
    let failed = result.failures();
    if failed > 0 {
        for row in result.rows.iter().filter(|r| r.error.is_some()) {
            eprintln!(
                "row {:?}: {}",
                row.axes,
                row.error.as_deref().unwrap_or_default()
            );
        }
        return Err(Failure {
            code: 3,
            error: anyhow!("{failed} of {} rows failed", result.rows.len()),
        });
    }
    Ok(())
}

fn cmd_eval(path: &Path, covariance: Option<&Path>) -> Result<(), Failure> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(parse_err)?;
    let spec: EvalFile = toml::from_str(&text)
        .with_context(|| format!("parsing {}", path.display()))
        .map_err(parse_err)?;

    let sources = [
        spec.generator.is_some(),
        spec.modes.is_some(),
        spec.rindler.is_some(),
    ];
    if sources.iter().filter(|s| **s).count() != 1 {
        return Err(parse_err(anyhow!(
            "exactly one of `generator`, `modes` or `rindler` must be given"
        )));
    }

    let (label, state, part) = if let Some(r) = &spec.rindler {
        if spec.field.is_some() || spec.bipartition.is_some() {
            return Err(parse_err(anyhow!(
                "`rindler` takes no `field` or `bipartition`"
            )));
        }
        (
            format!("rindler pair, omega/a = {}", r.omega_over_a),
            rindler_two_mode(r.omega_over_a)?,
            Bipartition::split(1, 1)?,
        )
    } else {
        let (label, dim, modes, part) = match (&spec.generator, spec.modes) {
            (Some(g), _) => {
                if spec.bipartition.is_some() {
                    return Err(parse_err(anyhow!("a generator fixes its own bipartition")));
                }
                let c = g.build()?;
                (c.name.clone(), c.dim, c.modes, c.bipartition)
            }
            (None, Some(modes)) => {
                let part = spec
                    .bipartition
                    .clone()
                    .ok_or_else(|| parse_err(anyhow!("explicit modes need a `bipartition`")))?;
                let dim = modes
                    .first()
                    .and_then(|m| m.smearings().next())
                    .map(|s| s.dim)
                    .ok_or_else(|| parse_err(anyhow!("no modes given")))?;
                ("explicit modes".to_string(), dim, modes, part)
            }
            (None, None) => unreachable!(),
        };
        let field = spec.field.unwrap_or(FieldParams { dim, mu: 0.0 });
        if field.dim != dim {
            return Err(parse_err(anyhow!(
                "field dimension {} does not match the modes ({dim})",
                field.dim
            )));
        }
        for (i, m) in modes.iter().enumerate() {
            m.validate(i, &field)?;
        }
        let corr = Correlators::new(field)?.with_method(spec.method);
        let state = build_covariance_with(&modes, &corr)?;
        (
            format!("{label}, D = {}, mu = {}", field.dim, field.mu),
            state,
            part,
        )
    };

    if let Some(p) = covariance {
        let f = std::fs::File::create(p)
            .with_context(|| format!("creating {}", p.display()))
            .map_err(parse_err)?;
        write_covariance(&state, std::io::BufWriter::new(f))?;
    }
    report(&label, &state, &part)
}

fn report(label: &str, state: &GaussianState, part: &Bipartition) -> Result<(), Failure> {
    let sigma = state.sigma();
    let spectrum = symplectic_spectrum(state)?;
    let pt = partial_transpose_spectrum(state, part)?;
    let s_a = von_neumann_entropy(&state.reduced(&part.indices(Side::A))?)?;
    let s_b = von_neumann_entropy(&state.reduced(&part.indices(Side::B))?)?;
    let s_ab = von_neumann_entropy(state)?;
    let ln = log_negativity_of_spectrum(&pt);
    let list = |v: &[f64]| {
        v.iter()
            .map(|x| format!("{x:.12}"))
            .collect::<Vec<_>>()
            .join(" ")
    };

    println!("configuration: {label}");
    println!(
        "modes: {} (N_A = {}, N_B = {})",
        state.n_modes(),
        part.n_a(),
        part.n_b()
    );
    println!(
        "sigma: {0}x{0}, trace = {1:.12}, det = {2:.12e}",
        sigma.nrows(),
        sigma.trace(),
        sigma.determinant()
    );
    println!("symplectic spectrum: {}", list(&spectrum.values));
    println!("partial transpose spectrum: {}", list(&pt.values));
    println!("S_A = {s_a:.12}");
    println!("S_B = {s_b:.12}");
    println!("S_AB = {s_ab:.12}");
    println!("I = {:.12}", s_a + s_b - s_ab);
    println!("nu_tilde_min = {:.12}", pt.min());
    println!("E_N = {ln:.12}");
    println!("verdict: {}", verdict(ln, part));
    Ok(())
}
