//! `uptorus` - uncertainty products, extremal polynomials and periodic
//! wavelet frames for multivariate periodic functions, as reproducible
//! CSV/JSON experiments.

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use uptorus_cli::spec::{ExperimentName, ExperimentSpec, OutputFormat};
use uptorus_cli::{diff, run_to_writer, CliError};

#[derive(Parser)]
#[command(name = "uptorus", version, about)]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Args, Clone)]
struct OutputOpts {
    /// Output file (stdout when omitted)
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Output format
    #[arg(long, global = true, value_parser = ["csv", "json"], default_value = "csv")]
    format: String,
    /// Seed for randomized experiments
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads for sweeps (UPTORUS_THREADS overrides)
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    /// Cap on total lattice points touched
    #[arg(long, global = true, default_value_t = uptorus::budget::DEFAULT_POINT_CAP)]
    budget: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Uncertainty product of a single kernel
    Up {
        #[arg(long)]
        kernel: String,
        #[arg(long)]
        n: Option<u32>,
        /// Box bounds for the rectangular Dirichlet kernel, e.g. 2,3
        #[arg(long = "N", value_delimiter = ',', allow_hyphen_values = true)]
        n_box: Option<Vec<i64>>,
        #[arg(long)]
        d: Option<usize>,
        #[arg(long = "L", value_delimiter = ',', allow_hyphen_values = true)]
        l: Vec<i64>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        k0: Option<Vec<i64>>,
        #[command(flatten)]
        out: OutputOpts,
    },
    /// Uncertainty products over a list of kernel orders
    KernelSweep {
        #[arg(long)]
        kernel: String,
        #[arg(long, value_delimiter = ',')]
        n: Vec<u32>,
        #[arg(long)]
        d: Option<usize>,
        #[arg(long = "L", value_delimiter = ',', allow_hyphen_values = true)]
        l: Vec<i64>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        k0: Option<Vec<i64>>,
        #[command(flatten)]
        out: OutputOpts,
    },
    /// Directional vs coordinate-wise products on the perturbed powers
    CompareGg {
        /// "p" (perturbed cosine power) or "t" (perturbed line power)
        #[arg(long)]
        variant: String,
        #[arg(long, value_delimiter = ',')]
        n: Vec<u32>,
        #[arg(long = "L", value_delimiter = ',', allow_hyphen_values = true)]
        l: Vec<i64>,
        #[command(flatten)]
        out: OutputOpts,
    },
    /// Minimal angular variance on a support set
    MinVar {
        /// directional (default) or gg-rect
        #[arg(long, default_value = "directional")]
        mode: String,
        /// box, cross, line or points
        #[arg(long, default_value = "box")]
        support: String,
        #[arg(long = "N", value_delimiter = ',', allow_hyphen_values = true)]
        n_box: Option<Vec<i64>>,
        #[arg(long = "L", value_delimiter = ',', allow_hyphen_values = true)]
        l: Option<Vec<i64>>,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        k0: Option<Vec<i64>>,
        #[arg(long)]
        m: Option<u32>,
        /// JSON list of index tuples for --support points
        #[arg(long)]
        points: Option<String>,
        #[arg(long)]
        normalize: bool,
        #[command(flatten)]
        out: OutputOpts,
    },
    /// Mask identity residuals over full periods
    FrameUep {
        #[command(flatten)]
        frame: FrameOpts,
        #[command(flatten)]
        out: OutputOpts,
    },
    /// Energy cascade on random polynomials
    FrameCascade {
        #[command(flatten)]
        frame: FrameOpts,
        #[arg(long, default_value_t = 12)]
        j_max: u32,
        /// Half-width of the random support box
        #[arg(long, default_value_t = 4)]
        radius: i64,
        /// Number of random polynomials
        #[arg(long, default_value_t = 1)]
        count: u32,
        #[command(flatten)]
        out: OutputOpts,
    },
    /// Localization limits of the frame elements
    FrameLimits {
        #[command(flatten)]
        frame: FrameOpts,
        #[command(flatten)]
        out: OutputOpts,
    },
    /// Localization limits of the closed-form reference profiles
    ReferenceLimits {
        #[arg(long = "L", value_delimiter = ',', allow_hyphen_values = true)]
        l: Vec<i64>,
        #[arg(long = "j", value_delimiter = ',')]
        levels: Vec<u32>,
        #[arg(long, default_value_t = 1e-8)]
        eps: f64,
        #[command(flatten)]
        out: OutputOpts,
    },
    /// Run an experiment described by a JSON spec file
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Compare two result tables cell by cell
    DiffTables {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, default_value_t = 1e-12)]
        rtol: f64,
    },
}

#[derive(Args, Clone)]
struct FrameOpts {
    /// Dilation matrix: quincunx, dyadic, or JSON rows like [[1,1],[-1,1]]
    #[arg(long = "A")]
    a: Option<String>,
    #[arg(long = "L", value_delimiter = ',', allow_hyphen_values = true)]
    l: Option<Vec<i64>>,
    #[arg(long = "j", value_delimiter = ',')]
    levels: Vec<u32>,
    #[arg(long)]
    eps: Option<f64>,
    /// JSON file with {"A": ..., "L": ..., "eps": ..., "levels": [...]}
    #[arg(long)]
    frame_spec: Option<PathBuf>,
}

fn parse_matrix_arg(s: &str) -> serde_json::Value {
    match serde_json::from_str::<serde_json::Value>(s) {
        Ok(v @ serde_json::Value::Array(_)) => v,
        _ => serde_json::Value::String(s.to_string()),
    }
}

fn frame_params(frame: &FrameOpts, extra: serde_json::Value) -> Result<serde_json::Value, CliError> {
    let mut params = if let Some(path) = &frame.frame_spec {
        let text = fs::read_to_string(path)?;
        let v: serde_json::Value = serde_json::from_str(&text)
            .map_err(|e| CliError::Validation(format!("bad frame spec file: {e}")))?;
        if !v.is_object() {
            return Err(CliError::Validation("frame spec file must be an object".into()));
        }
        v
    } else {
        json!({})
    };
    let obj = params.as_object_mut().expect("object");
    if let Some(a) = &frame.a {
        obj.insert("A".into(), parse_matrix_arg(a));
    }
    if let Some(l) = &frame.l {
        obj.insert("L".into(), json!(l));
    }
    if !frame.levels.is_empty() {
        obj.insert("levels".into(), json!(frame.levels));
    }
    if let Some(eps) = frame.eps {
        obj.insert("eps".into(), json!(eps));
    }
    if let serde_json::Value::Object(extra) = extra {
        for (k, v) in extra {
            obj.insert(k, v);
        }
    }
    Ok(params)
}

fn make_spec(
    name: ExperimentName,
    params: serde_json::Value,
    out: &OutputOpts,
) -> ExperimentSpec {
    ExperimentSpec {
        name,
        params,
        output: out.output.as_ref().map(|p| p.display().to_string()),
        format: if out.format == "json" {
            OutputFormat::Json
        } else {
            OutputFormat::Csv
        },
        seed: out.seed,
        threads: out.threads,
        budget: out.budget,
    }
}

fn execute(spec: &ExperimentSpec) -> Result<(), CliError> {
    let summary = match &spec.output {
        Some(path) => {
            let mut buf = Vec::new();
            let summary = run_to_writer(spec, &mut buf)?;
            fs::write(path, &buf)?;
            summary
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            let summary = run_to_writer(spec, &mut lock)?;
            lock.flush()?;
            summary
        }
    };
    eprintln!("{}: {summary}", spec.name.as_str());
    Ok(())
}

fn dispatch(cli: Cli) -> Result<ExitCode, CliError> {
    match cli.cmd {
        Command::Up { kernel, n, n_box, d, l, k0, out } => {
            let mut params = json!({"kernel": kernel, "L": l});
            merge(&mut params, "n", n.map(|v| json!(v)));
            merge(&mut params, "N", n_box.map(|v| json!(v)));
            merge(&mut params, "d", d.map(|v| json!(v)));
            merge(&mut params, "k0", k0.map(|v| json!(v)));
            execute(&make_spec(ExperimentName::Up, params, &out))?;
        }
        Command::KernelSweep { kernel, n, d, l, k0, out } => {
            let mut params = json!({"kernel": kernel, "n": n, "L": l});
            merge(&mut params, "d", d.map(|v| json!(v)));
            merge(&mut params, "k0", k0.map(|v| json!(v)));
            execute(&make_spec(ExperimentName::KernelSweep, params, &out))?;
        }
        Command::CompareGg { variant, n, l, out } => {
            let params = json!({"variant": variant, "n": n, "L": l});
            execute(&make_spec(ExperimentName::CompareGg, params, &out))?;
        }
        Command::MinVar { mode, support, n_box, l, k0, m, points, normalize, out } => {
            let mut params = json!({"mode": mode, "support": support, "normalize": normalize});
            merge(&mut params, "N", n_box.map(|v| json!(v)));
            merge(&mut params, "L", l.map(|v| json!(v)));
            merge(&mut params, "k0", k0.map(|v| json!(v)));
            merge(&mut params, "m", m.map(|v| json!(v)));
            if let Some(pts) = points {
                let v: serde_json::Value = serde_json::from_str(&pts)
                    .map_err(|e| CliError::Validation(format!("bad points JSON: {e}")))?;
                merge(&mut params, "points", Some(v));
            }
            execute(&make_spec(ExperimentName::MinVar, params, &out))?;
        }
        Command::FrameUep { frame, out } => {
            let params = frame_params(&frame, json!({}))?;
            execute(&make_spec(ExperimentName::FrameUep, params, &out))?;
        }
        Command::FrameCascade { frame, j_max, radius, count, out } => {
            let params = frame_params(
                &frame,
                json!({"j_max": j_max, "radius": radius, "count": count}),
            )?;
            execute(&make_spec(ExperimentName::FrameCascade, params, &out))?;
        }
        Command::FrameLimits { frame, out } => {
            let params = frame_params(&frame, json!({}))?;
            execute(&make_spec(ExperimentName::FrameLimits, params, &out))?;
        }
        Command::ReferenceLimits { l, levels, eps, out } => {
            let params = json!({"L": l, "levels": levels, "eps": eps});
            execute(&make_spec(ExperimentName::ReferenceLimits, params, &out))?;
        }
        Command::Run { config } => {
            let text = fs::read_to_string(&config)?;
            let spec = ExperimentSpec::from_json_str(&text)?;
            execute(&spec)?;
        }
        Command::DiffTables { a, b, rtol } => {
            let ta = fs::read_to_string(&a)?;
            let tb = fs::read_to_string(&b)?;
            let rep = diff::diff_tables(&ta, &tb, rtol)?;
            eprintln!("diff-tables: {}", rep.summary());
            if !rep.within_tolerance {
                return Ok(ExitCode::from(1));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn merge(params: &mut serde_json::Value, key: &str, value: Option<serde_json::Value>) {
    if let Some(v) = value {
        params.as_object_mut().expect("object").insert(key.into(), v);
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
