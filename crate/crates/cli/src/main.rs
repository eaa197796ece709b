//! `front-lab`: command-line driver for the front verification pipeline.
//!
//! Exit codes: 0 PASS, 1 FAIL, 2 INCONCLUSIVE, 3 usage or I/O error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use front_core::dispersion::verify_hyp1;
use front_core::model::{ModelConfig, NormalFormModel, Numerics};
use front_core::pipeline::{cmd_report, cmd_verify, SCHEMA_VERSION};
use front_core::sim::{run_invasion_with, Grid1D, InitialData, SimOptions};
use front_core::spectra::{point_spectrum, SpectralOptions};
use front_core::waves::{selected_state_of, solve_front_with, verify_hyp2, SolveOptions};
use front_core::{Error, Status};
use serde_json::json;

#[derive(Parser)]
#[command(name = "front-lab", version, about = "Verification of critical invasion fronts near bifurcations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Linear spreading speed, pinched double root and left spectrum.
    Analyze {
        model: PathBuf,
        /// Speed at which to check the double root (default: computed c*).
        #[arg(long)]
        c: Option<f64>,
        /// Rescaling parameter (default: from the model's mu).
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Critical front profile and its tail asymptotics.
    Wave {
        model: PathBuf,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Point spectrum of the weighted linearization.
    Spectrum {
        model: PathBuf,
        #[arg(long)]
        delta: Option<f64>,
        /// `re0,re1,im0,im1`.
        #[arg(long, value_delimiter = ',', num_args = 4)]
        region: Option<Vec<f64>>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Invasion from steep initial data.
    Simulate {
        model: PathBuf,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long = "T")]
        t_end: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write the state every this many time units.
        #[arg(long)]
        emit_snapshots: Option<f64>,
    },
    /// All hypothesis checks for each delta.
    Verify {
        model: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        delta: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Record wall-clock timings (the report is then not reproducible).
        #[arg(long)]
        timings: bool,
    },
    /// Merge JSON and CSV artifacts into one report.
    Report {
        artifacts: Vec<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn write_or_print(path: Option<&Path>, text: &str) -> Result<(), Error> {
    match path {
        Some(p) => Ok(std::fs::write(p, text)?),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// `out` with its extension replaced, or `None` when writing to stdout.
fn sibling(out: Option<&Path>, ext: &str) -> Option<PathBuf> {
    out.map(|p| p.with_extension(ext))
}

fn pretty(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json serializes");
    s.push('\n');
    s
}

/// Reads a model file; I/O and JSON errors name the path.
fn config(path: &Path) -> Result<ModelConfig, Error> {
    ModelConfig::load(path).map_err(|e| match e {
        Error::Io(io) => Error::Io(std::io::Error::new(io.kind(), format!("{}: {io}", path.display()))),
        Error::Json(j) => Error::InvalidModel(format!("{}: {j}", path.display())),
        e => e,
    })
}

fn load(path: &Path) -> Result<(ModelConfig, NormalFormModel<f64>), Error> {
    let cfg = config(path)?;
    let model = cfg.model()?;
    Ok((cfg, model))
}

fn analyze(model: &Path, c: Option<f64>, delta: Option<f64>, out: Option<&Path>) -> Result<Status, Error> {
    let (_, m) = load(model)?;
    let delta = delta.unwrap_or_else(|| m.delta());
    let scaled = m.scaled_system(delta)?;
    let c = match c {
        Some(c) => c,
        None => front_core::dispersion::linear_spreading_speed(&scaled.system)?.c_star,
    };
    let h1 = verify_hyp1(&scaled.system, c)?;
    let wake = selected_state_of(&scaled)?;
    let left = front_core::dispersion::left_spectrum(&scaled.system, &wake.value, 0.0)?;
    let status = h1.status().and(wake.status);
    let doc = json!({
        "schema_version": SCHEMA_VERSION,
        "model": m.kind,
        "delta": delta,
        "hyp1": {
            "status": h1.status(),
            "c_star": h1.c_star,
            "lambda_star": h1.lambda_star,
            "nu_star": h1.nu_star,
            "d10": h1.d10,
            "d02": h1.d02,
            "simple_root": h1.simple_root,
            "marginal": h1.marginal,
            "margin": h1.margin,
            "no_unstable": h1.no_unstable,
            "max_real_part": h1.max_real_part,
        },
        "hyp3": {
            "status": wake.status,
            "u_minus": wake.value,
            "max_real_part": wake.max_real_part,
            "residual": wake.residual,
        },
        "status": status,
    });
    write_or_print(out, &pretty(&doc))?;
    if let Some(p) = sibling(out, "curve.csv") {
        std::fs::write(p, h1.curve.to_csv())?;
    }
    if let Some(p) = sibling(out, "left.csv") {
        std::fs::write(p, left.to_csv())?;
    }
    Ok(status)
}

fn wave(model: &Path, delta: Option<f64>, out: Option<&Path>) -> Result<Status, Error> {
    let (cfg, m) = load(model)?;
    let delta = delta.unwrap_or_else(|| m.delta());
    let front = solve_front_with(&m, delta, &SolveOptions::from_numerics(&cfg.numerics)?)?;
    let h2 = verify_hyp2(&front.profile);
    write_or_print(out, &front.profile.to_csv())?;
    let tail = h2.tail.as_ref();
    let doc = json!({
        "schema_version": SCHEMA_VERSION,
        "model": m.kind,
        "delta": delta,
        "speed": front.profile.speed,
        "c_star": front.profile.c_star,
        "a": tail.map(|t| t.a),
        "b": tail.map(|t| t.b),
        "nu_star": tail.map(|t| t.nu_star),
        "eta": tail.map(|t| t.eta),
        "residual": h2.residual,
        "status": h2.status,
        "notes": h2.notes,
    });
    match sibling(out, "json") {
        Some(p) => std::fs::write(p, pretty(&doc))?,
        None => eprint!("{}", pretty(&doc)),
    }
    Ok(h2.status)
}

fn spectrum(model: &Path, delta: Option<f64>, region: Option<Vec<f64>>, out: Option<&Path>) -> Result<Status, Error> {
    let (cfg, m) = load(model)?;
    let delta = delta.unwrap_or_else(|| m.delta());
    let mut n: Numerics = cfg.numerics.clone();
    if let Some(r) = region {
        n.region = [r[0], r[1], r[2], r[3]];
    }
    let opts = SpectralOptions::from_numerics(&n)?;
    let rep = point_spectrum(&m, delta, &SolveOptions::from_numerics(&n)?, &opts)?;
    let doc = json!({
        "schema_version": SCHEMA_VERSION,
        "model": m.kind,
        "delta": delta,
        "report": rep,
    });
    write_or_print(out, &pretty(&doc))?;
    if let Some(p) = sibling(out, "evans.csv") {
        std::fs::write(p, rep.evans_csv())?;
    }
    Ok(rep.status)
}

fn simulate(
    model: &Path,
    delta: Option<f64>,
    t_end: Option<f64>,
    out: Option<&Path>,
    snapshots: Option<f64>,
) -> Result<Status, Error> {
    let (cfg, m) = load(model)?;
    let n = &cfg.numerics;
    let delta = delta.unwrap_or_else(|| m.delta());
    let t_end = t_end.unwrap_or(n.sim_t);
    let grid = Grid1D::new(n.sim_x_min, n.sim_x_max, n.sim_h)?;
    let dt = n.sim_dt_factor * n.sim_h;
    let mut opts = SimOptions { snapshot_every: snapshots, ..SimOptions::default() };
    let mut notes = Vec::new();
    match solve_front_with(&m, delta, &SolveOptions::from_numerics(n)?) {
        Ok(f) => opts.profile = Some(f.profile),
        Err(e) => notes.push(format!("no front for the weighted error: {e}")),
    }
    let run = run_invasion_with(&m, delta, grid, t_end, dt, &InitialData::default(), &opts)?;
    write_or_print(out, &run.to_csv())?;
    let mut snaps = Vec::new();
    if let Some(o) = out {
        for (i, s) in run.snapshots.iter().enumerate() {
            let p = o.with_extension(format!("snap{i:04}.csv"));
            std::fs::write(&p, run.snapshot_csv(&s.values))?;
            snaps.push(json!({"t": s.t, "file": p.file_name().map(|f| f.to_string_lossy().into_owned())}));
        }
    }
    let status = if run.diagnostics.aborted.is_some() || run.fitted.is_none() {
        notes.push("outside the validated basin or domain: run incomplete".into());
        Status::Inconclusive
    } else {
        Status::Pass
    };
    let doc = json!({
        "schema_version": SCHEMA_VERSION,
        "model": {"kind": m.kind, "mu": m.mu},
        "delta": delta,
        "initial": InitialData::default(),
        "run": run,
        "snapshots": snaps,
        "status": status,
        "notes": notes,
    });
    match sibling(out, "json") {
        Some(p) => std::fs::write(p, pretty(&doc))?,
        None => eprint!("{}", pretty(&doc)),
    }
    Ok(status)
}

fn dispatch(cmd: Command) -> Result<Status, Error> {
    match cmd {
        Command::Analyze { model, c, delta, out } => analyze(&model, c, delta, out.as_deref()),
        Command::Wave { model, delta, out } => wave(&model, delta, out.as_deref()),
        Command::Spectrum { model, delta, region, out } => spectrum(&model, delta, region, out.as_deref()),
        Command::Simulate { model, delta, t_end, out, emit_snapshots } => {
            simulate(&model, delta, t_end, out.as_deref(), emit_snapshots)
        }
        Command::Verify { model, delta, out, timings } => {
            let cfg = config(&model)?;
            let r = cmd_verify(&cfg, &delta, timings);
            write_or_print(out.as_deref(), &r.to_json())?;
            Ok(r.overall)
        }
        Command::Report { artifacts, out } => {
            let r = cmd_report(&artifacts)?;
            write_or_print(out.as_deref(), &r.to_json())?;
            Ok(Status::Pass)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(n) = std::env::var("FRONTLAB_THREADS").ok().and_then(|s| s.parse::<usize>().ok()) {
        if n > 0 {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
    match dispatch(cli.command) {
        Ok(status) => {
            eprintln!("{status}");
            ExitCode::from(status.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(3)
        }
    }
}
