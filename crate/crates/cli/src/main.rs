//! `qfo`: synthesize, evaluate, propagate and inspect Fourier-optical gates.

mod config;
mod json;

use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qfo_core::evolution::{
    coincidence_project, evolve, reduced_one_photon_density, CoincidenceProjector,
};
use qfo_core::propagation::{propagate_density, Element};
use qfo_core::{
    circulant_from_pupil, evaluate, synthesize, GateReport, QfoError, QubitLayout,
    SynthesisProblem, SynthesisStatus,
};
use serde::Serialize;

use config::{read_json, EvalConfig, PropagateConfig, StackConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error(transparent)]
    Core(#[from] QfoError),
    #[error("optimization failed: best fidelity {0} is below the floor")]
    Optimization(f64),
}

impl CliError {
    pub fn io(path: &Path, source: io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Optimization(_) => 2,
            CliError::Core(QfoError::Paraxial(_) | QfoError::Aliasing(_)) => 3,
            _ => 1,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "qfo",
    version,
    about = "Quantum Fourier-optical processor toolkit"
)]
struct Cli {
    /// Worker threads for restarts and field propagation.
    #[arg(long, global = true, env = "QFO_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Overrides the seed in the configuration.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Optimize phase profiles for a target gate.
    Synth(Common),
    /// Score persisted profiles against a target gate.
    Eval(Common),
    /// Render intensity maps through a lens-pupil train.
    Propagate(Common),
    /// Print a gate report.
    Show {
        /// Gate report to print.
        #[arg(long)]
        config: PathBuf,
    },
}

fn write_file(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<(), CliError> {
    let text = json::to_string(value).map_err(|e| CliError::Config(e.to_string()))?;
    write_file(&dir.join(name), text.as_bytes())
}

fn prepare_out(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

fn config_dir(path: &Path) -> PathBuf {
    path.parent().map(Path::to_path_buf).unwrap_or_default()
}

fn write_profiles(dir: &Path, report: &GateReport) -> Result<(), CliError> {
    write_json(dir, "pupil.json", &report.profiles.pupil)?;
    write_json(dir, "diag.json", &report.profiles.modulator)?;
    if let Some(p2) = &report.profiles.second_pupil {
        write_json(dir, "pupil2.json", p2)?;
    }
    Ok(())
}

fn cmd_synth(args: &Common) -> Result<(), CliError> {
    let mut problem: SynthesisProblem = read_json(&args.config)?;
    if let Some(seed) = args.seed {
        problem.seed = seed;
    }
    problem.validate()?;
    prepare_out(&args.out)?;
    let report = synthesize(&problem)?;
    write_json(&args.out, "gate_report.json", &report)?;
    write_profiles(&args.out, &report)?;
    eprintln!(
        "{:?}: F = {:.10}, S = {:.10}",
        report.status, report.score.fidelity, report.score.success
    );
    match report.status {
        SynthesisStatus::Success => Ok(()),
        SynthesisStatus::Stage1Failure => Err(CliError::Optimization(report.min_fidelity)),
    }
}

fn cmd_eval(args: &Common) -> Result<(), CliError> {
    let cfg: EvalConfig = read_json(&args.config)?;
    let profiles = cfg.profile_paths().load(&config_dir(&args.config))?;
    prepare_out(&args.out)?;
    let report = evaluate(&cfg.problem, &profiles)?;
    write_json(&args.out, "gate_report.json", &report)?;
    eprintln!(
        "F = {:.10}, S = {:.10}",
        report.score.fidelity, report.score.success
    );
    Ok(())
}

#[derive(Serialize)]
struct PropagationSummary {
    planes: usize,
    points: usize,
    z_length: f64,
    /// `Tr ρ`: mean photon number of the rendered state.
    photons: f64,
    /// Post-selection probability when a projector is applied.
    post_selection: Option<f64>,
}

fn cmd_propagate(args: &Common) -> Result<(), CliError> {
    let cfg: PropagateConfig = read_json(&args.config)?;
    let base = config_dir(&args.config);
    let window = cfg.window()?;
    let state = cfg.state(&window)?;
    let params = cfg.optics;

    let (elements, transform) = match &cfg.stack {
        StackConfig::EightF {
            pupil,
            diag,
            pupil2,
        } => {
            let profiles = config::ProfilePaths {
                pupil: pupil.clone(),
                diag: diag.clone(),
                pupil2: pupil2.clone(),
            }
            .load(&base)?;
            let t = profiles.transform(window.modes)?;
            (params.eight_f_scene(&profiles, &window).elements, t)
        }
        StackConfig::FourF { pupil } => {
            let p: qfo_core::PupilProfile = read_json(&base.join(pupil))?;
            let t = circulant_from_pupil(&p, window.modes)?;
            (params.four_f(&p, &window), t)
        }
        StackConfig::FreeSpace { length } => (
            vec![Element::FreeSpace { dz: *length }],
            qfo_core::ModeTransform::identity(window.modes),
        ),
    };

    let (scene, rho, post_selection) = match cfg.project {
        None => {
            let mut elements = elements;
            if let Some(tail) = cfg.tail {
                elements.push(Element::FreeSpace { dz: tail });
            }
            (
                params.scene(elements, &window),
                reduced_one_photon_density(&state)?,
                None,
            )
        }
        Some(p) => {
            let layout = QubitLayout::new(window, &[p.control, p.target])?;
            let proj = CoincidenceProjector::for_qubits(&layout, p.control, p.target)?;
            let out = coincidence_project(&evolve(&state, &transform)?, &proj)?;
            let tail = cfg.tail.unwrap_or(params.focal_length);
            let scene = params.scene(vec![Element::FreeSpace { dz: tail }], &window);
            (
                scene,
                reduced_one_photon_density(&out)?,
                Some(out.norm_sqr()),
            )
        }
    };

    prepare_out(&args.out)?;
    let map = propagate_density(&scene, &rho, &window)?;
    let csv_path = args.out.join("intensity.csv");
    let file = File::create(&csv_path).map_err(|e| CliError::io(&csv_path, e))?;
    let mut w = BufWriter::new(file);
    map.write_csv(&mut w, cfg.x_stride)
        .and_then(|_| w.flush())
        .map_err(|e| CliError::io(&csv_path, e))?;
    let mut pgm = Vec::new();
    map.write_pgm(&mut pgm, cfg.x_stride)
        .map_err(|e| CliError::io(&args.out, e))?;
    write_file(&args.out.join("intensity.pgm"), &pgm)?;
    let summary = PropagationSummary {
        planes: map.z.len(),
        points: map.x.len(),
        z_length: scene.length(),
        photons: rho.diag().iter().map(|z| z.re).sum(),
        post_selection,
    };
    write_json(&args.out, "summary.json", &summary)
}

fn cmd_show(path: &Path) -> Result<(), CliError> {
    let report: GateReport = read_json(path)?;
    let mut out = io::stdout().lock();
    print_report(&mut out, &report).map_err(|e| CliError::io(Path::new("<stdout>"), e))
}

fn print_report<W: Write>(w: &mut W, r: &GateReport) -> io::Result<()> {
    writeln!(w, "status: {:?}", r.status)?;
    writeln!(
        w,
        "mean fidelity {:.6}  mean success {:.6}  min fidelity {:.6}",
        r.score.fidelity, r.score.success, r.min_fidelity
    )?;
    for g in &r.gates {
        writeln!(
            w,
            "\nqubits {:?}: F = {:.6}, S = {:.6}",
            g.qubits, g.score.fidelity, g.score.success
        )?;
        let labels = g.operator.basis_labels();
        write!(w, "{:>6}", "")?;
        for l in &labels {
            write!(w, "{l:>18}")?;
        }
        writeln!(w)?;
        for (row, l) in labels.iter().enumerate() {
            write!(w, "{l:>6}")?;
            for col in 0..labels.len() {
                let z = g.operator.matrix[[row, col]];
                write!(w, "{:>18}", format!("{:.3}e^{{{:.3}i}}", z.norm(), z.arg()))?;
            }
            writeln!(w)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("qfo: {e}");
            return ExitCode::from(1);
        }
    }
    let result = match &cli.command {
        Command::Synth(a) => cmd_synth(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Propagate(a) => cmd_propagate(a),
        Command::Show { config } => cmd_show(config),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qfo: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
