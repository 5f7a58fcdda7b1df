//! `spectral-nmr`: prepare labeled pseudo-pure states, run Bernstein–Vazirani,
//! sweep selective-pulse gate fidelities and execute pulse-sequence files.
//!
//! Frequencies are Hz on the command line. Angles accept `pi`, `pi/2`,
//! `-pi/2`, `3pi/4` or plain radians. Every command computes all of its
//! outputs before writing any file.

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use spectral_nmr::evolution::{run_sequence, Envelope, EvolutionOptions, GradientMode};
use spectral_nmr::gates::{
    bv_pulse_sequence, bv_unitary, lpps_pulse_sequence_with, on_register, LppsPulseOptions,
};
use spectral_nmr::liouville::{lpps_state, thermal_equilibrium};
use spectral_nmr::spectra::{
    decode_answer, readout_spectrum, render_lorentzian, rendered_csv, FrequencyGrid, Spectrum,
};
use spectral_nmr::tse::{fidelity_sweep, linear_grid, log_grid};
use spectral_nmr::{
    preset, BitString, Error as CoreError, Operator64, PulseSequence64, SpinSystem64,
};

#[derive(Parser, Debug)]
#[command(
    name = "spectral-nmr",
    version,
    about = "Observer-spin NMR quantum processor simulator"
)]
struct Cli {
    /// Output directory.
    #[arg(long, global = true, env = "SPECTRAL_NMR_OUT", default_value = ".")]
    out: PathBuf,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Prepare a labeled pseudo-pure state with the pulsed scheme.
    Lpps(LppsArgs),
    /// Solve a Bernstein–Vazirani instance and read the answer off the spectrum.
    Bv(BvArgs),
    /// Sweep Q = 1 - F against the selective-pulse power ratio.
    Fidelity(FidelityArgs),
    /// Execute a JSON pulse-sequence file.
    Run(RunArgs),
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
struct SystemSource {
    /// Built-in system: alanine, alanine-carbons.
    #[arg(long)]
    preset: Option<String>,
    /// JSON spin-system file.
    #[arg(long)]
    system: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct RenderArgs {
    /// Lorentzian FWHM, Hz.
    #[arg(long, default_value_t = 1.0)]
    linewidth: f64,
    /// Rendered grid spacing, Hz.
    #[arg(long, default_value_t = 0.05)]
    step: f64,
    /// Extra span beyond the outermost lines, Hz.
    #[arg(long, default_value_t = 20.0)]
    margin: f64,
}

#[derive(Args, Debug)]
struct PrepArgs {
    /// Power ratio Ω0 / (π J01) of the selective pulse.
    #[arg(long, default_value_t = 0.179)]
    ratio: f64,
    /// Flip angle of the selective pulse.
    #[arg(long, default_value = "pi/2", value_parser = parse_angle)]
    alpha: f64,
    /// Enable T2 relaxation during timed events.
    #[arg(long)]
    t2: bool,
    #[arg(long, value_enum, default_value_t = GradientArg::CrushAll)]
    gradient_mode: GradientArg,
    #[arg(long, value_enum, default_value_t = EnvelopeArg::Gaussian)]
    envelope: EnvelopeArg,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum GradientArg {
    CrushAll,
    CrushNonzeroOrder,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum EnvelopeArg {
    Gaussian,
    Rectangular,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum BvMode {
    Ideal,
    Pulsed,
}

#[derive(Args, Debug)]
struct LppsArgs {
    #[command(flatten)]
    system: SystemSource,
    /// Register label, qubit 1 first.
    #[arg(long, value_parser = parse_label)]
    label: BitString,
    #[command(flatten)]
    prep: PrepArgs,
    #[command(flatten)]
    render: RenderArgs,
}

#[derive(Args, Debug)]
struct BvArgs {
    #[command(flatten)]
    system: SystemSource,
    /// Hidden string a, qubit 1 first.
    #[arg(long, value_parser = parse_label)]
    a: BitString,
    #[arg(long, value_enum, default_value_t = BvMode::Ideal)]
    mode: BvMode,
    #[command(flatten)]
    prep: PrepArgs,
    #[command(flatten)]
    render: RenderArgs,
}

#[derive(Args, Debug)]
struct FidelityArgs {
    #[command(flatten)]
    system: SystemSource,
    #[arg(long, default_value = "pi/2", value_parser = parse_angle)]
    alpha: f64,
    /// `lo:hi:Nlog`, `lo:hi:Nlin` or a comma-separated list.
    #[arg(long, default_value = "0.01:2:200log")]
    ratios: String,
    /// Irradiated register label (default all zero).
    #[arg(long, value_parser = parse_label)]
    label: Option<BitString>,
    /// Output file name inside the output directory.
    #[arg(long, default_value = "fidelity.csv")]
    name: String,
}

#[derive(Args, Debug)]
struct RunArgs {
    #[command(flatten)]
    system: SystemSource,
    /// JSON pulse-sequence file.
    #[arg(long)]
    sequence: PathBuf,
    /// `thermal` or `lpps:LABEL`.
    #[arg(long, default_value = "thermal")]
    initial: String,
    #[arg(long)]
    t2: bool,
    /// Prefix of the output files.
    #[arg(long, default_value = "run")]
    name: String,
    #[command(flatten)]
    render: RenderArgs,
}

#[derive(Debug)]
enum Failure {
    Validation(String),
    Internal(String),
}

impl From<CoreError> for Failure {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::Eigen | CoreError::NonHermitian(_) => Failure::Internal(e.to_string()),
            other => Failure::Validation(other.to_string()),
        }
    }
}

type Outcome<T> = std::result::Result<T, Failure>;

fn parse_angle(s: &str) -> std::result::Result<f64, String> {
    let t = s.trim().to_ascii_lowercase();
    let (sign, body) = match t.strip_prefix('-') {
        Some(rest) => (-1.0, rest),
        None => (1.0, t.as_str()),
    };
    let value = if let Some(idx) = body.find("pi") {
        let coef = match body[..idx].trim_end_matches('*') {
            "" => 1.0,
            c => c.parse::<f64>().map_err(|_| format!("bad angle `{s}`"))?,
        };
        let den = match body[idx + 2..].strip_prefix('/') {
            Some(d) => d.parse::<f64>().map_err(|_| format!("bad angle `{s}`"))?,
            None if body[idx + 2..].is_empty() => 1.0,
            None => return Err(format!("bad angle `{s}`")),
        };
        coef * PI / den
    } else {
        body.parse::<f64>()
            .map_err(|_| format!("bad angle `{s}`"))?
    };
    if !value.is_finite() {
        return Err(format!("bad angle `{s}`"));
    }
    Ok(sign * value)
}

fn parse_label(s: &str) -> std::result::Result<BitString, String> {
    s.parse::<BitString>().map_err(|e| e.to_string())
}

fn parse_ratios(s: &str) -> Outcome<Vec<f64>> {
    let bad = || Failure::Validation(format!("bad ratio list `{s}`"));
    let s = s.trim();
    if s.is_empty() {
        return Err(Failure::Validation("empty ratio list".into()));
    }
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        [lo, hi, spec] => {
            let lo: f64 = lo.parse().map_err(|_| bad())?;
            let hi: f64 = hi.parse().map_err(|_| bad())?;
            let (count, linear) = if let Some(c) = spec.strip_suffix("lin") {
                (c, true)
            } else {
                (spec.strip_suffix("log").unwrap_or(spec), false)
            };
            let n: usize = count.parse().map_err(|_| bad())?;
            let grid = if linear {
                linear_grid(lo, hi, n)
            } else {
                log_grid(lo, hi, n)
            };
            Ok(grid?)
        }
        [_] => s
            .split(',')
            .filter(|p| !p.trim().is_empty())
            .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
            .collect::<Outcome<Vec<_>>>()
            .and_then(|v| {
                if v.is_empty() {
                    Err(Failure::Validation("empty ratio list".into()))
                } else {
                    Ok(v)
                }
            }),
        _ => Err(bad()),
    }
}

fn read_text(path: &Path) -> Outcome<String> {
    fs::read_to_string(path)
        .map_err(|e| Failure::Validation(format!("cannot read {}: {e}", path.display())))
}

fn load(src: &SystemSource) -> Outcome<(SpinSystem64, String)> {
    let (sys, id) = match (&src.preset, &src.system) {
        (Some(name), None) => (preset::<f64>(name)?, name.clone()),
        (None, Some(path)) => {
            let sys = SpinSystem64::from_json(&read_text(path)?)?;
            let id = sys.name().map(str::to_string).unwrap_or_else(|| {
                path.file_stem().map_or_else(
                    || "system".to_string(),
                    |s| s.to_string_lossy().into_owned(),
                )
            });
            (sys, id)
        }
        _ => {
            return Err(Failure::Validation(
                "give exactly one of --preset or --system".into(),
            ))
        }
    };
    for w in sys.warnings() {
        eprintln!("warning: {w}");
    }
    Ok((sys, id))
}

fn prep_options(p: &PrepArgs) -> LppsPulseOptions<f64> {
    LppsPulseOptions {
        envelope: match p.envelope {
            EnvelopeArg::Gaussian => Envelope::default_gaussian(),
            EnvelopeArg::Rectangular => Envelope::Rectangular,
        },
        gradient: match p.gradient_mode {
            GradientArg::CrushAll => GradientMode::CrushAll,
            GradientArg::CrushNonzeroOrder => GradientMode::CrushNonzeroOrder,
        },
    }
}

struct Pulsed {
    state: Operator64,
    sequence: PulseSequence64,
}

fn pulsed_lpps(sys: &SpinSystem64, label: &BitString, p: &PrepArgs) -> Outcome<Pulsed> {
    let sequence = lpps_pulse_sequence_with(sys, label, p.ratio, p.alpha, &prep_options(p))?;
    let state = run_sequence(
        sys,
        &sequence,
        &thermal_equilibrium(sys),
        EvolutionOptions::with_relaxation(p.t2),
    )?;
    Ok(Pulsed { state, sequence })
}

fn spectrum_files(prefix: &str, spec: &Spectrum, r: &RenderArgs) -> Outcome<Vec<(String, String)>> {
    let grid = FrequencyGrid::around(spec, r.margin, r.step);
    let rendered = render_lorentzian(spec, r.linewidth, &grid)?;
    Ok(vec![
        (format!("{prefix}_sticks.csv"), spec.sticks_csv()),
        (format!("{prefix}_rendered.csv"), rendered_csv(&rendered)),
    ])
}

fn decode_json(spec: &Spectrum) -> Outcome<String> {
    let d = decode_answer(spec)?;
    let lines: Vec<_> = spec
        .lines
        .iter()
        .map(|l| {
            json!({
                "register_label": l.register_label.to_string(),
                "freq_hz": l.freq_hz,
                "re_amp": l.amplitude.re,
                "im_amp": l.amplitude.im,
            })
        })
        .collect();
    let doc = json!({ "answer": d.label.to_string(), "confidence": d.confidence, "tie": d.tie, "lines": lines });
    Ok(serde_json::to_string_pretty(&doc).expect("json") + "\n")
}

fn cmd_lpps(args: &LppsArgs) -> Outcome<Vec<(String, String)>> {
    let (sys, _) = load(&args.system)?;
    args.label.expect_len(sys.n_qubits())?;
    let thermal = readout_spectrum(&thermal_equilibrium(&sys), &sys)?;
    let pulsed = pulsed_lpps(&sys, &args.label, &args.prep)?;
    let spec = readout_spectrum(&pulsed.state, &sys)?;
    let prefix = format!("lpps_{}", args.label);
    let mut files = spectrum_files("thermal", &thermal, &args.render)?;
    files.extend(spectrum_files(&prefix, &spec, &args.render)?);
    files.push((
        format!("{prefix}_sequence.json"),
        pulsed.sequence.to_json() + "\n",
    ));
    Ok(files)
}

fn cmd_bv(args: &BvArgs) -> Outcome<Vec<(String, String)>> {
    let (sys, _) = load(&args.system)?;
    args.a.expect_len(sys.n_qubits())?;
    let zeros = BitString::zeros(sys.n_qubits());
    let rho = match args.mode {
        BvMode::Ideal => {
            lpps_state(&sys, &zeros)?.conjugate_by(&on_register(&bv_unitary(&args.a)?))
        }
        BvMode::Pulsed => {
            let prepared = pulsed_lpps(&sys, &zeros, &args.prep)?.state;
            let seq = bv_pulse_sequence(&args.a)?;
            if seq.is_empty() {
                prepared
            } else {
                run_sequence(
                    &sys,
                    &seq,
                    &prepared,
                    EvolutionOptions::with_relaxation(args.prep.t2),
                )?
            }
        }
    };
    let spec = readout_spectrum(&rho, &sys)?;
    let prefix = format!("bv_{}", args.a);
    let mut files = spectrum_files(&prefix, &spec, &args.render)?;
    files.push((format!("{prefix}_decode.json"), decode_json(&spec)?));
    Ok(files)
}

fn cmd_fidelity(args: &FidelityArgs) -> Outcome<Vec<(String, String)>> {
    let (sys, id) = load(&args.system)?;
    let ratios = parse_ratios(&args.ratios)?;
    let label = args
        .label
        .clone()
        .unwrap_or_else(|| BitString::zeros(sys.n_qubits()));
    let curve = fidelity_sweep(&sys, &label, args.alpha, &ratios, &id)?;
    Ok(vec![(args.name.clone(), curve.to_csv())])
}

fn cmd_run(args: &RunArgs) -> Outcome<Vec<(String, String)>> {
    let (sys, _) = load(&args.system)?;
    let seq = PulseSequence64::from_json(&read_text(&args.sequence)?)?;
    let rho0 = match args.initial.as_str() {
        "thermal" => thermal_equilibrium(&sys),
        other => match other.strip_prefix("lpps:") {
            Some(label) => lpps_state(&sys, &parse_label(label).map_err(Failure::Validation)?)?,
            None => {
                return Err(Failure::Validation(format!(
                    "unknown initial state `{other}`"
                )))
            }
        },
    };
    let rho = run_sequence(
        &sys,
        &seq,
        &rho0,
        EvolutionOptions::with_relaxation(args.t2),
    )?;
    let spec = readout_spectrum(&rho, &sys)?;
    let diag: Vec<f64> = rho.real_diagonal();
    let state = json!({
        "nspins": sys.nspins(),
        "events": seq.len(),
        "duration_s": seq.total_duration(),
        "trace": rho.trace().re,
        "diagonal": diag,
        "max_offdiagonal": rho.max_abs_diff(&rho.diagonal_part()),
        "hermiticity_residual": rho.hermiticity_residual(),
    });
    let mut files = spectrum_files(&args.name, &spec, &args.render)?;
    files.push((
        format!("{}_state.json", args.name),
        serde_json::to_string_pretty(&state).expect("json") + "\n",
    ));
    Ok(files)
}

fn write_all(dir: &Path, files: &[(String, String)]) -> Outcome<()> {
    fs::create_dir_all(dir)
        .map_err(|e| Failure::Validation(format!("cannot create {}: {e}", dir.display())))?;
    for (name, body) in files {
        let path = dir.join(name);
        fs::write(&path, body)
            .map_err(|e| Failure::Internal(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(())
}

fn execute(cli: &Cli) -> Outcome<Vec<(String, String)>> {
    match &cli.command {
        Command::Lpps(a) => cmd_lpps(a),
        Command::Bv(a) => cmd_bv(a),
        Command::Fidelity(a) => cmd_fidelity(a),
        Command::Run(a) => cmd_run(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match execute(&cli).and_then(|files| {
        write_all(&cli.out, &files)?;
        Ok(files)
    }) {
        Ok(files) => {
            for (name, _) in files {
                println!("{}", cli.out.join(name).display());
            }
            ExitCode::SUCCESS
        }
        Err(Failure::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Internal(msg)) => {
            eprintln!("internal error: {msg}");
            ExitCode::from(2)
        }
    }
}
