//! Command-line front end.
//!
//! Exit codes: 0 success, 1 failed check or internal error, 2 I/O failure,
//! 3 unnormalized input state, 64 usage error.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::Error;
use crate::oracle::verify_protocol;
use crate::statevector::{StateRecord, StateVector};
use crate::teleport::{circuit_schedule, prepare_generalized_bell, teleport};
use crate::Amplitude;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_IO: i32 = 2;
pub const EXIT_UNNORMALIZED: i32 = 3;
pub const EXIT_USAGE: i32 = 64;

/// Inputs whose squared norm is further than this from 1 are rejected.
pub const INPUT_NORM_TOLERANCE: f64 = 1e-6;
/// Teleportation counts as successful at or above `1 - FIDELITY_TOLERANCE`.
pub const FIDELITY_TOLERANCE: f64 = 1e-10;
/// Largest N accepted by `verify`.
pub const VERIFY_MAX_N: u32 = 5;

#[derive(Parser, Debug)]
#[command(
    name = "qteleport",
    version,
    about = "Simulate and verify N-qubit quantum teleportation"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Teleport an N-qubit state and print the run trace.
    Teleport(TeleportArgs),
    /// Compare the simulation against the closed-form states.
    Verify(VerifyArgs),
    /// Print the gate schedule of the teleportation circuit.
    Circuit(CircuitArgs),
    /// Print the 2N-qubit generalized Bell state.
    Bell(BellArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Args, Debug)]
pub struct Output {
    /// Write to this file instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Args, Debug)]
pub struct TeleportArgs {
    /// Number of qubits to teleport.
    #[arg(long)]
    pub n: u32,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// `random`, a comma-separated amplitude list (`re` or `re+imi`
    /// tokens), or a path to a state file (JSON or amplitude list).
    #[arg(long, default_value = "random")]
    pub state: String,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[arg(long)]
    pub n: u32,
    /// Random inputs checked in addition to every basis input.
    #[arg(long, default_value_t = 20)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Args, Debug)]
pub struct CircuitArgs {
    #[arg(long)]
    pub n: u32,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Args, Debug)]
pub struct BellArgs {
    #[arg(long)]
    pub n: u32,
    #[command(flatten)]
    pub output: Output,
}

/// Where an input state comes from.
#[derive(Clone, Debug, PartialEq)]
pub enum StateSource {
    Random,
    Literal(String),
    File(PathBuf),
}

impl StateSource {
    /// `random`, anything containing a comma is a literal list, otherwise a
    /// file path.
    pub fn from_arg(arg: &str) -> Self {
        if arg == "random" {
            StateSource::Random
        } else if arg.contains(',') {
            StateSource::Literal(arg.to_string())
        } else {
            StateSource::File(PathBuf::from(arg))
        }
    }
}

/// A failure mapped to an exit code.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Capacity { .. } => EXIT_USAGE,
            _ => EXIT_FAILED,
        };
        Failure::new(code, e.to_string())
    }
}

fn parse_real(token: &str, whole: &str) -> Result<f64, Error> {
    let v: f64 = token
        .parse()
        .map_err(|_| Error::Parse(format!("bad amplitude {whole:?}")))?;
    if !v.is_finite() {
        return Err(Error::Parse(format!("non-finite amplitude {whole:?}")));
    }
    Ok(v)
}

/// Parses one `re`, `imi` or `re±imi` token.
pub fn parse_amplitude(token: &str) -> Result<Amplitude, Error> {
    let t = token.trim();
    let Some(body) = t.strip_suffix('i') else {
        return Ok(Amplitude::new(parse_real(t, token)?, 0.0));
    };
    // Split at the last sign that is neither leading nor an exponent sign.
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&p| matches!(bytes[p], b'+' | b'-') && !matches!(bytes[p - 1], b'e' | b'E'));
    let im_of = |s: &str| match s {
        "" | "+" => Ok(1.0),
        "-" => Ok(-1.0),
        _ => parse_real(s, token),
    };
    match split {
        Some(p) => Ok(Amplitude::new(
            parse_real(&body[..p], token)?,
            im_of(&body[p..])?,
        )),
        None => Ok(Amplitude::new(0.0, im_of(body)?)),
    }
}

/// Parses a comma-separated amplitude list.
pub fn parse_amplitude_list(text: &str) -> Result<Vec<Amplitude>, Error> {
    text.trim().split(',').map(parse_amplitude).collect()
}

fn load_amplitudes(source: &StateSource) -> Result<Vec<Amplitude>, Failure> {
    match source {
        StateSource::Random => unreachable!("random states are generated, not loaded"),
        StateSource::Literal(text) => {
            parse_amplitude_list(text).map_err(|e| Failure::new(EXIT_USAGE, e.to_string()))
        }
        StateSource::File(path) => {
            let text = fs::read_to_string(path).map_err(|e| {
                Failure::new(
                    EXIT_IO,
                    format!("cannot read state file {}: {e}", path.display()),
                )
            })?;
            let parsed = if text.trim_start().starts_with('{') {
                serde_json::from_str::<StateRecord>(&text)
                    .map_err(|e| Error::Parse(e.to_string()))
                    .and_then(|r| r.check_shape().map(|_| r.amplitudes()))
            } else {
                parse_amplitude_list(&text)
            };
            parsed.map_err(|e| {
                Failure::new(
                    EXIT_IO,
                    format!("invalid state file {}: {e}", path.display()),
                )
            })
        }
    }
}

/// Builds the input state, renormalizing inputs within
/// [`INPUT_NORM_TOLERANCE`]. Returns the squared norm before
/// renormalization when it was not exactly 1.
fn input_state(
    n: u32,
    seed: u64,
    source: &StateSource,
) -> Result<(StateVector, Option<f64>), Failure> {
    if *source == StateSource::Random {
        // Separate stream from the one used for measurement.
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(1);
        return Ok((StateVector::random(n, &mut rng)?, None));
    }
    let amps = load_amplitudes(source)?;
    let expected = 1usize << n;
    if amps.len() != expected {
        return Err(Failure::new(
            EXIT_USAGE,
            format!("{} amplitudes given, N = {n} needs {expected}", amps.len()),
        ));
    }
    let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
    if (norm - 1.0).abs() > INPUT_NORM_TOLERANCE {
        return Err(Failure::new(
            EXIT_UNNORMALIZED,
            format!("input state is not normalized: squared norm {norm}"),
        ));
    }
    let state = StateVector::normalized(amps)?;
    Ok((state, (norm != 1.0).then_some(norm)))
}

fn check_n(n: u32, max: Option<u32>) -> Result<(), Failure> {
    if n == 0 {
        return Err(Failure::new(EXIT_USAGE, "--n must be at least 1"));
    }
    if let Some(max) = max {
        if n > max {
            return Err(Failure::new(
                EXIT_USAGE,
                format!("--n must be at most {max}"),
            ));
        }
    }
    Ok(())
}

fn emit(output: &Output, text: &str, stdout: &mut dyn Write) -> Result<(), Failure> {
    match &output.out {
        Some(path) => write_file(path, text),
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|e| Failure::new(EXIT_IO, format!("cannot write output: {e}"))),
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text)
        .map_err(|e| Failure::new(EXIT_IO, format!("cannot write {}: {e}", path.display())))
}

fn json_line<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string(value).expect("serialization is infallible");
    s.push('\n');
    s
}

fn cmd_teleport(
    args: &TeleportArgs,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<i32, Failure> {
    check_n(args.n, None)?;
    let source = StateSource::from_arg(&args.state);
    let (psi, renormalized) = input_state(args.n, args.seed, &source)?;
    if let Some(norm) = renormalized {
        let _ = writeln!(stderr, "note: input renormalized (squared norm was {norm})");
    }
    let trace = teleport(&psi, args.seed)?;
    let text = match args.output.format.unwrap_or(Format::Json) {
        Format::Json => trace.to_json(),
        Format::Text => format!(
            "n: {}\noutcome: {}\nprobability: {}\ncorrection: X^{} Z^{}\nfidelity: {}\n",
            trace.n,
            trace.outcome.bits,
            trace.outcome.probability,
            trace.correction.x_exponents(),
            trace.correction.z_exponents(),
            trace.fidelity_to_input
        ),
    };
    emit(&args.output, &text, stdout)?;
    if trace.fidelity_to_input >= 1.0 - FIDELITY_TOLERANCE {
        Ok(EXIT_OK)
    } else {
        let _ = writeln!(
            stderr,
            "error: fidelity {} below threshold",
            trace.fidelity_to_input
        );
        Ok(EXIT_FAILED)
    }
}

fn cmd_verify(args: &VerifyArgs, stdout: &mut dyn Write) -> Result<i32, Failure> {
    check_n(args.n, Some(VERIFY_MAX_N))?;
    let report = verify_protocol(args.n, args.trials, args.seed)?;
    let text = match args.output.format.unwrap_or(Format::Text) {
        Format::Json => json_line(&report),
        Format::Text => report.to_string(),
    };
    emit(&args.output, &text, stdout)?;
    Ok(if report.passed { EXIT_OK } else { EXIT_FAILED })
}

fn cmd_circuit(args: &CircuitArgs, stdout: &mut dyn Write) -> Result<i32, Failure> {
    check_n(args.n, None)?;
    let schedule = circuit_schedule(args.n)?;
    let text = match args.output.format.unwrap_or(Format::Text) {
        Format::Text => schedule.to_text(),
        Format::Json => {
            let lines: Vec<String> = schedule.ops.iter().map(|op| op.to_string()).collect();
            json_line(&serde_json::json!({ "n": args.n, "ops": lines }))
        }
    };
    emit(&args.output, &text, stdout)?;
    Ok(EXIT_OK)
}

fn cmd_bell(args: &BellArgs, stdout: &mut dyn Write) -> Result<i32, Failure> {
    check_n(args.n, None)?;
    let state = prepare_generalized_bell(args.n)?;
    let text = match args.output.format.unwrap_or(Format::Json) {
        Format::Json => json_line(&state),
        Format::Text => state
            .amplitudes()
            .iter()
            .enumerate()
            .filter(|(_, a)| a.norm_sqr() > 0.0)
            .map(|(i, a)| {
                format!(
                    "{:0width$b} {} {}\n",
                    i,
                    a.re,
                    a.im,
                    width = 2 * args.n as usize
                )
            })
            .collect(),
    };
    emit(&args.output, &text, stdout)?;
    Ok(EXIT_OK)
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            let _ = if e.use_stderr() {
                stderr.write_all(rendered.as_bytes())
            } else {
                stdout.write_all(rendered.as_bytes())
            };
            return code;
        }
    };
    let result = match &cli.command {
        Command::Teleport(a) => cmd_teleport(a, stdout, stderr),
        Command::Verify(a) => cmd_verify(a, stdout),
        Command::Circuit(a) => cmd_circuit(a, stdout),
        Command::Bell(a) => cmd_bell(a, stdout),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message);
            f.code
        }
    }
}
