//! Command-line front end: file formats, built-in generators and result
//! records.
//!
//! Every command prints exactly one JSON [`ResultRecord`] on standard output.
//! Diagnostics go to standard error. Exit codes: 0 success, 2 parse or
//! validation failure, 3 dimension mismatch, 4 entropy out of range,
//! 5 dimension cap.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::entropy::{entanglement_entropy, observational_entropy, schmidt, von_neumann_entropy, Measurement};
use crate::error::Error;
use crate::localopt::{haar_random_unitary, quantum_correlation_entropy, OptimizerConfig, Strategy};
use crate::protocol::{convergence_study, cooling_diagnostic, Certification, Extraction, ProtocolConfig};
use crate::qstate::{c, Bipartition, CMatrix, CVector, DensityMatrix, PureState, DEFAULT_DIM_CAP, DEFAULT_TOL};
use crate::rng::{stream, Stage};
use crate::thermo::{ergotropy, ergotropy_at_entropy, observational_ergotropy, Hamiltonian};

pub const EXIT_OK: i32 = 0;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_DIMENSION: i32 = 3;
pub const EXIT_ENTROPY_RANGE: i32 = 4;
pub const EXIT_DIM_CAP: i32 = 5;

pub const DIM_CAP_ENV: &str = "ERGOLAB_DIM_CAP";

#[derive(Debug, Parser)]
#[command(name = "ergolab", version, about = "Entropy, ergotropy and work-extraction toolkit")]
pub struct Cli {
    /// Validation tolerance for input states.
    #[arg(long, global = true, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    /// Report entropies in bits instead of nats.
    #[arg(long, global = true)]
    pub bits: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Von Neumann, observational and entanglement entropy.
    Entropy(EntropyArgs),
    /// Ergotropy and observational ergotropy.
    Ergotropy(ErgotropyArgs),
    /// Quantum correlation entropy over local product bases.
    Qce(QceArgs),
    /// Monte Carlo simulation of certify-then-extract.
    Protocol(ProtocolArgs),
    /// Print a generated input file.
    Gen {
        /// Generator spec, e.g. `bell` or `werner:0.5`.
        spec: String,
    },
}

#[derive(Debug, Args)]
pub struct EntropyArgs {
    #[arg(long)]
    pub state: String,
    #[arg(long, conflicts_with = "schmidt")]
    pub measurement: Option<String>,
    #[arg(long)]
    pub schmidt: bool,
}

#[derive(Debug, Args)]
pub struct OptimizerArgs {
    #[arg(long, default_value_t = 16)]
    pub restarts: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 200)]
    pub max_sweeps: usize,
    #[arg(long, default_value = "givens_sweeps")]
    pub strategy: Strategy,
}

#[derive(Debug, Args)]
pub struct ErgotropyArgs {
    #[arg(long)]
    pub state: String,
    #[arg(long)]
    pub ham: String,
    #[arg(long, conflicts_with = "optimize_local")]
    pub measurement: Option<String>,
    #[arg(long)]
    pub optimize_local: bool,
    #[command(flatten)]
    pub optimizer: OptimizerArgs,
}

#[derive(Debug, Args)]
pub struct QceArgs {
    #[arg(long)]
    pub state: String,
    #[arg(long)]
    pub ham: Option<String>,
    #[command(flatten)]
    pub optimizer: OptimizerArgs,
}

#[derive(Debug, Args)]
pub struct ProtocolArgs {
    #[arg(long)]
    pub state: String,
    #[arg(long)]
    pub ham: String,
    #[arg(long)]
    pub measurement: String,
    #[arg(long)]
    pub copies: usize,
    #[arg(long)]
    pub trials: usize,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, conflicts_with = "cert_exact")]
    pub cert_samples: Option<u64>,
    #[arg(long)]
    pub cert_exact: bool,
    /// Emit exact per-copy work for N = 1..=N_MAX.
    #[arg(long, value_name = "N_MAX")]
    pub converge: Option<usize>,
    /// Emit single-copy distance to the thermal state for N = 1..=copies.
    #[arg(long)]
    pub cooling: bool,
    /// Include every per-trial work value.
    #[arg(long)]
    pub emit_samples: bool,
}

/// A real number that serializes non-finite values as `"inf"`, `"-inf"`, `"nan"`.
#[derive(Debug, Clone, Copy)]
pub struct Real(pub f64);

impl PartialEq for Real {
    fn eq(&self, other: &Self) -> bool {
        self.0.to_bits() == other.0.to_bits() || self.0 == other.0
    }
}

impl Serialize for Real {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let x = self.0;
        if x.is_finite() {
            s.serialize_f64(x)
        } else if x.is_nan() {
            s.serialize_str("nan")
        } else if x > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_str("-inf")
        }
    }
}

impl<'de> Deserialize<'de> for Real {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(x) => Ok(Real(x)),
            Raw::Text(t) => match t.as_str() {
                "inf" => Ok(Real(f64::INFINITY)),
                "-inf" => Ok(Real(f64::NEG_INFINITY)),
                "nan" => Ok(Real(f64::NAN)),
                other => Err(serde::de::Error::custom(format!("not a number: {other:?}"))),
            },
        }
    }
}

pub type Row = BTreeMap<String, Real>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub command: String,
    pub args: BTreeMap<String, String>,
    /// SHA-256 over the input files (or generator specs) in role order.
    pub inputs_digest: String,
    pub scalars: BTreeMap<String, Real>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub flags: BTreeMap<String, bool>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub arrays: BTreeMap<String, Vec<Real>>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub tables: BTreeMap<String, Vec<Row>>,
    pub seed: Option<u64>,
    pub unit: String,
    pub version: String,
}

impl ResultRecord {
    fn new(command: &str) -> Self {
        Self {
            command: command.to_string(),
            args: BTreeMap::new(),
            inputs_digest: String::new(),
            scalars: BTreeMap::new(),
            flags: BTreeMap::new(),
            arrays: BTreeMap::new(),
            tables: BTreeMap::new(),
            seed: None,
            unit: "nats".into(),
            version: env!("CARGO_PKG_VERSION").into(),
        }
    }

    fn arg(&mut self, key: &str, value: impl ToString) {
        self.args.insert(key.into(), value.to_string());
    }

    fn scalar(&mut self, key: &str, value: f64) {
        self.scalars.insert(key.into(), Real(value));
    }

    fn to_bits(&mut self) {
        let scale = std::f64::consts::LN_2;
        for (key, value) in self.scalars.iter_mut() {
            if key.starts_with("s_") {
                value.0 /= scale;
            }
        }
        self.unit = "bits".into();
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("record serializes");
        s.push('\n');
        s
    }
}

/// A CLI failure with its exit code.
#[derive(Debug)]
pub enum CliError {
    Lib(Error),
    Input(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => EXIT_PARSE,
            CliError::Lib(e) => match e {
                Error::DimensionMismatch { .. } => EXIT_DIMENSION,
                Error::EntropyOutOfRange { .. } | Error::DegenerateSpectrum { .. } => EXIT_ENTROPY_RANGE,
                Error::DimensionCap { .. } => EXIT_DIM_CAP,
                _ => EXIT_PARSE,
            },
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Lib(e) => write!(f, "{e}"),
            CliError::Input(m) => f.write_str(m),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Lib(e)
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn input_err(msg: impl Into<String>) -> CliError {
    CliError::Input(msg.into())
}

/// Result of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Runs the CLI on `args` (including the program name). `dim_cap` is the
/// raw value of the dimension-cap environment variable, if set.
pub fn run<I, T>(args: I, dim_cap: Option<&str>) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => Outcome {
                    code: EXIT_OK,
                    stdout: text,
                    stderr: String::new(),
                },
                _ => Outcome {
                    code: EXIT_PARSE,
                    stdout: String::new(),
                    stderr: text,
                },
            };
        }
    };
    match execute(&cli, dim_cap) {
        Ok(stdout) => Outcome {
            code: EXIT_OK,
            stdout,
            stderr: String::new(),
        },
        Err(e) => Outcome {
            code: e.exit_code(),
            stdout: String::new(),
            stderr: format!("error: {e}\n"),
        },
    }
}

fn parse_cap(raw: Option<&str>) -> CliResult<usize> {
    match raw {
        None => Ok(DEFAULT_DIM_CAP),
        Some(s) => match s.trim().parse::<usize>() {
            Ok(v) if v >= 1 => Ok(v),
            _ => Err(input_err(format!("{DIM_CAP_ENV} must be a positive integer, got {s:?}"))),
        },
    }
}

fn execute(cli: &Cli, dim_cap: Option<&str>) -> CliResult<String> {
    if !(cli.tol > 0.0) {
        return Err(input_err(format!("--tol must be positive, got {}", cli.tol)));
    }
    let cap = parse_cap(dim_cap)?;
    let mut inputs = Inputs::default();
    let mut record = match &cli.command {
        Command::Gen { spec } => {
            let value = generate(spec)?;
            let mut s = serde_json::to_string_pretty(&value).expect("json value");
            s.push('\n');
            return Ok(s);
        }
        Command::Entropy(a) => cmd_entropy(a, cli.tol, &mut inputs)?,
        Command::Ergotropy(a) => cmd_ergotropy(a, cli.tol, &mut inputs)?,
        Command::Qce(a) => cmd_qce(a, cli.tol, &mut inputs)?,
        Command::Protocol(a) => cmd_protocol(a, cli.tol, cap, &mut inputs)?,
    };
    record.inputs_digest = inputs.digest();
    if cli.bits {
        record.to_bits();
    }
    Ok(record.to_json())
}

#[derive(Default)]
struct Inputs {
    hasher: Sha256,
}

impl Inputs {
    /// Reads a file or expands a `gen:` spec, feeding the raw bytes to the digest.
    fn load(&mut self, role: &str, arg: &str) -> CliResult<Value> {
        let (bytes, value) = match arg.strip_prefix("gen:") {
            Some(spec) => (arg.as_bytes().to_vec(), generate(spec)?),
            None => {
                let bytes = std::fs::read(PathBuf::from(arg))
                    .map_err(|e| input_err(format!("cannot read {role} file {arg:?}: {e}")))?;
                let value = serde_json::from_slice(&bytes)
                    .map_err(|e| input_err(format!("{role} file {arg:?} is not valid JSON: {e}")))?;
                (bytes, value)
            }
        };
        self.hasher.update(role.as_bytes());
        self.hasher.update([0u8]);
        self.hasher.update((bytes.len() as u64).to_le_bytes());
        self.hasher.update(&bytes);
        Ok(value)
    }

    fn digest(self) -> String {
        hex::encode(self.hasher.finalize())
    }
}

fn parse_complex(v: &Value) -> CliResult<crate::qstate::C64> {
    match v {
        Value::Number(n) => Ok(c(n.as_f64().unwrap_or(f64::NAN), 0.0)),
        Value::Array(pair) if pair.len() == 2 => {
            let re = pair[0].as_f64();
            let im = pair[1].as_f64();
            match (re, im) {
                (Some(re), Some(im)) => Ok(c(re, im)),
                _ => Err(input_err(format!("complex entry must be [re, im] numbers, got {v}"))),
            }
        }
        _ => Err(input_err(format!("complex entry must be [re, im], got {v}"))),
    }
}

fn parse_vector(v: &Value) -> CliResult<CVector> {
    let items = v
        .as_array()
        .ok_or_else(|| input_err("vector data must be a list of [re, im] pairs"))?;
    let entries = items.iter().map(parse_complex).collect::<CliResult<Vec<_>>>()?;
    Ok(CVector::from_vec(entries))
}

fn parse_matrix(v: &Value) -> CliResult<CMatrix> {
    let rows = v
        .as_array()
        .ok_or_else(|| input_err("matrix data must be a list of rows"))?;
    if rows.is_empty() {
        return Err(input_err("matrix data is empty"));
    }
    let parsed = rows
        .iter()
        .map(|r| {
            r.as_array()
                .ok_or_else(|| input_err("matrix row must be a list of [re, im] pairs"))?
                .iter()
                .map(parse_complex)
                .collect::<CliResult<Vec<_>>>()
        })
        .collect::<CliResult<Vec<_>>>()?;
    let ncols = parsed[0].len();
    if parsed.iter().any(|r| r.len() != ncols) {
        return Err(input_err("matrix rows have different lengths"));
    }
    Ok(CMatrix::from_fn(parsed.len(), ncols, |i, j| parsed[i][j]))
}

fn kind_of(v: &Value) -> CliResult<&str> {
    v.get("kind")
        .and_then(Value::as_str)
        .ok_or_else(|| input_err("input file needs a string field \"kind\""))
}

fn field<'a>(v: &'a Value, name: &str) -> CliResult<&'a Value> {
    v.get(name)
        .ok_or_else(|| input_err(format!("input file needs a field {name:?}")))
}

fn parse_dims(v: &Value) -> CliResult<Option<Bipartition>> {
    match v.get("dims") {
        None | Some(Value::Null) => Ok(None),
        Some(Value::Array(d)) if d.len() == 2 => {
            let a = d[0].as_u64();
            let b = d[1].as_u64();
            match (a, b) {
                (Some(a), Some(b)) => Ok(Some(Bipartition::new(a as usize, b as usize))),
                _ => Err(input_err("dims must be two positive integers")),
            }
        }
        Some(_) => Err(input_err("dims must be [d_A, d_B]")),
    }
}

/// A parsed state file; pure inputs keep their vector.
struct StateInput {
    density: DensityMatrix,
    pure: Option<PureState>,
}

fn parse_state(v: &Value, tol: f64) -> CliResult<StateInput> {
    let dims = parse_dims(v)?;
    let data = field(v, "data")?;
    match kind_of(v)? {
        "pure" => {
            let mut psi = PureState::new(parse_vector(data)?, tol)?;
            if let Some(d) = dims {
                psi = psi.with_dims(d)?;
            }
            Ok(StateInput {
                density: psi.density(),
                pure: Some(psi),
            })
        }
        "density" => {
            let mut rho = DensityMatrix::new(parse_matrix(data)?, tol)?;
            if let Some(d) = dims {
                rho = rho.with_dims(d)?;
            }
            Ok(StateInput {
                density: rho,
                pure: None,
            })
        }
        other => Err(input_err(format!(
            "state file kind must be \"pure\" or \"density\", got {other:?}"
        ))),
    }
}

fn parse_hamiltonian(v: &Value) -> CliResult<Hamiltonian> {
    match kind_of(v)? {
        "hamiltonian" => Ok(Hamiltonian::new(parse_matrix(field(v, "data")?)?)?),
        other => Err(input_err(format!(
            "Hamiltonian file kind must be \"hamiltonian\", got {other:?}"
        ))),
    }
}

fn parse_measurement(v: &Value) -> CliResult<Measurement> {
    let m = match kind_of(v)? {
        "basis" => Measurement::from_basis(parse_matrix(field(v, "data")?)?)?,
        "pvm" => {
            let list = field(v, "projectors")?
                .as_array()
                .ok_or_else(|| input_err("projectors must be a list of matrices"))?;
            let projectors = list.iter().map(parse_matrix).collect::<CliResult<Vec<_>>>()?;
            let m = Measurement::from_projectors(projectors)?;
            if let Some(vols) = v.get("volumes") {
                let given: Vec<u64> = serde_json::from_value(vols.clone())
                    .map_err(|_| input_err("volumes must be a list of positive integers"))?;
                let actual: Vec<u64> = m.volumes().iter().map(|&x| x as u64).collect();
                if given != actual {
                    return Err(input_err(format!(
                        "declared volumes {given:?} differ from projector ranks {actual:?}"
                    )));
                }
            }
            m
        }
        other => Err(input_err(format!(
            "measurement file kind must be \"basis\" or \"pvm\", got {other:?}"
        )))?,
    };
    match v.get("labels") {
        None | Some(Value::Null) => Ok(m),
        Some(l) => {
            let labels: Vec<String> = serde_json::from_value(l.clone())
                .map_err(|_| input_err("labels must be a list of strings"))?;
            Ok(m.with_labels(labels)?)
        }
    }
}

fn json_text(role: &str, text: &str) -> CliResult<Value> {
    match text.trim_start().strip_prefix("gen:") {
        Some(spec) => generate(spec),
        None => serde_json::from_str(text).map_err(|e| input_err(format!("{role} is not valid JSON: {e}"))),
    }
}

/// Parses a state document (or a `gen:` spec). The pure vector is kept when given.
pub fn load_state(text: &str, tol: f64) -> CliResult<(DensityMatrix, Option<PureState>)> {
    let s = parse_state(&json_text("state", text)?, tol)?;
    Ok((s.density, s.pure))
}

pub fn load_hamiltonian(text: &str) -> CliResult<Hamiltonian> {
    parse_hamiltonian(&json_text("Hamiltonian", text)?)
}

pub fn load_measurement(text: &str) -> CliResult<Measurement> {
    parse_measurement(&json_text("measurement", text)?)
}

fn matrix_json(m: &CMatrix) -> Value {
    Value::Array(
        (0..m.nrows())
            .map(|i| {
                Value::Array(
                    (0..m.ncols())
                        .map(|j| json!([m[(i, j)].re, m[(i, j)].im]))
                        .collect(),
                )
            })
            .collect(),
    )
}

fn vector_json(v: &CVector) -> Value {
    Value::Array(v.iter().map(|z| json!([z.re, z.im])).collect())
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> CliResult<Vec<T>> {
    s.split(',')
        .map(|x| {
            x.trim()
                .parse::<T>()
                .map_err(|_| input_err(format!("bad {what} {x:?}")))
        })
        .collect()
}

/// `d` or `dA,dB`.
fn parse_dim_spec(s: &str) -> CliResult<(usize, Option<Bipartition>)> {
    let parts: Vec<usize> = parse_list(s, "dimension")?;
    match parts.as_slice() {
        [d] if *d >= 1 => Ok((*d, None)),
        [a, b] if *a >= 1 && *b >= 1 => Ok((a * b, Some(Bipartition::new(*a, *b)))),
        _ => Err(input_err(format!("dimension spec must be d or dA,dB, got {s:?}"))),
    }
}

fn dims_json(dims: Option<Bipartition>) -> Value {
    match dims {
        Some(d) => json!([d.dim_a, d.dim_b]),
        None => Value::Null,
    }
}

/// Expands a generator spec into the JSON of the corresponding input file.
///
/// States: `bell`, `werner:p`, `haar-pure:dA,dB:seed`, `maximally-mixed:d`
/// or `maximally-mixed:dA,dB`, `basis:d:k` or `basis:dA,dB:k`.
/// Hamiltonians: `ham-diag:e0,e1,..`, `ham-local:e0,e1,..` (two copies of
/// the diagonal term). Measurements: `computational:d` or `computational:dA,dB`.
pub fn generate(spec: &str) -> CliResult<Value> {
    let (name, rest) = spec.split_once(':').unwrap_or((spec, ""));
    let s = std::f64::consts::FRAC_1_SQRT_2;
    match name {
        "bell" if rest.is_empty() => Ok(json!({
            "kind": "pure",
            "dims": [2, 2],
            "data": [[s, 0.0], [0.0, 0.0], [0.0, 0.0], [s, 0.0]],
        })),
        "werner" => {
            let p: f64 = rest
                .parse()
                .map_err(|_| input_err(format!("werner needs a weight p, got {rest:?}")))?;
            if !(0.0..=1.0).contains(&p) {
                return Err(input_err(format!("werner weight must lie in [0, 1], got {p}")));
            }
            let singlet = CVector::from_vec(vec![c(0.0, 0.0), c(s, 0.0), c(-s, 0.0), c(0.0, 0.0)]);
            let m = (&singlet * singlet.adjoint()).scale(p)
                + CMatrix::identity(4, 4).scale((1.0 - p) / 4.0);
            Ok(json!({"kind": "density", "dims": [2, 2], "data": matrix_json(&m)}))
        }
        "haar-pure" => {
            let (dims, seed) = rest
                .split_once(':')
                .ok_or_else(|| input_err("haar-pure spec is haar-pure:dA,dB:seed"))?;
            let (d, bip) = parse_dim_spec(dims)?;
            let seed: u64 = seed
                .parse()
                .map_err(|_| input_err(format!("bad seed {seed:?}")))?;
            let mut rng = stream(seed, Stage::Generate, 0);
            let u = haar_random_unitary(d, &mut rng);
            let psi = u.column(0).into_owned();
            Ok(json!({"kind": "pure", "dims": dims_json(bip), "data": vector_json(&psi)}))
        }
        "maximally-mixed" => {
            let (d, bip) = parse_dim_spec(rest)?;
            let m = CMatrix::identity(d, d).scale(1.0 / d as f64);
            Ok(json!({"kind": "density", "dims": dims_json(bip), "data": matrix_json(&m)}))
        }
        "basis" => {
            let (dims, k) = rest
                .split_once(':')
                .ok_or_else(|| input_err("basis spec is basis:d:k"))?;
            let (d, bip) = parse_dim_spec(dims)?;
            let k: usize = k.parse().map_err(|_| input_err(format!("bad index {k:?}")))?;
            if k >= d {
                return Err(input_err(format!("basis index {k} out of range for dimension {d}")));
            }
            let psi = PureState::basis_state(d, k);
            Ok(json!({"kind": "pure", "dims": dims_json(bip), "data": vector_json(psi.amplitudes())}))
        }
        "ham-diag" | "ham-local" => {
            let e: Vec<f64> = parse_list(rest, "energy")?;
            let h = Hamiltonian::diagonal(&e)?;
            let h = if name == "ham-local" {
                Hamiltonian::local_terms(&h, &h)
            } else {
                h
            };
            Ok(json!({"kind": "hamiltonian", "data": matrix_json(h.matrix())}))
        }
        "computational" => {
            let (d, _) = parse_dim_spec(rest)?;
            Ok(json!({"kind": "basis", "data": matrix_json(&CMatrix::identity(d, d))}))
        }
        _ => Err(input_err(format!("unknown generator {spec:?}"))),
    }
}

fn cmd_entropy(a: &EntropyArgs, tol: f64, inputs: &mut Inputs) -> CliResult<ResultRecord> {
    let mut r = ResultRecord::new("entropy");
    r.arg("state", &a.state);
    let state = parse_state(&inputs.load("state", &a.state)?, tol)?;
    r.scalar("s_vn", von_neumann_entropy(&state.density));
    if let Some(m) = &a.measurement {
        r.arg("measurement", m);
        let meas = parse_measurement(&inputs.load("measurement", m)?)?;
        r.scalar("s_obs", observational_entropy(&state.density, &meas)?);
    }
    if a.schmidt {
        r.arg("schmidt", true);
        let psi = match state.pure {
            Some(psi) => psi,
            None => {
                return Err(input_err(
                    "--schmidt needs a pure state file (kind \"pure\")",
                ))
            }
        };
        r.scalar("s_ent", entanglement_entropy(&psi)?);
        let d = schmidt(&psi)?;
        r.arrays.insert(
            "schmidt_coefficients".into(),
            d.coefficients.iter().map(|&x| Real(x)).collect(),
        );
    }
    Ok(r)
}

fn optimizer_config(o: &OptimizerArgs) -> OptimizerConfig {
    OptimizerConfig {
        restarts: o.restarts,
        max_sweeps: o.max_sweeps,
        seed: o.seed,
        strategy: o.strategy,
        ..OptimizerConfig::default()
    }
}

fn echo_optimizer(r: &mut ResultRecord, o: &OptimizerArgs) {
    r.arg("restarts", o.restarts);
    r.arg("max_sweeps", o.max_sweeps);
    r.arg("strategy", o.strategy);
    r.seed = Some(o.seed);
}

/// Local optimization plus, with a Hamiltonian, work at the optimum.
fn local_optimum(
    r: &mut ResultRecord,
    state: &DensityMatrix,
    h: Option<&Hamiltonian>,
    o: &OptimizerArgs,
) -> CliResult<()> {
    if let Some(h) = h {
        if h.dim() != state.dim() {
            return Err(Error::DimensionMismatch {
                expected: h.dim(),
                found: state.dim(),
            }
            .into());
        }
    }
    let q = quantum_correlation_entropy(state, &optimizer_config(o))?;
    r.scalar("s_min", q.s_min);
    r.scalar("s_qc", q.s_qc);
    r.scalar("s_vn", q.s_vn);
    r.scalar("restarts_agreeing", q.optimizer.restarts_agreeing as f64);
    r.flags.insert("converged".into(), q.optimizer.converged);
    r.arrays.insert(
        "history".into(),
        q.optimizer.history.iter().map(|&x| Real(x)).collect(),
    );
    if let Some(h) = h {
        let w = ergotropy_at_entropy(state, h, q.s_min)?;
        put_work(r, &w);
    }
    Ok(())
}

fn put_work(r: &mut ResultRecord, w: &crate::thermo::ObservationalErgotropy) {
    r.scalar("work", w.work);
    r.scalar("beta", w.beta);
    r.scalar("s_obs", w.s_obs);
    r.scalar("e_initial", w.e_initial);
    r.scalar("e_final", w.e_final);
    r.flags.insert("poorly_matched".into(), w.poorly_matched());
}

fn cmd_ergotropy(a: &ErgotropyArgs, tol: f64, inputs: &mut Inputs) -> CliResult<ResultRecord> {
    let mut r = ResultRecord::new("ergotropy");
    r.arg("state", &a.state);
    r.arg("ham", &a.ham);
    let state = parse_state(&inputs.load("state", &a.state)?, tol)?.density;
    let h = parse_hamiltonian(&inputs.load("ham", &a.ham)?)?;
    r.scalar("ergotropy", ergotropy(&state, &h)?);
    if let Some(m) = &a.measurement {
        r.arg("measurement", m);
        let meas = parse_measurement(&inputs.load("measurement", m)?)?;
        let w = observational_ergotropy(&state, &h, &meas)?;
        put_work(&mut r, &w);
    } else if a.optimize_local {
        r.arg("optimize_local", true);
        echo_optimizer(&mut r, &a.optimizer);
        local_optimum(&mut r, &state, Some(&h), &a.optimizer)?;
    }
    Ok(r)
}

fn cmd_qce(a: &QceArgs, tol: f64, inputs: &mut Inputs) -> CliResult<ResultRecord> {
    let mut r = ResultRecord::new("qce");
    r.arg("state", &a.state);
    let state = parse_state(&inputs.load("state", &a.state)?, tol)?.density;
    let h = match &a.ham {
        Some(path) => {
            r.arg("ham", path);
            Some(parse_hamiltonian(&inputs.load("ham", path)?)?)
        }
        None => None,
    };
    echo_optimizer(&mut r, &a.optimizer);
    if let Some(h) = &h {
        r.scalar("ergotropy", ergotropy(&state, h)?);
    }
    local_optimum(&mut r, &state, h.as_ref(), &a.optimizer)?;
    Ok(r)
}

fn cmd_protocol(a: &ProtocolArgs, tol: f64, cap: usize, inputs: &mut Inputs) -> CliResult<ResultRecord> {
    let mut r = ResultRecord::new("protocol");
    r.arg("state", &a.state);
    r.arg("ham", &a.ham);
    r.arg("measurement", &a.measurement);
    r.arg("copies", a.copies);
    r.arg("trials", a.trials);
    r.arg("dim_cap", cap);
    r.seed = Some(a.seed);
    let state = parse_state(&inputs.load("state", &a.state)?, tol)?.density;
    let h = parse_hamiltonian(&inputs.load("ham", &a.ham)?)?;
    let meas = parse_measurement(&inputs.load("measurement", &a.measurement)?)?;
    let certification = match a.cert_samples {
        Some(n) => Certification::Samples(n),
        None => Certification::Exact,
    };
    r.arg("certification", certification);

    let config = ProtocolConfig {
        copies: a.copies,
        trials: a.trials,
        seed: a.seed,
        certification,
        measurement: meas.clone(),
        dim_cap: cap,
    };
    let ex = Extraction::new(&state, &h, &config)?;
    let w = ex.run();
    r.scalar("mean", w.mean);
    r.scalar("std_error", w.std_error);
    r.scalar("exact_mean", w.exact_mean);
    r.scalar("exact_mean_per_copy", w.exact_mean / w.copies as f64);
    r.scalar("initial_energy", w.initial_energy);
    if let Some(est) = w.initial_energy_estimate {
        r.scalar("initial_energy_estimate", est);
    }
    r.scalar("min", w.samples.iter().copied().fold(f64::INFINITY, f64::min));
    r.scalar("max", w.samples.iter().copied().fold(f64::NEG_INFINITY, f64::max));
    r.arrays.insert("certified".into(), w.certified.iter().map(|&x| Real(x)).collect());
    if a.emit_samples {
        r.arrays.insert("samples".into(), w.samples.iter().map(|&x| Real(x)).collect());
    }

    if let Some(n_max) = a.converge {
        r.arg("converge", n_max);
        let report = convergence_study(&state, &h, &meas, n_max, certification, a.seed, cap)?;
        r.scalar("w_inf", report.w_inf);
        r.scalar("beta", report.beta);
        r.scalar("s_obs", report.s_obs);
        let rows = report
            .rows
            .iter()
            .map(|row| {
                Row::from([
                    ("N".to_string(), Real(row.copies as f64)),
                    ("work_per_copy".to_string(), Real(row.work_per_copy)),
                    ("gap".to_string(), Real(row.gap)),
                ])
            })
            .collect();
        r.tables.insert("convergence".into(), rows);
    }
    if a.cooling {
        r.arg("cooling", true);
        let rows = (1..=a.copies)
            .map(|n| {
                let c = cooling_diagnostic(ex.certified(), &h, n, cap)?;
                Ok(Row::from([
                    ("N".to_string(), Real(n as f64)),
                    ("trace_distance".to_string(), Real(c.trace_distance)),
                    ("beta".to_string(), Real(c.beta)),
                ]))
            })
            .collect::<CliResult<Vec<_>>>()?;
        r.tables.insert("cooling".into(), rows);
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_ok(args: &[&str]) -> ResultRecord {
        let mut full = vec!["ergolab"];
        full.extend_from_slice(args);
        let out = run(full, None);
        assert_eq!(out.code, 0, "{}", out.stderr);
        serde_json::from_str(&out.stdout).unwrap()
    }

    fn code(args: &[&str], cap: Option<&str>) -> i32 {
        let mut full = vec!["ergolab"];
        full.extend_from_slice(args);
        run(full, cap).code
    }

    #[test]
    fn entropy_examples() {
        let ln2 = 2f64.ln();
        let r = run_ok(&["entropy", "--state", "gen:bell", "--schmidt"]);
        assert!((r.scalars["s_ent"].0 - ln2).abs() < 1e-12);
        assert!((r.scalars["s_ent"].0 - 0.693_147_2).abs() < 1e-7);
        let r = run_ok(&["entropy", "--state", "gen:maximally-mixed:2"]);
        assert!((r.scalars["s_vn"].0 - ln2).abs() < 1e-12);
        let r = run_ok(&["entropy", "--state", "gen:bell", "--measurement", "gen:computational:4"]);
        assert!((r.scalars["s_obs"].0 - ln2).abs() < 1e-12);
        let r = run_ok(&["--bits", "entropy", "--state", "gen:bell", "--schmidt"]);
        assert!((r.scalars["s_ent"].0 - 1.0).abs() < 1e-12);
        assert_eq!(r.unit, "bits");
    }

    #[test]
    fn ergotropy_examples() {
        let r = run_ok(&[
            "ergotropy", "--state", "gen:bell", "--ham", "gen:ham-local:0,1", "--optimize-local",
        ]);
        assert!((r.scalars["work"].0 - 0.7800).abs() < 1e-3);
        assert!((r.scalars["beta"].0 - 2.0907).abs() < 1e-3);
        let r = run_ok(&[
            "ergotropy", "--state", "gen:maximally-mixed:3", "--ham", "gen:ham-diag:0,1,2",
            "--measurement", "gen:computational:3",
        ]);
        assert_eq!(r.scalars["work"].0, 0.0);
        let r = run_ok(&[
            "ergotropy", "--state", "gen:basis:3:0", "--ham", "gen:ham-diag:0,1,2",
            "--measurement", "gen:computational:3",
        ]);
        assert_eq!(r.scalars["work"].0, 0.0);
        assert_eq!(r.scalars["beta"].0, f64::INFINITY);
    }

    #[test]
    fn protocol_ground_state() {
        let r = run_ok(&[
            "protocol", "--state", "gen:basis:2:0", "--ham", "gen:ham-diag:0,1",
            "--measurement", "gen:computational:2", "--copies", "2", "--trials", "5", "--seed", "1",
        ]);
        assert_eq!(r.scalars["mean"].0, 0.0);
        assert_eq!(r.scalars["std_error"].0, 0.0);
    }

    #[test]
    fn exit_codes() {
        assert_eq!(code(&["entropy"], None), EXIT_PARSE);
        assert_eq!(code(&["entropy", "--state", "gen:nope"], None), EXIT_PARSE);
        assert_eq!(code(&["entropy", "--state", "/nonexistent.json"], None), EXIT_PARSE);
        assert_eq!(
            code(&["entropy", "--state", "gen:bell", "--measurement", "gen:computational:3"], None),
            EXIT_DIMENSION
        );
        assert_eq!(
            code(&["ergotropy", "--state", "gen:bell", "--ham", "gen:ham-diag:1,1,1,1", "--measurement", "gen:computational:4"], None),
            EXIT_ENTROPY_RANGE
        );
        let protocol = [
            "protocol", "--state", "gen:maximally-mixed:2", "--ham", "gen:ham-diag:0,1",
            "--measurement", "gen:computational:2", "--copies", "9", "--trials", "1", "--seed", "0",
        ];
        assert_eq!(code(&protocol, Some("256")), EXIT_DIM_CAP);
        assert_eq!(code(&protocol, Some("512")), EXIT_OK);
        assert_eq!(code(&protocol, Some("zero")), EXIT_PARSE);
    }

    #[test]
    fn record_round_trips() {
        let out = run(
            ["ergolab", "qce", "--state", "gen:werner:0.3", "--restarts", "3"],
            None,
        );
        assert_eq!(out.code, 0);
        let parsed: ResultRecord = serde_json::from_str(&out.stdout).unwrap();
        assert_eq!(parsed.to_json(), out.stdout);
        let mut r = ResultRecord::new("x");
        r.scalar("inf", f64::INFINITY);
        r.scalar("ninf", f64::NEG_INFINITY);
        r.scalar("tiny", 5e-324);
        r.scalar("third", 1.0 / 3.0);
        let back: ResultRecord = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(back, r);
        assert_eq!(back.scalars["third"].0.to_bits(), (1.0f64 / 3.0).to_bits());
    }
}
