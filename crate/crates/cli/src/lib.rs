//! Command-line front end: key generation, encryption, netlist evaluation,
//! benchmarking and the analysis studies.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use lifted_tfhe::analysis::{self, ReportRow, SCHEMA_VERSION};
use lifted_tfhe::bootstrap::{decrypt_bit, encrypt_bit, eval_gate_with, generate_cloud_keys, CloudKeySet, GateKind, RotationMode};
use lifted_tfhe::codec;
use lifted_tfhe::keys::{sample_secret_keys, SecretKeys};
use lifted_tfhe::netlist::{format_bits, parse_bits, Netlist};
use lifted_tfhe::params::{DEFAULT_PRESET, MAX_UNROLL};
use lifted_tfhe::rng::{streams, DetRng};
use lifted_tfhe::transform::{Backend, TransformCounters};
use lifted_tfhe::ParameterSet;

pub const PRESET_ENV: &str = "LIFTED_TFHE_PRESET";
pub const SECRET_KEY_FILE: &str = "secret.key";
pub const CLOUD_KEY_FILE: &str = "cloud.key";

#[derive(Debug, Parser)]
#[command(name = "lifted-tfhe", version, about = "TFHE gate bootstrapping with unrolled blind rotation")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Parameter preset file; falls back to $LIFTED_TFHE_PRESET, then the built-in default.
    #[arg(long, global = true)]
    pub preset: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = BackendKind::Approximate)]
    pub backend: BackendKind,
    /// Twiddle bitwidth of the approximate transform; defaults to the preset's.
    #[arg(long, global = true, value_parser = clap::value_parser!(u32).range(2..=64))]
    pub beta: Option<u32>,
    /// Worker threads; defaults to all cores.
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..=1024))]
    pub threads: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BackendKind {
    Reference,
    Approximate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeKind {
    Sequential,
    Pipelined,
}

impl From<ModeKind> for RotationMode {
    fn from(m: ModeKind) -> RotationMode {
        match m {
            ModeKind::Sequential => RotationMode::Sequential,
            ModeKind::Pipelined => RotationMode::Pipelined,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

fn unroll(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(m) if (1..=MAX_UNROLL).contains(&m) => Ok(m),
        _ => Err(format!("unroll factor must be an integer in [1, {MAX_UNROLL}]")),
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a secret key and a cloud key into a directory.
    Keygen {
        #[arg(long, value_parser = unroll)]
        m: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Encrypt a bits file under the secret key.
    Encrypt {
        #[arg(long)]
        keys: PathBuf,
        #[arg(long)]
        inputs: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Decrypt a ciphertext file into rows of `width` bits.
    Decrypt {
        #[arg(long)]
        keys: PathBuf,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        width: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate a netlist over encrypted inputs.
    Eval(EvalArgs),
    /// Time gate bootstrapping at several unroll factors.
    Bench {
        #[arg(long = "m", value_parser = unroll, value_delimiter = ',', default_values_t = [1usize, 2, 3, 4])]
        m_values: Vec<usize>,
        /// Gates timed per unroll factor.
        #[arg(long, default_value_t = 8)]
        trials: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Transform error against twiddle bitwidth.
    ErrorStudy {
        #[arg(long, default_value_t = 8)]
        trials: usize,
        #[arg(long = "betas", value_delimiter = ',', default_values_t = analysis::DEFAULT_BETAS)]
        betas: Vec<u32>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Output noise components against the unroll factor.
    NoiseStudy {
        #[arg(long = "m", value_parser = unroll, value_delimiter = ',', default_values_t = [1usize, 2, 3, 4])]
        m_values: Vec<usize>,
        #[arg(long, default_value_t = 32)]
        trials: usize,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Count decryption failures over random NAND gates.
    Failures {
        #[arg(long, value_parser = unroll)]
        m: Option<usize>,
        #[arg(long, default_value_t = 1000)]
        trials: u64,
        /// Exit with status 4 when any trial fails.
        #[arg(long)]
        expect_zero: bool,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Pipeline model over unroll factors with calibrated stage costs.
    PipelineModel {
        #[arg(long = "m", value_parser = unroll, value_delimiter = ',', default_values_t = [1usize, 2, 3, 4, 5])]
        m_values: Vec<usize>,
        /// Timing repetitions per calibrated operation.
        #[arg(long, default_value_t = 15)]
        trials: usize,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub netlist: PathBuf,
    /// Plaintext input rows; encrypted under the secret key, outputs are decrypted.
    #[arg(long, conflicts_with = "ciphertexts", required_unless_present = "ciphertexts")]
    pub inputs: Option<PathBuf>,
    /// Encrypted inputs, row after row; outputs are written as ciphertexts.
    #[arg(long, requires_all = ["keys", "out"])]
    pub ciphertexts: Option<PathBuf>,
    /// Key directory; without it keys are generated in memory from the seed.
    #[arg(long)]
    pub keys: Option<PathBuf>,
    /// Unroll factor of in-memory keys.
    #[arg(long, value_parser = unroll, conflicts_with = "keys")]
    pub m: Option<usize>,
    #[arg(long, value_enum, default_value_t = ModeKind::Sequential)]
    pub mode: ModeKind,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Failure classes with their exit statuses.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(anyhow::Error),
    Verification(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Data(_) => 3,
            CliError::Verification(_) => 4,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Data(e) => write!(f, "error: {e:#}"),
            CliError::Verification(m) => write!(f, "verification failed: {m}"),
        }
    }
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> CliError {
        CliError::Data(e)
    }
}

impl From<lifted_tfhe::Error> for CliError {
    fn from(e: lifted_tfhe::Error) -> CliError {
        CliError::Data(e.into())
    }
}

type CliResult<T> = Result<T, CliError>;

struct RunContext {
    preset: String,
    params: ParameterSet,
    seed: u64,
    backend: BackendKind,
    beta: Option<u32>,
}

impl RunContext {
    fn new(c: &Common) -> CliResult<RunContext> {
        let path = c.preset.clone().or_else(|| std::env::var_os(PRESET_ENV).map(PathBuf::from));
        let (preset, text) = match path {
            Some(p) => (p.display().to_string(), fs::read_to_string(&p).with_context(|| format!("reading preset {}", p.display()))?),
            None => ("default".to_string(), DEFAULT_PRESET.to_string()),
        };
        let mut params = ParameterSet::parse(&text).with_context(|| format!("preset {preset}"))?;
        if let Some(b) = c.beta {
            params = params.with_beta(b).map_err(|e| CliError::Usage(e.to_string()))?;
        }
        Ok(RunContext { preset, params, seed: c.seed, backend: c.backend, beta: c.beta })
    }

    fn with_unroll(&self, m: Option<usize>) -> CliResult<ParameterSet> {
        match m {
            Some(m) => self.params.with_unroll(m).map_err(|e| CliError::Usage(e.to_string())),
            None => Ok(self.params.clone()),
        }
    }

    fn backend_for(&self, params: &ParameterSet) -> CliResult<Backend> {
        Ok(match self.backend {
            BackendKind::Reference => Backend::reference(params.ring_degree),
            BackendKind::Approximate => Backend::approximate(params.ring_degree, self.beta.unwrap_or(params.twiddle_bitwidth))?,
        })
    }

    fn envelope(&self, report: &str, params: &ParameterSet) -> serde_json::Map<String, Value> {
        let v = json!({
            "schema_version": SCHEMA_VERSION,
            "report": report,
            "seed": self.seed,
            "preset": self.preset,
            "params": params,
        });
        match v {
            Value::Object(m) => m,
            _ => unreachable!(),
        }
    }
}

fn read(path: &Path) -> anyhow::Result<Vec<u8>> {
    fs::read(path).with_context(|| format!("reading {}", path.display()))
}

fn write(path: &Path, bytes: &[u8]) -> anyhow::Result<()> {
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

fn emit(out: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(p) => write(p, text.as_bytes()),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn emit_json(out: Option<&Path>, v: serde_json::Map<String, Value>) -> anyhow::Result<()> {
    emit(out, &(serde_json::to_string_pretty(&Value::Object(v))? + "\n"))
}

fn emit_rows<R: ReportRow>(ctx: &RunContext, params: &ParameterSet, format: Format, out: Option<&Path>, rows: &[R]) -> CliResult<()> {
    let text = match format {
        Format::Csv => analysis::csv_string(ctx.seed, params, rows)?,
        Format::Json => {
            let mut v = analysis::json_report(ctx.seed, params, rows);
            v["preset"] = json!(ctx.preset);
            serde_json::to_string_pretty(&v).map_err(anyhow::Error::from)? + "\n"
        }
    };
    Ok(emit(out, &text)?)
}

pub fn load_secret(dir: &Path) -> anyhow::Result<(ParameterSet, SecretKeys)> {
    let path = dir.join(SECRET_KEY_FILE);
    codec::decode_secret_keys(&read(&path)?).with_context(|| format!("decoding {}", path.display()))
}

pub fn load_cloud(dir: &Path) -> anyhow::Result<CloudKeySet> {
    let path = dir.join(CLOUD_KEY_FILE);
    codec::decode_cloud_keys(&read(&path)?).with_context(|| format!("decoding {}", path.display()))
}

fn generate(params: &ParameterSet, seed: u64) -> lifted_tfhe::Result<(SecretKeys, CloudKeySet)> {
    let sk = sample_secret_keys(params, seed)?;
    let cloud = generate_cloud_keys(&sk, params, &mut DetRng::stream(seed, streams::CLOUD_KEYS))?;
    Ok((sk, cloud))
}

fn counters_json(c: &TransformCounters) -> Value {
    serde_json::to_value(c).expect("plain struct")
}

pub fn run(cli: Cli) -> CliResult<()> {
    if let Some(t) = cli.common.threads {
        // A second call in the same process keeps the first pool.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t as usize).build_global();
    }
    let ctx = RunContext::new(&cli.common)?;
    match cli.command {
        Command::Keygen { m, out } => keygen(&ctx, m, &out),
        Command::Encrypt { keys, inputs, out } => encrypt(&ctx, &keys, &inputs, &out),
        Command::Decrypt { keys, input, width, out } => decrypt(&keys, &input, width, out.as_deref()),
        Command::Eval(a) => eval(&ctx, &a),
        Command::Bench { m_values, trials, out } => bench(&ctx, &m_values, trials, out.as_deref()),
        Command::ErrorStudy { trials, betas, format, out } => {
            let rows = analysis::error_sweep(&betas, ctx.params.ring_degree, trials).map_err(|e| CliError::Usage(e.to_string()))?;
            emit_rows(&ctx, &ctx.params, format, out.as_deref(), &rows)
        }
        Command::NoiseStudy { m_values, trials, format, out } => {
            let rows = analysis::noise_scan(&m_values, trials, &ctx.params, ctx.seed)?;
            emit_rows(&ctx, &ctx.params, format, out.as_deref(), &rows)
        }
        Command::Failures { m, trials, expect_zero, format, out } => {
            let params = ctx.with_unroll(m)?;
            let report = analysis::run_failure_trials(trials, params.twiddle_bitwidth, params.unroll_factor, &params, ctx.seed)?;
            emit_rows(&ctx, &params, format, out.as_deref(), std::slice::from_ref(&report))?;
            if expect_zero && report.failures > 0 {
                return Err(CliError::Verification(format!("{} of {} gates decrypted wrongly", report.failures, report.trials)));
            }
            Ok(())
        }
        Command::PipelineModel { m_values, trials, format, out } => {
            let backend = ctx.backend_for(&ctx.params)?;
            let table = analysis::calibrate_op_costs(&ctx.params, &backend, ctx.seed, trials)?;
            let rows = analysis::throughput_curve(ctx.params.lwe_dimension, &m_values, &table)?;
            emit_rows(&ctx, &ctx.params, format, out.as_deref(), &rows)
        }
    }
}

fn keygen(ctx: &RunContext, m: Option<usize>, out: &Path) -> CliResult<()> {
    let params = ctx.with_unroll(m)?;
    let (sk, cloud) = generate(&params, ctx.seed)?;
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let secret = codec::encode_secret_keys(&params, &sk);
    let cloud_bytes = codec::encode_cloud_keys(&cloud);
    write(&out.join(SECRET_KEY_FILE), &secret)?;
    write(&out.join(CLOUD_KEY_FILE), &cloud_bytes)?;
    let mut r = ctx.envelope("keygen", &params);
    r.insert("secret_key_bytes".into(), json!(secret.len()));
    r.insert("cloud_key_bytes".into(), json!(cloud_bytes.len()));
    r.insert("group_count".into(), json!(cloud.bundle_set.group_count()));
    r.insert("keys_per_group".into(), json!(cloud.bundle_set.keys_per_group()));
    r.insert("tgsw_count".into(), json!(cloud.bundle_set.key_count()));
    Ok(emit_json(None, r)?)
}

fn encrypt(ctx: &RunContext, keys: &Path, inputs: &Path, out: &Path) -> CliResult<()> {
    let (params, sk) = load_secret(keys)?;
    let rows = parse_bits(&fs::read_to_string(inputs).with_context(|| format!("reading {}", inputs.display()))?)?;
    let mut rng = DetRng::stream(ctx.seed, streams::ENCRYPTION);
    let cts: Vec<_> = rows.iter().flatten().map(|&b| encrypt_bit(b, &sk.lwe, &params, &mut rng)).collect();
    write(out, &codec::encode_lwe_list(&params, &cts)?)?;
    let mut r = ctx.envelope("encrypt", &params);
    r.insert("rows".into(), json!(rows.len()));
    r.insert("ciphertexts".into(), json!(cts.len()));
    Ok(emit_json(None, r)?)
}

fn decrypt(keys: &Path, input: &Path, width: Option<usize>, out: Option<&Path>) -> CliResult<()> {
    let (params, sk) = load_secret(keys)?;
    let (found, cts) = codec::decode_lwe_list(&read(input)?)?;
    codec::require_params(&found, &params)?;
    let bits = cts.iter().map(|c| decrypt_bit(c, &sk.lwe)).collect::<lifted_tfhe::Result<Vec<u8>>>()?;
    let width = width.unwrap_or(bits.len().max(1));
    if width == 0 || bits.len() % width != 0 {
        return Err(CliError::Usage(format!("{} bits do not split into rows of {width}", bits.len())));
    }
    let rows: Vec<Vec<u8>> = bits.chunks(width).map(<[u8]>::to_vec).collect();
    Ok(emit(out, &format_bits(&rows))?)
}

fn eval(ctx: &RunContext, a: &EvalArgs) -> CliResult<()> {
    let text = fs::read_to_string(&a.netlist).with_context(|| format!("reading {}", a.netlist.display()))?;
    let netlist = Netlist::parse(&text).with_context(|| format!("netlist {}", a.netlist.display()))?;
    let width = netlist.inputs.len();
    let (sk, cloud) = match &a.keys {
        Some(dir) => {
            let cloud = load_cloud(dir)?;
            let sk = if a.inputs.is_some() {
                let (p, sk) = load_secret(dir)?;
                codec::require_params(&p, &cloud.params)?;
                Some(sk)
            } else {
                None
            };
            (sk, cloud)
        }
        None => {
            let (sk, cloud) = generate(&ctx.with_unroll(a.m)?, ctx.seed)?;
            (Some(sk), cloud)
        }
    };
    let params = cloud.params.clone();
    let backend = ctx.backend_for(&params)?;
    let start = Instant::now();
    let cloud = cloud.prepared(&backend)?;
    let prepare_seconds = start.elapsed().as_secs_f64();

    let (plain_rows, inputs) = match (&a.inputs, &a.ciphertexts) {
        (Some(path), _) => {
            let rows = parse_bits(&fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?)?;
            if let Some(r) = rows.iter().find(|r| r.len() != width) {
                return Err(anyhow!("input row has {} bits, netlist has {width} inputs", r.len()).into());
            }
            let sk = sk.as_ref().expect("secret key present with plaintext inputs");
            let mut rng = DetRng::stream(ctx.seed, streams::ENCRYPTION);
            let cts = rows.iter().flatten().map(|&b| encrypt_bit(b, &sk.lwe, &params, &mut rng)).collect();
            (Some(rows), cts)
        }
        (None, Some(path)) => {
            let (found, cts) = codec::decode_lwe_list(&read(path)?)?;
            codec::require_params(&found, &params)?;
            if width == 0 || cts.len() % width != 0 {
                return Err(anyhow!("{} ciphertexts do not split into rows of {width}", cts.len()).into());
            }
            (None, cts)
        }
        (None, None) => unreachable!("clap requires one input source"),
    };

    let start = Instant::now();
    let mut total = TransformCounters::default();
    let mut gate_counters = vec![TransformCounters::default(); netlist.gates.len()];
    let mut outputs = Vec::new();
    for row in inputs.chunks(width.max(1)) {
        let r = netlist.eval_encrypted(row, &cloud, &backend, a.mode.into())?;
        total.merge(&r.total);
        for (acc, c) in gate_counters.iter_mut().zip(&r.gate_counters) {
            acc.merge(c);
        }
        outputs.extend(r.outputs);
    }
    let eval_seconds = start.elapsed().as_secs_f64();

    let mut r = ctx.envelope("eval", &params);
    r.insert("backend".into(), json!(backend.label()));
    r.insert("gates".into(), json!(netlist.gates.len()));
    r.insert("levels".into(), json!(netlist.levels().len()));
    r.insert("rows".into(), json!(inputs.len() / width.max(1)));
    r.insert("prepare_seconds".into(), json!(prepare_seconds));
    r.insert("eval_seconds".into(), json!(eval_seconds));
    r.insert("counters".into(), counters_json(&total));
    let per_gate: Vec<Value> = netlist
        .gates
        .iter()
        .zip(&gate_counters)
        .map(|(g, c)| json!({"output": g.output, "kind": g.kind.name(), "counters": counters_json(c)}))
        .collect();
    r.insert("gate_counters".into(), Value::Array(per_gate));

    let mut mismatch = None;
    if let Some(rows) = plain_rows {
        let sk = sk.as_ref().expect("secret key present with plaintext inputs");
        let out_width = netlist.outputs.len();
        let bits = outputs.iter().map(|c| decrypt_bit(c, &sk.lwe)).collect::<lifted_tfhe::Result<Vec<u8>>>()?;
        let decrypted: Vec<Vec<u8>> = bits.chunks(out_width.max(1)).map(<[u8]>::to_vec).collect();
        let expected = rows.iter().map(|row| netlist.eval_plain(row)).collect::<lifted_tfhe::Result<Vec<_>>>()?;
        if out_width > 0 && decrypted != expected {
            mismatch = Some(decrypted.iter().zip(&expected).filter(|(d, e)| d != e).count());
        }
        r.insert("outputs".into(), json!(netlist.outputs));
        r.insert("output_bits".into(), json!(decrypted));
        r.insert("expected_bits".into(), json!(expected));
    } else {
        let out = a.out.as_deref().expect("clap requires --out with ciphertext inputs");
        write(out, &codec::encode_lwe_list(&params, &outputs)?)?;
        r.insert("ciphertexts".into(), json!(outputs.len()));
    }
    let target = if a.ciphertexts.is_some() { None } else { a.out.as_deref() };
    emit_json(target, r)?;
    match mismatch {
        Some(n) => Err(CliError::Verification(format!("{n} row(s) decrypted differently from the plaintext circuit"))),
        None => Ok(()),
    }
}

fn bench(ctx: &RunContext, m_values: &[usize], gates: u64, out: Option<&Path>) -> CliResult<()> {
    if gates == 0 {
        return Err(CliError::Usage("--trials must be positive".into()));
    }
    let mut rows = Vec::new();
    for &m in m_values {
        let params = ctx.with_unroll(Some(m))?;
        let backend = ctx.backend_for(&params)?;
        let (sk, cloud) = generate(&params, ctx.seed)?;
        let cloud = cloud.prepared(&backend)?;
        let mut rng = DetRng::stream(ctx.seed, streams::ENCRYPTION);
        let inputs: Vec<_> = (0..gates)
            .map(|_| {
                let (a, b) = (rng.bit(), rng.bit());
                (encrypt_bit(a, &sk.lwe, &params, &mut rng), encrypt_bit(b, &sk.lwe, &params, &mut rng))
            })
            .collect();
        let mut counters = TransformCounters::default();
        let start = Instant::now();
        for (a, b) in &inputs {
            eval_gate_with(GateKind::Nand, a, Some(b), &cloud, &backend, RotationMode::Sequential, &mut counters)?;
        }
        let seconds = start.elapsed().as_secs_f64();
        let k1 = (params.trlwe_dimension + 1) as u64;
        let groups = params.group_count() as u64;
        rows.push(json!({
            "unroll_factor": m,
            "gates": gates,
            "seconds": seconds,
            "gates_per_second": gates as f64 / seconds,
            "external_products_per_gate": counters.external_products as f64 / gates as f64,
            "forward_per_gate": counters.forward_count as f64 / gates as f64,
            "inverse_per_gate": counters.inverse_count as f64 / gates as f64,
            "transform_calls_per_gate": (counters.forward_count + counters.inverse_count) as f64 / gates as f64,
            "expected_transform_calls": groups * (k1 * params.gadget_length as u64 + k1),
            "counters": counters_json(&counters),
        }));
    }
    let mut r = ctx.envelope("bench", &ctx.params);
    r.insert("backend".into(), json!(ctx.backend_for(&ctx.params)?.label()));
    r.insert("rows".into(), Value::Array(rows));
    Ok(emit_json(out, r)?)
}
