//! Command-line front end.
//!
//! Exit codes: `0` success, `1` verification failure, `2` usage or I/O error.

use std::f64::consts::PI;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::analysis::{
    all_permutations, bell_product_witness, match_up_to_phase_perm, search_cluster_angles_n2,
    Verdict, MATCH_THRESHOLD,
};
use crate::bases::{computational_basis, AngleSchedule, SignConvention};
use crate::error::Error;
use crate::measurement::{OutcomeRecord, PauliLabels};
use crate::protocols::{
    dense_round_trip, teleport_exhaustive, teleport_once, DenseCodebook, DenseCodingRecord,
    TeleportRecord,
};
use crate::qcore::{StateVector, PROTOCOL_TOL};
use crate::resource::{
    build_resource, closed_form_block, cluster6_reference, cluster6_resource, reduced_last_pair,
    ResourceState,
};
use crate::verify::{self, VerifyOptions};

pub const DEFAULT_QUBIT_CAP: usize = 24;
pub const QUBIT_CAP_ENV: &str = "TELECLUSTER_QUBIT_CAP";

#[derive(Debug, Parser)]
#[command(
    name = "telecluster",
    version,
    about = "Multiqubit teleportation and dense coding over cluster-like resource states"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Teleport an n-qubit state through a 2n-qubit resource.
    Teleport(TeleportArgs),
    /// Send 2n classical bits through a 2n-qubit resource.
    Densecode(DensecodeArgs),
    /// Reduced-state purity, closed-form block, witnesses and cluster matches.
    Analyze(AnalyzeArgs),
    /// Run the full self-check suite.
    Verify(VerifyArgs),
}

/// How the resource is chosen. Exactly one source is required.
#[derive(Debug, Args, Default)]
pub struct ResourceArgs {
    /// Payload qubit count (resource has 2n qubits).
    #[arg(long)]
    pub n: Option<usize>,
    /// Schedule JSON: either one schedule used for both sides, or an
    /// object with keys "a" and "b".
    #[arg(long)]
    pub schedule: Option<PathBuf>,
    #[arg(long)]
    pub schedule_a: Option<PathBuf>,
    #[arg(long)]
    pub schedule_b: Option<PathBuf>,
    /// Comma-separated radians: every level in order, or only the last level
    /// (lower levels zero). Overrides schedule files.
    #[arg(long, allow_hyphen_values = true)]
    pub angles_a: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub angles_b: Option<String>,
    /// Computational bases on both sides (a product of Bell pairs).
    #[arg(long)]
    pub computational: bool,
    /// The six-qubit cluster configuration (n = 3); free angles drawn from --seed.
    #[arg(long)]
    pub cluster6: bool,
    /// Random schedules on both sides, drawn from --seed.
    #[arg(long)]
    pub random_schedule: bool,
    /// Use (-sin, cos) for every odd basis vector.
    #[arg(long)]
    pub uniform_signs: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum, Default, PartialEq, Eq)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Output file (stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct TeleportArgs {
    #[command(flatten)]
    pub resource: ResourceArgs,
    /// State JSON file to teleport.
    #[arg(long, conflicts_with = "random_state")]
    pub state: Option<PathBuf>,
    /// Draw a random input state per trial (the default without --state).
    #[arg(long)]
    pub random_state: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub trials: usize,
    /// Emit every measurement branch instead of one sampled outcome.
    #[arg(long)]
    pub exhaustive: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct DensecodeArgs {
    #[command(flatten)]
    pub resource: ResourceArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Every one of the 4^n messages (the default).
    #[arg(long)]
    pub all: bool,
    /// A random subset of this many distinct messages.
    #[arg(long, conflicts_with_all = ["all", "message"])]
    pub messages: Option<usize>,
    /// One message as comma-separated Pauli labels, e.g. 1,0,3.
    #[arg(long, conflicts_with = "all")]
    pub message: Option<String>,
    /// Decode the state in this file instead of running round trips.
    #[arg(long)]
    pub decode: Option<PathBuf>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub resource: ResourceArgs,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Compare the closed-form block with the reduced state over random schedules.
    #[arg(long)]
    pub closed_form: bool,
    #[arg(long, default_value_t = 100)]
    pub random_schedules: usize,
    /// Grid-search the n = 2 family for the four-qubit cluster state.
    #[arg(long)]
    pub search_cluster_n2: bool,
    /// Grid step, e.g. pi/8 or 0.25.
    #[arg(long, default_value = "pi/8")]
    pub grid: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Run only the named checks (repeatable).
    #[arg(long)]
    pub only: Vec<String>,
    #[arg(long, default_value_t = 3)]
    pub n_max: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Failure mapped to an exit code.
#[derive(Debug)]
pub enum Failure {
    /// Checks ran and at least one failed.
    Verification(String),
    /// Bad arguments, unreadable input or unwritable output.
    Usage(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Verification(_) => 1,
            Failure::Usage(_) => 2,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

/// Runs a parsed command and returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let result = match cli.command {
        Command::Teleport(a) => cmd_teleport(&a),
        Command::Densecode(a) => cmd_densecode(&a),
        Command::Analyze(a) => cmd_analyze(&a),
        Command::Verify(a) => cmd_verify(&a),
    };
    match result {
        Ok(()) => 0,
        Err(f) => {
            match &f {
                Failure::Verification(m) => eprintln!("verification failed: {m}"),
                Failure::Usage(m) => eprintln!("error: {m}"),
            }
            f.exit_code()
        }
    }
}

pub fn qubit_cap() -> CliResult<usize> {
    match std::env::var(QUBIT_CAP_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| usage(format!("{QUBIT_CAP_ENV}={v:?} is not a qubit count"))),
        Err(_) => Ok(DEFAULT_QUBIT_CAP),
    }
}

fn check_cap(joint_qubits: usize) -> CliResult<()> {
    let cap = qubit_cap()?;
    if joint_qubits > cap {
        return Err(Error::QubitCap {
            requested: joint_qubits,
            cap,
        }
        .into());
    }
    Ok(())
}

/// Parses `pi/8`, `3pi/4`, `2*pi`, `0.25` and similar.
pub fn parse_angle(expr: &str) -> CliResult<f64> {
    let bad = || usage(format!("cannot parse angle {expr:?}"));
    let s: String = expr.chars().filter(|c| !c.is_whitespace()).collect();
    let s = s.to_ascii_lowercase();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n, d.parse::<f64>().map_err(|_| bad())?),
        None => (s.as_str(), 1.0),
    };
    let value = if let Some(coef) = num.strip_suffix("pi") {
        let coef = coef.strip_suffix('*').unwrap_or(coef);
        let c = match coef {
            "" => 1.0,
            "-" => -1.0,
            c => c.parse::<f64>().map_err(|_| bad())?,
        };
        c * PI
    } else {
        num.parse::<f64>().map_err(|_| bad())?
    };
    let v = value / den;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(bad())
    }
}

fn parse_angle_list(list: &str) -> CliResult<Vec<f64>> {
    list.split(',').map(parse_angle).collect()
}

/// Inline angles: all levels flattened, or the last level alone.
fn schedule_from_inline(list: &str, n: Option<usize>) -> CliResult<AngleSchedule> {
    let angles = parse_angle_list(list)?;
    let len = angles.len();
    let flat_n = (len + 1).is_power_of_two().then(|| (len + 1).trailing_zeros() as usize);
    let last_n = len.is_power_of_two().then(|| len.trailing_zeros() as usize + 1);
    let schedule = match n {
        Some(n) if flat_n == Some(n) => AngleSchedule::from_flat(n, &angles)?,
        Some(n) if last_n == Some(n) => AngleSchedule::with_last_level(angles)?,
        Some(n) => {
            return Err(usage(format!(
                "{len} inline angles fit neither all {n} levels nor the last level"
            )))
        }
        None => match (flat_n, last_n) {
            (Some(n), _) => AngleSchedule::from_flat(n, &angles)?,
            (None, Some(_)) => AngleSchedule::with_last_level(angles)?,
            _ => return Err(usage(format!("{len} inline angles do not form a schedule"))),
        },
    };
    Ok(schedule)
}

fn read_json(path: &Path) -> CliResult<Value> {
    let text = fs::read_to_string(path)
        .map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| usage(format!("invalid JSON in {}: {e}", path.display())))
}

fn schedule_from_value(v: Value, path: &Path) -> CliResult<AngleSchedule> {
    serde_json::from_value(v).map_err(|e| usage(format!("bad schedule in {}: {e}", path.display())))
}

fn read_state(path: &Path) -> CliResult<StateVector> {
    serde_json::from_value(read_json(path)?)
        .map_err(|e| usage(format!("bad state file {}: {e}", path.display())))
}

/// Builds the resource selected by `args`; `seed` feeds the random choices.
pub fn resolve_resource(args: &ResourceArgs, seed: u64) -> CliResult<ResourceState> {
    let file_or_inline = args.schedule.is_some()
        || args.schedule_a.is_some()
        || args.schedule_b.is_some()
        || args.angles_a.is_some()
        || args.angles_b.is_some();
    let sources = [args.computational, args.cluster6, args.random_schedule, file_or_inline]
        .iter()
        .filter(|&&b| b)
        .count();
    if sources == 0 {
        return Err(usage(
            "no resource given: use --computational, --cluster6, --random-schedule, --schedule* or --angles-*",
        ));
    }
    if sources > 1 {
        return Err(usage("choose exactly one resource source"));
    }
    let convention = if args.uniform_signs {
        SignConvention::Uniform
    } else {
        SignConvention::Faithful
    };
    if let Some(n) = args.n {
        if n == 0 {
            return Err(usage("--n must be at least 1"));
        }
        check_cap(2 * n)?;
    }

    if args.computational {
        let n = args.n.ok_or_else(|| usage("--computational needs --n"))?;
        return Ok(build_resource(computational_basis(n), computational_basis(n))?);
    }
    if args.cluster6 {
        if args.n.is_some_and(|n| n != 3) {
            return Err(usage("--cluster6 is the n = 3 configuration"));
        }
        if args.uniform_signs {
            return Err(usage("--cluster6 uses the faithful sign convention"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let t: [f64; 3] = std::array::from_fn(|_| rng.random_range(0.0..=std::f64::consts::FRAC_PI_2));
        return Ok(cluster6_resource(t[0], t[1], t[2]));
    }
    if args.random_schedule {
        let n = args.n.ok_or_else(|| usage("--random-schedule needs --n"))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = AngleSchedule::random(n, &mut rng);
        let b = AngleSchedule::random(n, &mut rng);
        return Ok(ResourceState::from_schedules(&a, &b, convention)?);
    }

    let mut a: Option<AngleSchedule> = None;
    let mut b: Option<AngleSchedule> = None;
    if let Some(path) = &args.schedule {
        let v = read_json(path)?;
        match (v.get("a"), v.get("b")) {
            (Some(va), Some(vb)) => {
                a = Some(schedule_from_value(va.clone(), path)?);
                b = Some(schedule_from_value(vb.clone(), path)?);
            }
            _ => {
                let s = schedule_from_value(v, path)?;
                a = Some(s.clone());
                b = Some(s);
            }
        }
    }
    if let Some(path) = &args.schedule_a {
        a = Some(schedule_from_value(read_json(path)?, path)?);
    }
    if let Some(path) = &args.schedule_b {
        b = Some(schedule_from_value(read_json(path)?, path)?);
    }
    if let Some(list) = &args.angles_a {
        a = Some(schedule_from_inline(list, args.n)?);
    }
    if let Some(list) = &args.angles_b {
        b = Some(schedule_from_inline(list, args.n)?);
    }
    let (a, b) = match (a, b) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(usage("both the A-side and the B-side schedule are needed")),
    };
    if a.n() != b.n() {
        return Err(usage(format!("A schedule has n = {}, B schedule n = {}", a.n(), b.n())));
    }
    if let Some(n) = args.n {
        if a.n() != n {
            return Err(usage(format!("--n {n} but the schedules have n = {}", a.n())));
        }
    }
    check_cap(2 * a.n())?;
    Ok(ResourceState::from_schedules(&a, &b, convention)?)
}

fn write_output(path: Option<&Path>, bytes: &[u8]) -> CliResult<()> {
    match path {
        Some(p) => fs::write(p, bytes).map_err(|e| usage(format!("cannot write {}: {e}", p.display()))),
        None => std::io::stdout()
            .write_all(bytes)
            .map_err(|e| usage(format!("cannot write to stdout: {e}"))),
    }
}

fn json_bytes<T: Serialize>(value: &T) -> CliResult<Vec<u8>> {
    let mut out = serde_json::to_vec_pretty(value).map_err(|e| usage(e.to_string()))?;
    out.push(b'\n');
    Ok(out)
}

fn csv_bytes<R: Serialize>(rows: &[R]) -> CliResult<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row).map_err(|e| usage(e.to_string()))?;
    }
    w.into_inner().map_err(|e| usage(e.to_string()))
}

#[derive(Serialize)]
struct TeleportRow<'a> {
    trial: usize,
    #[serde(flatten)]
    record: &'a TeleportRecord,
}

/// Fixed CSV columns for teleportation reports.
#[derive(Serialize)]
struct TeleportCsvRow {
    trial: usize,
    outcome_bits: String,
    outcome_labels: String,
    probability: f64,
    correction_bits: String,
    fidelity: f64,
}

pub fn cmd_teleport(args: &TeleportArgs) -> CliResult<()> {
    if args.trials == 0 {
        return Err(usage("--trials must be at least 1"));
    }
    let r = resolve_resource(&args.resource, args.seed)?;
    let n = r.n();
    check_cap(3 * n)?;
    let fixed = args.state.as_deref().map(read_state).transpose()?;
    if let Some(s) = &fixed {
        if s.num_qubits() != n {
            return Err(usage(format!("state has {} qubits, resource expects {n}", s.num_qubits())));
        }
    }
    let mut rows: Vec<(usize, TeleportRecord)> = Vec::new();
    for trial in 0..args.trials {
        let trial_seed = args.seed.wrapping_add(trial as u64);
        let phi = match &fixed {
            Some(s) => s.clone(),
            None => StateVector::random(n, &mut ChaCha8Rng::seed_from_u64(trial_seed)),
        };
        if args.exhaustive {
            rows.extend(teleport_exhaustive(&phi, &r)?.into_iter().map(|rec| (trial, rec)));
        } else {
            rows.push((trial, teleport_once(&phi, &r, trial_seed)?));
        }
    }
    let target = 1.0 / (1u64 << (2 * n)) as f64;
    let min_fidelity = rows.iter().map(|(_, r)| r.fidelity).fold(1.0, f64::min);
    let max_dev = rows
        .iter()
        .map(|(_, r)| (r.probability - target).abs())
        .fold(0.0, f64::max);

    let bytes = match args.output.format {
        Format::Json => json_bytes(
            &rows
                .iter()
                .map(|(trial, record)| TeleportRow { trial: *trial, record })
                .collect::<Vec<_>>(),
        )?,
        Format::Csv => csv_bytes(
            &rows
                .iter()
                .map(|(trial, rec)| TeleportCsvRow {
                    trial: *trial,
                    outcome_bits: rec.outcome.bits(),
                    outcome_labels: rec.outcome.to_string(),
                    probability: rec.probability,
                    correction_bits: rec.correction.bits(),
                    fidelity: rec.fidelity,
                })
                .collect::<Vec<_>>(),
        )?,
    };
    write_output(args.output.out.as_deref(), &bytes)?;
    eprintln!(
        "teleport: n={n} records={} min_fidelity={min_fidelity:.15} max_probability_deviation={max_dev:.3e}",
        rows.len()
    );
    if min_fidelity < 1.0 - PROTOCOL_TOL {
        return Err(Failure::Verification(format!("min fidelity {min_fidelity}")));
    }
    Ok(())
}

#[derive(Serialize)]
struct DenseCsvRow {
    message_bits: String,
    decoded_bits: String,
    ok: bool,
}

fn parse_message(text: &str) -> CliResult<PauliLabels> {
    let labels = text
        .split(',')
        .map(|t| t.trim().parse::<u8>().map_err(|_| usage(format!("bad label {t:?}"))))
        .collect::<CliResult<Vec<u8>>>()?;
    Ok(PauliLabels::new(labels)?)
}

pub fn cmd_densecode(args: &DensecodeArgs) -> CliResult<()> {
    let r = resolve_resource(&args.resource, args.seed)?;
    let n = r.n();
    let book = DenseCodebook::new(&r);

    if let Some(path) = &args.decode {
        let state = read_state(path)?;
        return match book.decode(&state) {
            Ok(labels) => {
                let record = OutcomeRecord::new(labels, 1.0);
                write_output(args.output.out.as_deref(), &json_bytes(&record)?)
            }
            Err(Error::Undecodable { best }) => Err(Failure::Verification(format!(
                "state is undecodable (best squared overlap {best:.9})"
            ))),
            Err(e) => Err(e.into()),
        };
    }

    let messages: Vec<PauliLabels> = if let Some(text) = &args.message {
        let m = parse_message(text)?;
        if m.n() != n {
            return Err(usage(format!("message has {} labels, resource expects {n}", m.n())));
        }
        vec![m]
    } else if let Some(k) = args.messages {
        let total = 1usize << (2 * n);
        if k == 0 || k > total {
            return Err(usage(format!("--messages must be in 1..={total}")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
        let mut picked = rand::seq::index::sample(&mut rng, total, k).into_vec();
        picked.sort_unstable();
        picked.into_iter().map(|i| PauliLabels::from_index(n, i)).collect()
    } else {
        PauliLabels::all(n).collect()
    };

    let mut records: Vec<DenseCodingRecord> = Vec::with_capacity(messages.len());
    let mut failures = 0usize;
    for m in &messages {
        match dense_round_trip(&book, &r, m) {
            Ok(rec) => {
                if rec.decoded != rec.message {
                    failures += 1;
                }
                records.push(rec);
            }
            Err(Error::Undecodable { .. }) => failures += 1,
            Err(e) => return Err(e.into()),
        }
    }
    let gram = book.max_off_diagonal();

    let bytes = match args.output.format {
        Format::Json => json_bytes(&records)?,
        Format::Csv => csv_bytes(
            &records
                .iter()
                .map(|rec| DenseCsvRow {
                    message_bits: rec.message.bits(),
                    decoded_bits: rec.decoded.bits(),
                    ok: rec.decoded == rec.message,
                })
                .collect::<Vec<_>>(),
        )?,
    };
    write_output(args.output.out.as_deref(), &bytes)?;
    let decoded = messages.len() - failures;
    eprintln!(
        "densecode: n={n} bits_per_message={} decoded={decoded}/{} max_gram_off_diagonal={gram:.3e}",
        2 * n,
        messages.len()
    );
    if failures > 0 || gram > PROTOCOL_TOL {
        return Err(Failure::Verification(format!(
            "{failures} messages failed, Gram off-diagonal {gram:e}"
        )));
    }
    Ok(())
}

fn resource_section(r: &ResourceState) -> CliResult<Value> {
    let rho = reduced_last_pair(r);
    let witness = bell_product_witness(r);
    let mut section = json!({
        "n": r.n(),
        "purity_last_pair": rho.purity(),
        "witness": witness,
        "a_marginal_deviation": r.a_marginal_deviation(),
        "block_oracle": { "diag": rho.get(0, 0).re, "off": rho.get(0, 3).re },
    });
    if let Some((a, b)) = r.schedules() {
        if r.n() >= 2 {
            let c = closed_form_block(a.last_level(), b.last_level())?;
            let dev = [(0, 0, c.diag), (3, 3, c.diag), (0, 3, c.off), (3, 0, c.off)]
                .iter()
                .map(|&(i, j, want)| (rho.get(i, j) - want).norm())
                .fold(0.0, f64::max);
            section["block_closed_form"] = json!(c);
            section["block_deviation"] = json!(dev);
        }
    }
    Ok(section)
}

pub fn cmd_analyze(args: &AnalyzeArgs) -> CliResult<()> {
    let r_given = args.resource.computational
        || args.resource.cluster6
        || args.resource.random_schedule
        || args.resource.schedule.is_some()
        || args.resource.schedule_a.is_some()
        || args.resource.schedule_b.is_some()
        || args.resource.angles_a.is_some()
        || args.resource.angles_b.is_some();
    if !r_given && !args.closed_form && !args.search_cluster_n2 {
        return Err(usage("nothing to analyze: give a resource, --closed-form or --search-cluster-n2"));
    }
    let mut report = Map::new();

    if r_given {
        let r = resolve_resource(&args.resource, args.seed)?;
        report.insert("resource".into(), resource_section(&r)?);
        if args.resource.cluster6 {
            let reference = cluster6_reference();
            let identity: Vec<Vec<usize>> = vec![(0..6).collect()];
            let direct = match_up_to_phase_perm(r.state(), &reference, &identity, MATCH_THRESHOLD)?;
            let any = match_up_to_phase_perm(r.state(), &reference, &all_permutations(6), MATCH_THRESHOLD)?;
            report.insert(
                "cluster6".into(),
                json!({ "identity_order": direct, "best_permutation": any }),
            );
        }
    }

    if args.closed_form {
        let n = args.resource.n.unwrap_or(3);
        if n < 2 {
            return Err(usage("--closed-form needs n >= 2"));
        }
        check_cap(2 * n)?;
        let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
        let mut worst = 0.0f64;
        let mut max_purity = 0.0f64;
        let mut not_bell = 0usize;
        for _ in 0..args.random_schedules {
            let a = AngleSchedule::random(n, &mut rng);
            let b = AngleSchedule::random(n, &mut rng);
            let r = ResourceState::from_schedules(&a, &b, SignConvention::Faithful)?;
            let rho = reduced_last_pair(&r);
            let c = closed_form_block(a.last_level(), b.last_level())?;
            for (i, j, want) in [(0, 0, c.diag), (3, 3, c.diag), (0, 3, c.off), (3, 0, c.off)] {
                worst = worst.max((rho.get(i, j) - want).norm());
            }
            max_purity = max_purity.max(rho.purity());
            if bell_product_witness(&r).verdict == Verdict::NotBellProduct {
                not_bell += 1;
            }
        }
        report.insert(
            "closed_form".into(),
            json!({
                "n": n,
                "schedules": args.random_schedules,
                "max_deviation": worst,
                "max_purity": max_purity,
                "not_bell_product": not_bell,
            }),
        );
    }

    if args.search_cluster_n2 {
        let step = parse_angle(&args.grid)?;
        let search = search_cluster_angles_n2(step, &all_permutations(4))?;
        report.insert("cluster_n2_search".into(), serde_json::to_value(&search).map_err(|e| usage(e.to_string()))?);
    }

    write_output(args.out.as_deref(), &json_bytes(&Value::Object(report))?)
}

pub fn cmd_verify(args: &VerifyArgs) -> CliResult<()> {
    let mut opts = VerifyOptions {
        only: args.only.clone(),
        n_max: args.n_max,
        ..Default::default()
    };
    if let Some(seed) = args.seed {
        opts.seed = seed;
    }
    let largest_n = if opts.n_max >= 3 { opts.n_max + 1 } else { opts.n_max };
    check_cap(3 * largest_n)?;
    let report = verify::run(&opts)?;
    for c in &report.criteria {
        eprintln!(
            "{} [{}] {} {}",
            if c.passed { "PASS" } else { "FAIL" },
            c.id,
            c.name,
            c.detail
        );
    }
    write_output(args.out.as_deref(), &json_bytes(&report)?)?;
    if report.passed {
        Ok(())
    } else {
        let failed: Vec<&str> = report.criteria.iter().filter(|c| !c.passed).map(|c| c.name).collect();
        Err(Failure::Verification(failed.join(", ")))
    }
}
