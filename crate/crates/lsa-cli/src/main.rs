//! Command-line front end for the LSA cipher and sensor-network simulator.
//!
//! Subcommands:
//!
//! - `run <file>` — execute a JSON scenario and emit the metrics report as
//!   CSV or JSON-lines, to stdout or `--out`.
//! - `kat generate|check <file>` — write or verify the known-answer vector
//!   file (hex triples `key plaintext ciphertext`): the all-zero vector plus
//!   32 seeded random vectors.
//! - `avalanche` — measure the flipped-ciphertext-bit fraction under single
//!   plaintext-bit and single key-bit flips.
//! - `bench` — report per-frame cipher-block operations and energy units for
//!   a list of payload sizes under the default cost model.
//!
//! Exit codes: 0 success, 1 known-answer mismatch, 2 invalid input
//! (bad usage, unparseable or semantically invalid scenario), 3 I/O error.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use lsa_core::{
    ctr_blocks, encrypt_block, expand_key, frame_cost_parts, load_scenario, mac_blocks,
    run_simulation, Block, CostModel, Direction, FrameType, MasterKey, MetricsReport,
};

/// Seed for the 32 random known-answer vectors ("LSAKAT" as bytes).
const KAT_SEED: u64 = 0x4C53_414B_4154;

/// Default seed for `avalanche` when none is given.
const AVALANCHE_SEED: u64 = 0xD1FF_05E5;

#[derive(Parser)]
#[command(name = "lsa", version, about = "LSA cipher and sensor-network simulator")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a scenario file and emit its metrics report.
    Run {
        /// Scenario JSON file.
        file: PathBuf,
        /// Override the seed embedded in the scenario.
        #[arg(long)]
        seed: Option<u64>,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Report format.
        #[arg(long, value_enum, default_value_t = Format::Jsonl)]
        format: Format,
    },
    /// Generate or check the known-answer vector file.
    Kat {
        #[command(subcommand)]
        mode: KatMode,
    },
    /// Measure the avalanche effect of the block cipher.
    Avalanche {
        /// Number of random (key, plaintext) samples.
        #[arg(long, default_value_t = 1000)]
        trials: u64,
        /// RNG seed; the output is a pure function of it.
        #[arg(long, default_value_t = AVALANCHE_SEED)]
        seed: u64,
    },
    /// Report per-frame block operations and energy for payload sizes.
    Bench {
        /// Comma-separated payload sizes in bytes.
        #[arg(long, value_delimiter = ',', default_value = "0,16,64,256")]
        sizes: Vec<usize>,
    },
}

#[derive(Subcommand)]
enum KatMode {
    /// Write the frozen vector set to a file.
    Generate { file: PathBuf },
    /// Re-encrypt every vector in the file and compare.
    Check { file: PathBuf },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Jsonl,
}

enum CliError {
    /// A known-answer vector failed verification (exit 1).
    Mismatch(String),
    /// Invalid input: unparseable or semantically bad scenario, bad argument
    /// values (exit 2).
    Invalid(String),
    /// Filesystem failure, with the path that caused it (exit 3).
    Io(PathBuf, std::io::Error),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Mismatch(msg) => write!(f, "{msg}"),
            CliError::Invalid(msg) => write!(f, "{msg}"),
            CliError::Io(path, e) => write!(f, "{}: {e}", path.display()),
        }
    }
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Mismatch(_) => 1,
            CliError::Invalid(_) => 2,
            CliError::Io(..) => 3,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}

fn dispatch(cmd: Cmd) -> Result<(), CliError> {
    match cmd {
        Cmd::Run {
            file,
            seed,
            out,
            format,
        } => cmd_run(&file, seed, out.as_deref(), format),
        Cmd::Kat { mode } => match mode {
            KatMode::Generate { file } => cmd_kat_generate(&file),
            KatMode::Check { file } => cmd_kat_check(&file),
        },
        Cmd::Avalanche { trials, seed } => cmd_avalanche(trials, seed),
        Cmd::Bench { sizes } => cmd_bench(&sizes),
    }
}

fn cmd_run(
    file: &Path,
    seed: Option<u64>,
    out: Option<&Path>,
    format: Format,
) -> Result<(), CliError> {
    let text = fs::read_to_string(file).map_err(|e| CliError::Io(file.to_owned(), e))?;
    let mut cfg = load_scenario(&text)
        .map_err(|e| CliError::Invalid(format!("{}: {e}", file.display())))?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let report = run_simulation(&cfg);
    let rendered = match format {
        Format::Csv => format!("{}\n{}\n", MetricsReport::csv_header(), report.to_csv_row()),
        Format::Jsonl => format!("{}\n", report.to_json_line()),
    };
    match out {
        Some(path) => fs::write(path, rendered).map_err(|e| CliError::Io(path.to_owned(), e)),
        None => {
            print!("{rendered}");
            Ok(())
        }
    }
}

/// The frozen vector set: the all-zero (key, plaintext) pair, then 32 pairs
/// drawn from a ChaCha stream seeded with [`KAT_SEED`].
fn kat_vectors() -> Vec<(MasterKey, Block)> {
    let mut v = vec![(MasterKey([0u8; 16]), Block::ZERO)];
    let mut rng = ChaCha12Rng::seed_from_u64(KAT_SEED);
    for _ in 0..32 {
        let key: [u8; 16] = rng.gen();
        let pt: [u8; 16] = rng.gen();
        v.push((MasterKey(key), Block::from_bytes(pt)));
    }
    v
}

fn cmd_kat_generate(file: &Path) -> Result<(), CliError> {
    let mut lines = String::new();
    for (key, pt) in kat_vectors() {
        let ct = encrypt_block(pt, &expand_key(&key));
        lines.push_str(&format!(
            "{} {} {}\n",
            hex::encode(key.0),
            hex::encode(pt.to_bytes()),
            hex::encode(ct.to_bytes())
        ));
    }
    fs::write(file, lines).map_err(|e| CliError::Io(file.to_owned(), e))
}

fn cmd_kat_check(file: &Path) -> Result<(), CliError> {
    let text = fs::read_to_string(file).map_err(|e| CliError::Io(file.to_owned(), e))?;
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let [key, pt, ct] = fields[..] else {
            return Err(CliError::Mismatch(format!(
                "{}: line {lineno}: expected 3 hex fields, found {}",
                file.display(),
                fields.len()
            )));
        };
        let key = decode16(key, file, lineno)?;
        let pt = decode16(pt, file, lineno)?;
        let ct = decode16(ct, file, lineno)?;
        let got = encrypt_block(Block::from_bytes(pt), &expand_key(&MasterKey(key)));
        if got.to_bytes() != ct {
            return Err(CliError::Mismatch(format!(
                "{}: line {lineno}: ciphertext mismatch: expected {}, computed {}",
                file.display(),
                hex::encode(ct),
                hex::encode(got.to_bytes())
            )));
        }
    }
    Ok(())
}

fn decode16(field: &str, file: &Path, lineno: usize) -> Result<[u8; 16], CliError> {
    let bytes = hex::decode(field).map_err(|e| {
        CliError::Mismatch(format!("{}: line {lineno}: bad hex: {e}", file.display()))
    })?;
    bytes.try_into().map_err(|_| {
        CliError::Mismatch(format!(
            "{}: line {lineno}: field is not 16 bytes",
            file.display()
        ))
    })
}

fn cmd_avalanche(trials: u64, seed: u64) -> Result<(), CliError> {
    if trials == 0 {
        return Err(CliError::Invalid("avalanche requires --trials >= 1".into()));
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut pt_fracs = Vec::with_capacity(trials as usize);
    let mut key_fracs = Vec::with_capacity(trials as usize);
    for _ in 0..trials {
        let key: [u8; 16] = rng.gen();
        let pt: [u8; 16] = rng.gen();
        let ks = expand_key(&MasterKey(key));
        let base = encrypt_block(Block::from_bytes(pt), &ks);

        let pt_bit = rng.gen_range(0..128usize);
        let mut pt2 = pt;
        pt2[pt_bit / 8] ^= 0x80 >> (pt_bit % 8);
        let ct2 = encrypt_block(Block::from_bytes(pt2), &ks);
        pt_fracs.push((base.0 ^ ct2.0).count_ones() as f64 / 128.0);

        let key_bit = rng.gen_range(0..128usize);
        let mut key2 = key;
        key2[key_bit / 8] ^= 0x80 >> (key_bit % 8);
        let ct3 = encrypt_block(Block::from_bytes(pt), &expand_key(&MasterKey(key2)));
        key_fracs.push((base.0 ^ ct3.0).count_ones() as f64 / 128.0);
    }
    let (pt_mean, pt_sd) = mean_stddev(&pt_fracs);
    let (key_mean, key_sd) = mean_stddev(&key_fracs);
    println!("plaintext_flip trials={trials} mean={pt_mean:.6} stddev={pt_sd:.6}");
    println!("key_flip trials={trials} mean={key_mean:.6} stddev={key_sd:.6}");
    Ok(())
}

fn mean_stddev(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

fn cmd_bench(sizes: &[usize]) -> Result<(), CliError> {
    if sizes.is_empty() {
        return Err(CliError::Invalid("bench requires at least one size".into()));
    }
    let cm = CostModel::default();
    for &payload in sizes {
        let keystream = ctr_blocks(payload);
        let mac = mac_blocks(FrameType::Data.header_len() + payload);
        // Sealing and opening each run the keystream and the MAC chain once.
        let block_ops = 2 * (keystream + mac);
        let tx = frame_cost_parts(FrameType::Data, payload, Direction::Tx, &cm);
        let rx = frame_cost_parts(FrameType::Data, payload, Direction::Rx, &cm);
        println!(
            "payload={payload} keystream_blocks={keystream} mac_blocks={mac} \
             block_ops={block_ops} energy_tx={tx:.3} energy_rx={rx:.3} energy={:.3}",
            tx + rx
        );
    }
    Ok(())
}
