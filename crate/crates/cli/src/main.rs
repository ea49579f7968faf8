//! `bwsim`: encode, decode and simulate Barnes-Wall lattice codes.

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use bwcore::analysis::{BoundCurve, BoundKind};
use bwcore::bwlattice::{self, BwCode};
use bwcore::decoders::{self, MlOracle, ReceivedVector, SeqBw, DEFAULT_EPSILON};
use bwcore::sim::{self, ChannelMode, CsvRow, DecoderKind, Manifest, SimConfig, SnrConvention};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;

#[derive(Parser)]
#[command(name = "bwsim", version, about = "Barnes-Wall lattice codec and Monte-Carlo toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Encode a bits file (one codeword per line of 0/1) into a codeword CSV.
    Encode(EncodeArgs),
    /// Decode a received-vector CSV into bits, one codeword per line.
    Decode(DecodeArgs),
    /// Monte-Carlo CER/BER sweep.
    Sweep(SweepArgs),
    /// Closed-form bound curves.
    Bounds(BoundsArgs),
    /// Point clouds of the shaped code and its shifts.
    Tiling(TilingArgs),
    /// Effective-noise histograms.
    Effnoise(EffnoiseArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum DecoderArg {
    Sbwd,
    Bwcd,
    Ml,
}

impl From<DecoderArg> for DecoderKind {
    fn from(d: DecoderArg) -> Self {
        match d {
            DecoderArg::Sbwd => DecoderKind::Sbwd,
            DecoderArg::Bwcd => DecoderKind::Bwcd,
            DecoderArg::Ml => DecoderKind::Ml,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ConventionArg {
    EsSigma2,
    InvSigma2,
}

impl From<ConventionArg> for SnrConvention {
    fn from(c: ConventionArg) -> Self {
        match c {
            ConventionArg::EsSigma2 => SnrConvention::EsSigma2,
            ConventionArg::InvSigma2 => SnrConvention::InvSigma2,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ChannelArg {
    Code,
    Lattice,
}

impl From<ChannelArg> for ChannelMode {
    fn from(c: ChannelArg) -> Self {
        match c {
            ChannelArg::Code => ChannelMode::Code,
            ChannelArg::Lattice => ChannelMode::Lattice,
        }
    }
}

#[derive(Args, Clone, Serialize)]
struct Grid {
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    snr_start: f64,
    #[arg(long, default_value_t = 10.0, allow_negative_numbers = true)]
    snr_stop: f64,
    #[arg(long, default_value_t = 1.0)]
    snr_step: f64,
}

impl Grid {
    fn values(&self) -> Result<Vec<f64>> {
        Ok(sim::snr_grid(self.snr_start, self.snr_stop, self.snr_step)?)
    }
}

#[derive(Args)]
struct EncodeArgs {
    #[arg(long)]
    m: u32,
    /// Bits file; `-` reads stdin.
    #[arg(long, default_value = "-")]
    bits: PathBuf,
    /// Write QAM symbols `2x - c` instead of lattice coordinates.
    #[arg(long)]
    qam: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DecodeArgs {
    #[arg(long)]
    m: u32,
    /// CSV with columns word,coord,re,im; `-` reads stdin.
    #[arg(long, default_value = "-")]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "sbwd")]
    decoder: DecoderArg,
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    epsilon: f64,
    /// Input holds channel outputs `ȳ` in QAM coordinates.
    #[arg(long)]
    qam: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    m: u32,
    #[command(flatten)]
    grid: Grid,
    #[arg(long, default_value_t = 10_000)]
    trials: u64,
    /// Stop a point after this many codeword errors; 0 disables early stop.
    #[arg(long, default_value_t = sim::DEFAULT_MAX_ERRORS)]
    max_errors: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, value_enum, default_value = "sbwd")]
    decoder: DecoderArg,
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    epsilon: f64,
    #[arg(long, value_enum, default_value = "es-sigma2")]
    snr_convention: ConventionArg,
    #[arg(long, value_enum, default_value = "code")]
    channel: ChannelArg,
    /// Worker threads; 0 uses all cores.
    #[arg(long, default_value_t = 0)]
    workers: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct BoundsArgs {
    #[arg(long)]
    m: u32,
    #[command(flatten)]
    grid: Grid,
    /// Comma-separated kinds among pc, pc_theta, sub, slb, effnoise_ub.
    #[arg(long, default_value = "pc,pc_theta,sub,slb")]
    kinds: String,
    #[arg(long, value_enum, default_value = "inv-sigma2")]
    #[serde(skip)]
    snr_convention: ConventionArg,
    /// Noise model the sphere bounds refer to: `lattice` takes σ² per
    /// dimension, `code` the normalized σ²/4.
    #[arg(long, value_enum, default_value = "lattice")]
    #[serde(skip)]
    channel: ChannelArg,
    /// Trials per point for the simulated effnoise_ub curve.
    #[arg(long, default_value_t = 100_000)]
    trials: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 0)]
    workers: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct TilingArgs {
    #[arg(long)]
    m: u32,
    /// Apply the odd-m fold `ϕ` (the plain modulo cloud otherwise).
    #[arg(long)]
    phi: bool,
    /// Include the eight neighbouring shifts of the box.
    #[arg(long)]
    shifts: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct EffnoiseArgs {
    #[command(flatten)]
    grid: Grid,
    #[arg(long, default_value_t = 1_000_000)]
    samples: u64,
    #[arg(long, default_value_t = 20)]
    bins: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, value_enum, default_value = "inv-sigma2")]
    #[serde(skip)]
    snr_convention: ConventionArg,
    /// Only used by the es-sigma2 convention.
    #[arg(long, default_value_t = 2)]
    m: u32,
    #[arg(long, default_value_t = 0)]
    workers: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Encode(a) => encode(a),
        Command::Decode(a) => decode(a),
        Command::Sweep(a) => sweep(a),
        Command::Bounds(a) => bounds(a),
        Command::Tiling(a) => tiling(a),
        Command::Effnoise(a) => effnoise(a),
    }
}

fn open_in(path: &Path) -> Result<Box<dyn BufRead>> {
    Ok(if path == Path::new("-") {
        Box::new(BufReader::new(io::stdin()))
    } else {
        Box::new(BufReader::new(
            File::open(path).with_context(|| format!("opening {}", path.display()))?,
        ))
    })
}

fn open_out(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

fn read_bits(r: impl BufRead, expected: usize) -> Result<Vec<Vec<u8>>> {
    let mut words = Vec::new();
    for (lineno, line) in r.lines().enumerate() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bits = line
            .chars()
            .filter(|c| !c.is_whitespace() && *c != ',')
            .map(|c| match c {
                '0' => Ok(0u8),
                '1' => Ok(1u8),
                other => bail!("line {}: unexpected character {other:?}", lineno + 1),
            })
            .collect::<Result<Vec<u8>>>()?;
        if bits.len() != expected {
            bail!("line {}: expected {expected} bits, found {}", lineno + 1, bits.len());
        }
        words.push(bits);
    }
    Ok(words)
}

#[derive(serde::Deserialize)]
struct CoordRow {
    word: usize,
    coord: usize,
    re: f64,
    im: f64,
}

fn read_vectors(r: impl Read, n: usize) -> Result<Vec<Vec<Complex64>>> {
    let mut rd = csv::Reader::from_reader(r);
    let mut words: Vec<Vec<Option<Complex64>>> = Vec::new();
    for row in rd.deserialize() {
        let row: CoordRow = row?;
        if row.coord >= n {
            bail!("word {}: coordinate index {} out of range", row.word, row.coord);
        }
        if words.len() <= row.word {
            words.resize(row.word + 1, vec![None; n]);
        }
        words[row.word][row.coord] = Some(Complex64::new(row.re, row.im));
    }
    words
        .into_iter()
        .enumerate()
        .map(|(w, v)| {
            v.into_iter()
                .collect::<Option<Vec<_>>>()
                .with_context(|| format!("word {w} is missing coordinates"))
        })
        .collect()
}

fn encode(a: EncodeArgs) -> Result<()> {
    let code = BwCode::new(a.m)?;
    let words = read_bits(open_in(&a.bits)?, code.bits_per_codeword())?;
    let mut wr = csv::Writer::from_writer(open_out(a.out.as_deref())?);
    wr.write_record(["word", "coord", "re", "im"])?;
    for (w, bits) in words.iter().enumerate() {
        let x = code.encode(bits)?;
        if a.qam {
            for (j, z) in sim::qam_map(&x, a.m)?.iter().enumerate() {
                wr.write_record([w.to_string(), j.to_string(), sim::fmt_sig(z.re), sim::fmt_sig(z.im)])?;
            }
        } else {
            for (j, z) in x.coords().iter().enumerate() {
                wr.write_record([w.to_string(), j.to_string(), z.re.to_string(), z.im.to_string()])?;
            }
        }
    }
    wr.flush()?;
    Ok(())
}

fn decode(a: DecodeArgs) -> Result<()> {
    let seq = SeqBw::new(a.m)?;
    let ml = match a.decoder {
        DecoderArg::Ml => Some(MlOracle::new(a.m)?),
        _ => None,
    };
    let words = read_vectors(open_in(&a.input)?, seq.code().n())?;
    let mut out = open_out(a.out.as_deref())?;
    for (w, v) in words.into_iter().enumerate() {
        let y = if a.qam {
            sim::normalize(&v, a.m)?
        } else {
            ReceivedVector::new(v)?
        };
        let bits = match a.decoder {
            DecoderArg::Sbwd => seq.decode(&y)?.bits,
            DecoderArg::Bwcd => decoders::bwcd_with(&seq, &y, a.epsilon)?.bits,
            DecoderArg::Ml => Ok(ml.as_ref().expect("oracle built").decode(&y)?.1.to_vec()),
        };
        let bits = bits.with_context(|| format!("word {w}: decoded point is not a codeword"))?;
        let line: String = bits.iter().map(|b| if *b == 1 { '1' } else { '0' }).collect();
        writeln!(out, "{line}")?;
    }
    out.flush()?;
    Ok(())
}

fn finish<C: Serialize>(
    rows: &[CsvRow],
    config: &C,
    seed: u64,
    convention: SnrConvention,
    started: Instant,
    out: Option<&Path>,
) -> Result<()> {
    match out {
        Some(path) => {
            let manifest = Manifest::new(config, seed, convention, started)?;
            sim::emit(rows, &manifest, path)?;
        }
        None => sim::write_csv(rows, io::stdout().lock())?,
    }
    Ok(())
}

fn sweep(a: SweepArgs) -> Result<()> {
    let started = Instant::now();
    let cfg = SimConfig {
        m: a.m,
        snr_grid_db: a.grid.values()?,
        trials: a.trials,
        max_errors: (a.max_errors > 0).then_some(a.max_errors),
        seed: a.seed,
        decoder: a.decoder.into(),
        epsilon: a.epsilon,
        workers: a.workers,
        out_path: a.out.clone(),
        snr_convention: a.snr_convention.into(),
        channel: a.channel.into(),
    };
    let points = sim::run_curve(&cfg)?;
    // the worker count does not affect the results, so it stays out of the file
    let recorded = SimConfig { workers: 0, ..cfg.clone() };
    finish(&sim::curve_rows(&points), &recorded, cfg.seed, cfg.snr_convention, started, a.out.as_deref())
}

fn bounds(a: BoundsArgs) -> Result<()> {
    let started = Instant::now();
    let snrs = a.grid.values()?;
    let convention: SnrConvention = a.snr_convention.into();
    let m = a.m;
    let scale = match a.channel {
        ChannelArg::Lattice => 1.0,
        ChannelArg::Code => 0.25,
    };
    let mut rows = Vec::new();
    for name in a.kinds.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let kind = BoundKind::parse(name).with_context(|| format!("unknown bound kind {name:?}"))?;
        match kind {
            BoundKind::EffNoiseUb => {
                let mut cfg = SimConfig::new(m, snrs.clone());
                cfg.seed = a.seed;
                cfg.workers = a.workers;
                cfg.snr_convention = convention;
                let est = sim::effnoise_curve(&cfg, a.trials)?;
                rows.extend(sim::estimate_rows(kind.as_str(), &est, m, a.seed));
            }
            // the cross-over curves always refer to the unnormalized channel
            BoundKind::Pc | BoundKind::PcTheta => {
                let curve = BoundCurve::evaluate(kind, &snrs, m, |s| convention.sigma2(s, m))?;
                rows.extend(sim::bound_rows(&curve, m, a.seed));
            }
            BoundKind::Sub | BoundKind::Slb => {
                let curve = BoundCurve::evaluate(kind, &snrs, m, |s| convention.sigma2(s, m) * scale)?;
                rows.extend(sim::bound_rows(&curve, m, a.seed));
            }
        }
    }
    let seed = a.seed;
    finish(&rows, &a, seed, convention, started, a.out.as_deref())
}

fn tiling(a: TilingArgs) -> Result<()> {
    let cloud = bwlattice::tiling_cloud(a.m, a.phi, a.shifts)?;
    let mut out = open_out(a.out.as_deref())?;
    bwlattice::write_tiling_csv(&cloud, &mut out)?;
    out.flush()?;
    Ok(())
}

fn effnoise(a: EffnoiseArgs) -> Result<()> {
    let started = Instant::now();
    let convention: SnrConvention = a.snr_convention.into();
    let sigma2s: Vec<(f64, f64)> = a
        .grid
        .values()?
        .into_iter()
        .map(|s| (s, convention.sigma2(s, a.m)))
        .collect();
    let table = sim::effnoise_table(&sigma2s, a.samples, a.bins, a.seed, a.workers)?;
    let rows: Vec<CsvRow> = table
        .iter()
        .flat_map(|(snr, stats)| sim::effnoise_rows(*snr, stats, a.m, a.seed))
        .collect();
    finish(&rows, &a, a.seed, convention, started, a.out.as_deref())
}
