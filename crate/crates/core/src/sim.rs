//! Transmission model and seeded Monte-Carlo sweeps.
//!
//! A codeword `x` of the lattice code is sent as the QAM vector
//! `x_t = 2x - c`, passes an AWGN channel `ȳ = x_t + n̄` with
//! `n̄ ~ CN(0, σ²)`, and is mapped back to lattice coordinates with
//! `y = (ȳ + c)/2`, where the noise is `CN(0, σ²/4)`.
//!
//! Every trial draws from its own ChaCha stream keyed by
//! `(seed, snr_index, trial_index)`. Trials run in fixed-size batches and the
//! error-count stopping rule is applied in trial order, so results do not
//! depend on the number of workers.

use std::fmt;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::{self, binomial_stderr, BoundCurve, Estimate};
use crate::bwlattice::{self, BwError, Codeword, ShapeBox};
use crate::decoders::{self, DecodeError, MlOracle, ReceivedVector, SeqBw};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Lattice(#[from] BwError),
    #[error(transparent)]
    Decode(#[from] DecodeError),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("malformed input: {0}")]
    Parse(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DecoderKind {
    Sbwd,
    Bwcd,
    Ml,
}

impl DecoderKind {
    pub fn as_str(self) -> &'static str {
        match self {
            DecoderKind::Sbwd => "sbwd",
            DecoderKind::Bwcd => "bwcd",
            DecoderKind::Ml => "ml",
        }
    }
}

impl fmt::Display for DecoderKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DecoderKind {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "sbwd" => Ok(DecoderKind::Sbwd),
            "bwcd" => Ok(DecoderKind::Bwcd),
            "ml" => Ok(DecoderKind::Ml),
            other => Err(SimError::Parse(format!("unknown decoder {other:?}"))),
        }
    }
}

/// How an SNR in dB maps to the channel noise variance `σ²`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SnrConvention {
    /// `SNR = E_s/σ²` with `E_s` the mean energy of the `2^m`-QAM.
    EsSigma2,
    /// `SNR = 1/σ²`.
    InvSigma2,
}

impl SnrConvention {
    pub fn as_str(self) -> &'static str {
        match self {
            SnrConvention::EsSigma2 => "es-sigma2",
            SnrConvention::InvSigma2 => "inv-sigma2",
        }
    }

    pub fn sigma2(self, snr_db: f64, m: u32) -> f64 {
        let lin = 10f64.powf(snr_db / 10.0);
        match self {
            SnrConvention::EsSigma2 => symbol_energy(m) / lin,
            SnrConvention::InvSigma2 => 1.0 / lin,
        }
    }
}

impl FromStr for SnrConvention {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "es-sigma2" => Ok(SnrConvention::EsSigma2),
            "inv-sigma2" => Ok(SnrConvention::InvSigma2),
            other => Err(SimError::Parse(format!("unknown SNR convention {other:?}"))),
        }
    }
}

/// Which experiment a sweep runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChannelMode {
    /// Random codewords through the QAM channel.
    Code,
    /// The zero point of the infinite lattice plus `CN(0, σ²)` noise.
    Lattice,
}

impl ChannelMode {
    pub fn as_str(self) -> &'static str {
        match self {
            ChannelMode::Code => "code",
            ChannelMode::Lattice => "lattice",
        }
    }
}

impl FromStr for ChannelMode {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "code" => Ok(ChannelMode::Code),
            "lattice" => Ok(ChannelMode::Lattice),
            other => Err(SimError::Parse(format!("unknown channel mode {other:?}"))),
        }
    }
}

pub const DEFAULT_MAX_ERRORS: u64 = 200;

/// Trials per scheduling batch. Fixed so that the stopping point of a sweep
/// never depends on the worker count.
const BATCH: u64 = 2048;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub m: u32,
    pub snr_grid_db: Vec<f64>,
    /// Upper limit on trials per SNR point.
    pub trials: u64,
    /// Early stop once this many codeword errors were seen; `None` runs all
    /// trials.
    pub max_errors: Option<u64>,
    pub seed: u64,
    pub decoder: DecoderKind,
    pub epsilon: f64,
    /// Worker threads; 0 picks the rayon default.
    pub workers: usize,
    pub out_path: Option<PathBuf>,
    pub snr_convention: SnrConvention,
    pub channel: ChannelMode,
}

impl SimConfig {
    pub fn new(m: u32, snr_grid_db: Vec<f64>) -> Self {
        SimConfig {
            m,
            snr_grid_db,
            trials: 10_000,
            max_errors: Some(DEFAULT_MAX_ERRORS),
            seed: 1,
            decoder: DecoderKind::Sbwd,
            epsilon: decoders::DEFAULT_EPSILON,
            workers: 0,
            out_path: None,
            snr_convention: SnrConvention::EsSigma2,
            channel: ChannelMode::Code,
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |msg: &str| Err(SimError::Config(msg.to_string()));
        if self.m == 0 || self.m > 12 {
            return bad("m must be in 1..=12");
        }
        if self.snr_grid_db.iter().any(|s| !s.is_finite()) {
            return bad("SNR values must be finite");
        }
        if self.snr_grid_db.windows(2).any(|w| w[0] >= w[1]) {
            return bad("SNR grid must be strictly increasing");
        }
        if self.trials == 0 {
            return bad("trials must be at least 1");
        }
        if self.max_errors == Some(0) {
            return bad("max errors must be at least 1");
        }
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return bad("epsilon must be non-negative");
        }
        if self.decoder == DecoderKind::Ml && self.m > MlOracle::MAX_M {
            return bad("the ML decoder is limited to m <= 3");
        }
        if self.channel == ChannelMode::Lattice && self.decoder != DecoderKind::Sbwd {
            return bad("the infinite-lattice experiment only supports the sbwd decoder");
        }
        Ok(())
    }

    pub fn sigma2(&self, snr_db: f64) -> f64 {
        self.snr_convention.sigma2(snr_db, self.m)
    }
}

/// `start, start+step, ...` up to `stop` inclusive, each value rounded to the
/// 12 significant digits used in the CSV output.
pub fn snr_grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>, SimError> {
    if !(step > 0.0) || !start.is_finite() || !stop.is_finite() || stop < start {
        return Err(SimError::Config("bad SNR range".into()));
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    Ok((0..count)
        .map(|k| round_sig(start + k as f64 * step))
        .collect())
}

fn round_sig(x: f64) -> f64 {
    fmt_sig(x).parse().unwrap_or(x)
}

/// `%.12g`-style formatting.
pub fn fmt_sig(x: f64) -> String {
    const DIGITS: i32 = 12;
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= DIGITS {
        let mantissa = strip_zeros(mantissa);
        format!("{mantissa}e{}{:02}", if exp < 0 { '-' } else { '+' }, exp.abs())
    } else {
        let decimals = (DIGITS - 1 - exp).max(0) as usize;
        strip_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// The offset `c` that centres the shaping box on the origin.
pub fn qam_offset(m: u32) -> Complex64 {
    let b = ShapeBox::new(m);
    Complex64::new((b.re_size - 1) as f64, (b.im_size - 1) as f64)
}

/// All `2^m` QAM symbols `2z - c` for `z` in the shaping box.
pub fn constellation(m: u32) -> Vec<Complex64> {
    let b = ShapeBox::new(m);
    let c = qam_offset(m);
    (0..b.re_size)
        .flat_map(|re| (0..b.im_size).map(move |im| Complex64::new(2.0 * re as f64, 2.0 * im as f64) - c))
        .collect()
}

/// Mean symbol energy `E_s` of the `2^m`-QAM constellation.
pub fn symbol_energy(m: u32) -> f64 {
    let pts = constellation(m);
    pts.iter().map(|z| z.norm_sqr()).sum::<f64>() / pts.len() as f64
}

/// `x_t = 2x - c`.
pub fn qam_map(x: &Codeword, m: u32) -> Result<Vec<Complex64>, SimError> {
    let b = ShapeBox::new(m);
    if let Some((index, &value)) = x.coords().iter().enumerate().find(|(_, z)| !b.contains(**z)) {
        return Err(BwError::OutsideBox { index, value }.into());
    }
    let c = qam_offset(m);
    Ok(x
        .coords()
        .iter()
        .map(|z| Complex64::new(2.0 * z.re as f64, 2.0 * z.im as f64) - c)
        .collect())
}

/// `ȳ = x_t + n̄`, `n̄_j ~ CN(0, σ²)`.
pub fn channel_step<R: Rng + ?Sized>(xt: &[Complex64], sigma2: f64, rng: &mut R) -> Vec<Complex64> {
    if sigma2 == 0.0 {
        return xt.to_vec();
    }
    xt.iter()
        .map(|&x| x + analysis::complex_gaussian(sigma2, rng))
        .collect()
}

/// `y = (ȳ + c)/2`.
pub fn normalize(ybar: &[Complex64], m: u32) -> Result<ReceivedVector, SimError> {
    let c = qam_offset(m);
    Ok(ReceivedVector::new(
        ybar.iter().map(|&z| (z + c) * 0.5).collect(),
    )?)
}

/// One SNR point of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub snr_db: f64,
    pub cer: f64,
    pub ber: f64,
    pub trials: u64,
    pub codeword_errors: u64,
    pub bit_errors: u64,
    /// Trials whose level-0 Reed-Muller codeword was wrong.
    pub level0_errors: u64,
    pub seed: u64,
    pub decoder: DecoderKind,
    pub m: u32,
    pub epsilon: f64,
}

impl CurvePoint {
    fn from_counts(cfg: &SimConfig, snr_db: f64, counts: Counts) -> Self {
        let bits = bwlattice::bits_per_codeword(cfg.m) as f64;
        CurvePoint {
            snr_db,
            cer: counts.codeword_errors as f64 / counts.trials as f64,
            ber: counts.bit_errors as f64 / (counts.trials as f64 * bits),
            trials: counts.trials,
            codeword_errors: counts.codeword_errors,
            bit_errors: counts.bit_errors,
            level0_errors: counts.level0_errors,
            seed: cfg.seed,
            decoder: cfg.decoder,
            m: cfg.m,
            epsilon: cfg.epsilon,
        }
    }

    pub fn cer_stderr(&self) -> f64 {
        binomial_stderr(self.cer, self.trials)
    }

    pub fn ber_stderr(&self) -> f64 {
        binomial_stderr(self.ber, self.trials * bwlattice::bits_per_codeword(self.m) as u64)
    }

    pub fn level0_cer(&self) -> f64 {
        self.level0_errors as f64 / self.trials as f64
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
struct Counts {
    trials: u64,
    codeword_errors: u64,
    bit_errors: u64,
    level0_errors: u64,
}

/// Outcome of a single trial.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TrialOutcome {
    pub codeword_error: bool,
    pub bit_errors: u32,
    pub level0_error: bool,
    /// Whether the noise stayed within the packing radius, `|n|² ≤ N/4`.
    pub within_packing_radius: bool,
}

/// The RNG for one trial.
pub fn trial_rng(seed: u64, snr_index: usize, trial_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((snr_index as u64) << 40) | (trial_index & ((1 << 40) - 1)));
    rng
}

/// Decoders and code tables shared by all trials of a sweep.
pub struct TrialRunner {
    cfg: SimConfig,
    seq: SeqBw,
    ml: Option<MlOracle>,
}

impl TrialRunner {
    pub fn new(cfg: SimConfig) -> Result<Self, SimError> {
        cfg.validate()?;
        let seq = SeqBw::new(cfg.m)?;
        let ml = match cfg.decoder {
            DecoderKind::Ml => Some(MlOracle::new(cfg.m)?),
            _ => None,
        };
        Ok(TrialRunner { cfg, seq, ml })
    }

    pub fn config(&self) -> &SimConfig {
        &self.cfg
    }

    /// Runs trial `trial_index` at grid point `snr_index`.
    pub fn trial(&self, snr_index: usize, trial_index: u64) -> Result<TrialOutcome, SimError> {
        let snr_db = self.cfg.snr_grid_db[snr_index];
        let sigma2 = self.cfg.sigma2(snr_db);
        let mut rng = trial_rng(self.cfg.seed, snr_index, trial_index);
        match self.cfg.channel {
            ChannelMode::Code => self.code_trial(sigma2, &mut rng),
            ChannelMode::Lattice => self.lattice_trial(sigma2, &mut rng),
        }
    }

    fn code_trial(&self, sigma2: f64, rng: &mut ChaCha8Rng) -> Result<TrialOutcome, SimError> {
        let m = self.cfg.m;
        let code = self.seq.code();
        let bits: Vec<u8> = (0..code.bits_per_codeword())
            .map(|_| rng.random_range(0..2u8))
            .collect();
        let x = code.encode(&bits)?;
        let xt = qam_map(&x, m)?;
        let ybar = channel_step(&xt, sigma2, rng);
        let y = normalize(&ybar, m)?;
        let noise: f64 = y
            .as_slice()
            .iter()
            .zip(x.coords())
            .map(|(z, c)| (z - Complex64::new(c.re as f64, c.im as f64)).norm_sqr())
            .sum();
        let within_packing_radius = noise <= code.n() as f64 / 4.0;

        let sent_level0: Vec<u8> = x.coords().iter().map(|z| z.parity()).collect();
        let (decoded_bits, level0) = match self.cfg.decoder {
            DecoderKind::Sbwd => {
                let out = self.seq.decode(&y)?;
                (out.bits.ok(), out.level_codewords[0].clone())
            }
            DecoderKind::Bwcd => {
                let out = decoders::bwcd_with(&self.seq, &y, self.cfg.epsilon)?;
                (out.bits.ok(), out.level_codewords[0].clone())
            }
            DecoderKind::Ml => {
                let (cw, b) = self.ml.as_ref().expect("ml oracle built").decode(&y)?;
                (Some(b.to_vec()), cw.coords().iter().map(|z| z.parity()).collect())
            }
        };
        let bit_errors = match &decoded_bits {
            Some(d) => d.iter().zip(&bits).filter(|(a, b)| a != b).count() as u32,
            // an unrecoverable decode counts every bit as wrong
            None => bits.len() as u32,
        };
        Ok(TrialOutcome {
            codeword_error: decoded_bits.as_deref() != Some(&bits[..]),
            bit_errors,
            level0_error: level0 != sent_level0,
            within_packing_radius,
        })
    }

    fn lattice_trial(&self, sigma2: f64, rng: &mut ChaCha8Rng) -> Result<TrialOutcome, SimError> {
        let n = self.seq.code().n();
        let noise: Vec<Complex64> = (0..n)
            .map(|_| analysis::complex_gaussian(sigma2, rng))
            .collect();
        let energy: f64 = noise.iter().map(|z| z.norm_sqr()).sum();
        let out = self.seq.decode(&ReceivedVector::new(noise)?)?;
        let bit_errors = out
            .bits
            .as_ref()
            .map(|b| b.iter().filter(|&&x| x != 0).count() as u32)
            .unwrap_or(self.seq.code().bits_per_codeword() as u32);
        Ok(TrialOutcome {
            codeword_error: out.point.0.iter().any(|z| *z != crate::gint::GaussInt::ZERO),
            bit_errors,
            level0_error: out.level_codewords[0].iter().any(|&b| b != 0),
            within_packing_radius: energy <= n as f64 / 4.0,
        })
    }

    fn run_point(&self, snr_index: usize) -> Result<Counts, SimError> {
        let mut counts = Counts::default();
        let limit = self.cfg.trials;
        let mut start = 0u64;
        while start < limit {
            let end = (start + BATCH).min(limit);
            let outcomes: Vec<TrialOutcome> = (start..end)
                .into_par_iter()
                .map(|t| self.trial(snr_index, t))
                .collect::<Result<_, _>>()?;
            for o in outcomes {
                counts.trials += 1;
                counts.codeword_errors += o.codeword_error as u64;
                counts.bit_errors += o.bit_errors as u64;
                counts.level0_errors += o.level0_error as u64;
                if self.cfg.max_errors.is_some_and(|cap| counts.codeword_errors >= cap) {
                    return Ok(counts);
                }
            }
            start = end;
        }
        Ok(counts)
    }
}

fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T, SimError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| SimError::Config(e.to_string()))?;
    Ok(pool.install(f))
}

/// Runs the configured sweep, one [`CurvePoint`] per SNR.
pub fn run_curve(cfg: &SimConfig) -> Result<Vec<CurvePoint>, SimError> {
    let runner = TrialRunner::new(cfg.clone())?;
    with_workers(cfg.workers, || {
        cfg.snr_grid_db
            .iter()
            .enumerate()
            .map(|(i, &snr)| Ok(CurvePoint::from_counts(cfg, snr, runner.run_point(i)?)))
            .collect()
    })?
}

/// Simulated `Pr(|n^eff|² > N/4)` per SNR point, on RNG streams disjoint
/// from the decoding trials.
pub fn effnoise_curve(cfg: &SimConfig, trials: u64) -> Result<Vec<(f64, Estimate)>, SimError> {
    cfg.validate()?;
    let n = 1usize << cfg.m;
    with_workers(cfg.workers, || {
        cfg.snr_grid_db
            .iter()
            .enumerate()
            .map(|(i, &snr)| {
                let sigma2 = cfg.sigma2(snr);
                let hits: u64 = (0..trials)
                    .into_par_iter()
                    .map(|t| {
                        let mut rng = trial_rng(cfg.seed ^ EFFNOISE_SALT, i, t);
                        analysis::eff_noise_exceed_prob(sigma2, n, 1, &mut rng).hits
                    })
                    .sum();
                (snr, Estimate::new(hits, trials))
            })
            .collect()
    })
}

const EFFNOISE_SALT: u64 = 0x9e37_79b9_7f4a_7c15;
const HIST_SALT: u64 = 0x2545_f491_4f6c_dd1d;
const HIST_CHUNK: u64 = 1 << 16;

/// Summary of effective-noise draws at one noise level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffNoiseStats {
    pub samples: u64,
    pub counts: Vec<u64>,
    pub mean: f64,
    pub min: f64,
    pub max: f64,
}

impl EffNoiseStats {
    pub fn bin_center(&self, k: usize) -> f64 {
        (k as f64 + 0.5) / self.counts.len() as f64
    }

    /// Center of the most populated bin (the first one on ties).
    pub fn mode(&self) -> f64 {
        let best = self
            .counts
            .iter()
            .enumerate()
            .fold(0, |b, (k, &c)| if c > self.counts[b] { k } else { b });
        self.bin_center(best)
    }
}

/// Draws `samples` effective-noise values at `sigma2` and bins them over
/// `[0, 1]`. Deterministic in `(seed, stream)` regardless of thread count.
pub fn effnoise_stats(sigma2: f64, samples: u64, bins: usize, seed: u64, stream: usize) -> EffNoiseStats {
    let bins = bins.max(1);
    let chunks = samples.div_ceil(HIST_CHUNK);
    let parts: Vec<(Vec<u64>, f64, f64, f64)> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = trial_rng(seed ^ HIST_SALT, stream, c);
            let len = HIST_CHUNK.min(samples - c * HIST_CHUNK);
            let mut counts = vec![0u64; bins];
            let (mut sum, mut lo, mut hi) = (0.0, f64::INFINITY, f64::NEG_INFINITY);
            for _ in 0..len {
                let e = analysis::eff_noise_sample(sigma2, &mut rng);
                counts[((e * bins as f64) as usize).min(bins - 1)] += 1;
                sum += e;
                lo = lo.min(e);
                hi = hi.max(e);
            }
            (counts, sum, lo, hi)
        })
        .collect();
    let mut counts = vec![0u64; bins];
    let (mut sum, mut min, mut max) = (0.0, f64::INFINITY, f64::NEG_INFINITY);
    for (c, s, lo, hi) in parts {
        counts.iter_mut().zip(c).for_each(|(a, b)| *a += b);
        sum += s;
        min = min.min(lo);
        max = max.max(hi);
    }
    EffNoiseStats {
        samples,
        counts,
        mean: if samples == 0 { 0.0 } else { sum / samples as f64 },
        min,
        max,
    }
}

/// [`effnoise_stats`] for each `(snr_db, σ²)` pair on `workers` threads.
pub fn effnoise_table(
    sigma2s: &[(f64, f64)],
    samples: u64,
    bins: usize,
    seed: u64,
    workers: usize,
) -> Result<Vec<(f64, EffNoiseStats)>, SimError> {
    with_workers(workers, || {
        sigma2s
            .iter()
            .enumerate()
            .map(|(i, &(snr, sigma2))| (snr, effnoise_stats(sigma2, samples, bins, seed, i)))
            .collect()
    })
}

/// Histogram rows (`effnoise_hist`, one per bin) plus an `effnoise_mean` row.
pub fn effnoise_rows(snr_db: f64, stats: &EffNoiseStats, m: u32, seed: u64) -> Vec<CsvRow> {
    let row = |kind: &str, value: f64, errors: u64, stderr: f64| CsvRow {
        snr_db,
        kind: kind.to_string(),
        value,
        trials: stats.samples,
        errors,
        stderr,
        m,
        decoder: "none".into(),
        epsilon: 0.0,
        seed,
    };
    let mut rows: Vec<CsvRow> = stats
        .counts
        .iter()
        .enumerate()
        .map(|(k, &c)| {
            let frac = c as f64 / stats.samples.max(1) as f64;
            row("effnoise_hist", stats.bin_center(k), c, binomial_stderr(frac, stats.samples))
        })
        .collect();
    rows.push(row("effnoise_mean", stats.mean, 0, 0.0));
    rows
}

/// One line of the results CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvRow {
    pub snr_db: f64,
    pub kind: String,
    pub value: f64,
    pub trials: u64,
    pub errors: u64,
    pub stderr: f64,
    pub m: u32,
    pub decoder: String,
    pub epsilon: f64,
    pub seed: u64,
}

pub const CSV_HEADER: [&str; 10] = [
    "snr_db", "kind", "value", "trials", "errors", "stderr", "m", "decoder", "epsilon", "seed",
];

impl CsvRow {
    fn record(&self) -> [String; 10] {
        [
            fmt_sig(self.snr_db),
            self.kind.clone(),
            fmt_sig(self.value),
            self.trials.to_string(),
            self.errors.to_string(),
            fmt_sig(self.stderr),
            self.m.to_string(),
            self.decoder.clone(),
            fmt_sig(self.epsilon),
            self.seed.to_string(),
        ]
    }
}

pub fn curve_rows(points: &[CurvePoint]) -> Vec<CsvRow> {
    let mut rows = Vec::with_capacity(points.len() * 3);
    for p in points {
        let base = |kind: &str, value: f64, errors: u64, stderr: f64| CsvRow {
            snr_db: p.snr_db,
            kind: kind.to_string(),
            value,
            trials: p.trials,
            errors,
            stderr,
            m: p.m,
            decoder: p.decoder.as_str().to_string(),
            epsilon: p.epsilon,
            seed: p.seed,
        };
        rows.push(base("cer", p.cer, p.codeword_errors, p.cer_stderr()));
        rows.push(base("ber", p.ber, p.bit_errors, p.ber_stderr()));
        let l0 = p.level0_cer();
        rows.push(base("cer_level0", l0, p.level0_errors, binomial_stderr(l0, p.trials)));
    }
    rows
}

/// Rows for closed-form bounds (no trials) at a given `m`.
pub fn bound_rows(curve: &BoundCurve, m: u32, seed: u64) -> Vec<CsvRow> {
    curve
        .grid
        .iter()
        .map(|&(snr_db, value)| CsvRow {
            snr_db,
            kind: curve.kind.as_str().to_string(),
            value,
            trials: 0,
            errors: 0,
            stderr: 0.0,
            m,
            decoder: "none".into(),
            epsilon: 0.0,
            seed,
        })
        .collect()
}

pub fn estimate_rows(kind: &str, points: &[(f64, Estimate)], m: u32, seed: u64) -> Vec<CsvRow> {
    points
        .iter()
        .map(|&(snr_db, e)| CsvRow {
            snr_db,
            kind: kind.to_string(),
            value: e.p,
            trials: e.trials,
            errors: e.hits,
            stderr: e.stderr,
            m,
            decoder: "none".into(),
            epsilon: 0.0,
            seed,
        })
        .collect()
}

pub fn write_csv<W: Write>(rows: &[CsvRow], w: W) -> Result<(), SimError> {
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(CSV_HEADER)?;
    for r in rows {
        wr.write_record(r.record())?;
    }
    wr.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(r: R) -> Result<Vec<CsvRow>, SimError> {
    let mut rd = csv::Reader::from_reader(r);
    let header: Vec<String> = rd.headers()?.iter().map(str::to_string).collect();
    if header != CSV_HEADER {
        return Err(SimError::Parse(format!("unexpected header {header:?}")));
    }
    Ok(rd.deserialize().collect::<Result<_, _>>()?)
}

/// Rebuilds curve points from the `cer`/`ber`/`cer_level0` rows of a CSV.
pub fn curve_points_from_rows(rows: &[CsvRow]) -> Result<Vec<CurvePoint>, SimError> {
    let mut out: Vec<CurvePoint> = Vec::new();
    for r in rows {
        let decoder: DecoderKind = match r.kind.as_str() {
            "cer" | "ber" | "cer_level0" => r.decoder.parse()?,
            _ => continue,
        };
        let idx = out
            .iter()
            .position(|p| p.snr_db == r.snr_db && p.decoder == decoder && p.m == r.m && p.seed == r.seed)
            .unwrap_or_else(|| {
                out.push(CurvePoint {
                    snr_db: r.snr_db,
                    cer: 0.0,
                    ber: 0.0,
                    trials: r.trials,
                    codeword_errors: 0,
                    bit_errors: 0,
                    level0_errors: 0,
                    seed: r.seed,
                    decoder,
                    m: r.m,
                    epsilon: r.epsilon,
                });
                out.len() - 1
            });
        let p = &mut out[idx];
        match r.kind.as_str() {
            "cer" => {
                p.codeword_errors = r.errors;
                p.cer = r.errors as f64 / r.trials as f64;
            }
            "ber" => {
                p.bit_errors = r.errors;
                p.ber = r.errors as f64 / (r.trials as f64 * bwlattice::bits_per_codeword(r.m) as f64);
            }
            _ => p.level0_errors = r.errors,
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub config: serde_json::Value,
    pub seed: u64,
    pub version: String,
    pub elapsed_s: f64,
    pub snr_convention: String,
}

impl Manifest {
    pub fn new<C: Serialize>(config: &C, seed: u64, convention: SnrConvention, started: Instant) -> Result<Self, SimError> {
        Ok(Manifest {
            config: serde_json::to_value(config)?,
            seed,
            version: version_string(),
            elapsed_s: started.elapsed().as_secs_f64(),
            snr_convention: convention.as_str().to_string(),
        })
    }
}

pub fn version_string() -> String {
    format!("bwcore-v{}", env!("CARGO_PKG_VERSION"))
}

/// Manifest path next to a CSV: `out.csv` → `out.manifest.json`.
pub fn manifest_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("manifest.json")
}

/// Writes `rows` to `path` and the manifest next to it.
pub fn emit(rows: &[CsvRow], manifest: &Manifest, path: &Path) -> Result<(), SimError> {
    let file = std::fs::File::create(path)?;
    write_csv(rows, io::BufWriter::new(file))?;
    let mpath = manifest_path(path);
    std::fs::write(&mpath, serde_json::to_string_pretty(manifest)? + "\n")?;
    Ok(())
}
