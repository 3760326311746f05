//! Monte Carlo BER engine: random frames through compose -> time domain ->
//! AWGN -> detect, with per-class per-iteration error counts over an Eb/N0
//! sweep.
//!
//! Frames are processed in fixed-size blocks of 256. Each block draws its
//! own RNG stream keyed by (master_seed, point index, block index), so the
//! result is a pure function of configuration and seed: blocks may be
//! computed on any number of worker threads, but they are folded in block
//! order and the run stops at the first block where every tracked series
//! has enough errors (or its class hit the bit budget). Worker count can
//! change wall time, never output.
//!
//! Eb/N0 is per user class: one physical noise level yields both class
//! axes, offset by their bits per symbol. The sweep grid is uniform in the
//! reference class's axis; the other class's axis is reported alongside.

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::channel::add_noise_in_place;
use crate::error::{Error, Result};
use crate::framing::{Framer, FramingConfig};
use crate::receiver::{Receiver, ReceiverConfig, SicTrace};

pub const BLOCK_FRAMES: u64 = 256;

/// Which class's bit energy defines the sweep axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UserClass {
    A,
    B,
}

impl std::fmt::Display for UserClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            UserClass::A => write!(f, "a"),
            UserClass::B => write!(f, "b"),
        }
    }
}

impl std::str::FromStr for UserClass {
    type Err = Error;
    fn from_str(s: &str) -> Result<UserClass> {
        match s.to_ascii_lowercase().as_str() {
            "a" => Ok(UserClass::A),
            "b" => Ok(UserClass::B),
            other => Err(Error::InvalidConfig(format!(
                "unknown user class '{other}' (expected a or b)"
            ))),
        }
    }
}

/// Full experiment description. `sweep` values are Eb/N0 in dB for
/// `ref_class`; `f64::INFINITY` is accepted as a noise-free sentinel.
/// `max_bits` caps the bits simulated per class at one point.
#[derive(Debug, Clone)]
pub struct SimConfig {
    pub framing: FramingConfig,
    pub receiver: ReceiverConfig,
    pub sweep: Vec<f64>,
    pub ref_class: UserClass,
    pub master_seed: u64,
    pub min_errors: u64,
    pub max_bits: u64,
    pub gain_a: f64,
    pub gain_b: f64,
}

impl SimConfig {
    pub fn new(
        framing: FramingConfig,
        receiver: ReceiverConfig,
        sweep: Vec<f64>,
        ref_class: UserClass,
        master_seed: u64,
    ) -> Result<SimConfig> {
        let cfg = SimConfig {
            framing,
            receiver,
            sweep,
            ref_class,
            master_seed,
            min_errors: 200,
            max_bits: 100_000_000,
            gain_a: 1.0,
            gain_b: 1.0,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.receiver.validate()?;
        if self.framing.n != self.receiver.n || self.framing.m != self.receiver.m {
            return Err(Error::InvalidConfig(format!(
                "framing geometry ({}x{}) disagrees with receiver ({}x{})",
                self.framing.n, self.framing.m, self.receiver.n, self.receiver.m
            )));
        }
        if self.sweep.is_empty() {
            return Err(Error::InvalidConfig("empty Eb/N0 sweep".into()));
        }
        if self.sweep.iter().any(|v| v.is_nan()) {
            return Err(Error::InvalidConfig("NaN in Eb/N0 sweep".into()));
        }
        if self.sweep.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidConfig(
                "Eb/N0 sweep must be strictly increasing".into(),
            ));
        }
        if self.min_errors == 0 {
            return Err(Error::InvalidConfig("min_errors must be >= 1".into()));
        }
        if self.max_bits == 0 {
            return Err(Error::InvalidConfig("max_bits must be >= 1".into()));
        }
        if self.ref_class == UserClass::B && self.receiver.m == 0 {
            return Err(Error::InvalidConfig(
                "ref_class b needs at least one spread user".into(),
            ));
        }
        for (name, g) in [("gain_a", self.gain_a), ("gain_b", self.gain_b)] {
            if !g.is_finite() || g <= 0.0 {
                return Err(Error::InvalidConfig(format!(
                    "{name} must be finite and > 0, got {g}"
                )));
            }
        }
        Ok(())
    }

    fn eb(&self, class: UserClass) -> f64 {
        match class {
            UserClass::A => {
                self.gain_a * self.gain_a / self.receiver.const_a.bits_per_symbol() as f64
            }
            UserClass::B => {
                self.gain_b * self.gain_b / self.receiver.const_b.bits_per_symbol() as f64
            }
        }
    }
}

/// Bit and error totals for one class; `errors[i]` counts iteration `i+1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassTally {
    pub bits: u64,
    pub errors: Vec<u64>,
}

impl ClassTally {
    pub fn ber(&self, iteration: usize) -> f64 {
        if self.bits == 0 {
            0.0
        } else {
            self.errors[iteration] as f64 / self.bits as f64
        }
    }
}

/// Everything measured at one sweep point. Class-B fields are `None` when
/// no spread users are configured.
#[derive(Debug, Clone, PartialEq)]
pub struct BerRecord {
    pub ebn0_db_a: f64,
    pub ebn0_db_b: Option<f64>,
    pub frames: u64,
    pub class_a: ClassTally,
    pub class_b: Option<ClassTally>,
    pub theory_a: f64,
    pub theory_b: Option<f64>,
    /// True when some series stopped at the bit budget short of
    /// `min_errors`; its BER estimate is then resolution-limited.
    pub capped: bool,
}

fn splitmix_next(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent, reproducible stream for one (point, block) cell.
fn stream_rng(master_seed: u64, point: u64, block: u64) -> ChaCha8Rng {
    let mut state = master_seed
        .wrapping_add(point.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(block.wrapping_mul(0xBF58_476D_1CE4_E5B9));
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix_next(&mut state).to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

#[inline]
fn draw_bit<R: Rng + ?Sized>(rng: &mut R) -> u16 {
    rng.random_range(0..2u16)
}

/// MSB-first bit draw; the resulting index is the symbol's bit label.
#[inline]
fn draw_index<R: Rng + ?Sized>(rng: &mut R, bits_per_symbol: usize) -> u16 {
    let mut idx = 0u16;
    for _ in 0..bits_per_symbol {
        idx = (idx << 1) | draw_bit(rng);
    }
    idx
}

#[inline]
fn bit_errors(tx: u16, rx: u16) -> u64 {
    u64::from((tx ^ rx).count_ones())
}

struct PointCtx<'a> {
    cfg: &'a SimConfig,
    framer: &'a Framer,
    receiver: &'a Receiver,
    scaled_a: Vec<Complex64>,
    scaled_b: Vec<Complex64>,
    n0: f64,
    point_index: u64,
}

struct BlockTally {
    frames: u64,
    a_errors: Vec<u64>,
    b_errors: Vec<u64>,
}

fn run_block(ctx: &PointCtx<'_>, block: u64) -> Result<BlockTally> {
    let cfg = ctx.cfg;
    let (n, m) = (cfg.receiver.n, cfg.receiver.m);
    let (bps_a, bps_b) = (
        cfg.receiver.const_a.bits_per_symbol(),
        cfg.receiver.const_b.bits_per_symbol(),
    );
    let iters = cfg.receiver.iterations;
    let mut rng = stream_rng(cfg.master_seed, ctx.point_index, block);
    let mut tally = BlockTally {
        frames: BLOCK_FRAMES,
        a_errors: vec![0; iters],
        b_errors: vec![0; iters],
    };
    let zero = Complex64::new(0.0, 0.0);
    let mut a_tx = vec![0u16; n];
    let mut b_tx = vec![0u16; m];
    let mut a_sym = vec![zero; n];
    let mut b_sym = vec![zero; m];
    let mut x = vec![zero; n];
    let mut time = Vec::new();
    let mut rx = Vec::new();
    let mut scratch = Vec::new();
    let mut trace = SicTrace::for_config(&cfg.receiver);
    for _ in 0..BLOCK_FRAMES {
        for j in 0..n {
            a_tx[j] = draw_index(&mut rng, bps_a);
            a_sym[j] = ctx.scaled_a[a_tx[j] as usize];
        }
        for k in 0..m {
            b_tx[k] = draw_index(&mut rng, bps_b);
            b_sym[k] = ctx.scaled_b[b_tx[k] as usize];
        }
        ctx.framer.compose_into(&a_sym, &b_sym, &mut x)?;
        ctx.framer.to_time_into(&x, &mut time, &mut scratch)?;
        add_noise_in_place(&mut time, ctx.n0, &mut rng);
        ctx.framer.from_time_into(&time, &mut rx, &mut scratch)?;
        ctx.receiver.detect_into(&rx, &mut trace)?;
        for it in 0..iters {
            let mut e = 0u64;
            for j in 0..n {
                e += bit_errors(a_tx[j], trace.a_idx[it][j]);
            }
            tally.a_errors[it] += e;
            let mut e = 0u64;
            for k in 0..m {
                e += bit_errors(b_tx[k], trace.b_idx[it][k]);
            }
            tally.b_errors[it] += e;
        }
    }
    Ok(tally)
}

struct Accum {
    frames: u64,
    a_errors: Vec<u64>,
    b_errors: Vec<u64>,
    payload_a: u64,
    payload_b: u64,
}

impl Accum {
    fn fold(&mut self, t: &BlockTally) {
        self.frames += t.frames;
        for (acc, e) in self.a_errors.iter_mut().zip(&t.a_errors) {
            *acc += e;
        }
        for (acc, e) in self.b_errors.iter_mut().zip(&t.b_errors) {
            *acc += e;
        }
    }

    fn bits_a(&self) -> u64 {
        self.frames * self.payload_a
    }

    fn bits_b(&self) -> u64 {
        self.frames * self.payload_b
    }

    fn class_done(bits: u64, errors: &[u64], min_errors: u64, max_bits: u64) -> bool {
        bits >= max_bits || errors.iter().all(|&e| e >= min_errors)
    }

    fn done(&self, min_errors: u64, max_bits: u64) -> bool {
        let a = Self::class_done(self.bits_a(), &self.a_errors, min_errors, max_bits);
        let b = self.payload_b == 0
            || Self::class_done(self.bits_b(), &self.b_errors, min_errors, max_bits);
        a && b
    }

    fn capped(&self, min_errors: u64) -> bool {
        self.a_errors.iter().any(|&e| e < min_errors)
            || (self.payload_b > 0 && self.b_errors.iter().any(|&e| e < min_errors))
    }
}

/// Simulates one sweep point with an explicit point index (the index picks
/// the RNG stream family; `run_sweep` uses the position in the sweep).
pub fn run_point_at(cfg: &SimConfig, ebn0_db: f64, point_index: usize) -> Result<BerRecord> {
    cfg.validate()?;
    if ebn0_db.is_nan() {
        return Err(Error::NonFinite { what: "ebn0_db" });
    }
    let framer = Framer::new(cfg.framing, cfg.receiver.spreading)?;
    let receiver = Receiver::new(cfg.receiver.clone())?;

    let eb_ref = cfg.eb(cfg.ref_class);
    let n0 = if ebn0_db.is_infinite() {
        0.0
    } else {
        eb_ref / 10f64.powf(ebn0_db / 10.0)
    };
    let axis = |class: UserClass| -> f64 {
        if ebn0_db.is_infinite() {
            f64::INFINITY
        } else if class == cfg.ref_class {
            ebn0_db
        } else {
            ebn0_db + 10.0 * (cfg.eb(class) / eb_ref).log10()
        }
    };
    let ebn0_db_a = axis(UserClass::A);
    let has_b = cfg.receiver.m > 0;
    let ebn0_db_b = has_b.then(|| axis(UserClass::B));

    let scaled_a = cfg
        .receiver
        .const_a
        .points()
        .iter()
        .map(|p| p * cfg.gain_a)
        .collect();
    let scaled_b = cfg
        .receiver
        .const_b
        .points()
        .iter()
        .map(|p| p * cfg.gain_b)
        .collect();
    let ctx = PointCtx {
        cfg,
        framer: &framer,
        receiver: &receiver,
        scaled_a,
        scaled_b,
        n0,
        point_index: point_index as u64,
    };

    let payload_a = (cfg.receiver.n * cfg.receiver.const_a.bits_per_symbol()) as u64;
    let payload_b = (cfg.receiver.m * cfg.receiver.const_b.bits_per_symbol()) as u64;
    let mut acc = Accum {
        frames: 0,
        a_errors: vec![0; cfg.receiver.iterations],
        b_errors: vec![0; cfg.receiver.iterations],
        payload_a,
        payload_b,
    };

    let wave = (rayon::current_num_threads().max(1) * 2).min(64) as u64;
    let mut next_block = 0u64;
    'outer: loop {
        let tallies: Vec<BlockTally> = (next_block..next_block + wave)
            .into_par_iter()
            .map(|blk| run_block(&ctx, blk))
            .collect::<Result<_>>()?;
        // Fold strictly in block order so the stopping block, and with it
        // the totals, cannot depend on scheduling.
        for t in &tallies {
            acc.fold(t);
            if acc.done(cfg.min_errors, cfg.max_bits) {
                break 'outer;
            }
        }
        next_block += wave;
    }

    Ok(BerRecord {
        ebn0_db_a,
        ebn0_db_b,
        frames: acc.frames,
        theory_a: cfg.receiver.const_a.theoretical_ber(ebn0_db_a),
        theory_b: ebn0_db_b.map(|db| cfg.receiver.const_b.theoretical_ber(db)),
        class_a: ClassTally {
            bits: acc.bits_a(),
            errors: acc.a_errors.clone(),
        },
        class_b: has_b.then(|| ClassTally {
            bits: acc.bits_b(),
            errors: acc.b_errors.clone(),
        }),
        capped: acc.capped(cfg.min_errors),
    })
}

/// One-off point, seeded like the first sweep entry.
pub fn run_point(cfg: &SimConfig, ebn0_db: f64) -> Result<BerRecord> {
    run_point_at(cfg, ebn0_db, 0)
}

/// Full sweep; element `i` is seeded by sweep position, so records are
/// independent of which other points exist only in their own streams.
pub fn run_sweep(cfg: &SimConfig) -> Result<Vec<BerRecord>> {
    cfg.validate()?;
    cfg.sweep
        .iter()
        .enumerate()
        .map(|(i, &db)| run_point_at(cfg, db, i))
        .collect()
}

// ---------------------------------------------------------------------------
// tests
// ---------------------------------------------------------------------------
