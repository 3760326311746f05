//! Iterative hard-decision interference cancellation.
//!
//! The received carrier-domain frame is `r = a + spread(b) + noise`. The
//! first pass slices `r` directly for the class-A symbols (the spread
//! overlay is weak per carrier), subtracts those decisions, and despreads
//! the residual `y = r - a_hat` to decide the class-B symbols. Each later
//! pass rebuilds the overlay from the previous class-B decisions, cancels
//! it (`v = r - spread(b_hat)`), re-slices class A from the cleaner signal,
//! and repeats the residual despread. A couple of passes are enough when
//! the spread load is light; the detector reports every pass so callers can
//! track convergence.

use std::fmt;

use num_complex::Complex64;

use crate::constellation::Constellation;
use crate::error::{Error, Result};
use crate::hadamard::{Spreader, SpreadingConfig};

/// Detector parameters. `n`/`m` mirror the spreading geometry and are
/// revalidated when a [`Receiver`] is built.
#[derive(Debug, Clone)]
pub struct ReceiverConfig {
    pub iterations: usize,
    pub n: usize,
    pub m: usize,
    pub const_a: Constellation,
    pub const_b: Constellation,
    pub spreading: SpreadingConfig,
}

impl ReceiverConfig {
    pub fn new(
        iterations: usize,
        const_a: Constellation,
        const_b: Constellation,
        spreading: SpreadingConfig,
    ) -> Result<ReceiverConfig> {
        let cfg = ReceiverConfig {
            iterations,
            n: spreading.n,
            m: spreading.m,
            const_a,
            const_b,
            spreading,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::InvalidConfig(
                "detector needs at least one iteration".into(),
            ));
        }
        if self.n != self.spreading.n || self.m != self.spreading.m {
            return Err(Error::InvalidConfig(format!(
                "receiver geometry ({}x{}) disagrees with spreading ({}x{})",
                self.n, self.m, self.spreading.n, self.spreading.m
            )));
        }
        SpreadingConfig::new(self.spreading.n, self.spreading.m, self.spreading.row_offset)?;
        Ok(())
    }
}

/// Full decision history of one detection run.
///
/// `a_idx`/`b_idx` hold constellation point indices per iteration (index
/// equals the bit label read as an integer); `a_hat`/`b_hat` the same
/// decisions as symbols. `v`, `y`, `z` are the final iteration's class-A
/// slicer input, decision residual, and despread output; on a one-iteration
/// run `v` is the received frame itself since nothing has been cancelled yet.
#[derive(Debug, Clone, PartialEq)]
pub struct SicTrace {
    pub a_idx: Vec<Vec<u16>>,
    pub b_idx: Vec<Vec<u16>>,
    pub a_hat: Vec<Vec<Complex64>>,
    pub b_hat: Vec<Vec<Complex64>>,
    pub v: Vec<Complex64>,
    pub y: Vec<Complex64>,
    pub z: Vec<Complex64>,
}

impl SicTrace {
    pub fn for_config(cfg: &ReceiverConfig) -> SicTrace {
        let zero = Complex64::new(0.0, 0.0);
        SicTrace {
            a_idx: vec![vec![0; cfg.n]; cfg.iterations],
            b_idx: vec![vec![0; cfg.m]; cfg.iterations],
            a_hat: vec![vec![zero; cfg.n]; cfg.iterations],
            b_hat: vec![vec![zero; cfg.m]; cfg.iterations],
            v: vec![zero; cfg.n],
            y: vec![zero; cfg.n],
            z: vec![zero; cfg.m],
        }
    }

    pub fn iterations(&self) -> usize {
        self.a_idx.len()
    }

    /// One line per iteration with the decision bits packed big-endian into
    /// hex bytes (zero-padded at the tail), for compact per-frame logging.
    pub fn dump_text(&self, cfg: &ReceiverConfig) -> String {
        let mut out = String::new();
        for it in 0..self.iterations() {
            let a_hex = pack_bits_hex(&self.a_idx[it], &cfg.const_a);
            let b_hex = pack_bits_hex(&self.b_idx[it], &cfg.const_b);
            out.push_str(&format!("iter={} a={} b={}\n", it + 1, a_hex, b_hex));
        }
        out
    }
}

fn pack_bits_hex(indices: &[u16], c: &Constellation) -> String {
    let bps = c.bits_per_symbol();
    let total_bits = indices.len() * bps;
    let mut bytes = vec![0u8; total_bits.div_ceil(8)];
    let mut pos = 0usize;
    for &idx in indices {
        for bit in 0..bps {
            let b = (idx >> (bps - 1 - bit)) & 1;
            if b != 0 {
                bytes[pos / 8] |= 0x80 >> (pos % 8);
            }
            pos += 1;
        }
    }
    let mut s = String::with_capacity(bytes.len() * 2);
    for byte in bytes {
        s.push_str(&format!("{byte:02x}"));
    }
    s
}

/// Eye-opening diagnostic: compares the worst-case per-axis overlay
/// interference against half the class-A minimum distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverloadMargin {
    pub n: usize,
    pub m: usize,
    pub sqrt_n: f64,
    /// `m * max|b axis| / sqrt(n)`: the largest shift the overlay can put
    /// on one axis of one carrier.
    pub worst_case_interference: f64,
    pub half_min_distance_a: f64,
    /// True when first-pass class-A decisions stay exact in the absence of
    /// noise, i.e. the interference never reaches the decision boundary.
    pub eye_open: bool,
    /// True when the spread load has reached `sqrt(n)`.
    pub overloaded: bool,
}

impl fmt::Display for OverloadMargin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "n:                       {}", self.n)?;
        writeln!(f, "m:                       {}", self.m)?;
        writeln!(f, "sqrt_n:                  {:.6}", self.sqrt_n)?;
        writeln!(
            f,
            "worst_case_interference: {:.6}",
            self.worst_case_interference
        )?;
        writeln!(f, "half_min_distance_a:     {:.6}", self.half_min_distance_a)?;
        writeln!(f, "eye_open:                {}", self.eye_open)?;
        writeln!(f, "overloaded:              {}", self.overloaded)?;
        if self.overloaded {
            writeln!(
                f,
                "warning: m has reached sqrt(n); first-pass class-A decisions \
                 will err even without noise"
            )?;
        }
        Ok(())
    }
}

/// Worst-case interference arithmetic for a detector configuration.
pub fn overload_margin(cfg: &ReceiverConfig) -> OverloadMargin {
    let sqrt_n = (cfg.n as f64).sqrt();
    let worst = cfg.m as f64 * cfg.const_b.max_axis_amplitude() / sqrt_n;
    let half = cfg.const_a.min_distance() / 2.0;
    OverloadMargin {
        n: cfg.n,
        m: cfg.m,
        sqrt_n,
        worst_case_interference: worst,
        half_min_distance_a: half,
        eye_open: worst < half,
        overloaded: cfg.m * cfg.m >= cfg.n,
    }
}

/// Bound detector: configuration plus the spreading operator.
#[derive(Debug, Clone)]
pub struct Receiver {
    cfg: ReceiverConfig,
    spreader: Spreader,
}

impl Receiver {
    pub fn new(cfg: ReceiverConfig) -> Result<Receiver> {
        cfg.validate()?;
        let spreader = Spreader::new(cfg.spreading)?;
        Ok(Receiver { cfg, spreader })
    }

    pub fn config(&self) -> &ReceiverConfig {
        &self.cfg
    }

    pub fn spreader(&self) -> &Spreader {
        &self.spreader
    }

    pub fn margin(&self) -> OverloadMargin {
        overload_margin(&self.cfg)
    }

    /// Runs the configured number of cancellation passes on one received
    /// carrier-domain frame.
    pub fn detect(&self, r: &[Complex64]) -> Result<SicTrace> {
        let mut trace = SicTrace::for_config(&self.cfg);
        self.detect_into(r, &mut trace)?;
        Ok(trace)
    }

    /// Allocation-free variant; `trace` must come from
    /// [`SicTrace::for_config`] with this receiver's configuration.
    pub fn detect_into(&self, r: &[Complex64], trace: &mut SicTrace) -> Result<()> {
        let (n, m) = (self.cfg.n, self.cfg.m);
        if r.len() != n {
            return Err(Error::DimensionMismatch {
                what: "received frame",
                expected: n,
                got: r.len(),
            });
        }
        if trace.iterations() != self.cfg.iterations || trace.v.len() != n || trace.z.len() != m {
            return Err(Error::InvalidConfig(
                "trace buffers do not match the receiver configuration".into(),
            ));
        }
        for it in 0..self.cfg.iterations {
            if it == 0 {
                trace.v.copy_from_slice(r);
            } else {
                // Cancel the overlay rebuilt from the previous class-B pass.
                self.spreader.spread_into(&trace.b_hat[it - 1], &mut trace.v)?;
                for (vj, rj) in trace.v.iter_mut().zip(r) {
                    *vj = rj - *vj;
                }
            }
            for j in 0..n {
                let idx = self.cfg.const_a.slice_index(trace.v[j])?;
                trace.a_idx[it][j] = idx as u16;
                trace.a_hat[it][j] = self.cfg.const_a.point(idx);
            }
            for ((yj, rj), aj) in trace.y.iter_mut().zip(r).zip(&trace.a_hat[it]) {
                *yj = rj - aj;
            }
            self.spreader.despread_into(&trace.y, &mut trace.z)?;
            for k in 0..m {
                let idx = self.cfg.const_b.slice_index(trace.z[k])?;
                trace.b_idx[it][k] = idx as u16;
                trace.b_hat[it][k] = self.cfg.const_b.point(idx);
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// tests
// ---------------------------------------------------------------------------
