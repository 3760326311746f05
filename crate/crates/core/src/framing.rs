//! Frame composition and the transmit-side round trip between the carrier
//! domain and the time domain.
//!
//! A frame carries N class-A symbols (one per carrier) plus up to M spread
//! class-B symbols added on top: `x[j] = a[j] + spread(b)[j]`. In multicarrier
//! mode the composite is moved to the time domain with a unitary inverse DFT
//! and guarded by a cyclic prefix; "tdma" mode bypasses the transform so the
//! same receiver chain can run on bare carrier-domain symbols.
//!
//! Both transform directions scale by `1/sqrt(N)`, so symbol energy is the
//! same in either domain and a white-noise channel produces the same
//! per-sample noise variance in both.

use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::hadamard::{Spreader, SpreadingConfig};

/// Whether frames pass through the multicarrier transform.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FramingMode {
    Ofdma,
    Tdma,
}

impl std::fmt::Display for FramingMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FramingMode::Ofdma => write!(f, "ofdma"),
            FramingMode::Tdma => write!(f, "tdma"),
        }
    }
}

impl FromStr for FramingMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ofdma" => Ok(FramingMode::Ofdma),
            "tdma" => Ok(FramingMode::Tdma),
            other => Err(Error::InvalidConfig(format!(
                "unknown mode {other:?} (expected ofdma or tdma)"
            ))),
        }
    }
}

/// Frame geometry. `cp_len` defaults to `n/8` in multicarrier mode and is
/// pinned to 0 in tdma mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FramingConfig {
    pub n: usize,
    pub m: usize,
    pub cp_len: usize,
    pub mode: FramingMode,
}

impl FramingConfig {
    pub fn new(n: usize, m: usize, cp_len: Option<usize>, mode: FramingMode) -> Result<FramingConfig> {
        if n == 0 || !n.is_power_of_two() {
            return Err(Error::NotPowerOfTwo {
                what: "carrier count n",
                got: n,
            });
        }
        if m > n {
            return Err(Error::InvalidConfig(format!(
                "spread user count m={m} exceeds carrier count n={n}"
            )));
        }
        let cp_len = match (mode, cp_len) {
            (FramingMode::Tdma, None) => 0,
            (FramingMode::Tdma, Some(0)) => 0,
            (FramingMode::Tdma, Some(c)) => {
                return Err(Error::InvalidConfig(format!(
                    "tdma mode carries no cyclic prefix, got cp_len={c}"
                )));
            }
            (FramingMode::Ofdma, None) => n / 8,
            (FramingMode::Ofdma, Some(c)) => c,
        };
        if cp_len > n {
            return Err(Error::InvalidConfig(format!(
                "cp_len={cp_len} exceeds the symbol length n={n}"
            )));
        }
        Ok(FramingConfig {
            n,
            m,
            cp_len,
            mode,
        })
    }

    /// Samples per transmitted frame.
    pub fn time_len(&self) -> usize {
        self.n + self.cp_len
    }
}

/// One composed frame: the carrier-domain inputs and their superposition.
#[derive(Debug, Clone, PartialEq)]
pub struct NomaFrame {
    pub a: Vec<Complex64>,
    pub b: Vec<Complex64>,
    pub x: Vec<Complex64>,
}

/// Bound frame operator: geometry, spreading rows, and planned transforms.
/// Immutable and shareable across threads.
pub struct Framer {
    cfg: FramingConfig,
    spreader: Spreader,
    fft_fwd: Arc<dyn Fft<f64>>,
    fft_inv: Arc<dyn Fft<f64>>,
    scale: f64,
}

impl Framer {
    pub fn new(cfg: FramingConfig, spreading: SpreadingConfig) -> Result<Framer> {
        if spreading.n != cfg.n || spreading.m != cfg.m {
            return Err(Error::InvalidConfig(format!(
                "framing ({}x{}) and spreading ({}x{}) geometry disagree",
                cfg.n, cfg.m, spreading.n, spreading.m
            )));
        }
        let spreader = Spreader::new(spreading)?;
        let mut planner = FftPlanner::new();
        let fft_fwd = planner.plan_fft_forward(cfg.n);
        let fft_inv = planner.plan_fft_inverse(cfg.n);
        Ok(Framer {
            cfg,
            spreader,
            fft_fwd,
            fft_inv,
            scale: 1.0 / (cfg.n as f64).sqrt(),
        })
    }

    pub fn config(&self) -> FramingConfig {
        self.cfg
    }

    pub fn spreader(&self) -> &Spreader {
        &self.spreader
    }

    /// `x = a + spread(b)`, keeping copies of the inputs alongside.
    pub fn compose(&self, a: &[Complex64], b: &[Complex64]) -> Result<NomaFrame> {
        let mut x = vec![Complex64::new(0.0, 0.0); self.cfg.n];
        self.compose_into(a, b, &mut x)?;
        Ok(NomaFrame {
            a: a.to_vec(),
            b: b.to_vec(),
            x,
        })
    }

    pub fn compose_into(
        &self,
        a: &[Complex64],
        b: &[Complex64],
        x: &mut [Complex64],
    ) -> Result<()> {
        if a.len() != self.cfg.n {
            return Err(Error::DimensionMismatch {
                what: "class A symbol vector",
                expected: self.cfg.n,
                got: a.len(),
            });
        }
        self.spreader.spread_into(b, x)?;
        for (xi, ai) in x.iter_mut().zip(a) {
            *xi += ai;
        }
        Ok(())
    }

    /// Carrier domain to transmit samples: unitary inverse DFT plus cyclic
    /// prefix in multicarrier mode, identity copy in tdma mode.
    pub fn to_time(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        let mut out = Vec::new();
        let mut scratch = Vec::new();
        self.to_time_into(x, &mut out, &mut scratch)?;
        Ok(out)
    }

    pub fn to_time_into(
        &self,
        x: &[Complex64],
        out: &mut Vec<Complex64>,
        scratch: &mut Vec<Complex64>,
    ) -> Result<()> {
        if x.len() != self.cfg.n {
            return Err(Error::DimensionMismatch {
                what: "carrier-domain frame",
                expected: self.cfg.n,
                got: x.len(),
            });
        }
        if self.cfg.mode == FramingMode::Tdma {
            out.clear();
            out.extend_from_slice(x);
            return Ok(());
        }
        let (n, cp) = (self.cfg.n, self.cfg.cp_len);
        out.clear();
        out.resize(n + cp, Complex64::new(0.0, 0.0));
        out[cp..].copy_from_slice(x);
        scratch.resize(self.fft_inv.get_inplace_scratch_len(), Complex64::new(0.0, 0.0));
        self.fft_inv.process_with_scratch(&mut out[cp..], scratch);
        for s in out[cp..].iter_mut() {
            *s *= self.scale;
        }
        let (head, body) = out.split_at_mut(cp);
        head.copy_from_slice(&body[n - cp..]);
        Ok(())
    }

    /// Receive samples back to the carrier domain: drop the prefix, unitary
    /// forward DFT. Identity copy in tdma mode.
    pub fn from_time(&self, s: &[Complex64]) -> Result<Vec<Complex64>> {
        let mut out = Vec::new();
        let mut scratch = Vec::new();
        self.from_time_into(s, &mut out, &mut scratch)?;
        Ok(out)
    }

    pub fn from_time_into(
        &self,
        s: &[Complex64],
        out: &mut Vec<Complex64>,
        scratch: &mut Vec<Complex64>,
    ) -> Result<()> {
        if self.cfg.mode == FramingMode::Tdma {
            if s.len() != self.cfg.n {
                return Err(Error::DimensionMismatch {
                    what: "tdma receive frame",
                    expected: self.cfg.n,
                    got: s.len(),
                });
            }
            out.clear();
            out.extend_from_slice(s);
            return Ok(());
        }
        if s.len() != self.cfg.time_len() {
            return Err(Error::DimensionMismatch {
                what: "time-domain frame",
                expected: self.cfg.time_len(),
                got: s.len(),
            });
        }
        out.clear();
        out.extend_from_slice(&s[self.cfg.cp_len..]);
        scratch.resize(self.fft_fwd.get_inplace_scratch_len(), Complex64::new(0.0, 0.0));
        self.fft_fwd.process_with_scratch(out, scratch);
        for v in out.iter_mut() {
            *v *= self.scale;
        }
        Ok(())
    }
}

/// Dumps a sample stream for external inspection: `<base>.iq` holds
/// little-endian interleaved f32 I/Q pairs, `<base>.hdr` a small text header.
pub fn write_iq_dump<P: AsRef<Path>>(
    base: P,
    samples: &[Complex64],
    cfg: &FramingConfig,
) -> std::io::Result<()> {
    let iq_path = path_with_suffix(base.as_ref(), ".iq");
    let hdr_path = path_with_suffix(base.as_ref(), ".hdr");
    let mut bytes = Vec::with_capacity(samples.len() * 8);
    for s in samples {
        bytes.extend_from_slice(&(s.re as f32).to_le_bytes());
        bytes.extend_from_slice(&(s.im as f32).to_le_bytes());
    }
    std::fs::write(iq_path, bytes)?;
    let mut hdr = std::fs::File::create(hdr_path)?;
    write!(
        hdr,
        "n={}\nm={}\ncp_len={}\nmode={}\n",
        cfg.n, cfg.m, cfg.cp_len, cfg.mode
    )?;
    Ok(())
}

fn path_with_suffix(base: &Path, suffix: &str) -> PathBuf {
    let mut os = base.as_os_str().to_owned();
    os.push(suffix);
    PathBuf::from(os)
}

// ---------------------------------------------------------------------------
// tests
// ---------------------------------------------------------------------------
