//! Binary orthogonal spreading. A Sylvester-ordered Hadamard matrix supplies
//! M mutually orthogonal +/-1 sequences of length N; spreading scales by
//! `1/sqrt(N)` so each low-rate symbol keeps unit energy while contributing
//! only `1/N` of a carrier symbol's power to any single carrier. Despreading
//! applies the same scaled rows, so `despread(spread(b)) == b` and white
//! noise passes through with its variance unchanged.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest supported matrix order. The matrix is materialized eagerly
/// (N*N bytes), so the cap also bounds memory.
pub const MAX_ORDER: usize = 1 << 16;

/// Dense +/-1 matrix built by the doubling recursion
/// `H_1 = [1]`, `H_2k = [[H_k, H_k], [H_k, -H_k]]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HadamardMatrix {
    n: usize,
    entries: Vec<i8>, // row-major
}

impl HadamardMatrix {
    pub fn new(n: usize) -> Result<HadamardMatrix> {
        if n == 0 || !n.is_power_of_two() {
            return Err(Error::NotPowerOfTwo {
                what: "Hadamard order",
                got: n,
            });
        }
        if n > MAX_ORDER {
            return Err(Error::InvalidConfig(format!(
                "Hadamard order {n} exceeds the supported maximum {MAX_ORDER}"
            )));
        }
        let mut entries = vec![0i8; n * n];
        entries[0] = 1;
        let mut size = 1;
        while size < n {
            for i in 0..size {
                for j in 0..size {
                    let v = entries[i * n + j];
                    entries[i * n + (j + size)] = v;
                    entries[(i + size) * n + j] = v;
                    entries[(i + size) * n + (j + size)] = -v;
                }
            }
            size *= 2;
        }
        Ok(HadamardMatrix { n, entries })
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> &[i8] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    pub fn entry(&self, i: usize, j: usize) -> i8 {
        self.entries[i * self.n + j]
    }
}

/// Spreading geometry: N carriers, M active spread users, and which
/// contiguous block of matrix rows the users occupy.
///
/// `row_offset` exists because the first rows of a Sylvester matrix are
/// highly structured (row 0 is all ones), and which rows are active changes
/// how residual slicing errors recombine in the despreader even though the
/// single-carrier interference statistics are identical for every choice.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpreadingConfig {
    pub n: usize,
    pub m: usize,
    pub row_offset: usize,
}

impl SpreadingConfig {
    /// `m == 0` is allowed and denotes "no spread users".
    pub fn new(n: usize, m: usize, row_offset: usize) -> Result<SpreadingConfig> {
        if n == 0 || !n.is_power_of_two() {
            return Err(Error::NotPowerOfTwo {
                what: "carrier count n",
                got: n,
            });
        }
        if n > MAX_ORDER {
            return Err(Error::InvalidConfig(format!(
                "carrier count {n} exceeds the supported maximum {MAX_ORDER}"
            )));
        }
        if m > n {
            return Err(Error::InvalidConfig(format!(
                "spread user count m={m} exceeds carrier count n={n}"
            )));
        }
        if row_offset + m > n {
            return Err(Error::InvalidConfig(format!(
                "row_offset={row_offset} with m={m} overruns the {n} available rows"
            )));
        }
        Ok(SpreadingConfig { n, m, row_offset })
    }
}

/// Bound spreading operator: the matrix plus the active row window.
#[derive(Debug, Clone)]
pub struct Spreader {
    cfg: SpreadingConfig,
    matrix: HadamardMatrix,
    scale: f64,
}

impl Spreader {
    pub fn new(cfg: SpreadingConfig) -> Result<Spreader> {
        let matrix = HadamardMatrix::new(cfg.n)?;
        let scale = 1.0 / (cfg.n as f64).sqrt();
        Ok(Spreader { cfg, matrix, scale })
    }

    pub fn config(&self) -> SpreadingConfig {
        self.cfg
    }

    pub fn matrix(&self) -> &HadamardMatrix {
        &self.matrix
    }

    /// `out[j] = (1/sqrt(N)) * sum_k w[row_offset+k][j] * b[k]`
    pub fn spread(&self, b: &[Complex64]) -> Result<Vec<Complex64>> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.cfg.n];
        self.spread_into(b, &mut out)?;
        Ok(out)
    }

    pub fn spread_into(&self, b: &[Complex64], out: &mut [Complex64]) -> Result<()> {
        if b.len() != self.cfg.m {
            return Err(Error::DimensionMismatch {
                what: "spread input",
                expected: self.cfg.m,
                got: b.len(),
            });
        }
        if out.len() != self.cfg.n {
            return Err(Error::DimensionMismatch {
                what: "spread output",
                expected: self.cfg.n,
                got: out.len(),
            });
        }
        out.fill(Complex64::new(0.0, 0.0));
        for (k, &bk) in b.iter().enumerate() {
            let row = self.matrix.row(self.cfg.row_offset + k);
            for (o, &w) in out.iter_mut().zip(row) {
                if w > 0 {
                    *o += bk;
                } else {
                    *o -= bk;
                }
            }
        }
        for o in out.iter_mut() {
            *o *= self.scale;
        }
        Ok(())
    }

    /// `z[k] = (1/sqrt(N)) * sum_j w[row_offset+k][j] * y[j]`
    pub fn despread(&self, y: &[Complex64]) -> Result<Vec<Complex64>> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.cfg.m];
        self.despread_into(y, &mut out)?;
        Ok(out)
    }

    pub fn despread_into(&self, y: &[Complex64], out: &mut [Complex64]) -> Result<()> {
        if y.len() != self.cfg.n {
            return Err(Error::DimensionMismatch {
                what: "despread input",
                expected: self.cfg.n,
                got: y.len(),
            });
        }
        if out.len() != self.cfg.m {
            return Err(Error::DimensionMismatch {
                what: "despread output",
                expected: self.cfg.m,
                got: out.len(),
            });
        }
        for (k, o) in out.iter_mut().enumerate() {
            let row = self.matrix.row(self.cfg.row_offset + k);
            let mut acc = Complex64::new(0.0, 0.0);
            for (&w, &s) in row.iter().zip(y) {
                if w > 0 {
                    acc += s;
                } else {
                    acc -= s;
                }
            }
            *o = acc * self.scale;
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// tests
// ---------------------------------------------------------------------------
