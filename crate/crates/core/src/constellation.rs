//! Gray-labeled constellations with unit mean symbol energy, bit mapping,
//! nearest-point hard slicing, and closed-form bit-error references for
//! uncoded detection in white Gaussian noise.
//!
//! Labelings are fixed so that symbol streams and dumped decision bits are
//! stable across releases:
//!
//! - QPSK: two bits per symbol, bit 0 selects the I sign, bit 1 the Q sign,
//!   a `0` bit meaning positive. `00` maps to `(1+j)/sqrt(2)`.
//! - 16-QAM: four bits per symbol; bits 0..2 Gray-code the I level and bits
//!   2..4 the Q level, with `00,01,11,10` mapping to amplitude levels
//!   `-3,-1,+1,+3` scaled by `1/sqrt(10)`.
//!
//! # Example
//!
//! ```
//! use noma_sim::constellation::Constellation;
//!
//! let qpsk = Constellation::qpsk();
//! let syms = qpsk.map_bits(&[0, 0, 1, 1]).unwrap();
//! let (point, bits) = qpsk.hard_slice(syms[1]).unwrap();
//! assert_eq!(bits, &[1, 1]);
//! assert_eq!(point, syms[1]);
//! ```

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Gaussian tail probability `Q(x)`.
pub fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

/// The constellation families the simulator understands.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConstellationKind {
    Qpsk,
    Qam16,
}

impl ConstellationKind {
    pub fn bits_per_symbol(self) -> usize {
        match self {
            ConstellationKind::Qpsk => 2,
            ConstellationKind::Qam16 => 4,
        }
    }
}

impl fmt::Display for ConstellationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConstellationKind::Qpsk => write!(f, "qpsk"),
            ConstellationKind::Qam16 => write!(f, "qam16"),
        }
    }
}

impl FromStr for ConstellationKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "qpsk" => Ok(ConstellationKind::Qpsk),
            "qam16" | "16qam" => Ok(ConstellationKind::Qam16),
            other => Err(Error::InvalidConfig(format!(
                "unknown constellation {other:?} (expected qpsk or qam16)"
            ))),
        }
    }
}

// Per-axis Gray code used by 16-QAM: bit pair -> level index 0..4.
// Pair values are read MSB-first, so 00,01,11,10 -> -3,-1,+1,+3.
const QAM16_PAIR_TO_LEVEL: [usize; 4] = [0, 1, 3, 2];
const QAM16_LEVELS: [f64; 4] = [-3.0, -1.0, 1.0, 3.0];

/// A fixed constellation: points, their bit labels, and lookup tables in
/// both directions. Point index equals the integer value of the label read
/// MSB-first, so `points[label]` is the mapped symbol.
#[derive(Debug, Clone)]
pub struct Constellation {
    kind: ConstellationKind,
    points: Vec<Complex64>,
    labels: Vec<Vec<u8>>,
    bits_per_symbol: usize,
}

impl Constellation {
    pub fn new(kind: ConstellationKind) -> Constellation {
        let bits_per_symbol = kind.bits_per_symbol();
        let size = 1usize << bits_per_symbol;
        let mut points = Vec::with_capacity(size);
        for label in 0..size as u32 {
            points.push(point_for_label(kind, label));
        }
        let labels = (0..size as u32)
            .map(|v| {
                (0..bits_per_symbol)
                    .map(|i| ((v >> (bits_per_symbol - 1 - i)) & 1) as u8)
                    .collect()
            })
            .collect();
        Constellation {
            kind,
            points,
            labels,
            bits_per_symbol,
        }
    }

    pub fn qpsk() -> Constellation {
        Constellation::new(ConstellationKind::Qpsk)
    }

    pub fn qam16() -> Constellation {
        Constellation::new(ConstellationKind::Qam16)
    }

    pub fn kind(&self) -> ConstellationKind {
        self.kind
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.bits_per_symbol
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn point(&self, index: usize) -> Complex64 {
        self.points[index]
    }

    /// Bit label of a point, MSB first.
    pub fn label_bits(&self, index: usize) -> &[u8] {
        &self.labels[index]
    }

    /// Label read as an integer; equals the point index by construction.
    pub fn label_value(&self, index: usize) -> u32 {
        index as u32
    }

    /// Maps a bit stream onto symbols, `bits_per_symbol` bits each, MSB first.
    pub fn map_bits(&self, bits: &[u8]) -> Result<Vec<Complex64>> {
        if bits.len() % self.bits_per_symbol != 0 {
            return Err(Error::DimensionMismatch {
                what: "bit stream not divisible by bits per symbol",
                expected: self.bits_per_symbol * (bits.len() / self.bits_per_symbol + 1),
                got: bits.len(),
            });
        }
        let mut out = Vec::with_capacity(bits.len() / self.bits_per_symbol);
        for group in bits.chunks_exact(self.bits_per_symbol) {
            let mut value = 0u32;
            for &bit in group {
                if bit > 1 {
                    return Err(Error::InvalidConfig(format!(
                        "bit stream contains {bit}; only 0 and 1 are allowed"
                    )));
                }
                value = (value << 1) | u32::from(bit);
            }
            out.push(self.points[value as usize]);
        }
        Ok(out)
    }

    /// Index of the nearest constellation point in Euclidean distance.
    /// Ties resolve to the lowest index.
    pub fn slice_index(&self, sample: Complex64) -> Result<usize> {
        if !sample.re.is_finite() || !sample.im.is_finite() {
            return Err(Error::NonFinite {
                what: "slicer input",
            });
        }
        let mut best = 0usize;
        let mut best_d = f64::INFINITY;
        for (i, p) in self.points.iter().enumerate() {
            let d = (sample - p).norm_sqr();
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
        Ok(best)
    }

    /// Nearest point and its bit label.
    pub fn hard_slice(&self, sample: Complex64) -> Result<(Complex64, &[u8])> {
        let idx = self.slice_index(sample)?;
        Ok((self.points[idx], &self.labels[idx]))
    }

    /// Minimum distance between distinct points.
    pub fn min_distance(&self) -> f64 {
        let mut best = f64::INFINITY;
        for (i, a) in self.points.iter().enumerate() {
            for b in &self.points[i + 1..] {
                best = best.min((a - b).norm());
            }
        }
        best
    }

    /// Largest |I| or |Q| component over all points; bounds the per-axis
    /// contribution one spread symbol can make to another carrier.
    pub fn max_axis_amplitude(&self) -> f64 {
        self.points
            .iter()
            .map(|p| p.re.abs().max(p.im.abs()))
            .fold(0.0, f64::max)
    }

    /// Closed-form bit error rate of this constellation alone in white
    /// Gaussian noise at the given per-bit SNR, Gray labeling assumed.
    /// 16-QAM uses the standard nearest-neighbor approximation.
    pub fn theoretical_ber(&self, ebn0_db: f64) -> f64 {
        let ebn0 = 10f64.powf(ebn0_db / 10.0);
        match self.kind {
            ConstellationKind::Qpsk => q_function((2.0 * ebn0).sqrt()),
            ConstellationKind::Qam16 => 0.75 * q_function((0.8 * ebn0).sqrt()),
        }
    }
}

fn point_for_label(kind: ConstellationKind, label: u32) -> Complex64 {
    match kind {
        ConstellationKind::Qpsk => {
            let scale = 1.0 / 2f64.sqrt();
            let re = if label & 0b10 == 0 { scale } else { -scale };
            let im = if label & 0b01 == 0 { scale } else { -scale };
            Complex64::new(re, im)
        }
        ConstellationKind::Qam16 => {
            let scale = 1.0 / 10f64.sqrt();
            let i_pair = ((label >> 2) & 0b11) as usize;
            let q_pair = (label & 0b11) as usize;
            Complex64::new(
                QAM16_LEVELS[QAM16_PAIR_TO_LEVEL[i_pair]] * scale,
                QAM16_LEVELS[QAM16_PAIR_TO_LEVEL[q_pair]] * scale,
            )
        }
    }
}

// ---------------------------------------------------------------------------
// tests
// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Independent Q(x) via composite Simpson quadrature of the normal
    /// density over [x, x+14]; the remaining tail is below 1e-40 relative
    /// to anything we compare against.
    fn q_quadrature(x: f64) -> f64 {
        let a = x;
        let b = x + 14.0;
        let n = 40_000usize; // even
        let h = (b - a) / n as f64;
        let phi = |t: f64| (-0.5 * t * t).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let mut acc = phi(a) + phi(b);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * phi(a + i as f64 * h);
        }
        acc * h / 3.0
    }

    #[test]
    fn q_function_matches_quadrature() {
        for &x in &[0.0, 0.5, 1.0, std::f64::consts::SQRT_2, 2.0, 3.0, 4.47] {
            let q = q_function(x);
            let oracle = q_quadrature(x);
            assert!(
                (q - oracle).abs() <= 1e-8 * oracle,
                "Q({x}) = {q}, quadrature gives {oracle}"
            );
        }
    }

    #[test]
    fn qpsk_ber_at_0db_is_q_of_sqrt2() {
        let ber = Constellation::qpsk().theoretical_ber(0.0);
        assert!((ber - 7.864960352514257e-2).abs() < 1e-12, "got {ber}");
    }

    #[test]
    fn qpsk_ber_reaches_1e5_near_9_59_db() {
        let qpsk = Constellation::qpsk();
        let ber = qpsk.theoretical_ber(9.59);
        assert!(
            (ber / 1.0e-5 - 1.0).abs() < 0.01,
            "BER at 9.59 dB should sit within 1% of 1e-5, got {ber}"
        );
        // Bisect the crossing itself as a second, sharper pin.
        let (mut lo, mut hi) = (9.0, 10.0);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if qpsk.theoretical_ber(mid) > 1.0e-5 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let crossing = 0.5 * (lo + hi);
        assert!(
            (crossing - 9.5878).abs() < 0.005,
            "1e-5 crossing at {crossing} dB"
        );
    }

    #[test]
    fn theoretical_ber_limits_and_monotonicity() {
        for c in [Constellation::qpsk(), Constellation::qam16()] {
            assert_eq!(c.theoretical_ber(f64::INFINITY), 0.0);
            let mut prev = c.theoretical_ber(-10.0);
            for step in 1..=60 {
                let cur = c.theoretical_ber(-10.0 + step as f64 * 0.5);
                assert!(cur < prev, "{} BER not decreasing", c.kind());
                prev = cur;
            }
        }
    }

    #[test]
    fn unit_mean_energy() {
        for c in [Constellation::qpsk(), Constellation::qam16()] {
            let mean: f64 =
                c.points().iter().map(|p| p.norm_sqr()).sum::<f64>() / c.len() as f64;
            assert!((mean - 1.0).abs() < 1e-12, "{}: mean energy {mean}", c.kind());
        }
    }

    #[test]
    fn qpsk_labels_select_quadrants() {
        let c = Constellation::qpsk();
        let s = 1.0 / 2f64.sqrt();
        let expect = [(s, s), (s, -s), (-s, s), (-s, -s)];
        for (idx, &(re, im)) in expect.iter().enumerate() {
            let p = c.point(idx);
            assert!((p.re - re).abs() < 1e-15 && (p.im - im).abs() < 1e-15);
        }
        assert_eq!(c.map_bits(&[0, 0]).unwrap()[0], c.point(0));
    }

    #[test]
    fn qam16_min_distance_and_axis_amplitude() {
        let c = Constellation::qam16();
        assert!((c.min_distance() - 2.0 / 10f64.sqrt()).abs() < 1e-12);
        assert!((c.max_axis_amplitude() - 3.0 / 10f64.sqrt()).abs() < 1e-12);
        let q = Constellation::qpsk();
        assert!((q.min_distance() - 2f64.sqrt()).abs() < 1e-12);
        assert!((q.max_axis_amplitude() - 1.0 / 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn qam16_labeling_is_gray() {
        // Every minimum-distance neighbor pair differs in exactly one bit.
        let c = Constellation::qam16();
        let dmin = c.min_distance();
        let mut pairs = 0;
        for i in 0..c.len() {
            for j in i + 1..c.len() {
                let d = (c.point(i) - c.point(j)).norm();
                if (d - dmin).abs() < 1e-9 {
                    let diff = (i as u32 ^ j as u32).count_ones();
                    assert_eq!(diff, 1, "points {i} and {j} differ in {diff} bits");
                    pairs += 1;
                }
            }
        }
        assert_eq!(pairs, 24); // 4x4 grid: 2*4*3 axis-adjacent pairs
    }

    #[test]
    fn ties_resolve_to_lowest_index() {
        let qpsk = Constellation::qpsk();
        assert_eq!(qpsk.slice_index(Complex64::new(0.0, 0.0)).unwrap(), 0);
        // Equidistant between labels 00 and 01 (positive I axis).
        assert_eq!(qpsk.slice_index(Complex64::new(0.9, 0.0)).unwrap(), 0);
        let qam = Constellation::qam16();
        assert_eq!(qam.slice_index(Complex64::new(0.0, 0.0)).unwrap(), 0b0101);
    }

    #[test]
    fn map_bits_rejects_bad_input() {
        let c = Constellation::qam16();
        assert!(matches!(
            c.map_bits(&[0, 1, 0]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            c.map_bits(&[0, 1, 0, 2]),
            Err(Error::InvalidConfig(_))
        ));
    }

    #[test]
    fn slicer_rejects_non_finite_samples() {
        let c = Constellation::qpsk();
        assert!(matches!(
            c.slice_index(Complex64::new(f64::NAN, 0.0)),
            Err(Error::NonFinite { .. })
        ));
        assert!(matches!(
            c.slice_index(Complex64::new(0.0, f64::INFINITY)),
            Err(Error::NonFinite { .. })
        ));
    }

    proptest! {
        #[test]
        fn map_then_slice_roundtrips(bits in proptest::collection::vec(0u8..2, 0..64)) {
            for c in [Constellation::qpsk(), Constellation::qam16()] {
                let usable = bits.len() - bits.len() % c.bits_per_symbol();
                let bits = &bits[..usable];
                let syms = c.map_bits(bits).unwrap();
                let mut recovered = Vec::new();
                for s in syms {
                    let (_, label) = c.hard_slice(s).unwrap();
                    recovered.extend_from_slice(label);
                }
                prop_assert_eq!(recovered.as_slice(), bits);
            }
        }

        #[test]
        fn slicing_survives_sub_half_distance_noise(
            idx in 0usize..16,
            dx in -0.99f64..0.99,
            dy in -0.99f64..0.99,
        ) {
            for c in [Constellation::qpsk(), Constellation::qam16()] {
                let idx = idx % c.len();
                let half = c.min_distance() / 2.0;
                // Scale the offset to stay strictly inside the decision region.
                let norm = (dx * dx + dy * dy).sqrt();
                let (dx, dy) = if norm > 0.0 {
                    let r = 0.99 * half * norm.min(1.0) / norm;
                    (dx * r, dy * r)
                } else {
                    (0.0, 0.0)
                };
                let sample = c.point(idx) + Complex64::new(dx, dy);
                prop_assert_eq!(c.slice_index(sample).unwrap(), idx);
            }
        }
    }
}
