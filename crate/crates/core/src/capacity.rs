//! Two-user rate arithmetic: superposed transmission with ordered decoding
//! versus an orthogonal split of the same resources.
//!
//! User 1 is the strong (unattenuated) user and is decoded first; user 2's
//! channel applies a power attenuation `g = 10^(-atten2_db/10)`. Rates are
//! spectral efficiencies in bits/s/Hz at unit bandwidth.

use crate::error::{Error, Result};

/// Operating point: power share `alpha` for user 1, total SNR `p_over_n0`,
/// and user-2 power attenuation in dB (0 = symmetric channels).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerSplit {
    pub alpha: f64,
    pub p_over_n0: f64,
    pub atten2_db: f64,
}

impl PowerSplit {
    pub fn new(alpha: f64, p_over_n0: f64, atten2_db: f64) -> Result<PowerSplit> {
        if !alpha.is_finite() || !(0.0..=1.0).contains(&alpha) {
            return Err(Error::InvalidConfig(format!(
                "alpha must lie in [0, 1], got {alpha}"
            )));
        }
        if !p_over_n0.is_finite() || p_over_n0 < 0.0 {
            return Err(Error::InvalidConfig(format!(
                "p_over_n0 must be finite and >= 0, got {p_over_n0}"
            )));
        }
        if !atten2_db.is_finite() || atten2_db < 0.0 {
            return Err(Error::InvalidConfig(format!(
                "atten2_db must be finite and >= 0, got {atten2_db}"
            )));
        }
        Ok(PowerSplit {
            alpha,
            p_over_n0,
            atten2_db,
        })
    }

    /// Same operating point with the attenuation given as a linear power
    /// division factor (factor 4 means user 2 receives a quarter of the
    /// power, i.e. 6.0206 dB).
    pub fn with_power_factor(alpha: f64, p_over_n0: f64, factor: f64) -> Result<PowerSplit> {
        if !factor.is_finite() || factor < 1.0 {
            return Err(Error::InvalidConfig(format!(
                "power division factor must be finite and >= 1, got {factor}"
            )));
        }
        PowerSplit::new(alpha, p_over_n0, 10.0 * factor.log10())
    }

    /// Linear power gain of user 2's channel, in (0, 1].
    pub fn gain2(&self) -> f64 {
        10f64.powf(-self.atten2_db / 10.0)
    }
}

/// Per-user and summed spectral efficiencies for one scheme at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapacityResult {
    pub r1: f64,
    pub r2: f64,
    pub total: f64,
}

impl CapacityResult {
    fn from_rates(r1: f64, r2: f64) -> CapacityResult {
        CapacityResult {
            r1,
            r2,
            total: r1 + r2,
        }
    }
}

/// Superposed transmission: user 1 is decoded against user 2's signal as
/// noise, then user 2 is decoded interference-free.
pub fn noma_capacity(split: &PowerSplit) -> CapacityResult {
    let g = split.gain2();
    let rho = split.p_over_n0;
    let a = split.alpha;
    let r1 = (1.0 + a * rho / ((1.0 - a) * g * rho + 1.0)).log2();
    let r2 = (1.0 + (1.0 - a) * g * rho).log2();
    CapacityResult::from_rates(r1, r2)
}

/// Orthogonal split: bandwidth shares equal the power shares, so each user
/// sees the full SNR on their own slice.
pub fn owma_capacity(split: &PowerSplit) -> CapacityResult {
    let g = split.gain2();
    let rho = split.p_over_n0;
    let a = split.alpha;
    let r1 = a * (1.0 + rho).log2();
    let r2 = (1.0 - a) * (1.0 + g * rho).log2();
    CapacityResult::from_rates(r1, r2)
}

/// Cartesian sweep axes. Rows are emitted alpha-outermost, then
/// `p_over_n0`, then attenuation.
#[derive(Debug, Clone)]
pub struct CapacityGrid {
    pub alphas: Vec<f64>,
    pub p_over_n0s: Vec<f64>,
    pub atten2_dbs: Vec<f64>,
}

/// One sweep row: the operating point, both schemes, and the relative
/// advantage of the superposed one in percent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapacityRow {
    pub split: PowerSplit,
    pub noma: CapacityResult,
    pub owma: CapacityResult,
    pub gain_pct: f64,
}

pub fn capacity_sweep(grid: &CapacityGrid) -> Result<Vec<CapacityRow>> {
    if grid.alphas.is_empty() || grid.p_over_n0s.is_empty() || grid.atten2_dbs.is_empty() {
        return Err(Error::InvalidConfig("empty capacity sweep axis".into()));
    }
    let mut rows =
        Vec::with_capacity(grid.alphas.len() * grid.p_over_n0s.len() * grid.atten2_dbs.len());
    for &alpha in &grid.alphas {
        for &rho in &grid.p_over_n0s {
            for &atten in &grid.atten2_dbs {
                let split = PowerSplit::new(alpha, rho, atten)?;
                let noma = noma_capacity(&split);
                let owma = owma_capacity(&split);
                let gain_pct = if owma.total == 0.0 {
                    0.0
                } else {
                    100.0 * (noma.total - owma.total) / owma.total
                };
                rows.push(CapacityRow {
                    split,
                    noma,
                    owma,
                    gain_pct,
                });
            }
        }
    }
    Ok(rows)
}

// ---------------------------------------------------------------------------
// tests
// ---------------------------------------------------------------------------

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    // Reference values computed independently from the closed forms at
    // alpha = 0.8, P/N0 = 15, g = 1/4.
    const NOMA_R1: f64 = 2.974004791467;
    const NOMA_R2: f64 = 0.807354922058;
    const NOMA_TOTAL: f64 = 3.781359713525;
    const OWMA_R1: f64 = 3.2;
    const OWMA_R2: f64 = 0.449585502689;
    const OWMA_TOTAL: f64 = 3.649585502689;
    const GAIN_PCT: f64 = 3.6106623818;

    fn golden_split() -> PowerSplit {
        PowerSplit::new(0.8, 15.0, 6.0205999132796).unwrap()
    }

    #[test]
    fn golden_point_rates() {
        let n = noma_capacity(&golden_split());
        let o = owma_capacity(&golden_split());
        assert!((n.r1 - NOMA_R1).abs() < 1e-9);
        assert!((n.r2 - NOMA_R2).abs() < 1e-9);
        assert!((n.total - NOMA_TOTAL).abs() < 1e-9);
        assert!((o.r1 - OWMA_R1).abs() < 1e-9);
        assert!((o.r2 - OWMA_R2).abs() < 1e-9);
        assert!((o.total - OWMA_TOTAL).abs() < 1e-9);
        let gain = 100.0 * (n.total - o.total) / o.total;
        assert!((gain - GAIN_PCT).abs() < 1e-8);
    }

    #[test]
    fn power_factor_form_matches_db_form() {
        let s = PowerSplit::with_power_factor(0.8, 15.0, 4.0).unwrap();
        assert!((s.atten2_db - 6.0205999132796).abs() < 1e-10);
        assert!((s.gain2() - 0.25).abs() < 1e-12);
        assert!((noma_capacity(&s).total - NOMA_TOTAL).abs() < 1e-9);
    }

    #[test]
    fn zero_attenuation_collapses_both_schemes() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let alpha: f64 = rng.random_range(0.0..=1.0);
            let rho: f64 = rng.random_range(0.0..100.0);
            let s = PowerSplit::new(alpha, rho, 0.0).unwrap();
            let single = (1.0 + rho).log2();
            assert!((noma_capacity(&s).total - single).abs() < 1e-12);
            assert!((owma_capacity(&s).total - single).abs() < 1e-12);
        }
    }

    #[test]
    fn degenerate_shares() {
        let all1 = PowerSplit::new(1.0, 15.0, 6.0).unwrap();
        let n = noma_capacity(&all1);
        assert_eq!(n.r2, 0.0);
        assert!((n.r1 - 16f64.log2()).abs() < 1e-12);
        let o = owma_capacity(&all1);
        assert_eq!(o.r2, 0.0);
        assert!((o.total - 4.0).abs() < 1e-12);

        let all2 = PowerSplit::new(0.0, 15.0, 6.0).unwrap();
        let g = all2.gain2();
        assert_eq!(noma_capacity(&all2).r1, 0.0);
        assert!((owma_capacity(&all2).total - (1.0 + g * 15.0).log2()).abs() < 1e-12);
    }

    #[test]
    fn totals_sum_exactly() {
        let s = golden_split();
        let n = noma_capacity(&s);
        assert_eq!(n.total, n.r1 + n.r2);
    }

    #[test]
    fn rates_monotone_in_snr_and_attenuation() {
        let rhos: Vec<f64> = (0..40).map(|i| i as f64).collect();
        for pair in rhos.windows(2) {
            let lo = PowerSplit::new(0.6, pair[0], 6.0).unwrap();
            let hi = PowerSplit::new(0.6, pair[1], 6.0).unwrap();
            assert!(noma_capacity(&hi).total >= noma_capacity(&lo).total);
            assert!(owma_capacity(&hi).total >= owma_capacity(&lo).total);
        }
        let attens: Vec<f64> = (0..30).map(|i| i as f64 * 0.5).collect();
        for pair in attens.windows(2) {
            let lo = PowerSplit::new(0.6, 15.0, pair[0]).unwrap();
            let hi = PowerSplit::new(0.6, 15.0, pair[1]).unwrap();
            assert!(noma_capacity(&hi).total <= noma_capacity(&lo).total);
            assert!(owma_capacity(&hi).total <= owma_capacity(&lo).total);
        }
    }

    #[test]
    fn gain_monotone_non_increasing_on_upper_alpha_range() {
        let alphas: Vec<f64> = (50..=100).map(|i| i as f64 / 100.0).collect();
        let rows = capacity_sweep(&CapacityGrid {
            alphas,
            p_over_n0s: vec![15.0],
            atten2_dbs: vec![6.02],
        })
        .unwrap();
        for pair in rows.windows(2) {
            assert!(
                pair[1].gain_pct <= pair[0].gain_pct + 1e-12,
                "gain rose from alpha {} to {}",
                pair[0].split.alpha,
                pair[1].split.alpha
            );
        }
    }

    #[test]
    fn gain_over_decade_alpha_grid_peaks_mid_range() {
        // On alpha = 0, 0.1, ..., 1.0 at P/N0 = 15, atten 6.02 dB the
        // relative advantage rises to its maximum at alpha = 0.3 and decays
        // on both sides; it is not largest at the smallest positive alpha.
        let alphas: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
        let rows = capacity_sweep(&CapacityGrid {
            alphas,
            p_over_n0s: vec![15.0],
            atten2_dbs: vec![6.02],
        })
        .unwrap();
        let gains: Vec<f64> = rows.iter().map(|r| r.gain_pct).collect();
        let argmax = gains
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap()
            .0;
        assert_eq!(argmax, 3, "gains: {gains:?}");
        assert!(gains[3] > gains[1]);
    }

    #[test]
    fn sweep_orders_alpha_outermost_and_rejects_empty_axes() {
        let rows = capacity_sweep(&CapacityGrid {
            alphas: vec![0.2, 0.8],
            p_over_n0s: vec![10.0, 20.0],
            atten2_dbs: vec![0.0, 3.0],
        })
        .unwrap();
        assert_eq!(rows.len(), 8);
        assert_eq!(rows[0].split.alpha, 0.2);
        assert_eq!(rows[3].split.alpha, 0.2);
        assert_eq!(rows[4].split.alpha, 0.8);
        assert_eq!(rows[1].split.atten2_db, 3.0);
        assert_eq!(rows[2].split.p_over_n0, 20.0);
        for bad in [
            CapacityGrid {
                alphas: vec![],
                p_over_n0s: vec![1.0],
                atten2_dbs: vec![0.0],
            },
            CapacityGrid {
                alphas: vec![0.5],
                p_over_n0s: vec![],
                atten2_dbs: vec![0.0],
            },
            CapacityGrid {
                alphas: vec![0.5],
                p_over_n0s: vec![1.0],
                atten2_dbs: vec![],
            },
        ] {
            assert!(capacity_sweep(&bad).is_err());
        }
    }

    #[test]
    fn zero_attenuation_rows_have_zero_gain() {
        let rows = capacity_sweep(&CapacityGrid {
            alphas: (0..=10).map(|i| i as f64 / 10.0).collect(),
            p_over_n0s: vec![15.0],
            atten2_dbs: vec![0.0],
        })
        .unwrap();
        for row in rows {
            assert!(row.gain_pct.abs() < 1e-10);
        }
    }

    #[test]
    fn invalid_splits_are_rejected() {
        assert!(PowerSplit::new(-0.1, 15.0, 0.0).is_err());
        assert!(PowerSplit::new(1.1, 15.0, 0.0).is_err());
        assert!(PowerSplit::new(0.5, -1.0, 0.0).is_err());
        assert!(PowerSplit::new(0.5, f64::NAN, 0.0).is_err());
        assert!(PowerSplit::new(0.5, 15.0, -1.0).is_err());
        assert!(PowerSplit::with_power_factor(0.5, 15.0, 0.5).is_err());
        assert!(PowerSplit::with_power_factor(0.5, 15.0, f64::INFINITY).is_err());
    }

    proptest! {
        // Jensen's inequality on log2(1 + x): the superposed scheme never
        // loses to the orthogonal split, at any attenuation.
        #[test]
        fn superposition_dominates(
            alpha in 0.0f64..=1.0,
            rho in 0.0f64..100.0,
            atten in 0.0f64..30.0,
        ) {
            let s = PowerSplit::new(alpha, rho, atten).unwrap();
            prop_assert!(noma_capacity(&s).total >= owma_capacity(&s).total - 1e-12);
        }

        #[test]
        fn totals_always_split_consistently(
            alpha in 0.0f64..=1.0,
            rho in 0.0f64..100.0,
            atten in 0.0f64..30.0,
        ) {
            let s = PowerSplit::new(alpha, rho, atten).unwrap();
            for r in [noma_capacity(&s), owma_capacity(&s)] {
                prop_assert!(r.r1 >= 0.0 && r.r2 >= 0.0);
                prop_assert!((r.total - (r.r1 + r.r2)).abs() < 1e-12);
            }
        }
    }
}
