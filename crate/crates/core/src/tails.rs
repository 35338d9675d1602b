//! Differential probability density of returns on geometric bins, with
//! weighted log-log power-law fits of the tails. The fitted exponent
//! bounds which statistical moments of the return distribution converge,
//! which in turn bounds how deep a correlation analysis the data can
//! support.

use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TailSide {
    Positive,
    Negative,
}

impl TailSide {
    pub fn label(&self) -> &'static str {
        match self {
            TailSide::Positive => "positive",
            TailSide::Negative => "negative",
        }
    }
}

/// Histogram of one tail of |return| on a geometric grid.
///
/// Densities are normalized against the full sample (`total_samples`
/// includes the other side, zeros, and anything outside the grid), so the
/// probability mass over both side histograms plus the uncovered center
/// region sums to one. Errors are Poisson: `sqrt(count)` in the numerator.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailHistogram {
    pub side: TailSide,
    /// `bins + 1` strictly increasing, geometrically spaced edges.
    pub bin_edges: Vec<f64>,
    pub counts: Vec<u64>,
    /// dP/dx per bin; zero-count bins carry zero density.
    pub densities: Vec<f64>,
    pub density_errors: Vec<f64>,
    /// Samples of this side that landed inside the grid.
    pub sample_count: usize,
    /// Size of the full sample the densities are normalized by.
    pub total_samples: usize,
}

/// Power-law fit `density = p0 * x^p1` from weighted least squares of
/// `ln density` against `ln x`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerLawFit {
    pub p0: f64,
    pub p1: f64,
    pub p0_error: f64,
    pub p1_error: f64,
    pub chi2: f64,
    /// Fitted bins minus the two parameters.
    pub degrees_of_freedom: usize,
    pub fit_range: (f64, f64),
}

fn side_magnitudes(returns: &[f64], side: TailSide) -> Vec<f64> {
    returns
        .iter()
        .filter_map(|&r| match side {
            TailSide::Positive if r > 0.0 => Some(r),
            TailSide::Negative if r < 0.0 => Some(-r),
            _ => None,
        })
        .collect()
}

/// Default grid: from the 90th-percentile |return| of the requested side
/// up to just past the maximum, so the grid covers the whole tail.
fn default_range(magnitudes: &[f64]) -> Result<(f64, f64)> {
    let mut sorted = magnitudes.to_vec();
    sorted.sort_by(f64::total_cmp);
    let lo = sorted[((sorted.len() as f64 * 0.9).ceil() as usize - 1).min(sorted.len() - 1)];
    let hi = sorted[sorted.len() - 1] * (1.0 + 1e-9);
    if !(lo > 0.0) || lo >= hi {
        return Err(Error::Validation(format!(
            "cannot build a geometric grid over [{lo}, {hi}); pass an explicit range"
        )));
    }
    Ok((lo, hi))
}

/// Histogram one side of the return distribution on `bins` geometric bins.
///
/// `range` is half-open over |return|; `None` picks the default grid.
/// Requires at least 100 samples on the requested side within range.
pub fn tail_histogram(
    returns: &[f64],
    side: TailSide,
    bins: usize,
    range: Option<(f64, f64)>,
) -> Result<TailHistogram> {
    if bins == 0 {
        return Err(Error::Validation("bin count must be positive".into()));
    }
    let magnitudes = side_magnitudes(returns, side);
    if magnitudes.is_empty() {
        return Err(Error::InsufficientData {
            context: format!("{} tail histogram", side.label()),
            needed: 100,
            got: 0,
        });
    }
    let (lo, hi) = match range {
        Some((lo, hi)) => {
            if !(lo > 0.0) || !(hi > lo) || !lo.is_finite() || !hi.is_finite() {
                return Err(Error::Validation(format!(
                    "tail range must satisfy 0 < lo < hi, got [{lo}, {hi})"
                )));
            }
            (lo, hi)
        }
        None => default_range(&magnitudes)?,
    };

    let ratio = (hi / lo).powf(1.0 / bins as f64);
    let mut edges: Vec<f64> = (0..=bins).map(|k| lo * ratio.powi(k as i32)).collect();
    edges[bins] = hi; // guard against rounding on the outer edge
    let mut counts = vec![0u64; bins];
    let mut in_range = 0usize;
    for &m in &magnitudes {
        if m < lo || m >= hi {
            continue;
        }
        // partition_point gives the first edge above m
        let k = edges.partition_point(|&e| e <= m) - 1;
        counts[k.min(bins - 1)] += 1;
        in_range += 1;
    }
    if in_range < 100 {
        return Err(Error::InsufficientData {
            context: format!("{} tail histogram over [{lo}, {hi})", side.label()),
            needed: 100,
            got: in_range,
        });
    }

    let total = returns.len();
    let mut densities = Vec::with_capacity(bins);
    let mut errors = Vec::with_capacity(bins);
    for k in 0..bins {
        let width = edges[k + 1] - edges[k];
        densities.push(counts[k] as f64 / (total as f64 * width));
        errors.push((counts[k] as f64).sqrt() / (total as f64 * width));
    }
    Ok(TailHistogram {
        side,
        bin_edges: edges,
        counts,
        densities,
        density_errors: errors,
        sample_count: in_range,
        total_samples: total,
    })
}

impl TailHistogram {
    pub fn bins(&self) -> usize {
        self.counts.len()
    }

    /// Geometric midpoint of bin `k`; the representative |return| for fits.
    pub fn bin_center(&self, k: usize) -> f64 {
        (self.bin_edges[k] * self.bin_edges[k + 1]).sqrt()
    }

    /// Probability mass inside the grid: sum of density times width.
    pub fn mass(&self) -> f64 {
        (0..self.bins())
            .map(|k| self.densities[k] * (self.bin_edges[k + 1] - self.bin_edges[k]))
            .sum()
    }

    /// Plot-ready CSV: `bin_lo,bin_hi,bin_center,count,density,density_error`.
    pub fn write_csv(&self, mut w: impl Write) -> Result<()> {
        writeln!(w, "bin_lo,bin_hi,bin_center,count,density,density_error")?;
        for k in 0..self.bins() {
            writeln!(
                w,
                "{},{},{},{},{},{}",
                self.bin_edges[k],
                self.bin_edges[k + 1],
                self.bin_center(k),
                self.counts[k],
                self.densities[k],
                self.density_errors[k]
            )?;
        }
        Ok(())
    }
}

/// Weighted least squares of `ln density` vs `ln x` over the non-empty
/// bins whose centers fall in `fit_range` (`None` spans the whole grid).
/// Log-space errors are the propagated Poisson errors, `1 / sqrt(count)`.
pub fn fit_power_law(hist: &TailHistogram, fit_range: Option<(f64, f64)>) -> Result<PowerLawFit> {
    let (lo, hi) = fit_range.unwrap_or((
        hist.bin_edges[0],
        hist.bin_edges[hist.bins()],
    ));
    if !(lo > 0.0) || !(hi > lo) {
        return Err(Error::Validation(format!(
            "fit range must satisfy 0 < lo < hi, got [{lo}, {hi})"
        )));
    }

    let mut s = 0.0;
    let mut sx = 0.0;
    let mut sy = 0.0;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut used = Vec::new();
    for k in 0..hist.bins() {
        let x = hist.bin_center(k);
        if hist.counts[k] == 0 || x < lo || x >= hi {
            continue;
        }
        let t = x.ln();
        let y = hist.densities[k].ln();
        let sigma = hist.density_errors[k] / hist.densities[k];
        let w = 1.0 / (sigma * sigma);
        s += w;
        sx += w * t;
        sy += w * y;
        sxx += w * t * t;
        sxy += w * t * y;
        used.push((t, y, w));
    }
    if used.len() < 3 {
        return Err(Error::InsufficientData {
            context: format!("power-law fit over [{lo}, {hi})"),
            needed: 3,
            got: used.len(),
        });
    }
    let det = s * sxx - sx * sx;
    if det <= 0.0 {
        return Err(Error::Validation(
            "power-law fit is singular: bin centers do not separate".into(),
        ));
    }
    let slope = (s * sxy - sx * sy) / det;
    let intercept = (sxx * sy - sx * sxy) / det;
    let slope_var = s / det;
    let intercept_var = sxx / det;
    let chi2: f64 = used
        .iter()
        .map(|&(t, y, w)| {
            let r = y - intercept - slope * t;
            w * r * r
        })
        .sum();
    Ok(PowerLawFit {
        p0: intercept.exp(),
        p1: slope,
        p0_error: intercept.exp() * intercept_var.sqrt(),
        p1_error: slope_var.sqrt(),
        chi2,
        degrees_of_freedom: used.len() - 2,
        fit_range: (lo, hi),
    })
}

/// Largest moment order `n >= 0` that still converges under a tail density
/// proportional to `x^p1`: the largest integer with `n + p1 < -1`.
/// `None` when not even the zeroth moment converges (`p1 >= -1`).
pub fn max_convergent_moment(fit: &PowerLawFit) -> Option<u32> {
    moment_bound(fit.p1)
}

/// Same rule applied directly to an exponent.
pub fn moment_bound(p1: f64) -> Option<u32> {
    if !p1.is_finite() {
        return None;
    }
    let bound = -1.0 - p1; // need n < bound, strictly
    let n = if bound.floor() == bound {
        bound - 1.0
    } else {
        bound.floor()
    };
    if n < 0.0 {
        None
    } else {
        Some(n as u32)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn uniform_stream(seed: u64, n: usize) -> Vec<f64> {
        let mut state = seed.max(1);
        (0..n)
            .map(|_| {
                state ^= state << 13;
                state ^= state >> 7;
                state ^= state << 17;
                ((state >> 11) as f64 + 0.5) / (1u64 << 53) as f64
            })
            .collect()
    }

    /// Symmetric sample with |r| Pareto: survival (x/xm)^-alpha, so the
    /// one-sided density is (alpha/2) xm^alpha x^(-alpha-1).
    fn symmetric_pareto(seed: u64, n: usize, alpha: f64, xm: f64) -> Vec<f64> {
        uniform_stream(seed, 2 * n)
            .chunks(2)
            .map(|uv| {
                let mag = xm * (1.0 - uv[0]).powf(-1.0 / alpha);
                if uv[1] < 0.5 {
                    -mag
                } else {
                    mag
                }
            })
            .collect()
    }

    #[test]
    fn point_mass_bin_carries_all_probability() {
        let returns = vec![0.01; 500];
        let hist = tail_histogram(&returns, TailSide::Positive, 1, Some((0.009, 0.011))).unwrap();
        let width = hist.bin_edges[1] - hist.bin_edges[0];
        assert_eq!(hist.counts[0], 500);
        assert!((hist.densities[0] * width - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mirror_symmetry_between_sides() {
        let mut returns = symmetric_pareto(5, 3000, 3.0, 0.01);
        // force exact pairing: append the negation of everything
        let negated: Vec<f64> = returns.iter().map(|r| -r).collect();
        returns.extend(negated);
        let range = Some((0.01, 1.0));
        let pos = tail_histogram(&returns, TailSide::Positive, 15, range).unwrap();
        let neg = tail_histogram(&returns, TailSide::Negative, 15, range).unwrap();
        assert_eq!(pos.counts, neg.counts);
        assert_eq!(pos.densities, neg.densities);
    }

    #[test]
    fn negating_returns_swaps_histograms_exactly() {
        let returns = symmetric_pareto(42, 4000, 3.0, 0.01);
        let negated: Vec<f64> = returns.iter().map(|r| -r).collect();
        let range = Some((0.012, 0.8));
        let pos = tail_histogram(&returns, TailSide::Positive, 12, range).unwrap();
        let neg_of_negated = tail_histogram(&negated, TailSide::Negative, 12, range).unwrap();
        assert_eq!(pos.counts, neg_of_negated.counts);
        assert_eq!(pos.densities, neg_of_negated.densities);
    }

    #[test]
    fn pareto_densities_match_analytic_within_poisson_errors() {
        let (alpha, xm) = (3.0, 0.01);
        let n = 100_000;
        let returns = symmetric_pareto(99, n, alpha, xm);
        let hist =
            tail_histogram(&returns, TailSide::Positive, 20, Some((0.012, 0.2))).unwrap();
        let analytic = |x: f64| 0.5 * alpha * xm.powf(alpha) * x.powf(-alpha - 1.0);
        let mut checked = 0;
        let mut inside = 0;
        for k in 0..hist.bins() {
            if hist.counts[k] == 0 {
                continue;
            }
            // compare against the bin-averaged analytic density
            let (lo, hi) = (hist.bin_edges[k], hist.bin_edges[k + 1]);
            let mass = 0.5 * (xm / lo).powf(alpha) - 0.5 * (xm / hi).powf(alpha);
            let avg_density = mass / (hi - lo);
            checked += 1;
            if (hist.densities[k] - avg_density).abs() <= 3.0 * hist.density_errors[k] {
                inside += 1;
            }
            let _ = analytic; // midpoint form kept for reference
        }
        assert!(checked >= 15);
        assert!(
            inside as f64 >= 0.99 * checked as f64,
            "{inside}/{checked} bins within 3 Poisson errors"
        );
    }

    #[test]
    fn noiseless_power_law_fit_recovers_generator() {
        // densities laid down exactly as 2 x^-4 with tiny errors
        let bins = 10;
        let (lo, hi) = (0.01, 0.1);
        let ratio = (hi / lo as f64).powf(1.0 / bins as f64);
        let edges: Vec<f64> = (0..=bins).map(|k| lo * ratio.powi(k as i32)).collect();
        let mut densities = Vec::new();
        let mut errors = Vec::new();
        let mut counts = Vec::new();
        for k in 0..bins {
            let x = (edges[k] * edges[k + 1]).sqrt();
            let d = 2.0 * x.powi(-4);
            densities.push(d);
            errors.push(d * 1e-9);
            counts.push(1_000_000u64);
        }
        let hist = TailHistogram {
            side: TailSide::Positive,
            bin_edges: edges,
            counts,
            densities,
            density_errors: errors,
            sample_count: 10_000_000,
            total_samples: 10_000_000,
        };
        let fit = fit_power_law(&hist, None).unwrap();
        assert!((fit.p1 - (-4.0)).abs() < 1e-6, "p1 = {}", fit.p1);
        assert!((fit.p0 - 2.0).abs() / 2.0 < 1e-6, "p0 = {}", fit.p0);
        assert_eq!(fit.degrees_of_freedom, 8);
        assert!(fit.chi2 < 1e-9);
    }

    #[test]
    fn refit_of_fitted_law_is_consistent() {
        // generate a histogram exactly from a fitted law, refit, compare
        let returns = symmetric_pareto(7, 50_000, 3.0, 0.01);
        let hist = tail_histogram(&returns, TailSide::Positive, 15, Some((0.012, 0.15))).unwrap();
        let fit = fit_power_law(&hist, None).unwrap();
        let mut regenerated = hist.clone();
        for k in 0..regenerated.bins() {
            let x = regenerated.bin_center(k);
            regenerated.densities[k] = fit.p0 * x.powf(fit.p1);
            regenerated.density_errors[k] = regenerated.densities[k] * 1e-8;
            regenerated.counts[k] = 1;
        }
        let refit = fit_power_law(&regenerated, None).unwrap();
        assert!((refit.p1 - fit.p1).abs() < 1e-6);
        assert!((refit.p0 - fit.p0).abs() / fit.p0 < 1e-6);
    }

    #[test]
    fn too_few_samples_names_the_count() {
        let returns = vec![0.01; 50];
        let err = tail_histogram(&returns, TailSide::Positive, 5, Some((0.001, 1.0))).unwrap_err();
        match err {
            Error::InsufficientData { needed, got, .. } => {
                assert_eq!(needed, 100);
                assert_eq!(got, 50);
            }
            other => panic!("expected InsufficientData, got {other:?}"),
        }
    }

    #[test]
    fn underdetermined_fit_is_an_error() {
        let returns = symmetric_pareto(3, 2000, 3.0, 0.01);
        let hist = tail_histogram(&returns, TailSide::Positive, 10, Some((0.011, 0.4))).unwrap();
        // a fit window narrower than three bin centers cannot determine two parameters
        let narrow = (hist.bin_center(0) * 0.999, hist.bin_center(1) * 1.001);
        assert!(matches!(
            fit_power_law(&hist, Some(narrow)),
            Err(Error::InsufficientData { .. })
        ));
    }

    #[test]
    fn moment_bound_boundaries() {
        assert_eq!(moment_bound(-4.0), Some(2));
        assert_eq!(moment_bound(-1.5), Some(0));
        assert_eq!(moment_bound(-3.001), Some(2));
        assert_eq!(moment_bound(-3.0), Some(1));
        assert_eq!(moment_bound(-1.0), None);
        assert_eq!(moment_bound(-0.5), None);
        assert_eq!(moment_bound(2.0), None);
        assert_eq!(moment_bound(f64::NAN), None);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        /// Total probability over both side histograms plus the uncovered
        /// center is one.
        #[test]
        fn histogram_mass_accounting(seed in 1u64..5000) {
            let returns = symmetric_pareto(seed, 3000, 3.0, 0.01);
            let max = returns.iter().fold(0.0f64, |m, r| m.max(r.abs())) * (1.0 + 1e-9);
            let range = Some((0.011, max));
            let pos = tail_histogram(&returns, TailSide::Positive, 20, range);
            let neg = tail_histogram(&returns, TailSide::Negative, 20, range);
            prop_assume!(pos.is_ok() && neg.is_ok());
            let (pos, neg) = (pos.unwrap(), neg.unwrap());
            let center = (returns.len() - pos.sample_count - neg.sample_count) as f64
                / returns.len() as f64;
            let mass = pos.mass() + neg.mass() + center;
            prop_assert!((mass - 1.0).abs() < 1e-9, "mass = {}", mass);
        }
    }
}
