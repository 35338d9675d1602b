//! Small numerical kernels: log-gamma, the regularized incomplete gamma
//! functions, and the chi-square upper-tail probability used by the
//! constancy fits. Self-contained so the statistical contract does not
//! depend on an external library.

use crate::error::{Error, Result};

/// Mean of the half-normal distribution with unit sigma, sqrt(2/pi).
pub const HALF_NORMAL_MEAN: f64 = 0.797_884_560_802_865_4;

const MAX_ITER: usize = 500;
const EPS: f64 = 1e-15;

/// Natural log of the gamma function (Lanczos approximation, g = 7).
pub fn ln_gamma(x: f64) -> f64 {
    const COEFFS: [f64; 8] = [
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        // reflection
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = 0.999_999_999_999_809_93;
    for (i, c) in COEFFS.iter().enumerate() {
        acc += c / (x + (i + 1) as f64);
    }
    let t = x + 7.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

/// Regularized lower incomplete gamma P(a, x) by series expansion.
fn gamma_p_series(a: f64, x: f64) -> f64 {
    let mut term = 1.0 / a;
    let mut sum = term;
    let mut denom = a;
    for _ in 0..MAX_ITER {
        denom += 1.0;
        term *= x / denom;
        sum += term;
        if term.abs() < sum.abs() * EPS {
            break;
        }
    }
    sum * (-x + a * x.ln() - ln_gamma(a)).exp()
}

/// Regularized upper incomplete gamma Q(a, x) by continued fraction
/// (modified Lentz).
fn gamma_q_cf(a: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..=MAX_ITER {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < EPS {
            break;
        }
    }
    h * (-x + a * x.ln() - ln_gamma(a)).exp()
}

/// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x), a > 0, x >= 0.
pub fn regularized_gamma_q(a: f64, x: f64) -> Result<f64> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::Validation(format!(
            "gamma Q requires a > 0, got a = {a}"
        )));
    }
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::Validation(format!(
            "gamma Q requires x >= 0, got x = {x}"
        )));
    }
    if x == 0.0 {
        return Ok(1.0);
    }
    // series converges fast for x < a + 1, continued fraction elsewhere
    let q = if x < a + 1.0 {
        1.0 - gamma_p_series(a, x)
    } else {
        gamma_q_cf(a, x)
    };
    Ok(q.clamp(0.0, 1.0))
}

/// Upper-tail probability of a chi-square variable: the probability of
/// observing, even under a correct model, a statistic exceeding `chi2`.
pub fn chi_square_p_value(chi2: f64, dof: usize) -> Result<f64> {
    if dof == 0 {
        return Err(Error::Validation(
            "chi-square p-value requires at least 1 degree of freedom".into(),
        ));
    }
    if !(chi2 >= 0.0) || !chi2.is_finite() {
        return Err(Error::Validation(format!(
            "chi-square statistic must be finite and non-negative, got {chi2}"
        )));
    }
    regularized_gamma_q(dof as f64 / 2.0, chi2 / 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ln_gamma_known_values() {
        // Gamma(1) = Gamma(2) = 1, Gamma(5) = 24, Gamma(1/2) = sqrt(pi)
        assert!(ln_gamma(1.0).abs() < 1e-13);
        assert!(ln_gamma(2.0).abs() < 1e-13);
        assert!((ln_gamma(5.0) - 24f64.ln()).abs() < 1e-12);
        assert!((ln_gamma(0.5) - 0.5 * std::f64::consts::PI.ln()).abs() < 1e-12);
    }

    #[test]
    fn half_normal_mean_matches_formula() {
        assert!((HALF_NORMAL_MEAN - (2.0 / std::f64::consts::PI).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn quoted_p_values() {
        // reference points for the constancy-test contract
        let p1 = chi_square_p_value(6.4, 3).unwrap();
        let p2 = chi_square_p_value(10.7, 3).unwrap();
        assert!((p1 - 0.094).abs() < 1e-3, "p(6.4, 3) = {p1}");
        assert!((p2 - 0.013).abs() < 1e-3, "p(10.7, 3) = {p2}");
    }

    #[test]
    fn dof_two_closed_form() {
        // for dof = 2 the upper tail is exp(-x/2)
        for &x in &[0.1, 1.0, 3.7, 12.0, 40.0] {
            let p = chi_square_p_value(x, 2).unwrap();
            assert!((p - (-x / 2.0).exp()).abs() < 1e-12);
        }
    }

    #[test]
    fn boundary_values() {
        assert_eq!(chi_square_p_value(0.0, 3).unwrap(), 1.0);
        let tail = chi_square_p_value(1e4, 3).unwrap();
        assert!(tail >= 0.0 && tail < 1e-100);
        assert!(chi_square_p_value(-1.0, 3).is_err());
        assert!(chi_square_p_value(1.0, 0).is_err());
        assert!(chi_square_p_value(f64::NAN, 3).is_err());
    }

    /// Independent oracle: Simpson integration of the chi-square density
    /// over the upper tail. Exact gamma(dof/2) for integer and half-integer
    /// arguments via recursion keeps the oracle free of this module's
    /// ln_gamma.
    fn oracle_upper_tail(chi2: f64, dof: usize) -> f64 {
        fn gamma_half(two_a: usize) -> f64 {
            // gamma(two_a / 2) for two_a >= 1
            if two_a == 1 {
                std::f64::consts::PI.sqrt()
            } else if two_a == 2 {
                1.0
            } else {
                (two_a as f64 / 2.0 - 1.0) * gamma_half(two_a - 2)
            }
        }
        let a = dof as f64 / 2.0;
        let norm = 1.0 / (2f64.powf(a) * gamma_half(dof));
        let pdf = |x: f64| norm * x.powf(a - 1.0) * (-x / 2.0).exp();
        // integrate [chi2, chi2 + 400]; the remainder is below 1e-30
        let (lo, hi) = (chi2, chi2 + 400.0);
        let n = 400_000; // even
        let h = (hi - lo) / n as f64;
        let mut acc = pdf(lo) + pdf(hi);
        for k in 1..n {
            let x = lo + k as f64 * h;
            acc += pdf(x) * if k % 2 == 1 { 4.0 } else { 2.0 };
        }
        acc * h / 3.0
    }

    #[test]
    fn matches_quadrature_oracle() {
        // dof 1..10, chi2 swept over (0, 50]; tolerance 1e-6
        for dof in 1..=10 {
            let mut chi2 = 0.5;
            while chi2 <= 50.0 {
                let got = chi_square_p_value(chi2, dof).unwrap();
                let want = oracle_upper_tail(chi2, dof);
                assert!(
                    (got - want).abs() < 1e-6,
                    "dof {dof} chi2 {chi2}: {got} vs {want}"
                );
                chi2 += 2.5;
            }
        }
    }
}
