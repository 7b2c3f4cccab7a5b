//! Tests on resampled totals: empirical two-sided p-values, Bonferroni
//! flags, standard-deviation distances, Pearson's chi-square contingency
//! test and product-moment correlation.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::race::Race;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InferenceError {
    #[error("no resampled values")]
    EmptyResample,
    #[error("resampled values have zero standard deviation")]
    ZeroSd,
    #[error("need at least two values, got {0}")]
    TooFewValues(usize),
    #[error("contingency table must be at least 2x2 with rows of equal length")]
    TableShape,
    #[error("contingency table has an all-zero {axis} {index}")]
    ZeroMargin { axis: &'static str, index: usize },
    #[error("series lengths differ ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("series has zero variance")]
    ZeroVariance,
    #[error("alpha must lie in (0, 1), got {0}")]
    InvalidAlpha(f64),
}

/// Tail that resamples equal to the observed total are counted in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TieRule {
    /// Neither tail.
    #[default]
    Exclude,
    /// The lower tail, which then holds `N - n_greater` resamples.
    Lower,
}

impl TieRule {
    pub fn as_str(self) -> &'static str {
        match self {
            TieRule::Exclude => "exclude",
            TieRule::Lower => "lower",
        }
    }
}

/// Two-sided empirical p-value of an observed total against resampled totals.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PValueEstimate {
    pub race: Race,
    pub observed_total: u64,
    pub n_replications: u64,
    /// Resamples strictly above the observed total.
    pub n_greater: u64,
    /// Resamples strictly below the observed total.
    pub n_less: u64,
    /// Resamples equal to the observed total.
    pub n_ties: u64,
    pub ties: TieRule,
    /// `2 min(n_greater, lower) / N`, capped at 1, where `lower` is `n_less`
    /// plus the ties under [`TieRule::Lower`].
    pub p_unbiased: f64,
    /// `(2 min(n_greater, lower) + 1) / (N + 1)`, capped at 1.
    pub p_biased: f64,
    /// `1 / (2 sqrt(N))`, the largest possible standard error of `p_unbiased`.
    pub se_bound: f64,
}

/// Counts resamples strictly above and strictly below `observed`. Ties count
/// in neither tail, so an all-ties resample gives p = 0.
pub fn tail_counts<T: PartialOrd>(observed: &T, resampled: &[T]) -> (u64, u64) {
    resampled.iter().fold((0, 0), |(g, l), x| {
        if x > observed {
            (g + 1, l)
        } else if x < observed {
            (g, l + 1)
        } else {
            (g, l)
        }
    })
}

pub fn p_unbiased(n_greater: u64, n_less: u64, n: u64) -> f64 {
    (2.0 * n_greater.min(n_less) as f64 / n as f64).min(1.0)
}

pub fn p_biased(n_greater: u64, n_less: u64, n: u64) -> f64 {
    ((2.0 * n_greater.min(n_less) as f64 + 1.0) / (n as f64 + 1.0)).min(1.0)
}

pub fn se_bound(n: u64) -> f64 {
    1.0 / (2.0 * (n as f64).sqrt())
}

/// Empirical p-value with ties counted in neither tail.
pub fn empirical_pvalue(race: Race, observed: u64, resampled: &[u64]) -> Result<PValueEstimate, InferenceError> {
    empirical_pvalue_with(race, observed, resampled, TieRule::Exclude)
}

pub fn empirical_pvalue_with(
    race: Race,
    observed: u64,
    resampled: &[u64],
    ties: TieRule,
) -> Result<PValueEstimate, InferenceError> {
    if resampled.is_empty() {
        return Err(InferenceError::EmptyResample);
    }
    let n = resampled.len() as u64;
    let (n_greater, n_less) = tail_counts(&observed, resampled);
    let n_ties = n - n_greater - n_less;
    let lower = match ties {
        TieRule::Exclude => n_less,
        TieRule::Lower => n_less + n_ties,
    };
    Ok(PValueEstimate {
        race,
        observed_total: observed,
        n_replications: n,
        n_greater,
        n_less,
        n_ties,
        ties,
        p_unbiased: p_unbiased(n_greater, lower, n),
        p_biased: p_biased(n_greater, lower, n),
        se_bound: se_bound(n),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SignificanceFlags {
    pub race: Race,
    /// `p < alpha`.
    pub raw: bool,
    /// `p < alpha / k`.
    pub bonferroni: bool,
}

/// Bonferroni over the given p-values as the whole family (`k = len`).
pub fn bonferroni(pvalues: &[PValueEstimate], alpha: f64) -> Result<Vec<SignificanceFlags>, InferenceError> {
    bonferroni_family(pvalues, alpha, pvalues.len())
}

/// Bonferroni with an explicit family size `k`, which may exceed the number
/// of p-values when several experiments are corrected jointly.
pub fn bonferroni_family(
    pvalues: &[PValueEstimate],
    alpha: f64,
    k: usize,
) -> Result<Vec<SignificanceFlags>, InferenceError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(InferenceError::InvalidAlpha(alpha));
    }
    let threshold = alpha / k.max(1) as f64;
    Ok(pvalues
        .iter()
        .map(|p| SignificanceFlags {
            race: p.race,
            raw: p.p_unbiased < alpha,
            bonferroni: p.p_unbiased < threshold,
        })
        .collect())
}

/// Mean and sample (n - 1) standard deviation.
pub fn mean_sd(values: &[f64]) -> Result<(f64, f64), InferenceError> {
    if values.len() < 2 {
        return Err(InferenceError::TooFewValues(values.len()));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
    Ok((mean, (ss / (n - 1.0)).sqrt()))
}

/// `|observed - mean| / sd` over the resampled totals.
pub fn sd_distance(observed: u64, resampled: &[u64]) -> Result<f64, InferenceError> {
    let values: Vec<f64> = resampled.iter().map(|&v| v as f64).collect();
    let (mean, sd) = mean_sd(&values)?;
    if sd == 0.0 {
        return Err(InferenceError::ZeroSd);
    }
    Ok((observed as f64 - mean).abs() / sd)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChiSquareResult {
    pub statistic: f64,
    pub dof: u64,
    pub p_value: f64,
    pub expected: Vec<Vec<f64>>,
}

/// Pearson's chi-square test of independence on an r x c table of counts.
pub fn chi_square(table: &[Vec<u64>]) -> Result<ChiSquareResult, InferenceError> {
    let rows = table.len();
    let cols = table.first().map_or(0, Vec::len);
    if rows < 2 || cols < 2 || table.iter().any(|r| r.len() != cols) {
        return Err(InferenceError::TableShape);
    }
    let row_sums: Vec<f64> = table.iter().map(|r| r.iter().sum::<u64>() as f64).collect();
    let col_sums: Vec<f64> = (0..cols).map(|j| table.iter().map(|r| r[j]).sum::<u64>() as f64).collect();
    if let Some(index) = row_sums.iter().position(|&s| s == 0.0) {
        return Err(InferenceError::ZeroMargin { axis: "row", index });
    }
    if let Some(index) = col_sums.iter().position(|&s| s == 0.0) {
        return Err(InferenceError::ZeroMargin { axis: "column", index });
    }
    let total: f64 = row_sums.iter().sum();
    let expected: Vec<Vec<f64>> = row_sums
        .iter()
        .map(|r| col_sums.iter().map(|c| r * c / total).collect())
        .collect();
    let statistic = table
        .iter()
        .zip(&expected)
        .flat_map(|(o, e)| o.iter().zip(e))
        .map(|(&o, &e)| (o as f64 - e).powi(2) / e)
        .sum();
    let dof = ((rows - 1) * (cols - 1)) as u64;
    Ok(ChiSquareResult {
        statistic,
        dof,
        p_value: chi_square_sf(statistic, dof as f64),
        expected,
    })
}

/// Upper tail `P(X > x)` of a chi-square variable with `dof` degrees of freedom.
pub fn chi_square_sf(x: f64, dof: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    gamma_q(dof / 2.0, x / 2.0)
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// `ln Γ(x)` for `x > 0` (Lanczos, g = 7, n = 9).
pub fn ln_gamma(x: f64) -> f64 {
    if x < 0.5 {
        // Reflection: Γ(x) Γ(1 - x) = π / sin(π x).
        return (std::f64::consts::PI / (std::f64::consts::PI * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let a = LANCZOS[1..]
        .iter()
        .enumerate()
        .fold(LANCZOS[0], |acc, (i, c)| acc + c / (x + i as f64 + 1.0));
    let t = x + LANCZOS_G + 0.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

const GAMMA_EPS: f64 = 1e-16;
const GAMMA_MAX_ITER: usize = 10_000;
const FPMIN: f64 = 1e-300;

/// Regularized upper incomplete gamma `Q(a, x) = Γ(a, x) / Γ(a)`.
pub fn gamma_q(a: f64, x: f64) -> f64 {
    assert!(a > 0.0 && x >= 0.0, "gamma_q domain: a > 0, x >= 0");
    if x == 0.0 {
        return 1.0;
    }
    if x < a + 1.0 {
        1.0 - gamma_p_series(a, x)
    } else {
        gamma_q_continued_fraction(a, x)
    }
}

/// Regularized lower incomplete gamma `P(a, x)`.
pub fn gamma_p(a: f64, x: f64) -> f64 {
    assert!(a > 0.0 && x >= 0.0, "gamma_p domain: a > 0, x >= 0");
    if x == 0.0 {
        return 0.0;
    }
    if x < a + 1.0 {
        gamma_p_series(a, x)
    } else {
        1.0 - gamma_q_continued_fraction(a, x)
    }
}

fn prefactor(a: f64, x: f64) -> f64 {
    (-x + a * x.ln() - ln_gamma(a)).exp()
}

fn gamma_p_series(a: f64, x: f64) -> f64 {
    let mut ap = a;
    let mut term = 1.0 / a;
    let mut sum = term;
    for _ in 0..GAMMA_MAX_ITER {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if term.abs() < sum.abs() * GAMMA_EPS {
            break;
        }
    }
    sum * prefactor(a, x)
}

// Modified Lentz evaluation of the continued fraction for Γ(a, x).
fn gamma_q_continued_fraction(a: f64, x: f64) -> f64 {
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / FPMIN;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..GAMMA_MAX_ITER {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = b + an / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < GAMMA_EPS {
            break;
        }
    }
    prefactor(a, x) * h
}

/// Pearson product-moment correlation.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64, InferenceError> {
    if x.len() != y.len() {
        return Err(InferenceError::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 2 {
        return Err(InferenceError::TooFewValues(x.len()));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(InferenceError::ZeroVariance);
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// One-sample Kolmogorov-Smirnov statistic against Uniform(0, 1).
pub fn ks_uniform_statistic(samples: &[f64]) -> f64 {
    let mut s = samples.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    s.iter()
        .enumerate()
        .map(|(i, &v)| {
            let v = v.clamp(0.0, 1.0);
            ((i + 1) as f64 / n - v).max(v - i as f64 / n)
        })
        .fold(0.0, f64::max)
}

/// Asymptotic KS critical value `c(alpha) / sqrt(n)` with
/// `c(alpha) = sqrt(-ln(alpha / 2) / 2)`.
pub fn ks_critical_value(n: usize, alpha: f64) -> f64 {
    (-(alpha / 2.0).ln() / 2.0).sqrt() / (n as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn pvalue_direct_count() {
        let p = empirical_pvalue(Race::White, 2, &[1, 3, 4, 5, 6, 7, 8, 9, 10, 11]).unwrap();
        assert_eq!((p.n_less, p.n_greater), (1, 9));
        assert!((p.p_unbiased - 0.2).abs() < 1e-15);
        assert!((p.p_biased - 3.0 / 11.0).abs() < 1e-15);
    }

    #[test]
    fn pvalue_edges() {
        let above = empirical_pvalue(Race::Black, 100, &[1, 2, 3]).unwrap();
        assert_eq!(above.p_unbiased, 0.0);
        let ties = empirical_pvalue(Race::Black, 5, &[5, 5, 5, 5]).unwrap();
        assert_eq!((ties.n_greater, ties.n_less, ties.p_unbiased), (0, 0, 0.0));
        assert_eq!(
            empirical_pvalue(Race::Black, 5, &[]),
            Err(InferenceError::EmptyResample)
        );
    }

    #[test]
    fn tie_rules() {
        let resampled = [3, 5, 5, 5, 7, 8, 9, 9];
        let ex = empirical_pvalue_with(Race::Asian, 5, &resampled, TieRule::Exclude).unwrap();
        assert_eq!((ex.n_greater, ex.n_less, ex.n_ties), (4, 1, 3));
        assert!((ex.p_unbiased - 2.0 / 8.0).abs() < 1e-15);
        let lo = empirical_pvalue_with(Race::Asian, 5, &resampled, TieRule::Lower).unwrap();
        assert_eq!((lo.n_greater, lo.n_less, lo.n_ties), (4, 1, 3));
        assert!((lo.p_unbiased - 1.0).abs() < 1e-15);
        // Without ties both rules agree.
        let a = empirical_pvalue_with(Race::Asian, 6, &resampled, TieRule::Exclude).unwrap();
        let b = empirical_pvalue_with(Race::Asian, 6, &resampled, TieRule::Lower).unwrap();
        assert_eq!(a.p_unbiased, b.p_unbiased);
    }

    #[test]
    fn se_bound_exact() {
        assert_eq!(se_bound(1000), 1.0 / (2.0 * 1000f64.sqrt()));
        assert_eq!(se_bound(2000), 1.0 / (2.0 * 2000f64.sqrt()));
    }

    #[test]
    fn bonferroni_threshold() {
        let ps: Vec<PValueEstimate> = [0.004, 0.008, 0.0084, 0.02, 0.3, 0.9]
            .iter()
            .zip(Race::ALL)
            .map(|(&p, race)| PValueEstimate {
                race,
                observed_total: 0,
                n_replications: 1000,
                n_greater: 0,
                n_less: 0,
                n_ties: 0,
                ties: TieRule::Exclude,
                p_unbiased: p,
                p_biased: p,
                se_bound: se_bound(1000),
            })
            .collect();
        let flags = bonferroni(&ps, 0.05).unwrap();
        let bonf: Vec<bool> = flags.iter().map(|f| f.bonferroni).collect();
        assert_eq!(bonf, [true, true, false, false, false, false]);
        let raw: Vec<bool> = flags.iter().map(|f| f.raw).collect();
        assert_eq!(raw, [true, true, true, true, false, false]);
        let wide = bonferroni_family(&ps, 0.05, 24).unwrap();
        assert!(wide.iter().all(|f| !f.bonferroni));
        assert!(bonferroni(&[], 0.05).unwrap().is_empty());
        assert!(bonferroni(&ps, 1.0).is_err());
    }

    #[test]
    fn sd_distance_values() {
        assert!((sd_distance(3, &[0, 2]).unwrap() - 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(sd_distance(2, &[1, 2, 3]).unwrap(), 0.0);
        assert_eq!(sd_distance(2, &[4, 4]), Err(InferenceError::ZeroSd));
        assert!(sd_distance(2, &[4]).is_err());
    }

    #[test]
    fn chi_square_two_by_two() {
        // E = 15 everywhere, so X2 = 4 * 25 / 15 = 20/3; with 1 dof the tail
        // is erfc(sqrt(10/3)), approximately 0.009823.
        let r = chi_square(&[vec![10, 20], vec![20, 10]]).unwrap();
        assert!((r.statistic - 20.0 / 3.0).abs() < 1e-12);
        assert_eq!(r.dof, 1);
        assert!((r.p_value - 0.009_823).abs() < 5e-6, "{}", r.p_value);
        assert_eq!(r.expected, vec![vec![15.0, 15.0], vec![15.0, 15.0]]);
    }

    #[test]
    fn chi_square_independent_table() {
        let r = chi_square(&[vec![2, 4, 6], vec![4, 8, 12]]).unwrap();
        assert!(r.statistic.abs() < 1e-12);
        assert!((r.p_value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn chi_square_rejects_bad_tables() {
        assert_eq!(chi_square(&[vec![1, 2]]), Err(InferenceError::TableShape));
        assert_eq!(chi_square(&[vec![1, 2], vec![3]]), Err(InferenceError::TableShape));
        assert!(matches!(
            chi_square(&[vec![1, 0], vec![3, 0]]),
            Err(InferenceError::ZeroMargin { axis: "column", index: 1 })
        ));
    }

    #[test]
    fn chi_square_scales_linearly() {
        let base = chi_square(&[vec![10, 20], vec![20, 10]]).unwrap().statistic;
        let tripled = chi_square(&[vec![30, 60], vec![60, 30]]).unwrap().statistic;
        assert!((tripled - 3.0 * base).abs() < 1e-10);
    }

    #[test]
    fn even_dof_tail_closed_form() {
        // For dof = 2m, P(X > x) = exp(-x/2) * sum_{k<m} (x/2)^k / k!.
        for m in 1..=40u32 {
            for &x in &[0.01, 0.5, 1.0, 3.7, 10.0, 25.0, 60.0, 150.0] {
                let h: f64 = x / 2.0;
                let mut term = 1.0;
                let mut sum = 0.0;
                for k in 0..m {
                    if k > 0 {
                        term *= h / k as f64;
                    }
                    sum += term;
                }
                let exact = (-h).exp() * sum;
                let got = chi_square_sf(x, 2.0 * m as f64);
                let rel = ((got - exact) / exact).abs();
                assert!(rel < 1e-10, "dof {} x {x}: {got} vs {exact} (rel {rel})", 2 * m);
            }
        }
    }

    #[test]
    fn ln_gamma_factorials() {
        let mut fact = 1.0f64;
        for n in 1..30u32 {
            fact *= n as f64;
            let rel = (ln_gamma(n as f64 + 1.0) - fact.ln()).abs() / fact.ln().max(1.0);
            assert!(rel < 1e-13, "n {n}");
        }
        assert!((ln_gamma(0.5) - std::f64::consts::PI.sqrt().ln()).abs() < 1e-14);
    }

    #[test]
    fn matches_reference_implementation() {
        use statrs::distribution::{ChiSquared, ContinuousCDF};
        for &dof in &[1.0, 3.0, 5.0, 7.5, 11.0, 40.0] {
            let reference = ChiSquared::new(dof).unwrap();
            for &x in &[0.1, 1.0, 2.5, 5.17, 9.0, 20.0, 55.0] {
                let want = reference.sf(x);
                let got = chi_square_sf(x, dof);
                assert!(((got - want) / want).abs() < 1e-9, "dof {dof} x {x}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn pearson_values() {
        let x = [1.0, 2.0, 3.0, 4.0];
        assert!((pearson(&x, &x).unwrap() - 1.0).abs() < 1e-15);
        let neg: Vec<f64> = x.iter().map(|v| -2.0 * v + 1.0).collect();
        assert!((pearson(&x, &neg).unwrap() + 1.0).abs() < 1e-15);
        // Hand computation: dx = (-1, 0, 1), dy = (-1, 1, 0); r = 1 / (sqrt2 sqrt2).
        assert!((pearson(&[1.0, 2.0, 3.0], &[1.0, 3.0, 2.0]).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(pearson(&x, &[1.0; 4]), Err(InferenceError::ZeroVariance));
        assert_eq!(pearson(&x, &[1.0]), Err(InferenceError::LengthMismatch(4, 1)));
    }

    #[test]
    fn ks_statistic_and_critical_value() {
        let s: Vec<f64> = (0..100).map(|i| (i as f64 + 0.5) / 100.0).collect();
        assert!((ks_uniform_statistic(&s) - 0.005).abs() < 1e-12);
        assert!((ks_critical_value(10_000, 0.01) - 0.016_276).abs() < 1e-5);
    }

    proptest! {
        #[test]
        fn pvalue_permutation_invariant(obs in 0u64..50, mut v in proptest::collection::vec(0u64..50, 1..200), seed in any::<u64>()) {
            let a = empirical_pvalue(Race::Asian, obs, &v).unwrap();
            let n = v.len();
            for i in 0..n {
                let j = (seed as usize).wrapping_mul(31).wrapping_add(i * 17) % n;
                v.swap(i, j);
            }
            let b = empirical_pvalue(Race::Asian, obs, &v).unwrap();
            prop_assert_eq!(a, b);
        }

        #[test]
        fn pvalue_in_unit_interval(obs in 0u64..50, v in proptest::collection::vec(0u64..50, 1..200)) {
            let p = empirical_pvalue(Race::Other, obs, &v).unwrap();
            prop_assert!((0.0..=1.0).contains(&p.p_unbiased));
            prop_assert!((0.0..=1.0).contains(&p.p_biased));
            prop_assert!(p.n_greater + p.n_less <= p.n_replications);
        }

        #[test]
        fn chi_square_permutation_invariant(t in proptest::collection::vec(proptest::collection::vec(1u64..100, 3), 2..5)) {
            let base = chi_square(&t).unwrap();
            let mut rows = t.clone();
            rows.reverse();
            let cols: Vec<Vec<u64>> = t.iter().map(|r| vec![r[2], r[0], r[1]]).collect();
            prop_assert!((chi_square(&rows).unwrap().statistic - base.statistic).abs() < 1e-9);
            prop_assert!((chi_square(&cols).unwrap().statistic - base.statistic).abs() < 1e-9);
        }

        #[test]
        fn gamma_p_and_q_complement(a in 0.5f64..200.0, x in 0.0f64..400.0) {
            prop_assert!((gamma_p(a, x) + gamma_q(a, x) - 1.0).abs() < 1e-12);
        }
    }
}
