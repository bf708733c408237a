//! Replication statistics: mean, sample standard deviation, and Student-t
//! confidence intervals.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::Scalar;

/// Mean, spread, and a 95% confidence interval over replications.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub mean: Scalar,
    pub std_dev: Scalar,
    pub ci95_low: Scalar,
    pub ci95_high: Scalar,
    pub n: usize,
}

impl SummaryStats {
    pub fn ci_half_width(&self) -> Scalar {
        (self.ci95_high - self.ci95_low) / 2.0
    }

    /// Whether the two intervals share no point.
    pub fn ci_disjoint(&self, other: &SummaryStats) -> bool {
        self.ci95_high < other.ci95_low || other.ci95_high < self.ci95_low
    }
}

pub fn mean(values: &[Scalar]) -> Scalar {
    if values.is_empty() {
        return 0.0;
    }
    values.iter().sum::<Scalar>() / values.len() as Scalar
}

/// Sample standard deviation (n - 1 denominator); zero for n < 2.
pub fn sample_std(values: &[Scalar]) -> Scalar {
    if values.len() < 2 {
        return 0.0;
    }
    let m = mean(values);
    let ss: Scalar = values.iter().map(|v| (v - m) * (v - m)).sum();
    (ss / (values.len() - 1) as Scalar).sqrt()
}

/// Two-sided Student-t 97.5% quantile with `df` degrees of freedom.
pub fn t_975(df: usize) -> Scalar {
    let dist = StudentsT::new(0.0, 1.0, df as f64).expect("valid t distribution");
    dist.inverse_cdf(0.975)
}

/// Summarize replication values with a 95% t confidence interval on the
/// mean. A single value yields a degenerate interval at the value itself.
pub fn summarize(values: &[Scalar]) -> SummaryStats {
    let n = values.len();
    let m = mean(values);
    let s = sample_std(values);
    let half = if n >= 2 {
        t_975(n - 1) * s / (n as Scalar).sqrt()
    } else {
        0.0
    };
    SummaryStats {
        mean: m,
        std_dev: s,
        ci95_low: m - half,
        ci95_high: m + half,
        n,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn mean_and_std() {
        let values = [2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0];
        assert_relative_eq!(mean(&values), 5.0, epsilon = 1e-12);
        assert_relative_eq!(sample_std(&values), (32.0f64 / 7.0).sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn t_quantiles_match_tables() {
        assert_relative_eq!(t_975(9), 2.2622, epsilon = 1e-3);
        assert_relative_eq!(t_975(29), 2.0452, epsilon = 1e-3);
    }

    #[test]
    fn degenerate_cases() {
        let s = summarize(&[3.0]);
        assert_eq!(s.mean, 3.0);
        assert_eq!(s.std_dev, 0.0);
        assert_eq!((s.ci95_low, s.ci95_high), (3.0, 3.0));
        assert_eq!(mean(&[]), 0.0);
    }

    #[test]
    fn identical_values_give_zero_width() {
        let s = summarize(&[7.0; 10]);
        assert_eq!(s.std_dev, 0.0);
        assert_eq!(s.ci95_low, 7.0);
        assert_eq!(s.ci95_high, 7.0);
    }

    #[test]
    fn disjoint_intervals() {
        let a = summarize(&[1.0, 1.1, 0.9]);
        let b = summarize(&[5.0, 5.1, 4.9]);
        assert!(a.ci_disjoint(&b));
        assert!(b.ci_disjoint(&a));
        assert!(!a.ci_disjoint(&a));
    }
}
