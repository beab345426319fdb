/// Seminorm for comparing two base estimates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LepskiNorm {
    /// Absolute difference of single values (each estimate has one entry).
    PointwiseAt,
    /// `(mean_i |a_i - b_i|^q)^(1/q)` over the entries present in both.
    EmpiricalLq(f64),
}

impl LepskiNorm {
    pub fn distance(&self, a: &[Option<f64>], b: &[Option<f64>]) -> Option<f64> {
        match *self {
            LepskiNorm::PointwiseAt => match (a.first(), b.first()) {
                (Some(Some(x)), Some(Some(y))) => Some((x - y).abs()),
                _ => None,
            },
            LepskiNorm::EmpiricalLq(q) => {
                let (sum, count) = a
                    .iter()
                    .zip(b)
                    .filter_map(|(x, y)| Some((x.as_ref()? - y.as_ref()?).abs()))
                    .fold((0.0, 0usize), |(s, c), d| (s + libm::pow(d, q), c + 1));
                (count > 0).then(|| libm::pow(sum / count as f64, 1.0 / q))
            }
        }
    }
}

/// Lepski index
/// `inf{k < K : exists l <= k, |f_{k+1} - f_l| > t_l + t_{k+1}}`, or `K`.
///
/// `estimates[k]` holds the bandwidth-`k` estimate (`k = 0..=K`) and
/// `thresholds[k]` its truncated critical value. Comparisons with no common
/// entry are skipped.
pub fn lepski_select(estimates: &[alloc::vec::Vec<Option<f64>>], thresholds: &[f64], norm: LepskiNorm) -> usize {
    let k_max = estimates
        .len()
        .saturating_sub(1)
        .min(thresholds.len().saturating_sub(1));
    (0..k_max)
        .find(|&k| {
            (0..=k).any(|l| {
                norm.distance(&estimates[k + 1], &estimates[l])
                    .is_some_and(|d| d > thresholds[l] + thresholds[k + 1])
            })
        })
        .unwrap_or(k_max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use alloc::vec::Vec;

    fn pts(v: &[f64]) -> Vec<Vec<Option<f64>>> {
        v.iter().map(|&x| vec![Some(x)]).collect()
    }

    #[test]
    fn identical_estimates_reach_k_max() {
        let est = pts(&[1.0; 5]);
        assert_eq!(lepski_select(&est, &[0.0; 5], LepskiNorm::PointwiseAt), 4);
    }

    #[test]
    fn zero_thresholds_stop_at_first_difference() {
        let est = pts(&[1.0, 1.5, 1.5, 1.5]);
        assert_eq!(lepski_select(&est, &[0.0; 4], LepskiNorm::PointwiseAt), 0);
    }

    #[test]
    fn hand_built_violation_at_one() {
        // k = 0: |f1 - f0| = 0.1 <= 0.3 + 0.2.
        // k = 1: |f2 - f0| = 0.9 > 0.3 + 0.1, so k_hat = 1.
        let est = pts(&[0.0, 0.1, 0.9, 0.9]);
        let t = [0.3, 0.2, 0.1, 0.0];
        assert_eq!(lepski_select(&est, &t, LepskiNorm::PointwiseAt), 1);
    }

    #[test]
    fn empirical_norm_skips_missing() {
        let a = vec![Some(0.0), None, Some(1.0)];
        let b = vec![Some(2.0), Some(5.0), Some(1.0)];
        let d = LepskiNorm::EmpiricalLq(1.0).distance(&a, &b).unwrap();
        assert!((d - 1.0).abs() < 1e-15);
        let d2 = LepskiNorm::EmpiricalLq(2.0).distance(&a, &b).unwrap();
        assert!((d2 - libm::sqrt(2.0)).abs() < 1e-15);
        assert_eq!(LepskiNorm::EmpiricalLq(1.0).distance(&[None], &[Some(1.0)]), None);
    }
}
