//! Contracts of truncated critical values and the Lepski index.

use frontier_core::{lepski_select, CriticalValues, CvKind, LepskiNorm};
use proptest::prelude::*;

fn estimates(v: &[f64]) -> Vec<Vec<Option<f64>>> {
    v.iter().map(|&x| vec![Some(x)]).collect()
}

proptest! {
    #[test]
    fn truncated_values_are_monotone_and_end_at_zero(raw in prop::collection::vec(0.0f64..5.0, 2..15)) {
        let k = raw.len();
        let cv = CriticalValues::from_raw(raw, vec![false; k], CvKind::Pointwise);
        prop_assert!(cv.truncated.iter().all(|z| (0.0..=1.0).contains(z)));
        prop_assert!(cv.truncated.windows(2).all(|w| w[1] <= w[0]));
        prop_assert_eq!(*cv.truncated.last().unwrap(), 0.0);
    }

    #[test]
    fn larger_thresholds_never_lower_the_index(
        est in prop::collection::vec(-1.0f64..1.0, 2..12),
        raw in prop::collection::vec(0.0f64..0.5, 12),
        bump in prop::collection::vec(0.0f64..0.5, 12),
    ) {
        let k = est.len();
        let small = CriticalValues::from_raw(raw[..k].to_vec(), vec![false; k], CvKind::Pointwise);
        let big_raw: Vec<f64> = raw[..k].iter().zip(&bump).map(|(a, b)| a + b).collect();
        let big = CriticalValues::from_raw(big_raw, vec![false; k], CvKind::Pointwise);
        let e = estimates(&est);
        let k1 = lepski_select(&e, &small.truncated, LepskiNorm::PointwiseAt);
        let k2 = lepski_select(&e, &big.truncated, LepskiNorm::PointwiseAt);
        prop_assert!(k1 < k && k2 < k);
        prop_assert!(k2 >= k1);
    }
}
