//! Count-based metrics in percent. `None` marks an undefined value (empty
//! denominator), which is distinct from 0.

pub fn precision(tp: usize, fp: usize) -> Option<f64> {
    (tp + fp > 0).then(|| tp as f64 / (tp + fp) as f64 * 100.0)
}

/// Recall, also called the true positive rate.
pub fn sensitivity(tp: usize, fn_: usize) -> Option<f64> {
    (tp + fn_ > 0).then(|| tp as f64 / (tp + fn_) as f64 * 100.0)
}

pub fn f1_score(pre: f64, sen: f64) -> Option<f64> {
    (pre + sen > 0.0).then(|| 2.0 * sen * pre / (sen + pre))
}

/// Recall-weighted F-measure, on the same scale as its inputs.
pub fn f2_score(pre: f64, sen: f64) -> Option<f64> {
    (4.0 * pre + sen > 0.0).then(|| 5.0 * pre * sen / (4.0 * pre + sen))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn hand_values() {
        assert_eq!(precision(50, 0), Some(100.0));
        assert_eq!(precision(0, 5), Some(0.0));
        assert_eq!(precision(3, 1), Some(75.0));
        assert_eq!(precision(0, 0), None);
        assert_eq!(sensitivity(10, 0), Some(100.0));
        assert_eq!(sensitivity(0, 4), Some(0.0));
        assert_eq!(sensitivity(2, 6), Some(25.0));
        assert_eq!(sensitivity(0, 0), None);
        assert!((f1_score(60.0, 40.0).unwrap() - 48.0).abs() < 1e-12);
        assert!((f2_score(60.0, 40.0).unwrap() - 12000.0 / 280.0).abs() < 1e-12);
        assert_eq!(f1_score(0.0, 0.0), None);
        assert_eq!(f2_score(0.0, 0.0), None);
    }

    proptest! {
        #[test]
        fn bounded_and_between(tp in 0usize..100, fp in 0usize..100, fn_ in 0usize..100) {
            if let (Some(p), Some(s)) = (precision(tp, fp), sensitivity(tp, fn_)) {
                prop_assert!((0.0..=100.0).contains(&p) && (0.0..=100.0).contains(&s));
                if let Some(f1) = f1_score(p, s) {
                    prop_assert!(f1 >= p.min(s) - 1e-9 && f1 <= p.max(s) + 1e-9);
                }
                if let Some(f2) = f2_score(p, s) {
                    prop_assert!((0.0..=100.0 + 1e-9).contains(&f2));
                }
            }
        }

        #[test]
        fn equal_inputs_are_fixed_points(p in 0.001f64..100.0) {
            prop_assert!((f1_score(p, p).unwrap() - p).abs() < 1e-9);
            prop_assert!((f2_score(p, p).unwrap() - p).abs() < 1e-9);
        }
    }
}
