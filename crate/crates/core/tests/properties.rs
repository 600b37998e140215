//! Property tests for the structural invariants: bijectivity, centering,
//! bound monotonicity, norm homogeneity, and p-value validity.

use permstat::bounds::{orlicz_norm_estimate, TailBoundSpec};
use permstat::clt::ks_distance_to_normal;
use permstat::moments::PermMatrix;
use permstat::perm::{binomial, random_permutation, sample_without_replacement};
use permstat::process::{donsker_cov, ScalarPopulation};
use permstat::rng::RngState;
use permstat::twosample::{exact_perm_test, Side, Statistic, TwoSampleData};
use proptest::prelude::*;

fn finite_vec(len: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-50.0f64..50.0, len)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn random_permutations_are_bijections(seed in any::<u64>(), n in 1usize..30) {
        let mut rng = RngState::new(seed, 0);
        let p = random_permutation(n, &mut rng).unwrap();
        let mut sorted: Vec<u32> = p.images().to_vec();
        sorted.sort_unstable();
        prop_assert_eq!(sorted, (1..=n as u32).collect::<Vec<_>>());
        prop_assert_eq!(p.inverse().inverse(), p);
    }

    #[test]
    fn sample_masks_have_exact_counts(seed in any::<u64>(), n_total in 1usize..40, pick in 0usize..39) {
        let n_sample = pick % n_total + 1;
        let mut rng = RngState::new(seed, 1);
        let mask = sample_without_replacement(n_total, n_sample, &mut rng).unwrap();
        prop_assert_eq!(mask.selected_indices().len(), n_sample);
    }

    #[test]
    fn centering_kills_row_and_column_shifts(
        base in finite_vec(16..=16),
        rows in finite_vec(4..=4),
        cols in finite_vec(4..=4),
    ) {
        let make = |shift: bool| {
            let data: Vec<Vec<f64>> = (0..4)
                .map(|i| {
                    (0..4)
                        .map(|j| {
                            base[i * 4 + j]
                                + if shift { rows[i] + cols[j] } else { 0.0 }
                        })
                        .collect()
                })
                .collect();
            PermMatrix::new(&data).unwrap()
        };
        let plain = make(false);
        let shifted = make(true);
        let scale = 1.0 + plain.b_max().abs();
        prop_assert!((plain.sigma2() - shifted.sigma2()).abs() < 1e-8 * scale * scale);
        prop_assert!((plain.b_max() - shifted.b_max()).abs() < 1e-8 * scale);
    }

    #[test]
    fn tail_bounds_are_valid_survival_bounds(
        sigma2 in 0.01f64..100.0,
        b_max in 0.01f64..10.0,
        n in 2usize..200,
        t1 in 0.0f64..20.0,
        t2 in 0.0f64..20.0,
    ) {
        let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
        for spec in [
            TailBoundSpec::CombHoeffdingV1 { sigma2, b_max, n },
            TailBoundSpec::CombBernstein { sigma2, b_max },
        ] {
            let a = spec.eval(lo).unwrap();
            let b = spec.eval(hi).unwrap();
            prop_assert!(a > 0.0 && a <= 1.0);
            prop_assert!(b <= a + 1e-15, "bound increased in t");
        }
    }

    #[test]
    fn orlicz_norm_is_homogeneous(samples in finite_vec(2..=40), scale in 0.1f64..10.0) {
        prop_assume!(samples.iter().any(|v| v.abs() > 1e-6));
        let scaled: Vec<f64> = samples.iter().map(|v| v * scale).collect();
        let a = orlicz_norm_estimate(&samples, 2).unwrap();
        let b = orlicz_norm_estimate(&scaled, 2).unwrap();
        prop_assert!((b - scale * a).abs() <= 1e-5 * b.max(1e-12));
    }

    #[test]
    fn exact_p_values_are_valid_rationals(
        x in finite_vec(1..=4),
        y in finite_vec(1..=4),
    ) {
        let data = TwoSampleData::new(x.clone(), y.clone()).unwrap();
        let r = exact_perm_test(&data, &Statistic::MeanDiff, Side::TwoSided).unwrap();
        prop_assert!(r.p_value > 0.0 && r.p_value <= 1.0);
        let denom = binomial(x.len() + y.len(), x.len());
        let numer = r.p_value * denom;
        prop_assert!((numer - numer.round()).abs() < 1e-9, "p is not k/C(m+n,m)");
    }

    #[test]
    fn donsker_diagonal_is_nonnegative(values in finite_vec(2..=12), pick in 0usize..11) {
        let pop = ScalarPopulation::from_values(&values).unwrap();
        let n_sample = pick % values.len() + 1;
        let v = donsker_cov(&pop, n_sample, &|&z| z, &|&z| z).unwrap();
        prop_assert!(v >= -1e-12);
    }

    #[test]
    fn ks_distance_is_in_unit_interval(samples in finite_vec(1..=60)) {
        let ks = ks_distance_to_normal(&samples).unwrap();
        prop_assert!((0.0..=1.0).contains(&ks));
    }
}
