//! End-to-end use of the public API: synthetic landmark files through to an
//! estimate and a tail probability.

use eulerian_shape::inference::{samples_from_configurations, Likelihood, TailMethod};
use eulerian_shape::simulate::synthetic_configurations;
use eulerian_shape::{
    mle, parse_landmark_file, tail_probability, write_landmark_file, CanonicalCorrModel, Centering, CorrelationSample,
    DensityForm, MleOptions, QuadratureSpec, SeriesSpec, SimSpec, TailOptions,
};
use proptest::prelude::*;

fn spec(rho2: Vec<f64>, count: usize, seed: u64) -> SimSpec {
    SimSpec {
        k: 2,
        n: 12,
        rho2,
        count,
        seed,
    }
}

#[test]
fn landmark_files_to_estimate() {
    let (x, y) = synthetic_configurations(&spec(vec![0.8, 0.4], 120, 5)).unwrap();
    let x = parse_landmark_file(&write_landmark_file(&x).unwrap()).unwrap();
    let y = parse_landmark_file(&write_landmark_file(&y).unwrap()).unwrap();
    assert_eq!(x[0].landmarks(), 13);
    let samples = samples_from_configurations(&x, &y, Centering::None).unwrap();
    let report = mle(&samples, 2, 12, &MleOptions::default()).unwrap();
    assert!(report.converged);
    assert_eq!(report.polynomial_degree, Some(10));
    assert!((report.rho2_hat[0] - 0.8).abs() < 0.08, "{:?}", report.rho2_hat);
    assert!((report.rho2_hat[1] - 0.4).abs() < 0.15, "{:?}", report.rho2_hat);
}

#[test]
fn tail_probability_quadrature_agrees_with_simulation() {
    let model = CanonicalCorrModel::new(2, 12, vec![0.5, 0.3]).unwrap();
    let exact = tail_probability(&[0.6, 0.2], &model, &TailOptions::default()).unwrap();
    assert_eq!(exact.method, TailMethod::Quadrature);
    let sims = eulerian_shape::sample_canonical_pairs(&spec(vec![0.5, 0.3], 20_000, 77)).unwrap();
    let hits = sims
        .samples
        .iter()
        .filter(|s| s.values()[0] > 0.6 && s.values()[1] > 0.2)
        .count() as f64
        / 20_000.0;
    let sd = (exact.value * (1.0 - exact.value) / 20_000.0).sqrt();
    assert!((hits - exact.value).abs() < 4.0 * sd, "{hits} vs {}", exact.value);
}

#[test]
fn series_and_polynomial_likelihoods_agree() {
    let sims = eulerian_shape::sample_canonical_pairs(&spec(vec![0.25, 0.1], 30, 3)).unwrap();
    let quad = QuadratureSpec::default();
    let series = SeriesSpec::with_max_degree(150);
    let rho2 = [0.2, 0.05];
    let value = |form| {
        Likelihood::new(sims.samples.clone(), 2, 12, form, &quad, &series)
            .unwrap()
            .log_likelihood(&rho2)
            .unwrap()
    };
    let (poly, ser) = (value(DensityForm::Polynomial), value(DensityForm::Series));
    assert!((poly - ser).abs() < 1e-8 * poly.abs(), "{poly} vs {ser}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn likelihood_ignores_sample_order(seed in 0u64..1000, a in 0.05f64..0.9, b in 0.0f64..0.9) {
        let sims = eulerian_shape::sample_canonical_pairs(&spec(vec![0.6, 0.2], 15, seed)).unwrap();
        let mut reversed: Vec<CorrelationSample> = sims.samples.clone();
        reversed.reverse();
        let rho2 = [a.max(b), a.min(b)];
        let quad = QuadratureSpec::default();
        let series = SeriesSpec::default();
        let value = |samples: Vec<CorrelationSample>| {
            Likelihood::new(samples, 2, 12, DensityForm::Auto, &quad, &series)
                .unwrap()
                .log_likelihood(&rho2)
                .unwrap()
        };
        let (forward, backward) = (value(sims.samples.clone()), value(reversed));
        prop_assert_eq!(forward.to_bits(), backward.to_bits());
    }
}
