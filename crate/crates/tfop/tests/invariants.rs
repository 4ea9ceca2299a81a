//! Property tests over randomly generated signals, symbols, matrices and
//! weights.

use num_complex::Complex64;
use proptest::prelude::*;
use tfop::grid::{forward_dft, inverse_dft};
use tfop::harness::report::records_json;
use tfop::harness::CheckRecord;
use tfop::norms::{modulation_norm, nested_norm, Level};
use tfop::operators::{op_pseudo, quantization_transfer};
use tfop::schatten::{interpolation_audit, matrix_singular_values, schatten_norm};
use tfop::stft::{istft, stft};
use tfop::weights::{bracket, WeightSpec};
use tfop::window::WindowSpec;
use tfop::{GridSpec, SampledFunction};

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn signal(n: usize) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64).prop_map(|(re, im)| Complex64::new(re, im)), n)
}

fn sampled(g: GridSpec, v: Vec<Complex64>) -> SampledFunction {
    SampledFunction::from_fn(g, |x| v[g.lattice_index(x[0]).unwrap()])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn transform_is_unitary_and_invertible(v in signal(32)) {
        let g = GridSpec::new(1, 5.0, 32).unwrap();
        let f = sampled(g, v);
        prop_assume!(f.norm_l2() > 1e-6);
        let hat = forward_dft(&f).unwrap();
        prop_assert!((hat.norm_l2() - f.norm_l2()).abs() <= 1e-12 * f.norm_l2());
        let back = inverse_dft(&hat).unwrap();
        prop_assert!(back.axpby(c(1.0), &f, c(-1.0)).unwrap().max_abs() <= 1e-12 * f.max_abs().max(1.0));
    }

    #[test]
    fn short_time_transform_preserves_energy_and_inverts(v in signal(16)) {
        let g = GridSpec::new(1, 8.0, 16).unwrap();
        let f = sampled(g, v);
        prop_assume!(f.norm_l2() > 1e-6);
        let chi = WindowSpec::gaussian(g).unwrap();
        let s = stft(&f, &chi).unwrap();
        let m2 = modulation_norm(&s, 2.0, 2.0, &WeightSpec::trivial(2)).unwrap();
        prop_assert!((m2 - chi.norm_l2() * f.norm_l2()).abs() <= 1e-10 * m2);
        let back = istft(&s, &chi).unwrap();
        prop_assert!(back.axpby(c(1.0), &f, c(-1.0)).unwrap().norm_l2() <= 1e-10 * f.norm_l2());
    }

    #[test]
    fn modulation_norms_decrease_in_the_exponents(v in signal(16), p in 1.0..6.0f64, dp in 0.0..4.0f64) {
        let g = GridSpec::new(1, 8.0, 16).unwrap();
        let f = sampled(g, v);
        let s = stft(&f, &WindowSpec::gaussian(g).unwrap()).unwrap();
        let w = WeightSpec::trivial(2);
        // lattice sums are monotone once the quadrature cell is absorbed
        let cell = g.spacing() * g.freq_step();
        let scaled = |p: f64| modulation_norm(&s, p, p, &w).unwrap() / cell.powf(1.0 / p);
        prop_assert!(scaled(p + dp) <= scaled(p) * (1.0 + 1e-12));
    }

    #[test]
    fn nested_norm_is_homogeneous_and_subadditive(
        a in prop::collection::vec(0.0..1.0f64, 12),
        b in prop::collection::vec(0.0..1.0f64, 12),
        p in 1.0..5.0f64,
        q in 1.0..5.0f64,
        lambda in 0.0..10.0f64,
    ) {
        let levels = [Level::new(vec![1], p), Level::new(vec![0], q)];
        let norm = |v: &[f64]| nested_norm(v, &[3, 4], &[0.5, 0.25], &levels).unwrap();
        let scaled: Vec<f64> = a.iter().map(|x| lambda * x).collect();
        prop_assert!((norm(&scaled) - lambda * norm(&a)).abs() <= 1e-12 * (1.0 + lambda * norm(&a)));
        let sum: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
        prop_assert!(norm(&sum) <= (norm(&a) + norm(&b)) * (1.0 + 1e-12));
    }

    #[test]
    fn bracket_weights_are_submultiplicative(
        x in prop::collection::vec(-20.0..20.0f64, 3),
        y in prop::collection::vec(-20.0..20.0f64, 3),
        s in 0.0..4.0f64,
    ) {
        let sum: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a + b).collect();
        let v = WeightSpec::bracket_power(3, s);
        let (vs, vx, vy) = (v.eval(&sum).unwrap(), v.eval(&x).unwrap(), v.eval(&y).unwrap());
        prop_assert!(vs <= vx * vy * (1.0 + 1e-12));
        prop_assert!((v.eval(&x).unwrap() - bracket(&x).powf(s)).abs() <= 1e-12 * vx);
    }

    #[test]
    fn schatten_norms_are_monotone_and_log_convex(
        entries in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 36),
        p1 in 1.0..4.0f64,
        dp in 0.0..8.0f64,
        theta in 0.0..1.0f64,
    ) {
        let m = nalgebra::DMatrix::from_iterator(6, 6, entries.into_iter().map(|(re, im)| Complex64::new(re, im)));
        let s = matrix_singular_values(&m).unwrap();
        let norms: Vec<f64> = [1.0, 2.0, 4.0, f64::INFINITY].iter().map(|&p| schatten_norm(&s, p).unwrap()).collect();
        for w in norms.windows(2) {
            prop_assert!(w[1] <= w[0] * (1.0 + 1e-12));
        }
        prop_assert!(interpolation_audit(&s, p1, p1 + dp, theta).unwrap() >= -1e-10 * norms[0]);
    }

    #[test]
    fn quantization_transfer_round_trips(
        cx in -1.0..1.0f64,
        cxi in -1.0..1.0f64,
        spread in 0.9..1.2f64,
        w in -0.5..0.5f64,
        s in 0usize..5,
        t in 0usize..5,
    ) {
        let g = GridSpec::matched(2, 48).unwrap();
        let a = SampledFunction::from_fn(g, |x| {
            Complex64::from_polar((-((x[0] - cx).powi(2) + (x[1] - cxi).powi(2)) / (2.0 * spread * spread)).exp(), w * x[1])
        });
        let (s, t) = (s as f64 / 4.0, t as f64 / 4.0);
        let b = quantization_transfer(&a, s, t).unwrap();
        let back = quantization_transfer(&b, t, s).unwrap();
        prop_assert!(back.axpby(c(1.0), &a, c(-1.0)).unwrap().max_abs() < 1e-10);
        let d = op_pseudo(&a, s).unwrap().max_entry_diff(&op_pseudo(&b, t).unwrap()).unwrap();
        prop_assert!(d < 1e-6, "{d:e}");
    }

    #[test]
    fn check_records_survive_serialization(value in -1e300..1e300f64, tol in 0.0..1e10f64) {
        let r = CheckRecord::below("n", "a", value, tol);
        let back: Vec<CheckRecord> = serde_json::from_str(&records_json(std::slice::from_ref(&r)).unwrap()).unwrap();
        prop_assert_eq!(back, vec![r]);
    }
}
