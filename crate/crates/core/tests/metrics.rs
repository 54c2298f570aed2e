use gridfeat_core::metrics::{mpe, mse, MetricPair, MPE_EPSILON};
use proptest::prelude::*;

fn mpe_oracle(a: &[f64], f: &[f64], eps: f64) -> f64 {
    let mut total = 0.0;
    for i in 0..a.len() {
        let mut den = a[i].abs();
        if f[i].abs() > den {
            den = f[i].abs();
        }
        if eps > den {
            den = eps;
        }
        total += (a[i] - f[i]).abs() / den;
    }
    total / a.len() as f64 * 100.0
}

fn mse_oracle(a: &[f64], f: &[f64]) -> f64 {
    let mut total = 0.0;
    for i in 0..a.len() {
        total += (a[i] - f[i]) * (a[i] - f[i]);
    }
    total / a.len() as f64
}

fn rel_close(x: f64, y: f64, tol: f64) -> bool {
    (x - y).abs() <= tol * x.abs().max(y.abs()).max(f64::MIN_POSITIVE)
}

#[test]
fn mpe_examples() {
    assert_eq!(mpe(&[1.0, 2.5], &[1.0, 2.5], MPE_EPSILON).unwrap(), 0.0);
    assert_eq!(mpe(&[0.0], &[0.0], MPE_EPSILON).unwrap(), 0.0);
    assert!((mpe(&[1.0, 3.0], &[2.0, 3.0], MPE_EPSILON).unwrap() - 25.0).abs() < 1e-12);
}

#[test]
fn mse_examples() {
    assert_eq!(mse(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
    assert!((mse(&[0.0, 2.0], &[1.0, 0.0]).unwrap() - 2.5).abs() < 1e-12);
}

#[test]
fn bad_inputs_are_rejected() {
    assert!(mpe(&[1.0], &[1.0, 2.0], MPE_EPSILON).is_err());
    assert!(mpe(&[], &[], MPE_EPSILON).is_err());
    assert!(mpe(&[1.0], &[1.0], 0.0).is_err());
    assert!(mse(&[], &[]).is_err());
    assert!(mse(&[1.0], &[]).is_err());
}

#[test]
fn metric_pair_records_inputs() {
    let p = MetricPair::compute(&[1.0, 3.0], &[2.0, 3.0], MPE_EPSILON).unwrap();
    assert_eq!(p.n_samples, 2);
    assert_eq!(p.epsilon, MPE_EPSILON);
    assert!((p.mse - 0.5).abs() < 1e-15);
    assert!((p.mpe - 25.0).abs() < 1e-12);
}

fn pair() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (1usize..60).prop_flat_map(|n| {
        (
            prop::collection::vec(0.0f64..10.0, n),
            prop::collection::vec(0.0f64..10.0, n),
        )
    })
}

proptest! {
    #[test]
    fn match_loop_oracles((a, f) in pair()) {
        prop_assert!(rel_close(mpe(&a, &f, MPE_EPSILON).unwrap(), mpe_oracle(&a, &f, MPE_EPSILON), 1e-12));
        prop_assert!(rel_close(mse(&a, &f).unwrap(), mse_oracle(&a, &f), 1e-12));
    }

    #[test]
    fn mpe_is_symmetric_and_bounded((a, f) in pair()) {
        let m = mpe(&a, &f, MPE_EPSILON).unwrap();
        prop_assert_eq!(m, mpe(&f, &a, MPE_EPSILON).unwrap());
        prop_assert!((0.0..=100.0).contains(&m));
        prop_assert_eq!(mpe(&a, &a, MPE_EPSILON).unwrap(), 0.0);
        for i in 0..a.len() {
            let term = mpe(&a[i..=i], &f[i..=i], MPE_EPSILON).unwrap();
            prop_assert!((0.0..=100.0).contains(&term));
        }
    }

    #[test]
    fn mse_is_homogeneous((a, f) in pair(), c in 0.1f64..10.0) {
        let sa: Vec<f64> = a.iter().map(|x| x * c).collect();
        let sf: Vec<f64> = f.iter().map(|x| x * c).collect();
        prop_assert!(rel_close(mse(&sa, &sf).unwrap(), c * c * mse(&a, &f).unwrap(), 1e-12));
    }
}
