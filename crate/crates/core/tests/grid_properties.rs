use lmcflow_core::grid_core::{eigen_sym, hessian_central, lagrangian_angle};
use lmcflow_core::{GridFunction, GridSpec, SymmetricMatrix};
use proptest::prelude::*;

fn sym(n: usize) -> impl Strategy<Value = SymmetricMatrix> {
    prop::collection::vec(-5.0f64..5.0, n * n).prop_map(move |e| {
        let rows: Vec<Vec<f64>> = e.chunks(n).map(|c| c.to_vec()).collect();
        SymmetricMatrix::from_rows(&rows)
    })
}

fn sized_sym() -> impl Strategy<Value = SymmetricMatrix> {
    (1usize..=4).prop_flat_map(sym)
}

/// Orthogonal factor of a random matrix by Gram-Schmidt.
fn orthogonal(n: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(-1.0f64..1.0, n * n).prop_filter_map("degenerate", move |e| {
        let mut q: Vec<Vec<f64>> = Vec::new();
        for row in e.chunks(n) {
            let mut v = row.to_vec();
            for b in &q {
                let d: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
                v.iter_mut().zip(b).for_each(|(x, y)| *x -= d * y);
            }
            let len = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if len < 1e-3 {
                return None;
            }
            q.push(v.into_iter().map(|x| x / len).collect());
        }
        Some(q)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn angle_is_odd(m in sized_sym()) {
        let s = lagrangian_angle(&m).unwrap() + lagrangian_angle(&m.scale(-1.0)).unwrap();
        prop_assert!(s.abs() <= 1e-12, "sum {s}");
    }

    #[test]
    fn angle_is_monotone(m in sized_sym(), seed in prop::collection::vec(-2.0f64..2.0, 16)) {
        let n = m.dim();
        // N = M + B B^T is above M
        let b: Vec<Vec<f64>> = seed.chunks(4).take(n).map(|c| c[..n].to_vec()).collect();
        let bbt = SymmetricMatrix::from_fn(n, |i, j| (0..n).map(|k| b[i][k] * b[j][k]).sum());
        let big = m.add(&bbt);
        prop_assert!(eigen_sym(&big.sub(&m)).unwrap().min() >= -1e-12);
        prop_assert!(lagrangian_angle(&m).unwrap() <= lagrangian_angle(&big).unwrap() + 1e-10);
    }

    #[test]
    fn angle_is_orthogonally_invariant((m, q) in (1usize..=4).prop_flat_map(|n| (sym(n), orthogonal(n)))) {
        let d = lagrangian_angle(&m.congruence(&q)).unwrap() - lagrangian_angle(&m).unwrap();
        prop_assert!(d.abs() <= 1e-9, "difference {d}");
    }

    #[test]
    fn spectrum_is_sorted_orthonormal_and_reconstructs(m in sized_sym()) {
        let n = m.dim();
        let sp = eigen_sym(&m).unwrap();
        prop_assert!(sp.values.windows(2).all(|w| w[0] <= w[1]));
        for i in 0..n {
            for j in 0..n {
                let dot: f64 = sp.vectors[i].iter().zip(&sp.vectors[j]).map(|(a, b)| a * b).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                prop_assert!((dot - want).abs() <= 1e-10);
            }
        }
        let err = sp.reconstruct().sub(&m).max_abs();
        prop_assert!(err <= 1e-9 * (1.0 + m.max_abs()), "reconstruction error {err}");
    }

    #[test]
    fn hessian_exact_on_quadratics(
        n in 1usize..=3,
        coef in prop::collection::vec(-3.0f64..3.0, 16),
        h in 0.05f64..0.3,
    ) {
        let a = SymmetricMatrix::from_fn(n, |i, j| coef[i * 4 + j] + coef[j * 4 + i]);
        let lin: Vec<f64> = coef[12..12 + n].to_vec();
        let spec = GridSpec::new(vec![-0.4; n], h, 7).unwrap();
        let u = GridFunction::from_fn(spec.clone(), |x| {
            let ax = a.mul_vec(x);
            0.5 * x.iter().zip(&ax).map(|(p, q)| p * q).sum::<f64>()
                + x.iter().zip(&lin).map(|(p, q)| p * q).sum::<f64>()
                + coef[15]
        })
        .unwrap();
        let hess = hessian_central(&u, &vec![3; n]).unwrap();
        let scale = 1.0 + a.max_abs();
        prop_assert!(hess.sub(&a).max_abs() <= 1e-8 * scale / h);
    }
}

#[test]
fn hessian_is_second_order_on_quartics() {
    let x0 = [0.5, 0.3];
    let exact = |x: &[f64]| {
        let r2 = x[0] * x[0] + x[1] * x[1];
        SymmetricMatrix::from_fn(2, |i, j| 2.0 * x[i] * x[j] + if i == j { r2 } else { 0.0 })
    };
    let err = |h: f64| {
        let spec = GridSpec::new(vec![x0[0] - 2.0 * h, x0[1] - 2.0 * h], h, 5).unwrap();
        let u = GridFunction::from_fn(spec, |x| (x[0] * x[0] + x[1] * x[1]).powi(2) / 4.0).unwrap();
        hessian_central(&u, &[2, 2]).unwrap().sub(&exact(&x0)).max_abs()
    };
    for h in [0.04, 0.02, 0.01] {
        let ratio = err(h) / err(h / 2.0);
        assert!((ratio - 4.0).abs() <= 0.4, "h = {h}: ratio {ratio}");
    }
}
