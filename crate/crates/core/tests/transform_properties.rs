use lmcflow_core::convex_transform::{
    common_nodes, conjugate_brute, conjugate_with_argmax, convex_envelope, covering_dual_spec, inverse_rotate,
    legendre_transform, lewy_yuan_rotate, COS, SIN,
};
use lmcflow_core::{GridFunction, GridSpec};
use proptest::prelude::*;

/// Random smooth convex function: quadratic plus a weighted `|x - c|^p` and a softplus ridge.
#[derive(Debug, Clone)]
struct Convex {
    diag: Vec<f64>,
    shift: Vec<f64>,
    w: f64,
    p: f64,
    ridge: Vec<f64>,
}

impl Convex {
    fn eval(&self, x: &[f64]) -> f64 {
        let quad: f64 = x.iter().zip(&self.diag).map(|(v, d)| 0.5 * d * v * v).sum();
        let r = x.iter().zip(&self.shift).map(|(v, c)| (v - c).powi(2)).sum::<f64>().sqrt();
        let t: f64 = x.iter().zip(&self.ridge).map(|(v, k)| v * k).sum();
        quad + self.w * r.powf(self.p) / self.p + (1.0 + t.exp()).ln()
    }
}

fn convex(n: usize) -> impl Strategy<Value = Convex> {
    (
        prop::collection::vec(0.2f64..3.0, n),
        prop::collection::vec(-0.5f64..0.5, n),
        0.0f64..1.0,
        2.0f64..4.0,
        prop::collection::vec(-1.0f64..1.0, n),
    )
        .prop_map(|(diag, shift, w, p, ridge)| Convex { diag, shift, w, p, ridge })
}

fn sample(f: &Convex, spec: &GridSpec) -> GridFunction {
    GridFunction::from_fn(spec.clone(), |x| f.eval(x)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn fast_transform_matches_brute_force(f in (1usize..=2).prop_flat_map(convex)) {
        let n = f.diag.len();
        let spec = GridSpec::centered(n, 1.0, if n == 1 { 101 } else { 21 }).unwrap();
        let u = sample(&f, &spec);
        let dual = covering_dual_spec(&u, spec.spacing()).unwrap();
        let fast = conjugate_with_argmax(&u, &dual).unwrap();
        let brute = conjugate_brute(&u, &dual).unwrap();
        prop_assert_eq!(fast.values.values(), brute.values.values());
        prop_assert_eq!(fast.argmax, brute.argmax);
    }

    #[test]
    fn fenchel_young_inequality(f in (1usize..=2).prop_flat_map(convex)) {
        let n = f.diag.len();
        let spec = GridSpec::centered(n, 1.0, if n == 1 { 41 } else { 11 }).unwrap();
        let u = sample(&f, &spec);
        let dual = covering_dual_spec(&u, 0.1).unwrap();
        let us = legendre_transform(&u, &dual).unwrap();
        for j in 0..spec.len() {
            let x = spec.point_of(j);
            for k in 0..dual.len() {
                let t = dual.point_of(k);
                let dot: f64 = x.iter().zip(&t).map(|(a, b)| a * b).sum();
                prop_assert!(u.at_flat(j) + us.at_flat(k) >= dot - 1e-9);
            }
        }
    }

    #[test]
    fn biconjugate_is_below_and_close(f in (1usize..=2).prop_flat_map(convex)) {
        let n = f.diag.len();
        let spec = GridSpec::centered(n, 1.0, if n == 1 { 201 } else { 31 }).unwrap();
        let h = spec.spacing();
        let u = sample(&f, &spec);
        let dual = covering_dual_spec(&u, h).unwrap();
        let us = legendre_transform(&u, &dual).unwrap();
        let uss = legendre_transform(&us, &spec).unwrap();
        let mut worst = 0.0f64;
        for j in 0..spec.len() {
            let gap = u.at_flat(j) - uss.at_flat(j);
            // rounding of x.t - (x.t - u) only
            prop_assert!(gap >= -1e-14 * (1.0 + u.at_flat(j).abs()), "biconjugate above u by {}", -gap);
            if spec.is_interior(&spec.multi_index(j), 1) {
                worst = worst.max(gap);
            }
        }
        prop_assert!(worst <= h, "interior gap {worst} at h = {h}");
    }

    #[test]
    fn transform_reverses_order(
        f in (1usize..=2).prop_flat_map(convex),
        bump in prop::collection::vec(0.0f64..0.3, 64),
    ) {
        let n = f.diag.len();
        let spec = GridSpec::centered(n, 1.0, if n == 1 { 64 } else { 8 }).unwrap();
        let u = sample(&f, &spec);
        let v = GridFunction::new(spec.clone(), u.values().iter().zip(&bump).map(|(a, b)| a + b).collect()).unwrap();
        let lo = covering_dual_spec(&u, 0.05).unwrap();
        let hi = covering_dual_spec(&v, 0.05).unwrap();
        // one dual box covering both slope ranges
        let lo_c: Vec<f64> = (0..n).map(|a| lo.lo()[a].min(hi.lo()[a])).collect();
        let m = (0..n)
            .map(|a| ((lo.hi(a).max(hi.hi(a)) - lo_c[a]) / 0.05).ceil() as usize + 1)
            .max()
            .unwrap();
        let dual = GridSpec::new(lo_c, 0.05, m).unwrap();
        let us = legendre_transform(&u, &dual).unwrap();
        let vs = legendre_transform(&v, &dual).unwrap();
        for k in 0..dual.len() {
            prop_assert!(us.at_flat(k) >= vs.at_flat(k));
        }
    }

    #[test]
    fn envelope_is_an_idempotent_minorant(
        n in 1usize..=2,
        vals in prop::collection::vec(-1.0f64..1.0, 49),
    ) {
        let m = if n == 1 { 49 } else { 7 };
        let spec = GridSpec::centered(n, 1.0, m).unwrap();
        let u = GridFunction::new(spec, vals[..m.pow(n as u32)].to_vec()).unwrap();
        let env = convex_envelope(&u).unwrap();
        for j in 0..u.values().len() {
            prop_assert!(env.at_flat(j) <= u.at_flat(j));
        }
        let again = convex_envelope(&env).unwrap();
        prop_assert!(again.max_abs_diff(&env) <= 1e-9);
    }

    #[test]
    fn envelope_fixes_convex_data(f in (1usize..=2).prop_flat_map(convex)) {
        let n = f.diag.len();
        let spec = GridSpec::centered(n, 1.0, if n == 1 { 41 } else { 9 }).unwrap();
        let u = sample(&f, &spec);
        prop_assert!(convex_envelope(&u).unwrap().max_abs_diff(&u) <= 1e-9);
    }
}

/// Interior error of the nodal transform of `|x|^p/p` against `|t|^q/q`.
fn power_duality_error(n: usize, p: f64, m: usize) -> (f64, f64) {
    let q = p / (p - 1.0);
    let spec = GridSpec::centered(n, 1.0, m).unwrap();
    let h = spec.spacing();
    let u = GridFunction::from_fn(spec.clone(), |x| x.iter().map(|v| v * v).sum::<f64>().sqrt().powf(p) / p).unwrap();
    let dual = covering_dual_spec(&u, h).unwrap();
    let conj = conjugate_with_argmax(&u, &dual).unwrap();
    let mut worst = 0.0f64;
    for k in 0..dual.len() {
        if !spec.is_interior(&spec.multi_index(conj.argmax[k]), 1) {
            continue;
        }
        let t = dual.point_of(k);
        let exact = t.iter().map(|v| v * v).sum::<f64>().sqrt().powf(q) / q;
        worst = worst.max((conj.values.at_flat(k) - exact).abs());
    }
    (worst, h)
}

#[test]
fn power_duality() {
    for p in [4.0 / 3.0, 1.5, 3.0, 4.0] {
        let (e, h) = power_duality_error(1, p, 2001);
        assert!(e <= h, "n = 1, p = {p}: error {e} at h = {h}");
    }
    for p in [4.0 / 3.0, 3.0] {
        let (e, h) = power_duality_error(2, p, 81);
        assert!(e <= h, "n = 2, p = {p}: error {e} at h = {h}");
    }
}

#[test]
fn rotation_round_trip() {
    let f = |x: &[f64]| {
        let q: f64 = x.iter().enumerate().map(|(a, v)| 0.5 * (1.0 + a as f64) * v * v).sum();
        q + 0.05 * (x[0] + 0.5).powi(4)
    };
    let grad = |x: &[f64]| -> Vec<f64> {
        let mut g: Vec<f64> = x.iter().enumerate().map(|(a, v)| (1.0 + a as f64) * v).collect();
        g[0] += 0.2 * (x[0] + 0.5).powi(3);
        g
    };
    for (n, m) in [(1usize, 201usize), (2, 81)] {
        let spec = GridSpec::centered(n, 1.0, m).unwrap();
        let h = spec.spacing();
        let u = GridFunction::from_fn(spec.clone(), f).unwrap();
        let r = lewy_yuan_rotate(&u).unwrap();
        let back = inverse_rotate(&r).unwrap();
        let rot = r.grid.spec();
        let margin = 2.0 * rot.spacing();
        // nodes whose rotated image c x + s Du(x) lies well inside the rotated box
        let nodes: Vec<usize> = common_nodes(back.spec(), &spec, 2.0 * h)
            .into_iter()
            .filter(|&j| {
                let x = back.spec().point_of(j);
                let xbar: Vec<f64> = x.iter().zip(grad(&x)).map(|(a, b)| COS * a + SIN * b).collect();
                (0..n).all(|a| xbar[a] >= rot.lo()[a] + margin && xbar[a] <= rot.hi(a) - margin)
            })
            .collect();
        assert!(nodes.len() * 4 >= back.spec().len(), "only {} common nodes", nodes.len());
        let worst = nodes
            .iter()
            .map(|&j| (back.at_flat(j) - f(&back.spec().point_of(j))).abs())
            .fold(0.0, f64::max);
        assert!(worst <= h, "n = {n}: round-trip error {worst} at h = {h}");
    }
}
