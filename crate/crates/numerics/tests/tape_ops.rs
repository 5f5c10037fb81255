//! Per-op gradient checks for the tape engine, plus the softmax contract.

use proptest::prelude::*;
use sensorcap_numerics::{
    grad_check, softmax, Array, ClosureMap, ParamSet, Parameter, Rng, Tape, Var,
};

/// Grad-check an op graph built from one or more inputs. The flat point
/// vector is split into the given shapes; every split becomes a trainable
/// leaf; the output is reduced to a scalar against a fixed random functional.
fn check_graph<F>(shapes: &[&[usize]], seed: u64, build: F) -> f64
where
    F: Fn(&mut Tape, &[Var]) -> Var,
{
    let total: usize = shapes.iter().map(|s| s.iter().product::<usize>()).sum();
    let mut rng = Rng::new(seed);
    let point =
        Array::from_vec((0..total).map(|_| rng.uniform_range(-0.8, 0.8)).collect()).unwrap();
    let eval = |x: &Array| -> sensorcap_numerics::Result<(f64, Array)> {
        let mut ps = ParamSet::new();
        let mut offset = 0;
        for (i, shape) in shapes.iter().enumerate() {
            let n: usize = shape.iter().product();
            let data = x.data()[offset..offset + n].to_vec();
            offset += n;
            ps.insert(Parameter::new(
                format!("x{i}"),
                Array::new(shape.to_vec(), data)?,
                true,
            ));
        }
        let mut tape = Tape::new();
        let vars: Vec<Var> = (0..shapes.len())
            .map(|i| tape.param(&ps, &format!("x{i}")))
            .collect();
        let out = build(&mut tape, &vars);
        // Fixed functional so the scalar depends on every output entry.
        let mut frng = Rng::new(0xF00D);
        let w = Array::new(
            tape.value(out).shape().to_vec(),
            (0..tape.value(out).len())
                .map(|_| frng.uniform_range(-1.0, 1.0))
                .collect(),
        )?;
        let wv = tape.input(w);
        let prod = tape.mul(out, wv);
        let loss = tape.sum_all(prod);
        let value = tape.value(loss).data()[0];
        tape.backward(loss);
        let mut grad = Vec::with_capacity(total);
        for i in 0..shapes.len() {
            let v = vars[i];
            match tape.grad(v) {
                Some(g) => grad.extend_from_slice(g.data()),
                None => grad.extend(std::iter::repeat(0.0).take(
                    shapes[i].iter().product::<usize>(),
                )),
            }
        }
        Ok((value, Array::from_vec(grad)?))
    };
    grad_check(&ClosureMap(eval), &point, 1e-5).unwrap()
}

fn assert_ok(name: &str, err: f64) {
    assert!(err < 1e-4, "{name} grad check failed: {err}");
}

#[test]
fn matmul_grads() {
    let e = check_graph(&[&[3, 4], &[4, 2]], 1, |t, v| t.matmul(v[0], v[1]));
    assert_ok("matmul", e);
}

#[test]
fn matmul_nt_grads() {
    let e = check_graph(&[&[3, 4], &[5, 4]], 2, |t, v| t.matmul_nt(v[0], v[1]));
    assert_ok("matmul_nt", e);
}

#[test]
fn elementwise_grads() {
    assert_ok(
        "add",
        check_graph(&[&[2, 3], &[2, 3]], 3, |t, v| t.add(v[0], v[1])),
    );
    assert_ok(
        "sub",
        check_graph(&[&[2, 3], &[2, 3]], 4, |t, v| t.sub(v[0], v[1])),
    );
    assert_ok(
        "mul",
        check_graph(&[&[2, 3], &[2, 3]], 5, |t, v| t.mul(v[0], v[1])),
    );
    assert_ok(
        "add_row",
        check_graph(&[&[4, 3], &[3]], 6, |t, v| t.add_row(v[0], v[1])),
    );
    assert_ok("scale", check_graph(&[&[2, 5]], 7, |t, v| t.scale(v[0], -1.7)));
}

#[test]
fn activation_grads() {
    assert_ok("gelu", check_graph(&[&[3, 3]], 8, |t, v| t.gelu(v[0])));
    assert_ok(
        "softmax",
        check_graph(&[&[3, 5]], 9, |t, v| t.softmax_last(v[0])),
    );
}

#[test]
fn layer_norm_grads() {
    let e = check_graph(&[&[4, 6], &[6], &[6]], 10, |t, v| {
        t.layer_norm(v[0], v[1], v[2], 1e-5)
    });
    assert_ok("layer_norm", e);
}

#[test]
fn structural_grads() {
    assert_ok(
        "concat_rows",
        check_graph(&[&[2, 3], &[4, 3]], 11, |t, v| t.concat_rows(&[v[0], v[1]])),
    );
    assert_ok(
        "concat_cols",
        check_graph(&[&[3, 2], &[3, 4]], 12, |t, v| t.concat_cols(&[v[0], v[1]])),
    );
    assert_ok(
        "slice_rows",
        check_graph(&[&[5, 3]], 13, |t, v| t.slice_rows(v[0], 1, 4)),
    );
    assert_ok(
        "gather_rows",
        check_graph(&[&[4, 3]], 14, |t, v| t.gather_rows(v[0], &[2, 0, 2, 3])),
    );
}

#[test]
fn dropout_grads_with_fixed_mask() {
    // A fixed seed makes the mask a constant of the closure, so the map is
    // differentiable.
    let e = check_graph(&[&[6, 5]], 15, |t, v| {
        let mut rng = Rng::new(77);
        t.dropout(v[0], 0.3, &mut rng)
    });
    assert_ok("dropout", e);
}

#[test]
fn reduction_grads() {
    assert_ok("sum_all", check_graph(&[&[3, 4]], 16, |t, v| t.sum_all(v[0])));
    assert_ok(
        "mean_all",
        check_graph(&[&[3, 4]], 17, |t, v| t.mean_all(v[0])),
    );
    assert_ok("sq_norm", check_graph(&[&[3, 4]], 18, |t, v| t.sq_norm(v[0])));
}

#[test]
fn cross_entropy_grads() {
    let e = check_graph(&[&[4, 7]], 19, |t, v| {
        t.cross_entropy_logits(v[0], &[3, 0, 6, 2])
    });
    assert_ok("cross_entropy_logits", e);
}

#[test]
fn param_reuse_accumulates_through_both_paths() {
    // Using one parameter twice (as in a tied embedding head) must sum both
    // contributions.
    let e = check_graph(&[&[3, 3]], 20, |t, v| {
        let g = t.gather_rows(v[0], &[0, 2]);
        t.matmul_nt(g, v[0])
    });
    assert_ok("tied reuse", e);
}

#[test]
fn softmax_trivial_cases() {
    let out = softmax(&Array::from_vec(vec![0.0, 0.0]).unwrap()).unwrap();
    assert_eq!(out.data(), &[0.5, 0.5]);

    // [ln 2, 0] -> [2/3, 1/3]
    let out = softmax(&Array::from_vec(vec![2.0f64.ln(), 0.0]).unwrap()).unwrap();
    assert!((out.data()[0] - 2.0 / 3.0).abs() < 1e-15);
    assert!((out.data()[1] - 1.0 / 3.0).abs() < 1e-15);

    // Shift invariance.
    let a = softmax(&Array::from_vec(vec![5.0, 5.0]).unwrap()).unwrap();
    let b = softmax(&Array::from_vec(vec![0.0, 0.0]).unwrap()).unwrap();
    assert_eq!(a.data(), b.data());
}

#[test]
fn softmax_empty_axis_rejected() {
    let empty = Array::new(vec![0], vec![]).unwrap();
    assert!(softmax(&empty).is_err());
}

proptest! {
    #[test]
    fn softmax_rows_sum_to_one(values in proptest::collection::vec(-50.0f64..50.0, 1..40)) {
        let a = Array::from_vec(values).unwrap();
        let s = softmax(&a).unwrap();
        prop_assert!(s.data().iter().all(|&v| v >= 0.0));
        let total: f64 = s.data().iter().sum();
        prop_assert!((total - 1.0).abs() <= 1e-12, "sum {total}");
    }

    #[test]
    fn softmax_shift_invariant(values in proptest::collection::vec(-20.0f64..20.0, 1..20), shift in -30.0f64..30.0) {
        let a = Array::from_vec(values.clone()).unwrap();
        let shifted = Array::from_vec(values.iter().map(|v| v + shift).collect()).unwrap();
        let sa = softmax(&a).unwrap();
        let sb = softmax(&shifted).unwrap();
        for (x, y) in sa.data().iter().zip(sb.data()) {
            prop_assert!((x - y).abs() < 1e-12);
        }
    }
}
