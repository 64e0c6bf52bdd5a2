use cayley_core::forms::{basis_vec, exact_vec, float_vec, AlternatingForm, SkewEndo};
use cayley_core::linalg::Mat8;
use cayley_core::scalar::{q_frac, Mode, Scalar};
use cayley_core::spin7::{basis, exp_group, tables};
use cayley_core::FormError;
use proptest::prelude::*;

fn one() -> Scalar {
    Scalar::int(1, Mode::Exact)
}

fn mono(idx: &[usize]) -> AlternatingForm {
    AlternatingForm::monomial(idx, one()).unwrap()
}

#[test]
fn wedge_examples() {
    let a = mono(&[1, 2]).wedge(&mono(&[3, 4])).unwrap();
    assert_eq!(a, mono(&[1, 2, 3, 4]));
    assert!(mono(&[1]).wedge(&mono(&[1, 2])).unwrap().is_zero());
    let s = mono(&[1]).add(&mono(&[2])).unwrap();
    assert_eq!(s.wedge(&mono(&[2])).unwrap(), mono(&[1, 2]));
}

#[test]
fn wedge_errors() {
    let f = AlternatingForm::monomial(&[1], Scalar::Float(1.0)).unwrap();
    assert_eq!(mono(&[2]).wedge(&f), Err(FormError::ModeMismatch));
    let big = mono(&[1, 2, 3, 4, 5]);
    assert!(matches!(big.wedge(&mono(&[6, 7, 8, 1])), Err(FormError::DegreeOverflow(5, 4, 8))));
}

#[test]
fn unsorted_tuples_carry_permutation_sign() {
    let f = mono(&[2, 1]);
    assert_eq!(f.coeff(&[1, 2]), Scalar::int(-1, Mode::Exact));
    assert_eq!(f.coeff(&[2, 1]), one());
}

#[test]
fn evaluate_phi_examples() {
    let t = tables();
    let e = |i| basis_vec(8, i, Mode::Exact);
    assert_eq!(t.phi.evaluate(&[e(1), e(2), e(3), e(4)]).unwrap(), one());
    assert_eq!(t.phi.evaluate(&[e(2), e(1), e(3), e(4)]).unwrap(), Scalar::int(-1, Mode::Exact));
    assert!(matches!(t.phi.evaluate(&[e(1), e(2)]), Err(FormError::Arity { expected: 4, got: 2 })));
}

#[test]
fn evaluate_agrees_with_determinant_for_two_form() {
    let f = mono(&[1, 3]);
    let v = exact_vec(&[2, 0, 5, 0, 0, 0, 0, 0]);
    let w = exact_vec(&[7, 1, -3, 0, 0, 0, 0, 0]);
    // det [[2, 7], [5, -3]] = -41
    assert_eq!(f.evaluate(&[v, w]).unwrap(), Scalar::int(-41, Mode::Exact));
}

fn inclusion(m: usize) -> Vec<Vec<Scalar>> {
    (1..=m).map(|i| basis_vec(8, i, Mode::Exact)).collect()
}

#[test]
fn pullback_examples() {
    let inc = inclusion(4);
    let vol4 = AlternatingForm::from_terms_in(4, 4, Mode::Exact, [(vec![1, 2, 3, 4], one())]).unwrap();
    assert_eq!(mono(&[1, 2, 3, 4]).pullback(&inc).unwrap(), vol4);
    assert!(mono(&[5, 6, 7, 8]).pullback(&inc).unwrap().is_zero());
    assert_eq!(tables().phi.pullback(&inc).unwrap(), vol4);
    assert!(matches!(mono(&[1, 2, 3]).pullback(&inclusion(2)), Err(FormError::Dimension(_))));
}

#[test]
fn lie_action_examples() {
    let zero = SkewEndo::zero(Mode::Exact);
    assert!(mono(&[1, 3]).lie_action(&zero).unwrap().is_zero());
    let a = SkewEndo::elementary(1, 2, Mode::Exact);
    assert_eq!(mono(&[1]).lie_action(&a).unwrap(), mono(&[2]).neg());
    for b in &basis().spin7 {
        assert!(tables().phi.lie_action(b).unwrap().is_zero());
    }
}

/// Finite-difference oracle: d/dt|0 pullback(exp(-tA), f) = lie_action(A, f).
fn fd_lie(a: &Mat8, f: &AlternatingForm, h: f64) -> AlternatingForm {
    let pull = |t: f64| {
        let g = exp_group(a, -t);
        let cols: Vec<Vec<Scalar>> = (0..8).map(|j| float_vec(g.column(j).as_slice())).collect();
        f.pullback(&cols).unwrap()
    };
    pull(h).sub(&pull(-h)).unwrap().scale(&Scalar::Float(1.0 / (2.0 * h))).unwrap()
}

#[test]
fn lie_action_matches_finite_difference_of_pullback() {
    let a = SkewEndo::elementary(1, 2, Mode::Float);
    let f = mono(&[1]).to_float();
    let fd = fd_lie(&a.to_matrix(), &f, 1e-4);
    let exact = f.lie_action(&a).unwrap();
    assert!(fd.max_abs_diff(&exact) < 1e-7, "{fd:?} vs {exact:?}");
}

#[test]
fn lie_action_fd_error_is_second_order() {
    let mut m = Mat8::zeros();
    for (k, (i, j)) in [(0, 1), (2, 5), (3, 7), (1, 6), (4, 5)].iter().enumerate() {
        m[(*i, *j)] = 0.3 + 0.2 * k as f64;
        m[(*j, *i)] = -m[(*i, *j)];
    }
    let a = SkewEndo::from_matrix(&m).unwrap();
    let f = tables().psi[2].to_float();
    let exact = f.lie_action(&a).unwrap();
    let e1 = fd_lie(&m, &f, 0.02).max_abs_diff(&exact);
    let e2 = fd_lie(&m, &f, 0.01).max_abs_diff(&exact);
    let ratio = e1 / e2;
    assert!((3.5..4.5).contains(&ratio), "ratio {ratio}");
}

#[test]
fn interior_product_contracts_first_slot() {
    let f = mono(&[2, 5, 7]);
    let v = basis_vec(8, 5, Mode::Exact);
    assert_eq!(f.interior(&v).unwrap(), mono(&[2, 7]).neg());
}

#[test]
fn mixed_mode_scalars_are_rejected() {
    let a = Scalar::int(1, Mode::Exact);
    assert_eq!(a.add(&Scalar::Float(1.0)), Err(FormError::ModeMismatch));
    assert_eq!(
        Scalar::Exact(q_frac(1, 3)).mul(&Scalar::Exact(q_frac(3, 2))).unwrap(),
        Scalar::Exact(q_frac(1, 2))
    );
    assert_eq!(a.div(&Scalar::int(0, Mode::Exact)), Err(FormError::DivisionByZero));
}

fn arb_form(deg: usize) -> impl Strategy<Value = AlternatingForm> {
    proptest::collection::vec((proptest::sample::subsequence((1..=8).collect::<Vec<_>>(), deg), -3i64..=3), 1..5)
        .prop_map(move |terms| {
            AlternatingForm::from_terms(
                deg,
                Mode::Exact,
                terms.into_iter().map(|(idx, c)| (idx, Scalar::int(c, Mode::Exact))),
            )
            .unwrap()
        })
}

fn arb_vec() -> impl Strategy<Value = Vec<Scalar>> {
    proptest::collection::vec(-5i64..=5, 8).prop_map(|v| exact_vec(&v))
}

proptest! {
    #[test]
    fn graded_commutativity(a in (1usize..=3).prop_flat_map(arb_form), b in (1usize..=3).prop_flat_map(arb_form)) {
        let ab = a.wedge(&b).unwrap();
        let ba = b.wedge(&a).unwrap();
        let s = if (a.degree() * b.degree()) % 2 == 0 { 1 } else { -1 };
        prop_assert_eq!(ab, ba.scale(&Scalar::int(s, Mode::Exact)).unwrap());
    }

    #[test]
    fn wedge_is_associative(a in arb_form(1), b in arb_form(2), c in arb_form(2)) {
        let l = a.wedge(&b).unwrap().wedge(&c).unwrap();
        let r = a.wedge(&b.wedge(&c).unwrap()).unwrap();
        prop_assert_eq!(l, r);
    }

    #[test]
    fn evaluation_is_alternating(f in arb_form(3), v in proptest::collection::vec(arb_vec(), 3), i in 0usize..3, j in 0usize..3) {
        prop_assume!(i != j);
        let a = f.evaluate(&v).unwrap();
        let mut w = v.clone();
        w.swap(i, j);
        prop_assert_eq!(f.evaluate(&w).unwrap(), a.neg());
    }

    #[test]
    fn pullback_is_contravariant(
        mcols in proptest::collection::vec(proptest::collection::vec(-1.0f64..1.0, 8), 6),
        ncols in proptest::collection::vec(proptest::collection::vec(-1.0f64..1.0, 6), 5),
    ) {
        let f = tables().phi.to_float();
        let m: Vec<Vec<Scalar>> = mcols.iter().map(|c| float_vec(c)).collect();
        let n: Vec<Vec<Scalar>> = ncols.iter().map(|c| float_vec(c)).collect();
        // columns of M∘N
        let mn: Vec<Vec<Scalar>> = ncols
            .iter()
            .map(|nc| float_vec(&(0..8).map(|r| (0..6).map(|k| mcols[k][r] * nc[k]).sum()).collect::<Vec<f64>>()))
            .collect();
        let lhs = f.pullback(&mn).unwrap();
        let rhs = f.pullback(&m).unwrap().pullback(&n).unwrap();
        prop_assert!(lhs.max_abs_diff(&rhs) < 1e-12);
    }

    #[test]
    fn lie_action_satisfies_leibniz(a in arb_form(1), b in arb_form(2), i in 1usize..=8, j in 1usize..=8) {
        prop_assume!(i != j);
        let x = SkewEndo::elementary(i, j, Mode::Exact);
        let lhs = a.wedge(&b).unwrap().lie_action(&x).unwrap();
        let rhs = a.lie_action(&x).unwrap().wedge(&b).unwrap()
            .add(&a.wedge(&b.lie_action(&x).unwrap()).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
    }
}
