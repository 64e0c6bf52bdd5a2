use cayley_core::forms::{basis_vec, exact_vec, AlternatingForm, SkewEndo};
use cayley_core::linalg::{Mat8, Vec8};
use cayley_core::scalar::{Mode, Scalar};
use cayley_core::spin7::{
    basis, comass_estimate, complement_representation, exp_group, float_tables, invariance_report, pair_f,
    quad_cross, tables, triple_cross_exact, CalibrationTables,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn e(i: usize) -> Vec<Scalar> {
    basis_vec(8, i, Mode::Exact)
}

fn int(n: i64) -> Scalar {
    Scalar::int(n, Mode::Exact)
}

#[test]
fn table_coefficients() {
    let t = tables();
    assert_eq!(t.phi.len(), 14);
    assert_eq!(t.phi.coeff(&[5, 6, 7, 8]), int(1));
    assert_eq!(t.phi.coeff(&[3, 4, 6, 7]), int(-1));
    for p in &t.psi {
        assert_eq!(p.len(), 8);
    }
}

#[test]
fn printed_psi1_first_monomial() {
    let printed = CalibrationTables::as_printed();
    assert_eq!(printed.psi[0].evaluate(&[e(5), e(1), e(3), e(7)]).unwrap(), int(1));
    // the corrected table replaces 5137 by 5134
    assert_eq!(tables().psi[0].evaluate(&[e(5), e(1), e(3), e(4)]).unwrap(), int(1));
    assert!(invariance_report(&printed, basis()).is_err());
}

#[test]
fn quad_cross_examples() {
    let t = tables();
    let v = quad_cross(t, &e(1), &e(2), &e(3), &e(4)).unwrap();
    assert_eq!(v, exact_vec(&[0, 0, 0, 0, 0, 0, 0, 1]));
    let z = quad_cross(t, &e(1), &e(1), &e(3), &e(4)).unwrap();
    assert!(z.iter().all(|s| s.is_zero()));
    let w = quad_cross(t, &e(5), &e(6), &e(7), &e(8)).unwrap();
    assert_eq!(w[7], int(1));
    for m in 0..7 {
        assert_eq!(w[m], t.psi[m].coeff(&[5, 6, 7, 8]));
    }
}

#[test]
fn quad_cross_matches_table_on_all_basis_tuples() {
    let t = tables();
    let ft = float_tables();
    for sub in cayley_core::forms::subsets(8, 4) {
        let ex = quad_cross(t, &e(sub[0]), &e(sub[1]), &e(sub[2]), &e(sub[3])).unwrap();
        let fv: Vec<Vec8> = sub.iter().map(|&i| Vec8::from_fn(|r, _| if r + 1 == i { 1.0 } else { 0.0 })).collect();
        let fl = ft.quad_cross(&fv[0], &fv[1], &fv[2], &fv[3]);
        for m in 0..7 {
            assert_eq!(ex[m], t.psi[m].coeff(&sub));
            assert_eq!(fl[m], ex[m].to_f64());
        }
        assert_eq!(ex[7], t.phi.coeff(&sub));
    }
}

#[test]
fn triple_cross_examples() {
    let t = tables();
    assert_eq!(triple_cross_exact(t, &e(1), &e(2), &e(3)).unwrap(), exact_vec(&[0, 0, 0, 1, 0, 0, 0, 0]));
    // brute-force sign: Phi(e1, e2, e5, e8)
    let s = t.phi.evaluate(&[e(1), e(2), e(5), e(8)]).unwrap().to_f64() as i64;
    assert_eq!(s.abs(), 1);
    let mut want = [0i64; 8];
    want[7] = s;
    assert_eq!(triple_cross_exact(t, &e(1), &e(2), &e(5)).unwrap(), exact_vec(&want));
    assert!(triple_cross_exact(t, &e(3), &e(3), &e(5)).unwrap().iter().all(|x| x.is_zero()));
}

#[test]
fn triple_cross_on_basis_is_signed_basis_vector() {
    let t = tables();
    for sub in cayley_core::forms::subsets(8, 3) {
        let v = triple_cross_exact(t, &e(sub[0]), &e(sub[1]), &e(sub[2])).unwrap();
        let nz: Vec<f64> = v.iter().map(|x| x.to_f64()).filter(|x| *x != 0.0).collect();
        assert!(nz.len() <= 1 && nz.iter().all(|x| x.abs() == 1.0), "{sub:?}");
    }
}

#[test]
fn spin7_dimensions_and_closure() {
    let b = basis();
    assert_eq!(b.spin7.len(), 21);
    assert_eq!(b.nullity, 21);
    assert_eq!(b.relation_rank, 7);
    assert_eq!(b.complement.len(), 7);
    for x in &b.spin7 {
        assert!(b.relation_defects(x).unwrap().iter().all(|d| d.is_zero()));
        for n in &b.complement {
            assert!(x.pairing(n).unwrap().is_zero());
        }
    }
    for (i, x) in b.spin7.iter().enumerate() {
        for y in &b.spin7[i + 1..] {
            let br = x.bracket(y).unwrap();
            assert!(b.expansion_residual(&br).unwrap().is_zero());
        }
    }
}

#[test]
fn invariance_and_representation() {
    let r = invariance_report(tables(), basis()).expect("tables are consistent");
    assert_eq!(r.phi_annihilated, 21);
    assert!(r.all_skew);
    assert_eq!(r.rep_matrices.len(), 21);
    assert!(r.complement_moves_phi.iter().all(|&m| m));
}

fn random_spin7(seed: u64) -> Mat8 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c: Vec<f64> = (0..21).map(|_| StandardNormal.sample(&mut rng)).collect();
    basis().combine(&c)
}

#[test]
fn exp_group_examples() {
    let z = exp_group(&Mat8::zeros(), 0.3);
    assert!((z - Mat8::identity()).abs().max() < 1e-15);
    let a = random_spin7(3);
    let g = exp_group(&a, 0.7);
    assert!((g * g.transpose() - Mat8::identity()).abs().max() < 1e-12);
    assert!((g * exp_group(&a, -0.7) - Mat8::identity()).abs().max() < 1e-12);
    assert!(float_tables().phi_pullback_defect(&g) < 1e-10);
    // a complement direction moves Phi
    let n = basis().complement_matrices()[2];
    assert!(float_tables().phi_pullback_defect(&exp_group(&n, 0.3)) > 1e-3);
}

#[test]
fn complement_representation_is_orthogonal() {
    let g = exp_group(&random_spin7(11), 1.0);
    let r = complement_representation(&g);
    let id = nalgebra::SMatrix::<f64, 7, 7>::identity();
    assert!((r * r.transpose() - id).abs().max() < 1e-10);
    // trace pairing orthogonality between spin(7) and m, float version
    for x in basis().spin7_matrices() {
        for n in basis().complement_matrices() {
            assert!(pair_f(&x, &n).abs() < 1e-15);
        }
    }
}

#[test]
fn comass_of_coordinate_form() {
    let f = AlternatingForm::monomial(&[1, 2, 3, 4], int(1)).unwrap();
    let r = comass_estimate(&f, 16, 200, 1);
    assert!((r.value - 1.0).abs() < 1e-9);
    let e0: Vec<Vec<Scalar>> = (1..=4).map(e).collect();
    assert_eq!(f.evaluate(&e0).unwrap(), int(1));
}

#[test]
fn comass_of_sum_of_coordinate_forms() {
    // on P(s,t) = span(c_s e1 + s_s e5, c_s e2 + s_s e6, c_t e3 + s_t e7, c_t e4 + s_t e8)
    // dx1234 + dx5678 takes c_s^2 c_t^2 + s_s^2 s_t^2 <= 1
    let f = AlternatingForm::monomial(&[1, 2, 3, 4], int(1))
        .unwrap()
        .add(&AlternatingForm::monomial(&[5, 6, 7, 8], int(1)).unwrap())
        .unwrap()
        .to_float();
    let mut brute: f64 = 0.0;
    for i in 0..=40 {
        for j in 0..=40 {
            let (s, t) = (i as f64 * 0.04, j as f64 * 0.04);
            let v = |a: usize, b: usize, x: f64| {
                let mut w = vec![0.0; 8];
                w[a] = x.cos();
                w[b] = x.sin();
                cayley_core::forms::float_vec(&w)
            };
            let val = f.evaluate(&[v(0, 4, s), v(1, 5, s), v(2, 6, t), v(3, 7, t)]).unwrap().to_f64();
            let closed = (s.cos() * t.cos()).powi(2) + (s.sin() * t.sin()).powi(2);
            assert!((val - closed).abs() < 1e-12);
            brute = brute.max(val);
        }
    }
    assert!((brute - 1.0).abs() < 1e-12);
    let r = comass_estimate(&f, 32, 200, 5);
    assert!(r.value <= 1.0 + 1e-9 && r.value > 1.0 - 1e-6);
}

#[test]
fn comass_is_deterministic_and_bounded() {
    let phi = tables().phi.clone();
    let a = comass_estimate(&phi, 24, 200, 42);
    let b = comass_estimate(&phi, 24, 200, 42);
    assert_eq!(a.value.to_bits(), b.value.to_bits());
    assert_eq!(a.best_start, b.best_start);
    assert!(a.value <= 1.0 + 1e-9);
    assert!(a.value > 1.0 - 1e-6);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]
    #[test]
    fn triple_cross_is_orthogonal_on_orthonormal_triples(seed in 0u64..10_000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut v: Vec<Vec8> = Vec::new();
        while v.len() < 3 {
            let x = Vec8::from_fn(|_, _| StandardNormal.sample(&mut rng));
            if let Some(u) = cayley_core::linalg::orthonormalize_against(&x, &v, 1e-3) {
                v.push(u);
            }
        }
        let t = float_tables().triple_cross(&v[0], &v[1], &v[2]);
        for u in &v {
            prop_assert!(t.dot(u).abs() < 1e-12);
        }
        prop_assert!((t.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn spin7_exponentials_preserve_phi(seed in 0u64..10_000, t in -2.0f64..2.0) {
        let g = exp_group(&random_spin7(seed), t);
        prop_assert!(float_tables().phi_pullback_defect(&g) < 1e-10);
    }
}

#[test]
fn elementary_endo_is_skew() {
    let a = SkewEndo::elementary(2, 7, Mode::Exact);
    assert_eq!(a.entry(2, 7), &int(1));
    assert_eq!(a.entry(7, 2), &int(-1));
}
