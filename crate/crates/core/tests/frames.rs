use cayley_core::frames::*;
use cayley_core::linalg::{Mat8, Vec8};
use cayley_core::spin7::{basis, complement_representation, exp_group, float_tables};
use cayley_core::FrameError;
use nalgebra::SVector;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn gauss8(rng: &mut ChaCha8Rng) -> Vec8 {
    Vec8::from_fn(|_, _| StandardNormal.sample(rng))
}

fn random_plane(rng: &mut ChaCha8Rng) -> OrientedPlane {
    OrientedPlane::from_span(&gauss8(rng), &gauss8(rng)).unwrap()
}

fn random_spin7(rng: &mut ChaCha8Rng) -> Mat8 {
    let c: Vec<f64> = (0..21).map(|_| StandardNormal.sample(rng)).collect();
    exp_group(&basis().combine(&c), 1.0)
}

fn unit(i: usize) -> Vec8 {
    let mut v = Vec8::zeros();
    v[i - 1] = 1.0;
    v
}

/// Plane of [Z] in the identity frame: span(u, J0 u), u = Re(sum Z_a f_a).
fn fiber_plane(z: [C64; 4]) -> OrientedPlane {
    let f = f_vectors();
    let mut x = SVector::<C64, 8>::zeros();
    for a in 0..4 {
        x += f[a] * z[a];
    }
    let u = x.map(|c| c.re);
    let u = u / u.norm();
    OrientedPlane::new(u, j0() * u).unwrap()
}

struct Line;
impl PlaneField for Line {
    fn plane(&self, u: f64, v: f64) -> Result<OrientedPlane, FrameError> {
        Ok(fiber_plane([C64::new(1.0, 0.0), C64::new(u, v), C64::new(0.0, 0.0), C64::new(0.0, 0.0)]))
    }
}

struct Orbit(Mat8, Mat8);
impl PlaneField for Orbit {
    fn plane(&self, u: f64, v: f64) -> Result<OrientedPlane, FrameError> {
        let g = exp_group(&self.0, u) * exp_group(&self.1, v);
        OrientedPlane::new(g.column(0).into_owned(), g.column(1).into_owned())
    }
}

#[test]
fn plane_validation() {
    assert!(OrientedPlane::new(unit(1), unit(2)).is_ok());
    assert!(matches!(OrientedPlane::new(unit(1), unit(1)), Err(FrameError::InvalidPlane(_))));
    assert!(OrientedPlane::new(unit(1) * 1.1, unit(2)).is_err());
    assert!(OrientedPlane::from_span(&unit(1), &(unit(1) * 2.0)).is_err());
}

#[test]
fn standard_plane_gives_identity_frame() {
    let g = complete_frame(&OrientedPlane::standard(), Completion::Canonical).unwrap();
    assert!((g.matrix() - Mat8::identity()).abs().max() < 1e-15);
}

#[test]
fn random_planes_complete_to_adapted_frames() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for k in 0..200 {
        let p = random_plane(&mut rng);
        let c = if k % 2 == 0 { Completion::Canonical } else { Completion::Seeded(k) };
        let g = complete_frame(&p, c).unwrap();
        assert!(g.phi_defect() < 1e-10);
        assert!(orthogonality_defect(g.matrix()) < 1e-12);
        assert!((g.e(1) - p.e1()).norm() < 1e-15 && (g.e(2) - p.e2()).norm() < 1e-15);
    }
}

#[test]
fn degenerate_references_are_rejected() {
    let p = OrientedPlane::standard();
    assert_eq!(complete_frame_with(&p, &unit(1), &unit(5)), Err(FrameError::Degenerate));
    // e5 lies in span(e1..e4) once e3 = e3: reference e4 is rejected
    assert_eq!(complete_frame_with(&p, &unit(3), &unit(4)), Err(FrameError::Degenerate));
}

#[test]
fn non_adapted_matrix_is_refused() {
    let mut g = Mat8::identity();
    g.swap_columns(6, 7);
    assert!(matches!(AdaptedFrame::from_matrix(g), Err(FrameError::NotAdapted(_))));
    assert!(complex_structure_checked(&g).is_err());
    assert!(matches!(AdaptedFrame::from_matrix(Mat8::identity() * 2.0), Err(FrameError::NonOrthonormal(_))));
}

#[test]
fn complex_structure_examples() {
    let j = complex_structure(&AdaptedFrame::identity());
    assert_eq!(j, j0());
    assert_eq!(j * unit(1), unit(2));
    assert_eq!(j * unit(3), unit(4));
    assert_eq!(j * unit(6), -unit(7));
    assert_eq!(j * unit(5), -unit(8));
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..20 {
        let p = random_plane(&mut rng);
        let g = complete_frame(&p, Completion::Canonical).unwrap();
        let j = complex_structure(&g);
        assert!((j * j + Mat8::identity()).abs().max() < 1e-12);
        assert!((j.transpose() * j - Mat8::identity()).abs().max() < 1e-12);
        // J preserves the plane
        let je1 = j * p.e1();
        assert!((p.project_out(&je1)).norm() < 1e-12);
        assert!(u4_decomposition_residual(&g) < 1e-10);
    }
    assert!((u4_upsilon_phase().norm() - 1.0).abs() < 1e-12);
}

#[test]
fn twistor_point_of_standard_plane() {
    let t = twistor_project(&OrientedPlane::standard(), Completion::Canonical).unwrap();
    let mut want = [0.0; 7];
    want[2] = -1.0;
    for k in 0..7 {
        assert!((t.coords[k] - want[k]).abs() < 1e-15);
    }
}

#[test]
fn twistor_is_seed_and_rotation_independent() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for k in 0..100 {
        let p = random_plane(&mut rng);
        let a = twistor_project(&p, Completion::Canonical).unwrap();
        let b = twistor_project(&p, Completion::Seeded(k)).unwrap();
        let c = twistor_project(&p.rotated(0.3 + k as f64), Completion::Seeded(k + 1000)).unwrap();
        assert!(a.distance(&b) < 1e-10);
        assert!(a.distance(&c) < 1e-10);
    }
}

#[test]
fn fibers_are_constant_and_reversal_is_antipodal() {
    let base = twistor_project(&OrientedPlane::standard(), Completion::Canonical).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..20 {
        let z: [C64; 4] = std::array::from_fn(|_| C64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng)));
        let p = fiber_plane(z);
        assert!(twistor_project(&p, Completion::Canonical).unwrap().distance(&base) < 1e-10);
    }
    for _ in 0..20 {
        let p = random_plane(&mut rng);
        let a = twistor_project(&p, Completion::Canonical).unwrap().vector();
        let b = twistor_project(&p.reversed(), Completion::Canonical).unwrap().vector();
        assert!((a + b).norm() < 1e-10);
    }
}

#[test]
fn twistor_is_equivariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let p = random_plane(&mut rng);
        let g = random_spin7(&mut rng);
        let moved = twistor_project(&p.transformed(&g).unwrap(), Completion::Canonical).unwrap().vector();
        let rotated = complement_representation(&g) * twistor_project(&p, Completion::Canonical).unwrap().vector();
        assert!((moved - rotated).norm() < 1e-8);
    }
}

#[test]
fn constant_frame_has_zero_coframe() {
    let f = |_: f64, _: f64| Ok::<_, FrameError>(Mat8::identity());
    let s = mc_pullback(&f, 0.2, 0.1, &Stencil::default()).unwrap();
    assert_eq!(s.wu.abs().max(), 0.0);
    assert_eq!(s.wv.abs().max(), 0.0);
}

#[test]
fn exponential_frame_field_has_constant_coframe() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let c: Vec<f64> = (0..21).map(|_| StandardNormal.sample(&mut rng)).collect();
    let a = basis().combine(&c);
    let g0 = random_spin7(&mut rng);
    let f = move |u: f64, _: f64| Ok::<_, FrameError>(exp_group(&a, u) * g0);
    let s = mc_pullback(&f, 0.3, 0.0, &Stencil::default()).unwrap();
    let want = g0.transpose() * a * g0;
    assert!((s.wu - want).abs().max() < 1e-9);
    assert!(s.wv.abs().max() < 1e-12);
}

#[test]
fn maurer_cartan_defect_is_second_order() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let c1: Vec<f64> = (0..21).map(|_| StandardNormal.sample(&mut rng)).collect();
    let c2: Vec<f64> = (0..21).map(|_| StandardNormal.sample(&mut rng)).collect();
    let orbit = Orbit(basis().combine(&c1) * 0.5, basis().combine(&c2) * 0.5);
    let field = CompletedField::at(&orbit, 0.1, 0.2, Completion::Canonical).unwrap();
    let d1 = mc_defect(&field, 0.1, 0.2, 0.02).unwrap();
    let d2 = mc_defect(&field, 0.1, 0.2, 0.01).unwrap();
    let ratio = d1 / d2;
    assert!((3.5..4.5).contains(&ratio), "{d1} {d2} {ratio}");
}

#[test]
fn non_orthonormal_stencil_frames_are_reported() {
    let f = |u: f64, _: f64| Ok::<_, FrameError>(Mat8::identity() * (1.0 + u));
    assert!(matches!(mc_pullback(&f, 0.5, 0.0, &Stencil::default()), Err(FrameError::NonOrthonormal(_))));
}

#[test]
fn distribution_relations_separate_fiber_and_generic_curves() {
    let st = Stencil::default();
    for (u, v) in [(0.1, 0.2), (-0.4, 0.3)] {
        let s = plane_coframe(&Line, u, v, Completion::Canonical, &st).unwrap();
        let r = distribution_relations(&s);
        assert!(r.v2 < 1e-8, "{r:?}");
        assert!(r.v1 > 0.1);
        // V2 residual tracks theta_od, which vanishes on fiber curves
        let t = s.theta_u();
        assert!(t[0].norm() + t[2].norm() + t[4].norm() < 1e-8);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let c1: Vec<f64> = (0..21).map(|_| StandardNormal.sample(&mut rng)).collect();
    let c2: Vec<f64> = (0..21).map(|_| StandardNormal.sample(&mut rng)).collect();
    let orbit = Orbit(basis().combine(&c1), basis().combine(&c2));
    let r = distribution_relations(&plane_coframe(&orbit, 0.1, 0.1, Completion::Canonical, &st).unwrap());
    assert!(r.v1 > 0.05 && r.v2 > 0.05, "{r:?}");
}

#[test]
fn coframe_is_independent_of_completion_up_to_gauge() {
    // |theta_od|^2 and |theta_ev|^2 are U(3)-invariant
    let st = Stencil::default();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let c1: Vec<f64> = (0..21).map(|_| StandardNormal.sample(&mut rng)).collect();
    let c2: Vec<f64> = (0..21).map(|_| StandardNormal.sample(&mut rng)).collect();
    let orbit = Orbit(basis().combine(&c1), basis().combine(&c2));
    let a = plane_coframe(&orbit, 0.1, 0.1, Completion::Canonical, &st).unwrap();
    let b = plane_coframe(&orbit, 0.1, 0.1, Completion::Seeded(3), &st).unwrap();
    let n = |t: [C64; 6], k: [usize; 3]| k.iter().map(|&i| t[i].norm_sqr()).sum::<f64>();
    assert!((n(a.theta_u(), [0, 2, 4]) - n(b.theta_u(), [0, 2, 4])).abs() < 1e-8);
    assert!((n(a.theta_v(), [1, 3, 5]) - n(b.theta_v(), [1, 3, 5])).abs() < 1e-8);
}

#[test]
fn kappa_is_skew_hermitian_numerically() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let c: Vec<f64> = (0..21).map(|_| StandardNormal.sample(&mut rng)).collect();
    let w = basis().combine(&c);
    let k = kappa(&w);
    assert!((k + k.adjoint()).norm() < 1e-12);
}

#[test]
fn stencil_orders() {
    let f = |x: f64| Ok::<_, ()>(x.sin());
    let e2 = |h: f64| (Stencil::central(h).derivative(f, 0.3).unwrap() - 0.3f64.cos()).abs();
    let r = e2(0.02) / e2(0.01);
    assert!((3.9..4.1).contains(&r));
    let rich = Stencil { h: 0.02, richardson: true }.derivative(f, 0.3).unwrap();
    assert!((rich - 0.3f64.cos()).abs() < 1e-9);
    assert!(float_tables().phi.terms.len() == 14);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn completion_is_adapted_for_any_plane(seed in 0u64..100_000, t in -3.0f64..3.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_plane(&mut rng).rotated(t);
        let g = complete_frame(&p, Completion::Seeded(seed)).unwrap();
        prop_assert!(g.phi_defect() < 1e-10);
    }
}
