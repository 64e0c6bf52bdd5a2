//! Oriented 2-planes, Spin(7)-adapted frame completion, the induced complex
//! structure, the twistor map to S^6 and numeric Maurer-Cartan sampling.
//!
//! Conventions: a frame is an 8x8 orthogonal matrix g whose columns are
//! e_1..e_8. The Maurer-Cartan matrix is W = g^T dg, so W[j][i] = omega_ji
//! with de_i = e_j omega_ji, and omega_ij = W[(i-1, j-1)].

use std::sync::OnceLock;

use nalgebra::{Matrix3, SMatrix, SVector, Vector3};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::FrameError;
use crate::forms::subsets;
use crate::linalg::{orthonormalize_against, Mat8, Vec8};
use crate::spin7::{basis, float_tables, pair_f};

pub type C64 = Complex64;
pub type Vec7 = SVector<f64, 7>;

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Tolerance for plane orthonormality.
pub const PLANE_TOL: f64 = 1e-12;
/// Tolerance for g*Phi = Phi.
pub const ADAPTED_TOL: f64 = 1e-10;
/// References whose projection is shorter than this are rejected.
pub const MIN_PROJECTION: f64 = 0.1;
/// Canonical and seeded choices prefer projections at least this long.
const GOOD_PROJECTION: f64 = 0.3;

fn unit(i: usize) -> Vec8 {
    let mut v = Vec8::zeros();
    v[i - 1] = 1.0;
    v
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OrientedPlane {
    e1: Vec8,
    e2: Vec8,
}

impl OrientedPlane {
    /// An orthonormal pair; the orientation is e1 ∧ e2.
    pub fn new(e1: Vec8, e2: Vec8) -> Result<Self, FrameError> {
        let defect = (e1.norm() - 1.0)
            .abs()
            .max((e2.norm() - 1.0).abs())
            .max(e1.dot(&e2).abs());
        if defect.is_nan() || defect > PLANE_TOL {
            return Err(FrameError::InvalidPlane(defect));
        }
        Ok(OrientedPlane { e1, e2 })
    }

    /// Orthonormalizes an arbitrary independent pair, keeping orientation.
    pub fn from_span(a: &Vec8, b: &Vec8) -> Result<Self, FrameError> {
        let na = a.norm();
        if !(na > 1e-300) {
            return Err(FrameError::InvalidPlane(1.0));
        }
        let e1 = a / na;
        let e2 = orthonormalize_against(b, &[e1], 1e-12 * b.norm().max(1e-300))
            .ok_or(FrameError::InvalidPlane(1.0))?;
        OrientedPlane::new(e1, e2)
    }

    /// span(e_1, e_2) of the standard basis.
    pub fn standard() -> Self {
        OrientedPlane { e1: unit(1), e2: unit(2) }
    }

    pub fn e1(&self) -> &Vec8 {
        &self.e1
    }

    pub fn e2(&self) -> &Vec8 {
        &self.e2
    }

    /// (cos t e1 + sin t e2, -sin t e1 + cos t e2): same oriented plane.
    pub fn rotated(&self, t: f64) -> Self {
        let (s, c) = t.sin_cos();
        OrientedPlane {
            e1: self.e1 * c + self.e2 * s,
            e2: -self.e1 * s + self.e2 * c,
        }
    }

    /// The same plane with the opposite orientation.
    pub fn reversed(&self) -> Self {
        OrientedPlane { e1: self.e1, e2: -self.e2 }
    }

    pub fn transformed(&self, g: &Mat8) -> Result<Self, FrameError> {
        OrientedPlane::new(g * self.e1, g * self.e2)
    }

    /// The bivector e1 e2^T - e2 e1^T; equal for equal oriented planes.
    pub fn bivector(&self) -> Mat8 {
        self.e1 * self.e2.transpose() - self.e2 * self.e1.transpose()
    }

    /// Orthogonal projection onto the plane's complement.
    pub fn project_out(&self, x: &Vec8) -> Vec8 {
        x - self.e1 * self.e1.dot(x) - self.e2 * self.e2.dot(x)
    }
}

/// A Spin(7)-adapted orthonormal frame, columns e_1..e_8.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AdaptedFrame {
    g: Mat8,
}

pub fn orthogonality_defect(g: &Mat8) -> f64 {
    (g.transpose() * g - Mat8::identity()).abs().max()
}

impl AdaptedFrame {
    pub fn identity() -> Self {
        AdaptedFrame { g: Mat8::identity() }
    }

    /// Validates orthogonality and g*Phi = Phi.
    pub fn from_matrix(g: Mat8) -> Result<Self, FrameError> {
        let od = orthogonality_defect(&g);
        if od.is_nan() || od > ADAPTED_TOL {
            return Err(FrameError::NonOrthonormal(od));
        }
        let ad = float_tables().phi_pullback_defect(&g);
        if ad.is_nan() || ad > ADAPTED_TOL {
            return Err(FrameError::NotAdapted(ad));
        }
        Ok(AdaptedFrame { g })
    }

    pub fn matrix(&self) -> &Mat8 {
        &self.g
    }

    /// Column e_i, 1-based.
    pub fn e(&self, i: usize) -> Vec8 {
        self.g.column(i - 1).into_owned()
    }

    pub fn plane(&self) -> OrientedPlane {
        OrientedPlane { e1: self.e(1), e2: self.e(2) }
    }

    pub fn phi_defect(&self) -> f64 {
        float_tables().phi_pullback_defect(&self.g)
    }
}

/// How the free legs e_3 and e_5 are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Completion {
    /// Standard basis vectors in a fixed order.
    Canonical,
    /// Gaussian references drawn from a ChaCha stream.
    Seeded(u64),
}

impl Default for Completion {
    fn default() -> Self {
        Completion::Canonical
    }
}

const E3_ORDER: [usize; 8] = [3, 4, 5, 6, 7, 8, 1, 2];
const E5_ORDER: [usize; 8] = [5, 6, 7, 8, 1, 2, 3, 4];

fn pick_canonical(order: &[usize], against: &[Vec8]) -> Result<Vec8, FrameError> {
    let mut best: Option<(f64, Vec8)> = None;
    for &i in order {
        let r = unit(i);
        let mut w = r;
        for b in against {
            w -= b * b.dot(&w);
        }
        let n = w.norm();
        if n >= GOOD_PROJECTION {
            return Ok(r);
        }
        if best.as_ref().is_none_or(|b| n > b.0) {
            best = Some((n, r));
        }
    }
    match best {
        Some((n, r)) if n >= MIN_PROJECTION => Ok(r),
        _ => Err(FrameError::Degenerate),
    }
}

fn pick_seeded(rng: &mut ChaCha8Rng, against: &[Vec8]) -> Result<Vec8, FrameError> {
    for _ in 0..64 {
        let r = Vec8::from_fn(|_, _| StandardNormal.sample(rng));
        let r = r / r.norm();
        if orthonormalize_against(&r, against, GOOD_PROJECTION).is_some() {
            return Ok(r);
        }
    }
    Err(FrameError::Degenerate)
}

/// Reference vectors (r3, r5) for completing the plane.
pub fn reference_vectors(p: &OrientedPlane, c: Completion) -> Result<(Vec8, Vec8), FrameError> {
    let t = float_tables();
    let (e1, e2) = (p.e1, p.e2);
    let mut rng = match c {
        Completion::Canonical => None,
        Completion::Seeded(s) => Some(ChaCha8Rng::seed_from_u64(s)),
    };
    let r3 = match rng.as_mut() {
        None => pick_canonical(&E3_ORDER, &[e1, e2])?,
        Some(r) => pick_seeded(r, &[e1, e2])?,
    };
    let e3 = orthonormalize_against(&r3, &[e1, e2], MIN_PROJECTION).ok_or(FrameError::Degenerate)?;
    let e4 = t.triple_cross(&e1, &e2, &e3);
    let r5 = match rng.as_mut() {
        None => pick_canonical(&E5_ORDER, &[e1, e2, e3, e4])?,
        Some(r) => pick_seeded(r, &[e1, e2, e3, e4])?,
    };
    Ok((r3, r5))
}

/// Completion from fixed references without the adaptedness check.
pub(crate) fn complete_raw(p: &OrientedPlane, r3: &Vec8, r5: &Vec8) -> Result<Mat8, FrameError> {
    let t = float_tables();
    let (e1, e2) = (p.e1, p.e2);
    let e3 = orthonormalize_against(r3, &[e1, e2], MIN_PROJECTION).ok_or(FrameError::Degenerate)?;
    let e4 = t.triple_cross(&e1, &e2, &e3);
    let e5 = orthonormalize_against(r5, &[e1, e2, e3, e4], MIN_PROJECTION).ok_or(FrameError::Degenerate)?;
    let e6 = -t.triple_cross(&e1, &e4, &e5);
    let e7 = t.triple_cross(&e1, &e3, &e5);
    let e8 = -t.triple_cross(&e1, &e2, &e5);
    Ok(Mat8::from_columns(&[e1, e2, e3, e4, e5, e6, e7, e8]))
}

/// Completes p from explicit references; the result is validated.
pub fn complete_frame_with(p: &OrientedPlane, r3: &Vec8, r5: &Vec8) -> Result<AdaptedFrame, FrameError> {
    AdaptedFrame::from_matrix(complete_raw(p, r3, r5)?)
}

/// e_3 from the reference, e_4 = T(e1, e2, e3), e_5 from the reference, and
/// e_6, e_7, e_8 = -T(e1, e4, e5), T(e1, e3, e5), -T(e1, e2, e5).
pub fn complete_frame(p: &OrientedPlane, c: Completion) -> Result<AdaptedFrame, FrameError> {
    let (r3, r5) = reference_vectors(p, c)?;
    complete_frame_with(p, &r3, &r5)
}

/// J_0 e1 = e2, J_0 e3 = e4, J_0 e6 = -e7, J_0 e5 = -e8.
pub fn j0() -> Mat8 {
    let mut j = Mat8::zeros();
    for (a, b, s) in [(1, 2, 1.0), (3, 4, 1.0), (6, 7, -1.0), (5, 8, -1.0)] {
        j[(b - 1, a - 1)] = s;
        j[(a - 1, b - 1)] = -s;
    }
    j
}

/// The complex structure g J_0 g^T in which f_0..f_3 have type (1,0).
pub fn complex_structure(g: &AdaptedFrame) -> Mat8 {
    g.g * j0() * g.g.transpose()
}

/// Same, for a raw matrix; refuses frames that are not adapted.
pub fn complex_structure_checked(g: &Mat8) -> Result<Mat8, FrameError> {
    AdaptedFrame::from_matrix(*g).map(|f| complex_structure(&f))
}

/// Columns f_0 = e1 - i e2, f_1 = e3 - i e4, f_2 = e6 + i e7, f_3 = e5 + i e8
/// in the standard basis.
pub fn f_vectors() -> [SVector<C64, 8>; 4] {
    let mut f = [SVector::<C64, 8>::zeros(); 4];
    let set = |v: &mut SVector<C64, 8>, k: usize, c: C64| v[k - 1] = c;
    set(&mut f[0], 1, C64::new(1.0, 0.0));
    set(&mut f[0], 2, -I);
    set(&mut f[1], 3, C64::new(1.0, 0.0));
    set(&mut f[1], 4, -I);
    set(&mut f[2], 6, C64::new(1.0, 0.0));
    set(&mut f[2], 7, I);
    set(&mut f[3], 5, C64::new(1.0, 0.0));
    set(&mut f[3], 8, I);
    f
}

/// f_a of the frame g.
pub fn frame_f(g: &Mat8) -> [SVector<C64, 8>; 4] {
    let gc = g.map(|x| C64::new(x, 0.0));
    f_vectors().map(|f| gc * f)
}

fn two_form_value(j: &Mat8, x: &Vec8, y: &Vec8) -> f64 {
    (j * x).dot(y)
}

fn u4_parts(g: &Mat8, vs: [&Vec8; 4]) -> (f64, C64) {
    let j = g * j0() * g.transpose();
    let o = |a: usize, b: usize| two_form_value(&j, vs[a], vs[b]);
    let omega_sq_half = o(0, 1) * o(2, 3) - o(0, 2) * o(1, 3) + o(0, 3) * o(1, 2);
    let f = frame_f(g);
    // (1,0)-forms eps^a(x) = x^T conj(f_a)
    let m = SMatrix::<C64, 4, 4>::from_fn(|a, b| {
        let x = vs[b];
        (0..8).map(|k| f[a][k].conj() * x[k]).sum()
    });
    (omega_sq_half, m.determinant())
}

/// Phase c with Phi - Omega^2/2 = Re(c Upsilon_0) on the identity frame.
fn u4_phase() -> C64 {
    static C: OnceLock<C64> = OnceLock::new();
    *C.get_or_init(|| {
        let id = Mat8::identity();
        let t = float_tables();
        // least squares for (Re c, Im c): Re(c y) = Re c Re y - Im c Im y
        let (mut aa, mut ab, mut bb, mut ra, mut rb) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for sub in subsets(8, 4) {
            let vs: Vec<Vec8> = sub.iter().map(|&i| unit(i)).collect();
            let (o2, y) = u4_parts(&id, [&vs[0], &vs[1], &vs[2], &vs[3]]);
            let r = t.phi_value([&vs[0], &vs[1], &vs[2], &vs[3]]) - o2;
            let (a, b) = (y.re, -y.im);
            aa += a * a;
            ab += a * b;
            bb += b * b;
            ra += r * a;
            rb += r * b;
        }
        let det = aa * bb - ab * ab;
        C64::new((ra * bb - rb * ab) / det, (rb * aa - ra * ab) / det)
    })
}

/// max over basis 4-tuples of |Phi - Omega^2/2 - Re(c Upsilon)| for the
/// complex structure and (4,0)-form of the frame g.
pub fn u4_decomposition_residual(g: &AdaptedFrame) -> f64 {
    let c = u4_phase();
    let t = float_tables();
    let mut worst: f64 = 0.0;
    for sub in subsets(8, 4) {
        let vs: Vec<Vec8> = sub.iter().map(|&i| unit(i)).collect();
        let (o2, y) = u4_parts(&g.g, [&vs[0], &vs[1], &vs[2], &vs[3]]);
        let phi = t.phi_value([&vs[0], &vs[1], &vs[2], &vs[3]]);
        worst = worst.max((phi - o2 - (c * y).re).abs());
    }
    worst
}

/// The phase constant fitted on the identity frame.
pub fn u4_upsilon_phase() -> C64 {
    u4_phase()
}

/// Unit vector on S^6 in orthonormal coordinates of the complement m.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TwistorPoint {
    pub coords: [f64; 7],
    /// Length of proj_m(J) before normalization.
    pub raw_norm: f64,
}

impl TwistorPoint {
    pub fn vector(&self) -> Vec7 {
        Vec7::from_column_slice(&self.coords)
    }

    pub fn distance(&self, o: &TwistorPoint) -> f64 {
        (self.vector() - o.vector()).norm()
    }
}

/// Coordinates of proj_m(J) against the orthonormal basis N_k / 2.
pub fn complement_coordinates(j: &Mat8) -> Vec7 {
    let ns = basis().complement_matrices();
    Vec7::from_fn(|k, _| pair_f(j, &ns[k]) / 2.0)
}

pub fn twistor_of_frame(g: &AdaptedFrame) -> Result<TwistorPoint, FrameError> {
    twistor_of_matrix(&g.g)
}

pub(crate) fn twistor_of_matrix(g: &Mat8) -> Result<TwistorPoint, FrameError> {
    let c = complement_coordinates(&(g * j0() * g.transpose()));
    let n = c.norm();
    if !(n > 1e-12) {
        return Err(FrameError::ZeroProjection);
    }
    let v = c / n;
    let mut coords = [0.0; 7];
    coords.copy_from_slice(v.as_slice());
    Ok(TwistorPoint { coords, raw_norm: n })
}

pub fn twistor_project(p: &OrientedPlane, c: Completion) -> Result<TwistorPoint, FrameError> {
    twistor_of_frame(&complete_frame(p, c)?)
}

/// A smooth map (u, v) -> oriented plane.
pub trait PlaneField: Send + Sync {
    fn plane(&self, u: f64, v: f64) -> Result<OrientedPlane, FrameError>;
}

/// A smooth map (u, v) -> orthogonal frame.
pub trait FrameField: Sync {
    fn frame(&self, u: f64, v: f64) -> Result<Mat8, FrameError>;
}

impl<F> FrameField for F
where
    F: Fn(f64, f64) -> Result<Mat8, FrameError> + Sync,
{
    fn frame(&self, u: f64, v: f64) -> Result<Mat8, FrameError> {
        self(u, v)
    }
}

/// Frames of a plane field completed from fixed references, smooth wherever
/// the references stay transverse.
pub struct CompletedField<'a, P: PlaneField + ?Sized> {
    pub planes: &'a P,
    pub r3: Vec8,
    pub r5: Vec8,
}

impl<'a, P: PlaneField + ?Sized> CompletedField<'a, P> {
    /// References chosen at (u0, v0).
    pub fn at(planes: &'a P, u0: f64, v0: f64, c: Completion) -> Result<Self, FrameError> {
        let (r3, r5) = reference_vectors(&planes.plane(u0, v0)?, c)?;
        Ok(CompletedField { planes, r3, r5 })
    }
}

impl<P: PlaneField + ?Sized> FrameField for CompletedField<'_, P> {
    fn frame(&self, u: f64, v: f64) -> Result<Mat8, FrameError> {
        complete_raw(&self.planes.plane(u, v)?, &self.r3, &self.r5)
    }
}

/// Linear combinations, for generic difference quotients.
pub trait LinComb: Clone {
    fn lin(&self, a: f64, o: &Self, b: f64) -> Self;
}

impl LinComb for f64 {
    fn lin(&self, a: f64, o: &Self, b: f64) -> Self {
        a * self + b * o
    }
}

impl LinComb for C64 {
    fn lin(&self, a: f64, o: &Self, b: f64) -> Self {
        self * a + o * b
    }
}

impl<const R: usize, const C: usize> LinComb for SMatrix<f64, R, C> {
    fn lin(&self, a: f64, o: &Self, b: f64) -> Self {
        self * a + o * b
    }
}

impl<const R: usize, const C: usize> LinComb for SMatrix<C64, R, C> {
    fn lin(&self, a: f64, o: &Self, b: f64) -> Self {
        self.map(|x| x * a) + o.map(|x| x * b)
    }
}

impl<T: LinComb> LinComb for Vec<T> {
    fn lin(&self, a: f64, o: &Self, b: f64) -> Self {
        self.iter().zip(o).map(|(x, y)| x.lin(a, y, b)).collect()
    }
}

/// Central difference of width h, optionally Richardson-extrapolated from
/// steps h and h/2 (fourth order).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Stencil {
    pub h: f64,
    pub richardson: bool,
}

impl Default for Stencil {
    fn default() -> Self {
        Stencil { h: 1e-4, richardson: true }
    }
}

impl Stencil {
    pub fn central(h: f64) -> Self {
        Stencil { h, richardson: false }
    }

    pub fn derivative<T: LinComb, E>(&self, f: impl Fn(f64) -> Result<T, E>, x: f64) -> Result<T, E> {
        let d = |h: f64| -> Result<T, E> {
            let a = f(x + h)?;
            let b = f(x - h)?;
            Ok(a.lin(0.5 / h, &b, -0.5 / h))
        };
        let dh = d(self.h)?;
        if !self.richardson {
            return Ok(dh);
        }
        let dh2 = d(0.5 * self.h)?;
        Ok(dh2.lin(4.0 / 3.0, &dh, -1.0 / 3.0))
    }

    /// (d/du, d/dv) of a two-variable function.
    pub fn gradient<T: LinComb, E>(&self, f: impl Fn(f64, f64) -> Result<T, E>, u: f64, v: f64) -> Result<(T, T), E> {
        Ok((self.derivative(|s| f(s, v), u)?, self.derivative(|s| f(u, s), v)?))
    }
}

fn checked_frame(f: &(impl FrameField + ?Sized), u: f64, v: f64) -> Result<Mat8, FrameError> {
    let g = f.frame(u, v)?;
    let d = orthogonality_defect(&g);
    if d.is_nan() || d > 1e-9 {
        return Err(FrameError::NonOrthonormal(d));
    }
    Ok(g)
}

/// omega_ij(d/du), omega_ij(d/dv) at one parameter point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoframeSample {
    pub u: f64,
    pub v: f64,
    pub g: Mat8,
    /// g^T dg/du; entry (j-1, i-1) is omega_ji(d/du).
    pub wu: Mat8,
    pub wv: Mat8,
}

/// zeta_3..zeta_8 in label order 3, 4, 5, 6, 7, 8.
pub fn zeta(w: &Mat8) -> [C64; 6] {
    let o = |i: usize, j: usize| w[(i - 1, j - 1)];
    let z3 = C64::new(o(3, 1), o(4, 1));
    let z4 = C64::new(o(3, 2), o(4, 2));
    let z5 = C64::new(o(5, 1), -o(8, 1));
    let z6 = C64::new(o(6, 1), -o(7, 1));
    let z7 = C64::new(o(6, 2), -o(7, 2));
    let z8 = C64::new(o(5, 2), -o(8, 2));
    [z3, z4, z5, z6, z7, z8]
}

/// theta_1..theta_6.
pub fn theta(w: &Mat8) -> [C64; 6] {
    let [z3, z4, z5, z6, z7, z8] = zeta(w);
    [z3 + I * z4, z3 - I * z4, z6 + I * z7, z6 - I * z7, z5 + I * z8, z5 - I * z8]
}

pub fn theta_od(w: &Mat8) -> Vector3<C64> {
    let t = theta(w);
    Vector3::new(t[0], t[2], t[4])
}

pub fn theta_ev(w: &Mat8) -> Vector3<C64> {
    let t = theta(w);
    Vector3::new(t[1], t[3], t[5])
}

/// The connection matrix kappa on H.
pub fn kappa(w: &Mat8) -> Matrix3<C64> {
    let o = |i: usize, j: usize| w[(i - 1, j - 1)];
    let c = |re: f64, im: f64| C64::new(re, im);
    let t = theta(w);
    let tb: Vec<C64> = t.iter().map(|x| x.conj()).collect();
    let h = 0.5 * I;
    Matrix3::new(
        I * o(4, 3),
        -c(o(6, 3), o(6, 4)) - h * tb[4],
        -c(o(5, 3), o(5, 4)) + h * tb[2],
        c(o(6, 3), -o(6, 4)) - h * t[4],
        -I * o(7, 6),
        c(o(6, 5), -o(7, 5)) - h * tb[0],
        c(o(5, 3), -o(5, 4)) + h * t[2],
        -c(o(6, 5), o(7, 5)) - h * t[0],
        I * (o(7, 6) - o(4, 3) - o(2, 1)),
    )
}

/// xi_j = omega_j1 + i omega_j2 for j = 3..8.
pub fn xi(w: &Mat8) -> [C64; 6] {
    std::array::from_fn(|k| C64::new(w[(k + 2, 0)], w[(k + 2, 1)]))
}

/// [v] = [[0, v3, -v2], [-v3, 0, v1], [v2, -v1, 0]].
pub fn bracket3(v: &Vector3<C64>) -> Matrix3<C64> {
    let z = C64::new(0.0, 0.0);
    Matrix3::new(z, v[2], -v[1], -v[2], z, v[0], v[1], -v[0], z)
}

impl CoframeSample {
    pub fn omega_u(&self, i: usize, j: usize) -> f64 {
        self.wu[(i - 1, j - 1)]
    }

    pub fn omega_v(&self, i: usize, j: usize) -> f64 {
        self.wv[(i - 1, j - 1)]
    }

    pub fn theta_u(&self) -> [C64; 6] {
        theta(&self.wu)
    }

    pub fn theta_v(&self) -> [C64; 6] {
        theta(&self.wv)
    }

    pub fn zeta_u(&self) -> [C64; 6] {
        zeta(&self.wu)
    }

    pub fn zeta_v(&self) -> [C64; 6] {
        zeta(&self.wv)
    }

    pub fn kappa_u(&self) -> Matrix3<C64> {
        kappa(&self.wu)
    }

    pub fn kappa_v(&self) -> Matrix3<C64> {
        kappa(&self.wv)
    }
}

/// omega = g^T dg at (u, v) by the stencil.
pub fn mc_pullback(f: &(impl FrameField + ?Sized), u: f64, v: f64, st: &Stencil) -> Result<CoframeSample, FrameError> {
    let g = checked_frame(f, u, v)?;
    let (du, dv) = st.gradient(|a, b| checked_frame(f, a, b), u, v)?;
    Ok(CoframeSample {
        u,
        v,
        g,
        wu: g.transpose() * du,
        wv: g.transpose() * dv,
    })
}

/// Coframe of a plane field with references fixed at the sample point.
pub fn plane_coframe(
    p: &(impl PlaneField + ?Sized),
    u: f64,
    v: f64,
    c: Completion,
    st: &Stencil,
) -> Result<CoframeSample, FrameError> {
    let field = CompletedField::at(p, u, v, c)?;
    mc_pullback(&field, u, v, st)
}

/// max |d/du W_v - d/dv W_u + [W_u, W_v]| by nested central differences of width h.
pub fn mc_defect(f: &(impl FrameField + ?Sized), u: f64, v: f64, h: f64) -> Result<f64, FrameError> {
    let st = Stencil::central(h);
    let w = |a: f64, b: f64| -> Result<(Mat8, Mat8), FrameError> {
        let s = mc_pullback(f, a, b, &st)?;
        Ok((s.wu, s.wv))
    };
    let (wu, wv) = w(u, v)?;
    let dwv_du = st.derivative(|a| w(a, v).map(|x| x.1), u)?;
    let dwu_dv = st.derivative(|b| w(u, b).map(|x| x.0), v)?;
    Ok((dwv_du - dwu_dv + wu * wv - wv * wu).abs().max())
}

/// Residuals of the horizontal and vertical distribution relations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DistributionResiduals {
    /// xi_4 = -i xi_3, xi_7 = i xi_6, xi_8 = i xi_5.
    pub v1: f64,
    /// xi_4 = i xi_3, xi_7 = -i xi_6, xi_8 = -i xi_5.
    pub v2: f64,
}

pub fn distribution_relations(s: &CoframeSample) -> DistributionResiduals {
    let mut n1 = 0.0;
    let mut n2 = 0.0;
    let mut den = 0.0;
    for w in [&s.wu, &s.wv] {
        let x = xi(w);
        // x[k] = xi_{k+3}
        let (x3, x4, x5, x6, x7, x8) = (x[0], x[1], x[2], x[3], x[4], x[5]);
        n1 += (x4 + I * x3).norm_sqr() + (x7 - I * x6).norm_sqr() + (x8 - I * x5).norm_sqr();
        n2 += (x4 - I * x3).norm_sqr() + (x7 + I * x6).norm_sqr() + (x8 + I * x5).norm_sqr();
        den += x.iter().map(|z| z.norm_sqr()).sum::<f64>();
    }
    let den = den.sqrt().max(1e-300);
    DistributionResiduals {
        v1: n1.sqrt() / den,
        v2: n2.sqrt() / den,
    }
}
