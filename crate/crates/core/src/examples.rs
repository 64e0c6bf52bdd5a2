//! Example curves and their JSON specifications.
//!
//! - fiber curves: [Z(w)] in the CP^3 of an adapted frame g, with plane
//!   span(u, J u), u = g Re(sum Z_a f_a), J = g J0 g^T;
//! - orbits: (u, v) -> exp(uA) exp(vB) E for A, B in spin(7) (or so(8));
//! - grid curves: planes sampled on a rectangle, interpolated bicubically;
//! - a pattern-search generator for pseudoholomorphic orbits.

use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::curves::{CurveChart, Domain, SectionField, SphereAtlas};
use crate::error::{CurveError, FrameError, SpecError};
use crate::frames::{f_vectors, j0, zeta, OrientedPlane, PlaneField, C64};
use crate::linalg::{Mat8, Vec8};
use crate::spin7::{basis, exp_group, float_tables};

/// Largest |g*Phi - Phi| accepted for a user-supplied frame.
pub const FRAME_TOL: f64 = 1e-10;

/// Plane of [Z] in the frame g.
pub fn fiber_plane(z: &[C64; 4], g: &Mat8) -> Result<OrientedPlane, FrameError> {
    let f = f_vectors();
    let mut x = Vec8::zeros();
    for a in 0..4 {
        x += (f[a] * z[a]).map(|c| c.re);
    }
    let n = x.norm();
    if !(n > 1e-14) {
        return Err(FrameError::Degenerate);
    }
    let u = x / n;
    OrientedPlane::new(g * u, g * (j0() * u))
}

/// w -> [Z(w)] with polynomial coordinates (ascending coefficients).
#[derive(Debug, Clone)]
pub struct FiberPolynomial {
    pub coeffs: [Vec<C64>; 4],
    pub frame: Mat8,
}

impl FiberPolynomial {
    pub fn degree(&self) -> usize {
        self.coeffs
            .iter()
            .filter_map(|c| c.iter().rposition(|z| z.norm() > 0.0))
            .max()
            .unwrap_or(0)
    }

    pub fn eval(&self, w: C64) -> [C64; 4] {
        std::array::from_fn(|a| self.coeffs[a].iter().rev().fold(C64::new(0.0, 0.0), |acc, c| acc * w + c))
    }

    /// The same curve in w' = 1/w: Z'(w') = w'^d Z(1/w').
    pub fn reversed(&self) -> FiberPolynomial {
        let d = self.degree();
        let coeffs = std::array::from_fn(|a| {
            let c = &self.coeffs[a];
            (0..=d).map(|k| c.get(d - k).copied().unwrap_or_default()).collect()
        });
        FiberPolynomial { coeffs, frame: self.frame }
    }

    /// Rank of the 4 x (d+1) coefficient matrix: 0 for Z = 0, 1 for a constant curve.
    pub fn coefficient_rank(&self) -> usize {
        let d = self.degree();
        let m = DMatrix::<C64>::from_fn(4, d + 1, |a, k| self.coeffs[a].get(k).copied().unwrap_or_default());
        let sv = m.singular_values();
        let top = sv.iter().cloned().fold(0.0, f64::max);
        if top == 0.0 {
            return 0;
        }
        sv.iter().filter(|s| **s > 1e-12 * top).count()
    }
}

impl PlaneField for FiberPolynomial {
    fn plane(&self, u: f64, v: f64) -> Result<OrientedPlane, FrameError> {
        fiber_plane(&self.eval(C64::new(u, v)), &self.frame)
    }
}

/// Any map w -> Z(w) into C^4, in the frame g.
pub struct FiberMap<F> {
    pub z: F,
    pub frame: Mat8,
}

impl<F: Fn(C64) -> [C64; 4] + Send + Sync> PlaneField for FiberMap<F> {
    fn plane(&self, u: f64, v: f64) -> Result<OrientedPlane, FrameError> {
        fiber_plane(&(self.z)(C64::new(u, v)), &self.frame)
    }
}

/// Sphere atlas of a polynomial fiber curve: near chart |w| <= 1 and far
/// chart |1/w| <= 1.
pub fn gen_fiber_polynomial(p: &FiberPolynomial, name: &str) -> Result<SphereAtlas, CurveError> {
    match p.coefficient_rank() {
        0 => return Err(CurveError::Frame(FrameError::Degenerate)),
        1 => return Err(CurveError::Degenerate),
        _ => {}
    }
    let disk = Domain::Disk { radius: 1.0 };
    Ok(SphereAtlas {
        near: CurveChart::new(format!("{name}_near"), Arc::new(p.clone()), disk),
        far: CurveChart::new(format!("{name}_far"), Arc::new(p.reversed()), disk),
    })
}

fn poly(c: &[(f64, f64)]) -> Vec<C64> {
    c.iter().map(|&(a, b)| C64::new(a, b)).collect()
}

/// [1 : w : 0 : 0] in the identity frame.
pub fn fiber_line() -> FiberPolynomial {
    rational_normal_curve(1)
}

/// [1 : w : ... ] of degree d <= 3: the line, the conic [1 : w : w^2 : 0],
/// the twisted cubic [1 : w : w^2 : w^3].
pub fn rational_normal_curve(d: usize) -> FiberPolynomial {
    assert!((1..=3).contains(&d), "degree must be 1, 2 or 3");
    let mono = |k: usize| {
        let mut c = vec![(0.0, 0.0); k + 1];
        c[k] = (1.0, 0.0);
        c
    };
    let coeffs = std::array::from_fn(|a| if a <= d { poly(&mono(a)) } else { Vec::new() });
    FiberPolynomial { coeffs, frame: Mat8::identity() }
}

/// (u, v) -> exp(uA) exp(vB) E.
#[derive(Debug, Clone)]
pub struct OrbitField {
    pub a: Mat8,
    pub b: Mat8,
    pub base: OrientedPlane,
}

impl OrbitField {
    pub fn group(&self, u: f64, v: f64) -> Mat8 {
        exp_group(&self.a, u) * exp_group(&self.b, v)
    }
}

impl PlaneField for OrbitField {
    fn plane(&self, u: f64, v: f64) -> Result<OrientedPlane, FrameError> {
        self.base.transformed(&self.group(u, v))
    }
}

/// A uniform axis min..max with n nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridAxis {
    pub min: f64,
    pub max: f64,
    pub n: usize,
}

impl GridAxis {
    fn locate(&self, x: f64) -> (usize, f64) {
        let h = (self.max - self.min) / (self.n - 1) as f64;
        let t = ((x - self.min) / h).clamp(0.0, (self.n - 1) as f64);
        let i = (t.floor() as usize).min(self.n - 2);
        (i, t - i as f64)
    }
}

fn catmull_rom(p: [f64; 4], t: f64) -> f64 {
    let t2 = t * t;
    let t3 = t2 * t;
    0.5 * ((2.0 * p[1]) + (-p[0] + p[2]) * t + (2.0 * p[0] - 5.0 * p[1] + 4.0 * p[2] - p[3]) * t2
        + (-p[0] + 3.0 * p[1] - 3.0 * p[2] + p[3]) * t3)
}

/// Row-major samples (u index outer) of an R^k-valued field, interpolated
/// with tensor Catmull-Rom splines (C^1, edge nodes repeated).
#[derive(Debug, Clone)]
pub struct GridInterpolant<const K: usize> {
    pub u: GridAxis,
    pub v: GridAxis,
    pub values: Vec<[f64; K]>,
}

impl<const K: usize> GridInterpolant<K> {
    pub fn eval(&self, x: f64, y: f64) -> [f64; K] {
        let (i, s) = self.u.locate(x);
        let (j, t) = self.v.locate(y);
        let idx = |a: isize, b: isize| {
            let a = a.clamp(0, self.u.n as isize - 1) as usize;
            let b = b.clamp(0, self.v.n as isize - 1) as usize;
            &self.values[a * self.v.n + b]
        };
        std::array::from_fn(|k| {
            let rows: [f64; 4] = std::array::from_fn(|da| {
                let col: [f64; 4] = std::array::from_fn(|db| idx(i as isize + da as isize - 1, j as isize + db as isize - 1)[k]);
                catmull_rom(col, t)
            });
            catmull_rom(rows, s)
        })
    }
}

/// Interpolated planes, re-orthonormalized by Gram-Schmidt.
#[derive(Debug, Clone)]
pub struct GridField(pub GridInterpolant<16>);

impl PlaneField for GridField {
    fn plane(&self, u: f64, v: f64) -> Result<OrientedPlane, FrameError> {
        let x = self.0.eval(u, v);
        OrientedPlane::from_span(&Vec8::from_column_slice(&x[..8]), &Vec8::from_column_slice(&x[8..]))
    }
}

/// s = pi_H Re(sum_a S_a f_a) in the frame g, S_a polynomials in w and conj(w).
#[derive(Clone)]
pub struct PolynomialSection {
    pub field: Arc<dyn PlaneField>,
    pub frame: Mat8,
    /// (coordinate a, power of w, power of conj w, coefficient)
    pub terms: Vec<(usize, u32, u32, C64)>,
}

impl PolynomialSection {
    pub fn coefficients(&self, w: C64) -> [C64; 4] {
        let mut s = [C64::new(0.0, 0.0); 4];
        for &(a, p, q, c) in &self.terms {
            s[a] += c * w.powu(p) * w.conj().powu(q);
        }
        s
    }
}

impl SectionField for PolynomialSection {
    fn value(&self, u: f64, v: f64) -> Result<Vec8, CurveError> {
        let f = f_vectors();
        let s = self.coefficients(C64::new(u, v));
        let mut x = Vec8::zeros();
        for a in 0..4 {
            x += (f[a] * s[a]).map(|c| c.re);
        }
        Ok(self.field.plane(u, v)?.project_out(&(self.frame * x)))
    }
}

/// Interpolated R^8 samples, projected to H.
pub struct GridSection {
    pub field: Arc<dyn PlaneField>,
    pub values: GridInterpolant<8>,
}

impl SectionField for GridSection {
    fn value(&self, u: f64, v: f64) -> Result<Vec8, CurveError> {
        let x = Vec8::from(self.values.eval(u, v));
        Ok(self.field.plane(u, v)?.project_out(&x))
    }
}

// ---------------------------------------------------------------------------
// orbit search

/// Null space of m: eigenvectors of m^T m below rel_tol times the largest eigenvalue.
fn float_nullspace(m: &DMatrix<f64>, rel_tol: f64) -> Vec<Vec<f64>> {
    let eig = SymmetricEigen::new(m.transpose() * m);
    let top = eig.eigenvalues.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    (0..eig.eigenvalues.len())
        .filter(|&i| eig.eigenvalues[i].abs() < rel_tol * top)
        .map(|i| eig.eigenvectors.column(i).iter().cloned().collect())
        .collect()
}

/// Elements of spin(7) preserving span(e1, e2).
pub fn plane_stabilizer() -> Vec<Mat8> {
    let mats = basis().spin7_matrices();
    let m = DMatrix::from_fn(12, 21, |r, k| {
        let (col, row) = (r / 6, r % 6 + 2);
        mats[k][(row, col)]
    });
    float_nullspace(&m, 1e-10)
        .into_iter()
        .map(|c| basis().combine(&c))
        .collect()
}

/// Centralizer of x in spin(7).
pub fn centralizer(x: &Mat8) -> Vec<Mat8> {
    let mats = basis().spin7_matrices();
    let m = DMatrix::from_fn(64, 21, |r, k| {
        let c = x * mats[k] - mats[k] * x;
        c[(r / 8, r % 8)]
    });
    float_nullspace(&m, 1e-10)
        .into_iter()
        .map(|c| basis().combine(&c))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchConfig {
    #[serde(default = "default_starts")]
    pub n_starts: usize,
    #[serde(default = "default_iters")]
    pub max_iters: usize,
    #[serde(default = "default_search_tol")]
    pub tol: f64,
    #[serde(default)]
    pub seed: u64,
}

fn default_starts() -> usize {
    8
}
fn default_iters() -> usize {
    4000
}
fn default_search_tol() -> f64 {
    1e-10
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig { n_starts: default_starts(), max_iters: default_iters(), tol: default_search_tol(), seed: 0 }
    }
}

/// The ansatz: a torus t of spin(7) inside the stabilizer of a random
/// element of stab(E), conjugated by h = exp(sum c_k X_k); 21 + 3 + 3 parameters.
#[derive(Debug, Clone)]
pub struct OrbitAnsatz {
    pub torus: Vec<Mat8>,
}

impl OrbitAnsatz {
    pub const N_PARAMS: usize = 27;

    pub fn new(seed: u64) -> OrbitAnsatz {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let stab = plane_stabilizer();
        let x = stab.iter().fold(Mat8::zeros(), |acc, s| acc + s * rng.sample::<f64, _>(StandardNormal));
        OrbitAnsatz { torus: centralizer(&x) }
    }

    pub fn generators(&self, p: &[f64]) -> (Mat8, Mat8) {
        let r = self.torus.len();
        let h = exp_group(&basis().combine(&p[..21]), 1.0);
        let comb = |c: &[f64]| self.torus.iter().zip(c).fold(Mat8::zeros(), |acc, (t, x)| acc + t * *x);
        let a = h * comb(&p[21..21 + r]) * h.transpose();
        let b = h * comb(&p[21 + r..21 + 2 * r]) * h.transpose();
        (a, b)
    }

    pub fn n_params(&self) -> usize {
        21 + 2 * self.torus.len()
    }
}

/// Pseudoholomorphic residual of the orbit at the origin, where the
/// coframe is (A, B): |zeta_A ∧ zeta_B| / area(zeta_A, zeta_B).
pub fn orbit_residual(a: &Mat8, b: &Mat8) -> f64 {
    let za = zeta(a);
    let zb = zeta(b);
    let mut num = 0.0;
    for i in 0..6 {
        for j in i + 1..6 {
            num += (za[i] * zb[j] - za[j] * zb[i]).norm_sqr();
        }
    }
    let na: f64 = za.iter().map(|z| z.norm_sqr()).sum();
    let nb: f64 = zb.iter().map(|z| z.norm_sqr()).sum();
    let dot: f64 = za.iter().zip(&zb).map(|(x, y)| x.re * y.re + x.im * y.im).sum();
    let den = na * nb - dot * dot;
    if !(den > 1e-300) {
        return f64::INFINITY;
    }
    (num / den).sqrt()
}

/// Hooke-Jeeves pattern search; returns (x, f(x), best value per iteration).
pub fn pattern_search(
    f: impl Fn(&[f64]) -> f64,
    x0: &[f64],
    step0: f64,
    min_step: f64,
    max_iters: usize,
    target: f64,
) -> (Vec<f64>, f64, Vec<f64>) {
    let explore = |base: &[f64], fb: f64, step: f64| {
        let mut x = base.to_vec();
        let mut fx = fb;
        for k in 0..x.len() {
            for s in [step, -step] {
                let old = x[k];
                x[k] = old + s;
                let fy = f(&x);
                if fy < fx {
                    fx = fy;
                    break;
                }
                x[k] = old;
            }
        }
        (x, fx)
    };
    let mut x = x0.to_vec();
    let mut fx = f(&x);
    let mut step = step0;
    let mut history = vec![fx];
    for _ in 0..max_iters {
        if fx <= target || step < min_step {
            break;
        }
        let (y, fy) = explore(&x, fx, step);
        if fy < fx {
            // pattern move through y
            let z: Vec<f64> = y.iter().zip(&x).map(|(a, b)| 2.0 * a - b).collect();
            let fz0 = f(&z);
            let (z, fz) = explore(&z, fz0, step);
            if fz < fy {
                x = z;
                fx = fz;
            } else {
                x = y;
                fx = fy;
            }
            step *= 1.25;
        } else {
            step *= 0.5;
        }
        history.push(fx);
    }
    (x, fx, history)
}

#[derive(Debug, Clone, Serialize)]
pub struct OrbitSearchResult {
    pub params: Vec<f64>,
    #[serde(skip)]
    pub a: Mat8,
    #[serde(skip)]
    pub b: Mat8,
    pub residual: f64,
    pub success: bool,
    pub best_start: usize,
    /// Best value per iteration, one list per start.
    pub history: Vec<Vec<f64>>,
    pub torus_dim: usize,
    pub seed: u64,
}

impl OrbitSearchResult {
    pub fn field(&self) -> OrbitField {
        OrbitField { a: self.a, b: self.b, base: OrientedPlane::standard() }
    }

    pub fn chart(&self, half: f64) -> CurveChart {
        CurveChart::new("orbit", Arc::new(self.field()), Domain::square(half))
    }
}

/// Multi-start pattern search for A, B with a pseudoholomorphic orbit through E.
/// Starts run in parallel; each start has its own seeded stream, so results
/// do not depend on the worker count.
pub fn search_orbit(cfg: &SearchConfig, initial: Option<&[f64]>) -> OrbitSearchResult {
    use rayon::prelude::*;
    let ansatz = OrbitAnsatz::new(cfg.seed);
    let n = ansatz.n_params();
    let obj = |p: &[f64]| {
        let (a, b) = ansatz.generators(p);
        orbit_residual(&a, &b)
    };
    let runs: Vec<(Vec<f64>, f64, Vec<f64>)> = (0..cfg.n_starts.max(1))
        .into_par_iter()
        .map(|k| {
            let x0: Vec<f64> = match (k, initial) {
                (0, Some(p)) => p.to_vec(),
                _ => {
                    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_mul(0x9E37_79B9).wrapping_add(k as u64 + 1));
                    (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
                }
            };
            let step0 = if k == 0 && initial.is_some() { 1e-3 } else { 0.25 };
            pattern_search(obj, &x0, step0, 1e-15, cfg.max_iters, cfg.tol)
        })
        .collect();
    let best_start = (0..runs.len())
        .min_by(|&i, &j| runs[i].1.total_cmp(&runs[j].1))
        .unwrap_or(0);
    let (a, b) = ansatz.generators(&runs[best_start].0);
    OrbitSearchResult {
        params: runs[best_start].0.clone(),
        a,
        b,
        residual: runs[best_start].1,
        success: runs[best_start].1 < cfg.tol,
        best_start,
        history: runs.into_iter().map(|r| r.2).collect(),
        torus_dim: ansatz.torus.len(),
        seed: cfg.seed,
    }
}

/// Random element of Spin(7).
pub fn random_spin7(seed: u64) -> Mat8 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c: Vec<f64> = (0..21).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    exp_group(&basis().combine(&c), 1.0)
}

// ---------------------------------------------------------------------------
// JSON specifications

/// "identity" or an 8 x 8 matrix in Spin(7) (columns are e_1..e_8).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FrameSpec {
    Named(String),
    Matrix([[f64; 8]; 8]),
}

impl Default for FrameSpec {
    fn default() -> Self {
        FrameSpec::Named("identity".into())
    }
}

impl FrameSpec {
    pub fn matrix(&self, path: &str) -> Result<Mat8, SpecError> {
        match self {
            FrameSpec::Named(s) if s == "identity" => Ok(Mat8::identity()),
            FrameSpec::Named(s) => Err(SpecError::at(path, format!("unknown frame name {s:?}"))),
            FrameSpec::Matrix(rows) => {
                let g = Mat8::from_fn(|i, j| rows[i][j]);
                let orth = (g.transpose() * g - Mat8::identity()).abs().max();
                let d = float_tables().phi_pullback_defect(&g);
                if !(orth < FRAME_TOL && d < FRAME_TOL) {
                    return Err(SpecError::at(path, format!("matrix is not in Spin(7) (defect {:e})", orth.max(d))));
                }
                Ok(g)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RectSpec {
    pub u: [f64; 2],
    pub v: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiberPolynomialSpec {
    /// Per homogeneous coordinate, ascending [re, im] coefficients.
    pub coeffs: Vec<Vec<[f64; 2]>>,
    #[serde(default)]
    pub frame: FrameSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrbitSpec {
    /// 21 spin(7) coordinates, or 28 so(8) entries (i < j, row-major).
    #[serde(rename = "A")]
    pub a: Vec<f64>,
    #[serde(rename = "B")]
    pub b: Vec<f64>,
    #[serde(default)]
    pub base_plane: Option<[[f64; 8]; 2]>,
    #[serde(default)]
    pub domain: Option<RectSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub u: GridAxis,
    pub v: GridAxis,
    /// (e1, e2) per node, u index outer.
    pub samples: Vec<[[f64; 8]; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CurveSpec {
    FiberPolynomial(FiberPolynomialSpec),
    Orbit(OrbitSpec),
    Grid(GridSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolyTerm {
    pub coord: usize,
    #[serde(default)]
    pub w: u32,
    #[serde(default)]
    pub wbar: u32,
    pub c: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolynomialSectionSpec {
    pub data: Vec<PolyTerm>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSectionSpec {
    pub u: GridAxis,
    pub v: GridAxis,
    pub data: Vec<[f64; 8]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SectionSpec {
    /// s = pi_H Re(sum S_a f_a), S_a = sum c w^p conj(w)^q, in the curve's frame.
    Polynomial(PolynomialSectionSpec),
    /// R^8 values on the grid, projected to H.
    Grid(GridSectionSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExampleSpec {
    pub schema: u64,
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub curve: Option<CurveSpec>,
    #[serde(default)]
    pub section: Option<SectionSpec>,
    #[serde(default)]
    pub search: Option<SearchConfig>,
}

/// The top level with the tagged parts kept raw, so that errors inside
/// them can be located.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    schema: u64,
    #[serde(default)]
    name: Option<String>,
    #[serde(default)]
    curve: Option<serde_json::Value>,
    #[serde(default)]
    section: Option<serde_json::Value>,
    #[serde(default)]
    search: Option<SearchConfig>,
}

fn located<T: serde::de::DeserializeOwned>(v: serde_json::Value, prefix: &str) -> Result<T, SpecError> {
    serde_path_to_error::deserialize(v).map_err(|e| {
        let inner = e.path().to_string();
        let path = if inner == "." { prefix.to_string() } else { format!("{prefix}.{inner}") };
        SpecError::at(path, e.inner().to_string())
    })
}

/// Splits off the "kind" tag of a tagged object.
fn take_kind(v: serde_json::Value, prefix: &str) -> Result<(String, serde_json::Value), SpecError> {
    let serde_json::Value::Object(mut m) = v else {
        return Err(SpecError::at(prefix, "expected an object"));
    };
    match m.remove("kind") {
        Some(serde_json::Value::String(k)) => Ok((k, serde_json::Value::Object(m))),
        Some(_) => Err(SpecError::at(format!("{prefix}.kind"), "expected a string")),
        None => Err(SpecError::at(prefix, "missing field `kind`")),
    }
}

fn parse_curve(v: serde_json::Value) -> Result<CurveSpec, SpecError> {
    let (kind, rest) = take_kind(v, "curve")?;
    Ok(match kind.as_str() {
        "fiber_polynomial" => CurveSpec::FiberPolynomial(located(rest, "curve")?),
        "orbit" => CurveSpec::Orbit(located(rest, "curve")?),
        "grid" => CurveSpec::Grid(located(rest, "curve")?),
        k => return Err(SpecError::at("curve.kind", format!("unknown kind {k:?} (fiber_polynomial, orbit, grid)"))),
    })
}

fn parse_section(v: serde_json::Value) -> Result<SectionSpec, SpecError> {
    let (kind, rest) = take_kind(v, "section")?;
    Ok(match kind.as_str() {
        "polynomial" => SectionSpec::Polynomial(located(rest, "section")?),
        "grid" => SectionSpec::Grid(located(rest, "section")?),
        k => return Err(SpecError::at("section.kind", format!("unknown kind {k:?} (polynomial, grid)"))),
    })
}

/// Parses and validates a spec; errors carry the path of the offending field.
pub fn parse_spec(text: &str) -> Result<ExampleSpec, SpecError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let raw: RawSpec = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        SpecError::at(if path == "." { "$".to_string() } else { path }, e.inner().to_string())
    })?;
    if raw.schema != 1 {
        return Err(SpecError::Schema(raw.schema));
    }
    let spec = ExampleSpec {
        schema: raw.schema,
        name: raw.name,
        curve: raw.curve.map(parse_curve).transpose()?,
        section: raw.section.map(parse_section).transpose()?,
        search: raw.search,
    };
    // builds check the semantic constraints
    if let Some(c) = &spec.curve {
        build_curve(c)?;
    }
    if let (Some(s), Some(c)) = (&spec.section, &spec.curve) {
        build_section(s, &build_curve(c)?)?;
    }
    if let Some(s) = &spec.search {
        if s.n_starts == 0 {
            return Err(SpecError::at("search.n_starts", "must be positive"));
        }
        if !(s.tol > 0.0) {
            return Err(SpecError::at("search.tol", "must be positive"));
        }
    }
    Ok(spec)
}

/// A built curve: a sphere atlas (fiber curves) or a single chart.
#[derive(Debug, Clone)]
pub enum BuiltCurve {
    Sphere { atlas: SphereAtlas, frame: Mat8 },
    Chart(CurveChart),
}

impl BuiltCurve {
    /// The chart used for local checks.
    pub fn chart(&self) -> &CurveChart {
        match self {
            BuiltCurve::Sphere { atlas, .. } => &atlas.near,
            BuiltCurve::Chart(c) => c,
        }
    }

    pub fn atlas(&self) -> Option<&SphereAtlas> {
        match self {
            BuiltCurve::Sphere { atlas, .. } => Some(atlas),
            BuiltCurve::Chart(_) => None,
        }
    }

    pub fn frame(&self) -> Mat8 {
        match self {
            BuiltCurve::Sphere { frame, .. } => *frame,
            BuiltCurve::Chart(_) => Mat8::identity(),
        }
    }

    pub fn is_fiber(&self) -> bool {
        matches!(self, BuiltCurve::Sphere { .. })
    }
}

fn generator(p: &[f64], path: &str) -> Result<Mat8, SpecError> {
    match p.len() {
        21 => Ok(basis().combine(p)),
        28 => {
            let mut m = Mat8::zeros();
            let mut k = 0;
            for i in 0..8 {
                for j in i + 1..8 {
                    m[(i, j)] = p[k];
                    m[(j, i)] = -p[k];
                    k += 1;
                }
            }
            Ok(m)
        }
        n => Err(SpecError::at(path, format!("expected 21 spin(7) or 28 so(8) parameters, got {n}"))),
    }
}

fn check_axis(a: &GridAxis, path: &str) -> Result<(), SpecError> {
    if a.n < 4 || !(a.max > a.min) {
        return Err(SpecError::at(path, "grid axis needs n >= 4 and max > min"));
    }
    Ok(())
}

pub fn build_curve(c: &CurveSpec) -> Result<BuiltCurve, SpecError> {
    match c {
        CurveSpec::FiberPolynomial(FiberPolynomialSpec { coeffs, frame }) => {
            if coeffs.len() != 4 {
                return Err(SpecError::at("curve.coeffs", format!("expected 4 homogeneous coordinates, got {}", coeffs.len())));
            }
            let g = frame.matrix("curve.frame")?;
            let p = FiberPolynomial {
                coeffs: std::array::from_fn(|a| coeffs[a].iter().map(|z| C64::new(z[0], z[1])).collect()),
                frame: g,
            };
            let atlas = gen_fiber_polynomial(&p, "fiber").map_err(|e| {
                let msg = match e {
                    CurveError::Degenerate => "constant curve (coefficients of rank 1)".to_string(),
                    CurveError::Frame(_) => "identically zero Z".to_string(),
                    e => e.to_string(),
                };
                SpecError::at("curve.coeffs", msg)
            })?;
            Ok(BuiltCurve::Sphere { atlas, frame: g })
        }
        CurveSpec::Orbit(OrbitSpec { a, b, base_plane, domain }) => {
            let a = generator(a, "curve.A")?;
            let b = generator(b, "curve.B")?;
            let base = match base_plane {
                None => OrientedPlane::standard(),
                Some([x, y]) => OrientedPlane::new(Vec8::from(*x), Vec8::from(*y))
                    .map_err(|e| SpecError::at("curve.base_plane", e.to_string()))?,
            };
            let dom = match domain {
                None => Domain::square(0.4),
                Some(r) => {
                    if !(r.u[1] > r.u[0] && r.v[1] > r.v[0]) {
                        return Err(SpecError::at("curve.domain", "empty rectangle"));
                    }
                    Domain::Rect { u: (r.u[0], r.u[1]), v: (r.v[0], r.v[1]), periodic_u: false, periodic_v: false }
                }
            };
            Ok(BuiltCurve::Chart(CurveChart::new("orbit", Arc::new(OrbitField { a, b, base }), dom)))
        }
        CurveSpec::Grid(GridSpec { u, v, samples }) => {
            check_axis(u, "curve.u")?;
            check_axis(v, "curve.v")?;
            if samples.len() != u.n * v.n {
                return Err(SpecError::at("curve.samples", format!("expected {} samples, got {}", u.n * v.n, samples.len())));
            }
            for (k, [x, y]) in samples.iter().enumerate() {
                OrientedPlane::from_span(&Vec8::from(*x), &Vec8::from(*y))
                    .map_err(|e| SpecError::at(format!("curve.samples[{k}]"), e.to_string()))?;
            }
            let values = samples
                .iter()
                .map(|[x, y]| std::array::from_fn(|k| if k < 8 { x[k] } else { y[k - 8] }))
                .collect();
            let field = GridField(GridInterpolant { u: *u, v: *v, values });
            let dom = Domain::Rect { u: (u.min, u.max), v: (v.min, v.max), periodic_u: false, periodic_v: false };
            Ok(BuiltCurve::Chart(CurveChart::new("grid", Arc::new(field), dom)))
        }
    }
}

pub fn build_section(s: &SectionSpec, curve: &BuiltCurve) -> Result<Box<dyn SectionField>, SpecError> {
    let field = curve.chart().field.clone();
    match s {
        SectionSpec::Polynomial(PolynomialSectionSpec { data }) => {
            let mut terms = Vec::new();
            for (k, t) in data.iter().enumerate() {
                if t.coord > 3 {
                    return Err(SpecError::at(format!("section.data[{k}].coord"), "coordinate must be 0..=3"));
                }
                terms.push((t.coord, t.w, t.wbar, C64::new(t.c[0], t.c[1])));
            }
            Ok(Box::new(PolynomialSection { field, frame: curve.frame(), terms }))
        }
        SectionSpec::Grid(GridSectionSpec { u, v, data }) => {
            check_axis(u, "section.u")?;
            check_axis(v, "section.v")?;
            if data.len() != u.n * v.n {
                return Err(SpecError::at("section.data", format!("expected {} values, got {}", u.n * v.n, data.len())));
            }
            Ok(Box::new(GridSection { field, values: GridInterpolant { u: *u, v: *v, values: data.clone() } }))
        }
    }
}
