//! Curves in the Grassmannian of oriented 2-planes, the cones they rule,
//! and the deformation theory of those cones.
//!
//! A curve is a chart (u, v) -> oriented plane. Coframes are sampled with
//! the chart's stencil, completing frames from references fixed at each
//! sample point, so every reported quantity is either gauge invariant or
//! computed in one smooth gauge around the point.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector, Matrix3, SMatrix, SVector, Vector3};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{CurveError, FrameError};
use crate::frames::{
    bracket3, complete_raw, f_vectors, kappa, mc_pullback, plane_coframe, theta, theta_ev, theta_od,
    twistor_project, zeta, CoframeSample, CompletedField, Completion, FrameField, OrientedPlane, PlaneField, Stencil,
    C64, Vec7,
};
use crate::linalg::{Mat8, Vec8};
use crate::spin7::float_tables;

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Samples whose pseudoholomorphic residual exceeds this are not treated as
/// pseudoholomorphic by the operations that require it.
pub const PSEUDOHOLO_GATE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

/// Sup/mean summary of a sampled residual.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualReport {
    pub name: String,
    pub sup: f64,
    pub mean: f64,
    pub samples: usize,
    /// Samples skipped as rank deficient.
    pub excluded: usize,
    pub tol: f64,
    pub verdict: Verdict,
}

impl ResidualReport {
    pub fn from_values(name: &str, values: &[f64], excluded: usize, tol: f64) -> Self {
        let samples = values.len();
        let sup = values.iter().cloned().fold(0.0, f64::max);
        let mean = if samples == 0 { f64::NAN } else { values.iter().sum::<f64>() / samples as f64 };
        let verdict = if samples == 0 {
            Verdict::Inconclusive
        } else if values.iter().any(|x| x.is_nan()) || sup >= tol {
            Verdict::Fail
        } else {
            Verdict::Pass
        };
        ResidualReport {
            name: name.to_string(),
            sup: if values.iter().any(|x| x.is_nan()) { f64::NAN } else { sup },
            mean,
            samples,
            excluded,
            tol,
            verdict,
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

/// Parameter domain of a chart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Domain {
    Rect {
        u: (f64, f64),
        v: (f64, f64),
        periodic_u: bool,
        periodic_v: bool,
    },
    /// |(u, v)| <= radius.
    Disk { radius: f64 },
}

impl Domain {
    pub fn square(half: f64) -> Self {
        Domain::Rect {
            u: (-half, half),
            v: (-half, half),
            periodic_u: false,
            periodic_v: false,
        }
    }

    pub fn is_closed(&self) -> bool {
        matches!(self, Domain::Rect { periodic_u: true, periodic_v: true, .. })
    }

    pub fn center(&self) -> (f64, f64) {
        match *self {
            Domain::Rect { u, v, .. } => (0.5 * (u.0 + u.1), 0.5 * (v.0 + v.1)),
            Domain::Disk { .. } => (0.0, 0.0),
        }
    }

    /// Interior sample points: cell centers of an n x n grid, or a polar
    /// midpoint grid for disks.
    pub fn samples(&self, n: usize) -> Vec<(f64, f64)> {
        let n = n.max(1);
        match *self {
            Domain::Rect { u, v, .. } => {
                let mut out = Vec::with_capacity(n * n);
                for a in 0..n {
                    for b in 0..n {
                        let x = u.0 + (a as f64 + 0.5) * (u.1 - u.0) / n as f64;
                        let y = v.0 + (b as f64 + 0.5) * (v.1 - v.0) / n as f64;
                        out.push((x, y));
                    }
                }
                out
            }
            Domain::Disk { radius } => {
                let nr = n.div_ceil(2).max(1);
                let nphi = 2 * n;
                let mut out = Vec::with_capacity(nr * nphi);
                for a in 0..nr {
                    let r = radius * (a as f64 + 0.5) / nr as f64;
                    for b in 0..nphi {
                        let p = 2.0 * PI * (b as f64 + 0.25) / nphi as f64;
                        out.push((r * p.cos(), r * p.sin()));
                    }
                }
                out
            }
        }
    }
}

/// A sampled curve: plane field, domain and stencil metadata.
#[derive(Clone)]
pub struct CurveChart {
    pub name: String,
    pub field: Arc<dyn PlaneField>,
    pub domain: Domain,
    pub stencil: Stencil,
    pub completion: Completion,
}

impl std::fmt::Debug for CurveChart {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CurveChart")
            .field("name", &self.name)
            .field("domain", &self.domain)
            .field("stencil", &self.stencil)
            .finish()
    }
}

impl CurveChart {
    pub fn new(name: impl Into<String>, field: Arc<dyn PlaneField>, domain: Domain) -> Self {
        CurveChart {
            name: name.into(),
            field,
            domain,
            stencil: Stencil::default(),
            completion: Completion::Canonical,
        }
    }

    pub fn with_stencil(mut self, st: Stencil) -> Self {
        self.stencil = st;
        self
    }

    pub fn with_completion(mut self, c: Completion) -> Self {
        self.completion = c;
        self
    }

    pub fn plane(&self, u: f64, v: f64) -> Result<OrientedPlane, FrameError> {
        self.field.plane(u, v)
    }

    pub fn coframe(&self, u: f64, v: f64) -> Result<CoframeSample, FrameError> {
        plane_coframe(&*self.field, u, v, self.completion, &self.stencil)
    }

    /// A smooth frame field with references fixed at (u0, v0).
    pub fn frames_at(&self, u0: f64, v0: f64) -> Result<CompletedField<'_, dyn PlaneField>, FrameError> {
        CompletedField::at(&*self.field, u0, v0, self.completion)
    }

    pub fn samples(&self, n: usize) -> Vec<(f64, f64)> {
        self.domain.samples(n)
    }
}

/// A Riemann sphere covered by two unit disks, w and w' = 1/w. Both chart
/// maps are orientation preserving.
#[derive(Clone, Debug)]
pub struct SphereAtlas {
    pub near: CurveChart,
    pub far: CurveChart,
}

/// Pseudoholomorphic residual and rank measure from zeta(d/du), zeta(d/dv).
/// Returns (residual, relative area) with the residual
/// |zeta ∧ zeta|(du, dv) / (|zeta(du)|^2 + |zeta(dv)|^2).
pub fn zeta_residual(wu: &Mat8, wv: &Mat8) -> (f64, f64) {
    let a = zeta(wu);
    let b = zeta(wv);
    let mut num = 0.0;
    for i in 0..6 {
        for j in i + 1..6 {
            num += (a[i] * b[j] - a[j] * b[i]).norm_sqr();
        }
    }
    let na: f64 = a.iter().map(|z| z.norm_sqr()).sum();
    let nb: f64 = b.iter().map(|z| z.norm_sqr()).sum();
    // area of the real 12-vectors
    let dot: f64 = a.iter().zip(&b).map(|(x, y)| x.re * y.re + x.im * y.im).sum();
    let area = (na * nb - dot * dot).max(0.0).sqrt();
    let den = na + nb;
    if den == 0.0 {
        return (0.0, 0.0);
    }
    (num.sqrt() / den, area / den)
}

/// Samples whose relative area falls below this are rank deficient.
pub const RANK_TOL: f64 = 1e-6;

fn collect<T: Send>(items: Vec<Result<T, CurveError>>) -> Result<Vec<T>, CurveError> {
    items.into_iter().collect()
}

pub fn pseudoholo_residual(c: &CurveChart, samples: &[(f64, f64)], tol: f64) -> Result<ResidualReport, CurveError> {
    let vals = collect(
        samples
            .par_iter()
            .map(|&(u, v)| {
                let s = c.coframe(u, v)?;
                Ok(zeta_residual(&s.wu, &s.wv))
            })
            .collect(),
    )?;
    let kept: Vec<f64> = vals.iter().filter(|(_, a)| *a >= RANK_TOL).map(|(r, _)| *r).collect();
    if kept.is_empty() {
        return Err(CurveError::Degenerate);
    }
    Ok(ResidualReport::from_values(
        "pseudoholomorphic",
        &kept,
        vals.len() - kept.len(),
        tol,
    ))
}

/// Least-squares structure tau with theta(d/dv) = tau theta(d/du) for (1,0)-forms.
pub fn induced_tau(tu: &[C64], tv: &[C64]) -> C64 {
    let num: C64 = tu.iter().zip(tv).map(|(a, b)| a.conj() * b).sum();
    let den: f64 = tu.iter().map(|a| a.norm_sqr()).sum();
    num / den
}

/// (0,1)-part coefficient of the 1-form a du + b dv for the structure tau.
pub fn part01(tau: C64, au: C64, av: C64) -> C64 {
    (tau * au - av) / (tau - tau.conj())
}

fn median(v: &mut [f64]) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(|a, b| a.total_cmp(b));
    v[v.len() / 2]
}

/// I1 = gamma*(theta_1, theta_3, theta_5), I2 = gamma*(theta_2, theta_4, theta_6).
#[derive(Debug, Clone, Serialize)]
pub struct FundFormSample {
    pub u: f64,
    pub v: f64,
    /// Components on d/du and d/dv.
    pub i1: [[C64; 3]; 2],
    pub i2: [[C64; 3]; 2],
    pub i1_norm: f64,
    pub i2_norm: f64,
    pub in_r1: bool,
    pub in_r2: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct FundFormField {
    pub samples: Vec<FundFormSample>,
    /// Median of |gamma* theta| over the chart; zero loci are relative to it.
    pub scale: f64,
    pub i1_sup: f64,
    pub i2_sup: f64,
    pub r1_count: usize,
    pub r2_count: usize,
    /// No sample lies in both zero loci.
    pub r1_r2_disjoint: bool,
    /// Largest normalized (0,1)-part of any I1 or I2 component.
    pub type_residual: f64,
}

impl FundFormField {
    pub fn i1_vanishes(&self) -> bool {
        self.r1_count == self.samples.len()
    }

    pub fn i2_vanishes(&self) -> bool {
        self.r2_count == self.samples.len()
    }
}

/// Relative zero-locus threshold.
pub const ZERO_LOCUS_REL: f64 = 1e-6;

fn require_pseudoholo(c: &CurveChart, samples: &[(f64, f64)]) -> Result<(), CurveError> {
    let r = pseudoholo_residual(c, samples, PSEUDOHOLO_GATE)?;
    if !r.passed() {
        return Err(CurveError::NotPseudoholomorphic(r.sup));
    }
    Ok(())
}

pub fn fund_forms(c: &CurveChart, samples: &[(f64, f64)]) -> Result<FundFormField, CurveError> {
    require_pseudoholo(c, samples)?;
    let raw = collect(
        samples
            .par_iter()
            .map(|&(u, v)| {
                let s = c.coframe(u, v)?;
                Ok((u, v, theta(&s.wu), theta(&s.wv)))
            })
            .collect(),
    )?;
    let mut totals: Vec<f64> = raw
        .iter()
        .map(|(_, _, a, b)| a.iter().chain(b.iter()).map(|z| z.norm_sqr()).sum::<f64>().sqrt())
        .collect();
    let scale = median(&mut totals);
    let thr = ZERO_LOCUS_REL * scale;
    let mut type_residual: f64 = 0.0;
    let out: Vec<FundFormSample> = raw
        .iter()
        .map(|(u, v, a, b)| {
            let od = |t: &[C64; 6]| [t[0], t[2], t[4]];
            let ev = |t: &[C64; 6]| [t[1], t[3], t[5]];
            let i1 = [od(a), od(b)];
            let i2 = [ev(a), ev(b)];
            let n = |x: &[[C64; 3]; 2]| x.iter().flatten().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            let tau = induced_tau(a, b);
            let total: f64 = a.iter().chain(b.iter()).map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            for k in 0..6 {
                type_residual = type_residual.max(part01(tau, a[k], b[k]).norm() / total.max(1e-300));
            }
            FundFormSample {
                u: *u,
                v: *v,
                i1_norm: n(&i1),
                i2_norm: n(&i2),
                in_r1: n(&i1) < thr,
                in_r2: n(&i2) < thr,
                i1,
                i2,
            }
        })
        .collect();
    Ok(FundFormField {
        scale,
        i1_sup: out.iter().map(|s| s.i1_norm).fold(0.0, f64::max),
        i2_sup: out.iter().map(|s| s.i2_norm).fold(0.0, f64::max),
        r1_count: out.iter().filter(|s| s.in_r1).count(),
        r2_count: out.iter().filter(|s| s.in_r2).count(),
        r1_r2_disjoint: !out.iter().any(|s| s.in_r1 && s.in_r2),
        type_residual,
        samples: out,
    })
}

/// (omega_1 - omega_2)(d/du, d/dv) = -sum_odd Im(theta_u conj theta_v) + sum_even Im(...).
pub fn chern_density(wu: &Mat8, wv: &Mat8) -> f64 {
    let a = theta(wu);
    let b = theta(wv);
    let mut s = 0.0;
    for k in 0..6 {
        let im = (a[k] * b[k].conj()).im;
        if k % 2 == 0 {
            s -= im;
        } else {
            s += im;
        }
    }
    s
}

#[derive(Debug, Clone, Serialize)]
pub struct DegreeReport {
    pub value: f64,
    pub nearest: i64,
    pub defect: f64,
    pub n_r: usize,
    pub n_phi: usize,
}

fn disk_integral(c: &CurveChart, n_r: usize, n_phi: usize) -> Result<f64, CurveError> {
    let radius = match c.domain {
        Domain::Disk { radius } => radius,
        _ => return Err(CurveError::OpenDomain),
    };
    let dr = radius / n_r as f64;
    let dphi = 2.0 * PI / n_phi as f64;
    let pts: Vec<(f64, f64)> = (0..n_r)
        .flat_map(|a| (0..n_phi).map(move |b| ((a as f64 + 0.5) * dr, b as f64 * dphi)))
        .collect();
    let vals = collect(
        pts.par_iter()
            .map(|&(r, p)| {
                let s = c.coframe(r * p.cos(), r * p.sin())?;
                Ok(chern_density(&s.wu, &s.wv) * r)
            })
            .collect(),
    )?;
    Ok(vals.iter().sum::<f64>() * dr * dphi)
}

/// (1/4 pi) times the integral of (omega_1 - omega_2) over the sphere:
/// midpoint rule in r, periodic trapezoid in the angle.
pub fn degree_sphere(atlas: &SphereAtlas, n_r: usize, n_phi: usize) -> Result<DegreeReport, CurveError> {
    let total = disk_integral(&atlas.near, n_r, n_phi)? + disk_integral(&atlas.far, n_r, n_phi)?;
    let value = total / (4.0 * PI);
    Ok(DegreeReport {
        value,
        nearest: value.round() as i64,
        defect: (value - value.round()).abs(),
        n_r,
        n_phi,
    })
}

/// Degree over a doubly periodic chart by the midpoint rule.
pub fn degree_torus(c: &CurveChart, n: usize) -> Result<DegreeReport, CurveError> {
    let (u, v) = match c.domain {
        Domain::Rect { u, v, periodic_u: true, periodic_v: true } => (u, v),
        _ => return Err(CurveError::OpenDomain),
    };
    let pts = c.domain.samples(n);
    let vals = collect(
        pts.par_iter()
            .map(|&(a, b)| {
                let s = c.coframe(a, b)?;
                Ok(chern_density(&s.wu, &s.wv))
            })
            .collect(),
    )?;
    let area = (u.1 - u.0) * (v.1 - v.0) / (n * n) as f64;
    let value = vals.iter().sum::<f64>() * area / (4.0 * PI);
    Ok(DegreeReport {
        value,
        nearest: value.round() as i64,
        defect: (value - value.round()).abs(),
        n_r: n,
        n_phi: n,
    })
}

/// Degree of a chart that is not closed: always an error.
pub fn degree_chart(c: &CurveChart, n: usize) -> Result<DegreeReport, CurveError> {
    if !c.domain.is_closed() {
        return Err(CurveError::OpenDomain);
    }
    degree_torus(c, n)
}

/// A vector field s(u, v) in R^8 along the chart.
pub trait SectionField: Send + Sync {
    fn value(&self, u: f64, v: f64) -> Result<Vec8, CurveError>;
}

impl<F> SectionField for F
where
    F: Fn(f64, f64) -> Vec8 + Send + Sync,
{
    fn value(&self, u: f64, v: f64) -> Result<Vec8, CurveError> {
        Ok(self(u, v))
    }
}

/// s = 0.
pub struct ZeroSection;

impl SectionField for ZeroSection {
    fn value(&self, _: f64, _: f64) -> Result<Vec8, CurveError> {
        Ok(Vec8::zeros())
    }
}

/// The H-component of an arbitrary field.
pub struct ProjectedSection<F> {
    pub field: Arc<dyn PlaneField>,
    pub x: F,
}

impl<F: Fn(f64, f64) -> Vec8 + Send + Sync> SectionField for ProjectedSection<F> {
    fn value(&self, u: f64, v: f64) -> Result<Vec8, CurveError> {
        Ok(self.field.plane(u, v)?.project_out(&(self.x)(u, v)))
    }
}

/// s = Re(f_1 a_1 + f_2 a_2 + f_3 a_3) in the frames of a fixed-reference field.
pub struct FrameSection<'a, A> {
    pub frames: CompletedField<'a, dyn PlaneField>,
    pub a: A,
}

impl<A: Fn(f64, f64) -> Vector3<C64> + Send + Sync> SectionField for FrameSection<'_, A> {
    fn value(&self, u: f64, v: f64) -> Result<Vec8, CurveError> {
        let g = self.frames.frame(u, v)?;
        Ok(section_from_components(&g, &(self.a)(u, v)))
    }
}

/// Re(f_1 a_1 + f_2 a_2 + f_3 a_3) for the frame g.
pub fn section_from_components(g: &Mat8, a: &Vector3<C64>) -> Vec8 {
    let f = f_vectors();
    let mut x = SVector::<C64, 8>::zeros();
    for k in 0..3 {
        x += f[k + 1] * a[k];
    }
    g * x.map(|z| z.re)
}

/// a_1 = s^3 + i s^4, a_2 = s^6 - i s^7, a_3 = s^5 - i s^8.
pub fn section_components(g: &Mat8, s: &Vec8) -> Vector3<C64> {
    let c = g.transpose() * s;
    Vector3::new(C64::new(c[2], c[3]), C64::new(c[5], -c[6]), C64::new(c[4], -c[7]))
}

/// x(r1, r2, u, v) = r1 e1 + r2 e2 + lambda s.
pub struct Cone4Fold<'a> {
    pub chart: &'a CurveChart,
    pub section: Option<&'a dyn SectionField>,
    pub lambda: f64,
}

/// Largest |<s, e_i>| / (1 + |s|) tolerated for an H-valued section.
pub const SECTION_PLANE_TOL: f64 = 1e-9;

pub fn build_cone<'a>(
    c: &'a CurveChart,
    s: Option<&'a dyn SectionField>,
    check: &[(f64, f64)],
) -> Result<Cone4Fold<'a>, CurveError> {
    if let Some(sec) = s {
        for &(u, v) in check {
            let p = c.plane(u, v)?;
            let x = sec.value(u, v)?;
            let defect = p.e1().dot(&x).abs().max(p.e2().dot(&x).abs()) / (1.0 + x.norm());
            if !(defect <= SECTION_PLANE_TOL) {
                return Err(CurveError::SectionNotInH { u, v, defect });
            }
        }
    }
    Ok(Cone4Fold { chart: c, section: s, lambda: 1.0 })
}

impl<'a> Cone4Fold<'a> {
    pub fn scaled(&self, lambda: f64) -> Cone4Fold<'a> {
        Cone4Fold { chart: self.chart, section: self.section, lambda }
    }

    pub fn point(&self, r1: f64, r2: f64, u: f64, v: f64) -> Result<Vec8, CurveError> {
        let p = self.chart.plane(u, v)?;
        let mut x = p.e1() * r1 + p.e2() * r2;
        if let Some(s) = self.section {
            x += s.value(u, v)? * self.lambda;
        }
        Ok(x)
    }

    /// Columns d/dr1, d/dr2, d/du, d/dv.
    pub fn jacobian(&self, r1: f64, r2: f64, u: f64, v: f64) -> Result<[Vec8; 4], CurveError> {
        self.jacobian_with(&self.chart.stencil, r1, r2, u, v)
    }

    pub fn jacobian_with(&self, st: &Stencil, r1: f64, r2: f64, u: f64, v: f64) -> Result<[Vec8; 4], CurveError> {
        let p = self.chart.plane(u, v)?;
        let (xu, xv) = st.gradient(|a, b| self.point(r1, r2, a, b), u, v)?;
        Ok([*p.e1(), *p.e2(), xu, xv])
    }
}

/// |(psi_1..psi_7)(V)| / vol(V) and vol(V) / prod |V_i|.
pub fn cayley_ratio(v: &[Vec8; 4]) -> (f64, f64) {
    let ps = float_tables().psi_values([&v[0], &v[1], &v[2], &v[3]]);
    let gram = SMatrix::<f64, 4, 4>::from_fn(|i, j| v[i].dot(&v[j]));
    let vol = gram.determinant().max(0.0).sqrt();
    let prod: f64 = v.iter().map(|x| x.norm()).product();
    let n = ps.iter().map(|x| x * x).sum::<f64>().sqrt();
    (n / vol, if prod > 0.0 { vol / prod } else { 0.0 })
}

/// Default radial grid for Cayley residuals.
pub fn default_r_grid() -> Vec<(f64, f64)> {
    vec![(1.0, 0.0), (0.0, 1.0), (0.7, -0.4), (-0.5, 0.3), (0.5, 0.3), (2.0, 1.5)]
}

pub fn cayley_residual(
    m: &Cone4Fold,
    samples: &[(f64, f64)],
    r_grid: &[(f64, f64)],
    tol: f64,
) -> Result<ResidualReport, CurveError> {
    let pts: Vec<(f64, f64, f64, f64)> = samples
        .iter()
        .flat_map(|&(u, v)| r_grid.iter().map(move |&(r1, r2)| (r1, r2, u, v)))
        .collect();
    let vals = collect(
        pts.par_iter()
            .map(|&(r1, r2, u, v)| Ok(cayley_ratio(&m.jacobian(r1, r2, u, v)?)))
            .collect(),
    )?;
    let kept: Vec<f64> = vals.iter().filter(|(_, q)| *q >= RANK_TOL).map(|(r, _)| *r).collect();
    if kept.is_empty() {
        return Err(CurveError::Degenerate);
    }
    Ok(ResidualReport::from_values("cayley", &kept, vals.len() - kept.len(), tol))
}

/// Comparison of the direct cone pullback with the three line sums
/// sum_{i,k} psi_m(e1, e2, e_i, e_k) omega_ia ∧ omega_kb, (a, b) = 11, 12, 22.
#[derive(Debug, Clone, Serialize)]
pub struct ReductionReport {
    /// Largest |line sum| over samples, m and the three lines.
    pub line_sup: f64,
    /// Largest |direct| over samples, m and the r-grid.
    pub direct_sup: f64,
    /// max |direct - C P(r)| with C = 1/2 and
    /// P(r) = L11 r1^2 + 2 L12 r1 r2 + L22 r2^2.
    pub discrepancy: f64,
    /// Least-squares estimate of C.
    pub constant: f64,
    pub samples: usize,
}

pub fn reduction_check(
    c: &CurveChart,
    samples: &[(f64, f64)],
    r_grid: &[(f64, f64)],
) -> Result<ReductionReport, CurveError> {
    let t = float_tables();
    let cone = Cone4Fold { chart: c, section: None, lambda: 1.0 };
    // the direct side uses the extrapolated stencil at the same h, so the
    // discrepancy measures the truncation error of the line sums
    let reference = Stencil { h: c.stencil.h, richardson: true };
    let per = collect(
        samples
            .par_iter()
            .map(|&(u, v)| {
                let s = c.coframe(u, v)?;
                let g = s.g;
                let e: Vec<Vec8> = (0..8).map(|i| g.column(i).into_owned()).collect();
                // L_ab[m]
                let mut lines = [[0.0f64; 7]; 3];
                for i in 2..8 {
                    for k in 2..8 {
                        if i == k {
                            continue;
                        }
                        let ps = t.psi_values([&e[0], &e[1], &e[i], &e[k]]);
                        let w = |m: &Mat8, row: usize, col: usize| m[(row, col)];
                        let l11 = w(&s.wu, i, 0) * w(&s.wv, k, 0) - w(&s.wv, i, 0) * w(&s.wu, k, 0);
                        let l12 = w(&s.wu, i, 0) * w(&s.wv, k, 1) - w(&s.wv, i, 0) * w(&s.wu, k, 1);
                        let l22 = w(&s.wu, i, 1) * w(&s.wv, k, 1) - w(&s.wv, i, 1) * w(&s.wu, k, 1);
                        for m in 0..7 {
                            lines[0][m] += ps[m] * l11;
                            lines[1][m] += ps[m] * l12;
                            lines[2][m] += ps[m] * l22;
                        }
                    }
                }
                let mut rows = Vec::new();
                for &(r1, r2) in r_grid {
                    let jac = cone.jacobian_with(&reference, r1, r2, u, v)?;
                    let direct = t.psi_values([&jac[0], &jac[1], &jac[2], &jac[3]]);
                    for m in 0..7 {
                        let p = lines[0][m] * r1 * r1 + 2.0 * lines[1][m] * r1 * r2 + lines[2][m] * r2 * r2;
                        rows.push((direct[m], p));
                    }
                }
                Ok((lines, rows))
            })
            .collect(),
    )?;
    let mut line_sup: f64 = 0.0;
    let mut direct_sup: f64 = 0.0;
    let mut disc: f64 = 0.0;
    let (mut dp, mut pp) = (0.0, 0.0);
    for (lines, rows) in &per {
        for l in lines.iter().flatten() {
            line_sup = line_sup.max(l.abs());
        }
        for &(d, p) in rows {
            direct_sup = direct_sup.max(d.abs());
            disc = disc.max((d - 0.5 * p).abs());
            dp += d * p;
            pp += p * p;
        }
    }
    Ok(ReductionReport {
        line_sup,
        direct_sup,
        discrepancy: disc,
        constant: if pp > 0.0 { dp / pp } else { f64::NAN },
        samples: samples.len(),
    })
}

/// alpha_i on d/du and d/dv at one sample, with the induced structure.
#[derive(Debug, Clone, Serialize)]
pub struct AlphaSample {
    pub u: f64,
    pub v: f64,
    pub a: [C64; 3],
    pub alpha_u: [C64; 3],
    pub alpha_v: [C64; 3],
    pub tau: C64,
    /// |(0,1)-parts| of alpha_1..alpha_3.
    pub part01: [f64; 3],
    pub residual: f64,
}

/// alpha = da + kappa a + (i/2)[conj theta_od] conj a from a coframe sample
/// and da on both directions.
pub fn alpha_from(s: &CoframeSample, a: &Vector3<C64>, da: (&Vector3<C64>, &Vector3<C64>)) -> (Vector3<C64>, Vector3<C64>) {
    let ac = a.map(|z| z.conj());
    let f = |w: &Mat8, d: &Vector3<C64>| {
        let tb = theta_od(w).map(|z| z.conj());
        d + kappa(w) * a + bracket3(&tb) * ac * (0.5 * I)
    };
    (f(&s.wu, da.0), f(&s.wv, da.1))
}

fn alpha_at(c: &CurveChart, s: &dyn SectionField, u: f64, v: f64) -> Result<AlphaSample, CurveError> {
    let frames = c.frames_at(u, v)?;
    let cf = mc_pullback(&frames, u, v, &c.stencil)?;
    let comp = |a: f64, b: f64| -> Result<Vector3<C64>, CurveError> {
        let g = frames.frame(a, b)?;
        Ok(section_components(&g, &s.value(a, b)?))
    };
    let a = comp(u, v)?;
    let (au, av) = c.stencil.gradient(comp, u, v)?;
    let (al_u, al_v) = alpha_from(&cf, &a, (&au, &av));
    let tau = induced_tau(&cf.theta_u(), &cf.theta_v());
    let p: [f64; 3] = std::array::from_fn(|k| part01(tau, al_u[k], al_v[k]).norm());
    Ok(AlphaSample {
        u,
        v,
        a: [a[0], a[1], a[2]],
        alpha_u: [al_u[0], al_u[1], al_u[2]],
        alpha_v: [al_v[0], al_v[1], al_v[2]],
        tau,
        residual: p.iter().map(|x| x * x).sum::<f64>().sqrt(),
        part01: p,
    })
}

pub fn alpha_forms(c: &CurveChart, s: &dyn SectionField, samples: &[(f64, f64)]) -> Result<Vec<AlphaSample>, CurveError> {
    require_pseudoholo(c, samples)?;
    collect(samples.par_iter().map(|&(u, v)| alpha_at(c, s, u, v)).collect())
}

pub fn alpha_report(alphas: &[AlphaSample], tol: f64) -> ResidualReport {
    let v: Vec<f64> = alphas.iter().map(|a| a.residual).collect();
    ResidualReport::from_values("alpha_01", &v, 0, tol)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DeformationVerdict {
    /// Both residuals small.
    BothSmall,
    /// Both residuals large.
    BothLarge,
    /// One small, one large: the equivalence is violated.
    Inconsistent,
    /// At least one residual in the gap between the thresholds.
    Inconclusive,
}

#[derive(Debug, Clone, Serialize)]
pub struct DeformationReport {
    pub alpha01: f64,
    pub cayley: f64,
    pub small: f64,
    pub large: f64,
    pub verdict: DeformationVerdict,
}

impl DeformationReport {
    pub fn consistent(&self) -> bool {
        matches!(self.verdict, DeformationVerdict::BothSmall | DeformationVerdict::BothLarge)
    }
}

pub const DEFORM_SMALL: f64 = 1e-6;
pub const DEFORM_LARGE: f64 = 1e-3;

pub fn classify(alpha01: f64, cayley: f64) -> DeformationVerdict {
    let cls = |x: f64| {
        if x < DEFORM_SMALL {
            Some(true)
        } else if x > DEFORM_LARGE {
            Some(false)
        } else {
            None
        }
    };
    match (cls(alpha01), cls(cayley)) {
        (Some(a), Some(b)) if a == b => {
            if a {
                DeformationVerdict::BothSmall
            } else {
                DeformationVerdict::BothLarge
            }
        }
        (Some(_), Some(_)) => DeformationVerdict::Inconsistent,
        _ => DeformationVerdict::Inconclusive,
    }
}

/// Compares the (0,1)-residual of alpha with the Cayley residual of the
/// deformed cone x = lambda s + r1 e1 + r2 e2.
pub fn deformation_check(
    c: &CurveChart,
    s: &dyn SectionField,
    samples: &[(f64, f64)],
    r_grid: &[(f64, f64)],
    lambda: f64,
) -> Result<DeformationReport, CurveError> {
    let scaled = |u: f64, v: f64| -> Result<Vec8, CurveError> { Ok(s.value(u, v)? * lambda) };
    let scaled = ScaledSection(&scaled);
    let alphas = alpha_forms(c, &scaled, samples)?;
    let a = alphas.iter().map(|x| x.residual).fold(0.0, f64::max);
    let cone = build_cone(c, Some(&scaled), samples)?;
    let cay = cayley_residual(&cone, samples, r_grid, DEFORM_SMALL)?;
    Ok(DeformationReport {
        alpha01: a,
        cayley: cay.sup,
        small: DEFORM_SMALL,
        large: DEFORM_LARGE,
        verdict: classify(a, cay.sup),
    })
}

struct ScaledSection<'a>(&'a (dyn Fn(f64, f64) -> Result<Vec8, CurveError> + Sync));

impl SectionField for ScaledSection<'_> {
    fn value(&self, u: f64, v: f64) -> Result<Vec8, CurveError> {
        (self.0)(u, v)
    }
}

/// Real matrix R(U) with f_0 -> f_0 det(U)^-1, (f_1, f_2, f_3) -> (f_1, f_2, f_3) U,
/// acting on the right of a frame.
pub fn u3_rotation(u: &Matrix3<C64>) -> Mat8 {
    let f = f_vectors();
    let fm = SMatrix::<C64, 8, 4>::from_columns(&f);
    let det = u.determinant();
    let mut nf = SMatrix::<C64, 8, 4>::zeros();
    nf.set_column(0, &(fm.column(0) / det));
    let rest = fm.fixed_columns::<3>(1) * u;
    for k in 0..3 {
        nf.set_column(k + 1, &rest.column(k));
    }
    // [F, conj F] is sqrt(2) times unitary
    let full = |m: &SMatrix<C64, 8, 4>| {
        let mut x = SMatrix::<C64, 8, 8>::zeros();
        for k in 0..4 {
            x.set_column(k, &m.column(k));
            x.set_column(k + 4, &m.column(k).map(|z| z.conj()));
        }
        x
    };
    let r = full(&nf) * full(&fm).adjoint() * C64::new(0.5, 0.0);
    r.map(|z| z.re)
}

fn gram_schmidt_c(v: Vector3<C64>, basis: &[Vector3<C64>]) -> Option<Vector3<C64>> {
    let mut w = v;
    for b in basis {
        w -= b * b.dotc(&w);
    }
    let n = w.norm();
    (n > 0.1).then(|| w / C64::new(n, 0.0))
}

/// The frame field rotated so that the I1-line is C f_1.
pub struct I1AdaptedField<'a> {
    pub base: CompletedField<'a, dyn PlaneField>,
    pub stencil: Stencil,
}

impl I1AdaptedField<'_> {
    /// Unit vector spanning the I1-line in the base gauge.
    pub fn line(&self, u: f64, v: f64) -> Result<Vector3<C64>, FrameError> {
        let s = mc_pullback(&self.base, u, v, &self.stencil)?;
        let n = theta_od(&s.wu);
        let nn = n.norm();
        if !(nn > 1e-12) {
            return Err(FrameError::Degenerate);
        }
        Ok(n / C64::new(nn, 0.0))
    }

    pub fn unitary(&self, u: f64, v: f64) -> Result<Matrix3<C64>, FrameError> {
        let n = self.line(u, v)?;
        let e = |k: usize| {
            let mut x = Vector3::<C64>::zeros();
            x[k] = C64::new(1.0, 0.0);
            x
        };
        let n2 = gram_schmidt_c(e(1), &[n]).or_else(|| gram_schmidt_c(e(0), &[n])).ok_or(FrameError::Degenerate)?;
        let n3 = gram_schmidt_c(e(2), &[n, n2])
            .or_else(|| gram_schmidt_c(e(0), &[n, n2]))
            .ok_or(FrameError::Degenerate)?;
        Ok(Matrix3::from_columns(&[n, n2, n3]))
    }
}

impl FrameField for I1AdaptedField<'_> {
    fn frame(&self, u: f64, v: f64) -> Result<Mat8, FrameError> {
        Ok(self.base.frame(u, v)? * u3_rotation(&self.unitary(u, v)?))
    }
}

/// Configuration of the least-squares dbar solve on a square chart.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DbarConfig {
    /// Total polynomial degree of the exponent g.
    pub degree: usize,
    /// Collocation points per side.
    pub grid: usize,
    /// Weight of the (1,0)-part regularization rows.
    pub mu: f64,
}

impl Default for DbarConfig {
    fn default() -> Self {
        DbarConfig { degree: 6, grid: 9, mu: 1e-6 }
    }
}

fn monomials(k: usize) -> Vec<(i32, i32)> {
    let mut v = Vec::new();
    for j in 0..=k as i32 {
        for l in 0..=(k as i32 - j) {
            if j + l > 0 {
                v.push((j, l));
            }
        }
    }
    v
}

/// a_1 = exp(g), g a polynomial in normalized chart coordinates.
#[derive(Debug, Clone, Serialize)]
pub struct ExpPolynomial {
    pub center: (f64, f64),
    pub scale: f64,
    pub monomials: Vec<(i32, i32)>,
    pub coeffs: Vec<C64>,
}

impl ExpPolynomial {
    pub fn exponent(&self, u: f64, v: f64) -> C64 {
        let x = (u - self.center.0) / self.scale;
        let y = (v - self.center.1) / self.scale;
        self.monomials
            .iter()
            .zip(&self.coeffs)
            .map(|(&(j, k), c)| c * x.powi(j) * y.powi(k))
            .sum()
    }

    pub fn value(&self, u: f64, v: f64) -> C64 {
        self.exponent(u, v).exp()
    }
}

/// s = Re(a_1 f_1) in the I1-adapted frames.
pub struct I1Section<'a> {
    pub frames: I1AdaptedField<'a>,
    pub a1: ExpPolynomial,
}

impl SectionField for I1Section<'_> {
    fn value(&self, u: f64, v: f64) -> Result<Vec8, CurveError> {
        let g = self.frames.frame(u, v)?;
        Ok(section_from_components(&g, &Vector3::new(self.a1.value(u, v), C64::new(0.0, 0.0), C64::new(0.0, 0.0))))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct I1Solution {
    pub a1: ExpPolynomial,
    /// Norm of the equation rows at the least-squares solution.
    pub ls_residual: f64,
    /// Largest |theta_3| + |theta_5| in the adapted frames (should vanish).
    pub adapted_defect: f64,
    pub alpha: ResidualReport,
    pub cayley: ResidualReport,
}

/// Samples where the I1-line is used: the chart's collocation grid.
fn collocation(c: &CurveChart, n: usize) -> Result<((f64, f64), f64, Vec<(f64, f64)>), CurveError> {
    match c.domain {
        Domain::Rect { u, v, .. } => {
            let center = (0.5 * (u.0 + u.1), 0.5 * (v.0 + v.1));
            let half = 0.5 * (u.1 - u.0).min(v.1 - v.0);
            let mut pts = Vec::new();
            for a in 0..n {
                for b in 0..n {
                    let t = |k: usize| if n == 1 { 0.0 } else { -1.0 + 2.0 * k as f64 / (n - 1) as f64 };
                    pts.push((center.0 + half * t(a), center.1 + half * t(b)));
                }
            }
            Ok((center, half, pts))
        }
        Domain::Disk { radius } => {
            let half = radius / 2f64.sqrt();
            let c2 = CurveChart { domain: Domain::square(half), ..c.clone() };
            collocation(&c2, n)
        }
    }
}

/// Builds the I1-line along the chart and solves dbar a_1 + pi01(kappa_11) a_1 = 0
/// for a_1 = exp(g) by least squares; returns the section and its checks.
pub fn i1_line_and_sections<'a>(
    c: &'a CurveChart,
    cfg: &DbarConfig,
    check_samples: &[(f64, f64)],
    r_grid: &[(f64, f64)],
) -> Result<(I1Solution, I1Section<'a>), CurveError> {
    let (center, half, pts) = collocation(c, cfg.grid)?;
    require_pseudoholo(c, &pts)?;
    // refuse when I1 vanishes (fiber curves)
    let mut i1_sup: f64 = 0.0;
    let mut totals = Vec::new();
    for &(u, v) in &pts {
        let s = c.coframe(u, v)?;
        let (a, b) = (theta(&s.wu), theta(&s.wv));
        let od: f64 = [0, 2, 4].iter().map(|&k| a[k].norm_sqr() + b[k].norm_sqr()).sum::<f64>().sqrt();
        let all: f64 = a.iter().chain(b.iter()).map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        i1_sup = i1_sup.max(od);
        totals.push(all);
    }
    let scale = median(&mut totals);
    if i1_sup < ZERO_LOCUS_REL * scale {
        return Err(CurveError::I1Vanishes(i1_sup));
    }
    let frames = I1AdaptedField { base: c.frames_at(center.0, center.1)?, stencil: c.stencil };
    let mons = monomials(cfg.degree);
    let nm = mons.len();
    let rows_per = 2;
    let mut m = DMatrix::<C64>::zeros(rows_per * pts.len(), nm);
    let mut rhs = DVector::<C64>::zeros(rows_per * pts.len());
    let samples = collect(
        pts.par_iter()
            .map(|&(u, v)| Ok((u, v, mc_pullback(&frames, u, v, &c.stencil)?)))
            .collect(),
    )?;
    let mut adapted_defect: f64 = 0.0;
    let sq = cfg.mu.sqrt();
    for (row, (u, v, s)) in samples.iter().enumerate() {
        let (tu, tv) = (theta(&s.wu), theta(&s.wv));
        adapted_defect = adapted_defect.max(tu[2].norm() + tu[4].norm() + tv[2].norm() + tv[4].norm());
        let tau = tv[0] / tu[0];
        let tb = tau.conj();
        let (ku, kv) = (kappa(&s.wu)[(0, 0)], kappa(&s.wv)[(0, 0)]);
        let x = (u - center.0) / half;
        let y = (v - center.1) / half;
        for (col, &(j, k)) in mons.iter().enumerate() {
            let du = if j > 0 { j as f64 * x.powi(j - 1) * y.powi(k) / half } else { 0.0 };
            let dv = if k > 0 { k as f64 * x.powi(j) * y.powi(k - 1) / half } else { 0.0 };
            m[(2 * row, col)] = (tau * du - dv) / (tau - tb);
            m[(2 * row + 1, col)] = (tb * du - dv) / (tb - tau) * sq;
        }
        rhs[2 * row] = -(tau * ku - kv) / (tau - tb);
    }
    let svd = m.clone().svd(true, true);
    let coef = svd.solve(&rhs, 1e-12).map_err(|e| CurveError::Solver(e.to_string()))?;
    let resid = &m * &coef - &rhs;
    let ls_residual = (0..samples.len()).map(|r| resid[2 * r].norm_sqr()).sum::<f64>().sqrt();
    let a1 = ExpPolynomial {
        center,
        scale: half,
        monomials: mons,
        coeffs: coef.iter().cloned().collect(),
    };
    let section = I1Section { frames, a1: a1.clone() };
    let alphas = alpha_forms(c, &section, check_samples)?;
    let alpha = alpha_report(&alphas, 1e-5);
    let cone = build_cone(c, Some(&section), check_samples)?;
    let mut cayley = cayley_residual(&cone, check_samples, r_grid, 1e-5)?;
    cayley.name = "deformed_cone_cayley".into();
    Ok((
        I1Solution { a1, ls_residual, adapted_defect, alpha, cayley },
        section,
    ))
}

/// Which line subbundle to test.
pub enum LineField<'a> {
    /// C f_0, the (1,0)-line of the plane itself.
    Tautological,
    /// The I1-line in H'.
    I1,
    /// A unit vector field n(u, v) in C^3, in the fixed-reference gauge at
    /// each sample (frames from `CurveChart::frames_at`).
    Custom(&'a (dyn Fn(f64, f64) -> Vector3<C64> + Sync)),
}

#[derive(Debug, Clone, Serialize)]
pub struct IILReport {
    /// Largest |(0,1)-part of II_L| relative to |II_L|.
    pub part01: f64,
    /// For the tautological line: max |II_L - theta_ev / 2| over components.
    pub theta2_match: Option<f64>,
    pub samples: usize,
}

/// II_L = projection of the connection off L, and its (0,1)-part.
pub fn second_fund_iil(c: &CurveChart, line: &LineField, samples: &[(f64, f64)]) -> Result<IILReport, CurveError> {
    let per = collect(
        samples
            .par_iter()
            .map(|&(u, v)| -> Result<(f64, Option<f64>), CurveError> {
                let s = c.coframe(u, v)?;
                let (tu, tv) = (theta(&s.wu), theta(&s.wv));
                let tau = induced_tau(&tu, &tv);
                match line {
                    LineField::Tautological => {
                        // d f_0 along the curve, projected on f_1..f_3
                        let f0 = |a: f64, b: f64| -> Result<SVector<C64, 8>, CurveError> {
                            let p = c.plane(a, b)?;
                            Ok(p.e1().map(|x| C64::new(x, 0.0)) - p.e2().map(|x| C64::new(0.0, x)))
                        };
                        let (du, dv) = c.stencil.gradient(f0, u, v)?;
                        let fs = crate::frames::frame_f(&s.g);
                        let comp = |d: &SVector<C64, 8>, b: usize| fs[b].dotc(d) * 0.5;
                        let ev_u = theta_ev(&s.wu);
                        let ev_v = theta_ev(&s.wv);
                        let mut q2 = 0.0;
                        let mut n2 = 0.0;
                        let mut mism: f64 = 0.0;
                        for b in 1..4 {
                            let (pu, pv) = (comp(&du, b), comp(&dv, b));
                            mism = mism.max((pu - ev_u[b - 1] * 0.5).norm()).max((pv - ev_v[b - 1] * 0.5).norm());
                            q2 += part01(tau, pu, pv).norm_sqr();
                            n2 += pu.norm_sqr() + pv.norm_sqr();
                        }
                        Ok((q2.sqrt() / n2.sqrt().max(1e-300), Some(mism)))
                    }
                    _ => {
                        let frames = c.frames_at(u, v)?;
                        let adapted = I1AdaptedField { base: frames, stencil: c.stencil };
                        let n_at = |a: f64, b: f64| -> Result<Vector3<C64>, CurveError> {
                            Ok(match line {
                                LineField::I1 => adapted.line(a, b)?,
                                LineField::Custom(f) => f(a, b),
                                LineField::Tautological => unreachable!(),
                            })
                        };
                        let cf = mc_pullback(&adapted.base, u, v, &c.stencil)?;
                        let n = n_at(u, v)?;
                        let (du, dv) = c.stencil.gradient(n_at, u, v)?;
                        let conn = |d: Vector3<C64>, k: Matrix3<C64>| {
                            let x = d + k * n;
                            x - n * n.dotc(&x)
                        };
                        let pu = conn(du, kappa(&cf.wu));
                        let pv = conn(dv, kappa(&cf.wv));
                        let tau = induced_tau(&cf.theta_u(), &cf.theta_v());
                        let mut q2 = 0.0;
                        for k in 0..3 {
                            q2 += part01(tau, pu[k], pv[k]).norm_sqr();
                        }
                        let n2 = pu.norm_squared() + pv.norm_squared();
                        Ok((q2.sqrt() / n2.sqrt().max(1e-300), None))
                    }
                }
            })
            .collect(),
    )?;
    let part01 = per.iter().map(|x| x.0).fold(0.0, f64::max);
    let theta2_match = if per.iter().all(|x| x.1.is_some()) {
        Some(per.iter().filter_map(|x| x.1).fold(0.0, f64::max))
    } else {
        None
    };
    Ok(IILReport { part01, theta2_match, samples: samples.len() })
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MinimalityReport {
    /// The twistor image is a point.
    ConstantMap { sup_differential: f64 },
    Surface {
        /// sup |mean curvature in S^6| over regular samples.
        sup: f64,
        mean: f64,
        samples: usize,
        /// Samples where the differential degenerates.
        branch_points: Vec<(f64, f64)>,
    },
}

/// Mean curvature of the twistor image J o gamma in S^6 by second differences of width h.
pub fn minimality_residual(c: &CurveChart, samples: &[(f64, f64)], h: f64) -> Result<MinimalityReport, CurveError> {
    let p = |u: f64, v: f64| -> Result<Vec7, CurveError> { Ok(twistor_project(&c.plane(u, v)?, Completion::Canonical)?.vector()) };
    let per = collect(
        samples
            .par_iter()
            .map(|&(u, v)| -> Result<(f64, f64, f64), CurveError> {
                let x = p(u, v)?;
                let (xp_u, xm_u, xp_v, xm_v) = (p(u + h, v)?, p(u - h, v)?, p(u, v + h)?, p(u, v - h)?);
                let xu = (xp_u - xm_u) / (2.0 * h);
                let xv = (xp_v - xm_v) / (2.0 * h);
                let xuu = (xp_u - x * 2.0 + xm_u) / (h * h);
                let xvv = (xp_v - x * 2.0 + xm_v) / (h * h);
                let xuv = (p(u + h, v + h)? - p(u + h, v - h)? - p(u - h, v + h)? + p(u - h, v - h)?) / (4.0 * h * h);
                let (e, f, g) = (xu.dot(&xu), xu.dot(&xv), xv.dot(&xv));
                let det = e * g - f * f;
                let diff = (e + g).sqrt();
                if det <= 1e-12 * (e + g).powi(2) || diff < 1e-8 {
                    return Ok((f64::NAN, diff, det));
                }
                let lap = (xuu * g - xuv * (2.0 * f) + xvv * e) / det;
                // remove the tangential and radial parts
                let mut hvec = lap - x * x.dot(&lap);
                let t1 = xu / xu.norm();
                let t2 = {
                    let w = xv - t1 * t1.dot(&xv);
                    w / w.norm()
                };
                hvec -= t1 * t1.dot(&hvec) + t2 * t2.dot(&hvec);
                Ok((hvec.norm() * 0.5, diff, det))
            })
            .collect(),
    )?;
    let sup_diff = per.iter().map(|x| x.1).fold(0.0, f64::max);
    if sup_diff < 1e-8 {
        return Ok(MinimalityReport::ConstantMap { sup_differential: sup_diff });
    }
    let regular: Vec<f64> = per.iter().filter(|x| !x.0.is_nan()).map(|x| x.0).collect();
    let branch_points = samples
        .iter()
        .zip(&per)
        .filter(|(_, x)| x.0.is_nan())
        .map(|(s, _)| *s)
        .collect();
    Ok(MinimalityReport::Surface {
        sup: regular.iter().cloned().fold(0.0, f64::max),
        mean: if regular.is_empty() { f64::NAN } else { regular.iter().sum::<f64>() / regular.len() as f64 },
        samples: regular.len(),
        branch_points,
    })
}

/// Applies g to every plane of a chart.
pub struct RotatedField {
    pub inner: Arc<dyn PlaneField>,
    pub g: Mat8,
}

impl PlaneField for RotatedField {
    fn plane(&self, u: f64, v: f64) -> Result<OrientedPlane, FrameError> {
        self.inner.plane(u, v)?.transformed(&self.g)
    }
}

impl CurveChart {
    /// The chart moved by g in Spin(7).
    pub fn rotated(&self, g: &Mat8) -> CurveChart {
        CurveChart {
            name: format!("{}_rotated", self.name),
            field: Arc::new(RotatedField { inner: self.field.clone(), g: *g }),
            ..self.clone()
        }
    }
}

/// Frame completion used by cones and sections that needs no validation.
pub fn chart_frame(c: &CurveChart, u: f64, v: f64) -> Result<Mat8, FrameError> {
    let p = c.plane(u, v)?;
    let (r3, r5) = crate::frames::reference_vectors(&p, c.completion)?;
    complete_raw(&p, &r3, &r5)
}

/// |theta_od| and |theta_ev| at a sample.
pub fn theta_split(s: &CoframeSample) -> (f64, f64) {
    let (a, b) = (theta(&s.wu), theta(&s.wv));
    let od = [0, 2, 4].iter().map(|&k| a[k].norm_sqr() + b[k].norm_sqr()).sum::<f64>().sqrt();
    let ev = [1, 3, 5].iter().map(|&k| a[k].norm_sqr() + b[k].norm_sqr()).sum::<f64>().sqrt();
    (od, ev)
}
