//! Exact exterior calculus on the Maurer-Cartan forms omega_ij of Spin(7).
//!
//! Expressions are polynomials in the 21 free generators omega_ij
//! (1 <= i < j <= 7) with complex rational coefficients. omega_8k is
//! rewritten through the spin(7) relations on construction, omega_ji = -omega_ij.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Neg, Sub};
use std::sync::OnceLock;

use num_complex::Complex;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::scalar::{q, q_frac, Q};
use crate::spin7::{RELATIONS, RELATION_ORDER};

pub type CQ = Complex<Q>;

pub const N_GENERATORS: usize = 21;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SymError {
    #[error("d is only applied up to degree 3 (got degree {0})")]
    DegreeOverflow(usize),
}

pub fn cq(re: Q, im: Q) -> CQ {
    Complex::new(re, im)
}

/// Rational real constant n/d.
pub fn cr(n: i64, d: i64) -> CQ {
    cq(q_frac(n, d), Q::zero())
}

/// Imaginary constant i n/d.
pub fn ci(n: i64, d: i64) -> CQ {
    cq(Q::zero(), q_frac(n, d))
}

/// Free generator pairs in canonical order.
pub fn generator_pairs() -> &'static [(usize, usize)] {
    static G: OnceLock<Vec<(usize, usize)>> = OnceLock::new();
    G.get_or_init(|| {
        let mut v = Vec::new();
        for i in 1..=7 {
            for j in i + 1..=7 {
                v.push((i, j));
            }
        }
        v
    })
}

fn generator_id(i: usize, j: usize) -> usize {
    generator_pairs()
        .iter()
        .position(|&p| p == (i, j))
        .expect("free generator")
}

fn sign_of_merge(a: u32, b: u32) -> i64 {
    let mut inv = 0u32;
    let mut bb = b;
    while bb != 0 {
        let j = bb.trailing_zeros();
        inv += (a >> (j + 1)).count_ones();
        bb &= bb - 1;
    }
    if inv % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Graded exterior polynomial in the free generators. Monomials are bitmasks
/// over generator ids, read in increasing id order.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct SymExpr {
    terms: BTreeMap<u32, CQ>,
}

impl SymExpr {
    pub fn zero() -> SymExpr {
        SymExpr::default()
    }

    pub fn constant(c: CQ) -> SymExpr {
        let mut e = SymExpr::zero();
        e.push(0, c);
        e
    }

    pub fn generator(k: usize) -> SymExpr {
        assert!(k < N_GENERATORS);
        SymExpr::constant(CQ::one()).with_mask(1 << k)
    }

    fn with_mask(mut self, m: u32) -> SymExpr {
        let c = self.terms.remove(&0).unwrap_or_else(CQ::zero);
        self.terms.clear();
        self.push(m, c);
        self
    }

    /// omega_ij for 1 <= i, j <= 8, reduced to free generators.
    pub fn omega(i: usize, j: usize) -> SymExpr {
        assert!((1..=8).contains(&i) && (1..=8).contains(&j));
        if i == j {
            return SymExpr::zero();
        }
        if i == 8 {
            let r = RELATION_ORDER.iter().position(|&k| k == j).expect("relation");
            let mut out = SymExpr::zero();
            for &(c, a, b) in &RELATIONS[r] {
                out = out + SymExpr::omega(a, b).scale(&cr(c, 1));
            }
            return out;
        }
        if j == 8 {
            return -SymExpr::omega(8, i);
        }
        if i < j {
            SymExpr::generator(generator_id(i, j))
        } else {
            -SymExpr::generator(generator_id(j, i))
        }
    }

    fn push(&mut self, m: u32, c: CQ) {
        if c.is_zero() {
            return;
        }
        let new = match self.terms.remove(&m) {
            Some(old) => old + c,
            None => c,
        };
        if !new.is_zero() {
            self.terms.insert(m, new);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Highest monomial degree (0 for the zero polynomial).
    pub fn degree(&self) -> usize {
        self.terms.keys().map(|m| m.count_ones() as usize).max().unwrap_or(0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (Vec<(usize, usize)>, &CQ)> {
        self.terms.iter().map(|(m, c)| (monomial_pairs(*m), c))
    }

    pub fn scale(&self, c: &CQ) -> SymExpr {
        let mut out = SymExpr::zero();
        for (m, v) in &self.terms {
            out.push(*m, v * c);
        }
        out
    }

    /// Multiply by i.
    pub fn times_i(&self) -> SymExpr {
        self.scale(&ci(1, 1))
    }

    pub fn conj(&self) -> SymExpr {
        SymExpr {
            terms: self.terms.iter().map(|(m, c)| (*m, c.conj())).collect(),
        }
    }

    /// (x + conj x) / 2.
    pub fn re(&self) -> SymExpr {
        (self.clone() + self.conj()).scale(&cr(1, 2))
    }

    /// (x - conj x) / 2i.
    pub fn im(&self) -> SymExpr {
        (self.clone() - self.conj()).scale(&ci(-1, 2))
    }

    pub fn wedge(&self, other: &SymExpr) -> SymExpr {
        let mut out = SymExpr::zero();
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                if a & b != 0 {
                    continue;
                }
                let s = sign_of_merge(*a, *b);
                let c = ca * cb;
                out.push(a | b, if s == 1 { c } else { -c });
            }
        }
        out
    }

    /// Exterior derivative through d omega_ij = -sum_k omega_ik ∧ omega_kj.
    pub fn d(&self) -> Result<SymExpr, SymError> {
        let deg = self.degree();
        if deg > 3 {
            return Err(SymError::DegreeOverflow(deg));
        }
        let dg = generator_differentials();
        let mut out = SymExpr::zero();
        for (m, c) in &self.terms {
            let gens: Vec<usize> = (0..N_GENERATORS).filter(|k| m & (1 << k) != 0).collect();
            for (p, &g) in gens.iter().enumerate() {
                let left: u32 = gens[..p].iter().map(|k| 1u32 << k).sum();
                let right: u32 = gens[p + 1..].iter().map(|k| 1u32 << k).sum();
                let sign = if p % 2 == 0 { c.clone() } else { -c.clone() };
                let term = mono(left).wedge(&dg[g]).wedge(&mono(right));
                out = out + term.scale(&sign);
            }
        }
        Ok(out)
    }
}

fn mono(m: u32) -> SymExpr {
    let mut e = SymExpr::zero();
    e.push(m, CQ::one());
    e
}

fn monomial_pairs(m: u32) -> Vec<(usize, usize)> {
    (0..N_GENERATORS)
        .filter(|k| m & (1 << k) != 0)
        .map(|k| generator_pairs()[k])
        .collect()
}

fn generator_differentials() -> &'static Vec<SymExpr> {
    static D: OnceLock<Vec<SymExpr>> = OnceLock::new();
    D.get_or_init(|| {
        generator_pairs()
            .iter()
            .map(|&(i, j)| {
                let mut r = SymExpr::zero();
                for k in 1..=8 {
                    r = r - SymExpr::omega(i, k).wedge(&SymExpr::omega(k, j));
                }
                r
            })
            .collect()
    })
}

impl Add for SymExpr {
    type Output = SymExpr;
    fn add(mut self, rhs: SymExpr) -> SymExpr {
        for (m, c) in rhs.terms {
            self.push(m, c);
        }
        self
    }
}

impl Add<&SymExpr> for &SymExpr {
    type Output = SymExpr;
    fn add(self, rhs: &SymExpr) -> SymExpr {
        self.clone() + rhs.clone()
    }
}

impl Sub for SymExpr {
    type Output = SymExpr;
    fn sub(self, rhs: SymExpr) -> SymExpr {
        self + (-rhs)
    }
}

impl Sub<&SymExpr> for &SymExpr {
    type Output = SymExpr;
    fn sub(self, rhs: &SymExpr) -> SymExpr {
        self.clone() - rhs.clone()
    }
}

impl Neg for SymExpr {
    type Output = SymExpr;
    fn neg(self) -> SymExpr {
        SymExpr {
            terms: self.terms.into_iter().map(|(m, c)| (m, -c)).collect(),
        }
    }
}

impl std::iter::Sum for SymExpr {
    fn sum<I: Iterator<Item = SymExpr>>(iter: I) -> SymExpr {
        iter.fold(SymExpr::zero(), |a, b| a + b)
    }
}

fn fmt_cq(c: &CQ) -> String {
    if c.im.is_zero() {
        format!("{}", c.re)
    } else if c.re.is_zero() {
        format!("{}i", c.im)
    } else {
        format!("({}+{}i)", c.re, c.im)
    }
}

impl fmt::Display for SymExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(m, c)| {
                let mons: Vec<String> = monomial_pairs(*m).iter().map(|(i, j)| format!("w{i}{j}")).collect();
                if mons.is_empty() {
                    fmt_cq(c)
                } else {
                    format!("{}*{}", fmt_cq(c), mons.join("^"))
                }
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl fmt::Debug for SymExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

pub type Mat3 = [[SymExpr; 3]; 3];

fn mat3(f: impl Fn(usize, usize) -> SymExpr) -> Mat3 {
    std::array::from_fn(|a| std::array::from_fn(|b| f(a, b)))
}

/// [v] = [[0, v3, -v2], [-v3, 0, v1], [v2, -v1, 0]].
pub fn bracket_map(v: &[SymExpr; 3]) -> Mat3 {
    let z = SymExpr::zero;
    [
        [z(), v[2].clone(), -v[1].clone()],
        [-v[2].clone(), z(), v[0].clone()],
        [v[1].clone(), -v[0].clone(), z()],
    ]
}

/// Named forms of the adapted coframe. Arrays indexed by the usual labels:
/// `zeta[3..=8]`, `theta[1..=6]`, `tau[1..=6]`, `eta`/`sigma[1..=6]`;
/// index 0 (and 1, 2 for zeta) is unused and zero.
#[derive(Clone, Debug)]
pub struct FrameEnv {
    pub zeta: [SymExpr; 9],
    pub theta: [SymExpr; 7],
    pub theta_bar: [SymExpr; 7],
    pub theta_od: [SymExpr; 3],
    pub theta_ev: [SymExpr; 3],
    pub kappa: Mat3,
    pub tr_kappa: SymExpr,
    /// kappa - tr(kappa) I.
    pub psi_conn: Mat3,
    /// kappa + tr(kappa) I.
    pub psi_tilde: Mat3,
    pub tau: [SymExpr; 7],
    pub omega_curv: Mat3,
    pub eta: [SymExpr; 7],
    pub sigma: [SymExpr; 7],
    /// Re(kappa) and Im(kappa), entrywise.
    pub varphi: Mat3,
    pub psi_im: Mat3,
    pub omega: SymExpr,
    pub omega1: SymExpr,
    pub omega2: SymExpr,
}

pub fn w(i: usize, j: usize) -> SymExpr {
    SymExpr::omega(i, j)
}

/// Binds the complex coframe, connection and torsion forms.
pub fn define_frames() -> FrameEnv {
    let i_ = |e: SymExpr| e.times_i();
    let z = SymExpr::zero;
    let mut zeta: [SymExpr; 9] = Default::default();
    zeta[3] = w(3, 1) + i_(w(4, 1));
    zeta[4] = w(3, 2) + i_(w(4, 2));
    zeta[6] = w(6, 1) - i_(w(7, 1));
    zeta[7] = w(6, 2) - i_(w(7, 2));
    zeta[5] = w(5, 1) - i_(w(8, 1));
    zeta[8] = w(5, 2) - i_(w(8, 2));

    let mut theta: [SymExpr; 7] = Default::default();
    theta[1] = &zeta[3] + &i_(zeta[4].clone());
    theta[2] = &zeta[3] - &i_(zeta[4].clone());
    theta[3] = &zeta[6] + &i_(zeta[7].clone());
    theta[4] = &zeta[6] - &i_(zeta[7].clone());
    theta[5] = &zeta[5] + &i_(zeta[8].clone());
    theta[6] = &zeta[5] - &i_(zeta[8].clone());
    let tb: [SymExpr; 7] = std::array::from_fn(|k| theta[k].conj());

    let half_i = ci(1, 2);
    let kappa: Mat3 = [
        [
            i_(w(4, 3)),
            -(w(6, 3) + i_(w(6, 4))) - tb[5].scale(&half_i),
            -(w(5, 3) + i_(w(5, 4))) + tb[3].scale(&half_i),
        ],
        [
            (w(6, 3) - i_(w(6, 4))) - theta[5].scale(&half_i),
            -i_(w(7, 6)),
            (w(6, 5) - i_(w(7, 5))) - tb[1].scale(&half_i),
        ],
        [
            (w(5, 3) - i_(w(5, 4))) + theta[3].scale(&half_i),
            -(w(6, 5) + i_(w(7, 5))) - theta[1].scale(&half_i),
            i_(w(7, 6) - w(4, 3) - w(2, 1)),
        ],
    ];
    let tr_kappa = &(&kappa[0][0] + &kappa[1][1]) + &kappa[2][2];
    let psi_conn = mat3(|a, b| if a == b { &kappa[a][b] - &tr_kappa } else { kappa[a][b].clone() });
    let psi_tilde = mat3(|a, b| if a == b { &kappa[a][b] + &tr_kappa } else { kappa[a][b].clone() });

    let mut tau: [SymExpr; 7] = Default::default();
    tau[1] = (tb[4].wedge(&tb[5]) + tb[3].wedge(&tb[6])).scale(&half_i);
    tau[2] = tb[3].wedge(&tb[5]).times_i();
    tau[3] = (tb[6].wedge(&tb[1]) + tb[5].wedge(&tb[2])).scale(&half_i);
    tau[4] = tb[5].wedge(&tb[1]).times_i();
    tau[5] = (tb[2].wedge(&tb[3]) + tb[1].wedge(&tb[4])).scale(&half_i);
    tau[6] = tb[1].wedge(&tb[3]).times_i();

    let t = |a: usize, b: usize| theta[a].wedge(&tb[b]);
    let mut om: Mat3 = mat3(|_, _| z());
    om[0][0] = t(1, 1) - t(3, 3) - t(5, 5) + t(2, 2);
    om[1][1] = -t(1, 1) + t(3, 3) - t(5, 5) + t(4, 4);
    om[2][2] = -t(1, 1) - t(3, 3) + t(5, 5) + t(6, 6);
    om[1][0] = t(3, 1).scale(&cr(2, 1)) + t(4, 2);
    om[2][0] = t(5, 1).scale(&cr(2, 1)) + t(6, 2);
    om[2][1] = t(5, 3).scale(&cr(2, 1)) + t(6, 4);
    for (a, b) in [(1, 0), (2, 0), (2, 1)] {
        om[b][a] = -om[a][b].conj();
    }

    let eta: [SymExpr; 7] = std::array::from_fn(|k| theta[k].re());
    let sigma: [SymExpr; 7] = std::array::from_fn(|k| theta[k].im());
    let varphi = mat3(|a, b| kappa[a][b].re());
    let psi_im = mat3(|a, b| kappa[a][b].im());

    let omega1 = (t(1, 1) + t(3, 3) + t(5, 5)).scale(&half_i);
    let omega2 = (t(2, 2) + t(4, 4) + t(6, 6)).scale(&half_i);
    let omega = &omega1 + &omega2;

    FrameEnv {
        theta_od: [theta[1].clone(), theta[3].clone(), theta[5].clone()],
        theta_ev: [theta[2].clone(), theta[4].clone(), theta[6].clone()],
        zeta,
        theta_bar: tb,
        theta,
        kappa,
        tr_kappa,
        psi_conn,
        psi_tilde,
        tau,
        omega_curv: om,
        eta,
        sigma,
        varphi,
        psi_im,
        omega,
        omega1,
        omega2,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct IdentityCheck {
    pub name: String,
    pub holds: bool,
    pub residual_terms: usize,
    pub residual: String,
}

/// canonical(lhs - rhs) == 0, with the residual for diagnosis.
pub fn verify_identity(name: &str, lhs: &SymExpr, rhs: &SymExpr) -> IdentityCheck {
    let r = lhs - rhs;
    IdentityCheck {
        name: name.to_string(),
        holds: r.is_zero(),
        residual_terms: r.len(),
        residual: r.to_string(),
    }
}

/// An identity whose residual is a list of components, all of which must vanish.
pub fn check_components(name: &str, residuals: &[SymExpr]) -> IdentityCheck {
    let nonzero: Vec<String> = residuals
        .iter()
        .enumerate()
        .filter(|(_, r)| !r.is_zero())
        .map(|(k, r)| if residuals.len() == 1 { r.to_string() } else { format!("[{k}] {r}") })
        .collect();
    IdentityCheck {
        name: name.to_string(),
        holds: nonzero.is_empty(),
        residual_terms: residuals.iter().map(|r| r.len()).sum(),
        residual: nonzero.join("; "),
    }
}

/// Whether an identity is expected to hold or documents a misprint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Expectation {
    Holds,
    /// The displayed form is known to be off; the corrected variant is a
    /// separate entry. Reported, not counted as a failure when it fails.
    Erratum,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteEntry {
    pub name: String,
    pub description: String,
    pub expectation: Expectation,
    pub check: IdentityCheck,
}

impl SuiteEntry {
    /// Passing means the outcome matches the expectation.
    pub fn passed(&self) -> bool {
        match self.expectation {
            Expectation::Holds => self.check.holds,
            Expectation::Erratum => !self.check.holds,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub entries: Vec<SuiteEntry>,
}

impl SuiteReport {
    pub fn all_passed(&self) -> bool {
        self.entries.iter().all(|e| e.passed())
    }

    pub fn get(&self, name: &str) -> Option<&SuiteEntry> {
        self.entries.iter().find(|e| e.name == name)
    }

    pub fn failures(&self) -> Vec<&SuiteEntry> {
        self.entries.iter().filter(|e| !e.passed()).collect()
    }
}

type Builder = Box<dyn Fn(&FrameEnv) -> Vec<SymExpr> + Send + Sync>;

struct Spec {
    name: String,
    description: &'static str,
    expectation: Expectation,
    build: Builder,
}

fn spec(
    name: impl Into<String>,
    description: &'static str,
    expectation: Expectation,
    build: impl Fn(&FrameEnv) -> Vec<SymExpr> + Send + Sync + 'static,
) -> Spec {
    Spec {
        name: name.into(),
        description,
        expectation,
        build: Box::new(build),
    }
}

fn d(e: &SymExpr) -> SymExpr {
    e.d().expect("suite expressions have degree <= 3")
}

fn row_wedge(m: &Mat3, a: usize, v: &[SymExpr; 3]) -> SymExpr {
    (0..3).map(|b| m[a][b].wedge(&v[b])).sum()
}

fn sum_tt(env: &FrameEnv, ks: [usize; 3]) -> SymExpr {
    ks.iter().map(|&k| env.theta[k].wedge(&env.theta_bar[k])).sum()
}

/// Complex 8-vectors of the f-frame: f0 = e1 - i e2, f1 = e3 - i e4,
/// f2 = e6 + i e7, f3 = e5 + i e8.
fn f_frame() -> [[CQ; 8]; 4] {
    let mut f: [[CQ; 8]; 4] = Default::default();
    let set = |v: &mut [CQ; 8], k: usize, c: CQ| v[k - 1] = c;
    set(&mut f[0], 1, cr(1, 1));
    set(&mut f[0], 2, ci(-1, 1));
    set(&mut f[1], 3, cr(1, 1));
    set(&mut f[1], 4, ci(-1, 1));
    set(&mut f[2], 6, cr(1, 1));
    set(&mut f[2], 7, ci(1, 1));
    set(&mut f[3], 5, cr(1, 1));
    set(&mut f[3], 8, ci(1, 1));
    f
}

/// d f_a - [(f0,f) M + (f̄0,f̄) N]_a, componentwise, with de_i = e_j omega_ji.
fn frame_evolution_residual(env: &FrameEnv, a: usize) -> Vec<SymExpr> {
    let f = f_frame();
    let half = cr(1, 2);
    let mut m: [[SymExpr; 4]; 4] = Default::default();
    let mut n: [[SymExpr; 4]; 4] = Default::default();
    m[0][0] = -env.tr_kappa.clone();
    let bo = bracket_map(&env.theta_od);
    for b in 0..3 {
        m[0][b + 1] = env.theta_ev[b].conj().scale(&cr(-1, 2));
        m[b + 1][0] = env.theta_ev[b].scale(&half);
        n[0][b + 1] = env.theta_od[b].conj().scale(&cr(-1, 2));
        n[b + 1][0] = env.theta_od[b].conj().scale(&half);
        for c in 0..3 {
            m[b + 1][c + 1] = env.kappa[b][c].clone();
            n[b + 1][c + 1] = bo[b][c].scale(&ci(-1, 2));
        }
    }
    let mut out = Vec::with_capacity(8);
    for j in 0..8 {
        let mut lhs = SymExpr::zero();
        for i in 0..8 {
            if !f[a][i].is_zero() {
                lhs = lhs + w(j + 1, i + 1).scale(&f[a][i]);
            }
        }
        let mut rhs = SymExpr::zero();
        for b in 0..4 {
            if !f[b][j].is_zero() {
                rhs = rhs + m[b][a].scale(&f[b][j]);
                rhs = rhs + n[b][a].scale(&f[b][j].conj());
            }
        }
        out.push(lhs - rhs);
    }
    out
}

/// Row a of d(eta_od, sigma_od) + M ∧ (eta_od, sigma_od) for the SO(6)
/// block system, with (phi, psi) the real and imaginary parts of `conn`.
fn s6_row(env: &FrameEnv, conn: &Mat3, a: usize) -> SymExpr {
    let phi = mat3(|x, y| conn[x][y].re());
    let psi = mat3(|x, y| conn[x][y].im());
    let eta_ev = [env.eta[2].clone(), env.eta[4].clone(), env.eta[6].clone()];
    let sig_ev = [env.sigma[2].clone(), env.sigma[4].clone(), env.sigma[6].clone()];
    let bs = bracket_map(&sig_ev);
    let be = bracket_map(&eta_ev);
    let half = cr(1, 2);
    let tl = mat3(|x, y| &phi[x][y] + &bs[x][y].scale(&half));
    let bl = mat3(|x, y| &psi[x][y] + &be[x][y].scale(&half));
    let tr = mat3(|x, y| -bl[y][x].clone());
    let br = mat3(|x, y| &phi[x][y] - &bs[x][y].scale(&half));
    let x: Vec<SymExpr> = [1, 3, 5]
        .iter()
        .map(|&k| env.eta[k].clone())
        .chain([1, 3, 5].iter().map(|&k| env.sigma[k].clone()))
        .collect();
    let row: Vec<SymExpr> = if a < 3 {
        tl[a].iter().chain(tr[a].iter()).cloned().collect()
    } else {
        bl[a - 3].iter().chain(br[a - 3].iter()).cloned().collect()
    };
    d(&x[a]) + (0..6).map(|b| row[b].wedge(&x[b])).sum()
}

fn suite_specs() -> Vec<Spec> {
    use Expectation::*;
    let mut v = Vec::new();
    v.push(spec(
        "dd_generators",
        "d(d omega_ij) = 0 for every free generator",
        Holds,
        |_| {
            (0..N_GENERATORS).map(|k| d(&d(&SymExpr::generator(k)))).collect()
        },
    ));
    v.push(spec(
        "kappa_skew_hermitian",
        "kappa + conj(kappa)^T = 0",
        Holds,
        |e| {
            (0..9).map(|k| &e.kappa[k / 3][k % 3] + &e.kappa[k % 3][k / 3].conj()).collect()
        },
    ));
    for (a, k) in [1usize, 3, 5].iter().enumerate() {
        v.push(spec(
            format!("theta_od_structure[{k}]"),
            "d theta_od + Psi ∧ theta_od = tau_od, Psi = kappa - tr kappa",
            Holds,
            move |e| vec![d(&e.theta_od[a]) + row_wedge(&e.psi_conn, a, &e.theta_od) - e.tau[*k].clone()],
        ));
    }
    for (a, k) in [2usize, 4, 6].iter().enumerate() {
        v.push(spec(
            format!("theta_ev_structure[{k}]"),
            "d theta_ev + Psi~ ∧ theta_ev = tau_ev, Psi~ = kappa + tr kappa",
            Holds,
            move |e| vec![d(&e.theta_ev[a]) + row_wedge(&e.psi_tilde, a, &e.theta_ev) - e.tau[*k].clone()],
        ));
    }
    v.push(spec(
        "curvature_E",
        "d(-tr kappa) = 1/4 (sum_odd - sum_even) theta_k ∧ conj(theta_k)",
        Holds,
        |e| {
            let rhs = (sum_tt(e, [1, 3, 5]) - sum_tt(e, [2, 4, 6])).scale(&cr(1, 4));
            vec![d(&-e.tr_kappa.clone()) - rhs]
        },
    ));
    v.push(spec(
        "curvature_E_as_displayed",
        "d(-tr kappa) = 1/4 (sum_even - sum_odd): displayed sign",
        Erratum,
        |e| {
            let rhs = (sum_tt(e, [2, 4, 6]) - sum_tt(e, [1, 3, 5])).scale(&cr(1, 4));
            vec![d(&-e.tr_kappa.clone()) - rhs]
        },
    ));
    for a in 0..3 {
        for b in 0..3 {
            v.push(spec(
                format!("curvature_H[{}{}]", a + 1, b + 1),
                "d kappa + kappa ∧ kappa = 1/4 Omega",
                Holds,
                move |e| {
                    let kk: SymExpr = (0..3).map(|c| e.kappa[a][c].wedge(&e.kappa[c][b])).sum();
                    vec![d(&e.kappa[a][b]) + kk - e.omega_curv[a][b].scale(&cr(1, 4))]
                },
            ));
        }
    }
    v.push(spec(
        "d_omega1_minus_omega2",
        "omega1 - omega2 is closed",
        Holds,
        |e| vec![d(&(&e.omega1 - &e.omega2))],
    ));
    for (name, pick) in [("d_omega1", 1usize), ("d_omega2", 2usize)] {
        v.push(spec(
            name,
            "d omega_k = -Re(theta2∧theta3∧theta5 + theta1∧theta4∧theta5 + theta1∧theta3∧theta6)",
            Holds,
            move |e| {
                let t = &e.theta;
                let x = t[2].wedge(&t[3]).wedge(&t[5]) + t[1].wedge(&t[4]).wedge(&t[5]) + t[1].wedge(&t[3]).wedge(&t[6]);
                let lhs = if pick == 1 { d(&e.omega1) } else { d(&e.omega2) };
                vec![lhs + x.re()]
            },
        ));
    }
    for a in 0..4 {
        v.push(spec(
            format!("frame_evolution[f{a}]"),
            "d(f0, f) = (f0, f) M + (conj f0, conj f) N reproduces de_i = e_j omega_ji",
            Holds,
            move |e| frame_evolution_residual(e, a),
        ));
    }
    for a in 0..6 {
        v.push(spec(
            format!("s6_structure[{}]", a + 1),
            "SO(6) block structure equations with varphi, psi = Re, Im of kappa - tr kappa",
            Holds,
            move |e| vec![s6_row(e, &e.psi_conn, a)],
        ));
    }
    v.push(spec(
        "s6_structure_as_displayed",
        "SO(6) block structure equations with varphi, psi = Re, Im of kappa (all six rows)",
        Erratum,
        |e| {
            (0..6).map(|a| s6_row(e, &e.kappa, a)).collect()
        },
    ));
    v
}

/// Names of all identities in the canned suite, in run order.
pub fn suite_names() -> Vec<String> {
    suite_specs().into_iter().map(|s| s.name).collect()
}

/// Runs the canned suite against a (possibly mutated) environment.
pub fn run_suite(env: &FrameEnv, only: Option<&str>) -> SuiteReport {
    let specs: Vec<Spec> = suite_specs()
        .into_iter()
        .filter(|s| only.is_none_or(|n| s.name == n))
        .collect();
    let entries = specs
        .par_iter()
        .map(|s| {
            let residuals = (s.build)(env);
            SuiteEntry {
                name: s.name.clone(),
                description: s.description.to_string(),
                expectation: s.expectation,
                check: check_components(&s.name, &residuals),
            }
        })
        .collect();
    SuiteReport { entries }
}

pub fn canned_suite() -> SuiteReport {
    run_suite(&define_frames(), None)
}

/// Shortcut for integer constants in expressions.
pub fn cint(n: i64) -> CQ {
    cq(q(n), Q::zero())
}
