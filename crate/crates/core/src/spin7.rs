//! The Cayley 4-form, the seven 4-forms psi_m, cross products read off
//! from them, the Lie algebra spin(7) inside so(8), and a comass estimator.

use std::sync::OnceLock;

use nalgebra::SMatrix;
use num_traits::Zero;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::FormError;
use crate::forms::{subsets, AlternatingForm, Blade, CompiledForm, MonomialRecord, SkewEndo, AMBIENT};
use crate::linalg::{nullspace, rank, solve_in_span, Mat8, Vec8};
use crate::scalar::{q, Mode, Scalar, Q};

/// Cayley form monomials as (sign, unsorted index word).
const PHI_WORDS: [(i64, &str); 14] = [
    (1, "5678"),
    (-1, "5128"),
    (-1, "5348"),
    (-1, "6138"),
    (-1, "6428"),
    (-1, "7148"),
    (-1, "7238"),
    (1, "1234"),
    (-1, "3467"),
    (-1, "1267"),
    (-1, "2457"),
    (1, "1357"),
    (-1, "2356"),
    (-1, "1456"),
];

/// psi_1..psi_7, every monomial with coefficient +1.
const PSI_WORDS: [&str; 7] = [
    "5134 5864 7123 6421 1675 7538 2786 4283",
    "3612 2354 4578 7214 5863 3418 5762 1876",
    "7314 4821 8476 6342 3756 1253 1578 8256",
    "1364 6574 4521 3812 2587 6518 7234 6783",
    "7352 2847 6814 8632 3817 1653 4571 4265",
    "5346 6521 5328 4387 1647 7128 2763 4158",
    "8463 8531 6274 6137 2485 3574 7521 1628",
];

/// The first psi_1 monomial as it appears in the published table. With it the
/// psi_m are not a Spin(7) representation; kept for the regression report.
const PSI1_PRINTED_FIRST: &str = "5137";

/// Relation order: omega_8k for k = 7, 6, 5, 1, 2, 3, 4.
pub const RELATION_ORDER: [usize; 7] = [7, 6, 5, 1, 2, 3, 4];

/// omega_8k = sum c * omega_ab, entries (c, a, b), in `RELATION_ORDER`.
pub const RELATIONS: [[(i64, usize, usize); 3]; 7] = [
    [(-1, 6, 5), (1, 4, 1), (1, 3, 2)],
    [(1, 7, 5), (1, 3, 1), (-1, 4, 2)],
    [(-1, 7, 6), (1, 4, 3), (1, 2, 1)],
    [(1, 7, 4), (1, 6, 3), (1, 5, 2)],
    [(1, 7, 3), (-1, 6, 4), (-1, 5, 1)],
    [(-1, 7, 2), (-1, 6, 1), (1, 5, 4)],
    [(-1, 7, 1), (1, 6, 2), (-1, 5, 3)],
];

fn word_indices(w: &str) -> Vec<usize> {
    w.bytes().map(|b| (b - b'0') as usize).collect()
}

fn form_from_words(words: impl IntoIterator<Item = (i64, String)>) -> AlternatingForm {
    AlternatingForm::from_terms(
        4,
        Mode::Exact,
        words
            .into_iter()
            .map(|(c, w)| (word_indices(&w), Scalar::int(c, Mode::Exact))),
    )
    .expect("table words are valid 4-tuples")
}

#[derive(Debug, Clone)]
pub struct CalibrationTables {
    pub phi: AlternatingForm,
    pub psi: Vec<AlternatingForm>,
}

impl CalibrationTables {
    /// Tables exactly as printed, including the inconsistent psi_1 monomial.
    pub fn as_printed() -> CalibrationTables {
        let mut t = build_tables();
        let mut words: Vec<(i64, String)> = PSI_WORDS[0]
            .split_whitespace()
            .map(|w| (1, w.to_string()))
            .collect();
        words[0].1 = PSI1_PRINTED_FIRST.to_string();
        t.psi[0] = form_from_words(words);
        t
    }

    pub fn named_forms(&self) -> Vec<(String, &AlternatingForm)> {
        let mut out = vec![("Phi".to_string(), &self.phi)];
        for (m, f) in self.psi.iter().enumerate() {
            out.push((format!("psi{}", m + 1), f));
        }
        out
    }

    /// {name: [{indices, coeff}, ..]} for external audit.
    pub fn to_json(&self) -> serde_json::Value {
        let mut forms = serde_json::Map::new();
        for (name, f) in self.named_forms() {
            let recs: Vec<MonomialRecord> = f
                .terms()
                .map(|(b, c)| MonomialRecord {
                    indices: b.indices(),
                    coeff: c.to_f64() as i64,
                })
                .collect();
            forms.insert(name, serde_json::to_value(recs).expect("serializable"));
        }
        serde_json::json!({ "schema": 1, "forms": forms })
    }

    pub fn compile(&self) -> FloatTables {
        FloatTables {
            phi: self.phi.compile(),
            psi: self.psi.iter().map(|f| f.compile()).collect(),
        }
    }
}

pub fn build_tables() -> CalibrationTables {
    let phi = form_from_words(PHI_WORDS.iter().map(|(c, w)| (*c, w.to_string())));
    let psi = PSI_WORDS
        .iter()
        .map(|line| form_from_words(line.split_whitespace().map(|w| (1, w.to_string()))))
        .collect();
    CalibrationTables { phi, psi }
}

/// Shared exact tables.
pub fn tables() -> &'static CalibrationTables {
    static T: OnceLock<CalibrationTables> = OnceLock::new();
    T.get_or_init(build_tables)
}

/// Shared float snapshot of the tables.
pub fn float_tables() -> &'static FloatTables {
    static T: OnceLock<FloatTables> = OnceLock::new();
    T.get_or_init(|| tables().compile())
}

/// x × y × z × w: component m (1..7) is psi_m, component 8 is Phi.
pub fn quad_cross(
    t: &CalibrationTables,
    x: &[Scalar],
    y: &[Scalar],
    z: &[Scalar],
    w: &[Scalar],
) -> Result<Vec<Scalar>, FormError> {
    let vs = vec![x.to_vec(), y.to_vec(), z.to_vec(), w.to_vec()];
    let mut out = Vec::with_capacity(AMBIENT);
    for p in &t.psi {
        out.push(p.evaluate(&vs)?);
    }
    out.push(t.phi.evaluate(&vs)?);
    Ok(out)
}

/// T(x, y, z) with <T(x,y,z), w> = Phi(x, y, z, w).
pub fn triple_cross_exact(
    t: &CalibrationTables,
    x: &[Scalar],
    y: &[Scalar],
    z: &[Scalar],
) -> Result<Vec<Scalar>, FormError> {
    let mode = t.phi.mode();
    (1..=AMBIENT)
        .map(|i| {
            let e = crate::forms::basis_vec(AMBIENT, i, mode);
            t.phi.evaluate(&[x.to_vec(), y.to_vec(), z.to_vec(), e])
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct FloatTables {
    pub phi: CompiledForm,
    pub psi: Vec<CompiledForm>,
}

impl FloatTables {
    pub fn quad_cross(&self, x: &Vec8, y: &Vec8, z: &Vec8, w: &Vec8) -> Vec8 {
        let vs: [&[f64]; 4] = [x.as_slice(), y.as_slice(), z.as_slice(), w.as_slice()];
        let mut out = Vec8::zeros();
        for (m, p) in self.psi.iter().enumerate() {
            out[m] = p.eval(&vs);
        }
        out[7] = self.phi.eval(&vs);
        out
    }

    /// psi_1..psi_7 on four vectors.
    pub fn psi_values(&self, vs: [&Vec8; 4]) -> [f64; 7] {
        let sl: [&[f64]; 4] = [vs[0].as_slice(), vs[1].as_slice(), vs[2].as_slice(), vs[3].as_slice()];
        let mut out = [0.0; 7];
        for (m, p) in self.psi.iter().enumerate() {
            out[m] = p.eval(&sl);
        }
        out
    }

    pub fn phi_value(&self, vs: [&Vec8; 4]) -> f64 {
        self.phi.eval(&[vs[0].as_slice(), vs[1].as_slice(), vs[2].as_slice(), vs[3].as_slice()])
    }

    pub fn triple_cross(&self, x: &Vec8, y: &Vec8, z: &Vec8) -> Vec8 {
        let mut out = Vec8::zeros();
        for (idx, c) in &self.phi.terms {
            for r in 0..4 {
                let rows: Vec<usize> = (0..4).filter(|&k| k != r).map(|k| idx[k]).collect();
                let m = [
                    [x[rows[0]], y[rows[0]], z[rows[0]]],
                    [x[rows[1]], y[rows[1]], z[rows[1]]],
                    [x[rows[2]], y[rows[2]], z[rows[2]]],
                ];
                let d = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
                    - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
                    + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
                // cofactor of the last column entry in row r
                let s = if (r + 3) % 2 == 0 { 1.0 } else { -1.0 };
                out[idx[r]] += c * s * d;
            }
        }
        out
    }

    /// max over 4-subsets I of |Phi(g e_I) - Phi(e_I)|.
    pub fn phi_pullback_defect(&self, g: &Mat8) -> f64 {
        let cols: Vec<Vec8> = (0..AMBIENT).map(|i| g.column(i).into_owned()).collect();
        let mut worst: f64 = 0.0;
        for sub in subsets(AMBIENT, 4) {
            let v: Vec<&[f64]> = sub.iter().map(|&i| cols[i - 1].as_slice()).collect();
            let got = self.phi.eval(&v);
            let want = self
                .phi
                .terms
                .iter()
                .find(|(idx, _)| idx.iter().zip(&sub).all(|(a, b)| *a + 1 == *b))
                .map(|(_, c)| *c)
                .unwrap_or(0.0);
            worst = worst.max((got - want).abs());
        }
        worst
    }
}

/// spin(7) and its trace-orthogonal complement m in so(8).
#[derive(Debug, Clone)]
pub struct Spin7Basis {
    /// Basis element k has omega_ij = 1 for the k-th free pair and the omega_8l
    /// fixed by the relations.
    pub spin7: Vec<SkewEndo>,
    /// The relation rows as skew matrices, in `RELATION_ORDER`.
    pub complement: Vec<SkewEndo>,
    /// Free pairs (i, j), 1 <= i < j <= 7.
    pub free_pairs: Vec<(usize, usize)>,
    /// Dimension of the relation solution space computed by elimination.
    pub nullity: usize,
    /// Rank of the relation matrix.
    pub relation_rank: usize,
}

fn unknown_pairs() -> Vec<(usize, usize)> {
    // omega_8k first so elimination pivots on them
    let mut v: Vec<(usize, usize)> = RELATION_ORDER.iter().map(|&k| (8, k)).collect();
    for i in 1..=7 {
        for j in i + 1..=7 {
            v.push((i, j));
        }
    }
    v
}

fn relation_matrix() -> Vec<Vec<Q>> {
    let unknowns = unknown_pairs();
    let col = |p: (usize, usize)| unknowns.iter().position(|&u| u == p).expect("known pair");
    RELATION_ORDER
        .iter()
        .zip(RELATIONS.iter())
        .map(|(&k, terms)| {
            let mut row = vec![Q::zero(); unknowns.len()];
            row[col((8, k))] += q(1);
            for &(c, a, b) in terms {
                if a < b {
                    row[col((a, b))] -= q(c);
                } else {
                    row[col((b, a))] += q(c);
                }
            }
            row
        })
        .collect()
}

fn skew_from_coords(coords: &[Q]) -> SkewEndo {
    let mut a = SkewEndo::zero(Mode::Exact);
    for (&(i, j), c) in unknown_pairs().iter().zip(coords) {
        if !c.is_zero() {
            a.set(i, j, Scalar::Exact(c.clone()));
        }
    }
    a
}

pub fn spin7_basis() -> Spin7Basis {
    let rel = relation_matrix();
    let ns = nullspace(&rel);
    let spin7: Vec<SkewEndo> = ns.iter().map(|v| skew_from_coords(v)).collect();
    let complement = rel.iter().map(|r| skew_from_coords(r)).collect();
    let free_pairs = unknown_pairs()[7..].to_vec();
    Spin7Basis {
        nullity: ns.len(),
        relation_rank: rank(&rel),
        spin7,
        complement,
        free_pairs,
    }
}

/// Shared basis.
pub fn basis() -> &'static Spin7Basis {
    static B: OnceLock<Spin7Basis> = OnceLock::new();
    B.get_or_init(spin7_basis)
}

impl Spin7Basis {
    /// Coordinates of an element of spin(7) in the basis: its free entries.
    pub fn coordinates(&self, a: &SkewEndo) -> Vec<Scalar> {
        self.free_pairs.iter().map(|&(i, j)| a.entry(i, j).clone()).collect()
    }

    /// Residual of re-expanding `a` in the basis (exact zero iff a ∈ spin(7)).
    pub fn expansion_residual(&self, a: &SkewEndo) -> Result<SkewEndo, FormError> {
        let coords = self.coordinates(a);
        let mut acc = SkewEndo::zero(a.mode());
        for (c, b) in coords.iter().zip(&self.spin7) {
            let b = if a.mode() == Mode::Float { b.to_float() } else { b.clone() };
            acc = acc.add(&b.scale(c)?)?;
        }
        acc.add(&a.scale(&Scalar::int(-1, a.mode()))?)
    }

    /// Relation defects omega_8k - sum c omega_ab, in `RELATION_ORDER`.
    pub fn relation_defects(&self, a: &SkewEndo) -> Result<Vec<Scalar>, FormError> {
        self.complement.iter().map(|n| {
            let n = if a.mode() == Mode::Float { n.to_float() } else { n.clone() };
            n.pairing(a)
        }).collect()
    }

    pub fn spin7_matrices(&self) -> Vec<Mat8> {
        self.spin7.iter().map(|a| a.to_matrix()).collect()
    }

    pub fn complement_matrices(&self) -> Vec<Mat8> {
        self.complement.iter().map(|a| a.to_matrix()).collect()
    }

    /// Float element sum_k c_k A_k.
    pub fn combine(&self, c: &[f64]) -> Mat8 {
        let mats = float_basis();
        c.iter().zip(mats.iter()).fold(Mat8::zeros(), |acc, (x, m)| acc + m * *x)
    }

    /// Orthogonal projection of a float skew matrix onto spin(7).
    pub fn project_spin7(&self, a: &Mat8) -> Mat8 {
        let mut p = *a;
        for n in self.complement_matrices() {
            let nn = pair_f(&n, &n);
            p -= n * (pair_f(a, &n) / nn);
        }
        p
    }
}

fn float_basis() -> &'static Vec<Mat8> {
    static F: OnceLock<Vec<Mat8>> = OnceLock::new();
    F.get_or_init(|| basis().spin7_matrices())
}

/// sum_{i<j} A_ij B_ij for float matrices.
pub fn pair_f(a: &Mat8, b: &Mat8) -> f64 {
    0.5 * a.component_mul(b).sum()
}

#[derive(Debug, Clone, Serialize)]
pub struct InvarianceReport {
    pub phi_annihilated: usize,
    /// rep[k][n][m]: coefficient of psi_n in A_k . psi_m.
    #[serde(skip)]
    pub rep_matrices: Vec<Vec<Vec<Q>>>,
    pub all_skew: bool,
    /// For each complement element, whether it moves Phi.
    pub complement_moves_phi: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub element: usize,
    pub form: String,
    pub residual_terms: usize,
}

fn blade_coords(f: &AlternatingForm, blades: &[Blade]) -> Vec<Q> {
    let mut v = vec![Q::zero(); blades.len()];
    for (b, c) in f.terms() {
        let k = blades.iter().position(|x| *x == b).expect("4-blade");
        v[k] = c.as_exact().expect("exact form").clone();
    }
    v
}

/// Checks A . Phi = 0 and A . psi_m ∈ span(psi) for every basis element.
pub fn invariance_report(t: &CalibrationTables, b: &Spin7Basis) -> Result<InvarianceReport, Violation> {
    let blades: Vec<Blade> = subsets(AMBIENT, 4)
        .iter()
        .map(|s| Blade::from_indices(s).expect("subset").0)
        .collect();
    let psi_cols: Vec<Vec<Q>> = t.psi.iter().map(|p| blade_coords(p, &blades)).collect();

    let per_element: Vec<Result<Vec<Vec<Q>>, Violation>> = b
        .spin7
        .par_iter()
        .enumerate()
        .map(|(k, a)| {
            let act = t.phi.lie_action(a).expect("exact");
            if !act.is_zero() {
                return Err(Violation {
                    element: k,
                    form: "Phi".into(),
                    residual_terms: act.len(),
                });
            }
            let mut rep = vec![vec![Q::zero(); 7]; 7];
            for (m, p) in t.psi.iter().enumerate() {
                let act = p.lie_action(a).expect("exact");
                let rhs = blade_coords(&act, &blades);
                match solve_in_span(&psi_cols, &rhs) {
                    Some(x) => {
                        for n in 0..7 {
                            rep[n][m] = x[n].clone();
                        }
                    }
                    None => {
                        return Err(Violation {
                            element: k,
                            form: format!("psi{}", m + 1),
                            residual_terms: act.len(),
                        })
                    }
                }
            }
            Ok(rep)
        })
        .collect();
    let mut reps = Vec::with_capacity(per_element.len());
    for r in per_element {
        reps.push(r?);
    }
    let all_skew = reps
        .iter()
        .all(|r| (0..7).all(|i| (0..7).all(|j| r[i][j] == -r[j][i].clone())));
    let complement_moves_phi = b
        .complement
        .iter()
        .map(|n| !t.phi.lie_action(n).expect("exact").is_zero())
        .collect();
    Ok(InvarianceReport {
        phi_annihilated: reps.len(),
        rep_matrices: reps,
        all_skew,
        complement_moves_phi,
    })
}

/// exp(tA) via the matrix exponential.
pub fn exp_group(a: &Mat8, t: f64) -> Mat8 {
    (a * t).exp()
}

/// Matrix of Ad_g on the complement m in the relation-row basis:
/// g N_k g^T = sum_l R[l][k] N_l for g ∈ Spin(7).
pub fn complement_representation(g: &Mat8) -> SMatrix<f64, 7, 7> {
    let ns = basis().complement_matrices();
    let mut r = SMatrix::<f64, 7, 7>::zeros();
    for (k, nk) in ns.iter().enumerate() {
        let moved = g * nk * g.transpose();
        for (l, nl) in ns.iter().enumerate() {
            r[(l, k)] = pair_f(&moved, nl) / pair_f(nl, nl);
        }
    }
    r
}

#[derive(Debug, Clone, Serialize)]
pub struct ComassResult {
    pub value: f64,
    pub frame: [[f64; AMBIENT]; 4],
    pub best_start: usize,
    pub n_starts: usize,
    pub n_steps: usize,
}

fn orthonormalize4(v: &mut [[f64; AMBIENT]; 4]) -> bool {
    for j in 0..4 {
        for _ in 0..2 {
            for k in 0..j {
                let d: f64 = (0..AMBIENT).map(|i| v[j][i] * v[k][i]).sum();
                for i in 0..AMBIENT {
                    v[j][i] -= d * v[k][i];
                }
            }
        }
        let n: f64 = v[j].iter().map(|x| x * x).sum::<f64>().sqrt();
        if n < 1e-12 {
            return false;
        }
        for x in v[j].iter_mut() {
            *x /= n;
        }
    }
    true
}

fn retract(v: &[[f64; AMBIENT]; 4], xi: &[[f64; AMBIENT]; 4], eta: f64) -> Option<[[f64; AMBIENT]; 4]> {
    let mut cand = *v;
    for j in 0..4 {
        for i in 0..AMBIENT {
            cand[j][i] += eta * xi[j][i];
        }
    }
    orthonormalize4(&mut cand).then_some(cand)
}

fn ascend(f: &CompiledForm, mut v: [[f64; AMBIENT]; 4], n_steps: usize) -> (f64, [[f64; AMBIENT]; 4]) {
    let (mut val, mut grad) = f.value_and_grad4(&v);
    let mut eta = 0.5;
    for _ in 0..n_steps {
        // Riemannian gradient on the Stiefel manifold: G - V sym(V^T G)
        let mut xi = grad;
        for j in 0..4 {
            for k in 0..4 {
                let vg: f64 = (0..AMBIENT).map(|i| v[j][i] * grad[k][i]).sum();
                let gv: f64 = (0..AMBIENT).map(|i| grad[j][i] * v[k][i]).sum();
                let s = 0.5 * (vg + gv);
                for i in 0..AMBIENT {
                    xi[j][i] -= v[k][i] * s;
                }
            }
        }
        let gnorm: f64 = xi.iter().flatten().map(|x| x * x).sum::<f64>().sqrt();
        if gnorm < 1e-15 {
            break;
        }
        // try eta/2, eta, 2 eta and keep the best improving step; halve when none improves
        loop {
            let mut best: Option<(f64, f64, [[f64; AMBIENT]; 4])> = None;
            for step in [0.5 * eta, eta, 2.0 * eta] {
                if let Some(c) = retract(&v, &xi, step) {
                    let cv = f.eval_frame(&c);
                    if cv > val && best.as_ref().is_none_or(|b| cv > b.0) {
                        best = Some((cv, step, c));
                    }
                }
            }
            if let Some((cv, step, c)) = best {
                v = c;
                val = cv;
                eta = step;
                grad = f.value_and_grad4(&v).1;
                break;
            }
            eta *= 0.25;
            if eta < 1e-14 {
                return (val, v);
            }
        }
    }
    (val, v)
}

/// Multi-start projected-gradient maximization of a 4-form over orthonormal
/// 4-frames. Start k draws from its own ChaCha stream, so the result does not
/// depend on the number of worker threads.
pub fn comass_estimate(f: &AlternatingForm, n_starts: usize, n_steps: usize, seed: u64) -> ComassResult {
    assert_eq!(f.degree(), 4, "comass_estimate needs a 4-form");
    let cf = f.compile();
    let runs: Vec<(f64, [[f64; AMBIENT]; 4])> = (0..n_starts)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            let mut v = [[0.0; AMBIENT]; 4];
            loop {
                for row in v.iter_mut() {
                    for x in row.iter_mut() {
                        *x = StandardNormal.sample(&mut rng);
                    }
                }
                if orthonormalize4(&mut v) {
                    break;
                }
            }
            ascend(&cf, v, n_steps)
        })
        .collect();
    let (best_start, (value, frame)) = runs
        .iter()
        .enumerate()
        .fold((0usize, (f64::NEG_INFINITY, [[0.0; AMBIENT]; 4])), |acc, (k, r)| {
            if r.0 > acc.1 .0 {
                (k, *r)
            } else {
                acc
            }
        });
    ComassResult {
        value,
        frame,
        best_start,
        n_starts,
        n_steps,
    }
}
