//! Sparse alternating forms on R^n (n <= 8) and skew endomorphisms of R^8.
//!
//! A form is a map from strictly increasing index tuples to scalars. Index
//! tuples are stored as bitmasks, indices are 1-based to match the usual
//! coordinate names x^1..x^8.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::FormError;
use crate::linalg::Mat8;
use crate::scalar::{Mode, Q, Scalar};

pub const AMBIENT: usize = 8;

/// A strictly increasing index tuple, stored as a bitmask (bit i-1 for index i).
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Blade(u8);

impl Blade {
    pub fn empty() -> Blade {
        Blade(0)
    }

    pub fn mask(self) -> u8 {
        self.0
    }

    pub fn from_mask(mask: u8) -> Blade {
        Blade(mask)
    }

    /// Sorts `indices` and returns the blade with the sign of the sorting
    /// permutation, or `None` on a repeated or out-of-range index.
    pub fn from_indices(indices: &[usize]) -> Option<(Blade, i64)> {
        let mut mask = 0u8;
        for &i in indices {
            if !(1..=AMBIENT).contains(&i) {
                return None;
            }
            let bit = 1u8 << (i - 1);
            if mask & bit != 0 {
                return None;
            }
            mask |= bit;
        }
        Some((Blade(mask), perm_sign(indices)))
    }

    pub fn indices(self) -> Vec<usize> {
        (1..=AMBIENT).filter(|i| self.0 & (1 << (i - 1)) != 0).collect()
    }

    pub fn degree(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn contains(self, i: usize) -> bool {
        self.0 & (1 << (i - 1)) != 0
    }

    /// Sign of a ∧ b relative to the sorted union; 0 if the blades overlap.
    pub fn wedge_sign(a: Blade, b: Blade) -> i64 {
        if a.0 & b.0 != 0 {
            return 0;
        }
        let mut inversions = 0u32;
        for j in b.indices() {
            // indices of a greater than j must move past it
            inversions += ((a.0 as u32) >> j).count_ones();
        }
        if inversions % 2 == 0 {
            1
        } else {
            -1
        }
    }
}

impl Ord for Blade {
    fn cmp(&self, other: &Self) -> Ordering {
        self.indices().cmp(&other.indices())
    }
}

impl PartialOrd for Blade {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Blade {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "dx^")?;
        for i in self.indices() {
            write!(f, "{i}")?;
        }
        Ok(())
    }
}

/// Sign of the permutation that sorts `seq` (entries assumed distinct).
pub fn perm_sign(seq: &[usize]) -> i64 {
    let mut s = 1;
    for i in 0..seq.len() {
        for j in i + 1..seq.len() {
            if seq[i] > seq[j] {
                s = -s;
            }
        }
    }
    s
}

#[derive(Clone, PartialEq)]
pub struct AlternatingForm {
    dim: usize,
    degree: usize,
    mode: Mode,
    terms: BTreeMap<Blade, Scalar>,
}

impl AlternatingForm {
    pub fn zero(dim: usize, degree: usize, mode: Mode) -> AlternatingForm {
        assert!(dim <= AMBIENT && degree <= dim, "form on R^{dim} of degree {degree}");
        AlternatingForm {
            dim,
            degree,
            mode,
            terms: BTreeMap::new(),
        }
    }

    /// Form on R^8 from (index tuple, coefficient) pairs. Tuples may be
    /// unsorted; the permutation sign is applied. Repeated indices contribute 0.
    pub fn from_terms<I>(degree: usize, mode: Mode, terms: I) -> Result<AlternatingForm, FormError>
    where
        I: IntoIterator<Item = (Vec<usize>, Scalar)>,
    {
        Self::from_terms_in(AMBIENT, degree, mode, terms)
    }

    pub fn from_terms_in<I>(
        dim: usize,
        degree: usize,
        mode: Mode,
        terms: I,
    ) -> Result<AlternatingForm, FormError>
    where
        I: IntoIterator<Item = (Vec<usize>, Scalar)>,
    {
        let mut f = AlternatingForm::zero(dim, degree, mode);
        for (idx, c) in terms {
            if idx.len() != degree {
                return Err(FormError::Arity {
                    expected: degree,
                    got: idx.len(),
                });
            }
            if idx.iter().any(|&i| i == 0 || i > dim) {
                return Err(FormError::Dimension(format!("index tuple {idx:?} outside 1..={dim}")));
            }
            if c.mode() != mode {
                return Err(FormError::ModeMismatch);
            }
            if let Some((b, s)) = Blade::from_indices(&idx) {
                f.accumulate(b, c.scale_int(s))?;
            }
        }
        Ok(f)
    }

    /// dx^{i1..ik} with the given coefficient (indices may be unsorted).
    pub fn monomial(indices: &[usize], coeff: Scalar) -> Result<AlternatingForm, FormError> {
        let mode = coeff.mode();
        Self::from_terms(indices.len(), mode, [(indices.to_vec(), coeff)])
    }

    /// Exact 0-form with value c, for building constants.
    pub fn constant(c: Scalar) -> AlternatingForm {
        let mode = c.mode();
        let mut f = AlternatingForm::zero(AMBIENT, 0, mode);
        if !c.is_zero() {
            f.terms.insert(Blade::empty(), c);
        }
        f
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (Blade, &Scalar)> {
        self.terms.iter().map(|(b, c)| (*b, c))
    }

    /// Coefficient of dx^{indices}; unsorted tuples pick up the permutation sign.
    pub fn coeff(&self, indices: &[usize]) -> Scalar {
        match Blade::from_indices(indices) {
            Some((b, s)) => match self.terms.get(&b) {
                Some(c) => c.scale_int(s),
                None => Scalar::zero(self.mode),
            },
            None => Scalar::zero(self.mode),
        }
    }

    fn accumulate(&mut self, b: Blade, c: Scalar) -> Result<(), FormError> {
        if c.is_zero() {
            return Ok(());
        }
        let new = match self.terms.get(&b) {
            Some(old) => old.add(&c)?,
            None => c,
        };
        if new.is_zero() {
            self.terms.remove(&b);
        } else {
            self.terms.insert(b, new);
        }
        Ok(())
    }

    fn check_compatible(&self, other: &AlternatingForm) -> Result<(), FormError> {
        if self.mode != other.mode {
            return Err(FormError::ModeMismatch);
        }
        if self.dim != other.dim {
            return Err(FormError::Dimension(format!(
                "forms on R^{} and R^{}",
                self.dim, other.dim
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &AlternatingForm) -> Result<AlternatingForm, FormError> {
        self.check_compatible(other)?;
        if self.degree != other.degree {
            if other.is_zero() {
                return Ok(self.clone());
            }
            if self.is_zero() {
                return Ok(other.clone());
            }
            return Err(FormError::Dimension(format!(
                "cannot add forms of degree {} and {}",
                self.degree, other.degree
            )));
        }
        let mut out = self.clone();
        for (b, c) in other.terms.iter() {
            out.accumulate(*b, c.clone())?;
        }
        Ok(out)
    }

    pub fn sub(&self, other: &AlternatingForm) -> Result<AlternatingForm, FormError> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> AlternatingForm {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c = c.neg();
        }
        out
    }

    pub fn scale(&self, s: &Scalar) -> Result<AlternatingForm, FormError> {
        if s.mode() != self.mode {
            return Err(FormError::ModeMismatch);
        }
        let mut out = AlternatingForm::zero(self.dim, self.degree, self.mode);
        for (b, c) in self.terms.iter() {
            out.accumulate(*b, c.mul(s)?)?;
        }
        Ok(out)
    }

    pub fn wedge(&self, other: &AlternatingForm) -> Result<AlternatingForm, FormError> {
        self.check_compatible(other)?;
        if self.degree + other.degree > self.dim {
            return Err(FormError::DegreeOverflow(self.degree, other.degree, self.dim));
        }
        let mut out = AlternatingForm::zero(self.dim, self.degree + other.degree, self.mode);
        for (a, ca) in self.terms.iter() {
            for (b, cb) in other.terms.iter() {
                let s = Blade::wedge_sign(*a, *b);
                if s == 0 {
                    continue;
                }
                out.accumulate(Blade(a.0 | b.0), ca.mul(cb)?.scale_int(s))?;
            }
        }
        Ok(out)
    }

    /// f(v_1, .., v_k): sum over stored tuples of coefficient times the minor.
    pub fn evaluate(&self, vectors: &[Vec<Scalar>]) -> Result<Scalar, FormError> {
        if vectors.len() != self.degree {
            return Err(FormError::Arity {
                expected: self.degree,
                got: vectors.len(),
            });
        }
        for v in vectors {
            if v.len() != self.dim {
                return Err(FormError::Dimension(format!(
                    "vector of length {} for a form on R^{}",
                    v.len(),
                    self.dim
                )));
            }
            if v.iter().any(|x| x.mode() != self.mode) {
                return Err(FormError::ModeMismatch);
            }
        }
        let mut total = Scalar::zero(self.mode);
        for (b, c) in self.terms.iter() {
            let idx = b.indices();
            let minor: Vec<Vec<Scalar>> = idx
                .iter()
                .map(|&i| vectors.iter().map(|v| v[i - 1].clone()).collect())
                .collect();
            total = total.add(&c.mul(&det(minor)?)?)?;
        }
        Ok(total)
    }

    /// Pullback along the linear map R^m -> R^dim whose columns are `cols`.
    pub fn pullback(&self, cols: &[Vec<Scalar>]) -> Result<AlternatingForm, FormError> {
        let m = cols.len();
        if m > AMBIENT || self.degree > m {
            return Err(FormError::Dimension(format!(
                "pullback of a {}-form to R^{m}",
                self.degree
            )));
        }
        let mut out = AlternatingForm::zero(m, self.degree, self.mode);
        for sub in subsets(m, self.degree) {
            let vs: Vec<Vec<Scalar>> = sub.iter().map(|&i| cols[i - 1].clone()).collect();
            let val = self.evaluate(&vs)?;
            let (b, _) = Blade::from_indices(&sub).expect("sorted subset");
            out.accumulate(b, val)?;
        }
        Ok(out)
    }

    /// Interior product: (i_v f)(v_2, ..) = f(v, v_2, ..).
    pub fn interior(&self, v: &[Scalar]) -> Result<AlternatingForm, FormError> {
        if self.degree == 0 {
            return Err(FormError::Arity { expected: 0, got: 1 });
        }
        if v.len() != self.dim {
            return Err(FormError::Dimension(format!("vector of length {}", v.len())));
        }
        let mut out = AlternatingForm::zero(self.dim, self.degree - 1, self.mode);
        for (b, c) in self.terms.iter() {
            for (p, &i) in b.indices().iter().enumerate() {
                if v[i - 1].mode() != self.mode {
                    return Err(FormError::ModeMismatch);
                }
                let sign = if p % 2 == 0 { 1 } else { -1 };
                let rest = Blade(b.0 & !(1 << (i - 1)));
                out.accumulate(rest, c.mul(&v[i - 1])?.scale_int(sign))?;
            }
        }
        Ok(out)
    }

    /// Infinitesimal action (A.f)(v_1..v_k) = -sum_i f(v_1, .., A v_i, .., v_k).
    pub fn lie_action(&self, a: &SkewEndo) -> Result<AlternatingForm, FormError> {
        if a.mode() != self.mode {
            return Err(FormError::ModeMismatch);
        }
        if self.dim != AMBIENT {
            return Err(FormError::Dimension("lie_action needs a form on R^8".into()));
        }
        let mut out = AlternatingForm::zero(self.dim, self.degree, self.mode);
        for (b, c) in self.terms.iter() {
            let idx = b.indices();
            for p in 0..idx.len() {
                let i = idx[p];
                for l in 1..=AMBIENT {
                    let ail = a.entry(i, l);
                    if ail.is_zero() || (l != i && b.contains(l)) {
                        continue;
                    }
                    let mut new_idx = idx.clone();
                    new_idx[p] = l;
                    let Some((nb, s)) = Blade::from_indices(&new_idx) else {
                        continue;
                    };
                    // A.dx^i = -sum_l A_il dx^l
                    out.accumulate(nb, c.mul(ail)?.scale_int(-s))?;
                }
            }
        }
        Ok(out)
    }

    /// Explicit conversion of every coefficient to f64.
    pub fn to_float(&self) -> AlternatingForm {
        let mut out = AlternatingForm::zero(self.dim, self.degree, Mode::Float);
        for (b, c) in self.terms.iter() {
            out.terms.insert(*b, c.to_float());
        }
        out
    }

    /// Largest coefficient magnitude.
    pub fn sup_norm(&self) -> f64 {
        self.terms.values().map(|c| c.abs_f64()).fold(0.0, f64::max)
    }

    /// sup-norm of the coefficient difference, computed in f64 regardless of mode.
    pub fn max_abs_diff(&self, other: &AlternatingForm) -> f64 {
        let mut keys: Vec<Blade> = self.terms.keys().copied().collect();
        keys.extend(other.terms.keys().copied());
        keys.iter()
            .map(|b| {
                let x = self.terms.get(b).map(|c| c.to_f64()).unwrap_or(0.0);
                let y = other.terms.get(b).map(|c| c.to_f64()).unwrap_or(0.0);
                (x - y).abs()
            })
            .fold(0.0, f64::max)
    }

    /// Float snapshot for fast sampling.
    pub fn compile(&self) -> CompiledForm {
        CompiledForm {
            dim: self.dim,
            degree: self.degree,
            terms: self
                .terms
                .iter()
                .map(|(b, c)| (b.indices().iter().map(|i| i - 1).collect(), c.to_f64()))
                .collect(),
        }
    }
}

impl fmt::Debug for AlternatingForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self.terms.iter().map(|(b, c)| format!("{c}*{b:?}")).collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// All strictly increasing k-subsets of {1..m}.
pub fn subsets(m: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, m: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..=m {
            cur.push(i);
            rec(i + 1, m, k, cur, out);
            cur.pop();
        }
    }
    rec(1, m, k, &mut cur, &mut out);
    out
}

/// Determinant by Gaussian elimination over the scalar's own arithmetic.
pub fn det(mut m: Vec<Vec<Scalar>>) -> Result<Scalar, FormError> {
    let n = m.len();
    if n == 0 {
        return Ok(Scalar::one(Mode::Exact));
    }
    let mode = m[0][0].mode();
    let mut result = Scalar::one(mode);
    for col in 0..n {
        let pivot = match mode {
            Mode::Exact => (col..n).find(|&r| !m[r][col].is_zero()),
            Mode::Float => (col..n)
                .max_by(|&a, &b| m[a][col].abs_f64().total_cmp(&m[b][col].abs_f64()))
                .filter(|&r| !m[r][col].is_zero()),
        };
        let Some(p) = pivot else {
            return Ok(Scalar::zero(mode));
        };
        if p != col {
            m.swap(p, col);
            result = result.neg();
        }
        let pv = m[col][col].clone();
        result = result.mul(&pv)?;
        for r in col + 1..n {
            if m[r][col].is_zero() {
                continue;
            }
            let factor = m[r][col].div(&pv)?;
            for c in col..n {
                let t = factor.mul(&m[col][c])?;
                m[r][c] = m[r][c].sub(&t)?;
            }
        }
    }
    Ok(result)
}

/// Float-only snapshot of a form: index tuples are 0-based.
#[derive(Debug, Clone)]
pub struct CompiledForm {
    pub dim: usize,
    pub degree: usize,
    pub terms: Vec<(Vec<usize>, f64)>,
}

impl CompiledForm {
    pub fn eval(&self, vs: &[&[f64]]) -> f64 {
        debug_assert_eq!(vs.len(), self.degree);
        let mut total = 0.0;
        let mut m = [[0.0; AMBIENT]; AMBIENT];
        for (idx, c) in &self.terms {
            let k = idx.len();
            for (r, &i) in idx.iter().enumerate() {
                for (col, v) in vs.iter().enumerate() {
                    m[r][col] = v[i];
                }
            }
            total += c * det_f64(&mut m, k);
        }
        total
    }

    /// Value and gradient of a 4-form on a 4-frame: grad[j][w] = d f / d v_j[w].
    pub fn eval_frame(&self, vs: &[[f64; AMBIENT]; 4]) -> f64 {
        self.eval(&[&vs[0][..], &vs[1][..], &vs[2][..], &vs[3][..]])
    }

    pub fn value_and_grad4(&self, vs: &[[f64; AMBIENT]; 4]) -> (f64, [[f64; AMBIENT]; 4]) {
        assert_eq!(self.degree, 4);
        let mut grad = [[0.0; AMBIENT]; 4];
        let mut val = 0.0;
        for (idx, c) in &self.terms {
            let mut m = [[0.0; 4]; 4];
            for r in 0..4 {
                for j in 0..4 {
                    m[r][j] = vs[j][idx[r]];
                }
            }
            let cof = cofactors4(&m);
            let d: f64 = (0..4).map(|j| m[0][j] * cof[0][j]).sum();
            val += c * d;
            for r in 0..4 {
                for j in 0..4 {
                    grad[j][idx[r]] += c * cof[r][j];
                }
            }
        }
        (val, grad)
    }
}

fn det3(m: [[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

fn cofactors4(m: &[[f64; 4]; 4]) -> [[f64; 4]; 4] {
    let mut c = [[0.0; 4]; 4];
    for r in 0..4 {
        for j in 0..4 {
            let mut sub = [[0.0; 3]; 3];
            let mut rr = 0;
            for a in 0..4 {
                if a == r {
                    continue;
                }
                let mut cc = 0;
                for b in 0..4 {
                    if b == j {
                        continue;
                    }
                    sub[rr][cc] = m[a][b];
                    cc += 1;
                }
                rr += 1;
            }
            let s = if (r + j) % 2 == 0 { 1.0 } else { -1.0 };
            c[r][j] = s * det3(sub);
        }
    }
    c
}

/// In-place partial-pivot determinant of the leading k x k block.
pub fn det_f64(m: &mut [[f64; AMBIENT]; AMBIENT], k: usize) -> f64 {
    let mut d = 1.0;
    for col in 0..k {
        let mut p = col;
        for r in col + 1..k {
            if m[r][col].abs() > m[p][col].abs() {
                p = r;
            }
        }
        if m[p][col] == 0.0 {
            return 0.0;
        }
        if p != col {
            m.swap(p, col);
            d = -d;
        }
        let pv = m[col][col];
        d *= pv;
        for r in col + 1..k {
            let f = m[r][col] / pv;
            if f != 0.0 {
                for c in col..k {
                    m[r][c] -= f * m[col][c];
                }
            }
        }
    }
    d
}

/// An 8x8 skew-symmetric matrix, exact or float.
#[derive(Clone, PartialEq)]
pub struct SkewEndo {
    mode: Mode,
    data: Vec<Scalar>,
}

impl SkewEndo {
    pub fn zero(mode: Mode) -> SkewEndo {
        SkewEndo {
            mode,
            data: vec![Scalar::zero(mode); AMBIENT * AMBIENT],
        }
    }

    /// e_i ∧ e_j as the endomorphism x -> e_i <e_j, x> - e_j <e_i, x> (1-based).
    pub fn elementary(i: usize, j: usize, mode: Mode) -> SkewEndo {
        let mut a = SkewEndo::zero(mode);
        if i != j {
            a.set(i, j, Scalar::one(mode));
        }
        a
    }

    pub fn from_exact(rows: &[[Q; AMBIENT]; AMBIENT]) -> Result<SkewEndo, FormError> {
        let mut a = SkewEndo::zero(Mode::Exact);
        for i in 0..AMBIENT {
            for j in 0..AMBIENT {
                if rows[i][j] != -rows[j][i].clone() {
                    return Err(FormError::NotSkew(f64::INFINITY));
                }
                a.data[i * AMBIENT + j] = Scalar::Exact(rows[i][j].clone());
            }
        }
        Ok(a)
    }

    pub fn from_matrix(m: &Mat8) -> Result<SkewEndo, FormError> {
        let defect = (m + m.transpose()).amax();
        if defect > 1e-14 * m.amax().max(1.0) {
            return Err(FormError::NotSkew(defect));
        }
        let mut a = SkewEndo::zero(Mode::Float);
        for i in 0..AMBIENT {
            for j in 0..AMBIENT {
                a.data[i * AMBIENT + j] = Scalar::Float(m[(i, j)]);
            }
        }
        Ok(a)
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    /// Entry A_ij, 1-based.
    pub fn entry(&self, i: usize, j: usize) -> &Scalar {
        &self.data[(i - 1) * AMBIENT + (j - 1)]
    }

    /// Sets A_ij = c and A_ji = -c (1-based).
    pub fn set(&mut self, i: usize, j: usize, c: Scalar) {
        assert_ne!(i, j);
        self.data[(j - 1) * AMBIENT + (i - 1)] = c.neg();
        self.data[(i - 1) * AMBIENT + (j - 1)] = c;
    }

    pub fn to_matrix(&self) -> Mat8 {
        Mat8::from_fn(|i, j| self.data[i * AMBIENT + j].to_f64())
    }

    pub fn to_float(&self) -> SkewEndo {
        SkewEndo {
            mode: Mode::Float,
            data: self.data.iter().map(|c| c.to_float()).collect(),
        }
    }

    pub fn add(&self, o: &SkewEndo) -> Result<SkewEndo, FormError> {
        let data = self
            .data
            .iter()
            .zip(&o.data)
            .map(|(a, b)| a.add(b))
            .collect::<Result<_, _>>()?;
        Ok(SkewEndo { mode: self.mode, data })
    }

    pub fn scale(&self, s: &Scalar) -> Result<SkewEndo, FormError> {
        let data = self.data.iter().map(|a| a.mul(s)).collect::<Result<_, _>>()?;
        Ok(SkewEndo { mode: self.mode, data })
    }

    pub fn matmul(&self, o: &SkewEndo) -> Result<Vec<Scalar>, FormError> {
        if self.mode != o.mode {
            return Err(FormError::ModeMismatch);
        }
        let mut out = Vec::with_capacity(AMBIENT * AMBIENT);
        for i in 0..AMBIENT {
            for j in 0..AMBIENT {
                let mut acc = Scalar::zero(self.mode);
                for k in 0..AMBIENT {
                    let a = &self.data[i * AMBIENT + k];
                    let b = &o.data[k * AMBIENT + j];
                    if !a.is_zero() && !b.is_zero() {
                        acc = acc.add(&a.mul(b)?)?;
                    }
                }
                out.push(acc);
            }
        }
        Ok(out)
    }

    /// Matrix commutator [A, B] = AB - BA.
    pub fn bracket(&self, o: &SkewEndo) -> Result<SkewEndo, FormError> {
        let ab = self.matmul(o)?;
        let ba = o.matmul(self)?;
        let data = ab.iter().zip(&ba).map(|(x, y)| x.sub(y)).collect::<Result<_, _>>()?;
        Ok(SkewEndo { mode: self.mode, data })
    }

    /// <A, B> = sum_{i<j} A_ij B_ij.
    pub fn pairing(&self, o: &SkewEndo) -> Result<Scalar, FormError> {
        let mut acc = Scalar::zero(self.mode);
        for i in 1..=AMBIENT {
            for j in i + 1..=AMBIENT {
                acc = acc.add(&self.entry(i, j).mul(o.entry(i, j))?)?;
            }
        }
        Ok(acc)
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|c| c.is_zero())
    }
}

impl fmt::Debug for SkewEndo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "SkewEndo[{:?}]", self.mode)?;
        for i in 0..AMBIENT {
            let row: Vec<String> = (0..AMBIENT).map(|j| format!("{}", self.data[i * AMBIENT + j])).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

/// JSON-friendly monomial record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonomialRecord {
    pub indices: Vec<usize>,
    pub coeff: i64,
}

pub fn exact_vec(v: &[i64]) -> Vec<Scalar> {
    v.iter().map(|&x| Scalar::int(x, Mode::Exact)).collect()
}

pub fn float_vec(v: &[f64]) -> Vec<Scalar> {
    v.iter().map(|&x| Scalar::Float(x)).collect()
}

/// Standard basis vector e_i (1-based) of R^n.
pub fn basis_vec(n: usize, i: usize, mode: Mode) -> Vec<Scalar> {
    (1..=n)
        .map(|k| if k == i { Scalar::one(mode) } else { Scalar::zero(mode) })
        .collect()
}
