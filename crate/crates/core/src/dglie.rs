//! Differential graded Lie algebras, artinian dg bases, nilpotent extensions
//! `𝔪⊗𝔤`, Maurer–Cartan elements, the gauge action and Kuranishi maps.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::complexes::{cohomology_group, ComplexError, FinComplex};
use crate::exactla::{
    int, inverse, is_zero_vec, quotient_basis, vec_axpy, zero_vec, LinAlgError, Scalar,
    SparseMatrix, SparseRow, Subspace,
};
use crate::poly::Poly;
use crate::sullivan::{FormValued, PolyForm};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DgLieError {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("element is not homogeneous of degree {expected}")]
    DegreeMismatch { expected: i32 },
    #[error("bracket of basis elements {0} and {1} leaves the stored range")]
    Overflow(usize, usize),
    #[error("element is not a Maurer-Cartan element")]
    NotMc,
    #[error("iterated brackets did not vanish within {0} steps")]
    NotNilpotent(usize),
    #[error("invalid artinian base: {0}")]
    InvalidBase(String),
    #[error("Kuranishi coordinates need a base with zero differential, concentrated in degree 0, with weights")]
    UnsupportedBase,
    #[error("splitting inconsistency: {0}")]
    Splitting(String),
    #[error("path needs polynomial degree {needed}, cap is {cap}")]
    CapExceeded { needed: usize, cap: usize },
    #[error(transparent)]
    Complex(#[from] ComplexError),
    #[error(transparent)]
    LinAlg(#[from] LinAlgError),
}

type SVec = BTreeMap<usize, Scalar>;

fn sv_axpy(acc: &mut SVec, c: &Scalar, row: &[(usize, Scalar)]) {
    for (k, x) in row {
        let e = acc.entry(*k).or_insert_with(Scalar::zero);
        *e += c * x;
        if e.is_zero() {
            acc.remove(k);
        }
    }
}

fn sv_from(v: &[Scalar]) -> SVec {
    v.iter()
        .enumerate()
        .filter(|(_, x)| !x.is_zero())
        .map(|(i, x)| (i, x.clone()))
        .collect()
}

fn sv_dense(v: &SVec, n: usize) -> Vec<Scalar> {
    let mut out = zero_vec(n);
    for (i, x) in v {
        out[*i] = x.clone();
    }
    out
}

fn sv_row(v: &SVec) -> SparseRow {
    v.iter().map(|(i, x)| (*i, x.clone())).collect()
}

/// `(-1)^(a*b)` as a scalar.
fn koszul(a: i32, b: i32) -> Scalar {
    if (a * b).rem_euclid(2) == 0 {
        Scalar::one()
    } else {
        -Scalar::one()
    }
}

fn parity_sign(a: i32) -> Scalar {
    koszul(a, 1)
}

fn factorial(k: usize) -> Scalar {
    (1..=k as i64).fold(Scalar::one(), |acc, i| acc * int(i))
}

/// A finite-dimensional dg Lie algebra given by a graded basis, a differential
/// (columns are images of basis vectors) and bracket structure constants.
///
/// Brackets of pairs in the overflow set are not stored; using them with
/// nonzero coefficients is an error rather than a silent zero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DgLie {
    degrees: Vec<i32>,
    d: SparseMatrix,
    bracket: BTreeMap<(usize, usize), SparseRow>,
    overflow: BTreeSet<(usize, usize)>,
}

impl DgLie {
    pub fn new(
        degrees: Vec<i32>,
        d: SparseMatrix,
        bracket: BTreeMap<(usize, usize), SparseRow>,
        overflow: BTreeSet<(usize, usize)>,
    ) -> Result<Self, DgLieError> {
        let n = degrees.len();
        if d.rows() != n || d.cols() != n {
            return Err(DgLieError::Shape(format!(
                "differential is {}x{}, basis has {n} elements",
                d.rows(),
                d.cols()
            )));
        }
        let mut clean = BTreeMap::new();
        for ((i, j), row) in bracket {
            if i >= n || j >= n || row.iter().any(|(k, _)| *k >= n) {
                return Err(DgLieError::Shape(format!("bracket entry ({i},{j}) out of range")));
            }
            let mut acc = SVec::new();
            sv_axpy(&mut acc, &Scalar::one(), &row);
            if !acc.is_empty() {
                clean.insert((i, j), sv_row(&acc));
            }
        }
        if overflow.iter().any(|(i, j)| *i >= n || *j >= n) {
            return Err(DgLieError::Shape("overflow pair out of range".into()));
        }
        Ok(DgLie {
            degrees,
            d,
            bracket: clean,
            overflow,
        })
    }

    /// Fills `[e_j,e_i] = -(-1)^{|i||j|}[e_i,e_j]` from the given entries.
    pub fn with_antisymmetric_completion(
        degrees: Vec<i32>,
        d: SparseMatrix,
        half: BTreeMap<(usize, usize), SparseRow>,
        overflow: BTreeSet<(usize, usize)>,
    ) -> Result<Self, DgLieError> {
        let mut full = half.clone();
        for ((i, j), row) in &half {
            if i == j {
                continue;
            }
            let (di, dj) = (
                *degrees.get(*i).unwrap_or(&0),
                *degrees.get(*j).unwrap_or(&0),
            );
            let s = -koszul(di, dj);
            full.entry((*j, *i))
                .or_insert_with(|| row.iter().map(|(k, x)| (*k, &s * x)).collect());
        }
        let mut ov = overflow.clone();
        for (i, j) in &overflow {
            ov.insert((*j, *i));
        }
        Self::new(degrees, d, full, ov)
    }

    /// A complex with zero bracket.
    pub fn abelian(c: &FinComplex) -> Self {
        let mut degrees = Vec::new();
        let mut offsets = BTreeMap::new();
        for n in c.degrees() {
            offsets.insert(n, degrees.len());
            degrees.extend(std::iter::repeat_n(n, c.dim(n)));
        }
        let total = degrees.len();
        let mut d = SparseMatrix::zeros(total, total);
        for n in c.degrees() {
            if let (Some(&src), Some(&tgt)) = (offsets.get(&n), offsets.get(&(n + 1))) {
                d.add_block(tgt, src, &c.d(n));
            }
        }
        DgLie {
            degrees,
            d,
            bracket: BTreeMap::new(),
            overflow: BTreeSet::new(),
        }
    }

    /// `sl₂` with basis `e, h, f` in degree 0.
    pub fn sl2() -> Self {
        let mut b = BTreeMap::new();
        b.insert((1, 0), vec![(0, int(2))]);
        b.insert((1, 2), vec![(2, int(-2))]);
        b.insert((0, 2), vec![(1, int(1))]);
        Self::with_antisymmetric_completion(
            vec![0; 3],
            SparseMatrix::zeros(3, 3),
            b,
            BTreeSet::new(),
        )
        .expect("sl2 table")
    }

    /// The Heisenberg algebra `[x,y] = z` in degree 0.
    pub fn heisenberg() -> Self {
        let mut b = BTreeMap::new();
        b.insert((0, 1), vec![(2, int(1))]);
        Self::with_antisymmetric_completion(
            vec![0; 3],
            SparseMatrix::zeros(3, 3),
            b,
            BTreeSet::new(),
        )
        .expect("heisenberg table")
    }

    pub fn dim(&self) -> usize {
        self.degrees.len()
    }

    pub fn degree(&self, i: usize) -> i32 {
        self.degrees[i]
    }

    pub fn degrees(&self) -> &[i32] {
        &self.degrees
    }

    pub fn differential(&self) -> &SparseMatrix {
        &self.d
    }

    pub fn bracket_table(&self) -> &BTreeMap<(usize, usize), SparseRow> {
        &self.bracket
    }

    pub fn overflow_pairs(&self) -> &BTreeSet<(usize, usize)> {
        &self.overflow
    }

    pub fn is_abelian(&self) -> bool {
        self.bracket.is_empty() && self.overflow.is_empty()
    }

    pub fn degree_range(&self) -> Option<(i32, i32)> {
        let lo = self.degrees.iter().min()?;
        let hi = self.degrees.iter().max()?;
        Some((*lo, *hi))
    }

    pub fn basis_in_degree(&self, n: i32) -> Vec<usize> {
        (0..self.dim()).filter(|&i| self.degrees[i] == n).collect()
    }

    /// Checks that every nonzero coordinate sits in degree `n`.
    pub fn check_degree(&self, x: &[Scalar], n: i32) -> Result<(), DgLieError> {
        if x.len() != self.dim() {
            return Err(DgLieError::Shape(format!(
                "element has length {}, algebra has dimension {}",
                x.len(),
                self.dim()
            )));
        }
        if x
            .iter()
            .enumerate()
            .any(|(i, c)| !c.is_zero() && self.degrees[i] != n)
        {
            return Err(DgLieError::DegreeMismatch { expected: n });
        }
        Ok(())
    }

    pub fn d_apply(&self, x: &[Scalar]) -> Vec<Scalar> {
        self.d.apply(x).expect("length checked by caller")
    }

    pub fn bracket_basis(&self, i: usize, j: usize) -> Result<&[(usize, Scalar)], DgLieError> {
        if self.overflow.contains(&(i, j)) {
            return Err(DgLieError::Overflow(i, j));
        }
        Ok(self.bracket.get(&(i, j)).map(|r| r.as_slice()).unwrap_or(&[]))
    }

    fn bracket_sparse(&self, x: &SVec, y: &SVec) -> Result<SVec, DgLieError> {
        let mut acc = SVec::new();
        for (i, a) in x {
            for (j, b) in y {
                let row = self.bracket_basis(*i, *j)?;
                if !row.is_empty() {
                    sv_axpy(&mut acc, &(a * b), row);
                }
            }
        }
        Ok(acc)
    }

    fn d_sparse(&self, x: &SVec) -> SVec {
        let mut acc = SVec::new();
        for (c, a) in x {
            for (r, v) in self.d_column(*c) {
                let e = acc.entry(r).or_insert_with(Scalar::zero);
                *e += a * &v;
                if e.is_zero() {
                    acc.remove(&r);
                }
            }
        }
        acc
    }

    fn d_column(&self, c: usize) -> Vec<(usize, Scalar)> {
        self.d
            .iter()
            .filter(|(_, col, _)| *col == c)
            .map(|(r, _, v)| (r, v.clone()))
            .collect()
    }

    pub fn bracket(&self, x: &[Scalar], y: &[Scalar]) -> Result<Vec<Scalar>, DgLieError> {
        if x.len() != self.dim() || y.len() != self.dim() {
            return Err(DgLieError::Shape("bracket argument length".into()));
        }
        let r = self.bracket_sparse(&sv_from(x), &sv_from(y))?;
        Ok(sv_dense(&r, self.dim()))
    }

    /// The underlying cochain complex; the basis of degree `n` is
    /// `basis_in_degree(n)` in increasing order.
    pub fn complex(&self) -> Result<FinComplex, DgLieError> {
        let Some((lo, hi)) = self.degree_range() else {
            return Ok(FinComplex::zero());
        };
        let blocks: Vec<Vec<usize>> = (lo..=hi).map(|n| self.basis_in_degree(n)).collect();
        let mut pos = vec![0usize; self.dim()];
        for b in &blocks {
            for (k, &i) in b.iter().enumerate() {
                pos[i] = k;
            }
        }
        let mut diffs = BTreeMap::new();
        for n in lo..hi {
            let k = (n - lo) as usize;
            let mut m = SparseMatrix::zeros(blocks[k + 1].len(), blocks[k].len());
            for (r, c, v) in self.d.iter() {
                if self.degrees[c] == n && self.degrees[r] == n + 1 {
                    m.set(pos[r], pos[c], v.clone());
                }
            }
            diffs.insert(n, m);
        }
        Ok(FinComplex::new(
            lo,
            blocks.iter().map(|b| b.len()).collect(),
            diffs,
        )?)
    }

    /// Global coordinates of a vector given in the degree-`n` block.
    pub fn from_block(&self, n: i32, v: &[Scalar]) -> Vec<Scalar> {
        let mut out = zero_vec(self.dim());
        for (k, i) in self.basis_in_degree(n).into_iter().enumerate() {
            out[i] = v[k].clone();
        }
        out
    }

    /// Block direct sum; the summands commute.
    pub fn direct_sum(parts: &[&DgLie]) -> DgLie {
        let total: usize = parts.iter().map(|g| g.dim()).sum();
        let mut degrees = Vec::with_capacity(total);
        let mut d = SparseMatrix::zeros(total, total);
        let mut bracket = BTreeMap::new();
        let mut overflow = BTreeSet::new();
        let mut off = 0;
        for g in parts {
            degrees.extend_from_slice(&g.degrees);
            d.add_block(off, off, &g.d);
            for ((i, j), row) in &g.bracket {
                bracket.insert(
                    (i + off, j + off),
                    row.iter().map(|(k, x)| (k + off, x.clone())).collect(),
                );
            }
            for (i, j) in &g.overflow {
                overflow.insert((i + off, j + off));
            }
            off += g.dim();
        }
        DgLie {
            degrees,
            d,
            bracket,
            overflow,
        }
    }

    /// Whether `f` (columns are images of basis vectors of `self`) is a
    /// degree-preserving chain map respecting brackets, on all pairs where
    /// both sides are defined.
    pub fn is_morphism_to(&self, f: &SparseMatrix, target: &DgLie) -> bool {
        if f.rows() != target.dim() || f.cols() != self.dim() {
            return false;
        }
        if f.iter().any(|(r, c, _)| target.degrees[r] != self.degrees[c]) {
            return false;
        }
        let (Ok(a), Ok(b)) = (target.d.mul(f), f.mul(&self.d)) else {
            return false;
        };
        if a != b {
            return false;
        }
        let cols: Vec<SVec> = (0..self.dim()).map(|c| sv_from(&f.column(c))).collect();
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                let Ok(row) = self.bracket_basis(i, j) else {
                    continue;
                };
                let mut lhs = SVec::new();
                for (k, x) in row {
                    sv_axpy(&mut lhs, x, &sv_row(&cols[*k]));
                }
                match target.bracket_sparse(&cols[i], &cols[j]) {
                    Ok(rhs) if rhs == lhs => {}
                    Ok(_) => return false,
                    Err(_) => continue,
                }
            }
        }
        true
    }

    /// Restriction of a global vector to the degree-`n` block.
    pub fn to_block(&self, n: i32, x: &[Scalar]) -> Vec<Scalar> {
        self.basis_in_degree(n)
            .into_iter()
            .map(|i| x[i].clone())
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LieLaw {
    DifferentialDegree,
    DSquared,
    BracketDegree,
    Antisymmetry,
    Leibniz,
    Jacobi,
}

impl fmt::Display for LieLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            LieLaw::DifferentialDegree => "differential degree",
            LieLaw::DSquared => "d∘d",
            LieLaw::BracketDegree => "bracket degree",
            LieLaw::Antisymmetry => "antisymmetry",
            LieLaw::Leibniz => "Leibniz",
            LieLaw::Jacobi => "Jacobi",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LieViolation {
    pub law: LieLaw,
    /// Basis indices exhibiting the failure.
    pub witness: Vec<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LieReport {
    pub violations: Vec<LieViolation>,
}

impl LieReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks all dg Lie axioms on basis elements. Identities whose evaluation
/// needs an overflowing bracket, or whose result degree lies above the top
/// stored degree, are skipped.
pub fn validate_dglie(g: &DgLie) -> LieReport {
    let n = g.dim();
    let mut out = Vec::new();
    let mut push = |law, witness| out.push(LieViolation { law, witness });
    for (r, c, _) in g.d.iter() {
        if g.degrees[r] != g.degrees[c] + 1 {
            push(LieLaw::DifferentialDegree, vec![c]);
        }
    }
    let dd = g.d.mul(&g.d).expect("square");
    let mut seen = BTreeSet::new();
    for (_, c, _) in dd.iter() {
        if seen.insert(c) {
            push(LieLaw::DSquared, vec![c]);
        }
    }
    for ((i, j), row) in &g.bracket {
        if row
            .iter()
            .any(|(k, _)| g.degrees[*k] != g.degrees[*i] + g.degrees[*j])
        {
            push(LieLaw::BracketDegree, vec![*i, *j]);
        }
    }
    let one = Scalar::one();
    for i in 0..n {
        for j in i..n {
            let (Ok(a), Ok(b)) = (g.bracket_basis(i, j), g.bracket_basis(j, i)) else {
                continue;
            };
            let mut acc = SVec::new();
            sv_axpy(&mut acc, &one, a);
            sv_axpy(&mut acc, &koszul(g.degrees[i], g.degrees[j]), b);
            if !acc.is_empty() {
                push(LieLaw::Antisymmetry, vec![i, j]);
            }
        }
    }
    let unit = |i: usize| -> SVec { std::iter::once((i, Scalar::one())).collect() };
    for i in 0..n {
        let ei = unit(i);
        let di = g.d_sparse(&ei);
        for j in 0..n {
            let ej = unit(j);
            let dj = g.d_sparse(&ej);
            let lhs = match g.bracket_sparse(&ei, &ej) {
                Ok(b) => g.d_sparse(&b),
                Err(_) => continue,
            };
            let (Ok(t1), Ok(t2)) = (g.bracket_sparse(&di, &ej), g.bracket_sparse(&ei, &dj)) else {
                continue;
            };
            let mut acc = lhs;
            sv_axpy(&mut acc, &-Scalar::one(), &sv_row(&t1));
            sv_axpy(&mut acc, &-parity_sign(g.degrees[i]), &sv_row(&t2));
            if !acc.is_empty() {
                push(LieLaw::Leibniz, vec![i, j]);
            }
        }
    }
    let top = g.degree_range().map(|(_, h)| h).unwrap_or(0);
    for i in 0..n {
        let ei = unit(i);
        for j in 0..n {
            let ej = unit(j);
            let Ok(xy) = g.bracket_sparse(&ei, &ej) else {
                continue;
            };
            for k in 0..n {
                if g.degrees[i] + g.degrees[j] + g.degrees[k] > top {
                    continue;
                }
                let ek = unit(k);
                let (Ok(yz), Ok(xz)) = (g.bracket_sparse(&ej, &ek), g.bracket_sparse(&ei, &ek))
                else {
                    continue;
                };
                let (Ok(a), Ok(b), Ok(c)) = (
                    g.bracket_sparse(&ei, &yz),
                    g.bracket_sparse(&xy, &ek),
                    g.bracket_sparse(&ej, &xz),
                ) else {
                    continue;
                };
                let mut acc = a;
                sv_axpy(&mut acc, &-Scalar::one(), &sv_row(&b));
                sv_axpy(&mut acc, &-koszul(g.degrees[i], g.degrees[j]), &sv_row(&c));
                if !acc.is_empty() {
                    push(LieLaw::Jacobi, vec![i, j, k]);
                }
            }
        }
    }
    LieReport { violations: out }
}

/// The maximal ideal `𝔪` of an artinian local dg algebra: graded basis in
/// non-positive degrees, multiplication table and differential.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ArtinBase {
    name: String,
    degrees: Vec<i32>,
    mult: BTreeMap<(usize, usize), SparseRow>,
    d: SparseMatrix,
    weights: Option<Vec<usize>>,
    order: usize,
}

impl ArtinBase {
    /// Validates graded commutativity, associativity, the Leibniz rule,
    /// `d² = 0`, degrees and weights, and computes the nilpotency order.
    pub fn new(
        name: &str,
        degrees: Vec<i32>,
        mult: BTreeMap<(usize, usize), SparseRow>,
        d: SparseMatrix,
        weights: Option<Vec<usize>>,
    ) -> Result<Self, DgLieError> {
        let n = degrees.len();
        let bad = |s: String| Err(DgLieError::InvalidBase(s));
        if d.rows() != n || d.cols() != n {
            return bad("differential shape".into());
        }
        if let Some(i) = degrees.iter().position(|&x| x > 0) {
            return bad(format!("basis element {i} has positive degree"));
        }
        let mut clean = BTreeMap::new();
        for ((i, j), row) in mult {
            if i >= n || j >= n || row.iter().any(|(k, _)| *k >= n) {
                return bad(format!("product ({i},{j}) out of range"));
            }
            let mut acc = SVec::new();
            sv_axpy(&mut acc, &Scalar::one(), &row);
            if !acc.is_empty() {
                clean.insert((i, j), sv_row(&acc));
            }
        }
        let r = ArtinBase {
            name: name.to_string(),
            degrees,
            mult: clean,
            d,
            weights,
            order: 0,
        };
        r.check_laws()?;
        let order = r.nilpotency()?;
        Ok(ArtinBase { order, ..r })
    }

    fn prod(&self, x: &SVec, y: &SVec) -> SVec {
        let mut acc = SVec::new();
        for (i, a) in x {
            for (j, b) in y {
                if let Some(row) = self.mult.get(&(*i, *j)) {
                    sv_axpy(&mut acc, &(a * b), row);
                }
            }
        }
        acc
    }

    fn d_sparse(&self, x: &SVec) -> SVec {
        let mut acc = SVec::new();
        for (r, c, v) in self.d.iter() {
            if let Some(a) = x.get(&c) {
                sv_axpy(&mut acc, a, &[(r, v.clone())]);
            }
        }
        acc
    }

    fn check_laws(&self) -> Result<(), DgLieError> {
        let n = self.dim();
        let bad = |s: String| Err(DgLieError::InvalidBase(s));
        let unit = |i: usize| -> SVec { std::iter::once((i, Scalar::one())).collect() };
        for (r, c, _) in self.d.iter() {
            if self.degrees[r] != self.degrees[c] + 1 {
                return bad(format!("differential of basis element {c} has wrong degree"));
            }
        }
        if !self.d.mul(&self.d).expect("square").is_zero() {
            return bad("d∘d ≠ 0".into());
        }
        for ((i, j), row) in &self.mult {
            if row
                .iter()
                .any(|(k, _)| self.degrees[*k] != self.degrees[*i] + self.degrees[*j])
            {
                return bad(format!("product ({i},{j}) has wrong degree"));
            }
            if let Some(w) = &self.weights {
                if row.iter().any(|(k, _)| w[*k] != w[*i] + w[*j]) {
                    return bad(format!("product ({i},{j}) is not weight-additive"));
                }
            }
        }
        if let Some(w) = &self.weights {
            if w.len() != n || w.contains(&0) {
                return bad("weights must be positive, one per basis element".into());
            }
        }
        for i in 0..n {
            for j in 0..n {
                let (a, b) = (unit(i), unit(j));
                let ab = self.prod(&a, &b);
                let mut ba = self.prod(&b, &a);
                ba = ba
                    .into_iter()
                    .map(|(k, x)| (k, x * koszul(self.degrees[i], self.degrees[j])))
                    .collect();
                if ab != ba {
                    return bad(format!("product ({i},{j}) is not graded commutative"));
                }
                let lhs = self.d_sparse(&ab);
                let mut rhs = self.prod(&self.d_sparse(&a), &b);
                let t = self.prod(&a, &self.d_sparse(&b));
                sv_axpy(&mut rhs, &parity_sign(self.degrees[i]), &sv_row(&t));
                if lhs != rhs {
                    return bad(format!("Leibniz rule fails on ({i},{j})"));
                }
                for k in 0..n {
                    let c = unit(k);
                    if self.prod(&ab, &c) != self.prod(&a, &self.prod(&b, &c)) {
                        return bad(format!("associativity fails on ({i},{j},{k})"));
                    }
                }
            }
        }
        Ok(())
    }

    /// Largest `k` with `𝔪^k ≠ 0`.
    fn nilpotency(&self) -> Result<usize, DgLieError> {
        let n = self.dim();
        let mut power = Subspace::full(n);
        let mut k = 0;
        while power.dim() > 0 {
            k += 1;
            if k > n + 1 {
                return Err(DgLieError::InvalidBase("ideal is not nilpotent".into()));
            }
            let mut vs = Vec::new();
            for v in power.basis() {
                let sv = sv_from(v);
                for i in 0..n {
                    let p = self.prod(&std::iter::once((i, Scalar::one())).collect(), &sv);
                    if !p.is_empty() {
                        vs.push(sv_dense(&p, n));
                    }
                }
            }
            power = Subspace::span(n, &vs)?;
        }
        Ok(k)
    }

    /// `k[t]/(t^{n+1})`: basis `t, …, t^n` in degree 0 with weights `1..n`.
    pub fn truncated_poly(n: usize) -> Self {
        let mut mult = BTreeMap::new();
        for i in 0..n {
            for j in 0..n {
                if i + j + 2 <= n {
                    mult.insert((i, j), vec![(i + j + 1, Scalar::one())]);
                }
            }
        }
        Self::new(
            &format!("k[t]/(t^{})", n + 1),
            vec![0; n],
            mult,
            SparseMatrix::zeros(n, n),
            Some((1..=n).collect()),
        )
        .expect("truncated polynomial base")
    }

    /// `k ⊕ kε ⊕ kt` with `|ε| = -1`, `dε = t`, all products zero.
    pub fn acyclic_pair() -> Self {
        let d = SparseMatrix::from_triplets(2, 2, vec![(1, 0, Scalar::one())])
            .expect("2x2 differential");
        Self::new("k[e,t]/(e,t)^2, de=t", vec![-1, 0], BTreeMap::new(), d, None)
            .expect("acyclic base")
    }

    /// Accepts `k`, `k[t]/(t^n)` with `n ≥ 1`, and `acyclic`.
    pub fn parse(s: &str) -> Result<Self, DgLieError> {
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if t == "k" {
            return Ok(Self::truncated_poly(0));
        }
        if t == "acyclic" {
            return Ok(Self::acyclic_pair());
        }
        let inner = t
            .strip_prefix("k[t]/(t^")
            .and_then(|r| r.strip_suffix(')'))
            .ok_or_else(|| DgLieError::InvalidBase(format!("cannot parse base '{s}'")))?;
        let n: usize = inner
            .parse()
            .map_err(|_| DgLieError::InvalidBase(format!("cannot parse base '{s}'")))?;
        if n == 0 {
            return Err(DgLieError::InvalidBase("k[t]/(t^0) is the zero ring".into()));
        }
        Ok(Self::truncated_poly(n - 1))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.degrees.len()
    }

    pub fn degree(&self, i: usize) -> i32 {
        self.degrees[i]
    }

    pub fn degrees(&self) -> &[i32] {
        &self.degrees
    }

    /// The largest `N` with `𝔪^N ≠ 0`.
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn weights(&self) -> Option<&[usize]> {
        self.weights.as_deref()
    }

    pub fn differential(&self) -> &SparseMatrix {
        &self.d
    }

    pub fn has_trivial_differential(&self) -> bool {
        self.d.is_zero()
    }

    pub fn product(&self, i: usize, j: usize) -> &[(usize, Scalar)] {
        self.mult.get(&(i, j)).map(|r| r.as_slice()).unwrap_or(&[])
    }
}

/// `𝔪⊗𝔤` with basis `m_i⊗g_j` at index `i·dim 𝔤 + j`.
#[derive(Clone, Debug)]
pub struct NilpDgLie {
    lie: DgLie,
    base: ArtinBase,
    inner: DgLie,
}

/// Brackets `[m⊗x, m'⊗y] = (-1)^{|x||m'|} mm'⊗[x,y]` and
/// `d(m⊗x) = dm⊗x + (-1)^{|m|} m⊗dx`.
pub fn tensor_nilpotent(r: &ArtinBase, g: &DgLie) -> Result<NilpDgLie, DgLieError> {
    let (rm, gd) = (r.dim(), g.dim());
    let idx = |i: usize, j: usize| i * gd + j;
    let mut degrees = Vec::with_capacity(rm * gd);
    for i in 0..rm {
        for j in 0..gd {
            degrees.push(r.degree(i) + g.degree(j));
        }
    }
    let mut d = SparseMatrix::zeros(rm * gd, rm * gd);
    for (ri, ci, v) in r.d.iter() {
        for j in 0..gd {
            d.add_to(idx(ri, j), idx(ci, j), v);
        }
    }
    for (rj, cj, v) in g.d.iter() {
        for i in 0..rm {
            d.add_to(idx(i, rj), idx(i, cj), &(parity_sign(r.degree(i)) * v));
        }
    }
    let mut bracket = BTreeMap::new();
    let mut overflow = BTreeSet::new();
    for i in 0..rm {
        for ip in 0..rm {
            let prod = r.product(i, ip);
            if prod.is_empty() {
                continue;
            }
            for x in 0..gd {
                for y in 0..gd {
                    if g.overflow.contains(&(x, y)) {
                        overflow.insert((idx(i, x), idx(ip, y)));
                        continue;
                    }
                    let Some(row) = g.bracket.get(&(x, y)) else {
                        continue;
                    };
                    let s = koszul(g.degree(x), r.degree(ip));
                    let mut acc = SVec::new();
                    for (k, a) in prod {
                        for (l, b) in row {
                            sv_axpy(&mut acc, &(&s * a * b), &[(idx(*k, *l), Scalar::one())]);
                        }
                    }
                    if !acc.is_empty() {
                        bracket.insert((idx(i, x), idx(ip, y)), sv_row(&acc));
                    }
                }
            }
        }
    }
    let lie = DgLie::new(degrees, d, bracket, overflow)?;
    Ok(NilpDgLie {
        lie,
        base: r.clone(),
        inner: g.clone(),
    })
}

impl NilpDgLie {
    pub fn lie(&self) -> &DgLie {
        &self.lie
    }

    pub fn base(&self) -> &ArtinBase {
        &self.base
    }

    pub fn inner(&self) -> &DgLie {
        &self.inner
    }

    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.inner.dim() + j
    }

    pub fn dim(&self) -> usize {
        self.lie.dim()
    }

    /// `m_i ⊗ x` for `x` in the inner algebra.
    pub fn pure(&self, i: usize, x: &[Scalar]) -> Vec<Scalar> {
        let mut out = zero_vec(self.dim());
        for (j, c) in x.iter().enumerate() {
            out[self.index(i, j)] = c.clone();
        }
        out
    }

    /// The coefficient of `m_i`, as an element of the inner algebra.
    pub fn component(&self, z: &[Scalar], i: usize) -> Vec<Scalar> {
        (0..self.inner.dim())
            .map(|j| z[self.index(i, j)].clone())
            .collect()
    }

    /// Bound on the number of nested brackets that can be nonzero.
    pub fn nilpotency_bound(&self) -> usize {
        self.base.order() + 1
    }

    /// Dimensions of `L¹ ⊇ L² ⊇ …` down to the first zero term. Fails when
    /// a needed bracket overflows.
    pub fn lower_central_series(&self) -> Result<Vec<usize>, DgLieError> {
        let n = self.dim();
        let mut dims = Vec::new();
        let mut cur = Subspace::full(n);
        while cur.dim() > 0 {
            dims.push(cur.dim());
            if dims.len() > self.nilpotency_bound() + 1 {
                return Err(DgLieError::NotNilpotent(dims.len()));
            }
            let mut vs = Vec::new();
            for v in cur.basis() {
                let sv = sv_from(v);
                for a in 0..n {
                    let e: SVec = std::iter::once((a, Scalar::one())).collect();
                    let b = self.lie.bracket_sparse(&e, &sv)?;
                    if !b.is_empty() {
                        vs.push(sv_dense(&b, n));
                    }
                }
            }
            cur = Subspace::span(n, &vs)?;
        }
        dims.push(0);
        Ok(dims)
    }

    /// Smallest `k` with `L^k = 0`.
    pub fn nilpotency_step(&self) -> Result<usize, DgLieError> {
        Ok(self.lower_central_series()?.len())
    }
}

pub fn mc_residual(l: &DgLie, z: &[Scalar]) -> Result<Vec<Scalar>, DgLieError> {
    l.check_degree(z, 1)?;
    let mut r = l.d_apply(z);
    let zz = l.bracket(z, z)?;
    vec_axpy(&mut r, &Scalar::new(1.into(), 2.into()), &zz);
    Ok(r)
}

pub fn is_mc(l: &DgLie, z: &[Scalar]) -> Result<bool, DgLieError> {
    Ok(is_zero_vec(&mc_residual(l, z)?))
}

/// `Σ_k c_k ad_γ^k(x)` until the terms vanish.
fn ad_series(
    l: &NilpDgLie,
    gamma: &[Scalar],
    x: &[Scalar],
    coeff: impl Fn(usize) -> Scalar,
) -> Result<Vec<Scalar>, DgLieError> {
    let mut out = zero_vec(l.dim());
    let mut term = x.to_vec();
    let cap = l.nilpotency_bound() + 2;
    for k in 0.. {
        if is_zero_vec(&term) {
            return Ok(out);
        }
        if k > cap {
            return Err(DgLieError::NotNilpotent(cap));
        }
        vec_axpy(&mut out, &coeff(k), &term);
        term = l.lie.bracket(gamma, &term)?;
    }
    unreachable!()
}

/// `e^{ad γ}(x)`.
pub fn exp_ad(l: &NilpDgLie, gamma: &[Scalar], x: &[Scalar]) -> Result<Vec<Scalar>, DgLieError> {
    l.lie.check_degree(gamma, 0)?;
    ad_series(l, gamma, x, |k| Scalar::one() / factorial(k))
}

/// `γ·z = e^{ad γ}(z) − Σ_k ad_γ^k/(k+1)! (dγ)`.
pub fn gauge_act(l: &NilpDgLie, gamma: &[Scalar], z: &[Scalar]) -> Result<Vec<Scalar>, DgLieError> {
    l.lie.check_degree(gamma, 0)?;
    if !is_mc(&l.lie, z)? {
        return Err(DgLieError::NotMc);
    }
    let mut out = ad_series(l, gamma, z, |k| Scalar::one() / factorial(k))?;
    let dg = l.lie.d_apply(gamma);
    let tail = ad_series(l, gamma, &dg, |k| Scalar::one() / factorial(k + 1))?;
    vec_axpy(&mut out, &-Scalar::one(), &tail);
    Ok(out)
}

/// `log(e^x e^y)` through order 4; exact when `𝔪^5 = 0`.
pub fn bch(l: &NilpDgLie, x: &[Scalar], y: &[Scalar]) -> Result<Vec<Scalar>, DgLieError> {
    l.lie.check_degree(x, 0)?;
    l.lie.check_degree(y, 0)?;
    if l.base.order() > 4 {
        return Err(DgLieError::NotNilpotent(5));
    }
    let br = |a: &[Scalar], b: &[Scalar]| l.lie.bracket(a, b);
    let xy = br(x, y)?;
    let xxy = br(x, &xy)?;
    let yxy = br(y, &xy)?;
    let yxxy = br(y, &xxy)?;
    let mut out = x.to_vec();
    vec_axpy(&mut out, &Scalar::one(), y);
    vec_axpy(&mut out, &Scalar::new(1.into(), 2.into()), &xy);
    vec_axpy(&mut out, &Scalar::new(1.into(), 12.into()), &xxy);
    vec_axpy(&mut out, &Scalar::new((-1).into(), 12.into()), &yxy);
    vec_axpy(&mut out, &Scalar::new((-1).into(), 24.into()), &yxxy);
    Ok(out)
}

/// Decomposition `𝔤^n = B^n ⊕ H^n ⊕ C^n` (boundaries, cohomology
/// representatives, complement of the cycles) in one degree, in global
/// coordinates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DegreeSplitting {
    pub degree: i32,
    pub boundaries: Vec<Vec<Scalar>>,
    pub harmonic: Vec<Vec<Scalar>>,
    pub complement: Vec<Vec<Scalar>>,
}

/// A splitting with its contracting homotopy `h` (`dh + hd = 1 − π_H`,
/// `h² = 0`) and harmonic projections.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Splitting {
    degrees: BTreeMap<i32, DegreeSplitting>,
    homotopy: SparseMatrix,
    harmonic_coords: BTreeMap<i32, SparseMatrix>,
}

impl Splitting {
    pub fn degree(&self, n: i32) -> Option<&DegreeSplitting> {
        self.degrees.get(&n)
    }

    pub fn homotopy(&self) -> &SparseMatrix {
        &self.homotopy
    }

    /// Rows give the coordinates along `harmonic` reps, killing `B ⊕ C`.
    pub fn harmonic_coords(&self, n: i32) -> Option<&SparseMatrix> {
        self.harmonic_coords.get(&n)
    }

    pub fn cohomology_dim(&self, n: i32) -> usize {
        self.degrees.get(&n).map(|s| s.harmonic.len()).unwrap_or(0)
    }

    /// Verifies `dh + hd + π_H = 1` and `h² = 0` against `g`.
    pub fn check(&self, g: &DgLie) -> Result<(), DgLieError> {
        let n = g.dim();
        let h = &self.homotopy;
        if h.rows() != n || h.cols() != n {
            return Err(DgLieError::Splitting("homotopy shape".into()));
        }
        let mut pi = SparseMatrix::zeros(n, n);
        for (deg, s) in &self.degrees {
            let coords = &self.harmonic_coords[deg];
            for (k, rep) in s.harmonic.iter().enumerate() {
                for (c, v) in (0..n).map(|c| (c, coords.get(k, c))) {
                    if v.is_zero() {
                        continue;
                    }
                    for (r, x) in rep.iter().enumerate() {
                        if !x.is_zero() {
                            pi.add_to(r, c, &(x * &v));
                        }
                    }
                }
            }
        }
        let total = g
            .d
            .mul(h)?
            .add(&h.mul(&g.d)?)?
            .add(&pi)?;
        if total != SparseMatrix::identity(n) {
            return Err(DgLieError::Splitting("dh + hd + π_H ≠ 1".into()));
        }
        if !h.mul(h)?.is_zero() {
            return Err(DgLieError::Splitting("h∘h ≠ 0".into()));
        }
        Ok(())
    }
}

/// Canonical splitting from reduced-echelon complements.
pub fn splitting(g: &DgLie) -> Result<Splitting, DgLieError> {
    let n = g.dim();
    let c = g.complex()?;
    let mut degrees = BTreeMap::new();
    let mut harmonic_coords = BTreeMap::new();
    let mut b_coords: BTreeMap<i32, SparseMatrix> = BTreeMap::new();
    let mut complements: BTreeMap<i32, Vec<Vec<Scalar>>> = BTreeMap::new();
    let Some((lo, hi)) = g.degree_range() else {
        return Ok(Splitting {
            degrees,
            homotopy: SparseMatrix::zeros(0, 0),
            harmonic_coords,
        });
    };
    for deg in lo..=hi {
        let dn = c.dim(deg);
        let grp = cohomology_group(&c, deg);
        let b: Vec<Vec<Scalar>> = grp.boundaries().basis().to_vec();
        let h: Vec<Vec<Scalar>> = grp.reps().to_vec();
        let comp = quotient_basis(&Subspace::full(dn), grp.cycles())?;
        let cc: Vec<Vec<Scalar>> = comp.reps().to_vec();
        let mut cols = b.clone();
        cols.extend(h.iter().cloned());
        cols.extend(cc.iter().cloned());
        let inv = inverse(&SparseMatrix::from_columns(dn, &cols))?;
        let rows = inv.to_dense();
        let pick = |range: std::ops::Range<usize>| -> SparseMatrix {
            let mut m = SparseMatrix::zeros(range.len(), n);
            let idx = g.basis_in_degree(deg);
            for (r, k) in range.enumerate() {
                for (local, x) in rows[k].iter().enumerate() {
                    if !x.is_zero() {
                        m.set(r, idx[local], x.clone());
                    }
                }
            }
            m
        };
        harmonic_coords.insert(deg, pick(b.len()..b.len() + h.len()));
        b_coords.insert(deg, pick(0..b.len()));
        let glob = |vs: &[Vec<Scalar>]| -> Vec<Vec<Scalar>> {
            vs.iter().map(|v| g.from_block(deg, v)).collect()
        };
        complements.insert(deg, glob(&cc));
        degrees.insert(
            deg,
            DegreeSplitting {
                degree: deg,
                boundaries: glob(&b),
                harmonic: glob(&h),
                complement: glob(&cc),
            },
        );
    }
    let mut homotopy = SparseMatrix::zeros(n, n);
    for deg in lo..hi {
        let cs = &complements[&deg];
        let bc = &b_coords[&(deg + 1)];
        if cs.len() != bc.rows() {
            return Err(DgLieError::Splitting(format!(
                "complement in degree {deg} does not match boundaries above"
            )));
        }
        if cs.is_empty() {
            continue;
        }
        // D[k][j] = B-coordinate k of d(c_j)
        let mut dm = SparseMatrix::zeros(cs.len(), cs.len());
        for (j, cv) in cs.iter().enumerate() {
            let image = bc.apply(&g.d_apply(cv))?;
            for (k, x) in image.into_iter().enumerate() {
                if !x.is_zero() {
                    dm.set(k, j, x);
                }
            }
        }
        let dinv = inverse(&dm)?;
        let cmat = SparseMatrix::from_columns(n, cs);
        let block = cmat.mul(&dinv)?.mul(bc)?;
        homotopy = homotopy.add(&block)?;
    }
    Ok(Splitting {
        degrees,
        homotopy,
        harmonic_coords,
    })
}

/// A Kuranishi coordinate: the coefficient of `m_i ⊗ h_a`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct KVar {
    pub base_index: usize,
    pub class: usize,
}

#[derive(Clone, Debug)]
pub struct KObstruction {
    pub base_index: usize,
    pub class: usize,
    pub poly: Poly,
}

/// Output of the iterated lifting `z = x − h(½[z,z])`, `κ = π_H(½[z,z])`.
#[derive(Clone, Debug)]
pub struct KuranishiData {
    pub base: String,
    pub order: usize,
    pub h0: usize,
    pub h1: usize,
    pub h2: usize,
    pub splitting: Splitting,
    pub variables: Vec<KVar>,
    pub obstruction: Vec<KObstruction>,
    /// `z(x)` in the basis of `𝔪⊗𝔤`.
    pub solution: Vec<Poly>,
    lie: NilpDgLie,
}

impl KuranishiData {
    pub fn nilp(&self) -> &NilpDgLie {
        &self.lie
    }

    pub fn variable_names(&self) -> Vec<String> {
        self.variables
            .iter()
            .map(|v| format!("x{}_{}", v.class, v.base_index + 1))
            .collect()
    }

    pub fn is_unobstructed(&self) -> bool {
        self.obstruction.iter().all(|o| o.poly.is_zero())
    }

    /// True when there are no coordinates: the only solution is `z = 0`.
    pub fn domain_is_point(&self) -> bool {
        self.variables.is_empty()
    }

    pub fn evaluate(&self, point: &[Scalar]) -> Vec<Scalar> {
        self.solution.iter().map(|p| p.eval(point)).collect()
    }

    pub fn obstruction_at(&self, point: &[Scalar]) -> Vec<Scalar> {
        self.obstruction.iter().map(|o| o.poly.eval(point)).collect()
    }

    /// The MC element attached to a point of the vanishing locus.
    pub fn witness(&self, point: &[Scalar]) -> Result<Vec<Scalar>, DgLieError> {
        if point.len() != self.variables.len() {
            return Err(DgLieError::Shape("point has wrong number of coordinates".into()));
        }
        let z = self.evaluate(point);
        if !is_mc(self.lie.lie(), &z)? {
            return Err(DgLieError::NotMc);
        }
        Ok(z)
    }

    /// H¹ coordinates of the weight-one components of an MC element.
    pub fn first_order_classes(&self, z: &[Scalar]) -> Result<Vec<Vec<Scalar>>, DgLieError> {
        let w = self.lie.base.weights().ok_or(DgLieError::UnsupportedBase)?;
        let Some(pi) = self.splitting.harmonic_coords(1) else {
            return Ok(Vec::new());
        };
        let mut out = Vec::new();
        for (i, &wi) in w.iter().enumerate() {
            if wi == 1 {
                out.push(pi.apply(&self.lie.component(z, i))?);
            }
        }
        Ok(out)
    }
}

fn poly_bracket(l: &DgLie, x: &[Poly], y: &[Poly], nvars: usize) -> Result<Vec<Poly>, DgLieError> {
    let mut out = vec![Poly::zero(nvars); l.dim()];
    for (a, pa) in x.iter().enumerate() {
        if pa.is_zero() {
            continue;
        }
        for (b, pb) in y.iter().enumerate() {
            if pb.is_zero() {
                continue;
            }
            let row = l.bracket_basis(a, b)?;
            if row.is_empty() {
                continue;
            }
            let prod = pa.mul(pb);
            for (k, c) in row {
                out[*k].add_scaled(c, &prod);
            }
        }
    }
    Ok(out)
}

/// Kuranishi map of `𝔤` over a weighted base with trivial differential.
pub fn kuranishi(
    g: &DgLie,
    r: &ArtinBase,
    given: Option<&Splitting>,
) -> Result<KuranishiData, DgLieError> {
    let weights = r.weights().ok_or(DgLieError::UnsupportedBase)?;
    if !r.has_trivial_differential() || r.degrees().iter().any(|&x| x != 0) {
        return Err(DgLieError::UnsupportedBase);
    }
    let split = match given {
        Some(s) => {
            s.check(g)?;
            s.clone()
        }
        None => splitting(g)?,
    };
    let lie = tensor_nilpotent(r, g)?;
    let gd = g.dim();
    let h1_reps: Vec<Vec<Scalar>> = split
        .degree(1)
        .map(|s| s.harmonic.clone())
        .unwrap_or_default();
    let mut variables = Vec::new();
    for i in 0..r.dim() {
        for a in 0..h1_reps.len() {
            variables.push(KVar {
                base_index: i,
                class: a,
            });
        }
    }
    let nv = variables.len();
    let mut x = vec![Poly::zero(nv); lie.dim()];
    for (v, var) in variables.iter().enumerate() {
        let p = Poly::var(nv, v);
        for (j, c) in h1_reps[var.class].iter().enumerate() {
            x[lie.index(var.base_index, j)].add_scaled(c, &p);
        }
    }
    let half = Scalar::new(1.into(), 2.into());
    let h = split.homotopy();
    let h_cols: Vec<Vec<(usize, Scalar)>> = (0..gd)
        .map(|c| {
            h.iter()
                .filter(|(_, col, _)| *col == c)
                .map(|(row, _, v)| (row, v.clone()))
                .collect()
        })
        .collect();
    let mut z = x.clone();
    let mut q = vec![Poly::zero(nv); lie.dim()];
    for _ in 0..=weights.iter().copied().max().unwrap_or(0) {
        q = poly_bracket(lie.lie(), &z, &z, nv)?
            .into_iter()
            .map(|p| p.scale(&half))
            .collect();
        let mut next = x.clone();
        for i in 0..r.dim() {
            for j in 0..gd {
                let p = &q[lie.index(i, j)];
                if p.is_zero() {
                    continue;
                }
                for (row, v) in &h_cols[j] {
                    next[lie.index(i, *row)].add_scaled(&-v.clone(), p);
                }
            }
        }
        z = next;
    }
    let mut obstruction = Vec::new();
    if let Some(pi) = split.harmonic_coords(2) {
        for i in 0..r.dim() {
            for b in 0..pi.rows() {
                let mut poly = Poly::zero(nv);
                for (row, col, v) in pi.iter() {
                    if row == b {
                        poly.add_scaled(v, &q[lie.index(i, col)]);
                    }
                }
                obstruction.push(KObstruction {
                    base_index: i,
                    class: b,
                    poly,
                });
            }
        }
    }
    Ok(KuranishiData {
        base: r.name().to_string(),
        order: r.order(),
        h0: split.cohomology_dim(0),
        h1: split.cohomology_dim(1),
        h2: split.cohomology_dim(2),
        splitting: split,
        variables,
        obstruction,
        solution: z,
        lie,
    })
}

/// A 1-simplex `ζ(s) + η(s)ds` of the nerve, with coefficients of `s^k`.
#[derive(Clone, Debug)]
pub struct NerveEdge {
    pub zeta: Vec<Vec<Scalar>>,
    pub eta: Vec<Vec<Scalar>>,
    pub form: FormValued,
}

impl NerveEdge {
    pub fn poly_degree(&self) -> usize {
        self.form.max_poly_degree()
    }

    pub fn at_vertex(&self, v: usize) -> Vec<Scalar> {
        self.form.at_vertex(v)
    }
}

/// The path `s ↦ exp(sγ)·z` with `η = −γ`, checked to be Maurer–Cartan in
/// `Ω₁⊗L` with polynomial degree at most `cap`.
pub fn gauge_to_path(
    l: &NilpDgLie,
    gamma: &[Scalar],
    z: &[Scalar],
    cap: usize,
) -> Result<NerveEdge, DgLieError> {
    l.lie.check_degree(gamma, 0)?;
    if !is_mc(&l.lie, z)? {
        return Err(DgLieError::NotMc);
    }
    let n = l.dim();
    // s^k coefficient: ad^k z / k! − ad^{k-1} dγ / k!
    let mut zeta: Vec<Vec<Scalar>> = Vec::new();
    let mut az = z.to_vec();
    let mut adg = l.lie.d_apply(gamma);
    for k in 0..=l.nilpotency_bound() + 1 {
        let mut c = zero_vec(n);
        vec_axpy(&mut c, &(Scalar::one() / factorial(k)), &az);
        if k >= 1 {
            vec_axpy(&mut c, &(-Scalar::one() / factorial(k)), &adg);
            adg = l.lie.bracket(gamma, &adg)?;
        }
        az = l.lie.bracket(gamma, &az)?;
        zeta.push(c);
    }
    if !is_zero_vec(&az) || !is_zero_vec(&adg) {
        return Err(DgLieError::NotNilpotent(zeta.len()));
    }
    while zeta.len() > 1 && is_zero_vec(zeta.last().expect("nonempty")) {
        zeta.pop();
    }
    let neg: Vec<Scalar> = gamma.iter().map(|x| -x.clone()).collect();
    let eta = if is_zero_vec(&neg) { Vec::new() } else { vec![neg] };
    let needed = (zeta.len().saturating_sub(1)).max(if eta.is_empty() { 0 } else { 1 });
    if needed > cap {
        return Err(DgLieError::CapExceeded { needed, cap });
    }
    let mut form = FormValued::zero(1, n);
    for (k, c) in zeta.iter().enumerate() {
        let mono = PolyForm::monomial(1, vec![k as u32], 0, Scalar::one());
        form.add_assign(&FormValued::pure(&mono, c));
    }
    for (k, c) in eta.iter().enumerate() {
        let mono = PolyForm::monomial(1, vec![k as u32], 1, Scalar::one());
        form.add_assign(&FormValued::pure(&mono, c));
    }
    if !form.is_mc(&l.lie)? {
        return Err(DgLieError::NotMc);
    }
    Ok(NerveEdge { zeta, eta, form })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complexes::cohomology;
    use crate::exactla::{frac, unit_vec};
    use proptest::prelude::*;

    fn dg_pair() -> DgLie {
        // a (deg 0) with da = b (deg 1); [a,b] = 0: abelian acyclic.
        let d = SparseMatrix::from_triplets(2, 2, vec![(1, 0, int(1))]).unwrap();
        DgLie::new(vec![0, 1], d, BTreeMap::new(), BTreeSet::new()).unwrap()
    }

    /// Degree 0: x; degree 1: u, v; [x,u] = v, [x,v] = 0. Nonabelian with
    /// nontrivial degree-1 action.
    fn graded_example() -> DgLie {
        let mut b = BTreeMap::new();
        b.insert((0, 1), vec![(2, int(1))]);
        DgLie::with_antisymmetric_completion(
            vec![0, 1, 1],
            SparseMatrix::zeros(3, 3),
            b,
            BTreeSet::new(),
        )
        .unwrap()
    }

    #[test]
    fn abelian_and_sl2_valid() {
        assert!(validate_dglie(&dg_pair()).is_valid());
        assert!(validate_dglie(&DgLie::sl2()).is_valid());
        assert!(validate_dglie(&DgLie::heisenberg()).is_valid());
        assert!(validate_dglie(&graded_example()).is_valid());
    }

    #[test]
    fn leibniz_violation_is_flagged() {
        // x (deg 0), y (deg 0), w (deg 1) with dx = w and [x,y] = x:
        // d[x,y] = w but [dx,y] + [x,dy] = [w,y] = 0.
        let d = SparseMatrix::from_triplets(3, 3, vec![(2, 0, int(1))]).unwrap();
        let mut b = BTreeMap::new();
        b.insert((0, 1), vec![(0, int(1))]);
        let g = DgLie::with_antisymmetric_completion(vec![0, 0, 1], d, b, BTreeSet::new())
            .unwrap();
        let rep = validate_dglie(&g);
        let leib: Vec<_> = rep
            .violations
            .iter()
            .filter(|v| v.law == LieLaw::Leibniz)
            .collect();
        assert!(!leib.is_empty());
        assert!(leib.iter().any(|v| v.witness == vec![0, 1]));
    }

    #[test]
    fn jacobi_violation_is_flagged() {
        let mut b = BTreeMap::new();
        b.insert((0, 1), vec![(2, int(1))]);
        b.insert((1, 2), vec![(0, int(1))]);
        b.insert((0, 2), vec![(0, int(1))]);
        let g = DgLie::with_antisymmetric_completion(
            vec![0; 3],
            SparseMatrix::zeros(3, 3),
            b,
            BTreeSet::new(),
        )
        .unwrap();
        assert!(validate_dglie(&g)
            .violations
            .iter()
            .any(|v| v.law == LieLaw::Jacobi));
    }

    #[test]
    fn artin_bases() {
        let r = ArtinBase::truncated_poly(2);
        assert_eq!(r.order(), 2);
        assert_eq!(r.dim(), 2);
        assert_eq!(ArtinBase::parse("k[t]/(t^3)").unwrap(), r);
        assert_eq!(ArtinBase::parse("k").unwrap().dim(), 0);
        let a = ArtinBase::acyclic_pair();
        assert_eq!(a.order(), 1);
        let mut bad = BTreeMap::new();
        bad.insert((0, 0), vec![(0, int(1))]);
        assert!(ArtinBase::new("bad", vec![0], bad, SparseMatrix::zeros(1, 1), None).is_err());
        let mut noncomm = BTreeMap::new();
        noncomm.insert((0, 1), vec![(2, int(1))]);
        assert!(ArtinBase::new(
            "nc",
            vec![0, 0, 0],
            noncomm,
            SparseMatrix::zeros(3, 3),
            None
        )
        .is_err());
    }

    #[test]
    fn tensor_dimensions_and_lcs() {
        let ab = DgLie::abelian(&FinComplex::concentrated(1, 2));
        let l = tensor_nilpotent(&ArtinBase::truncated_poly(1), &ab).unwrap();
        assert_eq!(l.dim(), 2);
        assert!(l.lie().is_abelian());
        let s = tensor_nilpotent(&ArtinBase::truncated_poly(2), &DgLie::sl2()).unwrap();
        assert_eq!(s.lower_central_series().unwrap(), vec![6, 3, 0]);
        assert_eq!(s.nilpotency_step().unwrap(), 3);
        assert!(validate_dglie(s.lie()).is_valid());
    }

    #[test]
    fn acyclic_base_has_trivial_pi0() {
        for g in [dg_pair(), graded_example(), DgLie::abelian(&FinComplex::concentrated(1, 3))] {
            let l = tensor_nilpotent(&ArtinBase::acyclic_pair(), &g).unwrap();
            assert!(validate_dglie(l.lie()).is_valid());
            let h = cohomology(&l.lie().complex().unwrap());
            assert_eq!(h.dim(1), 0);
        }
    }

    #[test]
    fn gauge_basics() {
        let g = DgLie::abelian(&dg_pair().complex().unwrap());
        let l = tensor_nilpotent(&ArtinBase::truncated_poly(2), &g).unwrap();
        let z = zero_vec(l.dim());
        let gamma = l.pure(0, &[int(3), int(0)]);
        let out = gauge_act(&l, &gamma, &z).unwrap();
        let mut expect = z.clone();
        vec_axpy(&mut expect, &int(-1), &l.lie().d_apply(&gamma));
        assert_eq!(out, expect);
        assert_eq!(gauge_act(&l, &zero_vec(l.dim()), &z).unwrap(), z);
        assert!(matches!(
            mc_residual(l.lie(), &gamma),
            Err(DgLieError::DegreeMismatch { expected: 1 })
        ));
    }

    #[test]
    fn bch_composition_on_two_step_example() {
        let g = graded_example();
        let l = tensor_nilpotent(&ArtinBase::truncated_poly(2), &g).unwrap();
        let g1 = l.pure(0, &[int(2), int(0), int(0)]);
        let g2 = l.pure(0, &[int(-1), int(0), int(0)]);
        let z = l.pure(0, &[int(0), int(1), int(3)]);
        assert!(is_mc(l.lie(), &z).unwrap());
        let lhs = gauge_act(&l, &g1, &gauge_act(&l, &g2, &z).unwrap()).unwrap();
        let rhs = gauge_act(&l, &bch(&l, &g1, &g2).unwrap(), &z).unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn kuranishi_abelian_matches_cohomology() {
        let c = FinComplex::new(
            0,
            vec![1, 2, 1],
            BTreeMap::from([
                (0, SparseMatrix::from_dense(2, 1, &[vec![int(1)], vec![int(0)]]).unwrap()),
            ]),
        )
        .unwrap();
        let g = DgLie::abelian(&c);
        let r = ArtinBase::truncated_poly(3);
        let k = kuranishi(&g, &r, None).unwrap();
        assert!(k.is_unobstructed());
        k.splitting.check(&g).unwrap();
        let l = tensor_nilpotent(&r, &g).unwrap();
        let h = cohomology(&l.lie().complex().unwrap());
        assert_eq!(k.variables.len(), h.dim(1));
        let p: Vec<Scalar> = (0..k.variables.len()).map(|i| frac(i as i64 + 1, 3)).collect();
        assert!(k.witness(&p).is_ok());
    }

    #[test]
    fn kuranishi_obstruction_is_half_bracket_class() {
        // 𝔤: degree 1 u, degree 2 w, [u,u] = 2w, d = 0.
        let mut b = BTreeMap::new();
        b.insert((0, 0), vec![(1, int(2))]);
        let g = DgLie::new(vec![1, 2], SparseMatrix::zeros(2, 2), b, BTreeSet::new()).unwrap();
        assert!(validate_dglie(&g).is_valid());
        let k = kuranishi(&g, &ArtinBase::truncated_poly(2), None).unwrap();
        assert!(!k.is_unobstructed());
        // order-2 obstruction: class of ½[x u, x u] = x² w
        let second = k
            .obstruction
            .iter()
            .find(|o| o.base_index == 1 && o.class == 0)
            .unwrap();
        let x0 = Poly::var(2, 0);
        assert_eq!(second.poly, x0.mul(&x0));
        assert!(k.witness(&[int(0), int(5)]).is_ok());
        assert!(k.witness(&[int(1), int(0)]).is_err());
        let u = unit_vec(2, 0);
        let half_bracket = g.bracket(&u, &u).unwrap();
        let grp = cohomology_group(&g.complex().unwrap(), 2);
        let cls = grp.class_of(&g.to_block(2, &half_bracket)).unwrap();
        assert_eq!(cls, vec![int(2)]);
    }

    #[test]
    fn path_is_mc_in_forms() {
        let g = graded_example();
        let l = tensor_nilpotent(&ArtinBase::truncated_poly(2), &g).unwrap();
        let gamma = l.pure(0, &[int(2), int(0), int(0)]);
        let z = l.pure(0, &[int(0), int(1), int(0)]);
        let e = gauge_to_path(&l, &gamma, &z, 4).unwrap();
        assert_eq!(e.at_vertex(0), z);
        assert_eq!(e.at_vertex(1), gauge_act(&l, &gamma, &z).unwrap());
        assert!(matches!(
            gauge_to_path(&l, &gamma, &z, 0),
            Err(DgLieError::CapExceeded { .. })
        ));
        let still = gauge_to_path(&l, &zero_vec(l.dim()), &z, 0).unwrap();
        assert!(still.eta.is_empty());
        assert_eq!(still.zeta.len(), 1);
    }

    #[test]
    fn abelian_path_is_linear() {
        let g = DgLie::abelian(&dg_pair().complex().unwrap());
        let l = tensor_nilpotent(&ArtinBase::truncated_poly(1), &g).unwrap();
        let gamma = l.pure(0, &[int(1), int(0)]);
        let z = zero_vec(l.dim());
        let e = gauge_to_path(&l, &gamma, &z, 1).unwrap();
        assert_eq!(e.zeta.len(), 2);
        assert_eq!(e.zeta[1], vec_scale_neg(&l.lie().d_apply(&gamma)));
    }

    fn vec_scale_neg(v: &[Scalar]) -> Vec<Scalar> {
        v.iter().map(|x| -x.clone()).collect()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]
        #[test]
        fn gauge_preserves_mc(
            gs in proptest::collection::vec(-3i64..4, 6),
            zs in proptest::collection::vec(-3i64..4, 2),
        ) {
            let g = graded_example();
            let l = tensor_nilpotent(&ArtinBase::truncated_poly(2), &g).unwrap();
            // γ = t⊗a x + t²⊗b x; z = t⊗(c u + e v): MC because [u,v] are degree 2 = 0
            let gamma = {
                let mut v = l.pure(0, &[int(gs[0]), int(0), int(0)]);
                vec_axpy(&mut v, &int(1), &l.pure(1, &[int(gs[1]), int(0), int(0)]));
                v
            };
            let z = l.pure(0, &[int(0), int(zs[0]), int(zs[1])]);
            let out = gauge_act(&l, &gamma, &z).unwrap();
            prop_assert!(is_mc(l.lie(), &out).unwrap());
            let sl = tensor_nilpotent(&ArtinBase::truncated_poly(3), &DgLie::sl2()).unwrap();
            let a = sl.pure(0, &[int(gs[2]), int(gs[3]), int(gs[4])]);
            let b = sl.pure(1, &[int(gs[5]), int(gs[0]), int(1)]);
            let x = sl.pure(0, &[int(zs[0]), int(1), int(zs[1])]);
            let lhs = exp_ad(&sl, &a, &exp_ad(&sl, &b, &x).unwrap()).unwrap();
            let rhs = exp_ad(&sl, &bch(&sl, &a, &b).unwrap(), &x).unwrap();
            prop_assert_eq!(lhs, rhs);
        }
    }
}
