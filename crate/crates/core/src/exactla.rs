//! Exact sparse linear algebra over the rationals.
//!
//! Every subspace is stored through its reduced row echelon basis, so two
//! [`Subspace`] values describe the same space exactly when they compare
//! equal.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

/// An exact rational number in lowest terms.
pub type Scalar = BigRational;

/// A sparse row: strictly increasing column indices with nonzero values.
pub type SparseRow = Vec<(usize, Scalar)>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LinAlgError {
    #[error("dimension mismatch: expected {expected}, found {found} ({context})")]
    DimensionMismatch {
        expected: usize,
        found: usize,
        context: &'static str,
    },
    #[error("vector is not contained in the ambient subspace")]
    NotContained,
    #[error("subspace is not contained in the ambient subspace")]
    ContainmentFailure,
    #[error("matrix is singular")]
    Singular,
    #[error("cannot parse rational '{0}'")]
    Parse(String),
}

pub fn int(n: i64) -> Scalar {
    Scalar::from_integer(BigInt::from(n))
}

pub fn frac(p: i64, q: i64) -> Scalar {
    Scalar::new(BigInt::from(p), BigInt::from(q))
}

/// Parses `"p/q"`, `"p"` or `"-p/q"`. Floats are rejected.
pub fn parse_scalar(s: &str) -> Result<Scalar, LinAlgError> {
    let s = s.trim();
    let bad = || LinAlgError::Parse(s.to_string());
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n: BigInt = num.parse().map_err(|_| bad())?;
    let d: BigInt = den.parse().map_err(|_| bad())?;
    if d.is_zero() {
        return Err(bad());
    }
    Ok(Scalar::new(n, d))
}

pub fn format_scalar(x: &Scalar) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn zero_vec(n: usize) -> Vec<Scalar> {
    vec![Scalar::zero(); n]
}

pub fn unit_vec(n: usize, i: usize) -> Vec<Scalar> {
    let mut v = zero_vec(n);
    v[i] = Scalar::one();
    v
}

pub fn is_zero_vec(v: &[Scalar]) -> bool {
    v.iter().all(Zero::is_zero)
}

pub fn vec_add(a: &[Scalar], b: &[Scalar]) -> Vec<Scalar> {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn vec_sub(a: &[Scalar], b: &[Scalar]) -> Vec<Scalar> {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn vec_scale(c: &Scalar, a: &[Scalar]) -> Vec<Scalar> {
    a.iter().map(|x| c * x).collect()
}

/// `acc += c * v`
pub fn vec_axpy(acc: &mut [Scalar], c: &Scalar, v: &[Scalar]) {
    if c.is_zero() {
        return;
    }
    for (a, x) in acc.iter_mut().zip(v) {
        if !x.is_zero() {
            *a += c * x;
        }
    }
}

fn to_sparse(v: &[Scalar]) -> SparseRow {
    v.iter()
        .enumerate()
        .filter(|(_, x)| !x.is_zero())
        .map(|(i, x)| (i, x.clone()))
        .collect()
}

fn to_dense(row: &SparseRow, n: usize) -> Vec<Scalar> {
    let mut v = zero_vec(n);
    for (i, x) in row {
        v[*i] = x.clone();
    }
    v
}

/// `a + c * b` on sparse rows.
fn sparse_axpy(a: &SparseRow, c: &Scalar, b: &SparseRow) -> SparseRow {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        if j == b.len() || (i < a.len() && a[i].0 < b[j].0) {
            out.push(a[i].clone());
            i += 1;
        } else if i == a.len() || b[j].0 < a[i].0 {
            out.push((b[j].0, c * &b[j].1));
            j += 1;
        } else {
            let v = &a[i].1 + c * &b[j].1;
            if !v.is_zero() {
                out.push((a[i].0, v));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

fn sparse_get(row: &SparseRow, col: usize) -> Option<&Scalar> {
    row.binary_search_by_key(&col, |e| e.0).ok().map(|k| &row[k].1)
}

/// Incrementally maintained reduced row echelon form.
#[derive(Clone, Debug, Default)]
struct Echelon {
    ncols: usize,
    rows: BTreeMap<usize, SparseRow>,
}

impl Echelon {
    fn new(ncols: usize) -> Self {
        Echelon {
            ncols,
            rows: BTreeMap::new(),
        }
    }

    /// Reduces `row` against the current pivots. The result has zeros in all
    /// pivot columns.
    fn reduce(&self, row: SparseRow) -> SparseRow {
        let coeffs: Vec<(usize, Scalar)> = row
            .iter()
            .filter(|(c, _)| self.rows.contains_key(c))
            .cloned()
            .collect();
        let mut r = row;
        for (p, c) in coeffs {
            r = sparse_axpy(&r, &-c, &self.rows[&p]);
        }
        r
    }

    /// Inserts a row; returns the new pivot column if the rank grew.
    fn insert(&mut self, row: SparseRow) -> Option<usize> {
        let r = self.reduce(row);
        let (pivot, lead) = r.first().cloned()?;
        let inv = lead.recip();
        let r: SparseRow = r.into_iter().map(|(c, x)| (c, x * &inv)).collect();
        for other in self.rows.values_mut() {
            if let Some(x) = sparse_get(other, pivot).cloned() {
                *other = sparse_axpy(other, &-x, &r);
            }
        }
        self.rows.insert(pivot, r);
        Some(pivot)
    }

    fn rank(&self) -> usize {
        self.rows.len()
    }

    fn pivots(&self) -> Vec<usize> {
        self.rows.keys().copied().collect()
    }
}

/// A sparse matrix with exact entries and no stored zeros.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    entries: BTreeMap<(usize, usize), Scalar>,
}

impl SparseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        SparseMatrix {
            rows,
            cols,
            entries: BTreeMap::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.entries.insert((i, i), Scalar::one());
        }
        m
    }

    pub fn from_dense(rows: usize, cols: usize, data: &[Vec<Scalar>]) -> Result<Self, LinAlgError> {
        if data.len() != rows {
            return Err(LinAlgError::DimensionMismatch {
                expected: rows,
                found: data.len(),
                context: "dense row count",
            });
        }
        let mut m = Self::zeros(rows, cols);
        for (i, row) in data.iter().enumerate() {
            if row.len() != cols {
                return Err(LinAlgError::DimensionMismatch {
                    expected: cols,
                    found: row.len(),
                    context: "dense row length",
                });
            }
            for (j, x) in row.iter().enumerate() {
                m.set(i, j, x.clone());
            }
        }
        Ok(m)
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_columns(rows: usize, columns: &[Vec<Scalar>]) -> Self {
        let mut m = Self::zeros(rows, columns.len());
        for (j, c) in columns.iter().enumerate() {
            for (i, x) in c.iter().enumerate() {
                m.set(i, j, x.clone());
            }
        }
        m
    }

    pub fn from_triplets(
        rows: usize,
        cols: usize,
        triplets: impl IntoIterator<Item = (usize, usize, Scalar)>,
    ) -> Result<Self, LinAlgError> {
        let mut m = Self::zeros(rows, cols);
        for (i, j, x) in triplets {
            if i >= rows || j >= cols {
                return Err(LinAlgError::DimensionMismatch {
                    expected: rows.max(cols),
                    found: i.max(j),
                    context: "triplet index out of bounds",
                });
            }
            m.add_to(i, j, &x);
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, i: usize, j: usize) -> Scalar {
        self.entries.get(&(i, j)).cloned().unwrap_or_else(Scalar::zero)
    }

    pub fn set(&mut self, i: usize, j: usize, x: Scalar) {
        assert!(i < self.rows && j < self.cols, "index out of bounds");
        if x.is_zero() {
            self.entries.remove(&(i, j));
        } else {
            self.entries.insert((i, j), x);
        }
    }

    pub fn add_to(&mut self, i: usize, j: usize, x: &Scalar) {
        if x.is_zero() {
            return;
        }
        let v = self.get(i, j) + x;
        self.set(i, j, v);
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, &Scalar)> {
        self.entries.iter().map(|(&(i, j), x)| (i, j, x))
    }

    pub fn to_dense(&self) -> Vec<Vec<Scalar>> {
        let mut d = vec![zero_vec(self.cols); self.rows];
        for (i, j, x) in self.iter() {
            d[i][j] = x.clone();
        }
        d
    }

    pub fn sparse_rows(&self) -> Vec<SparseRow> {
        let mut out = vec![Vec::new(); self.rows];
        for (i, j, x) in self.iter() {
            out[i].push((j, x.clone()));
        }
        out
    }

    pub fn column(&self, j: usize) -> Vec<Scalar> {
        let mut v = zero_vec(self.rows);
        for (i, jj, x) in self.iter() {
            if jj == j {
                v[i] = x.clone();
            }
        }
        v
    }

    pub fn transpose(&self) -> Self {
        SparseMatrix {
            rows: self.cols,
            cols: self.rows,
            entries: self.iter().map(|(i, j, x)| ((j, i), x.clone())).collect(),
        }
    }

    pub fn scale(&self, c: &Scalar) -> Self {
        if c.is_zero() {
            return Self::zeros(self.rows, self.cols);
        }
        SparseMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self.iter().map(|(i, j, x)| ((i, j), c * x)).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self, LinAlgError> {
        self.check_same_shape(other)?;
        let mut m = self.clone();
        for (i, j, x) in other.iter() {
            m.add_to(i, j, x);
        }
        Ok(m)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, LinAlgError> {
        self.add(&other.scale(&-Scalar::one()))
    }

    fn check_same_shape(&self, other: &Self) -> Result<(), LinAlgError> {
        if self.rows != other.rows {
            return Err(LinAlgError::DimensionMismatch {
                expected: self.rows,
                found: other.rows,
                context: "row count",
            });
        }
        if self.cols != other.cols {
            return Err(LinAlgError::DimensionMismatch {
                expected: self.cols,
                found: other.cols,
                context: "column count",
            });
        }
        Ok(())
    }

    /// Matrix product `self * other`.
    pub fn mul(&self, other: &Self) -> Result<Self, LinAlgError> {
        if self.cols != other.rows {
            return Err(LinAlgError::DimensionMismatch {
                expected: self.cols,
                found: other.rows,
                context: "matrix product",
            });
        }
        let other_rows = other.sparse_rows();
        let mut out = Self::zeros(self.rows, other.cols);
        for (i, k, a) in self.iter() {
            for (j, b) in &other_rows[k] {
                out.add_to(i, *j, &(a * b));
            }
        }
        Ok(out)
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: &[Scalar]) -> Result<Vec<Scalar>, LinAlgError> {
        if v.len() != self.cols {
            return Err(LinAlgError::DimensionMismatch {
                expected: self.cols,
                found: v.len(),
                context: "matrix-vector product",
            });
        }
        let mut out = zero_vec(self.rows);
        for (i, j, x) in self.iter() {
            if !v[j].is_zero() {
                out[i] += x * &v[j];
            }
        }
        Ok(out)
    }

    /// Places `block` with its top-left corner at `(r0, c0)`, adding to
    /// existing entries.
    pub fn add_block(&mut self, r0: usize, c0: usize, block: &SparseMatrix) {
        assert!(r0 + block.rows <= self.rows && c0 + block.cols <= self.cols);
        for (i, j, x) in block.iter() {
            self.add_to(r0 + i, c0 + j, x);
        }
    }

    pub fn rank(&self) -> usize {
        echelon_of(self.sparse_rows(), self.cols).rank()
    }
}

impl fmt::Display for SparseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in self.to_dense() {
            let cells: Vec<String> = row.iter().map(format_scalar).collect();
            writeln!(f, "[{}]", cells.join(" "))?;
        }
        Ok(())
    }
}

fn echelon_of(rows: impl IntoIterator<Item = SparseRow>, ncols: usize) -> Echelon {
    let mut e = Echelon::new(ncols);
    for r in rows {
        e.insert(r);
    }
    e
}

/// A linear subspace of `k^n`, stored via its reduced row echelon basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Subspace {
    ambient_dim: usize,
    basis: Vec<Vec<Scalar>>,
    pivots: Vec<usize>,
}

impl Subspace {
    pub fn zero(ambient_dim: usize) -> Self {
        Subspace {
            ambient_dim,
            basis: Vec::new(),
            pivots: Vec::new(),
        }
    }

    pub fn full(ambient_dim: usize) -> Self {
        Subspace {
            ambient_dim,
            basis: (0..ambient_dim).map(|i| unit_vec(ambient_dim, i)).collect(),
            pivots: (0..ambient_dim).collect(),
        }
    }

    pub fn span(ambient_dim: usize, vectors: &[Vec<Scalar>]) -> Result<Self, LinAlgError> {
        for v in vectors {
            if v.len() != ambient_dim {
                return Err(LinAlgError::DimensionMismatch {
                    expected: ambient_dim,
                    found: v.len(),
                    context: "spanning vector",
                });
            }
        }
        Ok(Self::from_echelon(
            echelon_of(vectors.iter().map(|v| to_sparse(v)), ambient_dim),
        ))
    }

    fn from_echelon(e: Echelon) -> Self {
        let pivots = e.pivots();
        let basis = e.rows.values().map(|r| to_dense(r, e.ncols)).collect();
        Subspace {
            ambient_dim: e.ncols,
            basis,
            pivots,
        }
    }

    fn echelon(&self) -> Echelon {
        let mut e = Echelon::new(self.ambient_dim);
        for (p, v) in self.pivots.iter().zip(&self.basis) {
            e.rows.insert(*p, to_sparse(v));
        }
        e
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Vec<Scalar>] {
        &self.basis
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    pub fn contains(&self, v: &[Scalar]) -> bool {
        self.coords(v).is_some()
    }

    pub fn contains_subspace(&self, other: &Subspace) -> bool {
        other.ambient_dim == self.ambient_dim && other.basis.iter().all(|v| self.contains(v))
    }

    /// Coordinates of `v` in the echelon basis, or `None` if `v` lies outside.
    pub fn coords(&self, v: &[Scalar]) -> Option<Vec<Scalar>> {
        if v.len() != self.ambient_dim {
            return None;
        }
        // the basis is reduced, so the pivot entries are the coordinates
        let c: Vec<Scalar> = self.pivots.iter().map(|&p| v[p].clone()).collect();
        if self.combine(&c) != v {
            return None;
        }
        Some(c)
    }

    /// Matrix of `f` restricted to `self` and corestricted to `target`, in
    /// basis coordinates; `None` if the image leaves `target`.
    pub fn restricted_map(&self, f: &SparseMatrix, target: &Subspace) -> Option<SparseMatrix> {
        let mut cols = Vec::with_capacity(self.dim());
        for b in &self.basis {
            cols.push(target.coords(&f.apply(b).ok()?)?);
        }
        Some(SparseMatrix::from_columns(target.dim(), &cols))
    }

    /// Linear combination of the basis with the given coordinates.
    pub fn combine(&self, coords: &[Scalar]) -> Vec<Scalar> {
        let mut out = zero_vec(self.ambient_dim);
        for (c, b) in coords.iter().zip(&self.basis) {
            vec_axpy(&mut out, c, b);
        }
        out
    }

    pub fn sum(&self, other: &Subspace) -> Result<Subspace, LinAlgError> {
        let mut all = self.basis.clone();
        all.extend(other.basis.iter().cloned());
        Subspace::span(self.ambient_dim, &all)
    }

    pub fn intersection(&self, other: &Subspace) -> Result<Subspace, LinAlgError> {
        // kernel of [A^T | -B^T] gives pairs (a, b) with sum a_i A_i = sum b_j B_j
        let a = self.dim();
        let mut cols: Vec<Vec<Scalar>> = self.basis.clone();
        cols.extend(other.basis.iter().map(|v| vec_scale(&-Scalar::one(), v)));
        let m = SparseMatrix::from_columns(self.ambient_dim, &cols);
        let ker = kernel_basis(&m);
        let vecs: Vec<Vec<Scalar>> = ker
            .basis()
            .iter()
            .map(|k| self.combine(&k[..a]))
            .collect();
        Subspace::span(self.ambient_dim, &vecs)
    }

    /// The matrix whose columns are the basis vectors.
    pub fn basis_matrix(&self) -> SparseMatrix {
        SparseMatrix::from_columns(self.ambient_dim, &self.basis)
    }
}

/// Canonical basis of `{v : m v = 0}`.
pub fn kernel_basis(m: &SparseMatrix) -> Subspace {
    let e = echelon_of(m.sparse_rows(), m.cols());
    let n = m.cols();
    let pivots = e.pivots();
    let is_pivot: Vec<bool> = {
        let mut b = vec![false; n];
        for &p in &pivots {
            b[p] = true;
        }
        b
    };
    let mut vecs = Vec::new();
    for f in (0..n).filter(|&f| !is_pivot[f]) {
        let mut v = zero_vec(n);
        v[f] = Scalar::one();
        for (p, row) in &e.rows {
            if let Some(x) = sparse_get(row, f) {
                v[*p] = -x.clone();
            }
        }
        vecs.push(v);
    }
    Subspace::span(n, &vecs).expect("consistent dimensions")
}

/// Column space of `m`.
pub fn image(m: &SparseMatrix) -> Subspace {
    Subspace::from_echelon(echelon_of(m.transpose().sparse_rows(), m.rows()))
}

/// Returns some `x` with `m x = b`, choosing all free variables zero, or
/// `None` when `b` is not in the image.
pub fn solve(m: &SparseMatrix, b: &[Scalar]) -> Result<Option<Vec<Scalar>>, LinAlgError> {
    if b.len() != m.rows() {
        return Err(LinAlgError::DimensionMismatch {
            expected: m.rows(),
            found: b.len(),
            context: "right-hand side",
        });
    }
    let n = m.cols();
    let mut rows = m.sparse_rows();
    for (row, bi) in rows.iter_mut().zip(b) {
        if !bi.is_zero() {
            row.push((n, bi.clone()));
        }
    }
    let e = echelon_of(rows, n + 1);
    if e.rows.contains_key(&n) {
        return Ok(None);
    }
    let mut x = zero_vec(n);
    for (p, row) in &e.rows {
        if let Some(v) = sparse_get(row, n) {
            x[*p] = v.clone();
        }
    }
    Ok(Some(x))
}

/// Inverse of a square matrix.
pub fn inverse(m: &SparseMatrix) -> Result<SparseMatrix, LinAlgError> {
    let n = m.rows();
    if m.cols() != n {
        return Err(LinAlgError::DimensionMismatch {
            expected: n,
            found: m.cols(),
            context: "square matrix",
        });
    }
    let rows = m
        .sparse_rows()
        .into_iter()
        .enumerate()
        .map(|(i, mut r)| {
            r.push((n + i, Scalar::one()));
            r
        });
    let e = echelon_of(rows, 2 * n);
    if e.rank() != n || e.pivots().into_iter().take(n).ne(0..n) {
        return Err(LinAlgError::Singular);
    }
    let mut inv = SparseMatrix::zeros(n, n);
    for (p, row) in &e.rows {
        for (c, x) in row {
            if *c >= n {
                inv.set(*p, c - n, x.clone());
            }
        }
    }
    Ok(inv)
}

/// Representatives of `ambient / sub` together with a projection onto
/// quotient coordinates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Quotient {
    ambient: Subspace,
    sub: Subspace,
    reps: Vec<Vec<Scalar>>,
    /// `dim × ambient_dim`; kills `sub` and sends `reps[i]` to `e_i`.
    projection: SparseMatrix,
}

impl Quotient {
    pub fn dim(&self) -> usize {
        self.reps.len()
    }

    pub fn reps(&self) -> &[Vec<Scalar>] {
        &self.reps
    }

    pub fn ambient(&self) -> &Subspace {
        &self.ambient
    }

    pub fn sub(&self) -> &Subspace {
        &self.sub
    }

    pub fn projection(&self) -> &SparseMatrix {
        &self.projection
    }

    /// Coordinates of the class of `v`; `v` must lie in the ambient space.
    pub fn class_of(&self, v: &[Scalar]) -> Result<Vec<Scalar>, LinAlgError> {
        if !self.ambient.contains(v) {
            return Err(LinAlgError::NotContained);
        }
        self.projection.apply(v)
    }

    /// The representative combination for the given class coordinates.
    pub fn lift(&self, coords: &[Scalar]) -> Vec<Scalar> {
        let mut out = zero_vec(self.ambient.ambient_dim());
        for (c, r) in coords.iter().zip(&self.reps) {
            vec_axpy(&mut out, c, r);
        }
        out
    }
}

/// Complement representatives for `sub ⊆ ambient`, chosen greedily from the
/// echelon basis of `ambient`.
pub fn quotient_basis(ambient: &Subspace, sub: &Subspace) -> Result<Quotient, LinAlgError> {
    if !ambient.contains_subspace(sub) {
        return Err(LinAlgError::ContainmentFailure);
    }
    let n = ambient.ambient_dim();
    let mut e = sub.echelon();
    let mut reps = Vec::new();
    for v in ambient.basis() {
        if e.insert(to_sparse(v)).is_some() {
            reps.push(v.clone());
        }
    }
    let mut all: Vec<Vec<Scalar>> = sub.basis().to_vec();
    all.extend(reps.iter().cloned());
    let projection = left_inverse_rows(&all, n, sub.dim())?;
    Ok(Quotient {
        ambient: ambient.clone(),
        sub: sub.clone(),
        reps,
        projection,
    })
}

/// For linearly independent `vectors`, returns the rows `skip..` of a left
/// inverse of the matrix with those columns.
fn left_inverse_rows(
    vectors: &[Vec<Scalar>],
    n: usize,
    skip: usize,
) -> Result<SparseMatrix, LinAlgError> {
    let r = vectors.len();
    let e = echelon_of(vectors.iter().map(|v| to_sparse(v)), n);
    let cols = e.pivots();
    if cols.len() != r {
        return Err(LinAlgError::Singular);
    }
    // square[j][i] = vectors[j][cols[i]]
    let mut square = SparseMatrix::zeros(r, r);
    for (j, v) in vectors.iter().enumerate() {
        for (i, &c) in cols.iter().enumerate() {
            square.set(j, i, v[c].clone());
        }
    }
    // X * square^T = I  =>  X = (square^T)^{-1}
    let x = inverse(&square.transpose())?;
    let mut out = SparseMatrix::zeros(r - skip, n);
    for (a, i, val) in x.iter() {
        if a >= skip {
            out.set(a - skip, cols[i], val.clone());
        }
    }
    Ok(out)
}
