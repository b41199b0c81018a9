//! Hochschild cochains of finite-dimensional associative algebras, the
//! Gerstenhaber bracket, the deformation dg Lie algebra, the cone tangent
//! complex with its long exact sequence, and a brute-force first-order
//! deformation count.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Zero};
use thiserror::Error;

use crate::complexes::{cohomology, cone, subcomplex, ChainMap, Cohomology, ComplexError, FinComplex};
use crate::dglie::{DgLie, DgLieError};
use crate::exactla::{
    image, int, kernel_basis, quotient_basis, unit_vec, zero_vec, LinAlgError, Scalar, SparseMatrix, Subspace,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HochError {
    #[error("invalid algebra: {0}")]
    InvalidAlgebra(String),
    #[error("arity mismatch: {0}")]
    Arity(String),
    #[error("algebra of dimension {dim} exceeds the oracle bound {bound}")]
    BoundExceeded { dim: usize, bound: usize },
    #[error(transparent)]
    Complex(#[from] ComplexError),
    #[error(transparent)]
    Lie(#[from] DgLieError),
    #[error(transparent)]
    LinAlg(#[from] LinAlgError),
}

/// A finite-dimensional unital associative algebra.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FinAssoc {
    name: String,
    dim: usize,
    /// `mu[(i*dim + j)*dim + k]` is the `e_k` coefficient of `e_i e_j`.
    mu: Vec<Scalar>,
    unit: Vec<Scalar>,
}

impl FinAssoc {
    /// `table[i][j]` is the product `e_i e_j` in coordinates.
    pub fn new(
        name: &str,
        dim: usize,
        table: &[Vec<Vec<Scalar>>],
        unit: Vec<Scalar>,
    ) -> Result<Self, HochError> {
        let bad = |s: String| Err(HochError::InvalidAlgebra(s));
        if table.len() != dim || unit.len() != dim {
            return bad("table or unit has the wrong size".into());
        }
        let mut mu = Vec::with_capacity(dim * dim * dim);
        for (i, row) in table.iter().enumerate() {
            if row.len() != dim {
                return bad(format!("row {i} has the wrong size"));
            }
            for (j, v) in row.iter().enumerate() {
                if v.len() != dim {
                    return bad(format!("product ({i},{j}) has the wrong size"));
                }
                mu.extend(v.iter().cloned());
            }
        }
        let a = FinAssoc {
            name: name.to_string(),
            dim,
            mu,
            unit,
        };
        for i in 0..dim {
            let e = unit_vec(dim, i);
            if a.mul(&a.unit, &e) != e || a.mul(&e, &a.unit) != e {
                return bad(format!("unit law fails on basis element {i}"));
            }
            for j in 0..dim {
                for k in 0..dim {
                    let (x, y, z) = (unit_vec(dim, i), unit_vec(dim, j), unit_vec(dim, k));
                    if a.mul(&a.mul(&x, &y), &z) != a.mul(&x, &a.mul(&y, &z)) {
                        return bad(format!("associativity fails on ({i},{j},{k})"));
                    }
                }
            }
        }
        Ok(a)
    }

    /// The ground field `k`.
    pub fn ground() -> Self {
        Self::new("k", 1, &[vec![vec![int(1)]]], vec![int(1)]).expect("k")
    }

    /// `k × k` with idempotent basis.
    pub fn product_kk() -> Self {
        let t = vec![
            vec![vec![int(1), int(0)], vec![int(0), int(0)]],
            vec![vec![int(0), int(0)], vec![int(0), int(1)]],
        ];
        Self::new("kxk", 2, &t, vec![int(1), int(1)]).expect("k x k")
    }

    /// `k[x]/(x^n)` with basis `1, x, …, x^{n-1}`.
    pub fn truncated_poly(n: usize) -> Self {
        let t: Vec<Vec<Vec<Scalar>>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        if i + j < n {
                            unit_vec(n, i + j)
                        } else {
                            zero_vec(n)
                        }
                    })
                    .collect()
            })
            .collect();
        Self::new(&format!("k[x]/(x^{n})"), n, &t, unit_vec(n, 0)).expect("k[x]/(x^n)")
    }

    /// 2×2 matrices with basis `E11, E12, E21, E22`.
    pub fn matrix2() -> Self {
        let idx = |r: usize, c: usize| 2 * r + c;
        let mut t = vec![vec![zero_vec(4); 4]; 4];
        for a in 0..2 {
            for b in 0..2 {
                for c in 0..2 {
                    // E_ab E_bc = E_ac
                    t[idx(a, b)][idx(b, c)] = unit_vec(4, idx(a, c));
                }
            }
        }
        let mut unit = zero_vec(4);
        unit[0] = int(1);
        unit[3] = int(1);
        Self::new("m2", 4, &t, unit).expect("M2")
    }

    /// `k`, `k×k`, `k[x]/(x²)`, `k[x]/(x³)`, `M₂(k)`.
    pub fn small_algebras() -> Vec<FinAssoc> {
        vec![
            Self::ground(),
            Self::product_kk(),
            Self::truncated_poly(2),
            Self::truncated_poly(3),
            Self::matrix2(),
        ]
    }

    /// Looks up a built-in algebra: `k`, `kxk`, `m2`, `k[x]/(x^n)`.
    pub fn named(name: &str) -> Option<Self> {
        let t: String = name.chars().filter(|c| !c.is_whitespace()).collect();
        match t.as_str() {
            "k" => Some(Self::ground()),
            "kxk" | "k×k" => Some(Self::product_kk()),
            "m2" | "M2" => Some(Self::matrix2()),
            _ => {
                let n: usize = t.strip_prefix("k[x]/(x^")?.strip_suffix(')')?.parse().ok()?;
                (n >= 1).then(|| Self::truncated_poly(n))
            }
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn unit(&self) -> &[Scalar] {
        &self.unit
    }

    pub fn basis_product(&self, i: usize, j: usize) -> &[Scalar] {
        let s = (i * self.dim + j) * self.dim;
        &self.mu[s..s + self.dim]
    }

    pub fn mul(&self, x: &[Scalar], y: &[Scalar]) -> Vec<Scalar> {
        let mut out = zero_vec(self.dim);
        for (i, a) in x.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in y.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                let ab = a * b;
                for (k, c) in self.basis_product(i, j).iter().enumerate() {
                    if !c.is_zero() {
                        out[k] += &ab * c;
                    }
                }
            }
        }
        out
    }

    /// The multiplication as an arity-2 cochain.
    pub fn mu(&self) -> HochCochain {
        HochCochain {
            arity: 2,
            dim: self.dim,
            data: self.mu.clone(),
        }
    }
}

fn sign(k: usize) -> Scalar {
    if k.is_multiple_of(2) {
        Scalar::one()
    } else {
        -Scalar::one()
    }
}

/// A multilinear map `A^{⊗n} → A`; the value on `e_{i_1}⊗…⊗e_{i_n}` sits
/// at `data[idx*dim..(idx+1)*dim]` with `idx` the base-`dim` number
/// `i_1 i_2 … i_n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HochCochain {
    arity: usize,
    dim: usize,
    data: Vec<Scalar>,
}

impl HochCochain {
    pub fn zero(arity: usize, dim: usize) -> Self {
        HochCochain {
            arity,
            dim,
            data: zero_vec(dim.pow(arity as u32) * dim),
        }
    }

    pub fn from_vec(arity: usize, dim: usize, data: Vec<Scalar>) -> Result<Self, HochError> {
        if data.len() != dim.pow(arity as u32) * dim {
            return Err(HochError::Arity(format!(
                "arity {arity} over dimension {dim} needs {} entries",
                dim.pow(arity as u32 + 1)
            )));
        }
        Ok(HochCochain { arity, dim, data })
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn data(&self) -> &[Scalar] {
        &self.data
    }

    pub fn into_data(self) -> Vec<Scalar> {
        self.data
    }

    pub fn value(&self, idx: usize) -> &[Scalar] {
        &self.data[idx * self.dim..(idx + 1) * self.dim]
    }

    /// Value on basis inputs.
    pub fn at(&self, inputs: &[usize]) -> &[Scalar] {
        self.value(encode(inputs, self.dim))
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn add_scaled(&mut self, c: &Scalar, other: &HochCochain) {
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += c * b;
        }
    }

    /// `f ∘_i g`: insert `g` at input position `i` (0-based).
    pub fn insert(&self, i: usize, g: &HochCochain) -> HochCochain {
        let (p, q, d) = (self.arity, g.arity, self.dim);
        let arity = p + q - 1;
        let mut out = HochCochain::zero(arity, d);
        let count = d.pow(arity as u32);
        for idx in 0..count {
            let js = decode(idx, arity, d);
            let inner = g.at(&js[i..i + q]);
            let mut args: Vec<usize> = Vec::with_capacity(p);
            args.extend_from_slice(&js[..i]);
            args.push(0);
            args.extend_from_slice(&js[i + q..]);
            for (k, c) in inner.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                args[i] = k;
                let v = self.at(&args);
                for (o, x) in v.iter().enumerate() {
                    if !x.is_zero() {
                        out.data[idx * d + o] += c * x;
                    }
                }
            }
        }
        out
    }

    /// `f∘g = Σ_i (−1)^{i(q−1)} f∘_i g`.
    pub fn pre_lie(&self, g: &HochCochain) -> HochCochain {
        let q = g.arity;
        let mut out = HochCochain::zero(self.arity + q - 1, self.dim);
        for i in 0..self.arity {
            out.add_scaled(&sign(i * (q + 1)), &self.insert(i, g));
        }
        out
    }
}

fn encode(inputs: &[usize], d: usize) -> usize {
    inputs.iter().fold(0, |acc, &i| acc * d + i)
}

fn decode(mut idx: usize, n: usize, d: usize) -> Vec<usize> {
    let mut out = vec![0; n];
    for k in (0..n).rev() {
        out[k] = idx % d;
        idx /= d;
    }
    out
}

/// `[f,g] = f∘g − (−1)^{(p−1)(q−1)} g∘f`.
pub fn gerstenhaber(f: &HochCochain, g: &HochCochain) -> Result<HochCochain, HochError> {
    if f.dim != g.dim || f.arity == 0 && g.arity == 0 {
        return Err(HochError::Arity("bracket needs matching dimensions".into()));
    }
    if f.arity == 0 || g.arity == 0 {
        // arity-0 cochains are elements; f∘g with p = 0 is empty
        let mut out = HochCochain::zero(f.arity + g.arity - 1, f.dim);
        if g.arity == 0 {
            out.add_scaled(&Scalar::one(), &f.pre_lie(g));
        } else {
            let s = sign((f.arity + 1) * (g.arity + 1));
            out.add_scaled(&-s, &g.pre_lie(f));
        }
        return Ok(out);
    }
    let mut out = f.pre_lie(g);
    let s = sign((f.arity - 1) * (g.arity - 1));
    out.add_scaled(&-s, &g.pre_lie(f));
    Ok(out)
}

/// The Hochschild differential on an arity-`n` cochain.
pub fn hochschild_d(a: &FinAssoc, f: &HochCochain) -> HochCochain {
    let d = a.dim;
    let n = f.arity;
    let mut out = HochCochain::zero(n + 1, d);
    for idx in 0..d.pow(n as u32 + 1) {
        let js = decode(idx, n + 1, d);
        let slot = &mut out.data[idx * d..(idx + 1) * d];
        let first = a.mul(&unit_vec(d, js[0]), f.at(&js[1..]));
        for (o, x) in first.into_iter().enumerate() {
            slot[o] += x;
        }
        for i in 1..=n {
            let prod = a.basis_product(js[i - 1], js[i]);
            let mut args: Vec<usize> = js[..i - 1].to_vec();
            args.push(0);
            args.extend_from_slice(&js[i + 1..]);
            for (k, c) in prod.iter().enumerate() {
                if c.is_zero() {
                    continue;
                }
                args[i - 1] = k;
                for (o, x) in f.at(&args).iter().enumerate() {
                    slot[o] += sign(i) * c * x;
                }
            }
        }
        let last = a.mul(f.at(&js[..n]), &unit_vec(d, js[n]));
        for (o, x) in last.into_iter().enumerate() {
            slot[o] += sign(n + 1) * x;
        }
    }
    out
}

/// Sparse matrix of `δ: C^n → C^{n+1}`, built from basis cochains.
fn hochschild_matrix(a: &FinAssoc, n: usize) -> SparseMatrix {
    let d = a.dim;
    let rows = d.pow(n as u32 + 2);
    let cols = d.pow(n as u32 + 1);
    let mut m = SparseMatrix::zeros(rows, cols);
    // preimages of each basis element under μ
    let mut pre: Vec<Vec<(usize, usize, Scalar)>> = vec![Vec::new(); d];
    for x in 0..d {
        for y in 0..d {
            for (k, c) in a.basis_product(x, y).iter().enumerate() {
                if !c.is_zero() {
                    pre[k].push((x, y, c.clone()));
                }
            }
        }
    }
    for col in 0..cols {
        let (iidx, o) = (col / d, col % d);
        let is = decode(iidx, n, d);
        // a_1 f(a_2..)
        for j in 0..d {
            let mut js = vec![j];
            js.extend_from_slice(&is);
            let base = encode(&js, d) * d;
            for (k, c) in a.basis_product(j, o).iter().enumerate() {
                if !c.is_zero() {
                    m.add_to(base + k, col, c);
                }
            }
        }
        for i in 1..=n {
            for (x, y, c) in &pre[is[i - 1]] {
                let mut js = is[..i - 1].to_vec();
                js.push(*x);
                js.push(*y);
                js.extend_from_slice(&is[i..]);
                m.add_to(encode(&js, d) * d + o, col, &(sign(i) * c));
            }
        }
        for j in 0..d {
            let mut js = is.clone();
            js.push(j);
            let base = encode(&js, d) * d;
            for (k, c) in a.basis_product(o, j).iter().enumerate() {
                if !c.is_zero() {
                    m.add_to(base + k, col, &(sign(n + 1) * c));
                }
            }
        }
    }
    m
}

/// `C^n = Hom(A^{⊗n}, A)` for `0 ≤ n ≤ n_max` with the Hochschild
/// differential.
pub fn hochschild_complex(a: &FinAssoc, n_max: usize) -> FinComplex {
    let d = a.dim;
    let dims = (0..=n_max).map(|n| d.pow(n as u32 + 1)).collect();
    let diffs = (0..n_max)
        .map(|n| (n as i32, hochschild_matrix(a, n)))
        .collect();
    FinComplex::new(0, dims, diffs).expect("δ∘δ = 0")
}

/// Cochains vanishing whenever an argument is the unit, in arity `n`.
pub fn normalized_cochains(a: &FinAssoc, n: usize) -> Subspace {
    let d = a.dim;
    let total = d.pow(n as u32 + 1);
    let mut rows: Vec<Vec<(usize, Scalar)>> = Vec::new();
    for pos in 0..n {
        for rest in 0..d.pow(n as u32 - 1) {
            let others = decode(rest, n - 1, d);
            for o in 0..d {
                let mut row = Vec::new();
                for (l, u) in a.unit.iter().enumerate() {
                    if u.is_zero() {
                        continue;
                    }
                    let mut js = others[..pos].to_vec();
                    js.push(l);
                    js.extend_from_slice(&others[pos..]);
                    row.push((encode(&js, d) * d + o, u.clone()));
                }
                rows.push(row);
            }
        }
    }
    let trip: Vec<(usize, usize, Scalar)> = rows
        .iter()
        .enumerate()
        .flat_map(|(r, row)| row.iter().map(move |(c, x)| (r, *c, x.clone())))
        .collect();
    let m = SparseMatrix::from_triplets(rows.len(), total, trip).expect("in range");
    kernel_basis(&m)
}

/// The unit-normalized subcomplex of `hochschild_complex`.
pub fn normalized_hochschild_complex(a: &FinAssoc, n_max: usize) -> Result<FinComplex, HochError> {
    let full = hochschild_complex(a, n_max);
    let spaces: BTreeMap<i32, Subspace> = (0..=n_max)
        .map(|n| (n as i32, normalized_cochains(a, n)))
        .collect();
    Ok(subcomplex(&full, &spaces)?.0)
}

/// `C^{•+1}(A,A)` on normalized cochains, arity `n+1` in degree `n` for
/// `0 ≤ n < n_max`, differential `[μ,−]`, Gerstenhaber bracket. The
/// differential out of the top degree is dropped and brackets landing above
/// arity `n_max` are overflow pairs.
#[derive(Clone, Debug)]
pub struct HochDgLie {
    lie: DgLie,
    algebra: FinAssoc,
    /// Basis cochains, in the order of the dg Lie basis.
    basis: Vec<HochCochain>,
    spaces: BTreeMap<usize, (Subspace, usize)>,
}

impl HochDgLie {
    pub fn lie(&self) -> &DgLie {
        &self.lie
    }

    pub fn algebra(&self) -> &FinAssoc {
        &self.algebra
    }

    pub fn basis_cochain(&self, i: usize) -> &HochCochain {
        &self.basis[i]
    }

    /// The cochain of arity `arity` with the given dg Lie coordinates.
    pub fn cochain(&self, x: &[Scalar], arity: usize) -> HochCochain {
        let mut out = HochCochain::zero(arity, self.algebra.dim);
        for (i, c) in x.iter().enumerate() {
            if !c.is_zero() && self.basis[i].arity == arity {
                out.add_scaled(c, &self.basis[i]);
            }
        }
        out
    }

    /// dg Lie coordinates of a normalized cochain.
    pub fn coords(&self, f: &HochCochain) -> Option<Vec<Scalar>> {
        let (space, off) = self.spaces.get(&f.arity)?;
        let c = space.coords(&f.data)?;
        let mut out = zero_vec(self.lie.dim());
        for (k, x) in c.into_iter().enumerate() {
            out[off + k] = x;
        }
        Some(out)
    }
}

pub fn deformation_dglie(a: &FinAssoc, n_max: usize) -> Result<HochDgLie, HochError> {
    let mut basis = Vec::new();
    let mut degrees = Vec::new();
    let mut spaces = BTreeMap::new();
    for arity in 1..=n_max {
        let s = normalized_cochains(a, arity);
        spaces.insert(arity, (s.clone(), basis.len()));
        for v in s.basis() {
            basis.push(HochCochain::from_vec(arity, a.dim, v.clone())?);
            degrees.push(arity as i32 - 1);
        }
    }
    let n = basis.len();
    let coords = |f: &HochCochain| -> Result<Vec<(usize, Scalar)>, HochError> {
        let (space, off) = &spaces[&f.arity];
        let c = space.coords(&f.data).ok_or(LinAlgError::NotContained)?;
        Ok(c.into_iter()
            .enumerate()
            .filter(|(_, x)| !x.is_zero())
            .map(|(k, x)| (off + k, x))
            .collect())
    };
    let mu = a.mu();
    let mut d = SparseMatrix::zeros(n, n);
    for (c, f) in basis.iter().enumerate() {
        if f.arity == n_max {
            continue;
        }
        for (r, x) in coords(&gerstenhaber(&mu, f)?)? {
            d.set(r, c, x);
        }
    }
    let mut bracket = BTreeMap::new();
    let mut overflow = BTreeSet::new();
    for (i, f) in basis.iter().enumerate() {
        for (j, g) in basis.iter().enumerate() {
            if f.arity + g.arity - 1 > n_max {
                overflow.insert((i, j));
                continue;
            }
            let b = gerstenhaber(f, g)?;
            if !b.is_zero() {
                bracket.insert((i, j), coords(&b)?);
            }
        }
    }
    Ok(HochDgLie {
        lie: DgLie::new(degrees, d, bracket, overflow)?,
        algebra: a.clone(),
        basis,
        spaces,
    })
}

/// Checks `(μ + Σ_k t^k μ_k)` is associative modulo `t^{N+1}`, `N` the
/// number of given corrections.
pub fn is_associative_deformation(a: &FinAssoc, corrections: &[HochCochain]) -> bool {
    let d = a.dim;
    let mut mus = vec![a.mu()];
    mus.extend(corrections.iter().cloned());
    let n = corrections.len();
    let apply = |m: &HochCochain, x: &[Scalar], y: &[Scalar]| -> Vec<Scalar> {
        let mut out = zero_vec(d);
        for (i, a) in x.iter().enumerate() {
            for (j, b) in y.iter().enumerate() {
                if a.is_zero() || b.is_zero() {
                    continue;
                }
                for (k, c) in m.at(&[i, j]).iter().enumerate() {
                    out[k] += a * b * c;
                }
            }
        }
        out
    };
    for i in 0..d {
        for j in 0..d {
            for k in 0..d {
                let (x, y, z) = (unit_vec(d, i), unit_vec(d, j), unit_vec(d, k));
                for order in 0..=n {
                    let mut assoc = zero_vec(d);
                    for p in 0..=order {
                        let q = order - p;
                        let l = apply(&mus[p], &apply(&mus[q], &x, &y), &z);
                        let r = apply(&mus[p], &x, &apply(&mus[q], &y, &z));
                        for t in 0..d {
                            assoc[t] += &l[t] - &r[t];
                        }
                    }
                    if assoc.iter().any(|v| !v.is_zero()) {
                        return false;
                    }
                }
            }
        }
    }
    true
}

/// One node of a long exact sequence.
#[derive(Clone, Debug)]
pub struct LesNode {
    pub label: String,
    pub dim: usize,
    /// `None` at the ends of the displayed range.
    pub exact: Option<bool>,
}

#[derive(Clone, Debug)]
pub struct LesReport {
    pub nodes: Vec<LesNode>,
    /// Matrices between consecutive nodes.
    pub maps: Vec<SparseMatrix>,
    pub cone: FinComplex,
    pub top_reliable: i32,
}

impl LesReport {
    pub fn is_exact(&self) -> bool {
        self.nodes.iter().all(|n| n.exact != Some(false))
    }

    pub fn node(&self, label: &str) -> Option<&LesNode> {
        self.nodes.iter().find(|n| n.label == label)
    }
}

fn exact_at(incoming: &SparseMatrix, outgoing: &SparseMatrix) -> Result<bool, LinAlgError> {
    let im = image(incoming);
    let ker = kernel_basis(outgoing);
    if im.ambient_dim() != ker.ambient_dim() {
        return Err(LinAlgError::DimensionMismatch {
            expected: ker.ambient_dim(),
            found: im.ambient_dim(),
            context: "exactness check",
        });
    }
    Ok(im.dim() == ker.dim() && ker.contains_subspace(&im))
}

/// `Cone(π: C^* → A)` with `π` the arity-0 projection, and the sequence
/// `HH^i → H^i(A) → H^i(Cone) → HH^{i+1}` for `−1 ≤ i ≤ n_max − 2`.
pub fn tangent_cone_complex(a: &FinAssoc, n_max: usize) -> Result<LesReport, HochError> {
    if n_max < 2 {
        return Err(HochError::Arity("the sequence needs n_max ≥ 2".into()));
    }
    let s = hochschild_complex(a, n_max);
    let t = FinComplex::concentrated(0, a.dim);
    let pi = ChainMap::new(
        s.clone(),
        t.clone(),
        BTreeMap::from([(0, SparseMatrix::identity(a.dim))]),
    )?;
    let c = cone(&pi);
    let iota = {
        let mut maps = BTreeMap::new();
        maps.insert(0, {
            let mut m = SparseMatrix::zeros(c.dim(0), a.dim);
            m.add_block(0, 0, &SparseMatrix::identity(a.dim));
            m
        });
        ChainMap::new(t.clone(), c.clone(), maps)?
    };
    let s1 = s.shift(1);
    let proj = {
        let mut maps = BTreeMap::new();
        for n in c.degrees() {
            let tn = t.dim(n);
            let sn = s.dim(n + 1);
            let mut m = SparseMatrix::zeros(sn, c.dim(n));
            m.add_block(0, tn, &SparseMatrix::identity(sn));
            maps.insert(n, m);
        }
        ChainMap::new(c.clone(), s1.clone(), maps)?
    };
    let (hs, ht, hc, hs1) = (cohomology(&s), cohomology(&t), cohomology(&c), cohomology(&s1));
    let top = n_max as i32 - 2;
    let mut nodes: Vec<LesNode> = Vec::new();
    let mut maps: Vec<SparseMatrix> = Vec::new();
    let push_node = |nodes: &mut Vec<LesNode>, label: String, h: &Cohomology, n: i32| {
        nodes.push(LesNode {
            label,
            dim: h.dim(n),
            exact: None,
        })
    };
    push_node(&mut nodes, "H^-1(Cone)".into(), &hc, -1);
    maps.push(proj.induced(-1, &hc, &hs1));
    for i in 0..=top + 1 {
        push_node(&mut nodes, format!("HH^{i}"), &hs, i);
        if i == top + 1 {
            break;
        }
        maps.push(pi.induced(i, &hs, &ht));
        push_node(&mut nodes, format!("H^{i}(A)"), &ht, i);
        maps.push(iota.induced(i, &ht, &hc));
        push_node(&mut nodes, format!("H^{i}(Cone)"), &hc, i);
        maps.push(proj.induced(i, &hc, &hs1));
    }
    for k in 1..nodes.len() - 1 {
        nodes[k].exact = Some(exact_at(&maps[k - 1], &maps[k])?);
    }
    Ok(LesReport {
        nodes,
        maps,
        cone: c,
        top_reliable: top,
    })
}

/// First-order deformation count from the linearized associativity
/// equations of `μ + εμ₁` modulo the linearized conjugations by `1 + εφ`.
#[derive(Clone, Debug)]
pub struct FirstOrder {
    pub dim: usize,
    pub representatives: Vec<HochCochain>,
}

/// Dual numbers `a + εb`.
#[derive(Clone, Debug, PartialEq)]
struct Dual(Scalar, Scalar);

impl Dual {
    fn mul(&self, o: &Dual) -> Dual {
        Dual(&self.0 * &o.0, &self.0 * &o.1 + &self.1 * &o.0)
    }
    fn add(&self, o: &Dual) -> Dual {
        Dual(&self.0 + &o.0, &self.1 + &o.1)
    }
}

pub const ORACLE_BOUND: usize = 4;

pub fn brute_first_order(a: &FinAssoc) -> Result<FirstOrder, HochError> {
    let d = a.dim;
    if d > ORACLE_BOUND {
        return Err(HochError::BoundExceeded {
            dim: d,
            bound: ORACLE_BOUND,
        });
    }
    let n_unknowns = d * d * d;
    // product of dual-number vectors under μ + εμ₁
    let prod = |mu1: &[Scalar], x: &[Dual], y: &[Dual]| -> Vec<Dual> {
        let zero = Dual(Scalar::zero(), Scalar::zero());
        let mut out = vec![zero; d];
        for i in 0..d {
            for j in 0..d {
                let xy = x[i].mul(&y[j]);
                if xy.0.is_zero() && xy.1.is_zero() {
                    continue;
                }
                for k in 0..d {
                    let c = Dual(
                        a.basis_product(i, j)[k].clone(),
                        mu1[(i * d + j) * d + k].clone(),
                    );
                    out[k] = out[k].add(&xy.mul(&c));
                }
            }
        }
        out
    };
    let basis_dual = |i: usize| -> Vec<Dual> {
        (0..d)
            .map(|k| Dual(if k == i { Scalar::one() } else { Scalar::zero() }, Scalar::zero()))
            .collect()
    };
    // linearized associator columns
    let mut eq_cols = Vec::with_capacity(n_unknowns);
    for u in 0..n_unknowns {
        let mut mu1 = zero_vec(n_unknowns);
        mu1[u] = Scalar::one();
        let mut col = Vec::with_capacity(d * d * d * d);
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    let (x, y, z) = (basis_dual(i), basis_dual(j), basis_dual(k));
                    let l = prod(&mu1, &prod(&mu1, &x, &y), &z);
                    let r = prod(&mu1, &x, &prod(&mu1, &y, &z));
                    for t in 0..d {
                        col.push(&l[t].1 - &r[t].1);
                    }
                }
            }
        }
        eq_cols.push(col);
    }
    let eqs = SparseMatrix::from_columns(d.pow(4), &eq_cols);
    let solutions = kernel_basis(&eqs);
    // gauge: ε-part of (1+εφ)^{-1} μ((1+εφ)x, (1+εφ)y)
    let mut gauge = Vec::new();
    for p in 0..d * d {
        let (r, c) = (p / d, p % d);
        let phi = |v: &[Scalar]| -> Vec<Scalar> {
            let mut out = zero_vec(d);
            out[r] = v[c].clone();
            out
        };
        let mut g = zero_vec(n_unknowns);
        for i in 0..d {
            for j in 0..d {
                let (x, y) = (unit_vec(d, i), unit_vec(d, j));
                let t1 = a.mul(&phi(&x), &y);
                let t2 = a.mul(&x, &phi(&y));
                let t3 = phi(&a.mul(&x, &y));
                for k in 0..d {
                    g[(i * d + j) * d + k] = &t1[k] + &t2[k] - &t3[k];
                }
            }
        }
        gauge.push(g);
    }
    let gauge_space = Subspace::span(n_unknowns, &gauge)?;
    let q = quotient_basis(&solutions, &gauge_space)?;
    let representatives = q
        .reps()
        .iter()
        .map(|v| HochCochain::from_vec(2, d, v.clone()))
        .collect::<Result<_, _>>()?;
    Ok(FirstOrder {
        dim: q.dim(),
        representatives,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complexes::cohomology;
    use crate::dglie::{is_mc, kuranishi, validate_dglie, ArtinBase};
    use proptest::prelude::*;

    fn hh(a: &FinAssoc, n_max: usize) -> Vec<usize> {
        let h = cohomology(&hochschild_complex(a, n_max));
        (0..n_max as i32).map(|i| h.dim(i)).collect()
    }

    #[test]
    fn hochschild_numbers() {
        assert_eq!(hh(&FinAssoc::ground(), 3), vec![1, 0, 0]);
        assert_eq!(hh(&FinAssoc::truncated_poly(2), 3), vec![2, 1, 1]);
        assert_eq!(hh(&FinAssoc::product_kk(), 3), vec![2, 0, 0]);
        assert_eq!(hh(&FinAssoc::truncated_poly(3), 3), vec![3, 2, 2]);
    }

    #[test]
    fn normalized_agrees_with_full() {
        for a in [FinAssoc::truncated_poly(2), FinAssoc::truncated_poly(3), FinAssoc::product_kk()] {
            let full = cohomology(&hochschild_complex(&a, 3));
            let norm = cohomology(&normalized_hochschild_complex(&a, 3).unwrap());
            for i in 0..3 {
                assert_eq!(full.dim(i), norm.dim(i), "{} degree {i}", a.name());
            }
        }
    }

    #[test]
    fn bracket_and_differential() {
        for a in FinAssoc::small_algebras() {
            let mu = a.mu();
            assert!(gerstenhaber(&mu, &mu).unwrap().is_zero(), "{}", a.name());
        }
        let a = FinAssoc::truncated_poly(3);
        let mut bad = a.mu();
        bad.data[0] = int(2);
        assert!(!gerstenhaber(&bad, &bad).unwrap().is_zero());
        assert!(hochschild_matrix(&a, 1).mul(&hochschild_matrix(&a, 0)).unwrap().is_zero());
    }

    #[test]
    fn differential_matches_matrix() {
        let a = FinAssoc::truncated_poly(2);
        let f = HochCochain::from_vec(2, 2, (0..8).map(|i| int(i - 3)).collect()).unwrap();
        let dense = hochschild_d(&a, &f);
        let sparse = hochschild_matrix(&a, 2).apply(f.data()).unwrap();
        assert_eq!(dense.data(), &sparse[..]);
    }

    #[test]
    fn brute_oracle() {
        assert_eq!(brute_first_order(&FinAssoc::ground()).unwrap().dim, 0);
        assert_eq!(brute_first_order(&FinAssoc::truncated_poly(2)).unwrap().dim, 1);
        assert_eq!(brute_first_order(&FinAssoc::product_kk()).unwrap().dim, 0);
        assert_eq!(brute_first_order(&FinAssoc::truncated_poly(3)).unwrap().dim, 2);
        assert!(matches!(
            brute_first_order(&FinAssoc::truncated_poly(5)),
            Err(HochError::BoundExceeded { .. })
        ));
    }

    #[test]
    fn deformation_dglie_of_dual_numbers() {
        for a in [FinAssoc::truncated_poly(2), FinAssoc::truncated_poly(3), FinAssoc::product_kk()] {
            let g = deformation_dglie(&a, 3).unwrap();
            assert!(validate_dglie(g.lie()).is_valid(), "{}", a.name());
            let h = cohomology(&g.lie().complex().unwrap());
            assert_eq!(h.dim(1), brute_first_order(&a).unwrap().dim);
        }
    }

    #[test]
    fn witness_lifts_to_second_order() {
        let a = FinAssoc::truncated_poly(3);
        let g = deformation_dglie(&a, 3).unwrap();
        let r = ArtinBase::truncated_poly(2);
        let k = kuranishi(g.lie(), &r, None).unwrap();
        assert_eq!(k.h1, 2);
        for point in [vec![int(1), int(0), int(0), int(0)], vec![int(0), int(1), int(2), int(-1)]] {
            assert!(k.obstruction_at(&point).iter().all(|x| x.is_zero()));
            let z = k.witness(&point).unwrap();
            assert!(is_mc(k.nilp().lie(), &z).unwrap());
            let corr: Vec<HochCochain> = (0..r.dim())
                .map(|i| g.cochain(&k.nilp().component(&z, i), 2))
                .collect();
            assert!(is_associative_deformation(&a, &corr));
        }
    }

    #[test]
    fn les_small() {
        for a in [FinAssoc::ground(), FinAssoc::truncated_poly(2)] {
            let rep = tangent_cone_complex(&a, 4).unwrap();
            assert!(rep.is_exact(), "{}", a.name());
        }
        let rep = tangent_cone_complex(&FinAssoc::truncated_poly(2), 4).unwrap();
        assert_eq!(rep.node("H^1(Cone)").unwrap().dim, rep.node("HH^2").unwrap().dim);
        assert_eq!(rep.node("H^2(Cone)").unwrap().dim, rep.node("HH^3").unwrap().dim);
    }

    #[test]
    fn matrix_algebra_is_rigid() {
        let a = FinAssoc::matrix2();
        assert_eq!(hh(&a, 3), vec![1, 0, 0]);
        let g = deformation_dglie(&a, 3).unwrap();
        let k = kuranishi(g.lie(), &ArtinBase::truncated_poly(2), None).unwrap();
        assert!(k.domain_is_point());
        let rep = tangent_cone_complex(&a, 4).unwrap();
        assert!(rep.is_exact());
        for i in 1..=2 {
            assert_eq!(rep.node(&format!("H^{i}(Cone)")).unwrap().dim, 0);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(30))]
        #[test]
        fn bracket_laws(
            xs in proptest::collection::vec(-2i64..3, 4 + 8 + 16),
        ) {
            let a = FinAssoc::truncated_poly(2);
            let f = HochCochain::from_vec(1, 2, xs[..4].iter().map(|&v| int(v)).collect()).unwrap();
            let g = HochCochain::from_vec(2, 2, xs[4..12].iter().map(|&v| int(v)).collect()).unwrap();
            let h = HochCochain::from_vec(1, 2, xs[..4].iter().rev().map(|&v| int(v)).collect()).unwrap();
            // [μ,−] is ±δ
            for (c, q) in [(&f, 1usize), (&g, 2)] {
                let lhs = gerstenhaber(&a.mu(), c).unwrap();
                let mut rhs = hochschild_d(&a, c);
                rhs.data.iter_mut().for_each(|x| *x = &*x * sign(q + 1));
                prop_assert_eq!(lhs, rhs);
            }
            // antisymmetry and Jacobi on arities (1,2,1)
            let fg = gerstenhaber(&f, &g).unwrap();
            let gf = gerstenhaber(&g, &f).unwrap();
            let mut s = fg.clone();
            s.add_scaled(&Scalar::one(), &gf);
            prop_assert!(s.is_zero());
            // degrees 0, 1, 0
            let lhs = gerstenhaber(&f, &gerstenhaber(&g, &h).unwrap()).unwrap();
            let mut rhs = gerstenhaber(&fg, &h).unwrap();
            rhs.add_scaled(&Scalar::one(), &gerstenhaber(&g, &gerstenhaber(&f, &h).unwrap()).unwrap());
            prop_assert_eq!(lhs, rhs);
        }
    }
}
