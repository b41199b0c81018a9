//! Finite group actions on dg Lie algebras, associative algebras and sites;
//! Reynolds averaging, the quotient site `X/G` and equivariant Kuranishi
//! data. In characteristic zero the derived invariants of a finite group are
//! the plain invariants, computed by averaging.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::complexes::{cohomology, ChainMap, ComplexError};
use crate::dglie::{kuranishi, ArtinBase, DgLie, DgLieError, KuranishiData};
use crate::exactla::{frac, image, int, inverse, unit_vec, LinAlgError, Scalar, SparseMatrix, Subspace};
use crate::hochschild::{FinAssoc, HochCochain, HochDgLie};
use crate::site::FinSite;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EquivariantError {
    #[error("invalid group: {0}")]
    InvalidGroup(String),
    #[error("not an action: {0}")]
    NotAction(String),
    #[error(transparent)]
    Lie(#[from] DgLieError),
    #[error(transparent)]
    Complex(#[from] ComplexError),
    #[error(transparent)]
    LinAlg(#[from] LinAlgError),
}

/// A finite group by its multiplication table; `table[a][b] = ab`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FinGroup {
    names: Vec<String>,
    table: Vec<Vec<usize>>,
    identity: usize,
    inverses: Vec<usize>,
}

impl FinGroup {
    pub fn new(names: Vec<String>, table: Vec<Vec<usize>>) -> Result<Self, EquivariantError> {
        let n = names.len();
        let bad = |s: String| Err(EquivariantError::InvalidGroup(s));
        if n == 0 {
            return bad("empty element list".into());
        }
        if table.len() != n || table.iter().any(|r| r.len() != n || r.iter().any(|&x| x >= n)) {
            return bad("table is not a closed n×n array".into());
        }
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if table[table[a][b]][c] != table[a][table[b][c]] {
                        return bad(format!("associativity fails on ({},{},{})", names[a], names[b], names[c]));
                    }
                }
            }
        }
        let Some(identity) = (0..n).find(|&e| (0..n).all(|a| table[e][a] == a && table[a][e] == a)) else {
            return bad("no identity element".into());
        };
        let mut inverses = Vec::with_capacity(n);
        for a in 0..n {
            match (0..n).find(|&b| table[a][b] == identity && table[b][a] == identity) {
                Some(b) => inverses.push(b),
                None => return bad(format!("{} has no inverse", names[a])),
            }
        }
        Ok(FinGroup {
            names,
            table,
            identity,
            inverses,
        })
    }

    pub fn trivial() -> Self {
        Self::cyclic(1)
    }

    /// `C_n = {g^0, …, g^{n−1}}`.
    pub fn cyclic(n: usize) -> Self {
        let names = (0..n).map(|i| format!("g^{i}")).collect();
        let table = (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect();
        Self::new(names, table).expect("cyclic group")
    }

    pub fn order(&self) -> usize {
        self.names.len()
    }

    pub fn name(&self, a: usize) -> &str {
        &self.names[a]
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a][b]
    }

    pub fn inverse(&self, a: usize) -> usize {
        self.inverses[a]
    }
}

fn check_composition<T: PartialEq>(
    g: &FinGroup,
    items: &[T],
    compose: impl Fn(&T, &T) -> T,
    is_identity: impl Fn(&T) -> bool,
) -> Result<(), EquivariantError> {
    if items.len() != g.order() {
        return Err(EquivariantError::NotAction(format!(
            "{} structure maps for a group of order {}",
            items.len(),
            g.order()
        )));
    }
    if !is_identity(&items[g.identity()]) {
        return Err(EquivariantError::NotAction("identity does not act trivially".into()));
    }
    for a in 0..g.order() {
        for b in 0..g.order() {
            if compose(&items[a], &items[b]) != items[g.mul(a, b)] {
                return Err(EquivariantError::NotAction(format!(
                    "action of {}·{} is not the composite",
                    g.name(a),
                    g.name(b)
                )));
            }
        }
    }
    Ok(())
}

/// A linear action on a dg Lie algebra by automorphisms.
#[derive(Clone, Debug)]
pub struct DgLieAction {
    pub group: FinGroup,
    pub matrices: Vec<SparseMatrix>,
}

impl DgLieAction {
    pub fn new(g: &DgLie, group: FinGroup, matrices: Vec<SparseMatrix>) -> Result<Self, EquivariantError> {
        check_composition(
            &group,
            &matrices,
            |a, b| a.mul(b).unwrap_or_else(|_| SparseMatrix::zeros(0, 0)),
            |m| *m == SparseMatrix::identity(g.dim()),
        )?;
        for (a, m) in matrices.iter().enumerate() {
            if !g.is_morphism_to(m, g) {
                return Err(EquivariantError::NotAction(format!(
                    "{} does not preserve degrees, d and the bracket",
                    group.name(a)
                )));
            }
        }
        Ok(DgLieAction { group, matrices })
    }

    pub fn trivial(g: &DgLie) -> Self {
        DgLieAction {
            group: FinGroup::trivial(),
            matrices: vec![SparseMatrix::identity(g.dim())],
        }
    }

    /// `e = (1/|G|) Σ_γ γ`.
    pub fn reynolds(&self) -> SparseMatrix {
        let n = self.matrices[0].rows();
        let mut e = SparseMatrix::zeros(n, n);
        for m in &self.matrices {
            e = e.add(m).expect("square");
        }
        e.scale(&frac(1, self.group.order() as i64))
    }
}

/// An action on an associative algebra by unital algebra automorphisms.
#[derive(Clone, Debug)]
pub struct AlgebraAction {
    pub group: FinGroup,
    pub matrices: Vec<SparseMatrix>,
}

impl AlgebraAction {
    pub fn new(a: &FinAssoc, group: FinGroup, matrices: Vec<SparseMatrix>) -> Result<Self, EquivariantError> {
        let d = a.dim();
        check_composition(
            &group,
            &matrices,
            |x, y| x.mul(y).unwrap_or_else(|_| SparseMatrix::zeros(0, 0)),
            |m| *m == SparseMatrix::identity(d),
        )?;
        for (g, m) in matrices.iter().enumerate() {
            if m.rows() != d || m.cols() != d {
                return Err(EquivariantError::NotAction("matrix has the wrong size".into()));
            }
            let fails = |s: &str| {
                Err(EquivariantError::NotAction(format!("{} does not preserve the {s}", group.name(g))))
            };
            if m.apply(a.unit())? != a.unit() {
                return fails("unit");
            }
            for i in 0..d {
                for j in 0..d {
                    let lhs = m.apply(a.basis_product(i, j))?;
                    let rhs = a.mul(&m.column(i), &m.column(j));
                    if lhs != rhs {
                        return fails("product");
                    }
                }
            }
        }
        Ok(AlgebraAction { group, matrices })
    }

    /// `k[x]/(x^n)` with `x ↦ −x`.
    pub fn sign_flip(n: usize) -> (FinAssoc, Self) {
        let a = FinAssoc::truncated_poly(n);
        let flip = SparseMatrix::from_triplets(
            n,
            n,
            (0..n).map(|i| (i, i, if i % 2 == 0 { int(1) } else { int(-1) })),
        )
        .expect("diagonal");
        let act = Self::new(&a, FinGroup::cyclic(2), vec![SparseMatrix::identity(n), flip]).expect("x ↦ −x");
        (a, act)
    }

    /// Conjugation action `f ↦ γ∘f∘(γ⁻¹)^{⊗n}` on the deformation dg Lie.
    pub fn on_cochains(&self, h: &HochDgLie) -> Result<DgLieAction, EquivariantError> {
        let g = h.lie();
        let inverses: Vec<SparseMatrix> = self.matrices.iter().map(inverse).collect::<Result<_, _>>()?;
        let mut mats = Vec::with_capacity(self.group.order());
        for (m, minv) in self.matrices.iter().zip(&inverses) {
            let mut cols = Vec::with_capacity(g.dim());
            for i in 0..g.dim() {
                let f = h.basis_cochain(i);
                let c = conjugate(f, m, minv)?;
                cols.push(h.coords(&c).ok_or(LinAlgError::NotContained)?);
            }
            mats.push(SparseMatrix::from_columns(g.dim(), &cols));
        }
        DgLieAction::new(g, self.group.clone(), mats)
    }
}

fn conjugate(f: &HochCochain, m: &SparseMatrix, minv: &SparseMatrix) -> Result<HochCochain, EquivariantError> {
    let (n, d) = (f.arity(), f.dim());
    let count = d.pow(n as u32);
    let cols: Vec<Vec<Scalar>> = (0..d).map(|j| minv.column(j)).collect();
    let mut data = vec![Scalar::zero(); count * d];
    for idx in 0..count {
        // expand (γ⁻¹)^{⊗n} on the basis tensor idx
        let mut digits = vec![0usize; n];
        let mut r = idx;
        for k in (0..n).rev() {
            digits[k] = r % d;
            r /= d;
        }
        let mut acc = vec![Scalar::zero(); d];
        let mut stack: Vec<(usize, usize, Scalar)> = vec![(0, 0, Scalar::one())];
        while let Some((pos, code, c)) = stack.pop() {
            if pos == n {
                for (o, x) in f.value(code).iter().enumerate() {
                    acc[o] += &c * x;
                }
                continue;
            }
            for (l, x) in cols[digits[pos]].iter().enumerate() {
                if !x.is_zero() {
                    stack.push((pos + 1, code * d + l, &c * x));
                }
            }
        }
        let out = m.apply(&acc)?;
        data[idx * d..(idx + 1) * d].clone_from_slice(&out);
    }
    Ok(HochCochain::from_vec(n, d, data).expect("same shape"))
}

/// An action on a site by order automorphisms carrying covers to covers.
#[derive(Clone, Debug)]
pub struct SiteAction {
    pub group: FinGroup,
    pub perms: Vec<Vec<usize>>,
}

impl SiteAction {
    pub fn new(x: &FinSite, group: FinGroup, perms: Vec<Vec<usize>>) -> Result<Self, EquivariantError> {
        let n = x.len();
        check_composition(
            &group,
            &perms,
            |p, q| (0..p.len()).map(|u| p.get(q[u]).copied().unwrap_or(usize::MAX)).collect(),
            |p| p.iter().enumerate().all(|(i, &j)| i == j) && p.len() == n,
        )?;
        let norm = |mut v: Vec<usize>| {
            v.sort_unstable();
            v
        };
        for (g, p) in perms.iter().enumerate() {
            let bad = |s: String| Err(EquivariantError::NotAction(format!("{}: {s}", group.name(g))));
            let mut seen = vec![false; n];
            for &v in p {
                if v >= n || seen[v] {
                    return bad("not a permutation of the objects".into());
                }
                seen[v] = true;
            }
            for a in 0..n {
                for b in 0..n {
                    if x.leq(a, b) != x.leq(p[a], p[b]) {
                        return bad(format!("order not preserved at ({}, {})", x.name(a), x.name(b)));
                    }
                }
                for fam in x.covers(a) {
                    let img = norm(fam.iter().map(|&v| p[v]).collect());
                    if !x.covers(p[a]).iter().any(|f| norm(f.clone()) == img) {
                        return bad(format!("cover of {} not sent to a cover", x.name(a)));
                    }
                }
            }
            for gc in x.global_covers() {
                let img = norm(gc.members.iter().map(|&v| p[v]).collect());
                if !x.global_covers().iter().any(|h| norm(h.members.clone()) == img) {
                    return bad(format!("global cover {} not sent to a global cover", gc.name));
                }
            }
        }
        Ok(SiteAction { group, perms })
    }

    /// `C₂` exchanging the two charts of the P¹ model.
    pub fn p1_swap(x: &FinSite) -> Result<Self, EquivariantError> {
        let (u0, u1, u01) = (
            x.index_of("U0").ok_or_else(|| EquivariantError::NotAction("no U0".into()))?,
            x.index_of("U1").ok_or_else(|| EquivariantError::NotAction("no U1".into()))?,
            x.index_of("U01").ok_or_else(|| EquivariantError::NotAction("no U01".into()))?,
        );
        let mut swap: Vec<usize> = (0..x.len()).collect();
        swap[u0] = u1;
        swap[u1] = u0;
        swap[u01] = u01;
        Self::new(x, FinGroup::cyclic(2), vec![(0..x.len()).collect(), swap])
    }

    pub fn act(&self, g: usize, u: usize) -> usize {
        self.perms[g][u]
    }
}

/// Invariant sub-dg Lie algebra with its inclusion and the projector.
#[derive(Clone, Debug)]
pub struct Invariants {
    pub lie: DgLie,
    /// Columns are the invariant basis in the ambient coordinates.
    pub inclusion: SparseMatrix,
    pub projector: SparseMatrix,
}

pub fn invariants(g: &DgLie, act: &DgLieAction) -> Result<Invariants, EquivariantError> {
    let e = act.reynolds();
    if e.mul(&e)? != e {
        return Err(EquivariantError::NotAction("averaging is not idempotent".into()));
    }
    let mut basis: Vec<Vec<Scalar>> = Vec::new();
    let mut degrees = Vec::new();
    if let Some((lo, hi)) = g.degree_range() {
        for n in lo..=hi {
            let cols: Vec<Vec<Scalar>> = g
                .basis_in_degree(n)
                .into_iter()
                .map(|i| e.apply(&unit_vec(g.dim(), i)).expect("square"))
                .collect();
            let s = Subspace::span(g.dim(), &cols)?;
            for v in s.basis() {
                basis.push(v.clone());
                degrees.push(n);
            }
        }
    }
    let m = basis.len();
    let space = Subspace::span(g.dim(), &basis)?;
    let incl = SparseMatrix::from_columns(g.dim(), &basis);
    // coordinates in `basis` order
    let to_space = |v: &[Scalar]| -> Result<Vec<Scalar>, EquivariantError> {
        let c = space.coords(v).ok_or(LinAlgError::NotContained)?;
        let w = space.combine(&c);
        let sol = crate::exactla::solve(&incl, &w)?.ok_or(LinAlgError::NotContained)?;
        Ok(sol)
    };
    let mut dcols = Vec::with_capacity(m);
    for v in &basis {
        dcols.push(to_space(&g.d_apply(v))?);
    }
    let d = SparseMatrix::from_columns(m, &dcols);
    let mut bracket = BTreeMap::new();
    let mut overflow = std::collections::BTreeSet::new();
    for (i, x) in basis.iter().enumerate() {
        for (j, y) in basis.iter().enumerate() {
            match g.bracket(x, y) {
                Ok(b) => {
                    let c = to_space(&b)?;
                    let row: Vec<(usize, Scalar)> =
                        c.into_iter().enumerate().filter(|(_, v)| !v.is_zero()).collect();
                    if !row.is_empty() {
                        bracket.insert((i, j), row);
                    }
                }
                Err(DgLieError::Overflow(..)) => {
                    overflow.insert((i, j));
                }
                Err(err) => return Err(err.into()),
            }
        }
    }
    Ok(Invariants {
        lie: DgLie::new(degrees, d, bracket, overflow)?,
        inclusion: incl,
        projector: e,
    })
}

/// Per degree: `dim H(g^G)` against the rank of averaging on `H(g)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AveragingReport {
    pub degrees: Vec<(i32, usize, usize)>,
}

impl AveragingReport {
    pub fn agrees(&self) -> bool {
        self.degrees.iter().all(|(_, a, b)| a == b)
    }
}

pub fn averaging_comparison(g: &DgLie, act: &DgLieAction) -> Result<AveragingReport, EquivariantError> {
    let inv = invariants(g, act)?;
    let before = cohomology(&inv.lie.complex()?);
    let c = g.complex()?;
    let h = cohomology(&c);
    let mut maps = BTreeMap::new();
    for n in c.degrees() {
        let idx = g.basis_in_degree(n);
        let mut m = SparseMatrix::zeros(idx.len(), idx.len());
        for (r, &i) in idx.iter().enumerate() {
            for (k, &j) in idx.iter().enumerate() {
                let x = inv.projector.get(i, j);
                if !x.is_zero() {
                    m.set(r, k, x);
                }
            }
        }
        maps.insert(n, m);
    }
    let e = ChainMap::new(c.clone(), c.clone(), maps)?;
    let degrees = c
        .degrees()
        .map(|n| (n, before.dim(n), e.induced(n, &h, &h).rank()))
        .collect();
    Ok(AveragingReport { degrees })
}

/// `X/G`: same objects, `Hom(U, V) = {γ : U ≤ γV}`, and the composite of
/// `γ: U → V` with `δ: V → W` is `γδ`.
#[derive(Clone, Debug)]
pub struct QuotientSite {
    pub names: Vec<String>,
    pub homs: BTreeMap<(usize, usize), Vec<usize>>,
    /// Families `{(e, V_i → U)}` generating the topology.
    pub covers: Vec<(usize, Vec<usize>)>,
    pub composable_triples: usize,
    pub law_failures: Vec<String>,
}

impl QuotientSite {
    pub fn hom(&self, u: usize, v: usize) -> &[usize] {
        self.homs.get(&(u, v)).map(|v| v.as_slice()).unwrap_or(&[])
    }

    pub fn laws_hold(&self) -> bool {
        self.law_failures.is_empty()
    }

    /// True when every Hom set has at most one element, with one exactly
    /// when `U ≤ V` in `x`.
    pub fn is_poset_of(&self, x: &FinSite) -> bool {
        (0..x.len()).all(|u| (0..x.len()).all(|v| self.hom(u, v).len() == usize::from(x.leq(u, v))))
    }
}

pub fn quotient_site(x: &FinSite, act: &SiteAction) -> QuotientSite {
    let g = &act.group;
    let n = x.len();
    let mut homs = BTreeMap::new();
    for u in 0..n {
        for v in 0..n {
            let hs: Vec<usize> = (0..g.order()).filter(|&c| x.leq(u, act.act(c, v))).collect();
            if !hs.is_empty() {
                homs.insert((u, v), hs);
            }
        }
    }
    let hom = |u: usize, v: usize| homs.get(&(u, v)).cloned().unwrap_or_default();
    let mut failures = Vec::new();
    let name = |u: usize| x.name(u).to_string();
    for u in 0..n {
        if !hom(u, u).contains(&g.identity()) {
            failures.push(format!("no identity on {}", name(u)));
        }
        for v in 0..n {
            for &a in &hom(u, v) {
                if g.mul(g.identity(), a) != a || g.mul(a, g.identity()) != a {
                    failures.push(format!("identity law fails on {}→{}", name(u), name(v)));
                }
            }
        }
    }
    let mut triples = 0;
    for u in 0..n {
        for v in 0..n {
            for w in 0..n {
                for &a in &hom(u, v) {
                    for &b in &hom(v, w) {
                        if !hom(u, w).contains(&g.mul(a, b)) {
                            failures.push(format!(
                                "composite {}·{} leaves Hom({}, {})",
                                g.name(a),
                                g.name(b),
                                name(u),
                                name(w)
                            ));
                        }
                        for z in 0..n {
                            for &c in &hom(w, z) {
                                triples += 1;
                                if g.mul(g.mul(a, b), c) != g.mul(a, g.mul(b, c)) {
                                    failures.push(format!(
                                        "associativity fails on {}→{}→{}→{}",
                                        name(u),
                                        name(v),
                                        name(w),
                                        name(z)
                                    ));
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    let covers = (0..n)
        .flat_map(|u| x.covers(u).iter().map(move |f| (u, f.clone())))
        .collect();
    QuotientSite {
        names: x.names().to_vec(),
        homs,
        covers,
        composable_triples: triples,
        law_failures: failures,
    }
}

/// Kuranishi data of the invariants together with the forgetful comparison.
#[derive(Clone, Debug)]
pub struct EquivariantKuranishi {
    pub invariants: Invariants,
    pub data: KuranishiData,
    pub plain: KuranishiData,
    /// Rank of `H¹(g^G) → H¹(g)`.
    pub forgetful_rank: usize,
    pub witnesses_checked: usize,
    pub witnesses_invariant: bool,
}

pub fn equivariant_kuranishi(
    g: &DgLie,
    act: &DgLieAction,
    r: &ArtinBase,
) -> Result<EquivariantKuranishi, EquivariantError> {
    let inv = invariants(g, act)?;
    let data = kuranishi(&inv.lie, r, None)?;
    let plain = kuranishi(g, r, None)?;
    let forgetful_rank = {
        let src = cohomology(&inv.lie.complex()?);
        let tgt = cohomology(&g.complex()?);
        match (src.group(1), tgt.group(1)) {
            (Some(hs), Some(ht)) => {
                let cols: Vec<Vec<Scalar>> = hs
                    .reps()
                    .iter()
                    .map(|rep| {
                        let v = inv.lie.from_block(1, rep);
                        let amb = inv.inclusion.apply(&v).expect("shape");
                        ht.class_of(&g.to_block(1, &amb)).expect("cocycle")
                    })
                    .collect();
                SparseMatrix::from_columns(ht.dim(), &cols).rank()
            }
            _ => 0,
        }
    };
    let nv = data.variables.len();
    let mut points = vec![vec![Scalar::zero(); nv]];
    for i in 0..nv {
        points.push(unit_vec(nv, i));
    }
    let (mut checked, mut ok) = (0, true);
    let big = plain.nilp();
    let small = data.nilp();
    for p in points {
        if data.obstruction_at(&p).iter().any(|x| !x.is_zero()) {
            continue;
        }
        let z = data.witness(&p)?;
        checked += 1;
        let mut amb = vec![Scalar::zero(); big.dim()];
        for i in 0..r.dim() {
            let part = inv.inclusion.apply(&small.component(&z, i))?;
            for (k, x) in big.pure(i, &part).into_iter().enumerate() {
                amb[k] += x;
            }
        }
        if !crate::dglie::is_mc(big.lie(), &amb)? {
            ok = false;
        }
        for m in &act.matrices {
            for i in 0..r.dim() {
                let c = big.component(&amb, i);
                if m.apply(&c)? != c {
                    ok = false;
                }
            }
        }
    }
    Ok(EquivariantKuranishi {
        invariants: inv,
        data,
        plain,
        forgetful_rank,
        witnesses_checked: checked,
        witnesses_invariant: ok,
    })
}

/// Dimension of the image of the averaging projector on a subspace.
pub fn averaged_dim(e: &SparseMatrix, s: &Subspace) -> Result<usize, EquivariantError> {
    let imgs: Vec<Vec<Scalar>> = s.basis().iter().map(|v| e.apply(v)).collect::<Result<_, _>>()?;
    Ok(image(&SparseMatrix::from_columns(e.rows(), &imgs)).dim())
}
