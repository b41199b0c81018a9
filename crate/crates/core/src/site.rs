//! Finite poset sites, presheaves of complexes on them, sheafification and
//! the Čech-type constructions attached to hypercovers.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::complexes::{
    cohomology, cone, hom_complex_with_layout, is_homotopy_cartesian, subcomplex, ChainMap,
    ComplexError, FinComplex, Square,
};
use crate::exactla::{kernel_basis, Scalar, SparseMatrix, Subspace};
use crate::hypercover::{
    augmentation, cech_nerve, validate_hypercover, Base, Cells, ChainMode, Hypercover,
    HypercoverError,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SiteError {
    #[error("expected {expected} values, found {found}")]
    WrongObjectCount { expected: usize, found: usize },
    #[error("{small} is not below {big}")]
    NotBelow { big: String, small: String },
    #[error("no restriction from {big} to {small} and no intermediate object to compose through")]
    MissingRestriction { big: String, small: String },
    #[error("restriction {big} → {small} does not match the values at its ends")]
    RestrictionMismatch { big: String, small: String },
    #[error("restrictions {big} → {mid} → {small} do not compose to {big} → {small}")]
    NotFunctorial { big: String, mid: String, small: String },
    #[error("component at {object} does not match the presheaf values")]
    ComponentMismatch { object: String },
    #[error("components are not natural along {big} → {small}")]
    NotNatural { big: String, small: String },
    #[error("presheaves live on different sites")]
    SiteMismatch,
    #[error("hypercover {0} is not augmented over the final presheaf")]
    NotFinalBase(String),
    #[error("hypercover {0} is not augmented over an object")]
    NotObjectBase(String),
    #[error("no hypercover registered for the covered object {0}")]
    UnregisteredObject(String),
    #[error(transparent)]
    Complex(#[from] ComplexError),
    #[error(transparent)]
    Hypercover(#[from] HypercoverError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Meet {
    Obj(usize),
    /// No common lower bound: the product of representables is empty.
    Empty,
    /// Common lower bounds without a greatest one.
    Missing,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GlobalCover {
    pub name: String,
    pub members: Vec<usize>,
}

/// A finite poset with covering families. The identity family is always a
/// cover; covering sieves are those of the topology generated by the
/// registered families.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FinSite {
    names: Vec<String>,
    leq: Vec<Vec<bool>>,
    covers: Vec<Vec<Vec<usize>>>,
    global_covers: Vec<GlobalCover>,
    meet_table: Vec<(usize, usize, Option<usize>)>,
    min_sieves: Vec<Vec<usize>>,
}

#[derive(Clone, Debug, Default)]
pub struct SiteBuilder {
    names: Vec<String>,
    pairs: Vec<(usize, usize)>,
    covers: Vec<(usize, Vec<usize>)>,
    global_covers: Vec<GlobalCover>,
    meet_table: Vec<(usize, usize, Option<usize>)>,
}

impl SiteBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn object(&mut self, name: &str) -> usize {
        self.names.push(name.to_string());
        self.names.len() - 1
    }

    /// Declares `small ≤ big`.
    pub fn leq(&mut self, small: usize, big: usize) -> &mut Self {
        self.pairs.push((small, big));
        self
    }

    pub fn cover(&mut self, u: usize, family: &[usize]) -> &mut Self {
        self.covers.push((u, family.to_vec()));
        self
    }

    pub fn global_cover(&mut self, name: &str, members: &[usize]) -> &mut Self {
        self.global_covers.push(GlobalCover {
            name: name.to_string(),
            members: members.to_vec(),
        });
        self
    }

    /// Records a claimed meet (`None` claims there is no common lower bound);
    /// checked by [`validate_site`].
    pub fn meet(&mut self, a: usize, b: usize, m: Option<usize>) -> &mut Self {
        self.meet_table.push((a, b, m));
        self
    }

    pub fn build(&self) -> FinSite {
        let n = self.names.len();
        let mut leq = vec![vec![false; n]; n];
        for (i, row) in leq.iter_mut().enumerate() {
            row[i] = true;
        }
        for &(a, b) in &self.pairs {
            if a < n && b < n {
                leq[a][b] = true;
            }
        }
        for k in 0..n {
            for i in 0..n {
                if leq[i][k] {
                    for j in 0..n {
                        if leq[k][j] {
                            leq[i][j] = true;
                        }
                    }
                }
            }
        }
        let mut covers: Vec<Vec<Vec<usize>>> = (0..n).map(|u| vec![vec![u]]).collect();
        for (u, fam) in &self.covers {
            if *u < n {
                let mut f: Vec<usize> = fam.iter().copied().filter(|&x| x < n).collect();
                f.sort_unstable();
                f.dedup();
                if !covers[*u].contains(&f) {
                    covers[*u].push(f);
                }
            }
        }
        let min_sieves = min_covering_sieves(&leq, &covers);
        FinSite {
            names: self.names.clone(),
            leq,
            covers,
            global_covers: self.global_covers.clone(),
            meet_table: self.meet_table.clone(),
            min_sieves,
        }
    }
}

/// The smallest covering sieve of each object in the generated topology:
/// the largest assignment `m` with `m(U)` inside every registered family's
/// sieve, `m(V) ⊆ m(U)` for `V ≤ U`, and `m(U) ⊆ ∪_{W ∈ m(U)} m(W)`.
fn min_covering_sieves(leq: &[Vec<bool>], covers: &[Vec<Vec<usize>>]) -> Vec<Vec<usize>> {
    let n = leq.len();
    let mut m: Vec<Vec<bool>> = (0..n).map(|u| (0..n).map(|x| leq[x][u]).collect()).collect();
    loop {
        let before = m.clone();
        for u in 0..n {
            for fam in &covers[u] {
                for x in 0..n {
                    if m[u][x] && !fam.iter().any(|&f| leq[x][f]) {
                        m[u][x] = false;
                    }
                }
            }
        }
        for u in 0..n {
            for v in 0..n {
                if leq[v][u] && v != u {
                    for x in 0..n {
                        if m[v][x] && !m[u][x] {
                            m[v][x] = false;
                        }
                    }
                }
            }
        }
        for u in 0..n {
            let mut union = vec![false; n];
            for w in 0..n {
                if m[u][w] {
                    for x in 0..n {
                        union[x] |= m[w][x];
                    }
                }
            }
            for x in 0..n {
                m[u][x] &= union[x];
            }
        }
        if m == before {
            break;
        }
    }
    m.into_iter()
        .map(|row| (0..n).filter(|&x| row[x]).collect())
        .collect()
}

impl FinSite {
    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, u: usize) -> &str {
        &self.names[u]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn leq(&self, a: usize, b: usize) -> bool {
        self.leq[a][b]
    }

    /// Objects `≤ u`, including `u`.
    pub fn below(&self, u: usize) -> Vec<usize> {
        (0..self.len()).filter(|&x| self.leq[x][u]).collect()
    }

    pub fn covers(&self, u: usize) -> &[Vec<usize>] {
        &self.covers[u]
    }

    pub fn global_covers(&self) -> &[GlobalCover] {
        &self.global_covers
    }

    /// Objects of the smallest covering sieve of `u`.
    pub fn min_sieve(&self, u: usize) -> &[usize] {
        &self.min_sieves[u]
    }

    /// Whether the only covering sieve of `u` is the maximal one.
    pub fn trivially_covered(&self, u: usize) -> bool {
        self.min_sieves[u].contains(&u)
    }

    pub fn meet(&self, a: usize, b: usize) -> Meet {
        self.meet_all(&[a, b])
    }

    pub fn meet_all(&self, objs: &[usize]) -> Meet {
        let lower: Vec<usize> = (0..self.len())
            .filter(|&x| objs.iter().all(|&o| self.leq[x][o]))
            .collect();
        if lower.is_empty() {
            return Meet::Empty;
        }
        match lower.iter().find(|&&g| lower.iter().all(|&x| self.leq[x][g])) {
            Some(&g) => Meet::Obj(g),
            None => Meet::Missing,
        }
    }

    /// Maximal elements of the smallest covering sieve.
    pub fn min_sieve_generators(&self, u: usize) -> Vec<usize> {
        let s = &self.min_sieves[u];
        s.iter()
            .copied()
            .filter(|&x| !s.iter().any(|&y| y != x && self.leq[x][y]))
            .collect()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SiteReport {
    pub violations: Vec<String>,
}

impl SiteReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks the order axioms, that covers consist of smaller objects, the
/// meet table, and refinement stability of covers under pullback.
pub fn validate_site(s: &FinSite) -> SiteReport {
    let mut v = Vec::new();
    let n = s.len();
    for i in 0..n {
        for j in i + 1..n {
            if s.names[i] == s.names[j] {
                v.push(format!("duplicate object name {}", s.names[i]));
            }
            if s.leq[i][j] && s.leq[j][i] {
                v.push(format!("antisymmetry: {} ≤ {} ≤ {}", s.names[i], s.names[j], s.names[i]));
            }
        }
    }
    for u in 0..n {
        if !s.covers[u].iter().any(|f| f == &vec![u]) {
            v.push(format!("{} lacks the identity cover", s.names[u]));
        }
        for fam in &s.covers[u] {
            for &x in fam {
                if !s.leq[x][u] {
                    v.push(format!("cover of {}: member {} is not below it", s.names[u], s.names[x]));
                }
            }
        }
    }
    for g in &s.global_covers {
        if g.members.iter().any(|&x| x >= n) {
            v.push(format!("global cover {} names an unknown object", g.name));
        }
    }
    for &(a, b, m) in &s.meet_table {
        if a >= n || b >= n || m.is_some_and(|c| c >= n) {
            v.push("meet table names an unknown object".into());
            continue;
        }
        let actual = s.meet(a, b);
        let ok = match (m, actual) {
            (Some(c), Meet::Obj(g)) => c == g,
            (None, Meet::Empty) => true,
            _ => false,
        };
        if !ok {
            v.push(format!("meet table entry for {} ∧ {} is wrong", s.names[a], s.names[b]));
        }
    }
    if v.is_empty() {
        for u in 0..n {
            for fam in &s.covers[u] {
                for w in s.below(u) {
                    if w == u {
                        continue;
                    }
                    let mut pulled = Vec::new();
                    let mut missing = false;
                    for &f in fam {
                        match s.meet(w, f) {
                            Meet::Obj(o) => pulled.push(o),
                            Meet::Empty => {}
                            Meet::Missing => missing = true,
                        }
                    }
                    if missing {
                        v.push(format!(
                            "pullback of a cover of {} to {} needs a missing meet",
                            s.names[u], s.names[w]
                        ));
                        continue;
                    }
                    let refined = s.covers[w]
                        .iter()
                        .any(|g| g.iter().all(|&x| pulled.iter().any(|&p| s.leq[x][p])));
                    if !refined {
                        v.push(format!(
                            "pullback of cover {:?} of {} to {} is not refined by a cover",
                            fam.iter().map(|&x| &s.names[x]).collect::<Vec<_>>(),
                            s.names[u],
                            s.names[w]
                        ));
                    }
                }
            }
        }
    }
    SiteReport { violations: v }
}

/// A presheaf of complexes: values on objects and restriction chain maps for
/// every strict relation `small < big`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PresheafC {
    site: Arc<FinSite>,
    values: Vec<FinComplex>,
    restr: BTreeMap<(usize, usize), ChainMap>,
}

impl PresheafC {
    /// `restrictions` is keyed by `(big, small)`; missing relations are
    /// filled by composing through intermediate objects, then functoriality
    /// is checked on every chain `small < mid < big`.
    pub fn new(
        site: Arc<FinSite>,
        values: Vec<FinComplex>,
        restrictions: BTreeMap<(usize, usize), ChainMap>,
    ) -> Result<Self, SiteError> {
        let n = site.len();
        if values.len() != n {
            return Err(SiteError::WrongObjectCount {
                expected: n,
                found: values.len(),
            });
        }
        let name = |u: usize| site.name(u).to_string();
        for (&(b, s), f) in &restrictions {
            if b >= n || s >= n || b == s || !site.leq(s, b) {
                return Err(SiteError::NotBelow {
                    big: if b < n { name(b) } else { b.to_string() },
                    small: if s < n { name(s) } else { s.to_string() },
                });
            }
            if f.source() != &values[b] || f.target() != &values[s] {
                return Err(SiteError::RestrictionMismatch {
                    big: name(b),
                    small: name(s),
                });
            }
        }
        let mut restr = restrictions;
        // fill by increasing interval size so intermediate pairs exist
        let mut pairs: Vec<(usize, usize, usize)> = Vec::new();
        for b in 0..n {
            for s in 0..n {
                if s != b && site.leq(s, b) {
                    let between = (0..n).filter(|&x| site.leq(s, x) && site.leq(x, b)).count();
                    pairs.push((between, b, s));
                }
            }
        }
        pairs.sort_unstable();
        for &(_, b, s) in &pairs {
            if restr.contains_key(&(b, s)) {
                continue;
            }
            let mid = (0..n).find(|&x| x != b && x != s && site.leq(s, x) && site.leq(x, b));
            let Some(x) = mid else {
                return Err(SiteError::MissingRestriction {
                    big: name(b),
                    small: name(s),
                });
            };
            let f = restr[&(b, x)].then(&restr[&(x, s)])?;
            restr.insert((b, s), f);
        }
        for &(_, b, s) in &pairs {
            for x in 0..n {
                if x != b && x != s && site.leq(s, x) && site.leq(x, b) {
                    let comp = restr[&(b, x)].then(&restr[&(x, s)])?;
                    if comp != restr[&(b, s)] {
                        return Err(SiteError::NotFunctorial {
                            big: name(b),
                            mid: name(x),
                            small: name(s),
                        });
                    }
                }
            }
        }
        Ok(PresheafC { site, values, restr })
    }

    pub fn zero(site: Arc<FinSite>) -> Self {
        Self::constant(site, &FinComplex::zero())
    }

    pub fn constant(site: Arc<FinSite>, c: &FinComplex) -> Self {
        let n = site.len();
        let mut restr = BTreeMap::new();
        for b in 0..n {
            for s in 0..n {
                if s != b && site.leq(s, b) {
                    restr.insert((b, s), ChainMap::identity(c));
                }
            }
        }
        PresheafC {
            site,
            values: vec![c.clone(); n],
            restr,
        }
    }

    /// `k·h_u`: the field in degree 0 on objects below `u`, zero elsewhere.
    pub fn representable(site: Arc<FinSite>, u: usize) -> Self {
        let n = site.len();
        let k = FinComplex::concentrated(0, 1);
        let values: Vec<FinComplex> = (0..n)
            .map(|w| if site.leq(w, u) { k.clone() } else { FinComplex::zero() })
            .collect();
        let mut restr = BTreeMap::new();
        for b in 0..n {
            for s in 0..n {
                if s != b && site.leq(s, b) {
                    let f = if site.leq(b, u) {
                        ChainMap::identity(&k)
                    } else {
                        ChainMap::zero(&values[b], &values[s])
                    };
                    restr.insert((b, s), f);
                }
            }
        }
        PresheafC { site, values, restr }
    }

    pub fn site(&self) -> &Arc<FinSite> {
        &self.site
    }

    pub fn value(&self, u: usize) -> &FinComplex {
        &self.values[u]
    }

    pub fn values(&self) -> &[FinComplex] {
        &self.values
    }

    /// Restriction from `big` to `small`; the identity when they coincide.
    pub fn restriction(&self, big: usize, small: usize) -> ChainMap {
        if big == small {
            ChainMap::identity(&self.values[big])
        } else {
            self.restr[&(big, small)].clone()
        }
    }

    fn restriction_at(&self, big: usize, small: usize, n: i32) -> SparseMatrix {
        if big == small {
            SparseMatrix::identity(self.values[big].dim(n))
        } else {
            self.restr[&(big, small)].at(n)
        }
    }

    pub fn shift(&self, s: i32) -> PresheafC {
        let values: Vec<FinComplex> = self.values.iter().map(|c| c.shift(s)).collect();
        let restr = self
            .restr
            .iter()
            .map(|(&(b, sm), f)| {
                let maps = values[b].degrees().map(|m| (m, f.at(m + s))).collect();
                let g = ChainMap::new(values[b].clone(), values[sm].clone(), maps)
                    .expect("shifted restriction is a chain map");
                ((b, sm), g)
            })
            .collect();
        PresheafC {
            site: self.site.clone(),
            values,
            restr,
        }
    }

    fn strict_pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.restr.keys().copied()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PresheafMap {
    source: PresheafC,
    target: PresheafC,
    components: Vec<ChainMap>,
}

impl PresheafMap {
    pub fn new(source: PresheafC, target: PresheafC, components: Vec<ChainMap>) -> Result<Self, SiteError> {
        if source.site != target.site && *source.site != *target.site {
            return Err(SiteError::SiteMismatch);
        }
        let site = source.site.clone();
        if components.len() != site.len() {
            return Err(SiteError::WrongObjectCount {
                expected: site.len(),
                found: components.len(),
            });
        }
        for (u, f) in components.iter().enumerate() {
            if f.source() != source.value(u) || f.target() != target.value(u) {
                return Err(SiteError::ComponentMismatch {
                    object: site.name(u).to_string(),
                });
            }
        }
        for (b, s) in source.strict_pairs() {
            let l = source.restr[&(b, s)].then(&components[s])?;
            let r = components[b].then(&target.restr[&(b, s)])?;
            if l != r {
                return Err(SiteError::NotNatural {
                    big: site.name(b).to_string(),
                    small: site.name(s).to_string(),
                });
            }
        }
        Ok(PresheafMap {
            source,
            target,
            components,
        })
    }

    pub fn identity(m: &PresheafC) -> Self {
        PresheafMap {
            source: m.clone(),
            target: m.clone(),
            components: m.values.iter().map(ChainMap::identity).collect(),
        }
    }

    pub fn zero(source: &PresheafC, target: &PresheafC) -> Self {
        PresheafMap {
            source: source.clone(),
            target: target.clone(),
            components: source
                .values
                .iter()
                .zip(&target.values)
                .map(|(a, b)| ChainMap::zero(a, b))
                .collect(),
        }
    }

    pub fn source(&self) -> &PresheafC {
        &self.source
    }

    pub fn target(&self) -> &PresheafC {
        &self.target
    }

    pub fn component(&self, u: usize) -> &ChainMap {
        &self.components[u]
    }

    /// `other ∘ self`.
    pub fn then(&self, other: &PresheafMap) -> Result<PresheafMap, SiteError> {
        let comps = self
            .components
            .iter()
            .zip(&other.components)
            .map(|(f, g)| f.then(g))
            .collect::<Result<Vec<_>, _>>()?;
        PresheafMap::new(self.source.clone(), other.target.clone(), comps)
    }

    pub fn is_pointwise_injective(&self) -> bool {
        self.components.iter().all(ChainMap::is_degreewise_injective)
    }

    pub fn is_pointwise_surjective(&self) -> bool {
        self.components.iter().all(ChainMap::is_degreewise_surjective)
    }

    pub fn is_pointwise_quasi_iso(&self) -> bool {
        self.components.iter().all(crate::complexes::is_quasi_iso)
    }
}

/// Pointwise cone with restrictions acting diagonally.
pub fn presheaf_cone(f: &PresheafMap) -> PresheafC {
    let site = f.source.site.clone();
    let values: Vec<FinComplex> = f.components.iter().map(cone).collect();
    let mut restr = BTreeMap::new();
    for (b, s) in f.source.strict_pairs() {
        let maps = values[b]
            .degrees()
            .map(|n| {
                let mut m = SparseMatrix::zeros(values[s].dim(n), values[b].dim(n));
                m.add_block(0, 0, &f.target.restriction_at(b, s, n));
                m.add_block(
                    f.target.value(s).dim(n),
                    f.target.value(b).dim(n),
                    &f.source.restriction_at(b, s, n + 1),
                );
                (n, m)
            })
            .collect();
        let g = ChainMap::new(values[b].clone(), values[s].clone(), maps).expect("cone restriction is a chain map");
        restr.insert((b, s), g);
    }
    PresheafC { site, values, restr }
}

/// Pointwise direct sum with the projection onto the second summand.
pub fn presheaf_sum(a: &PresheafC, b: &PresheafC) -> Result<(PresheafC, PresheafMap), SiteError> {
    let site = a.site.clone();
    let values: Vec<FinComplex> = a.values.iter().zip(&b.values).map(|(x, y)| x.direct_sum(y)).collect();
    let mut restr = BTreeMap::new();
    for (bg, sm) in a.strict_pairs() {
        let maps = values[bg]
            .degrees()
            .map(|n| {
                let mut m = SparseMatrix::zeros(values[sm].dim(n), values[bg].dim(n));
                m.add_block(0, 0, &a.restriction_at(bg, sm, n));
                m.add_block(a.values[sm].dim(n), a.values[bg].dim(n), &b.restriction_at(bg, sm, n));
                (n, m)
            })
            .collect();
        restr.insert((bg, sm), ChainMap::new(values[bg].clone(), values[sm].clone(), maps)?);
    }
    let sum = PresheafC::new(site.clone(), values, restr)?;
    let comps = (0..site.len())
        .map(|u| {
            let maps = sum.values[u]
                .degrees()
                .map(|n| {
                    let mut m = SparseMatrix::zeros(b.values[u].dim(n), sum.values[u].dim(n));
                    m.add_block(0, a.values[u].dim(n), &SparseMatrix::identity(b.values[u].dim(n)));
                    (n, m)
                })
                .collect();
            ChainMap::new(sum.values[u].clone(), b.values[u].clone(), maps)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let proj = PresheafMap::new(sum.clone(), b.clone(), comps)?;
    Ok((sum, proj))
}

/// Pointwise kernel with its inclusion.
pub fn presheaf_kernel(f: &PresheafMap) -> Result<(PresheafC, PresheafMap), SiteError> {
    let site = f.source.site.clone();
    let mut values = Vec::new();
    let mut incls = Vec::new();
    let mut spaces = Vec::new();
    for (u, c) in f.components.iter().enumerate() {
        let src = f.source.value(u);
        let sp: BTreeMap<i32, Subspace> = src.degrees().map(|n| (n, kernel_basis(&c.at(n)))).collect();
        let (k, i) = subcomplex(src, &sp)?;
        values.push(k);
        incls.push(i);
        spaces.push(sp);
    }
    let mut restr = BTreeMap::new();
    for (b, s) in f.source.strict_pairs() {
        let r = &f.source.restr[&(b, s)];
        let maps = values[b]
            .degrees()
            .map(|n| {
                let zero = Subspace::zero(f.source.value(s).dim(n));
                let tgt = spaces[s].get(&n).unwrap_or(&zero);
                let m = spaces[b][&n].restricted_map(&r.at(n), tgt).expect("restriction preserves kernels");
                (n, m)
            })
            .collect();
        restr.insert((b, s), ChainMap::new(values[b].clone(), values[s].clone(), maps)?);
    }
    let k = PresheafC::new(site, values, restr)?;
    let incl = PresheafMap::new(k.clone(), f.source.clone(), incls)?;
    Ok((k, incl))
}

/// Sections over a downward-closed set of objects: compatible families.
#[derive(Clone, Debug)]
struct Limit {
    objs: Vec<usize>,
    offsets: BTreeMap<i32, Vec<usize>>,
    ambient: BTreeMap<i32, usize>,
    spaces: BTreeMap<i32, Subspace>,
    complex: FinComplex,
}

impl Limit {
    fn offset(&self, n: i32, u: usize) -> usize {
        let i = self.objs.iter().position(|&x| x == u).expect("object in the limit");
        self.offsets[&n][i]
    }

    fn space(&self, n: i32) -> Subspace {
        self.spaces.get(&n).cloned().unwrap_or_else(|| Subspace::zero(0))
    }
}

fn degree_range(m: &PresheafC, objs: &[usize]) -> Option<(i32, i32)> {
    let sups: Vec<(i32, i32)> = objs.iter().filter_map(|&u| m.values[u].support()).collect();
    if sups.is_empty() {
        return None;
    }
    Some((
        sups.iter().map(|s| s.0).min().unwrap(),
        sups.iter().map(|s| s.1).max().unwrap(),
    ))
}

fn limit(m: &PresheafC, objs: &[usize]) -> Limit {
    let site = &m.site;
    let Some((lo, hi)) = degree_range(m, objs) else {
        return Limit {
            objs: objs.to_vec(),
            offsets: BTreeMap::new(),
            ambient: BTreeMap::new(),
            spaces: BTreeMap::new(),
            complex: FinComplex::zero(),
        };
    };
    let mut offsets = BTreeMap::new();
    let mut ambient = BTreeMap::new();
    let mut spaces = BTreeMap::new();
    for n in lo..=hi {
        let mut offs = Vec::new();
        let mut total = 0;
        for &u in objs {
            offs.push(total);
            total += m.values[u].dim(n);
        }
        // r_{VW} x_V - x_W = 0 for W < V in objs
        let mut rows = 0;
        let mut blocks = Vec::new();
        for (i, &v) in objs.iter().enumerate() {
            for (j, &w) in objs.iter().enumerate() {
                if v != w && site.leq(w, v) {
                    blocks.push((i, j, v, w, rows));
                    rows += m.values[w].dim(n);
                }
            }
        }
        let mut c = SparseMatrix::zeros(rows, total);
        for &(i, j, v, w, r0) in &blocks {
            c.add_block(r0, offs[i], &m.restriction_at(v, w, n));
            c.add_block(r0, offs[j], &SparseMatrix::identity(m.values[w].dim(n)).scale(&-Scalar::one()));
        }
        spaces.insert(n, kernel_basis(&c));
        offsets.insert(n, offs);
        ambient.insert(n, total);
    }
    let mut diffs = BTreeMap::new();
    for n in lo..hi {
        let mut d = SparseMatrix::zeros(ambient[&(n + 1)], ambient[&n]);
        for (i, &u) in objs.iter().enumerate() {
            d.add_block(offsets[&(n + 1)][i], offsets[&n][i], &m.values[u].d(n));
        }
        let r = spaces[&n].restricted_map(&d, &spaces[&(n + 1)]).expect("differential preserves compatibility");
        diffs.insert(n, r);
    }
    let complex = FinComplex::new(lo, (lo..=hi).map(|n| spaces[&n].dim()).collect(), diffs)
        .expect("sections of a presheaf of complexes form a complex");
    Limit {
        objs: objs.to_vec(),
        offsets,
        ambient,
        spaces,
        complex,
    }
}

/// The chain map `X → lim` given compatible maps `X → M(V)`.
fn into_limit(m: &PresheafC, lim: &Limit, x: &FinComplex, maps: impl Fn(usize, i32) -> SparseMatrix) -> ChainMap {
    let comps = x
        .degrees()
        .map(|n| {
            let Some(&amb) = lim.ambient.get(&n) else {
                return (n, SparseMatrix::zeros(0, x.dim(n)));
            };
            let mut stacked = SparseMatrix::zeros(amb, x.dim(n));
            for (i, &v) in lim.objs.iter().enumerate() {
                let b = maps(v, n);
                debug_assert_eq!(b.rows(), m.values[v].dim(n));
                stacked.add_block(lim.offsets[&n][i], 0, &b);
            }
            let cols: Vec<Vec<Scalar>> = (0..x.dim(n))
                .map(|j| lim.spaces[&n].coords(&stacked.column(j)).expect("maps are compatible"))
                .collect();
            (n, SparseMatrix::from_columns(lim.spaces[&n].dim(), &cols))
        })
        .collect();
    ChainMap::new(x.clone(), lim.complex.clone(), comps).expect("map into sections is a chain map")
}

/// Projection from sections over a set to sections over a subset.
fn project_limit(m: &PresheafC, big: &Limit, small: &Limit) -> ChainMap {
    let comps = big
        .complex
        .degrees()
        .map(|n| {
            let Some(&amb_s) = small.ambient.get(&n) else {
                return (n, SparseMatrix::zeros(small.complex.dim(n), big.complex.dim(n)));
            };
            let mut p = SparseMatrix::zeros(amb_s, big.ambient[&n]);
            for &u in &small.objs {
                let d = m.values[u].dim(n);
                p.add_block(small.offset(n, u), big.offset(n, u), &SparseMatrix::identity(d));
            }
            let r = big.space(n).restricted_map(&p, &small.space(n)).expect("families restrict");
            (n, r)
        })
        .collect();
    ChainMap::new(big.complex.clone(), small.complex.clone(), comps).expect("projection is a chain map")
}

struct Plus {
    result: PresheafC,
    unit: PresheafMap,
    limits: Vec<Limit>,
}

fn plus(m: &PresheafC) -> Plus {
    let site = m.site.clone();
    let limits: Vec<Limit> = (0..site.len()).map(|u| limit(m, site.min_sieve(u))).collect();
    let values: Vec<FinComplex> = limits.iter().map(|l| l.complex.clone()).collect();
    let mut restr = BTreeMap::new();
    for (b, s) in m.strict_pairs() {
        restr.insert((b, s), project_limit(m, &limits[b], &limits[s]));
    }
    let result = PresheafC {
        site: site.clone(),
        values,
        restr,
    };
    let comps = (0..site.len())
        .map(|u| into_limit(m, &limits[u], &m.values[u], |v, n| m.restriction_at(u, v, n)))
        .collect();
    let unit = PresheafMap {
        source: m.clone(),
        target: result.clone(),
        components: comps,
    };
    Plus { result, unit, limits }
}

fn plus_map(f: &PresheafMap, ps: &Plus, pt: &Plus) -> PresheafMap {
    let comps = (0..f.source.site.len())
        .map(|u| {
            let ls = &ps.limits[u];
            let lt = &pt.limits[u];
            let maps = ls
                .complex
                .degrees()
                .map(|n| {
                    let amb_t = lt.ambient.get(&n).copied().unwrap_or(0);
                    let mut g = SparseMatrix::zeros(amb_t, ls.ambient[&n]);
                    for &v in &ls.objs {
                        let c = f.components[v].at(n);
                        if c.rows() > 0 && c.cols() > 0 {
                            g.add_block(lt.offset(n, v), ls.offset(n, v), &c);
                        }
                    }
                    (n, ls.space(n).restricted_map(&g, &lt.space(n)).expect("natural maps preserve families"))
                })
                .collect();
            ChainMap::new(ls.complex.clone(), lt.complex.clone(), maps).expect("induced map on sections")
        })
        .collect();
    PresheafMap {
        source: ps.result.clone(),
        target: pt.result.clone(),
        components: comps,
    }
}

/// Sheafification by two plus constructions over the smallest covering
/// sieves, together with the canonical map `M → M^a`.
pub fn sheafify_with_unit(m: &PresheafC) -> (PresheafC, PresheafMap) {
    let p1 = plus(m);
    let p2 = plus(&p1.result);
    let unit = p1.unit.then(&p2.unit).expect("composable units");
    (p2.result, unit)
}

pub fn sheafify(m: &PresheafC) -> PresheafC {
    sheafify_with_unit(m).0
}

/// The induced map `M^a → N^a`.
pub fn sheafify_map(f: &PresheafMap) -> PresheafMap {
    let s1 = plus(&f.source);
    let t1 = plus(&f.target);
    let f1 = plus_map(f, &s1, &t1);
    let s2 = plus(&s1.result);
    let t2 = plus(&t1.result);
    plus_map(&f1, &s2, &t2)
}

/// Whether every cohomology class of `M` is locally zero, i.e. the
/// cohomology sheaves of `M` vanish. With `min_degree`, only degrees
/// `≥ min_degree` are inspected (for chain complexes truncated below).
pub fn is_locally_acyclic(m: &PresheafC, min_degree: Option<i32>) -> bool {
    let site = &m.site;
    let coh: Vec<_> = m.values.iter().map(cohomology).collect();
    (0..site.len()).all(|u| {
        coh[u].dims().into_iter().all(|(n, d)| {
            if d == 0 || min_degree.is_some_and(|lo| n < lo) {
                return true;
            }
            site.min_sieve(u)
                .iter()
                .all(|&w| m.restriction(u, w).induced(n, &coh[u], &coh[w]).is_zero())
        })
    })
}

/// Whether `f` induces a quasi-isomorphism of complexes of sheaves: the
/// cohomology sheaves of its cone vanish.
pub fn is_weak_equivalence(f: &PresheafMap, min_degree: Option<i32>) -> bool {
    is_locally_acyclic(&presheaf_cone(f), min_degree)
}

/// The complex of natural transformations `Hom(C, M)` of presheaves of
/// complexes, computed by solving the naturality equations.
pub fn presheaf_hom(c: &PresheafC, m: &PresheafC) -> Result<FinComplex, SiteError> {
    let site = &c.site;
    let homs: Vec<_> = (0..site.len()).map(|u| hom_complex_with_layout(&c.values[u], &m.values[u])).collect();
    let mut total = FinComplex::zero();
    for (h, _) in &homs {
        total = total.direct_sum(h);
    }
    let Some((lo, hi)) = total.support() else {
        return Ok(FinComplex::zero());
    };
    let mut spaces = BTreeMap::new();
    for n in lo..=hi {
        let offs: Vec<usize> = (0..site.len())
            .scan(0, |acc, u| {
                let o = *acc;
                *acc += homs[u].0.dim(n);
                Some(o)
            })
            .collect();
        let mut rows = 0;
        let mut entries: Vec<(usize, usize, Scalar)> = Vec::new();
        for (b, s) in c.strict_pairs() {
            let (cb, cs) = (&c.values[b], &c.values[s]);
            let (mb, ms) = (&m.values[b], &m.values[s]);
            for p in cb.degrees() {
                // constraint block in Hom(C^p(b), M^{p+n}(s))
                let (rr, cc) = (ms.dim(p + n), cb.dim(p));
                if rr == 0 || cc == 0 {
                    continue;
                }
                let rm = m.restriction_at(b, s, p + n);
                let rc = c.restriction_at(b, s, p);
                if let Some(ob) = homs[b].1.offset(n, p) {
                    let wb = cb.dim(p);
                    for r in 0..mb.dim(p + n) {
                        for col in 0..wb {
                            for i in 0..rr {
                                let x = rm.get(i, r);
                                if !x.is_zero() {
                                    entries.push((rows + i * cc + col, offs[b] + ob + r * wb + col, x));
                                }
                            }
                        }
                    }
                }
                if let Some(os) = homs[s].1.offset(n, p) {
                    let ws = cs.dim(p);
                    for r in 0..rr {
                        for sidx in 0..ws {
                            for j in 0..cc {
                                let x = rc.get(sidx, j);
                                if !x.is_zero() {
                                    entries.push((rows + r * cc + j, offs[s] + os + r * ws + sidx, -x));
                                }
                            }
                        }
                    }
                }
                rows += rr * cc;
            }
        }
        let mut k = SparseMatrix::zeros(rows, total.dim(n));
        for (i, j, x) in entries {
            k.add_to(i, j, &x);
        }
        spaces.insert(n, kernel_basis(&k));
    }
    Ok(subcomplex(&total, &spaces)?.0)
}

/// The Čech complex of a presheaf over a hypercover, with its cell layout.
#[derive(Clone, Debug)]
pub struct CechComplex {
    pub complex: FinComplex,
    pub cells: Cells,
    cell_list: Vec<(usize, usize)>,
    offsets: BTreeMap<i32, Vec<usize>>,
}

impl CechComplex {
    /// Offset of the block of cell `(level, simplex)` in degree `n`.
    pub fn offset(&self, n: i32, level: usize, simplex: usize) -> Option<usize> {
        let i = self.cell_list.iter().position(|&c| c == (level, simplex))?;
        Some(self.offsets.get(&n)?[i])
    }
}

/// `Cech^n = ∏_p ∏_a M^{n-p}(obj a)` over the selected level-`p` simplices,
/// with `(δf)_b = d f_b - (-1)^n Σ_j (-1)^j f_{d_j b}|_b`; this is the
/// hom complex out of the chains of the hypercover.
pub fn cech_complex(
    v: &Hypercover,
    m: &PresheafC,
    mode: ChainMode,
    cap: Option<usize>,
) -> Result<CechComplex, SiteError> {
    let cells = Cells::new(v, mode, cap)?;
    let k = v.simp();
    let cell_list: Vec<(usize, usize)> = cells
        .levels
        .iter()
        .enumerate()
        .flat_map(|(p, l)| l.iter().map(move |&a| (p, a)))
        .collect();
    let objs: Vec<usize> = cell_list.iter().map(|&(p, a)| k.level(p)[a]).collect();
    let sups: Vec<(i32, i32)> = objs.iter().filter_map(|&u| m.values[u].support()).collect();
    if sups.is_empty() {
        return Ok(CechComplex {
            complex: FinComplex::zero(),
            cells,
            cell_list,
            offsets: BTreeMap::new(),
        });
    }
    let lo = sups.iter().map(|s| s.0).min().unwrap();
    let hi = sups.iter().map(|s| s.1).max().unwrap() + cells.top() as i32;
    let mut offsets = BTreeMap::new();
    let mut dims = Vec::new();
    for n in lo..=hi + 1 {
        let mut offs = Vec::new();
        let mut t = 0;
        for (&(p, _), &o) in cell_list.iter().zip(&objs) {
            offs.push(t);
            t += m.values[o].dim(n - p as i32);
        }
        offsets.insert(n, offs);
        if n <= hi {
            dims.push(t);
        }
    }
    let index: BTreeMap<(usize, usize), usize> = cell_list.iter().enumerate().map(|(i, &c)| (c, i)).collect();
    let mut diffs = BTreeMap::new();
    for n in lo..hi {
        let mut d = SparseMatrix::zeros(dims[(n + 1 - lo) as usize], dims[(n - lo) as usize]);
        for (i, &(p, a)) in cell_list.iter().enumerate() {
            let q = n - p as i32;
            let o = objs[i];
            d.add_block(offsets[&(n + 1)][i], offsets[&n][i], &m.values[o].d(q));
            if p + 1 > cells.top() {
                continue;
            }
            // contributions to cells one level up having (p, a) as a face
            for &b in &cells.levels[p + 1] {
                let ib = index[&(p + 1, b)];
                for j in 0..=p + 1 {
                    if k.face(p + 1, j)[b] != a {
                        continue;
                    }
                    let sign_exp = n + j as i32 + 1;
                    let sign = if sign_exp.rem_euclid(2) == 0 { Scalar::one() } else { -Scalar::one() };
                    let r = m.restriction_at(o, objs[ib], q).scale(&sign);
                    if r.rows() > 0 && r.cols() > 0 {
                        d.add_block(offsets[&(n + 1)][ib], offsets[&n][i], &r);
                    }
                }
            }
        }
        diffs.insert(n, d);
    }
    let complex = FinComplex::new(lo, dims, diffs)?;
    Ok(CechComplex {
        complex,
        cells,
        cell_list,
        offsets,
    })
}

/// The canonical map `M(U) → Cech(V, M)` for a hypercover of `U`.
pub fn cech_unit(v: &Hypercover, m: &PresheafC, cech: &CechComplex) -> Result<ChainMap, SiteError> {
    let Base::Object(u) = v.base() else {
        return Err(SiteError::NotObjectBase(v.name().to_string()));
    };
    let src = &m.values[u];
    let k = v.simp();
    let maps = src
        .degrees()
        .map(|n| {
            let mut g = SparseMatrix::zeros(cech.complex.dim(n), src.dim(n));
            for &a in &cech.cells.levels[0] {
                let o = k.level(0)[a];
                if let Some(off) = cech.offset(n, 0, a) {
                    let r = m.restriction_at(u, o, n);
                    if r.rows() > 0 && r.cols() > 0 {
                        g.add_block(off, 0, &r);
                    }
                }
            }
            (n, g)
        })
        .collect();
    Ok(ChainMap::new(src.clone(), cech.complex.clone(), maps)?)
}

/// The map `Cech(V, M) → Cech(V, N)` induced by `f`.
pub fn cech_functor(v: &Hypercover, f: &PresheafMap, cm: &CechComplex, cn: &CechComplex) -> Result<ChainMap, SiteError> {
    let k = v.simp();
    let maps = cm
        .complex
        .degrees()
        .map(|n| {
            let mut g = SparseMatrix::zeros(cn.complex.dim(n), cm.complex.dim(n));
            for &(p, a) in &cm.cell_list {
                let o = k.level(p)[a];
                let c = f.components[o].at(n - p as i32);
                if c.rows() > 0 && c.cols() > 0 {
                    g.add_block(cn.offset(n, p, a).unwrap(), cm.offset(n, p, a).unwrap(), &c);
                }
            }
            (n, g)
        })
        .collect();
    Ok(ChainMap::new(cm.complex.clone(), cn.complex.clone(), maps)?)
}

fn default_mode(v: &Hypercover) -> ChainMode {
    if v.is_nerve() {
        ChainMode::Alternating
    } else {
        ChainMode::Normalized
    }
}

/// Derived global sections computed over a hypercover of the final
/// presheaf.
pub fn rgamma(m: &PresheafC, v: &Hypercover) -> Result<FinComplex, SiteError> {
    if v.base() != Base::Final {
        return Err(SiteError::NotFinalBase(v.name().to_string()));
    }
    Ok(cech_complex(v, m, default_mode(v), None)?.complex)
}

/// For every object with a nontrivial smallest covering sieve, the Čech
/// nerve of the sieve's maximal elements; then the nerves of the global
/// covers.
pub fn default_registry(site: &FinSite) -> Result<Vec<Hypercover>, SiteError> {
    let mut out = Vec::new();
    for u in 0..site.len() {
        if !site.trivially_covered(u) {
            let fam = site.min_sieve_generators(u);
            let cap = fam.len().saturating_sub(1).max(1);
            out.push(cech_nerve(site, format!("nerve({})", site.name(u)), &fam, Base::Object(u), cap)?);
        }
    }
    for g in site.global_covers() {
        let cap = g.members.len().saturating_sub(1).max(1);
        out.push(cech_nerve(site, g.name.clone(), &g.members, Base::Final, cap)?);
    }
    Ok(out)
}

/// `ℋ^i(M)(U)`: degree-`i` cohomology of the Čech complex over the
/// registered hypercover of `U`, or of `M(U)` when `U` is only trivially
/// covered.
pub fn cohomology_presheaf(m: &PresheafC, i: i32, registry: &[Hypercover]) -> Result<Vec<usize>, SiteError> {
    let site = &m.site;
    (0..site.len())
        .map(|u| {
            if let Some(v) = registry.iter().find(|v| v.base() == Base::Object(u)) {
                let c = cech_complex(v, m, default_mode(v), None)?;
                Ok(cohomology(&c.complex).dim(i))
            } else if site.trivially_covered(u) {
                Ok(cohomology(&m.values[u]).dim(i))
            } else {
                Err(SiteError::UnregisteredObject(site.name(u).to_string()))
            }
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SquareVerdict {
    pub hypercover: String,
    pub object: String,
    pub homotopy_cartesian: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FibrationReport {
    pub non_surjective: Vec<String>,
    pub squares: Vec<SquareVerdict>,
    /// Registered hypercovers of the final presheaf, which do not enter the
    /// criterion.
    pub skipped: Vec<String>,
    pub invalid: Vec<String>,
    pub limitation: String,
}

impl FibrationReport {
    pub fn is_fibration(&self) -> bool {
        self.non_surjective.is_empty()
            && self.invalid.is_empty()
            && self.squares.iter().all(|s| s.homotopy_cartesian)
    }

    pub fn failing_objects(&self) -> Vec<&str> {
        let mut v: Vec<&str> = self.non_surjective.iter().map(String::as_str).collect();
        v.extend(self.squares.iter().filter(|s| !s.homotopy_cartesian).map(|s| s.object.as_str()));
        v.sort_unstable();
        v.dedup();
        v
    }
}

pub const REGISTRY_LIMITATION: &str =
    "the hypercover condition is checked only against the registered hypercovers";

/// Pointwise surjectivity plus homotopy cartesian squares
/// `M(U) → N(U)`, `Cech(V, M) → Cech(V, N)` for each registered hypercover.
pub fn is_fibration(f: &PresheafMap, registry: &[Hypercover]) -> Result<FibrationReport, SiteError> {
    let site = f.source.site.clone();
    let non_surjective = (0..site.len())
        .filter(|&u| !f.components[u].is_degreewise_surjective())
        .map(|u| site.name(u).to_string())
        .collect();
    let mut squares = Vec::new();
    let mut skipped = Vec::new();
    let mut invalid = Vec::new();
    for v in registry {
        let Base::Object(u) = v.base() else {
            skipped.push(v.name().to_string());
            continue;
        };
        if !validate_hypercover(&site, v).is_valid() {
            invalid.push(v.name().to_string());
            continue;
        }
        let mode = default_mode(v);
        let cm = cech_complex(v, &f.source, mode, None)?;
        let cn = cech_complex(v, &f.target, mode, None)?;
        let sq = Square::new(
            f.components[u].clone(),
            cech_unit(v, &f.source, &cm)?,
            cech_unit(v, &f.target, &cn)?,
            cech_functor(v, f, &cm, &cn)?,
        )?;
        squares.push(SquareVerdict {
            hypercover: v.name().to_string(),
            object: site.name(u).to_string(),
            homotopy_cartesian: is_homotopy_cartesian(&sq),
        });
    }
    Ok(FibrationReport {
        non_surjective,
        squares,
        skipped,
        invalid,
        limitation: REGISTRY_LIMITATION.to_string(),
    })
}

/// Fibrancy of `M`: the map `M → 0` is a fibration.
pub fn is_fibrant(m: &PresheafC, registry: &[Hypercover]) -> Result<FibrationReport, SiteError> {
    is_fibration(&PresheafMap::zero(m, &PresheafC::zero(m.site.clone())), registry)
}

/// A generating acyclic cofibration `j: K → L` attached to a hypercover.
#[derive(Clone, Debug)]
pub struct AcyclicCofibration {
    pub k: PresheafC,
    pub l: PresheafC,
    pub j: PresheafMap,
    /// Number of representable summands of `K` in each degree.
    pub summands: BTreeMap<i32, usize>,
}

/// `K = Cone(C_*(ε) → k·U)` shifted so that `k·U` sits in degree `n`,
/// `L = Cone(id_K)` and `j` the inclusion of `K`.
pub fn generating_acyclic_cofibration(
    eps: &Hypercover,
    n: i32,
    mode: ChainMode,
    cap: Option<usize>,
    site: &Arc<FinSite>,
) -> Result<AcyclicCofibration, SiteError> {
    let cells = Cells::new(eps, mode, cap)?;
    let aug = augmentation(site, eps, &cells)?;
    let k = presheaf_cone(&aug).shift(-n);
    let id = PresheafMap::identity(&k);
    let l = presheaf_cone(&id);
    let comps = (0..site.len())
        .map(|u| {
            let kv = k.value(u);
            let lv = l.value(u);
            let maps = kv
                .degrees()
                .map(|d| {
                    let mut m = SparseMatrix::zeros(lv.dim(d), kv.dim(d));
                    m.add_block(0, 0, &SparseMatrix::identity(kv.dim(d)));
                    (d, m)
                })
                .collect();
            ChainMap::new(kv.clone(), lv.clone(), maps)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let j = PresheafMap::new(k.clone(), l.clone(), comps)?;
    let mut summands = BTreeMap::new();
    summands.insert(n, 1);
    for (p, c) in cells.counts().into_iter().enumerate() {
        summands.insert(n - p as i32 - 1, c);
    }
    Ok(AcyclicCofibration { k, l, j, summands })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactla::int;
    use crate::hypercover::{chains, Hypercover};

    fn wuvp() -> Arc<FinSite> {
        let mut b = SiteBuilder::new();
        let w = b.object("W");
        let u = b.object("U");
        let v = b.object("V");
        let p = b.object("P");
        b.leq(u, w).leq(v, w).leq(p, u).leq(p, v);
        b.cover(w, &[u, v]);
        Arc::new(b.build())
    }

    fn k() -> FinComplex {
        FinComplex::concentrated(0, 1)
    }

    /// `M(W) = 0`, `M(U) = M(V) = M(P) = k`, identity restrictions.
    fn bad_w(site: &Arc<FinSite>) -> PresheafC {
        let z = FinComplex::zero();
        let values = vec![z.clone(), k(), k(), k()];
        let mut r = BTreeMap::new();
        r.insert((1, 3), ChainMap::identity(&k()));
        r.insert((2, 3), ChainMap::identity(&k()));
        r.insert((0, 1), ChainMap::zero(&z, &k()));
        r.insert((0, 2), ChainMap::zero(&z, &k()));
        PresheafC::new(site.clone(), values, r).unwrap()
    }

    #[test]
    fn one_object_site_is_valid() {
        let mut b = SiteBuilder::new();
        b.object("X");
        assert!(validate_site(&b.build()).is_valid());
    }

    #[test]
    fn wuvp_is_valid_and_sieves() {
        let s = wuvp();
        assert!(validate_site(&s).is_valid());
        assert_eq!(s.min_sieve(0), &[1, 2, 3]);
        assert_eq!(s.min_sieve(1), &[1, 3]);
        assert_eq!(s.min_sieve_generators(0), vec![1, 2]);
    }

    #[test]
    fn cover_with_non_member_is_pinpointed() {
        let mut b = SiteBuilder::new();
        let x = b.object("X");
        let y = b.object("Y");
        b.cover(x, &[y]);
        let rep = validate_site(&b.build());
        assert_eq!(rep.violations.len(), 1);
        assert!(rep.violations[0].contains("member Y"));
    }

    #[test]
    fn wrong_meet_table_is_flagged() {
        let mut b = SiteBuilder::new();
        let x = b.object("X");
        let y = b.object("Y");
        let z = b.object("Z");
        b.leq(z, x).leq(z, y);
        b.meet(x, y, Some(x));
        assert!(!validate_site(&b.build()).is_valid());
    }

    #[test]
    fn unstable_cover_is_flagged() {
        // X covered by {A}; B ≤ X meets A trivially but has only the identity cover
        let mut b = SiteBuilder::new();
        let x = b.object("X");
        let a = b.object("A");
        let bb = b.object("B");
        let c = b.object("C");
        b.leq(a, x).leq(bb, x).leq(c, a).leq(c, bb);
        b.cover(x, &[a]);
        let rep = validate_site(&b.build());
        assert!(rep.violations.iter().any(|v| v.contains("not refined")));
    }

    #[test]
    fn functoriality_is_checked() {
        let s = wuvp();
        let two = FinComplex::concentrated(0, 2);
        let swap = SparseMatrix::from_dense(2, 2, &[vec![int(0), int(1)], vec![int(1), int(0)]]).unwrap();
        let sw = ChainMap::new(two.clone(), two.clone(), [(0, swap)].into_iter().collect()).unwrap();
        let id = ChainMap::identity(&two);
        let mut r = BTreeMap::new();
        r.insert((0, 1), id.clone());
        r.insert((0, 2), id.clone());
        r.insert((1, 3), id.clone());
        r.insert((2, 3), sw);
        let e = PresheafC::new(s, vec![two.clone(); 4], r).unwrap_err();
        assert!(matches!(e, SiteError::NotFunctorial { .. }));
    }

    #[test]
    fn sheafify_trivial_topology_is_identity() {
        let mut b = SiteBuilder::new();
        let x = b.object("X");
        let y = b.object("Y");
        b.leq(y, x);
        let s = Arc::new(b.build());
        let m = PresheafC::representable(s.clone(), y);
        let (sh, unit) = sheafify_with_unit(&m);
        assert!(unit.is_pointwise_quasi_iso());
        assert_eq!(sh.value(0).total_dim(), 0);
        assert_eq!(sh.value(1).total_dim(), 1);
    }

    #[test]
    fn sheafify_fills_equalizer() {
        let s = wuvp();
        let m = bad_w(&s);
        let (sh, unit) = sheafify_with_unit(&m);
        assert_eq!(sh.value(0).dim(0), 1);
        assert!(is_weak_equivalence(&unit, None));
        assert!(is_weak_equivalence(&sheafify_map(&unit), None));
        // idempotent
        let (_, unit2) = sheafify_with_unit(&sh);
        assert!(unit2.is_pointwise_quasi_iso());
        assert!(unit2.components.iter().all(|c| c.is_degreewise_injective() && c.is_degreewise_surjective()));
    }

    #[test]
    fn pointwise_non_quasi_iso_on_trivial_site() {
        let mut b = SiteBuilder::new();
        b.object("X");
        let s = Arc::new(b.build());
        let m = PresheafC::constant(s.clone(), &k());
        assert!(is_weak_equivalence(&PresheafMap::identity(&m), None));
        assert!(!is_weak_equivalence(&PresheafMap::zero(&m, &m), None));
    }

    #[test]
    fn cech_over_identity_cover_is_sections() {
        let s = wuvp();
        let m = bad_w(&s);
        let h = Hypercover::identity(&s, 1, 2);
        let c = cech_complex(&h, &m, ChainMode::Normalized, None).unwrap();
        assert_eq!(c.complex, *m.value(1));
        assert!(crate::complexes::is_quasi_iso(&cech_unit(&h, &m, &c).unwrap()));
    }

    #[test]
    fn cech_matches_presheaf_hom_of_chains() {
        let s = wuvp();
        let m = bad_w(&s);
        let h = cech_nerve(&s, "n", &[1, 2], Base::Object(0), 3).unwrap();
        for (mode, cap) in [(ChainMode::Alternating, None), (ChainMode::Normalized, Some(3))] {
            let cells = Cells::new(&h, mode, cap).unwrap();
            let c = cech_complex(&h, &m, mode, cap).unwrap().complex;
            let oracle = presheaf_hom(&chains(&s, &h, &cells).unwrap(), &m).unwrap();
            for n in -1..=4 {
                assert_eq!(c.dim(n), oracle.dim(n), "degree {n}");
            }
            let (hc, ho) = (cohomology(&c), cohomology(&oracle));
            for n in 0..=3 {
                assert_eq!(hc.dim(n), ho.dim(n));
            }
        }
    }

    #[test]
    fn cohomology_presheaf_uses_cover() {
        let s = wuvp();
        let m = bad_w(&s);
        let reg = default_registry(&s).unwrap();
        assert_eq!(cohomology_presheaf(&m, 0, &reg).unwrap(), vec![1, 1, 1, 1]);
        assert!(matches!(cohomology_presheaf(&m, 0, &[]), Err(SiteError::UnregisteredObject(_))));
    }

    #[test]
    fn fibrancy_counterexample_pinpoints_w() {
        let s = wuvp();
        let m = bad_w(&s);
        let reg = default_registry(&s).unwrap();
        let rep = is_fibrant(&m, &reg).unwrap();
        assert!(!rep.is_fibration());
        assert_eq!(rep.failing_objects(), vec!["W"]);
        let sh = sheafify(&m);
        assert!(is_fibrant(&sh, &reg).unwrap().is_fibration());
    }

    #[test]
    fn kernel_criterion_agrees() {
        // f: M ⊕ N → N projection; fibration iff M fibrant
        let s = wuvp();
        let m = bad_w(&s);
        let good = sheafify(&m);
        let reg = default_registry(&s).unwrap();
        for (a, b) in [(m.clone(), good.clone()), (good.clone(), m.clone()), (good, m.clone())] {
            let (_, f) = presheaf_sum(&a, &b).unwrap();
            let (ker, _) = presheaf_kernel(&f).unwrap();
            assert_eq!(
                is_fibration(&f, &reg).unwrap().is_fibration(),
                is_fibrant(&ker, &reg).unwrap().is_fibration()
            );
        }
    }

    #[test]
    fn gac_counts_and_acyclicity() {
        let s = wuvp();
        let h = cech_nerve(&s, "n", &[1, 2], Base::Object(0), 2).unwrap();
        let g = generating_acyclic_cofibration(&h, 0, ChainMode::Alternating, None, &s).unwrap();
        assert_eq!(g.summands, [(-2, 1), (-1, 2), (0, 1)].into_iter().collect());
        assert!(g.j.is_pointwise_injective());
        assert!(is_weak_equivalence(&g.j, None));
        assert!(is_locally_acyclic(&g.k, None));
        assert!(is_locally_acyclic(&sheafify(&g.k), None));
        assert!(!g.k.values().iter().all(|c| c.is_acyclic()));
        let id = Hypercover::identity(&s, 0, 1);
        let g0 = generating_acyclic_cofibration(&id, 0, ChainMode::Normalized, None, &s).unwrap();
        assert_eq!(g0.k.value(0).dim_list(), vec![1, 1]);
        assert!(g0.k.values().iter().all(|c| c.is_acyclic()));
    }
}
