//! Simplicial semi-representable presheaves on a finite poset site and the
//! hypercover conditions.
//!
//! A level is a list of objects: the formal coproduct of their representable
//! presheaves. Structure maps send a component to a component; on a poset the
//! order witness is implied and only checked.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use num_traits::One;
use thiserror::Error;

use crate::complexes::{ChainMap, FinComplex};
use crate::exactla::{Scalar, SparseMatrix};
use crate::site::{FinSite, Meet, PresheafC, PresheafMap, SiteError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HypercoverError {
    #[error("level {level}: {message}")]
    Shape { level: usize, message: String },
    #[error("simplicial identity {identity} fails on simplex {simplex} of level {level}")]
    Identity {
        identity: String,
        level: usize,
        simplex: usize,
    },
    #[error("the objects {0:?} have common lower bounds but no meet")]
    MissingMeet(Vec<String>),
    #[error("normalized chains of an object that is not finite dimensional need a cap")]
    UnboundedWithoutCap,
    #[error("cap {cap} exceeds the {stored} stored levels")]
    CapExceeded { cap: usize, stored: usize },
    #[error("alternating cochains are only defined for Čech nerves")]
    NotANerve,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Base {
    Object(usize),
    /// The final presheaf, which need not be representable.
    Final,
}

/// A simplicial object whose levels are formal coproducts of representables,
/// stored up to a finite top level.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimpPresheaf {
    levels: Vec<Vec<usize>>,
    /// `faces[n][i]` maps level `n` to level `n-1`; `faces[0]` is empty.
    faces: Vec<Vec<Vec<usize>>>,
    /// `degens[n][i]` maps level `n` to level `n+1`.
    degens: Vec<Vec<Vec<usize>>>,
    /// Declared bound above which every simplex is degenerate.
    skeletal: Option<usize>,
    degenerate: Vec<Vec<bool>>,
}

impl SimpPresheaf {
    pub fn new(
        levels: Vec<Vec<usize>>,
        faces: Vec<Vec<Vec<usize>>>,
        degens: Vec<Vec<Vec<usize>>>,
        skeletal: Option<usize>,
    ) -> Result<Self, HypercoverError> {
        let shape = |level: usize, message: String| HypercoverError::Shape { level, message };
        if levels.is_empty() {
            return Err(shape(0, "no levels".into()));
        }
        let top = levels.len() - 1;
        if faces.len() != levels.len() || degens.len() != top {
            return Err(shape(0, "face/degeneracy tables do not match the number of levels".into()));
        }
        for n in 0..=top {
            let expect = if n == 0 { 0 } else { n + 1 };
            if faces[n].len() != expect {
                return Err(shape(n, format!("expected {expect} face maps")));
            }
            for f in &faces[n] {
                if f.len() != levels[n].len() || f.iter().any(|&b| b >= levels[n - 1].len()) {
                    return Err(shape(n, "face map has the wrong size or range".into()));
                }
            }
            if n < top {
                if degens[n].len() != n + 1 {
                    return Err(shape(n, format!("expected {} degeneracy maps", n + 1)));
                }
                for s in &degens[n] {
                    if s.len() != levels[n].len() || s.iter().any(|&b| b >= levels[n + 1].len()) {
                        return Err(shape(n, "degeneracy map has the wrong size or range".into()));
                    }
                }
            }
        }
        let mut degenerate: Vec<Vec<bool>> = levels.iter().map(|l| vec![false; l.len()]).collect();
        for n in 0..top {
            for s in &degens[n] {
                for &b in s {
                    degenerate[n + 1][b] = true;
                }
            }
        }
        let k = SimpPresheaf {
            levels,
            faces,
            degens,
            skeletal,
            degenerate,
        };
        k.check_identities()?;
        if let Some(b) = skeletal {
            for n in b + 1..=top {
                if let Some(a) = (0..k.levels[n].len()).find(|&a| !k.degenerate[n][a]) {
                    return Err(shape(n, format!("simplex {a} is nondegenerate above the declared skeletal bound {b}")));
                }
            }
        }
        Ok(k)
    }

    fn check_identities(&self) -> Result<(), HypercoverError> {
        let top = self.top();
        let fail = |identity: String, level: usize, simplex: usize| {
            Err(HypercoverError::Identity {
                identity,
                level,
                simplex,
            })
        };
        for n in 0..=top {
            for a in 0..self.levels[n].len() {
                if n >= 2 {
                    for j in 1..=n {
                        for i in 0..j {
                            let l = self.faces[n - 1][i][self.faces[n][j][a]];
                            let r = self.faces[n - 1][j - 1][self.faces[n][i][a]];
                            if l != r {
                                return fail(format!("d{i} d{j} = d{} d{i}", j - 1), n, a);
                            }
                        }
                    }
                }
                if n + 2 <= top {
                    for j in 0..=n {
                        for i in 0..=j {
                            let l = self.degens[n + 1][i][self.degens[n][j][a]];
                            let r = self.degens[n + 1][j + 1][self.degens[n][i][a]];
                            if l != r {
                                return fail(format!("s{i} s{j} = s{} s{i}", j + 1), n, a);
                            }
                        }
                    }
                }
                if n < top {
                    for j in 0..=n {
                        let sa = self.degens[n][j][a];
                        for i in 0..=n + 1 {
                            let l = self.faces[n + 1][i][sa];
                            let r = if i == j || i == j + 1 {
                                a
                            } else if i < j {
                                self.degens[n - 1][j - 1][self.faces[n][i][a]]
                            } else {
                                self.degens[n - 1][j][self.faces[n][i - 1][a]]
                            };
                            if l != r {
                                return fail(format!("d{i} s{j}"), n, a);
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn top(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn level(&self, n: usize) -> &[usize] {
        &self.levels[n]
    }

    pub fn face(&self, n: usize, i: usize) -> &[usize] {
        &self.faces[n][i]
    }

    pub fn degeneracy(&self, n: usize, i: usize) -> &[usize] {
        &self.degens[n][i]
    }

    pub fn declared_skeletal(&self) -> Option<usize> {
        self.skeletal
    }

    pub fn is_degenerate(&self, n: usize, a: usize) -> bool {
        self.degenerate[n][a]
    }

    pub fn nondegenerate(&self, n: usize) -> Vec<usize> {
        (0..self.levels[n].len()).filter(|&a| !self.degenerate[n][a]).collect()
    }

    /// Indices of the components at level `n` having a section over `w`.
    pub fn sections_over(&self, site: &FinSite, n: usize, w: usize) -> Vec<usize> {
        (0..self.levels[n].len()).filter(|&a| site.leq(w, self.levels[n][a])).collect()
    }

    /// Order witnesses: each face lands in a larger object and degeneracies
    /// preserve objects.
    pub fn witness_violations(&self, site: &FinSite) -> Vec<String> {
        let mut out = Vec::new();
        for n in 0..=self.top() {
            if self.levels[n].iter().any(|&o| o >= site.len()) {
                out.push(format!("level {n} names an object outside the site"));
                return out;
            }
        }
        for n in 1..=self.top() {
            for (i, f) in self.faces[n].iter().enumerate() {
                for (a, &b) in f.iter().enumerate() {
                    if !site.leq(self.levels[n][a], self.levels[n - 1][b]) {
                        out.push(format!(
                            "face d{i} of simplex {a} at level {n}: {} is not below {}",
                            site.name(self.levels[n][a]),
                            site.name(self.levels[n - 1][b])
                        ));
                    }
                }
            }
        }
        for n in 0..self.top() {
            for (i, s) in self.degens[n].iter().enumerate() {
                for (a, &b) in s.iter().enumerate() {
                    if self.levels[n][a] != self.levels[n + 1][b] {
                        out.push(format!("degeneracy s{i} of simplex {a} at level {n} changes the object"));
                    }
                }
            }
        }
        out
    }

    /// Smallest `b` below the top level such that every stored simplex above
    /// `b` is degenerate, or the declared bound.
    pub fn finite_dimension_bound(&self) -> Option<usize> {
        if self.skeletal.is_some() {
            return self.skeletal;
        }
        let top = self.top();
        (0..top).find(|&b| (b + 1..=top).all(|n| self.degenerate[n].iter().all(|&d| d)))
    }

    pub fn is_finite_dimensional(&self) -> bool {
        self.finite_dimension_bound().is_some()
    }

    /// Checks that every simplex is uniquely an iterated degeneracy of a
    /// nondegenerate one, level by level.
    pub fn is_split(&self) -> bool {
        for n in 0..=self.top() {
            let mut hits = vec![0usize; self.levels[n].len()];
            for k in 0..=n {
                for seq in increasing_sequences(n - k, k) {
                    for a in self.nondegenerate(k) {
                        let mut x = a;
                        for (t, &j) in seq.iter().enumerate() {
                            x = self.degens[k + t][j][x];
                        }
                        hits[x] += 1;
                    }
                }
            }
            if hits.iter().any(|&h| h != 1) {
                return false;
            }
        }
        true
    }
}

/// Sequences `a_1 < ... < a_r` with `a_t <= k + t - 1`, i.e. the canonical
/// degeneracy words from level `k` to level `k + r`.
fn increasing_sequences(r: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(r: usize, k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == r {
            out.push(cur.clone());
            return;
        }
        let t = cur.len();
        for a in start..=k + t {
            cur.push(a);
            go(r, k, a + 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(r, k, 0, &mut Vec::new(), &mut out);
    out
}

/// A one-simplex of the generating data: an object with source and target
/// vertices (`d1` and `d0`).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Edge {
    pub object: usize,
    pub source: usize,
    pub target: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Hypercover {
    name: String,
    base: Base,
    simp: SimpPresheaf,
    /// Vertex sequence of each simplex when built from a 1-skeleton.
    vertices: Option<Vec<Vec<Vec<usize>>>>,
    /// The covering family when this is a Čech nerve.
    family: Option<Vec<usize>>,
}

impl Hypercover {
    /// Wraps tabulated data. Validation is separate.
    pub fn from_tables(name: impl Into<String>, base: Base, simp: SimpPresheaf) -> Self {
        Hypercover {
            name: name.into(),
            base,
            simp,
            vertices: None,
            family: None,
        }
    }

    /// The coskeletal completion of 1-skeleton data: an `n`-simplex is a
    /// choice of vertices `v_0..v_n` and edges `e_ij` (`i < j`) from `v_i`
    /// to `v_j` whose objects have a common lower bound; its object is their
    /// meet. `degenerate[v]` is the edge index of `s0 v`.
    #[allow(clippy::too_many_arguments)]
    pub fn from_one_skeleton(
        site: &FinSite,
        name: impl Into<String>,
        base: Base,
        vertices: &[usize],
        edges: &[Edge],
        degenerate: &[usize],
        cap: usize,
    ) -> Result<Self, HypercoverError> {
        let shape = |level, message: &str| HypercoverError::Shape {
            level,
            message: message.into(),
        };
        if degenerate.len() != vertices.len() {
            return Err(shape(1, "one degenerate edge per vertex is required"));
        }
        for (v, &e) in degenerate.iter().enumerate() {
            let ok = edges
                .get(e)
                .is_some_and(|ed| ed.source == v && ed.target == v && ed.object == vertices[v]);
            if !ok {
                return Err(shape(1, "degenerate edge must be a loop on its vertex with the same object"));
            }
        }
        if edges.iter().any(|e| e.source >= vertices.len() || e.target >= vertices.len()) {
            return Err(shape(1, "edge endpoint out of range"));
        }
        let mut between: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
        for (i, e) in edges.iter().enumerate() {
            between.entry((e.source, e.target)).or_default().push(i);
        }

        // simplex key: vertices, then edges ordered (0,1),(0,2),(1,2),(0,3),...
        type Key = (Vec<usize>, Vec<usize>);
        let mut keys: Vec<Vec<Key>> = Vec::new();
        let mut objs: Vec<Vec<usize>> = Vec::new();
        let mut lookup: Vec<HashMap<Key, usize>> = Vec::new();
        let mut lvl_keys = Vec::new();
        let mut lvl_objs = Vec::new();
        for (v, &o) in vertices.iter().enumerate() {
            lvl_keys.push((vec![v], vec![]));
            lvl_objs.push(o);
        }
        for n in 0..=cap {
            if n > 0 {
                lvl_keys = Vec::new();
                lvl_objs = Vec::new();
                let prev_keys = &keys[n - 1];
                let prev_objs = &objs[n - 1];
                for (pk, &po) in prev_keys.iter().zip(prev_objs) {
                    for w in 0..vertices.len() {
                        let cands: Vec<&Vec<usize>> = pk
                            .0
                            .iter()
                            .map(|&vi| between.get(&(vi, w)).unwrap_or(&EMPTY))
                            .collect();
                        for choice in product(&cands) {
                            let mut members = vec![po, vertices[w]];
                            members.extend(choice.iter().map(|&e| edges[e].object));
                            match site.meet_all(&members) {
                                Meet::Obj(o) => {
                                    let mut verts = pk.0.clone();
                                    verts.push(w);
                                    let mut es = pk.1.clone();
                                    es.extend(choice);
                                    lvl_keys.push((verts, es));
                                    lvl_objs.push(o);
                                }
                                Meet::Empty => {}
                                Meet::Missing => {
                                    return Err(HypercoverError::MissingMeet(
                                        members.iter().map(|&m| site.name(m).to_string()).collect(),
                                    ))
                                }
                            }
                        }
                    }
                }
            }
            lookup.push(lvl_keys.iter().cloned().enumerate().map(|(i, k)| (k, i)).collect());
            keys.push(std::mem::take(&mut lvl_keys));
            objs.push(std::mem::take(&mut lvl_objs));
        }

        let pos = |i: usize, j: usize| j * (j - 1) / 2 + i;
        let mut faces = vec![Vec::new()];
        for n in 1..=cap {
            let mut fs = Vec::new();
            for k in 0..=n {
                let map = keys[n]
                    .iter()
                    .map(|(vs, es)| {
                        let old = |m: usize| if m >= k { m + 1 } else { m };
                        let nv: Vec<usize> = (0..n).map(|m| vs[old(m)]).collect();
                        let mut ne = Vec::new();
                        for j in 1..n {
                            for i in 0..j {
                                ne.push(es[pos(old(i), old(j))]);
                            }
                        }
                        lookup[n - 1][&(nv, ne)]
                    })
                    .collect();
                fs.push(map);
            }
            faces.push(fs);
        }
        let mut degens = Vec::new();
        for n in 0..cap {
            let mut ss = Vec::new();
            for k in 0..=n {
                let map = keys[n]
                    .iter()
                    .map(|(vs, es)| {
                        let sigma = |m: usize| if m > k { m - 1 } else { m };
                        let nv: Vec<usize> = (0..n + 2).map(|m| vs[sigma(m)]).collect();
                        let mut ne = Vec::new();
                        for j in 1..n + 2 {
                            for i in 0..j {
                                let (a, b) = (sigma(i), sigma(j));
                                ne.push(if a == b { degenerate[vs[a]] } else { es[pos(a, b)] });
                            }
                        }
                        lookup[n + 1][&(nv, ne)]
                    })
                    .collect();
                ss.push(map);
            }
            degens.push(ss);
        }
        let all_degenerate = (0..edges.len()).all(|e| degenerate.contains(&e));
        let skeletal = if all_degenerate { Some(0) } else { None };
        let simp = SimpPresheaf::new(objs, faces, degens, skeletal)?;
        let vertex_seqs = keys.into_iter().map(|l| l.into_iter().map(|k| k.0).collect()).collect();
        Ok(Hypercover {
            name: name.into(),
            base,
            simp,
            vertices: Some(vertex_seqs),
            family: None,
        })
    }

    /// The constant simplicial object on a single object.
    pub fn identity(site: &FinSite, u: usize, cap: usize) -> Self {
        let e = Edge {
            object: u,
            source: 0,
            target: 0,
        };
        let mut h = Self::from_one_skeleton(site, format!("id({})", site.name(u)), Base::Object(u), &[u], &[e], &[0], cap)
            .expect("constant object is well formed");
        h.family = Some(vec![u]);
        h
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn base(&self) -> Base {
        self.base
    }

    pub fn simp(&self) -> &SimpPresheaf {
        &self.simp
    }

    pub fn family(&self) -> Option<&[usize]> {
        self.family.as_deref()
    }

    pub fn is_nerve(&self) -> bool {
        self.family.is_some()
    }

    pub fn vertices(&self, n: usize, a: usize) -> Option<&[usize]> {
        self.vertices.as_ref().map(|v| v[n][a].as_slice())
    }
}

static EMPTY: Vec<usize> = Vec::new();

fn product(cands: &[&Vec<usize>]) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for c in cands {
        let mut next = Vec::new();
        for prefix in &out {
            for &x in c.iter() {
                let mut p = prefix.clone();
                p.push(x);
                next.push(p);
            }
        }
        out = next;
    }
    out
}

/// The Čech nerve of a family: level `n` lists the meets of all
/// `(n+1)`-tuples of members, in lexicographic order of tuples; tuples with no
/// common lower bound are omitted.
pub fn cech_nerve(
    site: &FinSite,
    name: impl Into<String>,
    family: &[usize],
    base: Base,
    cap: usize,
) -> Result<Hypercover, HypercoverError> {
    let mut edges = Vec::new();
    let mut degenerate = vec![0; family.len()];
    for (i, &a) in family.iter().enumerate() {
        for (j, &b) in family.iter().enumerate() {
            match site.meet(a, b) {
                Meet::Obj(o) => {
                    if i == j {
                        degenerate[i] = edges.len();
                    }
                    edges.push(Edge {
                        object: o,
                        source: i,
                        target: j,
                    });
                }
                Meet::Empty => {}
                Meet::Missing => {
                    return Err(HypercoverError::MissingMeet(vec![
                        site.name(a).to_string(),
                        site.name(b).to_string(),
                    ]))
                }
            }
        }
    }
    let mut h = Hypercover::from_one_skeleton(site, name, base, family, &edges, &degenerate, cap)?;
    h.family = Some(family.to_vec());
    Ok(h)
}

/// Sections of `cosk_n(K)` at level `m` over each object.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoskeletonLevel {
    pub n: usize,
    pub level: usize,
    /// The `(n+1)`-element subsets of `{0..m}` indexing a section's entries.
    pub subsets: Vec<Vec<usize>>,
    /// For each object, the sections over it.
    pub sections: Vec<Vec<Vec<usize>>>,
}

fn subsets_of_size(m: usize, size: usize) -> Vec<Vec<usize>> {
    fn go(m: usize, size: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == size {
            out.push(cur.clone());
            return;
        }
        for x in start..=m {
            cur.push(x);
            go(m, size, x + 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(m, size, 0, &mut Vec::new(), &mut out);
    out
}

/// Compatible families `(x_S)` indexed by `(n+1)`-subsets `S` of `{0..m}`,
/// with `x_S` an `n`-simplex and shared `(n-1)`-faces agreeing. This is
/// `Hom(sk_n Δ[m], K)`; each family comes with the set of objects it is a
/// section over.
fn matching_families(site: &FinSite, k: &SimpPresheaf, n: usize, m: usize) -> (Vec<Vec<usize>>, Vec<Vec<usize>>) {
    let subsets = subsets_of_size(m, n + 1);
    // constraints between subsets S, S' sharing n elements:
    // d_i x_S = d_j x_S' where S \ S[i] = S' \ S'[j]
    let mut constraints: Vec<Vec<(usize, usize, usize)>> = vec![Vec::new(); subsets.len()];
    if n >= 1 {
        for (t, s) in subsets.iter().enumerate() {
            for (u, s2) in subsets.iter().enumerate().take(t) {
                for i in 0..=n {
                    let mut face: Vec<usize> = s.clone();
                    face.remove(i);
                    if let Some(j) = (0..=n).find(|&j| {
                        let mut f2 = s2.clone();
                        f2.remove(j);
                        f2 == face
                    }) {
                        constraints[t].push((i, u, j));
                    }
                }
            }
        }
    }
    let all: Vec<usize> = (0..site.len()).collect();
    let mut out = Vec::new();
    let mut domains = Vec::new();
    #[allow(clippy::too_many_arguments)]
    fn go(
        site: &FinSite,
        k: &SimpPresheaf,
        n: usize,
        constraints: &[Vec<(usize, usize, usize)>],
        cur: &mut Vec<usize>,
        dom: Vec<usize>,
        out: &mut Vec<Vec<usize>>,
        domains: &mut Vec<Vec<usize>>,
    ) {
        let t = cur.len();
        if t == constraints.len() {
            out.push(cur.clone());
            domains.push(dom);
            return;
        }
        for a in 0..k.level(n).len() {
            let ok = constraints[t]
                .iter()
                .all(|&(i, u, j)| k.face(n, i)[a] == k.face(n, j)[cur[u]]);
            if !ok {
                continue;
            }
            let d: Vec<usize> = dom.iter().copied().filter(|&w| site.leq(w, k.level(n)[a])).collect();
            if d.is_empty() {
                continue;
            }
            cur.push(a);
            go(site, k, n, constraints, cur, d, out, domains);
            cur.pop();
        }
    }
    go(site, k, n, &constraints, &mut Vec::new(), all, &mut out, &mut domains);
    (out, domains)
}

/// Level `m` of `cosk_n(K)` as sets of sections over each object. For
/// `m <= n` this is `K_m` itself.
pub fn coskeleton(site: &FinSite, k: &SimpPresheaf, n: usize, m: usize) -> CoskeletonLevel {
    let mut sections = vec![Vec::new(); site.len()];
    if m <= n {
        for (w, secs) in sections.iter_mut().enumerate() {
            *secs = k.sections_over(site, m, w).into_iter().map(|a| vec![a]).collect();
        }
        return CoskeletonLevel {
            n,
            level: m,
            subsets: vec![(0..=m).collect()],
            sections,
        };
    }
    let (fams, doms) = matching_families(site, k, n, m);
    for (f, d) in fams.iter().zip(&doms) {
        for &w in d {
            sections[w].push(f.clone());
        }
    }
    CoskeletonLevel {
        n,
        level: m,
        subsets: subsets_of_size(m, n + 1),
        sections,
    }
}

/// The image of a level-`m` simplex in `cosk_{m-1}(K)_m`, ordered by the
/// subsets of [`subsets_of_size`]: subset `{0..m} \ {i}` carries `d_i`.
fn boundary(k: &SimpPresheaf, m: usize, a: usize) -> Vec<usize> {
    // subsets of size m in lex order are the complements of m, m-1, ..., 0
    (0..=m).rev().map(|i| k.face(m, i)[a]).collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LiftFailure {
    pub level: usize,
    pub section: Vec<usize>,
    pub over: usize,
    pub unliftable_at: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HypercoverReport {
    pub name: String,
    pub structural: Vec<String>,
    pub hc1: Vec<LiftFailure>,
    /// Pairs `(over, unliftable_at)` where the augmentation fails to cover.
    pub hc2: Vec<(usize, usize)>,
    pub checked_up_to: usize,
    pub finite_dimension_bound: Option<usize>,
}

impl HypercoverReport {
    pub fn is_valid(&self) -> bool {
        self.structural.is_empty() && self.hc1.is_empty() && self.hc2.is_empty()
    }
}

/// Checks the structural conditions, local liftability of every matching
/// family against the coskeleton (HC1) up to the stored top level, and that
/// the augmentation is a cover (HC2).
pub fn validate_hypercover(site: &FinSite, v: &Hypercover) -> HypercoverReport {
    let k = &v.simp;
    let mut structural = k.witness_violations(site);
    let below_base = |w: usize| match v.base {
        Base::Object(u) => site.leq(w, u),
        Base::Final => true,
    };
    if let Base::Object(u) = v.base {
        if u >= site.len() {
            structural.push("base object outside the site".into());
        }
    }
    if !structural.is_empty() {
        return HypercoverReport {
            name: v.name.clone(),
            structural,
            hc1: Vec::new(),
            hc2: Vec::new(),
            checked_up_to: k.top(),
            finite_dimension_bound: k.finite_dimension_bound(),
        };
    }
    for (a, &o) in k.level(0).iter().enumerate() {
        if !below_base(o) {
            structural.push(format!("vertex {a} ({}) is not over the base", site.name(o)));
        }
    }

    let mut hc2 = Vec::new();
    let covered = |x: usize| k.level(0).iter().any(|&o| site.leq(x, o));
    for w in (0..site.len()).filter(|&w| below_base(w)) {
        if let Some(&x) = site.min_sieve(w).iter().find(|&&x| !covered(x)) {
            hc2.push((w, x));
        }
    }

    let mut hc1 = Vec::new();
    for m in 1..=k.top() {
        let mut lifts: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
        for a in 0..k.level(m).len() {
            lifts.entry(boundary(k, m, a)).or_default().push(k.level(m)[a]);
        }
        let (fams, doms) = matching_families(site, k, m - 1, m);
        'fam: for (f, dom) in fams.iter().zip(&doms) {
            let tops = lifts.get(f).cloned().unwrap_or_default();
            for &w in dom {
                if let Some(&x) = site
                    .min_sieve(w)
                    .iter()
                    .find(|&&x| !tops.iter().any(|&t| site.leq(x, t)))
                {
                    hc1.push(LiftFailure {
                        level: m,
                        section: f.clone(),
                        over: w,
                        unliftable_at: x,
                    });
                    continue 'fam;
                }
            }
        }
    }
    HypercoverReport {
        name: v.name.clone(),
        structural,
        hc1,
        hc2,
        checked_up_to: k.top(),
        finite_dimension_bound: k.finite_dimension_bound(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ChainMode {
    /// Nondegenerate simplices.
    Normalized,
    /// Strictly increasing vertex tuples of a Čech nerve.
    Alternating,
}

/// The simplices carrying cochains in each level, with the level range
/// determined by the mode, the declared skeletal bound and the cap.
#[derive(Clone, Debug)]
pub struct Cells {
    pub mode: ChainMode,
    pub levels: Vec<Vec<usize>>,
    pub truncated: bool,
    position: Vec<HashMap<usize, usize>>,
}

impl Cells {
    pub fn new(v: &Hypercover, mode: ChainMode, cap: Option<usize>) -> Result<Self, HypercoverError> {
        let k = &v.simp;
        let stored = k.top();
        let (top, truncated) = match mode {
            ChainMode::Normalized => match (k.finite_dimension_bound(), cap) {
                (Some(b), Some(c)) if c < b => (c, true),
                (Some(b), _) => (b, false),
                (None, Some(c)) => (c, true),
                (None, None) => return Err(HypercoverError::UnboundedWithoutCap),
            },
            ChainMode::Alternating => {
                let fam = v.family.as_ref().ok_or(HypercoverError::NotANerve)?;
                (fam.len().max(1) - 1, false)
            }
        };
        if top > stored {
            return Err(HypercoverError::CapExceeded { cap: top, stored });
        }
        let mut levels = Vec::new();
        for n in 0..=top {
            let sel: Vec<usize> = match mode {
                ChainMode::Normalized => k.nondegenerate(n),
                ChainMode::Alternating => (0..k.level(n).len())
                    .filter(|&a| v.vertices(n, a).unwrap().windows(2).all(|w| w[0] < w[1]))
                    .collect(),
            };
            levels.push(sel);
        }
        let position = levels
            .iter()
            .map(|l| l.iter().enumerate().map(|(i, &a)| (a, i)).collect())
            .collect();
        Ok(Cells {
            mode,
            levels,
            truncated,
            position,
        })
    }

    pub fn top(&self) -> usize {
        self.levels.len() - 1
    }

    /// Position of simplex `a` of level `n` among the selected ones.
    pub fn position(&self, n: usize, a: usize) -> Option<usize> {
        self.position.get(n)?.get(&a).copied()
    }

    /// Total number of representable summands per level.
    pub fn counts(&self) -> Vec<usize> {
        self.levels.iter().map(Vec::len).collect()
    }
}

/// The presheaf of chains `C_*(V)`: degree `-p` at `W` is free on the
/// selected level-`p` simplices whose object lies above `W`, with
/// `d = Σ (-1)^j d_j` (faces outside the selection are zero).
pub fn chains(site: &Arc<FinSite>, v: &Hypercover, cells: &Cells) -> Result<PresheafC, SiteError> {
    let k = &v.simp;
    let top = cells.top() as i32;
    // per object, per level: selected simplices with a section there
    let basis = |w: usize, p: usize| -> Vec<usize> {
        cells.levels[p].iter().copied().filter(|&a| site.leq(w, k.level(p)[a])).collect()
    };
    let mut values = Vec::new();
    for w in 0..site.len() {
        let bases: Vec<Vec<usize>> = (0..=cells.top()).map(|p| basis(w, p)).collect();
        let dims: Vec<usize> = (0..=cells.top()).rev().map(|p| bases[p].len()).collect();
        let mut diffs = BTreeMap::new();
        for p in 1..=cells.top() {
            let src = &bases[p];
            let tgt = &bases[p - 1];
            let tpos: HashMap<usize, usize> = tgt.iter().enumerate().map(|(i, &a)| (a, i)).collect();
            let mut m = SparseMatrix::zeros(tgt.len(), src.len());
            for (col, &a) in src.iter().enumerate() {
                for j in 0..=p {
                    let b = k.face(p, j)[a];
                    if let Some(&row) = tpos.get(&b) {
                        let sign = if j % 2 == 0 { Scalar::one() } else { -Scalar::one() };
                        m.add_to(row, col, &sign);
                    }
                }
            }
            diffs.insert(-(p as i32), m);
        }
        values.push(FinComplex::new(-top, dims, diffs)?);
    }
    let mut restr = BTreeMap::new();
    for w in 0..site.len() {
        for x in site.below(w) {
            if x == w {
                continue;
            }
            let mut maps = BTreeMap::new();
            for p in 0..=cells.top() {
                let bw = basis(w, p);
                let bx = basis(x, p);
                let pos: HashMap<usize, usize> = bx.iter().enumerate().map(|(i, &a)| (a, i)).collect();
                let mut m = SparseMatrix::zeros(bx.len(), bw.len());
                for (col, a) in bw.iter().enumerate() {
                    m.set(pos[a], col, Scalar::one());
                }
                maps.insert(-(p as i32), m);
            }
            restr.insert((w, x), ChainMap::new(values[w].clone(), values[x].clone(), maps)?);
        }
    }
    PresheafC::new(site.clone(), values, restr)
}

/// The linearized base `k·U` (or the constant presheaf `k` for the final
/// presheaf), in degree 0.
pub fn base_presheaf(site: &Arc<FinSite>, base: Base) -> PresheafC {
    match base {
        Base::Object(u) => PresheafC::representable(site.clone(), u),
        Base::Final => PresheafC::constant(site.clone(), &FinComplex::concentrated(0, 1)),
    }
}

/// The augmentation `C_*(V) → k·base`, sending every vertex to `1`.
pub fn augmentation(site: &Arc<FinSite>, v: &Hypercover, cells: &Cells) -> Result<PresheafMap, SiteError> {
    let c = chains(site, v, cells)?;
    let b = base_presheaf(site, v.base);
    let mut comps = Vec::new();
    for w in 0..site.len() {
        let src = c.value(w);
        let tgt = b.value(w);
        let mut m = SparseMatrix::zeros(tgt.dim(0), src.dim(0));
        if tgt.dim(0) == 1 {
            for col in 0..src.dim(0) {
                m.set(0, col, Scalar::one());
            }
        }
        comps.push(ChainMap::new(src.clone(), tgt.clone(), [(0, m)].into_iter().collect())?);
    }
    PresheafMap::new(c, b, comps)
}

/// Whether `C_*(ε) → k·base` is a weak equivalence, using alternating chains
/// for nerves and normalized chains up to level `cap` otherwise. When the
/// chains are truncated (`cap` is clamped to the stored levels), the cone degree that only sees the top level is
/// not inspected.
pub fn augmentation_is_weak_equivalence(
    site: &Arc<FinSite>,
    v: &Hypercover,
    cap: usize,
) -> Result<bool, SiteError> {
    let mode = if v.is_nerve() {
        ChainMode::Alternating
    } else {
        ChainMode::Normalized
    };
    let cap = cap.min(v.simp.top());
    let cells = Cells::new(v, mode, (mode == ChainMode::Normalized).then_some(cap))?;
    let f = augmentation(site, v, &cells)?;
    let floor = cells.truncated.then(|| -(cells.levels.len() as i32 - 1));
    Ok(crate::site::is_weak_equivalence(&f, floor))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::site::{is_weak_equivalence, SiteBuilder};

    fn p1() -> Arc<FinSite> {
        let mut b = SiteBuilder::new();
        let u0 = b.object("U0");
        let u1 = b.object("U1");
        let u01 = b.object("U01");
        b.leq(u01, u0);
        b.leq(u01, u1);
        b.global_cover("cover", &[u0, u1]);
        Arc::new(b.build())
    }

    fn wuvp() -> Arc<FinSite> {
        let mut b = SiteBuilder::new();
        let w = b.object("W");
        let u = b.object("U");
        let v = b.object("V");
        let p = b.object("P");
        b.leq(u, w);
        b.leq(v, w);
        b.leq(p, u);
        b.leq(p, v);
        b.cover(w, &[u, v]);
        Arc::new(b.build())
    }

    #[test]
    fn p1_nerve_levels() {
        let s = p1();
        let h = cech_nerve(&s, "n", &[0, 1], Base::Final, 3).unwrap();
        let names: Vec<&str> = h.simp().level(1).iter().map(|&o| s.name(o)).collect();
        assert_eq!(names, ["U0", "U01", "U01", "U1"]);
        assert_eq!(h.simp().level(0), &[0, 1]);
        assert_eq!(h.simp().level(2).len(), 8);
        assert!(validate_hypercover(&s, &h).is_valid());
        assert!(h.simp().is_split());
        assert!(!h.simp().is_finite_dimensional());
    }

    #[test]
    fn wuvp_nerve_level_one() {
        let s = wuvp();
        let h = cech_nerve(&s, "n", &[1, 2], Base::Object(0), 2).unwrap();
        let names: Vec<&str> = h.simp().level(1).iter().map(|&o| s.name(o)).collect();
        assert_eq!(names, ["U", "P", "P", "V"]);
        assert!(validate_hypercover(&s, &h).is_valid());
    }

    #[test]
    fn constant_hypercover() {
        let s = wuvp();
        let h = Hypercover::identity(&s, 0, 3);
        assert!(h.simp().level(3).len() == 1);
        assert!(validate_hypercover(&s, &h).is_valid());
        assert_eq!(h.simp().finite_dimension_bound(), Some(0));
        assert!(h.simp().is_split());
    }

    #[test]
    fn truncated_nerve_fails_hc1() {
        let s = p1();
        let edges = [
            Edge { object: 0, source: 0, target: 0 },
            Edge { object: 1, source: 1, target: 1 },
        ];
        let h = Hypercover::from_one_skeleton(&s, "diag", Base::Final, &[0, 1], &edges, &[0, 1], 2).unwrap();
        let rep = validate_hypercover(&s, &h);
        assert!(rep.hc2.is_empty());
        assert!(rep.hc1.iter().any(|f| f.level == 1 && f.over == 2));
    }

    #[test]
    fn uncovered_base_fails_hc2() {
        let s = wuvp();
        let h = cech_nerve(&s, "n", &[1], Base::Object(0), 1).unwrap();
        let rep = validate_hypercover(&s, &h);
        assert_eq!(rep.hc2.first().map(|x| x.0), Some(0));
    }

    #[test]
    fn coskeleton_counts() {
        let s = p1();
        let h = cech_nerve(&s, "n", &[0, 1], Base::Final, 2).unwrap();
        let c = coskeleton(&s, h.simp(), 0, 1);
        assert_eq!(c.sections[2].len(), 4);
        assert_eq!(c.sections[0].len(), 1);
        // the nerve is 0-coskeletal
        for m in 1..=2 {
            let c = coskeleton(&s, h.simp(), 0, m);
            for w in 0..3 {
                assert_eq!(c.sections[w].len(), h.simp().sections_over(&s, m, w).len());
            }
        }
        // one object, two points
        let mut b = SiteBuilder::new();
        let x = b.object("X");
        let one = b.build();
        let e = [
            Edge { object: x, source: 0, target: 0 },
            Edge { object: x, source: 1, target: 1 },
        ];
        let k = Hypercover::from_one_skeleton(&one, "pts", Base::Object(x), &[x, x], &e, &[0, 1], 1).unwrap();
        assert_eq!(coskeleton(&one, k.simp(), 0, 1).sections[0].len(), 4);
        // levels at or below n are returned unchanged
        assert_eq!(coskeleton(&one, k.simp(), 1, 1).sections[0].len(), 2);
    }

    #[test]
    fn chain_counts_and_modes() {
        let s = p1();
        let h = cech_nerve(&s, "n", &[0, 1], Base::Final, 2).unwrap();
        let alt = Cells::new(&h, ChainMode::Alternating, None).unwrap();
        assert_eq!(alt.counts(), vec![2, 1]);
        let norm = Cells::new(&h, ChainMode::Normalized, Some(2)).unwrap();
        assert_eq!(norm.counts(), vec![2, 2, 2]);
        assert!(matches!(
            Cells::new(&h, ChainMode::Normalized, None),
            Err(HypercoverError::UnboundedWithoutCap)
        ));
        assert!(matches!(
            Cells::new(&h, ChainMode::Normalized, Some(5)),
            Err(HypercoverError::CapExceeded { .. })
        ));
        let c = chains(&s, &h, &norm).unwrap();
        assert_eq!(c.value(2).dim(0), 2);
        assert_eq!(c.value(0).dim(0), 1);
    }

    #[test]
    fn constant_point_chains() {
        let s = wuvp();
        let h = Hypercover::identity(&s, 0, 2);
        let cells = Cells::new(&h, ChainMode::Normalized, None).unwrap();
        let c = chains(&s, &h, &cells).unwrap();
        assert_eq!(c.value(0), &FinComplex::concentrated(0, 1));
    }

    #[test]
    fn nerve_chains_resolve_base() {
        let s = wuvp();
        let h = cech_nerve(&s, "n", &[1, 2], Base::Object(0), 3).unwrap();
        let alt = Cells::new(&h, ChainMode::Alternating, None).unwrap();
        assert!(is_weak_equivalence(&augmentation(&s, &h, &alt).unwrap(), None));
        let capped = Cells::new(&h, ChainMode::Normalized, Some(3)).unwrap();
        let f = augmentation(&s, &h, &capped).unwrap();
        assert!(is_weak_equivalence(&f, Some(-3)));
        assert!(!is_weak_equivalence(&f, None));
    }

    #[test]
    fn increasing_sequences_count_surjections() {
        // number of surjections [n] -> [k] is C(n, k)
        assert_eq!(increasing_sequences(2, 1).len(), 3);
        assert_eq!(increasing_sequences(0, 4).len(), 1);
        assert_eq!(increasing_sequences(3, 0).len(), 1);
    }
}
