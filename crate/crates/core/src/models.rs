//! Built-in two-chart models of P¹ with windowed Laurent section spaces,
//! and the small site used as the fibrancy counterexample.
//!
//! On U0 the coordinate is `x`, on U1 it is `1/x`; every section space is
//! written in powers of `x`. A window `D` keeps `D + 1` monomials per chart.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use crate::complexes::{ChainMap, FinComplex};
use crate::dglie::DgLie;
use crate::exactla::{int, SparseMatrix};
use crate::site::{FinSite, PresheafC, SiteBuilder};
use crate::sullivan::LieCover;

pub const U0: usize = 0;
pub const U1: usize = 1;
pub const U01: usize = 2;

/// Objects `U0, U1, U01` with `U01 ≤ U0, U1`, only identity covers, and the
/// global cover `{U0, U1}`.
pub fn p1_site() -> Arc<FinSite> {
    let mut b = SiteBuilder::new();
    let u0 = b.object("U0");
    let u1 = b.object("U1");
    let u01 = b.object("U01");
    b.leq(u01, u0).leq(u01, u1);
    b.meet(u0, u1, Some(u01));
    b.global_cover("P1", &[u0, u1]);
    Arc::new(b.build())
}

/// `W` covered by `{U, V}` with `U ∧ V = P`.
pub fn wuvp_site() -> Arc<FinSite> {
    let mut b = SiteBuilder::new();
    let w = b.object("W");
    let u = b.object("U");
    let v = b.object("V");
    let p = b.object("P");
    b.leq(u, w).leq(v, w).leq(p, u).leq(p, v);
    b.meet(u, v, Some(p));
    b.cover(w, &[u, v]);
    Arc::new(b.build())
}

/// `M(W) = 0` and `k` with identity restrictions elsewhere: the values
/// over `W` do not glue, so `M → 0` is not a fibration.
pub fn wuvp_presheaf(site: &Arc<FinSite>) -> PresheafC {
    let k = FinComplex::concentrated(0, 1);
    let z = FinComplex::zero();
    let mut r = BTreeMap::new();
    r.insert((1, 3), ChainMap::identity(&k));
    r.insert((2, 3), ChainMap::identity(&k));
    r.insert((0, 1), ChainMap::zero(&z, &k));
    r.insert((0, 2), ChainMap::zero(&z, &k));
    PresheafC::new(site.clone(), vec![z, k.clone(), k.clone(), k], r).expect("functorial")
}

/// An inclusive range of exponents of `x`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Window {
    pub lo: i64,
    pub hi: i64,
}

impl Window {
    pub fn new(lo: i64, hi: i64) -> Self {
        Window { lo, hi }
    }

    pub fn len(&self) -> usize {
        (self.hi - self.lo + 1).max(0) as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, e: i64) -> bool {
        self.lo <= e && e <= self.hi
    }

    pub fn index(&self, e: i64) -> Option<usize> {
        self.contains(e).then(|| (e - self.lo) as usize)
    }

    pub fn exponents(&self) -> impl Iterator<Item = i64> {
        self.lo..=self.hi
    }

    /// The monomial inclusion into a larger window.
    pub fn inclusion_into(&self, big: &Window) -> SparseMatrix {
        let mut m = SparseMatrix::zeros(big.len(), self.len());
        for e in self.exponents() {
            if let Some(r) = big.index(e) {
                m.set(r, (e - self.lo) as usize, int(1));
            }
        }
        m
    }
}

impl fmt::Display for Window {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x^{}..x^{}", self.lo, self.hi)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum P1Model {
    /// `O(n)`; `n = 0` is the structure sheaf.
    Twist(i64),
    /// Vector fields `x^a ∂`, with `∂ = d/dx`.
    Tangent,
}

impl P1Model {
    pub fn structure() -> Self {
        P1Model::Twist(0)
    }

    pub fn name(&self) -> String {
        match self {
            P1Model::Twist(0) => "p1-structure".into(),
            P1Model::Twist(n) => format!("p1-twist {n}"),
            P1Model::Tangent => "p1-tangent".into(),
        }
    }

    /// Windows over `U0`, `U1`, `U01`.
    pub fn windows(&self, d: usize) -> [Window; 3] {
        let d = d as i64;
        // on U1, sections are (1/x)^b times the chart-1 generator x^s
        let s = match self {
            P1Model::Twist(n) => *n,
            // ∂_y = −x² ∂_x for y = 1/x
            P1Model::Tangent => 2,
        };
        let w0 = Window::new(0, d);
        let w1 = Window::new(s - d, s);
        let w01 = Window::new(w0.lo.min(w1.lo), w0.hi.max(w1.hi));
        [w0, w1, w01]
    }

    pub fn presheaf(&self, d: usize) -> PresheafC {
        let [w0, w1, w01] = self.windows(d);
        let c = |w: &Window| FinComplex::concentrated(0, w.len());
        let (c0, c1, c01) = (c(&w0), c(&w1), c(&w01));
        let map = |src: &FinComplex, w: &Window, tgt: &FinComplex| {
            ChainMap::new(
                src.clone(),
                tgt.clone(),
                BTreeMap::from([(0, w.inclusion_into(&w01))]),
            )
            .expect("degree-0 map")
        };
        let mut r = BTreeMap::new();
        r.insert((U0, U01), map(&c0, &w0, &c01));
        r.insert((U1, U01), map(&c1, &w1, &c01));
        PresheafC::new(p1_site(), vec![c0, c1, c01], r).expect("functorial")
    }

    /// The model as a dg Lie algebra in degree 0 on each chart: abelian for
    /// `O(n)`, the Witt bracket `[x^a∂, x^b∂] = (b − a) x^{a+b−1}∂` for the
    /// tangent model with out-of-window brackets recorded as overflow.
    pub fn lie_algebra(&self, w: &Window) -> DgLie {
        match self {
            P1Model::Twist(_) => DgLie::abelian(&FinComplex::concentrated(0, w.len())),
            P1Model::Tangent => windowed_witt(w),
        }
    }

    pub fn lie_cover(&self, d: usize) -> LieCover {
        let [w0, w1, w01] = self.windows(d);
        let mut cover = LieCover {
            members: 2,
            ..Default::default()
        };
        cover.algebras.insert(vec![0], self.lie_algebra(&w0));
        cover.algebras.insert(vec![1], self.lie_algebra(&w1));
        cover.algebras.insert(vec![0, 1], self.lie_algebra(&w01));
        cover.restrictions.insert((vec![0], vec![0, 1]), w0.inclusion_into(&w01));
        cover.restrictions.insert((vec![1], vec![0, 1]), w1.inclusion_into(&w01));
        cover
    }

    pub fn parse(s: &str) -> Option<Self> {
        let t = s.trim();
        match t {
            "p1-structure" => Some(P1Model::structure()),
            "p1-tangent" => Some(P1Model::Tangent),
            _ => {
                let n = t.strip_prefix("p1-twist")?.trim();
                n.parse().ok().map(P1Model::Twist)
            }
        }
    }
}

fn windowed_witt(w: &Window) -> DgLie {
    let n = w.len();
    let mut bracket = BTreeMap::new();
    let mut overflow = BTreeSet::new();
    for a in w.exponents() {
        for b in w.exponents() {
            if a == b {
                continue;
            }
            let (i, j) = (w.index(a).unwrap(), w.index(b).unwrap());
            match w.index(a + b - 1) {
                Some(k) => {
                    bracket.insert((i, j), vec![(k, int(b - a))]);
                }
                None => {
                    overflow.insert((i, j));
                }
            }
        }
    }
    DgLie::new(vec![0; n], SparseMatrix::zeros(n, n), bracket, overflow).expect("windowed Witt algebra")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complexes::cohomology;
    use crate::dglie::validate_dglie;
    use crate::site::{default_registry, is_fibrant, rgamma, validate_site};

    fn numbers(m: P1Model, d: usize) -> (usize, usize) {
        let f = m.presheaf(d);
        let reg = default_registry(f.site()).unwrap();
        let h = cohomology(&rgamma(&f, &reg[0]).unwrap());
        (h.dim(0), h.dim(1))
    }

    #[test]
    fn sites_validate() {
        assert!(validate_site(&p1_site()).is_valid());
        assert!(validate_site(&wuvp_site()).is_valid());
    }

    #[test]
    fn cech_numbers_stable() {
        for d in [2, 4] {
            assert_eq!(numbers(P1Model::structure(), d), (1, 0));
            assert_eq!(numbers(P1Model::Twist(-2), d), (0, 1));
            assert_eq!(numbers(P1Model::Twist(1), d), (2, 0));
            assert_eq!(numbers(P1Model::Tangent, d), (3, 0));
        }
    }

    #[test]
    fn fibrancy_models() {
        let f = P1Model::structure().presheaf(3);
        let reg = default_registry(f.site()).unwrap();
        assert!(is_fibrant(&f, &reg).unwrap().is_fibration());
        let s = wuvp_site();
        let m = wuvp_presheaf(&s);
        let rep = is_fibrant(&m, &default_registry(&s).unwrap()).unwrap();
        assert_eq!(rep.failing_objects(), vec!["W"]);
    }

    #[test]
    fn tangent_charts_are_partial_lie_algebras() {
        let cover = P1Model::Tangent.lie_cover(3);
        for g in cover.algebras.values() {
            assert!(validate_dglie(g).is_valid());
        }
        for ((from, to), r) in &cover.restrictions {
            assert!(cover.algebras[from].is_morphism_to(r, &cover.algebras[to]));
        }
    }

    #[test]
    fn thom_whitney_on_models() {
        use crate::dglie::{kuranishi, ArtinBase};
        use crate::sullivan::{choose_truncation, descent_compare, tw_tot, CosimplicialDgLie};
        for (m, h) in [(P1Model::Twist(-2), (0, 1)), (P1Model::Tangent, (3, 0)), (P1Model::structure(), (1, 0))] {
            let g = CosimplicialDgLie::from_cover(&m.lie_cover(3)).unwrap();
            let tr = choose_truncation(&g, 3).unwrap();
            let tw = tw_tot(&g, tr.cap).unwrap();
            let c = cohomology(&tw.complex().unwrap());
            assert_eq!((c.dim(0), c.dim(1)), h, "{}", m.name());
        }
        let g = CosimplicialDgLie::from_cover(&P1Model::Twist(-2).lie_cover(2)).unwrap();
        let rep = descent_compare(&g, &ArtinBase::truncated_poly(1), 3).unwrap();
        assert!(rep.agrees());
        assert_eq!(rep.tot_coordinates, 1);
        let g = CosimplicialDgLie::from_cover(&P1Model::Tangent.lie_cover(3)).unwrap();
        let tr = choose_truncation(&g, 3).unwrap();
        let tw = tw_tot(&g, tr.cap).unwrap();
        let k = kuranishi(tw.lie(), &ArtinBase::truncated_poly(2), None).unwrap();
        assert!(k.domain_is_point());
    }

    #[test]
    fn parse_names() {
        assert_eq!(P1Model::parse("p1-twist -2"), Some(P1Model::Twist(-2)));
        assert_eq!(P1Model::parse("p1-tangent"), Some(P1Model::Tangent));
        assert_eq!(P1Model::Twist(-2).name(), "p1-twist -2");
        assert_eq!(P1Model::parse("p2"), None);
    }
}
