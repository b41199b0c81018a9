//! The input document: named JSON blocks with every scalar written as a
//! rational string, and conversions to the core types.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use defwb_core::complexes::{ChainMap, FinComplex};
use defwb_core::dglie::{ArtinBase, DgLie};
use defwb_core::equivariant::{AlgebraAction, DgLieAction, FinGroup, SiteAction};
use defwb_core::exactla::{format_scalar, parse_scalar, zero_vec, Scalar, SparseMatrix, SparseRow};
use defwb_core::hochschild::FinAssoc;
use defwb_core::hypercover::{cech_nerve, Base, Edge, Hypercover};
use defwb_core::site::{FinSite, PresheafC, SiteBuilder};
use defwb_core::sullivan::LieCover;

use crate::CliError;

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorkbenchDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub meta: Option<Meta>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub site: Option<SiteBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub presheaf: Option<PresheafBlock>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub hypercovers: Vec<HypercoverBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dglie: Option<DgLieBlock>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub artin_bases: BTreeMap<String, ArtinBlock>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub algebras: Vec<AlgebraBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<GroupBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub action: Option<ActionBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cosimplicial: Option<CoverBlock>,
    /// An element of `𝔪⊗𝔤` for the `mc` command.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub element: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pipeline: Option<Pipeline>,
}

/// Provenance of generated documents, echoed into reports.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Meta {
    pub generator: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<usize>,
}

/// Defaults for flags not given on the command line.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Pipeline {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cap: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub registry: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub object: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degree: Option<i32>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sparse {
    pub rows: usize,
    pub cols: usize,
    #[serde(default)]
    pub entries: Vec<(usize, usize, String)>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComplexBlock {
    pub lo: i32,
    pub dims: Vec<usize>,
    #[serde(default)]
    pub d: BTreeMap<i32, Sparse>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SiteBlock {
    pub objects: Vec<String>,
    /// Pairs `[small, big]`.
    #[serde(default)]
    pub leq: Vec<(String, String)>,
    #[serde(default)]
    pub covers: Vec<CoverFamily>,
    #[serde(default)]
    pub global_covers: Vec<GlobalCoverBlock>,
    /// Triples `[a, b, meet]`, `meet = null` when there is no lower bound.
    #[serde(default)]
    pub meets: Vec<(String, String, Option<String>)>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoverFamily {
    pub object: String,
    pub family: Vec<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GlobalCoverBlock {
    pub name: String,
    pub members: Vec<String>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PresheafBlock {
    pub values: BTreeMap<String, ComplexBlock>,
    #[serde(default)]
    pub restrictions: Vec<RestrictionBlock>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RestrictionBlock {
    pub from: String,
    pub to: String,
    pub maps: BTreeMap<i32, Sparse>,
}

/// A Čech nerve (`family`) or coskeletal 1-skeleton data (`vertices`,
/// `edges`, `degenerate`).
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HypercoverBlock {
    pub name: String,
    /// An object name, or `"final"`.
    pub base: String,
    pub cap: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vertices: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edges: Option<Vec<EdgeBlock>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degenerate: Option<Vec<usize>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeBlock {
    pub object: String,
    pub source: usize,
    pub target: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DgLieBlock {
    pub degrees: Vec<i32>,
    #[serde(default)]
    pub d: Vec<(usize, usize, String)>,
    /// Entries `[i, j, k, c]`: `[e_i, e_j]` has `e_k` coefficient `c`.
    #[serde(default)]
    pub bracket: Vec<(usize, usize, usize, String)>,
    #[serde(default)]
    pub overflow: Vec<(usize, usize)>,
    /// Fill `[e_j, e_i]` from `[e_i, e_j]` by graded antisymmetry.
    #[serde(default)]
    pub complete: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArtinBlock {
    pub degrees: Vec<i32>,
    #[serde(default)]
    pub mult: Vec<(usize, usize, usize, String)>,
    #[serde(default)]
    pub d: Vec<(usize, usize, String)>,
    #[serde(default)]
    pub weights: Option<Vec<usize>>,
}

/// Either a built-in name or explicit structure constants.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgebraBlock {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub products: Option<Vec<(usize, usize, usize, String)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unit: Option<Vec<String>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupBlock {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cyclic: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub elements: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<Vec<Vec<usize>>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionBlock {
    /// `algebra`, `dglie` or `site`.
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrices: Option<Vec<Sparse>>,
    /// Object names, one list per group element.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perms: Option<Vec<Vec<String>>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoverBlock {
    pub members: usize,
    pub algebras: Vec<CoverAlgebra>,
    pub restrictions: Vec<CoverRestriction>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoverAlgebra {
    pub on: Vec<usize>,
    pub dglie: DgLieBlock,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoverRestriction {
    pub from: Vec<usize>,
    pub to: Vec<usize>,
    pub matrix: Sparse,
}

fn invalid(s: impl Into<String>) -> CliError {
    CliError::Validation(s.into())
}

pub fn scalar(s: &str) -> Result<Scalar, CliError> {
    parse_scalar(s).map_err(|e| invalid(e.to_string()))
}

pub fn scalars(v: &[String]) -> Result<Vec<Scalar>, CliError> {
    v.iter().map(|s| scalar(s)).collect()
}

fn rows4(entries: &[(usize, usize, usize, String)]) -> Result<BTreeMap<(usize, usize), SparseRow>, CliError> {
    let mut out: BTreeMap<(usize, usize), SparseRow> = BTreeMap::new();
    for (i, j, k, c) in entries {
        out.entry((*i, *j)).or_default().push((*k, scalar(c)?));
    }
    Ok(out)
}

impl Sparse {
    pub fn to_matrix(&self) -> Result<SparseMatrix, CliError> {
        let trip = self
            .entries
            .iter()
            .map(|(i, j, c)| Ok((*i, *j, scalar(c)?)))
            .collect::<Result<Vec<_>, CliError>>()?;
        SparseMatrix::from_triplets(self.rows, self.cols, trip).map_err(|e| invalid(e.to_string()))
    }

    pub fn from_matrix(m: &SparseMatrix) -> Self {
        Sparse {
            rows: m.rows(),
            cols: m.cols(),
            entries: m.iter().map(|(i, j, x)| (i, j, format_scalar(x))).collect(),
        }
    }
}

fn square(n: usize, entries: &[(usize, usize, String)]) -> Result<SparseMatrix, CliError> {
    Sparse {
        rows: n,
        cols: n,
        entries: entries.to_vec(),
    }
    .to_matrix()
}

impl ComplexBlock {
    pub fn to_complex(&self) -> Result<FinComplex, CliError> {
        let diffs = self
            .d
            .iter()
            .map(|(n, m)| Ok((*n, m.to_matrix()?)))
            .collect::<Result<BTreeMap<_, _>, CliError>>()?;
        FinComplex::new(self.lo, self.dims.clone(), diffs).map_err(|e| invalid(e.to_string()))
    }

    pub fn from_complex(c: &FinComplex) -> Self {
        let Some((lo, hi)) = c.support() else {
            return ComplexBlock {
                lo: 0,
                dims: vec![],
                d: BTreeMap::new(),
            };
        };
        ComplexBlock {
            lo,
            dims: (lo..=hi).map(|n| c.dim(n)).collect(),
            d: (lo..hi)
                .map(|n| (n, Sparse::from_matrix(&c.d(n))))
                .filter(|(_, m)| !m.entries.is_empty())
                .collect(),
        }
    }
}

impl DgLieBlock {
    pub fn to_lie(&self) -> Result<DgLie, CliError> {
        let n = self.degrees.len();
        let d = square(n, &self.d)?;
        let bracket = rows4(&self.bracket)?;
        let overflow: BTreeSet<(usize, usize)> = self.overflow.iter().copied().collect();
        let g = if self.complete {
            DgLie::with_antisymmetric_completion(self.degrees.clone(), d, bracket, overflow)
        } else {
            DgLie::new(self.degrees.clone(), d, bracket, overflow)
        };
        g.map_err(|e| invalid(format!("dglie: {e}")))
    }

    pub fn from_lie(g: &DgLie) -> Self {
        let d = g
            .differential()
            .iter()
            .map(|(i, j, x)| (i, j, format_scalar(x)))
            .collect();
        let mut bracket = Vec::new();
        for ((i, j), row) in g.bracket_table() {
            for (k, x) in row {
                bracket.push((*i, *j, *k, format_scalar(x)));
            }
        }
        DgLieBlock {
            degrees: g.degrees().to_vec(),
            d,
            bracket,
            overflow: g.overflow_pairs().iter().copied().collect(),
            complete: false,
        }
    }
}

impl ArtinBlock {
    pub fn to_base(&self, name: &str) -> Result<ArtinBase, CliError> {
        let n = self.degrees.len();
        ArtinBase::new(name, self.degrees.clone(), rows4(&self.mult)?, square(n, &self.d)?, self.weights.clone())
            .map_err(|e| invalid(format!("artin base {name}: {e}")))
    }
}

impl AlgebraBlock {
    pub fn to_algebra(&self) -> Result<FinAssoc, CliError> {
        let (Some(dim), Some(products), Some(unit)) = (self.dim, &self.products, &self.unit) else {
            return FinAssoc::named(&self.name)
                .ok_or_else(|| invalid(format!("unknown built-in algebra {}", self.name)));
        };
        let mut table = vec![vec![zero_vec(dim); dim]; dim];
        for (i, j, k, c) in products {
            if *i >= dim || *j >= dim || *k >= dim {
                return Err(invalid(format!("algebra {}: product index out of range", self.name)));
            }
            table[*i][*j][*k] += scalar(c)?;
        }
        FinAssoc::new(&self.name, dim, &table, scalars(unit)?).map_err(|e| invalid(e.to_string()))
    }
}

impl GroupBlock {
    pub fn to_group(&self) -> Result<FinGroup, CliError> {
        match (self.cyclic, &self.elements, &self.table) {
            (Some(n), None, None) if n > 0 => Ok(FinGroup::cyclic(n)),
            (None, Some(e), Some(t)) => FinGroup::new(e.clone(), t.clone()).map_err(|e| invalid(e.to_string())),
            _ => Err(invalid("group: give either cyclic or elements and table")),
        }
    }
}

/// Resolved site with the name lookup used by other blocks.
pub struct SiteCtx {
    pub site: Arc<FinSite>,
}

impl SiteCtx {
    pub fn object(&self, name: &str) -> Result<usize, CliError> {
        self.site
            .index_of(name)
            .ok_or_else(|| invalid(format!("unknown object {name}")))
    }
}

impl SiteBlock {
    pub fn to_site(&self) -> Result<SiteCtx, CliError> {
        let mut b = SiteBuilder::new();
        let mut idx = BTreeMap::new();
        for o in &self.objects {
            if idx.insert(o.clone(), b.object(o)).is_some() {
                return Err(invalid(format!("duplicate object {o}")));
            }
        }
        let look = |n: &str| idx.get(n).copied().ok_or_else(|| invalid(format!("unknown object {n}")));
        for (s, g) in &self.leq {
            b.leq(look(s)?, look(g)?);
        }
        for c in &self.covers {
            let fam = c.family.iter().map(|n| look(n)).collect::<Result<Vec<_>, _>>()?;
            b.cover(look(&c.object)?, &fam);
        }
        for g in &self.global_covers {
            let fam = g.members.iter().map(|n| look(n)).collect::<Result<Vec<_>, _>>()?;
            b.global_cover(&g.name, &fam);
        }
        for (x, y, m) in &self.meets {
            let m = m.as_deref().map(look).transpose()?;
            b.meet(look(x)?, look(y)?, m);
        }
        Ok(SiteCtx {
            site: Arc::new(b.build()),
        })
    }

    pub fn from_site(s: &FinSite) -> Self {
        let n = s.len();
        let name = |u: usize| s.name(u).to_string();
        let mut leq = Vec::new();
        for a in 0..n {
            for b in 0..n {
                // generating relations only
                if a != b && s.leq(a, b) && !(0..n).any(|c| c != a && c != b && s.leq(a, c) && s.leq(c, b)) {
                    leq.push((name(a), name(b)));
                }
            }
        }
        let mut covers = Vec::new();
        for u in 0..n {
            for fam in s.covers(u) {
                if fam.len() == 1 && fam[0] == u {
                    continue;
                }
                covers.push(CoverFamily {
                    object: name(u),
                    family: fam.iter().map(|&v| name(v)).collect(),
                });
            }
        }
        SiteBlock {
            objects: s.names().to_vec(),
            leq,
            covers,
            global_covers: s
                .global_covers()
                .iter()
                .map(|g| GlobalCoverBlock {
                    name: g.name.clone(),
                    members: g.members.iter().map(|&v| name(v)).collect(),
                })
                .collect(),
            meets: vec![],
        }
    }
}

impl PresheafBlock {
    pub fn to_presheaf(&self, ctx: &SiteCtx) -> Result<PresheafC, CliError> {
        let site = &ctx.site;
        let mut values = Vec::with_capacity(site.len());
        for u in 0..site.len() {
            let c = self
                .values
                .get(site.name(u))
                .ok_or_else(|| invalid(format!("presheaf: no value on {}", site.name(u))))?;
            values.push(c.to_complex()?);
        }
        for k in self.values.keys() {
            ctx.object(k)?;
        }
        let mut restr = BTreeMap::new();
        for r in &self.restrictions {
            let (b, s) = (ctx.object(&r.from)?, ctx.object(&r.to)?);
            let maps = r
                .maps
                .iter()
                .map(|(n, m)| Ok((*n, m.to_matrix()?)))
                .collect::<Result<BTreeMap<_, _>, CliError>>()?;
            let f = ChainMap::new(values[b].clone(), values[s].clone(), maps)
                .map_err(|e| invalid(format!("restriction {} → {}: {e}", r.from, r.to)))?;
            restr.insert((b, s), f);
        }
        PresheafC::new(site.clone(), values, restr).map_err(|e| invalid(format!("presheaf: {e}")))
    }

    /// Records the generating restrictions only.
    pub fn from_presheaf(p: &PresheafC) -> Self {
        let s = p.site();
        let n = s.len();
        let mut restrictions = Vec::new();
        for b in 0..n {
            for a in 0..n {
                if a != b && s.leq(a, b) && !(0..n).any(|c| c != a && c != b && s.leq(a, c) && s.leq(c, b)) {
                    let f = p.restriction(b, a);
                    restrictions.push(RestrictionBlock {
                        from: s.name(b).to_string(),
                        to: s.name(a).to_string(),
                        maps: f.source().degrees().map(|d| (d, Sparse::from_matrix(&f.at(d)))).collect(),
                    });
                }
            }
        }
        PresheafBlock {
            values: (0..n)
                .map(|u| (s.name(u).to_string(), ComplexBlock::from_complex(p.value(u))))
                .collect(),
            restrictions,
        }
    }
}

impl HypercoverBlock {
    pub fn to_hypercover(&self, ctx: &SiteCtx) -> Result<Hypercover, CliError> {
        let base = if self.base == "final" {
            Base::Final
        } else {
            Base::Object(ctx.object(&self.base)?)
        };
        let err = |e: String| invalid(format!("hypercover {}: {e}", self.name));
        match (&self.family, &self.vertices, &self.edges, &self.degenerate) {
            (Some(fam), None, None, None) => {
                let fam = fam.iter().map(|n| ctx.object(n)).collect::<Result<Vec<_>, _>>()?;
                cech_nerve(&ctx.site, self.name.clone(), &fam, base, self.cap).map_err(|e| err(e.to_string()))
            }
            (None, Some(v), Some(e), Some(dg)) => {
                let v = v.iter().map(|n| ctx.object(n)).collect::<Result<Vec<_>, _>>()?;
                let edges = e
                    .iter()
                    .map(|x| {
                        Ok(Edge {
                            object: ctx.object(&x.object)?,
                            source: x.source,
                            target: x.target,
                        })
                    })
                    .collect::<Result<Vec<_>, CliError>>()?;
                Hypercover::from_one_skeleton(&ctx.site, self.name.clone(), base, &v, &edges, dg, self.cap)
                    .map_err(|e| err(e.to_string()))
            }
            _ => Err(err("give either family or vertices, edges and degenerate".into())),
        }
    }
}

impl CoverBlock {
    pub fn to_cover(&self) -> Result<LieCover, CliError> {
        let mut cover = LieCover {
            members: self.members,
            ..Default::default()
        };
        for a in &self.algebras {
            cover.algebras.insert(a.on.clone(), a.dglie.to_lie()?);
        }
        for r in &self.restrictions {
            let m = r.matrix.to_matrix()?;
            let (Some(src), Some(tgt)) = (cover.algebras.get(&r.from), cover.algebras.get(&r.to)) else {
                return Err(invalid(format!("restriction {:?} → {:?} names a missing algebra", r.from, r.to)));
            };
            if !src.is_morphism_to(&m, tgt) {
                return Err(invalid(format!("restriction {:?} → {:?} is not a dg Lie map", r.from, r.to)));
            }
            cover.restrictions.insert((r.from.clone(), r.to.clone()), m);
        }
        Ok(cover)
    }

    pub fn from_cover(c: &LieCover) -> Self {
        CoverBlock {
            members: c.members,
            algebras: c
                .algebras
                .iter()
                .map(|(on, g)| CoverAlgebra {
                    on: on.clone(),
                    dglie: DgLieBlock::from_lie(g),
                })
                .collect(),
            restrictions: c
                .restrictions
                .iter()
                .map(|((f, t), m)| CoverRestriction {
                    from: f.clone(),
                    to: t.clone(),
                    matrix: Sparse::from_matrix(m),
                })
                .collect(),
        }
    }
}

pub enum ResolvedAction {
    Algebra(AlgebraAction),
    DgLie(DgLieAction),
    Site(SiteAction),
}

impl ActionBlock {
    pub fn resolve(
        &self,
        group: FinGroup,
        algebra: Option<&FinAssoc>,
        lie: Option<&DgLie>,
        site: Option<&SiteCtx>,
    ) -> Result<ResolvedAction, CliError> {
        let mats = || -> Result<Vec<SparseMatrix>, CliError> {
            self.matrices
                .as_ref()
                .ok_or_else(|| invalid("action: matrices missing"))?
                .iter()
                .map(Sparse::to_matrix)
                .collect()
        };
        let wrap = |e: defwb_core::equivariant::EquivariantError| invalid(format!("action: {e}"));
        match self.kind.as_str() {
            "algebra" => {
                let a = algebra.ok_or_else(|| invalid("action on an algebra needs an algebra block"))?;
                Ok(ResolvedAction::Algebra(AlgebraAction::new(a, group, mats()?).map_err(wrap)?))
            }
            "dglie" => {
                let g = lie.ok_or_else(|| invalid("action on a dg Lie algebra needs a dglie block"))?;
                Ok(ResolvedAction::DgLie(DgLieAction::new(g, group, mats()?).map_err(wrap)?))
            }
            "site" => {
                let ctx = site.ok_or_else(|| invalid("action on a site needs a site block"))?;
                let perms = self
                    .perms
                    .as_ref()
                    .ok_or_else(|| invalid("action: perms missing"))?
                    .iter()
                    .map(|p| p.iter().map(|n| ctx.object(n)).collect::<Result<Vec<_>, _>>())
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(ResolvedAction::Site(SiteAction::new(&ctx.site, group, perms).map_err(wrap)?))
            }
            k => Err(invalid(format!("action: unknown kind {k}"))),
        }
    }
}
