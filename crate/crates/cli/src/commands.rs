//! One function per command; each resolves the blocks it needs and fills a
//! report.

use serde_json::{json, Value};

use defwb_core::complexes::{cohomology, Cohomology};
use defwb_core::dglie::{is_mc, kuranishi, mc_residual, tensor_nilpotent, validate_dglie, ArtinBase, KuranishiData};
use defwb_core::equivariant::{averaging_comparison, equivariant_kuranishi, quotient_site, EquivariantKuranishi};
use defwb_core::exactla::format_scalar;
use defwb_core::hochschild::{brute_first_order, deformation_dglie, hochschild_complex, FinAssoc, ORACLE_BOUND};
use defwb_core::hypercover::{augmentation_is_weak_equivalence, validate_hypercover, Base, ChainMode, Hypercover};
use defwb_core::models::P1Model;
use defwb_core::site::{
    cech_complex, default_registry, generating_acyclic_cofibration, is_fibrant, rgamma, validate_site, PresheafC,
    REGISTRY_LIMITATION,
};
use defwb_core::sullivan::{choose_truncation, descent_compare, tw_tot, CosimplicialDgLie};

use crate::doc::{scalars, ResolvedAction, SiteCtx, WorkbenchDoc};
use crate::report::Report;
use crate::{CliError, Options};

/// Number of Hochschild arities kept in deformation pipelines.
const HOCHSCHILD_ARITY: usize = 3;

fn dims(h: &Cohomology) -> Value {
    let m: serde_json::Map<String, Value> = h.dims().into_iter().map(|(n, d)| (n.to_string(), d.into())).collect();
    Value::Object(m)
}

fn missing(block: &str) -> CliError {
    CliError::Validation(format!("document has no {block} block"))
}

pub struct Ctx<'a> {
    pub doc: &'a WorkbenchDoc,
    pub opts: &'a Options,
}

impl Ctx<'_> {
    fn site(&self) -> Result<SiteCtx, CliError> {
        let s = self.doc.site.as_ref().ok_or_else(|| missing("site"))?.to_site()?;
        let rep = validate_site(&s.site);
        if !rep.is_valid() {
            return Err(CliError::Validation(format!("site: {}", rep.violations.join("; "))));
        }
        Ok(s)
    }

    fn presheaf(&self, s: &SiteCtx) -> Result<PresheafC, CliError> {
        self.doc.presheaf.as_ref().ok_or_else(|| missing("presheaf"))?.to_presheaf(s)
    }

    /// Default registry plus the document's hypercovers, filtered by
    /// `--registry` when given.
    fn registry(&self, s: &SiteCtx) -> Result<Vec<Hypercover>, CliError> {
        let mut reg = default_registry(&s.site).map_err(CliError::from_display)?;
        for h in &self.doc.hypercovers {
            let v = h.to_hypercover(s)?;
            reg.retain(|r| r.name() != v.name());
            reg.push(v);
        }
        let names = self
            .opts
            .registry
            .clone()
            .or_else(|| self.doc.pipeline.as_ref().and_then(|p| p.registry.clone()));
        if let Some(names) = names {
            for n in &names {
                if !reg.iter().any(|r| r.name() == n) {
                    return Err(CliError::Validation(format!("no hypercover named {n}")));
                }
            }
            reg.retain(|r| names.iter().any(|n| n == r.name()));
        }
        Ok(reg)
    }

    fn base(&self, default: &str) -> Result<ArtinBase, CliError> {
        let expr = self
            .opts
            .base
            .clone()
            .or_else(|| self.doc.pipeline.as_ref().and_then(|p| p.base.clone()))
            .unwrap_or_else(|| default.to_string());
        if let Some(b) = self.doc.artin_bases.get(&expr) {
            return b.to_base(&expr);
        }
        ArtinBase::parse(&expr).map_err(|e| CliError::Validation(format!("base '{expr}': {e}")))
    }

    fn cap(&self, default: usize) -> usize {
        self.opts
            .cap
            .or_else(|| self.doc.pipeline.as_ref().and_then(|p| p.cap))
            .unwrap_or(default)
    }

    fn algebras(&self) -> Result<Vec<FinAssoc>, CliError> {
        if let Some(name) = &self.opts.algebra {
            return FinAssoc::named(name)
                .map(|a| vec![a])
                .ok_or_else(|| CliError::Validation(format!("unknown built-in algebra {name}")));
        }
        self.doc.algebras.iter().map(|b| b.to_algebra()).collect()
    }

    fn lie(&self) -> Result<defwb_core::dglie::DgLie, CliError> {
        self.doc.dglie.as_ref().ok_or_else(|| missing("dglie"))?.to_lie()
    }

    fn cosimplicial(&self) -> Result<CosimplicialDgLie, CliError> {
        let c = self.doc.cosimplicial.as_ref().ok_or_else(|| missing("cosimplicial"))?.to_cover()?;
        CosimplicialDgLie::from_cover(&c).map_err(CliError::from_sullivan)
    }

    /// The P¹ model a generated document came from.
    fn model(&self) -> Option<(P1Model, usize)> {
        let m = self.doc.meta.as_ref()?;
        Some((P1Model::parse(&m.generator)?, m.window?))
    }

    fn echo_meta(&self, r: &mut Report) {
        if let Some(m) = &self.doc.meta {
            r.certificate("generator", m.generator.clone());
            if let Some(w) = m.window {
                r.certificate("window", w);
            }
        }
    }
}

fn registry_names(reg: &[Hypercover]) -> Value {
    reg.iter().map(|h| h.name().to_string()).collect::<Vec<_>>().into()
}

fn kuranishi_json(k: &KuranishiData) -> Value {
    let names = k.variable_names();
    json!({
        "base": k.base,
        "h0": k.h0,
        "h1": k.h1,
        "h2": k.h2,
        "coordinates": names.clone(),
        "obstruction_components": k.obstruction.len(),
        "obstruction": k.obstruction.iter().filter(|o| !o.poly.is_zero()).map(|o| json!({
            "class": o.class,
            "base_index": o.base_index,
            "equation": o.poly.render(&names),
        })).collect::<Vec<_>>(),
        "unobstructed": k.is_unobstructed(),
        "domain_is_point": k.domain_is_point(),
    })
}

pub fn validate(c: &Ctx, r: &mut Report) -> Result<bool, CliError> {
    let mut ok = true;
    let mut note = |r: &mut Report, key: &str, res: Result<Vec<String>, CliError>| {
        let v = match res {
            Ok(viol) if viol.is_empty() => json!("ok"),
            Ok(viol) => {
                ok = false;
                json!(viol)
            }
            Err(e) => {
                ok = false;
                json!([e.to_string()])
            }
        };
        r.set(key, v);
    };
    let d = c.doc;
    let site = d.site.as_ref().map(|s| s.to_site());
    if let Some(s) = &site {
        note(r, "site", s.as_ref().map(|s| validate_site(&s.site).violations).map_err(Clone::clone));
    }
    let sctx = site.and_then(Result::ok);
    if d.presheaf.is_some() {
        let res = match &sctx {
            Some(s) => c.presheaf(s).map(|_| vec![]),
            None => Err(missing("valid site")),
        };
        note(r, "presheaf", res);
    }
    for h in &d.hypercovers {
        let res = match &sctx {
            Some(s) => h.to_hypercover(s).map(|v| {
                let rep = validate_hypercover(&s.site, &v);
                let mut out = rep.structural.clone();
                out.extend(rep.hc1.iter().map(|f| format!("HC1 fails at level {} over {}", f.level, s.site.name(f.over))));
                out.extend(rep.hc2.iter().map(|(o, u)| format!("HC2 fails over {} at {}", s.site.name(*o), s.site.name(*u))));
                out
            }),
            None => Err(missing("valid site")),
        };
        note(r, &format!("hypercover.{}", h.name), res);
    }
    if d.dglie.is_some() {
        note(
            r,
            "dglie",
            c.lie().map(|g| {
                validate_dglie(&g)
                    .violations
                    .iter()
                    .map(|v| format!("{:?} at {:?}", v.law, v.witness))
                    .collect()
            }),
        );
    }
    for (name, b) in &d.artin_bases {
        note(r, &format!("artin_base.{name}"), b.to_base(name).map(|_| vec![]));
    }
    for a in &d.algebras {
        note(r, &format!("algebra.{}", a.name), a.to_algebra().map(|_| vec![]));
    }
    if let Some(g) = &d.group {
        note(r, "group", g.to_group().map(|_| vec![]));
    }
    if let (Some(a), Some(g)) = (&d.action, &d.group) {
        let res = g.to_group().and_then(|grp| {
            let alg = d.algebras.first().map(|b| b.to_algebra()).transpose()?;
            let lie = d.dglie.as_ref().map(|b| b.to_lie()).transpose()?;
            a.resolve(grp, alg.as_ref(), lie.as_ref(), sctx.as_ref()).map(|_| vec![])
        });
        note(r, "action", res);
    }
    if d.cosimplicial.is_some() {
        note(r, "cosimplicial", c.cosimplicial().map(|_| vec![]));
    }
    if let Some(e) = &d.element {
        note(r, "element", scalars(e).map(|_| vec![]));
    }
    r.set("valid", ok);
    Ok(ok)
}

pub fn cohomology_cmd(c: &Ctx, r: &mut Report) -> Result<(), CliError> {
    if c.doc.dglie.is_some() {
        let g = c.lie()?;
        let h = cohomology(&g.complex().map_err(CliError::from_display)?);
        r.set("dglie", json!({ "dims": dims(&h), "euler_characteristic": h.euler_characteristic() }));
    }
    if c.doc.presheaf.is_some() {
        let s = c.site()?;
        let f = c.presheaf(&s)?;
        let per: serde_json::Map<String, Value> = (0..s.site.len())
            .map(|u| (s.site.name(u).to_string(), dims(&cohomology(f.value(u)))))
            .collect();
        r.set("presheaf_values", Value::Object(per));
    }
    if c.doc.dglie.is_none() && c.doc.presheaf.is_none() {
        return Err(missing("dglie or presheaf"));
    }
    Ok(())
}

/// Recomputes a generated P¹ model at window `D + 2`.
fn window_check(c: &Ctx, r: &mut Report, reg_name: &str, got: &Cohomology, final_only: bool) -> Result<(), CliError> {
    let Some((m, w)) = c.model() else {
        return Ok(());
    };
    let f = m.presheaf(w + 2);
    let reg = default_registry(f.site()).map_err(CliError::from_display)?;
    let Some(v) = reg.iter().find(|h| h.name() == reg_name) else {
        return Ok(());
    };
    let cx = if final_only {
        rgamma(&f, v).map_err(CliError::from_display)?
    } else {
        cech_complex(v, &f, mode_of(v), None).map_err(CliError::from_display)?.complex
    };
    let h = cohomology(&cx);
    let stable = h.dims().into_iter().filter(|(_, d)| *d > 0).collect::<Vec<_>>()
        == got.dims().into_iter().filter(|(_, d)| *d > 0).collect::<Vec<_>>();
    r.certificate("window_recheck", w + 2);
    r.set(&format!("window_stable.{reg_name}"), stable);
    Ok(())
}

fn mode_of(v: &Hypercover) -> ChainMode {
    if v.is_nerve() {
        ChainMode::Alternating
    } else {
        ChainMode::Normalized
    }
}

pub fn cech(c: &Ctx, r: &mut Report) -> Result<(), CliError> {
    let s = c.site()?;
    let f = c.presheaf(&s)?;
    let reg = c.registry(&s)?;
    c.echo_meta(r);
    r.certificate("registry", registry_names(&reg));
    for v in &reg {
        let cap = (mode_of(v) == ChainMode::Normalized).then_some(v.simp().top());
        let cx = cech_complex(v, &f, mode_of(v), cap).map_err(CliError::from_display)?;
        let h = cohomology(&cx.complex);
        r.set(
            &format!("cech.{}", v.name()),
            json!({ "mode": format!("{:?}", mode_of(v)).to_lowercase(), "dims": dims(&h), "truncated": cx.cells.truncated }),
        );
        window_check(c, r, v.name(), &h, false)?;
    }
    Ok(())
}

pub fn rgamma_cmd(c: &Ctx, r: &mut Report) -> Result<(), CliError> {
    let s = c.site()?;
    let f = c.presheaf(&s)?;
    let reg: Vec<Hypercover> = c.registry(&s)?.into_iter().filter(|v| v.base() == Base::Final).collect();
    if reg.is_empty() {
        return Err(CliError::Validation("no hypercover of the final presheaf is registered".into()));
    }
    c.echo_meta(r);
    r.certificate("registry", registry_names(&reg));
    for v in &reg {
        let h = cohomology(&rgamma(&f, v).map_err(CliError::from_display)?);
        r.set(&format!("rgamma.{}", v.name()), dims(&h));
        window_check(c, r, v.name(), &h, true)?;
    }
    Ok(())
}

pub fn fibrancy(c: &Ctx, r: &mut Report) -> Result<(), CliError> {
    let s = c.site()?;
    let f = c.presheaf(&s)?;
    let reg = c.registry(&s)?;
    let rep = is_fibrant(&f, &reg).map_err(CliError::from_display)?;
    c.echo_meta(r);
    r.certificate("registry", registry_names(&reg));
    r.certificate("limitation", rep.limitation.clone());
    r.set("fibrant", rep.is_fibration());
    r.set("failing_objects", rep.failing_objects());
    r.set("non_surjective", rep.non_surjective.clone());
    r.set(
        "squares",
        rep.squares
            .iter()
            .map(|q| json!({"hypercover": q.hypercover, "object": q.object, "homotopy_cartesian": q.homotopy_cartesian}))
            .collect::<Vec<_>>(),
    );
    r.set("skipped", rep.skipped.clone());
    r.set("invalid", rep.invalid.clone());
    Ok(())
}

pub fn hypercheck(c: &Ctx, r: &mut Report) -> Result<bool, CliError> {
    let s = c.site()?;
    let reg = c.registry(&s)?;
    r.certificate("registry", registry_names(&reg));
    r.certificate("limitation", REGISTRY_LIMITATION);
    let mut all = true;
    for v in &reg {
        let rep = validate_hypercover(&s.site, v);
        let cap = v.simp().top();
        let lemma = augmentation_is_weak_equivalence(&s.site, v, cap).map_err(CliError::from_display)?;
        all &= rep.is_valid() && lemma;
        r.set(
            &format!("hypercover.{}", v.name()),
            json!({
                "valid": rep.is_valid(),
                "structural": rep.structural,
                "hc1_failures": rep.hc1.len(),
                "hc2_failures": rep.hc2.len(),
                "checked_up_to": rep.checked_up_to,
                "nerve": v.is_nerve(),
                "augmentation_weak_equivalence": lemma,
            }),
        );
    }
    r.set("all_hold", all);
    Ok(all)
}

pub fn gac(c: &Ctx, r: &mut Report) -> Result<(), CliError> {
    let s = c.site()?;
    let reg = c.registry(&s)?;
    let pipe = c.doc.pipeline.as_ref();
    let obj = c
        .opts
        .object
        .clone()
        .or_else(|| pipe.and_then(|p| p.object.clone()))
        .ok_or_else(|| CliError::Validation("gac needs --object".into()))?;
    let u = s.object(&obj)?;
    let n = c.opts.degree.or_else(|| pipe.and_then(|p| p.degree)).unwrap_or(0);
    let v = reg
        .iter()
        .find(|h| h.base() == Base::Object(u))
        .ok_or_else(|| CliError::Validation(format!("no registered hypercover of {obj}")))?;
    let mode = mode_of(v);
    let cap = (mode == ChainMode::Normalized).then(|| c.cap(v.simp().top()));
    let a = generating_acyclic_cofibration(v, n, mode, cap, &s.site).map_err(CliError::from_display)?;
    r.certificate("hypercover", v.name().to_string());
    r.certificate("mode", format!("{mode:?}").to_lowercase());
    r.set("object", obj);
    r.set("degree", n);
    r.set(
        "summands",
        Value::Object(a.summands.iter().map(|(d, k)| (d.to_string(), (*k).into())).collect()),
    );
    r.set("injective", a.j.is_pointwise_injective());
    r.set(
        "target_pointwise_acyclic",
        (0..s.site.len()).all(|w| a.l.value(w).is_acyclic()),
    );
    Ok(())
}

pub fn mc(c: &Ctx, r: &mut Report) -> Result<bool, CliError> {
    let g = c.lie()?;
    let base = c.base("k[t]/(t^2)")?;
    let l = tensor_nilpotent(&base, &g).map_err(CliError::from_display)?;
    let z = scalars(c.doc.element.as_ref().ok_or_else(|| missing("element"))?)?;
    let res = mc_residual(l.lie(), &z).map_err(CliError::from_display)?;
    let ok = is_mc(l.lie(), &z).map_err(CliError::from_display)?;
    r.certificate("base", base.name().to_string());
    r.set("residual", res.iter().map(format_scalar).collect::<Vec<_>>());
    r.set("is_mc", ok);
    Ok(ok)
}

pub fn kuranishi_cmd(c: &Ctx, r: &mut Report) -> Result<(), CliError> {
    let g = c.lie()?;
    let base = c.base("k[t]/(t^2)")?;
    let k = kuranishi(&g, &base, None).map_err(CliError::from_dglie)?;
    r.set("kuranishi", kuranishi_json(&k));
    Ok(())
}

fn hh_dims(a: &FinAssoc) -> Value {
    let h = cohomology(&hochschild_complex(a, HOCHSCHILD_ARITY));
    let m: serde_json::Map<String, Value> =
        (0..HOCHSCHILD_ARITY as i32).map(|i| (i.to_string(), h.dim(i).into())).collect();
    Value::Object(m)
}

pub fn deform_algebra(c: &Ctx, r: &mut Report) -> Result<(), CliError> {
    let algs = c.algebras()?;
    let a = algs.first().ok_or_else(|| missing("algebra"))?;
    let base = c.base("k[t]/(t^2)")?;
    let h = deformation_dglie(a, HOCHSCHILD_ARITY).map_err(CliError::from_display)?;
    let k = kuranishi(h.lie(), &base, None).map_err(CliError::from_dglie)?;
    r.certificate("hochschild_arity", HOCHSCHILD_ARITY);
    r.certificate("normalized_cochains", true);
    r.set("algebra", a.name().to_string());
    r.set("hochschild_dims", hh_dims(a));
    r.set("kuranishi", kuranishi_json(&k));
    r.set("rigid", k.domain_is_point());
    Ok(())
}

pub fn deform_sheaf(c: &Ctx, r: &mut Report) -> Result<(), CliError> {
    let g = c.cosimplicial()?;
    let base = c.base("k[t]/(t^2)")?;
    let bound = c.cap(4);
    let cech = g.cech_total().map_err(CliError::from_sullivan)?;
    let hc = cohomology(&cech.complex);
    let tr = choose_truncation(&g, bound).map_err(CliError::from_sullivan)?;
    let tw = tw_tot(&g, tr.cap).map_err(CliError::from_sullivan)?;
    let k = kuranishi(tw.lie(), &base, None).map_err(CliError::from_dglie)?;
    c.echo_meta(r);
    r.certificate("truncation_cap", tr.cap);
    r.certificate("truncation_tried", tr.tried.clone());
    r.certificate("integration_quasi_iso", tr.quasi_iso);
    r.set("cech_dims", dims(&hc));
    r.set("kuranishi", kuranishi_json(&k));
    Ok(())
}

pub fn descent(c: &Ctx, r: &mut Report) -> Result<bool, CliError> {
    let g = c.cosimplicial()?;
    let base = c.base("k[t]/(t^2)")?;
    let rep = descent_compare(&g, &base, c.cap(4)).map_err(CliError::from_sullivan)?;
    c.echo_meta(r);
    r.certificate("truncation_cap", rep.cap);
    r.set("abelian", rep.abelian);
    r.set("tot_coordinates", rep.tot_coordinates);
    r.set("tot_unobstructed", rep.tot_unobstructed);
    r.set("cech_count", rep.cech_count);
    r.set("witnesses_checked", rep.witnesses_checked);
    r.set("witnesses_failed", rep.witnesses_failed);
    r.set("agrees", rep.agrees());
    Ok(rep.agrees())
}

fn ek_json(e: &EquivariantKuranishi) -> Value {
    json!({
        "invariant_dim": e.invariants.lie.dim(),
        "equivariant": kuranishi_json(&e.data),
        "plain": kuranishi_json(&e.plain),
        "forgetful_rank_h1": e.forgetful_rank,
        "witnesses_checked": e.witnesses_checked,
        "witnesses_invariant": e.witnesses_invariant,
    })
}

pub fn equivariant(c: &Ctx, r: &mut Report) -> Result<(), CliError> {
    let d = c.doc;
    let group = d.group.as_ref().ok_or_else(|| missing("group"))?.to_group()?;
    let act = d.action.as_ref().ok_or_else(|| missing("action"))?;
    let alg = c.algebras()?.into_iter().next();
    let lie = d.dglie.as_ref().map(|b| b.to_lie()).transpose()?;
    let site = d.site.as_ref().map(|_| c.site()).transpose()?;
    r.set("group_order", group.order());
    r.certificate("invariants", "averaging over a finite group in characteristic 0");
    match act.resolve(group, alg.as_ref(), lie.as_ref(), site.as_ref())? {
        ResolvedAction::Algebra(aa) => {
            let a = alg.expect("resolved");
            let base = c.base("k[t]/(t^2)")?;
            let h = deformation_dglie(&a, HOCHSCHILD_ARITY).map_err(CliError::from_display)?;
            let la = aa.on_cochains(&h).map_err(CliError::from_display)?;
            let avg = averaging_comparison(h.lie(), &la).map_err(CliError::from_display)?;
            let ek = equivariant_kuranishi(h.lie(), &la, &base).map_err(CliError::from_display)?;
            r.certificate("hochschild_arity", HOCHSCHILD_ARITY);
            r.set("algebra", a.name().to_string());
            r.set("averaging", averaging_json(&avg));
            r.set("kuranishi", ek_json(&ek));
        }
        ResolvedAction::DgLie(la) => {
            let g = lie.expect("resolved");
            let base = c.base("k[t]/(t^2)")?;
            let avg = averaging_comparison(&g, &la).map_err(CliError::from_display)?;
            let ek = equivariant_kuranishi(&g, &la, &base).map_err(CliError::from_display)?;
            r.set("averaging", averaging_json(&avg));
            r.set("kuranishi", ek_json(&ek));
        }
        ResolvedAction::Site(sa) => {
            let s = site.expect("resolved");
            let q = quotient_site(&s.site, &sa);
            let homs: serde_json::Map<String, Value> = q
                .homs
                .iter()
                .map(|((u, v), hs)| {
                    (
                        format!("{}->{}", q.names[*u], q.names[*v]),
                        hs.iter().map(|&g| sa.group.name(g).to_string()).collect::<Vec<_>>().into(),
                    )
                })
                .collect();
            r.set("quotient_homs", Value::Object(homs));
            r.set("composable_triples", q.composable_triples);
            r.set("laws_hold", q.laws_hold());
            r.set("law_failures", q.law_failures.clone());
        }
    }
    Ok(())
}

fn averaging_json(a: &defwb_core::equivariant::AveragingReport) -> Value {
    json!({
        "agrees": a.agrees(),
        "degrees": a.degrees.iter().map(|(n, before, after)| json!({
            "degree": n, "averaged_then_cohomology": before, "cohomology_then_averaged": after
        })).collect::<Vec<_>>(),
    })
}

pub fn oracle(c: &Ctx, r: &mut Report) -> Result<bool, CliError> {
    let mut algs = c.algebras()?;
    if algs.is_empty() {
        algs = FinAssoc::small_algebras();
    }
    r.certificate("oracle_bound", ORACLE_BOUND);
    let mut all = true;
    for a in &algs {
        let hh2 = cohomology(&hochschild_complex(a, HOCHSCHILD_ARITY)).dim(2);
        let v = match brute_first_order(a) {
            Ok(b) => {
                all &= b.dim == hh2;
                json!({"hh2": hh2, "brute_first_order": b.dim, "agrees": b.dim == hh2})
            }
            Err(e) => json!({"hh2": hh2, "brute_first_order": e.to_string()}),
        };
        r.set(&format!("algebra.{}", a.name()), v);
    }
    r.set("all_agree", all);
    Ok(all)
}

