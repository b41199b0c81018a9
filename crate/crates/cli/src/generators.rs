//! Built-in documents printed by `examples`.

use defwb_core::exactla::{format_scalar, int, SparseMatrix};
use defwb_core::hochschild::FinAssoc;
use defwb_core::models::{p1_site, wuvp_presheaf, wuvp_site, P1Model};

use crate::doc::{
    ActionBlock, AlgebraBlock, CoverBlock, GroupBlock, HypercoverBlock, Meta, PresheafBlock, SiteBlock, Sparse,
    WorkbenchDoc,
};
use crate::CliError;

pub const NAMES: &[&str] = &[
    "p1-structure",
    "p1-twist N",
    "p1-tangent",
    "small-algebras",
    "wuvp",
    "c2-sign-flip",
    "p1-swap",
];

pub fn algebra_block(a: &FinAssoc) -> AlgebraBlock {
    let d = a.dim();
    let mut products = Vec::new();
    for i in 0..d {
        for j in 0..d {
            for (k, c) in a.basis_product(i, j).iter().enumerate() {
                if *c != int(0) {
                    products.push((i, j, k, format_scalar(c)));
                }
            }
        }
    }
    AlgebraBlock {
        name: a.name().to_string(),
        dim: Some(d),
        products: Some(products),
        unit: Some(a.unit().iter().map(format_scalar).collect()),
    }
}

fn p1_doc(m: P1Model, window: usize) -> WorkbenchDoc {
    let f = m.presheaf(window);
    WorkbenchDoc {
        meta: Some(Meta {
            generator: m.name(),
            window: Some(window),
        }),
        site: Some(SiteBlock::from_site(f.site())),
        presheaf: Some(PresheafBlock::from_presheaf(&f)),
        cosimplicial: Some(CoverBlock::from_cover(&m.lie_cover(window))),
        ..Default::default()
    }
}

pub fn generate(args: &[String], window: usize) -> Result<WorkbenchDoc, CliError> {
    let name = args.first().map(String::as_str).unwrap_or("");
    let usage = || CliError::Validation(format!("unknown example '{}'; available: {}", args.join(" "), NAMES.join(", ")));
    match name {
        "p1-structure" => Ok(p1_doc(P1Model::structure(), window)),
        "p1-tangent" => Ok(p1_doc(P1Model::Tangent, window)),
        "p1-twist" => {
            let n: i64 = args.get(1).and_then(|s| s.parse().ok()).ok_or_else(usage)?;
            Ok(p1_doc(P1Model::Twist(n), window))
        }
        "small-algebras" => Ok(WorkbenchDoc {
            meta: Some(Meta {
                generator: "small-algebras".into(),
                window: None,
            }),
            algebras: FinAssoc::small_algebras().iter().map(algebra_block).collect(),
            ..Default::default()
        }),
        "wuvp" => {
            let s = wuvp_site();
            let f = wuvp_presheaf(&s);
            Ok(WorkbenchDoc {
                meta: Some(Meta {
                    generator: "wuvp".into(),
                    window: None,
                }),
                site: Some(SiteBlock::from_site(&s)),
                presheaf: Some(PresheafBlock::from_presheaf(&f)),
                hypercovers: vec![HypercoverBlock {
                    name: "nerve{U,V}".into(),
                    base: "W".into(),
                    cap: 2,
                    family: Some(vec!["U".into(), "V".into()]),
                    vertices: None,
                    edges: None,
                    degenerate: None,
                }],
                ..Default::default()
            })
        }
        "c2-sign-flip" => {
            let a = FinAssoc::truncated_poly(3);
            let flip = SparseMatrix::from_triplets(
                3,
                3,
                [(0, 0, int(1)), (1, 1, int(-1)), (2, 2, int(1))],
            )
            .expect("diagonal");
            Ok(WorkbenchDoc {
                meta: Some(Meta {
                    generator: "c2-sign-flip".into(),
                    window: None,
                }),
                algebras: vec![algebra_block(&a)],
                group: Some(GroupBlock {
                    cyclic: Some(2),
                    elements: None,
                    table: None,
                }),
                action: Some(ActionBlock {
                    kind: "algebra".into(),
                    matrices: Some(vec![
                        Sparse::from_matrix(&SparseMatrix::identity(3)),
                        Sparse::from_matrix(&flip),
                    ]),
                    perms: None,
                }),
                ..Default::default()
            })
        }
        "p1-swap" => {
            let s = p1_site();
            Ok(WorkbenchDoc {
                meta: Some(Meta {
                    generator: "p1-swap".into(),
                    window: None,
                }),
                site: Some(SiteBlock::from_site(&s)),
                group: Some(GroupBlock {
                    cyclic: Some(2),
                    elements: None,
                    table: None,
                }),
                action: Some(ActionBlock {
                    kind: "site".into(),
                    matrices: None,
                    perms: Some(vec![
                        vec!["U0".into(), "U1".into(), "U01".into()],
                        vec!["U1".into(), "U0".into(), "U01".into()],
                    ]),
                }),
                ..Default::default()
            })
        }
        _ => Err(usage()),
    }
}
