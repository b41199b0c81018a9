#![allow(clippy::needless_range_loop)]

pub mod exactla;
pub mod complexes;
pub mod hypercover;
pub mod site;
pub mod poly;
pub mod dglie;
pub mod sullivan;
pub mod hochschild;
pub mod models;
pub mod equivariant;
