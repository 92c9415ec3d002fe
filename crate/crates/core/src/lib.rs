pub mod field;
pub mod fp;
pub mod numberfield;
pub mod par;
pub mod poly;
pub mod finitegeom;
pub mod lattice;
pub mod localfield;
pub mod mumford;
pub mod coleman;
pub mod chabauty;
pub mod mwsieve;
