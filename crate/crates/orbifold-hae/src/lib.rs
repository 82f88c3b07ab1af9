pub mod cyclo;
pub mod field;
pub mod mirror;
pub mod report;
pub mod series;
pub mod freering;
pub mod intnum;
pub mod graphs;
pub mod rmatrix;
pub mod cohft;
pub mod cache;
pub mod cli;
