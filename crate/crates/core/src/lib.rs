pub mod anisotropy;
pub mod cli;
pub mod elastic;
pub mod evolution;
pub mod expr;
pub mod geometry;
pub mod report;
pub mod scenario;
pub mod svg;
pub mod union_find;
