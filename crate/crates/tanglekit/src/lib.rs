//! Finite-truncation analysis of finitely presented infinite graphs.
//!
//! A presented graph is a monotone sequence of finite level graphs with
//! frontier marks. Every answer is computed on a finite level and is either
//! backed by a certificate, witnessed at that level, or reported as unknown.

pub mod multigraph;
pub mod presentation;
pub mod structure;
pub mod invsys;
pub mod tangles;
pub mod packing;
