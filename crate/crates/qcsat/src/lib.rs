//! Finds classical input assignments that maximize the acceptance probability
//! of small-treewidth quantum circuits.
//!
//! The pipeline works on *abstract networks* (lists of index sets in which
//! every index occurs exactly twice). A circuit is mapped to such a network,
//! a contraction tree of small rank and height is built from a carving
//! decomposition of the network graph, and the maximization itself runs as a
//! set-valued dynamic program over the tree: every node carries the set of
//! all grid-truncated tensors reachable by some choice of inputs, and the
//! best root scalar is traced back to a concrete assignment.
//!
//! Module map:
//!
//! * [`graphs`] — multigraphs, tree decompositions, carving decompositions
//!   and the machinery that turns one into a *contractive* one.
//! * [`network`] — abstract networks and contraction trees.
//! * [`tensor`] — dense complex tensors, contraction, grid truncation and
//!   set contraction.
//! * [`circuit`] — the mixed-state circuit model, its text format,
//!   tensorization and benchmark generators.
//! * [`exactsim`] — exact simulation over a contraction tree.
//! * [`satsolve`] — the feasibility DP, assignment extraction and the
//!   end-to-end driver.
//! * [`oracle`] — brute-force density-matrix reference simulator.
//!
//! With the default `parallel` feature the data-parallel inner loops run on
//! rayon; without it everything runs sequentially. Outputs are identical
//! either way: reductions are canonicalized so results do not depend on the
//! schedule.

pub mod circuit;
pub mod cmatrix;
pub mod error;
pub mod exactsim;
pub mod graphs;
pub mod network;
pub mod oracle;
pub mod par;
pub mod satsolve;
pub mod tensor;
#[doc(hidden)]
pub mod testutil;

pub use error::{Error, ErrorKind, Result};
