//! Simulation of subcritical rank-1 inhomogeneous random graphs
//! (Norros-Reittu and its erased / Chung-Lu / generalised variants),
//! the per-component counting statistics of their large components,
//! and the machinery to compare those statistics against their
//! Poisson-process and Fréchet limit laws by Monte Carlo.
//!
//! The modules follow the processing pipeline:
//!
//! * [`weights`] — heavy-tailed vertex weights, quantiles, moments;
//! * [`graphgen`] — sub-quadratic graph generation for all model variants;
//! * [`components`] — connected components and BFS layers;
//! * [`statistics`] — per-component vertex-class counts, rooted-tree
//!   canonicalization and automorphism counting;
//! * [`limits`] — the limiting constants, intensity measure, Fréchet law,
//!   and empirical point processes;
//! * [`inference`] — the replication harness and goodness-of-fit tests;
//! * [`oracle`] — brute-force reference implementations for the test suites.

pub mod components;
pub mod graphgen;
pub mod inference;
pub mod limits;
pub mod oracle;
pub mod statistics;
pub mod weights;
