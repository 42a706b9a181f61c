//! Multi-objective reinforcement learning engine for covalent inhibitor
//! generation.

pub mod chem;
pub mod cli;
pub mod descriptors;
pub mod evalkit;
pub mod io;
pub mod moo;
pub mod neural;
pub mod scorers;
pub mod synthetic;
