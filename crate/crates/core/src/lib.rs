//! Thomas-Fermi ground states, phase diagram and interface energies of spin-1
//! condensates, with grid relaxation of the diffuse-interface functional.
// `!(x > 0.0)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod model;
pub mod potential;
pub mod tf_solver;

pub use error::{Error, Result};
pub use model::{normalize_params, reduce_symmetry, Calibration, ModelParams, Regime, SpinState, TFSolution};
pub use potential::{build_w, eval_w, grad_w, h_tf, verify_wells, PotentialW, WellReport};
pub use tf_solver::{classify, critical_q1, critical_q2, solve, tf_energy};

pub mod cli;
pub mod geodesic;
pub mod optim;
pub mod relaxation;
pub mod sharp_interface;
