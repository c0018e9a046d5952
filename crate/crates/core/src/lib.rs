//! Folded volume forms and b^m-Nambu forms on the flat torus: invariants,
//! Moser flows and desingularization.

// Negated comparisons reject NaN along with the out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bm;
pub mod compat;
pub mod desing;
pub mod error;
pub mod exec;
pub mod forms;
pub mod invariants;
pub mod io;
pub mod moser;
pub mod numerics;
pub mod primitive;
pub mod selftest;
pub mod separable;
pub mod spectral;

pub use bm::{BmNambuForm, CollarSpec, CriticalSet, FoldedVolumeForm};
pub use error::{Error, Result};
pub use exec::ExecMode;
pub use forms::{DiscreteMap, OneForm, OneFormEval, TwoForm, VectorField};
pub use separable::{SeparableField, SeparableTerm, TabulatedProfile, XFactor, XProfile};
pub use spectral::{Axis, SpectralField1D, SpectralField2D};
