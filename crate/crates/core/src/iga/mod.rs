//! Group-algebra laboratory: exact finite groups and the affine group.

pub mod affine;
pub mod finite;
pub mod suite;

pub use affine::{AffineElement, HaarSide};
pub use finite::{convolve_fg, iga_superop_rep, FiniteGroup, GroupAlgebraElement, Representation};
