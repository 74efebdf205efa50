//! Exact Grothendieck-group computations for cluster categories with
//! relative exangulated structures.
//!
//! This crate is an integer-exact workbench built from five layers:
//!
//! * [`abelian`] — finitely presented abelian groups over
//!   arbitrary-precision integers: Smith normal forms with transformation
//!   matrices, membership in relation lattices, induced homomorphisms, and
//!   exact isomorphism tests.
//! * [`arcmodel`] — the polygon arc model of the cluster category of Dynkin
//!   type A: arcs, crossings, suspension, hom-dimensions, composition
//!   tracking through fans, triangles, triangulations, string modules and
//!   their submodule lattices, and index resolutions.
//! * [`exang`] — category data with a distinguished family of conflations
//!   (built from the arc model or loaded from JSON), restriction of the
//!   structure by a set of test objects, Euler relations, and relative
//!   Grothendieck groups with saturation control.
//! * [`indexmaps`] — indices with respect to a triangulation as group
//!   homomorphisms, mutation, the exchange subgroups, and the comparison
//!   maps between relative Grothendieck groups, together with the
//!   commutative diagram that ties them together.
//! * [`ccmap`] — exact Laurent-polynomial arithmetic, coefficient maps on
//!   Grothendieck groups, the cluster character attached to a triangulation,
//!   and (generalized) frieze patterns.
//!
//! All arithmetic is exact (`num_bigint::BigInt` throughout); there is no
//! floating point and no tolerance anywhere in the crate.

#![forbid(unsafe_code)]
#![warn(missing_docs)]

pub mod abelian;
pub mod arcmodel;
pub mod exang;
pub mod indexmaps;

pub use abelian::{
    FpGroup, GroupHom, GroupInvariants, IntMatrix, K0Element, SmithDecomposition,
};
pub use arcmodel::{Arc, IndexResolution, ModuleRep, Polygon, Triangle};
pub use exang::{Category, CategoryData, CategorySource, ConflationData, RelativeK0};
pub use indexmaps::{FaceCheck, HomBundle, IndexError, MutationData};
