//! Beltrami fields on the flat torus from lattice-snapped plane waves.

pub mod field;
pub mod lattice;

pub use field::{
    beltrami_projection, build_torus_beltrami, eval_torus_field, snap_atoms, torus_helicity_ratio, ModeReport,
    RescaledTorusField, TorusBeltramiField, TorusMode,
};
pub use lattice::{
    enumerate_norm2, enumerate_sphere_lattice, is_square_free, select_nearest_directions, square_free_filter,
    Assignment, LatticeDirectionSet, Snapping, LATTICE_CAP,
};
