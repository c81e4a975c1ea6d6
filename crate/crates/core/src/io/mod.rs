//! Field descriptors, provenance records and grid/trajectory/section exports.

mod descriptor;
mod export;

pub use descriptor::{Document, FieldDescriptor, LoadedField, ModeEntry, PlaneWaveEntry, Provenance};
pub use export::{
    fmt_f64, write_grid_csv, write_section_csv, write_trajectory_csv, write_vtk, GridSpec, VTK_TITLE_MAX,
};
