//! Field-line tracing, Poincaré sections, helicity and C^m error norms.

pub mod helicity;
pub mod integrator;
pub mod norms;
pub mod section;

pub use helicity::{s3_helicity_ratio, MIN_HELICITY_NODES};
pub use integrator::{trace_field_line, FlowField, IntegratorStats, Sample, TraceOptions, Trajectory};
pub use norms::{
    divergence_residual, fd_partials, s3_divergence_residual, sup_error_norm, Ball, DerivativeSource, ErrorReport,
    DEFAULT_NORM_GRID, FD_STEP,
};
pub use section::{
    detect_closed_orbit, find_fixed_point, invariant_ellipse_seeds, invariant_form, poincare_section, return_map,
    return_map_jacobian, tube_radius, ClosedOrbit, Crossing, FixedPoint,
    PoincareSection, SectionOptions, SectionSpec, DEFAULT_CLOSURE_THRESHOLD, DEFAULT_MIN_RETURNS,
};
