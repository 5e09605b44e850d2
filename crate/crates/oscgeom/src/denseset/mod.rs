//! Dense point sets: the ball-slice extractor, the perturbed grid and the
//! lattice facet analysis used to bound convex subsets of it.

pub mod fit;
pub mod lattice;
pub mod lowerbound;
pub mod upperbound;

pub use fit::{kendall_tau, linear_fit, loglog_fit, LogLogFit};
pub use lattice::{
    covolume_sq, facet_analysis, line_trace, primitive_directions, surface_area_check, u_sequence, u_sequence_sq,
    FacetRecord, LineCount, LineTrace, SurfaceAreaCheck,
};
pub use lowerbound::{
    estimate_hit_probability, extract_convex_slice, extract_convex_slice_report, normalize, pack_slices,
    ExtractReport, HitEstimate, Normalization, Pose, SliceFrame,
};
pub use upperbound::{
    build_perturbed_grid, build_perturbed_grid_with, grid_index, grid_point, GeneralPositionCheck, GridConfig,
    PerturbedGrid,
};
