//! Entanglement-spectrum analytics: reduced density matrices, Rényi
//! entropies, eigenvector overlaps, crossing detection and min-gap scaling.

mod crossings;
mod overlap;
mod scaling;
mod snapshot;

pub use crossings::{
    detect_crossings, page_time, refine_crossings, CrossingEvent, CrossingOptions, GapProbe,
};
pub use overlap::{bhattacharyya_overlap, ipr_diagnostic, overlap_matrix, IprPoint};
pub use scaling::{gap_scaling, GapScalingResult, LineFit};
pub use snapshot::{
    entanglement_snapshot, partial_trace, renyi_entropy, EntanglementSnapshot, SnapshotOptions,
};
