//! Possession attribution, ball heatmap, zone control and the match summary.

mod control;
mod heatmap;
mod report;

pub use control::{
    control_distribution, frame_controller, possession_rates, ControlGrid, PlayerSample, PossessionRates,
    CONTROL_RADIUS_M,
};
pub use heatmap::{ball_heatmap, GridConfig, HeatmapGrid};
pub use report::{
    build_summary, ControlBasis, HeatmapSection, MatchSummary, PossessionField, RosterEntry, Rosters,
    SummaryAccumulator, ZoneControl,
};
