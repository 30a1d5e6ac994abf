//! Scaling experiments: each quantity of a sharpness argument is measured
//! over a dyadic range of scales and its exponent fitted.

mod fit;
mod knapp;
mod morrey;
mod region;
mod report;
mod upperbound;

pub use fit::{fit_exponent, fit_logs, ExponentFit};
pub use knapp::{run_knapp, KnappConfig};
pub use morrey::{grid_for, norm_component, run_morrey, sigma_sweep, MorreyConfig, MorreyReport, SigmaSweep};
pub use region::{
    knapp_threshold, paraboloid_threshold, region_report, region_slice, Endpoint, RegionBoundary, RegionReport,
    RegionSlice,
};
pub use report::{reports_to_csv, ComponentFit, ExperimentReport, Gate, Sample, CSV_HEADER};
pub use upperbound::{a_grid, run_upperbound, sweep_upperbound, SweepEntry, UpperboundConfig, UpperboundSweep};
