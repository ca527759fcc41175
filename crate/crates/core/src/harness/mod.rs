//! Arc dissection, brute-force truth, and prediction reports.

mod arcs;
mod compare;
mod truth;

pub use arcs::{arc_mass_report, default_theta, major_arcs, Arc, ArcDissection, ArcMass, ArcMassReport};
pub use compare::{
    gap_series, major_arc_approx_check, predict_and_compare, validate_window, w_main, w_main_rescaled, CompareConfig,
    CompareRow, MajorArcRow, PredictionReport, CSV_HEADER,
};
pub use truth::{
    choose_strategy, prime_power_gap, support_lists, truth_count, truth_count_window, zero_mass, PrimePowerGap,
    SolveStrategy, TruthMode, ZeroMass, TABLE_LIMIT, TRUTH_LIMIT,
};
