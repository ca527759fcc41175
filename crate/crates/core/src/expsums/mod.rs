//! Weighted exponential sums over windowed boxes.

mod complete;
mod direct;
mod vaughan;
mod window;

pub use complete::{
    complete_sum, complete_sum_bound_report, unit_value_histogram, BoundRow, CompleteSumSpec,
};
pub use direct::{
    cauchy_schwarz_check, exact_mean, s_alpha, s_alpha_weighted, windowed_zero_mass, CauchySchwarzCheck, ExactMean,
    ENUMERATION_LIMIT,
};
pub use vaughan::{s_vaughan, VaughanPiece, VaughanSplit};
pub use window::{Alpha, ArithWeight, WindowedBox};

pub(crate) use direct::product_fold;
