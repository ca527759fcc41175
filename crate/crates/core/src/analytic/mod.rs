//! Smooth weights, oscillatory integrals and the real density.

mod density;
mod oscillatory;
mod quadrature;
mod realsol;
mod weight;

pub use density::{epsilon_density, singular_integral, EpsilonDensity, SingularIntegral, SingularIntegralOptions};
pub use oscillatory::{
    decay_uniformity_report, oscillatory_i, DecayReport, DecayRow, OscValue, OscillatoryIntegral, QuadOptions,
    TwistSpec, DECAY_FLAG_RATIO,
};
pub use quadrature::{adaptive_simpson, GaussLegendre};
pub use realsol::{real_nonsingular_solution, window_check, RealSearch, RealSolution, WindowCheck};
pub use weight::SmoothWeight;
