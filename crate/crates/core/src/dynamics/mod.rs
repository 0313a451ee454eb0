//! Time evolution and the measurements built on it.

mod fit;
mod markov;
mod propagate;
mod rabi;

pub use fit::{linear_fit, log_fit, LinearFit};
pub use markov::{
    build_model, fgr_rate, markov_report, mode_populations, residual_linewidth, superradiance_point, superradiance_scan,
    symmetric_dimer_state, tuned_config, MarkovOptions, MarkovOutcome, MarkovReport, Model, SuperradiancePoint,
    SuperradianceScan, TimeSeries, DEFAULT_ONSET_THRESHOLD, MIN_R2,
};
pub use propagate::{
    geometric_grid, propagate, uniform_grid, Method, Propagator, Trajectory, MAX_EIGVEC_CONDITION, RK_ATOL, RK_RTOL,
};
pub use rabi::{dimer_population, rabi_report, RabiOptions, RabiOutcome, RabiReport};
