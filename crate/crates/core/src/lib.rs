//! Capacity-region toolkit for the two-receiver Poisson broadcast channel
//! with on/off inputs, and for binary-input discrete memoryless broadcast
//! channels.

pub mod bounds;
pub mod classify;
pub mod dmbc;
pub mod envelope;
pub mod error;
pub mod model;
pub mod optim;
pub mod regions;
pub mod sweep;
mod special;

pub use error::{Error, Result};
pub use model::{
    binary_approx, mutual_info_derivs, mutual_info_rate, optimal_input, BinaryApprox, InputDist,
    PbcParams, Receiver,
};
pub use envelope::{
    analytic_envelope, g1, g2, hull_envelope, invert_g, scaled_envelope, GFunction,
    InputDecomposition, LinearSegment, Orientation, PiecewiseEnvelope, SampledEnvelope,
    SupportPoint,
};
pub use classify::{
    breakpoints, classify, classify_avg_power, classify_with_stronger,
    effectively_less_noisy_by_envelope, effectively_less_noisy_check, stronger_condition_check,
    AvgPowerThresholds, BreakpointInterval, Breakpoints, ChannelClass, ElnVerdict, Memberships,
    Outcome, StrongerCheck, StrongerConditionReport, Verdict,
};
pub use regions::{
    constrained_weighted_sum_rate, region_less_noisy, region_more_capable, weighted_sum_rate,
    RatePoint, RegionBoundary, WeightedSumRate,
};
pub use bounds::{
    marton_dual, marton_sum_rate, superposition_sum_rate, uv_sum_rate, MartonDual, MartonOptions,
    MartonResult, MartonWitness, MutualInfoFunctional, UvOptions, UvResult, UvWitness,
};
pub use dmbc::{
    classify_dmbc, dmbc_mutual_info, skewed_channel, skewed_sweep, BinaryBC, DmbcClass,
    DmbcOptions, DmbcVerdict, SkewedParams, SkewedSweep, SweepFractions,
};
pub use sweep::{
    fraction_closed_form, fraction_monte_carlo, optimality_map, BoxSpec, FractionEstimate, Fractions,
    MapCell, OptimalityMap,
};
