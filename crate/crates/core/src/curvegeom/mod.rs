//! Geometry of sampled Jordan curves: pinchings, quasicircle constants,
//! distances between curves and regularity estimates.

pub mod distance;
pub mod hull;
pub mod pinch;
pub mod regularity;
pub mod stability;

pub use distance::{hausdorff_distance, sup_norm_distance};
pub use pinch::{
    pinch, pinch_profile, quasicircle_constant, write_profile_csv, PairMode, PinchingReport,
    QuasicircleEstimate, DEFAULT_PAIR_BUDGET,
};
pub use regularity::{holder_exponent, RegularityProbe, ScalePair};
pub use stability::{check_c1_stability, C1Check};
