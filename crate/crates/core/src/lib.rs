//! Furstenberg entropy of nonsingular actions built from product measures on
//! the Cantor group `F = ⊕ Z/2Z`.
//!
//! * [`cantor`]: group elements, product measures `ν`, Radon–Nikodym derivatives.
//! * [`actions`]: acting groups, base systems, cocycles and pushforwards of `κ`.
//! * [`entropy`]: exact, skew-product and Monte Carlo entropy.
//! * [`realize`]: the `θ`-deformation solver and the small-entropy construction.
//! * [`classify`]: Krieger-type labels and ratio-set diagnostics.
//! * [`scenario`]: the JSON scenario format.

pub mod actions;
pub mod cantor;
pub mod classify;
pub mod entropy;
pub mod error;
mod montecarlo;
pub mod realize;
pub mod scenario;

pub use actions::{BasePoint, BaseSystem, CocycleSpec, Element, FiniteMeasure, GroupSpec, KappaMeasure, Projection};
pub use cantor::{
    coordinate_distribution, jeffreys_weight, log_rn_derivative, norm, phi, rn_derivative, Family, GroupElement,
    PointPrefix, ProductMeasureSpec,
};
pub use classify::{classify_family, kakutani_square_sum, ratio_set_estimate, KriegerType, TypeLabel};
pub use entropy::{
    exact_entropy, mc_entropy, skew_entropy, stationarity_defect, EntropyBreakdown, McConfig, McEstimate, McMode,
};
pub use error::{Error, Result};
pub use realize::{build_budget, build_small_entropy_scenario, deform, realize_target, KappaWeights, TypeFlag};
pub use scenario::{load_scenario, Scenario};
