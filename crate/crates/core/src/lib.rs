//! Sublinear testers for conditional independence of discrete distributions.
//!
//! The crate is organised bottom-up:
//!
//! * [`dist`]: joint distributions over `X × Y × Z`, distances, CMI, samplers.
//! * [`poly`]: homogeneous polynomials of a distribution, their unique
//!   symmetric unbiased estimators, exact second moments and a brute-force
//!   rational oracle.
//! * [`flatten`]: split distributions and the two-marginal flattening used
//!   by the general tester.
//! * [`testers`]: the binary, general and CMI testers plus threshold
//!   calibration.
//! * [`instances`]: hard-instance ensembles and smoke-test families.
//! * [`harness`]: power experiments and sample-complexity probes.
//! * [`io`]: text formats for samples, distributions and polynomials.

pub mod dist;
pub mod error;
pub mod flatten;
pub mod harness;
pub mod instances;
pub mod io;
pub mod poly;
pub mod rng;
pub mod scalar;
pub mod testers;

pub use dist::{
    binary_slice_tv_via_covariance, ci_distance_proxy, conditional_mutual_information, mixture_q,
    product_of_conditional_marginals, sample_fixed, sample_poissonized, tv_distance,
    ConditionalSlice, Dims, JointDistribution, SampleSet, SampleTriple,
};
pub use error::{Error, Result};
pub use flatten::{implicit_flattening, rescaled_l2_value, split_distribution, FlatteningCoefficients, SplitSpec};
pub use poly::{
    expected_square, homogenize, l2_diff_polynomial, l2_estimator, oracle_moments, tail_term_bound,
    unbiased_estimate, Fingerprint, HomogeneousPolynomial, MomentReport, Polynomial,
};
pub use testers::{
    calibrate_threshold, sample_complexity_binary, sample_complexity_general, test_binary, test_cmi,
    test_general, Mode, TesterConfig, TesterInput, Verdict,
};
