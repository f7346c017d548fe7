//! Concrete problem instances: strongly convex quadratics (including the
//! two-dimensional instance that attains the closed-form rate) and sparse
//! logistic regression over an L1 ball.

mod dataset;
mod l1;
mod logistic;
mod quadratic;

pub use dataset::{generate_classification_data, ClassificationDataset, GenerationMeta};
pub use l1::project_l1_ball;
pub use logistic::{
    estimate_kappa_f, KappaEstimate, LogisticL1Instance, DEFAULT_NEWTON_MAX_ITERS, DEFAULT_NEWTON_TOL,
};
pub use quadratic::{make_attainability_instance, make_random_quadratic, QuadraticInstance};
