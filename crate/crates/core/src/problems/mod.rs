//! Test problems: quadratics, multi-class logistic regression and nonconvex toys.

pub mod check;
pub mod data;
pub mod logistic;
pub mod quadratic;
pub mod toys;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use check::{central_gradient, central_hvp, grad_check, hvp_check, CheckReport};
pub use data::{gen_synthetic_classification, load_libsvm, parse_libsvm, read_libsvm, LibsvmData, SyntheticSpec};
pub use logistic::{logistic_spectrum_bound, LogisticProblem, SpectrumBound};
pub use quadratic::{QuadraticProblem, QuadraticSum};
pub use toys::{Quartic1D, Rescaled, Rosenbrock2D};

pub(crate) fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
