//! Derivation engine for the order-`1/n` bias and variance of smooth
//! functions of autocovariance statistics in stationary AR(1)/AR(2) models.
//!
//! Estimators such as Burg, least squares and Yule-Walker are written as
//! expression trees over indexed lagged-product statistics `S[m,k,i]`. The
//! engine Taylor-expands a tree about the statistic means, feeds the exact
//! gradient and Hessian into the limiting covariance and bias operators of
//! the statistics, and returns the coefficients `b` and `v` of
//! `bias ≐ b/n` and `variance ≐ v/n`. A seeded Monte Carlo simulator provides
//! an independent empirical check of every derived coefficient.
//!
//! ```
//! use arbias_core::{burg_ar2_def, ArModel, MeanMode, MomentContext};
//!
//! let model = ArModel::ar2(0.5, 0.2, 1.0).unwrap();
//! let ctx = MomentContext::new(model).unwrap();
//! let results = burg_ar2_def(MeanMode::KnownZero).expand(&ctx).unwrap();
//! // E(phi2_hat - phi2) = -(1 + 3 phi2)/n + o(1/n)
//! assert!((results[1].bias_coefficient - (-1.6)).abs() < 1e-8);
//! ```

mod error;
pub mod estimators;
pub mod expansion;
pub mod model;
pub mod simulator;
pub mod statdsl;
mod tailsum;

pub use error::{Error, Result};
pub use estimators::{
    atom_statistic, atom_statistic_centered, burg_ar1_def, burg_ar2_def, burg_fit, estimator_def,
    ls_ar_def, ls_fit, yw_ar_def, yw_fit, EstimatorDef, EstimatorKind,
};
pub use expansion::{Derivatives, EstimatorExpr, ExpansionResult};
pub use model::{ArModel, CharRoots, MomentContext, RootKind, DEFAULT_SUM_TOLERANCE};
pub use simulator::{mc_bias, simulate, CoeffReport, McConfig, McReport};
pub use statdsl::{atom_mean, lbias, lcov, LinearStat, MeanMode, StatAtom};
