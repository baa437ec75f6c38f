//! Stationary AR(1)/AR(2) models: admissibility, characteristic roots,
//! autocovariances, and the moment cache backing all derivations.
//!
//! The autocovariance function is evaluated through the Yule-Walker linear
//! recursion `γ(h) = φ1 γ(h-1) + φ2 γ(h-2)` seeded from the exactly solved
//! system at lags 0 and 1. The recursion is uniform over distinct, equal and
//! complex characteristic roots; the closed root-form expression is kept only
//! as a test oracle for the distinct-real case.

use std::collections::HashMap;
use std::sync::{OnceLock, RwLock};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::tailsum::{sum_symmetric, DEFAULT_MAX_TERMS};

/// Default absolute tolerance for truncated infinite sums.
pub const DEFAULT_SUM_TOLERANCE: f64 = 1e-12;

/// Distance to the admissibility boundary below which a model is flagged.
pub const NEAR_BOUNDARY_DISTANCE: f64 = 1e-6;

const EQUAL_ROOT_TOLERANCE: f64 = 1e-10;

/// Lags beyond this are recomputed on the fly instead of cached.
const GAMMA_CACHE_MAX: usize = 1 << 21;

/// A stationary autoregressive model of order 1 or 2.
///
/// Construction validates shape (order, finite values, `σ² ≥ 0`) but not
/// admissibility, so the admissibility predicate stays meaningful; anything
/// that needs moments ([`MomentContext`], [`crate::simulator::simulate`])
/// checks admissibility itself.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ArModel {
    order: usize,
    phi: [f64; 2],
    sigma2: f64,
}

impl ArModel {
    pub fn new(phi: &[f64], sigma2: f64) -> Result<Self> {
        if phi.is_empty() || phi.len() > 2 {
            return Err(Error::UnsupportedOrder(phi.len()));
        }
        if !phi.iter().all(|p| p.is_finite()) {
            return Err(Error::InvalidParameter(
                "autoregressive coefficients must be finite".into(),
            ));
        }
        if !sigma2.is_finite() || sigma2 < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "sigma2 must be finite and non-negative, got {sigma2}"
            )));
        }
        let mut coeffs = [0.0; 2];
        coeffs[..phi.len()].copy_from_slice(phi);
        Ok(Self {
            order: phi.len(),
            phi: coeffs,
            sigma2,
        })
    }

    pub fn ar1(phi1: f64, sigma2: f64) -> Result<Self> {
        Self::new(&[phi1], sigma2)
    }

    pub fn ar2(phi1: f64, phi2: f64, sigma2: f64) -> Result<Self> {
        Self::new(&[phi1, phi2], sigma2)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Coefficient slice of length `order`.
    pub fn phi(&self) -> &[f64] {
        &self.phi[..self.order]
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    /// Strict stationarity check: `|φ1| < 1` for order 1; `|φ2| < 1`,
    /// `φ1 + φ2 < 1` and `φ2 - φ1 < 1` for order 2.
    pub fn is_admissible(&self) -> bool {
        let [p1, p2] = self.phi;
        match self.order {
            1 => p1.abs() < 1.0,
            _ => p2.abs() < 1.0 && p1 + p2 < 1.0 && p2 - p1 < 1.0,
        }
    }

    /// Signed distance to the nearest admissibility constraint (negative
    /// outside the region).
    pub fn boundary_distance(&self) -> f64 {
        let [p1, p2] = self.phi;
        match self.order {
            1 => 1.0 - p1.abs(),
            _ => (1.0 - p2.abs()).min(1.0 - (p1 + p2)).min(1.0 - (p2 - p1)),
        }
    }

    /// Admissible but within [`NEAR_BOUNDARY_DISTANCE`] of the boundary.
    /// Moment sums for such models grow like the inverse squared distance,
    /// so downstream output flags them.
    pub fn near_boundary(&self) -> bool {
        self.is_admissible() && self.boundary_distance() < NEAR_BOUNDARY_DISTANCE
    }

    /// Roots of `ζ² - φ1 ζ - φ2 = 0` with multiplicity classification.
    /// Only defined for order 2.
    pub fn char_roots(&self) -> Result<CharRoots> {
        if self.order != 2 {
            return Err(Error::UnsupportedOrder(self.order));
        }
        let [p1, p2] = self.phi;
        let disc = p1 * p1 + 4.0 * p2;
        if disc.abs() <= EQUAL_ROOT_TOLERANCE {
            let z = Complex64::new(p1 / 2.0, 0.0);
            Ok(CharRoots {
                zeta1: z,
                zeta2: z,
                kind: RootKind::Equal,
            })
        } else if disc > 0.0 {
            let sq = disc.sqrt();
            Ok(CharRoots {
                zeta1: Complex64::new((p1 + sq) / 2.0, 0.0),
                zeta2: Complex64::new((p1 - sq) / 2.0, 0.0),
                kind: RootKind::DistinctReal,
            })
        } else {
            let im = (-disc).sqrt() / 2.0;
            Ok(CharRoots {
                zeta1: Complex64::new(p1 / 2.0, im),
                zeta2: Complex64::new(p1 / 2.0, -im),
                kind: RootKind::ComplexPair,
            })
        }
    }

    /// Largest characteristic-root modulus; the geometric decay rate of γ.
    pub(crate) fn decay_rate(&self) -> f64 {
        match self.order {
            1 => self.phi[0].abs(),
            _ => {
                let roots = self.char_roots().expect("order 2");
                roots.zeta1.norm().max(roots.zeta2.norm())
            }
        }
    }

    /// Stationary γ(0) and γ(1) solved from the Yule-Walker system.
    fn gamma01(&self) -> (f64, f64) {
        let [p1, p2] = self.phi;
        match self.order {
            1 => {
                let g0 = self.sigma2 / (1.0 - p1 * p1);
                (g0, p1 * g0)
            }
            _ => {
                let rho1 = p1 / (1.0 - p2);
                let rho2 = p1 * rho1 + p2;
                let g0 = self.sigma2 / (1.0 - p1 * rho1 - p2 * rho2);
                (g0, rho1 * g0)
            }
        }
    }
}

/// Multiplicity classification of the characteristic roots.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum RootKind {
    DistinctReal,
    Equal,
    ComplexPair,
}

/// Characteristic roots of an AR(2) model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CharRoots {
    pub zeta1: Complex64,
    pub zeta2: Complex64,
    pub kind: RootKind,
}

/// Per-model cache of autocovariances, their two-sided sum and the limiting
/// covariance sums keyed by lag differences `(p, q)`.
///
/// Construction requires an admissible model with `σ² > 0`. All values are
/// pure functions of the model, so the interior caches only memoize; readers
/// racing on a miss recompute the identical value. Shared freely across
/// threads behind `&self`.
#[derive(Debug)]
pub struct MomentContext {
    model: ArModel,
    tol: f64,
    gamma: RwLock<Vec<f64>>,
    gamma_sum: OnceLock<Result<f64>>,
    lcov_cache: RwLock<HashMap<(i64, i64), f64>>,
}

impl MomentContext {
    pub fn new(model: ArModel) -> Result<Self> {
        Self::with_tolerance(model, DEFAULT_SUM_TOLERANCE)
    }

    /// `tol` is the absolute truncation tolerance for all infinite sums.
    pub fn with_tolerance(model: ArModel, tol: f64) -> Result<Self> {
        if !model.is_admissible() {
            return Err(Error::Inadmissible(format!(
                "phi = {:?} (boundary distance {:.3e})",
                model.phi(),
                model.boundary_distance()
            )));
        }
        if model.sigma2() <= 0.0 {
            return Err(Error::InvalidParameter(
                "moment computations require sigma2 > 0".into(),
            ));
        }
        if tol.is_nan() || tol <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "sum tolerance must be positive, got {tol}"
            )));
        }
        let (g0, g1) = model.gamma01();
        Ok(Self {
            model,
            tol,
            gamma: RwLock::new(vec![g0, g1]),
            gamma_sum: OnceLock::new(),
            lcov_cache: RwLock::new(HashMap::new()),
        })
    }

    pub fn model(&self) -> &ArModel {
        &self.model
    }

    pub fn tolerance(&self) -> f64 {
        self.tol
    }

    /// Stationary autocovariance γ(h) = γ(|h|).
    pub fn acvf(&self, h: i64) -> f64 {
        let lag = h.unsigned_abs() as usize;
        {
            let cache = self.gamma.read().expect("gamma cache poisoned");
            if lag < cache.len() {
                return cache[lag];
            }
        }
        let mut cache = self.gamma.write().expect("gamma cache poisoned");
        let [p1, p2] = [self.model.phi[0], self.model.phi[1]];
        while cache.len() <= lag.min(GAMMA_CACHE_MAX) {
            let len = cache.len();
            let next = p1 * cache[len - 1] + p2 * cache[len - 2];
            cache.push(next);
        }
        if lag < cache.len() {
            return cache[lag];
        }
        // Far beyond the cache: continue the recursion without storing.
        let (mut prev2, mut prev1) = (cache[cache.len() - 2], cache[cache.len() - 1]);
        for _ in cache.len()..=lag {
            let next = p1 * prev1 + p2 * prev2;
            prev2 = prev1;
            prev1 = next;
        }
        prev1
    }

    /// Two-sided sum Σ_{h=-∞}^{∞} γ(h), truncated when the geometric tail
    /// bound drops below the context tolerance.
    pub fn acvf_sum(&self) -> Result<f64> {
        self.gamma_sum
            .get_or_init(|| {
                sum_symmetric(
                    |h| self.acvf(h),
                    self.model.decay_rate(),
                    self.tol,
                    self.model.order() as i64 + 1,
                    DEFAULT_MAX_TERMS,
                )
            })
            .clone()
    }

    /// Cached Σ_h γ(h)γ(h-p+q) + γ(h+q)γ(h-p), the limiting covariance sum
    /// for a pair of statistic atoms with lag differences p and q. Products
    /// of two autocovariances decay at the squared root modulus, hence the
    /// squared rate for the tail bound.
    pub(crate) fn lcov_sum(&self, p: i64, q: i64) -> Result<f64> {
        if let Some(v) = self
            .lcov_cache
            .read()
            .expect("lcov cache poisoned")
            .get(&(p, q))
        {
            return Ok(*v);
        }
        let rate = self.model.decay_rate().powi(2);
        let min_h = p.abs().max(q.abs()).max((p - q).abs()) + 2;
        let term =
            |h: i64| self.acvf(h) * self.acvf(h - p + q) + self.acvf(h + q) * self.acvf(h - p);
        let value = sum_symmetric(term, rate, self.tol, min_h, DEFAULT_MAX_TERMS)?;
        self.lcov_cache
            .write()
            .expect("lcov cache poisoned")
            .insert((p, q), value);
        Ok(value)
    }
}
