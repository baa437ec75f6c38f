//! Autoregressive estimators, shipped two ways: as expression trees over
//! statistic atoms (the objects the expansion engine differentiates) and as
//! numeric fitting routines on data (what the Monte Carlo oracle runs).
//!
//! The Burg trees use the closed-form ratio for order 2,
//!
//! ```text
//! φ̂2 = 1 - (C D² - 2 E D²) / (C D² + 8 F² G - 4 F H D),   φ̂1 = (2F/D)(1 - φ̂2)
//! ```
//!
//! over the decomposition `C = S[0,0,3]+S[2,2,3]`, `D = S[0,0,2]+S[1,1,2]`,
//! `E = S[0,2,3]`, `F = S[0,1,2]`, `G = S[1,1,3]`, `H = S[0,1,3]+S[2,1,3]`,
//! which is algebraically identical to the reflection-coefficient recursion
//! (asserted to 1e-10 in the test suite). Note that `E` is the lag-2
//! cross-product statistic `Σ z_t z_{t-2}`, not a sum of squared products:
//! the ratio identity with the recursion holds only for the cross-product
//! form, and only that form is a lagged-product statistic at all. Under this
//! decomposition substituting statistic means into the ratio recovers the
//! population lag-2 partial autocorrelation. In the unknown-mean mode the same
//! tree shapes are read over the mean-centered statistics; the divisors
//! cancel inside every ratio, so fitting reduces to running the known-mean
//! routine on centered data.

use crate::error::{Error, Result};
use crate::expansion::{EstimatorExpr, ExpansionResult};
use crate::model::{ArModel, MomentContext};
use crate::statdsl::{MeanMode, StatAtom};

/// The estimator families exposed on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
pub enum EstimatorKind {
    Burg,
    LeastSquares,
    YuleWalker,
}

impl EstimatorKind {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Burg => "burg",
            Self::LeastSquares => "ls",
            Self::YuleWalker => "yw",
        }
    }
}

impl std::str::FromStr for EstimatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "burg" => Ok(Self::Burg),
            "ls" => Ok(Self::LeastSquares),
            "yw" => Ok(Self::YuleWalker),
            other => Err(Error::InvalidParameter(format!(
                "unknown estimator '{other}' (expected 'burg', 'ls' or 'yw')"
            ))),
        }
    }
}

/// An estimator of a given order: one expression tree per coefficient plus
/// the matching fitting routine.
#[derive(Debug, Clone)]
pub struct EstimatorDef {
    pub kind: EstimatorKind,
    pub order: usize,
    pub mode: MeanMode,
    /// One tree per coefficient, `φ1` first.
    pub coeff_exprs: Vec<EstimatorExpr>,
}

impl EstimatorDef {
    /// Expansion of every coefficient tree at the model's mean point.
    pub fn expand(&self, ctx: &MomentContext) -> Result<Vec<ExpansionResult>> {
        self.coeff_exprs
            .iter()
            .map(|e| e.expand(ctx, self.mode))
            .collect()
    }

    /// Fits the estimator to data, honoring the mean mode (unknown mean:
    /// the series is centered by its sample mean first).
    pub fn fit(&self, series: &[f64]) -> Result<Vec<f64>> {
        match self.kind {
            EstimatorKind::Burg => match self.mode {
                MeanMode::KnownZero => burg_fit(series, self.order),
                MeanMode::Unknown => burg_fit(&centered(series), self.order),
            },
            EstimatorKind::LeastSquares => ls_fit(series, self.order, self.mode),
            EstimatorKind::YuleWalker => yw_fit(series, self.order, self.mode),
        }
    }

    /// The closed-form bias coefficients, where published: Burg and least
    /// squares share `(-φ1, -(1+3φ2))` known-mean and
    /// `(-(1+φ1+φ2), -(2+4φ2))` unknown-mean (AR(1): drop the φ2 terms).
    pub fn closed_form_bias(&self, model: &ArModel) -> Option<Vec<f64>> {
        if matches!(self.kind, EstimatorKind::YuleWalker) {
            return None;
        }
        let phi = model.phi();
        Some(match (self.order, self.mode) {
            (1, MeanMode::KnownZero) => vec![-2.0 * phi[0]],
            (1, MeanMode::Unknown) => vec![-(1.0 + 3.0 * phi[0])],
            (_, MeanMode::KnownZero) => vec![-phi[0], -(1.0 + 3.0 * phi[1])],
            (_, MeanMode::Unknown) => {
                vec![-(1.0 + phi[0] + phi[1]), -(2.0 + 4.0 * phi[1])]
            }
        })
    }
}

/// Builds the definition for a (kind, order, mode) triple.
pub fn estimator_def(kind: EstimatorKind, order: usize, mode: MeanMode) -> Result<EstimatorDef> {
    match kind {
        EstimatorKind::Burg => match order {
            1 => Ok(burg_ar1_def(mode)),
            2 => Ok(burg_ar2_def(mode)),
            n => Err(Error::UnsupportedOrder(n)),
        },
        EstimatorKind::LeastSquares => ls_ar_def(order, mode),
        EstimatorKind::YuleWalker => yw_ar_def(order, mode),
    }
}

fn s(m: u32, k: u32, i: u32) -> EstimatorExpr {
    EstimatorExpr::Leaf(StatAtom::new(m, k, i).expect("static atom"))
}

fn c(v: f64) -> EstimatorExpr {
    EstimatorExpr::Constant(v)
}

/// Burg AR(1): `ρ̂ = 2 S[0,1,2] / (S[0,0,2] + S[1,1,2])`.
pub fn burg_ar1_def(mode: MeanMode) -> EstimatorDef {
    let rho = c(2.0) * s(0, 1, 2) / (s(0, 0, 2) + s(1, 1, 2));
    EstimatorDef {
        kind: EstimatorKind::Burg,
        order: 1,
        mode,
        coeff_exprs: vec![rho],
    }
}

/// Burg AR(2): the closed-form ratio over the C..H decomposition.
pub fn burg_ar2_def(mode: MeanMode) -> EstimatorDef {
    let cc = s(0, 0, 3) + s(2, 2, 3);
    let d = s(0, 0, 2) + s(1, 1, 2);
    let e = s(0, 2, 3);
    let f = s(0, 1, 2);
    let g = s(1, 1, 3);
    let h = s(0, 1, 3) + s(2, 1, 3);

    let num = cc.clone() * d.clone().pow(2) - c(2.0) * e * d.clone().pow(2);
    let den =
        cc * d.clone().pow(2) + c(8.0) * f.clone().pow(2) * g - c(4.0) * f.clone() * h * d.clone();
    let phi2 = c(1.0) - num / den;
    let phi1 = (c(2.0) * f / d) * (c(1.0) - phi2.clone());
    EstimatorDef {
        kind: EstimatorKind::Burg,
        order: 2,
        mode,
        coeff_exprs: vec![phi1, phi2],
    }
}

/// Conditional least squares: regression of `z_t` on its lags over
/// `t = order+1..n`, i.e. the normal-equation solution written in atoms with
/// start index `order+1`.
pub fn ls_ar_def(order: usize, mode: MeanMode) -> Result<EstimatorDef> {
    let coeff_exprs = match order {
        1 => vec![s(0, 1, 2) / s(1, 1, 2)],
        2 => {
            let a11 = s(1, 1, 3);
            let a12 = s(1, 2, 3);
            let a22 = s(2, 2, 3);
            let c1 = s(0, 1, 3);
            let c2 = s(0, 2, 3);
            let det = a11.clone() * a22.clone() - a12.clone().pow(2);
            let phi1 = (c1.clone() * a22 - c2.clone() * a12.clone()) / det.clone();
            let phi2 = (c2 * a11 - c1 * a12) / det;
            vec![phi1, phi2]
        }
        n => return Err(Error::UnsupportedOrder(n)),
    };
    Ok(EstimatorDef {
        kind: EstimatorKind::LeastSquares,
        order,
        mode,
        coeff_exprs,
    })
}

/// Yule-Walker written in lag-ratio atoms with a common start index
/// `order+1`, so every divisor cancels and the solution is expressible as a
/// fixed tree. [`yw_fit`] computes exactly these statistics.
pub fn yw_ar_def(order: usize, mode: MeanMode) -> Result<EstimatorDef> {
    let coeff_exprs = match order {
        1 => vec![s(0, 1, 2) / s(0, 0, 2)],
        2 => {
            let g0 = s(0, 0, 3);
            let g1 = s(0, 1, 3);
            let g2 = s(0, 2, 3);
            let det = g0.clone().pow(2) - g1.clone().pow(2);
            let phi1 = (g1.clone() * g0.clone() - g2.clone() * g1.clone()) / det.clone();
            let phi2 = (g2 * g0 - g1.pow(2)) / det;
            vec![phi1, phi2]
        }
        n => return Err(Error::UnsupportedOrder(n)),
    };
    Ok(EstimatorDef {
        kind: EstimatorKind::YuleWalker,
        order,
        mode,
        coeff_exprs,
    })
}

/// Burg's reflection-coefficient recursion with the Durbin-Levinson update.
/// Returns coefficients strictly inside the admissible region for any
/// nondegenerate input.
pub fn burg_fit(series: &[f64], order: usize) -> Result<Vec<f64>> {
    if order == 0 {
        return Err(Error::InvalidParameter("order must be at least 1".into()));
    }
    let n = series.len();
    if n <= order + 2 {
        return Err(Error::DegenerateInput(format!(
            "series of length {n} too short for order {order}"
        )));
    }
    let mut fwd = series.to_vec();
    let mut bwd = series.to_vec();
    let mut coeffs = vec![0.0; order];
    for m in 0..order {
        let mut num = 0.0;
        let mut den = 0.0;
        for t in (m + 1)..n {
            num += fwd[t] * bwd[t - 1];
            den += fwd[t] * fwd[t] + bwd[t - 1] * bwd[t - 1];
        }
        if den == 0.0 {
            return Err(Error::DegenerateInput(
                "prediction error energy is zero".into(),
            ));
        }
        let k = 2.0 * num / den;
        if k.is_nan() || k.abs() >= 1.0 {
            return Err(Error::DegenerateInput(
                "reflection coefficient reached the unit boundary".into(),
            ));
        }
        let prev = coeffs[..m].to_vec();
        coeffs[m] = k;
        for j in 0..m {
            coeffs[j] = prev[j] - k * prev[m - 1 - j];
        }
        for t in ((m + 1)..n).rev() {
            let ft = fwd[t] - k * bwd[t - 1];
            bwd[t] = bwd[t - 1] - k * fwd[t];
            fwd[t] = ft;
        }
    }
    Ok(coeffs)
}

/// Conditional least squares fit; unknown mean subtracts the sample mean
/// first.
pub fn ls_fit(series: &[f64], order: usize, mode: MeanMode) -> Result<Vec<f64>> {
    check_length(series, order)?;
    let z = match mode {
        MeanMode::KnownZero => series.to_vec(),
        MeanMode::Unknown => centered(series),
    };
    let n = z.len();
    match order {
        1 => {
            let mut num = 0.0;
            let mut den = 0.0;
            for t in 1..n {
                num += z[t] * z[t - 1];
                den += z[t - 1] * z[t - 1];
            }
            if den == 0.0 {
                return Err(Error::DegenerateInput("zero regressor energy".into()));
            }
            Ok(vec![num / den])
        }
        2 => {
            let (mut s11, mut s12, mut s22, mut c1, mut c2) = (0.0, 0.0, 0.0, 0.0, 0.0);
            for t in 2..n {
                s11 += z[t - 1] * z[t - 1];
                s12 += z[t - 1] * z[t - 2];
                s22 += z[t - 2] * z[t - 2];
                c1 += z[t] * z[t - 1];
                c2 += z[t] * z[t - 2];
            }
            solve_2x2_symmetric(s11, s12, s22, c1, c2)
        }
        n => Err(Error::UnsupportedOrder(n)),
    }
}

/// Yule-Walker fit from sample autocovariances with the common start index
/// `order+1` (matching [`yw_ar_def`]); unknown mean centers the series first.
pub fn yw_fit(series: &[f64], order: usize, mode: MeanMode) -> Result<Vec<f64>> {
    check_length(series, order)?;
    let z = match mode {
        MeanMode::KnownZero => series.to_vec(),
        MeanMode::Unknown => centered(series),
    };
    let n = z.len();
    let mut g = vec![0.0; order + 1];
    for (lag, slot) in g.iter_mut().enumerate() {
        for t in order..n {
            *slot += z[t] * z[t - lag];
        }
    }
    match order {
        1 => {
            if g[0] == 0.0 {
                return Err(Error::DegenerateInput("zero sample variance".into()));
            }
            Ok(vec![g[1] / g[0]])
        }
        2 => solve_2x2_symmetric(g[0], g[1], g[0], g[1], g[2]),
        n => Err(Error::UnsupportedOrder(n)),
    }
}

/// Solves `[a b; b c] x = [d; e]`.
fn solve_2x2_symmetric(a: f64, b: f64, cc: f64, d: f64, e: f64) -> Result<Vec<f64>> {
    let det = a * cc - b * b;
    let scale = (a.abs().max(cc.abs())).powi(2).max(f64::MIN_POSITIVE);
    if !det.is_finite() || det.abs() <= 1e-14 * scale {
        return Err(Error::DegenerateInput("singular normal equations".into()));
    }
    Ok(vec![(d * cc - e * b) / det, (e * a - d * b) / det])
}

fn check_length(series: &[f64], order: usize) -> Result<()> {
    if !(1..=2).contains(&order) {
        return Err(Error::UnsupportedOrder(order));
    }
    if series.len() <= order + 2 {
        return Err(Error::DegenerateInput(format!(
            "series of length {} too short for order {order}",
            series.len()
        )));
    }
    Ok(())
}

fn centered(series: &[f64]) -> Vec<f64> {
    let mean = series.iter().sum::<f64>() / series.len() as f64;
    series.iter().map(|z| z - mean).collect()
}

/// The known-mean statistic `S[m,k,i] = (1/(n+1-i)) Σ_{t=i}^n z_{t-m} z_{t-k}`
/// evaluated on data (`series[0]` is `z_1`).
pub fn atom_statistic(series: &[f64], atom: StatAtom) -> f64 {
    let n = series.len();
    let i = atom.i() as usize;
    let (m, k) = (atom.m() as usize, atom.k() as usize);
    debug_assert!(i <= n, "start index beyond series length");
    let mut sum = 0.0;
    for t in i..=n {
        sum += series[t - m - 1] * series[t - k - 1];
    }
    sum / (n + 1 - i) as f64
}

/// The unknown-mean statistic
/// `S̄[m,k,i] = (1/n) Σ_{t=i}^n (z_{t-m} - z̄)(z_{t-k} - z̄)`.
pub fn atom_statistic_centered(series: &[f64], atom: StatAtom) -> f64 {
    let n = series.len();
    let mean = series.iter().sum::<f64>() / n as f64;
    let i = atom.i() as usize;
    let (m, k) = (atom.m() as usize, atom.k() as usize);
    let mut sum = 0.0;
    for t in i..=n {
        sum += (series[t - m - 1] - mean) * (series[t - k - 1] - mean);
    }
    sum / n as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulator::simulate;
    use approx::assert_relative_eq;

    fn ctx(phi: &[f64]) -> MomentContext {
        MomentContext::new(ArModel::new(phi, 1.0).unwrap()).unwrap()
    }

    #[test]
    fn trees_are_consistent_at_the_mean() {
        let grid = [
            vec![0.5, 0.2],
            vec![-0.6, 0.3],
            vec![1.0, -0.25],
            vec![0.4, -0.5],
            vec![0.3],
            vec![-0.8],
        ];
        for phi in &grid {
            let ctx = ctx(phi);
            for kind in [
                EstimatorKind::Burg,
                EstimatorKind::LeastSquares,
                EstimatorKind::YuleWalker,
            ] {
                let def = estimator_def(kind, phi.len(), MeanMode::KnownZero).unwrap();
                for (j, expr) in def.coeff_exprs.iter().enumerate() {
                    let v = expr.evaluate_at_mean(&ctx).unwrap();
                    assert_relative_eq!(v, phi[j], max_relative = 1e-10, epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn burg_ar2_expand_known_closed_form() {
        let ctx = ctx(&[0.5, 0.2]);
        let def = burg_ar2_def(MeanMode::KnownZero);
        let results = def.expand(&ctx).unwrap();
        assert_relative_eq!(results[1].bias_coefficient, -1.6, max_relative = 1e-8);
        assert_relative_eq!(results[0].bias_coefficient, -0.5, max_relative = 1e-8);
    }

    #[test]
    fn burg_ar2_bias_in_root_form() {
        // The same coefficients written in the characteristic roots:
        //   known:   -(z1 + z2),           3 z1 z2 - 1
        //   unknown: (z1 z2 - z1 - z2) - 1, 4 z1 z2 - 2
        // Exercised across root kinds (complex pairs sum/multiply to reals).
        for &(p1, p2) in &[(0.5, 0.2), (1.0, -0.25), (0.4, -0.5), (-0.9, -0.6)] {
            let model = ArModel::ar2(p1, p2, 1.0).unwrap();
            let roots = model.char_roots().unwrap();
            let sum = roots.zeta1 + roots.zeta2;
            let prod = roots.zeta1 * roots.zeta2;
            assert!(sum.im.abs() < 1e-12 && prod.im.abs() < 1e-12);
            let ctx = MomentContext::new(model).unwrap();

            let known = burg_ar2_def(MeanMode::KnownZero).expand(&ctx).unwrap();
            assert_relative_eq!(
                known[0].bias_coefficient,
                -sum.re,
                max_relative = 1e-8,
                epsilon = 1e-9
            );
            assert_relative_eq!(
                known[1].bias_coefficient,
                3.0 * prod.re - 1.0,
                max_relative = 1e-8,
                epsilon = 1e-9
            );

            let unknown = burg_ar2_def(MeanMode::Unknown).expand(&ctx).unwrap();
            assert_relative_eq!(
                unknown[0].bias_coefficient,
                prod.re - sum.re - 1.0,
                max_relative = 1e-8,
                epsilon = 1e-9
            );
            assert_relative_eq!(
                unknown[1].bias_coefficient,
                4.0 * prod.re - 2.0,
                max_relative = 1e-8,
                epsilon = 1e-9
            );
        }
    }

    #[test]
    fn burg_ar1_expand_closed_forms() {
        let ctx = ctx(&[0.3]);
        let known = burg_ar1_def(MeanMode::KnownZero).expand(&ctx).unwrap();
        assert_relative_eq!(known[0].bias_coefficient, -0.6, max_relative = 1e-9);
        let unknown = burg_ar1_def(MeanMode::Unknown).expand(&ctx).unwrap();
        assert_relative_eq!(unknown[0].bias_coefficient, -1.9, max_relative = 1e-9);
        assert_relative_eq!(known[0].value_at_mean, 0.3, max_relative = 1e-12);
    }

    #[test]
    fn ls_matches_burg_bias_examples() {
        let ctx1 = ctx(&[0.3]);
        let ls = ls_ar_def(1, MeanMode::KnownZero)
            .unwrap()
            .expand(&ctx1)
            .unwrap();
        assert_relative_eq!(ls[0].bias_coefficient, -0.6, max_relative = 1e-9);
    }

    #[test]
    fn closed_form_equals_recursion_on_random_series() {
        // Eq-of-structures check: evaluating the AR(2) ratio trees on the
        // raw sample statistics must reproduce the Burg recursion exactly.
        let model = ArModel::ar2(0.5, 0.2, 1.0).unwrap();
        for seed in 0..20 {
            let series = simulate(&model, 100, seed).unwrap();
            let fitted = burg_fit(&series, 2).unwrap();
            let def = burg_ar2_def(MeanMode::KnownZero);
            for (j, expr) in def.coeff_exprs.iter().enumerate() {
                let tree = expr.evaluate_with(&|a| atom_statistic(&series, a)).unwrap();
                assert!(
                    (tree - fitted[j]).abs() < 1e-10,
                    "seed {seed}, coeff {j}: {tree} vs {}",
                    fitted[j]
                );
            }
            // order 1 as well
            let def1 = burg_ar1_def(MeanMode::KnownZero);
            let tree = def1.coeff_exprs[0]
                .evaluate_with(&|a| atom_statistic(&series, a))
                .unwrap();
            let fitted1 = burg_fit(&series, 1).unwrap();
            assert!((tree - fitted1[0]).abs() < 1e-10);
        }
    }

    #[test]
    fn unknown_mean_trees_match_centered_recursion() {
        // Over the centered statistics the same ratios equal Burg run on the
        // centered series (the 1/n divisors cancel).
        let model = ArModel::ar2(-0.6, 0.3, 2.0).unwrap();
        for seed in 100..110 {
            let series = simulate(&model, 150, seed).unwrap();
            let def = burg_ar2_def(MeanMode::Unknown);
            let fitted = def.fit(&series).unwrap();
            for (j, expr) in def.coeff_exprs.iter().enumerate() {
                let tree = expr
                    .evaluate_with(&|a| atom_statistic_centered(&series, a))
                    .unwrap();
                assert!((tree - fitted[j]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn burg_fit_recovers_truth_on_long_series() {
        let model = ArModel::ar2(0.5, 0.2, 1.0).unwrap();
        let series = simulate(&model, 10_000, 7).unwrap();
        let est = burg_fit(&series, 2).unwrap();
        assert!((est[0] - 0.5).abs() < 0.05, "{est:?}");
        assert!((est[1] - 0.2).abs() < 0.05, "{est:?}");
    }

    #[test]
    fn burg_fit_rejects_degenerate_series() {
        assert!(matches!(
            burg_fit(&vec![0.0; 50], 2),
            Err(Error::DegenerateInput(_))
        ));
        assert!(matches!(
            burg_fit(&[1.0, 2.0, 3.0], 2),
            Err(Error::DegenerateInput(_))
        ));
        // constant series: perfectly predictable, reflection coefficient 1
        assert!(matches!(
            burg_fit(&vec![1.0; 50], 1),
            Err(Error::DegenerateInput(_))
        ));
    }

    #[test]
    fn burg_fit_always_admissible() {
        let model = ArModel::ar2(0.9, 0.05, 1.0).unwrap();
        for seed in 0..200 {
            let series = simulate(&model, 30, seed).unwrap();
            let est = burg_fit(&series, 2).unwrap();
            let fitted = ArModel::ar2(est[0], est[1], 1.0).unwrap();
            assert!(fitted.is_admissible(), "seed {seed}: {est:?}");
        }
    }

    #[test]
    fn ls_fit_exact_on_noise_free_recursion() {
        // AR(1): z_t = 0.7 z_{t-1} from z_1 = 1
        let mut z = vec![1.0];
        for _ in 1..40 {
            z.push(0.7 * z.last().unwrap());
        }
        let est = ls_fit(&z, 1, MeanMode::KnownZero).unwrap();
        assert_relative_eq!(est[0], 0.7, max_relative = 1e-12);

        // AR(2): (0.5, 0.2) from (1.0, 0.3)
        let mut z = vec![1.0, 0.3];
        for t in 2..60 {
            z.push(0.5 * z[t - 1] + 0.2 * z[t - 2]);
        }
        let est = ls_fit(&z, 2, MeanMode::KnownZero).unwrap();
        assert_relative_eq!(est[0], 0.5, max_relative = 1e-9);
        assert_relative_eq!(est[1], 0.2, max_relative = 1e-9);
    }

    #[test]
    fn ls_and_burg_agree_on_long_series() {
        let model = ArModel::ar2(0.5, 0.2, 1.0).unwrap();
        let series = simulate(&model, 100_000, 11).unwrap();
        let burg = burg_fit(&series, 2).unwrap();
        let ls = ls_fit(&series, 2, MeanMode::KnownZero).unwrap();
        for j in 0..2 {
            assert!((burg[j] - ls[j]).abs() < 1e-3, "{burg:?} vs {ls:?}");
        }
    }

    #[test]
    fn yw_fit_matches_tree_on_data() {
        let model = ArModel::ar2(0.5, 0.2, 1.0).unwrap();
        for mode in [MeanMode::KnownZero, MeanMode::Unknown] {
            let def = yw_ar_def(2, mode).unwrap();
            for seed in 200..206 {
                let series = simulate(&model, 120, seed).unwrap();
                let fitted = def.fit(&series).unwrap();
                for (j, expr) in def.coeff_exprs.iter().enumerate() {
                    let tree = expr
                        .evaluate_with(&|a| match mode {
                            MeanMode::KnownZero => atom_statistic(&series, a),
                            MeanMode::Unknown => atom_statistic_centered(&series, a),
                        })
                        .unwrap();
                    assert!((tree - fitted[j]).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn yw_fit_admissible_over_random_series() {
        let model = ArModel::ar2(0.5, 0.2, 1.0).unwrap();
        let mut violations = 0;
        for seed in 0..1000 {
            let series = simulate(&model, 100, seed).unwrap();
            let est = yw_fit(&series, 2, MeanMode::Unknown).unwrap();
            if !ArModel::ar2(est[0], est[1], 1.0).unwrap().is_admissible() {
                violations += 1;
            }
        }
        assert_eq!(violations, 0);
    }

    #[test]
    fn ls_and_yw_fit_match_their_trees() {
        let model = ArModel::ar2(-0.3, 0.1, 1.0).unwrap();
        let series = simulate(&model, 90, 33).unwrap();
        let def = ls_ar_def(2, MeanMode::KnownZero).unwrap();
        let fitted = def.fit(&series).unwrap();
        for (j, expr) in def.coeff_exprs.iter().enumerate() {
            let tree = expr.evaluate_with(&|a| atom_statistic(&series, a)).unwrap();
            assert!((tree - fitted[j]).abs() < 1e-10);
        }
    }

    #[test]
    fn atom_statistic_definition() {
        // S[0,1,2] on z = [1,2,3,4]: (1/3)(z2 z1 + z3 z2 + z4 z3) = 20/3
        let z = [1.0, 2.0, 3.0, 4.0];
        let a = StatAtom::new(0, 1, 2).unwrap();
        assert_relative_eq!(atom_statistic(&z, a), 20.0 / 3.0);
        // S̄[0,0,1] is the mean-centered variance with divisor n
        let ac = StatAtom::new(0, 0, 1).unwrap();
        let mean = 2.5;
        let expect: f64 = z.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / 4.0;
        assert_relative_eq!(atom_statistic_centered(&z, ac), expect);
    }
}
