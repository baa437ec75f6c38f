//! The algebra of autocovariance statistics: indexed atoms `S[m,k,i]`,
//! finite linear combinations, and the limiting covariance / bias operators.
//!
//! An atom `S[m,k,i]` stands for the lagged-product statistic
//! `(1/(n+1-i)) Σ_{t=i}^n z_{t-m} z_{t-k}` (known mean) or its mean-centered
//! counterpart with divisor `1/n` (unknown mean). The operators below return
//! the order-`1/n` coefficients of its moments:
//!
//! * `lcov(a, b) = lim n·Cov(a, b) = Σ_h γ(h)γ(h-p+q) + γ(h+q)γ(h-p)` with
//!   `p`, `q` the lag differences of the two sides — independent of the start
//!   indices and identical in both mean modes;
//! * `lbias(a) = lim n·E(a - γ(m-k))`, which is `0` for the known-mean
//!   (unbiased) statistic and `-|i-1| γ(m-k) - Σ_h γ(h)` otherwise.

use crate::error::{Error, Result};
use crate::model::MomentContext;

/// Which mean the statistics assume: a known zero mean (unbiased estimator)
/// or an unknown mean estimated by the sample mean (biased estimator).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
pub enum MeanMode {
    KnownZero,
    Unknown,
}

impl std::str::FromStr for MeanMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "known" => Ok(Self::KnownZero),
            "unknown" => Ok(Self::Unknown),
            other => Err(Error::InvalidParameter(format!(
                "unknown mean mode '{other}' (expected 'known' or 'unknown')"
            ))),
        }
    }
}

/// An indexed statistic `S[m,k,i]`; `max(m,k) < i` is enforced at
/// construction so the summation range starting at `t = i` is valid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize)]
pub struct StatAtom {
    m: u32,
    k: u32,
    i: u32,
}

impl StatAtom {
    pub fn new(m: u32, k: u32, i: u32) -> Result<Self> {
        if m.max(k) >= i {
            return Err(Error::InvalidAtom { m, k, i });
        }
        Ok(Self { m, k, i })
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn i(&self) -> u32 {
        self.i
    }

    /// Lag difference `m - k`; the statistic estimates `γ(m-k)`.
    pub fn lag(&self) -> i64 {
        self.m as i64 - self.k as i64
    }

    /// Both lags and the start index shifted by the same constant.
    pub fn shifted(&self, c: u32) -> Self {
        Self {
            m: self.m + c,
            k: self.k + c,
            i: self.i + c,
        }
    }
}

impl std::fmt::Display for StatAtom {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "S[{},{},{}]", self.m, self.k, self.i)
    }
}

/// A finite linear combination of statistic atoms, kept normalized:
/// duplicate atoms merged, zero coefficients dropped, terms sorted.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LinearStat {
    terms: Vec<(f64, StatAtom)>,
}

impl LinearStat {
    pub fn new(terms: impl IntoIterator<Item = (f64, StatAtom)>) -> Self {
        let mut terms: Vec<(f64, StatAtom)> = terms.into_iter().collect();
        terms.sort_by_key(|(_, a)| *a);
        let mut merged: Vec<(f64, StatAtom)> = Vec::with_capacity(terms.len());
        for (c, a) in terms {
            match merged.last_mut() {
                Some((mc, ma)) if *ma == a => *mc += c,
                _ => merged.push((c, a)),
            }
        }
        merged.retain(|(c, _)| *c != 0.0);
        Self { terms: merged }
    }

    pub fn atom(a: StatAtom) -> Self {
        Self::new([(1.0, a)])
    }

    pub fn terms(&self) -> &[(f64, StatAtom)] {
        &self.terms
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self::new(self.terms.iter().map(|(w, a)| (c * w, *a)))
    }

    pub fn plus(&self, other: &Self) -> Self {
        Self::new(self.terms.iter().chain(other.terms.iter()).copied())
    }
}

impl From<StatAtom> for LinearStat {
    fn from(a: StatAtom) -> Self {
        Self::atom(a)
    }
}

/// Expected value of an atom: `E(S[m,k,i]) = γ(m-k)` exactly in the known
/// mean mode and to order `1/n` in the unknown mode (the order-`1/n` shift is
/// what [`lbias`] reports).
pub fn atom_mean(atom: StatAtom, ctx: &MomentContext) -> f64 {
    ctx.acvf(atom.lag())
}

pub(crate) fn lcov_atoms(a: StatAtom, b: StatAtom, ctx: &MomentContext) -> Result<f64> {
    ctx.lcov_sum(a.lag(), b.lag())
}

pub(crate) fn lbias_atom(a: StatAtom, ctx: &MomentContext, mode: MeanMode) -> Result<f64> {
    match mode {
        MeanMode::KnownZero => Ok(0.0),
        MeanMode::Unknown => {
            let penalty = (a.i() as i64 - 1).abs() as f64;
            Ok(-penalty * ctx.acvf(a.lag()) - ctx.acvf_sum()?)
        }
    }
}

/// `lim n·Cov(a, b)`, extended bilinearly over the terms of both sides.
/// The limit is the same in both mean modes; the mode argument is kept for
/// interface symmetry with [`lbias`].
pub fn lcov(a: &LinearStat, b: &LinearStat, ctx: &MomentContext, _mode: MeanMode) -> Result<f64> {
    let mut total = 0.0;
    for &(ca, aa) in a.terms() {
        for &(cb, ab) in b.terms() {
            total += ca * cb * lcov_atoms(aa, ab, ctx)?;
        }
    }
    Ok(total)
}

/// `lim n·E(a - Σ coeff·γ(m-k))`: zero in the known-zero-mean mode, and the
/// linear extension of `-|i-1| γ(m-k) - Σ_h γ(h)` otherwise.
pub fn lbias(a: &LinearStat, ctx: &MomentContext, mode: MeanMode) -> Result<f64> {
    let mut total = 0.0;
    for &(c, atom) in a.terms() {
        total += c * lbias_atom(atom, ctx, mode)?;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ArModel;
    use approx::assert_relative_eq;

    fn ctx(phi: &[f64]) -> MomentContext {
        MomentContext::new(ArModel::new(phi, 1.0).unwrap()).unwrap()
    }

    fn atom(m: u32, k: u32, i: u32) -> StatAtom {
        StatAtom::new(m, k, i).unwrap()
    }

    #[test]
    fn atom_requires_valid_start_index() {
        assert!(StatAtom::new(0, 0, 1).is_ok());
        assert!(StatAtom::new(2, 1, 3).is_ok());
        assert!(matches!(
            StatAtom::new(0, 0, 0),
            Err(Error::InvalidAtom { .. })
        ));
        assert!(matches!(
            StatAtom::new(2, 1, 2),
            Err(Error::InvalidAtom { .. })
        ));
    }

    #[test]
    fn linear_stat_normalizes() {
        let a = atom(0, 0, 3);
        let b = atom(2, 2, 3);
        let s = LinearStat::new([(1.0, a), (2.0, b), (1.5, a), (-2.0, b)]);
        assert_eq!(s.terms(), &[(2.5, a)]);
        assert!(LinearStat::new([(0.0, a)]).terms().is_empty());
    }

    #[test]
    fn atom_mean_examples() {
        // white noise: gamma(0) = 1
        assert_relative_eq!(atom_mean(atom(0, 0, 3), &ctx(&[0.0])), 1.0);
        // AR(1) phi=0.5: gamma(1) = 2/3
        assert_relative_eq!(
            atom_mean(atom(2, 1, 3), &ctx(&[0.5])),
            2.0 / 3.0,
            max_relative = 1e-14
        );
        // AR(2) (0.5,0.2): gamma(2) from the Yule-Walker recursion,
        // rho2 = phi1*rho1 + phi2 => gamma(2) = 0.5125 * 200/117.
        assert_relative_eq!(
            atom_mean(atom(0, 2, 3), &ctx(&[0.5, 0.2])),
            102.5 / 117.0,
            max_relative = 1e-13
        );
    }

    #[test]
    fn lcov_white_noise_examples() {
        let c = ctx(&[0.0]);
        let s = LinearStat::atom(atom(0, 0, 3));
        assert_relative_eq!(
            lcov(&s, &s, &c, MeanMode::KnownZero).unwrap(),
            2.0,
            max_relative = 1e-12
        );
        let s01 = LinearStat::atom(atom(0, 1, 3));
        assert_relative_eq!(
            lcov(&s01, &s01, &c, MeanMode::KnownZero).unwrap(),
            1.0,
            max_relative = 1e-12
        );
    }

    #[test]
    fn lcov_ar1_closed_forms() {
        // AR(1) phi = 1/2: with s = gamma(0) = 4/3,
        //   Σ gamma(h)^2              = s^2 (1+phi^2)/(1-phi^2)      = 80/27
        //   Σ gamma(h-1)gamma(h+1)    = s^2 phi^2 (3-phi^2)/(1-phi^2) = 44/27
        //   Σ gamma(h)gamma(h+1)      = 2 s^2 phi/(1-phi^2)           = 64/27
        let c = ctx(&[0.5]);
        let f = LinearStat::atom(atom(0, 1, 2));
        let d1 = LinearStat::atom(atom(0, 0, 2));
        assert_relative_eq!(
            lcov(&f, &f, &c, MeanMode::KnownZero).unwrap(),
            124.0 / 27.0,
            max_relative = 1e-11
        );
        assert_relative_eq!(
            lcov(&f, &d1, &c, MeanMode::KnownZero).unwrap(),
            128.0 / 27.0,
            max_relative = 1e-11
        );
        assert_relative_eq!(
            lcov(&d1, &d1, &c, MeanMode::KnownZero).unwrap(),
            160.0 / 27.0,
            max_relative = 1e-11
        );
    }

    #[test]
    fn lcov_brute_force_oracle_ar1() {
        // Independent route: direct summation of T_h with the closed-form
        // AR(1) autocovariance, far past the tolerance horizon.
        let phi: f64 = -0.65;
        let s = 1.0 / (1.0 - phi * phi);
        let g = |h: i64| s * phi.powi(h.unsigned_abs() as i32);
        let pairs = [
            (atom(0, 1, 2), atom(0, 0, 2)),
            (atom(0, 2, 3), atom(0, 1, 3)),
            (atom(1, 0, 2), atom(0, 2, 4)),
        ];
        let c = ctx(&[phi]);
        for (a, b) in pairs {
            let (p, q) = (a.lag(), b.lag());
            let mut brute = 0.0;
            for h in -400..=400 {
                brute += g(h) * g(h - p + q) + g(h + q) * g(h - p);
            }
            let got = lcov(
                &LinearStat::atom(a),
                &LinearStat::atom(b),
                &c,
                MeanMode::KnownZero,
            )
            .unwrap();
            assert_relative_eq!(got, brute, max_relative = 1e-10);
        }
    }

    #[test]
    fn lcov_mode_independent() {
        let c = ctx(&[0.5, 0.2]);
        let a = LinearStat::atom(atom(0, 1, 3));
        let b = LinearStat::atom(atom(0, 2, 3));
        assert_eq!(
            lcov(&a, &b, &c, MeanMode::KnownZero).unwrap(),
            lcov(&a, &b, &c, MeanMode::Unknown).unwrap()
        );
    }

    #[test]
    fn lcov_distributes_over_linear_combinations() {
        // Cov(2C, H) with C = S[0,0,3]+S[2,2,3], H = S[0,1,3]+S[2,1,3]
        // must equal twice the sum of the four atom-pair operators.
        let c = ctx(&[0.5, 0.2]);
        let big_c = LinearStat::new([(1.0, atom(0, 0, 3)), (1.0, atom(2, 2, 3))]).scaled(2.0);
        let h = LinearStat::new([(1.0, atom(0, 1, 3)), (1.0, atom(2, 1, 3))]);
        let whole = lcov(&big_c, &h, &c, MeanMode::KnownZero).unwrap();
        let mut parts = 0.0;
        for ca in [atom(0, 0, 3), atom(2, 2, 3)] {
            for hb in [atom(0, 1, 3), atom(2, 1, 3)] {
                parts += lcov_atoms(ca, hb, &c).unwrap();
            }
        }
        assert_relative_eq!(whole, 2.0 * parts, max_relative = 1e-12);
    }

    #[test]
    fn lbias_examples() {
        // i = 1 kills the first term; -Σ gamma(h) = -1 for white noise.
        let c = ctx(&[0.0]);
        let s = LinearStat::atom(atom(0, 0, 1));
        assert_relative_eq!(lbias(&s, &c, MeanMode::Unknown).unwrap(), -1.0);
        assert_eq!(lbias(&s, &c, MeanMode::KnownZero).unwrap(), 0.0);

        // AR(1) phi=0.5, atom {0,1,3}: -2*gamma(1) - Σ gamma = -4/3 - 4.
        let c = ctx(&[0.5]);
        let s = LinearStat::atom(atom(0, 1, 3));
        assert_relative_eq!(
            lbias(&s, &c, MeanMode::Unknown).unwrap(),
            -16.0 / 3.0,
            max_relative = 1e-11
        );
    }

    #[test]
    fn lcov_symmetry() {
        let c = ctx(&[0.4, -0.5]);
        let pairs = [
            (atom(0, 1, 2), atom(0, 0, 2)),
            (atom(0, 2, 3), atom(1, 0, 2)),
            (atom(2, 1, 3), atom(0, 2, 3)),
        ];
        for (a, b) in pairs {
            let (a, b) = (LinearStat::atom(a), LinearStat::atom(b));
            let ab = lcov(&a, &b, &c, MeanMode::KnownZero).unwrap();
            let ba = lcov(&b, &a, &c, MeanMode::KnownZero).unwrap();
            assert!((ab - ba).abs() <= 1e-10 * ab.abs().max(1.0));
        }
    }

    #[test]
    fn lcov_shift_invariance() {
        // {m,k,i} -> {m+c,k+c,i+c} leaves the limit unchanged; use fresh
        // contexts so both sides are computed rather than read from one cache.
        let model = ArModel::ar2(0.5, 0.2, 1.0).unwrap();
        let a = atom(0, 1, 2);
        let b = atom(0, 0, 2);
        let c1 = MomentContext::new(model).unwrap();
        let v1 = lcov(
            &LinearStat::atom(a),
            &LinearStat::atom(b),
            &c1,
            MeanMode::KnownZero,
        )
        .unwrap();
        let c2 = MomentContext::new(model).unwrap();
        let v2 = lcov(
            &LinearStat::atom(a.shifted(3)),
            &LinearStat::atom(b.shifted(3)),
            &c2,
            MeanMode::KnownZero,
        )
        .unwrap();
        assert_eq!(v1, v2);
    }

    #[test]
    fn lcov_bilinearity() {
        let c = ctx(&[0.5, 0.2]);
        let a = LinearStat::atom(atom(0, 1, 3));
        let b = LinearStat::atom(atom(2, 2, 3));
        let target = LinearStat::atom(atom(0, 0, 3));
        let combo = a.scaled(2.5).plus(&b.scaled(-1.25));
        let lhs = lcov(&combo, &target, &c, MeanMode::KnownZero).unwrap();
        let rhs = 2.5 * lcov(&a, &target, &c, MeanMode::KnownZero).unwrap()
            - 1.25 * lcov(&b, &target, &c, MeanMode::KnownZero).unwrap();
        assert!((lhs - rhs).abs() < 1e-12 * lhs.abs().max(1.0));
    }
}
