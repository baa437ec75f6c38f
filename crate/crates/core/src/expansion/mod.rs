//! Expression trees over statistic atoms and the Taylor-expansion engine
//! that turns them into order-`1/n` bias and variance coefficients.
//!
//! An estimator written as a smooth function `f(A_1, ..., A_d)` of statistic
//! atoms is expanded about the mean point `μ_i = E(A_i)`:
//!
//! ```text
//! bias_coefficient     = Σ_i g_i b_i + (1/2) Σ_{ij} H_ij V_ij
//! variance_coefficient = Σ_{ij} g_i g_j V_ij
//! ```
//!
//! with `g`/`H` the exact gradient and Hessian of the tree at the mean point,
//! `b_i = lbias(A_i)` and `V_ij = lcov(A_i, A_j)`. Derivatives are structural
//! (propagated through the tree), not finite differences.

mod parse;

use std::ops;

use crate::error::{Error, Result};
use crate::model::MomentContext;
use crate::statdsl::{atom_mean, lbias_atom, lcov_atoms, MeanMode, StatAtom};

/// Magnitude below which a divisor makes the expansion point singular.
pub const SINGULAR_TOLERANCE: f64 = 1e-12;

/// An estimator expression: constants, statistic-atom leaves and the four
/// arithmetic operations plus non-negative integer powers.
#[derive(Debug, Clone, PartialEq)]
pub enum EstimatorExpr {
    Constant(f64),
    Leaf(StatAtom),
    Add(Box<EstimatorExpr>, Box<EstimatorExpr>),
    Sub(Box<EstimatorExpr>, Box<EstimatorExpr>),
    Mul(Box<EstimatorExpr>, Box<EstimatorExpr>),
    Div(Box<EstimatorExpr>, Box<EstimatorExpr>),
    Pow(Box<EstimatorExpr>, u32),
}

impl EstimatorExpr {
    pub fn constant(c: f64) -> Self {
        Self::Constant(c)
    }

    pub fn leaf(atom: StatAtom) -> Self {
        Self::Leaf(atom)
    }

    /// Leaf for `S[m,k,i]`; fails on invalid indices.
    pub fn atom(m: u32, k: u32, i: u32) -> Result<Self> {
        Ok(Self::Leaf(StatAtom::new(m, k, i)?))
    }

    pub fn pow(self, exponent: u32) -> Self {
        Self::Pow(Box::new(self), exponent)
    }

    /// Parses the documented grammar:
    ///
    /// ```text
    /// expr    := term { ('+'|'-') term }
    /// term    := unary { ('*'|'/') unary }
    /// unary   := '-' unary | power
    /// power   := primary [ '^' uint ]
    /// primary := number | 'S' '[' uint ',' uint ',' uint ']' | '(' expr ')'
    /// ```
    ///
    /// Whitespace-insensitive. Atom indices are validated during parsing.
    pub fn parse(text: &str) -> Result<Self> {
        parse::parse(text)
    }

    /// Distinct atoms in first-occurrence order.
    pub fn atoms(&self) -> Vec<StatAtom> {
        let mut acc = Vec::new();
        self.collect_atoms(&mut acc);
        acc
    }

    /// Reads the expression as a finite linear combination of atoms, e.g.
    /// `2*S[0,0,3] + S[2,2,3]`; fails on products of atoms, divisions by
    /// non-constants, or a nonzero constant offset.
    pub fn to_linear_stat(&self) -> Result<crate::statdsl::LinearStat> {
        let (offset, terms) = self.linear_terms()?;
        if offset != 0.0 {
            return Err(Error::InvalidParameter(format!(
                "expression has constant offset {offset}, not a linear combination of atoms"
            )));
        }
        Ok(crate::statdsl::LinearStat::new(terms))
    }

    fn linear_terms(&self) -> Result<(f64, Vec<(f64, StatAtom)>)> {
        let nonlinear = || Error::InvalidParameter("expression is not linear in its atoms".into());
        match self {
            Self::Constant(c) => Ok((*c, Vec::new())),
            Self::Leaf(a) => Ok((0.0, vec![(1.0, *a)])),
            Self::Add(l, r) => {
                let (cl, mut tl) = l.linear_terms()?;
                let (cr, tr) = r.linear_terms()?;
                tl.extend(tr);
                Ok((cl + cr, tl))
            }
            Self::Sub(l, r) => {
                let (cl, mut tl) = l.linear_terms()?;
                let (cr, tr) = r.linear_terms()?;
                tl.extend(tr.into_iter().map(|(c, a)| (-c, a)));
                Ok((cl - cr, tl))
            }
            Self::Mul(l, r) => {
                let (cl, tl) = l.linear_terms()?;
                let (cr, tr) = r.linear_terms()?;
                match (tl.is_empty(), tr.is_empty()) {
                    (true, _) => Ok((cl * cr, tr.into_iter().map(|(c, a)| (cl * c, a)).collect())),
                    (_, true) => Ok((cl * cr, tl.into_iter().map(|(c, a)| (cr * c, a)).collect())),
                    _ => Err(nonlinear()),
                }
            }
            Self::Div(l, r) => {
                let (cr, tr) = r.linear_terms()?;
                if !tr.is_empty() || cr == 0.0 {
                    return Err(nonlinear());
                }
                let (cl, tl) = l.linear_terms()?;
                Ok((cl / cr, tl.into_iter().map(|(c, a)| (c / cr, a)).collect()))
            }
            Self::Pow(b, k) => match k {
                0 => Ok((1.0, Vec::new())),
                1 => b.linear_terms(),
                _ => {
                    let (cb, tb) = b.linear_terms()?;
                    if tb.is_empty() {
                        Ok((cb.powi(*k as i32), Vec::new()))
                    } else {
                        Err(nonlinear())
                    }
                }
            },
        }
    }

    fn collect_atoms(&self, acc: &mut Vec<StatAtom>) {
        match self {
            Self::Constant(_) => {}
            Self::Leaf(a) => {
                if !acc.contains(a) {
                    acc.push(*a);
                }
            }
            Self::Add(l, r) | Self::Sub(l, r) | Self::Mul(l, r) | Self::Div(l, r) => {
                l.collect_atoms(acc);
                r.collect_atoms(acc);
            }
            Self::Pow(b, _) => b.collect_atoms(acc),
        }
    }

    /// Evaluates with each leaf replaced by `values(atom)`. Divisions by
    /// values of magnitude below [`SINGULAR_TOLERANCE`] are rejected.
    pub fn evaluate_with<F>(&self, values: &F) -> Result<f64>
    where
        F: Fn(StatAtom) -> f64,
    {
        match self {
            Self::Constant(c) => Ok(*c),
            Self::Leaf(a) => Ok(values(*a)),
            Self::Add(l, r) => Ok(l.evaluate_with(values)? + r.evaluate_with(values)?),
            Self::Sub(l, r) => Ok(l.evaluate_with(values)? - r.evaluate_with(values)?),
            Self::Mul(l, r) => Ok(l.evaluate_with(values)? * r.evaluate_with(values)?),
            Self::Div(l, r) => {
                let den = r.evaluate_with(values)?;
                if den.abs() < SINGULAR_TOLERANCE {
                    return Err(Error::SingularExpansionPoint { value: den });
                }
                Ok(l.evaluate_with(values)? / den)
            }
            Self::Pow(b, k) => Ok(b.evaluate_with(values)?.powi(*k as i32)),
        }
    }

    /// The expression evaluated at the mean point (each leaf at `γ(m-k)`).
    pub fn evaluate_at_mean(&self, ctx: &MomentContext) -> Result<f64> {
        self.evaluate_with(&|a| atom_mean(a, ctx))
    }

    /// Exact gradient and Hessian with respect to each distinct atom value,
    /// evaluated at arbitrary leaf values.
    pub fn differentiate_with<F>(&self, values: &F) -> Result<Derivatives>
    where
        F: Fn(StatAtom) -> f64,
    {
        let atoms = self.atoms();
        let dim = atoms.len();
        let jet = self.jet(&atoms, values, dim)?;
        Ok(Derivatives {
            atoms,
            value: jet.value,
            gradient: jet.gradient,
            hessian: unflatten(jet.hessian, dim),
        })
    }

    /// Gradient and Hessian at the mean point.
    pub fn differentiate(&self, ctx: &MomentContext) -> Result<Derivatives> {
        self.differentiate_with(&|a| atom_mean(a, ctx))
    }

    /// Full order-`1/n` expansion at the mean point.
    pub fn expand(&self, ctx: &MomentContext, mode: MeanMode) -> Result<ExpansionResult> {
        let derivs = self.differentiate(ctx)?;
        let dim = derivs.atoms.len();

        let mut cov = vec![0.0; dim * dim];
        for i in 0..dim {
            for j in i..dim {
                let v = lcov_atoms(derivs.atoms[i], derivs.atoms[j], ctx)?;
                cov[i * dim + j] = v;
                cov[j * dim + i] = v;
            }
        }

        let mut bias = 0.0;
        for i in 0..dim {
            bias += derivs.gradient[i] * lbias_atom(derivs.atoms[i], ctx, mode)?;
        }
        for i in 0..dim {
            for j in 0..dim {
                bias += 0.5 * derivs.hessian[i][j] * cov[i * dim + j];
            }
        }

        let mut variance = 0.0;
        for i in 0..dim {
            for j in 0..dim {
                variance += derivs.gradient[i] * derivs.gradient[j] * cov[i * dim + j];
            }
        }
        // Quadratic form in a limit covariance matrix; trim rounding residue.
        let variance = variance.max(0.0);

        Ok(ExpansionResult {
            value_at_mean: derivs.value,
            bias_coefficient: bias,
            variance_coefficient: variance,
            derivatives: derivs,
        })
    }

    /// Second-order forward propagation: value, gradient and flattened
    /// Hessian with respect to the distinct atoms in `atoms` order.
    fn jet<F>(&self, atoms: &[StatAtom], values: &F, dim: usize) -> Result<Jet>
    where
        F: Fn(StatAtom) -> f64,
    {
        match self {
            Self::Constant(c) => Ok(Jet::constant(*c, dim)),
            Self::Leaf(a) => {
                let idx = atoms.iter().position(|x| x == a).expect("atom collected");
                let mut jet = Jet::constant(values(*a), dim);
                jet.gradient[idx] = 1.0;
                Ok(jet)
            }
            Self::Add(l, r) => Ok(l.jet(atoms, values, dim)?.add(&r.jet(atoms, values, dim)?)),
            Self::Sub(l, r) => Ok(l.jet(atoms, values, dim)?.sub(&r.jet(atoms, values, dim)?)),
            Self::Mul(l, r) => Ok(l.jet(atoms, values, dim)?.mul(&r.jet(atoms, values, dim)?)),
            Self::Div(l, r) => l.jet(atoms, values, dim)?.div(&r.jet(atoms, values, dim)?),
            Self::Pow(b, k) => Ok(b.jet(atoms, values, dim)?.powi(*k)),
        }
    }
}

impl ops::Add for EstimatorExpr {
    type Output = EstimatorExpr;
    fn add(self, rhs: EstimatorExpr) -> EstimatorExpr {
        EstimatorExpr::Add(Box::new(self), Box::new(rhs))
    }
}

impl ops::Sub for EstimatorExpr {
    type Output = EstimatorExpr;
    fn sub(self, rhs: EstimatorExpr) -> EstimatorExpr {
        EstimatorExpr::Sub(Box::new(self), Box::new(rhs))
    }
}

impl ops::Mul for EstimatorExpr {
    type Output = EstimatorExpr;
    fn mul(self, rhs: EstimatorExpr) -> EstimatorExpr {
        EstimatorExpr::Mul(Box::new(self), Box::new(rhs))
    }
}

impl ops::Div for EstimatorExpr {
    type Output = EstimatorExpr;
    fn div(self, rhs: EstimatorExpr) -> EstimatorExpr {
        EstimatorExpr::Div(Box::new(self), Box::new(rhs))
    }
}

/// Value, gradient and Hessian of an expression over its distinct atoms.
#[derive(Debug, Clone)]
pub struct Derivatives {
    /// Distinct atoms, in first-occurrence order; gradient/Hessian indices
    /// refer to this list.
    pub atoms: Vec<StatAtom>,
    pub value: f64,
    pub gradient: Vec<f64>,
    pub hessian: Vec<Vec<f64>>,
}

/// Result of [`EstimatorExpr::expand`]: value at the mean point and the
/// coefficients `b`, `v` of `bias ≐ b/n`, `variance ≐ v/n`.
#[derive(Debug, Clone)]
pub struct ExpansionResult {
    pub value_at_mean: f64,
    pub bias_coefficient: f64,
    pub variance_coefficient: f64,
    /// Leaf inventory with the gradient and Hessian entries used.
    pub derivatives: Derivatives,
}

struct Jet {
    value: f64,
    gradient: Vec<f64>,
    hessian: Vec<f64>, // row-major dim x dim
}

impl Jet {
    fn constant(value: f64, dim: usize) -> Self {
        Self {
            value,
            gradient: vec![0.0; dim],
            hessian: vec![0.0; dim * dim],
        }
    }

    fn dim(&self) -> usize {
        self.gradient.len()
    }

    fn add(mut self, rhs: &Jet) -> Jet {
        self.value += rhs.value;
        zip_mut(&mut self.gradient, &rhs.gradient, |a, b| a + b);
        zip_mut(&mut self.hessian, &rhs.hessian, |a, b| a + b);
        self
    }

    fn sub(mut self, rhs: &Jet) -> Jet {
        self.value -= rhs.value;
        zip_mut(&mut self.gradient, &rhs.gradient, |a, b| a - b);
        zip_mut(&mut self.hessian, &rhs.hessian, |a, b| a - b);
        self
    }

    fn mul(self, rhs: &Jet) -> Jet {
        let dim = self.dim();
        let mut out = Jet::constant(self.value * rhs.value, dim);
        for i in 0..dim {
            out.gradient[i] = self.value * rhs.gradient[i] + rhs.value * self.gradient[i];
        }
        for i in 0..dim {
            for j in 0..dim {
                out.hessian[i * dim + j] = self.value * rhs.hessian[i * dim + j]
                    + rhs.value * self.hessian[i * dim + j]
                    + self.gradient[i] * rhs.gradient[j]
                    + rhs.gradient[i] * self.gradient[j];
            }
        }
        out
    }

    fn div(self, rhs: &Jet) -> Result<Jet> {
        if rhs.value.abs() < SINGULAR_TOLERANCE {
            return Err(Error::SingularExpansionPoint { value: rhs.value });
        }
        let dim = self.dim();
        let value = self.value / rhs.value;
        let mut out = Jet::constant(value, dim);
        for i in 0..dim {
            out.gradient[i] = (self.gradient[i] - value * rhs.gradient[i]) / rhs.value;
        }
        for i in 0..dim {
            for j in 0..dim {
                out.hessian[i * dim + j] = (self.hessian[i * dim + j]
                    - value * rhs.hessian[i * dim + j]
                    - out.gradient[i] * rhs.gradient[j]
                    - rhs.gradient[i] * out.gradient[j])
                    / rhs.value;
            }
        }
        Ok(out)
    }

    fn powi(self, k: u32) -> Jet {
        let dim = self.dim();
        if k == 0 {
            return Jet::constant(1.0, dim);
        }
        if k == 1 {
            return self;
        }
        let u = self.value;
        let un1 = u.powi(k as i32 - 1);
        let un2 = u.powi(k as i32 - 2);
        let kf = k as f64;
        let mut out = Jet::constant(u * un1, dim);
        for i in 0..dim {
            out.gradient[i] = kf * un1 * self.gradient[i];
        }
        for i in 0..dim {
            for j in 0..dim {
                out.hessian[i * dim + j] = kf * un1 * self.hessian[i * dim + j]
                    + kf * (kf - 1.0) * un2 * self.gradient[i] * self.gradient[j];
            }
        }
        out
    }
}

fn zip_mut(dst: &mut [f64], src: &[f64], f: impl Fn(f64, f64) -> f64) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d = f(*d, *s);
    }
}

fn unflatten(flat: Vec<f64>, dim: usize) -> Vec<Vec<f64>> {
    let mut rows = Vec::with_capacity(dim);
    for i in 0..dim {
        rows.push(flat[i * dim..(i + 1) * dim].to_vec());
    }
    rows
}
