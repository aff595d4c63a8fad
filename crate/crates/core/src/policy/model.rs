//! Market state, spread response functions and the per-spread integrand.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::moments::EmpiricalSummary;

/// Parametric shape for the mean shift `f±(ε)` or the scale `h±(ε)` of order
/// arrivals as a function of the quoted spread.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FunctionSpec {
    /// `c`
    Constant { c: f64 },
    /// `a + b·ε`
    Affine { a: f64, b: f64 },
    /// `a·exp(−k·ε)`
    ExpDecay { a: f64, k: f64 },
}

impl FunctionSpec {
    pub const ZERO: FunctionSpec = FunctionSpec::Constant { c: 0.0 };

    pub fn constant(c: f64) -> Self {
        FunctionSpec::Constant { c }
    }

    pub fn affine(a: f64, b: f64) -> Self {
        FunctionSpec::Affine { a, b }
    }

    pub fn exp_decay(a: f64, k: f64) -> Self {
        FunctionSpec::ExpDecay { a, k }
    }

    #[inline]
    pub fn eval(&self, eps: f64) -> f64 {
        match *self {
            FunctionSpec::Constant { c } => c,
            FunctionSpec::Affine { a, b } => a + b * eps,
            FunctionSpec::ExpDecay { a, k } => a * (-k * eps).exp(),
        }
    }

    fn params(&self) -> Vec<f64> {
        match *self {
            FunctionSpec::Constant { c } => vec![c],
            FunctionSpec::Affine { a, b } => vec![a, b],
            FunctionSpec::ExpDecay { a, k } => vec![a, k],
        }
    }

    /// True when the function is identically zero on any domain.
    pub fn is_zero(&self) -> bool {
        match *self {
            FunctionSpec::Constant { c } => c == 0.0,
            FunctionSpec::Affine { a, b } => a == 0.0 && b == 0.0,
            FunctionSpec::ExpDecay { a, .. } => a == 0.0,
        }
    }
}

impl fmt::Display for FunctionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            FunctionSpec::Constant { c } => write!(f, "constant({c:?})"),
            FunctionSpec::Affine { a, b } => write!(f, "affine({a:?}, {b:?})"),
            FunctionSpec::ExpDecay { a, k } => write!(f, "exp_decay({a:?}, {k:?})"),
        }
    }
}

impl FromStr for FunctionSpec {
    type Err = Error;

    /// Accepts `constant(c)`, `affine(a, b)` and `exp_decay(a, k)`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("unrecognised function spec {s:?}"));
        let s = s.trim();
        let open = s.find('(').ok_or_else(bad)?;
        if !s.ends_with(')') {
            return Err(bad());
        }
        let name = s[..open].trim();
        let args = s[open + 1..s.len() - 1]
            .split(',')
            .map(|a| a.trim().parse::<f64>().map_err(|_| bad()))
            .collect::<Result<Vec<_>>>()?;
        let spec = match (name, args.as_slice()) {
            ("constant", [c]) => FunctionSpec::constant(*c),
            ("affine", [a, b]) => FunctionSpec::affine(*a, *b),
            ("exp_decay", [a, k]) => FunctionSpec::exp_decay(*a, *k),
            _ => return Err(bad()),
        };
        if spec.params().iter().any(|p| !p.is_finite()) {
            return Err(bad());
        }
        Ok(spec)
    }
}

/// Market state and model parameters for one quoting decision.
///
/// `eta` is the inventory penalty and `gamma` the entropy temperature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpreadModel {
    /// Mid-price.
    pub s: f64,
    /// Current inventory.
    pub q: f64,
    pub eta: f64,
    pub gamma: f64,
    pub f_plus: FunctionSpec,
    pub f_minus: FunctionSpec,
    pub h_plus: FunctionSpec,
    pub h_minus: FunctionSpec,
}

/// Points per unit domain used when checking `h ≥ 0` and finiteness.
const VALIDATION_POINTS: usize = 1001;

impl SpreadModel {
    /// Checks parameter ranges and samples `f±`, `h±` on `[0, eps_max]`.
    pub fn validate(&self, eps_max: f64) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return bad(format!("gamma must be positive, got {}", self.gamma));
        }
        if !(self.eta >= 0.0 && self.eta.is_finite()) {
            return bad(format!("eta must be non-negative, got {}", self.eta));
        }
        if !self.s.is_finite() || !self.q.is_finite() {
            return bad("mid-price and inventory must be finite".into());
        }
        for i in 0..VALIDATION_POINTS {
            let eps = eps_max * i as f64 / (VALIDATION_POINTS - 1) as f64;
            let fs = [self.f_plus.eval(eps), self.f_minus.eval(eps)];
            let hs = [self.h_plus.eval(eps), self.h_minus.eval(eps)];
            if fs.iter().chain(&hs).any(|v| !v.is_finite()) {
                return bad(format!("response function not finite at eps = {eps}"));
            }
            if hs.iter().any(|&h| h < 0.0) {
                return bad(format!("scale function negative at eps = {eps}"));
            }
        }
        Ok(())
    }

    /// Both scale functions vanish identically, so no moment enters the
    /// integrand.
    pub fn is_moment_free(&self) -> bool {
        self.h_plus.is_zero() && self.h_minus.is_zero()
    }
}

/// `A = (S + ε⁺)h⁺(ε⁺)`, `B = (S − ε⁻)h⁻(ε⁻)`, `C = Q + f⁺(ε⁺) − f⁻(ε⁻)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coefficients {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

pub fn coefficients(model: &SpreadModel, eps_plus: f64, eps_minus: f64) -> Coefficients {
    Coefficients {
        a: (model.s + eps_plus) * model.h_plus.eval(eps_plus),
        b: (model.s - eps_minus) * model.h_minus.eval(eps_minus),
        c: model.q + model.f_plus.eval(eps_plus) - model.f_minus.eval(eps_minus),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SideMoments {
    pub alpha: f64,
    pub beta: f64,
}

/// First and second moments of the standardized arrivals on both sides.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub plus: SideMoments,
    pub minus: SideMoments,
}

impl Moments {
    pub fn new(alpha_plus: f64, alpha_minus: f64, beta_plus: f64, beta_minus: f64) -> Self {
        Self {
            plus: SideMoments {
                alpha: alpha_plus,
                beta: beta_plus,
            },
            minus: SideMoments {
                alpha: alpha_minus,
                beta: beta_minus,
            },
        }
    }

    pub fn empirical(plus: &EmpiricalSummary, minus: &EmpiricalSummary) -> Self {
        Self::new(plus.alpha_n, minus.alpha_n, plus.beta_n, minus.beta_n)
    }
}

/// Expected single-period reward at fixed spreads,
/// `E[(S+ε⁺)ΔN⁺ − (S−ε⁻)ΔN⁻ − η(Q + ΔN⁺ − ΔN⁻)²]`, written through the
/// moments of independent standardized arrivals.
pub fn expected_reward(model: &SpreadModel, eps_plus: f64, eps_minus: f64, m: &Moments) -> f64 {
    let Coefficients { a, b, c } = coefficients(model, eps_plus, eps_minus);
    let hp = model.h_plus.eval(eps_plus);
    let hm = model.h_minus.eval(eps_minus);
    let eta = model.eta;
    let (ap, am) = (m.plus.alpha, m.minus.alpha);
    let moment_part = (a - 2.0 * eta * c * hp) * ap
        - (b - 2.0 * eta * c * hm) * am
        - eta * (hp * hp * m.plus.beta - 2.0 * hp * hm * ap * am + hm * hm * m.minus.beta);
    let l_part = (model.s + eps_plus) * model.f_plus.eval(eps_plus)
        - (model.s - eps_minus) * model.f_minus.eval(eps_minus)
        - eta * c * c;
    moment_part + l_part
}

/// Log of the unnormalized Gibbs weight `M(ε⁺, ε⁻)`: the expected reward over
/// the temperature.
pub fn log_m(model: &SpreadModel, eps_plus: f64, eps_minus: f64, m: &Moments) -> Result<f64> {
    let v = expected_reward(model, eps_plus, eps_minus, m) / model.gamma;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::IntegrandOverflow {
            eps_plus,
            eps_minus,
        })
    }
}
