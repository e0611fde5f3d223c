//! Model parameters, hypothesis classification and the power map that carries
//! a CKLS rate onto a square-root (CIR) diffusion.
//!
//! The CKLS short rate solves
//!
//! ```text
//! dr_t = (a - b r_t) dt + sigma r_t^gamma dB_t
//! ```
//!
//! and for `gamma != 1` the map `f(x) = C^2 / (4 (1 - gamma)^2) x^(2 (1 - gamma))`
//! turns `Y_t = f(r_t)` into a CIR process once the drift has been adjusted by a
//! change of measure (see [`crate::girsanov`]).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which of two competing formulas to use where the printed derivation and a
/// direct re-derivation disagree.
///
/// The same switch is used for several independent knobs (degrees of freedom,
/// auxiliary drift, scale function, image-CIR sign convention); each call site
/// documents what the two choices mean for it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Paper,
    Derived,
}

impl Variant {
    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Paper => "paper",
            Variant::Derived => "derived",
        }
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper" => Ok(Variant::Paper),
            "derived" => Ok(Variant::Derived),
            other => Err(Error::Input(format!("unknown variant `{other}` (expected paper|derived)"))),
        }
    }
}

/// The CKLS quadruple `(a, b, sigma, gamma)` together with the initial rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams")]
pub struct CklsParams {
    a: f64,
    b: f64,
    sigma: f64,
    gamma: f64,
    r0: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawParams {
    a: f64,
    b: f64,
    sigma: f64,
    gamma: f64,
    r0: f64,
}

impl TryFrom<RawParams> for CklsParams {
    type Error = Error;

    fn try_from(r: RawParams) -> Result<Self> {
        CklsParams::new(r.a, r.b, r.sigma, r.gamma, r.r0)
    }
}

impl CklsParams {
    pub fn new(a: f64, b: f64, sigma: f64, gamma: f64, r0: f64) -> Result<Self> {
        let finite = [a, b, sigma, gamma, r0].iter().all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidParams("all parameters must be finite".into()));
        }
        if a <= 0.0 {
            return Err(Error::InvalidParams(format!("a must be > 0, got {a}")));
        }
        if sigma <= 0.0 {
            return Err(Error::InvalidParams(format!("sigma must be > 0, got {sigma}")));
        }
        if gamma < 0.5 {
            return Err(Error::InvalidParams(format!("gamma must be >= 1/2, got {gamma}")));
        }
        if r0 <= 0.0 {
            return Err(Error::InvalidParams(format!("r0 must be > 0, got {r0}")));
        }
        Ok(Self { a, b, sigma, gamma, r0 })
    }

    /// `a = 1, b = 0.2, sigma = 0.5, gamma = 1.5, r0 = 1`.
    pub fn reference_high_gamma() -> Self {
        Self { a: 1.0, b: 0.2, sigma: 0.5, gamma: 1.5, r0: 1.0 }
    }

    /// `a = 1, b = 0.2, sigma = 0.5, gamma = 0.75, r0 = 1`.
    pub fn reference_low_gamma() -> Self {
        Self { a: 1.0, b: 0.2, sigma: 0.5, gamma: 0.75, r0: 1.0 }
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn r0(&self) -> f64 {
        self.r0
    }

    /// Drift `a - b x` of the rate under the original measure.
    #[inline]
    pub fn drift(&self, x: f64) -> f64 {
        self.a - self.b * x
    }

    /// Diffusion coefficient `sigma x^gamma`.
    #[inline]
    pub fn diffusion(&self, x: f64) -> f64 {
        self.sigma * x.powf(self.gamma)
    }

    /// Scale constant that makes the power map a pure power: `2 |1 - gamma|`.
    pub fn default_c(&self) -> f64 {
        2.0 * (1.0 - self.gamma).abs()
    }
}

/// Branch of the change-of-measure hypotheses that a parameter set satisfies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GirsanovBranch {
    /// `gamma > 1`.
    HighGamma,
    /// `1/2 < gamma < 1`, `gamma / sigma >= 1` and `b > 0`.
    LowGamma,
    None,
}

/// Branch of the moment-estimate hypotheses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MomentCase {
    /// `1 < gamma <= 3/2`.
    CaseII,
    /// `1/2 <= gamma < 1` and `(2 gamma + 1) sigma^2 <= 2 a`.
    CaseI,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Regime {
    pub girsanov_valid: bool,
    pub girsanov_branch: GirsanovBranch,
    pub moment_valid: bool,
    pub moment_case: MomentCase,
}

impl Regime {
    /// Human-readable reason why the change of measure is not covered, if it is not.
    pub fn girsanov_violation(&self, p: &CklsParams) -> Option<String> {
        if self.girsanov_valid {
            return None;
        }
        let g = p.gamma();
        let msg = if g == 1.0 {
            "gamma = 1 is excluded".to_string()
        } else if g <= 0.5 {
            "gamma = 1/2 is already a CIR model; the reduction requires 1/2 < gamma < 1 or gamma > 1"
                .to_string()
        } else if g / p.sigma() < 1.0 {
            format!("gamma / sigma >= 1 violated: {g} / {} = {}", p.sigma(), g / p.sigma())
        } else {
            format!("b > 0 violated: b = {}", p.b())
        };
        Some(msg)
    }
}

pub fn classify_regime(p: &CklsParams) -> Regime {
    let (g, s, a, b) = (p.gamma, p.sigma, p.a, p.b);

    let girsanov_branch = if g > 1.0 {
        GirsanovBranch::HighGamma
    } else if g > 0.5 && g < 1.0 && g / s >= 1.0 && b > 0.0 {
        GirsanovBranch::LowGamma
    } else {
        GirsanovBranch::None
    };

    let moment_case = if g > 1.0 && g <= 1.5 {
        MomentCase::CaseII
    } else if (0.5..1.0).contains(&g) && (2.0 * g + 1.0) * s * s <= 2.0 * a {
        MomentCase::CaseI
    } else {
        MomentCase::None
    };

    Regime {
        girsanov_valid: girsanov_branch != GirsanovBranch::None,
        girsanov_branch,
        moment_valid: moment_case != MomentCase::None,
        moment_case,
    }
}

/// The power map `f(x) = C^2 / (4 (1 - gamma)^2) x^(2 (1 - gamma))` with `C' = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Transform {
    c: f64,
    gamma: f64,
}

/// `f`, `f'` and `f''` at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransformValues {
    pub f: f64,
    pub fprime: f64,
    pub fsecond: f64,
}

pub fn make_transform(p: &CklsParams, c: f64) -> Result<Transform> {
    Transform::new(p.gamma(), c)
}

impl Transform {
    pub fn new(gamma: f64, c: f64) -> Result<Self> {
        if gamma == 1.0 {
            return Err(Error::DegenerateTransform);
        }
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::InvalidParams(format!("C must be > 0, got {c}")));
        }
        Ok(Self { c, gamma })
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// True when `f` is increasing (`gamma < 1`).
    pub fn is_increasing(&self) -> bool {
        self.gamma < 1.0
    }

    #[inline]
    fn one_minus_gamma(&self) -> f64 {
        1.0 - self.gamma
    }

    #[inline]
    pub fn f(&self, x: f64) -> f64 {
        let k = self.one_minus_gamma();
        self.c * self.c / (4.0 * k * k) * x.powf(2.0 * k)
    }

    #[inline]
    pub fn fprime(&self, x: f64) -> f64 {
        let k = self.one_minus_gamma();
        self.c * self.c / (2.0 * k) * x.powf(1.0 - 2.0 * self.gamma)
    }

    #[inline]
    pub fn fsecond(&self, x: f64) -> f64 {
        let k = self.one_minus_gamma();
        self.c * self.c * (1.0 - 2.0 * self.gamma) / (2.0 * k) * x.powf(-2.0 * self.gamma)
    }

    pub fn eval(&self, x: f64) -> Result<TransformValues> {
        if !(x > 0.0) {
            return Err(Error::Domain(format!("transform evaluated at x = {x} <= 0")));
        }
        Ok(TransformValues { f: self.f(x), fprime: self.fprime(x), fsecond: self.fsecond(x) })
    }

    /// `f^{-1}(y) = (2 |1 - gamma| sqrt(y) / C)^(1 / (1 - gamma))`.
    pub fn inverse(&self, y: f64) -> Result<f64> {
        if !(y > 0.0) {
            return Err(Error::Domain(format!("inverse transform evaluated at y = {y} <= 0")));
        }
        Ok(self.inverse_unchecked(y))
    }

    #[inline]
    pub(crate) fn inverse_unchecked(&self, y: f64) -> f64 {
        let k = self.one_minus_gamma();
        (2.0 * k.abs() * y.sqrt() / self.c).powf(1.0 / k)
    }
}

/// Coefficients of the image diffusion `dY = (drift_const + drift_lin Y) dt + vol sqrt(Y) dB`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CirParams {
    pub drift_const: f64,
    pub drift_lin: f64,
    pub vol: f64,
    pub y0: f64,
    /// Scale constant of the transform that produced this image.
    pub c: f64,
    /// Sign convention of the linear coefficient.
    ///
    /// `Paper` takes `drift_lin = 2 b (1 - gamma)` as printed; `Derived` takes
    /// `drift_lin = 2 b (gamma - 1)`, which is what Ito's formula gives for
    /// `f'(x) (-b x) = -2 b (1 - gamma) f(x)`.
    pub rule: Variant,
    gamma: f64,
}

impl CirParams {
    /// Mean-reversion coefficient of `sqrt(Y)`, which is an Ornstein-Uhlenbeck
    /// process with rate `drift_lin / 2`.
    pub fn ou_rate(&self) -> f64 {
        0.5 * self.drift_lin
    }

    /// Sign with which the driving Brownian motion enters `sqrt(Y)`.
    ///
    /// Under the `Derived` convention `sqrt(Y) = C / (2|1-gamma|) r^(1-gamma)` is
    /// followed pathwise, so the noise enters with `sign(1 - gamma)`.
    pub fn noise_sign(&self) -> f64 {
        match self.rule {
            Variant::Paper => 1.0,
            Variant::Derived => (1.0 - self.gamma).signum(),
        }
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }
}

pub fn derive_cir(p: &CklsParams, t: &Transform, rule: Variant) -> Result<CirParams> {
    let regime = classify_regime(p);
    if let Some(why) = regime.girsanov_violation(p) {
        return Err(Error::Regime(why));
    }
    let (b, s, g, c) = (p.b(), p.sigma(), p.gamma(), t.c());
    let drift_lin = match rule {
        Variant::Paper => 2.0 * b * (1.0 - g),
        Variant::Derived => 2.0 * b * (g - 1.0),
    };
    Ok(CirParams {
        drift_const: s * s * c * c / 4.0,
        drift_lin,
        vol: s * c,
        y0: t.f(p.r0()),
        c,
        rule,
        gamma: g,
    })
}
