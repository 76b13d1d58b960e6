//! Solvable generating evolutions for the leading coefficients `y_1..y_N`.
//!
//! A model is a list of independent scalar components (one per coefficient)
//! sharing a frequency `ω`, or a user-supplied linear system. Component
//! models come with exact flows; the linear system does not and is
//! integrated numerically by the solver.

use std::f64::consts::PI;

use num_complex::Complex64;
use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

pub type Rational = Ratio<i64>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error("invalid model parameter: {0}")]
    InvalidParameter(String),
    #[error("expected {expected} coefficients, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("second-order model needs coefficient velocities")]
    MissingVelocities,
    #[error("component {0:?} is not available for a model of order {1}")]
    OrderMismatch(Component, u8),
    #[error("model has no registered closed-form flow")]
    NoClosedForm,
}

/// Differential order of a generating model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Order {
    First,
    Second,
}

impl Order {
    pub fn as_u8(self) -> u8 {
        match self {
            Order::First => 1,
            Order::Second => 2,
        }
    }
}

impl From<Order> for u8 {
    fn from(o: Order) -> u8 {
        o.as_u8()
    }
}

impl TryFrom<u8> for Order {
    type Error = String;
    fn try_from(v: u8) -> Result<Self, String> {
        match v {
            1 => Ok(Order::First),
            2 => Ok(Order::Second),
            other => Err(format!("order must be 1 or 2, got {other}")),
        }
    }
}

mod ratio_str {
    use super::Rational;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&r.to_string())
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Int(i64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Int(v) => Ok(Rational::from_integer(v)),
            Repr::Text(s) => parse(&s).map_err(serde::de::Error::custom),
        }
    }

    pub fn parse(s: &str) -> Result<Rational, String> {
        let s = s.trim();
        let (num, den) = match s.split_once('/') {
            Some((a, b)) => (a.trim(), b.trim()),
            None => (s, "1"),
        };
        let num: i64 = num.parse().map_err(|_| format!("bad rational {s:?}"))?;
        let den: i64 = den.parse().map_err(|_| format!("bad rational {s:?}"))?;
        if den == 0 {
            return Err(format!("zero denominator in {s:?}"));
        }
        Ok(Rational::new(num, den))
    }
}

pub use ratio_str::parse as parse_rational;

/// One scalar coefficient evolution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Component {
    /// `ÿ = 𝐢 r ω ẏ`
    ExpVelocity {
        #[serde(with = "ratio_str")]
        r: Rational,
    },
    /// `ÿ = -r² ω² y`
    Harmonic {
        #[serde(with = "ratio_str")]
        r: Rational,
    },
    /// `ÿ = -a ẏ`, `a > 0`
    Damped { a: f64 },
    /// `ẏ = 𝐢 r ω y`
    Rotation {
        #[serde(with = "ratio_str")]
        r: Rational,
    },
    /// `ẏ = 0` (first order) or `ÿ = 0` (second order)
    Frozen,
}

impl Component {
    fn allowed(&self, order: Order) -> bool {
        match self {
            Component::ExpVelocity { .. }
            | Component::Harmonic { .. }
            | Component::Damped { .. } => order == Order::Second,
            Component::Rotation { .. } => order == Order::First,
            Component::Frozen => true,
        }
    }

    fn rate(&self) -> Option<Rational> {
        match self {
            Component::ExpVelocity { r }
            | Component::Harmonic { r }
            | Component::Rotation { r } => Some(*r),
            _ => None,
        }
    }
}

/// `ẏ = A y` (first order) or `ÿ = A y + B ẏ` (second order).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearSystem {
    pub a: Vec<Vec<Complex64>>,
    #[serde(default)]
    pub b: Option<Vec<Vec<Complex64>>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    ExpVelocity,
    Harmonic,
    Mixed,
    DampedHarmonic,
    CustomLinear,
}

/// Least common period of a model, in time units and as a rational
/// multiple of `2π/|ω|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelPeriod {
    pub value: f64,
    pub multiple: Rational,
    /// Set when a decaying component makes the flow only asymptotically periodic.
    pub asymptotic: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratingModel {
    order: Order,
    omega: f64,
    components: Vec<Component>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    linear: Option<LinearSystem>,
}

impl GeneratingModel {
    pub fn new(order: Order, omega: f64, components: Vec<Component>) -> Result<Self, ModelError> {
        let model = Self {
            order,
            omega,
            components,
            linear: None,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn custom_linear(order: Order, system: LinearSystem) -> Result<Self, ModelError> {
        let dim = system.a.len();
        let model = Self {
            order,
            omega: 1.0,
            components: Vec::new(),
            linear: Some(system),
        };
        if dim == 0 {
            return Err(ModelError::InvalidParameter("empty linear system".into()));
        }
        model.validate()?;
        Ok(model)
    }

    /// `ÿ_m = 𝐢 r_m ω ẏ_m` for every `m`.
    pub fn exp_velocity(omega: f64, rs: &[Rational]) -> Result<Self, ModelError> {
        Self::new(
            Order::Second,
            omega,
            rs.iter().map(|&r| Component::ExpVelocity { r }).collect(),
        )
    }

    /// `ÿ_m = -r_m² ω² y_m` for every `m`.
    pub fn harmonic(omega: f64, rs: &[Rational]) -> Result<Self, ModelError> {
        Self::new(
            Order::Second,
            omega,
            rs.iter().map(|&r| Component::Harmonic { r }).collect(),
        )
    }

    /// `ẏ_m = 𝐢 r_m ω y_m` for every `m`.
    pub fn rotation(omega: f64, rs: &[Rational]) -> Result<Self, ModelError> {
        Self::new(
            Order::First,
            omega,
            rs.iter().map(|&r| Component::Rotation { r }).collect(),
        )
    }

    /// Every coefficient frozen (`ẏ = 0` or `ÿ = 0`).
    pub fn frozen(order: Order, dimension: usize) -> Self {
        Self {
            order,
            omega: 1.0,
            components: vec![Component::Frozen; dimension],
            linear: None,
        }
    }

    /// Checks the parameter domains: `ω ≠ 0`, `r ≠ 0`, `a > 0`, square matrices.
    pub fn validate(&self) -> Result<(), ModelError> {
        if let Some(sys) = &self.linear {
            let n = sys.a.len();
            let square = |m: &Vec<Vec<Complex64>>| m.len() == n && m.iter().all(|r| r.len() == n);
            if !square(&sys.a) || sys.b.as_ref().is_some_and(|b| !square(b)) {
                return Err(ModelError::InvalidParameter(
                    "linear system matrices must be square".into(),
                ));
            }
            if sys.b.is_some() && self.order == Order::First {
                return Err(ModelError::InvalidParameter(
                    "first-order linear system takes no velocity matrix".into(),
                ));
            }
            return Ok(());
        }
        if self.components.is_empty() {
            return Err(ModelError::InvalidParameter(
                "model has no components".into(),
            ));
        }
        let needs_omega = self.components.iter().any(|c| c.rate().is_some());
        if needs_omega && !(self.omega != 0.0 && self.omega.is_finite()) {
            return Err(ModelError::InvalidParameter(format!(
                "omega must be nonzero, got {}",
                self.omega
            )));
        }
        for c in &self.components {
            if !c.allowed(self.order) {
                return Err(ModelError::OrderMismatch(c.clone(), self.order.as_u8()));
            }
            match c {
                Component::Damped { a } if !(*a > 0.0 && a.is_finite()) => {
                    return Err(ModelError::InvalidParameter(format!(
                        "damping a must be positive, got {a}"
                    )));
                }
                _ => {}
            }
            if let Some(r) = c.rate() {
                if r.is_zero() {
                    return Err(ModelError::InvalidParameter(
                        "rates r_m must be nonzero".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    pub fn order(&self) -> Order {
        self.order
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn linear_system(&self) -> Option<&LinearSystem> {
        self.linear.as_ref()
    }

    pub fn dimension(&self) -> usize {
        match &self.linear {
            Some(sys) => sys.a.len(),
            None => self.components.len(),
        }
    }

    pub fn kind(&self) -> ModelKind {
        if self.linear.is_some() {
            return ModelKind::CustomLinear;
        }
        let all = |f: fn(&Component) -> bool| self.components.iter().all(f);
        if all(|c| matches!(c, Component::ExpVelocity { .. })) {
            ModelKind::ExpVelocity
        } else if all(|c| matches!(c, Component::Harmonic { .. })) {
            ModelKind::Harmonic
        } else if all(|c| matches!(c, Component::Harmonic { .. } | Component::Damped { .. })) {
            ModelKind::DampedHarmonic
        } else {
            ModelKind::Mixed
        }
    }

    pub fn has_closed_form(&self) -> bool {
        self.linear.is_none()
    }

    fn check_dims(&self, y: &[Complex64], ydot: Option<&[Complex64]>) -> Result<(), ModelError> {
        let expected = self.dimension();
        if y.len() != expected {
            return Err(ModelError::DimensionMismatch {
                expected,
                got: y.len(),
            });
        }
        match (self.order, ydot) {
            (Order::Second, None) => Err(ModelError::MissingVelocities),
            (Order::Second, Some(v)) if v.len() != expected => Err(ModelError::DimensionMismatch {
                expected,
                got: v.len(),
            }),
            _ => Ok(()),
        }
    }

    /// The evolution law: `ẏ = f(t, y)` for order 1, `ÿ = f(t, y, ẏ)` for order 2.
    /// The built-in components are autonomous; `t` is accepted so that
    /// time-dependent laws fit the same interface.
    pub fn rhs(
        &self,
        _t: f64,
        y: &[Complex64],
        ydot: Option<&[Complex64]>,
    ) -> Result<Vec<Complex64>, ModelError> {
        self.check_dims(y, ydot)?;
        if let Some(sys) = &self.linear {
            let mut out = mat_vec(&sys.a, y);
            if let (Some(b), Some(v)) = (&sys.b, ydot) {
                for (o, bv) in out.iter_mut().zip(mat_vec(b, v)) {
                    *o += bv;
                }
            }
            return Ok(out);
        }
        let w = self.omega;
        let i = Complex64::i();
        Ok(self
            .components
            .iter()
            .enumerate()
            .map(|(m, c)| match c {
                Component::ExpVelocity { r } => i * (ratio_f64(*r) * w) * ydot.unwrap()[m],
                Component::Harmonic { r } => {
                    let k = ratio_f64(*r) * w;
                    -y[m] * (k * k)
                }
                Component::Damped { a } => -ydot.unwrap()[m] * *a,
                Component::Rotation { r } => i * (ratio_f64(*r) * w) * y[m],
                Component::Frozen => Complex64::zero(),
            })
            .collect())
    }

    /// Exact flow from `t0` to `t`. For first-order models the returned
    /// velocity is `f(y(t))`.
    pub fn flow(
        &self,
        t0: f64,
        t: f64,
        y0: &[Complex64],
        ydot0: Option<&[Complex64]>,
    ) -> Result<(Vec<Complex64>, Vec<Complex64>), ModelError> {
        self.check_dims(y0, ydot0)?;
        if self.linear.is_some() {
            return Err(ModelError::NoClosedForm);
        }
        let tau = t - t0;
        let w = self.omega;
        let i = Complex64::i();
        let mut y = Vec::with_capacity(y0.len());
        let mut v = Vec::with_capacity(y0.len());
        for (m, c) in self.components.iter().enumerate() {
            let (ym, vm) = match (c, self.order) {
                (Component::ExpVelocity { r }, _) => {
                    let lambda = i * (ratio_f64(*r) * w);
                    let v0 = ydot0.unwrap()[m];
                    (
                        y0[m] + v0 * tau * phi1(lambda * tau),
                        v0 * (lambda * tau).exp(),
                    )
                }
                (Component::Harmonic { r }, _) => {
                    let k = ratio_f64(*r) * w;
                    let v0 = ydot0.unwrap()[m];
                    let (s, co) = (k * tau).sin_cos();
                    (y0[m] * co + v0 * (s / k), -y0[m] * (k * s) + v0 * co)
                }
                (Component::Damped { a }, _) => {
                    let v0 = ydot0.unwrap()[m];
                    let z = Complex64::new(-a * tau, 0.0);
                    (y0[m] + v0 * tau * phi1(z), v0 * (-a * tau).exp())
                }
                (Component::Rotation { r }, _) => {
                    let lambda = i * (ratio_f64(*r) * w);
                    let ym = y0[m] * (lambda * tau).exp();
                    (ym, lambda * ym)
                }
                (Component::Frozen, Order::First) => (y0[m], Complex64::zero()),
                (Component::Frozen, Order::Second) => {
                    let v0 = ydot0.unwrap()[m];
                    (y0[m] + v0 * tau, v0)
                }
            };
            y.push(ym);
            v.push(vm);
        }
        Ok((y, v))
    }

    /// Least common period of the component flows; `None` when some
    /// component is not periodic (free drift, custom linear systems, or a
    /// model made only of frozen/damped parts).
    pub fn period(&self) -> Option<ModelPeriod> {
        if self.linear.is_some() {
            return None;
        }
        let mut asymptotic = false;
        let mut num_lcm: Option<i64> = None;
        let mut den_gcd: i64 = 0;
        for c in &self.components {
            match c {
                Component::Damped { .. } => asymptotic = true,
                Component::Frozen if self.order == Order::First => {}
                Component::Frozen => return None,
                _ => {
                    // period of this component is (1/|r|) · 2π/|ω| = q/p
                    let r = c.rate()?.abs();
                    let inv = r.recip();
                    let (p, q) = (*inv.numer(), *inv.denom());
                    num_lcm = Some(match num_lcm {
                        Some(l) => l.lcm(&p),
                        None => p,
                    });
                    den_gcd = den_gcd.gcd(&q);
                }
            }
        }
        let multiple = Rational::new(num_lcm?, den_gcd);
        Some(ModelPeriod {
            value: ratio_f64(multiple) * 2.0 * PI / self.omega.abs(),
            multiple,
            asymptotic,
        })
    }
}

fn ratio_f64(r: Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

fn mat_vec(a: &[Vec<Complex64>], v: &[Complex64]) -> Vec<Complex64> {
    a.iter()
        .map(|row| row.iter().zip(v).map(|(x, y)| x * y).sum())
        .collect()
}

/// `(e^z - 1) / z`, with a series near zero.
fn phi1(z: Complex64) -> Complex64 {
    if z.norm() < 1e-6 {
        return Complex64::new(1.0, 0.0) + z / 2.0 + z * z / 6.0;
    }
    // e^z - 1 without cancellation: e^a (cos b - 1) + (e^a - 1) + i e^a sin b
    let (a, b) = (z.re, z.im);
    let ea = a.exp();
    let half = (b / 2.0).sin();
    let em1 = Complex64::new(a.exp_m1() - 2.0 * ea * half * half, ea * b.sin());
    em1 / z
}

/// `f⁽¹⁾` or `f⁽²⁾` at `(t, y, ẏ)`.
pub fn model_rhs(
    model: &GeneratingModel,
    t: f64,
    y: &[Complex64],
    ydot: Option<&[Complex64]>,
) -> Result<Vec<Complex64>, ModelError> {
    model.rhs(t, y, ydot)
}

/// Exact flow `(y(t), ẏ(t))` from data at `t0`.
pub fn model_flow(
    model: &GeneratingModel,
    t0: f64,
    t: f64,
    y0: &[Complex64],
    ydot0: Option<&[Complex64]>,
) -> Result<(Vec<Complex64>, Vec<Complex64>), ModelError> {
    model.flow(t0, t, y0, ydot0)
}

pub fn model_period(model: &GeneratingModel) -> Option<ModelPeriod> {
    model.period()
}
