use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use super::quadrature::{self, RunningIntegral};
use crate::error::{Error, Result};

/// Below this remaining area, [`PulseShape::edge_gap`] integrates the tail directly.
const EDGE_GAP_DIRECT: f64 = 1e-3;

/// A real function of dimensionless time `x = t / τ`.
pub type Curve = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Support of a pulse envelope.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Domain {
    /// `[-half_width, half_width]`
    Finite { half_width: f64 },
    /// The whole real line.
    Infinite,
}

impl Domain {
    pub fn is_finite(&self) -> bool {
        matches!(self, Domain::Finite { .. })
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Domain::Finite { .. } => "finite",
            Domain::Infinite => "infinite",
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        match *self {
            Domain::Finite { half_width } => x.abs() <= half_width,
            Domain::Infinite => x.is_finite(),
        }
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Domain::Finite { half_width } => write!(f, "[-{half_width:.6}, {half_width:.6}]"),
            Domain::Infinite => write!(f, "(-inf, inf)"),
        }
    }
}

/// Where a shape's running integral `s(x)` comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IntegralSource {
    ClosedForm,
    Quadrature,
    /// Produced by integrating an ODE (detuning-first construction).
    Numeric,
}

/// A symmetric Rabi-frequency envelope `f(x)` together with its running
/// integral `s(x) = ∫_0^x f`.
#[derive(Clone)]
pub struct PulseShape {
    pub(crate) name: String,
    pub(crate) formula: String,
    pub(crate) row: Option<u8>,
    pub(crate) f: Curve,
    pub(crate) s: Curve,
    pub(crate) source: IntegralSource,
    pub(crate) domain: Domain,
    /// Known value of `s` at the right edge, when it need not be computed.
    pub(crate) s_limit: Option<f64>,
}

impl fmt::Debug for PulseShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PulseShape")
            .field("name", &self.name)
            .field("row", &self.row)
            .field("source", &self.source)
            .field("domain", &self.domain)
            .finish()
    }
}

impl PulseShape {
    /// Shape with a closed-form running integral.
    pub fn closed(name: impl Into<String>, f: Curve, s: Curve, domain: Domain) -> Self {
        let name = name.into();
        PulseShape {
            formula: name.clone(),
            name,
            row: None,
            f,
            s,
            source: IntegralSource::ClosedForm,
            domain,
            s_limit: None,
        }
    }

    /// Shape whose running integral is obtained by quadrature of `f`.
    pub fn from_envelope(name: impl Into<String>, f: Curve, domain: Domain) -> Self {
        let reach = match domain {
            Domain::Finite { half_width } => half_width,
            Domain::Infinite => {
                let g = f.clone();
                quadrature::tail_reach(|x| g(x), 8.0, 1e-14, 1e4)
            }
        };
        let table = RunningIntegral::new(f.clone(), reach);
        let name = name.into();
        PulseShape {
            formula: name.clone(),
            name,
            row: None,
            f,
            s: Arc::new(move |x| table.eval(x)),
            source: IntegralSource::Quadrature,
            domain,
            s_limit: None,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn formula(&self) -> &str {
        &self.formula
    }

    pub fn row(&self) -> Option<u8> {
        self.row
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn source(&self) -> IntegralSource {
        self.source
    }

    pub fn f(&self, x: f64) -> f64 {
        (self.f)(x)
    }

    pub fn s(&self, x: f64) -> f64 {
        (self.s)(x)
    }

    pub fn envelope(&self) -> Curve {
        self.f.clone()
    }

    pub fn integral(&self) -> Curve {
        self.s.clone()
    }

    /// `s_end − s(|x|)`, the envelope area still ahead of `|x|`. On a finite
    /// domain a small remainder is integrated directly, because the difference
    /// of two `s` values near the edge keeps no significant digits.
    pub fn edge_gap(&self, x: f64) -> f64 {
        let u = x.abs();
        let gap = self.s_end() - self.s(u);
        match self.domain {
            Domain::Finite { half_width } if gap < EDGE_GAP_DIRECT && u < half_width => {
                let f = &self.f;
                quadrature::gk15(&|t| f(t), u, half_width).0
            }
            Domain::Finite { .. } => gap.max(0.0),
            Domain::Infinite => gap,
        }
    }

    /// `∫_domain f`, by adaptive quadrature (independent of `s`).
    pub fn area(&self) -> f64 {
        let f = &self.f;
        match self.domain {
            Domain::Finite { half_width } => {
                quadrature::integrate(|x| f(x), -half_width, half_width, 1e-13)
            }
            Domain::Infinite => {
                quadrature::integrate_to_infinity(|x| f(x), 0.0, 1e-13)
                    + quadrature::integrate_to_infinity(|x| f(-x), 0.0, 1e-13)
            }
        }
    }

    /// Limit of `s` at the right end of the domain.
    pub fn s_end(&self) -> f64 {
        if let Some(v) = self.s_limit {
            return v;
        }
        match self.domain {
            Domain::Finite { half_width } => self.s(half_width),
            Domain::Infinite => {
                let f = &self.f;
                quadrature::integrate_to_infinity(|x| f(x), 0.0, 1e-14)
            }
        }
    }

    /// Rescales `f` (and `s`) so the area becomes exactly π.
    pub fn renormalized(&self) -> Result<PulseShape> {
        let area = self.area();
        if !(area.is_finite() && area > 0.0) {
            return Err(Error::Contract(format!(
                "shape '{}' has non-positive area {area}",
                self.name
            )));
        }
        let k = PI / area;
        let (f, s) = (self.f.clone(), self.s.clone());
        Ok(PulseShape {
            name: format!("{} (renormalized x{k:.9})", self.name),
            formula: format!("{k} * ({})", self.formula),
            row: None,
            f: Arc::new(move |x| k * f(x)),
            s: Arc::new(move |x| k * s(x)),
            source: self.source,
            domain: self.domain,
            s_limit: self.s_limit.map(|v| k * v),
        })
    }

    /// Fails unless the area is within `tol` of π.
    pub fn check_area(&self, tol: f64) -> Result<f64> {
        let area = self.area();
        if (area - PI).abs() > tol {
            return Err(Error::Contract(format!(
                "shape '{}' has area {area:.9}, expected π within {tol:e}; renormalize first",
                self.name
            )));
        }
        Ok(area)
    }

    /// 64 interior probe points, symmetric about 0 and avoiding it.
    pub fn probe_points(&self) -> Vec<f64> {
        let reach = match self.domain {
            Domain::Finite { half_width } => half_width * (1.0 - 1e-3),
            Domain::Infinite => 6.0,
        };
        (0..64)
            .map(|k| -reach + (k as f64 + 0.5) * 2.0 * reach / 64.0)
            .collect()
    }

    /// Largest `|central difference of s − f|` over the probe points.
    pub fn derivative_defect(&self) -> f64 {
        let h = 1e-4;
        self.probe_points()
            .into_iter()
            .map(|x| ((self.s(x + h) - self.s(x - h)) / (2.0 * h) - self.f(x)).abs())
            .fold(0.0, f64::max)
    }

    /// Largest violation of `f(-x) = f(x)` and `s(-x) = -s(x)` at the probe points.
    pub fn symmetry_defect(&self) -> f64 {
        self.probe_points()
            .into_iter()
            .map(|x| {
                (self.f(-x) - self.f(x))
                    .abs()
                    .max((self.s(-x) + self.s(x)).abs())
            })
            .fold(0.0, f64::max)
    }
}
