use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use super::shape::{Curve, Domain, PulseShape};
use crate::dynamics::{DriveSample, Span};
use crate::error::{Error, Result};

/// Default one-sided tail-area bound for infinite envelopes.
pub const DEFAULT_TAIL_EPS: f64 = 1e-8;
/// Default endpoint guard for pole-bearing detunings on finite envelopes.
pub const DEFAULT_GUARD: f64 = 1e-3 * FRAC_PI_2;

/// Isoprobability class, identified by its Stückelberg generator.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ModelClass {
    /// Linear generator `Θ ∝ σ` (finite Landau-Zener family).
    Lmsz,
    /// Tangent generator `Θ ∝ tan(σ / Ω₀τ)` (Allen-Eberly-Hioe family).
    Aeh,
}

impl ModelClass {
    /// Normalized generator θ(s), with `Θ(σ) = (Δ₀/Ω₀) θ(σ / Ω₀τ)`.
    pub fn theta(self, s: f64) -> f64 {
        match self {
            ModelClass::Lmsz => s,
            ModelClass::Aeh => s.tan(),
        }
    }

    /// `∫_0^s θ`, which is `φ / (Δ₀τ)` as a function of `s`.
    pub fn phase_of_s(self, s: f64) -> f64 {
        match self {
            ModelClass::Lmsz => 0.5 * s * s,
            ModelClass::Aeh => -s.cos().ln(),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ModelClass::Lmsz => "lmsz",
            ModelClass::Aeh => "aeh",
        }
    }
}

impl fmt::Display for ModelClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelClass {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "lmsz" | "lz" => Ok(ModelClass::Lmsz),
            "aeh" | "ae" => Ok(ModelClass::Aeh),
            other => Err(Error::Contract(format!(
                "unknown class '{other}' (expected lmsz or aeh)"
            ))),
        }
    }
}

/// Stückelberg variable and phase of a class at given physical amplitudes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StueckelbergClass {
    pub class: ModelClass,
    pub omega0: f64,
    pub delta0: f64,
    pub tau: f64,
}

impl StueckelbergClass {
    /// Θ(σ) = Δ/Ω expressed in the Delos-Thorson variable σ.
    pub fn theta(&self, sigma: f64) -> f64 {
        self.delta0 / self.omega0 * self.class.theta(sigma / (self.omega0 * self.tau))
    }

    /// φ(σ) = ∫_0^σ Θ.
    pub fn phase(&self, sigma: f64) -> f64 {
        self.delta0 * self.tau * self.class.phase_of_s(sigma / (self.omega0 * self.tau))
    }
}

/// How an envelope's support is cut down to a finite integration window.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TruncationPolicy {
    /// Whole domain; infinite envelopes fall back to the default tail bound.
    Full,
    /// Cut infinite envelopes where the area left in each tail drops to `eps`.
    TailArea { eps: f64 },
    /// Fixed window `|x| ≤ half_width` (that is `T / 2τ`).
    Window { half_width: f64 },
    /// Pull finite endpoints in by `delta`; tangent-class models then close
    /// the removed end segments analytically.
    EndpointGuard { delta: f64 },
}

impl TruncationPolicy {
    /// The fixed windows used in the hardware runs, `T/τ` = 88.9/28.3, 88.9/22.2,
    /// 177.8/56.6 and 177.8/17.8.
    pub fn experimental_window(class: ModelClass, row: u8) -> Option<TruncationPolicy> {
        let (t, tau) = match (class, row) {
            (ModelClass::Lmsz, 1 | 4) => (88.9, 28.3),
            (ModelClass::Lmsz, 8) => (88.9, 22.2),
            (ModelClass::Aeh, 1 | 4) => (177.8, 56.6),
            (ModelClass::Aeh, 8) => (177.8, 17.8),
            _ => return None,
        };
        Some(TruncationPolicy::Window {
            half_width: t / tau / 2.0,
        })
    }

    pub fn default_for(class: ModelClass, domain: Domain) -> TruncationPolicy {
        match (class, domain) {
            (ModelClass::Aeh, Domain::Finite { .. }) => TruncationPolicy::EndpointGuard {
                delta: DEFAULT_GUARD,
            },
            (ModelClass::Lmsz, Domain::Finite { .. }) => TruncationPolicy::Full,
            (_, Domain::Infinite) => TruncationPolicy::TailArea {
                eps: DEFAULT_TAIL_EPS,
            },
        }
    }
}

impl fmt::Display for TruncationPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TruncationPolicy::Full => write!(f, "full"),
            TruncationPolicy::TailArea { eps } => write!(f, "tail:{eps:e}"),
            TruncationPolicy::Window { half_width } => write!(f, "window:{half_width}"),
            TruncationPolicy::EndpointGuard { delta } => write!(f, "guard:{delta:e}"),
        }
    }
}

impl FromStr for TruncationPolicy {
    type Err = Error;

    /// Parses `full`, `tail:EPS`, `window:HALF_WIDTH` or `guard:DELTA`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        let (kind, arg) = s
            .split_once(':')
            .map_or((s.as_str(), None), |(k, a)| (k, Some(a)));
        let value = |name: &str| -> Result<f64> {
            let a = arg.ok_or_else(|| {
                Error::Contract(format!(
                    "truncation '{name}' needs a value, e.g. {name}:1e-8"
                ))
            })?;
            match a.parse::<f64>() {
                Ok(v) if v > 0.0 && v.is_finite() => Ok(v),
                _ => Err(Error::Contract(format!(
                    "truncation '{name}' needs a positive number, got '{a}'"
                ))),
            }
        };
        match kind {
            "full" if arg.is_none() => Ok(TruncationPolicy::Full),
            "tail" => Ok(TruncationPolicy::TailArea {
                eps: value("tail")?,
            }),
            "window" => Ok(TruncationPolicy::Window {
                half_width: value("window")?,
            }),
            "guard" => Ok(TruncationPolicy::EndpointGuard {
                delta: value("guard")?,
            }),
            _ => Err(Error::Contract(format!(
                "unknown truncation '{s}' (expected full, tail:EPS, window:W or guard:D)"
            ))),
        }
    }
}

/// Provenance of the detuning shape `g` and phase of a model.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DetuningSource {
    /// Closed forms listed with the catalog row (and verified against the composition).
    Tabulated,
    /// `g = f θ(s)`, phase `= ∫θ ds` evaluated at `s(x)`.
    Composed,
    /// Envelope reconstructed numerically from a chosen detuning.
    Numeric,
}

/// A class member without amplitudes: envelope, detuning shape and phase
/// shape on a (possibly truncated) window of dimensionless time.
#[derive(Clone)]
pub struct Model {
    pub(crate) class: ModelClass,
    pub(crate) row: Option<u8>,
    pub(crate) shape: PulseShape,
    pub(crate) g: Curve,
    pub(crate) phase: Curve,
    pub(crate) source: DetuningSource,
    pub(crate) policy: TruncationPolicy,
    pub(crate) span: Span,
    pub(crate) tail_deficit: f64,
    pub(crate) closure: bool,
    pub(crate) pole_at_edge: bool,
}

impl fmt::Debug for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Model")
            .field("class", &self.class)
            .field("row", &self.row)
            .field("shape", &self.shape.name())
            .field("source", &self.source)
            .field("policy", &self.policy)
            .field("span", &self.span)
            .field("tail_deficit", &self.tail_deficit)
            .finish()
    }
}

impl Model {
    /// Pairs an area-π envelope with the detuning of `class`:
    /// `g = f θ(s)`, phase `= ∫θ ds`.
    ///
    /// For the tangent class on a finite domain, `tan s` and `−ln cos s` are
    /// evaluated through [`PulseShape::edge_gap`] so they stay accurate up to
    /// the pole.
    pub fn compose(
        class: ModelClass,
        shape: PulseShape,
        policy: TruncationPolicy,
    ) -> Result<Model> {
        let (f, s) = (shape.envelope(), shape.integral());
        let (g, phase): (Curve, Curve) = if class == ModelClass::Aeh && shape.domain().is_finite() {
            let edge = shape.clone();
            let g = {
                let edge = edge.clone();
                Arc::new(move |x: f64| f(x) * x.signum() / edge.edge_gap(x).tan())
            };
            (g, Arc::new(move |x| -edge.edge_gap(x).sin().ln()))
        } else {
            let g = {
                let s = s.clone();
                Arc::new(move |x| f(x) * class.theta(s(x)))
            };
            (g, Arc::new(move |x| class.phase_of_s(s(x))))
        };
        Model::assemble(class, shape, g, phase, DetuningSource::Composed, policy)
    }

    pub(crate) fn assemble(
        class: ModelClass,
        shape: PulseShape,
        g: Curve,
        phase: Curve,
        source: DetuningSource,
        policy: TruncationPolicy,
    ) -> Result<Model> {
        let mut model = Model {
            class,
            row: shape.row(),
            shape,
            g,
            phase,
            source,
            policy,
            span: Span::new(0.0, 0.0),
            tail_deficit: 0.0,
            closure: false,
            pole_at_edge: false,
        };
        model.apply_policy(policy)?;
        Ok(model)
    }

    fn apply_policy(&mut self, policy: TruncationPolicy) -> Result<()> {
        let domain = self.shape.domain();
        let tangent = self.class == ModelClass::Aeh;
        let (half, closure, pole) = match (policy, domain) {
            (
                TruncationPolicy::Full | TruncationPolicy::TailArea { .. },
                Domain::Finite { half_width },
            ) => (half_width, false, tangent),
            (TruncationPolicy::Full | TruncationPolicy::EndpointGuard { .. }, Domain::Infinite) => {
                (tail_extent(&self.shape, DEFAULT_TAIL_EPS)?, false, false)
            }
            (TruncationPolicy::TailArea { eps }, Domain::Infinite) => {
                if !(eps > 0.0 && eps < 0.5) {
                    return Err(Error::Contract(format!(
                        "tail bound must lie in (0, 0.5), got {eps}"
                    )));
                }
                (tail_extent(&self.shape, eps)?, false, false)
            }
            (TruncationPolicy::Window { half_width }, _) => {
                if !(half_width > 0.0 && half_width.is_finite()) {
                    return Err(Error::Contract(format!(
                        "window half-width must be positive, got {half_width}"
                    )));
                }
                match domain {
                    Domain::Finite { half_width: h } if half_width >= h => (h, false, tangent),
                    _ => (half_width, false, false),
                }
            }
            (TruncationPolicy::EndpointGuard { delta }, Domain::Finite { half_width }) => {
                if !(delta > 0.0 && delta < half_width) {
                    return Err(Error::Contract(format!(
                        "endpoint guard must lie in (0, {half_width}), got {delta}"
                    )));
                }
                (half_width - delta, tangent, false)
            }
        };
        self.policy = policy;
        self.span = Span::new(-half, half);
        self.closure = closure;
        self.pole_at_edge = pole;
        let full = 2.0 * self.shape.s_end();
        self.tail_deficit = full - (self.shape.s(half) - self.shape.s(-half));
        Ok(())
    }

    /// Same member on a different window.
    pub fn truncated(&self, policy: TruncationPolicy) -> Result<Model> {
        let mut m = self.clone();
        m.apply_policy(policy)?;
        Ok(m)
    }

    /// Binds physical amplitudes (rad per unit time) and time scale.
    pub fn with_amplitudes(&self, omega0: f64, delta0: f64, tau: f64) -> ModelPair {
        ModelPair {
            model: Arc::new(self.clone()),
            omega0,
            delta0,
            tau,
        }
    }

    /// Binds class parameters `α = Ω₀τ/2`, `β = Δ₀τ/2` with `τ = 1`.
    pub fn at(&self, alpha: f64, beta: f64) -> ModelPair {
        self.with_amplitudes(2.0 * alpha, 2.0 * beta, 1.0)
    }

    pub fn class(&self) -> ModelClass {
        self.class
    }

    pub fn row(&self) -> Option<u8> {
        self.row
    }

    pub fn shape(&self) -> &PulseShape {
        &self.shape
    }

    pub fn source(&self) -> DetuningSource {
        self.source
    }

    pub fn policy(&self) -> TruncationPolicy {
        self.policy
    }

    /// Integration window in dimensionless time.
    pub fn span(&self) -> Span {
        self.span
    }

    /// Envelope area lost to truncation (both sides together).
    pub fn tail_deficit(&self) -> f64 {
        self.tail_deficit
    }

    /// True when the removed end segments are closed analytically.
    pub fn has_endpoint_closure(&self) -> bool {
        self.closure
    }

    /// True when the window reaches a pole of the detuning.
    pub fn has_pole_at_edge(&self) -> bool {
        self.pole_at_edge
    }

    pub fn f(&self, x: f64) -> f64 {
        self.shape.f(x)
    }

    pub fn s(&self, x: f64) -> f64 {
        self.shape.s(x)
    }

    /// Detuning shape `g(x) = Δ(t)/Δ₀`.
    pub fn g(&self, x: f64) -> f64 {
        (self.g)(x)
    }

    /// Phase shape `φ(t)/(Δ₀τ)`.
    pub fn phase(&self, x: f64) -> f64 {
        (self.phase)(x)
    }

    /// Largest deviation from the pairing identity `g = f θ(s)` and from
    /// `d(phase)/dx = g` over the envelope's probe points inside the window.
    pub fn pairing_defect(&self) -> f64 {
        let h = 1e-5;
        self.shape
            .probe_points()
            .into_iter()
            .filter(|x| x.abs() + h < self.span.hi)
            .map(|x| {
                let pairing = (self.g(x) - self.f(x) * self.class.theta(self.s(x))).abs();
                let dphase = (self.phase(x + h) - self.phase(x - h)) / (2.0 * h);
                let scale = self.g(x).abs().max(1.0);
                pairing.max((dphase - self.g(x)).abs() / scale)
            })
            .fold(0.0, f64::max)
    }
}

/// Finds `x` with `s_end − s(x) ≤ eps` by bracketing and bisection.
pub(crate) fn tail_extent(shape: &PulseShape, eps: f64) -> Result<f64> {
    let end = shape.s_end();
    let missing = |x: f64| end - shape.s(x);
    let mut hi = 1.0;
    while missing(hi) > eps {
        hi *= 2.0;
        if hi > 1e12 {
            return Err(Error::Contract(format!(
                "tail of '{}' does not reach area bound {eps:e}",
                shape.name()
            )));
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if missing(mid) > eps {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-13 * hi {
            break;
        }
    }
    Ok(hi)
}

/// A class member with amplitudes bound: the triple {Ω(t), Δ(t), φ(t)}.
#[derive(Clone, Debug)]
pub struct ModelPair {
    pub model: Arc<Model>,
    pub omega0: f64,
    pub delta0: f64,
    pub tau: f64,
}

impl ModelPair {
    pub fn alpha(&self) -> f64 {
        0.5 * self.omega0 * self.tau
    }

    pub fn beta(&self) -> f64 {
        0.5 * self.delta0 * self.tau
    }

    pub fn class(&self) -> ModelClass {
        self.model.class
    }

    pub fn stueckelberg(&self) -> StueckelbergClass {
        StueckelbergClass {
            class: self.model.class,
            omega0: self.omega0,
            delta0: self.delta0,
            tau: self.tau,
        }
    }

    /// Delos-Thorson variable `σ(t) = Ω₀τ s(t/τ)`.
    pub fn sigma(&self, t: f64) -> f64 {
        self.omega0 * self.tau * self.model.s(t / self.tau)
    }

    /// Drive at physical time `t`.
    pub fn drive(&self, t: f64) -> DriveSample {
        let x = t / self.tau;
        DriveSample {
            omega: self.omega0 * self.model.f(x),
            delta: self.delta0 * self.model.g(x),
            phi: self.delta0 * self.tau * self.model.phase(x),
        }
    }

    /// Pulse area `∫Ω dt` over the whole (untruncated) domain.
    pub fn pulse_area(&self) -> f64 {
        self.omega0 * self.tau * 2.0 * self.model.shape.s_end()
    }

    pub fn with_class_parameters(&self, alpha: f64, beta: f64) -> ModelPair {
        ModelPair {
            model: self.model.clone(),
            omega0: 2.0 * alpha / self.tau,
            delta0: 2.0 * beta / self.tau,
            tau: self.tau,
        }
    }
}
