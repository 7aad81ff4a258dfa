//! Two-level Schrödinger propagation in dimensionless time `x = t/τ`.
//!
//! Detuning picture: `i dc/dx = [[-β g, α f], [α f, β g]] c`.
//! Phase picture:    `i db/dx = [[0, α f e^{-iφ}], [α f e^{iφ}, 0]] b`, `φ = 2β·phase(x)`.
//! The two are related by `c = U b` with `U = diag(e^{iφ/2}, e^{-iφ/2})`, so the
//! populations agree and the amplitudes differ by those diagonal phases.

pub mod integrator;
mod matrix;

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use num_complex::Complex64 as C64;

pub use integrator::{IntegratorConfig, StepMode};
pub use matrix::Mat2;

use crate::catalog::{ModelClass, ModelPair, TruncationPolicy};
use crate::error::{Error, Result};

/// Interval of dimensionless time.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Span {
    pub lo: f64,
    pub hi: f64,
}

impl Span {
    pub fn new(lo: f64, hi: f64) -> Self {
        Span { lo, hi }
    }

    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn is_empty(&self) -> bool {
        self.hi <= self.lo
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Picture {
    Detuning,
    Phase,
}

impl Picture {
    pub fn as_str(self) -> &'static str {
        match self {
            Picture::Detuning => "detuning",
            Picture::Phase => "phase",
        }
    }
}

impl fmt::Display for Picture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Picture {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "detuning" => Ok(Picture::Detuning),
            "phase" => Ok(Picture::Phase),
            other => Err(Error::Contract(format!(
                "unknown picture '{other}' (expected detuning or phase)"
            ))),
        }
    }
}

/// Drive at one instant: Rabi frequency, detuning and accumulated phase `∫_0^t Δ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DriveSample {
    pub omega: f64,
    pub delta: f64,
    pub phi: f64,
}

/// Ground and excited amplitudes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QubitState {
    pub c1: C64,
    pub c2: C64,
}

impl QubitState {
    pub fn ground() -> Self {
        QubitState {
            c1: C64::new(1.0, 0.0),
            c2: C64::new(0.0, 0.0),
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.c1.norm_sqr() + self.c2.norm_sqr()
    }

    pub fn excited_population(&self) -> f64 {
        self.c2.norm_sqr()
    }
}

/// Time-ordered evolution operator over a span.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Propagator {
    pub u: Mat2,
}

impl Propagator {
    pub fn identity() -> Self {
        Propagator {
            u: Mat2::identity(),
        }
    }

    pub fn apply(&self, state: QubitState) -> QubitState {
        let [c1, c2] = self.u.apply([state.c1, state.c2]);
        QubitState { c1, c2 }
    }

    /// Evolution by `self`, then by `later`.
    pub fn then(&self, later: &Propagator) -> Propagator {
        Propagator {
            u: later.u * self.u,
        }
    }

    /// `|c2|²` after starting in the ground state.
    pub fn transition_probability(&self) -> f64 {
        self.u.0[1][0].norm_sqr()
    }

    pub fn unitarity_defect(&self) -> f64 {
        self.u.unitarity_defect()
    }
}

/// Diagonal frame change `U(x) = diag(e^{iφ/2}, e^{-iφ/2})` mapping phase-picture
/// amplitudes onto detuning-picture amplitudes.
pub fn phase_transformation(pair: &ModelPair, x: f64) -> Mat2 {
    let phi = phi_at(pair, x);
    Mat2::diag(
        C64::from_polar(1.0, 0.5 * phi),
        C64::from_polar(1.0, -0.5 * phi),
    )
}

fn phi_at(pair: &ModelPair, x: f64) -> f64 {
    let beta = pair.beta();
    if beta == 0.0 {
        0.0
    } else {
        2.0 * beta * pair.model.phase(x)
    }
}

fn check_span(pair: &ModelPair, span: Span) -> Result<()> {
    if !(span.lo.is_finite() && span.hi.is_finite()) || span.hi < span.lo {
        return Err(Error::Contract(format!(
            "invalid span [{}, {}]",
            span.lo, span.hi
        )));
    }
    let model = &pair.model;
    if !model.shape().domain().contains(span.lo) || !model.shape().domain().contains(span.hi) {
        return Err(Error::Domain {
            x: if model.shape().domain().contains(span.lo) {
                span.hi
            } else {
                span.lo
            },
            reason: "span leaves the envelope's domain".into(),
        });
    }
    if model.has_pole_at_edge() {
        let edge = model.span().hi;
        if span.hi >= edge || span.lo <= -edge {
            let x = if span.hi >= edge { edge } else { -edge };
            return Err(Error::Domain {
                x,
                reason: "detuning and phase diverge at the domain edge; apply an endpoint guard"
                    .into(),
            });
        }
    }
    Ok(())
}

fn coupling(pair: &ModelPair, x: f64) -> Result<(f64, f64)> {
    let (alpha, beta) = (pair.alpha(), pair.beta());
    let f = pair.model.f(x);
    let g = if beta == 0.0 { 0.0 } else { pair.model.g(x) };
    if !f.is_finite() || !g.is_finite() {
        return Err(Error::Domain {
            x,
            reason: format!("drive is not finite (f = {f}, g = {g})"),
        });
    }
    Ok((alpha * f, beta * g))
}

fn hamiltonian(pair: &ModelPair, picture: Picture, x: f64) -> Result<Mat2> {
    let (a, b) = coupling(pair, x)?;
    let zero = C64::new(0.0, 0.0);
    Ok(match picture {
        Picture::Detuning => Mat2([
            [C64::new(-b, 0.0), C64::new(a, 0.0)],
            [C64::new(a, 0.0), C64::new(b, 0.0)],
        ]),
        Picture::Phase => {
            let phi = phi_at(pair, x);
            if !phi.is_finite() {
                return Err(Error::Domain {
                    x,
                    reason: format!("phase is not finite (φ = {phi})"),
                });
            }
            let e = C64::from_polar(a, phi);
            Mat2([[zero, e.conj()], [e, zero]])
        }
    })
}

const MINUS_I: C64 = C64::new(0.0, -1.0);

/// Step cap for propagation. Envelopes with a flat zero at the centre (such
/// as `x⁴`) let the embedded error estimate cancel on a long step across it.
fn max_step(span: Span) -> f64 {
    span.len() / 32.0
}

fn core_propagator(
    pair: &ModelPair,
    picture: Picture,
    span: Span,
    cfg: &IntegratorConfig,
) -> Result<Mat2> {
    let rhs = |x: f64, u: &Mat2| -> Result<Mat2> {
        Ok((hamiltonian(pair, picture, x)? * *u).scale(MINUS_I))
    };
    Ok(integrator::integrate_bounded(
        rhs,
        span.lo,
        span.hi,
        Mat2::identity(),
        cfg,
        max_step(span),
        |_, _| {},
    )?
    .y)
}

/// First-order Magnus block for a tangent-class end segment of Delos-Thorson
/// width `w` (from `s = π/2 − w` to the pole), in the phase picture.
///
/// On that segment `e^{iφ} = (sin v)^{-2iβ}` with `v = π/2 − |s|`, and
/// `∫_0^w (sin v)^{-2iβ} dv ≈ w^{1-2iβ}/(1-2iβ) + (iβ/3) w^{3-2iβ}/(3-2iβ)`.
fn tangent_end_block(alpha: f64, beta: f64, w: f64) -> Mat2 {
    if w <= 0.0 || alpha == 0.0 {
        return Mat2::identity();
    }
    let p = |k: f64| C64::from_polar(w.powf(k), -2.0 * beta * w.ln());
    let j = p(1.0) / C64::new(1.0, -2.0 * beta)
        + C64::new(0.0, beta / 3.0) * p(3.0) / C64::new(3.0, -2.0 * beta);
    let mag = j.norm();
    let theta = alpha * mag;
    let k = Mat2([[C64::new(0.0, 0.0), j.conj()], [j, C64::new(0.0, 0.0)]]);
    let (sin, cos) = theta.sin_cos();
    Mat2::identity().scale(C64::new(cos, 0.0)) + k.scale(C64::new(0.0, -sin / mag))
}

/// End blocks (left, right) in the phase picture, identity where no closure applies.
fn closure_blocks(pair: &ModelPair, span: Span) -> (Mat2, Mat2) {
    let model = &pair.model;
    if !model.has_endpoint_closure() || model.class() != ModelClass::Aeh {
        return (Mat2::identity(), Mat2::identity());
    }
    let edge = model.span();
    let (alpha, beta) = (pair.alpha(), pair.beta());
    let block = |x: f64| tangent_end_block(alpha, beta, model.shape().edge_gap(x));
    let left = if span.lo == edge.lo {
        block(edge.lo)
    } else {
        Mat2::identity()
    };
    let right = if span.hi == edge.hi {
        block(edge.hi)
    } else {
        Mat2::identity()
    };
    (left, right)
}

/// Evolution operator over `span` in the chosen picture.
///
/// When the model carries an endpoint closure and `span` touches a guarded
/// edge, the removed end segment is included analytically.
pub fn propagate(
    pair: &ModelPair,
    picture: Picture,
    span: Span,
    cfg: &IntegratorConfig,
) -> Result<Propagator> {
    cfg.validate()?;
    check_span(pair, span)?;
    let core = core_propagator(pair, picture, span, cfg)?;
    let (left, right) = closure_blocks(pair, span);
    let u = match picture {
        Picture::Phase => right * core * left,
        Picture::Detuning => {
            let (ul, ur) = (
                phase_transformation(pair, span.lo),
                phase_transformation(pair, span.hi),
            );
            ur * right * ur.adjoint() * core * ul * left * ul.adjoint()
        }
    };
    Ok(Propagator { u })
}

pub fn propagate_detuning(
    pair: &ModelPair,
    span: Span,
    cfg: &IntegratorConfig,
) -> Result<Propagator> {
    propagate(pair, Picture::Detuning, span, cfg)
}

pub fn propagate_phase(pair: &ModelPair, span: Span, cfg: &IntegratorConfig) -> Result<Propagator> {
    propagate(pair, Picture::Phase, span, cfg)
}

/// Propagator over the model's own window.
pub fn propagate_full(
    pair: &ModelPair,
    picture: Picture,
    cfg: &IntegratorConfig,
) -> Result<Propagator> {
    propagate(pair, picture, pair.model.span(), cfg)
}

/// `|c2|²` at the end of the window, starting from the ground state.
pub fn transition_probability(
    pair: &ModelPair,
    picture: Picture,
    cfg: &IntegratorConfig,
) -> Result<f64> {
    Ok(propagate_full(pair, picture, cfg)?
        .transition_probability()
        .clamp(0.0, 1.0))
}

/// Estimate of the probability error induced by an endpoint guard `δ`:
/// `|P(δ) − P(δ/2)|`. Zero for models without a guard.
pub fn guard_error_estimate(
    pair: &ModelPair,
    picture: Picture,
    cfg: &IntegratorConfig,
) -> Result<f64> {
    let TruncationPolicy::EndpointGuard { delta } = pair.model.policy() else {
        return Ok(0.0);
    };
    let coarse = transition_probability(pair, picture, cfg)?;
    let fine =
        crate::catalog::truncate(pair, TruncationPolicy::EndpointGuard { delta: 0.5 * delta })?;
    Ok((coarse - transition_probability(&fine, picture, cfg)?).abs())
}

/// One accepted integration step of a state trajectory.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrajectoryPoint {
    pub x: f64,
    pub state: QubitState,
}

/// State evolution from the ground state over the model's window, one point
/// per accepted step (end closures are not included).
pub fn trajectory(
    pair: &ModelPair,
    picture: Picture,
    cfg: &IntegratorConfig,
) -> Result<Vec<TrajectoryPoint>> {
    cfg.validate()?;
    let span = pair.model.span();
    check_span(pair, span)?;
    let rhs = |x: f64, c: &[C64; 2]| -> Result<[C64; 2]> {
        let [a, b] = hamiltonian(pair, picture, x)?.apply(*c);
        Ok([a * MINUS_I, b * MINUS_I])
    };
    let mut points = Vec::new();
    let start = [C64::new(1.0, 0.0), C64::new(0.0, 0.0)];
    integrator::integrate_bounded(rhs, span.lo, span.hi, start, cfg, max_step(span), |x, c| {
        points.push(TrajectoryPoint {
            x,
            state: QubitState { c1: c[0], c2: c[1] },
        })
    })?;
    Ok(points)
}

/// CSV with columns `x,re_c1,im_c1,re_c2,im_c2,p2`.
pub fn write_trajectory_csv<W: Write>(points: &[TrajectoryPoint], mut out: W) -> Result<()> {
    writeln!(out, "x,re_c1,im_c1,re_c2,im_c2,p2")?;
    for p in points {
        let s = p.state;
        writeln!(
            out,
            "{},{},{},{},{},{}",
            p.x,
            s.c1.re,
            s.c1.im,
            s.c2.re,
            s.c2.im,
            s.excited_population()
        )?;
    }
    Ok(())
}
