//! Detuning-first construction: given an odd detuning shape `g`, recover the
//! envelope `f = ds/dx` of the class member from `θ(s) ds/dx = g(x)`.
//!
//! Both `θ(0)` and `g(0)` vanish, so the integration starts a short distance
//! from the origin on the leading series term `s ≈ √(g'(0)/θ'(0)) x`.

use std::f64::consts::FRAC_PI_2;
use std::sync::Arc;

use super::model::{
    DetuningSource, Model, ModelClass, ModelPair, TruncationPolicy, DEFAULT_TAIL_EPS,
};
use super::shape::{Curve, Domain, IntegralSource, PulseShape};
use crate::dynamics::integrator::{integrate_bounded, IntegratorConfig};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DetuningOptions {
    /// Where the series start hands over to the integrator.
    pub seed_x: f64,
    /// Tail-area bound used to cut envelopes that reach the class edge only asymptotically.
    pub tail_eps: f64,
    /// Give up if the class edge is not reached by this `x`.
    pub max_x: f64,
    /// Longest integration step; also the node spacing of the dense output.
    pub max_step: f64,
}

impl Default for DetuningOptions {
    fn default() -> Self {
        DetuningOptions {
            seed_x: 1e-4,
            tail_eps: DEFAULT_TAIL_EPS,
            max_x: 1e3,
            max_step: 5e-3,
        }
    }
}

/// Accepted integration nodes on `x ≥ seed`, with cubic Hermite interpolation.
struct Trace {
    x: Vec<f64>,
    s: Vec<f64>,
    ds: Vec<f64>,
}

impl Trace {
    fn locate(&self, x: f64) -> usize {
        match self.x.binary_search_by(|p| p.total_cmp(&x)) {
            Ok(i) => i.min(self.x.len() - 2),
            Err(i) => i.saturating_sub(1).min(self.x.len() - 2),
        }
    }

    fn eval(&self, x: f64) -> f64 {
        let i = self.locate(x);
        let (x0, x1) = (self.x[i], self.x[i + 1]);
        let h = x1 - x0;
        let t = ((x - x0) / h).clamp(0.0, 1.0);
        let (t2, t3) = (t * t, t * t * t);
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * self.s[i] + h10 * h * self.ds[i] + h01 * self.s[i + 1] + h11 * h * self.ds[i + 1]
    }
}

fn slope_at_origin(g: &Curve) -> f64 {
    let d = |h: f64| (g(h) - g(-h)) / (2.0 * h);
    (4.0 * d(5e-4) - d(1e-3)) / 3.0
}

/// Amplitude-free class member whose detuning shape is `g`.
pub fn model_from_detuning(class: ModelClass, g: Curve, opts: DetuningOptions) -> Result<Model> {
    if g(0.0).abs() > 1e-12 {
        return Err(Error::Contract(format!(
            "detuning must vanish at x = 0, got g(0) = {}",
            g(0.0)
        )));
    }
    for &x in &[0.1, 0.5, 1.0, 2.0] {
        let (a, b) = (g(x), g(-x));
        if (a + b).abs() > 1e-9 * a.abs().max(1.0) {
            return Err(Error::Contract(format!(
                "detuning must be odd: g({x}) = {a}, g(-{x}) = {b}"
            )));
        }
    }
    let slope = slope_at_origin(&g);
    if !(slope > 1e-8) {
        return Err(Error::Singularity(format!(
            "g'(0) = {slope:e}: the series start √(g'(0)/θ'(0)) needs a positive slope"
        )));
    }
    // θ'(0) = 1 for both generators.
    let c1 = slope.sqrt();
    let x0 = opts.seed_x;
    let s0 = c1 * x0;

    let rhs = |x: f64, s: &f64| -> Result<f64> {
        let gx = g(x);
        if !gx.is_finite() {
            return Err(Error::Domain {
                x,
                reason: format!("detuning shape is not finite (g = {gx})"),
            });
        }
        Ok(gx / class.theta(*s))
    };
    let cfg = IntegratorConfig {
        rel_tol: 1e-13,
        abs_tol: 1e-15,
        ..Default::default()
    };
    let mut trace = Trace {
        x: vec![],
        s: vec![],
        ds: vec![],
    };
    let target = FRAC_PI_2 - opts.tail_eps;
    let mut x = x0;
    let mut s = s0;
    let mut reached_tail: Option<f64> = None;
    let mut crossing: Option<f64> = None;
    let chunk = 0.25;

    trace.x.push(x0);
    trace.s.push(s0);
    trace.ds.push(rhs(x0, &s0)?);
    while crossing.is_none() {
        if x >= opts.max_x {
            return Err(Error::Domain {
                x,
                reason: format!(
                    "σ stays below the class edge (s = {s}) up to max_x = {}",
                    opts.max_x
                ),
            });
        }
        if let Some(xt) = reached_tail {
            // Linear generator: look ahead for a finite crossing of the edge.
            if class == ModelClass::Aeh || x > xt + 1.0 {
                break;
            }
        }
        let next = x + chunk;
        let mut bad: Option<(f64, f64)> = None;
        let sol = integrate_bounded(rhs, x, next, s, &cfg, opts.max_step, |xi, si| {
            if xi == x {
                return;
            }
            if bad.is_none() && !(*si > 0.0 && (class == ModelClass::Lmsz || *si < FRAC_PI_2)) {
                bad = Some((xi, *si));
            }
            trace.x.push(xi);
            trace.s.push(*si);
            trace.ds.push(g(xi) / class.theta(*si));
        })?;
        if let Some((xb, sb)) = bad {
            return Err(Error::Domain {
                x: xb,
                reason: format!("σ left the class domain (s = {sb})"),
            });
        }
        x = next;
        s = sol.y;
        if reached_tail.is_none() && s >= target {
            reached_tail = Some(x);
        }
        if class == ModelClass::Lmsz && s >= FRAC_PI_2 {
            crossing = Some(bisect(&trace, FRAC_PI_2));
        }
    }

    let trace = Arc::new(trace);
    let (domain, policy) = match crossing {
        Some(xc) => (Domain::Finite { half_width: xc }, TruncationPolicy::Full),
        None => (
            Domain::Infinite,
            TruncationPolicy::TailArea { eps: opts.tail_eps },
        ),
    };
    let last_x = *trace.x.last().unwrap();
    let s_curve: Curve = {
        let trace = trace.clone();
        Arc::new(move |x: f64| {
            let a = x.abs();
            let v = if a <= x0 {
                c1 * a
            } else if a >= last_x {
                *trace.s.last().unwrap()
            } else {
                trace.eval(a)
            };
            v.copysign(x)
        })
    };
    let f_curve: Curve = {
        let (s_curve, g) = (s_curve.clone(), g.clone());
        Arc::new(move |x: f64| {
            if x.abs() <= x0 {
                c1
            } else if x.abs() >= last_x {
                0.0
            } else {
                g(x) / class.theta(s_curve(x))
            }
        })
    };
    let phase: Curve = {
        let s_curve = s_curve.clone();
        Arc::new(move |x: f64| class.phase_of_s(s_curve(x)))
    };
    let shape = PulseShape {
        name: "detuning-first".to_string(),
        formula: "f = g / θ(s)".to_string(),
        row: None,
        f: f_curve,
        s: s_curve,
        source: IntegralSource::Numeric,
        domain,
        s_limit: Some(FRAC_PI_2),
    };
    // Tail cut for the asymptotic case sits at the first node past the bound.
    let model = Model::assemble(
        class,
        shape,
        g,
        phase,
        DetuningSource::Numeric,
        TruncationPolicy::Full,
    )?;
    match policy {
        TruncationPolicy::Full => Ok(model),
        p => model.truncated(p),
    }
}

fn bisect(trace: &Trace, level: f64) -> f64 {
    let i = trace
        .s
        .iter()
        .position(|&v| v >= level)
        .unwrap_or(trace.s.len() - 1)
        .max(1);
    let (mut lo, mut hi) = (trace.x[i - 1], trace.x[i]);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if trace.eval(mid) < level {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Detuning-first class member with physical amplitudes; `Ω₀` fixes the
/// ratio `Δ₀/Ω₀` inside the generator.
pub fn pair_from_detuning(
    class: ModelClass,
    g: Curve,
    omega0: f64,
    delta0: f64,
    tau: f64,
    opts: DetuningOptions,
) -> Result<ModelPair> {
    if !(tau > 0.0) {
        return Err(Error::Contract(format!("tau must be positive, got {tau}")));
    }
    Ok(model_from_detuning(class, g, opts)?.with_amplitudes(omega0, delta0, tau))
}
