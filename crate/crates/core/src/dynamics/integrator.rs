//! Explicit Runge-Kutta integrators: an adaptive Dormand-Prince 8(5,3) pair with
//! per-step error control, and a classic fixed-step RK4 for runs that must be
//! reproducible bit for bit.

use num_complex::Complex64 as C64;

use super::matrix::Mat2;
use crate::error::{Error, Result};

/// How the integrator advances.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StepMode {
    Adaptive,
    /// Classic RK4 on a uniform grid of `max_steps` steps.
    Fixed,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Step budget for the adaptive mode; exact step count for the fixed mode.
    pub max_steps: usize,
    pub mode: StepMode,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_steps: 2_000_000,
            mode: StepMode::Adaptive,
        }
    }
}

impl IntegratorConfig {
    pub fn fixed(steps: usize) -> Self {
        IntegratorConfig {
            max_steps: steps,
            mode: StepMode::Fixed,
            ..Default::default()
        }
    }

    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.rel_tol.is_finite()) {
            return Err(Error::Contract(format!(
                "rel_tol must be positive, got {}",
                self.rel_tol
            )));
        }
        if !(self.abs_tol > 0.0 && self.abs_tol.is_finite()) {
            return Err(Error::Contract(format!(
                "abs_tol must be positive, got {}",
                self.abs_tol
            )));
        }
        if self.max_steps < 2 {
            return Err(Error::Contract(format!(
                "max_steps must be at least 2, got {}",
                self.max_steps
            )));
        }
        Ok(())
    }
}

/// Vector-space operations the integrator needs from a state type.
pub trait OdeState: Clone {
    /// `self += c * other`
    fn add_scaled(&mut self, c: f64, other: &Self);

    /// `max_i |err_i| / (atol + rtol * max(|y0_i|, |y1_i|))`
    fn scaled_error(err: &Self, y0: &Self, y1: &Self, rtol: f64, atol: f64) -> f64;
}

impl OdeState for f64 {
    fn add_scaled(&mut self, c: f64, other: &Self) {
        *self += c * other;
    }

    fn scaled_error(err: &Self, y0: &Self, y1: &Self, rtol: f64, atol: f64) -> f64 {
        err.abs() / (atol + rtol * y0.abs().max(y1.abs()))
    }
}

fn complex_scaled(err: C64, y0: C64, y1: C64, rtol: f64, atol: f64) -> f64 {
    let sc_re = atol + rtol * y0.re.abs().max(y1.re.abs());
    let sc_im = atol + rtol * y0.im.abs().max(y1.im.abs());
    (err.re.abs() / sc_re).max(err.im.abs() / sc_im)
}

impl OdeState for [C64; 2] {
    fn add_scaled(&mut self, c: f64, other: &Self) {
        self[0] += other[0] * c;
        self[1] += other[1] * c;
    }

    fn scaled_error(err: &Self, y0: &Self, y1: &Self, rtol: f64, atol: f64) -> f64 {
        (0..2)
            .map(|i| complex_scaled(err[i], y0[i], y1[i], rtol, atol))
            .fold(0.0, f64::max)
    }
}

impl OdeState for Mat2 {
    fn add_scaled(&mut self, c: f64, other: &Self) {
        for i in 0..2 {
            for j in 0..2 {
                self.0[i][j] += other.0[i][j] * c;
            }
        }
    }

    fn scaled_error(err: &Self, y0: &Self, y1: &Self, rtol: f64, atol: f64) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                worst = worst.max(complex_scaled(
                    err.0[i][j],
                    y0.0[i][j],
                    y1.0[i][j],
                    rtol,
                    atol,
                ));
            }
        }
        worst
    }
}

#[derive(Clone, Debug)]
pub struct Solution<S> {
    pub y: S,
    pub accepted: usize,
    pub rejected: usize,
}

// Dormand-Prince 8(5,3) tableau (Hairer's DOP853).
const STAGES: usize = 12;
const C: [f64; STAGES] = [
    0.0,
    0.05260015195876773,
    0.0789002279381516,
    0.1183503419072274,
    0.2816496580927726,
    0.3333333333333333,
    0.25,
    0.3076923076923077,
    0.6512820512820513,
    0.6,
    0.8571428571428571,
    1.0,
];
const A: [[f64; STAGES]; STAGES] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [
        0.05260015195876773,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
    ],
    [
        0.0197250569845379,
        0.0591751709536137,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
    ],
    [
        0.02958758547680685,
        0.0,
        0.08876275643042054,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
    ],
    [
        0.2413651341592667,
        0.0,
        -0.8845494793282861,
        0.924834003261792,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
    ],
    [
        0.037037037037037035,
        0.0,
        0.0,
        0.17082860872947386,
        0.12546768756682242,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
    ],
    [
        0.037109375,
        0.0,
        0.0,
        0.17025221101954405,
        0.06021653898045596,
        -0.017578125,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
    ],
    [
        0.03709200011850479,
        0.0,
        0.0,
        0.17038392571223998,
        0.10726203044637328,
        -0.015319437748624402,
        0.008273789163814023,
        0.0,
        0.0,
        0.0,
        0.0,
        0.0,
    ],
    [
        0.6241109587160757,
        0.0,
        0.0,
        -3.3608926294469414,
        -0.868219346841726,
        27.59209969944671,
        20.154067550477894,
        -43.48988418106996,
        0.0,
        0.0,
        0.0,
        0.0,
    ],
    [
        0.47766253643826434,
        0.0,
        0.0,
        -2.4881146199716677,
        -0.590290826836843,
        21.230051448181193,
        15.279233632882423,
        -33.28821096898486,
        -0.020331201708508627,
        0.0,
        0.0,
        0.0,
    ],
    [
        -0.9371424300859873,
        0.0,
        0.0,
        5.186372428844064,
        1.0914373489967295,
        -8.149787010746927,
        -18.52006565999696,
        22.739487099350505,
        2.4936055526796523,
        -3.0467644718982196,
        0.0,
        0.0,
    ],
    [
        2.273310147516538,
        0.0,
        0.0,
        -10.53449546673725,
        -2.0008720582248625,
        -17.9589318631188,
        27.94888452941996,
        -2.8589982771350235,
        -8.87285693353063,
        12.360567175794303,
        0.6433927460157636,
        0.0,
    ],
];
const B: [f64; STAGES] = [
    0.054293734116568765,
    0.0,
    0.0,
    0.0,
    0.0,
    4.450312892752409,
    1.8915178993145003,
    -5.801203960010585,
    0.3111643669578199,
    -0.1521609496625161,
    0.20136540080403034,
    0.04471061572777259,
];
const E5: [f64; STAGES + 1] = [
    0.01312004499419488,
    0.0,
    0.0,
    0.0,
    0.0,
    -1.2251564463762044,
    -0.4957589496572502,
    1.6643771824549864,
    -0.35032884874997366,
    0.3341791187130175,
    0.08192320648511571,
    -0.022355307863886294,
    0.0,
];
const E3: [f64; STAGES + 1] = [
    -0.18980075407240762,
    0.0,
    0.0,
    0.0,
    0.0,
    4.450312892752409,
    1.8915178993145003,
    -5.801203960010585,
    -0.4226823213237919,
    -0.1521609496625161,
    0.20136540080403034,
    0.02265179219836082,
    0.0,
];

/// Integrates `y' = rhs(x, y)` from `x0` to `x1` (either direction).
///
/// `observer` sees the initial point and every accepted step.
pub fn integrate<S, F, O>(
    rhs: F,
    x0: f64,
    x1: f64,
    y0: S,
    cfg: &IntegratorConfig,
    observer: O,
) -> Result<Solution<S>>
where
    S: OdeState,
    F: FnMut(f64, &S) -> Result<S>,
    O: FnMut(f64, &S),
{
    integrate_bounded(rhs, x0, x1, y0, cfg, f64::INFINITY, observer)
}

/// Same as [`integrate`] with an upper bound on the step length.
pub fn integrate_bounded<S, F, O>(
    rhs: F,
    x0: f64,
    x1: f64,
    y0: S,
    cfg: &IntegratorConfig,
    max_step: f64,
    observer: O,
) -> Result<Solution<S>>
where
    S: OdeState,
    F: FnMut(f64, &S) -> Result<S>,
    O: FnMut(f64, &S),
{
    cfg.validate()?;
    if !x0.is_finite() || !x1.is_finite() {
        return Err(Error::Contract(format!(
            "integration span [{x0}, {x1}] is not finite"
        )));
    }
    match cfg.mode {
        StepMode::Adaptive => dop853(rhs, x0, x1, y0, cfg, max_step, observer),
        StepMode::Fixed => rk4(rhs, x0, x1, y0, cfg.max_steps, observer),
    }
}

fn stage<S: OdeState>(y: &S, h: f64, row: &[f64], k: &[S]) -> S {
    let mut out = y.clone();
    for (a, ki) in row.iter().zip(k) {
        if *a != 0.0 {
            out.add_scaled(h * a, ki);
        }
    }
    out
}

fn dop853<S, F, O>(
    mut rhs: F,
    x0: f64,
    x1: f64,
    y0: S,
    cfg: &IntegratorConfig,
    max_step: f64,
    mut observer: O,
) -> Result<Solution<S>>
where
    S: OdeState,
    F: FnMut(f64, &S) -> Result<S>,
    O: FnMut(f64, &S),
{
    let span = x1 - x0;
    observer(x0, &y0);
    if span == 0.0 {
        return Ok(Solution {
            y: y0,
            accepted: 0,
            rejected: 0,
        });
    }
    let dir = span.signum();
    let max_step = max_step.min(span.abs());
    let mut h = (span.abs() * 1e-3).min(max_step);
    let mut x = x0;
    let mut y = y0;
    let mut k0 = rhs(x, &y)?;
    let (mut accepted, mut rejected) = (0usize, 0usize);

    loop {
        let remaining = (x1 - x) * dir;
        if remaining <= 0.0 {
            break;
        }
        if accepted + rejected >= cfg.max_steps {
            return Err(Error::Convergence {
                reached: x,
                target: x1,
                steps: accepted + rejected,
            });
        }
        let last = h >= remaining;
        let step = if last { remaining } else { h };
        if step <= 1e-14 * x.abs().max(1.0) {
            return Err(Error::Convergence {
                reached: x,
                target: x1,
                steps: accepted + rejected,
            });
        }
        let hs = dir * step;
        let x_new = if last { x1 } else { x + hs };

        let mut k: Vec<S> = Vec::with_capacity(STAGES + 1);
        k.push(k0.clone());
        for s in 1..STAGES {
            let ys = stage(&y, hs, &A[s][..s], &k);
            k.push(rhs(x + C[s] * hs, &ys)?);
        }
        let y_new = stage(&y, hs, &B, &k);
        k.push(rhs(x_new, &y_new)?);

        let mut err5 = stage(&y, hs, &E5, &k);
        err5.add_scaled(-1.0, &y);
        let mut err3 = stage(&y, hs, &E3, &k);
        err3.add_scaled(-1.0, &y);
        let e5 = S::scaled_error(&err5, &y, &y_new, cfg.rel_tol, cfg.abs_tol);
        let e3 = S::scaled_error(&err3, &y, &y_new, cfg.rel_tol, cfg.abs_tol);
        let e = if e5 == 0.0 {
            0.0
        } else {
            e5 * e5 / (e5 * e5 + 0.01 * e3 * e3).sqrt()
        };
        if !e.is_finite() {
            return Err(Error::Domain {
                x,
                reason: "non-finite error estimate".into(),
            });
        }

        if e <= 1.0 {
            x = x_new;
            y = y_new;
            k0 = k.pop().unwrap();
            accepted += 1;
            observer(x, &y);
            let fac = if e == 0.0 {
                6.0
            } else {
                (0.9 * e.powf(-1.0 / 8.0)).clamp(0.333, 6.0)
            };
            h = (step * fac).min(max_step);
        } else {
            rejected += 1;
            h = step * (0.9 * e.powf(-1.0 / 8.0)).clamp(0.2, 0.9);
        }
    }
    Ok(Solution {
        y,
        accepted,
        rejected,
    })
}

fn rk4<S, F, O>(
    mut rhs: F,
    x0: f64,
    x1: f64,
    y0: S,
    n: usize,
    mut observer: O,
) -> Result<Solution<S>>
where
    S: OdeState,
    F: FnMut(f64, &S) -> Result<S>,
    O: FnMut(f64, &S),
{
    let h = (x1 - x0) / n as f64;
    let mut y = y0;
    observer(x0, &y);
    for i in 0..n {
        let x = x0 + i as f64 * h;
        let xn = if i + 1 == n {
            x1
        } else {
            x0 + (i + 1) as f64 * h
        };
        let xm = x + 0.5 * h;
        let k1 = rhs(x, &y)?;
        let k2 = rhs(xm, &stage(&y, h, &[0.5], std::slice::from_ref(&k1)))?;
        let k3 = rhs(xm, &stage(&y, h, &[0.5], std::slice::from_ref(&k2)))?;
        let k4 = rhs(xn, &stage(&y, h, &[1.0], std::slice::from_ref(&k3)))?;
        y = stage(
            &y,
            h,
            &[1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0],
            &[k1, k2, k3, k4],
        );
        observer(xn, &y);
    }
    Ok(Solution {
        y,
        accepted: n,
        rejected: 0,
    })
}
