//! Adaptive Gauss-Kronrod (7, 15) quadrature, plus a tabulated running
//! integral used when a shape has no trustworthy closed-form antiderivative.

use std::sync::Arc;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// One Gauss-Kronrod panel: returns (kronrod estimate, |kronrod - gauss|).
pub fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for (i, (&x, &w)) in XGK.iter().zip(&WGK).take(7).enumerate() {
        let dx = half * x;
        let pair = f(center - dx) + f(center + dx);
        kronrod += w * pair;
        if i % 2 == 1 {
            gauss += WG[i / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

fn adapt<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let mid = 0.5 * (a + b);
    let (left, el) = gk15(f, a, mid);
    let (right, er) = gk15(f, mid, b);
    let sum = left + right;
    if depth == 0 || el + er <= tol || (sum - whole).abs() <= tol * 1e-3 {
        return sum;
    }
    adapt(f, a, mid, left, 0.5 * tol, depth - 1) + adapt(f, mid, b, right, 0.5 * tol, depth - 1)
}

/// Adaptive quadrature of `f` over the finite interval `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let (whole, err) = gk15(&f, a, b);
    if err <= tol * 1e-2 {
        return whole;
    }
    adapt(&f, a, b, whole, tol, 40)
}

/// Adaptive quadrature of `f` over `[a, ∞)` via `x = a + t / (1 - t)`.
pub fn integrate_to_infinity<F: Fn(f64) -> f64>(f: F, a: f64, tol: f64) -> f64 {
    let mapped = |t: f64| {
        if t >= 1.0 {
            return 0.0;
        }
        let u = 1.0 - t;
        let v = f(a + t / u) / (u * u);
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    integrate(mapped, 0.0, 1.0, tol)
}

/// Running integral `s(x) = ∫_0^x f` of an even function, tabulated on a
/// uniform grid and completed by a single Kronrod panel between nodes.
#[derive(Clone)]
pub struct RunningIntegral {
    f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    step: f64,
    nodes: Vec<f64>,
}

impl RunningIntegral {
    /// Tabulates on `[0, reach]`; beyond `reach` the integral is completed
    /// adaptively.
    pub fn new(f: Arc<dyn Fn(f64) -> f64 + Send + Sync>, reach: f64) -> Self {
        let n = ((reach * 16.0).ceil() as usize).clamp(1, 100_000);
        let step = reach / n as f64;
        let mut nodes = Vec::with_capacity(n + 1);
        nodes.push(0.0);
        let mut acc = 0.0;
        for k in 0..n {
            let a = k as f64 * step;
            acc += integrate(|x| f(x), a, a + step, 1e-15);
            nodes.push(acc);
        }
        RunningIntegral { f, step, nodes }
    }

    pub fn eval(&self, x: f64) -> f64 {
        if x < 0.0 {
            return -self.eval(-x);
        }
        let f = &self.f;
        let last = self.nodes.len() - 1;
        let k = ((x / self.step) as usize).min(last);
        let a = k as f64 * self.step;
        if k == last && x - a > self.step {
            return self.nodes[last] + integrate(|t| f(t), a, x, 1e-15);
        }
        self.nodes[k] + gk15(&|t| f(t), a, x).0
    }
}

/// Smallest `x ≥ start` (by doubling) such that `∫_x^∞ f < tol`, capped at `cap`.
pub fn tail_reach<F: Fn(f64) -> f64>(f: F, start: f64, tol: f64, cap: f64) -> f64 {
    let mut x = start.max(1.0);
    while x < cap && integrate_to_infinity(&f, x, tol * 1e-3) > tol {
        x *= 2.0;
    }
    x.min(cap)
}
