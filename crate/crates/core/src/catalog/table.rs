//! The sixteen symmetric area-π envelopes and the detuning/phase closed forms
//! that accompany some of them.

use std::f64::consts::PI;
use std::sync::Arc;

use super::shape::{Curve, Domain};

/// Listed detuning shape and phase shape of a row.
pub(crate) type ListedForms = (fn(f64) -> f64, fn(f64) -> f64);

pub(crate) struct RowDef {
    pub row: u8,
    pub name: &'static str,
    pub formula: &'static str,
    pub s_formula: &'static str,
    pub domain: Domain,
    pub f: fn(f64) -> f64,
    pub s: fn(f64) -> f64,
    /// Explicit (g, φ/(Δ₀τ)) for the linear-Stückelberg class, when tabulated.
    pub lmsz: Option<ListedForms>,
    /// Explicit (g, φ/(Δ₀τ)) for the tangent-Stückelberg class, when tabulated.
    pub aeh: Option<ListedForms>,
}

pub(crate) fn curve(f: fn(f64) -> f64) -> Curve {
    Arc::new(f)
}

const HALF_PI: f64 = PI / 2.0;
const FINITE: Domain = Domain::Finite {
    half_width: HALF_PI,
};

fn sech(x: f64) -> f64 {
    1.0 / x.cosh()
}

/// `ln cosh x` without overflow.
pub(crate) fn ln_cosh(x: f64) -> f64 {
    let a = x.abs();
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}

fn pi2() -> f64 {
    PI * PI
}
fn pi4() -> f64 {
    pi2() * pi2()
}
fn pi8() -> f64 {
    pi4() * pi4()
}

pub(crate) fn rows() -> Vec<RowDef> {
    vec![
        RowDef {
            row: 1,
            name: "rectangular",
            formula: "1",
            s_formula: "x",
            domain: FINITE,
            f: |_| 1.0,
            s: |x| x,
            lmsz: Some((|x| x, |x| 0.5 * x * x)),
            aeh: Some((f64::tan, |x| -x.cos().ln())),
        },
        RowDef {
            row: 2,
            name: "quadratic",
            formula: "12/pi^2 x^2",
            s_formula: "4/pi^2 x^3",
            domain: FINITE,
            f: |x| 12.0 / pi2() * x * x,
            s: |x| 4.0 / pi2() * x.powi(3),
            lmsz: Some((|x| 48.0 / pi4() * x.powi(5), |x| 8.0 / pi4() * x.powi(6))),
            aeh: Some((
                |x| 12.0 / pi2() * x * x * (4.0 / pi2() * x.powi(3)).tan(),
                |x| -(4.0 / pi2() * x.powi(3)).cos().ln(),
            )),
        },
        RowDef {
            row: 3,
            name: "quartic",
            formula: "80/pi^4 x^4",
            s_formula: "16/pi^4 x^5",
            domain: FINITE,
            f: |x| 80.0 / pi4() * x.powi(4),
            s: |x| 16.0 / pi4() * x.powi(5),
            lmsz: Some((
                |x| 1440.0 / pi8() * x.powi(9),
                |x| 144.0 / pi8() * x.powi(10),
            )),
            aeh: Some((
                |x| 80.0 / pi4() * x.powi(4) * (16.0 / pi4() * x.powi(5)).tan(),
                |x| -(16.0 / pi4() * x.powi(5)).cos().ln(),
            )),
        },
        RowDef {
            row: 4,
            name: "cosine",
            formula: "pi/2 cos x",
            s_formula: "pi/2 sin x",
            domain: FINITE,
            f: |x| HALF_PI * x.cos(),
            s: |x| HALF_PI * x.sin(),
            lmsz: Some((
                |x| pi2() / 8.0 * (2.0 * x).sin(),
                |x| pi2() / 8.0 * x.sin().powi(2),
            )),
            aeh: None,
        },
        RowDef {
            row: 5,
            name: "cosine-squared",
            formula: "2 cos^2 x",
            s_formula: "x + sin(2x)/2",
            domain: FINITE,
            f: |x| 2.0 * x.cos().powi(2),
            s: |x| x + 0.5 * (2.0 * x).sin(),
            lmsz: None,
            aeh: None,
        },
        RowDef {
            row: 6,
            name: "cosine-cubed",
            formula: "3pi/4 cos^3 x",
            s_formula: "pi/16 (9 sin x + sin 3x)",
            domain: FINITE,
            f: |x| 0.75 * PI * x.cos().powi(3),
            s: |x| PI / 16.0 * (9.0 * x.sin() + (3.0 * x).sin()),
            lmsz: None,
            aeh: None,
        },
        RowDef {
            row: 7,
            name: "cosine-fourth",
            formula: "8/3 cos^4 x",
            s_formula: "x + 2/3 sin 2x + 1/12 sin 4x",
            domain: FINITE,
            f: |x| 8.0 / 3.0 * x.cos().powi(4),
            s: |x| x + 2.0 / 3.0 * (2.0 * x).sin() + (4.0 * x).sin() / 12.0,
            lmsz: None,
            aeh: None,
        },
        RowDef {
            row: 8,
            name: "sech",
            formula: "sech x",
            s_formula: "arctan(sinh x)",
            domain: Domain::Infinite,
            f: sech,
            s: |x| x.sinh().atan(),
            lmsz: None,
            aeh: Some((f64::tanh, ln_cosh)),
        },
        RowDef {
            row: 9,
            name: "sech-squared",
            formula: "pi/2 sech^2 x",
            s_formula: "pi/2 tanh x",
            domain: Domain::Infinite,
            f: |x| HALF_PI * sech(x).powi(2),
            s: |x| HALF_PI * x.tanh(),
            lmsz: None,
            aeh: None,
        },
        RowDef {
            row: 10,
            name: "sech-cubed",
            formula: "2 sech^3 x",
            s_formula: "arctan(sinh x) + sech x tanh x",
            domain: Domain::Infinite,
            f: |x| 2.0 * sech(x).powi(3),
            s: |x| x.sinh().atan() + sech(x) * x.tanh(),
            lmsz: None,
            aeh: None,
        },
        RowDef {
            row: 11,
            name: "sech-fourth",
            formula: "3pi/4 sech^4 x",
            s_formula: "pi/4 (2 + cosh x) sech^2 x tanh x",
            domain: Domain::Infinite,
            f: |x| 0.75 * PI * sech(x).powi(4),
            s: |x| PI / 4.0 * (2.0 + x.cosh()) * sech(x).powi(2) * x.tanh(),
            lmsz: None,
            aeh: None,
        },
        RowDef {
            row: 12,
            name: "lorentzian",
            formula: "1/(1+x^2)",
            s_formula: "arctan x",
            domain: Domain::Infinite,
            f: |x| 1.0 / (1.0 + x * x),
            s: f64::atan,
            lmsz: None,
            aeh: Some((|x| x / (1.0 + x * x), |x| 0.5 * (x * x).ln_1p())),
        },
        RowDef {
            row: 13,
            name: "lorentzian-squared",
            formula: "2/(1+x^2)^2",
            s_formula: "arctan x + x/(1+x^2)",
            domain: Domain::Infinite,
            f: |x| 2.0 / (1.0 + x * x).powi(2),
            s: |x| x.atan() + x / (1.0 + x * x),
            lmsz: None,
            aeh: None,
        },
        RowDef {
            row: 14,
            name: "lorentzian-cubed",
            formula: "8/(3(1+x^2)^3)",
            s_formula: "3 arctan x + x(5+3x^2)/(1+x^2)^2",
            domain: Domain::Infinite,
            f: |x| 8.0 / (3.0 * (1.0 + x * x).powi(3)),
            s: |x| 3.0 * x.atan() + x * (5.0 + 3.0 * x * x) / (1.0 + x * x).powi(2),
            lmsz: None,
            aeh: None,
        },
        RowDef {
            row: 15,
            name: "lorentzian-fourth",
            formula: "16/(5(1+x^2)^4)",
            s_formula: "15 arctan x + x(33+40x^2+15x^4)/(1+x^2)^3",
            domain: Domain::Infinite,
            f: |x| 16.0 / (5.0 * (1.0 + x * x).powi(4)),
            s: |x| {
                let x2 = x * x;
                15.0 * x.atan() + x * (33.0 + 40.0 * x2 + 15.0 * x2 * x2) / (1.0 + x2).powi(3)
            },
            lmsz: None,
            aeh: None,
        },
        RowDef {
            row: 16,
            name: "gaussian",
            formula: "sqrt(pi) exp(-x^2)",
            s_formula: "pi/2 erf x",
            domain: Domain::Infinite,
            f: |x| PI.sqrt() * (-x * x).exp(),
            s: |x| HALF_PI * libm::erf(x),
            lmsz: None,
            aeh: None,
        },
    ]
}
