//! WebAssembly bindings behind the browser demo in `www/`.
//!
//! Every export has a plain Rust counterpart in [`demo`] so the logic runs
//! under `cargo test` without a JavaScript host.

use wasm_bindgen::prelude::*;

pub mod demo {
    use isoprob::analytic::{aeh_exact, lmsz_asymptotic};
    use isoprob::catalog::{Catalog, Model, ModelClass};
    use isoprob::dynamics::{trajectory, transition_probability, IntegratorConfig, Picture};
    use isoprob::landscape::{scan_catalog, scan_fn, Axis};
    use isoprob::{Error, Result};

    fn model(class: &str, row: u8) -> Result<Model> {
        Catalog::standard().model(class.parse()?, row)
    }

    fn axes(n_alpha: usize, n_beta: usize, alpha_max: f64, beta_max: f64) -> Result<(Axis, Axis)> {
        Ok((
            Axis::new(0.0, alpha_max, n_alpha)?,
            Axis::new(-beta_max, beta_max, n_beta)?,
        ))
    }

    /// `n` samples of `(x, α f(x), β g(x))`, interleaved, across the model window.
    pub fn drive(class: &str, row: u8, alpha: f64, beta: f64, n: usize) -> Result<Vec<f64>> {
        let m = model(class, row)?;
        let span = m.span();
        let x = Axis::new(span.lo, span.hi, n)?;
        Ok(x.values()
            .into_iter()
            .flat_map(|x| [x, alpha * m.f(x), beta * m.g(x)])
            .collect())
    }

    /// Closed-form landscape, row-major with `β` ascending.
    pub fn analytic_landscape(
        class: &str,
        n_alpha: usize,
        n_beta: usize,
        alpha_max: f64,
        beta_max: f64,
    ) -> Result<Vec<f64>> {
        let class: ModelClass = class.parse()?;
        let (a, b) = axes(n_alpha, n_beta, alpha_max, beta_max)?;
        let map = scan_fn(a, b, Default::default(), |alpha, beta| match class {
            ModelClass::Aeh => Ok(aeh_exact(alpha, beta)),
            // The asymptote is undefined on resonance, where the sweep does nothing.
            ModelClass::Lmsz if beta == 0.0 => Ok(0.0),
            ModelClass::Lmsz => lmsz_asymptotic(alpha, beta),
        })?;
        Ok(map.values().data().to_vec())
    }

    /// Propagated landscape of a catalog row, same layout as [`analytic_landscape`].
    pub fn numeric_landscape(
        class: &str,
        row: u8,
        n_alpha: usize,
        n_beta: usize,
        alpha_max: f64,
        beta_max: f64,
    ) -> Result<Vec<f64>> {
        if n_alpha * n_beta > 2601 {
            return Err(Error::Contract(format!(
                "{n_alpha}x{n_beta} is too large for the browser, keep it within 51x51"
            )));
        }
        let (a, b) = axes(n_alpha, n_beta, alpha_max, beta_max)?;
        let map = scan_catalog(
            class.parse()?,
            row,
            a,
            b,
            Picture::Detuning,
            &IntegratorConfig::default(),
        )?;
        Ok(map.values().data().to_vec())
    }

    /// Final probability and the `(x, |c2|²)` trajectory, interleaved.
    pub fn simulate(
        class: &str,
        row: u8,
        alpha: f64,
        beta: f64,
        picture: &str,
    ) -> Result<(f64, Vec<f64>)> {
        let pair = model(class, row)?.at(alpha, beta);
        let picture: Picture = picture.parse()?;
        let cfg = IntegratorConfig::default();
        let p = transition_probability(&pair, picture, &cfg)?;
        let path = trajectory(&pair, picture, &cfg)?
            .into_iter()
            .flat_map(|t| [t.x, t.state.excited_population()])
            .collect();
        Ok((p, path))
    }
}

fn js(e: isoprob::Error) -> JsError {
    JsError::new(&e.to_string())
}

#[wasm_bindgen]
pub fn drive(class: &str, row: u8, alpha: f64, beta: f64, n: usize) -> Result<Vec<f64>, JsError> {
    demo::drive(class, row, alpha, beta, n).map_err(js)
}

#[wasm_bindgen(js_name = analyticLandscape)]
pub fn analytic_landscape(
    class: &str,
    n_alpha: usize,
    n_beta: usize,
    alpha_max: f64,
    beta_max: f64,
) -> Result<Vec<f64>, JsError> {
    demo::analytic_landscape(class, n_alpha, n_beta, alpha_max, beta_max).map_err(js)
}

#[wasm_bindgen(js_name = numericLandscape)]
pub fn numeric_landscape(
    class: &str,
    row: u8,
    n_alpha: usize,
    n_beta: usize,
    alpha_max: f64,
    beta_max: f64,
) -> Result<Vec<f64>, JsError> {
    demo::numeric_landscape(class, row, n_alpha, n_beta, alpha_max, beta_max).map_err(js)
}

#[wasm_bindgen]
pub struct Simulation {
    probability: f64,
    trajectory: Vec<f64>,
}

#[wasm_bindgen]
impl Simulation {
    #[wasm_bindgen(getter)]
    pub fn probability(&self) -> f64 {
        self.probability
    }

    /// `(x, |c2|²)` pairs, interleaved.
    #[wasm_bindgen(getter)]
    pub fn trajectory(&self) -> Vec<f64> {
        self.trajectory.clone()
    }
}

#[wasm_bindgen]
pub fn simulate(
    class: &str,
    row: u8,
    alpha: f64,
    beta: f64,
    picture: &str,
) -> Result<Simulation, JsError> {
    let (probability, trajectory) = demo::simulate(class, row, alpha, beta, picture).map_err(js)?;
    Ok(Simulation {
        probability,
        trajectory,
    })
}
