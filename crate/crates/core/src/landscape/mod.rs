//! Excitation landscapes `P(α, β)` on uniform grids.

mod grid;
mod io;

use std::fmt;
use std::str::FromStr;

pub use grid::Grid;
#[cfg(feature = "png")]
pub use io::write_png;
pub use io::{load_csv, read_csv, render_heatmap, save_csv, write_csv, write_pgm};

use crate::catalog::{Model, ModelClass, TruncationPolicy};
use crate::dynamics::{transition_probability, IntegratorConfig, Picture};
use crate::error::{Error, Result};

/// Uniform axis `start, start + h, ..., stop` with `count ≥ 2` nodes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Axis {
    start: f64,
    stop: f64,
    count: usize,
}

impl Axis {
    pub fn new(start: f64, stop: f64, count: usize) -> Result<Self> {
        if !start.is_finite() || !stop.is_finite() {
            return Err(Error::Contract(format!(
                "axis bounds must be finite, got {start}:{stop}"
            )));
        }
        if stop <= start {
            return Err(Error::Contract(format!(
                "axis needs start < stop, got {start}:{stop}"
            )));
        }
        if count < 2 {
            return Err(Error::Contract(format!(
                "axis needs at least 2 nodes, got {count}"
            )));
        }
        Ok(Axis { start, stop, count })
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn stop(&self) -> f64 {
        self.stop
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn step(&self) -> f64 {
        (self.stop - self.start) / (self.count - 1) as f64
    }

    /// Node `i`. Refining `count → 2 count − 1` reproduces the old nodes exactly.
    pub fn value(&self, i: usize) -> f64 {
        if i + 1 == self.count {
            self.stop
        } else {
            self.start + (self.stop - self.start) * i as f64 / (self.count - 1) as f64
        }
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.count).map(|i| self.value(i)).collect()
    }

    /// Axis with the same bounds and `count` nodes.
    pub fn with_count(&self, count: usize) -> Result<Axis> {
        Axis::new(self.start, self.stop, count)
    }

    /// `start = −stop`.
    pub fn is_symmetric(&self) -> bool {
        self.start == -self.stop
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.start, self.stop, self.count)
    }
}

impl FromStr for Axis {
    type Err = Error;

    /// Parses `start:stop:count`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(Error::Contract(format!(
                "axis '{s}' is not start:stop:count"
            )));
        }
        let num = |p: &str| {
            p.parse::<f64>()
                .map_err(|_| Error::Contract(format!("axis '{s}': bad number '{p}'")))
        };
        let count = parts[2]
            .parse::<usize>()
            .map_err(|_| Error::Contract(format!("axis '{s}': bad count '{}'", parts[2])))?;
        Axis::new(num(parts[0])?, num(parts[1])?, count)
    }
}

/// What a landscape was computed from.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LandscapeMeta {
    pub class: Option<ModelClass>,
    pub row: Option<u8>,
    pub picture: Option<Picture>,
    pub config: Option<IntegratorConfig>,
    pub policy: Option<TruncationPolicy>,
}

/// Probabilities on an `(n_beta, n_alpha)` grid; row `i` is `β_i`, column `j` is `α_j`.
#[derive(Clone, Debug, PartialEq)]
pub struct Landscape {
    values: Grid,
    alpha: Axis,
    beta: Axis,
    pub meta: LandscapeMeta,
}

impl Landscape {
    pub fn new(values: Grid, alpha: Axis, beta: Axis, meta: LandscapeMeta) -> Result<Self> {
        if values.shape() != (beta.count(), alpha.count()) {
            return Err(Error::Contract(format!(
                "values are {:?} but axes need ({}, {})",
                values.shape(),
                beta.count(),
                alpha.count()
            )));
        }
        if let Some(k) = values.data().iter().position(|v| !(0.0..=1.0).contains(v)) {
            let (i, j) = (k / alpha.count(), k % alpha.count());
            return Err(Error::Contract(format!(
                "probability {} at (row {i}, col {j}) is outside [0, 1]",
                values.data()[k]
            )));
        }
        Ok(Landscape {
            values,
            alpha,
            beta,
            meta,
        })
    }

    pub fn values(&self) -> &Grid {
        &self.values
    }

    pub fn alpha_axis(&self) -> Axis {
        self.alpha
    }

    pub fn beta_axis(&self) -> Axis {
        self.beta
    }

    pub fn n_alpha(&self) -> usize {
        self.alpha.count()
    }

    pub fn n_beta(&self) -> usize {
        self.beta.count()
    }

    /// `P(α_j, β_i)`.
    pub fn get(&self, i_beta: usize, j_alpha: usize) -> f64 {
        self.values.get(i_beta, j_alpha)
    }

    /// Largest `|P(α, β) − P(α, −β)|`; contract error unless the β axis is symmetric.
    pub fn beta_asymmetry(&self) -> Result<f64> {
        if !self.beta.is_symmetric() {
            return Err(Error::Contract(format!(
                "beta axis {} is not symmetric",
                self.beta
            )));
        }
        let n = self.n_beta();
        let mut worst: f64 = 0.0;
        for i in 0..n / 2 {
            for j in 0..self.n_alpha() {
                worst = worst.max((self.get(i, j) - self.get(n - 1 - i, j)).abs());
            }
        }
        Ok(worst)
    }
}

/// Evaluates `p(α, β)` on every node, in parallel when enabled, and assembles
/// the grid in order. The first failure in grid order is reported with its
/// coordinates.
pub fn scan_fn<F>(alpha: Axis, beta: Axis, meta: LandscapeMeta, p: F) -> Result<Landscape>
where
    F: Fn(f64, f64) -> Result<f64> + Sync,
{
    let (na, nb) = (alpha.count(), beta.count());
    let eval = |k: usize| {
        let (a, b) = (alpha.value(k % na), beta.value(k / na));
        p(a, b).map_err(|e| Error::ScanPoint {
            alpha: a,
            beta: b,
            source: Box::new(e),
        })
    };
    #[cfg(feature = "parallel")]
    let results: Vec<Result<f64>> = {
        use rayon::prelude::*;
        (0..na * nb).into_par_iter().map(eval).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let results: Vec<Result<f64>> = (0..na * nb).map(eval).collect();
    let data = results.into_iter().collect::<Result<Vec<f64>>>()?;
    Landscape::new(Grid::new(nb, na, data)?, alpha, beta, meta)
}

/// Numeric landscape of `model` over the given axes.
pub fn scan(
    model: &Model,
    alpha: Axis,
    beta: Axis,
    picture: Picture,
    cfg: &IntegratorConfig,
) -> Result<Landscape> {
    cfg.validate()?;
    let meta = LandscapeMeta {
        class: Some(model.class()),
        row: model.row(),
        picture: Some(picture),
        config: Some(*cfg),
        policy: Some(model.policy()),
    };
    scan_fn(alpha, beta, meta, |a, b| {
        if a < 0.0 {
            return Err(Error::Contract(format!(
                "alpha must be non-negative, got {a}"
            )));
        }
        transition_probability(&model.at(a, b), picture, cfg)
    })
}

/// Landscape of a catalog row with its default truncation.
pub fn scan_catalog(
    class: ModelClass,
    row: u8,
    alpha: Axis,
    beta: Axis,
    picture: Picture,
    cfg: &IntegratorConfig,
) -> Result<Landscape> {
    let model = crate::catalog::Catalog::standard().model(class, row)?;
    scan(&model, alpha, beta, picture, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{aeh_exact, rabi_resonant};
    use crate::catalog::Catalog;

    #[test]
    fn axis_parsing() {
        let a: Axis = "0:3:101".parse().unwrap();
        assert_eq!((a.start(), a.stop(), a.count()), (0.0, 3.0, 101));
        assert_eq!(a.value(100), 3.0);
        assert_eq!(a.to_string(), "0:3:101");
        assert!("0:3".parse::<Axis>().is_err());
        assert!("0:3:1".parse::<Axis>().is_err());
        assert!("3:0:5".parse::<Axis>().is_err());
        assert!("a:1:5".parse::<Axis>().is_err());
    }

    #[test]
    fn refinement_reuses_nodes() {
        let coarse = Axis::new(-2.0, 2.0, 11).unwrap();
        let fine = coarse.with_count(21).unwrap();
        for i in 0..11 {
            assert_eq!(coarse.value(i).to_bits(), fine.value(2 * i).to_bits());
        }
    }

    #[test]
    fn out_of_range_rejected() {
        let ax = Axis::new(0.0, 1.0, 2).unwrap();
        let g = Grid::new(2, 2, vec![0.0, 0.5, 1.2, 0.1]).unwrap();
        assert!(Landscape::new(g, ax, ax, LandscapeMeta::default()).is_err());
    }

    #[test]
    fn resonant_line_is_rabi() {
        let model = Catalog::standard().model(ModelClass::Aeh, 8).unwrap();
        let alpha = Axis::new(0.05, 3.0, 9).unwrap();
        let beta = Axis::new(-2.0, 2.0, 5).unwrap();
        let map = scan(
            &model,
            alpha,
            beta,
            Picture::Detuning,
            &IntegratorConfig::default(),
        )
        .unwrap();
        for j in 0..alpha.count() {
            assert!((map.get(2, j) - rabi_resonant(alpha.value(j))).abs() < 1e-5);
            for i in 0..beta.count() {
                assert!((map.get(i, j) - aeh_exact(alpha.value(j), beta.value(i))).abs() < 1e-5);
            }
        }
        assert!(map.beta_asymmetry().unwrap() < 1e-6);
        assert_eq!(map.meta.row, Some(8));
    }

    #[test]
    fn failing_point_is_named() {
        let alpha = Axis::new(0.0, 1.0, 3).unwrap();
        let beta = Axis::new(0.0, 1.0, 2).unwrap();
        let err = scan_fn(alpha, beta, LandscapeMeta::default(), |a, b| {
            if a == 0.5 && b == 1.0 {
                Err(Error::Contract("boom".into()))
            } else {
                Ok(0.0)
            }
        })
        .unwrap_err();
        match err {
            Error::ScanPoint { alpha, beta, .. } => assert_eq!((alpha, beta), (0.5, 1.0)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn order_is_row_major_in_beta() {
        let alpha = Axis::new(0.0, 1.0, 4).unwrap();
        let beta = Axis::new(0.0, 1.0, 3).unwrap();
        let map = scan_fn(alpha, beta, LandscapeMeta::default(), |a, b| {
            Ok(0.5 * a + 0.25 * b)
        })
        .unwrap();
        assert_eq!(map.values().shape(), (3, 4));
        assert_eq!(map.get(2, 0), 0.25);
        assert_eq!(map.get(0, 3), 0.5);
    }
}
