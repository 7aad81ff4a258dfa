//! Registration of two landscapes by integer shifts and edge trims that
//! minimize the mean squared error over their common overlap.
//!
//! The shift `(dx, dy)` moves the second map: the aligned second map samples
//! `b(i + dy, j + dx)` at pixel `(i, j)` of the first. Rows run along β
//! (row 0 is the bottom), columns along α (column 0 is the left edge).

use std::cmp::Ordering;
use std::ops::Range;

use crate::error::{Error, Result};
use crate::landscape::{Grid, Landscape};

/// Bilinear resampling of a grid onto `rows × cols` nodes spanning the same extent.
pub fn resample_grid(g: &Grid, rows: usize, cols: usize) -> Result<Grid> {
    if rows < 2 || cols < 2 {
        return Err(Error::Contract(format!(
            "resample target must be at least 2×2, got {rows}×{cols}"
        )));
    }
    if g.rows() < 2 || g.cols() < 2 {
        return Err(Error::Contract(format!(
            "cannot interpolate a {}×{} grid",
            g.rows(),
            g.cols()
        )));
    }
    let locate = |k: usize, n_out: usize, n_in: usize| {
        let u = (k * (n_in - 1)) as f64 / (n_out - 1) as f64;
        let i0 = (u.floor() as usize).min(n_in - 2);
        (i0, u - i0 as f64)
    };
    let cols_at: Vec<(usize, f64)> = (0..cols).map(|j| locate(j, cols, g.cols())).collect();
    Ok(Grid::from_fn(rows, cols, |i, j| {
        let (i0, t) = locate(i, rows, g.rows());
        let (j0, s) = cols_at[j];
        let lerp = |x: f64, y: f64, w: f64| x + w * (y - x);
        let lo = lerp(g.get(i0, j0), g.get(i0, j0 + 1), s);
        let hi = lerp(g.get(i0 + 1, j0), g.get(i0 + 1, j0 + 1), s);
        lerp(lo, hi, t)
    }))
}

/// Landscape resampled onto `n_alpha × n_beta` nodes over the same axis bounds.
pub fn resample_bilinear(map: &Landscape, n_alpha: usize, n_beta: usize) -> Result<Landscape> {
    let g = resample_grid(map.values(), n_beta, n_alpha)?.map(|v| v.clamp(0.0, 1.0));
    Landscape::new(
        g,
        map.alpha_axis().with_count(n_alpha)?,
        map.beta_axis().with_count(n_beta)?,
        map.meta.clone(),
    )
}

/// Mean squared difference of two equally shaped grids.
pub fn mse(a: &Grid, b: &Grid) -> Result<f64> {
    if a.shape() != b.shape() {
        return Err(Error::Contract(format!(
            "shape mismatch: {:?} vs {:?}",
            a.shape(),
            b.shape()
        )));
    }
    Ok(overlap_mse(a, b, &AlignParams::default()).expect("non-empty grids overlap"))
}

/// Shifts of the second map and per-side trims `[left, right, bottom, top]` of each map.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct AlignParams {
    pub dx: i64,
    pub dy: i64,
    pub trims_a: [usize; 4],
    pub trims_b: [usize; 4],
}

impl AlignParams {
    pub fn shift(dx: i64, dy: i64) -> Self {
        AlignParams {
            dx,
            dy,
            ..Default::default()
        }
    }

    pub fn l1(&self) -> u64 {
        self.dx.unsigned_abs()
            + self.dy.unsigned_abs()
            + self
                .trims_a
                .iter()
                .chain(&self.trims_b)
                .map(|&t| t as u64)
                .sum::<u64>()
    }

    /// Parameters for aligning `(b, a)` that pair the same pixels.
    pub fn swapped(&self) -> Self {
        AlignParams {
            dx: -self.dx,
            dy: -self.dy,
            trims_a: self.trims_b,
            trims_b: self.trims_a,
        }
    }

    fn coords(&self) -> [i64; 10] {
        let mut c = [0i64; 10];
        c[0] = self.dx;
        c[1] = self.dy;
        for k in 0..4 {
            c[2 + k] = self.trims_a[k] as i64;
            c[6 + k] = self.trims_b[k] as i64;
        }
        c
    }

    fn from_coords(c: [i64; 10]) -> Self {
        let t = |k: usize| c[k] as usize;
        AlignParams {
            dx: c[0],
            dy: c[1],
            trims_a: [t(2), t(3), t(4), t(5)],
            trims_b: [t(6), t(7), t(8), t(9)],
        }
    }
}

/// Inclusive limits on `|dx|`, `|dy|` and the trims along each axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AlignBounds {
    pub max_dx: usize,
    pub max_dy: usize,
    /// Limit on left and right trims.
    pub max_trim_x: usize,
    /// Limit on bottom and top trims.
    pub max_trim_y: usize,
}

impl AlignBounds {
    /// `pct` percent of each dimension, rounded down, for shifts and trims alike.
    pub fn percent(pct: f64, rows: usize, cols: usize) -> Result<Self> {
        if !(pct > 0.0 && pct <= 100.0) {
            return Err(Error::Contract(format!(
                "bounds percentage must be in (0, 100], got {pct}"
            )));
        }
        let x = (pct / 100.0 * cols as f64).floor() as usize;
        let y = (pct / 100.0 * rows as f64).floor() as usize;
        Ok(AlignBounds {
            max_dx: x,
            max_dy: y,
            max_trim_x: x,
            max_trim_y: y,
        })
    }

    pub fn contains(&self, p: &AlignParams) -> bool {
        let trims_ok = |t: &[usize; 4]| {
            t[0] <= self.max_trim_x
                && t[1] <= self.max_trim_x
                && t[2] <= self.max_trim_y
                && t[3] <= self.max_trim_y
        };
        p.dx.unsigned_abs() as usize <= self.max_dx
            && p.dy.unsigned_abs() as usize <= self.max_dy
            && trims_ok(&p.trims_a)
            && trims_ok(&p.trims_b)
    }

    fn limits(&self) -> [(i64, i64); 10] {
        let (x, y) = (self.max_trim_x as i64, self.max_trim_y as i64);
        [
            (-(self.max_dx as i64), self.max_dx as i64),
            (-(self.max_dy as i64), self.max_dy as i64),
            (0, x),
            (0, x),
            (0, y),
            (0, y),
            (0, x),
            (0, x),
            (0, y),
            (0, y),
        ]
    }
}

/// Overlap in the first map's frame.
fn overlap_axis(
    n_a: usize,
    n_b: usize,
    shift: i64,
    trim_lo_a: usize,
    trim_hi_a: usize,
    trim_lo_b: usize,
    trim_hi_b: usize,
) -> Range<usize> {
    let lo = (trim_lo_a as i64).max(trim_lo_b as i64 - shift);
    let hi = (n_a as i64 - trim_hi_a as i64).min(n_b as i64 - trim_hi_b as i64 - shift);
    if hi <= lo || hi <= 0 {
        0..0
    } else {
        lo.max(0) as usize..hi as usize
    }
}

fn overlap(a: &Grid, b: &Grid, p: &AlignParams) -> (Range<usize>, Range<usize>) {
    let rows = overlap_axis(
        a.rows(),
        b.rows(),
        p.dy,
        p.trims_a[2],
        p.trims_a[3],
        p.trims_b[2],
        p.trims_b[3],
    );
    let cols = overlap_axis(
        a.cols(),
        b.cols(),
        p.dx,
        p.trims_a[0],
        p.trims_a[1],
        p.trims_b[0],
        p.trims_b[1],
    );
    (rows, cols)
}

/// Number of pixels compared under `p`.
pub fn overlap_size(a: &Grid, b: &Grid, p: &AlignParams) -> usize {
    let (r, c) = overlap(a, b, p);
    r.len() * c.len()
}

fn overlap_mse(a: &Grid, b: &Grid, p: &AlignParams) -> Option<f64> {
    let (rows, cols) = overlap(a, b, p);
    if rows.is_empty() || cols.is_empty() {
        return None;
    }
    let mut sum = 0.0;
    for i in rows.clone() {
        let bi = (i as i64 + p.dy) as usize;
        let ra = &a.row(i)[cols.clone()];
        let off = (cols.start as i64 + p.dx) as usize;
        let rb = &b.row(bi)[off..off + cols.len()];
        sum += ra
            .iter()
            .zip(rb)
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>();
    }
    Some(sum / (rows.len() * cols.len()) as f64)
}

/// MSE over the overlap after shifting `b` and trimming both maps.
pub fn objective(a: &Grid, b: &Grid, p: &AlignParams) -> Result<f64> {
    overlap_mse(a, b, p).ok_or_else(|| Error::Domain {
        x: 0.0,
        reason: format!("empty overlap for {p:?}"),
    })
}

/// `b'(i, j) − a(i, j)` over the overlap, with rows and columns in overlap order.
pub fn difference_map(a: &Grid, b: &Grid, p: &AlignParams) -> Result<Grid> {
    let (rows, cols) = overlap(a, b, p);
    if rows.is_empty() || cols.is_empty() {
        return Err(Error::Domain {
            x: 0.0,
            reason: format!("empty overlap for {p:?}"),
        });
    }
    Ok(Grid::from_fn(rows.len(), cols.len(), |i, j| {
        let (ia, ja) = (rows.start + i, cols.start + j);
        b.get((ia as i64 + p.dy) as usize, (ja as i64 + p.dx) as usize) - a.get(ia, ja)
    }))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AlignConfig {
    /// Restart from the four shift corners in addition to the origin.
    pub multi_start: bool,
    /// Cap on full coordinate sweeps per start.
    pub max_sweeps: usize,
    pub difference_map: bool,
}

impl Default for AlignConfig {
    fn default() -> Self {
        AlignConfig {
            multi_start: true,
            max_sweeps: 200,
            difference_map: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AlignmentResult {
    pub params: AlignParams,
    /// MSE over the full common grid with no shift or trim.
    pub mse_pre: f64,
    /// MSE over the overlap at `params`.
    pub mse_post: f64,
    pub overlap_size: usize,
    pub difference_map: Option<Grid>,
}

impl AlignmentResult {
    /// `mse_pre / mse_post`; infinite when the fit is exact.
    pub fn improvement(&self) -> f64 {
        self.mse_pre / self.mse_post
    }
}

#[derive(Clone, Copy, Debug)]
struct Candidate {
    value: f64,
    params: AlignParams,
}

/// Objectives closer than this (absolute plus relative) count as ties, so
/// rounding noise never buys a shift or a trim.
const TIE_ABS: f64 = 1e-14;
const TIE_REL: f64 = 1e-9;

/// Objective, then `‖θ‖₁`, then lexicographic parameters.
fn rank(x: &Candidate, y: &Candidate) -> Ordering {
    let tie = (x.value - y.value).abs() <= TIE_ABS + TIE_REL * x.value.min(y.value);
    let by_value = if tie {
        Ordering::Equal
    } else {
        x.value.total_cmp(&y.value)
    };
    by_value
        .then_with(|| x.params.l1().cmp(&y.params.l1()))
        .then_with(|| x.params.coords().cmp(&y.params.coords()))
}

fn evaluate(a: &Grid, b: &Grid, params: AlignParams) -> Candidate {
    Candidate {
        value: overlap_mse(a, b, &params).unwrap_or(f64::INFINITY),
        params,
    }
}

/// Coordinate sweeps with step doubling; stops after a sweep with no improvement.
fn descend(
    a: &Grid,
    b: &Grid,
    start: AlignParams,
    limits: &[(i64, i64); 10],
    max_sweeps: usize,
) -> Candidate {
    let mut best = evaluate(a, b, start);
    for _ in 0..max_sweeps {
        let mut improved = false;
        for c in 0..10 {
            for dir in [1i64, -1] {
                let mut step = 1i64;
                loop {
                    let mut coords = best.params.coords();
                    let target = (coords[c] + dir * step).clamp(limits[c].0, limits[c].1);
                    if target == coords[c] {
                        break;
                    }
                    coords[c] = target;
                    let cand = evaluate(a, b, AlignParams::from_coords(coords));
                    if rank(&cand, &best) == Ordering::Less {
                        best = cand;
                        improved = true;
                        step *= 2;
                    } else if step > 1 {
                        step = 1;
                    } else {
                        break;
                    }
                }
            }
        }
        if !improved {
            break;
        }
    }
    best
}

/// Finds shifts and trims within `bounds` minimizing the overlap MSE.
///
/// Both maps must already share a grid. The search is deterministic: the
/// starting points are the origin and, with `multi_start`, the four corners
/// of the shift box; ties go to the smaller `‖θ‖₁`, then lexicographic order.
pub fn align(
    a: &Grid,
    b: &Grid,
    bounds: AlignBounds,
    cfg: &AlignConfig,
) -> Result<AlignmentResult> {
    if a.shape() != b.shape() {
        return Err(Error::Contract(format!(
            "maps must share a grid: {:?} vs {:?}",
            a.shape(),
            b.shape()
        )));
    }
    if bounds.max_dx >= a.cols()
        || bounds.max_dy >= a.rows()
        || 2 * bounds.max_trim_x >= a.cols()
        || 2 * bounds.max_trim_y >= a.rows()
    {
        return Err(Error::Contract(format!(
            "bounds {bounds:?} too large for a {:?} grid",
            a.shape()
        )));
    }
    let mse_pre = mse(a, b)?;
    let limits = bounds.limits();
    let mut starts = vec![AlignParams::default()];
    if cfg.multi_start {
        let (x, y) = (bounds.max_dx as i64, bounds.max_dy as i64);
        starts.extend(
            [(-x, -y), (-x, y), (x, -y), (x, y)].map(|(dx, dy)| AlignParams::shift(dx, dy)),
        );
    }
    starts.dedup();

    #[cfg(feature = "parallel")]
    let found: Vec<Candidate> = {
        use rayon::prelude::*;
        starts
            .par_iter()
            .map(|&s| descend(a, b, s, &limits, cfg.max_sweeps))
            .collect()
    };
    #[cfg(not(feature = "parallel"))]
    let found: Vec<Candidate> = starts
        .iter()
        .map(|&s| descend(a, b, s, &limits, cfg.max_sweeps))
        .collect();

    let best = found.into_iter().min_by(rank).expect("at least one start");
    if !best.value.is_finite() {
        return Err(Error::Contract(
            "no feasible alignment within bounds".into(),
        ));
    }
    let params = best.params;
    let difference_map = if cfg.difference_map {
        Some(difference_map(a, b, &params)?)
    } else {
        None
    };
    Ok(AlignmentResult {
        params,
        mse_pre,
        mse_post: best.value,
        overlap_size: overlap_size(a, b, &params),
        difference_map,
    })
}

/// Copy of `g` moved by `(dx, dy)`: `out(i, j) = g(i − dy, j − dx)`, `fill` where undefined.
pub fn shifted(g: &Grid, dx: i64, dy: i64, fill: f64) -> Grid {
    Grid::from_fn(g.rows(), g.cols(), |i, j| {
        let (si, sj) = (i as i64 - dy, j as i64 - dx);
        if si >= 0 && sj >= 0 && (si as usize) < g.rows() && (sj as usize) < g.cols() {
            g.get(si as usize, sj as usize)
        } else {
            fill
        }
    })
}
