//! Pulse-shape library and the Delos-Thorson construction of class members,
//! starting either from a Rabi-frequency envelope or from a detuning shape.

mod detuning;
mod model;
pub mod quadrature;
mod shape;
mod table;

use std::f64::consts::PI;
use std::io::Write;
use std::sync::{Arc, OnceLock};

pub use detuning::{model_from_detuning, pair_from_detuning, DetuningOptions};
pub use model::{
    DetuningSource, Model, ModelClass, ModelPair, StueckelbergClass, TruncationPolicy,
    DEFAULT_GUARD, DEFAULT_TAIL_EPS,
};
pub use shape::{Curve, Domain, IntegralSource, PulseShape};

use crate::error::{Error, Result};
use table::{curve, ListedForms};

/// Verdict on a closed form listed with a catalog row.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FormulaCheck {
    NotListed,
    Accepted { max_deviation: f64 },
    Rejected { max_deviation: f64 },
}

impl FormulaCheck {
    pub fn accepted(&self) -> bool {
        matches!(self, FormulaCheck::Accepted { .. })
    }
}

/// Outcome of checking one catalog row.
#[derive(Clone, Debug, PartialEq)]
pub struct AuditRecord {
    pub row: u8,
    /// `|∫f − π|`, by quadrature.
    pub area_error: f64,
    /// Text of the listed `s(x)`.
    pub listed_s: &'static str,
    /// The listed `s(x)`, judged by its derivative, its value at 0 and its
    /// agreement with quadrature at the edge of the probe range.
    pub listed_integral: FormulaCheck,
    /// Derivative defect of the `s` actually used (closed form or quadrature).
    pub derivative_defect: f64,
    pub symmetry_defect: f64,
    /// Listed (g, phase) for the linear class against `f s`, `s²/2`.
    pub lmsz_listed: FormulaCheck,
    /// Listed (g, phase) for the tangent class against `f tan s`, `−ln cos s`.
    pub aeh_listed: FormulaCheck,
}

/// One catalog row after the audit.
#[derive(Clone)]
pub struct CatalogEntry {
    pub shape: PulseShape,
    pub audit: AuditRecord,
    lmsz: Option<(Curve, Curve)>,
    aeh: Option<(Curve, Curve)>,
}

impl std::fmt::Debug for CatalogEntry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CatalogEntry")
            .field("shape", &self.shape)
            .field("audit", &self.audit)
            .finish()
    }
}

/// The sixteen tabulated envelopes, immutable once built.
pub struct Catalog {
    entries: Vec<CatalogEntry>,
}

const AUDIT_TOL: f64 = 1e-6;
const LISTED_TOL: f64 = 1e-9;

impl Catalog {
    /// The shared, lazily built catalog.
    pub fn standard() -> &'static Catalog {
        static CATALOG: OnceLock<Catalog> = OnceLock::new();
        CATALOG.get_or_init(Catalog::build)
    }

    fn build() -> Catalog {
        let entries = table::rows().into_iter().map(build_entry).collect();
        Catalog { entries }
    }

    pub fn entries(&self) -> &[CatalogEntry] {
        &self.entries
    }

    pub fn entry(&self, row: u8) -> Result<&CatalogEntry> {
        if row == 0 {
            return Err(Error::UnknownRow(row));
        }
        self.entries
            .get(row as usize - 1)
            .ok_or(Error::UnknownRow(row))
    }

    pub fn shape(&self, row: u8) -> Result<&PulseShape> {
        Ok(&self.entry(row)?.shape)
    }

    /// Amplitude-free member of `class` for `row`, on the default window.
    pub fn model(&self, class: ModelClass, row: u8) -> Result<Model> {
        let entry = self.entry(row)?;
        self.model_with(
            class,
            row,
            TruncationPolicy::default_for(class, entry.shape.domain()),
        )
    }

    pub fn model_with(
        &self,
        class: ModelClass,
        row: u8,
        policy: TruncationPolicy,
    ) -> Result<Model> {
        let entry = self.entry(row)?;
        let listed = match class {
            ModelClass::Lmsz => entry
                .lmsz
                .clone()
                .filter(|_| entry.audit.lmsz_listed.accepted()),
            ModelClass::Aeh => entry
                .aeh
                .clone()
                .filter(|_| entry.audit.aeh_listed.accepted()),
        };
        match listed {
            Some((g, phase)) => Model::assemble(
                class,
                entry.shape.clone(),
                g,
                phase,
                DetuningSource::Tabulated,
                policy,
            ),
            None => Model::compose(class, entry.shape.clone(), policy),
        }
    }

    /// Writes the machine-readable listing: `row,name,domain_kind,has_closed_s`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "row,name,domain_kind,has_closed_s")?;
        for e in &self.entries {
            writeln!(
                out,
                "{},{},{},{}",
                e.audit.row,
                e.shape.name(),
                e.shape.domain().kind(),
                e.shape.source() == IntegralSource::ClosedForm
            )?;
        }
        Ok(())
    }
}

fn check_pair(shape: &PulseShape, class: ModelClass, listed: &Option<ListedForms>) -> FormulaCheck {
    let Some((g, phase)) = listed else {
        return FormulaCheck::NotListed;
    };
    // Stay clear of the tangent poles at the finite edges.
    let worst = shape
        .probe_points()
        .into_iter()
        .map(|x| {
            let s = shape.s(x);
            let g_ref = shape.f(x) * class.theta(s);
            let p_ref = class.phase_of_s(s);
            let dg = (g(x) - g_ref).abs() / g_ref.abs().max(1.0);
            let dp = (phase(x) - p_ref).abs() / p_ref.abs().max(1.0);
            dg.max(dp)
        })
        .fold(0.0, f64::max);
    if worst <= LISTED_TOL {
        FormulaCheck::Accepted {
            max_deviation: worst,
        }
    } else {
        FormulaCheck::Rejected {
            max_deviation: worst,
        }
    }
}

fn build_entry(def: table::RowDef) -> CatalogEntry {
    let listed = PulseShape::closed(def.name, curve(def.f), curve(def.s), def.domain);
    let reach = match def.domain {
        Domain::Finite { half_width } => half_width,
        Domain::Infinite => 50.0,
    };
    let quad = quadrature::integrate(def.f, 0.0, reach, 1e-13);
    let deviation = listed
        .derivative_defect()
        .max((listed.s(0.0)).abs())
        .max((listed.s(reach) - quad).abs());
    let listed_integral = if deviation <= AUDIT_TOL {
        FormulaCheck::Accepted {
            max_deviation: deviation,
        }
    } else {
        FormulaCheck::Rejected {
            max_deviation: deviation,
        }
    };
    let mut shape = if listed_integral.accepted() {
        listed
    } else {
        PulseShape::from_envelope(def.name, curve(def.f), def.domain)
    };
    shape.row = Some(def.row);
    shape.formula = def.formula.to_string();

    let audit = AuditRecord {
        row: def.row,
        area_error: (shape.area() - PI).abs(),
        listed_s: def.s_formula,
        listed_integral,
        derivative_defect: shape.derivative_defect(),
        symmetry_defect: shape.symmetry_defect(),
        lmsz_listed: check_pair(&shape, ModelClass::Lmsz, &def.lmsz),
        aeh_listed: check_pair(&shape, ModelClass::Aeh, &def.aeh),
    };
    let wrap = |p: Option<ListedForms>| p.map(|(g, ph)| (curve(g), curve(ph)));
    CatalogEntry {
        shape,
        audit,
        lmsz: wrap(def.lmsz),
        aeh: wrap(def.aeh),
    }
}

/// Table member `row` of `class` with physical amplitudes.
pub fn catalog_model(
    class: ModelClass,
    row: u8,
    omega0: f64,
    delta0: f64,
    tau: f64,
) -> Result<ModelPair> {
    if !(tau > 0.0) {
        return Err(Error::Contract(format!("tau must be positive, got {tau}")));
    }
    Ok(Catalog::standard()
        .model(class, row)?
        .with_amplitudes(omega0, delta0, tau))
}

/// Pairs an arbitrary area-π envelope with the detuning of `class`.
pub fn pair_from_shape(
    class: ModelClass,
    shape: &PulseShape,
    omega0: f64,
    delta0: f64,
    tau: f64,
) -> Result<ModelPair> {
    if !(tau > 0.0) {
        return Err(Error::Contract(format!("tau must be positive, got {tau}")));
    }
    shape.check_area(1e-4)?;
    let model = Model::compose(
        class,
        shape.clone(),
        TruncationPolicy::default_for(class, shape.domain()),
    )?;
    Ok(model.with_amplitudes(omega0, delta0, tau))
}

/// Re-windows a pair; the tail-area deficit is available on the result.
pub fn truncate(pair: &ModelPair, policy: TruncationPolicy) -> Result<ModelPair> {
    let model = pair.model.truncated(policy)?;
    Ok(ModelPair {
        model: Arc::new(model),
        ..pair.clone()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn row_one_lmsz() {
        let m = Catalog::standard().model(ModelClass::Lmsz, 1).unwrap();
        assert_eq!(m.source(), DetuningSource::Tabulated);
        for &x in &[-1.2, -0.3, 0.0, 0.8, 1.5] {
            assert_eq!(m.f(x), 1.0);
            assert_eq!(m.s(x), x);
            assert_eq!(m.g(x), x);
            assert_eq!(m.phase(x), 0.5 * x * x);
        }
    }

    #[test]
    fn row_four_lmsz() {
        let m = Catalog::standard().model(ModelClass::Lmsz, 4).unwrap();
        for &x in &[-1.2, 0.1, 0.9] {
            assert!(close(m.g(x), PI * PI / 8.0 * (2.0 * x).sin(), 1e-15));
            assert!(close(m.phase(x), PI * PI / 8.0 * x.sin().powi(2), 1e-15));
        }
    }

    #[test]
    fn row_eight_aeh() {
        let m = Catalog::standard().model(ModelClass::Aeh, 8).unwrap();
        for &x in &[-3.0, 0.2, 4.0] {
            assert!(close(m.g(x), x.tanh(), 1e-15));
            assert!(close(m.phase(x), x.cosh().ln(), 1e-14));
        }
    }

    #[test]
    fn unknown_row() {
        assert_eq!(
            Catalog::standard().model(ModelClass::Aeh, 17).unwrap_err(),
            Error::UnknownRow(17)
        );
        assert_eq!(
            Catalog::standard().entry(0).unwrap_err(),
            Error::UnknownRow(0)
        );
    }

    #[test]
    fn audit_flags_the_inconsistent_listings() {
        let cat = Catalog::standard();
        let rejected: Vec<u8> = cat
            .entries()
            .iter()
            .filter(|e| !e.audit.listed_integral.accepted())
            .map(|e| e.audit.row)
            .collect();
        assert_eq!(rejected, vec![11, 14, 15]);
        assert!(!cat.entry(3).unwrap().audit.lmsz_listed.accepted());
        assert!(cat.entry(3).unwrap().audit.aeh_listed.accepted());
        assert!(cat.entry(10).unwrap().audit.listed_integral.accepted());
        // Rejected listings fall back to composition.
        assert_eq!(
            cat.model(ModelClass::Lmsz, 3).unwrap().source(),
            DetuningSource::Composed
        );
    }

    #[test]
    fn aeh_constant_shape_gives_tangent_detuning() {
        let flat = PulseShape::closed(
            "flat",
            Arc::new(|_| 1.0),
            Arc::new(|x| x),
            Domain::Finite {
                half_width: FRAC_PI_2,
            },
        );
        let pair = pair_from_shape(ModelClass::Aeh, &flat, 1.0, 1.0, 1.0).unwrap();
        for &x in &[-1.0f64, 0.3, 1.2] {
            assert!(close(pair.model.g(x), x.tan(), 1e-15));
        }
    }

    #[test]
    fn aeh_cosine_shape() {
        let shape = Catalog::standard().shape(4).unwrap();
        let pair = pair_from_shape(ModelClass::Aeh, shape, 1.0, 2.0, 1.0).unwrap();
        for &x in &[-1.0f64, 0.3, 1.2] {
            let expected = 2.0 * FRAC_PI_2 * x.cos() * (FRAC_PI_2 * x.sin()).tan();
            assert!(close(pair.drive(x).delta, expected, 1e-12));
        }
    }

    #[test]
    fn lmsz_sech_shape() {
        let shape = Catalog::standard().shape(8).unwrap();
        let pair = pair_from_shape(ModelClass::Lmsz, shape, 1.0, 1.0, 1.0).unwrap();
        for &x in &[-2.0f64, 0.5, 3.0] {
            let a = x.sinh().atan();
            assert!(close(pair.model.g(x), a / x.cosh(), 1e-15));
            assert!(close(pair.model.phase(x), 0.5 * a * a, 1e-15));
        }
    }

    #[test]
    fn pair_from_shape_rejects_wrong_area() {
        let wide = PulseShape::closed(
            "wide",
            Arc::new(|_| 1.1),
            Arc::new(|x| 1.1 * x),
            Domain::Finite {
                half_width: FRAC_PI_2,
            },
        );
        assert!(matches!(
            pair_from_shape(ModelClass::Lmsz, &wide, 1.0, 1.0, 1.0),
            Err(Error::Contract(_))
        ));
        let fixed = wide.renormalized().unwrap();
        assert!(pair_from_shape(ModelClass::Lmsz, &fixed, 1.0, 1.0, 1.0).is_ok());
    }

    #[test]
    fn sech_tail_truncation() {
        let m = Catalog::standard().model(ModelClass::Aeh, 8).unwrap();
        let x_max = m.span().hi;
        // Independent: π/2 − arctan(sinh x) = ε.
        let expected = (FRAC_PI_2 - DEFAULT_TAIL_EPS).tan().asinh();
        assert!((x_max - expected).abs() < 1e-6, "{x_max} vs {expected}");
        assert!((m.tail_deficit() - 2.0 * DEFAULT_TAIL_EPS).abs() < 1e-12);
    }

    #[test]
    fn constant_shape_untouched_by_tail_bound() {
        let m = Catalog::standard()
            .model_with(
                ModelClass::Lmsz,
                1,
                TruncationPolicy::TailArea { eps: 1e-8 },
            )
            .unwrap();
        assert_eq!(m.span().hi, FRAC_PI_2);
        assert_eq!(m.tail_deficit(), 0.0);
    }

    #[test]
    fn guard_on_tangent_row() {
        let m = Catalog::standard().model(ModelClass::Aeh, 1).unwrap();
        assert_eq!(m.span().lo, -FRAC_PI_2 + DEFAULT_GUARD);
        assert_eq!(m.span().hi, FRAC_PI_2 - DEFAULT_GUARD);
        assert!(m.has_endpoint_closure());
        assert!((m.tail_deficit() - 2.0 * DEFAULT_GUARD).abs() < 1e-12);
        let bare = m.truncated(TruncationPolicy::Full).unwrap();
        assert!(bare.has_pole_at_edge());
    }

    #[test]
    fn experimental_window_reports_deficit() {
        let pair = catalog_model(ModelClass::Lmsz, 8, 1.0, 1.0, 1.0).unwrap();
        let w = truncate(
            &pair,
            TruncationPolicy::experimental_window(ModelClass::Lmsz, 8).unwrap(),
        )
        .unwrap();
        // Window |x| <= 2.002: the missing area is 2 (π/2 − arctan sinh 2.002).
        let half = 88.9 / 22.2 / 2.0;
        let expected = 2.0 * (FRAC_PI_2 - f64::sinh(half).atan());
        assert!((w.model.tail_deficit() - expected).abs() < 1e-12);
        assert!(w.model.tail_deficit() > 0.4);
    }

    #[test]
    fn listing_csv() {
        let mut buf = Vec::new();
        Catalog::standard().write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines.len(), 17);
        assert_eq!(lines[1], "1,rectangular,finite,true");
        assert_eq!(lines[11], "11,sech-fourth,infinite,false");
    }
}
