//! Class number, regulator and unit norm of real quadratic fields.
//!
//! The production route is analytic: `h = sqrt(D) L(1, chi_D) / (2 R)` with
//! `R` from the continued fraction of `omega_D` and `L(1, chi_D)` from the
//! finite sine-log sum. [`forms`] is an independent oracle by cycle counting.

pub mod cf;
pub mod forms;
pub mod lseries;

use crate::arith::Discriminant;
use crate::error::{Error, Result};

pub use cf::{cf_expand, regulator, unit_data, CfPeriod, UnitData};
pub use forms::{class_number_forms_oracle, count_classes, FormsCount, DEFAULT_ORACLE_BOUND};
pub use lseries::{character_table, dirichlet_l1};

pub const DEFAULT_GUARD: f64 = 0.1;

/// One computed field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldRecord {
    /// Squarefree radicand `d`.
    pub d: u64,
    /// Fundamental discriminant.
    pub disc: u64,
    pub h: u64,
    /// `ln` of the fundamental unit.
    pub regulator: f64,
    pub period_length: u64,
    pub unit_norm: i8,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticParams {
    /// Maximum accepted distance of the `h` estimate from an integer.
    pub guard: f64,
    /// Number of terms of the sine-log sum to keep. `None` keeps all of them;
    /// anything else is a deliberate precision fault.
    pub truncate_terms: Option<usize>,
}

impl Default for AnalyticParams {
    fn default() -> Self {
        AnalyticParams { guard: DEFAULT_GUARD, truncate_terms: None }
    }
}

/// Analytic evaluation with its pre-rounding diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticResult {
    pub record: FieldRecord,
    pub l_value: f64,
    /// `sqrt(D) L(1, chi) / (2R)` before rounding.
    pub estimate: f64,
    /// Distance of `estimate` to the nearest integer.
    pub distance: f64,
}

pub fn class_number_analytic(d: Discriminant) -> Result<FieldRecord> {
    Ok(analyze(d, &AnalyticParams::default())?.record)
}

pub fn analyze(d: Discriminant, params: &AnalyticParams) -> Result<AnalyticResult> {
    let unit = unit_data(d)?;
    if !(unit.regulator > 0.0) {
        return Err(Error::Consistency(format!("non-positive regulator at D={d}")));
    }
    // half of sqrt(D) L(1, chi)
    let half_sum = lseries::half_log_sine_sum(d, params.truncate_terms)?;
    let estimate = half_sum / unit.regulator;
    let nearest = estimate.round();
    let distance = (estimate - nearest).abs();
    if !(distance <= params.guard) || nearest < 1.0 {
        return Err(Error::RoundingGuardViolation {
            radicand: d.radicand(),
            discriminant: d.get(),
            estimate,
            distance,
            guard: params.guard,
        });
    }
    let record = FieldRecord {
        d: d.radicand(),
        disc: d.get(),
        h: nearest as u64,
        regulator: unit.regulator,
        period_length: unit.period_length as u64,
        unit_norm: unit.unit_norm,
    };
    Ok(AnalyticResult {
        record,
        l_value: 2.0 * half_sum / (d.get() as f64).sqrt(),
        estimate,
        distance,
    })
}
