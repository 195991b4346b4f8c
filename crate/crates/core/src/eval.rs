//! Tagged T-matrix values and the dispatcher over representations.

use std::fmt;
use std::str::FromStr;

use crate::closed_forms::{self, ClosedFormId, FormVariant};
use crate::error::{Result, TMatrixError};
use crate::kinematics::{born_term, EnergyState, FockPoint};
use crate::quadrature::{self, QuadratureSpec};
use crate::series::{self, SeriesOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Representation {
    /// First-order term only.
    Born,
    /// Trigonometric series in ω.
    Series,
    /// Integral over ρ ∈ [0, 1].
    Schwinger,
    /// Explicit closed form, corrected wherever the printed one fails validation.
    ClosedForm,
    /// Explicit closed form exactly as printed.
    ClosedFormPrinted,
    /// Singularity-separated form built on the auxiliary angle integrals.
    Separated,
    /// Finite sum at rational γ.
    Rational,
}

impl Representation {
    pub const ALL: [Representation; 7] = [
        Representation::Born,
        Representation::Series,
        Representation::Schwinger,
        Representation::ClosedForm,
        Representation::ClosedFormPrinted,
        Representation::Separated,
        Representation::Rational,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Representation::Born => "born",
            Representation::Series => "series",
            Representation::Schwinger => "schwinger",
            Representation::ClosedForm => "closed",
            Representation::ClosedFormPrinted => "closed-printed",
            Representation::Separated => "separated",
            Representation::Rational => "rational",
        }
    }
}

impl fmt::Display for Representation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Representation {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Representation::ALL
            .into_iter()
            .find(|r| r.name() == s)
            .ok_or_else(|| {
                format!(
                    "unknown representation '{s}' (expected one of: {})",
                    Representation::ALL.map(|r| r.name()).join(", ")
                )
            })
    }
}

/// Outcome of checking an expression against the series oracle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ValidationStatus {
    Confirmed { max_rel_dev: f64 },
    Discrepant { max_rel_dev: f64, omega_at_max: f64 },
}

impl ValidationStatus {
    pub fn is_confirmed(&self) -> bool {
        matches!(self, ValidationStatus::Confirmed { .. })
    }

    pub fn max_rel_dev(&self) -> f64 {
        match *self {
            ValidationStatus::Confirmed { max_rel_dev } => max_rel_dev,
            ValidationStatus::Discrepant { max_rel_dev, .. } => max_rel_dev,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            ValidationStatus::Confirmed { .. } => "CONFIRMED",
            ValidationStatus::Discrepant { .. } => "DISCREPANT",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Warning {
    NearBoundStatePole { distance: f64 },
    /// Value taken from the ω → π limit.
    BackwardLimit,
    /// Value extrapolated across a removable 0/0 at ω = π.
    BackwardExtrapolated,
    /// The printed expression failed validation and a corrected one was used.
    CorrectedForm,
    /// The printed expression was evaluated although it failed validation.
    PrintedFormDiscrepant,
}

impl Warning {
    pub fn flag(&self) -> &'static str {
        match self {
            Warning::NearBoundStatePole { .. } => "NEAR_POLE",
            Warning::BackwardLimit => "BACKWARD_LIMIT",
            Warning::BackwardExtrapolated => "BACKWARD_EXTRAPOLATED",
            Warning::CorrectedForm => "CORRECTED_FORM",
            Warning::PrintedFormDiscrepant => "PRINTED_DISCREPANT",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Diagnostics {
    /// Series terms or integrand evaluations spent.
    pub terms_used: Option<usize>,
    /// Absolute error estimate of the T-matrix value.
    pub abs_err_est: f64,
    pub warnings: Vec<Warning>,
    pub validation: Option<ValidationStatus>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalResult {
    pub representation: Representation,
    /// `2π q₁q₂ η / (k k′)`.
    pub prefactor: f64,
    /// Dimensionless bracket multiplying the prefactor.
    pub bracket: f64,
    pub value: f64,
    pub diagnostics: Diagnostics,
}

impl EvalResult {
    pub fn new(
        representation: Representation,
        prefactor: f64,
        bracket: f64,
        diagnostics: Diagnostics,
    ) -> Self {
        Self {
            representation,
            prefactor,
            bracket,
            value: prefactor * bracket,
            diagnostics,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EvalOptions {
    pub series: SeriesOptions,
    pub quadrature: QuadratureSpec,
}

/// Largest denominator tried when a numeric γ is matched to a rational.
pub const RATIONAL_MAX_DENOMINATOR: u32 = 64;

pub fn evaluate(
    rep: Representation,
    state: &EnergyState,
    point: &FockPoint,
    opts: &EvalOptions,
) -> Result<EvalResult> {
    match rep {
        Representation::Born => {
            let value = born_term(state, point)?;
            let prefactor = point.prefactor(state);
            Ok(EvalResult::new(
                Representation::Born,
                prefactor,
                1.0 / point.sin2_half_omega(),
                Diagnostics {
                    abs_err_est: 4.0 * f64::EPSILON * value.abs(),
                    ..Diagnostics::default()
                },
            ))
        }
        Representation::Series => series::tmatrix_series(state, point, &opts.series),
        Representation::Schwinger => quadrature::tmatrix_schwinger(state, point, &opts.quadrature),
        Representation::ClosedForm | Representation::ClosedFormPrinted => {
            let variant = if rep == Representation::ClosedForm {
                FormVariant::Verified
            } else {
                FormVariant::Printed
            };
            let id = ClosedFormId::from_gamma(state.gamma())
                .ok_or(TMatrixError::NoClosedForm(state.gamma()))?;
            closed_forms::tmatrix_explicit(id, state, point, variant)
        }
        Representation::Separated => closed_forms::tmatrix_separated(state, point),
        Representation::Rational => closed_forms::tmatrix_rational(state, point),
    }
}
