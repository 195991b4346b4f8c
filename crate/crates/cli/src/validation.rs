//! Cross-representation validation: every printed closed form and every
//! identity between representations is checked against the series.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;

use coulomb_tmatrix::closed_forms::{
    aux_half_closed, correction_note, select_y_variant, separated_bracket, validate_form,
    SeparatedReading,
};
use coulomb_tmatrix::quadrature::{integrate_aux, legendre_all, AuxKind};
use coulomb_tmatrix::series::{
    backward_bracket_limit, half_integer_sum, rational_sum_with, series_bracket, LogArgument,
};
use coulomb_tmatrix::{
    aux_integrals, born_term, coulomb_potential, fock_sum, make_energy_state, make_fock_point,
    omega_grid, project_partial_wave, rational_sum, schwinger_integral, standard_omega_grid,
    tmatrix_explicit, tmatrix_half, tmatrix_schwinger, tmatrix_separated, tmatrix_series,
    ClosedFormId, EnergyState, FormVariant, QuadratureSpec, RationalGamma, Representation,
    SeriesOptions, TMatrixError, TwoBodySystem, ValidationStatus,
};
use thiserror::Error;

/// Public operations of the core crate that a validation run must touch.
pub const OPERATIONS: [&str; 15] = [
    "kinematics::make_energy_state",
    "kinematics::make_fock_point",
    "kinematics::born_term",
    "series::fock_sum",
    "series::half_integer_sum",
    "series::rational_sum",
    "series::tmatrix_series",
    "closed_forms::tmatrix_half",
    "closed_forms::tmatrix_explicit",
    "closed_forms::aux_integrals",
    "closed_forms::tmatrix_separated",
    "quadrature::schwinger_integral",
    "quadrature::tmatrix_schwinger",
    "quadrature::integrate_aux",
    "quadrature::project_partial_wave",
];

pub const MIN_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum ValidationError {
    #[error("tolerance must be at least {MIN_TOLERANCE:e}, got {0:e}")]
    ToleranceTooSmall(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    AllConfirmed,
    Discrepancies,
    InternalFailure,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        match self {
            Outcome::AllConfirmed => 0,
            Outcome::Discrepancies => 1,
            Outcome::InternalFailure => 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FormEntry {
    pub form: ClosedFormId,
    pub printed: ValidationStatus,
    /// Present only when the printed form is discrepant.
    pub corrected: Option<ValidationStatus>,
    pub note: Option<&'static str>,
}

impl FormEntry {
    /// Confirmed as printed, or discrepant with a confirmed correction.
    pub fn passes(&self) -> bool {
        self.printed.is_confirmed() || self.corrected.is_some_and(|c| c.is_confirmed())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IdentityEntry {
    pub name: &'static str,
    pub status: ValidationStatus,
    /// Largest deviation accepted as confirmed.
    pub threshold: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportMetadata {
    pub version: &'static str,
    pub tolerance: f64,
    pub grid_points: usize,
    pub grid_lo: f64,
    pub grid_hi: f64,
    pub series_target_rel_tol: f64,
    pub series_max_terms: usize,
    pub quadrature_rel_tol: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub metadata: ReportMetadata,
    pub forms: Vec<FormEntry>,
    pub identities: Vec<IdentityEntry>,
    pub coverage: BTreeMap<&'static str, bool>,
    pub internal_failures: Vec<String>,
}

impl ValidationReport {
    pub fn outcome(&self) -> Outcome {
        if !self.internal_failures.is_empty() {
            Outcome::InternalFailure
        } else if self.forms.iter().all(|f| f.printed.is_confirmed())
            && self.identities.iter().all(|i| i.status.is_confirmed())
        {
            Outcome::AllConfirmed
        } else {
            Outcome::Discrepancies
        }
    }

    pub fn identity(&self, name: &str) -> Option<&IdentityEntry> {
        self.identities.iter().find(|i| i.name == name)
    }

    pub fn fully_covered(&self) -> bool {
        self.coverage.values().all(|&v| v)
    }
}

pub const HALF_INTEGER_SUM: &str = "half-integer sum identity";
pub const RATIONAL_HALF_ANGLE: &str = "rational-gamma sum, half-angle logarithm";
pub const RATIONAL_FULL_ANGLE: &str = "rational-gamma sum, full-angle logarithm for n/m > 1";
pub const KERNEL_BRIDGE: &str = "series and integral kernel bridge";
pub const HALF_TMATRIX: &str = "gamma=+-1/2 closed form, series and integral T-matrix";
pub const AUX_HALF: &str = "auxiliary x, y, c closed forms at gamma=+-1/2";
pub const Y_SELECTION: &str = "y-integrand selection";
pub const SEPARATED: &str = "singularity-separated form";
pub const SEPARATED_LITERAL: &str = "singularity-separated form, literal E/sin^2(w/2) reading";
pub const BACKWARD: &str = "closed forms at the backward point w = pi";
pub const BORN_TERM: &str = "Born term identity";
pub const BORN_LIMIT: &str = "Born limit";
pub const POLE_LIMIT: &str = "bound-state pole limit";
pub const PARTIAL_WAVES: &str = "partial-wave reconstruction";

/// Running maximum of a relative deviation.
struct Worst {
    dev: f64,
    at: f64,
}

impl Worst {
    fn new() -> Self {
        Self { dev: 0.0, at: f64::NAN }
    }

    fn push(&mut self, value: f64, reference: f64, omega: f64) {
        let scale = reference.abs();
        let dev = if value.is_finite() && scale > 0.0 {
            (value - reference).abs() / scale
        } else if value == reference {
            0.0
        } else {
            f64::INFINITY
        };
        self.push_dev(dev, omega);
    }

    fn push_dev(&mut self, dev: f64, omega: f64) {
        if !(dev <= self.dev) {
            self.dev = dev;
            self.at = omega;
        }
    }

    fn status(&self, tol: f64) -> ValidationStatus {
        if self.dev <= tol {
            ValidationStatus::Confirmed { max_rel_dev: self.dev }
        } else {
            ValidationStatus::Discrepant {
                max_rel_dev: self.dev,
                omega_at_max: self.at,
            }
        }
    }
}

struct Run {
    tol: f64,
    grid: Vec<f64>,
    opts: SeriesOptions,
    quad: QuadratureSpec,
    coverage: BTreeMap<&'static str, bool>,
}

type Check = Result<IdentityEntry, TMatrixError>;

impl Run {
    fn hit(&mut self, op: &'static str) {
        if let Some(v) = self.coverage.get_mut(op) {
            *v = true;
        }
    }

    fn s(&self, g: f64, w: f64) -> Result<f64, TMatrixError> {
        Ok(fock_sum(g, w, &self.opts)?.value)
    }

    fn entry(&self, name: &'static str, worst: &Worst, detail: String) -> IdentityEntry {
        self.entry_with(name, worst, self.tol, detail)
    }

    fn entry_with(&self, name: &'static str, worst: &Worst, threshold: f64, detail: String) -> IdentityEntry {
        IdentityEntry {
            name,
            status: worst.status(threshold),
            threshold,
            detail,
        }
    }

    fn on_sphere(&mut self, gamma: f64, omega: f64) -> Result<(EnergyState, coulomb_tmatrix::FockPoint), TMatrixError> {
        self.hit("kinematics::make_fock_point");
        let st = EnergyState::dimensionless(1.0, gamma)?;
        let p = make_fock_point(&st, 1.0, 1.0, omega.cos())?;
        Ok((st, p))
    }

    fn half_integer_sum(&mut self) -> Check {
        self.hit("series::fock_sum");
        self.hit("series::half_integer_sum");
        let mut w = Worst::new();
        for positive in [true, false] {
            let g = if positive { 0.5 } else { -0.5 };
            for &x in &self.grid {
                w.push(half_integer_sum(positive, x)?, self.s(g, x)?, x);
            }
        }
        Ok(self.entry(HALF_INTEGER_SUM, &w, "both signs on the standard grid".into()))
    }

    fn rational(&mut self, log_arg: LogArgument) -> Check {
        self.hit("series::rational_sum");
        let values: &[(u32, u32)] = match log_arg {
            LogArgument::HalfAngle => &[(1, 2), (1, 3), (1, 4), (2, 3), (3, 2), (5, 2), (7, 2), (7, 3)],
            LogArgument::FullAngle => &[(3, 2), (5, 2), (7, 2), (7, 3)],
        };
        let mut w = Worst::new();
        for &(n, m) in values {
            for neg in [false, true] {
                let r = RationalGamma::new(neg, n, m)?;
                for &x in &self.grid {
                    let v = match log_arg {
                        LogArgument::HalfAngle => rational_sum(r, x)?,
                        LogArgument::FullAngle => rational_sum_with(r, x, log_arg)?,
                    };
                    w.push(v, self.s(r.value(), x)?, x);
                }
            }
        }
        let list: Vec<String> = values.iter().map(|(n, m)| format!("+-{n}/{m}")).collect();
        let (name, what) = match log_arg {
            LogArgument::HalfAngle => (RATIONAL_HALF_ANGLE, "ln(2|sin((x+2k pi)/(2m))|)"),
            LogArgument::FullAngle => (RATIONAL_FULL_ANGLE, "ln(2|sin((x+2k pi)/m)|)"),
        };
        Ok(self.entry(name, &w, format!("{what} against the series for gamma in {}", list.join(", "))))
    }

    fn kernel_bridge(&mut self) -> Check {
        self.hit("quadrature::schwinger_integral");
        let mut w = Worst::new();
        let gammas = [-0.9, -0.5, 0.0, 0.3, 0.5, 1.7, 2.9];
        for &g in &gammas {
            for &x in &self.grid {
                let i = schwinger_integral(g, x)?.value;
                w.push(i * x.sin(), self.s(g, x)?, x);
            }
        }
        Ok(self.entry(KERNEL_BRIDGE, &w, format!("sin(w) I(gamma, w) against S(gamma, w) for gamma in {gammas:?}")))
    }

    fn half_tmatrix(&mut self) -> Check {
        self.hit("closed_forms::tmatrix_half");
        self.hit("series::tmatrix_series");
        self.hit("quadrature::tmatrix_schwinger");
        let mut w = Worst::new();
        for g in [0.5, -0.5] {
            for &x in &self.grid.clone() {
                let (st, p) = self.on_sphere(g, x)?;
                let series = tmatrix_series(&st, &p, &self.opts)?.value;
                let closed = tmatrix_half(&st, &p, FormVariant::Verified)?.value;
                w.push(closed, series, x);
                if g > 0.0 {
                    let integral = tmatrix_schwinger(&st, &p, &self.quad)?.value;
                    w.push(integral, series, x);
                }
            }
        }
        Ok(self.entry(
            HALF_TMATRIX,
            &w,
            "verified closed form and integral (gamma=+1/2 only) against the series".into(),
        ))
    }

    fn aux_half(&mut self) -> Check {
        self.hit("closed_forms::aux_integrals");
        self.hit("quadrature::integrate_aux");
        let mut w = Worst::new();
        for &x in &[0.1, 0.5, 1.0, 2.0, 3.0] {
            for positive in [true, false] {
                let g = if positive { 0.5 } else { -0.5 };
                let q = aux_integrals(g, x)?;
                let c = aux_half_closed(positive, x);
                for (a, b) in [(q.x_gamma, c.x_gamma), (q.y_gamma, c.y_gamma), (q.c_gamma, c.c_gamma)] {
                    w.push_dev((a - b).abs(), x);
                }
                let direct = integrate_aux(AuxKind::XGamma, g, x, &self.quad)?;
                w.push_dev((direct - c.x_gamma).abs(), x);
            }
        }
        Ok(self.entry(AUX_HALF, &w, "absolute deviation of quadrature from the closed forms".into()))
    }

    fn y_selection(&mut self) -> Check {
        let sel = select_y_variant(&self.quad)?;
        let mut w = Worst::new();
        let chosen_dev = match sel.chosen {
            AuxKind::YGammaFrozenLog => sel.frozen_log_dev,
            _ => sel.integration_variable_dev,
        };
        w.push_dev(chosen_dev, f64::NAN);
        let chosen = match sel.chosen {
            AuxKind::YGammaFrozenLog => "ln|sin(w/2)| frozen at the lower limit",
            _ => "ln|sin(phi/2)| in the integration variable",
        };
        Ok(self.entry(
            Y_SELECTION,
            &w,
            format!(
                "selected {chosen}; max |dev| from the gamma=+-1/2 closed form: \
                 integration variable {:.3e}, frozen log {:.3e}",
                sel.integration_variable_dev, sel.frozen_log_dev
            ),
        ))
    }

    fn separated(&mut self, reading: SeparatedReading) -> Check {
        self.hit("closed_forms::tmatrix_separated");
        let gammas = [0.3, -0.3, 0.5, -0.5, -1.5, 2.5, 3.7];
        let grid: Vec<f64> = self.grid.iter().step_by(7).copied().collect();
        let mut w = Worst::new();
        for &g in &gammas {
            for &x in &grid {
                let reference = series_bracket(g, x, &self.opts)?.value;
                let b = match reading {
                    SeparatedReading::Reconstructed => {
                        let (st, p) = self.on_sphere(g, x)?;
                        tmatrix_separated(&st, &p)?.bracket
                    }
                    SeparatedReading::AsPrinted => separated_bracket(g, x, reading)?,
                };
                w.push(b, reference, x);
            }
        }
        let (name, detail) = match reading {
            SeparatedReading::Reconstructed => (SEPARATED, "bracket 1/sin^2(w/2) - E/(sin(w/2)cos(w/2))"),
            SeparatedReading::AsPrinted => (SEPARATED_LITERAL, "bracket E/sin^2(w/2)"),
        };
        Ok(self.entry(name, &w, format!("{detail} for gamma in {gammas:?}")))
    }

    fn backward(&mut self) -> Check {
        self.hit("closed_forms::tmatrix_explicit");
        let mut w = Worst::new();
        for id in ClosedFormId::ALL {
            let (st, p) = self.on_sphere(id.value(), PI)?;
            let t = tmatrix_explicit(id, &st, &p, FormVariant::Verified)?;
            w.push(t.bracket, backward_bracket_limit(id.value(), &self.opts)?.value, PI);
        }
        Ok(self.entry(BACKWARD, &w, "verified forms extrapolated to w = pi against the series limit".into()))
    }

    fn born_limit(&mut self) -> Result<[IdentityEntry; 2], TMatrixError> {
        self.hit("kinematics::make_energy_state");
        self.hit("kinematics::born_term");
        let gamma = 1e-8;
        let system = TwoBodySystem::natural(1.0)?;
        let st = make_energy_state(system, -0.5)?.with_gamma(gamma)?;
        let mut direct = Worst::new();
        let mut reps = Worst::new();
        for &(k, kp, c) in &[(1.0, 2.0, 0.3), (0.5, 0.7, -0.9), (3.0, 0.2, 0.99)] {
            let p = make_fock_point(&st, k, kp, c)?;
            let born = born_term(&st, &p)?;
            direct.push(born, coulomb_potential(st.system(), k, kp, c), p.omega());
            for rep in [Representation::Series, Representation::Schwinger, Representation::Separated] {
                let v = coulomb_tmatrix::evaluate(rep, &st, &p, &Default::default())?.value;
                reps.push(v, born, p.omega());
            }
        }
        Ok([
            self.entry_with(
                BORN_TERM,
                &direct,
                1e-12,
                "Born term from Fock variables against 4 pi q1q2/|k-k'|^2".into(),
            ),
            self.entry_with(
                BORN_LIMIT,
                &reps,
                1e-6,
                "series, integral and separated representations against the Born term at gamma = 1e-8".into(),
            ),
        ])
    }

    fn pole_limit(&mut self) -> Check {
        let mut w = Worst::new();
        for eps in [1e-3, 1e-5] {
            for x in omega_grid(11, 0.5, 3.0) {
                let g = -1.0 + eps;
                let v = (1.0 + g) * self.s(g, x)?;
                // relative approach measured in units of eps
                w.push_dev((v - x.sin()).abs() / x.sin() / eps, x);
            }
        }
        let pole_ok = (1..=5).all(|n| {
            matches!(fock_sum(-(n as f64), 1.0, &self.opts), Err(TMatrixError::BoundStatePole(_)))
        });
        if !pole_ok {
            w.push_dev(f64::INFINITY, 1.0);
        }
        Ok(self.entry_with(
            POLE_LIMIT,
            &w,
            10.0,
            "|(1+gamma) S(gamma, w) - sin w| / (eps sin w) at gamma = -1+eps, eps in {1e-3, 1e-5}, \
             w in [0.5, 3]; poles raised at gamma = -1..-5"
                .into(),
        ))
    }

    fn partial_waves(&mut self) -> Check {
        self.hit("quadrature::project_partial_wave");
        let st = EnergyState::dimensionless(1.0, 0.5)?;
        let (k, kp, c) = (2.0, 0.5, 0.0);
        let pl = legendre_all(20, c);
        let mut sum = 0.0;
        for l in 0..=20u32 {
            let t = project_partial_wave(l, &st, k, kp, Representation::Series)?;
            sum += (2 * l + 1) as f64 * t.value * pl[l as usize];
        }
        let p = make_fock_point(&st, k, kp, c)?;
        let direct = tmatrix_series(&st, &p, &self.opts)?.value;
        let mut w = Worst::new();
        w.push(sum, direct, p.omega());
        Ok(self.entry_with(
            PARTIAL_WAVES,
            &w,
            1e-4,
            "Legendre sum over l <= 20 against the full T-matrix at gamma=1/2, k=2, k'=1/2, cos=0".into(),
        ))
    }
}

/// Run every check at relative tolerance `tolerance`.
pub fn run_validation(tolerance: f64) -> Result<ValidationReport, ValidationError> {
    if !(tolerance >= MIN_TOLERANCE) {
        return Err(ValidationError::ToleranceTooSmall(tolerance));
    }
    let grid = standard_omega_grid();
    let mut run = Run {
        tol: tolerance,
        grid: grid.clone(),
        opts: SeriesOptions::default(),
        quad: QuadratureSpec::default(),
        coverage: OPERATIONS.iter().map(|&op| (op, false)).collect(),
    };

    let mut forms = Vec::new();
    let mut internal_failures = Vec::new();
    for id in ClosedFormId::ALL {
        let printed = validate_form(id, FormVariant::Printed, &grid, tolerance, &run.opts);
        let corrected = match &printed {
            Ok(s) if !s.is_confirmed() => {
                Some(validate_form(id, FormVariant::Verified, &grid, tolerance, &run.opts))
            }
            _ => None,
        };
        match (printed, corrected.transpose()) {
            (Ok(printed), Ok(corrected)) => forms.push(FormEntry {
                form: id,
                printed,
                corrected,
                note: corrected.and(correction_note(id)),
            }),
            (Err(e), _) | (_, Err(e)) => internal_failures.push(format!("form {id}: {e}")),
        }
    }

    let checks: [fn(&mut Run) -> Result<Vec<IdentityEntry>, TMatrixError>; 13] = [
        |r| Ok(vec![r.half_integer_sum()?]),
        |r| Ok(vec![r.rational(LogArgument::HalfAngle)?]),
        |r| Ok(vec![r.rational(LogArgument::FullAngle)?]),
        |r| Ok(vec![r.kernel_bridge()?]),
        |r| Ok(vec![r.half_tmatrix()?]),
        |r| Ok(vec![r.aux_half()?]),
        |r| Ok(vec![r.y_selection()?]),
        |r| Ok(vec![r.separated(SeparatedReading::Reconstructed)?]),
        |r| Ok(vec![r.separated(SeparatedReading::AsPrinted)?]),
        |r| Ok(vec![r.backward()?]),
        |r| Ok(r.born_limit()?.to_vec()),
        |r| Ok(vec![r.pole_limit()?]),
        |r| Ok(vec![r.partial_waves()?]),
    ];
    let mut identities = Vec::new();
    for check in checks {
        match check(&mut run) {
            Ok(entries) => {
                for entry in entries {
                    // the two numeric oracles disagreeing is a bug, not a finding
                    if entry.name == KERNEL_BRIDGE && !entry.status.is_confirmed() {
                        internal_failures.push(format!("{}: {:?}", entry.name, entry.status));
                    }
                    identities.push(entry);
                }
            }
            Err(e) => internal_failures.push(format!("oracle error: {e}")),
        }
    }

    Ok(ValidationReport {
        metadata: ReportMetadata {
            version: env!("CARGO_PKG_VERSION"),
            tolerance,
            grid_points: grid.len(),
            grid_lo: grid[0],
            grid_hi: grid[grid.len() - 1],
            series_target_rel_tol: run.opts.target_rel_tol(),
            series_max_terms: run.opts.max_terms(),
            quadrature_rel_tol: run.quad.rel_tol(),
        },
        forms,
        identities,
        coverage: run.coverage,
        internal_failures,
    })
}

fn fmt_status(s: &ValidationStatus) -> String {
    match *s {
        ValidationStatus::Confirmed { max_rel_dev } => format!("CONFIRMED  max_rel_dev={max_rel_dev:.3e}"),
        ValidationStatus::Discrepant {
            max_rel_dev,
            omega_at_max,
        } => format!("DISCREPANT max_rel_dev={max_rel_dev:.3e} at w={omega_at_max:.4}"),
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let m = &self.metadata;
        writeln!(f, "coulomb-tmatrix validation report (version {})", m.version)?;
        writeln!(
            f,
            "tolerance {:e}; grid {} points on [{:.4}, {:.4}]; series rel tol {:e}, max terms {}; quadrature rel tol {:e}",
            m.tolerance, m.grid_points, m.grid_lo, m.grid_hi, m.series_target_rel_tol, m.series_max_terms, m.quadrature_rel_tol
        )?;
        writeln!(f)?;
        writeln!(f, "closed forms")?;
        for e in &self.forms {
            writeln!(f, "  {:<14} printed   {}", e.form.to_string(), fmt_status(&e.printed))?;
            if let Some(c) = &e.corrected {
                writeln!(f, "  {:<14} corrected {}", "", fmt_status(c))?;
            }
            if let Some(n) = e.note {
                writeln!(f, "  {:<14} note: {n}", "")?;
            }
        }
        writeln!(f)?;
        writeln!(f, "identities")?;
        for i in &self.identities {
            writeln!(f, "  {}: {} (threshold {:e})", i.name, fmt_status(&i.status), i.threshold)?;
            writeln!(f, "    {}", i.detail)?;
        }
        writeln!(f)?;
        let covered = self.coverage.values().filter(|&&v| v).count();
        writeln!(f, "coverage: {covered}/{} operations exercised", self.coverage.len())?;
        for (op, hit) in &self.coverage {
            if !hit {
                writeln!(f, "  not exercised: {op}")?;
            }
        }
        for msg in &self.internal_failures {
            writeln!(f, "INTERNAL FAILURE: {msg}")?;
        }
        let outcome = match self.outcome() {
            Outcome::AllConfirmed => "all confirmed",
            Outcome::Discrepancies => "discrepancies found",
            Outcome::InternalFailure => "internal failure",
        };
        writeln!(f, "outcome: {outcome}")
    }
}
