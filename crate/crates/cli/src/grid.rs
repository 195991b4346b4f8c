use coulomb_tmatrix::{
    evaluate, make_fock_point, EnergyState, EvalOptions, EvalResult, Representation,
    ValidationStatus,
};
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum GridError {
    #[error("{0} list is empty")]
    EmptyList(&'static str),
    #[error("{what} must be {expect}, got {value}")]
    InvalidValue {
        what: &'static str,
        expect: &'static str,
        value: f64,
    },
    #[error("no representations selected")]
    NoRepresentations,
    #[error("thread pool: {0}")]
    ThreadPool(String),
}

/// A tensor grid of momentum configurations at one energy state.
#[derive(Debug, Clone)]
pub struct GridSpec {
    state: EnergyState,
    k_values: Vec<f64>,
    k_prime_values: Vec<f64>,
    cos_theta_values: Vec<f64>,
    representations: Vec<Representation>,
    options: EvalOptions,
}

fn check_list(
    name: &'static str,
    values: &[f64],
    ok: impl Fn(f64) -> bool,
    expect: &'static str,
) -> Result<(), GridError> {
    if values.is_empty() {
        return Err(GridError::EmptyList(name));
    }
    match values.iter().find(|&&v| !ok(v)) {
        Some(&value) => Err(GridError::InvalidValue {
            what: name,
            expect,
            value,
        }),
        None => Ok(()),
    }
}

impl GridSpec {
    pub fn new(
        state: EnergyState,
        k_values: Vec<f64>,
        k_prime_values: Vec<f64>,
        cos_theta_values: Vec<f64>,
        representations: Vec<Representation>,
        options: EvalOptions,
    ) -> Result<Self, GridError> {
        let positive = |v: f64| v > 0.0 && v.is_finite();
        check_list("k", &k_values, positive, "positive and finite")?;
        check_list("k'", &k_prime_values, positive, "positive and finite")?;
        check_list("cos(theta)", &cos_theta_values, |c| (-1.0..=1.0).contains(&c), "in [-1, 1]")?;
        if representations.is_empty() {
            return Err(GridError::NoRepresentations);
        }
        Ok(Self {
            state,
            k_values,
            k_prime_values,
            cos_theta_values,
            representations,
            options,
        })
    }

    pub fn state(&self) -> &EnergyState {
        &self.state
    }

    pub fn representations(&self) -> &[Representation] {
        &self.representations
    }

    /// Number of rows `run_grid` will produce.
    pub fn len(&self) -> usize {
        self.k_values.len()
            * self.k_prime_values.len()
            * self.cos_theta_values.len()
            * self.representations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridRow {
    pub k: f64,
    pub k_prime: f64,
    pub cos_theta: f64,
    pub omega: Option<f64>,
    pub eta: Option<f64>,
    pub gamma: f64,
    pub representation: Representation,
    pub value: Option<f64>,
    pub abs_err_est: Option<f64>,
    pub flags: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridOutput {
    pub gamma: f64,
    pub kappa: f64,
    pub energy: f64,
    pub rows: Vec<GridRow>,
}

fn result_flags(r: &EvalResult) -> Vec<String> {
    let mut flags: Vec<String> = r.diagnostics.warnings.iter().map(|w| w.flag().to_string()).collect();
    if let Some(ValidationStatus::Discrepant { .. }) = r.diagnostics.validation {
        flags.push("DISCREPANT".to_string());
    }
    flags
}

fn evaluate_row(
    state: &EnergyState,
    k: f64,
    kp: f64,
    c: f64,
    rep: Representation,
    opts: &EvalOptions,
) -> GridRow {
    let mut row = GridRow {
        k,
        k_prime: kp,
        cos_theta: c,
        omega: None,
        eta: None,
        gamma: state.gamma(),
        representation: rep,
        value: None,
        abs_err_est: None,
        flags: Vec::new(),
    };
    let point = match make_fock_point(state, k, kp, c) {
        Ok(p) => p,
        Err(e) => {
            row.flags.push(e.code().to_string());
            return row;
        }
    };
    row.omega = Some(point.omega());
    row.eta = Some(point.eta());
    match evaluate(rep, state, &point, opts) {
        Ok(r) => {
            row.flags = result_flags(&r);
            if r.value.is_finite() {
                row.value = Some(r.value);
                row.abs_err_est = Some(r.diagnostics.abs_err_est);
            } else {
                row.flags.push("NON_FINITE".to_string());
            }
        }
        Err(e) => row.flags.push(e.code().to_string()),
    }
    row
}

/// Evaluate every (k, k′, cos θ, representation) combination.
///
/// Rows come out in lexicographic order of the input lists regardless of
/// `threads`; `threads = 0` uses rayon's default pool size.
pub fn run_grid(spec: &GridSpec, threads: usize) -> Result<GridOutput, GridError> {
    let mut jobs = Vec::with_capacity(spec.len());
    for &k in &spec.k_values {
        for &kp in &spec.k_prime_values {
            for &c in &spec.cos_theta_values {
                for &rep in &spec.representations {
                    jobs.push((k, kp, c, rep));
                }
            }
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| GridError::ThreadPool(e.to_string()))?;
    let rows = pool.install(|| {
        jobs.par_iter()
            .map(|&(k, kp, c, rep)| evaluate_row(&spec.state, k, kp, c, rep, &spec.options))
            .collect()
    });
    Ok(GridOutput {
        gamma: spec.state.gamma(),
        kappa: spec.state.kappa(),
        energy: spec.state.energy(),
        rows,
    })
}
