use std::fmt;
use std::path::PathBuf;

/// A single violated configuration invariant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldError {
    pub field: String,
    pub message: String,
}

impl fmt::Display for FieldError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

/// Every invariant violation found while validating a configuration.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ValidationErrors(pub Vec<FieldError>);

impl ValidationErrors {
    pub(crate) fn push(&mut self, field: impl Into<String>, message: impl Into<String>) {
        self.0.push(FieldError { field: field.into(), message: message.into() });
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn fields(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(|e| e.field.as_str())
    }

    pub(crate) fn into_result<T>(self, value: T) -> Result<T, Error> {
        if self.0.is_empty() {
            Ok(value)
        } else {
            Err(Error::Validation(self))
        }
    }
}

impl fmt::Display for ValidationErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(ToString::to_string).collect();
        f.write_str(&parts.join("; "))
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Validation(ValidationErrors),

    #[error("invalid argument `{arg}`: {reason}")]
    InvalidArgument { arg: &'static str, reason: String },

    #[error("steady state did not converge after {iterations} iterations (last relative change {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("steady-state denominator for mode {mode} vanishes (|den| = {magnitude:e})")]
    DegenerateDenominator { mode: usize, magnitude: f64 },

    #[error("system is unstable: max eigenvalue real part {max_real_part:e} rad/s")]
    Unstable { max_real_part: f64 },

    #[error("eigenvalue solver failed to converge")]
    EigenSolver,

    #[error("Lyapunov operator is singular (eigenvalue pair sums to ~0)")]
    SingularLyapunov,

    #[error("Lyapunov residual {residual:e} exceeds bound {bound:e}")]
    LyapunovResidual { residual: f64, bound: f64 },

    #[error("non-physical covariance matrix: eigenvalue {eigenvalue:e} of -(beta V)^2 is negative")]
    NonPhysical { eigenvalue: f64 },

    #[error("resolvent (-i omega - A) is singular at omega = {omega:e} rad/s")]
    SingularResolvent { omega: f64 },

    #[error("I/O error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
