use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Exact subset enumeration was requested for too many relays.
    #[error(
        "capacity error: exact enumeration supports at most {cap} relays, got {n}; \
         use the i.i.d. closed forms for larger networks"
    )]
    Capacity { n: usize, cap: usize },

    /// A constraint cannot be met anywhere on the search bracket.
    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("output error: {0}")]
    Output(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

pub(crate) fn check_probability(name: &str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::domain(format!("{name} must lie in [0, 1], got {p}")))
    }
}

pub(crate) fn check_open_probability(name: &str, p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("{name} must lie in (0, 1), got {p}")))
    }
}

pub(crate) fn check_gain(name: &str, g: f64) -> Result<()> {
    if g.is_finite() && g > 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "{name} must be a finite positive average gain, got {g}"
        )))
    }
}

pub(crate) fn check_threshold(name: &str, t: f64) -> Result<()> {
    if t >= 0.0 && !t.is_nan() {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "{name} must be non-negative, got {t}"
        )))
    }
}
