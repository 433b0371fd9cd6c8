use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("ill-conditioned redundancy solve (condition number {cond:.3e}){}", subsymbol_suffix(*.subsymbol))]
    IllConditioned { cond: f64, subsymbol: Option<usize> },

    #[error("construction failed: {0}")]
    Construction(String),

    #[error("channel tap at sample {tap_index} exceeds the guard of {guard_len} samples")]
    GuardViolation { tap_index: usize, guard_len: usize },

    #[error("consistency check failed: {0}")]
    Consistency(String),

    #[error("degenerate channel: frequency response is identically zero")]
    DegenerateChannel,
}

fn subsymbol_suffix(m: Option<usize>) -> String {
    match m {
        Some(m) => format!(" at sub-symbol {m}"),
        None => String::new(),
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
