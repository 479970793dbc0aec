use alloc::string::String;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A constructor or operation received a value outside its domain.
    InvalidParameter { name: &'static str, reason: String },
    /// Two spectra or curves that must share a grid do not.
    GridMismatch,
    /// A frequency grid cannot be mapped onto the bins of a time record.
    IncompatibleGrid(String),
    /// The model phase is undefined at 0 Hz.
    ZeroFrequency,
    /// A fit or objective window contains no samples.
    EmptyBand { f_min: f64, f_max: f64 },
    /// All-zero or otherwise degenerate data where a nonzero signal is needed.
    Degenerate(&'static str),
    /// The time record cannot hold the delayed and dispersed signal.
    RecordTooShort { required_s: f64, actual_s: f64 },
    NonFinite(&'static str),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidParameter { name, reason } => write!(f, "invalid {name}: {reason}"),
            Error::GridMismatch => f.write_str("frequency grids differ"),
            Error::IncompatibleGrid(why) => write!(f, "incompatible frequency grid: {why}"),
            Error::ZeroFrequency => f.write_str("grid contains 0 Hz where the phase model is undefined"),
            Error::EmptyBand { f_min, f_max } => {
                write!(f, "no samples inside band [{f_min:e}, {f_max:e}] Hz")
            }
            Error::Degenerate(what) => write!(f, "degenerate input: {what}"),
            Error::RecordTooShort {
                required_s,
                actual_s,
            } => write!(
                f,
                "time record too short: {actual_s:e} s available, at least {required_s:e} s required"
            ),
            Error::NonFinite(what) => write!(f, "non-finite value encountered in {what}"),
        }
    }
}

impl core::error::Error for Error {}
