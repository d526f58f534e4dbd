use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] djm_core::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub const EXIT_OTHER: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_CALIBRATION: i32 = 3;

impl CliError {
    /// Process exit status: 2 for bad input, 3 when no trustworthy reference exists.
    pub fn exit_code(&self) -> i32 {
        use djm_core::Error as E;
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Core(e) => match e {
                E::Calibration(_) | E::Unstable(_) => EXIT_CALIBRATION,
                E::Precision(_) | E::Parse(_) | E::Domain(_) | E::EmptyGrid | E::NoTerms => {
                    EXIT_CONFIG
                }
                _ => EXIT_OTHER,
            },
            CliError::Io(_) | CliError::Csv(_) => EXIT_OTHER,
        }
    }
}
