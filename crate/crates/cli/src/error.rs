use std::path::PathBuf;

use omori_hawkes::Error as CoreError;

pub type Result<T, E = CliError> = std::result::Result<T, E>;

/// Failure classes, each with its own process exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad flags, config file entries or model parameters.
    #[error("configuration error: {0}")]
    Config(String),
    /// Unreadable or insufficient input data.
    #[error("data error: {0}")]
    Data(String),
    /// An optimizer or root finder failed to converge.
    #[error("numerical failure: {0}")]
    Numeric(String),
    /// A file could not be opened, read or written.
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Data(_) => 3,
            CliError::Numeric(_) => 4,
            CliError::Io { .. } => 5,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::InvalidParameter { .. } => CliError::Config(e.to_string()),
            CoreError::Domain(_) | CoreError::Data(_) | CoreError::InsufficientData { .. } => {
                CliError::Data(e.to_string())
            }
            CoreError::RootNotConverged { .. }
            | CoreError::NotConverged { .. }
            | CoreError::IllConditioned(_) => CliError::Numeric(e.to_string()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_are_distinct() {
        let codes = [
            CliError::Config(String::new()).exit_code(),
            CliError::Data(String::new()).exit_code(),
            CliError::Numeric(String::new()).exit_code(),
            CliError::io("x", std::io::ErrorKind::NotFound.into()).exit_code(),
        ];
        for (i, a) in codes.iter().enumerate() {
            assert_ne!(*a, 0);
            assert!(codes[i + 1..].iter().all(|b| b != a));
        }
    }

    #[test]
    fn core_errors_map_to_classes() {
        let e: CliError = CoreError::InvalidParameter { name: "n", value: 2.0, reason: "bad" }.into();
        assert_eq!(e.exit_code(), 2);
        let e: CliError = CoreError::InsufficientData { needed: 30, found: 3 }.into();
        assert_eq!(e.exit_code(), 3);
        let e: CliError = CoreError::IllConditioned("flat".into()).into();
        assert_eq!(e.exit_code(), 4);
    }
}
