use std::io;

use crate::arima::ArimaError;
use crate::cluster::ClusterError;
use crate::ingest::MalformedRow;
use crate::mlp::MlpError;
use crate::scrub::ScrubError;
use crate::series::SeriesError;

/// Any failure a pipeline stage can report.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Malformed(#[from] MalformedRow),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Cluster(#[from] ClusterError),
    #[error(transparent)]
    Scrub(#[from] ScrubError),
    #[error(transparent)]
    Mlp(#[from] MlpError),
    #[error(transparent)]
    Arima(#[from] ArimaError),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Coarse grouping used for process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Bad arguments or configuration.
    Usage,
    /// Input data that cannot be used.
    Data,
    /// An algorithm failed numerically.
    Numerical,
}

impl ErrorClass {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorClass::Usage => 1,
            ErrorClass::Data => 2,
            ErrorClass::Numerical => 3,
        }
    }
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        use ErrorClass::*;
        match self {
            Error::Malformed(_) | Error::Io(_) => Data,
            Error::Series(e) => match e {
                SeriesError::InvalidArgument(_) => Usage,
                _ => Data,
            },
            Error::Cluster(e) => match e {
                ClusterError::InvalidArgument(_) => Usage,
                _ => Data,
            },
            Error::Scrub(_) => Data,
            Error::Mlp(e) => match e {
                MlpError::NonFinite { .. } => Numerical,
                MlpError::InvalidArgument(_) => Usage,
                _ => Data,
            },
            Error::Arima(e) => match e {
                ArimaError::NumericalBreakdown { .. } | ArimaError::SingularRegression => Numerical,
                ArimaError::InvalidSpec(_) | ArimaError::InvalidArgument(_) => Usage,
                ArimaError::Series(SeriesError::InvalidArgument(_)) => Usage,
                _ => Data,
            },
        }
    }
}

/// Class of the first pipeline error in `err`'s source chain.
pub fn classify(err: &(dyn std::error::Error + 'static)) -> Option<ErrorClass> {
    let mut cur = Some(err);
    while let Some(e) = cur {
        let found = if let Some(e) = e.downcast_ref::<Error>() {
            Some(e.class())
        } else if e.is::<MalformedRow>() || e.is::<io::Error>() || e.is::<ScrubError>() {
            Some(ErrorClass::Data)
        } else if let Some(e) = e.downcast_ref::<SeriesError>() {
            Some(Error::Series(e.clone()).class())
        } else if let Some(e) = e.downcast_ref::<ClusterError>() {
            Some(Error::Cluster(e.clone()).class())
        } else if let Some(e) = e.downcast_ref::<MlpError>() {
            Some(Error::Mlp(e.clone()).class())
        } else { e.downcast_ref::<ArimaError>().map(|e| Error::Arima(e.clone()).class()) };
        if found.is_some() {
            return found;
        }
        cur = e.source();
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        let e: Error = MlpError::NonFinite { epoch: 3 }.into();
        assert_eq!(e.class().exit_code(), 3);
        let e: Error = ArimaError::InvalidSpec("x".into()).into();
        assert_eq!(e.class().exit_code(), 1);
        let e: Error = SeriesError::EmptyInput.into();
        assert_eq!(e.class().exit_code(), 2);
        let bare = ArimaError::SingularRegression;
        assert_eq!(classify(&bare), Some(ErrorClass::Numerical));
        assert_eq!(classify(&std::fmt::Error), None);
    }
}
