//! Exit-code policy: 2 usage, 3 input validation, 1 runtime failure.

use roomloc_core::dataset::DatasetError;
use roomloc_core::econ::EconError;
use roomloc_core::evalkit::EvalError;
use roomloc_core::geometry::PlanError;
use roomloc_core::knn::KnnError;
use roomloc_core::multilat::MultilatError;
use roomloc_core::sim::SimError;
use roomloc_core::stream::StreamError;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Validation(String),
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Validation(_) => 3,
            CliError::Runtime(_) => 1,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Validation(m) | CliError::Runtime(m) => m,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(format!("io error: {e}"))
    }
}

impl From<PlanError> for CliError {
    fn from(e: PlanError) -> Self {
        match e {
            PlanError::Io(io) => CliError::Runtime(format!("plan: {io}")),
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl From<DatasetError> for CliError {
    fn from(e: DatasetError) -> Self {
        match e {
            DatasetError::Io(io) => CliError::Runtime(format!("dataset: {io}")),
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl From<KnnError> for CliError {
    fn from(e: KnnError) -> Self {
        match e {
            KnnError::Io(io) => CliError::Runtime(format!("model: {io}")),
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl From<MultilatError> for CliError {
    fn from(e: MultilatError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<StreamError> for CliError {
    fn from(e: StreamError) -> Self {
        match e {
            StreamError::Io(io) => CliError::Runtime(format!("stream: {io}")),
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::Dataset(DatasetError::Io(io)) => CliError::Runtime(format!("eval: {io}")),
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl From<EconError> for CliError {
    fn from(e: EconError) -> Self {
        match e {
            EconError::Io(io) => CliError::Runtime(format!("econ: {io}")),
            other => CliError::Validation(other.to_string()),
        }
    }
}
