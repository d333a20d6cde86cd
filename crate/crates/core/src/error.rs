use std::fmt;

use thiserror::Error;

use crate::cluster::ClusterError;
use crate::grassmann::GrassmannError;
use crate::io::IoError;
use crate::mdr::MdrError;
use crate::pipeline::PipelineError;
use crate::scales::ScaleError;

/// Pipeline stage an error originated in.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stage {
    Config,
    Load,
    Preprocess,
    ScaleSampling,
    Pca,
    Embedding,
    Subspaces,
    Distances,
    Clustering,
    Evaluation,
    Export,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Stage::Config => "config",
            Stage::Load => "load",
            Stage::Preprocess => "preprocess",
            Stage::ScaleSampling => "scale-sampling",
            Stage::Pca => "pca",
            Stage::Embedding => "embedding",
            Stage::Subspaces => "subspaces",
            Stage::Distances => "distances",
            Stage::Clustering => "clustering",
            Stage::Evaluation => "evaluation",
            Stage::Export => "export",
        };
        f.write_str(s)
    }
}

/// Broad error classes, mapped to CLI exit codes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorKind {
    Config,
    Data,
    Numerical,
}

impl ErrorKind {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorKind::Config => 2,
            ErrorKind::Data => 3,
            ErrorKind::Numerical => 4,
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Grassmann(#[from] GrassmannError),
    #[error(transparent)]
    Scale(#[from] ScaleError),
    #[error(transparent)]
    Mdr(#[from] MdrError),
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
    #[error(transparent)]
    Cluster(#[from] ClusterError),
    #[error(transparent)]
    Io(#[from] IoError),
    #[error("{stage} stage failed: {source}")]
    Stage {
        stage: Stage,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn at(stage: Stage, err: impl Into<Error>) -> Self {
        Error::Stage { stage, source: Box::new(err.into()) }
    }

    /// Innermost stage tag, if any.
    pub fn stage(&self) -> Option<Stage> {
        match self {
            Error::Stage { stage, source } => source.stage().or(Some(*stage)),
            _ => None,
        }
    }

    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Stage { source, .. } => source.kind(),
            Error::Scale(_) => ErrorKind::Config,
            Error::Io(e) => e.kind(),
            Error::Mdr(e) => e.kind(),
            Error::Pipeline(_) | Error::Grassmann(_) => ErrorKind::Numerical,
            Error::Cluster(e) => e.kind(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
