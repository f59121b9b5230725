//! Error type shared by all analyses. The variant name is what the CLI
//! prints on a domain failure, so names are part of the public surface.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("CoefficientUnderflow: {0}")]
    CoefficientUnderflow(String),
    #[error("DuplicateId: {0}")]
    DuplicateId(String),
    #[error("RankViolation: {0}")]
    RankViolation(String),
    #[error("SelfLoopBranch: {0}")]
    SelfLoopBranch(String),
    #[error("Disconnected: {0}")]
    Disconnected(String),
    #[error("BadRank: {0}")]
    BadRank(String),
    #[error("BadIndex: {0}")]
    BadIndex(String),
    #[error("UnknownGadget: {0}")]
    UnknownGadget(String),
    #[error("UnknownNode: {0}")]
    UnknownNode(String),
    #[error("UnknownFamily: {0}")]
    UnknownFamily(String),
    #[error("MalformedPath: {0}")]
    MalformedPath(String),
    #[error("TooLarge: {0}")]
    TooLarge(String),
    #[error("PreconditionViolated: {0}")]
    PreconditionViolated(String),
    #[error("HasCycle: {0}")]
    HasCycle(String),
    #[error("ParseError: {0}")]
    Parse(String),
}

impl Error {
    /// Short machine-readable name (the variant), used for CLI exit reporting.
    pub fn name(&self) -> &'static str {
        match self {
            Error::CoefficientUnderflow(_) => "CoefficientUnderflow",
            Error::DuplicateId(_) => "DuplicateId",
            Error::RankViolation(_) => "RankViolation",
            Error::SelfLoopBranch(_) => "SelfLoopBranch",
            Error::Disconnected(_) => "Disconnected",
            Error::BadRank(_) => "BadRank",
            Error::BadIndex(_) => "BadIndex",
            Error::UnknownGadget(_) => "UnknownGadget",
            Error::UnknownNode(_) => "UnknownNode",
            Error::UnknownFamily(_) => "UnknownFamily",
            Error::MalformedPath(_) => "MalformedPath",
            Error::TooLarge(_) => "TooLarge",
            Error::PreconditionViolated(_) => "PreconditionViolated",
            Error::HasCycle(_) => "HasCycle",
            Error::Parse(_) => "ParseError",
        }
    }

    /// Parse errors get CLI exit code 2, everything else 1.
    pub fn is_parse(&self) -> bool {
        matches!(self, Error::Parse(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
