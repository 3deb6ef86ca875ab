use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Every failure the service can report. `code()` is the stable string the
/// HTTP layer puts in its error envelope.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("unknown project {0}")]
    UnknownProject(String),
    #[error("unknown node {0}")]
    UnknownNode(String),
    #[error("unknown edge {0}")]
    UnknownEdge(String),
    #[error("unknown brief {0}")]
    UnknownBrief(String),
    #[error("paper {0} is not in the collection")]
    UnknownPaper(String),
    #[error("an edge cannot connect node {0} to itself")]
    SelfLoop(String),
    #[error("an edge from {0} to {1} already exists")]
    DuplicateEdge(String, String),
    #[error("no nodes selected")]
    EmptySelection,
    #[error("corrupt project document: {0}")]
    CorruptDocument(String),
    #[error("project revision is {actual}, expected {expected}")]
    RevisionConflict { expected: u64, actual: u64 },
    #[error("invalid request: {0}")]
    InvalidRequest(String),

    #[error("search query is empty")]
    EmptyQuery,
    #[error("paper collection is empty")]
    EmptyCollection,
    #[error("paper {0} is already in the collection")]
    DuplicatePaper(String),
    #[error("paper {0} is cited by a research brief")]
    PaperInUse(String),
    #[error("adding this paper would exceed the context budget ({needed} of {budget} tokens)")]
    BudgetExceeded { needed: usize, budget: usize },
    #[error("text extraction failed: {0}")]
    ExtractionFailed(String),
    #[error("full text is empty")]
    EmptyText,
    #[error("provider unavailable: {0}")]
    ProviderUnavailable(String),

    #[error("template slot {{{0}}} is not bound")]
    MissingSlot(String),
    #[error("malformed model response: {0}")]
    MalformedResponse(String),
    #[error("schema violation: {0}")]
    SchemaViolation(String),

    #[error("node {0} has no content")]
    EmptyNodeContent(String),
    #[error("edge endpoint {0} has no content")]
    EmptyFacetContent(String),
    #[error("unknown generation action {0:?}")]
    UnknownAction(String),
    #[error("reference {0:?} matches no collected paper")]
    UnresolvedReference(String),
    #[error("prompt is empty")]
    EmptyPrompt,

    #[error("model provider error: {0}")]
    ProviderError(String),
    #[error("no recorded fixture for digest {0}")]
    FixtureMiss(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub fn code(&self) -> &'static str {
        match self {
            Error::UnknownProject(_) => "UnknownProject",
            Error::UnknownNode(_) => "UnknownNode",
            Error::UnknownEdge(_) => "UnknownEdge",
            Error::UnknownBrief(_) => "UnknownBrief",
            Error::UnknownPaper(_) => "UnknownPaper",
            Error::SelfLoop(_) => "SelfLoop",
            Error::DuplicateEdge(..) => "DuplicateEdge",
            Error::EmptySelection => "EmptySelection",
            Error::CorruptDocument(_) => "CorruptDocument",
            Error::RevisionConflict { .. } => "RevisionConflict",
            Error::InvalidRequest(_) => "InvalidRequest",
            Error::EmptyQuery => "EmptyQuery",
            Error::EmptyCollection => "EmptyCollection",
            Error::DuplicatePaper(_) => "DuplicatePaper",
            Error::PaperInUse(_) => "PaperInUse",
            Error::BudgetExceeded { .. } => "BudgetExceeded",
            Error::ExtractionFailed(_) => "ExtractionFailed",
            Error::EmptyText => "EmptyText",
            Error::ProviderUnavailable(_) => "ProviderUnavailable",
            Error::MissingSlot(_) => "MissingSlot",
            Error::MalformedResponse(_) => "MalformedResponse",
            Error::SchemaViolation(_) => "SchemaViolation",
            Error::EmptyNodeContent(_) => "EmptyNodeContent",
            Error::EmptyFacetContent(_) => "EmptyFacetContent",
            Error::UnknownAction(_) => "UnknownAction",
            Error::UnresolvedReference(_) => "UnresolvedReference",
            Error::EmptyPrompt => "EmptyPrompt",
            Error::ProviderError(_) => "ProviderError",
            Error::FixtureMiss(_) => "FixtureMiss",
            Error::Io(_) => "Io",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}
