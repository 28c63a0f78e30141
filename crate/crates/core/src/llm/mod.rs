//! Prompt construction and dispatch to a completion backend.

mod backend;
mod cassette;
mod gateway;
mod prompt;

pub use backend::{
    BackendConfig, BackendError, BackendKind, Completion, CompletionBackend, CompletionRequest,
    HttpBackend, MockBackend, ReplayBackend, ENDPOINT_ENV,
};
pub use cassette::{prompt_sha256, Cassette, CassetteEntry};
pub use gateway::{makespan, parse_label, BatchOutcome, Gateway, LlmVerdict, PARSE_WINDOW};
pub use prompt::{Exemplar, PromptTemplate, CLASSES_SLOT, DEFAULT_QUERY_SLOT};
