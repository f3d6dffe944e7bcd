//! Questionnaire execution: prompt rendering, chat endpoints with retries and
//! judge escalation, an offline stub responder, and report export.

mod endpoint;
mod export;
mod runner;
mod stub;
mod templates;

use thiserror::Error;

pub use endpoint::{
    completion_text, ChatEndpoint, ChatMessage, ChatRequest, EndpointConfig, HttpChatEndpoint, RequestTag,
    TransportError,
};
pub use export::{export_dot, reference_markdown, report_csv, report_json, report_markdown, steering_table_markdown};
pub use runner::{catalog_hash, run_questionnaire, Questionnaire, RunConfig, RunManifest, RunOutput};
pub use stub::{stub_judge, stub_responder, StubProfile, StubResponder};
pub use templates::{
    fill, judged_text, parse_judge_reply, render_judge_prompt, render_prompt, render_role_settings, split_response,
    PromptTemplate, Shot,
};

#[derive(Debug, Error, PartialEq)]
pub enum HarnessError {
    #[error("template slot cannot be filled: {0}")]
    MissingSlot(String),
    #[error("judge reply is not exactly yes, no or unsure: {0:?}")]
    JudgeFormat(String),
    #[error("authentication failed: {0}")]
    Auth(String),
    #[error("endpoint error: {0}")]
    Endpoint(String),
    #[error(
        "condition {0} needs activation steering; ingest its responses instead of running it against a chat endpoint"
    )]
    SaeCondition(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("run aborted after an earlier failure")]
    Aborted,
}

pub type Result<T> = std::result::Result<T, HarnessError>;
