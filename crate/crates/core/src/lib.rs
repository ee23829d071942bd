//! Core pipeline for co-exploring interdisciplinary literature: exploratory
//! questions, query expansion, scholarly search, relevance cues, theming,
//! discipline ranking and session persistence.

pub mod eq;
pub mod llm;
pub mod model;
pub mod query;
pub mod rank;
pub mod relevance;
pub mod scholar;
pub mod session;
pub mod text;
pub mod theming;

pub use llm::{Gateway, LlmError, ProviderConfig};
pub use model::{ExplorationContext, ExploratoryQuestion, PaperRecord, ResearchTopic, Vector};
pub use scholar::{ScholarClient, ScholarConfig, ScholarError};
