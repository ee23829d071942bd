//! HTTP service and headless CLI around the exploration pipeline.

pub mod api;
pub mod config;
pub mod error;
pub mod export;
pub mod jobs;
pub mod scenario;
pub mod services;

pub use config::AppConfig;
pub use error::AppError;
pub use services::Services;
