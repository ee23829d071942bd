//! Pollable status of background explore runs.

use std::collections::HashMap;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JobStatus {
    Queued,
    Expanding,
    Searching,
    Theming,
    Done,
    Failed,
}

impl JobStatus {
    pub fn progress(self) -> f64 {
        match self {
            JobStatus::Queued => 0.0,
            JobStatus::Expanding => 0.1,
            JobStatus::Searching => 0.4,
            JobStatus::Theming => 0.7,
            JobStatus::Done => 1.0,
            JobStatus::Failed => 1.0,
        }
    }

    pub fn is_terminal(self) -> bool {
        matches!(self, JobStatus::Done | JobStatus::Failed)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            JobStatus::Queued => "queued",
            JobStatus::Expanding => "expanding",
            JobStatus::Searching => "searching",
            JobStatus::Theming => "theming",
            JobStatus::Done => "done",
            JobStatus::Failed => "failed",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExploreJob {
    pub job_id: String,
    pub session_id: String,
    pub eq_id: String,
    pub status: JobStatus,
    pub progress: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Default)]
pub struct JobRegistry {
    inner: Mutex<Registry>,
}

#[derive(Debug, Default)]
struct Registry {
    next: u64,
    jobs: HashMap<String, ExploreJob>,
}

impl JobRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn create(&self, session_id: &str, eq_id: &str) -> ExploreJob {
        let mut reg = self.inner.lock().expect("job registry poisoned");
        reg.next += 1;
        let job = ExploreJob {
            job_id: format!("job-{}", reg.next),
            session_id: session_id.to_string(),
            eq_id: eq_id.to_string(),
            status: JobStatus::Queued,
            progress: 0.0,
            error: None,
        };
        reg.jobs.insert(job.job_id.clone(), job.clone());
        job
    }

    /// Moves a job forward. Transitions never go backwards and terminal
    /// states are final.
    pub fn advance(&self, job_id: &str, status: JobStatus) {
        let mut reg = self.inner.lock().expect("job registry poisoned");
        if let Some(job) = reg.jobs.get_mut(job_id) {
            if !job.status.is_terminal() && status > job.status {
                job.status = status;
                job.progress = status.progress();
            }
        }
    }

    pub fn fail(&self, job_id: &str, stage: JobStatus, message: &str) {
        let mut reg = self.inner.lock().expect("job registry poisoned");
        if let Some(job) = reg.jobs.get_mut(job_id) {
            if !job.status.is_terminal() {
                job.status = JobStatus::Failed;
                job.progress = 1.0;
                job.error = Some(format!("{}: {message}", stage.as_str()));
            }
        }
    }

    pub fn get(&self, session_id: &str, job_id: &str) -> Option<ExploreJob> {
        let reg = self.inner.lock().expect("job registry poisoned");
        reg.jobs
            .get(job_id)
            .filter(|j| j.session_id == session_id)
            .cloned()
    }
}
