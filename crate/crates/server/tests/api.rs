//! HTTP surface over the scripted scenario fixtures.

use std::path::Path;
use std::sync::Arc;
use std::time::Duration;

use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use serde_json::{json, Value};
use tower::ServiceExt;

use coexplore_server::{api, AppConfig, Services};

const TOPIC: &str = "misinformation awareness among older adults";
const EQ1: &str = "What cognitive strategies reduce belief in false information?";

fn assert_schema_valid(doc: &Value) {
    let schema: Value = serde_json::from_str(coexplore_server::export::OUTLINE_SCHEMA).unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();
    let errors: Vec<String> = validator.iter_errors(doc).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "{errors:?}\n{doc}");
}

struct Harness {
    app: Router,
    services: Arc<Services>,
    _data: tempfile::TempDir,
}

fn harness() -> Harness {
    let data = tempfile::tempdir().unwrap();
    let mut config = AppConfig::from_lookup(|_| None).unwrap();
    config.use_scripted(Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/scenario"));
    config.data_dir = data.path().to_path_buf();
    let services = Services::build(config).unwrap();
    Harness {
        app: api::router(services.clone()),
        services,
        _data: data,
    }
}

impl Harness {
    async fn raw(&self, method: Method, uri: &str, body: Option<&str>) -> (StatusCode, String, String) {
        let mut req = Request::builder().method(method).uri(uri);
        if body.is_some() {
            req = req.header("content-type", "application/json");
        }
        let req = req.body(body.map_or_else(Body::empty, |b| Body::from(b.to_string()))).unwrap();
        let resp = self.app.clone().oneshot(req).await.unwrap();
        let status = resp.status();
        let ctype = resp
            .headers()
            .get("content-type")
            .map(|v| v.to_str().unwrap().to_string())
            .unwrap_or_default();
        let bytes = resp.into_body().collect().await.unwrap().to_bytes();
        (status, ctype, String::from_utf8(bytes.to_vec()).unwrap())
    }

    async fn call(&self, method: Method, uri: &str, body: Option<Value>) -> (StatusCode, Value) {
        let body = body.map(|b| b.to_string());
        let (status, _, text) = self.raw(method, uri, body.as_deref()).await;
        (status, serde_json::from_str(&text).unwrap_or(Value::Null))
    }

    async fn session(&self) -> String {
        let (status, body) = self.call(Method::POST, "/api/v1/sessions", Some(json!({ "topic": TOPIC }))).await;
        assert_eq!(status, StatusCode::CREATED);
        body["session_id"].as_str().unwrap().to_string()
    }

    async fn generate(&self, sid: &str) -> Vec<Value> {
        let (status, body) = self
            .call(
                Method::POST,
                &format!("/api/v1/sessions/{sid}/eqs/generate"),
                Some(json!({ "mode": "topic", "max_fields": 6 })),
            )
            .await;
        assert_eq!(status, StatusCode::OK, "{body}");
        body["eqs"].as_array().unwrap().clone()
    }

    async fn select(&self, sid: &str, eq_id: &str) {
        let (status, body) = self
            .call(
                Method::PATCH,
                &format!("/api/v1/sessions/{sid}/eqs/{eq_id}"),
                Some(json!({ "selected": true })),
            )
            .await;
        assert_eq!(status, StatusCode::OK, "{body}");
        assert_eq!(body["eq"]["selected"], true);
    }

    /// Starts an explore job and polls it to a terminal state.
    async fn explore(&self, sid: &str, eq_id: &str) -> Value {
        let (status, body) = self
            .call(Method::POST, &format!("/api/v1/sessions/{sid}/eqs/{eq_id}/explore"), None)
            .await;
        assert_eq!(status, StatusCode::ACCEPTED, "{body}");
        let job_id = body["job_id"].as_str().unwrap().to_string();
        for _ in 0..500 {
            let (status, job) = self
                .call(Method::GET, &format!("/api/v1/sessions/{sid}/jobs/{job_id}"), None)
                .await;
            assert_eq!(status, StatusCode::OK);
            if job["status"] == "done" || job["status"] == "failed" {
                return job;
            }
            tokio::time::sleep(Duration::from_millis(10)).await;
        }
        panic!("job {job_id} did not finish");
    }

    async fn summary(&self, sid: &str) -> Value {
        let (status, body) = self
            .call(
                Method::POST,
                &format!("/api/v1/sessions/{sid}/collections/edits"),
                Some(json!({ "op": "create", "title": "Scratch" })),
            )
            .await;
        assert_eq!(status, StatusCode::OK, "{body}");
        body
    }
}

#[tokio::test]
async fn topic_flow_explore_themes_and_rerun() {
    let h = harness();
    let sid = h.session().await;
    let eqs = h.generate(&sid).await;
    assert_eq!(eqs.len(), 9);
    assert_eq!(eqs[0]["id"], "eq-1");
    assert_eq!(eqs[0]["text"], EQ1);
    assert!(eqs.iter().all(|e| e["selected"] == false && e["origin"] == "topic_seeded"));

    // exploring an unselected question is a conflict
    let (status, body) = h.call(Method::POST, &format!("/api/v1/sessions/{sid}/eqs/eq-1/explore"), None).await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_eq!(body["error"]["code"], "conflict");

    h.select(&sid, "eq-1").await;
    let job = h.explore(&sid, "eq-1").await;
    assert_eq!(job["status"], "done", "{job}");
    assert_eq!(job["progress"], 1.0);

    let (status, themes) = h.call(Method::GET, &format!("/api/v1/sessions/{sid}/themes/eq-1"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(themes["queries"].as_array().unwrap().len(), 9);
    let titles: Vec<&str> = themes["themes"].as_array().unwrap().iter().map(|t| t["title"].as_str().unwrap()).collect();
    assert_eq!(
        titles,
        ["Critical Thinking and Cognitive Improvement", "Inoculation and Overconfidence Strategies to Combat Misinformation"]
    );
    let first = &themes["themes"][0];
    assert_eq!(first["papers"].as_array().unwrap().len(), first["paper_ids"].as_array().unwrap().len());
    let paper = &first["papers"][0];
    assert!(paper["paper_id"].is_string() && paper["title"].is_string());
    let idx = paper["key_sentence_index"].as_u64().unwrap() as usize;
    assert!(idx < paper["sentences"].as_array().unwrap().len(), "{paper}");
    assert_eq!(
        themes["possibly_relevant"].as_array().unwrap().len(),
        themes["possibly_relevant_papers"].as_array().unwrap().len()
    );

    let before = h.summary(&sid).await;
    assert_eq!(before["engagement"]["eqs_queried"]["Psychology"], 1);
    assert_eq!(before["explored_eqs"], json!(["eq-1"]));

    // re-running replaces the results and counts another query
    let again = h.explore(&sid, "eq-1").await;
    assert_eq!(again["status"], "done");
    assert_ne!(again["job_id"], job["job_id"]);
    let (_, rerun) = h.call(Method::GET, &format!("/api/v1/sessions/{sid}/themes/eq-1"), None).await;
    assert_eq!(rerun, themes);
    let after = h.summary(&sid).await;
    assert_eq!(after["engagement"]["eqs_queried"]["Psychology"], 2);

    // themes of an unexplored question are not there yet
    let (status, _) = h.call(Method::GET, &format!("/api/v1/sessions/{sid}/themes/eq-2"), None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn paper_drop_generates_three_questions() {
    let h = harness();
    let sid = h.session().await;
    let (status, body) = h
        .call(
            Method::POST,
            &format!("/api/v1/sessions/{sid}/eqs/generate"),
            Some(json!({ "mode": "paper", "paper_id": "health-01", "focus_keywords": ["older adults"] })),
        )
        .await;
    assert_eq!(status, StatusCode::OK, "{body}");
    let eqs = body["eqs"].as_array().unwrap();
    assert_eq!(eqs.len(), 3);
    assert!(eqs.iter().all(|e| e["origin"] == "paper_seeded" && e["text"].as_str().unwrap().ends_with('?')));
    let ids: Vec<&str> = eqs.iter().map(|e| e["id"].as_str().unwrap()).collect();
    assert_eq!(ids, ["eq-1", "eq-2", "eq-3"]);

    let (status, _) = h
        .call(Method::POST, &format!("/api/v1/sessions/{sid}/eqs/generate"), Some(json!({ "mode": "paper" })))
        .await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn editing_and_adding_questions() {
    let h = harness();
    let sid = h.session().await;
    h.generate(&sid).await;

    let uri = format!("/api/v1/sessions/{sid}/eqs/eq-2");
    let (status, body) = h.call(Method::PATCH, &uri, Some(json!({ "text": "  Why do corrections fade with age?  " }))).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["eq"]["text"], "Why do corrections fade with age?");
    assert_eq!(body["eq"]["origin"], "user_edited");
    assert_eq!(body["eq"]["id"], "eq-2");

    assert_eq!(h.call(Method::PATCH, &uri, Some(json!({}))).await.0, StatusCode::BAD_REQUEST);
    assert_eq!(h.call(Method::PATCH, &uri, Some(json!({ "text": "  " }))).await.0, StatusCode::BAD_REQUEST);
    let missing = format!("/api/v1/sessions/{sid}/eqs/eq-99");
    assert_eq!(h.call(Method::PATCH, &missing, Some(json!({ "selected": true }))).await.0, StatusCode::NOT_FOUND);

    let add = format!("/api/v1/sessions/{sid}/eqs");
    let (status, body) = h
        .call(Method::POST, &add, Some(json!({ "text": "Does radio still matter?", "discipline": "sociology" })))
        .await;
    assert_eq!(status, StatusCode::CREATED);
    assert_eq!(body["eq"]["id"], "eq-10");
    assert_eq!(body["eq"]["discipline"], "Sociology");
    assert_eq!(body["eq"]["origin"], "user_created");
    let (status, _) = h
        .call(Method::POST, &add, Some(json!({ "text": "Is it?", "discipline": "Alchemy" })))
        .await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn links_are_grouped_and_ranked() {
    let h = harness();
    let sid = h.session().await;
    let (status, body) = h
        .call(Method::GET, &format!("/api/v1/papers/health-01/links?direction=citations&session={sid}"), None)
        .await;
    assert_eq!(status, StatusCode::OK, "{body}");
    let groups = body["groups"].as_array().unwrap();
    assert_eq!(groups.len(), 6);
    let scores: Vec<f64> = groups.iter().map(|g| g["score"]["combined_score"].as_f64().unwrap()).collect();
    assert!(scores.windows(2).all(|w| w[0] >= w[1]), "{scores:?}");
    for g in groups {
        assert_eq!(g["score"]["exploration_score"], 1.0);
        let sims: Vec<f64> = g["papers"].as_array().unwrap().iter().map(|p| p["similarity"].as_f64().unwrap()).collect();
        assert!(sims.windows(2).all(|w| w[0] >= w[1]));
    }

    let (status, body) = h
        .call(Method::GET, &format!("/api/v1/papers/health-01/links?direction=references&session={sid}"), None)
        .await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["direction"], "references");
    assert_eq!(h.call(Method::GET, "/api/v1/papers/health-01/links", None).await.0, StatusCode::BAD_REQUEST);
    let bad = format!("/api/v1/papers/health-01/links?direction=sideways&session={sid}");
    assert_eq!(h.call(Method::GET, &bad, None).await.0, StatusCode::BAD_REQUEST);
    let unknown = format!("/api/v1/papers/nope/links?session={sid}");
    assert_eq!(h.call(Method::GET, &unknown, None).await.0, StatusCode::NOT_FOUND);

    // linked papers become collectable in the session
    let summary = h.summary(&sid).await;
    let col = summary["collections"][0]["id"].as_str().unwrap().to_string();
    let (status, body) = h
        .call(
            Method::POST,
            &format!("/api/v1/sessions/{sid}/collections/edits"),
            Some(json!({ "op": "drop_paper", "paper_id": "cit-01", "collection_id": col })),
        )
        .await;
    assert_eq!(status, StatusCode::OK, "{body}");
    assert_eq!(body["engagement"]["papers_collected"]["Medicine"], 1);

    // engagement lowers that discipline's exploration score
    let (_, body) = h
        .call(Method::GET, &format!("/api/v1/papers/health-01/links?session={sid}"), None)
        .await;
    let medicine = body["groups"].as_array().unwrap().iter().find(|g| g["score"]["discipline"] == "Medicine").unwrap();
    assert_eq!(medicine["score"]["exploration_score"], 0.5);
}

#[tokio::test]
async fn collections_and_export() {
    let h = harness();
    let sid = h.session().await;
    h.generate(&sid).await;
    h.select(&sid, "eq-1").await;
    h.explore(&sid, "eq-1").await;

    let edits = format!("/api/v1/sessions/{sid}/collections/edits");
    let (status, body) = h.call(Method::POST, &edits, Some(json!({ "op": "drop_theme", "theme_id": "eq-1-t1" }))).await;
    assert_eq!(status, StatusCode::OK, "{body}");
    let col = &body["collections"][0];
    assert_eq!(col["title"], "Critical Thinking and Cognitive Improvement");
    assert_eq!(col["source"], json!({ "kind": "from_theme", "theme_id": "eq-1-t1" }));

    let (status, _) = h.call(Method::POST, &edits, Some(json!({ "op": "drop_theme", "theme_id": "nope" }))).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    let (status, _) = h.call(Method::POST, &edits, Some(json!({ "op": "explode" }))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let (status, _) = h
        .call(Method::POST, &edits, Some(json!({ "op": "rename", "collection_id": "col-1", "title": " " })))
        .await;
    assert_eq!(status, StatusCode::BAD_REQUEST);

    let (status, ctype, text) = h.raw(Method::GET, &format!("/api/v1/sessions/{sid}/export"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(ctype, "application/json");
    let doc: Value = serde_json::from_str(&text).unwrap();
    assert_schema_valid(&doc);
    assert_eq!(doc["schema_version"], 1);
    assert_eq!(doc["research_topic"], TOPIC);
    assert_eq!(doc["topics"][0]["source"], "theme");
    assert_eq!(doc["questions"], json!([{ "text": EQ1, "discipline": "Psychology", "explored": true }]));

    let (status, ctype, md) = h.raw(Method::GET, &format!("/api/v1/sessions/{sid}/export?format=markdown"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert!(ctype.starts_with("text/markdown"));
    assert!(md.starts_with(&format!("# Outline: {TOPIC}")));
    assert!(md.contains("## 1. Critical Thinking and Cognitive Improvement"));

    assert_eq!(h.raw(Method::GET, &format!("/api/v1/sessions/{sid}/export?format=pdf"), None).await.0, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn malformed_and_unknown_requests() {
    let h = harness();
    let (status, _, body) = h.raw(Method::POST, "/api/v1/sessions", Some("{not json")).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert!(body.contains("bad_request"));
    let (status, _) = h.call(Method::POST, "/api/v1/sessions", Some(json!({ "topic": "   " }))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let (status, body) = h.call(Method::GET, "/api/v1/sessions/nope/export", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(body["error"]["code"], "not_found");
    let sid = h.session().await;
    let (status, _) = h.call(Method::GET, &format!("/api/v1/sessions/{sid}/jobs/job-x"), None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    // sessions survive a restart of the service layer
    let store = coexplore_core::session::SessionStore::open(&h.services.config.data_dir).unwrap();
    assert_eq!(store.load(&sid).unwrap().topic.text, TOPIC);
}

#[tokio::test]
async fn empty_export_validates_and_schema_rejects_gaps() {
    let h = harness();
    let sid = h.session().await;
    let (status, _, text) = h.raw(Method::GET, &format!("/api/v1/sessions/{sid}/export?format=json"), None).await;
    assert_eq!(status, StatusCode::OK);
    let mut doc: Value = serde_json::from_str(&text).unwrap();
    assert_schema_valid(&doc);

    let schema: Value = serde_json::from_str(coexplore_server::export::OUTLINE_SCHEMA).unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();
    doc.as_object_mut().unwrap().remove("topics");
    assert!(!validator.is_valid(&doc));
}
