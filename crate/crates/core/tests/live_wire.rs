//! Live clients against local axum stand-ins for the chat/embedding API and
//! the Semantic Scholar Graph API.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::time::Duration;

use axum::extract::{Path, Query, State};
use axum::http::{HeaderMap, StatusCode};
use axum::response::IntoResponse;
use axum::routing::{get, post};
use axum::{Json, Router};
use serde_json::{json, Value};

use coexplore_core::llm::{Gateway, LiveProvider, LlmError, LlmProvider, PromptRequest, ProviderConfig, RetryPolicy, TemplateId};
use coexplore_core::scholar::{LinkDirection, LiveScholar, QueryString, ResponseCache, ScholarClient, ScholarError};

async fn serve(app: Router) -> String {
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    tokio::spawn(async move { axum::serve(listener, app).await.unwrap() });
    format!("http://{addr}")
}

#[derive(Default)]
struct Hits {
    chat: AtomicUsize,
    embed: AtomicUsize,
}

async fn chat(State(hits): State<Arc<Hits>>, headers: HeaderMap, Json(body): Json<Value>) -> impl IntoResponse {
    let n = hits.chat.fetch_add(1, Ordering::SeqCst);
    assert_eq!(headers["authorization"], "Bearer test-key");
    let prompt = body["messages"][0]["content"].as_str().unwrap_or_default().to_string();
    if prompt.contains("BROKEN") {
        return (StatusCode::BAD_REQUEST, Json(json!({"error": "bad prompt"}))).into_response();
    }
    // first call is throttled to exercise the retry path
    if n == 0 {
        return (StatusCode::TOO_MANY_REQUESTS, [("retry-after", "0")], "slow down").into_response();
    }
    let reply = format!("model={} temp={} echo={}", body["model"], body["temperature"], prompt.len());
    Json(json!({"choices": [{"message": {"role": "assistant", "content": reply}}]})).into_response()
}

async fn embeddings(State(hits): State<Arc<Hits>>, Json(body): Json<Value>) -> impl IntoResponse {
    hits.embed.fetch_add(1, Ordering::SeqCst);
    let inputs = body["input"].as_array().unwrap().clone();
    // reversed order; the client must sort by index
    let data: Vec<Value> = inputs
        .iter()
        .enumerate()
        .rev()
        .map(|(i, t)| json!({"index": i, "embedding": [t.as_str().unwrap().len() as f64, i as f64]}))
        .collect();
    Json(json!({"data": data, "model": body["model"]}))
}

fn llm_config(base_url: String) -> ProviderConfig {
    ProviderConfig {
        base_url,
        api_key: Some("test-key".into()),
        model_name: "chat-model".into(),
        embed_model_name: "embed-model".into(),
        ..Default::default()
    }
}

fn fast_retry() -> RetryPolicy {
    RetryPolicy {
        max_attempts: 3,
        base_delay: Duration::from_millis(5),
    }
}

#[tokio::test]
async fn live_llm_completes_retries_and_embeds() {
    let hits = Arc::new(Hits::default());
    let app = Router::new()
        .route("/chat/completions", post(chat))
        .route("/embeddings", post(embeddings))
        .with_state(hits.clone());
    let base = serve(app).await;
    let provider = LiveProvider::new(&llm_config(base)).unwrap().with_retry(fast_retry());
    let gateway = Gateway::new(Arc::new(provider), 2);

    let req = PromptRequest::new(TemplateId::ClusterDivisible)
        .var("research_idea", "r")
        .var("question", "q")
        .var("papers", "p");
    let answer = gateway.complete(&req).await.unwrap();
    assert!(answer.starts_with("model=\"chat-model\" temp="), "{answer}");
    assert_eq!(hits.chat.load(Ordering::SeqCst), 2);

    let texts = vec!["a".to_string(), "bbb".to_string(), "a".to_string()];
    let vectors = gateway.embed(&texts).await.unwrap();
    assert_eq!(vectors.len(), 3);
    assert_eq!(vectors[0].0, [1.0, 0.0]);
    assert_eq!(vectors[1].0, [3.0, 1.0]);
    assert_eq!(vectors[2], vectors[0]);
    // memoized: a second call does not reach the server
    gateway.embed(&texts).await.unwrap();
    assert_eq!(hits.embed.load(Ordering::SeqCst), 1);
}

#[tokio::test]
async fn live_llm_client_errors_are_not_retried() {
    let hits = Arc::new(Hits::default());
    hits.chat.store(1, Ordering::SeqCst);
    let app = Router::new().route("/chat/completions", post(chat)).with_state(hits.clone());
    let provider = LiveProvider::new(&llm_config(serve(app).await)).unwrap().with_retry(fast_retry());
    let req = PromptRequest::new(TemplateId::ThemeTitle);
    let err = provider.complete(&req, "BROKEN prompt").await.unwrap_err();
    match err {
        LlmError::Provider { attempts, status, .. } => {
            assert_eq!(attempts, 1);
            assert_eq!(status, Some(400));
        }
        other => panic!("unexpected {other:?}"),
    }
    assert_eq!(hits.chat.load(Ordering::SeqCst), 2);
}

#[tokio::test]
async fn live_llm_gives_up_after_max_attempts() {
    let app = Router::new().route(
        "/chat/completions",
        post(|| async { (StatusCode::SERVICE_UNAVAILABLE, "down") }),
    );
    let provider = LiveProvider::new(&llm_config(serve(app).await)).unwrap().with_retry(fast_retry());
    let err = provider.complete(&PromptRequest::new(TemplateId::ThemeTitle), "x").await.unwrap_err();
    assert!(matches!(err, LlmError::Provider { attempts: 3, status: Some(503), .. }), "{err:?}");
}

fn wire_paper(id: &str, title: Option<&str>) -> Value {
    json!({
        "paperId": id,
        "title": title,
        "abstract": null,
        "year": 2021,
        "venue": "",
        "authors": [{"name": "A. Author"}, {"name": null}],
        "citationCount": 7,
        "fieldsOfStudy": ["psychology"],
        "s2FieldsOfStudy": [{"category": "Psychology", "source": "s2"}, {"category": "Sociology", "source": "model"}],
    })
}

async fn search(
    State(hits): State<Arc<AtomicUsize>>,
    headers: HeaderMap,
    Query(q): Query<std::collections::HashMap<String, String>>,
) -> impl IntoResponse {
    hits.fetch_add(1, Ordering::SeqCst);
    assert_eq!(headers["x-api-key"], "s2-key");
    assert!(q["fields"].contains("s2FieldsOfStudy"));
    if q["query"] == "throttle me" {
        return (StatusCode::TOO_MANY_REQUESTS, [("retry-after", "7")], "").into_response();
    }
    assert_eq!(q["limit"], "5");
    Json(json!({
        "total": 3,
        "data": [wire_paper("p1", Some("First")), wire_paper("p2", None), wire_paper("p1", Some("First again"))],
    }))
    .into_response()
}

async fn links(Path((id, kind)): Path<(String, String)>) -> impl IntoResponse {
    if id == "missing" {
        return (StatusCode::NOT_FOUND, "").into_response();
    }
    let data = match kind.as_str() {
        "citations" => json!([{"citingPaper": wire_paper("c1", Some("Citing"))}]),
        _ => json!([{"citedPaper": wire_paper("r1", Some("Cited"))}, {"citedPaper": {"paperId": null}}]),
    };
    Json(json!({ "data": data })).into_response()
}

async fn scholar_server() -> (String, Arc<AtomicUsize>) {
    let hits = Arc::new(AtomicUsize::new(0));
    let app = Router::new()
        .route("/paper/search", get(search))
        .route("/paper/{id}/{kind}", get(links))
        .with_state(hits.clone());
    (serve(app).await, hits)
}

#[tokio::test]
async fn live_scholar_maps_wire_records() {
    let (base, _) = scholar_server().await;
    let client = ScholarClient::from_live(LiveScholar::new(&base, Some("s2-key".into())).unwrap(), 2);
    let found = client.search_papers(&QueryString::new("memory").unwrap(), 5).await.unwrap();
    // untitled entries dropped, duplicate ids merged
    assert_eq!(found.len(), 1);
    let p = &found[0];
    assert_eq!((p.paper_id.as_str(), p.title.as_str()), ("p1", "First"));
    assert_eq!(p.disciplines, ["Psychology", "Sociology"]);
    assert_eq!(p.authors, ["A. Author"]);
    assert_eq!(p.venue, None);
    assert_eq!(p.citation_count, 7);

    let citing = client.fetch_links("x", LinkDirection::Citations).await.unwrap();
    assert_eq!(citing[0].paper_id, "c1");
    let cited = client.fetch_links("x", LinkDirection::References).await.unwrap();
    assert_eq!(cited.len(), 1);
    assert_eq!(cited[0].paper_id, "r1");

    let err = client.fetch_links("missing", LinkDirection::Citations).await.unwrap_err();
    assert!(matches!(err, ScholarError::NotFound(ref id) if id == "missing"), "{err:?}");
    let err = client.search_papers(&QueryString::new("throttle me").unwrap(), 5).await.unwrap_err();
    assert!(matches!(err, ScholarError::RateLimited { retry_after: Some(d) } if d == Duration::from_secs(7)));
    assert!(matches!(
        client.search_papers(&QueryString::new("memory").unwrap(), 0).await,
        Err(ScholarError::InvalidLimit(0))
    ));
}

#[tokio::test]
async fn cached_responses_skip_the_network() {
    let (base, hits) = scholar_server().await;
    let dir = tempfile::tempdir().unwrap();
    let live = || LiveScholar::new(&base, Some("s2-key".into())).unwrap();
    let client = ScholarClient::from_live(live(), 2).with_cache(ResponseCache::open(dir.path()).unwrap());
    let q = QueryString::new("memory").unwrap();
    let first = client.search_papers(&q, 5).await.unwrap();
    let second = client.search_papers(&q, 5).await.unwrap();
    assert_eq!(first, second);
    assert_eq!(hits.load(Ordering::SeqCst), 1);

    // a new client over the same directory also hits the cache
    let again = ScholarClient::from_live(live(), 2).with_cache(ResponseCache::open(dir.path()).unwrap());
    assert_eq!(again.search_papers(&q, 5).await.unwrap(), first);
    assert_eq!(hits.load(Ordering::SeqCst), 1);
    let key = ResponseCache::key(&["search", "memory", "5"]);
    assert!(dir.path().join(format!("{key}.json")).exists());
}
