//! HTTP render service. Every handler is a pure function of the request
//! body and the boundary set loaded at startup.

use std::path::Path;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path as UrlPath, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use geoglyph::designspace::{catalog, ValidationReport};
use geoglyph::gallery::{self, GALLERY};
use geoglyph::pipeline::Engine;
use serde_json::{json, Value};

pub const SVG_TYPE: &str = "image/svg+xml";

/// Engine for the given boundary file, or the bundled world fixture.
pub fn load_engine(boundaries: Option<&Path>) -> Result<Engine, String> {
    match boundaries {
        None => Ok(Engine::world()),
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
            Engine::from_boundaries(&text).map_err(|e| format!("{}: {e}", path.display()))
        }
    }
}

pub fn router(engine: Arc<Engine>) -> Router {
    Router::new()
        .route("/render", post(render))
        .route("/validate", post(validate))
        .route("/suggest", post(suggest))
        .route("/catalog", get(|| async { Json(catalog()) }))
        .route("/gallery", get(gallery_index))
        .route("/gallery/{name}", get(gallery_entry))
        .route("/gallery/{name}/thumbnail", get(gallery_thumbnail))
        .with_state(engine)
}

/// Spec and data of a request body. Each may be given as a JSON value or
/// as a string holding JSON.
struct Inputs {
    spec: String,
    data: String,
}

fn inputs(body: &[u8]) -> Result<Inputs, String> {
    let root: Value = serde_json::from_slice(body).map_err(|e| format!("body is not JSON: {e}"))?;
    let field = |name: &str| match root.get(name) {
        Some(Value::String(s)) => Ok(s.clone()),
        Some(v) if !v.is_null() => Ok(v.to_string()),
        _ => Err(format!("body needs a {name:?} field")),
    };
    Ok(Inputs {
        spec: field("spec")?,
        data: field("data")?,
    })
}

fn bad_request(msg: &str) -> Response {
    (StatusCode::BAD_REQUEST, Json(json!({ "error": msg }))).into_response()
}

fn svg(body: String) -> Response {
    ([(header::CONTENT_TYPE, SVG_TYPE)], body).into_response()
}

fn invalid(report: &ValidationReport) -> Response {
    (StatusCode::UNPROCESSABLE_ENTITY, Json(report)).into_response()
}

/// Runs `f` on the blocking pool; rendering is CPU-bound.
async fn blocking<T: Send + 'static>(f: impl FnOnce() -> T + Send + 'static) -> T {
    tokio::task::spawn_blocking(f).await.expect("render task panicked")
}

async fn render(State(engine): State<Arc<Engine>>, body: Bytes) -> Response {
    let req = match inputs(&body) {
        Ok(r) => r,
        Err(msg) => return bad_request(&msg),
    };
    let out = blocking(move || engine.render(&req.spec, &req.data)).await;
    match out.svg {
        Some(body) => svg(body),
        None => invalid(&out.report),
    }
}

async fn validate(State(engine): State<Arc<Engine>>, body: Bytes) -> Response {
    match inputs(&body) {
        Ok(req) => Json(blocking(move || engine.validate(&req.spec, &req.data)).await).into_response(),
        Err(msg) => bad_request(&msg),
    }
}

async fn suggest(State(engine): State<Arc<Engine>>, body: Bytes) -> Response {
    let req = match inputs(&body) {
        Ok(r) => r,
        Err(msg) => return bad_request(&msg),
    };
    match blocking(move || engine.suggest(&req.spec, &req.data)).await {
        Ok(list) => Json(json!({ "suggestions": list })).into_response(),
        Err(report) => invalid(&report),
    }
}

async fn gallery_index() -> Json<Value> {
    let entries: Vec<Value> = GALLERY
        .iter()
        .map(|e| {
            json!({
                "name": e.name,
                "description": e.description,
                "thumbnail": format!("/gallery/{}/thumbnail", e.name),
            })
        })
        .collect();
    Json(Value::Array(entries))
}

fn not_found(name: &str) -> Response {
    (StatusCode::NOT_FOUND, Json(json!({ "error": format!("no gallery entry {name:?}") }))).into_response()
}

async fn gallery_entry(UrlPath(name): UrlPath<String>) -> Response {
    let Some(e) = gallery::find(&name) else {
        return not_found(&name);
    };
    let parse = |text: &str| serde_json::from_str::<Value>(text).expect("bundled gallery JSON parses");
    Json(json!({
        "name": e.name,
        "description": e.description,
        "spec": parse(e.spec),
        "data": parse(e.data),
    }))
    .into_response()
}

async fn gallery_thumbnail(State(engine): State<Arc<Engine>>, UrlPath(name): UrlPath<String>) -> Response {
    let Some(e) = gallery::find(&name) else {
        return not_found(&name);
    };
    let out = blocking(move || engine.render(e.spec, e.data)).await;
    match out.svg {
        Some(body) => svg(body),
        None => invalid(&out.report),
    }
}
