mod common;

use axum::http::StatusCode;
use common::{fixture, get, post_json};
use mapperscope::bundle::ModelBundle;
use mapperscope::server::NodeView;
use mapperscope_core::analysis::{route_point, RouteDecision};
use mapperscope_core::dataset::{load_metadata, metadata_path};
use serde_json::{json, Value};

#[tokio::test]
async fn graph_is_the_built_file_byte_for_byte() {
    let fx = fixture();
    let (app, _) = fx.app(false);
    let (status, body, ctype) = get(&app, "/api/graph").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(ctype, "application/json");
    assert_eq!(body, std::fs::read(&fx.model).unwrap());
    let v: Value = serde_json::from_slice(&body).unwrap();
    for key in ["params", "nodes", "edges", "colorings"] {
        assert!(v.get(key).is_some(), "{key}");
    }
}

#[tokio::test]
async fn node_members_match_the_metadata_file() {
    let fx = fixture();
    let (app, bundle) = fx.app(false);
    let records = load_metadata(&metadata_path(&fx.prefix)).unwrap();
    let (status, body, _) = get(&app, "/api/nodes/0").await;
    assert_eq!(status, StatusCode::OK);
    let view: NodeView = serde_json::from_slice(&body).unwrap();
    assert_eq!(view.id, 0);
    let members = &bundle.graph.nodes[0].members;
    assert_eq!(view.members.len(), members.len());
    for (m, &p) in view.members.iter().zip(members) {
        let r = &records[p];
        assert_eq!(m.image_id, r.image_id);
        assert_eq!(m.image_path, r.image_path);
        assert_eq!(m.true_label, r.true_label);
        assert_eq!(m.predictions, r.predictions);
        assert_eq!(m.correct_top1, r.predictions[0].label == r.true_label);
    }
    let n = bundle.graph.nodes.len();
    assert_eq!(get(&app, &format!("/api/nodes/{n}")).await.0, StatusCode::NOT_FOUND);
    assert_eq!(get(&app, "/api/nodes/abc").await.0, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn clusters_endpoint_serves_the_file() {
    let fx = fixture();
    let (app, _) = fx.app(false);
    let (status, body, _) = get(&app, "/api/clusters").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body, std::fs::read(&fx.clusters).unwrap());
    let v: Value = serde_json::from_slice(&body).unwrap();
    assert_eq!(v["rule"]["min_count"], 3);
    assert_eq!(v["clusters"].as_array().unwrap().len(), 4);
}

#[tokio::test]
async fn images_and_heatmaps() {
    let fx = fixture();
    let (app, _) = fx.app(false);
    let (status, body, ctype) = get(&app, "/api/images/img_00001").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(ctype, "image/png");
    assert_eq!(body, std::fs::read(fx.images_root.join("images/img_00001.png")).unwrap());
    assert_eq!(get(&app, "/api/images/nobody").await.0, StatusCode::NOT_FOUND);
    // record exists, file does not
    assert_eq!(get(&app, "/api/images/img_00050").await.0, StatusCode::NOT_FOUND);

    let (status, png, ctype) = get(&app, "/api/images/img_00000/heatmap?mode=max&alpha=0.5").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(ctype, "image/png");
    let img = image::load_from_memory(&png).unwrap().to_rgba8();
    assert_eq!(img.dimensions(), (8, 6));
    let (_, again, _) = get(&app, "/api/images/img_00000/heatmap?mode=max&alpha=0.5").await;
    assert_eq!(png, again);

    // image but no tensor
    assert_eq!(get(&app, "/api/images/img_00001/heatmap").await.0, StatusCode::NOT_FOUND);
    assert_eq!(get(&app, "/api/images/img_00000/heatmap?mode=mean").await.0, StatusCode::BAD_REQUEST);
    assert_eq!(get(&app, "/api/images/img_00000/heatmap?alpha=2").await.0, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn route_matches_offline_and_rejects_bad_vectors() {
    let fx = fixture();
    let (app, bundle) = fx.app(true);
    let model = bundle.routing.as_ref().unwrap();
    let c = &model.clusters[2];
    let (status, body) = post_json(&app, "/api/route", &json!(c.centroid)).await;
    assert_eq!(status, StatusCode::OK);
    let v: Value = serde_json::from_slice(&body).unwrap();
    assert_eq!(v["route"], "cluster");
    assert_eq!(v["cluster_id"], 2);

    let (status, body) = post_json(&app, "/api/route", &json!({"features": c.centroid, "slack": 2.0})).await;
    assert_eq!(status, StatusCode::OK);
    let online: RouteDecision = serde_json::from_slice(&body).unwrap();
    assert_eq!(online, route_point(&c.centroid, model, 2.0).unwrap());

    assert_eq!(post_json(&app, "/api/route", &json!([])).await.0, StatusCode::BAD_REQUEST);
    assert_eq!(post_json(&app, "/api/route", &json!([1.0, 2.0])).await.0, StatusCode::BAD_REQUEST);
    assert_eq!(post_json(&app, "/api/route", &json!({"x": 1})).await.0, StatusCode::BAD_REQUEST);
    let (status, body) = post_json(&app, "/api/route", &json!(["a"])).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let err: Value = serde_json::from_slice(&body).unwrap();
    assert!(err["error"]["code"].is_string());
}

#[tokio::test]
async fn route_without_routing_is_not_found() {
    let fx = fixture();
    let (app, _) = fx.app(false);
    assert_eq!(post_json(&app, "/api/route", &json!([0.0])).await.0, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn concurrent_reads_equal_sequential_reads() {
    let fx = fixture();
    let (app, bundle) = fx.app(false);
    let uris: Vec<String> = (0..bundle.graph.nodes.len().min(20))
        .map(|i| format!("/api/nodes/{i}"))
        .chain(["/api/graph".into(), "/api/clusters".into(), "/api/images/img_00000/heatmap".into()])
        .collect();
    let mut sequential = Vec::new();
    for u in &uris {
        sequential.push(get(&app, u).await);
    }
    let mut tasks = Vec::new();
    for round in 0..4 {
        for (i, u) in uris.iter().enumerate() {
            let (app, u) = (app.clone(), u.clone());
            tasks.push(tokio::spawn(async move { (i, round, get(&app, &u).await) }));
        }
    }
    for t in tasks {
        let (i, _, got) = t.await.unwrap();
        assert_eq!(got, sequential[i], "{}", uris[i]);
    }
}

#[test]
fn startup_rejects_inconsistent_inputs() {
    let fx = fixture();
    let mut cfg = fx.config(false);
    std::fs::write(fx.dir.path().join("bad.json"), b"{\"nodes\": []}").unwrap();
    cfg.model = fx.dir.path().join("bad.json");
    assert_eq!(ModelBundle::load(&cfg).unwrap_err().code, "BadModel");

    let mut cfg = fx.config(true);
    cfg.clusters = None;
    assert_eq!(ModelBundle::load(&cfg).unwrap_err().code, "ClustersMissing");

    let mut cfg = fx.config(false);
    cfg.model = fx.dir.path().join("absent.json");
    assert_eq!(ModelBundle::load(&cfg).unwrap_err().code, "ModelMissing");
}

#[tokio::test]
async fn static_files_are_served_at_root() {
    let fx = fixture();
    let site = fx.dir.path().join("site");
    std::fs::create_dir_all(&site).unwrap();
    std::fs::write(site.join("index.html"), "<html>ok</html>").unwrap();
    let bundle = std::sync::Arc::new(ModelBundle::load(&fx.config(false)).unwrap());
    let app = mapperscope::server::router(bundle, Some(&site));
    let (status, body, _) = get(&app, "/").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body, b"<html>ok</html>");
    assert_eq!(get(&app, "/api/graph").await.0, StatusCode::OK);
}
