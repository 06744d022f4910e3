#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::sync::Arc;

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use image::{Rgba, RgbaImage};
use mapperscope::bundle::{BundleConfig, ModelBundle};
use mapperscope::cli::{AnalyzeArgs, BuildArgs, RuleArgs, SynthArgs};
use mapperscope::commands;
use mapperscope::server::router;
use mapperscope_core::dataset::{write_spatial_activation, SpatialActivation};
use tempfile::TempDir;
use tower::ServiceExt;

pub struct Fixture {
    pub dir: TempDir,
    pub prefix: PathBuf,
    pub model: PathBuf,
    pub clusters: PathBuf,
    pub images_root: PathBuf,
    pub tensors_root: PathBuf,
}

pub fn rule() -> RuleArgs {
    RuleArgs {
        min_count: 3,
        max_accuracy: 0.40,
    }
}

pub fn build_args(prefix: &Path, out: &Path, resolution: usize, gain: f64) -> BuildArgs {
    BuildArgs {
        dataset: prefix.to_path_buf(),
        resolution,
        gain,
        bins: 10,
        lens_dims: 2,
        top_k: 1,
        rule: rule(),
        out: out.to_path_buf(),
    }
}

pub fn analyze_args(model: &Path, prefix: &Path, out: &Path) -> AnalyzeArgs {
    AnalyzeArgs {
        model: model.to_path_buf(),
        dataset: prefix.to_path_buf(),
        rule: rule(),
        top_k: None,
        threshold: 0.5,
        min_nodes: 2,
        out: out.to_path_buf(),
    }
}

/// Synthetic 5-cluster dataset, model and clusters, plus images for the
/// first rows and a tensor for row 0 only.
pub fn fixture() -> Fixture {
    let dir = tempfile::tempdir().unwrap();
    let prefix = dir.path().join("ds");
    commands::synth(&SynthArgs {
        per_cluster: 60,
        clusters: Some(5),
        dims: 16,
        separation: 20.0,
        error_rates: vec![0.9, 0.9, 0.9, 0.9, 0.02],
        seed: 3,
        out_prefix: prefix.clone(),
    })
    .unwrap();
    let model = dir.path().join("model.json");
    commands::build(&build_args(&prefix, &model, 10, 2.0)).unwrap();
    let clusters = dir.path().join("clusters.json");
    commands::analyze(&analyze_args(&model, &prefix, &clusters)).unwrap();

    let images_root = dir.path().join("root");
    std::fs::create_dir_all(images_root.join("images")).unwrap();
    for row in 0..3 {
        let img = RgbaImage::from_fn(8, 6, |x, y| Rgba([(x * 30) as u8, (y * 40) as u8, row * 50, 255]));
        img.save(images_root.join(format!("images/img_{row:05}.png"))).unwrap();
    }
    let tensors_root = dir.path().join("tensors");
    std::fs::create_dir_all(&tensors_root).unwrap();
    let t = SpatialActivation::new("img_00000", 2, 2, 2, vec![0.0, 0.0, 1.0, 0.0, 0.0, 2.0, 3.0, 4.0]).unwrap();
    write_spatial_activation(&t, &tensors_root.join("img_00000.amf3")).unwrap();

    Fixture {
        dir,
        prefix,
        model,
        clusters,
        images_root,
        tensors_root,
    }
}

impl Fixture {
    pub fn config(&self, routing: bool) -> BundleConfig {
        BundleConfig {
            model: self.model.clone(),
            dataset: self.prefix.clone(),
            clusters: Some(self.clusters.clone()),
            images_root: self.images_root.clone(),
            tensors_root: Some(self.tensors_root.clone()),
            routing,
            slack: 1.0,
        }
    }

    pub fn app(&self, routing: bool) -> (Router, Arc<ModelBundle>) {
        let bundle = Arc::new(ModelBundle::load(&self.config(routing)).unwrap());
        (router(bundle.clone(), None), bundle)
    }
}

pub async fn send(app: &Router, req: Request<Body>) -> (StatusCode, Vec<u8>, String) {
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let ctype = resp
        .headers()
        .get("content-type")
        .map(|v| v.to_str().unwrap().to_string())
        .unwrap_or_default();
    let body = resp.into_body().collect().await.unwrap().to_bytes().to_vec();
    (status, body, ctype)
}

pub async fn get(app: &Router, uri: &str) -> (StatusCode, Vec<u8>, String) {
    send(app, Request::get(uri).body(Body::empty()).unwrap()).await
}

pub async fn post_json(app: &Router, uri: &str, body: &serde_json::Value) -> (StatusCode, Vec<u8>) {
    let req = Request::post(uri)
        .header("content-type", "application/json")
        .body(Body::from(serde_json::to_vec(body).unwrap()))
        .unwrap();
    let (s, b, _) = send(app, req).await;
    (s, b)
}
