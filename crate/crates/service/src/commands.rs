use std::fs;
use std::path::Path;

use mapperscope_core::analysis::{
    cluster_summary, extract_problem_clusters, problematic_labels, ClusterReport, ProblematicRule,
};
use mapperscope_core::coloring::{accuracy_coloring, correctness_flags, density_coloring};
use mapperscope_core::dataset::{
    load_dataset, load_metadata, load_spatial_activation, metadata_path, synth_dataset,
    write_dataset, ImageRecord, SynthParams,
};
use mapperscope_core::geometry::{column_stats, pca_lens};
use mapperscope_core::heatmap::{overlay_png, AggregationMode};
use mapperscope_core::mapper::{build_mapper, GraphExport, MapperGraph, MapperParams};
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::cli::{AnalyzeArgs, BuildArgs, HeatmapArgs, RuleArgs, SynthArgs};
use crate::error::CliError;

pub type Result<T, E = CliError> = std::result::Result<T, E>;

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

fn read_file(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| CliError::io(path, e))
}

pub fn synth(args: &SynthArgs) -> Result<()> {
    let params = SynthParams {
        n_per_cluster: args.per_cluster,
        n_clusters: args.clusters.unwrap_or(args.error_rates.len()),
        dims: args.dims,
        separation: args.separation,
        error_rate_per_cluster: args.error_rates.clone(),
        seed: args.seed,
    };
    let out = synth_dataset(&params)?;
    write_dataset(&out.dataset, &args.out_prefix)?;
    Ok(())
}

fn rule_of(args: &RuleArgs, top_k: usize) -> Result<ProblematicRule> {
    if args.min_count == 0 {
        return Err(CliError::new("BadRule", "min-count must be at least 1"));
    }
    if !(0.0..=1.0).contains(&args.max_accuracy) {
        return Err(CliError::new("BadRule", "max-accuracy must be in [0, 1]"));
    }
    if top_k == 0 {
        return Err(CliError::new("BadRule", "top-k must be at least 1"));
    }
    Ok(ProblematicRule {
        min_count: args.min_count,
        max_accuracy: args.max_accuracy,
        top_k,
    })
}

/// Runs the whole build and returns the model.json bytes.
pub fn build_model(args: &BuildArgs) -> Result<Vec<u8>> {
    let rule = rule_of(&args.rule, args.top_k)?;
    let ds = load_dataset(&args.dataset).map_err(|e| CliError::from_dataset(e, Some(&args.dataset)))?;
    let m = ds.matrix();
    let stats = column_stats(m);
    let lens = pca_lens(m, args.lens_dims.min(m.n_cols()))?;
    let params = MapperParams {
        resolution: args.resolution,
        gain: args.gain,
        bins: args.bins,
    };
    let graph = build_mapper(m, &stats, &lens, &params)?;
    let flags = correctness_flags(ds.records(), args.top_k);
    let marks = problematic_labels(ds.records(), &rule).marks;
    let colorings = [
        accuracy_coloring(&graph, &flags)?,
        density_coloring(&graph, &marks)?,
    ];
    let mut extra = Map::new();
    extra.insert("top_k".into(), json!(args.top_k));
    extra.insert("problematic_rule".into(), serde_json::to_value(rule).expect("rule serializes"));
    extra.insert("explained_variance".into(), json!(lens.explained_variance));
    Ok(GraphExport::new(&graph, &colorings, extra).to_bytes())
}

pub fn build(args: &BuildArgs) -> Result<()> {
    let bytes = build_model(args)?;
    write_file(&args.out, &bytes)
}

/// A model file parsed and checked against the graph invariants.
pub struct LoadedModel {
    pub bytes: Vec<u8>,
    pub export: GraphExport,
    pub graph: MapperGraph,
}

pub fn load_model(path: &Path) -> Result<LoadedModel> {
    let bytes = read_file(path).map_err(|e| {
        if e.code == "FileMissing" {
            CliError::new("ModelMissing", e.message)
        } else {
            e
        }
    })?;
    let export = GraphExport::from_slice(&bytes)?;
    let graph = export.to_graph()?;
    Ok(LoadedModel {
        bytes,
        export,
        graph,
    })
}

pub fn load_records(prefix: &Path, n_points: usize) -> Result<Vec<ImageRecord>> {
    let records =
        load_metadata(&metadata_path(prefix)).map_err(|e| CliError::from_dataset(e, Some(prefix)))?;
    if records.len() != n_points {
        return Err(CliError::new(
            "RowCountMismatch",
            format!("model covers {n_points} points but metadata has {} records", records.len()),
        ));
    }
    Ok(records)
}

/// Parameters that produced a clusters file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyzeRule {
    #[serde(flatten)]
    pub rule: ProblematicRule,
    pub threshold: f64,
    pub min_nodes: usize,
    pub coloring: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClustersFile {
    pub rule: AnalyzeRule,
    pub clusters: Vec<ClusterReport>,
}

impl ClustersFile {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = serde_json::to_vec_pretty(self).expect("clusters serialize");
        out.push(b'\n');
        out
    }
}

pub struct Analysis {
    pub file: ClustersFile,
    pub summary: String,
}

pub fn analyze_model(args: &AnalyzeArgs) -> Result<Analysis> {
    let model = load_model(&args.model)?;
    let records = load_records(&args.dataset, model.graph.params.n_points)?;
    let top_k = args
        .top_k
        .or_else(|| model.export.params.get("top_k").and_then(Value::as_u64).map(|k| k as usize))
        .unwrap_or(1);
    let rule = rule_of(&args.rule, top_k)?;
    if !(0.0..=1.0).contains(&args.threshold) {
        return Err(CliError::new("BadThreshold", "threshold must be in [0, 1]"));
    }
    if args.min_nodes == 0 {
        return Err(CliError::new("BadThreshold", "min-nodes must be at least 1"));
    }
    let marks = problematic_labels(&records, &rule).marks;
    let density = density_coloring(&model.graph, &marks)?;
    let clusters =
        extract_problem_clusters(&model.graph, &density, &records, args.threshold, args.min_nodes)?;
    let flags = correctness_flags(&records, top_k);
    let summary = cluster_summary(&clusters, &records, &flags)
        .iter()
        .map(|s| format!("{s}\n"))
        .collect();
    Ok(Analysis {
        file: ClustersFile {
            rule: AnalyzeRule {
                rule,
                threshold: args.threshold,
                min_nodes: args.min_nodes,
                coloring: density.name,
            },
            clusters,
        },
        summary,
    })
}

pub fn analyze(args: &AnalyzeArgs) -> Result<String> {
    let analysis = analyze_model(args)?;
    write_file(&args.out, &analysis.file.to_bytes())?;
    let n = analysis.file.clusters.len();
    Ok(format!("{n} problem cluster{}\n{}", if n == 1 { "" } else { "s" }, analysis.summary))
}

pub fn heatmap(args: &HeatmapArgs) -> Result<()> {
    let mode: AggregationMode = args.mode.parse()?;
    let tensor = load_spatial_activation(&args.tensor)?;
    let base = read_file(&args.image)?;
    let png = overlay_png(&tensor, &base, mode, args.alpha)?;
    write_file(&args.out, &png)
}
