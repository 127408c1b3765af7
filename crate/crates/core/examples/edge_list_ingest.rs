//! Loads a SNAP-style edge list and an attribute file, then runs the full
//! experiment pipeline, writing `summary.json` and trace CSVs.
//!
//! ```text
//! cargo run --example edge_list_ingest -- [OUT_DIR]
//! ```

use std::path::Path;

use linkmetric::experiment::{
    load_attributes, load_graph, run_experiment, AttributeSource, ExperimentConfig, GraphSource,
    MetricChoice,
};
use linkmetric::MetricSpec;

fn main() -> anyhow::Result<()> {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/data");
    let out = std::env::args()
        .nth(1)
        .map(Into::into)
        .unwrap_or_else(|| std::env::temp_dir().join("linkmetric_ingest"));

    let graph = GraphSource::EdgeList(data.join("karate_club.txt"));
    let attributes = AttributeSource::File(data.join("karate_attrs.txt"));
    let g = load_graph(&graph)?;
    let y = load_attributes(&attributes, &g)?;
    println!("{} nodes, {} edges, diameter {}", g.node_count(), g.edge_count(), g.diameter()?);
    println!("first labels: {:?}, first values: {:?}", &g.labels()[..4], &y.values()[..4]);

    let mut cfg = ExperimentConfig::new(graph.clone(), attributes.clone(), out.join("tv"));
    cfg.oracle = true;
    cfg.analyze = true;
    cfg.trace_every = 10;
    let tv = run_experiment(&cfg)?;

    let spec = MetricSpec::parse(&std::fs::read_to_string(data.join("tv_spec.txt"))?)?;
    let mut cfg = ExperimentConfig::new(graph, attributes, out.join("poly"));
    cfg.metric = MetricChoice::Polynomial(spec);
    cfg.oracle = true;
    cfg.trace_every = 0;
    let poly = run_experiment(&cfg)?;

    for (name, o) in [("tv", &tv), ("squared difference", &poly)] {
        println!(
            "{name}: value={} oracle={} converged={}",
            o.summary["metric_value"], o.summary["oracle"]["metric_value"], o.converged
        );
    }
    println!("outputs in {}", out.display());
    Ok(())
}
