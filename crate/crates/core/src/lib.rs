//! Distributed computation of link-based network metrics.
//!
//! Every node of an undirected graph holds a positive attribute `y_i`.
//! Link metrics such as the total variation `(1/M) sum_edges (y_i - y_j)^2`
//! or the edge average of any polynomial `f(y_i, y_j)` are computed here
//! with nothing but neighbor-local weighted-average-consensus iterations,
//! then checked against centralized reference values.
//!
//! * [`graph`]: graphs, SNAP edge lists, components, diameter, Laplacian
//! * [`engine`]: WAC and min-consensus kernels, step-size bounds
//! * [`metrics`]: total-variation and polynomial pipelines, value shifting
//! * [`spectral`]: symmetrized iteration matrix, eigenvalues, convergence factor
//! * [`simharness`]: synchronous message-passing simulator
//! * [`oracle`]: centralized reference values
//! * [`synthetic`]: seeded Erdős–Rényi graphs and exponential attributes
//! * [`experiment`] / [`cli`]: the experiment runner behind the `linkmetric` binary
//!
//! ## Examples
//!
//! One runnable program per capability, `cargo run --release --example <name>`:
//!
//! - **`total_variation`**: the three-stage pipeline against the exact value
//! - **`polynomial_metric`**: a custom `f(a, b)` term by term
//! - **`value_shifting`**: same metric, different convergence speed
//! - **`spectral_analysis`**: predicted vs. measured convergence rate
//! - **`message_passing`**: per-node programs, including a custom one
//! - **`min_consensus`**: agreeing on a step size in diameter rounds
//! - **`edge_list_ingest`**: files in, `summary.json` and trace CSVs out
//! - **`convergence_traces`**: observing every iterate of every stage

pub mod cli;
pub mod engine;
pub mod error;
pub mod experiment;
pub mod graph;
pub mod matrix;
pub mod metrics;
pub mod oracle;
pub mod simharness;
pub mod spectral;
pub mod synthetic;

pub use engine::{AttributeVector, ConsensusConfig, ConsensusRun, EpsilonPolicy, WeightVector};
pub use error::{Error, Result};
pub use graph::Graph;
pub use metrics::MetricSpec;
