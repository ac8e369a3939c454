use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Parser, Debug)]
#[command(name = "graphlimits", version, about = "Local statistics, partitions and local rules for bounded-degree graphs")]
pub struct Cli {
    /// Write the JSON report to this file (atomically).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Print the JSON report on standard output instead of a summary.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum Command {
    /// Write a generated graph as an edge list.
    Generate(GenerateArgs),
    /// Rooted-ball distribution of one graph.
    Stats(StatsArgs),
    /// Truncated statistical distance between two graphs.
    Dstat(DstatArgs),
    /// Ball statistics along a sequence of graphs.
    Converge(ConvergeArgs),
    /// Isoperimetric peeling into bounded components.
    Partition(PartitionArgs),
    /// Peel two graphs and compare their component censuses.
    Equipartition(EquipartitionArgs),
    /// Component matching and the edit distance it induces.
    Match(MatchArgs),
    /// Labeling clouds and the local-global distance.
    Localglobal(LocalGlobalArgs),
    /// Learn or apply colored-ball rules.
    #[command(subcommand)]
    Transfer(TransferCommand),
    /// Encode or decode free-group actions.
    #[command(subcommand)]
    Schreier(SchreierCommand),
    /// Execute a stored experiment config (TOML or JSON).
    #[serde(skip)]
    Run(RunArgs),
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Cycle,
    Path,
    Grid,
    Torus,
    Folner,
    LeafedLine,
    RandomRegular,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct GenerateArgs {
    #[arg(value_enum)]
    pub family: Family,
    /// Vertex count (cycle, path, random-regular), side (folner) or edge
    /// count of the spine (leafed-line).
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub w: Option<usize>,
    #[arg(long)]
    pub h: Option<usize>,
    /// Degree (random-regular).
    #[arg(long)]
    pub d: Option<usize>,
    /// Degree-preserving double edge swaps applied afterwards.
    #[arg(long, default_value_t = 0)]
    #[serde(default)]
    pub swaps: usize,
    #[arg(long, default_value_t = 0)]
    #[serde(default)]
    pub seed: u64,
    /// Edge-list destination; standard output when absent.
    #[arg(long)]
    pub to: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct StatsArgs {
    pub file: PathBuf,
    #[arg(short, long, default_value_t = 4)]
    pub r: u32,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct DstatArgs {
    pub a: PathBuf,
    pub b: PathBuf,
    #[arg(short, long, default_value_t = 4)]
    pub r: u32,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct ConvergeArgs {
    #[arg(required = true)]
    pub files: Vec<PathBuf>,
    #[arg(short, long, default_value_t = 4)]
    pub r: u32,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct PartitionArgs {
    pub file: PathBuf,
    #[arg(long)]
    pub eps: f64,
    #[arg(long = "K", visible_alias = "k")]
    #[serde(rename = "K")]
    pub k: usize,
    #[arg(long, default_value_t = 0)]
    #[serde(default)]
    pub seed: u64,
    /// Also profile hyperfiniteness over these eps values (comma separated).
    #[arg(long, value_delimiter = ',')]
    #[serde(default)]
    pub profile: Vec<f64>,
    /// Write the cut edges as an edge list.
    #[arg(long)]
    pub cut_to: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct EquipartitionArgs {
    pub a: PathBuf,
    pub b: PathBuf,
    #[arg(long)]
    pub eps: f64,
    #[arg(long = "K", visible_alias = "k")]
    #[serde(rename = "K")]
    pub k: usize,
    /// Census L1 threshold.
    #[arg(long, default_value_t = 0.1)]
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[arg(long, default_value_t = 0)]
    #[serde(default)]
    pub seed: u64,
}

fn default_delta() -> f64 {
    0.1
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct MatchArgs {
    pub a: PathBuf,
    pub b: PathBuf,
    #[arg(long)]
    pub eps: f64,
    #[arg(long = "K", visible_alias = "k")]
    #[serde(rename = "K")]
    pub k: usize,
    #[arg(long, default_value_t = 0)]
    #[serde(default)]
    pub seed: u64,
    /// Pass when edit_distance / n is below this.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Include the vertex permutation in the report.
    #[arg(long)]
    #[serde(default)]
    pub permutation: bool,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct LocalGlobalArgs {
    pub a: PathBuf,
    pub b: PathBuf,
    #[arg(long, default_value_t = 2)]
    pub k_max: u64,
    #[arg(short, long, default_value_t = 1)]
    pub r: u32,
    #[arg(long, default_value_t = 8)]
    pub budget_random: usize,
    #[arg(long, default_value_t = 8)]
    pub budget_opt: usize,
    /// Proposed moves per hill-climb chain.
    #[arg(long, default_value_t = 2000)]
    pub steps: usize,
    #[arg(long, default_value_t = 0)]
    #[serde(default)]
    pub seed: u64,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Vertex,
    Subgraph,
}

#[derive(Subcommand, Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "action", rename_all = "snake_case")]
pub enum TransferCommand {
    /// Learn a rule from a reference graph and write it as JSON.
    Learn(LearnArgs),
    /// Apply a stored rule to a target graph under a fresh coloring.
    Apply(ApplyArgs),
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct LearnArgs {
    #[arg(long = "ref")]
    #[serde(rename = "ref")]
    pub reference: PathBuf,
    #[arg(long, value_enum)]
    pub mode: Mode,
    /// Ball radius of the rule.
    #[arg(short, long)]
    pub r: u32,
    /// Color bit length.
    #[arg(short, long)]
    pub s: u32,
    /// Peeling threshold for the reference partition.
    #[arg(long)]
    pub eps: f64,
    #[arg(long = "K", visible_alias = "k")]
    #[serde(rename = "K")]
    pub k: usize,
    /// Subgraph to encode (subgraph mode); the peeled reference when absent.
    #[arg(long)]
    pub subgraph: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    #[serde(default)]
    pub seed: u64,
    /// Rule destination.
    #[arg(long)]
    pub rule: PathBuf,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct ApplyArgs {
    #[arg(long)]
    pub target: PathBuf,
    #[arg(long)]
    pub rule: PathBuf,
    #[arg(long, default_value_t = 0)]
    #[serde(default)]
    pub seed: u64,
    /// Write the resulting graph (target minus deleted edges, or the kept
    /// subgraph) as an edge list.
    #[arg(long)]
    pub to: Option<PathBuf>,
}

#[derive(Subcommand, Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "action", rename_all = "snake_case")]
pub enum SchreierCommand {
    /// Action file to marker-graph edge list.
    Encode(EncodeArgs),
    /// Marker-graph edge list back to an action file.
    Decode(DecodeArgs),
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct EncodeArgs {
    pub file: PathBuf,
    #[arg(long)]
    pub to: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
pub struct DecodeArgs {
    pub file: PathBuf,
    /// Number of generators; read from the degree bound when absent.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub to: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct RunArgs {
    pub config: PathBuf,
}

/// A stored run: one command with its flags, plus an optional report path.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(flatten)]
    pub command: Command,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}
