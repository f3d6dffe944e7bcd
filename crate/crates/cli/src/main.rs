use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use valuegraph::causal::{
    discover, emit_edge_list, parse_edge_list, resolve_against_catalog, transitive_reduction, CausalGraph, CiKind,
    NumericMatrix, PcConfig,
};
use valuegraph::datamodel::{
    filter_values, load_catalog, load_responses, load_roles, save_catalog, save_responses, split_dataset, Catalog,
    DatasetSplit, QuestionScope, SteeringCondition,
};
use valuegraph::harness::{
    export_dot, report_csv, report_markdown, run_questionnaire, ChatEndpoint, EndpointConfig, HttpChatEndpoint,
    PromptTemplate, Questionnaire, RunConfig, StubResponder,
};
use valuegraph::metrics::{aggregate_report, compare_graphs, ChangeMode, MetricReport, SteeringSet};
use valuegraph::scoring::{build_matrix, classify_answer, Classification, OrientationMatrix};
use valuegraph::synthlab::{
    evaluation_conditions, random_dag, sample_dataset, training_conditions, NoiseCoupling, ScmSpec,
};

#[derive(Parser)]
#[command(name = "valuegraph", version, about = "Causal graphs over LLM value dimensions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a catalog, roles and responses; write the filtered catalog and split.
    Ingest(IngestArgs),
    /// Score labeled responses into an orientation matrix.
    Score(ScoreArgs),
    /// Run PC discovery on an orientation matrix.
    Discover(DiscoverArgs),
    /// Transitive reduction of a DAG.
    Reduce(ReduceArgs),
    /// Expected accuracy and unexpected frequency of a graph.
    Metrics(MetricsArgs),
    /// Values a graph predicts to change when steering a target value.
    Predict(PredictArgs),
    /// Compare a graph with a reference edge list on the same steering data.
    Compare(CompareArgs),
    /// Generate a synthetic world with known ground truth.
    Simulate(SimulateArgs),
    /// Run the questionnaire against a chat endpoint or the offline stub.
    Run(RunArgs),
    /// Render a graph as DOT or a metric report as Markdown/CSV.
    Export(ExportArgs),
}

#[derive(Args)]
struct IngestArgs {
    #[arg(long)]
    catalog: PathBuf,
    #[arg(long)]
    roles: PathBuf,
    #[arg(long)]
    responses: Option<PathBuf>,
    /// Keep values with more than this many questions.
    #[arg(long, default_value_t = 20)]
    min_questions: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Scope {
    Dyad,
    Train,
    Test,
    All,
}

impl From<Scope> for QuestionScope {
    fn from(s: Scope) -> Self {
        match s {
            Scope::Dyad => QuestionScope::Dyad,
            Scope::Train => QuestionScope::Train,
            Scope::Test => QuestionScope::Test,
            Scope::All => QuestionScope::All,
        }
    }
}

#[derive(Args)]
struct ScoreArgs {
    #[arg(long)]
    catalog: PathBuf,
    #[arg(long)]
    responses: PathBuf,
    #[arg(long)]
    split: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Scope::All)]
    scope: Scope,
    /// Label unlabeled answers outside the prefix rules with the offline judge.
    #[arg(long)]
    stub_judge: bool,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum CiChoice {
    FisherZ,
    Permutation,
}

#[derive(Args)]
struct DiscoverArgs {
    #[arg(long)]
    matrix: PathBuf,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, default_value_t = 3)]
    max_cond: usize,
    #[arg(long, value_enum, default_value_t = CiChoice::FisherZ)]
    ci: CiChoice,
    #[arg(long, default_value_t = 1000)]
    n_perm: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Disable order-independent skeleton search.
    #[arg(long)]
    unstable: bool,
    /// Writes `<prefix>.skeleton.json`, `.cpdag.json`, `.dag.json` and `.reduced.json`.
    #[arg(long)]
    out_prefix: PathBuf,
}

#[derive(Args)]
struct ReduceArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Role,
    Sae,
}

impl From<Mode> for ChangeMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Role => ChangeMode::Role,
            Mode::Sae => ChangeMode::Sae,
        }
    }
}

#[derive(Args)]
struct SteeringArgs {
    #[arg(long)]
    matrix: PathBuf,
    #[arg(long, default_value = "r0")]
    baseline: String,
    #[arg(long, value_enum, default_value_t = Mode::Role)]
    mode: Mode,
    /// In SAE mode, include features applied to every role, not just the baseline.
    #[arg(long)]
    all_roles: bool,
    /// Orientation differences up to this size count as unchanged.
    #[arg(long)]
    tolerance: Option<f64>,
}

#[derive(Args)]
struct MetricsArgs {
    #[arg(long)]
    graph: PathBuf,
    #[command(flatten)]
    steering: SteeringArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct PredictArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long)]
    target: String,
}

#[derive(Args)]
struct CompareArgs {
    #[arg(long)]
    graph: PathBuf,
    /// Reference edge list; node names are resolved against the catalog.
    #[arg(long = "ref")]
    reference: PathBuf,
    #[arg(long)]
    catalog: PathBuf,
    #[command(flatten)]
    steering: SteeringArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 17)]
    nodes: usize,
    #[arg(long, default_value_t = 2.0)]
    degree: f64,
    #[arg(long, default_value_t = 101)]
    roles: usize,
    #[arg(long, default_value_t = 25)]
    features: u32,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    catalog: PathBuf,
    #[arg(long)]
    roles: PathBuf,
    /// JSON array of conditions; defaults to one plain role condition per role.
    #[arg(long)]
    conditions: Option<PathBuf>,
    #[arg(long)]
    split: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Scope::All)]
    scope: Scope,
    #[arg(long, required_unless_present = "stub")]
    endpoint: Option<String>,
    #[arg(long, default_value = "default")]
    model: String,
    /// Environment variable holding the API key.
    #[arg(long)]
    api_key_env: Option<String>,
    /// Separate judge endpoint; defaults to the main one.
    #[arg(long)]
    judge_endpoint: Option<String>,
    #[arg(long)]
    judge_model: Option<String>,
    /// Answer offline with the deterministic stub responder.
    #[arg(long)]
    stub: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 4)]
    concurrency: usize,
    #[arg(long, default_value_t = 5)]
    retries: u32,
    #[arg(long, default_value_t = 60)]
    timeout: u64,
    #[arg(long)]
    judge_thoughts: bool,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    manifest: Option<PathBuf>,
}

#[derive(Args)]
struct ExportArgs {
    /// Graph JSON to render as DOT.
    #[arg(long, conflicts_with = "report")]
    graph: Option<PathBuf>,
    /// Metric report JSON to render.
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long)]
    dot: bool,
    #[arg(long)]
    md: bool,
    #[arg(long)]
    csv: bool,
    #[arg(long)]
    edges: bool,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn load_graph(path: &Path) -> Result<CausalGraph> {
    CausalGraph::from_json(&read(path)?).with_context(|| format!("parsing graph {}", path.display()))
}

fn load_matrix(path: &Path) -> Result<OrientationMatrix> {
    OrientationMatrix::from_json(&read(path)?).with_context(|| format!("parsing matrix {}", path.display()))
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn steering_set<'a>(matrix: &'a OrientationMatrix, args: &SteeringArgs) -> Result<SteeringSet<'a>> {
    let set = if args.all_roles {
        SteeringSet::with_all_roles(matrix, &args.baseline, args.mode.into())?
    } else {
        SteeringSet::new(matrix, &args.baseline, args.mode.into())?
    };
    Ok(match args.tolerance {
        Some(t) => set.with_tolerance(t),
        None => set,
    })
}

fn ingest(args: IngestArgs) -> Result<()> {
    let catalog = filter_values(&load_catalog(&args.catalog)?, args.min_questions)?;
    let roles = load_roles(&args.roles)?;
    let mut n_records = 0;
    if let Some(path) = &args.responses {
        n_records = load_responses(path, &catalog, Some(&roles))?.len();
    }
    let split = split_dataset(&catalog, &roles, args.seed)?;
    fs::create_dir_all(&args.out_dir)?;
    save_catalog(&catalog, &args.out_dir.join("catalog.json"))?;
    split.save(&args.out_dir.join("split.json"))?;
    println!(
        "{} values, {} roles ({} test), {} records",
        catalog.values().len(),
        roles.len(),
        split.test_roles.len(),
        n_records
    );
    Ok(())
}

fn score_cmd(args: ScoreArgs) -> Result<()> {
    let catalog = load_catalog(&args.catalog)?;
    let mut records = load_responses(&args.responses, &catalog, None)?;
    for r in records.iter_mut().filter(|r| r.label.is_none()) {
        r.label = Some(match classify_answer(&r.answer) {
            Classification::Label(l) => l,
            Classification::NeedsJudge if args.stub_judge => valuegraph::harness::stub_judge(&r.answer),
            Classification::NeedsJudge => bail!(
                "answer {:?} ({} / {}) needs the judge; label it via `run` or pass --stub-judge",
                r.answer,
                r.condition.key(),
                r.question_id
            ),
        });
    }
    let split = args.split.as_deref().map(DatasetSplit::load).transpose()?;
    let matrix = build_matrix(&records, &catalog, split.as_ref(), args.scope.into())?;
    write(&args.out, &matrix.to_json())?;
    if let Some(csv) = &args.csv {
        write(csv, &matrix.to_csv())?;
    }
    println!("{} rows x {} values, {} missing cells", matrix.n_rows(), matrix.columns().len(), matrix.missing_cells());
    Ok(())
}

fn discover_cmd(args: DiscoverArgs) -> Result<()> {
    let matrix = load_matrix(&args.matrix)?;
    let config = PcConfig {
        alpha: args.alpha,
        max_cond_size: args.max_cond,
        stable: !args.unstable,
        ci_test: match args.ci {
            CiChoice::FisherZ => CiKind::FisherZ,
            CiChoice::Permutation => CiKind::Permutation { n_perm: args.n_perm, seed: args.seed },
        },
    };
    let found = discover(&NumericMatrix::<f64>::from_orientations(&matrix), &config)?;
    for (suffix, g) in [
        (".skeleton.json", &found.skeleton),
        (".cpdag.json", &found.cpdag),
        (".dag.json", &found.dag),
        (".reduced.json", &found.reduced),
    ] {
        write(&with_suffix(&args.out_prefix, suffix), &g.to_json())?;
    }
    println!(
        "skeleton {} edges; cpdag {} directed, {} undirected; reduced dag {} edges",
        found.skeleton.n_undirected(),
        found.cpdag.n_directed(),
        found.cpdag.n_undirected(),
        found.reduced.n_directed()
    );
    Ok(())
}

fn reduce_cmd(args: ReduceArgs) -> Result<()> {
    let g = load_graph(&args.graph)?;
    let reduced = transitive_reduction(&g)?;
    write(&args.out, &reduced.to_json())?;
    println!("{} -> {} edges", g.n_directed(), reduced.n_directed());
    Ok(())
}

fn print_summary(report: &MetricReport) {
    let show = |r: &Option<valuegraph::Rate>| r.as_ref().map_or("n/a".to_string(), |r| r.to_string());
    println!("macro expected accuracy {}", show(&report.macro_expected));
    println!("macro unexpected frequency {}", show(&report.macro_unexpected));
}

fn metrics_cmd(args: MetricsArgs) -> Result<()> {
    let graph = load_graph(&args.graph)?;
    let matrix = load_matrix(&args.steering.matrix)?;
    let report = aggregate_report(&graph, &steering_set(&matrix, &args.steering)?)?;
    write(&args.out, &report.to_json())?;
    print_summary(&report);
    Ok(())
}

fn predict_cmd(args: PredictArgs) -> Result<()> {
    let graph = load_graph(&args.graph)?;
    let out = json!({
        "target": args.target,
        "expected_to_change": graph.successors(&args.target)?,
        "expected_unchanged": graph.nonsuccessors(&args.target)?,
    });
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(())
}

fn compare_cmd(args: CompareArgs) -> Result<()> {
    let graph = load_graph(&args.graph)?;
    let catalog = load_catalog(&args.catalog)?;
    let reference = resolve_against_catalog(&parse_edge_list(&read(&args.reference)?)?, &catalog)?;
    let reference = reference.with_nodes(graph.nodes().to_vec())?;
    let matrix = load_matrix(&args.steering.matrix)?;
    let cmp = compare_graphs(&graph, &reference, &steering_set(&matrix, &args.steering)?)?;
    write(&args.out, &cmp.to_json())?;
    println!("graph:");
    print_summary(&cmp.a);
    println!("reference:");
    print_summary(&cmp.b);
    Ok(())
}

fn simulate_cmd(args: SimulateArgs) -> Result<()> {
    let dag = random_dag(args.nodes, args.degree, args.seed);
    let spec = ScmSpec::<f64>::random(dag.clone(), args.seed);
    let train = sample_dataset(&spec, &training_conditions(args.roles, args.features), 1)?;
    let shared = spec.clone().with_coupling(NoiseCoupling::Shared);
    let first_feature = args.features.max(100);
    let test = sample_dataset(&shared, &evaluation_conditions(args.roles.max(101), 25, first_feature, 25), 1)?;
    let dir = &args.out_dir;
    write(&dir.join("truth.json"), &dag.to_json())?;
    write(&dir.join("scm.json"), &spec.to_json())?;
    write(&dir.join("train_matrix.json"), &train.to_json())?;
    write(&dir.join("test_matrix.json"), &test.to_json())?;
    println!(
        "{} nodes, {} true edges; train {} rows, test {} rows",
        dag.n_nodes(),
        dag.n_directed(),
        train.n_rows(),
        test.n_rows()
    );
    Ok(())
}

fn run_cmd(args: RunArgs) -> Result<()> {
    let catalog: Catalog = load_catalog(&args.catalog)?;
    let roles = load_roles(&args.roles)?;
    let conditions: Vec<SteeringCondition> = match &args.conditions {
        Some(p) => serde_json::from_str(&read(p)?).context("parsing conditions")?,
        None => roles.roles().iter().map(|r| SteeringCondition::role(r.id.clone())).collect(),
    };
    let split = args.split.as_deref().map(DatasetSplit::load).transpose()?;
    let template = PromptTemplate::default();
    let questionnaire = Questionnaire {
        catalog: &catalog,
        roles: &roles,
        split: split.as_ref(),
        scope: args.scope.into(),
        template: &template,
    };
    let config = RunConfig {
        max_retries: args.retries,
        max_concurrency: args.concurrency,
        judge_thoughts: args.judge_thoughts,
        ..RunConfig::default()
    };
    let http = |url: &str, model: &str| -> Result<HttpChatEndpoint> {
        let mut c = EndpointConfig::new(url, model);
        c.api_key_env = args.api_key_env.clone();
        c.timeout_secs = args.timeout;
        c.max_retries = args.retries;
        c.max_concurrency = args.concurrency;
        Ok(HttpChatEndpoint::new(c)?)
    };
    let stub = StubResponder::new(args.seed);
    let main_http = match (&args.endpoint, args.stub) {
        (Some(url), false) => Some(http(url, &args.model)?),
        _ => None,
    };
    let judge_http = match &args.judge_endpoint {
        Some(url) => Some(http(url, args.judge_model.as_deref().unwrap_or(&args.model))?),
        None => None,
    };
    let endpoint: &dyn ChatEndpoint = match &main_http {
        Some(h) => h,
        None => &stub,
    };
    let judge = judge_http.as_ref().map(|h| h as &dyn ChatEndpoint);
    let output = run_questionnaire(endpoint, judge, &questionnaire, &conditions, &config)?;
    save_responses(&output.records, &args.out)?;
    if let Some(m) = &args.manifest {
        write(m, &output.manifest.to_json())?;
    }
    println!(
        "{} records, {} requests, {} retries, {} judge escalations",
        output.records.len(),
        output.manifest.requests,
        output.manifest.retries,
        output.manifest.judge_escalations
    );
    Ok(())
}

fn export_cmd(args: ExportArgs) -> Result<()> {
    let text = match (&args.graph, &args.report) {
        (Some(g), None) => {
            let graph = load_graph(g)?;
            if args.edges {
                emit_edge_list(&graph)
            } else if args.dot || !(args.md || args.csv) {
                export_dot(&graph)
            } else {
                bail!("graphs export as --dot or --edges");
            }
        }
        (None, Some(r)) => {
            let report = MetricReport::from_json(&read(r)?)?;
            if args.csv {
                report_csv(&report)
            } else if args.md || !args.dot {
                report_markdown(&report)
            } else {
                bail!("reports export as --md or --csv");
            }
        }
        _ => bail!("pass exactly one of --graph or --report"),
    };
    match &args.out {
        Some(p) => write(p, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Ingest(a) => ingest(a),
        Command::Score(a) => score_cmd(a),
        Command::Discover(a) => discover_cmd(a),
        Command::Reduce(a) => reduce_cmd(a),
        Command::Metrics(a) => metrics_cmd(a),
        Command::Predict(a) => predict_cmd(a),
        Command::Compare(a) => compare_cmd(a),
        Command::Simulate(a) => simulate_cmd(a),
        Command::Run(a) => run_cmd(a),
        Command::Export(a) => export_cmd(a),
    }
}
