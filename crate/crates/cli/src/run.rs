use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use causeway::citest::correlation_matrix;
use causeway::clustering::{
    correlation_distance, cut_tree, diagnostics_sweep, diagnostics_tsv, hierarchical_cluster, reduce_dataset,
    select_medoids, ClusterMembership, Dendrogram,
};
use causeway::demo::{demo, DemoSpec};
use causeway::eval::{sweep, truth_graph, SweepConfig};
use causeway::io::{export_graph, graph_from_json, ingest_str, parse_tiers, to_json, write_delimited, write_tiers, GraphFormat};
use causeway::pc::{pc, pc_from_correlation, PcConfig};
use causeway::synth::{fit_gaussian_bn, moment_stats, random_network, sample, Kurtosis, NetworkSpec};
use causeway::{score_graphs, Clustering, Dataset64, Edge, GaussianBn64, Linkage, PartialDag, PriorKnowledge};
use serde::Serialize;

use crate::cli::{
    ClusterCmd, Command, DiscoverCmd, FitCmd, IngestCmd, PipelineCmd, SampleCmd, ScoreCmd, SweepCmd,
};
use crate::config::{
    resolve_formats, resolve_linkage, resolve_pc, FileConfig, GridSettings, IngestSettings, DEFAULT_K,
};
use crate::error::{classify_io, Context, Failure, Outcome};
use crate::manifest::{beside, Recorder};

pub struct Env {
    pub file: FileConfig,
    pub threads: usize,
    pub manifest: Option<PathBuf>,
}

impl Env {
    fn finish<C: Serialize>(&self, rec: Recorder, settings: &C, default: PathBuf) -> Outcome<()> {
        let path = self.manifest.clone().unwrap_or(default);
        rec.finish(settings, self.threads, &path)?;
        Ok(())
    }
}

pub fn run(cmd: Command, env: &Env) -> Outcome<()> {
    match cmd {
        Command::Ingest(c) => ingest_cmd(c, env),
        Command::Cluster(c) => cluster_cmd(c, env),
        Command::Discover(c) => discover_cmd(c, env),
        Command::Fit(c) => fit_cmd(c, env),
        Command::Sample(c) => sample_cmd(c, env),
        Command::Score(c) => score_cmd(c, env),
        Command::Sweep(c) => sweep_cmd(c, env),
        Command::Pipeline(c) => pipeline_cmd(c, env),
    }
}

fn load_data(rec: &mut Recorder, path: &Path, ingest: &IngestSettings) -> Outcome<Dataset64> {
    let text = rec.read(path)?;
    let source = path.display().to_string();
    ingest_str(&text, Some(&source), &ingest.options()).map_err(|e| classify_io(e, &source))
}

fn load_tiers(rec: &mut Recorder, path: &Path) -> Outcome<BTreeMap<String, u32>> {
    let text = rec.read(path)?;
    parse_tiers(&text).map_err(|e| classify_io(e, path.display()))
}

fn assign_tiers(data: &mut Dataset64, tiers: &BTreeMap<String, u32>) {
    let unknown = data.assign_tiers_by_name(tiers);
    if !unknown.is_empty() {
        eprintln!("note: {} tier entries name no usable column", unknown.len());
    }
}

fn knowledge_for(names: &[String], tiers: &BTreeMap<String, u32>) -> PriorKnowledge {
    let ranks: Vec<Option<u32>> = names.iter().map(|n| tiers.get(n).copied()).collect();
    if ranks.iter().all(Option::is_none) {
        PriorKnowledge::none(names.len())
    } else {
        PriorKnowledge::from_tiers(ranks)
    }
}

fn load_graph(rec: &mut Recorder, path: &Path) -> Outcome<PartialDag> {
    let text = rec.read(path)?;
    graph_from_json(&text).map_err(|e| classify_io(e, path.display()))
}

fn load_model(rec: &mut Recorder, path: &Path) -> Outcome<GaussianBn64> {
    let text = rec.read(path)?;
    GaussianBn64::from_text(&text).invalid(path.display())
}

fn provenance_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".provenance.tsv");
    out.with_file_name(name)
}

fn check_k(k: usize, d: usize) -> Outcome<()> {
    if k == 0 || k > d {
        return Err(Failure::invalid_msg(format!("--k must lie in 1..={d} (usable columns), got {k}")));
    }
    Ok(())
}

fn dendrogram_tsv(t: &Dendrogram<f64>) -> String {
    let mut out = String::from("step\ta\tb\theight\tsize\n");
    for (s, m) in t.merges().iter().enumerate() {
        out.push_str(&format!("{s}\t{}\t{}\t{}\t{}\n", m.a, m.b, m.height, m.size));
    }
    out
}

fn write_graph(rec: &mut Recorder, g: &PartialDag, prefix: &Path, formats: &[GraphFormat]) -> Outcome<()> {
    for &f in formats {
        rec.write(&prefix.with_extension(f.extension()), &export_graph(g, f))?;
    }
    Ok(())
}

fn json<T: Serialize>(v: &T) -> Outcome<String> {
    let mut s = serde_json::to_string_pretty(v).map_err(Failure::runtime)?;
    s.push('\n');
    Ok(s)
}

struct ClusterOutput {
    clustering: Clustering,
    reduced: Dataset64,
    membership: Vec<ClusterMembership>,
}

fn cluster_and_write(
    rec: &mut Recorder,
    data: &Dataset64,
    k: usize,
    linkage: Linkage,
    dir: &Path,
) -> Outcome<ClusterOutput> {
    check_k(k, data.n_cols())?;
    let corr = correlation_matrix(data).invalid("correlation matrix")?;
    let tree = hierarchical_cluster(&correlation_distance(&corr), linkage).runtime("clustering")?;
    let cut = cut_tree(&tree, k).invalid("cutting the dendrogram")?;
    let clustering = select_medoids(&cut, &corr);
    let (reduced, membership) = reduce_dataset(data, &clustering).runtime("reducing to medoids")?;
    let names = data.names();
    rec.write(&dir.join("clusters.tsv"), &clustering.assignment_tsv(names))?;
    rec.write(&dir.join("medoids.tsv"), &clustering.medoid_list(names).runtime("medoid list")?)?;
    rec.write(&dir.join("membership.json"), &json(&membership)?)?;
    rec.write(&dir.join("dendrogram.tsv"), &dendrogram_tsv(&tree))?;
    let diag = diagnostics_sweep(&tree, &corr, 1..=data.n_cols()).runtime("cluster diagnostics")?;
    rec.write(&dir.join("diagnostics.tsv"), &diagnostics_tsv(&diag))?;
    rec.write(&dir.join("reduced.csv"), &write_delimited(&reduced, b','))?;
    Ok(ClusterOutput { clustering, reduced, membership })
}

#[derive(Serialize)]
struct IngestSettingsOut<'a> {
    ingest: &'a IngestSettings,
}

fn ingest_cmd(c: IngestCmd, env: &Env) -> Outcome<()> {
    let ingest = IngestSettings::resolve(&c.ingest, &env.file)?;
    let mut rec = Recorder::new("ingest");
    let data = load_data(&mut rec, &c.input, &ingest)?;
    rec.write(&c.out, &write_delimited(&data, b','))?;
    let prov = c.provenance.clone().unwrap_or_else(|| provenance_path(&c.out));
    rec.write(&prov, &data.provenance().to_tsv())?;
    let total = data.provenance().entries.len();
    eprintln!("kept {} of {} columns, {} rows", data.n_cols(), total, data.n_rows());
    env.finish(rec, &IngestSettingsOut { ingest: &ingest }, beside(&c.out))
}

#[derive(Serialize)]
struct ClusterSettings {
    ingest: IngestSettings,
    k: usize,
    linkage: Linkage,
}

fn cluster_cmd(c: ClusterCmd, env: &Env) -> Outcome<()> {
    let s = ClusterSettings {
        ingest: IngestSettings::resolve(&c.ingest, &env.file)?,
        k: c.k.or(env.file.k).unwrap_or(DEFAULT_K),
        linkage: resolve_linkage(&c.linkage, &env.file)?,
    };
    let mut rec = Recorder::new("cluster");
    let data = load_data(&mut rec, &c.input, &s.ingest)?;
    let out = cluster_and_write(&mut rec, &data, s.k, s.linkage, &c.out_dir)?;
    eprintln!("{} columns in {} clusters", data.n_cols(), out.clustering.n_clusters());
    env.finish(rec, &s, c.out_dir.join("manifest.json"))
}

#[derive(Serialize)]
struct DiscoverSettings {
    ingest: IngestSettings,
    pc: PcConfig,
    tiers: Option<PathBuf>,
    formats: Vec<GraphFormat>,
}

fn discover_cmd(c: DiscoverCmd, env: &Env) -> Outcome<()> {
    let (pc_cfg, tiers) = resolve_pc(Some(&c.sig), &c.pc, &env.file)?;
    let s = DiscoverSettings {
        ingest: IngestSettings::resolve(&c.ingest, &env.file)?,
        pc: pc_cfg,
        tiers,
        formats: resolve_formats(&c.formats, &env.file)?,
    };
    let mut rec = Recorder::new("discover");
    let mut data = load_data(&mut rec, &c.input, &s.ingest)?;
    if let Some(t) = &s.tiers {
        let map = load_tiers(&mut rec, t)?;
        assign_tiers(&mut data, &map);
    }
    let out = pc(&data, &s.pc, &data.prior_knowledge()).invalid("PC")?;
    write_graph(&mut rec, &out.graph, &c.out, &s.formats)?;
    rec.write(&c.out.with_extension("log.tsv"), &out.log.to_text())?;
    if !out.failures.is_empty() {
        let mut text = String::from("x\ty\tconditioning\terror\n");
        for f in &out.failures {
            text.push_str(&format!("{}\t{}\t{:?}\t{}\n", data.name(f.x), data.name(f.y), f.cond, f.error));
        }
        rec.write(&c.out.with_extension("failures.tsv"), &text)?;
        eprintln!("warning: {} tests failed numerically; their edges were kept", out.failures.len());
    }
    eprintln!(
        "{} nodes, {} edges ({} directed), {} tests",
        out.graph.node_count(),
        out.graph.edge_count(),
        out.graph.directed_count(),
        out.tests_run
    );
    env.finish(rec, &s, c.out.with_extension("manifest.json"))
}

/// Columns of `data` in the order of the graph's labels.
fn align_columns(data: &Dataset64, g: &PartialDag) -> Outcome<Dataset64> {
    let mut idx = Vec::with_capacity(g.node_count());
    for name in g.labels() {
        idx.push(
            data.index_of(name)
                .ok_or_else(|| Failure::invalid_msg(format!("graph node `{name}` is not a usable data column")))?,
        );
    }
    data.select_columns(&idx).runtime("selecting columns")
}

#[derive(Serialize)]
struct FitSettings {
    ingest: IngestSettings,
    extend: bool,
    seed: u64,
}

fn fit_cmd(c: FitCmd, env: &Env) -> Outcome<()> {
    let s = FitSettings {
        ingest: IngestSettings::resolve(&c.ingest, &env.file)?,
        extend: c.extend,
        seed: c.seed.or(env.file.seed).unwrap_or(0),
    };
    let mut rec = Recorder::new("fit");
    let data = load_data(&mut rec, &c.input, &s.ingest)?;
    let mut g = load_graph(&mut rec, &c.graph)?;
    if !g.is_fully_directed() {
        if !s.extend {
            return Err(Failure::invalid_msg("graph has undirected edges; pass --extend to orient them"));
        }
        rec.seed(s.seed);
        g = g.random_consistent_extension(s.seed).invalid("orienting the graph")?;
    }
    let bn = fit_gaussian_bn(&g, &align_columns(&data, &g)?).invalid("fitting")?;
    rec.write(&c.out, &bn.to_text().invalid("writing the model")?)?;
    eprintln!("fitted {} nodes", bn.n_nodes());
    env.finish(rec, &s, beside(&c.out))
}

#[derive(Serialize)]
struct SampleSettings {
    n: usize,
    seed: u64,
}

fn sample_cmd(c: SampleCmd, env: &Env) -> Outcome<()> {
    let s = SampleSettings { n: c.n.or(env.file.n).unwrap_or(50_000), seed: c.seed.or(env.file.seed).unwrap_or(0) };
    let mut rec = Recorder::new("sample");
    let bn = load_model(&mut rec, &c.model)?;
    rec.seed(s.seed);
    let data = sample(&bn, s.n, s.seed);
    rec.write(&c.out, &write_delimited(&data, b','))?;
    env.finish(rec, &s, beside(&c.out))
}

/// `g` with its nodes renumbered to follow `labels`.
fn relabel(g: &PartialDag, labels: &[String]) -> Outcome<PartialDag> {
    let mut sorted_a = g.labels().to_vec();
    let mut sorted_b = labels.to_vec();
    sorted_a.sort();
    sorted_b.sort();
    if sorted_a != sorted_b {
        return Err(Failure::invalid_msg("learned and true graphs have different node labels"));
    }
    let pos: BTreeMap<&str, usize> = labels.iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect();
    let map = |v: usize| pos[g.label(v)];
    let edges: Vec<Edge> = g.edges().map(|e| Edge { a: map(e.a), b: map(e.b), mark: e.mark }).collect();
    let mut out = PartialDag::from_edges(labels.len(), &edges).runtime("relabelling")?;
    out.set_labels(labels.to_vec()).runtime("relabelling")?;
    Ok(out)
}

#[derive(Serialize)]
struct ScoreSettings {
    tiers: Option<PathBuf>,
    raw_truth: bool,
}

fn score_cmd(c: ScoreCmd, env: &Env) -> Outcome<()> {
    let s = ScoreSettings {
        tiers: c.tiers.clone().or_else(|| env.file.tiers.clone()),
        raw_truth: c.raw_truth || env.file.raw_truth.unwrap_or(false),
    };
    let mut rec = Recorder::new("score");
    let learned = load_graph(&mut rec, &c.learned)?;
    let mut truth = load_graph(&mut rec, &c.truth)?;
    let tiers = match &s.tiers {
        Some(p) => load_tiers(&mut rec, p)?,
        None => BTreeMap::new(),
    };
    if truth.is_fully_directed() && !s.raw_truth {
        let k = knowledge_for(truth.labels(), &tiers);
        let labels = truth.labels().to_vec();
        truth = truth_graph(&truth, &k, false).invalid("true graph")?;
        truth.set_labels(labels).runtime("labels")?;
    }
    let learned = relabel(&learned, truth.labels())?;
    let report = score_graphs(&learned, &truth).invalid("scoring")?;
    let text = json(&report)?;
    rec.write(&c.out, &text)?;
    print!("{text}");
    env.finish(rec, &s, beside(&c.out))
}

#[derive(Serialize)]
struct SweepSettings {
    network: Option<NetworkSpec>,
    network_seed: Option<u64>,
    tiers: Option<PathBuf>,
    grid: GridSettings,
    seed: u64,
    pc: PcConfig,
}

fn sweep_cmd(c: SweepCmd, env: &Env) -> Outcome<()> {
    let (pc_cfg, tiers) = resolve_pc(None, &c.pc, &env.file)?;
    let network = c.random.map(|nodes| NetworkSpec {
        nodes,
        mean_degree: c.mean_degree.or(env.file.mean_degree).unwrap_or(2.0),
        tiers: c.tier_blocks.or(env.file.tier_blocks).unwrap_or(0),
        ..Default::default()
    });
    let s = SweepSettings {
        network_seed: network.map(|_| c.network_seed.or(env.file.network_seed).unwrap_or(0)),
        network,
        tiers,
        grid: GridSettings::resolve(&c.grid, &env.file),
        seed: c.seed.or(env.file.seed).unwrap_or(0),
        pc: pc_cfg,
    };
    let mut rec = Recorder::new("sweep");
    let (bn, mut k) = match (&c.model, s.network) {
        (Some(path), _) => {
            let bn = load_model(&mut rec, path)?;
            let n = bn.n_nodes();
            (bn, PriorKnowledge::none(n))
        }
        (None, Some(spec)) => {
            let seed = s.network_seed.unwrap_or(0);
            rec.seed(seed);
            let net = random_network::<f64>(&spec, seed).invalid("network settings")?;
            rec.write(&c.out.with_extension("model.bn"), &net.bn.to_text().runtime("writing the model")?)?;
            let k = net.knowledge();
            (net.bn, k)
        }
        (None, None) => return Err(Failure::invalid_msg("pass --model or --random")),
    };
    if let Some(t) = &s.tiers {
        let map = load_tiers(&mut rec, t)?;
        k = knowledge_for(bn.names(), &map);
    }
    let truth = truth_graph(bn.dag(), &k, s.grid.raw_truth).invalid("true graph")?;
    let cfg = sweep_config(&s.grid, s.seed, s.pc);
    cfg.validate().invalid("sweep settings")?;
    for seed in cfg.replicate_seeds() {
        rec.seed(seed);
    }
    let result = sweep(&bn, &truth, &cfg, &k).runtime("sweep")?;
    rec.write(&c.out, &result.to_tsv())?;
    eprintln!("{} grid points x {} replicates", result.cells.len(), cfg.replicates);
    env.finish(rec, &s, beside(&c.out))
}

fn sweep_config(grid: &GridSettings, seed: u64, pc: PcConfig) -> SweepConfig {
    SweepConfig {
        replicates: grid.replicates,
        n: grid.n,
        alphas: grid.alphas.clone(),
        soes: grid.soes.clone(),
        seed,
        pc,
    }
}

#[derive(Serialize)]
struct PipelineSettings {
    demo: Option<DemoSettings>,
    synthetic: bool,
    ingest: IngestSettings,
    k: usize,
    linkage: Linkage,
    seed: u64,
    pc: PcConfig,
    tiers: Option<PathBuf>,
    formats: Vec<GraphFormat>,
    grid: GridSettings,
}

#[derive(Serialize)]
struct DemoSettings {
    stations: usize,
    features_per_station: usize,
    copies: usize,
    jitter: f64,
    mean_degree: f64,
    rows: usize,
}

impl From<DemoSpec> for DemoSettings {
    fn from(d: DemoSpec) -> Self {
        Self {
            stations: d.stations,
            features_per_station: d.features_per_station,
            copies: d.copies,
            jitter: d.jitter,
            mean_degree: d.mean_degree,
            rows: d.rows,
        }
    }
}

fn pipeline_cmd(c: PipelineCmd, env: &Env) -> Outcome<()> {
    let (pc_cfg, tiers) = resolve_pc(Some(&c.sig), &c.pc, &env.file)?;
    let seed = c.seed.or(env.file.seed).unwrap_or(0);
    let dir = &c.out_dir;
    let mut rec = Recorder::new("pipeline");
    let ingest = IngestSettings::resolve(&c.ingest, &env.file)?;

    let spec = DemoSpec::default();
    let (text, source, mut tier_map, default_k) = if c.demo {
        rec.seed(seed);
        let d = demo::<f64>(&spec, seed).invalid("demo settings")?;
        let names = d.bn.names().to_vec();
        let ranks: Vec<Option<u32>> = names.iter().map(|n| d.tiers.get(n).copied()).collect();
        rec.write(&dir.join("demo.csv"), &d.csv)?;
        rec.write(&dir.join("demo-tiers.tsv"), &write_tiers(&names, &ranks))?;
        rec.write(&dir.join("demo-model.bn"), &d.bn.to_text().runtime("writing the demo model")?)?;
        (d.csv, dir.join("demo.csv").display().to_string(), d.tiers, d.groups)
    } else {
        let path = c.input.as_ref().ok_or_else(|| Failure::invalid_msg("pass an input file or --demo"))?;
        let text = rec.read(path)?;
        (text, path.display().to_string(), BTreeMap::new(), DEFAULT_K)
    };
    if let Some(t) = &tiers {
        tier_map = load_tiers(&mut rec, t)?;
    }
    let s = PipelineSettings {
        demo: c.demo.then(|| spec.into()),
        synthetic: c.synthetic,
        k: c.k.or(env.file.k).unwrap_or(default_k),
        linkage: resolve_linkage(&c.linkage, &env.file)?,
        seed,
        pc: pc_cfg,
        tiers,
        formats: resolve_formats(&c.formats, &env.file)?,
        grid: GridSettings::resolve(&c.grid, &env.file),
        ingest,
    };

    let mut data: Dataset64 =
        ingest_str(&text, Some(&source), &s.ingest.options()).map_err(|e| classify_io(e, &source))?;
    assign_tiers(&mut data, &tier_map);
    rec.write(&dir.join("data.csv"), &write_delimited(&data, b','))?;
    rec.write(&dir.join("provenance.tsv"), &data.provenance().to_tsv())?;
    let normality = moment_stats(&data, Kurtosis::Excess).invalid("normality report")?;
    rec.write(&dir.join("normality.tsv"), &normality.to_tsv())?;

    let clustered = cluster_and_write(&mut rec, &data, s.k, s.linkage, dir)?;
    let reduced = &clustered.reduced;
    let k = reduced.prior_knowledge();
    let out = pc(reduced, &s.pc, &k).invalid("PC")?;
    write_graph(&mut rec, &out.graph, &dir.join("graph"), &s.formats)?;
    if !s.formats.contains(&GraphFormat::Json) {
        rec.write(&dir.join("graph.json"), &to_json(&out.graph))?;
    }
    rec.write(&dir.join("orientation.tsv"), &out.log.to_text())?;

    // edge counts along the alpha grid at the chosen soe
    let corr = correlation_matrix(reduced).invalid("correlation matrix")?;
    let mut edges = String::from("alpha\tsoe\tedges\tdirected\n");
    for &alpha in &s.grid.alphas {
        let g = pc_from_correlation(&corr, &PcConfig { alpha, ..s.pc }, &k).invalid("PC")?.graph;
        edges.push_str(&format!("{alpha}\t{}\t{}\t{}\n", s.pc.soe, g.edge_count(), g.directed_count()));
    }
    rec.write(&dir.join("edges-by-alpha.tsv"), &edges)?;
    eprintln!(
        "{} columns -> {} medoids -> {} edges ({} directed); {:.0}% of columns look normal",
        data.n_cols(),
        clustered.membership.len(),
        out.graph.edge_count(),
        out.graph.directed_count(),
        100.0 * normality.fraction_within_range
    );

    if s.synthetic {
        rec.seed(seed);
        let dag = out.graph.random_consistent_extension(seed).runtime("orienting the learned graph")?;
        let bn = fit_gaussian_bn(&dag, reduced).invalid("fitting")?;
        rec.write(&dir.join("model.bn"), &bn.to_text().runtime("writing the model")?)?;
        let truth = truth_graph(bn.dag(), &k, s.grid.raw_truth).invalid("true graph")?;
        let cfg = sweep_config(&s.grid, seed, s.pc);
        cfg.validate().invalid("sweep settings")?;
        for r in cfg.replicate_seeds() {
            rec.seed(r);
        }
        let result = sweep(&bn, &truth, &cfg, &k).runtime("sweep")?;
        rec.write(&dir.join("sweep.tsv"), &result.to_tsv())?;
    }
    env.finish(rec, &s, dir.join("manifest.json"))
}
