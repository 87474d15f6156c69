use std::io::Write;
use std::path::Path;

use hon_core::analytics::{
    evaluate_prediction_weighted, ho_betweenness, ho_pagerank, predict_next, project_pagerank, BetweennessOptions,
    EndpointPolicy, PageRankOptions, PairSemantics, ScoreVector,
};
use hon_core::experiment::{evaluate_sweep, prediction_samples, SweepConfig, Variant};
use hon_core::hon::DEFAULT_NODE_CAP;
use hon_core::multi_order::detect_optimal_order;
use hon_core::synth::{generate_corpus, random_planted_model, ring_with_chords};
use hon_core::{Error, FirstOrderGraph, HigherOrderModel, MultiOrderModel, NodeId, PathCorpus, Result, WeightMode};
use serde::Serialize;
use serde_json::json;

use crate::args::*;
use crate::manifest::Manifest;

fn usage(msg: impl Into<String>) -> Error {
    Error::Parameter(msg.into())
}

fn common(cmd: &Command) -> &Common {
    match cmd {
        Command::Build(a) => &a.common,
        Command::DetectOrder(a) => &a.common,
        Command::Betweenness(a) => &a.common,
        Command::Pagerank(a) => &a.common,
        Command::Predict(a) => &a.common,
        Command::Evaluate(a) => &a.common,
        Command::Synth(a) => &a.common,
        Command::Stats(a) => &a.common,
    }
}

pub fn run(cli: Cli) -> Result<()> {
    let c = common(&cli.command);
    if c.threads == Some(0) {
        return Err(usage("--threads must be at least 1"));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(c.threads.unwrap_or(0))
        .build()
        .map_err(|e| usage(format!("thread pool: {e}")))?;
    std::fs::create_dir_all(&c.out)?;
    pool.install(|| match cli.command {
        Command::Build(a) => build(a),
        Command::DetectOrder(a) => detect_order(a),
        Command::Betweenness(a) => betweenness(a),
        Command::Pagerank(a) => pagerank(a),
        Command::Predict(a) => predict(a),
        Command::Evaluate(a) => evaluate(a),
        Command::Synth(a) => synth(a),
        Command::Stats(a) => stats(a),
    })
}

fn variant(v: VariantArg) -> Variant {
    match v {
        VariantArg::Attributed => Variant::Attributed,
        VariantArg::NonAttributed => Variant::NonAttributed,
    }
}

fn weight_mode(w: WeightModeArg) -> WeightMode {
    match w {
        WeightModeArg::NegLogProb => WeightMode::NegLogProb,
        WeightModeArg::Unit => WeightMode::Unit,
    }
}

fn betweenness_options(w: WeightModeArg, p: PairsArg, e: EndpointsArg) -> BetweennessOptions {
    BetweennessOptions {
        weight_mode: weight_mode(w),
        pairs: match p {
            PairsArg::Ho => PairSemantics::HoPairs,
            PairsArg::FirstOrder => PairSemantics::FirstOrderPairs,
        },
        endpoints: match e {
            EndpointsArg::Exclude => EndpointPolicy::Exclude,
            EndpointsArg::Include => EndpointPolicy::Include,
        },
    }
}

fn pagerank_options(p: &PageRankParams) -> Result<PageRankOptions> {
    let o = PageRankOptions {
        alpha: p.alpha,
        tol: p.tol,
        max_iter: p.max_iter,
    };
    o.validate()?;
    Ok(o)
}

fn check_order(name: &str, k: usize) -> Result<()> {
    if k == 0 {
        return Err(usage(format!("{name} must be at least 1")));
    }
    Ok(())
}

fn check_open_unit(name: &str, x: f64) -> Result<()> {
    if !(x > 0.0 && x < 1.0) {
        return Err(usage(format!("{name} {x} must lie in (0, 1)")));
    }
    Ok(())
}

/// Prefixes I/O and parse failures with the offending file.
fn in_file<T>(path: &Path, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Io(io) => Error::Validation(format!("{}: {io}", path.display())),
        Error::Parse { line, msg } => Error::Parse {
            line,
            msg: format!("{}: {msg}", path.display()),
        },
        e => e,
    })
}

fn read_corpus(path: &Path, m: &mut Manifest) -> Result<PathCorpus> {
    m.input("ngram", path);
    in_file(path, PathCorpus::read_ngram(path))
}

fn read_graph(path: &Path, m: &mut Manifest) -> Result<FirstOrderGraph> {
    m.input("graph", path);
    in_file(path, FirstOrderGraph::read_edge_list(path))
}

/// Loads the optional corpus and graph; a corpus must follow graph edges.
fn load(inputs: &Inputs, m: &mut Manifest) -> Result<(Option<PathCorpus>, Option<FirstOrderGraph>)> {
    let g = inputs.graph.as_deref().map(|p| read_graph(p, m)).transpose()?;
    let c = inputs.ngram.as_deref().map(|p| read_corpus(p, m)).transpose()?;
    if let (Some(c), Some(g)) = (&c, &g) {
        c.validate_against(g)?;
    }
    Ok((c, g))
}

fn require_corpus(c: Option<PathCorpus>) -> Result<PathCorpus> {
    c.ok_or_else(|| usage("--ngram is required"))
}

fn build(a: BuildArgs) -> Result<()> {
    check_order("--order", a.order)?;
    let mut m = Manifest::new("build");
    let v = variant(a.variant);
    m.parameters(json!({ "order": a.order, "variant": v, "node_cap": a.node_cap }));
    m.phase("load");
    let (c, g) = load(&a.inputs, &mut m)?;
    m.phase("build");
    let model = match (c, g) {
        (Some(c), g) => {
            let model = HigherOrderModel::from_paths(&c, a.order, v.is_attributed())?;
            match g {
                Some(g) => model.with_first_order(&g)?,
                None => model,
            }
        }
        (None, Some(g)) => {
            if v.is_attributed() {
                return Err(usage("an attributed model needs --ngram; use --variant non-attributed"));
            }
            HigherOrderModel::from_topology(&g, a.order, a.node_cap)?
        }
        (None, None) => return Err(usage("--ngram or --graph is required")),
    };
    m.phase("write");
    model.write_json(m.output(&a.common.out, "model.json")?)?;
    model.write_csv(m.output(&a.common.out, "model_edges.csv")?)?;
    println!(
        "order={} nodes={} edges={}",
        model.order(),
        model.node_count(),
        model.edge_count()
    );
    m.finish(&a.common.out)
}

fn detect_order(a: DetectArgs) -> Result<()> {
    check_order("--max-order", a.max_order)?;
    check_open_unit("--epsilon", a.epsilon)?;
    let mut m = Manifest::new("detect-order");
    m.parameters(json!({ "max_order": a.max_order, "epsilon": a.epsilon, "with_start": a.with_start }));
    m.phase("load");
    let (c, g) = load(&a.inputs, &mut m)?;
    let c = require_corpus(c)?;
    let g = match g {
        Some(g) => g,
        None => {
            m.warn("no --graph given; degrees of freedom use the graph of observed transitions");
            c.observed_graph()
        }
    };
    m.phase("detect");
    let d = detect_optimal_order(&c, &g, a.max_order, a.epsilon, !a.with_start)?;
    if d.max_order < a.max_order {
        m.warn(format!("maximum order reduced from {} to {}", a.max_order, d.max_order));
    }
    for t in &d.tests {
        println!(
            "k={} vs k={} lambda={} dof={} p={} significant={}",
            t.order,
            t.order + 1,
            t.lambda,
            t.delta_dof,
            t.p_value,
            t.p_value < a.epsilon
        );
    }
    println!("optimal_order={}", d.optimal_order);
    m.phase("write");
    let mut f = m.output(&a.common.out, "detect_order.json")?;
    serde_json::to_writer_pretty(&mut f, &d)?;
    writeln!(f)?;
    drop(f);
    m.finish(&a.common.out)
}

fn load_model(s: &ModelSource, m: &mut Manifest) -> Result<HigherOrderModel> {
    if let Some(path) = &s.model {
        m.input("model", path);
        let model = in_file(
            path,
            std::fs::File::open(path)
                .map_err(Error::from)
                .and_then(|f| HigherOrderModel::read_json(std::io::BufReader::new(f))),
        )?;
        if let Some(k) = s.order {
            if k != model.order() {
                return Err(usage(format!(
                    "--order {k} does not match the model's order {}",
                    model.order()
                )));
            }
        }
        return Ok(model);
    }
    let k = s
        .order
        .ok_or_else(|| usage("--order is required unless --model is given"))?;
    check_order("--order", k)?;
    let v = variant(s.variant);
    match load(&s.inputs, m)? {
        (Some(c), _) => HigherOrderModel::from_paths(&c, k, v.is_attributed()),
        (None, Some(g)) if !v.is_attributed() => HigherOrderModel::from_topology(&g, k, DEFAULT_NODE_CAP),
        (None, Some(_)) => Err(usage("an attributed model needs --ngram; use --variant non-attributed")),
        (None, None) => Err(usage("--model, --ngram or --graph is required")),
    }
}

fn model_variant(model: &HigherOrderModel) -> Variant {
    if model.is_attributed() {
        Variant::Attributed
    } else {
        Variant::NonAttributed
    }
}

#[derive(Serialize)]
struct NodeScore<'a> {
    node: &'a str,
    score: f64,
}

fn ranked(s: &ScoreVector) -> Vec<NodeScore<'_>> {
    s.ranked()
        .into_iter()
        .map(|(node, score)| NodeScore { node, score })
        .collect()
}

fn write_json(w: impl Write, v: &impl Serialize) -> Result<()> {
    let mut w = w;
    serde_json::to_writer_pretty(&mut w, v)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn betweenness(a: BetweennessArgs) -> Result<()> {
    let opts = betweenness_options(a.weight_mode, a.pairs, a.endpoints);
    let mut m = Manifest::new("betweenness");
    m.phase("load");
    let model = load_model(&a.source, &mut m)?;
    m.parameters(json!({ "order": model.order(), "variant": model_variant(&model), "options": opts }));
    m.phase("betweenness");
    let s = ho_betweenness(&model, opts)?;
    m.phase("write");
    s.write_csv(m.output(&a.common.out, "betweenness.csv")?)?;
    let meta = json!({
        "order": model.order(),
        "variant": model_variant(&model),
        "weight_mode": opts.weight_mode,
        "pairs": opts.pairs,
        "endpoints": opts.endpoints,
        "normalized": s.is_normalized(),
        "scores": ranked(&s),
    });
    write_json(m.output(&a.common.out, "betweenness.json")?, &meta)?;
    m.finish(&a.common.out)
}

fn pagerank(a: PagerankArgs) -> Result<()> {
    let opts = pagerank_options(&a.params)?;
    let mut m = Manifest::new("pagerank");
    m.phase("load");
    let model = load_model(&a.source, &mut m)?;
    m.parameters(json!({ "order": model.order(), "variant": model_variant(&model), "options": opts }));
    m.phase("pagerank");
    let pr = ho_pagerank(&model, opts)?;
    let projected = project_pagerank(&model, &pr.scores);
    m.phase("write");
    projected.write_csv(m.output(&a.common.out, "pagerank.csv")?)?;
    let mut w = csv::Writer::from_writer(m.output(&a.common.out, "pagerank_ho.csv")?);
    w.write_record(["ho_node", "score"])?;
    for (v, s) in pr.scores.iter().enumerate() {
        w.write_record([model.labels().join(model.tuple(v as u32), ","), s.to_string()])?;
    }
    w.flush()?;
    drop(w);
    let meta = json!({
        "order": model.order(),
        "variant": model_variant(&model),
        "alpha": opts.alpha,
        "tol": opts.tol,
        "max_iter": opts.max_iter,
        "iterations": pr.iterations,
        "residual": pr.residual,
        "normalized": projected.is_normalized(),
        "scores": ranked(&projected),
    });
    write_json(m.output(&a.common.out, "pagerank.json")?, &meta)?;
    m.finish(&a.common.out)
}

fn predict(a: PredictArgs) -> Result<()> {
    check_order("--max-order", a.max_order)?;
    if a.context.is_empty() && a.test.is_none() {
        return Err(usage("give at least one --context or a --test corpus"));
    }
    let mut m = Manifest::new("predict");
    m.parameters(json!({ "max_order": a.max_order, "contexts": a.context }));
    m.phase("load");
    let (c, g) = load(&a.inputs, &mut m)?;
    let c = require_corpus(c)?;
    m.phase("train");
    let mut model = MultiOrderModel::build(&c, a.max_order)?;
    if let Some(g) = &g {
        model = model.with_first_order(g)?;
    }
    for w in model.warnings() {
        m.warn(w.clone());
    }
    m.phase("predict");
    let labels = model.labels().clone();
    let mut predictions = Vec::new();
    for ctx in &a.context {
        let ids = ctx
            .split(',')
            .map(|s| {
                labels
                    .get(s.trim())
                    .ok_or_else(|| Error::UnknownNode(s.trim().to_string()))
            })
            .collect::<Result<Vec<NodeId>>>()?;
        let r = predict_next(&model, &ids)?;
        println!("context={ctx} used_order={} top={}", r.used_order, labels.name(r.top));
        let mut dist: Vec<(&str, f64)> = r.distribution.iter().map(|&(v, p)| (labels.name(v), p)).collect();
        dist.sort_by(|x, y| x.0.cmp(y.0));
        predictions.push(json!({
            "context": ctx.split(',').map(str::trim).collect::<Vec<_>>(),
            "used_order": r.used_order,
            "top": labels.name(r.top),
            "distribution": dist.iter().map(|(n, p)| json!({ "node": n, "probability": p })).collect::<Vec<_>>(),
        }));
    }
    let mut evaluation = serde_json::Value::Null;
    if let Some(path) = &a.test {
        m.input("test", path);
        let test = in_file(path, PathCorpus::read_ngram(path))?;
        let mut merged = labels.clone();
        for n in test.labels().names() {
            merged.intern(n.as_str());
        }
        let test = test.with_labels(merged)?;
        let samples = prediction_samples(&test, model.max_order());
        let view: Vec<(&[NodeId], NodeId, u64)> = samples.iter().map(|((c, t), &w)| (&c[..], *t, w)).collect();
        let score = evaluate_prediction_weighted(&model, &view)?;
        println!(
            "cross_entropy={} accuracy={} samples={} failures={}",
            score.cross_entropy, score.accuracy, score.samples, score.failures
        );
        evaluation = serde_json::to_value(score)?;
    }
    m.phase("write");
    let out = json!({ "max_order": model.max_order(), "predictions": predictions, "evaluation": evaluation });
    write_json(m.output(&a.common.out, "predict.json")?, &out)?;
    m.finish(&a.common.out)
}

fn evaluate(a: EvaluateArgs) -> Result<()> {
    check_order("--max-order", a.max_order)?;
    check_open_unit("--split", a.split)?;
    if !(a.smoothing >= 0.0 && a.smoothing.is_finite()) {
        return Err(usage(format!("--smoothing {} must be non-negative", a.smoothing)));
    }
    let cfg = SweepConfig {
        max_order: a.max_order,
        split_ratio: a.split,
        seed: a.seed,
        betweenness: betweenness_options(a.weight_mode, a.pairs, a.endpoints),
        pagerank: pagerank_options(&a.pagerank)?,
        smoothing: a.smoothing,
    };
    let mut m = Manifest::new("evaluate");
    m.parameters(cfg);
    m.seed("split", a.seed);
    m.phase("load");
    let (c, g) = load(&a.inputs, &mut m)?;
    let c = require_corpus(c)?;
    m.phase("sweep");
    let r = evaluate_sweep(&c, g.as_ref(), &cfg)?;
    for w in &r.warnings {
        m.warn(w.clone());
    }
    m.phase("write");
    let out = &a.common.out;
    r.write_csv(m.output(out, "evaluate.csv")?)?;
    for s in &r.scores {
        let name = format!("scores_k{}_{}.csv", s.k, s.variant.as_str());
        r.write_scores_csv(s.k, s.variant, m.output(out, &name)?)?;
    }
    let summary = json!({
        "max_order": r.max_order,
        "train_paths": r.train_paths,
        "test_paths": r.test_paths,
        "config": cfg,
        "warnings": r.warnings,
        "rows": r.rows,
    });
    write_json(m.output(out, "evaluate.json")?, &summary)?;
    for row in &r.rows {
        println!("{},{},{},{}", row.k, row.variant.as_str(), row.metric, row.value);
    }
    m.finish(out)
}

fn synth(a: SynthArgs) -> Result<()> {
    check_order("--order", a.order)?;
    if a.skew.is_nan() || a.skew <= 0.0 {
        return Err(usage(format!("--skew {} must be positive", a.skew)));
    }
    if a.paths == 0 {
        return Err(usage("--paths must be at least 1"));
    }
    if a.min_len < a.order + 1 || a.min_len > a.max_len {
        return Err(usage(format!(
            "length range [{}, {}] must satisfy {} <= min <= max",
            a.min_len,
            a.max_len,
            a.order + 1
        )));
    }
    if a.graph.is_none() && (a.nodes < 2 || a.out_degree == 0 || a.out_degree >= a.nodes) {
        return Err(usage("need --nodes >= 2 and 1 <= --out-degree < --nodes"));
    }
    let mut m = Manifest::new("synth");
    m.parameters(json!({
        "order": a.order, "skew": a.skew.to_string(), "paths": a.paths,
        "min_len": a.min_len, "max_len": a.max_len, "nodes": a.nodes, "out_degree": a.out_degree,
    }));
    m.seed("graph", a.seed);
    m.seed("planted", a.seed);
    m.seed("corpus", a.seed);
    m.phase("graph");
    let g = match &a.graph {
        Some(p) => read_graph(p, &mut m)?,
        None => ring_with_chords(a.nodes, a.out_degree, a.seed)?,
    };
    if !g.is_strongly_connected() {
        m.warn("base graph is not strongly connected");
    }
    m.phase("planted");
    let pm = random_planted_model(&g, a.order, a.skew, a.seed)?;
    m.phase("generate");
    let (corpus, stats) = generate_corpus(&pm, a.paths, (a.min_len, a.max_len), a.seed)?;
    m.phase("write");
    let out = &a.common.out;
    corpus.write_ngram(m.output(out, "corpus.ngram")?)?;
    let mut f = m.output(out, "graph.tsv")?;
    g.write_edge_list(&mut f)?;
    f.flush()?;
    drop(f);
    let mut w = csv::Writer::from_writer(m.output(out, "planted.csv")?);
    w.write_record(["context", "next", "probability"])?;
    for ctx in pm.contexts() {
        for &(v, p) in pm.transition(ctx).expect("listed context") {
            w.write_record([g.labels().join(ctx, ","), g.labels().name(v).to_string(), p.to_string()])?;
        }
    }
    w.flush()?;
    drop(w);
    write_json(m.output(out, "synth.json")?, &stats)?;
    println!(
        "paths={} truncated={} transitions={}",
        stats.paths, stats.truncated, stats.transitions
    );
    m.finish(out)
}

fn stats(a: StatsArgs) -> Result<()> {
    let mut m = Manifest::new("stats");
    m.parameters(json!({}));
    m.phase("load");
    let c = read_corpus(&a.ngram, &mut m)?;
    let s = c.length_stats()?;
    m.phase("write");
    let out = &a.common.out;
    let mut w = csv::Writer::from_writer(m.output(out, "length_histogram.csv")?);
    w.write_record(["length", "count"])?;
    for (len, n) in &s.histogram {
        w.write_record([len.to_string(), n.to_string()])?;
    }
    w.flush()?;
    drop(w);
    let summary = json!({
        "paths": s.count,
        "distinct_paths": c.paths().len(),
        "mean_length": s.mean,
        "nodes": c.labels().len(),
        "histogram": s.histogram,
    });
    write_json(m.output(out, "stats.json")?, &summary)?;
    println!("paths={} mean_length={:.4}", s.count, s.mean);
    m.finish(out)
}
