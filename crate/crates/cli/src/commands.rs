use std::fs;
use std::path::{Path, PathBuf};

use magfit_core::baseline::{fit_logistic, logistic_edge_prob, LogisticConfig};
use magfit_core::fit::{fit, forward_select, FitConfig};
use magfit_core::metrics::{prob_log_likelihood, tpi, DistanceReport};
use magfit_core::model::{prob_adjacency, sample_attributes, sample_graph, DEFAULT_DENSE_CAP};
use magfit_core::netstats::Statistic;
use magfit_core::{AttributeTable, BinaryAttributeMatrix, DirectedGraph, MagParams, ProbAdjacency};

use crate::args::{BaselineArgs, Cli, Command, EvalArgs, FitArgs, GenerateArgs, ReplayArgs};
use crate::error::CliError;
use crate::formats;
use crate::manifest::RunManifest;

pub const EDGES_FILE: &str = "edges.txt";
pub const ATTRS_FILE: &str = "attributes.csv";
pub const PARAMS_FILE: &str = "params.mag";
pub const POSTERIOR_FILE: &str = "posterior.csv";
pub const FIT_LOG_FILE: &str = "fitlog.csv";
pub const SUMMARY_FILE: &str = "summary.csv";
pub const SELECTION_FILE: &str = "selection.csv";
pub const REPORT_FILE: &str = "report.csv";
pub const SCORES_FILE: &str = "scores.csv";
pub const LOGISTIC_FILE: &str = "logistic.csv";

/// Runs a parsed command line. `args` are the raw arguments after the program
/// name; they are recorded in the manifest for replay.
pub fn run(cli: Cli, args: Vec<String>) -> Result<(), CliError> {
    let cwd = std::env::current_dir().map_err(|e| CliError::input(format!("working directory: {e}")))?;
    match cli.command {
        Command::Generate(a) => generate(&a, RunManifest::new("generate", cwd, args)),
        Command::Fit(a) => fit_cmd(&a, RunManifest::new("fit", cwd, args)),
        Command::Eval(a) => eval(&a, RunManifest::new("eval", cwd, args)),
        Command::Baseline(a) => baseline(&a, RunManifest::new("baseline", cwd, args)),
        Command::Replay(a) => replay(&a),
    }
}

pub fn read_file(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

pub fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

fn prepare_out(out: &Path) -> Result<(), CliError> {
    fs::create_dir_all(out).map_err(|e| CliError::input(format!("{}: {e}", out.display())))
}

fn absolute(path: &Path) -> String {
    std::path::absolute(path).unwrap_or_else(|_| path.to_path_buf()).display().to_string()
}

fn load_graph(path: &Path) -> Result<DirectedGraph, CliError> {
    let parsed = formats::parse_edge_list(&read_file(path)?)
        .map_err(|e| CliError::input(format!("{}: {}", path.display(), e.message)))?;
    if parsed.duplicates > 0 || parsed.self_loops > 0 {
        eprintln!(
            "warning: {}: dropped {} duplicate edges and {} self-loops",
            path.display(),
            parsed.duplicates,
            parsed.self_loops
        );
    }
    Ok(parsed.graph)
}

fn load_table(path: &Path, n: usize) -> Result<AttributeTable, CliError> {
    let table = formats::parse_attribute_table(&read_file(path)?)
        .map_err(|e| CliError::input(format!("{}: {}", path.display(), e.message)))?;
    if table.n_nodes() != n {
        return Err(CliError::input(format!(
            "{}: {} attribute rows for a graph of {n} nodes",
            path.display(),
            table.n_nodes()
        )));
    }
    Ok(table)
}

/// Loads `--attrs` restricted to `--fixed` (every column when no list is given).
fn load_bits(
    attrs: Option<&Path>,
    fixed: Option<&str>,
    n: usize,
    manifest: &mut RunManifest,
) -> Result<Option<(Vec<String>, BinaryAttributeMatrix)>, CliError> {
    let Some(path) = attrs else {
        if fixed.is_some() {
            return Err(CliError::input("--fixed needs --attrs"));
        }
        return Ok(None);
    };
    manifest.set("input.attrs", absolute(path));
    let table = load_table(path, n)?;
    let columns = match fixed {
        Some(spec) => formats::resolve_columns(&table, spec)?,
        None => table.column_names().to_vec(),
    };
    manifest.set("config.fixed", columns.join(","));
    let bits = formats::binarize_columns(&table, &columns)?;
    Ok(Some((columns, bits)))
}

fn generate(a: &GenerateArgs, mut manifest: RunManifest) -> Result<(), CliError> {
    let params = formats::parse_params(&read_file(&a.params)?)
        .map_err(|e| CliError::input(format!("{}: {}", a.params.display(), e.message)))?;
    let f = sample_attributes(&params, a.n, a.seed);
    let graph = sample_graph(&f, params.thetas(), graph_seed(a.seed))?;
    prepare_out(&a.out)?;
    write_file(&a.out.join(EDGES_FILE), &formats::write_edge_list(&graph))?;
    write_file(&a.out.join(ATTRS_FILE), &formats::write_attribute_bits(&f))?;
    manifest.set("input.params", absolute(&a.params));
    manifest.set("config.n", a.n);
    manifest.set("seed", a.seed);
    manifest.set("out", absolute(&a.out));
    manifest.set("result.edges", graph.n_edges());
    manifest.write(&a.out)
}

/// Graph coins use a stream separate from the attribute draws.
fn graph_seed(seed: u64) -> u64 {
    seed ^ 0x9e37_79b9_7f4a_7c15
}

/// Keeps `eval` draws apart from `generate` draws made with the same seed.
fn eval_seed(seed: u64) -> u64 {
    seed.wrapping_add(0x2545_f491_4f6c_dd1d)
}

fn fit_cmd(a: &FitArgs, mut manifest: RunManifest) -> Result<(), CliError> {
    if a.threads == 0 {
        return Err(CliError::input("--threads must be at least 1"));
    }
    let graph = load_graph(&a.edges)?;
    manifest.set("input.edges", absolute(&a.edges));
    let fixed = load_bits(a.attrs.as_deref(), a.fixed.as_deref(), graph.n_nodes(), &mut manifest)?;
    let n_fixed = fixed.as_ref().map_or(0, |(c, _)| c.len());
    let n_attrs = a.n_attrs.unwrap_or(if n_fixed > 0 { n_fixed } else { 4 });
    let config = FitConfig {
        lambda: a.lambda,
        batch_size: a.batch,
        estep_rate: a.eta_e,
        mstep_rate: a.eta_m,
        em_rounds: a.rounds,
        tol: a.tol,
        mode: a.mode.into(),
        seed: a.seed,
        ..FitConfig::new(n_attrs)
    };
    config.validate()?;
    for (k, v) in [
        ("config.L", n_attrs.to_string()),
        ("config.lambda", a.lambda.to_string()),
        ("config.batch", a.batch.map_or("auto".into(), |b| b.to_string())),
        ("config.eta_e", a.eta_e.to_string()),
        ("config.eta_m", a.eta_m.to_string()),
        ("config.rounds", a.rounds.to_string()),
        ("config.tol", a.tol.to_string()),
        ("config.mode", format!("{:?}", config.mode).to_lowercase()),
        ("config.threads", a.threads.to_string()),
    ] {
        manifest.set(k, v);
    }
    manifest.set("seed", a.seed);
    manifest.set("out", absolute(&a.out));

    let (result, selection) = match (a.select, &fixed) {
        (Some(_), None) => return Err(CliError::input("--select needs --attrs")),
        (Some(k), Some((names, bits))) => {
            let (chosen, result) = forward_select(&graph, bits, k, &config)?;
            let chosen: Vec<String> = chosen.iter().map(|&c| names[c].clone()).collect();
            (result, Some(chosen))
        }
        (None, fixed) => (fit(&graph, &config, fixed.as_ref().map(|(_, b)| b))?, None),
    };

    prepare_out(&a.out)?;
    write_file(&a.out.join(PARAMS_FILE), &formats::write_params(&result.params))?;
    write_file(&a.out.join(POSTERIOR_FILE), &formats::write_posterior(&result.posterior))?;
    write_file(&a.out.join(FIT_LOG_FILE), &formats::write_fit_log(result.initial_lq, &result.lq_trace))?;
    let summary = [
        ("converged", f64::from(u8::from(result.converged))),
        ("rounds", result.rounds_used as f64),
        ("lq", result.final_lq()),
        ("work_estep", result.work.estep as f64),
        ("work_mstep", result.work.mstep as f64),
        ("work_bound", result.work.bound as f64),
    ];
    write_file(&a.out.join(SUMMARY_FILE), &formats::write_scores(&summary))?;
    if let Some(chosen) = selection {
        let mut text = String::from("rank,column\n");
        for (r, c) in chosen.iter().enumerate() {
            text.push_str(&format!("{},{c}\n", r + 1));
        }
        write_file(&a.out.join(SELECTION_FILE), &text)?;
        manifest.set("result.selected", chosen.join(","));
    }
    manifest.set("result.converged", result.converged);
    manifest.set("result.rounds", result.rounds_used);
    manifest.write(&a.out)
}

fn model_probabilities(f: &BinaryAttributeMatrix, params: &MagParams) -> Result<ProbAdjacency, CliError> {
    Ok(prob_adjacency(f, params.thetas(), DEFAULT_DENSE_CAP)?)
}

fn eval(a: &EvalArgs, mut manifest: RunManifest) -> Result<(), CliError> {
    let real = load_graph(&a.edges)?;
    if real.n_edges() == 0 {
        return Err(CliError::input(format!("{}: graph has no edges", a.edges.display())));
    }
    let n = real.n_nodes();
    manifest.set("input.edges", absolute(&a.edges));
    let (params, f) = match (&a.params, &a.fitted) {
        (Some(p), _) => {
            manifest.set("input.params", absolute(p));
            let params = formats::parse_params(&read_file(p)?)?;
            let f = sample_attributes(&params, n, eval_seed(a.seed));
            (params, f)
        }
        (None, Some(dir)) => {
            manifest.set("input.fitted", absolute(dir));
            let params = formats::parse_params(&read_file(&dir.join(PARAMS_FILE))?)?;
            let f = formats::parse_posterior_bits(&read_file(&dir.join(POSTERIOR_FILE))?)?;
            if f.n_nodes() != n || f.n_attrs() != params.n_attrs() {
                return Err(CliError::input(format!(
                    "{}: posterior is {}x{}, expected {n}x{}",
                    dir.display(),
                    f.n_nodes(),
                    f.n_attrs(),
                    params.n_attrs()
                )));
            }
            (params, f)
        }
        (None, None) => return Err(CliError::input("eval needs --params or --fitted")),
    };
    let model = match &a.against {
        Some(path) => {
            manifest.set("input.against", absolute(path));
            load_graph(path)?
        }
        None => {
            // The synthetic graph comes from the parameters alone; node-aligned
            // attributes are only used for the scores.
            let fresh = sample_attributes(&params, n, eval_seed(a.seed));
            sample_graph(&fresh, params.thetas(), graph_seed(eval_seed(a.seed)))?
        }
    };
    manifest.set("config.k_singular", a.k_singular);
    manifest.set("seed", a.seed);
    manifest.set("out", absolute(&a.out));

    prepare_out(&a.out)?;
    for stat in Statistic::ALL {
        for (label, g) in [("real", &real), ("model", &model)] {
            let name = formats::series_file_name(stat, label);
            match stat.series(g, a.k_singular.min(g.n_nodes())) {
                Ok(s) => write_file(&a.out.join(&name), &formats::write_series(stat, &s))?,
                Err(e) => manifest.set(format!("skipped.{name}"), e),
            }
        }
    }
    let report = DistanceReport::compare(&real, &model, a.k_singular.min(n).min(model.n_nodes()));
    for (stat, reason) in &report.skipped {
        manifest.set(format!("skipped.report.{}", stat.name()), reason);
    }
    write_file(&a.out.join(REPORT_FILE), &formats::write_report(&report))?;

    if n <= DEFAULT_DENSE_CAP {
        let p = model_probabilities(&f, &params)?;
        let scores = [("ll", prob_log_likelihood(&real, &p)?), ("tpi", tpi(&real, &p)?)];
        write_file(&a.out.join(SCORES_FILE), &formats::write_scores(&scores))?;
    } else {
        manifest.set("skipped.scores", format!("{n} nodes exceed the dense cap of {DEFAULT_DENSE_CAP}"));
    }
    manifest.write(&a.out)
}

fn baseline(a: &BaselineArgs, mut manifest: RunManifest) -> Result<(), CliError> {
    let graph = load_graph(&a.edges)?;
    let n = graph.n_nodes();
    manifest.set("input.edges", absolute(&a.edges));
    let f = match load_bits(a.attrs.as_deref(), a.fixed.as_deref(), n, &mut manifest)? {
        Some((_, bits)) => bits,
        None => BinaryAttributeMatrix::zeros(n, 0),
    };
    manifest.set("out", absolute(&a.out));
    let fitted = fit_logistic(&graph, &f, &LogisticConfig::default())?;
    prepare_out(&a.out)?;
    write_file(&a.out.join(LOGISTIC_FILE), &formats::write_logistic(&fitted.params))?;
    let mut scores = vec![("ll", fitted.log_likelihood)];
    if n <= DEFAULT_DENSE_CAP && graph.n_edges() > 0 {
        let p = ProbAdjacency::from_fn(n, DEFAULT_DENSE_CAP, |i, j| {
            logistic_edge_prob(&fitted.params, f.row(i), f.row(j)).unwrap_or(f64::NAN)
        })?;
        scores.push(("tpi", tpi(&graph, &p)?));
    }
    write_file(&a.out.join(SCORES_FILE), &formats::write_scores(&scores))?;
    manifest.set("result.iterations", fitted.trace.len());
    manifest.write(&a.out)
}

fn replay(a: &ReplayArgs) -> Result<(), CliError> {
    let recorded = RunManifest::parse(&read_file(&a.manifest)?)?;
    let mut args = recorded.args.clone();
    if let Some(out) = &a.out {
        let out = absolute(out);
        let pos = args.iter().position(|s| s == "--out" || s.starts_with("--out="));
        match pos {
            Some(i) if args[i] == "--out" && i + 1 < args.len() => args[i + 1] = out,
            Some(i) => args[i] = format!("--out={out}"),
            None => return Err(CliError::input("manifest arguments have no --out")),
        }
    }
    let cli = <Cli as clap::Parser>::try_parse_from(std::iter::once("magfit".to_string()).chain(args.iter().cloned()))
        .map_err(|e| CliError::input(format!("manifest arguments: {e}")))?;
    if matches!(cli.command, Command::Replay(_)) {
        return Err(CliError::input("a manifest cannot record a replay"));
    }
    std::env::set_current_dir(&recorded.cwd)
        .map_err(|e| CliError::input(format!("{}: {e}", recorded.cwd.display())))?;
    run(cli, args)
}

/// Path of a run's manifest inside its output directory.
pub fn manifest_path(out: &Path) -> PathBuf {
    out.join(crate::manifest::FILE_NAME)
}
