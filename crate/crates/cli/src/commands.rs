use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::Context;
use rayon::prelude::*;

use playsleuth::features::{app_cliques, assemble_all, FeatureContext, FeatureMatrix};
use playsleuth::format::{content_lines, document_body, header_line};
use playsleuth::irr::{chi_square_independence, contingency_table, mosaic_tsv};
use playsleuth::learn::{cross_validate, train, EvalReport, Hyperparameters, LearnerKind, TrainedModel};
use playsleuth::model::{export_texts, ingest, IngestReport, Manifest, MANIFEST_FILE};
use playsleuth::pcf::CliqueRecord;
use playsleuth::permissions::RampMode;
use playsleuth::review::filter::review_dataset;
use playsleuth::review::{
    coercive_scan, train_review_filter, LabelClassifier, ReviewClassifier, ReviewFilter, SentimentModel,
};
use playsleuth::synth::TRUTH_FILE;
use playsleuth::{build_graph, generate, Assets, DatasetStore, GenConfig, GraphConfig, PcfConfig};

use crate::output::OutDir;
use crate::{Command, Finder, Invalid, RampArg, ReviewSource};

pub const PREDICTIONS_KIND: &str = "predictions";
pub const CLIQUES_KIND: &str = "cliques";

struct Loaded {
    manifest: Manifest,
    store: DatasetStore,
    assets: Assets,
    report: IngestReport,
    inputs: Vec<PathBuf>,
}

fn load(manifest_path: &Path) -> anyhow::Result<Loaded> {
    let manifest = Manifest::load(manifest_path)?;
    let (store, report) = ingest(&manifest)?;
    if report.rejected_count() > 0 {
        log::warn!("{} record(s) rejected while loading", report.rejected_count());
    }
    let assets = Assets::from_manifest(&manifest)?;
    let mut inputs = vec![manifest_path.to_owned()];
    inputs.extend(manifest.input_paths().into_iter().map(Path::to_owned));
    Ok(Loaded {
        manifest,
        store,
        assets,
        report,
        inputs,
    })
}

fn finder_config(f: &Finder) -> anyhow::Result<PcfConfig> {
    Ok(PcfConfig::new(f.theta, f.min_size)?)
}

fn classifier(src: &ReviewSource, inputs: &mut Vec<PathBuf>) -> anyhow::Result<Box<dyn ReviewClassifier + Sync>> {
    match &src.filter {
        Some(p) => {
            inputs.push(p.clone());
            Ok(Box::new(ReviewFilter::load(p)?))
        }
        None => Ok(Box::new(LabelClassifier)),
    }
}

fn json_document<T: serde::Serialize>(kind: &str, value: &T) -> anyhow::Result<String> {
    let mut s = header_line(kind);
    s.push('\n');
    s.push_str(&serde_json::to_string_pretty(value)?);
    s.push('\n');
    Ok(s)
}

fn check_ids<'a>(store: &DatasetStore, ids: &'a [String]) -> anyhow::Result<Vec<&'a str>> {
    for id in ids {
        if store.app_ordinal(id).is_none() {
            return Err(Invalid(format!("unknown app `{id}`")).into());
        }
    }
    Ok(ids.iter().map(String::as_str).collect())
}

pub fn run(command: &Command, seed: Option<u64>) -> anyhow::Result<()> {
    let seed_or_default = seed.unwrap_or(0);
    match command {
        Command::Ingest { input, out } => {
            let l = load(&input.manifest)?;
            let report = &l.report;
            let mut dir = OutDir::create(&out.out, &l.inputs)?;
            for (name, text) in export_texts(&l.store) {
                dir.write(name, &text)?;
            }
            let mut canonical = Manifest::conventional();
            canonical.permission_catalog = l.manifest.permission_catalog.clone();
            canonical.lexicons = l.manifest.lexicons.clone();
            canonical.sentiment_corpus = l.manifest.sentiment_corpus.clone();
            canonical.coercive_keywords = l.manifest.coercive_keywords.clone();
            canonical.install_buckets = l.manifest.install_buckets.clone();
            dir.write(MANIFEST_FILE, &canonical.to_document())?;
            dir.write("ingest_report.txt", &report.render())?;
            eprint!("{}", report.render());
            dir.finish("ingest", seed_or_default, command, &l.inputs)
        }
        Command::Generate { config, out } => {
            let mut inputs = Vec::new();
            let mut cfg = match config {
                Some(p) => {
                    inputs.push(p.clone());
                    GenConfig::load(p)?
                }
                None => GenConfig::default(),
            };
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let market = generate(&cfg)?;
            let mut dir = OutDir::create(&out.out, &inputs)?;
            for (name, text) in export_texts(&market.store) {
                dir.write(name, &text)?;
            }
            dir.write(MANIFEST_FILE, &Manifest::conventional().to_document())?;
            dir.write(TRUTH_FILE, &market.truth.to_json())?;
            dir.write("gen_config.json", &cfg.to_json())?;
            eprintln!(
                "generated {} apps, {} reviews, {} campaigns",
                market.store.app_count(),
                market.store.review_count(),
                market.truth.campaigns.len()
            );
            dir.finish("generate", cfg.seed, command, &inputs)
        }
        Command::Graph { input, app, out } => {
            let l = load(&input.manifest)?;
            check_ids(&l.store, std::slice::from_ref(app))?;
            let graph = build_graph(&l.store, app, GraphConfig::default())?;
            let mut dir = OutDir::create(&out.out, &l.inputs)?;
            dir.write("graph.txt", &graph.dump())?;
            dir.finish("graph", seed_or_default, command, &l.inputs)
        }
        Command::Pcf {
            input,
            app,
            finder,
            out,
        } => {
            let l = load(&input.manifest)?;
            let config = finder_config(finder)?;
            let ids: Vec<&str> = if app.is_empty() {
                l.store.app_ids().collect()
            } else {
                let mut v = check_ids(&l.store, app)?;
                v.sort_unstable();
                v.dedup();
                v
            };
            let per_app = ids
                .par_iter()
                .map(|id| app_cliques(&l.store, id, GraphConfig::default(), &config).map(|(c, _)| (*id, c)))
                .collect::<playsleuth::Result<Vec<_>>>()?;
            let mut text = header_line(CLIQUES_KIND);
            text.push('\n');
            let mut total = 0;
            for (id, cliques) in &per_app {
                for c in cliques {
                    text.push_str(&serde_json::to_string(&CliqueRecord::new(id, c))?);
                    text.push('\n');
                    total += 1;
                }
            }
            let mut dir = OutDir::create(&out.out, &l.inputs)?;
            dir.write("cliques.jsonl", &text)?;
            eprintln!("{total} pseudo clique(s) in {} app(s)", ids.len());
            dir.finish("pcf", seed_or_default, command, &l.inputs)
        }
        Command::Features {
            input,
            reviews,
            finder,
            ramp_mode,
            out,
        } => {
            let mut l = load(&input.manifest)?;
            let classifier = classifier(reviews, &mut l.inputs)?;
            let mut ctx = FeatureContext::new(
                classifier.as_ref(),
                &l.assets.lexicons,
                &l.assets.buckets,
                &l.assets.catalog,
            );
            ctx.pcf = finder_config(finder)?;
            ctx.ramp_mode = match ramp_mode {
                RampArg::Count => RampMode::Count,
                RampArg::Set => RampMode::Set,
            };
            let ids: Vec<&str> = l.store.app_ids().collect();
            let features = assemble_all(&l.store, &ids, &ctx)?;
            let matrix = FeatureMatrix::from_features(&features, |id| l.store.labels().app(id));
            let mut flags = header_line("feature-flags");
            flags.push_str("\napp_id\tno_reviews\tno_cliques\tno_genuine_reviews\tshort_series\n");
            for f in &features {
                let g = &f.flags;
                let _ = writeln!(
                    flags,
                    "{}\t{}\t{}\t{}\t{}",
                    f.app_id, g.no_reviews as u8, g.no_cliques as u8, g.no_genuine_reviews as u8, g.short_series as u8
                );
            }
            let mut dir = OutDir::create(&out.out, &l.inputs)?;
            dir.write("features.tsv", &matrix.to_tsv())?;
            dir.write("feature_flags.tsv", &flags)?;
            dir.finish("features", seed_or_default, command, &l.inputs)
        }
        Command::TrainReviewFilter {
            input,
            learner,
            alpha,
            k,
            out,
        } => {
            let l = load(&input.manifest)?;
            let sentiment = SentimentModel::train(&l.assets.sentiment_corpus, *alpha)?;
            let params = Hyperparameters::defaults(*learner);
            let mut dir = OutDir::create(&out.out, &l.inputs)?;
            if let Some(k) = k {
                let data = review_dataset(&l.store, &sentiment)?;
                let report = cross_validate(&data, &params, *k, seed_or_default)?;
                report.check_identities()?;
                let table = EvalReport::render_table(&[&report]);
                dir.write("review_filter_eval.json", &report.to_json())?;
                dir.write("review_filter_eval.txt", &table)?;
                eprint!("{table}");
            }
            let filter = train_review_filter(&l.store, sentiment, &params, seed_or_default)?;
            dir.write("review_filter.json", &filter.to_json())?;
            dir.finish("train-review-filter", seed_or_default, command, &l.inputs)
        }
        Command::TrainApp {
            features,
            task,
            learner,
            out,
        } => {
            let inputs = vec![features.clone()];
            let matrix = FeatureMatrix::load(features)?;
            let data = matrix.task_dataset(*task)?;
            let model = train(&data, &Hyperparameters::defaults(*learner), seed_or_default)?;
            let mut dir = OutDir::create(&out.out, &inputs)?;
            dir.write("model.json", &model.to_json())?;
            dir.finish("train-app", seed_or_default, command, &inputs)
        }
        Command::Crossval {
            features,
            task,
            learner,
            k,
            out,
        } => {
            let inputs = vec![features.clone()];
            let matrix = FeatureMatrix::load(features)?;
            let data = matrix.task_dataset(*task)?;
            let mut kinds: Vec<LearnerKind> = Vec::new();
            for l in learner {
                if !kinds.contains(l) {
                    kinds.push(*l);
                }
            }
            let reports = kinds
                .iter()
                .map(|&kind| {
                    let r = cross_validate(&data, &Hyperparameters::defaults(kind), *k, seed_or_default)?;
                    r.check_identities()?;
                    Ok(r)
                })
                .collect::<playsleuth::Result<Vec<_>>>()?;
            let mut dir = OutDir::create(&out.out, &inputs)?;
            for (kind, r) in kinds.iter().zip(&reports) {
                dir.write(&format!("eval_{}.json", kind.as_str()), &r.to_json())?;
            }
            let table = EvalReport::render_table(&reports.iter().collect::<Vec<_>>());
            dir.write("eval_table.txt", &table)?;
            print!("{table}");
            dir.finish("crossval", seed_or_default, command, &inputs)
        }
        Command::Predict { model, features, out } => {
            let inputs = vec![model.clone(), features.clone()];
            let trained = TrainedModel::load(model)?;
            let matrix = FeatureMatrix::load(features)?;
            let predictions = trained.predict(&matrix.schema, &matrix.rows)?;
            let mut text = header_line(PREDICTIONS_KIND);
            text.push_str("\napp_id\tpositive\tscore\n");
            let mut flagged = 0;
            for (id, p) in matrix.ids.iter().zip(&predictions) {
                flagged += p.positive as usize;
                let _ = writeln!(text, "{id}\t{}\t{}", p.positive as u8, p.scores[1]);
            }
            let mut dir = OutDir::create(&out.out, &inputs)?;
            dir.write("predictions.tsv", &text)?;
            eprintln!("flagged {flagged} of {} apps", matrix.ids.len());
            dir.finish("predict", seed_or_default, command, &inputs)
        }
        Command::Chisq { input, out } => {
            let l = load(&input.manifest)?;
            let table = contingency_table(&l.store, &l.assets.buckets)?;
            let result = chi_square_independence(&table)?;
            let mut dir = OutDir::create(&out.out, &l.inputs)?;
            dir.write("chisq.json", &json_document("chisq", &result)?)?;
            dir.write("mosaic.tsv", &mosaic_tsv(&result))?;
            eprintln!(
                "chi2 {:.4}, dof {}, p {:e}",
                result.statistic, result.dof, result.p_value
            );
            dir.finish("chisq", seed_or_default, command, &l.inputs)
        }
        Command::CoerciveScan {
            input,
            reviews,
            min_hits,
            out,
        } => {
            let mut l = load(&input.manifest)?;
            let classifier = classifier(reviews, &mut l.inputs)?;
            let scan = coercive_scan(&l.store, &l.assets.coercive_keywords, classifier.as_ref())?;
            let mut apps = header_line("coercive-apps");
            apps.push_str("\napp_id\thits\n");
            for a in scan.flagged(*min_hits) {
                let _ = writeln!(apps, "{}\t{}", a.app_id, a.hits);
            }
            let mut hits = header_line("coercive-hits");
            hits.push_str("\napp_id\treview_id\n");
            for h in &scan.hits {
                let _ = writeln!(hits, "{}\t{}", h.app_id, h.review_id);
            }
            let mut dir = OutDir::create(&out.out, &l.inputs)?;
            dir.write("coercive_apps.tsv", &apps)?;
            dir.write("coercive_hits.tsv", &hits)?;
            eprintln!(
                "{} app(s) with at least {min_hits} hit(s)",
                scan.flagged(*min_hits).count()
            );
            dir.finish("coercive-scan", seed_or_default, command, &l.inputs)
        }
        Command::Report {
            predictions,
            input,
            out,
        } => {
            let mut l = load(&input.manifest)?;
            l.inputs.push(predictions.clone());
            let text =
                std::fs::read_to_string(predictions).with_context(|| format!("reading {}", predictions.display()))?;
            let flagged = parse_predictions(&text)?;
            let table = category_density(&l.store, &flagged)?;
            let mut dir = OutDir::create(&out.out, &l.inputs)?;
            dir.write("category_density.tsv", &table)?;
            print!("{}", playsleuth::format::strip_header(&table));
            dir.finish("report", seed_or_default, command, &l.inputs)
        }
    }
}

/// App id to predicted-positive flag.
pub fn parse_predictions(text: &str) -> anyhow::Result<BTreeMap<String, bool>> {
    let body = document_body(text, PREDICTIONS_KIND)?;
    let mut lines = content_lines(body);
    match lines.next() {
        Some((_, h)) if h.starts_with("app_id\tpositive") => {}
        _ => return Err(Invalid("predictions: missing column header".into()).into()),
    }
    let mut out = BTreeMap::new();
    for (n, line) in lines {
        let mut f = line.split('\t');
        let (Some(id), Some(flag)) = (f.next(), f.next()) else {
            return Err(Invalid(format!("predictions line {n}: too few fields")).into());
        };
        let flag = match flag {
            "0" => false,
            "1" => true,
            other => return Err(Invalid(format!("predictions line {n}: bad flag `{other}`")).into()),
        };
        out.insert(id.to_owned(), flag);
    }
    Ok(out)
}

/// Per-category counts of predicted apps, densest category first.
pub fn category_density(store: &DatasetStore, flagged: &BTreeMap<String, bool>) -> anyhow::Result<String> {
    let mut per: BTreeMap<&str, (usize, usize)> = BTreeMap::new();
    for (id, &positive) in flagged {
        let app = store
            .app(id)
            .map_err(|_| Invalid(format!("prediction for unknown app `{id}`")))?;
        let e = per.entry(app.category.as_str()).or_default();
        e.0 += 1;
        e.1 += positive as usize;
    }
    let mut rows: Vec<(&str, usize, usize, f64)> = per
        .into_iter()
        .map(|(c, (n, f))| (c, n, f, 100.0 * f as f64 / n as f64))
        .collect();
    rows.sort_by(|a, b| b.3.total_cmp(&a.3).then_with(|| a.0.cmp(b.0)));
    let mut s = header_line("category-density");
    s.push_str("\ncategory\tapps\tflagged\tdensity_pct\n");
    for (c, n, f, d) in rows {
        let _ = writeln!(s, "{c}\t{n}\t{f}\t{d:.2}");
    }
    Ok(s)
}
