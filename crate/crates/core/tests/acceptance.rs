//! Acceptance criteria, one PASS/FAIL line each. Runs without the test
//! harness so the lines always reach the output.

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use chrono::NaiveDate;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use playsleuth::features::{app_cliques, app_schema, assemble_all, FeatureContext, FeatureMatrix, Task};
use playsleuth::graph::{weighted_density, CoReviewGraph, GraphConfig, GraphNode};
use playsleuth::irr::{chi_square_independence, detect_spikes, ContingencyTable};
use playsleuth::learn::{cross_validate, train, EvalReport, Hyperparameters, LearnerKind, Mlp};
use playsleuth::model::{export_texts, AppLabel, AppSnapshot, Bucket, BucketTable, Day};
use playsleuth::pcf::{pcf, Candidate, PcfConfig, PseudoClique, ReviewDay};
use playsleuth::permissions::{ramp_analysis, PermissionCatalog, RampMode};
use playsleuth::review::{bundled_corpus, train_review_filter, IndicatorLexicons, SentimentModel};
use playsleuth::synth::{generate, GenConfig, SyntheticMarket};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn day(n: u32) -> Day {
    NaiveDate::from_ymd_opt(2015, 3, 1).unwrap() + chrono::Days::new(n as u64)
}

fn graph_from(weights: &[Vec<u32>], dates: &[Vec<Day>]) -> CoReviewGraph {
    let nodes = (0..weights.len())
        .map(|i| GraphNode {
            reviewer_id: format!("r{i:02}"),
            review_dates: dates.get(i).cloned().unwrap_or_default(),
        })
        .collect();
    CoReviewGraph::from_fn("app", nodes, |i, j| weights[i][j])
}

fn random_weights(rng: &mut ChaCha8Rng, n: usize, max: u32) -> Vec<Vec<u32>> {
    let mut w = vec![vec![0u32; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let x = rng.gen_range(0..=max);
            w[i][j] = x;
            w[j][i] = x;
        }
    }
    w
}

fn direct_density(w: &[Vec<u32>], members: &[usize]) -> f64 {
    let k = members.len();
    if k < 2 {
        return 0.0;
    }
    let mut total = 0.0;
    for a in 0..k {
        for b in a + 1..k {
            total += w[members[a]][members[b]] as f64;
        }
    }
    total / (k * (k - 1) / 2) as f64
}

fn density_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let n = rng.gen_range(1..=20);
        let w = random_weights(&mut rng, n, 50);
        let g = graph_from(&w, &[]);
        let members: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.6)).collect();
        for set in [members, (0..n).collect()] {
            worst = worst.max((weighted_density(&g, &set) - direct_density(&w, &set)).abs());
        }
    }
    let took = start.elapsed();
    outcome(
        worst <= 1e-12 && took < Duration::from_secs(5),
        format!("max |diff| {worst:.2e} over 1000 graphs in {took:.2?}"),
    )
}

fn review_days_of(assign: &[u32]) -> Vec<ReviewDay> {
    let days: BTreeSet<u32> = assign.iter().copied().collect();
    days.into_iter()
        .map(|d| ReviewDay {
            day: day(d),
            candidates: (0..assign.len())
                .filter(|&i| assign[i] == d)
                .map(|node| Candidate { node, date: day(d) })
                .collect(),
        })
        .collect()
}

/// Every review day inside the span contributes a member and no member
/// reviewed outside it.
fn contiguous(c: &PseudoClique, assign: &[u32], days: &[ReviewDay]) -> bool {
    let (lo, hi) = c.day_span;
    let member_days: BTreeSet<Day> = c.nodes.iter().map(|&n| day(assign[n])).collect();
    member_days.iter().all(|d| (lo..=hi).contains(d))
        && days
            .iter()
            .filter(|d| (lo..=hi).contains(&d.day))
            .all(|d| member_days.contains(&d.day))
}

fn max_subset_density(w: &[Vec<u32>], min_size: usize) -> f64 {
    let n = w.len();
    let mut best = 0.0f64;
    for mask in 0u32..(1 << n) {
        if (mask.count_ones() as usize) < min_size {
            continue;
        }
        let members: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        best = best.max(direct_density(w, &members));
    }
    best
}

fn pcf_soundness() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut emitted = 0;
    let mut problems = Vec::new();
    for inst in 0..500 {
        let n = rng.gen_range(3..=12);
        let ndays = rng.gen_range(1..=4);
        let max_w = [3, 6, 12][rng.gen_range(0..3)];
        let w = random_weights(&mut rng, n, max_w);
        let assign: Vec<u32> = (0..n).map(|_| rng.gen_range(0..ndays)).collect();
        let dates: Vec<Vec<Day>> = assign.iter().map(|&d| vec![day(d)]).collect();
        let g = graph_from(&w, &dates);
        let days = review_days_of(&assign);
        let theta = [1.0, 2.0, 3.0, 4.5][rng.gen_range(0..4)];
        let config = PcfConfig::new(theta, 3).unwrap();
        let cliques = pcf(&g, &days, &config);
        let ceiling = max_subset_density(&w, 3);
        for c in &cliques {
            emitted += 1;
            let rho = direct_density(&w, &c.nodes);
            if rho < theta || c.size() < 3 || !contiguous(c, &assign, &days) || rho > ceiling + 1e-12 {
                problems.push(format!("instance {inst}: {:?} rho {rho}", c.members));
            }
        }
    }
    let took = start.elapsed();
    outcome(
        problems.is_empty() && took < Duration::from_secs(60),
        format!(
            "{emitted} cliques from 500 instances, {} violations, {took:.2?}{}",
            problems.len(),
            problems.first().map(|p| format!(" (first: {p})")).unwrap_or_default()
        ),
    )
}

fn two_day_split() -> Outcome {
    // days 1,2: a b | c d       days 3,4: e f | g h
    let n = 8;
    let mut w = vec![vec![0u32; n]; n];
    let mut set = |i: usize, j: usize, x: u32| {
        w[i][j] = x;
        w[j][i] = x;
    };
    for i in 0..4 {
        for j in i + 1..4 {
            set(i, j, 9);
        }
        for j in 4..8 {
            set(i, j, 3);
        }
    }
    for i in 4..8 {
        for j in i + 1..8 {
            set(i, j, 12);
        }
    }
    set(4, 5, 14);
    let assign = [0, 0, 1, 1, 2, 2, 3, 3];
    let dates: Vec<Vec<Day>> = assign.iter().map(|&d| vec![day(d)]).collect();
    let g = graph_from(&w, &dates);
    let days = review_days_of(&assign);
    let ids = |r: std::ops::Range<usize>| r.map(|i| format!("r{i:02}")).collect::<Vec<_>>();

    let at6 = pcf(&g, &days, &PcfConfig::new(6.0, 3).unwrap());
    let whole = at6
        .iter()
        .any(|c| c.members == ids(0..8) && c.day_span == (day(0), day(3)));
    let at7 = pcf(&g, &days, &PcfConfig::new(7.0, 3).unwrap());
    let halves: Vec<&Vec<String>> = at7.iter().map(|c| &c.members).collect();
    let split = halves == [&ids(0..4), &ids(4..8)];
    let describe = |cs: &[PseudoClique]| {
        cs.iter()
            .map(|c| format!("{}@{:.2}", c.size(), c.density))
            .collect::<Vec<_>>()
            .join(",")
    };
    outcome(
        whole && split,
        format!("theta 6 -> [{}], theta 7 -> [{}]", describe(&at6), describe(&at7)),
    )
}

fn planted_recovery() -> Outcome {
    let mut per_seed = Vec::new();
    for seed in 0..20 {
        let mut config = GenConfig::default();
        config.seed = seed;
        let m = generate(&config).unwrap();
        let mut shares = Vec::new();
        for app in m.store.labels().apps_with(AppLabel::Fraudulent) {
            let (cliques, _) = app_cliques(&m.store, app, GraphConfig::default(), &PcfConfig::default()).unwrap();
            shares.extend(m.truth.recovery(app, &cliques));
        }
        per_seed.push(shares.iter().sum::<f64>() / shares.len() as f64);
    }
    let mean = per_seed.iter().sum::<f64>() / per_seed.len() as f64;
    let min = per_seed.iter().copied().fold(f64::INFINITY, f64::min);
    outcome(
        mean >= 0.9,
        format!("mean recovery {:.4} over 20 seeds (worst seed {:.4})", mean, min),
    )
}

fn oracle_spikes(counts: &[u64]) -> (Vec<usize>, bool) {
    if counts.len() < 4 {
        return (Vec::new(), true);
    }
    let mut s: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
    s.sort_by(f64::total_cmp);
    let q = |p: f64| {
        let h = (s.len() - 1) as f64 * p;
        let lo = h.floor() as usize;
        let hi = (lo + 1).min(s.len() - 1);
        s[lo] + (h - lo as f64) * (s[hi] - s[lo])
    };
    let (q1, q3) = (q(0.25), q(0.75));
    let fence = q3 + 3.0 * (q3 - q1);
    ((0..counts.len()).filter(|&i| counts[i] as f64 > fence).collect(), false)
}

fn spike_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut mismatches = 0;
    let mut with_spikes = 0;
    for _ in 0..1000 {
        let len = rng.gen_range(0..=80);
        let base = rng.gen_range(0..=6);
        let counts: Vec<u64> = (0..len)
            .map(|_| {
                if rng.gen_bool(0.05) {
                    rng.gen_range(10..=60)
                } else {
                    rng.gen_range(0..=base)
                }
            })
            .collect();
        let got = detect_spikes(&counts);
        let (want, short) = oracle_spikes(&counts);
        if got.spike_days != want || got.insufficient != short {
            mismatches += 1;
        }
        with_spikes += !want.is_empty() as usize;
    }
    outcome(
        mismatches == 0,
        format!("{mismatches} mismatches on 1000 series ({with_spikes} with spikes)"),
    )
}

fn chi_square_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (mut closed, mut pval, mut resid) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..100 {
        let a: [u64; 4] = std::array::from_fn(|_| rng.gen_range(1..=60));
        let t = ContingencyTable::from_counts(vec![vec![a[0], a[1]], vec![a[2], a[3]]]).unwrap();
        let chi = chi_square_independence(&t).unwrap();
        let [a, b, c, d] = a.map(|x| x as f64);
        let n = a + b + c + d;
        let form = n * (a * d - b * c).powi(2) / ((a + b) * (c + d) * (a + c) * (b + d));
        closed = closed.max((chi.statistic - form).abs() / form.max(1.0));

        let rows = rng.gen_range(2..=6);
        let cols = rng.gen_range(2..=6);
        let counts: Vec<Vec<u64>> = (0..rows)
            .map(|_| (0..cols).map(|_| rng.gen_range(1..=80)).collect())
            .collect();
        let chi = chi_square_independence(&ContingencyTable::from_counts(counts).unwrap()).unwrap();
        let reference = ChiSquared::new(chi.dof as f64).unwrap().sf(chi.statistic);
        pval = pval.max((chi.p_value - reference).abs());
        let sum: f64 = chi.residuals.iter().flatten().map(|r| r * r).sum();
        resid = resid.max((sum - chi.statistic).abs());
    }
    outcome(
        closed <= 1e-9 && pval <= 1e-6 && resid <= 1e-9,
        format!("2x2 closed form {closed:.1e}, p-value {pval:.1e}, residual identity {resid:.1e}"),
    )
}

struct Pipeline {
    market: SyntheticMarket,
    matrix: FeatureMatrix,
}

fn pipeline(seed: u64) -> Pipeline {
    let mut config = GenConfig::default();
    config.seed = seed;
    let market = generate(&config).unwrap();
    let store = &market.store;
    let sentiment = SentimentModel::train(&bundled_corpus(), 1.0).unwrap();
    let filter = train_review_filter(store, sentiment, &Hyperparameters::defaults(LearnerKind::Mlp), seed).unwrap();
    let lexicons = IndicatorLexicons::bundled();
    let buckets = BucketTable::default();
    let catalog = PermissionCatalog::bundled();
    let ctx = FeatureContext::new(&filter, &lexicons, &buckets, &catalog);
    let ids: Vec<&str> = store.app_ids().collect();
    let features = assemble_all(store, &ids, &ctx).unwrap();
    let matrix = FeatureMatrix::from_features(&features, |a| store.labels().app(a));
    Pipeline { market, matrix }
}

fn classification(p: &Pipeline, started: Instant) -> Outcome {
    let rf = Hyperparameters::defaults(LearnerKind::Rf);
    let fraud = cross_validate(&p.matrix.task_dataset(Task::Fraud).unwrap(), &rf, 10, 7).unwrap();
    let malware = cross_validate(&p.matrix.task_dataset(Task::Malware).unwrap(), &rf, 10, 7).unwrap();
    let took = started.elapsed();
    outcome(
        fraud.accuracy >= 90.0 && fraud.fpr <= 5.0 && malware.accuracy >= 88.0 && took < Duration::from_secs(600),
        format!(
            "fraud acc {:.2} fpr {:.2}; malware acc {:.2}; {took:.2?}",
            fraud.accuracy, fraud.fpr, malware.accuracy
        ),
    )
}

fn transfer(p: &Pipeline) -> Outcome {
    let model = train(
        &p.matrix.task_dataset(Task::Fraud).unwrap(),
        &Hyperparameters::defaults(LearnerKind::Rf),
        11,
    )
    .unwrap();
    let malware = p.matrix.labeled_as(AppLabel::Malware).unwrap();
    let preds = model.predict(&app_schema(), &malware.rows).unwrap();
    let flagged = preds.iter().filter(|x| x.positive).count();
    let share = 100.0 * flagged as f64 / preds.len() as f64;
    let planted = p.market.truth.campaign_apps();
    let in_campaigns = malware.ids.iter().filter(|a| planted.contains(a.as_str())).count();
    outcome(
        share >= 60.0,
        format!(
            "{flagged}/{} malware apps flagged fraudulent ({share:.1}%), {in_campaigns} joined campaigns",
            preds.len()
        ),
    )
}

fn gradient_error(rng: &mut ChaCha8Rng) -> f64 {
    let mut net = Mlp::init(4, 3, rng);
    let mut p = net.parameters();
    for x in &mut p {
        *x = rng.gen_range(-1.0..1.0);
    }
    net.set_parameters(&p);
    let z: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let label = rng.gen_bool(0.5);
    let g = net.gradient(&z, label);
    let h = 1e-5;
    let mut worst = 0.0f64;
    for i in 0..p.len() {
        let mut q = p.clone();
        q[i] = p[i] + h;
        net.set_parameters(&q);
        let up = net.loss(&z, label);
        q[i] = p[i] - h;
        net.set_parameters(&q);
        let down = net.loss(&z, label);
        let fd = (up - down) / (2.0 * h);
        let scale = g[i].abs().max(fd.abs()).max(1e-8);
        worst = worst.max((g[i] - fd).abs() / scale);
    }
    net.set_parameters(&p);
    worst
}

fn learner_correctness(p: &Pipeline) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let grad = (0..20).map(|_| gradient_error(&mut rng)).fold(0.0, f64::max);

    let data = p.matrix.task_dataset(Task::Fraud).unwrap();
    let mut identities = true;
    let mut deterministic = true;
    for kind in LearnerKind::ALL {
        let hp = Hyperparameters::defaults(kind);
        let a = cross_validate(&data, &hp, 5, 3).unwrap();
        let b = cross_validate(&data, &hp, 5, 3).unwrap();
        identities &= a.check_identities().is_ok() && EvalReport::from_json(&a.to_json()).is_ok();
        deterministic &= a.to_json() == b.to_json();
        deterministic &= train(&data, &hp, 4).unwrap().to_json() == train(&data, &hp, 4).unwrap().to_json();
    }
    let mut config = GenConfig::default();
    config.seed = 17;
    deterministic &= export_texts(&generate(&config).unwrap().store) == export_texts(&generate(&config).unwrap().store);
    outcome(
        grad <= 1e-4 && identities && deterministic,
        format!("gradient rel err {grad:.1e}, identities {identities}, deterministic {deterministic}"),
    )
}

fn brute_ramps(history: &[BTreeSet<String>], dangerous: &[String]) -> (usize, usize) {
    let (mut ramps, mut added) = (0, 0);
    for t in 1..history.len() {
        let before: Vec<&String> = dangerous.iter().filter(|p| history[t - 1].contains(*p)).collect();
        let after: Vec<&String> = dangerous.iter().filter(|p| history[t].contains(*p)).collect();
        if after.len() > before.len() {
            ramps += 1;
            added += after.iter().filter(|p| !before.contains(p)).count();
        }
    }
    (ramps, added)
}

fn ramp_analysis_oracle() -> Outcome {
    let catalog = PermissionCatalog::bundled();
    let dangerous: Vec<String> = catalog.dangerous.iter().cloned().collect();
    let normal: Vec<String> = catalog.all.difference(&catalog.dangerous).cloned().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut mismatches = 0;
    let mut total_ramps = 0;
    for _ in 0..50 {
        let len = rng.gen_range(2..=8);
        let mut current: BTreeSet<String> = (0..3).map(|_| normal[rng.gen_range(0..normal.len())].clone()).collect();
        let mut history = vec![current.clone()];
        for _ in 1..len {
            for _ in 0..rng.gen_range(0..=3) {
                current.insert(dangerous[rng.gen_range(0..dangerous.len())].clone());
            }
            if rng.gen_bool(0.3) {
                let held: Vec<String> = current.iter().filter(|p| catalog.is_dangerous(p)).cloned().collect();
                if let Some(p) = held.first() {
                    current.remove(p);
                }
            }
            if rng.gen_bool(0.3) {
                current.insert(normal[rng.gen_range(0..normal.len())].clone());
            }
            history.push(current.clone());
        }
        let snapshots: Vec<AppSnapshot> = history
            .iter()
            .enumerate()
            .map(|(i, perms)| AppSnapshot {
                app_id: "app".into(),
                capture_date: day(10 * i as u32),
                rating_count: 0,
                install_bucket: Bucket(0, 1),
                review_count: 0,
                aggregate_rating: None,
                permissions: perms.clone(),
                version_tag: i.to_string(),
            })
            .collect();
        let r = ramp_analysis(&snapshots, &catalog, RampMode::Count).unwrap();
        let want = brute_ramps(&history, &dangerous);
        total_ramps += want.0;
        if (r.ramp_count, r.danger_added_total) != want {
            mismatches += 1;
        }
    }
    outcome(
        mismatches == 0,
        format!("{mismatches} mismatches on 50 histories ({total_ramps} ramps)"),
    )
}

fn main() -> ExitCode {
    let mut results: Vec<(&str, Outcome)> = vec![
        ("1 density oracle", density_oracle()),
        ("2 pcf soundness", pcf_soundness()),
        ("3 two-day split", two_day_split()),
        ("4 planted recovery", planted_recovery()),
        ("5 spike fence oracle", spike_oracle()),
        ("6 chi-square oracle", chi_square_oracle()),
    ];
    let started = Instant::now();
    let p = pipeline(0);
    results.push(("7 end-to-end classification", classification(&p, started)));
    results.push(("8 malware transfer", transfer(&p)));
    results.push(("9 learner correctness", learner_correctness(&p)));
    results.push(("10 ramp analysis", ramp_analysis_oracle()));

    let mut failed = 0;
    for (name, o) in &results {
        println!(
            "criterion {name}: {} ({})",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
        failed += !o.pass as usize;
    }
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
