use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{derive_seeds, Dataset, Hyperparameters, Learner};
use crate::error::{Error, Result};
use crate::format::{document_body, header_line};

pub const REPORT_KIND: &str = "eval-report";

/// Binary confusion matrix; positive is the fraud/malware class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

fn pct(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        100.0 * num as f64 / den as f64
    }
}

impl Confusion {
    pub fn record(&mut self, actual: bool, predicted: bool) {
        match (actual, predicted) {
            (true, true) => self.tp += 1,
            (false, true) => self.fp += 1,
            (false, false) => self.tn += 1,
            (true, false) => self.fn_ += 1,
        }
    }

    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }

    /// FP / (FP + TN), in percent; 0 when there are no negatives.
    pub fn fpr(&self) -> f64 {
        pct(self.fp, self.fp + self.tn)
    }

    /// FN / (FN + TP), in percent; 0 when there are no positives.
    pub fn fnr(&self) -> f64 {
        pct(self.fn_, self.fn_ + self.tp)
    }

    pub fn accuracy(&self) -> f64 {
        pct(self.tp + self.tn, self.total())
    }

    fn add(&mut self, o: &Confusion) {
        self.tp += o.tp;
        self.fp += o.fp;
        self.tn += o.tn;
        self.fn_ += o.fn_;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldOutcome {
    pub id: String,
    pub fold: usize,
    pub actual: bool,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub learner: String,
    pub k: usize,
    pub seed: u64,
    pub folds: Vec<Confusion>,
    pub total: Confusion,
    pub fpr: f64,
    pub fnr: f64,
    pub accuracy: f64,
    /// One entry per instance in dataset order.
    pub outcomes: Vec<FoldOutcome>,
}

impl EvalReport {
    /// Recompute every derived number from the matrices.
    pub fn check_identities(&self) -> Result<()> {
        let mut sum = Confusion::default();
        for f in &self.folds {
            sum.add(f);
        }
        let mut problems = Vec::new();
        if sum != self.total {
            problems.push(format!("fold matrices sum to {sum:?}, total is {:?}", self.total));
        }
        if self.total.total() != self.outcomes.len() as u64 {
            problems.push("total does not match the number of instances".into());
        }
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-9;
        if !close(self.fpr, self.total.fpr())
            || !close(self.fnr, self.total.fnr())
            || !close(self.accuracy, self.total.accuracy())
        {
            problems.push("rates disagree with the confusion matrix".into());
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(problems))
        }
    }

    /// Table with the learner's FPR, FNR and accuracy in percent.
    pub fn render_table(reports: &[&EvalReport]) -> String {
        let mut s = String::from("Strategy  FPR %   FNR %   Accuracy %\n");
        for r in reports {
            let _ = writeln!(
                s,
                "{:<8}  {:>6.2}  {:>6.2}  {:>10.2}",
                r.learner, r.fpr, r.fnr, r.accuracy
            );
        }
        s
    }

    pub fn to_json(&self) -> String {
        let mut s = header_line(REPORT_KIND);
        s.push('\n');
        s.push_str(&serde_json::to_string_pretty(self).expect("report serializes"));
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(document_body(text, REPORT_KIND)?).map_err(|e| Error::parse("eval report", e.to_string()))
    }
}

/// Fold index of every instance. Each class is shuffled separately and dealt
/// round-robin, so fold class counts differ by at most one.
pub fn stratified_folds(labels: &[bool], k: usize, seed: u64) -> Result<Vec<usize>> {
    if k < 2 {
        return Err(Error::Config(format!("need at least 2 folds, got {k}")));
    }
    if k > labels.len() {
        return Err(Error::Config(format!(
            "{k} folds requested for {} instances",
            labels.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pos: Vec<usize> = (0..labels.len()).filter(|&i| labels[i]).collect();
    let mut neg: Vec<usize> = (0..labels.len()).filter(|&i| !labels[i]).collect();
    pos.shuffle(&mut rng);
    neg.shuffle(&mut rng);
    let mut fold = vec![0; labels.len()];
    for (j, &i) in pos.iter().chain(&neg).enumerate() {
        fold[i] = j % k;
    }
    Ok(fold)
}

/// k-fold cross-validation of any learner.
pub fn cross_validate_with(data: &Dataset, learner: &dyn Learner, k: usize, seed: u64) -> Result<EvalReport> {
    let fold_of = stratified_folds(&data.labels, k, seed)?;
    let fold_seeds = derive_seeds(seed, 0xCF, k);
    let per_fold: Vec<Result<(Confusion, Vec<(usize, f64)>)>> = (0..k)
        .into_par_iter()
        .map(|f| {
            let train_idx: Vec<usize> = (0..data.len()).filter(|&i| fold_of[i] != f).collect();
            let test_idx: Vec<usize> = (0..data.len()).filter(|&i| fold_of[i] == f).collect();
            let model = learner.fit(&data.subset(&train_idx), fold_seeds[f])?;
            let mut m = Confusion::default();
            let mut scores = Vec::with_capacity(test_idx.len());
            for &i in &test_idx {
                let s = model.score(&data.rows[i]);
                m.record(data.labels[i], s > 0.5);
                scores.push((i, s));
            }
            Ok((m, scores))
        })
        .collect();

    let mut folds = Vec::with_capacity(k);
    let mut total = Confusion::default();
    let mut outcomes: Vec<Option<FoldOutcome>> = vec![None; data.len()];
    for (f, r) in per_fold.into_iter().enumerate() {
        let (m, scores) = r?;
        total.add(&m);
        folds.push(m);
        for (i, score) in scores {
            outcomes[i] = Some(FoldOutcome {
                id: data.ids[i].clone(),
                fold: f,
                actual: data.labels[i],
                score,
            });
        }
    }
    Ok(EvalReport {
        learner: learner.name(),
        k,
        seed,
        fpr: total.fpr(),
        fnr: total.fnr(),
        accuracy: total.accuracy(),
        folds,
        total,
        outcomes: outcomes
            .into_iter()
            .map(|o| o.expect("every instance tested"))
            .collect(),
    })
}

pub fn cross_validate(data: &Dataset, params: &Hyperparameters, k: usize, seed: u64) -> Result<EvalReport> {
    cross_validate_with(data, params, k, seed)
}
