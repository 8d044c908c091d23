//! Regularized maximum-likelihood estimation.
//!
//! The training objective is
//!
//! ```text
//! F(θ) = Σ_g ℓ_g(θ) + λ‖θ‖² + λ_L Σ_{i≥2} ‖θ_i − θ_{i−1}‖²
//! ```
//!
//! where each group g is normalized by its own number of likelihood terms.
//! Unstratified models have one group per component (length, ranking) and
//! every record contributes once, so F is the mean NLL plus the penalties.
//! C-LD splits the ranking terms into K length strata; A-S splits choice
//! events into K position strata. Each stratum is then averaged
//! separately, and the Laplacian term couples adjacent banks.

mod adam;
mod cv;

use std::collections::BTreeMap;
use std::ops::Range;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use adam::Adam;
pub use cv::{cross_validate, grid_search, kfold_indices, kfold_split, GridRow, GridSearchResult};

use crate::error::{Error, Result};
use crate::model::{Model, ModelKind};
use crate::order::{Dataset, PartialOrder};
use crate::params::ParamBlock;
use crate::ranking::stratum_of;

/// How the ℓ2 strength λ enters the fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum L2Mode {
    /// λ‖θ‖² is part of the reported objective.
    #[default]
    Objective,
    /// λθ is added to the gradient only, like coupled optimizer weight
    /// decay; the reported objective excludes it.
    WeightDecay,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub lambda_l2: f64,
    pub lambda_laplacian: f64,
    /// Number of strata K for C-LD and A-S.
    pub strata: usize,
    pub max_epochs: usize,
    /// Stop when consecutive epoch objectives differ by less than this.
    pub tol: f64,
    /// `None` is full-batch.
    pub batch_size: Option<usize>,
    pub seed: u64,
    /// Use covariate-linear item utilities when the data carries
    /// covariates. Always on for C-CI.
    pub use_covariates: bool,
    pub l2_mode: L2Mode,
    pub workers: usize,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.001,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            lambda_l2: 1e-5,
            lambda_laplacian: 0.0,
            strata: 1,
            max_epochs: 2000,
            tol: 1e-4,
            batch_size: None,
            seed: 0,
            use_covariates: false,
            l2_mode: L2Mode::Objective,
            workers: 1,
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("learning rate", self.learning_rate),
            ("epsilon", self.epsilon),
            ("tol", self.tol),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        for (name, v) in [("beta1", self.beta1), ("beta2", self.beta2)] {
            if !(0.0..1.0).contains(&v) {
                return Err(Error::Config(format!("{name} must lie in [0, 1), got {v}")));
            }
        }
        for (name, v) in [
            ("lambda", self.lambda_l2),
            ("lambda_laplacian", self.lambda_laplacian),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::Config(format!(
                    "{name} must be non-negative, got {v}"
                )));
            }
        }
        if self.strata == 0 {
            return Err(Error::Config("K must be ≥ 1".into()));
        }
        if self.max_epochs == 0 {
            return Err(Error::Config("max_epochs must be ≥ 1".into()));
        }
        if self.batch_size == Some(0) {
            return Err(Error::Config("batch size must be ≥ 1".into()));
        }
        if self.workers == 0 {
            return Err(Error::Config("workers must be ≥ 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochStat {
    pub epoch: usize,
    pub objective: f64,
    pub grad_norm: f64,
}

#[derive(Debug, Clone)]
pub struct FitResult {
    pub model: Model,
    pub trace: Vec<EpochStat>,
    pub converged: bool,
    pub epochs_run: usize,
    /// Objective at the returned parameters (full data).
    pub objective: f64,
}

impl FitResult {
    /// One line per epoch: `epoch,objective,grad_norm`.
    pub fn trace_csv(&self) -> String {
        let mut out = String::from("epoch,objective,grad_norm\n");
        for s in &self.trace {
            out.push_str(&format!(
                "{},{:.16e},{:.16e}\n",
                s.epoch, s.objective, s.grad_norm
            ));
        }
        out
    }
}

/// Mean negative log-likelihood of the records in `data`.
///
/// A zero-probability record is an error naming its index.
pub fn nll(data: &Dataset, model: &Model) -> Result<f64> {
    let mut total = 0.0;
    for (i, q) in data.orders().iter().enumerate() {
        let lp = model.log_prob(q, agent_for(data, model, i))?;
        if !lp.is_finite() {
            return Err(Error::ImpossibleRecord { index: i });
        }
        total -= lp;
    }
    Ok(total / data.len() as f64)
}

pub(crate) fn agent_for<'a>(
    data: &'a Dataset,
    model: &Model,
    i: usize,
) -> Option<crate::AgentCovariates<'a>> {
    // the Poisson length of C-CI and any covariate-linear utilities read
    // agent features; other models ignore them
    if model.uses_covariates() || model.kind().requires_covariates() {
        data.agent(i)
    } else {
        None
    }
}

/// λ Σ θ_i².
pub fn l2_penalty(params: &[f64], lambda: f64) -> f64 {
    lambda * params.iter().map(|x| x * x).sum::<f64>()
}

/// λ_L Σ_{i=2..K} ‖θ_i − θ_{i−1}‖² over a path of banks.
pub fn laplacian_penalty<B: AsRef<[f64]>>(banks: &[B], lambda: f64) -> Result<f64> {
    let Some(first) = banks.first() else {
        return Ok(0.0);
    };
    let len = first.as_ref().len();
    if banks.iter().any(|b| b.as_ref().len() != len) {
        return Err(Error::Shape(
            "Laplacian banks must have equal length".into(),
        ));
    }
    Ok(lambda
        * banks
            .windows(2)
            .map(|w| {
                w[1].as_ref()
                    .iter()
                    .zip(w[0].as_ref())
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
            })
            .sum::<f64>())
}

fn laplacian_grad(flat: &[f64], ranges: &[Range<usize>], lambda: f64, grad: &mut [f64]) {
    for w in ranges.windows(2) {
        let (prev, cur) = (&w[0], &w[1]);
        for (a, b) in cur.clone().zip(prev.clone()) {
            let diff = 2.0 * lambda * (flat[a] - flat[b]);
            grad[a] += diff;
            grad[b] -= diff;
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StratifyMode {
    ByLength,
    ByRank,
}

/// One sequential choice inside a partial order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChoiceEvent {
    pub record: usize,
    /// 1-based position of the choice.
    pub position: usize,
    /// Chosen item, or `None` for END.
    pub chosen: Option<usize>,
    /// Alternatives still available (items only; END is always available).
    pub available: Vec<usize>,
}

#[derive(Debug, Clone)]
pub enum Strata {
    ByLength(Vec<Dataset>),
    ByRank(Vec<Vec<ChoiceEvent>>),
}

/// Splits `data` into K strata: by list length (lengths ≥ K pooled in the
/// last) or by choice position (positions ≥ K pooled in the last).
pub fn stratify_dataset(data: &Dataset, strata: usize, mode: StratifyMode) -> Result<Strata> {
    if strata == 0 {
        return Err(Error::Config("K must be ≥ 1".into()));
    }
    Ok(match mode {
        StratifyMode::ByLength => {
            let mut rows = vec![Vec::new(); strata];
            for (i, q) in data.orders().iter().enumerate() {
                rows[stratum_of(q.len(), strata) - 1].push(i);
            }
            Strata::ByLength(rows.iter().map(|r| data.select(r)).collect())
        }
        StratifyMode::ByRank => {
            let m = data.m();
            let mut events = vec![Vec::new(); strata];
            for (i, q) in data.orders().iter().enumerate() {
                let mut available: Vec<usize> = (1..=m).collect();
                let positions = if q.len() < m { q.len() + 1 } else { q.len() };
                for pos in 1..=positions {
                    let chosen = q.items().get(pos - 1).copied();
                    events[stratum_of(pos, strata) - 1].push(ChoiceEvent {
                        record: i,
                        position: pos,
                        chosen,
                        available: available.clone(),
                    });
                    if let Some(c) = chosen {
                        available.retain(|a| *a != c);
                    }
                }
            }
            Strata::ByRank(events)
        }
    })
}

/// A training record, possibly standing for several identical records.
#[derive(Debug, Clone, Copy)]
struct Entry {
    record: usize,
    agent: Option<usize>,
    weight: f64,
}

fn entries_for(data: &Dataset, model: &Model, aggregate: bool) -> Vec<Entry> {
    let per_agent = model.uses_covariates() || model.kind().requires_covariates();
    if per_agent || !aggregate {
        return (0..data.len())
            .map(|i| Entry {
                record: i,
                agent: per_agent.then_some(i),
                weight: 1.0,
            })
            .collect();
    }
    let mut groups: BTreeMap<&PartialOrder, (usize, usize)> = BTreeMap::new();
    for (i, q) in data.orders().iter().enumerate() {
        groups.entry(q).or_insert((i, 0)).1 += 1;
    }
    groups
        .into_values()
        .map(|(record, count)| Entry {
            record,
            agent: None,
            weight: count as f64,
        })
        .collect()
}

/// Evaluates F and ∇F for one batch of entries.
struct Evaluation {
    objective: f64,
    grad: Vec<f64>,
}

fn evaluate(
    model: &Model,
    data: &Dataset,
    entries: &[Entry],
    cfg: &FitConfig,
) -> Result<Evaluation> {
    let mut counts = vec![0.0; model.n_groups()];
    for e in entries {
        model.count_terms(&data.orders()[e.record], &mut counts, e.weight);
    }
    let inv: Vec<f64> = counts
        .iter()
        .map(|c| if *c > 0.0 { 1.0 / c } else { 0.0 })
        .collect();

    let workers = cfg.workers.max(1).min(entries.len().max(1));
    let chunk = entries.len().div_ceil(workers).max(1);
    let partial = |block: &[Entry]| -> Result<(f64, Vec<f64>)> {
        let mut grad = model.zeroed();
        let mut ll = 0.0;
        let mut scales = vec![0.0; inv.len()];
        for e in block {
            for (s, i) in scales.iter_mut().zip(&inv) {
                *s = i * e.weight;
            }
            let agent = e.agent.and_then(|a| data.agent(a));
            let v = model.score(&data.orders()[e.record], agent, &scales, Some(&mut grad))?;
            if !v.is_finite() {
                return Err(Error::ImpossibleRecord { index: e.record });
            }
            ll += v;
        }
        Ok((ll, grad.to_flat()))
    };
    let blocks: Vec<Result<(f64, Vec<f64>)>> = if workers <= 1 {
        vec![partial(entries)]
    } else {
        std::thread::scope(|s| {
            let handles: Vec<_> = entries
                .chunks(chunk)
                .map(|b| s.spawn(move || partial(b)))
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("gradient worker panicked"))
                .collect()
        })
    };

    let flat = model.to_flat();
    let mut grad = vec![0.0; flat.len()];
    let mut ll = 0.0;
    for b in blocks {
        let (v, g) = b?;
        ll += v;
        for (acc, x) in grad.iter_mut().zip(&g) {
            *acc -= x;
        }
    }
    let mut objective = -ll;
    match cfg.l2_mode {
        L2Mode::Objective => {
            objective += l2_penalty(&flat, cfg.lambda_l2);
            for (g, x) in grad.iter_mut().zip(&flat) {
                *g += 2.0 * cfg.lambda_l2 * x;
            }
        }
        L2Mode::WeightDecay => {
            for (g, x) in grad.iter_mut().zip(&flat) {
                *g += cfg.lambda_l2 * x;
            }
        }
    }
    let ranges = model.bank_ranges();
    if ranges.len() > 1 && cfg.lambda_laplacian > 0.0 {
        let banks: Vec<&[f64]> = ranges.iter().map(|r| &flat[r.clone()]).collect();
        objective += laplacian_penalty(&banks, cfg.lambda_laplacian)?;
        laplacian_grad(&flat, &ranges, cfg.lambda_laplacian, &mut grad);
    }
    Ok(Evaluation { objective, grad })
}

/// Training objective F and its gradient over the full dataset.
pub fn objective_and_gradient(
    model: &Model,
    data: &Dataset,
    cfg: &FitConfig,
) -> Result<(f64, Vec<f64>)> {
    check_compatible(model, data)?;
    let e = evaluate(model, data, &entries_for(data, model, true), cfg)?;
    Ok((e.objective, e.grad))
}

pub fn objective(model: &Model, data: &Dataset, cfg: &FitConfig) -> Result<f64> {
    objective_and_gradient(model, data, cfg).map(|(f, _)| f)
}

fn check_compatible(model: &Model, data: &Dataset) -> Result<()> {
    if model.m() != data.m() {
        return Err(Error::Shape(format!(
            "model has m={}, data has m={}",
            model.m(),
            data.m()
        )));
    }
    if (model.uses_covariates() || model.kind().requires_covariates())
        && data.covariates().is_none()
    {
        return Err(Error::MissingCovariates(format!(
            "{} model needs dataset covariates",
            model.kind()
        )));
    }
    if data.is_empty() {
        return Err(Error::Config("cannot fit an empty dataset".into()));
    }
    Ok(())
}

/// Zero-initialized model of `kind` shaped for `data` and `cfg`.
pub fn initial_model(kind: ModelKind, data: &Dataset, cfg: &FitConfig) -> Result<Model> {
    let d = if kind.requires_covariates() || cfg.use_covariates {
        Some(
            data.covariates()
                .ok_or_else(|| {
                    Error::MissingCovariates(format!(
                        "{kind} fit requested covariates but the dataset has none"
                    ))
                })?
                .d(),
        )
    } else {
        None
    };
    let strata = if kind.is_stratified() { cfg.strata } else { 1 };
    Model::zeros(kind, data.m(), d, strata)
}

/// Fits a zero-initialized model of `kind` to `data`.
pub fn fit(kind: ModelKind, data: &Dataset, cfg: &FitConfig) -> Result<FitResult> {
    cfg.validate()?;
    fit_from(initial_model(kind, data, cfg)?, data, cfg)
}

/// Runs the optimizer from the given starting parameters.
pub fn fit_from(mut model: Model, data: &Dataset, cfg: &FitConfig) -> Result<FitResult> {
    cfg.validate()?;
    check_compatible(&model, data)?;
    let mut params = model.to_flat();
    let mut adam = Adam::new(
        params.len(),
        cfg.learning_rate,
        cfg.beta1,
        cfg.beta2,
        cfg.epsilon,
    );
    let full = entries_for(data, &model, true);
    let mut records = entries_for(data, &model, false);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut trace: Vec<EpochStat> = Vec::new();
    let mut converged = false;

    for epoch in 1..=cfg.max_epochs {
        let (objective, grad_norm) = match cfg.batch_size {
            Some(b) if b < data.len() => {
                records.shuffle(&mut rng);
                let mut obj_sum = 0.0;
                let mut norm_sum = 0.0;
                let mut batches = 0usize;
                for batch in records.chunks(b) {
                    let e = evaluate(&model, data, batch, cfg)?;
                    obj_sum += e.objective;
                    norm_sum += norm(&e.grad);
                    batches += 1;
                    adam.step(&mut params, &e.grad);
                    model.read_flat(&params);
                }
                (obj_sum / batches as f64, norm_sum / batches as f64)
            }
            _ => {
                let e = evaluate(&model, data, &full, cfg)?;
                adam.step(&mut params, &e.grad);
                model.read_flat(&params);
                (e.objective, norm(&e.grad))
            }
        };
        trace.push(EpochStat {
            epoch,
            objective,
            grad_norm,
        });
        if !objective.is_finite() || params.iter().any(|p| !p.is_finite()) {
            return Err(Error::Diverged {
                epoch,
                trace: trace.iter().map(|s| s.objective).collect(),
            });
        }
        if let [.., prev, last] = trace.as_slice() {
            if (last.objective - prev.objective).abs() < cfg.tol {
                converged = true;
                break;
            }
        }
    }

    let final_objective = evaluate(&model, data, &full, cfg)?.objective;
    if !final_objective.is_finite() {
        return Err(Error::Diverged {
            epoch: trace.len(),
            trace: trace.iter().map(|s| s.objective).collect(),
        });
    }
    Ok(FitResult {
        model,
        epochs_run: trace.len(),
        trace,
        converged,
        objective: final_objective,
    })
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}
