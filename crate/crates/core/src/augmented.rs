//! Augmented models: PL over the items plus an END alternative.
//!
//! A list is built by sequential choices from the remaining items and END;
//! choosing END stops the list. When every item has been ranked END is the
//! only remaining alternative, so the terminal factor is 1. The empty list
//! (END chosen first) has positive probability.

use rand::Rng;

use crate::error::{Error, Result};
use crate::math::{choice_step, dot, draw_choice, Pick};
use crate::order::{AgentCovariates, PartialOrder};
use crate::params::{check_finite, ParamBlock};
use crate::ranking::{covariates_for, stratum_of};

/// θ ∈ R^{m+1}; the last entry is the END utility.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedNaiveParams {
    pub theta: Vec<f64>,
    pub beta: Option<Vec<f64>>,
}

/// Item utilities θ ∈ R^m and END utilities γ_1..γ_m by position.
#[derive(Debug, Clone, PartialEq)]
pub struct PositionDependentParams {
    pub theta: Vec<f64>,
    pub gamma: Vec<f64>,
    pub beta: Option<Vec<f64>>,
}

/// K banks over the m+1 augmented alternatives; position j uses bank
/// min(j, K). Covariate weights are shared across banks.
#[derive(Debug, Clone, PartialEq)]
pub struct StratifiedAugmentedParams {
    pub banks: Vec<Vec<f64>>,
    pub beta: Option<Vec<f64>>,
}

fn check_beta(beta: &Option<Vec<f64>>) -> Result<()> {
    if let Some(b) = beta {
        if b.is_empty() {
            return Err(Error::Shape("beta must have d ≥ 1 entries".into()));
        }
        check_finite("beta", b)?;
    }
    Ok(())
}

impl AugmentedNaiveParams {
    pub fn new(theta: Vec<f64>, beta: Option<Vec<f64>>) -> Result<Self> {
        if theta.len() < 2 {
            return Err(Error::Shape("augmented θ needs m+1 ≥ 2 entries".into()));
        }
        check_finite("theta", &theta)?;
        check_beta(&beta)?;
        Ok(Self { theta, beta })
    }

    pub fn zeros(m: usize, d: Option<usize>) -> Self {
        Self {
            theta: vec![0.0; m + 1],
            beta: d.map(|d| vec![0.0; d]),
        }
    }

    pub fn m(&self) -> usize {
        self.theta.len() - 1
    }
}

impl PositionDependentParams {
    pub fn new(theta: Vec<f64>, gamma: Vec<f64>, beta: Option<Vec<f64>>) -> Result<Self> {
        if theta.is_empty() || gamma.len() != theta.len() {
            return Err(Error::Shape(format!(
                "A-PD needs θ and γ of equal length m ≥ 1, got {} and {}",
                theta.len(),
                gamma.len()
            )));
        }
        check_finite("theta", &theta)?;
        check_finite("gamma", &gamma)?;
        check_beta(&beta)?;
        Ok(Self { theta, gamma, beta })
    }

    pub fn zeros(m: usize, d: Option<usize>) -> Self {
        Self {
            theta: vec![0.0; m],
            gamma: vec![0.0; m],
            beta: d.map(|d| vec![0.0; d]),
        }
    }

    pub fn m(&self) -> usize {
        self.theta.len()
    }
}

impl StratifiedAugmentedParams {
    pub fn new(banks: Vec<Vec<f64>>, beta: Option<Vec<f64>>) -> Result<Self> {
        let first = banks
            .first()
            .ok_or_else(|| Error::Config("stratified model needs K ≥ 1 banks".into()))?;
        if first.len() < 2 || banks.iter().any(|b| b.len() != first.len()) {
            return Err(Error::Shape("all banks must have m+1 ≥ 2 entries".into()));
        }
        for b in &banks {
            check_finite("bank", b)?;
        }
        check_beta(&beta)?;
        Ok(Self { banks, beta })
    }

    pub fn zeros(m: usize, d: Option<usize>, strata: usize) -> Self {
        Self {
            banks: vec![vec![0.0; m + 1]; strata.max(1)],
            beta: d.map(|d| vec![0.0; d]),
        }
    }

    pub fn m(&self) -> usize {
        self.banks[0].len() - 1
    }

    pub fn strata(&self) -> usize {
        self.banks.len()
    }
}

impl ParamBlock for AugmentedNaiveParams {
    fn n_params(&self) -> usize {
        self.theta.len() + self.beta.n_params()
    }
    fn write_flat(&self, out: &mut Vec<f64>) {
        self.theta.write_flat(out);
        self.beta.write_flat(out);
    }
    fn read_flat(&mut self, src: &[f64]) -> usize {
        let n = self.theta.read_flat(src);
        n + self.beta.read_flat(&src[n..])
    }
}

impl ParamBlock for PositionDependentParams {
    fn n_params(&self) -> usize {
        self.theta.len() + self.gamma.len() + self.beta.n_params()
    }
    fn write_flat(&self, out: &mut Vec<f64>) {
        self.theta.write_flat(out);
        self.gamma.write_flat(out);
        self.beta.write_flat(out);
    }
    fn read_flat(&mut self, src: &[f64]) -> usize {
        let mut n = self.theta.read_flat(src);
        n += self.gamma.read_flat(&src[n..]);
        n + self.beta.read_flat(&src[n..])
    }
}

impl ParamBlock for StratifiedAugmentedParams {
    fn n_params(&self) -> usize {
        self.banks.iter().map(Vec::len).sum::<usize>() + self.beta.n_params()
    }
    fn write_flat(&self, out: &mut Vec<f64>) {
        crate::params::write_all(&self.banks, out);
        self.beta.write_flat(out);
    }
    fn read_flat(&mut self, src: &[f64]) -> usize {
        let n = crate::params::read_all(&mut self.banks, src);
        n + self.beta.read_flat(&src[n..])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum AugmentedModel {
    Naive(AugmentedNaiveParams),
    PositionDependent(PositionDependentParams),
    Stratified(StratifiedAugmentedParams),
}

/// Options for the augmented sampler.
#[derive(Debug, Clone, Copy, Default)]
pub struct SampleOptions {
    /// Redraw whenever END is chosen first. The result is then a sample
    /// from the model conditioned on a non-empty list.
    pub no_empty: bool,
}

const MAX_EMPTY_REDRAWS: usize = 1_000_000;

impl AugmentedModel {
    pub fn m(&self) -> usize {
        match self {
            Self::Naive(p) => p.m(),
            Self::PositionDependent(p) => p.m(),
            Self::Stratified(p) => p.m(),
        }
    }

    fn beta(&self) -> Option<&[f64]> {
        match self {
            Self::Naive(p) => p.beta.as_deref(),
            Self::PositionDependent(p) => p.beta.as_deref(),
            Self::Stratified(p) => p.beta.as_deref(),
        }
    }

    fn beta_mut(&mut self) -> Option<&mut Vec<f64>> {
        match self {
            Self::Naive(p) => p.beta.as_mut(),
            Self::PositionDependent(p) => p.beta.as_mut(),
            Self::Stratified(p) => p.beta.as_mut(),
        }
    }

    pub fn strata(&self) -> usize {
        match self {
            Self::Stratified(p) => p.strata(),
            _ => 1,
        }
    }

    /// β·x_ij per item, or zeros without covariate weights.
    fn covariate_terms(&self, agent: Option<AgentCovariates<'_>>) -> Result<Vec<f64>> {
        let m = self.m();
        match self.beta() {
            None => Ok(vec![0.0; m]),
            Some(beta) => {
                let x = covariates_for(beta, agent)?;
                Ok((0..m).map(|j| dot(beta, x.item(j))).collect())
            }
        }
    }

    /// Item utilities (without covariate terms) and END utility at the
    /// 1-based choice position `pos`.
    fn position_utilities(&self, pos: usize) -> (&[f64], f64) {
        match self {
            Self::Naive(p) => {
                let m = p.m();
                (&p.theta[..m], p.theta[m])
            }
            Self::PositionDependent(p) => (&p.theta, p.gamma[pos - 1]),
            Self::Stratified(p) => {
                let bank = &p.banks[stratum_of(pos, p.strata()) - 1];
                let m = p.m();
                (&bank[..m], bank[m])
            }
        }
    }

    fn add_position_grad(&mut self, pos: usize, target: Option<usize>, coef: f64) {
        match self {
            Self::Naive(p) => {
                let m = p.m();
                p.theta[target.unwrap_or(m)] += coef;
            }
            Self::PositionDependent(p) => match target {
                Some(j) => p.theta[j] += coef,
                None => p.gamma[pos - 1] += coef,
            },
            Self::Stratified(p) => {
                let m = p.m();
                let s = stratum_of(pos, p.strata()) - 1;
                p.banks[s][target.unwrap_or(m)] += coef;
            }
        }
    }

    pub(crate) fn n_groups(&self) -> usize {
        match self {
            Self::Stratified(p) => p.strata() + 1,
            _ => 1,
        }
    }

    /// Objective group of the choice made at position `pos`.
    pub(crate) fn position_group(&self, pos: usize) -> usize {
        match self {
            Self::Stratified(p) => stratum_of(pos, p.strata()),
            _ => 0,
        }
    }

    pub fn log_prob(&self, q: &PartialOrder, agent: Option<AgentCovariates<'_>>) -> Result<f64> {
        q.check(self.m())?;
        let ones = vec![1.0; self.n_groups()];
        self.score(q, agent, &ones, None)
    }

    /// Σ over choice events of scales[group] · log P(choice), plus gradients.
    pub(crate) fn score(
        &self,
        q: &PartialOrder,
        agent: Option<AgentCovariates<'_>>,
        scales: &[f64],
        mut grad: Option<&mut AugmentedModel>,
    ) -> Result<f64> {
        let m = self.m();
        let cov = self.covariate_terms(agent)?;
        let mut taken = vec![false; m];
        let mut utilities = vec![0.0; m];
        let mut total = 0.0;
        let k = q.len();
        let positions = if k < m { k + 1 } else { k };
        for pos in 1..=positions {
            let (base, end) = self.position_utilities(pos);
            for ((u, b), c) in utilities.iter_mut().zip(base).zip(&cov) {
                *u = b + c;
            }
            let pick = if pos <= k {
                Pick::Item(q.items()[pos - 1] - 1)
            } else {
                Pick::End
            };
            let scale = scales[self.position_group(pos)];
            let lp = match grad.as_deref_mut() {
                None => choice_step(&utilities, &taken, Some(end), pick, scale, None),
                Some(g) => {
                    let mut sink = |target: Option<usize>, coef: f64| {
                        g.add_position_grad(pos, target, coef);
                        if let (Some(j), Some(x), Some(beta)) = (target, agent, g.beta_mut()) {
                            for (b, xv) in beta.iter_mut().zip(x.item(j)) {
                                *b += coef * xv;
                            }
                        }
                    };
                    choice_step(&utilities, &taken, Some(end), pick, scale, Some(&mut sink))
                }
            };
            total += scale * lp;
            if let Pick::Item(j) = pick {
                taken[j] = true;
            }
        }
        Ok(total)
    }

    /// Sequential draws from the remaining items and END until END is
    /// drawn or all items are ranked.
    pub fn sample<R: Rng + ?Sized>(
        &self,
        agent: Option<AgentCovariates<'_>>,
        opts: SampleOptions,
        rng: &mut R,
    ) -> Result<PartialOrder> {
        let cov = self.covariate_terms(agent)?;
        for _ in 0..MAX_EMPTY_REDRAWS {
            let q = self.sample_once(&cov, rng);
            if !(opts.no_empty && q.is_empty()) {
                return Ok(q);
            }
        }
        Err(Error::NonFinite(
            "model puts (almost) all mass on the empty list; cannot sample non-empty".into(),
        ))
    }

    fn sample_once<R: Rng + ?Sized>(&self, cov: &[f64], rng: &mut R) -> PartialOrder {
        let m = self.m();
        let mut taken = vec![false; m];
        let mut items = Vec::new();
        let mut utilities = vec![0.0; m];
        while items.len() < m {
            let pos = items.len() + 1;
            let (base, end) = self.position_utilities(pos);
            for ((u, b), c) in utilities.iter_mut().zip(base).zip(cov) {
                *u = b + c;
            }
            match draw_choice(&utilities, &taken, Some(end), rng) {
                Pick::End => break,
                Pick::Item(j) => {
                    taken[j] = true;
                    items.push(j + 1);
                }
            }
        }
        PartialOrder::new(items)
    }
}

impl ParamBlock for AugmentedModel {
    fn n_params(&self) -> usize {
        match self {
            Self::Naive(p) => p.n_params(),
            Self::PositionDependent(p) => p.n_params(),
            Self::Stratified(p) => p.n_params(),
        }
    }
    fn write_flat(&self, out: &mut Vec<f64>) {
        match self {
            Self::Naive(p) => p.write_flat(out),
            Self::PositionDependent(p) => p.write_flat(out),
            Self::Stratified(p) => p.write_flat(out),
        }
    }
    fn read_flat(&mut self, src: &[f64]) -> usize {
        match self {
            Self::Naive(p) => p.read_flat(src),
            Self::PositionDependent(p) => p.read_flat(src),
            Self::Stratified(p) => p.read_flat(src),
        }
    }
}

/// Naive augmented model: one fixed END utility.
pub fn a_log_prob(
    q: &PartialOrder,
    params: &AugmentedNaiveParams,
    agent: Option<AgentCovariates<'_>>,
) -> Result<f64> {
    AugmentedModel::Naive(params.clone()).log_prob(q, agent)
}

/// Position-dependent END utilities γ.
pub fn apd_log_prob(
    q: &PartialOrder,
    params: &PositionDependentParams,
    agent: Option<AgentCovariates<'_>>,
) -> Result<f64> {
    AugmentedModel::PositionDependent(params.clone()).log_prob(q, agent)
}

/// Rank-stratified augmented model.
pub fn as_log_prob(
    q: &PartialOrder,
    params: &StratifiedAugmentedParams,
    agent: Option<AgentCovariates<'_>>,
) -> Result<f64> {
    AugmentedModel::Stratified(params.clone()).log_prob(q, agent)
}

pub fn sample_augmented<R: Rng + ?Sized>(
    model: &AugmentedModel,
    agent: Option<AgentCovariates<'_>>,
    opts: SampleOptions,
    rng: &mut R,
) -> Result<PartialOrder> {
    model.sample(agent, opts, rng)
}
