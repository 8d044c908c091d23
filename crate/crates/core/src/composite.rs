//! Composite models: a length distribution times a PL ranking marginal.
//!
//! * C-I: categorical length, one PL bank.
//! * C-CI: covariate-rate Poisson length, covariate-linear PL.
//! * C-LD: categorical length, PL bank chosen by the list length.

use rand::Rng;

use crate::error::{Error, Result};
use crate::length::{CategoricalLengthParams, LengthParams, PoissonLengthParams};
use crate::order::{AgentCovariates, PartialOrder};
use crate::params::ParamBlock;
use crate::ranking::{
    pl_log_marginal_grad, sample_pl_prefix, stratum_of, PLParams, StratifiedPLParams,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompositeVariant {
    Independent,
    ConditionallyIndependent,
    LengthDependent,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RankingParams {
    Single(PLParams),
    Stratified(StratifiedPLParams),
}

impl RankingParams {
    fn bank(&self, k: usize) -> &PLParams {
        match self {
            Self::Single(p) => p,
            Self::Stratified(s) => s.bank_for_length(k),
        }
    }

    fn bank_mut(&mut self, k: usize) -> &mut PLParams {
        match self {
            Self::Single(p) => p,
            Self::Stratified(s) => {
                let idx = stratum_of(k, s.strata()) - 1;
                &mut s.banks[idx]
            }
        }
    }

    fn m(&self) -> usize {
        match self {
            Self::Single(p) => p.m(),
            Self::Stratified(s) => s.m(),
        }
    }
}

impl ParamBlock for RankingParams {
    fn n_params(&self) -> usize {
        match self {
            Self::Single(p) => p.n_params(),
            Self::Stratified(s) => s.n_params(),
        }
    }

    fn write_flat(&self, out: &mut Vec<f64>) {
        match self {
            Self::Single(p) => p.write_flat(out),
            Self::Stratified(s) => s.write_flat(out),
        }
    }

    fn read_flat(&mut self, src: &[f64]) -> usize {
        match self {
            Self::Single(p) => p.read_flat(src),
            Self::Stratified(s) => s.read_flat(src),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompositeModel {
    variant: CompositeVariant,
    pub length: LengthParams,
    pub ranking: RankingParams,
}

impl CompositeModel {
    pub fn independent(length: CategoricalLengthParams, ranking: PLParams) -> Result<Self> {
        Self::assemble(
            CompositeVariant::Independent,
            LengthParams::Categorical(length),
            RankingParams::Single(ranking),
        )
    }

    pub fn conditionally_independent(
        length: PoissonLengthParams,
        ranking: PLParams,
    ) -> Result<Self> {
        if ranking.beta.is_none() {
            return Err(Error::MissingCovariates(
                "C-CI ranking component needs covariate weights".into(),
            ));
        }
        Self::assemble(
            CompositeVariant::ConditionallyIndependent,
            LengthParams::Poisson(length),
            RankingParams::Single(ranking),
        )
    }

    pub fn length_dependent(
        length: CategoricalLengthParams,
        ranking: StratifiedPLParams,
    ) -> Result<Self> {
        Self::assemble(
            CompositeVariant::LengthDependent,
            LengthParams::Categorical(length),
            RankingParams::Stratified(ranking),
        )
    }

    fn assemble(
        variant: CompositeVariant,
        length: LengthParams,
        ranking: RankingParams,
    ) -> Result<Self> {
        if length.m() != ranking.m() {
            return Err(Error::Shape(format!(
                "length model has m={}, ranking model has m={}",
                length.m(),
                ranking.m()
            )));
        }
        Ok(Self {
            variant,
            length,
            ranking,
        })
    }

    pub fn variant(&self) -> CompositeVariant {
        self.variant
    }

    pub fn m(&self) -> usize {
        self.length.m()
    }

    /// log π^k(k_Q) + log π^R(Ext(Q)), with the ranking bank chosen by k_Q
    /// for C-LD.
    ///
    /// A zero-probability length yields −∞ rather than an error.
    pub fn log_prob(&self, q: &PartialOrder, agent: Option<AgentCovariates<'_>>) -> Result<f64> {
        validate(q, self.m())?;
        let k = q.len();
        let len_lp = self.length.log_prob(k, agent)?;
        let rank_lp = crate::ranking::pl_log_marginal(q, self.ranking.bank(k), agent)?;
        Ok(len_lp + rank_lp)
    }

    /// Weighted log-probability with gradients. Length terms carry
    /// `scales[0]`; ranking terms carry `scales[1]` (single bank) or
    /// `scales[stratum]` (C-LD).
    pub(crate) fn score(
        &self,
        q: &PartialOrder,
        agent: Option<AgentCovariates<'_>>,
        scales: &[f64],
        grad: Option<&mut CompositeModel>,
    ) -> Result<f64> {
        let k = q.len();
        let rank_group = self.ranking_group(k);
        match grad {
            None => {
                let len_lp = self.length.log_prob(k, agent)?;
                let rank_lp = crate::ranking::pl_log_marginal(q, self.ranking.bank(k), agent)?;
                Ok(scales[0] * len_lp + scales[rank_group] * rank_lp)
            }
            Some(g) => {
                let len_lp = self
                    .length
                    .log_prob_grad(k, agent, scales[0], &mut g.length)?;
                let rank_lp = pl_log_marginal_grad(
                    q,
                    self.ranking.bank(k),
                    agent,
                    scales[rank_group],
                    g.ranking.bank_mut(k),
                )?;
                Ok(scales[0] * len_lp + scales[rank_group] * rank_lp)
            }
        }
    }

    pub(crate) fn n_groups(&self) -> usize {
        match &self.ranking {
            RankingParams::Single(_) => 2,
            RankingParams::Stratified(s) => s.strata() + 1,
        }
    }

    pub(crate) fn ranking_group(&self, k: usize) -> usize {
        match &self.ranking {
            RankingParams::Single(_) => 1,
            RankingParams::Stratified(s) => stratum_of(k, s.strata()),
        }
    }

    /// Draws a length, then that many sequential PL choices (from the bank
    /// for that length under C-LD).
    pub fn sample<R: Rng + ?Sized>(
        &self,
        agent: Option<AgentCovariates<'_>>,
        rng: &mut R,
    ) -> Result<PartialOrder> {
        let len = self.length.sample(agent, rng)?;
        sample_pl_prefix(self.ranking.bank(len), agent, len, rng)
    }
}

impl ParamBlock for CompositeModel {
    fn n_params(&self) -> usize {
        self.length.n_params() + self.ranking.n_params()
    }

    fn write_flat(&self, out: &mut Vec<f64>) {
        self.length.write_flat(out);
        self.ranking.write_flat(out);
    }

    fn read_flat(&mut self, src: &[f64]) -> usize {
        let n = self.length.read_flat(src);
        n + self.ranking.read_flat(&src[n..])
    }
}

fn validate(q: &PartialOrder, m: usize) -> Result<()> {
    if q.is_empty() {
        return Err(Error::EmptyOrder);
    }
    q.check(m)
}

fn expect_variant(model: &CompositeModel, v: CompositeVariant) -> Result<()> {
    if model.variant != v {
        return Err(Error::Config(format!(
            "expected a {v:?} composite, got {:?}",
            model.variant
        )));
    }
    Ok(())
}

/// C-I: categorical length times PL marginal.
pub fn ci_log_prob(q: &PartialOrder, model: &CompositeModel) -> Result<f64> {
    expect_variant(model, CompositeVariant::Independent)?;
    model.log_prob(q, None)
}

/// C-CI for agent features `agent`.
pub fn cci_log_prob(
    q: &PartialOrder,
    model: &CompositeModel,
    agent: Option<AgentCovariates<'_>>,
) -> Result<f64> {
    expect_variant(model, CompositeVariant::ConditionallyIndependent)?;
    if agent.is_none() {
        return Err(Error::MissingCovariates(
            "C-CI evaluation needs agent covariates".into(),
        ));
    }
    model.log_prob(q, agent)
}

/// C-LD: categorical length times the length-stratified PL marginal.
pub fn cld_log_prob(q: &PartialOrder, model: &CompositeModel) -> Result<f64> {
    expect_variant(model, CompositeVariant::LengthDependent)?;
    model.log_prob(q, None)
}

pub fn sample_composite<R: Rng + ?Sized>(
    model: &CompositeModel,
    agent: Option<AgentCovariates<'_>>,
    rng: &mut R,
) -> Result<PartialOrder> {
    model.sample(agent, rng)
}
