//! The six model families behind one type.

use std::fmt;
use std::ops::Range;
use std::str::FromStr;

use rand::Rng;

use crate::augmented::{
    AugmentedModel, AugmentedNaiveParams, PositionDependentParams, SampleOptions,
    StratifiedAugmentedParams,
};
use crate::composite::{CompositeModel, RankingParams};
use crate::error::{Error, Result};
use crate::length::{CategoricalLengthParams, PoissonLengthParams};
use crate::order::{AgentCovariates, PartialOrder};
use crate::params::ParamBlock;
use crate::ranking::{PLParams, StratifiedPLParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ModelKind {
    /// Composite, independent.
    CI,
    /// Composite, conditionally independent given covariates.
    CCI,
    /// Composite, length-dependent.
    CLD,
    /// Augmented, naive.
    A,
    /// Augmented, position-dependent END.
    APD,
    /// Augmented, rank-stratified.
    AS,
}

impl ModelKind {
    pub const ALL: [ModelKind; 6] = [Self::CI, Self::CCI, Self::CLD, Self::A, Self::APD, Self::AS];

    pub fn tag(self) -> &'static str {
        match self {
            Self::CI => "c-i",
            Self::CCI => "c-ci",
            Self::CLD => "c-ld",
            Self::A => "a",
            Self::APD => "a-pd",
            Self::AS => "a-s",
        }
    }

    pub fn is_augmented(self) -> bool {
        matches!(self, Self::A | Self::APD | Self::AS)
    }

    pub fn is_stratified(self) -> bool {
        matches!(self, Self::CLD | Self::AS)
    }

    pub fn requires_covariates(self) -> bool {
        self == Self::CCI
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.tag().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Config(format!("unknown model type {s:?}")))
    }
}

/// A parameterized model of top-k partial orders.
#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Composite(CompositeModel),
    Augmented(AugmentedModel),
}

impl Model {
    /// All-zero parameters. `d` enables covariate-linear item utilities
    /// (required for C-CI); `strata` is K for the stratified kinds.
    pub fn zeros(kind: ModelKind, m: usize, d: Option<usize>, strata: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::EmptyUniverse);
        }
        if strata == 0 {
            return Err(Error::Config("K must be ≥ 1".into()));
        }
        if d == Some(0) {
            return Err(Error::Shape("d must be ≥ 1".into()));
        }
        Ok(match kind {
            ModelKind::CI => Self::Composite(CompositeModel::independent(
                CategoricalLengthParams::zeros(m),
                PLParams::zeros(m, d),
            )?),
            ModelKind::CCI => {
                let d =
                    d.ok_or_else(|| Error::MissingCovariates("C-CI needs covariates".into()))?;
                Self::Composite(CompositeModel::conditionally_independent(
                    PoissonLengthParams::zeros(m, d),
                    PLParams::zeros(m, Some(d)),
                )?)
            }
            ModelKind::CLD => Self::Composite(CompositeModel::length_dependent(
                CategoricalLengthParams::zeros(m),
                StratifiedPLParams::zeros(m, d, strata),
            )?),
            ModelKind::A => {
                Self::Augmented(AugmentedModel::Naive(AugmentedNaiveParams::zeros(m, d)))
            }
            ModelKind::APD => Self::Augmented(AugmentedModel::PositionDependent(
                PositionDependentParams::zeros(m, d),
            )),
            ModelKind::AS => Self::Augmented(AugmentedModel::Stratified(
                StratifiedAugmentedParams::zeros(m, d, strata),
            )),
        })
    }

    pub fn kind(&self) -> ModelKind {
        use crate::composite::CompositeVariant as V;
        match self {
            Self::Composite(c) => match c.variant() {
                V::Independent => ModelKind::CI,
                V::ConditionallyIndependent => ModelKind::CCI,
                V::LengthDependent => ModelKind::CLD,
            },
            Self::Augmented(AugmentedModel::Naive(_)) => ModelKind::A,
            Self::Augmented(AugmentedModel::PositionDependent(_)) => ModelKind::APD,
            Self::Augmented(AugmentedModel::Stratified(_)) => ModelKind::AS,
        }
    }

    pub fn m(&self) -> usize {
        match self {
            Self::Composite(c) => c.m(),
            Self::Augmented(a) => a.m(),
        }
    }

    /// Covariate dimension of the item utilities, if covariate-linear.
    pub fn covariate_dim(&self) -> Option<usize> {
        match self {
            Self::Composite(c) => match &c.ranking {
                RankingParams::Single(p) => p.d(),
                RankingParams::Stratified(s) => s.d(),
            },
            Self::Augmented(AugmentedModel::Naive(p)) => p.beta.as_ref().map(Vec::len),
            Self::Augmented(AugmentedModel::PositionDependent(p)) => p.beta.as_ref().map(Vec::len),
            Self::Augmented(AugmentedModel::Stratified(p)) => p.beta.as_ref().map(Vec::len),
        }
    }

    pub fn uses_covariates(&self) -> bool {
        self.covariate_dim().is_some()
    }

    pub fn strata(&self) -> usize {
        match self {
            Self::Composite(c) => match &c.ranking {
                RankingParams::Single(_) => 1,
                RankingParams::Stratified(s) => s.strata(),
            },
            Self::Augmented(a) => a.strata(),
        }
    }

    /// Whether the empty list is in the model's support.
    pub fn emits_empty(&self) -> bool {
        matches!(self, Self::Augmented(_))
    }

    /// log π(Q). Composite models reject the empty order; augmented models
    /// accept it.
    pub fn log_prob(&self, q: &PartialOrder, agent: Option<AgentCovariates<'_>>) -> Result<f64> {
        match self {
            Self::Composite(c) => c.log_prob(q, agent),
            Self::Augmented(a) => a.log_prob(q, agent),
        }
    }

    pub fn sample<R: Rng + ?Sized>(
        &self,
        agent: Option<AgentCovariates<'_>>,
        opts: SampleOptions,
        rng: &mut R,
    ) -> Result<PartialOrder> {
        match self {
            Self::Composite(c) => c.sample(agent, rng),
            Self::Augmented(a) => a.sample(agent, opts, rng),
        }
    }

    /// Number of objective groups; each group is normalized by its own
    /// event count in the training objective.
    pub(crate) fn n_groups(&self) -> usize {
        match self {
            Self::Composite(c) => c.n_groups(),
            Self::Augmented(a) => a.n_groups(),
        }
    }

    /// Adds `q`'s normalization units to each group: one per record, or
    /// one per choice event for the position strata of A-S.
    pub(crate) fn count_terms(&self, q: &PartialOrder, counts: &mut [f64], weight: f64) {
        match self {
            Self::Composite(c) => {
                counts[0] += weight;
                counts[c.ranking_group(q.len())] += weight;
            }
            Self::Augmented(a @ AugmentedModel::Stratified(_)) => {
                let m = a.m();
                let positions = if q.len() < m { q.len() + 1 } else { q.len() };
                for pos in 1..=positions {
                    counts[a.position_group(pos)] += weight;
                }
            }
            Self::Augmented(_) => counts[0] += weight,
        }
    }

    pub(crate) fn score(
        &self,
        q: &PartialOrder,
        agent: Option<AgentCovariates<'_>>,
        scales: &[f64],
        grad: Option<&mut Model>,
    ) -> Result<f64> {
        match (self, grad) {
            (Self::Composite(c), None) => c.score(q, agent, scales, None),
            (Self::Augmented(a), None) => a.score(q, agent, scales, None),
            (Self::Composite(c), Some(Self::Composite(g))) => c.score(q, agent, scales, Some(g)),
            (Self::Augmented(a), Some(Self::Augmented(g))) => a.score(q, agent, scales, Some(g)),
            _ => unreachable!("gradient buffer belongs to a different model family"),
        }
    }

    /// Ranges of the flat parameter vector holding each stratum bank, in
    /// stratum order. Empty for unstratified kinds.
    pub fn bank_ranges(&self) -> Vec<Range<usize>> {
        match self {
            Self::Composite(c) => match &c.ranking {
                RankingParams::Stratified(s) => {
                    let mut start = c.length.n_params();
                    s.banks
                        .iter()
                        .map(|b| {
                            let r = start..start + b.n_params();
                            start = r.end;
                            r
                        })
                        .collect()
                }
                RankingParams::Single(_) => Vec::new(),
            },
            Self::Augmented(AugmentedModel::Stratified(p)) => {
                let w = p.m() + 1;
                (0..p.strata()).map(|s| s * w..(s + 1) * w).collect()
            }
            Self::Augmented(_) => Vec::new(),
        }
    }

    pub fn as_composite(&self) -> Option<&CompositeModel> {
        match self {
            Self::Composite(c) => Some(c),
            _ => None,
        }
    }

    pub fn as_augmented(&self) -> Option<&AugmentedModel> {
        match self {
            Self::Augmented(a) => Some(a),
            _ => None,
        }
    }
}

impl ParamBlock for Model {
    fn n_params(&self) -> usize {
        match self {
            Self::Composite(c) => c.n_params(),
            Self::Augmented(a) => a.n_params(),
        }
    }

    fn write_flat(&self, out: &mut Vec<f64>) {
        match self {
            Self::Composite(c) => c.write_flat(out),
            Self::Augmented(a) => a.write_flat(out),
        }
    }

    fn read_flat(&mut self, src: &[f64]) -> usize {
        match self {
            Self::Composite(c) => c.read_flat(src),
            Self::Augmented(a) => a.read_flat(src),
        }
    }
}
