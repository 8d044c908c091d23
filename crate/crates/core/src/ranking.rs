//! Plackett–Luce ranking distributions over total orders, evaluated on
//! top-k orders as marginals over their completions.
//!
//! A top-k order's marginal under PL is the product of its first k
//! sequential choice probabilities, so no completion is ever enumerated.

use rand::Rng;

use crate::error::{Error, Result};
use crate::math::{choice_step, dot, draw_choice, Pick};
use crate::order::{AgentCovariates, PartialOrder};
use crate::params::{check_finite, read_all, write_all, ParamBlock};

/// Item fixed effects δ and, for covariate-linear utilities, weights β.
#[derive(Debug, Clone, PartialEq)]
pub struct PLParams {
    pub delta: Vec<f64>,
    pub beta: Option<Vec<f64>>,
}

impl PLParams {
    pub fn new(delta: Vec<f64>, beta: Option<Vec<f64>>) -> Result<Self> {
        if delta.is_empty() {
            return Err(Error::EmptyUniverse);
        }
        check_finite("delta", &delta)?;
        if let Some(b) = &beta {
            if b.is_empty() {
                return Err(Error::Shape("beta must have d ≥ 1 entries".into()));
            }
            check_finite("beta", b)?;
        }
        Ok(Self { delta, beta })
    }

    pub fn zeros(m: usize, d: Option<usize>) -> Self {
        Self {
            delta: vec![0.0; m],
            beta: d.map(|d| vec![0.0; d]),
        }
    }

    pub fn m(&self) -> usize {
        self.delta.len()
    }

    pub fn d(&self) -> Option<usize> {
        self.beta.as_ref().map(Vec::len)
    }

    /// Utility of item `item` (1-based): δ_j, or δ_j + β·x_ij.
    pub fn utility(&self, agent: Option<AgentCovariates<'_>>, item: usize) -> Result<f64> {
        if item == 0 || item > self.m() {
            return Err(Error::ItemOutOfRange {
                id: item,
                m: self.m(),
            });
        }
        let j = item - 1;
        match self.beta.as_deref() {
            None => Ok(self.delta[j]),
            Some(beta) => {
                let x = covariates_for(beta, agent)?;
                Ok(self.delta[j] + dot(beta, x.item(j)))
            }
        }
    }

    /// Utilities of all m items for one agent.
    pub fn utilities(&self, agent: Option<AgentCovariates<'_>>) -> Result<Vec<f64>> {
        match self.beta.as_deref() {
            None => Ok(self.delta.clone()),
            Some(beta) => {
                let x = covariates_for(beta, agent)?;
                Ok(self
                    .delta
                    .iter()
                    .enumerate()
                    .map(|(j, d)| d + dot(beta, x.item(j)))
                    .collect())
            }
        }
    }

    pub(crate) fn check_order(&self, q: &PartialOrder) -> Result<()> {
        q.check(self.m())
    }

    /// Adds `coef` · ∂u_j/∂θ for item `j` (0-based) into `self`.
    pub(crate) fn add_utility_grad(
        &mut self,
        agent: Option<AgentCovariates<'_>>,
        j: usize,
        coef: f64,
    ) {
        self.delta[j] += coef;
        if let (Some(beta), Some(x)) = (self.beta.as_mut(), agent) {
            for (b, xv) in beta.iter_mut().zip(x.item(j)) {
                *b += coef * xv;
            }
        }
    }
}

pub(crate) fn covariates_for<'a>(
    beta: &[f64],
    agent: Option<AgentCovariates<'a>>,
) -> Result<AgentCovariates<'a>> {
    let x = agent.ok_or_else(|| {
        Error::MissingCovariates(
            "model has covariate weights but no agent features were given".into(),
        )
    })?;
    if x.d() != beta.len() {
        return Err(Error::Shape(format!(
            "beta has {} weights, covariates have d={}",
            beta.len(),
            x.d()
        )));
    }
    Ok(x)
}

impl ParamBlock for PLParams {
    fn n_params(&self) -> usize {
        self.delta.len() + self.beta.n_params()
    }

    fn write_flat(&self, out: &mut Vec<f64>) {
        self.delta.write_flat(out);
        self.beta.write_flat(out);
    }

    fn read_flat(&mut self, src: &[f64]) -> usize {
        let n = self.delta.read_flat(src);
        n + self.beta.read_flat(&src[n..])
    }
}

/// Log-probability of the top-k order `q` under PL: the sum of its k
/// sequential log choice probabilities.
pub fn pl_log_marginal(
    q: &PartialOrder,
    params: &PLParams,
    agent: Option<AgentCovariates<'_>>,
) -> Result<f64> {
    params.check_order(q)?;
    let u = params.utilities(agent)?;
    Ok(marginal_from_utilities(q, &u, 1.0, None))
}

pub(crate) fn pl_log_marginal_grad(
    q: &PartialOrder,
    params: &PLParams,
    agent: Option<AgentCovariates<'_>>,
    scale: f64,
    grad: &mut PLParams,
) -> Result<f64> {
    let u = params.utilities(agent)?;
    let mut sink = |j: Option<usize>, coef: f64| {
        if let Some(j) = j {
            grad.add_utility_grad(agent, j, coef);
        }
    };
    Ok(marginal_from_utilities(q, &u, scale, Some(&mut sink)))
}

fn marginal_from_utilities(
    q: &PartialOrder,
    u: &[f64],
    scale: f64,
    mut sink: Option<&mut dyn FnMut(Option<usize>, f64)>,
) -> f64 {
    let mut taken = vec![false; u.len()];
    let mut total = 0.0;
    for &id in q.items() {
        let step_sink: Option<&mut dyn FnMut(Option<usize>, f64)> = match sink {
            Some(ref mut f) => Some(&mut **f),
            None => None,
        };
        total += choice_step(u, &taken, None, Pick::Item(id - 1), scale, step_sink);
        taken[id - 1] = true;
    }
    total
}

/// Draws the first `len` positions of a PL ranking.
pub fn sample_pl_prefix<R: Rng + ?Sized>(
    params: &PLParams,
    agent: Option<AgentCovariates<'_>>,
    len: usize,
    rng: &mut R,
) -> Result<PartialOrder> {
    let u = params.utilities(agent)?;
    let mut taken = vec![false; u.len()];
    let mut items = Vec::with_capacity(len);
    for _ in 0..len.min(u.len()) {
        match draw_choice(&u, &taken, None, rng) {
            Pick::Item(j) => {
                taken[j] = true;
                items.push(j + 1);
            }
            Pick::End => unreachable!("no END in a PL choice set"),
        }
    }
    Ok(PartialOrder::new(items))
}

/// K PL banks; orders of length k use bank min(k, K).
#[derive(Debug, Clone, PartialEq)]
pub struct StratifiedPLParams {
    pub banks: Vec<PLParams>,
}

impl StratifiedPLParams {
    pub fn new(banks: Vec<PLParams>) -> Result<Self> {
        let first = banks
            .first()
            .ok_or_else(|| Error::Config("stratified model needs K ≥ 1 banks".into()))?;
        if banks
            .iter()
            .any(|b| b.m() != first.m() || b.d() != first.d())
        {
            return Err(Error::Shape("all banks must share m and d".into()));
        }
        Ok(Self { banks })
    }

    pub fn zeros(m: usize, d: Option<usize>, strata: usize) -> Self {
        Self {
            banks: vec![PLParams::zeros(m, d); strata.max(1)],
        }
    }

    pub fn strata(&self) -> usize {
        self.banks.len()
    }

    pub fn m(&self) -> usize {
        self.banks[0].m()
    }

    pub fn d(&self) -> Option<usize> {
        self.banks[0].d()
    }

    /// Bank used for orders of length `k`.
    pub fn bank_for_length(&self, k: usize) -> &PLParams {
        &self.banks[stratum_of(k, self.strata()) - 1]
    }
}

impl ParamBlock for StratifiedPLParams {
    fn n_params(&self) -> usize {
        self.banks.iter().map(ParamBlock::n_params).sum()
    }

    fn write_flat(&self, out: &mut Vec<f64>) {
        write_all(&self.banks, out);
    }

    fn read_flat(&mut self, src: &[f64]) -> usize {
        read_all(&mut self.banks, src)
    }
}

/// 1-based stratum min(k, K); lengths (or positions) below 1 map to 1.
pub fn stratum_of(k: usize, strata: usize) -> usize {
    k.clamp(1, strata.max(1))
}

/// PL marginal of `q` under the bank selected by its length.
pub fn stratified_log_prob(
    q: &PartialOrder,
    params: &StratifiedPLParams,
    agent: Option<AgentCovariates<'_>>,
) -> Result<f64> {
    pl_log_marginal(q, params.bank_for_length(q.len()), agent)
}
