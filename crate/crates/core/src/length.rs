//! Distributions over list length k ∈ [1, m].
//!
//! Two families: a categorical softmax over the m lengths, and a Poisson
//! whose rate depends on agent covariates. The Poisson is clipped to
//! [1, m] by absorbing the mass below 1 into k = 1 and the tail at or
//! above m into k = m, so the clipped pmf is normalized on its support.

use rand::Rng;

use crate::error::{Error, Result};
use crate::math::{dot, draw_index, logsumexp};
use crate::order::AgentCovariates;
use crate::params::{check_finite, ParamBlock};

/// Length logits θ_1..θ_m; p_k = softmax(θ)_k.
#[derive(Debug, Clone, PartialEq)]
pub struct CategoricalLengthParams {
    pub logits: Vec<f64>,
}

impl CategoricalLengthParams {
    /// Logits may be −∞ to mark impossible lengths.
    pub fn new(logits: Vec<f64>) -> Result<Self> {
        if logits.is_empty() {
            return Err(Error::EmptyUniverse);
        }
        check_finite("length logits", &logits)?;
        if logits.iter().all(|l| *l == f64::NEG_INFINITY) {
            return Err(Error::NonFinite("every length has zero probability".into()));
        }
        Ok(Self { logits })
    }

    pub fn zeros(m: usize) -> Self {
        Self {
            logits: vec![0.0; m],
        }
    }

    pub fn m(&self) -> usize {
        self.logits.len()
    }

    pub fn log_pmf(&self) -> Vec<f64> {
        let lse = logsumexp(&self.logits);
        self.logits.iter().map(|t| t - lse).collect()
    }
}

impl ParamBlock for CategoricalLengthParams {
    fn n_params(&self) -> usize {
        self.logits.len()
    }

    fn write_flat(&self, out: &mut Vec<f64>) {
        self.logits.write_flat(out);
    }

    fn read_flat(&mut self, src: &[f64]) -> usize {
        self.logits.read_flat(src)
    }
}

/// log p_k = θ_k − logsumexp(θ).
pub fn categorical_log_prob(k: usize, params: &CategoricalLengthParams) -> Result<f64> {
    let m = params.m();
    if k == 0 || k > m {
        return Err(Error::LengthOutOfRange { k, m });
    }
    let theta = params.logits[k - 1];
    if theta == f64::NEG_INFINITY {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(theta - logsumexp(&params.logits))
}

fn categorical_grad(
    k: usize,
    params: &CategoricalLengthParams,
    scale: f64,
    grad: &mut CategoricalLengthParams,
) {
    let lse = logsumexp(&params.logits);
    for (i, (g, t)) in grad.logits.iter_mut().zip(&params.logits).enumerate() {
        let hit = if i + 1 == k { 1.0 } else { 0.0 };
        *g += scale * (hit - (t - lse).exp());
    }
}

/// Rate weights for λ(x) = exp(θ·x) with support bound m.
#[derive(Debug, Clone, PartialEq)]
pub struct PoissonLengthParams {
    pub weights: Vec<f64>,
    pub m: usize,
}

impl PoissonLengthParams {
    pub fn new(weights: Vec<f64>, m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::EmptyUniverse);
        }
        if weights.is_empty() {
            return Err(Error::Shape("rate weights need d ≥ 1 entries".into()));
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::NonFinite("rate weights".into()));
        }
        Ok(Self { weights, m })
    }

    pub fn zeros(m: usize, d: usize) -> Self {
        Self {
            weights: vec![0.0; d],
            m,
        }
    }

    pub fn d(&self) -> usize {
        self.weights.len()
    }

    /// ln λ = θ·x for an agent-level feature vector.
    pub fn log_rate(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.weights.len() {
            return Err(Error::Shape(format!(
                "rate weights have d={}, features have {}",
                self.weights.len(),
                x.len()
            )));
        }
        let eta = dot(&self.weights, x);
        if !eta.is_finite() || !eta.exp().is_finite() {
            return Err(Error::NonFinite(format!("Poisson rate exp({eta})")));
        }
        Ok(eta)
    }

    /// Clipped log-pmf over k = 1..=m for log-rate `eta`.
    pub fn log_pmf(&self, eta: f64) -> Vec<f64> {
        clipped_poisson_log_pmf(self.m, eta)
    }
}

impl ParamBlock for PoissonLengthParams {
    fn n_params(&self) -> usize {
        self.weights.len()
    }

    fn write_flat(&self, out: &mut Vec<f64>) {
        self.weights.write_flat(out);
    }

    fn read_flat(&mut self, src: &[f64]) -> usize {
        self.weights.read_flat(src)
    }
}

fn ln_factorial(k: usize) -> f64 {
    (2..=k).map(|i| (i as f64).ln()).sum()
}

fn poisson_ln_pmf(j: usize, eta: f64, lam: f64) -> f64 {
    j as f64 * eta - lam - ln_factorial(j)
}

/// ln P(X ≥ m) for X ~ Poisson(e^eta), m ≥ 1.
///
/// Below the mean the tail is summed directly from j = m (terms shrink
/// geometrically); above it the complement of the head is used.
fn poisson_ln_tail(m: usize, eta: f64, lam: f64) -> f64 {
    if lam < m as f64 {
        let mut term = poisson_ln_pmf(m, eta, lam);
        let mut acc = term;
        let mut j = m;
        loop {
            j += 1;
            term += eta - (j as f64).ln();
            let next = crate::math::logsumexp(&[acc, term]);
            if next - acc < 1e-17 || j > m + 100_000 {
                return next;
            }
            acc = next;
        }
    } else {
        let head: f64 = (0..m).map(|j| poisson_ln_pmf(j, eta, lam).exp()).sum();
        (-head).ln_1p()
    }
}

fn clipped_poisson_log_pmf(m: usize, eta: f64) -> Vec<f64> {
    let lam = eta.exp();
    if m == 1 {
        return vec![0.0];
    }
    let mut out = Vec::with_capacity(m);
    // P(0) + P(1) = e^{−λ}(1 + λ)
    out.push(-lam + lam.ln_1p());
    for k in 2..m {
        out.push(poisson_ln_pmf(k, eta, lam));
    }
    out.push(poisson_ln_tail(m, eta, lam));
    out
}

/// d ln P_clip(k) / d eta, with eta = ln λ.
fn clipped_poisson_dlog(k: usize, m: usize, eta: f64) -> f64 {
    let lam = eta.exp();
    if m == 1 {
        0.0
    } else if k == 1 {
        -lam * lam / (1.0 + lam)
    } else if k < m {
        k as f64 - lam
    } else {
        // dT/dλ = Pois(m−1; λ)
        let ln_tail = poisson_ln_tail(m, eta, lam);
        (eta + poisson_ln_pmf(m - 1, eta, lam) - ln_tail).exp()
    }
}

/// Log-probability of length `k` for an agent with feature vector `x`
/// under the clipped Poisson.
pub fn poisson_clipped_log_prob(k: usize, x: &[f64], params: &PoissonLengthParams) -> Result<f64> {
    if k == 0 || k > params.m {
        return Err(Error::LengthOutOfRange { k, m: params.m });
    }
    let eta = params.log_rate(x)?;
    Ok(params.log_pmf(eta)[k - 1])
}

/// Either length family, as used inside a composite model.
#[derive(Debug, Clone, PartialEq)]
pub enum LengthParams {
    Categorical(CategoricalLengthParams),
    Poisson(PoissonLengthParams),
}

impl LengthParams {
    pub fn m(&self) -> usize {
        match self {
            Self::Categorical(c) => c.m(),
            Self::Poisson(p) => p.m,
        }
    }

    /// Full log-pmf over 1..=m for one agent.
    pub fn log_pmf(&self, agent: Option<AgentCovariates<'_>>) -> Result<Vec<f64>> {
        match self {
            Self::Categorical(c) => Ok(c.log_pmf()),
            Self::Poisson(p) => {
                let x = poisson_features(agent)?;
                Ok(p.log_pmf(p.log_rate(&x)?))
            }
        }
    }

    pub fn log_prob(&self, k: usize, agent: Option<AgentCovariates<'_>>) -> Result<f64> {
        match self {
            Self::Categorical(c) => categorical_log_prob(k, c),
            Self::Poisson(p) => poisson_clipped_log_prob(k, &poisson_features(agent)?, p),
        }
    }

    pub(crate) fn log_prob_grad(
        &self,
        k: usize,
        agent: Option<AgentCovariates<'_>>,
        scale: f64,
        grad: &mut LengthParams,
    ) -> Result<f64> {
        match (self, grad) {
            (Self::Categorical(c), Self::Categorical(g)) => {
                let lp = categorical_log_prob(k, c)?;
                categorical_grad(k, c, scale, g);
                Ok(lp)
            }
            (Self::Poisson(p), Self::Poisson(g)) => {
                let x = poisson_features(agent)?;
                let lp = poisson_clipped_log_prob(k, &x, p)?;
                let eta = p.log_rate(&x)?;
                let d = scale * clipped_poisson_dlog(k, p.m, eta);
                for (w, xv) in g.weights.iter_mut().zip(&x) {
                    *w += d * xv;
                }
                Ok(lp)
            }
            _ => unreachable!("gradient buffer has a different length family"),
        }
    }

    /// Draws a length from the exact pmf of `log_prob`.
    pub fn sample<R: Rng + ?Sized>(
        &self,
        agent: Option<AgentCovariates<'_>>,
        rng: &mut R,
    ) -> Result<usize> {
        let pmf: Vec<f64> = self.log_pmf(agent)?.iter().map(|l| l.exp()).collect();
        Ok(draw_index(&pmf, rng) + 1)
    }
}

fn poisson_features(agent: Option<AgentCovariates<'_>>) -> Result<Vec<f64>> {
    agent.map(|a| a.agent_vector()).ok_or_else(|| {
        Error::MissingCovariates("Poisson length model needs agent covariates".into())
    })
}

impl ParamBlock for LengthParams {
    fn n_params(&self) -> usize {
        match self {
            Self::Categorical(c) => c.n_params(),
            Self::Poisson(p) => p.n_params(),
        }
    }

    fn write_flat(&self, out: &mut Vec<f64>) {
        match self {
            Self::Categorical(c) => c.write_flat(out),
            Self::Poisson(p) => p.write_flat(out),
        }
    }

    fn read_flat(&mut self, src: &[f64]) -> usize {
        match self {
            Self::Categorical(c) => c.read_flat(src),
            Self::Poisson(p) => p.read_flat(src),
        }
    }
}
