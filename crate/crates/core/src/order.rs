//! Domain types: the alternative universe, top-k partial orders, datasets
//! of orders and the optional agent × item covariate tensor.

use std::fmt;

use crate::error::{Error, Result};

/// The set of `m` alternatives, identified by ids `1..=m`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Universe {
    m: usize,
    labels: Option<Vec<String>>,
}

impl Universe {
    pub fn new(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::EmptyUniverse);
        }
        Ok(Self { m, labels: None })
    }

    pub fn with_labels(labels: Vec<String>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::EmptyUniverse);
        }
        Ok(Self {
            m: labels.len(),
            labels: Some(labels),
        })
    }

    pub fn set_labels(&mut self, labels: Vec<String>) -> Result<()> {
        if labels.len() != self.m {
            return Err(Error::LabelCount {
                expected: self.m,
                got: labels.len(),
            });
        }
        self.labels = Some(labels);
        Ok(())
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// Display name of alternative `id`, falling back to the id itself.
    pub fn label(&self, id: usize) -> String {
        self.labels
            .as_ref()
            .and_then(|l| l.get(id.wrapping_sub(1)))
            .cloned()
            .unwrap_or_else(|| id.to_string())
    }
}

/// A strict top-k ordering of distinct alternatives, most preferred first.
///
/// The empty order is representable because augmented models can emit it
/// (END chosen at the first position); datasets never contain one.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PartialOrder {
    items: Vec<usize>,
}

impl PartialOrder {
    pub fn new(items: Vec<usize>) -> Self {
        Self { items }
    }

    pub fn empty() -> Self {
        Self { items: Vec::new() }
    }

    pub fn items(&self) -> &[usize] {
        &self.items
    }

    /// k_Q, the number of ranked alternatives.
    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn first(&self) -> Option<usize> {
        self.items.first().copied()
    }

    /// Checks distinctness and range; the empty order is accepted here.
    pub fn check(&self, m: usize) -> Result<()> {
        if self.items.len() > m {
            return Err(Error::LengthOutOfRange {
                k: self.items.len(),
                m,
            });
        }
        let mut seen = vec![false; m + 1];
        for &id in &self.items {
            if id == 0 || id > m {
                return Err(Error::ItemOutOfRange { id, m });
            }
            if seen[id] {
                return Err(Error::DuplicateItem { id });
            }
            seen[id] = true;
        }
        Ok(())
    }
}

impl From<Vec<usize>> for PartialOrder {
    fn from(items: Vec<usize>) -> Self {
        Self::new(items)
    }
}

impl fmt::Display for PartialOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, id) in self.items.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{id}")?;
        }
        Ok(())
    }
}

/// Validates an order as a dataset record: distinct ids in range and
/// length in `[1, m]`.
pub fn validate_order(order: &PartialOrder, universe: &Universe) -> Result<()> {
    if order.is_empty() {
        return Err(Error::EmptyOrder);
    }
    order.check(universe.m())
}

/// Dense `n × m × d` real tensor of agent/item features, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CovariateTensor {
    n: usize,
    m: usize,
    d: usize,
    values: Vec<f64>,
}

impl CovariateTensor {
    pub fn new(n: usize, m: usize, d: usize, values: Vec<f64>) -> Result<Self> {
        if d == 0 {
            return Err(Error::Shape("d must be ≥ 1".into()));
        }
        if values.len() != n * m * d {
            return Err(Error::Shape(format!(
                "covariate buffer has {} entries, expected {n}×{m}×{d}",
                values.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("covariate entry {pos}")));
        }
        Ok(Self { n, m, d, values })
    }

    pub fn zeros(n: usize, m: usize, d: usize) -> Result<Self> {
        Self::new(n, m, d, vec![0.0; n * m * d])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn agent(&self, i: usize) -> AgentCovariates<'_> {
        let stride = self.m * self.d;
        AgentCovariates {
            d: self.d,
            values: &self.values[i * stride..(i + 1) * stride],
        }
    }

    /// Keeps the agents listed in `rows`, in that order.
    pub fn select(&self, rows: &[usize]) -> Self {
        let stride = self.m * self.d;
        let mut values = Vec::with_capacity(rows.len() * stride);
        for &r in rows {
            values.extend_from_slice(&self.values[r * stride..(r + 1) * stride]);
        }
        Self {
            n: rows.len(),
            m: self.m,
            d: self.d,
            values,
        }
    }
}

/// One agent's `m × d` feature block.
#[derive(Debug, Clone, Copy)]
pub struct AgentCovariates<'a> {
    d: usize,
    values: &'a [f64],
}

impl<'a> AgentCovariates<'a> {
    pub fn new(d: usize, values: &'a [f64]) -> Self {
        Self { d, values }
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Features x_ij of item `index` (0-based).
    pub fn item(&self, index: usize) -> &'a [f64] {
        &self.values[index * self.d..(index + 1) * self.d]
    }

    /// Agent-level vector used by the Poisson length model: the item
    /// average of x_ij.
    pub fn agent_vector(&self) -> Vec<f64> {
        let m = self.values.len() / self.d;
        let mut out = vec![0.0; self.d];
        for j in 0..m {
            for (o, x) in out.iter_mut().zip(self.item(j)) {
                *o += x;
            }
        }
        for o in &mut out {
            *o /= m as f64;
        }
        out
    }
}

/// A multiset of partial orders in file order, with optional covariates.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    universe: Universe,
    orders: Vec<PartialOrder>,
    covariates: Option<CovariateTensor>,
}

impl Dataset {
    pub fn new(universe: Universe, orders: Vec<PartialOrder>) -> Result<Self> {
        for q in &orders {
            validate_order(q, &universe)?;
        }
        Ok(Self {
            universe,
            orders,
            covariates: None,
        })
    }

    /// Like [`Dataset::new`] but also accepts empty lists, which only the
    /// augmented models can score.
    pub fn new_allowing_empty(universe: Universe, orders: Vec<PartialOrder>) -> Result<Self> {
        for q in &orders {
            q.check(universe.m())?;
        }
        Ok(Self {
            universe,
            orders,
            covariates: None,
        })
    }

    pub fn with_covariates(mut self, covariates: CovariateTensor) -> Result<Self> {
        if covariates.n() != self.orders.len() || covariates.m() != self.universe.m() {
            return Err(Error::Shape(format!(
                "covariates are {}×{}, dataset is {}×{}",
                covariates.n(),
                covariates.m(),
                self.orders.len(),
                self.universe.m()
            )));
        }
        self.covariates = Some(covariates);
        Ok(self)
    }

    pub fn universe(&self) -> &Universe {
        &self.universe
    }

    pub fn m(&self) -> usize {
        self.universe.m()
    }

    pub fn orders(&self) -> &[PartialOrder] {
        &self.orders
    }

    pub fn len(&self) -> usize {
        self.orders.len()
    }

    pub fn is_empty(&self) -> bool {
        self.orders.is_empty()
    }

    pub fn covariates(&self) -> Option<&CovariateTensor> {
        self.covariates.as_ref()
    }

    pub fn agent(&self, i: usize) -> Option<AgentCovariates<'_>> {
        self.covariates.as_ref().map(|c| c.agent(i))
    }

    /// Sub-dataset of the given record indices (covariates follow).
    pub fn select(&self, rows: &[usize]) -> Self {
        Self {
            universe: self.universe.clone(),
            orders: rows.iter().map(|&r| self.orders[r].clone()).collect(),
            covariates: self.covariates.as_ref().map(|c| c.select(rows)),
        }
    }

    pub fn mean_length(&self) -> f64 {
        if self.orders.is_empty() {
            return 0.0;
        }
        self.orders.iter().map(|q| q.len() as f64).sum::<f64>() / self.orders.len() as f64
    }
}
