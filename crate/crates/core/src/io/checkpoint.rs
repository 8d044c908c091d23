//! Human-readable JSON checkpoints.
//!
//! Parameter arrays are stored by role. Layout per model type:
//!
//! | type | arrays |
//! |------|--------|
//! | `c-i`  | `length_logits[m]`, `delta[m]`, optional `beta[d]` |
//! | `c-ci` | `rate_weights[d]`, `delta[m]`, `beta[d]` |
//! | `c-ld` | `length_logits[m]`, `banks[K][m (+d)]`: each bank is δ then its own β |
//! | `a`    | `delta[m]`, `end[1]`, optional `beta[d]` |
//! | `a-pd` | `delta[m]`, `gamma[m]`, optional `beta[d]` |
//! | `a-s`  | `banks[K][m+1]` (END last), optional `beta[d]` |
//!
//! Floats are written with 17 significant digits; a length logit of −∞ is
//! written as the string `"-inf"`.

use std::io;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::augmented::{
    AugmentedModel, AugmentedNaiveParams, PositionDependentParams, StratifiedAugmentedParams,
};
use crate::composite::{CompositeModel, RankingParams};
use crate::error::{Error, Result};
use crate::estimation::FitConfig;
use crate::length::{CategoricalLengthParams, LengthParams, PoissonLengthParams};
use crate::model::{Model, ModelKind};
use crate::ranking::{PLParams, StratifiedPLParams};

pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum Num {
    Finite(f64),
    Text(String),
}

fn to_nums(v: &[f64]) -> Vec<Num> {
    v.iter()
        .map(|&x| {
            if x == f64::NEG_INFINITY {
                Num::Text("-inf".into())
            } else {
                Num::Finite(x)
            }
        })
        .collect()
}

fn from_nums(v: &[Num], role: &str) -> Result<Vec<f64>> {
    v.iter()
        .map(|n| match n {
            Num::Finite(x) => Ok(*x),
            Num::Text(s) if s == "-inf" => Ok(f64::NEG_INFINITY),
            Num::Text(s) => Err(Error::Checkpoint(format!("{role}: unexpected value {s:?}"))),
        })
        .collect()
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    /// SHA-256 of the training data file.
    pub data_hash: Option<String>,
    pub seed: Option<u64>,
    pub timestamp: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Arrays {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    length_logits: Option<Vec<Num>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    rate_weights: Option<Vec<Num>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    delta: Option<Vec<Num>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    beta: Option<Vec<Num>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    gamma: Option<Vec<Num>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    end: Option<Vec<Num>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    banks: Option<Vec<Vec<Num>>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format_version: u32,
    pub model_type: String,
    pub m: usize,
    pub d: Option<usize>,
    #[serde(rename = "K")]
    pub k: usize,
    params: Arrays,
    pub fit_config: Option<FitConfig>,
    pub provenance: Provenance,
}

impl Checkpoint {
    pub fn from_model(
        model: &Model,
        fit_config: Option<&FitConfig>,
        provenance: Provenance,
    ) -> Self {
        let mut a = Arrays::default();
        let beta_of = |b: &Option<Vec<f64>>| b.as_deref().map(to_nums);
        match model {
            Model::Composite(c) => {
                match &c.length {
                    LengthParams::Categorical(l) => a.length_logits = Some(to_nums(&l.logits)),
                    LengthParams::Poisson(p) => a.rate_weights = Some(to_nums(&p.weights)),
                }
                match &c.ranking {
                    RankingParams::Single(p) => {
                        a.delta = Some(to_nums(&p.delta));
                        a.beta = beta_of(&p.beta);
                    }
                    RankingParams::Stratified(s) => {
                        a.banks = Some(
                            s.banks
                                .iter()
                                .map(|b| {
                                    let mut flat = b.delta.clone();
                                    flat.extend(b.beta.iter().flatten());
                                    to_nums(&flat)
                                })
                                .collect(),
                        );
                    }
                }
            }
            Model::Augmented(AugmentedModel::Naive(p)) => {
                let m = p.m();
                a.delta = Some(to_nums(&p.theta[..m]));
                a.end = Some(to_nums(&p.theta[m..]));
                a.beta = beta_of(&p.beta);
            }
            Model::Augmented(AugmentedModel::PositionDependent(p)) => {
                a.delta = Some(to_nums(&p.theta));
                a.gamma = Some(to_nums(&p.gamma));
                a.beta = beta_of(&p.beta);
            }
            Model::Augmented(AugmentedModel::Stratified(p)) => {
                a.banks = Some(p.banks.iter().map(|b| to_nums(b)).collect());
                a.beta = beta_of(&p.beta);
            }
        }
        Self {
            format_version: CHECKPOINT_VERSION,
            model_type: model.kind().tag().to_string(),
            m: model.m(),
            d: model.covariate_dim(),
            k: model.strata(),
            params: a,
            fit_config: fit_config.cloned(),
            provenance,
        }
    }

    /// Rebuilds the model, checking every array against the declared
    /// type and dimensions.
    pub fn to_model(&self) -> Result<Model> {
        if self.format_version != CHECKPOINT_VERSION {
            return Err(Error::Checkpoint(format!(
                "format_version {} is not supported (expected {CHECKPOINT_VERSION})",
                self.format_version
            )));
        }
        let kind: ModelKind = self.model_type.parse()?;
        let (m, d, k) = (self.m, self.d, self.k);
        if m == 0 || k == 0 || d == Some(0) {
            return Err(Error::Shape("m, K and d must be ≥ 1".into()));
        }
        let a = &self.params;
        let get = |role: &str, v: &Option<Vec<Num>>, len: usize| -> Result<Vec<f64>> {
            let v = v.as_ref().ok_or_else(|| {
                Error::Shape(format!(
                    "{} checkpoint is missing '{role}'",
                    self.model_type
                ))
            })?;
            if v.len() != len {
                return Err(Error::Shape(format!(
                    "'{role}' has {} entries, expected {len}",
                    v.len()
                )));
            }
            from_nums(v, role)
        };
        let absent = |role: &str, present: bool| -> Result<()> {
            if present {
                Err(Error::Shape(format!(
                    "'{role}' does not belong to a {} checkpoint",
                    self.model_type
                )))
            } else {
                Ok(())
            }
        };
        let beta = || -> Result<Option<Vec<f64>>> {
            match d {
                Some(d) => get("beta", &a.beta, d).map(Some),
                None => absent("beta", a.beta.is_some()).map(|_| None),
            }
        };
        let banks = |width: usize| -> Result<Vec<Vec<f64>>> {
            let banks = a.banks.as_ref().ok_or_else(|| {
                Error::Shape(format!("{} checkpoint is missing 'banks'", self.model_type))
            })?;
            if banks.len() != k {
                return Err(Error::Shape(format!(
                    "'banks' has {} banks, expected K={k}",
                    banks.len()
                )));
            }
            banks
                .iter()
                .map(|b| get("banks", &Some(b.clone()), width))
                .collect()
        };
        if !kind.is_stratified() && k != 1 {
            return Err(Error::Shape(format!("{kind} checkpoint must have K=1")));
        }

        let model = match kind {
            ModelKind::CI => {
                absent("rate_weights", a.rate_weights.is_some())?;
                absent(
                    "gamma/end/banks",
                    a.gamma.is_some() || a.end.is_some() || a.banks.is_some(),
                )?;
                Model::Composite(CompositeModel::independent(
                    CategoricalLengthParams::new(get("length_logits", &a.length_logits, m)?)?,
                    PLParams::new(get("delta", &a.delta, m)?, beta()?)?,
                )?)
            }
            ModelKind::CCI => {
                let d = d.ok_or_else(|| Error::Shape("c-ci checkpoint needs d".into()))?;
                absent("length_logits", a.length_logits.is_some())?;
                absent(
                    "gamma/end/banks",
                    a.gamma.is_some() || a.end.is_some() || a.banks.is_some(),
                )?;
                Model::Composite(CompositeModel::conditionally_independent(
                    PoissonLengthParams::new(get("rate_weights", &a.rate_weights, d)?, m)?,
                    PLParams::new(get("delta", &a.delta, m)?, beta()?)?,
                )?)
            }
            ModelKind::CLD => {
                absent("delta/beta", a.delta.is_some() || a.beta.is_some())?;
                absent(
                    "rate_weights/gamma/end",
                    a.rate_weights.is_some() || a.gamma.is_some() || a.end.is_some(),
                )?;
                let width = m + d.unwrap_or(0);
                let banks = banks(width)?
                    .into_iter()
                    .map(|b| PLParams::new(b[..m].to_vec(), d.map(|_| b[m..].to_vec())))
                    .collect::<Result<Vec<_>>>()?;
                Model::Composite(CompositeModel::length_dependent(
                    CategoricalLengthParams::new(get("length_logits", &a.length_logits, m)?)?,
                    StratifiedPLParams::new(banks)?,
                )?)
            }
            ModelKind::A => {
                absent(
                    "length/rate/gamma/banks",
                    any_length(a) || a.gamma.is_some() || a.banks.is_some(),
                )?;
                let mut theta = get("delta", &a.delta, m)?;
                theta.extend(get("end", &a.end, 1)?);
                Model::Augmented(AugmentedModel::Naive(AugmentedNaiveParams::new(
                    theta,
                    beta()?,
                )?))
            }
            ModelKind::APD => {
                absent(
                    "length/rate/end/banks",
                    any_length(a) || a.end.is_some() || a.banks.is_some(),
                )?;
                Model::Augmented(AugmentedModel::PositionDependent(
                    PositionDependentParams::new(
                        get("delta", &a.delta, m)?,
                        get("gamma", &a.gamma, m)?,
                        beta()?,
                    )?,
                ))
            }
            ModelKind::AS => {
                absent(
                    "length/rate/delta/gamma/end",
                    any_length(a) || a.delta.is_some() || a.gamma.is_some() || a.end.is_some(),
                )?;
                Model::Augmented(AugmentedModel::Stratified(StratifiedAugmentedParams::new(
                    banks(m + 1)?,
                    beta()?,
                )?))
            }
        };
        Ok(model)
    }

    pub fn to_json(&self) -> Result<String> {
        let mut buf = Vec::new();
        let mut ser =
            serde_json::Serializer::with_formatter(&mut buf, SignificantDigits::default());
        self.serialize(&mut ser)?;
        buf.push(b'\n');
        Ok(String::from_utf8(buf).expect("serde_json writes UTF-8"))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

fn any_length(a: &Arrays) -> bool {
    a.length_logits.is_some() || a.rate_weights.is_some()
}

pub fn save_checkpoint(
    model: &Model,
    fit_config: Option<&FitConfig>,
    provenance: Provenance,
    path: &Path,
) -> Result<()> {
    std::fs::write(
        path,
        Checkpoint::from_model(model, fit_config, provenance).to_json()?,
    )?;
    Ok(())
}

pub fn load_checkpoint(path: &Path) -> Result<(Model, Checkpoint)> {
    let ck = Checkpoint::from_json(&std::fs::read_to_string(path)?)?;
    Ok((ck.to_model()?, ck))
}

/// Pretty JSON with every float in 17-significant-digit scientific form.
#[derive(Default)]
struct SignificantDigits {
    pretty: PrettyFormatter<'static>,
}

impl Formatter for SignificantDigits {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.pretty.begin_array(w)
    }

    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.pretty.end_array(w)
    }

    fn begin_array_value<W: ?Sized + io::Write>(
        &mut self,
        w: &mut W,
        first: bool,
    ) -> io::Result<()> {
        self.pretty.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.pretty.end_array_value(w)
    }

    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.pretty.begin_object(w)
    }

    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.pretty.end_object(w)
    }

    fn begin_object_key<W: ?Sized + io::Write>(
        &mut self,
        w: &mut W,
        first: bool,
    ) -> io::Result<()> {
        self.pretty.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.pretty.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.pretty.end_object_value(w)
    }
}

#[cfg(test)]
mod tests {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::combinatorics::enumerate_partial_orders;
    use crate::order::{AgentCovariates, PartialOrder};
    use crate::params::ParamBlock;

    fn random_model(kind: ModelKind, d: Option<usize>, seed: u64) -> Model {
        let mut model = Model::zeros(kind, 3, d, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let flat: Vec<f64> = (0..model.n_params())
            .map(|_| rng.random_range(-3.0..3.0) / 7.0)
            .collect();
        model.read_flat(&flat);
        model
    }

    #[test]
    fn round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let cov = [0.3, -1.1, 0.7, 2.0, 0.1, -0.4];
        let agent = AgentCovariates::new(2, &cov);
        let mut probes = enumerate_partial_orders(3).unwrap();
        probes.push(PartialOrder::empty());
        for (i, kind) in ModelKind::ALL.into_iter().enumerate() {
            for d in [None, Some(2)] {
                if kind.requires_covariates() && d.is_none() {
                    continue;
                }
                let model = random_model(kind, d, i as u64);
                let path = dir.path().join(format!("{kind}.json"));
                let cfg = FitConfig::default();
                save_checkpoint(&model, Some(&cfg), Provenance::default(), &path).unwrap();
                let (back, ck) = load_checkpoint(&path).unwrap();
                assert_eq!(back, model);
                assert_eq!(ck.fit_config.as_ref(), Some(&cfg));
                let a = d.map(|_| agent);
                for p in &probes {
                    if !model.emits_empty() && p.is_empty() {
                        continue;
                    }
                    let x = model.log_prob(p, a).unwrap();
                    let y = back.log_prob(p, a).unwrap();
                    assert_eq!(x.to_bits(), y.to_bits());
                }
            }
        }
    }

    #[test]
    fn negative_infinity_logit_survives() {
        let model = Model::Composite(
            CompositeModel::independent(
                CategoricalLengthParams::new(vec![f64::NEG_INFINITY, 0.0]).unwrap(),
                PLParams::zeros(2, None),
            )
            .unwrap(),
        );
        let text = Checkpoint::from_model(&model, None, Provenance::default())
            .to_json()
            .unwrap();
        assert!(text.contains("\"-inf\""));
        assert_eq!(
            Checkpoint::from_json(&text).unwrap().to_model().unwrap(),
            model
        );
    }

    #[test]
    fn floats_use_seventeen_digits() {
        let text = Checkpoint::from_model(
            &random_model(ModelKind::A, None, 1),
            None,
            Provenance::default(),
        )
        .to_json()
        .unwrap();
        assert!(text.contains("e-1") || text.contains("e0"), "{text}");
    }

    #[test]
    fn rejects_bad_files() {
        let model = random_model(ModelKind::APD, None, 2);
        let text = Checkpoint::from_model(&model, None, Provenance::default())
            .to_json()
            .unwrap();
        assert!(matches!(
            Checkpoint::from_json(&text[..text.len() / 2]),
            Err(Error::Json(_))
        ));

        let mut ck = Checkpoint::from_json(&text).unwrap();
        ck.params.gamma = None;
        assert!(matches!(ck.to_model(), Err(Error::Shape(_))));

        let mut ck = Checkpoint::from_json(&text).unwrap();
        ck.format_version = 2;
        assert!(matches!(ck.to_model(), Err(Error::Checkpoint(_))));

        let mut ck = Checkpoint::from_json(&text).unwrap();
        ck.m = 4;
        assert!(matches!(ck.to_model(), Err(Error::Shape(_))));
    }
}
