//! Held-out likelihood, synthetic replicates and descriptive statistics
//! comparing sampled and observed data.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::augmented::SampleOptions;
use crate::error::{Error, Result};
use crate::estimation::agent_for;
use crate::model::Model;
use crate::order::{CovariateTensor, Dataset, PartialOrder};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvalOptions {
    /// Score augmented models conditioned on a non-empty list, i.e.
    /// log π(Q) − log(1 − π(∅)).
    pub condition_nonempty: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NllSummary {
    /// Mean NLL; +∞ when any record has zero probability.
    pub mean: f64,
    pub n: usize,
    /// Records with zero model probability.
    pub impossible: usize,
}

/// Mean negative log-probability of held-out records. Zero-probability
/// records are counted rather than aborting the evaluation.
pub fn test_nll(model: &Model, data: &Dataset, opts: EvalOptions) -> Result<NllSummary> {
    if data.is_empty() {
        return Err(Error::Config("empty test set".into()));
    }
    let mut total = 0.0;
    let mut impossible = 0;
    for (i, q) in data.orders().iter().enumerate() {
        let agent = agent_for(data, model, i);
        let mut lp = model.log_prob(q, agent)?;
        if opts.condition_nonempty && model.emits_empty() {
            let empty = model.log_prob(&PartialOrder::empty(), agent)?.exp();
            lp -= (-empty).ln_1p();
        }
        if lp.is_finite() {
            total -= lp;
        } else {
            impossible += 1;
        }
    }
    let mean = if impossible > 0 {
        f64::INFINITY
    } else {
        total / data.len() as f64
    };
    Ok(NllSummary {
        mean,
        n: data.len(),
        impossible,
    })
}

/// Draws `reps` synthetic datasets of `n` orders each. Replicate r uses its
/// own ChaCha stream r under `seed`, so any replicate can be regenerated
/// alone. Covariate-conditioned models reuse the given covariates, agent i
/// of a replicate taking row i mod n_cov.
pub fn replicate_sample(
    model: &Model,
    n: usize,
    reps: usize,
    seed: u64,
    covariates: Option<&CovariateTensor>,
    opts: SampleOptions,
    workers: usize,
) -> Result<Vec<Vec<PartialOrder>>> {
    let needs_cov = model.uses_covariates() || model.kind().requires_covariates();
    if needs_cov && covariates.is_none() {
        return Err(Error::MissingCovariates(format!(
            "sampling from {} needs the training covariates",
            model.kind()
        )));
    }
    let one = |r: usize| -> Result<Vec<PartialOrder>> {
        let mut rng = replicate_rng(seed, r);
        (0..n)
            .map(|i| {
                let agent = if needs_cov {
                    covariates.map(|c| c.agent(i % c.n()))
                } else {
                    None
                };
                model.sample(agent, opts, &mut rng)
            })
            .collect()
    };
    let workers = workers.max(1);
    if workers == 1 || reps < 2 {
        return (0..reps).map(one).collect();
    }
    let per = reps.div_ceil(workers);
    let chunks: Vec<Result<Vec<Vec<PartialOrder>>>> = std::thread::scope(|s| {
        let handles: Vec<_> = (0..reps)
            .step_by(per)
            .map(|start| {
                let one = &one;
                s.spawn(move || (start..(start + per).min(reps)).map(one).collect())
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("sampling worker panicked"))
            .collect()
    });
    let mut out = Vec::with_capacity(reps);
    for c in chunks {
        out.extend(c?);
    }
    Ok(out)
}

/// RNG for replicate `r` under `seed`.
pub fn replicate_rng(seed: u64, r: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(r as u64);
    rng
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LengthSummary {
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
    /// Empirical pmf over lengths 0..=m.
    pub pmf: Vec<f64>,
}

pub fn length_summary(orders: &[PartialOrder], m: usize) -> LengthSummary {
    let n = orders.len().max(1) as f64;
    let mut pmf = vec![0.0; m + 1];
    for q in orders {
        pmf[q.len().min(m)] += 1.0;
    }
    for p in &mut pmf {
        *p /= n;
    }
    let mean = orders.iter().map(|q| q.len() as f64).sum::<f64>() / n;
    let var = orders
        .iter()
        .map(|q| (q.len() as f64 - mean).powi(2))
        .sum::<f64>()
        / n;
    LengthSummary {
        mean,
        std: var.sqrt(),
        pmf,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LengthStats {
    pub truth: LengthSummary,
    pub replicates: Vec<LengthSummary>,
    pub mean_of_means: f64,
    /// Spread of the replicate means.
    pub std_of_means: f64,
    pub mean_of_stds: f64,
    pub pooled_pmf: Vec<f64>,
    /// TV distance between the true and pooled synthetic length pmfs.
    pub tv_length: f64,
}

pub fn length_stats(
    replicates: &[Vec<PartialOrder>],
    truth: &[PartialOrder],
    m: usize,
) -> Result<LengthStats> {
    if replicates.is_empty() {
        return Err(Error::Config("no replicates".into()));
    }
    let per: Vec<LengthSummary> = replicates.iter().map(|r| length_summary(r, m)).collect();
    let count = per.len() as f64;
    let mean_of_means = per.iter().map(|s| s.mean).sum::<f64>() / count;
    let std_of_means = (per
        .iter()
        .map(|s| (s.mean - mean_of_means).powi(2))
        .sum::<f64>()
        / count)
        .sqrt();
    let mean_of_stds = per.iter().map(|s| s.std).sum::<f64>() / count;
    let total: usize = replicates.iter().map(Vec::len).sum();
    let mut pooled = vec![0.0; m + 1];
    for q in replicates.iter().flatten() {
        pooled[q.len().min(m)] += 1.0;
    }
    for p in &mut pooled {
        *p /= total.max(1) as f64;
    }
    let truth = length_summary(truth, m);
    let tv_length = tv_distance(&truth.pmf, &pooled)?;
    Ok(LengthStats {
        truth,
        replicates: per,
        mean_of_means,
        std_of_means,
        mean_of_stds,
        pooled_pmf: pooled,
        tv_length,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemandShares {
    /// Fraction of records ranking each alternative first (index j ↔ id j+1).
    pub first: Vec<f64>,
    /// Fraction of records that are empty lists.
    pub empty: f64,
    /// Appearances of each alternative over all listed entries.
    pub overall: Vec<f64>,
}

pub fn demand_shares(orders: &[PartialOrder], m: usize) -> Result<DemandShares> {
    if orders.is_empty() {
        return Err(Error::Config("demand shares of an empty dataset".into()));
    }
    let mut first = vec![0.0; m];
    let mut overall = vec![0.0; m];
    let mut empty = 0.0;
    let mut entries = 0usize;
    for q in orders {
        match q.first() {
            Some(id) => first[id - 1] += 1.0,
            None => empty += 1.0,
        }
        for &id in q.items() {
            overall[id - 1] += 1.0;
        }
        entries += q.len();
    }
    let n = orders.len() as f64;
    first.iter_mut().for_each(|v| *v /= n);
    if entries > 0 {
        overall.iter_mut().for_each(|v| *v /= entries as f64);
    }
    Ok(DemandShares {
        first,
        empty: empty / n,
        overall,
    })
}

/// Half the L1 distance between two pmfs on the same support.
pub fn tv_distance(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::SupportMismatch(p.len(), q.len()));
    }
    for (name, v) in [("p", p), ("q", q)] {
        let s: f64 = v.iter().sum();
        if (s - 1.0).abs() > 1e-6 || v.iter().any(|x| *x < 0.0) {
            return Err(Error::Config(format!("{name} is not a pmf (sums to {s})")));
        }
    }
    Ok(0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>())
}

/// Maps alternative ids to display groups ("item_id,group_label" lines).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GroupMapping {
    groups: BTreeMap<usize, String>,
}

impl GroupMapping {
    pub fn new(groups: BTreeMap<usize, String>) -> Self {
        Self { groups }
    }

    pub fn parse(text: &str, m: usize) -> Result<Self> {
        let mut groups = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || (i == 0 && line.starts_with("item_id")) {
                continue;
            }
            let (id, label) = line.split_once(',').ok_or_else(|| Error::Parse {
                path: PathBuf::from("<groups>"),
                line: i + 1,
                msg: "expected item_id,group_label".into(),
            })?;
            let id: usize = id.trim().parse().map_err(|_| Error::Parse {
                path: PathBuf::from("<groups>"),
                line: i + 1,
                msg: format!("bad item id {id:?}"),
            })?;
            if id == 0 || id > m {
                return Err(Error::ItemOutOfRange { id, m });
            }
            groups.insert(id, label.trim().to_string());
        }
        Ok(Self { groups })
    }

    /// Label of `id`, or the id itself when unmapped.
    pub fn label(&self, id: usize) -> String {
        self.groups
            .get(&id)
            .cloned()
            .unwrap_or_else(|| id.to_string())
    }

    /// Sums per-alternative shares into groups, in label order.
    pub fn aggregate(&self, shares: &[f64]) -> BTreeMap<String, f64> {
        let mut out = BTreeMap::new();
        for (j, s) in shares.iter().enumerate() {
            *out.entry(self.label(j + 1)).or_insert(0.0) += s;
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub model: String,
    pub test_nll: Option<NllSummary>,
    pub length: LengthStats,
    pub demand_true: DemandShares,
    pub demand_replicates: Vec<DemandShares>,
    pub tv_length: f64,
}

/// Builds the full comparison of `replicates` against `truth`.
pub fn build_report(
    label: &str,
    test_nll: Option<NllSummary>,
    truth: &Dataset,
    replicates: &[Vec<PartialOrder>],
) -> Result<EvalReport> {
    let m = truth.m();
    let length = length_stats(replicates, truth.orders(), m)?;
    let demand_replicates = replicates
        .iter()
        .map(|r| demand_shares(r, m))
        .collect::<Result<Vec<_>>>()?;
    Ok(EvalReport {
        model: label.to_string(),
        test_nll,
        tv_length: length.tv_length,
        length,
        demand_true: demand_shares(truth.orders(), m)?,
        demand_replicates,
    })
}

fn mean_std(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = values.clone().count().max(1) as f64;
    let mean = values.clone().sum::<f64>() / n;
    let var = values.map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Label, true first share, replicate first shares, true overall share,
/// replicate overall shares.
type DemandRow = (String, f64, Vec<f64>, f64, Vec<f64>);

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes `nll_by_model.csv`, `length_stats_by_model.csv` and
/// `demand_by_alternative.csv` into `dir`.
///
/// Schemas (one header row each):
/// * `model,test_nll,n_test,impossible`
/// * `model,source,replicate,mean_length,std_length,std_of_means` with
///   source one of `true`, `synthetic` (one row per replicate) or
///   `aggregate` (mean of replicate means, mean of replicate stds, spread
///   of replicate means)
/// * `model,alternative,first_true,first_synth_mean,first_synth_std,overall_true,overall_synth_mean,overall_synth_std`;
///   an `EMPTY` row carries the empty-list share when any is present
pub fn emit_plot_data(
    reports: &[EvalReport],
    dir: &Path,
    groups: Option<&GroupMapping>,
) -> Result<Vec<PathBuf>> {
    if reports.is_empty() || reports.iter().any(|r| r.demand_replicates.is_empty()) {
        return Err(Error::Config("no replicates".into()));
    }
    std::fs::create_dir_all(dir)?;

    let mut nll = String::from("model,test_nll,n_test,impossible\n");
    let mut lengths = String::from("model,source,replicate,mean_length,std_length,std_of_means\n");
    let mut demand = String::from(
        "model,alternative,first_true,first_synth_mean,first_synth_std,overall_true,overall_synth_mean,overall_synth_std\n",
    );
    for r in reports {
        if let Some(t) = &r.test_nll {
            let _ = writeln!(nll, "{},{},{},{}", r.model, num(t.mean), t.n, t.impossible);
        }
        let l = &r.length;
        let _ = writeln!(
            lengths,
            "{},true,,{},{},",
            r.model,
            num(l.truth.mean),
            num(l.truth.std)
        );
        for (i, s) in l.replicates.iter().enumerate() {
            let _ = writeln!(
                lengths,
                "{},synthetic,{},{},{},",
                r.model,
                i,
                num(s.mean),
                num(s.std)
            );
        }
        let _ = writeln!(
            lengths,
            "{},aggregate,,{},{},{}",
            r.model,
            num(l.mean_of_means),
            num(l.mean_of_stds),
            num(l.std_of_means)
        );

        let mut rows: Vec<DemandRow> = Vec::new();
        match groups {
            None => {
                for j in 0..r.demand_true.first.len() {
                    rows.push((
                        (j + 1).to_string(),
                        r.demand_true.first[j],
                        r.demand_replicates.iter().map(|d| d.first[j]).collect(),
                        r.demand_true.overall[j],
                        r.demand_replicates.iter().map(|d| d.overall[j]).collect(),
                    ));
                }
            }
            Some(g) => {
                let first_true = g.aggregate(&r.demand_true.first);
                let overall_true = g.aggregate(&r.demand_true.overall);
                let first_reps: Vec<_> = r
                    .demand_replicates
                    .iter()
                    .map(|d| g.aggregate(&d.first))
                    .collect();
                let overall_reps: Vec<_> = r
                    .demand_replicates
                    .iter()
                    .map(|d| g.aggregate(&d.overall))
                    .collect();
                for (label, ft) in &first_true {
                    rows.push((
                        label.clone(),
                        *ft,
                        first_reps.iter().map(|m| m[label]).collect(),
                        overall_true[label],
                        overall_reps.iter().map(|m| m[label]).collect(),
                    ));
                }
            }
        }
        if r.demand_true.empty > 0.0 || r.demand_replicates.iter().any(|d| d.empty > 0.0) {
            rows.push((
                "EMPTY".into(),
                r.demand_true.empty,
                r.demand_replicates.iter().map(|d| d.empty).collect(),
                0.0,
                vec![0.0; r.demand_replicates.len()],
            ));
        }
        for (alt, ft, fs, ot, os) in rows {
            let (fm, fsd) = mean_std(fs.iter().copied());
            let (om, osd) = mean_std(os.iter().copied());
            let _ = writeln!(
                demand,
                "{},{},{},{},{},{},{},{}",
                r.model,
                alt,
                num(ft),
                num(fm),
                num(fsd),
                num(ot),
                num(om),
                num(osd)
            );
        }
    }

    let files = [
        ("nll_by_model.csv", nll),
        ("length_stats_by_model.csv", lengths),
        ("demand_by_alternative.csv", demand),
    ];
    let mut written = Vec::new();
    for (name, body) in files {
        let path = dir.join(name);
        std::fs::write(&path, body)?;
        written.push(path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::augmented::{AugmentedModel, AugmentedNaiveParams};
    use crate::combinatorics::enumerate_partial_orders;
    use crate::model::ModelKind;
    use crate::order::Universe;

    fn q(v: &[usize]) -> PartialOrder {
        PartialOrder::new(v.to_vec())
    }

    fn dataset(m: usize, orders: &[&[usize]]) -> Dataset {
        Dataset::new(
            Universe::new(m).unwrap(),
            orders.iter().map(|o| q(o)).collect(),
        )
        .unwrap()
    }

    #[test]
    fn test_nll_uniform_ci() {
        let model = Model::zeros(ModelKind::CI, 3, None, 1).unwrap();
        let data = dataset(3, &[&[1, 2], &[3, 1], &[2, 3]]);
        let s = test_nll(&model, &data, EvalOptions::default()).unwrap();
        assert!((s.mean - 18f64.ln()).abs() < 1e-12);
        assert_eq!(s.impossible, 0);

        // a record with probability 1/6 · 1/3 = 1/18 as well: mean unchanged
        let more = dataset(3, &[&[1, 2], &[3, 1], &[2, 3], &[1]]);
        let s2 = test_nll(&model, &more, EvalOptions::default()).unwrap();
        let expected = (3.0 * 18f64.ln() + 9f64.ln()) / 4.0;
        assert!((s2.mean - expected).abs() < 1e-12);
    }

    #[test]
    fn impossible_records_are_counted() {
        use crate::composite::CompositeModel;
        use crate::length::CategoricalLengthParams;
        use crate::ranking::PLParams;
        let len = CategoricalLengthParams::new(vec![f64::NEG_INFINITY, 0.0, 0.0]).unwrap();
        let model =
            Model::Composite(CompositeModel::independent(len, PLParams::zeros(3, None)).unwrap());
        let data = dataset(3, &[&[1], &[1, 2]]);
        let s = test_nll(&model, &data, EvalOptions::default()).unwrap();
        assert_eq!(s.impossible, 1);
        assert_eq!(s.mean, f64::INFINITY);
    }

    #[test]
    fn nonempty_conditioning() {
        let model = Model::Augmented(AugmentedModel::Naive(AugmentedNaiveParams::zeros(3, None)));
        let data = dataset(3, &[&[1]]);
        let raw = test_nll(&model, &data, EvalOptions::default())
            .unwrap()
            .mean;
        let cond = test_nll(
            &model,
            &data,
            EvalOptions {
                condition_nonempty: true,
            },
        )
        .unwrap()
        .mean;
        assert!((raw - 12f64.ln()).abs() < 1e-12);
        assert!((cond - (12.0f64 * 0.75).ln()).abs() < 1e-12);
    }

    #[test]
    fn nll_of_model_distribution_is_its_entropy() {
        let model = Model::zeros(ModelKind::CLD, 3, None, 2).unwrap();
        let mut model = model;
        use crate::params::ParamBlock;
        let flat: Vec<f64> = (0..model.n_params())
            .map(|i| ((i * 7 % 5) as f64 - 2.0) * 0.4)
            .collect();
        model.read_flat(&flat);
        let all = enumerate_partial_orders(3).unwrap();
        let probs: Vec<f64> = all
            .iter()
            .map(|o| model.log_prob(o, None).unwrap().exp())
            .collect();
        let entropy: f64 = -probs.iter().map(|p| p * p.ln()).sum::<f64>();
        let weighted_nll: f64 = all
            .iter()
            .zip(&probs)
            .map(|(o, p)| -p * model.log_prob(o, None).unwrap())
            .sum();
        assert!((weighted_nll - entropy).abs() < 1e-12);
    }

    #[test]
    fn demand_examples() {
        let d = demand_shares(&[q(&[1, 2]), q(&[1])], 2).unwrap();
        assert_eq!(d.first, vec![1.0, 0.0]);
        assert!((d.overall[0] - 2.0 / 3.0).abs() < 1e-15);
        assert!((d.overall[1] - 1.0 / 3.0).abs() < 1e-15);
        let single = demand_shares(&[q(&[3, 1])], 3).unwrap();
        assert_eq!(single.first, vec![0.0, 0.0, 1.0]);
        assert_eq!(single.overall, vec![0.5, 0.0, 0.5]);
        let with_empty = demand_shares(&[q(&[2]), PartialOrder::empty()], 2).unwrap();
        assert_eq!(with_empty.empty, 0.5);
        assert!((with_empty.first.iter().sum::<f64>() + with_empty.empty - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tv_examples() {
        assert_eq!(tv_distance(&[0.2, 0.8], &[0.2, 0.8]).unwrap(), 0.0);
        assert_eq!(tv_distance(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 1.0);
        assert_eq!(tv_distance(&[0.5, 0.5], &[0.75, 0.25]).unwrap(), 0.25);
        assert!(matches!(
            tv_distance(&[1.0], &[0.5, 0.5]),
            Err(Error::SupportMismatch(1, 2))
        ));
        assert!(tv_distance(&[0.5, 0.2], &[0.5, 0.5]).is_err());
    }

    #[test]
    fn length_stat_examples() {
        let reps = vec![vec![q(&[1, 2]), q(&[2, 3])]; 3];
        let truth = reps[0].clone();
        let s = length_stats(&reps, &truth, 3).unwrap();
        assert_eq!(s.truth.mean, 2.0);
        assert_eq!(s.truth.std, 0.0);
        assert_eq!(s.mean_of_means, s.truth.mean);
        assert_eq!(s.tv_length, 0.0);
        assert!(length_stats(&[], &truth, 3).is_err());
    }

    #[test]
    fn replicates_are_deterministic() {
        let model = Model::zeros(ModelKind::CI, 3, None, 1).unwrap();
        let one = replicate_sample(&model, 5, 1, 42, None, SampleOptions::default(), 1).unwrap();
        assert_eq!(one.len(), 1);
        assert_eq!(one[0].len(), 5);
        let a = replicate_sample(&model, 50, 6, 42, None, SampleOptions::default(), 1).unwrap();
        let b = replicate_sample(&model, 50, 6, 42, None, SampleOptions::default(), 3).unwrap();
        assert_eq!(a, b);
        assert_ne!(a[0], a[1]);
    }

    #[test]
    fn uniform_ci_pooled_lengths() {
        let model = Model::zeros(ModelKind::CI, 3, None, 1).unwrap();
        let reps =
            replicate_sample(&model, 10_000, 100, 3, None, SampleOptions::default(), 4).unwrap();
        let truth: Vec<PartialOrder> = vec![q(&[1]), q(&[1, 2]), q(&[1, 2, 3])];
        let s = length_stats(&reps, &truth, 3).unwrap();
        assert!(s.tv_length < 0.01, "tv {}", s.tv_length);

        let pooled: Vec<PartialOrder> = reps.into_iter().flatten().collect();
        let d = demand_shares(&pooled, 3).unwrap();
        let n = pooled.len() as f64;
        let se = (1.0 / 3.0 * 2.0 / 3.0 / n).sqrt();
        for f in &d.first {
            assert!((f - 1.0 / 3.0).abs() < 3.0 * se);
        }
    }

    #[test]
    fn plot_data_files() {
        let model = Model::zeros(ModelKind::A, 3, None, 1).unwrap();
        let truth = dataset(3, &[&[1, 2], &[3], &[2, 1, 3]]);
        let reps = replicate_sample(&model, 20, 3, 1, None, SampleOptions::default(), 1).unwrap();
        let nll = test_nll(&model, &truth, EvalOptions::default()).unwrap();
        let r1 = build_report("a", Some(nll), &truth, &reps).unwrap();
        let r2 = EvalReport {
            model: "a-copy".into(),
            ..r1.clone()
        };
        let dir = tempfile::tempdir().unwrap();
        let files = emit_plot_data(&[r1.clone(), r2.clone()], dir.path(), None).unwrap();
        let nll_text = std::fs::read_to_string(&files[0]).unwrap();
        assert_eq!(nll_text.lines().count(), 3);
        let first: Vec<Vec<u8>> = files.iter().map(|f| std::fs::read(f).unwrap()).collect();
        emit_plot_data(&[r1.clone(), r2], dir.path(), None).unwrap();
        let second: Vec<Vec<u8>> = files.iter().map(|f| std::fs::read(f).unwrap()).collect();
        assert_eq!(first, second);

        let empty = EvalReport {
            demand_replicates: vec![],
            ..r1
        };
        let err = emit_plot_data(&[empty], dir.path(), None).unwrap_err();
        assert!(err.to_string().contains("no replicates"));
    }

    #[test]
    fn group_mapping() {
        let g = GroupMapping::parse("item_id,group_label\n1,GE\n2,GE\n3,CB\n", 3).unwrap();
        let agg = g.aggregate(&[0.2, 0.3, 0.5]);
        assert_eq!(agg["GE"], 0.5);
        assert_eq!(agg["CB"], 0.5);
        assert!(GroupMapping::parse("7,X\n", 3).is_err());
    }
}
