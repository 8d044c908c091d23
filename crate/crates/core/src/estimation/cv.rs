use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{fit, FitConfig};
use crate::error::{Error, Result};
use crate::eval::{test_nll, EvalOptions};
use crate::model::ModelKind;
use crate::order::Dataset;

/// Seeded k-fold partition of `0..n`, returned as (train, test) index
/// pairs. Test folds are disjoint, cover every index, and differ in size
/// by at most one.
pub fn kfold_indices(n: usize, folds: usize, seed: u64) -> Result<Vec<(Vec<usize>, Vec<usize>)>> {
    if folds < 2 {
        return Err(Error::Config(format!("need at least 2 folds, got {folds}")));
    }
    if n < folds {
        return Err(Error::Config(format!(
            "{n} records cannot fill {folds} folds"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut tests = vec![Vec::new(); folds];
    for (pos, idx) in order.into_iter().enumerate() {
        tests[pos % folds].push(idx);
    }
    Ok(tests
        .into_iter()
        .map(|mut test| {
            test.sort_unstable();
            let mut in_test = vec![false; n];
            for &t in &test {
                in_test[t] = true;
            }
            let train = (0..n).filter(|i| !in_test[*i]).collect();
            (train, test)
        })
        .collect())
}

pub fn kfold_split(data: &Dataset, folds: usize, seed: u64) -> Result<Vec<(Dataset, Dataset)>> {
    Ok(kfold_indices(data.len(), folds, seed)?
        .into_iter()
        .map(|(train, test)| (data.select(&train), data.select(&test)))
        .collect())
}

/// Held-out mean NLL per fold.
pub fn cross_validate(
    kind: ModelKind,
    data: &Dataset,
    cfg: &FitConfig,
    folds: usize,
    seed: u64,
    eval: EvalOptions,
) -> Result<Vec<f64>> {
    kfold_split(data, folds, seed)?
        .iter()
        .map(|(train, test)| {
            let fitted = fit(kind, train, cfg)?;
            Ok(test_nll(&fitted.model, test, eval)?.mean)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridRow {
    pub strata: usize,
    pub lambda_laplacian: f64,
    pub fold_nll: Vec<f64>,
    pub mean_nll: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSearchResult {
    pub rows: Vec<GridRow>,
    /// Index into `rows` of the lowest mean validation NLL (first on ties).
    pub best: usize,
}

impl GridSearchResult {
    pub fn best_pair(&self) -> (usize, f64) {
        let r = &self.rows[self.best];
        (r.strata, r.lambda_laplacian)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("K,lambda_laplacian,mean_nll,fold_nll\n");
        for r in &self.rows {
            let folds: Vec<String> = r.fold_nll.iter().map(|v| format!("{v:.16e}")).collect();
            out.push_str(&format!(
                "{},{:.16e},{:.16e},{}\n",
                r.strata,
                r.lambda_laplacian,
                r.mean_nll,
                folds.join(";")
            ));
        }
        out
    }
}

/// Cross-validates every (K, λ_L) pair with identical folds and returns
/// the table with its argmin.
pub fn grid_search(
    kind: ModelKind,
    data: &Dataset,
    grid: &[(usize, f64)],
    cfg: &FitConfig,
    folds: usize,
    seed: u64,
    eval: EvalOptions,
) -> Result<GridSearchResult> {
    if grid.is_empty() {
        return Err(Error::Config("empty hyperparameter grid".into()));
    }
    let mut rows = Vec::with_capacity(grid.len());
    for &(strata, lambda_laplacian) in grid {
        let cfg = FitConfig {
            strata,
            lambda_laplacian,
            ..cfg.clone()
        };
        let fold_nll = cross_validate(kind, data, &cfg, folds, seed, eval)?;
        let mean_nll = fold_nll.iter().sum::<f64>() / fold_nll.len() as f64;
        rows.push(GridRow {
            strata,
            lambda_laplacian,
            fold_nll,
            mean_nll,
        });
    }
    let best = rows.iter().enumerate().fold(0, |best, (i, r)| {
        if r.mean_nll < rows[best].mean_nll {
            i
        } else {
            best
        }
    });
    Ok(GridSearchResult { rows, best })
}
