//! Log-space helpers shared by every choice model.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;

/// Numerically stable log Σ exp(x_i). Returns −∞ for an empty or all −∞ input.
pub fn logsumexp(xs: &[f64]) -> f64 {
    logsumexp_iter(xs.iter().copied())
}

pub fn logsumexp_iter<I>(xs: I) -> f64
where
    I: Iterator<Item = f64> + Clone,
{
    let max = xs.clone().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if max == f64::INFINITY {
        return f64::INFINITY;
    }
    max + xs.map(|x| (x - max).exp()).sum::<f64>().ln()
}

pub fn softmax(xs: &[f64]) -> Vec<f64> {
    let lse = logsumexp(xs);
    xs.iter().map(|x| (x - lse).exp()).collect()
}

/// The outcome of a single choice step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Pick {
    /// 0-based item index.
    Item(usize),
    End,
}

/// One multinomial-logit choice from the items not yet `taken`, plus END
/// when `end` is given.
///
/// Returns log P(pick). When `sink` is given it receives ∂ log P / ∂u for
/// every alternative in the choice set, already multiplied by `scale`
/// (`None` addresses END).
pub(crate) fn choice_step(
    utilities: &[f64],
    taken: &[bool],
    end: Option<f64>,
    pick: Pick,
    scale: f64,
    sink: Option<&mut dyn FnMut(Option<usize>, f64)>,
) -> f64 {
    let available = || {
        utilities
            .iter()
            .zip(taken)
            .filter(|(_, t)| !**t)
            .map(|(u, _)| *u)
            .chain(end)
    };
    let lse = logsumexp_iter(available());
    let chosen = match pick {
        Pick::Item(j) => utilities[j],
        Pick::End => end.expect("END picked from a choice set without END"),
    };
    if chosen == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let logp = chosen - lse;
    if let Some(sink) = sink {
        for (j, (&u, &t)) in utilities.iter().zip(taken).enumerate() {
            if t {
                continue;
            }
            let hit = if pick == Pick::Item(j) { 1.0 } else { 0.0 };
            let p = (u - lse).exp();
            sink(Some(j), scale * (hit - p));
        }
        if let Some(e) = end {
            let hit = if pick == Pick::End { 1.0 } else { 0.0 };
            sink(None, scale * (hit - (e - lse).exp()));
        }
    }
    logp
}

/// Draws one alternative from the available set with probability
/// proportional to exp(utility).
pub(crate) fn draw_choice<R: Rng + ?Sized>(
    utilities: &[f64],
    taken: &[bool],
    end: Option<f64>,
    rng: &mut R,
) -> Pick {
    let max = utilities
        .iter()
        .zip(taken)
        .filter(|(_, t)| !**t)
        .map(|(u, _)| *u)
        .chain(end)
        .fold(f64::NEG_INFINITY, f64::max);
    let mut picks = Vec::with_capacity(utilities.len() + 1);
    let mut weights = Vec::with_capacity(utilities.len() + 1);
    for (j, (&u, &t)) in utilities.iter().zip(taken).enumerate() {
        if !t {
            picks.push(Pick::Item(j));
            weights.push((u - max).exp());
        }
    }
    if let Some(e) = end {
        picks.push(Pick::End);
        weights.push((e - max).exp());
    }
    picks[draw_index(&weights, rng)]
}

/// Index drawn proportionally to non-negative `weights`.
pub(crate) fn draw_index<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> usize {
    WeightedIndex::new(weights)
        .expect("weights must be non-negative with a positive finite sum")
        .sample(rng)
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
