use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::EvalError;

/// Whether annotators were shown model highlights.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Condition {
    HighlightsOn,
    HighlightsOff,
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Condition::HighlightsOn => "HIGHLIGHTS_ON",
            Condition::HighlightsOff => "HIGHLIGHTS_OFF",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Kappa {
    pub kappa: f64,
    pub raters_per_item: usize,
    pub items_used: usize,
    /// Items whose rating count differed from `raters_per_item`.
    pub items_dropped: usize,
}

/// Fleiss' kappa over items rated by the same number of raters.
///
/// The rater count is the most common count among items (the larger on
/// ties); other items are dropped and counted. Computed in integers as
/// `[T(S - T) - Q(n - 1)] / [(n - 1)(T^2 - Q)]` with `T = N n`,
/// `S = sum n_ij^2` and `Q = sum_j (sum_i n_ij)^2`, which equals the usual
/// `(P - Pe) / (1 - Pe)`.
pub fn fleiss_kappa<C: Ord>(items: &[Vec<C>]) -> Result<Kappa, EvalError> {
    let mut sizes: BTreeMap<usize, usize> = BTreeMap::new();
    for it in items {
        *sizes.entry(it.len()).or_insert(0) += 1;
    }
    let n = sizes
        .iter()
        .max_by_key(|(size, count)| (**count, **size))
        .map(|(size, _)| *size)
        .ok_or(EvalError::Empty)?;
    if n < 2 {
        return Err(EvalError::Empty);
    }
    let used: Vec<&Vec<C>> = items.iter().filter(|it| it.len() == n).collect();

    let mut totals: BTreeMap<&C, i128> = BTreeMap::new();
    let mut s: i128 = 0;
    for it in &used {
        let mut counts: BTreeMap<&C, i128> = BTreeMap::new();
        for c in it.iter() {
            *counts.entry(c).or_insert(0) += 1;
        }
        for (c, k) in counts {
            s += k * k;
            *totals.entry(c).or_insert(0) += k;
        }
    }
    let n_i = n as i128;
    let t = used.len() as i128 * n_i;
    let q: i128 = totals.values().map(|c| c * c).sum();
    let num = t * (s - t) - q * (n_i - 1);
    let den = (n_i - 1) * (t * t - q);
    let kappa = if den == 0 {
        if num == 0 {
            1.0
        } else {
            return Err(EvalError::Degenerate);
        }
    } else {
        num as f64 / den as f64
    };
    Ok(Kappa {
        kappa,
        raters_per_item: n,
        items_used: used.len(),
        items_dropped: items.len() - used.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimingStats {
    pub count: usize,
    pub mean_seconds: f64,
    pub median_seconds: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TimingSummary {
    pub per_condition: BTreeMap<Condition, TimingStats>,
    /// Mean ON time over mean OFF time.
    pub on_off_ratio: Option<f64>,
    /// `1 - on_off_ratio`: 0.2 means 20% faster with highlights.
    pub speedup: Option<f64>,
}

fn median(sorted: &[f64]) -> f64 {
    let m = sorted.len() / 2;
    if sorted.len() % 2 == 1 {
        sorted[m]
    } else {
        (sorted[m - 1] + sorted[m]) / 2.0
    }
}

/// Per-condition mean and median seconds per judgment.
pub fn timing_summary(judgments: &[(Condition, f64)]) -> TimingSummary {
    let mut by: HashMap<Condition, Vec<f64>> = HashMap::new();
    for (c, secs) in judgments {
        by.entry(*c).or_default().push(*secs);
    }
    let per_condition: BTreeMap<Condition, TimingStats> = by
        .into_iter()
        .map(|(c, mut v)| {
            v.sort_by(f64::total_cmp);
            let stats = TimingStats {
                count: v.len(),
                mean_seconds: v.iter().sum::<f64>() / v.len() as f64,
                median_seconds: median(&v),
            };
            (c, stats)
        })
        .collect();
    let ratio = match (
        per_condition.get(&Condition::HighlightsOn),
        per_condition.get(&Condition::HighlightsOff),
    ) {
        (Some(on), Some(off)) if off.mean_seconds > 0.0 => Some(on.mean_seconds / off.mean_seconds),
        _ => None,
    };
    TimingSummary {
        per_condition,
        on_off_ratio: ratio,
        speedup: ratio.map(|r| 1.0 - r),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgreementReport {
    pub condition: Condition,
    pub fleiss_kappa: Option<f64>,
    pub raters_per_item: usize,
    pub item_count: usize,
    pub items_dropped: usize,
    pub mean_seconds_per_item: Option<f64>,
}
