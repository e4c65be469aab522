//! Correlation analysis, measure selection, descriptive statistics and the
//! ordinal-regression feature ranking.

mod clm;

use std::collections::BTreeMap;

use serde::Serialize;

pub use clm::{fit_clm, fit_intercept_only, rank_features, ClmFit, FeatureRanking, RankedMeasure};

use crate::error::{Error, Result};
use crate::measures::MeasureId;
use crate::transcript::ScoreTable;

/// Average ranks (ties get the mean of the ranks they straddle), 1-based.
pub(crate) fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).expect("finite values"));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &position in &order[i..=j] {
            ranks[position] = rank;
        }
        i = j + 1;
    }
    ranks
}

/// Pearson correlation. Errors when either input is constant.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::TableMismatch(format!(
            "vector lengths {} and {}",
            x.len(),
            y.len()
        )));
    }
    let n = x.len() as f64;
    let mean_x = x.iter().sum::<f64>() / n;
    let mean_y = y.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut var_x = 0.0;
    let mut var_y = 0.0;
    for (a, b) in x.iter().zip(y) {
        let dx = a - mean_x;
        let dy = b - mean_y;
        cov += dx * dy;
        var_x += dx * dx;
        var_y += dy * dy;
    }
    if var_x == 0.0 || var_y == 0.0 {
        return Err(Error::ConstantInput);
    }
    Ok(cov / (var_x * var_y).sqrt())
}

/// Spearman's rank correlation with average ranks for ties: the Pearson
/// correlation of the rank vectors. Inputs must already be pairwise
/// complete.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::TableMismatch(format!(
            "vector lengths {} and {}",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 3 {
        return Err(Error::TooFewPairs {
            need: 3,
            found: x.len(),
        });
    }
    pearson(&average_ranks(x), &average_ranks(y))
}

fn mean_and_sample_sd(values: &[f64]) -> (Option<f64>, Option<f64>) {
    if values.is_empty() {
        return (None, None);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (Some(mean), None);
    }
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    (Some(mean), Some((ss / (n - 1.0)).sqrt()))
}

/// Per-measure mean and sample SD over non-missing values.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DescriptiveStats {
    pub measure: MeasureId,
    pub n: usize,
    pub mean: Option<f64>,
    pub sd: Option<f64>,
}

pub fn descriptive(table: &ScoreTable) -> Vec<DescriptiveStats> {
    table
        .columns()
        .iter()
        .enumerate()
        .map(|(col, measure)| {
            let values: Vec<f64> = table.column(col).into_iter().flatten().collect();
            let (mean, sd) = mean_and_sample_sd(&values);
            DescriptiveStats {
                measure: measure.clone(),
                n: values.len(),
                mean,
                sd,
            }
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Agreement between two score tables
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgreementConfig {
    /// Correlations above this are "strong".
    pub strong_band: f64,
    /// Correlations above this (but not strong) are "moderate".
    pub moderate_band: f64,
}

impl Default for AgreementConfig {
    fn default() -> Self {
        AgreementConfig {
            strong_band: 0.7,
            moderate_band: 0.6,
        }
    }
}

impl AgreementConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.moderate_band)
            || !(0.0..1.0).contains(&self.strong_band)
            || self.moderate_band >= self.strong_band
        {
            return Err(Error::Registry(
                "bands must satisfy 0 <= moderate < strong < 1".into(),
            ));
        }
        Ok(())
    }
}

/// Rank agreement of one measure between two sources. `rho` values are
/// absent when fewer than 3 pairs survive pairwise deletion or a side is
/// constant.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationResult {
    pub measure: MeasureId,
    pub n_pairs: usize,
    pub rho_overall: Option<f64>,
    pub rho_by_subgroup: BTreeMap<String, Option<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AgreementSummary {
    pub n_measures: usize,
    pub n_with_rho: usize,
    pub mean_rho: Option<f64>,
    pub sd_rho: Option<f64>,
    pub strong_band: f64,
    pub moderate_band: f64,
    pub n_strong: usize,
    pub n_moderate: usize,
    pub n_weak: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AgreementReport {
    pub summary: AgreementSummary,
    pub measures: Vec<CorrelationResult>,
}

fn rho_of_pairs(pairs: &[(f64, f64)]) -> Option<f64> {
    if pairs.len() < 3 {
        return None;
    }
    let x: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let y: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    spearman(&x, &y).ok()
}

/// Spearman agreement between two score tables sharing rows and columns.
/// `subgroups` maps document ids to subgroup labels for the per-subgroup
/// breakdown; an empty map skips it. Missing cells are deleted pairwise.
pub fn agreement_analysis(
    manual: &ScoreTable,
    asr: &ScoreTable,
    subgroups: &BTreeMap<String, String>,
    cfg: &AgreementConfig,
) -> Result<AgreementReport> {
    cfg.validate()?;
    // align rows by id, manual order is canonical
    let mut missing_in_asr: Vec<&str> = Vec::new();
    let mut asr_row: Vec<usize> = Vec::with_capacity(manual.n_rows());
    for id in manual.row_ids() {
        match asr.row_ids().iter().position(|other| other == id) {
            Some(row) => asr_row.push(row),
            None => missing_in_asr.push(id),
        }
    }
    let mut missing_in_manual: Vec<&str> = asr
        .row_ids()
        .iter()
        .filter(|id| !manual.row_ids().contains(id))
        .map(String::as_str)
        .collect();
    if !missing_in_asr.is_empty() || !missing_in_manual.is_empty() {
        missing_in_asr.sort_unstable();
        missing_in_manual.sort_unstable();
        return Err(Error::TableMismatch(format!(
            "rows only in first table: [{}]; rows only in second table: [{}]",
            missing_in_asr.join(", "),
            missing_in_manual.join(", ")
        )));
    }

    let mut results = Vec::with_capacity(manual.columns().len());
    for (col, measure) in manual.columns().iter().enumerate() {
        let asr_col = asr.column_index(measure).ok_or_else(|| {
            Error::TableMismatch(format!("column {measure} absent from second table"))
        })?;
        let mut pairs: Vec<(f64, f64)> = Vec::new();
        let mut by_subgroup: BTreeMap<&str, Vec<(f64, f64)>> = BTreeMap::new();
        for (row, id) in manual.row_ids().iter().enumerate() {
            let (m, a) = (manual.get(row, col), asr.get(asr_row[row], asr_col));
            if let (Some(m), Some(a)) = (m, a) {
                pairs.push((m, a));
                if let Some(subgroup) = subgroups.get(id) {
                    by_subgroup.entry(subgroup).or_default().push((m, a));
                }
            }
        }
        let rho_by_subgroup = by_subgroup
            .into_iter()
            .map(|(name, pairs)| (name.to_string(), rho_of_pairs(&pairs)))
            .collect();
        results.push(CorrelationResult {
            measure: measure.clone(),
            n_pairs: pairs.len(),
            rho_overall: rho_of_pairs(&pairs),
            rho_by_subgroup,
        });
    }
    results.sort_by(|a, b| a.measure.cmp(&b.measure));

    let rhos: Vec<f64> = results.iter().filter_map(|r| r.rho_overall).collect();
    let (mean_rho, sd_rho) = mean_and_sample_sd(&rhos);
    let n_strong = rhos.iter().filter(|r| **r > cfg.strong_band).count();
    let n_moderate = rhos
        .iter()
        .filter(|r| **r > cfg.moderate_band && **r <= cfg.strong_band)
        .count();
    let summary = AgreementSummary {
        n_measures: results.len(),
        n_with_rho: rhos.len(),
        mean_rho,
        sd_rho,
        strong_band: cfg.strong_band,
        moderate_band: cfg.moderate_band,
        n_strong,
        n_moderate,
        n_weak: rhos.len() - n_strong - n_moderate,
    };
    Ok(AgreementReport {
        summary,
        measures: results,
    })
}

// ---------------------------------------------------------------------------
// Measure selection
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelectionConfig {
    /// Pairs correlated beyond this trigger a removal.
    pub r_threshold: f64,
    /// Near-zero-variance: most-frequent / second-most-frequent value ratio.
    pub freq_ratio: f64,
    /// Near-zero-variance: distinct-value fraction.
    pub unique_frac: f64,
    /// Plain variance floor.
    pub var_eps: f64,
}

impl Default for SelectionConfig {
    fn default() -> Self {
        SelectionConfig {
            r_threshold: 0.9,
            freq_ratio: 19.0,
            unique_frac: 0.10,
            var_eps: 1e-12,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelectionResult {
    pub removed_nzv: Vec<MeasureId>,
    pub removed_corr: Vec<MeasureId>,
    pub retained: Vec<MeasureId>,
}

fn is_near_zero_variance(values: &[f64], cfg: &SelectionConfig) -> bool {
    if values.len() < 2 {
        return true;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let variance = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    if variance < cfg.var_eps {
        return true;
    }
    // frequency-ratio rule over exact value groups
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
    let mut counts: Vec<usize> = Vec::new();
    let mut run = 1usize;
    for pair in sorted.windows(2) {
        if pair[0] == pair[1] {
            run += 1;
        } else {
            counts.push(run);
            run = 1;
        }
    }
    counts.push(run);
    counts.sort_unstable_by(|a, b| b.cmp(a));
    let distinct_fraction = counts.len() as f64 / n;
    let freq_ratio = if counts.len() < 2 {
        f64::INFINITY
    } else {
        counts[0] as f64 / counts[1] as f64
    };
    freq_ratio > cfg.freq_ratio && distinct_fraction < cfg.unique_frac
}

/// Absolute pairwise Pearson correlation over pairwise-complete cells;
/// undefined correlations count as zero.
fn abs_corr(table: &ScoreTable, a: usize, b: usize) -> f64 {
    let col_a = table.column(a);
    let col_b = table.column(b);
    let mut x = Vec::new();
    let mut y = Vec::new();
    for (va, vb) in col_a.iter().zip(&col_b) {
        if let (Some(va), Some(vb)) = (va, vb) {
            x.push(*va);
            y.push(*vb);
        }
    }
    if x.len() < 3 {
        return 0.0;
    }
    pearson(&x, &y).map(f64::abs).unwrap_or(0.0)
}

/// Two-phase redundancy filter. Phase 1 removes near-zero-variance columns.
/// Phase 2 repeatedly takes the most correlated remaining pair above the
/// threshold and drops the member with the larger mean absolute correlation
/// against everything still in play.
pub fn select_measures(table: &ScoreTable, cfg: &SelectionConfig) -> Result<SelectionResult> {
    if table.columns().len() < 2 {
        return Err(Error::Table("selection needs at least two columns".into()));
    }
    if table.n_rows() < 3 {
        return Err(Error::TooFewPairs {
            need: 3,
            found: table.n_rows(),
        });
    }
    let mut removed_nzv = Vec::new();
    let mut alive: Vec<usize> = Vec::new();
    for (col, measure) in table.columns().iter().enumerate() {
        let values: Vec<f64> = table.column(col).into_iter().flatten().collect();
        if is_near_zero_variance(&values, cfg) {
            removed_nzv.push(measure.clone());
        } else {
            alive.push(col);
        }
    }
    if alive.is_empty() {
        return Err(Error::DegenerateSelection);
    }

    let all: Vec<usize> = alive.clone();
    let mut corr: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for (i, &a) in all.iter().enumerate() {
        for &b in &all[i + 1..] {
            corr.insert((a, b), abs_corr(table, a, b));
        }
    }
    let lookup = |corr: &BTreeMap<(usize, usize), f64>, a: usize, b: usize| {
        let key = if a < b { (a, b) } else { (b, a) };
        corr[&key]
    };

    let mut removed_corr = Vec::new();
    loop {
        let mut best: Option<(usize, usize, f64)> = None;
        for (i, &a) in alive.iter().enumerate() {
            for &b in &alive[i + 1..] {
                let r = lookup(&corr, a, b);
                if r > cfg.r_threshold && best.is_none_or(|(_, _, best_r)| r > best_r) {
                    best = Some((a, b, r));
                }
            }
        }
        let Some((a, b, _)) = best else { break };
        let mean_abs = |col: usize| {
            let others: Vec<f64> = alive
                .iter()
                .filter(|&&other| other != col)
                .map(|&other| lookup(&corr, col, other))
                .collect();
            others.iter().sum::<f64>() / others.len() as f64
        };
        let drop = if mean_abs(a) > mean_abs(b) { a } else { b };
        removed_corr.push(table.columns()[drop].clone());
        alive.retain(|&col| col != drop);
        if alive.is_empty() {
            return Err(Error::DegenerateSelection);
        }
    }

    Ok(SelectionResult {
        removed_nzv,
        removed_corr,
        retained: alive
            .into_iter()
            .map(|col| table.columns()[col].clone())
            .collect(),
    })
}
