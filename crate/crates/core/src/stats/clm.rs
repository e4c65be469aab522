//! Proportional-odds cumulative link model with a logit link, fitted by
//! damped Newton ascent: P(Y <= j | x) = logistic(theta_j - beta * x).
//!
//! Thresholds are kept strictly increasing by optimizing in a monotone
//! parameterization (theta_1 = a_1, theta_j = theta_{j-1} + exp(a_j)). The
//! predictor is z-scored before fitting, so the feature-importance score
//! FI = sum_j |theta_j| is invariant to affine rescaling of the input.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::measures::MeasureId;
use crate::transcript::ScoreTable;

const GRAD_TOL: f64 = 1e-8;
const MAX_ITER: usize = 100;
/// |beta| beyond this on a standardized predictor signals separation.
const BETA_CAP: f64 = 30.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClmFit {
    /// Strictly increasing cut points theta_1 < ... < theta_{J-1}.
    pub thresholds: Vec<f64>,
    /// Slope on the standardized predictor; capped at +-30 when flagged
    /// non-converged (separation).
    pub beta: f64,
    pub loglik: f64,
    pub converged: bool,
    pub n_iter: usize,
    /// Feature importance: sum of absolute threshold coefficients.
    pub fi: f64,
}

fn sigma(eta: f64) -> f64 {
    if eta >= 0.0 {
        1.0 / (1.0 + (-eta).exp())
    } else {
        let e = eta.exp();
        e / (1.0 + e)
    }
}

fn dsigma(eta: f64) -> f64 {
    let s = sigma(eta);
    s * (1.0 - s)
}

struct Problem<'a> {
    x: &'a [f64],
    y: &'a [usize],
    j: usize,
    with_beta: bool,
}

impl Problem<'_> {
    fn n_params(&self) -> usize {
        self.j - 1 + usize::from(self.with_beta)
    }

    fn thresholds(&self, phi: &[f64]) -> Vec<f64> {
        let mut thresholds = Vec::with_capacity(self.j - 1);
        let mut acc = phi[0];
        thresholds.push(acc);
        for a in &phi[1..self.j - 1] {
            acc += a.exp();
            thresholds.push(acc);
        }
        thresholds
    }

    fn beta(&self, phi: &[f64]) -> f64 {
        if self.with_beta {
            phi[self.j - 1]
        } else {
            0.0
        }
    }

    fn loglik(&self, phi: &[f64]) -> f64 {
        let thresholds = self.thresholds(phi);
        let beta = self.beta(phi);
        let mut ll = 0.0;
        for (x, &y) in self.x.iter().zip(self.y) {
            let upper = if y < self.j {
                sigma(thresholds[y - 1] - beta * x)
            } else {
                1.0
            };
            let lower = if y > 1 {
                sigma(thresholds[y - 2] - beta * x)
            } else {
                0.0
            };
            ll += (upper - lower).max(1e-300).ln();
        }
        ll
    }

    fn gradient(&self, phi: &[f64]) -> Vec<f64> {
        let thresholds = self.thresholds(phi);
        let beta = self.beta(phi);
        let mut g_theta = vec![0.0; self.j - 1];
        let mut g_beta = 0.0;
        for (x, &y) in self.x.iter().zip(self.y) {
            let (upper, f_upper) = if y < self.j {
                let eta = thresholds[y - 1] - beta * x;
                (sigma(eta), dsigma(eta))
            } else {
                (1.0, 0.0)
            };
            let (lower, f_lower) = if y > 1 {
                let eta = thresholds[y - 2] - beta * x;
                (sigma(eta), dsigma(eta))
            } else {
                (0.0, 0.0)
            };
            let p = (upper - lower).max(1e-300);
            if y < self.j {
                g_theta[y - 1] += f_upper / p;
            }
            if y > 1 {
                g_theta[y - 2] -= f_lower / p;
            }
            g_beta -= x * (f_upper - f_lower) / p;
        }
        // chain rule into the monotone parameterization:
        // d theta_k / d a_0 = 1, d theta_k / d a_m = exp(a_m) for 1 <= m <= k
        let mut suffix = vec![0.0; self.j - 1];
        let mut acc = 0.0;
        for k in (0..self.j - 1).rev() {
            acc += g_theta[k];
            suffix[k] = acc;
        }
        let mut g = vec![0.0; self.n_params()];
        g[0] = suffix[0];
        for m in 1..self.j - 1 {
            g[m] = phi[m].exp() * suffix[m];
        }
        if self.with_beta {
            g[self.j - 1] = g_beta;
        }
        g
    }

    /// Central finite differences of the analytic gradient, symmetrized.
    #[allow(clippy::needless_range_loop)] // indexed form mirrors the matrix algebra
    fn hessian(&self, phi: &[f64]) -> Vec<Vec<f64>> {
        let p = self.n_params();
        let mut h = vec![vec![0.0; p]; p];
        let mut probe = phi.to_vec();
        for i in 0..p {
            let step = 1e-5 * phi[i].abs().max(1.0);
            probe[i] = phi[i] + step;
            let plus = self.gradient(&probe);
            probe[i] = phi[i] - step;
            let minus = self.gradient(&probe);
            probe[i] = phi[i];
            for q in 0..p {
                h[i][q] = (plus[q] - minus[q]) / (2.0 * step);
            }
        }
        for i in 0..p {
            for q in i + 1..p {
                let avg = (h[i][q] + h[q][i]) / 2.0;
                h[i][q] = avg;
                h[q][i] = avg;
            }
        }
        h
    }
}

#[allow(clippy::needless_range_loop)] // indexed form mirrors the matrix algebra
fn solve_linear(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &k| {
            a[i][col]
                .abs()
                .partial_cmp(&a[k][col].abs())
                .expect("finite matrix")
        })?;
        if a[pivot][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let factor = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] -= factor * a[col][k];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut sum = b[row];
        for k in row + 1..n {
            sum -= a[row][k] * x[k];
        }
        x[row] = sum / a[row][row];
    }
    Some(x)
}

/// Empirical cumulative-logit thresholds; also the exact intercept-only MLE.
fn initial_phi(y: &[usize], j: usize, with_beta: bool) -> Vec<f64> {
    let n = y.len() as f64;
    let mut counts = vec![0usize; j];
    for &label in y {
        counts[label - 1] += 1;
    }
    let mut thresholds = Vec::with_capacity(j - 1);
    let mut cum = 0.0;
    for &count in counts.iter().take(j - 1) {
        cum += count as f64;
        let p = cum / n;
        thresholds.push((p / (1.0 - p)).ln());
    }
    let mut phi = Vec::with_capacity(j - 1 + usize::from(with_beta));
    phi.push(thresholds[0]);
    for k in 1..j - 1 {
        phi.push((thresholds[k] - thresholds[k - 1]).ln());
    }
    if with_beta {
        phi.push(0.0);
    }
    phi
}

struct Optimum {
    phi: Vec<f64>,
    loglik: f64,
    converged: bool,
    n_iter: usize,
}

fn optimize(problem: &Problem) -> Optimum {
    let mut phi = initial_phi(problem.y, problem.j, problem.with_beta);
    let mut ll = problem.loglik(&phi);
    for iter in 0..MAX_ITER {
        let g = problem.gradient(&phi);
        if g.iter().all(|v| v.abs() < GRAD_TOL) {
            return Optimum {
                phi,
                loglik: ll,
                converged: true,
                n_iter: iter,
            };
        }
        let neg_g: Vec<f64> = g.iter().map(|v| -v).collect();
        let mut direction = solve_linear(problem.hessian(&phi), neg_g).unwrap_or_else(|| g.clone());
        let slope: f64 = direction.iter().zip(&g).map(|(d, g)| d * g).sum();
        if slope <= 0.0 {
            direction = g.clone();
        }
        // damped step: halve until the log-likelihood does not decrease
        let mut t = 1.0;
        let mut stepped = false;
        for _ in 0..60 {
            let trial: Vec<f64> = phi.iter().zip(&direction).map(|(p, d)| p + t * d).collect();
            let trial_ll = problem.loglik(&trial);
            if trial_ll.is_finite() && trial_ll >= ll {
                phi = trial;
                ll = trial_ll;
                stepped = true;
                break;
            }
            t /= 2.0;
        }
        if !stepped {
            return Optimum {
                phi,
                loglik: ll,
                converged: false,
                n_iter: iter + 1,
            };
        }
        if problem.with_beta && phi[problem.j - 1].abs() > BETA_CAP {
            return Optimum {
                phi,
                loglik: ll,
                converged: false,
                n_iter: iter + 1,
            };
        }
    }
    Optimum {
        phi,
        loglik: ll,
        converged: false,
        n_iter: MAX_ITER,
    }
}

fn validate_labels(y: &[usize]) -> Result<usize> {
    if y.is_empty() {
        return Err(Error::SingleClass);
    }
    let j = *y.iter().max().expect("non-empty");
    if y.contains(&0) {
        return Err(Error::MissingClass(0));
    }
    if j < 2 {
        return Err(Error::SingleClass);
    }
    for class in 1..=j {
        if !y.contains(&class) {
            return Err(Error::MissingClass(class));
        }
    }
    Ok(j)
}

fn standardize(x: &[f64]) -> Result<Vec<f64>> {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let ss: f64 = x.iter().map(|v| (v - mean) * (v - mean)).sum();
    let sd = (ss / (n - 1.0)).sqrt();
    // the relative floor keeps rounding residue of a constant column from
    // passing as signal
    if x.len() < 2 || sd <= 1e-12 * (1.0 + mean.abs()) {
        return Err(Error::ConstantPredictor);
    }
    Ok(x.iter().map(|v| (v - mean) / sd).collect())
}

/// Fit the proportional-odds model of ordinal labels `y` (1..=J, every class
/// present) on predictor `x`, standardized internally.
pub fn fit_clm(x: &[f64], y: &[usize]) -> Result<ClmFit> {
    let j = validate_labels(y)?;
    if x.len() != y.len() {
        return Err(Error::TableMismatch(format!(
            "{} predictor values for {} labels",
            x.len(),
            y.len()
        )));
    }
    let z = standardize(x)?;
    let problem = Problem {
        x: &z,
        y,
        j,
        with_beta: true,
    };
    let optimum = optimize(&problem);
    let thresholds = problem.thresholds(&optimum.phi);
    let mut beta = problem.beta(&optimum.phi);
    if !optimum.converged {
        beta = beta.clamp(-BETA_CAP, BETA_CAP);
    }
    Ok(ClmFit {
        fi: thresholds.iter().map(|t| t.abs()).sum(),
        thresholds,
        beta,
        loglik: optimum.loglik,
        converged: optimum.converged,
        n_iter: optimum.n_iter,
    })
}

/// Fit thresholds only (beta fixed at zero). The optimum is the vector of
/// empirical cumulative-logit thresholds.
pub fn fit_intercept_only(y: &[usize]) -> Result<ClmFit> {
    let j = validate_labels(y)?;
    let x = vec![0.0; y.len()];
    let problem = Problem {
        x: &x,
        y,
        j,
        with_beta: false,
    };
    let optimum = optimize(&problem);
    let thresholds = problem.thresholds(&optimum.phi);
    Ok(ClmFit {
        fi: thresholds.iter().map(|t| t.abs()).sum(),
        thresholds,
        beta: 0.0,
        loglik: optimum.loglik,
        converged: optimum.converged,
        n_iter: optimum.n_iter,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankedMeasure {
    pub measure: MeasureId,
    pub fi: f64,
    pub beta: f64,
    pub converged: bool,
    pub above_mean: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeatureRanking {
    /// Measures sorted by descending feature importance.
    pub ranked: Vec<RankedMeasure>,
    /// The "red line": mean FI over ranked measures.
    pub mean_fi: Option<f64>,
    /// Measures that could not be fitted, with the reason.
    pub skipped: Vec<(MeasureId, String)>,
}

/// Fit one model per measure column against ordinal labels and rank by
/// feature importance. `labels` maps document ids to raw ordinal values
/// (e.g. grades); distinct values are mapped onto 1..=J in sorted order.
/// Measures fall back to complete-case rows; columns with fewer than J+2
/// complete rows, a constant predictor or a lost class are skipped.
pub fn rank_features(table: &ScoreTable, labels: &BTreeMap<String, i64>) -> Result<FeatureRanking> {
    let labeled_rows: Vec<(usize, i64)> = table
        .row_ids()
        .iter()
        .enumerate()
        .filter_map(|(row, id)| labels.get(id).map(|&raw| (row, raw)))
        .collect();
    let mut distinct: Vec<i64> = labeled_rows.iter().map(|(_, raw)| *raw).collect();
    distinct.sort_unstable();
    distinct.dedup();
    let j = distinct.len();
    if j < 2 {
        return Err(Error::SingleClass);
    }
    let ordinal_of = |raw: i64| distinct.binary_search(&raw).expect("known label") + 1;

    let fits: Vec<(MeasureId, std::result::Result<ClmFit, String>)> = table
        .columns()
        .par_iter()
        .enumerate()
        .map(|(col, measure)| {
            let mut x = Vec::new();
            let mut y = Vec::new();
            for &(row, raw) in &labeled_rows {
                if let Some(value) = table.get(row, col) {
                    x.push(value);
                    y.push(ordinal_of(raw));
                }
            }
            if x.len() < j + 2 {
                return (
                    measure.clone(),
                    Err(format!(
                        "{} complete rows, need at least {}",
                        x.len(),
                        j + 2
                    )),
                );
            }
            match fit_clm(&x, &y) {
                Ok(fit) => (measure.clone(), Ok(fit)),
                Err(e) => (measure.clone(), Err(e.to_string())),
            }
        })
        .collect();

    let mut ranked = Vec::new();
    let mut skipped = Vec::new();
    for (measure, outcome) in fits {
        match outcome {
            Ok(fit) => ranked.push(RankedMeasure {
                measure,
                fi: fit.fi,
                beta: fit.beta,
                converged: fit.converged,
                above_mean: false,
            }),
            Err(reason) => skipped.push((measure, reason)),
        }
    }
    let mean_fi = if ranked.is_empty() {
        None
    } else {
        Some(ranked.iter().map(|r| r.fi).sum::<f64>() / ranked.len() as f64)
    };
    if let Some(mean) = mean_fi {
        for entry in &mut ranked {
            entry.above_mean = entry.fi > mean;
        }
    }
    ranked.sort_by(|a, b| {
        b.fi.partial_cmp(&a.fi)
            .expect("finite fi")
            .then_with(|| a.measure.cmp(&b.measure))
    });
    Ok(FeatureRanking {
        ranked,
        mean_fi,
        skipped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn logit(p: f64) -> f64 {
        (p / (1.0 - p)).ln()
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let x = vec![0.3, -1.2, 0.8, 2.0, -0.5, 1.1, -1.7, 0.0, 0.9, -0.2];
        let y = vec![1, 1, 2, 3, 1, 3, 2, 2, 3, 1];
        let problem = Problem {
            x: &x,
            y: &y,
            j: 3,
            with_beta: true,
        };
        let phi = vec![-0.4, -0.1, 0.35];
        let g = problem.gradient(&phi);
        let mut probe = phi.clone();
        for (i, analytic) in g.iter().enumerate() {
            let h = 1e-6;
            probe[i] = phi[i] + h;
            let up = problem.loglik(&probe);
            probe[i] = phi[i] - h;
            let down = problem.loglik(&probe);
            probe[i] = phi[i];
            let numeric = (up - down) / (2.0 * h);
            assert!(
                (analytic - numeric).abs() < 1e-5,
                "param {i}: {analytic} vs {numeric}"
            );
        }
    }

    #[test]
    fn balanced_intercept_only_is_analytic() {
        let y: Vec<usize> = (0..30).map(|i| i % 3 + 1).collect();
        let fit = fit_intercept_only(&y).unwrap();
        assert!(fit.converged);
        assert!((fit.thresholds[0] - logit(1.0 / 3.0)).abs() < 1e-8);
        assert!((fit.thresholds[1] - logit(2.0 / 3.0)).abs() < 1e-8);
        assert!((fit.fi - 2.0 * (2.0f64).ln()).abs() < 1e-8);
    }

    #[test]
    fn unbalanced_intercept_only_matches_cumulative_logits() {
        let mut y = Vec::new();
        y.extend(std::iter::repeat_n(1, 7));
        y.extend(std::iter::repeat_n(2, 2));
        y.extend(std::iter::repeat_n(3, 5));
        y.extend(std::iter::repeat_n(4, 6));
        let fit = fit_intercept_only(&y).unwrap();
        let n = 20.0;
        for (k, cum) in [7.0, 9.0, 14.0].iter().enumerate() {
            assert!((fit.thresholds[k] - logit(cum / n)).abs() < 1e-6, "{k}");
        }
    }

    #[test]
    fn independent_predictor_gives_null_slope() {
        // x is +-1 balanced within every class, so beta = 0 is stationary
        let mut x = Vec::new();
        let mut y = Vec::new();
        for class in 1..=3usize {
            for sign in [-1.0f64, 1.0] {
                for _ in 0..5 {
                    x.push(sign);
                    y.push(class);
                }
            }
        }
        let fit = fit_clm(&x, &y).unwrap();
        assert!(fit.converged);
        assert!(fit.beta.abs() < 1e-6, "beta {}", fit.beta);
        assert!((fit.thresholds[0] - logit(1.0 / 3.0)).abs() < 1e-6);
        assert!((fit.thresholds[1] - logit(2.0 / 3.0)).abs() < 1e-6);
        assert!((fit.fi - 1.386).abs() < 1e-3);
    }

    #[test]
    fn separation_caps_beta_and_flags() {
        let x: Vec<f64> = (0..12).map(|i| i as f64).collect();
        let y: Vec<usize> = (0..12).map(|i| i / 4 + 1).collect();
        let fit = fit_clm(&x, &y).unwrap();
        assert!(!fit.converged);
        assert!(fit.beta.abs() <= BETA_CAP + 1e-9);
        for pair in fit.thresholds.windows(2) {
            assert!(pair[0] < pair[1]);
        }
    }

    #[test]
    fn fi_is_invariant_to_affine_transforms_and_sign() {
        let x = vec![2.0, 5.0, 3.0, 8.0, 1.0, 9.0, 4.0, 7.0, 6.0, 2.5, 5.5, 7.5];
        let y = vec![1, 2, 1, 3, 1, 3, 2, 3, 2, 1, 2, 3];
        let base = fit_clm(&x, &y).unwrap();
        let scaled: Vec<f64> = x.iter().map(|v| 3.0 * v - 7.0).collect();
        let scaled_fit = fit_clm(&scaled, &y).unwrap();
        assert!((base.fi - scaled_fit.fi).abs() < 1e-6);
        let flipped: Vec<f64> = x.iter().map(|v| -v).collect();
        let flipped_fit = fit_clm(&flipped, &y).unwrap();
        assert!((base.fi - flipped_fit.fi).abs() < 1e-6);
        assert!((base.beta + flipped_fit.beta).abs() < 1e-6);
    }

    #[test]
    fn loglik_never_decreases_from_init() {
        let x = vec![0.1, 0.9, 0.4, 0.6, 0.2, 0.8, 0.3, 0.7, 0.5, 0.45];
        let y = vec![1, 3, 2, 2, 1, 3, 1, 3, 2, 2];
        let j = 3;
        let problem = Problem {
            x: &x,
            y: &y,
            j,
            with_beta: true,
        };
        let init_ll = problem.loglik(&initial_phi(&y, j, true));
        let fit = fit_clm(&x, &y).unwrap();
        assert!(fit.loglik >= init_ll - 1e-12);
    }

    #[test]
    fn label_validation() {
        assert!(matches!(
            fit_intercept_only(&[1, 1, 1]),
            Err(Error::SingleClass)
        ));
        assert!(matches!(
            fit_intercept_only(&[1, 3, 1, 3]),
            Err(Error::MissingClass(2))
        ));
        assert!(matches!(
            fit_clm(&[1.0, 1.0, 1.0, 1.0], &[1, 2, 1, 2]),
            Err(Error::ConstantPredictor)
        ));
    }

    fn toy_table() -> (ScoreTable, BTreeMap<String, i64>) {
        let n = 18;
        let ids: Vec<String> = (0..n).map(|i| format!("d{i}")).collect();
        let mut labels = BTreeMap::new();
        let mut rows = Vec::new();
        for i in 0..n {
            let grade = (i % 3) as i64 + 10;
            labels.insert(format!("d{i}"), grade);
            let signal = grade as f64 + (i as f64 * 0.37).sin();
            let affine = -2.0 * signal + 11.0;
            let noise = ((i * 7919) % 13) as f64;
            let constant = 4.2;
            rows.push(vec![
                Some(signal),
                Some(affine),
                Some(noise),
                Some(constant),
            ]);
        }
        let table = ScoreTable::new(
            ids,
            ["signal", "affine", "noise", "constant"]
                .iter()
                .map(|c| MeasureId::new(*c))
                .collect(),
            rows,
        )
        .unwrap();
        (table, labels)
    }

    #[test]
    fn ranking_orders_by_fi_and_skips_constants() {
        let (table, labels) = toy_table();
        let ranking = rank_features(&table, &labels).unwrap();
        assert_eq!(ranking.skipped.len(), 1);
        assert_eq!(ranking.skipped[0].0.as_str(), "constant");
        assert_eq!(ranking.ranked.len(), 3);
        for pair in ranking.ranked.windows(2) {
            assert!(pair[0].fi >= pair[1].fi);
        }
        // an affine image of the same signal ranks identically
        let signal = ranking
            .ranked
            .iter()
            .find(|r| r.measure.as_str() == "signal")
            .unwrap();
        let affine = ranking
            .ranked
            .iter()
            .find(|r| r.measure.as_str() == "affine")
            .unwrap();
        assert!((signal.fi - affine.fi).abs() < 1e-6);
        let mean = ranking.mean_fi.unwrap();
        for entry in &ranking.ranked {
            assert_eq!(entry.above_mean, entry.fi > mean);
        }
    }
}
