//! Minimal-effects testing for zone merging decisions.
//!
//! Two marginal-return series stay separate only when their paired mean
//! difference demonstrably exceeds a smallest effect size of interest.
//! Pairing within team-matches removes team and fixture effects by
//! construction, so a one-sample t-test on the differences suffices.

use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::aggregation::MarginalReturnSeries;
use crate::error::{Error, Result};

/// Threshold (smallest effect of interest, in match-return units) and
/// significance level for the merge decision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinimalEffectConfig {
    pub threshold: f64,
    pub alpha: f64,
}

impl MinimalEffectConfig {
    pub fn new(threshold: f64, alpha: f64) -> Result<Self> {
        if threshold <= 0.0 {
            return Err(Error::Config(format!(
                "minimal-effect threshold must be positive, got {threshold}"
            )));
        }
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::Config(format!(
                "alpha must lie in (0, 1), got {alpha}"
            )));
        }
        Ok(MinimalEffectConfig { threshold, alpha })
    }
}

impl Default for MinimalEffectConfig {
    fn default() -> Self {
        MinimalEffectConfig {
            threshold: 1.0,
            alpha: 0.05,
        }
    }
}

/// Full test output; `t`/`p` are absent when the zero-variance shortcut fires.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinimalEffectOutcome {
    pub n: usize,
    pub mean_diff: f64,
    pub sd_diff: f64,
    pub t: Option<f64>,
    pub p: Option<f64>,
    /// True: the effect exceeds the threshold, keep the groups separate.
    pub separate: bool,
}

/// Runs the minimal-effects test on paired differences.
///
/// H0: |mean(d)| <= threshold, H1: |mean(d)| > threshold, via
/// `t = (|mean(d)| - threshold) / (sd(d) / sqrt(n))` against the upper
/// alpha quantile of Student's t with n-1 degrees of freedom.
pub fn minimal_effect_outcome(
    diffs: &[f64],
    config: &MinimalEffectConfig,
) -> Result<MinimalEffectOutcome> {
    let n = diffs.len();
    if n < 2 {
        return Err(Error::InsufficientData(format!(
            "minimal-effects test needs at least 2 paired observations, got {n}"
        )));
    }
    let nf = n as f64;
    let mean = diffs.iter().sum::<f64>() / nf;
    let var = diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (nf - 1.0);
    let sd = var.sqrt();

    if sd == 0.0 {
        // Degenerate sample: decide directly against the threshold.
        return Ok(MinimalEffectOutcome {
            n,
            mean_diff: mean,
            sd_diff: sd,
            t: None,
            p: None,
            separate: mean.abs() > config.threshold,
        });
    }

    let t = (mean.abs() - config.threshold) / (sd / nf.sqrt());
    let dist = StudentsT::new(0.0, 1.0, nf - 1.0)
        .map_err(|e| Error::Config(format!("t-distribution: {e}")))?;
    let p = 1.0 - dist.cdf(t);
    Ok(MinimalEffectOutcome {
        n,
        mean_diff: mean,
        sd_diff: sd,
        t: Some(t),
        p: Some(p),
        separate: p < config.alpha,
    })
}

/// Paired differences of two aligned series.
pub fn paired_diffs(a: &MarginalReturnSeries, b: &MarginalReturnSeries) -> Result<Vec<f64>> {
    if a.observations.len() != b.observations.len() {
        return Err(Error::ContractViolation(
            "series must carry the same team-match observations".into(),
        ));
    }
    a.observations
        .iter()
        .zip(&b.observations)
        .map(|(oa, ob)| {
            if oa.match_id != ob.match_id || oa.team_id != ob.team_id {
                return Err(Error::ContractViolation(
                    "series observations are not aligned on (match, team)".into(),
                ));
            }
            Ok(oa.value - ob.value)
        })
        .collect()
}

/// True when the two series must stay separate (their paired difference
/// demonstrably exceeds the smallest effect of interest).
pub fn minimal_effect_separate(
    a: &MarginalReturnSeries,
    b: &MarginalReturnSeries,
    config: &MinimalEffectConfig,
) -> Result<bool> {
    let diffs = paired_diffs(a, b)?;
    Ok(minimal_effect_outcome(&diffs, config)?.separate)
}
