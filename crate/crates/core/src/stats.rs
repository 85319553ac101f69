//! Batch summaries, one-tailed two-sample tests and performance indicators.
//!
//! Test samples are per-run evaluation means. Both tests are one-tailed with
//! a hypothesised difference `d_h`: significance means that sample `a`
//! exceeds sample `b` by more than `d_h`.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal, StudentsT};

use crate::econ::{self, EconParams};
use crate::error::{Error, Result};
use crate::sim::RunResult;

pub const SIGNIFICANCE_LEVEL: f64 = 0.05;

/// Per-side sample size from which the rank-sum test switches to the normal
/// approximation.
pub const RANK_SUM_NORMAL_MIN: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleSummary {
    pub n: usize,
    pub mean: f64,
    /// Sample standard deviation (`n − 1` denominator); 0 for `n < 2`.
    pub sd: f64,
    /// Standardised third central moment `m3 / m2^{3/2}`.
    pub skewness: f64,
    /// Set when the sample has no spread, so skewness is undefined (reported as 0).
    pub degenerate: bool,
}

pub fn summarize(samples: &[f64]) -> Result<SampleSummary> {
    if samples.is_empty() {
        return Err(Error::EmptySample("summarize"));
    }
    let n = samples.len();
    let nf = n as f64;
    let mean = samples.iter().sum::<f64>() / nf;
    let (m2, m3) = samples.iter().fold((0.0, 0.0), |(m2, m3), &x| {
        let d = x - mean;
        (m2 + d * d, m3 + d * d * d)
    });
    let sd = if n >= 2 { (m2 / (nf - 1.0)).sqrt() } else { 0.0 };
    let (m2, m3) = (m2 / nf, m3 / nf);
    let degenerate = !(m2 > 0.0);
    let skewness = if degenerate { 0.0 } else { m3 / m2.powf(1.5) };
    Ok(SampleSummary {
        n,
        mean,
        sd,
        skewness,
        degenerate,
    })
}

fn mean_var(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let var = x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

/// Welch statistic and Welch–Satterthwaite degrees of freedom for
/// `mean(a) − mean(b) − d_h`. `None` when both variances vanish.
pub fn welch_statistic(a: &[f64], b: &[f64], d_h: f64) -> Option<(f64, f64)> {
    let (ma, va) = mean_var(a);
    let (mb, vb) = mean_var(b);
    let (sa, sb) = (va / a.len() as f64, vb / b.len() as f64);
    let se2 = sa + sb;
    if !(se2 > 0.0) {
        return None;
    }
    let t = (ma - mb - d_h) / se2.sqrt();
    let df = se2 * se2 / (sa * sa / (a.len() as f64 - 1.0) + sb * sb / (b.len() as f64 - 1.0));
    Some((t, df))
}

/// One-tailed Welch t-test of `H1: mean(a) − mean(b) > d_h`; returns the upper-tail p-value.
pub fn welch_one_tailed(a: &[f64], b: &[f64], d_h: f64) -> Result<f64> {
    if a.len() < 2 {
        return Err(Error::SampleTooSmall { name: "a", required: 2, got: a.len() });
    }
    if b.len() < 2 {
        return Err(Error::SampleTooSmall { name: "b", required: 2, got: b.len() });
    }
    match welch_statistic(a, b, d_h) {
        Some((t, df)) => {
            let dist = StudentsT::new(0.0, 1.0, df).map_err(|e| Error::invalid("df", e.to_string()))?;
            Ok(dist.sf(t))
        }
        None => {
            let (ma, _) = mean_var(a);
            let (mb, _) = mean_var(b);
            Ok(if ma - mb > d_h { 0.0 } else { 1.0 })
        }
    }
}

/// Midranks (1-based) of `values`, tied values sharing the mean of their ranks.
pub fn midranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // ranks start+1 ..= end
        let rank = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = rank;
        }
        start = end;
    }
    ranks
}

/// One-tailed Wilcoxon rank-sum test of `H1: a` is shifted above `b + d_h`.
///
/// Ranks the pooled sample `a ∪ (b + d_h)` with midranks. With at least
/// [`RANK_SUM_NORMAL_MIN`] observations per side the p-value comes from the
/// tie-corrected normal approximation with continuity correction; below that
/// it is the exact permutation probability `P(W ≥ W_obs)`.
pub fn wilcoxon_rank_sum_shifted(a: &[f64], b: &[f64], d_h: f64) -> Result<f64> {
    if a.is_empty() {
        return Err(Error::EmptySample("a"));
    }
    if b.is_empty() {
        return Err(Error::EmptySample("b"));
    }
    let pooled: Vec<f64> = a.iter().copied().chain(b.iter().map(|x| x + d_h)).collect();
    if pooled.iter().all(|&x| x == pooled[0]) {
        return Ok(0.5);
    }
    let ranks = midranks(&pooled);
    if a.len() >= RANK_SUM_NORMAL_MIN && b.len() >= RANK_SUM_NORMAL_MIN {
        Ok(rank_sum_normal(&ranks, a.len()))
    } else {
        Ok(rank_sum_exact(&ranks, a.len()))
    }
}

fn rank_sum_normal(ranks: &[f64], na: usize) -> f64 {
    let n = ranks.len() as f64;
    let (naf, nbf) = (na as f64, n - na as f64);
    let w: f64 = ranks[..na].iter().sum();
    let expected = naf * (n + 1.0) / 2.0;
    // tie correction Σ(t³ − t)
    let mut sorted = ranks.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut ties = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i + 1;
        while j < sorted.len() && sorted[j] == sorted[i] {
            j += 1;
        }
        let t = (j - i) as f64;
        ties += t * t * t - t;
        i = j;
    }
    let var = naf * nbf / 12.0 * ((n + 1.0) - ties / (n * (n - 1.0)));
    let z = (w - expected - 0.5) / var.sqrt();
    Normal::standard().sf(z)
}

/// Exact `P(W ≥ W_obs)` over all equally likely assignments of the pooled
/// midranks to sample `a`, by dynamic programming over doubled ranks.
fn rank_sum_exact(ranks: &[f64], na: usize) -> f64 {
    let doubled: Vec<usize> = ranks.iter().map(|r| (2.0 * r).round() as usize).collect();
    let observed: usize = doubled[..na].iter().sum();
    let max_sum: usize = doubled.iter().sum();
    // ways[k][s]: number of size-k subsets with doubled rank sum s
    let mut ways = vec![vec![0.0f64; max_sum + 1]; na + 1];
    ways[0][0] = 1.0;
    for (seen, &r) in doubled.iter().enumerate() {
        for k in (1..=na.min(seen + 1)).rev() {
            let (lower, upper) = ways.split_at_mut(k);
            let prev = &lower[k - 1];
            let cur = &mut upper[0];
            for s in (r..=max_sum).rev() {
                cur[s] += prev[s - r];
            }
        }
    }
    let total: f64 = ways[na].iter().sum();
    let tail: f64 = ways[na][observed..].iter().sum();
    (tail / total).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Indicators {
    /// `profit / Π_HQ*`.
    pub fpi: f64,
    /// `(profit − Π_HQ^sb) / Π_HQ^sb`.
    pub spi: f64,
    /// `(profit − baseline) / baseline`.
    pub bpi: f64,
}

pub fn indicators(profit_mean: f64, hq_star: f64, hq_sb: f64, baseline_mean: f64) -> Result<Indicators> {
    if hq_star == 0.0 {
        return Err(Error::ZeroDenominator("first-best indicator"));
    }
    if hq_sb == 0.0 {
        return Err(Error::ZeroDenominator("second-best indicator"));
    }
    if baseline_mean == 0.0 {
        return Err(Error::ZeroDenominator("baseline indicator"));
    }
    Ok(Indicators {
        fpi: profit_mean / hq_star,
        spi: (profit_mean - hq_sb) / hq_sb,
        bpi: (profit_mean - baseline_mean) / baseline_mean,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    BothSignificant,
    WelchOnly,
    WilcoxonOnly,
    Neither,
}

impl Verdict {
    pub fn from_p_values(p_welch: f64, p_wilcoxon: f64, level: f64) -> Self {
        match (p_welch <= level, p_wilcoxon <= level) {
            (true, true) => Verdict::BothSignificant,
            (true, false) => Verdict::WelchOnly,
            (false, true) => Verdict::WilcoxonOnly,
            (false, false) => Verdict::Neither,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::BothSignificant => "both_significant",
            Verdict::WelchOnly => "welch_only",
            Verdict::WilcoxonOnly => "wilcoxon_only",
            Verdict::Neither => "neither",
        }
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Verdict {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "both_significant" => Ok(Verdict::BothSignificant),
            "welch_only" => Ok(Verdict::WelchOnly),
            "wilcoxon_only" => Ok(Verdict::WilcoxonOnly),
            "neither" => Ok(Verdict::Neither),
            other => Err(Error::invalid("verdict", format!("unknown verdict `{other}`"))),
        }
    }
}

/// Significance-weighted mean share `Σ Γ·BPI / Σ BPI` over cells whose verdict
/// is [`Verdict::BothSignificant`]. `None` when no cell qualifies.
pub fn weighted_gamma_mean<I>(cells: I) -> Option<f64>
where
    I: IntoIterator<Item = (f64, f64, Verdict)>,
{
    let (num, den, count) = cells
        .into_iter()
        .filter(|(_, _, v)| *v == Verdict::BothSignificant)
        .fold((0.0, 0.0, 0usize), |(num, den, c), (g, w, _)| (num + g * w, den + w, c + 1));
    (count > 0 && den != 0.0).then(|| num / den)
}

/// Aggregate of one sweep cell compared against its baseline cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub gamma_share: f64,
    pub discount: f64,
    pub profit_mean: f64,
    pub fpi: f64,
    pub spi: f64,
    pub bpi: f64,
    pub p_welch: f64,
    pub p_wilcoxon: f64,
    pub verdict: Verdict,
}

/// Tests the cell's per-run `Π_HQ` means against the baseline's with
/// `d_h = mean(baseline)/100` and fills the indicators. `Π_HQ^sb` is taken
/// at `Γ^sb` whatever the cell's own share.
pub fn build_sweep_cell(batch: &[RunResult], baseline: &[RunResult], econ: &EconParams, discount: f64) -> Result<SweepCell> {
    if batch.is_empty() {
        return Err(Error::EmptySample("batch"));
    }
    if baseline.is_empty() {
        return Err(Error::EmptySample("baseline"));
    }
    let a: Vec<f64> = batch.iter().map(|r| r.mean_profit_hq).collect();
    let b: Vec<f64> = baseline.iter().map(|r| r.mean_profit_hq).collect();
    let profit_mean = a.iter().sum::<f64>() / a.len() as f64;
    let baseline_mean = b.iter().sum::<f64>() / b.len() as f64;
    let d_h = baseline_mean / 100.0;
    let p_welch = welch_one_tailed(&a, &b, d_h)?;
    let p_wilcoxon = wilcoxon_rank_sum_shifted(&a, &b, d_h)?;
    let hq_star = econ::first_best(econ)?.profit_hq;
    let hq_sb = econ::second_best(econ)?.profit_hq;
    let ind = indicators(profit_mean, hq_star, hq_sb, baseline_mean)?;
    Ok(SweepCell {
        gamma_share: econ.gamma_share,
        discount,
        profit_mean,
        fpi: ind.fpi,
        spi: ind.spi,
        bpi: ind.bpi,
        p_welch,
        p_wilcoxon,
        verdict: Verdict::from_p_values(p_welch, p_wilcoxon, SIGNIFICANCE_LEVEL),
    })
}
