//! Form-domain stability diagnostics.
//!
//! `Dom(A^{1/2}) = Dom(|B|^{1/2})` holds exactly when any one of the criteria
//! operators
//!
//! ```text
//! X = A^{-1/2} |B| A^{-1/2},   Y = A^{1/2} |B|^{-1} A^{1/2},   K = A^{1/2} sign(B) A^{-1/2}
//! ```
//!
//! is bounded, equivalently when the norms `‖A^{1/2}x‖` and `‖|B|^{1/2}x‖` are
//! equivalent. At a finite truncation every matrix is bounded, so the
//! diagnosis looks at how these norms grow with the truncation size and
//! classifies the growth as bounded, diverging (power law), or inconclusive.

use rayon::prelude::*;
use serde::Serialize;

use crate::forms::{build_context_with, FormContext};
use crate::linalg::{
    operator_norm, singular_value_range, sym_eig_with, GeneralMatrix, SpectralFn, SymmetricMatrix,
};
use crate::model::scenario_families;
use crate::{Result, Scenario};

#[derive(Debug, Clone)]
pub struct CriteriaOperators {
    pub x: SymmetricMatrix,
    pub y: SymmetricMatrix,
    pub k: GeneralMatrix,
    pub norm_x: f64,
    pub norm_y: f64,
    pub norm_k: f64,
    /// `cond(|B|^{1/2} A^{-1/2}) = σ_max / σ_min`.
    pub ratio: f64,
    /// `σ_max(|B|^{1/2} A^{-1/2})`: growth means `Dom(A^{1/2}) ⊄ Dom(|B|^{1/2})`.
    pub upper_ratio: f64,
    /// `σ_max(A^{1/2} |B|^{-1/2})`: growth means `Dom(|B|^{1/2}) ⊄ Dom(A^{1/2})`.
    pub lower_ratio: f64,
    pub min_eig_x: f64,
    pub min_eig_y: f64,
    /// `‖XY − I‖_F`.
    pub xy_residual: f64,
    /// `‖K² − I‖_F`.
    pub involution_residual: f64,
}

impl CriteriaOperators {
    /// Names of violated invariants, with residual and limit.
    pub fn invariant_failures(&self) -> Vec<(&'static str, f64, f64)> {
        let mut out = Vec::new();
        if self.min_eig_x <= 0.0 {
            out.push(("x_positive", self.min_eig_x, 0.0));
        }
        if self.min_eig_y <= 0.0 {
            out.push(("y_positive", self.min_eig_y, 0.0));
        }
        let cond_x = self.norm_x / self.min_eig_x;
        let limit = 1e-8 * cond_x.max(1.0);
        if self.xy_residual > limit {
            out.push(("xy_identity", self.xy_residual, limit));
        }
        let limit = 1e-8 * (self.norm_k * self.norm_k).max(1.0);
        if self.involution_residual > limit {
            out.push(("k_involution", self.involution_residual, limit));
        }
        out
    }
}

pub fn criteria_operators(ctx: &FormContext) -> Result<CriteriaOperators> {
    let tol = &ctx.tol;
    let abs_b = ctx.b_function(SpectralFn::Abs)?;
    let abs_b_inv = ctx.b_function(SpectralFn::AbsPower(-1.0))?;
    let sign_b = ctx.b_function(SpectralFn::Sign)?;
    let abs_half = ctx.b_function(SpectralFn::AbsPower(0.5))?;
    let abs_half_inv = ctx.b_function(SpectralFn::AbsPower(-0.5))?;

    let (x, _) = abs_b.congruence(&ctx.a_half_inv)?;
    let (y, _) = abs_b_inv.congruence(&ctx.a_half)?;
    let k = ctx
        .a_half
        .matmul(sign_b.as_general())?
        .matmul(ctx.a_half_inv.as_general())?;

    let x_eig = sym_eig_with(&x, tol)?;
    let y_eig = sym_eig_with(&y, tol)?;
    let norm_k = operator_norm(&k)?;

    let forward = abs_half.matmul(ctx.a_half_inv.as_general())?;
    let backward = ctx.a_half.matmul(abs_half_inv.as_general())?;
    let (sigma_min, sigma_max) = singular_value_range(&forward)?;
    let lower_ratio = operator_norm(&backward)?;

    let xy_residual = x.matmul(y.as_general())?.distance_from_identity();
    let involution_residual = k.matmul(&k)?.distance_from_identity();

    Ok(CriteriaOperators {
        norm_x: x_eig.max_abs(),
        norm_y: y_eig.max_abs(),
        min_eig_x: x_eig.min(),
        min_eig_y: y_eig.min(),
        x,
        y,
        k,
        norm_k,
        ratio: sigma_max / sigma_min,
        upper_ratio: sigma_max,
        lower_ratio,
        xy_residual,
        involution_residual,
    })
}

/// `|B| = A^{1/2} (HK) A^{1/2}` with `HK ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Factorization {
    /// `‖A^{1/2}(HK)A^{1/2} − |B|‖_F / ‖B‖`.
    pub residual: f64,
    /// Smallest eigenvalue of the symmetrized `HK`.
    pub min_eig_hk: f64,
    /// `max |(HK)_ij − (HK)_ji|`.
    pub hk_asymmetry: f64,
}

pub fn factorization_check(ctx: &FormContext, crit: &CriteriaOperators) -> Result<Factorization> {
    let hk = ctx.h.matmul(&crit.k)?;
    let hk_asymmetry = hk.asymmetry();
    let rebuilt = ctx.a_half.matmul(&hk)?.matmul(ctx.a_half.as_general())?;
    let abs_b = ctx.b_function(SpectralFn::Abs)?;
    let residual = rebuilt.sub(abs_b.as_general())?.frobenius_norm() / ctx.norm_b();
    let hk_sym = SymmetricMatrix::from_general(&hk)?;
    let min_eig_hk = sym_eig_with(&hk_sym, &ctx.tol)?.min();
    Ok(Factorization {
        residual,
        min_eig_hk,
        hk_asymmetry,
    })
}

/// Quantities whose growth across truncations is classified.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    NormX,
    NormY,
    NormK,
    Ratio,
    UpperRatio,
    LowerRatio,
    /// Larger of the two one-sided ratios.
    Equivalence,
    HInvariance,
    BInfAbs,
    BSupAbs,
}

impl Quantity {
    pub const CRITERIA: [Quantity; 4] = [
        Quantity::NormX,
        Quantity::NormY,
        Quantity::NormK,
        Quantity::Ratio,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Quantity::NormX => "norm_x",
            Quantity::NormY => "norm_y",
            Quantity::NormK => "norm_k",
            Quantity::Ratio => "ratio",
            Quantity::UpperRatio => "upper_ratio",
            Quantity::LowerRatio => "lower_ratio",
            Quantity::Equivalence => "equivalence",
            Quantity::HInvariance => "h_invariance",
            Quantity::BInfAbs => "b_inf_abs",
            Quantity::BSupAbs => "b_sup_abs",
        }
    }
}

/// Every diagnostic number at one truncation size.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriteriaSample {
    #[serde(skip)]
    pub n: usize,
    #[serde(skip)]
    pub dim: usize,
    pub norm_x: f64,
    pub norm_y: f64,
    pub norm_k: f64,
    pub ratio: f64,
    pub upper_ratio: f64,
    pub lower_ratio: f64,
    /// `‖A^{1/2} H A^{-1/2}‖`.
    pub h_invariance: f64,
    pub b_min: f64,
    pub b_max: f64,
    pub h_min: f64,
    pub min_eig_x: f64,
    pub min_eig_y: f64,
    pub xy_residual: f64,
    pub involution_residual: f64,
    pub factorization: Factorization,
}

impl CriteriaSample {
    pub fn value(&self, q: Quantity) -> f64 {
        match q {
            Quantity::NormX => self.norm_x,
            Quantity::NormY => self.norm_y,
            Quantity::NormK => self.norm_k,
            Quantity::Ratio => self.ratio,
            Quantity::UpperRatio => self.upper_ratio,
            Quantity::LowerRatio => self.lower_ratio,
            Quantity::Equivalence => self.upper_ratio.max(self.lower_ratio),
            Quantity::HInvariance => self.h_invariance,
            Quantity::BInfAbs => self.b_min.abs(),
            Quantity::BSupAbs => self.b_max.abs(),
        }
    }
}

pub fn criteria_sample(ctx: &FormContext, n: usize) -> Result<CriteriaSample> {
    let crit = criteria_operators(ctx)?;
    let factorization = factorization_check(ctx, &crit)?;
    let invariance = ctx
        .a_half
        .matmul(ctx.h.as_general())?
        .matmul(ctx.a_half_inv.as_general())?;
    Ok(CriteriaSample {
        n,
        dim: ctx.dim(),
        norm_x: crit.norm_x,
        norm_y: crit.norm_y,
        norm_k: crit.norm_k,
        ratio: crit.ratio,
        upper_ratio: crit.upper_ratio,
        lower_ratio: crit.lower_ratio,
        h_invariance: operator_norm(&invariance)?,
        b_min: ctx.b_eig().min(),
        b_max: ctx.b_eig().max(),
        h_min: ctx.h_eig().min(),
        min_eig_x: crit.min_eig_x,
        min_eig_y: crit.min_eig_y,
        xy_residual: crit.xy_residual,
        involution_residual: crit.involution_residual,
        factorization,
    })
}

/// Builds the truncation of `scenario` at `n` blocks.
pub fn scenario_context(scenario: &Scenario, n: usize) -> Result<FormContext> {
    let (a, h) = scenario_families(scenario);
    build_context_with(&a.truncate(n)?, &h.truncate(n)?, &scenario.tolerances)
}

/// Criteria samples at every size in `dims`, computed in parallel and
/// returned in the order of `dims`.
pub fn criteria_sweep(scenario: &Scenario, dims: &[usize]) -> Result<Vec<CriteriaSample>> {
    dims.par_iter()
        .map(|&n| criteria_sample(&scenario_context(scenario, n)?, n))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthSeries {
    pub quantity: Quantity,
    pub dims: Vec<usize>,
    /// Fit abscissa: truncation dimension `N · block_size`.
    pub sizes: Vec<usize>,
    pub values: Vec<f64>,
}

impl GrowthSeries {
    pub fn from_samples(quantity: Quantity, samples: &[CriteriaSample]) -> Self {
        GrowthSeries {
            quantity,
            dims: samples.iter().map(|s| s.n).collect(),
            sizes: samples.iter().map(|s| s.dim).collect(),
            values: samples.iter().map(|s| s.value(quantity)).collect(),
        }
    }
}

pub fn growth_series(scenario: &Scenario, quantity: Quantity) -> Result<GrowthSeries> {
    let samples = criteria_sweep(scenario, &scenario.dims)?;
    Ok(GrowthSeries::from_samples(quantity, &samples))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GrowthThresholds {
    pub slope_min: f64,
    pub gamma_bound: f64,
    pub fit_tol: f64,
}

impl Default for GrowthThresholds {
    fn default() -> Self {
        Self {
            slope_min: 0.25,
            gamma_bound: 1.05,
            fit_tol: 0.1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "tag", rename_all = "snake_case")]
pub enum VerdictTag {
    Bounded,
    Diverging { slope: f64 },
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Verdict {
    pub tag: VerdictTag,
    /// Least-squares slope of `log value` against `log size`.
    pub slope: f64,
    /// Root-mean-square residual of that fit.
    pub fit_residual: f64,
    /// Largest ratio between consecutive values.
    pub max_ratio: f64,
}

impl Verdict {
    pub fn is_bounded(&self) -> bool {
        matches!(self.tag, VerdictTag::Bounded)
    }

    pub fn is_diverging(&self) -> bool {
        matches!(self.tag, VerdictTag::Diverging { .. })
    }
}

pub fn classify_growth(series: &GrowthSeries) -> Verdict {
    classify_growth_with(series, &GrowthThresholds::default())
}

/// Log-log power-law fit first, then the consecutive-ratio test. Fewer than
/// three points, or nonpositive values, are always inconclusive.
pub fn classify_growth_with(series: &GrowthSeries, th: &GrowthThresholds) -> Verdict {
    let n = series.values.len().min(series.sizes.len());
    let max_ratio = series
        .values
        .windows(2)
        .map(|w| w[1] / w[0])
        .fold(f64::NEG_INFINITY, f64::max);
    let usable = n >= 3 && series.values.iter().all(|v| v.is_finite() && *v > 0.0);
    if !usable {
        return Verdict {
            tag: VerdictTag::Inconclusive,
            slope: f64::NAN,
            fit_residual: f64::NAN,
            max_ratio,
        };
    }
    let xs: Vec<f64> = series.sizes[..n].iter().map(|&s| (s as f64).ln()).collect();
    let ys: Vec<f64> = series.values[..n].iter().map(|v| v.ln()).collect();
    let (slope, fit_residual) = least_squares(&xs, &ys);

    let tag = if slope >= th.slope_min && fit_residual <= th.fit_tol {
        VerdictTag::Diverging { slope }
    } else if max_ratio <= th.gamma_bound {
        VerdictTag::Bounded
    } else {
        VerdictTag::Inconclusive
    };
    Verdict {
        tag,
        slope,
        fit_residual,
        max_ratio,
    }
}

fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return (f64::NAN, f64::NAN);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let r = y - (intercept + slope * x);
            r * r
        })
        .sum();
    (slope, (rss / n).sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SufficientFlags {
    /// Growth of `‖A^{1/2} H A^{-1/2}‖`; bounded suggests `H` keeps
    /// `Dom(A^{1/2})` invariant.
    pub h_invariance: Verdict,
    pub h_positive: bool,
    pub b_semibounded: bool,
    pub h_invariance_series: GrowthSeries,
    pub b_inf_series: GrowthSeries,
    pub b_sup_series: GrowthSeries,
}

pub fn sufficient_flags_from(samples: &[CriteriaSample], th: &GrowthThresholds) -> SufficientFlags {
    let h_invariance_series = GrowthSeries::from_samples(Quantity::HInvariance, samples);
    let b_inf_series = GrowthSeries::from_samples(Quantity::BInfAbs, samples);
    let b_sup_series = GrowthSeries::from_samples(Quantity::BSupAbs, samples);
    // one end of spec(B) staying put: b_min bounded below or b_max bounded above
    let below = samples.iter().all(|s| s.b_min > 0.0)
        || classify_growth_with(&b_inf_series, th).is_bounded();
    let above = samples.iter().all(|s| s.b_max < 0.0)
        || classify_growth_with(&b_sup_series, th).is_bounded();
    SufficientFlags {
        h_invariance: classify_growth_with(&h_invariance_series, th),
        h_positive: samples.iter().all(|s| s.h_min > 0.0),
        b_semibounded: below || above,
        h_invariance_series,
        b_inf_series,
        b_sup_series,
    }
}

pub fn sufficient_flags(scenario: &Scenario) -> Result<SufficientFlags> {
    let samples = criteria_sweep(scenario, &scenario.dims)?;
    Ok(sufficient_flags_from(
        &samples,
        &GrowthThresholds::default(),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Consensus {
    Stable,
    Unstable,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionVerdict {
    pub quantity: Quantity,
    pub verdict: Verdict,
    pub series: GrowthSeries,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityReport {
    /// `norm_x`, `norm_y`, `norm_k`, `ratio`, in that order. Criterion (v),
    /// invariance of `Dom(A^{1/2})` under `sign(B)`, shares the `norm_k`
    /// series with criterion (iv).
    pub criteria: Vec<CriterionVerdict>,
    /// The two one-sided domain inclusions, reported separately.
    pub upper_ratio: CriterionVerdict,
    pub lower_ratio: CriterionVerdict,
    pub sufficient: SufficientFlags,
    pub consensus: Consensus,
    /// All four criteria verdicts agree.
    pub coherent: bool,
}

impl StabilityReport {
    pub fn criterion(&self, q: Quantity) -> Option<&CriterionVerdict> {
        self.criteria.iter().find(|c| c.quantity == q)
    }
}

fn criterion(q: Quantity, samples: &[CriteriaSample], th: &GrowthThresholds) -> CriterionVerdict {
    let series = GrowthSeries::from_samples(q, samples);
    CriterionVerdict {
        quantity: q,
        verdict: classify_growth_with(&series, th),
        series,
    }
}

pub fn stability_from_samples(
    samples: &[CriteriaSample],
    th: &GrowthThresholds,
) -> StabilityReport {
    let criteria: Vec<CriterionVerdict> = Quantity::CRITERIA
        .iter()
        .map(|&q| criterion(q, samples, th))
        .collect();
    let all_bounded = criteria.iter().all(|c| c.verdict.is_bounded());
    let all_diverging = criteria.iter().all(|c| c.verdict.is_diverging());
    let consensus = if all_bounded {
        Consensus::Stable
    } else if all_diverging {
        Consensus::Unstable
    } else {
        Consensus::Inconclusive
    };
    let coherent = all_bounded
        || all_diverging
        || criteria
            .iter()
            .all(|c| matches!(c.verdict.tag, VerdictTag::Inconclusive));
    StabilityReport {
        criteria,
        upper_ratio: criterion(Quantity::UpperRatio, samples, th),
        lower_ratio: criterion(Quantity::LowerRatio, samples, th),
        sufficient: sufficient_flags_from(samples, th),
        consensus,
        coherent,
    }
}

pub fn stability_report(scenario: &Scenario) -> Result<StabilityReport> {
    stability_report_with(scenario, &scenario.dims, &GrowthThresholds::default())
}

pub fn stability_report_with(
    scenario: &Scenario,
    dims: &[usize],
    th: &GrowthThresholds,
) -> Result<StabilityReport> {
    let samples = criteria_sweep(scenario, dims)?;
    Ok(stability_from_samples(&samples, th))
}
