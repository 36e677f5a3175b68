//! Krein space view of the form.
//!
//! With `H² = I` the form `[x,y] = ⟨A^{1/2}x, H A^{1/2}y⟩` is an indefinite
//! inner product with fundamental symmetry `J = A^{-1/2} H A^{1/2}`, and `B` is
//! positive in it: `[x, Bx] = ‖Bx‖²`. Infinity is a singular critical point
//! of `B` when the `J`-norm `‖A^{1/2}x‖` and the modulus norm `‖|B|^{1/2}x‖` are
//! not equivalent, which shows up as a diverging equivalence ratio.

use serde::Serialize;

use crate::forms::{build_context_with, form_value, FormContext};
use crate::linalg::{dot, operator_norm, SpectralFn};
use crate::model::scenario_families;
use crate::sampling::{stream, unit_vector};
use crate::stability::{classify_growth_with, GrowthSeries, GrowthThresholds, Quantity, Verdict};
use crate::{Error, Result, Scenario};

/// Which operator plays the role of `H`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum KreinVariant {
    /// `H` itself; it must be an involution.
    Involution,
    /// `sign(H)` replaces `H`, giving `J = A^{-1/2} sign(H) A^{1/2}`.
    SignH,
}

pub const INVOLUTION_TOL: f64 = 1e-8;
const POSITIVITY_SAMPLES: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KreinSample {
    pub n: usize,
    pub positivity_residual: f64,
    pub fundamental_symmetry_residual: f64,
    /// `max(σ_max(|B|^{1/2}A^{-1/2}), σ_max(A^{1/2}|B|^{-1/2}))`.
    pub equivalence: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KreinReport {
    pub variant: KreinVariant,
    pub positivity_residual: f64,
    pub fundamental_symmetry_residual: f64,
    pub equivalence_series: GrowthSeries,
    pub verdict: Verdict,
    /// Infinity is a singular critical point (the series diverges).
    pub singular: bool,
    pub samples: Vec<KreinSample>,
}

/// `‖H² − I‖_F` for the context's `H`.
pub fn involution_residual(ctx: &FormContext) -> Result<f64> {
    Ok(ctx.h.matmul(ctx.h.as_general())?.distance_from_identity())
}

/// Krein quantities for one truncation whose `H` is an involution.
pub fn krein_sample(ctx: &FormContext, n: usize, seed: u64) -> Result<KreinSample> {
    let residual = involution_residual(ctx)?;
    if residual > INVOLUTION_TOL {
        return Err(Error::PreconditionViolation(format!(
            "Krein diagnosis needs H² = I, but ‖H² − I‖ = {residual:e}"
        )));
    }
    let dim = ctx.dim();
    let mut positivity: f64 = 0.0;
    for i in 0..POSITIVITY_SAMPLES {
        let x = unit_vector(&mut stream(seed, i as u64), dim);
        let bx = ctx.b.matvec(&x)?;
        let lhs = form_value(ctx, &x, &bx)?;
        let rhs = dot(&bx, &bx);
        positivity = positivity.max((lhs - rhs).abs() / (1.0 + rhs));
    }

    let j = ctx
        .a_half_inv
        .matmul(ctx.h.as_general())?
        .matmul(ctx.a_half.as_general())?;
    let fundamental = j.matmul(&j)?.distance_from_identity();

    let abs_half = ctx.b_function(SpectralFn::AbsPower(0.5))?;
    let abs_half_inv = ctx.b_function(SpectralFn::AbsPower(-0.5))?;
    let forward = operator_norm(&abs_half.matmul(ctx.a_half_inv.as_general())?)?;
    let backward = operator_norm(&ctx.a_half.matmul(abs_half_inv.as_general())?)?;

    Ok(KreinSample {
        n,
        positivity_residual: positivity,
        fundamental_symmetry_residual: fundamental,
        equivalence: forward.max(backward),
    })
}

/// Context for the truncation at `n`, with `H` replaced by `sign(H)` for
/// the [`KreinVariant::SignH`] variant.
pub fn krein_context(scenario: &Scenario, n: usize, variant: KreinVariant) -> Result<FormContext> {
    let (a, h) = scenario_families(scenario);
    let a = a.truncate(n)?;
    let mut h = h.truncate(n)?;
    if variant == KreinVariant::SignH {
        h = crate::linalg::spectral_apply_with(&h, SpectralFn::Sign, &scenario.tolerances)?;
    }
    build_context_with(&a, &h, &scenario.tolerances)
}

pub fn krein_from_samples(
    variant: KreinVariant,
    samples: Vec<KreinSample>,
    sizes: Vec<usize>,
    th: &GrowthThresholds,
) -> KreinReport {
    let equivalence_series = GrowthSeries {
        quantity: Quantity::Equivalence,
        dims: samples.iter().map(|s| s.n).collect(),
        sizes,
        values: samples.iter().map(|s| s.equivalence).collect(),
    };
    let verdict = classify_growth_with(&equivalence_series, th);
    KreinReport {
        variant,
        positivity_residual: samples
            .iter()
            .map(|s| s.positivity_residual)
            .fold(0.0, f64::max),
        fundamental_symmetry_residual: samples
            .iter()
            .map(|s| s.fundamental_symmetry_residual)
            .fold(0.0, f64::max),
        singular: verdict.is_diverging(),
        equivalence_series,
        verdict,
        samples,
    }
}

pub fn krein_diagnose(
    scenario: &Scenario,
    dims: &[usize],
    variant: KreinVariant,
) -> Result<KreinReport> {
    use rayon::prelude::*;
    let built: Vec<(KreinSample, usize)> = dims
        .par_iter()
        .map(|&n| {
            let ctx = krein_context(scenario, n, variant)?;
            Ok((krein_sample(&ctx, n, scenario.seed)?, ctx.dim()))
        })
        .collect::<Result<_>>()?;
    let (samples, sizes) = built.into_iter().unzip();
    Ok(krein_from_samples(
        variant,
        samples,
        sizes,
        &GrowthThresholds::default(),
    ))
}
