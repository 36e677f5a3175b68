//! End-to-end scenario pipeline and its machine-readable report.
//!
//! Reports are deterministic: fields are emitted in declaration order and
//! every float is written as `%.12e`, so equal inputs give byte-identical
//! JSON. Non-finite values (an unbounded gap endpoint, an undefined slope)
//! are written as `null`.

use std::io::{self, Write};

use rayon::prelude::*;
use serde::Serialize;

use crate::constructions::krein::{
    involution_residual, krein_from_samples, krein_sample, KreinReport, KreinVariant,
    INVOLUTION_TOL,
};
use crate::constructions::Expectations;
use crate::forms::{
    first_rep_residual, lambda_grid, recover_h, resolvent_gap_check, second_rep_residual,
    shifted_invertibility, sign_abs_residual, uniqueness_residual, FormContext,
};
use crate::stability::{
    criteria_sample, scenario_context, stability_from_samples, Consensus, CriteriaSample,
    GrowthSeries, GrowthThresholds, Quantity, StabilityReport,
};
use crate::{Result, Scenario};

pub const SCHEMA: u32 = 1;
pub const TOOL: &str = "formlab";

/// Limit for every representation residual.
pub const IDENTITY_LIMIT: f64 = 1e-8;
/// Lower limit for the smallest eigenvalue of `HK`.
pub const HK_FLOOR: f64 = -1e-10;
/// Absolute limit for deviations from a closed-form spectrum.
pub const SPECTRUM_LIMIT: f64 = 1e-8;
const REP_SAMPLES: usize = 32;
const SHIFT_POINTS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Run,
    Diagnose,
    Reproduce,
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub command: Command,
    /// Truncation sizes; the scenario's own schedule when `None`.
    pub dims: Option<Vec<usize>>,
    /// Parameters already substituted into the scenario, echoed in the report.
    pub params: Vec<(String, String)>,
    pub thresholds: GrowthThresholds,
    pub expectations: Option<Expectations>,
}

impl RunOptions {
    pub fn new(command: Command) -> Self {
        Self {
            command,
            dims: None,
            params: Vec::new(),
            thresholds: GrowthThresholds::default(),
            expectations: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Param {
    pub key: String,
    pub value: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenSummary {
    pub a_min: f64,
    pub a_max: f64,
    pub h_min: f64,
    pub h_max: f64,
    pub b_min: f64,
    pub b_max: f64,
    pub b_min_abs: f64,
    pub b_max_abs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapRecord {
    pub lower: f64,
    pub upper: f64,
    pub margin: f64,
    pub violations: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShiftRecord {
    pub lambda: f64,
    pub min_abs_eig: f64,
    pub spectrum: (f64, f64),
    pub bound: (f64, f64),
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Residuals {
    pub first_rep: f64,
    pub uniqueness: f64,
    pub recover_h: f64,
    pub second_rep: f64,
    pub sign_abs: f64,
    pub inversion: f64,
    pub b_asymmetry: f64,
}

/// Representation identities and gap checks at one truncation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityRecord {
    pub residuals: Residuals,
    pub gap: GapRecord,
    pub shifted: Vec<ShiftRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KreinRecord {
    pub positivity: f64,
    pub fundamental_symmetry: f64,
    pub equivalence: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Record {
    pub n: usize,
    pub dim: usize,
    pub alpha: f64,
    pub h_minus: f64,
    pub h_plus: f64,
    pub eigen: EigenSummary,
    pub criteria: CriteriaSample,
    pub identities: Option<IdentityRecord>,
    pub krein: Option<KreinRecord>,
    /// Largest deviation of `spec(B)` from the expected closed form.
    pub spectrum_error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub check: String,
    pub n: Option<usize>,
    pub value: f64,
    pub limit: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub schema: u32,
    pub tool: &'static str,
    pub version: &'static str,
    pub command: Command,
    pub scenario: String,
    pub seed: u64,
    pub params: Vec<Param>,
    pub dims: Vec<usize>,
    pub thresholds: GrowthThresholds,
    pub records: Vec<Record>,
    pub stability: StabilityReport,
    /// Absent when `H` is not an involution at some truncation.
    pub krein: Option<KreinReport>,
    pub expectations: Option<Expectations>,
    pub violations: Vec<Violation>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    /// 0 when every check passed, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            0
        } else {
            1
        }
    }

    pub fn series(&self, q: Quantity) -> GrowthSeries {
        let samples: Vec<CriteriaSample> = self
            .records
            .iter()
            .map(|r| CriteriaSample {
                n: r.n,
                dim: r.dim,
                ..r.criteria.clone()
            })
            .collect();
        GrowthSeries::from_samples(q, &samples)
    }
}

struct Evaluated {
    record: Record,
    krein: Option<crate::constructions::KreinSample>,
}

fn identity_record(ctx: &FormContext, seed: u64) -> Result<IdentityRecord> {
    let gap = resolvent_gap_check(ctx);
    let shifted = lambda_grid(ctx, SHIFT_POINTS)
        .into_iter()
        .map(|lambda| {
            shifted_invertibility(ctx, lambda).map(|c| ShiftRecord {
                lambda: c.lambda,
                min_abs_eig: c.min_abs_eig_shifted,
                spectrum: c.spectrum,
                bound: c.bound,
                holds: c.holds,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(IdentityRecord {
        residuals: Residuals {
            first_rep: first_rep_residual(ctx, REP_SAMPLES, seed)?,
            uniqueness: uniqueness_residual(ctx)?,
            recover_h: recover_h(ctx)?,
            second_rep: second_rep_residual(ctx, REP_SAMPLES, seed)?,
            sign_abs: sign_abs_residual(ctx)?,
            inversion: ctx.inversion_residual,
            b_asymmetry: ctx.b_asymmetry,
        },
        gap: GapRecord {
            lower: gap.lower,
            upper: gap.upper,
            margin: gap.margin,
            violations: gap.violations,
        },
        shifted,
    })
}

fn evaluate(scenario: &Scenario, n: usize, opts: &RunOptions) -> Result<Evaluated> {
    let ctx = scenario_context(scenario, n)?;
    let criteria = criteria_sample(&ctx, n)?;
    let identities = match opts.command {
        Command::Diagnose => None,
        _ => Some(identity_record(&ctx, scenario.seed)?),
    };
    let krein = if involution_residual(&ctx)? <= INVOLUTION_TOL {
        Some(krein_sample(&ctx, n, scenario.seed)?)
    } else {
        None
    };
    let spectrum_error = opts
        .expectations
        .as_ref()
        .and_then(|e| e.b_spectrum.as_ref())
        .map(|formula| {
            let want = formula.spectrum(n);
            let got = ctx.b_eig().eigenvalues();
            if want.len() != got.len() {
                return f64::INFINITY;
            }
            got.iter()
                .zip(&want)
                .map(|(g, w)| (g - w).abs())
                .fold(0.0, f64::max)
        });
    let a = ctx.a_eig();
    let h = ctx.h_eig();
    let b = ctx.b_eig();
    Ok(Evaluated {
        record: Record {
            n,
            dim: ctx.dim(),
            alpha: ctx.cert.alpha,
            h_minus: ctx.cert.h_minus,
            h_plus: ctx.cert.h_plus,
            eigen: EigenSummary {
                a_min: a.min(),
                a_max: a.max(),
                h_min: h.min(),
                h_max: h.max(),
                b_min: b.min(),
                b_max: b.max(),
                b_min_abs: b.min_abs(),
                b_max_abs: b.max_abs(),
            },
            criteria,
            identities,
            krein: krein.map(|k| KreinRecord {
                positivity: k.positivity_residual,
                fundamental_symmetry: k.fundamental_symmetry_residual,
                equivalence: k.equivalence,
            }),
            spectrum_error,
        },
        krein,
    })
}

/// Runs the pipeline on every truncation size and collects violations.
pub fn run_scenario(scenario: &Scenario, opts: &RunOptions) -> Result<Report> {
    let dims = opts.dims.clone().unwrap_or_else(|| scenario.dims.clone());
    let evaluated = dims
        .par_iter()
        .map(|&n| evaluate(scenario, n, opts))
        .collect::<Result<Vec<_>>>()?;

    let samples: Vec<CriteriaSample> = evaluated
        .iter()
        .map(|e| e.record.criteria.clone())
        .collect();
    let stability = stability_from_samples(&samples, &opts.thresholds);

    let krein = if evaluated.iter().all(|e| e.krein.is_some()) {
        let sizes = evaluated.iter().map(|e| e.record.dim).collect();
        let samples = evaluated.iter().filter_map(|e| e.krein).collect();
        Some(krein_from_samples(
            KreinVariant::Involution,
            samples,
            sizes,
            &opts.thresholds,
        ))
    } else {
        None
    };

    let records: Vec<Record> = evaluated.into_iter().map(|e| e.record).collect();
    let mut report = Report {
        schema: SCHEMA,
        tool: TOOL,
        version: env!("CARGO_PKG_VERSION"),
        command: opts.command,
        scenario: scenario.name.clone(),
        seed: scenario.seed,
        params: opts
            .params
            .iter()
            .map(|(k, v)| Param {
                key: k.clone(),
                value: v.clone(),
            })
            .collect(),
        dims,
        thresholds: opts.thresholds,
        records,
        stability,
        krein,
        expectations: opts.expectations.clone(),
        violations: Vec::new(),
    };
    report.violations = collect_violations(&report);
    Ok(report)
}

/// `value <= limit`, false when either side is NaN.
fn within(value: f64, limit: f64) -> bool {
    value <= limit
}

fn collect_violations(report: &Report) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut push = |check: &str, n: Option<usize>, value: f64, limit: f64| {
        out.push(Violation {
            check: check.to_string(),
            n,
            value,
            limit,
        })
    };
    for r in &report.records {
        let n = Some(r.n);
        let c = &r.criteria;
        let min_eig = c.min_eig_x.min(c.min_eig_y);
        if !within(f64::MIN_POSITIVE, min_eig) {
            push("criteria_positive", n, min_eig, 0.0);
        }
        let xy_limit = 1e-8 * (c.norm_x * c.norm_y).max(1.0);
        if !within(c.xy_residual, xy_limit) {
            push("xy_identity", n, c.xy_residual, xy_limit);
        }
        let k_limit = 1e-8 * (c.norm_k * c.norm_k).max(1.0);
        if !within(c.involution_residual, k_limit) {
            push("k_involution", n, c.involution_residual, k_limit);
        }
        if !within(c.factorization.residual, IDENTITY_LIMIT) {
            push("factorization", n, c.factorization.residual, IDENTITY_LIMIT);
        }
        if !within(HK_FLOOR, c.factorization.min_eig_hk) {
            push("hk_positive", n, c.factorization.min_eig_hk, HK_FLOOR);
        }
        if let Some(id) = &r.identities {
            let res = &id.residuals;
            for (name, value) in [
                ("first_rep", res.first_rep),
                ("uniqueness", res.uniqueness),
                ("recover_h", res.recover_h),
                ("second_rep", res.second_rep),
                ("sign_abs", res.sign_abs),
            ] {
                if !within(value, IDENTITY_LIMIT) {
                    push(name, n, value, IDENTITY_LIMIT);
                }
            }
            for v in &id.gap.violations {
                push("resolvent_gap", n, *v, id.gap.margin);
            }
            for s in id.shifted.iter().filter(|s| !s.holds) {
                push("shifted_invertibility", n, s.lambda, s.bound.0);
            }
        }
        if let Some(k) = &r.krein {
            if !within(k.positivity, IDENTITY_LIMIT) {
                push("krein_positivity", n, k.positivity, IDENTITY_LIMIT);
            }
            if !within(k.fundamental_symmetry, IDENTITY_LIMIT) {
                push(
                    "fundamental_symmetry",
                    n,
                    k.fundamental_symmetry,
                    IDENTITY_LIMIT,
                );
            }
        }
        if let Some(err) = r.spectrum_error {
            if !within(err, SPECTRUM_LIMIT) {
                push("b_spectrum", n, err, SPECTRUM_LIMIT);
            }
        }
    }
    if let Some(e) = &report.expectations {
        if let Some(want) = e.consensus {
            if report.stability.consensus != want {
                push(
                    "consensus",
                    None,
                    consensus_code(report.stability.consensus),
                    consensus_code(want),
                );
            }
        }
        if let Some(want) = e.krein_singular {
            match &report.krein {
                Some(k) if k.singular == want => {}
                Some(k) => push(
                    "krein_verdict",
                    None,
                    k.singular as u8 as f64,
                    want as u8 as f64,
                ),
                None => push("krein_verdict", None, f64::NAN, want as u8 as f64),
            }
        }
    }
    out
}

/// Numeric code of a consensus for violation records: 1 stable, −1
/// unstable, 0 inconclusive.
pub fn consensus_code(c: Consensus) -> f64 {
    match c {
        Consensus::Stable => 1.0,
        Consensus::Unstable => -1.0,
        Consensus::Inconclusive => 0.0,
    }
}

/// JSON formatter writing every float as `%.12e`.
struct ScientificFormatter;

impl serde_json::ser::Formatter for ScientificFormatter {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.12e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

/// Serializes any value with the report float format.
pub fn to_canonical_json<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, ScientificFormatter);
    value
        .serialize(&mut ser)
        .expect("report types serialize infallibly");
    String::from_utf8(buf).expect("serde_json writes UTF-8")
}

pub fn report_json(report: &Report) -> String {
    to_canonical_json(report)
}

/// Quantities written to the CSV series output.
pub const CSV_QUANTITIES: [Quantity; 10] = [
    Quantity::NormX,
    Quantity::NormY,
    Quantity::NormK,
    Quantity::Ratio,
    Quantity::UpperRatio,
    Quantity::LowerRatio,
    Quantity::Equivalence,
    Quantity::HInvariance,
    Quantity::BInfAbs,
    Quantity::BSupAbs,
];

/// Long-format series `quantity,n,dim,value`, one row per quantity and `N`.
pub fn write_csv<W: Write>(report: &Report, writer: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["quantity", "n", "dim", "value"])?;
    for q in CSV_QUANTITIES {
        let series = report.series(q);
        for ((n, dim), v) in series.dims.iter().zip(&series.sizes).zip(&series.values) {
            w.write_record([
                q.name().to_string(),
                n.to_string(),
                dim.to_string(),
                format!("{v:.12e}"),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}
