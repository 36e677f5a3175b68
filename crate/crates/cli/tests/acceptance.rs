//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit when any
//! criterion fails. Runs on a single rayon thread so the wall-time check
//! reflects sequential cost.

use std::error::Error as StdError;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use formlab::constructions::{
    builtin, builtin_names, interpolation_identity, krein_diagnose, laxmilgram_extract,
    offdiagonal_build, polar_decompose, KreinVariant, MatrixFamily, OffDiagSpec,
};
use formlab::forms::{
    first_rep_residual, lambda_grid, recover_h, resolvent_gap_check, second_rep_residual,
    shifted_invertibility, uniqueness_residual,
};
use formlab::linalg::{operator_norm, sym_eig, SpectralFn};
use formlab::model::OperatorFamily;
use formlab::sampling::{
    gaussian_matrix, random_invertible, random_invertible_symmetric, random_spd, stream,
    with_spectrum,
};
use formlab::stability::{
    classify_growth, criteria_sample, criteria_sweep, scenario_context, stability_report,
    Consensus, GrowthSeries, Quantity,
};
use formlab::{build_context, load_scenario, FormContext, Scenario, SymmetricMatrix};
use nalgebra::DMatrix;
use rand::Rng;

type Check = Result<String, Box<dyn StdError>>;

const RANDOM_SCENARIOS: u64 = 50;
const SUITE_SEED: u64 = 0xacce;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), Box<dyn StdError>> {
    if cond {
        Ok(())
    } else {
        Err(msg().into())
    }
}

fn param(key: &str, value: &str) -> Vec<(String, String)> {
    vec![(key.to_string(), value.to_string())]
}

fn bundled(name: &str, params: &[(String, String)]) -> Result<Scenario, Box<dyn StdError>> {
    let b = builtin(name).ok_or_else(|| format!("missing bundled scenario {name}"))?;
    Ok(b.scenario(params)?)
}

fn all_bundled() -> Result<Vec<Scenario>, Box<dyn StdError>> {
    builtin_names()
        .into_iter()
        .map(|n| bundled(n, &[]))
        .collect()
}

fn rows(m: &SymmetricMatrix) -> Vec<Vec<f64>> {
    m.as_general().to_rows()
}

/// Dense scenario with dimension up to 32 and `cond(A) ≤ 1e4`, written as
/// scenario JSON so it passes through the loader.
fn random_scenario(i: u64) -> Result<Scenario, Box<dyn StdError>> {
    let mut rng = stream(SUITE_SEED, i);
    let n = rng.random_range(1..=32usize);
    let cond = 10f64.powf(rng.random_range(0.0..=4.0));
    let a = random_spd(&mut rng, n, cond);
    let h = random_invertible_symmetric(&mut rng, n, 0.1, 10.0);
    let doc = serde_json::json!({
        "name": format!("random-{i}"),
        "block_size": n,
        "A_dense": rows(&a),
        "H_dense": rows(&h),
        "dims": [1],
        "seed": i,
    });
    Ok(load_scenario(doc.to_string().as_bytes())?)
}

fn random_contexts() -> Result<Vec<FormContext>, Box<dyn StdError>> {
    (0..RANDOM_SCENARIOS)
        .map(|i| Ok(scenario_context(&random_scenario(i)?, 1)?))
        .collect()
}

fn series(quantity: Quantity, samples: &[formlab::stability::CriteriaSample]) -> GrowthSeries {
    GrowthSeries::from_samples(quantity, samples)
}

fn counterexample_reproduction() -> Check {
    let started = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_formlab"))
        .args([
            "reproduce",
            "example-indefinite",
            "--dims",
            "2,4,8,16,32,64",
        ])
        .env("FORMLAB_THREADS", "1")
        .output()?;
    let elapsed = started.elapsed();
    ensure(out.status.success(), || {
        format!(
            "exit {:?}: {}",
            out.status.code(),
            String::from_utf8_lossy(&out.stderr)
        )
    })?;
    ensure(elapsed < Duration::from_secs(10), || {
        format!("took {elapsed:?}")
    })?;
    let report: serde_json::Value = serde_json::from_slice(&out.stdout)?;
    ensure(
        report["violations"]
            .as_array()
            .is_some_and(|v| v.is_empty()),
        || format!("violations {}", report["violations"]),
    )?;

    let scenario = bundled("example-indefinite", &[])?;
    let mut worst: f64 = 0.0;
    for n in [2, 4, 8, 16, 32, 64] {
        let ctx = scenario_context(&scenario, n)?;
        let mut want: Vec<f64> = (1..=n).flat_map(|k| [k as f64, -(k as f64)]).collect();
        want.sort_by(f64::total_cmp);
        for (g, w) in ctx.b_eig().eigenvalues().iter().zip(&want) {
            worst = worst.max((g - w).abs());
        }
        let abs = sym_eig(&ctx.b_function(SpectralFn::Abs)?)?;
        let pairs: Vec<f64> = (1..=n).flat_map(|k| [k as f64, k as f64]).collect();
        for (g, w) in abs.eigenvalues().iter().zip(&pairs) {
            worst = worst.max((g - w).abs());
        }
    }
    ensure(worst <= 1e-8, || format!("spectrum error {worst:e}"))?;
    Ok(format!(
        "max spectrum error {worst:.1e}, binary {:.2}s",
        elapsed.as_secs_f64()
    ))
}

fn criteria_blowup() -> Check {
    let scenario = bundled("example-indefinite", &[])?;
    let dims: Vec<usize> = (2..=64).collect();
    let samples = criteria_sweep(&scenario, &dims)?;
    let mut worst: f64 = 0.0;
    for s in &samples {
        let n = s.n as f64;
        for v in [s.norm_x, s.norm_y, s.norm_k, s.ratio] {
            worst = worst.max((v - n).abs() / n);
        }
        for v in [s.upper_ratio, s.lower_ratio] {
            worst = worst.max((v - n.sqrt()).abs() / n.sqrt());
        }
    }
    ensure(worst <= 1e-10, || format!("relative error {worst:e}"))?;
    let mut slopes = Vec::new();
    for (q, want) in [
        (Quantity::NormX, 1.0),
        (Quantity::NormY, 1.0),
        (Quantity::NormK, 1.0),
        (Quantity::Ratio, 1.0),
        (Quantity::UpperRatio, 0.5),
        (Quantity::LowerRatio, 0.5),
    ] {
        let v = classify_growth(&series(q, &samples));
        ensure(v.is_diverging() && (v.slope - want).abs() <= 0.02, || {
            format!("{}: {v:?}", q.name())
        })?;
        slopes.push(format!("{}={:.3}", q.name(), v.slope));
    }
    Ok(format!(
        "relative error {worst:.1e}; slopes {}",
        slopes.join(" ")
    ))
}

fn first_representation(contexts: &[FormContext]) -> Check {
    let (mut first, mut recover, mut unique) = (0f64, 0f64, 0f64);
    for (i, ctx) in contexts.iter().enumerate() {
        first = first.max(first_rep_residual(ctx, 32, i as u64)?);
        recover = recover.max(recover_h(ctx)?);
        unique = unique.max(uniqueness_residual(ctx)?);
    }
    ensure(first <= 1e-8 && recover <= 1e-8 && unique <= 1e-8, || {
        format!("first {first:e}, recover {recover:e}, uniqueness {unique:e}")
    })?;
    Ok(format!(
        "{} scenarios: first {first:.1e}, recover {recover:.1e}, uniqueness {unique:.1e}",
        contexts.len()
    ))
}

fn gap_check(ctx: &FormContext, label: &str) -> Result<(), Box<dyn StdError>> {
    let gap = resolvent_gap_check(ctx);
    ensure(gap.passed(), || {
        format!("{label}: eigenvalues {:?} inside the gap", gap.violations)
    })?;
    for lambda in lambda_grid(ctx, 5) {
        let cert = shifted_invertibility(ctx, lambda)?;
        ensure(cert.holds, || format!("{label}: shift {cert:?}"))?;
    }
    Ok(())
}

fn resolvent_gap(contexts: &[FormContext], bundled: &[Scenario]) -> Check {
    for (i, ctx) in contexts.iter().enumerate() {
        gap_check(ctx, &format!("random-{i}"))?;
    }
    let mut checked = 0;
    for s in bundled {
        for &n in &s.dims {
            gap_check(&scenario_context(s, n)?, &format!("{} N={n}", s.name))?;
            checked += 1;
        }
    }
    Ok(format!(
        "{} random and {checked} bundled truncations, 5 shifts each",
        contexts.len()
    ))
}

fn offdiagonal_theorem() -> Check {
    let mut worst: f64 = 0.0;
    for i in 0..RANDOM_SCENARIOS {
        let mut rng = stream(SUITE_SEED + 1, i);
        let p = rng.random_range(1..=6usize);
        let m = rng.random_range(1..=6usize);
        let scale = rng.random_range(0.1..=5.0);
        let t = gaussian_matrix(&mut rng, p, m).scale(scale);
        let spec = OffDiagSpec {
            a_plus: OperatorFamily::dense("a+", random_spd(&mut rng, p, 100.0)),
            a_minus: OperatorFamily::dense("a-", random_spd(&mut rng, m, 100.0)),
            coupling: MatrixFamily::Dense(t.clone()),
        };
        let built = offdiagonal_build(&spec, 1)?;
        ensure(built.gap.passed(), || format!("spec {i}: {:?}", built.gap))?;

        let sv = DMatrix::from_row_slice(p, m, t.as_slice()).singular_values();
        let mut want: Vec<f64> = sv
            .iter()
            .flat_map(|s| {
                let r = (1.0 + s * s).sqrt();
                [r, -r]
            })
            .collect();
        want.extend(std::iter::repeat_n(1.0, p.saturating_sub(m)));
        want.extend(std::iter::repeat_n(-1.0, m.saturating_sub(p)));
        want.sort_by(f64::total_cmp);
        for (g, w) in sym_eig(&built.h)?.eigenvalues().iter().zip(&want) {
            worst = worst.max((g - w).abs());
        }
    }
    ensure(worst <= 1e-8, || format!("spectrum error {worst:e}"))?;
    Ok(format!(
        "{RANDOM_SCENARIOS} specs, max |eig(H) - ±√(1+σ²)| {worst:.1e}"
    ))
}

fn lax_milgram() -> Check {
    let (mut worst_h, mut worst_inv): (f64, f64) = (0.0, f64::NEG_INFINITY);
    for i in 0..100 {
        let mut rng = stream(SUITE_SEED + 2, i);
        let n = rng.random_range(1..=8usize);
        let e_norm = rng.random_range(0.0..=0.5);
        let mut spectrum: Vec<f64> = (0..n).map(|_| rng.random_range(-e_norm..=e_norm)).collect();
        spectrum[0] = if rng.random_bool(0.5) {
            e_norm
        } else {
            -e_norm
        };
        let h0 = SymmetricMatrix::identity(n)?.add(&with_spectrum(&mut rng, &spectrum))?;
        let a = random_spd(&mut rng, n, 1e3);
        let b = build_context(&a, &h0)?.b;
        let alpha = 1.0 - e_norm;
        let lm = laxmilgram_extract(&a, &b, alpha, 1.0 + e_norm)?;
        let err = operator_norm(&lm.h.as_general().sub(h0.as_general())?)?;
        worst_h = worst_h.max(err);
        worst_inv = worst_inv.max(lm.cert.norm_h_inv - 1.0 / alpha);
        ensure(
            err <= 1e-8 && lm.cert.norm_h_inv <= 1.0 / alpha + 1e-8,
            || format!("instance {i}: ‖H − H₀‖ = {err:e}, cert {:?}", lm.cert),
        )?;
    }
    Ok(format!(
        "100 instances: max ‖H − H₀‖ {worst_h:.1e}, max ‖H⁻¹‖ − 1/α {worst_inv:.1e}"
    ))
}

fn mu_family() -> Check {
    let half = bundled("mu-family", &param("mu", "0.5"))?;
    let mut worst: f64 = 0.0;
    for n in [1, 8, 64] {
        let reference = scenario_context(&half, n)?;
        for mu in ["0", "0.25", "0.75", "1"] {
            let ctx = scenario_context(&bundled("mu-family", &param("mu", mu))?, n)?;
            let diff = operator_norm(&ctx.b.as_general().sub(reference.b.as_general())?)?;
            worst = worst.max(diff / reference.norm_b());
        }
    }
    ensure(worst <= 1e-8, || format!("‖B_μ − B_½‖ relative {worst:e}"))?;

    let report = stability_report(&half)?;
    ensure(report.consensus == Consensus::Stable, || {
        format!("mu=0.5 consensus {:?}", report.consensus)
    })?;
    let mut slopes = Vec::new();
    for (mu, text) in [(0.0, "0"), (0.25, "0.25"), (0.75, "0.75"), (1.0, "1")] {
        let report = stability_report(&bundled("mu-family", &param("mu", text))?)?;
        let slope = report
            .criterion(Quantity::NormX)
            .map(|c| c.verdict.slope)
            .ok_or("norm_x missing")?;
        let want = (2.0f64 * mu - 1.0).abs();
        ensure(
            report.consensus == Consensus::Unstable && (slope - want).abs() <= 0.05,
            || {
                format!(
                    "mu={text}: consensus {:?}, norm_x slope {slope}",
                    report.consensus
                )
            },
        )?;
        slopes.push(format!("{text}:{slope:.3}"));
    }
    Ok(format!(
        "‖B_μ − B_½‖ {worst:.1e}; Stable at 0.5; Unstable slopes {}",
        slopes.join(" ")
    ))
}

fn polar_interpolation() -> Check {
    let mut worst: f64 = 0.0;
    for i in 0..RANDOM_SCENARIOS {
        let mut rng = stream(SUITE_SEED + 3, i);
        let n = rng.random_range(1..=8usize);
        let d = random_invertible(&mut rng, n, 0.05, 20.0);
        let polar = polar_decompose(&d)?;
        for step in 0..=10 {
            let it = interpolation_identity(&polar, &d, step as f64 / 10.0)?;
            worst = worst.max(it.primal).max(it.dual);
        }
    }
    ensure(worst <= 1e-8, || {
        format!("interpolation residual {worst:e}")
    })?;
    Ok(format!(
        "{RANDOM_SCENARIOS} matrices, 11 exponents: max residual {worst:.1e}"
    ))
}

fn krein_diagnosis() -> Check {
    let s = bundled("example-indefinite", &[])?;
    let singular = krein_diagnose(&s, &s.dims, KreinVariant::Involution)?;
    ensure(
        singular.positivity_residual <= 1e-8
            && (singular.verdict.slope - 0.5).abs() <= 0.05
            && singular.singular,
        || format!("example-indefinite: {:?}", singular.verdict),
    )?;
    for s in [
        bundled("identity-control", &[])?,
        bundled("mu-family", &param("mu", "0.5"))?,
    ] {
        let r = krein_diagnose(&s, &s.dims, KreinVariant::Involution)?;
        ensure(!r.singular, || format!("{}: {:?}", s.name, r.verdict))?;
    }
    Ok(format!(
        "example-indefinite singular (slope {:.3}, positivity {:.1e}); identity-control and mu=0.5 regular",
        singular.verdict.slope, singular.positivity_residual
    ))
}

fn factorization(bundled: &[Scenario]) -> Check {
    let (mut residual, mut min_eig) = (0f64, f64::INFINITY);
    for s in bundled {
        let f = criteria_sample(&scenario_context(s, 32)?, 32)?.factorization;
        ensure(f.residual <= 1e-8 && f.min_eig_hk >= -1e-10, || {
            format!("{}: {f:?}", s.name)
        })?;
        residual = residual.max(f.residual);
        min_eig = min_eig.min(f.min_eig_hk);
    }
    Ok(format!(
        "{} scenarios at N=32: residual {residual:.1e}, min eig(HK) {min_eig:.2e}",
        bundled.len()
    ))
}

fn second_representation(contexts: &[FormContext], bundled: &[Scenario]) -> Check {
    let mut worst: f64 = 0.0;
    for (i, ctx) in contexts.iter().enumerate() {
        worst = worst.max(second_rep_residual(ctx, 32, i as u64)?);
    }
    for s in bundled {
        for &n in &s.dims {
            worst = worst.max(second_rep_residual(&scenario_context(s, n)?, 32, s.seed)?);
        }
    }
    ensure(worst <= 1e-8, || format!("residual {worst:e}"))?;
    Ok(format!(
        "{} random and {} bundled scenarios: max residual {worst:.1e}",
        contexts.len(),
        bundled.len()
    ))
}

fn report(index: usize, name: &str, outcome: Check) -> bool {
    match outcome {
        Ok(detail) => {
            println!("PASS {index:>2} {name}: {detail}");
            true
        }
        Err(e) => {
            println!("FAIL {index:>2} {name}: {e}");
            false
        }
    }
}

fn main() -> ExitCode {
    let started = Instant::now();
    if let Err(e) = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build_global()
    {
        eprintln!("could not configure a single-threaded pool: {e}");
        return ExitCode::FAILURE;
    }
    let setup = random_contexts().and_then(|c| Ok((c, all_bundled()?)));
    let (contexts, scenarios) = match setup {
        Ok(v) => v,
        Err(e) => {
            eprintln!("setup failed: {e}");
            return ExitCode::FAILURE;
        }
    };

    let mut ok = true;
    ok &= report(
        1,
        "counterexample reproduction",
        counterexample_reproduction(),
    );
    ok &= report(2, "criteria blow-up", criteria_blowup());
    ok &= report(3, "first representation", first_representation(&contexts));
    ok &= report(4, "resolvent gap", resolvent_gap(&contexts, &scenarios));
    ok &= report(5, "off-diagonal construction", offdiagonal_theorem());
    ok &= report(6, "Lax-Milgram extraction", lax_milgram());
    ok &= report(7, "mu-family", mu_family());
    ok &= report(8, "polar interpolation", polar_interpolation());
    ok &= report(9, "Krein diagnosis", krein_diagnosis());
    ok &= report(10, "factorization", factorization(&scenarios));
    ok &= report(
        11,
        "second representation",
        second_representation(&contexts, &scenarios),
    );
    let elapsed = started.elapsed();
    ok &= report(
        12,
        "single-threaded wall time",
        if elapsed < Duration::from_secs(60) {
            Ok(format!("{:.2}s", elapsed.as_secs_f64()))
        } else {
            Err(format!("{:.2}s exceeds 60s", elapsed.as_secs_f64()).into())
        },
    );
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
