use orthochain::functionals::{classify_good_indices, FunctionalReport};
use orthochain::opt::{duality_gap_report, maximize_weak, minimize_strong, OptimizationResult};
use orthochain::process::{lower_bound_report, simulate_sup_square, verify_chaining_bound};
use orthochain::series::{
    build_index_set, build_partition, make_measure, Depth, DiscreteMeasure, IndexSet, MeasureKind,
    PartitionTree, TailMass,
};
use orthochain::verify::{run_suite, Suite, SuiteContext};
use serde_json::{json, Value};

use crate::config::{DepthSetting, Format, Settings, DEFAULT_BASE_DEPTH};
use crate::{Body, CliError, Command, Objective};

pub(crate) fn dispatch(cmd: &Command, s: &Settings) -> Result<Body, CliError> {
    if s.format == Format::Csv && !matches!(cmd, Command::Evaluate(_) | Command::Classify(_)) {
        return Err(CliError::Usage(
            "csv output is only available for evaluate and classify".into(),
        ));
    }
    match cmd {
        Command::Build(_) => build(s),
        Command::Evaluate(_) => evaluate(s),
        Command::Classify(_) => classify(s),
        Command::Optimize(a) => optimize(s, a.objective),
        Command::Simulate(a) => simulate(s, a.generator),
        Command::Adversarial(_) => adversarial(s),
        Command::Verify(a) => verify(s, &a.suite, a.random_measures),
        Command::Pipeline(a) => pipeline(s, a.generator),
    }
}

fn to_value<T: serde::Serialize>(v: &T) -> Result<Value, CliError> {
    serde_json::to_value(v).map_err(|e| CliError::Output(e.to_string()))
}

fn json(result: Value) -> Body {
    Body::Json { result, pass: None }
}

struct Setup {
    set: IndexSet,
    tree: PartitionTree,
}

fn setup(s: &Settings) -> Result<Setup, CliError> {
    let set = build_index_set(s.coeffs()?)?;
    let tree = build_partition(&set, s.partition_depth())?;
    Ok(Setup { set, tree })
}

/// The measure named by `--measure`, and the optimizer run behind it if any.
fn measure(
    s: &Settings,
    set: &IndexSet,
    default: &str,
) -> Result<(DiscreteMeasure, Option<OptimizationResult>), CliError> {
    let spec = s.measure.as_deref().unwrap_or(default);
    let kind = match spec {
        "uniform" => MeasureKind::Uniform,
        "optimize" => {
            let r = minimize_strong(set, &s.optimizer)?;
            return Ok((r.measure.clone(), Some(r)));
        }
        _ => {
            if let Some(i) = spec.strip_prefix("point:") {
                MeasureKind::PointMass(
                    i.parse()
                        .map_err(|_| CliError::Usage(format!("bad point index '{i}'")))?,
                )
            } else if let Some(seed) = spec.strip_prefix("dirichlet:") {
                let seed = seed
                    .parse()
                    .map_err(|_| CliError::Usage(format!("bad dirichlet seed '{seed}'")))?;
                MeasureKind::Dirichlet { seed }
            } else {
                let text = std::fs::read_to_string(spec).map_err(|e| {
                    CliError::Usage(format!(
                        "measure must be uniform, optimize or a file ({spec}: {e})"
                    ))
                })?;
                let m: DiscreteMeasure = serde_json::from_str(&text)
                    .map_err(|e| CliError::Usage(format!("invalid measure file {spec}: {e}")))?;
                m.check_against(set)?;
                return Ok((m, None));
            }
        }
    };
    Ok((make_measure(set, kind)?, None))
}

fn tail_diagnostics(s: &Settings) -> Result<(Value, Vec<String>), CliError> {
    let c = s.coeffs()?;
    let tail = c.tail_mass();
    let mut warnings = Vec::new();
    if tail == TailMass::Divergent {
        warnings.push(format!(
            "tail mass sum_{{n>{}}} a_n^2 diverges: every value describes the truncated series only",
            c.len()
        ));
    }
    for w in &warnings {
        log::warn!("{w}");
    }
    Ok((
        json!({ "truncation": c.len(), "family": c.family(), "tail_mass": tail }),
        warnings,
    ))
}

fn build(s: &Settings) -> Result<Body, CliError> {
    let Setup { set, tree } = setup(s)?;
    let (diag, warnings) = tail_diagnostics(s)?;
    Ok(json(json!({
        "index_set": to_value(&set.export())?,
        "partition": to_value(&tree.export())?,
        "diagnostics": diag,
        "warnings": warnings,
    })))
}

fn functional_report(
    s: &Settings,
    setup: &Setup,
    m: &DiscreteMeasure,
) -> Result<(FunctionalReport, Value), CliError> {
    let report = FunctionalReport::compute(Some(s.coeffs()?), &setup.set, &setup.tree, m)?;
    let mut value = to_value(&report)?;
    if let Some(sel) = &s.functionals {
        let drop: &[(&str, &[&str])] = &[
            (
                "strong",
                &[
                    "strong_value",
                    "strong_argmax",
                    "strong_argmax_point",
                    "infinite",
                    "points",
                ],
            ),
            ("weak", &["weak_value"]),
            ("dyadic", &["dyadic_bound_value"]),
            (
                "filtered",
                &["filtered_sum", "filtered_bound_value", "levels"],
            ),
            ("rm", &["rm_value", "rm_table"]),
        ];
        let obj = value.as_object_mut().expect("report is an object");
        for (name, keys) in drop {
            if !sel.iter().any(|x| x == name) {
                keys.iter().for_each(|k| {
                    obj.remove(*k);
                });
            }
        }
    }
    Ok((report, value))
}

fn evaluate(s: &Settings) -> Result<Body, CliError> {
    let setup = setup(s)?;
    let (m, opt) = measure(s, &setup.set, "uniform")?;
    let (report, value) = functional_report(s, &setup, &m)?;
    if s.format == Format::Csv {
        let mut buf = Vec::new();
        report.write_levels_csv(&mut buf)?;
        return Ok(Body::Csv(buf));
    }
    let (diag, warnings) = tail_diagnostics(s)?;
    Ok(json(json!({
        "functionals": value,
        "measure": to_value(&m)?,
        "optimizer": to_value(&opt)?,
        "diagnostics": diag,
        "warnings": warnings,
    })))
}

fn classify(s: &Settings) -> Result<Body, CliError> {
    let setup = setup(s)?;
    let (m, _) = measure(s, &setup.set, "uniform")?;
    let table = classify_good_indices(&m, &setup.tree)?;
    if s.format == Format::Csv {
        let mut buf = Vec::new();
        table.write_csv(&mut buf)?;
        return Ok(Body::Csv(buf));
    }
    Ok(json(json!({
        "separation_depth": setup.tree.separation_depth(),
        "last_good_level": table.last_good_level(),
        "filtered_total": table.filtered_total(),
        "table": to_value(&table)?,
    })))
}

fn optimize(s: &Settings, objective: Objective) -> Result<Body, CliError> {
    let set = build_index_set(s.coeffs()?)?;
    let result = match objective {
        Objective::Strong => to_value(&minimize_strong(&set, &s.optimizer)?)?,
        Objective::Weak => {
            s.seed("optimize --objective weak")?;
            to_value(&maximize_weak(&set, &s.optimizer)?)?
        }
        Objective::Duality => {
            s.seed("optimize")?;
            to_value(&duality_gap_report(&set, &s.optimizer)?)?
        }
    };
    Ok(json(result))
}

fn simulate(
    s: &Settings,
    generator: Option<orthochain::process::GeneratorKind>,
) -> Result<Body, CliError> {
    let seed = s.seed("simulate")?;
    let gen = generator.unwrap_or(s.generator);
    let est = simulate_sup_square(s.coeffs()?, gen, s.paths, seed)?;
    Ok(json(
        json!({ "generator": gen, "estimate": to_value(&est)? }),
    ))
}

fn base_depth(s: &Settings, tree: &PartitionTree) -> u32 {
    match s.depth {
        Some(DepthSetting::Level(k)) => k,
        Some(DepthSetting::Auto) => tree.separation_depth(),
        None => s.base_depth.unwrap_or(DEFAULT_BASE_DEPTH),
    }
}

fn adversarial(s: &Settings) -> Result<Body, CliError> {
    let seed = s.seed("adversarial")?;
    let set = build_index_set(s.coeffs()?)?;
    let tree = build_partition(&set, Depth::Auto)?;
    let (m, _) = measure(s, &set, "uniform")?;
    let r = lower_bound_report(&set, &m, &tree, base_depth(s, &tree), s.paths, seed)?;
    Ok(Body::Json {
        pass: Some(r.pass),
        result: to_value(&r)?,
    })
}

fn verify(s: &Settings, suite: &str, random_measures: Option<usize>) -> Result<Body, CliError> {
    let suites = Suite::parse_list(suite).map_err(|e| CliError::Usage(e.to_string()))?;
    let seed = if suites == [Suite::Skeleton] {
        s.seed.unwrap_or(0)
    } else {
        s.seed("verify")?
    };
    let needs_set = suites
        .iter()
        .any(|x| !matches!(x, Suite::Skeleton | Suite::LevelMoments));
    let ctx = if needs_set {
        let set = build_index_set(s.coeffs()?)?;
        let (m, _) = measure(s, &set, "uniform")?;
        let mut ctx = SuiteContext::new(s.coeffs()?.clone(), Some(m), s.paths, seed)?;
        ctx.random_measures = random_measures.unwrap_or(s.random_measures);
        if let Some(d) = s.base_depth {
            ctx.base_depth = d;
        }
        Some(ctx)
    } else {
        None
    };
    let mut all_pass = true;
    let mut reports = Vec::new();
    for suite in suites {
        let checks = match (&ctx, suite) {
            (_, Suite::Skeleton) => orthochain::verify::skeleton_checks(),
            (_, Suite::LevelMoments) => orthochain::verify::level_moment_checks(seed, 50),
            (Some(ctx), other) => run_suite(other, ctx)?,
            (None, _) => unreachable!("context is built whenever a suite needs it"),
        };
        let pass = checks.iter().all(|c| c.pass);
        all_pass &= pass;
        reports.push(json!({
            "suite": suite.name(),
            "pass": pass,
            "failed": checks.iter().filter(|c| !c.pass).count(),
            "checks": to_value(&checks)?,
        }));
    }
    Ok(Body::Json {
        pass: Some(all_pass),
        result: json!({ "suites": reports }),
    })
}

fn stage<T>(name: &'static str, r: Result<T, impl Into<CliError>>) -> Result<T, CliError> {
    r.map_err(|e| match e.into() {
        CliError::Usage(m) => CliError::Usage(m),
        other => CliError::Stage {
            stage: name,
            message: other.to_string(),
        },
    })
}

fn pipeline(
    s: &Settings,
    generator: Option<orthochain::process::GeneratorKind>,
) -> Result<Body, CliError> {
    let seed = s.seed("pipeline")?;
    let coeffs = s.coeffs()?;
    let gen = generator.unwrap_or(s.generator);
    let setup = stage("build", setup(s))?;
    let (diag, warnings) = tail_diagnostics(s)?;
    let (m, opt) = stage("optimize", measure(s, &setup.set, "optimize"))?;
    let (report, functionals) = stage("evaluate", functional_report(s, &setup, &m))?;
    let chaining = stage(
        "chaining",
        verify_chaining_bound(coeffs, &m, gen, s.paths, seed),
    )?;
    let depth = base_depth(s, &setup.tree);
    let lower = stage(
        "lowerbound",
        lower_bound_report(
            &setup.set,
            &m,
            &setup.tree,
            depth,
            s.paths,
            seed.wrapping_add(1),
        ),
    )?;
    let pass = chaining.pass && lower.pass && report.weak_value <= report.strong_value;
    Ok(Body::Json {
        pass: Some(pass),
        result: json!({
            "index_set": to_value(&setup.set.export())?,
            "separation_depth": setup.tree.separation_depth(),
            "diagnostics": diag,
            "warnings": warnings,
            "optimizer": to_value(&opt)?,
            "measure": to_value(&m)?,
            "functionals": functionals,
            "chaining": to_value(&chaining)?,
            "lower_bound": to_value(&lower)?,
        }),
    })
}
