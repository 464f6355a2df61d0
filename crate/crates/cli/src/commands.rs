use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use p4lab_core::analysis::{guide_polylines, zero_structure_check, ZeroCheckTolerances};
use p4lab_core::io::{downsample, write_csv, TrajectoryDocument, SCHEMA};
use p4lab_core::search::{bisect_threshold, sweep as sweep_family, DEFAULT_TOL};
use p4lab_core::transforms::{
    negate_dependent, reverse_time, signed_sqrt_at_zero, sqrt_positive, square_trajectory,
};
use p4lab_core::{
    classify as classify_traj, detect_zeros, integrate_equation, EquationId, Family, Sign,
    SignedSqrtPlan, Trajectory,
};
use serde::Serialize;
use serde_json::json;

use crate::config::{Format, RunConfig};
use crate::{CliError, SignArg, TransformOp};

fn emit(out: Option<&Path>, bytes: &[u8]) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, bytes)
            .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            match stdout.write_all(bytes).and_then(|_| stdout.flush()) {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(CliError::runtime(e)),
                _ => Ok(()),
            }
        }
    }
}

/// Summary lines go to stdout when the data goes to a file, else to stderr.
fn summary(out: Option<&Path>, line: &str) {
    if out.is_some() {
        println!("{line}");
    } else {
        eprintln!("{line}");
    }
}

fn json_bytes(value: &impl Serialize) -> Result<Vec<u8>, CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(CliError::runtime)?;
    text.push('\n');
    Ok(text.into_bytes())
}

fn json_only(format: Format, what: &str) -> Result<(), CliError> {
    match format {
        Format::Json => Ok(()),
        Format::Csv => Err(CliError::Usage(format!("{what} reports are JSON only"))),
    }
}

fn csv_bytes(
    header: &[&str],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(CliError::runtime)?;
    for row in rows {
        w.write_record(&row).map_err(CliError::runtime)?;
    }
    w.into_inner().map_err(CliError::runtime)
}

fn trajectory_bytes(
    eq: EquationId,
    traj: &Trajectory,
    samples: Vec<p4lab_core::Sample>,
    format: Format,
) -> Result<Vec<u8>, CliError> {
    match format {
        Format::Json => {
            let doc = TrajectoryDocument::with_samples(eq, traj, samples);
            let mut text = doc.to_json().map_err(CliError::runtime)?;
            text.push('\n');
            Ok(text.into_bytes())
        }
        Format::Csv => {
            let mut buf = Vec::new();
            write_csv(&samples, &mut buf).map_err(CliError::runtime)?;
            Ok(buf)
        }
    }
}

fn run_config(cfg: &RunConfig) -> Result<Trajectory, CliError> {
    let ic = cfg.ic()?;
    cfg.check_well_posed(ic)?;
    integrate_equation(cfg.eq, ic, cfg.span()?, &cfg.control).map_err(CliError::runtime)
}

pub fn integrate(cfg: &RunConfig, max_samples: Option<usize>) -> Result<(), CliError> {
    let traj = run_config(cfg)?;
    let samples = match max_samples.or(cfg.file.max_samples) {
        Some(n) => downsample(&traj, n).map_err(|e| CliError::Usage(e.to_string()))?,
        None => traj.samples().to_vec(),
    };
    let n = samples.len();
    emit(
        cfg.out.as_deref(),
        &trajectory_bytes(cfg.eq, &traj, samples, cfg.format)?,
    )?;
    summary(
        cfg.out.as_deref(),
        &format!("termination: {}", traj.termination()),
    );
    summary(cfg.out.as_deref(), &format!("samples: {n}"));
    Ok(())
}

pub fn classify(cfg: &RunConfig) -> Result<(), CliError> {
    json_only(cfg.format, "classify")?;
    let traj = run_config(cfg)?;
    let span = cfg.span()?;
    let class = classify_traj(&traj, span, &cfg.params).map_err(CliError::runtime)?;
    let report = json!({
        "schema": SCHEMA,
        "equation": cfg.eq,
        "ic": traj.first().state(),
        "span": span,
        "control": cfg.control,
        "class": class,
        "stats": p4lab_core::search::RunStats::of(&traj),
    });
    emit(cfg.out.as_deref(), &json_bytes(&report)?)?;
    summary(cfg.out.as_deref(), &format!("class: {}", class.tag));
    summary(
        cfg.out.as_deref(),
        &format!("termination: {}", traj.termination()),
    );
    Ok(())
}

fn family(cfg: &RunConfig, probe_v: f64) -> Result<Family, CliError> {
    cfg.check_well_posed(p4lab_core::State::new(cfg.t0, cfg.y0, probe_v))?;
    let mut f = Family::new(cfg.eq, cfg.t0, cfg.y0, cfg.to)
        .map_err(|e| CliError::Usage(e.to_string()))?
        .with_control(cfg.control);
    f.params = cfg.params;
    Ok(f)
}

pub fn bisect(
    cfg: &RunConfig,
    lo: Option<f64>,
    hi: Option<f64>,
    tol: Option<f64>,
) -> Result<(), CliError> {
    json_only(cfg.format, "bisect")?;
    let missing =
        |name: &str| CliError::Usage(format!("missing --{name} (or {name} in the config file)"));
    let lo = lo.or(cfg.file.lo).ok_or_else(|| missing("lo"))?;
    let hi = hi.or(cfg.file.hi).ok_or_else(|| missing("hi"))?;
    let tol = tol.or(cfg.file.tol).unwrap_or(DEFAULT_TOL);
    let family = family(cfg, lo)?;
    let th = bisect_threshold(&family, lo, hi, tol).map_err(|e| match e {
        p4lab_core::search::SearchError::InvalidInput(m) => CliError::Usage(m),
        other => CliError::runtime(other),
    })?;
    let report = json!({
        "schema": SCHEMA,
        "family": family,
        "lo": lo,
        "hi": hi,
        "tol": tol,
        "threshold": th,
    });
    emit(cfg.out.as_deref(), &json_bytes(&report)?)?;
    summary(
        cfg.out.as_deref(),
        &format!(
            "bracket: [{}, {}] ({} | {}) after {} iterations",
            th.bracket[0], th.bracket[1], th.class_lo.tag, th.class_hi.tag, th.iterations
        ),
    );
    Ok(())
}

pub fn sweep(cfg: &RunConfig, values: &[f64]) -> Result<(), CliError> {
    let family = family(cfg, values[0])?;
    let rows = sweep_family(&family, values).map_err(CliError::runtime)?;
    let bytes = match cfg.format {
        Format::Json => json_bytes(&json!({
            "schema": SCHEMA,
            "family": family,
            "rows": rows,
        }))?,
        Format::Csv => csv_bytes(
            &["v", "class", "termination", "t_end", "max_abs_y", "zeros"],
            rows.iter().map(|r| {
                vec![
                    r.v.to_string(),
                    r.class.tag.to_string(),
                    r.stats.termination.to_string(),
                    r.stats.t_end.to_string(),
                    r.stats.max_abs_y.to_string(),
                    r.stats.zeros.to_string(),
                ]
            }),
        )?,
    };
    emit(cfg.out.as_deref(), &bytes)?;
    for r in &rows {
        summary(
            cfg.out.as_deref(),
            &format!("v={} class={}", r.v, r.class.tag),
        );
    }
    Ok(())
}

pub fn regions(
    tmin: f64,
    tmax: f64,
    n: usize,
    format: Option<Format>,
    out: Option<PathBuf>,
) -> Result<(), CliError> {
    if !(tmin.is_finite() && tmax.is_finite() && tmin < tmax) {
        return Err(CliError::Usage(format!(
            "need finite tmin < tmax, got [{tmin}, {tmax}]"
        )));
    }
    if n < 2 {
        return Err(CliError::Usage(format!("--n must be at least 2, got {n}")));
    }
    let lines = guide_polylines(tmin, tmax, n);
    let bytes = match format.unwrap_or(Format::Json) {
        Format::Json => json_bytes(&json!({
            "schema": SCHEMA,
            "tmin": tmin,
            "tmax": tmax,
            "n": n,
            "polylines": lines,
        }))?,
        Format::Csv => csv_bytes(
            &["curve", "t", "y"],
            lines.iter().flat_map(|l| {
                l.points
                    .iter()
                    .map(|p| vec![l.name.clone(), p[0].to_string(), p[1].to_string()])
            }),
        )?,
    };
    emit(out.as_deref(), &bytes)?;
    summary(out.as_deref(), &format!("curves: {}", lines.len()));
    Ok(())
}

fn read_document(input: &Path) -> Result<TrajectoryDocument, CliError> {
    let mut text = String::new();
    if input == Path::new("-") {
        std::io::stdin()
            .read_to_string(&mut text)
            .map_err(CliError::runtime)?;
    } else {
        text = std::fs::read_to_string(input)
            .map_err(|e| CliError::Runtime(format!("cannot read {}: {e}", input.display())))?;
    }
    TrajectoryDocument::from_json(&text)
        .map_err(|e| CliError::Runtime(format!("{}: {e}", input.display())))
}

pub fn transform(
    input: &Path,
    op: TransformOp,
    left_sign: SignArg,
    format: Option<Format>,
    out: Option<PathBuf>,
) -> Result<(), CliError> {
    let doc = read_document(input)?;
    let traj = doc.trajectory().map_err(CliError::runtime)?;
    let eq = doc.equation;
    let (result, eq_out) = match op {
        TransformOp::Square => {
            if !eq.is_half() {
                return Err(CliError::Usage(format!(
                    "square expects a phalf or pbarhalf trajectory, got {eq}"
                )));
            }
            (square_trajectory(&traj), eq.full())
        }
        TransformOp::Sqrt => {
            if eq.is_half() {
                return Err(CliError::Usage(format!(
                    "sqrt expects a p or pbar trajectory, got {eq}"
                )));
            }
            (sqrt_positive(&traj).map_err(CliError::runtime)?, eq.half())
        }
        TransformOp::SignedSqrt => {
            if eq.is_half() {
                return Err(CliError::Usage(format!(
                    "signed-sqrt expects a p or pbar trajectory, got {eq}"
                )));
            }
            let zero = *detect_zeros(&traj)
                .first()
                .ok_or_else(|| CliError::Runtime("no zero found; use --op sqrt".into()))?;
            let sign = match left_sign {
                SignArg::Minus => Sign::Minus,
                SignArg::Plus => Sign::Plus,
            };
            let rooted = signed_sqrt_at_zero(&traj, &SignedSqrtPlan::new(zero, sign))
                .map_err(CliError::runtime)?;
            (rooted, eq.half())
        }
        TransformOp::Negate => negate_dependent(&traj, eq),
        TransformOp::Reverse => reverse_time(&traj, eq),
    };
    let samples = result.samples().to_vec();
    emit(
        out.as_deref(),
        &trajectory_bytes(eq_out, &result, samples, format.unwrap_or(Format::Json))?,
    )?;
    summary(out.as_deref(), &format!("equation: {eq} -> {eq_out}"));
    Ok(())
}

pub fn zeros(cfg: &RunConfig, input: Option<&Path>) -> Result<(), CliError> {
    json_only(cfg.format, "zeros")?;
    let (traj, eq) = match input {
        Some(path) => {
            let doc = read_document(path)?;
            (doc.trajectory().map_err(CliError::runtime)?, doc.equation)
        }
        None => (run_config(cfg)?, cfg.eq),
    };
    let records = detect_zeros(&traj);
    let report = zero_structure_check(&traj, eq, &ZeroCheckTolerances::default());
    let value = json!({
        "schema": SCHEMA,
        "equation": eq,
        "zeros": records,
        "report": report,
    });
    emit(cfg.out.as_deref(), &json_bytes(&value)?)?;
    summary(
        cfg.out.as_deref(),
        &format!(
            "zeros: {}, violations: {}",
            records.len(),
            report.violations.len()
        ),
    );
    Ok(())
}
