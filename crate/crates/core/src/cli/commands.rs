use std::path::Path;

use num_complex::Complex64 as C64;
use serde::Deserialize;
use serde_json::{json, Map, Value};

use super::model_file::{self, ModelFile, Pair};
use super::report::{self, cmat, complex, cvec, envelope, fmt_f64, num, opt_num, rvec};
use super::verify::{self, VerifyOptions, VerifyTolerances};
use super::{CliError, Command, Common, Emit, ParamMap};
use crate::analysis::{self, analyze, Analysis, Tolerances};
use crate::error::Error;
use crate::exec::Execution;
use crate::linalg::{self, CMat};
use crate::oracle;
use crate::spectral::{self, Stability};

struct Loaded {
    sha256: String,
    doc: Value,
    analysis: Analysis,
}

fn tolerances(common: &Common) -> Tolerances {
    Tolerances {
        input: common.tol,
        marginal: common.tol_marginal,
    }
}

fn execution(common: &Common) -> Execution {
    if common.sequential {
        Execution::Sequential
    } else {
        Execution::default()
    }
}

fn read(path: &Path) -> Result<Vec<u8>, CliError> {
    std::fs::read(path).map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))
}

fn load(common: &Common) -> Result<Loaded, CliError> {
    let bytes = read(&common.model)?;
    let origin = common.model.display().to_string();
    let text = String::from_utf8(bytes.clone()).map_err(|_| CliError::Input(format!("{origin}: not UTF-8")))?;
    let doc = model_file::parse_value(&text, &origin)?;
    let file = model_file::model_from_value(doc.clone(), &origin)?;
    let analysis = analyze(file.to_model()?, tolerances(common))?;
    Ok(Loaded {
        sha256: report::sha256_hex(&bytes),
        doc,
        analysis,
    })
}

pub fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::Analyze { common } => cmd_analyze(&common),
        Command::Ness { common } => cmd_ness(&common),
        Command::Spectrum {
            common,
            max_excitation,
            limit,
            emit,
        } => cmd_spectrum(&common, max_excitation, limit, emit),
        Command::Dynamics {
            common,
            t0,
            t1,
            steps,
            initial,
            emit,
        } => cmd_dynamics(&common, t0, t1, steps, &initial, emit),
        Command::Verify {
            common,
            cutoff,
            t1,
            steps,
        } => cmd_verify(&common, cutoff, t1, steps),
        Command::Sweep {
            common,
            param,
            from,
            to,
            steps,
            map,
            emit,
        } => cmd_sweep(&common, &param, from, to, steps, map, emit),
    }
}

fn write_json(common: &Common, value: &Value) -> Result<(), CliError> {
    report::emit(common.output.as_deref(), &report::json_bytes(value))
}

fn cell_value(cell: &str) -> Value {
    if cell.is_empty() {
        return Value::Null;
    }
    match serde_json::from_str::<serde_json::Number>(cell) {
        Ok(n) => Value::Number(n),
        Err(_) => Value::String(cell.to_string()),
    }
}

/// Emit a table as CSV or as a JSON report with one object per row.
fn write_table(
    common: &Common,
    loaded: &Loaded,
    command: &str,
    header: &[String],
    rows: &[Vec<String>],
    emit: Emit,
) -> Result<(), CliError> {
    match emit {
        Emit::Csv => report::emit(common.output.as_deref(), &report::csv_bytes(header, rows)?),
        Emit::Json => {
            let table: Vec<Value> = rows
                .iter()
                .map(|row| {
                    let obj: Map<String, Value> = header.iter().cloned().zip(row.iter().map(|c| cell_value(c))).collect();
                    Value::Object(obj)
                })
                .collect();
            let doc = envelope(
                command,
                &loaded.sha256,
                &loaded.analysis.tol,
                Map::new(),
                json!({ "columns": header, "rows": table }),
            );
            write_json(common, &doc)
        }
    }
}

fn analysis_results(a: &Analysis) -> Value {
    json!({
        "n": a.n(),
        "rapidities": cvec(&a.spectrum.beta),
        "stability": a.stability().as_str(),
        "min_re_beta": num(a.min_re_beta()),
        "gap": opt_num(a.gap()),
        "cond_p": num(a.spectrum.cond_p),
        "s0": complex(a.structure.s0),
        "trace_x": complex(linalg::trace(&a.structure.x)),
        "trace_identity_residual": num(a.trace_identity_residual()),
        "conjugate_pair_defect": num(spectral::conjugate_pair_defect(&a.spectrum.beta)),
        "symmetrized_input": a.model.symmetrized(),
    })
}

pub fn cmd_analyze(common: &Common) -> Result<(), CliError> {
    let loaded = load(common)?;
    let doc = envelope(
        "analyze",
        &loaded.sha256,
        &loaded.analysis.tol,
        Map::new(),
        analysis_results(&loaded.analysis),
    );
    write_json(common, &doc)
}

pub fn cmd_ness(common: &Common) -> Result<(), CliError> {
    let loaded = load(common)?;
    let a = &loaded.analysis;
    let ss = a.steady_state()?;
    let corr = &ss.correlators;
    let occupations: Vec<f64> = (0..a.n()).map(|j| corr.occupations[j] + ss.mean[j].norm_sqr()).collect();
    let results = json!({
        "n": a.n(),
        "stability": a.stability().as_str(),
        "rapidities": cvec(&a.spectrum.beta),
        "z": cmat(&ss.lyapunov.z),
        "pair_aa": cmat(&corr.pair_aa),
        "pair_adad": cmat(&corr.pair_adad),
        "normal_ad_a": cmat(&corr.normal_ad_a),
        "mean": cvec(&ss.mean[..a.n()]),
        "occupations": rvec(&occupations),
        "lyapunov_residual": num(ss.lyapunov.residual),
        "method": ss.lyapunov.method.as_str(),
        "symplectic_residual": opt_num(ss.symplectic.as_ref().map(|v| v.symplectic_residual)),
        "similarity_residual": opt_num(ss.symplectic.as_ref().map(|v| v.similarity_residual)),
    });
    let doc = envelope("ness", &loaded.sha256, &a.tol, Map::new(), results);
    write_json(common, &doc)
}

pub fn cmd_spectrum(common: &Common, max_excitation: usize, limit: usize, emit: Emit) -> Result<(), CliError> {
    let loaded = load(common)?;
    let a = &loaded.analysis;
    let modes = a.decay_modes(max_excitation, limit, execution(common))?;
    let slots = 2 * a.n();
    let mut header: Vec<String> = (1..=slots).map(|r| format!("m_{r}")).collect();
    header.push("re_lambda".into());
    header.push("im_lambda".into());
    let rows: Vec<Vec<String>> = modes
        .iter()
        .map(|mode| {
            let mut row: Vec<String> = mode.m.iter().map(|v| v.to_string()).collect();
            row.push(fmt_f64(mode.lambda.re));
            row.push(fmt_f64(mode.lambda.im));
            row
        })
        .collect();
    write_table(common, &loaded, "spectrum", &header, &rows, emit)
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct InitialFile {
    #[serde(rename = "C")]
    c: Vec<Vec<Pair>>,
    #[serde(default)]
    mean: Option<Vec<Pair>>,
}

fn initial_state(source: &str, n: usize) -> Result<(CMat, Vec<C64>), CliError> {
    if source == "vacuum" {
        return Ok(analysis::vacuum(n));
    }
    let path = Path::new(source);
    let text = String::from_utf8(read(path)?).map_err(|_| CliError::Input(format!("{source}: not UTF-8")))?;
    let value = model_file::parse_value(&text, source)?;
    let init: InitialFile =
        serde_json::from_value(value).map_err(|e| CliError::Input(format!("{source}: schema error: {e}")))?;
    let d = 2 * n;
    if init.c.len() != d || init.c.iter().any(|row| row.len() != d) {
        return Err(CliError::Input(format!("{source}: C must be {d} x {d}")));
    }
    let c0 = faer::Mat::from_fn(d, d, |i, j| C64::new(init.c[i][j][0], init.c[i][j][1]));
    let mut m0 = vec![linalg::ZERO; d];
    if let Some(mean) = init.mean {
        if mean.len() != n {
            return Err(CliError::Input(format!("{source}: mean must have {n} entries")));
        }
        for j in 0..n {
            m0[j] = C64::new(mean[j][0], mean[j][1]);
            m0[n + j] = m0[j].conj();
        }
    }
    Ok((c0, m0))
}

/// Offsets from `t0` of a uniform grid; a single point when `t1 == t0`.
pub fn time_offsets(t0: f64, t1: f64, steps: usize) -> Result<Vec<f64>, CliError> {
    if !(t0.is_finite() && t1.is_finite()) || t1 < t0 {
        return Err(CliError::Input(format!("invalid time range [{t0}, {t1}]")));
    }
    if steps == 0 {
        return Err(CliError::Input("steps must be at least 1".into()));
    }
    if steps == 1 || t1 == t0 {
        return Ok(vec![0.0]);
    }
    let span = t1 - t0;
    Ok((0..steps).map(|i| span * i as f64 / (steps - 1) as f64).collect())
}

pub fn cmd_dynamics(common: &Common, t0: f64, t1: f64, steps: usize, initial: &str, emit: Emit) -> Result<(), CliError> {
    let loaded = load(common)?;
    let a = &loaded.analysis;
    let n = a.n();
    let (c0, m0) = initial_state(initial, n)?;
    let offsets = time_offsets(t0, t1, steps)?;
    if a.stability() == Stability::Unstable {
        eprintln!(
            "WARNING: unstable model (min Re beta = {:.6e}); moments grow without bound",
            a.min_re_beta()
        );
    }
    let dynamics = a.dynamics(&c0, &m0, &offsets, execution(common))?;
    let fixed = match a.stability() {
        Stability::Stable => Some(a.steady_state()?.lyapunov.z),
        _ => None,
    };

    let mut header = vec!["t".to_string()];
    header.extend((1..=n).map(|j| format!("n_{j}")));
    for j in 1..=n {
        header.push(format!("re_aa_{j}"));
        header.push(format!("im_aa_{j}"));
    }
    for j in 1..=n {
        header.push(format!("re_a_{j}"));
        header.push(format!("im_a_{j}"));
    }
    header.push("dist_to_ness".into());

    let rows: Vec<Vec<String>> = offsets
        .iter()
        .enumerate()
        .map(|(i, dt)| {
            let mut row = vec![fmt_f64(t0 + dt)];
            row.extend((0..n).map(|j| fmt_f64(dynamics.full(i, j, n + j).re)));
            for j in 0..n {
                let aa = dynamics.full(i, j, j);
                row.push(fmt_f64(aa.re));
                row.push(fmt_f64(aa.im));
            }
            for j in 0..n {
                row.push(fmt_f64(dynamics.mean[i][j].re));
                row.push(fmt_f64(dynamics.mean[i][j].im));
            }
            row.push(
                fixed
                    .as_ref()
                    .map_or(String::new(), |z| fmt_f64(linalg::frob(&(&dynamics.covariance.c[i] - z)))),
            );
            row
        })
        .collect();
    write_table(common, &loaded, "dynamics", &header, &rows, emit)
}

fn comparison_json(c: &verify::Comparison) -> Value {
    json!({
        "label": c.label,
        "analytic": complex(c.analytic),
        "oracle": complex(c.oracle),
        "delta": num(c.delta()),
    })
}

pub fn cmd_verify(common: &Common, cutoff: Option<usize>, t1: Option<f64>, steps: usize) -> Result<(), CliError> {
    let loaded = load(common)?;
    let a = &loaded.analysis;
    let ss = a.steady_state()?;
    let occupations: Vec<f64> = (0..a.n())
        .map(|j| ss.correlators.occupations[j] + ss.mean[j].norm_sqr())
        .collect();
    let gap = a.gap().expect("stable model has a gap");
    let mut opts = VerifyOptions {
        cutoff: cutoff.unwrap_or_else(|| oracle::recommended_cutoff(&occupations)),
        cap: oracle::memory_cap(),
        t1: t1.unwrap_or_else(|| verify::default_horizon(gap)),
        steps,
        tol: VerifyTolerances::for_modes(a.n()),
        exec: execution(common),
    };
    let v = loop {
        match verify::verify(a, &opts) {
            // an explicit cutoff is taken as given; the heuristic one grows
            // until the top Fock level is empty enough or the cap is hit
            Err(Error::TruncationInsufficient { population }) if cutoff.is_none() => {
                let next = opts.cutoff + opts.cutoff.div_ceil(2);
                if oracle::build_fock_operators(a.n(), next, opts.cap).is_err() {
                    return Err(Error::TruncationInsufficient { population }.into());
                }
                log::info!("cutoff {} insufficient (top level {population:.3e}), trying {next}", opts.cutoff);
                opts.cutoff = next;
            }
            other => break other?,
        }
    };

    let mut extra = Map::new();
    extra.insert("moment".into(), num(opts.tol.moment));
    extra.insert("wick".into(), num(opts.tol.wick));
    extra.insert("spectrum".into(), num(opts.tol.spectrum));
    extra.insert("trajectory".into(), num(opts.tol.trajectory));
    extra.insert("trace_preservation".into(), num(verify::TRACE_TOL));

    let worst = v.worst();
    let results = json!({
        "n": a.n(),
        "cutoff": v.cutoff,
        "hilbert_dim": v.dim,
        "top_level_population": num(v.top_population),
        "trace_preservation_residual": num(v.trace_residual),
        "moments": v.moments.iter().map(comparison_json).collect::<Vec<_>>(),
        "wick": v.wick.iter().map(comparison_json).collect::<Vec<_>>(),
        "spectrum": v.spectrum.iter().map(|(m, c)| {
            json!({ "m": m, "analytic": complex(c.analytic), "oracle": complex(c.oracle), "delta": num(c.delta()) })
        }).collect::<Vec<_>>(),
        "trajectory": {
            "t1": num(opts.t1),
            "samples": v.trajectory_times.len(),
            "max_deviation": num(v.trajectory_deviation),
        },
        "checks": v.checks.iter().map(|c| {
            json!({ "name": c.name, "delta": num(c.delta), "tol": num(c.tol), "pass": c.passed() })
        }).collect::<Vec<_>>(),
        "verdict": if v.passed() { "PASS" } else { "FAIL" },
        "worst": worst.name,
    });
    let doc = envelope("verify", &loaded.sha256, &a.tol, extra, results);
    write_json(common, &doc)?;
    if v.passed() {
        eprintln!("PASS (worst {}: {:.3e} <= {:.1e})", worst.name, worst.delta, worst.tol);
        Ok(())
    } else {
        Err(CliError::Verification(format!(
            "{} deviates by {:.3e}, tolerance {:.1e}",
            worst.name, worst.delta, worst.tol
        )))
    }
}

/// Grid point `i` of `steps` points on `[from, to]`.
pub fn grid_value(from: f64, to: f64, steps: usize, i: usize) -> f64 {
    if steps <= 1 {
        from
    } else {
        from + (to - from) * i as f64 / (steps - 1) as f64
    }
}

fn apply_map(map: ParamMap, x: f64) -> Result<f64, CliError> {
    match map {
        ParamMap::Identity => Ok(x),
        ParamMap::Square => Ok(x * x),
        ParamMap::Sqrt if x >= 0.0 => Ok(x.sqrt()),
        ParamMap::Sqrt => Err(CliError::Input(format!("sqrt map needs non-negative values, got {x}"))),
    }
}

fn sweep_row(doc: &Value, path: &str, value: f64, map: ParamMap, tol: Tolerances) -> Result<Vec<String>, CliError> {
    let applied = apply_map(map, value)?;
    let mut doc = doc.clone();
    model_file::set_path(&mut doc, path, applied)?;
    let file: ModelFile = model_file::model_from_value(doc, path)?;
    let a = analyze(file.to_model()?, tol)?;
    let (stability, occ) = analysis::summary(&a)?;
    let mut row = vec![
        fmt_f64(value),
        fmt_f64(applied),
        fmt_f64(a.min_re_beta()),
        stability.as_str().to_string(),
        a.gap().map_or(String::new(), fmt_f64),
    ];
    match occ {
        Some(occ) => row.extend(occ.into_iter().map(fmt_f64)),
        None => row.extend((0..a.n()).map(|_| String::new())),
    }
    Ok(row)
}

#[allow(clippy::too_many_arguments)]
pub fn cmd_sweep(
    common: &Common,
    path: &str,
    from: f64,
    to: f64,
    steps: usize,
    map: ParamMap,
    emit: Emit,
) -> Result<(), CliError> {
    if steps == 0 {
        return Err(CliError::Input("steps must be at least 1".into()));
    }
    if !(from.is_finite() && to.is_finite()) {
        return Err(CliError::Input("sweep bounds must be finite".into()));
    }
    let loaded = load(common)?;
    // reject bad paths before spending any work on the grid
    model_file::set_path(&mut loaded.doc.clone(), path, 0.0)?;
    let n = loaded.analysis.n();
    let tol = loaded.analysis.tol;
    let grid: Vec<f64> = (0..steps).map(|i| grid_value(from, to, steps, i)).collect();
    let rows = execution(common)
        .map(&grid, |&v| sweep_row(&loaded.doc, path, v, map, tol))
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;
    let mut header: Vec<String> = ["value", "applied", "min_re_beta", "stability", "gap"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    header.extend((1..=n).map(|j| format!("occ_{j}")));
    write_table(common, &loaded, "sweep", &header, &rows, emit)
}
