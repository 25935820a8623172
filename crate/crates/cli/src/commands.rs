use serde::Serialize;
use serde_json::{json, Value};

use piezo::disorder::{disorder_sweep, sweep_csv};
use piezo::polarization::{dynamical_polarization, ksv_quantized, ksv_riemann, PolarizationResult};
use piezo::spectral::{gap_map, min_gap_along_loop, GapOptions};
use piezo::symmetry::{check_inversion, classify_symbol, inversion_residual, symmetry_class};
use piezo::topology::{chern_matrix, triviality_check, ChernOptions};

use crate::config::{Command, PolarizationMethod, Run};
use crate::{CliError, Outcome};

pub fn execute(command: Command, run: &Run) -> Result<Outcome, CliError> {
    match command {
        Command::GapMap => gap_map_cmd(run),
        Command::Chern => chern_cmd(run),
        Command::Polarization => polarization_cmd(run),
        Command::Disorder => disorder_cmd(run),
        Command::Symmetry => symmetry_cmd(run),
        Command::LoopInfo => loop_info_cmd(run),
    }
}

fn value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("results serialize")
}

fn report(result: Value) -> Outcome {
    Outcome { result, table: None, warnings: Vec::new() }
}

fn gap_map_cmd(run: &Run) -> Result<Outcome, CliError> {
    let c = &run.config;
    let region = c.region.as_ref().expect("validated");
    let map = gap_map(&run.model, region, c.e_f, &GapOptions::with_n_k(c.n_k()))?;
    let distances = map.cells.iter().map(|cell| cell.report.min_distance);
    let min = distances.clone().fold(f64::INFINITY, f64::min);
    let max = distances.fold(0.0, f64::max);
    let result = json!({
        "rows": map.cells.len(),
        "gapless_rows": map.gapless_count(),
        "min_distance": min,
        "max_distance": max,
    });
    Ok(Outcome { result, table: Some(map.to_csv()), warnings: Vec::new() })
}

/// The smallest spectral distance along the loop, for failure reports.
fn gap_diagnostics(run: &Run) -> Option<Value> {
    let opts = GapOptions::with_n_k(run.config.n_k().max(8));
    min_gap_along_loop(&run.model, &run.path, run.config.e_f, &opts).ok().map(|g| {
        json!({ "min_gap": value(&g), "at_parameters": g.argmin_t.map(|t| run.path.eval(t)) })
    })
}

fn with_gap_diagnostics(run: &Run, e: piezo::Error) -> CliError {
    match CliError::from(e) {
        CliError::Numerical { message, .. } => CliError::Numerical { message, diagnostics: gap_diagnostics(run) },
        other => other,
    }
}

fn chern_cmd(run: &Run) -> Result<Outcome, CliError> {
    let c = &run.config;
    let opts = ChernOptions { n: c.n_k(), seed: c.seed, ..Default::default() };
    let r = chern_matrix(&run.model, &run.path, c.e_f, &opts).map_err(|e| with_gap_diagnostics(run, e))?;
    Ok(report(value(&r)))
}

#[derive(Serialize)]
struct Polarization<'a> {
    #[serde(flatten)]
    result: &'a PolarizationResult,
    nearest_integers: Vec<i64>,
}

fn polarization_cmd(run: &Run) -> Result<Outcome, CliError> {
    let c = &run.config;
    let r = match c.method {
        PolarizationMethod::Quantized => ksv_quantized(&run.model, &run.path, c.e_f, c.n_k()),
        PolarizationMethod::Riemann => ksv_riemann(&run.model, &run.path, c.e_f, c.n_k(), c.n_t()),
        PolarizationMethod::Dynamical => dynamical_polarization(&run.model, &run.path, c.e_f, &c.dynamical()),
    }
    .map_err(|e| with_gap_diagnostics(run, e))?;
    let nearest_integers = r.nearest_integers()?;
    Ok(report(value(&Polarization { result: &r, nearest_integers })))
}

fn disorder_cmd(run: &Run) -> Result<Outcome, CliError> {
    let c = &run.config;
    let rows = disorder_sweep(
        &run.model,
        &run.path,
        c.e_f,
        &c.disorder.lambdas,
        &c.disorder.seeds,
        c.grids.l,
        c.n_t(),
    )
    .map_err(|e| with_gap_diagnostics(run, e))?;
    let warnings: Vec<String> = rows
        .iter()
        .filter_map(|r| r.failure.as_ref().map(|f| format!("λ = {}, seed {}: {f}", r.lambda, r.seed)))
        .collect();
    let snapped: Vec<Option<Vec<i64>>> = rows
        .iter()
        .map(|r| (!r.failed()).then(|| r.delta_p.iter().map(|v| v.round() as i64).collect()))
        .collect();
    let result = json!({
        "rows": rows.len(),
        "failed_rows": warnings.len(),
        "snapped": snapped,
        "min_gap": rows.iter().map(|r| r.min_gap).fold(f64::INFINITY, f64::min),
    });
    Ok(Outcome { result, table: Some(sweep_csv(&rows)), warnings })
}

fn symmetry_cmd(run: &Run) -> Result<Outcome, CliError> {
    let c = &run.config;
    let verdict = symmetry_class(c.symmetry.m)?;
    let inversion = match &c.symmetry.q {
        Some(q) => {
            let symbol = run.model.symbol(q)?;
            Some(json!({
                "q": q,
                "symmetric": check_inversion(&symbol, c.n_k())?,
                "residual": inversion_residual(&symbol, c.n_k())?,
                "symbol_class": value(&classify_symbol(&symbol, c.n_k())?),
            }))
        }
        None => None,
    };
    Ok(report(json!({ "class": value(&verdict), "inversion": inversion })))
}

fn loop_info_cmd(run: &Run) -> Result<Outcome, CliError> {
    let c = &run.config;
    let l = &run.path;
    let gap = min_gap_along_loop(&run.model, l, c.e_f, &GapOptions::with_n_k(c.n_k()))?;
    let mut warnings = Vec::new();
    let triviality = if gap.gapped {
        match triviality_check(&run.model, l, c.n_k()) {
            Ok(t) => Some(value(&t)),
            Err(e) => {
                warnings.push(format!("triviality check skipped: {e}"));
                None
            }
        }
    } else {
        warnings.push(format!("loop is not gapped (min distance {:.3e})", gap.min_distance));
        None
    };
    let result = json!({
        "spec": value(&l.spec()),
        "dimension": l.dimension(),
        "smoothness": value(&l.smoothness()),
        "samples": l.samples(),
        "start": l.eval(0.0),
        "closure_gap": l.closure_gap(),
        "gap": value(&gap),
        "triviality": triviality,
    });
    Ok(Outcome { result, table: None, warnings })
}
