//! The four CLI subcommands as library functions.

use std::path::{Path, PathBuf};

use acsigma_core::conductivity::MeasureOptions;
use serde_json::json;

use crate::absorb::{absorb, AbsorptionInputs};
use crate::config::RunConfig;
use crate::ensemble::{disorder_sweep, ensemble_average, temperature_sweep, SweepAxis, SweepTable};
use crate::error::LabError;
use crate::output::{num, OutputDir};
use crate::verify::{run_verify, VerifyOptions, VerifyReport};

fn out_dir(config: &RunConfig, out: Option<&Path>) -> Result<OutputDir, LabError> {
    let root = match (out, &config.output_dir) {
        (Some(p), _) => p.to_path_buf(),
        (None, Some(p)) => PathBuf::from(p),
        (None, None) => return Err(LabError::at("output_dir", "no output directory (set output_dir or pass --out)")),
    };
    OutputDir::create(&root, config.to_json())
}

/// Ensemble-averaged Σ: `sigma.csv` and `sigma.json`.
pub fn cmd_sigma(config: &RunConfig, out: Option<&Path>) -> Result<Vec<PathBuf>, LabError> {
    let cfg = config.resolve()?;
    let grid = cfg.frequency_grid()?;
    let ens = ensemble_average(
        &cfg.lattice,
        &cfg.disorder,
        &cfg.thermo,
        Some(&grid),
        cfg.realizations,
        &MeasureOptions::default(),
    )?;
    let mut dir = out_dir(config, out)?;
    let sig_err = ens.sigma.stderr.clone().unwrap_or_default();
    let ups_err = ens.upsilon.stderr.clone().unwrap_or_default();
    let rows: Vec<Vec<String>> = (0..grid.len())
        .map(|i| {
            vec![
                num(grid.left(i)),
                num(grid.right(i)),
                num(grid.center(i)),
                num(ens.sigma.mass[i]),
                num(sig_err[i]),
                num(ens.upsilon.mass[i]),
                num(ups_err[i]),
            ]
        })
        .collect();
    dir.write_csv(
        "sigma.csv",
        &["bin_left", "bin_right", "bin_center", "sigma", "sigma_stderr", "upsilon", "upsilon_stderr"],
        &rows,
    )?;
    dir.write_json(
        "sigma.json",
        json!({
            "realizations": ens.realizations(),
            "atom": ens.atom,
            "total": ens.total,
            "gamma": ens.gamma,
            "zero_cell": ens.zero_cell,
            "upsilon_total": ens.upsilon_total,
            "psi_total": ens.psi_total,
            "bins": grid.len(),
            "bin_radius": grid.hi(),
        }),
    )?;
    Ok(dir.written().to_vec())
}

pub fn cmd_verify(config: &RunConfig, out: Option<&Path>) -> Result<VerifyReport, LabError> {
    let cfg = config.resolve()?;
    let v = config.verify.as_ref();
    let options = VerifyOptions {
        fault: v.and_then(|v| v.fault),
        identity_realizations: v.and_then(|v| v.identity_realizations).unwrap_or(5),
    };
    let report = run_verify(&cfg, &options)?;
    if out.is_some() || config.output_dir.is_some() {
        let mut dir = out_dir(config, out)?;
        dir.write_json("verify.json", serde_json::to_value(&report).expect("plain data"))?;
    }
    Ok(report)
}

fn sweep_rows(table: &SweepTable) -> (Vec<&'static str>, Vec<Vec<String>>) {
    let columns = vec![
        "parameter",
        "total",
        "total_stderr",
        "atom",
        "atom_stderr",
        "gamma",
        "gamma_stderr",
        "atom_fraction",
        "atom_fraction_stderr",
        "zero_cell_fraction",
        "zero_cell_fraction_stderr",
        "upsilon_plus_psi",
        "upsilon_plus_psi_stderr",
        "t_sigma",
        "t_sigma_stderr",
        "high_temperature_violations",
        "min_gamma",
    ];
    let rows = table
        .points
        .iter()
        .map(|p| {
            let (ts, tse) = p.t_sigma.map_or((String::new(), String::new()), |e| (num(e.mean), num(e.stderr)));
            vec![
                num(p.parameter),
                num(p.total.mean),
                num(p.total.stderr),
                num(p.atom.mean),
                num(p.atom.stderr),
                num(p.gamma.mean),
                num(p.gamma.stderr),
                num(p.atom_fraction.mean),
                num(p.atom_fraction.stderr),
                num(p.zero_cell_fraction.mean),
                num(p.zero_cell_fraction.stderr),
                num(p.upsilon_plus_psi.mean),
                num(p.upsilon_plus_psi.stderr),
                ts,
                tse,
                p.high_temperature_violations.to_string(),
                num(p.min_gamma),
            ]
        })
        .collect();
    (columns, rows)
}

/// Trend assertions written next to each sweep table.
pub fn sweep_summary(table: &SweepTable, slope_from: f64) -> serde_json::Value {
    match table.axis {
        SweepAxis::Temperature => {
            let bounded = table.points.iter().all(|p| {
                let ts = p.t_sigma.expect("temperature sweeps record T·Σ");
                ts.mean <= std::f64::consts::FRAC_PI_4 * p.upsilon_plus_psi.mean + 3.0 * p.upsilon_plus_psi.stderr
            });
            let totals = table.totals();
            json!({
                "axis": "temperature",
                "high_temperature_bound_violations": table.points.iter().map(|p| p.high_temperature_violations).sum::<usize>(),
                "gamma_positive_everywhere": table.points.iter().all(|p| p.min_gamma > 0.0),
                "total_strictly_decreasing": table.strictly_decreasing_totals(),
                "t_sigma_bounded": bounded,
                "last_over_first": totals.last().unwrap() / totals[0],
            })
        }
        SweepAxis::Disorder => {
            // Collapse is a small-disorder statement: look below the slope window.
            let small: Vec<_> = table.points.iter().filter(|p| p.parameter < slope_from).collect();
            let monotone_cell = small.windows(2).all(|w| w[1].zero_cell_fraction.mean <= w[0].zero_cell_fraction.mean);
            let large = SweepTable {
                axis: table.axis,
                realizations: table.realizations,
                points: table.points.iter().filter(|p| p.parameter >= slope_from).cloned().collect(),
            };
            json!({
                "axis": "disorder",
                "total_strictly_decreasing_large_lambda": large.strictly_decreasing_totals(),
                "zero_cell_fraction_grows_as_lambda_shrinks": monotone_cell,
                "loglog_slope": table.loglog_slope(slope_from),
                "slope_from": slope_from,
            })
        }
    }
}

/// One CSV + JSON pair per requested axis; `axis = None` runs every axis
/// with a grid in the config.
pub fn cmd_sweep(config: &RunConfig, axis: Option<SweepAxis>, out: Option<&Path>) -> Result<Vec<PathBuf>, LabError> {
    let cfg = config.resolve()?;
    let sweep = config
        .sweep
        .as_ref()
        .ok_or_else(|| LabError::at("sweep", "no [sweep] table in the config"))?;
    let axes: Vec<SweepAxis> = match axis {
        Some(a) => vec![a],
        None => [
            sweep.temperatures.as_ref().map(|_| SweepAxis::Temperature),
            sweep.lambdas.as_ref().map(|_| SweepAxis::Disorder),
        ]
        .into_iter()
        .flatten()
        .collect(),
    };
    if axes.is_empty() {
        return Err(LabError::at("sweep", "set sweep.temperatures or sweep.lambdas"));
    }
    let mut dir = out_dir(config, out)?;
    for axis in axes {
        let table = match axis {
            SweepAxis::Temperature => {
                let ts = sweep
                    .temperatures
                    .as_ref()
                    .ok_or_else(|| LabError::at("sweep.temperatures", "missing grid"))?;
                let grid = cfg.frequency_grid()?;
                temperature_sweep(&cfg.lattice, &cfg.disorder, cfg.thermo.fermi_level, ts, Some(&grid), cfg.realizations)?
            }
            SweepAxis::Disorder => {
                let ls = sweep.lambdas.as_ref().ok_or_else(|| LabError::at("sweep.lambdas", "missing grid"))?;
                disorder_sweep(&cfg.lattice, &cfg.disorder, &cfg.thermo, ls, cfg.realizations)?
            }
        };
        let stem = match axis {
            SweepAxis::Temperature => "sweep_temperature",
            SweepAxis::Disorder => "sweep_disorder",
        };
        let (columns, rows) = sweep_rows(&table);
        dir.write_csv(&format!("{stem}.csv"), &columns, &rows)?;
        dir.write_json(
            &format!("{stem}.json"),
            json!({ "summary": sweep_summary(&table, sweep.slope_from), "table": table }),
        )?;
    }
    Ok(dir.written().to_vec())
}

/// `trace.csv` (smallest α) and `absorb.json`.
pub fn cmd_absorb(config: &RunConfig, out: Option<&Path>) -> Result<Vec<PathBuf>, LabError> {
    let cfg = config.resolve()?;
    let (pulse, alphas, extraction, width) = cfg
        .pulse
        .as_ref()
        .ok_or_else(|| LabError::at("pulse", "no [pulse] table in the config"))?;
    let (report, trace) = absorb(&AbsorptionInputs {
        lattice: &cfg.lattice,
        disorder: &cfg.disorder,
        thermo: &cfg.thermo,
        pulse,
        alphas,
        extraction,
        frequency_width: *width,
    })?;
    let mut dir = out_dir(config, out)?;
    let rows: Vec<Vec<String>> = (0..trace.times.len())
        .map(|k| vec![num(trace.times[k]), num(trace.field[k]), num(trace.current[k]), num(trace.work[k])])
        .collect();
    dir.write_csv("trace.csv", &["t", "field", "current", "work"], &rows)?;
    dir.write_json(
        "absorb.json",
        json!({
            "report": report,
            "trace_alpha": trace.alpha,
            "trace_drift": trace.trace_drift,
            "spectrum_drift": trace.spectrum_drift,
            "steps": trace.steps(),
        }),
    )?;
    Ok(dir.written().to_vec())
}
