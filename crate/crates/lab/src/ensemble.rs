//! Disorder averages and parameter sweeps.
//!
//! Realizations are evaluated in parallel but always collected in index
//! order, so every reduction runs in the same sequence regardless of thread
//! count or scheduling.

use std::f64::consts::PI;

use acsigma_core::bins::BinGrid;
use acsigma_core::conductivity::{
    conductivity_measure, psi_total, sum_rule_terms, upsilon_measure, MeasureHistogram, MeasureOptions,
};
use acsigma_core::disorder::{spectral_bounds, DisorderSpec};
use acsigma_core::lattice::LatticeSpec;
use acsigma_core::spectral::{dos_histogram, wegner_check, DosHistogram, WegnerReport};
use acsigma_core::stats::{fit_line, mean_stderr};
use acsigma_core::thermo::ThermoParams;
use acsigma_core::{Error, Realization, Result};
use rayon::prelude::*;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
}

impl Estimate {
    pub fn of(xs: &[f64]) -> Self {
        let (mean, stderr) = mean_stderr(xs);
        Self { mean, stderr }
    }
}

/// Scalar masses of one realization's Σ, Υ and Ψ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RealizationSummary {
    pub index: u64,
    pub total: f64,
    pub atom: f64,
    pub gamma: f64,
    /// Atom plus the central frequency bin.
    pub zero_cell: f64,
    pub upsilon: f64,
    pub psi: f64,
}

impl RealizationSummary {
    /// (π/4T)(Υ(R) + Ψ(R)) − Σ(R).
    pub fn high_temperature_slack(&self, temperature: f64) -> f64 {
        PI / (4.0 * temperature) * (self.upsilon + self.psi) - self.total
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleResult {
    /// Per-bin mean of Σ with standard errors attached.
    pub sigma: MeasureHistogram,
    pub upsilon: MeasureHistogram,
    pub total: Estimate,
    pub atom: Estimate,
    pub gamma: Estimate,
    pub zero_cell: Estimate,
    pub upsilon_total: Estimate,
    pub psi_total: Estimate,
    pub records: Vec<RealizationSummary>,
}

impl EnsembleResult {
    pub fn realizations(&self) -> usize {
        self.records.len()
    }

    pub fn atom_fraction(&self) -> Estimate {
        Estimate::of(&self.records.iter().map(|r| r.atom / r.total).collect::<Vec<_>>())
    }

    pub fn zero_cell_fraction(&self) -> Estimate {
        Estimate::of(&self.records.iter().map(|r| r.zero_cell / r.total).collect::<Vec<_>>())
    }
}

/// Σ and Υ of one realization on `grid` (the model's default grid when
/// `None`).
pub fn evaluate(
    r: &Realization,
    p: &ThermoParams,
    grid: Option<&BinGrid>,
    options: &MeasureOptions,
) -> Result<(MeasureHistogram, MeasureHistogram, RealizationSummary)> {
    let owned;
    let grid = match grid {
        Some(g) => g,
        None => {
            owned = r.pairs.default_grid()?;
            &owned
        }
    };
    let sigma = conductivity_measure(&r.pairs, p, grid, options)?;
    let upsilon = upsilon_measure(&r.pairs, grid)?;
    let summary = RealizationSummary {
        index: r.disorder.realization_index,
        total: sigma.total(),
        atom: sigma.atom,
        gamma: sigma.gamma_total(),
        zero_cell: sigma.zero_cell_mass(),
        upsilon: upsilon.total(),
        psi: psi_total(&r.pairs),
    };
    Ok((sigma, upsilon, summary))
}

/// Realizations 0..n of `disorder` (its own index is ignored), in order.
pub fn sample_batch(lattice: &LatticeSpec, disorder: &DisorderSpec, n: usize) -> Result<Vec<Realization>> {
    (0..n as u64)
        .into_par_iter()
        .map(|i| Realization::sample(lattice, &disorder.clone().with_index(i)))
        .collect()
}

fn require_ensemble(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidParameter {
            field: "ensemble.realizations",
            reason: "need at least 2 realizations for a standard error".into(),
        });
    }
    Ok(())
}

fn column_stats(rows: &[Vec<f64>], len: usize) -> (Vec<f64>, Vec<f64>) {
    (0..len)
        .map(|i| {
            let col: Vec<f64> = rows.iter().map(|r| r[i]).collect();
            let e = Estimate::of(&col);
            (e.mean, e.stderr)
        })
        .unzip()
}

fn merge(parts: Vec<(MeasureHistogram, MeasureHistogram, RealizationSummary)>) -> EnsembleResult {
    let n = parts.len();
    let grid = parts[0].0.grid.clone();
    let sig_rows: Vec<Vec<f64>> = parts.iter().map(|p| p.0.mass.clone()).collect();
    let ups_rows: Vec<Vec<f64>> = parts.iter().map(|p| p.1.mass.clone()).collect();
    let (sig_mean, sig_err) = column_stats(&sig_rows, grid.len());
    let (ups_mean, ups_err) = column_stats(&ups_rows, grid.len());
    let records: Vec<RealizationSummary> = parts.iter().map(|p| p.2).collect();
    let pick = |f: fn(&RealizationSummary) -> f64| Estimate::of(&records.iter().map(f).collect::<Vec<_>>());
    let atom = pick(|r| r.atom);
    let sigma = MeasureHistogram {
        grid: grid.clone(),
        mass: sig_mean,
        atom: atom.mean,
        stderr: Some(sig_err),
        atom_stderr: Some(atom.stderr),
        realizations: n,
    };
    let upsilon = MeasureHistogram {
        grid,
        mass: ups_mean,
        atom: 0.0,
        stderr: Some(ups_err),
        atom_stderr: Some(0.0),
        realizations: n,
    };
    EnsembleResult {
        sigma,
        upsilon,
        total: pick(|r| r.total),
        atom,
        gamma: pick(|r| r.gamma),
        zero_cell: pick(|r| r.zero_cell),
        upsilon_total: pick(|r| r.upsilon),
        psi_total: pick(|r| r.psi),
        records,
    }
}

/// Shared frequency grid for a batch: the model's default unless given.
fn batch_grid(lattice: &LatticeSpec, disorder: &DisorderSpec, grid: Option<&BinGrid>) -> Result<BinGrid> {
    match grid {
        Some(g) => Ok(g.clone()),
        None => BinGrid::default_frequency(spectral_bounds(disorder, lattice), lattice.site_count()),
    }
}

/// Mean and standard error of Σ over realizations 0..n.
pub fn ensemble_average(
    lattice: &LatticeSpec,
    disorder: &DisorderSpec,
    p: &ThermoParams,
    grid: Option<&BinGrid>,
    n: usize,
    options: &MeasureOptions,
) -> Result<EnsembleResult> {
    require_ensemble(n)?;
    let grid = batch_grid(lattice, disorder, grid)?;
    let batch = sample_batch(lattice, disorder, n)?;
    ensemble_from_batch(&batch, p, &grid, options)
}

pub fn ensemble_from_batch(
    batch: &[Realization],
    p: &ThermoParams,
    grid: &BinGrid,
    options: &MeasureOptions,
) -> Result<EnsembleResult> {
    require_ensemble(batch.len())?;
    let parts = batch
        .par_iter()
        .map(|r| evaluate(r, p, Some(grid), options))
        .collect::<Result<Vec<_>>>()?;
    Ok(merge(parts))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    Temperature,
    Disorder,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub parameter: f64,
    pub total: Estimate,
    pub atom: Estimate,
    pub gamma: Estimate,
    pub atom_fraction: Estimate,
    pub zero_cell_fraction: Estimate,
    pub upsilon_plus_psi: Estimate,
    /// T·Σ(R) (temperature axis only).
    pub t_sigma: Option<Estimate>,
    /// Realizations violating Σ(R) ≤ (π/4T)(Υ(R)+Ψ(R)).
    pub high_temperature_violations: usize,
    /// Smallest Γ(R) over the realizations.
    pub min_gamma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepTable {
    pub axis: SweepAxis,
    pub realizations: usize,
    pub points: Vec<SweepPoint>,
}

impl SweepTable {
    pub fn parameters(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.parameter).collect()
    }

    pub fn totals(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.total.mean).collect()
    }

    pub fn strictly_decreasing_totals(&self) -> bool {
        self.totals().windows(2).all(|w| w[1] < w[0])
    }

    /// Slope of ln Σ(R) against ln(parameter) over points with
    /// parameter ≥ `from` (at least two needed).
    pub fn loglog_slope(&self, from: f64) -> Option<f64> {
        let (x, y): (Vec<f64>, Vec<f64>) = self
            .points
            .iter()
            .filter(|p| p.parameter >= from && p.parameter > 0.0 && p.total.mean > 0.0)
            .map(|p| (p.parameter.ln(), p.total.mean.ln()))
            .unzip();
        fit_line(&x, &y).map(|f| f.slope)
    }
}

fn check_grid(values: &[f64], field: &'static str, positive: bool) -> Result<()> {
    if values.is_empty() {
        return Err(Error::InvalidParameter {
            field,
            reason: "empty grid".into(),
        });
    }
    let bad_sign = values.iter().any(|&v| !v.is_finite() || if positive { v <= 0.0 } else { v < 0.0 });
    if bad_sign {
        let reason = if positive { "values must be positive" } else { "values must be nonnegative" };
        return Err(Error::InvalidParameter {
            field,
            reason: reason.into(),
        });
    }
    if values.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter {
            field,
            reason: "values must be strictly increasing".into(),
        });
    }
    Ok(())
}

fn sweep_point(parameter: f64, ens: &EnsembleResult, temperature: f64, with_t_sigma: bool) -> SweepPoint {
    let records = &ens.records;
    let col = |f: &dyn Fn(&RealizationSummary) -> f64| Estimate::of(&records.iter().map(f).collect::<Vec<_>>());
    let violations = records
        .iter()
        .filter(|r| temperature > 0.0 && r.high_temperature_slack(temperature) < -1e-12 * r.total)
        .count();
    SweepPoint {
        parameter,
        total: ens.total,
        atom: ens.atom,
        gamma: ens.gamma,
        atom_fraction: ens.atom_fraction(),
        zero_cell_fraction: ens.zero_cell_fraction(),
        upsilon_plus_psi: col(&|r| r.upsilon + r.psi),
        t_sigma: with_t_sigma.then(|| col(&|r| temperature * r.total)),
        high_temperature_violations: violations,
        min_gamma: records.iter().map(|r| r.gamma).fold(f64::INFINITY, f64::min),
    }
}

/// Σ(R), Γ(R), the atom and T·Σ(R) against T. The eigen-decompositions are
/// shared across temperatures, so the grid points see identical disorder.
pub fn temperature_sweep(
    lattice: &LatticeSpec,
    disorder: &DisorderSpec,
    fermi_level: f64,
    temperatures: &[f64],
    grid: Option<&BinGrid>,
    n: usize,
) -> Result<SweepTable> {
    check_grid(temperatures, "sweep.temperatures", true)?;
    require_ensemble(n)?;
    let grid = batch_grid(lattice, disorder, grid)?;
    let batch = sample_batch(lattice, disorder, n)?;
    let points = temperatures
        .iter()
        .map(|&t| {
            let p = ThermoParams::new(t, fermi_level)?;
            let ens = ensemble_from_batch(&batch, &p, &grid, &MeasureOptions::default())?;
            Ok(sweep_point(t, &ens, t, true))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepTable {
        axis: SweepAxis::Temperature,
        realizations: n,
        points,
    })
}

/// Σ(R), atom fraction and Γ(R) against λ. The same seed is used at every λ,
/// so each realization index sees the same site variates scaled by λ.
pub fn disorder_sweep(
    lattice: &LatticeSpec,
    disorder: &DisorderSpec,
    p: &ThermoParams,
    lambdas: &[f64],
    n: usize,
) -> Result<SweepTable> {
    check_grid(lambdas, "sweep.lambdas", false)?;
    if p.is_zero_temperature() {
        return Err(Error::ZeroTemperature("disorder sweep"));
    }
    let points = lambdas
        .iter()
        .map(|&lambda| {
            let spec = disorder.clone().with_lambda(lambda);
            let ens = ensemble_average(lattice, &spec, p, None, n, &MeasureOptions::default())?;
            Ok(sweep_point(lambda, &ens, p.temperature, false))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepTable {
        axis: SweepAxis::Disorder,
        realizations: n,
        points,
    })
}

/// Paired sum-rule sides over realizations 0..n (periodic boxes).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SumRuleResult {
    pub lhs: Estimate,
    pub rhs: Estimate,
    /// Per-realization lhs − rhs.
    pub gap: Estimate,
}

impl SumRuleResult {
    pub fn within(&self, sigmas: f64) -> bool {
        self.gap.mean.abs() <= sigmas * self.gap.stderr
    }
}

pub fn sum_rule_ensemble(
    lattice: &LatticeSpec,
    disorder: &DisorderSpec,
    p: &ThermoParams,
    n: usize,
) -> Result<SumRuleResult> {
    require_ensemble(n)?;
    let batch = sample_batch(lattice, disorder, n)?;
    let terms = batch
        .par_iter()
        .map(|r| sum_rule_terms(lattice, &r.spectral, &r.pairs, p, &MeasureOptions::default()))
        .collect::<Result<Vec<_>>>()?;
    let col = |f: &dyn Fn(&acsigma_core::conductivity::SumRuleTerms) -> f64| {
        Estimate::of(&terms.iter().map(f).collect::<Vec<_>>())
    };
    Ok(SumRuleResult {
        lhs: col(&|t| t.lhs),
        rhs: col(&|t| t.rhs),
        gap: col(&|t| t.lhs - t.rhs),
    })
}

/// Averaged DOS on the model's default energy grid and its Wegner check.
pub fn wegner_ensemble(
    lattice: &LatticeSpec,
    disorder: &DisorderSpec,
    n: usize,
    sigmas: f64,
) -> Result<(DosHistogram, WegnerReport)> {
    require_ensemble(n)?;
    let batch = sample_batch(lattice, disorder, n)?;
    let spectra: Vec<_> = batch.into_iter().map(|r| r.spectral).collect();
    let grid = BinGrid::default_energy(spectral_bounds(disorder, lattice), lattice.site_count())?;
    let dos = dos_histogram(&spectra, &grid)?;
    let report = wegner_check(&dos, disorder, sigmas)?;
    Ok((dos, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use acsigma_core::disorder::SiteDistribution;
    use acsigma_core::lattice::Boundary;

    fn chain(l: usize) -> LatticeSpec {
        LatticeSpec::new(1, l, Boundary::Periodic).unwrap()
    }

    #[test]
    fn clean_ensemble_has_no_variance() {
        let spec = DisorderSpec::new(SiteDistribution::default(), 0.0, 3).unwrap();
        let p = ThermoParams::new(1.0, 0.0).unwrap();
        let e = ensemble_average(&chain(8), &spec, &p, None, 4, &MeasureOptions::default()).unwrap();
        assert_eq!(e.total.stderr, 0.0);
        assert!(ensemble_average(&chain(8), &spec, &p, None, 1, &MeasureOptions::default()).is_err());
    }

    #[test]
    fn ensemble_is_independent_of_thread_count() {
        let spec = DisorderSpec::new(SiteDistribution::default(), 1.0, 3).unwrap();
        let p = ThermoParams::new(0.5, 0.0).unwrap();
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| ensemble_average(&chain(10), &spec, &p, None, 12, &MeasureOptions::default()).unwrap())
        };
        let a = run(1);
        let b = run(4);
        assert_eq!(a.total, b.total);
        assert_eq!(a.sigma.mass, b.sigma.mass);
    }

    #[test]
    fn sweeps_validate_grids() {
        let spec = DisorderSpec::new(SiteDistribution::default(), 1.0, 3).unwrap();
        assert!(temperature_sweep(&chain(6), &spec, 0.0, &[1.0, 0.5], None, 4).is_err());
        assert!(temperature_sweep(&chain(6), &spec, 0.0, &[], None, 4).is_err());
        let p = ThermoParams::new(1.0, 0.0).unwrap();
        assert!(disorder_sweep(&chain(6), &spec, &p, &[-1.0, 1.0], 4).is_err());
    }
}
