//! The one-shot verification suite: every identity and inequality, with
//! measured margins, on the configured model.

use acsigma_core::conductivity::{
    accumulate_pairs, conductivity_measure, conductivity_total, convolution_check, high_temperature_slack,
    psi_total, sandwich_check, upsilon_measure, MeasureHistogram, MeasureOptions,
};
use acsigma_core::lattice::Boundary;
use acsigma_core::quadrature::QuadratureSpec;
use acsigma_core::thermo::{pair_weight, SechConvention};
use acsigma_core::Realization;
use rayon::prelude::*;
use serde::Serialize;

use crate::absorb::{absorb, AbsorptionInputs};
use crate::config::{Fault, Resolved};
use crate::ensemble::{sample_batch, sum_rule_ensemble, wegner_ensemble};
use crate::error::LabError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub status: Status,
    /// Distance to failure in the check's own units; negative on failure.
    pub margin: Option<f64>,
    pub detail: String,
}

impl CheckOutcome {
    fn skipped(name: &'static str, why: &str) -> Self {
        Self {
            name,
            status: Status::Skipped,
            margin: None,
            detail: why.into(),
        }
    }

    fn margin(name: &'static str, margin: f64, detail: String) -> Self {
        Self {
            name,
            status: if margin >= 0.0 { Status::Pass } else { Status::Fail },
            margin: Some(margin),
            detail,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub checks: Vec<CheckOutcome>,
    pub passed: bool,
}

impl VerifyReport {
    pub fn get(&self, name: &str) -> Option<&CheckOutcome> {
        self.checks.iter().find(|c| c.name == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct VerifyOptions {
    pub fault: Option<Fault>,
    /// Realizations for the per-realization identities.
    pub identity_realizations: usize,
}

fn measure(r: &Realization, cfg: &Resolved, fault: Option<Fault>) -> Result<MeasureHistogram, LabError> {
    let grid = r.pairs.default_grid()?;
    let p = &cfg.thermo;
    match fault {
        None => Ok(conductivity_measure(&r.pairs, p, &grid, &MeasureOptions::default())?),
        Some(Fault::NegatedPairWeight) => {
            let e = r.pairs.energies();
            let eps = r.pairs.degeneracy_threshold();
            let (bins, atom) = accumulate_pairs(&r.pairs, &grid, |a, b, _| -pair_weight(e[a], e[b], p, eps))?;
            let scale = std::f64::consts::PI / r.pairs.site_count() as f64;
            let mut h = MeasureHistogram::zeros(grid);
            h.mass = bins.into_iter().map(|m| scale * m).collect();
            h.atom = if p.is_zero_temperature() { 0.0 } else { scale * atom };
            Ok(h)
        }
    }
}

struct Worst(f64, String);

impl Worst {
    fn new() -> Self {
        Worst(f64::INFINITY, String::new())
    }

    fn update(&mut self, margin: f64, detail: impl FnOnce() -> String) {
        if margin < self.0 {
            self.0 = margin;
            self.1 = detail();
        }
    }
}

pub fn run_verify(cfg: &Resolved, options: &VerifyOptions) -> Result<VerifyReport, LabError> {
    let p = cfg.thermo;
    let finite_t = !p.is_zero_temperature();
    let dirichlet = cfg.lattice.boundary() == Boundary::Dirichlet;
    let n_id = options.identity_realizations.clamp(1, cfg.realizations);
    let batch = sample_batch(&cfg.lattice, &cfg.disorder, n_id)?;
    let per = batch
        .par_iter()
        .map(|r| {
            let s = measure(r, cfg, options.fault)?;
            let u = upsilon_measure(&r.pairs, &s.grid)?;
            Ok((s, u))
        })
        .collect::<Result<Vec<_>, LabError>>()?;

    let mut checks = Vec::new();
    let mut even = Worst::new();
    let mut positive = Worst::new();
    let mut support = Worst::new();
    let mut decomposition = Worst::new();
    let mut sandwich = Worst::new();
    let mut high_t = Worst::new();
    let mut velocity = Worst::new();
    for (r, (s, u)) in batch.iter().zip(&per) {
        let i = r.disorder.realization_index;
        let d = s.evenness_defect();
        even.update(1e-12 - d, || format!("realization {i}: evenness defect {d:.3e}"));
        let m = s.min_mass();
        positive.update(m, || format!("realization {i}: smallest mass {m:.6e}"));
        let (lo, hi) = r.spectral.bounds();
        let out = s.mass_outside(hi - lo);
        support.update(-out, || format!("realization {i}: mass {out:.3e} beyond E₊−E₋"));
        // At T = 0 the atom comes from Ψ smoothing, not from pair weights.
        let direct = conductivity_total(&r.pairs, &p);
        let binned = if finite_t { s.total() } else { s.gamma_total() };
        let gap = (direct - binned).abs();
        let tol = 1e-12 * direct.abs().max(f64::MIN_POSITIVE);
        decomposition.update(tol - gap, || format!("realization {i}: |Σ(R) − atom − Γ(R)| = {gap:.3e}"));
        if finite_t {
            let rep = sandwich_check(s, u, &p, r.spectral.bounds(), SechConvention::HalfArgument)?;
            let margin = rep.lower_margin.min(rep.upper_margin) + rep.tolerance;
            sandwich.update(margin, || {
                format!("realization {i}: {} violating bins, C = {:.6e}", rep.violations, rep.c_mu_t)
            });
            let slack = high_temperature_slack(s.total(), u.total(), psi_total(&r.pairs), &p)?;
            high_t.update(slack + 1e-12 * s.total().abs(), || format!("realization {i}: slack {slack:.6e}"));
        }
        if dirichlet {
            let defect = r.velocity_position_defect()?;
            velocity.update(1e-10 - defect, || format!("realization {i}: defect {defect:.3e}"));
        }
    }
    checks.push(CheckOutcome::margin("evenness", even.0, even.1));
    checks.push(CheckOutcome::margin("positivity", positive.0, positive.1));
    checks.push(CheckOutcome::margin("support", support.0, support.1));
    checks.push(CheckOutcome::margin("decomposition", decomposition.0, decomposition.1));

    if finite_t {
        let mut conv = Worst::new();
        for r in &batch {
            let rep = convolution_check(&r.pairs, &p, &r.pairs.default_grid()?, &QuadratureSpec::default())?;
            let i = r.disorder.realization_index;
            conv.update(1e-8 - rep.max_relative_gap, || {
                format!("realization {i}: max relative gap {:.3e} (bin {})", rep.max_relative_gap, rep.worst_bin)
            });
        }
        checks.push(CheckOutcome::margin("convolution", conv.0, conv.1));
        checks.push(CheckOutcome::margin("sandwich", sandwich.0, sandwich.1));
        checks.push(CheckOutcome::margin("high_temperature_bound", high_t.0, high_t.1));
    } else {
        for name in ["convolution", "sandwich", "high_temperature_bound"] {
            checks.push(CheckOutcome::skipped(name, "needs T > 0"));
        }
    }

    if dirichlet {
        checks.push(CheckOutcome::skipped("sum_rule", "needs a periodic box"));
    } else {
        let sr = sum_rule_ensemble(&cfg.lattice, &cfg.disorder, &p, cfg.realizations)?;
        let margin = 3.0 * sr.gap.stderr + 1e-12 * sr.rhs.mean.abs() - sr.gap.mean.abs();
        checks.push(CheckOutcome::margin(
            "sum_rule",
            margin,
            format!(
                "lhs {:.10e}, rhs {:.10e}, gap {:.3e} ± {:.3e}",
                sr.lhs.mean, sr.rhs.mean, sr.gap.mean, sr.gap.stderr
            ),
        ));
    }

    if cfg.disorder.lambda > 0.0 {
        let (_, rep) = wegner_ensemble(&cfg.lattice, &cfg.disorder, cfg.realizations, 3.0)?;
        checks.push(CheckOutcome::margin(
            "wegner",
            rep.worst_margin,
            format!("max density {:.6e} against bound {:.6e}", rep.max_density, rep.bound),
        ));
    } else {
        checks.push(CheckOutcome::skipped("wegner", "needs λ > 0"));
    }

    if dirichlet {
        checks.push(CheckOutcome::margin("velocity_position", velocity.0, velocity.1));
    } else {
        checks.push(CheckOutcome::skipped("velocity_position", "needs a dirichlet box"));
    }

    match (&cfg.pulse, dirichlet) {
        (Some((pulse, alphas, extraction, width)), true) => {
            let (rep, _) = absorb(&AbsorptionInputs {
                lattice: &cfg.lattice,
                disorder: &cfg.disorder,
                thermo: &cfg.thermo,
                pulse,
                alphas,
                extraction,
                frequency_width: *width,
            })?;
            checks.push(CheckOutcome::margin(
                "energy_routes",
                1e-8 - rep.route_gap,
                format!("max relative gap {:.3e}", rep.route_gap),
            ));
            let oracle = match rep.relative_gap {
                Some(g) => CheckOutcome::margin(
                    "oracle_equivalence",
                    0.05 - g,
                    format!("W_lin {:.8e}, W_lr {:.8e}, relative gap {g:.3e}", rep.w_lin, rep.w_lr),
                ),
                None => CheckOutcome::margin(
                    "oracle_equivalence",
                    rep.w_lin_noise - rep.w_lin.abs(),
                    format!("off support: W_lr = 0, |W_lin| {:.3e} vs noise {:.3e}", rep.w_lin.abs(), rep.w_lin_noise),
                ),
            };
            checks.push(oracle);
            if rep.off_support {
                checks.push(CheckOutcome::skipped("quadratic_scaling", "no resolved response off support"));
            } else {
                let r = rep.scaling_ratio;
                checks.push(CheckOutcome::margin(
                    "quadratic_scaling",
                    0.2 - (r - 4.0).abs(),
                    format!("W(2α)/W(α) = {r:.6}"),
                ));
            }
        }
        (None, _) => {
            for name in ["energy_routes", "oracle_equivalence", "quadratic_scaling"] {
                checks.push(CheckOutcome::skipped(name, "no [pulse] table in the config"));
            }
        }
        (Some(_), false) => {
            for name in ["energy_routes", "oracle_equivalence", "quadratic_scaling"] {
                checks.push(CheckOutcome::skipped(name, "needs a dirichlet box"));
            }
        }
    }

    let passed = checks.iter().all(|c| c.status != Status::Fail);
    Ok(VerifyReport { checks, passed })
}
