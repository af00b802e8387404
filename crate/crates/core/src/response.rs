//! Driven dynamics in the length gauge H(t) = H + αE(t)X₁, and the two ways
//! of getting the absorbed energy: from the time-domain Liouville evolution
//! and from the conductivity measure.
//!
//! ρ is Hermitian, stored as a symmetric real part and an antisymmetric
//! imaginary part. Each step diagonalizes the real symmetric H(t + δ/2) and
//! conjugates ρ with exp(−iδH(t + δ/2)) in that eigenbasis.

use alloc::vec::Vec;

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_traits::Float;

use crate::conductivity::{MeasureHistogram, PairSpectrum};
use crate::error::{invalid, Error, Result};
use crate::lattice::{LatticeOperator, Phase};
use crate::spectral::eigendecompose;
use crate::stats::fit_line;
use crate::thermo::{c_mu_t, fermi, pair_weight, SechConvention, ThermoParams};

use core::f64::consts::PI;

/// E(t) = A·exp(−t²/2s²)·cos(ν₀t).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldPulse {
    pub amplitude: f64,
    pub width: f64,
    pub carrier: f64,
}

impl FieldPulse {
    pub fn gaussian_cosine(amplitude: f64, width: f64, carrier: f64) -> Result<Self> {
        if !amplitude.is_finite() {
            return Err(invalid("pulse.amplitude", "must be finite"));
        }
        if !(width > 0.0) || !width.is_finite() {
            return Err(invalid("pulse.width", "must be positive"));
        }
        if !(carrier >= 0.0) || !carrier.is_finite() {
            return Err(invalid("pulse.carrier", "must be nonnegative"));
        }
        Ok(Self {
            amplitude,
            width,
            carrier,
        })
    }

    pub fn value(&self, t: f64) -> f64 {
        let z = t / self.width;
        self.amplitude * Float::exp(-0.5 * z * z) * Float::cos(self.carrier * t)
    }

    /// Ê(ν) with E(t) = ∫ e^{iνt} Ê(ν) dν. Real for this family.
    pub fn fourier(&self, nu: f64) -> Complex64 {
        let s = self.width;
        let g = |x: f64| Float::exp(-0.5 * s * s * x * x);
        let pref = self.amplitude * s / (2.0 * Float::sqrt(2.0 * PI));
        Complex64::new(pref * (g(nu - self.carrier) + g(nu + self.carrier)), 0.0)
    }

    /// Half-width beyond which the envelope is below `tail` relative to A.
    pub fn window(&self, tail: f64) -> f64 {
        self.width * Float::sqrt(2.0 * Float::ln(1.0 / tail))
    }
}

pub fn fourier_transform(pulse: &FieldPulse, nu_grid: &[f64]) -> Vec<Complex64> {
    nu_grid.iter().map(|&nu| pulse.fourier(nu)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeSpec {
    /// Upper bound on δ·‖H(t)‖.
    pub step_norm_product: f64,
    /// Envelope tail cut: the window is [−t_max, t_max] with
    /// exp(−t_max²/2s²) = tail_tolerance.
    pub tail_tolerance: f64,
    pub trace_tolerance: f64,
    pub spectrum_tolerance: f64,
}

impl Default for TimeSpec {
    fn default() -> Self {
        Self {
            step_norm_product: 0.05,
            tail_tolerance: 1e-15,
            trace_tolerance: 1e-10,
            spectrum_tolerance: 1e-8,
        }
    }
}

impl TimeSpec {
    fn validate(&self) -> Result<()> {
        if !(self.step_norm_product > 0.0) {
            return Err(invalid("time.step_norm_product", "must be positive"));
        }
        if !(self.tail_tolerance > 0.0 && self.tail_tolerance < 1.0) {
            return Err(invalid("time.tail_tolerance", "must lie in (0, 1)"));
        }
        Ok(())
    }
}

/// Outcome of one driven propagation.
#[derive(Debug, Clone, PartialEq)]
pub struct ResponseTrace {
    pub pulse: FieldPulse,
    pub alpha: f64,
    pub times: Vec<f64>,
    pub field: Vec<f64>,
    /// J(t) = −(1/|Λ|)·Tr(ρ(t)Ẋ₁) at the grid times.
    pub current: Vec<f64>,
    /// ∫_{−t_max}^{t} αE·J, exact for the stepped Hamiltonian.
    pub work: Vec<f64>,
    /// (1/|Λ|)·Tr(H(t)ρ(t)) at the two window ends.
    pub energy_initial: f64,
    pub energy_final: f64,
    /// energy_final − energy_initial, evaluated from Δ without cancellation.
    pub energy_change: f64,
    pub trace_drift: f64,
    pub spectrum_drift: f64,
}

impl ResponseTrace {
    pub fn steps(&self) -> usize {
        self.times.len() - 1
    }
}

struct Density {
    re: DMatrix<f64>,
    im: DMatrix<f64>,
}

impl Density {
    /// Tr(ρA) for real symmetric A.
    fn trace_sym(&self, a: &DMatrix<f64>) -> f64 {
        self.re.component_mul(a).sum()
    }


    /// Tr(ρ·iM) for real antisymmetric M, which is −Tr(Im ρ · M) = Σ Im ρ ∘ M.
    fn trace_imag_antisym(&self, m: &DMatrix<f64>) -> f64 {
        self.im.component_mul(m).sum()
    }

    fn trace(&self) -> f64 {
        self.re.trace()
    }

    /// Eigenvalues via the real 2n×2n embedding [[Re, −Im], [Im, Re]], whose
    /// spectrum is that of ρ with every eigenvalue doubled.
    fn spectrum(&self) -> Result<Vec<f64>> {
        let n = self.re.nrows();
        let mut big = DMatrix::zeros(2 * n, 2 * n);
        big.view_mut((0, 0), (n, n)).copy_from(&self.re);
        big.view_mut((n, n), (n, n)).copy_from(&self.re);
        big.view_mut((n, 0), (n, n)).copy_from(&self.im);
        big.view_mut((0, n), (n, n)).copy_from(&(-&self.im));
        let sd = eigendecompose(&LatticeOperator::real(big))?;
        Ok(sd.energies().iter().step_by(2).copied().collect())
    }
}

/// One Newton–Schulz step W(3I − WᵀW)/2: squares the orthogonality defect
/// of the eigensolver output, so each step's conjugation is unitary to
/// rounding rather than to the solver's tolerance.
fn reorthonormalize(w: &DMatrix<f64>) -> DMatrix<f64> {
    let n = w.ncols();
    let gram = w.transpose() * w;
    let correction = (DMatrix::identity(n, n) * 3.0 - gram) * 0.5;
    w * correction
}

fn check_inputs(h: &LatticeOperator, x1: &LatticeOperator) -> Result<()> {
    if h.phase() != Phase::Real || x1.phase() != Phase::Real {
        return Err(invalid("hamiltonian", "H and X₁ must be real symmetric"));
    }
    if h.dim() != x1.dim() {
        return Err(Error::SizeMismatch {
            expected: h.dim(),
            found: x1.dim(),
        });
    }
    let x = x1.matrix();
    let off_diagonal = (0..x.nrows()).any(|i| (0..x.ncols()).any(|j| i != j && x[(i, j)] != 0.0));
    if off_diagonal {
        return Err(invalid("position", "X₁ must be diagonal"));
    }
    Ok(())
}

/// Solves i∂ₜρ = [H + αE(t)X₁, ρ] over the pulse window from ρ = f(H).
///
/// `x1` must be the Dirichlet position operator; build it with
/// [`crate::lattice::build_position`], which refuses periodic boxes.
pub fn propagate_liouville(
    h: &LatticeOperator,
    x1: &LatticeOperator,
    pulse: &FieldPulse,
    alpha: f64,
    p: &ThermoParams,
    time: &TimeSpec,
) -> Result<ResponseTrace> {
    check_inputs(h, x1)?;
    time.validate()?;
    if !alpha.is_finite() {
        return Err(invalid("alpha", "must be finite"));
    }
    let n = h.dim();
    let volume = n as f64;
    let hm = h.matrix();
    let xm = x1.matrix();
    // Ẋ₁ = i[H, X₁] = i·M
    let m = hm * xm - xm * hm;

    let sd = eigendecompose(h)?;
    let occupations: Vec<f64> = sd.energies().iter().map(|&e| fermi(e, p)).collect();
    // ρ = f(H) + Δ. Only the deviation Δ is propagated: its increments are
    // O(δ‖[H(t), f(H)]‖), so rounding scales with the response rather than
    // with the O(1) equilibrium state.
    let rho0 = sd.apply_function(|e| fermi(e, p));
    let mut delta_rho = Density {
        re: DMatrix::zeros(n, n),
        im: DMatrix::zeros(n, n),
    };
    // f(H) commutes with H: without a field the state is stationary.
    let stationary = alpha == 0.0;

    let t_max = pulse.window(time.tail_tolerance);
    let x_max = (0..n).map(|i| Float::abs(xm[(i, i)])).fold(0.0, f64::max);
    let norm = h.row_sum_norm() + Float::abs(alpha * pulse.amplitude) * x_max;
    let steps = Float::ceil(2.0 * t_max * norm / time.step_norm_product).max(1.0) as usize;
    let delta = 2.0 * t_max / steps as f64;

    let field_at = |t: f64| pulse.value(t);
    let h_at = |t: f64| {
        let mut ht = hm.clone();
        let shift = alpha * field_at(t);
        for i in 0..n {
            ht[(i, i)] += shift * xm[(i, i)];
        }
        ht
    };
    let trace_sym = |a: &DMatrix<f64>, b: &DMatrix<f64>| a.component_mul(b).sum();

    let mut times = Vec::with_capacity(steps + 1);
    let mut field = Vec::with_capacity(steps + 1);
    let mut current = Vec::with_capacity(steps + 1);
    let mut work = Vec::with_capacity(steps + 1);
    let t0 = -t_max;
    times.push(t0);
    field.push(field_at(t0));
    // f(H) is real, so the equilibrium current vanishes identically.
    current.push(0.0);
    work.push(0.0);
    let polarization0 = trace_sym(&rho0, xm);
    let energy0 = trace_sym(&rho0, hm);
    let energy_initial = (energy0 + alpha * field_at(t0) * polarization0) / volume;
    let mut polarization = 0.0;
    let mut cumulative = 0.0;
    let mut trace_drift = 0.0f64;

    for k in 0..steps {
        let t = t0 + k as f64 * delta;
        if stationary {
            let t_next = t + delta;
            times.push(t_next);
            field.push(field_at(t_next));
            current.push(0.0);
            work.push(0.0);
            continue;
        }
        let e_mid = field_at(t + 0.5 * delta);
        let stepped = LatticeOperator::real(h_at(t + 0.5 * delta));
        let step_sd = eigendecompose(&stepped)?;
        let w = &reorthonormalize(step_sd.eigenvectors());
        let wt = w.transpose();
        let r0 = &wt * &rho0 * w;
        let re = &wt * &delta_rho.re * w;
        let im = &wt * &delta_rho.im * w;
        let lam = step_sd.energies();
        let mut re_new = DMatrix::zeros(n, n);
        let mut im_new = DMatrix::zeros(n, n);
        for a in 0..n {
            for b in 0..n {
                // (f + Δ)e^{iθ} − f = Δe^{iθ} + f(e^{iθ} − 1)
                let theta = -(lam[a] - lam[b]) * delta;
                let (s, c) = Float::sin_cos(theta);
                let half = Float::sin(0.5 * theta);
                let c_minus_1 = -2.0 * half * half;
                let (x, y, f) = (re[(a, b)], im[(a, b)], r0[(a, b)]);
                re_new[(a, b)] = x * c - y * s + f * c_minus_1;
                im_new[(a, b)] = x * s + y * c + f * s;
            }
        }
        let re = w * re_new * &wt;
        let im = w * im_new * &wt;
        // Project rounding back onto Hermitian matrices.
        delta_rho.re = (&re + re.transpose()) * 0.5;
        delta_rho.im = (&im - im.transpose()) * 0.5;
        // Within the step d/dt Tr(X₁ρ) = Tr(ρẊ₁) exactly, so the step
        // integral of J is a polarization difference.
        let next_polarization = delta_rho.trace_sym(xm);
        cumulative += -alpha * e_mid * (next_polarization - polarization) / volume;
        polarization = next_polarization;

        let t_next = t0 + (k + 1) as f64 * delta;
        times.push(t_next);
        field.push(field_at(t_next));
        current.push(-delta_rho.trace_imag_antisym(&m) / volume);
        work.push(cumulative);
        let drift = Float::abs(delta_rho.trace());
        trace_drift = trace_drift.max(drift);
        if drift > time.trace_tolerance {
            return Err(Error::UnitarityDrift {
                drift,
                tolerance: time.trace_tolerance,
            });
        }
    }

    let rho = Density {
        re: &rho0 + &delta_rho.re,
        im: delta_rho.im.clone(),
    };
    let mut reference = occupations;
    reference.sort_by(|a, b| a.total_cmp(b));
    let spectrum = rho.spectrum()?;
    let spectrum_drift = reference
        .iter()
        .zip(&spectrum)
        .map(|(a, b)| Float::abs(a - b))
        .fold(0.0, f64::max);
    if spectrum_drift > time.spectrum_tolerance {
        return Err(Error::UnitarityDrift {
            drift: spectrum_drift,
            tolerance: time.spectrum_tolerance,
        });
    }
    let e_final = alpha * field_at(t_max);
    let energy_change = (delta_rho.trace_sym(hm) + e_final * (polarization0 + polarization)
        - alpha * field_at(t0) * polarization0)
        / volume;
    let energy_final = energy_initial + energy_change;

    Ok(ResponseTrace {
        pulse: *pulse,
        alpha,
        times,
        field,
        current,
        work,
        energy_initial,
        energy_final,
        energy_change,
        trace_drift,
        spectrum_drift,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AbsorbedEnergy {
    /// ∫ αE(t)J(t) dt.
    pub current: f64,
    /// (1/|Λ|)[Tr(H(t_f)ρ(t_f)) − Tr(H(t_i)ρ(t_i))].
    pub energy: f64,
}

impl AbsorbedEnergy {
    pub fn relative_gap(&self, floor: f64) -> f64 {
        Float::abs(self.current - self.energy) / Float::abs(self.current).max(Float::abs(self.energy)).max(floor)
    }
}

pub fn absorbed_energy_td(trace: &ResponseTrace, pulse: &FieldPulse, alpha: f64) -> Result<AbsorbedEnergy> {
    if trace.pulse != *pulse || trace.alpha != alpha {
        return Err(invalid("trace", "computed with a different pulse or alpha"));
    }
    Ok(AbsorbedEnergy {
        current: trace.work.last().copied().unwrap_or(0.0),
        energy: trace.energy_change,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExtractionSample {
    pub alpha: f64,
    pub energy: AbsorbedEnergy,
    pub spectrum_drift: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearResponse {
    /// Intercept of W(α)/α² = W_lin + c·α².
    pub w_lin: f64,
    pub w_lin_stderr: f64,
    pub curvature: f64,
    /// W(2α)/W(α) at the smallest α.
    pub scaling_ratio: f64,
    /// Largest |W_current − W_energy| relative gap over the runs.
    pub route_gap: f64,
    /// Relative rms residual of the fit.
    pub fit_residual: f64,
    pub samples: Vec<ExtractionSample>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtractionSpec {
    pub time: TimeSpec,
    /// Fit residual allowed relative to |W_lin|, or to `absolute_floor`
    /// when that is larger.
    pub fit_tolerance: f64,
    /// Resolution of W/α² below which the time-domain route sees rounding
    /// only (a few thousand unitary steps on O(1) traces).
    pub absolute_floor: f64,
}

impl Default for ExtractionSpec {
    fn default() -> Self {
        Self {
            time: TimeSpec::default(),
            fit_tolerance: 1e-2,
            absolute_floor: 1e-10,
        }
    }
}

/// lim_{α→0} W(αE)/α² by fitting W/α² against α². `alphas` must be
/// decreasing, positive, at least three values spanning a decade. A run at
/// 2·α_min is added for the quadratic-scaling diagnostic.
pub fn linear_response_extract(
    h: &LatticeOperator,
    x1: &LatticeOperator,
    pulse: &FieldPulse,
    p: &ThermoParams,
    alphas: &[f64],
    spec: &ExtractionSpec,
) -> Result<LinearResponse> {
    if alphas.len() < 3 {
        return Err(invalid("alphas", "need at least three values"));
    }
    if alphas.iter().any(|&a| !(a > 0.0) || !a.is_finite()) {
        return Err(invalid("alphas", "must be positive"));
    }
    if alphas.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(invalid("alphas", "must be strictly decreasing"));
    }
    let (a_max, a_min) = (alphas[0], alphas[alphas.len() - 1]);
    if a_max < 10.0 * a_min * (1.0 - 1e-12) {
        return Err(invalid("alphas", "must span at least a decade"));
    }

    let run = |alpha: f64| -> Result<ExtractionSample> {
        let trace = propagate_liouville(h, x1, pulse, alpha, p, &spec.time)?;
        Ok(ExtractionSample {
            alpha,
            energy: absorbed_energy_td(&trace, pulse, alpha)?,
            spectrum_drift: trace.spectrum_drift,
        })
    };
    let mut samples = Vec::with_capacity(alphas.len());
    for &a in alphas {
        samples.push(run(a)?);
    }
    let doubled = match samples.iter().find(|s| Float::abs(s.alpha - 2.0 * a_min) <= 1e-12 * a_min) {
        Some(s) => s.energy.current,
        None => run(2.0 * a_min)?.energy.current,
    };
    let smallest = samples[samples.len() - 1].energy.current;
    let scaling_ratio = doubled / smallest;

    let route_gap = samples
        .iter()
        .map(|s| s.energy.relative_gap(spec.absolute_floor * s.alpha * s.alpha))
        .fold(0.0, f64::max);

    let x: Vec<f64> = samples.iter().map(|s| s.alpha * s.alpha).collect();
    let y: Vec<f64> = samples.iter().map(|s| s.energy.current / (s.alpha * s.alpha)).collect();
    let fit = fit_line(&x, &y).ok_or_else(|| Error::FitRejected("degenerate alpha set".into()))?;
    let scale = Float::abs(fit.intercept).max(spec.absolute_floor / spec.fit_tolerance);
    let fit_residual = fit.residual_rms / scale;
    if fit_residual > spec.fit_tolerance {
        return Err(Error::FitRejected(alloc::format!(
            "relative fit residual {fit_residual:.3e} exceeds {:.3e}",
            spec.fit_tolerance
        )));
    }
    // W(α) must grow with α when the response is resolved above the floor.
    if Float::abs(fit.intercept) > spec.absolute_floor {
        let mut by_alpha: Vec<(f64, f64)> = samples.iter().map(|s| (s.alpha, s.energy.current)).collect();
        by_alpha.sort_by(|a, b| a.0.total_cmp(&b.0));
        if by_alpha.windows(2).any(|w| Float::abs(w[1].1) < Float::abs(w[0].1)) {
            return Err(Error::FitRejected("absorbed energy not monotone in alpha".into()));
        }
    }
    Ok(LinearResponse {
        w_lin: fit.intercept,
        w_lin_stderr: fit.intercept_stderr,
        curvature: fit.slope,
        scaling_ratio,
        route_gap,
        fit_residual,
        samples,
    })
}

/// W = 2π·[atom·|Ê(0)|² + Σ mass·|Ê(centre)|²].
pub fn absorbed_energy_lr(sigma: &MeasureHistogram, pulse: &FieldPulse) -> f64 {
    let mut w = sigma.atom * pulse.fourier(0.0).norm_sqr();
    for (i, &m) in sigma.mass.iter().enumerate() {
        w += m * pulse.fourier(sigma.grid.center(i)).norm_sqr();
    }
    2.0 * PI * w
}

/// 2π·(π/|Λ|)·Σ_{n,m} |D_{nm}|² w(Eₙ,Eₘ) |Ê(Eₙ−Eₘ)|², the measure route
/// without binning: Ê is evaluated at every transition frequency.
pub fn absorbed_energy_pairs(ps: &PairSpectrum, p: &ThermoParams, pulse: &FieldPulse) -> f64 {
    let e = ps.energies();
    let n = e.len();
    let eps = ps.degeneracy_threshold();
    let mut sum = 0.0;
    for a in 0..n {
        for b in 0..n {
            let w = pair_weight(e[a], e[b], p, eps);
            if w != 0.0 {
                sum += ps.weight_sq(a, b) * w * pulse.fourier(e[a] - e[b]).norm_sqr();
            }
        }
    }
    2.0 * PI * PI * sum / n as f64
}

/// (π²/2T)·C_μ^T·Σ Υ(B)|Ê(centre)|², a lower bound for W_lr at T > 0.
pub fn absorbed_energy_lower_bound(
    upsilon: &MeasureHistogram,
    pulse: &FieldPulse,
    p: &ThermoParams,
    bounds: (f64, f64),
    convention: SechConvention,
) -> Result<f64> {
    if p.is_zero_temperature() {
        return Err(Error::ZeroTemperature("absorption lower bound"));
    }
    let c = c_mu_t(p, bounds, convention)?;
    let s: f64 = upsilon
        .mass
        .iter()
        .enumerate()
        .map(|(i, &u)| u * pulse.fourier(upsilon.grid.center(i)).norm_sqr())
        .sum();
    Ok(PI * PI / (2.0 * p.temperature) * c * s)
}

/// J_in(t) = atom·Ê(0) + Σ mass·Re(e^{iνt}Ê(ν)) at bin centres.
pub fn inphase_current(sigma: &MeasureHistogram, pulse: &FieldPulse, t_grid: &[f64]) -> Vec<f64> {
    let e0 = pulse.fourier(0.0).re;
    let terms: Vec<(f64, f64, Complex64)> = sigma
        .mass
        .iter()
        .enumerate()
        .filter(|(_, &m)| m != 0.0)
        .map(|(i, &m)| {
            let nu = sigma.grid.center(i);
            (m, nu, pulse.fourier(nu))
        })
        .collect();
    t_grid
        .iter()
        .map(|&t| {
            let mut j = sigma.atom * e0;
            for &(m, nu, e) in &terms {
                let (s, c) = Float::sin_cos(nu * t);
                j += m * (Complex64::new(c, s) * e).re;
            }
            j
        })
        .collect()
}

/// Sample grid for comparing ∫E·J_in against W_lr.
pub fn time_grid(pulse: &FieldPulse, tail: f64, points: usize) -> Vec<f64> {
    let t_max = pulse.window(tail);
    let n = points.max(2);
    (0..n)
        .map(|k| -t_max + 2.0 * t_max * k as f64 / (n - 1) as f64)
        .collect::<Vec<_>>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bins::BinGrid;
    use crate::conductivity::{conductivity_measure, pair_spectrum, MeasureOptions};
    use crate::disorder::PotentialField;
    use crate::lattice::{build_position, build_velocity, Boundary, LatticeSpec};
    use crate::spectral::build_hamiltonian;

    fn two_site() -> (LatticeOperator, LatticeOperator) {
        let lat = LatticeSpec::new(1, 2, Boundary::Dirichlet).unwrap();
        let h = build_hamiltonian(&lat, &PotentialField::zeros(2)).unwrap();
        (h, build_position(&lat).unwrap())
    }

    #[test]
    fn fourier_closed_forms() {
        let p = FieldPulse::gaussian_cosine(1.5, 2.0, 0.0).unwrap();
        let e0 = p.fourier(0.0);
        assert!((e0.re - 1.5 * 2.0 / Float::sqrt(2.0 * PI)).abs() < 1e-15);
        let q = FieldPulse::gaussian_cosine(1.0, 3.0, 2.0).unwrap();
        for nu in [0.1, 1.0, 2.0, 5.0] {
            assert_eq!(q.fourier(nu), q.fourier(-nu).conj());
        }
        assert!(FieldPulse::gaussian_cosine(1.0, 0.0, 1.0).is_err());
        assert!(FieldPulse::gaussian_cosine(1.0, 1.0, -1.0).is_err());
    }

    #[test]
    fn equilibrium_carries_no_current() {
        let (h, x) = two_site();
        let pulse = FieldPulse::gaussian_cosine(1.0, 2.0, 2.0).unwrap();
        let tr = propagate_liouville(&h, &x, &pulse, 0.0, &ThermoParams::new(0.5, 0.0).unwrap(), &TimeSpec::default())
            .unwrap();
        assert!(tr.current.iter().all(|j| j.abs() < 1e-12));
        let w = absorbed_energy_td(&tr, &pulse, 0.0).unwrap();
        assert_eq!(w.current, 0.0);
        assert!(w.energy.abs() < 1e-15);
    }

    #[test]
    fn two_site_resonance() {
        let (h, x) = two_site();
        let p = ThermoParams::new(0.0, 0.0).unwrap();
        let on = FieldPulse::gaussian_cosine(1.0, 6.0, 2.0).unwrap();
        let off = FieldPulse::gaussian_cosine(1.0, 6.0, 1.0).unwrap();
        let ts = TimeSpec::default();
        let a = propagate_liouville(&h, &x, &on, 0.01, &p, &ts).unwrap();
        let b = propagate_liouville(&h, &x, &off, 0.01, &p, &ts).unwrap();
        let peak = |t: &ResponseTrace| t.current.iter().fold(0.0f64, |m, j| m.max(j.abs()));
        assert!(peak(&a) > 5.0 * peak(&b), "{} vs {}", peak(&a), peak(&b));
        let w = absorbed_energy_td(&a, &on, 0.01).unwrap();
        assert!(w.relative_gap(1e-20) < 1e-8, "{w:?}");
        assert!(a.trace_drift < 1e-10 && a.spectrum_drift < 1e-8);
    }

    #[test]
    fn inphase_current_atoms() {
        let grid = BinGrid::centered(0.5, 3).unwrap();
        let pulse = FieldPulse::gaussian_cosine(1.0, 1.0, 0.0).unwrap();
        let mut m = MeasureHistogram::zeros(grid);
        assert!(inphase_current(&m, &pulse, &[0.0, 1.0]).iter().all(|&j| j == 0.0));
        m.atom = 0.7;
        let j = inphase_current(&m, &pulse, &[-3.0, 0.0, 2.5]);
        for v in j {
            assert!((v - 0.7 * pulse.fourier(0.0).re).abs() < 1e-15);
        }
    }

    #[test]
    fn two_site_measure_route() {
        let lat = LatticeSpec::new(1, 2, Boundary::Dirichlet).unwrap();
        let (h, _) = two_site();
        let sd = eigendecompose(&h).unwrap().with_bounds((-2.0, 2.0)).unwrap();
        let ps = pair_spectrum(&sd, &build_velocity(&lat)).unwrap();
        let grid = ps.default_grid().unwrap();
        let pulse = FieldPulse::gaussian_cosine(1.0, 8.0, 2.0).unwrap();
        let s1 = conductivity_measure(&ps, &ThermoParams::new(1.0, 0.0).unwrap(), &grid, &MeasureOptions::default())
            .unwrap();
        let w = absorbed_energy_lr(&s1, &pulse);
        let per_side = PI / 2.0 * Float::tanh(0.5) / 2.0;
        // bins centre on ±2 exactly when 2 is a multiple of the width
        let c = grid.center(grid.locate_even(2.0).unwrap());
        let want = 2.0 * PI * per_side * 2.0 * pulse.fourier(c).norm_sqr();
        assert!((w - want).abs() < 1e-12 * want);
        let far = FieldPulse::gaussian_cosine(1.0, 8.0, 20.0).unwrap();
        assert!(absorbed_energy_lr(&s1, &far) < 1e-300);
    }

    #[test]
    fn extraction_rejects_bad_alpha_sets() {
        let (h, x) = two_site();
        let pulse = FieldPulse::gaussian_cosine(1.0, 2.0, 2.0).unwrap();
        let p = ThermoParams::new(1.0, 0.0).unwrap();
        let s = ExtractionSpec::default();
        assert!(linear_response_extract(&h, &x, &pulse, &p, &[0.1, 0.05], &s).is_err());
        assert!(linear_response_extract(&h, &x, &pulse, &p, &[0.1, 0.2, 0.01], &s).is_err());
        assert!(linear_response_extract(&h, &x, &pulse, &p, &[0.1, 0.05, 0.02], &s).is_err());
    }
}
