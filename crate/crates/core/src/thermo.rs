//! Fermi weights: the Fermi function, its negative derivative, the
//! difference-quotient pair weight and the constant C_μ^T.

use num_traits::Float;

use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermoParams {
    pub temperature: f64,
    pub fermi_level: f64,
}

impl ThermoParams {
    pub fn new(temperature: f64, fermi_level: f64) -> Result<Self> {
        if !(temperature >= 0.0 && temperature.is_finite()) {
            return Err(invalid("thermo.temperature", "must be finite and ≥ 0"));
        }
        if !fermi_level.is_finite() {
            return Err(invalid("thermo.fermi_level", "must be finite"));
        }
        Ok(Self {
            temperature,
            fermi_level,
        })
    }

    pub fn is_zero_temperature(&self) -> bool {
        self.temperature == 0.0
    }
}

/// f_μ^T(E): (e^{(E−μ)/T} + 1)^{-1} for T > 0, the indicator of E ≤ μ at T = 0.
pub fn fermi(e: f64, p: &ThermoParams) -> f64 {
    if p.is_zero_temperature() {
        return if e <= p.fermi_level { 1.0 } else { 0.0 };
    }
    let x = (e - p.fermi_level) / p.temperature;
    if x > 0.0 {
        let q = Float::exp(-x);
        q / (1.0 + q)
    } else {
        1.0 / (1.0 + Float::exp(x))
    }
}

/// (−f_μ^T)'(E) = (1/T)·e^{x}/(e^{x}+1)², x = (E−μ)/T. Maximum 1/(4T) at E = μ.
pub fn fermi_derivative_neg(e: f64, p: &ThermoParams) -> Result<f64> {
    if p.is_zero_temperature() {
        return Err(Error::ZeroTemperature("(−f)'"));
    }
    Ok(neg_derivative(e, p))
}

pub(crate) fn neg_derivative(e: f64, p: &ThermoParams) -> f64 {
    let x = Float::abs((e - p.fermi_level) / p.temperature);
    let q = Float::exp(-x);
    q / ((1.0 + q) * (1.0 + q)) / p.temperature
}

/// ln cosh(a), stable for large |a|.
fn ln_cosh(a: f64) -> f64 {
    let a = Float::abs(a);
    a + Float::ln_1p(Float::exp(-2.0 * a)) - core::f64::consts::LN_2
}

/// ln(sinh(y)/y), stable for all y.
fn ln_sinhc(y: f64) -> f64 {
    let y = Float::abs(y);
    if y < 1e-4 {
        // sinh(y)/y = 1 + y²/6 + y⁴/120 + …
        let y2 = y * y;
        Float::ln_1p(y2 / 6.0 + y2 * y2 / 120.0)
    } else if y < 1.0 {
        Float::ln(Float::sinh(y) / y)
    } else {
        y + Float::ln_1p(-Float::exp(-2.0 * y)) - core::f64::consts::LN_2 - Float::ln(y)
    }
}

/// The scalar (−L_⊥^{-1}F_μ^T) on the eigenvalue pair (Eₙ, Eₘ):
/// (f(Eₘ) − f(Eₙ))/(Eₙ − Eₘ) off the diagonal; (−f)' at the midpoint for
/// |Eₙ − Eₘ| ≤ `eps_deg` when T > 0; zero for degenerate pairs at T = 0.
///
/// For T > 0 the quotient is evaluated as
/// (1/4T)·sinhc(Δ/2)/(cosh a·cosh b) with a = (Eₙ−μ)/2T, b = (Eₘ−μ)/2T,
/// Δ = (Eₙ−Eₘ)/T, which avoids cancellation for close levels.
pub fn pair_weight(e_n: f64, e_m: f64, p: &ThermoParams, eps_deg: f64) -> f64 {
    // Symmetric in (Eₙ, Eₘ); fix the order so it is bitwise symmetric too.
    let (e_n, e_m) = if e_n >= e_m { (e_n, e_m) } else { (e_m, e_n) };
    let gap = e_n - e_m;
    if Float::abs(gap) <= eps_deg {
        if p.is_zero_temperature() {
            return 0.0;
        }
        return neg_derivative(0.5 * (e_n + e_m), p);
    }
    if p.is_zero_temperature() {
        return (fermi(e_m, p) - fermi(e_n, p)) / gap;
    }
    let t = p.temperature;
    let a = (e_n - p.fermi_level) / (2.0 * t);
    let b = (e_m - p.fermi_level) / (2.0 * t);
    let ln_w = ln_sinhc(gap / (2.0 * t)) - ln_cosh(a) - ln_cosh(b) - Float::ln(4.0 * t);
    Float::exp(ln_w)
}

/// Which argument scaling of sech² defines C_μ^T.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SechConvention {
    /// sech²((E−μ)/T), as printed.
    Literal,
    /// sech²((E−μ)/(2T)), which equals 4T·(−f_μ^T)'(E).
    #[default]
    HalfArgument,
}

impl SechConvention {
    fn divisor(self) -> f64 {
        match self {
            SechConvention::Literal => 1.0,
            SechConvention::HalfArgument => 2.0,
        }
    }
}

fn sech_sq(x: f64) -> f64 {
    let q = Float::exp(-2.0 * Float::abs(x));
    4.0 * q / ((1.0 + q) * (1.0 + q))
}

/// C_μ^T = inf over E ∈ [E₋−E₊, E₊−E₋] of sech²((E−μ)/(cT)); attained at
/// the endpoint farthest from μ.
pub fn c_mu_t(p: &ThermoParams, bounds: (f64, f64), convention: SechConvention) -> Result<f64> {
    if p.is_zero_temperature() {
        return Err(Error::ZeroTemperature("C_μ^T"));
    }
    let diameter = bounds.1 - bounds.0;
    let far = Float::abs(-diameter - p.fermi_level).max(Float::abs(diameter - p.fermi_level));
    Ok(sech_sq(far / (convention.divisor() * p.temperature)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tp(t: f64, mu: f64) -> ThermoParams {
        ThermoParams::new(t, mu).unwrap()
    }

    #[test]
    fn fermi_values() {
        assert_eq!(fermi(0.3, &tp(1.0, 0.3)), 0.5);
        assert_eq!(fermi(0.0, &tp(0.0, 0.0)), 1.0);
        assert_eq!(fermi(1e-300, &tp(0.0, 0.0)), 0.0);
        let far = fermi(700.0 * 0.5, &tp(0.5, 0.0));
        assert!(far.is_finite() && (0.0..1e-300).contains(&far));
        assert_eq!(fermi(1e6, &tp(1.0, 0.0)), 0.0);
        assert_eq!(fermi(-1e6, &tp(1.0, 0.0)), 1.0);
        assert!(ThermoParams::new(-1.0, 0.0).is_err());
    }

    #[test]
    fn derivative_peak_and_errors() {
        let p = tp(0.7, 0.2);
        assert!((fermi_derivative_neg(0.2, &p).unwrap() - 1.0 / 2.8).abs() < 1e-15);
        assert!(fermi_derivative_neg(0.0, &tp(0.0, 0.0)).is_err());
        let a = fermi_derivative_neg(0.2 + 0.9, &p).unwrap();
        let b = fermi_derivative_neg(0.2 - 0.9, &p).unwrap();
        assert!((a - b).abs() <= 1e-15 * a);
    }

    #[test]
    fn pair_weight_closed_forms() {
        assert_eq!(pair_weight(1.0, -1.0, &tp(0.0, 0.0), 1e-10), 0.5);
        let w = pair_weight(1.0, -1.0, &tp(1.0, 0.0), 1e-10);
        // f(−1) − f(1) = tanh(1/2)
        let tanh_half = Float::tanh(0.5);
        assert!((w - tanh_half / 2.0).abs() < 1e-15, "{w}");
        assert!((w - 0.231).abs() < 1e-3);
        assert_eq!(pair_weight(0.4, 0.4, &tp(1.0, 0.4), 1e-10), 0.25);
        assert_eq!(pair_weight(0.4, 0.4, &tp(0.0, 0.0), 1e-10), 0.0);
    }

    #[test]
    fn pair_weight_far_tails_are_finite() {
        let p = tp(0.01, 0.0);
        let w = pair_weight(50.0, 40.0, &p, 1e-10);
        assert!(w.is_finite() && w >= 0.0);
        let w = pair_weight(50.0, -40.0, &p, 1e-10);
        assert!((w - 1.0 / 90.0).abs() < 1e-13, "{w}");
    }

    #[test]
    fn c_mu_t_values() {
        let c = c_mu_t(&tp(4.0, 0.0), (-2.0, 2.0), SechConvention::Literal).unwrap();
        let s = 1.0 / Float::cosh(1.0);
        assert!((c - s * s).abs() < 1e-15);
        assert!((c - 0.4200).abs() < 1e-4);
        let hot = c_mu_t(&tp(1e9, 0.0), (-2.0, 2.0), SechConvention::HalfArgument).unwrap();
        assert!((hot - 1.0).abs() < 1e-15);
        assert!(c_mu_t(&tp(0.0, 0.0), (-2.0, 2.0), SechConvention::Literal).is_err());
        let mut last = 1.0;
        for mu in [5.0, 6.0, 8.0] {
            let c = c_mu_t(&tp(1.0, mu), (-2.0, 2.0), SechConvention::HalfArgument).unwrap();
            assert!(c < last);
            last = c;
        }
    }
}
