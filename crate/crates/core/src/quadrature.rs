//! Globally adaptive Gauss–Kronrod (7/15) quadrature for vector-valued
//! integrands.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
// Gauss weights for XGK[1], XGK[3], XGK[5], XGK[7]
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            abs_tol: 0.0,
            rel_tol: 1e-13,
            max_intervals: 2000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureResult {
    pub value: Vec<f64>,
    pub error: f64,
    pub evaluations: usize,
}

struct Segment {
    a: f64,
    b: f64,
    value: Vec<f64>,
    error: f64,
}

fn gk15<F: FnMut(f64, &mut [f64])>(f: &mut F, a: f64, b: f64, dim: usize) -> Segment {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut kronrod = vec![0.0; dim];
    let mut gauss = vec![0.0; dim];
    let mut buf = vec![0.0; dim];
    for (i, (&x, &wk)) in XGK.iter().zip(WGK.iter()).enumerate() {
        let nodes: &[f64] = if x == 0.0 { &[0.0] } else { &[-1.0, 1.0] };
        for &s in nodes {
            f(c + s * h * x, &mut buf);
            for k in 0..dim {
                kronrod[k] += wk * buf[k];
                if i % 2 == 1 {
                    gauss[k] += WG[i / 2] * buf[k];
                }
            }
        }
    }
    let mut error = 0.0f64;
    for k in 0..dim {
        kronrod[k] *= h;
        gauss[k] *= h;
        error = error.max((kronrod[k] - gauss[k]).abs());
    }
    Segment {
        a,
        b,
        value: kronrod,
        error,
    }
}

/// ∫_a^b f over each of `dim` components. `f(x, out)` writes the integrand
/// at `x`. Error control is in the max-norm over components.
pub fn integrate<F>(mut f: F, a: f64, b: f64, dim: usize, spec: &QuadratureSpec) -> Result<QuadratureResult>
where
    F: FnMut(f64, &mut [f64]),
{
    if a == b {
        return Ok(QuadratureResult {
            value: vec![0.0; dim],
            error: 0.0,
            evaluations: 0,
        });
    }
    let mut segments = vec![gk15(&mut f, a, b, dim)];
    let mut evaluations = 15;
    loop {
        let mut total = vec![0.0; dim];
        let mut err = 0.0;
        for s in &segments {
            for k in 0..dim {
                total[k] += s.value[k];
            }
            err += s.error;
        }
        let scale = total.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let tol = spec.abs_tol.max(spec.rel_tol * scale);
        if err <= tol {
            return Ok(QuadratureResult {
                value: total,
                error: err,
                evaluations,
            });
        }
        if segments.len() >= spec.max_intervals {
            return Err(Error::QuadratureNoConvergence { estimate: err });
        }
        let (worst, _) = segments
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (i, s)| if s.error > acc.1 { (i, s.error) } else { acc });
        let s = segments.swap_remove(worst);
        let mid = 0.5 * (s.a + s.b);
        if !(mid > s.a && mid < s.b) {
            return Err(Error::QuadratureNoConvergence { estimate: err });
        }
        segments.push(gk15(&mut f, s.a, mid, dim));
        segments.push(gk15(&mut f, mid, s.b, dim));
        evaluations += 30;
    }
}

pub fn integrate_scalar<F>(mut f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<f64>
where
    F: FnMut(f64) -> f64,
{
    integrate(|x, out: &mut [f64]| out[0] = f(x), a, b, 1, spec).map(|r| r.value[0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Float;

    #[test]
    fn polynomial_and_gaussian() {
        let spec = QuadratureSpec::default();
        let v = integrate_scalar(|x| x * x * x - 2.0 * x, 0.0, 2.0, &spec).unwrap();
        assert!((v - 0.0).abs() < 1e-14);
        let g = integrate_scalar(|x| Float::exp(-x * x), -8.0, 8.0, &spec).unwrap();
        assert!((g - Float::sqrt(core::f64::consts::PI)).abs() < 1e-13);
    }

    #[test]
    fn vector_valued() {
        let spec = QuadratureSpec::default();
        let r = integrate(
            |x, out: &mut [f64]| {
                out[0] = Float::cos(x);
                out[1] = 3.0 * Float::cos(x);
            },
            0.0,
            core::f64::consts::FRAC_PI_2,
            2,
            &spec,
        )
        .unwrap();
        assert!((r.value[0] - 1.0).abs() < 1e-14);
        assert!((r.value[1] - 3.0).abs() < 1e-14);
    }
}
