//! Sample statistics and least-squares lines.

use num_traits::Float;

/// Sample mean and standard error of the mean (unbiased variance). The
/// standard error is NaN for fewer than two samples.
pub fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, f64::NAN);
    }
    let ss: f64 = xs.iter().map(|x| (x - mean) * (x - mean)).sum();
    (mean, Float::sqrt(ss / (n as f64 - 1.0) / n as f64))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub intercept: f64,
    pub slope: f64,
    pub intercept_stderr: f64,
    pub slope_stderr: f64,
    /// Root-mean-square residual.
    pub residual_rms: f64,
}

/// Ordinary least squares y ≈ intercept + slope·x. Needs at least two
/// distinct x values; standard errors need at least three points.
pub fn fit_line(x: &[f64], y: &[f64]) -> Option<LineFit> {
    let n = x.len();
    if n < 2 || y.len() != n {
        return None;
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| {
            let r = b - intercept - slope * a;
            r * r
        })
        .sum();
    let (intercept_stderr, slope_stderr) = if n > 2 {
        let s2 = ssr / (nf - 2.0);
        (
            Float::sqrt(s2 * (1.0 / nf + mx * mx / sxx)),
            Float::sqrt(s2 / sxx),
        )
    } else {
        (f64::NAN, f64::NAN)
    };
    Some(LineFit {
        intercept,
        slope,
        intercept_stderr,
        slope_stderr,
        residual_rms: Float::sqrt(ssr / nf),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_and_stderr() {
        let (m, s) = mean_stderr(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        // var = 5/3, stderr = sqrt(5/12)
        assert!((s - (5.0f64 / 12.0).sqrt()).abs() < 1e-15);
        assert!(mean_stderr(&[1.0]).1.is_nan());
    }

    #[test]
    fn exact_line() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y = [1.0, 3.0, 5.0, 7.0];
        let f = fit_line(&x, &y).unwrap();
        assert!((f.intercept - 1.0).abs() < 1e-14);
        assert!((f.slope - 2.0).abs() < 1e-14);
        assert!(f.residual_rms < 1e-14);
        assert!(fit_line(&[1.0, 1.0], &[0.0, 1.0]).is_none());
    }
}
