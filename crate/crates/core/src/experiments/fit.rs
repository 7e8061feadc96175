use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root mean square of the residuals in log space.
    pub residual: f64,
    pub points: usize,
}

/// Ordinary least squares of `log y` against `log x`.
pub fn fit_loglog_slope(pairs: &[(f64, f64)]) -> Result<SlopeFit> {
    if pairs.len() < 2 {
        return Err(Error::InsufficientData(pairs.len()));
    }
    for &(x, y) in pairs {
        if !(x > 0.0 && y > 0.0) {
            return Err(Error::NonPositiveValue { x, y });
        }
    }
    let n = pairs.len() as f64;
    let lx: Vec<f64> = pairs.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = pairs.iter().map(|p| p.1.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientData(1));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = lx
        .iter()
        .zip(&ly)
        .map(|(x, y)| {
            let r = y - (intercept + slope * x);
            r * r
        })
        .sum();
    Ok(SlopeFit {
        slope,
        intercept,
        residual: (ss / n).sqrt(),
        points: pairs.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power() {
        let f = fit_loglog_slope(&[(1.0, 1.0), (2.0, 4.0)]).unwrap();
        assert_eq!(f.slope, 2.0);
        assert!(f.residual < 1e-15);
    }

    #[test]
    fn constant_has_zero_slope() {
        let f = fit_loglog_slope(&[(1.0, 3.0), (2.0, 3.0)]).unwrap();
        assert_eq!(f.slope, 0.0);
    }

    #[test]
    fn errors() {
        assert!(matches!(
            fit_loglog_slope(&[(1.0, 1.0)]),
            Err(Error::InsufficientData(1))
        ));
        assert!(matches!(
            fit_loglog_slope(&[(1.0, 1.0), (2.0, 0.0)]),
            Err(Error::NonPositiveValue { .. })
        ));
    }
}
