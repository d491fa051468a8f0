use serde::Serialize;

use super::TailEstimate;
use crate::error::{Error, Result};

/// Fitted `ln P(X > n) ≈ a + b n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExpFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_se: f64,
    /// 95% confidence interval of the slope.
    pub ci: (f64, f64),
    pub points: usize,
}

impl ExpFit {
    pub fn ci_excludes_zero(&self) -> bool {
        self.ci.1 < 0.0 || self.ci.0 > 0.0
    }
}

struct Weighted {
    x: f64,
    y: f64,
    w: f64,
}

fn wls(points: &[Weighted]) -> (f64, f64, f64, f64) {
    let sw: f64 = points.iter().map(|p| p.w).sum();
    let mx = points.iter().map(|p| p.w * p.x).sum::<f64>() / sw;
    let my = points.iter().map(|p| p.w * p.y).sum::<f64>() / sw;
    let sxx: f64 = points.iter().map(|p| p.w * (p.x - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| p.w * (p.x - mx) * (p.y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let chi2: f64 = points
        .iter()
        .map(|p| p.w * (p.y - intercept - slope * p.x).powi(2))
        .sum();
    (slope, intercept, sxx, chi2)
}

/// Weighted least squares of `ln S(n)` on `n` over grid points with
/// positive survival.
///
/// The variance of `ln S` is taken as `se² / S²`, with `se` floored at
/// `1/N` so that points with a single exceedance do not dominate. The slope
/// error is inflated by the Birge ratio when the scatter exceeds the
/// stated errors. With all errors zero (exact input) an unweighted fit is
/// used and the error comes from the residuals.
pub fn fit_exponential(tail: &TailEstimate) -> Result<ExpFit> {
    let floor = 1.0 / tail.replicates.max(1) as f64;
    let exact = tail.se.iter().all(|&s| s == 0.0);
    let points: Vec<Weighted> = (0..tail.grid.len())
        .filter(|&i| tail.survival[i] > 0.0)
        .map(|i| {
            let s = tail.survival[i];
            let w = if exact {
                1.0
            } else {
                let se = tail.se[i].max(floor);
                (s / se).powi(2)
            };
            Weighted {
                x: tail.grid[i] as f64,
                y: s.ln(),
                w,
            }
        })
        .collect();
    if points.len() < 4 {
        return Err(Error::InsufficientPoints {
            needed: 4,
            got: points.len(),
        });
    }
    let (slope, intercept, sxx, chi2) = wls(&points);
    let dof = (points.len() - 2) as f64;
    let slope_se = if exact {
        (chi2 / dof / sxx).sqrt()
    } else {
        (1.0 / sxx).sqrt() * (chi2 / dof).sqrt().max(1.0)
    };
    Ok(ExpFit {
        slope,
        intercept,
        slope_se,
        ci: (slope - 1.96 * slope_se, slope + 1.96 * slope_se),
        points: points.len(),
    })
}

/// Ordinary least-squares slope of `ln y` on `ln x` over points with both
/// positive; `None` with fewer than two such points.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    let points: Vec<Weighted> = x
        .iter()
        .zip(y)
        .filter(|(&a, &b)| a > 0.0 && b > 0.0)
        .map(|(&a, &b)| Weighted {
            x: a.ln(),
            y: b.ln(),
            w: 1.0,
        })
        .collect();
    if points.len() < 2 {
        return None;
    }
    Some(wls(&points).0)
}
