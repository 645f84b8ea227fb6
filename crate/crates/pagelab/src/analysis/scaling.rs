//! Min-gap scaling with subsystem size.

use crate::error::{PagelabError, Result};

/// Ordinary least squares y = slope·x + intercept with the slope's standard
/// error and R².
#[derive(Debug, Clone, Copy)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
    pub r_squared: f64,
}

pub fn line_fit(x: &[f64], y: &[f64]) -> Option<LineFit> {
    let n = x.len();
    if n < 3 || n != y.len() {
        return None;
    }
    let nf = n as f64;
    let xbar = x.iter().sum::<f64>() / nf;
    let ybar = y.iter().sum::<f64>() / nf;
    let sxx: f64 = x.iter().map(|&v| (v - xbar).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = x.iter().zip(y).map(|(&a, &b)| (a - xbar) * (b - ybar)).sum();
    let syy: f64 = y.iter().map(|&v| (v - ybar).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = ybar - slope * xbar;
    let ssr: f64 = x
        .iter()
        .zip(y)
        .map(|(&a, &b)| (b - (slope * a + intercept)).powi(2))
        .sum();
    let slope_stderr = (ssr / (nf - 2.0) / sxx).sqrt();
    let r_squared = if syy > 0.0 { 1.0 - ssr / syy } else { 1.0 };
    Some(LineFit { slope, intercept, slope_stderr, r_squared })
}

/// Size dependence of the minimum gap at the first crossing and at the
/// Page-time crossing. Both an exponential model (log gap vs M) and a power
/// law (log gap vs log M) are fitted; neither is adjudicated.
#[derive(Debug, Clone)]
pub struct GapScalingResult {
    pub sizes: Vec<usize>,
    pub gaps_first: Vec<f64>,
    pub gaps_page: Vec<f64>,
    pub exp_fit_first: Option<LineFit>,
    pub exp_fit_page: Option<LineFit>,
    pub pow_fit_first: Option<LineFit>,
    pub pow_fit_page: Option<LineFit>,
    /// Sizes whose gap was nonpositive and therefore excluded from log fits.
    pub excluded: Vec<usize>,
}

/// Input rows are (M, min gap at first crossing, min gap at Page crossing),
/// at least three sizes.
pub fn gap_scaling(data: &[(usize, f64, f64)]) -> Result<GapScalingResult> {
    if data.len() < 3 {
        return Err(PagelabError::InvalidSize(format!(
            "gap scaling needs at least 3 sizes, got {}",
            data.len()
        )));
    }
    let mut data = data.to_vec();
    data.sort_by_key(|r| r.0);
    let sizes: Vec<usize> = data.iter().map(|r| r.0).collect();
    let gaps_first: Vec<f64> = data.iter().map(|r| r.1).collect();
    let gaps_page: Vec<f64> = data.iter().map(|r| r.2).collect();
    let mut excluded = Vec::new();
    let mut filtered = |gaps: &[f64]| -> (Vec<f64>, Vec<f64>) {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for (&m, &g) in sizes.iter().zip(gaps) {
            if g > 0.0 {
                xs.push(m as f64);
                ys.push(g.ln());
            } else if !excluded.contains(&m) {
                excluded.push(m);
            }
        }
        (xs, ys)
    };
    let (xf, yf) = filtered(&gaps_first);
    let (xp, yp) = filtered(&gaps_page);
    let logx = |v: &[f64]| v.iter().map(|&m| m.ln()).collect::<Vec<f64>>();
    Ok(GapScalingResult {
        exp_fit_first: line_fit(&xf, &yf),
        exp_fit_page: line_fit(&xp, &yp),
        pow_fit_first: line_fit(&logx(&xf), &yf),
        pow_fit_page: line_fit(&logx(&xp), &yp),
        sizes,
        gaps_first,
        gaps_page,
        excluded,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_exponential_slope() {
        let data = vec![
            (4usize, (-4.0f64).exp(), (-4.0f64).exp()),
            (6, (-6.0f64).exp(), (-6.0f64).exp()),
            (8, (-8.0f64).exp(), (-8.0f64).exp()),
        ];
        let res = gap_scaling(&data).unwrap();
        let fit = res.exp_fit_page.unwrap();
        assert!((fit.slope + 1.0).abs() < 1e-12);
        assert!(fit.slope_stderr < 1e-12);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_gaps_give_zero_slope() {
        let data = vec![(4usize, 0.5, 0.5), (6, 0.5, 0.5), (8, 0.5, 0.5), (10, 0.5, 0.5)];
        let res = gap_scaling(&data).unwrap();
        assert!(res.exp_fit_first.unwrap().slope.abs() < 1e-14);
    }

    #[test]
    fn nonpositive_gap_excluded_and_flagged() {
        let data = vec![(4usize, 0.5, 0.1), (6, 0.4, 0.0), (8, 0.3, 0.01), (10, 0.2, 0.001)];
        let res = gap_scaling(&data).unwrap();
        assert_eq!(res.excluded, vec![6]);
        // page fit still produced from the remaining 3 points
        assert!(res.exp_fit_page.is_some());
    }

    #[test]
    fn too_few_sizes_rejected() {
        assert!(gap_scaling(&[(4, 0.1, 0.1), (6, 0.1, 0.1)]).is_err());
    }
}
