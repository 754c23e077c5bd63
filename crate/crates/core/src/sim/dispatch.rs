use serde::{Deserialize, Serialize};

/// One SoC report as the planner sees it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SocRecord {
    pub day: f64,
    pub stored_j: f64,
}

/// Least-squares line `stored = intercept + slope * day`.
///
/// `None` with fewer than two records or when every record shares a day.
pub fn fit_line(history: &[SocRecord]) -> Option<(f64, f64)> {
    if history.len() < 2 {
        return None;
    }
    let n = history.len() as f64;
    let mean_x = history.iter().map(|r| r.day).sum::<f64>() / n;
    let mean_y = history.iter().map(|r| r.stored_j).sum::<f64>() / n;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for r in history {
        let dx = r.day - mean_x;
        sxx += dx * dx;
        sxy += dx * (r.stored_j - mean_y);
    }
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    Some((slope, mean_y - slope * mean_x))
}

/// Extrapolates the records inside the trailing `window_days` to the day the
/// stored energy reaches zero. `None` when the trend is flat or rising.
pub fn predict_depletion(history: &[SocRecord], window_days: f64) -> Option<f64> {
    let last = history
        .iter()
        .map(|r| r.day)
        .fold(f64::NEG_INFINITY, f64::max);
    let recent: Vec<SocRecord> = history
        .iter()
        .copied()
        .filter(|r| r.day >= last - window_days)
        .collect();
    let (slope, intercept) = fit_line(&recent)?;
    if slope >= 0.0 {
        return None;
    }
    Some(-intercept / slope)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(day: f64, stored_j: f64) -> SocRecord {
        SocRecord { day, stored_j }
    }

    #[test]
    fn two_point_extrapolation() {
        let h = [rec(0.0, 1000.0), rec(10.0, 900.0)];
        assert_eq!(predict_depletion(&h, 30.0), Some(100.0));
    }

    #[test]
    fn flat_or_rising_history() {
        assert_eq!(
            predict_depletion(&[rec(0.0, 5.0), rec(1.0, 5.0), rec(2.0, 5.0)], 10.0),
            None
        );
        assert_eq!(
            predict_depletion(&[rec(0.0, 5.0), rec(1.0, 6.0)], 10.0),
            None
        );
    }

    #[test]
    fn insufficient_history() {
        assert_eq!(predict_depletion(&[], 10.0), None);
        assert_eq!(predict_depletion(&[rec(3.0, 5.0)], 10.0), None);
        // only the last record is inside the window
        assert_eq!(
            predict_depletion(&[rec(0.0, 9.0), rec(50.0, 5.0)], 10.0),
            None
        );
    }

    #[test]
    fn exact_linear_drain_has_no_error() {
        let h: Vec<_> = (0..20)
            .map(|d| rec(f64::from(d), 5000.0 - 22.7 * f64::from(d)))
            .collect();
        let predicted = predict_depletion(&h, 30.0).unwrap();
        assert!((predicted - 5000.0 / 22.7).abs() < 1e-9);
    }
}
