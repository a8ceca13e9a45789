//! Small statistics used when turning raw series into reported tables.

/// Index of the minimum of a nonempty series; ties resolve to the smallest
/// index.
pub fn min_distance_time(series: &[f64]) -> usize {
    assert!(!series.is_empty(), "min_distance_time needs a nonempty series");
    let mut best = 0;
    for (k, &v) in series.iter().enumerate().skip(1) {
        if v < series[best] {
            best = k;
        }
    }
    best
}

/// First index where the relative deviation |empirical - predicted| /
/// predicted exceeds `band`. Returns the series length as a sentinel when the
/// deviation never exceeds the band.
pub fn threshold_time(empirical: &[f64], predicted: &[f64], band: f64) -> usize {
    assert_eq!(empirical.len(), predicted.len(), "threshold_time needs equal-length series");
    for (k, (&e, &p)) in empirical.iter().zip(predicted).enumerate() {
        if ((e - p) / p).abs() > band {
            return k;
        }
    }
    empirical.len()
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Population standard deviation (the ensembles are complete, not sampled).
pub fn std_dev(xs: &[f64]) -> f64 {
    let m = mean(xs);
    (xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / xs.len() as f64).sqrt()
}

/// Least-squares line fit, returning (slope, intercept, correlation).
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    assert_eq!(xs.len(), ys.len());
    assert!(xs.len() >= 2, "linear_fit needs at least two points");
    let mx = mean(xs);
    let my = mean(ys);
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let slope = sxy / sxx;
    let r = if syy == 0.0 { 1.0 } else { sxy / (sxx * syy).sqrt() };
    (slope, my - slope * mx, r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn argmin_breaks_ties_low() {
        assert_eq!(min_distance_time(&[3.0, 1.0, 1.0, 2.0]), 1);
        assert_eq!(min_distance_time(&[0.5]), 0);
        // Monotone increasing series dips nowhere: the start is the minimum.
        assert_eq!(min_distance_time(&[1.0, 2.0, 3.0]), 0);
    }

    #[test]
    fn unique_dip_is_found() {
        let mut s = vec![1.0; 40];
        s[17] = 0.25;
        assert_eq!(min_distance_time(&s), 17);
    }

    #[test]
    fn threshold_sentinel_cases() {
        let a = [1.0, 1.0, 1.0];
        assert_eq!(threshold_time(&a, &a, 0.05), 3);
        assert_eq!(threshold_time(&[1.0, 2.0], &[1.0, 1.0], f64::INFINITY), 2);
        assert_eq!(threshold_time(&[1.0, 1.2, 1.0], &[1.0, 1.0, 1.0], 0.05), 1);
    }

    #[test]
    fn exact_line_fit() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys = [3.0, 5.0, 7.0, 9.0];
        let (slope, intercept, r) = linear_fit(&xs, &ys);
        assert!((slope - 2.0).abs() < 1e-12);
        assert!((intercept - 1.0).abs() < 1e-12);
        assert!((r - 1.0).abs() < 1e-12);
    }
}
