use crate::error::{Error, Result};

/// Simple moving average: element `j` is the mean of `series[j..j + window]`.
pub fn sma(series: &[f64], window: usize) -> Result<Vec<f64>> {
    if window == 0 || window > series.len() {
        return Err(Error::contract(format!(
            "SMA window {window} must lie in 1..={}",
            series.len()
        )));
    }
    Ok(series
        .windows(window)
        .map(|w| w.iter().sum::<f64>() / window as f64)
        .collect())
}

/// Equal-width bins over `[0, 1]`; 1.0 lands in the last bin, so with fitness
/// values the last bin counts exactly the positive tests.
pub fn histogram(values: &[f64], bins: usize) -> Result<Vec<usize>> {
    if bins == 0 {
        return Err(Error::contract("histogram needs at least one bin"));
    }
    let mut counts = vec![0; bins];
    for &v in values {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::contract(format!("histogram value {v} outside [0, 1]")));
        }
        let bin = ((v * bins as f64).floor() as usize).min(bins - 1);
        counts[bin] += 1;
    }
    Ok(counts)
}

pub fn mean(values: &[f64]) -> Option<f64> {
    (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64)
}

/// Sample standard deviation (n − 1); zero for fewer than two values.
pub fn stddev(values: &[f64]) -> f64 {
    match mean(values) {
        Some(m) if values.len() > 1 => {
            let ss: f64 = values.iter().map(|v| (v - m) * (v - m)).sum();
            (ss / (values.len() - 1) as f64).sqrt()
        }
        _ => 0.0,
    }
}
