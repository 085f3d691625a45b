use statrs::distribution::{ContinuousCDF, StudentsT};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IntervalError {
    #[error("a confidence interval needs at least 2 samples, got {0}")]
    TooFewSamples(usize),
    #[error("confidence level must lie strictly between 0 and 1, got {0}")]
    Level(f64),
}

/// Sample mean and Student-t half-width at confidence `level`.
pub fn confidence_interval(samples: &[f64], level: f64) -> Result<(f64, f64), IntervalError> {
    if !(level > 0.0 && level < 1.0) {
        return Err(IntervalError::Level(level));
    }
    let n = samples.len();
    if n < 2 {
        return Err(IntervalError::TooFewSamples(n));
    }
    let mean = samples.iter().sum::<f64>() / n as f64;
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    if var == 0.0 {
        return Ok((mean, 0.0));
    }
    let t = StudentsT::new(0.0, 1.0, (n - 1) as f64)
        .expect("positive degrees of freedom")
        .inverse_cdf(0.5 + level / 2.0);
    Ok((mean, t * (var / n as f64).sqrt()))
}
