use rand::Rng;

use super::DisclosureError;

/// Inverse-CDF Laplace sample for a given `u` in `(-1/2, 1/2)`.
pub fn laplace_from_uniform(value: f64, scale: f64, u: f64) -> f64 {
    if u == 0.0 {
        return value;
    }
    value - scale * u.signum() * (1.0 - 2.0 * u.abs()).ln()
}

/// Adds Laplace(0, sensitivity / epsilon) noise to `value`.
pub fn laplace_noise<R: Rng + ?Sized>(
    value: f64,
    sensitivity: f64,
    epsilon: f64,
    rng: &mut R,
) -> Result<f64, DisclosureError> {
    if !(sensitivity > 0.0 && sensitivity.is_finite()) {
        return Err(DisclosureError::BadParameter(format!(
            "sensitivity must be positive (got {sensitivity})"
        )));
    }
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(DisclosureError::BadParameter(format!(
            "epsilon must be positive (got {epsilon})"
        )));
    }
    // random::<f64>() is in [0, 1); reject the single point that maps to -1/2.
    let u = loop {
        let u = rng.random::<f64>() - 0.5;
        if u > -0.5 {
            break u;
        }
    };
    Ok(laplace_from_uniform(value, sensitivity / epsilon, u))
}
