use super::StatsError;

const EPS: f64 = 1e-16;
const TINY: f64 = 1e-300;
const MAX_ITER: usize = 1_000_000;

/// Regularized upper incomplete gamma `Q(a, x)`.
///
/// Panics on `a <= 0` or `x < 0`; see [`igamc_checked`] for the fallible form.
pub fn igamc(a: f64, x: f64) -> f64 {
    igamc_checked(a, x).unwrap_or_else(|e| panic!("igamc({a}, {x}): {e}"))
}

pub fn igamc_checked(a: f64, x: f64) -> Result<f64, StatsError> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(StatsError::Domain(format!("shape a = {a} must be positive")));
    }
    if !(x >= 0.0) {
        return Err(StatsError::Domain(format!("x = {x} must be non-negative")));
    }
    if x == 0.0 {
        return Ok(1.0);
    }
    if x.is_infinite() {
        return Ok(0.0);
    }
    // Series converges fast below the mode; the continued fraction above it.
    if x < a + 1.0 {
        Ok((1.0 - lower_series(a, x)).max(0.0))
    } else {
        Ok(upper_fraction(a, x))
    }
}

fn log_prefactor(a: f64, x: f64) -> f64 {
    a * x.ln() - x - libm::lgamma(a)
}

/// Regularized lower incomplete gamma `P(a, x)` by its power series.
fn lower_series(a: f64, x: f64) -> f64 {
    let mut ap = a;
    let mut del = 1.0 / a;
    let mut sum = del;
    for _ in 0..MAX_ITER {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if del.abs() < sum.abs() * EPS {
            break;
        }
    }
    (sum * log_prefactor(a, x).exp()).min(1.0)
}

/// `Q(a, x)` by the Legendre continued fraction, evaluated with modified Lentz.
fn upper_fraction(a: f64, x: f64) -> f64 {
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..MAX_ITER {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    (log_prefactor(a, x).exp() * h).clamp(0.0, 1.0)
}
