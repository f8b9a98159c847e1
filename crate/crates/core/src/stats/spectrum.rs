use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use super::StatsError;

/// Moduli `|S_f|` for `f = 0..count` of the discrete Fourier transform of `x`.
///
/// The transform runs at the exact input length; no padding is applied.
pub fn dft_moduli(x: &[f64], count: usize) -> Result<Vec<f64>, StatsError> {
    if count > x.len() / 2 {
        return Err(StatsError::Domain(format!(
            "requested {count} moduli from a length-{} transform (max {})",
            x.len(),
            x.len() / 2
        )));
    }
    if count == 0 {
        return Ok(Vec::new());
    }
    let mut buf: Vec<Complex<f64>> = x.iter().map(|&v| Complex::new(v, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(buf.len()).process(&mut buf);
    Ok(buf[..count].iter().map(|c| c.norm()).collect())
}
