use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::model::{effective_noise, AnnealerConfig, NoiseModel};
use super::{config_digest, ChimeraGraph, SimError};
use crate::bitstream::{AnnealSample, BitSequence, BitSequenceBuilder, StreamMetadata, StreamOrigin};

/// A Bernoulli event compared against a raw 64-bit draw. `Never` and
/// `Always` consume no randomness so that `p = 0` and `p = 1` are exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Chance {
    Never,
    Always,
    Threshold(u64),
}

impl Chance {
    fn new(p: f64) -> Self {
        if p <= 0.0 {
            Chance::Never
        } else if p >= 1.0 {
            Chance::Always
        } else {
            Chance::Threshold((p * 18_446_744_073_709_551_616.0) as u64)
        }
    }

    #[inline]
    fn draw(self, rng: &mut ChaCha8Rng) -> bool {
        match self {
            Chance::Never => false,
            Chance::Always => true,
            Chance::Threshold(thr) => rng.next_u64() < thr,
        }
    }
}

/// Per-stream state for the generative model. Each anneal `t` draws from its
/// own ChaCha stream, so anneal `t` is reproducible from `(seed, t)` alone.
pub(crate) struct Sampler<'g> {
    graph: &'g ChimeraGraph,
    noise: NoiseModel,
    bias: Vec<f64>,
    /// Per-qubit P(1) thresholds, cached when the model has no drift.
    fixed: Option<Vec<Chance>>,
    temporal: Chance,
    coupler: Chance,
    base: ChaCha8Rng,
}

impl<'g> Sampler<'g> {
    pub(crate) fn new(graph: &'g ChimeraGraph, config: &AnnealerConfig, noise: &NoiseModel) -> Result<Self, SimError> {
        config.validate()?;
        noise.validate(graph.active_count())?;
        let noise = effective_noise(config, noise);
        noise.validate(graph.active_count())?;
        let bias = noise.resolved_bias(graph.active_count());
        let drifting = noise.drift_amplitude != 0.0 && noise.drift_period_anneals != 0.0;
        let fixed = (!drifting).then(|| bias.iter().map(|b| Chance::new(0.5 + b)).collect());
        Ok(Self {
            graph,
            temporal: Chance::new(noise.temporal_rho),
            coupler: Chance::new(noise.coupler_rho),
            base: ChaCha8Rng::seed_from_u64(noise.rng_seed),
            noise,
            bias,
            fixed,
        })
    }

    /// Fills `bits` (one `0`/`1` byte per active qubit) for anneal `t`.
    pub(crate) fn anneal_into(&self, bits: &mut [u8], prev: Option<&[u8]>, t: u64) {
        let mut rng = self.base.clone();
        rng.set_stream(t);
        match &self.fixed {
            Some(chances) => {
                for (bit, chance) in bits.iter_mut().zip(chances) {
                    *bit = u8::from(chance.draw(&mut rng));
                }
            }
            None => {
                let d = self.noise.drift_at(t);
                for (bit, b) in bits.iter_mut().zip(&self.bias) {
                    *bit = u8::from(Chance::new(0.5 + b + d).draw(&mut rng));
                }
            }
        }
        if let Some(prev) = prev {
            if self.temporal != Chance::Never {
                for (bit, &old) in bits.iter_mut().zip(prev) {
                    if self.temporal.draw(&mut rng) {
                        *bit = old;
                    }
                }
            }
        }
        if self.coupler != Chance::Never {
            for &(lo, hi) in self.graph.couplers() {
                if self.coupler.draw(&mut rng) {
                    bits[hi as usize] = bits[lo as usize];
                }
            }
        }
    }
}

/// One anneal-readout cycle of the noisy annealer model.
///
/// In order: each active qubit reads `1` with probability
/// `clamp(0.5 + b_i + d(t))`; with probability `temporal_rho` it instead
/// repeats `prev`; then one pass over the couplers in sorted order copies the
/// lower endpoint onto the higher one with probability `coupler_rho`.
pub fn sample_anneal(
    graph: &ChimeraGraph,
    config: &AnnealerConfig,
    noise: &NoiseModel,
    prev: Option<&AnnealSample>,
    t: u64,
) -> Result<AnnealSample, SimError> {
    let n = graph.active_count();
    let prev_bits = match prev {
        Some(p) if p.spins.len() != n => {
            return Err(SimError::PrevLength {
                expected: n,
                found: p.spins.len(),
            })
        }
        Some(p) => Some(
            p.spins
                .iter()
                .map(|&s| match s {
                    1 => Ok(1u8),
                    -1 => Ok(0u8),
                    other => Err(SimError::InvalidConfig(format!("previous sample holds spin {other}"))),
                })
                .collect::<Result<Vec<u8>, _>>()?,
        ),
        None => None,
    };
    let sampler = Sampler::new(graph, config, noise)?;
    let mut bits = vec![0u8; n];
    sampler.anneal_into(&mut bits, prev_bits.as_deref(), t);
    let spins = bits.iter().map(|&b| if b == 1 { 1 } else { -1 }).collect();
    Ok(AnnealSample::new(spins, t))
}

/// Bits of anneals `0..n_anneals`, concatenated in order, with metadata.
pub fn generate_stream(
    graph: &ChimeraGraph,
    config: &AnnealerConfig,
    noise: &NoiseModel,
    n_anneals: u64,
) -> Result<(BitSequence, StreamMetadata), SimError> {
    if n_anneals == 0 {
        return Err(SimError::InvalidConfig("n_anneals must be at least 1".into()));
    }
    let total = n_anneals
        .checked_mul(graph.active_count() as u64)
        .and_then(|b| usize::try_from(b).ok())
        .ok_or_else(|| SimError::InvalidConfig("stream length exceeds address space".into()))?;
    let sampler = Sampler::new(graph, config, noise)?;
    let mut builder = BitSequenceBuilder::with_capacity(total);
    let n = graph.active_count();
    let mut cur = vec![0u8; n];
    let mut prev = vec![0u8; n];
    for t in 0..n_anneals {
        sampler.anneal_into(&mut cur, (t > 0).then_some(&prev[..]), t);
        builder.push_bit_values(&cur);
        std::mem::swap(&mut cur, &mut prev);
    }
    let seq = builder.finish();
    let origin = StreamOrigin {
        descriptor: format!(
            "annealer-sim grid={} shore={} active={} anneal_time_us={} postprocess={} seed={} anneals={}",
            graph.grid_size(),
            graph.shore_size(),
            n,
            config.annealing_time_us,
            config.postprocess_sampling,
            noise.rng_seed,
            n_anneals
        ),
        config_digest: config_digest(graph, config, noise),
        epoch_starts: Vec::new(),
    };
    let meta = StreamMetadata::for_sequence(&seq, &origin);
    Ok((seq, meta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annealer::model::QubitBias;

    fn fixture() -> ChimeraGraph {
        ChimeraGraph::device_fixture()
    }

    fn ones(seq: &BitSequence) -> f64 {
        seq.count_ones() as f64 / seq.len() as f64
    }

    #[test]
    fn ideal_noise_is_a_fair_coin() {
        let g = fixture();
        // 493 anneals x 2032 qubits is just over 10^6 draws.
        let (seq, _) = generate_stream(&g, &AnnealerConfig::default(), &NoiseModel::ideal(7), 493).unwrap();
        assert!(seq.len() >= 1_000_000);
        let sigma = 0.5 / (seq.len() as f64).sqrt();
        assert!((ones(&seq) - 0.5).abs() < 3.0 * sigma, "{}", ones(&seq));
    }

    #[test]
    fn zero_noise_marginal_passes_chi_square() {
        let g = fixture();
        let (seq, _) = generate_stream(&g, &AnnealerConfig::default(), &NoiseModel::ideal(11), 493).unwrap();
        let n = seq.len() as f64;
        let k = seq.count_ones() as f64;
        let chi2 = (k - n / 2.0).powi(2) / (n / 2.0) + ((n - k) - n / 2.0).powi(2) / (n / 2.0);
        // 1 degree of freedom; 10.828 is the 0.999 quantile.
        assert!(chi2 < 10.828, "{chi2}");
    }

    #[test]
    fn uniform_bias_shifts_frequency() {
        let g = fixture();
        let noise = NoiseModel::with_uniform_bias(3, 0.1);
        let (seq, _) = generate_stream(&g, &AnnealerConfig::default(), &noise, 493).unwrap();
        assert!((ones(&seq) - 0.6).abs() < 0.0015, "{}", ones(&seq));
    }

    #[test]
    fn full_temporal_correlation_copies_prev() {
        let g = fixture();
        let mut noise = NoiseModel::ideal(5);
        noise.temporal_rho = 1.0;
        let cfg = AnnealerConfig::default();
        let first = sample_anneal(&g, &cfg, &noise, None, 0).unwrap();
        let second = sample_anneal(&g, &cfg, &noise, Some(&first), 1).unwrap();
        assert_eq!(second.spins, first.spins);
        assert_eq!(second.anneal_index, 1);
    }

    #[test]
    fn prev_length_checked() {
        let g = fixture();
        let prev = AnnealSample::new(vec![1; 10], 0);
        let err = sample_anneal(&g, &AnnealerConfig::default(), &NoiseModel::ideal(0), Some(&prev), 1);
        assert!(matches!(err, Err(SimError::PrevLength { expected: 2032, found: 10 })));
    }

    #[test]
    fn sample_matches_stream_anneal() {
        let g = fixture();
        let mut noise = NoiseModel::with_uniform_bias(9, 0.01);
        noise.temporal_rho = 0.3;
        noise.coupler_rho = 0.2;
        let cfg = AnnealerConfig::default();
        let (seq, _) = generate_stream(&g, &cfg, &noise, 3).unwrap();
        let a0 = sample_anneal(&g, &cfg, &noise, None, 0).unwrap();
        let a1 = sample_anneal(&g, &cfg, &noise, Some(&a0), 1).unwrap();
        let a2 = sample_anneal(&g, &cfg, &noise, Some(&a1), 2).unwrap();
        let parts: Vec<BitSequence> = [a0, a1, a2].iter().map(|s| crate::bitstream::spins_to_bits(s).unwrap()).collect();
        assert_eq!(crate::bitstream::concat(&parts), seq);
    }

    #[test]
    fn two_anneals_are_deterministic() {
        let g = fixture();
        let cfg = AnnealerConfig::default();
        let (a, meta) = generate_stream(&g, &cfg, &NoiseModel::ideal(1), 2).unwrap();
        let (b, meta_b) = generate_stream(&g, &cfg, &NoiseModel::ideal(1), 2).unwrap();
        assert_eq!(a.len(), 4064);
        assert_eq!(meta.bit_count, 4064);
        assert_eq!(a, b);
        assert_eq!(meta.config_digest, meta_b.config_digest);
        let (c, _) = generate_stream(&g, &cfg, &NoiseModel::ideal(2), 2).unwrap();
        assert_ne!(a, c);
        assert!(generate_stream(&g, &cfg, &NoiseModel::ideal(1), 0).is_err());
    }

    fn lag_correlation(seq: &BitSequence, lag: usize) -> (f64, f64) {
        let bits = seq.to_bit_values();
        let n = bits.len() - lag;
        let mut sum = 0.0;
        for i in 0..n {
            let a = 2.0 * bits[i] as f64 - 1.0;
            let b = 2.0 * bits[i + lag] as f64 - 1.0;
            sum += a * b;
        }
        (sum / n as f64, 1.0 / (n as f64).sqrt())
    }

    #[test]
    fn temporal_rho_sets_lag_correlation() {
        let g = fixture();
        let mut noise = NoiseModel::ideal(21);
        noise.temporal_rho = 0.5;
        // About 10^7 bits.
        let (seq, _) = generate_stream(&g, &AnnealerConfig::default(), &noise, 4922).unwrap();
        let (r, sigma) = lag_correlation(&seq, 2032);
        // Each lag pair agrees with probability 1/2 + rho/2, so the
        // correlation of the +-1 values is rho with variance (1 - rho^2) / n.
        let sd = sigma * (1.0f64 - 0.25).sqrt();
        assert!((r - 0.5).abs() < 3.0 * sd, "r={r} sd={sd}");

        noise.temporal_rho = 0.0;
        let (seq, _) = generate_stream(&g, &AnnealerConfig::default(), &noise, 493).unwrap();
        let (r, sigma) = lag_correlation(&seq, 2032);
        assert!(r.abs() < 3.0 * sigma, "r={r}");
    }

    #[test]
    fn couplers_independent_without_crosstalk() {
        let g = fixture();
        let (seq, _) = generate_stream(&g, &AnnealerConfig::default(), &NoiseModel::ideal(4), 400).unwrap();
        let bits = seq.to_bit_values();
        let n = g.active_count();
        let (lo, hi) = g.couplers()[100];
        let mut sum = 0.0;
        let anneals = bits.len() / n;
        for a in 0..anneals {
            let x = 2.0 * bits[a * n + lo as usize] as f64 - 1.0;
            let y = 2.0 * bits[a * n + hi as usize] as f64 - 1.0;
            sum += x * y;
        }
        let r = sum / anneals as f64;
        assert!(r.abs() < 3.0 / (anneals as f64).sqrt(), "r={r}");
        // Pooled over every coupler.
        let mut pooled = 0.0;
        for a in 0..anneals {
            for &(lo, hi) in g.couplers() {
                pooled += if bits[a * n + lo as usize] == bits[a * n + hi as usize] { 1.0 } else { -1.0 };
            }
        }
        let m = (anneals * g.couplers().len()) as f64;
        assert!((pooled / m).abs() < 3.0 / m.sqrt(), "{}", pooled / m);
    }

    #[test]
    fn full_crosstalk_makes_couplers_agree_often() {
        let g = ChimeraGraph::all_active(1, 4).unwrap();
        let mut noise = NoiseModel::ideal(8);
        noise.coupler_rho = 1.0;
        let (seq, _) = generate_stream(&g, &AnnealerConfig::default(), &noise, 200).unwrap();
        let bits = seq.to_bit_values();
        // With every copy applied in sorted order, the whole horizontal shore
        // takes the last vertical qubit's value.
        for anneal in bits.chunks(8) {
            assert!(anneal[4..].iter().all(|&b| b == anneal[3]));
        }
    }

    #[test]
    fn postprocessing_attenuates_bias() {
        let g = fixture();
        let noise = NoiseModel::with_uniform_bias(13, 0.05);
        let (off, _) = generate_stream(&g, &AnnealerConfig::new(1, false), &noise, 493).unwrap();
        let (on, _) = generate_stream(&g, &AnnealerConfig::new(1, true), &noise, 493).unwrap();
        assert!((ones(&off) - 0.55).abs() < 0.0015);
        assert!((ones(&on) - 0.5005).abs() < 0.0015);
    }

    #[test]
    fn drift_follows_sine() {
        let g = fixture();
        let noise = NoiseModel {
            drift_amplitude: 0.2,
            drift_period_anneals: 400.0,
            qubit_bias: QubitBias::Uniform(0.0),
            rng_seed: 2,
            ..NoiseModel::default()
        };
        let (seq, _) = generate_stream(&g, &AnnealerConfig::default(), &noise, 400).unwrap();
        let n = g.active_count();
        let at = |t: usize| seq.count_ones_range(t * n, (t + 1) * n) as f64 / n as f64;
        let peak: f64 = (95..105).map(at).sum::<f64>() / 10.0;
        let trough: f64 = (295..305).map(at).sum::<f64>() / 10.0;
        assert!((peak - 0.7).abs() < 0.02, "{peak}");
        assert!((trough - 0.3).abs() < 0.02, "{trough}");
    }
}
