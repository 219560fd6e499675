use rand::Rng;
use rand_distr::StandardNormal;

use super::ThConfig;
use crate::grid;
use crate::jamming::JammerSpec;

/// The three additive parts of `r(t) = α s(t − τ) + j(t) + n(t)`, each of length `τ/dt + tx.len()`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelComponents {
    pub signal: Vec<f64>,
    pub jammer: Vec<f64>,
    pub noise: Vec<f64>,
}

impl ChannelComponents {
    pub fn combined(&self) -> Vec<f64> {
        self.signal
            .iter()
            .zip(&self.jammer)
            .zip(&self.noise)
            .map(|((s, j), n)| s + j + n)
            .collect()
    }
}

pub fn channel_components<R: Rng + ?Sized>(
    tx: &[f64],
    cfg: &ThConfig,
    tau: f64,
    jammer: &JammerSpec,
    noise_sigma: f64,
    rng: &mut R,
) -> ChannelComponents {
    let shift = grid::snap(tau, cfg.dt);
    let len = shift + tx.len();
    let mut signal = vec![0.0; len];
    signal[shift..].iter_mut().zip(tx).for_each(|(y, x)| *y = cfg.alpha * x);
    let jammer = (0..len).map(|k| jammer.at(k as f64 * cfg.dt)).collect();
    let noise = if noise_sigma > 0.0 {
        (0..len).map(|_| noise_sigma * rng.sample::<f64, _>(StandardNormal)).collect()
    } else {
        vec![0.0; len]
    };
    ChannelComponents { signal, jammer, noise }
}

/// Received samples `r[k]` at absolute time `k·dt`.
pub fn apply_channel<R: Rng + ?Sized>(
    tx: &[f64],
    cfg: &ThConfig,
    tau: f64,
    jammer: &JammerSpec,
    noise_sigma: f64,
    rng: &mut R,
) -> Vec<f64> {
    let shift = grid::snap(tau, cfg.dt);
    let len = shift + tx.len();
    let mut out: Vec<f64> = (0..len).map(|k| jammer.at(k as f64 * cfg.dt)).collect();
    out[shift..].iter_mut().zip(tx).for_each(|(y, x)| *y += cfg.alpha * x);
    if noise_sigma > 0.0 {
        out.iter_mut().for_each(|y| *y += noise_sigma * rng.sample::<f64, _>(StandardNormal));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::{calibrate_powers, SimConfig};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    #[test]
    fn identity_channel() {
        let cfg = ThConfig::default();
        let tx: Vec<f64> = (0..200).map(|k| (k as f64 * 0.1).sin()).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(apply_channel(&tx, &cfg, 0.0, &JammerSpec::disabled(), 0.0, &mut rng), tx);
    }

    #[test]
    fn jammer_only() {
        let cfg = ThConfig::default();
        let jam = JammerSpec::new(1.7e9, 0.3, 0.8).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let rx = apply_channel(&[0.0; 300], &cfg, 0.0, &jam, 0.0, &mut rng);
        for (k, &y) in rx.iter().enumerate() {
            let want = (1.6f64).sqrt() * (2.0 * PI * 1.7e9 * k as f64 * cfg.dt + 0.3).cos();
            assert!((y - want).abs() < 1e-12);
        }
    }

    #[test]
    fn delay_and_gain() {
        let cfg = ThConfig { alpha: 0.5, ..ThConfig::default() };
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let rx = apply_channel(&[1.0, 2.0], &cfg, 3.0 * cfg.dt, &JammerSpec::disabled(), 0.0, &mut rng);
        assert_eq!(rx, vec![0.0, 0.0, 0.0, 0.5, 1.0]);
    }

    #[test]
    fn calibrated_noise_variance() {
        let sim = SimConfig { ebn0_db: 15.0, ..SimConfig::default() };
        let sigma = calibrate_powers(&sim).noise_sigma;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 1_000_000;
        let rx = apply_channel(&vec![0.0; n], &sim.th, 0.0, &JammerSpec::disabled(), sigma, &mut rng);
        let var = rx.iter().map(|x| x * x).sum::<f64>() / n as f64;
        assert!((var / (sigma * sigma) - 1.0).abs() < 0.02);
    }

    #[test]
    fn components_sum_to_combined_channel() {
        let cfg = ThConfig::default();
        let jam = JammerSpec::new(2.2e9, 1.1, 3.0).unwrap();
        let tx: Vec<f64> = (0..120).map(|k| (k as f64).cos()).collect();
        let parts = channel_components(&tx, &cfg, 7.0 * cfg.dt, &jam, 0.4, &mut ChaCha8Rng::seed_from_u64(8));
        let direct = apply_channel(&tx, &cfg, 7.0 * cfg.dt, &jam, 0.4, &mut ChaCha8Rng::seed_from_u64(8));
        for (a, b) in parts.combined().iter().zip(&direct) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
