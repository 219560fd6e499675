//! TOML run configuration. Surface units are ns and GHz; everything is
//! converted to SI before it reaches the core crate.

use std::path::Path;

use ajwave_core::grid::{ghz, ns};
use ajwave_core::harness::ClipperConfig;
use ajwave_core::{FhatSource, FreqEstimatorModel, JammerSpec, SimConfig, ThConfig, WaveformMode};
use anyhow::{bail, Context, Result};
use serde::Deserialize;


#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Th {
    pub tc_ns: f64,
    pub tf_ns: f64,
    pub nf: usize,
    pub nc: usize,
    pub delta_ns: f64,
    pub tp_ns: f64,
    pub dt_ns: f64,
    pub alpha: f64,
}

impl Default for Th {
    fn default() -> Self {
        Self { tc_ns: 1.0, tf_ns: 4.0, nf: 3, nc: 4, delta_ns: 0.5, tp_ns: 0.5, dt_ns: 0.02, alpha: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Jammer {
    pub fj_ghz: f64,
    pub theta_rad: f64,
    /// `inf` disables the jammer.
    pub sjr_db: f64,
}

impl Default for Jammer {
    fn default() -> Self {
        Self { fj_ghz: 1.5, theta_rad: 0.0, sjr_db: -10.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Link {
    /// `inf` gives a noiseless channel.
    pub ebn0_db: f64,
}

impl Default for Link {
    fn default() -> Self {
        Self { ebn0_db: 15.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Optimized,
    Doublet,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WaveformSection {
    pub mode: Mode,
    pub n: usize,
}

impl Default for WaveformSection {
    fn default() -> Self {
        Self { mode: Mode::Optimized, n: 5 }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Clipper {
    pub enabled: bool,
    pub k: f64,
}

impl Default for Clipper {
    fn default() -> Self {
        Self { enabled: false, k: 1.2 }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Estimator {
    pub mu_ghz: f64,
    pub sigma_ghz: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Mc {
    pub n_bits: u64,
    pub seed: u64,
}

impl Default for Mc {
    fn default() -> Self {
        Self { n_bits: 200_000, seed: 0 }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CliConfig {
    pub th: Th,
    pub jammer: Jammer,
    pub link: Link,
    pub waveform: WaveformSection,
    pub clipper: Clipper,
    pub estimator: Estimator,
    pub mc: Mc,
}

impl CliConfig {
    pub fn parse(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("parsing {}", path.display()))
    }

    pub fn to_sim(&self) -> Result<SimConfig> {
        let th = &self.th;
        let cfg = SimConfig {
            th: ThConfig {
                tc: ns(th.tc_ns),
                tf: ns(th.tf_ns),
                nf: th.nf,
                nc: th.nc,
                delta: ns(th.delta_ns),
                tp: ns(th.tp_ns),
                dt: ns(th.dt_ns),
                alpha: th.alpha,
            },
            jammer: JammerSpec { fj: ghz(self.jammer.fj_ghz), theta: self.jammer.theta_rad, power: 0.0, enabled: true },
            ebn0_db: self.link.ebn0_db,
            sjr_db: self.jammer.sjr_db,
            waveform_mode: match self.waveform.mode {
                Mode::Optimized => WaveformMode::Optimized(FhatSource::Estimated),
                Mode::Doublet => WaveformMode::GaussianDoublet,
            },
            n_segments: self.waveform.n,
            clipper: ClipperConfig { enabled: self.clipper.enabled, k: self.clipper.k },
            estimator: FreqEstimatorModel::new(ghz(self.estimator.mu_ghz), ghz(self.estimator.sigma_ghz))?,
            random_theta: false,
            n_bits: self.mc.n_bits,
            seed: self.mc.seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Comma list (`1.5,3,6.6`) or inclusive range (`start:stop:step`).
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let spec = spec.trim();
    if spec.is_empty() {
        bail!("empty grid");
    }
    let num = |s: &str| -> Result<f64> {
        let v: f64 = s.trim().parse().with_context(|| format!("`{s}` is not a number"))?;
        if !v.is_finite() {
            bail!("grid values must be finite");
        }
        Ok(v)
    };
    let parts: Vec<&str> = spec.split(':').collect();
    match parts.as_slice() {
        [single] => single.split(',').map(num).collect(),
        [start, stop, step] => {
            let (start, stop, step) = (num(start)?, num(stop)?, num(step)?);
            if step <= 0.0 || stop < start {
                bail!("range needs start <= stop and step > 0");
            }
            let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
            // rounding keeps e.g. 0.3·3 printing as 0.9
            Ok((0..count).map(|i| ((start + i as f64 * step) * 1e12).round() / 1e12).collect())
        }
        _ => bail!("grid must be `a,b,c` or `start:stop:step`"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_reproduce_reference_setup() {
        let sim = CliConfig::parse("").unwrap().to_sim().unwrap();
        let d = ThConfig::default();
        let th = sim.th;
        for (a, b) in [(th.tc, d.tc), (th.tf, d.tf), (th.delta, d.delta), (th.tp, d.tp), (th.dt, d.dt)] {
            assert!((a - b).abs() <= 1e-12 * b, "{a:e} vs {b:e}");
        }
        assert_eq!((th.nf, th.nc, th.alpha), (d.nf, d.nc, d.alpha));
        assert_eq!(sim.clipper.k, 1.2);
        assert_eq!(sim.n_segments, 5);
        assert_eq!(sim.jammer.fj, 1.5e9);
    }

    #[test]
    fn dotted_keys() {
        let text = r#"
            th.tc_ns = 1
            th.dt_ns = 0.02
            jammer.fj_ghz = 3.0
            jammer.sjr_db = -30
            link.ebn0_db = inf
            waveform.mode = "doublet"
            waveform.n = 5
            clipper.enabled = true
            clipper.k = 1.5
            estimator.mu_ghz = 0.2
            estimator.sigma_ghz = 0.3
            mc.n_bits = 1000
            mc.seed = 42
        "#;
        let sim = CliConfig::parse(text).unwrap().to_sim().unwrap();
        assert_eq!(sim.jammer.fj, 3e9);
        assert_eq!(sim.sjr_db, -30.0);
        assert!(sim.ebn0_db.is_infinite());
        assert_eq!(sim.waveform_mode, WaveformMode::GaussianDoublet);
        assert!(sim.clipper.enabled && sim.clipper.k == 1.5);
        assert!((sim.estimator.sigma - 0.3e9).abs() < 1e-3);
        assert_eq!((sim.n_bits, sim.seed), (1000, 42));
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(CliConfig::parse("th.tc = 1").is_err());
        assert!(CliConfig::parse("[radio]\nx = 1").is_err());
        assert!(CliConfig::parse("waveform.mode = \"square\"").is_err());
    }

    #[test]
    fn invalid_timing_rejected() {
        let cfg = CliConfig::parse("th.dt_ns = 0.03").unwrap();
        assert!(cfg.to_sim().is_err());
    }

    #[test]
    fn grids() {
        assert_eq!(parse_grid("1.5,3.0,6.6").unwrap(), vec![1.5, 3.0, 6.6]);
        assert_eq!(parse_grid("0:0.9:0.3").unwrap(), vec![0.0, 0.3, 0.6, 0.9]);
        assert_eq!(parse_grid("-30:-20:5").unwrap(), vec![-30.0, -25.0, -20.0]);
        assert_eq!(parse_grid("0.3:9:0.3").unwrap().len(), 30);
        assert!(parse_grid("").is_err());
        assert!(parse_grid("1:0:1").is_err());
        assert!(parse_grid("1:2").is_err());
        assert!(parse_grid("a,b").is_err());
    }
}
