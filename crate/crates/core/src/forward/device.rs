use serde::{Deserialize, Serialize};

use super::bessel::BesselOrder;
use crate::error::{FdemError, Result};
use crate::scalar::{lit, Real};

/// Instrument configuration: inter-coil distances, heights and angular
/// frequencies. Both coil orientations are always recorded.
///
/// Readings are ordered orientation first (vertical, then horizontal), then
/// coil distance, height and frequency, with frequency varying fastest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviceConfig<T> {
    rho: Vec<T>,
    heights: Vec<T>,
    omegas: Vec<T>,
}

/// One instrument setting, i.e. one complex reading.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Setting<T> {
    pub orientation: BesselOrder,
    pub rho: T,
    pub height: T,
    pub omega: T,
}

impl<T: Real> DeviceConfig<T> {
    pub fn new(rho: Vec<T>, heights: Vec<T>, omegas: Vec<T>) -> Result<Self> {
        for (name, v) in [("rho", &rho), ("heights", &heights), ("omegas", &omegas)] {
            if v.is_empty() {
                return Err(FdemError::InvalidDevice(format!("{name} is empty")));
            }
            if v.iter().any(|x| !(*x > T::zero()) || !x.finite()) {
                return Err(FdemError::InvalidDevice(format!("{name} must be strictly positive")));
            }
        }
        Ok(DeviceConfig { rho, heights, omegas })
    }

    /// Builds a configuration from frequencies in hertz.
    pub fn from_frequencies(rho: Vec<T>, heights: Vec<T>, freqs_hz: &[T]) -> Result<Self> {
        let two_pi = T::two_pi();
        Self::new(rho, heights, freqs_hz.iter().map(|f| *f * two_pi).collect())
    }

    pub fn rho(&self) -> &[T] {
        &self.rho
    }

    pub fn heights(&self) -> &[T] {
        &self.heights
    }

    pub fn omegas(&self) -> &[T] {
        &self.omegas
    }

    /// Number of complex readings, `2 * m_rho * m_h * m_omega`.
    pub fn n_readings(&self) -> usize {
        2 * self.rho.len() * self.heights.len() * self.omegas.len()
    }

    /// Position of reading `(nu, t, l, s)` (all zero-based).
    pub fn reading_index(&self, nu: usize, t: usize, l: usize, s: usize) -> usize {
        let (mr, mh, mw) = (self.rho.len(), self.heights.len(), self.omegas.len());
        debug_assert!(nu < 2 && t < mr && l < mh && s < mw);
        ((nu * mr + t) * mh + l) * mw + s
    }

    pub fn setting(&self, index: usize) -> Setting<T> {
        let (mr, mh, mw) = (self.rho.len(), self.heights.len(), self.omegas.len());
        let s = index % mw;
        let l = (index / mw) % mh;
        let t = (index / (mw * mh)) % mr;
        let nu = index / (mw * mh * mr);
        Setting {
            orientation: BesselOrder::from_index(nu).expect("reading index out of range"),
            rho: self.rho[t],
            height: self.heights[l],
            omega: self.omegas[s],
        }
    }

    pub fn settings(&self) -> impl Iterator<Item = Setting<T>> + '_ {
        (0..self.n_readings()).map(move |i| self.setting(i))
    }
}

/// Named instrument presets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DevicePreset {
    /// Geophex GEM-2: one coil distance, six frequencies.
    #[serde(rename = "gem2")]
    Gem2,
    /// GF Instruments CMD Explorer: three coil distances at 10 kHz.
    CmdExplorer,
}

impl DevicePreset {
    pub const ALL: [DevicePreset; 2] = [DevicePreset::Gem2, DevicePreset::CmdExplorer];

    pub fn name(self) -> &'static str {
        match self {
            DevicePreset::Gem2 => "gem2",
            DevicePreset::CmdExplorer => "cmd-explorer",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.name() == name)
    }

    pub fn rho_m(self) -> &'static [f64] {
        match self {
            DevicePreset::Gem2 => &[1.66],
            DevicePreset::CmdExplorer => &[1.48, 2.82, 4.49],
        }
    }

    pub fn frequencies_hz(self) -> &'static [f64] {
        match self {
            DevicePreset::Gem2 => &[775.0, 1175.0, 3925.0, 9825.0, 21725.0, 47025.0],
            DevicePreset::CmdExplorer => &[10_000.0],
        }
    }

    /// The preset operated at the given heights above ground.
    pub fn config<T: Real>(self, heights: &[T]) -> Result<DeviceConfig<T>> {
        let freqs: Vec<T> = self.frequencies_hz().iter().map(|f| lit(*f)).collect();
        DeviceConfig::from_frequencies(self.rho_m().iter().map(|r| lit(*r)).collect(), heights.to_vec(), &freqs)
    }
}

impl std::fmt::Display for DevicePreset {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for DevicePreset {
    type Err = FdemError;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s).ok_or_else(|| FdemError::InvalidDevice(format!("unknown preset {s:?}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reading_count_and_order() {
        let dev = DevicePreset::CmdExplorer.config(&[0.9, 1.0]).unwrap();
        assert_eq!(dev.n_readings(), 2 * 3 * 2);
        for (i, s) in dev.settings().enumerate() {
            let nu = s.orientation.index();
            let t = dev.rho().iter().position(|r| *r == s.rho).unwrap();
            let l = dev.heights().iter().position(|h| *h == s.height).unwrap();
            assert_eq!(dev.reading_index(nu, t, l, 0), i);
        }
        assert_eq!(dev.setting(0).orientation, BesselOrder::J0);
        assert_eq!(dev.setting(6).orientation, BesselOrder::J1);
    }

    #[test]
    fn gem2_frequencies_vary_fastest() {
        let dev = DevicePreset::Gem2.config(&[1.0]).unwrap();
        assert_eq!(dev.n_readings(), 12);
        let w: Vec<f64> = dev.settings().take(6).map(|s| s.omega).collect();
        assert!(w.windows(2).all(|p| p[0] < p[1]));
        assert!((w[0] - 2.0 * std::f64::consts::PI * 775.0).abs() < 1e-9);
    }

    #[test]
    fn rejects_nonpositive_entries() {
        assert!(DeviceConfig::new(vec![1.0], vec![0.0], vec![1.0]).is_err());
        assert!(DeviceConfig::<f64>::new(vec![], vec![1.0], vec![1.0]).is_err());
        assert!("nope".parse::<DevicePreset>().is_err());
        assert_eq!("cmd-explorer".parse::<DevicePreset>().unwrap(), DevicePreset::CmdExplorer);
    }
}
