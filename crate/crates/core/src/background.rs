//! Background photon budget from sky brightness and receiver geometry.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::photon_stats::Rate;

pub const PLANCK: f64 = 6.626_070_15e-34;
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SkyScene {
    /// W·m⁻²·sr⁻¹·µm⁻¹.
    pub brightness: f64,
    /// Radians.
    pub fov_half_angle: f64,
    /// m².
    pub aperture_area: f64,
    /// µm.
    pub filter_bandwidth: f64,
    /// m.
    pub wavelength: f64,
    /// Seconds. Zero is accepted and yields no background.
    pub gate_time: f64,
}

impl SkyScene {
    pub fn new(
        brightness: f64,
        fov_half_angle: f64,
        aperture_area: f64,
        filter_bandwidth: f64,
        wavelength: f64,
        gate_time: f64,
    ) -> Result<Self> {
        let scene = SkyScene { brightness, fov_half_angle, aperture_area, filter_bandwidth, wavelength, gate_time };
        scene.validate()?;
        Ok(scene)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("brightness", self.brightness),
            ("fov_half_angle", self.fov_half_angle),
            ("aperture_area", self.aperture_area),
            ("filter_bandwidth", self.filter_bandwidth),
            ("wavelength", self.wavelength),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::domain(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.gate_time >= 0.0 && self.gate_time.is_finite()) {
            return Err(Error::domain(format!("gate_time must be non-negative, got {}", self.gate_time)));
        }
        Ok(())
    }

    /// Solid angle of the field of view, small-angle form `π θ²`.
    pub fn solid_angle(&self) -> f64 {
        std::f64::consts::PI * self.fov_half_angle * self.fov_half_angle
    }

    pub fn photon_energy(&self) -> f64 {
        PLANCK * SPEED_OF_LIGHT / self.wavelength
    }

    pub fn with_brightness(self, brightness: f64) -> Self {
        SkyScene { brightness, ..self }
    }
}

/// `P_b = H_b Ω A B`, in watts.
pub fn background_power(scene: &SkyScene) -> Result<f64> {
    scene.validate()?;
    Ok(scene.brightness * scene.solid_angle() * scene.aperture_area * scene.filter_bandwidth)
}

/// Mean background photons collected within one gate.
pub fn photons_per_pulse(scene: &SkyScene) -> Result<Rate> {
    let p = background_power(scene)?;
    Rate::new(p * scene.gate_time / scene.photon_energy())
}

const STANDARD_HALF_ANGLE: f64 = 100e-6;
const STANDARD_FILTER_UM: f64 = 0.2e-3;
const STANDARD_WAVELENGTH: f64 = 850e-9;
const STANDARD_GATE: f64 = 3e-9;
const CLOUDY_BRIGHTNESS: f64 = 150.0;
const CLOUDY_PHOTONS: f64 = 7.4;

/// Receiver aperture that makes the cloudy-daytime scene give 7.4 photons
/// per gate. Inferred, not a measured value (about 0.61 m²).
pub fn standard_aperture() -> f64 {
    let energy = PLANCK * SPEED_OF_LIGHT / STANDARD_WAVELENGTH;
    let omega = std::f64::consts::PI * STANDARD_HALF_ANGLE * STANDARD_HALF_ANGLE;
    CLOUDY_PHOTONS * energy / (STANDARD_GATE * CLOUDY_BRIGHTNESS * omega * STANDARD_FILTER_UM)
}

/// Cloudy-daytime scene with the inferred aperture.
pub fn standard_scene() -> SkyScene {
    SkyScene::new(
        CLOUDY_BRIGHTNESS,
        STANDARD_HALF_ANGLE,
        standard_aperture(),
        STANDARD_FILTER_UM,
        STANDARD_WAVELENGTH,
        STANDARD_GATE,
    )
    .expect("valid preset")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkyCondition {
    pub name: &'static str,
    pub relative_brightness: f64,
    pub brightness: f64,
}

pub const STANDARD_CONDITIONS: [SkyCondition; 6] = [
    SkyCondition { name: "cloudy-daytime", relative_brightness: 1.0, brightness: 150.0 },
    SkyCondition { name: "hazy-daytime", relative_brightness: 1e-1, brightness: 15.0 },
    SkyCondition { name: "clear-daytime", relative_brightness: 1e-2, brightness: 1.5 },
    SkyCondition { name: "full-moon-clear-night", relative_brightness: 1e-5, brightness: 1.5e-3 },
    SkyCondition { name: "new-moon-clear-night", relative_brightness: 1e-6, brightness: 1.5e-4 },
    SkyCondition { name: "moonless-clear-night", relative_brightness: 1e-7, brightness: 1.5e-5 },
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BackgroundRow {
    pub condition: &'static str,
    pub relative_brightness: f64,
    pub brightness: f64,
    pub power_w: f64,
    pub photons_per_pulse: f64,
}

/// The six sky conditions evaluated on `base` (brightness replaced per row).
pub fn background_table(base: &SkyScene) -> Result<Vec<BackgroundRow>> {
    STANDARD_CONDITIONS
        .iter()
        .map(|c| {
            let scene = base.with_brightness(c.brightness);
            Ok(BackgroundRow {
                condition: c.name,
                relative_brightness: c.relative_brightness,
                brightness: c.brightness,
                power_w: background_power(&scene)?,
                photons_per_pulse: photons_per_pulse(&scene)?.value(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn aperture_and_cloudy_row() {
        assert_relative_eq!(standard_aperture(), 0.611_7, max_relative = 1e-3);
        let s = standard_scene();
        assert_relative_eq!(photons_per_pulse(&s).unwrap().value(), 7.4, max_relative = 1e-12);
        let p = background_power(&s).unwrap();
        assert_relative_eq!(p, 7.4 * s.photon_energy() / s.gate_time, max_relative = 1e-12);
    }

    #[test]
    fn table_rows_scale_with_brightness() {
        let rows = background_table(&standard_scene()).unwrap();
        let expected = [7.4, 0.74, 0.074, 7.4e-5, 7.4e-6, 7.4e-7];
        for (r, e) in rows.iter().zip(expected) {
            assert_relative_eq!(r.photons_per_pulse, e, max_relative = 1e-9);
            assert_relative_eq!(r.photons_per_pulse / rows[0].photons_per_pulse, r.relative_brightness, max_relative = 1e-9);
        }
        assert_relative_eq!(rows[0].power_w / rows[1].power_w, 10.0, max_relative = 1e-12);
    }

    #[test]
    fn zero_gate_and_invalid_fields() {
        let s = SkyScene { gate_time: 0.0, ..standard_scene() };
        assert_eq!(photons_per_pulse(&s).unwrap().value(), 0.0);
        assert!(SkyScene::new(-1.0, 1e-4, 1.0, 1e-4, 8.5e-7, 1e-9).is_err());
        assert!(SkyScene::new(1.0, 1e-4, 0.0, 1e-4, 8.5e-7, 1e-9).is_err());
    }

    #[test]
    fn small_angle_solid_angle_is_close_to_cap() {
        let s = standard_scene();
        let cap = 2.0 * std::f64::consts::PI * (1.0 - s.fov_half_angle.cos());
        assert_relative_eq!(s.solid_angle(), cap, max_relative = 1e-8);
    }
}
