//! Scene scripts: the JSON input of the simulator.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::imaging::{Band, BandLayout, OrbitSpec, SensorSpec};
use crate::sim::rowtime::OverlapPolicy;
use crate::Vec2;

/// A per-band quantity: one number for all bands, or eight in spectral
/// order (CB, B, G1, G2, Y, R, RE, NIR).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BandValues {
    Uniform(f64),
    PerBand([f64; 8]),
}

impl BandValues {
    pub fn get(&self, band: Band) -> f64 {
        match self {
            BandValues::Uniform(v) => *v,
            BandValues::PerBand(v) => v[band.index()],
        }
    }

    fn all(&self) -> impl Iterator<Item = f64> + '_ {
        Band::ALL.iter().map(move |&b| self.get(b))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Background {
    Constant {
        level_dn: BandValues,
    },
    /// `mean_dn * (1 + contrast * noise)`, with one noise field shared by all
    /// bands.
    Texture {
        mean_dn: BandValues,
        contrast: f64,
        feature_size_m: f64,
    },
}

impl Default for Background {
    fn default() -> Self {
        Background::Texture {
            mean_dn: BandValues::PerBand([900.0, 1000.0, 1100.0, 1150.0, 1200.0, 1250.0, 1400.0, 2200.0]),
            contrast: 0.25,
            feature_size_m: 120.0,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Shape {
    #[default]
    Rectangle,
    Ellipse,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectScript {
    #[serde(default)]
    pub shape: Shape,
    pub length_m: f64,
    pub width_m: f64,
    /// Orientation of the long axis, degrees counter-clockwise from +x.
    /// Defaults to the direction of motion.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub orientation_deg: Option<f64>,
    pub reflectance_dn: BandValues,
    /// Ground position at t = 0.
    pub position_m: Vec2,
    /// Ground-projected velocity.
    #[serde(default = "Vec2::zeros")]
    pub velocity_mps: Vec2,
    #[serde(default)]
    pub altitude_m: f64,
}

impl ObjectScript {
    pub fn orientation_rad(&self) -> f64 {
        match self.orientation_deg {
            Some(deg) => deg.to_radians(),
            None if self.velocity_mps.norm() > 0.0 => self.velocity_mps.y.atan2(self.velocity_mps.x),
            None => 0.0,
        }
    }
}

fn default_scene_id() -> String {
    "simulated".to_string()
}

fn default_grid() -> f64 {
    3.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneScript {
    #[serde(default = "default_scene_id")]
    pub scene_id: String,
    pub width_px: usize,
    pub height_px: usize,
    #[serde(default = "default_grid")]
    pub grid_spacing_m: f64,
    #[serde(default)]
    pub sensor: SensorSpec,
    #[serde(default)]
    pub orbit: OrbitSpec,
    #[serde(default)]
    pub layout: BandLayout,
    #[serde(default)]
    pub overlap_policy: OverlapPolicy,
    #[serde(default)]
    pub strip_phase_m: f64,
    #[serde(default)]
    pub background: Background,
    #[serde(default)]
    pub noise_sigma_dn: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub objects: Vec<ObjectScript>,
}

impl SceneScript {
    pub fn new(width_px: usize, height_px: usize, grid_spacing_m: f64) -> Self {
        Self {
            scene_id: default_scene_id(),
            width_px,
            height_px,
            grid_spacing_m,
            sensor: SensorSpec::default(),
            orbit: OrbitSpec::default(),
            layout: BandLayout::default(),
            overlap_policy: OverlapPolicy::default(),
            strip_phase_m: 0.0,
            background: Background::default(),
            noise_sigma_dn: 0.0,
            seed: 0,
            objects: Vec::new(),
        }
    }

    pub fn from_json_str(s: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let script = Self::from_json_str(&text).map_err(|source| Error::Json { path: path.into(), source })?;
        script.validate()?;
        Ok(script)
    }

    pub fn validate(&self) -> Result<()> {
        if self.width_px == 0 || self.height_px == 0 {
            return Err(Error::invalid("scene dimensions must be positive"));
        }
        if !(self.grid_spacing_m.is_finite() && self.grid_spacing_m > 0.0) {
            return Err(Error::invalid("grid spacing must be positive"));
        }
        self.sensor.validate()?;
        self.orbit.validate()?;
        if !self.layout.is_complete() {
            return Err(Error::IncompleteLayout { found: self.layout.len() });
        }
        if self.sensor.n_strips as usize != self.layout.len() {
            return Err(Error::invalid(format!(
                "sensor has {} strips but the layout lists {} bands",
                self.sensor.n_strips,
                self.layout.len()
            )));
        }
        if !(self.noise_sigma_dn.is_finite() && self.noise_sigma_dn >= 0.0) {
            return Err(Error::invalid("noise sigma must be non-negative"));
        }
        match &self.background {
            Background::Constant { level_dn } => {
                if level_dn.all().any(|v| !(v.is_finite() && v >= 0.0)) {
                    return Err(Error::invalid("background levels must be non-negative"));
                }
            }
            Background::Texture { mean_dn, contrast, feature_size_m } => {
                if mean_dn.all().any(|v| !(v.is_finite() && v >= 0.0)) {
                    return Err(Error::invalid("background means must be non-negative"));
                }
                if !(contrast.is_finite() && *contrast >= 0.0 && *contrast < 1.0) {
                    return Err(Error::invalid("texture contrast must be in [0, 1)"));
                }
                if !(feature_size_m.is_finite() && *feature_size_m > 0.0) {
                    return Err(Error::invalid("texture feature size must be positive"));
                }
            }
        }
        let h_sat = self.orbit.satellite_altitude_m()?;
        let extent = Vec2::new(
            (self.width_px - 1) as f64 * self.grid_spacing_m,
            (self.height_px - 1) as f64 * self.grid_spacing_m,
        );
        for (i, o) in self.objects.iter().enumerate() {
            let ctx = |msg: &str| Error::invalid(format!("object {i}: {msg}"));
            if !(o.length_m > 0.0 && o.width_m > 0.0 && o.length_m.is_finite() && o.width_m.is_finite()) {
                return Err(ctx("size must be positive"));
            }
            if o.reflectance_dn.all().any(|v| !(v.is_finite() && v >= 0.0)) {
                return Err(ctx("reflectance must be non-negative"));
            }
            if !(o.altitude_m.is_finite() && o.altitude_m >= 0.0 && o.altitude_m < h_sat) {
                return Err(ctx("altitude must be in [0, satellite altitude)"));
            }
            if !o.velocity_mps.iter().all(|v| v.is_finite()) {
                return Err(ctx("velocity must be finite"));
            }
            let p = o.position_m;
            if !(p.x >= 0.0 && p.y >= 0.0 && p.x <= extent.x && p.y <= extent.y) {
                return Err(ctx("initial position lies outside the scene"));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_json_uses_defaults() {
        let s = SceneScript::from_json_str(
            r#"{"width_px": 64, "height_px": 64,
                "objects": [{"length_m": 20, "width_m": 8, "reflectance_dn": 5000,
                             "position_m": [90, 90], "velocity_mps": [38.5, 0]}]}"#,
        )
        .unwrap();
        s.validate().unwrap();
        assert_eq!(s.grid_spacing_m, 3.0);
        assert_eq!(s.sensor, SensorSpec::default());
        assert_eq!(s.objects[0].reflectance_dn.get(Band::RedEdge), 5000.0);
        assert_eq!(s.objects[0].altitude_m, 0.0);
    }

    #[test]
    fn schema_errors_carry_line_info() {
        let err = SceneScript::from_json_str("{\n  \"width_px\": 64,\n  \"height_px\": \"tall\"\n}").unwrap_err();
        assert_eq!(err.line(), 3);
    }

    #[test]
    fn objects_must_start_inside() {
        let mut s = SceneScript::new(32, 32, 3.0);
        s.objects.push(ObjectScript {
            shape: Shape::Rectangle,
            length_m: 6.0,
            width_m: 3.0,
            orientation_deg: None,
            reflectance_dn: BandValues::Uniform(4000.0),
            position_m: Vec2::new(200.0, 10.0),
            velocity_mps: Vec2::zeros(),
            altitude_m: 0.0,
        });
        assert!(s.validate().is_err());
        s.objects[0].position_m = Vec2::new(20.0, 10.0);
        s.validate().unwrap();
        s.objects[0].altitude_m = 600_000.0;
        assert!(s.validate().is_err());
    }
}
