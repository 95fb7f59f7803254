//! Sensor and orbit geometry, and the inter-band acquisition timing derived
//! from them.
//!
//! The camera carries one filter strip per spectral band, stacked along the
//! direction of flight. Every exposure images each strip onto a different
//! patch of ground, so a given ground point is seen by successive strips one
//! strip-crossing time apart. Under a circular orbit over a spherical Earth
//! that time depends only on the strip's ground extent and the ground-track
//! speed derived from the mean motion.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const SECONDS_PER_DAY: f64 = 86_400.0;
/// Standard gravitational parameter of the Earth, m^3/s^2.
const GM_EARTH: f64 = 3.986_004_418e14;

/// The eight spectral bands of the sensor, listed in spectral order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Band {
    #[serde(rename = "CB")]
    CoastalBlue,
    #[serde(rename = "B")]
    Blue,
    #[serde(rename = "G1")]
    GreenI,
    #[serde(rename = "G2")]
    GreenII,
    #[serde(rename = "Y")]
    Yellow,
    #[serde(rename = "R")]
    Red,
    #[serde(rename = "RE")]
    RedEdge,
    #[serde(rename = "NIR")]
    NearInfrared,
}

impl Band {
    pub const ALL: [Band; 8] = [
        Band::CoastalBlue,
        Band::Blue,
        Band::GreenI,
        Band::GreenII,
        Band::Yellow,
        Band::Red,
        Band::RedEdge,
        Band::NearInfrared,
    ];

    pub fn short_name(self) -> &'static str {
        match self {
            Band::CoastalBlue => "CB",
            Band::Blue => "B",
            Band::GreenI => "G1",
            Band::GreenII => "G2",
            Band::Yellow => "Y",
            Band::Red => "R",
            Band::RedEdge => "RE",
            Band::NearInfrared => "NIR",
        }
    }

    /// Index in spectral order (0 = CB .. 7 = NIR).
    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Band {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

impl FromStr for Band {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Band::ALL
            .into_iter()
            .find(|b| b.short_name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::UnknownBand(s.to_string()))
    }
}

/// Camera geometry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SensorSpec {
    pub pixels_x: u32,
    pub pixels_y: u32,
    /// Along-track width of one filter strip, in sensor pixels.
    pub strip_width_px: u32,
    pub n_strips: u32,
    pub pixel_pitch_um: f64,
    /// Time between successive exposures.
    pub frame_interval_s: f64,
    /// Native ground sample distance. Resampled rasters carry their own grid
    /// spacing; timing always uses this value.
    pub gsd_m: f64,
}

impl Default for SensorSpec {
    fn default() -> Self {
        Self {
            pixels_x: 8880,
            pixels_y: 5304,
            strip_width_px: 663,
            n_strips: 8,
            pixel_pitch_um: 5.5,
            frame_interval_s: 0.17,
            gsd_m: 4.2,
        }
    }
}

impl SensorSpec {
    pub fn validate(&self) -> Result<()> {
        if self.strip_width_px == 0 || self.n_strips == 0 {
            return Err(Error::invalid("strip width and strip count must be positive"));
        }
        if u64::from(self.n_strips) * u64::from(self.strip_width_px) > u64::from(self.pixels_y) {
            return Err(Error::invalid(format!(
                "{} strips of {} px do not fit on a {} px sensor",
                self.n_strips, self.strip_width_px, self.pixels_y
            )));
        }
        if !(self.frame_interval_s.is_finite() && self.frame_interval_s > 0.0) {
            return Err(Error::invalid("frame interval must be positive"));
        }
        if !(self.gsd_m.is_finite() && self.gsd_m > 0.0) {
            return Err(Error::invalid("gsd must be positive"));
        }
        Ok(())
    }
}

/// Orbital parameters under the circular-orbit, spherical-Earth model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OrbitSpec {
    pub mean_motion_rev_per_day: f64,
    pub earth_radius_km: f64,
    /// Fractional uncertainty of the derived acquisition delays.
    pub time_fractional_error: f64,
    /// Orbital altitude. When absent it is derived from the mean motion.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub altitude_km: Option<f64>,
}

impl Default for OrbitSpec {
    fn default() -> Self {
        Self {
            mean_motion_rev_per_day: 15.15,
            earth_radius_km: 6378.0,
            time_fractional_error: 0.002,
            altitude_km: None,
        }
    }
}

impl OrbitSpec {
    pub fn with_mean_motion(mean_motion_rev_per_day: f64) -> Self {
        Self {
            mean_motion_rev_per_day,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mean_motion_rev_per_day.is_finite() && self.mean_motion_rev_per_day > 0.0) {
            return Err(Error::invalid("mean motion must be positive"));
        }
        if !(self.earth_radius_km.is_finite() && self.earth_radius_km > 0.0) {
            return Err(Error::invalid("earth radius must be positive"));
        }
        if !(self.time_fractional_error.is_finite() && self.time_fractional_error >= 0.0) {
            return Err(Error::invalid("time fractional error must be non-negative"));
        }
        if let Some(h) = self.altitude_km {
            if !(h.is_finite() && h > 0.0) {
                return Err(Error::invalid("altitude must be positive"));
            }
        }
        Ok(())
    }

    /// Satellite altitude in metres: the configured value, or the circular
    /// orbit radius implied by the mean motion minus the Earth radius.
    pub fn satellite_altitude_m(&self) -> Result<f64> {
        self.validate()?;
        if let Some(h) = self.altitude_km {
            return Ok(h * 1000.0);
        }
        let n = self.mean_motion_rev_per_day * 2.0 * PI / SECONDS_PER_DAY;
        let radius = (GM_EARTH / (n * n)).cbrt();
        let h = radius - self.earth_radius_km * 1000.0;
        if h <= 0.0 {
            return Err(Error::invalid("mean motion implies an orbit below the surface"));
        }
        Ok(h)
    }
}

/// Placement of one band on the sensor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandInfo {
    pub band: Band,
    /// Strip index counted from the leading edge of the sensor; this is also
    /// the temporal order in which the strips pass over a ground point.
    pub strip_position: u32,
    pub wavelength_nm: [f64; 2],
}

/// Per-band strip positions and wavelength ranges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<BandInfo>", into = "Vec<BandInfo>")]
pub struct BandLayout {
    entries: Vec<BandInfo>,
}

impl Default for BandLayout {
    fn default() -> Self {
        let entries = vec![
            BandInfo { band: Band::CoastalBlue, strip_position: 7, wavelength_nm: [431.0, 452.0] },
            BandInfo { band: Band::Blue, strip_position: 0, wavelength_nm: [465.0, 515.0] },
            BandInfo { band: Band::GreenI, strip_position: 2, wavelength_nm: [513.0, 549.0] },
            BandInfo { band: Band::GreenII, strip_position: 3, wavelength_nm: [547.0, 583.0] },
            BandInfo { band: Band::Yellow, strip_position: 4, wavelength_nm: [600.0, 620.0] },
            BandInfo { band: Band::Red, strip_position: 1, wavelength_nm: [650.0, 680.0] },
            BandInfo { band: Band::RedEdge, strip_position: 5, wavelength_nm: [697.0, 713.0] },
            BandInfo { band: Band::NearInfrared, strip_position: 6, wavelength_nm: [845.0, 885.0] },
        ];
        Self { entries }
    }
}

impl TryFrom<Vec<BandInfo>> for BandLayout {
    type Error = Error;

    fn try_from(entries: Vec<BandInfo>) -> Result<Self> {
        Self::new(entries)
    }
}

impl From<BandLayout> for Vec<BandInfo> {
    fn from(layout: BandLayout) -> Self {
        layout.entries
    }
}

impl BandLayout {
    /// Builds a layout over any subset of the bands. Strip positions must be
    /// a permutation of `0..n`.
    pub fn new(entries: Vec<BandInfo>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::invalid("layout has no bands"));
        }
        let n = entries.len();
        let mut seen_band = [false; 8];
        let mut seen_pos = vec![false; n];
        for e in &entries {
            if std::mem::replace(&mut seen_band[e.band.index()], true) {
                return Err(Error::invalid(format!("band {} listed twice", e.band)));
            }
            let pos = e.strip_position as usize;
            if pos >= n || std::mem::replace(&mut seen_pos[pos], true) {
                return Err(Error::invalid(format!(
                    "strip positions must be a permutation of 0..{n}"
                )));
            }
            let [lo, hi] = e.wavelength_nm;
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::invalid(format!("band {} has an empty wavelength range", e.band)));
            }
        }
        Ok(Self { entries })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn is_complete(&self) -> bool {
        self.entries.len() == Band::ALL.len()
    }

    pub fn entries(&self) -> &[BandInfo] {
        &self.entries
    }

    pub fn get(&self, band: Band) -> Result<&BandInfo> {
        self.entries
            .iter()
            .find(|e| e.band == band)
            .ok_or_else(|| Error::UnknownBand(band.to_string()))
    }

    pub fn strip_position(&self, band: Band) -> Result<u32> {
        Ok(self.get(band)?.strip_position)
    }

    /// Bands sorted by strip position, i.e. in acquisition order.
    pub fn temporal_order(&self) -> Vec<Band> {
        let mut v: Vec<_> = self.entries.iter().map(|e| (e.strip_position, e.band)).collect();
        v.sort_unstable();
        v.into_iter().map(|(_, b)| b).collect()
    }

    /// Bands sorted by wavelength.
    pub fn spectral_order(&self) -> Vec<Band> {
        let mut v: Vec<_> = self.entries.iter().collect();
        v.sort_by(|a, b| a.wavelength_nm[0].total_cmp(&b.wavelength_nm[0]));
        v.into_iter().map(|e| e.band).collect()
    }
}

/// Ground-track speed of the sub-satellite point, m/s.
pub fn ground_speed(orbit: &OrbitSpec) -> Result<f64> {
    orbit.validate()?;
    Ok(2.0 * PI * orbit.earth_radius_km * 1000.0 * orbit.mean_motion_rev_per_day / SECONDS_PER_DAY)
}

/// Ground extent of one filter strip along the track, m.
pub fn strip_ground_extent(sensor: &SensorSpec) -> Result<f64> {
    sensor.validate()?;
    Ok(f64::from(sensor.strip_width_px) * sensor.gsd_m)
}

/// Time for the ground track to advance by one strip: the acquisition delay
/// between adjacent strip positions.
pub fn delta_t_color(sensor: &SensorSpec, orbit: &OrbitSpec) -> Result<f64> {
    let dt = strip_ground_extent(sensor)? / ground_speed(orbit)?;
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::invalid(format!("strip crossing time {dt} is not finite")));
    }
    Ok(dt)
}

/// Ground distance the footprint advances between exposures, m.
pub fn frame_advance(sensor: &SensorSpec, orbit: &OrbitSpec) -> Result<f64> {
    sensor.validate()?;
    Ok(ground_speed(orbit)? * sensor.frame_interval_s)
}

/// Signed acquisition delay from `from` to `to`.
pub fn band_time_offset(layout: &BandLayout, from: Band, to: Band, dt_color: f64) -> Result<f64> {
    let a = layout.strip_position(from)?;
    let b = layout.strip_position(to)?;
    Ok((f64::from(b) - f64::from(a)) * dt_color)
}

/// The timing quantities every downstream stage needs, resolved once.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub ground_speed_mps: f64,
    pub delta_t_color_s: f64,
    pub frame_interval_s: f64,
    pub strip_extent_m: f64,
    pub frame_advance_m: f64,
    pub satellite_altitude_m: f64,
    pub time_fractional_error: f64,
}

impl Timing {
    pub fn new(sensor: &SensorSpec, orbit: &OrbitSpec) -> Result<Self> {
        Ok(Self {
            ground_speed_mps: ground_speed(orbit)?,
            delta_t_color_s: delta_t_color(sensor, orbit)?,
            frame_interval_s: sensor.frame_interval_s,
            strip_extent_m: strip_ground_extent(sensor)?,
            frame_advance_m: frame_advance(sensor, orbit)?,
            satellite_altitude_m: orbit.satellite_altitude_m()?,
            time_fractional_error: orbit.time_fractional_error,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn sensor_with_gsd(gsd_m: f64) -> SensorSpec {
        SensorSpec { gsd_m, ..SensorSpec::default() }
    }

    #[test]
    fn ground_speed_matches_hand_evaluation() {
        let v = ground_speed(&OrbitSpec::default()).unwrap();
        assert_relative_eq!(v, 7026.891918, epsilon = 1e-5);
        let advance = v * 0.17;
        assert!((advance - 1200.0).abs() < 10.0, "{advance}");
    }

    #[test]
    fn zero_mean_motion_is_rejected() {
        assert!(ground_speed(&OrbitSpec::with_mean_motion(0.0)).is_err());
        assert!(ground_speed(&OrbitSpec::with_mean_motion(-1.0)).is_err());
    }

    #[test]
    fn strip_crossing_time() {
        let orbit = OrbitSpec::default();
        let dt = delta_t_color(&sensor_with_gsd(4.2), &orbit).unwrap();
        assert_relative_eq!(dt, 0.396278, epsilon = 1e-6);
        let dt4 = delta_t_color(&sensor_with_gsd(4.0), &orbit).unwrap();
        assert_relative_eq!(dt4, 0.377407, epsilon = 1e-6);
        let dt8 = delta_t_color(&sensor_with_gsd(8.0), &orbit).unwrap();
        assert_relative_eq!(dt8, 2.0 * dt4, max_relative = 1e-12);
    }

    #[test]
    fn offsets_follow_strip_positions() {
        let layout = BandLayout::default();
        let dt = 0.3963;
        let off = |a, b| band_time_offset(&layout, a, b, dt).unwrap();
        assert_relative_eq!(off(Band::Blue, Band::Red), 0.3963);
        assert_eq!(off(Band::Yellow, Band::Yellow), 0.0);
        assert_relative_eq!(off(Band::Blue, Band::CoastalBlue), 2.7741, epsilon = 1e-9);
        assert_relative_eq!(off(Band::CoastalBlue, Band::Blue), -2.7741, epsilon = 1e-9);
    }

    #[test]
    fn unknown_band_in_partial_layout() {
        let layout = BandLayout::new(vec![
            BandInfo { band: Band::Blue, strip_position: 0, wavelength_nm: [465.0, 515.0] },
            BandInfo { band: Band::Red, strip_position: 1, wavelength_nm: [650.0, 680.0] },
        ])
        .unwrap();
        assert!(!layout.is_complete());
        assert!(matches!(
            band_time_offset(&layout, Band::Blue, Band::NearInfrared, 0.4),
            Err(Error::UnknownBand(_))
        ));
    }

    #[test]
    fn strip_extent() {
        assert_eq!(strip_ground_extent(&sensor_with_gsd(4.0)).unwrap(), 2652.0);
        assert_relative_eq!(strip_ground_extent(&sensor_with_gsd(4.2)).unwrap(), 2784.6, epsilon = 1e-9);
        let empty = SensorSpec { strip_width_px: 0, ..SensorSpec::default() };
        assert!(strip_ground_extent(&empty).is_err());
    }

    #[test]
    fn sensor_invariants() {
        let too_many = SensorSpec { n_strips: 9, ..SensorSpec::default() };
        assert!(too_many.validate().is_err());
        let no_frames = SensorSpec { frame_interval_s: 0.0, ..SensorSpec::default() };
        assert!(no_frames.validate().is_err());
    }

    #[test]
    fn default_layout_orders() {
        let layout = BandLayout::default();
        assert_eq!(layout.spectral_order(), Band::ALL.to_vec());
        use Band::*;
        assert_eq!(
            layout.temporal_order(),
            vec![Blue, Red, GreenI, GreenII, Yellow, RedEdge, NearInfrared, CoastalBlue]
        );
    }

    #[test]
    fn layout_rejects_bad_positions() {
        let mut entries: Vec<BandInfo> = BandLayout::default().entries().to_vec();
        entries[0].strip_position = 0; // collides with Blue
        assert!(BandLayout::new(entries).is_err());
        let json = r#"[{"band":"B","strip_position":1,"wavelength_nm":[465,515]}]"#;
        assert!(serde_json::from_str::<BandLayout>(json).is_err());
    }

    #[test]
    fn altitude_from_mean_motion() {
        let h = OrbitSpec::default().satellite_altitude_m().unwrap();
        assert!((h - 521_115.0).abs() < 100.0, "{h}");
        let fixed = OrbitSpec { altitude_km: Some(500.0), ..OrbitSpec::default() };
        assert_eq!(fixed.satellite_altitude_m().unwrap(), 500_000.0);
    }

    fn any_band() -> impl Strategy<Value = Band> {
        (0usize..8).prop_map(|i| Band::ALL[i])
    }

    proptest! {
        #[test]
        fn delay_times_speed_is_strip_extent(
            mean_motion in 1.0f64..17.0,
            gsd in 0.5f64..30.0,
            strip in 1u32..663,
        ) {
            let sensor = SensorSpec { gsd_m: gsd, strip_width_px: strip, ..SensorSpec::default() };
            let orbit = OrbitSpec::with_mean_motion(mean_motion);
            let lhs = delta_t_color(&sensor, &orbit).unwrap() * ground_speed(&orbit).unwrap();
            let rhs = f64::from(strip) * gsd;
            prop_assert!(((lhs - rhs) / rhs).abs() < 1e-9);
        }

        #[test]
        fn offsets_are_antisymmetric(a in any_band(), b in any_band(), dt in 0.01f64..2.0) {
            let layout = BandLayout::default();
            let ab = band_time_offset(&layout, a, b, dt).unwrap();
            let ba = band_time_offset(&layout, b, a, dt).unwrap();
            prop_assert_eq!(ab, -ba);
        }

        #[test]
        fn delay_decreases_with_mean_motion(m in 1.0f64..16.0, dm in 0.01f64..1.0) {
            let sensor = SensorSpec::default();
            let slow = delta_t_color(&sensor, &OrbitSpec::with_mean_motion(m)).unwrap();
            let fast = delta_t_color(&sensor, &OrbitSpec::with_mean_motion(m + dm)).unwrap();
            prop_assert!(fast < slow);
        }
    }

    #[test]
    fn temporal_chain_sums_to_seven_steps() {
        let layout = BandLayout::default();
        let order = layout.temporal_order();
        let dt = 0.4;
        let total: f64 = order
            .windows(2)
            .map(|w| band_time_offset(&layout, w[0], w[1], dt).unwrap())
            .sum();
        assert_relative_eq!(total, 7.0 * dt, epsilon = 1e-12);
    }
}
