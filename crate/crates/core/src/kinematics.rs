//! Velocities from cross-band tracks.
//!
//! A track gives one position per band. Consecutive bands in acquisition
//! order are nominally a strip-crossing time apart, but where the object
//! falls on different mosaic blocks in the two bands the true delay differs
//! by one camera frame interval. The frame shifts are recovered by picking
//! the combination that makes the velocity sequence smoothest.

use serde::{Deserialize, Serialize};

use crate::detection::Track;
use crate::error::{Error, Result};
use crate::imaging::{Band, OrbitSpec, Timing};
use crate::Vec2;

/// Ratio between the error of an acceleration estimated from three
/// positions and the error of one two-position velocity, per unit time.
pub const ACCELERATION_ERROR_FACTOR: f64 = 1.224_744_871_391_589;

/// Largest number of segments searched exhaustively (3^10 candidates).
const MAX_SEARCH_SEGMENTS: usize = 10;

/// Objectives within this relative distance count as a tie.
const TIE_TOLERANCE: f64 = 1e-12;

/// `dp / (dt + a)`.
pub fn velocity(dp: Vec2, dt_color: f64, a: f64) -> Result<Vec2> {
    let dt = dt_color + a;
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::invalid(format!("effective delay {dt} s is not positive")));
    }
    Ok(dp / dt)
}

/// Velocity uncertainty of one displacement between two independently
/// located positions.
pub fn velocity_error(pixel_sigma_px: f64, grid_spacing_m: f64, dt: f64) -> f64 {
    std::f64::consts::SQRT_2 * pixel_sigma_px * grid_spacing_m / dt
}

/// Uncertainty of an acceleration from three positions, given the velocity
/// uncertainty of one displacement and the spacing of the positions in time.
pub fn acceleration_error(sigma_v: f64, dt: f64) -> f64 {
    ACCELERATION_ERROR_FACTOR * sigma_v / dt
}

/// Fractional error of the acquisition delays, from the ephemeris.
pub fn timing_error_fraction(orbit: &OrbitSpec) -> f64 {
    orbit.time_fractional_error
}

/// Ground speed that parallax alone gives an object at `h_obj` that is not
/// moving, seen from `h_sat` while the sub-satellite point covers `l` in
/// `dt`.
pub fn apparent_speed_stationary(h_obj: f64, h_sat: f64, l: f64, dt: f64) -> Result<f64> {
    if !(h_obj >= 0.0 && h_obj < h_sat) {
        return Err(Error::OutOfRange(format!("object altitude {h_obj} m for satellite altitude {h_sat} m")));
    }
    if !(dt > 0.0) {
        return Err(Error::invalid(format!("time step {dt} s must be positive")));
    }
    Ok(h_obj / (h_sat - h_obj) * l / dt)
}

/// Which frame shifts a segment admits. Mosaic blocks are ordered along
/// the track, so an object that moved forward between two samples can only
/// have landed in a later block, never an earlier one.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ShiftDirection {
    #[default]
    Any,
    Forward,
    Backward,
}

impl ShiftDirection {
    fn admits(self, a: f64) -> bool {
        match self {
            ShiftDirection::Any => true,
            ShiftDirection::Forward => a >= 0.0,
            ShiftDirection::Backward => a <= 0.0,
        }
    }
}

/// Displacement between two consecutive samples in acquisition order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub displacement_m: Vec2,
    /// Nominal delay from strip positions alone, s.
    pub nominal_dt_s: f64,
    #[serde(default)]
    pub shift: ShiftDirection,
}

impl Segment {
    pub fn new(displacement_m: Vec2, nominal_dt_s: f64) -> Self {
        Self { displacement_m, nominal_dt_s, shift: ShiftDirection::Any }
    }
}

/// Outcome of the frame-shift search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdjustmentChoice {
    /// One per segment: 0 or plus/minus the frame interval.
    pub adjustments_s: Vec<f64>,
    pub velocities_mps: Vec<Vec2>,
    /// Sum of squared accelerations between consecutive segments, m^2/s^4.
    pub objective: f64,
    /// The same, made dimensionless by the mean speed and the total time;
    /// the quantity actually minimized.
    pub relative_objective: f64,
    /// Fewer than two segments: nothing to compare, no adjustment applied.
    pub low_confidence: bool,
}

impl AdjustmentChoice {
    pub fn nonzero_count(&self) -> usize {
        self.adjustments_s.iter().filter(|a| **a != 0.0).count()
    }
}

/// Sum of squared finite-difference accelerations of the segment
/// velocities. Each velocity is placed at the middle of its adjusted time
/// interval. `None` when some adjusted delay is not positive.
pub fn acceleration_objective(segments: &[Segment], adjustments: &[f64]) -> Option<f64> {
    let mut t = 0.0;
    let mut prev: Option<(Vec2, f64)> = None;
    let mut sum = 0.0;
    for (s, a) in segments.iter().zip(adjustments) {
        let dt = s.nominal_dt_s + a;
        if dt <= 0.0 {
            return None;
        }
        let v = s.displacement_m / dt;
        let mid = t + 0.5 * dt;
        if let Some((pv, pmid)) = prev {
            sum += ((v - pv) / (mid - pmid)).norm_squared();
        }
        prev = Some((v, mid));
        t += dt;
    }
    Some(sum)
}

/// [`acceleration_objective`] times T^2 / |v|^2, where T is the total
/// adjusted time and v the mean velocity. Stretching every delay by the
/// same factor leaves it unchanged; the plain objective would instead
/// reward any uniform lengthening, since slower sequences accelerate less.
pub fn relative_acceleration_objective(segments: &[Segment], adjustments: &[f64]) -> Option<f64> {
    let raw = acceleration_objective(segments, adjustments)?;
    let total_t: f64 = segments.iter().zip(adjustments).map(|(s, a)| s.nominal_dt_s + a).sum();
    let total_dp = segments.iter().fold(Vec2::zeros(), |acc, s| acc + s.displacement_m).norm_squared();
    if total_dp > 0.0 {
        Some(raw * total_t.powi(4) / total_dp)
    } else {
        Some(raw)
    }
}

/// Exhaustive search over {0, +dt_camera, -dt_camera} per segment for the
/// smoothest velocity sequence. Candidates that violate a segment's shift
/// direction or use more than `max_nonzero` shifts are skipped. Ties go to
/// fewer nonzero adjustments.
pub fn select_segment_adjustments(segments: &[Segment], dt_camera: f64, max_nonzero: Option<usize>) -> Result<AdjustmentChoice> {
    if !(dt_camera > 0.0) {
        return Err(Error::invalid(format!("frame interval {dt_camera} s must be positive")));
    }
    let k = segments.len();
    let zero = vec![0.0; k];
    let velocities = |adj: &[f64]| -> Vec<Vec2> {
        segments.iter().zip(adj).map(|(s, a)| s.displacement_m / (s.nominal_dt_s + a)).collect()
    };
    if segments.iter().any(|s| !(s.nominal_dt_s > 0.0)) {
        return Err(Error::invalid("segment delays must be positive"));
    }
    if k < 2 {
        return Ok(AdjustmentChoice {
            velocities_mps: velocities(&zero),
            adjustments_s: zero,
            objective: 0.0,
            relative_objective: 0.0,
            low_confidence: true,
        });
    }
    if k > MAX_SEARCH_SEGMENTS {
        return Err(Error::invalid(format!("{k} segments exceed the search limit of {MAX_SEARCH_SEGMENTS}")));
    }

    let steps = [0.0, dt_camera, -dt_camera];
    let mut best: Option<(f64, usize, Vec<f64>)> = None;
    let mut adj = vec![0.0; k];
    for code in 0..3usize.pow(k as u32) {
        let mut c = code;
        let mut nonzero = 0;
        let mut admissible = true;
        for (a, s) in adj.iter_mut().zip(segments) {
            *a = steps[c % 3];
            nonzero += usize::from(c % 3 != 0);
            admissible &= s.shift.admits(*a);
            c /= 3;
        }
        if !admissible || max_nonzero.is_some_and(|m| nonzero > m) {
            continue;
        }
        let Some(obj) = relative_acceleration_objective(segments, &adj) else {
            continue;
        };
        let better = match &best {
            None => true,
            Some((b, bn, _)) => {
                let tol = TIE_TOLERANCE * b.abs().max(obj.abs()).max(f64::MIN_POSITIVE);
                obj < b - tol || ((obj - b).abs() <= tol && nonzero < *bn)
            }
        };
        if better {
            best = Some((obj, nonzero, adj.clone()));
        }
    }
    let (relative_objective, _, adjustments) = best.expect("the all-zero assignment is always admissible");
    Ok(AdjustmentChoice {
        velocities_mps: velocities(&adjustments),
        objective: acceleration_objective(segments, &adjustments).expect("chosen delays are positive"),
        relative_objective,
        adjustments_s: adjustments,
        low_confidence: false,
    })
}

/// Frame-shift search over the displacements between consecutive strip
/// positions; entry `i` spans positions `i` and `i + 1`. Missing entries
/// are skipped, and the result lists only the present ones, in order.
pub fn select_adjustments(displacements: &[Option<Vec2>], dt_color: f64, dt_camera: f64) -> Result<AdjustmentChoice> {
    if !(dt_color > 0.0) {
        return Err(Error::invalid(format!("strip crossing time {dt_color} s must be positive")));
    }
    let segments: Vec<Segment> = displacements
        .iter()
        .flatten()
        .map(|&dp| Segment::new(dp, dt_color))
        .collect();
    select_segment_adjustments(&segments, dt_camera, None)
}

/// Velocity of one segment of a track.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentVelocity {
    pub from: Band,
    pub to: Band,
    pub displacement_m: Vec2,
    pub nominal_dt_s: f64,
    pub adjustment_s: f64,
    pub velocity_mps: Vec2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VelocityEstimate {
    pub track_id: usize,
    pub segments: Vec<SegmentVelocity>,
    /// Total displacement over total adjusted time.
    pub mean_velocity_mps: Vec2,
    pub speed_mps: f64,
    /// Direction of motion, degrees counter-clockwise from +x (cross-track).
    pub heading_deg: f64,
    pub sigma_v_mps: f64,
    /// Velocity uncertainty of a single segment.
    pub sigma_segment_mps: f64,
    pub sigma_accel_mps2: f64,
    pub objective: f64,
    pub low_confidence: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct KinematicsConfig {
    /// Search frame shifts; when off every adjustment is zero.
    pub adjust: bool,
    /// Position uncertainty of one sample, px.
    pub pixel_sigma_px: f64,
    /// Restrict the shift search to what the track's along-track motion
    /// allows: shifts follow the sign of each segment's along-track
    /// displacement, and there are no more of them than mosaic blocks the
    /// track spans.
    pub constrain_shifts: bool,
}

impl Default for KinematicsConfig {
    fn default() -> Self {
        Self { adjust: true, pixel_sigma_px: 1.0, constrain_shifts: true }
    }
}

/// Most block changes a track spanning `along_track_m` can contain.
fn max_block_changes(along_track_m: f64, grid_spacing_m: f64, frame_advance_m: f64) -> usize {
    if along_track_m < grid_spacing_m {
        0
    } else {
        (along_track_m / frame_advance_m).floor() as usize + 1
    }
}

/// Velocity of a track from its per-band positions.
pub fn estimate_velocity(track: &Track, timing: &Timing, grid_spacing_m: f64, config: &KinematicsConfig) -> Result<VelocityEstimate> {
    if track.samples.len() < 2 {
        return Err(Error::invalid(format!("track {} has fewer than two samples", track.id)));
    }
    let dt_color = timing.delta_t_color_s;
    let mut samples: Vec<_> = track.samples.iter().collect();
    samples.sort_by_key(|s| s.strip_position);
    let segments: Vec<Segment> = samples
        .windows(2)
        .map(|w| {
            let dp = w[1].position_m - w[0].position_m;
            let nominal = f64::from(w[1].strip_position - w[0].strip_position) * dt_color;
            let shift = match (config.constrain_shifts, dp.y >= 0.0) {
                (false, _) => ShiftDirection::Any,
                (true, true) => ShiftDirection::Forward,
                (true, false) => ShiftDirection::Backward,
            };
            Segment { displacement_m: dp, nominal_dt_s: nominal, shift }
        })
        .collect();
    let choice = if config.adjust {
        let max_nonzero = config.constrain_shifts.then(|| {
            let span = (samples[samples.len() - 1].position_m.y - samples[0].position_m.y).abs();
            max_block_changes(span, grid_spacing_m, timing.frame_advance_m)
        });
        select_segment_adjustments(&segments, timing.frame_interval_s, max_nonzero)?
    } else {
        let zero = vec![0.0; segments.len()];
        AdjustmentChoice {
            velocities_mps: segments.iter().map(|s| s.displacement_m / s.nominal_dt_s).collect(),
            objective: acceleration_objective(&segments, &zero).unwrap_or(0.0),
            relative_objective: relative_acceleration_objective(&segments, &zero).unwrap_or(0.0),
            adjustments_s: zero,
            low_confidence: segments.len() < 2,
        }
    };

    let total_dp = segments.iter().fold(Vec2::zeros(), |acc, s| acc + s.displacement_m);
    let total_t: f64 = segments.iter().zip(&choice.adjustments_s).map(|(s, a)| s.nominal_dt_s + a).sum();
    let mean = total_dp / total_t;
    let speed = mean.norm();
    let pixel_term = velocity_error(config.pixel_sigma_px, grid_spacing_m, total_t);
    let time_term = timing.time_fractional_error * speed;
    let sigma_segment = velocity_error(config.pixel_sigma_px, grid_spacing_m, dt_color);

    Ok(VelocityEstimate {
        track_id: track.id,
        segments: samples
            .windows(2)
            .zip(&segments)
            .zip(choice.adjustments_s.iter().zip(&choice.velocities_mps))
            .map(|((w, s), (a, v))| SegmentVelocity {
                from: w[0].band,
                to: w[1].band,
                displacement_m: s.displacement_m,
                nominal_dt_s: s.nominal_dt_s,
                adjustment_s: *a,
                velocity_mps: *v,
            })
            .collect(),
        mean_velocity_mps: mean,
        speed_mps: speed,
        heading_deg: mean.y.atan2(mean.x).to_degrees(),
        sigma_v_mps: pixel_term.hypot(time_term),
        sigma_segment_mps: sigma_segment,
        sigma_accel_mps2: acceleration_error(sigma_segment, dt_color),
        objective: choice.objective,
        low_confidence: choice.low_confidence,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AmbiguityPoint {
    pub altitude_m: f64,
    pub apparent_speed_mps: f64,
}

/// Apparent ground speed of a stationary object as a function of its
/// altitude.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmbiguityCurve {
    pub satellite_altitude_m: f64,
    pub points: Vec<AmbiguityPoint>,
}

impl AmbiguityCurve {
    /// `n` evenly spaced altitudes from 0 to `max_altitude_m` inclusive.
    pub fn sample(h_sat: f64, l: f64, dt: f64, max_altitude_m: f64, n: usize) -> Result<Self> {
        if n < 2 || !(max_altitude_m > 0.0) {
            return Err(Error::invalid("an ambiguity curve needs at least two samples over a positive range"));
        }
        let points = (0..n)
            .map(|i| {
                let h = max_altitude_m * i as f64 / (n - 1) as f64;
                Ok(AmbiguityPoint { altitude_m: h, apparent_speed_mps: apparent_speed_stationary(h, h_sat, l, dt)? })
            })
            .collect::<Result<_>>()?;
        Ok(Self { satellite_altitude_m: h_sat, points })
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("altitude_m,apparent_speed_mps\n");
        for p in &self.points {
            out.push_str(&format!("{},{}\n", p.altitude_m, p.apparent_speed_mps));
        }
        out
    }
}

/// True motion and altitude separated from an apparent velocity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AltitudeSolution {
    pub true_speed_mps: f64,
    pub true_velocity_mps: Vec2,
    pub altitude_m: f64,
    /// Along-track speed attributed to parallax.
    pub parallax_speed_mps: f64,
    pub sigma_altitude_m: f64,
    pub sigma_speed_mps: f64,
}

/// Inputs of [`resolve_altitude`] besides the measured velocity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AltitudeGeometry {
    /// Direction the object actually moves in (its orientation, or a road).
    pub heading: Vec2,
    pub heading_sigma_deg: f64,
    /// Flight direction of the satellite on the ground.
    pub track_axis: Vec2,
    pub satellite_altitude_m: f64,
    pub ground_speed_mps: f64,
    /// Headings closer than this to the track axis are rejected.
    pub min_angle_deg: f64,
}

impl AltitudeGeometry {
    pub fn new(heading: Vec2, timing: &Timing) -> Self {
        Self {
            heading,
            heading_sigma_deg: 0.0,
            track_axis: Vec2::new(0.0, 1.0),
            satellite_altitude_m: timing.satellite_altitude_m,
            ground_speed_mps: timing.ground_speed_mps,
            min_angle_deg: 5.0,
        }
    }
}

fn solve_altitude(apparent: Vec2, heading: Vec2, g: &AltitudeGeometry) -> Result<(f64, Vec2, f64, f64)> {
    let h = heading.normalize();
    let t = g.track_axis.normalize();
    let det = h.x * t.y - h.y * t.x;
    let angle = det.abs().asin().to_degrees();
    if angle < g.min_angle_deg {
        return Err(Error::Ambiguous(format!(
            "heading is {angle:.2} deg from the track axis (minimum {} deg)",
            g.min_angle_deg
        )));
    }
    // apparent = alpha * h + beta * t
    let alpha = (apparent.x * t.y - apparent.y * t.x) / det;
    let beta = (h.x * apparent.y - h.y * apparent.x) / det;
    let v_app = (-beta).max(0.0);
    let (hs, vg) = (g.satellite_altitude_m, g.ground_speed_mps);
    let altitude = hs * v_app / (vg + v_app);
    let shrink = (hs - altitude) / hs;
    Ok((altitude, h * alpha * shrink, (alpha * shrink).abs(), v_app))
}

/// Splits an apparent velocity into motion along `heading` and an
/// along-track parallax drift, and converts the drift to an altitude. The
/// parallax of an object at altitude h also magnifies its true motion by
/// H/(H - h), which is undone here. Heading uncertainty is propagated by
/// re-solving at the rotated headings.
pub fn resolve_altitude(apparent_velocity_mps: Vec2, geometry: &AltitudeGeometry) -> Result<AltitudeSolution> {
    if !(geometry.satellite_altitude_m > 0.0 && geometry.ground_speed_mps > 0.0) {
        return Err(Error::invalid("satellite altitude and ground speed must be positive"));
    }
    if geometry.heading.norm() == 0.0 || geometry.track_axis.norm() == 0.0 {
        return Err(Error::invalid("heading and track axis must be nonzero"));
    }
    let (altitude, true_velocity, speed, v_app) = solve_altitude(apparent_velocity_mps, geometry.heading, geometry)?;

    let (mut sigma_alt, mut sigma_speed) = (0.0f64, 0.0f64);
    if geometry.heading_sigma_deg > 0.0 {
        let s = geometry.heading_sigma_deg.to_radians();
        for sign in [-1.0, 1.0] {
            let rot = nalgebra::Rotation2::new(sign * s);
            if let Ok((a, _, sp, _)) = solve_altitude(apparent_velocity_mps, rot * geometry.heading, geometry) {
                sigma_alt = sigma_alt.max((a - altitude).abs());
                sigma_speed = sigma_speed.max((sp - speed).abs());
            }
        }
    }
    Ok(AltitudeSolution {
        true_speed_mps: speed,
        true_velocity_mps: true_velocity,
        altitude_m: altitude,
        parallax_speed_mps: v_app,
        sigma_altitude_m: sigma_alt,
        sigma_speed_mps: sigma_speed,
    })
}
