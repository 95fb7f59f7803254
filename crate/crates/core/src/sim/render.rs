//! Rendering scripted scenes through the strip-mosaic acquisition.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::imaging::{Band, Timing};
use crate::scene::{BandImage, MultiBandScene};
use crate::sim::rowtime::RowTimeMap;
use crate::sim::script::{Background, ObjectScript, SceneScript, Shape};
use crate::sim::texture::ValueNoise;
use crate::Vec2;

/// Subsamples per pixel edge used to area-average object footprints.
pub const SUPERSAMPLE: usize = 8;

pub const TRUTH_SCHEMA_VERSION: u32 = 1;

/// One rendering of an object into one mosaic block of one band.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Appearance {
    pub band: Band,
    pub strip_position: u32,
    pub block: u32,
    pub time_s: f64,
    /// Apparent footprint centre (parallax included).
    pub center_m: Vec2,
    pub center_px: Vec2,
    /// Coverage-weighted centroid of the rendered pixels.
    pub centroid_px: Vec2,
    pub area_px: f64,
    /// Part of the footprint fell outside the block or the scene.
    pub clipped: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectTruth {
    pub index: usize,
    pub velocity_mps: Vec2,
    pub altitude_m: f64,
    /// h / (h_sat - h).
    pub parallax_factor: f64,
    /// Rate of change of the apparent position: magnified ground velocity
    /// plus the parallax drift opposite to the flight direction.
    pub apparent_velocity_mps: Vec2,
    pub appearances: Vec<Appearance>,
    pub left_scene: bool,
}

impl ObjectTruth {
    /// Exactly one unclipped appearance in every band.
    pub fn is_clean(&self) -> bool {
        !self.left_scene
            && Band::ALL.iter().all(|&b| {
                let mut it = self.appearances.iter().filter(|a| a.band == b);
                matches!((it.next(), it.next()), (Some(a), None) if !a.clipped)
            })
    }

    /// Appearances ordered by strip position (acquisition order).
    pub fn temporal_appearances(&self) -> Vec<&Appearance> {
        let mut v: Vec<_> = self.appearances.iter().collect();
        v.sort_by_key(|a| (a.strip_position, a.block));
        v
    }

    /// Number of times the mosaic block changes along the acquisition order,
    /// for clean objects.
    pub fn block_changes(&self) -> usize {
        self.temporal_appearances().windows(2).filter(|w| w[0].block != w[1].block).count()
    }

    pub fn appearance(&self, band: Band) -> Option<&Appearance> {
        self.appearances.iter().find(|a| a.band == band)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub schema_version: u32,
    pub scene_id: String,
    pub grid_spacing_m: f64,
    pub timing: Timing,
    pub row_times: RowTimeMap,
    pub objects: Vec<ObjectTruth>,
}

#[derive(Debug, Clone)]
pub struct Simulation {
    pub scene: MultiBandScene,
    pub truth: GroundTruth,
}

#[derive(Debug, Clone, Copy)]
struct Footprint {
    center: Vec2,
    cos: f64,
    sin: f64,
    half_length: f64,
    half_width: f64,
    shape: Shape,
}

impl Footprint {
    fn contains(&self, p: Vec2) -> bool {
        let d = p - self.center;
        let u = d.x * self.cos + d.y * self.sin;
        let w = -d.x * self.sin + d.y * self.cos;
        match self.shape {
            Shape::Rectangle => u.abs() <= self.half_length && w.abs() <= self.half_width,
            Shape::Ellipse => {
                let (a, b) = (u / self.half_length, w / self.half_width);
                a * a + b * b <= 1.0
            }
        }
    }

    fn radius(&self) -> f64 {
        self.half_length.hypot(self.half_width)
    }
}

/// Apparent-motion model of one scripted object.
#[derive(Debug, Clone, Copy)]
struct Mover {
    origin: Vec2,
    apparent_velocity: Vec2,
    magnification: f64,
    parallax_factor: f64,
    orientation: f64,
}

impl Mover {
    fn new(o: &ObjectScript, timing: &Timing) -> Self {
        let k = o.altitude_m / (timing.satellite_altitude_m - o.altitude_m);
        // Satellite flies along +y; parallax drifts elevated objects along -y.
        let drift = Vec2::new(0.0, -k * timing.ground_speed_mps);
        Self {
            origin: o.position_m,
            apparent_velocity: o.velocity_mps * (1.0 + k) + drift,
            magnification: 1.0 + k,
            parallax_factor: k,
            orientation: o.orientation_rad(),
        }
    }

    fn position(&self, t: f64) -> Vec2 {
        self.origin + self.apparent_velocity * t
    }

    fn footprint(&self, o: &ObjectScript, t: f64) -> Footprint {
        Footprint {
            center: self.position(t),
            cos: self.orientation.cos(),
            sin: self.orientation.sin(),
            half_length: 0.5 * o.length_m * self.magnification,
            half_width: 0.5 * o.width_m * self.magnification,
            shape: o.shape,
        }
    }
}

/// Renders the script. Each band is built row block by row block, with every
/// object drawn at its position at that block's acquisition time.
pub fn simulate(script: &SceneScript) -> Result<Simulation> {
    script.validate()?;
    let timing = Timing::new(&script.sensor, &script.orbit)?;
    let (w, h, g) = (script.width_px, script.height_px, script.grid_spacing_m);
    let row_times = RowTimeMap::build(h, g, &timing, &script.layout, script.overlap_policy, script.strip_phase_m)?;
    let blocks = row_times.blocks();
    let movers: Vec<Mover> = script.objects.iter().map(|o| Mover::new(o, &timing)).collect();

    let texture: Option<Vec<f64>> = match &script.background {
        Background::Constant { .. } => None,
        Background::Texture { feature_size_m, .. } => {
            let noise = ValueNoise::new(script.seed, *feature_size_m, 3);
            Some(
                (0..w * h)
                    .into_par_iter()
                    .map(|i| noise.sample((i % w) as f64 * g, (i / w) as f64 * g))
                    .collect(),
            )
        }
    };

    let rendered: Vec<(BandImage, Vec<Vec<(Appearance, bool)>>)> = Band::ALL
        .par_iter()
        .map(|&band| {
            let mut values: Vec<f64> = match (&script.background, &texture) {
                (Background::Constant { level_dn }, _) => vec![level_dn.get(band); w * h],
                (Background::Texture { mean_dn, contrast, .. }, Some(t)) => {
                    let m = mean_dn.get(band);
                    t.iter().map(|n| m * (1.0 + contrast * n)).collect()
                }
                (Background::Texture { .. }, None) => unreachable!("texture is computed for textured backgrounds"),
            };

            let mut per_object = Vec::with_capacity(script.objects.len());
            for (o, mover) in script.objects.iter().zip(&movers) {
                let refl = o.reflectance_dn.get(band);
                let mut apps = Vec::new();
                for (block, rows) in &blocks {
                    let t = row_times.block_time(band, *block);
                    let fp = mover.footprint(o, t);
                    if let Some(app) = draw(&mut values, w, h, g, &fp, rows.clone(), refl) {
                        let (centroid_px, area_px, clipped, off_scene) = app;
                        apps.push((
                            Appearance {
                                band,
                                strip_position: row_times.bands[band.index()].strip_position,
                                block: *block,
                                time_s: t,
                                center_m: fp.center,
                                center_px: fp.center / g,
                                centroid_px,
                                area_px,
                                clipped,
                            },
                            off_scene,
                        ));
                    }
                }
                per_object.push(apps);
            }

            if script.noise_sigma_dn > 0.0 {
                let mut rng = ChaCha8Rng::seed_from_u64(script.seed ^ (0xB5AD_4ECE_DA1C_E2A9 ^ band.index() as u64));
                let normal = Normal::new(0.0, script.noise_sigma_dn).expect("validated sigma");
                for v in values.iter_mut() {
                    *v += normal.sample(&mut rng);
                }
            }
            let quantized: Vec<f32> = values.iter().map(|v| v.round().clamp(0.0, 65535.0) as f32).collect();
            let image = BandImage::new(band, w, h, g, quantized).expect("dimensions validated");
            (image, per_object)
        })
        .collect();

    let mut bands = Vec::with_capacity(8);
    let mut objects: Vec<ObjectTruth> = script
        .objects
        .iter()
        .zip(&movers)
        .enumerate()
        .map(|(index, (o, m))| ObjectTruth {
            index,
            velocity_mps: o.velocity_mps,
            altitude_m: o.altitude_m,
            parallax_factor: m.parallax_factor,
            apparent_velocity_mps: m.apparent_velocity,
            appearances: Vec::new(),
            left_scene: false,
        })
        .collect();
    for (image, per_object) in rendered {
        let band = image.band;
        bands.push(image);
        for (truth, apps) in objects.iter_mut().zip(per_object) {
            if apps.is_empty() {
                log::debug!("object {} is not visible in band {band}", truth.index);
                truth.left_scene = true;
            }
            for (app, off_scene) in apps {
                truth.left_scene |= off_scene;
                truth.appearances.push(app);
            }
        }
    }
    for o in &objects {
        if o.left_scene {
            log::warn!("object {} leaves the scene during acquisition", o.index);
        }
    }

    let scene = MultiBandScene::new(
        script.scene_id.clone(),
        script.sensor,
        script.orbit,
        script.layout.clone(),
        bands,
        Some(row_times.clone()),
    )?;
    let truth = GroundTruth {
        schema_version: TRUTH_SCHEMA_VERSION,
        scene_id: script.scene_id.clone(),
        grid_spacing_m: g,
        timing,
        row_times,
        objects,
    };
    Ok(Simulation { scene, truth })
}

/// Composites one footprint into the rows of one block. Returns the rendered
/// centroid, area, whether any coverage was lost to block or scene edges, and
/// whether the scene edge was among them.
fn draw(
    values: &mut [f64],
    w: usize,
    h: usize,
    g: f64,
    fp: &Footprint,
    rows: std::ops::Range<usize>,
    refl: f64,
) -> Option<(Vec2, f64, bool, bool)> {
    let r_px = fp.radius() / g + 1.0;
    let c = fp.center / g;
    let row_lo = (c.y - r_px).floor() as i64;
    let row_hi = (c.y + r_px).ceil() as i64;
    if row_hi < rows.start as i64 - 1 || row_lo > rows.end as i64 {
        return None;
    }
    let col_lo = (c.x - r_px).floor() as i64;
    let col_hi = (c.x + r_px).ceil() as i64;

    let ss = SUPERSAMPLE;
    let inv = 1.0 / (ss * ss) as f64;
    let mut inside_area = 0.0;
    let mut lost_block = 0.0;
    let mut lost_scene = 0.0;
    let mut moment = Vec2::zeros();
    for row in row_lo..=row_hi {
        for col in col_lo..=col_hi {
            let mut hits = 0usize;
            for sy in 0..ss {
                let y = (row as f64 + (sy as f64 + 0.5) / ss as f64 - 0.5) * g;
                for sx in 0..ss {
                    let x = (col as f64 + (sx as f64 + 0.5) / ss as f64 - 0.5) * g;
                    if fp.contains(Vec2::new(x, y)) {
                        hits += 1;
                    }
                }
            }
            if hits == 0 {
                continue;
            }
            let cov = hits as f64 * inv;
            let in_scene = row >= 0 && col >= 0 && (row as usize) < h && (col as usize) < w;
            let in_block = row >= rows.start as i64 && row < rows.end as i64;
            match (in_scene, in_block) {
                (true, true) => {
                    let i = row as usize * w + col as usize;
                    values[i] = values[i] * (1.0 - cov) + refl * cov;
                    inside_area += cov;
                    moment += Vec2::new(col as f64, row as f64) * cov;
                }
                (false, true) => lost_scene += cov,
                (_, false) => lost_block += cov,
            }
        }
    }
    if inside_area == 0.0 {
        return None;
    }
    let clipped = lost_block > 0.0 || lost_scene > 0.0;
    Some((moment / inside_area, inside_area, clipped, lost_scene > 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::script::BandValues;
    use approx::assert_relative_eq;

    fn object(pos: Vec2, vel: Vec2) -> ObjectScript {
        ObjectScript {
            shape: Shape::Rectangle,
            length_m: 24.0,
            width_m: 9.0,
            orientation_deg: None,
            reflectance_dn: BandValues::Uniform(6000.0),
            position_m: pos,
            velocity_mps: vel,
            altitude_m: 0.0,
        }
    }

    fn script(objects: Vec<ObjectScript>) -> SceneScript {
        let mut s = SceneScript::new(160, 160, 3.0);
        s.strip_phase_m = 0.0;
        s.objects = objects;
        s
    }

    #[test]
    fn static_object_has_identical_footprints() {
        let mut s = script(vec![object(Vec2::new(240.0, 240.0), Vec2::zeros())]);
        s.background = Background::Constant { level_dn: BandValues::PerBand([500., 600., 700., 800., 900., 1000., 1100., 1200.]) };
        s.objects[0].reflectance_dn = BandValues::PerBand([3000., 3100., 3200., 3300., 3400., 3500., 3600., 3700.]);
        let sim = simulate(&s).unwrap();
        let mask = |b: &BandImage| -> Vec<bool> {
            let bg = b.values[0];
            b.values.iter().map(|&v| v != bg).collect()
        };
        let reference = mask(&sim.scene.bands[0]);
        assert!(reference.iter().filter(|&&m| m).count() > 10);
        for b in &sim.scene.bands[1..] {
            assert_eq!(mask(b), reference);
        }
        let truth = &sim.truth.objects[0];
        assert!(truth.is_clean());
        let c0 = truth.appearances[0].centroid_px;
        for a in &truth.appearances {
            assert_eq!(a.centroid_px, c0);
        }
    }

    #[test]
    fn cross_track_mover_advances_per_band() {
        // 38.5 m/s across track, 3 m grid.
        let s = script(vec![object(Vec2::new(150.0, 240.0), Vec2::new(38.5, 0.0))]);
        let sim = simulate(&s).unwrap();
        let truth = &sim.truth.objects[0];
        assert!(truth.is_clean());
        let apps = truth.temporal_appearances();
        let dt = sim.truth.timing.delta_t_color_s;
        for w in apps.windows(2) {
            let exact = w[1].center_px - w[0].center_px;
            assert_relative_eq!(exact.x, 38.5 * dt / 3.0, epsilon = 1e-9);
            // Rendered coverage is quantized to one sub-sample.
            let d = w[1].centroid_px - w[0].centroid_px;
            assert!((d.x - exact.x).abs() <= 1.0 / SUPERSAMPLE as f64, "{d:?}");
            assert!(d.y.abs() < 1e-9);
        }
    }

    #[test]
    fn elevated_static_object_drifts_against_flight() {
        let mut s = script(vec![object(Vec2::new(240.0, 300.0), Vec2::zeros())]);
        s.orbit.altitude_km = Some(505.0);
        // h / (h_sat - h) = 0.01
        s.objects[0].altitude_m = 5000.0;
        let sim = simulate(&s).unwrap();
        let t = &sim.truth;
        let truth = &t.objects[0];
        assert_relative_eq!(truth.parallax_factor, 0.01, epsilon = 1e-12);
        let advance = t.timing.ground_speed_mps * t.timing.delta_t_color_s;
        let apps = truth.temporal_appearances();
        for w in apps.windows(2) {
            let d = (w[1].center_m - w[0].center_m) * 1.0;
            assert_relative_eq!(d.y, -0.01 * advance, epsilon = 1e-9);
            assert_eq!(d.x, 0.0);
        }
    }

    #[test]
    fn rendered_rows_follow_row_times() {
        // A fast along-track mover spanning several blocks is drawn once per
        // block it overlaps, each at that block's time.
        let mut s = SceneScript::new(64, 900, 3.0);
        s.objects.push(object(Vec2::new(90.0, 1150.0), Vec2::new(0.0, 250.0)));
        let sim = simulate(&s).unwrap();
        let rt = &sim.truth.row_times;
        for a in &sim.truth.objects[0].appearances {
            let row = a.centroid_px.y.round() as usize;
            assert_eq!(rt.block_of_row(row).unwrap(), a.block);
            assert_relative_eq!(crate::sim::row_time(rt, a.band, row).unwrap(), a.time_s);
        }
    }

    #[test]
    fn leaving_the_scene_is_flagged() {
        let s = script(vec![object(Vec2::new(470.0, 240.0), Vec2::new(40.0, 0.0))]);
        let sim = simulate(&s).unwrap();
        assert!(sim.truth.objects[0].left_scene);
    }

    #[test]
    fn deterministic_with_noise() {
        let mut s = script(vec![object(Vec2::new(150.0, 240.0), Vec2::new(38.5, 0.0))]);
        s.noise_sigma_dn = 5.0;
        s.seed = 11;
        let a = simulate(&s).unwrap();
        let b = simulate(&s).unwrap();
        assert_eq!(a.scene, b.scene);
        s.seed = 12;
        let c = simulate(&s).unwrap();
        assert_ne!(a.scene.bands[0].values, c.scene.bands[0].values);
    }
}
