//! Fixtures shared by the benchmarks.

use bandshift::sim::{simulate, BandValues, ObjectScript, SceneScript, Shape, Simulation};
use bandshift::Vec2;

/// A square scene with `movers` ground objects spread along a diagonal.
pub fn scene_script(size_px: usize, movers: usize) -> SceneScript {
    let mut s = SceneScript::new(size_px, size_px, 3.0);
    s.noise_sigma_dn = 5.0;
    s.seed = 1;
    let extent = size_px as f64 * 3.0;
    s.objects = (0..movers)
        .map(|i| {
            let f = (i as f64 + 0.5) / movers as f64;
            let angle = i as f64 * 1.1;
            ObjectScript {
                shape: Shape::Rectangle,
                length_m: 15.0,
                width_m: 8.0,
                orientation_deg: None,
                reflectance_dn: BandValues::Uniform(4500.0),
                position_m: Vec2::new(f * extent, (1.0 - f) * extent),
                velocity_mps: Vec2::new(angle.cos(), angle.sin()) * 40.0,
                altitude_m: 0.0,
            }
        })
        .collect();
    s
}

pub fn scene(size_px: usize, movers: usize) -> Simulation {
    simulate(&scene_script(size_px, movers)).expect("fixture scripts are valid")
}
