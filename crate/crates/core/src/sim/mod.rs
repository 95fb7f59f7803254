//! Synthetic push-broom acquisitions with timing ground truth.

mod render;
mod rowtime;
mod script;
mod texture;

pub use render::{simulate, Appearance, GroundTruth, ObjectTruth, Simulation, SUPERSAMPLE, TRUTH_SCHEMA_VERSION};
pub use rowtime::{row_time, BandRowTimes, OverlapPolicy, RowTimeMap};
pub use script::{Background, BandValues, ObjectScript, SceneScript, Shape};
pub use texture::ValueNoise;
