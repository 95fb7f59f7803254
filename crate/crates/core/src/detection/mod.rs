//! Moving-object detection from band-to-band differences.

pub mod blobs;
pub mod difference;
pub mod pairing;
pub mod threshold;
pub mod track;

pub use blobs::{extract_blobs, Blob, Polarity};
pub use difference::{difference, difference_normalized, normalize, spectral_adjacent_pairs, BandPair, DiffImage, NormalizedBand};
pub use pairing::{pair_blobs, DetectionPair, PairSet};
pub use threshold::{apply_level, robust_sigma, shared_threshold_level, threshold, threshold_level, ThresholdMode};
pub use track::{link_track, refine_track, LinkConfig, ObjectPolarity, Track, TrackSample};
