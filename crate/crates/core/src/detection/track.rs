//! Linking per-pair detections into cross-band tracks.
//!
//! Consecutive spectral pairs share a band (CB-B and B-G1 share B), so the
//! same object appears in both difference images at the same place in the
//! shared band. Chaining those agreements yields one position per band.

use serde::{Deserialize, Serialize};

use crate::detection::blobs::{blob_from_members, components};
use crate::detection::difference::{median, NormalizedBand};
use crate::detection::pairing::{DetectionPair, PairSet};
use crate::detection::threshold::robust_sigma;
use crate::error::{Error, Result};
use crate::imaging::{Band, BandLayout};
use crate::Vec2;

/// Whether the object is brighter or darker than its surroundings. A bright
/// object is the positive blob in its minuend band.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObjectPolarity {
    Bright,
    Dark,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackSample {
    pub band: Band,
    pub strip_position: u32,
    pub position_px: Vec2,
    pub position_m: Vec2,
    /// Number of detection pairs that placed the object in this band.
    pub support: u32,
    /// Position re-measured on the band image itself.
    pub refined: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Track {
    pub id: usize,
    pub polarity: ObjectPolarity,
    pub pair_count: usize,
    /// Some link had more than one candidate within the gate.
    pub ambiguous: bool,
    /// Largest blob extent among the linked pairs, px.
    pub extent_px: usize,
    /// Ordered by strip position.
    pub samples: Vec<TrackSample>,
}

impl Track {
    pub fn sample(&self, band: Band) -> Option<&TrackSample> {
        self.samples.iter().find(|s| s.band == band)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkConfig {
    /// Base radius within which shared-band positions must agree. Half the
    /// larger blob extent is added, since overlapping footprints bias blob
    /// centroids.
    pub gate_px: f64,
    /// Tracks built from fewer pairs are dropped.
    pub min_pairs: usize,
}

impl Default for LinkConfig {
    fn default() -> Self {
        Self { gate_px: 3.0, min_pairs: 3 }
    }
}

#[derive(Debug, Clone, Copy)]
struct Node<'a> {
    set: usize,
    index: usize,
    pair: &'a DetectionPair,
}

impl Node<'_> {
    fn minuend_pos(&self, polarity: ObjectPolarity) -> Vec2 {
        match polarity {
            ObjectPolarity::Bright => self.pair.positive.centroid_px,
            ObjectPolarity::Dark => self.pair.negative.centroid_px,
        }
    }

    fn subtrahend_pos(&self, polarity: ObjectPolarity) -> Vec2 {
        match polarity {
            ObjectPolarity::Bright => self.pair.negative.centroid_px,
            ObjectPolarity::Dark => self.pair.positive.centroid_px,
        }
    }

    fn extent(&self) -> usize {
        self.pair.positive.extent_px().max(self.pair.negative.extent_px())
    }
}

#[derive(Debug, Clone)]
struct Chain {
    polarity: ObjectPolarity,
    /// Node ids into the flat node list.
    nodes: Vec<usize>,
    links: usize,
    ambiguous: bool,
}

fn chains_for(nodes: &[Node], sets: &[PairSet], polarity: ObjectPolarity, gate_px: f64) -> Vec<Chain> {
    let mut candidates: Vec<(f64, usize, usize)> = Vec::new();
    for (u, nu) in nodes.iter().enumerate() {
        for (v, nv) in nodes.iter().enumerate() {
            if sets[nu.set].bands.subtrahend != sets[nv.set].bands.minuend || nu.set == nv.set {
                continue;
            }
            let d = (nu.subtrahend_pos(polarity) - nv.minuend_pos(polarity)).norm();
            if d <= gate_px + 0.5 * nu.extent().max(nv.extent()) as f64 {
                candidates.push((d, u, v));
            }
        }
    }
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

    let n = nodes.len();
    let mut out_count = vec![0usize; n];
    let mut in_count = vec![0usize; n];
    for &(_, u, v) in &candidates {
        out_count[u] += 1;
        in_count[v] += 1;
    }
    let mut succ: Vec<Option<usize>> = vec![None; n];
    let mut pred: Vec<Option<usize>> = vec![None; n];
    for &(_, u, v) in &candidates {
        if succ[u].is_none() && pred[v].is_none() {
            // Refuse links that would close a cycle.
            let mut head = u;
            while let Some(p) = pred[head] {
                head = p;
            }
            if head == v {
                continue;
            }
            succ[u] = Some(v);
            pred[v] = Some(u);
        }
    }

    (0..n)
        .filter(|&u| pred[u].is_none())
        .map(|start| {
            let mut chain = vec![start];
            let mut cur = start;
            while let Some(next) = succ[cur] {
                chain.push(next);
                cur = next;
            }
            let ambiguous = chain.iter().any(|&i| out_count[i] > 1 || in_count[i] > 1);
            Chain { polarity, links: chain.len() - 1, nodes: chain, ambiguous }
        })
        .collect()
}

/// Per-band position estimates of a set of nodes under one polarity.
fn band_estimates(nodes: &[Node], ids: &[usize], sets: &[PairSet], polarity: ObjectPolarity) -> Vec<(Band, Vec2, u32)> {
    let mut acc: Vec<(Band, Vec2, u32)> = Vec::new();
    for &id in ids {
        let node = &nodes[id];
        let bands = sets[node.set].bands;
        for (band, pos) in [(bands.minuend, node.minuend_pos(polarity)), (bands.subtrahend, node.subtrahend_pos(polarity))] {
            match acc.iter_mut().find(|(b, _, _)| *b == band) {
                Some((_, sum, n)) => {
                    *sum += pos;
                    *n += 1;
                }
                None => acc.push((band, pos, 1)),
            }
        }
    }
    acc.into_iter().map(|(b, sum, n)| (b, sum / f64::from(n), n)).collect()
}

/// Least-squares line through (strip position, position) samples.
#[derive(Debug, Clone, Copy)]
pub(crate) struct LinearFit {
    intercept: Vec2,
    slope: Vec2,
}

impl LinearFit {
    pub(crate) fn new(points: &[(f64, Vec2)]) -> Self {
        let n = points.len() as f64;
        let mean_t = points.iter().map(|p| p.0).sum::<f64>() / n;
        let mean_p = points.iter().fold(Vec2::zeros(), |acc, p| acc + p.1) / n;
        let var: f64 = points.iter().map(|p| (p.0 - mean_t).powi(2)).sum();
        let slope = if var > 0.0 {
            points.iter().fold(Vec2::zeros(), |acc, p| acc + (p.1 - mean_p) * (p.0 - mean_t)) / var
        } else {
            Vec2::zeros()
        };
        Self { intercept: mean_p - slope * mean_t, slope }
    }

    pub(crate) fn predict(&self, t: f64) -> Vec2 {
        self.intercept + self.slope * t
    }

    fn max_residual(&self, points: &[(f64, Vec2)]) -> f64 {
        points.iter().map(|p| (self.predict(p.0) - p.1).norm()).fold(0.0, f64::max)
    }
}

/// Chains the pairs of the spectral-adjacent difference images into tracks.
/// Both polarity hypotheses are tried; chains with the most links claim
/// their pairs first. Chains broken by a missing pair are merged when their
/// samples fit one straight track.
pub fn link_track(
    pair_sets: &[PairSet],
    layout: &BandLayout,
    grid_spacing_m: f64,
    config: &LinkConfig,
) -> Result<Vec<Track>> {
    let nodes: Vec<Node> = pair_sets
        .iter()
        .enumerate()
        .flat_map(|(set, ps)| ps.pairs.iter().enumerate().map(move |(index, pair)| Node { set, index, pair }))
        .collect();
    if nodes.is_empty() {
        return Ok(Vec::new());
    }
    for ps in pair_sets {
        layout.get(ps.bands.minuend)?;
        layout.get(ps.bands.subtrahend)?;
    }

    let mut chains = chains_for(&nodes, pair_sets, ObjectPolarity::Bright, config.gate_px);
    chains.extend(chains_for(&nodes, pair_sets, ObjectPolarity::Dark, config.gate_px));
    chains.sort_by(|a, b| {
        b.links
            .cmp(&a.links)
            .then((a.polarity == ObjectPolarity::Dark).cmp(&(b.polarity == ObjectPolarity::Dark)))
            .then_with(|| {
                let ka = (nodes[a.nodes[0]].set, nodes[a.nodes[0]].index);
                let kb = (nodes[b.nodes[0]].set, nodes[b.nodes[0]].index);
                ka.cmp(&kb)
            })
    });
    let mut claimed = vec![false; nodes.len()];
    let mut accepted: Vec<Chain> = Vec::new();
    for chain in chains {
        if chain.nodes.iter().any(|&i| claimed[i]) {
            continue;
        }
        for &i in &chain.nodes {
            claimed[i] = true;
        }
        accepted.push(chain);
    }

    let points_of = |chain: &Chain| -> Result<Vec<(f64, Vec2)>> {
        band_estimates(&nodes, &chain.nodes, pair_sets, chain.polarity)
            .into_iter()
            .map(|(b, p, _)| Ok((f64::from(layout.strip_position(b)?), p)))
            .collect()
    };

    // Merge fragments of one object split by a missing pair.
    loop {
        let mut best: Option<(f64, usize, usize)> = None;
        for i in 0..accepted.len() {
            for j in i + 1..accepted.len() {
                let (a, b) = (&accepted[i], &accepted[j]);
                if a.polarity != b.polarity {
                    continue;
                }
                let pa = points_of(a)?;
                let pb = points_of(b)?;
                if pa.iter().any(|x| pb.iter().any(|y| x.0 == y.0)) {
                    continue;
                }
                let all: Vec<_> = pa.iter().chain(&pb).copied().collect();
                let fit = LinearFit::new(&all);
                let extent = a.nodes.iter().chain(&b.nodes).map(|&n| nodes[n].extent()).max().unwrap_or(0);
                // A mosaic time jump shifts positions by up to ~half a strip step.
                let tolerance = config.gate_px + 0.5 * extent as f64 + 0.5 * fit.slope.norm();
                let residual = fit.max_residual(&all);
                if residual <= tolerance && best.is_none_or(|(r, _, _)| residual < r) {
                    best = Some((residual, i, j));
                }
            }
        }
        let Some((_, i, j)) = best else { break };
        let b = accepted.remove(j);
        let a = &mut accepted[i];
        a.nodes.extend(b.nodes);
        a.links += b.links;
        a.ambiguous |= b.ambiguous;
    }

    let mut tracks: Vec<Track> = Vec::new();
    for chain in accepted {
        if chain.nodes.len() < config.min_pairs.max(1) {
            continue;
        }
        let mut samples = band_estimates(&nodes, &chain.nodes, pair_sets, chain.polarity)
            .into_iter()
            .map(|(band, pos, support)| {
                Ok(TrackSample {
                    band,
                    strip_position: layout.strip_position(band)?,
                    position_px: pos,
                    position_m: pos * grid_spacing_m,
                    support,
                    refined: false,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        samples.sort_by_key(|s| s.strip_position);
        tracks.push(Track {
            id: 0,
            polarity: chain.polarity,
            pair_count: chain.nodes.len(),
            ambiguous: chain.ambiguous,
            extent_px: chain.nodes.iter().map(|&n| nodes[n].extent()).max().unwrap_or(0),
            samples,
        });
    }
    tracks.sort_by(|a, b| {
        let (pa, pb) = (a.samples[0].position_px, b.samples[0].position_px);
        pa.y.total_cmp(&pb.y).then(pa.x.total_cmp(&pb.x))
    });
    for (i, t) in tracks.iter_mut().enumerate() {
        t.id = i;
    }
    Ok(tracks)
}

/// Re-measures each band position on the band image itself, after removing
/// the static background as the per-pixel median of all normalized bands.
/// The object sits elsewhere in most bands, so the median is background
/// wherever fewer than half of the bands see the object. Bands the pairs
/// missed are located from a straight-line prediction.
pub fn refine_track(track: &Track, bands: &[NormalizedBand], layout: &BandLayout) -> Result<Track> {
    if bands.is_empty() {
        return Err(Error::invalid("no bands to refine against"));
    }
    let (w, h) = (bands[0].width, bands[0].height);
    let g = bands[0].grid_spacing_m;
    let sign = match track.polarity {
        ObjectPolarity::Bright => 1.0f32,
        ObjectPolarity::Dark => -1.0,
    };
    let points: Vec<(f64, Vec2)> = track.samples.iter().map(|s| (f64::from(s.strip_position), s.position_px)).collect();
    let fit = LinearFit::new(&points);
    let radius = (track.extent_px as i64 + 4).max(6);

    let mut samples = Vec::new();
    for info in layout.entries() {
        let existing = track.sample(info.band);
        let rough = existing.map_or_else(|| fit.predict(f64::from(info.strip_position)), |s| s.position_px);
        let Some(image) = bands.iter().find(|b| b.band == info.band) else {
            continue;
        };
        let c0 = (rough.x.round() as i64 - radius).clamp(0, w as i64 - 1) as usize;
        let c1 = (rough.x.round() as i64 + radius).clamp(0, w as i64 - 1) as usize;
        let r0 = (rough.y.round() as i64 - radius).clamp(0, h as i64 - 1) as usize;
        let r1 = (rough.y.round() as i64 + radius).clamp(0, h as i64 - 1) as usize;
        let (ww, wh) = (c1 - c0 + 1, r1 - r0 + 1);
        let mut residual = Vec::with_capacity(ww * wh);
        let mut stack = [0f32; 8];
        for r in r0..=r1 {
            for c in c0..=c1 {
                let n = bands.len().min(8);
                for (k, b) in bands.iter().take(n).enumerate() {
                    stack[k] = b.get(c, r);
                }
                let bg = median(&mut stack[..n]);
                residual.push(sign * (image.get(c, r) - bg));
            }
        }
        let peak = residual.iter().copied().fold(0.0f32, f32::max);
        let measured = if peak > 0.0 {
            let level = (0.05 * peak).max(3.0 * robust_sigma(&residual));
            components(ww, wh, &residual, |v| v > level)
                .into_iter()
                .map(|m| blob_from_members(ww, &residual, &m))
                .map(|b| b.centroid_px + Vec2::new(c0 as f64, r0 as f64))
                .min_by(|a, b| (a - rough).norm().total_cmp(&(b - rough).norm()))
                .filter(|p| (p - rough).norm() <= radius as f64)
        } else {
            None
        };
        match (measured, existing) {
            (Some(p), _) => samples.push(TrackSample {
                band: info.band,
                strip_position: info.strip_position,
                position_px: p,
                position_m: p * g,
                support: existing.map_or(0, |s| s.support),
                refined: true,
            }),
            (None, Some(s)) => samples.push(s.clone()),
            (None, None) => {}
        }
    }
    samples.sort_by_key(|s| s.strip_position);
    Ok(Track { samples, ..track.clone() })
}
