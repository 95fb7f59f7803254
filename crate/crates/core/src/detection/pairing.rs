use serde::{Deserialize, Serialize};

use crate::detection::blobs::{Blob, Polarity};
use crate::detection::difference::BandPair;
use crate::Vec2;

/// A positive and a negative blob taken to be one object seen at two epochs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionPair {
    pub bands: BandPair,
    pub positive: Blob,
    pub negative: Blob,
    /// Negative centroid minus positive centroid.
    pub displacement_px: Vec2,
    pub displacement_m: Vec2,
}

/// Pairing result for one difference image.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairSet {
    pub bands: BandPair,
    pub pairs: Vec<DetectionPair>,
    pub unmatched: Vec<Blob>,
}

/// Greedy mutual-nearest-neighbour matching of opposite-polarity blobs.
/// Each round pairs every positive/negative couple that are each other's
/// nearest remaining candidate within `max_displacement_px`; rounds repeat
/// until nothing new pairs.
pub fn pair_blobs(blobs: &[Blob], max_displacement_px: f64, bands: BandPair, grid_spacing_m: f64) -> PairSet {
    let pos: Vec<usize> = (0..blobs.len()).filter(|&i| blobs[i].polarity == Polarity::Positive).collect();
    let neg: Vec<usize> = (0..blobs.len()).filter(|&i| blobs[i].polarity == Polarity::Negative).collect();
    let mut used = vec![false; blobs.len()];
    let mut matched: Vec<(usize, usize)> = Vec::new();

    let dist = |a: usize, b: usize| (blobs[a].centroid_px - blobs[b].centroid_px).norm();
    let nearest = |from: usize, pool: &[usize], used: &[bool]| -> Option<usize> {
        pool.iter()
            .copied()
            .filter(|&j| !used[j])
            .map(|j| (dist(from, j), j))
            .filter(|(d, _)| *d <= max_displacement_px)
            .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
            .map(|(_, j)| j)
    };

    loop {
        let mut round = Vec::new();
        for &p in pos.iter().filter(|&&p| !used[p]) {
            if let Some(n) = nearest(p, &neg, &used) {
                if nearest(n, &pos, &used) == Some(p) {
                    round.push((p, n));
                }
            }
        }
        if round.is_empty() {
            break;
        }
        for &(p, n) in &round {
            used[p] = true;
            used[n] = true;
        }
        matched.extend(round);
    }

    let mut pairs: Vec<DetectionPair> = matched
        .into_iter()
        .map(|(p, n)| {
            let d = blobs[n].centroid_px - blobs[p].centroid_px;
            DetectionPair {
                bands,
                positive: blobs[p].clone(),
                negative: blobs[n].clone(),
                displacement_px: d,
                displacement_m: d * grid_spacing_m,
            }
        })
        .collect();
    pairs.sort_by(|a, b| {
        let (pa, pb) = (a.positive.centroid_px, b.positive.centroid_px);
        pa.y.total_cmp(&pb.y).then(pa.x.total_cmp(&pb.x))
    });
    let unmatched = blobs.iter().zip(&used).filter(|(_, u)| !**u).map(|(b, _)| b.clone()).collect();
    PairSet { bands, pairs, unmatched }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imaging::Band;

    const BANDS: BandPair = BandPair { minuend: Band::Blue, subtrahend: Band::GreenI };

    fn blob(polarity: Polarity, x: f64, y: f64) -> Blob {
        Blob {
            polarity,
            centroid_px: Vec2::new(x, y),
            area_px: 9,
            peak: 1.0,
            flux: 9.0,
            bbox: [x as usize - 1, y as usize - 1, x as usize + 1, y as usize + 1],
        }
    }

    #[test]
    fn single_pair_in_range() {
        let set = pair_blobs(&[blob(Polarity::Positive, 10.0, 10.0), blob(Polarity::Negative, 15.0, 10.0)], 8.0, BANDS, 3.0);
        assert_eq!(set.pairs.len(), 1);
        assert_eq!(set.pairs[0].displacement_px, Vec2::new(5.0, 0.0));
        assert_eq!(set.pairs[0].displacement_m, Vec2::new(15.0, 0.0));
        assert!(set.unmatched.is_empty());
    }

    #[test]
    fn out_of_range_stays_unmatched() {
        let set = pair_blobs(&[blob(Polarity::Positive, 10.0, 10.0), blob(Polarity::Negative, 30.0, 10.0)], 8.0, BANDS, 3.0);
        assert!(set.pairs.is_empty());
        assert_eq!(set.unmatched.len(), 2);
    }

    #[test]
    fn same_polarity_never_pairs() {
        let set = pair_blobs(&[blob(Polarity::Positive, 10.0, 10.0), blob(Polarity::Positive, 12.0, 10.0)], 8.0, BANDS, 3.0);
        assert!(set.pairs.is_empty());
    }

    #[test]
    fn two_objects_keep_correspondence() {
        let blobs = [
            blob(Polarity::Positive, 10.0, 10.0),
            blob(Polarity::Negative, 14.0, 11.0),
            blob(Polarity::Positive, 40.0, 50.0),
            blob(Polarity::Negative, 38.0, 46.0),
        ];
        let set = pair_blobs(&blobs, 20.0, BANDS, 3.0);
        assert_eq!(set.pairs.len(), 2);
        assert_eq!(set.pairs[0].negative.centroid_px, Vec2::new(14.0, 11.0));
        assert_eq!(set.pairs[1].negative.centroid_px, Vec2::new(38.0, 46.0));
    }

    #[test]
    fn second_round_pairs_leftovers() {
        // n1 is nearest to both p1 and p2; p2 then falls back to n2.
        let blobs = [
            blob(Polarity::Positive, 10.0, 10.0),
            blob(Polarity::Negative, 12.0, 10.0),
            blob(Polarity::Positive, 15.0, 10.0),
            blob(Polarity::Negative, 19.0, 10.0),
        ];
        let set = pair_blobs(&blobs, 10.0, BANDS, 3.0);
        assert_eq!(set.pairs.len(), 2);
    }
}
