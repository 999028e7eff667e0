use std::collections::BTreeMap;

use crate::error::Result;
use crate::types::{CharacterId, ExemplarRecord};
use crate::vector::{l2_normalize, unit_distance};

/// Removes exemplars whose voice disagrees with their visual label.
///
/// A record is kept when its `k` nearest neighbours (cosine distance, searched
/// over the records of every character, ties by segment id) all carry its
/// label. Characters with fewer than `k` records keep all of them. When fewer
/// than `k` other records exist, all of them are the neighbourhood.
pub fn knn_filter(records: &[ExemplarRecord], k: usize) -> Result<Vec<ExemplarRecord>> {
    let units = records.iter().map(|r| l2_normalize(r.embedding.as_slice())).collect::<Result<Vec<_>>>()?;
    let mut class_size: BTreeMap<&CharacterId, usize> = BTreeMap::new();
    for r in records {
        *class_size.entry(&r.character).or_default() += 1;
    }

    let mut kept = Vec::new();
    let mut neighbours: Vec<(f64, usize)> = Vec::with_capacity(records.len());
    for (i, rec) in records.iter().enumerate() {
        if class_size[&rec.character] < k {
            kept.push(rec.clone());
            continue;
        }
        neighbours.clear();
        neighbours.extend((0..records.len()).filter(|&j| j != i).map(|j| (unit_distance(&units[i], &units[j]), j)));
        let key = |&(d, j): &(f64, usize)| (d, records[j].segment_id, &records[j].episode_id, j);
        let take = k.min(neighbours.len());
        if take < neighbours.len() {
            neighbours.select_nth_unstable_by(take - 1, |a, b| key(a).partial_cmp(&key(b)).expect("finite distances"));
        }
        let consistent = neighbours[..take].iter().all(|&(_, j)| records[j].character == rec.character);
        if consistent {
            kept.push(rec.clone());
        }
    }
    Ok(kept)
}
