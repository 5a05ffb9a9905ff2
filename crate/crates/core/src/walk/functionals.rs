use std::collections::BTreeMap;

use rustc_hash::FxHashMap;

use super::{LatticePath, Site};

/// Visit counts per site, in site order.
pub fn occupancy(path: &LatticePath) -> BTreeMap<Site, u32> {
    let mut visits = BTreeMap::new();
    for s in path.site_iter() {
        *visits.entry(s).or_insert(0) += 1;
    }
    visits
}

/// Self-intersection local time `J_n`: the number of index pairs `i < j`
/// with `S_i = S_j`, computed as `sum_x m_x (m_x - 1) / 2` over visit counts.
pub fn silt_count(path: &LatticePath) -> u64 {
    count_pairs(path.site_iter(), path.len() + 1)
}

/// [`silt_count`] for an already expanded site sequence.
pub fn silt_count_sites(sites: &[Site]) -> u64 {
    count_pairs(sites.iter().copied(), sites.len())
}

fn count_pairs(sites: impl Iterator<Item = Site>, capacity: usize) -> u64 {
    let mut visits: FxHashMap<u64, u32> = FxHashMap::default();
    visits.reserve(capacity);
    let mut j = 0u64;
    for s in sites {
        let m = visits.entry(s.key()).or_insert(0);
        // the new visit pairs with every earlier one
        j += *m as u64;
        *m += 1;
    }
    j
}

/// Euclidean distance `chi_n` of the endpoint from the origin.
pub fn endpoint_distance(path: &LatticePath) -> f64 {
    path.endpoint().norm()
}

/// `R_n = max_k |S_k|`, the largest distance from the origin reached by the walk.
pub fn hull_radius(path: &LatticePath) -> f64 {
    let max_sq = path.site_iter().map(|s| s.norm_sq()).max().unwrap_or(0);
    (max_sq as f64).sqrt()
}
