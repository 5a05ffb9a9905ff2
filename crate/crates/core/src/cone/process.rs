use std::collections::BTreeMap;

use serde::Serialize;

use crate::walk::{occupancy, LatticePath, Site};

/// Self-intersection sites, each weighted by `m (m - 1) / 2` for `m` visits.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct IntersectionProcess {
    pub atoms: BTreeMap<Site, u64>,
    pub total: u64,
}

impl IntersectionProcess {
    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }
}

pub fn extract_process(path: &LatticePath) -> IntersectionProcess {
    let atoms: BTreeMap<Site, u64> = occupancy(path)
        .into_iter()
        .filter(|&(_, m)| m >= 2)
        .map(|(s, m)| (s, m as u64 * (m as u64 - 1) / 2))
        .collect();
    let total = atoms.values().sum();
    IntersectionProcess { atoms, total }
}
