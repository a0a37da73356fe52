//! Communicators and the split rule.

use std::collections::BTreeMap;

pub type CommId = u32;

/// Identifier of the world communicator.
pub const WORLD: CommId = 0;

/// Ordered, immutable process group; member `r` has rank `r`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Communicator {
    pub id: CommId,
    /// World ranks in rank order.
    pub members: Vec<usize>,
}

impl Communicator {
    pub fn world(p: usize) -> Self {
        Communicator { id: WORLD, members: (0..p).collect() }
    }

    pub fn size(&self) -> usize {
        self.members.len()
    }

    pub fn rank_of(&self, world_rank: usize) -> Option<usize> {
        self.members.iter().position(|&w| w == world_rank)
    }
}

/// Groups the parent's ranks by color, ordering each group by
/// `(key, parent rank)`. `None` colors join no group. Groups are returned in
/// ascending color order as lists of parent ranks.
pub fn split_ranks(colors: &[Option<i64>], keys: &[i64]) -> Vec<(i64, Vec<usize>)> {
    assert_eq!(colors.len(), keys.len(), "one color and key per rank");
    let mut groups: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
    for (r, c) in colors.iter().enumerate() {
        if let Some(c) = c {
            groups.entry(*c).or_default().push(r);
        }
    }
    groups
        .into_iter()
        .map(|(c, mut rs)| {
            rs.sort_by_key(|&r| (keys[r], r));
            (c, rs)
        })
        .collect()
}

/// Children of `parent`, ids assigned consecutively from `*next_id` in
/// ascending color order. The parent is left unchanged.
pub fn comm_split(
    parent: &Communicator,
    colors: &[Option<i64>],
    keys: &[i64],
    next_id: &mut CommId,
) -> Vec<(i64, Communicator)> {
    split_ranks(colors, keys)
        .into_iter()
        .map(|(c, rs)| {
            let id = *next_id;
            *next_id += 1;
            let members = rs.iter().map(|&r| parent.members[r]).collect();
            (c, Communicator { id, members })
        })
        .collect()
}
