use std::collections::BTreeMap;

use crate::acoustics::Vec3;
use crate::robot::PlanarPose;

/// Greedy nearest-pair matching of bots to targets on the table plane.
///
/// Repeatedly takes the globally closest unassigned pair. Ties go to the
/// lowest bot id, then the lowest target index. With more targets than bots
/// the extra targets stay unassigned.
pub fn assign_targets(bots: &[(u8, PlanarPose)], targets: &[Vec3]) -> BTreeMap<u8, usize> {
    let mut pairs: Vec<(f64, u8, usize)> = bots
        .iter()
        .flat_map(|(id, pose)| {
            targets.iter().enumerate().map(move |(t, target)| (pose.distance_to(target.x, target.y), *id, t))
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut assignment = BTreeMap::new();
    let mut taken = vec![false; targets.len()];
    for (_, bot, target) in pairs {
        if !taken[target] && !assignment.contains_key(&bot) {
            taken[target] = true;
            assignment.insert(bot, target);
        }
    }
    assignment
}
