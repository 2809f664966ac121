use std::collections::HashMap;

use super::{check_instance, label_schedule, min_cost_assignment, MoveCost, OfflineError, OfflineSchedule};
use crate::sim::Request;
use crate::tree::VertexId;

/// Default cap on the total number of DP states over all layers.
pub const DEFAULT_BUDGET: u64 = 10_000_000;

struct Entry {
    cost: i64,
    parent: usize,
    from: VertexId,
}

/// Exhaustive DP over lazy schedules; configurations are sorted multisets.
///
/// Lazy schedules suffice because the move cost obeys the triangle
/// inequality (tree distance, or its upward-only part).
pub fn optimal_cost_dp(
    cost: &impl MoveCost,
    initial: &[VertexId],
    requests: &[Request],
    fixed_final: Option<&[VertexId]>,
    budget: u64,
) -> Result<OfflineSchedule, OfflineError> {
    check_instance(initial.len(), requests, fixed_final)?;
    let mut start = initial.to_vec();
    start.sort_unstable();
    let mut layers: Vec<(Vec<Vec<VertexId>>, Vec<Entry>)> =
        vec![(vec![start], vec![Entry { cost: 0, parent: usize::MAX, from: usize::MAX }])];
    let mut used = 1u64;
    for (t, r) in requests.iter().enumerate() {
        let (states, entries) = layers.last().unwrap();
        let mut next_states: Vec<Vec<VertexId>> = vec![];
        let mut next_entries: Vec<Entry> = vec![];
        let mut index: HashMap<Vec<VertexId>, usize> = HashMap::new();
        let mut offer = |state: Vec<VertexId>, e: Entry| match index.get(&state) {
            Some(&i) => {
                if e.cost < next_entries[i].cost {
                    next_entries[i] = e;
                }
            }
            None => {
                index.insert(state.clone(), next_states.len());
                next_states.push(state);
                next_entries.push(e);
            }
        };
        for (i, (state, entry)) in states.iter().zip(entries).enumerate() {
            let s = r.source();
            let d = r.destination();
            if let Some(j) = state.iter().position(|&x| x == s) {
                let mut ns = state.clone();
                ns[j] = d;
                ns.sort_unstable();
                offer(ns, Entry { cost: entry.cost, parent: i, from: s });
                continue;
            }
            if r.is_relocation() {
                return Err(OfflineError::UnanchoredRelocation(t));
            }
            for (j, &p) in state.iter().enumerate() {
                if j > 0 && state[j - 1] == p {
                    continue;
                }
                let mut ns = state.clone();
                ns[j] = s;
                ns.sort_unstable();
                offer(ns, Entry { cost: entry.cost + cost.cost(p, s), parent: i, from: p });
            }
        }
        used += next_states.len() as u64;
        if used > budget {
            return Err(OfflineError::Budget { budget });
        }
        layers.push((next_states, next_entries));
    }

    let (states, entries) = layers.last().unwrap();
    let mut best = (i64::MAX, 0usize);
    for (i, (state, e)) in states.iter().zip(entries).enumerate() {
        let tail = match fixed_final {
            Some(f) => {
                let m: Vec<Vec<i64>> = state.iter().map(|&a| f.iter().map(|&b| cost.cost(a, b)).collect()).collect();
                min_cost_assignment(&m).0
            }
            None => 0,
        };
        if e.cost + tail < best.0 {
            best = (e.cost + tail, i);
        }
    }
    let mut from = vec![0; requests.len()];
    let mut idx = best.1;
    for t in (0..requests.len()).rev() {
        let e = &layers[t + 1].1[idx];
        from[t] = e.from;
        idx = e.parent;
    }
    let schedule = label_schedule(cost, initial, requests, &from, fixed_final);
    if schedule.total_cost != best.0 {
        return Err(OfflineError::Internal(format!(
            "dp value {} but schedule costs {}",
            best.0, schedule.total_cost
        )));
    }
    Ok(schedule)
}
