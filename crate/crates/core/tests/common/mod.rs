//! Independent reference implementations used as test oracles. Nothing in
//! here calls into the code paths it checks.

#![allow(dead_code)]

/// Exhaustive search over all partial injections rows -> cols that avoid
/// `None` entries. Returns `(cardinality, cost)` of the best matching under
/// the order "more matches first, then lower cost", with costs summed in
/// ascending row order.
pub fn brute_force_assignment(costs: &[Vec<Option<f64>>]) -> (usize, f64) {
    let rows = costs.len();
    let cols = costs.first().map_or(0, Vec::len);
    let mut used = vec![false; cols];
    let mut best = (0usize, f64::INFINITY);
    let mut chosen: Vec<Option<usize>> = vec![None; rows];
    recurse(costs, 0, cols, &mut used, &mut chosen, &mut best);
    if best.1.is_infinite() {
        best.1 = 0.0;
    }
    best
}

fn recurse(
    costs: &[Vec<Option<f64>>],
    row: usize,
    cols: usize,
    used: &mut [bool],
    chosen: &mut Vec<Option<usize>>,
    best: &mut (usize, f64),
) {
    if row == costs.len() {
        let mut count = 0;
        let mut total = 0.0;
        for (r, c) in chosen.iter().enumerate() {
            if let Some(c) = c {
                count += 1;
                total += costs[r][*c].unwrap();
            }
        }
        if count > best.0 || (count == best.0 && total < best.1) {
            *best = (count, total);
        }
        return;
    }
    chosen[row] = None;
    recurse(costs, row + 1, cols, used, chosen, best);
    for c in 0..cols {
        if !used[c] && costs[row][c].is_some() {
            used[c] = true;
            chosen[row] = Some(c);
            recurse(costs, row + 1, cols, used, chosen, best);
            used[c] = false;
            chosen[row] = None;
        }
    }
}

/// Direct evaluation of the score-weighted tracklet feature: the weighted
/// mean of the last `tau` embeddings, renormalised to unit length.
pub fn weighted_feature_oracle(history: &[(Vec<f64>, f64)], tau: usize) -> Vec<f64> {
    let start = history.len().saturating_sub(tau);
    let window = &history[start..];
    let d = window[0].0.len();
    let mut num = vec![0.0; d];
    let mut den = 0.0;
    for (e, s) in window {
        for k in 0..d {
            num[k] += e[k] * s;
        }
        den += s;
    }
    let mean: Vec<f64> = num.iter().map(|v| v / den).collect();
    let norm = mean.iter().map(|v| v * v).sum::<f64>().sqrt();
    mean.iter().map(|v| v / norm).collect()
}

/// Maximum bipartite matching size by exhaustive search.
pub fn brute_force_max_matching(adj: &[Vec<bool>]) -> usize {
    let costs: Vec<Vec<Option<f64>>> = adj
        .iter()
        .map(|r| r.iter().map(|&a| if a { Some(0.0) } else { None }).collect())
        .collect();
    brute_force_assignment(&costs).0
}
