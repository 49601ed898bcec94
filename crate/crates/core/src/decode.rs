//! Tree decoding from arc and label score matrices.
//!
//! Arc scores are `n × (n+1)` matrices indexed `[dependent - 1][head]`, with
//! head column 0 standing for the artificial root. Ties are always broken
//! toward the smallest index.

use crate::autodiff::Tensor;
use crate::conllu::check_tree;
use crate::error::{Error, Result};

/// Heads and labels of a decoded sentence, plus the total arc score.
#[derive(Clone, Debug, PartialEq)]
pub struct DecodedTree {
    pub heads: Vec<usize>,
    pub labels: Vec<usize>,
    pub score: f64,
}

impl DecodedTree {
    pub fn is_well_formed(&self) -> bool {
        check_tree(&self.heads).is_ok()
    }
}

fn check_scores(scores: &Tensor) -> Result<usize> {
    let n = scores.rows();
    if scores.shape().len() != 2 || scores.cols() != n + 1 {
        return Err(Error::invalid(format!(
            "arc scores must be n × (n+1), got {:?}",
            scores.shape()
        )));
    }
    if n == 0 {
        return Err(Error::invalid("cannot decode an empty sentence"));
    }
    Ok(n)
}

/// Total score of a head assignment.
pub fn tree_score(scores: &Tensor, heads: &[usize]) -> f64 {
    heads
        .iter()
        .enumerate()
        .map(|(d, &h)| scores.get2(d, h))
        .sum()
}

/// Index of the largest value; ties go to the smallest index.
pub fn argmax(row: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in row.iter().enumerate() {
        if v > row[best] {
            best = i;
        }
    }
    best
}

/// Per-dependent argmax over head candidates. May produce cycles.
pub fn greedy_heads(scores: &Tensor) -> Result<Vec<usize>> {
    let n = check_scores(scores)?;
    Ok((0..n)
        .map(|d| {
            let row = scores.row(d);
            let mut best = 0;
            for h in 1..=n {
                if row[h] > row[best] {
                    best = h;
                }
            }
            best
        })
        .collect())
}

/// Maximum spanning arborescence rooted at node 0.
///
/// With `single_root`, exactly one token attaches to the root: the
/// unconstrained tree is returned if it already has one root child,
/// otherwise each token is tried as the only root child and the best tree
/// kept.
pub fn chu_liu_edmonds(scores: &Tensor, single_root: bool) -> Result<Vec<usize>> {
    let n = check_scores(scores)?;
    if n == 1 {
        return Ok(vec![0]);
    }
    // weights[d][h] over nodes 0..=n; node 0 has no incoming arcs.
    let mut weights = vec![vec![f64::NEG_INFINITY; n + 1]; n + 1];
    for d in 1..=n {
        for h in 0..=n {
            if h != d {
                weights[d][h] = scores.get2(d - 1, h);
            }
        }
    }

    let heads = arborescence(&weights);
    let root_children = heads.iter().filter(|&&h| h == 0).count();
    if !single_root || root_children == 1 {
        return Ok(heads);
    }

    let mut best: Option<(f64, Vec<usize>)> = None;
    for child in 1..=n {
        if scores.get2(child - 1, 0) == f64::NEG_INFINITY {
            continue;
        }
        let mut constrained = weights.clone();
        for (d, row) in constrained.iter_mut().enumerate().skip(1) {
            if d != child {
                row[0] = f64::NEG_INFINITY;
            }
        }
        let candidate = arborescence(&constrained);
        let score = tree_score(scores, &candidate);
        if best.as_ref().is_none_or(|(s, _)| score > *s) {
            best = Some((score, candidate));
        }
    }
    best.map(|(_, heads)| heads)
        .ok_or_else(|| Error::invalid("no token may attach to the root"))
}

/// Chu-Liu/Edmonds on a dense weight matrix `w[dependent][head]`, node 0 as
/// root. Returns the head of nodes `1..`.
fn arborescence(w: &[Vec<f64>]) -> Vec<usize> {
    let nodes: Vec<usize> = (0..w.len()).collect();
    let parents = contract(w.to_vec(), &nodes);
    parents[1..].to_vec()
}

/// One level of the recursion over the active node set (always containing
/// 0). Returns a parent for every node index of `w` that is active.
fn contract(w: Vec<Vec<f64>>, active: &[usize]) -> Vec<usize> {
    let size = w.len();
    let mut parent = vec![0usize; size];
    for &v in active.iter().filter(|&&v| v != 0) {
        let mut best: Option<usize> = None;
        for &u in active {
            if u == v {
                continue;
            }
            if best.is_none_or(|b| w[v][u] > w[v][b]) {
                best = Some(u);
            }
        }
        parent[v] = best.expect("at least two active nodes");
    }

    let Some(cycle) = find_cycle(&parent, active) else {
        return parent;
    };

    // Contract the cycle into its first member.
    let rep = cycle[0];
    let in_cycle = {
        let mut mask = vec![false; size];
        for &c in &cycle {
            mask[c] = true;
        }
        mask
    };
    let cycle_score: f64 = cycle.iter().map(|&v| w[v][parent[v]]).sum();

    let mut contracted = w.clone();
    // enters[u] = cycle node entered when u becomes the cycle's parent
    let mut enters = vec![usize::MAX; size];
    // leaves[x] = cycle node that is x's parent when x attaches to the cycle
    let mut leaves = vec![usize::MAX; size];
    for &u in active.iter().filter(|&&u| !in_cycle[u]) {
        let mut best_in = f64::NEG_INFINITY;
        let mut best_in_node = cycle[0];
        let mut best_out = f64::NEG_INFINITY;
        let mut best_out_node = cycle[0];
        for &c in &cycle {
            let entering = cycle_score - w[c][parent[c]] + w[c][u];
            if entering > best_in {
                best_in = entering;
                best_in_node = c;
            }
            if u != 0 && w[u][c] > best_out {
                best_out = w[u][c];
                best_out_node = c;
            }
        }
        contracted[rep][u] = best_in;
        enters[u] = best_in_node;
        if u != 0 {
            contracted[u][rep] = best_out;
            leaves[u] = best_out_node;
        }
    }

    let next_active: Vec<usize> = active
        .iter()
        .copied()
        .filter(|&v| !in_cycle[v] || v == rep)
        .collect();
    let sub = contract(contracted, &next_active);

    // Expand: the cycle keeps its internal arcs except into the entered node.
    let mut result = parent.clone();
    for &v in &next_active {
        if v == 0 || v == rep {
            continue;
        }
        result[v] = if sub[v] == rep { leaves[v] } else { sub[v] };
    }
    let outside_parent = sub[rep];
    let entered = enters[outside_parent];
    result[entered] = outside_parent;
    result
}

fn find_cycle(parent: &[usize], active: &[usize]) -> Option<Vec<usize>> {
    let size = parent.len();
    let mut is_active = vec![false; size];
    for &v in active {
        is_active[v] = true;
    }
    // 0 = unseen, 1 = on current walk, 2 = done
    let mut state = vec![0u8; size];
    state[0] = 2;
    for &start in active {
        let mut walk = Vec::new();
        let mut v = start;
        while state[v] == 0 {
            state[v] = 1;
            walk.push(v);
            v = parent[v];
            debug_assert!(is_active[v]);
        }
        if state[v] == 1 {
            let pos = walk.iter().position(|&x| x == v).unwrap();
            let mut cycle = walk[pos..].to_vec();
            // Stable representative: the smallest node.
            let min_pos = cycle.iter().enumerate().min_by_key(|(_, &c)| c).unwrap().0;
            cycle.rotate_left(min_pos);
            return Some(cycle);
        }
        for x in walk {
            state[x] = 2;
        }
    }
    None
}

/// Label argmax at each token's head. `label_scores` has shape
/// `n × (n+1) × L`.
pub fn assign_labels(label_scores: &Tensor, heads: &[usize]) -> Result<Vec<usize>> {
    let shape = label_scores.shape();
    if shape.len() != 3 || shape[0] != heads.len() || shape[1] != heads.len() + 1 || shape[2] == 0 {
        return Err(Error::invalid(format!(
            "label scores of shape {:?} do not match {} heads",
            shape,
            heads.len()
        )));
    }
    let (heads_dim, labels) = (shape[1], shape[2]);
    heads
        .iter()
        .enumerate()
        .map(|(d, &h)| {
            if h >= heads_dim {
                return Err(Error::contract(format!("head {} out of range", h)));
            }
            let offset = (d * heads_dim + h) * labels;
            let cell = &label_scores.data()[offset..offset + labels];
            let mut best = 0;
            for (l, v) in cell.iter().enumerate() {
                if *v > cell[best] {
                    best = l;
                }
            }
            Ok(best)
        })
        .collect()
}
