//! Bridges and 2-edge-connectivity of the underlying multigraph.

use crate::error::{Error, Result};
use crate::quiver::Quiver;

/// Indices (into `q.arrows()`) of every bridge of the underlying undirected
/// multigraph. Loops and parallel arrows are never bridges.
pub fn bridges(q: &Quiver) -> Result<Vec<usize>> {
    let n = q.num_vertices();
    if n == 0 {
        return Err(Error::EmptyQuiver);
    }
    if !q.is_connected() {
        return Err(Error::Disconnected);
    }
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for (k, a) in q.arrows().iter().enumerate() {
        if !a.is_loop() {
            adj[a.src].push((a.tgt, k));
            adj[a.tgt].push((a.src, k));
        }
    }

    // Iterative low-link DFS; the parent edge is skipped by id so parallel
    // arrows count as back edges.
    const UNSEEN: usize = usize::MAX;
    let mut disc = vec![UNSEEN; n];
    let mut low = vec![0usize; n];
    let mut timer = 0;
    let mut out = Vec::new();
    // (vertex, parent edge id, next adjacency position)
    let mut stack: Vec<(usize, Option<usize>, usize)> = vec![(0, None, 0)];
    disc[0] = 0;
    low[0] = 0;
    timer += 1;
    while let Some(&mut (v, parent_edge, ref mut pos)) = stack.last_mut() {
        if *pos < adj[v].len() {
            let (w, k) = adj[v][*pos];
            *pos += 1;
            if Some(k) == parent_edge {
                continue;
            }
            if disc[w] == UNSEEN {
                disc[w] = timer;
                low[w] = timer;
                timer += 1;
                stack.push((w, Some(k), 0));
            } else {
                low[v] = low[v].min(disc[w]);
            }
        } else {
            stack.pop();
            if let Some(&(u, _, _)) = stack.last() {
                low[u] = low[u].min(low[v]);
                if low[v] > disc[u] {
                    out.push(parent_edge.expect("non-root has a parent edge"));
                }
            }
        }
    }
    out.sort_unstable();
    Ok(out)
}

pub fn is_two_edge_connected(q: &Quiver) -> Result<bool> {
    Ok(bridges(q)?.is_empty())
}

/// `b(Q) = 1 − #Q₀ + #Q₁`.
pub fn b_invariant(q: &Quiver) -> i64 {
    1 - q.num_vertices() as i64 + q.num_arrows() as i64
}

/// `b(Q) > Σ_k b(block_k)` for every set partition of the vertices into at
/// least two blocks, where each block contributes `1 − #block + #arrows
/// inside it`.
pub fn two_connected_via_decompositions(q: &Quiver) -> bool {
    let n = q.num_vertices();
    let total = b_invariant(q);
    let mut ok = true;
    for_each_set_partition(n, |labels, blocks| {
        if blocks < 2 || !ok {
            return;
        }
        let mut inside = vec![0i64; blocks];
        let mut sizes = vec![0i64; blocks];
        for &l in labels {
            sizes[l] += 1;
        }
        for a in q.arrows() {
            if labels[a.src] == labels[a.tgt] {
                inside[labels[a.src]] += 1;
            }
        }
        let parts: i64 = (0..blocks).map(|b| 1 - sizes[b] + inside[b]).sum();
        if total <= parts {
            ok = false;
        }
    });
    ok
}

/// Calls `f(labels, block_count)` for every set partition of `0..n`, given
/// as a restricted growth string.
pub fn for_each_set_partition(n: usize, mut f: impl FnMut(&[usize], usize)) {
    fn rec(labels: &mut Vec<usize>, n: usize, blocks: usize, f: &mut dyn FnMut(&[usize], usize)) {
        if labels.len() == n {
            f(labels, blocks);
            return;
        }
        for l in 0..=blocks {
            labels.push(l);
            rec(labels, n, blocks.max(l + 1), f);
            labels.pop();
        }
    }
    let mut labels = Vec::with_capacity(n);
    rec(&mut labels, n, 0, &mut f);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bridge_examples() {
        assert_eq!(bridges(&Quiver::a2()).unwrap(), vec![0]);
        assert!(!is_two_edge_connected(&Quiver::a2()).unwrap());
        assert!(bridges(&Quiver::cycle(3)).unwrap().is_empty());
        assert!(is_two_edge_connected(&Quiver::jordan()).unwrap());
        assert!(is_two_edge_connected(&Quiver::kronecker()).unwrap());
        let split = Quiver::from_counts(&[0, 0], &[]).unwrap();
        assert_eq!(bridges(&split), Err(Error::Disconnected));
    }

    #[test]
    fn bridge_between_two_cycles() {
        // two triangles joined by the arrow 2 -> 3
        let q = Quiver::with_numbered_vertices(
            6,
            vec![(0, 1), (1, 2), (2, 0), (2, 3), (3, 4), (4, 5), (5, 3)],
        )
        .unwrap();
        assert_eq!(bridges(&q).unwrap(), vec![3]);
    }

    #[test]
    fn b_invariant_examples() {
        assert_eq!(b_invariant(&Quiver::a2()), 0);
        assert!(!two_connected_via_decompositions(&Quiver::a2()));
        assert_eq!(b_invariant(&Quiver::cycle(3)), 1);
        assert!(two_connected_via_decompositions(&Quiver::cycle(3)));
    }

    #[test]
    fn bell_numbers() {
        for (n, bell) in [(0, 1), (1, 1), (2, 2), (3, 5), (4, 15), (5, 52)] {
            let mut c = 0;
            for_each_set_partition(n, |_, _| c += 1);
            assert_eq!(c, bell);
        }
    }
}
