//! Small exhaustive corpora of quivers, dimension vectors and multigraphs.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::forms::is_totally_negative;
use crate::quiver::{DimVector, Quiver};
use crate::simple::has_property_p;

/// All permutations of `0..n` in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut p: Vec<usize> = (0..n).collect();
    let mut out = vec![p.clone()];
    loop {
        let Some(i) = (1..n).rev().find(|&i| p[i - 1] < p[i]) else {
            return out;
        };
        let j = (i..n).rev().find(|&j| p[j] > p[i - 1]).expect("pivot has a successor");
        p.swap(i - 1, j);
        p[i..].reverse();
        out.push(p.clone());
    }
}

fn pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect()
}

/// Loop counts, pair counts in `pairs(n)` order and dimension entries,
/// minimized over vertex relabelings.
fn canonical_key(loops: &[usize], between: &[usize], d: &[u32], perms: &[Vec<usize>]) -> Vec<usize> {
    let n = loops.len();
    let ps = pairs(n);
    let index = |i: usize, j: usize| ps.iter().position(|&p| p == (i.min(j), i.max(j))).expect("pair");
    perms
        .iter()
        .map(|p| {
            let mut key: Vec<usize> = p.iter().map(|&i| loops[i]).collect();
            key.extend(ps.iter().map(|&(i, j)| between[index(p[i], p[j])]));
            key.extend(p.iter().map(|&i| d.get(i).map_or(0, |&x| x as usize)));
            key
        })
        .min()
        .expect("at least one permutation")
}

fn build(loops: &[usize], between: &[usize]) -> Quiver {
    let counts: Vec<_> = pairs(loops.len()).into_iter().zip(between.iter().copied()).collect();
    Quiver::from_counts(loops, &counts).expect("valid counts")
}

/// Every tuple in `0..=max` of length `len`, first entry slowest.
fn tuples(len: usize, max: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|t| {
                (0..=max).map(move |x| {
                    let mut t = t.clone();
                    t.push(x);
                    t
                })
            })
            .collect();
    }
    out
}

/// Every quiver on `1..=max_vertices` numbered vertices with at most
/// `max_loops` loops per vertex and `max_arrows` arrows per pair, oriented
/// from the smaller index. Labelled: isomorphic quivers recur.
pub fn small_quiver_corpus(max_vertices: usize, max_loops: usize, max_arrows: usize) -> Vec<Quiver> {
    let mut out = Vec::new();
    for n in 1..=max_vertices {
        for loops in tuples(n, max_loops) {
            for between in tuples(pairs(n).len(), max_arrows) {
                out.push(build(&loops, &between));
            }
        }
    }
    out
}

/// Property-(P) pairs with at most `max_vertices` vertices, at most three
/// loops per vertex and three arrows per pair, and entries `≤ max_entry`,
/// one per relabeling class.
pub fn property_p_catalog(max_vertices: usize, max_entry: u32) -> Result<Vec<(Quiver, DimVector)>> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for n in 1..=max_vertices {
        let perms = permutations(n);
        for loops in tuples(n, 3) {
            for between in tuples(pairs(n).len(), 3) {
                let q = build(&loops, &between);
                if !is_totally_negative(&q).totally_negative {
                    continue;
                }
                for d in tuples(n, max_entry as usize) {
                    let d: Vec<u32> = d.into_iter().map(|x| x as u32).collect();
                    let dv = DimVector::new(d.clone());
                    if dv.is_zero() || !has_property_p(&q, &dv)? {
                        continue;
                    }
                    if seen.insert(canonical_key(&loops, &between, &d, &perms)) {
                        out.push((q.clone(), dv));
                    }
                }
            }
        }
    }
    Ok(out)
}

/// `count` catalog pairs drawn without replacement by a seeded shuffle.
pub fn sample_property_p_pairs(max_vertices: usize, max_entry: u32, count: usize, seed: u64) -> Result<Vec<(Quiver, DimVector)>> {
    let mut all = property_p_catalog(max_vertices, max_entry)?;
    all.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    all.truncate(count);
    Ok(all)
}

/// Connected loopless multigraphs on `1..=max_vertices` vertices with at
/// most `max_edges` edges, one per isomorphism class.
pub fn multigraph_corpus(max_vertices: usize, max_edges: usize) -> Vec<Quiver> {
    fn rec(slot: usize, left: usize, counts: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if slot == counts.len() {
            out.push(counts.clone());
            return;
        }
        for k in 0..=left {
            counts[slot] = k;
            rec(slot + 1, left - k, counts, out);
        }
        counts[slot] = 0;
    }
    let mut out = Vec::new();
    for n in 1..=max_vertices {
        let perms = permutations(n);
        let mut all = Vec::new();
        rec(0, max_edges, &mut vec![0; pairs(n).len()], &mut all);
        let mut seen = BTreeSet::new();
        let loops = vec![0; n];
        for between in all {
            let q = build(&loops, &between);
            if q.is_connected() && seen.insert(canonical_key(&loops, &between, &[], &perms)) {
                out.push(q);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn permutation_counts() {
        assert_eq!(permutations(0).len(), 1);
        assert_eq!(permutations(3), vec![
            vec![0, 1, 2],
            vec![0, 2, 1],
            vec![1, 0, 2],
            vec![1, 2, 0],
            vec![2, 0, 1],
            vec![2, 1, 0]
        ]);
        assert_eq!(permutations(5).len(), 120);
    }

    #[test]
    fn corpus_size() {
        // 4 + 4²·4 + 4³·4³
        assert_eq!(small_quiver_corpus(3, 3, 3).len(), 4 + 64 + 4096);
    }

    #[test]
    fn catalog_is_deduplicated() {
        let cat = property_p_catalog(2, 2).unwrap();
        // one vertex: loops 2,3 and d 1,2
        assert_eq!(cat.iter().filter(|(q, _)| q.num_vertices() == 1).count(), 4);
        for (q, d) in &cat {
            assert!(has_property_p(q, d).unwrap());
        }
        let swapped = cat.iter().any(|(q, d)| {
            q.num_vertices() == 2 && q.loops(0) == 3 && q.loops(1) == 2 && d.entries() == [1, 1]
        });
        let kept = cat.iter().any(|(q, d)| {
            q.num_vertices() == 2 && q.loops(0) == 2 && q.loops(1) == 3 && d.entries() == [1, 1]
        });
        assert!(kept && !swapped);
    }

    #[test]
    fn small_multigraph_counts() {
        // connected multigraphs on 2 vertices with 1..=3 edges, and the point
        assert_eq!(multigraph_corpus(2, 3).len(), 4);
        // three vertices, ≤ 2 edges: only the path
        assert_eq!(multigraph_corpus(3, 2).iter().filter(|q| q.num_vertices() == 3).count(), 1);
    }
}
