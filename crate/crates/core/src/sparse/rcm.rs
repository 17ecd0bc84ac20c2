//! Reverse Cuthill-McKee ordering.

use std::collections::VecDeque;

use super::CrsMatrix;
use crate::error::SparseError;

/// Returns `(P A P^T, perm)` where `perm[old] = new`.
pub fn rcm_reorder(a: &CrsMatrix) -> Result<(CrsMatrix, Vec<u32>), SparseError> {
    let perm = rcm_permutation(a)?;
    Ok((a.permute_symmetric(&perm)?, perm))
}

pub fn rcm_permutation(a: &CrsMatrix) -> Result<Vec<u32>, SparseError> {
    if !a.is_square() {
        return Err(SparseError::NotSquare {
            nrows: a.nrows,
            ncols: a.ncols,
        });
    }
    let n = a.nrows;
    let adj = symmetric_adjacency(a);
    let degree: Vec<usize> = adj.iter().map(Vec::len).collect();

    let mut by_degree: Vec<usize> = (0..n).collect();
    by_degree.sort_by_key(|&v| (degree[v], v));

    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut queue = VecDeque::new();
    let mut nbrs = Vec::new();
    for &start in &by_degree {
        if visited[start] {
            continue;
        }
        visited[start] = true;
        queue.push_back(start);
        let first = order.len();
        while let Some(v) = queue.pop_front() {
            order.push(v);
            nbrs.clear();
            nbrs.extend(adj[v].iter().copied().filter(|&u| !visited[u]));
            nbrs.sort_by_key(|&u| (degree[u], u));
            for &u in &nbrs {
                visited[u] = true;
                queue.push_back(u);
            }
        }
        // reverse each component in place so components keep their order
        order[first..].reverse();
    }
    let mut perm = vec![0u32; n];
    for (new, &old) in order.iter().enumerate() {
        perm[old] = new as u32;
    }
    Ok(perm)
}

/// Neighbor lists of the pattern of `A + A^T` without self loops.
fn symmetric_adjacency(a: &CrsMatrix) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); a.nrows];
    for (i, j, _) in a.triplets() {
        if i != j {
            adj[i].push(j);
            adj[j].push(i);
        }
    }
    for list in &mut adj {
        list.sort_unstable();
        list.dedup();
    }
    adj
}
