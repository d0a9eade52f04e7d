//! Persistent cohomology reduction with clearing.
//!
//! Produces the same pairs as boundary reduction but works on coboundary
//! columns, processed from the youngest simplex to the oldest. For flag
//! complexes almost every edge is paired with its earliest coface at once,
//! which keeps large Rips filtrations cheap. Degree 0 uses union-find with
//! the elder rule.

use super::barcode::Barcode;
use super::mst::UnionFind;
use super::reduce::{add_columns, barcode_from_pairing, boundaries, Pairing};
use crate::complexes::Filtration;
use crate::error::Result;

const NONE: u32 = u32::MAX;

pub fn reduce_dual_pairs(f: &Filtration) -> Result<Pairing> {
    let bd = boundaries(f)?;
    let n = f.len();
    let s = f.simplices();
    let max_dim = f.max_dim().unwrap_or(0);
    let dims: Vec<usize> = s.iter().map(|x| x.simplex.dim()).collect();

    let mut is_birth = vec![false; n];
    let mut is_death = vec![false; n];
    let mut pairs = Vec::new();

    // degree 0: the younger component dies at each merging edge
    let mut uf = UnionFind::new(n);
    let mut oldest: Vec<u32> = (0..n as u32).collect();
    for k in (0..n).filter(|&k| dims[k] == 1) {
        let col = bd.column(k);
        let (ra, rb) = (uf.find(col[0]), uf.find(col[1]));
        if ra == rb {
            continue;
        }
        let (oa, ob) = (oldest[ra as usize], oldest[rb as usize]);
        let root = uf.union(ra, rb).unwrap();
        oldest[root as usize] = oa.min(ob);
        let younger = oa.max(ob) as usize;
        pairs.push((younger, k));
        is_birth[younger] = true;
        is_death[k] = true;
    }

    if max_dim >= 2 {
        // coboundaries of simplices in dimensions 1..max_dim, ascending by construction
        let mut counts = vec![0u32; n + 1];
        for k in 0..n {
            if dims[k] >= 2 {
                for &facet in bd.column(k) {
                    counts[facet as usize + 1] += 1;
                }
            }
        }
        let mut offsets = vec![0usize; n + 1];
        for k in 0..n {
            offsets[k + 1] = offsets[k] + counts[k + 1] as usize;
        }
        let mut fill = offsets.clone();
        let mut cofaces = vec![0u32; offsets[n]];
        for k in 0..n {
            if dims[k] >= 2 {
                for &facet in bd.column(k) {
                    cofaces[fill[facet as usize]] = k as u32;
                    fill[facet as usize] += 1;
                }
            }
        }

        let mut owner = vec![NONE; n];
        let mut store: Vec<Vec<u32>> = Vec::new();
        for dim in 1..max_dim {
            for j in (0..n).rev().filter(|&j| dims[j] == dim) {
                if is_death[j] {
                    continue;
                }
                let mut col = cofaces[offsets[j]..offsets[j + 1]].to_vec();
                while let Some(&pivot) = col.first() {
                    match owner[pivot as usize] {
                        NONE => break,
                        o => col = add_columns(&col, &store[o as usize]),
                    }
                }
                if let Some(&pivot) = col.first() {
                    owner[pivot as usize] = store.len() as u32;
                    store.push(col);
                    pairs.push((j, pivot as usize));
                    is_birth[j] = true;
                    is_death[pivot as usize] = true;
                }
            }
        }
    }

    pairs.sort_unstable();
    let essential = (0..n).filter(|&k| !is_birth[k] && !is_death[k]).collect();
    Ok(Pairing { pairs, essential })
}

/// Reduced persistent homology via cohomology; same barcode as [`super::reduce`].
pub fn reduce_dual(f: &Filtration) -> Result<Barcode> {
    let pairing = reduce_dual_pairs(f)?;
    Ok(barcode_from_pairing(f, &pairing))
}
