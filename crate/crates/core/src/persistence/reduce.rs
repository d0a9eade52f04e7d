//! Boundary-matrix column reduction over `Z/2`.

use super::barcode::{Barcode, Interval};
use crate::complexes::{Filtration, SimplexIndex};
use crate::error::{input, Result};

const NONE: u32 = u32::MAX;

/// Persistence pairs as filtration positions.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Pairing {
    /// `(birth, death)` positions; the death simplex has one more vertex.
    pub pairs: Vec<(usize, usize)>,
    /// Positions of simplices that create a class which never dies.
    pub essential: Vec<usize>,
}

/// Boundary columns in compressed form: facets of simplex `k` are
/// `entries[offsets[k]..offsets[k + 1]]`, ascending.
pub(crate) struct Boundaries {
    pub(crate) offsets: Vec<usize>,
    pub(crate) entries: Vec<u32>,
}

impl Boundaries {
    pub(crate) fn column(&self, k: usize) -> &[u32] {
        &self.entries[self.offsets[k]..self.offsets[k + 1]]
    }
}

/// Facet positions of every simplex, rejecting filtrations that are not face-monotone.
pub(crate) fn boundaries(f: &Filtration) -> Result<Boundaries> {
    let index = SimplexIndex::new(f);
    let mut offsets = Vec::with_capacity(f.len() + 1);
    let mut entries = Vec::new();
    offsets.push(0);
    for (k, s) in f.iter().enumerate() {
        let start = entries.len();
        for facet in s.simplex.facets() {
            match index.get(&facet) {
                Some(pos) if pos < k => entries.push(pos as u32),
                Some(_) => {
                    return input(format!(
                        "filtration is not face-monotone: {:?} enters before its facet {:?}",
                        s.simplex.vertices(),
                        facet.as_slice()
                    ))
                }
                None => {
                    return input(format!(
                        "facet {:?} of {:?} is missing from the filtration",
                        facet.as_slice(),
                        s.simplex.vertices()
                    ))
                }
            }
        }
        entries[start..].sort_unstable();
        offsets.push(entries.len());
    }
    Ok(Boundaries { offsets, entries })
}

/// Symmetric difference of two ascending lists.
pub(crate) fn add_columns(a: &[u32], b: &[u32]) -> Vec<u32> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// Standard column reduction with clearing.
///
/// Dimensions are processed from the top down; a simplex that is the pivot
/// of a reduced column is known to have a zero column and is skipped.
pub fn reduce_pairs(f: &Filtration) -> Result<Pairing> {
    let bd = boundaries(f)?;
    let n = f.len();
    let max_dim = f.max_dim().unwrap_or(0);
    let mut by_dim: Vec<Vec<usize>> = vec![Vec::new(); max_dim + 1];
    for (k, s) in f.iter().enumerate() {
        by_dim[s.simplex.dim()].push(k);
    }
    let mut owner = vec![NONE; n];
    let mut cleared = vec![false; n];
    let mut reduced: Vec<Vec<u32>> = vec![Vec::new(); n];
    let mut is_death = vec![false; n];
    let mut pairs = Vec::new();
    for dim in (1..=max_dim).rev() {
        for &j in &by_dim[dim] {
            if cleared[j] {
                continue;
            }
            let mut col = bd.column(j).to_vec();
            while let Some(&low) = col.last() {
                match owner[low as usize] {
                    NONE => break,
                    o => col = add_columns(&col, &reduced[o as usize]),
                }
            }
            if let Some(&low) = col.last() {
                owner[low as usize] = j as u32;
                cleared[low as usize] = true;
                is_death[j] = true;
                pairs.push((low as usize, j));
                reduced[j] = col;
            }
        }
    }
    pairs.sort_unstable();
    let essential = (0..n).filter(|&k| !cleared[k] && !is_death[k]).collect();
    Ok(Pairing { pairs, essential })
}

/// Converts pairs into a reduced barcode.
///
/// Pairs with equal birth and death values are dropped. One essential
/// degree-0 class, the oldest, is removed for reduced homology.
pub fn barcode_from_pairing(f: &Filtration, pairing: &Pairing) -> Barcode {
    let degrees = f.max_dim().unwrap_or(0) + 1;
    let mut finite: Vec<Vec<Interval>> = vec![Vec::new(); degrees];
    let mut essential: Vec<Vec<f64>> = vec![Vec::new(); degrees];
    let s = f.simplices();
    for &(b, d) in &pairing.pairs {
        let (birth, death) = (s[b].value, s[d].value);
        if death > birth {
            finite[s[b].simplex.dim()].push(Interval { birth, death });
        }
    }
    let mut oldest_vertex_removed = false;
    for &k in &pairing.essential {
        let dim = s[k].simplex.dim();
        if dim == 0 && !oldest_vertex_removed {
            // essentials are in filtration order, so this is the oldest
            oldest_vertex_removed = true;
            continue;
        }
        essential[dim].push(s[k].value);
    }
    Barcode::from_parts(finite, essential)
}

/// Reduced persistent homology of a filtration.
pub fn reduce(f: &Filtration) -> Result<Barcode> {
    let pairing = reduce_pairs(f)?;
    Ok(barcode_from_pairing(f, &pairing))
}
