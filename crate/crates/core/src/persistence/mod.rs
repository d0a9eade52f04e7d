//! Barcodes, minimal spanning trees and persistence reduction.

mod barcode;
mod cohomology;
mod mst;
mod reduce;

pub use barcode::{count_longer, count_spanning, Barcode, Interval};
pub use cohomology::{reduce_dual, reduce_dual_pairs};
pub use mst::{mst, mst_of_cloud, ph0_from_mst, ph0_reduced, MstEdge, MstResult};
pub use reduce::{barcode_from_pairing, reduce, reduce_pairs, Pairing};
