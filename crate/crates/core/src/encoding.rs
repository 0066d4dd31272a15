//! Two-bit encoding of the refinement history.
//!
//! Nodes are visited breadth first, roots in order and children in the
//! order they are stored. Each visited triangle emits `00` when it is a
//! leaf, or the code `01`, `10`, `11` of the bisected edge `a`, `b`, `c`.
//! A decoder that knows the initial triangles rebuilds the same partition.
//!
//! File layout: the magic `ATB1`, `N_0` as a big-endian `u32`, then the
//! codes packed most significant bit first, zero padded to a byte.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::geometry::{Edge, NodeId, Triangle};
use crate::tree::{BisectionTree, SplitKind};

pub const MAGIC: &[u8; 4] = b"ATB1";

/// Packed two-bit codes.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BitStream {
    pub n0: u32,
    bytes: Vec<u8>,
    len: usize,
}

impl BitStream {
    pub fn new(n0: u32) -> BitStream {
        BitStream {
            n0,
            ..Default::default()
        }
    }

    /// Length in bits, without padding or header.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn push_code(&mut self, code: u8) {
        debug_assert!(code < 4);
        if self.len.is_multiple_of(8) {
            self.bytes.push(0);
        }
        let shift = 6 - (self.len % 8);
        *self.bytes.last_mut().expect("byte pushed above") |= (code & 3) << shift;
        self.len += 2;
    }

    /// Code number `k` (bits `2k, 2k + 1`).
    pub fn code(&self, k: usize) -> Option<u8> {
        let bit = 2 * k;
        if bit + 2 > self.len {
            return None;
        }
        Some((self.bytes[bit / 8] >> (6 - bit % 8)) & 3)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(8 + self.bytes.len());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&self.n0.to_be_bytes());
        out.extend_from_slice(&self.bytes);
        out
    }

    /// Parses a file image. The code count is not stored; every complete
    /// code in the payload is kept and [`decode`] checks the padding.
    pub fn from_bytes(data: &[u8]) -> Result<BitStream> {
        if data.len() < 8 || &data[..4] != MAGIC {
            return Err(Error::BitStream {
                position: 0,
                reason: "missing ATB1 header".into(),
            });
        }
        let n0 = u32::from_be_bytes([data[4], data[5], data[6], data[7]]);
        let bytes = data[8..].to_vec();
        let len = bytes.len() * 8;
        Ok(BitStream { n0, bytes, len })
    }
}

/// Breadth-first code sequence of `tree`.
pub fn encode(tree: &BisectionTree) -> BitStream {
    let mut bits = BitStream::new(tree.n0() as u32);
    let mut queue: VecDeque<NodeId> = tree.roots().iter().copied().collect();
    while let Some(id) = queue.pop_front() {
        let node = tree.node(id);
        match (node.children, node.edge) {
            (Some(children), Some(edge)) => {
                bits.push_code(edge.code());
                queue.extend(children);
            }
            _ => bits.push_code(0),
        }
    }
    bits
}

/// Rebuilds the tree skeleton from `d0` and the codes. Splits along the
/// newest vertex edge are marked as newest-vertex splits, all others as
/// greedy. Node ids follow the breadth-first order of the stream.
pub fn decode(bits: &BitStream, d0: &[Triangle]) -> Result<BisectionTree> {
    if bits.n0 as usize != d0.len() {
        return Err(Error::BitStream {
            position: 32,
            reason: format!(
                "stream has N0 = {}, got {} initial triangles",
                bits.n0,
                d0.len()
            ),
        });
    }
    let mut tree = BisectionTree::skeleton(d0)?;
    let mut queue: VecDeque<NodeId> = tree.roots().iter().copied().collect();
    let mut k = 0;
    while let Some(id) = queue.pop_front() {
        let code = bits.code(k).ok_or_else(|| Error::BitStream {
            position: 2 * k,
            reason: "stream ends before the tree is complete".into(),
        })?;
        k += 1;
        if let Some(edge) = Edge::from_code(code) {
            let t = tree.node(id).triangle;
            let kind = if edge == t.newest_vertex_edge() {
                SplitKind::Newest
            } else {
                SplitKind::Greedy
            };
            queue.extend(tree.split_geometry(id, edge, kind));
        }
    }
    // only zero padding may follow, and less than a byte of it
    let used = 2 * k;
    if bits.len() >= used.div_ceil(8) * 8 + 8
        || (used..bits.len())
            .step_by(2)
            .any(|b| bits.code(b / 2) != Some(0))
    {
        return Err(Error::BitStream {
            position: used,
            reason: "trailing data after the last code".into(),
        });
    }
    Ok(tree)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::unit_square_d0;

    #[test]
    fn roots_only() {
        let d0 = unit_square_d0();
        let tree = BisectionTree::skeleton(&d0).unwrap();
        let bits = encode(&tree);
        assert_eq!(bits.len(), 4);
        assert_eq!(bits.to_bytes(), b"ATB1\0\0\0\x02\0".to_vec());
    }

    #[test]
    fn packing_is_msb_first() {
        let mut b = BitStream::new(1);
        for c in [1, 2, 3, 0, 3] {
            b.push_code(c);
        }
        assert_eq!(b.to_bytes()[8..], [0b0110_1100, 0b1100_0000]);
        assert_eq!(b.code(4), Some(3));
        assert_eq!(b.code(5), None);
    }

    #[test]
    fn roundtrip_through_bytes() {
        let d0 = unit_square_d0();
        let mut tree = BisectionTree::skeleton(&d0).unwrap();
        let [a, _] = tree.split_geometry(0, Edge::B, SplitKind::Greedy);
        tree.split_geometry(1, Edge::A, SplitKind::Greedy);
        tree.split_geometry(a, Edge::C, SplitKind::Greedy);
        let bits = encode(&tree);
        let back = decode(&BitStream::from_bytes(&bits.to_bytes()).unwrap(), &d0).unwrap();
        let mut x: Vec<_> = tree.leaf_triangles().iter().map(|t| t.vertices).collect();
        let mut y: Vec<_> = back.leaf_triangles().iter().map(|t| t.vertices).collect();
        let key = |v: &[crate::geometry::Point2; 3]| v.map(|p| (p.x.to_bits(), p.y.to_bits()));
        x.sort_by_key(key);
        y.sort_by_key(key);
        assert_eq!(x, y);
        assert_eq!(bits.len(), 2 * tree.node_count());
    }

    #[test]
    fn malformed_streams() {
        let d0 = unit_square_d0();
        assert!(BitStream::from_bytes(b"ATB0\0\0\0\x02\0").is_err());
        // N0 mismatch
        let b = BitStream::from_bytes(b"ATB1\0\0\0\x03\0").unwrap();
        assert!(decode(&b, &d0).is_err());
        // four splits, then the stream ends
        let b = BitStream::from_bytes(b"ATB1\0\0\0\x02\x55").unwrap();
        match decode(&b, &d0) {
            Err(Error::BitStream { position, .. }) => assert_eq!(position, 8),
            other => panic!("unexpected {other:?}"),
        }
        // a stray nonzero code after the last one
        let b = BitStream::from_bytes(b"ATB1\0\0\0\x02\x01").unwrap();
        assert!(decode(&b, &d0).is_err());
        // an extra zero byte
        let b = BitStream::from_bytes(b"ATB1\0\0\0\x02\0\0").unwrap();
        assert!(decode(&b, &d0).is_err());
    }
}
