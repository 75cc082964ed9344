//! Binary Merkle tree over SHA-256 leaf hashes; an odd node at any level is
//! paired with itself.

use crate::crypto::hash::sha256;
use crate::crypto::Digest32;
use crate::error::{Error, Result};

fn node(l: &Digest32, r: &Digest32) -> Digest32 {
    let mut buf = [0u8; 64];
    buf[..32].copy_from_slice(l);
    buf[32..].copy_from_slice(r);
    sha256(&buf)
}

fn levels(leaves: &[&[u8]]) -> Result<Vec<Vec<Digest32>>> {
    if leaves.is_empty() {
        return Err(Error::EmptyInput("merkle leaves"));
    }
    let mut level: Vec<Digest32> = leaves.iter().map(|l| sha256(l)).collect();
    let mut out = Vec::new();
    loop {
        if level.len() % 2 == 1 {
            level.push(*level.last().unwrap());
        }
        let next: Vec<Digest32> = level.chunks(2).map(|p| node(&p[0], &p[1])).collect();
        out.push(level);
        if next.len() == 1 {
            out.push(next);
            return Ok(out);
        }
        level = next;
    }
}

pub fn merkle_root(leaves: &[&[u8]]) -> Result<Digest32> {
    Ok(levels(leaves)?.last().unwrap()[0])
}

/// All tree levels, for serving many proofs from one build.
#[derive(Debug, Clone)]
pub struct MerkleTree {
    levels: Vec<Vec<Digest32>>,
    leaves: usize,
}

impl MerkleTree {
    pub fn new(leaves: &[&[u8]]) -> Result<Self> {
        Ok(MerkleTree {
            levels: levels(leaves)?,
            leaves: leaves.len(),
        })
    }

    pub fn root(&self) -> Digest32 {
        self.levels.last().unwrap()[0]
    }

    pub fn proof(&self, index: usize) -> Result<MerkleProof> {
        if index >= self.leaves {
            return Err(Error::Range(format!(
                "leaf {index} out of {} leaves",
                self.leaves
            )));
        }
        let mut i = index;
        let mut path = Vec::with_capacity(self.levels.len());
        for level in &self.levels[..self.levels.len() - 1] {
            let sib = i ^ 1;
            path.push((level[sib], sib < i));
            i /= 2;
        }
        Ok(MerkleProof { index, path })
    }
}

/// Sibling path from a leaf to the root.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MerkleProof {
    pub index: usize,
    /// `(sibling, sibling_is_left)` from the leaf level upwards.
    pub path: Vec<(Digest32, bool)>,
}

pub fn merkle_proof(leaves: &[&[u8]], index: usize) -> Result<MerkleProof> {
    MerkleTree::new(leaves)?.proof(index)
}

pub fn verify_proof(root: &Digest32, leaf: &[u8], proof: &MerkleProof) -> bool {
    let mut acc = sha256(leaf);
    for (sib, left) in &proof.path {
        acc = if *left { node(sib, &acc) } else { node(&acc, sib) };
    }
    &acc == root
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn small_trees() {
        let (ha, hb) = (sha256(b"a"), sha256(b"b"));
        assert_eq!(merkle_root(&[b"a"]).unwrap(), node(&ha, &ha));
        assert_eq!(merkle_root(&[b"a", b"b"]).unwrap(), node(&ha, &hb));
        let hc = sha256(b"c");
        assert_eq!(
            merkle_root(&[b"a", b"b", b"c"]).unwrap(),
            node(&node(&ha, &hb), &node(&hc, &hc))
        );
        assert!(matches!(merkle_root(&[]), Err(Error::EmptyInput(_))));
    }

    #[test]
    fn every_leaf_changes_root() {
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let leaves: Vec<Vec<u8>> = (0..200).map(|_| rng.gen::<[u8; 16]>().to_vec()).collect();
        let refs: Vec<&[u8]> = leaves.iter().map(|v| v.as_slice()).collect();
        let root = merkle_root(&refs).unwrap();
        for i in 0..leaves.len() {
            let mut changed = leaves[i].clone();
            changed[0] ^= 1;
            let mut refs2 = refs.clone();
            refs2[i] = &changed;
            assert_ne!(merkle_root(&refs2).unwrap(), root, "leaf {i}");
        }
    }

    #[test]
    fn proofs_verify() {
        for n in [1usize, 2, 3, 7, 8, 13] {
            let leaves: Vec<Vec<u8>> = (0..n).map(|i| vec![i as u8; 5]).collect();
            let refs: Vec<&[u8]> = leaves.iter().map(|v| v.as_slice()).collect();
            let root = merkle_root(&refs).unwrap();
            for i in 0..n {
                let p = merkle_proof(&refs, i).unwrap();
                assert!(verify_proof(&root, refs[i], &p));
                assert!(!verify_proof(&root, b"other", &p));
            }
        }
    }
}
