//! Bounded discrete logarithms by baby-step giant-step.
//!
//! Baby-step tables are cached per base and shared between threads. Table
//! keys are the first eight bytes of the compressed form of `2·(j·base)`,
//! computed in batches with one field inversion per batch; every candidate
//! hit is confirmed by a scalar multiplication, so key truncation can cost a
//! wasted lookup but never a wrong answer.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use crate::crypto::{GroupPoint, Scalar};
use crate::error::{Error, Result};

/// Largest admissible search window `hi − lo`.
pub const MAX_RANGE: u64 = 1 << 40;
/// Baby-step table size cap.
pub const MAX_TABLE: u64 = 1 << 20;
/// Baby steps per `sqrt(range)`; trades table memory for fewer giant steps
/// since tables are built once and reused.
const TABLE_FACTOR: u64 = 16;
const BATCH: usize = 512;

struct BabyTable {
    size: u64,
    keys: HashMap<u64, u32>,
}

fn key_of(compressed: &[u8; 32]) -> u64 {
    u64::from_le_bytes(compressed[..8].try_into().unwrap())
}

impl BabyTable {
    fn build(base: GroupPoint, size: u64) -> Self {
        let mut keys = HashMap::with_capacity(size as usize);
        let mut current = GroupPoint::identity();
        let mut j = 0u64;
        let mut chunk = Vec::with_capacity(BATCH);
        while j < size {
            chunk.clear();
            while chunk.len() < BATCH && j + (chunk.len() as u64) < size {
                chunk.push(current);
                current += base;
            }
            for (offset, c) in GroupPoint::double_and_compress_batch(&chunk).iter().enumerate() {
                keys.entry(key_of(c)).or_insert((j + offset as u64) as u32);
            }
            j += chunk.len() as u64;
        }
        BabyTable { size, keys }
    }
}

/// Baby-step giant-step solver with a per-base table cache.
#[derive(Default)]
pub struct DlogSolver {
    tables: RwLock<HashMap<[u8; 40], Arc<BabyTable>>>,
}

impl DlogSolver {
    pub fn new() -> Self {
        Self::default()
    }

    /// Process-wide solver.
    pub fn global() -> &'static DlogSolver {
        static GLOBAL: OnceLock<DlogSolver> = OnceLock::new();
        GLOBAL.get_or_init(DlogSolver::new)
    }

    fn table(&self, base: GroupPoint, size: u64) -> Arc<BabyTable> {
        let id = base.to_bytes();
        if let Some(t) = self.tables.read().unwrap().get(&id) {
            if t.size >= size {
                return t.clone();
            }
        }
        let built = Arc::new(BabyTable::build(base, size));
        let mut tables = self.tables.write().unwrap();
        let entry = tables.entry(id).or_insert_with(|| built.clone());
        if entry.size < size {
            *entry = built;
        }
        entry.clone()
    }

    /// Finds `k ∈ [lo, hi]` with `k·base = target`.
    pub fn solve(&self, target: GroupPoint, base: GroupPoint, lo: i64, hi: i64) -> Result<i64> {
        if lo > hi {
            return Err(Error::Range(format!("empty dlog window [{lo}, {hi}]")));
        }
        let len = (hi as i128 - lo as i128) as u64;
        if len > MAX_RANGE {
            return Err(Error::Range(format!(
                "dlog window {len} exceeds 2^40"
            )));
        }
        if base.is_identity() {
            return Err(Error::Range("dlog base is the identity".into()));
        }
        // Search k' = k − lo in [0, len].
        let shifted = target - base * Scalar::from_i64(lo);
        let count = len + 1;
        let want = ((count as f64).sqrt().ceil() as u64)
            .saturating_mul(TABLE_FACTOR)
            .next_power_of_two()
            .clamp(1, MAX_TABLE);
        let table = self.table(base, want.min(count.next_power_of_two()));
        let m = table.size;
        let giant = -(base * Scalar::from_u64(m));
        let giant_steps = count.div_ceil(m);

        let mut gamma = shifted;
        let mut i = 0u64;
        let mut chunk = Vec::with_capacity(BATCH);
        while i < giant_steps {
            chunk.clear();
            while chunk.len() < BATCH && i + (chunk.len() as u64) < giant_steps {
                chunk.push(gamma);
                gamma += giant;
            }
            for (offset, c) in GroupPoint::double_and_compress_batch(&chunk).iter().enumerate() {
                if let Some(&j) = table.keys.get(&key_of(c)) {
                    let k = (i + offset as u64) * m + j as u64;
                    if k <= len && base * Scalar::from_u64(k) == shifted {
                        return Ok(lo + k as i64);
                    }
                }
            }
            i += chunk.len() as u64;
        }
        Err(Error::DlogNotFound { lo, hi })
    }
}

/// Finds `k ∈ [lo, hi]` with `k·base = target` using the process-wide cache.
pub fn bsgs_dlog(target: GroupPoint, base: GroupPoint, lo: i64, hi: i64) -> Result<i64> {
    DlogSolver::global().solve(target, base, lo, hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g() -> GroupPoint {
        GroupPoint::generator()
    }

    #[test]
    fn small_examples() {
        assert_eq!(bsgs_dlog(GroupPoint::identity(), g(), 0, 100).unwrap(), 0);
        assert_eq!(bsgs_dlog(g() * Scalar::from_u64(5), g(), 0, 100).unwrap(), 5);
        assert_eq!(bsgs_dlog(g() * Scalar::from_u64(100), g(), 0, 100).unwrap(), 100);
        assert!(matches!(
            bsgs_dlog(g() * Scalar::from_u64(101), g(), 0, 100),
            Err(Error::DlogNotFound { .. })
        ));
    }

    #[test]
    fn agrees_with_brute_force_on_signed_window() {
        // Brute force: walk k·g from −1000 upwards.
        let mut p = g() * Scalar::from_i64(-1000);
        for k in -1000i64..=1000 {
            assert_eq!(bsgs_dlog(p, g(), -1000, 1000).unwrap(), k);
            p += g();
        }
    }

    #[test]
    fn non_generator_base() {
        let base = GroupPoint::hash_to_point(b"base", b"");
        let target = base * Scalar::from_i64(-123_456);
        assert_eq!(bsgs_dlog(target, base, -200_000, 200_000).unwrap(), -123_456);
    }

    #[test]
    fn large_window() {
        let solver = DlogSolver::new();
        for k in [0i64, 1, 3_000_000_000, 3_199_999_999, -3_200_000_000] {
            let t = g() * Scalar::from_i64(k);
            assert_eq!(solver.solve(t, g(), -3_200_000_000, 3_200_000_000).unwrap(), k);
        }
    }

    #[test]
    fn window_guards() {
        assert!(matches!(bsgs_dlog(g(), g(), 5, 4), Err(Error::Range(_))));
        assert!(matches!(
            bsgs_dlog(g(), g(), 0, (1i64 << 40) + 1),
            Err(Error::Range(_))
        ));
        assert!(matches!(
            bsgs_dlog(g(), GroupPoint::identity(), 0, 10),
            Err(Error::Range(_))
        ));
    }
}
