//! Thread-safe memo for the Gibbs coefficient recursion.

use std::collections::HashMap;

use num_bigint::BigUint;
use parking_lot::RwLock;
use permlab_core::coefficients::GibbsMemo;

/// `C_M(γ)` cache shared by worker threads. When two threads finish the same
/// key, the first stored value wins; both values are equal anyway since the
/// recursion is deterministic.
#[derive(Debug, Default)]
pub struct SharedMemo {
    table: RwLock<HashMap<Vec<u32>, BigUint>>,
}

impl SharedMemo {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.table.read().len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.read().is_empty()
    }
}

impl GibbsMemo for SharedMemo {
    fn lookup(&self, key: &[u32]) -> Option<BigUint> {
        self.table.read().get(key).cloned()
    }

    fn store(&self, key: Vec<u32>, value: BigUint) -> BigUint {
        self.table.write().entry(key).or_insert(value).clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_writer_wins() {
        let memo = SharedMemo::new();
        assert!(memo.is_empty());
        assert_eq!(memo.store(vec![1, 2], BigUint::from(5u32)), BigUint::from(5u32));
        assert_eq!(memo.store(vec![1, 2], BigUint::from(7u32)), BigUint::from(5u32));
        assert_eq!(memo.lookup(&[1, 2]), Some(BigUint::from(5u32)));
        assert_eq!(memo.lookup(&[2, 1]), None);
        assert_eq!(memo.len(), 1);
    }
}
