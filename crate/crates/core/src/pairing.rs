//! Explicit pairings of consecutive nonzero-residue labels into pairs whose
//! sums are consecutive multiples of 3.

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PairingError {
    #[error("offset {0} is not a multiple of 3")]
    OffsetNotZeroLabel(u64),
    #[error("pair count must be positive")]
    EmptyBlock,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize)]
pub struct LabelPair {
    pub lo: u64,
    pub hi: u64,
}

impl LabelPair {
    pub fn new(a: u64, b: u64) -> Self {
        Self {
            lo: a.min(b),
            hi: a.max(b),
        }
    }

    pub fn sum(&self) -> u64 {
        self.lo + self.hi
    }
}

fn check(p: u64, k: usize) -> Result<(), PairingError> {
    if p % 3 != 0 {
        return Err(PairingError::OffsetNotZeroLabel(p));
    }
    if k == 0 {
        return Err(PairingError::EmptyBlock);
    }
    Ok(())
}

/// Pairs `{p+3i-2, p+3i-1 : i in 1..=k}`.
///
/// Odd `k`: sums are `2p + 3(k-1)/2 + 3i` for `i in 1..=k`.
/// Even `k`: sums are `2p + 3(k/2+1) + 3i` for `i in 1..k`, plus `2p + 3`.
pub fn pair_j(p: u64, k: usize) -> Result<Vec<LabelPair>, PairingError> {
    check(p, k)?;
    let k = k as u64;
    let mut out = Vec::with_capacity(k as usize);
    if k % 2 == 1 {
        let q = (k - 1) / 2;
        for i in 1..=q + 1 {
            out.push(LabelPair::new(p + 3 * i - 2, p + 3 * (q + i) - 1));
        }
        for i in 1..=q {
            out.push(LabelPair::new(p + 3 * i - 1, p + 3 * (q + 1 + i) - 2));
        }
    } else {
        let q = k / 2;
        out.push(LabelPair::new(p + 1, p + 2));
        for i in 1..=q {
            out.push(LabelPair::new(p + 3 * (i + 1) - 2, p + 3 * (q + i) - 1));
        }
        for i in 1..q {
            out.push(LabelPair::new(p + 3 * (i + 1) - 1, p + 3 * (q + 1 + i) - 2));
        }
    }
    out.sort_unstable_by_key(LabelPair::sum);
    Ok(out)
}

/// Pairs `{p+3i-1, p+3i+1 : i in 1..=k}`.
///
/// Odd `k`: sums are `2p + 3(k+1)/2 + 3i` for `i in 1..=k`.
/// Even `k`: sums are `2p + 3(k/2+2) + 3i` for `i in 1..k`, plus `2p + 6`.
pub fn pair_j_prime(p: u64, k: usize) -> Result<Vec<LabelPair>, PairingError> {
    check(p, k)?;
    let k = k as u64;
    let mut out = Vec::with_capacity(k as usize);
    if k % 2 == 1 {
        let q = (k - 1) / 2;
        for i in 1..=q + 1 {
            out.push(LabelPair::new(p + 3 * i - 1, p + 3 * (q + i) + 1));
        }
        for i in 1..=q {
            out.push(LabelPair::new(p + 3 * i + 1, p + 3 * (q + 1 + i) - 1));
        }
    } else {
        let q = k / 2;
        out.push(LabelPair::new(p + 2, p + 4));
        for i in 1..=q {
            out.push(LabelPair::new(p + 3 * (i + 1) - 1, p + 3 * (q + i) + 1));
        }
        for i in 1..q {
            out.push(LabelPair::new(p + 3 * (i + 1) + 1, p + 3 * (q + 1 + i) - 1));
        }
    }
    out.sort_unstable_by_key(LabelPair::sum);
    Ok(out)
}

/// Pairs a consecutive block `{3i-2 : i in lo..=hi}` with `{3i-1 : i in lo..=hi}`
/// so that every pair has the same sum `3(lo + hi) - 3`.
pub fn pair_constant(lo: u64, hi: u64) -> Vec<LabelPair> {
    (lo..=hi)
        .map(|i| LabelPair::new(3 * i - 2, 3 * (lo + hi - i) - 1))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sums(v: &[LabelPair]) -> Vec<u64> {
        v.iter().map(LabelPair::sum).collect()
    }

    #[test]
    fn j_odd_example() {
        let pairs = pair_j(0, 5).unwrap();
        let mut got: Vec<(u64, u64)> = pairs.iter().map(|p| (p.lo, p.hi)).collect();
        got.sort_unstable();
        assert_eq!(got, vec![(1, 8), (2, 10), (4, 11), (5, 13), (7, 14)]);
        assert_eq!(sums(&pairs), vec![9, 12, 15, 18, 21]);
    }

    #[test]
    fn j_even_example() {
        assert_eq!(sums(&pair_j(0, 6).unwrap()), vec![3, 15, 18, 21, 24, 27]);
    }

    #[test]
    fn j_single_pair() {
        assert_eq!(pair_j(3, 1).unwrap(), vec![LabelPair::new(4, 5)]);
        assert_eq!(pair_j(3, 1).unwrap()[0].sum(), 9);
    }

    #[test]
    fn j_prime_examples() {
        assert_eq!(sums(&pair_j_prime(0, 5).unwrap()), vec![12, 15, 18, 21, 24]);
        assert_eq!(
            sums(&pair_j_prime(0, 6).unwrap()),
            vec![6, 18, 21, 24, 27, 30]
        );
        assert_eq!(pair_j_prime(0, 1).unwrap(), vec![LabelPair::new(2, 4)]);
    }

    #[test]
    fn rejects_bad_arguments() {
        assert_eq!(pair_j(1, 3), Err(PairingError::OffsetNotZeroLabel(1)));
        assert_eq!(pair_j_prime(0, 0), Err(PairingError::EmptyBlock));
    }

    #[test]
    fn constant_pairs() {
        let v = pair_constant(1, 2);
        assert_eq!(v, vec![LabelPair::new(1, 5), LabelPair::new(4, 2)]);
        assert!(v.iter().all(|p| p.sum() == 6));
    }
}
