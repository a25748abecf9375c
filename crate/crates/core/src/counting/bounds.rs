//! Lower bounds for `Ξ(N)` from residue-class counts.

use num_rational::Ratio;
use serde::Serialize;

use super::histogram::ResidueHistogram;
use crate::error::{invalid, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SelectionStrategy {
    Empirical,
    Predicted,
    Manual,
}

/// A subset `R` of `Z/pZ`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ResidueSelection {
    pub p: u64,
    pub residues: Vec<u64>,
    pub strategy: SelectionStrategy,
}

impl ResidueSelection {
    pub fn new(p: u64, residues: impl IntoIterator<Item = u64>, strategy: SelectionStrategy) -> Result<Self> {
        let mut residues: Vec<u64> = residues.into_iter().collect();
        if let Some(&bad) = residues.iter().find(|&&r| r >= p) {
            return Err(invalid(format!("residue {bad} is not in Z/{p}Z")));
        }
        residues.sort_unstable();
        residues.dedup();
        Ok(Self { p, residues, strategy })
    }

    pub fn len(&self) -> usize {
        self.residues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.residues.is_empty()
    }
}

fn check(hist: &ResidueHistogram, sel: &ResidueSelection) -> Result<()> {
    if hist.p != sel.p {
        return Err(invalid(format!("histogram is mod {}, selection mod {}", hist.p, sel.p)));
    }
    Ok(())
}

/// `sum_{r in R} (N/p - a(r) - 1)`, exact.
pub fn xi_lower_bound(hist: &ResidueHistogram, sel: &ResidueSelection) -> Result<Ratio<i128>> {
    check(hist, sel)?;
    let n = hist.n as i128;
    let p = hist.p as i128;
    let total: i128 = sel
        .residues
        .iter()
        .map(|&r| n - p * (hist.counts[r as usize] as i128 + 1))
        .sum();
    Ok(Ratio::new(total, p))
}

/// `#{1 <= n <= N : n ≡ r (mod p)}`.
pub fn class_size(n: u64, p: u64, r: u64) -> u64 {
    let r = r % p;
    let first = if r == 0 { p } else { r };
    if first > n {
        0
    } else {
        (n - first) / p + 1
    }
}

/// `sum_{r in R} (|N_r| - a(r))` with the exact class sizes.
pub fn xi_lower_bound_sharp(hist: &ResidueHistogram, sel: &ResidueSelection) -> Result<i128> {
    check(hist, sel)?;
    Ok(sel
        .residues
        .iter()
        .map(|&r| class_size(hist.n, hist.p, r) as i128 - hist.counts[r as usize] as i128)
        .sum())
}

/// `R = {r : a(r) < N/p - 1}`: exactly the residues with a positive term,
/// which maximizes the bound over all subsets.
pub fn choose_r_empirical(hist: &ResidueHistogram) -> ResidueSelection {
    let (n, p) = (hist.n as i128, hist.p as i128);
    let residues = (0..hist.p).filter(|&r| p * (hist.counts[r as usize] as i128) < n - p);
    ResidueSelection::new(hist.p, residues, SelectionStrategy::Empirical).expect("residues in range")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hist(n: u64, counts: Vec<u64>) -> ResidueHistogram {
        ResidueHistogram { n, p: counts.len() as u64, counts }
    }

    #[test]
    fn bound_examples() {
        let h = hist(12, vec![5, 3, 4]);
        let one = ResidueSelection::new(3, [1], SelectionStrategy::Manual).unwrap();
        assert_eq!(xi_lower_bound(&h, &one).unwrap(), Ratio::from_integer(0));
        let none = ResidueSelection::new(3, [], SelectionStrategy::Manual).unwrap();
        assert_eq!(xi_lower_bound(&h, &none).unwrap(), Ratio::from_integer(0));
        let all = ResidueSelection::new(3, 0..3, SelectionStrategy::Manual).unwrap();
        assert_eq!(xi_lower_bound(&h, &all).unwrap(), Ratio::from_integer(-3));
    }

    #[test]
    fn bound_keeps_fractional_n_over_p() {
        let h = hist(10, vec![2, 5, 3]);
        let sel = ResidueSelection::new(3, [0], SelectionStrategy::Manual).unwrap();
        assert_eq!(xi_lower_bound(&h, &sel).unwrap(), Ratio::new(1, 3));
    }

    #[test]
    fn empirical_choice_examples() {
        assert!(choose_r_empirical(&hist(12, vec![5, 3, 4])).is_empty());
        let sel = choose_r_empirical(&hist(12, vec![0, 6, 6]));
        assert_eq!(sel.residues, vec![0]);
        assert!(choose_r_empirical(&hist(12, vec![4, 4, 4])).is_empty());
    }

    #[test]
    fn empirical_choice_is_optimal_over_all_subsets() {
        let h = hist(40, vec![1, 9, 3, 12, 0, 7, 8]);
        let best = xi_lower_bound(&h, &choose_r_empirical(&h)).unwrap();
        for mask in 0u32..(1 << 7) {
            let sel = ResidueSelection::new(7, (0..7).filter(|r| mask >> r & 1 == 1), SelectionStrategy::Manual).unwrap();
            assert!(xi_lower_bound(&h, &sel).unwrap() <= best);
        }
    }

    #[test]
    fn class_sizes() {
        assert_eq!(class_size(12, 3, 0), 4);
        assert_eq!(class_size(10, 3, 1), 4);
        assert_eq!(class_size(10, 3, 2), 3);
        assert_eq!(class_size(2, 5, 4), 0);
        let total: u64 = (0..7).map(|r| class_size(1000, 7, r)).sum();
        assert_eq!(total, 1000);
    }

    #[test]
    fn mismatched_modulus_rejected() {
        let h = hist(12, vec![5, 3, 4]);
        let sel = ResidueSelection::new(5, [1], SelectionStrategy::Manual).unwrap();
        assert!(xi_lower_bound(&h, &sel).is_err());
        assert!(ResidueSelection::new(3, [3], SelectionStrategy::Manual).is_err());
    }
}
