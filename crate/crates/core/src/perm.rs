//! Permutations of `{1..n}`: uniform sampling, exhaustive enumeration,
//! sampling without replacement, and the transposition coupling.
//!
//! Permutations are 1-based at the API boundary: `get(i)` returns the image
//! of `i` for `i` in `1..=n`, matching the usual convention for the symmetric
//! group. Internally the images are stored in a zero-indexed vector.

use crate::error::{Error, Result};
use crate::rng::RngState;

/// Default cap for exhaustive enumeration (10! is about 3.6 million).
pub const DEFAULT_ENUM_CAP: usize = 10;

/// A bijection on `{1..n}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Permutation {
    map: Vec<u32>, // map[i] = image of i+1, values in 1..=n
}

impl Permutation {
    /// The identity permutation on `{1..n}`.
    pub fn identity(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidSize("permutation size must be >= 1".into()));
        }
        Ok(Permutation {
            map: (1..=n as u32).collect(),
        })
    }

    /// Builds a permutation from 1-based images, validating bijectivity.
    pub fn from_images(images: &[usize]) -> Result<Self> {
        let n = images.len();
        if n == 0 {
            return Err(Error::InvalidSize("permutation size must be >= 1".into()));
        }
        let mut seen = vec![false; n];
        for &v in images {
            if v < 1 || v > n {
                return Err(Error::InvalidArguments(format!(
                    "image {v} out of range 1..={n}"
                )));
            }
            if seen[v - 1] {
                return Err(Error::InvalidArguments(format!("repeated image {v}")));
            }
            seen[v - 1] = true;
        }
        Ok(Permutation {
            map: images.iter().map(|&v| v as u32).collect(),
        })
    }

    pub fn n(&self) -> usize {
        self.map.len()
    }

    /// Image of `i` (1-based).
    #[inline]
    pub fn get(&self, i: usize) -> usize {
        self.map[i - 1] as usize
    }

    /// The images as a 1-based slice (`images()[k]` is the image of `k+1`).
    pub fn images(&self) -> &[u32] {
        &self.map
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0u32; self.map.len()];
        for (i, &v) in self.map.iter().enumerate() {
            inv[v as usize - 1] = i as u32 + 1;
        }
        Permutation { map: inv }
    }

    /// The permutation with the images at positions `i` and `j` (1-based)
    /// swapped, i.e. the composition with the transposition `(i, j)`.
    pub fn swap_positions(&self, i: usize, j: usize) -> Permutation {
        let mut map = self.map.clone();
        map.swap(i - 1, j - 1);
        Permutation { map }
    }
}

/// Draws a uniform permutation of `{1..n}` via Fisher-Yates with unbiased
/// bounded draws.
pub fn random_permutation(n: usize, rng: &mut RngState) -> Result<Permutation> {
    if n == 0 {
        return Err(Error::InvalidSize("permutation size must be >= 1".into()));
    }
    let mut map: Vec<u32> = (1..=n as u32).collect();
    for i in (1..n).rev() {
        let j = rng.bounded(i as u64 + 1) as usize;
        map.swap(i, j);
    }
    Ok(Permutation { map })
}

/// Iterator over all `n!` permutations in lexicographic order of the image
/// sequence. The order is stable across runs.
pub struct PermutationIter {
    next: Option<Vec<u32>>,
}

impl Iterator for PermutationIter {
    type Item = Permutation;

    fn next(&mut self) -> Option<Permutation> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        if next_lexicographic(&mut succ) {
            self.next = Some(succ);
        }
        Some(Permutation { map: current })
    }
}

fn next_lexicographic(map: &mut [u32]) -> bool {
    let n = map.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && map[i - 1] >= map[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while map[j] <= map[i - 1] {
        j -= 1;
    }
    map.swap(i - 1, j);
    map[i..].reverse();
    true
}

/// Enumerates all permutations of `{1..n}`, refusing sizes above the default
/// cap to prevent accidental factorial blowups.
pub fn enumerate_permutations(n: usize) -> Result<PermutationIter> {
    enumerate_permutations_capped(n, DEFAULT_ENUM_CAP)
}

pub fn enumerate_permutations_capped(n: usize, cap: usize) -> Result<PermutationIter> {
    if n == 0 {
        return Err(Error::InvalidSize("permutation size must be >= 1".into()));
    }
    if n > cap {
        return Err(Error::CapExceeded(format!(
            "enumeration of {n}! permutations exceeds cap {cap}"
        )));
    }
    Ok(PermutationIter {
        next: Some((1..=n as u32).collect()),
    })
}

/// Indicator of a size-`n_sample` simple random sample out of `n_total`
/// units: entry `i` is true when the unit `i+1` is selected.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SampleMask {
    indicator: Vec<bool>,
    n_sample: usize,
}

impl SampleMask {
    /// Builds the mask `1(pi(i) <= n_sample)` from a permutation.
    pub fn from_permutation(pi: &Permutation, n_sample: usize) -> Result<Self> {
        if n_sample < 1 || n_sample > pi.n() {
            return Err(Error::InvalidArguments(format!(
                "sample size {n_sample} out of range 1..={}",
                pi.n()
            )));
        }
        let indicator: Vec<bool> = (1..=pi.n()).map(|i| pi.get(i) <= n_sample).collect();
        Ok(SampleMask {
            indicator,
            n_sample,
        })
    }

    /// Builds a mask from explicit 0-based selected indices.
    pub fn from_indices(n_total: usize, selected: &[usize]) -> Result<Self> {
        let mut indicator = vec![false; n_total];
        for &i in selected {
            if i >= n_total {
                return Err(Error::InvalidArguments(format!(
                    "index {i} out of range for population of size {n_total}"
                )));
            }
            if indicator[i] {
                return Err(Error::InvalidArguments(format!("repeated index {i}")));
            }
            indicator[i] = true;
        }
        if selected.is_empty() {
            return Err(Error::InvalidArguments("empty sample".into()));
        }
        Ok(SampleMask {
            indicator,
            n_sample: selected.len(),
        })
    }

    pub fn n_total(&self) -> usize {
        self.indicator.len()
    }

    pub fn n_sample(&self) -> usize {
        self.n_sample
    }

    /// Whether unit `i` (0-based) is selected.
    #[inline]
    pub fn selected(&self, i: usize) -> bool {
        self.indicator[i]
    }

    /// 0-based indices of the selected units, ascending.
    pub fn selected_indices(&self) -> Vec<usize> {
        self.indicator
            .iter()
            .enumerate()
            .filter_map(|(i, &s)| s.then_some(i))
            .collect()
    }
}

/// Simple random sampling without replacement, realized as `1(pi(i) <= n)`
/// of a uniform permutation.
pub fn sample_without_replacement(
    n_total: usize,
    n_sample: usize,
    rng: &mut RngState,
) -> Result<SampleMask> {
    if n_sample < 1 || n_sample > n_total {
        return Err(Error::InvalidArguments(format!(
            "sample size {n_sample} out of range 1..={n_total}"
        )));
    }
    let pi = random_permutation(n_total, rng)?;
    SampleMask::from_permutation(&pi, n_sample)
}

/// One step of the transposition coupling: swaps the images at two positions
/// `I, J` drawn uniformly and independently from `{1..n}` (`I = J` is allowed
/// and leaves the permutation unchanged). Returns the coupled permutation and
/// the 1-based pair `(I, J)`.
pub fn transposition_couple(pi: &Permutation, rng: &mut RngState) -> (Permutation, (usize, usize)) {
    let n = pi.n() as u64;
    let i = rng.bounded(n) as usize + 1;
    let j = rng.bounded(n) as usize + 1;
    (pi.swap_positions(i, j), (i, j))
}

/// Iterator over all `C(n, k)` 0-based index combinations in lexicographic
/// order.
pub struct Combinations {
    n: usize,
    k: usize,
    next: Option<Vec<usize>>,
}

impl Combinations {
    pub fn new(n: usize, k: usize) -> Result<Self> {
        if k > n {
            return Err(Error::InvalidArguments(format!(
                "cannot choose {k} items out of {n}"
            )));
        }
        Ok(Combinations {
            n,
            k,
            next: Some((0..k).collect()),
        })
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let current = self.next.take()?;
        if self.k > 0 {
            let mut succ = current.clone();
            let mut i = self.k;
            loop {
                if i == 0 {
                    break;
                }
                i -= 1;
                if succ[i] < self.n - self.k + i {
                    succ[i] += 1;
                    for j in i + 1..self.k {
                        succ[j] = succ[j - 1] + 1;
                    }
                    self.next = Some(succ);
                    break;
                }
            }
        }
        Some(current)
    }
}

/// Exact binomial coefficient in f64 (handy for subset counts at desk scale).
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut result = 1.0;
    for i in 0..k {
        result = result * (n - i) as f64 / (i + 1) as f64;
    }
    result.round()
}

pub fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    #[test]
    fn size_one_is_the_unique_permutation() {
        let mut rng = RngState::new(0, 0);
        let p = random_permutation(1, &mut rng).unwrap();
        assert_eq!(p.images(), &[1]);
    }

    #[test]
    fn size_zero_is_rejected() {
        let mut rng = RngState::new(0, 0);
        assert!(random_permutation(0, &mut rng).is_err());
        assert!(enumerate_permutations(0).is_err());
    }

    #[test]
    fn fixed_seed_is_deterministic() {
        let mut a = RngState::new(42, 0);
        let mut b = RngState::new(42, 0);
        let pa = random_permutation(5, &mut a).unwrap();
        let pb = random_permutation(5, &mut b).unwrap();
        assert_eq!(pa, pb);
    }

    #[test]
    fn uniformity_over_s3() {
        let mut rng = RngState::new(42, 0);
        let draws = 60_000usize;
        let mut counts: HashMap<Vec<u32>, usize> = HashMap::new();
        for _ in 0..draws {
            let p = random_permutation(3, &mut rng).unwrap();
            *counts.entry(p.images().to_vec()).or_insert(0) += 1;
        }
        assert_eq!(counts.len(), 6);
        let p = 1.0 / 6.0;
        let se = (p * (1.0 - p) / draws as f64).sqrt();
        for &c in counts.values() {
            let freq = c as f64 / draws as f64;
            assert!((freq - p).abs() <= 3.0 * se, "freq {freq} off uniform");
        }
    }

    #[test]
    fn enumeration_of_s2_and_s4() {
        let perms: Vec<_> = enumerate_permutations(2).unwrap().collect();
        assert_eq!(perms.len(), 2);
        assert_eq!(perms[0].images(), &[1, 2]);
        assert_eq!(perms[1].images(), &[2, 1]);

        let perms: Vec<_> = enumerate_permutations(4).unwrap().collect();
        assert_eq!(perms.len(), 24);
        let distinct: std::collections::HashSet<_> =
            perms.iter().map(|p| p.images().to_vec()).collect();
        assert_eq!(distinct.len(), 24);
    }

    #[test]
    fn enumeration_counts_and_bijectivity_up_to_8() {
        for n in 1..=8usize {
            let mut count = 0usize;
            for p in enumerate_permutations(n).unwrap() {
                let mut sorted: Vec<u32> = p.images().to_vec();
                sorted.sort_unstable();
                assert_eq!(sorted, (1..=n as u32).collect::<Vec<_>>());
                count += 1;
            }
            assert_eq!(count as f64, factorial(n));
        }
    }

    #[test]
    fn enumeration_cap_is_enforced() {
        assert!(enumerate_permutations(11).is_err());
        assert!(enumerate_permutations_capped(11, 11).is_ok());
    }

    #[test]
    fn footrule_sum_over_s6_matches_mean_formula() {
        // sum over all 720 permutations of sum_i |pi(i) - i| equals
        // 720 * (36 - 1) / 3.
        let mut total = 0.0;
        for p in enumerate_permutations(6).unwrap() {
            let d: usize = (1..=6).map(|i| p.get(i).abs_diff(i)).sum();
            total += d as f64;
        }
        assert_eq!(total, 720.0 * 35.0 / 3.0);
    }

    #[test]
    fn inverse_roundtrip() {
        let mut rng = RngState::new(11, 0);
        for _ in 0..1000 {
            let p = random_permutation(8, &mut rng).unwrap();
            assert_eq!(p.inverse().inverse(), p);
            let inv = p.inverse();
            for i in 1..=8 {
                assert_eq!(inv.get(p.get(i)), i);
            }
        }
    }

    #[test]
    fn full_sample_mask_is_all_true() {
        let mut rng = RngState::new(1, 0);
        let mask = sample_without_replacement(5, 5, &mut rng).unwrap();
        assert!((0..5).all(|i| mask.selected(i)));
    }

    #[test]
    fn mask_always_has_exact_count() {
        let mut rng = RngState::new(2, 0);
        for _ in 0..500 {
            let mask = sample_without_replacement(4, 2, &mut rng).unwrap();
            assert_eq!(mask.selected_indices().len(), 2);
        }
    }

    #[test]
    fn oversized_sample_is_rejected() {
        let mut rng = RngState::new(2, 0);
        assert!(sample_without_replacement(4, 5, &mut rng).is_err());
        assert!(sample_without_replacement(4, 0, &mut rng).is_err());
    }

    #[test]
    fn subset_frequencies_are_uniform() {
        let mut rng = RngState::new(7, 0);
        let draws = 60_000usize;
        let mut counts: HashMap<Vec<usize>, usize> = HashMap::new();
        for _ in 0..draws {
            let mask = sample_without_replacement(4, 2, &mut rng).unwrap();
            *counts.entry(mask.selected_indices()).or_insert(0) += 1;
        }
        assert_eq!(counts.len(), 6);
        let p = 1.0 / 6.0;
        let se = (p * (1.0 - p) / draws as f64).sqrt();
        for &c in counts.values() {
            let freq = c as f64 / draws as f64;
            assert!((freq - p).abs() <= 3.0 * se);
        }
    }

    #[test]
    fn subset_counts_are_exact_under_enumeration() {
        // every size-n subset appears exactly n! (N-n)! times over S_N
        for n_total in 2..=6usize {
            for n_sample in 1..=n_total {
                let mut counts: HashMap<Vec<usize>, usize> = HashMap::new();
                for p in enumerate_permutations(n_total).unwrap() {
                    let mask = SampleMask::from_permutation(&p, n_sample).unwrap();
                    *counts.entry(mask.selected_indices()).or_insert(0) += 1;
                }
                let expected = factorial(n_sample) * factorial(n_total - n_sample);
                assert_eq!(counts.len() as f64, binomial(n_total, n_sample));
                for &c in counts.values() {
                    assert_eq!(c as f64, expected);
                }
            }
        }
    }

    #[test]
    fn forced_transposition_swaps_images() {
        let p = Permutation::from_images(&[1, 2]).unwrap();
        let q = p.swap_positions(1, 2);
        assert_eq!(q.images(), &[2, 1]);
    }

    #[test]
    fn couple_fixes_permutation_at_least_one_in_n_often() {
        // the I = J event alone has probability 1/N
        let p = Permutation::from_images(&[2, 3, 1]).unwrap();
        let mut fixed = 0usize;
        let total = 30_000usize;
        let mut rng = RngState::new(5, 0);
        for _ in 0..total {
            let (q, _) = transposition_couple(&p, &mut rng);
            if q == p {
                fixed += 1;
            }
        }
        let freq = fixed as f64 / total as f64;
        // exact P(pi' = pi) here is 1/3 (I = J), comfortably above 1/N - noise
        assert!(freq >= 1.0 / 3.0 - 0.02);
    }

    #[test]
    fn coupling_joint_law_is_exchangeable() {
        // enumerate (pi, I, J): the joint law of (pi, pi') is symmetric
        for n in 2..=5usize {
            let mut joint: HashMap<(Vec<u32>, Vec<u32>), usize> = HashMap::new();
            for p in enumerate_permutations(n).unwrap() {
                for i in 1..=n {
                    for j in 1..=n {
                        let q = p.swap_positions(i, j);
                        *joint
                            .entry((p.images().to_vec(), q.images().to_vec()))
                            .or_insert(0) += 1;
                    }
                }
            }
            for ((s, t), &c) in joint.iter() {
                let mirrored = joint.get(&(t.clone(), s.clone())).copied().unwrap_or(0);
                assert_eq!(c, mirrored, "joint law asymmetric at n={n}");
            }
        }
    }

    #[test]
    fn combinations_enumerate_all_subsets() {
        let combos: Vec<_> = Combinations::new(4, 2).unwrap().collect();
        assert_eq!(combos.len(), 6);
        assert_eq!(combos[0], vec![0, 1]);
        assert_eq!(combos[5], vec![2, 3]);
        let zero: Vec<_> = Combinations::new(3, 0).unwrap().collect();
        assert_eq!(zero, vec![Vec::<usize>::new()]);
    }

    #[test]
    fn binomial_small_values() {
        assert_eq!(binomial(4, 2), 6.0);
        assert_eq!(binomial(8, 4), 70.0);
        assert_eq!(binomial(3, 5), 0.0);
    }
}
