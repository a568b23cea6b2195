//! Lexicographic indexing of 2-subsets (and general d-subsets) of `{1..n}`.
//!
//! Every vector that is indexed by pairs uses the order
//! `12, 13, ..., 1n, 23, ..., (n-1)n`.

/// Number of pairs `C(n, 2)`.
pub fn num_pairs(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// All pairs `(i, j)`, 1-based with `i < j`, in lexicographic order.
pub fn pairs(n: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(num_pairs(n));
    for i in 1..=n {
        for j in (i + 1)..=n {
            out.push((i, j));
        }
    }
    out
}

/// Position of the 1-based pair `(i, j)` (with `i < j`) in lexicographic order.
pub fn pair_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(1 <= i && i < j && j <= n);
    // pairs with first element < i
    let before = (i - 1) * n - (i - 1) * i / 2;
    before + (j - i - 1)
}

/// Text key of a pair in JSON files: `"ij"` for `n < 10`, `"i,j"` otherwise.
pub fn pair_key(n: usize, i: usize, j: usize) -> String {
    if n < 10 {
        format!("{i}{j}")
    } else {
        format!("{i},{j}")
    }
}

/// Parse a pair key produced by [`pair_key`].
pub fn parse_pair_key(n: usize, key: &str) -> Option<(usize, usize)> {
    let (a, b) = if n < 10 {
        if key.len() != 2 || !key.is_ascii() {
            return None;
        }
        let (a, b) = key.split_at(1);
        (a.parse().ok()?, b.parse().ok()?)
    } else {
        let (a, b) = key.split_once(',')?;
        (a.trim().parse().ok()?, b.trim().parse().ok()?)
    };
    (1 <= a && a < b && b <= n).then_some((a, b))
}

/// All `d`-subsets of `{0..n-1}` (0-based) in lexicographic order.
pub fn subsets(n: usize, d: usize) -> Vec<Vec<usize>> {
    use itertools::Itertools;
    (0..n).combinations(d).collect()
}
