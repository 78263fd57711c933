//! Permutation parity helpers.

/// Sorts `indices` in place and returns the parity of the sorting
/// permutation: `Some(1)` or `Some(-1)`, or `None` when an index repeats.
pub fn sort_with_sign(indices: &mut [usize]) -> Option<i8> {
    let mut sign = 1i8;
    // insertion sort; tuples are short
    for i in 1..indices.len() {
        let mut j = i;
        while j > 0 && indices[j - 1] > indices[j] {
            indices.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
        if j > 0 && indices[j - 1] == indices[j] {
            return None;
        }
    }
    if indices.windows(2).any(|w| w[0] == w[1]) {
        return None;
    }
    Some(sign)
}

/// Sign of a permutation of `0..n` given in one-line notation.
pub fn parity(perm: &[usize]) -> i8 {
    let mut inversions = 0usize;
    for i in 0..perm.len() {
        for j in i + 1..perm.len() {
            if perm[i] > perm[j] {
                inversions += 1;
            }
        }
    }
    if inversions.is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// All permutations of `0..n` paired with their signs, in lexicographic order.
pub fn permutations(n: usize) -> Vec<(Vec<usize>, i8)> {
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(n);
    let mut used = vec![false; n];
    fn rec(n: usize, current: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<(Vec<usize>, i8)>) {
        if current.len() == n {
            out.push((current.clone(), parity(current)));
            return;
        }
        for i in 0..n {
            if !used[i] {
                used[i] = true;
                current.push(i);
                rec(n, current, used, out);
                current.pop();
                used[i] = false;
            }
        }
    }
    rec(n, &mut current, &mut used, &mut out);
    out
}
