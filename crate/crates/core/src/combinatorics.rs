//! Exhaustive enumeration of subsets and multisets.

/// `C(n, r)`, or `None` on overflow.
pub fn binomial_u128(n: u64, r: u64) -> Option<u128> {
    if r > n {
        return Some(0);
    }
    let r = r.min(n - r);
    let mut acc: u128 = 1;
    for i in 0..r {
        // acc · (n − i) is divisible by (i + 1) at every step.
        acc = acc.checked_mul(u128::from(n - i))? / u128::from(i + 1);
    }
    Some(acc)
}

/// `n^r`, or `None` on overflow.
pub fn power_u128(n: u64, r: u64) -> Option<u128> {
    u32::try_from(r).ok().and_then(|r| u128::from(n).checked_pow(r))
}

/// Calls `f` on every `r`-subset of `{0, …, n−1}` in lexicographic order.
pub fn for_each_combination(n: usize, r: usize, mut f: impl FnMut(&[usize])) {
    if r > n {
        return;
    }
    let mut idx: Vec<usize> = (0..r).collect();
    loop {
        f(&idx);
        // Rightmost position that can still advance.
        let Some(i) = (0..r).rev().find(|&i| idx[i] < n - r + i) else {
            return;
        };
        idx[i] += 1;
        for j in i + 1..r {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Calls `f(multiset, weight)` on every nondecreasing length-`r` sequence over
/// `{0, …, n−1}`. `weight` is the number of ordered sequences with that
/// content, `r! / ∏ mᵢ!`, so the weights sum to `n^r`.
pub fn for_each_multiset(n: usize, r: usize, mut f: impl FnMut(&[usize], u128)) {
    if n == 0 {
        if r == 0 {
            f(&[], 1);
        }
        return;
    }
    let factorial = |m: usize| (1..=m as u128).product::<u128>();
    let r_fact = factorial(r);
    let mut idx = vec![0usize; r];
    loop {
        let mut denom = 1u128;
        let mut run = 1;
        for w in 1..=r {
            if w < r && idx[w] == idx[w - 1] {
                run += 1;
            } else {
                denom *= factorial(run);
                run = 1;
            }
        }
        f(&idx, r_fact / denom);
        let Some(i) = (0..r).rev().find(|&i| idx[i] < n - 1) else {
            return;
        };
        idx[i] += 1;
        for j in i + 1..r {
            idx[j] = idx[i];
        }
    }
}
