//! Pool-adjacent-violators projection onto non-decreasing sequences.

/// Least-squares projection of `values` onto the set of non-decreasing
/// sequences (unit weights).
pub fn isotonic_non_decreasing(values: &[f64]) -> Vec<f64> {
    // (block mean, block length)
    let mut blocks: Vec<(f64, usize)> = Vec::with_capacity(values.len());
    for &v in values {
        let mut mean = v;
        let mut len = 1usize;
        while let Some(&(prev_mean, prev_len)) = blocks.last() {
            if prev_mean <= mean {
                break;
            }
            blocks.pop();
            let total = prev_len + len;
            mean = (prev_mean * prev_len as f64 + mean * len as f64) / total as f64;
            len = total;
        }
        blocks.push((mean, len));
    }
    blocks
        .into_iter()
        .flat_map(|(mean, len)| std::iter::repeat_n(mean, len))
        .collect()
}
