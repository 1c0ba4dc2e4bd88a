/// Running median with a symmetric window of `window` samples (odd). Near the
/// ends the window shrinks symmetrically so it stays centred on the sample.
pub fn median_filter(x: &[f64], window: usize) -> Vec<f64> {
    let n = x.len();
    let half = window / 2;
    let mut out = Vec::with_capacity(n);
    // Sorted contents of the current window [lo, hi).
    let mut sorted: Vec<f64> = Vec::with_capacity(window + 2);
    let (mut lo, mut hi) = (0usize, 0usize);
    for i in 0..n {
        let h = half.min(i).min(n - 1 - i);
        let (new_lo, new_hi) = (i - h, i + h + 1);
        while hi < new_hi {
            insert_sorted(&mut sorted, x[hi]);
            hi += 1;
        }
        while lo < new_lo {
            remove_sorted(&mut sorted, x[lo]);
            lo += 1;
        }
        out.push(sorted[sorted.len() / 2]);
    }
    out
}

fn insert_sorted(v: &mut Vec<f64>, x: f64) {
    let pos = v.partition_point(|&y| y < x);
    v.insert(pos, x);
}

fn remove_sorted(v: &mut Vec<f64>, x: f64) {
    let pos = v.partition_point(|&y| y < x);
    debug_assert!(pos < v.len() && v[pos] == x);
    v.remove(pos);
}
