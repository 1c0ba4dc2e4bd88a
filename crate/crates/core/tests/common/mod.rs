//! Independent oracles shared by the integration tests and the acceptance
//! runner. Nothing here calls into the library's solvers.
#![allow(dead_code)]

use std::f64::consts::PI;

use hesselm::eval::SegmentDataset;
use hesselm::features::PartitionKind;
use hesselm::signal::{notch_filter, remove_baseline, segment};
use hesselm::synth::{generate, SynthConfig};
use hesselm::DenseMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DenseMatrix {
    DenseMatrix::from_fn(rows, cols, |_, _| rng.random_range(-1.0..1.0))
}

/// `Aᵀ A` of a random `(n + extra) × n` matrix: symmetric positive semidefinite.
pub fn random_psd(rng: &mut ChaCha8Rng, n: usize, extra: usize) -> DenseMatrix {
    let a = uniform(rng, n + extra, n);
    naive_mul(&transpose(&a), &a)
}

pub fn transpose(a: &DenseMatrix) -> DenseMatrix {
    DenseMatrix::from_fn(a.cols(), a.rows(), |i, j| a[(j, i)])
}

pub fn naive_mul(a: &DenseMatrix, b: &DenseMatrix) -> DenseMatrix {
    assert_eq!(a.cols(), b.rows());
    DenseMatrix::from_fn(a.rows(), b.cols(), |i, j| (0..a.cols()).map(|k| a[(i, k)] * b[(k, j)]).sum())
}

pub fn frob(a: &DenseMatrix) -> f64 {
    a.data().iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// `‖a - b‖ / ‖b‖` over flat slices.
pub fn rel(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
    let den: f64 = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    if den == 0.0 {
        num
    } else {
        num / den
    }
}

/// Gaussian elimination with partial pivoting.
pub fn dense_solve(a: &DenseMatrix, b: &DenseMatrix) -> DenseMatrix {
    let n = a.rows();
    assert!(a.is_square() && b.rows() == n);
    let c = b.cols();
    let mut m: Vec<Vec<f64>> = (0..n)
        .map(|i| a.row(i).iter().chain(b.row(i)).copied().collect())
        .collect();
    for col in 0..n {
        let p = (col..n)
            .max_by(|&x, &y| m[x][col].abs().total_cmp(&m[y][col].abs()))
            .unwrap();
        m.swap(col, p);
        let piv = m[col][col];
        assert!(piv.abs() > 1e-300, "oracle hit a singular matrix");
        for r in col + 1..n {
            let f = m[r][col] / piv;
            if f != 0.0 {
                for k in col..n + c {
                    m[r][k] -= f * m[col][k];
                }
            }
        }
    }
    let mut x = vec![vec![0.0; c]; n];
    for i in (0..n).rev() {
        for j in 0..c {
            let s: f64 = (i + 1..n).map(|k| m[i][k] * x[k][j]).sum();
            x[i][j] = (m[i][n + j] - s) / m[i][i];
        }
    }
    DenseMatrix::from_rows(&x).unwrap()
}

fn shifted(a: &DenseMatrix, lambda: f64) -> DenseMatrix {
    DenseMatrix::from_fn(a.rows(), a.cols(), |i, j| a[(i, j)] + if i == j { lambda } else { 0.0 })
}

/// Ridge weights from the explicit normal equations (primal when `m <= N`,
/// minimum-norm dual form otherwise).
pub fn ridge_oracle(h: &DenseMatrix, t: &DenseMatrix, lambda: f64) -> DenseMatrix {
    let ht = transpose(h);
    if h.cols() <= h.rows() {
        dense_solve(&shifted(&naive_mul(&ht, h), lambda), &naive_mul(&ht, t))
    } else {
        naive_mul(&ht, &dense_solve(&shifted(&naive_mul(h, &ht), lambda), t))
    }
}

/// Full `N × N` HAT matrix `H W(λ)` as a linear map of the targets.
pub fn hat_oracle(h: &DenseMatrix, lambda: f64) -> DenseMatrix {
    naive_mul(h, &ridge_oracle(h, &DenseMatrix::identity(h.rows()), lambda))
}

/// Leave-one-out MSE by refitting without each sample in turn.
pub fn loo_mse(h: &DenseMatrix, t: &DenseMatrix, lambda: f64) -> f64 {
    let (n, c) = t.shape();
    let mut sum = 0.0;
    for j in 0..n {
        let keep: Vec<usize> = (0..n).filter(|&i| i != j).collect();
        let w = ridge_oracle(&h.select_rows(&keep), &t.select_rows(&keep), lambda);
        for k in 0..c {
            let pred: f64 = (0..h.cols()).map(|l| h[(j, l)] * w[(l, k)]).sum();
            sum += (pred - t[(j, k)]).powi(2);
        }
    }
    sum / (n * c) as f64
}

/// Whether a Cholesky factorization succeeds with strictly positive pivots.
pub fn cholesky_ok(a: &DenseMatrix) -> bool {
    let n = a.rows();
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[i][k] * l[j][k]).sum();
            if i == j {
                let d = a[(i, i)] - s;
                if d <= 0.0 {
                    return false;
                }
                l[i][j] = d.sqrt();
            } else {
                l[i][j] = (a[(i, j)] - s) / l[j][j];
            }
        }
    }
    true
}

/// Region membership written as one predicate per region.
pub fn in_region(kind: PartitionKind, k: usize, bound: f64, region: usize, (a, b): (f64, f64)) -> bool {
    let kf = k as f64;
    let band = |d: f64| {
        let s = d * kf / bound;
        if region == 0 {
            s <= 1.0
        } else if region == k - 1 {
            s > (k - 1) as f64
        } else {
            s > region as f64 && s <= (region + 1) as f64
        }
    };
    match kind {
        PartitionKind::Circled => band((a * a + b * b).sqrt()),
        PartitionKind::Squared => band(a.abs().max(b.abs())),
        PartitionKind::Inclined => {
            let inside = (a * a + b * b).sqrt() <= bound / kf;
            if region == 0 {
                return inside;
            }
            if inside {
                return false;
            }
            let sectors = k - 1;
            let s = region - 1;
            let w = 2.0 * PI / sectors as f64;
            let theta = b.atan2(a);
            let lo = -PI + s as f64 * w;
            let hi = -PI + (s + 1) as f64 * w;
            if s == sectors - 1 {
                theta >= lo
            } else {
                theta >= lo && theta < hi
            }
        }
        PartitionKind::Grid => {
            let (row, col) = (region / k, region % k);
            let fits = |v: f64, cell: usize| {
                let lo = -bound + 2.0 * bound * cell as f64 / kf;
                let hi = -bound + 2.0 * bound * (cell + 1) as f64 / kf;
                let above = cell == 0 || v >= lo;
                let below = cell == k - 1 || v < hi;
                above && below
            };
            fits(a, col) && fits(b, row)
        }
    }
}

/// Preprocessed synthetic segments, two classes.
pub fn synthetic_dataset(records_per_class: usize, segments_per_record: usize, seed: u64) -> SegmentDataset {
    let cfg = SynthConfig {
        records_per_class,
        segments_per_record,
        seed,
        ..SynthConfig::default()
    };
    let mut segments = Vec::new();
    for rec in generate(&cfg).unwrap() {
        let clean = notch_filter(&remove_baseline(&rec, 200.0, 600.0).unwrap(), 60.0, 30.0).unwrap();
        segments.extend(segment(&clean, 10.0).unwrap());
    }
    SegmentDataset::from_segments(&segments).unwrap()
}

/// `n` labelled segments with no class signal: white noise, balanced labels.
pub fn noise_dataset(n: usize, len: usize, seed: u64) -> SegmentDataset {
    let mut r = rng(seed);
    let segments: Vec<hesselm::signal::Segment> = (0..n)
        .map(|i| hesselm::signal::Segment {
            samples: (0..len).map(|_| r.random_range(-1.0..1.0)).collect(),
            label: if i % 2 == 0 { "CHF" } else { "NORMAL" }.to_string(),
            source_id: format!("r{i}"),
            start_index: 0,
        })
        .collect();
    SegmentDataset::from_segments(&segments).unwrap()
}
