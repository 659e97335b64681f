//! Oracles shared by the integration tests and the acceptance harness.

#![allow(dead_code)]

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn exact(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite input")
}

fn to_f64(x: &BigRational) -> f64 {
    x.to_f64().expect("representable")
}

/// Inverse of a square rational matrix by Gauss-Jordan elimination.
fn invert(mut a: Vec<Vec<BigRational>>) -> Vec<Vec<BigRational>> {
    let k = a.len();
    let mut inv: Vec<Vec<BigRational>> = (0..k)
        .map(|i| {
            (0..k)
                .map(|j| {
                    if i == j {
                        BigRational::one()
                    } else {
                        BigRational::zero()
                    }
                })
                .collect()
        })
        .collect();
    for col in 0..k {
        let pivot = (col..k)
            .find(|&r| !a[r][col].is_zero())
            .expect("nonsingular");
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let p = a[col][col].clone();
        for j in 0..k {
            a[col][j] = &a[col][j] / &p;
            inv[col][j] = &inv[col][j] / &p;
        }
        for r in 0..k {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                for j in 0..k {
                    let (ac, ic) = (a[col][j].clone(), inv[col][j].clone());
                    a[r][j] -= &f * ac;
                    inv[r][j] -= &f * ic;
                }
            }
        }
    }
    inv
}

/// Exact least-squares coefficients and cluster sandwich covariance.
pub struct ExactFit {
    pub coefficients: Vec<f64>,
    pub vcov: Vec<Vec<f64>>,
}

/// Solve the normal equations in exact rational arithmetic and accumulate the
/// cluster sandwich with plain loops over rows, using the small-sample factor
/// `G/(G-1) * (N-1)/(N-K)`.
pub fn exact_fit(columns: &[Vec<f64>], y: &[f64], clusters: &[usize]) -> ExactFit {
    let n = y.len();
    let k = columns.len();
    let x: Vec<Vec<BigRational>> = columns
        .iter()
        .map(|c| c.iter().map(|&v| exact(v)).collect())
        .collect();
    let yq: Vec<BigRational> = y.iter().map(|&v| exact(v)).collect();

    let mut xtx = vec![vec![BigRational::zero(); k]; k];
    let mut xty = vec![BigRational::zero(); k];
    for i in 0..k {
        for j in 0..k {
            xtx[i][j] = x[i]
                .iter()
                .zip(&x[j])
                .fold(BigRational::zero(), |acc, (a, b)| acc + a * b);
        }
        xty[i] = x[i]
            .iter()
            .zip(&yq)
            .fold(BigRational::zero(), |acc, (a, b)| acc + a * b);
    }
    let bread = invert(xtx);
    let beta: Vec<BigRational> = (0..k)
        .map(|i| (0..k).fold(BigRational::zero(), |acc, j| acc + &bread[i][j] * &xty[j]))
        .collect();
    let resid: Vec<BigRational> = (0..n)
        .map(|r| {
            let fitted = (0..k).fold(BigRational::zero(), |acc, j| acc + &x[j][r] * &beta[j]);
            &yq[r] - fitted
        })
        .collect();

    let g = clusters.iter().max().map_or(0, |m| m + 1);
    let mut meat = vec![vec![BigRational::zero(); k]; k];
    for cluster in 0..g {
        let mut score = vec![BigRational::zero(); k];
        for r in (0..n).filter(|&r| clusters[r] == cluster) {
            for j in 0..k {
                score[j] += &x[j][r] * &resid[r];
            }
        }
        for i in 0..k {
            for j in 0..k {
                meat[i][j] += &score[i] * &score[j];
            }
        }
    }
    let c = BigRational::new(BigInt::from(g), BigInt::from(g - 1))
        * BigRational::new(BigInt::from(n - 1), BigInt::from(n - k));
    let matmul = |a: &[Vec<BigRational>], b: &[Vec<BigRational>]| -> Vec<Vec<BigRational>> {
        (0..k)
            .map(|i| {
                (0..k)
                    .map(|j| (0..k).fold(BigRational::zero(), |acc, m| acc + &a[i][m] * &b[m][j]))
                    .collect()
            })
            .collect()
    };
    let v = matmul(&bread, &matmul(&meat, &bread));
    let vcov = v
        .iter()
        .map(|row| row.iter().map(|e| to_f64(&(&c * e))).collect())
        .collect();
    ExactFit {
        coefficients: beta.iter().map(to_f64).collect(),
        vcov,
    }
}

fn grid(rng: &mut ChaCha8Rng, half_width: i32) -> f64 {
    f64::from(rng.random_range(-half_width..=half_width)) / 64.0
}

/// A random regression problem: intercept plus `k - 1` regressors, with
/// cluster labels `0..g` each used at least once. Entries are multiples of
/// 1/64 so the rational oracle stays small.
pub struct Instance {
    pub columns: Vec<Vec<f64>>,
    pub y: Vec<f64>,
    pub clusters: Vec<usize>,
}

impl Instance {
    pub fn random(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = rng.random_range(1..=4usize);
        let n = rng.random_range((k + 4)..=50usize);
        let g = rng.random_range(2..=(n / 2).max(2));
        let mut columns = vec![vec![1.0; n]];
        for _ in 1..k {
            columns.push((0..n).map(|_| grid(&mut rng, 192)).collect());
        }
        let y = (0..n)
            .map(|r| {
                let signal: f64 = columns.iter().map(|c| c[r]).sum();
                signal + grid(&mut rng, 64)
            })
            .collect();
        let clusters = (0..n)
            .map(|r| if r < g { r } else { rng.random_range(0..g) })
            .collect();
        Instance {
            columns,
            y,
            clusters,
        }
    }

    pub fn cluster_keys(&self) -> Vec<String> {
        self.clusters.iter().map(|c| format!("c{c}")).collect()
    }

    pub fn names(&self) -> Vec<String> {
        (0..self.columns.len()).map(|j| format!("x{j}")).collect()
    }
}

/// Largest absolute entrywise difference.
pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}
