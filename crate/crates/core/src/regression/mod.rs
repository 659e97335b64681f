//! Least squares with country-clustered inference.
//!
//! Coefficients come from a Householder QR factorisation of the design
//! matrix. The covariance is the cluster sandwich
//!
//! ```text
//! V = c (X'X)^-1 (sum_g X_g' e_g e_g' X_g) (X'X)^-1,
//! c = G/(G-1) * (N-1)/(N-K)
//! ```
//!
//! and intervals use t quantiles with `G - 1` degrees of freedom.

pub mod special;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative size below which a pivot counts as zero when testing rank.
const RANK_TOL: f64 = 1e-10;

/// Name given to the column of ones.
pub const INTERCEPT: &str = "Constant";

/// Dense design matrix with a cluster key for every row.
#[derive(Debug, Clone)]
pub struct DesignMatrix {
    names: Vec<String>,
    /// Column-major, `k` columns of `n` entries.
    columns: Vec<Vec<f64>>,
    y: Vec<f64>,
    clusters: Vec<usize>,
    cluster_keys: Vec<String>,
}

impl DesignMatrix {
    /// An intercept followed by the given regressors.
    pub fn with_intercept<K: AsRef<str>>(
        y: Vec<f64>,
        regressors: Vec<(String, Vec<f64>)>,
        cluster_keys: &[K],
    ) -> Result<Self> {
        let mut names = vec![INTERCEPT.to_string()];
        let mut columns = vec![vec![1.0; y.len()]];
        for (name, col) in regressors {
            names.push(name);
            columns.push(col);
        }
        Self::from_columns(names, columns, y, cluster_keys)
    }

    /// Columns exactly as given; no intercept is added.
    pub fn from_columns<K: AsRef<str>>(
        names: Vec<String>,
        columns: Vec<Vec<f64>>,
        y: Vec<f64>,
        cluster_keys: &[K],
    ) -> Result<Self> {
        let n = y.len();
        if names.len() != columns.len() {
            return Err(Error::InvalidParameter(format!(
                "{} names for {} columns",
                names.len(),
                columns.len()
            )));
        }
        if let Some((name, col)) = names.iter().zip(&columns).find(|(_, c)| c.len() != n) {
            return Err(Error::InvalidParameter(format!(
                "column {name:?} has {} rows, expected {n}",
                col.len()
            )));
        }
        if cluster_keys.len() != n {
            return Err(Error::InvalidParameter(format!(
                "{} cluster keys for {n} rows",
                cluster_keys.len()
            )));
        }
        let mut index: HashMap<&str, usize> = HashMap::new();
        let mut keys = Vec::new();
        let clusters = cluster_keys
            .iter()
            .map(|k| {
                let k = k.as_ref();
                *index.entry(k).or_insert_with(|| {
                    keys.push(k.to_string());
                    keys.len() - 1
                })
            })
            .collect();
        Ok(DesignMatrix {
            names,
            columns,
            y,
            clusters,
            cluster_keys: keys,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.y.len()
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn n_clusters(&self) -> usize {
        self.cluster_keys.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.columns[j]
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    /// Dense cluster index of each row.
    pub fn cluster_of_rows(&self) -> &[usize] {
        &self.clusters
    }

    pub fn fitted(&self, beta: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n_rows()];
        for (col, b) in self.columns.iter().zip(beta) {
            for (o, x) in out.iter_mut().zip(col) {
                *o += b * x;
            }
        }
        out
    }
}

/// Point estimates from [`ols_fit`].
#[derive(Debug, Clone)]
pub struct OlsFit {
    pub coefficients: Vec<f64>,
    pub residuals: Vec<f64>,
    pub r_squared: f64,
    /// `(X'X)^-1`, assembled from the triangular factor.
    pub xtx_inv: Vec<Vec<f64>>,
}

/// Householder QR of the design: the triangular factor `R` (k x k, row
/// major) and `Q'y`.
struct Qr {
    r: Vec<Vec<f64>>,
    qty: Vec<f64>,
}

fn householder_qr(x: &DesignMatrix) -> Result<Qr> {
    let (n, k) = (x.n_rows(), x.n_cols());
    let mut a: Vec<Vec<f64>> = x.columns.clone();
    let mut qty = x.y.clone();
    let norms: Vec<f64> = a.iter().map(|c| norm(c)).collect();

    for j in 0..k {
        let tail_norm = norm(&a[j][j..]);
        if norms[j] == 0.0 || tail_norm <= RANK_TOL * norms[j] {
            return Err(Error::RankDeficient(x.names[j].clone()));
        }
        let alpha = if a[j][j] > 0.0 { -tail_norm } else { tail_norm };
        let mut v: Vec<f64> = a[j][j..].to_vec();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|e| e * e).sum();

        let reflect = |col: &mut [f64]| {
            let dot: f64 = v.iter().zip(&col[j..]).map(|(a, b)| a * b).sum();
            let f = 2.0 * dot / vnorm2;
            for (c, vi) in col[j..].iter_mut().zip(&v) {
                *c -= f * vi;
            }
        };
        for col in a.iter_mut().skip(j + 1) {
            reflect(col);
        }
        reflect(&mut qty);
        a[j][j] = alpha;
        for e in a[j][j + 1..n].iter_mut() {
            *e = 0.0;
        }
    }

    let r = (0..k)
        .map(|i| (0..k).map(|j| if j >= i { a[j][i] } else { 0.0 }).collect())
        .collect();
    qty.truncate(k);
    Ok(Qr { r, qty })
}

fn norm(v: &[f64]) -> f64 {
    // Scaled to avoid overflow on large regressors such as GDP.
    let scale = v.iter().fold(0.0f64, |m, e| m.max(e.abs()));
    if scale == 0.0 {
        return 0.0;
    }
    scale * v.iter().map(|e| (e / scale).powi(2)).sum::<f64>().sqrt()
}

fn upper_triangular_inverse(r: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let k = r.len();
    let mut inv = vec![vec![0.0; k]; k];
    for col in 0..k {
        for i in (0..=col).rev() {
            let mut s = if i == col { 1.0 } else { 0.0 };
            for (m, inv_row) in inv.iter().enumerate().take(col + 1).skip(i + 1) {
                s -= r[i][m] * inv_row[col];
            }
            inv[i][col] = s / r[i][i];
        }
    }
    inv
}

/// Ordinary least squares point estimates and R².
///
/// R² is `1 - SSR/SST` with SST centred on the mean of `y`; it is reported as
/// 0 when `y` is constant.
pub fn ols_fit(x: &DesignMatrix) -> Result<OlsFit> {
    let (n, k) = (x.n_rows(), x.n_cols());
    if n <= k {
        return Err(Error::TooFewObservations { n, k });
    }
    let Qr { r, qty } = householder_qr(x)?;

    let mut beta = vec![0.0; k];
    for i in (0..k).rev() {
        let s: f64 = (i + 1..k).map(|j| r[i][j] * beta[j]).sum();
        beta[i] = (qty[i] - s) / r[i][i];
    }

    let rinv = upper_triangular_inverse(&r);
    let mut xtx_inv = vec![vec![0.0; k]; k];
    for i in 0..k {
        for j in i..k {
            let s: f64 = (j..k).map(|m| rinv[i][m] * rinv[j][m]).sum();
            xtx_inv[i][j] = s;
            xtx_inv[j][i] = s;
        }
    }

    let fitted = x.fitted(&beta);
    let residuals: Vec<f64> = x.y.iter().zip(&fitted).map(|(y, f)| y - f).collect();
    let mean = x.y.iter().sum::<f64>() / n as f64;
    let sst: f64 = x.y.iter().map(|y| (y - mean).powi(2)).sum();
    let ssr: f64 = residuals.iter().map(|e| e * e).sum();
    let r_squared = if sst > 0.0 {
        (1.0 - ssr / sst).clamp(0.0, 1.0)
    } else {
        0.0
    };

    Ok(OlsFit {
        coefficients: beta,
        residuals,
        r_squared,
        xtx_inv,
    })
}

/// Cluster-robust covariance with the `G/(G-1) * (N-1)/(N-K)` correction.
pub fn cluster_robust_vcov(x: &DesignMatrix, residuals: &[f64]) -> Result<Vec<Vec<f64>>> {
    let g = x.n_clusters();
    if g < 2 {
        return Err(Error::TooFewClusters(g));
    }
    let fit = ols_fit(x)?;
    Ok(sandwich(x, &fit.xtx_inv, residuals))
}

fn sandwich(x: &DesignMatrix, bread: &[Vec<f64>], residuals: &[f64]) -> Vec<Vec<f64>> {
    let (n, k, g) = (x.n_rows(), x.n_cols(), x.n_clusters());
    let mut scores = vec![vec![0.0; k]; g];
    for (j, col) in x.columns.iter().enumerate() {
        for i in 0..n {
            scores[x.clusters[i]][j] += col[i] * residuals[i];
        }
    }
    let mut meat = vec![vec![0.0; k]; k];
    for s in &scores {
        for a in 0..k {
            for b in 0..k {
                meat[a][b] += s[a] * s[b];
            }
        }
    }
    let c = (g as f64 / (g as f64 - 1.0)) * ((n as f64 - 1.0) / (n as f64 - k as f64));
    let bm = matmul(bread, &meat);
    let v = matmul(&bm, bread);
    (0..k)
        .map(|a| (0..k).map(|b| 0.5 * c * (v[a][b] + v[b][a])).collect())
        .collect()
}

fn matmul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let k = b.len();
    a.iter()
        .map(|row| {
            (0..b[0].len())
                .map(|j| (0..k).map(|m| row[m] * b[m][j]).sum())
                .collect()
        })
        .collect()
}

/// `beta ± t_{0.975, G-1} · se`.
pub fn confidence_interval(beta: f64, se: f64, n_clusters: usize) -> (f64, f64) {
    let q = special::student_t_quantile(0.975, (n_clusters - 1) as f64);
    (beta - q * se, beta + q * se)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub name: String,
    pub coefficient: f64,
    pub std_error: f64,
    pub t_stat: f64,
    pub p_value: f64,
    pub ci_lower: f64,
    pub ci_upper: f64,
}

impl Term {
    /// `***` for p < 0.01, `**` for p < 0.05, `*` for p < 0.1.
    pub fn stars(&self) -> &'static str {
        significance_stars(self.p_value)
    }
}

pub fn significance_stars(p: f64) -> &'static str {
    if p < 0.01 {
        "***"
    } else if p < 0.05 {
        "**"
    } else if p < 0.1 {
        "*"
    } else {
        ""
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionResult {
    pub terms: Vec<Term>,
    pub n_observations: usize,
    pub n_clusters: usize,
    pub r_squared: f64,
}

impl RegressionResult {
    pub fn term(&self, name: &str) -> Option<&Term> {
        self.terms.iter().find(|t| t.name == name)
    }
}

/// OLS with cluster-robust standard errors, t(G-1) p-values and 95%
/// intervals.
pub fn fit_clustered(x: &DesignMatrix) -> Result<RegressionResult> {
    let g = x.n_clusters();
    if g < 2 {
        return Err(Error::TooFewClusters(g));
    }
    let fit = ols_fit(x)?;
    let v = sandwich(x, &fit.xtx_inv, &fit.residuals);
    let dof = (g - 1) as f64;
    let terms = x
        .names
        .iter()
        .enumerate()
        .map(|(j, name)| {
            let coefficient = fit.coefficients[j];
            let std_error = v[j][j].max(0.0).sqrt();
            let t_stat = if std_error > 0.0 {
                coefficient / std_error
            } else if coefficient == 0.0 {
                0.0
            } else {
                coefficient.signum() * f64::INFINITY
            };
            let (ci_lower, ci_upper) = confidence_interval(coefficient, std_error, g);
            Term {
                name: name.clone(),
                coefficient,
                std_error,
                t_stat,
                p_value: special::student_t_two_sided_p(t_stat, dof),
                ci_lower,
                ci_upper,
            }
        })
        .collect();
    Ok(RegressionResult {
        terms,
        n_observations: x.n_rows(),
        n_clusters: g,
        r_squared: fit.r_squared,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn design(xs: &[f64], y: &[f64], clusters: &[&str]) -> DesignMatrix {
        DesignMatrix::with_intercept(y.to_vec(), vec![("x".into(), xs.to_vec())], clusters).unwrap()
    }

    #[test]
    fn exact_line() {
        let x = [1.0, 2.0, 3.0, 4.0, 5.0];
        let d = design(&x, &x, &["a", "b", "c", "d", "e"]);
        let fit = ols_fit(&d).unwrap();
        assert!(fit.coefficients[0].abs() < 1e-12);
        assert!((fit.coefficients[1] - 1.0).abs() < 1e-12);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_response() {
        let d = design(&[1.0, 2.0, 4.0, 8.0], &[3.0; 4], &["a", "a", "b", "b"]);
        let fit = ols_fit(&d).unwrap();
        assert!(fit.coefficients[1].abs() < 1e-12);
        assert!((fit.coefficients[0] - 3.0).abs() < 1e-12);
        assert_eq!(fit.r_squared, 0.0);
    }

    #[test]
    fn collinear_column_is_named() {
        let d = DesignMatrix::with_intercept(
            vec![1.0, 2.0, 3.0, 5.0],
            vec![
                ("gdp".into(), vec![1.0, 2.0, 3.0, 4.0]),
                ("gdp_twice".into(), vec![2.0, 4.0, 6.0, 8.0]),
            ],
            &["a", "b", "c", "d"],
        )
        .unwrap();
        match ols_fit(&d) {
            Err(Error::RankDeficient(name)) => assert_eq!(name, "gdp_twice"),
            other => panic!("expected rank deficiency, got {other:?}"),
        }
        let flat = design(&[2.0; 4], &[1.0, 2.0, 3.0, 4.0], &["a", "b", "c", "d"]);
        assert!(matches!(ols_fit(&flat), Err(Error::RankDeficient(n)) if n == "x"));
    }

    #[test]
    fn needs_more_rows_than_columns() {
        let d = design(&[1.0, 2.0], &[1.0, 2.0], &["a", "b"]);
        assert!(matches!(
            ols_fit(&d),
            Err(Error::TooFewObservations { n: 2, k: 2 })
        ));
    }

    #[test]
    fn single_cluster_is_rejected() {
        let d = design(&[1.0, 2.0, 3.0], &[1.0, 3.0, 2.0], &["a", "a", "a"]);
        assert!(matches!(fit_clustered(&d), Err(Error::TooFewClusters(1))));
        assert!(matches!(
            cluster_robust_vcov(&d, &[0.0; 3]),
            Err(Error::TooFewClusters(1))
        ));
    }

    #[test]
    fn zero_residuals_give_zero_covariance() {
        let d = design(
            &[1.0, 2.0, 3.0, 4.0],
            &[1.0, 2.0, 3.0, 4.0],
            &["a", "a", "b", "b"],
        );
        let v = cluster_robust_vcov(&d, &[0.0; 4]).unwrap();
        assert!(v.iter().flatten().all(|e| *e == 0.0));
    }

    #[test]
    fn singleton_clusters_reduce_to_hc1() {
        let xs = [0.5, 1.0, 2.5, 3.0, 4.5, 6.0];
        let ys = [1.0, 0.7, 3.1, 2.2, 5.9, 5.1];
        let d = design(&xs, &ys, &["a", "b", "c", "d", "e", "f"]);
        let fit = ols_fit(&d).unwrap();
        let v = cluster_robust_vcov(&d, &fit.residuals).unwrap();
        // HC1 written out: c (X'X)^-1 (sum_i e_i^2 x_i x_i') (X'X)^-1, G = N.
        let n = 6.0;
        let c = n / (n - 1.0) * ((n - 1.0) / (n - 2.0));
        let mut meat = [[0.0; 2]; 2];
        for (x, e) in xs.iter().zip(&fit.residuals) {
            let row = [1.0, *x];
            let e2 = e.powi(2);
            for a in 0..2 {
                for b in 0..2 {
                    meat[a][b] += e2 * row[a] * row[b];
                }
            }
        }
        let b = &fit.xtx_inv;
        for a in 0..2 {
            for bb in 0..2 {
                let mut s = 0.0;
                for p in 0..2 {
                    for q in 0..2 {
                        s += b[a][p] * meat[p][q] * b[q][bb];
                    }
                }
                assert!((v[a][bb] - c * s).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn interval_collapses_with_zero_se() {
        assert_eq!(confidence_interval(0.29, 0.0, 160), (0.29, 0.29));
        let (lo, hi) = confidence_interval(0.29, 0.05, 160);
        assert!(lo < 0.29 && 0.29 < hi);
        assert!((hi - 0.29 - 0.05 * 1.974_996_212_767_476).abs() < 1e-10);
    }

    #[test]
    fn all_zero_response_gives_zero_coefficients() {
        let d = design(&[1.0, 2.0, 3.0, 4.0], &[0.0; 4], &["a", "a", "b", "b"]);
        let res = fit_clustered(&d).unwrap();
        for t in &res.terms {
            assert_eq!(t.coefficient, 0.0);
            assert_eq!(t.p_value, 1.0);
        }
    }

    #[test]
    fn stars() {
        assert_eq!(significance_stars(0.009), "***");
        assert_eq!(significance_stars(0.01), "**");
        assert_eq!(significance_stars(0.07), "*");
        assert_eq!(significance_stars(0.1), "");
    }

    fn instance() -> impl Strategy<Value = (Vec<f64>, Vec<f64>, Vec<usize>)> {
        (8usize..40).prop_flat_map(|n| {
            (
                prop::collection::vec(-50.0f64..50.0, n),
                prop::collection::vec(-50.0f64..50.0, n),
                prop::collection::vec(0usize..5, n),
            )
        })
    }

    fn build(xs: &[f64], ys: &[f64], cl: &[usize]) -> DesignMatrix {
        let keys: Vec<String> = cl.iter().map(|c| format!("c{c}")).collect();
        let sq: Vec<f64> = xs.iter().map(|x| x * x / 10.0).collect();
        DesignMatrix::with_intercept(
            ys.to_vec(),
            vec![("x".into(), xs.to_vec()), ("x2".into(), sq)],
            &keys,
        )
        .unwrap()
    }

    proptest! {
        #[test]
        fn residuals_are_orthogonal_to_columns((xs, ys, cl) in instance()) {
            let d = build(&xs, &ys, &cl);
            let fit = ols_fit(&d).unwrap();
            let scale = ys.iter().fold(1.0f64, |m, y| m.max(y.abs())) * 2500.0 * d.n_rows() as f64;
            for j in 0..d.n_cols() {
                let dot: f64 = d.column(j).iter().zip(&fit.residuals).map(|(a, b)| a * b).sum();
                prop_assert!(dot.abs() < 1e-8 * scale);
            }
            prop_assert!((0.0..=1.0).contains(&fit.r_squared));
        }

        #[test]
        fn covariance_is_symmetric_psd((xs, ys, cl) in instance(), w in prop::collection::vec(-1.0f64..1.0, 3)) {
            let d = build(&xs, &ys, &cl);
            prop_assume!(d.n_clusters() >= 2);
            let fit = ols_fit(&d).unwrap();
            let v = cluster_robust_vcov(&d, &fit.residuals).unwrap();
            let mut quad = 0.0;
            for a in 0..3 {
                for b in 0..3 {
                    prop_assert_eq!(v[a][b], v[b][a]);
                    quad += w[a] * v[a][b] * w[b];
                }
            }
            let tr: f64 = (0..3).map(|a| v[a][a]).sum();
            prop_assert!(quad >= -1e-9 * tr.max(1e-300));
        }

        #[test]
        fn invariant_under_row_order_and_relabeling((xs, ys, cl) in instance(), rot in 1usize..7) {
            let d = build(&xs, &ys, &cl);
            prop_assume!(d.n_clusters() >= 2);
            let n = xs.len();
            let perm: Vec<usize> = (0..n).map(|i| (i * 7 + rot) % n).collect();
            prop_assume!({ let mut p = perm.clone(); p.sort(); p.dedup(); p.len() == n });
            let xs2: Vec<f64> = perm.iter().map(|&i| xs[i]).collect();
            let ys2: Vec<f64> = perm.iter().map(|&i| ys[i]).collect();
            let cl2: Vec<usize> = perm.iter().map(|&i| cl[i] + 100).collect();
            let a = fit_clustered(&d).unwrap();
            let b = fit_clustered(&build(&xs2, &ys2, &cl2)).unwrap();
            for (ta, tb) in a.terms.iter().zip(&b.terms) {
                prop_assert!((ta.coefficient - tb.coefficient).abs() < 1e-10 * ta.coefficient.abs().max(1.0));
                prop_assert!((ta.std_error - tb.std_error).abs() < 1e-10 * ta.std_error.max(1.0));
            }
        }

        #[test]
        fn rescaling_a_regressor((xs, ys, cl) in instance(), s in prop::sample::select(vec![0.001, 0.5, 3.0, 1e4])) {
            let keys: Vec<String> = cl.iter().map(|c| format!("c{c}")).collect();
            let mk = |scale: f64| DesignMatrix::with_intercept(
                ys.clone(),
                vec![("x".into(), xs.iter().map(|x| x * scale).collect())],
                &keys,
            ).unwrap();
            let base = mk(1.0);
            prop_assume!(base.n_clusters() >= 2);
            let a = fit_clustered(&base).unwrap();
            let b = fit_clustered(&mk(s)).unwrap();
            let (ta, tb) = (&a.terms[1], &b.terms[1]);
            prop_assert!((tb.coefficient * s - ta.coefficient).abs() < 1e-9 * ta.coefficient.abs().max(1e-3));
            prop_assert!((tb.std_error * s - ta.std_error).abs() < 1e-9 * ta.std_error.max(1e-3));
            prop_assert!((tb.t_stat - ta.t_stat).abs() < 1e-7 * ta.t_stat.abs().max(1.0));
            prop_assert_eq!(ta.stars(), tb.stars());
        }
    }
}
