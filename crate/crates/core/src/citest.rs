//! Pearson correlation, partial correlation and the Fisher-z
//! conditional-independence test with a strength-of-effect cutoff.
//!
//! The Fisher-z statistic is `sqrt(n - |S| - 3) * |atanh(r)|` with a
//! two-sided normal p-value; the edge is declared independent when the
//! p-value exceeds alpha, or when `r^2` falls below the strength-of-effect
//! threshold.

use rayon::prelude::*;
use thiserror::Error;

use crate::dataset::Dataset;
use crate::graph::PartialDag;
use crate::linalg::{LinalgError, Matrix};
use crate::special::normal_sf;
use crate::Scalar;

/// Pivot magnitude below which a correlation submatrix is treated as singular.
pub const SINGULAR_PIVOT: f64 = 1e-12;
/// Correlations are clamped to `±(1 - CLAMP_MARGIN)` before the z-transform.
pub const CLAMP_MARGIN: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CiError {
    #[error("column `{0}` has zero variance")]
    DegenerateColumn(String),
    #[error("need at least 2 rows, got {0}")]
    TooFewRows(usize),
    #[error("correlation submatrix for ({i}, {j} | {cond:?}) is numerically singular")]
    Singular { i: usize, j: usize, cond: Vec<usize> },
    #[error("sample size {n} too small for conditioning set of size {cond_size}")]
    InsufficientSample { n: usize, cond_size: usize },
    #[error("invalid variable indices ({i}, {j} | {cond:?}) for dimension {dim}")]
    InvalidIndices { i: usize, j: usize, cond: Vec<usize>, dim: usize },
    #[error("invalid correlation matrix: {0}")]
    InvalidMatrix(String),
    #[error("significance level must lie in (0, 1), got {0}")]
    InvalidAlpha(f64),
}

/// Symmetric unit-diagonal matrix of sample correlations.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix<F> {
    values: Matrix<F>,
    sample_size: usize,
}

impl<F: Scalar> CorrelationMatrix<F> {
    /// Validates and wraps an existing matrix.
    pub fn from_matrix(values: Matrix<F>, sample_size: usize) -> Result<Self, CiError> {
        let d = values.rows();
        if values.cols() != d || d == 0 {
            return Err(CiError::InvalidMatrix("not square".into()));
        }
        if sample_size < 2 {
            return Err(CiError::TooFewRows(sample_size));
        }
        let tol = F::lit(1e-12);
        for i in 0..d {
            if (values[(i, i)] - F::one()).abs() > tol {
                return Err(CiError::InvalidMatrix(format!("diagonal entry {i} is not 1")));
            }
            for j in 0..d {
                let v = values[(i, j)];
                if !(v.abs() <= F::one() + tol) || (v - values[(j, i)]).abs() > tol {
                    return Err(CiError::InvalidMatrix(format!("entry ({i}, {j})")));
                }
            }
        }
        Ok(Self { values, sample_size })
    }

    pub fn identity(dim: usize, sample_size: usize) -> Self {
        Self { values: Matrix::identity(dim), sample_size }
    }

    pub fn dim(&self) -> usize {
        self.values.rows()
    }

    pub fn sample_size(&self) -> usize {
        self.sample_size
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> F {
        self.values[(i, j)]
    }

    pub fn values(&self) -> &Matrix<F> {
        &self.values
    }

    /// Partial correlation of `i` and `j` given `cond`, from the inverse of
    /// the correlation submatrix over `{i, j} ∪ cond`.
    pub fn partial_correlation(&self, i: usize, j: usize, cond: &[usize]) -> Result<F, CiError> {
        let d = self.dim();
        if i == j
            || i >= d
            || j >= d
            || cond.iter().any(|&k| k >= d || k == i || k == j)
            || cond.len() + 2 > d
        {
            return Err(CiError::InvalidIndices { i, j, cond: cond.to_vec(), dim: d });
        }
        if cond.is_empty() {
            return Ok(self.values[(i, j)]);
        }
        let mut idx = Vec::with_capacity(cond.len() + 2);
        idx.push(i);
        idx.push(j);
        idx.extend_from_slice(cond);
        let sub = Matrix::from_fn(idx.len(), idx.len(), |a, b| self.values[(idx[a], idx[b])]);
        let p = sub.inverse(F::lit(SINGULAR_PIVOT)).map_err(|e| match e {
            LinalgError::Singular { .. } => CiError::Singular { i, j, cond: cond.to_vec() },
            other => CiError::InvalidMatrix(other.to_string()),
        })?;
        let denom = (p[(0, 0)] * p[(1, 1)]).sqrt();
        if !(denom > F::zero()) {
            return Err(CiError::Singular { i, j, cond: cond.to_vec() });
        }
        let r = -p[(0, 1)] / denom;
        Ok(r.max(-F::one()).min(F::one()))
    }
}

/// Sample Pearson correlation matrix of the dataset's columns.
pub fn correlation_matrix<F: Scalar>(data: &Dataset<F>) -> Result<CorrelationMatrix<F>, CiError> {
    let n = data.n_rows();
    if n < 2 {
        return Err(CiError::TooFewRows(n));
    }
    let d = data.n_cols();
    let centered: Vec<Vec<F>> = (0..d)
        .map(|j| {
            let m = data.mean(j);
            data.column(j).iter().map(|v| *v - m).collect()
        })
        .collect();
    let ss: Vec<F> = centered.iter().map(|c| dot(c, c)).collect();
    for (j, s) in ss.iter().enumerate() {
        if !(*s > F::zero()) {
            return Err(CiError::DegenerateColumn(data.name(j).to_string()));
        }
    }
    let rows: Vec<Vec<F>> = (0..d)
        .into_par_iter()
        .map(|i| {
            (0..d)
                .map(|j| match j.cmp(&i) {
                    std::cmp::Ordering::Equal => F::one(),
                    std::cmp::Ordering::Less => F::zero(),
                    std::cmp::Ordering::Greater => {
                        let r = dot(&centered[i], &centered[j]) / (ss[i] * ss[j]).sqrt();
                        r.max(-F::one()).min(F::one())
                    }
                })
                .collect()
        })
        .collect();
    let mut values = Matrix::from_fn(d, d, |i, j| rows[i][j]);
    for i in 0..d {
        for j in 0..i {
            values[(i, j)] = values[(j, i)];
        }
    }
    Ok(CorrelationMatrix { values, sample_size: n })
}

fn dot<F: Scalar>(a: &[F], b: &[F]) -> F {
    a.iter().zip(b).map(|(x, y)| *x * *y).sum()
}

/// Outcome of a Fisher-z test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FisherZ<F> {
    pub independent: bool,
    pub statistic: F,
    pub p_value: F,
}

/// Fisher-z test of zero (partial) correlation.
pub fn fisher_z_test<F: Scalar>(
    r: F,
    n: usize,
    cond_size: usize,
    alpha: F,
) -> Result<FisherZ<F>, CiError> {
    if n < cond_size + 4 {
        return Err(CiError::InsufficientSample { n, cond_size });
    }
    let bound = F::one() - F::lit(CLAMP_MARGIN);
    let r = r.max(-bound).min(bound);
    let z = F::lit(0.5) * ((F::one() + r) / (F::one() - r)).ln();
    let statistic = F::from_usize_lossy(n - cond_size - 3).sqrt() * z.abs();
    let p_value = F::lit((2.0 * normal_sf(statistic.as_f64())).min(1.0));
    Ok(FisherZ { independent: p_value > alpha, statistic, p_value })
}

/// Result of one conditional-independence decision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CiDecision<F> {
    pub independent: bool,
    pub partial_correlation: F,
    pub p_value: F,
    /// The dependence was dropped because `r^2 < soe`.
    pub filtered_by_soe: bool,
}

/// Fisher-z decision on `i ⫫ j | cond` with strength-of-effect cutoff `soe`.
pub fn cond_independent<F: Scalar>(
    c: &CorrelationMatrix<F>,
    i: usize,
    j: usize,
    cond: &[usize],
    alpha: F,
    soe: F,
) -> Result<CiDecision<F>, CiError> {
    let r = c.partial_correlation(i, j, cond)?;
    let fz = fisher_z_test(r, c.sample_size(), cond.len(), alpha)?;
    let filtered = r * r < soe;
    Ok(CiDecision {
        independent: filtered || fz.independent,
        partial_correlation: r,
        p_value: fz.p_value,
        filtered_by_soe: filtered,
    })
}

/// A conditional-independence decision procedure over variables `0..n_vars`.
pub trait IndependenceTest: Sync {
    fn n_vars(&self) -> usize;

    fn independent(&self, x: usize, y: usize, cond: &[usize]) -> Result<bool, CiError>;
}

/// Fisher-z test over a precomputed correlation matrix.
#[derive(Debug, Clone, Copy)]
pub struct FisherZTest<'a, F> {
    corr: &'a CorrelationMatrix<F>,
    alpha: F,
    soe: F,
}

impl<'a, F: Scalar> FisherZTest<'a, F> {
    pub fn new(corr: &'a CorrelationMatrix<F>, alpha: F, soe: F) -> Result<Self, CiError> {
        if !(alpha > F::zero() && alpha < F::one()) {
            return Err(CiError::InvalidAlpha(alpha.as_f64()));
        }
        Ok(Self { corr, alpha, soe: soe.max(F::zero()) })
    }

    pub fn decide(&self, x: usize, y: usize, cond: &[usize]) -> Result<CiDecision<F>, CiError> {
        cond_independent(self.corr, x, y, cond, self.alpha, self.soe)
    }
}

impl<F: Scalar> IndependenceTest for FisherZTest<'_, F> {
    fn n_vars(&self) -> usize {
        self.corr.dim()
    }

    fn independent(&self, x: usize, y: usize, cond: &[usize]) -> Result<bool, CiError> {
        self.decide(x, y, cond).map(|d| d.independent)
    }
}

/// Perfect test reading independencies off a known DAG.
#[derive(Debug, Clone, Copy)]
pub struct DSeparationOracle<'a> {
    dag: &'a PartialDag,
}

impl<'a> DSeparationOracle<'a> {
    pub fn new(dag: &'a PartialDag) -> Self {
        Self { dag }
    }
}

impl IndependenceTest for DSeparationOracle<'_> {
    fn n_vars(&self) -> usize {
        self.dag.node_count()
    }

    fn independent(&self, x: usize, y: usize, cond: &[usize]) -> Result<bool, CiError> {
        self.dag.d_separated(x, y, cond).map_err(|e| CiError::InvalidMatrix(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ds(cols: Vec<Vec<f64>>) -> Dataset<f64> {
        Dataset::with_default_names(cols).unwrap()
    }

    #[test]
    fn duplicated_column_has_unit_correlation() {
        let a = vec![1.0, 3.0, 2.0, 5.0, 4.0];
        let c = correlation_matrix(&ds(vec![a.clone(), a])).unwrap();
        assert!((c.get(0, 1) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn negated_column_has_minus_one() {
        let a = vec![1.0, 3.0, 2.0, 5.0, 4.0];
        let b = a.iter().map(|v| -v).collect();
        let c = correlation_matrix(&ds(vec![a, b])).unwrap();
        assert!((c.get(0, 1) + 1.0).abs() < 1e-15);
    }

    #[test]
    fn constant_column_is_named() {
        let err = correlation_matrix(&ds(vec![vec![1.0, 2.0, 3.0], vec![4.0; 3]])).unwrap_err();
        assert_eq!(err, CiError::DegenerateColumn("X1".into()));
    }

    #[test]
    fn empty_conditioning_set_returns_entry() {
        let c = correlation_matrix(&ds(vec![
            vec![1.0, 3.0, 2.0, 5.0, 4.0],
            vec![2.0, 1.0, 2.5, 4.0, 6.0],
            vec![0.0, 1.0, 0.5, 0.2, 0.1],
        ]))
        .unwrap();
        assert_eq!(c.partial_correlation(0, 1, &[]).unwrap(), c.get(0, 1));
    }

    #[test]
    fn identity_gives_zero_partials() {
        let c = CorrelationMatrix::<f64>::identity(5, 100);
        assert_eq!(c.partial_correlation(0, 3, &[1, 2, 4]).unwrap(), 0.0);
        assert_eq!(c.partial_correlation(4, 1, &[]).unwrap(), 0.0);
    }

    #[test]
    fn singular_submatrix_is_reported() {
        let a = vec![1.0, 3.0, 2.0, 5.0, 4.0];
        let b = vec![2.0, 1.0, 2.5, 4.0, 6.0];
        let c = correlation_matrix(&ds(vec![a.clone(), b, a])).unwrap();
        assert!(matches!(c.partial_correlation(1, 0, &[2]), Err(CiError::Singular { .. })));
    }

    #[test]
    fn bad_indices_rejected() {
        let c = CorrelationMatrix::<f64>::identity(3, 10);
        assert!(c.partial_correlation(0, 0, &[]).is_err());
        assert!(c.partial_correlation(0, 1, &[1]).is_err());
        assert!(c.partial_correlation(0, 3, &[]).is_err());
    }

    #[test]
    fn zero_correlation_is_independent_everywhere() {
        for alpha in [0.001, 0.05, 0.5, 0.999] {
            let t = fisher_z_test(0.0, 50, 2, alpha).unwrap();
            assert_eq!(t.statistic, 0.0);
            assert_eq!(t.p_value, 1.0);
            assert!(t.independent);
        }
    }

    #[test]
    fn worked_fisher_example() {
        let t = fisher_z_test(0.2_f64, 103, 0, 0.05).unwrap();
        let expected = 0.5 * 1.5_f64.ln() * 10.0;
        assert!((t.statistic - expected).abs() < 1e-12);
        assert!((t.statistic - 2.027).abs() < 1e-3);
        assert!(!t.independent);
    }

    #[test]
    fn insufficient_sample() {
        assert_eq!(
            fisher_z_test(0.1, 5, 2, 0.05),
            Err(CiError::InsufficientSample { n: 5, cond_size: 2 })
        );
    }

    #[test]
    fn perfect_correlation_is_clamped() {
        let t = fisher_z_test(1.0_f64, 100, 0, 0.05).unwrap();
        assert!(t.statistic.is_finite());
        assert!(!t.independent);
    }

    #[test]
    fn soe_filter_forces_independence() {
        let mut m = Matrix::<f64>::identity(2);
        m[(0, 1)] = 0.09;
        m[(1, 0)] = 0.09;
        for n in [10, 1_000, 1_000_000] {
            let c = CorrelationMatrix::from_matrix(m.clone(), n).unwrap();
            let d = cond_independent(&c, 0, 1, &[], 0.05, 0.01).unwrap();
            assert!(d.independent && d.filtered_by_soe);
        }
    }

    #[test]
    fn zero_soe_matches_plain_fisher() {
        let mut m = Matrix::<f64>::identity(2);
        m[(0, 1)] = 0.03;
        m[(1, 0)] = 0.03;
        let c = CorrelationMatrix::from_matrix(m, 5000).unwrap();
        let d = cond_independent(&c, 0, 1, &[], 0.05, 0.0).unwrap();
        let f = fisher_z_test(0.03, 5000, 0, 0.05).unwrap();
        assert_eq!(d.independent, f.independent);
        assert_eq!(d.p_value, f.p_value);
        assert!(!d.filtered_by_soe);
    }

    #[test]
    fn works_in_single_precision() {
        let c = correlation_matrix(&Dataset::<f32>::with_default_names(vec![
            vec![1.0, 3.0, 2.0, 5.0, 4.0, 7.0],
            vec![2.0, 1.0, 2.5, 4.0, 6.0, 5.5],
            vec![0.0, 1.0, 0.5, 0.2, 0.1, 0.3],
        ])
        .unwrap())
        .unwrap();
        let r = c.partial_correlation(0, 1, &[2]).unwrap();
        assert!(r.abs() <= 1.0);
        assert!(fisher_z_test(r, 6, 1, 0.05).is_ok());
    }
}
