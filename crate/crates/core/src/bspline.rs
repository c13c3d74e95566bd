//! Clamped uniform B-spline bases and least-squares coefficient fits.
//!
//! A basis of order `o` (degree `o - 1`) with `K` functions lives on the
//! normalized domain `[0, 1]`. Its knot vector has `K + o` entries: `o`
//! zeros, `K - o` uniformly spaced interior knots and `o` ones. Evaluation
//! follows the Cox–de Boor recursion with `0/0 := 0`; the last knot span is
//! closed on the right so every basis is defined on all of `[0, 1]`.
//!
//! A [`DesignMatrix`] samples a basis on `P` equispaced points
//! `t_p = p / (P - 1)` and keeps a factorization of that matrix, so fitting
//! a series costs one `K x P` product and a triangular solve.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tree::FeatureMatrix;

/// Relative threshold on the diagonal of `R` below which the QR route is
/// abandoned for the SVD pseudo-inverse.
const QR_RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BSplineBasis {
    order: usize,
    num_basis: usize,
    knots: Vec<f64>,
}

impl BSplineBasis {
    /// Clamped uniform basis with `num_basis` functions of the given order.
    pub fn new(order: usize, num_basis: usize) -> Result<Self> {
        if order < 1 || num_basis < order {
            return Err(Error::InvalidBasis { order, num_basis });
        }
        let interior = num_basis - order;
        let spacing = (interior + 1) as f64;
        let mut knots = Vec::with_capacity(num_basis + order);
        knots.extend(std::iter::repeat_n(0.0, order));
        knots.extend((1..=interior).map(|j| j as f64 / spacing));
        knots.extend(std::iter::repeat_n(1.0, order));
        Ok(Self {
            order,
            num_basis,
            knots,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn num_basis(&self) -> usize {
        self.num_basis
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    /// Values of all `K` basis functions at `t`.
    pub fn eval(&self, t: f64) -> Result<Vec<f64>> {
        check_domain(t)?;
        let mut work = vec![0.0; self.knots.len() - 1];
        self.eval_into(t, &mut work);
        work.truncate(self.num_basis);
        Ok(work)
    }

    /// Evaluates into `work` (length `K + o - 1`); the first `K` entries
    /// hold the result. `t` must already be in `[0, 1]`.
    fn eval_into(&self, t: f64, work: &mut [f64]) {
        let knots = &self.knots;
        debug_assert_eq!(work.len(), knots.len() - 1);
        work.fill(0.0);
        work[self.span(t)] = 1.0;
        for r in 2..=self.order {
            // In-place: entry i reads entries i and i + 1 of the previous order,
            // and i + 1 has not been overwritten yet.
            for i in 0..knots.len() - r {
                let left_den = knots[i + r - 1] - knots[i];
                let right_den = knots[i + r] - knots[i + 1];
                let left = if left_den > 0.0 {
                    (t - knots[i]) / left_den * work[i]
                } else {
                    0.0
                };
                let right = if right_den > 0.0 {
                    (knots[i + r] - t) / right_den * work[i + 1]
                } else {
                    0.0
                };
                work[i] = left + right;
            }
        }
    }

    /// Index `i` of the knot span `[knots[i], knots[i + 1])` containing `t`;
    /// `t = 1` maps to the last non-empty span.
    fn span(&self, t: f64) -> usize {
        if t >= 1.0 {
            return self.num_basis - 1;
        }
        self.knots.partition_point(|&k| k <= t) - 1
    }

    /// Value of the spline `sum_j coeffs[j] * B_j(t)`.
    pub fn reconstruct(&self, coeffs: &[f64], t: f64) -> Result<f64> {
        check_domain(t)?;
        if coeffs.len() != self.num_basis {
            return Err(Error::LengthMismatch {
                expected: self.num_basis,
                actual: coeffs.len(),
            });
        }
        let mut work = vec![0.0; self.knots.len() - 1];
        self.eval_into(t, &mut work);
        Ok(dot(coeffs, &work[..self.num_basis]))
    }

    /// `P x K` matrix of basis values at the given points, row-major.
    pub(crate) fn eval_rows(&self, points: &[f64]) -> Vec<f64> {
        let k = self.num_basis;
        let mut out = Vec::with_capacity(points.len() * k);
        let mut work = vec![0.0; self.knots.len() - 1];
        for &t in points {
            self.eval_into(t, &mut work);
            out.extend_from_slice(&work[..k]);
        }
        out
    }
}

fn check_domain(t: f64) -> Result<()> {
    if (0.0..=1.0).contains(&t) {
        Ok(())
    } else {
        Err(Error::OutOfDomain(t))
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `P` equispaced points covering both ends of `[0, 1]`.
pub fn sample_grid(n_points: usize) -> Result<Vec<f64>> {
    if n_points < 2 {
        return Err(Error::TooFewSamples(n_points));
    }
    let last = (n_points - 1) as f64;
    Ok((0..n_points).map(|p| p as f64 / last).collect())
}

/// A basis sampled on a fixed grid, together with its least-squares solver.
#[derive(Debug, Clone)]
pub struct DesignMatrix {
    basis: BSplineBasis,
    sample_points: Vec<f64>,
    /// Row-major `P x K`.
    values: Vec<f64>,
    solver: Solver,
}

#[derive(Debug, Clone)]
enum Solver {
    /// Thin QR: row-major `Q^T` (`K x P`) and upper-triangular `R` (`K x K`).
    Qr { qt: Vec<f64>, r: Vec<f64> },
    /// Row-major `K x P` pseudo-inverse for rank-deficient designs.
    PseudoInverse(Vec<f64>),
}

impl DesignMatrix {
    pub fn new(basis: &BSplineBasis, n_samples: usize) -> Result<Self> {
        let sample_points = sample_grid(n_samples)?;
        let values = basis.eval_rows(&sample_points);
        let k = basis.num_basis();
        let a = DMatrix::from_row_slice(n_samples, k, &values);
        Ok(Self {
            basis: basis.clone(),
            sample_points,
            values,
            solver: least_squares_solver(&a),
        })
    }

    pub fn basis(&self) -> &BSplineBasis {
        &self.basis
    }

    pub fn sample_points(&self) -> &[f64] {
        &self.sample_points
    }

    pub fn n_samples(&self) -> usize {
        self.sample_points.len()
    }

    pub fn num_basis(&self) -> usize {
        self.basis.num_basis()
    }

    /// Row `p` holds `B_j(t_p)` for `j = 0..K`.
    pub fn row(&self, p: usize) -> &[f64] {
        let k = self.num_basis();
        &self.values[p * k..(p + 1) * k]
    }

    pub fn value(&self, p: usize, j: usize) -> f64 {
        self.values[p * self.num_basis() + j]
    }

    /// True when the sampled basis lacks full column rank and fits fall back
    /// to the minimum-norm solution.
    pub fn is_rank_deficient(&self) -> bool {
        matches!(self.solver, Solver::PseudoInverse(_))
    }

    /// Minimum-norm least-squares coefficients of `series` on this basis.
    pub fn fit(&self, series: &[f64]) -> Result<Vec<f64>> {
        if series.len() != self.n_samples() {
            return Err(Error::LengthMismatch {
                expected: self.n_samples(),
                actual: series.len(),
            });
        }
        let mut out = vec![0.0; self.num_basis()];
        self.fit_into(series, &mut out);
        Ok(out)
    }

    pub(crate) fn fit_into(&self, series: &[f64], out: &mut [f64]) {
        let p = self.n_samples();
        let k = out.len();
        match &self.solver {
            Solver::Qr { qt, r } => {
                for (j, c) in out.iter_mut().enumerate() {
                    *c = dot(&qt[j * p..(j + 1) * p], series);
                }
                for j in (0..k).rev() {
                    let row = &r[j * k..(j + 1) * k];
                    let tail = dot(&row[j + 1..], &out[j + 1..]);
                    out[j] = (out[j] - tail) / row[j];
                }
            }
            Solver::PseudoInverse(x) => {
                for (j, c) in out.iter_mut().enumerate() {
                    *c = dot(&x[j * p..(j + 1) * p], series);
                }
            }
        }
    }

    /// `dm * coeffs` on the sample grid.
    pub fn evaluate(&self, coeffs: &[f64]) -> Result<Vec<f64>> {
        if coeffs.len() != self.num_basis() {
            return Err(Error::LengthMismatch {
                expected: self.num_basis(),
                actual: coeffs.len(),
            });
        }
        Ok((0..self.n_samples()).map(|p| dot(coeffs, self.row(p))).collect())
    }
}

/// Householder QR when `A` has clearly full column rank, SVD pseudo-inverse
/// (minimum-norm solutions) otherwise.
fn least_squares_solver(a: &DMatrix<f64>) -> Solver {
    let (rows, cols) = a.shape();
    if rows >= cols {
        let qr = a.clone().qr();
        let r = qr.r();
        let diag = r.diagonal().map(f64::abs);
        if diag.min() > QR_RANK_TOL * diag.max() {
            return Solver::Qr {
                qt: row_major(&qr.q().transpose()),
                r: row_major(&r),
            };
        }
    }
    let svd = a.clone().svd(true, true);
    let eps = svd.singular_values.max() * rows.max(cols) as f64 * f64::EPSILON;
    let pinv = svd
        .pseudo_inverse(eps)
        .expect("both singular vector sets were requested");
    Solver::PseudoInverse(row_major(&pinv))
}

fn row_major(m: &DMatrix<f64>) -> Vec<f64> {
    m.transpose().as_slice().to_vec()
}

/// `N x K` matrix of per-series spline coefficients for one basis.
#[derive(Debug, Clone)]
pub struct CoefficientMatrix {
    coeffs: FeatureMatrix,
    basis: BSplineBasis,
}

impl CoefficientMatrix {
    /// Fits every series on a basis of order `order` with `num_basis`
    /// functions, building the design matrix once.
    pub fn from_series<S: AsRef<[f64]>>(series_set: &[S], order: usize, num_basis: usize) -> Result<Self> {
        let basis = BSplineBasis::new(order, num_basis)?;
        let first = series_set.first().ok_or(Error::EmptyTrainingSet)?;
        let dm = DesignMatrix::new(&basis, first.as_ref().len())?;
        Self::from_design(&dm, series_set)
    }

    pub fn from_design<S: AsRef<[f64]>>(dm: &DesignMatrix, series_set: &[S]) -> Result<Self> {
        let k = dm.num_basis();
        let mut data = vec![0.0; series_set.len() * k];
        for (series, row) in series_set.iter().zip(data.chunks_exact_mut(k)) {
            let series = series.as_ref();
            if series.len() != dm.n_samples() {
                return Err(Error::LengthMismatch {
                    expected: dm.n_samples(),
                    actual: series.len(),
                });
            }
            dm.fit_into(series, row);
        }
        Ok(Self {
            coeffs: FeatureMatrix::from_vec(data, series_set.len(), k)?,
            basis: dm.basis().clone(),
        })
    }

    pub fn basis(&self) -> &BSplineBasis {
        &self.basis
    }

    pub fn n_rows(&self) -> usize {
        self.coeffs.n_rows()
    }

    pub fn n_cols(&self) -> usize {
        self.coeffs.n_cols()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        self.coeffs.row(i)
    }

    pub fn features(&self) -> &FeatureMatrix {
        &self.coeffs
    }

    pub fn into_features(self) -> FeatureMatrix {
        self.coeffs
    }
}
