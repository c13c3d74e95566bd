//! Diversity of the functional representations an ensemble builds for one
//! observation.
//!
//! Curves are compared on a uniform grid over `[0, 1]` and integrals use the
//! trapezoid rule. Members sharing a basis produce identical curves, so a
//! [`RepresentationSet`] stores each distinct curve once with a multiplicity.

use rayon::prelude::*;
use serde::Serialize;

use crate::bspline::{dot, sample_grid, BSplineBasis};
use crate::dataset::Dataset;
use crate::ensemble::Ensemble;
use crate::error::{Error, Result};

pub const DEFAULT_GRID_SIZE: usize = 1000;

/// `G` equispaced points `g / (G - 1)`.
pub fn uniform_grid(grid_size: usize) -> Result<Vec<f64>> {
    sample_grid(grid_size)
}

/// Trapezoid rule for samples on the uniform grid of the same length.
pub fn trapezoid(values: &[f64]) -> Result<f64> {
    let g = values.len();
    if g < 2 {
        return Err(Error::TooFewSamples(g));
    }
    let h = 1.0 / (g - 1) as f64;
    let inner: f64 = values.iter().sum::<f64>() - 0.5 * (values[0] + values[g - 1]);
    Ok(h * inner)
}

/// `integral (a - b)^2` on the shared grid.
pub fn quadratic_difference(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::GridMismatch(a.len(), b.len()));
    }
    let sq: Vec<f64> = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).collect();
    trapezoid(&sq)
}

/// L² distance between two curves sampled on the same grid.
pub fn l2_distance(a: &[f64], b: &[f64]) -> Result<f64> {
    Ok(quadratic_difference(a, b)?.sqrt())
}

/// The curves of one observation, sampled on a common grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RepresentationSet {
    grid: Vec<f64>,
    values: Vec<Vec<f64>>,
    multiplicity: Vec<usize>,
}

impl RepresentationSet {
    /// Reconstructs each `(basis, coefficients)` curve on a `grid_size` grid.
    pub fn from_curves(curves: &[(&BSplineBasis, &[f64])], grid_size: usize) -> Result<Self> {
        let grid = uniform_grid(grid_size)?;
        let values = curves
            .iter()
            .map(|(basis, coeffs)| sample_curve(basis, coeffs, &grid))
            .collect::<Result<Vec<_>>>()?;
        let n = values.len();
        Ok(Self {
            grid,
            values,
            multiplicity: vec![1; n],
        })
    }

    /// Curves already sampled on the uniform grid of their common length.
    pub fn from_values(values: Vec<Vec<f64>>) -> Result<Self> {
        let n = values.len();
        Self::with_multiplicity(values, vec![1; n])
    }

    /// Distinct curves, each standing for `multiplicity[i]` identical members.
    pub fn with_multiplicity(values: Vec<Vec<f64>>, multiplicity: Vec<usize>) -> Result<Self> {
        if values.len() != multiplicity.len() {
            return Err(Error::LengthMismatch {
                expected: values.len(),
                actual: multiplicity.len(),
            });
        }
        if multiplicity.contains(&0) {
            return Err(Error::InvalidConfig("curve multiplicity must be positive".into()));
        }
        let g = values.first().map_or(0, Vec::len);
        if let Some(bad) = values.iter().find(|v| v.len() != g) {
            return Err(Error::GridMismatch(g, bad.len()));
        }
        let grid = uniform_grid(g)?;
        Ok(Self {
            grid,
            values,
            multiplicity,
        })
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    /// Number of curves, counting multiplicity.
    pub fn n_curves(&self) -> usize {
        self.multiplicity.iter().sum()
    }

    pub fn n_distinct(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self, i: usize) -> &[f64] {
        &self.values[i]
    }

    /// Pointwise mean curve.
    pub fn mean_curve(&self) -> Vec<f64> {
        let t = self.n_curves() as f64;
        let mut mean = vec![0.0; self.grid.len()];
        for (v, &m) in self.values.iter().zip(&self.multiplicity) {
            for (acc, x) in mean.iter_mut().zip(v) {
                *acc += m as f64 * x;
            }
        }
        mean.iter_mut().for_each(|x| *x /= t);
        mean
    }

    /// Average of `f` over all unordered pairs of curves.
    fn pair_mean(&self, f: impl Fn(&[f64], &[f64]) -> Result<f64>) -> Result<f64> {
        let t = self.n_curves();
        if t < 2 {
            return Err(Error::TooFewCurves { needed: 2, got: t });
        }
        let mut total = 0.0;
        for a in 0..self.values.len() {
            for b in a + 1..self.values.len() {
                let w = (self.multiplicity[a] * self.multiplicity[b]) as f64;
                total += w * f(&self.values[a], &self.values[b])?;
            }
        }
        Ok(2.0 * total / (t * (t - 1)) as f64)
    }
}

fn sample_curve(basis: &BSplineBasis, coeffs: &[f64], grid: &[f64]) -> Result<Vec<f64>> {
    let k = basis.num_basis();
    if coeffs.len() != k {
        return Err(Error::LengthMismatch {
            expected: k,
            actual: coeffs.len(),
        });
    }
    let rows = basis.eval_rows(grid);
    Ok(rows.chunks_exact(k).map(|r| dot(r, coeffs)).collect())
}

/// Mean pairwise L² distance `D`.
pub fn pairwise_diversity(reps: &RepresentationSet) -> Result<f64> {
    reps.pair_mean(l2_distance)
}

/// Mean pairwise quadratic difference `Q_D`.
pub fn quadratic_diversity(reps: &RepresentationSet) -> Result<f64> {
    reps.pair_mean(quadratic_difference)
}

/// Mean integrated squared deviation from the mean curve, `V_F`.
pub fn functional_variance(reps: &RepresentationSet) -> Result<f64> {
    let t = reps.n_curves();
    if t == 0 {
        return Err(Error::TooFewCurves { needed: 1, got: 0 });
    }
    if reps.n_distinct() == 1 {
        // the mean of copies of one curve is that curve; skip its rounding
        return Ok(0.0);
    }
    let mean = reps.mean_curve();
    let mut total = 0.0;
    for (v, &m) in reps.values.iter().zip(&reps.multiplicity) {
        total += m as f64 * quadratic_difference(v, &mean)?;
    }
    Ok(total / t as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ObservationDiversity {
    pub pairwise: f64,
    pub quadratic: f64,
    pub variance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiversityReport {
    pub grid_size: usize,
    pub n_members: usize,
    pub per_observation: Vec<ObservationDiversity>,
    pub mean_pairwise: f64,
    pub mean_quadratic: f64,
    pub mean_variance: f64,
}

/// Diversity of every observation's per-member reconstructions. Each series
/// is fitted with each member's design matrix and reconstructed on a
/// `grid_size` grid.
pub fn ensemble_diversity_report(ensemble: &Ensemble, data: &Dataset, grid_size: usize) -> Result<DiversityReport> {
    if data.series_length() != ensemble.series_length() {
        return Err(Error::LengthMismatch {
            expected: ensemble.series_length(),
            actual: data.series_length(),
        });
    }
    let grid = uniform_grid(grid_size)?;
    let groups = ensemble.spline_groups()?;
    let grid_rows: Vec<Vec<f64>> = groups.iter().map(|(dm, _)| dm.basis().eval_rows(&grid)).collect();
    let multiplicity: Vec<usize> = groups.iter().map(|(_, m)| *m).collect();

    let per_observation = data
        .series()
        .par_iter()
        .map(|series| {
            let values = groups
                .iter()
                .zip(&grid_rows)
                .map(|((dm, _), rows)| {
                    let coeffs = dm.fit(series)?;
                    Ok(rows.chunks_exact(dm.num_basis()).map(|r| dot(r, &coeffs)).collect())
                })
                .collect::<Result<Vec<Vec<f64>>>>()?;
            let reps = RepresentationSet::with_multiplicity(values, multiplicity.clone())?;
            Ok(ObservationDiversity {
                pairwise: pairwise_diversity(&reps)?,
                quadratic: quadratic_diversity(&reps)?,
                variance: functional_variance(&reps)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let n = per_observation.len() as f64;
    let mean = |f: fn(&ObservationDiversity) -> f64| per_observation.iter().map(f).sum::<f64>() / n;
    Ok(DiversityReport {
        grid_size,
        n_members: ensemble.n_members(),
        mean_pairwise: mean(|o| o.pairwise),
        mean_quadratic: mean(|o| o.quadratic),
        mean_variance: mean(|o| o.variance),
        per_observation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::synth_dataset;
    use crate::ensemble::{RfConfig, RstConfig};
    use proptest::prelude::*;

    fn constant(c: f64, g: usize) -> Vec<f64> {
        vec![c; g]
    }

    #[test]
    fn distance_basics() {
        let g = 1000;
        let grid = uniform_grid(g).unwrap();
        let t: Vec<f64> = grid.clone();
        assert_eq!(l2_distance(&t, &t).unwrap(), 0.0);
        assert!((l2_distance(&constant(1.0, g), &constant(0.0, g)).unwrap() - 1.0).abs() < 1e-12);
        // trapezoid error for t^2 is h^2/6
        let d = l2_distance(&t, &constant(0.0, g)).unwrap();
        assert!((d - (1.0f64 / 3.0).sqrt()).abs() < 1e-4);
        let h = 1.0 / (g - 1) as f64;
        assert!((d * d - 1.0 / 3.0 - h * h / 6.0).abs() < 1e-12);
        assert!(matches!(l2_distance(&t, &t[1..]), Err(Error::GridMismatch(..))));
    }

    #[test]
    fn constant_ensembles() {
        let g = 50;
        let reps = RepresentationSet::from_values(vec![constant(0.0, g), constant(1.0, g), constant(2.0, g)]).unwrap();
        assert!((pairwise_diversity(&reps).unwrap() - 4.0 / 3.0).abs() < 1e-12);
        assert!((quadratic_diversity(&reps).unwrap() - 2.0).abs() < 1e-12);

        let two = RepresentationSet::from_values(vec![constant(0.0, g), constant(2.0, g)]).unwrap();
        assert!((functional_variance(&two).unwrap() - 1.0).abs() < 1e-12);
        assert!((pairwise_diversity(&two).unwrap() - 2.0).abs() < 1e-12);

        let one = RepresentationSet::from_values(vec![constant(3.0, g)]).unwrap();
        assert_eq!(functional_variance(&one).unwrap(), 0.0);
        assert!(matches!(
            pairwise_diversity(&one),
            Err(Error::TooFewCurves { needed: 2, got: 1 })
        ));
        assert!(quadratic_diversity(&one).is_err());

        let same = RepresentationSet::from_values(vec![constant(0.5, g); 4]).unwrap();
        assert_eq!(pairwise_diversity(&same).unwrap(), 0.0);
        assert_eq!(functional_variance(&same).unwrap(), 0.0);
    }

    #[test]
    fn multiplicity_matches_expanded_set() {
        let g = 30;
        let a: Vec<f64> = (0..g).map(|i| (i as f64 * 0.3).sin()).collect();
        let b: Vec<f64> = (0..g).map(|i| (i as f64 * 0.1).cos()).collect();
        let grouped = RepresentationSet::with_multiplicity(vec![a.clone(), b.clone()], vec![3, 2]).unwrap();
        let flat = RepresentationSet::from_values(vec![a.clone(), a.clone(), b.clone(), a, b]).unwrap();
        assert_eq!(grouped.n_curves(), 5);
        for f in [pairwise_diversity, quadratic_diversity, functional_variance] {
            assert!((f(&grouped).unwrap() - f(&flat).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_mismatched_grids() {
        assert!(matches!(
            RepresentationSet::from_values(vec![vec![0.0; 5], vec![0.0; 6]]),
            Err(Error::GridMismatch(5, 6))
        ));
        assert!(RepresentationSet::from_values(vec![vec![0.0; 1]]).is_err());
    }

    #[test]
    fn cached_values_match_reconstruction() {
        let basis = BSplineBasis::new(4, 9).unwrap();
        let coeffs: Vec<f64> = (0..9).map(|j| (j as f64).sqrt() - 1.0).collect();
        let reps = RepresentationSet::from_curves(&[(&basis, &coeffs)], 101).unwrap();
        for (i, &t) in reps.grid().iter().enumerate() {
            assert!((reps.values(0)[i] - basis.reconstruct(&coeffs, t).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn grid_refinement_converges() {
        let a = BSplineBasis::new(3, 7).unwrap();
        let b = BSplineBasis::new(5, 12).unwrap();
        let ca: Vec<f64> = (0..7).map(|j| (j as f64 * 0.7).sin()).collect();
        let cb: Vec<f64> = (0..12).map(|j| (j as f64 * 0.4).cos()).collect();
        let q = |g| {
            let reps = RepresentationSet::from_curves(&[(&a, &ca), (&b, &cb)], g).unwrap();
            quadratic_diversity(&reps).unwrap()
        };
        let (q1, q2, q3, q4) = (q(125), q(250), q(500), q(1000));
        let (d1, d2, d3) = ((q2 - q1).abs(), (q3 - q2).abs(), (q4 - q3).abs());
        assert!(d2 < d1 && d3 < d2, "{d1} {d2} {d3}");
    }

    #[test]
    fn fixed_basis_ensemble_has_no_diversity() {
        let (train, test) = synth_dataset(6, 32, 0.3, 3).unwrap();
        let cfg = RstConfig {
            n_estimators: 5,
            o_min: 3,
            o_max: 3,
            k_min: 5,
            k_max: 5,
            ..RstConfig::default()
        };
        let ens = Ensemble::fit_rst(&train, &cfg).unwrap();
        let report = ensemble_diversity_report(&ens, &test, 200).unwrap();
        assert_eq!(report.per_observation.len(), test.n_series());
        for o in &report.per_observation {
            assert_eq!((o.pairwise, o.quadratic, o.variance), (0.0, 0.0, 0.0));
        }
    }

    #[test]
    fn randomized_ensemble_is_diverse() {
        let (train, test) = synth_dataset(6, 64, 0.3, 3).unwrap();
        let cfg = RstConfig {
            n_estimators: 10,
            ..RstConfig::default()
        };
        let ens = Ensemble::fit_rst(&train, &cfg).unwrap();
        let report = ensemble_diversity_report(&ens, &test, 300).unwrap();
        assert!(report.mean_pairwise > 0.0);
        let n = report.per_observation.len() as f64;
        let mean_d: f64 = report.per_observation.iter().map(|o| o.pairwise).sum::<f64>() / n;
        assert_eq!(mean_d, report.mean_pairwise);
        for o in &report.per_observation {
            assert!(o.pairwise >= 0.0 && o.quadratic >= 0.0 && o.variance >= 0.0);
            let t = 10.0;
            assert!((o.variance - o.quadratic * (t - 1.0) / (2.0 * t)).abs() < 1e-9);
        }
    }

    #[test]
    fn forest_has_no_spline_curves() {
        let (train, test) = synth_dataset(4, 16, 0.3, 3).unwrap();
        let rf = Ensemble::fit_rf(
            &train,
            &RfConfig {
                n_estimators: 3,
                ..RfConfig::default()
            },
        )
        .unwrap();
        assert!(matches!(
            ensemble_diversity_report(&rf, &test, 100),
            Err(Error::NoSplineRepresentation)
        ));
    }

    proptest! {
        #[test]
        fn variance_identity_on_constant_curves(cs in prop::collection::vec(-5.0f64..5.0, 2..12), g in 2usize..40) {
            let t = cs.len() as f64;
            let reps = RepresentationSet::from_values(cs.iter().map(|&c| constant(c, g)).collect()).unwrap();
            let qd = quadratic_diversity(&reps).unwrap();
            let vf = functional_variance(&reps).unwrap();
            prop_assert!((vf - qd * (t - 1.0) / (2.0 * t)).abs() < 1e-9);
            // independent direct computation
            let mean = cs.iter().sum::<f64>() / t;
            let direct = cs.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / t;
            prop_assert!((vf - direct).abs() < 1e-9);
        }

        #[test]
        fn distance_axioms(a in prop::collection::vec(-3.0f64..3.0, 10), b in prop::collection::vec(-3.0f64..3.0, 10)) {
            let dab = l2_distance(&a, &b).unwrap();
            prop_assert_eq!(dab, l2_distance(&b, &a).unwrap());
            prop_assert!(dab >= 0.0);
            prop_assert_eq!(l2_distance(&a, &a).unwrap(), 0.0);
            prop_assert!((quadratic_difference(&a, &b).unwrap() - dab * dab).abs() < 1e-9);
        }
    }
}
