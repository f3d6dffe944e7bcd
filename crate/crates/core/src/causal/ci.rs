use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::numeric::NumericMatrix;
use super::stats::{is_constant, partial_correlation, pearson, residualize, two_sided_normal_p};
use super::{CausalError, Result};
use crate::Scalar;

/// Decision of one conditional-independence test.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CiOutcome {
    pub independent: bool,
    pub p_value: f64,
    /// Partial correlation of the pair given the conditioning set.
    pub statistic: f64,
}

/// Conditional-independence test over columns of a numeric matrix.
pub trait CiTest<T: Scalar>: Sync {
    fn test(&self, data: &NumericMatrix<T>, i: usize, j: usize, cond: &[usize]) -> Result<CiOutcome>;
}

/// Complete rows for `i`, `j` and `cond`, after the shared preconditions.
struct Prepared<T> {
    x: Vec<T>,
    y: Vec<T>,
    z: Vec<Vec<T>>,
}

fn prepare<T: Scalar>(data: &NumericMatrix<T>, i: usize, j: usize, cond: &[usize]) -> Result<Prepared<T>> {
    let n_cols = data.n_columns();
    if i >= n_cols || j >= n_cols || cond.iter().any(|&c| c >= n_cols) {
        return Err(CausalError::InvalidConfig("column index out of range".into()));
    }
    if i == j {
        return Err(CausalError::InvalidConfig(format!("cannot test {} against itself", data.names()[i])));
    }
    if cond.contains(&i) || cond.contains(&j) {
        return Err(CausalError::InvalidConfig("conditioning set contains a tested column".into()));
    }
    let mut cols = vec![i, j];
    cols.extend_from_slice(cond);
    let mut values = data.complete(&cols);
    let n = values[0].len();
    let needed = cond.len() + 4;
    if n < needed {
        return Err(CausalError::InsufficientSamples { needed, available: n });
    }
    if let Some(pos) = values.iter().position(|v| is_constant(v)) {
        return Err(CausalError::DegenerateVariance(data.names()[cols[pos]].clone()));
    }
    let z = values.split_off(2);
    let y = values.pop().expect("two columns");
    let x = values.pop().expect("two columns");
    Ok(Prepared { x, y, z })
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(CausalError::InvalidConfig(format!("alpha must lie in (0, 1), got {alpha}")))
    }
}

/// Fisher-z test on the partial correlation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FisherZ {
    pub alpha: f64,
}

impl<T: Scalar> CiTest<T> for FisherZ {
    fn test(&self, data: &NumericMatrix<T>, i: usize, j: usize, cond: &[usize]) -> Result<CiOutcome> {
        check_alpha(self.alpha)?;
        let p = prepare(data, i, j, cond)?;
        let r = partial_correlation(&p.x, &p.y, &p.z).as_f64();
        let dof = (p.x.len() - cond.len() - 3) as f64;
        let stat = if r.abs() >= 1.0 { f64::INFINITY } else { dof.sqrt() * r.atanh().abs() };
        let p_value = two_sided_normal_p(stat);
        Ok(CiOutcome { independent: p_value > self.alpha, p_value, statistic: r })
    }
}

pub const MIN_PERMUTATIONS: usize = 100;

/// Permutation test of the same partial correlation. Residuals of the
/// lower-named column are shuffled, with the RNG keyed by the sorted pair and
/// conditioning set so the decision is symmetric and reproducible.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PermutationTest {
    pub alpha: f64,
    pub n_perm: usize,
    pub seed: u64,
}

impl<T: Scalar> CiTest<T> for PermutationTest {
    fn test(&self, data: &NumericMatrix<T>, i: usize, j: usize, cond: &[usize]) -> Result<CiOutcome> {
        check_alpha(self.alpha)?;
        if self.n_perm < MIN_PERMUTATIONS {
            return Err(CausalError::InvalidConfig(format!(
                "n_perm must be at least {MIN_PERMUTATIONS}, got {}",
                self.n_perm
            )));
        }
        let names = data.names();
        let (i, j) = if names[i] <= names[j] { (i, j) } else { (j, i) };
        let p = prepare(data, i, j, cond)?;
        let observed = partial_correlation(&p.x, &p.y, &p.z).as_f64();
        let mut rx = residualize(&p.x, &p.z);
        let ry = residualize(&p.y, &p.z);

        let mut key: Vec<&str> = cond.iter().map(|&c| names[c].as_str()).collect();
        key.sort_unstable();
        let mut parts = vec!["perm", names[i].as_str(), names[j].as_str()];
        parts.extend(key);
        let mut rng = crate::seed::rng(self.seed, &parts);

        let threshold = observed.abs() * (1.0 - 1e-9);
        let mut extreme = 0usize;
        for _ in 0..self.n_perm {
            rx.shuffle(&mut rng);
            let r = pearson(&rx, &ry).map_or(0.0, Scalar::as_f64);
            if r.abs() >= threshold {
                extreme += 1;
            }
        }
        let p_value = (extreme + 1) as f64 / (self.n_perm + 1) as f64;
        Ok(CiOutcome { independent: p_value > self.alpha, p_value, statistic: observed })
    }
}

fn indices<T: Scalar>(data: &NumericMatrix<T>, i: &str, j: &str, cond: &[&str]) -> Result<(usize, usize, Vec<usize>)> {
    let find = |name: &str| data.index_of(name).ok_or_else(|| CausalError::UnknownNode(name.to_string()));
    Ok((find(i)?, find(j)?, cond.iter().map(|c| find(c)).collect::<Result<_>>()?))
}

/// Fisher-z test addressed by value id.
pub fn ci_test_fisher_z<T: Scalar>(
    data: &NumericMatrix<T>,
    i: &str,
    j: &str,
    cond: &[&str],
    alpha: f64,
) -> Result<CiOutcome> {
    let (i, j, cond) = indices(data, i, j, cond)?;
    FisherZ { alpha }.test(data, i, j, &cond)
}

/// Permutation test addressed by value id.
pub fn ci_test_permutation<T: Scalar>(
    data: &NumericMatrix<T>,
    i: &str,
    j: &str,
    cond: &[&str],
    alpha: f64,
    n_perm: usize,
    seed: u64,
) -> Result<CiOutcome> {
    let (i, j, cond) = indices(data, i, j, cond)?;
    PermutationTest { alpha, n_perm, seed }.test(data, i, j, &cond)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "type")]
pub enum CiKind {
    FisherZ,
    Permutation { n_perm: usize, seed: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PcConfig {
    pub alpha: f64,
    pub max_cond_size: usize,
    pub stable: bool,
    pub ci_test: CiKind,
}

impl Default for PcConfig {
    fn default() -> Self {
        PcConfig { alpha: 0.05, max_cond_size: 3, stable: true, ci_test: CiKind::FisherZ }
    }
}

impl PcConfig {
    pub fn validate(&self) -> Result<()> {
        check_alpha(self.alpha)?;
        if let CiKind::Permutation { n_perm, .. } = self.ci_test {
            if n_perm < MIN_PERMUTATIONS {
                return Err(CausalError::InvalidConfig(format!("n_perm must be at least {MIN_PERMUTATIONS}")));
            }
        }
        Ok(())
    }

    pub fn tester<T: Scalar>(&self) -> Box<dyn CiTest<T>> {
        match self.ci_test {
            CiKind::FisherZ => Box::new(FisherZ { alpha: self.alpha }),
            CiKind::Permutation { n_perm, seed } => Box::new(PermutationTest { alpha: self.alpha, n_perm, seed }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matrix(cols: Vec<Vec<f64>>) -> NumericMatrix<f64> {
        let names = (0..cols.len()).map(|i| format!("V{i}")).collect();
        NumericMatrix::from_columns(names, cols)
    }

    fn wiggle(n: usize, k: f64) -> Vec<f64> {
        (0..n).map(|i| ((i as f64 + 1.0) * k).sin()).collect()
    }

    #[test]
    fn copied_column_is_dependent() {
        let x = wiggle(50, 0.7);
        let m = matrix(vec![x.clone(), x]);
        let out = ci_test_fisher_z(&m, "V0", "V1", &[], 0.05).unwrap();
        assert!(!out.independent);
        assert!(out.p_value < 1e-12);
        let perm = ci_test_permutation(&m, "V0", "V1", &[], 0.05, 200, 1).unwrap();
        assert!(!perm.independent);
    }

    #[test]
    fn constant_column_is_degenerate() {
        let m = matrix(vec![wiggle(20, 0.3), vec![1.0; 20]]);
        assert_eq!(
            ci_test_fisher_z(&m, "V0", "V1", &[], 0.05).unwrap_err(),
            CausalError::DegenerateVariance("V1".into())
        );
    }

    #[test]
    fn sample_size_precondition() {
        let m = matrix(vec![wiggle(5, 0.3), wiggle(5, 0.9), wiggle(5, 1.3)]);
        assert!(ci_test_fisher_z(&m, "V0", "V1", &["V2"], 0.05).is_ok());
        let m = matrix(vec![wiggle(4, 0.3), wiggle(4, 0.9), wiggle(4, 1.3)]);
        assert_eq!(
            ci_test_fisher_z(&m, "V0", "V1", &["V2"], 0.05).unwrap_err(),
            CausalError::InsufficientSamples { needed: 5, available: 4 }
        );
    }

    #[test]
    fn bad_arguments() {
        let m = matrix(vec![wiggle(30, 0.3), wiggle(30, 0.9), wiggle(30, 1.3)]);
        assert!(matches!(ci_test_fisher_z(&m, "V0", "V0", &[], 0.05), Err(CausalError::InvalidConfig(_))));
        assert!(matches!(ci_test_fisher_z(&m, "V0", "V1", &["V1"], 0.05), Err(CausalError::InvalidConfig(_))));
        assert!(matches!(ci_test_fisher_z(&m, "V0", "V9", &[], 0.05), Err(CausalError::UnknownNode(_))));
        assert!(matches!(ci_test_fisher_z(&m, "V0", "V1", &[], 1.0), Err(CausalError::InvalidConfig(_))));
        assert!(matches!(ci_test_permutation(&m, "V0", "V1", &[], 0.05, 50, 0), Err(CausalError::InvalidConfig(_))));
    }

    #[test]
    fn missing_cells_are_dropped_per_test() {
        let mut m = matrix(vec![wiggle(30, 0.3), wiggle(30, 0.9)]);
        let full = ci_test_fisher_z(&m, "V0", "V1", &[], 0.05).unwrap();
        let names = m.names().to_vec();
        let mut cols: Vec<Vec<Option<f64>>> =
            vec![wiggle(30, 0.3).into_iter().map(Some).collect(), wiggle(30, 0.9).into_iter().map(Some).collect()];
        cols.push(vec![None; 30]);
        m = NumericMatrix::from_optional_columns(vec![names[0].clone(), names[1].clone(), "V2".into()], cols);
        assert_eq!(ci_test_fisher_z(&m, "V0", "V1", &[], 0.05).unwrap(), full);
        assert!(matches!(ci_test_fisher_z(&m, "V0", "V2", &[], 0.05), Err(CausalError::InsufficientSamples { .. })));
    }

    #[test]
    fn symmetric_decisions() {
        let m = matrix(vec![wiggle(40, 0.3), wiggle(40, 0.31), wiggle(40, 1.7)]);
        for (a, b) in [("V0", "V1"), ("V0", "V2"), ("V1", "V2")] {
            let c: Vec<&str> = ["V0", "V1", "V2"].into_iter().filter(|n| *n != a && *n != b).collect();
            assert_eq!(ci_test_fisher_z(&m, a, b, &c, 0.05).unwrap(), ci_test_fisher_z(&m, b, a, &c, 0.05).unwrap());
            assert_eq!(
                ci_test_permutation(&m, a, b, &c, 0.05, 150, 3).unwrap(),
                ci_test_permutation(&m, b, a, &c, 0.05, 150, 3).unwrap()
            );
        }
    }
}
