use std::collections::BTreeMap;

/// Sparse coefficient vector: only nonzero entries are stored.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Coefficients {
    entries: BTreeMap<usize, f64>,
    n_predictors: usize,
    /// Unpenalized intercept (logistic fits and back-transformed Gaussian fits).
    pub intercept: f64,
}

impl Coefficients {
    pub fn zeros(n_predictors: usize) -> Self {
        Coefficients {
            entries: BTreeMap::new(),
            n_predictors,
            intercept: 0.0,
        }
    }

    pub fn from_dense(values: &[f64]) -> Self {
        let entries = values
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(j, v)| (j, *v))
            .collect();
        Coefficients {
            entries,
            n_predictors: values.len(),
            intercept: 0.0,
        }
    }

    pub fn n_predictors(&self) -> usize {
        self.n_predictors
    }

    pub fn get(&self, j: usize) -> f64 {
        self.entries.get(&j).copied().unwrap_or(0.0)
    }

    /// Sets entry `j`; storing zero removes it.
    pub fn set(&mut self, j: usize, value: f64) {
        assert!(j < self.n_predictors, "predictor index {j} out of range");
        if value == 0.0 {
            self.entries.remove(&j);
        } else {
            self.entries.insert(j, value);
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.entries.iter().map(|(j, v)| (*j, *v))
    }

    /// Indices of the nonzero entries, ascending.
    pub fn support(&self) -> Vec<usize> {
        self.entries.keys().copied().collect()
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.n_predictors];
        for (j, v) in self.iter() {
            out[j] = v;
        }
        out
    }

    pub fn l1_norm(&self) -> f64 {
        self.entries.values().map(|v| v.abs()).sum()
    }

    pub fn l2_norm_sq(&self) -> f64 {
        self.entries.values().map(|v| v * v).sum()
    }

    /// Largest absolute difference over all predictors and the intercept.
    pub fn max_abs_diff(&self, other: &Coefficients) -> f64 {
        let mut worst = (self.intercept - other.intercept).abs();
        for (j, v) in self.iter() {
            worst = worst.max((v - other.get(j)).abs());
        }
        for (j, v) in other.iter() {
            worst = worst.max((v - self.get(j)).abs());
        }
        worst
    }
}
