use crate::error::{Error, Result};

/// Spacing of a penalty grid between `lambda_max` and `ratio * lambda_max`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GridSpacing {
    #[default]
    Log,
    Linear,
}

/// Strictly decreasing sequence of positive penalties, anchored at `lambda_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaGrid {
    values: Vec<f64>,
    lambda_max: f64,
}

impl LambdaGrid {
    pub fn new(values: Vec<f64>, lambda_max: f64) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidConfig("lambda grid is empty".into()));
        }
        if !(lambda_max > 0.0 && lambda_max.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "lambda_max must be positive and finite, got {lambda_max}"
            )));
        }
        if values.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
            return Err(Error::InvalidConfig("grid values must be positive".into()));
        }
        if values.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::InvalidConfig(
                "grid values must be strictly decreasing".into(),
            ));
        }
        if values[0] > lambda_max {
            return Err(Error::InvalidConfig(format!(
                "first grid value {} exceeds lambda_max {lambda_max}",
                values[0]
            )));
        }
        Ok(LambdaGrid { values, lambda_max })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn lambda_max(&self) -> f64 {
        self.lambda_max
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Penalty preceding grid point `k` on the path (`lambda_max` for the first point).
    pub fn previous(&self, k: usize) -> f64 {
        if k == 0 {
            self.lambda_max
        } else {
            self.values[k - 1]
        }
    }
}

/// Builds a grid of `size` points from `lambda_max` down to `ratio * lambda_max`.
pub fn make_grid(
    lambda_max: f64,
    size: usize,
    ratio: f64,
    spacing: GridSpacing,
) -> Result<LambdaGrid> {
    if size == 0 {
        return Err(Error::InvalidConfig("grid size must be at least 1".into()));
    }
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "grid ratio must lie in (0, 1), got {ratio}"
        )));
    }
    if size == 1 {
        return LambdaGrid::new(vec![lambda_max], lambda_max);
    }
    let last = (size - 1) as f64;
    let values = (0..size)
        .map(|k| {
            let t = k as f64 / last;
            match spacing {
                GridSpacing::Log => lambda_max * ratio.powf(t),
                GridSpacing::Linear => lambda_max * (1.0 - t * (1.0 - ratio)),
            }
        })
        .collect();
    LambdaGrid::new(values, lambda_max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_point_grid() {
        let g = make_grid(2.5, 1, 0.01, GridSpacing::Log).unwrap();
        assert_eq!(g.values(), &[2.5]);
    }

    #[test]
    fn log_grid_is_geometric() {
        let g = make_grid(1.0, 3, 0.01, GridSpacing::Log).unwrap();
        let expected = [1.0, 0.1, 0.01];
        for (a, b) in g.values().iter().zip(expected) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn linear_grid_is_equally_spaced() {
        let g = make_grid(1.0, 5, 0.2, GridSpacing::Linear).unwrap();
        let expected = [1.0, 0.8, 0.6, 0.4, 0.2];
        for (a, b) in g.values().iter().zip(expected) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn invalid_grids_are_rejected() {
        assert!(make_grid(1.0, 0, 0.1, GridSpacing::Log).is_err());
        assert!(make_grid(1.0, 5, 1.0, GridSpacing::Log).is_err());
        assert!(LambdaGrid::new(vec![1.0, 1.0], 1.0).is_err());
        assert!(LambdaGrid::new(vec![2.0, 1.0], 1.5).is_err());
        assert!(LambdaGrid::new(vec![1.0, -1.0], 1.0).is_err());
    }
}
