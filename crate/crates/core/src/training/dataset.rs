use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::RandomStream;

pub type Point = [f64; 2];

/// Isotropic Gaussian mixture in the plane.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixtureSpec {
    pub centers: Vec<Point>,
    pub weights: Vec<f64>,
    pub std: f64,
    pub n_points: usize,
}

impl MixtureSpec {
    /// Two equally weighted modes at `(-2, 0)` and `(2, 0)`.
    pub fn two_modes(std: f64, n_points: usize) -> Self {
        Self {
            centers: vec![[-2.0, 0.0], [2.0, 0.0]],
            weights: vec![0.5, 0.5],
            std,
            n_points,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.centers.is_empty() {
            return Err(Error::InvalidConfig("mixture needs at least one mode".into()));
        }
        if self.weights.len() != self.centers.len() {
            return Err(Error::InvalidConfig(format!(
                "{} weights for {} modes",
                self.weights.len(),
                self.centers.len()
            )));
        }
        if self.weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidConfig("mixture weights must be nonnegative".into()));
        }
        let total: f64 = self.weights.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidConfig(format!("mixture weights sum to {total}")));
        }
        if !self.std.is_finite() || self.std < 0.0 {
            return Err(Error::InvalidConfig(format!("mixture std {}", self.std)));
        }
        if self.centers.iter().flatten().any(|c| !c.is_finite()) {
            return Err(Error::InvalidConfig("non-finite mode center".into()));
        }
        Ok(())
    }

    /// Index of the nearest center (lowest index on ties).
    pub fn nearest_mode(&self, p: Point) -> usize {
        nearest(&self.centers, p)
    }
}

pub(crate) fn nearest(centers: &[Point], p: Point) -> usize {
    let mut best = (0, f64::INFINITY);
    for (m, c) in centers.iter().enumerate() {
        let d = (p[0] - c[0]).powi(2) + (p[1] - c[1]).powi(2);
        if d < best.1 {
            best = (m, d);
        }
    }
    best.0
}

#[derive(Debug, Clone, PartialEq)]
pub struct ToyDataset {
    pub spec: MixtureSpec,
    pub seed: u64,
    pub points: Vec<Point>,
}

/// Draws each point by picking a mode by weight, then adding isotropic noise.
pub fn make_dataset(spec: &MixtureSpec, seed: u64) -> Result<ToyDataset> {
    spec.validate()?;
    let mut rng = RandomStream::new(seed);
    let last = spec.centers.len() - 1;
    let points = (0..spec.n_points)
        .map(|_| {
            let u = rng.uniform();
            let mut acc = 0.0;
            let mut mode = last;
            for (m, w) in spec.weights.iter().enumerate() {
                acc += w;
                if u < acc {
                    mode = m;
                    break;
                }
            }
            let c = spec.centers[mode];
            let dx = rng.gaussian();
            let dy = rng.gaussian();
            [c[0] + spec.std * dx, c[1] + spec.std * dy]
        })
        .collect();
    Ok(ToyDataset {
        spec: spec.clone(),
        seed,
        points,
    })
}
