//! Planted-submatrix data under the Gaussian model and two other members of
//! the one-parameter exponential family.
//!
//! Each family is a mean-0, variance-1 base law `ν`; anomaly entries follow
//! the exponentially tilted law `exp(θx - ln φ(θ)) dν`:
//!
//! | family     | background       | anomaly                               |
//! |------------|------------------|---------------------------------------|
//! | gaussian   | N(0, 1)          | N(θ, 1)                               |
//! | poisson    | Y - 1, Y ~ P(1)  | Y - 1, Y ~ P(e^θ)                     |
//! | rademacher | ±1 equiprobable  | +1 w.p. e^θ / (e^θ + e^-θ)            |
//!
//! Row `i` of a matrix is drawn from ChaCha8 stream `i` under the spec's seed,
//! so generation is reproducible at any thread count. Gaussian draws use the
//! ziggurat sampler from `rand_distr`.

use std::fmt;
use std::str::FromStr;

use rand::Rng as _;
use rand_distr::{Distribution, Poisson, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::matrix::{DataMatrix, Selection};
use crate::rng::{self, Rng};
use crate::thresholds::theta_crit;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Gaussian,
    Poisson,
    Rademacher,
}

impl Family {
    pub const ALL: [Family; 3] = [Family::Gaussian, Family::Poisson, Family::Rademacher];

    pub fn name(self) -> &'static str {
        match self {
            Family::Gaussian => "gaussian",
            Family::Poisson => "poisson",
            Family::Rademacher => "rademacher",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gaussian" | "normal" => Ok(Family::Gaussian),
            "poisson" => Ok(Family::Poisson),
            "rademacher" => Ok(Family::Rademacher),
            other => Err(domain(format!("unknown family {other:?}"))),
        }
    }
}

/// Draws from `f_θ` for one family. `θ = 0` gives the background law.
#[derive(Debug, Clone, Copy)]
pub enum TiltedSampler {
    Gaussian { mean: f64 },
    Poisson(Poisson<f64>),
    Rademacher { p_plus: f64 },
}

impl TiltedSampler {
    pub fn new(family: Family, theta: f64) -> Result<Self> {
        if !(theta >= 0.0 && theta.is_finite()) {
            return Err(domain(format!(
                "theta must be finite and >= 0, got {theta}"
            )));
        }
        Ok(match family {
            Family::Gaussian => TiltedSampler::Gaussian { mean: theta },
            Family::Poisson => {
                let rate = theta.exp();
                TiltedSampler::Poisson(
                    Poisson::new(rate).map_err(|e| domain(format!("poisson rate {rate}: {e}")))?,
                )
            }
            // e^θ / (e^θ + e^-θ), written to stay finite for large θ.
            Family::Rademacher => TiltedSampler::Rademacher {
                p_plus: 1.0 / (1.0 + (-2.0 * theta).exp()),
            },
        })
    }

    #[inline]
    pub fn sample(&self, rng: &mut Rng) -> f64 {
        match self {
            TiltedSampler::Gaussian { mean } => {
                let z: f64 = StandardNormal.sample(rng);
                mean + z
            }
            TiltedSampler::Poisson(dist) => dist.sample(rng) - 1.0,
            TiltedSampler::Rademacher { p_plus } => {
                if rng.random::<f64>() < *p_plus {
                    1.0
                } else {
                    -1.0
                }
            }
        }
    }
}

/// Parameters of one synthetic matrix. The anomaly occupies the leading
/// `block_rows × block_cols` corner.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenerationSpec {
    pub family: Family,
    pub rows: usize,
    pub cols: usize,
    pub block_rows: usize,
    pub block_cols: usize,
    /// Natural parameter of the tilted anomaly law.
    pub theta: f64,
    pub seed: u64,
}

impl GenerationSpec {
    /// Builds a spec whose `theta` is `multiplier × theta_crit` for the design.
    pub fn with_theta_mult(
        family: Family,
        rows: usize,
        cols: usize,
        block_rows: usize,
        block_cols: usize,
        multiplier: f64,
        seed: u64,
    ) -> Result<Self> {
        let theta = multiplier * theta_crit(rows, cols, block_rows, block_cols)?;
        let spec = Self {
            family,
            rows,
            cols,
            block_rows,
            block_cols,
            theta,
            seed,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.rows == 0 || self.cols == 0 {
            return Err(domain("matrix dimensions must be positive"));
        }
        if self.block_rows == 0
            || self.block_rows > self.rows
            || self.block_cols == 0
            || self.block_cols > self.cols
        {
            return Err(domain(format!(
                "planted block {}x{} does not fit in {}x{}",
                self.block_rows, self.block_cols, self.rows, self.cols
            )));
        }
        if !(self.theta >= 0.0 && self.theta.is_finite()) {
            return Err(domain(format!(
                "theta must be finite and >= 0, got {}",
                self.theta
            )));
        }
        Ok(())
    }

    pub fn planted(&self) -> Selection {
        Selection::from_sorted_unchecked(
            (0..self.block_rows).collect(),
            (0..self.block_cols).collect(),
        )
    }
}

/// Draws the matrix described by `spec` together with the planted selection.
pub fn generate(spec: &GenerationSpec) -> Result<(DataMatrix, Selection)> {
    spec.validate()?;
    let background = TiltedSampler::new(spec.family, 0.0)?;
    let anomaly = TiltedSampler::new(spec.family, spec.theta)?;
    let len = spec
        .rows
        .checked_mul(spec.cols)
        .ok_or_else(|| domain("matrix size overflows usize"))?;
    let mut values = Vec::new();
    values
        .try_reserve_exact(len)
        .map_err(|e| domain(format!("cannot allocate {len} entries: {e}")))?;
    values.resize(len, 0.0);
    values
        .par_chunks_mut(spec.cols)
        .enumerate()
        .for_each(|(i, row)| {
            let mut rng = rng::stream(spec.seed, i as u64);
            for (j, v) in row.iter_mut().enumerate() {
                *v = if i < spec.block_rows && j < spec.block_cols {
                    anomaly.sample(&mut rng)
                } else {
                    background.sample(&mut rng)
                };
            }
        });
    Ok((
        DataMatrix::new(spec.rows, spec.cols, values)?,
        spec.planted(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(family: Family, theta: f64, seed: u64) -> GenerationSpec {
        GenerationSpec {
            family,
            rows: 60,
            cols: 50,
            block_rows: 20,
            block_cols: 25,
            theta,
            seed,
        }
    }

    fn block_mean(x: &DataMatrix, m: usize, n: usize) -> f64 {
        let mut s = 0.0;
        for i in 0..m {
            s += x.row(i)[..n].iter().sum::<f64>();
        }
        s / (m * n) as f64
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        for family in Family::ALL {
            let (a, pa) = generate(&spec(family, 0.7, 11)).unwrap();
            let (b, pb) = generate(&spec(family, 0.7, 11)).unwrap();
            let (c, _) = generate(&spec(family, 0.7, 12)).unwrap();
            assert_eq!(a, b);
            assert_eq!(pa, pb);
            assert_ne!(a, c);
        }
    }

    #[test]
    fn zero_theta_makes_anomaly_look_like_background() {
        let bg = TiltedSampler::new(Family::Poisson, 0.0).unwrap();
        let an = TiltedSampler::new(Family::Poisson, 0.0).unwrap();
        let mut r1 = rng::stream(3, 0);
        let mut r2 = rng::stream(3, 0);
        for _ in 0..100 {
            assert_eq!(bg.sample(&mut r1), an.sample(&mut r2));
        }
    }

    #[test]
    fn gaussian_block_mean_tracks_theta() {
        let s = GenerationSpec {
            family: Family::Gaussian,
            rows: 200,
            cols: 200,
            block_rows: 40,
            block_cols: 50,
            theta: 0.5,
            seed: 99,
        };
        let (x, planted) = generate(&s).unwrap();
        assert_eq!(planted, Selection::leading(40, 50).unwrap());
        let mean = block_mean(&x, 40, 50);
        assert!((mean - 0.5).abs() < 3.0 / (2000f64).sqrt(), "mean {mean}");
    }

    #[test]
    fn poisson_tilt_doubles_the_rate() {
        let sampler = TiltedSampler::new(Family::Poisson, 2f64.ln()).unwrap();
        let mut rng = rng::stream(5, 0);
        let n = 200_000;
        let mean = (0..n).map(|_| sampler.sample(&mut rng) + 1.0).sum::<f64>() / n as f64;
        assert!((mean - 2.0).abs() < 0.02, "mean {mean}");
    }

    #[test]
    fn rademacher_saturates() {
        let sampler = TiltedSampler::new(Family::Rademacher, 40.0).unwrap();
        let mut rng = rng::stream(1, 0);
        assert!((0..10_000).all(|_| sampler.sample(&mut rng) == 1.0));
    }

    #[test]
    fn invalid_specs() {
        let mut s = spec(Family::Gaussian, 1.0, 0);
        s.block_rows = 61;
        assert!(generate(&s).is_err());
        let mut s = spec(Family::Gaussian, -1.0, 0);
        assert!(generate(&s).is_err());
        s.theta = f64::INFINITY;
        assert!(generate(&s).is_err());
        assert!("binomial".parse::<Family>().is_err());
        assert_eq!("Poisson".parse::<Family>().unwrap(), Family::Poisson);
    }
}
