//! Comparison localizers that do not use the scan objective.

mod gmg;
mod spectral;

pub use gmg::gmg_localize;
pub use spectral::{
    leading_singular_pair, localize_from_pair, spectral_localize, two_means_1d, SingularPair,
    SpectralConfig,
};

use crate::error::{domain, Result};
use crate::matrix::DataMatrix;

fn require_at_least_2x2(x: &DataMatrix, who: &str) -> Result<()> {
    if x.rows() < 2 || x.cols() < 2 {
        return Err(domain(format!(
            "{who} needs at least a 2x2 matrix, got {}x{}",
            x.rows(),
            x.cols()
        )));
    }
    Ok(())
}
