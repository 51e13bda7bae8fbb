//! Face counting and phase transitions for randomly projected orthants,
//! hypercubes and simplices.
//!
//! The crate is organised around a face-survival oracle: a generator face of
//! `R_+^N`, `[0,1]^N` or the standard simplex survives projection by `A`
//! exactly when the null space of `A` meets the face's cone of feasible
//! directions only at the origin. That test is reduced to a family of small
//! linear programs solved by the dense simplex code in [`lp`].
//!
//! * [`ensembles`] draws random (and deterministic) projection matrices.
//! * [`probcalc`] evaluates Wendel probabilities, exponents and thresholds.
//! * [`geometry`] holds null-space bases and the survival oracle.
//! * [`lp`] is the two-phase simplex solver.
//! * [`experiments`] runs Monte Carlo and exhaustive harnesses.
//! * [`cli`] and [`svg`] are the command-line front end.

pub mod cli;
pub mod ensembles;
mod error;
pub mod experiments;
pub mod geometry;
mod linalg;
pub mod lp;
mod matrix;
pub mod probcalc;
pub mod svg;

pub use error::{Error, Result};
pub use matrix::Matrix;

/// A triple `(k, n, N)` of face dimension, row count and column count.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct DimensionSpec {
    pub k: usize,
    pub n: usize,
    #[serde(rename = "N")]
    pub big_n: usize,
}

impl DimensionSpec {
    pub fn new(k: usize, n: usize, big_n: usize) -> Result<Self> {
        if k > n || n >= big_n {
            return Err(Error::InvalidDimensions(format!(
                "need 0 <= k <= n < N, got (k, n, N) = ({k}, {n}, {big_n})"
            )));
        }
        Ok(DimensionSpec { k, n, big_n })
    }

    /// Ambient dimension of the Wendel problem, `N - n`.
    pub fn wendel_m(&self) -> usize {
        self.big_n - self.n
    }

    /// Number of Wendel points, `N - k`.
    pub fn wendel_points(&self) -> usize {
        self.big_n - self.k
    }
}

/// Generator body whose faces are being counted.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Shape {
    Orthant,
    Hypercube,
    Simplex,
}

impl Shape {
    pub fn name(&self) -> &'static str {
        match self {
            Shape::Orthant => "orthant",
            Shape::Hypercube => "hypercube",
            Shape::Simplex => "simplex",
        }
    }
}

impl std::str::FromStr for Shape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "orthant" => Ok(Shape::Orthant),
            "hypercube" | "cube" => Ok(Shape::Hypercube),
            "simplex" => Ok(Shape::Simplex),
            other => Err(Error::InvalidArgument(format!("unknown shape '{other}'"))),
        }
    }
}

impl std::fmt::Display for Shape {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimension_spec_bounds() {
        assert!(DimensionSpec::new(2, 4, 8).is_ok());
        assert!(DimensionSpec::new(4, 4, 8).is_ok());
        assert!(DimensionSpec::new(5, 4, 8).is_err());
        assert!(DimensionSpec::new(0, 8, 8).is_err());
        let d = DimensionSpec::new(12, 60, 80).unwrap();
        assert_eq!((d.wendel_m(), d.wendel_points()), (20, 68));
    }

    #[test]
    fn shape_parsing() {
        assert_eq!("Hypercube".parse::<Shape>().unwrap(), Shape::Hypercube);
        assert!("cone".parse::<Shape>().is_err());
    }
}
