//! Conditional kernels (stochastic matrices with named axes on both sides).

use serde::{Deserialize, Serialize};

use super::{strides_of, validate_axes, validate_probs, Alphabet, NORMALIZATION_TOL, ZERO_CUTOFF};
use crate::error::{Error, Result};

/// A conditional distribution of `axes` given `given_axes`.
///
/// Stored as a rows-by-cols table in row-major order: rows enumerate the
/// conditioning cells (last given axis fastest), columns the output cells.
/// A row may be undefined, meaning the conditioning cell has zero
/// probability under the joint it came from; undefined rows are all zero
/// and excluded from comparisons.
#[derive(Clone, Debug, Serialize, PartialEq)]
#[serde(into = "RawKernel")]
pub struct ConditionalKernel {
    given_axes: Vec<Alphabet>,
    axes: Vec<Alphabet>,
    probs: Vec<f64>,
    #[serde(skip)]
    defined: Vec<bool>,
}

#[derive(Clone, Serialize, Deserialize)]
struct RawKernel {
    given_axes: Vec<Alphabet>,
    axes: Vec<Alphabet>,
    probs: Vec<f64>,
}

impl From<ConditionalKernel> for RawKernel {
    fn from(k: ConditionalKernel) -> Self {
        RawKernel {
            given_axes: k.given_axes,
            axes: k.axes,
            probs: k.probs,
        }
    }
}

impl TryFrom<RawKernel> for ConditionalKernel {
    type Error = Error;
    fn try_from(raw: RawKernel) -> Result<Self> {
        ConditionalKernel::new(raw.given_axes, raw.axes, raw.probs)
    }
}

impl<'de> Deserialize<'de> for ConditionalKernel {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let raw = RawKernel::deserialize(de)?;
        ConditionalKernel::try_from(raw).map_err(serde::de::Error::custom)
    }
}

impl ConditionalKernel {
    /// Validates the table: every row must sum to one (within 1e-9) or be
    /// identically zero, in which case it is marked undefined. An empty
    /// `given_axes` list is allowed and means a single unconditional row.
    pub fn new(given_axes: Vec<Alphabet>, axes: Vec<Alphabet>, probs: Vec<f64>) -> Result<Self> {
        if !given_axes.is_empty() {
            validate_axes(&given_axes)?;
        }
        validate_axes(&axes)?;
        for g in &given_axes {
            if axes.iter().any(|a| a.name == g.name) {
                return Err(Error::DuplicateAxis(g.name.clone()));
            }
        }
        let rows: usize = given_axes.iter().map(|a| a.size).product();
        let cols: usize = axes.iter().map(|a| a.size).product();
        validate_probs(&probs, rows * cols)?;
        let mut probs = probs;
        let mut defined = vec![true; rows];
        for r in 0..rows {
            let row = &mut probs[r * cols..(r + 1) * cols];
            let mass: f64 = row.iter().sum();
            if mass < ZERO_CUTOFF {
                row.fill(0.0);
                defined[r] = false;
            } else if (mass - 1.0).abs() > NORMALIZATION_TOL {
                return Err(Error::NotNormalized(mass));
            }
        }
        Ok(ConditionalKernel {
            given_axes,
            axes,
            probs,
            defined,
        })
    }

    /// Used by `JointDistribution::condition`, which has already
    /// normalized rows and computed the defined flags.
    pub(crate) fn from_parts(
        given_axes: Vec<Alphabet>,
        axes: Vec<Alphabet>,
        probs: Vec<f64>,
        defined: Vec<bool>,
    ) -> Result<Self> {
        Ok(ConditionalKernel {
            given_axes,
            axes,
            probs,
            defined,
        })
    }

    /// Kernel that maps each conditioning cell to a single output cell.
    pub fn deterministic(
        given_axes: Vec<Alphabet>,
        axes: Vec<Alphabet>,
        map: impl Fn(&[usize]) -> Vec<usize>,
    ) -> Result<Self> {
        if !given_axes.is_empty() {
            validate_axes(&given_axes)?;
        }
        validate_axes(&axes)?;
        let gsizes: Vec<usize> = given_axes.iter().map(|a| a.size).collect();
        let osizes: Vec<usize> = axes.iter().map(|a| a.size).collect();
        let rows: usize = gsizes.iter().product();
        let cols: usize = osizes.iter().product();
        let ostrides = strides_of(&osizes);
        let mut probs = vec![0.0; rows * cols];
        let mut gidx = vec![0usize; gsizes.len()];
        for r in 0..rows {
            let target = map(&gidx);
            if target.len() != osizes.len() {
                return Err(Error::ShapeMismatch {
                    expected: osizes.len(),
                    got: target.len(),
                });
            }
            let mut col = 0usize;
            for (d, (&t, ax)) in target.iter().zip(&axes).enumerate() {
                if t >= ax.size {
                    return Err(Error::SymbolOutOfRange {
                        axis: ax.name.clone(),
                        value: t,
                        size: ax.size,
                    });
                }
                col += t * ostrides[d];
            }
            probs[r * cols + col] = 1.0;
            for d in (0..gsizes.len()).rev() {
                gidx[d] += 1;
                if gidx[d] < gsizes[d] {
                    break;
                }
                gidx[d] = 0;
            }
        }
        ConditionalKernel::new(given_axes, axes, probs)
    }

    pub fn given_axes(&self) -> &[Alphabet] {
        &self.given_axes
    }

    pub fn axes(&self) -> &[Alphabet] {
        &self.axes
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn rows(&self) -> usize {
        self.given_axes.iter().map(|a| a.size).product()
    }

    pub fn cols(&self) -> usize {
        self.axes.iter().map(|a| a.size).product()
    }

    /// The row for conditioning cell `r`, or None if undefined.
    pub fn row(&self, r: usize) -> Option<&[f64]> {
        if self.defined[r] {
            let cols = self.cols();
            Some(&self.probs[r * cols..(r + 1) * cols])
        } else {
            None
        }
    }

    pub fn is_row_defined(&self, r: usize) -> bool {
        self.defined[r]
    }

    /// Flat row index of a conditioning coordinate vector.
    pub fn row_index(&self, gidx: &[usize]) -> usize {
        let gsizes: Vec<usize> = self.given_axes.iter().map(|a| a.size).collect();
        let gstrides = strides_of(&gsizes);
        gidx.iter().zip(&gstrides).map(|(&i, &s)| i * s).sum()
    }

    /// Largest total variation between matching rows, skipping rows that
    /// are undefined on either side. Requires identical axes on both sides.
    pub fn max_row_tv(&self, other: &ConditionalKernel) -> Result<f64> {
        if self.given_axes != other.given_axes || self.axes != other.axes {
            return Err(Error::AlphabetMismatch(
                "kernel axes differ".to_string(),
            ));
        }
        let cols = self.cols();
        let mut worst = 0.0f64;
        for r in 0..self.rows() {
            if !(self.defined[r] && other.defined[r]) {
                continue;
            }
            let tv = 0.5
                * self.probs[r * cols..(r + 1) * cols]
                    .iter()
                    .zip(&other.probs[r * cols..(r + 1) * cols])
                    .map(|(p, q)| (p - q).abs())
                    .sum::<f64>();
            worst = worst.max(tv);
        }
        Ok(worst)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ax(name: &str, size: usize) -> Alphabet {
        Alphabet::new(name, size)
    }

    #[test]
    fn validates_rows() {
        // defined row, undefined row
        let k = ConditionalKernel::new(
            vec![ax("U", 2)],
            vec![ax("X", 2)],
            vec![0.3, 0.7, 0.0, 0.0],
        )
        .unwrap();
        assert!(k.is_row_defined(0));
        assert!(!k.is_row_defined(1));
        assert!(matches!(
            ConditionalKernel::new(
                vec![ax("U", 2)],
                vec![ax("X", 2)],
                vec![0.3, 0.7, 0.5, 0.6],
            ),
            Err(Error::NotNormalized(_))
        ));
        // output axis clashing with a given axis
        assert!(ConditionalKernel::new(
            vec![ax("U", 2)],
            vec![ax("U", 2)],
            vec![1.0, 0.0, 0.0, 1.0],
        )
        .is_err());
    }

    #[test]
    fn unconditional_kernel_is_single_row() {
        let k = ConditionalKernel::new(vec![], vec![ax("X", 3)], vec![0.2, 0.3, 0.5]).unwrap();
        assert_eq!(k.rows(), 1);
        assert_eq!(k.row(0).unwrap(), &[0.2, 0.3, 0.5]);
    }

    #[test]
    fn deterministic_builder() {
        // X = U xor S
        let k = ConditionalKernel::deterministic(
            vec![ax("U", 2), ax("S", 2)],
            vec![ax("X", 2)],
            |g| vec![g[0] ^ g[1]],
        )
        .unwrap();
        assert_eq!(k.row(k.row_index(&[0, 0])).unwrap(), &[1.0, 0.0]);
        assert_eq!(k.row(k.row_index(&[0, 1])).unwrap(), &[0.0, 1.0]);
        assert_eq!(k.row(k.row_index(&[1, 0])).unwrap(), &[0.0, 1.0]);
        assert_eq!(k.row(k.row_index(&[1, 1])).unwrap(), &[1.0, 0.0]);
    }

    #[test]
    fn max_row_tv_skips_undefined() {
        let a = ConditionalKernel::new(
            vec![ax("U", 2)],
            vec![ax("X", 2)],
            vec![1.0, 0.0, 0.0, 0.0],
        )
        .unwrap();
        let b = ConditionalKernel::new(
            vec![ax("U", 2)],
            vec![ax("X", 2)],
            vec![0.9, 0.1, 0.0, 1.0],
        )
        .unwrap();
        // row 1 undefined in a, so only row 0 compared
        assert!((a.max_row_tv(&b).unwrap() - 0.1).abs() < 1e-12);
    }

    #[test]
    fn serde_round_trip() {
        let k = ConditionalKernel::new(
            vec![ax("U", 2)],
            vec![ax("X", 2)],
            vec![0.3, 0.7, 0.0, 0.0],
        )
        .unwrap();
        let json = serde_json::to_string(&k).unwrap();
        let back: ConditionalKernel = serde_json::from_str(&json).unwrap();
        assert_eq!(back, k);
        assert!(!back.is_row_defined(1));
    }
}
