//! Dense joint distributions with named axes.

use serde::{Deserialize, Serialize};

use super::{
    clamp_info, entropy_of_table, strides_of, validate_axes, validate_probs, Alphabet,
    NORMALIZATION_TOL, ZERO_CUTOFF,
};
use crate::error::{Error, Result};
use crate::prob::ConditionalKernel;

/// A joint probability distribution over one or more named axes.
///
/// `probs` is row-major over `axes`: the last axis varies fastest. This
/// flattening order is part of the JSON wire format.
#[derive(Clone, Debug, Serialize, PartialEq)]
#[serde(into = "RawJoint")]
pub struct JointDistribution {
    axes: Vec<Alphabet>,
    probs: Vec<f64>,
    #[serde(skip)]
    strides: Vec<usize>,
}

#[derive(Clone, Serialize, Deserialize)]
struct RawJoint {
    axes: Vec<Alphabet>,
    probs: Vec<f64>,
}

impl From<JointDistribution> for RawJoint {
    fn from(d: JointDistribution) -> Self {
        RawJoint {
            axes: d.axes,
            probs: d.probs,
        }
    }
}

impl TryFrom<RawJoint> for JointDistribution {
    type Error = Error;
    fn try_from(raw: RawJoint) -> Result<Self> {
        JointDistribution::new(raw.axes, raw.probs)
    }
}

impl<'de> Deserialize<'de> for JointDistribution {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let raw = RawJoint::deserialize(de)?;
        JointDistribution::try_from(raw).map_err(serde::de::Error::custom)
    }
}

impl JointDistribution {
    /// Validates shape, nonnegativity and normalization (within 1e-9).
    pub fn new(axes: Vec<Alphabet>, probs: Vec<f64>) -> Result<Self> {
        validate_axes(&axes)?;
        let cells: usize = axes.iter().map(|a| a.size).product();
        validate_probs(&probs, cells)?;
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::NotNormalized(sum));
        }
        let strides = strides_of(&axes.iter().map(|a| a.size).collect::<Vec<_>>());
        Ok(JointDistribution {
            axes,
            probs,
            strides,
        })
    }

    pub fn uniform(axes: Vec<Alphabet>) -> Result<Self> {
        validate_axes(&axes)?;
        let cells: usize = axes.iter().map(|a| a.size).product();
        Self::new(axes, vec![1.0 / cells as f64; cells])
    }

    pub fn axes(&self) -> &[Alphabet] {
        &self.axes
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn axis_position(&self, name: &str) -> Result<usize> {
        self.axes
            .iter()
            .position(|a| a.name == name)
            .ok_or_else(|| Error::UnknownAxis(name.to_string()))
    }

    pub fn axis(&self, name: &str) -> Result<&Alphabet> {
        Ok(&self.axes[self.axis_position(name)?])
    }

    /// Flat row-major index of a full coordinate vector.
    pub fn flat_index(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.axes.len());
        idx.iter()
            .zip(&self.strides)
            .map(|(&i, &s)| i * s)
            .sum()
    }

    pub fn get(&self, idx: &[usize]) -> f64 {
        self.probs[self.flat_index(idx)]
    }

    /// Resolve a group of axis names to positions; rejects unknown names
    /// and duplicates within the group.
    fn resolve(&self, group: &[&str]) -> Result<Vec<usize>> {
        let mut out = Vec::with_capacity(group.len());
        for name in group {
            let p = self.axis_position(name)?;
            if out.contains(&p) {
                return Err(Error::DuplicateAxis((*name).to_string()));
            }
            out.push(p);
        }
        Ok(out)
    }

    /// Marginal over `keep`. Result axes follow this distribution's own
    /// axis order regardless of the order names are passed in.
    pub fn marginalize(&self, keep: &[&str]) -> Result<JointDistribution> {
        let mut kept = self.resolve(keep)?;
        if kept.is_empty() {
            return Err(Error::EmptySelection);
        }
        kept.sort_unstable();
        let axes: Vec<Alphabet> = kept.iter().map(|&i| self.axes[i].clone()).collect();
        let sizes: Vec<usize> = axes.iter().map(|a| a.size).collect();
        let rstrides = strides_of(&sizes);
        // contribution of each source axis to the result flat index
        let mut contrib = vec![0usize; self.axes.len()];
        for (j, &i) in kept.iter().enumerate() {
            contrib[i] = rstrides[j];
        }
        let cells: usize = sizes.iter().product();
        let mut out = vec![0.0; cells];
        self.walk(|flat, mapped| out[mapped] += self.probs[flat], &contrib);
        JointDistribution::new(axes, out)
    }

    /// Walk all cells in row-major order, calling `f(flat, mapped)` where
    /// `mapped` is the running dot product of the coordinate with `contrib`.
    fn walk(&self, mut f: impl FnMut(usize, usize), contrib: &[usize]) {
        let n = self.axes.len();
        let mut idx = vec![0usize; n];
        let mut mapped = 0usize;
        for flat in 0..self.probs.len() {
            f(flat, mapped);
            for ax in (0..n).rev() {
                idx[ax] += 1;
                if idx[ax] < self.axes[ax].size {
                    mapped += contrib[ax];
                    break;
                }
                idx[ax] = 0;
                mapped -= contrib[ax] * (self.axes[ax].size - 1);
            }
        }
    }

    /// Conditional kernel of the remaining axes given `given`. The given
    /// axes keep the order they are passed in (so rows line up with a
    /// kernel declared over the same conditioning axes); output axes keep
    /// this distribution's order.
    ///
    /// Rows whose conditioning cell has probability below 1e-15 are left
    /// undefined (all-zero) and flagged.
    pub fn condition(&self, given: &[&str]) -> Result<ConditionalKernel> {
        let gpos = self.resolve(given)?;
        if gpos.is_empty() {
            return Err(Error::EmptySelection);
        }
        if gpos.len() == self.axes.len() {
            return Err(Error::EmptySelection);
        }
        let opos: Vec<usize> = (0..self.axes.len())
            .filter(|i| !gpos.contains(i))
            .collect();
        let gaxes: Vec<Alphabet> = gpos.iter().map(|&i| self.axes[i].clone()).collect();
        let oaxes: Vec<Alphabet> = opos.iter().map(|&i| self.axes[i].clone()).collect();
        let gsizes: Vec<usize> = gaxes.iter().map(|a| a.size).collect();
        let osizes: Vec<usize> = oaxes.iter().map(|a| a.size).collect();
        let gstrides = strides_of(&gsizes);
        let ostrides = strides_of(&osizes);
        let rows: usize = gsizes.iter().product();
        let cols: usize = osizes.iter().product();
        let mut contrib = vec![0usize; self.axes.len()];
        for (j, &i) in gpos.iter().enumerate() {
            contrib[i] = gstrides[j] * cols;
        }
        for (j, &i) in opos.iter().enumerate() {
            contrib[i] += ostrides[j];
        }
        let mut table = vec![0.0; rows * cols];
        self.walk(|flat, mapped| table[mapped] = self.probs[flat], &contrib);
        let mut defined = vec![true; rows];
        for r in 0..rows {
            let row = &mut table[r * cols..(r + 1) * cols];
            let mass: f64 = row.iter().sum();
            if mass < ZERO_CUTOFF {
                row.fill(0.0);
                defined[r] = false;
            } else {
                for p in row {
                    *p /= mass;
                }
            }
        }
        ConditionalKernel::from_parts(gaxes, oaxes, table, defined)
    }

    /// Shannon entropy in bits of the full joint.
    pub fn entropy(&self) -> f64 {
        clamp_info(entropy_of_table(&self.probs))
    }

    /// Entropy of the marginal over `group`; an empty group has entropy 0.
    pub fn group_entropy(&self, group: &[&str]) -> Result<f64> {
        if group.is_empty() {
            return Ok(0.0);
        }
        Ok(self.marginalize(group)?.entropy())
    }

    fn check_disjoint(&self, groups: &[&[&str]]) -> Result<()> {
        let mut seen: Vec<usize> = Vec::new();
        for g in groups {
            for name in *g {
                let p = self.axis_position(name)?;
                if seen.contains(&p) {
                    return Err(Error::OverlappingGroups((*name).to_string()));
                }
                seen.push(p);
            }
        }
        Ok(())
    }

    /// I(A;B) = H(A) + H(B) - H(A,B), clamped at zero.
    pub fn mutual_information(&self, a: &[&str], b: &[&str]) -> Result<f64> {
        if a.is_empty() || b.is_empty() {
            return Err(Error::EmptySelection);
        }
        self.check_disjoint(&[a, b])?;
        let ab: Vec<&str> = a.iter().chain(b.iter()).copied().collect();
        Ok(clamp_info(
            self.group_entropy(a)? + self.group_entropy(b)? - self.group_entropy(&ab)?,
        ))
    }

    /// I(A;B|C) = H(A,C) + H(B,C) - H(A,B,C) - H(C), clamped at zero.
    /// An empty `c` reduces to plain mutual information.
    pub fn conditional_mutual_information(
        &self,
        a: &[&str],
        b: &[&str],
        c: &[&str],
    ) -> Result<f64> {
        if a.is_empty() || b.is_empty() {
            return Err(Error::EmptySelection);
        }
        self.check_disjoint(&[a, b, c])?;
        let ac: Vec<&str> = a.iter().chain(c.iter()).copied().collect();
        let bc: Vec<&str> = b.iter().chain(c.iter()).copied().collect();
        let abc: Vec<&str> = a.iter().chain(b.iter()).chain(c.iter()).copied().collect();
        Ok(clamp_info(
            self.group_entropy(&ac)? + self.group_entropy(&bc)?
                - self.group_entropy(&abc)?
                - self.group_entropy(c)?,
        ))
    }

    /// Residual of the chain A -- B -- C, i.e. I(A;C|B). Zero within
    /// tolerance iff A and C are conditionally independent given B; cells
    /// where B has zero probability contribute nothing.
    pub fn markov_residual(&self, a: &[&str], b: &[&str], c: &[&str]) -> Result<f64> {
        self.conditional_mutual_information(a, c, b)
    }

    /// Total variation distance, 0.5 * sum |p - q|; requires identical axes.
    pub fn total_variation(&self, other: &JointDistribution) -> Result<f64> {
        if self.axes != other.axes {
            return Err(Error::AlphabetMismatch(format!(
                "axes {:?} vs {:?}",
                self.axes.iter().map(|a| &a.name).collect::<Vec<_>>(),
                other.axes.iter().map(|a| &a.name).collect::<Vec<_>>()
            )));
        }
        Ok(0.5
            * self
                .probs
                .iter()
                .zip(&other.probs)
                .map(|(p, q)| (p - q).abs())
                .sum::<f64>())
    }
}
