use std::fmt;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A bosonic motional mode. At most three are supported.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    A,
    B,
    C,
}

impl Mode {
    pub const ALL: [Mode; 3] = [Mode::A, Mode::B, Mode::C];

    pub fn index(self) -> usize {
        match self {
            Mode::A => 0,
            Mode::B => 1,
            Mode::C => 2,
        }
    }

    pub fn from_index(index: usize) -> Option<Mode> {
        Mode::ALL.get(index).copied()
    }

    pub fn label(self) -> &'static str {
        match self {
            Mode::A => "a",
            Mode::B => "b",
            Mode::C => "c",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Spin basis state of the ion.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spin {
    G,
    E,
}

impl Spin {
    pub fn index(self) -> usize {
        match self {
            Spin::G => 0,
            Spin::E => 1,
        }
    }

    pub fn from_index(index: usize) -> Spin {
        if index == 0 {
            Spin::G
        } else {
            Spin::E
        }
    }

    pub fn flipped(self) -> Spin {
        match self {
            Spin::G => Spin::E,
            Spin::E => Spin::G,
        }
    }
}

/// One tensor factor of the hybrid space.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Factor {
    Spin,
    Mode(Mode),
}

/// Basis ket `|s, n_a, n_b[, n_c]⟩`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BasisKet {
    pub spin: Spin,
    pub occupations: Vec<usize>,
}

/// Truncated tensor space: spin ⊗ a ⊗ b [⊗ c].
///
/// Flattening order is fixed: spin is the slowest index, then a, b, c, so
/// the ket `|s, n_a, n_b, n_c⟩` sits at `((s·N_a + n_a)·N_b + n_b)·N_c + n_c`.
/// Every module goes through [`ModeLayout::basis_index`] rather than
/// computing offsets by hand.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModeLayout {
    cutoffs: Vec<usize>,
}

impl ModeLayout {
    pub const SPIN_DIM: usize = 2;

    pub fn new(cutoffs: &[usize]) -> Result<Self> {
        if cutoffs.is_empty() || cutoffs.len() > 3 {
            return Err(Error::InvalidLayout(format!(
                "expected 1 to 3 mode cutoffs, got {}",
                cutoffs.len()
            )));
        }
        if let Some(pos) = cutoffs.iter().position(|&c| c == 0) {
            return Err(Error::InvalidLayout(format!(
                "cutoff of mode {} must be at least 1",
                Mode::ALL[pos]
            )));
        }
        Ok(ModeLayout {
            cutoffs: cutoffs.to_vec(),
        })
    }

    pub fn cutoffs(&self) -> &[usize] {
        &self.cutoffs
    }

    pub fn num_modes(&self) -> usize {
        self.cutoffs.len()
    }

    pub fn modes(&self) -> impl Iterator<Item = Mode> + '_ {
        Mode::ALL.iter().copied().take(self.cutoffs.len())
    }

    pub fn has_mode(&self, mode: Mode) -> bool {
        mode.index() < self.cutoffs.len()
    }

    pub fn cutoff(&self, mode: Mode) -> Result<usize> {
        self.cutoffs
            .get(mode.index())
            .copied()
            .ok_or(Error::UnknownMode(mode))
    }

    pub fn dim(&self) -> usize {
        Self::SPIN_DIM * self.mode_dim()
    }

    /// Dimension of the motional part alone.
    pub fn mode_dim(&self) -> usize {
        self.cutoffs.iter().product()
    }

    /// Stride of one step in `mode` within the flat index.
    pub fn stride(&self, mode: Mode) -> Result<usize> {
        self.cutoff(mode)?;
        Ok(self.cutoffs[mode.index() + 1..].iter().product())
    }

    pub fn spin_stride(&self) -> usize {
        self.mode_dim()
    }

    pub fn factor_dim(&self, factor: Factor) -> Result<usize> {
        match factor {
            Factor::Spin => Ok(Self::SPIN_DIM),
            Factor::Mode(m) => self.cutoff(m),
        }
    }

    pub fn factor_stride(&self, factor: Factor) -> Result<usize> {
        match factor {
            Factor::Spin => Ok(self.spin_stride()),
            Factor::Mode(m) => self.stride(m),
        }
    }

    pub fn factors(&self) -> Vec<Factor> {
        std::iter::once(Factor::Spin)
            .chain(self.modes().map(Factor::Mode))
            .collect()
    }

    pub fn basis_index(&self, spin: Spin, occupations: &[usize]) -> Result<usize> {
        if occupations.len() != self.cutoffs.len() {
            return Err(Error::InvalidParameter(format!(
                "expected {} occupations, got {}",
                self.cutoffs.len(),
                occupations.len()
            )));
        }
        let mut index = spin.index();
        for (k, (&n, &cutoff)) in occupations.iter().zip(&self.cutoffs).enumerate() {
            if n >= cutoff {
                return Err(Error::OccupationOutOfRange {
                    mode: Mode::ALL[k],
                    occupation: n,
                    cutoff,
                });
            }
            index = index * cutoff + n;
        }
        Ok(index)
    }

    /// Inverse of [`basis_index`](Self::basis_index).
    ///
    /// # Panics
    /// If `index >= self.dim()`.
    pub fn basis_decode(&self, index: usize) -> BasisKet {
        assert!(index < self.dim(), "basis index {index} out of range");
        let mut rest = index;
        let mut occupations = vec![0; self.cutoffs.len()];
        for (k, &cutoff) in self.cutoffs.iter().enumerate().rev() {
            occupations[k] = rest % cutoff;
            rest /= cutoff;
        }
        BasisKet {
            spin: Spin::from_index(rest),
            occupations,
        }
    }

    /// Occupation of `mode` at flat `index`, without allocating.
    pub(crate) fn occupation_at(&self, index: usize, mode: Mode) -> usize {
        let k = mode.index();
        let stride: usize = self.cutoffs[k + 1..].iter().product();
        (index / stride) % self.cutoffs[k]
    }

    pub(crate) fn spin_at(&self, index: usize) -> Spin {
        Spin::from_index(index / self.mode_dim())
    }
}

impl fmt::Display for ModeLayout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "spin")?;
        for (m, c) in self.modes().zip(&self.cutoffs) {
            write!(f, " ⊗ {m}[{c}]")?;
        }
        Ok(())
    }
}
