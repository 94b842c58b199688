use nalgebra::{DMatrix, DVector};

use super::operator::LinearOperator;
use super::{Factor, Mode, ModeLayout, Spin};
use crate::{Error, Result, C64};

/// State of a single factor used when assembling product states.
#[derive(Clone, Debug, PartialEq)]
pub enum LocalState {
    Pure(DVector<C64>),
    Mixed(DMatrix<C64>),
}

impl LocalState {
    pub fn fock(cutoff: usize, n: usize) -> Self {
        let mut v = DVector::zeros(cutoff);
        v[n] = C64::new(1.0, 0.0);
        LocalState::Pure(v)
    }

    pub fn dim(&self) -> usize {
        match self {
            LocalState::Pure(v) => v.len(),
            LocalState::Mixed(m) => m.nrows(),
        }
    }

    fn to_matrix(&self) -> DMatrix<C64> {
        match self {
            LocalState::Pure(v) => v * v.adjoint(),
            LocalState::Mixed(m) => m.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Representation {
    Pure(DVector<C64>),
    Density(DMatrix<C64>),
}

/// Pure state or density operator on a [`ModeLayout`].
#[derive(Clone, Debug, PartialEq)]
pub struct HybridState {
    layout: ModeLayout,
    repr: Representation,
}

/// Reduced density operator over a subset of factors, flattened in layout
/// order.
#[derive(Clone, Debug, PartialEq)]
pub struct ReducedState {
    pub factors: Vec<Factor>,
    pub dims: Vec<usize>,
    pub matrix: DMatrix<C64>,
}

impl ReducedState {
    /// Flat index of a configuration given per-factor local indices.
    pub fn index(&self, local: &[usize]) -> usize {
        local
            .iter()
            .zip(&self.dims)
            .fold(0, |acc, (&i, &d)| acc * d + i)
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }
}

impl HybridState {
    pub fn pure(layout: &ModeLayout, amplitudes: DVector<C64>) -> Result<Self> {
        if amplitudes.len() != layout.dim() {
            return Err(Error::InvalidParameter(format!(
                "expected {} amplitudes for layout {layout}, got {}",
                layout.dim(),
                amplitudes.len()
            )));
        }
        Ok(HybridState {
            layout: layout.clone(),
            repr: Representation::Pure(amplitudes),
        })
    }

    pub fn density(layout: &ModeLayout, rho: DMatrix<C64>) -> Result<Self> {
        if rho.nrows() != layout.dim() || rho.ncols() != layout.dim() {
            return Err(Error::InvalidParameter(format!(
                "expected a {0}x{0} density matrix for layout {layout}",
                layout.dim()
            )));
        }
        Ok(HybridState {
            layout: layout.clone(),
            repr: Representation::Density(rho),
        })
    }

    pub fn basis(layout: &ModeLayout, spin: Spin, occupations: &[usize]) -> Result<Self> {
        let idx = layout.basis_index(spin, occupations)?;
        let mut v = DVector::zeros(layout.dim());
        v[idx] = C64::new(1.0, 0.0);
        Self::pure(layout, v)
    }

    /// `|g⟩ ⊗ |0⟩ ⊗ … ⊗ |0⟩`.
    pub fn ground(layout: &ModeLayout) -> Self {
        let zeros = vec![0; layout.num_modes()];
        Self::basis(layout, Spin::G, &zeros).expect("vacuum is always in range")
    }

    /// Tensor product of a spin state and one local state per mode.
    /// The result is pure iff every factor is pure.
    pub fn product(layout: &ModeLayout, spin: LocalState, modes: &[LocalState]) -> Result<Self> {
        if modes.len() != layout.num_modes() {
            return Err(Error::InvalidParameter(format!(
                "expected {} mode states, got {}",
                layout.num_modes(),
                modes.len()
            )));
        }
        if spin.dim() != 2 {
            return Err(Error::InvalidParameter(
                "spin state must have dimension 2".into(),
            ));
        }
        for (m, s) in layout.modes().zip(modes) {
            if s.dim() != layout.cutoff(m)? {
                return Err(Error::InvalidParameter(format!(
                    "state for mode {m} has dimension {}, cutoff is {}",
                    s.dim(),
                    layout.cutoff(m)?
                )));
            }
        }
        let factors: Vec<&LocalState> = std::iter::once(&spin).chain(modes).collect();
        let all_pure = factors.iter().all(|f| matches!(f, LocalState::Pure(_)));
        if all_pure {
            let mut v = DVector::from_element(1, C64::new(1.0, 0.0));
            for f in &factors {
                if let LocalState::Pure(p) = f {
                    v = v.kronecker(p);
                }
            }
            Self::pure(layout, v)
        } else {
            let mut m = DMatrix::from_element(1, 1, C64::new(1.0, 0.0));
            for f in &factors {
                m = m.kronecker(&f.to_matrix());
            }
            Self::density(layout, m)
        }
    }

    pub fn layout(&self) -> &ModeLayout {
        &self.layout
    }

    pub fn representation(&self) -> &Representation {
        &self.repr
    }

    pub fn is_pure_representation(&self) -> bool {
        matches!(self.repr, Representation::Pure(_))
    }

    pub fn amplitudes(&self) -> Option<&DVector<C64>> {
        match &self.repr {
            Representation::Pure(v) => Some(v),
            Representation::Density(_) => None,
        }
    }

    /// Density matrix (computed for pure states).
    pub fn density_matrix(&self) -> DMatrix<C64> {
        match &self.repr {
            Representation::Pure(v) => v * v.adjoint(),
            Representation::Density(m) => m.clone(),
        }
    }

    pub fn into_density(self) -> Self {
        match self.repr {
            Representation::Pure(ref v) => HybridState {
                repr: Representation::Density(v * v.adjoint()),
                layout: self.layout,
            },
            Representation::Density(_) => self,
        }
    }

    /// `‖ψ‖²` or `Tr ρ`.
    pub fn trace(&self) -> f64 {
        match &self.repr {
            Representation::Pure(v) => v.norm_squared(),
            Representation::Density(m) => m.trace().re,
        }
    }

    pub fn normalize(&mut self) -> Result<()> {
        let t = self.trace();
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::ZeroNorm);
        }
        match &mut self.repr {
            Representation::Pure(v) => *v /= C64::new(t.sqrt(), 0.0),
            Representation::Density(m) => *m /= C64::new(t, 0.0),
        }
        Ok(())
    }

    pub fn normalized(mut self) -> Result<Self> {
        self.normalize()?;
        Ok(self)
    }

    pub fn purity(&self) -> f64 {
        match &self.repr {
            Representation::Pure(v) => v.norm_squared().powi(2),
            Representation::Density(m) => m.iter().map(|z| z.norm_sqr()).sum(),
        }
    }

    /// Diagonal of the state in the flat basis.
    pub fn populations(&self) -> Vec<f64> {
        match &self.repr {
            Representation::Pure(v) => v.iter().map(|z| z.norm_sqr()).collect(),
            Representation::Density(m) => (0..m.nrows()).map(|i| m[(i, i)].re).collect(),
        }
    }

    pub fn spin_population(&self, spin: Spin) -> f64 {
        let pops = self.populations();
        let half = self.layout.mode_dim();
        let range = spin.index() * half..(spin.index() + 1) * half;
        pops[range].iter().sum()
    }

    /// Marginal Fock distribution of `mode`.
    pub fn mode_distribution(&self, mode: Mode) -> Result<Vec<f64>> {
        let cutoff = self.layout.cutoff(mode)?;
        let mut dist = vec![0.0; cutoff];
        for (i, p) in self.populations().into_iter().enumerate() {
            dist[self.layout.occupation_at(i, mode)] += p;
        }
        Ok(dist)
    }

    /// `⟨(−1)^{n̂}⟩` of `mode`.
    pub fn mode_parity(&self, mode: Mode) -> Result<f64> {
        Ok(self
            .mode_distribution(mode)?
            .iter()
            .enumerate()
            .map(|(n, p)| if n % 2 == 0 { *p } else { -*p })
            .sum())
    }

    /// Largest population found in the top two Fock levels of any mode.
    /// Truncation artefacts start there first.
    pub fn leakage(&self) -> f64 {
        self.layout
            .modes()
            .map(|m| {
                let dist = self.mode_distribution(m).expect("mode from layout");
                let top = dist.len().saturating_sub(2);
                dist[top..].iter().sum::<f64>()
            })
            .fold(0.0, f64::max)
    }

    /// Applies `op`. Pure states get `Oψ`; density operators get `OρO†`
    /// whatever the operator kind. Nothing is renormalised.
    pub fn apply(&self, op: &LinearOperator) -> Result<Self> {
        op.check_layout(&self.layout)?;
        let repr = match &self.repr {
            Representation::Pure(v) => Representation::Pure(op.matrix.mul_vec(v)),
            Representation::Density(m) => Representation::Density(op.matrix.sandwich(m)),
        };
        Ok(HybridState {
            layout: self.layout.clone(),
            repr,
        })
    }

    pub fn apply_all(&self, ops: &[LinearOperator]) -> Result<Self> {
        ops.iter().try_fold(self.clone(), |s, op| s.apply(op))
    }

    /// `⟨ψ|O|ψ⟩` or `Tr(ρO)`.
    pub fn expectation(&self, op: &LinearOperator) -> Result<C64> {
        op.check_layout(&self.layout)?;
        Ok(match &self.repr {
            Representation::Pure(v) => op
                .matrix
                .triplets()
                .map(|(r, c, o)| v[r].conj() * o * v[c])
                .sum(),
            Representation::Density(m) => op.matrix.triplets().map(|(r, c, o)| o * m[(c, r)]).sum(),
        })
    }

    /// Overlap with a pure target, insensitive to global phase:
    /// `|⟨t|ψ⟩|²` or `⟨t|ρ|t⟩`.
    pub fn fidelity_with(&self, target: &DVector<C64>) -> Result<f64> {
        if target.len() != self.layout.dim() {
            return Err(Error::InvalidParameter("target dimension mismatch".into()));
        }
        Ok(match &self.repr {
            Representation::Pure(v) => target.dotc(v).norm_sqr(),
            Representation::Density(m) => (target.adjoint() * m * target)[(0, 0)].re,
        })
    }

    /// Reduced density operator on `keep` (traces out every other factor).
    pub fn partial_trace(&self, keep: &[Factor]) -> Result<ReducedState> {
        if keep.is_empty() {
            return Err(Error::EmptyKeepSet);
        }
        let mut kept: Vec<Factor> = keep.to_vec();
        kept.sort();
        kept.dedup();
        let dims = kept
            .iter()
            .map(|&f| self.layout.factor_dim(f))
            .collect::<Result<Vec<_>>>()?;
        let strides = kept
            .iter()
            .map(|&f| self.layout.factor_stride(f))
            .collect::<Result<Vec<_>>>()?;
        let kept_dim: usize = dims.iter().product();
        let dim = self.layout.dim();

        // Split each flat index into (kept index, offset of the traced-out rest).
        let split = |i: usize| -> (usize, usize) {
            let mut k = 0;
            let mut rest = i;
            for (&d, &s) in dims.iter().zip(&strides) {
                let local = (i / s) % d;
                k = k * d + local;
                rest -= local * s;
            }
            (k, rest)
        };
        let parts: Vec<(usize, usize)> = (0..dim).map(split).collect();
        let mut matrix = DMatrix::zeros(kept_dim, kept_dim);
        match &self.repr {
            Representation::Pure(v) => {
                // Group amplitudes by traced-out configuration.
                let mut groups: std::collections::HashMap<usize, Vec<(usize, C64)>> =
                    Default::default();
                for (i, &(k, rest)) in parts.iter().enumerate() {
                    if v[i] != C64::new(0.0, 0.0) {
                        groups.entry(rest).or_default().push((k, v[i]));
                    }
                }
                for entries in groups.values() {
                    for &(k1, a1) in entries {
                        for &(k2, a2) in entries {
                            matrix[(k1, k2)] += a1 * a2.conj();
                        }
                    }
                }
            }
            Representation::Density(m) => {
                for j in 0..dim {
                    let (kj, rj) = parts[j];
                    for i in 0..dim {
                        let (ki, ri) = parts[i];
                        if ri == rj {
                            matrix[(ki, kj)] += m[(i, j)];
                        }
                    }
                }
            }
        }
        Ok(ReducedState {
            factors: kept,
            dims,
            matrix,
        })
    }

    /// Maximum deviation from Hermiticity (zero for pure states).
    pub fn hermiticity_error(&self) -> f64 {
        match &self.repr {
            Representation::Pure(_) => 0.0,
            Representation::Density(m) => (m - m.adjoint())
                .iter()
                .map(|z| z.norm())
                .fold(0.0, f64::max),
        }
    }

    /// Smallest eigenvalue of the (Hermitian part of the) density matrix.
    pub fn min_eigenvalue(&self) -> f64 {
        let m = self.density_matrix();
        let h = (&m + m.adjoint()) * C64::new(0.5, 0.0);
        h.symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    /// Replaces the spin factor by `|spin⟩⟨spin|`, keeping the motional
    /// reduced state.
    pub fn reset_spin(&self, spin: Spin) -> Result<Self> {
        let modes: Vec<Factor> = self.layout.modes().map(Factor::Mode).collect();
        let reduced = self.partial_trace(&modes)?;
        let half = self.layout.mode_dim();
        let mut rho = DMatrix::zeros(self.layout.dim(), self.layout.dim());
        let off = spin.index() * half;
        rho.view_mut((off, off), (half, half))
            .copy_from(&reduced.matrix);
        Self::density(&self.layout, rho)
    }

    /// Adds `weight · other` (density representation). Used for mixing
    /// measurement branches.
    pub fn add_scaled(&self, other: &HybridState, weight: f64) -> Result<Self> {
        if self.layout != other.layout {
            return Err(Error::LayoutMismatch {
                expected: self.layout.to_string(),
                found: other.layout.to_string(),
            });
        }
        let m = self.density_matrix() + other.density_matrix() * C64::new(weight, 0.0);
        Self::density(&self.layout, m)
    }
}

/// Global-phase-insensitive fidelity between two pure vectors.
pub fn pure_fidelity(a: &DVector<C64>, b: &DVector<C64>) -> f64 {
    a.dotc(b).norm_sqr() / (a.norm_squared() * b.norm_squared())
}
