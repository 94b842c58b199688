use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::sparse::Csr;
use super::{Mode, ModeLayout, Spin};
use crate::{Error, Result, C64};

/// Physical meaning of an operator's entries.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum OperatorKind {
    /// Dimensionless unitary.
    Unitary,
    /// Hamiltonian divided by ħ, in rad/s.
    Hamiltonian,
    /// Anything else: ladder operators, projectors, observables.
    General,
}

/// Complex square operator on a [`ModeLayout`].
///
/// Entries are held row-compressed; [`dense`](Self::dense) expands them.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearOperator {
    layout: ModeLayout,
    kind: OperatorKind,
    pub(crate) matrix: Csr,
}

impl LinearOperator {
    pub(crate) fn from_csr(layout: &ModeLayout, kind: OperatorKind, matrix: Csr) -> Self {
        assert_eq!(matrix.dim(), layout.dim());
        LinearOperator {
            layout: layout.clone(),
            kind,
            matrix,
        }
    }

    pub fn from_dense(
        layout: &ModeLayout,
        kind: OperatorKind,
        matrix: &DMatrix<C64>,
    ) -> Result<Self> {
        if matrix.nrows() != layout.dim() || matrix.ncols() != layout.dim() {
            return Err(Error::InvalidParameter(format!(
                "matrix is {}x{} but layout {layout} has dimension {}",
                matrix.nrows(),
                matrix.ncols(),
                layout.dim()
            )));
        }
        let op = Self::from_csr(layout, kind, Csr::from_dense(matrix, 0.0));
        if kind == OperatorKind::Hamiltonian {
            op.check_hermitian(1e-12)?;
        }
        Ok(op)
    }

    /// Builds an operator column by column: `columns(j)` lists the
    /// `(row, amplitude)` pairs of the image of basis ket `j`.
    pub(crate) fn from_columns<F, I>(layout: &ModeLayout, kind: OperatorKind, columns: F) -> Self
    where
        F: Fn(usize) -> I,
        I: IntoIterator<Item = (usize, C64)>,
    {
        let dim = layout.dim();
        let triplets = (0..dim).flat_map(|j| columns(j).into_iter().map(move |(r, v)| (r, j, v)));
        Self::from_csr(layout, kind, Csr::from_triplets(dim, triplets))
    }

    pub fn identity(layout: &ModeLayout) -> Self {
        Self::from_csr(layout, OperatorKind::Unitary, Csr::identity(layout.dim()))
    }

    pub fn layout(&self) -> &ModeLayout {
        &self.layout
    }

    pub fn kind(&self) -> OperatorKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.layout.dim()
    }

    pub fn nnz(&self) -> usize {
        self.matrix.nnz()
    }

    pub fn dense(&self) -> DMatrix<C64> {
        self.matrix.to_dense()
    }

    pub fn element(&self, row: usize, col: usize) -> C64 {
        self.matrix.get(row, col)
    }

    /// Matrix element between two basis kets.
    pub fn braket(&self, bra: (Spin, &[usize]), ket: (Spin, &[usize])) -> Result<C64> {
        let r = self.layout.basis_index(bra.0, bra.1)?;
        let c = self.layout.basis_index(ket.0, ket.1)?;
        Ok(self.element(r, c))
    }

    pub fn adjoint(&self) -> Self {
        Self::from_csr(&self.layout, self.kind, self.matrix.adjoint())
    }

    /// `self · other`; unitary only if both factors are.
    pub fn compose(&self, other: &LinearOperator) -> Result<Self> {
        self.check_layout(&other.layout)?;
        let kind = if self.kind == OperatorKind::Unitary && other.kind == OperatorKind::Unitary {
            OperatorKind::Unitary
        } else {
            OperatorKind::General
        };
        Ok(Self::from_csr(
            &self.layout,
            kind,
            self.matrix.matmul(&other.matrix),
        ))
    }

    /// Product of `ops` applied right to left, i.e. `ops[0] · ops[1] · …`.
    pub fn product(ops: &[LinearOperator]) -> Result<Self> {
        let (first, rest) = ops
            .split_first()
            .ok_or_else(|| Error::InvalidParameter("empty operator product".into()))?;
        rest.iter()
            .try_fold(first.clone(), |acc, op| acc.compose(op))
    }

    pub fn scaled(&self, s: C64, kind: OperatorKind) -> Self {
        Self::from_csr(&self.layout, kind, self.matrix.scale(s))
    }

    pub fn sum(&self, other: &LinearOperator, kind: OperatorKind) -> Result<Self> {
        self.check_layout(&other.layout)?;
        Ok(Self::from_csr(
            &self.layout,
            kind,
            self.matrix.add(&other.matrix),
        ))
    }

    pub fn with_kind(mut self, kind: OperatorKind) -> Self {
        self.kind = kind;
        self
    }

    pub fn max_hermitian_deviation(&self) -> f64 {
        self.matrix.max_hermitian_deviation()
    }

    pub fn check_hermitian(&self, tol: f64) -> Result<()> {
        let dev = self.max_hermitian_deviation();
        if dev > tol {
            Err(Error::NotHermitian(dev))
        } else {
            Ok(())
        }
    }

    /// `max |(U†U − I)_ij|`.
    pub fn unitarity_error(&self) -> f64 {
        let p = self.matrix.adjoint().matmul(&self.matrix);
        let mut worst: f64 = 0.0;
        for i in 0..self.dim() {
            worst = worst.max((p.get(i, i) - 1.0).norm());
        }
        for (r, c, v) in p.triplets() {
            if r != c {
                worst = worst.max(v.norm());
            }
        }
        worst
    }

    pub(crate) fn check_layout(&self, other: &ModeLayout) -> Result<()> {
        if &self.layout != other {
            return Err(Error::LayoutMismatch {
                expected: self.layout.to_string(),
                found: other.to_string(),
            });
        }
        Ok(())
    }

    /// Embeds a single-mode matrix (indexed by Fock number) on `mode`.
    pub fn on_mode(
        layout: &ModeLayout,
        mode: Mode,
        local: &DMatrix<C64>,
        kind: OperatorKind,
    ) -> Result<Self> {
        let cutoff = layout.cutoff(mode)?;
        if local.nrows() != cutoff || local.ncols() != cutoff {
            return Err(Error::InvalidParameter(format!(
                "local matrix is {}x{} but mode {mode} has cutoff {cutoff}",
                local.nrows(),
                local.ncols()
            )));
        }
        let stride = layout.stride(mode)?;
        Ok(Self::from_columns(layout, kind, |j| {
            let n = layout.occupation_at(j, mode);
            let base = j - n * stride;
            (0..cutoff)
                .filter_map(|k| {
                    let v = local[(k, n)];
                    (v != C64::new(0.0, 0.0)).then_some((base + k * stride, v))
                })
                .collect::<Vec<_>>()
        }))
    }

    /// Embeds a 2×2 matrix on the spin factor.
    pub fn on_spin(layout: &ModeLayout, local: [[C64; 2]; 2], kind: OperatorKind) -> Self {
        let stride = layout.spin_stride();
        Self::from_columns(layout, kind, |j| {
            let s = layout.spin_at(j).index();
            let base = j - s * stride;
            (0..2)
                .filter_map(|r| {
                    let v = local[r][s];
                    (v != C64::new(0.0, 0.0)).then_some((base + r * stride, v))
                })
                .collect::<Vec<_>>()
        })
    }
}

/// Annihilation and creation operators of `mode`.
///
/// `⟨n−1|a|n⟩ = √n` on the targeted factor; the creation operator is the
/// conjugate transpose.
pub fn ladder_operators(
    layout: &ModeLayout,
    mode: Mode,
) -> Result<(LinearOperator, LinearOperator)> {
    let cutoff = layout.cutoff(mode)?;
    let local = DMatrix::from_fn(cutoff, cutoff, |r, c| {
        if c == r + 1 {
            C64::new((c as f64).sqrt(), 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    let a = LinearOperator::on_mode(layout, mode, &local, OperatorKind::General)?;
    let a_dag = a.adjoint();
    Ok((a, a_dag))
}

pub fn number_operator(layout: &ModeLayout, mode: Mode) -> Result<LinearOperator> {
    layout.cutoff(mode)?;
    Ok(LinearOperator::from_csr(
        layout,
        OperatorKind::General,
        Csr::diagonal(
            (0..layout.dim()).map(|j| C64::new(layout.occupation_at(j, mode) as f64, 0.0)),
        ),
    ))
}

/// `(−1)^{n̂}` on `mode`.
pub fn parity_operator(layout: &ModeLayout, mode: Mode) -> Result<LinearOperator> {
    layout.cutoff(mode)?;
    Ok(LinearOperator::from_csr(
        layout,
        OperatorKind::General,
        Csr::diagonal((0..layout.dim()).map(|j| {
            let sign = if layout.occupation_at(j, mode) % 2 == 0 {
                1.0
            } else {
                -1.0
            };
            C64::new(sign, 0.0)
        })),
    ))
}

/// `σ_z = |e⟩⟨e| − |g⟩⟨g|`.
pub fn sigma_z(layout: &ModeLayout) -> LinearOperator {
    let one = C64::new(1.0, 0.0);
    let zero = C64::new(0.0, 0.0);
    LinearOperator::on_spin(layout, [[-one, zero], [zero, one]], OperatorKind::General)
}

pub fn spin_projector(layout: &ModeLayout, spin: Spin) -> LinearOperator {
    let one = C64::new(1.0, 0.0);
    let zero = C64::new(0.0, 0.0);
    let m = match spin {
        Spin::G => [[one, zero], [zero, zero]],
        Spin::E => [[zero, zero], [zero, one]],
    };
    LinearOperator::on_spin(layout, m, OperatorKind::General)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ladder_examples() {
        let layout = ModeLayout::new(&[2]).unwrap();
        let (a, _) = ladder_operators(&layout, Mode::A).unwrap();
        assert_eq!(
            a.braket((Spin::G, &[0]), (Spin::G, &[1])).unwrap(),
            C64::new(1.0, 0.0)
        );

        let layout = ModeLayout::new(&[4]).unwrap();
        let (a, a_dag) = ladder_operators(&layout, Mode::A).unwrap();
        let v = a.braket((Spin::E, &[2]), (Spin::E, &[3])).unwrap();
        assert!((v.re - 3f64.sqrt()).abs() < 1e-15 && v.im == 0.0);
        let n = a_dag.compose(&a).unwrap();
        assert!((n.braket((Spin::G, &[3]), (Spin::G, &[3])).unwrap().re - 3.0).abs() < 1e-14);
        assert!((n.dense() - number_operator(&layout, Mode::A).unwrap().dense()).norm() < 1e-14);
    }

    #[test]
    fn commutator_is_identity_below_edge() {
        let layout = ModeLayout::new(&[5, 4]).unwrap();
        for mode in [Mode::A, Mode::B] {
            let cutoff = layout.cutoff(mode).unwrap();
            let (a, a_dag) = ladder_operators(&layout, mode).unwrap();
            let comm = a.compose(&a_dag).unwrap().dense() - a_dag.compose(&a).unwrap().dense();
            for i in 0..layout.dim() {
                if layout.occupation_at(i, mode) + 1 >= cutoff {
                    continue;
                }
                for j in 0..layout.dim() {
                    let expected = if i == j { 1.0 } else { 0.0 };
                    assert!((comm[(i, j)] - C64::new(expected, 0.0)).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn on_mode_acts_only_on_its_factor() {
        let layout = ModeLayout::new(&[3, 2, 2]).unwrap();
        let local = DMatrix::from_fn(2, 2, |r, c| C64::new((r * 2 + c) as f64 + 1.0, 0.0));
        let op = LinearOperator::on_mode(&layout, Mode::B, &local, OperatorKind::General).unwrap();
        let v = op
            .braket((Spin::E, &[2, 1, 1]), (Spin::E, &[2, 0, 1]))
            .unwrap();
        assert_eq!(v, C64::new(3.0, 0.0));
        assert_eq!(
            op.braket((Spin::G, &[2, 1, 1]), (Spin::E, &[2, 0, 1]))
                .unwrap(),
            C64::new(0.0, 0.0)
        );
        assert_eq!(
            op.braket((Spin::E, &[1, 1, 1]), (Spin::E, &[2, 0, 1]))
                .unwrap(),
            C64::new(0.0, 0.0)
        );
    }

    #[test]
    fn hamiltonian_tag_requires_hermitian() {
        let layout = ModeLayout::new(&[2]).unwrap();
        let mut m = DMatrix::zeros(4, 4);
        m[(0, 1)] = C64::new(1.0, 0.0);
        assert!(matches!(
            LinearOperator::from_dense(&layout, OperatorKind::Hamiltonian, &m),
            Err(Error::NotHermitian(_))
        ));
        m[(1, 0)] = C64::new(1.0, 0.0);
        assert!(LinearOperator::from_dense(&layout, OperatorKind::Hamiltonian, &m).is_ok());
    }
}
