//! Hamiltonians and unitaries: conditional and plain beam splitters, spin
//! rotations, displacements, sideband pulses, the joint blue sideband and
//! the CSWAP composition.

mod prepare;

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::fockspace::sparse::Csr;
use crate::fockspace::{LinearOperator, Mode, ModeLayout, OperatorKind, Spin};
use crate::linalg::{expm_hermitian, expm_hermitian_blocks};
use crate::{Error, Result, C64};

pub use prepare::{prepare, prepare_with_background, Preparation};

/// Coupling that gives a 400 μs gate: `π/(2ξ) = 400 μs`.
pub const DEFAULT_XI: f64 = PI / (2.0 * 400e-6);

/// Conditional (or plain) beam-splitter segment.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CbsParams {
    /// Coupling ξ in rad/s.
    pub xi: f64,
    /// Beam-splitter phase υ in rad.
    pub upsilon: f64,
    /// `(p, q)`: the generator is `a_p† a_q e^{iυ} + h.c.`
    pub modes: (Mode, Mode),
    /// Duration in s.
    pub duration: f64,
}

impl CbsParams {
    /// Full gate (`t = π/(2ξ)`) between `modes`.
    pub fn gate(xi: f64, upsilon: f64, modes: (Mode, Mode)) -> Self {
        CbsParams {
            xi,
            upsilon,
            modes,
            duration: gate_time(xi),
        }
    }

    pub fn with_duration(mut self, duration: f64) -> Self {
        self.duration = duration;
        self
    }

    pub fn with_upsilon(mut self, upsilon: f64) -> Self {
        self.upsilon = upsilon;
        self
    }

    pub fn gate_time(&self) -> f64 {
        gate_time(self.xi)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.xi > 0.0) || !self.xi.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "xi must be positive, got {}",
                self.xi
            )));
        }
        if !(self.duration >= 0.0) || !self.duration.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "duration must be non-negative, got {}",
                self.duration
            )));
        }
        if !self.upsilon.is_finite() {
            return Err(Error::InvalidParameter("upsilon must be finite".into()));
        }
        if self.modes.0 == self.modes.1 {
            return Err(Error::IdenticalModes(self.modes.0));
        }
        Ok(())
    }

    fn is_full_gate(&self) -> bool {
        let tau = self.gate_time();
        (self.duration - tau).abs() <= 1e-12 * tau
    }
}

impl Default for CbsParams {
    fn default() -> Self {
        CbsParams::gate(DEFAULT_XI, 0.0, (Mode::A, Mode::B))
    }
}

/// `τ = π/(2ξ)`.
pub fn gate_time(xi: f64) -> f64 {
    FRAC_PI_2 / xi
}

/// Spin rotation `R(θ, φ)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RotationParams {
    pub theta: f64,
    pub phi: f64,
}

impl RotationParams {
    pub fn new(theta: f64, phi: f64) -> Self {
        RotationParams { theta, phi }
    }
}

/// Joint blue sideband drive.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct JointSidebandParams {
    /// Base Rabi frequency Ω₀ in rad/s.
    pub omega0: f64,
    /// Duration in s.
    pub duration: f64,
}

impl JointSidebandParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.omega0 > 0.0) || !self.omega0.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "omega0 must be positive, got {}",
                self.omega0
            )));
        }
        if !(self.duration >= 0.0) || !self.duration.is_finite() {
            return Err(Error::InvalidParameter(
                "duration must be non-negative".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SidebandKind {
    Red,
    Blue,
}

fn check_pair(layout: &ModeLayout, modes: (Mode, Mode)) -> Result<(usize, usize)> {
    if modes.0 == modes.1 {
        return Err(Error::IdenticalModes(modes.0));
    }
    Ok((layout.stride(modes.0)?, layout.stride(modes.1)?))
}

/// `ξ(a_p† a_q e^{iυ} + a_p a_q† e^{−iυ})`, restricted to `spin` if given.
fn beam_splitter_csr(
    layout: &ModeLayout,
    xi: f64,
    upsilon: f64,
    modes: (Mode, Mode),
    spin: Option<Spin>,
) -> Result<Csr> {
    let (sp, sq) = check_pair(layout, modes)?;
    let np_max = layout.cutoff(modes.0)?;
    let forward = C64::from_polar(xi, upsilon);
    let mut triplets = Vec::new();
    for j in 0..layout.dim() {
        if spin.is_some_and(|s| layout.spin_at(j) != s) {
            continue;
        }
        let np = layout.occupation_at(j, modes.0);
        let nq = layout.occupation_at(j, modes.1);
        // a_p† a_q |np, nq⟩ = √((np+1) nq) |np+1, nq−1⟩
        if nq > 0 && np + 1 < np_max {
            let amp = ((np + 1) as f64 * nq as f64).sqrt();
            let i = j + sp - sq;
            triplets.push((i, j, forward * amp));
            triplets.push((j, i, forward.conj() * amp));
        }
    }
    Ok(Csr::from_triplets(layout.dim(), triplets))
}

/// Conditional beam-splitter Hamiltonian `ξ|e⟩⟨e|(a†b e^{iυ} + a b† e^{−iυ})`
/// in rad/s.
pub fn h_cbs(params: &CbsParams, layout: &ModeLayout) -> Result<LinearOperator> {
    params.validate()?;
    let m = beam_splitter_csr(
        layout,
        params.xi,
        params.upsilon,
        params.modes,
        Some(Spin::E),
    )?;
    Ok(LinearOperator::from_csr(
        layout,
        OperatorKind::Hamiltonian,
        m,
    ))
}

/// Plain beam-splitter Hamiltonian, identity on the spin.
pub fn h_bs(params: &CbsParams, layout: &ModeLayout) -> Result<LinearOperator> {
    params.validate()?;
    let m = beam_splitter_csr(layout, params.xi, params.upsilon, params.modes, None)?;
    Ok(LinearOperator::from_csr(
        layout,
        OperatorKind::Hamiltonian,
        m,
    ))
}

/// Full-gate Fock action `|n,m⟩ ↦ (−i)^{n+m} e^{i(m−n)υ}|m,n⟩` on the pair,
/// applied where `spin` matches (or everywhere).
fn swap_map(
    layout: &ModeLayout,
    upsilon: f64,
    modes: (Mode, Mode),
    spin: Option<Spin>,
) -> Result<LinearOperator> {
    let (sp, sq) = check_pair(layout, modes)?;
    Ok(LinearOperator::from_columns(
        layout,
        OperatorKind::Unitary,
        |j| {
            if spin.is_some_and(|s| layout.spin_at(j) != s) {
                return Some((j, C64::new(1.0, 0.0)));
            }
            let n = layout.occupation_at(j, modes.0);
            let m = layout.occupation_at(j, modes.1);
            let i = j - n * sp - m * sq + m * sp + n * sq;
            let phase = minus_i_pow(n + m) * C64::from_polar(1.0, (m as f64 - n as f64) * upsilon);
            Some((i, phase))
        },
    ))
}

/// `(−i)^k`.
pub(crate) fn minus_i_pow(k: usize) -> C64 {
    match k % 4 {
        0 => C64::new(1.0, 0.0),
        1 => C64::new(0.0, -1.0),
        2 => C64::new(-1.0, 0.0),
        _ => C64::new(0.0, 1.0),
    }
}

fn beam_splitter_unitary(
    params: &CbsParams,
    layout: &ModeLayout,
    spin: Option<Spin>,
) -> Result<LinearOperator> {
    params.validate()?;
    let (p, q) = params.modes;
    if params.is_full_gate() && layout.cutoff(p)? == layout.cutoff(q)? {
        return swap_map(layout, params.upsilon, params.modes, spin);
    }
    let h = beam_splitter_csr(layout, params.xi, params.upsilon, params.modes, spin)?;
    Ok(LinearOperator::from_csr(
        layout,
        OperatorKind::Unitary,
        expm_hermitian_blocks(&h, params.duration),
    ))
}

/// `exp(−i H_CBS t)`.
///
/// At the full gate time with equal cutoffs on the pair the closed-form Fock
/// action is used; otherwise each excitation manifold is exponentiated
/// exactly.
pub fn u_cbs(params: &CbsParams, layout: &ModeLayout) -> Result<LinearOperator> {
    beam_splitter_unitary(params, layout, Some(Spin::E))
}

/// Same as [`u_cbs`] without spin conditioning.
pub fn u_bs(params: &CbsParams, layout: &ModeLayout) -> Result<LinearOperator> {
    beam_splitter_unitary(params, layout, None)
}

/// Reference path for [`u_cbs`]: always exponentiates the generator.
pub fn u_cbs_exponential(params: &CbsParams, layout: &ModeLayout) -> Result<LinearOperator> {
    params.validate()?;
    let h = beam_splitter_csr(
        layout,
        params.xi,
        params.upsilon,
        params.modes,
        Some(Spin::E),
    )?;
    Ok(LinearOperator::from_csr(
        layout,
        OperatorKind::Unitary,
        expm_hermitian_blocks(&h, params.duration),
    ))
}

/// `R(θ,φ) = [[cos θ/2, −i sin θ/2 e^{−iφ}], [−i sin θ/2 e^{iφ}, cos θ/2]]`.
pub fn rotation_matrix(params: &RotationParams) -> [[C64; 2]; 2] {
    let c = C64::new((params.theta / 2.0).cos(), 0.0);
    let s = (params.theta / 2.0).sin();
    let minus_i = C64::new(0.0, -1.0);
    [
        [c, minus_i * s * C64::from_polar(1.0, -params.phi)],
        [minus_i * s * C64::from_polar(1.0, params.phi), c],
    ]
}

pub fn spin_rotation(params: &RotationParams, layout: &ModeLayout) -> LinearOperator {
    LinearOperator::on_spin(layout, rotation_matrix(params), OperatorKind::Unitary)
}

/// Single-mode displacement `exp(α a† − α* a)` truncated at `cutoff`.
pub fn displacement_matrix(alpha: C64, cutoff: usize) -> DMatrix<C64> {
    // D = exp(−iK) with K = i(α a† − α* a) Hermitian.
    let k = DMatrix::from_fn(cutoff, cutoff, |r, c| {
        if r == c + 1 {
            C64::new(0.0, 1.0) * alpha * (r as f64).sqrt()
        } else if c == r + 1 {
            C64::new(0.0, -1.0) * alpha.conj() * (c as f64).sqrt()
        } else {
            C64::new(0.0, 0.0)
        }
    });
    expm_hermitian(&k, 1.0)
}

pub fn displacement(alpha: C64, mode: Mode, layout: &ModeLayout) -> Result<LinearOperator> {
    if !alpha.re.is_finite() || !alpha.im.is_finite() {
        return Err(Error::InvalidParameter(
            "displacement amplitude must be finite".into(),
        ));
    }
    let local = displacement_matrix(alpha, layout.cutoff(mode)?);
    let mut op = LinearOperator::on_mode(layout, mode, &local, OperatorKind::Unitary)?;
    op.matrix.prune(1e-16);
    Ok(op)
}

/// Ideal sideband π-pulse on `mode`.
///
/// Blue couples `|g,n⟩ ↔ |e,n+1⟩`, red couples `|g,n+1⟩ ↔ |e,n⟩`, each pair
/// picking up `−i`. Levels without a partner inside the cutoff are left
/// unchanged.
pub fn sideband_pi(kind: SidebandKind, mode: Mode, layout: &ModeLayout) -> Result<LinearOperator> {
    let cutoff = layout.cutoff(mode)?;
    let stride = layout.stride(mode)?;
    let spin_stride = layout.spin_stride();
    let minus_i = C64::new(0.0, -1.0);
    Ok(LinearOperator::from_columns(
        layout,
        OperatorKind::Unitary,
        |j| {
            let n = layout.occupation_at(j, mode);
            let spin = layout.spin_at(j);
            let target = match (kind, spin) {
                (SidebandKind::Blue, Spin::G) if n + 1 < cutoff => Some(j + spin_stride + stride),
                (SidebandKind::Blue, Spin::E) if n > 0 => Some(j - spin_stride - stride),
                (SidebandKind::Red, Spin::G) if n > 0 => Some(j + spin_stride - stride),
                (SidebandKind::Red, Spin::E) if n + 1 < cutoff => Some(j - spin_stride + stride),
                _ => None,
            };
            Some(match target {
                Some(i) => (i, minus_i),
                None => (j, C64::new(1.0, 0.0)),
            })
        },
    ))
}

/// Joint blue sideband `(Ω₀/2)(a†b†σ₊ + a b σ₋)` in rad/s. The pair
/// `|g,n_a,n_b⟩ ↔ |e,n_a+1,n_b+1⟩` then Rabi-oscillates at
/// `√((n_a+1)(n_b+1))·Ω₀`.
pub fn joint_sideband_h(
    omega0: f64,
    modes: (Mode, Mode),
    layout: &ModeLayout,
) -> Result<LinearOperator> {
    let (sp, sq) = check_pair(layout, modes)?;
    let (np_max, nq_max) = (layout.cutoff(modes.0)?, layout.cutoff(modes.1)?);
    let spin_stride = layout.spin_stride();
    let mut triplets = Vec::new();
    for j in 0..layout.mode_dim() {
        let np = layout.occupation_at(j, modes.0);
        let nq = layout.occupation_at(j, modes.1);
        if np + 1 < np_max && nq + 1 < nq_max {
            let amp = C64::new(
                0.5 * omega0 * ((np + 1) as f64 * (nq + 1) as f64).sqrt(),
                0.0,
            );
            let i = j + spin_stride + sp + sq;
            triplets.push((i, j, amp));
            triplets.push((j, i, amp));
        }
    }
    Ok(LinearOperator::from_csr(
        layout,
        OperatorKind::Hamiltonian,
        Csr::from_triplets(layout.dim(), triplets),
    ))
}

pub fn joint_sideband_u(
    params: &JointSidebandParams,
    modes: (Mode, Mode),
    layout: &ModeLayout,
) -> Result<LinearOperator> {
    params.validate()?;
    let h = joint_sideband_h(params.omega0, modes, layout)?;
    Ok(LinearOperator::from_csr(
        layout,
        OperatorKind::Unitary,
        expm_hermitian_blocks(&h.matrix, params.duration),
    ))
}

/// Single-mode blue sideband `(Ω₀/2)(a†σ₊ + aσ₋)` on `mode`: the pair
/// `|g,n⟩ ↔ |e,n+1⟩` Rabi-oscillates at `√(n+1)·Ω₀`.
pub fn blue_sideband_h(omega0: f64, mode: Mode, layout: &ModeLayout) -> Result<LinearOperator> {
    let cutoff = layout.cutoff(mode)?;
    let stride = layout.stride(mode)?;
    let spin_stride = layout.spin_stride();
    let mut triplets = Vec::new();
    for j in 0..layout.mode_dim() {
        let n = layout.occupation_at(j, mode);
        if n + 1 < cutoff {
            let amp = C64::new(0.5 * omega0 * ((n + 1) as f64).sqrt(), 0.0);
            let i = j + spin_stride + stride;
            triplets.push((i, j, amp));
            triplets.push((j, i, amp));
        }
    }
    Ok(LinearOperator::from_csr(
        layout,
        OperatorKind::Hamiltonian,
        Csr::from_triplets(layout.dim(), triplets),
    ))
}

/// Blue sideband on `mode` driven for `params.duration`.
pub fn blue_sideband_u(
    params: &JointSidebandParams,
    mode: Mode,
    layout: &ModeLayout,
) -> Result<LinearOperator> {
    params.validate()?;
    let h = blue_sideband_h(params.omega0, mode, layout)?;
    Ok(LinearOperator::from_csr(
        layout,
        OperatorKind::Unitary,
        expm_hermitian_blocks(&h.matrix, params.duration),
    ))
}

/// `U_CBS^{ab,υ=π/2}(τ) · (U_CBS^{ac,υ=0}(τ))²`: a CSWAP of a and b on the
/// subspace where c is in vacuum.
pub fn cswap_composed(layout: &ModeLayout) -> Result<LinearOperator> {
    layout.cutoff(Mode::C)?;
    let ac = u_cbs(
        &CbsParams::gate(DEFAULT_XI, 0.0, (Mode::A, Mode::C)),
        layout,
    )?;
    let ab = u_cbs(
        &CbsParams::gate(DEFAULT_XI, FRAC_PI_2, (Mode::A, Mode::B)),
        layout,
    )?;
    LinearOperator::product(&[ab, ac.clone(), ac])
}

/// Echoed CBS, in application order: `U(t/2, υ)`, `R(π, 0)`, `U(t/2, υ+π)`.
pub fn echoed_cbs(params: &CbsParams, layout: &ModeLayout) -> Result<Vec<LinearOperator>> {
    let half = params.with_duration(params.duration / 2.0);
    Ok(vec![
        u_cbs(&half, layout)?,
        spin_rotation(&RotationParams::new(PI, 0.0), layout),
        u_cbs(&half.with_upsilon(params.upsilon + PI), layout)?,
    ])
}
