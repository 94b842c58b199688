use nalgebra::DMatrix;

use super::NoiseParams;
use crate::fockspace::sparse::Csr;
use crate::fockspace::{
    ladder_operators, number_operator, sigma_z, HybridState, LinearOperator, Mode, ModeLayout,
    OperatorKind,
};
use crate::{Error, Result, C64};

/// A jump operator `L = √rate · O`, with `O` stored already scaled.
#[derive(Clone, Debug)]
pub struct CollapseOperator {
    pub name: String,
    pub rate: f64,
    pub operator: LinearOperator,
}

/// Jump operators for `params` on `layout`; zero rates are omitted.
///
/// Heating is symmetric `a`/`a†` diffusion, spin dephasing is
/// `√(γ_s/2) σ_z` (coherence decays as `e^{−γ_s t}`), and motional dephasing
/// is `√γ n̂` per mode or one joint `(n̂_a − n̂_b)` jump.
pub fn collapse_operators(
    params: &NoiseParams,
    layout: &ModeLayout,
) -> Result<Vec<CollapseOperator>> {
    params.validate()?;
    let mut out = Vec::new();
    let scaled = |op: &LinearOperator, rate: f64| {
        op.scaled(C64::new(rate.sqrt(), 0.0), OperatorKind::General)
    };
    for mode in [Mode::A, Mode::B] {
        if !layout.has_mode(mode) {
            continue;
        }
        let heat = params.heating(mode);
        if heat > 0.0 {
            let (a, a_dag) = ladder_operators(layout, mode)?;
            out.push(CollapseOperator {
                name: format!("heat_{mode}_up"),
                rate: heat,
                operator: scaled(&a_dag, heat),
            });
            out.push(CollapseOperator {
                name: format!("heat_{mode}_down"),
                rate: heat,
                operator: scaled(&a, heat),
            });
        }
    }
    if params.deph_spin > 0.0 {
        out.push(CollapseOperator {
            name: "deph_spin".into(),
            rate: params.deph_spin / 2.0,
            operator: scaled(&sigma_z(layout), params.deph_spin / 2.0),
        });
    }
    let both = layout.has_mode(Mode::A) && layout.has_mode(Mode::B);
    if params.correlated_mode_dephasing && both {
        let rate = (params.deph_mode_a + params.deph_mode_b) / 2.0;
        if rate > 0.0 {
            let diff = number_operator(layout, Mode::A)?.sum(
                &number_operator(layout, Mode::B)?
                    .scaled(C64::new(-1.0, 0.0), OperatorKind::General),
                OperatorKind::General,
            )?;
            out.push(CollapseOperator {
                name: "deph_mode_ab".into(),
                rate,
                operator: scaled(&diff, rate),
            });
        }
    } else {
        for mode in [Mode::A, Mode::B] {
            let gamma = params.mode_dephasing(mode);
            if layout.has_mode(mode) && gamma > 0.0 {
                out.push(CollapseOperator {
                    name: format!("deph_mode_{mode}"),
                    rate: gamma,
                    operator: scaled(&number_operator(layout, mode)?, gamma),
                });
            }
        }
    }
    Ok(out)
}

/// Precomputed Lindblad generator `ρ ↦ Kρ + (Kρ)† + Σ LρL†` with
/// `K = −iH − ½ΣL†L`.
pub(crate) struct Lindbladian {
    k: Csr,
    jumps: Vec<Csr>,
    /// `Σ_k l_k,i conj(l_k,j)` over all diagonal jumps.
    diagonal: Option<DMatrix<C64>>,
    max_rate: f64,
    h_norm: f64,
}

impl Lindbladian {
    pub fn new(
        hamiltonian: Option<&LinearOperator>,
        collapse: &[CollapseOperator],
        layout: &ModeLayout,
    ) -> Result<Self> {
        let dim = layout.dim();
        let mut k = Csr::from_triplets(dim, std::iter::empty());
        let mut h_norm = 0.0;
        if let Some(h) = hamiltonian {
            h.check_layout(layout)?;
            let dev = h.max_hermitian_deviation();
            if dev > 1e-9 * h.matrix.max_row_sum().max(1.0) {
                return Err(Error::NotHermitian(dev));
            }
            h_norm = h.matrix.max_row_sum();
            k = h.matrix.scale(C64::new(0.0, -1.0));
        }
        let mut jumps = Vec::new();
        let mut diag: Option<DMatrix<C64>> = None;
        let mut max_rate: f64 = 0.0;
        for c in collapse {
            c.operator.check_layout(layout)?;
            max_rate = max_rate.max(c.rate);
            let l = &c.operator.matrix;
            k = k.add(&l.adjoint().matmul(l).scale(C64::new(-0.5, 0.0)));
            if l.is_diagonal() {
                let d = l.diagonal_values();
                let m = diag.get_or_insert_with(|| DMatrix::zeros(dim, dim));
                for j in 0..dim {
                    for i in 0..dim {
                        m[(i, j)] += d[i] * d[j].conj();
                    }
                }
            } else {
                jumps.push(l.clone());
            }
        }
        Ok(Lindbladian {
            k,
            jumps,
            diagonal: diag,
            max_rate,
            h_norm,
        })
    }

    fn rhs(&self, rho: &DMatrix<C64>) -> DMatrix<C64> {
        let kr = self.k.mul_dense(rho);
        let mut out = &kr + kr.adjoint();
        for l in &self.jumps {
            // ρ is Hermitian, so L ρ L† = L (L ρ)†.
            let lr = l.mul_dense(rho);
            out += l.mul_dense(&lr.adjoint());
        }
        if let Some(d) = &self.diagonal {
            out += d.component_mul(rho);
        }
        out
    }

    /// Step count for a segment of length `t`.
    pub fn steps(&self, t: f64) -> usize {
        let mut dt: f64 = MAX_STEP;
        if self.max_rate > 0.0 {
            dt = dt.min(1.0 / (50.0 * self.max_rate));
        }
        if self.h_norm > 0.0 {
            dt = dt.min(0.02 / self.h_norm);
        }
        ((t / dt).ceil() as usize).max(1)
    }

    pub fn integrate(&self, rho: &DMatrix<C64>, t: f64) -> DMatrix<C64> {
        if t == 0.0 {
            return rho.clone();
        }
        let n = self.steps(t);
        let h = t / n as f64;
        let half = C64::new(h / 2.0, 0.0);
        let full = C64::new(h, 0.0);
        let sixth = C64::new(h / 6.0, 0.0);
        let two = C64::new(2.0, 0.0);
        let mut r = rho.clone();
        for _ in 0..n {
            let k1 = self.rhs(&r);
            let k2 = self.rhs(&(&r + &k1 * half));
            let k3 = self.rhs(&(&r + &k2 * half));
            let k4 = self.rhs(&(&r + &k3 * full));
            r += (k1 + k2 * two + k3 * two + k4) * sixth;
            // Keep ρ exactly Hermitian against rounding drift.
            r = (&r + r.adjoint()) * C64::new(0.5, 0.0);
        }
        r
    }
}

/// Upper bound on the RK4 step, seconds.
pub const MAX_STEP: f64 = 1e-6;

/// Integrates the master equation
/// `dρ/dt = −i[H,ρ] + Σ (LρL† − ½{L†L,ρ})` for `t` seconds with fixed-step
/// RK4. The step is at most 1 μs and at most `1/(50·max rate)`.
pub fn evolve(
    state: &HybridState,
    hamiltonian: Option<&LinearOperator>,
    t: f64,
    params: &NoiseParams,
) -> Result<HybridState> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "evolution time must be non-negative, got {t}"
        )));
    }
    let layout = state.layout();
    let collapse = collapse_operators(params, layout)?;
    let lindbladian = Lindbladian::new(hamiltonian, &collapse, layout)?;
    let rho = lindbladian.integrate(&state.density_matrix(), t);
    HybridState::density(layout, rho)
}
