//! Gate sequences and the simulator that runs them, with or without noise.

use std::f64::consts::PI;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::fockspace::{
    HybridState, LinearOperator, LocalState, Mode, ModeLayout, Representation, Spin,
};
use crate::generators::{
    displacement, h_bs, h_cbs, joint_sideband_h, joint_sideband_u, sideband_pi, spin_rotation,
    u_bs, u_cbs, CbsParams, JointSidebandParams, Preparation, RotationParams, SidebandKind,
};
use crate::noise::{evolve, NoiseParams};
use crate::{Error, Result, C64};

/// One step of a sequence.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Op {
    Rotate(RotationParams),
    /// Spin-conditioned beam splitter.
    Cbs(CbsParams),
    /// Unconditioned beam splitter.
    Bs(CbsParams),
    Displace {
        alpha: C64,
        mode: Mode,
    },
    Sideband {
        kind: SidebandKind,
        mode: Mode,
    },
    JointSideband {
        params: JointSidebandParams,
        modes: (Mode, Mode),
    },
    Wait {
        duration: f64,
    },
}

impl Op {
    pub fn rotate(theta: f64, phi: f64) -> Self {
        Op::Rotate(RotationParams::new(theta, phi))
    }

    /// Duration in seconds; instantaneous operations return 0.
    pub fn duration(&self) -> f64 {
        match self {
            Op::Cbs(p) | Op::Bs(p) => p.duration,
            Op::JointSideband { params, .. } => params.duration,
            Op::Wait { duration } => *duration,
            _ => 0.0,
        }
    }

    pub fn unitary(&self, layout: &ModeLayout) -> Result<LinearOperator> {
        match self {
            Op::Rotate(p) => Ok(spin_rotation(p, layout)),
            Op::Cbs(p) => u_cbs(p, layout),
            Op::Bs(p) => u_bs(p, layout),
            Op::Displace { alpha, mode } => displacement(*alpha, *mode, layout),
            Op::Sideband { kind, mode } => sideband_pi(*kind, *mode, layout),
            Op::JointSideband { params, modes } => joint_sideband_u(params, *modes, layout),
            Op::Wait { duration } => {
                check_duration(*duration)?;
                Ok(LinearOperator::identity(layout))
            }
        }
    }

    /// Generator of a timed operation; `None` for instantaneous ones and
    /// for `Wait` (zero Hamiltonian).
    pub fn hamiltonian(&self, layout: &ModeLayout) -> Result<Option<LinearOperator>> {
        Ok(match self {
            Op::Cbs(p) => Some(h_cbs(p, layout)?),
            Op::Bs(p) => Some(h_bs(p, layout)?),
            Op::JointSideband { params, modes } => {
                params.validate()?;
                Some(joint_sideband_h(params.omega0, *modes, layout)?)
            }
            _ => None,
        })
    }

    fn is_timed(&self) -> bool {
        matches!(
            self,
            Op::Cbs(_) | Op::Bs(_) | Op::JointSideband { .. } | Op::Wait { .. }
        )
    }
}

fn check_duration(t: f64) -> Result<()> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "duration must be non-negative, got {t}"
        )));
    }
    Ok(())
}

/// CBS gate, optionally echoed: `U(t/2, υ)`, `R(π, 0)`, `U(t/2, υ+π)`.
pub fn cbs_ops(params: CbsParams, echo: bool) -> Vec<Op> {
    if !echo {
        return vec![Op::Cbs(params)];
    }
    let half = params.with_duration(params.duration / 2.0);
    vec![
        Op::Cbs(half),
        Op::rotate(PI, 0.0),
        Op::Cbs(half.with_upsilon(params.upsilon + PI)),
    ]
}

/// Runs sequences on a fixed layout under fixed noise.
#[derive(Clone, Debug)]
pub struct Simulator {
    layout: ModeLayout,
    noise: NoiseParams,
}

impl Simulator {
    pub fn new(layout: ModeLayout, noise: NoiseParams) -> Result<Self> {
        noise.validate()?;
        Ok(Simulator { layout, noise })
    }

    pub fn layout(&self) -> &ModeLayout {
        &self.layout
    }

    pub fn noise(&self) -> &NoiseParams {
        &self.noise
    }

    /// Applies `ops` in order. Without dissipation every operation is its
    /// exact unitary; otherwise timed operations are integrated through the
    /// master equation and the state becomes a density operator.
    pub fn run(&self, state: &HybridState, ops: &[Op]) -> Result<HybridState> {
        let mut s = state.clone();
        for op in ops {
            s = self.step(&s, op)?;
        }
        Ok(s)
    }

    pub fn step(&self, state: &HybridState, op: &Op) -> Result<HybridState> {
        if self.noise.is_unitary() || !op.is_timed() {
            return state.apply(&op.unitary(&self.layout)?);
        }
        check_duration(op.duration())?;
        let h = op.hamiltonian(&self.layout)?;
        evolve(state, h.as_ref(), op.duration(), &self.noise)
    }

    pub fn run_ensemble(&self, ensemble: &Ensemble, ops: &[Op]) -> Result<Ensemble> {
        if self.noise.is_unitary() {
            // Reuse each unitary across members.
            let unitaries = ops
                .iter()
                .map(|op| op.unitary(&self.layout))
                .collect::<Result<Vec<_>>>()?;
            let members = ensemble
                .members
                .iter()
                .map(|(w, s)| Ok((*w, s.apply_all(&unitaries)?)))
                .collect::<Result<Vec<_>>>()?;
            return Ok(Ensemble { members });
        }
        let members = ensemble
            .members
            .iter()
            .map(|(w, s)| Ok((*w, self.run(s, ops)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Ensemble { members })
    }
}

/// Weighted collection of states standing for their mixture. Noiseless
/// runs keep mixed preparations as pure members; anything else is a single
/// density operator.
#[derive(Clone, Debug, PartialEq)]
pub struct Ensemble {
    pub members: Vec<(f64, HybridState)>,
}

const MIN_WEIGHT: f64 = 1e-14;

impl Ensemble {
    pub fn single(state: HybridState) -> Self {
        Ensemble {
            members: vec![(1.0, state)],
        }
    }

    /// Spin in `|g⟩`, each listed mode prepared by its recipe (others in
    /// vacuum), on top of the thermal backgrounds in `noise`.
    pub fn prepare(
        layout: &ModeLayout,
        preps: &[(Mode, Preparation)],
        noise: &NoiseParams,
    ) -> Result<Self> {
        let mut locals = Vec::new();
        for m in layout.modes() {
            let prep = preps
                .iter()
                .find(|(pm, _)| *pm == m)
                .map_or(Preparation::vacuum(), |(_, p)| p.clone());
            locals.push(prep.local_state_with_background(layout.cutoff(m)?, m, noise.nbar(m))?);
        }
        for (m, _) in preps {
            layout.cutoff(*m)?;
        }
        let spin = LocalState::fock(2, 0);
        if !noise.is_unitary() {
            return Ok(Self::single(HybridState::product(layout, spin, &locals)?));
        }
        // Decompose every mixed factor and take all products.
        let mut members: Vec<(f64, Vec<DVector<C64>>)> = vec![(1.0, Vec::new())];
        for local in &locals {
            let parts = pure_parts(local);
            let mut next = Vec::new();
            for (w, vs) in &members {
                for (p, v) in &parts {
                    let mut vs = vs.clone();
                    vs.push(v.clone());
                    next.push((w * p, vs));
                }
            }
            members = next;
        }
        let members = members
            .into_iter()
            .filter(|(w, _)| *w > MIN_WEIGHT)
            .map(|(w, vs)| {
                let modes: Vec<LocalState> = vs.into_iter().map(LocalState::Pure).collect();
                Ok((w, HybridState::product(layout, spin.clone(), &modes)?))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Ensemble { members })
    }

    pub fn apply(&self, op: &LinearOperator) -> Result<Self> {
        let members = self
            .members
            .iter()
            .map(|(w, s)| Ok((*w, s.apply(op)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Ensemble { members })
    }

    pub fn spin_population(&self, spin: Spin) -> f64 {
        self.members
            .iter()
            .map(|(w, s)| w * s.spin_population(spin))
            .sum()
    }

    pub fn mode_distribution(&self, mode: Mode) -> Result<Vec<f64>> {
        let mut out: Vec<f64> = Vec::new();
        for (w, s) in &self.members {
            let d = s.mode_distribution(mode)?;
            out.resize(d.len(), 0.0);
            for (o, p) in out.iter_mut().zip(d) {
                *o += w * p;
            }
        }
        Ok(out)
    }

    pub fn leakage(&self) -> f64 {
        self.members.iter().map(|(w, s)| w * s.leakage()).sum()
    }

    /// The mixture as one density operator.
    pub fn to_state(&self) -> Result<HybridState> {
        let (_, first) = self.members.first().ok_or(Error::ZeroNorm)?;
        if self.members.len() == 1 {
            return Ok(first.clone());
        }
        let layout = first.layout().clone();
        let mut rho = nalgebra::DMatrix::zeros(layout.dim(), layout.dim());
        for (w, s) in &self.members {
            rho += s.density_matrix() * C64::new(*w, 0.0);
        }
        HybridState::density(&layout, rho)
    }

    pub fn is_pure(&self) -> bool {
        self.members.len() == 1
            && matches!(self.members[0].1.representation(), Representation::Pure(_))
    }
}

fn pure_parts(local: &LocalState) -> Vec<(f64, DVector<C64>)> {
    match local {
        LocalState::Pure(v) => vec![(1.0, v.clone())],
        LocalState::Mixed(m) => {
            let eig = m.clone().symmetric_eigen();
            eig.eigenvalues
                .iter()
                .enumerate()
                .filter(|(_, &l)| l > MIN_WEIGHT)
                .map(|(k, &l)| (l, eig.eigenvectors.column(k).into_owned()))
                .collect()
        }
    }
}
