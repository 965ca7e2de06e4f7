//! Closed-form two-packet picture for the ideal linear dispersion, plus the
//! standard initial states.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{wrap_offset, Topology};
use crate::propagator::{SingleExcitationState, Transform};

/// Right (`Plus`, velocity `+N/2π`) or left (`Minus`) moving packet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PacketBranch {
    Plus,
    Minus,
}

impl PacketBranch {
    pub fn direction(self) -> f64 {
        match self {
            PacketBranch::Plus => 1.0,
            PacketBranch::Minus => -1.0,
        }
    }

    pub fn velocity(self, sites: usize) -> f64 {
        self.direction() * sites as f64 / (2.0 * PI)
    }

    /// Share of momentum bin `n` carried by this branch: positive momenta move
    /// right under `(N/2π)|k|`, and the two self-conjugate bins `n = 0` and
    /// `n = -N/2` are split evenly.
    pub fn momentum_weight(self, n: i64, sites: usize) -> f64 {
        let half = (sites / 2) as i64;
        if n == 0 || n == -half {
            return 0.5;
        }
        match (self, n > 0) {
            (PacketBranch::Plus, true) | (PacketBranch::Minus, false) => 1.0,
            _ => 0.0,
        }
    }
}

/// Continuum projection `⟨j|φ_±⟩` at packet offset `l`:
/// `1/2` at the centre, `∓ i/(π l)` at odd `l`, zero at even `l ≠ 0`.
pub fn packet_projection(branch: PacketBranch, l: i64) -> Complex64 {
    if l == 0 {
        Complex64::new(0.5, 0.0)
    } else if l % 2 != 0 {
        Complex64::new(0.0, -branch.direction() / (PI * l as f64))
    } else {
        Complex64::new(0.0, 0.0)
    }
}

/// Integer packet displacement `N t / 2π`, provided `t` is a discrete instant.
pub fn discrete_shift(sites: usize, t: f64) -> Result<i64> {
    let shift = sites as f64 * t / (2.0 * PI);
    let rounded = shift.round();
    if (shift - rounded).abs() > 1e-9 * rounded.abs().max(1.0) {
        return Err(Error::NotDiscreteInstant { t, shift });
    }
    Ok(rounded as i64)
}

/// Packet amplitudes over the ring at a discrete instant, indexed by site.
/// Offsets `l_± = N_A - j ± N t/2π` are taken as minimal images.
pub fn packet_state(
    sites: usize,
    origin: usize,
    t: f64,
    branch: PacketBranch,
) -> Result<Vec<Complex64>> {
    Topology::ring(sites)?.check_site(origin)?;
    let shift = discrete_shift(sites, t)?;
    let signed_shift = match branch {
        PacketBranch::Plus => shift,
        PacketBranch::Minus => -shift,
    };
    Ok((0..sites)
        .map(|j| {
            let l = wrap_offset(origin as i64 - j as i64 + signed_shift, sites);
            packet_projection(branch, l)
        })
        .collect())
}

/// Splits a ring state into its right- and left-moving components by
/// momentum sign. Only meaningful for dispersions increasing in `|k|`
/// (the exact-linear convention); the two parts always sum to the input.
pub fn split_branch(state: &SingleExcitationState, branch: PacketBranch) -> Vec<Complex64> {
    let sites = state.len();
    let transform = Transform::new(sites);
    split_branch_with(&transform, state, branch)
}

pub(crate) fn split_branch_with(
    transform: &Transform,
    state: &SingleExcitationState,
    branch: PacketBranch,
) -> Vec<Complex64> {
    let sites = state.len();
    let mut m = transform
        .to_momentum(state)
        .expect("transform matches state size")
        .amplitudes()
        .to_vec();
    let half = (sites / 2) as i64;
    for (idx, a) in m.iter_mut().enumerate() {
        *a *= branch.momentum_weight(idx as i64 - half, sites);
    }
    let mstate = crate::propagator::MomentumState::unnormalized(m);
    transform
        .from_momentum(&mstate)
        .expect("transform matches state size")
        .into_amplitudes()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RecurrenceEvent {
    pub m_plus: u32,
    pub m_minus: u32,
    pub time: f64,
    pub position: usize,
}

impl RecurrenceEvent {
    pub fn new(sites: usize, origin: usize, m_plus: u32, m_minus: u32) -> Self {
        let n = sites as i64;
        let moved = n * (m_plus as i64 - m_minus as i64) / 2;
        Self {
            m_plus,
            m_minus,
            time: (m_plus + m_minus) as f64 * PI,
            position: (origin as i64 - moved).rem_euclid(n) as usize,
        }
    }
}

/// Every `(m_+, m_-)` with `m_+ + m_- ≤ max_order`, ordered by time.
pub fn recurrence_schedule(sites: usize, origin: usize, max_order: u32) -> Vec<RecurrenceEvent> {
    let mut events: Vec<RecurrenceEvent> = (0..=max_order)
        .flat_map(|total| (0..=total).rev().map(move |mp| (mp, total - mp)))
        .map(|(mp, mm)| RecurrenceEvent::new(sites, origin, mp, mm))
        .collect();
    events.sort_by(|a, b| a.time.total_cmp(&b.time));
    events
}

/// Normalized Gaussian `f_i ∝ exp(-α²/2 (N_A - i)²)`; on a ring the distance
/// is the minimal image.
pub fn gaussian_state(topology: &Topology, center: usize, alpha: f64) -> Result<SingleExcitationState> {
    topology.check_site(center)?;
    if !(alpha >= 0.0) {
        return Err(Error::InvalidParameter(format!("alpha must be ≥ 0, got {alpha}")));
    }
    let amplitudes = (0..topology.sites())
        .map(|i| {
            let d = topology.offset(center, i) as f64;
            Complex64::new((-0.5 * alpha * alpha * d * d).exp(), 0.0)
        })
        .collect();
    SingleExcitationState::normalized(amplitudes)
}

/// Reflection parity `R` of a symmetric state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn sign(self) -> f64 {
        match self {
            Parity::Even => 1.0,
            Parity::Odd => -1.0,
        }
    }
}

/// `f_0 |N_A⟩ + Σ_j f_j (|N_A + j⟩ + (-1)^R |N_A - j⟩)`, normalized.
/// `coefficients[j - 1]` holds `f_j`.
pub fn symmetric_state(
    topology: &Topology,
    center: usize,
    f0: Complex64,
    coefficients: &[Complex64],
    parity: Parity,
) -> Result<SingleExcitationState> {
    topology.check_site(center)?;
    let sites = topology.sites();
    let mut amplitudes = vec![Complex64::new(0.0, 0.0); sites];
    amplitudes[center] += f0;
    for (idx, &f) in coefficients.iter().enumerate() {
        if f == Complex64::new(0.0, 0.0) {
            continue;
        }
        let j = idx as i64 + 1;
        let right = topology.shifted(center, j);
        let left = topology.shifted(center, -j);
        match (right, left) {
            (Some(r), Some(l)) => {
                amplitudes[r] += f;
                amplitudes[l] += f * parity.sign();
            }
            _ => {
                return Err(Error::SiteOutOfRange {
                    index: center + idx + 1,
                    sites,
                })
            }
        }
    }
    SingleExcitationState::normalized(amplitudes)
}
