//! Two-spin entanglement, autocorrelation, and packet diagnostics.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::Topology;
use crate::propagator::SingleExcitationState;

/// Reduced density matrix of spins `(i, j)` in the basis
/// `|↑↑⟩, |↑↓⟩, |↓↑⟩, |↓↓⟩`, where `↓` marks the flipped spin. `z` is the
/// `⟨↓↑|ρ|↑↓⟩` coherence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReducedTwoSpinDensity {
    pub p_uu: f64,
    pub p_ud: f64,
    pub p_du: f64,
    pub p_dd: f64,
    pub z: Complex64,
}

impl ReducedTwoSpinDensity {
    pub fn trace(&self) -> f64 {
        self.p_uu + self.p_ud + self.p_du + self.p_dd
    }

    /// Wootters concurrence of the X-shaped state:
    /// `max(0, 2(|z| - sqrt(p_uu p_dd)))`.
    pub fn concurrence(&self) -> f64 {
        (2.0 * (self.z.norm() - (self.p_uu * self.p_dd).sqrt())).max(0.0)
    }
}

fn check_pair(state: &SingleExcitationState, i: usize, j: usize) -> Result<()> {
    let sites = state.len();
    for index in [i, j] {
        if index >= sites {
            return Err(Error::SiteOutOfRange { index, sites });
        }
    }
    if i == j {
        return Err(Error::SameSite(i));
    }
    Ok(())
}

pub fn reduced_density(state: &SingleExcitationState, i: usize, j: usize) -> Result<ReducedTwoSpinDensity> {
    check_pair(state, i, j)?;
    let (fi, fj) = (state.amplitude(i), state.amplitude(j));
    let p_du = fi.norm_sqr();
    let p_ud = fj.norm_sqr();
    Ok(ReducedTwoSpinDensity {
        p_uu: (state.norm_sqr() - p_du - p_ud).max(0.0),
        p_ud,
        p_du,
        p_dd: 0.0,
        z: fi * fj.conj(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConcurrenceForm {
    /// `2 |f_i f_j*|`, the exact two-qubit concurrence in this sector.
    #[default]
    Standard,
    /// `|⟨S_i^+ S_j^- + S_i^- S_j^+⟩| = |2 Re(f_i f_j*)|`.
    PaperSymmetrized,
}

pub fn concurrence(state: &SingleExcitationState, i: usize, j: usize, form: ConcurrenceForm) -> Result<f64> {
    let rho = reduced_density(state, i, j)?;
    Ok(match form {
        ConcurrenceForm::Standard => rho.concurrence(),
        ConcurrenceForm::PaperSymmetrized => (2.0 * rho.z.re).abs(),
    })
}

/// Both forms from a pair of amplitudes, when only those two are known.
pub fn pair_concurrences(fi: Complex64, fj: Complex64) -> (f64, f64) {
    let z = fi * fj.conj();
    (2.0 * z.norm(), (2.0 * z.re).abs())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfilePoint {
    pub j: usize,
    pub plus_site: usize,
    pub minus_site: usize,
    pub value: f64,
}

/// `C(j)` for the mirror pairs `N_A ± j`, `j = 1 ..= N/2 - 1`. Pairs that fall
/// off an open chain are skipped.
pub fn concurrence_profile(
    state: &SingleExcitationState,
    topology: &Topology,
    center: usize,
    form: ConcurrenceForm,
) -> Result<Vec<ProfilePoint>> {
    if state.len() != topology.sites() {
        return Err(Error::DimensionMismatch {
            expected: topology.sites(),
            found: state.len(),
        });
    }
    topology.check_site(center)?;
    let mut out = Vec::new();
    for j in 1..topology.sites() / 2 {
        let (Some(plus), Some(minus)) = (topology.shifted(center, j as i64), topology.shifted(center, -(j as i64)))
        else {
            continue;
        };
        out.push(ProfilePoint {
            j,
            plus_site: plus,
            minus_site: minus,
            value: concurrence(state, plus, minus, form)?,
        });
    }
    Ok(out)
}

/// `|⟨reference|current⟩|`.
pub fn autocorrelation(reference: &SingleExcitationState, current: &SingleExcitationState) -> Result<f64> {
    Ok(reference.inner(current)?.norm())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeWindow {
    pub start: f64,
    pub stop: f64,
}

impl TimeWindow {
    pub fn new(start: f64, stop: f64) -> Self {
        Self { start, stop }
    }

    /// Search window for the recurrence maximum: `[π/2, 3π]`. The lower edge
    /// skips the trivial `|A(0)| = 1` lobe; by `π/2` the two packets are a
    /// quarter ring away from the origin.
    pub fn recurrence() -> Self {
        Self::new(PI / 2.0, 3.0 * PI)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeakSample {
    pub value: f64,
    pub time: f64,
}

/// Default scan step `2π / (10 N)`.
pub fn default_step(sites: usize) -> f64 {
    2.0 * PI / (10.0 * sites as f64)
}

/// Grid maximum of `f` over the window followed by one bracket-halving pass
/// around the best grid point.
pub fn refined_maximum<F: Fn(f64) -> f64>(f: F, window: TimeWindow, dt: f64) -> Result<PeakSample> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidParameter(format!("dt must be positive, got {dt}")));
    }
    if !(window.stop > window.start) {
        return Err(Error::InvalidParameter("empty time window".into()));
    }
    let steps = ((window.stop - window.start) / dt).floor() as usize;
    let mut best = PeakSample {
        value: f64::NEG_INFINITY,
        time: window.start,
    };
    let mut best_idx = 0;
    for i in 0..=steps + 1 {
        let t = (window.start + i as f64 * dt).min(window.stop);
        let v = f(t);
        if v > best.value {
            best = PeakSample { value: v, time: t };
            best_idx = i;
        }
    }
    let mut lo = (window.start + best_idx.saturating_sub(1) as f64 * dt).max(window.start);
    let mut hi = (best.time + dt).min(window.stop);
    for _ in 0..40 {
        let left = 0.5 * (lo + best.time);
        let right = 0.5 * (best.time + hi);
        let (vl, vr) = (f(left), f(right));
        if vl > best.value && vl >= vr {
            hi = best.time;
            best = PeakSample { value: vl, time: left };
        } else if vr > best.value {
            lo = best.time;
            best = PeakSample { value: vr, time: right };
        } else {
            lo = left;
            hi = right;
        }
        if hi - lo < 1e-13 {
            break;
        }
    }
    Ok(best)
}

/// `max |A(t)|` over the window for an autocorrelation curve.
pub fn max_autocorrelation<F: Fn(f64) -> f64>(autocorr: F, window: TimeWindow, dt: f64) -> Result<PeakSample> {
    refined_maximum(autocorr, window, dt)
}

/// Contiguous run of sites, wrapping on a ring.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SiteInterval {
    pub start: usize,
    pub len: usize,
}

impl SiteInterval {
    pub fn new(start: usize, len: usize) -> Self {
        Self { start, len }
    }

    /// `len` sites centred on `center` (the extra site goes right for even `len`).
    pub fn centered(topology: &Topology, center: usize, len: usize) -> Self {
        let back = (len as i64 - 1) / 2;
        let start = topology
            .shifted(center, -back)
            .unwrap_or(0);
        Self { start, len }
    }
}

pub fn packet_weight(state: &SingleExcitationState, topology: &Topology, interval: SiteInterval) -> Result<f64> {
    let n = topology.sites();
    if state.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: state.len(),
        });
    }
    if interval.len == 0 {
        return Ok(0.0);
    }
    if interval.len > n || (!topology.is_ring() && interval.start + interval.len > n) || interval.start >= n {
        return Err(Error::InvalidParameter(format!(
            "interval [{}, +{}) does not fit in {n} sites",
            interval.start, interval.len
        )));
    }
    Ok((0..interval.len)
        .map(|d| state.amplitude((interval.start + d) % n).norm_sqr())
        .sum())
}

/// Probability on the `+` and `-` sides of `center` on a ring. The centre
/// and antipodal sites are shared equally so the halves sum to the norm.
pub fn half_ring_weights(state: &SingleExcitationState, topology: &Topology, center: usize) -> Result<(f64, f64)> {
    if !topology.is_ring() {
        return Err(Error::RingOnly);
    }
    topology.check_site(center)?;
    let n = topology.sites();
    let (mut plus, mut minus) = (0.0, 0.0);
    for site in 0..n {
        let p = state.amplitude(site).norm_sqr();
        let d = topology.offset(center, site);
        if d == 0 || d == -(n as i64) / 2 {
            plus += 0.5 * p;
            minus += 0.5 * p;
        } else if d > 0 {
            plus += p;
        } else {
            minus += p;
        }
    }
    Ok((plus, minus))
}

/// Centre and RMS width of a probability profile. On a ring the centre is
/// the circular mean and distances are minimal images about it.
pub fn rms_width(probabilities: &[f64], topology: &Topology) -> Result<(f64, f64)> {
    let n = topology.sites();
    if probabilities.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: probabilities.len(),
        });
    }
    let total: f64 = probabilities.iter().sum();
    if total <= 0.0 {
        return Err(Error::ZeroVector);
    }
    let nf = n as f64;
    let center = if topology.is_ring() {
        let z: Complex64 = probabilities
            .iter()
            .enumerate()
            .map(|(j, &p)| Complex64::from_polar(p, 2.0 * PI * j as f64 / nf))
            .sum();
        (z.arg() * nf / (2.0 * PI)).rem_euclid(nf)
    } else {
        probabilities.iter().enumerate().map(|(j, &p)| j as f64 * p).sum::<f64>() / total
    };
    let var = probabilities
        .iter()
        .enumerate()
        .map(|(j, &p)| {
            let mut d = j as f64 - center;
            if topology.is_ring() {
                d = (d + nf / 2.0).rem_euclid(nf) - nf / 2.0;
            }
            p * d * d
        })
        .sum::<f64>()
        / total;
    Ok((center, var.sqrt()))
}
