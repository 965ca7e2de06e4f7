//! Single-excitation states and their exact time evolution.
//!
//! Two independent routes are provided: projection onto the eigenbasis of
//! the dense Hamiltonian ([`evolve_spectral`]), and phase multiplication in
//! momentum space for circulant rings ([`evolve_ring_fft`]).

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::hamiltonian::{CirculantSymbol, DenseHamiltonian};

const NORM_TOLERANCE: f64 = 1e-10;

/// Amplitudes `f_j` over the `N` one-flip basis states `|j⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct SingleExcitationState {
    amplitudes: Vec<Complex64>,
}

impl SingleExcitationState {
    /// Wraps amplitudes that are already normalized.
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        let norm_sqr = norm_sqr(&amplitudes);
        if (norm_sqr - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::NotNormalized(norm_sqr));
        }
        Ok(Self { amplitudes })
    }

    /// Rescales to unit norm.
    pub fn normalized(mut amplitudes: Vec<Complex64>) -> Result<Self> {
        let norm = norm_sqr(&amplitudes).sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::ZeroVector);
        }
        amplitudes.iter_mut().for_each(|a| *a /= norm);
        Ok(Self { amplitudes })
    }

    pub(crate) fn from_raw(amplitudes: Vec<Complex64>) -> Self {
        Self { amplitudes }
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitude(&self, site: usize) -> Complex64 {
        self.amplitudes[site]
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        norm_sqr(&self.amplitudes)
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        check_len(self.len(), other.len())?;
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Ring translation: the amplitude at `j` moves to `j + shift (mod N)`.
    pub fn translated(&self, shift: i64) -> Self {
        let n = self.len() as i64;
        let mut out = vec![Complex64::new(0.0, 0.0); self.len()];
        for (j, a) in self.amplitudes.iter().enumerate() {
            out[(j as i64 + shift).rem_euclid(n) as usize] = *a;
        }
        Self { amplitudes: out }
    }

    /// Staggered gauge `f_j -> (-1)^j f_j`.
    pub fn staggered(&self) -> Self {
        let amplitudes = self
            .amplitudes
            .iter()
            .enumerate()
            .map(|(j, a)| if j % 2 == 0 { *a } else { -*a })
            .collect();
        Self { amplitudes }
    }

    pub fn max_difference(&self, other: &Self) -> Result<f64> {
        check_len(self.len(), other.len())?;
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }
}

fn norm_sqr(v: &[Complex64]) -> f64 {
    v.iter().map(|a| a.norm_sqr()).sum()
}

fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

/// Momentum amplitudes `D_n`, stored for `n = -N/2 ..= N/2 - 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentumState {
    amplitudes: Vec<Complex64>,
}

impl MomentumState {
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        let n = norm_sqr(&amplitudes);
        if (n - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::NotNormalized(n));
        }
        Ok(Self { amplitudes })
    }

    pub(crate) fn unnormalized(amplitudes: Vec<Complex64>) -> Self {
        Self { amplitudes }
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    /// Amplitudes in momentum order, `n = -N/2` first.
    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitude(&self, n: i64) -> Complex64 {
        let half = (self.len() / 2) as i64;
        self.amplitudes[(n + half) as usize]
    }
}

pub fn delta_state(sites: usize, site: usize) -> Result<SingleExcitationState> {
    if site >= sites {
        return Err(Error::SiteOutOfRange { index: site, sites });
    }
    let mut amplitudes = vec![Complex64::new(0.0, 0.0); sites];
    amplitudes[site] = Complex64::new(1.0, 0.0);
    Ok(SingleExcitationState { amplitudes })
}

/// Unitary discrete Fourier transform with cached plans for one size.
#[derive(Clone)]
pub struct Transform {
    sites: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    scale: f64,
}

impl std::fmt::Debug for Transform {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Transform").field("sites", &self.sites).finish()
    }
}

impl Transform {
    pub fn new(sites: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            sites,
            forward: planner.plan_fft_forward(sites),
            inverse: planner.plan_fft_inverse(sites),
            scale: 1.0 / (sites as f64).sqrt(),
        }
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    /// Site amplitudes to FFT-ordered momentum bins (`m = n mod N`).
    fn forward_bins(&self, f: &[Complex64]) -> Vec<Complex64> {
        let mut buf = f.to_vec();
        self.forward.process(&mut buf);
        buf.iter_mut().for_each(|x| *x *= self.scale);
        buf
    }

    fn inverse_bins(&self, mut bins: Vec<Complex64>) -> Vec<Complex64> {
        self.inverse.process(&mut bins);
        bins.iter_mut().for_each(|x| *x *= self.scale);
        bins
    }

    /// `D_n = N^{-1/2} Σ_j e^{-i k_n j} f_j`.
    pub fn to_momentum(&self, state: &SingleExcitationState) -> Result<MomentumState> {
        check_len(self.sites, state.len())?;
        let bins = self.forward_bins(state.amplitudes());
        let half = self.sites / 2;
        let mut amplitudes = Vec::with_capacity(self.sites);
        amplitudes.extend_from_slice(&bins[half..]);
        amplitudes.extend_from_slice(&bins[..half]);
        Ok(MomentumState { amplitudes })
    }

    /// `f_j = N^{-1/2} Σ_n e^{i k_n j} D_n`.
    pub fn from_momentum(&self, state: &MomentumState) -> Result<SingleExcitationState> {
        check_len(self.sites, state.len())?;
        let half = self.sites / 2;
        let mut bins = Vec::with_capacity(self.sites);
        bins.extend_from_slice(&state.amplitudes[half..]);
        bins.extend_from_slice(&state.amplitudes[..half]);
        Ok(SingleExcitationState {
            amplitudes: self.inverse_bins(bins),
        })
    }
}

pub fn to_momentum(state: &SingleExcitationState) -> MomentumState {
    Transform::new(state.len())
        .to_momentum(state)
        .expect("transform sized from the state")
}

pub fn from_momentum(state: &MomentumState) -> SingleExcitationState {
    Transform::new(state.len())
        .from_momentum(state)
        .expect("transform sized from the state")
}

/// Eigenpairs of a dense Hamiltonian, eigenvalues ascending; eigenvector `m`
/// is column `m` of [`SpectralDecomposition::eigenvectors`].
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    eigenvalues: Vec<f64>,
    eigenvectors: DMatrix<f64>,
}

impl SpectralDecomposition {
    pub fn from_dense(h: &DenseHamiltonian) -> Self {
        let eig = h.to_matrix().symmetric_eigen();
        let n = h.size();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let eigenvalues = order.iter().map(|&m| eig.eigenvalues[m]).collect();
        let eigenvectors = DMatrix::from_fn(n, n, |i, c| eig.eigenvectors[(i, order[c])]);
        Self {
            eigenvalues,
            eigenvectors,
        }
    }

    pub fn size(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.eigenvectors
    }

    /// `max |⟨v_m|v_m'⟩ - δ_mm'|`.
    pub fn orthonormality_error(&self) -> f64 {
        let gram = self.eigenvectors.transpose() * &self.eigenvectors;
        let n = self.size();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((gram[(i, j)] - target).abs());
            }
        }
        worst
    }

    /// `‖H - V Λ Vᵀ‖_F / ‖H‖_F`.
    pub fn reconstruction_error(&self, h: &DenseHamiltonian) -> f64 {
        let v = &self.eigenvectors;
        let mut scaled = v.clone();
        for (c, &lambda) in self.eigenvalues.iter().enumerate() {
            scaled.column_mut(c).scale_mut(lambda);
        }
        let rebuilt = scaled * v.transpose();
        (h.to_matrix() - rebuilt).norm() / h.frobenius_norm()
    }

    /// `max_m ‖H v_m - λ_m v_m‖ / ‖H‖_F`.
    pub fn max_residual(&self, h: &DenseHamiltonian) -> f64 {
        let hv = h.to_matrix() * &self.eigenvectors;
        let norm = h.frobenius_norm();
        (0..self.size())
            .map(|m| (hv.column(m) - self.eigenvectors.column(m) * self.eigenvalues[m]).norm() / norm)
            .fold(0.0, f64::max)
    }

    /// Coefficients `c_m = ⟨v_m|ψ⟩`.
    pub fn project(&self, state: &SingleExcitationState) -> Result<Vec<Complex64>> {
        check_len(self.size(), state.len())?;
        let f = state.amplitudes();
        Ok((0..self.size())
            .map(|m| {
                self.eigenvectors
                    .column(m)
                    .iter()
                    .zip(f)
                    .map(|(&v, &a)| a * v)
                    .sum()
            })
            .collect())
    }
}

fn phases(energies: &[f64], t: f64) -> impl Iterator<Item = Complex64> + '_ {
    energies.iter().map(move |&e| Complex64::from_polar(1.0, -e * t))
}

/// `f(t) = Σ_m e^{-i λ_m t} ⟨v_m|f(0)⟩ v_m`.
pub fn evolve_spectral(
    decomp: &SpectralDecomposition,
    state: &SingleExcitationState,
    t: f64,
) -> Result<SingleExcitationState> {
    let coeffs = decomp.project(state)?;
    let n = decomp.size();
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for ((m, c), p) in coeffs.iter().enumerate().zip(phases(&decomp.eigenvalues, t)) {
        let w = c * p;
        for (o, &v) in out.iter_mut().zip(decomp.eigenvectors.column(m).iter()) {
            *o += w * v;
        }
    }
    Ok(SingleExcitationState::from_raw(out))
}

/// Repeated evaluation of one initial state under a fixed decomposition.
///
/// Site traces cost `O(N)` per time point once built, which is what long time
/// scans over a few sites need.
#[derive(Debug, Clone)]
pub struct SpectralPropagator<'a> {
    decomp: &'a SpectralDecomposition,
    coeffs: Vec<Complex64>,
}

impl<'a> SpectralPropagator<'a> {
    pub fn new(decomp: &'a SpectralDecomposition, initial: &SingleExcitationState) -> Result<Self> {
        Ok(Self {
            decomp,
            coeffs: decomp.project(initial)?,
        })
    }

    pub fn state_at(&self, t: f64) -> SingleExcitationState {
        let n = self.decomp.size();
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        for ((m, c), p) in self.coeffs.iter().enumerate().zip(phases(&self.decomp.eigenvalues, t)) {
            let w = c * p;
            for (o, &v) in out.iter_mut().zip(self.decomp.eigenvectors.column(m).iter()) {
                *o += w * v;
            }
        }
        SingleExcitationState::from_raw(out)
    }

    /// `⟨ψ(0)|ψ(t)⟩ = Σ_m |c_m|² e^{-i λ_m t}`.
    pub fn overlap_with_initial(&self, t: f64) -> Complex64 {
        self.coeffs
            .iter()
            .zip(phases(&self.decomp.eigenvalues, t))
            .map(|(c, p)| p * c.norm_sqr())
            .sum()
    }

    pub fn site_trace(&self, site: usize) -> Result<SiteTrace> {
        if site >= self.decomp.size() {
            return Err(Error::SiteOutOfRange {
                index: site,
                sites: self.decomp.size(),
            });
        }
        let weights = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(m, c)| c * self.decomp.eigenvectors[(site, m)])
            .collect();
        Ok(SiteTrace {
            energies: self.decomp.eigenvalues.clone(),
            weights,
        })
    }
}

/// Amplitude of one site as a function of time: `Σ_m w_m e^{-i λ_m t}`.
#[derive(Debug, Clone)]
pub struct SiteTrace {
    energies: Vec<f64>,
    weights: Vec<Complex64>,
}

impl SiteTrace {
    pub fn amplitude(&self, t: f64) -> Complex64 {
        self.weights
            .iter()
            .zip(phases(&self.energies, t))
            .map(|(w, p)| w * p)
            .sum()
    }
}

/// Ring evolution by phase multiplication in momentum space, `O(N log N)`
/// per time point.
#[derive(Debug, Clone)]
pub struct RingPropagator {
    transform: Transform,
    bin_energies: Vec<f64>,
}

impl RingPropagator {
    pub fn new(symbol: &CirculantSymbol) -> Self {
        let n = symbol.sites();
        Self {
            transform: Transform::new(n),
            bin_energies: (0..n).map(|m| symbol.energy_for_bin(m)).collect(),
        }
    }

    pub fn sites(&self) -> usize {
        self.transform.sites()
    }

    pub fn evolve(&self, state: &SingleExcitationState, t: f64) -> Result<SingleExcitationState> {
        check_len(self.sites(), state.len())?;
        let mut bins = self.transform.forward_bins(state.amplitudes());
        for (b, p) in bins.iter_mut().zip(phases(&self.bin_energies, t)) {
            *b *= p;
        }
        Ok(SingleExcitationState::from_raw(self.transform.inverse_bins(bins)))
    }
}

/// `D_n(t) = e^{-i ε_n t} D_n(0)` transformed back to sites.
pub fn evolve_ring_fft(
    symbol: &CirculantSymbol,
    state: &SingleExcitationState,
    t: f64,
) -> Result<SingleExcitationState> {
    RingPropagator::new(symbol).evolve(state, t)
}

/// Evolution under the idealized dispersion `ε_n = (N/2π)|k_n|`.
pub fn evolve_exact_linear(
    sites: usize,
    state: &SingleExcitationState,
    t: f64,
) -> Result<SingleExcitationState> {
    let symbol = CirculantSymbol::exact_linear(sites)?;
    evolve_ring_fft(&symbol, state, t)
}

/// Packet velocity `N / 2π` in sites per unit time.
pub fn packet_velocity(sites: usize) -> f64 {
    sites as f64 / (2.0 * PI)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{build_dense, build_symbol};
    use crate::lattice::{build_couplings, momentum, HoppingSign, Topology, Truncation};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn delta_basics() {
        let d = delta_state(100, 50).unwrap();
        assert_eq!(d.amplitude(50), c(1.0, 0.0));
        assert_eq!(d.norm_sqr(), 1.0);
        assert_eq!(d.amplitudes().iter().filter(|a| a.norm() > 0.0).count(), 1);
        assert!(delta_state(100, 100).is_err());
    }

    #[test]
    fn delta_momentum_is_phase_ramp() {
        let n = 64;
        let d = delta_state(n, 5).unwrap();
        let m = to_momentum(&d);
        for k in -32..32i64 {
            let expected = Complex64::from_polar(1.0 / (n as f64).sqrt(), -momentum(k, n) * 5.0);
            assert!((m.amplitude(k) - expected).norm() < 1e-14);
        }
    }

    #[test]
    fn uniform_state_has_zero_momentum() {
        let n = 16;
        let s = SingleExcitationState::normalized(vec![c(1.0, 0.0); n]).unwrap();
        let m = to_momentum(&s);
        assert!((m.amplitude(0) - c(1.0, 0.0)).norm() < 1e-14);
        for k in (-8..8i64).filter(|&k| k != 0) {
            assert!(m.amplitude(k).norm() < 1e-14);
        }
    }

    #[test]
    fn normalization_is_checked() {
        assert!(SingleExcitationState::new(vec![c(1.0, 0.0), c(1.0, 0.0)]).is_err());
        assert_eq!(
            SingleExcitationState::normalized(vec![c(0.0, 0.0); 4]),
            Err(Error::ZeroVector)
        );
    }

    #[test]
    fn eigenvector_picks_up_global_phase() {
        let t = Topology::open_chain(12).unwrap();
        let p = build_couplings(t, Truncation::Distance(6), HoppingSign::ExactLinear).unwrap();
        let h = build_dense(&p, &t).unwrap();
        let d = SpectralDecomposition::from_dense(&h);
        let v: Vec<Complex64> = d.eigenvectors().column(3).iter().map(|&x| c(x, 0.0)).collect();
        let s = SingleExcitationState::normalized(v).unwrap();
        let out = evolve_spectral(&d, &s, 1.7).unwrap();
        let phase = Complex64::from_polar(1.0, -d.eigenvalues()[3] * 1.7);
        for (a, b) in out.amplitudes().iter().zip(s.amplitudes()) {
            assert!((a - b * phase).norm() < 1e-12);
        }
    }

    #[test]
    fn zero_time_is_identity() {
        let t = Topology::ring(20).unwrap();
        let p = build_couplings(t, Truncation::Full, HoppingSign::ExactLinear).unwrap();
        let d = SpectralDecomposition::from_dense(&build_dense(&p, &t).unwrap());
        let s = build_symbol(&p).unwrap();
        let psi = SingleExcitationState::normalized((0..20).map(|j| c(j as f64, 1.0)).collect()).unwrap();
        assert!(evolve_spectral(&d, &psi, 0.0).unwrap().max_difference(&psi).unwrap() < 1e-13);
        assert!(evolve_ring_fft(&s, &psi, 0.0).unwrap().max_difference(&psi).unwrap() < 1e-14);
        assert!(evolve_exact_linear(20, &psi, 0.0).unwrap().max_difference(&psi).unwrap() < 1e-14);
    }

    #[test]
    fn decomposition_quality() {
        let t = Topology::ring(60).unwrap();
        let p = build_couplings(t, Truncation::Full, HoppingSign::PaperPrinted).unwrap();
        let h = build_dense(&p, &t).unwrap();
        let d = SpectralDecomposition::from_dense(&h);
        assert!(d.orthonormality_error() < 1e-8);
        assert!(d.reconstruction_error(&h) < 1e-7);
        assert!(d.max_residual(&h) < 1e-8);
        assert!(d.eigenvalues().windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn dimension_mismatch() {
        let t = Topology::ring(10).unwrap();
        let p = build_couplings(t, Truncation::Full, HoppingSign::ExactLinear).unwrap();
        let d = SpectralDecomposition::from_dense(&build_dense(&p, &t).unwrap());
        let s = build_symbol(&p).unwrap();
        let wrong = delta_state(12, 0).unwrap();
        assert!(evolve_spectral(&d, &wrong, 1.0).is_err());
        assert!(evolve_ring_fft(&s, &wrong, 1.0).is_err());
    }

    #[test]
    fn exact_linear_half_and_full_period() {
        let n = 100;
        let d = delta_state(n, 30).unwrap();
        let half = evolve_exact_linear(n, &d, PI).unwrap();
        assert!((half.amplitude(80).norm() - 1.0).abs() < 1e-10);
        let full = evolve_exact_linear(n, &d, 2.0 * PI).unwrap();
        assert!((full.inner(&d).unwrap().norm() - 1.0).abs() < 1e-10);
        assert!((full.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn recurrence_on_full_ring() {
        let t = Topology::ring(100).unwrap();
        let p = build_couplings(t, Truncation::Full, HoppingSign::ExactLinear).unwrap();
        let h = build_dense(&p, &t).unwrap();
        let d = SpectralDecomposition::from_dense(&h);
        let psi = delta_state(100, 50).unwrap();
        let out = evolve_spectral(&d, &psi, 2.0 * PI).unwrap();
        assert!(out.inner(&psi).unwrap().norm() >= 0.98);
    }

    #[test]
    fn site_trace_matches_full_state() {
        let t = Topology::open_chain(40).unwrap();
        let p = build_couplings(t, Truncation::Distance(15), HoppingSign::ExactLinear).unwrap();
        let d = SpectralDecomposition::from_dense(&build_dense(&p, &t).unwrap());
        let psi = delta_state(40, 20).unwrap();
        let prop = SpectralPropagator::new(&d, &psi).unwrap();
        let trace = prop.site_trace(7).unwrap();
        for time in [0.0, 0.3, 2.2] {
            let full = prop.state_at(time);
            assert!((trace.amplitude(time) - full.amplitude(7)).norm() < 1e-12);
            assert!((prop.overlap_with_initial(time) - psi.inner(&full).unwrap()).norm() < 1e-12);
        }
        assert!(prop.site_trace(40).is_err());
    }
}
