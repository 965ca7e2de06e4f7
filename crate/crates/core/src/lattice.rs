//! Lattice geometry and synthesis of the 1/r² coupling profile.
//!
//! The profile keeps a uniform on-site term `J_0 = N/4` and hoppings
//! `|t_r| = N / (r² π²)` for odd `r` below the truncation distance. With the
//! [`HoppingSign::ExactLinear`] convention the ring dispersion is a truncated
//! Fourier series of the triangle wave `(N / 2π)|k|` on `k ∈ [-π, π]`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TopologyKind {
    Ring,
    OpenChain,
}

impl fmt::Display for TopologyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TopologyKind::Ring => f.write_str("ring"),
            TopologyKind::OpenChain => f.write_str("chain"),
        }
    }
}

impl FromStr for TopologyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ring" => Ok(TopologyKind::Ring),
            "chain" | "open-chain" | "open" => Ok(TopologyKind::OpenChain),
            other => Err(Error::Parse(format!("unknown topology '{other}'"))),
        }
    }
}

/// Ring or open chain with an even number of sites, `N ≥ 4`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawTopology")]
pub struct Topology {
    kind: TopologyKind,
    sites: usize,
}

#[derive(Deserialize)]
struct RawTopology {
    kind: TopologyKind,
    sites: usize,
}

impl TryFrom<RawTopology> for Topology {
    type Error = Error;

    fn try_from(raw: RawTopology) -> Result<Self> {
        Topology::new(raw.kind, raw.sites)
    }
}

impl Topology {
    pub fn new(kind: TopologyKind, sites: usize) -> Result<Self> {
        if sites % 2 == 1 {
            return Err(Error::OddSites(sites));
        }
        if sites < 4 {
            return Err(Error::TooFewSites(sites));
        }
        Ok(Self { kind, sites })
    }

    pub fn ring(sites: usize) -> Result<Self> {
        Self::new(TopologyKind::Ring, sites)
    }

    pub fn open_chain(sites: usize) -> Result<Self> {
        Self::new(TopologyKind::OpenChain, sites)
    }

    pub fn kind(&self) -> TopologyKind {
        self.kind
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn is_ring(&self) -> bool {
        self.kind == TopologyKind::Ring
    }

    /// Coupling distance between two sites: minimal image on a ring, plain
    /// separation on a chain.
    pub fn distance(&self, i: usize, j: usize) -> usize {
        let d = i.abs_diff(j);
        match self.kind {
            TopologyKind::Ring => d.min(self.sites - d),
            TopologyKind::OpenChain => d,
        }
    }

    /// Signed displacement `to - from`, wrapped into `[-N/2, N/2)` on a ring.
    pub fn offset(&self, from: usize, to: usize) -> i64 {
        let raw = to as i64 - from as i64;
        match self.kind {
            TopologyKind::Ring => wrap_offset(raw, self.sites),
            TopologyKind::OpenChain => raw,
        }
    }

    /// Site reached from `base` after a signed displacement, or `None` when it
    /// falls off the end of an open chain.
    pub fn shifted(&self, base: usize, by: i64) -> Option<usize> {
        let n = self.sites as i64;
        let target = base as i64 + by;
        match self.kind {
            TopologyKind::Ring => Some(target.rem_euclid(n) as usize),
            TopologyKind::OpenChain => (0..n).contains(&target).then_some(target as usize),
        }
    }

    /// Resolved cutoff for [`Truncation::Full`].
    pub fn full_cutoff(&self) -> usize {
        match self.kind {
            TopologyKind::Ring => self.sites / 2,
            TopologyKind::OpenChain => self.sites - 1,
        }
    }

    pub fn check_site(&self, index: usize) -> Result<()> {
        if index < self.sites {
            Ok(())
        } else {
            Err(Error::SiteOutOfRange {
                index,
                sites: self.sites,
            })
        }
    }
}

/// Wrap an integer displacement into `[-N/2, N/2)`.
pub fn wrap_offset(raw: i64, sites: usize) -> i64 {
    let n = sites as i64;
    (raw + n / 2).rem_euclid(n) - n / 2
}

/// Lattice momentum `k_n = 2πn/N`.
pub fn momentum(n: i64, sites: usize) -> f64 {
    2.0 * PI * n as f64 / sites as f64
}

/// Momentum indices `n ∈ [-N/2, N/2 - 1]` in increasing order.
pub fn momentum_indices(sites: usize) -> impl Iterator<Item = i64> {
    let half = (sites / 2) as i64;
    -half..half
}

/// Truncation distance: couplings with `r < r_0` are kept.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Truncation {
    Full,
    Distance(usize),
}

impl fmt::Display for Truncation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Truncation::Full => f.write_str("full"),
            Truncation::Distance(r) => write!(f, "{r}"),
        }
    }
}

impl FromStr for Truncation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("full") {
            return Ok(Truncation::Full);
        }
        s.parse::<usize>()
            .map(Truncation::Distance)
            .map_err(|_| Error::Parse(format!("r0 must be a positive integer or 'full', got '{s}'")))
    }
}

impl Serialize for Truncation {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Truncation::Full => serializer.serialize_str("full"),
            Truncation::Distance(r) => serializer.serialize_u64(*r as u64),
        }
    }
}

impl<'de> Deserialize<'de> for Truncation {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Int(usize),
            Str(String),
        }
        match Repr::deserialize(deserializer)? {
            Repr::Int(r) => Ok(Truncation::Distance(r)),
            Repr::Str(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// Sign carried by every hopping. The two conventions are related by the
/// staggered gauge `f_j -> (-1)^j f_j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HoppingSign {
    /// `t_r = -N/(r²π²)`: the ring dispersion approximates `(N/2π)|k|`.
    #[default]
    ExactLinear,
    /// `t_r = +N/(r²π²)`: the dispersion is the `k -> π - |k|` mirror image.
    PaperPrinted,
}

impl HoppingSign {
    pub fn factor(self) -> f64 {
        match self {
            HoppingSign::ExactLinear => -1.0,
            HoppingSign::PaperPrinted => 1.0,
        }
    }
}

impl fmt::Display for HoppingSign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HoppingSign::ExactLinear => f.write_str("exact-linear"),
            HoppingSign::PaperPrinted => f.write_str("paper-printed"),
        }
    }
}

impl FromStr for HoppingSign {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "exact-linear" | "exact" | "minus" | "-" => Ok(HoppingSign::ExactLinear),
            "paper-printed" | "paper" | "plus" | "+" => Ok(HoppingSign::PaperPrinted),
            other => Err(Error::Parse(format!("unknown hopping sign '{other}'"))),
        }
    }
}

/// Magnitude of the hopping at distance `r` before truncation and sign.
pub fn coupling_magnitude(sites: usize, r: usize) -> f64 {
    sites as f64 / ((r * r) as f64 * PI * PI)
}

/// Synthesized couplings for one system. Immutable once built.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ProfileRecord", into = "ProfileRecord")]
pub struct CouplingProfile {
    topology: Topology,
    truncation: Truncation,
    cutoff: usize,
    sign: HoppingSign,
    diagonal: f64,
    hoppings: Vec<(usize, f64)>,
}

#[derive(Serialize, Deserialize)]
struct ProfileRecord {
    sites: usize,
    topology: TopologyKind,
    truncation: Truncation,
    cutoff: usize,
    sign: HoppingSign,
    diagonal: f64,
    hoppings: Vec<(usize, f64)>,
}

impl From<CouplingProfile> for ProfileRecord {
    fn from(p: CouplingProfile) -> Self {
        ProfileRecord {
            sites: p.topology.sites,
            topology: p.topology.kind,
            truncation: p.truncation,
            cutoff: p.cutoff,
            sign: p.sign,
            diagonal: p.diagonal,
            hoppings: p.hoppings,
        }
    }
}

impl TryFrom<ProfileRecord> for CouplingProfile {
    type Error = Error;

    // A stored profile is re-synthesized from its parameters and must agree
    // with the recorded numbers.
    fn try_from(rec: ProfileRecord) -> Result<Self> {
        let topology = Topology::new(rec.topology, rec.sites)?;
        let profile = build_couplings(topology, rec.truncation, rec.sign)?;
        let same_hoppings = profile.hoppings.len() == rec.hoppings.len()
            && profile
                .hoppings
                .iter()
                .zip(&rec.hoppings)
                .all(|(a, b)| a.0 == b.0 && (a.1 - b.1).abs() <= 1e-12 * a.1.abs().max(1.0));
        if profile.cutoff != rec.cutoff
            || (profile.diagonal - rec.diagonal).abs() > 1e-12 * profile.diagonal
            || !same_hoppings
        {
            return Err(Error::InvalidParameter(
                "stored profile does not match its own parameters".into(),
            ));
        }
        Ok(profile)
    }
}

impl CouplingProfile {
    pub fn topology(&self) -> Topology {
        self.topology
    }

    pub fn sites(&self) -> usize {
        self.topology.sites
    }

    pub fn truncation(&self) -> Truncation {
        self.truncation
    }

    /// Resolved `r_0`; hoppings exist for odd `r < cutoff`.
    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn sign(&self) -> HoppingSign {
        self.sign
    }

    /// Uniform on-site energy `J_0`.
    pub fn diagonal(&self) -> f64 {
        self.diagonal
    }

    /// `(r, t_r)` pairs in increasing `r`.
    pub fn hoppings(&self) -> &[(usize, f64)] {
        &self.hoppings
    }

    /// Hopping at distance `r`, zero when absent.
    pub fn hopping(&self, r: usize) -> f64 {
        if r % 2 == 0 || r >= self.cutoff {
            return 0.0;
        }
        // hoppings[i] holds r = 2i + 1
        self.hoppings.get(r / 2).map_or(0.0, |&(_, t)| t)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("profile serialization cannot fail")
    }
}

pub fn build_couplings(
    topology: Topology,
    truncation: Truncation,
    sign: HoppingSign,
) -> Result<CouplingProfile> {
    let sites = topology.sites();
    let cutoff = match truncation {
        Truncation::Full => topology.full_cutoff(),
        Truncation::Distance(0) => return Err(Error::TruncationTooSmall),
        Truncation::Distance(r) if r > topology.full_cutoff() => {
            return Err(Error::TruncationTooLarge {
                r0: r,
                sites,
                ring: topology.is_ring(),
            })
        }
        Truncation::Distance(r) => r,
    };
    let hoppings = (1..cutoff)
        .step_by(2)
        .map(|r| (r, sign.factor() * coupling_magnitude(sites, r)))
        .collect();
    Ok(CouplingProfile {
        topology,
        truncation,
        cutoff,
        sign,
        diagonal: sites as f64 / 4.0,
        hoppings,
    })
}

/// Ring dispersion `ε_n = J_0 + Σ_r 2 t_r cos(k_n r)`.
pub fn dispersion(profile: &CouplingProfile, topology: &Topology, n: i64) -> Result<f64> {
    if !topology.is_ring() || !profile.topology.is_ring() {
        return Err(Error::RingOnly);
    }
    if topology.sites() != profile.sites() {
        return Err(Error::DimensionMismatch {
            expected: profile.sites(),
            found: topology.sites(),
        });
    }
    let sites = topology.sites();
    let half = (sites / 2) as i64;
    if n < -half || n >= half {
        return Err(Error::MomentumOutOfRange { n, sites });
    }
    Ok(dispersion_unchecked(profile, momentum(n, sites)))
}

pub(crate) fn dispersion_unchecked(profile: &CouplingProfile, k: f64) -> f64 {
    profile
        .hoppings
        .iter()
        .fold(profile.diagonal, |acc, &(r, t)| acc + 2.0 * t * (k * r as f64).cos())
}

/// Target dispersion `(N/2π)|k_n|`, which is simply `|n|`.
pub fn linear_dispersion(n: i64) -> f64 {
    n.unsigned_abs() as f64
}

/// Upper bound on `|ε_n - (N/2π)|k_n||` for a profile truncated at `cutoff`
/// with the exact-linear sign: `Σ_{odd r ≥ cutoff} 4N/(r²π²)`.
pub fn truncation_tail_bound(sites: usize, cutoff: usize) -> f64 {
    let partial: f64 = (1..cutoff).step_by(2).map(|r| 1.0 / (r * r) as f64).sum();
    let tail = (PI * PI / 8.0 - partial).max(0.0);
    4.0 * sites as f64 / (PI * PI) * tail
}

/// Largest residual of the triangle-wave identity
/// `|2ξ| = N/2 - Σ_{odd r ≤ r_max} 4N/(r²π²) cos(rπ·2ξ/N)` over the samples.
pub fn verify_fourier_identity(sites: usize, r_max: usize, samples: &[f64]) -> Result<f64> {
    if r_max % 2 == 0 {
        return Err(Error::InvalidCutoff(r_max));
    }
    let n = sites as f64;
    let mut worst = 0.0f64;
    for &xi in samples {
        let two_xi = 2.0 * xi;
        if !(-n..=n).contains(&two_xi) {
            return Err(Error::SampleOutOfDomain(two_xi));
        }
        let series: f64 = (1..=r_max)
            .step_by(2)
            .map(|r| {
                let r = r as f64;
                4.0 * n / (r * r * PI * PI) * (r * PI * two_xi / n).cos()
            })
            .sum();
        worst = worst.max((two_xi.abs() - (n / 2.0 - series)).abs());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring(n: usize) -> Topology {
        Topology::ring(n).unwrap()
    }

    #[test]
    fn full_profile_n100() {
        let p = build_couplings(ring(100), Truncation::Full, HoppingSign::ExactLinear).unwrap();
        assert_eq!(p.diagonal(), 25.0);
        assert_eq!(p.cutoff(), 50);
        assert!((p.hopping(1) + 100.0 / (PI * PI)).abs() < 1e-14);
        assert_eq!(p.hopping(2), 0.0);
        assert!((p.hopping(3) + 100.0 / (9.0 * PI * PI)).abs() < 1e-14);
        assert_eq!(p.hoppings().last().unwrap().0, 49);
        assert_eq!(p.hopping(1) / p.hopping(3), 9.0);
    }

    #[test]
    fn nearest_neighbour_only_at_r0_2() {
        for sign in [HoppingSign::ExactLinear, HoppingSign::PaperPrinted] {
            let p = build_couplings(ring(100), Truncation::Distance(2), sign).unwrap();
            assert_eq!(p.hoppings().len(), 1);
            assert_eq!(p.hoppings()[0].0, 1);
        }
    }

    #[test]
    fn smallest_ring() {
        let p = build_couplings(ring(4), Truncation::Full, HoppingSign::PaperPrinted).unwrap();
        assert_eq!(p.diagonal(), 1.0);
        assert_eq!(p.hoppings(), &[(1, 4.0 / (PI * PI))]);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert_eq!(Topology::ring(101), Err(Error::OddSites(101)));
        assert_eq!(Topology::ring(2), Err(Error::TooFewSites(2)));
        let t = ring(100);
        assert_eq!(
            build_couplings(t, Truncation::Distance(0), HoppingSign::ExactLinear),
            Err(Error::TruncationTooSmall)
        );
        assert_eq!(
            build_couplings(t, Truncation::Distance(60), HoppingSign::ExactLinear),
            Err(Error::TruncationTooLarge { r0: 60, sites: 100, ring: true })
        );
        assert!(build_couplings(t, Truncation::Distance(50), HoppingSign::ExactLinear).is_ok());
    }

    #[test]
    fn chain_accepts_r0_up_to_n_minus_1() {
        let chain = Topology::open_chain(6).unwrap();
        let p = build_couplings(chain, Truncation::Distance(4), HoppingSign::ExactLinear).unwrap();
        assert_eq!(p.hoppings().len(), 2);
        assert!(build_couplings(chain, Truncation::Distance(5), HoppingSign::ExactLinear).is_ok());
        let err = build_couplings(chain, Truncation::Distance(6), HoppingSign::ExactLinear).unwrap_err();
        assert_eq!(err.to_string(), "r0 exceeds N-1 (r0 = 6, N = 6)");
    }

    #[test]
    fn chain_full_cutoff() {
        let chain = Topology::open_chain(10).unwrap();
        let p = build_couplings(chain, Truncation::Full, HoppingSign::ExactLinear).unwrap();
        assert_eq!(p.cutoff(), 9);
        assert_eq!(p.hoppings().last().unwrap().0, 7);
    }

    #[test]
    fn dispersion_rejects_chain_and_bad_momentum() {
        let chain = Topology::open_chain(10).unwrap();
        let p = build_couplings(chain, Truncation::Full, HoppingSign::ExactLinear).unwrap();
        assert_eq!(dispersion(&p, &chain, 0), Err(Error::RingOnly));
        let t = ring(10);
        let p = build_couplings(t, Truncation::Full, HoppingSign::ExactLinear).unwrap();
        assert!(dispersion(&p, &t, 5).is_err());
        assert!(dispersion(&p, &t, -5).is_ok());
    }

    #[test]
    fn nearest_neighbour_dispersion_closed_form() {
        for n_sites in [8usize, 50, 100] {
            let t = ring(n_sites);
            let p = build_couplings(t, Truncation::Distance(2), HoppingSign::ExactLinear).unwrap();
            let nf = n_sites as f64;
            for n in momentum_indices(n_sites) {
                let k = momentum(n, n_sites);
                let expected = nf / 4.0 - 2.0 * nf / (PI * PI) * k.cos();
                assert!((dispersion(&p, &t, n).unwrap() - expected).abs() < 1e-12);
            }
        }
    }

    // Independent partial sum of Σ_{odd r} 1/r² for the tail bound.
    fn odd_inverse_square_tail(from: usize) -> f64 {
        // Σ_{odd r ≥ from} 1/r²; the neglected remainder is about 2.5e-8.
        let mut s = 0.0;
        let mut r = if from % 2 == 0 { from + 1 } else { from };
        while r < 20_000_000 {
            s += 1.0 / (r as f64 * r as f64);
            r += 2;
        }
        s
    }

    #[test]
    fn dispersion_matches_linear_target_within_tail() {
        let t = ring(100);
        let p = build_couplings(t, Truncation::Full, HoppingSign::ExactLinear).unwrap();
        let bound = 4.0 * 100.0 / (PI * PI) * odd_inverse_square_tail(50);
        assert!((truncation_tail_bound(100, 50) - bound).abs() < 1e-5);
        let e0 = dispersion(&p, &t, 0).unwrap();
        assert!(e0.abs() <= bound, "eps_0 = {e0}, bound = {bound}");
        let e49 = dispersion(&p, &t, 49).unwrap();
        assert!((e49 - 49.0).abs() <= bound);
        for n in momentum_indices(100) {
            let e = dispersion(&p, &t, n).unwrap();
            assert!((e - linear_dispersion(n)).abs() <= bound + 1e-12);
        }
    }

    #[test]
    fn gauge_mirror_relation() {
        let sites = 64;
        let t = ring(sites);
        let minus = build_couplings(t, Truncation::Full, HoppingSign::ExactLinear).unwrap();
        let plus = build_couplings(t, Truncation::Full, HoppingSign::PaperPrinted).unwrap();
        let half = (sites / 2) as i64;
        for n in momentum_indices(sites) {
            // |n'| = N/2 - |n|, both signs of n' agree by evenness
            let mirrored = half - n.abs();
            let mirrored = if mirrored == half { -half } else { mirrored };
            let a = dispersion(&plus, &t, n).unwrap();
            let b = dispersion(&minus, &t, mirrored).unwrap();
            assert!((a - b).abs() < 1e-10, "n = {n}: {a} vs {b}");
        }
    }

    // Pointwise error is not monotone in r0 (single Fourier terms can overshoot);
    // the grid max-norm and RMS errors are, and every point sits under the tail bound.
    #[test]
    fn tail_error_shrinks_with_cutoff() {
        let sites = 200;
        let t = ring(sites);
        let (mut prev_max, mut prev_rms) = (f64::INFINITY, f64::INFINITY);
        for r0 in (3..=100).step_by(2) {
            let p = build_couplings(t, Truncation::Distance(r0), HoppingSign::ExactLinear).unwrap();
            let errs: Vec<f64> = momentum_indices(sites)
                .map(|n| (dispersion(&p, &t, n).unwrap() - linear_dispersion(n)).abs())
                .collect();
            let max = errs.iter().cloned().fold(0.0, f64::max);
            let rms = (errs.iter().map(|e| e * e).sum::<f64>() / errs.len() as f64).sqrt();
            assert!(max <= prev_max + 1e-12, "r0 = {r0}");
            assert!(rms <= prev_rms + 1e-12, "r0 = {r0}");
            assert!(max <= truncation_tail_bound(sites, r0) + 1e-12);
            prev_max = max;
            prev_rms = rms;
        }
    }

    #[test]
    fn fourier_identity_special_points() {
        let n = 100;
        // ξ = N/4: every cosine vanishes
        let r = verify_fourier_identity(n, 99, &[25.0, -25.0]).unwrap();
        assert!(r < 1e-12);
        // ξ = 0: residual equals the neglected tail
        let r0 = verify_fourier_identity(n, 49, &[0.0]).unwrap();
        let tail = 4.0 * 100.0 / (PI * PI) * odd_inverse_square_tail(51);
        assert!((r0 - tail).abs() < 1e-5);
        assert!(verify_fourier_identity(n, 48, &[0.0]).is_err());
        assert!(verify_fourier_identity(n, 49, &[51.0]).is_err());
    }

    #[test]
    fn fourier_identity_residual_decreases() {
        let samples: Vec<f64> = (-50..=50).map(f64::from).collect();
        let r_small = verify_fourier_identity(100, 49, &samples).unwrap();
        let r_big = verify_fourier_identity(100, 199, &samples).unwrap();
        assert!(r_big < r_small);
        // max-norm residual is reached at ξ = 0 and scales like 2N/(π² r_max)
        assert!(r_small < 4.0 * 100.0 / (PI * PI) / 49.0);
    }

    #[test]
    fn json_round_trip() {
        let p = build_couplings(ring(100), Truncation::Distance(20), HoppingSign::PaperPrinted).unwrap();
        let json = p.to_json();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["sites"], 100);
        assert_eq!(v["truncation"], 20);
        assert_eq!(v["sign"], "paper-printed");
        assert_eq!(v["diagonal"], 25.0);
        assert_eq!(v["hoppings"][0][0], 1);
        let back: CouplingProfile = serde_json::from_str(&json).unwrap();
        assert_eq!(back, p);

        let full = build_couplings(ring(100), Truncation::Full, HoppingSign::ExactLinear).unwrap();
        let v: serde_json::Value = serde_json::from_str(&full.to_json()).unwrap();
        assert_eq!(v["truncation"], "full");
    }

    #[test]
    fn tampered_profile_rejected() {
        let p = build_couplings(ring(8), Truncation::Full, HoppingSign::ExactLinear).unwrap();
        let mut v: serde_json::Value = serde_json::from_str(&p.to_json()).unwrap();
        v["hoppings"][0][1] = serde_json::json!(1.0);
        assert!(serde_json::from_value::<CouplingProfile>(v).is_err());
    }

    #[test]
    fn topology_offsets() {
        let t = ring(10);
        assert_eq!(t.offset(1, 9), -2);
        assert_eq!(t.offset(9, 1), 2);
        assert_eq!(t.offset(0, 5), -5);
        assert_eq!(t.distance(0, 7), 3);
        assert_eq!(t.shifted(8, 4), Some(2));
        let c = Topology::open_chain(10).unwrap();
        assert_eq!(c.distance(0, 7), 7);
        assert_eq!(c.shifted(8, 4), None);
    }
}
