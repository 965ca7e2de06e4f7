//! Named reference runs. Each takes a parameter record whose `Default`
//! is the reference configuration.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::spec::TimeGrid;
use super::{worker_pool, Check, ExperimentReport};
use crate::analytic::{gaussian_state, split_branch, PacketBranch};
use crate::error::{Error, Result};
use crate::hamiltonian::{build_dense, build_symbol, CirculantSymbol};
use crate::lattice::{build_couplings, CouplingProfile, HoppingSign, Topology, Truncation};
use crate::observables::{
    half_ring_weights, pair_concurrences, refined_maximum, rms_width, TimeWindow,
};
use crate::propagator::{delta_state, RingPropagator, SingleExcitationState, SpectralDecomposition, SpectralPropagator};
use crate::series::ObservableSeries;

const GRID_POINTS_PER_PERIOD: usize = 400;

fn probability_rows(table: &mut ObservableSeries, t: f64, state: &SingleExcitationState) {
    for (site, p) in state.probabilities().into_iter().enumerate() {
        table.push(vec![t.into(), p.into(), site.into()]);
    }
}

fn ring_heatmap(
    profile: &CouplingProfile,
    initial: &SingleExcitationState,
    grid: &TimeGrid,
    workers: usize,
) -> Result<Vec<SingleExcitationState>> {
    let ring = RingPropagator::new(&build_symbol(profile)?);
    let pool = worker_pool(workers)?;
    pool.install(|| grid.times().par_iter().map(|&t| ring.evolve(initial, t)).collect())
}

/// Least-squares slope of `y` against `x`.
fn fit_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (sx, sy) = points.iter().fold((0.0, 0.0), |(a, b), &(x, y)| (a + x, b + y));
    let (mx, my) = (sx / n, sy / n);
    let (num, den) = points.iter().fold((0.0, 0.0), |(a, b), &(x, y)| {
        (a + (x - mx) * (y - my), b + (x - mx) * (x - mx))
    });
    num / den
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaHeatmapParams {
    pub sites: usize,
    pub truncation: Truncation,
    pub sign: HoppingSign,
    pub origin: usize,
    pub points_per_period: usize,
    /// Ridge slopes are fitted over `[fit_start, fit_stop]` in units of π.
    pub fit_start: f64,
    pub fit_stop: f64,
}

impl Default for DeltaHeatmapParams {
    fn default() -> Self {
        Self {
            sites: 100,
            truncation: Truncation::Full,
            sign: HoppingSign::ExactLinear,
            origin: 50,
            points_per_period: GRID_POINTS_PER_PERIOD,
            fit_start: 0.2,
            fit_stop: 0.8,
        }
    }
}

/// `|f_j(t)|²` of a delta pulse over one period, with ridge-slope and
/// recurrence checks.
pub fn run_delta_heatmap(params: &DeltaHeatmapParams, workers: usize) -> Result<ExperimentReport> {
    let topology = Topology::ring(params.sites)?;
    topology.check_site(params.origin)?;
    let profile = build_couplings(topology, params.truncation, params.sign)?;
    let initial = delta_state(params.sites, params.origin)?;
    let grid = TimeGrid::per_period(0.0, 2.0 * PI, params.points_per_period)?;
    let states = ring_heatmap(&profile, &initial, &grid, workers)?;

    let mut data = ObservableSeries::new("probability", &["t", "probability", "site"]);
    for (i, s) in states.iter().enumerate() {
        probability_rows(&mut data, grid.time(i), s);
    }

    let half = (params.sites / 2) as i64;
    let (mut right, mut left) = (Vec::new(), Vec::new());
    for (i, s) in states.iter().enumerate() {
        let t = grid.time(i);
        if t < params.fit_start * PI - 1e-12 || t > params.fit_stop * PI + 1e-12 {
            continue;
        }
        let argmax = |offsets: &mut dyn Iterator<Item = i64>| {
            offsets
                .max_by(|&a, &b| {
                    let pa = s.amplitude(topology.shifted(params.origin, a).unwrap()).norm_sqr();
                    let pb = s.amplitude(topology.shifted(params.origin, b).unwrap()).norm_sqr();
                    pa.total_cmp(&pb)
                })
                .unwrap()
        };
        right.push((t, argmax(&mut (1..half)) as f64));
        left.push((t, argmax(&mut (-half + 1..0)) as f64));
    }
    let velocity = params.sites as f64 / (2.0 * PI);
    let first = &states[0];
    let t0_residual = first.max_difference(&initial)?;
    let last = states.last().expect("grid is never empty");

    let checks = vec![
        Check::at_most("t=0 column is the delta", t0_residual, 1e-12),
        Check::within("right ridge slope", fit_slope(&right), velocity, 0.02 * velocity),
        Check::within("left ridge slope", fit_slope(&left), -velocity, 0.02 * velocity),
        Check::at_least("P(N_A, 2pi)", last.amplitude(params.origin).norm_sqr(), 0.98),
    ];
    Ok(ExperimentReport {
        name: "delta-heatmap".into(),
        spec: serde_json::to_value(params)?,
        profiles: vec![profile],
        data,
        extra: Vec::new(),
        checks,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianHeatmapParams {
    pub sites: usize,
    pub alpha: f64,
    pub truncation: Truncation,
    pub sign: HoppingSign,
    pub center: usize,
    pub points_per_period: usize,
}

impl Default for GaussianHeatmapParams {
    fn default() -> Self {
        Self {
            sites: 100,
            alpha: 0.1,
            truncation: Truncation::Full,
            sign: HoppingSign::ExactLinear,
            center: 50,
            points_per_period: GRID_POINTS_PER_PERIOD,
        }
    }
}

/// Per-branch width and weight of a split Gaussian.
///
/// Widths are taken from the momentum-sign projection of each branch, since
/// the real-space halves overlap heavily at this packet size. Weights are the
/// real-space half-ring sums.
pub fn run_gaussian_heatmap(params: &GaussianHeatmapParams, workers: usize) -> Result<ExperimentReport> {
    let topology = Topology::ring(params.sites)?;
    let profile = build_couplings(topology, params.truncation, params.sign)?;
    let initial = gaussian_state(&topology, params.center, params.alpha)?;
    // one transit is half a ring, i.e. half a period
    let grid = TimeGrid::per_period(0.0, 2.0 * PI, params.points_per_period)?;
    let states = ring_heatmap(&profile, &initial, &grid, workers)?;

    let mut data = ObservableSeries::new("probability", &["t", "probability", "site"]);
    let mut widths = ObservableSeries::new(
        "branch-width",
        &["t", "width_plus", "width_minus", "weight_plus", "weight_minus"],
    );
    let branch_width = |s: &SingleExcitationState, b: PacketBranch| -> Result<f64> {
        let p: Vec<f64> = split_branch(s, b).iter().map(|a| a.norm_sqr()).collect();
        Ok(rms_width(&p, &topology)?.1)
    };
    let w0 = (branch_width(&states[0], PacketBranch::Plus)?, branch_width(&states[0], PacketBranch::Minus)?);
    let (mut drift, mut weight_dev) = (0.0f64, 0.0f64);
    for (i, s) in states.iter().enumerate() {
        let t = grid.time(i);
        probability_rows(&mut data, t, s);
        let wp = branch_width(s, PacketBranch::Plus)?;
        let wm = branch_width(s, PacketBranch::Minus)?;
        let (plus, minus) = half_ring_weights(s, &topology, params.center)?;
        widths.push(vec![t.into(), wp.into(), wm.into(), plus.into(), minus.into()]);
        if t >= PI / 3.0 - 1e-12 && t <= 2.0 * PI / 3.0 + 1e-12 {
            drift = drift.max((wp / w0.0 - 1.0).abs()).max((wm / w0.1 - 1.0).abs());
            weight_dev = weight_dev.max((plus - 0.5).abs()).max((minus - 0.5).abs());
        }
    }
    let t0_residual = states[0].max_difference(&initial)?;
    let checks = vec![
        Check::at_most("t=0 profile is the Gaussian", t0_residual, 1e-12),
        Check::at_most("branch width drift (middle third)", drift, 0.10),
        Check::at_most("branch weight deviation from 0.5", weight_dev, 0.02),
    ];
    Ok(ExperimentReport {
        name: "gaussian-heatmap".into(),
        spec: serde_json::to_value(params)?,
        profiles: vec![profile],
        data,
        extra: vec![("widths".into(), widths)],
        checks,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruncationScanParams {
    pub sizes: Vec<usize>,
    pub truncations: Vec<usize>,
    pub sign: HoppingSign,
    pub window: TimeWindow,
    /// Scan step; `None` means `2π / (10 N)` per size.
    pub dt: Option<f64>,
}

impl Default for TruncationScanParams {
    fn default() -> Self {
        Self {
            sizes: vec![500, 1000],
            truncations: (1..=10).map(|k| 10 * k).collect(),
            sign: HoppingSign::ExactLinear,
            window: TimeWindow::recurrence(),
            dt: None,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct ScanPoint {
    sites: usize,
    r0: usize,
    a_max: f64,
    t_max: f64,
    spectrum_error: f64,
}

fn scan_point(sites: usize, r0: usize, params: &TruncationScanParams) -> Result<(ScanPoint, CouplingProfile)> {
    let topology = Topology::ring(sites)?;
    let profile = build_couplings(topology, Truncation::Distance(r0), params.sign)?;
    let h = build_dense(&profile, &topology)?;
    let decomp = SpectralDecomposition::from_dense(&h);
    let symbol: CirculantSymbol = build_symbol(&profile)?;
    let spectrum_error = decomp
        .eigenvalues()
        .iter()
        .zip(symbol.sorted_energies())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let prop = SpectralPropagator::new(&decomp, &delta_state(sites, sites / 2)?)?;
    let dt = params.dt.unwrap_or_else(|| crate::observables::default_step(sites));
    let peak = refined_maximum(|t| prop.overlap_with_initial(t).norm(), params.window, dt)?;
    Ok((
        ScanPoint {
            sites,
            r0,
            a_max: peak.value,
            t_max: peak.time,
            spectrum_error,
        },
        profile,
    ))
}

/// `max |A(t)|` over the window as a function of `r_0`, one dense eigensolve
/// per `(N, r_0)`.
pub fn run_truncation_scan(params: &TruncationScanParams, workers: usize) -> Result<ExperimentReport> {
    if params.sizes.is_empty() || params.truncations.is_empty() {
        return Err(Error::InvalidParameter("scan needs at least one size and one r0".into()));
    }
    let items: Vec<(usize, usize)> = params
        .sizes
        .iter()
        .flat_map(|&n| params.truncations.iter().map(move |&r| (n, r)))
        .collect();
    let pool = worker_pool(workers)?;
    let results: Vec<(ScanPoint, CouplingProfile)> = pool.install(|| {
        items
            .par_iter()
            .map(|&(n, r)| scan_point(n, r, params))
            .collect::<Result<_>>()
    })?;

    let mut data = ObservableSeries::new("a_max", &["sites", "r0", "a_max", "t_max", "spectrum_error"]);
    for (p, _) in &results {
        data.push(vec![p.sites.into(), p.r0.into(), p.a_max.into(), p.t_max.into(), p.spectrum_error.into()]);
    }
    let lookup = |n: usize, r: usize| {
        results
            .iter()
            .find(|(p, _)| p.sites == n && p.r0 == r)
            .map(|(p, _)| p.a_max)
    };

    let mut checks = Vec::new();
    let mut sorted_r = params.truncations.clone();
    sorted_r.sort_unstable();
    for &n in &params.sizes {
        let curve: Vec<f64> = sorted_r.iter().filter_map(|&r| lookup(n, r)).collect();
        let drop = curve.windows(2).map(|w| w[0] - w[1]).fold(0.0, f64::max);
        checks.push(Check::at_most(format!("A_max monotone in r0, worst drop (N={n})"), drop, 0.01));
        if let Some(a) = lookup(n, 90) {
            checks.push(Check::at_least(format!("A_max(r0=90) (N={n})"), a, 0.99));
        }
        if let Some(a) = lookup(n, 10) {
            checks.push(Check::below(format!("A_max(r0=10) (N={n})"), a, 0.9));
        }
    }
    if params.sizes.len() > 1 {
        let spread = sorted_r
            .iter()
            .map(|&r| {
                let vals: Vec<f64> = params.sizes.iter().filter_map(|&n| lookup(n, r)).collect();
                let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
                hi - lo
            })
            .fold(0.0, f64::max);
        checks.push(Check::at_most("max N-spread of A_max at fixed r0", spread, 0.02));
    }
    let spectrum = results
        .iter()
        .map(|(p, _)| p.spectrum_error / p.sites as f64)
        .fold(0.0, f64::max);
    checks.push(Check::at_most("dense vs symbol spectrum / N", spectrum, 1e-9));

    Ok(ExperimentReport {
        name: "truncation-scan".into(),
        spec: serde_json::to_value(params)?,
        profiles: results.into_iter().map(|(_, p)| p).collect(),
        data,
        extra: Vec::new(),
        checks,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpenChainParams {
    pub sites: usize,
    /// Half the separation of the probed pair.
    pub half_separation: usize,
    /// Launch site; the pair is `launch ± half_separation`.
    pub launch: usize,
    pub truncations: Vec<Truncation>,
    /// The largest entry is the reference the others must stay below.
    pub reference: Truncation,
    pub sign: HoppingSign,
    pub window: TimeWindow,
    pub points_per_period: usize,
}

impl Default for OpenChainParams {
    fn default() -> Self {
        let r = |d| Truncation::Distance(d);
        Self {
            sites: 1000,
            half_separation: 400,
            launch: 500,
            truncations: vec![r(10), r(15), r(20), r(30), r(500)],
            reference: r(500),
            sign: HoppingSign::ExactLinear,
            window: TimeWindow::new(0.0, 3.0 * PI),
            points_per_period: GRID_POINTS_PER_PERIOD,
        }
    }
}

/// Concurrence between the mirror sites of a centrally launched delta on an
/// open chain, per truncation.
pub fn run_open_chain_concurrence(params: &OpenChainParams, workers: usize) -> Result<ExperimentReport> {
    let topology = Topology::open_chain(params.sites)?;
    let (Some(i), Some(j)) = (
        topology.shifted(params.launch, -(params.half_separation as i64)),
        topology.shifted(params.launch, params.half_separation as i64),
    ) else {
        return Err(Error::InvalidParameter("probed pair falls off the chain".into()));
    };
    if !params.truncations.contains(&params.reference) {
        return Err(Error::InvalidParameter("reference truncation is not in the list".into()));
    }
    let initial = delta_state(params.sites, params.launch)?;
    let grid = TimeGrid::per_period(params.window.start, params.window.stop, params.points_per_period)?;
    let pool = worker_pool(workers)?;

    struct Run {
        profile: CouplingProfile,
        series: Vec<(f64, f64, f64)>,
        peak: (f64, f64),
    }
    let runs: Vec<Run> = pool.install(|| {
        params
            .truncations
            .par_iter()
            .map(|&trunc| -> Result<Run> {
                let profile = build_couplings(topology, trunc, params.sign)?;
                let decomp = SpectralDecomposition::from_dense(&build_dense(&profile, &topology)?);
                let prop = SpectralPropagator::new(&decomp, &initial)?;
                let (ti, tj) = (prop.site_trace(i)?, prop.site_trace(j)?);
                let conc = |t: f64| pair_concurrences(ti.amplitude(t), tj.amplitude(t));
                let series = grid
                    .times()
                    .into_iter()
                    .map(|t| {
                        let (c, cs) = conc(t);
                        (t, c, cs)
                    })
                    .collect();
                let peak = refined_maximum(|t| conc(t).0, params.window, grid.step)?;
                Ok(Run {
                    profile,
                    series,
                    peak: (peak.value, peak.time),
                })
            })
            .collect::<Result<_>>()
    })?;

    let mut data = ObservableSeries::new(
        "concurrence",
        &["r0", "t", "concurrence", "concurrence_symmetrized", "i_site", "j_site"],
    );
    let mut peaks = ObservableSeries::new("peak", &["r0", "peak", "t_peak"]);
    for run in &runs {
        let r0 = run.profile.cutoff();
        for &(t, c, cs) in &run.series {
            data.push(vec![r0.into(), t.into(), c.into(), cs.into(), i.into(), j.into()]);
        }
        peaks.push(vec![r0.into(), run.peak.0.into(), run.peak.1.into()]);
    }

    let reference = runs
        .iter()
        .find(|r| r.profile.truncation() == params.reference)
        .expect("reference is in the list");
    let ref_label = reference.profile.cutoff();
    let mut checks = vec![Check::within(
        format!("peak C at r0={ref_label}"),
        reference.peak.0,
        0.5,
        0.03,
    )];
    for run in runs.iter().filter(|r| r.profile.truncation() != params.reference) {
        checks.push(Check::below(
            format!("peak C at r0={} below r0={ref_label}", run.profile.cutoff()),
            run.peak.0,
            reference.peak.0,
        ));
    }
    let c0 = runs
        .iter()
        .filter(|_| params.window.start == 0.0)
        .map(|r| r.series[0].1)
        .fold(0.0, f64::max);
    checks.push(Check::at_most("C(t=0)", c0, 1e-12));

    Ok(ExperimentReport {
        name: "open-chain-concurrence".into(),
        spec: serde_json::to_value(params)?,
        profiles: runs.into_iter().map(|r| r.profile).collect(),
        data,
        extra: vec![("peaks".into(), peaks)],
        checks,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcurrenceTimingParams {
    pub sites: usize,
    pub offsets: Vec<usize>,
    pub center: usize,
    /// Time samples per `2π / N`.
    pub samples_per_hop: usize,
    /// Series end, in hops past `t₁`.
    pub trailing_hops: usize,
}

impl Default for ConcurrenceTimingParams {
    fn default() -> Self {
        Self {
            sites: 1000,
            offsets: vec![100, 250],
            center: 500,
            samples_per_hop: 10,
            trailing_hops: 3,
        }
    }
}

/// `C(N_A - j, N_A + j)` under the exact-linear dispersion around the arrival
/// instants `t₀ = 2πj/N` and `t₁ = 2π(j+1)/N`.
pub fn run_concurrence_timing(params: &ConcurrenceTimingParams, workers: usize) -> Result<ExperimentReport> {
    let topology = Topology::ring(params.sites)?;
    topology.check_site(params.center)?;
    if params.samples_per_hop == 0 {
        return Err(Error::InvalidParameter("samples_per_hop must be positive".into()));
    }
    let ring = RingPropagator::new(&CirculantSymbol::exact_linear(params.sites)?);
    let initial = delta_state(params.sites, params.center)?;
    let hop = 2.0 * PI / params.sites as f64;
    let pool = worker_pool(workers)?;

    let mut data = ObservableSeries::new(
        "concurrence",
        &["j", "t", "concurrence", "concurrence_symmetrized", "i_site", "j_site"],
    );
    let mut peaks = ObservableSeries::new("peak", &["j", "t", "concurrence"]);
    let mut checks = Vec::new();
    for &jj in &params.offsets {
        let (Some(a), Some(b)) = (
            topology.shifted(params.center, -(jj as i64)),
            topology.shifted(params.center, jj as i64),
        ) else {
            unreachable!("ring shifts always land");
        };
        if jj == 0 || jj >= params.sites / 2 {
            return Err(Error::InvalidParameter(format!("offset {jj} must be in 1..N/2")));
        }
        let conc = |t: f64| -> Result<(f64, f64)> {
            let s = ring.evolve(&initial, t)?;
            Ok(pair_concurrences(s.amplitude(a), s.amplitude(b)))
        };
        let count = params.samples_per_hop * (jj + 1 + params.trailing_hops) + 1;
        let series: Vec<(f64, f64, f64)> = pool.install(|| {
            (0..count)
                .into_par_iter()
                .map(|k| {
                    let t = k as f64 * hop / params.samples_per_hop as f64;
                    conc(t).map(|(c, cs)| (t, c, cs))
                })
                .collect::<Result<_>>()
        })?;
        for &(t, c, cs) in &series {
            data.push(vec![jj.into(), t.into(), c.into(), cs.into(), a.into(), b.into()]);
        }
        for w in series.windows(3) {
            if w[1].1 > w[0].1 && w[1].1 >= w[2].1 && w[1].1 > 0.01 {
                peaks.push(vec![jj.into(), w[1].0.into(), w[1].1.into()]);
            }
        }
        let t0 = jj as f64 * hop;
        let t1 = (jj + 1) as f64 * hop;
        checks.push(Check::within(format!("C(j={jj}, t0)"), conc(t0)?.0, 0.5, 0.02));
        checks.push(Check::within(format!("C(j={jj}, t1)"), conc(t1)?.0, 2.0 / (PI * PI), 0.02));
        checks.push(Check::below(format!("C(j={jj}, t0/2)"), conc(t0 / 2.0)?.0, 0.05));
    }

    let profile = build_couplings(topology, Truncation::Full, HoppingSign::ExactLinear)?;
    let mut spec = serde_json::to_value(params)?;
    spec["dynamics"] = serde_json::json!("exact-linear");
    Ok(ExperimentReport {
        name: "concurrence-timing".into(),
        spec,
        profiles: vec![profile],
        data,
        extra: vec![("peaks".into(), peaks)],
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_fit() {
        let pts: Vec<(f64, f64)> = (0..5).map(|i| (i as f64, 3.0 * i as f64 + 1.0)).collect();
        assert!((fit_slope(&pts) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn small_scan_runs() {
        let params = TruncationScanParams {
            sizes: vec![40, 60],
            truncations: vec![5, 11, 19],
            ..Default::default()
        };
        let report = run_truncation_scan(&params, 2).unwrap();
        assert_eq!(report.data.len(), 6);
        assert_eq!(report.profiles.len(), 6);
        let spectrum = report.checks.last().unwrap();
        assert!(spectrum.pass, "{}", spectrum.line());
    }

    #[test]
    fn small_open_chain_runs() {
        let params = OpenChainParams {
            sites: 40,
            half_separation: 10,
            launch: 20,
            truncations: vec![Truncation::Distance(3), Truncation::Distance(20)],
            reference: Truncation::Distance(20),
            points_per_period: 40,
            ..Default::default()
        };
        let report = run_open_chain_concurrence(&params, 1).unwrap();
        assert_eq!(report.extra[0].1.len(), 2);
        assert!(report.checks.last().unwrap().pass);
    }

    #[test]
    fn timing_small_ring() {
        let params = ConcurrenceTimingParams {
            sites: 200,
            offsets: vec![20],
            center: 100,
            ..Default::default()
        };
        let report = run_concurrence_timing(&params, 1).unwrap();
        assert!(report.checks[0].pass, "{}", report.checks[0].line());
        assert!(report.checks[2].pass);
    }
}
