use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{worker_pool, Check, ExperimentReport};
use crate::analytic::{gaussian_state, symmetric_state, Parity};
use crate::error::{Error, Result};
use crate::hamiltonian::{build_dense, build_symbol, circulant_from_symbol, CirculantSymbol};
use crate::lattice::{build_couplings, CouplingProfile, HoppingSign, Topology, TopologyKind, Truncation};
use crate::observables::{autocorrelation, concurrence_profile, pair_concurrences, ConcurrenceForm};
use crate::propagator::{delta_state, RingPropagator, SingleExcitationState, SpectralDecomposition, SpectralPropagator};
use crate::series::{Cell, ObservableSeries};

/// Fixed seed for choosing cross-check instants. The user-facing seed is
/// recorded but never drives the dynamics.
const CROSSCHECK_SEED: u64 = 0x5eed_c0de;
const CROSSCHECK_TOLERANCE: f64 = 1e-8;
const CROSSCHECK_POINTS: usize = 3;

/// Which single-particle spectrum drives the evolution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Dynamics {
    /// The truncated long-range Hamiltonian.
    #[default]
    Couplings,
    /// `ε_n = |n|` on a ring, independent of the truncation.
    ExactLinear,
}

impl FromStr for Dynamics {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "couplings" | "hamiltonian" => Ok(Dynamics::Couplings),
            "exact-linear" | "linear" => Ok(Dynamics::ExactLinear),
            other => Err(Error::Parse(format!("unknown dynamics '{other}'"))),
        }
    }
}

/// `delta:S`, `gaussian:S:ALPHA`, or `symmetric:C:even|odd:F0,F1,...`
/// (real coefficients, `F1` belongs to the pair `C ± 1`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum InitialState {
    Delta(usize),
    Gaussian { center: usize, alpha: f64 },
    Symmetric { center: usize, parity: Parity, coefficients: Vec<f64> },
}

impl InitialState {
    pub fn build(&self, topology: &Topology) -> Result<SingleExcitationState> {
        match self {
            InitialState::Delta(s) => {
                topology.check_site(*s)?;
                delta_state(topology.sites(), *s)
            }
            InitialState::Gaussian { center, alpha } => gaussian_state(topology, *center, *alpha),
            InitialState::Symmetric {
                center,
                parity,
                coefficients,
            } => {
                let (f0, rest) = coefficients
                    .split_first()
                    .ok_or_else(|| Error::Parse("symmetric state needs at least f0".into()))?;
                let rest: Vec<Complex64> = rest.iter().map(|&x| Complex64::new(x, 0.0)).collect();
                symmetric_state(topology, *center, Complex64::new(*f0, 0.0), &rest, *parity)
            }
        }
    }

    /// Reference site used for profiles and half-ring splits.
    pub fn center(&self) -> usize {
        match self {
            InitialState::Delta(s) => *s,
            InitialState::Gaussian { center, .. } | InitialState::Symmetric { center, .. } => *center,
        }
    }
}

impl fmt::Display for InitialState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InitialState::Delta(s) => write!(f, "delta:{s}"),
            InitialState::Gaussian { center, alpha } => write!(f, "gaussian:{center}:{alpha}"),
            InitialState::Symmetric {
                center,
                parity,
                coefficients,
            } => {
                let p = match parity {
                    Parity::Even => "even",
                    Parity::Odd => "odd",
                };
                let c: Vec<String> = coefficients.iter().map(|x| x.to_string()).collect();
                write!(f, "symmetric:{center}:{p}:{}", c.join(","))
            }
        }
    }
}

fn parse_num<T: FromStr>(field: &str, what: &str) -> Result<T> {
    field
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("bad {what} '{field}'")))
}

impl FromStr for InitialState {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        match parts.as_slice() {
            ["delta", site] => Ok(InitialState::Delta(parse_num(site, "site")?)),
            ["gaussian", site, alpha] => Ok(InitialState::Gaussian {
                center: parse_num(site, "site")?,
                alpha: parse_num(alpha, "alpha")?,
            }),
            ["symmetric", site, parity, coeffs] => {
                let parity = match parity.to_ascii_lowercase().as_str() {
                    "even" | "+" => Parity::Even,
                    "odd" | "-" => Parity::Odd,
                    other => return Err(Error::Parse(format!("bad parity '{other}'"))),
                };
                let coefficients = coeffs
                    .split(',')
                    .map(|c| parse_num(c, "coefficient"))
                    .collect::<Result<Vec<f64>>>()?;
                Ok(InitialState::Symmetric {
                    center: parse_num(site, "site")?,
                    parity,
                    coefficients,
                })
            }
            _ => Err(Error::Parse(format!(
                "initial state '{s}' is not delta:S, gaussian:S:A or symmetric:C:even|odd:F0,F1,..."
            ))),
        }
    }
}

impl TryFrom<String> for InitialState {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<InitialState> for String {
    fn from(s: InitialState) -> String {
        s.to_string()
    }
}

/// Uniform grid `start:stop:step`, both ends included when `stop` lands on
/// the grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct TimeGrid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl TimeGrid {
    pub fn new(start: f64, stop: f64, step: f64) -> Result<Self> {
        if !(step > 0.0) || !step.is_finite() || !start.is_finite() || !stop.is_finite() {
            return Err(Error::InvalidParameter(format!("time step must be positive, got {step}")));
        }
        if stop < start {
            return Err(Error::InvalidParameter(format!("time grid stop {stop} < start {start}")));
        }
        Ok(Self { start, stop, step })
    }

    /// `points` equal steps per `2π` over `[start, stop]`.
    pub fn per_period(start: f64, stop: f64, points: usize) -> Result<Self> {
        Self::new(start, stop, 2.0 * std::f64::consts::PI / points as f64)
    }

    pub fn len(&self) -> usize {
        ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn time(&self, i: usize) -> f64 {
        self.start + i as f64 * self.step
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.time(i)).collect()
    }
}

impl fmt::Display for TimeGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.start, self.stop, self.step)
    }
}

impl FromStr for TimeGrid {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let [a, b, c] = parts.as_slice() else {
            return Err(Error::Parse(format!("time grid '{s}' is not start:stop:step")));
        };
        Self::new(parse_num(a, "start")?, parse_num(b, "stop")?, parse_num(c, "step")?)
    }
}

impl TryFrom<String> for TimeGrid {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<TimeGrid> for String {
    fn from(g: TimeGrid) -> String {
        g.to_string()
    }
}

/// `probability`, `autocorrelation`, `concurrence:I:J`, `profile:C`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Observable {
    Probability,
    Autocorrelation,
    Concurrence(usize, usize),
    Profile(usize),
}

impl Observable {
    fn columns(&self) -> &'static [&'static str] {
        match self {
            Observable::Probability => &["t", "probability", "site"],
            Observable::Autocorrelation => &["t", "autocorrelation"],
            Observable::Concurrence(..) => &["t", "concurrence", "concurrence_symmetrized", "i_site", "j_site"],
            Observable::Profile(_) => &["t", "concurrence", "concurrence_symmetrized", "j", "i_site", "j_site"],
        }
    }

    fn tag(&self) -> String {
        self.to_string().replace(':', "-")
    }

    fn validate(&self, topology: &Topology) -> Result<()> {
        match *self {
            Observable::Concurrence(i, j) => {
                topology.check_site(i)?;
                topology.check_site(j)?;
                if i == j {
                    return Err(Error::SameSite(i));
                }
                Ok(())
            }
            Observable::Profile(c) => topology.check_site(c),
            _ => Ok(()),
        }
    }

    fn rows(
        &self,
        t: f64,
        state: &SingleExcitationState,
        initial: &SingleExcitationState,
        topology: &Topology,
    ) -> Result<Vec<Vec<Cell>>> {
        Ok(match *self {
            Observable::Probability => state
                .probabilities()
                .into_iter()
                .enumerate()
                .map(|(site, p)| vec![t.into(), p.into(), site.into()])
                .collect(),
            Observable::Autocorrelation => vec![vec![t.into(), autocorrelation(initial, state)?.into()]],
            Observable::Concurrence(i, j) => {
                let (c, cs) = pair_concurrences(state.amplitude(i), state.amplitude(j));
                vec![vec![t.into(), c.into(), cs.into(), i.into(), j.into()]]
            }
            Observable::Profile(center) => {
                let std = concurrence_profile(state, topology, center, ConcurrenceForm::Standard)?;
                let sym = concurrence_profile(state, topology, center, ConcurrenceForm::PaperSymmetrized)?;
                std.iter()
                    .zip(&sym)
                    .map(|(a, b)| {
                        vec![
                            t.into(),
                            a.value.into(),
                            b.value.into(),
                            a.j.into(),
                            a.plus_site.into(),
                            a.minus_site.into(),
                        ]
                    })
                    .collect()
            }
        })
    }
}

impl fmt::Display for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Observable::Probability => f.write_str("probability"),
            Observable::Autocorrelation => f.write_str("autocorrelation"),
            Observable::Concurrence(i, j) => write!(f, "concurrence:{i}:{j}"),
            Observable::Profile(c) => write!(f, "profile:{c}"),
        }
    }
}

impl FromStr for Observable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        match parts.as_slice() {
            ["probability"] => Ok(Observable::Probability),
            ["autocorrelation"] => Ok(Observable::Autocorrelation),
            ["concurrence", i, j] => Ok(Observable::Concurrence(parse_num(i, "site")?, parse_num(j, "site")?)),
            ["profile", c] => Ok(Observable::Profile(parse_num(c, "site")?)),
            _ => Err(Error::Parse(format!(
                "observable '{s}' is not probability, autocorrelation, concurrence:I:J or profile:C"
            ))),
        }
    }
}

impl TryFrom<String> for Observable {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Observable> for String {
    fn from(o: Observable) -> String {
        o.to_string()
    }
}

fn default_truncations() -> Vec<Truncation> {
    vec![Truncation::Full]
}

fn default_true() -> bool {
    true
}

/// Complete description of one `simulate` run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub name: String,
    pub topology: TopologyKind,
    pub sites: usize,
    #[serde(default = "default_truncations")]
    pub truncations: Vec<Truncation>,
    #[serde(default)]
    pub sign: HoppingSign,
    #[serde(default)]
    pub dynamics: Dynamics,
    pub initial: InitialState,
    pub times: TimeGrid,
    pub observables: Vec<Observable>,
    /// Recorded for bookkeeping only; the dynamics are deterministic.
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_true")]
    pub crosscheck: bool,
    /// Where artifacts go. Not part of the parameter hash.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

impl ExperimentSpec {
    pub fn topology(&self) -> Result<Topology> {
        Topology::new(self.topology, self.sites)
    }

    /// The JSON that identifies the run: everything except the output path.
    pub fn identity(&self) -> serde_json::Value {
        let mut clean = self.clone();
        clean.output_dir = None;
        serde_json::to_value(clean).expect("spec serialization cannot fail")
    }
}

enum Evolver<'a> {
    Ring(RingPropagator),
    Dense(SpectralPropagator<'a>),
}

impl Evolver<'_> {
    fn state_at(&self, initial: &SingleExcitationState, t: f64) -> Result<SingleExcitationState> {
        match self {
            Evolver::Ring(p) => p.evolve(initial, t),
            Evolver::Dense(p) => Ok(p.state_at(t)),
        }
    }
}

/// FFT path against the dense spectral path at a few grid instants.
fn crosscheck(
    ring: &RingPropagator,
    symbol: &CirculantSymbol,
    initial: &SingleExcitationState,
    times: &[f64],
) -> Result<f64> {
    let decomp = SpectralDecomposition::from_dense(&circulant_from_symbol(symbol));
    let reference = SpectralPropagator::new(&decomp, initial)?;
    let mut rng = ChaCha8Rng::seed_from_u64(CROSSCHECK_SEED);
    let mut worst: f64 = 0.0;
    for _ in 0..CROSSCHECK_POINTS {
        let t = times[rng.random_range(0..times.len())];
        let fast = ring.evolve(initial, t)?;
        worst = worst.max(fast.max_difference(&reference.state_at(t))?);
    }
    Ok(worst)
}

/// Runs a spec. Rings propagate by FFT (optionally cross-checked against a
/// dense eigensolve), chains by dense spectral decomposition. Time points are
/// evaluated on a pool of `workers` threads and reassembled in grid order.
pub fn simulate(spec: &ExperimentSpec, workers: usize) -> Result<ExperimentReport> {
    let topology = spec.topology()?;
    if spec.observables.is_empty() {
        return Err(Error::InvalidParameter("no observables requested".into()));
    }
    if spec.truncations.is_empty() {
        return Err(Error::InvalidParameter("no truncations requested".into()));
    }
    if spec.dynamics == Dynamics::ExactLinear && !topology.is_ring() {
        return Err(Error::RingOnly);
    }
    for o in &spec.observables {
        o.validate(&topology)?;
    }
    let initial = spec.initial.build(&topology)?;
    let times = spec.times.times();
    let pool = worker_pool(workers)?;
    let multi = spec.truncations.len() > 1;

    let mut tables: Vec<ObservableSeries> = spec
        .observables
        .iter()
        .map(|o| {
            let mut cols: Vec<&str> = Vec::new();
            if multi {
                cols.push("r0");
            }
            cols.extend_from_slice(o.columns());
            ObservableSeries::new(o.to_string(), &cols)
        })
        .collect();
    let mut profiles: Vec<CouplingProfile> = Vec::new();
    let mut checks = Vec::new();

    for &truncation in &spec.truncations {
        let profile = build_couplings(topology, truncation, spec.sign)?;
        let decomp;
        let evolver = if topology.is_ring() {
            let symbol = match spec.dynamics {
                Dynamics::Couplings => build_symbol(&profile)?,
                Dynamics::ExactLinear => CirculantSymbol::exact_linear(topology.sites())?,
            };
            let ring = RingPropagator::new(&symbol);
            if spec.crosscheck {
                let worst = crosscheck(&ring, &symbol, &initial, &times)?;
                if !(worst <= CROSSCHECK_TOLERANCE) {
                    return Err(Error::CrossCheck {
                        difference: worst,
                        tolerance: CROSSCHECK_TOLERANCE,
                    });
                }
                checks.push(Check::at_most(
                    format!("fft-vs-spectral(r0={})", profile.cutoff()),
                    worst,
                    CROSSCHECK_TOLERANCE,
                ));
            }
            Evolver::Ring(ring)
        } else {
            decomp = SpectralDecomposition::from_dense(&build_dense(&profile, &topology)?);
            Evolver::Dense(SpectralPropagator::new(&decomp, &initial)?)
        };

        let per_time: Vec<Result<Vec<Vec<Vec<Cell>>>>> = pool.install(|| {
            times
                .par_iter()
                .map(|&t| {
                    let state = evolver.state_at(&initial, t)?;
                    spec.observables
                        .iter()
                        .map(|o| o.rows(t, &state, &initial, &topology))
                        .collect()
                })
                .collect()
        });
        for per_obs in per_time {
            for (table, rows) in tables.iter_mut().zip(per_obs?) {
                for mut row in rows {
                    if multi {
                        row.insert(0, profile.cutoff().into());
                    }
                    table.push(row);
                }
            }
        }
        profiles.push(profile);
    }

    let mut tables = tables.into_iter();
    let data = tables.next().expect("at least one observable");
    let extra = spec
        .observables
        .iter()
        .skip(1)
        .map(Observable::tag)
        .zip(tables)
        .collect();
    Ok(ExperimentReport {
        name: spec.name.clone(),
        spec: spec.identity(),
        profiles,
        data,
        extra,
        checks,
    })
}
