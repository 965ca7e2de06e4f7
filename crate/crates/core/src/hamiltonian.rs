//! Single-excitation Hamiltonian in dense and circulant-symbol form.

use std::io::Write;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::{dispersion_unchecked, momentum, momentum_indices, CouplingProfile, Topology};

/// Dense real-symmetric matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseHamiltonian {
    size: usize,
    entries: Vec<f64>,
}

impl DenseHamiltonian {
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.size + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.size..(i + 1) * self.size]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.entries
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn to_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.size, self.size, &self.entries)
    }

    /// `H ψ` for a complex amplitude vector.
    pub fn apply(&self, psi: &[Complex64]) -> Result<Vec<Complex64>> {
        if psi.len() != self.size {
            return Err(Error::DimensionMismatch {
                expected: self.size,
                found: psi.len(),
            });
        }
        Ok((0..self.size)
            .map(|i| self.row(i).iter().zip(psi).map(|(&h, &x)| x * h).sum())
            .collect())
    }

    /// One row per line, comma separated, shortest round-trip float format.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for i in 0..self.size {
            let line: Vec<String> = self.row(i).iter().map(|x| format!("{x:e}")).collect();
            writeln!(out, "{}", line.join(","))?;
        }
        Ok(())
    }
}

pub fn build_dense(profile: &CouplingProfile, topology: &Topology) -> Result<DenseHamiltonian> {
    if profile.sites() != topology.sites() {
        return Err(Error::DimensionMismatch {
            expected: profile.sites(),
            found: topology.sites(),
        });
    }
    if profile.topology().kind() != topology.kind() {
        return Err(Error::InvalidParameter(format!(
            "profile built for a {} but Hamiltonian requested for a {}",
            profile.topology().kind(),
            topology.kind()
        )));
    }
    let n = topology.sites();
    let mut entries = vec![0.0; n * n];
    for i in 0..n {
        entries[i * n + i] = profile.diagonal();
        for (r, t) in profile.hoppings().iter().copied() {
            // r < r_0 ≤ N/2 on a ring, so i + r and i - r are distinct sites
            for j in [topology.shifted(i, r as i64), topology.shifted(i, -(r as i64))]
                .into_iter()
                .flatten()
            {
                entries[i * n + j] = t;
            }
        }
    }
    Ok(DenseHamiltonian { size: n, entries })
}

/// Eigenvalues `ε_n` of a circulant ring Hamiltonian, stored for
/// `n = -N/2 ..= N/2 - 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct CirculantSymbol {
    sites: usize,
    energies: Vec<f64>,
}

impl CirculantSymbol {
    /// Idealized dispersion `ε_n = (N/2π)|k_n| = |n|`, bypassing any coupling
    /// profile.
    pub fn exact_linear(sites: usize) -> Result<Self> {
        Topology::ring(sites)?;
        let energies = momentum_indices(sites).map(crate::lattice::linear_dispersion).collect();
        Ok(Self { sites, energies })
    }

    pub fn from_energies(energies: Vec<f64>) -> Result<Self> {
        let sites = energies.len();
        Topology::ring(sites)?;
        Ok(Self { sites, energies })
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    /// Energy at momentum index `n ∈ [-N/2, N/2 - 1]`.
    pub fn energy(&self, n: i64) -> Result<f64> {
        let half = (self.sites / 2) as i64;
        if n < -half || n >= half {
            return Err(Error::MomentumOutOfRange { n, sites: self.sites });
        }
        Ok(self.energies[(n + half) as usize])
    }

    /// Energies in momentum order, `n = -N/2` first.
    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    /// Energy for FFT bin `m ∈ [0, N)`, i.e. `n = m` or `n = m - N`.
    pub(crate) fn energy_for_bin(&self, m: usize) -> f64 {
        let half = self.sites / 2;
        if m < half {
            self.energies[m + half]
        } else {
            self.energies[m - half]
        }
    }

    pub fn sorted_energies(&self) -> Vec<f64> {
        let mut e = self.energies.clone();
        e.sort_by(f64::total_cmp);
        e
    }
}

pub fn build_symbol(profile: &CouplingProfile) -> Result<CirculantSymbol> {
    if !profile.topology().is_ring() {
        return Err(Error::RingOnly);
    }
    let sites = profile.sites();
    let energies = momentum_indices(sites)
        .map(|n| dispersion_unchecked(profile, momentum(n, sites)))
        .collect();
    Ok(CirculantSymbol { sites, energies })
}

/// Dense circulant matrix with the given spectrum,
/// `H_{ij} = (1/N) Σ_n ε_n cos(k_n (i - j))`. Requires `ε_n = ε_{-n}`
/// wherever both exist, which holds for every dispersion built here.
pub fn circulant_from_symbol(symbol: &CirculantSymbol) -> DenseHamiltonian {
    let n = symbol.sites();
    let row: Vec<f64> = (0..n)
        .map(|d| {
            momentum_indices(n)
                .zip(symbol.energies())
                .map(|(m, e)| e * (momentum(m, n) * d as f64).cos())
                .sum::<f64>()
                / n as f64
        })
        .collect();
    let mut entries = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            entries[i * n + j] = row[(i + n - j) % n];
        }
    }
    DenseHamiltonian { size: n, entries }
}
