//! Two equal-mass particles bound by an instantaneous potential.
//!
//! The relative Hamiltonian `p²/2μ + V(r)`, `μ = m/2`, is diagonalised on a
//! uniform grid. Each internal state `n` turns the pair into a single
//! composite particle of mass `M = 2m` whose propagator is the free one with
//! the internal energy `E_n` added.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::scattering::PotentialSpec;
use super::{free_propagator, SpaceGrid};
use crate::error::{Error, Result};

/// Largest grid handled by the dense solver.
pub const MAX_DENSE_POINTS: usize = 2500;
/// Largest grid handled by the tridiagonal solver.
pub const MAX_BANDED_POINTS: usize = 2_000_000;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KineticScheme {
    /// Finite differences for point interactions, sinc otherwise.
    #[default]
    Auto,
    /// Sinc discrete-variable representation on the infinite uniform grid.
    Sinc,
    /// Three-point finite differences with hard walls.
    FiniteDifference,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundLevel {
    pub n: usize,
    #[serde(rename = "E_n")]
    pub energy: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundSpectrum {
    pub mass: f64,
    pub reduced_mass: f64,
    pub total_mass: f64,
    pub grid: SpaceGrid,
    pub scheme: KineticScheme,
    /// Ascending eigenvalues.
    pub energies: Vec<f64>,
    /// Eigenfunctions on the grid, normalised to `Σ dx φ² = 1`.
    pub states: Vec<Vec<f64>>,
}

impl BoundSpectrum {
    /// States with `E_n < 0`.
    pub fn bound_levels(&self) -> Vec<BoundLevel> {
        self.energies
            .iter()
            .take_while(|&&e| e < 0.0)
            .enumerate()
            .map(|(n, &energy)| BoundLevel { n, energy })
            .collect()
    }

    pub fn is_complete(&self) -> bool {
        self.states.len() == self.grid.n
    }

    /// Largest entry of `Σ_n φ_n(x) φ_n(x') dx - δ_{xx'}`.
    pub fn completeness_defect(&self) -> Result<f64> {
        if !self.is_complete() {
            return Err(Error::Unsupported("completeness needs every eigenvector".into()));
        }
        let n = self.grid.n;
        let mut u = DMatrix::<f64>::zeros(n, n);
        for (j, s) in self.states.iter().enumerate() {
            for i in 0..n {
                u[(i, j)] = s[i] * self.grid.dx.sqrt();
            }
        }
        let p = &u * u.transpose() - DMatrix::identity(n, n);
        Ok(p.iter().fold(0.0f64, |a, x| a.max(x.abs())))
    }

    /// `G_n(R, t) = G⁰_M(R, t) e^{-iE_n t}`.
    pub fn channel_propagator(&self, n: usize, r: f64, t: f64) -> Result<Complex64> {
        let e = *self
            .energies
            .get(n)
            .ok_or_else(|| Error::InvalidArgument(format!("state {n} not computed")))?;
        Ok(free_propagator(r, t, self.total_mass)? * Complex64::from_polar(1.0, -e * t))
    }

    /// `K_n(R) = 2^{-1/2} Σ_j dx φ_n(r_j) V(r_j) ψ(R + r_j/2) ψ(R - r_j/2)` for a
    /// one-particle field `ψ` radiated by the source at a fixed time.
    pub fn effective_source(
        &self,
        n: usize,
        potential: &PotentialSpec,
        field: impl Fn(f64) -> Complex64,
        center: f64,
    ) -> Result<Complex64> {
        let phi = self
            .states
            .get(n)
            .ok_or_else(|| Error::InvalidArgument(format!("state {n} not computed")))?;
        let s = potential.nodal_strengths(&self.grid)?;
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, (&f, &sj)) in phi.iter().zip(&s).enumerate() {
            if sj != 0.0 {
                let r = self.grid.x(i);
                acc += f * sj * field(center + r / 2.0) * field(center - r / 2.0);
            }
        }
        Ok(acc / std::f64::consts::SQRT_2)
    }
}

fn potential_diagonal(v: &PotentialSpec, grid: &SpaceGrid) -> Result<Vec<f64>> {
    // Strengths divided by the interior weight give the point values, a delta
    // becoming a spike of height λ/dx.
    let s = v.nodal_strengths(grid)?;
    let w = grid.weights();
    Ok(s.iter()
        .zip(&w)
        .enumerate()
        .map(|(i, (si, wi))| {
            if i == 0 || i == grid.n - 1 {
                si / wi
            } else {
                si / grid.dx
            }
        })
        .collect())
}

fn sinc_hamiltonian(diag_v: &[f64], mu: f64, dx: f64) -> DMatrix<f64> {
    let n = diag_v.len();
    let c = 1.0 / (2.0 * mu * dx * dx);
    DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            c * std::f64::consts::PI.powi(2) / 3.0 + diag_v[i]
        } else {
            let d = i as f64 - j as f64;
            let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
            c * sign * 2.0 / (d * d)
        }
    })
}

fn dense_spectrum(h: DMatrix<f64>, dx: f64) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = h.nrows();
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let energies = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let states = order
        .iter()
        .map(|&k| {
            let col = eig.eigenvectors.column(k);
            let sign = fix_sign(col.iter().copied());
            col.iter().map(|x| sign * x / dx.sqrt()).collect()
        })
        .collect();
    (energies, states)
}

/// Makes the first sizeable component positive so results do not depend on the solver.
fn fix_sign(v: impl Iterator<Item = f64> + Clone) -> f64 {
    let big = v.clone().fold(0.0f64, |a, x| a.max(x.abs()));
    match v.into_iter().find(|x| x.abs() > 0.5 * big) {
        Some(x) if x < 0.0 => -1.0,
        _ => 1.0,
    }
}

/// Number of eigenvalues of the symmetric tridiagonal matrix below `x`.
fn sturm_count(d: &[f64], e: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0;
    for i in 0..d.len() {
        let off = if i == 0 { 0.0 } else { e[i - 1] * e[i - 1] / q };
        q = d[i] - x - off;
        if q == 0.0 {
            q = -f64::EPSILON * (d[i].abs() + x.abs()).max(f64::MIN_POSITIVE);
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

fn tridiagonal_eigenvalue(d: &[f64], e: &[f64], k: usize, lo: f64, hi: f64) -> f64 {
    let (mut a, mut b) = (lo, hi);
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        if sturm_count(d, e, mid) > k {
            b = mid;
        } else {
            a = mid;
        }
    }
    0.5 * (a + b)
}

/// Solves `(T - σ) y = b` by the Thomas algorithm.
fn shifted_solve(d: &[f64], e: &[f64], sigma: f64, b: &[f64]) -> Vec<f64> {
    let n = d.len();
    let tiny = f64::EPSILON * d.iter().fold(1.0f64, |a, x| a.max(x.abs()));
    let mut c = vec![0.0; n];
    let mut y = vec![0.0; n];
    let mut piv = d[0] - sigma;
    if piv.abs() < tiny {
        piv = tiny;
    }
    y[0] = b[0] / piv;
    for i in 1..n {
        c[i - 1] = e[i - 1] / piv;
        piv = d[i] - sigma - e[i - 1] * c[i - 1];
        if piv.abs() < tiny {
            piv = tiny;
        }
        y[i] = (b[i] - e[i - 1] * y[i - 1]) / piv;
    }
    for i in (0..n - 1).rev() {
        y[i] -= c[i] * y[i + 1];
    }
    y
}

fn banded_spectrum(diag_v: &[f64], mu: f64, dx: f64, count: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = diag_v.len();
    let c = 1.0 / (2.0 * mu * dx * dx);
    let d: Vec<f64> = diag_v.iter().map(|v| 2.0 * c + v).collect();
    let e = vec![-c; n - 1];
    let lo = d.iter().fold(f64::INFINITY, |a, x| a.min(*x)) - 2.0 * c;
    let hi = d.iter().fold(f64::NEG_INFINITY, |a, x| a.max(*x)) + 2.0 * c;
    let mut energies = Vec::with_capacity(count);
    let mut states: Vec<Vec<f64>> = Vec::with_capacity(count);
    for k in 0..count.min(n) {
        let lam = tridiagonal_eigenvalue(&d, &e, k, lo, hi);
        let sigma = lam + 1e-13 * lam.abs().max(c * 1e-6);
        let mut y: Vec<f64> = (0..n).map(|i| 1.0 + 0.1 * ((i * 7919) % 13) as f64).collect();
        for _ in 0..3 {
            y = shifted_solve(&d, &e, sigma, &y);
            for s in &states {
                let dot: f64 = s.iter().zip(&y).map(|(a, b)| a * b).sum::<f64>() * dx;
                for (yi, si) in y.iter_mut().zip(s) {
                    *yi -= dot * si;
                }
            }
            let norm = (y.iter().map(|x| x * x).sum::<f64>() * dx).sqrt();
            y.iter_mut().for_each(|x| *x /= norm);
        }
        let sign = fix_sign(y.iter().copied());
        y.iter_mut().for_each(|x| *x *= sign);
        energies.push(lam);
        states.push(y);
    }
    (energies, states)
}

/// Eigenpairs of the relative motion for two particles of mass `m`.
///
/// `n_states` limits how many of the lowest states are returned; the dense
/// sinc solver always computes every state and truncates afterwards.
pub fn bound_state_channels(
    v: &PotentialSpec,
    m: f64,
    grid: &SpaceGrid,
    scheme: KineticScheme,
    n_states: Option<usize>,
) -> Result<BoundSpectrum> {
    if !(m.is_finite() && m > 0.0) {
        return Err(Error::InvalidArgument(format!("mass must be positive, got {m}")));
    }
    let mu = m / 2.0;
    let scheme = match scheme {
        KineticScheme::Auto if matches!(v, PotentialSpec::Delta { .. }) => KineticScheme::FiniteDifference,
        KineticScheme::Auto => KineticScheme::Sinc,
        s => s,
    };
    let diag_v = potential_diagonal(v, grid)?;
    let (mut energies, mut states) = match scheme {
        KineticScheme::Sinc => {
            if grid.n > MAX_DENSE_POINTS {
                return Err(Error::TooLarge(format!(
                    "{} points exceed the dense limit {MAX_DENSE_POINTS}",
                    grid.n
                )));
            }
            dense_spectrum(sinc_hamiltonian(&diag_v, mu, grid.dx), grid.dx)
        }
        _ => {
            if grid.n > MAX_BANDED_POINTS {
                return Err(Error::TooLarge(format!("{} points exceed {MAX_BANDED_POINTS}", grid.n)));
            }
            banded_spectrum(&diag_v, mu, grid.dx, n_states.unwrap_or(grid.n).min(grid.n))
        }
    };
    if let Some(k) = n_states {
        energies.truncate(k);
        states.truncate(k);
    }
    Ok(BoundSpectrum {
        mass: m,
        reduced_mass: mu,
        total_mass: 2.0 * m,
        grid: *grid,
        scheme,
        energies,
        states,
    })
}
