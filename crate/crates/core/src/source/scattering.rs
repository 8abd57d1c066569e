//! Fixed-energy scattering by an instantaneous potential in one dimension.
//!
//! The integral equation `ψ = ψ⁰ + G⁰ V ψ` is discretised by the trapezoid
//! rule on the nodes where the potential is nonzero, so only those nodes enter
//! the dense solve. The outgoing kernel is `(m/ik) e^{ik|x-x'|}`; the `+i0`
//! is carried by a small imaginary energy and removed by extrapolation.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::SpaceGrid;
use crate::error::{Error, Result};

/// Largest number of active nodes in a dense solve.
pub const MAX_ACTIVE_NODES: usize = 4000;
/// Minimum samples per local wavelength.
pub const POINTS_PER_WAVELENGTH: f64 = 16.0;
/// Relative size of the imaginary energy used for the outgoing limit.
pub const ETA_FRACTION: f64 = 1e-6;
/// Condition-number estimate above which a solve is rejected.
pub const MAX_CONDITION: f64 = 1e12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PotentialSpec {
    /// `λ δ(x - position)`.
    Delta {
        strength: f64,
        #[serde(default)]
        position: f64,
    },
    /// `-depth` on an interval of the given width; a negative depth is a barrier.
    SquareWell {
        depth: f64,
        width: f64,
        #[serde(default)]
        center: f64,
    },
    /// `μ ω² x² / 2`.
    Harmonic { mu: f64, omega: f64 },
    /// Linearly interpolated samples, zero outside `[x0, x0 + (n-1) dx]`.
    Samples { x0: f64, dx: f64, values: Vec<f64> },
}

impl PotentialSpec {
    pub fn validate(&self) -> Result<()> {
        let ok = match self {
            Self::Delta { strength, position } => strength.is_finite() && position.is_finite(),
            Self::SquareWell { depth, width, center } => depth.is_finite() && *width > 0.0 && center.is_finite(),
            Self::Harmonic { mu, omega } => *mu > 0.0 && omega.is_finite(),
            Self::Samples { x0, dx, values } => {
                x0.is_finite() && *dx > 0.0 && values.len() >= 2 && values.iter().all(|v| v.is_finite())
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("invalid potential {self:?}")))
        }
    }

    /// Closed interval outside which the potential vanishes.
    pub fn support(&self) -> Option<(f64, f64)> {
        match self {
            Self::Delta { position, .. } => Some((*position, *position)),
            Self::SquareWell { width, center, .. } => Some((center - width / 2.0, center + width / 2.0)),
            Self::Harmonic { .. } => None,
            Self::Samples { x0, dx, values } => Some((*x0, x0 + dx * (values.len() - 1) as f64)),
        }
    }

    /// Limit of the regular part approached from the right (`right = true`) or the left.
    pub fn one_sided(&self, x: f64, right: bool) -> f64 {
        match self {
            Self::Delta { .. } => 0.0,
            Self::SquareWell { depth, width, center } => {
                let (a, b) = (center - width / 2.0, center + width / 2.0);
                let inside = (a < x && x < b) || (x == a && right) || (x == b && !right);
                if inside {
                    -depth
                } else {
                    0.0
                }
            }
            Self::Harmonic { mu, omega } => 0.5 * mu * omega * omega * x * x,
            Self::Samples { x0, dx, values } => {
                let u = (x - x0) / dx;
                let last = (values.len() - 1) as f64;
                if u < 0.0 || u > last || (u == 0.0 && !right) || (u == last && right) {
                    return 0.0;
                }
                let i = (u.floor() as usize).min(values.len() - 2);
                let f = u - i as f64;
                values[i] * (1.0 - f) + values[i + 1] * f
            }
        }
    }

    /// Positions where the regular part may be discontinuous.
    pub fn jumps(&self) -> Vec<f64> {
        match self {
            Self::SquareWell { .. } | Self::Samples { .. } => {
                let (a, b) = self.support().expect("compact support");
                vec![a, b]
            }
            _ => Vec::new(),
        }
    }

    /// Regular part of the potential, averaged across jumps.
    pub fn value(&self, x: f64) -> f64 {
        0.5 * (self.one_sided(x, true) + self.one_sided(x, false))
    }

    /// Trapezoid strengths `s_j = w_j V(x_j)` on the grid; a delta lands on its node.
    pub fn nodal_strengths(&self, grid: &SpaceGrid) -> Result<Vec<f64>> {
        self.validate()?;
        let w = grid.weights();
        let jumps = self.jumps();
        let mut s: Vec<f64> = (0..grid.n)
            .map(|i| {
                let mut x = grid.x(i);
                // Nodes that rounding pushed just off a jump are put back on it.
                if let Some(&j) = jumps.iter().find(|&&j| (j - x).abs() <= 1e-9 * grid.dx) {
                    x = j;
                }
                let v = if i == 0 {
                    self.one_sided(x, true)
                } else if i == grid.n - 1 {
                    self.one_sided(x, false)
                } else {
                    self.value(x)
                };
                w[i] * v
            })
            .collect();
        if let Self::Delta { strength, position } = self {
            let i = grid
                .nearest_index(*position)
                .filter(|&i| (grid.x(i) - position).abs() <= 1e-9 * grid.dx)
                .ok_or_else(|| Error::InvalidArgument(format!("delta at {position} is not on a grid node")))?;
            s[i] += strength;
        }
        Ok(s)
    }

    fn min_value(&self, grid: &SpaceGrid) -> f64 {
        (0..grid.n).map(|i| self.value(grid.x(i))).fold(0.0, f64::min)
    }
}

/// Principal root `k = √(2mE)` for complex energy.
pub fn wavenumber(energy: Complex64, m: f64) -> Complex64 {
    (energy * (2.0 * m)).sqrt()
}

/// Outgoing energy-domain kernel `(m/ik) e^{ik|x|}`.
pub fn energy_kernel(x: f64, energy: Complex64, m: f64) -> Complex64 {
    let k = wavenumber(energy, m);
    m / (Complex64::i() * k) * (Complex64::i() * k * x.abs()).exp()
}

/// Active nodes, their strengths and positions.
struct Discretisation {
    nodes: Vec<usize>,
    x: Vec<f64>,
    s: Vec<f64>,
}

fn discretise(v: &PotentialSpec, energy: f64, m: f64, grid: &SpaceGrid) -> Result<Discretisation> {
    if !(energy.is_finite() && energy > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "scattering energy must be positive, got {energy}"
        )));
    }
    if !(m > 0.0) {
        return Err(Error::InvalidArgument(format!("mass must be positive, got {m}")));
    }
    let (a, b) = v
        .support()
        .ok_or_else(|| Error::Unsupported("scattering needs a potential of compact support".into()))?;
    if a < grid.x0 || b > grid.x_end() {
        return Err(Error::InvalidGrid(format!(
            "grid [{}, {}] does not contain the potential support [{a}, {b}]; asymptotics undefined",
            grid.x0,
            grid.x_end()
        )));
    }
    let k_local = (2.0 * m * (energy - v.min_value(grid))).sqrt();
    let per_wavelength = 2.0 * std::f64::consts::PI / (k_local * grid.dx);
    if per_wavelength < POINTS_PER_WAVELENGTH {
        return Err(Error::Unresolved(format!(
            "{per_wavelength:.1} points per wavelength, at least {POINTS_PER_WAVELENGTH} required"
        )));
    }
    let all = v.nodal_strengths(grid)?;
    let nodes: Vec<usize> = (0..grid.n).filter(|&i| all[i] != 0.0).collect();
    if nodes.len() > MAX_ACTIVE_NODES {
        return Err(Error::TooLarge(format!(
            "{} active nodes exceed {MAX_ACTIVE_NODES}",
            nodes.len()
        )));
    }
    Ok(Discretisation {
        x: nodes.iter().map(|&i| grid.x(i)).collect(),
        s: nodes.iter().map(|&i| all[i]).collect(),
        nodes,
    })
}

fn kernel_matrix(d: &Discretisation, energy: Complex64, m: f64) -> DMatrix<Complex64> {
    let n = d.x.len();
    DMatrix::from_fn(n, n, |i, j| energy_kernel(d.x[i] - d.x[j], energy, m))
}

fn one_norm(a: &DMatrix<Complex64>) -> f64 {
    a.column_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `(I - G S)^{-1}` with a conditioning check.
fn resolvent(d: &Discretisation, energy: Complex64, m: f64) -> Result<DMatrix<Complex64>> {
    let n = d.x.len();
    let g = kernel_matrix(d, energy, m);
    let mut a = DMatrix::<Complex64>::identity(n, n);
    for i in 0..n {
        for j in 0..n {
            a[(i, j)] -= g[(i, j)] * d.s[j];
        }
    }
    let norm = one_norm(&a);
    let inv = a
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Singular(format!("Lippmann-Schwinger matrix is singular at E = {energy}")))?;
    let cond = norm * one_norm(&inv);
    if !(cond.is_finite() && cond < MAX_CONDITION) {
        return Err(Error::Singular(format!(
            "Lippmann-Schwinger matrix condition estimate {cond:.3e} at E = {energy}"
        )));
    }
    Ok(inv)
}

fn t_matrix_at(d: &Discretisation, energy: Complex64, m: f64) -> Result<DMatrix<Complex64>> {
    let mut t = resolvent(d, energy, m)?;
    // T = S (I - G S)^{-1} = (I - S G)^{-1} S.
    for j in 0..d.s.len() {
        for i in 0..d.s.len() {
            t[(i, j)] *= d.s[i];
        }
    }
    Ok(t)
}

/// T-matrix on the active nodes of a grid.
#[derive(Clone, Debug)]
pub struct TMatrix {
    pub energy: f64,
    pub k: f64,
    /// Grid indices of the rows and columns.
    pub nodes: Vec<usize>,
    pub positions: Vec<f64>,
    /// Discrete operator `T` with the quadrature weights folded in.
    pub matrix: DMatrix<Complex64>,
}

fn eta(energy: f64) -> f64 {
    ETA_FRACTION * energy
}

/// Solves `T = S + S G⁰ T`, extrapolating the imaginary energy to zero.
pub fn t_matrix(v: &PotentialSpec, energy: f64, m: f64, grid: &SpaceGrid) -> Result<TMatrix> {
    let d = discretise(v, energy, m, grid)?;
    let h = eta(energy);
    let t1 = t_matrix_at(&d, Complex64::new(energy, h), m)?;
    let t2 = t_matrix_at(&d, Complex64::new(energy, h / 2.0), m)?;
    Ok(TMatrix {
        energy,
        k: (2.0 * m * energy).sqrt(),
        positions: d.x.clone(),
        nodes: d.nodes,
        matrix: t2 * Complex64::new(2.0, 0.0) - t1,
    })
}

/// Partial sums of `S + S G S + S G S G S + …` compared with the direct solve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BornReport {
    /// Max-norm distance of each partial sum from the direct solution.
    pub errors: Vec<f64>,
    /// Ratio of successive term norms at the last order.
    pub ratio: f64,
}

pub fn born_series(v: &PotentialSpec, energy: f64, m: f64, grid: &SpaceGrid, orders: usize) -> Result<BornReport> {
    let d = discretise(v, energy, m, grid)?;
    let e = Complex64::new(energy, 0.0);
    let direct = t_matrix_at(&d, e, m)?;
    let g = kernel_matrix(&d, e, m);
    let n = d.s.len();
    let s = DMatrix::from_diagonal(&DVector::from_iterator(n, d.s.iter().map(|&x| Complex64::new(x, 0.0))));
    let sg = &s * &g;
    let max_norm = |a: &DMatrix<Complex64>| a.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut term = s.clone();
    let mut sum = s;
    let mut errors = vec![max_norm(&(&sum - &direct))];
    let mut ratio = 0.0;
    for _ in 0..orders {
        let next = &sg * &term;
        ratio = max_norm(&next) / max_norm(&term).max(f64::MIN_POSITIVE);
        term = next;
        sum += &term;
        errors.push(max_norm(&(&sum - &direct)));
    }
    if !(ratio < 1.0) {
        return Err(Error::Divergent(format!(
            "Born series term ratio {ratio:.3} is not below one"
        )));
    }
    Ok(BornReport { errors, ratio })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Incidence {
    Left,
    Right,
}

/// Solution of the integral equation for a unit plane wave.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScatteringResult {
    pub energy: f64,
    pub k: f64,
    pub mass: f64,
    pub incidence: Incidence,
    pub reflection: Complex64,
    pub transmission: Complex64,
    /// Positions of the active nodes and `s_j ψ_j` there.
    pub positions: Vec<f64>,
    pub sources: Vec<Complex64>,
}

impl ScatteringResult {
    pub fn unitarity_defect(&self) -> f64 {
        self.reflection.norm_sqr() + self.transmission.norm_sqr() - 1.0
    }

    fn incident(&self, x: f64) -> Complex64 {
        let sign = if self.incidence == Incidence::Left { 1.0 } else { -1.0 };
        Complex64::from_polar(1.0, sign * self.k * x)
    }

    /// `ψ(x) = ψ⁰(x) + Σ_j G⁰(x - x_j) s_j ψ_j` at real energy.
    pub fn field_at(&self, x: f64) -> Complex64 {
        let e = Complex64::new(self.energy, 0.0);
        self.incident(x)
            + self
                .positions
                .iter()
                .zip(&self.sources)
                .map(|(&xj, sj)| energy_kernel(x - xj, e, self.mass) * sj)
                .sum::<Complex64>()
    }

    pub fn field_on(&self, grid: &SpaceGrid) -> Vec<Complex64> {
        (0..grid.n).map(|i| self.field_at(grid.x(i))).collect()
    }
}

fn solve_at(
    d: &Discretisation,
    energy: Complex64,
    m: f64,
    inc: Incidence,
) -> Result<(Complex64, Complex64, Vec<Complex64>)> {
    let k = wavenumber(energy, m);
    let i = Complex64::i();
    let sign = if inc == Incidence::Left { 1.0 } else { -1.0 };
    let psi0 = DVector::from_iterator(d.x.len(), d.x.iter().map(|&x| (i * k * x * sign).exp()));
    let psi = resolvent(d, energy, m)? * psi0;
    let src: Vec<Complex64> = psi.iter().zip(&d.s).map(|(p, s)| p * s).collect();
    let amp = m / (i * k);
    // Back-scattered wave leaves on the incident side, forward wave on the far side.
    let back: Complex64 = d.x.iter().zip(&src).map(|(&x, q)| (i * k * x * sign).exp() * q).sum();
    let fwd: Complex64 = d.x.iter().zip(&src).map(|(&x, q)| (-i * k * x * sign).exp() * q).sum();
    Ok((amp * back, Complex64::new(1.0, 0.0) + amp * fwd, src))
}

/// Plane wave `e^{±ikx}` scattered by `v`; `r` and `t` come from the field beyond the support.
pub fn scattered_field(
    v: &PotentialSpec,
    energy: f64,
    m: f64,
    grid: &SpaceGrid,
    incidence: Incidence,
) -> Result<ScatteringResult> {
    let d = discretise(v, energy, m, grid)?;
    let h = eta(energy);
    let (r1, t1, s1) = solve_at(&d, Complex64::new(energy, h), m, incidence)?;
    let (r2, t2, s2) = solve_at(&d, Complex64::new(energy, h / 2.0), m, incidence)?;
    let extrap = |a: Complex64, b: Complex64| b * 2.0 - a;
    Ok(ScatteringResult {
        energy,
        k: (2.0 * m * energy).sqrt(),
        mass: m,
        incidence,
        reflection: extrap(r1, r2),
        transmission: extrap(t1, t2),
        positions: d.x,
        sources: s1.iter().zip(&s2).map(|(a, b)| extrap(*a, *b)).collect(),
    })
}

/// Reflection and transmission extrapolated in the grid spacing.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Coefficients {
    pub reflection: Complex64,
    pub transmission: Complex64,
    /// Difference between the two most refined extrapolants.
    pub error_estimate: f64,
}

/// Romberg extrapolation over `levels` successive halvings of the grid spacing.
pub fn coefficients_extrapolated(
    v: &PotentialSpec,
    energy: f64,
    m: f64,
    grid: &SpaceGrid,
    incidence: Incidence,
    levels: usize,
) -> Result<Coefficients> {
    if levels == 0 {
        return Err(Error::InvalidArgument("at least one level is required".into()));
    }
    let mut table: Vec<Vec<(Complex64, Complex64)>> = Vec::with_capacity(levels);
    for level in 0..levels {
        let g = grid.refined(1 << level);
        let s = scattered_field(v, energy, m, &g, incidence)?;
        let mut row = vec![(s.reflection, s.transmission)];
        for j in 1..=level {
            let f = 4f64.powi(j as i32);
            let (a, b) = row[j - 1];
            let (pa, pb) = table[level - 1][j - 1];
            row.push(((a * f - pa) / (f - 1.0), (b * f - pb) / (f - 1.0)));
        }
        table.push(row);
    }
    let last = table[levels - 1][levels - 1];
    let error_estimate = if levels > 1 {
        let prev = table[levels - 1][levels - 2];
        (last.0 - prev.0).norm().max((last.1 - prev.1).norm())
    } else {
        f64::NAN
    };
    Ok(Coefficients {
        reflection: last.0,
        transmission: last.1,
        error_estimate,
    })
}

/// One row of an energy sweep.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub energy: f64,
    pub k: f64,
    pub reflection: Complex64,
    pub transmission: Complex64,
    pub unitarity_defect: f64,
}

pub fn energy_sweep(v: &PotentialSpec, energies: &[f64], m: f64, grid: &SpaceGrid) -> Result<Vec<SweepRow>> {
    energies
        .iter()
        .map(|&e| {
            let s = scattered_field(v, e, m, grid, Incidence::Left)?;
            Ok(SweepRow {
                energy: e,
                k: s.k,
                reflection: s.reflection,
                transmission: s.transmission,
                unitarity_defect: s.unitarity_defect(),
            })
        })
        .collect()
}

pub fn write_sweep_csv(rows: &[SweepRow], mut out: impl std::io::Write) -> std::io::Result<()> {
    writeln!(out, "E,k,re_r,im_r,re_t,im_t,unitarity_defect")?;
    for r in rows {
        writeln!(
            out,
            "{:e},{:e},{:e},{:e},{:e},{:e},{:e}",
            r.energy, r.k, r.reflection.re, r.reflection.im, r.transmission.re, r.transmission.im, r.unitarity_defect
        )?;
    }
    Ok(())
}
