//! Two discretisations of the functional integral for the vacuum persistence:
//! a frequency-space route with a finite `iε` and a time lattice with a
//! forward-difference equation of motion.

use std::io::{self, Write};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::{ComplexSignal, Quadrature, TimeGrid};

/// Largest grid for which dense lattice matrices are built.
pub const MAX_DENSE_LATTICE: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrequencyGrid {
    pub nu_min: f64,
    pub nu_max: f64,
    pub n_nu: usize,
    pub epsilon: f64,
}

impl FrequencyGrid {
    pub fn new(nu_min: f64, nu_max: f64, n_nu: usize, epsilon: f64) -> Result<Self> {
        let g = Self {
            nu_min,
            nu_max,
            n_nu,
            epsilon,
        };
        g.validate()?;
        Ok(g)
    }

    /// Symmetric window `ω ± half_width`.
    pub fn around(omega: f64, half_width: f64, n_nu: usize, epsilon: f64) -> Result<Self> {
        Self::new(omega - half_width, omega + half_width, n_nu, epsilon)
    }

    fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        if !(self.nu_max > self.nu_min) || !self.nu_min.is_finite() || !self.nu_max.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "empty frequency window [{}, {}]",
                self.nu_min, self.nu_max
            )));
        }
        if self.n_nu < 3 {
            return Err(Error::InvalidArgument("need at least three frequencies".into()));
        }
        Ok(())
    }

    pub fn d_nu(&self) -> f64 {
        (self.nu_max - self.nu_min) / (self.n_nu - 1) as f64
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralResult {
    /// Richardson combination of the two damped evaluations.
    pub value: Complex64,
    pub value_at_epsilon: Complex64,
    pub value_at_half_epsilon: Complex64,
    /// Bound on the exponent error from spectral weight outside the window.
    pub tail_bound: f64,
}

/// `|K̃(ν)|²` on the window, `K̃(ν) = ∫ e^{iνt} K(t) dt` by the trapezoid rule.
fn spectral_density(k: &ComplexSignal, fg: &FrequencyGrid) -> Vec<f64> {
    let g = k.grid();
    let w = g.weights(Quadrature::Trapezoid);
    let wk: Vec<Complex64> = k.samples().iter().zip(&w).map(|(z, wi)| z * wi).collect();
    let d_nu = fg.d_nu();
    (0..fg.n_nu)
        .map(|m| {
            let nu = fg.nu_min + m as f64 * d_nu;
            let step = Complex64::from_polar(1.0, nu * g.dt);
            let mut phase = Complex64::from_polar(1.0, nu * g.t_start);
            let mut acc = Complex64::new(0.0, 0.0);
            for (i, z) in wk.iter().enumerate() {
                if i % 256 == 0 {
                    phase = Complex64::from_polar(1.0, nu * g.time(i));
                }
                acc += z * phase;
                phase *= step;
            }
            acc.norm_sqr()
        })
        .collect()
}

/// `-i ∫ dν/2π |K̃(ν)|² / (ν - ω + iε)` by the trapezoid rule in `ν`.
fn damped_exponent(density: &[f64], fg: &FrequencyGrid, omega: f64, eps: f64) -> Complex64 {
    let d_nu = fg.d_nu();
    let n = density.len();
    let mut acc = Complex64::new(0.0, 0.0);
    for (m, f) in density.iter().enumerate() {
        let nu = fg.nu_min + m as f64 * d_nu;
        let w = if m == 0 || m == n - 1 { 0.5 } else { 1.0 };
        acc += w * f / Complex64::new(nu - omega, eps);
    }
    -Complex64::i() * acc * (d_nu / (2.0 * std::f64::consts::PI))
}

pub fn spectral_persistence(k: &ComplexSignal, omega: f64, fg: &FrequencyGrid) -> Result<SpectralResult> {
    fg.validate()?;
    if !(omega > fg.nu_min && omega < fg.nu_max) {
        return Err(Error::InvalidArgument(format!(
            "oscillator frequency {omega} lies outside the window [{}, {}]",
            fg.nu_min, fg.nu_max
        )));
    }
    // The damped integrand has a pole at distance ε from the real axis; the
    // trapezoid rule in ν only resolves it when dν is a fraction of ε.
    if fg.d_nu() > 0.25 * fg.epsilon {
        return Err(Error::Unresolved(format!(
            "frequency step {:.3e} does not resolve epsilon/2 = {:.3e}",
            fg.d_nu(),
            0.5 * fg.epsilon
        )));
    }
    let density = spectral_density(k, fg);
    let e1 = damped_exponent(&density, fg, omega, fg.epsilon);
    let e2 = damped_exponent(&density, fg, omega, 0.5 * fg.epsilon);
    let extrapolated = e2 * 2.0 - e1;

    let g = k.grid();
    let w = g.weights(Quadrature::Trapezoid);
    let total: f64 = k.samples().iter().zip(&w).map(|(z, wi)| z.norm_sqr() * wi).sum();
    let d_nu = fg.d_nu();
    let inside: f64 = density
        .iter()
        .enumerate()
        .map(|(m, f)| if m == 0 || m == density.len() - 1 { 0.5 * f } else { *f })
        .sum::<f64>()
        * d_nu
        / (2.0 * std::f64::consts::PI);
    let distance = (omega - fg.nu_min).min(fg.nu_max - omega);
    Ok(SpectralResult {
        value: extrapolated.exp(),
        value_at_epsilon: e1.exp(),
        value_at_half_epsilon: e2.exp(),
        tail_bound: (total - inside).max(0.0) / distance,
    })
}

/// Discrete action operator of the forward-difference equation
/// `i (y_{k+1} - y_k)/dt - ω y_k = K_k` with `y_0 = 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LatticeAction {
    pub grid: TimeGrid,
    pub omega: f64,
}

impl LatticeAction {
    pub fn new(grid: TimeGrid, omega: f64) -> Result<Self> {
        if !(omega.is_finite() && omega > 0.0) {
            return Err(Error::InvalidArgument(format!("omega must be positive, got {omega}")));
        }
        let a = Complex64::new(1.0, -omega * grid.dt);
        if grid.n as f64 * a.norm().ln() > 600.0 {
            return Err(Error::Singular(format!(
                "lattice propagator grows by e^{:.0} over the grid; reduce dt",
                grid.n as f64 * a.norm().ln()
            )));
        }
        Ok(Self { grid, omega })
    }

    fn growth(&self) -> Complex64 {
        Complex64::new(1.0, -self.omega * self.grid.dt)
    }

    /// Forward substitution for `y_1 .. y_{n-1}` (with `y_0 = 0` prepended).
    pub fn solve(&self, k: &[Complex64]) -> Vec<Complex64> {
        let a = self.growth();
        let dt = self.grid.dt;
        let mut y = vec![Complex64::new(0.0, 0.0); k.len()];
        for j in 0..k.len() - 1 {
            y[j + 1] = a * y[j] - Complex64::i() * dt * k[j];
        }
        y
    }

    fn check_dense(&self) -> Result<usize> {
        let m = self.grid.n - 1;
        if m > MAX_DENSE_LATTICE {
            return Err(Error::TooLarge(format!(
                "dense lattice operator of order {m} exceeds {MAX_DENSE_LATTICE}"
            )));
        }
        Ok(m)
    }

    /// Lower-bidiagonal operator acting on `(y_1, ..., y_{n-1})`.
    pub fn operator_matrix(&self) -> Result<DMatrix<Complex64>> {
        let m = self.check_dense()?;
        let dt = self.grid.dt;
        let mut d = DMatrix::from_element(m, m, Complex64::new(0.0, 0.0));
        for r in 0..m {
            d[(r, r)] = Complex64::new(0.0, 1.0 / dt);
            if r > 0 {
                d[(r, r - 1)] = Complex64::new(-self.omega, -1.0 / dt);
            }
        }
        Ok(d)
    }

    /// `G(k, j) = -i (1 - iω dt)^{k-1-j}` for `j < k`, zero otherwise: the
    /// lattice Green's function on the time nodes, strictly lower triangular.
    pub fn green_matrix(&self) -> Result<DMatrix<Complex64>> {
        self.check_dense()?;
        let n = self.grid.n;
        let a = self.growth();
        let mut powers = vec![Complex64::new(1.0, 0.0); n];
        for p in 1..n {
            powers[p] = powers[p - 1] * a;
        }
        Ok(DMatrix::from_fn(n, n, |k, j| {
            if j < k {
                -Complex64::i() * powers[k - 1 - j]
            } else {
                Complex64::new(0.0, 0.0)
            }
        }))
    }
}

/// `exp(-i dt Σ_k K̄_k y_k)` with `y` the lattice response to `K`.
pub fn lattice_persistence(k: &ComplexSignal, omega: f64) -> Result<Complex64> {
    let lat = LatticeAction::new(*k.grid(), omega)?;
    let y = lat.solve(k.samples());
    let s: Complex64 = k.samples().iter().zip(&y).map(|(kk, yy)| kk.conj() * yy).sum();
    let z = (-Complex64::i() * k.grid().dt * s).exp();
    if z.re.is_finite() && z.im.is_finite() {
        Ok(z)
    } else {
        Err(Error::Divergent("lattice persistence overflowed".into()))
    }
}

/// One refinement level of a convergence study.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    /// `dt` for lattice studies, `ε` for spectral ones.
    pub step: f64,
    pub value: Complex64,
    pub abs_err: f64,
}

/// CSV with columns `step,value_re,value_im,abs_err_vs_closed_form`.
pub fn write_convergence_csv<W: Write>(rows: &[ConvergenceRow], mut out: W) -> io::Result<()> {
    writeln!(out, "step,value_re,value_im,abs_err_vs_closed_form")?;
    for r in rows {
        writeln!(out, "{:e},{:e},{:e},{:e}", r.step, r.value.re, r.value.im, r.abs_err)?;
    }
    Ok(())
}

/// Least-squares slope of `log(abs_err)` against `log(step)`.
pub fn observed_order(rows: &[ConvergenceRow]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.abs_err > 0.0 && r.step > 0.0)
        .map(|r| (r.step.ln(), r.abs_err.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Some(sxy / sxx)
}

/// Lattice persistence of a square pulse `amplitude` on `[0, duration]`
/// for a sequence of refinements, against a reference value.
pub fn lattice_convergence(
    amplitude: Complex64,
    duration: f64,
    omega: f64,
    intervals: &[usize],
    reference: Complex64,
) -> Result<Vec<ConvergenceRow>> {
    intervals
        .iter()
        .map(|&m| {
            let g = TimeGrid::spanning(0.0, duration, m)?;
            let k = ComplexSignal::square(g, amplitude, 0.0, duration)?;
            let value = lattice_persistence(&k, omega)?;
            Ok(ConvergenceRow {
                step: g.dt,
                value,
                abs_err: (value - reference).norm(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::amplitudes::vacuum_persistence;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn frequency_grid_validation() {
        assert!(FrequencyGrid::new(0.0, 1.0, 10, 0.0).is_err());
        assert!(FrequencyGrid::new(1.0, 1.0, 10, 0.1).is_err());
        assert!(FrequencyGrid::new(0.0, 1.0, 2, 0.1).is_err());
        let g = TimeGrid::new(0.0, 0.1, 10).unwrap();
        let k = ComplexSignal::zeros(g);
        let coarse = FrequencyGrid::new(-5.0, 5.0, 11, 0.1).unwrap();
        assert!(matches!(
            spectral_persistence(&k, 1.0, &coarse),
            Err(Error::Unresolved(_))
        ));
        let off = FrequencyGrid::new(2.0, 5.0, 1001, 0.1).unwrap();
        assert!(spectral_persistence(&k, 1.0, &off).is_err());
    }

    #[test]
    fn green_matrix_inverts_operator() {
        let g = TimeGrid::new(0.0, 0.1, 8).unwrap();
        let lat = LatticeAction::new(g, 1.5).unwrap();
        let d = lat.operator_matrix().unwrap();
        let gm = lat.green_matrix().unwrap();
        // The operator acts on y_1..y_{n-1} with right-hand side K_0..K_{n-2}:
        // its inverse is dt times the lower-left block of the Green matrix.
        let block = gm.view((1, 0), (7, 7)) * Complex64::new(g.dt, 0.0);
        let prod = &d * block;
        assert!((prod - DMatrix::<Complex64>::identity(7, 7)).norm() < 1e-12);
        for k in 0..8 {
            for j in k..8 {
                assert_eq!(gm[(k, j)], c(0.0, 0.0));
            }
        }
        assert!(d.diagonal().iter().all(|z| z.norm() > 0.0));
    }

    #[test]
    fn dense_and_recursive_agree() {
        let g = TimeGrid::new(0.0, 0.05, 60).unwrap();
        let k = ComplexSignal::gaussian(g, c(0.4, 0.1), 1.5, 0.3, 1.0).unwrap();
        let lat = LatticeAction::new(g, 1.0).unwrap();
        let gm = lat.green_matrix().unwrap();
        let kv = nalgebra::DVector::from_column_slice(k.samples());
        let y = &gm * &kv * Complex64::new(g.dt, 0.0);
        let y2 = lat.solve(k.samples());
        for i in 0..g.n {
            assert!((y[i] - y2[i]).norm() < 1e-13);
        }
    }

    #[test]
    fn lattice_is_first_order() {
        let reference = Complex64::from_polar((-0.5f64).exp(), PI / 4.0);
        let rows = lattice_convergence(c(0.5, 0.0), PI, 1.0, &[1000, 2000, 4000, 8000], reference).unwrap();
        let order = observed_order(&rows).unwrap();
        assert!((order - 1.0).abs() < 0.05, "order {order}");
        let mut buf = Vec::new();
        write_convergence_csv(&rows, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 5);
    }

    #[test]
    fn spectral_route_matches_time_domain() {
        let g = TimeGrid::new(-8.0, 0.01, 1601).unwrap();
        let k = ComplexSignal::gaussian(g, c(0.7, -0.2), 0.0, 0.6, 1.0).unwrap();
        let fg = FrequencyGrid::around(1.0, 20.0, 64001, 0.005).unwrap();
        let r = spectral_persistence(&k, 1.0, &fg).unwrap();
        let t = vacuum_persistence(&k, 1.0).unwrap();
        assert!((r.value - t).norm() < 1e-5, "{} vs {t}", r.value);
        assert!(r.tail_bound < 1e-10);
        assert!((r.value - t).norm() < (r.value_at_epsilon - t).norm());
    }

    #[test]
    fn lattice_guard() {
        let g = TimeGrid::new(0.0, 1.0, 2000).unwrap();
        assert!(matches!(LatticeAction::new(g, 10.0), Err(Error::Singular(_))));
        let big = TimeGrid::new(0.0, 1e-4, 10_000).unwrap();
        assert!(matches!(
            LatticeAction::new(big, 1.0).unwrap().green_matrix(),
            Err(Error::TooLarge(_))
        ));
    }
}
