//! Sampled complex sources on uniform time grids, and the quadratures used on them.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance used when deciding whether a time lies on a grid node.
const ON_GRID_TOL: f64 = 1e-8;

/// Uniform grid `t_start, t_start + dt, ..., t_start + (n-1) dt`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub t_start: f64,
    pub dt: f64,
    pub n: usize,
}

impl TimeGrid {
    pub fn new(t_start: f64, dt: f64, n: usize) -> Result<Self> {
        if !t_start.is_finite() {
            return Err(Error::InvalidGrid(format!("t_start = {t_start}")));
        }
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidGrid(format!("dt must be positive, got {dt}")));
        }
        if n < 2 {
            return Err(Error::InvalidGrid(format!("need at least two nodes, got {n}")));
        }
        Ok(Self { t_start, dt, n })
    }

    /// Grid with `intervals` equal cells covering `[t_start, t_end]` exactly.
    pub fn spanning(t_start: f64, t_end: f64, intervals: usize) -> Result<Self> {
        if !(t_end > t_start) || intervals == 0 {
            return Err(Error::InvalidGrid(format!(
                "cannot span [{t_start}, {t_end}] with {intervals} intervals"
            )));
        }
        Self::new(t_start, (t_end - t_start) / intervals as f64, intervals + 1)
    }

    #[inline]
    pub fn time(&self, i: usize) -> f64 {
        self.t_start + i as f64 * self.dt
    }

    pub fn t_end(&self) -> f64 {
        self.time(self.n - 1)
    }

    pub fn duration(&self) -> f64 {
        (self.n - 1) as f64 * self.dt
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.time(i)).collect()
    }

    /// Index of the node at `t`; fails when `t` is between nodes or outside the grid.
    pub fn index_of(&self, t: f64) -> Result<usize> {
        let x = (t - self.t_start) / self.dt;
        let k = x.round();
        if !x.is_finite() || (x - k).abs() > ON_GRID_TOL * k.abs().max(1.0) {
            return Err(Error::OffGrid { time: t, dt: self.dt });
        }
        if k < 0.0 || k as usize >= self.n {
            return Err(Error::InvalidArgument(format!(
                "time {t} lies outside [{}, {}]",
                self.t_start,
                self.t_end()
            )));
        }
        Ok(k as usize)
    }

    /// Number of whole steps making up the displacement `shift`.
    pub fn steps_in(&self, shift: f64) -> Result<i64> {
        let x = shift / self.dt;
        let k = x.round();
        if !x.is_finite() || (x - k).abs() > ON_GRID_TOL * k.abs().max(1.0) {
            return Err(Error::OffGrid {
                time: shift,
                dt: self.dt,
            });
        }
        Ok(k as i64)
    }

    pub fn nearest_index(&self, t: f64) -> Option<usize> {
        let k = ((t - self.t_start) / self.dt).round();
        (k >= 0.0 && (k as usize) < self.n).then_some(k as usize)
    }

    pub fn weights(&self, rule: Quadrature) -> Vec<f64> {
        quadrature_weights(self.n, self.dt, rule)
    }

    /// Same span, `factor` times more cells.
    pub fn refined(&self, factor: usize) -> Self {
        let factor = factor.max(1);
        Self {
            t_start: self.t_start,
            dt: self.dt / factor as f64,
            n: (self.n - 1) * factor + 1,
        }
    }
}

/// Quadrature rule for sampled integrands.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Quadrature {
    #[default]
    Trapezoid,
    /// Composite Simpson, closing with a 3/8 panel when the interval count is odd.
    Simpson,
}

pub fn quadrature_weights(n: usize, dt: f64, rule: Quadrature) -> Vec<f64> {
    let mut w = vec![0.0; n];
    if n < 2 {
        return w;
    }
    let intervals = n - 1;
    match rule {
        Quadrature::Simpson if intervals >= 2 => {
            let (simpson_intervals, tail) = if intervals % 2 == 0 {
                (intervals, 0)
            } else if intervals >= 3 {
                (intervals - 3, 3)
            } else {
                (0, 0)
            };
            let mut i = 0;
            while i < simpson_intervals {
                w[i] += dt / 3.0;
                w[i + 1] += 4.0 * dt / 3.0;
                w[i + 2] += dt / 3.0;
                i += 2;
            }
            if tail == 3 {
                let s = simpson_intervals;
                let c = 3.0 * dt / 8.0;
                w[s] += c;
                w[s + 1] += 3.0 * c;
                w[s + 2] += 3.0 * c;
                w[s + 3] += c;
            }
        }
        _ => {
            for (i, wi) in w.iter_mut().enumerate() {
                *wi = if i == 0 || i == n - 1 { 0.5 * dt } else { dt };
            }
        }
    }
    w
}

/// Running integral `C_i = ∫_{t_0}^{t_i} f`, with `C_0 = 0`.
///
/// The Simpson setting uses fourth-order local cubic rules so the nested
/// integrals built from it keep fourth-order accuracy.
pub fn cumulative_integral(f: &[Complex64], dt: f64, rule: Quadrature) -> Vec<Complex64> {
    let n = f.len();
    let mut c = vec![Complex64::new(0.0, 0.0); n];
    if n < 2 {
        return c;
    }
    if rule == Quadrature::Simpson && n >= 4 {
        let h = dt / 24.0;
        c[1] = (f[0] * 9.0 + f[1] * 19.0 - f[2] * 5.0 + f[3]) * h;
        for i in 2..n - 1 {
            c[i] = c[i - 1] + (-f[i - 2] + f[i - 1] * 13.0 + f[i] * 13.0 - f[i + 1]) * h;
        }
        let m = n - 1;
        c[m] = c[m - 1] + (f[m - 3] - f[m - 2] * 5.0 + f[m - 1] * 19.0 + f[m] * 9.0) * h;
    } else {
        for i in 1..n {
            c[i] = c[i - 1] + (f[i - 1] + f[i]) * (0.5 * dt);
        }
    }
    c
}

/// A complex source sampled on a [`TimeGrid`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexSignal {
    grid: TimeGrid,
    samples: Vec<Complex64>,
}

impl ComplexSignal {
    pub fn new(grid: TimeGrid, samples: Vec<Complex64>) -> Result<Self> {
        if samples.len() != grid.n {
            return Err(Error::InvalidSignal(format!(
                "{} samples for a grid of {} nodes",
                samples.len(),
                grid.n
            )));
        }
        if let Some(i) = samples.iter().position(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::InvalidSignal(format!("non-finite sample at index {i}")));
        }
        Ok(Self { grid, samples })
    }

    pub fn zeros(grid: TimeGrid) -> Self {
        Self {
            grid,
            samples: vec![Complex64::new(0.0, 0.0); grid.n],
        }
    }

    pub fn from_fn(grid: TimeGrid, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        Self::new(grid, grid.times().into_iter().map(f).collect())
    }

    /// Rectangular pulse of height `amplitude` on `[t_on, t_off]`.
    ///
    /// A jump that falls on an interior node is sampled at its midpoint value;
    /// a jump at either end of the grid takes the inside value.
    pub fn square(grid: TimeGrid, amplitude: Complex64, t_on: f64, t_off: f64) -> Result<Self> {
        if !(t_off > t_on) {
            return Err(Error::InvalidSignal(format!(
                "square pulse needs t_off > t_on, got [{t_on}, {t_off}]"
            )));
        }
        let tol = 1e-9 * grid.dt;
        let last = grid.n - 1;
        let samples = (0..grid.n)
            .map(|i| {
                let t = grid.time(i);
                let at_edge = (t - t_on).abs() <= tol || (t - t_off).abs() <= tol;
                if at_edge {
                    if i == 0 || i == last {
                        amplitude
                    } else {
                        amplitude * 0.5
                    }
                } else if t > t_on && t < t_off {
                    amplitude
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
            .collect();
        Self::new(grid, samples)
    }

    /// `amplitude · exp(-(t-center)²/(2 width²)) · exp(-i carrier (t-center))`.
    pub fn gaussian(grid: TimeGrid, amplitude: Complex64, center: f64, width: f64, carrier: f64) -> Result<Self> {
        if !(width > 0.0) {
            return Err(Error::InvalidSignal(format!(
                "gaussian width must be positive, got {width}"
            )));
        }
        Self::from_fn(grid, |t| {
            let u = t - center;
            amplitude * (-0.5 * u * u / (width * width)).exp() * Complex64::from_polar(1.0, -carrier * u)
        })
    }

    /// A single sample of height `weight / dt` at the node nearest `t0`.
    pub fn impulse(grid: TimeGrid, t0: f64, weight: Complex64) -> Result<Self> {
        let i = grid
            .nearest_index(t0)
            .ok_or_else(|| Error::InvalidSignal(format!("impulse time {t0} outside the grid")))?;
        let mut s = Self::zeros(grid);
        s.samples[i] = weight / grid.dt;
        Ok(s)
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn samples_mut(&mut self) -> &mut [Complex64] {
        &mut self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn conj(&self) -> Self {
        Self {
            grid: self.grid,
            samples: self.samples.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        Self {
            grid: self.grid,
            samples: self.samples.iter().map(|z| z * c).collect(),
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.ensure_same_grid(other)?;
        Ok(Self {
            grid: self.grid,
            samples: self.samples.iter().zip(&other.samples).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn ensure_same_grid(&self, other: &Self) -> Result<()> {
        let (a, b) = (&self.grid, &other.grid);
        let same = a.n == b.n && (a.dt - b.dt).abs() <= 1e-12 * a.dt && (a.t_start - b.t_start).abs() <= 1e-9 * a.dt;
        if same {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    /// Largest modulus at the two grid ends; nonzero means the source was truncated.
    pub fn edge_magnitude(&self) -> f64 {
        self.samples[0].norm().max(self.samples[self.len() - 1].norm())
    }

    /// First and last node with a nonzero sample, if any.
    pub fn support(&self) -> Option<(f64, f64)> {
        let first = self.samples.iter().position(|z| *z != Complex64::new(0.0, 0.0))?;
        let last = self.samples.iter().rposition(|z| *z != Complex64::new(0.0, 0.0))?;
        Some((self.grid.time(first), self.grid.time(last)))
    }

    /// Interpolated value at an arbitrary time inside the grid.
    pub fn value_at(&self, t: f64) -> Result<Complex64> {
        let x = (t - self.grid.t_start) / self.grid.dt;
        let last = (self.grid.n - 1) as f64;
        if !(x >= -1e-9 && x <= last + 1e-9) {
            return Err(Error::InvalidArgument(format!(
                "time {t} outside [{}, {}]",
                self.grid.t_start,
                self.grid.t_end()
            )));
        }
        let x = x.clamp(0.0, last);
        let i = (x.floor() as usize).min(self.grid.n - 2);
        let f = x - i as f64;
        Ok(self.samples[i] * (1.0 - f) + self.samples[i + 1] * f)
    }

    pub(crate) fn warn_if_truncated(&self, what: &str) {
        let edge = self.edge_magnitude();
        if edge > 0.0 {
            log::warn!("{what}: source does not vanish at the grid ends (|K| = {edge:.3e})");
        }
    }
}

/// Angular frequency of the free oscillator.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OscillatorParams {
    pub omega: f64,
}

impl OscillatorParams {
    pub fn new(omega: f64) -> Result<Self> {
        if !(omega.is_finite() && omega > 0.0) {
            return Err(Error::InvalidArgument(format!("omega must be positive, got {omega}")));
        }
        Ok(Self { omega })
    }
}

/// `γ = ∫ e^{iωt} K(t) dt`, together with the frequency it was taken at.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralAmplitude {
    pub omega: f64,
    pub value: Complex64,
}

impl SpectralAmplitude {
    pub fn norm_sqr(&self) -> f64 {
        self.value.norm_sqr()
    }
}

/// `∫ e^{iωt} K(t) dt` by the trapezoid rule.
pub fn fourier_at_frequency(k: &ComplexSignal, omega: f64) -> SpectralAmplitude {
    fourier_with(k, omega, Quadrature::Trapezoid)
}

pub fn fourier_with(k: &ComplexSignal, omega: f64, rule: Quadrature) -> SpectralAmplitude {
    let g = k.grid();
    let w = g.weights(rule);
    let value = k
        .samples()
        .iter()
        .enumerate()
        .map(|(i, z)| z * Complex64::from_polar(w[i], omega * g.time(i)))
        .sum();
    SpectralAmplitude { omega, value }
}

/// `K(t + T)` on the same grid, zero-filled where the shifted source has no data.
pub fn shift_signal(k: &ComplexSignal, shift: f64) -> Result<ComplexSignal> {
    let m = k.grid().steps_in(shift)?;
    let n = k.len() as i64;
    let samples = (0..n)
        .map(|i| {
            let j = i + m;
            if (0..n).contains(&j) {
                k.samples()[j as usize]
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .collect();
    ComplexSignal::new(*k.grid(), samples)
}

/// Rescale `k` so that its discrete `|γ|²` equals `target`.
pub fn scale_to_gamma_sq(k: &ComplexSignal, omega: f64, target: f64, rule: Quadrature) -> Result<ComplexSignal> {
    if !(target >= 0.0 && target.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "target |γ|² must be non-negative, got {target}"
        )));
    }
    let g2 = fourier_with(k, omega, rule).norm_sqr();
    if g2 == 0.0 {
        return Err(Error::InvalidSignal(
            "source has no weight at the oscillator frequency".into(),
        ));
    }
    Ok(k.scaled(Complex64::new((target / g2).sqrt(), 0.0)))
}
