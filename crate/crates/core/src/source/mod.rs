//! Non-relativistic particles emitted and absorbed by a space-time source in
//! one dimension.
//!
//! A source is decomposed into momentum cells, each of which is an
//! independent oscillator with frequency `E_p = p²/2m`; the oscillator
//! machinery then gives the persistence amplitude, the multi-particle
//! amplitudes and the exchange between causally ordered sources.

pub mod bound;
pub mod scattering;
pub mod transfer;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::greens::{bilinear_raw, retarded_response, Propagator};
use crate::signal::{quadrature_weights, ComplexSignal, Quadrature, TimeGrid};

/// Largest number of space-time samples a source may hold.
pub const MAX_SOURCE_SAMPLES: usize = 20_000_000;
/// Largest `modes × samples` product evaluated by the momentum sums.
pub const MAX_MODE_WORK: f64 = 4e9;

/// Relative magnitude below which a sample counts as outside the support.
pub const SUPPORT_THRESHOLD: f64 = 1e-12;

/// Uniform spatial grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpaceGrid {
    pub x0: f64,
    pub dx: f64,
    pub n: usize,
}

impl SpaceGrid {
    pub fn new(x0: f64, dx: f64, n: usize) -> Result<Self> {
        if !x0.is_finite() || !(dx.is_finite() && dx > 0.0) || n < 2 {
            return Err(Error::InvalidGrid(format!("space grid x0={x0}, dx={dx}, n={n}")));
        }
        Ok(Self { x0, dx, n })
    }

    pub fn spanning(a: f64, b: f64, intervals: usize) -> Result<Self> {
        if !(b > a) || intervals == 0 {
            return Err(Error::InvalidGrid(format!(
                "cannot span [{a}, {b}] with {intervals} intervals"
            )));
        }
        Self::new(a, (b - a) / intervals as f64, intervals + 1)
    }

    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        self.x0 + i as f64 * self.dx
    }

    pub fn x_end(&self) -> f64 {
        self.x(self.n - 1)
    }

    pub fn weights(&self) -> Vec<f64> {
        quadrature_weights(self.n, self.dx, Quadrature::Trapezoid)
    }

    pub fn nearest_index(&self, x: f64) -> Option<usize> {
        let k = ((x - self.x0) / self.dx).round();
        (k >= 0.0 && (k as usize) < self.n).then_some(k as usize)
    }

    pub fn refined(&self, factor: usize) -> Self {
        Self {
            x0: self.x0,
            dx: self.dx / factor as f64,
            n: (self.n - 1) * factor + 1,
        }
    }
}

/// `K(x, t)` sampled on a space-time grid, for particles of mass `mass`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpaceTimeSource {
    pub space: SpaceGrid,
    pub time: TimeGrid,
    pub mass: f64,
    /// Row-major in space: sample `(ix, it)` is at `ix * time.n + it`.
    samples: Vec<Complex64>,
}

impl SpaceTimeSource {
    pub fn new(space: SpaceGrid, time: TimeGrid, mass: f64, samples: Vec<Complex64>) -> Result<Self> {
        if !(mass.is_finite() && mass > 0.0) {
            return Err(Error::InvalidArgument(format!("mass must be positive, got {mass}")));
        }
        let count = space.n.checked_mul(time.n).unwrap_or(usize::MAX);
        if count > MAX_SOURCE_SAMPLES {
            return Err(Error::TooLarge(format!(
                "{count} space-time samples exceed the limit of {MAX_SOURCE_SAMPLES}"
            )));
        }
        if samples.len() != count {
            return Err(Error::InvalidSignal(format!(
                "{} samples for a {count}-point grid",
                samples.len()
            )));
        }
        if samples.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::InvalidSignal("non-finite source sample".into()));
        }
        Ok(Self {
            space,
            time,
            mass,
            samples,
        })
    }

    pub fn from_fn(space: SpaceGrid, time: TimeGrid, mass: f64, f: impl Fn(f64, f64) -> Complex64) -> Result<Self> {
        let count = space.n.checked_mul(time.n).unwrap_or(usize::MAX);
        if count > MAX_SOURCE_SAMPLES {
            return Err(Error::TooLarge(format!(
                "{count} space-time samples exceed the limit of {MAX_SOURCE_SAMPLES}"
            )));
        }
        let mut samples = Vec::with_capacity(count);
        for ix in 0..space.n {
            for it in 0..time.n {
                samples.push(f(space.x(ix), time.time(it)));
            }
        }
        Self::new(space, time, mass, samples)
    }

    /// Gaussian packet centred on `(x_c, t_c)` whose transform peaks at momentum `p0`
    /// on the mass shell.
    #[allow(clippy::too_many_arguments)]
    pub fn gaussian_packet(
        space: SpaceGrid,
        time: TimeGrid,
        mass: f64,
        amplitude: Complex64,
        (x_c, sigma_x): (f64, f64),
        (t_c, sigma_t): (f64, f64),
        p0: f64,
    ) -> Result<Self> {
        if !(sigma_x > 0.0 && sigma_t > 0.0) {
            return Err(Error::InvalidSignal("packet widths must be positive".into()));
        }
        let e0 = p0 * p0 / (2.0 * mass);
        Self::from_fn(space, time, mass, |x, t| {
            let gx = (-(x - x_c).powi(2) / (2.0 * sigma_x * sigma_x)).exp();
            let gt = (-(t - t_c).powi(2) / (2.0 * sigma_t * sigma_t)).exp();
            amplitude * gx * gt * Complex64::from_polar(1.0, p0 * (x - x_c) - e0 * (t - t_c))
        })
    }

    /// One sample of height `1/(w_x w_t)` at the node nearest `(x0, t0)`.
    pub fn point_impulse(space: SpaceGrid, time: TimeGrid, mass: f64, x0: f64, t0: f64) -> Result<Self> {
        let ix = space
            .nearest_index(x0)
            .ok_or_else(|| Error::InvalidArgument(format!("x0 = {x0} outside the grid")))?;
        let it = time
            .nearest_index(t0)
            .ok_or_else(|| Error::InvalidArgument(format!("t0 = {t0} outside the grid")))?;
        let mut s = Self::new(space, time, mass, vec![Complex64::new(0.0, 0.0); space.n * time.n])?;
        let wx = space.weights()[ix];
        let wt = time.weights(Quadrature::Trapezoid)[it];
        s.samples[ix * time.n + it] = Complex64::new(1.0 / (wx * wt), 0.0);
        Ok(s)
    }

    pub fn at(&self, ix: usize, it: usize) -> Complex64 {
        self.samples[ix * self.time.n + it]
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        if self.space != other.space || self.time != other.time || self.mass != other.mass {
            return Err(Error::GridMismatch);
        }
        let samples = self.samples.iter().zip(&other.samples).map(|(a, b)| a + b).collect();
        Self::new(self.space, self.time, self.mass, samples)
    }

    pub fn energy(&self, p: f64) -> f64 {
        p * p / (2.0 * self.mass)
    }

    /// `K_p(t) = ∫ dx e^{-ipx} K(x, t)`.
    pub fn momentum_component(&self, p: f64) -> ComplexSignal {
        let wx = self.space.weights();
        let nt = self.time.n;
        let mut out = vec![Complex64::new(0.0, 0.0); nt];
        for ix in 0..self.space.n {
            let ph = Complex64::from_polar(wx[ix], -p * self.space.x(ix));
            let row = &self.samples[ix * nt..(ix + 1) * nt];
            for (o, z) in out.iter_mut().zip(row) {
                *o += ph * z;
            }
        }
        ComplexSignal::new(self.time, out).expect("finite component")
    }

    /// Time nodes where some sample exceeds `SUPPORT_THRESHOLD` of the peak.
    fn time_support(&self) -> Option<(usize, usize)> {
        let nt = self.time.n;
        let peak = self.samples.iter().fold(0.0f64, |a, z| a.max(z.norm()));
        let mut lo = usize::MAX;
        let mut hi = 0;
        for (i, z) in self.samples.iter().enumerate() {
            if z.norm() > SUPPORT_THRESHOLD * peak {
                let it = i % nt;
                lo = lo.min(it);
                hi = hi.max(it);
            }
        }
        (lo != usize::MAX).then_some((lo, hi))
    }
}

/// `K(p, E) = ∫ dx dt e^{-ipx + iEt} K(x, t)`.
pub fn source_transform_at(k: &SpaceTimeSource, p: f64, energy: f64) -> Complex64 {
    let kp = k.momentum_component(p);
    crate::signal::fourier_with(&kp, energy, Quadrature::Trapezoid).value
}

/// Transform on the mass shell `E = p²/2m`, or the purely spatial transform
/// integrated over time (`E = 0`) when `on_shell` is false.
pub fn source_transform(k: &SpaceTimeSource, p: f64, on_shell: bool) -> Complex64 {
    let e = if on_shell { k.energy(p) } else { 0.0 };
    source_transform_at(k, p, e)
}

/// Retarded free-particle propagator `G(x, t) = -i √(m/(2πit)) e^{imx²/2t}` for `t > 0`.
pub fn free_propagator(x: f64, t: f64, m: f64) -> Result<Complex64> {
    if !(m > 0.0) {
        return Err(Error::InvalidArgument(format!("mass must be positive, got {m}")));
    }
    if t == 0.0 {
        return Err(Error::Divergent("free propagator is singular at t = 0".into()));
    }
    if t < 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let amp = (m / (2.0 * std::f64::consts::PI * t)).sqrt();
    let branch = Complex64::from_polar(1.0, -std::f64::consts::FRAC_PI_4);
    Ok(-Complex64::i() * amp * branch * Complex64::from_polar(1.0, m * x * x / (2.0 * t)))
}

/// `iG(x, t) + [iG(-x, -t)]*`, the free kernel valid for either sign of `t`.
pub fn on_shell_kernel(x: f64, t: f64, m: f64) -> Result<Complex64> {
    let i = Complex64::i();
    Ok(i * free_propagator(x, t, m)? + (i * free_propagator(-x, -t, m)?).conj())
}

/// Momentum cells `p_j` with quadrature weights `w_j` carrying `dp/2π`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentumGrid {
    pub p_min: f64,
    pub p_max: f64,
    pub n_p: usize,
}

impl MomentumGrid {
    pub fn new(p_min: f64, p_max: f64, n_p: usize) -> Result<Self> {
        if !(p_max > p_min) || n_p < 3 || !p_min.is_finite() || !p_max.is_finite() {
            return Err(Error::InvalidGrid(format!(
                "momentum grid [{p_min}, {p_max}] with {n_p} points"
            )));
        }
        Ok(Self { p_min, p_max, n_p })
    }

    /// Nyquist range of the spatial grid, sampled four times finer than the
    /// box spacing `2π/L`.
    pub fn for_source(k: &SpaceTimeSource) -> Self {
        let p_max = std::f64::consts::PI / k.space.dx;
        let length = k.space.dx * (k.space.n - 1) as f64;
        let dp = 2.0 * std::f64::consts::PI / (4.0 * length);
        let n_p = ((2.0 * p_max / dp).ceil() as usize + 1).max(3);
        Self {
            p_min: -p_max,
            p_max,
            n_p,
        }
    }

    pub fn dp(&self) -> f64 {
        (self.p_max - self.p_min) / (self.n_p - 1) as f64
    }

    pub fn p(&self, j: usize) -> f64 {
        self.p_min + j as f64 * self.dp()
    }

    /// Trapezoid weights including the `1/2π` measure.
    pub fn weights(&self) -> Vec<f64> {
        quadrature_weights(self.n_p, self.dp(), Quadrature::Trapezoid)
            .into_iter()
            .map(|w| w / (2.0 * std::f64::consts::PI))
            .collect()
    }
}

fn check_work(k: &SpaceTimeSource, mg: &MomentumGrid) -> Result<()> {
    let work = mg.n_p as f64 * k.space.n as f64 * k.time.n as f64;
    if work > MAX_MODE_WORK {
        return Err(Error::TooLarge(format!(
            "{work:.2e} mode-sample products exceed {MAX_MODE_WORK:.0e}"
        )));
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldPersistence {
    pub value: Complex64,
    pub exponent: Complex64,
    /// `Σ_p |K_p|²`, the mean number of emitted particles.
    pub mean_number: f64,
}

/// `⟨0|0⟩^K = exp(-i ∫ K* G K)` with `G` resolved into momentum cells.
pub fn vacuum_persistence_st(k: &SpaceTimeSource, mg: &MomentumGrid) -> Result<FieldPersistence> {
    check_work(k, mg)?;
    let w = mg.weights();
    let mut exponent = Complex64::new(0.0, 0.0);
    let mut mean = 0.0;
    for (j, wj) in w.iter().enumerate() {
        let p = mg.p(j);
        let e = k.energy(p);
        let kp = k.momentum_component(p);
        let bar: Vec<Complex64> = kp.samples().iter().map(|z| z.conj()).collect();
        let b = bilinear_raw(
            &bar,
            kp.samples(),
            &k.time,
            &Propagator::retarded(e),
            Quadrature::Trapezoid,
        );
        exponent += -Complex64::i() * b * wj;
        mean += wj * crate::signal::fourier_with(&kp, e, Quadrature::Trapezoid).norm_sqr();
    }
    let value = exponent.exp();
    if !(value.re.is_finite() && value.im.is_finite()) {
        return Err(Error::Divergent("persistence overflowed".into()));
    }
    Ok(FieldPersistence {
        value,
        exponent,
        mean_number: mean,
    })
}

/// `-Σ_p w_p K̄₁(p) K₂(p)`: the exchange exponent between a later source `K₁`
/// and an earlier source `K₂`.
pub fn exchange_exponent(later: &SpaceTimeSource, earlier: &SpaceTimeSource, mg: &MomentumGrid) -> Result<Complex64> {
    if later.space != earlier.space || later.time != earlier.time {
        return Err(Error::GridMismatch);
    }
    if let (Some((l0, _)), Some((_, e1))) = (later.time_support(), earlier.time_support()) {
        if l0 <= e1 {
            return Err(Error::InvalidArgument(
                "sources are not causally ordered: the later source starts before the earlier one ends".into(),
            ));
        }
    }
    check_work(later, mg)?;
    let w = mg.weights();
    Ok((0..mg.n_p)
        .map(|j| {
            let p = mg.p(j);
            -w[j] * source_transform(later, p, true).conj() * source_transform(earlier, p, true)
        })
        .sum())
}

/// Emission strengths `K_p = √w_p K(p, E_p)` of every momentum cell, with the
/// persistence amplitude they multiply.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeSpectrum {
    pub momenta: Vec<f64>,
    pub strengths: Vec<Complex64>,
    pub persistence: Complex64,
}

pub fn mode_spectrum(k: &SpaceTimeSource, mg: &MomentumGrid) -> Result<ModeSpectrum> {
    let persistence = vacuum_persistence_st(k, mg)?.value;
    let w = mg.weights();
    let momenta: Vec<f64> = (0..mg.n_p).map(|j| mg.p(j)).collect();
    let strengths = momenta
        .iter()
        .zip(&w)
        .map(|(&p, wj)| source_transform(k, p, true) * wj.sqrt())
        .collect();
    Ok(ModeSpectrum {
        momenta,
        strengths,
        persistence,
    })
}

/// Occupation pattern: `(mode index, count)` pairs; unlisted modes are empty.
pub type Occupation = [(usize, u32)];

fn pattern_product(modes: &ModeSpectrum, pattern: &Occupation, conj: bool) -> Result<Complex64> {
    let mut seen = std::collections::BTreeSet::new();
    let mut amp = modes.persistence;
    for &(mode, count) in pattern {
        if !seen.insert(mode) {
            return Err(Error::InvalidArgument(format!("mode {mode} listed twice")));
        }
        let kp = *modes
            .strengths
            .get(mode)
            .ok_or_else(|| Error::InvalidArgument(format!("mode {mode} out of range")))?;
        let kp = if conj { kp.conj() } else { kp };
        for c in 1..=count {
            amp *= -Complex64::i() * kp / (c as f64).sqrt();
        }
    }
    Ok(amp)
}

/// `⟨{n}|0⟩^K = Π_p (-iK_p)^{n_p}/√(n_p!) ⟨0|0⟩^K`.
pub fn multi_particle_amplitude(modes: &ModeSpectrum, pattern: &Occupation) -> Result<Complex64> {
    pattern_product(modes, pattern, false)
}

/// `⟨0|{n}⟩^K = Π_p (-iK_p*)^{n_p}/√(n_p!) ⟨0|0⟩^K`, the absorption amplitude.
pub fn detection_amplitude(modes: &ModeSpectrum, pattern: &Occupation) -> Result<Complex64> {
    pattern_product(modes, pattern, true)
}

/// `⟨{n} + 1_p | {n}⟩` for a weak source: `-iK_p √(n_p + 1)`.
pub fn stimulated_emission(modes: &ModeSpectrum, mode: usize, n_p: u32) -> Result<Complex64> {
    let kp = modes
        .strengths
        .get(mode)
        .ok_or_else(|| Error::InvalidArgument(format!("mode {mode} out of range")))?;
    Ok(-Complex64::i() * kp * ((n_p + 1) as f64).sqrt())
}

/// `⟨{n} | {n} + 1_p⟩` for a weak source: `-iK_p* √(n_p + 1)`.
pub fn stimulated_absorption(modes: &ModeSpectrum, mode: usize, n_p: u32) -> Result<Complex64> {
    Ok(stimulated_emission(modes, mode, n_p)?.conj() * -1.0)
}

/// Free field radiated by `K`, `ψ(x, t) = ∫ G(x - x', t - t') K(x', t')`, at node `it`.
pub fn retarded_field(k: &SpaceTimeSource, mg: &MomentumGrid, xs: &[f64], it: usize) -> Result<Vec<Complex64>> {
    check_work(k, mg)?;
    if it >= k.time.n {
        return Err(Error::InvalidArgument(format!("time index {it} outside the grid")));
    }
    let w = mg.weights();
    let mut out = vec![Complex64::new(0.0, 0.0); xs.len()];
    for j in 0..mg.n_p {
        let p = mg.p(j);
        let psi_p = retarded_response(&k.momentum_component(p), k.energy(p), Quadrature::Trapezoid).samples()[it];
        for (o, &x) in out.iter_mut().zip(xs) {
            *o += psi_p * Complex64::from_polar(w[j], p * x);
        }
    }
    Ok(out)
}

/// Two-particle propagation amplitude for identical bosons,
/// `½[G(x₁-x₁')G(x₂-x₂') + G(x₁-x₂')G(x₂-x₁')]`.
pub fn symmetrized_pair_propagator(x1: f64, x2: f64, x1p: f64, x2p: f64, t: f64, m: f64) -> Result<Complex64> {
    Ok(0.5
        * (free_propagator(x1 - x1p, t, m)? * free_propagator(x2 - x2p, t, m)?
            + free_propagator(x1 - x2p, t, m)? * free_propagator(x2 - x1p, t, m)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn small_source(t_c: f64, amp: f64) -> SpaceTimeSource {
        let space = SpaceGrid::new(-6.0, 0.2, 61).unwrap();
        let time = TimeGrid::new(0.0, 0.05, 161).unwrap();
        let g = SpaceTimeSource::gaussian_packet(space, time, 1.0, c(amp, 0.0), (0.0, 0.7), (t_c, 0.4), 1.0).unwrap();
        // Cut to a compact time window so that separated sources are strictly ordered.
        SpaceTimeSource::from_fn(space, time, 1.0, |x, t| {
            if (t - t_c).abs() <= 1.5 {
                g.at(space.nearest_index(x).unwrap(), time.nearest_index(t).unwrap())
            } else {
                c(0.0, 0.0)
            }
        })
        .unwrap()
    }

    #[test]
    fn point_impulse_transform() {
        let space = SpaceGrid::new(-1.0, 0.1, 21).unwrap();
        let time = TimeGrid::new(0.0, 0.1, 11).unwrap();
        let k = SpaceTimeSource::point_impulse(space, time, 2.0, 0.3, 0.4).unwrap();
        for p in [-2.0, 0.5, 3.0] {
            let z = source_transform(&k, p, true);
            let expect = Complex64::from_polar(1.0, -p * 0.3 + p * p / 4.0 * 0.4);
            assert!((z - expect).norm() < 1e-12);
        }
    }

    #[test]
    fn propagator_branch_and_causality() {
        assert_eq!(free_propagator(0.3, -1.0, 1.0).unwrap(), c(0.0, 0.0));
        assert!(free_propagator(0.3, 0.0, 1.0).is_err());
        let g = free_propagator(0.0, 1.0, 2.0 * std::f64::consts::PI).unwrap();
        // -i e^{-iπ/4}
        assert!((g - c(0.0, -1.0) * Complex64::from_polar(1.0, -std::f64::consts::FRAC_PI_4)).norm() < 1e-15);
    }

    #[test]
    fn on_shell_kernel_solves_free_equation() {
        let m = 1.3;
        let h = 1e-3;
        for (x, t) in [(0.4, 0.8), (-0.7, -1.1), (1.2, 2.0)] {
            let f = |x: f64, t: f64| on_shell_kernel(x, t, m).unwrap();
            let dt = (f(x, t + h) - f(x, t - h)) / (2.0 * h);
            let dxx = (f(x + h, t) - f(x, t) * 2.0 + f(x - h, t)) / (h * h);
            let r = Complex64::i() * dt + dxx / (2.0 * m);
            assert!(r.norm() < 1e-5 * f(x, t).norm().max(1.0), "residual {r} at ({x}, {t})");
        }
    }

    #[test]
    fn persistence_modulus_law() {
        let k = small_source(4.0, 0.3);
        let mg = MomentumGrid::new(-6.0, 8.0, 281).unwrap();
        let r = vacuum_persistence_st(&k, &mg).unwrap();
        assert_relative_eq!(r.value.norm_sqr(), (-r.mean_number).exp(), max_relative = 1e-12);
        let modes = mode_spectrum(&k, &mg).unwrap();
        let total: f64 = modes.strengths.iter().map(|z| z.norm_sqr()).sum();
        assert_relative_eq!(total, r.mean_number, max_relative = 1e-12);
    }

    #[test]
    fn causal_sources_factorise() {
        let early = small_source(1.5, 0.25);
        let late = small_source(6.0, 0.2);
        let mg = MomentumGrid::new(-6.0, 8.0, 281).unwrap();
        let both = late.try_add(&early).unwrap();
        let whole = vacuum_persistence_st(&both, &mg).unwrap().value;
        let parts = vacuum_persistence_st(&late, &mg).unwrap().value
            * vacuum_persistence_st(&early, &mg).unwrap().value
            * exchange_exponent(&late, &early, &mg).unwrap().exp();
        assert!((whole - parts).norm() < 1e-12, "{whole} vs {parts}");
        assert!(exchange_exponent(&early, &late, &mg).is_err());
    }

    #[test]
    fn intermediate_states_reproduce_exchange() {
        // Σ_{n} ⟨0|{n}⟩^{K₁} ⟨{n}|0⟩^{K₂}, summed mode by mode.
        let early = small_source(1.5, 0.25);
        let late = small_source(6.0, 0.2);
        let mg = MomentumGrid::new(-6.0, 8.0, 281).unwrap();
        let s1 = mode_spectrum(&late, &mg).unwrap();
        let s2 = mode_spectrum(&early, &mg).unwrap();
        let mut product = s1.persistence * s2.persistence;
        for mode in 0..mg.n_p {
            let mut acc = c(0.0, 0.0);
            for n in 0..12u32 {
                let a1 = detection_amplitude(&s1, &[(mode, n)]).unwrap() / s1.persistence;
                let a2 = multi_particle_amplitude(&s2, &[(mode, n)]).unwrap() / s2.persistence;
                acc += a1 * a2;
            }
            product *= acc;
        }
        let whole = vacuum_persistence_st(&late.try_add(&early).unwrap(), &mg)
            .unwrap()
            .value;
        assert!((whole - product).norm() < 1e-12, "{whole} vs {product}");
    }

    #[test]
    fn stimulated_factor_is_exact() {
        let k = small_source(4.0, 0.3);
        let mg = MomentumGrid::new(-4.0, 6.0, 101).unwrap();
        let modes = mode_spectrum(&k, &mg).unwrap();
        let mode = 70;
        for n in 0..6u32 {
            // ⟨0|{n}⟩(-iK*) = √(n+1) ⟨0|{n}+1⟩
            let lhs =
                detection_amplitude(&modes, &[(mode, n)]).unwrap() * (-Complex64::i() * modes.strengths[mode].conj());
            let rhs = detection_amplitude(&modes, &[(mode, n + 1)]).unwrap() * ((n + 1) as f64).sqrt();
            assert!((lhs - rhs).norm() <= 1e-15 * rhs.norm().max(1e-300));
            let p = stimulated_emission(&modes, mode, n).unwrap().norm_sqr();
            assert_relative_eq!(
                p,
                modes.strengths[mode].norm_sqr() * (n + 1) as f64,
                max_relative = 1e-14
            );
            let a = stimulated_absorption(&modes, mode, n).unwrap();
            assert!((a - (-Complex64::i() * modes.strengths[mode].conj() * ((n + 1) as f64).sqrt())).norm() < 1e-15);
        }
        assert!(multi_particle_amplitude(&modes, &[(3, 1), (3, 2)]).is_err());
        assert!(multi_particle_amplitude(&modes, &[(1000, 1)]).is_err());
    }

    #[test]
    fn memory_guard() {
        let space = SpaceGrid::new(0.0, 0.1, 10_000).unwrap();
        let time = TimeGrid::new(0.0, 0.1, 10_000).unwrap();
        let r = SpaceTimeSource::from_fn(space, time, 1.0, |_, _| c(0.0, 0.0));
        assert!(matches!(r, Err(Error::TooLarge(_))));
    }

    proptest! {
        #[test]
        fn pair_propagator_is_symmetric(x1 in -2.0f64..2.0, x2 in -2.0f64..2.0, y1 in -2.0f64..2.0, y2 in -2.0f64..2.0, t in 0.1f64..3.0) {
            let a = symmetrized_pair_propagator(x1, x2, y1, y2, t, 1.0).unwrap();
            let b = symmetrized_pair_propagator(x2, x1, y1, y2, t, 1.0).unwrap();
            let d = symmetrized_pair_propagator(x1, x2, y2, y1, t, 1.0).unwrap();
            prop_assert!((a - b).norm() < 1e-12 && (a - d).norm() < 1e-12);
        }
    }
}
