//! Transformation functions of the driven oscillator in the coherent-state
//! representation, and the Poisson transition table they imply.

use std::io::{self, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::greens::{bilinear_raw, bilinear_with, Propagator};
use crate::signal::{fourier_with, ComplexSignal, Quadrature};

pub const DEFAULT_N_MAX: usize = 64;

/// Coherent-state labels: `y_dag` on the final bra, `y` on the initial ket.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoherentLabel {
    pub y_dag: Complex64,
    pub y: Complex64,
}

impl CoherentLabel {
    pub fn new(y_dag: Complex64, y: Complex64) -> Self {
        Self { y_dag, y }
    }

    pub fn vacuum() -> Self {
        Self::new(Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0))
    }
}

/// `⟨y†', t1 | y'', t2⟩` without a source.
pub fn free_transformation(label: CoherentLabel, omega: f64, t1: f64, t2: f64) -> Result<Complex64> {
    if !(t1 >= t2) {
        return Err(Error::InvalidArgument(format!("need t1 >= t2, got t1={t1}, t2={t2}")));
    }
    Ok((label.y_dag * Complex64::from_polar(1.0, -omega * (t1 - t2)) * label.y).exp())
}

/// `⟨0|0⟩^K = exp(-i ∫∫ K* G_r K)`.
pub fn vacuum_persistence(k: &ComplexSignal, omega: f64) -> Result<Complex64> {
    vacuum_persistence_with(k, omega, Quadrature::Trapezoid)
}

pub fn vacuum_persistence_with(k: &ComplexSignal, omega: f64, rule: Quadrature) -> Result<Complex64> {
    k.warn_if_truncated("vacuum persistence");
    let b = bilinear_with(k, &Propagator::retarded(omega), k, rule)?;
    let z = (-Complex64::i() * b).exp();
    finite(z, "vacuum persistence")
}

fn finite(z: Complex64, what: &str) -> Result<Complex64> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(z)
    } else {
        Err(Error::Divergent(format!("{what} overflowed")))
    }
}

fn check_window(k: &ComplexSignal, t1: f64, t2: f64) -> Result<()> {
    if !(t1 >= t2) {
        return Err(Error::InvalidArgument(format!("need t1 >= t2, got t1={t1}, t2={t2}")));
    }
    if let Some((a, b)) = k.support() {
        let tol = 1e-9 * k.grid().dt;
        if a < t2 - tol || b > t1 + tol {
            return Err(Error::SupportOutsideWindow { t1, t2 });
        }
    }
    Ok(())
}

/// `⟨y†', t1 | y'', t2⟩^K` from the closed form: free term, two linear terms
/// and the vacuum-persistence exponent.
pub fn forced_transformation(
    label: CoherentLabel,
    k: &ComplexSignal,
    omega: f64,
    t1: f64,
    t2: f64,
    rule: Quadrature,
) -> Result<Complex64> {
    check_window(k, t1, t2)?;
    let gamma = fourier_with(k, omega, rule).value;
    let i = Complex64::i();
    let b = bilinear_with(k, &Propagator::retarded(omega), k, rule)?;
    let exponent = label.y_dag * Complex64::from_polar(1.0, -omega * (t1 - t2)) * label.y
        - i * label.y_dag * Complex64::from_polar(1.0, -omega * t1) * gamma
        - i * Complex64::from_polar(1.0, omega * t2) * gamma.conj() * label.y
        - i * b;
    finite(exponent.exp(), "forced transformation")
}

/// Same amplitude, obtained by folding the labels into the source as impulses
/// `K + i y'' δ(t - t2)` and `K* + i y†' δ(t - t1)` and taking the vacuum
/// persistence. Each impulse is one sample carrying unit quadrature weight;
/// the result converges to [`forced_transformation`] at first order in `dt`.
pub fn forced_transformation_impulses(
    label: CoherentLabel,
    k: &ComplexSignal,
    omega: f64,
    t1: f64,
    t2: f64,
) -> Result<Complex64> {
    check_window(k, t1, t2)?;
    let g = *k.grid();
    let i1 = g
        .nearest_index(t1)
        .ok_or_else(|| Error::InvalidArgument(format!("t1 = {t1} outside the grid")))?;
    let i2 = g
        .nearest_index(t2)
        .ok_or_else(|| Error::InvalidArgument(format!("t2 = {t2} outside the grid")))?;
    let w = g.weights(Quadrature::Trapezoid);
    let i = Complex64::i();
    let mut left_bar: Vec<Complex64> = k.samples().iter().map(|z| z.conj()).collect();
    let mut right: Vec<Complex64> = k.samples().to_vec();
    left_bar[i1] += i * label.y_dag / w[i1];
    right[i2] += i * label.y / w[i2];
    let b = bilinear_raw(
        &left_bar,
        &right,
        &g,
        &Propagator::retarded(omega),
        Quadrature::Trapezoid,
    );
    finite((-i * b).exp(), "forced transformation")
}

/// `⟨n, t1 | 0, t2⟩^K` with `t1` the last grid time.
pub fn transition_amplitude(k: &ComplexSignal, omega: f64, n: usize, rule: Quadrature) -> Result<Complex64> {
    let gamma = fourier_with(k, omega, rule).value;
    let persistence = vacuum_persistence_with(k, omega, rule)?;
    let t1 = k.grid().t_end();
    let mut a = persistence * Complex64::from_polar(1.0, -(n as f64) * omega * t1);
    for m in 1..=n {
        a *= -Complex64::i() * gamma / (m as f64).sqrt();
    }
    Ok(a)
}

/// Excitation probabilities from the vacuum, `p_n = |γ|^{2n} e^{-|γ|²} / n!`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransitionTable {
    pub omega: f64,
    pub gamma: Complex64,
    pub gamma_sq: f64,
    pub persistence: Complex64,
    pub probabilities: Vec<f64>,
    /// Probability carried by all levels above `n_max`.
    pub tail_mass: f64,
}

impl TransitionTable {
    pub fn n_max(&self) -> usize {
        self.probabilities.len() - 1
    }

    pub fn total(&self) -> f64 {
        self.probabilities.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.probabilities.iter().enumerate().map(|(n, p)| n as f64 * p).sum()
    }

    /// CSV with columns `n,p_n,cumulative`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "n,p_n,cumulative")?;
        let mut cumulative = 0.0;
        for (n, p) in self.probabilities.iter().enumerate() {
            cumulative += p;
            writeln!(out, "{n},{p:e},{cumulative:e}")?;
        }
        Ok(())
    }
}

/// Poisson table for a given mean `|γ|²`; the tail is summed explicitly
/// rather than taken as `1 - Σ p_n`.
pub fn poisson_table(gamma_sq: f64, n_max: usize) -> Result<(Vec<f64>, f64)> {
    if !(gamma_sq >= 0.0 && gamma_sq.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "|γ|² must be finite and non-negative, got {gamma_sq}"
        )));
    }
    let mut p = Vec::with_capacity(n_max + 1);
    let mut term = (-gamma_sq).exp();
    p.push(term);
    for n in 1..=n_max {
        term *= gamma_sq / n as f64;
        p.push(term);
    }
    let mut tail = 0.0;
    let mut n = n_max;
    loop {
        n += 1;
        term *= gamma_sq / n as f64;
        tail += term;
        if term <= 1e-18 * tail.max(f64::MIN_POSITIVE) || term == 0.0 || n > n_max + 100_000 {
            break;
        }
    }
    Ok((p, tail))
}

pub fn transition_probabilities(k: &ComplexSignal, omega: f64, n_max: usize) -> Result<TransitionTable> {
    transition_probabilities_with(k, omega, n_max, Quadrature::Trapezoid)
}

pub fn transition_probabilities_with(
    k: &ComplexSignal,
    omega: f64,
    n_max: usize,
    rule: Quadrature,
) -> Result<TransitionTable> {
    let gamma = fourier_with(k, omega, rule).value;
    let persistence = vacuum_persistence_with(k, omega, rule)?;
    let gamma_sq = gamma.norm_sqr();
    let (probabilities, tail_mass) = poisson_table(gamma_sq, n_max)?;
    Ok(TransitionTable {
        omega,
        gamma,
        gamma_sq,
        persistence,
        probabilities,
        tail_mass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::TimeGrid;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn pulse(n: usize) -> ComplexSignal {
        let g = TimeGrid::spanning(0.0, PI, n).unwrap();
        ComplexSignal::square(g, c(0.5, 0.0), 0.0, PI).unwrap()
    }

    #[test]
    fn free_transformation_is_exponential() {
        let z = free_transformation(CoherentLabel::new(c(0.3, 0.1), c(-0.2, 0.4)), 2.0, 1.5, 0.5).unwrap();
        let expect = (c(0.3, 0.1) * c(-0.2, 0.4) * Complex64::from_polar(1.0, -2.0)).exp();
        assert!((z - expect).norm() < 1e-15);
        assert!(free_transformation(CoherentLabel::vacuum(), 1.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn square_pulse_persistence() {
        let z = vacuum_persistence_with(&pulse(4000), 1.0, Quadrature::Simpson).unwrap();
        let expect = Complex64::from_polar((-0.5f64).exp(), PI / 4.0);
        assert!((z - expect).norm() < 1e-10);
    }

    #[test]
    fn poisson_rows_frozen() {
        // |γ|² = 1: p_n = e^{-1}/n!.
        let (p, tail) = poisson_table(1.0, 4).unwrap();
        let frozen = [
            0.36787944117144233,
            0.36787944117144233,
            0.18393972058572117,
            0.061313240195240384,
            0.015328310048810096,
        ];
        for (a, b) in p.iter().zip(frozen) {
            assert_relative_eq!(*a, b, max_relative = 1e-15);
        }
        assert_relative_eq!(p.iter().sum::<f64>() + tail, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn table_and_csv() {
        let t = transition_probabilities(&pulse(2000), 1.0, 12).unwrap();
        assert_relative_eq!(t.persistence.norm_sqr(), t.probabilities[0], max_relative = 1e-12);
        assert_relative_eq!(t.total() + t.tail_mass, 1.0, epsilon = 1e-14);
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 14);
        assert!(text.starts_with("n,p_n,cumulative\n0,"));
    }

    #[test]
    fn amplitudes_square_to_probabilities() {
        let k = pulse(1000);
        let t = transition_probabilities(&k, 1.0, 6).unwrap();
        for n in 0..=6 {
            let a = transition_amplitude(&k, 1.0, n, Quadrature::Trapezoid).unwrap();
            assert_relative_eq!(a.norm_sqr(), t.probabilities[n], max_relative = 1e-12);
        }
    }

    #[test]
    fn support_must_lie_in_window() {
        let k = pulse(100);
        let r = forced_transformation(CoherentLabel::vacuum(), &k, 1.0, 2.0, 0.0, Quadrature::Trapezoid);
        assert!(matches!(r, Err(Error::SupportOutsideWindow { .. })));
    }

    #[test]
    fn impulse_route_converges_first_order() {
        let label = CoherentLabel::new(c(0.4, -0.3), c(0.2, 0.5));
        let mut errs = Vec::new();
        for n in [400usize, 800, 1600] {
            let g = TimeGrid::spanning(0.0, 4.0, n).unwrap();
            let k = ComplexSignal::gaussian(g, c(0.6, 0.2), 2.0, 0.4, 1.0).unwrap();
            let closed = forced_transformation(label, &k, 1.0, 4.0, 0.0, Quadrature::Trapezoid).unwrap();
            let imp = forced_transformation_impulses(label, &k, 1.0, 4.0, 0.0).unwrap();
            errs.push((closed - imp).norm());
        }
        assert!(errs[2] < 1e-3, "{errs:?}");
        let slope = (errs[1] / errs[2]).log2();
        assert!(slope > 0.8, "order {slope}, errors {errs:?}");
    }

    #[test]
    fn vacuum_label_reduces_to_persistence() {
        let k = pulse(500);
        let z = forced_transformation(CoherentLabel::vacuum(), &k, 1.0, PI, 0.0, Quadrature::Trapezoid).unwrap();
        assert!((z - vacuum_persistence(&k, 1.0).unwrap()).norm() < 1e-15);
    }

    proptest! {
        #[test]
        fn modulus_law(re in -1.0f64..1.0, im in -1.0f64..1.0, width in 0.2f64..1.0, omega in 0.3f64..2.0) {
            let g = TimeGrid::new(-6.0, 0.01, 1201).unwrap();
            let k = ComplexSignal::gaussian(g, c(re, im), 0.0, width, omega).unwrap();
            let z = vacuum_persistence(&k, omega).unwrap();
            let g2 = fourier_with(&k, omega, Quadrature::Trapezoid).norm_sqr();
            prop_assert!((z.norm_sqr() - (-g2).exp()).abs() < 1e-12);
        }

        #[test]
        fn probabilities_sum_to_one(g2 in 0.0f64..20.0) {
            let (p, tail) = poisson_table(g2, DEFAULT_N_MAX).unwrap();
            prop_assert!(p.iter().all(|x| *x >= 0.0));
            prop_assert!((p.iter().sum::<f64>() + tail - 1.0).abs() < 1e-12);
            let mean: f64 = p.iter().enumerate().map(|(n, x)| n as f64 * x).sum();
            prop_assert!((mean - g2).abs() < 1e-9);
        }
    }
}
