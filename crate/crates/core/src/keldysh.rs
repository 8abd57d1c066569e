//! Closed-time-path (time-cycle) functionals: the vacuum cycle, its thermal
//! and complex-time generalisation, and the number-distribution generators
//! obtained from displaced source pairs.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::greens::{bilinear_raw, Propagator};
use crate::signal::{fourier_with, shift_signal, ComplexSignal, Quadrature, TimeGrid};

/// Ensemble the cycle starts (and ends) in.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialState {
    Vacuum,
    Number {
        n: u32,
    },
    Thermal {
        beta: f64,
    },
    /// Weights `e^{-inωτ}`; `τ = -iβ` is the thermal case.
    ComplexTau {
        tau: Complex64,
    },
}

impl InitialState {
    /// Complex time of the weight `e^{-iHτ}`, when the ensemble has one.
    pub fn tau(&self) -> Option<Complex64> {
        match *self {
            Self::Thermal { beta } => Some(Complex64::new(0.0, -beta)),
            Self::ComplexTau { tau } => Some(tau),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KeldyshScenario {
    pub k_plus: ComplexSignal,
    pub k_minus: ComplexSignal,
    pub omega: f64,
    pub initial: InitialState,
}

impl KeldyshScenario {
    pub fn new(k_plus: ComplexSignal, k_minus: ComplexSignal, omega: f64, initial: InitialState) -> Result<Self> {
        k_plus.ensure_same_grid(&k_minus)?;
        if !(omega.is_finite() && omega > 0.0) {
            return Err(Error::InvalidArgument(format!("omega must be positive, got {omega}")));
        }
        match initial {
            InitialState::Thermal { beta } if beta.is_nan() || beta < 0.0 => {
                return Err(Error::InvalidArgument(format!("beta must be non-negative, got {beta}")));
            }
            InitialState::ComplexTau { tau } if !(tau.re.is_finite() && tau.im.is_finite()) => {
                return Err(Error::InvalidArgument(format!("τ must be finite, got {tau}")));
            }
            _ => {}
        }
        Ok(Self {
            k_plus,
            k_minus,
            omega,
            initial,
        })
    }

    /// Same source on both branches.
    pub fn diagonal(k: ComplexSignal, omega: f64, initial: InitialState) -> Result<Self> {
        Self::new(k.clone(), k, omega, initial)
    }

    pub fn grid(&self) -> &TimeGrid {
        self.k_plus.grid()
    }
}

/// Exponent of the vacuum cycle with every source array independent:
/// `-i∫∫K̄₊G_rK₊ + i∫∫K̄₋G_aK₋ + ∫∫K̄₋ e K₊`.
fn cycle_exponent_raw(
    kp_bar: &[Complex64],
    kp: &[Complex64],
    km_bar: &[Complex64],
    km: &[Complex64],
    grid: &TimeGrid,
    omega: f64,
) -> Complex64 {
    let i = Complex64::i();
    let rule = Quadrature::Trapezoid;
    -i * bilinear_raw(kp_bar, kp, grid, &Propagator::retarded(omega), rule)
        + i * bilinear_raw(km_bar, km, grid, &Propagator::advanced(omega), rule)
        + bilinear_raw(km_bar, kp, grid, &Propagator::on_shell(omega), rule)
}

fn conj_vec(k: &ComplexSignal) -> Vec<Complex64> {
    k.samples().iter().map(|z| z.conj()).collect()
}

fn vacuum_cycle_exponent(s: &KeldyshScenario) -> Complex64 {
    cycle_exponent_raw(
        &conj_vec(&s.k_plus),
        s.k_plus.samples(),
        &conj_vec(&s.k_minus),
        s.k_minus.samples(),
        s.grid(),
        s.omega,
    )
}

/// `⟨0|0⟩^{K₋,K₊}`: forward with `K₊`, back with `K₋`, starting in the vacuum.
pub fn time_cycle_functional(s: &KeldyshScenario) -> Result<Complex64> {
    match s.initial {
        InitialState::Vacuum => Ok(vacuum_cycle_exponent(s).exp()),
        other => Err(Error::Unsupported(format!(
            "time_cycle_functional takes a vacuum start; use thermal_generator for {other:?}"
        ))),
    }
}

fn branch_gammas(s: &KeldyshScenario) -> (Complex64, Complex64) {
    let gp = fourier_with(&s.k_plus, s.omega, Quadrature::Trapezoid).value;
    let gm = fourier_with(&s.k_minus, s.omega, Quadrature::Trapezoid).value;
    (gp, gm)
}

fn check_tau(tau: Complex64, omega: f64) -> Result<()> {
    if !(tau.im < 0.0) {
        return Err(Error::InvalidArgument(format!("need Im τ < 0, got {tau}")));
    }
    if (tau.re * omega).abs() > 2.0 * std::f64::consts::PI {
        return Err(Error::InvalidArgument(format!(
            "|Re τ · ω| = {} exceeds 2π",
            (tau.re * omega).abs()
        )));
    }
    Ok(())
}

/// `1/(e^{iωτ} - 1)`; `None` for the zero-temperature limit.
fn occupation_factor(initial: &InitialState, omega: f64) -> Result<Option<Complex64>> {
    match *initial {
        InitialState::Vacuum => Ok(None),
        InitialState::Thermal { beta } if beta == f64::INFINITY => Ok(None),
        InitialState::Thermal { beta } if beta == 0.0 => Err(Error::Divergent(
            "infinite temperature: the thermal factor diverges".into(),
        )),
        InitialState::Number { .. } => Err(Error::Unsupported(
            "a number-state start has no closed-form cycle functional here".into(),
        )),
        other => {
            let tau = other.tau().expect("thermal or complex τ");
            check_tau(tau, omega)?;
            Ok(Some(((Complex64::i() * omega * tau).exp() - 1.0).inv()))
        }
    }
}

/// Cycle functional for a thermal or complex-time ensemble:
/// the vacuum cycle times `exp[-|γ₊ - γ₋|² / (e^{iωτ} - 1)]`.
pub fn thermal_generator(s: &KeldyshScenario) -> Result<Complex64> {
    let base = vacuum_cycle_exponent(s);
    let (gp, gm) = branch_gammas(s);
    let diff = (gp - gm).norm_sqr();
    let extra = match occupation_factor(&s.initial, s.omega) {
        Ok(None) => Complex64::new(0.0, 0.0),
        Ok(Some(f)) => -f * diff,
        Err(Error::Divergent(_)) if diff == 0.0 => Complex64::new(0.0, 0.0),
        Err(e) => return Err(e),
    };
    let z = (base + extra).exp();
    if z.re.is_finite() && z.im.is_finite() {
        Ok(z)
    } else {
        Err(Error::Divergent("thermal generator overflowed".into()))
    }
}

/// `K₊(t) = K(t + T)`, `K₋ = K`: the pair whose cycle generates `⟨e^{-iωTN}⟩`.
pub fn displaced_pair(k: &ComplexSignal, omega: f64, shift: f64, initial: InitialState) -> Result<KeldyshScenario> {
    KeldyshScenario::new(shift_signal(k, shift)?, k.clone(), omega, initial)
}

/// `exp(|γ|²(e^{-iωT} - 1))`, the generator of the excitation-number distribution.
pub fn displaced_generator(k: &ComplexSignal, omega: f64, shift: f64) -> Result<Complex64> {
    k.grid().steps_in(shift)?;
    let g2 = fourier_with(k, omega, Quadrature::Trapezoid).norm_sqr();
    Ok((g2 * (Complex64::from_polar(1.0, -omega * shift) - 1.0)).exp())
}

/// The same generator evaluated as a cycle functional of the displaced pair.
pub fn displaced_generator_via_cycle(k: &ComplexSignal, omega: f64, shift: f64) -> Result<Complex64> {
    time_cycle_functional(&displaced_pair(k, omega, shift, InitialState::Vacuum)?)
}

/// Laguerre polynomial `L_n(x)`.
fn laguerre(n: u32, x: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, 1.0 - x);
    if n == 0 {
        return prev;
    }
    for k in 1..n {
        let k = k as f64;
        let next = ((2.0 * k + 1.0 - x) * cur - k * prev) / (k + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// `⟨e^{-iθ(N_final - N_initial)}⟩` for a source with the given `|γ|²`.
pub fn number_generator(gamma_sq: f64, omega: f64, initial: &InitialState, theta: f64) -> Result<Complex64> {
    let q = Complex64::from_polar(1.0, -theta) - 1.0;
    let coherent = gamma_sq * q;
    match *initial {
        InitialState::Vacuum => Ok(coherent.exp()),
        InitialState::Number { n } => {
            let x = 4.0 * gamma_sq * (0.5 * theta).sin().powi(2);
            Ok(coherent.exp() * laguerre(n, x))
        }
        InitialState::Thermal { .. } => {
            let nbar = thermal_occupation(initial, omega)?;
            Ok((coherent - nbar * gamma_sq * q.norm_sqr()).exp())
        }
        InitialState::ComplexTau { .. } => Err(Error::Unsupported("number generator needs a real ensemble".into())),
    }
}

fn thermal_occupation(initial: &InitialState, omega: f64) -> Result<f64> {
    match *initial {
        InitialState::Vacuum => Ok(0.0),
        InitialState::Number { n } => Ok(n as f64),
        InitialState::Thermal { beta } => {
            if beta == 0.0 {
                Err(Error::Divergent("infinite temperature".into()))
            } else if beta == f64::INFINITY {
                Ok(0.0)
            } else {
                Ok(1.0 / (beta * omega).exp_m1())
            }
        }
        InitialState::ComplexTau { .. } => Err(Error::Unsupported("moments need a real ensemble".into())),
    }
}

/// First and second moments of the excitation number after the drive.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    /// Final `⟨N⟩` of the ensemble.
    pub mean_n: f64,
    /// Ensemble average of each initial level's variance of `N`.
    pub var_n: f64,
    /// Mean number of quanta added, `⟨N - n⟩ = |γ|²`.
    pub gamma_sq: f64,
}

pub fn moments(k: &ComplexSignal, omega: f64, initial: &InitialState) -> Result<MomentReport> {
    moments_with(k, omega, initial, Quadrature::Trapezoid)
}

pub fn moments_with(k: &ComplexSignal, omega: f64, initial: &InitialState, rule: Quadrature) -> Result<MomentReport> {
    moments_for(fourier_with(k, omega, rule).norm_sqr(), omega, initial)
}

pub fn moments_for(gamma_sq: f64, omega: f64, initial: &InitialState) -> Result<MomentReport> {
    let nbar = thermal_occupation(initial, omega)?;
    Ok(MomentReport {
        mean_n: nbar + gamma_sq,
        var_n: gamma_sq * (1.0 + 2.0 * nbar),
        gamma_sq,
    })
}

/// Excitation probabilities recovered from the number generator by a discrete
/// Fourier inversion over `m` equally spaced shifts `T_k = 2πk/(mω)`.
pub fn probabilities_by_inversion(k: &ComplexSignal, omega: f64, m: usize, n_max: usize) -> Result<Vec<f64>> {
    if m == 0 || n_max >= m {
        return Err(Error::InvalidArgument(format!(
            "need n_max < m, got n_max={n_max}, m={m}"
        )));
    }
    let values: Vec<Complex64> = (0..m)
        .map(|j| {
            let shift = 2.0 * std::f64::consts::PI * j as f64 / (m as f64 * omega);
            displaced_generator_via_cycle(k, omega, shift)
        })
        .collect::<Result<_>>()?;
    Ok((0..=n_max)
        .map(|n| {
            let s: Complex64 = values
                .iter()
                .enumerate()
                .map(|(j, g)| g * Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * (n * j) as f64 / m as f64))
                .sum();
            s.re / m as f64
        })
        .collect())
}

/// Ensemble value of the lowering operator at the start of the cycle,
/// `-i(γ₊ - γ₋)/(e^{iωτ} - 1)`, with `γ` measured from the first grid time.
pub fn boundary_lowering(s: &KeldyshScenario) -> Result<Complex64> {
    let (gp, gm) = branch_gammas(s);
    let origin = Complex64::from_polar(1.0, -s.omega * s.grid().t_start);
    match occupation_factor(&s.initial, s.omega)? {
        None => Ok(Complex64::new(0.0, 0.0)),
        Some(f) => Ok(-Complex64::i() * (gp - gm) * origin * f),
    }
}

/// Mixed second derivative of the vacuum cycle with respect to `K₋(t)` and
/// `K̄₊(t')`, from the closed form. With `K₊ = K₋` this is `⟨y†(t) y(t')⟩`.
pub fn correlation_closed(s: &KeldyshScenario, t: f64, t_prime: f64) -> Result<Complex64> {
    time_cycle_functional(s)?;
    let g = s.grid();
    let (it, itp) = (g.index_of(t)?, g.index_of(t_prime)?);
    let w = g.weights(Quadrature::Trapezoid);
    let i = Complex64::i();
    let omega = s.omega;
    // i ∫ K̄₋(u) G_a(u - t) du and -i ∫ G_r(t' - u) K₊(u) du, with the
    // coincident point at half weight as in the bilinear forms.
    let mut left = Complex64::new(0.0, 0.0);
    let mut right = Complex64::new(0.0, 0.0);
    for u in 0..g.n {
        let h_adv = if u < it {
            1.0
        } else if u == it {
            0.5
        } else {
            0.0
        };
        if h_adv > 0.0 {
            let kv = i * Complex64::from_polar(1.0, -omega * (g.time(u) - g.time(it)));
            left += s.k_minus.samples()[u].conj() * kv * w[u] * h_adv;
        }
        let h_ret = if u < itp {
            1.0
        } else if u == itp {
            0.5
        } else {
            0.0
        };
        if h_ret > 0.0 {
            let kv = -i * Complex64::from_polar(1.0, -omega * (g.time(itp) - g.time(u)));
            right += kv * s.k_plus.samples()[u] * w[u] * h_ret;
        }
    }
    Ok(vacuum_cycle_exponent(s).exp() * (i * left) * (-i * right))
}

/// The same derivative by holomorphic central differences, Richardson-extrapolated.
///
/// `h` is the perturbation in source-density units: the sample at `t` is moved
/// by `h / w(t)` so that the exponent moves by `h` times the functional derivative.
pub fn correlation_fd(s: &KeldyshScenario, t: f64, t_prime: f64, h: f64) -> Result<Complex64> {
    time_cycle_functional(s)?;
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidArgument(format!("step must be positive, got {h}")));
    }
    let g = *s.grid();
    let (it, itp) = (g.index_of(t)?, g.index_of(t_prime)?);
    let w = g.weights(Quadrature::Trapezoid);
    let kp_bar = conj_vec(&s.k_plus);
    let km_bar = conj_vec(&s.k_minus);
    let eval = |a: f64, b: f64| {
        let mut km = s.k_minus.samples().to_vec();
        let mut kpb = kp_bar.clone();
        km[it] += a / w[it];
        kpb[itp] += b / w[itp];
        cycle_exponent_raw(&kpb, s.k_plus.samples(), &km_bar, &km, &g, s.omega).exp()
    };
    let mixed = |h: f64| (eval(h, h) - eval(h, -h) - eval(-h, h) + eval(-h, -h)) / (4.0 * h * h);
    Ok((mixed(0.5 * h) * 4.0 - mixed(h)) / 3.0)
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

    fn pulse_on(grid: TimeGrid) -> ComplexSignal {
        ComplexSignal::square(grid, c(0.5, 0.0), 0.0, PI).unwrap()
    }

    #[test]
    fn laguerre_values() {
        assert_relative_eq!(laguerre(0, 0.7), 1.0);
        assert_relative_eq!(laguerre(1, 0.7), 0.3);
        assert_relative_eq!(
            laguerre(3, 0.7),
            (-0.343 + 9.0 * 0.49 - 18.0 * 0.7 + 6.0) / 6.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn displaced_routes_agree() {
        let g = TimeGrid::new(-2.0 * PI, PI / 256.0, 833).unwrap();
        let k = pulse_on(g);
        for j in [0usize, 1, 64, 256, 300] {
            let t = j as f64 * g.dt;
            let a = displaced_generator(&k, 1.0, t).unwrap();
            let b = displaced_generator_via_cycle(&k, 1.0, t).unwrap();
            assert!((a - b).norm() < 1e-13, "shift {t}: {a} vs {b}");
        }
        let half = displaced_generator(&k, 1.0, 256.0 * g.dt).unwrap();
        let g2 = fourier_with(&k, 1.0, Quadrature::Trapezoid).norm_sqr();
        assert_relative_eq!(half.re, (-2.0 * g2).exp(), epsilon = 1e-14);
        assert!(matches!(
            displaced_generator(&k, 1.0, 0.3 * g.dt),
            Err(Error::OffGrid { .. })
        ));
    }

    #[test]
    fn inversion_recovers_poisson() {
        let g = TimeGrid::new(-2.0 * PI, PI / 64.0, 209).unwrap();
        let k = pulse_on(g);
        let p = probabilities_by_inversion(&k, 1.0, 64, 10).unwrap();
        let g2 = fourier_with(&k, 1.0, Quadrature::Trapezoid).norm_sqr();
        let (exact, _) = crate::amplitudes::poisson_table(g2, 10).unwrap();
        for n in 0..=10 {
            assert!((p[n] - exact[n]).abs() < 1e-12, "n={n}");
        }
    }

    #[test]
    fn moments_frozen() {
        let vac = moments_for(1.0, 1.0, &InitialState::Vacuum).unwrap();
        assert_eq!((vac.mean_n, vac.var_n), (1.0, 1.0));
        let num = moments_for(1.0, 1.0, &InitialState::Number { n: 3 }).unwrap();
        assert_eq!((num.mean_n, num.var_n), (4.0, 7.0));
        let th = moments_for(1.0, 1.0, &InitialState::Thermal { beta: 1.0 }).unwrap();
        assert_relative_eq!(th.var_n, 2.163953413738653, epsilon = 1e-12);
        assert!(moments_for(1.0, 1.0, &InitialState::Thermal { beta: 0.0 }).is_err());
    }

    #[test]
    fn moments_match_generator_derivatives() {
        let h = 1e-4;
        for init in [
            InitialState::Vacuum,
            InitialState::Number { n: 3 },
            InitialState::Thermal { beta: 0.7 },
        ] {
            let g2 = 0.8;
            let gen = |th: f64| number_generator(g2, 1.3, &init, th).unwrap();
            // G(θ) = ⟨e^{-iθ(N-n)}⟩: first derivative -i⟨N-n⟩, second -⟨(N-n)²⟩.
            let d1 = (gen(h) - gen(-h)) / (2.0 * h);
            let d2 = (gen(h) - gen(0.0) * 2.0 + gen(-h)) / (h * h);
            let mean = (d1 * Complex64::i()).re;
            let second = -d2.re;
            let m = moments_for(g2, 1.3, &init).unwrap();
            assert!((mean - m.gamma_sq).abs() < 1e-6, "{init:?}: mean {mean}");
            // Conditional variance: spread of N - n about its mean.
            assert!(
                (second - mean * mean - m.var_n).abs() < 1e-5,
                "{init:?}: {} vs {}",
                second - mean * mean,
                m.var_n
            );
        }
    }

    #[test]
    fn thermal_requirements() {
        let g = TimeGrid::new(0.0, 0.05, 64).unwrap();
        let k = ComplexSignal::gaussian(g, c(0.3, 0.0), 1.5, 0.3, 1.0).unwrap();
        let zero_t = KeldyshScenario::new(
            shift_signal(&k, 0.5).unwrap(),
            k.clone(),
            1.0,
            InitialState::Thermal { beta: 0.0 },
        )
        .unwrap();
        assert!(matches!(thermal_generator(&zero_t), Err(Error::Divergent(_))));
        let bad_tau = KeldyshScenario::diagonal(k.clone(), 1.0, InitialState::ComplexTau { tau: c(0.2, 0.3) }).unwrap();
        assert!(thermal_generator(&bad_tau).is_err());
        let wide = KeldyshScenario::diagonal(k.clone(), 1.0, InitialState::ComplexTau { tau: c(7.0, -1.0) }).unwrap();
        assert!(thermal_generator(&wide).is_err());
        let number = KeldyshScenario::diagonal(k.clone(), 1.0, InitialState::Number { n: 2 }).unwrap();
        assert!(matches!(time_cycle_functional(&number), Err(Error::Unsupported(_))));
        let cold = KeldyshScenario::new(
            shift_signal(&k, 0.5).unwrap(),
            k.clone(),
            1.0,
            InitialState::Thermal { beta: f64::INFINITY },
        )
        .unwrap();
        let vac = KeldyshScenario {
            initial: InitialState::Vacuum,
            ..cold.clone()
        };
        assert_eq!(thermal_generator(&cold).unwrap(), time_cycle_functional(&vac).unwrap());
    }

    #[test]
    fn thermal_generator_reproduces_number_generator() {
        let g = TimeGrid::new(-1.1 * PI, PI / 200.0, 461).unwrap();
        let k = pulse_on(g);
        let init = InitialState::Thermal { beta: 0.9 };
        let g2 = fourier_with(&k, 1.0, Quadrature::Trapezoid).norm_sqr();
        for j in [10usize, 77, 200] {
            let t = j as f64 * g.dt;
            let s = displaced_pair(&k, 1.0, t, init).unwrap();
            let a = thermal_generator(&s).unwrap();
            let b = number_generator(g2, 1.0, &init, t).unwrap();
            assert!((a - b).norm() < 1e-13, "{a} vs {b}");
        }
    }

    #[test]
    fn correlation_derivative() {
        let g = TimeGrid::new(0.0, 0.02, 301).unwrap();
        let kp = ComplexSignal::gaussian(g, c(0.6, 0.2), 3.0, 0.8, 1.0).unwrap();
        let km = ComplexSignal::gaussian(g, c(0.5, -0.1), 2.8, 0.7, 1.1).unwrap();
        let s = KeldyshScenario::new(kp, km, 1.0, InitialState::Vacuum).unwrap();
        for (t, tp) in [(4.0, 3.5), (2.0, 5.0), (3.0, 3.0)] {
            let a = correlation_closed(&s, t, tp).unwrap();
            let b = correlation_fd(&s, t, tp, 1e-4).unwrap();
            assert!((a - b).norm() <= 1e-4 * a.norm().max(1e-12), "{a} vs {b}");
        }
    }

    proptest! {
        #[test]
        fn equal_sources_close_the_cycle(
            re in -1.5f64..1.5, im in -1.5f64..1.5,
            center in 2.0f64..4.0, width in 0.2f64..1.0, carrier in 0.0f64..2.0, omega in 0.2f64..3.0,
        ) {
            let g = TimeGrid::new(0.0, 0.01, 601).unwrap();
            let k = ComplexSignal::gaussian(g, c(re, im), center, width, carrier).unwrap();
            let s = KeldyshScenario::diagonal(k, omega, InitialState::Vacuum).unwrap();
            let z = time_cycle_functional(&s).unwrap();
            prop_assert!((z - 1.0).norm() < 1e-12);
        }

        #[test]
        fn thermal_equal_sources_give_one(beta in 0.05f64..5.0, re in -1.0f64..1.0) {
            let g = TimeGrid::new(0.0, 0.02, 201).unwrap();
            let k = ComplexSignal::gaussian(g, c(re, 0.3), 2.0, 0.5, 1.0).unwrap();
            let s = KeldyshScenario::diagonal(k, 1.0, InitialState::Thermal { beta }).unwrap();
            prop_assert!((thermal_generator(&s).unwrap() - 1.0).norm() < 1e-12);
        }

        #[test]
        fn generators_are_bounded(g2 in 0.0f64..3.0, theta in -3.0f64..3.0, beta in 0.1f64..4.0, n in 0u32..6) {
            for init in [InitialState::Vacuum, InitialState::Thermal { beta }, InitialState::Number { n }] {
                let z = number_generator(g2, 1.0, &init, theta).unwrap();
                prop_assert!(z.norm() <= 1.0 + 1e-12);
            }
        }
    }
}
