//! Oscillator Green's functions and the double-time bilinear forms built from them.
//!
//! Sampled kernels follow the usual step convention: the retarded step is 1 at
//! coincident times and the advanced one is 0. Inside double integrals the
//! coincident-time diagonal gets half weight instead, which is the trapezoid
//! treatment of the kink and keeps the retarded, advanced and on-shell forms
//! summing to zero exactly.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::{cumulative_integral, quadrature_weights, ComplexSignal, Quadrature, TimeGrid};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelKind {
    Retarded,
    Advanced,
    #[serde(alias = "on-shell", alias = "on_shell")]
    OnShell,
}

impl FromStr for KernelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "retarded" => Ok(Self::Retarded),
            "advanced" => Ok(Self::Advanced),
            "onshell" | "on-shell" | "on_shell" => Ok(Self::OnShell),
            other => Err(Error::InvalidArgument(format!("unknown kernel kind '{other}'"))),
        }
    }
}

impl fmt::Display for KernelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Retarded => "retarded",
            Self::Advanced => "advanced",
            Self::OnShell => "onshell",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Propagator {
    pub kind: KernelKind,
    pub omega: f64,
}

impl Propagator {
    pub fn new(kind: KernelKind, omega: f64) -> Self {
        Self { kind, omega }
    }

    pub fn retarded(omega: f64) -> Self {
        Self::new(KernelKind::Retarded, omega)
    }

    pub fn advanced(omega: f64) -> Self {
        Self::new(KernelKind::Advanced, omega)
    }

    pub fn on_shell(omega: f64) -> Self {
        Self::new(KernelKind::OnShell, omega)
    }

    pub fn value(&self, t: f64, t_prime: f64) -> Complex64 {
        kernel_value(self.kind, self.omega, t, t_prime)
    }
}

/// `G(t - t')` for the chosen kind.
pub fn kernel_value(kind: KernelKind, omega: f64, t: f64, t_prime: f64) -> Complex64 {
    let tau = t - t_prime;
    let phase = Complex64::from_polar(1.0, -omega * tau);
    let i = Complex64::i();
    match kind {
        KernelKind::Retarded if tau >= 0.0 => -i * phase,
        KernelKind::Advanced if tau < 0.0 => i * phase,
        KernelKind::OnShell => phase,
        _ => Complex64::new(0.0, 0.0),
    }
}

/// `∫∫ K_l*(t) G(t - t') K_r(t') dt dt'` by the trapezoid rule.
pub fn bilinear(left: &ComplexSignal, kernel: &Propagator, right: &ComplexSignal) -> Result<Complex64> {
    bilinear_with(left, kernel, right, Quadrature::Trapezoid)
}

pub fn bilinear_with(
    left: &ComplexSignal,
    kernel: &Propagator,
    right: &ComplexSignal,
    rule: Quadrature,
) -> Result<Complex64> {
    left.ensure_same_grid(right)?;
    let left_bar: Vec<Complex64> = left.samples().iter().map(|z| z.conj()).collect();
    Ok(bilinear_raw(&left_bar, right.samples(), left.grid(), kernel, rule))
}

/// Bilinear form with the left factor supplied already conjugated.
///
/// Treating `K*` as an independent array is what functional differentiation
/// with respect to `K*` needs. Runs in linear time: the kernel factorises as
/// `e^{-iωt} e^{iωt'}`, so the inner integral is a running sum.
pub fn bilinear_raw(
    left_bar: &[Complex64],
    right: &[Complex64],
    grid: &TimeGrid,
    kernel: &Propagator,
    rule: Quadrature,
) -> Complex64 {
    let n = grid.n;
    debug_assert!(left_bar.len() == n && right.len() == n);
    let w = quadrature_weights(n, grid.dt, rule);
    let e: Vec<Complex64> = (0..n)
        .map(|i| Complex64::from_polar(1.0, kernel.omega * (i as f64 * grid.dt)))
        .collect();
    let i_unit = Complex64::i();

    match rule {
        Quadrature::Trapezoid => {
            let a: Vec<Complex64> = (0..n).map(|j| right[j] * e[j] * w[j]).collect();
            let b: Vec<Complex64> = (0..n).map(|j| left_bar[j] * e[j].conj() * w[j]).collect();
            match kernel.kind {
                KernelKind::Retarded => {
                    let mut prefix = Complex64::new(0.0, 0.0);
                    let mut acc = Complex64::new(0.0, 0.0);
                    for j in 0..n {
                        acc += b[j] * (prefix + a[j] * 0.5);
                        prefix += a[j];
                    }
                    -i_unit * acc
                }
                KernelKind::Advanced => {
                    let mut suffix = Complex64::new(0.0, 0.0);
                    let mut acc = Complex64::new(0.0, 0.0);
                    for j in (0..n).rev() {
                        acc += b[j] * (suffix + a[j] * 0.5);
                        suffix += a[j];
                    }
                    i_unit * acc
                }
                KernelKind::OnShell => {
                    let sa: Complex64 = a.iter().sum();
                    let sb: Complex64 = b.iter().sum();
                    sa * sb
                }
            }
        }
        Quadrature::Simpson => {
            let f: Vec<Complex64> = (0..n).map(|j| right[j] * e[j]).collect();
            let c = cumulative_integral(&f, grid.dt, rule);
            let total = c[n - 1];
            let outer = |g: &dyn Fn(usize) -> Complex64| -> Complex64 {
                (0..n).map(|j| left_bar[j] * e[j].conj() * w[j] * g(j)).sum()
            };
            match kernel.kind {
                KernelKind::Retarded => -i_unit * outer(&|j| c[j]),
                KernelKind::Advanced => i_unit * outer(&|j| total - c[j]),
                KernelKind::OnShell => outer(&|_| total),
            }
        }
    }
}

/// `y(t) = ∫ G_r(t - t') K(t') dt'`, the driven response that starts from rest.
pub fn retarded_response(k: &ComplexSignal, omega: f64, rule: Quadrature) -> ComplexSignal {
    let g = k.grid();
    let e: Vec<Complex64> = (0..g.n)
        .map(|i| Complex64::from_polar(1.0, omega * (i as f64 * g.dt)))
        .collect();
    let f: Vec<Complex64> = k.samples().iter().zip(&e).map(|(z, p)| z * p).collect();
    let c = cumulative_integral(&f, g.dt, rule);
    let samples = c
        .iter()
        .zip(&e)
        .map(|(ci, p)| -Complex64::i() * p.conj() * ci)
        .collect();
    ComplexSignal::new(*g, samples).expect("finite response")
}
