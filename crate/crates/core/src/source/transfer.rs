//! Transfer-matrix reflection and transmission for piecewise-constant
//! potentials with point interactions.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::scattering::{Incidence, PotentialSpec};
use crate::error::{Error, Result};

/// A change of the potential at a point, scanned left to right from `V = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Interface {
    /// The potential becomes `v_right` to the right of `at`.
    Step { at: f64, v_right: f64 },
    /// `strength · δ(x - at)`.
    Delta { at: f64, strength: f64 },
}

impl Interface {
    fn at(&self) -> f64 {
        match *self {
            Self::Step { at, .. } | Self::Delta { at, .. } => at,
        }
    }
}

pub fn interfaces(v: &PotentialSpec) -> Result<Vec<Interface>> {
    v.validate()?;
    match *v {
        PotentialSpec::Delta { strength, position } => Ok(vec![Interface::Delta { at: position, strength }]),
        PotentialSpec::SquareWell { depth, width, center } => Ok(vec![
            Interface::Step {
                at: center - width / 2.0,
                v_right: -depth,
            },
            Interface::Step {
                at: center + width / 2.0,
                v_right: 0.0,
            },
        ]),
        _ => Err(Error::Unsupported(
            "transfer matrices need a piecewise-constant potential".into(),
        )),
    }
}

/// `(r, t)` for a wave incident from the left, from the matching conditions
/// propagated right to left.
pub fn piecewise_coefficients(layers: &[Interface], energy: f64, m: f64) -> Result<(Complex64, Complex64)> {
    if !(energy > 0.0 && m > 0.0) {
        return Err(Error::InvalidArgument("energy and mass must be positive".into()));
    }
    if layers.windows(2).any(|w| w[1].at() < w[0].at()) {
        return Err(Error::InvalidArgument("interfaces must be ordered".into()));
    }
    // Potential in each region, region 0 being the far left.
    let mut v = vec![0.0];
    for l in layers {
        let last = *v.last().unwrap();
        v.push(match *l {
            Interface::Step { v_right, .. } => v_right,
            Interface::Delta { .. } => last,
        });
    }
    if *v.last().unwrap() != 0.0 {
        return Err(Error::InvalidArgument(
            "the potential must vanish on the far right".into(),
        ));
    }
    let i = Complex64::i();
    let q: Vec<Complex64> = v
        .iter()
        .map(|vj| Complex64::new(2.0 * m * (energy - vj), 0.0).sqrt())
        .collect();
    if q.iter().any(|z| z.norm() < 1e-12) {
        return Err(Error::Singular("energy coincides with a region threshold".into()));
    }
    // ψ = A e^{iqx} + B e^{-iqx}; start with a pure outgoing wave on the right.
    let (mut a, mut b) = (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0));
    for (j, l) in layers.iter().enumerate().rev() {
        let x = l.at();
        let (ql, qr) = (q[j], q[j + 1]);
        let ep = (i * qr * x).exp();
        let psi = a * ep + b / ep;
        let mut dpsi = i * qr * (a * ep - b / ep);
        if let Interface::Delta { strength, .. } = *l {
            dpsi -= 2.0 * m * strength * psi;
        }
        let el = (i * ql * x).exp();
        a = (psi + dpsi / (i * ql)) / 2.0 / el;
        b = (psi - dpsi / (i * ql)) / 2.0 * el;
    }
    Ok((b / a, Complex64::new(1.0, 0.0) / a))
}

/// Coefficients for either incidence; right incidence mirrors the potential.
pub fn transfer_coefficients(
    v: &PotentialSpec,
    energy: f64,
    m: f64,
    incidence: Incidence,
) -> Result<(Complex64, Complex64)> {
    let mut layers = interfaces(v)?;
    if incidence == Incidence::Right {
        let mut mirrored = Vec::with_capacity(layers.len());
        let mut regions = vec![0.0];
        for l in &layers {
            let last = *regions.last().unwrap();
            regions.push(match *l {
                Interface::Step { v_right, .. } => v_right,
                Interface::Delta { .. } => last,
            });
        }
        for (j, l) in layers.iter().enumerate().rev() {
            mirrored.push(match *l {
                Interface::Step { at, .. } => Interface::Step {
                    at: -at,
                    v_right: regions[j],
                },
                Interface::Delta { at, strength } => Interface::Delta { at: -at, strength },
            });
        }
        layers = mirrored;
    }
    piecewise_coefficients(&layers, energy, m)
}
