//! Brute-force reference: the driven oscillator propagated in a truncated
//! number basis.
//!
//! `H(t) = ω y†y + K(t) y† + K*(t) y` is tridiagonal in the number basis. Each
//! grid cell is advanced with a fourth-order commutator-free exponential
//! integrator on the two Gauss nodes of the cell, with the source linearly
//! interpolated between samples. The exponentials are Taylor series applied
//! directly to the state block, so no dense matrix exponential is needed.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::keldysh::{InitialState, KeldyshScenario};
use crate::signal::ComplexSignal;

pub const DEFAULT_TRUNCATION: usize = 64;
pub const MAX_TRUNCATION: usize = 256;
/// Top levels whose population is reported as leakage.
const LEAKAGE_LEVELS: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleConfig {
    pub n_trunc: usize,
    pub substeps: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self {
            n_trunc: DEFAULT_TRUNCATION,
            substeps: 1,
        }
    }
}

impl OracleConfig {
    pub fn new(n_trunc: usize, substeps: usize) -> Result<Self> {
        let c = Self { n_trunc, substeps };
        c.validate()?;
        Ok(c)
    }

    fn validate(&self) -> Result<()> {
        if self.n_trunc < LEAKAGE_LEVELS + 2 || self.n_trunc > MAX_TRUNCATION {
            return Err(Error::InvalidArgument(format!(
                "n_trunc must lie in [{}, {MAX_TRUNCATION}], got {}",
                LEAKAGE_LEVELS + 2,
                self.n_trunc
            )));
        }
        if self.substeps == 0 {
            return Err(Error::InvalidArgument("substeps must be at least 1".into()));
        }
        Ok(())
    }
}

/// `H` at one instant with the source value `k`.
#[derive(Clone, Debug)]
struct Tridiagonal {
    diag: Vec<f64>,
    /// `⟨n+1|H|n⟩ = √(n+1) K`
    lower: Vec<Complex64>,
}

impl Tridiagonal {
    fn new(omega: f64, k: Complex64, n: usize) -> Self {
        Self {
            diag: (0..n).map(|m| m as f64 * omega).collect(),
            lower: (0..n - 1).map(|m| k * ((m + 1) as f64).sqrt()).collect(),
        }
    }

    fn norm_bound(&self) -> f64 {
        let d = self.diag.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        let o = self.lower.iter().fold(0.0f64, |a, b| a.max(b.norm()));
        d + 2.0 * o
    }

    /// `out = H x`, column by column.
    fn apply(&self, x: &DMatrix<Complex64>, out: &mut DMatrix<Complex64>) {
        let n = self.diag.len();
        for c in 0..x.ncols() {
            let xc = x.column(c);
            let mut oc = out.column_mut(c);
            for r in 0..n {
                let mut v = xc[r] * self.diag[r];
                if r > 0 {
                    v += self.lower[r - 1] * xc[r - 1];
                }
                if r + 1 < n {
                    v += self.lower[r].conj() * xc[r + 1];
                }
                oc[r] = v;
            }
        }
    }

    fn dense(&self) -> DMatrix<Complex64> {
        let n = self.diag.len();
        let mut h = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
        for r in 0..n {
            h[(r, r)] = Complex64::new(self.diag[r], 0.0);
            if r + 1 < n {
                h[(r + 1, r)] = self.lower[r];
                h[(r, r + 1)] = self.lower[r].conj();
            }
        }
        h
    }
}

/// `x ← exp(-i h H) x` by a scaled Taylor series whose length is fixed in
/// advance from a norm bound.
fn exp_apply(h_op: &Tridiagonal, h: f64, x: &mut DMatrix<Complex64>, scratch: &mut [DMatrix<Complex64>; 2]) {
    let theta = h * h_op.norm_bound();
    let pieces = (theta / 0.5).ceil().max(1.0) as usize;
    let step = h / pieces as f64;
    let theta_piece = theta / pieces as f64;
    let mut terms = 1;
    let mut bound = theta_piece;
    while bound > 1e-18 && terms < 40 {
        terms += 1;
        bound *= theta_piece / terms as f64;
    }
    let [term, next] = scratch;
    for _ in 0..pieces {
        term.copy_from(x);
        for k in 1..=terms {
            h_op.apply(term, next);
            let f = Complex64::new(0.0, -step / k as f64);
            for (t, s) in term.iter_mut().zip(next.iter()) {
                *t = s * f;
            }
            *x += &*term;
        }
    }
}

/// Matrix of `H(t)`; the source is linearly interpolated between samples.
pub fn hamiltonian_at(t: f64, k: &ComplexSignal, omega: f64, n_trunc: usize) -> Result<DMatrix<Complex64>> {
    OracleConfig::new(n_trunc, 1)?;
    Ok(Tridiagonal::new(omega, k.value_at(t)?, n_trunc).dense())
}

const C1: f64 = 0.5 - 0.288_675_134_594_812_9; // 1/2 - √3/6
const C2: f64 = 0.5 + 0.288_675_134_594_812_9;
const A_EARLY: f64 = 0.538_675_134_594_812_9; // (3 + 2√3)/12
const A_LATE: f64 = -0.038_675_134_594_812_9; // (3 - 2√3)/12

/// Propagate the columns of `x` from the first grid time to node `stop`.
fn propagate(k: &ComplexSignal, omega: f64, cfg: &OracleConfig, x: &mut DMatrix<Complex64>, stop: usize) -> Result<()> {
    cfg.validate()?;
    if !(omega.is_finite() && omega > 0.0) {
        return Err(Error::InvalidArgument(format!("omega must be positive, got {omega}")));
    }
    let g = k.grid();
    let s = k.samples();
    let h = g.dt / cfg.substeps as f64;
    let mut scratch = [x.clone(), x.clone()];
    for cell in 0..stop.min(g.n - 1) {
        let (k0, k1) = (s[cell], s[cell + 1]);
        for sub in 0..cfg.substeps {
            let base = sub as f64 / cfg.substeps as f64;
            let frac = |c: f64| base + c / cfg.substeps as f64;
            let ka = k0 + (k1 - k0) * frac(C1);
            let kb = k0 + (k1 - k0) * frac(C2);
            // Both exponentials carry half of the free part.
            let first = Tridiagonal::new(0.5 * omega, ka * A_EARLY + kb * A_LATE, cfg.n_trunc);
            exp_apply(&first, h, x, &mut scratch);
            let second = Tridiagonal::new(0.5 * omega, ka * A_LATE + kb * A_EARLY, cfg.n_trunc);
            exp_apply(&second, h, x, &mut scratch);
        }
    }
    Ok(())
}

fn basis_block(n_trunc: usize, cols: usize) -> DMatrix<Complex64> {
    let mut x = DMatrix::from_element(n_trunc, cols, Complex64::new(0.0, 0.0));
    for c in 0..cols {
        x[(c, c)] = Complex64::new(1.0, 0.0);
    }
    x
}

fn column_leakage(x: &DMatrix<Complex64>, c: usize) -> f64 {
    let n = x.nrows();
    (n - LEAKAGE_LEVELS..n).map(|r| x[(r, c)].norm_sqr()).sum()
}

fn unitarity_defect(x: &DMatrix<Complex64>) -> f64 {
    let gram = x.adjoint() * x;
    let mut worst = 0.0f64;
    for r in 0..gram.nrows() {
        for c in 0..gram.ncols() {
            let target = if r == c { 1.0 } else { 0.0 };
            worst = worst.max((gram[(r, c)] - target).norm());
        }
    }
    worst
}

/// Evolution operator over the whole grid, with its diagnostics.
#[derive(Clone, Debug)]
pub struct Propagation {
    pub u: DMatrix<Complex64>,
    pub unitarity_defect: f64,
    /// Population in the top levels of `U|0⟩`.
    pub leakage: f64,
}

pub fn evolve(k: &ComplexSignal, omega: f64, cfg: &OracleConfig) -> Result<Propagation> {
    cfg.validate()?;
    let mut u = basis_block(cfg.n_trunc, cfg.n_trunc);
    propagate(k, omega, cfg, &mut u, k.grid().n - 1)?;
    Ok(Propagation {
        unitarity_defect: unitarity_defect(&u),
        leakage: column_leakage(&u, 0),
        u,
    })
}

/// `U|0⟩` over the whole grid.
pub fn evolve_vacuum(k: &ComplexSignal, omega: f64, cfg: &OracleConfig) -> Result<(Vec<Complex64>, f64)> {
    let mut x = basis_block(cfg.n_trunc, 1);
    propagate(k, omega, cfg, &mut x, k.grid().n - 1)?;
    let leak = column_leakage(&x, 0);
    Ok((x.column(0).iter().copied().collect(), leak))
}

/// Occupation weights of the initial ensemble; unnormalised.
fn initial_weights(initial: &InitialState, omega: f64, n_trunc: usize) -> Result<Vec<Complex64>> {
    let cap = n_trunc - LEAKAGE_LEVELS;
    let decaying = |ratio: Complex64| -> Result<Vec<Complex64>> {
        let mut w = vec![Complex64::new(1.0, 0.0)];
        let mut cur = Complex64::new(1.0, 0.0);
        while w.len() < cap {
            cur *= ratio;
            if cur.norm() < 1e-17 {
                return Ok(w);
            }
            w.push(cur);
        }
        Err(Error::Unresolved(format!(
            "initial ensemble still has weight {:.2e} at level {cap}; raise n_trunc",
            cur.norm()
        )))
    };
    match *initial {
        InitialState::Vacuum => Ok(vec![Complex64::new(1.0, 0.0)]),
        InitialState::Number { n } => {
            if n as usize >= cap {
                return Err(Error::Unresolved(format!(
                    "number state {n} too close to truncation {n_trunc}"
                )));
            }
            let mut w = vec![Complex64::new(0.0, 0.0); n as usize + 1];
            w[n as usize] = Complex64::new(1.0, 0.0);
            Ok(w)
        }
        InitialState::Thermal { beta } => {
            if !(beta > 0.0) {
                return Err(Error::Divergent(format!("thermal trace needs beta > 0, got {beta}")));
            }
            decaying(Complex64::new((-beta * omega).exp(), 0.0))
        }
        InitialState::ComplexTau { tau } => {
            if !(tau.im < 0.0) {
                return Err(Error::InvalidArgument(format!("need Im τ < 0, got {tau}")));
            }
            decaying((-Complex64::i() * omega * tau).exp())
        }
    }
}

fn evolved_block(
    k: &ComplexSignal,
    omega: f64,
    cfg: &OracleConfig,
    cols: usize,
    stop: usize,
) -> Result<DMatrix<Complex64>> {
    let mut x = basis_block(cfg.n_trunc, cols);
    propagate(k, omega, cfg, &mut x, stop)?;
    Ok(x)
}

/// Closed-time-path trace `Σ w_n ⟨n|U₋† U₊|n⟩ / Σ w_n`.
pub fn time_cycle_trace(s: &KeldyshScenario, cfg: &OracleConfig) -> Result<Complex64> {
    let w = initial_weights(&s.initial, s.omega, cfg.n_trunc)?;
    let last = s.k_plus.grid().n - 1;
    let up = evolved_block(&s.k_plus, s.omega, cfg, w.len(), last)?;
    let um = evolved_block(&s.k_minus, s.omega, cfg, w.len(), last)?;
    let mut num = Complex64::new(0.0, 0.0);
    for (n, wn) in w.iter().enumerate() {
        if *wn == Complex64::new(0.0, 0.0) {
            continue;
        }
        num += wn * um.column(n).dotc(&up.column(n));
    }
    Ok(num / w.iter().sum::<Complex64>())
}

/// `tr[W U₋†U₊ y] / tr[W U₋†U₊]` with `W = e^{-iωNτ}`: the ensemble value of
/// the lowering operator at the start of the cycle.
pub fn boundary_lowering(s: &KeldyshScenario, cfg: &OracleConfig) -> Result<Complex64> {
    let w = initial_weights(&s.initial, s.omega, cfg.n_trunc)?;
    let last = s.k_plus.grid().n - 1;
    let up = evolved_block(&s.k_plus, s.omega, cfg, w.len(), last)?;
    let um = evolved_block(&s.k_minus, s.omega, cfg, w.len(), last)?;
    let mut with_y = Complex64::new(0.0, 0.0);
    let mut plain = Complex64::new(0.0, 0.0);
    for n in 0..w.len() {
        plain += w[n] * um.column(n).dotc(&up.column(n));
        if n > 0 {
            with_y += w[n] * (n as f64).sqrt() * um.column(n).dotc(&up.column(n - 1));
        }
    }
    Ok(with_y / plain)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Observable {
    Number,
    NumberSquared,
    NumberAt {
        t: f64,
    },
    /// Ensemble average of each initial level's own variance of `N`.
    ConditionalVariance,
}

/// Ensemble average of an observable after driving with `K₊`.
pub fn observable_average(s: &KeldyshScenario, obs: Observable, cfg: &OracleConfig) -> Result<f64> {
    if matches!(s.initial, InitialState::ComplexTau { .. }) {
        return Err(Error::Unsupported("observables need a real ensemble".into()));
    }
    let w = initial_weights(&s.initial, s.omega, cfg.n_trunc)?;
    let grid = s.k_plus.grid();
    let stop = match obs {
        Observable::NumberAt { t } => grid.index_of(t)?,
        _ => grid.n - 1,
    };
    let x = evolved_block(&s.k_plus, s.omega, cfg, w.len(), stop)?;
    let mut num = 0.0;
    let mut den = 0.0;
    for (c, wc) in w.iter().enumerate() {
        let wc = wc.re;
        if wc == 0.0 {
            continue;
        }
        let (mut m1, mut m2) = (0.0, 0.0);
        for r in 0..x.nrows() {
            let p = x[(r, c)].norm_sqr();
            m1 += r as f64 * p;
            m2 += (r * r) as f64 * p;
        }
        num += wc
            * match obs {
                Observable::Number | Observable::NumberAt { .. } => m1,
                Observable::NumberSquared => m2,
                Observable::ConditionalVariance => m2 - m1 * m1,
            };
        den += wc;
    }
    Ok(num / den)
}

/// Ensemble-weighted population of the top levels after the drive.
pub fn ensemble_leakage(s: &KeldyshScenario, cfg: &OracleConfig) -> Result<f64> {
    let w = initial_weights(&s.initial, s.omega, cfg.n_trunc)?;
    let x = evolved_block(&s.k_plus, s.omega, cfg, w.len(), s.k_plus.grid().n - 1)?;
    let den: f64 = w.iter().map(|z| z.norm()).sum();
    Ok((0..w.len()).map(|c| w[c].norm() * column_leakage(&x, c)).sum::<f64>() / den)
}

/// Closed form against oracle, in the shape written to comparison reports.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleComparison {
    pub closed_form: Complex64,
    pub oracle: Complex64,
    pub abs_err: f64,
    pub leakage: f64,
    pub unitarity_defect: f64,
}

impl OracleComparison {
    pub fn new(closed_form: Complex64, oracle: Complex64, leakage: f64, unitarity_defect: f64) -> Self {
        Self {
            closed_form,
            oracle,
            abs_err: (closed_form - oracle).norm(),
            leakage,
            unitarity_defect,
        }
    }
}

/// Vacuum persistence read off the oracle, `⟨0|U|0⟩`, as a comparison record.
pub fn compare_vacuum_persistence(
    k: &ComplexSignal,
    omega: f64,
    closed_form: Complex64,
    cfg: &OracleConfig,
) -> Result<OracleComparison> {
    let mut x = basis_block(cfg.n_trunc, 1);
    propagate(k, omega, cfg, &mut x, k.grid().n - 1)?;
    Ok(OracleComparison::new(
        closed_form,
        x[(0, 0)],
        column_leakage(&x, 0),
        unitarity_defect(&x),
    ))
}
