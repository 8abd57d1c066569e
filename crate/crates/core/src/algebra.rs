//! Exact matrix algebra for relativistic wave equations: Majorana gamma
//! matrices, the symmetry census behind spin and statistics, and the
//! Kemmer-Duffin matrices for spin 0 and spin 1.
//!
//! Entries are Gaussian rationals, so every identity is checked exactly.

use std::fmt;

use num_complex::Complex;
use num_rational::Rational64;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Gaussian rational.
pub type Q = Complex<Rational64>;

/// Metric `diag(-1, 1, 1, 1)`.
pub const METRIC: [i64; 4] = [-1, 1, 1, 1];

fn q(re: i64, im: i64) -> Q {
    Complex::new(Rational64::from_integer(re), Rational64::from_integer(im))
}

fn qr(r: Rational64) -> Q {
    Complex::new(r, Rational64::zero())
}

#[derive(Clone, PartialEq, Eq)]
pub struct QMatrix {
    n: usize,
    data: Vec<Q>,
}

impl fmt::Debug for QMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.n {
            let row: Vec<String> = (0..self.n).map(|j| format!("{}", self[(i, j)])).collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl std::ops::Index<(usize, usize)> for QMatrix {
    type Output = Q;
    fn index(&self, (i, j): (usize, usize)) -> &Q {
        &self.data[i * self.n + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for QMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Q {
        &mut self.data[i * self.n + j]
    }
}

impl QMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![Q::zero(); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, |i, j| if i == j { Q::one() } else { Q::zero() })
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> Q) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    /// Integer matrix from rows.
    pub fn from_int_rows(rows: &[&[i64]]) -> Self {
        Self::from_fn(rows.len(), |i, j| q(rows[i][j], 0))
    }

    /// Unit matrix `E_{ij}`.
    pub fn unit(n: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(n);
        m[(i, j)] = Q::one();
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn mul(&self, o: &Self) -> Self {
        assert_eq!(self.n, o.n);
        let n = self.n;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * o[(k, j)];
                }
            }
        }
        out
    }

    pub fn add(&self, o: &Self) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().zip(&o.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().zip(&o.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn scale(&self, s: Q) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().map(|a| a * s).collect(),
        }
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.n, |i, j| self[(j, i)])
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.n, |i, j| self[(j, i)].conj())
    }

    pub fn anticommutator(&self, o: &Self) -> Self {
        self.mul(o).add(&o.mul(self))
    }

    pub fn commutator(&self, o: &Self) -> Self {
        self.mul(o).sub(&o.mul(self))
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|z| z.is_zero())
    }

    pub fn is_symmetric(&self) -> bool {
        *self == self.transpose()
    }

    pub fn is_antisymmetric(&self) -> bool {
        self.add(&self.transpose()).is_zero()
    }

    pub fn is_real(&self) -> bool {
        self.data.iter().all(|z| z.im.is_zero())
    }

    pub fn is_imaginary(&self) -> bool {
        self.data.iter().all(|z| z.re.is_zero())
    }

    /// Largest real or imaginary part in absolute value.
    pub fn max_abs(&self) -> Rational64 {
        self.data
            .iter()
            .flat_map(|z| [z.re.abs(), z.im.abs()])
            .fold(Rational64::zero(), |a, b| if b > a { b } else { a })
    }

    /// Exact row reduction; returns the rank and the determinant.
    fn eliminate(&self) -> (usize, Q) {
        let n = self.n;
        let mut a = self.data.clone();
        let mut det = Q::one();
        let mut rank = 0;
        for col in 0..n {
            let Some(p) = (rank..n).find(|&r| !a[r * n + col].is_zero()) else {
                det = Q::zero();
                continue;
            };
            if p != rank {
                for j in 0..n {
                    a.swap(p * n + j, rank * n + j);
                }
                det = -det;
            }
            let piv = a[rank * n + col];
            det *= piv;
            for r in rank + 1..n {
                let f = a[r * n + col] / piv;
                if !f.is_zero() {
                    for j in col..n {
                        let v = a[rank * n + j];
                        a[r * n + j] -= f * v;
                    }
                }
            }
            rank += 1;
        }
        (rank, if rank < n { Q::zero() } else { det })
    }

    pub fn rank(&self) -> usize {
        self.eliminate().0
    }

    pub fn determinant(&self) -> Q {
        self.eliminate().1
    }

    /// Kronecker product.
    pub fn kron(&self, o: &Self) -> Self {
        let (n, m) = (self.n, o.n);
        Self::from_fn(n * m, |i, j| self[(i / m, j / m)] * o[(i % m, j % m)])
    }

    /// Block-diagonal embedding `diag(self, 1, ..., 1)` in dimension `n`.
    pub fn embed(&self, n: usize) -> Self {
        Self::from_fn(n, |i, j| {
            if i < self.n && j < self.n {
                self[(i, j)]
            } else if i == j {
                Q::one()
            } else {
                Q::zero()
            }
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AlgebraRep {
    pub name: String,
    pub matrices: Vec<QMatrix>,
    pub metric: [i64; 4],
}

impl AlgebraRep {
    pub fn dimension(&self) -> usize {
        self.matrices.first().map_or(0, QMatrix::dim)
    }

    /// `Σ_μ M^μ p_μ` for a covariant momentum.
    pub fn contract(&self, p: &[Q; 4]) -> QMatrix {
        let n = self.dimension();
        self.matrices
            .iter()
            .zip(p)
            .fold(QMatrix::zeros(n), |acc, (m, pm)| acc.add(&m.scale(*pm)))
    }
}

fn sigma1() -> QMatrix {
    QMatrix::from_int_rows(&[&[0, 1], &[1, 0]])
}

fn sigma3() -> QMatrix {
    QMatrix::from_int_rows(&[&[1, 0], &[0, -1]])
}

/// Real antisymmetric `iσ₂`.
fn epsilon() -> QMatrix {
    QMatrix::from_int_rows(&[&[0, 1], &[-1, 0]])
}

/// Purely imaginary `γ^μ = iΓ^μ` with `Γ⁰` antisymmetric and `Γ^k` symmetric.
pub fn build_majorana_gammas() -> AlgebraRep {
    let one = QMatrix::identity(2);
    let real = [
        epsilon().kron(&sigma1()),
        sigma1().kron(&one),
        sigma3().kron(&one),
        epsilon().kron(&epsilon()),
    ];
    AlgebraRep {
        name: "majorana".into(),
        matrices: real.iter().map(|r| r.scale(q(0, 1))).collect(),
        metric: METRIC,
    }
}

/// `γ⁵ = γ⁰γ¹γ²γ³`.
pub fn gamma5(rep: &AlgebraRep) -> QMatrix {
    rep.matrices[1..]
        .iter()
        .fold(rep.matrices[0].clone(), |acc, m| acc.mul(m))
}

/// Index pairs violating `½{γ^μ, γ^ν} = -g^{μν}`.
pub fn clifford_violations(rep: &AlgebraRep) -> Vec<(usize, usize)> {
    let n = rep.dimension();
    let mut bad = Vec::new();
    for mu in 0..4 {
        for nu in mu..4 {
            let lhs = rep.matrices[mu].anticommutator(&rep.matrices[nu]);
            let g = if mu == nu { -rep.metric[mu] } else { 0 };
            if lhs != QMatrix::identity(n).scale(q(2 * g, 0)) {
                bad.push((mu, nu));
            }
        }
    }
    bad
}

/// Counts symmetric and antisymmetric matrices.
pub fn symmetry_census(matrices: &[QMatrix]) -> Result<(usize, usize)> {
    let mut sym = 0;
    let mut anti = 0;
    for (k, m) in matrices.iter().enumerate() {
        if m.is_symmetric() {
            sym += 1;
        } else if m.is_antisymmetric() {
            anti += 1;
        } else {
            return Err(Error::Classification(format!("matrix {k} has no definite symmetry")));
        }
    }
    Ok((sym, anti))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Symmetry {
    Symmetric,
    Antisymmetric,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    Anticommute,
    Commute,
}

/// One scalar equation: a real or imaginary part of an entry of `{X, A}` or `[X, A]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Constraint {
    pub relation: Relation,
    pub generator: usize,
    pub row: usize,
    pub col: usize,
    pub imaginary_part: bool,
}

/// Real matrices of fixed symmetry satisfying the requested relations.
#[derive(Clone, Debug)]
pub struct KernelReport {
    pub unknowns: usize,
    pub rank: usize,
    pub kernel_dim: usize,
    pub basis: Vec<QMatrix>,
    /// Equations whose coefficient rows are linearly independent. When the
    /// kernel is trivial these equations alone already force `X = 0`.
    pub pivots: Vec<Constraint>,
}

fn symmetric_basis(n: usize, sym: Symmetry) -> Vec<QMatrix> {
    let mut out = Vec::new();
    for i in 0..n {
        let start = if sym == Symmetry::Symmetric { i } else { i + 1 };
        for j in start..n {
            let mut m = QMatrix::unit(n, i, j);
            if i != j {
                let s = if sym == Symmetry::Symmetric { 1 } else { -1 };
                m[(j, i)] = q(s, 0);
            }
            out.push(m);
        }
    }
    out
}

/// Reduces rows to echelon form; returns the pivot columns and the reduced rows.
fn rref(rows: &mut Vec<Vec<Rational64>>, cols: usize) -> Vec<(usize, usize)> {
    let mut pivots = Vec::new();
    let mut r = 0;
    let mut origin: Vec<usize> = (0..rows.len()).collect();
    for c in 0..cols {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else {
            continue;
        };
        rows.swap(r, p);
        origin.swap(r, p);
        let piv = rows[r][c];
        for v in rows[r].iter_mut() {
            *v /= piv;
        }
        for i in 0..rows.len() {
            if i != r && !rows[i][c].is_zero() {
                let f = rows[i][c];
                for j in 0..cols {
                    let v = rows[r][j];
                    rows[i][j] -= f * v;
                }
            }
        }
        pivots.push((c, origin[r]));
        r += 1;
    }
    rows.truncate(r);
    pivots
}

/// All real `X` of the given symmetry with `{X, A} = 0` for each `A` in
/// `anticommute` and `[X, C] = 0` for each `C` in `commute`.
pub fn constrained_kernel(n: usize, sym: Symmetry, anticommute: &[QMatrix], commute: &[QMatrix]) -> KernelReport {
    let basis = symmetric_basis(n, sym);
    let unknowns = basis.len();
    let mut rows: Vec<Vec<Rational64>> = Vec::new();
    let mut labels = Vec::new();
    let gens = anticommute
        .iter()
        .map(|a| (Relation::Anticommute, a))
        .chain(commute.iter().map(|c| (Relation::Commute, c)));
    for (g, (rel, a)) in gens.enumerate() {
        let images: Vec<QMatrix> = basis
            .iter()
            .map(|b| match rel {
                Relation::Anticommute => b.anticommutator(a),
                Relation::Commute => b.commutator(a),
            })
            .collect();
        for row in 0..n {
            for col in 0..n {
                for imaginary_part in [false, true] {
                    let coeffs: Vec<Rational64> = images
                        .iter()
                        .map(|m| {
                            if imaginary_part {
                                m[(row, col)].im
                            } else {
                                m[(row, col)].re
                            }
                        })
                        .collect();
                    if coeffs.iter().any(|c| !c.is_zero()) {
                        rows.push(coeffs);
                        labels.push(Constraint {
                            relation: rel,
                            generator: g,
                            row,
                            col,
                            imaginary_part,
                        });
                    }
                }
            }
        }
    }
    let mut reduced = rows.clone();
    let pivot_cols = rref(&mut reduced, unknowns);
    let rank = pivot_cols.len();
    // Independent equations, selected greedily from the original list.
    let mut chosen: Vec<Vec<Rational64>> = Vec::new();
    let mut pivots = Vec::new();
    for (row, label) in rows.iter().zip(&labels) {
        let mut trial = chosen.clone();
        trial.push(row.clone());
        if rref(&mut trial, unknowns).len() > chosen.len() {
            chosen.push(row.clone());
            pivots.push(*label);
            if chosen.len() == rank {
                break;
            }
        }
    }
    // Null-space vectors from the reduced rows.
    let pivot_set: Vec<usize> = pivot_cols.iter().map(|p| p.0).collect();
    let mut kernel = Vec::new();
    for free in (0..unknowns).filter(|c| !pivot_set.contains(c)) {
        let mut x = vec![Rational64::zero(); unknowns];
        x[free] = Rational64::one();
        for (r, &pc) in pivot_set.iter().enumerate() {
            x[pc] = -reduced[r][free];
        }
        let m = basis
            .iter()
            .zip(&x)
            .fold(QMatrix::zeros(n), |acc, (b, c)| acc.add(&b.scale(qr(*c))));
        kernel.push(m);
    }
    KernelReport {
        unknowns,
        rank,
        kernel_dim: kernel.len(),
        basis: kernel,
        pivots,
    }
}

/// Outcome of trying to give `β` the symmetry demanded by each statistics.
#[derive(Clone, Debug)]
pub struct ObstructionReport {
    /// Real symmetric `β` anticommuting with `γ¹, γ², γ³`.
    pub bose: KernelReport,
    /// Imaginary antisymmetric `β = iY` anticommuting with `γ^k` and commuting with `γ⁰`.
    pub fermi: KernelReport,
    /// True when no nonzero Bose-type `β` exists.
    pub contradiction: bool,
    /// True when the Fermi solution is proportional to `γ⁰`.
    pub fermi_beta_is_gamma0: bool,
}

pub fn check_bose_obstruction() -> ObstructionReport {
    let rep = build_majorana_gammas();
    let spatial = &rep.matrices[1..];
    let bose = constrained_kernel(4, Symmetry::Symmetric, spatial, &[]);
    let fermi = constrained_kernel(4, Symmetry::Antisymmetric, spatial, &rep.matrices[..1]);
    let fermi_beta_is_gamma0 = fermi.kernel_dim == 1 && {
        let y = fermi.basis[0].scale(q(0, 1));
        // y ∝ γ⁰ iff y γ⁰ is a multiple of the identity.
        let prod = y.mul(&rep.matrices[0]);
        let c = prod[(0, 0)];
        !c.is_zero() && prod == QMatrix::identity(4).scale(c)
    };
    ObstructionReport {
        contradiction: bose.kernel_dim == 0,
        bose,
        fermi,
        fermi_beta_is_gamma0,
    }
}

/// Two dimensions: with `Γ⁰ = ε` and two symmetric `Γ¹, Γ²` already placed,
/// no third symmetric anticommuting matrix remains.
pub fn degenerate_census_2x2() -> KernelReport {
    constrained_kernel(2, Symmetry::Symmetric, &[epsilon(), sigma1(), sigma3()], &[])
}

/// Kemmer-Duffin `β^μ` for spin 0 (scalar plus vector, 5 components) or
/// spin 1 (vector plus antisymmetric tensor, 10 components).
pub fn build_kemmer_duffin(spin: u8) -> Result<AlgebraRep> {
    let g = METRIC;
    let matrices = match spin {
        0 => (0..4)
            .map(|mu| QMatrix::unit(5, 4, mu).sub(&QMatrix::unit(5, mu, 4).scale(q(g[mu], 0))))
            .collect(),
        1 => {
            let pairs: Vec<(usize, usize)> = (0..4).flat_map(|a| (a + 1..4).map(move |b| (a, b))).collect();
            let t = |a: usize, b: usize| 4 + pairs.iter().position(|&p| p == (a, b)).unwrap();
            (0..4)
                .map(|mu| {
                    let mut m = QMatrix::zeros(10);
                    // Vector rows pick up F_{μλ}.
                    for lam in (0..4).filter(|&l| l != mu) {
                        let (a, b, s) = if mu < lam { (mu, lam, 1) } else { (lam, mu, -1) };
                        m[(lam, t(a, b))] += q(-g[mu] * s, 0);
                    }
                    // Tensor rows pick up δ_{μa} φ_b - δ_{μb} φ_a.
                    for &(a, b) in &pairs {
                        if a == mu {
                            m[(t(a, b), b)] += q(1, 0);
                        }
                        if b == mu {
                            m[(t(a, b), a)] -= q(1, 0);
                        }
                    }
                    m
                })
                .collect()
        }
        _ => return Err(Error::InvalidArgument(format!("spin {spin} not supported; use 0 or 1"))),
    };
    Ok(AlgebraRep {
        name: format!("kemmer-duffin spin {spin}"),
        matrices,
        metric: g,
    })
}

/// Triples violating `β^μβ^σβ^ν + β^νβ^σβ^μ = -g^{μσ}β^ν - g^{νσ}β^μ`.
pub fn kemmer_duffin_violations(rep: &AlgebraRep) -> Vec<(usize, usize, usize)> {
    let b = &rep.matrices;
    let g = |a: usize, c: usize| if a == c { rep.metric[a] } else { 0 };
    let mut bad = Vec::new();
    for mu in 0..4 {
        for sg in 0..4 {
            for nu in 0..4 {
                let lhs = b[mu].mul(&b[sg]).mul(&b[nu]).add(&b[nu].mul(&b[sg]).mul(&b[mu]));
                let rhs = b[nu].scale(q(-g(mu, sg), 0)).add(&b[mu].scale(q(-g(nu, sg), 0)));
                if lhs != rhs {
                    bad.push((mu, sg, nu));
                }
            }
        }
    }
    bad
}

/// Triples where `Σ_perm (β^aβ^bβ^c + g^{ab}β^c)` fails to vanish.
pub fn symmetrized_cubic_violations(rep: &AlgebraRep) -> Vec<(usize, usize, usize)> {
    let b = &rep.matrices;
    let g = |a: usize, c: usize| if a == c { rep.metric[a] } else { 0 };
    let n = rep.dimension();
    let mut bad = Vec::new();
    for i in 0..4 {
        for j in i..4 {
            for k in j..4 {
                let idx = [i, j, k];
                let mut acc = QMatrix::zeros(n);
                for p in [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]] {
                    let (a, bb, c) = (idx[p[0]], idx[p[1]], idx[p[2]]);
                    acc = acc.add(&b[a].mul(&b[bb]).mul(&b[c])).add(&b[c].scale(q(g(a, bb), 0)));
                }
                if !acc.is_zero() {
                    bad.push((i, j, k));
                }
            }
        }
    }
    bad
}

/// `p² = g^{μν} p_μ p_ν`.
pub fn minkowski_square(p: &[Q; 4]) -> Q {
    (0..4).map(|m| p[m] * p[m] * q(METRIC[m], 0)).sum()
}

/// Residual of the minimal polynomial `M³ + p² M` with `M = β^μ p_μ`, and
/// whether the lower-degree candidate `M² + p²` fails (so the cubic is minimal).
#[derive(Clone, Debug, PartialEq)]
pub struct MinimalPolynomialCheck {
    pub max_residual: Rational64,
    pub cubic_is_minimal: bool,
}

pub fn klein_gordon_consistency(rep: &AlgebraRep, samples: &[[i64; 4]]) -> MinimalPolynomialCheck {
    let n = rep.dimension();
    let mut max_residual = Rational64::zero();
    let mut cubic_is_minimal = true;
    for s in samples {
        let p = [q(s[0], 0), q(s[1], 0), q(s[2], 0), q(s[3], 0)];
        let m = rep.contract(&p);
        let p2 = minkowski_square(&p);
        let m2 = m.mul(&m);
        let r = m2.mul(&m).add(&m.scale(p2)).max_abs();
        if r > max_residual {
            max_residual = r;
        }
        if m.is_zero() || m2.add(&QMatrix::identity(n).scale(p2)).is_zero() {
            cubic_is_minimal = false;
        }
    }
    MinimalPolynomialCheck {
        max_residual,
        cubic_is_minimal,
    }
}

/// Boost along x with rapidity parameter `t = tanh(η/2)`: `cosh η = (1+t²)/(1-t²)`,
/// `sinh η = 2t/(1-t²)`. Entries are rational whenever `t` is.
pub fn rational_boost(t: Rational64) -> Result<[[Rational64; 4]; 4]> {
    let one = Rational64::one();
    if t.abs() >= one {
        return Err(Error::InvalidArgument("boost parameter must satisfy |t| < 1".into()));
    }
    let d = one - t * t;
    let ch = (one + t * t) / d;
    let sh = Rational64::from_integer(2) * t / d;
    let z = Rational64::zero();
    Ok([[ch, sh, z, z], [sh, ch, z, z], [z, z, one, z], [z, z, z, one]])
}

/// Checks that the spin-0 similarity `S = diag(Λ, 1)` maps `M(p)` to `M(p')`
/// with `p'_ν = Σ_μ (Λ⁻¹)_{μν} p_μ`, and that `p'² = p²`.
pub fn boost_invariance(t: Rational64, p: [i64; 4]) -> Result<bool> {
    let rep = build_kemmer_duffin(0)?;
    let lam = rational_boost(t)?;
    let inv = rational_boost(-t)?;
    let to_q = |m: &[[Rational64; 4]; 4]| QMatrix::from_fn(4, |i, j| qr(m[i][j])).embed(5);
    let (s, s_inv) = (to_q(&lam), to_q(&inv));
    let pq = [q(p[0], 0), q(p[1], 0), q(p[2], 0), q(p[3], 0)];
    let mut pp = [Q::zero(); 4];
    for (nu, slot) in pp.iter_mut().enumerate() {
        *slot = (0..4).map(|mu| qr(inv[mu][nu]) * pq[mu]).sum();
    }
    let lhs = s.mul(&rep.contract(&pq)).mul(&s_inv);
    Ok(lhs == rep.contract(&pp) && minkowski_square(&pp) == minkowski_square(&pq))
}

/// `A^μ = iα^μ` with `α^μ = γ⁰γ^μ`; returns indices where `A^{μ†} ≠ -A^μ`.
pub fn hermiticity_violations(rep: &AlgebraRep) -> Vec<usize> {
    (0..4)
        .filter(|&mu| {
            let a = rep.matrices[0].mul(&rep.matrices[mu]).scale(q(0, 1));
            a.adjoint() != a.scale(q(-1, 0))
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub name: String,
    pub passed: bool,
    /// Offending index tuples.
    pub failures: Vec<Vec<usize>>,
}

impl IdentityCheck {
    fn new(name: &str, failures: Vec<Vec<usize>>) -> Self {
        Self {
            name: name.into(),
            passed: failures.is_empty(),
            failures,
        }
    }

    fn flag(name: &str, ok: bool) -> Self {
        Self {
            name: name.into(),
            passed: ok,
            failures: Vec::new(),
        }
    }
}

/// Every identity of this module, evaluated once.
pub fn verification_report() -> Result<Vec<IdentityCheck>> {
    let maj = build_majorana_gammas();
    let g5 = gamma5(&maj);
    let mut five = maj.matrices.clone();
    five.push(g5.clone());
    let census = symmetry_census(&five)?;
    let obstruction = check_bose_obstruction();
    let kd0 = build_kemmer_duffin(0)?;
    let kd1 = build_kemmer_duffin(1)?;
    let samples = [[1, 0, 0, 0], [3, 1, -2, 5], [-4, 7, 1, 0], [2, 2, 2, 2]];
    let kg0 = klein_gordon_consistency(&kd0, &samples);
    let kg1 = klein_gordon_consistency(&kd1, &samples);
    let pairs = |v: Vec<(usize, usize)>| v.into_iter().map(|(a, b)| vec![a, b]).collect();
    let triples = |v: Vec<(usize, usize, usize)>| v.into_iter().map(|(a, b, c)| vec![a, b, c]).collect();
    Ok(vec![
        IdentityCheck::new("clifford", pairs(clifford_violations(&maj))),
        IdentityCheck::flag(
            "majorana_reality",
            maj.matrices.iter().all(QMatrix::is_imaginary) && g5.is_real() && g5.is_antisymmetric(),
        ),
        IdentityCheck::flag("census_3_2", census == (3, 2)),
        IdentityCheck::flag("bose_obstruction", obstruction.contradiction),
        IdentityCheck::flag("fermi_beta_is_gamma0", obstruction.fermi_beta_is_gamma0),
        IdentityCheck::new(
            "hermiticity",
            hermiticity_violations(&maj).into_iter().map(|m| vec![m]).collect(),
        ),
        IdentityCheck::new("kemmer_duffin_spin0", triples(kemmer_duffin_violations(&kd0))),
        IdentityCheck::new("kemmer_duffin_spin1", triples(kemmer_duffin_violations(&kd1))),
        IdentityCheck::new("symmetrized_cubic_spin0", triples(symmetrized_cubic_violations(&kd0))),
        IdentityCheck::new("symmetrized_cubic_spin1", triples(symmetrized_cubic_violations(&kd1))),
        IdentityCheck::flag("rank_beta0_spin0_is_2", kd0.matrices[0].rank() == 2),
        IdentityCheck::flag("rank_beta0_spin1_is_6", kd1.matrices[0].rank() == 6),
        IdentityCheck::flag(
            "beta_singular",
            kd0.matrices
                .iter()
                .chain(&kd1.matrices)
                .all(|m| m.determinant().is_zero()),
        ),
        IdentityCheck::flag(
            "minimal_polynomial",
            kg0.max_residual.is_zero() && kg1.max_residual.is_zero() && kg0.cubic_is_minimal,
        ),
        IdentityCheck::flag(
            "boost_invariance",
            boost_invariance(Rational64::new(1, 2), [3, 1, -2, 5])?,
        ),
    ])
}
