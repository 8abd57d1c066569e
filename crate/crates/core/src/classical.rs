//! Classical particles with central interactions, integrated by velocity
//! Verlet, and the conservation laws and time-average theorems checked on
//! the resulting trajectories.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Vec3 = [f64; 3];

/// Collisions are declared when a separation falls below this fraction of its initial value.
pub const COLLISION_FRACTION: f64 = 1e-6;

fn add(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

fn sub(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn scale(a: Vec3, s: f64) -> Vec3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn norm(a: Vec3) -> f64 {
    dot(a, a).sqrt()
}

/// Distance from the origin to the segment `a..b`.
fn segment_distance(a: Vec3, b: Vec3) -> f64 {
    let d = sub(b, a);
    let dd = dot(d, d);
    if dd == 0.0 {
        return norm(a);
    }
    let s = (-dot(a, d) / dd).clamp(0.0, 1.0);
    norm(add(a, scale(d, s)))
}

/// Central potential `V(r)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Potential {
    /// `-k/r`.
    Coulomb { k: f64 },
    /// `k r²/2`.
    Harmonic { k: f64 },
    /// `c rⁿ`.
    PowerLaw { c: f64, n: f64 },
}

impl Potential {
    fn coefficients(&self) -> (f64, f64) {
        match *self {
            Self::Coulomb { k } => (-k, -1.0),
            Self::Harmonic { k } => (0.5 * k, 2.0),
            Self::PowerLaw { c, n } => (c, n),
        }
    }

    pub fn value(&self, r: f64) -> f64 {
        let (c, n) = self.coefficients();
        c * r.powf(n)
    }

    /// Degree of homogeneity, so that `r V'(r) = n V(r)`.
    pub fn exponent(&self) -> f64 {
        self.coefficients().1
    }

    /// Force on the particle at displacement `d` from the centre.
    fn force(&self, d: Vec3) -> Vec3 {
        let r = norm(d);
        let (c, n) = self.coefficients();
        // -∇(c rⁿ) = -c n r^{n-2} d
        scale(d, -c * n * r.powf(n - 2.0))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "potential", rename_all = "snake_case")]
pub enum Interaction {
    /// Each particle feels a fixed centre at the origin.
    External(Potential),
    /// Every pair interacts through `V(|r_a - r_b|)`.
    Pairwise(Potential),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MechSystem {
    pub masses: Vec<f64>,
    pub interaction: Interaction,
    pub positions: Vec<Vec3>,
    pub momenta: Vec<Vec3>,
}

impl MechSystem {
    pub fn validate(&self) -> Result<()> {
        let n = self.masses.len();
        if n == 0 || self.positions.len() != n || self.momenta.len() != n {
            return Err(Error::InvalidArgument(
                "masses, positions and momenta must have equal nonzero length".into(),
            ));
        }
        if self.masses.iter().any(|m| !(m.is_finite() && *m > 0.0)) {
            return Err(Error::InvalidArgument("masses must be positive".into()));
        }
        if self
            .positions
            .iter()
            .chain(&self.momenta)
            .flatten()
            .any(|x| !x.is_finite())
        {
            return Err(Error::InvalidArgument("state must be finite".into()));
        }
        Ok(())
    }

    pub fn total_mass(&self) -> f64 {
        self.masses.iter().sum()
    }

    /// Distances that the collision guard watches.
    fn separations(&self, x: &[Vec3]) -> Vec<f64> {
        self.closest_approaches(x, x)
    }

    /// Smallest value of each watched distance while the positions move
    /// linearly from `x0` to `x1`, as they do during a drift.
    fn closest_approaches(&self, x0: &[Vec3], x1: &[Vec3]) -> Vec<f64> {
        match self.interaction {
            Interaction::External(_) => x0.iter().zip(x1).map(|(&a, &b)| segment_distance(a, b)).collect(),
            Interaction::Pairwise(_) => {
                let mut out = Vec::new();
                for a in 0..x0.len() {
                    for b in a + 1..x0.len() {
                        out.push(segment_distance(sub(x0[a], x0[b]), sub(x1[a], x1[b])));
                    }
                }
                out
            }
        }
    }

    fn forces(&self, x: &[Vec3]) -> Vec<Vec3> {
        let mut f = vec![[0.0; 3]; x.len()];
        match self.interaction {
            Interaction::External(v) => {
                for (fi, &xi) in f.iter_mut().zip(x) {
                    *fi = v.force(xi);
                }
            }
            Interaction::Pairwise(v) => {
                for a in 0..x.len() {
                    for b in a + 1..x.len() {
                        let fab = v.force(sub(x[a], x[b]));
                        f[a] = add(f[a], fab);
                        f[b] = sub(f[b], fab);
                    }
                }
            }
        }
        f
    }

    pub fn kinetic(&self, p: &[Vec3]) -> f64 {
        p.iter()
            .zip(&self.masses)
            .map(|(pi, m)| dot(*pi, *pi) / (2.0 * m))
            .sum()
    }

    pub fn potential(&self, x: &[Vec3]) -> f64 {
        match self.interaction {
            Interaction::External(v) => x.iter().map(|&xi| v.value(norm(xi))).sum(),
            Interaction::Pairwise(v) => {
                let mut e = 0.0;
                for a in 0..x.len() {
                    for b in a + 1..x.len() {
                        e += v.value(norm(sub(x[a], x[b])));
                    }
                }
                e
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub system: MechSystem,
    pub dt: f64,
    pub positions: Vec<Vec<Vec3>>,
    pub momenta: Vec<Vec<Vec3>>,
}

/// Velocity-Verlet integration for `steps` steps.
pub fn integrate(sys: &MechSystem, dt: f64, steps: usize) -> Result<Trajectory> {
    sys.validate()?;
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidArgument(format!("time step must be positive, got {dt}")));
    }
    let thresholds: Vec<f64> = sys
        .separations(&sys.positions)
        .iter()
        .map(|r| COLLISION_FRACTION * r)
        .collect();
    let minv: Vec<f64> = sys.masses.iter().map(|m| 1.0 / m).collect();
    let mut x = sys.positions.clone();
    let mut p = sys.momenta.clone();
    let mut f = sys.forces(&x);
    let mut xs = Vec::with_capacity(steps + 1);
    let mut ps = Vec::with_capacity(steps + 1);
    xs.push(x.clone());
    ps.push(p.clone());
    for step in 1..=steps {
        let before = x.clone();
        for i in 0..x.len() {
            p[i] = add(p[i], scale(f[i], 0.5 * dt));
            x[i] = add(x[i], scale(p[i], dt * minv[i]));
        }
        for (sep, thr) in sys.closest_approaches(&before, &x).into_iter().zip(&thresholds) {
            if sep < *thr || !sep.is_finite() {
                return Err(Error::Collision {
                    step,
                    separation: sep,
                    threshold: *thr,
                });
            }
        }
        f = sys.forces(&x);
        for i in 0..x.len() {
            p[i] = add(p[i], scale(f[i], 0.5 * dt));
        }
        xs.push(x.clone());
        ps.push(p.clone());
    }
    Ok(Trajectory {
        system: sys.clone(),
        dt,
        positions: xs,
        momenta: ps,
    })
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn time(&self, i: usize) -> f64 {
        i as f64 * self.dt
    }

    pub fn energy(&self, i: usize) -> f64 {
        self.system.kinetic(&self.momenta[i]) + self.system.potential(&self.positions[i])
    }

    pub fn angular_momentum(&self, i: usize) -> Vec3 {
        self.positions[i]
            .iter()
            .zip(&self.momenta[i])
            .fold([0.0; 3], |acc, (x, p)| add(acc, cross(*x, *p)))
    }

    pub fn total_momentum(&self, i: usize) -> Vec3 {
        self.momenta[i].iter().fold([0.0; 3], |acc, p| add(acc, *p))
    }

    /// `N = P t - M R`.
    pub fn boost_charge(&self, i: usize) -> Vec3 {
        let mr = self.positions[i]
            .iter()
            .zip(&self.system.masses)
            .fold([0.0; 3], |acc, (x, m)| add(acc, scale(*x, *m)));
        sub(scale(self.total_momentum(i), self.time(i)), mr)
    }

    /// One row every `stride` steps, always including the last state.
    pub fn write_csv(&self, mut out: impl Write, stride: usize) -> std::io::Result<()> {
        let stride = stride.max(1);
        let mut head = vec!["t".to_string()];
        for a in 0..self.system.masses.len() {
            for c in ["x", "y", "z"] {
                head.push(format!("x{a}_{c}"));
            }
            for c in ["x", "y", "z"] {
                head.push(format!("p{a}_{c}"));
            }
        }
        head.extend(["E", "L_x", "L_y", "L_z", "N_x", "N_y", "N_z"].map(String::from));
        writeln!(out, "{}", head.join(","))?;
        let last = self.len() - 1;
        for i in (0..self.len()).filter(|i| i % stride == 0 || *i == last) {
            let mut row = vec![self.time(i)];
            for (x, p) in self.positions[i].iter().zip(&self.momenta[i]) {
                row.extend(x);
                row.extend(p);
            }
            row.push(self.energy(i));
            row.extend(self.angular_momentum(i));
            row.extend(self.boost_charge(i));
            let cells: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
            writeln!(out, "{}", cells.join(","))?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConservationReport {
    pub energy_drift: f64,
    pub angular_momentum_drift: f64,
    pub momentum_drift: f64,
    pub boost_drift: f64,
    /// Largest change of `P` or `L` in a single step.
    pub momentum_step: f64,
    pub angular_momentum_step: f64,
}

pub fn conservation_report(traj: &Trajectory) -> ConservationReport {
    let e0 = traj.energy(0);
    let (l0, p0, n0) = (traj.angular_momentum(0), traj.total_momentum(0), traj.boost_charge(0));
    let mut r = ConservationReport {
        energy_drift: 0.0,
        angular_momentum_drift: 0.0,
        momentum_drift: 0.0,
        boost_drift: 0.0,
        momentum_step: 0.0,
        angular_momentum_step: 0.0,
    };
    let (mut lp, mut pp) = (l0, p0);
    for i in 1..traj.len() {
        let (l, p) = (traj.angular_momentum(i), traj.total_momentum(i));
        r.energy_drift = r.energy_drift.max((traj.energy(i) - e0).abs());
        r.angular_momentum_drift = r.angular_momentum_drift.max(norm(sub(l, l0)));
        r.momentum_drift = r.momentum_drift.max(norm(sub(p, p0)));
        r.boost_drift = r.boost_drift.max(norm(sub(traj.boost_charge(i), n0)));
        r.momentum_step = r.momentum_step.max(norm(sub(p, pp)));
        r.angular_momentum_step = r.angular_momentum_step.max(norm(sub(l, lp)));
        lp = l;
        pp = p;
    }
    r
}

/// Relative coordinate, relative momentum, reduced mass and potential of a
/// one-body or two-body trajectory.
struct RelativeOrbit<'a> {
    traj: &'a Trajectory,
    mass: f64,
    potential: Potential,
}

impl<'a> RelativeOrbit<'a> {
    fn new(traj: &'a Trajectory) -> Result<Self> {
        let m = &traj.system.masses;
        match (traj.system.interaction, m.len()) {
            (Interaction::External(v), 1) => Ok(Self {
                traj,
                mass: m[0],
                potential: v,
            }),
            (Interaction::Pairwise(v), 2) => Ok(Self {
                traj,
                mass: m[0] * m[1] / (m[0] + m[1]),
                potential: v,
            }),
            _ => Err(Error::Unsupported(
                "time averages need one particle in a field or an isolated pair".into(),
            )),
        }
    }

    fn state(&self, i: usize) -> (Vec3, Vec3) {
        let x = &self.traj.positions[i];
        let p = &self.traj.momenta[i];
        if x.len() == 1 {
            (x[0], p[0])
        } else {
            let m = &self.traj.system.masses;
            let mt = m[0] + m[1];
            (
                sub(x[0], x[1]),
                scale(sub(scale(p[0], m[1]), scale(p[1], m[0])), 1.0 / mt),
            )
        }
    }

    fn energy(&self, i: usize) -> f64 {
        let (r, p) = self.state(i);
        dot(p, p) / (2.0 * self.mass) + self.potential.value(norm(r))
    }

    fn check_bound(&self) -> Result<()> {
        if let Potential::Coulomb { .. } = self.potential {
            let e = self.energy(0);
            if e >= 0.0 {
                return Err(Error::Unbound(e));
            }
        }
        Ok(())
    }

    fn window_steps(&self, window: f64) -> Result<usize> {
        let steps = (window / self.traj.dt).round() as usize;
        if steps == 0 || steps >= self.traj.len() {
            return Err(Error::InvalidArgument(format!(
                "window {window} must cover between one step and the whole trajectory"
            )));
        }
        Ok(steps)
    }

    /// Trapezoid time average of `f` over the first `steps` steps.
    fn average(&self, steps: usize, f: impl Fn(Vec3, Vec3) -> f64) -> f64 {
        let mut acc = 0.0;
        for i in 0..=steps {
            let (r, p) = self.state(i);
            let w = if i == 0 || i == steps { 0.5 } else { 1.0 };
            acc += w * f(r, p);
        }
        acc / steps as f64
    }
}

/// Window averages entering `2T̄ = n V̄` for `V ∝ rⁿ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VirialAverage {
    pub window: f64,
    pub two_t: f64,
    pub minus_v: f64,
    /// `|2T̄ - n V̄|`.
    pub residual: f64,
}

pub fn virial_average(traj: &Trajectory, window: f64) -> Result<VirialAverage> {
    let orbit = RelativeOrbit::new(traj)?;
    orbit.check_bound()?;
    let steps = orbit.window_steps(window)?;
    let m = orbit.mass;
    let v = orbit.potential;
    let two_t = orbit.average(steps, |_, p| dot(p, p) / m);
    let vbar = orbit.average(steps, |r, _| v.value(norm(r)));
    Ok(VirialAverage {
        window: steps as f64 * traj.dt,
        two_t,
        minus_v: -vbar,
        residual: (two_t - v.exponent() * vbar).abs(),
    })
}

/// `L²/m ⟨1/r³⟩` against `-⟨V/r⟩` for a Coulomb orbit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FineStructureAverage {
    pub window: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
}

pub fn fine_structure_average(traj: &Trajectory, window: f64) -> Result<FineStructureAverage> {
    let orbit = RelativeOrbit::new(traj)?;
    if !matches!(orbit.potential, Potential::Coulomb { .. }) {
        return Err(Error::Unsupported(
            "the fine-structure average needs a Coulomb potential".into(),
        ));
    }
    orbit.check_bound()?;
    let steps = orbit.window_steps(window)?;
    let m = orbit.mass;
    let v = orbit.potential;
    let lhs = orbit.average(steps, |r, p| {
        let l = cross(r, p);
        dot(l, l) / m / norm(r).powi(3)
    });
    let rhs = orbit.average(steps, |r, _| {
        let d = norm(r);
        -v.value(d) / d
    });
    Ok(FineStructureAverage {
        window: steps as f64 * traj.dt,
        lhs,
        rhs,
        residual: (lhs - rhs).abs(),
    })
}

/// Single particle (`m = k = 1`) starting at perihelion of an orbit with
/// semi-major axis 1 and eccentricity `e`; the period is `2π`.
pub fn kepler_system(e: f64) -> Result<MechSystem> {
    if !(0.0..1.0).contains(&e) {
        return Err(Error::InvalidArgument(format!(
            "eccentricity must lie in [0, 1), got {e}"
        )));
    }
    let rp = 1.0 - e;
    let vp = ((1.0 + e) / rp).sqrt();
    Ok(MechSystem {
        masses: vec![1.0],
        interaction: Interaction::External(Potential::Coulomb { k: 1.0 }),
        positions: vec![[rp, 0.0, 0.0]],
        momenta: vec![[0.0, vp, 0.0]],
    })
}

/// Times at which the orbit crosses the positive x axis moving upward,
/// linearly interpolated between steps.
pub fn upward_crossings(traj: &Trajectory) -> Vec<f64> {
    let mut out = Vec::new();
    for i in 1..traj.len() {
        let (a, b) = (traj.positions[i - 1][0], traj.positions[i][0]);
        if a[1] < 0.0 && b[1] >= 0.0 && b[0] > 0.0 {
            let f = -a[1] / (b[1] - a[1]);
            out.push(traj.time(i - 1) + f * traj.dt);
        }
    }
    out
}

/// Least-squares slope of `ln residual` against `ln window`.
pub fn log_log_slope(points: &[(f64, f64)]) -> Result<f64> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return Err(Error::InvalidArgument("need two positive points for a slope".into()));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Ok(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn free_particle_moves_straight() {
        let sys = MechSystem {
            masses: vec![2.0],
            interaction: Interaction::External(Potential::PowerLaw { c: 0.0, n: 2.0 }),
            positions: vec![[1.0, 2.0, 3.0]],
            momenta: vec![[0.5, -1.0, 0.25]],
        };
        let t = integrate(&sys, 0.1, 100).unwrap();
        let x = t.positions[100][0];
        assert!((x[0] - (1.0 + 0.25 * 10.0)).abs() < 1e-12);
        let r = conservation_report(&t);
        assert!(r.energy_drift < 1e-14 && r.momentum_drift == 0.0);
    }

    #[test]
    fn circular_orbit_averages() {
        let sys = kepler_system(0.0).unwrap();
        let t = integrate(&sys, 2.0 * PI / 1000.0, 3000).unwrap();
        let v = virial_average(&t, 2.0 * 2.0 * PI).unwrap();
        assert!((v.two_t - 1.0).abs() < 1e-4 && (v.minus_v - 1.0).abs() < 1e-4);
        assert!(v.residual < 2e-5);
        let f = fine_structure_average(&t, 2.0 * 2.0 * PI).unwrap();
        assert!((f.lhs - 1.0).abs() < 1e-4 && (f.rhs - 1.0).abs() < 1e-4);
        assert!(f.residual < 2e-5);
    }

    #[test]
    fn circular_period_converges_quadratically() {
        let period = |steps: usize| {
            let t = integrate(&kepler_system(0.0).unwrap(), 2.0 * PI / steps as f64, 3 * steps).unwrap();
            let c = upward_crossings(&t);
            c[1] - c[0]
        };
        let (p1, p2) = (period(1000), period(2000));
        assert!((p1 - 2.0 * PI).abs() < 1e-4);
        assert!(((p1 - 2.0 * PI) / (p2 - 2.0 * PI) - 4.0).abs() < 0.1);
        let extrapolated = (4.0 * p2 - p1) / 3.0;
        assert!((extrapolated - 2.0 * PI).abs() < 1e-6);
    }

    #[test]
    fn two_body_charges() {
        let sys = MechSystem {
            masses: vec![1.0, 3.0],
            interaction: Interaction::Pairwise(Potential::Coulomb { k: 2.0 }),
            positions: vec![[1.0, 0.0, 0.0], [-0.5, 0.2, 0.1]],
            momenta: vec![[0.1, 1.2, 0.0], [0.3, -0.9, 0.2]],
        };
        let t = integrate(&sys, 1e-3, 20_000).unwrap();
        let r = conservation_report(&t);
        assert!(r.momentum_step < 1e-12 && r.angular_momentum_step < 1e-12, "{r:?}");
        assert!(r.boost_drift < 1e-10);
        assert!(r.energy_drift < 1e-4);
    }

    #[test]
    fn harmonic_virial() {
        let sys = MechSystem {
            masses: vec![1.0],
            interaction: Interaction::External(Potential::Harmonic { k: 1.0 }),
            positions: vec![[1.0, 0.0, 0.0]],
            momenta: vec![[0.0, 0.4, 0.3]],
        };
        let t = integrate(&sys, 2.0 * PI / 1000.0, 100_000).unwrap();
        let v = virial_average(&t, 100.0 * 2.0 * PI).unwrap();
        assert!(v.residual < 1e-4, "{v:?}");
        assert!(fine_structure_average(&t, 10.0).is_err());
    }

    #[test]
    fn guards() {
        let mut sys = kepler_system(0.5).unwrap();
        sys.momenta[0] = [0.0, 2.0, 0.0];
        let t = integrate(&sys, 0.01, 100).unwrap();
        assert!(matches!(virial_average(&t, 0.5), Err(Error::Unbound(_))));
        let radial = MechSystem {
            masses: vec![1.0],
            interaction: Interaction::External(Potential::Coulomb { k: 1.0 }),
            positions: vec![[1.0, 0.0, 0.0]],
            momenta: vec![[0.0, 0.0, 0.0]],
        };
        assert!(matches!(integrate(&radial, 1e-3, 10_000), Err(Error::Collision { .. })));
        assert!(kepler_system(1.0).is_err());
    }

    #[test]
    fn csv_layout() {
        let t = integrate(&kepler_system(0.2).unwrap(), 0.01, 3).unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf, 1).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let head = text.lines().next().unwrap();
        assert_eq!(head, "t,x0_x,x0_y,x0_z,p0_x,p0_y,p0_z,E,L_x,L_y,L_z,N_x,N_y,N_z");
        assert_eq!(text.lines().count(), 5);
        let mut sparse = Vec::new();
        t.write_csv(&mut sparse, 2).unwrap();
        assert_eq!(String::from_utf8(sparse).unwrap().lines().count(), 4);
    }
}
