use std::fmt::Write as _;

use actionlab_core::algebra::verification_report;
use actionlab_core::amplitudes::{poisson_table, transition_probabilities_with, vacuum_persistence_with};
use actionlab_core::classical::{
    conservation_report, fine_structure_average, integrate, kepler_system, log_log_slope, virial_average, Interaction,
    Potential,
};
use actionlab_core::fock::{self, Observable, OracleConfig};
use actionlab_core::greens::{kernel_value, KernelKind};
use actionlab_core::keldysh::{self, InitialState, KeldyshScenario};
use actionlab_core::path::{
    lattice_convergence, lattice_persistence, observed_order, spectral_persistence, FrequencyGrid,
};
use actionlab_core::signal::{fourier_with, ComplexSignal, Quadrature, TimeGrid};
use actionlab_core::source::bound::bound_state_channels;
use actionlab_core::source::scattering::{
    coefficients_extrapolated, energy_sweep, scattered_field, write_sweep_csv, Incidence,
};
use actionlab_core::source::transfer::transfer_coefficients;
use actionlab_core::source::{
    mode_spectrum, stimulated_emission, vacuum_persistence_st, MomentumGrid, SpaceTimeSource,
};
use actionlab_core::{Complex64, Error};
use serde_json::json;

use crate::scenario::{
    AlgebraParams, BoundParams, ClassicalParams, CompareExpectations, CompareParams, EmitterSpec, KeldyshParams,
    OscillatorParams, PathIntegralParams, ScatterParams, SpectralSpec, SystemSpec,
};
use crate::{CliError, Report, TableRow};

type Outcome = Result<(), CliError>;

fn oracle_config(c: &OracleConfig) -> Result<OracleConfig, CliError> {
    Ok(OracleConfig::new(c.n_trunc, c.substeps)?)
}

fn io_err(e: std::io::Error) -> CliError {
    CliError::Io(e.to_string())
}

fn cjson(z: Complex64) -> serde_json::Value {
    json!([z.re, z.im])
}

pub fn oscillator(p: &OscillatorParams, r: &mut Report) -> Outcome {
    let k = p.signal.build(1)?;
    let cfg = oracle_config(&p.oracle)?;
    if p.n_max + 1 > cfg.n_trunc {
        return Err(CliError::Usage(format!(
            "n_max {} exceeds the oracle truncation {}",
            p.n_max, cfg.n_trunc
        )));
    }
    let table = transition_probabilities_with(&k, p.omega, p.n_max, p.quadrature)?;
    let (psi, leakage) = fock::evolve_vacuum(&k, p.omega, &cfg)?;
    let oracle_p: Vec<f64> = psi.iter().take(p.n_max + 1).map(|z| z.norm_sqr()).collect();
    let worst = table
        .probabilities
        .iter()
        .zip(&oracle_p)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);

    r.check_max(
        "persistence_vs_oracle",
        (table.persistence - psi[0]).norm(),
        p.tolerances.oracle,
    );
    r.check_max("probabilities_vs_oracle", worst, p.tolerances.oracle);
    r.check_max(
        "normalisation",
        (table.total() + table.tail_mass - 1.0).abs(),
        p.tolerances.normalisation,
    );
    r.check_max(
        "modulus_law",
        (table.persistence.norm_sqr() - (-table.gamma_sq).exp()).abs(),
        p.tolerances.closed_form,
    );
    if let Some(expected) = p.expected_persistence {
        r.check_max(
            "persistence_vs_expected",
            (table.persistence - expected).norm(),
            p.tolerances.closed_form,
        );
    }

    let mut csv = String::from("n,p_closed,p_oracle,abs_err\n");
    for (n, (a, b)) in table.probabilities.iter().zip(&oracle_p).enumerate() {
        writeln!(csv, "{n},{a:e},{b:e},{:e}", (a - b).abs()).unwrap();
    }
    r.series.push((String::new(), csv));
    r.data = json!({
        "gamma": cjson(table.gamma),
        "gamma_sq": table.gamma_sq,
        "persistence": cjson(table.persistence),
        "persistence_oracle": cjson(psi[0]),
        "probabilities": table.probabilities,
        "probabilities_oracle": oracle_p,
        "tail_mass": table.tail_mass,
        "oracle_leakage": leakage,
    });
    Ok(())
}

/// Closed-form cycle functional of the displaced pair, for any real ensemble.
fn displaced_closed(
    k: &ComplexSignal,
    omega: f64,
    shift: f64,
    initial: InitialState,
    rule: Quadrature,
) -> Result<Complex64, CliError> {
    match initial {
        InitialState::Number { .. } => {
            let g2 = fourier_with(k, omega, rule).norm_sqr();
            Ok(keldysh::number_generator(g2, omega, &initial, omega * shift)?)
        }
        _ => Ok(keldysh::thermal_generator(&keldysh::displaced_pair(
            k, omega, shift, initial,
        )?)?),
    }
}

pub fn keldysh(p: &KeldyshParams, r: &mut Report) -> Outcome {
    let k = p.signal.build(1)?;
    let cfg = oracle_config(&p.oracle)?;
    let closed = keldysh::moments_with(&k, p.omega, &p.initial, p.quadrature)?;
    let s = KeldyshScenario::diagonal(k.clone(), p.omega, p.initial)?;
    let mean = fock::observable_average(&s, Observable::Number, &cfg)?;
    let var = fock::observable_average(&s, Observable::ConditionalVariance, &cfg)?;
    r.check_max("mean_vs_oracle", (mean - closed.mean_n).abs(), p.tolerances.moments);
    r.check_max("variance_vs_oracle", (var - closed.var_n).abs(), p.tolerances.moments);
    if let Some(e) = p.expected_mean {
        r.check_max("mean_vs_expected", (closed.mean_n - e).abs(), p.tolerances.moments);
    }
    if let Some(e) = p.expected_variance {
        r.check_max("variance_vs_expected", (closed.var_n - e).abs(), p.tolerances.moments);
    }

    let dt = k.grid().dt;
    let mut csv = String::from("shift_steps,T,re_closed,im_closed,re_oracle,im_oracle,abs_err\n");
    let mut worst: f64 = 0.0;
    let mut rows = Vec::new();
    for &j in &p.shifts {
        let shift = j as f64 * dt;
        let c = displaced_closed(&k, p.omega, shift, p.initial, p.quadrature)?;
        let pair = keldysh::displaced_pair(&k, p.omega, shift, p.initial)?;
        let o = fock::time_cycle_trace(&pair, &cfg)?;
        let err = (c - o).norm();
        worst = worst.max(err);
        writeln!(csv, "{j},{shift:e},{:e},{:e},{:e},{:e},{err:e}", c.re, c.im, o.re, o.im).unwrap();
        rows.push(json!({ "shift": shift, "closed": cjson(c), "oracle": cjson(o) }));
    }
    if !p.shifts.is_empty() {
        r.check_max("generator_vs_oracle", worst, p.tolerances.generator);
    }
    r.series.push((String::new(), csv));

    let mut inversion = serde_json::Value::Null;
    if let Some(inv) = p.inversion {
        if p.initial != InitialState::Vacuum {
            return Err(CliError::Usage("the inversion check needs a vacuum start".into()));
        }
        let probs = keldysh::probabilities_by_inversion(&k, p.omega, inv.m, inv.n_max)?;
        let g2 = fourier_with(&k, p.omega, Quadrature::Trapezoid).norm_sqr();
        let (exact, _) = poisson_table(g2, inv.n_max)?;
        let err = probs.iter().zip(&exact).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        r.check_max("inversion_vs_poisson", err, p.tolerances.inversion);
        inversion = json!({ "recovered": probs, "poisson": exact });
    }
    r.data = json!({
        "mean": closed.mean_n,
        "variance": closed.var_n,
        "gamma_sq": closed.gamma_sq,
        "mean_oracle": mean,
        "variance_oracle": var,
        "generator": rows,
        "inversion": inversion,
    });
    Ok(())
}

fn row(method: &str, step: f64, value: Complex64, reference: Complex64) -> TableRow {
    let abs_err = (value - reference).norm();
    TableRow {
        method: method.into(),
        step,
        value,
        abs_err,
        rel_err: abs_err / reference.norm(),
    }
}

/// Appends the oracle and spectral rows and the shared checks of both comparison kinds.
fn finish_comparison(
    r: &mut Report,
    k: &ComplexSignal,
    omega: f64,
    reference: Complex64,
    cfg: &OracleConfig,
    spectral: Option<SpectralSpec>,
    expected: &CompareExpectations,
) -> Outcome {
    let oracle = fock::compare_vacuum_persistence(k, omega, reference, cfg)?;
    r.table
        .insert(1, row("fock_oracle", k.grid().dt, oracle.oracle, reference));
    r.check_max("oracle_error", oracle.abs_err, expected.max_oracle_error);
    let lattice_best = r
        .table
        .iter()
        .filter(|t| t.method == "lattice")
        .map(|t| t.abs_err)
        .fold(f64::INFINITY, f64::min);
    r.check_max("finest_lattice_error", lattice_best, expected.max_lattice_error);
    if let (Some(range), Some(order)) = (expected.lattice_order, r.order) {
        r.check_range("lattice_order", order, range[0], range[1]);
    }
    if let Some(sp) = spectral {
        let fg = FrequencyGrid::around(omega, sp.half_width, sp.n_nu, sp.epsilon)?;
        let res = spectral_persistence(k, omega, &fg)?;
        r.table.push(row("spectral", sp.epsilon, res.value, reference));
        if let Some(bound) = expected.max_spectral_error {
            r.check_max("spectral_error", (res.value - reference).norm(), bound);
        }
    }
    let mut csv = String::from("method,step,re,im,abs_err,rel_err\n");
    for t in &r.table {
        writeln!(
            csv,
            "{},{:e},{:e},{:e},{:e},{:e}",
            t.method, t.step, t.value.re, t.value.im, t.abs_err, t.rel_err
        )
        .unwrap();
    }
    r.series.push((String::new(), csv));
    r.data = json!({ "reference": cjson(reference), "leakage": oracle.leakage, "unitarity_defect": oracle.unitarity_defect });
    Ok(())
}

pub fn oracle_compare(p: &CompareParams, r: &mut Report) -> Outcome {
    let cfg = oracle_config(&p.oracle)?;
    let finest = *p.refinements.iter().max().expect("validated nonempty");
    let reference = vacuum_persistence_with(&p.signal.build(finest)?, p.omega, p.quadrature)?;
    let base = p.signal.build(1)?;
    let closed = vacuum_persistence_with(&base, p.omega, p.quadrature)?;
    r.table.push(row("closed_form", base.grid().dt, closed, reference));
    let mut conv = Vec::new();
    for &f in &p.refinements {
        let k = p.signal.build(f)?;
        let v = lattice_persistence(&k, p.omega)?;
        r.table.push(row("lattice", k.grid().dt, v, reference));
        conv.push(actionlab_core::path::ConvergenceRow {
            step: k.grid().dt,
            value: v,
            abs_err: (v - reference).norm(),
        });
    }
    r.order = observed_order(&conv);
    finish_comparison(r, &base, p.omega, reference, &cfg, p.spectral, &p.expected)
}

pub fn path_integral(p: &PathIntegralParams, r: &mut Report) -> Outcome {
    let cfg = oracle_config(&p.oracle)?;
    let finest = *p.intervals.iter().max().expect("validated nonempty");
    let square = |m: usize| -> Result<ComplexSignal, Error> {
        ComplexSignal::square(TimeGrid::spanning(0.0, p.duration, m)?, p.amplitude, 0.0, p.duration)
    };
    let reference = vacuum_persistence_with(&square(finest)?, p.omega, Quadrature::Simpson)?;
    let coarse = square(p.intervals[0])?;
    r.table.push(row(
        "closed_form",
        coarse.grid().dt,
        vacuum_persistence_with(&coarse, p.omega, Quadrature::Simpson)?,
        reference,
    ));
    let conv = lattice_convergence(p.amplitude, p.duration, p.omega, &p.intervals, reference)?;
    for c in &conv {
        r.table.push(row("lattice", c.step, c.value, reference));
    }
    r.order = observed_order(&conv);
    if p.identity_samples > 0 {
        let n = p.identity_samples;
        let i = Complex64::i();
        let worst = (0..n)
            .map(|j| {
                let tau = -10.0 + 20.0 * j as f64 / (n - 1).max(1) as f64;
                (-i * kernel_value(KernelKind::Retarded, p.omega, tau, 0.0)
                    + i * kernel_value(KernelKind::Advanced, p.omega, tau, 0.0)
                    + kernel_value(KernelKind::OnShell, p.omega, tau, 0.0))
                .norm()
            })
            .fold(0.0, f64::max);
        r.check_max("kernel_identity", worst, 1e-15);
    }
    finish_comparison(r, &coarse, p.omega, reference, &cfg, p.spectral, &p.expected)
}

fn emitter(e: &EmitterSpec, mass: f64, r: &mut Report, tol: f64) -> Result<serde_json::Value, CliError> {
    let space = e.space.build()?;
    let time = e.time.build(1)?;
    let k = SpaceTimeSource::gaussian_packet(space, time, mass, e.amplitude, (e.x[0], e.x[1]), (e.t[0], e.t[1]), e.p0)?;
    let mg = MomentumGrid::new(e.momenta[0], e.momenta[1], e.n_momenta)?;
    let pers = vacuum_persistence_st(&k, &mg)?;
    r.check_max(
        "field_modulus_law",
        (pers.value.norm_sqr() - (-pers.mean_number).exp()).abs(),
        tol,
    );
    let modes = mode_spectrum(&k, &mg)?;
    let mode = (0..mg.n_p)
        .max_by(|&a, &b| modes.strengths[a].norm().total_cmp(&modes.strengths[b].norm()))
        .expect("nonempty momentum grid");
    let single = stimulated_emission(&modes, mode, 0)?;
    let mut worst: f64 = 0.0;
    let mut factors = Vec::new();
    for &n in &e.occupations {
        let ratio = stimulated_emission(&modes, mode, n)?.norm() / single.norm();
        worst = worst.max((ratio - ((n + 1) as f64).sqrt()).abs());
        factors.push(json!({ "n": n, "ratio": ratio }));
    }
    if !e.occupations.is_empty() {
        r.check_max("stimulated_factor", worst, 1e-14);
    }
    Ok(json!({
        "persistence": cjson(pers.value),
        "mean_number": pers.mean_number,
        "strongest_mode": modes.momenta[mode],
        "stimulated": factors,
    }))
}

pub fn scatter(p: &ScatterParams, r: &mut Report) -> Outcome {
    let grid = p.grid.build()?;
    let energies = p.energies.values();
    let rows = energy_sweep(&p.potential, &energies, p.mass, &grid)?;
    let worst = rows.iter().map(|x| x.unitarity_defect).fold(0.0, f64::max);
    r.check_max("unitarity", worst, p.tolerances.unitarity);

    let inc = p.incidence.unwrap_or(Incidence::Left);
    let mut transfer = Vec::new();
    let mut deviation: Option<f64> = None;
    for &e in &energies {
        let exact = match transfer_coefficients(&p.potential, e, p.mass, inc) {
            Ok(v) => v,
            Err(Error::Unsupported(_)) => break,
            Err(err) => return Err(err.into()),
        };
        let (rn, tn) = match p.romberg_levels {
            Some(levels) => {
                let c = coefficients_extrapolated(&p.potential, e, p.mass, &grid, inc, levels)?;
                (c.reflection, c.transmission)
            }
            None => {
                let s = scattered_field(&p.potential, e, p.mass, &grid, inc)?;
                (s.reflection, s.transmission)
            }
        };
        let d = (rn - exact.0).norm().max((tn - exact.1).norm());
        deviation = Some(deviation.unwrap_or(0.0).max(d));
        transfer.push(json!({ "energy": e, "r": cjson(exact.0), "t": cjson(exact.1), "deviation": d }));
    }
    if let Some(d) = deviation {
        r.check_max("grid_vs_transfer_matrix", d, p.tolerances.transfer);
    }
    if let Some(x) = p.expected_transmission {
        let s = scattered_field(&p.potential, x.energy, p.mass, &grid, Incidence::Left)?;
        r.check_max(
            "expected_transmission",
            (s.transmission.norm_sqr() - x.probability).abs(),
            p.tolerances.expected,
        );
    }
    let emission = match &p.emitter {
        Some(e) => emitter(e, p.mass, r, p.tolerances.persistence)?,
        None => serde_json::Value::Null,
    };

    let mut csv = Vec::new();
    write_sweep_csv(&rows, &mut csv).map_err(io_err)?;
    r.series
        .push((String::new(), String::from_utf8(csv).expect("ascii csv")));
    r.data = json!({
        "sweep": rows.iter().map(|x| json!({
            "energy": x.energy, "r": cjson(x.reflection), "t": cjson(x.transmission), "unitarity_defect": x.unitarity_defect,
        })).collect::<Vec<_>>(),
        "transfer_matrix": transfer,
        "emitter": emission,
    });
    Ok(())
}

pub fn bound_states(p: &BoundParams, r: &mut Report) -> Outcome {
    let grid = p.grid.build()?;
    let levels = bound_state_channels(&p.potential, p.mass, &grid, p.scheme, p.n_states)?;
    if p.expected.len() > levels.energies.len() {
        return Err(CliError::Usage(format!(
            "{} expected levels but only {} computed",
            p.expected.len(),
            levels.energies.len()
        )));
    }
    if !p.expected.is_empty() {
        let worst = p
            .expected
            .iter()
            .zip(&levels.energies)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        r.check_max("levels_vs_expected", worst, p.tolerance);
    }
    let mut csv = String::from("n,E_n\n");
    for (n, e) in levels.energies.iter().enumerate() {
        writeln!(csv, "{n},{e:e}").unwrap();
    }
    r.series.push((String::new(), csv));
    r.data = json!({
        "scheme": levels.scheme,
        "reduced_mass": levels.reduced_mass,
        "energies": levels.energies,
        "bound_levels": levels.bound_levels(),
    });
    Ok(())
}

pub fn algebra(p: &AlgebraParams, r: &mut Report) -> Outcome {
    let report = verification_report()?;
    for name in &p.only {
        if !report.iter().any(|c| &c.name == name) {
            return Err(CliError::Usage(format!("unknown identity '{name}'")));
        }
    }
    let mut csv = String::from("identity,passed,failures\n");
    for c in report.iter().filter(|c| p.only.is_empty() || p.only.contains(&c.name)) {
        r.check_exact(&c.name, if c.passed { 0.0 } else { c.failures.len().max(1) as f64 });
        writeln!(csv, "{},{},{}", c.name, c.passed, c.failures.len()).unwrap();
    }
    r.series.push((String::new(), csv));
    r.data = json!({
        "identities": report.iter().map(|c| json!({ "name": c.name, "passed": c.passed, "failures": c.failures })).collect::<Vec<_>>(),
    });
    Ok(())
}

pub fn classical(p: &ClassicalParams, r: &mut Report) -> Outcome {
    let sys = match &p.system {
        SystemSpec::Kepler { eccentricity } => kepler_system(*eccentricity)?,
        SystemSpec::Explicit(s) => s.clone(),
    };
    let traj = integrate(&sys, p.dt, p.steps)?;
    let cons = conservation_report(&traj);
    let t = &p.tolerances;
    if matches!(sys.interaction, Interaction::Pairwise(_)) {
        r.check_max("momentum_step_drift", cons.momentum_step, t.step_drift);
    }
    r.check_max("angular_momentum_step_drift", cons.angular_momentum_step, t.step_drift);
    let coulomb = matches!(
        sys.interaction,
        Interaction::External(Potential::Coulomb { .. }) | Interaction::Pairwise(Potential::Coulomb { .. })
    );
    let mut averages = serde_json::Value::Null;
    if let Some(w) = p.average_window {
        let v = virial_average(&traj, w)?;
        r.check_max("virial_residual", v.residual, t.virial);
        let fs = if coulomb {
            let f = fine_structure_average(&traj, w)?;
            r.check_max("fine_structure_residual", f.residual, t.fine_structure);
            Some(f)
        } else {
            None
        };
        averages = json!({ "virial": v, "fine_structure": fs });
    }
    let mut slopes = serde_json::Value::Null;
    if p.slope_windows.len() >= 2 {
        let mut vir = Vec::new();
        let mut fin = Vec::new();
        for &w in &p.slope_windows {
            let v = virial_average(&traj, w)?;
            vir.push((v.window, v.residual));
            if coulomb {
                let f = fine_structure_average(&traj, w)?;
                fin.push((f.window, f.residual));
            }
        }
        let sv = log_log_slope(&vir)?;
        r.check_range("virial_slope", sv, t.slope[0], t.slope[1]);
        let sf = if coulomb {
            let s = log_log_slope(&fin)?;
            r.check_range("fine_structure_slope", s, t.slope[0], t.slope[1]);
            Some(s)
        } else {
            None
        };
        slopes = json!({ "virial": sv, "fine_structure": sf, "virial_points": vir, "fine_structure_points": fin });
    }
    let mut csv = Vec::new();
    traj.write_csv(&mut csv, p.csv_stride).map_err(io_err)?;
    r.series
        .push((String::new(), String::from_utf8(csv).expect("ascii csv")));
    r.data = json!({ "conservation": cons, "averages": averages, "slopes": slopes });
    Ok(())
}
