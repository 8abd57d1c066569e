//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fails.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::Command;

use actionlab_core::algebra::verification_report;
use actionlab_core::amplitudes::{poisson_table, transition_probabilities_with, vacuum_persistence_with};
use actionlab_core::classical::{
    conservation_report, fine_structure_average, integrate, kepler_system, log_log_slope, virial_average, Interaction,
    MechSystem, Potential,
};
use actionlab_core::fock::{self, Observable, OracleConfig};
use actionlab_core::greens::{kernel_value, KernelKind};
use actionlab_core::keldysh::{self, time_cycle_functional, InitialState, KeldyshScenario};
use actionlab_core::path::{
    lattice_convergence, lattice_persistence, observed_order, spectral_persistence, ConvergenceRow, FrequencyGrid,
    LatticeAction,
};
use actionlab_core::signal::{fourier_with, scale_to_gamma_sq, ComplexSignal, Quadrature, TimeGrid};
use actionlab_core::source::bound::{bound_state_channels, KineticScheme};
use actionlab_core::source::scattering::{energy_sweep, scattered_field, Incidence, PotentialSpec};
use actionlab_core::source::{
    mode_spectrum, stimulated_emission, vacuum_persistence_st, MomentumGrid, SpaceGrid, SpaceTimeSource,
};
use actionlab_core::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Verdict = Result<(bool, String), String>;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn pulse(t_start: f64, t_end: f64, intervals: usize) -> ComplexSignal {
    let g = TimeGrid::spanning(t_start, t_end, intervals).unwrap();
    ComplexSignal::square(g, c(0.5, 0.0), 0.0, PI).unwrap()
}

fn standard_persistence() -> Complex64 {
    Complex64::from_polar((-0.5f64).exp(), PI / 4.0)
}

fn random_gaussian(rng: &mut ChaCha8Rng, g: TimeGrid) -> ComplexSignal {
    let amp = c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    let center = rng.gen_range(2.5..3.5);
    let width = rng.gen_range(0.2..0.5);
    let carrier = rng.gen_range(0.0..2.0);
    ComplexSignal::gaussian(g, amp, center, width, carrier).unwrap()
}

fn poisson_law() -> Verdict {
    let k = pulse(0.0, PI, 3142);
    let cfg = OracleConfig::new(64, 1).map_err(|e| e.to_string())?;
    let table = transition_probabilities_with(&k, 1.0, 40, Quadrature::Simpson).map_err(|e| e.to_string())?;
    let (psi, _) = fock::evolve_vacuum(&k, 1.0, &cfg).map_err(|e| e.to_string())?;
    let (exact, _) = poisson_table(1.0, 10).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for n in 0..=10 {
        worst = worst.max((table.probabilities[n] - psi[n].norm_sqr()).abs());
        worst = worst.max((exact[n] - psi[n].norm_sqr()).abs());
    }
    let closed_sum = (table.total() - 1.0).abs();
    let oracle_sum = (psi.iter().map(|z| z.norm_sqr()).sum::<f64>() - 1.0).abs();
    Ok((
        worst < 1e-6 && closed_sum < 1e-8 && oracle_sum < 1e-8,
        format!("max |p_n - oracle| = {worst:.2e} (< 1e-6), |sum - 1| = {closed_sum:.1e} / {oracle_sum:.1e} (< 1e-8)"),
    ))
}

fn persistence_modulus() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let g = TimeGrid::new(0.0, 1e-3, 6001).unwrap();
    let cfg = OracleConfig::default();
    let (mut closed, mut oracle) = (0.0f64, 0.0f64);
    for _ in 0..5 {
        let omega = rng.gen_range(0.5..2.0);
        let target = rng.gen_range(0.1..2.0);
        let raw = random_gaussian(&mut rng, g);
        let k = scale_to_gamma_sq(&raw, omega, target, Quadrature::Simpson).map_err(|e| e.to_string())?;
        let z = vacuum_persistence_with(&k, omega, Quadrature::Simpson).map_err(|e| e.to_string())?;
        let g2 = fourier_with(&k, omega, Quadrature::Simpson).norm_sqr();
        closed = closed.max((z.norm_sqr() - (-g2).exp()).abs());
        let cmp = fock::compare_vacuum_persistence(&k, omega, z, &cfg).map_err(|e| e.to_string())?;
        oracle = oracle.max((cmp.oracle.norm_sqr() - (-g2).exp()).abs());
    }
    Ok((
        closed < 1e-8 && oracle < 1e-6,
        format!("closed form {closed:.2e} (< 1e-8), oracle {oracle:.2e} (< 1e-6) over 5 sources"),
    ))
}

fn phase_check() -> Verdict {
    let want = standard_persistence();
    let closed = vacuum_persistence_with(&pulse(0.0, PI, 3000), 1.0, Quadrature::Simpson).map_err(|e| e.to_string())?;
    let base = pulse(0.0, PI, 3142);
    let oracle = fock::compare_vacuum_persistence(&base, 1.0, want, &OracleConfig::default())
        .map_err(|e| e.to_string())?
        .oracle;
    let fine = pulse(0.0, PI, 31416);
    let lattice = lattice_persistence(&fine, 1.0).map_err(|e| e.to_string())?;
    let fg = FrequencyGrid::around(1.0, 200.0, 160_001, 0.01).map_err(|e| e.to_string())?;
    let spectral = spectral_persistence(&pulse(0.0, PI, 1000), 1.0, &fg)
        .map_err(|e| e.to_string())?
        .value;
    let e = [
        (closed - want).norm(),
        (oracle - want).norm(),
        (lattice - want).norm(),
        (spectral - want).norm(),
    ];
    Ok((
        e[0] < 1e-10 && e[1] < 1e-6 && e[2] < 1e-3 && e[3] < 1e-3,
        format!(
            "closed {:.1e} (< 1e-10), oracle {:.1e} (< 1e-6), lattice dt={:.1e} {:.1e} (< 1e-3), spectral {:.1e} (< 1e-3)",
            e[0],
            e[1],
            fine.grid().dt,
            e[2],
            e[3]
        ),
    ))
}

fn keldysh_normalisation() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let g = TimeGrid::new(0.0, 0.01, 601).unwrap();
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let k = random_gaussian(&mut rng, g);
        let omega = rng.gen_range(0.2..3.0);
        let s = KeldyshScenario::diagonal(k, omega, InitialState::Vacuum).map_err(|e| e.to_string())?;
        worst = worst.max((time_cycle_functional(&s).map_err(|e| e.to_string())? - 1.0).norm());
    }
    Ok((
        worst < 1e-12,
        format!("max |Z[K,K] - 1| = {worst:.2e} (< 1e-12) over 20 sources"),
    ))
}

fn displaced_generator() -> Verdict {
    let k = pulse(-1.2 * PI, 1.2 * PI, 2400);
    let shift = 1000.0 * k.grid().dt;
    let closed = keldysh::displaced_generator(&k, 1.0, shift).map_err(|e| e.to_string())?;
    let pair = keldysh::displaced_pair(&k, 1.0, shift, InitialState::Vacuum).map_err(|e| e.to_string())?;
    let oracle = fock::time_cycle_trace(&pair, &OracleConfig::default()).map_err(|e| e.to_string())?;
    let want = (-2.0f64).exp();
    let e_value = (closed - want).norm();
    let e_oracle = (closed - oracle).norm();

    let wide = pulse(-2.0 * PI, 1.25 * PI, 3328);
    let recovered = keldysh::probabilities_by_inversion(&wide, 1.0, 64, 10).map_err(|e| e.to_string())?;
    let g2 = fourier_with(&wide, 1.0, Quadrature::Trapezoid).norm_sqr();
    let (exact, _) = poisson_table(g2, 10).map_err(|e| e.to_string())?;
    let e_inv = recovered
        .iter()
        .zip(&exact)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok((
        e_value < 1e-6 && e_oracle < 1e-6 && e_inv < 1e-8,
        format!("|G - e^-2| = {e_value:.1e}, |G - oracle| = {e_oracle:.1e} (< 1e-6), inversion {e_inv:.1e} (< 1e-8)"),
    ))
}

fn moments() -> Verdict {
    let k = pulse(0.0, PI, 2000);
    let cfg = OracleConfig::default();
    let cases = [
        (InitialState::Vacuum, 1.0, 1.0),
        (InitialState::Number { n: 3 }, 4.0, 7.0),
        (
            InitialState::Thermal { beta: 1.0 },
            1.0 + 1.0 / (std::f64::consts::E - 1.0),
            1.0 + 2.0 / (std::f64::consts::E - 1.0),
        ),
    ];
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for (init, mean_want, var_want) in cases {
        let m = keldysh::moments_with(&k, 1.0, &init, Quadrature::Simpson).map_err(|e| e.to_string())?;
        let s = KeldyshScenario::diagonal(k.clone(), 1.0, init).map_err(|e| e.to_string())?;
        let mean = fock::observable_average(&s, Observable::Number, &cfg).map_err(|e| e.to_string())?;
        let var = fock::observable_average(&s, Observable::ConditionalVariance, &cfg).map_err(|e| e.to_string())?;
        let e = [
            (m.mean_n - mean_want).abs(),
            (m.var_n - var_want).abs(),
            (mean - m.mean_n).abs(),
            (var - m.var_n).abs(),
        ]
        .into_iter()
        .fold(0.0, f64::max);
        worst = worst.max(e);
        parts.push(format!("Var {:.5}", m.var_n));
    }
    Ok((
        worst < 1e-5,
        format!("{} ; max error {worst:.1e} (< 1e-5)", parts.join(", ")),
    ))
}

fn greens_identity() -> Verdict {
    let i = Complex64::i();
    let omega = 1.7;
    let worst = (0..1000)
        .map(|j| {
            let tau = -25.0 + 50.0 * j as f64 / 999.0;
            (-i * kernel_value(KernelKind::Retarded, omega, tau, 0.0)
                + i * kernel_value(KernelKind::Advanced, omega, tau, 0.0)
                + kernel_value(KernelKind::OnShell, omega, tau, 0.0))
            .norm()
        })
        .fold(0.0, f64::max);
    let mut rows = Vec::new();
    for n in [101usize, 201, 401, 801] {
        let g = TimeGrid::spanning(0.0, 2.0, n - 1).unwrap();
        let gm = LatticeAction::new(g, omega)
            .and_then(|l| l.green_matrix())
            .map_err(|e| e.to_string())?;
        let mut err: f64 = 0.0;
        for a in 1..n {
            for b in 0..a {
                let exact = kernel_value(KernelKind::Retarded, omega, g.time(a), g.time(b));
                err = err.max((gm[(a, b)] - exact).norm());
            }
        }
        rows.push(ConvergenceRow {
            step: g.dt,
            value: c(0.0, 0.0),
            abs_err: err,
        });
    }
    let order = observed_order(&rows).unwrap_or(f64::NAN);
    let persistence = lattice_convergence(c(0.5, 0.0), PI, 1.0, &[1000, 2000, 4000, 8000], standard_persistence())
        .map_err(|e| e.to_string())?;
    let p_order = observed_order(&persistence).unwrap_or(f64::NAN);
    Ok((
        worst <= 4.0 * f64::EPSILON && (order - 1.0).abs() < 0.05 && (p_order - 1.0).abs() < 0.05,
        format!("identity residual {worst:.1e} on 1000 samples, Green-matrix order {order:.3}, persistence order {p_order:.3}"),
    ))
}

fn source_theory() -> Verdict {
    let grid = SpaceGrid::spanning(-2.0, 2.0, 200).unwrap();
    let delta = PotentialSpec::Delta {
        strength: 1.0,
        position: 0.0,
    };
    let t2 = scattered_field(&delta, 0.5, 1.0, &grid, Incidence::Left)
        .map_err(|e| e.to_string())?
        .transmission
        .norm_sqr();
    let e_t = (t2 - 0.5).abs();
    let energies: Vec<f64> = (1..=30).map(|j| 0.1 * j as f64).collect();
    let well = PotentialSpec::SquareWell {
        depth: 1.5,
        width: 1.4,
        center: 0.2,
    };
    let mut unitarity: f64 = 0.0;
    for v in [&delta, &well] {
        let rows = energy_sweep(v, &energies, 1.0, &SpaceGrid::spanning(-3.0, 3.0, 240).unwrap())
            .map_err(|e| e.to_string())?;
        unitarity = rows.iter().map(|r| r.unitarity_defect).fold(unitarity, f64::max);
    }

    let space = SpaceGrid::new(-4.0, 0.1, 81).unwrap();
    let time = TimeGrid::new(0.0, 2e-3, 3001).unwrap();
    let k = SpaceTimeSource::gaussian_packet(space, time, 1.0, c(0.3, 0.1), (0.0, 0.6), (3.0, 0.5), 1.2)
        .map_err(|e| e.to_string())?;
    let coarse = vacuum_persistence_st(&k, &MomentumGrid::new(-3.0, 4.0, 141).unwrap()).map_err(|e| e.to_string())?;
    let fine = vacuum_persistence_st(&k, &MomentumGrid::new(-3.0, 4.0, 281).unwrap()).map_err(|e| e.to_string())?;
    let modulus = (fine.value.norm_sqr() - (-fine.mean_number).exp()).abs();
    let quadrature = (fine.value.norm_sqr() - coarse.value.norm_sqr()).abs();
    let mg = MomentumGrid::new(-3.0, 4.0, 141).unwrap();
    let modes = mode_spectrum(&k, &mg).map_err(|e| e.to_string())?;
    let mode = (0..mg.n_p)
        .max_by(|&a, &b| modes.strengths[a].norm().total_cmp(&modes.strengths[b].norm()))
        .unwrap();
    let one = stimulated_emission(&modes, mode, 0).map_err(|e| e.to_string())?;
    let mut factor: f64 = 0.0;
    for n in 0..=10u32 {
        let z = stimulated_emission(&modes, mode, n).map_err(|e| e.to_string())?;
        factor = factor.max((z / one - ((n + 1) as f64).sqrt()).norm());
    }
    Ok((
        e_t < 1e-4 && unitarity < 1e-8 && modulus < 1e-12 && quadrature < 1e-8 && factor < 1e-14,
        format!(
            "|t|^2-1/2 {e_t:.1e}, unitarity {unitarity:.1e}, modulus law {modulus:.1e} (quadrature {quadrature:.1e}), sqrt(n+1) {factor:.1e}"
        ),
    ))
}

fn bound_states() -> Verdict {
    let omega = 1.3;
    let harmonic = PotentialSpec::Harmonic { mu: 0.5, omega };
    let s = bound_state_channels(
        &harmonic,
        1.0,
        &SpaceGrid::spanning(-12.0, 12.0, 160).unwrap(),
        KineticScheme::Sinc,
        None,
    )
    .map_err(|e| e.to_string())?;
    let e_h = (0..=5)
        .map(|n| (s.energies[n] - (n as f64 + 0.5) * omega).abs())
        .fold(0.0, f64::max);
    let lam = -1.0;
    let delta = PotentialSpec::Delta {
        strength: lam,
        position: 0.0,
    };
    let d = bound_state_channels(
        &delta,
        1.0,
        &SpaceGrid::spanning(-40.0, 40.0, 4000).unwrap(),
        KineticScheme::Auto,
        Some(3),
    )
    .map_err(|e| e.to_string())?;
    let mu = 0.5;
    let e_d = (d.energies[0] + mu * lam * lam / 2.0).abs();
    Ok((
        e_h < 1e-6 && e_d < 1e-4,
        format!("harmonic ladder {e_h:.1e} (< 1e-6), delta well {e_d:.1e} (< 1e-4)"),
    ))
}

fn algebra() -> Verdict {
    let report = verification_report().map_err(|e| e.to_string())?;
    let required = [
        "clifford",
        "census_3_2",
        "bose_obstruction",
        "kemmer_duffin_spin0",
        "kemmer_duffin_spin1",
        "rank_beta0_spin0_is_2",
        "rank_beta0_spin1_is_6",
        "minimal_polynomial",
    ];
    let missing: Vec<&str> = required
        .iter()
        .copied()
        .filter(|n| !report.iter().any(|c| c.name == *n && c.passed))
        .collect();
    let failed: Vec<&str> = report.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
    Ok((
        missing.is_empty() && failed.is_empty(),
        format!("{} exact identities, failures: {:?}", report.len(), failed),
    ))
}

fn classical() -> Verdict {
    let period = 2.0 * PI;
    let traj = integrate(
        &kepler_system(0.5).map_err(|e| e.to_string())?,
        period / 1000.0,
        100_000,
    )
    .map_err(|e| e.to_string())?;
    let v = virial_average(&traj, 100.0 * period).map_err(|e| e.to_string())?;
    let f = fine_structure_average(&traj, 100.0 * period).map_err(|e| e.to_string())?;
    let mut vir = Vec::new();
    let mut fin = Vec::new();
    for n in [5.0, 10.0, 20.0, 40.0, 80.0] {
        let w = (n + 0.25) * period;
        let a = virial_average(&traj, w).map_err(|e| e.to_string())?;
        let b = fine_structure_average(&traj, w).map_err(|e| e.to_string())?;
        vir.push((a.window, a.residual));
        fin.push((b.window, b.residual));
    }
    let sv = log_log_slope(&vir).map_err(|e| e.to_string())?;
    let sf = log_log_slope(&fin).map_err(|e| e.to_string())?;
    let l_step = conservation_report(&traj).angular_momentum_step;

    let pair = MechSystem {
        masses: vec![1.0, 3.0],
        interaction: Interaction::Pairwise(Potential::Coulomb { k: 2.0 }),
        positions: vec![[1.0, 0.0, 0.0], [-0.5, 0.2, 0.1]],
        momenta: vec![[0.1, 1.2, 0.0], [0.3, -0.9, 0.2]],
    };
    let two = conservation_report(&integrate(&pair, 1e-3, 20_000).map_err(|e| e.to_string())?);
    let drift = l_step.max(two.momentum_step).max(two.angular_momentum_step);
    Ok((
        v.residual < 1e-3 && f.residual < 1e-3 && drift < 1e-12 && (sv + 1.0).abs() <= 0.1 && (sf + 1.0).abs() <= 0.1,
        format!(
            "virial {:.1e}, fine structure {:.1e} (< 1e-3), per-step P/L drift {drift:.1e} (< 1e-12), slopes {sv:.3} / {sf:.3}",
            v.residual, f.residual
        ),
    ))
}

fn bundled_scenarios() -> Vec<PathBuf> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("examples");
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .unwrap()
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    files.sort();
    files
}

fn read_tree(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .filter_map(|e| e.ok())
        .map(|e| {
            (
                e.file_name().to_string_lossy().into_owned(),
                std::fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    out.sort();
    out
}

fn determinism() -> Verdict {
    let files = bundled_scenarios();
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut trees = Vec::new();
    for (run, jobs) in [(0, "1"), (1, "4")] {
        let out = tmp.path().join(format!("run{run}"));
        let status = Command::new(env!("CARGO_BIN_EXE_actionlab"))
            .arg("run")
            .args(&files)
            .arg("--out")
            .arg(&out)
            .args(["--jobs", jobs])
            .output()
            .map_err(|e| e.to_string())?;
        if !status.status.success() {
            return Ok((false, format!("cli run exited with {:?}", status.status.code())));
        }
        trees.push(read_tree(&out));
    }
    let same = trees[0] == trees[1] && !trees[0].is_empty();
    Ok((
        same,
        format!(
            "{} scenarios, {} output files, bit-identical: {same}",
            files.len(),
            trees[0].len()
        ),
    ))
}

fn main() {
    let criteria: [(&str, fn() -> Verdict); 12] = [
        ("Poisson law", poisson_law),
        ("persistence modulus", persistence_modulus),
        ("phase check", phase_check),
        ("Keldysh normalisation", keldysh_normalisation),
        ("displaced generator", displaced_generator),
        ("moments", moments),
        ("Green's-function identity", greens_identity),
        ("source theory", source_theory),
        ("bound states", bound_states),
        ("algebra", algebra),
        ("classical", classical),
        ("determinism", determinism),
    ];
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let (ok, detail) = match run() {
            Ok(v) => v,
            Err(e) => (false, format!("error: {e}")),
        };
        if !ok {
            failures += 1;
        }
        println!("{} {:>2} {name}: {detail}", if ok { "PASS" } else { "FAIL" }, i + 1);
    }
    println!(
        "acceptance: {}/{} criteria passed",
        criteria.len() - failures,
        criteria.len()
    );
    if failures > 0 {
        std::process::exit(1);
    }
}
