//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit status
//! if any criterion fails. Expected values come from closed forms or
//! independent integrators written here, never from the code under test.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::OnceLock;
use std::time::Instant;

use cqm_core::algebra::{
    energy_fibre_variation, expectation_evolution_check, gauge_average, orbit_analysis, AlgebraElement, CMatrix,
    Density, FiniteGroupAction, MatrixRepresentation, QuantalDensity,
};
use cqm_core::barrier::{BarrierPotential, TransmissionFormula};
use cqm_core::constrained::{constrained_transmission, integrate, CoherentFamily, GaussianPacketFamily};
use cqm_core::quadrature::{integrate as quad, QuadOptions};
use cqm_core::rotor::{
    classical_hamiltonian, evolve_rotor, lie_poisson_crosscheck, measured_precession_rate, orbit_geometry_report,
    rma_structure_constants, IntrinsicMoments, Orientation, RotorState,
};
use cqm_core::schrodinger::{
    fidelity_to_family, init_gaussian, scatter_packet, Grid, PacketRunOptions, PacketScattering,
};
use nalgebra::{DMatrix, Vector3};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

type Outcome = Result<String, String>;

fn barrier() -> BarrierPotential {
    BarrierPotential::new(1.0, 8.0).unwrap()
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok { Ok(detail) } else { Err(detail) }
}

/// The α = 400, k̄ = 1 packet is used by two criteria; it is run once.
fn threshold_packet() -> &'static PacketScattering {
    static RUN: OnceLock<PacketScattering> = OnceLock::new();
    RUN.get_or_init(|| scatter_packet(400.0, 1.0, &barrier(), &PacketRunOptions::default()).expect("packet run"))
}

fn criterion_1() -> Outcome {
    let b = barrier();
    let k_res = (1.0 + (PI / 8.0).powi(2)).sqrt();
    let res_err = (b.t_quantum(k_res) - 1.0).abs();
    // textbook tunnelling form with E = k², V0 = 1, κ² = 1 − k²
    let mut worst = 0.0_f64;
    for i in 1..1000 {
        let k = i as f64 / 1000.0;
        let kappa = (1.0 - k * k).sqrt();
        let a = 4.0 * k * k * kappa * kappa;
        let want = a / (a + (kappa * 8.0).sinh().powi(2));
        worst = worst.max((b.t_quantum(k) - want).abs());
    }
    check(
        res_err <= 1e-12 && worst <= 1e-12,
        format!("|T(k_res) - 1| = {res_err:.2e}, max textbook deviation on (0,1) = {worst:.2e} (limit 1e-12)"),
    )
}

fn criterion_2() -> Outcome {
    let b = barrier();
    let want = 1.0 / 17.0;
    let at_one = (b.t_quantum(1.0) - want).abs();
    let around = (b.t_quantum(1.0 - 1e-10) - want).abs().max((b.t_quantum(1.0 + 1e-10) - want).abs());
    let measured = threshold_packet().transmission;
    let averaged = b.t_quantum_avg(400.0, 1.0).map_err(|e| e.to_string())?;
    let packet_err = (measured - averaged).abs();
    check(
        at_one <= 1e-9 && around <= 1e-9 && packet_err <= 0.02,
        format!(
            "|T(1) - 1/17| = {at_one:.2e}, one-sided {around:.2e}; packet T = {measured:.4} vs momentum-averaged {averaged:.4} \
             (|diff| = {packet_err:.4}, limit 0.02; plane-wave 1/17 = {want:.4})"
        ),
    )
}

fn criterion_3() -> Outcome {
    let b = barrier();
    let kbars = [1.1, 1.3, 1.5, 1.7, 2.0];
    let measured: Vec<f64> = kbars
        .par_iter()
        .map(|&k| scatter_packet(400.0, k, &b, &PacketRunOptions::default()).map(|r| r.transmission))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    let mut sqrt_worst = 0.0_f64;
    let mut lin_worst = 0.0_f64;
    for (&k, &m) in kbars.iter().zip(&measured) {
        let s = b.t_quantum_avg_with(400.0, k, TransmissionFormula::SquareRoot).map_err(|e| e.to_string())?;
        let l = b.t_quantum_avg_with(400.0, k, TransmissionFormula::Linear).map_err(|e| e.to_string())?;
        sqrt_worst = sqrt_worst.max((m - s).abs());
        lin_worst = lin_worst.max((m - l).abs());
    }
    check(
        sqrt_worst <= 0.02 && lin_worst > 0.05,
        format!(
            "square-root formula max |diff| = {sqrt_worst:.4} (limit 0.02); linear variant max |diff| = {lin_worst:.4} \
             (must exceed 0.05); measured {measured:.4?}"
        ),
    )
}

fn criterion_4() -> Outcome {
    let b = barrier();
    let mut worst = 0.0_f64;
    for i in 0..=3000 {
        let k = i as f64 / 1000.0;
        if (k - 1.0).abs() < 0.05 {
            continue;
        }
        let ideal = if k > 1.0 { 1.0 } else { 0.0 };
        worst = worst.max((b.t_classical_avg(1e4, k).map_err(|e| e.to_string())? - ideal).abs());
    }
    let half = (b.t_classical_avg(1e4, 1.0).map_err(|e| e.to_string())? - 0.5).abs();
    check(
        worst <= 1e-3 && half <= 1e-12,
        format!("max |T_cm - T_icm| away from threshold = {worst:.2e} (limit 1e-3), |T_cm(1) - 1/2| = {half:.2e}"),
    )
}

fn criterion_5() -> Outcome {
    let b = barrier();
    let mut min_peak = f64::INFINITY;
    for alpha in [0.01, 0.1, 0.25, 0.5, 1.0, 1.5, 2.0] {
        // the profile is symmetric about L/2, so its maximum sits there
        let peak = b.smeared_potential(alpha, 4.0).map_err(|e| e.to_string())?;
        let scan = (0..=800).map(|i| b.smeared_potential(alpha, -4.0 + 0.02 * i as f64).unwrap()).fold(0.0, f64::max);
        min_peak = min_peak.min(peak.max(scan));
    }
    // direct quadrature of the Gaussian-weighted barrier
    let opts = QuadOptions { abs_tol: 1e-14, rel_tol: 1e-14, ..QuadOptions::default() };
    let mut worst = 0.0_f64;
    for alpha in [0.25, 1.0, 2.0, 8.0] {
        for i in 0..100 {
            let x = -6.0 + 20.0 * i as f64 / 99.0;
            let w = |y: f64| (-(y - x) * (y - x) / alpha).exp() / (PI * alpha).sqrt();
            let q = quad(w, 0.0, 8.0, opts).map_err(|e| e.to_string())?.value;
            worst = worst.max((q - b.smeared_potential(alpha, x).unwrap()).abs());
        }
    }
    check(
        min_peak >= 0.999 && worst <= 1e-10,
        format!("min over alpha <= 2 of max Vbar = {min_peak:.6} (limit 0.999), quadrature vs erf = {worst:.2e} (limit 1e-10)"),
    )
}

/// `dV̄/dx̄` for V0 = 1, L = 8, written from the Gaussian-smeared step.
fn smeared_slope(alpha: f64, x: f64) -> f64 {
    ((-(x * x) / alpha).exp() - (-(8.0 - x).powi(2) / alpha).exp()) / (PI * alpha).sqrt()
}

fn smeared_value(alpha: f64, x: f64) -> f64 {
    0.5 * (libm::erf((8.0 - x) / alpha.sqrt()) + libm::erf(x / alpha.sqrt()))
}

/// Classical RK4 for ẋ = 2k, k̇ = −V̄'(x).
fn rk4_hamilton(alpha: f64, z0: [f64; 2], t_end: f64, dt: f64, every: usize) -> Vec<[f64; 2]> {
    let f = |z: [f64; 2]| [2.0 * z[1], -smeared_slope(alpha, z[0])];
    let n = (t_end / dt).round() as usize;
    let mut z = z0;
    let mut out = vec![z];
    for i in 1..=n {
        let k1 = f(z);
        let k2 = f([z[0] + 0.5 * dt * k1[0], z[1] + 0.5 * dt * k1[1]]);
        let k3 = f([z[0] + 0.5 * dt * k2[0], z[1] + 0.5 * dt * k2[1]]);
        let k4 = f([z[0] + dt * k3[0], z[1] + dt * k3[1]]);
        for c in 0..2 {
            z[c] += dt / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
        }
        if i % every == 0 {
            out.push(z);
        }
    }
    out
}

fn criterion_6() -> Outcome {
    let b = barrier();
    let mut traj_worst = 0.0_f64;
    let mut drift_worst = 0.0_f64;
    for (alpha, z0) in [(1.0, [-6.0, 1.05]), (4.0, [-10.0, 0.8]), (0.5, [3.0, -0.3])] {
        let fam = GaussianPacketFamily::new(alpha, b).unwrap();
        let outs: Vec<f64> = (0..=50).map(|i| i as f64).collect();
        let traj = integrate(&fam, &z0, (0.0, 50.0), 1e-12, &outs).map_err(|e| e.to_string())?;
        let reference = rk4_hamilton(alpha, z0, 50.0, 1e-3, 1000);
        for (s, r) in traj.states.iter().zip(&reference) {
            traj_worst = traj_worst.max((s[0] - r[0]).abs()).max((s[1] - r[1]).abs());
        }
        let h0 = fam.energy(&z0).unwrap();
        drift_worst = drift_worst.max(traj.energies.iter().fold(0.0_f64, |m, e| m.max((e - h0).abs())));
    }

    // smeared-threshold step at α = 1, starting far upstream
    let fam = GaussianPacketFamily::new(1.0, b).unwrap();
    let gap = smeared_value(1.0, 4.0) - smeared_value(1.0, fam.start_position());
    let k_th = gap.sqrt();
    let ks: Vec<f64> = (1..=200).map(|i| i as f64 / 100.0).filter(|k| (k - k_th).abs() >= 0.01).collect();
    let step_mismatch: usize = ks
        .par_iter()
        .map(|&k| {
            let want = if k > k_th { 1.0 } else { 0.0 };
            usize::from(constrained_transmission(&fam, k).unwrap() != want)
        })
        .sum();

    // narrow packet against the ideal step
    let fam = GaussianPacketFamily::new(0.01, b).unwrap();
    let ks: Vec<f64> = (1..=300).map(|i| i as f64 / 100.0).filter(|k| (k - 1.0).abs() >= 0.05).collect();
    let ideal_mismatch: usize = ks
        .par_iter()
        .map(|&k| usize::from(constrained_transmission(&fam, k).unwrap() != if k > 1.0 { 1.0 } else { 0.0 }))
        .sum();

    check(
        traj_worst <= 1e-8 && drift_worst <= 1e-8 && step_mismatch == 0 && ideal_mismatch == 0,
        format!(
            "trajectory vs RK4 Hamilton = {traj_worst:.2e}, energy drift = {drift_worst:.2e} (limits 1e-8); \
             smeared-step mismatches = {step_mismatch}, alpha=0.01 vs ideal mismatches = {ideal_mismatch}"
        ),
    )
}

fn criterion_7() -> Outcome {
    let m = IntrinsicMoments::new(1.0, 2.0, 3.0).unwrap();
    let l0 = Vector3::new(0.4, 1.0, 0.7);
    let s0 = RotorState::new(Orientation::identity(), l0);
    let omega0 = Vector3::new(l0[0] / 1.0, l0[1] / 2.0, l0[2] / 3.0).norm();
    let period = 2.0 * PI / omega0;
    let t_end = 1000.0 * period;
    let outs: Vec<f64> = (0..=10_000).map(|i| t_end * i as f64 / 10_000.0).collect();
    let traj = evolve_rotor(&m, &s0, t_end, 1e-12, &outs).map_err(|e| e.to_string())?;
    let h0 = 0.5 * (l0[0] * l0[0] / 1.0 + l0[1] * l0[1] / 2.0 + l0[2] * l0[2] / 3.0);
    let lsq0 = l0.norm_squared();
    let mut h_rel = 0.0_f64;
    let mut l_rel = 0.0_f64;
    for s in &traj.states {
        let l = s.lbar;
        let h = 0.5 * (l[0] * l[0] / 1.0 + l[1] * l[1] / 2.0 + l[2] * l[2] / 3.0);
        h_rel = h_rel.max((h - h0).abs() / h0);
        l_rel = l_rel.max((l.norm_squared() - lsq0).abs() / lsq0);
    }
    let h_core = (classical_hamiltonian(&m, &s0) - h0).abs();

    let cross = lie_poisson_crosscheck(&m, &s0, 10.0 * period, 1e-12, 201).map_err(|e| e.to_string())?;

    // symmetric top (2, 2, 1): (L̄₁, L̄₂) turn at λ = L̄₃(1/Ī₃ − 1/I⊥)
    let (i_fig, i_perp) = (1.0, 2.0);
    let sym = IntrinsicMoments::new(i_perp, i_perp, i_fig).unwrap();
    let lam = l0[2] * (1.0 / i_fig - 1.0 / i_perp);
    let t_sym = 10.0 * 2.0 * PI / lam;
    let outs: Vec<f64> = (0..=400).map(|i| t_sym * i as f64 / 400.0).collect();
    let st = evolve_rotor(&sym, &RotorState::new(Orientation::identity(), l0), t_sym, 1e-12, &outs)
        .map_err(|e| e.to_string())?;
    let mut closed_form = 0.0_f64;
    for (t, s) in st.times.iter().zip(&st.states) {
        let (c, sn) = ((lam * t).cos(), (lam * t).sin());
        let want = Vector3::new(l0[0] * c + l0[1] * sn, -l0[0] * sn + l0[1] * c, l0[2]);
        closed_form = closed_form.max((s.lbar - want).amax());
    }
    let rate = measured_precession_rate(&sym, &st).map_err(|e| e.to_string())?;
    let rate_rel = (rate - lam).abs() / lam;

    check(
        h_rel <= 1e-9 && l_rel <= 1e-9 && h_core <= 1e-15 && cross.max_deviation <= 1e-6 && rate_rel <= 1e-6
            && closed_form <= 1e-6,
        format!(
            "1000 periods: rel |dH| = {h_rel:.2e}, rel |d|L|^2| = {l_rel:.2e}; Euler vs Lie-Poisson over 10 periods = {:.2e}; \
             precession rate rel err = {rate_rel:.2e}, closed-form deviation = {closed_form:.2e}",
            cross.max_deviation
        ),
    )
}

fn criterion_8() -> Outcome {
    let m = IntrinsicMoments::new(1.0, 2.0, 3.0).unwrap();
    let report = orbit_geometry_report(&m).map_err(|e| e.to_string())?;
    let sc = rma_structure_constants();
    let rho = Density::new(vec![1.0, 2.0, 3.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
    let oa = orbit_analysis(&sc, &rho).map_err(|e| e.to_string())?;
    // each diagonal-inertia generator must be annihilated by the Poisson tensor
    let sigma = DMatrix::from_fn(9, 9, |a, b| (0..9).map(|k| sc.get(a, b, k) * rho.0[k]).sum::<f64>());
    let diag_null = (0..3).map(|a| sigma.column(a).amax()).fold(0.0, f64::max);
    let kernel_off = oa
        .kernel_basis
        .iter()
        .map(|v| v.0.rows(3, 6).amax())
        .fold(0.0, f64::max);
    // Jacobi identity on the structure constants, summed directly
    let mut jacobi = 0.0_f64;
    for a in 0..9 {
        for b in 0..9 {
            for c in 0..9 {
                for m in 0..9 {
                    let s: f64 = (0..9)
                        .map(|k| sc.get(a, b, k) * sc.get(k, c, m) + sc.get(b, c, k) * sc.get(k, a, m) + sc.get(c, a, k) * sc.get(k, b, m))
                        .sum();
                    jacobi = jacobi.max(s.abs());
                }
            }
        }
    }
    check(
        oa.rank == 6 && report.orbit_dim == 6 && report.kernel_is_diagonal_inertia && diag_null == 0.0 && kernel_off < 1e-9
            && jacobi <= 1e-12,
        format!(
            "rank = {}, kernel = {:?}, kernel leakage = {kernel_off:.1e}, Jacobi residual = {jacobi:.1e}",
            oa.rank, report.kernel
        ),
    )
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn criterion_9() -> Outcome {
    let rep = MatrixRepresentation::spin1();
    // explicit spin-1 matrices in the m = 1, 0, −1 basis
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let jx = CMatrix::from_row_slice(3, 3, &[c(0.0), c(s), c(0.0), c(s), c(0.0), c(s), c(0.0), c(s), c(0.0)]);
    let jz = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(1.0), c(0.0), c(-1.0)]));
    let cmax = |m: CMatrix| m.iter().fold(0.0_f64, |a, z| a.max(z.norm()));
    let gen_err = cmax(&rep.generators()[0] - &jx).max(cmax(&rep.generators()[2] - &jz));
    let hams = [("Jz^2", &jz * &jz), ("Jx", jx.clone())];
    let k = FiniteGroupAction::one_parameter(&rep, &AlgebraElement::basis(3, 2), 2.0 * PI, 12).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let random_density = |rng: &mut ChaCha8Rng| {
        let a = CMatrix::from_fn(3, 3, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        let m = &a * a.adjoint();
        let tr = m.trace();
        QuantalDensity::new(m / tr).unwrap()
    };
    let gs: Vec<CMatrix> = (0..8)
        .map(|_| {
            let b = AlgebraElement::new((0..3).map(|_| rng.random_range(-1.0..1.0)).collect());
            rep.group_element(&b, rng.random_range(0.0..PI)).unwrap()
        })
        .collect();
    let mut checked = 0;
    let mut skipped = 0;
    let mut worst_residual = 0.0_f64;
    let mut worst_mismatch = 0.0_f64;
    let mut idempotence = 0.0_f64;
    for _ in 0..20 {
        let raw = random_density(&mut rng);
        let avg = gauge_average(&rep, &raw, &k).map_err(|e| e.to_string())?;
        let twice = gauge_average(&rep, &avg, &k).map_err(|e| e.to_string())?;
        idempotence = idempotence.max((avg.matrix() - twice.matrix()).iter().fold(0.0, |m, z| m.max(z.norm())));
        for rho in [&raw, &avg] {
            for (_, h) in &hams {
                if energy_fibre_variation(&rep, rho, h, &k, &gs).map_err(|e| e.to_string())? > 1e-10 {
                    skipped += 1;
                    continue;
                }
                checked += 1;
                let ev = expectation_evolution_check(&rep, rho, h, &k, 1e-10).map_err(|e| e.to_string())?;
                worst_residual = worst_residual.max(ev.residual);
                // same quantity written out: Tr(h† ρ h [G, H]) − Tr(ρ [G, H])
                for g in [&jx, &jz] {
                    let comm = g * h - h * g;
                    let base = (rho.matrix() * &comm).trace();
                    for el in k.elements() {
                        let moved = (el.adjoint() * rho.matrix() * el * &comm).trace();
                        worst_mismatch = worst_mismatch.max((moved - base).norm());
                    }
                }
            }
        }
    }
    check(
        gen_err < 1e-14 && checked > 0 && worst_residual <= 1e-10 && worst_mismatch <= 1e-10 && idempotence <= 1e-12,
        format!(
            "{checked} (density, H) pairs satisfy the fibre condition ({skipped} do not): max residual = {worst_residual:.1e}, \
             direct trace check = {worst_mismatch:.1e}; gauge-average idempotence = {idempotence:.1e}"
        ),
    )
}

fn baseline_fidelity() -> (f64, f64) {
    let text = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/baselines/fidelity.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    (v["fidelity_after_scattering"].as_f64().unwrap(), v["tolerance"].as_f64().unwrap())
}

fn criterion_10() -> Outcome {
    let run = threshold_packet();
    let after = fidelity_to_family(&run.grid, &run.final_state, 400.0).fidelity;
    let grid = Grid::new(-200.0, 200.0, 8001).unwrap();
    let fresh = init_gaussian(&grid, 400.0, 7.0, 1.0).map_err(|e| e.to_string())?;
    let fresh_fid = fidelity_to_family(&grid, &fresh, 400.0).fidelity;
    let (baseline, tol) = baseline_fidelity();
    check(
        after < 0.99 && fresh_fid >= 1.0 - 1e-8 && (after - baseline).abs() <= tol,
        format!("after scattering = {after:.7} (baseline {baseline:.7}), fresh packet = {fresh_fid:.12}"),
    )
}

fn run_cli(cmd: &str, config: &Path, out: &Path, threads: usize) -> Result<(), String> {
    let status = Command::new(env!("CARGO_BIN_EXE_cqm"))
        .args([cmd, "--config"])
        .arg(config)
        .arg("--out")
        .arg(out)
        .args(["--threads", &threads.to_string()])
        .stdout(std::process::Stdio::null())
        .status()
        .map_err(|e| e.to_string())?;
    if status.success() { Ok(()) } else { Err(format!("{cmd} exited with {status}")) }
}

fn dir_listing(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap())
        })
        .collect();
    v.sort();
    v
}

fn criterion_11() -> Outcome {
    let root: PathBuf = std::env::temp_dir().join(format!("cqm-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&root).map_err(|e| e.to_string())?;
    let configs = [
        ("fig1", r#"{"alphas": [0.25, 1, 2, 8]}"#),
        ("fig2", r#"{"alphas": [0.25, 4, "inf"], "k_grid": {"min": 0.05, "max": 3.0, "n": 120}}"#),
        ("rotor", r#"{"periods": 100}"#),
    ];
    let mut compared = 0;
    let mut differing = Vec::new();
    for (cmd, cfg) in configs {
        let cfg_path = root.join(format!("{cmd}.json"));
        std::fs::write(&cfg_path, cfg).map_err(|e| e.to_string())?;
        let (a, b) = (root.join(format!("{cmd}-a")), root.join(format!("{cmd}-b")));
        run_cli(cmd, &cfg_path, &a, 1)?;
        run_cli(cmd, &cfg_path, &b, 3)?;
        let (la, lb) = (dir_listing(&a), dir_listing(&b));
        if la.iter().map(|x| &x.0).ne(lb.iter().map(|x| &x.0)) {
            differing.push(format!("{cmd}: file sets differ"));
        }
        for ((name, x), (_, y)) in la.iter().zip(&lb) {
            if name.ends_with(".csv") || name.ends_with(".json") {
                compared += 1;
                if x != y {
                    differing.push(format!("{cmd}/{name}"));
                }
            }
        }
    }
    let _ = std::fs::remove_dir_all(&root);
    check(
        differing.is_empty() && compared > 0,
        format!("{compared} CSV/JSON files compared across repeated runs (1 vs 3 threads), differing: {differing:?}"),
    )
}

fn main() {
    let criteria: [(usize, fn() -> Outcome); 11] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
        (9, criterion_9),
        (10, criterion_10),
        (11, criterion_11),
    ];
    let mut failures = 0;
    for (n, f) in criteria {
        let start = Instant::now();
        let (tag, detail) = match std::panic::catch_unwind(f) {
            Ok(Ok(d)) => ("PASS", d),
            Ok(Err(d)) => ("FAIL", d),
            Err(_) => ("FAIL", "panicked".to_string()),
        };
        if tag == "FAIL" {
            failures += 1;
        }
        println!("criterion {n} {tag}: {detail} [{:.1}s]", start.elapsed().as_secs_f64());
    }
    println!("acceptance: {} passed, {failures} failed", 11 - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
