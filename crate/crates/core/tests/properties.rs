use cqm_core::algebra::*;
use cqm_core::barrier::BarrierPotential;
use cqm_core::constrained::{integrate, GaussianPacketFamily, CoherentFamily};
use cqm_core::rotor::{
    classical_hamiltonian, evolve_rotor, rma_structure_constants, IntrinsicMoments, Orientation, RotorState,
};
use nalgebra::{DVector, Vector3};
use num_complex::Complex64;
use proptest::prelude::*;

fn vec_of(n: usize, scale: f64) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-scale..scale, n)
}

fn random_density(re: &[f64], im: &[f64], d: usize) -> QuantalDensity {
    let a = CMatrix::from_fn(d, d, |r, c| Complex64::new(re[r * d + c], im[r * d + c]));
    let m = &a * a.adjoint();
    let tr = m.trace().re;
    let m = m / Complex64::new(tr, 0.0);
    QuantalDensity::new((&m + m.adjoint()) * Complex64::new(0.5, 0.0)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn poisson_matrix_is_linear_and_antisymmetric(r1 in vec_of(9, 5.0), r2 in vec_of(9, 5.0), s in -3.0..3.0f64) {
        let sc = rma_structure_constants();
        let (a, b) = (Density::new(r1.clone()), Density::new(r2.clone()));
        let sum = Density::new(r1.iter().zip(&r2).map(|(x, y)| s * x + y).collect());
        let pa = poisson_matrix(&sc, &a).unwrap();
        let pb = poisson_matrix(&sc, &b).unwrap();
        let ps = poisson_matrix(&sc, &sum).unwrap();
        prop_assert!((&ps - (&pa * s + &pb)).amax() < 1e-12);
        prop_assert_eq!(&pa + pa.transpose(), nalgebra::DMatrix::zeros(9, 9));
    }

    #[test]
    fn brackets_satisfy_jacobi(x in vec_of(9, 2.0), y in vec_of(9, 2.0), z in vec_of(9, 2.0)) {
        let sc = rma_structure_constants();
        let (x, y, z) = (AlgebraElement::new(x), AlgebraElement::new(y), AlgebraElement::new(z));
        let b = |p: &AlgebraElement, q: &AlgebraElement| bracket(&sc, p, q).unwrap();
        let j = b(&b(&x, &y), &z).0 + b(&b(&y, &z), &x).0 + b(&b(&z, &x), &y).0;
        prop_assert!(j.amax() < 1e-12);
    }

    #[test]
    fn coadjoint_flow_preserves_so3_casimir(r in vec_of(3, 3.0), b in vec_of(3, 1.0), theta in -4.0..4.0f64) {
        let sc = StructureConstants::so3();
        let rho = Density::new(r);
        let out = coadjoint_exp(&sc, &rho, &AlgebraElement::new(b), theta).unwrap();
        prop_assert!((out.0.norm_squared() - rho.0.norm_squared()).abs() < 1e-10 * (1.0 + rho.0.norm_squared()));
    }

    #[test]
    fn lie_poisson_flow_preserves_casimir(r in vec_of(3, 3.0), g in vec_of(3, 3.0)) {
        let sc = StructureConstants::so3();
        let rho = Density::new(r);
        let v = lie_poisson_rhs(&sc, &rho, &DVector::from_vec(g)).unwrap();
        prop_assert!(v.dot(&rho.0).abs() < 1e-12);
    }

    #[test]
    fn gauge_average_is_idempotent(re in vec_of(9, 1.0), im in vec_of(9, 1.0), n in 1usize..9) {
        let rep = MatrixRepresentation::spin1();
        let rho = random_density(&re, &im, 3);
        let k = FiniteGroupAction::one_parameter(&rep, &AlgebraElement::basis(3, 2), 2.0 * std::f64::consts::PI, n).unwrap();
        let once = gauge_average(&rep, &rho, &k).unwrap();
        let twice = gauge_average(&rep, &once, &k).unwrap();
        let diff = (once.matrix() - twice.matrix()).iter().fold(0.0f64, |m, z| m.max(z.norm()));
        prop_assert!(diff <= 1e-12);
    }

    #[test]
    fn moment_map_is_equivariant(re in vec_of(9, 1.0), im in vec_of(9, 1.0), b in vec_of(3, 1.0), theta in -3.0..3.0f64) {
        // ρ(g†ρ̂g) equals the coadjoint action of g on ρ(ρ̂)
        let rep = MatrixRepresentation::spin1();
        let rho = random_density(&re, &im, 3);
        let be = AlgebraElement::new(b);
        let g = rep.group_element(&be, theta).unwrap();
        let lhs = density_from_matrix(&rep, &conjugate_density(&rep, &rho, &g).unwrap()).unwrap();
        let rhs = coadjoint_exp(rep.structure_constants(), &density_from_matrix(&rep, &rho).unwrap(), &be, theta).unwrap();
        prop_assert!((lhs.0 - rhs.0).amax() < 1e-10);
    }

    #[test]
    fn classical_average_is_symmetric_about_threshold(alpha in 0.01..1e3f64, d in 0.0..3.0f64, v0 in 0.1..4.0f64) {
        let b = BarrierPotential::new(v0, 8.0).unwrap();
        let k0 = b.threshold();
        let up = b.t_classical_avg(alpha, k0 + d).unwrap();
        let down = b.t_classical_avg(alpha, k0 - d).unwrap();
        prop_assert!((up + down - 1.0).abs() < 1e-12);
    }

    #[test]
    fn probabilities_lie_in_unit_interval(k in 0.0..5.0f64, alpha in 0.05..500.0f64, l in 0.5..12.0f64) {
        let b = BarrierPotential::new(1.0, l).unwrap();
        for t in [b.t_ideal(k), b.t_quantum(k), b.t_classical_avg(alpha, k).unwrap()] {
            prop_assert!((0.0..=1.0).contains(&t));
        }
    }

    #[test]
    fn smeared_potential_is_symmetric_and_bounded(x in -20.0..28.0f64, alpha in 0.01..50.0f64) {
        let b = BarrierPotential::default();
        let v = b.smeared_potential(alpha, x).unwrap();
        let mirror = b.smeared_potential(alpha, 8.0 - x).unwrap();
        prop_assert!((v - mirror).abs() < 1e-14);
        prop_assert!(v >= 0.0 && v <= b.smeared_potential_max(alpha).unwrap() + 1e-15);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, ..ProptestConfig::default() })]

    #[test]
    fn constrained_energy_is_conserved(x0 in -15.0..20.0f64, k0 in -2.0..2.0f64, alpha in 0.2..20.0f64) {
        let fam = GaussianPacketFamily::new(alpha, BarrierPotential::default()).unwrap();
        let tol = 1e-10;
        let outs: Vec<f64> = (0..=20).map(|i| i as f64).collect();
        let traj = integrate(&fam, &[x0, k0], (0.0, 20.0), tol, &outs).unwrap();
        let h0 = fam.energy(&[x0, k0]).unwrap();
        for (t, e) in traj.times.iter().zip(&traj.energies) {
            prop_assert!((e - h0).abs() <= 100.0 * tol * t + 1e-14 * (1.0 + h0.abs()));
        }
    }

    #[test]
    fn rotor_casimirs_are_conserved(l in vec_of(3, 2.0), axis in 0usize..3, angle in -3.0..3.0f64) {
        let m = IntrinsicMoments::new(1.0, 2.0, 3.0).unwrap();
        let s0 = RotorState::new(Orientation::axis_rotation(axis, angle), Vector3::from_vec(l));
        let traj = evolve_rotor(&m, &s0, 30.0, 1e-12, &[10.0, 20.0, 30.0]).unwrap();
        let h0 = classical_hamiltonian(&m, &s0);
        let l0 = s0.lbar.norm_squared();
        for s in &traj.states {
            prop_assert!((classical_hamiltonian(&m, s) - h0).abs() <= 1e-9 * (1.0 + h0));
            prop_assert!((s.lbar.norm_squared() - l0).abs() <= 1e-9 * (1.0 + l0));
            prop_assert!((s.space_angular_momentum() - s0.space_angular_momentum()).amax() <= 1e-8);
        }
    }
}
