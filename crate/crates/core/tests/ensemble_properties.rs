// Copyright 2026 The qtransport Authors
// SPDX-License-Identifier: Apache-2.0

use proptest::prelude::*;
use qtransport_core::collision::{
    apply_gs_collision, general_collision_step, GsCollisionSpec, RateMatrix,
};
use qtransport_core::diagnostics::{norm_decomposition, scan_negativity};
use qtransport_core::evolution::{evolve_ensemble, Propagator, Stencil};
use qtransport_core::grid::{make_grid, wigner_momentum_grid, SpatialGrid};
use qtransport_core::potential::double_barrier;
use qtransport_core::state::{charge_density, gaussian_packet};
use qtransport_core::units::UnitSystem;
use qtransport_core::wigner::wigner_from_ensemble;
use qtransport_core::{PureState, SignedEnsemble};

fn grid() -> SpatialGrid {
    make_grid(0.0, 120.0, 400).unwrap()
}

fn propagator(g: &SpatialGrid) -> Propagator {
    let v = double_barrier(g, 70.0, 0.8, 0.2, 4.0).unwrap();
    Propagator::new(&v, 1.0, 0.2, Stencil::FivePoint, 4, UnitSystem::default()).unwrap()
}

fn packet(g: &SpatialGrid, x0: f64, k0: f64, a0: f64) -> PureState {
    gaussian_packet(g, x0, k0, a0).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn cancelled_pair_leaves_no_trace(
        x_psi in 30.0f64..90.0, k_psi in -1.0f64..1.0,
        x_phi in 30.0f64..90.0, k_phi in -1.0f64..1.0,
        steps in 1usize..30,
    ) {
        let g = grid();
        let p = propagator(&g);
        let psi = packet(&g, x_psi, k_psi, 6.0);
        let phi = packet(&g, x_phi, k_phi, 5.0);
        let padded = SignedEnsemble::from_pairs([(1.0, psi.clone()), (-1.0, psi), (1.0, phi.clone())], 1).unwrap();
        let bare = SignedEnsemble::pure(phi);
        let t = steps as f64;
        let a = evolve_ensemble(&p, &padded, 0.0, t, &[]).unwrap().final_ensemble;
        let b = evolve_ensemble(&p, &bare, 0.0, t, &[]).unwrap().final_ensemble;
        let (qa, qb) = (charge_density(&a), charge_density(&b));
        for (x, y) in qa.values().iter().zip(qb.values()) {
            prop_assert!((x - y).abs() <= 1e-12);
        }
        let kg = wigner_momentum_grid(&g);
        let (fa, fb) = (wigner_from_ensemble(&a, &kg).unwrap(), wigner_from_ensemble(&b, &kg).unwrap());
        for (x, y) in fa.values().iter().zip(fb.values()) {
            prop_assert!((x - y).abs() <= 1e-12);
        }
        prop_assert_eq!(a.trace(), 1.0);
    }

    #[test]
    fn gs_events_keep_charge_non_negative(
        centres in proptest::collection::vec(30.0f64..90.0, 1..4),
        k_f in -1.0f64..1.0,
        electrons in 1u32..4,
        steps in 1usize..40,
    ) {
        let g = grid();
        let p = propagator(&g);
        let n = centres.len() as f64;
        let e = SignedEnsemble::from_pairs(centres.iter().map(|&x| (1.0 / n, packet(&g, x, 0.6, 5.0))), electrons)
            .unwrap();
        let spec = GsCollisionSpec { source_index: 0, occupation: 1, final_state: packet(&g, 60.0, k_f, 8.0) };
        let Ok(post) = apply_gs_collision(&e, &spec) else {
            // Source weight below one electron's share: refused, nothing to check.
            return Ok(());
        };
        prop_assert!(post.all_weights_nonnegative());
        prop_assert!((post.trace() - e.trace()).abs() <= 1e-15);
        let traj = evolve_ensemble(&p, &post, 0.0, steps as f64, &[0.0, steps as f64]).unwrap();
        for snap in traj.snapshots {
            let q = charge_density(&snap);
            prop_assert!(scan_negativity(&q, 1e-10, 0.0).unwrap().is_clean());
            prop_assert!(norm_decomposition(&q).negative.abs() < 1e-10);
        }
    }
}

#[test]
fn rate_steps_interleaved_with_evolution_stay_physical() {
    let g = grid();
    let p = propagator(&g);
    let mut e = SignedEnsemble::from_pairs(
        [
            (0.6, packet(&g, 40.0, 0.6, 5.0)),
            (0.3, packet(&g, 60.0, -0.4, 6.0)),
            (0.1, packet(&g, 80.0, 0.1, 4.0)),
        ],
        1,
    )
    .unwrap();
    let z = RateMatrix::new(ndarray::arr2(&[
        [0.0, 0.2, 0.1],
        [0.3, 0.0, 0.0],
        [0.05, 0.4, 0.0],
    ]))
    .unwrap();
    for _ in 0..20 {
        e = general_collision_step(&e, &z, 1.0).unwrap();
        e = evolve_ensemble(&p, &e, 0.0, 1.0, &[])
            .unwrap()
            .final_ensemble;
        assert!(e.all_weights_nonnegative());
        assert!((e.trace() - 1.0).abs() < 1e-14);
        assert!(charge_density(&e).min().1 >= 0.0);
    }
}

#[test]
fn gs_with_source_as_final_state_is_identity_on_density() {
    let g = grid();
    let psi = packet(&g, 50.0, 0.5, 5.0);
    let e = SignedEnsemble::pure(psi.clone())
        .with_electron_count(2)
        .unwrap();
    let post = apply_gs_collision(
        &e,
        &GsCollisionSpec {
            source_index: 0,
            occupation: 1,
            final_state: psi,
        },
    )
    .unwrap();
    let (qa, qb) = (charge_density(&e), charge_density(&post));
    for (x, y) in qa.values().iter().zip(qb.values()) {
        assert!((x - y).abs() <= 1e-15);
    }
}
