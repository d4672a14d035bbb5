mod common;

use nalgebra::DMatrix;
use proptest::prelude::*;
use stokes_mg::discretization::{assemble_rhs, net_dirichlet_inflow, BoundaryData, LevelOperator};
use stokes_mg::domain::{classify_dofs, CellGrid, CellLabel, DofKind, DofStatus};
use stokes_mg::error::StokesError;
use stokes_mg::scenarios::{build, ScenarioKind, ScenarioSpec};
use stokes_mg::verify::commutativity_report;

use common::*;

fn ringed(n: usize, h: f64) -> CellGrid {
    let e = n + 2;
    let mut g = CellGrid::with_origin(2, &[e, e], &[-1, -1], h, vec![CellLabel::Interior; e * e]).unwrap();
    for j in 0..e {
        for i in 0..e {
            if i == 0 || j == 0 || i == e - 1 || j == e - 1 {
                g.set_label([i, j, 0], CellLabel::Dirichlet);
            }
        }
    }
    g
}

#[test]
fn zero_maps_to_zero_and_length_is_checked() {
    let op = LevelOperator::from_grid(ringed(4, 0.25), 1e-3, 0.0);
    assert!(op.apply(&vec![0.0; op.len()]).unwrap().iter().all(|&v| v == 0.0));
    assert!(matches!(op.apply(&[1.0, 2.0]), Err(StokesError::LengthMismatch { .. })));
}

#[test]
fn hand_assembled_two_by_two() {
    // 2x2 interior cells ringed by Dirichlet cells, h = 0.5, eta = 2:
    // lap = eta/h^2 = 8, 1/h = 2. Order u0 u1 v0 v1 p0 p1 p2 p3.
    let op = LevelOperator::from_grid(ringed(2, 0.5), 2.0, 0.0);
    assert_eq!(op.len(), 8);
    let (l, g) = (8.0, 2.0);
    let want = DMatrix::from_row_slice(
        8,
        8,
        &[
            4.0 * l, -l, 0.0, 0.0, -g, g, 0.0, 0.0, //
            -l, 4.0 * l, 0.0, 0.0, 0.0, 0.0, -g, g, //
            0.0, 0.0, 4.0 * l, -l, -g, 0.0, g, 0.0, //
            0.0, 0.0, -l, 4.0 * l, 0.0, -g, 0.0, g, //
            -g, 0.0, -g, 0.0, 0.0, 0.0, 0.0, 0.0, //
            g, 0.0, 0.0, -g, 0.0, 0.0, 0.0, 0.0, //
            0.0, -g, g, 0.0, 0.0, 0.0, 0.0, 0.0, //
            0.0, g, 0.0, g, 0.0, 0.0, 0.0, 0.0,
        ],
    );
    let got = to_na(&op.assemble_dense().unwrap());
    assert_eq!(got, want);
    assert_eq!(dense_by_columns(&op), want);
}

#[test]
fn dense_operator_is_symmetric() {
    for spec in [ScenarioSpec::cavity2d(16), ScenarioSpec::cavity3d(5)] {
        let s = build(&spec).unwrap();
        let op = LevelOperator::new(s.grid, s.map, 1e-3, 1e-3);
        let a = dense_by_columns(&op);
        assert!(sym_defect(&a) < 1e-12, "{:?}", spec.name);
    }
}

#[test]
fn channel_operator_with_outflow_is_symmetric() {
    let s = build(&ScenarioSpec::cylinder2d(220, 41)).unwrap();
    let g = s.grid.coarsen().unwrap().coarsen().unwrap();
    let op = LevelOperator::from_grid(g, 1e-3, 0.0);
    assert!(op.len() < 5000);
    assert!(sym_defect(&dense_by_columns(&op)) < 1e-12);
}

#[test]
fn penalty_only_touches_pressure_diagonal() {
    let g = ringed(6, 1.0 / 6.0);
    let l = dense_by_columns(&LevelOperator::from_grid(g.clone(), 1e-3, 0.0));
    let lt = dense_by_columns(&LevelOperator::from_grid(g, 1e-3, 1e-3));
    let op = LevelOperator::from_grid(ringed(6, 1.0 / 6.0), 1e-3, 1e-3);
    let pr = op.map().pressure_range();
    for i in 0..op.len() {
        for j in 0..op.len() {
            let d = lt[(i, j)] - l[(i, j)];
            if i == j && pr.contains(&i) {
                assert_eq!(lt[(i, j)], -1e-3);
            } else {
                assert_eq!(d, 0.0);
            }
        }
    }
    let d0 = LevelOperator::from_grid(ringed(6, 1.0 / 6.0), 1e-3, 0.0);
    assert_eq!(
        &op.distributive_diagonal()[..op.map().velocity_len()],
        &d0.distributive_diagonal()[..op.map().velocity_len()]
    );
}

#[test]
fn constant_velocity_is_divergence_free_on_patch() {
    let op = patch_op(2, 6, 0.5, 1.0, 0.0);
    let mut x = vec![0.0; op.len()];
    for j in op.map().velocity_range(0) {
        x[j] = 1.0;
    }
    let y = op.apply(&x).unwrap();
    for j in op.map().pressure_range() {
        assert!(y[j].abs() < 1e-14);
    }
}

#[test]
fn zero_data_gives_zero_rhs() {
    let g = ringed(5, 0.2);
    let m = classify_dofs(&g);
    let b = assemble_rhs(&g, &m, &BoundaryData::zeros(&m), 1e-3).unwrap();
    assert!(b.iter().all(|&v| v == 0.0));
}

#[test]
fn lid_rhs_on_four_by_four_cavity() {
    let eta = 1e-3;
    let s = build(&ScenarioSpec::cavity2d(4)).unwrap();
    let b = s.rhs(eta).unwrap();
    let h = 0.25;
    let top = s.grid.extents()[1] - 2;
    for j in 0..b.len() {
        let loc = s.map.location(j);
        let want = match loc.kind {
            DofKind::Velocity(0) if loc.pos[1] == top => eta / (h * h),
            _ => 0.0,
        };
        assert!((b[j] - want).abs() < 1e-15, "dof {j} {:?}: {} vs {want}", loc, b[j]);
    }
    let sum: f64 = s.map.pressure_range().map(|j| b[j]).sum();
    assert_eq!(sum, 0.0);
}

#[test]
fn continuity_rhs_matches_boundary_flux() {
    // Normal inflow on the left wall of a closed box, outflow on the right.
    let g = ringed(6, 0.5);
    let m = classify_dofs(&g);
    let mut bc = BoundaryData::zeros(&m);
    for j in 1..=6 {
        bc.set_face_value(&m, 0, [1, j, 0], 1.0 + j as f64);
        bc.set_face_value(&m, 0, [7, j, 0], 0.5);
    }
    let b = assemble_rhs(&g, &m, &bc, 1.0).unwrap();
    let sum: f64 = m.pressure_range().map(|j| b[j]).sum();
    let influx: f64 = (1..=6).map(|j| 1.0 + j as f64 - 0.5).sum();
    assert!((sum + influx / 0.5).abs() < 1e-12);
    assert!((net_dirichlet_inflow(&m, &bc) - influx).abs() < 1e-12);
}

#[test]
fn every_scenario_rhs_is_compatible() {
    // Continuity sum = -(net Dirichlet inflow)/h wherever the flux is prescribed.
    let specs = [
        ScenarioSpec::cavity2d(16),
        ScenarioSpec::cavity3d(8),
        ScenarioSpec::cylinder2d(220, 41),
        ScenarioSpec::new(ScenarioKind::HollowSquare2d, &[64, 64]),
        ScenarioSpec::new(ScenarioKind::Brancher2d, &[64, 64]),
    ];
    for spec in specs {
        let s = build(&spec).unwrap();
        let b = s.rhs(1e-3).unwrap();
        let sum: f64 = s.map.pressure_range().map(|j| b[j]).sum();
        let want = -net_dirichlet_inflow(&s.map, &s.bc) / s.grid.h();
        assert!((sum - want).abs() <= 1e-10 * want.abs().max(1.0), "{:?}: {sum} vs {want}", spec.name);
    }
}

#[test]
fn boundary_value_on_active_face_is_rejected() {
    let g = ringed(4, 0.25);
    let m = classify_dofs(&g);
    let mut bc = BoundaryData::zeros(&m);
    bc.set_face_value(&m, 0, [2, 2, 0], 1.0);
    assert!(matches!(
        assemble_rhs(&g, &m, &bc, 1e-3),
        Err(StokesError::BoundaryValueOnNonDirichletFace { axis: 0, .. })
    ));
}

#[test]
fn distributive_columns_match_dense_blocks() {
    let op = patch_op(2, 8, 1.0, 1.0, 0.0);
    let l = dense_by_columns(&op);
    let nv = op.map().velocity_len();
    let n = op.len();
    let b = l.view((nv, 0), (n - nv, nv)).into_owned();
    let bbt = &b * b.transpose();
    for j in 0..n {
        let mut col = vec![0.0; n];
        for (i, v) in op.distributive_column(j).unwrap() {
            col[i] += v;
        }
        if j < nv {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            assert_eq!(col, e);
        } else {
            let k = j - nv;
            for i in 0..nv {
                assert!((col[i] + b[(k, i)]).abs() < 1e-14);
            }
            for i in 0..n - nv {
                assert!((col[nv + i] - bbt[(i, k)]).abs() < 1e-14);
            }
        }
    }
    // A pressure well inside the patch: four unit velocity legs and a 5-point pressure stencil with centre 4.
    let p = (nv..n).find(|&j| op.map().location(j).pos == [4, 4, 0]).unwrap();
    let col = op.distributive_column(p).unwrap();
    let vel: Vec<f64> = col.iter().filter(|(i, _)| *i < nv).map(|(_, v)| *v).collect();
    assert_eq!(vel.len(), 4);
    assert!(vel.iter().all(|v| (v.abs() - 1.0).abs() < 1e-15));
    let pres: Vec<(usize, f64)> = col.iter().filter(|(i, _)| *i >= nv).copied().collect();
    assert_eq!(pres.len(), 5);
    assert!(pres.iter().any(|&(i, v)| i == p && (v - 4.0).abs() < 1e-14));
    assert!(op.distributive_column(n).is_err());
}

#[test]
fn distributive_columns_drop_inactive_legs_near_walls() {
    let op = LevelOperator::from_grid(ringed(4, 0.25), 1.0, 0.0);
    let m = to_na(&op.assemble_distribution_dense().unwrap());
    let corner = op.map().cell_status([1, 1, 0]).active().unwrap();
    let legs = (0..op.map().velocity_len()).filter(|&i| m[(i, corner)] != 0.0).count();
    assert_eq!(legs, 2);
}

#[test]
fn distributive_diagonal_matches_dense_product() {
    let eta = 1e-3;
    let h = 1.0 / 8.0;
    let op = patch_op(2, 8, h, eta, 1e-3);
    let l = dense_by_columns(&op);
    let m = to_na(&op.assemble_distribution_dense().unwrap());
    let lm = &l * &m;
    let d = op.distributive_diagonal();
    for j in 0..op.len() {
        assert!((d[j] - lm[(j, j)]).abs() <= 1e-12 * lm[(j, j)].abs().max(1.0), "dof {j}");
        assert!(d[j] != 0.0);
    }
    let deep_u = op.map().face_status(0, [4, 4, 0]).active().unwrap();
    assert!((d[deep_u] - 4.0 * eta / (h * h)).abs() < 1e-12);
}

#[test]
fn dense_cap_is_enforced() {
    let op = LevelOperator::from_grid(ringed(64, 1.0 / 64.0), 1e-3, 0.0);
    assert!(matches!(op.assemble_dense(), Err(StokesError::DenseCapExceeded { .. })));
}

#[test]
fn commutator_vanishes_deep_but_not_at_walls() {
    let op = LevelOperator::from_grid(ringed(12, 1.0 / 12.0), 1e-3, 0.0);
    let rep = commutativity_report(&op).unwrap();
    assert!(rep.deep_columns > 0);
    assert!(rep.violations.is_empty());
    assert!(rep.boundary_max > 1e-6);
    // The penalty does not change the velocity rows of L M.
    let opg = op.with_gamma(1e-3);
    let a = &dense_by_columns(&op) * to_na(&op.assemble_distribution_dense().unwrap());
    let b = &dense_by_columns(&opg) * to_na(&opg.assemble_distribution_dense().unwrap());
    let nv = op.map().velocity_len();
    assert_eq!(a.rows(0, nv), b.rows(0, nv));
}

#[test]
fn dirichlet_faces_never_enter_the_operator() {
    let s = build(&ScenarioSpec::cavity2d(8)).unwrap();
    for a in 0..2 {
        for st in s.map.face_statuses(a) {
            if let DofStatus::Active(j) = st {
                assert!(*j < s.map.velocity_len());
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn operator_is_linear_and_symmetric(seed in any::<u64>(), alpha in -3.0f64..3.0) {
        use rand::{Rng, SeedableRng};
        let op = LevelOperator::from_grid(ringed(7, 1.0 / 7.0), 1e-3, 1e-3);
        let n = op.len();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let y: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let lx = op.apply(&x).unwrap();
        let ly = op.apply(&y).unwrap();
        let xy: f64 = lx.iter().zip(&y).map(|(a, b)| a * b).sum();
        let yx: f64 = ly.iter().zip(&x).map(|(a, b)| a * b).sum();
        prop_assert!((xy - yx).abs() <= 1e-12 * (xy.abs() + yx.abs()).max(1.0));
        let mix: Vec<f64> = x.iter().zip(&y).map(|(a, b)| alpha * a + b).collect();
        let lm = op.apply(&mix).unwrap();
        let want: Vec<f64> = lx.iter().zip(&ly).map(|(a, b)| alpha * a + b).collect();
        prop_assert!(rel_diff(&lm, &want) < 1e-13);
    }
}
