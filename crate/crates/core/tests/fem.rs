use proptest::prelude::*;
use snpp::fem::*;
use snpp::mesh::*;
use snpp::Error;

fn square(n: usize) -> TriMesh {
    structured_rect_mesh(Rect::unit_square(), n, n).unwrap()
}

/// Dense Gaussian elimination with partial pivoting.
fn gauss(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs())).unwrap();
        a.swap(k, p);
        b.swap(k, p);
        for i in k + 1..n {
            let f = a[i][k] / a[k][k];
            for j in k..n {
                a[i][j] -= f * a[k][j];
            }
            b[i] -= f * b[k];
        }
    }
    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        let s: f64 = (k + 1..n).map(|j| a[k][j] * x[j]).sum();
        x[k] = (b[k] - s) / a[k][k];
    }
    x
}

#[test]
fn two_triangle_stiffness() {
    let mesh = square(1);
    let k1 = assemble_stiffness(&mesh, Tensor2::scalar(1.0)).unwrap();
    let k2 = assemble_stiffness(&mesh, Tensor2::scalar(2.0)).unwrap();
    assert_eq!(k1.nrows(), 4);
    assert!(k1.row_sums().iter().all(|s| s.abs() < 1e-14));
    let d1 = k1.to_dense();
    let d2 = k2.to_dense();
    for i in 0..4 {
        for j in 0..4 {
            assert!((d2[i][j] - 2.0 * d1[i][j]).abs() < 1e-14);
        }
    }
}

#[test]
fn mass_of_unit_square() {
    let m = assemble_mass(&square(7)).unwrap();
    let total: f64 = m.row_sums().iter().sum();
    assert!((total - 1.0).abs() < 1e-12);
}

#[test]
fn cell_mass_matches_porosity() {
    let mesh = generate_unit_cell_mesh(&UnitCellGeometry::centered_disk(0.25, 0.025)).unwrap();
    let total: f64 = assemble_mass(&mesh).unwrap().row_sums().iter().sum();
    assert!((total - 0.80365).abs() < 5e-3);
}

#[test]
fn rotational_convection_matches_quadrature_oracle() {
    let mesh = square(12);
    let vel: Vec<[f64; 2]> = mesh.nodes().iter().map(|p| [-(p[1] - 0.5), p[0] - 0.5]).collect();
    let gauss_c = |p: [f64; 2]| (-((p[0] - 0.4).powi(2) + (p[1] - 0.6).powi(2)) / 0.05).exp();
    let c: Vec<f64> = mesh.nodes().iter().map(|&p| gauss_c(p)).collect();
    let cc = assemble_convection(&mesh, VelocityField::Nodal(&vel), None).unwrap().matvec(&c);

    // edge-midpoint rule is exact for the quadratic integrand c_h u·∇φ_i
    let mut oracle = vec![0.0; mesh.n_nodes()];
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let v = mesh.vertices(t);
        let (g, area) = p1_gradients(&v);
        for (a, b) in [(0, 1), (1, 2), (2, 0)] {
            let ch = 0.5 * (c[tri[a]] + c[tri[b]]);
            let u = [0.5 * (vel[tri[a]][0] + vel[tri[b]][0]), 0.5 * (vel[tri[a]][1] + vel[tri[b]][1])];
            for i in 0..3 {
                oracle[tri[i]] += area / 3.0 * ch * (u[0] * g[i][0] + u[1] * g[i][1]);
            }
        }
    }
    for (x, y) in cc.iter().zip(&oracle) {
        assert!((x - y).abs() < 1e-10, "{x} vs {y}");
    }
}

#[test]
fn constant_flow_has_no_interior_flux() {
    let mesh = square(6);
    let c = assemble_convection(&mesh, VelocityField::Constant([1.0, 0.0]), None).unwrap();
    let ones = vec![1.0; mesh.n_nodes()];
    let flux = c.matvec(&ones);
    let boundary = mesh.boundary_nodes();
    for (i, f) in flux.iter().enumerate() {
        if !boundary.contains(&i) {
            assert!(f.abs() < 1e-13);
        }
    }
    assert!(c.column_sums().iter().all(|s| s.abs() < 1e-13));
}

#[test]
fn neumann_poisson_with_zero_mean() {
    let mesh = square(10);
    let k = assemble_stiffness(&mesh, Tensor2::scalar(1.0)).unwrap();
    let b = assemble_load(&mesh, |p| (std::f64::consts::PI * p[0]).cos());
    let weights = lumped_mass(&mesh);
    let u = solve_constrained(&k, &b, &ScalarConstraints { zero_mean: Some(weights), ..Default::default() }).unwrap();
    assert!(integrate_p1(&mesh, &u).abs() < 1e-10);
    let r = k.matvec(&u);
    assert!(r.iter().zip(&b).all(|(x, y)| (x - y).abs() < 1e-10));
}

#[test]
fn homogeneous_dirichlet_gives_zero() {
    let mesh = generate_unit_cell_mesh(&UnitCellGeometry::centered_disk(0.25, 0.05)).unwrap();
    let k = assemble_stiffness(&mesh, Tensor2::scalar(1.0)).unwrap();
    let dirichlet = mesh.nodes_with_tag(BoundaryTag::GammaInterior).into_iter().map(|i| (i, 0.0)).collect();
    let cons = ScalarConstraints { periodic: Some(DofMap::periodic(&mesh)), dirichlet, zero_mean: None };
    let u = solve_constrained(&k, &vec![0.0; mesh.n_nodes()], &cons).unwrap();
    assert!(u.iter().all(|v| *v == 0.0));
}

#[test]
fn incompatible_neumann_source_breaks_down() {
    let mesh = square(6);
    let k = assemble_stiffness(&mesh, Tensor2::scalar(1.0)).unwrap();
    let b = assemble_load(&mesh, |_| 1.0);
    let err = solve_constrained(&k, &b, &ScalarConstraints::default()).unwrap_err();
    assert!(matches!(err, Error::SolverBreakdown(_)), "{err}");
}

#[test]
fn cg_matches_gaussian_elimination_on_laplacian_chain() {
    let n = 10;
    let h = 1.0 / (n + 1) as f64;
    let mut trips = Vec::new();
    for i in 0..n {
        trips.push((i, i, 2.0 / h));
        if i + 1 < n {
            trips.push((i, i + 1, -1.0 / h));
            trips.push((i + 1, i, -1.0 / h));
        }
    }
    let a = SparseMatrix::from_triplets(n, n, &trips);
    let u: Vec<f64> = (1..=n).map(|i| i as f64 * h * (1.0 - i as f64 * h)).collect();
    let b = a.matvec(&u);
    let cg = solve_spd(&a, &b, 1e-14, 100).unwrap().solution;
    let exact = gauss(a.to_dense(), b);
    for (x, y) in cg.iter().zip(&exact) {
        assert!((x - y).abs() < 1e-10);
    }
}

#[test]
fn stokes_without_forcing_is_at_rest() {
    let mesh = generate_unit_cell_mesh(&UnitCellGeometry::centered_disk(0.25, 0.05)).unwrap();
    let sol = solve_stokes(&mesh, Forcing::Zero, &StokesOptions::default()).unwrap();
    assert!(sol.velocity.iter().all(|v| v[0].abs() < 1e-14 && v[1].abs() < 1e-14));
    assert!(sol.pressure.iter().all(|p| p.abs() < 1e-14));
}

#[test]
fn periodic_stokes_needs_a_solid() {
    let mesh = generate_unit_cell_mesh(&UnitCellGeometry::empty(0.1)).unwrap();
    let opts = StokesOptions { no_slip: vec![], ..Default::default() };
    let err = solve_stokes(&mesh, Forcing::Constant([1.0, 0.0]), &opts).unwrap_err();
    assert!(matches!(err.root(), Error::NoSolidPhase(_)), "{err}");
}

#[test]
fn cell_flow_matches_extrapolated_reference() {
    let flux = |h: f64| {
        let mesh = generate_unit_cell_mesh(&UnitCellGeometry::centered_disk(0.25, h)).unwrap();
        let sol = solve_stokes(&mesh, Forcing::Constant([1.0, 0.0]), &StokesOptions::default()).unwrap();
        integrate_p2(&mesh, &P2Dofs::new(&mesh), &sol.velocity)
    };
    let h = 0.05;
    let coarse = flux(h);
    let mid = flux(h / 2.0)[0];
    let fine = flux(h / 4.0)[0];
    let reference = fine + (fine - mid) / 3.0;
    assert!(coarse[0] > 0.0);
    assert!(coarse[1].abs() < 1e-10);
    assert!((coarse[0] - reference).abs() < 0.01 * reference, "{} vs {reference}", coarse[0]);
}

#[test]
fn implicit_step_without_operator_is_identity() {
    let mesh = square(4);
    let m = assemble_mass(&mesh).unwrap();
    let a = SparseMatrix::zeros(m.nrows(), m.ncols());
    let c: Vec<f64> = mesh.nodes().iter().map(|p| p[0] + 2.0 * p[1]).collect();
    let next = step_implicit(&m, &a, &c, 0.1, &vec![0.0; c.len()]).unwrap();
    assert!(c.iter().zip(&next).all(|(x, y)| (x - y).abs() < 1e-13));
}

#[test]
fn heat_equation_is_dissipative() {
    let mesh = square(16);
    let m = assemble_mass(&mesh).unwrap();
    let k = assemble_stiffness(&mesh, Tensor2::scalar(1.0)).unwrap();
    let mut c: Vec<f64> = mesh
        .nodes()
        .iter()
        .map(|p| (-((p[0] - 0.3).powi(2) + (p[1] - 0.7).powi(2)) / 0.01).exp())
        .collect();
    let zero = vec![0.0; c.len()];
    let mut norm = l2_norm_sq_p1(&mesh, &c);
    for _ in 0..20 {
        c = step_implicit(&m, &k, &c, 1e-3, &zero).unwrap();
        let next = l2_norm_sq_p1(&mesh, &c);
        assert!(next <= norm * (1.0 + 1e-14));
        norm = next;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn stiffness_is_symmetric_with_constants_in_kernel(
        n in 1usize..6, a11 in 0.1f64..5.0, a22 in 0.1f64..5.0, a12 in -0.09f64..0.09,
        sx in 0.2f64..3.0, sy in 0.2f64..3.0,
    ) {
        let rect = Rect { origin: [0.0, 0.0], size: [sx, sy] };
        let mesh = structured_rect_mesh(rect, n, n + 1).unwrap();
        let k = assemble_stiffness(&mesh, Tensor2::new(a11, a12, a12, a22)).unwrap();
        prop_assert!(k.is_symmetric(1e-12));
        let scale = k.max_abs();
        prop_assert!(k.row_sums().iter().all(|s| s.abs() < 1e-12 * scale));
        let m = assemble_mass(&mesh).unwrap();
        let total: f64 = m.row_sums().iter().sum();
        prop_assert!((total - sx * sy).abs() < 1e-12 * sx * sy);
        let lumped: f64 = lumped_mass(&mesh).iter().sum();
        prop_assert!((lumped - sx * sy).abs() < 1e-12 * sx * sy);
    }

    #[test]
    fn convection_columns_sum_to_zero(vx in -3.0f64..3.0, vy in -3.0f64..3.0, n in 2usize..6) {
        let mesh = square(n);
        let phi: Vec<f64> = mesh.nodes().iter().map(|p| p[0] * p[1]).collect();
        let c = assemble_convection(
            &mesh,
            VelocityField::Constant([vx, vy]),
            Some(Drift { potential: &phi, coeff: Tensor2::scalar(0.7) }),
        ).unwrap();
        prop_assert!(c.column_sums().iter().all(|s| s.abs() < 1e-12));
    }
}
