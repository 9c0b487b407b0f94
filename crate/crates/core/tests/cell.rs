use proptest::prelude::*;
use snpp::cell::*;
use snpp::fem::{assemble_stiffness, Tensor2};
use snpp::io::parse_coefficients_kv;
use snpp::mesh::{generate_unit_cell_mesh, TriMesh, UnitCellGeometry};
use snpp::Error;

fn disk_mesh(r: f64, h: f64) -> TriMesh {
    generate_unit_cell_mesh(&UnitCellGeometry::centered_disk(r, h)).unwrap()
}

fn golden() -> std::collections::HashMap<String, f64> {
    std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/golden_r025.kv"))
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .map(|l| {
            let (k, v) = l.split_once('=').unwrap();
            (k.trim().to_string(), v.trim().parse().unwrap())
        })
        .collect()
}

#[test]
fn first_corrector_is_odd_under_reflection() {
    let mesh = disk_mesh(0.25, 0.025);
    let sols = solve_scalar_cell_problems(&mesh).unwrap();
    let corr = CellCorrector::new(&mesh, &sols);
    for (i, p) in mesh.nodes().iter().enumerate() {
        let mirrored = corr.eval([1.0 - p[0], p[1]]).unwrap();
        assert!((sols.phi[0][i] + mirrored[0]).abs() < 1e-8, "node {i}");
    }
}

#[test]
fn corrector_energy_converges_at_second_order() {
    let energy = |h: f64| {
        let mesh = disk_mesh(0.25, h);
        let sols = solve_scalar_cell_problems(&mesh).unwrap();
        assemble_stiffness(&mesh, 1.0).unwrap().quadratic_form(&sols.phi[0])
    };
    let e = [energy(0.05), energy(0.025), energy(0.0125)];
    let order = ((e[0] - e[1]) / (e[1] - e[2])).abs().log2();
    assert!((1.6..2.6).contains(&order), "order {order}, energies {e:?}");
}

#[test]
fn disk_diffusion_is_isotropic_and_bounded() {
    let mesh = disk_mesh(0.25, 0.025);
    let d = compute_diffusion_tensor(&solve_scalar_cell_problems(&mesh).unwrap(), &mesh).unwrap();
    assert!((d.0[0][0] - d.0[1][1]).abs() < 1e-6);
    assert!(d.0[0][1].abs() < 1e-8 && d.0[1][0].abs() < 1e-8);
    assert!(d.0[0][0] > 0.0 && d.0[0][0] < 0.80365);
}

#[test]
fn disk_permeability_is_isotropic() {
    let mesh = disk_mesh(0.25, 0.025);
    let k = compute_permeability_tensor(&solve_stokes_cell_problems(&mesh).unwrap(), &mesh).unwrap();
    assert!(k.0[0][1].abs() < 1e-8 && k.0[1][0].abs() < 1e-8);
    assert!(k.0[0][0] > 0.0 && (k.0[0][0] - k.0[1][1]).abs() < 1e-8 * k.trace());
}

#[test]
fn empty_cell_has_no_permeability_problem() {
    let mesh = generate_unit_cell_mesh(&UnitCellGeometry::empty(0.1)).unwrap();
    let err = solve_stokes_cell_problems(&mesh).unwrap_err();
    assert!(matches!(err.root(), Error::NoSolidPhase(_)), "{err}");
}

#[test]
fn dirichlet_cell_solution_is_nonnegative() {
    for geom in [UnitCellGeometry::centered_disk(0.25, 0.05), UnitCellGeometry::disk([0.4, 0.6], 0.2, 0.04)] {
        let mesh = generate_unit_cell_mesh(&geom).unwrap();
        let sol = solve_dirichlet_cell_problem(&mesh).unwrap();
        assert!(sol.phi.iter().all(|v| *v >= -1e-10));
        assert!(compute_dirichlet_mean(&sol, &mesh) > 0.0);
    }
}

#[test]
fn corrector_reconstruction() {
    let mesh = disk_mesh(0.25, 0.05);
    let sols = solve_scalar_cell_problems(&mesh).unwrap();
    let corr = CellCorrector::new(&mesh, &sols);
    let node = 17;
    let y = mesh.nodes()[node];
    assert_eq!(reconstruct_corrector(|_| [0.0, 0.0], &corr, [0.3, 0.3], y).unwrap(), 0.0);
    let v = reconstruct_corrector(|_| [1.0, 0.0], &corr, [0.3, 0.3], y).unwrap();
    assert!((v - sols.phi[0][node]).abs() < 1e-12);
    assert!(matches!(corr.eval([0.5, 0.5]), Err(Error::PointOutsideFluidPart { .. })));

    let empty = generate_unit_cell_mesh(&UnitCellGeometry::empty(0.1)).unwrap();
    let zero = solve_scalar_cell_problems(&empty).unwrap();
    let corr = CellCorrector::new(&empty, &zero);
    assert_eq!(reconstruct_corrector(|_| [2.0, -1.0], &corr, [0.3, 0.3], [0.37, 0.81]).unwrap(), 0.0);
}

#[test]
fn small_inclusions_approach_free_diffusion() {
    let dist = |r: f64| {
        let mesh = disk_mesh(r, r / 2.0);
        let d = compute_diffusion_tensor(&solve_scalar_cell_problems(&mesh).unwrap(), &mesh).unwrap();
        d.max_abs_diff(&Tensor2::IDENTITY)
    };
    let (a, b, c) = (dist(0.25), dist(0.1), dist(0.05));
    assert!(a > b && b > c, "{a} {b} {c}");
}

#[test]
fn larger_inclusions_reduce_permeability_and_dirichlet_mean() {
    let coeffs: Vec<EffectiveCoefficients> = [0.15, 0.25, 0.35]
        .iter()
        .map(|&r| compute_effective_coefficients(&UnitCellGeometry::centered_disk(r, 0.025), 0.0).unwrap())
        .collect();
    for w in coeffs.windows(2) {
        assert!(w[1].k.0[0][0] < w[0].k.0[0][0]);
        assert!(w[1].dirichlet_mean < w[0].dirichlet_mean);
        assert!(w[1].d.0[0][0] < w[0].d.0[0][0]);
    }
}

#[test]
fn coefficients_near_golden_values() {
    let g = golden();
    let c = compute_effective_coefficients(&UnitCellGeometry::centered_disk(0.25, 0.025), 1.0).unwrap();
    for (name, value) in [("D", c.d.0[0][0]), ("K", c.k.0[0][0]), ("dirichlet_mean", c.dirichlet_mean)] {
        assert!((value / g[name] - 1.0).abs() < 5e-3, "{name}: {value} vs {}", g[name]);
    }
    let text = snpp::io::coefficients_kv(&c);
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 9);
    assert_eq!(parse_coefficients_kv(&text).unwrap().d.0[0][0], c.d.0[0][0]);
}

/// Regenerates the golden fixture (slow): second-order Richardson extrapolation from h=0.01 and h=0.005.
#[test]
#[ignore]
fn golden_oracle() {
    let at = |h: f64| compute_effective_coefficients(&UnitCellGeometry::centered_disk(0.25, h), 0.0).unwrap();
    let (a, b) = (at(0.01), at(0.005));
    let rich = |x: f64, y: f64| y + (y - x) / 3.0;
    let fresh = [
        ("porosity", rich(a.porosity, b.porosity)),
        ("D", rich(a.d.0[0][0], b.d.0[0][0])),
        ("K", rich(a.k.0[0][0], b.k.0[0][0])),
        ("dirichlet_mean", rich(a.dirichlet_mean, b.dirichlet_mean)),
    ];
    let g = golden();
    for (name, v) in fresh {
        println!("{name}={v:.10e}");
        assert!((v / g[name] - 1.0).abs() < 1e-8, "{name}: {v} vs {}", g[name]);
    }
    assert!((g["porosity"] - UnitCellGeometry::centered_disk(0.25, 0.01).porosity()).abs() < 1e-7);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn off_centre_disks_give_spd_bounded_tensors(cx in 0.35f64..0.65, cy in 0.35f64..0.65, r in 0.1f64..0.3) {
        let geom = UnitCellGeometry::disk([cx, cy], r, 0.05);
        let mesh = generate_unit_cell_mesh(&geom).unwrap();
        prop_assert!((mesh.total_area() - geom.porosity()).abs() < 5e-3);
        let d = compute_diffusion_tensor(&solve_scalar_cell_problems(&mesh).unwrap(), &mesh).unwrap();
        prop_assert!(d.is_symmetric(1e-8));
        prop_assert!(d.is_positive_definite());
        let eig = d.sym_eigenvalues();
        prop_assert!(eig.iter().all(|&l| l > 0.0 && l <= mesh.total_area() + 1e-12));
    }
}
