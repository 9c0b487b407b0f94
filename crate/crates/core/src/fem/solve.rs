use std::sync::atomic::{AtomicUsize, Ordering};

use faer::prelude::*;
use faer::sparse::linalg::solvers::{Lu, SymbolicLu};
use faer::Mat;

use super::sparse::{dot, norm2, SparseMatrix};
use crate::error::{Error, Result};

/// Default relative residual for iterative solves.
pub const DEFAULT_TOL: f64 = 1e-10;

static DIRECT_THRESHOLD: AtomicUsize = AtomicUsize::new(250_000);

/// Systems with at most this many unknowns are factorized directly under
/// [`LinearSolverKind::Auto`].
pub fn direct_threshold() -> usize {
    DIRECT_THRESHOLD.load(Ordering::Relaxed)
}

pub fn set_direct_threshold(n: usize) {
    DIRECT_THRESHOLD.store(n, Ordering::Relaxed);
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum LinearSolverKind {
    #[default]
    Auto,
    Direct,
    Iterative,
}

impl LinearSolverKind {
    pub fn resolve(self, n: usize) -> LinearSolverKind {
        match self {
            LinearSolverKind::Auto if n <= direct_threshold() => LinearSolverKind::Direct,
            LinearSolverKind::Auto => LinearSolverKind::Iterative,
            k => k,
        }
    }
}

/// Result of an iterative solve.
#[derive(Clone, Debug)]
pub struct CgOutcome {
    pub solution: Vec<f64>,
    pub iterations: usize,
    pub residual: f64,
}

/// Jacobi-preconditioned conjugate gradients for symmetric positive (semi)definite systems.
pub fn solve_spd(a: &SparseMatrix, b: &[f64], tol: f64, max_iter: usize) -> Result<CgOutcome> {
    pcg(a, b, None, tol, max_iter)
}

pub(crate) fn pcg(
    a: &SparseMatrix,
    b: &[f64],
    x0: Option<&[f64]>,
    tol: f64,
    max_iter: usize,
) -> Result<CgOutcome> {
    let n = a.nrows();
    if b.len() != n || a.ncols() != n {
        return Err(Error::SolverBreakdown("dimension mismatch".into()));
    }
    let bnorm = norm2(b);
    let mut x = x0.map_or_else(|| vec![0.0; n], |x| x.to_vec());
    if bnorm == 0.0 {
        return Ok(CgOutcome {
            solution: vec![0.0; n],
            iterations: 0,
            residual: 0.0,
        });
    }
    let inv_diag: Vec<f64> = a
        .diagonal()
        .iter()
        .map(|&d| if d > 0.0 { 1.0 / d } else { 1.0 })
        .collect();
    let ax = a.matvec(&x);
    let mut r: Vec<f64> = b.iter().zip(&ax).map(|(b, a)| b - a).collect();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(r, d)| r * d).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    let mut best = f64::INFINITY;
    let mut stalled = 0;
    for it in 1..=max_iter {
        a.matvec_into(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(Error::SolverBreakdown(format!(
                "non-positive curvature pᵀAp = {pap:e} at iteration {it} (matrix not positive definite)"
            )));
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let res = norm2(&r) / bnorm;
        if !res.is_finite() {
            return Err(Error::SolverBreakdown("non-finite residual".into()));
        }
        if res <= tol {
            return Ok(CgOutcome {
                solution: x,
                iterations: it,
                residual: res,
            });
        }
        if res < 0.999 * best {
            best = res;
            stalled = 0;
        } else {
            stalled += 1;
            if stalled > 200.max(n / 2) {
                return Err(Error::SolverBreakdown(format!(
                    "residual stagnated at {best:e} after {it} iterations"
                )));
            }
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    let res = norm2(&r) / bnorm;
    Err(Error::MaxIterationsExceeded {
        iterations: max_iter,
        residual: res,
    })
}

/// A factorized (or iteratively solvable) linear system.
pub enum Factorization {
    Direct { matrix: SparseMatrix, lu: Lu<usize, f64> },
    Iterative { matrix: SparseMatrix },
}

impl std::fmt::Debug for Factorization {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Factorization::Direct { matrix, .. } => write!(f, "Direct(n = {})", matrix.nrows()),
            Factorization::Iterative { matrix } => write!(f, "Iterative(n = {})", matrix.nrows()),
        }
    }
}

fn lu_error(e: impl std::fmt::Debug) -> Error {
    Error::SolverBreakdown(format!("sparse LU failed: {e:?}"))
}

impl Factorization {
    pub fn new(a: &SparseMatrix, kind: LinearSolverKind) -> Result<Self> {
        match kind.resolve(a.nrows()) {
            LinearSolverKind::Iterative => Ok(Factorization::Iterative { matrix: a.clone() }),
            _ => {
                let m = a.to_faer()?;
                let lu = m.sp_lu().map_err(lu_error)?;
                Ok(Factorization::Direct {
                    matrix: a.clone(),
                    lu,
                })
            }
        }
    }

    pub fn matrix(&self) -> &SparseMatrix {
        match self {
            Factorization::Direct { matrix, .. } | Factorization::Iterative { matrix } => matrix,
        }
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        match self {
            Factorization::Iterative { matrix } => {
                Ok(pcg(matrix, b, None, DEFAULT_TOL, 20 * matrix.nrows().max(100))?.solution)
            }
            Factorization::Direct { matrix, lu } => {
                let x = lu_solve(lu, b);
                check_residual(matrix, b, &x)?;
                Ok(x)
            }
        }
    }
}

fn lu_solve(lu: &Lu<usize, f64>, b: &[f64]) -> Vec<f64> {
    let mut rhs = Mat::<f64>::from_fn(b.len(), 1, |i, _| b[i]);
    lu.solve_in_place(rhs.as_mut());
    (0..b.len()).map(|i| rhs[(i, 0)]).collect()
}

/// Direct solves are accepted only when the relative residual is small; singular systems
/// factorized with tiny pivots otherwise return garbage silently.
fn check_residual(a: &SparseMatrix, b: &[f64], x: &[f64]) -> Result<()> {
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::SolverBreakdown("non-finite solution (singular system)".into()));
    }
    let ax = a.matvec(x);
    let r: f64 = ax.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum::<f64>().sqrt();
    let scale = norm2(b).max(a.max_abs() * norm2(x) * 1e-300);
    if scale > 0.0 && r > 1e-7 * scale {
        return Err(Error::SolverBreakdown(format!(
            "direct solve residual {:e} relative (singular or incompatible system)",
            r / scale
        )));
    }
    Ok(())
}

/// LU factorizations of matrices sharing one sparsity pattern, reusing the symbolic analysis.
#[derive(Default)]
pub struct PatternLu {
    symbolic: Option<(Vec<(usize, usize)>, SymbolicLu<usize>)>,
}

impl PatternLu {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn solve(&mut self, a: &SparseMatrix, b: &[f64]) -> Result<Vec<f64>> {
        let m = a.to_faer()?;
        let pattern: Vec<(usize, usize)> = a.triplets().map(|(i, j, _)| (i, j)).collect();
        let reuse = matches!(&self.symbolic, Some((p, _)) if *p == pattern);
        if !reuse {
            let sym = SymbolicLu::try_new(m.symbolic()).map_err(lu_error)?;
            self.symbolic = Some((pattern, sym));
        }
        let sym = self.symbolic.as_ref().map(|(_, s)| s.clone()).unwrap();
        let lu = Lu::try_new_with_symbolic(sym, m.as_ref()).map_err(lu_error)?;
        let x = lu_solve(&lu, b);
        check_residual(a, b, &x)?;
        Ok(x)
    }
}

/// Solves `(M + dt·A) c_{k+1} = M c_k + dt·b`.
pub fn step_implicit(
    mass: &SparseMatrix,
    operator: &SparseMatrix,
    state: &[f64],
    dt: f64,
    rhs: &[f64],
) -> Result<Vec<f64>> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::InvalidData(format!("time step must be positive, got {dt}")));
    }
    let lhs = mass.add_scaled(operator, dt);
    let mc = mass.matvec(state);
    let b: Vec<f64> = mc.iter().zip(rhs).map(|(m, r)| m + dt * r).collect();
    Factorization::new(&lhs, LinearSolverKind::Direct)?.solve(&b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_converges_in_one_iteration() {
        let a = SparseMatrix::identity(5);
        let b = vec![1.0, -2.0, 3.0, 0.5, 4.0];
        let out = solve_spd(&a, &b, 1e-10, 10).unwrap();
        assert_eq!(out.iterations, 1);
        assert_eq!(out.solution, b);
    }

    #[test]
    fn indefinite_matrix_breaks_down() {
        let a = SparseMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (1, 1, -1.0)]);
        assert!(matches!(
            solve_spd(&a, &[1.0, 1.0], 1e-10, 10),
            Err(Error::SolverBreakdown(_))
        ));
    }

    #[test]
    fn scalar_ode_step() {
        let m = SparseMatrix::from_triplets(1, 1, &[(0, 0, 2.0)]);
        let a = SparseMatrix::from_triplets(1, 1, &[(0, 0, 3.0)]);
        let c = step_implicit(&m, &a, &[1.0], 0.1, &[0.0]).unwrap();
        assert!((c[0] - 1.0 / (1.0 + 0.1 * 3.0 / 2.0)).abs() < 1e-15);
    }
}
