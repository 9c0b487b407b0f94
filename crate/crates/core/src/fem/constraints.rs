use super::solve::{Factorization, LinearSolverKind};
use super::sparse::{dot, SparseMatrix};
use crate::error::{Error, Result};
use crate::mesh::TriMesh;

/// Map from mesh-level dofs to reduced (constrained) dofs: several full dofs may share one
/// reduced dof, which is how periodic identification is realized.
#[derive(Clone, Debug, PartialEq)]
pub struct DofMap {
    map: Vec<usize>,
    n_dofs: usize,
}

impl DofMap {
    pub fn identity(n: usize) -> Self {
        Self {
            map: (0..n).collect(),
            n_dofs: n,
        }
    }

    /// Builds the map from a representative per full dof (`rep[rep[i]] == rep[i]`).
    /// Reduced dofs are numbered in order of first appearance.
    pub fn from_representatives(rep: &[usize]) -> Self {
        let mut compact = vec![usize::MAX; rep.len()];
        let mut n = 0;
        let mut map = vec![0; rep.len()];
        for (i, &r) in rep.iter().enumerate() {
            if compact[r] == usize::MAX {
                compact[r] = n;
                n += 1;
            }
            map[i] = compact[r];
        }
        Self { map, n_dofs: n }
    }

    pub fn periodic(mesh: &TriMesh) -> Self {
        Self::from_representatives(&mesh.periodic_representative())
    }

    pub fn n_full(&self) -> usize {
        self.map.len()
    }

    pub fn n_dofs(&self) -> usize {
        self.n_dofs
    }

    pub fn dof(&self, full: usize) -> usize {
        self.map[full]
    }

    pub fn is_identity(&self) -> bool {
        self.n_dofs == self.map.len()
    }

    /// `Rᵀ A R`.
    pub fn restrict_matrix(&self, a: &SparseMatrix) -> SparseMatrix {
        let t: Vec<_> = a
            .triplets()
            .map(|(i, j, v)| (self.map[i], self.map[j], v))
            .collect();
        SparseMatrix::from_triplets(self.n_dofs, self.n_dofs, &t)
    }

    /// `Rᵀ b` (contributions of identified dofs are summed).
    pub fn restrict_vector(&self, b: &[f64]) -> Vec<f64> {
        let mut r = vec![0.0; self.n_dofs];
        for (i, &v) in b.iter().enumerate() {
            r[self.map[i]] += v;
        }
        r
    }

    /// `R x`.
    pub fn expand(&self, x: &[f64]) -> Vec<f64> {
        self.map.iter().map(|&d| x[d]).collect()
    }
}

/// Merges periodic slave dofs into their masters.
pub fn apply_periodic(matrix: &SparseMatrix, rhs: &[f64], map: &DofMap) -> (SparseMatrix, Vec<f64>) {
    (map.restrict_matrix(matrix), map.restrict_vector(rhs))
}

/// System with Dirichlet rows and columns eliminated.
#[derive(Clone, Debug)]
pub struct DirichletSystem {
    pub matrix: SparseMatrix,
    pub rhs: Vec<f64>,
    /// Full index of each free dof.
    pub free: Vec<usize>,
    fixed: Vec<Option<f64>>,
}

impl DirichletSystem {
    pub fn expand(&self, x_free: &[f64]) -> Vec<f64> {
        let mut full: Vec<f64> = self.fixed.iter().map(|v| v.unwrap_or(0.0)).collect();
        for (k, &i) in self.free.iter().enumerate() {
            full[i] = x_free[k];
        }
        full
    }
}

/// Symmetric elimination of prescribed values: free rows keep `A_ff`, and `A_fD u_D` moves
/// to the right-hand side.
pub fn apply_dirichlet(
    matrix: &SparseMatrix,
    rhs: &[f64],
    nodes: &[usize],
    values: &[f64],
) -> Result<DirichletSystem> {
    let n = matrix.nrows();
    if nodes.len() != values.len() {
        return Err(Error::InconsistentConstraint(
            "Dirichlet node and value lists differ in length".into(),
        ));
    }
    let mut fixed: Vec<Option<f64>> = vec![None; n];
    for (&i, &v) in nodes.iter().zip(values) {
        if i >= n {
            return Err(Error::InconsistentConstraint(format!("Dirichlet dof {i} out of range")));
        }
        if let Some(old) = fixed[i] {
            if old != v {
                return Err(Error::InconsistentConstraint(format!(
                    "dof {i} prescribed both {old} and {v}"
                )));
            }
        }
        fixed[i] = Some(v);
    }
    let mut index = vec![usize::MAX; n];
    let free: Vec<usize> = (0..n).filter(|&i| fixed[i].is_none()).collect();
    for (k, &i) in free.iter().enumerate() {
        index[i] = k;
    }
    let mut b: Vec<f64> = free.iter().map(|&i| rhs[i]).collect();
    let mut trips = Vec::with_capacity(matrix.nnz());
    for (i, j, v) in matrix.triplets() {
        if fixed[i].is_some() {
            continue;
        }
        match fixed[j] {
            Some(u) => b[index[i]] -= v * u,
            None => trips.push((index[i], index[j], v)),
        }
    }
    Ok(DirichletSystem {
        matrix: SparseMatrix::from_triplets(free.len(), free.len(), &trips),
        rhs: b,
        free,
        fixed,
    })
}

/// Bordered system `[[A, w], [wᵀ, 0]]` enforcing `wᵀu = 0` by a Lagrange multiplier.
pub fn apply_zero_mean(matrix: &SparseMatrix, rhs: &[f64], weights: &[f64]) -> (SparseMatrix, Vec<f64>) {
    let n = matrix.nrows();
    let mut t: Vec<_> = matrix.triplets().collect();
    for (i, &w) in weights.iter().enumerate() {
        if w != 0.0 {
            t.push((i, n, w));
            t.push((n, i, w));
        }
    }
    let mut b = rhs.to_vec();
    b.push(0.0);
    (SparseMatrix::from_triplets(n + 1, n + 1, &t), b)
}

/// Constraint set for a scalar field.
#[derive(Clone, Debug, Default)]
pub struct ScalarConstraints {
    pub periodic: Option<DofMap>,
    /// `(full dof, value)` pairs.
    pub dirichlet: Vec<(usize, f64)>,
    /// Weights `∫φ_i` of the zero-mean condition, in full numbering.
    pub zero_mean: Option<Vec<f64>>,
}

/// Factorized constrained scalar system, reusable for many right-hand sides.
#[derive(Debug)]
pub struct ConstrainedSolver {
    map: DofMap,
    // restricted-space Dirichlet data
    fixed: Vec<Option<f64>>,
    free: Vec<usize>,
    coupling: SparseMatrix,
    // zero-mean weights on free dofs, and whether they border the factorized matrix
    zero_mean: Option<Vec<f64>>,
    pinned: bool,
    factor: Factorization,
}

impl ConstrainedSolver {
    pub fn new(matrix: &SparseMatrix, constraints: &ScalarConstraints, kind: LinearSolverKind) -> Result<Self> {
        if !constraints.dirichlet.is_empty() && constraints.zero_mean.is_some() {
            return Err(Error::InconsistentConstraint(
                "zero-mean condition combined with Dirichlet values on the same field".into(),
            ));
        }
        let map = constraints
            .periodic
            .clone()
            .unwrap_or_else(|| DofMap::identity(matrix.nrows()));
        if map.n_full() != matrix.nrows() {
            return Err(Error::FieldMeshMismatch("dof map does not match the matrix".into()));
        }
        let reduced = map.restrict_matrix(matrix);
        let n = map.n_dofs();
        let mut fixed: Vec<Option<f64>> = vec![None; n];
        for &(i, v) in &constraints.dirichlet {
            let d = map.dof(i);
            if matches!(fixed[d], Some(old) if old != v) {
                return Err(Error::InconsistentConstraint(format!("dof {i} prescribed twice")));
            }
            fixed[d] = Some(v);
        }
        let free: Vec<usize> = (0..n).filter(|&i| fixed[i].is_none()).collect();
        let mut index = vec![usize::MAX; n];
        for (k, &i) in free.iter().enumerate() {
            index[i] = k;
        }
        let mut inner = Vec::with_capacity(reduced.nnz());
        let mut couple = Vec::new();
        for (i, j, v) in reduced.triplets() {
            if fixed[i].is_some() {
                continue;
            }
            if fixed[j].is_some() {
                couple.push((index[i], j, v));
            } else {
                inner.push((index[i], index[j], v));
            }
        }
        let mut system = SparseMatrix::from_triplets(free.len(), free.len(), &inner);
        let coupling = SparseMatrix::from_triplets(free.len(), n, &couple);
        let zero_mean = constraints.zero_mean.as_ref().map(|w| map.restrict_vector(w));
        // With a zero-mean condition the kernel (constants) is removed by pinning one dof;
        // after projecting the right-hand side this reproduces the bordered Lagrange system
        // exactly while keeping the factorization sparse.
        let pinned = zero_mean.is_some() && kind.resolve(free.len()) == LinearSolverKind::Direct;
        if pinned && !free.is_empty() {
            let t: Vec<_> = system
                .triplets()
                .filter(|&(i, j, _)| i != 0 && j != 0)
                .map(|(i, j, v)| (i - 1, j - 1, v))
                .collect();
            system = SparseMatrix::from_triplets(free.len() - 1, free.len() - 1, &t);
        }
        let factor = Factorization::new(&system, kind)?;
        Ok(Self {
            map,
            fixed,
            free,
            coupling,
            zero_mean,
            pinned,
            factor,
        })
    }

    /// Solves for a full-numbering right-hand side; returns the full-numbering solution.
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let r = self.map.restrict_vector(rhs);
        let u_d: Vec<f64> = self.fixed.iter().map(|v| v.unwrap_or(0.0)).collect();
        let lift = self.coupling.matvec(&u_d);
        let mut b: Vec<f64> = self.free.iter().zip(&lift).map(|(&i, l)| r[i] - l).collect();
        let x = match &self.zero_mean {
            Some(w) => {
                // multiplier of the bordered system: λ = Σb / Σw, since constants span ker A
                let lambda = b.iter().sum::<f64>() / w.iter().sum::<f64>();
                for (bi, wi) in b.iter_mut().zip(w) {
                    *bi -= lambda * wi;
                }
                let mut x = if self.pinned {
                    let mut x = vec![0.0];
                    x.extend(self.factor.solve(&b[1..])?);
                    x
                } else {
                    self.factor.solve(&b)?
                };
                let shift = dot(w, &x) / w.iter().sum::<f64>();
                x.iter_mut().for_each(|v| *v -= shift);
                x
            }
            None => self.factor.solve(&b)?,
        };
        let mut reduced = u_d;
        for (k, &i) in self.free.iter().enumerate() {
            reduced[i] = x[k];
        }
        Ok(self.map.expand(&reduced))
    }

    /// Size of the factorized system.
    pub fn n_unknowns(&self) -> usize {
        self.free.len() - usize::from(self.pinned)
    }
}

/// One-shot constrained solve.
pub fn solve_constrained(matrix: &SparseMatrix, rhs: &[f64], constraints: &ScalarConstraints) -> Result<Vec<f64>> {
    ConstrainedSolver::new(matrix, constraints, LinearSolverKind::Auto)?.solve(rhs)
}
