//! Reference-element data for linear (P1) and quadratic (P2) Lagrange triangles.

/// Gradients of the three barycentric coordinates and the (positive) area.
pub fn p1_gradients(v: &[[f64; 2]; 3]) -> ([[f64; 2]; 3], f64) {
    let det = (v[1][0] - v[0][0]) * (v[2][1] - v[0][1]) - (v[2][0] - v[0][0]) * (v[1][1] - v[0][1]);
    let inv = 1.0 / det;
    let g = [
        [(v[1][1] - v[2][1]) * inv, (v[2][0] - v[1][0]) * inv],
        [(v[2][1] - v[0][1]) * inv, (v[0][0] - v[2][0]) * inv],
        [(v[0][1] - v[1][1]) * inv, (v[1][0] - v[0][0]) * inv],
    ];
    (g, 0.5 * det.abs())
}

/// Local P2 ordering: vertices 0..3, then edge midpoints (0,1), (1,2), (2,0).
pub const P2_EDGES: [[usize; 2]; 3] = [[0, 1], [1, 2], [2, 0]];

pub fn p2_values(lam: [f64; 3]) -> [f64; 6] {
    [
        lam[0] * (2.0 * lam[0] - 1.0),
        lam[1] * (2.0 * lam[1] - 1.0),
        lam[2] * (2.0 * lam[2] - 1.0),
        4.0 * lam[0] * lam[1],
        4.0 * lam[1] * lam[2],
        4.0 * lam[2] * lam[0],
    ]
}

/// Gradients of the six P2 shape functions at `lam`, given barycentric gradients `g`.
pub fn p2_gradients(lam: [f64; 3], g: &[[f64; 2]; 3]) -> [[f64; 2]; 6] {
    let mut out = [[0.0; 2]; 6];
    for d in 0..2 {
        for i in 0..3 {
            out[i][d] = (4.0 * lam[i] - 1.0) * g[i][d];
        }
        for (k, [i, j]) in P2_EDGES.iter().enumerate() {
            out[3 + k][d] = 4.0 * (lam[*i] * g[*j][d] + lam[*j] * g[*i][d]);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::quadrature::TriangleRule;

    #[test]
    fn p2_partition_of_unity_and_integrals() {
        let rule = TriangleRule::of_degree(4);
        let mut integrals = [0.0; 6];
        for (lam, w) in rule.points.iter().zip(&rule.weights) {
            let v = p2_values(*lam);
            assert!((v.iter().sum::<f64>() - 1.0).abs() < 1e-14);
            for k in 0..6 {
                integrals[k] += w * v[k];
            }
        }
        for k in 0..3 {
            assert!(integrals[k].abs() < 1e-14);
            assert!((integrals[3 + k] - 1.0 / 3.0).abs() < 1e-14);
        }
    }
}
