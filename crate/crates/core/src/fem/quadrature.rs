/// Symmetric quadrature rule on the reference triangle, in barycentric coordinates.
/// Weights sum to 1 (multiply by the element area).
#[derive(Clone, Debug)]
pub struct TriangleRule {
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
}

impl TriangleRule {
    /// Exact for polynomials of the given degree; supports degrees up to 4.
    pub fn of_degree(degree: usize) -> Self {
        match degree {
            0 | 1 => Self {
                points: vec![[1.0 / 3.0; 3]],
                weights: vec![1.0],
            },
            2 => {
                let (a, b) = (2.0 / 3.0, 1.0 / 6.0);
                Self {
                    points: vec![[a, b, b], [b, a, b], [b, b, a]],
                    weights: vec![1.0 / 3.0; 3],
                }
            }
            3 | 4 => {
                let a = 0.445_948_490_915_965;
                let wa = 0.223_381_589_678_011;
                let b = 0.091_576_213_509_771;
                let wb = 0.109_951_743_655_322;
                let (ca, cb) = (1.0 - 2.0 * a, 1.0 - 2.0 * b);
                Self {
                    points: vec![
                        [ca, a, a],
                        [a, ca, a],
                        [a, a, ca],
                        [cb, b, b],
                        [b, cb, b],
                        [b, b, cb],
                    ],
                    weights: vec![wa, wa, wa, wb, wb, wb],
                }
            }
            d => panic!("no triangle rule of degree {d}"),
        }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// Physical point of barycentric coordinates `lam` in triangle `v`.
pub fn map_point(v: &[[f64; 2]; 3], lam: [f64; 3]) -> [f64; 2] {
    [
        lam[0] * v[0][0] + lam[1] * v[1][0] + lam[2] * v[2][0],
        lam[0] * v[0][1] + lam[1] * v[1][1] + lam[2] * v[2][1],
    ]
}

/// Two-point Gauss–Legendre rule on `[0, 1]`.
pub const GAUSS2_EDGE: [(f64, f64); 2] = [
    (0.211_324_865_405_187_1, 0.5),
    (0.788_675_134_594_812_9, 0.5),
];
