//! Independent reference computations used only by tests: characteristic
//! polynomial roots, cofactor determinants and a straight-line evaluation
//! of the adaptive Kuramoto vector field. None of this shares code with the
//! library paths it checks.
#![allow(dead_code)]

use num_complex::Complex64;

/// Characteristic polynomial coefficients, lowest degree first, via the
/// Faddeev–LeVerrier recursion.
pub fn charpoly(a: &[Vec<f64>]) -> Vec<f64> {
    let n = a.len();
    let mut coeffs = vec![0.0; n + 1];
    coeffs[n] = 1.0;
    let mut mk = vec![vec![0.0; n]; n];
    for k in 1..=n {
        // M_k = A M_{k-1} + c_{n-k+1} I
        let mut next = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                let mut s = 0.0;
                for l in 0..n {
                    s += a[i][l] * mk[l][j];
                }
                next[i][j] = s;
            }
            next[i][i] += coeffs[n - k + 1];
        }
        mk = next;
        let mut tr = 0.0;
        for i in 0..n {
            for l in 0..n {
                tr += a[i][l] * mk[l][i];
            }
        }
        coeffs[n - k] = -tr / k as f64;
    }
    coeffs
}

/// Roots of a monic polynomial by Durand–Kerner (Weierstrass) iteration.
pub fn poly_roots(coeffs: &[f64]) -> Vec<Complex64> {
    let n = coeffs.len() - 1;
    let eval = |z: Complex64| {
        coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    };
    let radius = 1.0 + coeffs[..n].iter().map(|c| c.abs()).fold(0.0, f64::max);
    let seed = Complex64::new(0.4, 0.9);
    let mut roots: Vec<Complex64> = (0..n).map(|k| seed.powu(k as u32) * radius).collect();
    for _ in 0..5000 {
        let mut delta: f64 = 0.0;
        for i in 0..n {
            let mut denom = Complex64::new(1.0, 0.0);
            for j in 0..n {
                if i != j {
                    denom *= roots[i] - roots[j];
                }
            }
            let step = eval(roots[i]) / denom;
            roots[i] -= step;
            delta = delta.max(step.norm());
        }
        if delta < 1e-15 {
            break;
        }
    }
    // Newton polish
    let deriv: Vec<f64> = (1..=n).map(|k| k as f64 * coeffs[k]).collect();
    let eval_d = |z: Complex64| {
        deriv
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    };
    for r in &mut roots {
        for _ in 0..3 {
            let d = eval_d(*r);
            if d.norm() > 1e-8 {
                *r -= eval(*r) / d;
            }
        }
    }
    roots
}

pub fn charpoly_roots(m: &[Vec<f64>]) -> Vec<Complex64> {
    poly_roots(&charpoly(m))
}

/// Laplace expansion along the first row.
pub fn cofactor_determinant(m: &[Vec<f64>]) -> f64 {
    fn det(a: &[Vec<f64>]) -> f64 {
        let n = a.len();
        match n {
            0 => 1.0,
            1 => a[0][0],
            _ => (0..n)
                .map(|col| {
                    let minor: Vec<Vec<f64>> = a[1..]
                        .iter()
                        .map(|row| {
                            row.iter()
                                .enumerate()
                                .filter(|&(j, _)| j != col)
                                .map(|(_, &x)| x)
                                .collect()
                        })
                        .collect();
                    let sign = if col % 2 == 0 { 1.0 } else { -1.0 };
                    sign * a[0][col] * det(&minor)
                })
                .sum(),
        }
    }
    det(m)
}

/// Largest distance in a greedy nearest-neighbour matching of two
/// multisets of equal size.
pub fn multiset_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let mut used = vec![false; b.len()];
    let mut worst: f64 = 0.0;
    for x in a {
        let (best, dist) = b
            .iter()
            .enumerate()
            .filter(|(k, _)| !used[*k])
            .map(|(k, y)| (k, (x - y).norm()))
            .min_by(|p, q| p.1.total_cmp(&q.1))
            .unwrap();
        used[best] = true;
        worst = worst.max(dist);
    }
    worst
}

/// Straight-line evaluation of the adaptive Kuramoto vector field on the
/// full (n x n) coupling matrix, then restricted to edges in row-major order.
/// `mu[i][j]` is the plasticity gain of link (i, j); `gamma_fn` is the
/// learning rule.
pub fn full_rhs_reference(
    adjacency: &[Vec<i64>],
    omega: &[f64],
    decay: f64,
    mu: &[Vec<f64>],
    gamma_fn: impl Fn(f64) -> f64,
    theta: &[f64],
    k_edges: &[f64],
) -> (Vec<f64>, Vec<f64>) {
    let n = omega.len();
    let mut k = vec![vec![0.0; n]; n];
    let mut idx = 0;
    for i in 0..n {
        for j in 0..n {
            if adjacency[i][j] == 1 {
                k[i][j] = k_edges[idx];
                idx += 1;
            }
        }
    }
    let mut dtheta = vec![0.0; n];
    for i in 0..n {
        dtheta[i] = omega[i];
        for j in 0..n {
            dtheta[i] += adjacency[i][j] as f64 * k[i][j] * (theta[j] - theta[i]).sin();
        }
    }
    let mut dk = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if adjacency[i][j] == 1 {
                dk.push(-decay * k[i][j] + mu[i][j] * gamma_fn(theta[j] - theta[i]));
            }
        }
    }
    (dtheta, dk)
}
