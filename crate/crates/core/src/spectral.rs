//! Eigenvalues of small dense real matrices.
//!
//! The solver balances the matrix, reduces it to upper Hessenberg form by
//! stabilized elementary similarity transforms, and then runs the Francis
//! double-shift QR iteration (the classical EISPACK `balanc`/`elmhes`/`hqr`
//! sequence). Only eigenvalues are computed.

use std::cmp::Ordering;

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::matrix::Matrix;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix entry ({0}, {1}) is not finite")]
    NonFinite(usize, usize),
    #[error("QR iteration did not converge within {0} iterations")]
    NoConvergence(usize),
}

/// Eigenvalues with multiplicity, sorted by real part then imaginary part,
/// both descending.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Spectrum {
    pub eigenvalues: Vec<Complex64>,
    /// `-inf` for the empty spectrum of a 0x0 matrix.
    pub max_real_part: f64,
}

impl Spectrum {
    fn from_unsorted(mut eigenvalues: Vec<Complex64>) -> Self {
        eigenvalues.sort_by(|a, b| {
            b.re.partial_cmp(&a.re)
                .unwrap_or(Ordering::Equal)
                .then(b.im.partial_cmp(&a.im).unwrap_or(Ordering::Equal))
        });
        let max_real_part = eigenvalues
            .iter()
            .map(|z| z.re)
            .fold(f64::NEG_INFINITY, f64::max);
        Self {
            eigenvalues,
            max_real_part,
        }
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self::from_unsorted(self.eigenvalues.iter().map(|z| z * factor).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HurwitzVerdict {
    pub hurwitz: bool,
    pub max_real_part: f64,
}

/// All eigenvalues of a real square matrix.
pub fn eig(m: &Matrix<f64>) -> Result<Spectrum, SpectralError> {
    if !m.is_square() {
        return Err(SpectralError::NotSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    let n = m.rows();
    for i in 0..n {
        for j in 0..n {
            if !m[(i, j)].is_finite() {
                return Err(SpectralError::NonFinite(i, j));
            }
        }
    }
    if n == 0 {
        return Ok(Spectrum::from_unsorted(Vec::new()));
    }
    let mut a = OneBased::from_matrix(m);
    balance(&mut a);
    reduce_to_hessenberg(&mut a);
    let eigenvalues = hessenberg_qr(&mut a)?;
    Ok(Spectrum::from_unsorted(eigenvalues))
}

/// True iff every eigenvalue has real part below `-margin`.
pub fn is_hurwitz(m: &Matrix<f64>, margin: f64) -> Result<HurwitzVerdict, SpectralError> {
    let spectrum = eig(m)?;
    Ok(HurwitzVerdict {
        hurwitz: spectrum.max_real_part < -margin,
        max_real_part: spectrum.max_real_part,
    })
}

/// Square work array indexed from 1, so the loops below keep the bounds of
/// the reference EISPACK routines.
struct OneBased {
    n: usize,
    data: Vec<f64>,
}

impl OneBased {
    fn from_matrix(m: &Matrix<f64>) -> Self {
        let n = m.rows();
        let mut data = vec![0.0; (n + 1) * (n + 1)];
        for i in 0..n {
            for j in 0..n {
                data[(i + 1) * (n + 1) + j + 1] = m[(i, j)];
            }
        }
        Self { n, data }
    }

    #[inline]
    fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * (self.n + 1) + j]
    }

    #[inline]
    fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * (self.n + 1) + j] = v;
    }

    #[inline]
    fn add(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * (self.n + 1) + j] += v;
    }

    fn swap(&mut self, (i1, j1): (usize, usize), (i2, j2): (usize, usize)) {
        let w = self.n + 1;
        self.data.swap(i1 * w + j1, i2 * w + j2);
    }
}

const RADIX: f64 = 2.0;

/// Diagonal similarity scaling by powers of two so that row and column
/// norms are comparable. Exact in floating point.
fn balance(a: &mut OneBased) {
    let n = a.n;
    let sqrdx = RADIX * RADIX;
    let mut done = false;
    while !done {
        done = true;
        for i in 1..=n {
            let mut r = 0.0;
            let mut c = 0.0;
            for j in 1..=n {
                if j != i {
                    c += a.get(j, i).abs();
                    r += a.get(i, j).abs();
                }
            }
            if c != 0.0 && r != 0.0 {
                let mut g = r / RADIX;
                let mut f = 1.0;
                let s = c + r;
                while c < g {
                    f *= RADIX;
                    c *= sqrdx;
                }
                g = r * RADIX;
                while c > g {
                    f /= RADIX;
                    c /= sqrdx;
                }
                if (c + r) / f < 0.95 * s {
                    done = false;
                    let g = 1.0 / f;
                    for j in 1..=n {
                        a.set(i, j, a.get(i, j) * g);
                    }
                    for j in 1..=n {
                        a.set(j, i, a.get(j, i) * f);
                    }
                }
            }
        }
    }
}

/// Gaussian elimination with partial pivoting to upper Hessenberg form.
fn reduce_to_hessenberg(a: &mut OneBased) {
    let n = a.n;
    for m in 2..n {
        let mut x = 0.0f64;
        let mut pivot = m;
        for j in m..=n {
            if a.get(j, m - 1).abs() > x.abs() {
                x = a.get(j, m - 1);
                pivot = j;
            }
        }
        if pivot != m {
            for j in (m - 1)..=n {
                a.swap((pivot, j), (m, j));
            }
            for j in 1..=n {
                a.swap((j, pivot), (j, m));
            }
        }
        if x != 0.0 {
            for i in (m + 1)..=n {
                let mut y = a.get(i, m - 1);
                if y != 0.0 {
                    y /= x;
                    a.set(i, m - 1, y);
                    for j in m..=n {
                        a.add(i, j, -y * a.get(m, j));
                    }
                    for j in 1..=n {
                        a.add(j, m, y * a.get(j, i));
                    }
                }
            }
        }
    }
    // multipliers left below the subdiagonal are not part of the result
    for i in 1..=n {
        for j in 1..i.saturating_sub(1) {
            a.set(i, j, 0.0);
        }
    }
}

fn sign(a: f64, b: f64) -> f64 {
    if b >= 0.0 {
        a.abs()
    } else {
        -a.abs()
    }
}

/// Francis double-shift QR on an upper Hessenberg matrix; destroys `a`.
fn hessenberg_qr(a: &mut OneBased) -> Result<Vec<Complex64>, SpectralError> {
    let n = a.n;
    let cap = 100 * n;
    let mut wr = vec![0.0; n + 1];
    let mut wi = vec![0.0; n + 1];

    let mut anorm = 0.0;
    for i in 1..=n {
        for j in i.saturating_sub(1).max(1)..=n {
            anorm += a.get(i, j).abs();
        }
    }

    let mut total_iterations = 0;
    let mut nn = n;
    let mut t = 0.0;
    while nn >= 1 {
        let mut its = 0;
        loop {
            // look for a single small subdiagonal element
            let mut l = nn;
            while l >= 2 {
                let mut s = a.get(l - 1, l - 1).abs() + a.get(l, l).abs();
                if s == 0.0 {
                    s = anorm;
                }
                if a.get(l, l - 1).abs() + s == s {
                    a.set(l, l - 1, 0.0);
                    break;
                }
                l -= 1;
            }
            let mut x = a.get(nn, nn);
            if l == nn {
                // one root found
                wr[nn] = x + t;
                wi[nn] = 0.0;
                nn -= 1;
            } else {
                let mut y = a.get(nn - 1, nn - 1);
                let mut w = a.get(nn, nn - 1) * a.get(nn - 1, nn);
                if l == nn - 1 {
                    // two roots found
                    let p = 0.5 * (y - x);
                    let q = p * p + w;
                    let mut z = q.abs().sqrt();
                    x += t;
                    if q >= 0.0 {
                        z = p + sign(z, p);
                        wr[nn - 1] = x + z;
                        wr[nn] = x + z;
                        if z != 0.0 {
                            wr[nn] = x - w / z;
                        }
                        wi[nn - 1] = 0.0;
                        wi[nn] = 0.0;
                    } else {
                        wr[nn - 1] = x + p;
                        wr[nn] = x + p;
                        wi[nn - 1] = -z;
                        wi[nn] = z;
                    }
                    nn -= 2;
                } else {
                    if total_iterations >= cap {
                        return Err(SpectralError::NoConvergence(cap));
                    }
                    if its > 0 && its % 10 == 0 {
                        // exceptional shift
                        t += x;
                        for i in 1..=nn {
                            a.add(i, i, -x);
                        }
                        let s = a.get(nn, nn - 1).abs() + a.get(nn - 1, nn - 2).abs();
                        x = 0.75 * s;
                        y = x;
                        w = -0.4375 * s * s;
                    }
                    its += 1;
                    total_iterations += 1;
                    francis_step(a, l, nn, x, y, w);
                }
            }
            if nn < 2 || l + 1 >= nn {
                break;
            }
        }
    }

    Ok((1..=n).map(|i| Complex64::new(wr[i], wi[i])).collect())
}

/// One implicit double-shift sweep on the active block `l..=nn`.
fn francis_step(a: &mut OneBased, l: usize, nn: usize, x: f64, y: f64, w: f64) {
    // find two consecutive small subdiagonal elements
    let mut m = nn - 2;
    let (mut p, mut q, mut r);
    loop {
        let z = a.get(m, m);
        let rr = x - z;
        let s = y - z;
        p = (rr * s - w) / a.get(m + 1, m) + a.get(m, m + 1);
        q = a.get(m + 1, m + 1) - z - rr - s;
        r = a.get(m + 2, m + 1);
        let s = p.abs() + q.abs() + r.abs();
        p /= s;
        q /= s;
        r /= s;
        if m == l {
            break;
        }
        let u = a.get(m, m - 1).abs() * (q.abs() + r.abs());
        let v = p.abs() * (a.get(m - 1, m - 1).abs() + z.abs() + a.get(m + 1, m + 1).abs());
        if u + v == v {
            break;
        }
        m -= 1;
    }
    for i in (m + 2)..=nn {
        a.set(i, i - 2, 0.0);
        if i != m + 2 {
            a.set(i, i - 3, 0.0);
        }
    }
    let mut x = 0.0;
    for k in m..nn {
        if k != m {
            p = a.get(k, k - 1);
            q = a.get(k + 1, k - 1);
            r = if k != nn - 1 { a.get(k + 2, k - 1) } else { 0.0 };
            x = p.abs() + q.abs() + r.abs();
            if x != 0.0 {
                p /= x;
                q /= x;
                r /= x;
            }
        }
        let s = sign((p * p + q * q + r * r).sqrt(), p);
        if s != 0.0 {
            if k == m {
                if l != m {
                    a.set(k, k - 1, -a.get(k, k - 1));
                }
            } else {
                a.set(k, k - 1, -s * x);
            }
            p += s;
            let xk = p / s;
            let yk = q / s;
            let zk = r / s;
            q /= p;
            r /= p;
            for j in k..=nn {
                let mut pp = a.get(k, j) + q * a.get(k + 1, j);
                if k != nn - 1 {
                    pp += r * a.get(k + 2, j);
                    a.add(k + 2, j, -pp * zk);
                }
                a.add(k + 1, j, -pp * yk);
                a.add(k, j, -pp * xk);
            }
            let mmin = nn.min(k + 3);
            for i in l..=mmin {
                let mut pp = xk * a.get(i, k) + yk * a.get(i, k + 1);
                if k != nn - 1 {
                    pp += zk * a.get(i, k + 2);
                    a.add(i, k + 2, -pp * r);
                }
                a.add(i, k + 1, -pp * q);
                a.add(i, k, -pp);
            }
        }
    }
}
