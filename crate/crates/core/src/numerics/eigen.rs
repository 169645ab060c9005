//! Eigenvalues of dense real nonsymmetric matrices.
//!
//! Householder reduction to upper Hessenberg form followed by the Francis
//! double-shift QR iteration with deflation and exceptional shifts (the
//! EISPACK `orthes` + `hqr` scheme). Exceptional shifts matter here: the
//! cyclic permutation matrices used as residual maps are a textbook case
//! where unmodified shifted QR stalls.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::Matrix;

/// Sweeps allowed per eigenvalue before giving up.
const MAX_SWEEPS_PER_EIGENVALUE: usize = 60;

/// All eigenvalues of `m`, with multiplicity. Complex pairs appear adjacently.
pub fn eigenvalues(m: &Matrix) -> Result<Vec<Complex64>> {
    if !m.is_square() {
        return Err(Error::NotSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    let n = m.rows();
    if n == 0 {
        return Ok(Vec::new());
    }
    if !m.is_finite() {
        return Err(Error::InvalidInput("matrix has non-finite entries".into()));
    }
    let mut h = Hess {
        n,
        a: m.as_slice().to_vec(),
    };
    h.reduce();
    h.qr_iterate()
}

struct Hess {
    n: usize,
    a: Vec<f64>,
}

impl Hess {
    #[inline]
    fn get(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.n + j]
    }

    #[inline]
    fn set(&mut self, i: usize, j: usize, v: f64) {
        self.a[i * self.n + j] = v;
    }

    /// Orthogonal similarity reduction to upper Hessenberg form.
    fn reduce(&mut self) {
        let n = self.n;
        if n < 3 {
            return;
        }
        let high = n - 1;
        let mut ort = vec![0.0; n];
        for m in 1..high {
            let scale: f64 = (m..=high).map(|i| self.get(i, m - 1).abs()).sum();
            if scale == 0.0 {
                continue;
            }
            let mut h = 0.0;
            for i in (m..=high).rev() {
                ort[i] = self.get(i, m - 1) / scale;
                h += ort[i] * ort[i];
            }
            let mut g = h.sqrt();
            if ort[m] > 0.0 {
                g = -g;
            }
            h -= ort[m] * g;
            ort[m] -= g;

            for j in m..n {
                let mut f = 0.0;
                for i in (m..=high).rev() {
                    f += ort[i] * self.get(i, j);
                }
                f /= h;
                for i in m..=high {
                    let v = self.get(i, j) - f * ort[i];
                    self.set(i, j, v);
                }
            }
            for i in 0..=high {
                let mut f = 0.0;
                for j in (m..=high).rev() {
                    f += ort[j] * self.get(i, j);
                }
                f /= h;
                for j in m..=high {
                    let v = self.get(i, j) - f * ort[j];
                    self.set(i, j, v);
                }
            }
            ort[m] *= scale;
            self.set(m, m - 1, scale * g);
            for i in (m + 1)..=high {
                self.set(i, m - 1, 0.0);
            }
        }
    }

    fn qr_iterate(&mut self) -> Result<Vec<Complex64>> {
        let nn = self.n;
        let eps = f64::EPSILON;
        let mut re = vec![0.0; nn];
        let mut im = vec![0.0; nn];

        let mut norm = 0.0;
        for i in 0..nn {
            for j in i.saturating_sub(1)..nn {
                norm += self.get(i, j).abs();
            }
        }

        let mut n = nn as isize - 1;
        let low: isize = 0;
        let mut exshift = 0.0;
        let mut iter = 0usize;
        let mut total = 0usize;
        let budget = MAX_SWEEPS_PER_EIGENVALUE * nn.max(1);

        let (mut p, mut q, mut r, mut s, mut z);
        let (mut x, mut y, mut w);

        while n >= low {
            let nu = n as usize;
            // find a negligible subdiagonal entry
            let mut l = n;
            while l > low {
                let lu = l as usize;
                s = self.get(lu - 1, lu - 1).abs() + self.get(lu, lu).abs();
                if s == 0.0 {
                    s = norm;
                }
                if self.get(lu, lu - 1).abs() < eps * s {
                    break;
                }
                l -= 1;
            }

            if l == n {
                // one root
                let v = self.get(nu, nu) + exshift;
                self.set(nu, nu, v);
                re[nu] = v;
                im[nu] = 0.0;
                n -= 1;
                iter = 0;
            } else if l == n - 1 {
                // two roots
                w = self.get(nu, nu - 1) * self.get(nu - 1, nu);
                p = (self.get(nu - 1, nu - 1) - self.get(nu, nu)) / 2.0;
                q = p * p + w;
                z = q.abs().sqrt();
                let hn = self.get(nu, nu) + exshift;
                self.set(nu, nu, hn);
                let hn1 = self.get(nu - 1, nu - 1) + exshift;
                self.set(nu - 1, nu - 1, hn1);
                x = hn;
                if q >= 0.0 {
                    z = if p >= 0.0 { p + z } else { p - z };
                    re[nu - 1] = x + z;
                    re[nu] = re[nu - 1];
                    if z != 0.0 {
                        re[nu] = x - w / z;
                    }
                    im[nu - 1] = 0.0;
                    im[nu] = 0.0;
                } else {
                    re[nu - 1] = x + p;
                    re[nu] = x + p;
                    im[nu - 1] = z;
                    im[nu] = -z;
                }
                n -= 2;
                iter = 0;
            } else {
                let lu = l as usize;
                x = self.get(nu, nu);
                y = 0.0;
                w = 0.0;
                if l < n {
                    y = self.get(nu - 1, nu - 1);
                    w = self.get(nu, nu - 1) * self.get(nu - 1, nu);
                }

                // Wilkinson's ad hoc shift
                if iter == 10 {
                    exshift += x;
                    for i in lu..=nu {
                        let v = self.get(i, i) - x;
                        self.set(i, i, v);
                    }
                    s = self.get(nu, nu - 1).abs() + self.get(nu - 1, nu - 2).abs();
                    x = 0.75 * s;
                    y = x;
                    w = -0.4375 * s * s;
                }

                // second exceptional shift
                if iter == 30 {
                    s = (y - x) / 2.0;
                    s = s * s + w;
                    if s > 0.0 {
                        s = s.sqrt();
                        if y < x {
                            s = -s;
                        }
                        s = x - w / ((y - x) / 2.0 + s);
                        for i in lu..=nu {
                            let v = self.get(i, i) - s;
                            self.set(i, i, v);
                        }
                        exshift += s;
                        x = 0.964;
                        y = x;
                        w = x;
                    }
                }

                iter += 1;
                total += 1;
                if total > budget {
                    return Err(Error::Convergence(format!(
                        "QR iteration exceeded {budget} sweeps on a {nn}x{nn} matrix"
                    )));
                }

                // look for two consecutive small subdiagonal elements
                let mut m = n - 2;
                loop {
                    let mu = m as usize;
                    z = self.get(mu, mu);
                    r = x - z;
                    s = y - z;
                    p = (r * s - w) / self.get(mu + 1, mu) + self.get(mu, mu + 1);
                    q = self.get(mu + 1, mu + 1) - z - r - s;
                    r = self.get(mu + 2, mu + 1);
                    s = p.abs() + q.abs() + r.abs();
                    p /= s;
                    q /= s;
                    r /= s;
                    if m == l {
                        break;
                    }
                    let lhs = self.get(mu, mu - 1).abs() * (q.abs() + r.abs());
                    let rhs = eps
                        * (p.abs()
                            * (self.get(mu - 1, mu - 1).abs()
                                + z.abs()
                                + self.get(mu + 1, mu + 1).abs()));
                    if lhs < rhs {
                        break;
                    }
                    m -= 1;
                }
                let mu = m as usize;

                for i in (mu + 2)..=nu {
                    self.set(i, i - 2, 0.0);
                    if i > mu + 2 {
                        self.set(i, i - 3, 0.0);
                    }
                }

                // double QR step on rows l..=n, columns m..=n
                let mut k = mu;
                while k < nu {
                    let notlast = k != nu - 1;
                    if k != mu {
                        p = self.get(k, k - 1);
                        q = self.get(k + 1, k - 1);
                        r = if notlast { self.get(k + 2, k - 1) } else { 0.0 };
                        x = p.abs() + q.abs() + r.abs();
                        if x == 0.0 {
                            k += 1;
                            continue;
                        }
                        p /= x;
                        q /= x;
                        r /= x;
                    }
                    s = (p * p + q * q + r * r).sqrt();
                    if p < 0.0 {
                        s = -s;
                    }
                    if s != 0.0 {
                        if k != mu {
                            self.set(k, k - 1, -s * x);
                        } else if l != m {
                            let v = -self.get(k, k - 1);
                            self.set(k, k - 1, v);
                        }
                        p += s;
                        x = p / s;
                        y = q / s;
                        z = r / s;
                        q /= p;
                        r /= p;

                        for j in k..nn {
                            let mut pp = self.get(k, j) + q * self.get(k + 1, j);
                            if notlast {
                                pp += r * self.get(k + 2, j);
                                let v = self.get(k + 2, j) - pp * z;
                                self.set(k + 2, j, v);
                            }
                            let v = self.get(k, j) - pp * x;
                            self.set(k, j, v);
                            let v = self.get(k + 1, j) - pp * y;
                            self.set(k + 1, j, v);
                        }
                        let top = nu.min(k + 3);
                        for i in 0..=top {
                            let mut pp = x * self.get(i, k) + y * self.get(i, k + 1);
                            if notlast {
                                pp += z * self.get(i, k + 2);
                                let v = self.get(i, k + 2) - pp * r;
                                self.set(i, k + 2, v);
                            }
                            let v = self.get(i, k) - pp;
                            self.set(i, k, v);
                            let v = self.get(i, k + 1) - pp * q;
                            self.set(i, k + 1, v);
                        }
                    }
                    k += 1;
                }
            }
        }

        Ok(re
            .into_iter()
            .zip(im)
            .map(|(a, b)| Complex64::new(a, b))
            .collect())
    }
}
