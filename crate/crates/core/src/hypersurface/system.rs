//! The square polynomial system whose solutions contain the `k`-critical points.
//!
//! Unknowns, in order: `x`, `y₀ … y_k`, `λ₀ … λ_k`, `μ`, `σ₀ … σ_k`, `r`.
//! Equations, in order:
//!
//! * `x − μ∇p(x) − Σλᵢyᵢ = 0` (with `X = ℝⁿ`: `Σλᵢ(x − yᵢ) = 0`)
//! * `Σλᵢ − 1 = 0`
//! * `p(x) = 0`
//! * `q(yᵢ) = 0`
//! * `‖x − yᵢ‖² − r² = 0`
//! * `x − yᵢ − σᵢ∇q(yᵢ) = 0`, the rank-one condition on `(x − yᵢ, ∇q(yᵢ))`
//!
//! With `X = ℝⁿ` the `μ` unknown and `p(x) = 0` are dropped. With a finite
//! target the `yᵢ` are constants, and the `yᵢ`, `σᵢ` unknowns and the `q`
//! and rank equations are dropped.

use crate::error::{Error, Result};
use crate::numerics::{Matrix, System};
use crate::poly::Poly;

/// Positions of the unknown blocks inside the solution vector.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Layout {
    pub n: usize,
    pub k: usize,
    pub surface: bool,
    pub free_witnesses: bool,
}

impl Layout {
    pub fn m(&self) -> usize {
        self.k + 1
    }

    pub fn x(&self) -> usize {
        0
    }

    pub fn y(&self, i: usize) -> usize {
        debug_assert!(self.free_witnesses);
        self.n + i * self.n
    }

    pub fn lambda(&self, i: usize) -> usize {
        self.n
            + if self.free_witnesses {
                self.n * self.m()
            } else {
                0
            }
            + i
    }

    pub fn mu(&self) -> Option<usize> {
        self.surface.then(|| self.lambda(0) + self.m())
    }

    pub fn sigma(&self, i: usize) -> usize {
        debug_assert!(self.free_witnesses);
        self.lambda(0) + self.m() + usize::from(self.surface) + i
    }

    pub fn r(&self) -> usize {
        self.len() - 1
    }

    pub fn len(&self) -> usize {
        let mut l = self.n + self.m() + usize::from(self.surface) + 1;
        if self.free_witnesses {
            l += self.n * self.m() + self.m();
        }
        l
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Number of equations.
    pub fn equations(&self) -> usize {
        let mut e = self.n + 1 + usize::from(self.surface) + self.m();
        if self.free_witnesses {
            e += self.m() + self.n * self.m();
        }
        e
    }
}

/// Residual and Jacobian of the critical system for one `k`.
pub struct CriticalSystem<'a> {
    pub p: Option<&'a Poly>,
    pub q: Option<&'a Poly>,
    /// Witnesses of a finite target; unused when `q` is set.
    pub fixed: Vec<Vec<f64>>,
    pub layout: Layout,
}

/// Builds the system for `X = Z(p)` (or `ℝⁿ` if `p` is `None`) and `Y = Z(q)`.
pub fn assemble_critical_system<'a>(
    p: Option<&'a Poly>,
    q: &'a Poly,
    k: usize,
) -> Result<CriticalSystem<'a>> {
    let n = q.nvars();
    if let Some(p) = p {
        if p.nvars() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: p.nvars(),
            });
        }
    }
    if k > n {
        return Err(Error::IndexOutOfRange { k, max: n });
    }
    Ok(CriticalSystem {
        p,
        q: Some(q),
        fixed: Vec::new(),
        layout: Layout {
            n,
            k,
            surface: p.is_some(),
            free_witnesses: true,
        },
    })
}

impl<'a> CriticalSystem<'a> {
    /// System for a finite target whose `k+1` witnesses are given.
    pub fn with_fixed_witnesses(p: Option<&'a Poly>, witnesses: Vec<Vec<f64>>) -> Result<Self> {
        let Some(first) = witnesses.first() else {
            return Err(Error::Invalid("no witnesses".into()));
        };
        let n = first.len();
        if let Some(w) = witnesses.iter().find(|w| w.len() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: w.len(),
            });
        }
        if let Some(p) = p {
            if p.nvars() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: p.nvars(),
                });
            }
        }
        let k = witnesses.len() - 1;
        if k > n {
            return Err(Error::IndexOutOfRange { k, max: n });
        }
        Ok(CriticalSystem {
            p,
            q: None,
            fixed: witnesses,
            layout: Layout {
                n,
                k,
                surface: p.is_some(),
                free_witnesses: false,
            },
        })
    }

    pub fn witness<'z>(&'z self, z: &'z [f64], i: usize) -> &'z [f64] {
        let l = &self.layout;
        if l.free_witnesses {
            &z[l.y(i)..l.y(i) + l.n]
        } else {
            &self.fixed[i]
        }
    }

    /// Packs unknowns into a vector in the layout order.
    pub fn pack(
        &self,
        x: &[f64],
        ys: &[Vec<f64>],
        lambdas: &[f64],
        mu: f64,
        sigmas: &[f64],
        r: f64,
    ) -> Vec<f64> {
        let l = &self.layout;
        let mut z = vec![0.0; l.len()];
        z[..l.n].copy_from_slice(x);
        if l.free_witnesses {
            for (i, y) in ys.iter().enumerate() {
                z[l.y(i)..l.y(i) + l.n].copy_from_slice(y);
            }
            for (i, s) in sigmas.iter().enumerate() {
                z[l.sigma(i)] = *s;
            }
        }
        for (i, lam) in lambdas.iter().enumerate() {
            z[l.lambda(i)] = *lam;
        }
        if let Some(im) = l.mu() {
            z[im] = mu;
        }
        z[l.r()] = r;
        z
    }
}

impl System for CriticalSystem<'_> {
    fn dim(&self) -> usize {
        self.layout.len()
    }

    fn residual(&self, z: &[f64]) -> Vec<f64> {
        let l = &self.layout;
        let n = l.n;
        let x = &z[..n];
        let r = z[l.r()];
        let mut out = Vec::with_capacity(l.equations());

        let mut block = vec![0.0; n];
        match (self.p, l.mu()) {
            (Some(p), Some(im)) => {
                let g = p.grad(x).expect("dimension checked");
                for j in 0..n {
                    block[j] = x[j] - z[im] * g[j];
                }
                for i in 0..l.m() {
                    let y = self.witness(z, i);
                    for j in 0..n {
                        block[j] -= z[l.lambda(i)] * y[j];
                    }
                }
            }
            _ => {
                for i in 0..l.m() {
                    let y = self.witness(z, i);
                    for j in 0..n {
                        block[j] += z[l.lambda(i)] * (x[j] - y[j]);
                    }
                }
            }
        }
        out.extend(block);
        out.push((0..l.m()).map(|i| z[l.lambda(i)]).sum::<f64>() - 1.0);
        if let Some(p) = self.p {
            out.push(p.eval(x).expect("dimension checked"));
        }
        if let Some(q) = self.q {
            for i in 0..l.m() {
                out.push(q.eval(self.witness(z, i)).expect("dimension checked"));
            }
        }
        for i in 0..l.m() {
            let y = self.witness(z, i);
            let d2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
            out.push(d2 - r * r);
        }
        if let Some(q) = self.q {
            for i in 0..l.m() {
                let y = self.witness(z, i);
                let g = q.grad(y).expect("dimension checked");
                let s = z[l.sigma(i)];
                for j in 0..n {
                    out.push(x[j] - y[j] - s * g[j]);
                }
            }
        }
        out
    }

    fn jacobian(&self, z: &[f64]) -> Matrix {
        let l = &self.layout;
        let n = l.n;
        let m = l.m();
        let x = &z[..n];
        let r = z[l.r()];
        let mut jac = Matrix::zeros(l.equations(), l.len());
        let mut row = 0;

        // First block.
        match (self.p, l.mu()) {
            (Some(p), Some(im)) => {
                let g = p.grad(x).expect("dimension checked");
                let h = p.hessian(x).expect("dimension checked");
                let mu = z[im];
                for a in 0..n {
                    for b in 0..n {
                        jac[(a, b)] = -mu * h[(a, b)] + if a == b { 1.0 } else { 0.0 };
                    }
                    jac[(a, im)] = -g[a];
                }
                for i in 0..m {
                    let y = self.witness(z, i);
                    let lam = z[l.lambda(i)];
                    for a in 0..n {
                        jac[(a, l.lambda(i))] = -y[a];
                        if l.free_witnesses {
                            jac[(a, l.y(i) + a)] = -lam;
                        }
                    }
                }
            }
            _ => {
                let total: f64 = (0..m).map(|i| z[l.lambda(i)]).sum();
                for a in 0..n {
                    jac[(a, a)] = total;
                }
                for i in 0..m {
                    let y = self.witness(z, i);
                    let lam = z[l.lambda(i)];
                    for a in 0..n {
                        jac[(a, l.lambda(i))] = x[a] - y[a];
                        if l.free_witnesses {
                            jac[(a, l.y(i) + a)] = -lam;
                        }
                    }
                }
            }
        }
        row += n;

        for i in 0..m {
            jac[(row, l.lambda(i))] = 1.0;
        }
        row += 1;

        if let Some(p) = self.p {
            let g = p.grad(x).expect("dimension checked");
            for b in 0..n {
                jac[(row, b)] = g[b];
            }
            row += 1;
        }

        if let Some(q) = self.q {
            for i in 0..m {
                let g = q.grad(self.witness(z, i)).expect("dimension checked");
                for b in 0..n {
                    jac[(row, l.y(i) + b)] = g[b];
                }
                row += 1;
            }
        }

        for i in 0..m {
            let y = self.witness(z, i);
            for b in 0..n {
                let d = 2.0 * (x[b] - y[b]);
                jac[(row, b)] = d;
                if l.free_witnesses {
                    jac[(row, l.y(i) + b)] = -d;
                }
            }
            jac[(row, l.r())] = -2.0 * r;
            row += 1;
        }

        if let Some(q) = self.q {
            for i in 0..m {
                let y = self.witness(z, i);
                let g = q.grad(y).expect("dimension checked");
                let h = q.hessian(y).expect("dimension checked");
                let s = z[l.sigma(i)];
                for a in 0..n {
                    jac[(row + a, a)] = 1.0;
                    for b in 0..n {
                        jac[(row + a, l.y(i) + b)] =
                            -s * h[(a, b)] - if a == b { 1.0 } else { 0.0 };
                    }
                    jac[(row + a, l.sigma(i))] = -g[a];
                }
                row += n;
            }
        }
        debug_assert_eq!(row, l.equations());
        jac
    }
}
