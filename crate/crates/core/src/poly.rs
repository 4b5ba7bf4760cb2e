//! Sparse multivariate real polynomials.
//!
//! A [`Poly`] is a map from exponent vectors to nonzero `f64` coefficients.
//! Derivatives are taken symbolically on the term map and then evaluated, so
//! the Hessian is symmetric by construction. Sums use compensated
//! accumulation.

use std::collections::BTreeMap;

use num_bigint::BigUint;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{CompensatedSum, Matrix};

/// Exponent vector of a monomial, one entry per variable.
pub type Exponent = Vec<u32>;

/// A sparse real polynomial in `nvars` variables.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PolyFile", into = "PolyFile")]
pub struct Poly {
    nvars: usize,
    terms: BTreeMap<Exponent, f64>,
    degree: u32,
}

/// Coefficient scaling used by [`random_poly_with`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Scaling {
    /// Coefficient of `x^α` drawn as `N(0,1) / (1 + |α|)`.
    #[default]
    Damped,
    /// Every coefficient drawn as `N(0,1)`.
    Flat,
}

impl Poly {
    /// Builds a polynomial from `(exponent, coefficient)` pairs. Repeated
    /// exponents are summed and zero coefficients dropped.
    pub fn new<I>(nvars: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Exponent, f64)>,
    {
        if nvars == 0 {
            return Err(Error::Invalid("nvars must be positive".into()));
        }
        let mut map: BTreeMap<Exponent, f64> = BTreeMap::new();
        for (exp, coef) in terms {
            if exp.len() != nvars {
                return Err(Error::DimensionMismatch {
                    expected: nvars,
                    got: exp.len(),
                });
            }
            if !coef.is_finite() {
                return Err(Error::Invalid(format!("non-finite coefficient {coef}")));
            }
            *map.entry(exp).or_insert(0.0) += coef;
        }
        map.retain(|_, c| *c != 0.0);
        Ok(Self::from_map(nvars, map))
    }

    fn from_map(nvars: usize, terms: BTreeMap<Exponent, f64>) -> Self {
        let degree = terms
            .keys()
            .map(|e| e.iter().sum::<u32>())
            .max()
            .unwrap_or(0);
        Poly {
            nvars,
            terms,
            degree,
        }
    }

    pub fn zero(nvars: usize) -> Self {
        Self::from_map(nvars, BTreeMap::new())
    }

    pub fn constant(nvars: usize, c: f64) -> Self {
        Self::new(nvars, [(vec![0; nvars], c)]).expect("valid constant")
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponent, f64)> + '_ {
        self.terms.iter().map(|(e, c)| (e, *c))
    }

    pub fn coefficient(&self, exp: &[u32]) -> f64 {
        self.terms.get(exp).copied().unwrap_or(0.0)
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.nvars {
            return Err(Error::DimensionMismatch {
                expected: self.nvars,
                got: x.len(),
            });
        }
        Ok(())
    }

    /// `powers[i][e] = x_i^e` for `e <= degree`.
    fn power_table(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let d = self.degree as usize;
        x.iter()
            .map(|&xi| {
                let mut row = Vec::with_capacity(d + 1);
                let mut acc = 1.0;
                for _ in 0..=d {
                    row.push(acc);
                    acc *= xi;
                }
                row
            })
            .collect()
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x)?;
        let pw = self.power_table(x);
        let mut sum = CompensatedSum::default();
        for (exp, &c) in &self.terms {
            let mut m = c;
            for (i, &e) in exp.iter().enumerate() {
                m *= pw[i][e as usize];
            }
            sum.add(m);
        }
        Ok(sum.value())
    }

    pub fn grad(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(x)?;
        let n = self.nvars;
        let pw = self.power_table(x);
        let mut sums = vec![CompensatedSum::default(); n];
        for (exp, &c) in &self.terms {
            for i in 0..n {
                let ei = exp[i];
                if ei == 0 {
                    continue;
                }
                let mut m = c * ei as f64;
                for (j, &e) in exp.iter().enumerate() {
                    let e = if j == i { e - 1 } else { e };
                    m *= pw[j][e as usize];
                }
                sums[i].add(m);
            }
        }
        Ok(sums.iter().map(CompensatedSum::value).collect())
    }

    pub fn hessian(&self, x: &[f64]) -> Result<Matrix> {
        self.check_dim(x)?;
        let n = self.nvars;
        let pw = self.power_table(x);
        let mut sums = vec![CompensatedSum::default(); n * n];
        let mut reduced = vec![0u32; n];
        for (exp, &c) in &self.terms {
            for i in 0..n {
                if exp[i] == 0 {
                    continue;
                }
                for j in i..n {
                    reduced.copy_from_slice(exp);
                    let factor = if i == j {
                        if exp[i] < 2 {
                            continue;
                        }
                        reduced[i] -= 2;
                        (exp[i] * (exp[i] - 1)) as f64
                    } else {
                        if exp[j] == 0 {
                            continue;
                        }
                        reduced[i] -= 1;
                        reduced[j] -= 1;
                        (exp[i] * exp[j]) as f64
                    };
                    let mut m = c * factor;
                    for (v, &e) in reduced.iter().enumerate() {
                        m *= pw[v][e as usize];
                    }
                    sums[i * n + j].add(m);
                }
            }
        }
        let mut h = Matrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = sums[i * n + j].value();
                h[(i, j)] = v;
                h[(j, i)] = v;
            }
        }
        Ok(h)
    }

    /// Symbolic partial derivative with respect to variable `var`.
    pub fn partial(&self, var: usize) -> Poly {
        let mut map = BTreeMap::new();
        for (exp, &c) in &self.terms {
            if exp[var] == 0 {
                continue;
            }
            let mut e = exp.clone();
            e[var] -= 1;
            *map.entry(e).or_insert(0.0) += c * exp[var] as f64;
        }
        map.retain(|_, c: &mut f64| *c != 0.0);
        Self::from_map(self.nvars, map)
    }

    pub fn scale(&self, s: f64) -> Poly {
        let mut map: BTreeMap<Exponent, f64> =
            self.terms.iter().map(|(e, c)| (e.clone(), c * s)).collect();
        map.retain(|_, c| *c != 0.0);
        Self::from_map(self.nvars, map)
    }

    /// Substitutes the affine map `z ↦ A z + b`, returning `z ↦ p(A z + b)`.
    ///
    /// Used to move inputs by rigid motions; `A` must be `nvars × nvars`.
    pub fn compose_affine(&self, a: &Matrix, b: &[f64]) -> Result<Poly> {
        let n = self.nvars;
        if a.rows() != n || a.cols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: a.rows(),
            });
        }
        self.check_dim(b)?;
        // Row i of A plus b_i as a linear polynomial.
        let linear: Vec<BTreeMap<Exponent, f64>> = (0..n)
            .map(|i| {
                let mut m = BTreeMap::new();
                if b[i] != 0.0 {
                    m.insert(vec![0; n], b[i]);
                }
                for j in 0..n {
                    if a[(i, j)] != 0.0 {
                        let mut e = vec![0; n];
                        e[j] = 1;
                        m.insert(e, a[(i, j)]);
                    }
                }
                m
            })
            .collect();
        // Cache powers of each linear form.
        let max_deg = self.degree as usize;
        let powers: Vec<Vec<BTreeMap<Exponent, f64>>> = linear
            .iter()
            .map(|l| {
                let mut v = Vec::with_capacity(max_deg + 1);
                let mut one = BTreeMap::new();
                one.insert(vec![0; n], 1.0);
                v.push(one);
                for d in 1..=max_deg {
                    let next = mul_maps(&v[d - 1], l);
                    v.push(next);
                }
                v
            })
            .collect();
        let mut out: BTreeMap<Exponent, f64> = BTreeMap::new();
        for (exp, &c) in &self.terms {
            let mut prod = BTreeMap::new();
            prod.insert(vec![0; n], c);
            for (i, &e) in exp.iter().enumerate() {
                if e > 0 {
                    prod = mul_maps(&prod, &powers[i][e as usize]);
                }
            }
            for (e, v) in prod {
                *out.entry(e).or_insert(0.0) += v;
            }
        }
        out.retain(|_, c| *c != 0.0);
        Ok(Self::from_map(n, out))
    }
}

fn mul_maps(a: &BTreeMap<Exponent, f64>, b: &BTreeMap<Exponent, f64>) -> BTreeMap<Exponent, f64> {
    let mut out = BTreeMap::new();
    for (ea, ca) in a {
        for (eb, cb) in b {
            let e: Exponent = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
            *out.entry(e).or_insert(0.0) += ca * cb;
        }
    }
    out
}

/// All exponent vectors of total degree at most `degree`, graded
/// lexicographic order.
pub fn exponents_up_to(nvars: usize, degree: u32) -> Vec<Exponent> {
    let mut out = Vec::new();
    for total in 0..=degree {
        let mut cur = vec![0u32; nvars];
        compositions(total, 0, &mut cur, &mut out);
    }
    out
}

fn compositions(remaining: u32, idx: usize, cur: &mut Exponent, out: &mut Vec<Exponent>) {
    if idx + 1 == cur.len() {
        cur[idx] = remaining;
        out.push(cur.clone());
        return;
    }
    for e in (0..=remaining).rev() {
        cur[idx] = e;
        compositions(remaining - e, idx + 1, cur, out);
    }
    cur[idx] = 0;
}

/// Dense random polynomial with damped Gaussian coefficients.
pub fn random_poly(nvars: usize, degree: u32, seed: u64) -> Poly {
    random_poly_with(nvars, degree, seed, Scaling::Damped)
}

pub fn random_poly_with(nvars: usize, degree: u32, seed: u64, scaling: Scaling) -> Poly {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let terms = exponents_up_to(nvars, degree).into_iter().map(|e| {
        let z: f64 = StandardNormal.sample(&mut rng);
        let s = match scaling {
            Scaling::Damped => 1.0 / (1.0 + e.iter().sum::<u32>() as f64),
            Scaling::Flat => 1.0,
        };
        (e, z * s)
    });
    Poly::new(nvars, terms).expect("well-formed exponents")
}

fn binomial(n: u64, k: u64) -> BigUint {
    debug_assert!(k <= n);
    let k = k.min(n - k);
    let mut acc = BigUint::from(1u32);
    for i in 0..k {
        acc *= BigUint::from(n - i);
        acc /= BigUint::from(i + 1);
    }
    acc
}

/// Smallest `d` with `C(n+d, d) >= k * Σ_{ℓ=0}^{r} C(n, ℓ)`: the degree at
/// which the `k`-fold order-`r` jet map of degree-`d` polynomials on `ℝⁿ`
/// becomes a submersion.
pub fn degree_bound(n: u64, k: u64, r: u64) -> Result<u64> {
    if n == 0 || k == 0 {
        return Err(Error::Precondition(
            "degree_bound needs n >= 1 and k >= 1".into(),
        ));
    }
    let jets: BigUint = (0..=r.min(n)).map(|l| binomial(n, l)).sum();
    let target = jets * BigUint::from(k);
    let mut d = 0u64;
    loop {
        if binomial(n + d, d) >= target {
            return Ok(d);
        }
        d += 1;
    }
}

#[derive(Serialize, Deserialize)]
struct PolyFile {
    nvars: usize,
    terms: Vec<TermFile>,
}

#[derive(Serialize, Deserialize)]
struct TermFile {
    exp: Vec<u32>,
    coef: f64,
}

impl TryFrom<PolyFile> for Poly {
    type Error = Error;

    fn try_from(f: PolyFile) -> Result<Self> {
        Poly::new(f.nvars, f.terms.into_iter().map(|t| (t.exp, t.coef)))
    }
}

impl From<Poly> for PolyFile {
    fn from(p: Poly) -> Self {
        PolyFile {
            nvars: p.nvars,
            terms: p
                .terms
                .into_iter()
                .map(|(exp, coef)| TermFile { exp, coef })
                .collect(),
        }
    }
}

impl Poly {
    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Invalid(format!("polynomial JSON: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("polynomial serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn circle() -> Poly {
        Poly::new(
            2,
            [(vec![2, 0], 1.0), (vec![0, 2], 1.0), (vec![0, 0], -1.0)],
        )
        .unwrap()
    }

    #[test]
    fn eval_on_variety() {
        assert_eq!(circle().eval(&[1.0, 0.0]).unwrap(), 0.0);
        assert_eq!(Poly::zero(3).eval(&[1.0, 2.0, 3.0]).unwrap(), 0.0);
    }

    #[test]
    fn dimension_mismatch() {
        assert!(matches!(
            circle().eval(&[1.0]),
            Err(Error::DimensionMismatch {
                expected: 2,
                got: 1
            })
        ));
        assert!(circle().grad(&[1.0, 2.0, 3.0]).is_err());
        assert!(Poly::new(2, [(vec![1], 1.0)]).is_err());
    }

    #[test]
    fn circle_derivatives() {
        let p = circle();
        assert_eq!(p.grad(&[1.0, 0.0]).unwrap(), vec![2.0, 0.0]);
        let h = p.hessian(&[1.0, 0.0]).unwrap();
        assert_eq!(h[(0, 0)], 2.0);
        assert_eq!(h[(1, 1)], 2.0);
        assert_eq!(h[(0, 1)], 0.0);
    }

    #[test]
    fn linear_has_zero_hessian() {
        let p = Poly::new(
            3,
            [
                (vec![1, 0, 0], 2.0),
                (vec![0, 0, 1], -1.0),
                (vec![0, 0, 0], 4.0),
            ],
        )
        .unwrap();
        let h = p.hessian(&[0.3, -1.0, 7.0]).unwrap();
        assert!(h.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn zero_coefficients_normalized() {
        let p = Poly::new(
            2,
            [(vec![1, 0], 1.0), (vec![1, 0], -1.0), (vec![0, 1], 0.0)],
        )
        .unwrap();
        assert!(p.is_zero());
        assert_eq!(p.degree(), 0);
        assert_eq!(p, Poly::zero(2));
    }

    #[test]
    fn random_poly_deterministic() {
        assert_eq!(random_poly(2, 2, 42), random_poly(2, 2, 42));
        assert_ne!(random_poly(2, 2, 42), random_poly(2, 2, 43));
        let c = random_poly(1, 0, 5);
        assert_eq!(c.degree(), 0);
        assert!(c.num_terms() <= 1);
    }

    #[test]
    fn random_poly_has_top_degree_terms() {
        for seed in 0..100 {
            let p = random_poly(3, 4, seed);
            assert_eq!(p.degree(), 4);
            assert!(p.terms().any(|(e, _)| e.iter().sum::<u32>() == 4));
        }
    }

    #[test]
    fn flat_scaling_differs_from_damped() {
        let a = random_poly_with(2, 3, 1, Scaling::Flat);
        let b = random_poly_with(2, 3, 1, Scaling::Damped);
        let e = vec![1, 2];
        assert!((a.coefficient(&e) / b.coefficient(&e) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn exponent_count() {
        // C(n+d, d) monomials of degree <= d.
        assert_eq!(exponents_up_to(3, 4).len(), 35);
        assert_eq!(exponents_up_to(1, 0), vec![vec![0]]);
    }

    #[test]
    fn degree_bound_examples() {
        assert_eq!(degree_bound(2, 3, 1).unwrap(), 3);
        assert_eq!(degree_bound(5, 6, 2).unwrap(), 4);
        assert!(degree_bound(0, 1, 1).is_err());
    }

    #[test]
    fn degree_bound_monotone_in_k_and_r() {
        for n in 1..8 {
            for r in 0..4 {
                for k in 1..12 {
                    assert!(degree_bound(n, k, r).unwrap() <= degree_bound(n, k + 1, r).unwrap());
                    assert!(degree_bound(n, k, r).unwrap() <= degree_bound(n, k, r + 1).unwrap());
                }
            }
        }
    }

    #[test]
    fn partial_matches_grad() {
        let p = random_poly(3, 4, 9);
        let x = [0.3, -0.7, 1.1];
        let g = p.grad(&x).unwrap();
        for (i, gi) in g.iter().enumerate() {
            assert!((p.partial(i).eval(&x).unwrap() - gi).abs() < 1e-12);
        }
    }

    #[test]
    fn compose_affine_evaluates_consistently() {
        let p = random_poly(2, 3, 3);
        let a = Matrix::from_rows(&[vec![0.6, -0.8], vec![0.8, 0.6]]);
        let b = [0.5, -1.5];
        let q = p.compose_affine(&a, &b).unwrap();
        let z = [0.2, 0.9];
        let az = a.mul_vec(&z);
        let w = [az[0] + b[0], az[1] + b[1]];
        assert!((q.eval(&z).unwrap() - p.eval(&w).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn json_format() {
        let p = Poly::from_json(
            r#"{"nvars": 2, "terms": [{"exp": [2, 0], "coef": 1.0}, {"exp": [0, 0], "coef": -1}]}"#,
        )
        .unwrap();
        assert_eq!(p.eval(&[2.0, 5.0]).unwrap(), 3.0);
        assert!(Poly::from_json(r#"{"nvars": 2, "terms": [{"exp": [2], "coef": 1.0}]}"#).is_err());
        assert!(Poly::from_json(r#"{"terms": []}"#).is_err());
    }
}
