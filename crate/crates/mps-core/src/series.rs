//! Sparse truncated power series.
//!
//! Invariants:
//! - every stored key has length `n_vars` and degree `<= trunc_degree`
//! - no key maps to zero (normal form, enforced on insertion)
//! - binary operations require equal `n_vars` and `trunc_degree`; there is
//!   no implicit re-truncation, mixing precisions is an assert failure

use std::collections::BTreeMap;

use num::{One, Zero};

use crate::error::CoreError;
use crate::index::MultiIndex;
use crate::rat::{factorial_rat, rat_int, Rat};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Series {
    n_vars: usize,
    trunc_degree: u32,
    coeffs: BTreeMap<MultiIndex, Rat>,
}

impl Series {
    pub fn zero(n_vars: usize, trunc_degree: u32) -> Self {
        Series {
            n_vars,
            trunc_degree,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn one(n_vars: usize, trunc_degree: u32) -> Self {
        Self::constant(n_vars, trunc_degree, Rat::one())
    }

    pub fn constant(n_vars: usize, trunc_degree: u32, c: Rat) -> Self {
        let mut s = Self::zero(n_vars, trunc_degree);
        s.set_coeff(MultiIndex::zero(n_vars), c);
        s
    }

    /// The variable `X_j` as a series.
    pub fn var(n_vars: usize, trunc_degree: u32, j: usize) -> Self {
        assert!(j < n_vars && trunc_degree >= 1);
        Self::monomial(n_vars, trunc_degree, MultiIndex::unit(n_vars, j), Rat::one())
    }

    pub fn monomial(n_vars: usize, trunc_degree: u32, alpha: MultiIndex, c: Rat) -> Self {
        assert_eq!(alpha.n_vars(), n_vars);
        assert!(alpha.degree() <= trunc_degree);
        let mut s = Self::zero(n_vars, trunc_degree);
        s.set_coeff(alpha, c);
        s
    }

    pub fn from_terms<I>(n_vars: usize, trunc_degree: u32, terms: I) -> Self
    where
        I: IntoIterator<Item = (MultiIndex, Rat)>,
    {
        let mut s = Self::zero(n_vars, trunc_degree);
        for (alpha, c) in terms {
            let prev = s.coeff(&alpha);
            s.set_coeff(alpha, prev + c);
        }
        s
    }

    /// Build from the divided coefficients `u_a` of the tensorial view,
    /// i.e. set `c_a = u_a / a!`.
    pub fn from_divided_coeffs<I>(n_vars: usize, trunc_degree: u32, terms: I) -> Self
    where
        I: IntoIterator<Item = (MultiIndex, Rat)>,
    {
        Self::from_terms(
            n_vars,
            trunc_degree,
            terms
                .into_iter()
                .map(|(a, u)| {
                    let f = a.factorial_rat();
                    (a, u / f)
                })
                .collect::<Vec<_>>(),
        )
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn trunc_degree(&self) -> u32 {
        self.trunc_degree
    }

    /// Coefficient `c_a`; zero for absent keys. Asking above the truncation
    /// degree is a bug, the coefficient there is unknown.
    pub fn coeff(&self, alpha: &MultiIndex) -> Rat {
        assert_eq!(alpha.n_vars(), self.n_vars);
        assert!(
            alpha.degree() <= self.trunc_degree,
            "coefficient at degree {} unknown, series truncated at {}",
            alpha.degree(),
            self.trunc_degree
        );
        self.coeffs.get(alpha).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn set_coeff(&mut self, alpha: MultiIndex, c: Rat) {
        assert_eq!(alpha.n_vars(), self.n_vars);
        assert!(alpha.degree() <= self.trunc_degree);
        if c.is_zero() {
            self.coeffs.remove(&alpha);
        } else {
            self.coeffs.insert(alpha, c);
        }
    }

    pub fn constant_term(&self) -> Rat {
        self.coeff(&MultiIndex::zero(self.n_vars))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Lowest total degree with a nonzero coefficient; `None` when zero.
    /// Graded key order makes this the first map entry.
    pub fn min_degree(&self) -> Option<u32> {
        self.coeffs.keys().next().map(|a| a.degree())
    }

    pub fn is_constant_free(&self) -> bool {
        self.constant_term().is_zero()
    }

    /// Nonzero terms in graded-lexicographic order.
    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &Rat)> {
        self.coeffs.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.coeffs.len()
    }

    fn assert_same_shape(&self, rhs: &Series) {
        assert_eq!(self.n_vars, rhs.n_vars, "variable count mismatch");
        assert_eq!(
            self.trunc_degree, rhs.trunc_degree,
            "truncation degree mismatch"
        );
    }

    pub fn add(&self, rhs: &Series) -> Series {
        self.assert_same_shape(rhs);
        let mut out = self.clone();
        for (a, c) in &rhs.coeffs {
            let prev = out.coeff(a);
            out.set_coeff(a.clone(), prev + c);
        }
        out
    }

    pub fn sub(&self, rhs: &Series) -> Series {
        self.add(&rhs.neg())
    }

    pub fn neg(&self) -> Series {
        let mut out = Series::zero(self.n_vars, self.trunc_degree);
        for (a, c) in &self.coeffs {
            out.coeffs.insert(a.clone(), -c.clone());
        }
        out
    }

    pub fn scale(&self, c: &Rat) -> Series {
        let mut out = Series::zero(self.n_vars, self.trunc_degree);
        if c.is_zero() {
            return out;
        }
        for (a, v) in &self.coeffs {
            out.coeffs.insert(a.clone(), c * v);
        }
        out
    }

    /// Product truncated to the common degree window.
    pub fn mul(&self, rhs: &Series) -> Series {
        self.assert_same_shape(rhs);
        let mut acc: BTreeMap<MultiIndex, Rat> = BTreeMap::new();
        for (a, ca) in &self.coeffs {
            let da = a.degree();
            for (b, cb) in &rhs.coeffs {
                if da + b.degree() > self.trunc_degree {
                    continue;
                }
                let key = a.add(b);
                let entry = acc.entry(key).or_insert_with(Rat::zero);
                *entry += ca * cb;
            }
        }
        acc.retain(|_, v| !v.is_zero());
        Series {
            n_vars: self.n_vars,
            trunc_degree: self.trunc_degree,
            coeffs: acc,
        }
    }

    pub fn pow(&self, k: u32) -> Series {
        let mut out = Series::one(self.n_vars, self.trunc_degree);
        for _ in 0..k {
            out = out.mul(self);
        }
        out
    }

    /// Forget coefficients above `d` (always sound; `d <= trunc_degree`).
    pub fn truncated_to(&self, d: u32) -> Series {
        assert!(d <= self.trunc_degree);
        let mut out = Series::zero(self.n_vars, d);
        for (a, c) in &self.coeffs {
            if a.degree() <= d {
                out.coeffs.insert(a.clone(), c.clone());
            }
        }
        out
    }

    /// The homogeneous part of exact degree `d`, kept at the same window.
    pub fn homogeneous_part(&self, d: u32) -> Series {
        assert!(d <= self.trunc_degree);
        let mut out = Series::zero(self.n_vars, self.trunc_degree);
        for (a, c) in &self.coeffs {
            if a.degree() == d {
                out.coeffs.insert(a.clone(), c.clone());
            }
        }
        out
    }

    /// Formal partial derivative in variable `j`. Degree-`D` input yields
    /// exact coefficients only through degree `D - 1`, and the output is
    /// truncated there; callers that need full degree `D` must start from
    /// degree `D + 1` input.
    pub fn derivative(&self, j: usize) -> Series {
        assert!(j < self.n_vars);
        assert!(self.trunc_degree >= 1, "cannot differentiate a degree-0 window");
        let mut out = Series::zero(self.n_vars, self.trunc_degree - 1);
        for (a, c) in &self.coeffs {
            let e = a.exponent(j);
            if e == 0 {
                continue;
            }
            let lowered = a
                .checked_sub(&MultiIndex::unit(self.n_vars, j))
                .expect("exponent is positive");
            out.coeffs.insert(lowered, c * rat_int(e as i64));
        }
        out.coeffs.retain(|_, v| !v.is_zero());
        out
    }

    /// Multiplicative inverse mod degree `trunc_degree + 1`, built degree
    /// by degree from the recurrence `c0 * g_d = -sum_{e>=1} f_e g_{d-e}`.
    pub fn reciprocal(&self) -> Result<Series, CoreError> {
        let c0 = self.constant_term();
        if c0.is_zero() {
            return Err(CoreError::ZeroConstantTerm);
        }
        let inv0 = Rat::one() / c0;
        let mut out = Series::constant(self.n_vars, self.trunc_degree, inv0.clone());
        for d in 1..=self.trunc_degree {
            // degree-d part of (self * out) using only out-parts < d
            let mut layer: BTreeMap<MultiIndex, Rat> = BTreeMap::new();
            for (a, ca) in &self.coeffs {
                let da = a.degree();
                if da == 0 || da > d {
                    continue;
                }
                for (b, cb) in &out.coeffs {
                    if b.degree() + da == d {
                        let e = layer.entry(a.add(b)).or_insert_with(Rat::zero);
                        *e += ca * cb;
                    }
                }
            }
            for (a, v) in layer {
                let corr = -v * &inv0;
                let prev = out.coeff(&a);
                out.set_coeff(a, prev + corr);
            }
        }
        Ok(out)
    }

    /// `exp(self)` truncated; requires zero constant term so the sum over
    /// powers is finite within the window.
    pub fn exp(&self) -> Result<Series, CoreError> {
        if !self.is_constant_free() {
            return Err(CoreError::ConstantTermPresent);
        }
        let mut out = Series::one(self.n_vars, self.trunc_degree);
        let mut power = Series::one(self.n_vars, self.trunc_degree);
        for k in 1..=self.trunc_degree {
            power = power.mul(self);
            if power.is_zero() {
                break;
            }
            out = out.add(&power.scale(&(Rat::one() / factorial_rat(k))));
        }
        Ok(out)
    }

    /// `log(self)` truncated; requires constant term exactly one.
    pub fn log(&self) -> Result<Series, CoreError> {
        if !self.constant_term().is_one() {
            return Err(CoreError::WrongConstantTerm {
                expected: "1".to_string(),
                found: crate::rat::format_rat(&self.constant_term()),
            });
        }
        let z = self.sub(&Series::one(self.n_vars, self.trunc_degree));
        let mut out = Series::zero(self.n_vars, self.trunc_degree);
        let mut power = Series::one(self.n_vars, self.trunc_degree);
        for k in 1..=self.trunc_degree {
            power = power.mul(&z);
            if power.is_zero() {
                break;
            }
            let sign = if k % 2 == 1 { 1 } else { -1 };
            out = out.add(&power.scale(&(rat_int(sign) / rat_int(k as i64))));
        }
        Ok(out)
    }

    /// Substitute `args[j]` for `X_j`. The arguments must be constant-free
    /// and share a window among themselves; the result lives in theirs.
    /// `self` must be known at least that far.
    pub fn substitute(&self, args: &[Series]) -> Result<Series, CoreError> {
        if args.len() != self.n_vars {
            return Err(CoreError::DimensionMismatch {
                expected: self.n_vars,
                found: args.len(),
            });
        }
        if self.n_vars == 0 {
            // constant series: nothing to substitute
            return Ok(self.clone());
        }
        let out_vars = args[0].n_vars();
        let out_trunc = args[0].trunc_degree();
        for g in args {
            assert_eq!(g.n_vars(), out_vars);
            assert_eq!(g.trunc_degree(), out_trunc);
            if !g.is_constant_free() {
                return Err(CoreError::ConstantTermPresent);
            }
        }
        if self.trunc_degree < out_trunc {
            return Err(CoreError::TruncationInsufficient {
                need: out_trunc,
                have: self.trunc_degree,
            });
        }
        // powers[j][k] = args[j]^k; constant-free args make degree-> k grow,
        // so exponents above out_trunc never contribute
        let mut powers: Vec<Vec<Series>> = Vec::with_capacity(self.n_vars);
        for g in args {
            let mut ps = vec![Series::one(out_vars, out_trunc)];
            for k in 1..=out_trunc {
                let next = ps[(k - 1) as usize].mul(g);
                ps.push(next);
            }
            powers.push(ps);
        }
        let mut out = Series::zero(out_vars, out_trunc);
        for (a, c) in &self.coeffs {
            if a.degree() > out_trunc {
                continue;
            }
            let mut term = Series::constant(out_vars, out_trunc, c.clone());
            for j in 0..self.n_vars {
                let e = a.exponent(j);
                if e > 0 {
                    term = term.mul(&powers[j][e as usize]);
                }
            }
            out = out.add(&term);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::rat;

    fn x(n: usize, d: u32, j: usize) -> Series {
        Series::var(n, d, j)
    }

    #[test]
    fn truncation_kills_products() {
        // (X1)*(X1) at window 1 is zero
        let s = x(2, 1, 0);
        assert!(s.mul(&s).is_zero());
    }

    #[test]
    fn add_constants() {
        let s = Series::one(1, 3).add(&x(1, 3, 0));
        let t = s.add(&Series::constant(1, 3, rat_int(-1)));
        assert_eq!(t, x(1, 3, 0));
    }

    #[test]
    fn difference_of_squares() {
        let one = Series::one(1, 2);
        let a = one.add(&x(1, 2, 0));
        let b = one.sub(&x(1, 2, 0));
        let mut expect = Series::one(1, 2);
        expect.set_coeff(MultiIndex::new(vec![2]), rat_int(-1));
        assert_eq!(a.mul(&b), expect);
    }

    #[test]
    fn derivative_examples() {
        // d/dX1 (X1^2 X2) = 2 X1 X2
        let m = Series::monomial(2, 3, MultiIndex::new(vec![2, 1]), rat_int(1));
        let d = m.derivative(0);
        assert_eq!(d.trunc_degree(), 2);
        assert_eq!(d.coeff(&MultiIndex::new(vec![1, 1])), rat_int(2));
        assert_eq!(d.num_terms(), 1);
        // d/dX2 (X1) = 0
        assert!(x(2, 2, 0).derivative(1).is_zero());
    }

    #[test]
    fn derivative_matches_per_monomial_rule() {
        // independent oracle: apply the exponent rule monomial by monomial
        let f = crate::sample::Sampler::new(7).series(2, 4, 6, false);
        for j in 0..2 {
            let d = f.derivative(j);
            let mut expect = Series::zero(2, 3);
            for (a, c) in f.terms() {
                let e = a.exponent(j);
                if e > 0 {
                    let low = a.checked_sub(&MultiIndex::unit(2, j)).unwrap();
                    let prev = expect.coeff(&low);
                    expect.set_coeff(low, prev + c * rat_int(e as i64));
                }
            }
            assert_eq!(d, expect);
        }
    }

    #[test]
    fn geometric_reciprocal() {
        // 1/(1 - X) = 1 + X + X^2 + X^3
        let f = Series::one(1, 3).sub(&x(1, 3, 0));
        let g = f.reciprocal().unwrap();
        for k in 0..=3u32 {
            assert_eq!(g.coeff(&MultiIndex::new(vec![k])), rat_int(1));
        }
        assert_eq!(f.mul(&g), Series::one(1, 3));
        assert_eq!(Series::one(2, 4).reciprocal().unwrap(), Series::one(2, 4));
    }

    #[test]
    fn reciprocal_needs_unit() {
        assert_eq!(
            x(1, 2, 0).reciprocal().unwrap_err(),
            CoreError::ZeroConstantTerm
        );
    }

    #[test]
    fn reciprocal_of_random_unit_multiplies_back() {
        let mut rng = crate::sample::Sampler::new(42);
        for _ in 0..10 {
            let mut f = rng.series(2, 4, 5, false);
            f.set_coeff(MultiIndex::zero(2), rat(3, 2));
            let g = f.reciprocal().unwrap();
            assert_eq!(f.mul(&g), Series::one(2, 4));
        }
    }

    #[test]
    fn exp_log_round_trip() {
        let mut rng = crate::sample::Sampler::new(9);
        let w = rng.series(2, 4, 5, true);
        let z = w.exp().unwrap();
        assert!(z.constant_term().is_one());
        assert_eq!(z.log().unwrap(), w);
    }

    #[test]
    fn substitute_is_composition() {
        // f = X + X^2, g = 2X, window 2: f(g) = 2X + 4X^2
        let f = x(1, 2, 0).add(&Series::monomial(1, 2, MultiIndex::new(vec![2]), rat_int(1)));
        let g = x(1, 2, 0).scale(&rat_int(2));
        let h = f.substitute(std::slice::from_ref(&g)).unwrap();
        assert_eq!(h.coeff(&MultiIndex::new(vec![1])), rat_int(2));
        assert_eq!(h.coeff(&MultiIndex::new(vec![2])), rat_int(4));
    }

    #[test]
    fn substitute_rejects_constant_terms() {
        let f = x(1, 2, 0);
        let g = Series::one(1, 2);
        assert_eq!(
            f.substitute(std::slice::from_ref(&g)).unwrap_err(),
            CoreError::ConstantTermPresent
        );
    }
}
