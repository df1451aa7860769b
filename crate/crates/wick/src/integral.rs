//! Formal Gaussian integrals of monomials and of truncated mixed series.
//!
//! A mixed series lives in `R[[ubar, u, out]]`: a finite map from pairs of
//! field exponents to coefficient series in the output variables. The
//! integral is termwise Wick pairing; only terms with equal ubar/u degree
//! survive. The exponential of an interaction is the one place where an
//! infinite family could arise, so it carries the summability guard.

use std::collections::BTreeMap;

use mps_core::rat::Rat;
use mps_core::{MultiIndex, Series};
use num::Zero;

use crate::error::WickError;
use crate::pairing::{pairing_sum, CovarianceSpec, IndexMap};

/// Formal Gaussian integral of the monomial `ubar^alpha1 u^alpha2` with
/// covariance `A^{-1}`: `(det A)^{-1} I_A(t1, t2)` for any index maps
/// realizing the multiindices (relabelling invariance makes the choice
/// irrelevant; the weakly increasing representative is used).
pub fn gaussian_integral_monomial(
    cov: &CovarianceSpec,
    alpha1: &MultiIndex,
    alpha2: &MultiIndex,
) -> Rat {
    assert_eq!(alpha1.n_vars(), cov.n());
    assert_eq!(alpha2.n_vars(), cov.n());
    if alpha1.degree() != alpha2.degree() {
        return Rat::zero();
    }
    // the pairing matrix repeats each covariance entry with the
    // multiplicities of the exponents; the margin-sum permanent kernel
    // exploits that instead of expanding to the full k x k matrix
    let n = cov.n();
    let entries: Vec<Vec<Rat>> = (0..n)
        .map(|i| (0..n).map(|j| cov.inverse()[j][i].clone()).collect())
        .collect();
    crate::permanent::permanent_with_multiplicities(
        &entries,
        alpha1.exponents(),
        alpha2.exponents(),
    ) / cov.det().clone()
}

/// Three-block Gaussian integral of `sbar^a1 s^a2 tbar^a3 t^a4 ubar^a5 u^a6`
/// with covariances `A^{-1}, B^{-1}, C^{-1}`: the blocks pair
/// independently and the normalization is `1/(det A det B det C)`.
pub fn gaussian_integral_triple(
    cov_a: &CovarianceSpec,
    cov_b: &CovarianceSpec,
    cov_c: &CovarianceSpec,
    alphas: &[MultiIndex; 6],
) -> Rat {
    let block = |cov: &CovarianceSpec, a1: &MultiIndex, a2: &MultiIndex| -> Rat {
        if a1.degree() != a2.degree() {
            return Rat::zero();
        }
        pairing_sum(
            cov.inverse(),
            &IndexMap::representative(a1),
            &IndexMap::representative(a2),
        )
    };
    let s = block(cov_a, &alphas[0], &alphas[1]);
    if s.is_zero() {
        return s;
    }
    let t = block(cov_b, &alphas[2], &alphas[3]);
    if t.is_zero() {
        return t;
    }
    let u = block(cov_c, &alphas[4], &alphas[5]);
    s * t * u / (cov_a.det() * cov_b.det() * cov_c.det())
}

/// A finite truncated expansion in `ubar, u` monomials with series-valued
/// coefficients in the output variables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MixedSeries {
    n_fields: usize,
    out_vars: usize,
    out_trunc: u32,
    terms: BTreeMap<(MultiIndex, MultiIndex), Series>,
}

impl MixedSeries {
    pub fn zero(n_fields: usize, out_vars: usize, out_trunc: u32) -> Self {
        MixedSeries {
            n_fields,
            out_vars,
            out_trunc,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(n_fields: usize, out_vars: usize, out_trunc: u32) -> Self {
        let mut m = Self::zero(n_fields, out_vars, out_trunc);
        m.add_term(
            MultiIndex::zero(n_fields),
            MultiIndex::zero(n_fields),
            Series::one(out_vars, out_trunc),
        );
        m
    }

    pub fn n_fields(&self) -> usize {
        self.n_fields
    }

    pub fn out_vars(&self) -> usize {
        self.out_vars
    }

    pub fn out_trunc(&self) -> u32 {
        self.out_trunc
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(MultiIndex, MultiIndex), &Series)> {
        self.terms.iter()
    }

    pub fn add_term(&mut self, ubar: MultiIndex, u: MultiIndex, coeff: Series) {
        assert_eq!(ubar.n_vars(), self.n_fields);
        assert_eq!(u.n_vars(), self.n_fields);
        assert_eq!(coeff.n_vars(), self.out_vars);
        assert_eq!(coeff.trunc_degree(), self.out_trunc);
        if coeff.is_zero() {
            return;
        }
        let key = (ubar, u);
        match self.terms.remove(&key) {
            None => {
                self.terms.insert(key, coeff);
            }
            Some(prev) => {
                let sum = prev.add(&coeff);
                if !sum.is_zero() {
                    self.terms.insert(key, sum);
                }
            }
        }
    }

    pub fn add(&self, rhs: &MixedSeries) -> MixedSeries {
        assert_eq!(self.n_fields, rhs.n_fields);
        let mut out = self.clone();
        for ((ub, u), c) in &rhs.terms {
            out.add_term(ub.clone(), u.clone(), c.clone());
        }
        out
    }

    pub fn scale(&self, c: &Rat) -> MixedSeries {
        let mut out = MixedSeries::zero(self.n_fields, self.out_vars, self.out_trunc);
        for ((ub, u), s) in &self.terms {
            out.add_term(ub.clone(), u.clone(), s.scale(c));
        }
        out
    }

    /// Product with field degrees capped; pairs exceeding either cap are
    /// dropped (callers must certify the caps via the summability bound).
    pub fn mul_capped(&self, rhs: &MixedSeries, ubar_cap: u32, u_cap: u32) -> MixedSeries {
        assert_eq!(self.n_fields, rhs.n_fields);
        let mut out = MixedSeries::zero(self.n_fields, self.out_vars, self.out_trunc);
        for ((ub_a, u_a), ca) in &self.terms {
            for ((ub_b, u_b), cb) in &rhs.terms {
                if ub_a.degree() + ub_b.degree() > ubar_cap || u_a.degree() + u_b.degree() > u_cap
                {
                    continue;
                }
                out.add_term(ub_a.add(ub_b), u_a.add(u_b), ca.mul(cb));
            }
        }
        out
    }

    /// Multiply by a bare field monomial.
    pub fn mul_field_monomial(&self, ubar: &MultiIndex, u: &MultiIndex) -> MixedSeries {
        let mut out = MixedSeries::zero(self.n_fields, self.out_vars, self.out_trunc);
        for ((ub, uu), c) in &self.terms {
            out.add_term(ub.add(ubar), uu.add(u), c.clone());
        }
        out
    }

    /// `exp(self)` truncated to the field caps. Summability guard: every
    /// term must carry exactly one `ubar` leg and must either have at
    /// least two `u` legs or a constant-free coefficient (the nonlinear
    /// vertex / grading-raising shapes). Anything else admits infinitely
    /// many contributions below a fixed output degree and is rejected.
    pub fn exp_interaction(&self, ubar_cap: u32, u_cap: u32) -> Result<MixedSeries, WickError> {
        self.exp_interaction_inner(ubar_cap, u_cap, None)
    }

    /// As `exp_interaction`, but drops partial products that can no
    /// longer pair off within the output window: a term with field
    /// balance `u - ubar` above `target` needs one source use (output
    /// weight >= 1 each) per excess unit, so anything with
    /// `balance - target > out_trunc - min output degree` is dead.
    pub fn exp_interaction_balanced(
        &self,
        ubar_cap: u32,
        u_cap: u32,
        target_balance: i64,
    ) -> Result<MixedSeries, WickError> {
        self.exp_interaction_inner(ubar_cap, u_cap, Some(target_balance))
    }

    fn exp_interaction_inner(
        &self,
        ubar_cap: u32,
        u_cap: u32,
        target_balance: Option<i64>,
    ) -> Result<MixedSeries, WickError> {
        for ((ub, u), c) in &self.terms {
            if ub.degree() != 1 {
                return Err(WickError::SummabilityViolation(format!(
                    "interaction term with ubar-degree {} (need exactly 1)",
                    ub.degree()
                )));
            }
            if u.degree() < 2 && !c.is_constant_free() {
                return Err(WickError::SummabilityViolation(
                    "interaction term with fewer than two u legs and a constant coefficient"
                        .to_string(),
                ));
            }
        }
        let prune = |m: &MixedSeries| -> MixedSeries {
            let Some(target) = target_balance else {
                return m.clone();
            };
            let mut kept = MixedSeries::zero(m.n_fields, m.out_vars, m.out_trunc);
            for ((ub, u), c) in &m.terms {
                let balance = u.degree() as i64 - ub.degree() as i64;
                let min_out = c.min_degree().unwrap_or(m.out_trunc) as i64;
                if balance - target <= m.out_trunc as i64 - min_out {
                    kept.add_term(ub.clone(), u.clone(), c.clone());
                }
            }
            kept
        };
        let mut out = MixedSeries::one(self.n_fields, self.out_vars, self.out_trunc);
        let mut power = MixedSeries::one(self.n_fields, self.out_vars, self.out_trunc);
        let mut k: u64 = 0;
        // every term raises ubar-degree, so the loop ends by the cap
        loop {
            k += 1;
            if k > ubar_cap as u64 {
                break;
            }
            power = prune(&power.mul_capped(self, ubar_cap, u_cap));
            if power.terms.is_empty() {
                break;
            }
            let inv_k = Rat::from_integer(1.into()) / Rat::from_integer(k.into());
            power = power.scale(&inv_k);
            out = out.add(&power);
        }
        Ok(out)
    }
}

/// Termwise formal Gaussian integral of a finite mixed series: an element
/// of the output series ring. Includes the `1/det A` normalization of
/// every monomial integral.
pub fn gaussian_integral_series(cov: &CovarianceSpec, u: &MixedSeries) -> Series {
    assert_eq!(cov.n(), u.n_fields());
    let mut out = Series::zero(u.out_vars(), u.out_trunc());
    for ((ub, uu), c) in u.terms() {
        if ub.degree() != uu.degree() {
            continue;
        }
        let w = gaussian_integral_monomial(cov, ub, uu);
        if !w.is_zero() {
            out = out.add(&c.scale(&w));
        }
    }
    out
}

/// Integral of `ubar^b0 u^u0 exp(interaction)` against the Gaussian with
/// covariance `A^{-1}`: expands the exponential under certified caps
/// (`ubar` total at most `2(D + |b0|)` in any contributing configuration)
/// and integrates termwise.
pub fn integrate_exp_interaction(
    cov: &CovarianceSpec,
    interaction: &MixedSeries,
    prefactor_ubar: &MultiIndex,
    prefactor_u: &MultiIndex,
) -> Result<Series, WickError> {
    let b0 = prefactor_ubar.degree();
    let cap = 2 * (interaction.out_trunc() + b0);
    // a completed expansion term pairs off only when its u/ubar balance
    // equals the prefactor's deficit
    let target = b0 as i64 - prefactor_u.degree() as i64;
    let expd = interaction.exp_interaction_balanced(cap, cap, target)?;
    let full = expd.mul_field_monomial(prefactor_ubar, prefactor_u);
    Ok(gaussian_integral_series(cov, &full))
}
