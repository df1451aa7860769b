//! Lagrange-Good inversion: the implicit system `F_i = X_i G_i(F)`, the
//! three-route partition function `Z = 1/det(I - X dG(F))`, the
//! coefficient identity, and the matrix-X generalization over n^2
//! indeterminates.

use diagrams::lg::{
    amplitude_lg_circuit, amplitude_lg_tree, aut_order_lg_circuit, aut_order_lg_tree,
    enumerate_lg_circuits, enumerate_lg_trees,
};
use mps_core::rat::Rat;
use mps_core::{MultiIndex, Series, SeriesMatrix, SeriesSystem};
use num::Zero;

use crate::error::InversionError;

fn require_window(g: &SeriesSystem, need: u32) -> Result<(), InversionError> {
    if g.trunc_degree() < need {
        return Err(InversionError::TruncationInsufficient {
            need,
            have: g.trunc_degree(),
        });
    }
    Ok(())
}

fn require_square(g: &SeriesSystem) -> Result<(), InversionError> {
    if g.n_components() != g.n_vars() {
        return Err(mps_core::CoreError::DimensionMismatch {
            expected: g.n_vars(),
            found: g.n_components(),
        }
        .into());
    }
    Ok(())
}

/// The unique constant-free solution of `F_i = X_i G_i(F)` through degree
/// `d`, built one homogeneous layer at a time (each application of `X`
/// raises the grading by one unit, so layer d only needs layers < d).
pub fn lg_solve(g: &SeriesSystem, d: u32) -> Result<SeriesSystem, InversionError> {
    require_square(g)?;
    require_window(g, d)?;
    let n = g.n_vars();
    let g = g.truncated_to(d);
    let mut f = SeriesSystem::zero(n, n, d);
    for deg in 1..=d {
        let mut next = Vec::with_capacity(n);
        for i in 0..n {
            let gi_of_f = g.component(i).substitute(f.components())?;
            let layer = gi_of_f
                .mul(&Series::var(n, d, i))
                .homogeneous_part(deg);
            next.push(f.component(i).add(&layer));
        }
        f = SeriesSystem::new(next);
    }
    Ok(f)
}

/// Oracle: iterate `F <- X * G(F)` from zero exactly `d` times.
pub fn lg_solve_oracle(g: &SeriesSystem, d: u32) -> Result<SeriesSystem, InversionError> {
    require_square(g)?;
    require_window(g, d)?;
    let n = g.n_vars();
    let g = g.truncated_to(d);
    let mut f = SeriesSystem::zero(n, n, d);
    for _ in 0..d {
        let mut next = Vec::with_capacity(n);
        for i in 0..n {
            let gi_of_f = g.component(i).substitute(f.components())?;
            next.push(gi_of_f.mul(&Series::var(n, d, i)));
        }
        f = SeriesSystem::new(next);
    }
    Ok(f)
}

/// The diagrammatic route: sum over XG-tree classes of amplitude / aut.
pub fn lg_solve_by_trees(g: &SeriesSystem, d: u32) -> Result<SeriesSystem, InversionError> {
    require_square(g)?;
    require_window(g, d)?;
    let n = g.n_vars();
    let g = g.truncated_to(d);
    let trees = enumerate_lg_trees(d);
    let mut components = vec![Series::zero(n, d); n];
    for t in &trees {
        let weight =
            Rat::from_integer(1.into()) / Rat::from_integer(aut_order_lg_tree(t).into());
        for (i, comp) in components.iter_mut().enumerate() {
            let amp = amplitude_lg_tree(t, &g, i)?;
            if !amp.is_zero() {
                *comp = comp.add(&amp.scale(&weight));
            }
        }
    }
    Ok(SeriesSystem::new(components))
}

/// `X dG(F)`: the matrix with entries `X_i (d_j G_i)(F)`, assembled at
/// window `d`. Needs `G` known one degree past `d`.
fn x_dg_of_f(g: &SeriesSystem, f: &SeriesSystem, d: u32) -> Result<SeriesMatrix, InversionError> {
    let n = g.n_vars();
    let mut entries = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let dg = g.component(i).derivative(j).truncated_to(d);
            let dg_f = dg.substitute(f.components())?;
            entries.push(dg_f.mul(&Series::var(n, d, i)));
        }
    }
    Ok(SeriesMatrix::from_entries(n, n, entries))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ZRoutes {
    pub det_route: Series,
    pub trace_route: Series,
    pub diagram_route: Series,
}

impl ZRoutes {
    pub fn agree(&self) -> bool {
        self.det_route == self.trace_route && self.det_route == self.diagram_route
    }
}

/// The partition function three ways: `1/det(I - X dG(F))`, the
/// exponential of the trace expansion `sum_p tr[X dG(F)]^p / p`, and the
/// exponential of the vacuum circuit sum.
pub fn lg_partition_z(g: &SeriesSystem, d: u32) -> Result<ZRoutes, InversionError> {
    require_square(g)?;
    require_window(g, d + 1)?;
    let n = g.n_vars();
    let f = lg_solve(&g.truncated_to(d), d)?;
    let m = x_dg_of_f(g, &f, d)?;

    let det_route = SeriesMatrix::identity(n, n, d).sub(&m).det().reciprocal()?;

    let mut w_trace = Series::zero(n, d);
    let mut power = SeriesMatrix::identity(n, n, d);
    for p in 1..=d {
        power = power.mul(&m);
        let tr = power.trace();
        if tr.is_zero() {
            continue;
        }
        w_trace = w_trace.add(&tr.scale(&(Rat::from_integer(1.into()) / mps_core::rat::rat_int(p as i64))));
    }
    let trace_route = w_trace.exp()?;

    let g_window = g.truncated_to(d);
    let mut w_diag = Series::zero(n, d);
    for c in enumerate_lg_circuits(d) {
        let amp = amplitude_lg_circuit(&c, &g_window)?;
        if !amp.is_zero() {
            let weight = Rat::from_integer(1.into())
                / Rat::from_integer(aut_order_lg_circuit(&c).into());
            w_diag = w_diag.add(&amp.scale(&weight));
        }
    }
    let diagram_route = w_diag.exp()?;

    Ok(ZRoutes {
        det_route,
        trace_route,
        diagram_route,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LgIdentityReport {
    pub lhs: Rat,
    pub rhs: Rat,
    pub holds: bool,
}

/// The coefficient identity at one multiindex: `M! [X^M]` of
/// `Omega(F)/det(I - X dG(F))` against `(d/du)^M [u^omega G(u)^M]` at 0,
/// the right side computed by pure series algebra.
pub fn lg_identity_check(
    g: &SeriesSystem,
    omega: &MultiIndex,
    m_index: &MultiIndex,
) -> Result<LgIdentityReport, InversionError> {
    require_square(g)?;
    let n = g.n_vars();
    assert_eq!(omega.n_vars(), n);
    assert_eq!(m_index.n_vars(), n);
    let d = m_index.degree();
    require_window(g, d + 1)?;

    // left side at window d
    let lhs = if d == 0 && !omega.is_zero() {
        Rat::zero()
    } else {
        let window = d.max(1);
        let f = lg_solve(&g.truncated_to(window), window)?;
        let m = x_dg_of_f(g, &f, window)?;
        let det_inv = SeriesMatrix::identity(n, n, window).sub(&m).det().reciprocal()?;
        let mut omega_f = Series::one(n, window);
        for (j, &e) in omega.exponents().iter().enumerate() {
            for _ in 0..e {
                omega_f = omega_f.mul(f.component(j));
            }
        }
        let product = omega_f.mul(&det_inv);
        if m_index.degree() <= product.trunc_degree() {
            m_index.factorial_rat() * product.coeff(m_index)
        } else {
            Rat::zero()
        }
    };

    // right side: (d/du)^M [u^omega prod_i G_i^{M_i}] at u = 0
    let rhs = if omega.degree() > d {
        Rat::zero()
    } else {
        let mut prod = Series::monomial(n, d, omega.clone(), Rat::from_integer(1.into()));
        for (i, &mi) in m_index.exponents().iter().enumerate() {
            for _ in 0..mi {
                prod = prod.mul(&g.component(i).truncated_to(d));
            }
        }
        m_index.factorial_rat() * prod.coeff(m_index)
    };

    let holds = lhs == rhs;
    Ok(LgIdentityReport { lhs, rhs, holds })
}

/// The matrix-X system: `F_i = sum_j X_{ij} G_j(F)` over the n^2
/// indeterminates `X_{ij}`, flattened as `(i, j) -> i*n + j`. Layered
/// like `lg_solve`; guarded to desk scale.
pub fn lg_matrix_solve(g: &SeriesSystem, d: u32) -> Result<SeriesSystem, InversionError> {
    require_square(g)?;
    let n = g.n_vars();
    if n > 2 || d > 3 {
        return Err(InversionError::ResourceGuard(format!(
            "matrix-X solve limited to n <= 2 and degree <= 3, got n = {n}, degree = {d}"
        )));
    }
    require_window(g, d)?;
    let m_vars = n * n;
    let mut f = SeriesSystem::zero(n, m_vars, d);
    for deg in 1..=d {
        let mut next = Vec::with_capacity(n);
        for i in 0..n {
            let mut acc = Series::zero(m_vars, d);
            for j in 0..n {
                let gj_of_f = g.component(j).truncated_to(d).substitute(f.components())?;
                let xij = Series::var(m_vars, d, i * n + j);
                acc = acc.add(&gj_of_f.mul(&xij));
            }
            next.push(f.component(i).add(&acc.homogeneous_part(deg)));
        }
        f = SeriesSystem::new(next);
    }
    Ok(f)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LgMatrixReport {
    pub checked: usize,
    pub failures: Vec<(MultiIndex, Rat, Rat)>,
}

impl LgMatrixReport {
    pub fn holds(&self) -> bool {
        self.failures.is_empty()
    }
}

/// The generalized identity, checked coefficient by coefficient on every
/// `X_{ij}` monomial of total degree at most `bound`: the left side is
/// `Omega(F)/det(I - X dG(F))` in the n^2-variable ring, the right side
/// for the monomial with multiplicities `e` is
/// `beta! [u^beta](u^omega prod_j G_j^{c_j}) / prod e!`, where `beta`
/// collects row indices and `c_j` column counts.
pub fn lg_matrix_identity_check(
    g: &SeriesSystem,
    omega: &MultiIndex,
    bound: u32,
) -> Result<LgMatrixReport, InversionError> {
    require_square(g)?;
    let n = g.n_vars();
    if n > 2 || bound > 3 {
        return Err(InversionError::ResourceGuard(format!(
            "matrix-X identity limited to n <= 2 and degree <= 3, got n = {n}, degree = {bound}"
        )));
    }
    require_window(g, bound + 1)?;
    let m_vars = n * n;
    let f = lg_matrix_solve(g, bound)?;

    // I - X dG(F) over the n^2-variable ring
    let mut entries = Vec::with_capacity(n * n);
    for i in 0..n {
        for c in 0..n {
            let mut acc = Series::zero(m_vars, bound);
            for j in 0..n {
                let dg = g.component(j).derivative(c).truncated_to(bound);
                let dg_f = dg.substitute(f.components())?;
                acc = acc.add(&dg_f.mul(&Series::var(m_vars, bound, i * n + j)));
            }
            entries.push(acc);
        }
    }
    let xdg = SeriesMatrix::from_entries(n, n, entries);
    let det_inv = SeriesMatrix::identity(n, m_vars, bound)
        .sub(&xdg)
        .det()
        .reciprocal()?;
    let mut omega_f = Series::one(m_vars, bound);
    for (j, &e) in omega.exponents().iter().enumerate() {
        for _ in 0..e {
            omega_f = omega_f.mul(f.component(j));
        }
    }
    let lhs_series = omega_f.mul(&det_inv);

    let mut checked = 0;
    let mut failures = Vec::new();
    for monomial in MultiIndex::all_up_to_degree(m_vars, bound) {
        let lhs = lhs_series.coeff(&monomial);
        // decode multiplicities e_{(i,j)}: beta_i = sum_j e, c_j = sum_i e
        let mut beta = vec![0u32; n];
        let mut cols = vec![0u32; n];
        let mut mult_fact = Rat::from_integer(1.into());
        for i in 0..n {
            for j in 0..n {
                let e = monomial.exponent(i * n + j);
                beta[i] += e;
                cols[j] += e;
                mult_fact *= mps_core::rat::factorial_rat(e);
            }
        }
        let beta = MultiIndex::new(beta);
        let rhs = if omega.degree() > beta.degree() {
            Rat::zero()
        } else {
            let window = beta.degree();
            let mut prod = Series::monomial(
                n,
                window,
                omega.clone(),
                Rat::from_integer(1.into()),
            );
            for (j, &cj) in cols.iter().enumerate() {
                for _ in 0..cj {
                    prod = prod.mul(&g.component(j).truncated_to(window));
                }
            }
            beta.factorial_rat() * prod.coeff(&beta) / mult_fact
        };
        checked += 1;
        if lhs != rhs {
            failures.push((monomial, lhs, rhs));
        }
    }
    Ok(LgMatrixReport { checked, failures })
}
