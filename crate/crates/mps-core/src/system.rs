//! Systems of series, series matrices, composition and determinants.

use num::{One, Zero};

use crate::error::CoreError;
use crate::rat::Rat;
use crate::series::Series;

/// A list of series over a common variable set and truncation window.
/// Square systems (`n_components == n_vars`) support composition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeriesSystem {
    components: Vec<Series>,
}

impl SeriesSystem {
    pub fn new(components: Vec<Series>) -> Self {
        assert!(!components.is_empty());
        let n_vars = components[0].n_vars();
        let trunc = components[0].trunc_degree();
        for c in &components {
            assert_eq!(c.n_vars(), n_vars);
            assert_eq!(c.trunc_degree(), trunc);
        }
        SeriesSystem { components }
    }

    /// The identity system `F_i = X_i`.
    pub fn identity(n: usize, trunc_degree: u32) -> Self {
        SeriesSystem::new((0..n).map(|j| Series::var(n, trunc_degree, j)).collect())
    }

    pub fn zero(n_components: usize, n_vars: usize, trunc_degree: u32) -> Self {
        SeriesSystem::new(vec![Series::zero(n_vars, trunc_degree); n_components])
    }

    pub fn n_components(&self) -> usize {
        self.components.len()
    }

    pub fn n_vars(&self) -> usize {
        self.components[0].n_vars()
    }

    pub fn trunc_degree(&self) -> u32 {
        self.components[0].trunc_degree()
    }

    pub fn component(&self, i: usize) -> &Series {
        &self.components[i]
    }

    pub fn components(&self) -> &[Series] {
        &self.components
    }

    pub fn set_component(&mut self, i: usize, s: Series) {
        assert_eq!(s.n_vars(), self.n_vars());
        assert_eq!(s.trunc_degree(), self.trunc_degree());
        self.components[i] = s;
    }

    pub fn is_constant_free(&self) -> bool {
        self.components.iter().all(|c| c.is_constant_free())
    }

    pub fn is_square(&self) -> bool {
        self.n_components() == self.n_vars()
    }

    pub fn truncated_to(&self, d: u32) -> SeriesSystem {
        SeriesSystem::new(self.components.iter().map(|c| c.truncated_to(d)).collect())
    }

    pub fn add(&self, rhs: &SeriesSystem) -> SeriesSystem {
        assert_eq!(self.n_components(), rhs.n_components());
        SeriesSystem::new(
            self.components
                .iter()
                .zip(rhs.components.iter())
                .map(|(a, b)| a.add(b))
                .collect(),
        )
    }

    pub fn sub(&self, rhs: &SeriesSystem) -> SeriesSystem {
        assert_eq!(self.n_components(), rhs.n_components());
        SeriesSystem::new(
            self.components
                .iter()
                .zip(rhs.components.iter())
                .map(|(a, b)| a.sub(b))
                .collect(),
        )
    }

    /// The linear-part matrix `A_ij = [X_j] F_i` (only meaningful for
    /// constant-free systems).
    pub fn linear_part(&self) -> Vec<Vec<Rat>> {
        let n = self.n_vars();
        (0..self.n_components())
            .map(|i| {
                (0..n)
                    .map(|j| {
                        self.components[i].coeff(&crate::index::MultiIndex::unit(n, j))
                    })
                    .collect()
            })
            .collect()
    }

    /// Entrywise Jacobian; the window drops by one, as for `derivative`.
    pub fn jacobian(&self) -> SeriesMatrix {
        let n = self.n_vars();
        let rows = self.n_components();
        let entries = (0..rows)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| self.components[i].derivative(j))
            .collect();
        SeriesMatrix::from_entries(rows, n, entries)
    }
}

/// `(F o G)_i = F_i(G_1, ..., G_n)`, truncated to the shared window.
/// `G` must be constant-free and supply one series per variable of `F`.
pub fn compose_direct(f: &SeriesSystem, g: &SeriesSystem) -> Result<SeriesSystem, CoreError> {
    if g.n_components() != f.n_vars() {
        return Err(CoreError::DimensionMismatch {
            expected: f.n_vars(),
            found: g.n_components(),
        });
    }
    if f.trunc_degree() != g.trunc_degree() {
        return Err(CoreError::TruncationInsufficient {
            need: f.trunc_degree().max(g.trunc_degree()),
            have: f.trunc_degree().min(g.trunc_degree()),
        });
    }
    let args: Vec<Series> = g.components().to_vec();
    let composed = f
        .components()
        .iter()
        .map(|fi| fi.substitute(&args))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SeriesSystem::new(composed))
}

/// Left-to-right fold `F^(1) o ... o F^(p)`. Every system after the first
/// must be constant-free.
pub fn compose_chain(systems: &[SeriesSystem]) -> Result<SeriesSystem, CoreError> {
    assert!(!systems.is_empty());
    let mut acc = systems[0].clone();
    for g in &systems[1..] {
        acc = compose_direct(&acc, g)?;
    }
    Ok(acc)
}

/// A square grid of series sharing variables and window.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeriesMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Series>,
}

impl SeriesMatrix {
    pub fn from_entries(rows: usize, cols: usize, entries: Vec<Series>) -> Self {
        assert_eq!(entries.len(), rows * cols);
        let n_vars = entries[0].n_vars();
        let trunc = entries[0].trunc_degree();
        for e in &entries {
            assert_eq!(e.n_vars(), n_vars);
            assert_eq!(e.trunc_degree(), trunc);
        }
        SeriesMatrix {
            rows,
            cols,
            entries,
        }
    }

    pub fn identity(n: usize, n_vars: usize, trunc_degree: u32) -> Self {
        let entries = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| {
                if i == j {
                    Series::one(n_vars, trunc_degree)
                } else {
                    Series::zero(n_vars, trunc_degree)
                }
            })
            .collect();
        SeriesMatrix::from_entries(n, n, entries)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn n_vars(&self) -> usize {
        self.entries[0].n_vars()
    }

    pub fn trunc_degree(&self) -> u32 {
        self.entries[0].trunc_degree()
    }

    pub fn get(&self, i: usize, j: usize) -> &Series {
        &self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, s: Series) {
        assert_eq!(s.n_vars(), self.n_vars());
        assert_eq!(s.trunc_degree(), self.trunc_degree());
        self.entries[i * self.cols + j] = s;
    }

    pub fn sub(&self, rhs: &SeriesMatrix) -> SeriesMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        SeriesMatrix::from_entries(
            self.rows,
            self.cols,
            self.entries
                .iter()
                .zip(rhs.entries.iter())
                .map(|(a, b)| a.sub(b))
                .collect(),
        )
    }

    pub fn mul(&self, rhs: &SeriesMatrix) -> SeriesMatrix {
        assert_eq!(self.cols, rhs.rows);
        let mut entries = Vec::with_capacity(self.rows * rhs.cols);
        for i in 0..self.rows {
            for j in 0..rhs.cols {
                let mut acc = Series::zero(self.n_vars(), self.trunc_degree());
                for k in 0..self.cols {
                    acc = acc.add(&self.get(i, k).mul(rhs.get(k, j)));
                }
                entries.push(acc);
            }
        }
        SeriesMatrix::from_entries(self.rows, rhs.cols, entries)
    }

    pub fn trace(&self) -> Series {
        assert_eq!(self.rows, self.cols);
        let mut acc = Series::zero(self.n_vars(), self.trunc_degree());
        for i in 0..self.rows {
            acc = acc.add(self.get(i, i));
        }
        acc
    }

    /// Exact truncated determinant by Leibniz expansion; intended for the
    /// small matrices (n <= 4) this engine works with.
    pub fn det(&self) -> Series {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut out = Series::zero(self.n_vars(), self.trunc_degree());
        let mut perm: Vec<usize> = (0..n).collect();
        permute_signed(&mut perm, 0, true, &mut |p, even| {
            let mut term = Series::one(self.n_vars(), self.trunc_degree());
            for (i, &j) in p.iter().enumerate() {
                term = term.mul(self.get(i, j));
                if term.is_zero() {
                    break;
                }
            }
            if !even {
                term = term.neg();
            }
            out = out.add(&term);
        });
        out
    }

    /// Cofactor (Laplace) expansion along the first row; an independent
    /// route to the determinant kept for cross-checking.
    pub fn det_cofactor(&self) -> Series {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        if n == 0 {
            return Series::one(self.n_vars(), self.trunc_degree());
        }
        if n == 1 {
            return self.get(0, 0).clone();
        }
        let mut out = Series::zero(self.n_vars(), self.trunc_degree());
        for j in 0..n {
            let mut sub = Vec::with_capacity((n - 1) * (n - 1));
            for i in 1..n {
                for jj in 0..n {
                    if jj != j {
                        sub.push(self.get(i, jj).clone());
                    }
                }
            }
            let minor = SeriesMatrix::from_entries(n - 1, n - 1, sub).det_cofactor();
            let term = self.get(0, j).mul(&minor);
            out = if j % 2 == 0 {
                out.add(&term)
            } else {
                out.sub(&term)
            };
        }
        out
    }
}

// Enumerate permutations with their parity (plain recursion by swaps).
fn permute_signed<F: FnMut(&[usize], bool)>(p: &mut Vec<usize>, k: usize, even: bool, f: &mut F) {
    let n = p.len();
    if k == n {
        f(p, even);
        return;
    }
    for i in k..n {
        p.swap(k, i);
        permute_signed(p, k + 1, even == (i == k), f);
        p.swap(k, i);
    }
}

/// Exact inverse and determinant of a rational matrix by Gauss-Jordan
/// elimination; `None` if singular.
pub fn invert_rat_matrix(a: &[Vec<Rat>]) -> Option<(Vec<Vec<Rat>>, Rat)> {
    let n = a.len();
    for row in a {
        assert_eq!(row.len(), n);
    }
    let mut m: Vec<Vec<Rat>> = a.to_vec();
    let mut inv: Vec<Vec<Rat>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { Rat::one() } else { Rat::zero() })
                .collect()
        })
        .collect();
    let mut det = Rat::one();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !m[r][col].is_zero())?;
        if pivot != col {
            m.swap(pivot, col);
            inv.swap(pivot, col);
            det = -det;
        }
        let p = m[col][col].clone();
        det *= p.clone();
        for j in 0..n {
            m[col][j] /= p.clone();
            inv[col][j] /= p.clone();
        }
        for r in 0..n {
            if r != col && !m[r][col].is_zero() {
                let factor = m[r][col].clone();
                for j in 0..n {
                    let mj = m[col][j].clone();
                    let ij = inv[col][j].clone();
                    m[r][j] -= &factor * mj;
                    inv[r][j] -= &factor * ij;
                }
            }
        }
    }
    Some((inv, det))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::index::MultiIndex;
    use crate::rat::{rat, rat_int};
    use crate::sample::Sampler;

    #[test]
    fn identity_composition_both_sides() {
        let mut rng = Sampler::new(11);
        let g = rng.constant_free_system(2, 4, 4);
        let id = SeriesSystem::identity(2, 4);
        assert_eq!(compose_direct(&id, &g).unwrap(), g);
        assert_eq!(compose_direct(&g, &id).unwrap(), g);
    }

    #[test]
    fn hand_composition() {
        // F = X + X^2, G = 2X, window 2 -> 2X + 4X^2
        let f = SeriesSystem::new(vec![Series::var(1, 2, 0)
            .add(&Series::monomial(1, 2, MultiIndex::new(vec![2]), rat_int(1)))]);
        let g = SeriesSystem::new(vec![Series::var(1, 2, 0).scale(&rat_int(2))]);
        let fg = compose_direct(&f, &g).unwrap();
        assert_eq!(fg.component(0).coeff(&MultiIndex::new(vec![1])), rat_int(2));
        assert_eq!(fg.component(0).coeff(&MultiIndex::new(vec![2])), rat_int(4));
    }

    #[test]
    fn composition_is_associative() {
        let mut rng = Sampler::new(23);
        let f = rng.constant_free_system(2, 4, 4);
        let g = rng.constant_free_system(2, 4, 4);
        let h = rng.constant_free_system(2, 4, 4);
        let left = compose_direct(&compose_direct(&f, &g).unwrap(), &h).unwrap();
        let right = compose_direct(&f, &compose_direct(&g, &h).unwrap()).unwrap();
        assert_eq!(left, right);
    }

    #[test]
    fn chain_matches_nesting() {
        let mut rng = Sampler::new(31);
        let systems: Vec<SeriesSystem> =
            (0..3).map(|_| rng.constant_free_system(2, 4, 4)).collect();
        let chained = compose_chain(&systems).unwrap();
        let nested = compose_direct(
            &systems[0],
            &compose_direct(&systems[1], &systems[2]).unwrap(),
        )
        .unwrap();
        // left fold equals right nesting by associativity
        assert_eq!(chained, nested);
        let id = SeriesSystem::identity(2, 4);
        assert_eq!(
            compose_chain(&[id.clone(), id.clone(), id.clone()]).unwrap(),
            id
        );
        assert_eq!(
            compose_chain(&[systems[0].clone(), systems[1].clone()]).unwrap(),
            compose_direct(&systems[0], &systems[1]).unwrap()
        );
    }

    #[test]
    fn compose_rejects_constant_term() {
        let f = SeriesSystem::identity(1, 2);
        let g = SeriesSystem::new(vec![Series::one(1, 2)]);
        assert!(compose_direct(&f, &g).is_err());
    }

    #[test]
    fn det_identity_and_diagonal() {
        assert_eq!(SeriesMatrix::identity(3, 2, 3).det(), Series::one(2, 3));
        // diag(1 - X1, 1 - X2) -> 1 - X1 - X2 + X1 X2
        let one = Series::one(2, 2);
        let d0 = one.sub(&Series::var(2, 2, 0));
        let d1 = one.sub(&Series::var(2, 2, 1));
        let m = SeriesMatrix::from_entries(
            2,
            2,
            vec![d0, Series::zero(2, 2), Series::zero(2, 2), d1],
        );
        let det = m.det();
        assert_eq!(det.coeff(&MultiIndex::zero(2)), rat_int(1));
        assert_eq!(det.coeff(&MultiIndex::new(vec![1, 0])), rat_int(-1));
        assert_eq!(det.coeff(&MultiIndex::new(vec![0, 1])), rat_int(-1));
        assert_eq!(det.coeff(&MultiIndex::new(vec![1, 1])), rat_int(1));
    }

    #[test]
    fn det_matches_cofactor_oracle() {
        let mut rng = Sampler::new(47);
        for _ in 0..5 {
            let entries: Vec<Series> = (0..9).map(|_| rng.series(2, 3, 3, false)).collect();
            let m = SeriesMatrix::from_entries(3, 3, entries);
            assert_eq!(m.det(), m.det_cofactor());
        }
    }

    #[test]
    fn jacobian_entries() {
        let mut rng = Sampler::new(53);
        let f = rng.constant_free_system(2, 4, 5);
        let j = f.jacobian();
        assert_eq!(j.trunc_degree(), 3);
        for i in 0..2 {
            for k in 0..2 {
                assert_eq!(*j.get(i, k), f.component(i).derivative(k));
            }
        }
    }

    #[test]
    fn rational_inverse() {
        let a = vec![vec![rat_int(2), rat_int(1)], vec![rat_int(1), rat_int(1)]];
        let (inv, det) = invert_rat_matrix(&a).unwrap();
        assert_eq!(det, rat_int(1));
        assert_eq!(inv[0][0], rat_int(1));
        assert_eq!(inv[0][1], rat_int(-1));
        assert_eq!(inv[1][0], rat_int(-1));
        assert_eq!(inv[1][1], rat_int(2));
        let singular = vec![vec![rat_int(1), rat_int(2)], vec![rat(1, 2), rat_int(1)]];
        assert!(invert_rat_matrix(&singular).is_none());
    }
}
