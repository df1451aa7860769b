//! Exponent vectors for monomials `X^a`.

use std::cmp::Ordering;
use std::fmt;

use crate::error::CoreError;
use crate::rat::{factorial, Rat};
use num::BigInt;
use num::One;

/// An exponent vector `a` in `N^n`. The length is the ambient variable
/// count and never changes after construction.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(exponents: Vec<u32>) -> Self {
        MultiIndex(exponents)
    }

    pub fn zero(n_vars: usize) -> Self {
        MultiIndex(vec![0; n_vars])
    }

    /// The standard basis index `e_j` (exponent 1 on variable `j`).
    pub fn unit(n_vars: usize, j: usize) -> Self {
        assert!(j < n_vars);
        let mut e = vec![0; n_vars];
        e[j] = 1;
        MultiIndex(e)
    }

    pub fn n_vars(&self) -> usize {
        self.0.len()
    }

    pub fn exponent(&self, j: usize) -> u32 {
        self.0[j]
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    /// Total degree `|a|`.
    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    pub fn add(&self, rhs: &MultiIndex) -> MultiIndex {
        assert_eq!(self.n_vars(), rhs.n_vars());
        MultiIndex(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }

    /// Componentwise subtraction, `None` if any component would go negative.
    pub fn checked_sub(&self, rhs: &MultiIndex) -> Option<MultiIndex> {
        assert_eq!(self.n_vars(), rhs.n_vars());
        self.0
            .iter()
            .zip(&rhs.0)
            .map(|(a, b)| a.checked_sub(*b))
            .collect::<Option<Vec<_>>>()
            .map(MultiIndex)
    }

    /// `a! = a_1! ... a_n!`.
    pub fn factorial(&self) -> BigInt {
        let mut acc = BigInt::one();
        for &e in &self.0 {
            acc *= factorial(e);
        }
        acc
    }

    pub fn factorial_rat(&self) -> Rat {
        Rat::from_integer(self.factorial())
    }

    /// Every index of exact total degree `d`.
    pub fn all_of_degree(n_vars: usize, d: u32) -> Vec<MultiIndex> {
        let mut out = Vec::new();
        let mut cur = vec![0u32; n_vars];
        fn rec(cur: &mut Vec<u32>, pos: usize, rem: u32, out: &mut Vec<MultiIndex>) {
            if pos + 1 == cur.len() {
                cur[pos] = rem;
                out.push(MultiIndex(cur.clone()));
                return;
            }
            for e in 0..=rem {
                cur[pos] = e;
                rec(cur, pos + 1, rem - e, out);
            }
        }
        if n_vars == 0 {
            if d == 0 {
                out.push(MultiIndex(Vec::new()));
            }
            return out;
        }
        rec(&mut cur, 0, d, &mut out);
        out
    }

    /// Every index of total degree at most `d`, in graded order.
    pub fn all_up_to_degree(n_vars: usize, d: u32) -> Vec<MultiIndex> {
        (0..=d)
            .flat_map(|k| Self::all_of_degree(n_vars, k))
            .collect()
    }

    /// A representative index list for this multiindex: the weakly
    /// increasing list with `multiplicity_index` equal to `self`.
    pub fn representative_indices(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.degree() as usize);
        for (j, &e) in self.0.iter().enumerate() {
            out.extend(std::iter::repeat_n(j, e as usize));
        }
        out
    }
}

/// Counts occurrences: `mu_i = #{r : js[r] = i}`. Indices are 0-based.
pub fn multiplicity_index_raw(js: &[usize], n_vars: usize) -> Result<MultiIndex, CoreError> {
    let mut e = vec![0u32; n_vars];
    for &j in js {
        if j >= n_vars {
            return Err(CoreError::IndexOutOfRange {
                index: j,
                bound: n_vars,
            });
        }
        e[j] += 1;
    }
    Ok(MultiIndex(e))
}

// Graded order, then lexicographic on exponents. This is the canonical
// emit order for JSON and tables.
impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, e) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}
