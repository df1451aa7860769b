//! Exact permanents of rational matrices.
//!
//! The permanent is the hot kernel of Wick evaluation. Two routes are
//! kept on purpose: the naive permutation sum is the oracle, Ryser's
//! inclusion-exclusion formula with Gray-code subset iteration is the
//! fast path for k >= 5. They are cross-checked in the test suite.

use mps_core::rat::Rat;
use num::Zero;

fn assert_square(m: &[Vec<Rat>]) {
    for row in m {
        assert_eq!(row.len(), m.len(), "permanent needs a square matrix");
    }
}

/// Sum over all permutations of products along rows. O(k!).
pub fn permanent_naive(m: &[Vec<Rat>]) -> Rat {
    assert_square(m);
    let k = m.len();
    let mut used = vec![false; k];
    fn rec(m: &[Vec<Rat>], row: usize, used: &mut Vec<bool>, acc: Rat) -> Rat {
        let k = m.len();
        if row == k {
            return acc;
        }
        let mut total = Rat::zero();
        for col in 0..k {
            if !used[col] && !m[row][col].is_zero() {
                used[col] = true;
                total += rec(m, row + 1, used, &acc * &m[row][col]);
                used[col] = false;
            }
        }
        total
    }
    if k == 0 {
        return Rat::from_integer(1.into());
    }
    rec(m, 0, &mut used, Rat::from_integer(1.into()))
}

/// Ryser's formula, per(M) = (-1)^k sum_{S != empty} (-1)^{|S|} prod_i r_i(S),
/// with row sums r_i(S) maintained incrementally along a Gray code. O(k 2^k).
pub fn permanent_ryser(m: &[Vec<Rat>]) -> Rat {
    assert_square(m);
    let k = m.len();
    if k == 0 {
        return Rat::from_integer(1.into());
    }
    assert!(k < 64);
    let mut row_sums: Vec<Rat> = vec![Rat::zero(); k];
    let mut total = Rat::zero();
    let mut gray: u64 = 0;
    let mut popcount: u32 = 0;
    for g in 1u64..(1u64 << k) {
        let next_gray = g ^ (g >> 1);
        let flipped = (gray ^ next_gray).trailing_zeros() as usize;
        let inserted = next_gray & (1 << flipped) != 0;
        for (i, rs) in row_sums.iter_mut().enumerate() {
            if inserted {
                *rs += &m[i][flipped];
            } else {
                *rs -= &m[i][flipped];
            }
        }
        popcount = if inserted { popcount + 1 } else { popcount - 1 };
        gray = next_gray;
        let mut prod = Rat::from_integer(1.into());
        let mut zero = false;
        for rs in &row_sums {
            if rs.is_zero() {
                zero = true;
                break;
            }
            prod *= rs;
        }
        if zero {
            continue;
        }
        // sign (-1)^{k - |S|}
        if (k as u32 - popcount).is_multiple_of(2) {
            total += prod;
        } else {
            total -= prod;
        }
    }
    total
}

/// Dispatch: naive below the crossover, Ryser from k = 5 up.
pub fn permanent(m: &[Vec<Rat>]) -> Rat {
    if m.len() < 5 {
        permanent_naive(m)
    } else {
        permanent_ryser(m)
    }
}

/// Permanent of the blow-up of a small matrix: row `i` of `entries`
/// repeated `row_mult[i]` times, column `j` repeated `col_mult[j]`
/// times. Summing over nonnegative integer transport matrices `K` with
/// the given margins,
/// `per = sum_K prod_ij entries[i][j]^{k_ij} * prod_i a_i! prod_j b_j! / prod_ij k_ij!`.
/// Pairing matrices of monomial integrals have exactly this shape, and
/// the sum has polynomially many terms where Ryser has 2^k.
pub fn permanent_with_multiplicities(
    entries: &[Vec<Rat>],
    row_mult: &[u32],
    col_mult: &[u32],
) -> Rat {
    let n = entries.len();
    assert_eq!(row_mult.len(), n);
    assert!(entries.iter().all(|r| r.len() == col_mult.len()));
    let total_rows: u32 = row_mult.iter().sum();
    let total_cols: u32 = col_mult.iter().sum();
    if total_rows != total_cols {
        return Rat::zero();
    }
    let mut margin_fact = Rat::from_integer(1.into());
    for &a in row_mult.iter().chain(col_mult.iter()) {
        margin_fact *= mps_core::rat::factorial_rat(a);
    }
    let mut total = Rat::zero();
    let mut k = vec![vec![0u32; col_mult.len()]; n];
    fill_row(
        entries, row_mult, col_mult, 0, &mut vec![0; col_mult.len()], &mut k, &mut total,
    );
    total * margin_fact
}

// enumerate transport matrices row by row, tracking used column budget
fn fill_row(
    entries: &[Vec<Rat>],
    row_mult: &[u32],
    col_mult: &[u32],
    row: usize,
    col_used: &mut Vec<u32>,
    k: &mut Vec<Vec<u32>>,
    total: &mut Rat,
) {
    let n = entries.len();
    if row == n {
        // all margins satisfied by construction except the final column check
        if col_used.iter().zip(col_mult).all(|(u, m)| u == m) {
            let mut term = Rat::from_integer(1.into());
            for (i, ki) in k.iter().enumerate() {
                for (j, &kij) in ki.iter().enumerate() {
                    if kij > 0 {
                        if entries[i][j].is_zero() {
                            return;
                        }
                        for _ in 0..kij {
                            term *= &entries[i][j];
                        }
                        term /= mps_core::rat::factorial_rat(kij);
                    }
                }
            }
            *total += term;
        }
        return;
    }
    distribute(entries, row_mult, col_mult, row, 0, row_mult[row], col_used, k, total);
}

#[allow(clippy::too_many_arguments)]
fn distribute(
    entries: &[Vec<Rat>],
    row_mult: &[u32],
    col_mult: &[u32],
    row: usize,
    col: usize,
    remaining: u32,
    col_used: &mut Vec<u32>,
    k: &mut Vec<Vec<u32>>,
    total: &mut Rat,
) {
    let n_cols = col_mult.len();
    if col == n_cols {
        if remaining == 0 {
            fill_row(entries, row_mult, col_mult, row + 1, col_used, k, total);
        }
        return;
    }
    let cap = remaining.min(col_mult[col] - col_used[col]);
    for take in 0..=cap {
        k[row][col] = take;
        col_used[col] += take;
        distribute(
            entries, row_mult, col_mult, row, col + 1, remaining - take, col_used, k, total,
        );
        col_used[col] -= take;
        k[row][col] = 0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use mps_core::rat::rat_int;
    use mps_core::sample::Sampler;

    fn ones(k: usize) -> Vec<Vec<Rat>> {
        vec![vec![rat_int(1); k]; k]
    }

    #[test]
    fn all_ones_is_factorial() {
        for k in 0..=6usize {
            let expect = rat_int((1..=k as i64).product::<i64>().max(1));
            assert_eq!(permanent_naive(&ones(k)), expect);
            assert_eq!(permanent_ryser(&ones(k)), expect);
        }
    }

    #[test]
    fn antidiagonal() {
        let m = vec![
            vec![rat_int(0), rat_int(1)],
            vec![rat_int(1), rat_int(0)],
        ];
        assert_eq!(permanent(&m), rat_int(1));
    }

    #[test]
    fn ryser_matches_naive_on_random_matrices() {
        let mut rng = Sampler::new(6001);
        for k in 1..=6usize {
            for _ in 0..8 {
                let m: Vec<Vec<Rat>> = (0..k)
                    .map(|_| (0..k).map(|_| rng.small_rat()).collect())
                    .collect();
                assert_eq!(permanent_ryser(&m), permanent_naive(&m), "k={k}");
            }
        }
    }

    #[test]
    fn multiplicity_kernel_matches_blown_up_permanent() {
        let mut rng = Sampler::new(6002);
        for _ in 0..20 {
            let n = 2 + rng.below(2);
            let entries: Vec<Vec<Rat>> = (0..n)
                .map(|_| (0..n).map(|_| rng.small_rat()).collect())
                .collect();
            let row_mult: Vec<u32> = (0..n).map(|_| rng.below(3) as u32).collect();
            let col_mult: Vec<u32> = (0..n).map(|_| rng.below(3) as u32).collect();
            // expand explicitly and compare
            let mut big: Vec<Vec<Rat>> = Vec::new();
            for (i, &a) in row_mult.iter().enumerate() {
                for _ in 0..a {
                    let mut row = Vec::new();
                    for (j, &b) in col_mult.iter().enumerate() {
                        for _ in 0..b {
                            row.push(entries[i][j].clone());
                        }
                    }
                    big.push(row);
                }
            }
            let expect = if big.len() == col_mult.iter().sum::<u32>() as usize {
                permanent_naive(&big)
            } else {
                Rat::zero()
            };
            assert_eq!(
                permanent_with_multiplicities(&entries, &row_mult, &col_mult),
                expect
            );
        }
    }
}
