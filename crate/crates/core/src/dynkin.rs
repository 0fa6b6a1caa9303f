//! Exact positive-semidefiniteness and kernels of small integer matrices,
//! and extended-Dynkin detection through the symmetrized Euler matrix.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::forms::EulerMatrix;
use crate::quiver::{DimVector, Quiver};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Inertia {
    pub positive_semidefinite: bool,
    pub rank: usize,
}

fn to_rational(m: &[Vec<i64>]) -> Vec<Vec<BigRational>> {
    m.iter().map(|r| r.iter().map(|&x| BigRational::from_integer(BigInt::from(x))).collect()).collect()
}

/// Symmetric Gaussian elimination over the rationals. A symmetric matrix is
/// PSD iff every pivot taken from the diagonal is non-negative and a zero
/// diagonal entry forces its whole row to vanish.
pub fn symmetric_inertia(m: &[Vec<i64>]) -> Inertia {
    let n = m.len();
    let mut a = to_rational(m);
    let mut active: Vec<usize> = (0..n).collect();
    let mut rank = 0;
    loop {
        if active.iter().any(|&i| a[i][i].is_negative()) {
            return Inertia { positive_semidefinite: false, rank };
        }
        let Some(pos) = active.iter().position(|&i| a[i][i].is_positive()) else {
            // all remaining diagonal entries vanish
            let zero_block = active.iter().all(|&i| active.iter().all(|&j| a[i][j].is_zero()));
            return Inertia { positive_semidefinite: zero_block, rank };
        };
        let p = active.swap_remove(pos);
        rank += 1;
        let pivot = a[p][p].clone();
        for &i in &active {
            if a[i][p].is_zero() {
                continue;
            }
            let f = &a[i][p] / &pivot;
            for &j in &active {
                let delta = &f * &a[p][j];
                a[i][j] -= delta;
            }
        }
    }
}

/// Rational basis of the right kernel, each vector scaled to a primitive
/// integer vector.
pub fn integer_kernel_basis(m: &[Vec<i64>]) -> Vec<Vec<BigInt>> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut a = to_rational(m);
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows).find(|&i| !a[i][c].is_zero()) else { continue };
        a.swap(r, p);
        let inv = a[r][c].recip();
        for x in a[r].iter_mut() {
            *x *= &inv;
        }
        for i in 0..rows {
            if i != r && !a[i][c].is_zero() {
                let f = a[i][c].clone();
                for j in 0..cols {
                    let delta = &f * &a[r][j];
                    a[i][j] -= delta;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == rows {
            break;
        }
    }
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![BigRational::zero(); cols];
            v[f] = BigRational::one();
            for (row, &pc) in pivots.iter().enumerate() {
                v[pc] = -a[row][f].clone();
            }
            primitive_integer(&v)
        })
        .collect()
}

fn primitive_integer(v: &[BigRational]) -> Vec<BigInt> {
    let lcm = v.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let ints: Vec<BigInt> = v.iter().map(|x| (x * BigRational::from_integer(lcm.clone())).to_integer()).collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if g.is_zero() {
        ints
    } else {
        ints.into_iter().map(|x| x / &g).collect()
    }
}

/// Returns the minimal imaginary root `δ` when the symmetrized Euler matrix
/// is PSD of nullity one with a strictly positive kernel vector.
pub fn is_extended_dynkin(q: &Quiver) -> Result<Option<DimVector>> {
    if q.num_vertices() == 0 {
        return Err(Error::EmptyQuiver);
    }
    if !q.is_connected() {
        return Err(Error::Disconnected);
    }
    let c = EulerMatrix::of(q).symmetric;
    let inertia = symmetric_inertia(&c);
    if !inertia.positive_semidefinite || c.len() - inertia.rank != 1 {
        return Ok(None);
    }
    let basis = integer_kernel_basis(&c);
    debug_assert_eq!(basis.len(), 1);
    let mut v = basis.into_iter().next().expect("nullity one");
    if v.iter().all(|x| !x.is_positive()) {
        v = v.into_iter().map(|x| -x).collect();
    }
    if !v.iter().all(Signed::is_positive) {
        return Ok(None);
    }
    let entries = v.iter().map(|x| x.to_u32().expect("small root")).collect();
    Ok(Some(DimVector::new(entries)))
}

/// `Some(m)` when `d = m·δ` for the given root `δ`.
pub fn multiple_of(d: &DimVector, delta: &DimVector) -> Option<u32> {
    let (&d0, &r0) = d.entries().iter().zip(delta.entries()).next()?;
    if r0 == 0 || d0 % r0 != 0 {
        return None;
    }
    let m = d0 / r0;
    (delta.scaled(m) == *d).then_some(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    /// PSD iff every principal minor is non-negative.
    fn psd_by_principal_minors(m: &[Vec<i64>]) -> bool {
        let n = m.len();
        (1u32..(1 << n)).all(|mask| {
            let idx: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
            let sub: Vec<Vec<i64>> = idx.iter().map(|&i| idx.iter().map(|&j| m[i][j]).collect()).collect();
            det(&sub) >= 0
        })
    }

    fn det(m: &[Vec<i64>]) -> i64 {
        let n = m.len();
        if n == 1 {
            return m[0][0];
        }
        (0..n)
            .map(|c| {
                let minor: Vec<Vec<i64>> =
                    m[1..].iter().map(|r| r.iter().enumerate().filter(|&(j, _)| j != c).map(|(_, &x)| x).collect()).collect();
                let sign = if c % 2 == 0 { 1 } else { -1 };
                sign * m[0][c] * det(&minor)
            })
            .sum()
    }

    #[test]
    fn examples() {
        assert_eq!(is_extended_dynkin(&Quiver::kronecker()).unwrap(), Some(DimVector::new(vec![1, 1])));
        assert_eq!(is_extended_dynkin(&Quiver::jordan()).unwrap(), Some(DimVector::new(vec![1])));
        assert_eq!(is_extended_dynkin(&Quiver::g_loop(2)).unwrap(), None);
        assert_eq!(is_extended_dynkin(&Quiver::cycle(4)).unwrap(), Some(DimVector::ones(4)));
        assert_eq!(is_extended_dynkin(&Quiver::a2()).unwrap(), None);
    }

    #[test]
    fn d4_tilde_root() {
        // star with centre 0 and four leaves
        let q = Quiver::with_numbered_vertices(5, vec![(1, 0), (2, 0), (3, 0), (4, 0)]).unwrap();
        assert_eq!(is_extended_dynkin(&q).unwrap(), Some(DimVector::new(vec![2, 1, 1, 1, 1])));
    }

    #[test]
    fn kernel_basis_is_primitive() {
        let k = integer_kernel_basis(&[vec![2, -2], vec![-2, 2]]);
        assert_eq!(k, vec![ints(&[1, 1])]);
        let k = integer_kernel_basis(&[vec![1, 2, 3]]);
        assert_eq!(k.len(), 2);
    }

    #[test]
    fn inertia_matches_minor_oracle() {
        let mut seed = 7u64;
        for _ in 0..400 {
            let n = (seed % 4 + 1) as usize;
            let mut m = vec![vec![0i64; n]; n];
            for i in 0..n {
                for j in i..n {
                    seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                    let x = ((seed >> 33) % 7) as i64 - 3;
                    m[i][j] = x;
                    m[j][i] = x;
                }
            }
            assert_eq!(symmetric_inertia(&m).positive_semidefinite, psd_by_principal_minors(&m), "{m:?}");
        }
    }

    #[test]
    fn multiples() {
        let delta = DimVector::new(vec![1, 1]);
        assert_eq!(multiple_of(&DimVector::new(vec![2, 2]), &delta), Some(2));
        assert_eq!(multiple_of(&DimVector::new(vec![2, 1]), &delta), None);
    }
}
