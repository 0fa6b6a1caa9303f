//! Euler form, its symmetrization, and the predicates defined through them.

use serde::Serialize;

use crate::error::Result;
#[cfg(test)]
use crate::error::Error;
use crate::quiver::{DimVector, Quiver};

/// `E[i][j] = δ_ij − #{arrows i→j}` and `C = E + Eᵀ`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EulerMatrix {
    pub euler: Vec<Vec<i64>>,
    pub symmetric: Vec<Vec<i64>>,
}

impl EulerMatrix {
    pub fn of(q: &Quiver) -> Self {
        let n = q.num_vertices();
        let mut e = vec![vec![0i64; n]; n];
        for (i, row) in e.iter_mut().enumerate() {
            row[i] = 1;
        }
        for a in q.arrows() {
            e[a.src][a.tgt] -= 1;
        }
        let c = (0..n).map(|i| (0..n).map(|j| e[i][j] + e[j][i]).collect()).collect();
        EulerMatrix { euler: e, symmetric: c }
    }

    /// `dᵀ E e`.
    pub fn pair(&self, d: &[i64], e: &[i64]) -> i64 {
        bilinear(&self.euler, d, e)
    }

    /// `dᵀ C e`.
    pub fn sym_pair(&self, d: &[i64], e: &[i64]) -> i64 {
        bilinear(&self.symmetric, d, e)
    }
}

fn bilinear(m: &[Vec<i64>], d: &[i64], e: &[i64]) -> i64 {
    m.iter()
        .zip(d)
        .map(|(row, &di)| di * row.iter().zip(e).map(|(&x, &ej)| x * ej).sum::<i64>())
        .sum()
}

/// `Σ_i d_i e_i − Σ_a d_{s(a)} e_{t(a)}` on arbitrary integer vectors.
pub fn euler_form_raw(q: &Quiver, d: &[i64], e: &[i64]) -> i64 {
    let diag: i64 = d.iter().zip(e).map(|(x, y)| x * y).sum();
    let off: i64 = q.arrows().iter().map(|a| d[a.src] * e[a.tgt]).sum();
    diag - off
}

pub fn sym_form_raw(q: &Quiver, d: &[i64], e: &[i64]) -> i64 {
    euler_form_raw(q, d, e) + euler_form_raw(q, e, d)
}

pub fn euler_form(q: &Quiver, d: &DimVector, e: &DimVector) -> Result<i64> {
    d.check_against(q)?;
    e.check_against(q)?;
    Ok(euler_form_raw(q, &d.as_i64(), &e.as_i64()))
}

pub fn sym_form(q: &Quiver, d: &DimVector, e: &DimVector) -> Result<i64> {
    d.check_against(q)?;
    e.check_against(q)?;
    Ok(sym_form_raw(q, &d.as_i64(), &e.as_i64()))
}

/// Unit-vector pair `(ε_i, ε_j)` whose symmetrized pairing is non-negative.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub i: usize,
    pub j: usize,
    pub value: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TotalNegativity {
    pub totally_negative: bool,
    pub witness: Option<Witness>,
}

/// Structural test: at least two loops at every vertex and at least one
/// arrow between every pair of distinct vertices.
pub fn is_totally_negative(q: &Quiver) -> TotalNegativity {
    let n = q.num_vertices();
    let counts = q.count_matrix();
    for i in 0..n {
        if counts[i][i] < 2 {
            return TotalNegativity {
                totally_negative: false,
                witness: Some(Witness { i, j: i, value: 2 - 2 * counts[i][i] as i64 }),
            };
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            if counts[i][j] == 0 {
                return TotalNegativity { totally_negative: false, witness: Some(Witness { i, j, value: 0 }) };
            }
        }
    }
    TotalNegativity { totally_negative: true, witness: None }
}

/// Quantifier form of total negativity: `(ε_i, ε_j) < 0` for every pair of
/// unit vectors, which by bilinearity covers all non-negative non-zero
/// vectors. Evaluated through the form itself, not through arrow counts.
pub fn is_totally_negative_by_units(q: &Quiver) -> bool {
    let n = q.num_vertices();
    let units: Vec<Vec<i64>> = (0..n).map(|i| DimVector::unit(n, i).as_i64()).collect();
    (0..n).all(|i| (i..n).all(|j| sym_form_raw(q, &units[i], &units[j]) < 0))
}

/// `(d, ε_i)` for every vertex `i`.
pub fn sym_against_units(q: &Quiver, d: &DimVector) -> Vec<i64> {
    EulerMatrix::of(q)
        .symmetric
        .iter()
        .map(|row| row.iter().zip(d.entries()).map(|(&c, &x)| c * i64::from(x)).sum())
        .collect()
}

/// `(d, ε_i) < 0` for every `i` in the support and the support is connected.
pub fn fundamental_domain_contains(q: &Quiver, d: &DimVector) -> Result<bool> {
    d.check_against(q)?;
    d.check_nonzero()?;
    Ok(region_test(q, d, |x| x < 0))
}

/// Non-strict variant `(d, ε_i) ≤ 0` on the support with connected support;
/// this is the region on which the simplicity exceptions are classified.
pub fn weak_fundamental_region_contains(q: &Quiver, d: &DimVector) -> Result<bool> {
    d.check_against(q)?;
    d.check_nonzero()?;
    Ok(region_test(q, d, |x| x <= 0))
}

fn region_test(q: &Quiver, d: &DimVector, ok: impl Fn(i64) -> bool) -> bool {
    let supp = d.support();
    let pairings = sym_against_units(q, d);
    supp.iter().all(|&i| ok(pairings[i])) && q.components_within(&supp).len() == 1
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn dv(v: &[u32]) -> DimVector {
        DimVector::new(v.to_vec())
    }

    #[test]
    fn euler_form_examples() {
        let s2 = Quiver::g_loop(2);
        assert_eq!(euler_form(&s2, &dv(&[1]), &dv(&[1])).unwrap(), -1);
        let a2 = Quiver::a2();
        assert_eq!(euler_form(&a2, &dv(&[1, 1]), &dv(&[1, 1])).unwrap(), 1);
        assert_eq!(euler_form(&a2, &dv(&[0, 0]), &dv(&[3, 7])).unwrap(), 0);
        assert!(matches!(euler_form(&a2, &dv(&[1]), &dv(&[1, 1])), Err(Error::DimMismatch { .. })));
    }

    #[test]
    fn sym_form_examples() {
        assert_eq!(sym_form(&Quiver::g_loop(2), &dv(&[1]), &dv(&[1])).unwrap(), -2);
        assert_eq!(sym_form(&Quiver::a2(), &dv(&[1, 0]), &dv(&[0, 1])).unwrap(), -1);
    }

    #[test]
    fn matrix_agrees_with_defining_sum() {
        let q = Quiver::from_counts(&[1, 3], &[((0, 1), 2)]).unwrap().reversed_arrow(4);
        let m = EulerMatrix::of(&q);
        for i in 0..2 {
            assert_eq!(m.symmetric[i][i], 2 - 2 * q.loops(i) as i64);
        }
        let (d, e) = ([2, -1], [3, 5]);
        assert_eq!(m.pair(&d, &e), euler_form_raw(&q, &d, &e));
        assert_eq!(m.sym_pair(&d, &e), sym_form_raw(&q, &d, &e));
    }

    #[test]
    fn total_negativity_examples() {
        assert!(is_totally_negative(&Quiver::g_loop(2)).totally_negative);
        let j = is_totally_negative(&Quiver::jordan());
        assert!(!j.totally_negative);
        assert_eq!(j.witness, Some(Witness { i: 0, j: 0, value: 0 }));
        let two = Quiver::from_counts(&[2, 2], &[((0, 1), 1)]).unwrap();
        assert!(is_totally_negative(&two).totally_negative);
        let apart = Quiver::from_counts(&[2, 2], &[]).unwrap();
        assert_eq!(is_totally_negative(&apart).witness, Some(Witness { i: 0, j: 1, value: 0 }));
    }

    #[test]
    fn fundamental_domain_examples() {
        let a2 = Quiver::a2();
        assert!(!fundamental_domain_contains(&a2, &dv(&[1, 1])).unwrap());
        assert!(!fundamental_domain_contains(&Quiver::jordan(), &dv(&[1])).unwrap());
        assert!(weak_fundamental_region_contains(&Quiver::jordan(), &dv(&[1])).unwrap());
        assert_eq!(fundamental_domain_contains(&a2, &dv(&[0, 0])), Err(Error::ZeroDimension));
        let tn = Quiver::from_counts(&[2, 3], &[((0, 1), 1)]).unwrap();
        for a in 0..=4 {
            for b in 0..=4 {
                if a + b > 0 {
                    assert!(fundamental_domain_contains(&tn, &dv(&[a, b])).unwrap());
                }
            }
        }
    }

    fn small_quiver() -> impl Strategy<Value = Quiver> {
        (1usize..=3)
            .prop_flat_map(|n| proptest::collection::vec((0..n, 0..n), 0..7).prop_map(move |a| (n, a)))
            .prop_map(|(n, arrows)| Quiver::with_numbered_vertices(n, arrows).unwrap())
    }

    proptest! {
        #[test]
        fn euler_form_is_bilinear(
            q in small_quiver(),
            seed in proptest::collection::vec(-5i64..=5, 9),
        ) {
            let n = q.num_vertices();
            let d = &seed[0..n];
            let d2 = &seed[3..3 + n];
            let e = &seed[6..6 + n];
            let sum: Vec<i64> = d.iter().zip(d2).map(|(a, b)| a + b).collect();
            prop_assert_eq!(
                euler_form_raw(&q, &sum, e),
                euler_form_raw(&q, d, e) + euler_form_raw(&q, d2, e)
            );
            let sum_e: Vec<i64> = e.iter().zip(d2).map(|(a, b)| a + b).collect();
            prop_assert_eq!(
                euler_form_raw(&q, d, &sum_e),
                euler_form_raw(&q, d, e) + euler_form_raw(&q, d, d2)
            );
            prop_assert_eq!(sym_form_raw(&q, d, e), sym_form_raw(&q, e, d));
        }

        #[test]
        fn structural_and_quantifier_tests_agree(q in small_quiver()) {
            let s = is_totally_negative(&q);
            prop_assert_eq!(s.totally_negative, is_totally_negative_by_units(&q));
            if let Some(w) = s.witness {
                let n = q.num_vertices();
                let v = sym_form_raw(&q, &DimVector::unit(n, w.i).as_i64(), &DimVector::unit(n, w.j).as_i64());
                prop_assert!(v >= 0);
                prop_assert_eq!(v, w.value);
            }
        }
    }
}
