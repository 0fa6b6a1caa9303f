//! Semisimple types, their stratification order, top-types and auxiliary
//! quivers.

use std::cmp::Reverse;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::forms::{euler_form_raw, sym_form_raw};
use crate::quiver::{DimVector, Quiver};
use crate::simple::{simple_module_exists, Existence};

pub const DEFAULT_TYPE_CAP: usize = 100_000;
pub const DEFAULT_TOP_TYPE_CAP: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Summand {
    pub dim: DimVector,
    pub mult: u32,
}

/// Multiset of `(dimension vector, multiplicity)` pairs. Equal pairs may
/// repeat: they stand for non-isomorphic simples of the same dimension.
/// Summands are kept sorted in descending order so that equality is
/// multiset equality.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SemisimpleType {
    summands: Vec<Summand>,
}

impl SemisimpleType {
    pub fn new(mut summands: Vec<Summand>) -> Result<Self> {
        let Some(first) = summands.first() else {
            return Err(Error::Precondition("a semisimple type needs at least one summand".into()));
        };
        let n = first.dim.len();
        for s in &summands {
            if s.dim.len() != n {
                return Err(Error::DimMismatch { expected: n, got: s.dim.len() });
            }
            if s.mult == 0 || s.dim.is_zero() {
                return Err(Error::Precondition("summands need positive multiplicity and non-zero dimension".into()));
            }
        }
        summands.sort_by(|a, b| b.cmp(a));
        Ok(SemisimpleType { summands })
    }

    pub fn summands(&self) -> &[Summand] {
        &self.summands
    }

    pub fn len(&self) -> usize {
        self.summands.len()
    }

    pub fn is_empty(&self) -> bool {
        self.summands.is_empty()
    }

    /// `Σ mult_i · dim_i`.
    pub fn total(&self) -> DimVector {
        let n = self.summands[0].dim.len();
        let mut out = vec![0u32; n];
        for s in &self.summands {
            for (o, &x) in out.iter_mut().zip(s.dim.entries()) {
                *o += x * s.mult;
            }
        }
        DimVector::new(out)
    }

    pub fn class_dims(&self) -> Vec<DimVector> {
        self.summands.iter().map(|s| s.dim.clone()).collect()
    }

    pub fn mults(&self) -> Vec<u32> {
        self.summands.iter().map(|s| s.mult).collect()
    }

    /// `Σ e_i²`, the dimension of the stabilizer of a point of this type.
    pub fn stabilizer_dim(&self) -> u64 {
        self.summands.iter().map(|s| u64::from(s.mult).pow(2)).sum()
    }

    pub fn to_json(&self, q: &Quiver) -> Value {
        Value::Array(
            self.summands.iter().map(|s| json!({"dim": s.dim.to_json(q), "mult": s.mult})).collect(),
        )
    }

    pub fn from_json(q: &Quiver, value: &Value) -> Result<Self> {
        let items =
            value.as_array().ok_or_else(|| Error::Parse("semisimple type must be a JSON array".into()))?;
        let summands = items
            .iter()
            .enumerate()
            .map(|(k, item)| {
                let dim = item.get("dim").ok_or_else(|| Error::Parse(format!("[{k}].dim missing")))?;
                let mult = item
                    .get("mult")
                    .and_then(Value::as_u64)
                    .and_then(|m| u32::try_from(m).ok())
                    .ok_or_else(|| Error::Parse(format!("[{k}].mult must be a positive integer")))?;
                Ok(Summand { dim: DimVector::from_json(q, dim)?, mult })
            })
            .collect::<Result<Vec<_>>>()?;
        SemisimpleType::new(summands)
    }
}

/// Type of the zero module: `{(ε_i, d_i) : i ∈ supp(d)}`.
pub fn tau_min(q: &Quiver, d: &DimVector) -> Result<SemisimpleType> {
    d.check_against(q)?;
    d.check_nonzero()?;
    let n = q.num_vertices();
    SemisimpleType::new(
        d.support().into_iter().map(|i| Summand { dim: DimVector::unit(n, i), mult: d.entries()[i] }).collect(),
    )
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OraclePolicy {
    /// Only dimension vectors with a simple module.
    #[default]
    Strict,
    /// Also dimension vectors the simplicity oracle cannot decide.
    Permissive,
}

impl OraclePolicy {
    fn admits(self, e: Existence) -> bool {
        matches!((self, e), (_, Existence::True) | (OraclePolicy::Permissive, Existence::Unknown))
    }
}

fn dominated_vectors(d: &DimVector) -> Vec<DimVector> {
    let mut out = vec![Vec::new()];
    for &x in d.entries() {
        out = out
            .into_iter()
            .flat_map(|prefix: Vec<u32>| {
                (0..=x).map(move |v| {
                    let mut p = prefix.clone();
                    p.push(v);
                    p
                })
            })
            .collect();
    }
    out.into_iter().map(DimVector::new).filter(|v| !v.is_zero()).collect()
}

/// All semisimple types of total `d` whose summand dimensions are admitted
/// by `policy`, in a deterministic canonical order.
pub fn enumerate_semisimple_types(
    q: &Quiver,
    d: &DimVector,
    policy: OraclePolicy,
    cap: usize,
) -> Result<Vec<SemisimpleType>> {
    d.check_against(q)?;
    d.check_nonzero()?;
    let mut candidates = Vec::new();
    for c in dominated_vectors(d) {
        if policy.admits(simple_module_exists(q, &c)?.verdict) {
            candidates.push(c);
        }
    }
    candidates.sort_by(|a, b| b.cmp(a));
    let mut pairs = Vec::new();
    for c in &candidates {
        let max = c
            .entries()
            .iter()
            .zip(d.entries())
            .filter(|(&ci, _)| ci > 0)
            .map(|(&ci, &di)| di / ci)
            .min()
            .unwrap_or(0);
        for m in (1..=max).rev() {
            pairs.push(Summand { dim: c.clone(), mult: m });
        }
    }

    struct Search<'a> {
        pairs: &'a [Summand],
        cap: usize,
        out: Vec<SemisimpleType>,
        chosen: Vec<Summand>,
    }
    impl Search<'_> {
        fn run(&mut self, start: usize, remaining: &mut [u32]) -> Result<()> {
            if remaining.iter().all(|&x| x == 0) {
                if self.out.len() == self.cap {
                    return Err(Error::CapExceeded { cap: self.cap });
                }
                self.out.push(SemisimpleType { summands: self.chosen.clone() });
                return Ok(());
            }
            for k in start..self.pairs.len() {
                let p = &self.pairs[k];
                let fits = p.dim.entries().iter().zip(remaining.iter()).all(|(&c, &r)| c * p.mult <= r);
                if !fits {
                    continue;
                }
                for (r, &c) in remaining.iter_mut().zip(p.dim.entries()) {
                    *r -= c * p.mult;
                }
                self.chosen.push(p.clone());
                let res = self.run(k, remaining);
                self.chosen.pop();
                for (r, &c) in remaining.iter_mut().zip(p.dim.entries()) {
                    *r += c * p.mult;
                }
                res?;
            }
            Ok(())
        }
    }
    let mut search = Search { pairs: &pairs, cap, out: Vec::new(), chosen: Vec::new() };
    let mut remaining = d.entries().to_vec();
    search.run(0, &mut remaining)?;
    Ok(search.out)
}

/// Auxiliary quiver of a semisimple type: vertex `i` per summand with
/// `1 − ⟨d_i,d_i⟩` loops, and `−(d_i,d_j)` arrows `i → j` for `i < j`.
/// Returns the quiver and the multiplicity vector.
pub fn aux_quiver(q: &Quiver, tau: &SemisimpleType) -> Result<(Quiver, DimVector)> {
    for s in &tau.summands {
        s.dim.check_against(q)?;
    }
    let dims: Vec<Vec<i64>> = tau.summands.iter().map(|s| s.dim.as_i64()).collect();
    let r = dims.len();
    let mut arrows = Vec::new();
    for i in 0..r {
        let loops = 1 - euler_form_raw(q, &dims[i], &dims[i]);
        if loops < 0 {
            return Err(Error::NegativeArrowCount { i, j: i, count: loops });
        }
        arrows.extend(std::iter::repeat_n((i, i), loops as usize));
    }
    for i in 0..r {
        for j in i + 1..r {
            let count = -sym_form_raw(q, &dims[i], &dims[j]);
            if count < 0 {
                return Err(Error::NegativeArrowCount { i, j, count });
            }
            arrows.extend(std::iter::repeat_n((i, j), count as usize));
        }
    }
    Ok((Quiver::with_numbered_vertices(r, arrows)?, DimVector::new(tau.mults())))
}

/// Stratification order `τ' ≤ τ`: some non-negative integer matrix `c` has
/// `d_i = Σ_j c_ij d'_j` for every summand of `τ` and `e'_j = Σ_i c_ij e_i`
/// for every summand of `τ'`.
pub fn types_leq(lower: &SemisimpleType, upper: &SemisimpleType) -> Result<bool> {
    if lower.total() != upper.total() {
        return Err(Error::AmbientMismatch);
    }
    let target: Vec<u64> = lower.summands.iter().map(|s| u64::from(s.mult)).collect();
    let mut used = vec![0u64; lower.len()];
    Ok(refine(upper, lower, 0, &mut used, &target))
}

fn refine(upper: &SemisimpleType, lower: &SemisimpleType, i: usize, used: &mut [u64], target: &[u64]) -> bool {
    if i == upper.len() {
        return used == target;
    }
    let s = &upper.summands[i];
    let e = u64::from(s.mult);
    let mut remaining = s.dim.entries().to_vec();
    decompose(upper, lower, i, 0, &mut remaining, e, used, target)
}

#[allow(clippy::too_many_arguments)]
fn decompose(
    upper: &SemisimpleType,
    lower: &SemisimpleType,
    i: usize,
    j: usize,
    remaining: &mut [u32],
    e: u64,
    used: &mut [u64],
    target: &[u64],
) -> bool {
    if j == lower.len() {
        return remaining.iter().all(|&x| x == 0) && refine(upper, lower, i + 1, used, target);
    }
    let dj = lower.summands[j].dim.entries();
    let by_dim = dj
        .iter()
        .zip(remaining.iter())
        .filter(|(&c, _)| c > 0)
        .map(|(&c, &r)| r / c)
        .min()
        .unwrap_or(0);
    let by_mult = (target[j] - used[j]) / e;
    let max = u64::from(by_dim).min(by_mult);
    for c in (0..=max).rev() {
        let c32 = c as u32;
        for (r, &x) in remaining.iter_mut().zip(dj) {
            *r -= x * c32;
        }
        used[j] += c * e;
        let ok = decompose(upper, lower, i, j + 1, remaining, e, used, target);
        used[j] -= c * e;
        for (r, &x) in remaining.iter_mut().zip(dj) {
            *r += x * c32;
        }
        if ok {
            return true;
        }
    }
    false
}

/// Ordered filtration data `(class_s, m_s)`; classes index the summands of
/// a semisimple type (0-based here, 1-based in JSON).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TopType {
    pub steps: Vec<(usize, u32)>,
}

impl TopType {
    pub fn new(steps: Vec<(usize, u32)>) -> Self {
        TopType { steps }
    }

    /// Per-class multiplicity totals for `classes` classes.
    pub fn class_totals(&self, classes: usize) -> Vec<u32> {
        let mut out = vec![0; classes];
        for &(j, m) in &self.steps {
            out[j] += m;
        }
        out
    }

    /// Multiplicities of each class in order of appearance.
    pub fn per_class(&self, classes: usize) -> Vec<Vec<u32>> {
        let mut out = vec![Vec::new(); classes];
        for &(j, m) in &self.steps {
            out[j].push(m);
        }
        out
    }

    pub fn to_json(&self) -> Value {
        Value::Array(self.steps.iter().map(|&(j, m)| json!([j + 1, m])).collect())
    }

    pub fn from_json(value: &Value) -> Result<Self> {
        let items = value.as_array().ok_or_else(|| Error::Parse("top type must be a JSON array".into()))?;
        let steps = items
            .iter()
            .map(|it| {
                let pair = it.as_array().filter(|p| p.len() == 2);
                let nums = pair.and_then(|p| Some((p[0].as_u64()?, p[1].as_u64()?)));
                match nums {
                    Some((j, m)) if j >= 1 && m >= 1 => Ok((j as usize - 1, m as u32)),
                    _ => Err(Error::Parse("top type steps must be [class >= 1, mult >= 1]".into())),
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(TopType { steps })
    }
}

/// Every top-type compatible with `tau`, adjacent equal classes included.
pub fn enumerate_top_types(tau: &SemisimpleType, cap: usize) -> Result<Vec<TopType>> {
    fn rec(rem: &mut [u32], steps: &mut Vec<(usize, u32)>, out: &mut Vec<TopType>, cap: usize) -> Result<()> {
        if rem.iter().all(|&x| x == 0) {
            if out.len() == cap {
                return Err(Error::CapExceeded { cap });
            }
            out.push(TopType { steps: steps.clone() });
            return Ok(());
        }
        for j in 0..rem.len() {
            for m in (1..=rem[j]).rev() {
                rem[j] -= m;
                steps.push((j, m));
                let res = rec(rem, steps, out, cap);
                steps.pop();
                rem[j] += m;
                res?;
            }
        }
        Ok(())
    }
    let mut rem = tau.mults();
    let mut out = Vec::new();
    rec(&mut rem, &mut Vec::new(), &mut out, cap)?;
    Ok(out)
}

/// `z_s = 0` when `⟨dim N_{j_s}, dim N_{j_s}⟩ = 1` or `j_s` has not occurred
/// before; otherwise the multiplicity at its most recent occurrence.
pub fn z_sequence(top: &TopType, class_dims: &[DimVector], q: &Quiver) -> Result<Vec<u32>> {
    let self_one: Vec<bool> = class_dims
        .iter()
        .map(|c| {
            c.check_against(q)?;
            let v = c.as_i64();
            Ok(euler_form_raw(q, &v, &v) == 1)
        })
        .collect::<Result<_>>()?;
    let mut last: Vec<Option<u32>> = vec![None; class_dims.len()];
    top.steps
        .iter()
        .map(|&(j, m)| {
            if j >= class_dims.len() {
                return Err(Error::IncompatibleTopType(format!("class {} out of range", j + 1)));
            }
            let z = if self_one[j] { 0 } else { last[j].unwrap_or(0) };
            last[j] = Some(m);
            Ok(z)
        })
        .collect()
}

/// Types sorted so that the largest stabilizer comes first.
pub fn sort_by_stabilizer(types: &mut [SemisimpleType]) {
    types.sort_by_key(|t| Reverse(t.stabilizer_dim()));
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dv(v: &[u32]) -> DimVector {
        DimVector::new(v.to_vec())
    }

    fn ty(parts: &[(&[u32], u32)]) -> SemisimpleType {
        SemisimpleType::new(parts.iter().map(|(d, m)| Summand { dim: dv(d), mult: *m }).collect()).unwrap()
    }

    #[test]
    fn tau_min_examples() {
        assert_eq!(tau_min(&Quiver::g_loop(2), &dv(&[3])).unwrap(), ty(&[(&[1], 3)]));
        let t = tau_min(&Quiver::a2(), &dv(&[2, 1])).unwrap();
        assert_eq!(t.summands()[0], Summand { dim: dv(&[1, 0]), mult: 2 });
        assert_eq!(t.summands()[1], Summand { dim: dv(&[0, 1]), mult: 1 });
        assert_eq!(tau_min(&Quiver::kronecker(), &dv(&[2, 1])).unwrap(), t);
        assert!(tau_min(&Quiver::a2(), &dv(&[0, 0])).is_err());
    }

    #[test]
    fn enumerate_examples() {
        let s2 = Quiver::g_loop(2);
        let t = enumerate_semisimple_types(&s2, &dv(&[2]), OraclePolicy::Strict, DEFAULT_TYPE_CAP).unwrap();
        assert_eq!(t, vec![ty(&[(&[2], 1)]), ty(&[(&[1], 2)]), ty(&[(&[1], 1), (&[1], 1)])]);
        assert_eq!(enumerate_semisimple_types(&s2, &dv(&[1]), OraclePolicy::Strict, 10).unwrap().len(), 1);
        let k = enumerate_semisimple_types(&Quiver::kronecker(), &dv(&[2, 2]), OraclePolicy::Strict, 1000).unwrap();
        assert!(!k.contains(&ty(&[(&[2, 2], 1)])));
        assert!(k.contains(&ty(&[(&[1, 1], 2)])));
        assert!(k.contains(&ty(&[(&[1, 1], 1), (&[1, 1], 1)])));
    }

    #[test]
    fn enumeration_cap_is_an_error() {
        let s2 = Quiver::g_loop(2);
        let err = enumerate_semisimple_types(&s2, &dv(&[6]), OraclePolicy::Strict, 5).unwrap_err();
        assert_eq!(err, Error::CapExceeded { cap: 5 });
    }

    #[test]
    fn aux_quiver_examples() {
        let (q, e) = aux_quiver(&Quiver::g_loop(2), &ty(&[(&[1], 2)])).unwrap();
        assert_eq!(q.count_matrix(), vec![vec![2]]);
        assert_eq!(e, dv(&[2]));
        let (q, e) = aux_quiver(&Quiver::g_loop(3), &ty(&[(&[1], 1), (&[2], 1)])).unwrap();
        // canonical order puts (2) first
        assert_eq!(q.count_matrix(), vec![vec![9, 8], vec![8, 3]]);
        assert_eq!(e, dv(&[1, 1]));
    }

    #[test]
    fn aux_quiver_rejects_positive_pairings() {
        let t = ty(&[(&[1, 1], 1), (&[1, 0], 1)]);
        assert!(matches!(aux_quiver(&Quiver::a2(), &t), Err(Error::NegativeArrowCount { .. })));
    }

    #[test]
    fn order_examples() {
        let one_two = ty(&[(&[1], 2)]);
        let two_one = ty(&[(&[2], 1)]);
        let split = ty(&[(&[1], 1), (&[1], 1)]);
        assert!(types_leq(&one_two, &two_one).unwrap());
        assert!(!types_leq(&split, &one_two).unwrap());
        assert!(types_leq(&one_two, &split).unwrap());
        assert!(types_leq(&split, &two_one).unwrap());
        assert_eq!(types_leq(&one_two, &ty(&[(&[3], 1)])), Err(Error::AmbientMismatch));
    }

    #[test]
    fn top_type_examples() {
        let t = enumerate_top_types(&ty(&[(&[1], 2)]), 100).unwrap();
        assert_eq!(t, vec![TopType::new(vec![(0, 2)]), TopType::new(vec![(0, 1), (0, 1)])]);
        let s2 = Quiver::g_loop(2);
        assert_eq!(z_sequence(&t[1], &[dv(&[1])], &s2).unwrap(), vec![0, 1]);
        // ⟨ε_i, ε_i⟩ = 1 on A2 kills every z
        let a2 = Quiver::a2();
        let top = TopType::new(vec![(0, 1), (1, 1), (0, 2), (1, 3)]);
        assert_eq!(z_sequence(&top, &[dv(&[1, 0]), dv(&[0, 1])], &a2).unwrap(), vec![0, 0, 0, 0]);
    }

    #[test]
    fn top_type_counts() {
        // compositions of 4
        assert_eq!(enumerate_top_types(&ty(&[(&[1], 4)]), 100).unwrap().len(), 8);
        // classes (2,1): {(2),(1,1)} interleaved with (1): 2 + 3 = 5
        assert_eq!(enumerate_top_types(&ty(&[(&[1, 0], 2), (&[0, 1], 1)]), 100).unwrap().len(), 5);
        assert!(enumerate_top_types(&ty(&[(&[1], 6)]), 10).is_err());
    }

    #[test]
    fn json_shapes() {
        let q = Quiver::a2();
        let t = ty(&[(&[1, 0], 2), (&[0, 1], 1)]);
        let v = t.to_json(&q);
        assert_eq!(v.to_string(), r#"[{"dim":{"1":1,"2":0},"mult":2},{"dim":{"1":0,"2":1},"mult":1}]"#);
        assert_eq!(SemisimpleType::from_json(&q, &v).unwrap(), t);
        let top = TopType::new(vec![(0, 1), (1, 2)]);
        assert_eq!(top.to_json().to_string(), "[[1,1],[2,2]]");
        assert_eq!(TopType::from_json(&top.to_json()).unwrap(), top);
    }
}
