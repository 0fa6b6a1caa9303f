//! Mukai vectors on a K3 lattice and the Ext-quivers of polystable objects
//! in 2-Calabi-Yau categories.

use num_integer::Integer;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::forms::{is_totally_negative, is_totally_negative_by_units, sym_form_raw};
use crate::quiver::Quiver;
use crate::strata::{aux_quiver, SemisimpleType, Summand};
use crate::DimVector;

/// Free lattice with the intersection form on the divisor component.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NsLattice {
    gram: Vec<Vec<i64>>,
}

impl NsLattice {
    pub fn new(gram: Vec<Vec<i64>>) -> Result<Self> {
        let n = gram.len();
        for (i, row) in gram.iter().enumerate() {
            if row.len() != n {
                return Err(Error::RankMismatch { expected: n, got: row.len() });
            }
            for j in 0..i {
                if gram[i][j] != gram[j][i] {
                    return Err(Error::Parse(format!("gram matrix is not symmetric at ({i},{j})")));
                }
            }
        }
        Ok(NsLattice { gram })
    }

    /// The rank-zero lattice.
    pub fn trivial() -> Self {
        NsLattice { gram: Vec::new() }
    }

    pub fn rank(&self) -> usize {
        self.gram.len()
    }

    pub fn gram(&self) -> &[Vec<i64>] {
        &self.gram
    }

    /// Parses a JSON matrix such as `[[0]]`.
    pub fn parse(text: &str) -> Result<Self> {
        let gram: Vec<Vec<i64>> =
            serde_json::from_str(text).map_err(|e| Error::Parse(format!("gram matrix: {e}")))?;
        Self::new(gram)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MukaiVector {
    pub r: i64,
    pub c: Vec<i64>,
    pub a: i64,
}

impl MukaiVector {
    pub fn new(r: i64, c: Vec<i64>, a: i64) -> Self {
        MukaiVector { r, c, a }
    }

    pub fn scaled(&self, m: i64) -> Self {
        MukaiVector { r: m * self.r, c: self.c.iter().map(|x| m * x).collect(), a: m * self.a }
    }

    fn check(&self, l: &NsLattice) -> Result<()> {
        if self.c.len() != l.rank() {
            return Err(Error::RankMismatch { expected: l.rank(), got: self.c.len() });
        }
        Ok(())
    }

    pub fn to_json(&self) -> Value {
        json!({"r": self.r, "c": self.c, "a": self.a})
    }
}

/// `c₁ᵀ G c₂ − r₁a₂ − r₂a₁`.
pub fn mukai_pairing(v1: &MukaiVector, v2: &MukaiVector, l: &NsLattice) -> Result<i64> {
    v1.check(l)?;
    v2.check(l)?;
    let cc: i64 = l
        .gram
        .iter()
        .zip(&v1.c)
        .map(|(row, &x)| x * row.iter().zip(&v2.c).map(|(&g, &y)| g * y).sum::<i64>())
        .sum();
    Ok(cc - v1.r * v2.a - v2.r * v1.a)
}

pub fn is_primitive(v: &MukaiVector) -> bool {
    let g = v.c.iter().fold(v.r.gcd(&v.a), |acc, x| acc.gcd(x));
    g == 1
}

/// Positivity of a primitive vector. Whether `c` is effective is not
/// lattice data and is supplied by the caller.
pub fn is_positive(v: &MukaiVector, l: &NsLattice, c_effective: bool) -> Result<bool> {
    if !is_primitive(v) || mukai_pairing(v, v, l)? < -2 {
        return Ok(false);
    }
    let c_zero = v.c.iter().all(|&x| x == 0);
    Ok(v.r > 0 || (v.r == 0 && c_effective && !c_zero && v.a != 0) || (v.r == 0 && c_zero && v.a > 0))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtQuiver {
    /// `2 + v_i·v_i` loops and `v_i·v_j` arrows each way.
    pub double: Quiver,
    /// Half the loops, `v_i·v_j` arrows `i → j` for `i < j`.
    pub underlying: Quiver,
    pub pairings: Vec<Vec<i64>>,
    /// Every `v_i·v_j > 0`, self-pairings included.
    pub totally_negative: bool,
}

impl ExtQuiver {
    pub fn to_json(&self) -> Value {
        json!({
            "double": self.double.to_json(),
            "underlying": self.underlying.to_json(),
            "pairings": self.pairings,
            "totally_negative": self.totally_negative,
        })
    }
}

pub fn ext_quiver_from_mukai(vectors: &[MukaiVector], l: &NsLattice) -> Result<ExtQuiver> {
    if vectors.is_empty() {
        return Err(Error::EmptyQuiver);
    }
    let k = vectors.len();
    let mut pairings = vec![vec![0i64; k]; k];
    for i in 0..k {
        for j in 0..k {
            pairings[i][j] = mukai_pairing(&vectors[i], &vectors[j], l)?;
        }
    }
    let mut double = Vec::new();
    let mut underlying = Vec::new();
    for (i, row) in pairings.iter().enumerate() {
        let loops = 2 + row[i];
        if loops < 0 {
            return Err(Error::NegativeArrowCount { i, j: i, count: loops });
        }
        if loops % 2 != 0 {
            return Err(Error::OddLoopCount { vertex: i, count: loops });
        }
        double.extend(std::iter::repeat_n((i, i), loops as usize));
        underlying.extend(std::iter::repeat_n((i, i), loops as usize / 2));
    }
    for i in 0..k {
        for j in 0..k {
            if i == j {
                continue;
            }
            let count = pairings[i][j];
            if count < 0 {
                return Err(Error::NegativeArrowCount { i, j, count });
            }
            double.extend(std::iter::repeat_n((i, j), count as usize));
            if i < j {
                underlying.extend(std::iter::repeat_n((i, j), count as usize));
            }
        }
    }
    let totally_negative = pairings.iter().all(|row| row.iter().all(|&p| p > 0));
    Ok(ExtQuiver {
        double: Quiver::with_numbered_vertices(k, double)?,
        underlying: Quiver::with_numbered_vertices(k, underlying)?,
        pairings,
        totally_negative,
    })
}

/// `(1, (), 1 − g)`, a vector of square `2g − 2` on the rank-zero lattice.
pub fn genus_vector(g: u32) -> MukaiVector {
    MukaiVector::new(1, Vec::new(), 1 - i64::from(g))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GloopCheck {
    pub ext_counts: Vec<Vec<usize>>,
    pub aux_counts: Vec<Vec<usize>>,
    /// Loops `1 + m_i²(g−1)`, arrows between `2 m_i m_j (g−1)`.
    pub formula_counts: Vec<Vec<usize>>,
    pub equal: bool,
}

/// Compares the Ext-quiver of `(m_i v₀)` with the auxiliary quiver of the
/// `g`-loop quiver at the type `{((m_i), e_i)}`, both in the type's
/// canonical summand order.
pub fn cross_check_gloop(g: u32, m: &[u32], e: &[u32]) -> Result<GloopCheck> {
    if g < 2 {
        return Err(Error::Precondition("g must be at least 2".into()));
    }
    if m.len() != e.len() || m.is_empty() {
        return Err(Error::DimMismatch { expected: m.len(), got: e.len() });
    }
    let sg = Quiver::g_loop(g as usize);
    let tau = SemisimpleType::new(
        m.iter().zip(e).map(|(&mi, &ei)| Summand { dim: DimVector::new(vec![mi]), mult: ei }).collect(),
    )?;
    let (aux, _) = aux_quiver(&sg, &tau)?;
    let v0 = genus_vector(g);
    let ms: Vec<i64> = tau.summands().iter().map(|s| i64::from(s.dim.entries()[0])).collect();
    let vectors: Vec<MukaiVector> = ms.iter().map(|&mi| v0.scaled(mi)).collect();
    let ext = ext_quiver_from_mukai(&vectors, &NsLattice::trivial())?;
    let g1 = i64::from(g) - 1;
    let formula_counts: Vec<Vec<usize>> = ms
        .iter()
        .enumerate()
        .map(|(i, &mi)| {
            ms.iter()
                .enumerate()
                .map(|(j, &mj)| if i == j { 1 + mi * mi * g1 } else { 2 * mi * mj * g1 } as usize)
                .collect()
        })
        .collect();
    let ext_counts = ext.underlying.count_matrix();
    let aux_counts = aux.count_matrix();
    let equal = ext_counts == aux_counts && aux_counts == formula_counts;
    Ok(GloopCheck { ext_counts, aux_counts, formula_counts, equal })
}

/// Checks `(d,e)_{Q'} = −(Σ d_i v_i)·(Σ e_i v_i)` on `trials` random
/// non-negative vectors plus the zero vector.
pub fn sym_form_identity_check(vectors: &[MukaiVector], l: &NsLattice, trials: usize, seed: u64) -> Result<bool> {
    let ext = ext_quiver_from_mukai(vectors, l)?;
    let k = vectors.len();
    let combine = |d: &[i64]| {
        let mut out = MukaiVector::new(0, vec![0; l.rank()], 0);
        for (v, &x) in vectors.iter().zip(d) {
            out.r += x * v.r;
            out.a += x * v.a;
            for (o, c) in out.c.iter_mut().zip(&v.c) {
                *o += x * c;
            }
        }
        out
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cases = vec![(vec![0i64; k], vec![0i64; k])];
    for _ in 0..trials {
        let d: Vec<i64> = (0..k).map(|_| rng.gen_range(0..=5)).collect();
        let e: Vec<i64> = (0..k).map(|_| rng.gen_range(0..=5)).collect();
        cases.push((d, e));
    }
    for (d, e) in cases {
        let lhs = sym_form_raw(&ext.underlying, &d, &e);
        let rhs = -mukai_pairing(&combine(&d), &combine(&e), l)?;
        if lhs != rhs {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Categories whose total negativity reduces to a quiver computation.
#[derive(Debug, Clone)]
pub enum Category {
    /// Modules over the preprojective algebra `Π_Q`.
    Preprojective(Quiver),
    /// Modules over a multiplicative preprojective algebra `Λ^q(Q)`.
    Multiplicative(Quiver),
    /// Sheaves on a K3 surface, through the Ext-quiver of the given vectors.
    K3 { vectors: Vec<MukaiVector>, lattice: NsLattice },
    /// Anything else, by name.
    Other(String),
}

/// `(ε_i, ε_j) < 0` on unit vectors of the governing quiver: the
/// computable shadow of `Σ_i (−1)^i ext^i < 0`.
pub fn total_negativity_euler_check(cat: &Category) -> Result<bool> {
    match cat {
        Category::Preprojective(q) | Category::Multiplicative(q) => {
            let by_units = is_totally_negative_by_units(q);
            debug_assert_eq!(by_units, is_totally_negative(q).totally_negative);
            Ok(by_units)
        }
        Category::K3 { vectors, lattice } => {
            Ok(is_totally_negative_by_units(&ext_quiver_from_mukai(vectors, lattice)?.underlying))
        }
        Category::Other(name) => Err(Error::UnsupportedCategory(name.clone())),
    }
}

/// Parses `(r,(c_1,...,c_k),a);(...)`; the divisor part may be `()`.
pub fn parse_vectors(text: &str, l: &NsLattice) -> Result<Vec<MukaiVector>> {
    let bad = |s: &str| Error::Parse(format!("mukai vector `{s}`: expected (r,(c...),a)"));
    text.split(';')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            let inner = s.strip_prefix('(').and_then(|x| x.strip_suffix(')')).ok_or_else(|| bad(s))?;
            let open = inner.find('(').ok_or_else(|| bad(s))?;
            let close = inner.rfind(')').ok_or_else(|| bad(s))?;
            let r = inner[..open].trim().trim_end_matches(',').trim();
            let a = inner[close + 1..].trim().trim_start_matches(',').trim();
            let num = |x: &str| x.trim().parse::<i64>().map_err(|_| bad(s));
            let c = inner[open + 1..close]
                .split(',')
                .map(str::trim)
                .filter(|x| !x.is_empty())
                .map(num)
                .collect::<Result<Vec<_>>>()?;
            let v = MukaiVector::new(num(r)?, c, num(a)?);
            v.check(l)?;
            Ok(v)
        })
        .collect()
}
