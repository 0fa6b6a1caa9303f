//! Dimension formulas for the moment-map fibre and exhaustive checks of the
//! inequalities built on them.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::quiver::{DimVector, Quiver};
use crate::simple::has_property_p;
use crate::strata::{enumerate_top_types, tau_min, z_sequence, SemisimpleType, TopType, DEFAULT_TOP_TYPE_CAP};

/// Renders an integer as a JSON number when it fits in `i64`, else as a
/// decimal string.
pub fn big_json(x: &BigInt) -> Value {
    match i64::try_from(x) {
        Ok(v) => json!(v),
        Err(_) => json!(x.to_string()),
    }
}

fn big(x: impl Into<BigInt>) -> BigInt {
    x.into()
}

fn euler_big(q: &Quiver, d: &[BigInt], e: &[BigInt]) -> BigInt {
    let diag: BigInt = d.iter().zip(e).map(|(x, y)| x * y).sum();
    let off: BigInt = q.arrows().iter().map(|a| &d[a.src] * &e[a.tgt]).sum();
    diag - off
}

fn as_big(d: &DimVector) -> Vec<BigInt> {
    d.entries().iter().map(|&x| big(x)).collect()
}

/// `1 − ⟨d,d⟩`.
fn one_minus_self(q: &Quiver, d: &DimVector) -> BigInt {
    let v = as_big(d);
    big(1) - euler_big(q, &v, &v)
}

fn checked(q: &Quiver, d: &DimVector) -> Result<()> {
    d.check_against(q)?;
    d.check_nonzero()
}

/// `d·d − 1 + 2(1 − ⟨d,d⟩)`.
pub fn dim_x(q: &Quiver, d: &DimVector) -> Result<BigInt> {
    checked(q, d)?;
    Ok(big(d.dot_self()) - 1 + 2 * one_minus_self(q, d))
}

/// `2(1 − ⟨d,d⟩)`.
pub fn dim_m(q: &Quiver, d: &DimVector) -> Result<BigInt> {
    checked(q, d)?;
    Ok(2 * one_minus_self(q, d))
}

/// `2 Σ_a d_{s(a)} d_{t(a)}`, the dimension of representations of the double.
pub fn dim_r_double(q: &Quiver, d: &DimVector) -> Result<BigInt> {
    checked(q, d)?;
    let v = as_big(d);
    Ok(2 * q.arrows().iter().map(|a| &v[a.src] * &v[a.tgt]).sum::<BigInt>())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dimensions {
    pub dim_x: BigInt,
    pub dim_m: BigInt,
    pub dim_r_double: BigInt,
    /// The formulas carry their geometric meaning only under property (P).
    pub property_p: bool,
}

impl Dimensions {
    pub fn of(q: &Quiver, d: &DimVector) -> Result<Self> {
        Ok(Dimensions {
            dim_x: dim_x(q, d)?,
            dim_m: dim_m(q, d)?,
            dim_r_double: dim_r_double(q, d)?,
            property_p: has_property_p(q, d)?,
        })
    }

    /// `dim_M + dim_R̄ = 2 dim_X`.
    pub fn sum_identity_holds(&self) -> bool {
        &self.dim_m + &self.dim_r_double == 2 * &self.dim_x
    }

    pub fn to_json(&self) -> Value {
        json!({
            "dim_X": big_json(&self.dim_x),
            "dim_M": big_json(&self.dim_m),
            "dim_R_double": big_json(&self.dim_r_double),
            "property_P": self.property_p,
        })
    }
}

/// Upper bound on the dimension of the locus of modules with the given
/// top-type over the simples of dimensions `class_dims`.
pub fn cb_bound(q: &Quiver, class_dims: &[DimVector], top: &TopType, d: &DimVector) -> Result<BigInt> {
    checked(q, d)?;
    let mut total = vec![0u64; q.num_vertices()];
    for &(j, m) in &top.steps {
        let c = class_dims
            .get(j)
            .ok_or_else(|| Error::IncompatibleTopType(format!("class {} out of range", j + 1)))?;
        c.check_against(q)?;
        for (t, &x) in total.iter_mut().zip(c.entries()) {
            *t += u64::from(m) * u64::from(x);
        }
    }
    if total.iter().zip(d.entries()).any(|(&t, &x)| t != u64::from(x)) {
        return Err(Error::IncompatibleTopType("top type does not sum to the dimension vector".into()));
    }
    let z = z_sequence(top, class_dims, q)?;
    let class_terms: Vec<BigInt> = class_dims.iter().map(|c| one_minus_self(q, c)).collect();
    let mut b = big(d.dot_self()) - 1 + one_minus_self(q, d);
    for (&(j, m), &zs) in top.steps.iter().zip(&z) {
        let m = big(m);
        b += &m * big(zs);
        b -= &m * &m * &class_terms[j];
    }
    Ok(b)
}

/// Left-hand side of the loop-quiver lemma for `S_g`, dimension `d` and the
/// multiplicity sequence `ms`.
pub fn loop_lemma_lhs(g: u32, d: u32, ms: &[u32]) -> BigInt {
    let (g, dd) = (big(g), big(d));
    let euler = (big(1) - &g) * &dd * &dd;
    let chain: BigInt = ms.windows(2).map(|w| big(w[0]) * big(w[1])).sum();
    let squares: BigInt = ms.iter().map(|&m| big(m) * big(m)).sum();
    let threshold = 2 * (big(1) - &euler - &g);
    let bound = &dd * &dd - 1 + (big(1) - &euler) + chain - &g * squares;
    threshold - bound
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoopLemmaRow {
    pub composition: Vec<u32>,
    pub lhs: BigInt,
    /// `lhs − (d − 1)`.
    pub margin: BigInt,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoopLemmaReport {
    pub g: u32,
    pub d: u32,
    pub rows: Vec<LoopLemmaRow>,
    pub min_margin: BigInt,
    pub equality_set: Vec<Vec<u32>>,
    pub verdict: bool,
}

impl LoopLemmaReport {
    pub fn to_json(&self) -> Value {
        json!({
            "g": self.g,
            "d": self.d,
            "rows": self.rows.iter().map(|r| json!({
                "composition": r.composition,
                "lhs": big_json(&r.lhs),
                "margin": big_json(&r.margin),
            })).collect::<Vec<_>>(),
            "min_margin": big_json(&self.min_margin),
            "equality_set": self.equality_set,
            "verdict": self.verdict,
        })
    }
}

/// Every composition of `d`, largest first part first.
pub fn compositions(d: u32) -> Vec<Vec<u32>> {
    fn rec(rem: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if rem == 0 {
            out.push(cur.clone());
            return;
        }
        for m in (1..=rem).rev() {
            cur.push(m);
            rec(rem - m, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(d, &mut Vec::new(), &mut out);
    out
}

pub fn check_loop_lemma(g: u32, d: u32) -> Result<LoopLemmaReport> {
    if g < 2 || d < 2 {
        return Err(Error::Precondition("the loop lemma needs g >= 2 and d >= 2".into()));
    }
    let floor = big(d) - 1;
    let rows: Vec<LoopLemmaRow> = compositions(d)
        .into_iter()
        .map(|ms| {
            let lhs = loop_lemma_lhs(g, d, &ms);
            let margin = &lhs - &floor;
            LoopLemmaRow { composition: ms, lhs, margin }
        })
        .collect();
    let min_margin = rows.iter().map(|r| r.margin.clone()).min().expect("d >= 1 has a composition");
    let equality_set = rows.iter().filter(|r| r.margin.is_zero()).map(|r| r.composition.clone()).collect();
    Ok(LoopLemmaReport { g, d, verdict: !min_margin.is_negative(), rows, min_margin, equality_set })
}

/// Remainder term of the total-negativity lemma and its lower bound.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Remainder {
    pub r1: usize,
    pub r2: usize,
    /// `Σ_{i<j} r_ij d_i d_j − 2(r − 1)`.
    pub value: BigInt,
    /// `2(r₂ − 1)(r − 1) + r₁(r₁ − 1)/2`.
    pub lower: BigInt,
    pub holds: bool,
}

/// `q` sincere for `d`.
fn remainder(q: &Quiver, d: &DimVector) -> Remainder {
    let n = q.num_vertices();
    let counts = q.count_matrix();
    let v = as_big(d);
    let mut pairs = BigInt::zero();
    for i in 0..n {
        for j in i + 1..n {
            pairs += big(counts[i][j] as u64) * &v[i] * &v[j];
        }
    }
    let r = big(n as u64);
    let r1 = d.entries().iter().filter(|&&x| x == 1).count();
    let r2 = d.entries().iter().filter(|&&x| x >= 2).count();
    let value = pairs - 2 * (&r - 1);
    let lower = 2 * (big(r2 as u64) - 1) * (&r - 1) + big((r1 * r1.saturating_sub(1) / 2) as u64);
    Remainder { r1, r2, holds: value >= lower, value, lower }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundReport {
    pub quiver_hash: String,
    pub d: DimVector,
    pub tau: SemisimpleType,
    pub bounds: Vec<(TopType, BigInt)>,
    pub max_bound: BigInt,
    pub threshold: BigInt,
    pub margin: BigInt,
    pub verdict: bool,
    pub remainder: Remainder,
    /// `threshold − bound = Σ_i loop-lemma LHS_i + remainder` on every top type.
    pub decomposition_exact: bool,
}

impl BoundReport {
    /// `q` is the quiver the report was computed on (the support quiver).
    pub fn to_json(&self, q: &Quiver) -> Value {
        json!({
            "quiver_hash": self.quiver_hash,
            "d": self.d.to_json(q),
            "tau": self.tau.to_json(q),
            "bounds": self.bounds.iter().map(|(t, b)| json!({"top_type": t.to_json(), "bound": big_json(b)})).collect::<Vec<_>>(),
            "max_bound": big_json(&self.max_bound),
            "threshold": big_json(&self.threshold),
            "margin": big_json(&self.margin),
            "verdict": self.verdict,
            "remainder": {
                "r1": self.remainder.r1,
                "r2": self.remainder.r2,
                "value": big_json(&self.remainder.value),
                "lower": big_json(&self.remainder.lower),
                "holds": self.remainder.holds,
            },
            "decomposition_exact": self.decomposition_exact,
        })
    }
}

/// Maximizes `cb_bound` over all top-types compatible with `τ_min` and
/// compares against `2(1 − ⟨d,d⟩ − Σ g_i)`, on the support of `d`.
/// Returns the report together with the support quiver it refers to.
pub fn check_totneg_lemma(q: &Quiver, d: &DimVector) -> Result<(BoundReport, Quiver)> {
    check_totneg_lemma_capped(q, d, DEFAULT_TOP_TYPE_CAP)
}

pub fn check_totneg_lemma_capped(q: &Quiver, d: &DimVector, cap: usize) -> Result<(BoundReport, Quiver)> {
    checked(q, d)?;
    if !has_property_p(q, d)? {
        return Err(Error::Precondition("(Q, d) does not have property (P)".into()));
    }
    if d.is_ones_on_support() {
        return Err(Error::Precondition("the lemma excludes d = 1 on the support".into()));
    }
    let supp = d.support();
    let sq = q.full_subquiver(&supp);
    let sd = d.restrict(&supp);
    let tau = tau_min(&sq, &sd)?;
    let class_dims = tau.class_dims();
    let loops: u64 = (0..sq.num_vertices()).map(|i| sq.loops(i) as u64).sum();
    let threshold = 2 * (one_minus_self(&sq, &sd) - big(loops));
    let rem = remainder(&sq, &sd);

    // tau_min classes are the vertex simples, one per support vertex
    let class_vertex: Vec<usize> =
        class_dims.iter().map(|c| c.support()[0]).collect();
    let mut bounds = Vec::new();
    let mut exact = true;
    for top in enumerate_top_types(&tau, cap)? {
        let b = cb_bound(&sq, &class_dims, &top, &sd)?;
        let per_class = top.per_class(class_dims.len());
        let loop_sum: BigInt = per_class
            .iter()
            .enumerate()
            .map(|(j, ms)| {
                let v = class_vertex[j];
                loop_lemma_lhs(sq.loops(v) as u32, sd.entries()[v], ms)
            })
            .sum();
        exact &= &threshold - &b == loop_sum + &rem.value;
        bounds.push((top, b));
    }
    let max_bound: BigInt = bounds.iter().map(|(_, b)| b.clone()).max().expect("at least one top type");
    let margin: BigInt = &threshold - &max_bound;
    let report = BoundReport {
        quiver_hash: sq.canonical_hash(),
        d: sd,
        tau,
        bounds,
        verdict: margin.is_positive(),
        max_bound,
        threshold,
        margin,
        remainder: rem,
        decomposition_exact: exact,
    };
    Ok((report, sq))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LedgerRow {
    pub m: u32,
    /// `dim_M + dim_R̄ + (m − 1) dim_X`.
    pub lhs: BigInt,
    /// `(m + 1) dim_X`.
    pub rhs: BigInt,
    pub holds: bool,
    pub equality: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MustataLedger {
    pub dims: Dimensions,
    pub identity_exact: bool,
    pub rows: Vec<LedgerRow>,
    pub verdict: bool,
}

impl MustataLedger {
    pub fn to_json(&self) -> Value {
        json!({
            "dimensions": self.dims.to_json(),
            "identity_exact": self.identity_exact,
            "rows": self.rows.iter().map(|r| json!({
                "m": r.m,
                "lhs": big_json(&r.lhs),
                "rhs": big_json(&r.rhs),
                "holds": r.holds,
                "equality": r.equality,
            })).collect::<Vec<_>>(),
            "verdict": self.verdict,
        })
    }
}

/// Replays the jet-dimension arithmetic for `1 ≤ m ≤ m_max`.
pub fn mustata_ledger(q: &Quiver, d: &DimVector, m_max: u32) -> Result<MustataLedger> {
    let dims = Dimensions::of(q, d)?;
    let identity_exact = dims.sum_identity_holds();
    let rows: Vec<LedgerRow> = (1..=m_max)
        .map(|m| {
            let lhs = &dims.dim_m + &dims.dim_r_double + big(m - 1) * &dims.dim_x;
            let rhs = big(m + 1) * &dims.dim_x;
            LedgerRow { m, holds: lhs <= rhs, equality: lhs == rhs, lhs, rhs }
        })
        .collect();
    let verdict = identity_exact && rows.iter().all(|r| r.holds);
    Ok(MustataLedger { dims, identity_exact, rows, verdict })
}
