//! Property (P) and the existence of simple preprojective modules.

use serde::{Deserialize, Serialize};

use crate::dynkin::{is_extended_dynkin, multiple_of};
use crate::error::Result;
use crate::forms::{is_totally_negative, weak_fundamental_region_contains};
use crate::graph::{bridges, is_two_edge_connected};
use crate::quiver::{DimVector, Quiver};

/// How the two-vertex exception in property (P) is read.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PReading {
    /// The exception fires only when the support is exactly two vertices
    /// joined by a single arrow and `d` is `(1,1)` there.
    #[default]
    TwoVertexSupport,
    /// The exception fires when any two support vertices joined by a single
    /// arrow both carry dimension one.
    AnyPair,
}

pub fn has_property_p(q: &Quiver, d: &DimVector) -> Result<bool> {
    has_property_p_with(q, d, PReading::TwoVertexSupport)
}

pub fn has_property_p_with(q: &Quiver, d: &DimVector, reading: PReading) -> Result<bool> {
    d.check_against(q)?;
    d.check_nonzero()?;
    if !is_totally_negative(q).totally_negative {
        return Ok(false);
    }
    let supp = d.support();
    let single = |i: usize, j: usize| q.arrows_between(i, j) == 1;
    let excluded = match reading {
        PReading::TwoVertexSupport => {
            supp.len() == 2 && single(supp[0], supp[1]) && d.entries()[supp[0]] == 1 && d.entries()[supp[1]] == 1
        }
        PReading::AnyPair => supp.iter().enumerate().any(|(k, &i)| {
            supp[k + 1..].iter().any(|&j| single(i, j) && d.entries()[i] == 1 && d.entries()[j] == 1)
        }),
    };
    Ok(!excluded)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Existence {
    True,
    False,
    Unknown,
}

/// Verdict plus the rule that produced it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SimplicityDecision {
    pub verdict: Existence,
    pub rule: &'static str,
}

impl SimplicityDecision {
    fn new(verdict: Existence, rule: &'static str) -> Self {
        SimplicityDecision { verdict, rule }
    }
}

/// Decides whether a simple `Π_Q`-module of dimension `d` exists, on the
/// cases that can be settled without the full root-system criterion.
///
/// The decision works on the full subquiver on `supp(d)`:
/// 1. disconnected support: no simple module;
/// 2. property (P): exists;
/// 3. `d` is one on its support: exists iff the support is 2-edge-connected;
/// 4. `(d, ε_i) ≤ 0` on the support: exists unless one of the three
///    exceptional shapes occurs (extended Dynkin with `d = mδ, m ≥ 2`; a
///    bridge with both endpoint dimensions one; a bridge with endpoint
///    dimension one on one side and `mδ, m ≥ 2` on an extended Dynkin other
///    side);
/// 5. otherwise unknown.
pub fn simple_module_exists(q: &Quiver, d: &DimVector) -> Result<SimplicityDecision> {
    d.check_against(q)?;
    d.check_nonzero()?;
    let supp = d.support();
    let sub = q.full_subquiver(&supp);
    let ds = d.restrict(&supp);
    if !sub.is_connected() {
        return Ok(SimplicityDecision::new(Existence::False, "disconnected-support"));
    }
    if has_property_p(&sub, &ds)? {
        return Ok(SimplicityDecision::new(Existence::True, "property-p"));
    }
    if ds.is_ones_on_support() {
        let verdict = if is_two_edge_connected(&sub)? { Existence::True } else { Existence::False };
        return Ok(SimplicityDecision::new(verdict, "unit-vector-two-edge-connectivity"));
    }
    if weak_fundamental_region_contains(&sub, &ds)? {
        if let Some(rule) = exceptional_case(&sub, &ds)? {
            return Ok(SimplicityDecision::new(Existence::False, rule));
        }
        return Ok(SimplicityDecision::new(Existence::True, "fundamental-region"));
    }
    Ok(SimplicityDecision::new(Existence::Unknown, "outside-decided-cases"))
}

fn is_dynkin_multiple(q: &Quiver, d: &DimVector) -> Result<bool> {
    Ok(match is_extended_dynkin(q)? {
        Some(delta) => multiple_of(d, &delta).is_some_and(|m| m >= 2),
        None => false,
    })
}

/// `q` is connected and `d` sincere on it.
fn exceptional_case(q: &Quiver, d: &DimVector) -> Result<Option<&'static str>> {
    if is_dynkin_multiple(q, d)? {
        return Ok(Some("extended-dynkin-multiple"));
    }
    let all: Vec<usize> = (0..q.num_vertices()).collect();
    for k in bridges(q)? {
        let a = q.arrows()[k];
        let (u, v) = (a.src, a.tgt);
        let (du, dv) = (d.entries()[u], d.entries()[v]);
        if du == 1 && dv == 1 {
            return Ok(Some("bridge-with-unit-ends"));
        }
        // sides of the bridge
        let rest = q.arrows().iter().enumerate().filter(|&(j, _)| j != k).map(|(_, a)| (a.src, a.tgt));
        let without = Quiver::new(q.vertices().to_vec(), rest.collect())?;
        let comps = without.components_within(&all);
        let side_of = |x: usize| comps.iter().find(|c| c.contains(&x)).expect("covered").clone();
        for (near, far) in [(u, v), (v, u)] {
            if d.entries()[near] != 1 {
                continue;
            }
            let far_side = side_of(far);
            if is_dynkin_multiple(&q.full_subquiver(&far_side), &d.restrict(&far_side))? {
                return Ok(Some("bridge-to-extended-dynkin-multiple"));
            }
        }
    }
    Ok(None)
}
