//! Quivers and dimension vectors.
//!
//! A [`Quiver`] stores its vertices in file order and its arrows as index
//! pairs into that order. Loops and parallel arrows are allowed. A
//! [`DimVector`] is a plain vector aligned with the vertex order; the JSON
//! form keyed by vertex name is produced on demand.

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Arrow {
    pub src: usize,
    pub tgt: usize,
}

impl Arrow {
    pub fn is_loop(&self) -> bool {
        self.src == self.tgt
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Quiver {
    vertices: Vec<String>,
    arrows: Vec<Arrow>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ArrowJson {
    src: String,
    tgt: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct QuiverJson {
    vertices: Vec<String>,
    arrows: Vec<ArrowJson>,
}

impl Quiver {
    /// Builds a quiver from vertex names and `(source, target)` index pairs.
    pub fn new(vertices: Vec<String>, arrows: Vec<(usize, usize)>) -> Result<Self> {
        let mut seen = HashSet::new();
        for v in &vertices {
            if !seen.insert(v.as_str()) {
                return Err(Error::InvalidQuiver(format!("duplicate vertex id `{v}`")));
            }
        }
        let n = vertices.len();
        let arrows = arrows
            .into_iter()
            .map(|(src, tgt)| {
                if src >= n || tgt >= n {
                    Err(Error::InvalidQuiver(format!(
                        "arrow ({src},{tgt}) references a vertex outside 0..{n}"
                    )))
                } else {
                    Ok(Arrow { src, tgt })
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Quiver { vertices, arrows })
    }

    /// Quiver on vertices named `"1"`, …, `"n"`.
    pub fn with_numbered_vertices(n: usize, arrows: Vec<(usize, usize)>) -> Result<Self> {
        Self::new((1..=n).map(|i| i.to_string()).collect(), arrows)
    }

    /// Builds a quiver from loop counts per vertex and arrow counts between
    /// vertex pairs, orienting every non-loop arrow from the smaller to the
    /// larger index.
    pub fn from_counts(loops: &[usize], between: &[((usize, usize), usize)]) -> Result<Self> {
        let mut arrows = Vec::new();
        for (i, &g) in loops.iter().enumerate() {
            arrows.extend(std::iter::repeat_n((i, i), g));
        }
        for &((i, j), k) in between {
            let (a, b) = if i <= j { (i, j) } else { (j, i) };
            arrows.extend(std::iter::repeat_n((a, b), k));
        }
        Self::with_numbered_vertices(loops.len(), arrows)
    }

    /// One vertex with `g` loops.
    pub fn g_loop(g: usize) -> Self {
        Self::from_counts(&[g], &[]).expect("valid")
    }

    /// One vertex with one loop.
    pub fn jordan() -> Self {
        Self::g_loop(1)
    }

    /// `1 -> 2`.
    pub fn a2() -> Self {
        Self::with_numbered_vertices(2, vec![(0, 1)]).expect("valid")
    }

    /// Two vertices, two parallel arrows.
    pub fn kronecker() -> Self {
        Self::with_numbered_vertices(2, vec![(0, 1), (0, 1)]).expect("valid")
    }

    /// Oriented cycle on `n >= 1` vertices.
    pub fn cycle(n: usize) -> Self {
        Self::with_numbered_vertices(n, (0..n).map(|i| (i, (i + 1) % n)).collect())
            .expect("valid")
    }

    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    pub fn arrows(&self) -> &[Arrow] {
        &self.arrows
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_arrows(&self) -> usize {
        self.arrows.len()
    }

    pub fn vertex_index(&self, name: &str) -> Option<usize> {
        self.vertices.iter().position(|v| v == name)
    }

    pub fn loops(&self, i: usize) -> usize {
        self.arrows.iter().filter(|a| a.src == i && a.tgt == i).count()
    }

    /// Number of arrows joining `i` and `j` in either direction (`i != j`).
    pub fn arrows_between(&self, i: usize, j: usize) -> usize {
        debug_assert_ne!(i, j);
        self.arrows
            .iter()
            .filter(|a| (a.src == i && a.tgt == j) || (a.src == j && a.tgt == i))
            .count()
    }

    /// Symmetric matrix with loop counts on the diagonal and unordered arrow
    /// counts off the diagonal.
    pub fn count_matrix(&self) -> Vec<Vec<usize>> {
        let n = self.num_vertices();
        let mut m = vec![vec![0; n]; n];
        for a in &self.arrows {
            if a.is_loop() {
                m[a.src][a.src] += 1;
            } else {
                m[a.src][a.tgt] += 1;
                m[a.tgt][a.src] += 1;
            }
        }
        m
    }

    /// Same quiver with arrow `k` reversed.
    pub fn reversed_arrow(&self, k: usize) -> Self {
        let mut q = self.clone();
        let a = &mut q.arrows[k];
        std::mem::swap(&mut a.src, &mut a.tgt);
        q
    }

    /// Full subquiver on the given vertices (in the given order).
    pub fn full_subquiver(&self, keep: &[usize]) -> Self {
        let pos: HashMap<usize, usize> = keep.iter().enumerate().map(|(k, &v)| (v, k)).collect();
        let arrows = self
            .arrows
            .iter()
            .filter_map(|a| Some(Arrow { src: *pos.get(&a.src)?, tgt: *pos.get(&a.tgt)? }))
            .collect();
        Quiver { vertices: keep.iter().map(|&v| self.vertices[v].clone()).collect(), arrows }
    }

    /// Connected components of the underlying undirected graph restricted to
    /// `subset`, each sorted.
    pub fn components_within(&self, subset: &[usize]) -> Vec<Vec<usize>> {
        let inside: HashSet<usize> = subset.iter().copied().collect();
        let mut adj: HashMap<usize, Vec<usize>> = HashMap::new();
        for a in &self.arrows {
            if !a.is_loop() && inside.contains(&a.src) && inside.contains(&a.tgt) {
                adj.entry(a.src).or_default().push(a.tgt);
                adj.entry(a.tgt).or_default().push(a.src);
            }
        }
        let mut seen = HashSet::new();
        let mut comps = Vec::new();
        for &start in subset {
            if !seen.insert(start) {
                continue;
            }
            let mut comp = vec![start];
            let mut stack = vec![start];
            while let Some(v) = stack.pop() {
                for &w in adj.get(&v).map(Vec::as_slice).unwrap_or(&[]) {
                    if seen.insert(w) {
                        comp.push(w);
                        stack.push(w);
                    }
                }
            }
            comp.sort_unstable();
            comps.push(comp);
        }
        comps
    }

    pub fn is_connected(&self) -> bool {
        let all: Vec<usize> = (0..self.num_vertices()).collect();
        self.components_within(&all).len() <= 1
    }

    /// SHA-256 of the sorted vertex list and sorted arrow multiset (by
    /// vertex name, orientation kept).
    pub fn canonical_hash(&self) -> String {
        let mut verts: Vec<&str> = self.vertices.iter().map(String::as_str).collect();
        verts.sort_unstable();
        let mut arrows: Vec<(&str, &str)> = self
            .arrows
            .iter()
            .map(|a| (self.vertices[a.src].as_str(), self.vertices[a.tgt].as_str()))
            .collect();
        arrows.sort_unstable();
        let mut h = Sha256::new();
        for v in verts {
            h.update(v.as_bytes());
            h.update([0u8]);
        }
        h.update([1u8]);
        for (s, t) in arrows {
            h.update(s.as_bytes());
            h.update([0u8]);
            h.update(t.as_bytes());
            h.update([0u8]);
        }
        hex::encode(h.finalize())
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let raw: QuiverJson = serde_json::from_str(text).map_err(|e| {
            Error::Parse(format!("quiver schema: {e} (line {}, column {})", e.line(), e.column()))
        })?;
        let index: HashMap<&str, usize> =
            raw.vertices.iter().enumerate().map(|(i, v)| (v.as_str(), i)).collect();
        let mut arrows = Vec::with_capacity(raw.arrows.len());
        for (k, a) in raw.arrows.iter().enumerate() {
            let lookup = |name: &str, field: &str| {
                index.get(name).copied().ok_or_else(|| {
                    Error::InvalidQuiver(format!("arrows[{k}].{field}: unknown vertex `{name}`"))
                })
            };
            arrows.push((lookup(&a.src, "src")?, lookup(&a.tgt, "tgt")?));
        }
        Quiver::new(raw.vertices, arrows)
    }

    pub fn to_json(&self) -> Value {
        let raw = QuiverJson {
            vertices: self.vertices.clone(),
            arrows: self
                .arrows
                .iter()
                .map(|a| ArrowJson {
                    src: self.vertices[a.src].clone(),
                    tgt: self.vertices[a.tgt].clone(),
                })
                .collect(),
        };
        serde_json::to_value(raw).expect("serializable")
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string(&self.to_json()).expect("serializable")
    }
}

/// Non-negative integer per vertex, aligned with the quiver's vertex order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DimVector(pub Vec<u32>);

impl DimVector {
    pub fn new(entries: Vec<u32>) -> Self {
        DimVector(entries)
    }

    pub fn zero(n: usize) -> Self {
        DimVector(vec![0; n])
    }

    pub fn unit(n: usize, i: usize) -> Self {
        let mut v = vec![0; n];
        v[i] = 1;
        DimVector(v)
    }

    pub fn ones(n: usize) -> Self {
        DimVector(vec![1; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn entries(&self) -> &[u32] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&x| x == 0)
    }

    pub fn support(&self) -> Vec<usize> {
        self.0.iter().enumerate().filter(|(_, &x)| x > 0).map(|(i, _)| i).collect()
    }

    /// Entries on the given vertices, in order.
    pub fn restrict(&self, keep: &[usize]) -> DimVector {
        DimVector(keep.iter().map(|&i| self.0[i]).collect())
    }

    /// True when every entry on the support equals one.
    pub fn is_ones_on_support(&self) -> bool {
        !self.is_zero() && self.0.iter().all(|&x| x <= 1)
    }

    /// `d · d = Σ d_i²`.
    pub fn dot_self(&self) -> i64 {
        self.0.iter().map(|&x| i64::from(x) * i64::from(x)).sum()
    }

    pub fn as_i64(&self) -> Vec<i64> {
        self.0.iter().map(|&x| i64::from(x)).collect()
    }

    pub fn scaled(&self, m: u32) -> DimVector {
        DimVector(self.0.iter().map(|&x| x * m).collect())
    }

    pub fn check_against(&self, q: &Quiver) -> Result<()> {
        if self.len() != q.num_vertices() {
            return Err(Error::DimMismatch { expected: q.num_vertices(), got: self.len() });
        }
        Ok(())
    }

    pub fn check_nonzero(&self) -> Result<()> {
        if self.is_zero() {
            Err(Error::ZeroDimension)
        } else {
            Ok(())
        }
    }

    /// `{"v1": 2, "v2": 1}` keyed by the quiver's vertex names.
    pub fn to_json(&self, q: &Quiver) -> Value {
        let mut m = Map::new();
        for (name, &x) in q.vertices().iter().zip(&self.0) {
            m.insert(name.clone(), Value::from(x));
        }
        Value::Object(m)
    }

    /// Parses the keyed JSON form; keys must be exactly the quiver's vertices.
    pub fn from_json(q: &Quiver, value: &Value) -> Result<Self> {
        let obj = value
            .as_object()
            .ok_or_else(|| Error::Parse("dimension vector must be a JSON object".into()))?;
        let mut entries = vec![None; q.num_vertices()];
        for (k, v) in obj {
            let i = q.vertex_index(k).ok_or_else(|| Error::UnknownVertex(k.clone()))?;
            let x = v
                .as_u64()
                .and_then(|x| u32::try_from(x).ok())
                .ok_or_else(|| Error::Parse(format!("entry for `{k}` must be a non-negative integer")))?;
            entries[i] = Some(x);
        }
        let entries = entries
            .into_iter()
            .enumerate()
            .map(|(i, x)| {
                x.ok_or_else(|| Error::Parse(format!("missing entry for vertex `{}`", q.vertices()[i])))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(DimVector(entries))
    }

    /// Parses `v1=2,v2=1` (unnamed vertices default to 0) or positional `2,1`.
    pub fn parse_text(q: &Quiver, text: &str) -> Result<Self> {
        let parts: Vec<&str> = text.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
        let parse_num = |s: &str| {
            s.parse::<u32>().map_err(|_| Error::Parse(format!("`{s}` is not a non-negative integer")))
        };
        if parts.iter().any(|p| p.contains('=')) {
            let mut named = BTreeMap::new();
            for p in parts {
                let (k, v) = p
                    .split_once('=')
                    .ok_or_else(|| Error::Parse(format!("mixed named and positional entries: `{p}`")))?;
                let i = q.vertex_index(k.trim()).ok_or_else(|| Error::UnknownVertex(k.trim().into()))?;
                if named.insert(i, parse_num(v.trim())?).is_some() {
                    return Err(Error::Parse(format!("vertex `{}` given twice", k.trim())));
                }
            }
            let mut entries = vec![0; q.num_vertices()];
            for (i, x) in named {
                entries[i] = x;
            }
            Ok(DimVector(entries))
        } else {
            let entries = parts.into_iter().map(parse_num).collect::<Result<Vec<_>>>()?;
            let d = DimVector(entries);
            d.check_against(q)?;
            Ok(d)
        }
    }
}

impl std::fmt::Display for DimVector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(")?;
        for (k, x) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, ")")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const S2: &str = r#"{"vertices": ["v"], "arrows": [{"src":"v","tgt":"v"}, {"src":"v","tgt":"v"}]}"#;

    #[test]
    fn parses_minimal_g_loop_file() {
        let q = Quiver::from_json_str(S2).unwrap();
        assert_eq!(q.num_vertices(), 1);
        assert_eq!(q.loops(0), 2);
    }

    #[test]
    fn duplicate_vertex_rejected() {
        let err = Quiver::from_json_str(r#"{"vertices":["a","a"],"arrows":[]}"#).unwrap_err();
        assert!(matches!(err, Error::InvalidQuiver(_)));
    }

    #[test]
    fn unknown_endpoint_rejected() {
        let err =
            Quiver::from_json_str(r#"{"vertices":["a"],"arrows":[{"src":"a","tgt":"b"}]}"#).unwrap_err();
        assert!(err.to_string().contains("arrows[0].tgt"));
    }

    #[test]
    fn schema_errors_carry_position() {
        let err = Quiver::from_json_str("{\"vertices\": [\"a\"],\n \"arrow\": []}").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
    }

    #[test]
    fn json_round_trip_is_bit_exact() {
        let q = Quiver::from_json_str(S2).unwrap();
        assert_eq!(
            q.to_json_string(),
            r#"{"vertices":["v"],"arrows":[{"src":"v","tgt":"v"},{"src":"v","tgt":"v"}]}"#
        );
    }

    #[test]
    fn positional_dims_follow_file_order() {
        let q = Quiver::from_json_str(r#"{"vertices":["b","a"],"arrows":[{"src":"b","tgt":"a"}]}"#).unwrap();
        assert_eq!(DimVector::parse_text(&q, "2,1").unwrap().0, vec![2, 1]);
        assert_eq!(DimVector::parse_text(&q, "a=2").unwrap().0, vec![0, 2]);
        assert!(matches!(DimVector::parse_text(&q, "c=1"), Err(Error::UnknownVertex(_))));
        assert!(matches!(DimVector::parse_text(&q, "1,1,1"), Err(Error::DimMismatch { .. })));
    }

    #[test]
    fn dim_json_requires_every_vertex() {
        let q = Quiver::a2();
        let d = DimVector::new(vec![2, 1]);
        assert_eq!(DimVector::from_json(&q, &d.to_json(&q)).unwrap(), d);
        let partial: Value = serde_json::from_str(r#"{"1": 1}"#).unwrap();
        assert!(DimVector::from_json(&q, &partial).is_err());
    }

    #[test]
    fn hash_ignores_listing_order_but_not_orientation() {
        let a = Quiver::from_json_str(
            r#"{"vertices":["x","y"],"arrows":[{"src":"x","tgt":"y"},{"src":"y","tgt":"y"}]}"#,
        )
        .unwrap();
        let b = Quiver::from_json_str(
            r#"{"vertices":["y","x"],"arrows":[{"src":"y","tgt":"y"},{"src":"x","tgt":"y"}]}"#,
        )
        .unwrap();
        assert_eq!(a.canonical_hash(), b.canonical_hash());
        assert_ne!(a.canonical_hash(), a.reversed_arrow(0).canonical_hash());
    }

    #[test]
    fn derived_counts() {
        let q = Quiver::from_counts(&[2, 0, 1], &[((0, 1), 3), ((2, 0), 1)]).unwrap();
        assert_eq!(q.loops(0), 2);
        assert_eq!(q.arrows_between(0, 1), 3);
        assert_eq!(q.arrows_between(2, 0), 1);
        assert_eq!(q.arrows_between(1, 2), 0);
        let sub = q.full_subquiver(&[0, 2]);
        assert_eq!(sub.num_arrows(), 4);
        assert_eq!(q.components_within(&[1, 2]).len(), 2);
    }
}
