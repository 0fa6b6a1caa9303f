//! Exact point counts of moment-map fibres over `F_q[t]/(t^n)`.
//!
//! For fixed `x` the moment map is linear in `y`, so
//! `#μ⁻¹(0)(R) = Σ_x q^{k(x)}` where `q^{k(x)}` is the kernel size of the
//! linear system in `y`. Enumeration of the `x`-half is split into disjoint
//! index ranges; per-range exponent histograms are summed, so the result does
//! not depend on the split.

use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::bounds::{big_json, dim_r_double, dim_x};
use crate::error::{Error, Result};
use crate::quiver::{DimVector, Quiver};
use crate::ring::Ring;

pub const DEFAULT_BUDGET: u64 = 1 << 26;

/// One monomial `sign · x[x] · y[y]` of a moment-map component.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Term {
    pub sign: i8,
    pub x: usize,
    pub y: usize,
}

/// Components `μ_i = Σ_{t(a)=i} x_a y_a − Σ_{s(a)=i} y_a x_a`, one equation
/// per matrix entry. `x_a` is `d_t × d_s` and `y_a` is `d_s × d_t`, both
/// stored row-major after the blocks of earlier arrows.
#[derive(Debug, Clone)]
pub struct MomentSystem {
    dims: Vec<usize>,
    n_x: usize,
    n_y: usize,
    eq_offset: Vec<usize>,
    equations: Vec<Vec<Term>>,
}

impl MomentSystem {
    pub fn new(q: &Quiver, d: &DimVector) -> Result<Self> {
        d.check_against(q)?;
        d.check_nonzero()?;
        let dims: Vec<usize> = d.entries().iter().map(|&x| x as usize).collect();
        let arrows: Vec<(usize, usize)> = q.arrows().iter().map(|a| (a.src, a.tgt)).collect();
        let (mut x_offset, mut y_offset) = (Vec::new(), Vec::new());
        let mut n_x = 0;
        for &(s, t) in &arrows {
            x_offset.push(n_x);
            n_x += dims[s] * dims[t];
        }
        let mut n_y = 0;
        for &(s, t) in &arrows {
            y_offset.push(n_y);
            n_y += dims[s] * dims[t];
        }
        let mut eq_offset = Vec::new();
        let mut n_eq = 0;
        for &di in &dims {
            eq_offset.push(n_eq);
            n_eq += di * di;
        }
        let mut equations = vec![Vec::new(); n_eq];
        for (k, &(s, t)) in arrows.iter().enumerate() {
            let (ds, dt) = (dims[s], dims[t]);
            // x_a y_a into μ_t
            for r in 0..dt {
                for c in 0..dt {
                    for l in 0..ds {
                        equations[eq_offset[t] + r * dt + c].push(Term {
                            sign: 1,
                            x: x_offset[k] + r * ds + l,
                            y: y_offset[k] + l * dt + c,
                        });
                    }
                }
            }
            // y_a x_a out of μ_s
            for r in 0..ds {
                for c in 0..ds {
                    for l in 0..dt {
                        equations[eq_offset[s] + r * ds + c].push(Term {
                            sign: -1,
                            x: x_offset[k] + l * ds + c,
                            y: y_offset[k] + r * dt + l,
                        });
                    }
                }
            }
        }
        let sys = MomentSystem { dims, n_x, n_y, eq_offset, equations };
        debug_assert!(sys.trace_relation_holds());
        Ok(sys)
    }

    pub fn n_x(&self) -> usize {
        self.n_x
    }

    pub fn n_y(&self) -> usize {
        self.n_y
    }

    pub fn num_equations(&self) -> usize {
        self.equations.len()
    }

    pub fn equations(&self) -> &[Vec<Term>] {
        &self.equations
    }

    /// `Σ_i tr μ_i` cancels monomial by monomial.
    pub fn trace_relation_holds(&self) -> bool {
        let mut acc: HashMap<(usize, usize), i64> = HashMap::new();
        for (i, &di) in self.dims.iter().enumerate() {
            for r in 0..di {
                for t in &self.equations[self.eq_offset[i] + r * di + r] {
                    *acc.entry((t.x, t.y)).or_default() += i64::from(t.sign);
                }
            }
        }
        acc.values().all(|&v| v == 0)
    }

    fn accumulate(ring: &Ring, slot: &mut u32, sign: i8, v: u32) {
        *slot = if sign > 0 { ring.add(*slot, v) } else { ring.sub(*slot, v) };
    }

    /// Matrix of the linear map `y ↦ μ(x, y)`, `num_equations × n_y`.
    pub fn y_matrix(&self, ring: &Ring, x: &[u32], out: &mut [u32]) {
        out.fill(0);
        for (e, terms) in self.equations.iter().enumerate() {
            for t in terms {
                Self::accumulate(ring, &mut out[e * self.n_y + t.y], t.sign, x[t.x]);
            }
        }
    }

    /// Matrix of the linear map `x ↦ μ(x, y)`, `num_equations × n_x`.
    pub fn x_matrix(&self, ring: &Ring, y: &[u32], out: &mut [u32]) {
        out.fill(0);
        for (e, terms) in self.equations.iter().enumerate() {
            for t in terms {
                Self::accumulate(ring, &mut out[e * self.n_x + t.x], t.sign, y[t.y]);
            }
        }
    }

    pub fn evaluate(&self, ring: &Ring, x: &[u32], y: &[u32], out: &mut [u32]) {
        for (e, terms) in self.equations.iter().enumerate() {
            let mut v = 0;
            for t in terms {
                Self::accumulate(ring, &mut v, t.sign, ring.mul(x[t.x], y[t.y]));
            }
            out[e] = v;
        }
    }

    pub fn vanishes_at(&self, ring: &Ring, x: &[u32], y: &[u32]) -> bool {
        self.equations.iter().all(|terms| {
            let mut v = 0;
            for t in terms {
                Self::accumulate(ring, &mut v, t.sign, ring.mul(x[t.x], y[t.y]));
            }
            v == 0
        })
    }

    /// Rank over `F_q` of the Jacobian `[∂μ/∂x | ∂μ/∂y]` at a point of the
    /// residue field. `ring` must have `n = 1`.
    pub fn jacobian_rank(&self, ring: &Ring, x: &[u32], y: &[u32]) -> usize {
        let cols = self.n_x + self.n_y;
        let rows = self.num_equations();
        let mut jx = vec![0u32; rows * self.n_x];
        let mut jy = vec![0u32; rows * self.n_y];
        self.x_matrix(ring, y, &mut jx);
        self.y_matrix(ring, x, &mut jy);
        let mut j = Vec::with_capacity(rows * cols);
        for e in 0..rows {
            j.extend_from_slice(&jx[e * self.n_x..(e + 1) * self.n_x]);
            j.extend_from_slice(&jy[e * self.n_y..(e + 1) * self.n_y]);
        }
        cols - ring.kernel_exponent(&mut j, rows, cols) as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CountOptions {
    pub threads: usize,
    /// Maximum number of enumeration points.
    pub budget: u64,
}

impl Default for CountOptions {
    fn default() -> Self {
        let threads = std::thread::available_parallelism().map_or(1, |n| n.get());
        CountOptions { threads, budget: DEFAULT_BUDGET }
    }
}

impl CountOptions {
    pub fn with_threads(threads: usize) -> Self {
        CountOptions { threads: threads.max(1), ..Self::default() }
    }
}

fn grid_size(choices: &[Vec<u32>], budget: u64) -> Result<u64> {
    let mut total = BigUint::one();
    for c in choices {
        total *= c.len();
    }
    match total.to_u64() {
        Some(t) if t <= budget => Ok(t),
        _ => Err(Error::BudgetExceeded { needed: total.to_string(), budget }),
    }
}

/// Sums `f` over the product set `Π choices[j]` into a histogram with
/// `bins` entries. `make` builds one evaluator per worker, so evaluators
/// can own scratch buffers.
fn histogram<F, W>(choices: &[Vec<u32>], opts: CountOptions, bins: usize, make: F) -> Result<Vec<u64>>
where
    F: Fn() -> W + Sync,
    W: FnMut(&[u32]) -> Option<usize>,
{
    let total = grid_size(choices, opts.budget)?;
    let dims = choices.len();
    let chunk = (total / (opts.threads as u64 * 8)).max(4096);
    let chunks = total.div_ceil(chunk) as usize;
    let next = AtomicUsize::new(0);
    let result = Mutex::new(vec![0u64; bins]);
    let work = || {
        let mut eval = make();
        let mut local = vec![0u64; bins];
        let mut digits = vec![0usize; dims];
        let mut point = vec![0u32; dims];
        loop {
            let c = next.fetch_add(1, Ordering::Relaxed);
            if c >= chunks {
                break;
            }
            let start = c as u64 * chunk;
            let end = (start + chunk).min(total);
            // mixed-radix decode, first coordinate fastest
            let mut rest = start;
            for j in 0..dims {
                let len = choices[j].len() as u64;
                digits[j] = (rest % len) as usize;
                rest /= len;
                point[j] = choices[j][digits[j]];
            }
            for _ in start..end {
                if let Some(k) = eval(&point) {
                    local[k] += 1;
                }
                for j in 0..dims {
                    digits[j] += 1;
                    if digits[j] < choices[j].len() {
                        point[j] = choices[j][digits[j]];
                        break;
                    }
                    digits[j] = 0;
                    point[j] = choices[j][0];
                }
            }
        }
        let mut r = result.lock().expect("no worker panicked");
        for (a, b) in r.iter_mut().zip(local) {
            *a += b;
        }
    };
    if opts.threads <= 1 || chunks <= 1 {
        work();
    } else {
        std::thread::scope(|s| {
            for _ in 0..opts.threads.min(chunks) {
                s.spawn(work);
            }
        });
    }
    Ok(result.into_inner().expect("no worker panicked"))
}

fn weigh(hist: &[u64], q: u64) -> BigUint {
    let q = BigUint::from(q);
    hist.iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(k, &c)| BigUint::from(c) * q.pow(k as u32))
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "bilinear-kernel")]
    Kernel,
    #[serde(rename = "brute-force")]
    Brute,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Kernel => "bilinear-kernel",
            Method::Brute => "brute-force",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CountRecord {
    pub quiver_hash: String,
    pub d: DimVector,
    pub q: u64,
    pub n: usize,
    pub count: BigUint,
    /// `count / q^{n·dim_X}`.
    pub normalized: BigRational,
    pub method: Method,
    pub wall_seconds: f64,
}

impl CountRecord {
    pub(crate) fn from_count(
        q_: &Quiver,
        d: &DimVector,
        q: u64,
        n: usize,
        count: BigUint,
        method: Method,
        start: Instant,
    ) -> Result<Self> {
        let normalized = normalize(&count, q, n, &dim_x(q_, d)?);
        Ok(CountRecord {
            quiver_hash: q_.canonical_hash(),
            d: d.clone(),
            q,
            n,
            count,
            normalized,
            method,
            wall_seconds: start.elapsed().as_secs_f64(),
        })
    }

    /// Report without the timing field.
    pub fn to_json(&self, quiver: &Quiver) -> Value {
        json!({
            "quiver_hash": self.quiver_hash,
            "d": self.d.to_json(quiver),
            "q": self.q,
            "n": self.n,
            "count": self.count.to_string(),
            "normalized": rational_json(&self.normalized),
            "method": self.method.as_str(),
        })
    }
}

pub fn rational_json(r: &BigRational) -> Value {
    json!({"num": big_json(r.numer()), "den": big_json(r.denom())})
}

fn normalize(count: &BigUint, q: u64, n: usize, dim_x: &BigInt) -> BigRational {
    let c = BigRational::from_integer(BigInt::from(count.clone()));
    let e = dim_x * BigInt::from(n);
    let qq = BigInt::from(q);
    let scale = qq.pow(e.magnitude().to_u32().expect("small exponent"));
    if e >= BigInt::zero() {
        c / BigRational::from_integer(scale)
    } else {
        c * BigRational::from_integer(scale)
    }
}

/// `#μ⁻¹(0)(F_q[t]/(t^n))` with the chosen method.
pub fn count_moment_fiber(
    quiver: &Quiver,
    d: &DimVector,
    q: u64,
    n: usize,
    method: Method,
    opts: CountOptions,
) -> Result<CountRecord> {
    let start = Instant::now();
    let ring = Ring::new(q, n)?;
    let sys = MomentSystem::new(quiver, d)?;
    let count = match method {
        Method::Kernel => kernel_count(&sys, &ring, opts)?,
        Method::Brute => brute_count(&sys, &ring, opts)?,
    };
    CountRecord::from_count(quiver, d, q, n, count, method, start)
}

fn all_elements(ring: &Ring) -> Vec<u32> {
    (0..ring.size() as u32).collect()
}

fn kernel_count(sys: &MomentSystem, ring: &Ring, opts: CountOptions) -> Result<BigUint> {
    let choices = vec![all_elements(ring); sys.n_x];
    let (rows, cols) = (sys.num_equations(), sys.n_y);
    let bins = ring.n() * cols + 1;
    let hist = histogram(&choices, opts, bins, || {
        let mut buf = vec![0u32; rows * cols];
        move |x: &[u32]| {
            sys.y_matrix(ring, x, &mut buf);
            Some(ring.kernel_exponent(&mut buf, rows, cols) as usize)
        }
    })?;
    Ok(weigh(&hist, ring.q()))
}

fn brute_count(sys: &MomentSystem, ring: &Ring, opts: CountOptions) -> Result<BigUint> {
    let choices = vec![all_elements(ring); sys.n_x + sys.n_y];
    let n_x = sys.n_x;
    let hist = histogram(&choices, opts, 1, || {
        move |p: &[u32]| sys.vanishes_at(ring, &p[..n_x], &p[n_x..]).then_some(0)
    })?;
    Ok(BigUint::from(hist[0]))
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedSequence {
    pub records: Vec<CountRecord>,
    pub values: Vec<BigRational>,
    pub differences: Vec<BigRational>,
}

impl NormalizedSequence {
    pub fn strictly_increasing(&self) -> bool {
        self.differences.iter().all(|x| *x > BigRational::zero())
    }

    /// First differences positive and strictly shrinking.
    pub fn differences_contract(&self) -> bool {
        self.differences.windows(2).all(|w| w[1] < w[0])
    }
}

/// `a_n = count(n) / q^{n·dim_X}` for `n = 1..=n_max`, optionally through a
/// cache.
pub fn normalized_sequence(
    quiver: &Quiver,
    d: &DimVector,
    q: u64,
    n_max: usize,
    method: Method,
    opts: CountOptions,
    cache: Option<&crate::cache::CountCache>,
) -> Result<NormalizedSequence> {
    let mut records = Vec::new();
    for n in 1..=n_max {
        let rec = match cache {
            Some(c) => c.count_moment_fiber(quiver, d, q, n, method, opts)?,
            None => count_moment_fiber(quiver, d, q, n, method, opts)?,
        };
        records.push(rec);
    }
    let values: Vec<BigRational> = records.iter().map(|r| r.normalized.clone()).collect();
    let differences = values.windows(2).map(|w| &w[1] - &w[0]).collect();
    Ok(NormalizedSequence { records, values, differences })
}

/// Points of `μ⁻¹(0)(R_{q,m+1})` reducing to zero mod `t`.
pub fn count_fiber_over_origin(quiver: &Quiver, d: &DimVector, q: u64, m: usize, opts: CountOptions) -> Result<BigUint> {
    if m == 0 {
        return Err(Error::Precondition("jet order m must be at least 1".into()));
    }
    let ring = Ring::new(q, m + 1)?;
    let sys = MomentSystem::new(quiver, d)?;
    let lifted: Vec<u32> = (0..ring.q_pow(m) as u32).map(|a| ring.shift_up(a, 1)).collect();
    let choices = vec![lifted; sys.n_x];
    let (rows, cols) = (sys.num_equations(), sys.n_y);
    let bins = ring.n() * cols + 1;
    // y = t·y' with y' mod t^m: #{y'} = q^{k(tM)} counts each y q^{n_y} times
    let hist = histogram(&choices, opts, bins, || {
        let mut buf = vec![0u32; rows * cols];
        let r = &ring;
        let s = &sys;
        move |x: &[u32]| {
            s.y_matrix(r, x, &mut buf);
            for v in buf.iter_mut() {
                *v = r.shift_up(*v, 1);
            }
            Some(r.kernel_exponent(&mut buf, rows, cols) as usize - cols)
        }
    })?;
    Ok(weigh(&hist, q))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JetFiberCheck {
    pub m: usize,
    pub fiber: BigUint,
    /// `q^{dim R̄}` for `m = 1`, `q^{dim R̄}·count(n = m − 1)` otherwise.
    pub expected: BigUint,
    pub holds: bool,
}

impl JetFiberCheck {
    pub fn to_json(&self) -> Value {
        json!({
            "m": self.m,
            "fiber": self.fiber.to_string(),
            "expected": self.expected.to_string(),
            "holds": self.holds,
        })
    }
}

pub fn check_jet_fiber_lemma(quiver: &Quiver, d: &DimVector, q: u64, m: usize, opts: CountOptions) -> Result<JetFiberCheck> {
    let fiber = count_fiber_over_origin(quiver, d, q, m, opts)?;
    let r = dim_r_double(quiver, d)?.to_u32().expect("small dimension");
    let mut expected = BigUint::from(q).pow(r);
    if m >= 2 {
        expected *= count_moment_fiber(quiver, d, q, m - 1, Method::Kernel, opts)?.count;
    }
    Ok(JetFiberCheck { m, holds: fiber == expected, fiber, expected })
}

/// `F_q`-points of `μ⁻¹(0)` whose Jacobian rank is below `d·d − 1`.
pub fn singular_points(quiver: &Quiver, d: &DimVector, q: u64, opts: CountOptions) -> Result<Vec<(Vec<u32>, Vec<u32>)>> {
    let field = Ring::new(q, 1)?;
    let sys = MomentSystem::new(quiver, d)?;
    let choices = vec![all_elements(&field); sys.n_x + sys.n_y];
    grid_size(&choices, opts.budget)?;
    let full = sys.num_equations().saturating_sub(1);
    let n_x = sys.n_x;
    let found = Mutex::new(Vec::new());
    histogram(&choices, opts, 1, || {
        let (f, s, out) = (&field, &sys, &found);
        move |p: &[u32]| {
            let (x, y) = p.split_at(n_x);
            if s.vanishes_at(f, x, y) && s.jacobian_rank(f, x, y) < full {
                out.lock().expect("no worker panicked").push((x.to_vec(), y.to_vec()));
            }
            None
        }
    })?;
    let mut pts = found.into_inner().expect("no worker panicked");
    pts.sort();
    Ok(pts)
}

/// Points of `μ⁻¹(0)(R_{q,m+1})` whose reduction mod `t` is singular.
pub fn singular_jet_count(quiver: &Quiver, d: &DimVector, q: u64, m: usize, opts: CountOptions) -> Result<BigUint> {
    let ring = Ring::new(q, m + 1)?;
    let sys = MomentSystem::new(quiver, d)?;
    let (rows, cols) = (sys.num_equations(), sys.n_y);
    let mut total = BigUint::zero();
    for (px, py) in singular_points(quiver, d, q, opts)? {
        // x = p_x + t·x'
        let choices: Vec<Vec<u32>> = px
            .iter()
            .map(|&p| (0..ring.q_pow(m) as u32).map(|a| ring.add(p, ring.shift_up(a, 1))).collect())
            .collect();
        let hist = histogram(&choices, opts, ring.n() * cols + 1, || {
            let mut a = vec![0u32; rows * cols];
            let mut b = vec![0u32; rows];
            let (r, s, py) = (&ring, &sys, &py);
            move |x: &[u32]| {
                // y = p_y + t·y' solves M(x)·t·y' = −M(x)·p_y
                s.y_matrix(r, x, &mut a);
                for (e, be) in b.iter_mut().enumerate() {
                    let row = &a[e * cols..(e + 1) * cols];
                    *be = r.neg(row.iter().zip(py.iter()).fold(0, |acc, (&m, &y)| r.add(acc, r.mul(m, y))));
                }
                for v in a.iter_mut() {
                    *v = r.shift_up(*v, 1);
                }
                r.solve_exponent(&mut a, &mut b, rows, cols).map(|k| k as usize - cols)
            }
        })?;
        total += weigh(&hist, q);
    }
    Ok(total)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MustataDiagnostic {
    pub m: usize,
    pub counts: Vec<(u64, BigUint)>,
    /// Least-squares slope of `ln count` against `ln q`; not a certified
    /// dimension.
    pub estimate: Option<f64>,
    pub target: BigInt,
    pub strictly_below: Option<bool>,
}

impl MustataDiagnostic {
    pub fn to_json(&self) -> Value {
        json!({
            "heuristic": true,
            "m": self.m,
            "counts": self.counts.iter().map(|(q, c)| json!({"q": q, "count": c.to_string()})).collect::<Vec<_>>(),
            "estimate": self.estimate,
            "target": big_json(&self.target),
            "strictly_below": self.strictly_below,
        })
    }
}

pub fn mustata_diagnostic(
    quiver: &Quiver,
    d: &DimVector,
    q_list: &[u64],
    m: usize,
    opts: CountOptions,
) -> Result<MustataDiagnostic> {
    let counts = q_list
        .iter()
        .map(|&q| Ok((q, singular_jet_count(quiver, d, q, m, opts)?)))
        .collect::<Result<Vec<_>>>()?;
    let pts: Vec<(f64, f64)> = counts
        .iter()
        .filter(|(_, c)| !c.is_zero())
        .map(|(q, c)| ((*q as f64).ln(), c.to_f64().expect("finite").ln()))
        .collect();
    let estimate = match pts.len() {
        0 => None,
        1 => Some(pts[0].1 / pts[0].0),
        k => {
            let k = k as f64;
            let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
            let (mx, my) = (sx / k, sy / k);
            let num: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
            let den: f64 = pts.iter().map(|(x, _)| (x - mx).powi(2)).sum();
            Some(num / den)
        }
    };
    let target = BigInt::from(m as u64 + 1) * dim_x(quiver, d)?;
    let t = target.to_f64().expect("finite");
    let strictly_below = estimate.map(|e| e < t - 1e-9);
    Ok(MustataDiagnostic { m, counts, estimate, target, strictly_below })
}

/// Square matrices over a [`Ring`], row-major.
mod mat {
    use crate::ring::Ring;

    pub fn identity(k: usize) -> Vec<u32> {
        let mut m = vec![0; k * k];
        for i in 0..k {
            m[i * k + i] = 1;
        }
        m
    }

    pub fn mul(r: &Ring, a: &[u32], b: &[u32], rows: usize, inner: usize, cols: usize) -> Vec<u32> {
        let mut out = vec![0u32; rows * cols];
        for i in 0..rows {
            for l in 0..inner {
                let x = a[i * inner + l];
                if x == 0 {
                    continue;
                }
                for j in 0..cols {
                    out[i * cols + j] = r.add(out[i * cols + j], r.mul(x, b[l * cols + j]));
                }
            }
        }
        out
    }

    /// Gauss-Jordan with unit pivots; `None` when singular mod `t`.
    pub fn inverse(r: &Ring, a: &[u32], k: usize) -> Option<Vec<u32>> {
        let mut m = a.to_vec();
        let mut inv = identity(k);
        for c in 0..k {
            let p = (c..k).find(|&i| r.is_unit(m[i * k + c]))?;
            for j in 0..k {
                m.swap(c * k + j, p * k + j);
                inv.swap(c * k + j, p * k + j);
            }
            let u = r.inverse_of_unit(m[c * k + c]).expect("unit pivot");
            for j in 0..k {
                m[c * k + j] = r.mul(m[c * k + j], u);
                inv[c * k + j] = r.mul(inv[c * k + j], u);
            }
            for i in (0..k).filter(|&i| i != c) {
                let f = m[i * k + c];
                if f == 0 {
                    continue;
                }
                for j in 0..k {
                    m[i * k + j] = r.sub(m[i * k + j], r.mul(f, m[c * k + j]));
                    inv[i * k + j] = r.sub(inv[i * k + j], r.mul(f, inv[c * k + j]));
                }
            }
        }
        Some(inv)
    }
}

/// Admissible `(M_a, M_a^*)` for one arrow with the factors each vertex
/// product needs.
struct ArrowChoice {
    /// `I + M M^*` at the target.
    at_target: Vec<u32>,
    /// `(I + M^* M)^{-1}` at the source.
    at_source_inv: Vec<u32>,
}

/// Counts `(M_a, M_a^*)` over `R_{q,n}` with every `I + M_a M_a^*` and
/// `I + M_a^* M_a` invertible and, at every vertex `i`,
/// `Π_{t(a)=i} (I + M_a M_a^*) · Π_{s(a)=i} (I + M_a^* M_a)^{-1} = α_i I`,
/// both products taken along `order` (a permutation of the arrow indices).
pub fn count_multiplicative_fiber(
    quiver: &Quiver,
    d: &DimVector,
    q: u64,
    alpha: &[u64],
    n: usize,
    order: Option<&[usize]>,
    opts: CountOptions,
) -> Result<BigUint> {
    d.check_against(quiver)?;
    d.check_nonzero()?;
    let ring = Ring::new(q, n)?;
    if alpha.len() != quiver.num_vertices() {
        return Err(Error::DimMismatch { expected: quiver.num_vertices(), got: alpha.len() });
    }
    if alpha.iter().any(|&a| a % q == 0) {
        return Err(Error::Precondition("alpha must be non-zero mod q at every vertex".into()));
    }
    let arrows: Vec<(usize, usize)> = quiver.arrows().iter().map(|a| (a.src, a.tgt)).collect();
    let order: Vec<usize> = match order {
        Some(o) => {
            let mut sorted = o.to_vec();
            sorted.sort_unstable();
            if sorted != (0..arrows.len()).collect::<Vec<_>>() {
                return Err(Error::Precondition("arrow order must be a permutation of the arrows".into()));
            }
            o.to_vec()
        }
        None => (0..arrows.len()).collect(),
    };
    let dims: Vec<usize> = d.entries().iter().map(|&x| x as usize).collect();

    let mut per_arrow: Vec<Vec<ArrowChoice>> = Vec::new();
    for &(s, t) in &arrows {
        let (ds, dt) = (dims[s], dims[t]);
        let entries = 2 * ds * dt;
        let choices = vec![all_elements(&ring); entries];
        grid_size(&choices, opts.budget)?;
        let mut list = Vec::new();
        let mut digits = vec![0u32; entries];
        loop {
            let (m, ms) = digits.split_at(ds * dt);
            let mut a = mat::mul(&ring, m, ms, dt, ds, dt);
            let mut b = mat::mul(&ring, ms, m, ds, dt, ds);
            for i in 0..dt {
                a[i * dt + i] = ring.add(a[i * dt + i], 1);
            }
            for i in 0..ds {
                b[i * ds + i] = ring.add(b[i * ds + i], 1);
            }
            if mat::inverse(&ring, &a, dt).is_some() {
                if let Some(b_inv) = mat::inverse(&ring, &b, ds) {
                    list.push(ArrowChoice { at_target: a, at_source_inv: b_inv });
                }
            }
            let mut j = 0;
            while j < entries {
                digits[j] += 1;
                if u64::from(digits[j]) < ring.size() {
                    break;
                }
                digits[j] = 0;
                j += 1;
            }
            if j == entries {
                break;
            }
        }
        per_arrow.push(list);
    }

    let choices: Vec<Vec<u32>> = per_arrow.iter().map(|l| (0..l.len() as u32).collect()).collect();
    let targets: Vec<Vec<u32>> = alpha
        .iter()
        .zip(&dims)
        .map(|(&a, &k)| {
            let mut m = vec![0u32; k * k];
            for i in 0..k {
                m[i * k + i] = (a % q) as u32;
            }
            m
        })
        .collect();
    if choices.is_empty() {
        // no arrows: only the empty tuple, valid iff every α_i is one
        return Ok(BigUint::from(u32::from(alpha.iter().all(|&a| a % q == 1))));
    }
    let hist = histogram(&choices, opts, 1, || {
        let (r, pa, arrows, order, dims, targets) = (&ring, &per_arrow, &arrows, &order, &dims, &targets);
        move |pick: &[u32]| {
            for (i, &k) in dims.iter().enumerate() {
                let mut acc = mat::identity(k);
                for &a in order.iter().filter(|&&a| arrows[a].1 == i) {
                    acc = mat::mul(r, &acc, &pa[a][pick[a] as usize].at_target, k, k, k);
                }
                for &a in order.iter().filter(|&&a| arrows[a].0 == i) {
                    acc = mat::mul(r, &acc, &pa[a][pick[a] as usize].at_source_inv, k, k, k);
                }
                if acc != targets[i] {
                    return None;
                }
            }
            Some(0)
        }
    })?;
    Ok(BigUint::from(hist[0]))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dv(v: &[u32]) -> DimVector {
        DimVector::new(v.to_vec())
    }

    fn one_thread() -> CountOptions {
        CountOptions::with_threads(1)
    }

    fn count(q_: &Quiver, d: &[u32], q: u64, n: usize, m: Method) -> u64 {
        count_moment_fiber(q_, &dv(d), q, n, m, one_thread()).unwrap().count.to_u64().unwrap()
    }

    #[test]
    fn a2_closed_forms() {
        let a2 = Quiver::a2();
        for q in [2u64, 3] {
            let expected = [2 * q - 1, 3 * q * q - 2 * q, 4 * q.pow(3) - 3 * q * q];
            for (n, &e) in (1..=3).zip(&expected) {
                assert_eq!(count(&a2, &[1, 1], q, n, Method::Kernel), e);
                assert_eq!(count(&a2, &[1, 1], q, n, Method::Brute), e);
            }
        }
    }

    #[test]
    fn oracle_values() {
        // independent enumeration (plain coefficient-list arithmetic)
        assert_eq!(count(&Quiver::cycle(3), &[1, 1, 1], 2, 1, Method::Kernel), 28);
        assert_eq!(count(&Quiver::cycle(3), &[1, 1, 1], 2, 2, Method::Kernel), 592);
        assert_eq!(count(&Quiver::kronecker(), &[1, 1], 2, 1, Method::Kernel), 10);
        assert_eq!(count(&Quiver::kronecker(), &[1, 1], 2, 2, Method::Brute), 88);
        assert_eq!(count(&Quiver::kronecker(), &[1, 1], 3, 1, Method::Kernel), 33);
        assert_eq!(count(&Quiver::jordan(), &[2], 2, 1, Method::Kernel), 88);
    }

    #[test]
    fn smooth_baseline() {
        for q in [2u64, 3] {
            for n in 1..=3 {
                let r = count_moment_fiber(&Quiver::g_loop(2), &dv(&[1]), q, n, Method::Kernel, one_thread()).unwrap();
                assert_eq!(r.count, BigUint::from(q).pow(4 * n as u32));
                assert!(r.normalized.is_one());
            }
        }
    }

    #[test]
    fn partition_does_not_change_counts() {
        let q = Quiver::cycle(3);
        let base = count_moment_fiber(&q, &dv(&[1, 1, 1]), 2, 2, Method::Kernel, one_thread()).unwrap();
        for threads in [2, 3, 7] {
            let opts = CountOptions { threads, budget: DEFAULT_BUDGET };
            let r = count_moment_fiber(&q, &dv(&[1, 1, 1]), 2, 2, Method::Kernel, opts).unwrap();
            assert_eq!(r.count, base.count);
        }
    }

    #[test]
    fn reversing_an_arrow_keeps_counts() {
        let q = Quiver::from_counts(&[1, 0], &[((0, 1), 2)]).unwrap();
        let d = dv(&[1, 1]);
        let c = count_moment_fiber(&q, &d, 2, 2, Method::Kernel, one_thread()).unwrap().count;
        for k in 0..q.num_arrows() {
            let r = count_moment_fiber(&q.reversed_arrow(k), &d, 2, 2, Method::Kernel, one_thread()).unwrap();
            assert_eq!(r.count, c);
        }
    }

    #[test]
    fn budget_and_prime_checks() {
        let opts = CountOptions { threads: 1, budget: 100 };
        let r = count_moment_fiber(&Quiver::g_loop(2), &dv(&[2]), 2, 2, Method::Kernel, opts);
        assert!(matches!(r, Err(Error::BudgetExceeded { .. })));
        let r = count_moment_fiber(&Quiver::a2(), &dv(&[1, 1]), 4, 1, Method::Kernel, one_thread());
        assert_eq!(r.unwrap_err(), Error::NotPrime(4));
    }

    #[test]
    fn trace_relation() {
        for q in [Quiver::g_loop(3), Quiver::cycle(3), Quiver::kronecker(), Quiver::a2()] {
            for d in 1..=3 {
                let dims = DimVector::new(vec![d; q.num_vertices()]);
                assert!(MomentSystem::new(&q, &dims).unwrap().trace_relation_holds());
            }
        }
    }

    #[test]
    fn fiber_over_origin_examples() {
        let a2 = Quiver::a2();
        let one = dv(&[1, 1]);
        assert_eq!(count_fiber_over_origin(&a2, &one, 2, 1, one_thread()).unwrap(), BigUint::from(4u32));
        assert_eq!(count_fiber_over_origin(&a2, &one, 2, 2, one_thread()).unwrap(), BigUint::from(12u32));
        for m in 1..=3 {
            assert!(check_jet_fiber_lemma(&a2, &one, 3, m, one_thread()).unwrap().holds);
            assert!(check_jet_fiber_lemma(&Quiver::g_loop(2), &dv(&[1]), 2, m, one_thread()).unwrap().holds);
        }
    }

    #[test]
    fn singular_jets() {
        let a2 = Quiver::a2();
        let one = dv(&[1, 1]);
        assert_eq!(singular_points(&a2, &one, 2, one_thread()).unwrap(), vec![(vec![0], vec![0])]);
        assert_eq!(singular_jet_count(&a2, &one, 2, 1, one_thread()).unwrap(), BigUint::from(4u32));
        let diag = mustata_diagnostic(&a2, &one, &[2, 3], 1, one_thread()).unwrap();
        assert!((diag.estimate.unwrap() - 2.0).abs() < 1e-9);
        assert_eq!(diag.strictly_below, Some(false));
        let s2 = Quiver::g_loop(2);
        for m in 1..=2 {
            assert!(singular_jet_count(&s2, &dv(&[1]), 2, m, one_thread()).unwrap().is_zero());
        }
    }

    #[test]
    fn smooth_point_rank() {
        // x = (diag(1,0), [[0,1],[1,0]]) generate all of M_2, y = 0 is a
        // solution whose stabilizer is scalars
        let field = Ring::new(2, 1).unwrap();
        let sys = MomentSystem::new(&Quiver::g_loop(2), &dv(&[2])).unwrap();
        let x = [1, 0, 0, 0, 0, 1, 1, 0];
        let y = [0; 8];
        assert!(sys.vanishes_at(&field, &x, &y));
        assert_eq!(sys.jacobian_rank(&field, &x, &y), 3);
    }

    #[test]
    fn singular_lifts_match_brute_force() {
        // Jordan d=(1) is smooth; Kronecker (1,1) has the origin singular
        let k = Quiver::kronecker();
        let d = dv(&[1, 1]);
        let pts = singular_points(&k, &d, 2, one_thread()).unwrap();
        let ring = Ring::new(2, 2).unwrap();
        let sys = MomentSystem::new(&k, &d).unwrap();
        let mut brute = 0u64;
        for idx in 0..(ring.size().pow(4)) {
            let v: Vec<u32> = (0..4).map(|j| ((idx >> (2 * j)) & 3) as u32).collect();
            let (x, y) = v.split_at(2);
            if sys.vanishes_at(&ring, x, y) {
                let rx: Vec<u32> = x.iter().map(|&a| ring.reduce(a, 1)).collect();
                let ry: Vec<u32> = y.iter().map(|&a| ring.reduce(a, 1)).collect();
                if pts.contains(&(rx, ry)) {
                    brute += 1;
                }
            }
        }
        assert_eq!(singular_jet_count(&k, &d, 2, 1, one_thread()).unwrap(), BigUint::from(brute));
    }

    #[test]
    fn multiplicative_jordan() {
        let j = Quiver::jordan();
        for q in [2u64, 3, 5] {
            let c = count_multiplicative_fiber(&j, &dv(&[1]), q, &[1], 1, None, one_thread()).unwrap();
            assert_eq!(c, BigUint::from(q * q - q + 1));
            if q > 2 {
                let c = count_multiplicative_fiber(&j, &dv(&[1]), q, &[2], 1, None, one_thread()).unwrap();
                assert!(c.is_zero());
            }
        }
        assert!(count_multiplicative_fiber(&j, &dv(&[1]), 3, &[3], 1, None, one_thread()).is_err());
    }

    #[test]
    fn multiplicative_origin_counted_iff_alpha_one() {
        let q = Quiver::a2();
        let d = dv(&[1, 1]);
        // α = (1,1): includes M = 0
        let with = count_multiplicative_fiber(&q, &d, 3, &[1, 1], 1, None, one_thread()).unwrap();
        assert!(!with.is_zero());
        // scalar case: α_1 α_2 = 1 is forced by the product of the two relations
        let c = count_multiplicative_fiber(&q, &d, 3, &[2, 2], 1, None, one_thread()).unwrap();
        assert!(!c.is_zero());
        let c = count_multiplicative_fiber(&q, &d, 3, &[2, 1], 1, None, one_thread()).unwrap();
        assert!(c.is_zero());
    }

    #[test]
    fn multiplicative_order_independence() {
        let q = Quiver::g_loop(2);
        let d = dv(&[2]);
        let a = count_multiplicative_fiber(&q, &d, 2, &[1], 1, Some(&[0, 1]), one_thread()).unwrap();
        let b = count_multiplicative_fiber(&q, &d, 2, &[1], 1, Some(&[1, 0]), one_thread()).unwrap();
        assert_eq!(a, b);
        assert!(count_multiplicative_fiber(&q, &d, 2, &[1], 1, Some(&[0, 0]), one_thread()).is_err());
    }
}
