//! Arithmetic in the chain rings `R_{q,n} = F_q[t]/(t^n)` and kernel sizes of
//! matrices over them.
//!
//! Two representations share one elimination routine: [`TruncatedPoly`]
//! stores dense coefficient lists and works for any prime `q`, while
//! [`Ring`] encodes an element as the integer `Σ c_i q^i` and uses lookup
//! tables for small rings. The encoding orders elements lexicographically by
//! coefficient, constant term fastest.

use std::fmt;

use crate::error::{Error, Result};

pub fn is_prime(q: u64) -> bool {
    if q < 2 {
        return false;
    }
    let mut k = 2;
    while k * k <= q {
        if q.is_multiple_of(k) {
            return false;
        }
        k += 1;
    }
    true
}

fn check_params(q: u64, n: usize) -> Result<()> {
    if !is_prime(q) {
        return Err(Error::NotPrime(q));
    }
    if n == 0 {
        return Err(Error::Precondition("ring length n must be at least 1".into()));
    }
    Ok(())
}

/// Element of `F_q[t]/(t^n)`; `coeffs[i]` is the coefficient of `t^i`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TruncatedPoly {
    q: u64,
    n: usize,
    coeffs: Vec<u64>,
}

impl TruncatedPoly {
    /// Coefficients beyond `t^{n-1}` are dropped and all are reduced mod `q`.
    pub fn new(q: u64, n: usize, coeffs: &[u64]) -> Result<Self> {
        check_params(q, n)?;
        let mut c: Vec<u64> = coeffs.iter().take(n).map(|x| x % q).collect();
        c.resize(n, 0);
        Ok(TruncatedPoly { q, n, coeffs: c })
    }

    pub fn zero(q: u64, n: usize) -> Result<Self> {
        Self::new(q, n, &[])
    }

    pub fn one(q: u64, n: usize) -> Result<Self> {
        Self::new(q, n, &[1])
    }

    /// The uniformizer `t` (zero when `n = 1`).
    pub fn t(q: u64, n: usize) -> Result<Self> {
        Self::new(q, n, &[0, 1])
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    pub fn is_unit(&self) -> bool {
        self.coeffs[0] != 0
    }

    /// Index of the first non-zero coefficient, `n` for zero.
    pub fn valuation(&self) -> usize {
        self.coeffs.iter().position(|&c| c != 0).unwrap_or(self.n)
    }

    fn same_ring(&self, other: &Self) -> Result<()> {
        if self.q != other.q || self.n != other.n {
            return Err(Error::RingMismatch);
        }
        Ok(())
    }

    fn with(&self, coeffs: Vec<u64>) -> Self {
        TruncatedPoly { q: self.q, n: self.n, coeffs }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_ring(other)?;
        Ok(self.with(self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| (a + b) % self.q).collect()))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.same_ring(other)?;
        Ok(self.add_unchecked_neg(other))
    }

    fn add_unchecked_neg(&self, other: &Self) -> Self {
        self.with(self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| (a + self.q - b) % self.q).collect())
    }

    pub fn neg(&self) -> Self {
        self.with(self.coeffs.iter().map(|&a| (self.q - a) % self.q).collect())
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.same_ring(other)?;
        Ok(self.mul_unchecked(other))
    }

    fn mul_unchecked(&self, other: &Self) -> Self {
        let (q, n) = (self.q as u128, self.n);
        let mut c = vec![0u128; n];
        for (i, &a) in self.coeffs.iter().enumerate().filter(|(_, &a)| a != 0) {
            for (j, &b) in other.coeffs[..n - i].iter().enumerate() {
                c[i + j] = (c[i + j] + a as u128 * b as u128) % q;
            }
        }
        self.with(c.into_iter().map(|x| x as u64).collect())
    }

    /// Inverse of a unit by the recurrence `b_0 = a_0^{-1}`,
    /// `b_k = −a_0^{-1} Σ_{i=1..k} a_i b_{k−i}`.
    pub fn inverse_of_unit(&self) -> Result<Self> {
        if !self.is_unit() {
            return Err(Error::NotUnit);
        }
        let q = self.q as u128;
        let a0_inv = mod_inverse(self.coeffs[0], self.q) as u128;
        let a: Vec<u128> = self.coeffs.iter().map(|&x| x as u128).collect();
        let mut b = vec![0u128; self.n];
        b[0] = a0_inv;
        for k in 1..self.n {
            let s = (1..=k).fold(0u128, |acc, i| (acc + a[i] * b[k - i]) % q);
            b[k] = (q - s) % q * a0_inv % q;
        }
        Ok(self.with(b.into_iter().map(|x| x as u64).collect()))
    }

    /// `self / t^v`, choosing zero for the undetermined top coefficients.
    pub fn shift_down(&self, v: usize) -> Self {
        let mut c: Vec<u64> = self.coeffs.iter().skip(v).copied().collect();
        c.resize(self.n, 0);
        self.with(c)
    }
}

impl fmt::Display for TruncatedPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0)
            .map(|(i, &c)| match (i, c) {
                (0, c) => c.to_string(),
                (1, 1) => "t".into(),
                (1, c) => format!("{c}t"),
                (i, 1) => format!("t^{i}"),
                (i, c) => format!("{c}t^{i}"),
            })
            .collect();
        if terms.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", terms.join("+"))
        }
    }
}

fn mod_inverse(a: u64, q: u64) -> u64 {
    // q prime: a^(q-2)
    let (mut base, mut e, mut acc) = (a as u128 % q as u128, q - 2, 1u128);
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base % q as u128;
        }
        base = base * base % q as u128;
        e >>= 1;
    }
    acc as u64
}

/// Operations the elimination needs from a chain ring.
pub trait ChainRing {
    type Elem: Clone;
    fn length(&self) -> usize;
    fn valuation(&self, a: &Self::Elem) -> usize;
    fn shift_down(&self, a: &Self::Elem, v: usize) -> Self::Elem;
    /// Caller guarantees `a` is a unit.
    fn unit_inverse(&self, a: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
}

/// Elimination over a chain ring. Pivots on an entry of least valuation
/// `v`, clears its column by row operations (column operations would clear
/// its row without touching anything else), and drops both. Each pivot adds
/// `v` to the kernel exponent, each column left over adds `n`.
///
/// With `rhs`, row operations are mirrored on it and the second value says
/// whether `A x = rhs` is solvable; when it is, it has `q^k` solutions.
pub fn eliminate<R: ChainRing>(
    ring: &R,
    a: &mut [R::Elem],
    rows: usize,
    cols: usize,
    mut rhs: Option<&mut [R::Elem]>,
) -> (u32, bool) {
    let n = ring.length();
    let mut row_alive = vec![true; rows];
    let mut col_alive = vec![true; cols];
    let mut exponent = 0u32;
    let mut solvable = true;
    loop {
        let mut best: Option<(usize, usize, usize)> = None;
        'search: for i in (0..rows).filter(|&i| row_alive[i]) {
            for j in (0..cols).filter(|&j| col_alive[j]) {
                let v = ring.valuation(&a[i * cols + j]);
                if v < n && best.is_none_or(|(bv, _, _)| v < bv) {
                    best = Some((v, i, j));
                    if v == 0 {
                        break 'search;
                    }
                }
            }
        }
        let Some((v, p, c)) = best else { break };
        let u_inv = ring.unit_inverse(&ring.shift_down(&a[p * cols + c], v));
        for i in (0..rows).filter(|&i| row_alive[i] && i != p) {
            let e = &a[i * cols + c];
            if ring.valuation(e) >= n {
                continue;
            }
            let f = ring.mul(&ring.shift_down(e, v), &u_inv);
            for j in (0..cols).filter(|&j| col_alive[j]) {
                let prod = ring.mul(&f, &a[p * cols + j]);
                a[i * cols + j] = ring.sub(&a[i * cols + j], &prod);
            }
            if let Some(b) = rhs.as_deref_mut() {
                let prod = ring.mul(&f, &b[p]);
                b[i] = ring.sub(&b[i], &prod);
            }
        }
        if let Some(b) = rhs.as_deref() {
            solvable &= ring.valuation(&b[p]) >= v;
        }
        exponent += v as u32;
        row_alive[p] = false;
        col_alive[c] = false;
    }
    exponent += (n * col_alive.iter().filter(|&&x| x).count()) as u32;
    if let Some(b) = rhs.as_deref() {
        solvable &= (0..rows).filter(|&i| row_alive[i]).all(|i| ring.valuation(&b[i]) >= n);
    }
    (exponent, solvable)
}

/// Dense-coefficient ring used by [`RingMatrix`].
#[derive(Debug, Clone, Copy)]
struct Dense {
    n: usize,
}

impl ChainRing for Dense {
    type Elem = TruncatedPoly;
    fn length(&self) -> usize {
        self.n
    }
    fn valuation(&self, a: &TruncatedPoly) -> usize {
        a.valuation()
    }
    fn shift_down(&self, a: &TruncatedPoly, v: usize) -> TruncatedPoly {
        a.shift_down(v)
    }
    fn unit_inverse(&self, a: &TruncatedPoly) -> TruncatedPoly {
        a.inverse_of_unit().expect("pivot is a unit")
    }
    fn mul(&self, a: &TruncatedPoly, b: &TruncatedPoly) -> TruncatedPoly {
        a.mul_unchecked(b)
    }
    fn sub(&self, a: &TruncatedPoly, b: &TruncatedPoly) -> TruncatedPoly {
        a.add_unchecked_neg(b)
    }
}

/// Matrix over `R_{q,n}` stored row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RingMatrix {
    q: u64,
    n: usize,
    rows: usize,
    cols: usize,
    entries: Vec<TruncatedPoly>,
}

impl RingMatrix {
    pub fn new(q: u64, n: usize, rows: usize, cols: usize, entries: Vec<TruncatedPoly>) -> Result<Self> {
        check_params(q, n)?;
        if entries.len() != rows * cols {
            return Err(Error::Precondition(format!(
                "{} entries for a {rows}x{cols} matrix",
                entries.len()
            )));
        }
        if entries.iter().any(|e| e.q != q || e.n != n) {
            return Err(Error::RingMismatch);
        }
        Ok(RingMatrix { q, n, rows, cols, entries })
    }

    pub fn zero(q: u64, n: usize, rows: usize, cols: usize) -> Result<Self> {
        let z = TruncatedPoly::zero(q, n)?;
        Self::new(q, n, rows, cols, vec![z; rows * cols])
    }

    pub fn identity(q: u64, n: usize, size: usize) -> Result<Self> {
        let mut m = Self::zero(q, n, size, size)?;
        for i in 0..size {
            m.entries[i * size + i] = TruncatedPoly::one(q, n)?;
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &TruncatedPoly {
        &self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: TruncatedPoly) -> Result<()> {
        if v.q != self.q || v.n != self.n {
            return Err(Error::RingMismatch);
        }
        self.entries[i * self.cols + j] = v;
        Ok(())
    }

    /// `k` with `#{x : Mx = 0} = q^k`.
    pub fn kernel_size_exponent(&self) -> u32 {
        let mut a = self.entries.clone();
        eliminate(&Dense { n: self.n }, &mut a, self.rows, self.cols, None).0
    }
}

/// Rings up to this many elements get lookup tables.
pub const TABLE_LIMIT: u64 = 1024;

/// `R_{q,n}` with elements encoded as `Σ c_i q^i`.
#[derive(Debug, Clone)]
pub struct Ring {
    q: u64,
    n: usize,
    size: u64,
    pow: Vec<u64>,
    tables: Option<Tables>,
}

#[derive(Debug, Clone)]
struct Tables {
    add: Vec<u32>,
    sub: Vec<u32>,
    mul: Vec<u32>,
    neg: Vec<u32>,
    inv: Vec<u32>,
    val: Vec<u8>,
}

impl Ring {
    pub fn new(q: u64, n: usize) -> Result<Self> {
        check_params(q, n)?;
        let mut pow = vec![1u64];
        for _ in 0..n {
            let next = pow.last().unwrap().checked_mul(q).filter(|&x| x <= u64::from(u32::MAX));
            pow.push(next.ok_or_else(|| Error::BudgetExceeded {
                needed: format!("{q}^{n} ring elements"),
                budget: u64::from(u32::MAX),
            })?);
        }
        let size = pow[n];
        let mut ring = Ring { q, n, size, pow, tables: None };
        if size <= TABLE_LIMIT {
            ring.tables = Some(ring.build_tables());
        }
        Ok(ring)
    }

    fn build_tables(&self) -> Tables {
        let s = self.size as usize;
        let mut t = Tables {
            add: vec![0; s * s],
            sub: vec![0; s * s],
            mul: vec![0; s * s],
            neg: vec![0; s],
            inv: vec![0; s],
            val: vec![0; s],
        };
        for a in 0..s as u32 {
            t.neg[a as usize] = self.slow_neg(a);
            t.val[a as usize] = self.slow_valuation(a) as u8;
            if !(a as u64).is_multiple_of(self.q) {
                t.inv[a as usize] = self.slow_inverse(a);
            }
            for b in 0..s as u32 {
                let k = a as usize * s + b as usize;
                t.add[k] = self.slow_add(a, b);
                t.sub[k] = self.slow_add(a, self.slow_neg(b));
                t.mul[k] = self.slow_mul(a, b);
            }
        }
        t
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn size(&self) -> u64 {
        self.size
    }

    /// `q^k` for `k ≤ n`.
    pub fn q_pow(&self, k: usize) -> u64 {
        self.pow[k]
    }

    pub fn encode(&self, p: &TruncatedPoly) -> Result<u32> {
        if p.q != self.q || p.n != self.n {
            return Err(Error::RingMismatch);
        }
        Ok(p.coeffs.iter().rev().fold(0u64, |acc, &c| acc * self.q + c) as u32)
    }

    pub fn decode(&self, a: u32) -> TruncatedPoly {
        let coeffs = self.digits(a);
        TruncatedPoly { q: self.q, n: self.n, coeffs }
    }

    fn digits(&self, a: u32) -> Vec<u64> {
        let mut x = u64::from(a);
        (0..self.n)
            .map(|_| {
                let d = x % self.q;
                x /= self.q;
                d
            })
            .collect()
    }

    fn undigits(&self, d: &[u64]) -> u32 {
        d.iter().rev().fold(0u64, |acc, &c| acc * self.q + c) as u32
    }

    fn slow_add(&self, a: u32, b: u32) -> u32 {
        let (x, y) = (self.digits(a), self.digits(b));
        self.undigits(&x.iter().zip(&y).map(|(p, r)| (p + r) % self.q).collect::<Vec<_>>())
    }

    fn slow_neg(&self, a: u32) -> u32 {
        self.undigits(&self.digits(a).iter().map(|&p| (self.q - p) % self.q).collect::<Vec<_>>())
    }

    fn slow_mul(&self, a: u32, b: u32) -> u32 {
        self.encode(&self.decode(a).mul_unchecked(&self.decode(b))).expect("same ring")
    }

    fn slow_inverse(&self, a: u32) -> u32 {
        self.encode(&self.decode(a).inverse_of_unit().expect("unit")).expect("same ring")
    }

    fn slow_valuation(&self, a: u32) -> usize {
        if a == 0 {
            return self.n;
        }
        let mut x = u64::from(a);
        let mut v = 0;
        while x % self.q == 0 {
            x /= self.q;
            v += 1;
        }
        v
    }

    #[inline]
    pub fn add(&self, a: u32, b: u32) -> u32 {
        match &self.tables {
            Some(t) => t.add[a as usize * self.size as usize + b as usize],
            None => self.slow_add(a, b),
        }
    }

    #[inline]
    pub fn sub(&self, a: u32, b: u32) -> u32 {
        match &self.tables {
            Some(t) => t.sub[a as usize * self.size as usize + b as usize],
            None => self.slow_add(a, self.slow_neg(b)),
        }
    }

    #[inline]
    pub fn mul(&self, a: u32, b: u32) -> u32 {
        match &self.tables {
            Some(t) => t.mul[a as usize * self.size as usize + b as usize],
            None => self.slow_mul(a, b),
        }
    }

    #[inline]
    pub fn neg(&self, a: u32) -> u32 {
        match &self.tables {
            Some(t) => t.neg[a as usize],
            None => self.slow_neg(a),
        }
    }

    #[inline]
    pub fn valuation(&self, a: u32) -> usize {
        match &self.tables {
            Some(t) => t.val[a as usize] as usize,
            None => self.slow_valuation(a),
        }
    }

    #[inline]
    pub fn is_unit(&self, a: u32) -> bool {
        u64::from(a) % self.q != 0
    }

    pub fn inverse_of_unit(&self, a: u32) -> Result<u32> {
        if !self.is_unit(a) {
            return Err(Error::NotUnit);
        }
        Ok(match &self.tables {
            Some(t) => t.inv[a as usize],
            None => self.slow_inverse(a),
        })
    }

    /// Multiplication by `t^k`.
    #[inline]
    pub fn shift_up(&self, a: u32, k: usize) -> u32 {
        if k >= self.n {
            return 0;
        }
        ((u64::from(a) * self.pow[k]) % self.size) as u32
    }

    /// Reduction to `R_{q,k}` for `k ≤ n`, as an element of that ring.
    #[inline]
    pub fn reduce(&self, a: u32, k: usize) -> u32 {
        (u64::from(a) % self.pow[k]) as u32
    }

    /// Kernel exponent of a row-major matrix, destroying it.
    pub fn kernel_exponent(&self, a: &mut [u32], rows: usize, cols: usize) -> u32 {
        eliminate(self, a, rows, cols, None).0
    }

    /// `Some(k)` when `A x = b` has `q^k` solutions, `None` when it has none.
    pub fn solve_exponent(&self, a: &mut [u32], b: &mut [u32], rows: usize, cols: usize) -> Option<u32> {
        let (k, ok) = eliminate(self, a, rows, cols, Some(b));
        ok.then_some(k)
    }
}

impl ChainRing for Ring {
    type Elem = u32;
    fn length(&self) -> usize {
        self.n
    }
    #[inline]
    fn valuation(&self, a: &u32) -> usize {
        Ring::valuation(self, *a)
    }
    #[inline]
    fn shift_down(&self, a: &u32, v: usize) -> u32 {
        (u64::from(*a) / self.pow[v]) as u32
    }
    #[inline]
    fn unit_inverse(&self, a: &u32) -> u32 {
        self.inverse_of_unit(*a).expect("pivot is a unit")
    }
    #[inline]
    fn mul(&self, a: &u32, b: &u32) -> u32 {
        Ring::mul(self, *a, *b)
    }
    #[inline]
    fn sub(&self, a: &u32, b: &u32) -> u32 {
        Ring::sub(self, *a, *b)
    }
}

/// All `q^n` elements in lexicographic coefficient order, constant term
/// fastest: `0, 1, …, q−1, t, 1+t, …`.
pub fn enumerate_ring(q: u64, n: usize, budget: u64) -> Result<impl Iterator<Item = TruncatedPoly>> {
    check_params(q, n)?;
    let size = u32::try_from(n).ok().and_then(|n| q.checked_pow(n));
    let size = match size {
        Some(s) if s <= budget => s,
        _ => return Err(Error::BudgetExceeded { needed: format!("{q}^{n}"), budget }),
    };
    Ok((0..size).map(move |mut x| {
        let coeffs: Vec<u64> = (0..n)
            .map(|_| {
                let d = x % q;
                x /= q;
                d
            })
            .collect();
        TruncatedPoly { q, n, coeffs }
    }))
}
