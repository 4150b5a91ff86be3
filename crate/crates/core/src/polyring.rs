//! Exact coefficient arithmetic.
//!
//! * [`CharElem`]: the representation ring R(T) = Z[e^{±ε_1}, …, e^{±ε_n}].
//! * [`NovikovPoly`]: R(T)[Q_1, …, Q_n] truncated at total Q-degree `D`.
//! * [`QkClass`]: a finite Schubert-basis expansion Σ_w c_w [O^w].
//!
//! All maps are `BTreeMap`s, so iteration and rendering order is deterministic.
//! Monomials are rendered with `x_i` standing for e^{ε_i}, e.g. `x1^-1*x2`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use smallvec::SmallVec;
use thiserror::Error;

use crate::rootsys::{Coroot, SignedPerm, Weight};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error("truncation degrees differ ({0} vs {1})")]
    TruncationMismatch(u32, u32),
    #[error("ranks differ ({0} vs {1})")]
    RankMismatch(usize, usize),
    #[error("coroot {0} is not in Q^{{∨,+}}")]
    NotInPositiveCorootCone(Coroot),
    #[error("elementary symmetric degree {d} out of range 0..={max}")]
    DegreeOutOfRange { d: usize, max: usize },
}

/// An element of R(T): finite Z-combination of characters e^μ.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct CharElem {
    terms: BTreeMap<Weight, BigInt>,
}

impl CharElem {
    pub fn zero() -> Self {
        Self::default()
    }

    /// The constant 1 = e^0 in rank n.
    pub fn one(n: usize) -> Self {
        Self::monomial(Weight::zero(n))
    }

    /// e^μ.
    pub fn monomial(mu: Weight) -> Self {
        Self::term(mu, BigInt::one())
    }

    pub fn term(mu: Weight, coeff: BigInt) -> Self {
        let mut terms = BTreeMap::new();
        if !coeff.is_zero() {
            terms.insert(mu, coeff);
        }
        CharElem { terms }
    }

    pub fn constant(n: usize, c: i64) -> Self {
        Self::term(Weight::zero(n), BigInt::from(c))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Weight, &BigInt)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, mu: &Weight) -> BigInt {
        self.terms.get(mu).cloned().unwrap_or_default()
    }

    fn add_term(&mut self, mu: Weight, c: BigInt) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(mu) {
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
        }
    }

    /// self += sign · e^shift · other.
    pub fn add_shifted(&mut self, other: &CharElem, sign: i64, shift: &Weight) {
        for (mu, c) in &other.terms {
            self.add_term(mu + shift, c * sign);
        }
    }

    /// self += factor · other.
    pub fn add_product(&mut self, a: &CharElem, b: &CharElem) {
        for (mu, c) in &a.terms {
            for (nu, d) in &b.terms {
                self.add_term(mu + nu, c * d);
            }
        }
    }

    /// Image under e^μ ↦ e^{-μ}.
    pub fn dual(&self) -> CharElem {
        CharElem {
            terms: self.terms.iter().map(|(mu, c)| (-mu, c.clone())).collect(),
        }
    }
}

impl fmt::Debug for CharElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Canonical rendering: terms in ascending exponent order, explicit signs.
impl fmt::Display for CharElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (mu, c)) in self.terms.iter().enumerate() {
            let neg = c.is_negative();
            let mag = c.abs();
            match (i, neg) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            let mono = render_monomial("x", mu.coords());
            match (mag.is_one(), mono.is_empty()) {
                (true, true) => write!(f, "1")?,
                (true, false) => write!(f, "{mono}")?,
                (false, true) => write!(f, "{mag}")?,
                (false, false) => write!(f, "{mag}*{mono}")?,
            }
        }
        Ok(())
    }
}

fn render_monomial(var: &str, exps: &[i64]) -> String {
    let mut parts = Vec::new();
    for (i, &e) in exps.iter().enumerate() {
        match e {
            0 => {}
            1 => parts.push(format!("{var}{}", i + 1)),
            _ => parts.push(format!("{var}{}^{e}", i + 1)),
        }
    }
    parts.join("*")
}

impl Add for &CharElem {
    type Output = CharElem;
    fn add(self, rhs: &CharElem) -> CharElem {
        let mut out = self.clone();
        for (mu, c) in &rhs.terms {
            out.add_term(mu.clone(), c.clone());
        }
        out
    }
}

impl Sub for &CharElem {
    type Output = CharElem;
    fn sub(self, rhs: &CharElem) -> CharElem {
        let mut out = self.clone();
        for (mu, c) in &rhs.terms {
            out.add_term(mu.clone(), -c);
        }
        out
    }
}

impl Neg for &CharElem {
    type Output = CharElem;
    fn neg(self) -> CharElem {
        CharElem {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }
}

impl Mul for &CharElem {
    type Output = CharElem;
    fn mul(self, rhs: &CharElem) -> CharElem {
        let mut out = CharElem::zero();
        out.add_product(self, rhs);
        out
    }
}

/// e_d of the 2n characters e^{ε_1}, …, e^{ε_n}, e^{-ε_n}, …, e^{-ε_1}.
pub fn elementary_symmetric_char(d: usize, n: usize) -> Result<CharElem, PolyError> {
    if d > 2 * n {
        return Err(PolyError::DegreeOutOfRange { d, max: 2 * n });
    }
    let vars: Vec<CharElem> = (1..=n)
        .map(|i| CharElem::monomial(Weight::unit(n, i)))
        .chain(
            (1..=n)
                .rev()
                .map(|i| CharElem::monomial(-Weight::unit(n, i))),
        )
        .collect();
    // e_k(x_1..x_m) by the recursion e_k ← e_k + e_{k-1}·x_m.
    let mut e: Vec<CharElem> = vec![CharElem::zero(); d + 1];
    e[0] = CharElem::one(n);
    for x in &vars {
        for k in (1..=d).rev() {
            let prev = e[k - 1].clone();
            e[k].add_product(&prev, x);
        }
    }
    Ok(e.swap_remove(d))
}

/// Exponent vector of a Novikov monomial Q_1^{d_1} ⋯ Q_n^{d_n}.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct QExp(SmallVec<[u32; 4]>);

impl QExp {
    pub fn zero(n: usize) -> Self {
        QExp(SmallVec::from_elem(0, n))
    }

    pub fn from_slice(d: &[u32]) -> Self {
        QExp(SmallVec::from_slice(d))
    }

    /// Q_j (1-based).
    pub fn var(n: usize, j: usize) -> Self {
        let mut q = Self::zero(n);
        q.0[j - 1] = 1;
        q
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn exps(&self) -> &[u32] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&d| d == 0)
    }

    pub fn rank(&self) -> usize {
        self.0.len()
    }
}

impl Add for &QExp {
    type Output = QExp;
    fn add(self, rhs: &QExp) -> QExp {
        QExp(
            self.0
                .iter()
                .zip(rhs.0.iter())
                .map(|(a, b)| a + b)
                .collect(),
        )
    }
}

impl fmt::Debug for QExp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for QExp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let exps: Vec<i64> = self.0.iter().map(|&d| d as i64).collect();
        let s = render_monomial("Q", &exps);
        if s.is_empty() {
            write!(f, "1")
        } else {
            write!(f, "{s}")
        }
    }
}

/// Converts ξ ∈ Q^{∨,+} (ε^∨-coordinates) to its simple-coroot exponent vector.
pub fn qexp_of_coroot(xi: &Coroot) -> Result<QExp, PolyError> {
    let d = xi.simple_coords();
    if d.iter().any(|&c| c < 0) {
        return Err(PolyError::NotInPositiveCorootCone(xi.clone()));
    }
    Ok(QExp(d.into_iter().map(|c| c as u32).collect()))
}

/// An element of R(T)[Q_1..Q_n] truncated at total Q-degree `trunc`.
#[derive(Clone, PartialEq, Eq)]
pub struct NovikovPoly {
    rank: usize,
    trunc: u32,
    terms: BTreeMap<QExp, CharElem>,
}

impl NovikovPoly {
    pub fn zero(rank: usize, trunc: u32) -> Self {
        NovikovPoly {
            rank,
            trunc,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(rank: usize, trunc: u32) -> Self {
        Self::constant_in(rank, CharElem::one(rank), trunc)
    }

    pub fn constant_in(rank: usize, c: CharElem, trunc: u32) -> Self {
        let mut p = NovikovPoly::zero(rank, trunc);
        if !c.is_zero() {
            p.terms.insert(QExp::zero(rank), c);
        }
        p
    }

    pub fn integer(rank: usize, c: i64, trunc: u32) -> Self {
        Self::constant_in(rank, CharElem::constant(rank, c), trunc)
    }

    /// c·Q^q, or zero if deg(q) exceeds the truncation.
    pub fn monomial(rank: usize, q: QExp, c: CharElem, trunc: u32) -> Self {
        let mut p = NovikovPoly::zero(rank, trunc);
        if q.degree() <= trunc && !c.is_zero() {
            p.terms.insert(q, c);
        }
        p
    }

    /// Q_j; Q_0 is the zero constant.
    pub fn q_var(rank: usize, j: usize, trunc: u32) -> Self {
        if j == 0 {
            return Self::zero(rank, trunc);
        }
        Self::monomial(rank, QExp::var(rank, j), CharElem::one(rank), trunc)
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn trunc_degree(&self) -> u32 {
        self.trunc
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&QExp, &CharElem)> {
        self.terms.iter()
    }

    pub fn coeff(&self, q: &QExp) -> CharElem {
        self.terms.get(q).cloned().unwrap_or_default()
    }

    /// Maximum total Q-degree present (None for zero).
    pub fn max_degree(&self) -> Option<u32> {
        self.terms.keys().map(QExp::degree).max()
    }

    fn check(&self, other: &NovikovPoly) -> Result<(), PolyError> {
        if self.trunc != other.trunc {
            return Err(PolyError::TruncationMismatch(self.trunc, other.trunc));
        }
        if self.rank != other.rank && !self.is_zero() && !other.is_zero() {
            return Err(PolyError::RankMismatch(self.rank, other.rank));
        }
        Ok(())
    }

    fn entry_add(&mut self, q: QExp, c: &CharElem, sign: i64, shift: Option<&Weight>) {
        let slot = self.terms.entry(q).or_default();
        match shift {
            Some(mu) => slot.add_shifted(c, sign, mu),
            None => {
                for (mu, v) in c.terms() {
                    slot.add_term(mu.clone(), v * sign);
                }
            }
        }
    }

    fn prune(&mut self) {
        self.terms.retain(|_, c| !c.is_zero());
    }

    /// self += sign · e^shift · Q^q · other (terms above the truncation are dropped).
    pub fn add_shifted(&mut self, other: &NovikovPoly, sign: i64, shift: &Weight, q: &QExp) {
        debug_assert_eq!(self.trunc, other.trunc);
        for (qe, c) in &other.terms {
            let target = qe + q;
            if target.degree() <= self.trunc {
                self.entry_add(target, c, sign, Some(shift));
            }
        }
        self.prune();
    }

    pub fn checked_add(&self, other: &NovikovPoly) -> Result<NovikovPoly, PolyError> {
        self.check(other)?;
        let mut out = self.clone();
        out.rank = self.rank.max(other.rank);
        for (q, c) in &other.terms {
            out.entry_add(q.clone(), c, 1, None);
        }
        out.prune();
        Ok(out)
    }

    pub fn checked_sub(&self, other: &NovikovPoly) -> Result<NovikovPoly, PolyError> {
        self.checked_add(&-other)
    }

    pub fn checked_mul(&self, other: &NovikovPoly) -> Result<NovikovPoly, PolyError> {
        self.check(other)?;
        let mut out = NovikovPoly::zero(self.rank.max(other.rank), self.trunc);
        for (qa, ca) in &self.terms {
            for (qb, cb) in &other.terms {
                let q = qa + qb;
                if q.degree() <= self.trunc {
                    out.terms.entry(q).or_default().add_product(ca, cb);
                }
            }
        }
        out.prune();
        Ok(out)
    }

    pub fn scale_char(&self, c: &CharElem) -> NovikovPoly {
        let mut out = NovikovPoly::zero(self.rank, self.trunc);
        for (q, v) in &self.terms {
            let p = v * c;
            if !p.is_zero() {
                out.terms.insert(q.clone(), p);
            }
        }
        out
    }

    /// Drops every term of degree > `d` and relabels the truncation to `d`.
    pub fn truncate(&self, d: u32) -> NovikovPoly {
        NovikovPoly {
            rank: self.rank,
            trunc: d,
            terms: self
                .terms
                .iter()
                .filter(|(q, _)| q.degree() <= d)
                .map(|(q, c)| (q.clone(), c.clone()))
                .collect(),
        }
    }

    /// Specialization Q_1 = ⋯ = Q_n = 0.
    pub fn at_q_zero(&self) -> CharElem {
        self.coeff(&QExp::zero(self.rank))
    }
}

impl fmt::Debug for NovikovPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for NovikovPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (q, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            if q.is_zero() {
                write!(f, "({c})")?;
            } else {
                write!(f, "({c})*{q}")?;
            }
        }
        Ok(())
    }
}

impl Add for &NovikovPoly {
    type Output = NovikovPoly;
    /// Panics on truncation mismatch; use `checked_add` to handle it.
    fn add(self, rhs: &NovikovPoly) -> NovikovPoly {
        self.checked_add(rhs).expect("NovikovPoly addition")
    }
}

impl Sub for &NovikovPoly {
    type Output = NovikovPoly;
    fn sub(self, rhs: &NovikovPoly) -> NovikovPoly {
        self.checked_sub(rhs).expect("NovikovPoly subtraction")
    }
}

impl Neg for &NovikovPoly {
    type Output = NovikovPoly;
    fn neg(self) -> NovikovPoly {
        NovikovPoly {
            rank: self.rank,
            trunc: self.trunc,
            terms: self.terms.iter().map(|(q, c)| (q.clone(), -c)).collect(),
        }
    }
}

impl Mul for &NovikovPoly {
    type Output = NovikovPoly;
    fn mul(self, rhs: &NovikovPoly) -> NovikovPoly {
        self.checked_mul(rhs).expect("NovikovPoly multiplication")
    }
}

/// Q^ξ for ξ ∈ Q^{∨,+}; zero if the degree exceeds the truncation.
pub fn q_monomial_of_coroot(xi: &Coroot, trunc: u32) -> Result<NovikovPoly, PolyError> {
    let q = qexp_of_coroot(xi)?;
    let n = q.rank();
    Ok(NovikovPoly::monomial(n, q, CharElem::one(n), trunc))
}

/// Σ_{m=0}^{D} Q_j^m, the truncated expansion of 1/(1 - Q_j); equals 1 for j = 0.
pub fn geometric_factor(rank: usize, j: usize, trunc: u32) -> NovikovPoly {
    if j == 0 {
        return NovikovPoly::one(rank, trunc);
    }
    let mut p = NovikovPoly::zero(rank, trunc);
    for m in 0..=trunc {
        let mut q = QExp::zero(rank);
        q.0[j - 1] = m;
        p.terms.insert(q, CharElem::one(rank));
    }
    p
}

/// Q_p Q_{p+1} ⋯ Q_n.
pub fn q_tail_product(rank: usize, p: usize, trunc: u32) -> NovikovPoly {
    let mut q = QExp::zero(rank);
    for j in p..=rank {
        q.0[j - 1] = 1;
    }
    NovikovPoly::monomial(rank, q, CharElem::one(rank), trunc)
}

/// 1 - Q_j (= 1 for j = 0).
pub fn one_minus_q(rank: usize, j: usize, trunc: u32) -> NovikovPoly {
    &NovikovPoly::one(rank, trunc) - &NovikovPoly::q_var(rank, j, trunc)
}

/// A class Σ_w c_w [O^w] in the Schubert basis; absent keys mean zero.
#[derive(Clone, PartialEq, Eq)]
pub struct QkClass {
    rank: usize,
    trunc: u32,
    coeffs: BTreeMap<SignedPerm, NovikovPoly>,
}

impl QkClass {
    pub fn zero(rank: usize, trunc: u32) -> Self {
        QkClass {
            rank,
            trunc,
            coeffs: BTreeMap::new(),
        }
    }

    /// [O^w].
    pub fn schubert(w: SignedPerm, trunc: u32) -> Self {
        let rank = w.rank();
        Self::term(w, NovikovPoly::one(rank, trunc))
    }

    pub fn term(w: SignedPerm, c: NovikovPoly) -> Self {
        let mut z = QkClass::zero(w.rank(), c.trunc_degree());
        if !c.is_zero() {
            z.coeffs.insert(w, c);
        }
        z
    }

    /// The unit [O^e] (X^e is the whole flag manifold).
    pub fn unit(rank: usize, trunc: u32) -> Self {
        Self::schubert(SignedPerm::identity(rank), trunc)
    }

    /// c·[O^e].
    pub fn scalar(rank: usize, c: NovikovPoly) -> Self {
        Self::term(SignedPerm::identity(rank), c)
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn trunc_degree(&self) -> u32 {
        self.trunc
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeffs(&self) -> impl Iterator<Item = (&SignedPerm, &NovikovPoly)> {
        self.coeffs.iter()
    }

    pub fn coeff(&self, w: &SignedPerm) -> NovikovPoly {
        self.coeffs
            .get(w)
            .cloned()
            .unwrap_or_else(|| NovikovPoly::zero(self.rank, self.trunc))
    }

    pub fn num_terms(&self) -> usize {
        self.coeffs.len()
    }

    /// self += sign · e^shift · Q^q · c · [O^w].
    pub fn add_shifted(
        &mut self,
        w: &SignedPerm,
        c: &NovikovPoly,
        sign: i64,
        shift: &Weight,
        q: &QExp,
    ) {
        let slot = self
            .coeffs
            .entry(w.clone())
            .or_insert_with(|| NovikovPoly::zero(self.rank, self.trunc));
        slot.add_shifted(c, sign, shift, q);
        if slot.is_zero() {
            self.coeffs.remove(w);
        }
    }

    fn check(&self, other: &QkClass) -> Result<(), PolyError> {
        if self.trunc != other.trunc {
            return Err(PolyError::TruncationMismatch(self.trunc, other.trunc));
        }
        if self.rank != other.rank {
            return Err(PolyError::RankMismatch(self.rank, other.rank));
        }
        Ok(())
    }

    pub fn checked_add(&self, other: &QkClass) -> Result<QkClass, PolyError> {
        self.check(other)?;
        let mut out = self.clone();
        for (w, c) in &other.coeffs {
            let sum = match out.coeffs.get(w) {
                Some(a) => a.checked_add(c)?,
                None => c.clone(),
            };
            if sum.is_zero() {
                out.coeffs.remove(w);
            } else {
                out.coeffs.insert(w.clone(), sum);
            }
        }
        Ok(out)
    }

    pub fn checked_sub(&self, other: &QkClass) -> Result<QkClass, PolyError> {
        self.checked_add(&-other)
    }

    /// Multiplication by a scalar in R(T)[Q] (truncated).
    pub fn scale(&self, s: &NovikovPoly) -> Result<QkClass, PolyError> {
        if s.trunc_degree() != self.trunc {
            return Err(PolyError::TruncationMismatch(self.trunc, s.trunc_degree()));
        }
        let mut out = QkClass::zero(self.rank, self.trunc);
        for (w, c) in &self.coeffs {
            let p = c.checked_mul(s)?;
            if !p.is_zero() {
                out.coeffs.insert(w.clone(), p);
            }
        }
        Ok(out)
    }

    pub fn truncate(&self, d: u32) -> QkClass {
        let mut out = QkClass::zero(self.rank, d);
        for (w, c) in &self.coeffs {
            let p = c.truncate(d);
            if !p.is_zero() {
                out.coeffs.insert(w.clone(), p);
            }
        }
        out
    }
}

impl Add for &QkClass {
    type Output = QkClass;
    fn add(self, rhs: &QkClass) -> QkClass {
        self.checked_add(rhs).expect("QkClass addition")
    }
}

impl Sub for &QkClass {
    type Output = QkClass;
    fn sub(self, rhs: &QkClass) -> QkClass {
        self.checked_sub(rhs).expect("QkClass subtraction")
    }
}

impl Neg for &QkClass {
    type Output = QkClass;
    fn neg(self) -> QkClass {
        QkClass {
            rank: self.rank,
            trunc: self.trunc,
            coeffs: self.coeffs.iter().map(|(w, c)| (w.clone(), -c)).collect(),
        }
    }
}

impl fmt::Debug for QkClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// `(coeff)[O^window] + …` in window order; `0` for the zero class.
impl fmt::Display for QkClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        for (i, (w, c)) in self.coeffs.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "[{c}]*O^{w}")?;
        }
        Ok(())
    }
}

/// Equality of two classes coefficient-by-coefficient.
pub fn qk_equal(a: &QkClass, b: &QkClass) -> Result<bool, PolyError> {
    a.check(b)?;
    Ok(a.coeffs == b.coeffs)
}
