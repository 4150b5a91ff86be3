//! Type C_n root data in the ε-basis and the Weyl group as signed permutations.
//!
//! Weights are integer vectors in ε-coordinates, coroots are integer vectors in
//! ε^∨-coordinates, and a Weyl group element is stored as its signed window
//! `(w(1), …, w(n))`. Barred indices are negative integers, so `w(-j) = -w(j)`.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;
use thiserror::Error;

pub type Coords = SmallVec<[i64; 4]>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RootSysError {
    #[error("{0} is not a root of C_{1}")]
    NotARoot(Weight, usize),
    #[error("{0} is not a positive root")]
    NotPositive(Root),
    #[error("invalid signed window {0:?}")]
    InvalidWindow(Vec<i32>),
    #[error("index {index} out of range 1..={rank}")]
    IndexOutOfRange { index: usize, rank: usize },
    #[error("cannot parse weight from {0:?}")]
    Parse(String),
}

/// An element of the weight lattice P = ⊕ Z ε_i.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Weight(Coords);

impl Weight {
    pub fn zero(n: usize) -> Self {
        Weight(SmallVec::from_elem(0, n))
    }

    pub fn from_slice(coords: &[i64]) -> Self {
        Weight(SmallVec::from_slice(coords))
    }

    /// ε_i (1-based).
    pub fn unit(n: usize, i: usize) -> Self {
        let mut w = Self::zero(n);
        w.0[i - 1] = 1;
        w
    }

    /// ϖ_j = ε_1 + ⋯ + ε_j.
    pub fn fundamental(n: usize, j: usize) -> Self {
        let mut w = Self::zero(n);
        for c in w.0.iter_mut().take(j) {
            *c = 1;
        }
        w
    }

    /// ρ = (n, n-1, …, 1).
    pub fn rho(n: usize) -> Self {
        Weight((0..n).map(|i| (n - i) as i64).collect())
    }

    pub fn rank(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    pub fn dot(&self, coroot: &Coroot) -> i64 {
        self.0.iter().zip(coroot.0.iter()).map(|(a, b)| a * b).sum()
    }

    /// Coefficients m_j in λ = Σ m_j ϖ_j.
    pub fn fundamental_coeffs(&self) -> Vec<i64> {
        let n = self.rank();
        (0..n)
            .map(|j| self.0[j] - if j + 1 < n { self.0[j + 1] } else { 0 })
            .collect()
    }

    /// If the weight is `sign·ε_J`, returns `(J, sign)`; the zero weight is `(∅, +1)`.
    pub fn as_signed_subset(&self) -> Option<(Vec<usize>, i64)> {
        if self.0.iter().all(|&c| c == 0 || c == 1) {
            Some((self.support(), 1))
        } else if self.0.iter().all(|&c| c == 0 || c == -1) {
            Some((self.support(), -1))
        } else {
            None
        }
    }

    fn support(&self) -> Vec<usize> {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0)
            .map(|(i, _)| i + 1)
            .collect()
    }
}

impl fmt::Debug for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_vec(f, self.0.iter())
    }
}

fn write_vec<T: fmt::Display>(
    f: &mut fmt::Formatter<'_>,
    items: impl Iterator<Item = T>,
) -> fmt::Result {
    write!(f, "(")?;
    for (i, c) in items.enumerate() {
        if i > 0 {
            write!(f, ",")?;
        }
        write!(f, "{c}")?;
    }
    write!(f, ")")
}

impl std::str::FromStr for Weight {
    type Err = RootSysError;

    /// Accepts `1,0,-1`, `(1,0,-1)` or `[1, 0, -1]`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let trimmed = s
            .trim()
            .trim_start_matches(['(', '['])
            .trim_end_matches([')', ']']);
        trimmed
            .split(',')
            .map(|t| t.trim().parse::<i64>())
            .collect::<Result<Coords, _>>()
            .map(Weight)
            .map_err(|_| RootSysError::Parse(s.to_string()))
    }
}

impl Serialize for Weight {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.0.as_slice().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Weight {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        Vec::<i64>::deserialize(d).map(|v| Weight::from_slice(&v))
    }
}

impl Add for &Weight {
    type Output = Weight;
    fn add(self, rhs: &Weight) -> Weight {
        Weight(
            self.0
                .iter()
                .zip(rhs.0.iter())
                .map(|(a, b)| a + b)
                .collect(),
        )
    }
}

impl Add for Weight {
    type Output = Weight;
    fn add(self, rhs: Weight) -> Weight {
        &self + &rhs
    }
}

impl AddAssign<&Weight> for Weight {
    fn add_assign(&mut self, rhs: &Weight) {
        for (a, b) in self.0.iter_mut().zip(rhs.0.iter()) {
            *a += b;
        }
    }
}

impl Sub for &Weight {
    type Output = Weight;
    fn sub(self, rhs: &Weight) -> Weight {
        Weight(
            self.0
                .iter()
                .zip(rhs.0.iter())
                .map(|(a, b)| a - b)
                .collect(),
        )
    }
}

impl Neg for &Weight {
    type Output = Weight;
    fn neg(self) -> Weight {
        Weight(self.0.iter().map(|a| -a).collect())
    }
}

impl Neg for Weight {
    type Output = Weight;
    fn neg(self) -> Weight {
        -&self
    }
}

impl Mul<&Weight> for i64 {
    type Output = Weight;
    fn mul(self, rhs: &Weight) -> Weight {
        Weight(rhs.0.iter().map(|a| self * a).collect())
    }
}

/// An element of the coroot lattice in ε^∨-coordinates.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Coroot(Coords);

impl Coroot {
    pub fn zero(n: usize) -> Self {
        Coroot(SmallVec::from_elem(0, n))
    }

    pub fn from_slice(coords: &[i64]) -> Self {
        Coroot(SmallVec::from_slice(coords))
    }

    /// Simple coroot α_i^∨: e_i - e_{i+1} for i < n, e_n for i = n.
    pub fn simple(n: usize, i: usize) -> Self {
        let mut c = Self::zero(n);
        c.0[i - 1] = 1;
        if i < n {
            c.0[i] = -1;
        }
        c
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }

    /// Coordinates d_i in the simple-coroot basis: d_i = c_1 + ⋯ + c_i.
    pub fn simple_coords(&self) -> Vec<i64> {
        self.0
            .iter()
            .scan(0, |acc, &c| {
                *acc += c;
                Some(*acc)
            })
            .collect()
    }
}

impl fmt::Debug for Coroot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Coroot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_vec(f, self.0.iter())
    }
}

impl Serialize for Coroot {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.0.as_slice().serialize(s)
    }
}

impl Add for &Coroot {
    type Output = Coroot;
    fn add(self, rhs: &Coroot) -> Coroot {
        Coroot(
            self.0
                .iter()
                .zip(rhs.0.iter())
                .map(|(a, b)| a + b)
                .collect(),
        )
    }
}

impl AddAssign<&Coroot> for Coroot {
    fn add_assign(&mut self, rhs: &Coroot) {
        for (a, b) in self.0.iter_mut().zip(rhs.0.iter()) {
            *a += b;
        }
    }
}

/// A root ±ε_i ± ε_j (i ≠ j) or ±2ε_i, membership checked on construction.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Root(Weight);

impl Root {
    pub fn new(vec: Weight) -> Result<Self, RootSysError> {
        let nonzero: Vec<i64> = vec.0.iter().copied().filter(|&c| c != 0).collect();
        let ok = match nonzero.as_slice() {
            [a] => a.abs() == 2,
            [a, b] => a.abs() == 1 && b.abs() == 1,
            _ => false,
        };
        if ok {
            Ok(Root(vec))
        } else {
            let n = vec.rank();
            Err(RootSysError::NotARoot(vec, n))
        }
    }

    /// ε_i - ε_j.
    pub fn minus(n: usize, i: usize, j: usize) -> Self {
        Root(&Weight::unit(n, i) - &Weight::unit(n, j))
    }

    /// ε_i + ε_j.
    pub fn plus(n: usize, i: usize, j: usize) -> Self {
        Root(&Weight::unit(n, i) + &Weight::unit(n, j))
    }

    /// 2ε_i.
    pub fn long(n: usize, i: usize) -> Self {
        Root(2 * &Weight::unit(n, i))
    }

    /// Simple root α_i: ε_i - ε_{i+1} for i < n, 2ε_n for i = n.
    pub fn simple(n: usize, i: usize) -> Self {
        if i < n {
            Self::minus(n, i, i + 1)
        } else {
            Self::long(n, n)
        }
    }

    pub fn weight(&self) -> &Weight {
        &self.0
    }

    pub fn rank(&self) -> usize {
        self.0.rank()
    }

    pub fn is_positive(&self) -> bool {
        self.0 .0.iter().find(|&&c| c != 0).is_some_and(|&c| c > 0)
    }

    pub fn is_long(&self) -> bool {
        self.0 .0.iter().any(|c| c.abs() == 2)
    }

    /// |α|: the positive representative of ±α.
    pub fn abs(&self) -> Root {
        if self.is_positive() {
            self.clone()
        } else {
            -self
        }
    }

    /// α^∨ = 2α/(α,α) in ε^∨-coordinates.
    pub fn coroot(&self) -> Coroot {
        if self.is_long() {
            Coroot(self.0 .0.iter().map(|c| c / 2).collect())
        } else {
            Coroot(self.0 .0.clone())
        }
    }

    /// Reflection s_α as a signed permutation.
    pub fn reflection(&self) -> SignedPerm {
        let n = self.rank();
        let mut window: Vec<i32> = (1..=n as i32).collect();
        let nz: Vec<(usize, i64)> = self
            .0
             .0
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0)
            .map(|(i, &c)| (i, c))
            .collect();
        match nz.as_slice() {
            [(i, _)] => window[*i] = -window[*i],
            [(i, a), (j, b)] => {
                // a·ε_i + b·ε_j with a, b = ±1: s maps i ↦ -a·b·j, j ↦ -a·b·i.
                let s = -(a * b) as i32;
                window[*i] = s * (*j as i32 + 1);
                window[*j] = s * (*i as i32 + 1);
            }
            _ => unreachable!("root invariant"),
        }
        SignedPerm { window }
    }
}

impl Neg for &Root {
    type Output = Root;
    fn neg(self) -> Root {
        Root(-&self.0)
    }
}

impl fmt::Debug for Root {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Root {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, &c) in self.0 .0.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let sign = if c < 0 {
                "-"
            } else if first {
                ""
            } else {
                "+"
            };
            let mag = if c.abs() == 1 {
                String::new()
            } else {
                c.abs().to_string()
            };
            write!(f, "{sign}{mag}e{}", i + 1)?;
            first = false;
        }
        Ok(())
    }
}

impl Serialize for Root {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.0.serialize(s)
    }
}

/// The n² positive roots, ordered by (i, kind, j) with kinds ε_i-ε_j < ε_i+ε_j < 2ε_i.
pub fn positive_roots(n: usize) -> Vec<Root> {
    let mut roots = Vec::with_capacity(n * n);
    for i in 1..=n {
        for j in i + 1..=n {
            roots.push(Root::minus(n, i, j));
        }
        for j in i + 1..=n {
            roots.push(Root::plus(n, i, j));
        }
        roots.push(Root::long(n, i));
    }
    roots
}

/// ⟨λ, α^∨⟩.
pub fn pairing(lambda: &Weight, alpha: &Root) -> i64 {
    lambda.dot(&alpha.coroot())
}

/// A Weyl group element of type C_n in window notation.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SignedPerm {
    window: Vec<i32>,
}

impl SignedPerm {
    pub fn new(window: Vec<i32>) -> Result<Self, RootSysError> {
        let n = window.len() as i32;
        let mut seen = vec![false; window.len()];
        for &v in &window {
            let a = v.unsigned_abs() as usize;
            if v == 0 || v.abs() > n || seen[a - 1] {
                return Err(RootSysError::InvalidWindow(window));
            }
            seen[a - 1] = true;
        }
        Ok(SignedPerm { window })
    }

    pub fn identity(n: usize) -> Self {
        SignedPerm {
            window: (1..=n as i32).collect(),
        }
    }

    /// w_∘ = (-1, -2, …, -n).
    pub fn longest(n: usize) -> Self {
        SignedPerm {
            window: (1..=n as i32).map(|v| -v).collect(),
        }
    }

    /// Simple reflection s_i.
    pub fn simple(n: usize, i: usize) -> Self {
        Root::simple(n, i).reflection()
    }

    pub fn rank(&self) -> usize {
        self.window.len()
    }

    pub fn window(&self) -> &[i32] {
        &self.window
    }

    /// w(k) for k ∈ {±1, …, ±n}.
    pub fn at(&self, k: i32) -> i32 {
        let v = self.window[k.unsigned_abs() as usize - 1];
        if k > 0 {
            v
        } else {
            -v
        }
    }

    pub fn is_identity(&self) -> bool {
        self.window
            .iter()
            .enumerate()
            .all(|(i, &v)| v == i as i32 + 1)
    }

    /// The product u·v, acting as (uv)(k) = u(v(k)).
    pub fn compose(&self, other: &SignedPerm) -> SignedPerm {
        SignedPerm {
            window: other.window.iter().map(|&k| self.at(k)).collect(),
        }
    }

    pub fn inverse(&self) -> SignedPerm {
        let mut window = vec![0; self.rank()];
        for (i, &v) in self.window.iter().enumerate() {
            let target = v.unsigned_abs() as usize - 1;
            window[target] = if v > 0 { i as i32 + 1 } else { -(i as i32 + 1) };
        }
        SignedPerm { window }
    }

    /// w·λ with w(ε_j) = ε_{w(j)} and ε_{-j} = -ε_j.
    pub fn apply(&self, lambda: &Weight) -> Weight {
        let mut out = Weight::zero(self.rank());
        for (j, &target) in self.window.iter().enumerate() {
            let idx = target.unsigned_abs() as usize - 1;
            let s = if target > 0 { 1 } else { -1 };
            out.0[idx] += s * lambda.0[j];
        }
        out
    }

    pub fn apply_root(&self, alpha: &Root) -> Root {
        Root(self.apply(alpha.weight()))
    }

    /// Right multiplication w ↦ w·s_α.
    pub fn reflect(&self, alpha: &Root) -> SignedPerm {
        self.compose(&alpha.reflection())
    }

    /// ℓ(w) = #{α ∈ Δ⁺ : w(α) ∈ -Δ⁺}.
    pub fn length(&self) -> usize {
        positive_roots(self.rank())
            .iter()
            .filter(|a| !self.apply_root(a).is_positive())
            .count()
    }

    /// All 2^n·n! elements, sorted by window.
    pub fn all(n: usize) -> Vec<SignedPerm> {
        let mut out = Vec::new();
        let mut perm: Vec<i32> = (1..=n as i32).collect();
        permutations(&mut perm, 0, &mut |p| {
            for mask in 0..(1u32 << n) {
                let window = p
                    .iter()
                    .enumerate()
                    .map(|(i, &v)| if mask & (1 << i) != 0 { -v } else { v })
                    .collect();
                out.push(SignedPerm { window });
            }
        });
        out.sort();
        out
    }
}

fn permutations(items: &mut [i32], k: usize, visit: &mut impl FnMut(&[i32])) {
    if k == items.len() {
        visit(items);
        return;
    }
    for i in k..items.len() {
        items.swap(k, i);
        permutations(items, k + 1, visit);
        items.swap(k, i);
    }
}

impl fmt::Debug for SignedPerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for SignedPerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_vec(f, self.window.iter())
    }
}

impl Serialize for SignedPerm {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.window.serialize(s)
    }
}

/// sign·ε_J for J ⊆ [1, n] (1-based indices).
pub fn eps_set(n: usize, subset: &[usize], sign: i64) -> Result<Weight, RootSysError> {
    let mut w = Weight::zero(n);
    for &j in subset {
        if j == 0 || j > n {
            return Err(RootSysError::IndexOutOfRange { index: j, rank: n });
        }
        w.0[j - 1] = sign;
    }
    Ok(w)
}

/// (L_J, M_J): L_J = {j ∈ J : j+1 ∉ J}, M_J = {j ∉ J : j+1 ∈ J}, with n+1 ∉ J.
pub fn boundary_sets(n: usize, subset: &[usize]) -> (Vec<usize>, Vec<usize>) {
    let inside = |j: usize| j <= n && subset.contains(&j);
    let l = (1..=n).filter(|&j| inside(j) && !inside(j + 1)).collect();
    let m = (1..=n).filter(|&j| !inside(j) && inside(j + 1)).collect();
    (l, m)
}

/// All subsets of {lo, …, hi} in increasing binary order (empty set first).
pub fn subsets(lo: usize, hi: usize) -> Vec<Vec<usize>> {
    if hi < lo {
        return vec![Vec::new()];
    }
    let size = hi - lo + 1;
    (0..(1u64 << size))
        .map(|mask| {
            (0..size)
                .filter(|b| mask & (1 << b) != 0)
                .map(|b| lo + b)
                .collect()
        })
        .collect()
}

/// Subsets of {lo, …, hi} with exactly `d` elements.
pub fn subsets_of_size(lo: usize, hi: usize, d: usize) -> Vec<Vec<usize>> {
    subsets(lo, hi)
        .into_iter()
        .filter(|s| s.len() == d)
        .collect()
}
