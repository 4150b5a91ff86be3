//! Admissible subsets of a λ-chain and the Chevalley operators built on them.
//!
//! The quantum operator for λ = ±ε_J is
//! `[O(λ)] ⋆ [O^w] = Σ_A (-1)^{n(A)} e^{-wt(A)} Q^{down(A)} [O^{ed(A)}]`,
//! and the classical one keeps only the records with `down(A) = 0`.
//! [`semi_infinite_expand`] keeps the geometric `1/(1 - st_j)` factors explicit
//! so the cancellation behind the quantum operator can be audited.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex};

use serde::Serialize;
use thiserror::Error;

use crate::alcove::{affine_reflect, reduced_chain, AlcoveError, LambdaChain};
use crate::polyring::{qexp_of_coroot, CharElem, PolyError, QExp, QkClass};
use crate::qbg::{edge_type_by_pattern, EdgeKind};
use crate::rootsys::{boundary_sets, Coroot, SignedPerm, Weight};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ChevalleyError {
    #[error("unsupported weight class {0}: the quantum operator needs λ = ±ε_J")]
    UnsupportedWeight(Weight),
    #[error("rank mismatch: engine has rank {engine}, argument has rank {arg}")]
    RankMismatch { engine: usize, arg: usize },
    #[error(transparent)]
    Alcove(#[from] AlcoveError),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AdmissibleRecord {
    #[serde(serialize_with = "ser_window")]
    pub end: SignedPerm,
    pub neg_count: usize,
    pub wt: Weight,
    pub down: Coroot,
    /// Chosen chain positions (1-based).
    pub positions: Vec<usize>,
}

fn ser_window<S: serde::Serializer>(w: &SignedPerm, s: S) -> Result<S::Ok, S::Error> {
    w.window().serialize(s)
}

/// Depth-first enumeration (skip before take) of the admissible subsets of `chain`
/// starting at `w`.
pub fn admissible_subsets(w: &SignedPerm, chain: &LambdaChain) -> Vec<AdmissibleRecord> {
    let n = w.rank();
    let mut out = Vec::new();
    let mut positions = Vec::new();
    dfs(
        w,
        chain,
        0,
        w.clone(),
        0,
        Coroot::zero(n),
        &mut positions,
        &mut out,
    );
    out
}

#[allow(clippy::too_many_arguments)]
fn dfs(
    start: &SignedPerm,
    chain: &LambdaChain,
    k: usize,
    current: SignedPerm,
    neg: usize,
    down: Coroot,
    positions: &mut Vec<usize>,
    out: &mut Vec<AdmissibleRecord>,
) {
    if k == chain.steps.len() {
        out.push(AdmissibleRecord {
            wt: record_weight(start, chain, positions),
            end: current,
            neg_count: neg,
            down,
            positions: positions.clone(),
        });
        return;
    }
    dfs(
        start,
        chain,
        k + 1,
        current.clone(),
        neg,
        down.clone(),
        positions,
        out,
    );
    let gamma = &chain.steps[k].gamma;
    let root = gamma.abs();
    let kind = edge_type_by_pattern(&current, &root);
    if !kind.is_edge() {
        return;
    }
    let next = current.reflect(&root);
    let neg = neg + usize::from(!gamma.is_positive());
    let down = if kind == EdgeKind::Quantum {
        &down + &root.coroot()
    } else {
        down
    };
    positions.push(k + 1);
    dfs(start, chain, k + 1, next, neg, down, positions, out);
    positions.pop();
}

/// wt(A) = -w ĥ_{i_1} ⋯ ĥ_{i_t}(-λ).
fn record_weight(w: &SignedPerm, chain: &LambdaChain, positions: &[usize]) -> Weight {
    let mut mu = -&chain.lambda;
    for &p in positions.iter().rev() {
        mu = affine_reflect(&chain.steps[p - 1], &mu);
    }
    -&w.apply(&mu)
}

/// One aggregated term `coeff · e^{shift} · Q^q · [O^end]` of an operator image.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Term {
    end: SignedPerm,
    shift: Weight,
    q: QExp,
    coeff: i64,
}

type TermCache = HashMap<(Weight, SignedPerm), Arc<Vec<Term>>>;

/// Chevalley operators for one rank and one chain seed; chains and per-(λ, w)
/// expansions are computed lazily and cached.
pub struct ChevalleyEngine {
    rank: usize,
    seed: u64,
    chains: Mutex<HashMap<Weight, Arc<LambdaChain>>>,
    terms: Mutex<TermCache>,
}

impl ChevalleyEngine {
    pub fn new(rank: usize, seed: u64) -> Self {
        ChevalleyEngine {
            rank,
            seed,
            chains: Mutex::default(),
            terms: Mutex::default(),
        }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    fn check_rank(&self, r: usize) -> Result<(), ChevalleyError> {
        if r != self.rank {
            return Err(ChevalleyError::RankMismatch {
                engine: self.rank,
                arg: r,
            });
        }
        Ok(())
    }

    pub fn chain(&self, lambda: &Weight) -> Result<Arc<LambdaChain>, ChevalleyError> {
        self.check_rank(lambda.rank())?;
        if let Some(c) = self.chains.lock().unwrap().get(lambda) {
            return Ok(c.clone());
        }
        let c = Arc::new(reduced_chain(lambda, self.seed)?);
        self.chains
            .lock()
            .unwrap()
            .insert(lambda.clone(), c.clone());
        Ok(c)
    }

    pub fn records(
        &self,
        lambda: &Weight,
        w: &SignedPerm,
    ) -> Result<Vec<AdmissibleRecord>, ChevalleyError> {
        self.check_rank(w.rank())?;
        let chain = self.chain(lambda)?;
        Ok(admissible_subsets(w, &chain))
    }

    fn terms(&self, lambda: &Weight, w: &SignedPerm) -> Result<Arc<Vec<Term>>, ChevalleyError> {
        let key = (lambda.clone(), w.clone());
        if let Some(t) = self.terms.lock().unwrap().get(&key) {
            return Ok(t.clone());
        }
        let mut agg: BTreeMap<(SignedPerm, Weight, QExp), i64> = BTreeMap::new();
        for r in self.records(lambda, w)? {
            let sign = if r.neg_count % 2 == 0 { 1 } else { -1 };
            let q = qexp_of_coroot(&r.down)?;
            *agg.entry((r.end, -&r.wt, q)).or_default() += sign;
        }
        let terms: Vec<Term> = agg
            .into_iter()
            .filter(|(_, c)| *c != 0)
            .map(|((end, shift, q), coeff)| Term {
                end,
                shift,
                q,
                coeff,
            })
            .collect();
        let terms = Arc::new(terms);
        self.terms.lock().unwrap().insert(key, terms.clone());
        Ok(terms)
    }

    fn apply(
        &self,
        lambda: &Weight,
        z: &QkClass,
        quantum: bool,
    ) -> Result<QkClass, ChevalleyError> {
        self.check_rank(lambda.rank())?;
        self.check_rank(z.rank())?;
        let mut out = QkClass::zero(self.rank, z.trunc_degree());
        for (w, c) in z.coeffs() {
            for t in self.terms(lambda, w)?.iter() {
                if quantum || t.q.is_zero() {
                    out.add_shifted(&t.end, c, t.coeff, &t.shift, &t.q);
                }
            }
        }
        Ok(out)
    }

    /// [O(λ)] · Z in K_T(G/B), for any weight λ, applied coefficient-wise.
    pub fn classical_line_mult(
        &self,
        lambda: &Weight,
        z: &QkClass,
    ) -> Result<QkClass, ChevalleyError> {
        self.apply(lambda, z, false)
    }

    /// [O(λ)] ⋆ Z for λ = ±ε_J, truncated at the degree of Z.
    pub fn quantum_line_mult(
        &self,
        lambda: &Weight,
        z: &QkClass,
    ) -> Result<QkClass, ChevalleyError> {
        require_signed_subset(lambda)?;
        self.apply(lambda, z, true)
    }
}

impl fmt::Debug for ChevalleyEngine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ChevalleyEngine")
            .field("rank", &self.rank)
            .field("seed", &self.seed)
            .finish()
    }
}

fn require_signed_subset(lambda: &Weight) -> Result<(Vec<usize>, i64), ChevalleyError> {
    lambda
        .as_signed_subset()
        .ok_or_else(|| ChevalleyError::UnsupportedWeight(lambda.clone()))
}

/// Indices j carrying a `1/(1 - st_j)` factor in [O_Q(λ)] for λ = ±ε_J:
/// L_J for +ε_J and M_J for -ε_J.
pub fn par_indices(lambda: &Weight) -> Result<Vec<usize>, ChevalleyError> {
    let (j, sign) = require_signed_subset(lambda)?;
    if j.is_empty() {
        return Ok(Vec::new());
    }
    let (l, m) = boundary_sets(lambda.rank(), &j);
    Ok(if sign > 0 { l } else { m })
}

/// A finite combination Σ c · st_ξ [O_{Q(w)}] with ξ truncated at total degree D.
#[derive(Clone, PartialEq, Eq)]
pub struct SemiInfiniteClass {
    rank: usize,
    trunc: u32,
    coeffs: BTreeMap<(SignedPerm, QExp), CharElem>,
}

impl SemiInfiniteClass {
    pub fn zero(rank: usize, trunc: u32) -> Self {
        SemiInfiniteClass {
            rank,
            trunc,
            coeffs: BTreeMap::new(),
        }
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

    pub fn coeff(&self, w: &SignedPerm, xi: &QExp) -> CharElem {
        self.coeffs
            .get(&(w.clone(), xi.clone()))
            .cloned()
            .unwrap_or_default()
    }

    pub fn coeffs(&self) -> impl Iterator<Item = (&(SignedPerm, QExp), &CharElem)> {
        self.coeffs.iter()
    }

    fn add(&mut self, w: &SignedPerm, xi: QExp, c: &CharElem, sign: i64, shift: &Weight) {
        if xi.degree() > self.trunc {
            return;
        }
        let key = (w.clone(), xi);
        let slot = self.coeffs.entry(key.clone()).or_default();
        slot.add_shifted(c, sign, shift);
        if slot.is_zero() {
            self.coeffs.remove(&key);
        }
    }

    /// Φ(e^μ Q^ξ [O^w]) = e^{-μ} st_ξ [O_{Q(w)}], extended additively.
    pub fn phi(z: &QkClass) -> Self {
        let n = z.rank();
        let mut out = SemiInfiniteClass::zero(n, z.trunc_degree());
        let zero = Weight::zero(n);
        for (w, c) in z.coeffs() {
            for (xi, ch) in c.terms() {
                out.add(w, xi.clone(), &ch.dual(), 1, &zero);
            }
        }
        out
    }

    /// st_ξ applied to every term.
    fn translate(&self, xi: &QExp) -> Self {
        let mut out = SemiInfiniteClass::zero(self.rank, self.trunc);
        let zero = Weight::zero(self.rank);
        for ((w, x), c) in &self.coeffs {
            out.add(w, x + xi, c, 1, &zero);
        }
        out
    }

    fn combine(&mut self, other: &SemiInfiniteClass, sign: i64) {
        let zero = Weight::zero(self.rank);
        for ((w, x), c) in &other.coeffs {
            self.add(w, x.clone(), c, sign, &zero);
        }
    }

    /// (1 - st_j) · self.
    pub fn one_minus_st(&self, j: usize) -> Self {
        let mut out = self.clone();
        out.combine(&self.translate(&QExp::var(self.rank, j)), -1);
        out
    }

    /// Σ_{m=0}^{D} st_j^m · self, the truncated 1/(1 - st_j).
    pub fn geometric(&self, j: usize) -> Self {
        let step = QExp::var(self.rank, j);
        let mut out = SemiInfiniteClass::zero(self.rank, self.trunc);
        let mut cur = self.clone();
        for _ in 0..=self.trunc {
            out.combine(&cur, 1);
            cur = cur.translate(&step);
        }
        out
    }
}

impl fmt::Debug for SemiInfiniteClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for SemiInfiniteClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        for (i, ((w, xi), c)) in self.coeffs.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({c})*st[{xi}]*O_Q{w}")?;
        }
        Ok(())
    }
}

/// [O_{Q(w)}(λ)] for λ = ±ε_J with the Par(λ) geometric factors written out.
pub fn semi_infinite_expand(
    engine: &ChevalleyEngine,
    lambda: &Weight,
    w: &SignedPerm,
    trunc: u32,
) -> Result<SemiInfiniteClass, ChevalleyError> {
    let par = par_indices(lambda)?;
    let n = engine.rank();
    let mut base = SemiInfiniteClass::zero(n, trunc);
    let one = CharElem::one(n);
    for r in engine.records(lambda, w)? {
        let sign = if r.neg_count % 2 == 0 { 1 } else { -1 };
        base.add(&r.end, qexp_of_coroot(&r.down)?, &one, sign, &r.wt);
    }
    Ok(par.iter().fold(base, |acc, &j| acc.geometric(j)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyring::{one_minus_q, qk_equal, NovikovPoly};
    use crate::rootsys::{eps_set, subsets, Root};
    use proptest::prelude::*;

    fn wt(c: &[i64]) -> Weight {
        Weight::from_slice(c)
    }

    fn signed_subsets(n: usize) -> Vec<Weight> {
        let mut out = Vec::new();
        for j in subsets(1, n) {
            if j.is_empty() {
                continue;
            }
            out.push(eps_set(n, &j, 1).unwrap());
            out.push(eps_set(n, &j, -1).unwrap());
        }
        out
    }

    fn e_mono(c: &[i64]) -> CharElem {
        CharElem::monomial(wt(c))
    }

    fn class(n: usize, trunc: u32, terms: &[(SignedPerm, QExp, CharElem)]) -> QkClass {
        let mut z = QkClass::zero(n, trunc);
        for (w, q, c) in terms {
            z.add_shifted(
                w,
                &NovikovPoly::monomial(n, q.clone(), c.clone(), trunc),
                1,
                &Weight::zero(n),
                &QExp::zero(n),
            );
        }
        z
    }

    #[test]
    fn empty_chain_gives_one_record() {
        let eng = ChevalleyEngine::new(2, 0);
        for w in SignedPerm::all(2) {
            let recs = eng.records(&Weight::zero(2), &w).unwrap();
            assert_eq!(recs.len(), 1);
            assert_eq!(recs[0].end, w);
            assert_eq!(recs[0].neg_count, 0);
            assert!(recs[0].wt.is_zero() && recs[0].down.is_zero());
        }
    }

    #[test]
    fn empty_record_has_weight_w_lambda() {
        let eng = ChevalleyEngine::new(3, 0);
        let lam = wt(&[1, -1, 2]);
        for w in SignedPerm::all(3) {
            let recs = eng.records(&lam, &w).unwrap();
            assert!(recs[0].positions.is_empty());
            assert_eq!(recs[0].wt, w.apply(&lam));
        }
    }

    #[test]
    fn rank_one_records() {
        let eng = ChevalleyEngine::new(1, 0);
        let e = SignedPerm::identity(1);
        let s1 = SignedPerm::simple(1, 1);
        let m = wt(&[-1]);
        let recs = eng.records(&m, &e).unwrap();
        assert_eq!(recs.len(), 2);
        assert_eq!(
            (recs[0].end.clone(), recs[0].neg_count, recs[0].wt.clone()),
            (e.clone(), 0, m.clone())
        );
        assert_eq!(
            (recs[1].end.clone(), recs[1].neg_count, recs[1].wt.clone()),
            (s1.clone(), 1, m.clone())
        );
        assert!(recs.iter().all(|r| r.down.is_zero()));

        let recs = eng.records(&m, &s1).unwrap();
        assert_eq!(recs.len(), 2);
        let taken = &recs[1];
        assert_eq!(taken.end, e);
        assert_eq!(taken.neg_count, 1);
        assert_eq!(taken.down, Root::long(1, 1).coroot());
        // -s_1 ĥ_1(ε_1) with ĥ_1 fixing ε_1.
        assert_eq!(taken.wt, wt(&[1]));
    }

    #[test]
    fn rank_one_classical_products() {
        let eng = ChevalleyEngine::new(1, 0);
        let e = SignedPerm::identity(1);
        let s1 = SignedPerm::simple(1, 1);
        let unit = QkClass::unit(1, 0);
        let q0 = QExp::zero(1);
        let plus = eng.classical_line_mult(&wt(&[1]), &unit).unwrap();
        let expect = class(
            1,
            0,
            &[
                (e.clone(), q0.clone(), e_mono(&[-1])),
                (s1.clone(), q0.clone(), e_mono(&[1])),
            ],
        );
        assert_eq!(plus, expect);
        let minus = eng.classical_line_mult(&wt(&[-1]), &unit).unwrap();
        let expect = class(
            1,
            0,
            &[
                (e.clone(), q0.clone(), e_mono(&[1])),
                (s1.clone(), q0.clone(), -&e_mono(&[1])),
            ],
        );
        assert_eq!(minus, expect);
        let z = &plus + &minus;
        assert_eq!(eng.classical_line_mult(&wt(&[0]), &z).unwrap(), z);
    }

    #[test]
    fn rank_one_quantum_products() {
        let eng = ChevalleyEngine::new(1, 0);
        let e = SignedPerm::identity(1);
        let s1 = SignedPerm::simple(1, 1);
        let d = 3;
        let got = eng
            .quantum_line_mult(&wt(&[-1]), &QkClass::schubert(s1.clone(), d))
            .unwrap();
        let expect = class(
            1,
            d,
            &[
                (s1.clone(), QExp::zero(1), e_mono(&[-1])),
                (e.clone(), QExp::var(1, 1), -&e_mono(&[-1])),
            ],
        );
        assert_eq!(got, expect);

        let plus = eng
            .quantum_line_mult(&wt(&[1]), &QkClass::unit(1, d))
            .unwrap();
        let prod = eng.quantum_line_mult(&wt(&[-1]), &plus).unwrap();
        assert_eq!(prod, QkClass::scalar(1, one_minus_q(1, 1, d)));
    }

    #[test]
    fn unsupported_weights_are_rejected() {
        let eng = ChevalleyEngine::new(2, 0);
        let z = QkClass::unit(2, 2);
        for bad in [wt(&[2, 0]), wt(&[1, -1]), wt(&[2, 1])] {
            assert!(matches!(
                eng.quantum_line_mult(&bad, &z),
                Err(ChevalleyError::UnsupportedWeight(_))
            ));
            assert!(eng.classical_line_mult(&bad, &z).is_ok());
        }
        assert!(matches!(
            eng.quantum_line_mult(&wt(&[1]), &z),
            Err(ChevalleyError::RankMismatch { .. })
        ));
    }

    #[test]
    fn quantum_at_q_zero_is_classical() {
        for n in 1..=2 {
            let eng = ChevalleyEngine::new(n, 0);
            for lam in signed_subsets(n) {
                for w in SignedPerm::all(n) {
                    let z = QkClass::schubert(w, 2);
                    let q = eng.quantum_line_mult(&lam, &z).unwrap().truncate(0);
                    let c = eng.classical_line_mult(&lam, &z.truncate(0)).unwrap();
                    assert_eq!(q, c, "λ={lam}");
                }
            }
        }
    }

    #[test]
    fn records_from_identity_never_go_down() {
        for n in 1..=3 {
            for seed in [0, 11] {
                let eng = ChevalleyEngine::new(n, seed);
                for lam in signed_subsets(n) {
                    for r in eng.records(&lam, &SignedPerm::identity(n)).unwrap() {
                        assert!(r.down.is_zero(), "λ={lam} seed={seed}");
                    }
                }
            }
        }
    }

    #[test]
    fn fundamental_chains_from_identity_use_bruhat_edges() {
        for n in 1..=3 {
            for seed in [0, 5] {
                let eng = ChevalleyEngine::new(n, seed);
                for k in 1..=n {
                    let lam = Weight::fundamental(n, k);
                    let chain = eng.chain(&lam).unwrap();
                    for r in admissible_subsets(&SignedPerm::identity(n), &chain) {
                        let mut cur = SignedPerm::identity(n);
                        for &p in &r.positions {
                            let root = chain.steps[p - 1].gamma.abs();
                            assert_eq!(
                                edge_type_by_pattern(&cur, &root),
                                EdgeKind::Bruhat,
                                "n={n} λ={lam}"
                            );
                            cur = cur.reflect(&root);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn doubled_weight_admits_a_quantum_step() {
        // Γ(2ε_1) = [(2ε_1, 0), (2ε_1, 1)] and e → s_1 → e is admissible.
        let eng = ChevalleyEngine::new(1, 0);
        let recs = eng.records(&wt(&[2]), &SignedPerm::identity(1)).unwrap();
        assert!(recs
            .iter()
            .any(|r| r.positions == vec![1, 2] && !r.down.is_zero()));
    }

    #[test]
    fn quantum_operators_commute() {
        for n in 1..=2 {
            let eng = ChevalleyEngine::new(n, 0);
            let weights = signed_subsets(n);
            for w in SignedPerm::all(n) {
                let z = QkClass::schubert(w, 2);
                for a in &weights {
                    for b in &weights {
                        let ab = eng
                            .quantum_line_mult(a, &eng.quantum_line_mult(b, &z).unwrap())
                            .unwrap();
                        let ba = eng
                            .quantum_line_mult(b, &eng.quantum_line_mult(a, &z).unwrap())
                            .unwrap();
                        assert_eq!(ab, ba, "λ={a} μ={b}");
                    }
                }
            }
        }
    }

    #[test]
    fn sampled_rank_three_commutativity() {
        let eng = ChevalleyEngine::new(3, 0);
        let pairs = [
            (wt(&[1, 0, 1]), wt(&[0, -1, -1])),
            (wt(&[-1, 0, 0]), wt(&[1, 1, 1])),
            (wt(&[0, 1, 0]), wt(&[0, 0, -1])),
        ];
        for w in [
            SignedPerm::identity(3),
            SignedPerm::simple(3, 3),
            SignedPerm::new(vec![-2, 3, -1]).unwrap(),
        ] {
            let z = QkClass::schubert(w, 2);
            for (a, b) in &pairs {
                let ab = eng
                    .quantum_line_mult(a, &eng.quantum_line_mult(b, &z).unwrap())
                    .unwrap();
                let ba = eng
                    .quantum_line_mult(b, &eng.quantum_line_mult(a, &z).unwrap())
                    .unwrap();
                assert!(qk_equal(&ab, &ba).unwrap());
            }
        }
    }

    #[test]
    fn chain_seed_does_not_change_products() {
        for n in 1..=3 {
            let a = ChevalleyEngine::new(n, 0);
            let b = ChevalleyEngine::new(n, 1234);
            for lam in signed_subsets(n) {
                for w in SignedPerm::all(n) {
                    let z = QkClass::schubert(w, 2);
                    assert_eq!(
                        a.quantum_line_mult(&lam, &z).unwrap(),
                        b.quantum_line_mult(&lam, &z).unwrap()
                    );
                }
            }
        }
    }

    #[test]
    fn semi_infinite_rank_one() {
        let eng = ChevalleyEngine::new(1, 0);
        let e = SignedPerm::identity(1);
        let s1 = SignedPerm::simple(1, 1);
        let got = semi_infinite_expand(&eng, &wt(&[1]), &e, 2).unwrap();
        assert_eq!(got.coeffs().count(), 6);
        for m in 0..=2u32 {
            let xi = QExp::from_slice(&[m]);
            assert_eq!(got.coeff(&e, &xi), e_mono(&[1]));
            assert_eq!(got.coeff(&s1, &xi), e_mono(&[-1]));
        }
        let got = semi_infinite_expand(&eng, &wt(&[-1]), &e, 2).unwrap();
        assert_eq!(got.coeffs().count(), 2);
        assert_eq!(got.coeff(&e, &QExp::zero(1)), e_mono(&[-1]));
        assert_eq!(got.coeff(&s1, &QExp::zero(1)), -&e_mono(&[-1]));
    }

    #[test]
    fn correspondence_factors_cancel() {
        // ∏ (1 - st_j) over the Par indices turns [O_{Q(w)}(λ)] into Φ([O(λ)] ⋆ [O^w]).
        let d = 2;
        for n in 1..=3 {
            let eng = ChevalleyEngine::new(n, 0);
            for lam in signed_subsets(n) {
                let par = par_indices(&lam).unwrap();
                let ws: Vec<SignedPerm> = if n < 3 {
                    SignedPerm::all(n)
                } else {
                    vec![SignedPerm::identity(3), SignedPerm::longest(3)]
                };
                for w in ws {
                    let raw = semi_infinite_expand(&eng, &lam, &w, d).unwrap();
                    let cancelled = par.iter().fold(raw, |acc, &j| acc.one_minus_st(j));
                    let prod = eng
                        .quantum_line_mult(&lam, &QkClass::schubert(w.clone(), d))
                        .unwrap();
                    assert_eq!(cancelled, SemiInfiniteClass::phi(&prod), "λ={lam} w={w}");
                }
            }
        }
    }

    #[test]
    fn full_boundary_set_for_positive_weights() {
        // Φ of the classical expansion of [O(ε_J)] matches ∏_{j ∈ L_J} (1 - st_j) [O_Q(ε_J)].
        let d = 3;
        let n = 2;
        let eng = ChevalleyEngine::new(n, 0);
        for j in [vec![1], vec![2], vec![1, 2]] {
            let lam = eps_set(n, &j, 1).unwrap();
            let (l, _) = boundary_sets(n, &j);
            let raw = semi_infinite_expand(&eng, &lam, &SignedPerm::identity(n), d).unwrap();
            let cancelled = l.iter().fold(raw, |acc, &k| acc.one_minus_st(k));
            let classical = eng.classical_line_mult(&lam, &QkClass::unit(n, d)).unwrap();
            assert_eq!(cancelled, SemiInfiniteClass::phi(&classical), "J={j:?}");
        }
    }

    #[test]
    fn records_dump_as_json_rows() {
        let eng = ChevalleyEngine::new(1, 0);
        let recs = eng.records(&wt(&[-1]), &SignedPerm::simple(1, 1)).unwrap();
        let v = serde_json::to_value(&recs).unwrap();
        assert_eq!(v[1]["end"], serde_json::json!([1]));
        assert_eq!(v[1]["neg_count"], 1);
    }

    fn small_weight(n: usize) -> impl Strategy<Value = Weight> {
        proptest::collection::vec(-1i64..=1, n).prop_map(|v| Weight::from_slice(&v))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn classical_products_are_multiplicative(
            (lam, mu) in (2usize..=3).prop_flat_map(|n| (small_weight(n), small_weight(n)))
        ) {
            let n = lam.rank();
            let eng = ChevalleyEngine::new(n, 0);
            let one = QkClass::unit(n, 0);
            let lhs = eng.classical_line_mult(&lam, &eng.classical_line_mult(&mu, &one).unwrap()).unwrap();
            let rhs = eng.classical_line_mult(&(&lam + &mu), &one).unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn record_invariants(
            lam in small_weight(3),
            idx in 0usize..48,
        ) {
            let w = SignedPerm::all(3)[idx].clone();
            let eng = ChevalleyEngine::new(3, 0);
            for r in eng.records(&lam, &w).unwrap() {
                prop_assert!(r.neg_count <= r.positions.len());
                prop_assert!(r.down.simple_coords().iter().all(|&c| c >= 0));
                let q = qexp_of_coroot(&r.down).unwrap();
                prop_assert_eq!(q.is_zero(), r.down.is_zero());
            }
        }

        #[test]
        fn truncation_commutes_with_products(lam_idx in 0usize..6, idx in 0usize..8) {
            let eng = ChevalleyEngine::new(2, 0);
            let lam = signed_subsets(2)[lam_idx].clone();
            let z = QkClass::schubert(SignedPerm::all(2)[idx].clone(), 3);
            let hi = eng.quantum_line_mult(&lam, &z).unwrap().truncate(1);
            let lo = eng.quantum_line_mult(&lam, &z.truncate(1)).unwrap();
            prop_assert_eq!(hi, lo);
        }
    }
}
