//! Identity checks. Each check builds both sides from `qkring` primitives and
//! compares them exactly; a mismatch is reported with the rendered residual
//! LHS - RHS rather than raised.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;
use std::time::Instant;

use num_bigint::BigInt;
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::chevalley::{ChevalleyEngine, ChevalleyError};
use crate::polyring::{
    elementary_symmetric_char, geometric_factor, one_minus_q, q_tail_product, CharElem,
    NovikovPoly, QkClass,
};
use crate::qbg::{edge_type_by_length, edge_type_by_pattern};
use crate::qkring::{render_class, Bundle, LambdaYPoly, LineCombo, QkRing};
use crate::rootsys::{eps_set, positive_roots, subsets, SignedPerm, Weight};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub params: BTreeMap<String, Value>,
    pub status: Status,
    /// Empty iff the check passed.
    pub residual: String,
    pub wall_time_ms: f64,
}

impl CheckResult {
    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

/// Deliberate perturbations used to show the checks are not vacuous. Each one
/// removes a single `(1 - Q)`-type factor from one relation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mutation {
    None,
    /// Whitney relations 1 and 2 without the y·Q_{k-1}/(1-Q_{k-1}) term.
    WhitneyCorrection,
    /// Whitney relation 3 with 1/(1-Q_{p-1}) replaced by 1.
    Whitney3Factor,
    /// Quantum inverse with (1-Q_{j-1}) dropped from the right-hand side.
    InverseFactor,
    /// Multiple-line identity without the (1-Q_{k-1}) factor.
    MultipleLineFactor,
    /// Presentation generators with 1/(1-Q_{k-1}) replaced by 1.
    PresentationFactor,
    /// φ_J(j) = 1/(1-Q_j) replaced by 1 in the Borel relation.
    BorelFactor,
    /// (1-Q_p)/(1-Q_{p-1}) replaced by 1 in the second lemma.
    LemmaFactor,
}

impl Mutation {
    pub const ALL: [Mutation; 7] = [
        Mutation::WhitneyCorrection,
        Mutation::Whitney3Factor,
        Mutation::InverseFactor,
        Mutation::MultipleLineFactor,
        Mutation::PresentationFactor,
        Mutation::BorelFactor,
        Mutation::LemmaFactor,
    ];
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VerifyError {
    #[error("no check matches `{pattern}`; available checks:\n{}", available.join("\n"))]
    UnknownSelector {
        pattern: String,
        available: Vec<String>,
    },
    #[error("invalid selector `{0}`: {1}")]
    BadPattern(String, String),
}

/// One selectable check with its parameters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CheckSpec {
    Whitney1 {
        k: usize,
    },
    Whitney2 {
        k: usize,
    },
    Whitney3,
    QuantumInverse {
        j: usize,
    },
    Borel {
        d: usize,
    },
    MultipleLine {
        subset: Vec<usize>,
        k: usize,
        dual: bool,
    },
    LemmaProducts {
        d: usize,
        p: usize,
    },
    Presentation,
    ClassicalLimit,
    QamAm {
        subset: Vec<usize>,
        sign: i64,
    },
    QamAmControl,
    ChainIndependence {
        subset: Vec<usize>,
        sign: i64,
    },
    Rank1Oracle,
    EdgeEquivalence,
}

fn set_label(s: &[usize]) -> String {
    s.iter()
        .map(|j| j.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

fn sign_label(sign: i64) -> &'static str {
    if sign > 0 {
        "+"
    } else {
        "-"
    }
}

impl CheckSpec {
    pub fn name(&self) -> String {
        match self {
            CheckSpec::Whitney1 { k } => format!("whitney1/k={k}"),
            CheckSpec::Whitney2 { k } => format!("whitney2/k={k}"),
            CheckSpec::Whitney3 => "whitney3".into(),
            CheckSpec::QuantumInverse { j } => format!("quantum_inverse/j={j}"),
            CheckSpec::Borel { d } => format!("borel/d={d}"),
            CheckSpec::MultipleLine { subset, k, dual } => {
                format!(
                    "multiple_line/{}/J={}/k={k}",
                    if *dual { "dual" } else { "neg" },
                    set_label(subset)
                )
            }
            CheckSpec::LemmaProducts { d, p } => format!("lemma_products/d={d}/p={p}"),
            CheckSpec::Presentation => "presentation".into(),
            CheckSpec::ClassicalLimit => "classical_limit".into(),
            CheckSpec::QamAm { subset, sign } => {
                format!("qam_am/J={}/{}", set_label(subset), sign_label(*sign))
            }
            CheckSpec::QamAmControl => "qam_am/control".into(),
            CheckSpec::ChainIndependence { subset, sign } => {
                format!(
                    "chain_independence/J={}/{}",
                    set_label(subset),
                    sign_label(*sign)
                )
            }
            CheckSpec::Rank1Oracle => "rank1_oracle".into(),
            CheckSpec::EdgeEquivalence => "edge_equivalence".into(),
        }
    }

    fn params(&self, cfg: &SuiteConfig) -> BTreeMap<String, Value> {
        let mut m = BTreeMap::new();
        m.insert("n".to_string(), json!(cfg.n));
        m.insert("D".to_string(), json!(cfg.trunc));
        let mut put = |k: &str, v: Value| {
            m.insert(k.to_string(), v);
        };
        match self {
            CheckSpec::Whitney1 { k } | CheckSpec::Whitney2 { k } => put("k", json!(k)),
            CheckSpec::QuantumInverse { j } => put("j", json!(j)),
            CheckSpec::Borel { d } => put("d", json!(d)),
            CheckSpec::MultipleLine { subset, k, dual } => {
                put("J", json!(subset));
                put("k", json!(k));
                put("dual", json!(dual));
            }
            CheckSpec::LemmaProducts { d, p } => {
                put("d", json!(d));
                put("p", json!(p));
            }
            CheckSpec::QamAm { subset, sign } | CheckSpec::ChainIndependence { subset, sign } => {
                put("J", json!(subset));
                put("sign", json!(sign));
                put("seeds", json!([cfg.seed, cfg.seed2]));
            }
            CheckSpec::Rank1Oracle | CheckSpec::QamAmControl => {
                put("n", json!(1));
            }
            _ => {}
        }
        if cfg.mutation != Mutation::None {
            put(
                "mutation",
                serde_json::to_value(cfg.mutation).expect("serializable"),
            );
        }
        m
    }
}

/// Every check available at rank n, in canonical order.
pub fn available_checks(n: usize) -> Vec<CheckSpec> {
    let mut out = Vec::new();
    for k in 1..=n {
        out.push(CheckSpec::Whitney1 { k });
    }
    for k in 1..=n {
        out.push(CheckSpec::Whitney2 { k });
    }
    out.push(CheckSpec::Whitney3);
    for j in 1..=n {
        out.push(CheckSpec::QuantumInverse { j });
    }
    for d in 0..=2 * n {
        out.push(CheckSpec::Borel { d });
    }
    for dual in [false, true] {
        for k in 2..=n {
            for subset in subsets(1, k - 1) {
                out.push(CheckSpec::MultipleLine { subset, k, dual });
            }
        }
    }
    for d in 1..=2 * n {
        for p in 1..=n {
            out.push(CheckSpec::LemmaProducts { d, p });
        }
    }
    out.push(CheckSpec::Presentation);
    out.push(CheckSpec::ClassicalLimit);
    for subset in subsets(1, n) {
        for sign in [1, -1] {
            out.push(CheckSpec::QamAm {
                subset: subset.clone(),
                sign,
            });
        }
    }
    out.push(CheckSpec::QamAmControl);
    for subset in subsets(1, n).into_iter().filter(|s| !s.is_empty()) {
        for sign in [1, -1] {
            out.push(CheckSpec::ChainIndependence {
                subset: subset.clone(),
                sign,
            });
        }
    }
    out.push(CheckSpec::Rank1Oracle);
    out.push(CheckSpec::EdgeEquivalence);
    out
}

/// Checks whose name matches at least one glob pattern, in canonical order.
/// A pattern that matches nothing is an error listing every available name.
pub fn select_checks(n: usize, patterns: &[String]) -> Result<Vec<CheckSpec>, VerifyError> {
    let all = available_checks(n);
    let mut compiled = Vec::new();
    for p in patterns {
        let pat =
            glob::Pattern::new(p).map_err(|e| VerifyError::BadPattern(p.clone(), e.to_string()))?;
        if !all.iter().any(|c| pat.matches(&c.name())) {
            return Err(VerifyError::UnknownSelector {
                pattern: p.clone(),
                available: all.iter().map(CheckSpec::name).collect(),
            });
        }
        compiled.push(pat);
    }
    Ok(all
        .into_iter()
        .filter(|c| compiled.iter().any(|p| p.matches(&c.name())))
        .collect())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuiteConfig {
    pub n: usize,
    pub trunc: u32,
    pub seed: u64,
    pub seed2: u64,
    pub mutation: Mutation,
}

impl SuiteConfig {
    pub fn new(n: usize, trunc: u32) -> Self {
        SuiteConfig {
            n,
            trunc,
            seed: 0,
            seed2: 1,
            mutation: Mutation::None,
        }
    }
}

/// Shared state for a batch of checks: quantum rings for both chain seeds and a
/// classical context over the first engine.
pub struct Verifier {
    cfg: SuiteConfig,
    ring: QkRing,
    alt: QkRing,
    classical: QkRing,
}

type Outcome = Result<String, ChevalleyError>;

type BundleFamily = fn(i64) -> Bundle;

impl Verifier {
    pub fn new(cfg: SuiteConfig) -> Self {
        let engine = Arc::new(ChevalleyEngine::new(cfg.n, cfg.seed));
        let alt_engine = Arc::new(ChevalleyEngine::new(cfg.n, cfg.seed2));
        Verifier {
            ring: QkRing::with_engine(engine.clone(), cfg.trunc),
            alt: QkRing::with_engine(alt_engine, cfg.trunc),
            classical: QkRing::classical(engine),
            cfg,
        }
    }

    pub fn config(&self) -> &SuiteConfig {
        &self.cfg
    }

    pub fn ring(&self) -> &QkRing {
        &self.ring
    }

    pub fn run(&self, spec: &CheckSpec) -> CheckResult {
        let start = Instant::now();
        let outcome = match spec {
            CheckSpec::Whitney1 { k } => self.whitney_rel12(*k, false),
            CheckSpec::Whitney2 { k } => self.whitney_rel12(*k, true),
            CheckSpec::Whitney3 => self.whitney_rel3(),
            CheckSpec::QuantumInverse { j } => self.quantum_inverse(*j),
            CheckSpec::Borel { d } => self.borel(*d),
            CheckSpec::MultipleLine { subset, k, dual } => self.multiple_line(subset, *k, *dual),
            CheckSpec::LemmaProducts { d, p } => self.lemma_products(*d, *p),
            CheckSpec::Presentation => self.presentation(),
            CheckSpec::ClassicalLimit => self.classical_limit(),
            CheckSpec::QamAm { subset, sign } => self.qam_am(subset, *sign),
            CheckSpec::QamAmControl => qam_am_control(),
            CheckSpec::ChainIndependence { subset, sign } => self.chain_independence(subset, *sign),
            CheckSpec::Rank1Oracle => rank1_oracle(self.cfg.trunc),
            CheckSpec::EdgeEquivalence => Ok(edge_equivalence(self.cfg.n)),
        };
        let residual = match outcome {
            Ok(r) => r,
            Err(e) => format!("error: {e}\n"),
        };
        CheckResult {
            name: spec.name(),
            params: spec.params(&self.cfg),
            status: if residual.is_empty() {
                Status::Pass
            } else {
                Status::Fail
            },
            residual,
            wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
        }
    }

    /// Runs `specs` on `workers` threads; results come back sorted by name.
    pub fn run_all(&self, specs: &[CheckSpec], workers: usize) -> Vec<CheckResult> {
        let next = AtomicUsize::new(0);
        let mut slots: Vec<Option<CheckResult>> = vec![None; specs.len()];
        let workers = workers.clamp(1, specs.len().max(1));
        std::thread::scope(|s| {
            let handles: Vec<_> = (0..workers)
                .map(|_| {
                    s.spawn(|| {
                        let mut done = Vec::new();
                        loop {
                            let i = next.fetch_add(1, Ordering::SeqCst);
                            if i >= specs.len() {
                                break;
                            }
                            done.push((i, self.run(&specs[i])));
                        }
                        done
                    })
                })
                .collect();
            for h in handles {
                for (i, r) in h.join().expect("check worker panicked") {
                    slots[i] = Some(r);
                }
            }
        });
        let mut out: Vec<CheckResult> = slots
            .into_iter()
            .map(|r| r.expect("every check ran"))
            .collect();
        out.sort_by(|a, b| a.name.cmp(&b.name));
        out
    }

    fn mutated(&self, m: Mutation) -> bool {
        self.cfg.mutation == m
    }

    fn n(&self) -> usize {
        self.cfg.n
    }

    fn d(&self) -> u32 {
        self.cfg.trunc
    }

    fn one(&self) -> NovikovPoly {
        NovikovPoly::one(self.n(), self.d())
    }

    fn q(&self, j: usize) -> NovikovPoly {
        NovikovPoly::q_var(self.n(), j, self.d())
    }

    fn geom(&self, j: usize) -> NovikovPoly {
        geometric_factor(self.n(), j, self.d())
    }

    fn one_minus_q(&self, j: usize) -> NovikovPoly {
        one_minus_q(self.n(), j, self.d())
    }

    /// λ_y(S_{k-1}) ⋆ λ_y(S_k/S_{k-1}) against
    /// λ_y(S_k) - y·Q_{k-1}/(1-Q_{k-1})·[S_k/S_{k-1}] ⋆ (λ_y(S_{k-1}) - λ_y(S_{k-2})), or the dual.
    pub fn whitney_rel12(&self, k: usize, dual: bool) -> Outcome {
        let r = &self.ring;
        let ki = k as i64;
        let (taut, quot): (BundleFamily, BundleFamily) = if dual {
            (Bundle::TautDual, Bundle::QuotientDual)
        } else {
            (Bundle::Taut, Bundle::Quotient)
        };
        let lhs = r.poly_mult(&r.lambda_y_combos(taut(ki - 1)), &r.lambda_y(quot(ki))?)?;
        let mut rhs = r.lambda_y(taut(ki))?;
        if !self.mutated(Mutation::WhitneyCorrection) {
            let coeff = &self.q(k - 1) * &self.geom(k - 1);
            let line = r
                .lambda_y_combos(quot(ki))
                .pop()
                .expect("quotient has a degree-1 term");
            let diff = poly_diff(
                r,
                &r.lambda_y(taut(ki - 1))?,
                &r.lambda_y(taut(ki - 2))?,
                &self.one(),
            )?;
            let corr = r.poly_mult(&[LineCombo::zero(), line.scaled(&coeff)?], &diff)?;
            rhs = poly_diff(r, &rhs, &corr, &self.one())?;
        }
        Ok(compare_polys(&lhs, &rhs))
    }

    /// λ_y(S_n) ⋆ λ_y(S_n^∨) against λ_y(C^{2n}) - y² Σ_p (Q_p⋯Q_n)/(1-Q_{p-1}) (…) ⋆ (…).
    pub fn whitney_rel3(&self) -> Outcome {
        let r = &self.ring;
        let n = self.n() as i64;
        let lhs = r.poly_mult(
            &r.lambda_y_combos(Bundle::Taut(n)),
            &r.lambda_y(Bundle::TautDual(n))?,
        )?;
        let mut rhs = r.lambda_y(Bundle::Trivial)?;
        for p in 1..=self.n() {
            let pi = p as i64;
            let mut coeff = q_tail_product(self.n(), p, self.d());
            if !self.mutated(Mutation::Whitney3Factor) {
                coeff = &coeff * &self.geom(p - 1);
            }
            let qp = self.q(p - 1);
            let left = combo_diff(
                &r.lambda_y_combos(Bundle::Taut(pi - 1)),
                &r.lambda_y_combos(Bundle::Taut(pi - 2)),
                &qp,
            )?;
            let right = poly_diff(
                r,
                &r.lambda_y(Bundle::TautDual(pi - 1))?,
                &r.lambda_y(Bundle::TautDual(pi - 2))?,
                &qp,
            )?;
            let mut shifted = vec![LineCombo::zero(), LineCombo::zero()];
            for c in &left {
                shifted.push(c.scaled(&coeff)?);
            }
            let term = r.poly_mult(&shifted, &right)?;
            rhs = poly_diff(r, &rhs, &term, &self.one())?;
        }
        Ok(compare_polys(&lhs, &rhs))
    }

    /// [O(-ε_j)] ⋆ [O(ε_j)] = (1-Q_{j-1})(1-Q_j).
    pub fn quantum_inverse(&self, j: usize) -> Outcome {
        let r = &self.ring;
        let n = self.n();
        let plus = r.line_bundle_class(&eps_set(n, &[j], 1).expect("j ≤ n"))?;
        let lhs = r.mult(
            &LineCombo::line(eps_set(n, &[j], -1).expect("j ≤ n"), self.d()),
            &plus,
        )?;
        let mut s = self.one_minus_q(j);
        if !self.mutated(Mutation::InverseFactor) {
            s = &s * &self.one_minus_q(j - 1);
        }
        Ok(compare_classes(&lhs, &r.scalar(s)))
    }

    /// φ_J(i) for a position i on the barred interval, encoded as 1..=n then -n..=-1.
    fn phi(&self, set: &[i64], i: i64) -> NovikovPoly {
        let n = self.n() as i64;
        let contains = |v: i64| set.contains(&v);
        if i > 0 {
            // successor of n on the barred interval is n̄
            let next = if i == n { -n } else { i + 1 };
            if contains(i) && contains(next) && !self.mutated(Mutation::BorelFactor) {
                return self.geom(i as usize);
            }
            return self.one();
        }
        let j = -i;
        if j == 1 {
            return self.one();
        }
        let lo = j - 1;
        // j-1 and \overline{j-1} adjacent in J: nothing of J lies in [j, \overline{j}].
        let gap_empty = !set.iter().any(|&v| (v > 0 && v >= j) || (v < 0 && -v >= j));
        if contains(lo) && contains(-lo) && gap_empty {
            let tail = &q_tail_product(self.n(), lo as usize, self.d()) * &self.geom(lo as usize);
            return &self.one() + &tail;
        }
        if contains(-j) && contains(-lo) {
            return self.geom(lo as usize);
        }
        self.one()
    }

    /// Σ_{|J| = d} (∏ φ_J) ∏⋆_{j ∈ J} [O(-ε_j)] = e_d(e^{±ε}).
    pub fn borel(&self, d: usize) -> Outcome {
        let r = &self.ring;
        let n = self.n();
        let positions: Vec<i64> = (1..=n as i64)
            .chain((1..=n as i64).rev().map(|j| -j))
            .collect();
        let mut lhs = r.zero();
        for mask in subsets(0, 2 * n - 1).into_iter().filter(|s| s.len() == d) {
            let set: Vec<i64> = mask.iter().map(|&b| positions[b]).collect();
            let coeff = positions
                .iter()
                .fold(self.one(), |acc, &i| &acc * &self.phi(&set, i));
            let mut z = r.unit();
            for &j in &set {
                let sign = if j > 0 { -1 } else { 1 };
                let lam =
                    eps_set(n, &[j.unsigned_abs() as usize], sign).expect("index within rank");
                z = r.mult(&LineCombo::line(lam, self.d()), &z)?;
            }
            lhs = &lhs + &z.scale(&coeff).expect("same truncation");
        }
        let e = elementary_symmetric_char(d, n).expect("d ≤ 2n");
        Ok(compare_classes(
            &lhs,
            &r.scalar(NovikovPoly::constant_in(n, e, self.d())),
        ))
    }

    /// (1-Q_{k-1})^{[k-1 ∈ J]} [O(∓ε_{J⊔{k}})] = [O(∓ε_J)] ⋆ [O(∓ε_k)].
    pub fn multiple_line(&self, subset: &[usize], k: usize, dual: bool) -> Outcome {
        let r = &self.ring;
        let n = self.n();
        let sign = if dual { 1 } else { -1 };
        let mut joined = subset.to_vec();
        joined.push(k);
        let mut lhs =
            r.line_bundle_class(&eps_set(n, &joined, sign).expect("indices within rank"))?;
        if subset.contains(&(k - 1)) && !self.mutated(Mutation::MultipleLineFactor) {
            lhs = lhs
                .scale(&self.one_minus_q(k - 1))
                .expect("same truncation");
        }
        let base = r.line_bundle_class(&eps_set(n, subset, sign).expect("indices within rank"))?;
        let rhs = r.mult(
            &LineCombo::line(eps_set(n, &[k], sign).expect("k ≤ n"), self.d()),
            &base,
        )?;
        Ok(compare_classes(&lhs, &rhs))
    }

    /// Σ_{J,K ⊆ [1,n], |J|+|K| = d, max J = max K = p} [O(-ε_J)] ⋆ [O(ε_K)].
    fn max_pair_sum(&self, d: usize, p: usize) -> Result<QkClass, ChevalleyError> {
        let r = &self.ring;
        let n = self.n();
        let mut out = r.zero();
        for j in subsets(1, p).into_iter().filter(|s| s.last() == Some(&p)) {
            for k in subsets(1, p).into_iter().filter(|s| s.last() == Some(&p)) {
                if j.len() + k.len() != d {
                    continue;
                }
                let plus = r.line_bundle_class(&eps_set(n, &k, 1).expect("within rank"))?;
                let prod = r.mult(
                    &LineCombo::line(eps_set(n, &j, -1).expect("within rank"), self.d()),
                    &plus,
                )?;
                out = &out + &prod;
            }
        }
        Ok(out)
    }

    /// The two intermediate identities behind Whitney relation 3, at y-degree d and index p.
    pub fn lemma_products(&self, d: usize, p: usize) -> Outcome {
        let r = &self.ring;
        let n = self.n();
        let mut report = String::new();

        // Σ_{k+l=d} [Λ^k S_n] ⋆ [Λ^l S_n^∨] = e_d - Σ_q (Q_q⋯Q_n)/(1-Q_q) · max_pair_sum(d, q).
        let mut lhs = r.zero();
        for k in 0..=d.min(n) {
            let l = d - k;
            if l > n {
                continue;
            }
            let g = r.wedge_class(n as i64, l, true)?;
            lhs = &lhs + &r.mult(&r.wedge_combo(n as i64, k, false), &g)?;
        }
        let e = elementary_symmetric_char(d, n).expect("d ≤ 2n");
        let mut rhs = r.scalar(NovikovPoly::constant_in(n, e, self.d()));
        for q in 1..=n {
            let coeff = &q_tail_product(n, q, self.d()) * &self.geom(q);
            rhs = &rhs
                - &self
                    .max_pair_sum(d, q)?
                    .scale(&coeff)
                    .expect("same truncation");
        }
        let first = compare_classes(&lhs, &rhs);
        if !first.is_empty() {
            writeln!(report, "first identity:").expect("string write");
            report.push_str(&first);
        }

        // max_pair_sum(d, p) = (1-Q_p)/(1-Q_{p-1}) Σ_{k+l=d-2} (F_k^{p-1} - Q_{p-1}F_k^{p-2}) ⋆ (G_l^{p-1} - Q_{p-1}G_l^{p-2}).
        let lhs2 = self.max_pair_sum(d, p)?;
        let mut rhs2 = r.zero();
        if d >= 2 {
            let pi = p as i64;
            let qp = self.q(p - 1);
            for k in 0..=d - 2 {
                let l = d - 2 - k;
                let left = r
                    .wedge_combo(pi - 1, k, false)
                    .minus(&r.wedge_combo(pi - 2, k, false).scaled(&qp)?);
                let right = &r.wedge_class(pi - 1, l, true)?
                    - &r.wedge_class(pi - 2, l, true)?.scale(&qp)?;
                rhs2 = &rhs2 + &r.mult(&left, &right)?;
            }
            if !self.mutated(Mutation::LemmaFactor) {
                let f = &self.one_minus_q(p) * &self.geom(p - 1);
                rhs2 = rhs2.scale(&f)?;
            }
        }
        let second = compare_classes(&lhs2, &rhs2);
        if !second.is_empty() {
            writeln!(report, "second identity:").expect("string write");
            report.push_str(&second);
        }
        Ok(report)
    }

    fn f_combo(&self, k: i64, d: i64, dual: bool) -> LineCombo {
        if d < 0 {
            return LineCombo::zero();
        }
        self.ring.wedge_combo(k, d as usize, dual)
    }

    /// Every generator of the Whitney-presentation ideal maps to zero.
    pub fn presentation(&self) -> Outcome {
        let r = &self.ring;
        let n = self.n();
        let unit = r.unit();
        let mut report = String::new();
        let mut record = |label: String, z: QkClass| {
            if !z.is_zero() {
                writeln!(report, "{label}:").expect("string write");
                report.push_str(&render_class(&z));
            }
        };

        for dual in [false, true] {
            let tag = if dual { "def2" } else { "def1" };
            for k in 1..=n {
                let ki = k as i64;
                let x = eps_set(n, &[k], if dual { 1 } else { -1 }).expect("k ≤ n");
                for d in 1..=k as i64 {
                    let whole = r.mult(&self.f_combo(ki, d, dual), &unit)?;
                    let prev = r.mult(&self.f_combo(ki - 1, d, dual), &unit)?;
                    let qk = self.q(k - 1);
                    let inner = self
                        .f_combo(ki - 1, d - 1, dual)
                        .minus(&self.f_combo(ki - 2, d - 1, dual).scaled(&qk)?);
                    let mut t = r.mult(
                        &LineCombo::line(x.clone(), self.d()),
                        &r.mult(&inner, &unit)?,
                    )?;
                    if !self.mutated(Mutation::PresentationFactor) {
                        t = t.scale(&self.geom(k - 1))?;
                    }
                    record(format!("{tag} k={k} d={d}"), &(&whole - &prev) - &t);
                }
            }
        }

        let ni = n as i64;
        for d in 1..=2 * n {
            let mut lhs = r.zero();
            for k in 0..=d as i64 {
                let g = r.mult(&self.f_combo(ni, d as i64 - k, true), &unit)?;
                lhs = &lhs + &r.mult(&self.f_combo(ni, k, false), &g)?;
            }
            let e = elementary_symmetric_char(d, n).expect("d ≤ 2n");
            let mut rhs = r.scalar(NovikovPoly::constant_in(n, e, self.d()));
            for p in 1..=n {
                let pi = p as i64;
                let qp = self.q(p - 1);
                let coeff = &q_tail_product(n, p, self.d()) * &self.geom(p - 1);
                let mut acc = r.zero();
                for s in 0..=(d as i64 - 2) {
                    let left = self
                        .f_combo(pi - 1, s, false)
                        .minus(&self.f_combo(pi - 2, s, false).scaled(&qp)?);
                    let gl = d as i64 - 2 - s;
                    let right = &r.mult(&self.f_combo(pi - 1, gl, true), &unit)?
                        - &r.mult(&self.f_combo(pi - 2, gl, true), &unit)?.scale(&qp)?;
                    acc = &acc + &r.mult(&left, &right)?;
                }
                rhs = &rhs - &acc.scale(&coeff)?;
            }
            record(format!("def3 d={d}"), &lhs - &rhs);
        }

        let x1 = r.line_bundle_class(&eps_set(n, &[1], -1).expect("rank ≥ 1"))?;
        let y1 = r.line_bundle_class(&eps_set(n, &[1], 1).expect("rank ≥ 1"))?;
        record(
            "initial x".into(),
            &r.mult(&self.f_combo(1, 1, false), &unit)? - &x1,
        );
        record(
            "initial y".into(),
            &r.mult(&self.f_combo(1, 1, true), &unit)? - &y1,
        );

        for j in 1..=n {
            let y = r.line_bundle_class(&eps_set(n, &[j], 1).expect("j ≤ n"))?;
            let xy = r.mult(
                &LineCombo::line(eps_set(n, &[j], -1).expect("j ≤ n"), self.d()),
                &y,
            )?;
            let s = &self.one_minus_q(j - 1) * &self.one_minus_q(j);
            record(format!("inverse j={j}"), &xy - &r.scalar(s));
        }
        Ok(report)
    }

    /// Classical Whitney identities in K_T(G/B) plus an elementary-symmetric oracle.
    pub fn classical_limit(&self) -> Outcome {
        let c = &self.classical;
        let n = self.n();
        let ni = n as i64;
        let mut report = String::new();
        for k in 1..=ni {
            for (taut, quot, tag) in [
                (
                    Bundle::Taut as BundleFamily,
                    Bundle::Quotient as BundleFamily,
                    "1",
                ),
                (Bundle::TautDual, Bundle::QuotientDual, "2"),
            ] {
                let lhs = c.lambda_y(taut(k))?;
                let rhs = c.poly_mult(&c.lambda_y_combos(taut(k - 1)), &c.lambda_y(quot(k))?)?;
                let res = compare_polys(&lhs, &rhs);
                if !res.is_empty() {
                    writeln!(report, "classical whitney {tag} k={k}:\n{res}")
                        .expect("string write");
                }
            }
        }
        let lhs = c.lambda_y(Bundle::Trivial)?;
        let rhs = c.poly_mult(
            &c.lambda_y_combos(Bundle::Taut(ni)),
            &c.lambda_y(Bundle::TautDual(ni))?,
        )?;
        let res = compare_polys(&lhs, &rhs);
        if !res.is_empty() {
            writeln!(report, "classical whitney 3:\n{res}").expect("string write");
        }

        // [Λ^d S_k] = e_d(x_1, …, x_k) with x_j = [O(-ε_j)] multiplied classically.
        for k in 1..=n {
            let xs: Vec<Weight> = (1..=k)
                .map(|j| eps_set(n, &[j], -1).expect("j ≤ n"))
                .collect();
            for d in 1..=k {
                let mut esym = c.zero();
                for subset in subsets(0, k - 1).into_iter().filter(|s| s.len() == d) {
                    let mut z = c.unit();
                    for &i in &subset {
                        z = c.mult(&LineCombo::line(xs[i].clone(), 0), &z)?;
                    }
                    esym = &esym + &z;
                }
                let wedge = c.wedge_class(k as i64, d, false)?;
                let res = compare_classes(&wedge, &esym);
                if !res.is_empty() {
                    writeln!(report, "wedge vs e_d k={k} d={d}:\n{res}").expect("string write");
                }
            }
        }
        report.push_str(&esym_oracle(n));
        Ok(report)
    }

    /// Every admissible record from e along both seeds' chains has down = 0.
    pub fn qam_am(&self, subset: &[usize], sign: i64) -> Outcome {
        let lam = eps_set(self.n(), subset, sign).expect("indices within rank");
        let e = SignedPerm::identity(self.n());
        let mut report = String::new();
        for ring in [&self.ring, &self.alt] {
            for rec in ring.engine().records(&lam, &e)? {
                if !rec.down.is_zero() {
                    writeln!(
                        report,
                        "seed {}: positions {:?} end {} down {}",
                        ring.engine().seed(),
                        rec.positions,
                        rec.end,
                        rec.down
                    )
                    .expect("string write");
                }
            }
        }
        Ok(report)
    }

    /// Products by ±ε_J agree on every Schubert class for both chain seeds.
    pub fn chain_independence(&self, subset: &[usize], sign: i64) -> Outcome {
        let lam = eps_set(self.n(), subset, sign).expect("indices within rank");
        let mut report = String::new();
        for w in SignedPerm::all(self.n()) {
            let z = QkClass::schubert(w.clone(), self.d());
            let a = self.ring.engine().quantum_line_mult(&lam, &z)?;
            let b = self.alt.engine().quantum_line_mult(&lam, &z)?;
            let res = compare_classes(&a, &b);
            if !res.is_empty() {
                writeln!(report, "w = {w}:\n{res}").expect("string write");
            }
        }
        Ok(report)
    }
}

/// From w = s_1 at rank 1, the chain of -ε_1 admits a record with down ≠ 0.
fn qam_am_control() -> Outcome {
    let eng = ChevalleyEngine::new(1, 0);
    let recs = eng.records(&Weight::from_slice(&[-1]), &SignedPerm::simple(1, 1))?;
    if recs.iter().any(|r| !r.down.is_zero()) {
        Ok(String::new())
    } else {
        Ok("no record with down ≠ 0 from s_1\n".into())
    }
}

/// Exhaustive agreement of the two edge criteria at rank n.
pub fn edge_equivalence(n: usize) -> String {
    let mut report = String::new();
    for w in SignedPerm::all(n) {
        for a in positive_roots(n) {
            let (l, p) = (edge_type_by_length(&w, &a), edge_type_by_pattern(&w, &a));
            if l != p {
                writeln!(report, "w={w} α={a}: length {l:?}, pattern {p:?}").expect("string write");
            }
        }
    }
    report
}

// ---- rank-1 localization oracle -------------------------------------------------

/// Laurent polynomials in t = e^{ε_1}: exponent ↦ coefficient.
type Laurent = BTreeMap<i64, BigInt>;

fn laurent_add(a: &mut Laurent, e: i64, c: BigInt) {
    let v = a.entry(e).or_default();
    *v += c;
    if *v == BigInt::from(0) {
        a.remove(&e);
    }
}

/// Exact quotient a / (1 - t^{-2}), or None if the division leaves a remainder.
fn divide_by_skyscraper(a: &Laurent) -> Option<Laurent> {
    // a / (1 - t^{-2}) = a·t² / (t² - 1): long division from the top degree.
    let mut rem: Laurent = a.iter().map(|(e, c)| (e + 2, c.clone())).collect();
    let mut quot = Laurent::new();
    let floor = a.keys().next().copied().unwrap_or(0);
    while let Some((&top, c)) = rem.iter().next_back() {
        if top < floor + 2 {
            return None;
        }
        let c = c.clone();
        laurent_add(&mut quot, top - 2, c.clone());
        laurent_add(&mut rem, top, -c.clone());
        laurent_add(&mut rem, top - 2, c);
    }
    Some(quot)
}

fn char_of_laurent(l: &Laurent) -> CharElem {
    l.iter().fold(CharElem::zero(), |acc, (e, c)| {
        &acc + &CharElem::term(Weight::from_slice(&[*e]), c.clone())
    })
}

/// Expansion a[O^e] + b[O^{s_1}] of O(λ) on P¹ from its fixed-point restrictions
/// O(λ)|_w = e^{-wλ}, with [O^e]|_w = 1 and [O^{s_1}]|_{s_1} = 1 - e^{-2ε_1}.
fn localization_expansion(lam: i64) -> Option<(CharElem, CharElem)> {
    let at_e: Laurent = [(-lam, BigInt::from(1))].into_iter().collect();
    let at_s: Laurent = [(lam, BigInt::from(1))].into_iter().collect();
    let mut diff = at_s.clone();
    for (e, c) in &at_e {
        laurent_add(&mut diff, *e, -c.clone());
    }
    let b = divide_by_skyscraper(&diff)?;
    Some((char_of_laurent(&at_e), char_of_laurent(&b)))
}

fn rank1_oracle(trunc: u32) -> Outcome {
    let ring = QkRing::new(1, trunc, 0);
    let e = SignedPerm::identity(1);
    let s1 = SignedPerm::simple(1, 1);
    let mut report = String::new();
    for lam in [1i64, -1] {
        let (a, b) = match localization_expansion(lam) {
            Some(v) => v,
            None => {
                writeln!(report, "λ = {lam}ε_1: localization data not divisible")
                    .expect("string write");
                continue;
            }
        };
        let mut expect = QkClass::zero(1, trunc);
        let zero = Weight::zero(1);
        let q0 = crate::polyring::QExp::zero(1);
        expect.add_shifted(&e, &NovikovPoly::constant_in(1, a, trunc), 1, &zero, &q0);
        expect.add_shifted(&s1, &NovikovPoly::constant_in(1, b, trunc), 1, &zero, &q0);
        let got = ring.line_bundle_class(&Weight::from_slice(&[lam]))?;
        let res = compare_classes(&got, &expect);
        if !res.is_empty() {
            writeln!(report, "λ = {lam}ε_1:\n{res}").expect("string write");
        }
    }
    Ok(report)
}

// ---- elementary symmetric oracle ------------------------------------------------

/// Laurent polynomials in x_1..x_n with machine-size coefficients.
type Poly = BTreeMap<Vec<i64>, i64>;

fn poly_mul(a: &Poly, b: &Poly) -> Poly {
    let mut out = Poly::new();
    for (ea, ca) in a {
        for (eb, cb) in b {
            let e: Vec<i64> = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
            *out.entry(e).or_default() += ca * cb;
        }
    }
    out.retain(|_, c| *c != 0);
    out
}

fn poly_add(a: &Poly, b: &Poly) -> Poly {
    let mut out = a.clone();
    for (e, c) in b {
        *out.entry(e.clone()).or_default() += c;
    }
    out.retain(|_, c| *c != 0);
    out
}

fn var_poly(n: usize, i: usize, power: i64) -> Poly {
    let mut e = vec![0; n];
    e[i] = power;
    [(e, 1)].into_iter().collect()
}

/// e_d(vars) straight from the definition: sum over d-subsets.
fn esym_direct(vars: &[Poly], d: usize, n: usize) -> Poly {
    let one: Poly = [(vec![0; n], 1)].into_iter().collect();
    if vars.is_empty() {
        return if d == 0 { one } else { Poly::new() };
    }
    subsets(0, vars.len() - 1)
        .into_iter()
        .filter(|s| s.len() == d)
        .map(|s| {
            s.iter()
                .fold(one.clone(), |acc, &i| poly_mul(&acc, &vars[i]))
        })
        .fold(Poly::new(), |acc, m| poly_add(&acc, &m))
}

/// e_d by the recursion e_d(x_1..x_k) = e_d(x_1..x_{k-1}) + e_{d-1}(x_1..x_{k-1})·x_k.
fn esym_recursive(vars: &[Poly], d: usize, n: usize) -> Poly {
    if d == 0 {
        return [(vec![0; n], 1)].into_iter().collect();
    }
    match vars.split_last() {
        None => Poly::new(),
        Some((last, rest)) => poly_add(
            &esym_recursive(rest, d, n),
            &poly_mul(&esym_recursive(rest, d - 1, n), last),
        ),
    }
}

fn poly_of_char(c: &CharElem) -> Poly {
    c.terms()
        .map(|(w, v)| {
            (
                w.coords().to_vec(),
                i64::try_from(v.clone()).expect("small coefficient"),
            )
        })
        .collect()
}

fn esym_oracle(n: usize) -> String {
    let mut report = String::new();
    let xs: Vec<Poly> = (0..n).map(|i| var_poly(n, i, 1)).collect();
    let inv: Vec<Poly> = (0..n).map(|i| var_poly(n, i, -1)).collect();
    for k in 0..=n {
        for d in 0..=k {
            if esym_direct(&xs[..k], d, n) != esym_recursive(&xs[..k], d, n) {
                writeln!(report, "e-recursion fails at k={k} d={d}").expect("string write");
            }
        }
    }
    let all: Vec<Poly> = xs.iter().chain(inv.iter().rev()).cloned().collect();
    for d in 0..=2 * n {
        let conv = (0..=d)
            .filter(|&k| k <= n && d - k <= n)
            .map(|k| poly_mul(&esym_direct(&xs, k, n), &esym_direct(&inv, d - k, n)))
            .fold(Poly::new(), |acc, m| poly_add(&acc, &m));
        let direct = esym_direct(&all, d, n);
        if conv != direct {
            writeln!(report, "convolution fails at d={d}").expect("string write");
        }
        let engine = poly_of_char(&elementary_symmetric_char(d, n).expect("d ≤ 2n"));
        if engine != direct {
            writeln!(report, "engine e_{d} disagrees with the oracle").expect("string write");
        }
    }
    report
}

// ---- comparison helpers ---------------------------------------------------------

/// Rendered LHS - RHS, empty when equal.
pub fn compare_classes(lhs: &QkClass, rhs: &QkClass) -> String {
    let diff = lhs - rhs;
    if diff.is_zero() {
        String::new()
    } else {
        render_class(&diff)
    }
}

/// Degree-by-degree comparison of two y-polynomials.
pub fn compare_polys(lhs: &LambdaYPoly, rhs: &LambdaYPoly) -> String {
    let mut out = String::new();
    for d in 0..=lhs.degree().max(rhs.degree()) {
        let res = compare_classes(&lhs.at(d), &rhs.at(d));
        if !res.is_empty() {
            writeln!(out, "y^{d}:").expect("string write");
            out.push_str(&res);
        }
    }
    out
}

/// a - s·b, degree by degree.
fn poly_diff(
    r: &QkRing,
    a: &LambdaYPoly,
    b: &LambdaYPoly,
    s: &NovikovPoly,
) -> Result<LambdaYPoly, ChevalleyError> {
    let len = a.coeffs.len().max(b.coeffs.len());
    let mut coeffs = Vec::with_capacity(len);
    for d in 0..len {
        let x = if d < a.coeffs.len() {
            a.coeffs[d].clone()
        } else {
            r.zero()
        };
        let y = if d < b.coeffs.len() {
            b.coeffs[d].scale(s)?
        } else {
            r.zero()
        };
        coeffs.push(x.checked_sub(&y)?);
    }
    Ok(LambdaYPoly { coeffs })
}

/// a - s·b for y-polynomials of operators.
fn combo_diff(
    a: &[LineCombo],
    b: &[LineCombo],
    s: &NovikovPoly,
) -> Result<Vec<LineCombo>, ChevalleyError> {
    let len = a.len().max(b.len());
    let mut out = Vec::with_capacity(len);
    for d in 0..len {
        let x = a.get(d).cloned().unwrap_or_else(LineCombo::zero);
        let y = match b.get(d) {
            Some(c) => c.scaled(s)?,
            None => LineCombo::zero(),
        };
        out.push(x.minus(&y));
    }
    Ok(out)
}

/// Summary counts for a batch of results.
pub fn tally(results: &[CheckResult]) -> (usize, usize) {
    let passed = results.iter().filter(|r| r.passed()).count();
    (passed, results.len() - passed)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn verifier(n: usize, d: u32) -> Verifier {
        Verifier::new(SuiteConfig::new(n, d))
    }

    fn passes(v: &Verifier, spec: CheckSpec) -> bool {
        let r = v.run(&spec);
        if !r.passed() {
            eprintln!("{}:\n{}", r.name, r.residual);
        }
        r.passed()
    }

    #[test]
    fn rank_one_suite_passes() {
        let v = verifier(1, 3);
        for spec in available_checks(1) {
            assert!(passes(&v, spec));
        }
    }

    #[test]
    fn rank_two_examples() {
        let v = verifier(2, 3);
        assert!(passes(&v, CheckSpec::Whitney1 { k: 2 }));
        assert!(passes(&v, CheckSpec::Whitney2 { k: 2 }));
        assert!(passes(&v, CheckSpec::QuantumInverse { j: 2 }));
        assert!(passes(
            &v,
            CheckSpec::MultipleLine {
                subset: vec![1],
                k: 2,
                dual: false
            }
        ));
        assert!(passes(
            &v,
            CheckSpec::MultipleLine {
                subset: vec![1],
                k: 2,
                dual: true
            }
        ));
        assert!(passes(&v, CheckSpec::LemmaProducts { d: 2, p: 2 }));
        assert!(passes(&v, CheckSpec::LemmaProducts { d: 3, p: 1 }));
    }

    #[test]
    fn dropping_the_correction_term_fails_in_q1() {
        let mut cfg = SuiteConfig::new(2, 3);
        cfg.mutation = Mutation::WhitneyCorrection;
        let v = Verifier::new(cfg);
        let r = v.run(&CheckSpec::Whitney1 { k: 2 });
        assert!(!r.passed());
        assert!(r.residual.contains("Q1"));
        assert!(v.run(&CheckSpec::Whitney1 { k: 1 }).passed());
    }

    #[test]
    fn phi_branches() {
        let v = verifier(2, 2);
        let one = v.one();
        // J = {1, 1̄}: 1 and 1̄ are adjacent only when 2, 2̄ are absent.
        assert_eq!(
            v.phi(&[1, -1], -2),
            &one + &(&q_tail_product(2, 1, 2) * &v.geom(1))
        );
        assert_eq!(v.phi(&[1, 2, -1], -2), one);
        assert_eq!(v.phi(&[-2, -1], -2), v.geom(1));
        assert_eq!(v.phi(&[2, -2], 2), v.geom(2));
        assert_eq!(v.phi(&[1, 2], 1), v.geom(1));
        assert_eq!(v.phi(&[1], 1), v.one());
        assert_eq!(v.phi(&[-1, -2], -1), v.one());
    }

    #[test]
    fn selectors() {
        let names: Vec<String> = select_checks(2, &["whitney*".into()])
            .unwrap()
            .iter()
            .map(CheckSpec::name)
            .collect();
        assert_eq!(
            names,
            vec![
                "whitney1/k=1",
                "whitney1/k=2",
                "whitney2/k=1",
                "whitney2/k=2",
                "whitney3"
            ]
        );
        let err = select_checks(2, &["nonexistent".into()]).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("nonexistent") && msg.contains("borel/d=0"));
        assert_eq!(
            select_checks(2, &["*".into()]).unwrap().len(),
            available_checks(2).len()
        );
    }

    #[test]
    fn localization_oracle_values() {
        let (a, b) = localization_expansion(1).unwrap();
        assert_eq!(a, CharElem::monomial(Weight::from_slice(&[-1])));
        assert_eq!(b, CharElem::monomial(Weight::from_slice(&[1])));
        let (a, b) = localization_expansion(-1).unwrap();
        assert_eq!(a, CharElem::monomial(Weight::from_slice(&[1])));
        assert_eq!(b, -&CharElem::monomial(Weight::from_slice(&[1])));
        let (_, b) = localization_expansion(2).unwrap();
        assert_eq!(b.len(), 2);
        let odd: Laurent = [(1, BigInt::from(1))].into_iter().collect();
        assert!(divide_by_skyscraper(&odd).is_none());
    }

    #[test]
    fn esym_oracle_is_clean() {
        for n in 1..=3 {
            assert_eq!(esym_oracle(n), "");
        }
    }

    #[test]
    fn results_are_sorted_and_deterministic() {
        let v = verifier(1, 2);
        let specs = available_checks(1);
        let a = v.run_all(&specs, 3);
        let b = v.run_all(&specs, 1);
        let strip = |rs: &[CheckResult]| -> Vec<(String, String)> {
            rs.iter()
                .map(|r| (r.name.clone(), r.residual.clone()))
                .collect()
        };
        assert_eq!(strip(&a), strip(&b));
        assert!(a.windows(2).all(|w| w[0].name <= w[1].name));
        let json = serde_json::to_value(&a[0]).unwrap();
        assert_eq!(json["status"], "pass");
        assert_eq!(tally(&a), (a.len(), 0));
    }
}
