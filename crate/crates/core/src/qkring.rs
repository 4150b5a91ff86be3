//! Line bundles, wedge powers of tautological bundles and λ_y-classes in
//! QK_T(Fl(C_n)). Products are always taken operator-on-class: a [`LineCombo`]
//! acts through the quantum Chevalley operator.

use std::fmt::Write as _;
use std::sync::Arc;

use crate::chevalley::{ChevalleyEngine, ChevalleyError};
use crate::polyring::{elementary_symmetric_char, NovikovPoly, PolyError, QkClass};
use crate::rootsys::{eps_set, subsets_of_size, Weight};

/// Σ scalar · ([O(weight)] ⋆ −) with every weight of the form ±ε_J.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LineCombo {
    pub terms: Vec<(NovikovPoly, Weight)>,
}

impl LineCombo {
    pub fn zero() -> Self {
        LineCombo { terms: Vec::new() }
    }

    pub fn unit(rank: usize, trunc: u32) -> Self {
        Self::line(Weight::zero(rank), trunc)
    }

    pub fn line(lambda: Weight, trunc: u32) -> Self {
        let n = lambda.rank();
        LineCombo {
            terms: vec![(NovikovPoly::one(n, trunc), lambda)],
        }
    }

    pub fn scalar(rank: usize, c: NovikovPoly) -> Self {
        LineCombo {
            terms: vec![(c, Weight::zero(rank))],
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn plus(mut self, other: &LineCombo) -> Self {
        self.terms.extend(other.terms.iter().cloned());
        self
    }

    pub fn minus(mut self, other: &LineCombo) -> Self {
        self.terms
            .extend(other.terms.iter().map(|(c, w)| (-c, w.clone())));
        self
    }

    pub fn scaled(&self, s: &NovikovPoly) -> Result<Self, PolyError> {
        let terms = self
            .terms
            .iter()
            .map(|(c, w)| Ok((c.checked_mul(s)?, w.clone())))
            .collect::<Result<_, PolyError>>()?;
        Ok(LineCombo { terms })
    }
}

/// λ_y(E) as its list of y-coefficients; entry 0 is the unit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LambdaYPoly {
    pub coeffs: Vec<QkClass>,
}

impl LambdaYPoly {
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    /// Coefficient of y^d (zero beyond the stored degree).
    pub fn at(&self, d: usize) -> QkClass {
        match self.coeffs.get(d) {
            Some(c) => c.clone(),
            None => {
                let c0 = &self.coeffs[0];
                QkClass::zero(c0.rank(), c0.trunc_degree())
            }
        }
    }
}

/// Bundles with a λ_y-class. Indices k range over -1..=n; k ≤ 0 is the zero bundle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bundle {
    Taut(i64),
    TautDual(i64),
    Quotient(i64),
    QuotientDual(i64),
    Trivial,
}

/// Evaluation context: a Chevalley engine and a truncation degree D. A classical
/// context multiplies with the K_T(G/B) operator and has D = 0.
#[derive(Debug, Clone)]
pub struct QkRing {
    engine: Arc<ChevalleyEngine>,
    trunc: u32,
    classical: bool,
}

impl QkRing {
    pub fn new(rank: usize, trunc: u32, seed: u64) -> Self {
        Self::with_engine(Arc::new(ChevalleyEngine::new(rank, seed)), trunc)
    }

    pub fn with_engine(engine: Arc<ChevalleyEngine>, trunc: u32) -> Self {
        QkRing {
            engine,
            trunc,
            classical: false,
        }
    }

    pub fn classical(engine: Arc<ChevalleyEngine>) -> Self {
        QkRing {
            engine,
            trunc: 0,
            classical: true,
        }
    }

    pub fn is_classical(&self) -> bool {
        self.classical
    }

    pub fn rank(&self) -> usize {
        self.engine.rank()
    }

    pub fn trunc(&self) -> u32 {
        self.trunc
    }

    pub fn engine(&self) -> &ChevalleyEngine {
        &self.engine
    }

    pub fn unit(&self) -> QkClass {
        QkClass::unit(self.rank(), self.trunc)
    }

    pub fn zero(&self) -> QkClass {
        QkClass::zero(self.rank(), self.trunc)
    }

    pub fn scalar(&self, c: NovikovPoly) -> QkClass {
        QkClass::scalar(self.rank(), c)
    }

    /// [O(λ)] = [O(λ)] ⋆ [O^e].
    pub fn line_bundle_class(&self, lambda: &Weight) -> Result<QkClass, ChevalleyError> {
        self.line_mult(lambda, &self.unit())
    }

    fn line_mult(&self, lambda: &Weight, z: &QkClass) -> Result<QkClass, ChevalleyError> {
        if self.classical {
            self.engine.classical_line_mult(lambda, z)
        } else {
            self.engine.quantum_line_mult(lambda, z)
        }
    }

    /// Σ_{J ⊆ [1,k], |J| = d} [O(∓ε_J)] as an operator: `-` for Λ^d S_k, `+` for the dual.
    pub fn wedge_combo(&self, k: i64, d: usize, dual: bool) -> LineCombo {
        let n = self.rank();
        if d == 0 {
            return LineCombo::unit(n, self.trunc);
        }
        if k <= 0 || d as i64 > k {
            return LineCombo::zero();
        }
        let sign = if dual { 1 } else { -1 };
        let terms = subsets_of_size(1, k as usize, d)
            .into_iter()
            .map(|j| {
                (
                    NovikovPoly::one(n, self.trunc),
                    eps_set(n, &j, sign).expect("indices within rank"),
                )
            })
            .collect();
        LineCombo { terms }
    }

    /// [Λ^d S_k] (or of S_k^∨ when `dual`).
    pub fn wedge_class(&self, k: i64, d: usize, dual: bool) -> Result<QkClass, ChevalleyError> {
        self.mult(&self.wedge_combo(k, d, dual), &self.unit())
    }

    /// λ_y(E) with each y-coefficient as an operator.
    pub fn lambda_y_combos(&self, bundle: Bundle) -> Vec<LineCombo> {
        let n = self.rank();
        let unit = LineCombo::unit(n, self.trunc);
        match bundle {
            Bundle::Taut(k) | Bundle::TautDual(k) => {
                let dual = matches!(bundle, Bundle::TautDual(_));
                let top = k.max(0) as usize;
                (0..=top).map(|d| self.wedge_combo(k, d, dual)).collect()
            }
            Bundle::Quotient(k) | Bundle::QuotientDual(k) => {
                if k <= 0 {
                    return vec![unit];
                }
                let sign = if matches!(bundle, Bundle::QuotientDual(_)) {
                    1
                } else {
                    -1
                };
                let lam = eps_set(n, &[k as usize], sign).expect("index within rank");
                vec![unit, LineCombo::line(lam, self.trunc)]
            }
            Bundle::Trivial => (0..=2 * n)
                .map(|d| {
                    let e = elementary_symmetric_char(d, n).expect("d ≤ 2n");
                    LineCombo::scalar(n, NovikovPoly::constant_in(n, e, self.trunc))
                })
                .collect(),
        }
    }

    pub fn lambda_y(&self, bundle: Bundle) -> Result<LambdaYPoly, ChevalleyError> {
        let unit = self.unit();
        let coeffs = self
            .lambda_y_combos(bundle)
            .iter()
            .map(|c| self.mult(c, &unit))
            .collect::<Result<_, _>>()?;
        Ok(LambdaYPoly { coeffs })
    }

    /// Σ scalar · ([O(weight)] ⋆ Z).
    pub fn mult(&self, a: &LineCombo, z: &QkClass) -> Result<QkClass, ChevalleyError> {
        let mut out = QkClass::zero(z.rank(), z.trunc_degree());
        for (c, lam) in &a.terms {
            let prod = if lam.is_zero() {
                z.clone()
            } else {
                self.line_mult(lam, z)?
            };
            out = out.checked_add(&prod.scale(c)?)?;
        }
        Ok(out)
    }

    /// (Σ_d P_d y^d) ⋆ (Σ_e R_e y^e), convolving y-degrees.
    pub fn poly_mult(
        &self,
        p: &[LineCombo],
        r: &LambdaYPoly,
    ) -> Result<LambdaYPoly, ChevalleyError> {
        let len = (p.len() + r.coeffs.len()).saturating_sub(1).max(1);
        let mut coeffs = vec![self.zero(); len];
        for (i, a) in p.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, z) in r.coeffs.iter().enumerate() {
                if z.is_zero() {
                    continue;
                }
                coeffs[i + j] = coeffs[i + j].checked_add(&self.mult(a, z)?)?;
            }
        }
        Ok(LambdaYPoly { coeffs })
    }
}

/// One line per Schubert class, `O^(window): coefficient`, ordered by length then window.
pub fn render_class(z: &QkClass) -> String {
    if z.is_zero() {
        return "0\n".to_string();
    }
    let mut terms: Vec<_> = z.coeffs().collect();
    terms.sort_by_key(|(w, _)| (w.length(), (*w).clone()));
    let mut s = String::new();
    for (w, c) in terms {
        writeln!(s, "O^{w}: {c}").expect("writing to a String");
    }
    s
}
