//! Reduced λ-chains built by walking a generic segment from the fundamental
//! alcove A_∘ to A_∘ - λ and recording the hyperplanes it crosses.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::rootsys::{pairing, positive_roots, Root, Weight};

/// Consecutive seeds tried before giving up on a base point.
pub const MAX_SEED_RETRIES: u64 = 32;

/// Numerators of base-point coordinates are drawn from 1..BASE_SCALE.
const BASE_SCALE: i64 = 1 << 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlcoveError {
    #[error("degenerate base point for λ = {lambda} after {tries} seeds")]
    DegenerateBasePoint { lambda: Weight, tries: u64 },
}

/// One wall crossing: the root γ_k and the level l_k with wall ⊂ H_{γ_k, -l_k}.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ChainStep {
    pub gamma: Root,
    pub level: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LambdaChain {
    pub lambda: Weight,
    pub steps: Vec<ChainStep>,
    /// Seed that produced a generic base point (≥ the requested seed).
    pub seed: u64,
    #[serde(skip)]
    base_point: Vec<BigRational>,
}

impl LambdaChain {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn rank(&self) -> usize {
        self.lambda.rank()
    }

    pub fn base_point(&self) -> &[BigRational] {
        &self.base_point
    }
}

impl fmt::Display for LambdaChain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, s) in self.steps.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "({}, {})", s.gamma, s.level)?;
        }
        write!(f, "]")
    }
}

/// ⟨x, α^∨⟩ for a rational point x.
pub fn rational_pairing(x: &[BigRational], alpha: &Root) -> BigRational {
    x.iter()
        .zip(alpha.coroot().coords())
        .map(|(xi, &c)| xi * BigRational::from_integer(BigInt::from(c)))
        .fold(BigRational::zero(), |a, b| a + b)
}

/// A point of A_∘ drawn from the seed: strictly decreasing coordinates in (0, 1/2).
pub fn base_point(n: usize, seed: u64) -> Vec<BigRational> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut nums: Vec<i64> = Vec::with_capacity(n);
    while nums.len() < n {
        let v = rng.gen_range(1..BASE_SCALE);
        if !nums.contains(&v) {
            nums.push(v);
        }
    }
    nums.sort_unstable_by(|a, b| b.cmp(a));
    let denom = BigInt::from(2 * BASE_SCALE);
    nums.into_iter()
        .map(|v| BigRational::new(BigInt::from(v), denom.clone()))
        .collect()
}

/// True iff 0 < ⟨x, α^∨⟩ < 1 for every positive root α.
pub fn in_fundamental_alcove(x: &[BigRational]) -> bool {
    let one = BigRational::from_integer(BigInt::from(1));
    positive_roots(x.len()).iter().all(|a| {
        let v = rational_pairing(x, a);
        v.is_positive() && v < one
    })
}

struct Crossing {
    t: BigRational,
    gamma: Root,
    level: i64,
}

fn crossings(lambda: &Weight, p: &[BigRational]) -> Vec<Crossing> {
    let mut out = Vec::new();
    for alpha in positive_roots(lambda.rank()) {
        let c = pairing(lambda, &alpha);
        if c == 0 {
            continue;
        }
        // f(t) = ⟨p - tλ, α^∨⟩ = f0 - t·c with f0 ∈ (0, 1) passes the integers m
        // strictly between f0 - c and f0.
        let f0 = rational_pairing(p, &alpha);
        let ms: Vec<i64> = if c > 0 {
            (1 - c..=0).collect()
        } else {
            (1..=-c).collect()
        };
        let gamma = if c > 0 { alpha.clone() } else { -&alpha };
        for m in ms {
            let t = (&f0 - BigRational::from_integer(BigInt::from(m)))
                / BigRational::from_integer(BigInt::from(c));
            // H_{α, m} = H_{γ, -l}
            let level = if c > 0 { -m } else { m };
            out.push(Crossing {
                t,
                gamma: gamma.clone(),
                level,
            });
        }
    }
    out.sort_by(|a, b| a.t.cmp(&b.t));
    out
}

/// A reduced λ-chain from the segment p - tλ, t ∈ [0, 1], with p = `base_point(n, seed)`.
/// Non-generic base points (two walls crossed at the same t) move to the next seed.
pub fn reduced_chain(lambda: &Weight, seed: u64) -> Result<LambdaChain, AlcoveError> {
    let n = lambda.rank();
    for s in seed..seed.saturating_add(MAX_SEED_RETRIES) {
        let p = base_point(n, s);
        debug_assert!(in_fundamental_alcove(&p));
        let cs = crossings(lambda, &p);
        if cs.windows(2).any(|w| w[0].t == w[1].t) {
            continue;
        }
        let steps = cs
            .into_iter()
            .map(|c| ChainStep {
                gamma: c.gamma,
                level: c.level,
            })
            .collect();
        return Ok(LambdaChain {
            lambda: lambda.clone(),
            steps,
            seed: s,
            base_point: p,
        });
    }
    Err(AlcoveError::DegenerateBasePoint {
        lambda: lambda.clone(),
        tries: MAX_SEED_RETRIES,
    })
}

/// Number of hyperplanes separating A_∘ and A_∘ - λ: Σ_{α>0} |⟨λ, α^∨⟩|.
pub fn reduced_length(lambda: &Weight) -> usize {
    positive_roots(lambda.rank())
        .iter()
        .map(|a| pairing(lambda, a).unsigned_abs() as usize)
        .sum()
}

/// ĥ = s_{γ, -l}: μ ↦ μ - (⟨μ, γ^∨⟩ + l)·γ.
pub fn affine_reflect(step: &ChainStep, mu: &Weight) -> Weight {
    let k = pairing(mu, &step.gamma) + step.level;
    mu - &(k * step.gamma.weight())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rootsys::{eps_set, subsets};

    fn chain(c: &[i64], seed: u64) -> LambdaChain {
        reduced_chain(&Weight::from_slice(c), seed).unwrap()
    }

    #[test]
    fn small_chains() {
        assert!(chain(&[0, 0], 0).is_empty());
        assert_eq!(
            chain(&[1], 0).steps,
            vec![ChainStep {
                gamma: Root::long(1, 1),
                level: 0
            }]
        );
        assert_eq!(
            chain(&[-1], 0).steps,
            vec![ChainStep {
                gamma: -&Root::long(1, 1),
                level: 1
            }]
        );
        assert_eq!(chain(&[1, 1], 0).len(), 4);
    }

    #[test]
    fn base_points_lie_in_the_fundamental_alcove() {
        for n in 1..=4 {
            for seed in 0..20 {
                assert!(in_fundamental_alcove(&base_point(n, seed)));
            }
        }
    }

    #[test]
    fn chains_are_reduced() {
        for n in 1..=3 {
            let range: Vec<i64> = (-2..=2).collect();
            let mut lam = vec![0i64; n];
            let total = range.len().pow(n as u32);
            for code in 0..total {
                let mut c = code;
                for slot in lam.iter_mut() {
                    *slot = range[c % range.len()];
                    c /= range.len();
                }
                let w = Weight::from_slice(&lam);
                assert_eq!(chain(&lam, 3).len(), reduced_length(&w), "λ = {w}");
            }
        }
    }

    #[test]
    fn replay_reaches_the_translated_alcove() {
        // Each step's wall separates the midpoints of consecutive segments, and
        // the direction -γ_k points from A_{k-1} into A_k.
        let lam = Weight::from_slice(&[2, -1, 1]);
        let ch = reduced_chain(&lam, 7).unwrap();
        let p = ch.base_point().to_vec();
        let lam_r: Vec<BigRational> = lam
            .coords()
            .iter()
            .map(|&c| BigRational::from_integer(BigInt::from(c)))
            .collect();
        let at = |t: &BigRational| -> Vec<BigRational> {
            p.iter().zip(&lam_r).map(|(x, l)| x - t * l).collect()
        };
        let mut ts: Vec<BigRational> = crossings(&lam, &p).into_iter().map(|c| c.t).collect();
        ts.insert(0, BigRational::zero());
        ts.push(BigRational::from_integer(BigInt::from(1)));
        for (k, step) in ch.steps.iter().enumerate() {
            let two = BigRational::from_integer(BigInt::from(2));
            let before = at(&((&ts[k] + &ts[k + 1]) / &two));
            let after = at(&((&ts[k + 1] + &ts[k + 2]) / &two));
            let wall = BigRational::from_integer(BigInt::from(-step.level));
            assert!(rational_pairing(&before, &step.gamma) > wall);
            assert!(rational_pairing(&after, &step.gamma) < wall);
            assert_eq!(rational_pairing(&at(&ts[k + 1]), &step.gamma), wall);
        }
        // The end point lies in A_∘ - λ.
        let end: Vec<BigRational> = at(&BigRational::from_integer(BigInt::from(1)))
            .iter()
            .zip(&lam_r)
            .map(|(x, l)| x + l)
            .collect();
        assert!(in_fundamental_alcove(&end));
    }

    #[test]
    fn negative_roots_of_eps_chains() {
        // For λ = ε_J the negative γ_k are exactly {ε_i - ε_j : i < j, i ∉ J, j ∈ J}.
        for n in 1..=3 {
            for j in subsets(1, n) {
                let lam = eps_set(n, &j, 1).unwrap();
                let ch = reduced_chain(&lam, 1).unwrap();
                let mut neg: Vec<Root> = ch
                    .steps
                    .iter()
                    .filter(|s| !s.gamma.is_positive())
                    .map(|s| s.gamma.abs())
                    .collect();
                neg.sort();
                let mut expected: Vec<Root> = Vec::new();
                for a in 1..=n {
                    for b in a + 1..=n {
                        if !j.contains(&a) && j.contains(&b) {
                            expected.push(Root::minus(n, a, b));
                        }
                    }
                }
                expected.sort();
                assert_eq!(neg, expected, "J = {j:?}");
            }
        }
    }

    #[test]
    fn affine_reflection_examples() {
        let e1 = Weight::unit(1, 1);
        let s0 = ChainStep {
            gamma: Root::long(1, 1),
            level: 0,
        };
        assert_eq!(affine_reflect(&s0, &e1), -&e1);
        let s1 = ChainStep {
            gamma: -&Root::long(1, 1),
            level: 1,
        };
        assert_eq!(affine_reflect(&s1, &e1), e1);
        let mu = Weight::from_slice(&[3, -2, 1]);
        for a in positive_roots(3) {
            for level in -2..=2 {
                for g in [a.clone(), -&a] {
                    let st = ChainStep { gamma: g, level };
                    assert_eq!(affine_reflect(&st, &affine_reflect(&st, &mu)), mu);
                }
            }
        }
    }

    #[test]
    fn seeds_change_the_chain() {
        let lam = Weight::from_slice(&[1, 1, 1]);
        let a = reduced_chain(&lam, 0).unwrap();
        let differs = (1..10).any(|s| reduced_chain(&lam, s).unwrap().steps != a.steps);
        assert!(differs);
    }
}
