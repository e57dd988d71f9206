use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::measure::{IntervalSet, PiecewiseTranslation, StepFunction};
use crate::scalar::{self, Scalar};
use crate::Error;

/// An exact record of where `f = g − g∘T` holds.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolutionCertificate {
    #[serde(with = "scalar::serde_text")]
    pub exact_measure: Scalar,
    /// `1 − μ(exact_set)`.
    #[serde(with = "scalar::serde_text")]
    pub residual_bound: Scalar,
    /// `‖g‖∞`.
    #[serde(with = "scalar::serde_text")]
    pub sup_bound: Scalar,
    pub transformation: PiecewiseTranslation,
    pub transfer: StepFunction,
    pub exact_set: IntervalSet,
    pub f: StepFunction,
}

impl SolutionCertificate {
    /// True when the identity holds on all of `[0, 1)`.
    pub fn is_global(&self) -> bool {
        self.exact_set == IntervalSet::unit()
    }

    /// Re-checks the certificate from scratch: the recorded exact set must be
    /// contained in the recomputed one and the bounds must match.
    pub fn recheck(&self) -> Result<bool, Error> {
        let v = verify(&self.f, &self.transformation, &self.transfer)?;
        Ok(self.exact_set.is_subset_of(&v.certificate.exact_set)
            && self.exact_measure == self.exact_set.measure()
            && self.residual_bound == Scalar::one() - &self.exact_measure
            && self.transfer.sup_norm() <= self.sup_bound)
    }
}

/// Result of checking a candidate triple: the certificate for the exact set
/// and the set where the identity fails (empty when it holds everywhere).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verification {
    pub certificate: SolutionCertificate,
    pub witness: IntervalSet,
}

impl Verification {
    pub fn refuted(&self) -> bool {
        !self.witness.is_empty()
    }
}

/// Computes `h = g − g∘T` exactly and compares it with `f` on the domain of `T`.
///
/// `T` must map its domain onto itself.
pub fn verify(f: &StepFunction, t: &PiecewiseTranslation, g: &StepFunction) -> Result<Verification, Error> {
    let domain = t.domain();
    if t.image() != domain {
        return Err(Error::DomainMismatch("T must map its domain onto itself".into()));
    }
    let h = g.restrict(&domain).sub(&g.pullback_partial(t));
    let diff = h.sub(&f.restrict(&domain));
    let exact_set = domain.difference(&diff.support());
    let witness = exact_set.complement();
    let exact_measure = exact_set.measure();
    Ok(Verification {
        certificate: SolutionCertificate {
            residual_bound: Scalar::one() - &exact_measure,
            exact_measure,
            sup_bound: g.sup_norm(),
            transformation: t.clone(),
            transfer: g.clone(),
            exact_set,
            f: f.clone(),
        },
        witness,
    })
}

/// Outcome of the integral-balance test.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    /// `∫f⁺ = ∫f⁻ < ∞`: a transformation and transfer function exist.
    BalancedFinite,
    /// Both one-sided integrals infinite. Never produced for step functions.
    BalancedInfinite,
    /// No measurable transfer function exists for any transformation.
    Unbalanced,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Solvability {
    pub verdict: Verdict,
    #[serde(with = "scalar::serde_text")]
    pub positive_integral: Scalar,
    #[serde(with = "scalar::serde_text")]
    pub negative_integral: Scalar,
}

pub fn check_solvability(f: &StepFunction) -> Solvability {
    let (pos, neg) = f.one_sided_integrals();
    let verdict = if pos == neg { Verdict::BalancedFinite } else { Verdict::Unbalanced };
    Solvability {
        verdict,
        positive_integral: pos,
        negative_integral: neg,
    }
}
