use serde::{Deserialize, Serialize};

use crate::measure::{IntervalSet, StepFunction};
use crate::scalar::{self, Scalar};

/// One audited condition with the value that was checked.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditEntry {
    pub id: String,
    pub value: String,
    pub pass: bool,
}

impl AuditEntry {
    pub fn new(id: impl Into<String>, value: impl Into<String>, pass: bool) -> Self {
        AuditEntry {
            id: id.into(),
            value: value.into(),
            pass,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    GenericGp,
    NotAMoment,
    Kwapien,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Parameters {
    GenericGp {
        #[serde(with = "scalar::serde_text")]
        p: Scalar,
        n: u64,
        #[serde(with = "scalar::serde_text")]
        epsilon: Scalar,
        i0: u64,
        i1: u64,
        v: IntervalSet,
        u: IntervalSet,
    },
    NotAMoment {
        depth: u32,
        /// `b_i = 2^{(i + shift)!}`.
        shift: u64,
        b_log2: Vec<String>,
        a: IntervalSet,
        b: Vec<IntervalSet>,
        #[serde(with = "scalar::serde_text")]
        tail_mass: Scalar,
    },
    Kwapien {
        #[serde(with = "scalar::serde_text")]
        p: Scalar,
        #[serde(with = "scalar::serde_text")]
        r: Scalar,
        #[serde(with = "scalar::serde_text")]
        delta: Scalar,
        depth: u32,
        n_table: Vec<String>,
        e: Vec<IntervalSet>,
        e0: IntervalSet,
    },
}

/// A generated function with its parameters and audit trail.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CounterexampleSpec {
    pub family: Family,
    pub parameters: Parameters,
    pub function: StepFunction,
    pub audit: Vec<AuditEntry>,
}

impl CounterexampleSpec {
    pub fn all_pass(&self) -> bool {
        self.audit.iter().all(|e| e.pass)
    }

    pub fn entry(&self, id: &str) -> Option<&AuditEntry> {
        self.audit.iter().find(|e| e.id == id)
    }
}
