//! Membership-query oracles and query accounting.
//!
//! A [`Classifier`] decides labels; an [`Oracle`] wraps one and records every
//! call in a [`QueryLedger`]. Search algorithms only see the [`MembershipOracle`]
//! trait, so the ledger is the single source of query counts.

mod malicious;
mod synthetic;

pub use malicious::MaliciousClassifier;
pub use synthetic::{analytic_mac, brute_force_mac, brute_force_mac_with, ConvexClass, SyntheticClassifier};

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

/// Classifier response. `+1` is the benign/positive class, `-1` the class the adversary wants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Label {
    Positive,
    Negative,
}

impl Label {
    pub fn value(self) -> i8 {
        match self {
            Label::Positive => 1,
            Label::Negative => -1,
        }
    }

    pub fn is_negative(self) -> bool {
        self == Label::Negative
    }

    pub fn is_positive(self) -> bool {
        self == Label::Positive
    }
}

impl From<Label> for i8 {
    fn from(l: Label) -> i8 {
        l.value()
    }
}

/// Anything that maps a point to a label. Stateful classifiers (the adversarial
/// one) mutate themselves on every call.
pub trait Classifier<T> {
    fn classify(&mut self, x: &[T]) -> Label;
}

impl<T, F: FnMut(&[T]) -> Label> Classifier<T> for F {
    fn classify(&mut self, x: &[T]) -> Label {
        self(x)
    }
}

/// The query interface exposed to search algorithms.
pub trait MembershipOracle<T> {
    fn query(&mut self, x: &[T]) -> Label;

    /// Raw `query` invocations so far.
    fn query_count(&self) -> u64;
}

pub const DEFAULT_TRANSCRIPT_CAP: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranscriptEntry<T> {
    pub point: Vec<T>,
    pub label: Label,
}

/// Counts oracle calls and optionally keeps an ordered transcript.
#[derive(Debug, Clone)]
pub struct QueryLedger<T> {
    count: u64,
    transcript: Option<Vec<TranscriptEntry<T>>>,
    cap: usize,
    dropped: u64,
}

impl<T> Default for QueryLedger<T> {
    fn default() -> Self {
        Self {
            count: 0,
            transcript: None,
            cap: DEFAULT_TRANSCRIPT_CAP,
            dropped: 0,
        }
    }
}

impl<T: Clone> QueryLedger<T> {
    pub fn with_transcript(cap: usize) -> Self {
        Self {
            transcript: Some(Vec::new()),
            cap,
            ..Self::default()
        }
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    /// Retained entries, oldest first. `None` when retention is off.
    pub fn transcript(&self) -> Option<&[TranscriptEntry<T>]> {
        self.transcript.as_deref()
    }

    /// Entries not retained because the cap was reached.
    pub fn dropped(&self) -> u64 {
        self.dropped
    }

    fn record(&mut self, x: &[T], label: Label) {
        self.count += 1;
        if let Some(t) = self.transcript.as_mut() {
            if t.len() < self.cap {
                t.push(TranscriptEntry {
                    point: x.to_vec(),
                    label,
                });
            } else {
                self.dropped += 1;
            }
        }
    }
}

/// A classifier plus its ledger.
#[derive(Debug, Clone)]
pub struct Oracle<T, C> {
    classifier: C,
    ledger: QueryLedger<T>,
    memo: Option<HashMap<Vec<u64>, Label>>,
}

impl<T: Scalar, C: Classifier<T>> Oracle<T, C> {
    pub fn new(classifier: C) -> Self {
        Self {
            classifier,
            ledger: QueryLedger::default(),
            memo: None,
        }
    }

    /// Keep up to `cap` (point, label) pairs.
    pub fn with_transcript(mut self, cap: usize) -> Self {
        self.ledger = QueryLedger::with_transcript(cap);
        self
    }

    /// Answer repeated points from a cache instead of the classifier.
    /// The ledger still counts every call.
    pub fn with_memoization(mut self) -> Self {
        self.memo = Some(HashMap::new());
        self
    }

    pub fn ledger(&self) -> &QueryLedger<T> {
        &self.ledger
    }

    pub fn classifier(&self) -> &C {
        &self.classifier
    }

    pub fn classifier_mut(&mut self) -> &mut C {
        &mut self.classifier
    }

    pub fn into_parts(self) -> (C, QueryLedger<T>) {
        (self.classifier, self.ledger)
    }

    /// Number of distinct points seen, when memoizing.
    pub fn distinct_queries(&self) -> Option<usize> {
        self.memo.as_ref().map(HashMap::len)
    }
}

impl<T: Scalar, C: Classifier<T>> MembershipOracle<T> for Oracle<T, C> {
    fn query(&mut self, x: &[T]) -> Label {
        let label = match self.memo.as_mut() {
            Some(memo) => {
                let key: Vec<u64> = x.iter().map(|v| v.as_f64().to_bits()).collect();
                *memo
                    .entry(key)
                    .or_insert_with(|| self.classifier.classify(x))
            }
            None => self.classifier.classify(x),
        };
        self.ledger.record(x, label);
        label
    }

    fn query_count(&self) -> u64 {
        self.ledger.count
    }
}

impl<T, O: MembershipOracle<T> + ?Sized> MembershipOracle<T> for &mut O {
    fn query(&mut self, x: &[T]) -> Label {
        (**self).query(x)
    }

    fn query_count(&self) -> u64 {
        (**self).query_count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost::CostSpec;

    #[test]
    fn ledger_counts_every_call() {
        let c = SyntheticClassifier::halfspace(vec![1.0, 0.0], &[2.0, 0.0]).unwrap();
        let mut o = Oracle::new(c);
        assert_eq!(o.query(&[0.0, 0.0]), Label::Positive);
        assert_eq!(o.query(&[3.0, 0.0]), Label::Negative);
        assert_eq!(o.query(&[3.0, 0.0]), Label::Negative);
        assert_eq!(o.query_count(), 3);
        assert!(o.ledger().transcript().is_none());
    }

    #[test]
    fn transcript_respects_cap() {
        let spec = CostSpec::unweighted(2, 2.0).unwrap();
        let c = SyntheticClassifier::open_cost_ball(spec, 5.0).unwrap();
        let mut o = Oracle::new(c).with_transcript(2);
        for x in [[3.0, 4.0], [0.0, 0.0], [1.0, 1.0]] {
            o.query(&x);
        }
        let t = o.ledger().transcript().unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!(t[0].label, Label::Negative);
        assert_eq!(o.ledger().dropped(), 1);
        assert_eq!(o.query_count(), 3);
    }

    #[test]
    fn memoization_does_not_change_counts() {
        let mut calls = 0usize;
        let classifier = |x: &[f64]| {
            calls += 1;
            if x[0] > 1.0 {
                Label::Negative
            } else {
                Label::Positive
            }
        };
        let mut o = Oracle::new(classifier).with_memoization();
        for _ in 0..5 {
            o.query(&[2.0]);
        }
        assert_eq!(o.query_count(), 5);
        assert_eq!(o.distinct_queries(), Some(1));
        drop(o);
        assert_eq!(calls, 1);
    }

    #[test]
    fn label_values() {
        assert_eq!(i8::from(Label::Positive), 1);
        assert_eq!(Label::Negative.value(), -1);
    }
}
