//! Validation findings. Validators never fail; they return the list of
//! violations they found, empty when the input is well-formed.

use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ViolationCode {
    // nets
    PortDegree,
    DanglingRef,
    PortOutOfRange,
    SelfEndpoint,
    UnknownSymbol,
    InvalidFreePort,
    BadSelection,
    CounterBehind,
    // rules
    InvalidRuleName,
    UnmappedInterfacePort,
    DuplicateMapping,
    DanglingRhsPort,
    RhsPortOverused,
    RhsFreePort,
    // rule sets
    DuplicatePair,
    DuplicateRuleName,
    // documents
    UnknownRule,
    UnlocatedRule,
    MissingNet,
    SignatureMismatch,
}

impl ViolationCode {
    pub fn as_str(self) -> &'static str {
        use ViolationCode::*;
        match self {
            PortDegree => "PortDegree",
            DanglingRef => "DanglingRef",
            PortOutOfRange => "PortOutOfRange",
            SelfEndpoint => "SelfEndpoint",
            UnknownSymbol => "UnknownSymbol",
            InvalidFreePort => "InvalidFreePort",
            BadSelection => "BadSelection",
            CounterBehind => "CounterBehind",
            InvalidRuleName => "InvalidRuleName",
            UnmappedInterfacePort => "UnmappedInterfacePort",
            DuplicateMapping => "DuplicateMapping",
            DanglingRhsPort => "DanglingRhsPort",
            RhsPortOverused => "RhsPortOverused",
            RhsFreePort => "RhsFreePort",
            DuplicatePair => "DuplicatePair",
            DuplicateRuleName => "DuplicateRuleName",
            UnknownRule => "UnknownRule",
            UnlocatedRule => "UnlocatedRule",
            MissingNet => "MissingNet",
            SignatureMismatch => "SignatureMismatch",
        }
    }
}

impl fmt::Display for ViolationCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub code: ViolationCode,
    /// Name of the rule, net or strategy the violation was found in, if any.
    pub subject: Option<String>,
    pub message: String,
}

impl Violation {
    pub fn new(code: ViolationCode, message: impl Into<String>) -> Self {
        Violation {
            code,
            subject: None,
            message: message.into(),
        }
    }

    pub fn in_subject(mut self, subject: impl Into<String>) -> Self {
        self.subject.get_or_insert_with(|| subject.into());
        self
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.subject {
            Some(s) => write!(f, "{}: {} ({s})", self.code, self.message),
            None => write!(f, "{}: {}", self.code, self.message),
        }
    }
}

/// Shorthand used by tests and callers that only care about the codes.
pub fn codes(violations: &[Violation]) -> Vec<ViolationCode> {
    violations.iter().map(|v| v.code).collect()
}
