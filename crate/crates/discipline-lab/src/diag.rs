//! Machine-readable verdicts shared by every checker.
//!
//! A [`Diagnostic`] names the violated rule, carries a source span, and is
//! either a hard `reject` or an informational `note`. Serialized JSON is
//! byte-stable: struct fields are declared in sorted key order and no
//! timestamps or absolute paths are embedded.

use serde::{Deserialize, Serialize};
use std::fmt;

/// Severity of a diagnostic. A verdict is rejecting iff it contains at least
/// one `Reject` entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Note,
    Reject,
}

/// Half-open source location: 1-based line and column plus the length of the
/// offending token.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Span {
    pub column: u32,
    pub file: String,
    pub length: u32,
    pub line: u32,
}

impl Span {
    pub fn new(file: impl Into<String>, line: u32, column: u32, length: u32) -> Self {
        Span { column, file: file.into(), length, line }
    }

    /// Span for values checked directly through the API rather than read
    /// from a source file.
    pub fn synthetic() -> Self {
        Span::new("<input>", 0, 0, 0)
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.file, self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub message: String,
    pub rule: String,
    pub severity: Severity,
    pub span: Span,
}

impl Diagnostic {
    pub fn reject(rule: &str, span: Span, message: impl Into<String>) -> Self {
        Diagnostic { message: message.into(), rule: rule.to_string(), severity: Severity::Reject, span }
    }

    pub fn note(rule: &str, span: Span, message: impl Into<String>) -> Self {
        Diagnostic { message: message.into(), rule: rule.to_string(), severity: Severity::Note, span }
    }

    pub fn is_reject(&self) -> bool {
        self.severity == Severity::Reject
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.severity {
            Severity::Reject => "reject",
            Severity::Note => "note",
        };
        write!(f, "{kind}[{}] {}: {}", self.rule, self.span, self.message)
    }
}

/// True iff no diagnostic in the slice rejects.
pub fn all_accept(diags: &[Diagnostic]) -> bool {
    diags.iter().all(|d| !d.is_reject())
}

/// The closed registry of rule names any checker may emit. `corpus`
/// expectations and the JSON output are restricted to this set.
pub const RULE_REGISTRY: &[&str] = &[
    // surface / well-formedness
    "PARSE",
    "WF-DUP-CLASS",
    "WF-DUP-FIELD",
    "WF-DUP-METHOD",
    "WF-DUP-PARAM",
    "WF-UNRESOLVED-CLASS",
    // reference-capability checker
    "CAP-UNBOUND",
    "CAP-CONSUMED",
    "CAP-SUBQ",
    "CAP-CLASS",
    "CAP-FIELD-WRITE",
    "CAP-ISO-BASE-READ",
    "CAP-NO-CLASS",
    "CAP-NO-FIELD",
    "CAP-NO-METHOD",
    "CAP-ARITY",
    "CAP-PAR-WRITABLE",
    "CAP-PAR-ISO-CONFLICT",
    "CAP-PAR-MERGE",
    "CAP-RECOVER-ENV",
    "CAP-RECOVER-TARGET",
    // effect framework
    "EFF-UNBOUND",
    "EFF-PAR-WRITE",
    "EFF-UI-CALL",
    "EFF-UI-ANNOT",
    "EFF-UIBOUND-FLOW",
    // rely-guarantee references
    "RG-PARSE",
    "RG-UNKNOWN-TYPE",
    "RG-WF",
    "RG-SPLIT",
    "RG-WRITE",
    // prototype layout
    "ABSENT",
    "NOT-CONCRETE",
    "NOT-CONCRETE-RECEIVER",
    "NO-SUCH-METHOD",
    "ARG-MISMATCH",
    "ATTACH-EXCEEDS",
    "NOT-CALLABLE",
    "ESCAPE",
    "PL-VALUE",
];

/// Every emitted rule must come from the registry; checked in tests.
pub fn is_registered(rule: &str) -> bool {
    RULE_REGISTRY.contains(&rule)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_fields_are_sorted() {
        let d = Diagnostic::reject("CAP-SUBQ", Span::new("a.kl", 3, 7, 1), "bad");
        let json = serde_json::to_string(&d).unwrap();
        assert_eq!(
            json,
            r#"{"message":"bad","rule":"CAP-SUBQ","severity":"reject","span":{"column":7,"file":"a.kl","length":1,"line":3}}"#
        );
    }

    #[test]
    fn registry_has_no_duplicates() {
        let mut seen = std::collections::HashSet::new();
        for rule in RULE_REGISTRY {
            assert!(seen.insert(rule), "duplicate rule {rule}");
        }
    }
}
