//! Fourteen-type compilation error taxonomy and its five error classes.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::logparse::Diagnostic;

/// Compilation error type, declared in descending frequency order of the
/// reference taxonomy. Declaration order is the match precedence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ErrorType {
    WasNotDeclared,
    HasNoMemberNamed,
    ExpectedBeforeToken,
    DoesNotNameAType,
    NoDeclarationMatches,
    NoSuchFileOrDirectory,
    LdReturned,
    InvalidConversion,
    UnusedVariable,
    DoesNotHaveAnyFieldNamed,
    CannotAllocateAnObjectOf,
    OfNonClassType,
    CannotConvert,
    StaticAssertionFailed,
    Unclassified,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ErrorClass {
    Dependency,
    Syntax,
    TypeMismatch,
    Semantic,
    Other,
    Unclassified,
}

impl ErrorType {
    /// The fourteen classifiable types in precedence order.
    pub const CLASSIFIED: [ErrorType; 14] = [
        ErrorType::WasNotDeclared,
        ErrorType::HasNoMemberNamed,
        ErrorType::ExpectedBeforeToken,
        ErrorType::DoesNotNameAType,
        ErrorType::NoDeclarationMatches,
        ErrorType::NoSuchFileOrDirectory,
        ErrorType::LdReturned,
        ErrorType::InvalidConversion,
        ErrorType::UnusedVariable,
        ErrorType::DoesNotHaveAnyFieldNamed,
        ErrorType::CannotAllocateAnObjectOf,
        ErrorType::OfNonClassType,
        ErrorType::CannotConvert,
        ErrorType::StaticAssertionFailed,
    ];

    /// All members including the `Unclassified` sentinel.
    pub const ALL: [ErrorType; 15] = [
        ErrorType::WasNotDeclared,
        ErrorType::HasNoMemberNamed,
        ErrorType::ExpectedBeforeToken,
        ErrorType::DoesNotNameAType,
        ErrorType::NoDeclarationMatches,
        ErrorType::NoSuchFileOrDirectory,
        ErrorType::LdReturned,
        ErrorType::InvalidConversion,
        ErrorType::UnusedVariable,
        ErrorType::DoesNotHaveAnyFieldNamed,
        ErrorType::CannotAllocateAnObjectOf,
        ErrorType::OfNonClassType,
        ErrorType::CannotConvert,
        ErrorType::StaticAssertionFailed,
        ErrorType::Unclassified,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ErrorType::WasNotDeclared => "WasNotDeclared",
            ErrorType::HasNoMemberNamed => "HasNoMemberNamed",
            ErrorType::ExpectedBeforeToken => "ExpectedBeforeToken",
            ErrorType::DoesNotNameAType => "DoesNotNameAType",
            ErrorType::NoDeclarationMatches => "NoDeclarationMatches",
            ErrorType::NoSuchFileOrDirectory => "NoSuchFileOrDirectory",
            ErrorType::LdReturned => "LdReturned",
            ErrorType::InvalidConversion => "InvalidConversion",
            ErrorType::UnusedVariable => "UnusedVariable",
            ErrorType::DoesNotHaveAnyFieldNamed => "DoesNotHaveAnyFieldNamed",
            ErrorType::CannotAllocateAnObjectOf => "CannotAllocateAnObjectOf",
            ErrorType::OfNonClassType => "OfNonClassType",
            ErrorType::CannotConvert => "CannotConvert",
            ErrorType::StaticAssertionFailed => "StaticAssertionFailed",
            ErrorType::Unclassified => "Unclassified",
        }
    }

    /// Message fragment as it appears in the taxonomy table.
    pub fn fragment(self) -> &'static str {
        match self {
            ErrorType::WasNotDeclared => "was not declared",
            ErrorType::HasNoMemberNamed => "has no member named",
            ErrorType::ExpectedBeforeToken => "expected X before Y token",
            ErrorType::DoesNotNameAType => "does not name a type",
            ErrorType::NoDeclarationMatches => "no declaration matches",
            ErrorType::NoSuchFileOrDirectory => "no such file or directory",
            ErrorType::LdReturned => "ld returned",
            ErrorType::InvalidConversion => "invalid conversion",
            ErrorType::UnusedVariable => "unused variable",
            ErrorType::DoesNotHaveAnyFieldNamed => "does not have any field named",
            ErrorType::CannotAllocateAnObjectOf => "cannot allocate an object of",
            ErrorType::OfNonClassType => "of non-class type",
            ErrorType::CannotConvert => "cannot convert",
            ErrorType::StaticAssertionFailed => "static assertion failed",
            ErrorType::Unclassified => "",
        }
    }

    /// Reference share of all compilation errors, in percent.
    pub fn reference_percent(self) -> f64 {
        match self {
            ErrorType::WasNotDeclared => 40.05,
            ErrorType::HasNoMemberNamed => 20.18,
            ErrorType::ExpectedBeforeToken => 11.77,
            ErrorType::DoesNotNameAType => 8.89,
            ErrorType::NoDeclarationMatches => 8.36,
            ErrorType::NoSuchFileOrDirectory => 2.76,
            ErrorType::LdReturned => 2.21,
            ErrorType::InvalidConversion => 1.53,
            ErrorType::UnusedVariable => 1.14,
            ErrorType::DoesNotHaveAnyFieldNamed => 0.82,
            ErrorType::CannotAllocateAnObjectOf => 0.73,
            ErrorType::OfNonClassType => 0.71,
            ErrorType::CannotConvert => 0.49,
            ErrorType::StaticAssertionFailed => 0.36,
            ErrorType::Unclassified => 0.0,
        }
    }

    pub fn class(self) -> ErrorClass {
        class_of(self)
    }

    /// Stable position in precedence order (Unclassified last).
    pub fn index(self) -> usize {
        self as usize
    }

    fn matches(self, message: &str) -> bool {
        match self {
            ErrorType::ExpectedBeforeToken => matches_expected_before_token(message),
            // strerror() capitalizes this one in real compiler output
            ErrorType::NoSuchFileOrDirectory => {
                message.contains("no such file or directory")
                    || message.contains("No such file or directory")
            }
            ErrorType::Unclassified => false,
            other => message.contains(other.fragment()),
        }
    }
}

impl fmt::Display for ErrorType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ErrorType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ErrorType::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| format!("unknown error type {s:?}"))
    }
}

impl ErrorClass {
    pub const ALL: [ErrorClass; 6] = [
        ErrorClass::Dependency,
        ErrorClass::Syntax,
        ErrorClass::TypeMismatch,
        ErrorClass::Semantic,
        ErrorClass::Other,
        ErrorClass::Unclassified,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ErrorClass::Dependency => "Dependency",
            ErrorClass::Syntax => "Syntax",
            ErrorClass::TypeMismatch => "TypeMismatch",
            ErrorClass::Semantic => "Semantic",
            ErrorClass::Other => "Other",
            ErrorClass::Unclassified => "Unclassified",
        }
    }
}

impl fmt::Display for ErrorClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// `expected … before … token`, anchors in that order.
fn matches_expected_before_token(message: &str) -> bool {
    let Some(a) = message.find("expected ") else {
        return false;
    };
    let rest = &message[a + "expected ".len()..];
    let Some(b) = rest.find(" before ") else {
        return false;
    };
    rest[b + " before ".len()..].contains(" token")
}

/// First matching type in precedence order, or `Unclassified`.
pub fn classify_message(message: &str) -> ErrorType {
    ErrorType::CLASSIFIED
        .into_iter()
        .find(|t| t.matches(message))
        .unwrap_or(ErrorType::Unclassified)
}

pub fn class_of(error_type: ErrorType) -> ErrorClass {
    use ErrorType::*;
    match error_type {
        WasNotDeclared
        | HasNoMemberNamed
        | DoesNotNameAType
        | NoSuchFileOrDirectory
        | LdReturned
        | UnusedVariable => ErrorClass::Dependency,
        ExpectedBeforeToken | StaticAssertionFailed => ErrorClass::Syntax,
        NoDeclarationMatches | InvalidConversion | DoesNotHaveAnyFieldNamed | CannotConvert => {
            ErrorClass::TypeMismatch
        }
        CannotAllocateAnObjectOf => ErrorClass::Semantic,
        OfNonClassType => ErrorClass::Other,
        Unclassified => ErrorClass::Unclassified,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ClassifiedError {
    pub diagnostic: Diagnostic,
    pub error_type: ErrorType,
    pub error_class: ErrorClass,
}

impl ClassifiedError {
    pub fn from_diagnostic(diagnostic: Diagnostic) -> Self {
        let error_type = classify_message(&diagnostic.message);
        Self {
            diagnostic,
            error_type,
            error_class: class_of(error_type),
        }
    }
}

/// Taxonomy as CSV with header `type,fragment,class`.
pub fn taxonomy_csv() -> String {
    let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
    w.write_record(["type", "fragment", "class"])
        .expect("in-memory write");
    for t in ErrorType::CLASSIFIED {
        w.write_record([t.name(), t.fragment(), t.class().name()])
            .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 csv")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn examples() {
        assert_eq!(
            classify_message("'err' was not declared in this scope"),
            ErrorType::WasNotDeclared
        );
        assert_eq!(
            classify_message("expected ';' before '}' token"),
            ErrorType::ExpectedBeforeToken
        );
        assert_eq!(
            classify_message("static assertion failed: size mismatch"),
            ErrorType::StaticAssertionFailed
        );
        assert_eq!(
            classify_message("some exotic diagnostic text"),
            ErrorType::Unclassified
        );
    }

    #[test]
    fn class_examples() {
        assert_eq!(class_of(ErrorType::LdReturned), ErrorClass::Dependency);
        assert_eq!(class_of(ErrorType::CannotConvert), ErrorClass::TypeMismatch);
        assert_eq!(class_of(ErrorType::OfNonClassType), ErrorClass::Other);
        assert_eq!(class_of(ErrorType::Unclassified), ErrorClass::Unclassified);
    }

    #[test]
    fn dependency_members_are_exactly_six() {
        let deps: Vec<ErrorType> = ErrorType::CLASSIFIED
            .into_iter()
            .filter(|t| t.class() == ErrorClass::Dependency)
            .collect();
        assert_eq!(
            deps,
            [
                ErrorType::WasNotDeclared,
                ErrorType::HasNoMemberNamed,
                ErrorType::DoesNotNameAType,
                ErrorType::NoSuchFileOrDirectory,
                ErrorType::LdReturned,
                ErrorType::UnusedVariable,
            ]
        );
    }

    #[test]
    fn reference_shares_sum_to_hundred() {
        let total: f64 = ErrorType::CLASSIFIED
            .iter()
            .map(|t| t.reference_percent())
            .sum();
        assert!((total - 100.0).abs() < 1e-9);
    }

    #[test]
    fn expected_token_template_needs_all_anchors_in_order() {
        assert!(!matches_expected_before_token("expected ';' here"));
        assert!(!matches_expected_before_token(
            "before '}' token expected ';'"
        ));
        assert!(matches_expected_before_token(
            "expected primary-expression before ')' token"
        ));
    }

    #[test]
    fn matching_is_case_sensitive() {
        assert_eq!(
            classify_message("Was Not Declared"),
            ErrorType::Unclassified
        );
    }

    #[test]
    fn taxonomy_csv_shape() {
        let csv = taxonomy_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "type,fragment,class");
        assert_eq!(lines.len(), 15);
        assert_eq!(lines[1], "WasNotDeclared,was not declared,Dependency");
        assert_eq!(
            lines[3],
            "ExpectedBeforeToken,expected X before Y token,Syntax"
        );
    }

    /// Message fragments that realize each type on their own.
    fn realizer(t: ErrorType) -> &'static str {
        match t {
            ErrorType::ExpectedBeforeToken => "expected ';' before '}' token",
            other => other.fragment(),
        }
    }

    proptest! {
        #[test]
        fn earlier_fragment_wins(a in 0usize..14, b in 0usize..14, sep in "[ a-z]{0,6}") {
            let (ta, tb) = (ErrorType::CLASSIFIED[a], ErrorType::CLASSIFIED[b]);
            let winner = ta.min(tb);
            let ab = format!("{}{sep}{}", realizer(ta), realizer(tb));
            let ba = format!("{}{sep}{}", realizer(tb), realizer(ta));
            prop_assert_eq!(classify_message(&ab), winner);
            prop_assert_eq!(classify_message(&ba), winner);
        }

        #[test]
        fn class_is_total(i in 0usize..15) {
            let t = ErrorType::ALL[i];
            let c = class_of(t);
            prop_assert_eq!(c == ErrorClass::Unclassified, t == ErrorType::Unclassified);
        }
    }
}
