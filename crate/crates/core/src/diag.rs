use std::fmt;

use thiserror::Error;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub enum DiagKind {
    ParseError,
    TypeError,
    UnboundVar,
    ScopeExtrusion,
    SoundnessViolation,
    CspSerialization,
    /// Evaluation-time contract violations: applying a non-function, capturing
    /// under an inactive prompt, reading an unbound dynamic variable.
    RuntimeError,
}

impl fmt::Display for DiagKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DiagKind::ParseError => "parse error",
            DiagKind::TypeError => "type error",
            DiagKind::UnboundVar => "unbound variable",
            DiagKind::ScopeExtrusion => "scope extrusion",
            DiagKind::SoundnessViolation => "soundness violation",
            DiagKind::CspSerialization => "CSP serialization",
            DiagKind::RuntimeError => "runtime error",
        })
    }
}

/// Byte offset into the input plus its 1-based line and column.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct Location {
    pub offset: usize,
    pub line: usize,
    pub column: usize,
}

impl Location {
    pub fn of_offset(src: &str, offset: usize) -> Location {
        let offset = offset.min(src.len());
        let before = &src[..offset];
        let line = before.matches('\n').count() + 1;
        let column = before.rfind('\n').map_or(offset, |nl| offset - nl - 1) + 1;
        Location { offset, line, column }
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
#[error("{kind}: {message}")]
pub struct Diagnostic {
    pub kind: DiagKind,
    pub message: String,
    pub location: Option<Location>,
    /// Preorder index of the syntax node the diagnostic is about, when it was
    /// produced from a tree rather than from text.
    pub node: Option<usize>,
}

impl Diagnostic {
    pub fn new(kind: DiagKind, message: impl Into<String>) -> Self {
        Diagnostic {
            kind,
            message: message.into(),
            location: None,
            node: None,
        }
    }

    pub fn at_node(mut self, node: usize) -> Self {
        if self.node.is_none() {
            self.node = Some(node);
        }
        self
    }

    pub fn at_location(mut self, loc: Location) -> Self {
        self.location = Some(loc);
        self
    }

    pub fn type_error(message: impl Into<String>) -> Self {
        Diagnostic::new(DiagKind::TypeError, message)
    }

    pub fn runtime(message: impl Into<String>) -> Self {
        Diagnostic::new(DiagKind::RuntimeError, message)
    }

    /// `file:line:col: kind: message`
    pub fn render(&self, file: &str) -> String {
        match self.location {
            Some(loc) => format!("{file}:{}:{}: {self}", loc.line, loc.column),
            None => format!("{file}: {self}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn locations_are_one_based() {
        let src = "ab\ncd";
        assert_eq!(Location::of_offset(src, 0), Location { offset: 0, line: 1, column: 1 });
        assert_eq!(Location::of_offset(src, 4), Location { offset: 4, line: 2, column: 2 });
    }

    #[test]
    fn renders_file_line_col() {
        let d = Diagnostic::new(DiagKind::ParseError, "unexpected `)`")
            .at_location(Location::of_offset("x\n )", 3));
        assert_eq!(d.render("a.pml"), "a.pml:2:2: parse error: unexpected `)`");
    }
}
