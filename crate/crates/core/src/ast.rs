//! Control-flow tree of a single method.
//!
//! Only the constructs that matter for cognitive complexity are modelled.
//! Plain statements are kept as `STATEMENT` leaves because they still
//! delimit the runs that can be extracted.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum NodeKind {
    Method,
    Block,
    Statement,
    If,
    ElseIf,
    Else,
    For,
    While,
    DoWhile,
    Switch,
    Catch,
    LogicalSequence,
}

impl NodeKind {
    pub const ALL: [NodeKind; 12] = [
        NodeKind::Method,
        NodeKind::Block,
        NodeKind::Statement,
        NodeKind::If,
        NodeKind::ElseIf,
        NodeKind::Else,
        NodeKind::For,
        NodeKind::While,
        NodeKind::DoWhile,
        NodeKind::Switch,
        NodeKind::Catch,
        NodeKind::LogicalSequence,
    ];

    /// Contributes +1 to the inherent component.
    pub fn adds_inherent(self) -> bool {
        !matches!(self, NodeKind::Method | NodeKind::Block | NodeKind::Statement)
    }

    /// The increment of this construct is `1 + depth` instead of `1`.
    pub fn pays_nesting_penalty(self) -> bool {
        matches!(
            self,
            NodeKind::If
                | NodeKind::ElseIf
                | NodeKind::For
                | NodeKind::While
                | NodeKind::DoWhile
                | NodeKind::Switch
                | NodeKind::Catch
        )
    }

    /// Children of this construct sit one nesting level deeper.
    pub fn increments_child_depth(self) -> bool {
        self.pays_nesting_penalty() || self == NodeKind::Else
    }

    /// `ELSE_IF` / `ELSE` continue the chain opened by the preceding sibling.
    pub fn continues_chain(self) -> bool {
        matches!(self, NodeKind::ElseIf | NodeKind::Else)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            NodeKind::Method => "METHOD",
            NodeKind::Block => "BLOCK",
            NodeKind::Statement => "STATEMENT",
            NodeKind::If => "IF",
            NodeKind::ElseIf => "ELSE_IF",
            NodeKind::Else => "ELSE",
            NodeKind::For => "FOR",
            NodeKind::While => "WHILE",
            NodeKind::DoWhile => "DO_WHILE",
            NodeKind::Switch => "SWITCH",
            NodeKind::Catch => "CATCH",
            NodeKind::LogicalSequence => "LOGICAL_SEQUENCE",
        }
    }
}

impl fmt::Display for NodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for NodeKind {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        NodeKind::ALL.into_iter().find(|k| k.as_str() == s).ok_or(())
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AstError {
    #[error("malformed AST JSON: {0}")]
    Json(String),
    #[error("unknown node kind {kind:?} at {path}")]
    UnknownKind { kind: String, path: String },
    #[error("root node must be METHOD, found {0}")]
    RootNotMethod(NodeKind),
    #[error("node at {path}: {reason}")]
    Invalid { path: String, reason: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AstNode {
    pub kind: NodeKind,
    pub start_line: u32,
    pub end_line: u32,
    pub start_offset: u32,
    pub end_offset: u32,
    pub children: Vec<AstNode>,
}

/// Wire shape of a node; `kind` stays a string so unknown kinds can be
/// reported with their location instead of a bare serde error.
#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct RawNode {
    kind: String,
    start_line: u32,
    end_line: u32,
    start_offset: u32,
    end_offset: u32,
    #[serde(default)]
    children: Vec<RawNode>,
}

impl AstNode {
    pub fn new(kind: NodeKind, lines: (u32, u32), offsets: (u32, u32)) -> Self {
        AstNode {
            kind,
            start_line: lines.0,
            end_line: lines.1,
            start_offset: offsets.0,
            end_offset: offsets.1,
            children: Vec::new(),
        }
    }

    pub fn with_children(mut self, children: Vec<AstNode>) -> Self {
        self.children = children;
        self
    }

    /// Parses and validates a method tree.
    pub fn from_json(text: &str) -> Result<Self, AstError> {
        let raw: RawNode = serde_json::from_str(text).map_err(|e| AstError::Json(e.to_string()))?;
        let node = convert(raw, "$")?;
        node.validate()?;
        Ok(node)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&to_raw(self)).expect("AST serialization cannot fail")
    }

    pub fn line_count(&self) -> u32 {
        self.end_line - self.start_line + 1
    }

    /// Checks the structural invariants: METHOD root, ordered intervals and
    /// containment of children.
    pub fn validate(&self) -> Result<(), AstError> {
        if self.kind != NodeKind::Method {
            return Err(AstError::RootNotMethod(self.kind));
        }
        validate_node(self, "$", true)
    }

    /// Number of `STATEMENT`-level units in the tree: every node below the
    /// method that is not a block wrapper.
    pub fn statement_count(&self) -> usize {
        self.children.iter().map(|c| usize::from(c.kind != NodeKind::Block) + c.statement_count()).sum()
    }
}

fn convert(raw: RawNode, path: &str) -> Result<AstNode, AstError> {
    let kind = raw
        .kind
        .parse::<NodeKind>()
        .map_err(|_| AstError::UnknownKind { kind: raw.kind.clone(), path: path.to_string() })?;
    let children = raw
        .children
        .into_iter()
        .enumerate()
        .map(|(i, c)| convert(c, &format!("{path}.children[{i}]")))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(AstNode {
        kind,
        start_line: raw.start_line,
        end_line: raw.end_line,
        start_offset: raw.start_offset,
        end_offset: raw.end_offset,
        children,
    })
}

fn to_raw(node: &AstNode) -> RawNode {
    RawNode {
        kind: node.kind.as_str().to_string(),
        start_line: node.start_line,
        end_line: node.end_line,
        start_offset: node.start_offset,
        end_offset: node.end_offset,
        children: node.children.iter().map(to_raw).collect(),
    }
}

fn validate_node(node: &AstNode, path: &str, is_root: bool) -> Result<(), AstError> {
    let invalid = |reason: String| AstError::Invalid { path: path.to_string(), reason };
    if !is_root && node.kind == NodeKind::Method {
        return Err(invalid("METHOD may only appear at the root".into()));
    }
    if node.start_line == 0 {
        return Err(invalid("line numbers are 1-based".into()));
    }
    if node.start_line > node.end_line {
        return Err(invalid(format!("start line {} after end line {}", node.start_line, node.end_line)));
    }
    if node.start_offset > node.end_offset {
        return Err(invalid(format!("start offset {} after end offset {}", node.start_offset, node.end_offset)));
    }
    let mut prev: Option<&AstNode> = None;
    for (i, child) in node.children.iter().enumerate() {
        let child_path = format!("{path}.children[{i}]");
        if child.start_offset < node.start_offset || child.end_offset > node.end_offset {
            return Err(AstError::Invalid { path: child_path, reason: "offsets escape the parent interval".into() });
        }
        if child.start_line < node.start_line || child.end_line > node.end_line {
            return Err(AstError::Invalid { path: child_path, reason: "lines escape the parent interval".into() });
        }
        if let Some(p) = prev {
            if child.start_offset <= p.end_offset {
                return Err(AstError::Invalid { path: child_path, reason: "overlaps its previous sibling".into() });
            }
        }
        if child.kind.continues_chain() && !prev.is_some_and(|p| matches!(p.kind, NodeKind::If | NodeKind::ElseIf)) {
            return Err(AstError::Invalid {
                path: child_path,
                reason: format!("{} must follow an IF or ELSE_IF sibling", child.kind),
            });
        }
        validate_node(child, &child_path, false)?;
        prev = Some(child);
    }
    Ok(())
}
