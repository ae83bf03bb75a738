//! Data model of a Symboleo specification.
//!
//! Every node produced by the parser carries a [`Span`]. Spans never take part
//! in equality, so two trees compare equal when they are structurally the same
//! regardless of where they came from (parser, printer round trip, or hand
//! construction).

mod print;

pub use print::format;

use serde::{Deserialize, Serialize};
use std::fmt;

/// 1-based source region. `end_col` points one past the last character.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SourceSpan {
    pub start_line: u32,
    pub start_col: u32,
    pub end_line: u32,
    pub end_col: u32,
}

impl SourceSpan {
    pub fn new(start_line: u32, start_col: u32, end_line: u32, end_col: u32) -> Self {
        debug_assert!((start_line, start_col) <= (end_line, end_col));
        SourceSpan { start_line, start_col, end_line, end_col }
    }

    /// Smallest span covering both.
    pub fn to(self, other: SourceSpan) -> SourceSpan {
        let (start_line, start_col) = (self.start_line, self.start_col).min((other.start_line, other.start_col));
        let (end_line, end_col) = (self.end_line, self.end_col).max((other.end_line, other.end_col));
        SourceSpan { start_line, start_col, end_line, end_col }
    }

    pub fn contains(&self, other: &SourceSpan) -> bool {
        (self.start_line, self.start_col) <= (other.start_line, other.start_col)
            && (other.end_line, other.end_col) <= (self.end_line, self.end_col)
    }
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}-{}:{}", self.start_line, self.start_col, self.end_line, self.end_col)
    }
}

/// Optional source position attached to an AST node.
///
/// Equality and hashing ignore the position: structural comparison of trees is
/// what the printer round trip and the tests rely on.
#[derive(Clone, Copy, Debug, Default, Serialize, Deserialize)]
pub struct Span(pub Option<SourceSpan>);

impl Span {
    pub const NONE: Span = Span(None);

    pub fn get(self) -> Option<SourceSpan> {
        self.0
    }

    pub fn join(self, other: Span) -> Span {
        match (self.0, other.0) {
            (Some(a), Some(b)) => Span(Some(a.to(b))),
            (a, b) => Span(a.or(b)),
        }
    }
}

impl From<SourceSpan> for Span {
    fn from(s: SourceSpan) -> Self {
        Span(Some(s))
    }
}

impl PartialEq for Span {
    fn eq(&self, _: &Span) -> bool {
        true
    }
}

impl Eq for Span {}

impl std::hash::Hash for Span {
    fn hash<H: std::hash::Hasher>(&self, _: &mut H) {}
}

/// Built-in value types.
pub const BASE_TYPES: [&str; 4] = ["Number", "String", "Date", "Boolean"];

pub fn is_base_type(name: &str) -> bool {
    BASE_TYPES.contains(&name)
}

/// Root of a parsed specification.
///
/// Fragments (sources holding only some sections) leave `domain.name` and
/// `name` empty; the printer then omits the corresponding headers.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContractSpec {
    pub domain: DomainModel,
    pub name: String,
    pub signature: Vec<Parameter>,
    pub declarations: Vec<Declaration>,
    pub preconditions: Vec<Situation>,
    pub postconditions: Vec<Situation>,
    pub obligations: Vec<Norm>,
    pub surviving_obligations: Vec<Norm>,
    pub powers: Vec<Norm>,
    pub constraints: Vec<Situation>,
    /// Statements found in a section that cannot hold them.
    pub misplaced: Vec<Misplaced>,
    pub span: Span,
    pub header_span: Span,
}

impl ContractSpec {
    pub fn has_header(&self) -> bool {
        !self.name.is_empty()
    }

    /// All norms in source-section order.
    pub fn norms(&self) -> impl Iterator<Item = (Block, &Norm)> {
        self.obligations
            .iter()
            .map(|n| (Block::Obligations, n))
            .chain(self.surviving_obligations.iter().map(|n| (Block::SurvivingObligations, n)))
            .chain(self.powers.iter().map(|n| (Block::Powers, n)))
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DomainModel {
    pub name: String,
    pub concepts: Vec<DomainConcept>,
    pub span: Span,
}

impl DomainModel {
    pub fn concept(&self, name: &str) -> Option<&DomainConcept> {
        self.concepts.iter().find(|c| c.name == name)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ConceptKind {
    Role,
    Asset,
    Event,
    Enumeration,
}

impl ConceptKind {
    pub fn from_name(name: &str) -> Option<ConceptKind> {
        match name {
            "Role" => Some(ConceptKind::Role),
            "Asset" => Some(ConceptKind::Asset),
            "Event" => Some(ConceptKind::Event),
            "Enumeration" => Some(ConceptKind::Enumeration),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ConceptKind::Role => "Role",
            ConceptKind::Asset => "Asset",
            ConceptKind::Event => "Event",
            ConceptKind::Enumeration => "Enumeration",
        }
    }
}

/// `Seller isA Role with name: String;` or `Currency isAn Enumeration(USD, EUR);`
///
/// When `parent` is set the concept specialises another domain concept and
/// `kind` is inherited from it (`Asset` if the chain does not resolve).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DomainConcept {
    pub name: String,
    pub kind: ConceptKind,
    pub parent: Option<String>,
    pub attributes: Vec<Attribute>,
    pub enum_literals: Vec<String>,
    pub span: Span,
    pub parent_span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Attribute {
    pub name: String,
    pub type_name: String,
    pub is_env: bool,
    pub span: Span,
    pub type_span: Span,
}

/// Contract signature parameter. `initializer` is not legal Symboleo but is
/// kept so the linter can report it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Parameter {
    pub name: String,
    pub type_name: String,
    pub initializer: Option<Value>,
    pub span: Span,
    pub type_span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Declaration {
    pub name: String,
    pub type_name: String,
    pub initializers: Vec<Initializer>,
    /// `name: Type := value` form.
    pub value: Option<Value>,
    pub span: Span,
    pub type_span: Span,
}

/// `attribute := value` inside a declaration's `with` list.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Initializer {
    pub attribute: String,
    pub value: Value,
    pub span: Span,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NormKind {
    Obligation,
    Power,
}

/// Obligation or power. Parties are positional: (debtor, creditor) for
/// obligations, (creditor, debtor) for powers.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Norm {
    pub name: String,
    pub kind: NormKind,
    pub trigger: Option<Situation>,
    pub first_party: Value,
    pub second_party: Value,
    pub antecedent: Situation,
    pub consequent: Situation,
    pub span: Span,
}

/// Statement-holding sections of a contract body.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Block {
    Declarations,
    Preconditions,
    Postconditions,
    Obligations,
    SurvivingObligations,
    Powers,
    Constraints,
}

impl Block {
    pub const ALL: [Block; 7] = [
        Block::Declarations,
        Block::Preconditions,
        Block::Postconditions,
        Block::Obligations,
        Block::SurvivingObligations,
        Block::Powers,
        Block::Constraints,
    ];

    pub fn keyword(self) -> &'static str {
        match self {
            Block::Declarations => "Declarations",
            Block::Preconditions => "Preconditions",
            Block::Postconditions => "Postconditions",
            Block::Obligations => "Obligations",
            Block::SurvivingObligations => "SurvivingObligations",
            Block::Powers => "Powers",
            Block::Constraints => "Constraints",
        }
    }

    pub fn from_keyword(kw: &str) -> Option<Block> {
        Block::ALL.into_iter().find(|b| b.keyword() == kw)
    }

    pub fn holds_norms(self) -> bool {
        matches!(self, Block::Obligations | Block::SurvivingObligations | Block::Powers)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Misplaced {
    pub block: Block,
    pub item: MisplacedItem,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[allow(clippy::large_enum_variant)]
pub enum MisplacedItem {
    /// A norm outside the section for its kind.
    Norm(Norm),
    /// An attribute definition inside a norm section.
    Attribute(Attribute),
}

impl MisplacedItem {
    pub fn span(&self) -> Span {
        match self {
            MisplacedItem::Norm(n) => n.span,
            MisplacedItem::Attribute(a) => a.span,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CompareOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CompareOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CompareOp::Eq => "==",
            CompareOp::Ne => "!=",
            CompareOp::Lt => "<",
            CompareOp::Le => "<=",
            CompareOp::Gt => ">",
            CompareOp::Ge => ">=",
        }
    }

    pub fn from_symbol(s: &str) -> Option<CompareOp> {
        Some(match s {
            "==" => CompareOp::Eq,
            "!=" => CompareOp::Ne,
            "<" => CompareOp::Lt,
            "<=" => CompareOp::Le,
            ">" => CompareOp::Gt,
            ">=" => CompareOp::Ge,
            _ => return None,
        })
    }
}

/// Proposition used as trigger, antecedent, consequent, pre/postcondition or
/// constraint.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Situation {
    pub kind: SituationKind,
    pub span: Span,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SituationKind {
    Predicate { name: String, args: Vec<Arg> },
    And(Vec<Situation>),
    Or(Vec<Situation>),
    Not(Box<Situation>),
    Compare { op: CompareOp, left: Value, right: Value },
    True,
}

impl Situation {
    pub fn new(kind: SituationKind) -> Self {
        Situation { kind, span: Span::NONE }
    }

    pub fn predicate(name: &str, args: Vec<Arg>) -> Self {
        Situation::new(SituationKind::Predicate { name: name.to_string(), args })
    }

    pub fn truth() -> Self {
        Situation::new(SituationKind::True)
    }

    /// Pre-order walk over this situation and every nested situation,
    /// including those appearing as predicate arguments.
    pub fn walk<'a>(&'a self, f: &mut dyn FnMut(&'a Situation)) {
        f(self);
        match &self.kind {
            SituationKind::Predicate { args, .. } => {
                for a in args {
                    if let Arg::Situation(s) = a {
                        s.walk(f);
                    }
                }
            }
            SituationKind::And(xs) | SituationKind::Or(xs) => xs.iter().for_each(|s| s.walk(f)),
            SituationKind::Not(s) => s.walk(f),
            SituationKind::Compare { .. } | SituationKind::True => {}
        }
    }

    /// Every top-level value operand reachable from this situation.
    pub fn values(&self) -> Vec<&Value> {
        let mut out = Vec::new();
        self.walk(&mut |s| match &s.kind {
            SituationKind::Predicate { args, .. } => out.extend(args.iter().filter_map(|a| match a {
                Arg::Value(v) => Some(v),
                Arg::Situation(_) => None,
            })),
            SituationKind::Compare { left, right, .. } => {
                out.push(left);
                out.push(right);
            }
            _ => {}
        });
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Arg {
    Value(Value),
    Situation(Situation),
}

impl Arg {
    pub fn span(&self) -> Span {
        match self {
            Arg::Value(v) => v.span,
            Arg::Situation(s) => s.span,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
    Rem,
}

impl ArithOp {
    pub fn symbol(self) -> &'static str {
        match self {
            ArithOp::Add => "+",
            ArithOp::Sub => "-",
            ArithOp::Mul => "*",
            ArithOp::Div => "/",
            ArithOp::Rem => "%",
        }
    }

    pub fn precedence(self) -> u8 {
        match self {
            ArithOp::Add | ArithOp::Sub => 1,
            ArithOp::Mul | ArithOp::Div | ArithOp::Rem => 2,
        }
    }

    pub fn from_symbol(s: &str) -> Option<ArithOp> {
        Some(match s {
            "+" => ArithOp::Add,
            "-" => ArithOp::Sub,
            "*" => ArithOp::Mul,
            "/" => ArithOp::Div,
            "%" => ArithOp::Rem,
            _ => return None,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Value {
    pub kind: ValueKind,
    pub span: Span,
}

/// Non-negative decimal literal. Stored as `f64`; literals are never NaN.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Number(pub f64);

impl Eq for Number {}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ValueKind {
    /// Dot-separated identifier path, at least one segment.
    Path(Vec<String>),
    Number(Number),
    Str(String),
    /// ISO-8601 date (optionally with time), validated by the lexer.
    Date(String),
    Bool(bool),
    Binary {
        op: ArithOp,
        lhs: Box<Value>,
        rhs: Box<Value>,
    },
}

impl Value {
    pub fn new(kind: ValueKind) -> Self {
        Value { kind, span: Span::NONE }
    }

    pub fn path(segments: &[&str]) -> Self {
        Value::new(ValueKind::Path(segments.iter().map(|s| s.to_string()).collect()))
    }

    pub fn as_path(&self) -> Option<&[String]> {
        match &self.kind {
            ValueKind::Path(p) => Some(p),
            _ => None,
        }
    }

    /// Pre-order walk over this value and nested operands.
    pub fn walk<'a>(&'a self, f: &mut dyn FnMut(&'a Value)) {
        f(self);
        if let ValueKind::Binary { lhs, rhs, .. } = &self.kind {
            lhs.walk(f);
            rhs.walk(f);
        }
    }

    /// `obligations.x` / `powers.x` reference, if this is one.
    pub fn norm_ref(&self) -> Option<(NormKind, &str)> {
        match self.as_path()? {
            [head, name, ..] if head == "obligations" => Some((NormKind::Obligation, name)),
            [head, name, ..] if head == "powers" => Some((NormKind::Power, name)),
            _ => None,
        }
    }
}
