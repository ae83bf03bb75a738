//! Canonical printer.

use super::*;
use std::fmt::Write;

const INDENT: &str = "  ";

/// Renders `spec` as canonical Symboleo source.
///
/// Sections are emitted in the fixed order Domain, Contract signature,
/// Declarations, Preconditions, Postconditions, Obligations,
/// SurvivingObligations, Powers, Constraints. Empty sections are omitted.
pub fn format(spec: &ContractSpec) -> String {
    let mut out = String::new();
    let domain = &spec.domain;
    if !domain.name.is_empty() || !domain.concepts.is_empty() {
        writeln!(out, "Domain {}", domain.name).unwrap();
        for c in &domain.concepts {
            writeln!(out, "{INDENT}{};", concept(c)).unwrap();
        }
        out.push_str("endDomain\n");
    }

    let header = spec.has_header();
    if header {
        let params: Vec<String> = spec.signature.iter().map(parameter).collect();
        writeln!(out, "Contract {} ({})", spec.name, params.join(", ")).unwrap();
    }
    let section_indent = if header { INDENT } else { "" };
    for block in Block::ALL {
        let mut lines = block_lines(spec, block);
        lines.extend(spec.misplaced.iter().filter(|m| m.block == block).map(|m| match &m.item {
            MisplacedItem::Norm(n) => norm(n),
            MisplacedItem::Attribute(a) => attribute(a),
        }));
        if lines.is_empty() {
            continue;
        }
        writeln!(out, "{section_indent}{}", block.keyword()).unwrap();
        for l in lines {
            writeln!(out, "{section_indent}{INDENT}{l};").unwrap();
        }
    }
    if header {
        out.push_str("endContract\n");
    }
    out
}

fn block_lines(spec: &ContractSpec, block: Block) -> Vec<String> {
    match block {
        Block::Declarations => spec.declarations.iter().map(declaration).collect(),
        Block::Preconditions => spec.preconditions.iter().map(situation).collect(),
        Block::Postconditions => spec.postconditions.iter().map(situation).collect(),
        Block::Obligations => spec.obligations.iter().map(norm).collect(),
        Block::SurvivingObligations => spec.surviving_obligations.iter().map(norm).collect(),
        Block::Powers => spec.powers.iter().map(norm).collect(),
        Block::Constraints => spec.constraints.iter().map(situation).collect(),
    }
}

fn article(word: &str) -> &'static str {
    match word.chars().next().map(|c| c.to_ascii_uppercase()) {
        Some('A' | 'E' | 'I' | 'O' | 'U') => "isAn",
        _ => "isA",
    }
}

fn concept(c: &DomainConcept) -> String {
    if c.kind == ConceptKind::Enumeration && c.parent.is_none() {
        return format!("{} isAn Enumeration({})", c.name, c.enum_literals.join(", "));
    }
    let base = c.parent.as_deref().unwrap_or(c.kind.as_str());
    let mut s = format!("{} {} {}", c.name, article(base), base);
    if !c.attributes.is_empty() {
        let attrs: Vec<String> = c.attributes.iter().map(attribute).collect();
        write!(s, " with {}", attrs.join(", ")).unwrap();
    }
    s
}

fn attribute(a: &Attribute) -> String {
    let env = if a.is_env { "Env " } else { "" };
    format!("{env}{}: {}", a.name, a.type_name)
}

fn parameter(p: &Parameter) -> String {
    match &p.initializer {
        Some(v) => format!("{}: {} := {}", p.name, p.type_name, value(v)),
        None => format!("{}: {}", p.name, p.type_name),
    }
}

fn declaration(d: &Declaration) -> String {
    let mut s = format!("{}: {}", d.name, d.type_name);
    if !d.initializers.is_empty() {
        let inits: Vec<String> =
            d.initializers.iter().map(|i| format!("{} := {}", i.attribute, value(&i.value))).collect();
        write!(s, " with {}", inits.join(", ")).unwrap();
    }
    if let Some(v) = &d.value {
        write!(s, " := {}", value(v)).unwrap();
    }
    s
}

fn norm(n: &Norm) -> String {
    let keyword = match n.kind {
        NormKind::Obligation => "Obligation",
        NormKind::Power => "Power",
    };
    let trigger = n.trigger.as_ref().map(|t| format!("{} -> ", situation(t))).unwrap_or_default();
    format!(
        "{}: {trigger}{keyword}({}, {}, {}, {})",
        n.name,
        value(&n.first_party),
        value(&n.second_party),
        situation(&n.antecedent),
        situation(&n.consequent)
    )
}

pub(crate) fn situation(s: &Situation) -> String {
    match &s.kind {
        SituationKind::True => "true".into(),
        SituationKind::Predicate { name, args } => {
            let args: Vec<String> = args
                .iter()
                .map(|a| match a {
                    Arg::Value(v) => value(v),
                    Arg::Situation(s) => situation(s),
                })
                .collect();
            format!("{name}({})", args.join(", "))
        }
        SituationKind::Not(inner) => format!("not({})", situation(inner)),
        SituationKind::Compare { op, left, right } => {
            format!("{} {} {}", value(left), op.symbol(), value(right))
        }
        SituationKind::And(xs) => {
            join_connective(xs, " and ", |k| matches!(k, SituationKind::And(_) | SituationKind::Or(_)))
        }
        SituationKind::Or(xs) => join_connective(xs, " or ", |k| matches!(k, SituationKind::Or(_))),
    }
}

fn join_connective(xs: &[Situation], sep: &str, needs_parens: fn(&SituationKind) -> bool) -> String {
    xs.iter()
        .map(|x| if needs_parens(&x.kind) { format!("({})", situation(x)) } else { situation(x) })
        .collect::<Vec<_>>()
        .join(sep)
}

pub(crate) fn value(v: &Value) -> String {
    match &v.kind {
        ValueKind::Path(p) => p.join("."),
        ValueKind::Number(n) => n.0.to_string(),
        ValueKind::Str(s) => quote(s),
        ValueKind::Date(d) => d.clone(),
        ValueKind::Bool(b) => b.to_string(),
        ValueKind::Binary { op, lhs, rhs } => {
            let l = operand(lhs, op.precedence(), false);
            let r = operand(rhs, op.precedence(), true);
            format!("{l} {} {r}", op.symbol())
        }
    }
}

fn operand(v: &Value, parent: u8, right: bool) -> String {
    match &v.kind {
        ValueKind::Binary { op, .. } if op.precedence() < parent || (right && op.precedence() == parent) => {
            format!("({})", value(v))
        }
        _ => value(v),
    }
}

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

impl std::fmt::Display for Situation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&situation(self))
    }
}

impl std::fmt::Display for Value {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&value(self))
    }
}
