//! Semantic checks over a parsed [`ContractSpec`].
//!
//! Only the error types that can be decided from the specification alone are
//! detected here (structure roles, data types, grammar rules, environment
//! variables, syntax). Everything that needs the natural-language contract
//! enters through manual annotations in the scorer.

mod symbols;

pub use symbols::{build_symbols, SymbolTable, Ty};

use crate::ast::*;
use crate::diagnostic::Diagnostic;
use crate::taxonomy::{ErrorType, Section};
use std::collections::BTreeMap;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct LintOptions {
    /// The spec is a fragment: names defined outside it cannot be resolved,
    /// so unresolved-name and unresolved-type findings are suppressed.
    pub fragment: bool,
}

/// Predicates understood by the checker and their arities.
pub const PREDICATES: &[(&str, usize)] = &[
    ("Happens", 1),
    ("HappensAfter", 2),
    ("WhappensBefore", 2),
    ("ShappensBefore", 2),
    ("HappensWithin", 2),
    ("Violated", 1),
    ("Fulfilled", 1),
    ("Triggered", 1),
    ("Suspended", 1),
    ("Resumed", 1),
    ("Terminated", 1),
    ("IsEqual", 2),
    ("Interval", 2),
];

/// Predicates a power may use as its consequent.
pub const POWER_FUNCTIONS: &[&str] = &["Triggered", "Suspended", "Resumed", "Terminated"];

/// Predicates whose leading arguments name events.
const EVENT_ARGS: &[(&str, usize)] =
    &[("Happens", 1), ("HappensAfter", 1), ("WhappensBefore", 1), ("ShappensBefore", 2), ("HappensWithin", 1)];

pub fn lint(spec: &ContractSpec) -> Vec<Diagnostic> {
    lint_with(spec, LintOptions::default())
}

pub fn lint_with(spec: &ContractSpec, options: LintOptions) -> Vec<Diagnostic> {
    let (symbols, mut out) = build_symbols(spec);
    out.extend(check_references(spec, &symbols));
    out.extend(check_types(spec, &symbols));
    out.extend(check_env_vars(spec, &symbols));
    out.extend(check_structure(spec, &symbols));
    out.extend(check_power_consequents(spec, &symbols));
    if options.fragment {
        out.retain(|d| !d.message.starts_with(UNRESOLVED));
    }
    finish(out)
}

const UNRESOLVED: &str = "unresolved";

/// Collapses duplicates and imposes the final order.
///
/// A source span carries at most one finding: the highest weight wins, then
/// the lower taxonomy id.
fn finish(diags: Vec<Diagnostic>) -> Vec<Diagnostic> {
    let mut by_span: BTreeMap<Option<SourceSpan>, Diagnostic> = BTreeMap::new();
    let mut spanless = Vec::new();
    for d in diags {
        let Some(span) = d.span else {
            if !spanless.contains(&d) {
                spanless.push(d);
            }
            continue;
        };
        match by_span.get(&Some(span)) {
            Some(kept)
                if (kept.weight, std::cmp::Reverse(kept.taxonomy.id()))
                    >= (d.weight, std::cmp::Reverse(d.taxonomy.id())) => {}
            _ => {
                by_span.insert(Some(span), d);
            }
        }
    }
    let mut out: Vec<Diagnostic> = spanless.into_iter().chain(by_span.into_values()).collect();
    out.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()).then_with(|| a.message.cmp(&b.message)));
    out
}

// ----- expression sites ---------------------------------------------------

/// Every situation in the spec with the section it is reported under.
fn situation_sites(spec: &ContractSpec) -> Vec<(Section, &Situation)> {
    let mut out = Vec::new();
    out.extend(spec.preconditions.iter().map(|s| (Section::Precondition, s)));
    out.extend(spec.postconditions.iter().map(|s| (Section::Postcondition, s)));
    for (_, n) in spec.norms() {
        out.extend(norm_situations(n).map(|s| (Section::ObligationsPowers, s)));
    }
    for m in &spec.misplaced {
        if let MisplacedItem::Norm(n) = &m.item {
            out.extend(norm_situations(n).map(|s| (Section::from(m.block), s)));
        }
    }
    out.extend(spec.constraints.iter().map(|s| (Section::Constraints, s)));
    out
}

fn norm_situations(n: &Norm) -> impl Iterator<Item = &Situation> {
    n.trigger.iter().chain([&n.antecedent, &n.consequent])
}

/// Every top-level value in the spec with its section.
fn value_sites(spec: &ContractSpec) -> Vec<(Section, &Value)> {
    let mut out = Vec::new();
    out.extend(spec.signature.iter().filter_map(|p| p.initializer.as_ref()).map(|v| (Section::Signature, v)));
    for d in &spec.declarations {
        out.extend(d.initializers.iter().map(|i| (Section::Declarations, &i.value)));
        out.extend(d.value.iter().map(|v| (Section::Declarations, v)));
    }
    for (_, n) in spec.norms() {
        out.push((Section::ObligationsPowers, &n.first_party));
        out.push((Section::ObligationsPowers, &n.second_party));
    }
    for (section, s) in situation_sites(spec) {
        out.extend(s.values().into_iter().map(|v| (section, v)));
    }
    out
}

fn diag(taxonomy: ErrorType, section: Section, span: Span, message: String) -> Diagnostic {
    Diagnostic::auto(taxonomy, section, span, message)
}

// ----- checks -------------------------------------------------------------

/// Name resolution and predicate arity.
pub fn check_references(spec: &ContractSpec, symbols: &SymbolTable) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    for (section, v) in value_sites(spec) {
        v.walk(&mut |v| {
            if let ValueKind::Path(segs) = &v.kind {
                if let Err(msg) = symbols.resolve_path(segs) {
                    out.push(diag(ErrorType::GrammarInconsistency, section, v.span, msg));
                }
            }
        });
    }
    for (section, s) in situation_sites(spec) {
        s.walk(&mut |s| {
            let SituationKind::Predicate { name, args } = &s.kind else { return };
            match PREDICATES.iter().find(|(p, _)| p == name) {
                None => out.push(diag(
                    ErrorType::GrammarInconsistency,
                    section,
                    s.span,
                    format!("unknown predicate `{name}`"),
                )),
                Some((_, arity)) if *arity != args.len() => out.push(diag(
                    ErrorType::IncorrectSyntax,
                    section,
                    s.span,
                    format!("`{name}` takes {arity} argument(s), found {}", args.len()),
                )),
                Some(_) => {}
            }
        });
    }
    out
}

/// Type names resolve; initializers, arithmetic, comparisons and event
/// arguments are well typed.
pub fn check_types(spec: &ContractSpec, symbols: &SymbolTable) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    let mut unresolved = |section, name: &str, span: Span, what: &str| {
        if !symbols.is_type(name) {
            out.push(diag(
                ErrorType::GrammarInconsistency,
                section,
                span,
                format!("{UNRESOLVED} type `{name}` in {what}"),
            ));
        }
    };
    for p in &spec.signature {
        unresolved(Section::Signature, &p.type_name, p.type_span, "parameter");
    }
    for d in &spec.declarations {
        unresolved(Section::Declarations, &d.type_name, d.type_span, "declaration");
    }
    for c in &spec.domain.concepts {
        if let Some(parent) = &c.parent {
            if spec.domain.concept(parent).is_none() {
                out.push(diag(
                    ErrorType::GrammarInconsistency,
                    Section::Domain,
                    c.parent_span,
                    format!("{UNRESOLVED} parent concept `{parent}` of `{}`", c.name),
                ));
            }
        }
        for a in &c.attributes {
            if !symbols.is_type(&a.type_name) {
                out.push(diag(
                    ErrorType::GrammarInconsistency,
                    Section::Domain,
                    a.type_span,
                    format!("{UNRESOLVED} type `{}` of attribute `{}.{}`", a.type_name, c.name, a.name),
                ));
            }
        }
    }

    for d in &spec.declarations {
        let declared = symbols.type_named(&d.type_name);
        if let Some(v) = &d.value {
            let found = symbols.value_type(v);
            if !declared.compatible(&found) {
                out.push(diag(
                    ErrorType::IncorrectDataType,
                    Section::Declarations,
                    v.span,
                    format!("`{}` is declared {} but assigned a {} value", d.name, declared, found),
                ));
            }
        }
        if let Ty::Concept(concept) = &declared {
            for init in &d.initializers {
                if let Some(attr) = symbols.attribute(concept, &init.attribute) {
                    let expected = symbols.type_named(&attr.type_name);
                    let found = symbols.value_type(&init.value);
                    if !expected.compatible(&found) {
                        out.push(diag(
                            ErrorType::IncorrectDataType,
                            Section::Declarations,
                            init.value.span,
                            format!(
                                "attribute `{}` of `{concept}` is {} but is initialised with a {} value",
                                init.attribute, expected, found
                            ),
                        ));
                    }
                }
            }
        }
    }

    for (section, v) in value_sites(spec) {
        v.walk(&mut |v| {
            let ValueKind::Binary { op, lhs, rhs } = &v.kind else { return };
            for operand in [lhs, rhs] {
                let ty = symbols.value_type(operand);
                if ty.is_known() && ty != Ty::Number {
                    out.push(diag(
                        ErrorType::IncorrectDataType,
                        section,
                        operand.span,
                        format!("operand of `{}` is {}, expected Number", op.symbol(), ty),
                    ));
                }
            }
        });
    }

    for (section, s) in situation_sites(spec) {
        s.walk(&mut |s| match &s.kind {
            SituationKind::Compare { op, left, right } => {
                let (l, r) = (symbols.value_type(left), symbols.value_type(right));
                if !l.compatible(&r) {
                    out.push(diag(
                        ErrorType::IncorrectDataType,
                        section,
                        s.span,
                        format!("`{}` compares {} with {}", op.symbol(), l, r),
                    ));
                }
            }
            SituationKind::Predicate { name, args } if name == "IsEqual" && args.len() == 2 => {
                if let [Arg::Value(a), Arg::Value(b)] = args.as_slice() {
                    let (l, r) = (symbols.value_type(a), symbols.value_type(b));
                    if !l.compatible(&r) {
                        out.push(diag(
                            ErrorType::IncorrectDataType,
                            section,
                            s.span,
                            format!("`IsEqual` compares {} with {}", l, r),
                        ));
                    }
                }
            }
            SituationKind::Predicate { name, args } => {
                let Some((_, n)) = EVENT_ARGS.iter().find(|(p, _)| p == name) else { return };
                for arg in args.iter().take(*n) {
                    let Arg::Value(v) = arg else { continue };
                    let ty = symbols.value_type(v);
                    if ty.is_known() && !symbols.is_event_type(&ty) {
                        out.push(diag(
                            ErrorType::IncorrectDataType,
                            section,
                            v.span,
                            format!("`{name}` expects an event, found {ty}"),
                        ));
                    }
                }
            }
            _ => {}
        });
    }
    out
}

/// `Env` markers belong on event attributes, and events whose attributes the
/// norms read should mark at least one of them as `Env`.
pub fn check_env_vars(spec: &ContractSpec, symbols: &SymbolTable) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    for c in &spec.domain.concepts {
        if c.kind == ConceptKind::Event {
            continue;
        }
        for a in c.attributes.iter().filter(|a| a.is_env) {
            out.push(diag(
                ErrorType::EnvironmentVariables,
                Section::Domain,
                a.span,
                format!(
                    "`Env` attribute `{}` on {} `{}`; only event attributes come from the environment",
                    a.name,
                    c.kind.as_str(),
                    c.name
                ),
            ));
        }
    }

    // Declared variables must be domain objects. A plain `amount: Number` is a
    // value the contract cannot produce itself, i.e. an environment input that
    // belongs on an event as an `Env` attribute.
    for d in &spec.declarations {
        if is_base_type(&d.type_name) {
            out.push(diag(
                ErrorType::EnvironmentVariables,
                Section::Declarations,
                d.type_span,
                format!(
                    "`{}` is declared as plain {}; runtime values belong on an event as `Env` attributes",
                    d.name, d.type_name
                ),
            ));
        }
    }

    // Event concepts whose attributes are read through a declaration inside a
    // norm, reported once per concept.
    let mut read: Vec<&str> = Vec::new();
    for (_, n) in spec.norms() {
        for s in norm_situations(n) {
            for v in s.values() {
                v.walk(&mut |v| {
                    let Some([head, _attr, ..]) = v.as_path() else { return };
                    let Some(d) = symbols.declarations.get(head.as_str()) else { return };
                    if let Some(c) = spec.domain.concept(&d.type_name) {
                        if c.kind == ConceptKind::Event && !read.contains(&c.name.as_str()) {
                            read.push(&c.name);
                        }
                    }
                });
            }
        }
    }
    for name in read {
        let Some(c) = spec.domain.concept(name) else { continue };
        if symbols.attributes(name).iter().all(|a| !a.is_env) {
            out.push(diag(
                ErrorType::EnvironmentVariables,
                Section::Domain,
                c.span,
                format!("event `{name}` has attributes read by norms but none is marked `Env`"),
            ));
        }
    }
    out
}

/// Elements defined in the wrong part of the contract.
pub fn check_structure(spec: &ContractSpec, symbols: &SymbolTable) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    for p in &spec.signature {
        if p.initializer.is_some() {
            out.push(diag(
                ErrorType::StructureRoles,
                Section::Signature,
                p.span,
                format!("parameter `{}` is initialised in the signature; values belong in Declarations", p.name),
            ));
        }
    }
    for m in &spec.misplaced {
        let msg = match &m.item {
            MisplacedItem::Norm(n) => {
                let kind = if n.kind == NormKind::Power { "power" } else { "obligation" };
                format!("{kind} `{}` defined under {}", n.name, m.block.keyword())
            }
            MisplacedItem::Attribute(a) => {
                format!(
                    "attribute `{}` defined under {}; attributes belong in the domain model",
                    a.name,
                    m.block.keyword()
                )
            }
        };
        out.push(diag(ErrorType::StructureRoles, m.block.into(), m.item.span(), msg));
    }
    for d in &spec.declarations {
        match symbols.type_named(&d.type_name) {
            Ty::Concept(concept) if symbols.chain_resolves(&concept) => {
                for init in &d.initializers {
                    if symbols.attribute(&concept, &init.attribute).is_none() {
                        out.push(diag(
                            ErrorType::StructureRoles,
                            Section::Declarations,
                            init.span,
                            format!("`{concept}` has no attribute `{}`", init.attribute),
                        ));
                    }
                }
            }
            Ty::Unknown | Ty::Concept(_) => {}
            ty => {
                if let Some(init) = d.initializers.first() {
                    out.push(diag(
                        ErrorType::StructureRoles,
                        Section::Declarations,
                        init.span,
                        format!("`{}` has type {ty}, which has no attributes to initialise", d.name),
                    ));
                }
            }
        }
    }
    out
}

/// A power's consequent must be a power function (or a conjunction of them)
/// applied to a norm or to the contract.
pub fn check_power_consequents(spec: &ContractSpec, _symbols: &SymbolTable) -> Vec<Diagnostic> {
    let misplaced = spec.misplaced.iter().filter_map(|m| match &m.item {
        MisplacedItem::Norm(n) => Some((Section::from(m.block), n)),
        MisplacedItem::Attribute(_) => None,
    });
    spec.powers
        .iter()
        .map(|n| (Section::ObligationsPowers, n))
        .chain(misplaced)
        .filter(|(_, n)| n.kind == NormKind::Power && !is_power_function(&n.consequent))
        .map(|(section, n)| {
            diag(
                ErrorType::GrammarInconsistency,
                section,
                n.consequent.span,
                format!(
                    "consequent of power `{}` must be Triggered, Suspended, Resumed or Terminated applied to a norm or the contract",
                    n.name
                ),
            )
        })
        .collect()
}

fn is_power_function(s: &Situation) -> bool {
    match &s.kind {
        SituationKind::Predicate { name, args } => {
            POWER_FUNCTIONS.contains(&name.as_str())
                && matches!(args.as_slice(), [Arg::Value(v)]
                    if v.norm_ref().is_some() || v.as_path().is_some_and(|p| p == ["self"]))
        }
        SituationKind::And(xs) => xs.iter().all(is_power_function),
        _ => false,
    }
}

#[cfg(test)]
mod tests;
