use super::UNRESOLVED;
use crate::ast::*;
use crate::diagnostic::Diagnostic;
use crate::taxonomy::{ErrorType, Section};
use std::collections::BTreeMap;
use std::fmt;

/// Named elements of a spec. The first definition of a name wins; later ones
/// are reported as duplicates by [`build_symbols`].
#[derive(Clone, Debug, Default)]
pub struct SymbolTable<'a> {
    pub concepts: BTreeMap<&'a str, &'a DomainConcept>,
    pub declarations: BTreeMap<&'a str, &'a Declaration>,
    pub parameters: BTreeMap<&'a str, &'a Parameter>,
    pub norms: BTreeMap<&'a str, &'a Norm>,
    /// Enumeration literal → enumeration name.
    pub enum_literals: BTreeMap<&'a str, &'a str>,
}

/// Inferred type of a value. `Unknown` is compatible with everything so that
/// one unresolved name does not cascade into type errors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Ty {
    Number,
    String,
    Date,
    Boolean,
    Concept(String),
    Enum(String),
    Norm,
    Contract,
    Unknown,
}

impl fmt::Display for Ty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ty::Number => f.write_str("Number"),
            Ty::String => f.write_str("String"),
            Ty::Date => f.write_str("Date"),
            Ty::Boolean => f.write_str("Boolean"),
            Ty::Concept(c) | Ty::Enum(c) => f.write_str(c),
            Ty::Norm => f.write_str("norm"),
            Ty::Contract => f.write_str("contract"),
            Ty::Unknown => f.write_str("unknown"),
        }
    }
}

impl Ty {
    pub fn is_known(&self) -> bool {
        *self != Ty::Unknown
    }

    pub fn compatible(&self, other: &Ty) -> bool {
        match (self, other) {
            (Ty::Unknown, _) | (_, Ty::Unknown) => true,
            // Distinct roles are routinely compared (`not(IsEqual(seller, buyer))`).
            (Ty::Concept(_), Ty::Concept(_)) => true,
            (a, b) => a == b,
        }
    }
}

pub fn build_symbols(spec: &ContractSpec) -> (SymbolTable<'_>, Vec<Diagnostic>) {
    let mut t = SymbolTable::default();
    let mut out = Vec::new();
    let mut dup = |section, span: Span, what: &str, name: &str| {
        out.push(Diagnostic::auto(
            ErrorType::GrammarInconsistency,
            section,
            span,
            format!("duplicate {what} `{name}`"),
        ));
    };

    for c in &spec.domain.concepts {
        if t.concepts.contains_key(c.name.as_str()) {
            dup(Section::Domain, c.span, "concept", &c.name);
        } else {
            t.concepts.insert(&c.name, c);
        }
        let mut seen: Vec<&str> = Vec::new();
        for a in &c.attributes {
            if seen.contains(&a.name.as_str()) {
                dup(Section::Domain, a.span, "attribute", &format!("{}.{}", c.name, a.name));
            } else {
                seen.push(&a.name);
            }
        }
        for lit in &c.enum_literals {
            t.enum_literals.entry(lit.as_str()).or_insert(c.name.as_str());
        }
    }
    for p in &spec.signature {
        if t.parameters.contains_key(p.name.as_str()) {
            dup(Section::Signature, p.span, "parameter", &p.name);
        } else {
            t.parameters.insert(&p.name, p);
        }
    }
    for d in &spec.declarations {
        if t.declarations.contains_key(d.name.as_str()) {
            dup(Section::Declarations, d.span, "declaration", &d.name);
        } else {
            t.declarations.insert(&d.name, d);
        }
    }
    for (_, n) in spec.norms() {
        if t.norms.contains_key(n.name.as_str()) {
            dup(Section::ObligationsPowers, n.span, "norm", &n.name);
        } else {
            t.norms.insert(&n.name, n);
        }
    }
    (t, out)
}

impl<'a> SymbolTable<'a> {
    pub fn is_type(&self, name: &str) -> bool {
        is_base_type(name) || self.concepts.contains_key(name)
    }

    pub fn type_named(&self, name: &str) -> Ty {
        match name {
            "Number" => Ty::Number,
            "String" => Ty::String,
            "Date" => Ty::Date,
            "Boolean" => Ty::Boolean,
            _ => match self.concepts.get(name) {
                Some(c) if c.kind == ConceptKind::Enumeration && c.parent.is_none() => Ty::Enum(name.to_string()),
                Some(_) => Ty::Concept(name.to_string()),
                None => Ty::Unknown,
            },
        }
    }

    /// `concept` followed by its ancestors, stopping at a cycle or an
    /// undefined parent.
    fn chain(&self, concept: &str) -> Vec<&'a DomainConcept> {
        let mut out: Vec<&DomainConcept> = Vec::new();
        let mut next = self.concepts.get(concept).copied();
        while let Some(c) = next {
            if out.iter().any(|seen| seen.name == c.name) {
                break;
            }
            out.push(c);
            next = c.parent.as_deref().and_then(|p| self.concepts.get(p).copied());
        }
        out
    }

    /// Whether every parent along the chain is defined and the chain is acyclic.
    pub fn chain_resolves(&self, concept: &str) -> bool {
        let chain = self.chain(concept);
        match chain.last() {
            Some(root) => root.parent.is_none(),
            None => false,
        }
    }

    /// Own and inherited attributes.
    pub fn attributes(&self, concept: &str) -> Vec<&'a Attribute> {
        self.chain(concept).into_iter().flat_map(|c| c.attributes.iter()).collect()
    }

    pub fn attribute(&self, concept: &str, name: &str) -> Option<&'a Attribute> {
        self.attributes(concept).into_iter().find(|a| a.name == name)
    }

    pub fn is_event_type(&self, ty: &Ty) -> bool {
        match ty {
            Ty::Unknown => true,
            Ty::Concept(c) => self.concepts.get(c.as_str()).is_none_or(|c| c.kind == ConceptKind::Event),
            _ => false,
        }
    }

    /// Checks that the head of a path names something in scope.
    pub fn resolve_path(&self, segs: &[String]) -> Result<(), String> {
        let head = segs[0].as_str();
        if head == "obligations" || head == "powers" {
            let kind = if head == "powers" { NormKind::Power } else { NormKind::Obligation };
            let what = if kind == NormKind::Power { "power" } else { "obligation" };
            return match segs.get(1) {
                None => Err(format!("{UNRESOLVED} norm reference `{head}` without a name")),
                Some(name) => match self.norms.get(name.as_str()) {
                    Some(n) if n.kind == kind => Ok(()),
                    _ => Err(format!("{UNRESOLVED} {what} `{name}` in `{}`", segs.join("."))),
                },
            };
        }
        if self.declarations.contains_key(head) || self.parameters.contains_key(head) || head == "self" {
            return Ok(());
        }
        if segs.len() == 1 && self.enum_literals.contains_key(head) {
            return Ok(());
        }
        if let (Some(c), Some(lit)) = (self.concepts.get(head), segs.get(1)) {
            if c.enum_literals.contains(lit) {
                return Ok(());
            }
        }
        Err(format!("{UNRESOLVED} name `{head}`"))
    }

    pub fn value_type(&self, v: &Value) -> Ty {
        match &v.kind {
            ValueKind::Number(_) | ValueKind::Binary { .. } => Ty::Number,
            ValueKind::Str(_) => Ty::String,
            ValueKind::Date(_) => Ty::Date,
            ValueKind::Bool(_) => Ty::Boolean,
            ValueKind::Path(segs) => self.path_type(segs),
        }
    }

    fn path_type(&self, segs: &[String]) -> Ty {
        let head = segs[0].as_str();
        let mut ty = if let Some(d) = self.declarations.get(head) {
            self.type_named(&d.type_name)
        } else if let Some(p) = self.parameters.get(head) {
            self.type_named(&p.type_name)
        } else if head == "self" {
            Ty::Contract
        } else if head == "obligations" || head == "powers" {
            return if segs.len() == 2 { Ty::Norm } else { Ty::Unknown };
        } else if let Some(owner) = self.enum_literals.get(head).filter(|_| segs.len() == 1) {
            Ty::Enum(owner.to_string())
        } else if self.concepts.get(head).is_some_and(|c| segs.len() == 2 && c.enum_literals.contains(&segs[1])) {
            return Ty::Enum(head.to_string());
        } else {
            Ty::Unknown
        };
        for seg in &segs[1..] {
            ty = match ty {
                Ty::Concept(c) => self.attribute(&c, seg).map(|a| self.type_named(&a.type_name)).unwrap_or(Ty::Unknown),
                _ => Ty::Unknown,
            };
        }
        ty
    }
}
