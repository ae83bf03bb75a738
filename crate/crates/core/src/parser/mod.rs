//! Recursive-descent parser for `.symboleo` sources.
//!
//! The accepted language is documented in `assets/grammar.txt`. Syntax
//! failures never abort the parse: each one becomes a [`Diagnostic`] and the
//! parser resynchronises at the next `;` or section keyword.

mod lexer;

pub use lexer::{tokenize, unescape, LexError, LexErrorKind, Token, TokenKind, KEYWORDS};

use crate::ast::*;
use crate::diagnostic::Diagnostic;
use crate::taxonomy::{ErrorType, Section};
use serde::Serialize;

/// Maximum nesting of expressions (situations and values combined).
pub const MAX_DEPTH: u32 = 64;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ParseOptions {
    /// Accept sources holding only some sections (no `Domain` block or
    /// `Contract` signature required).
    pub fragment: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ParseResult {
    pub spec: Option<ContractSpec>,
    pub diagnostics: Vec<Diagnostic>,
}

impl ParseResult {
    pub fn is_clean(&self) -> bool {
        self.spec.is_some() && self.diagnostics.is_empty()
    }
}

/// Parses a complete specification.
pub fn parse(source: &str) -> ParseResult {
    parse_with(source, ParseOptions::default())
}

/// Parses a source that may contain only some sections.
pub fn parse_fragment(source: &str) -> ParseResult {
    parse_with(source, ParseOptions { fragment: true })
}

pub fn parse_with(source: &str, options: ParseOptions) -> ParseResult {
    let (tokens, lex_errors) = tokenize(source);
    let tokens: Vec<Token> = tokens.into_iter().filter(|t| t.kind != TokenKind::Comment).collect();
    let mut p = Parser {
        toks: tokens,
        pos: 0,
        diags: Vec::new(),
        section: Section::Contract,
        regions: vec![((1, 1), Section::Contract)],
        depth: 0,
        seen_blocks: Vec::new(),
    };
    let doc = p.document();

    let mut diagnostics = p.diags;
    for e in lex_errors {
        let start = (e.span.start_line, e.span.start_col);
        let section = p.regions.iter().rev().find(|(at, _)| *at <= start).map(|(_, s)| *s).unwrap_or(Section::Contract);
        diagnostics.push(Diagnostic::auto(ErrorType::IncorrectSyntax, section, e.span, e.message()));
    }

    let eof = p.toks.last().map(|t| t.span).unwrap_or(SourceSpan::new(1, 1, 1, 1));
    let doc_span = SourceSpan::new(1, 1, eof.end_line, eof.end_col);
    let mut complete = true;
    if !options.fragment {
        if doc.domain.is_none() {
            complete = false;
            diagnostics.push(Diagnostic::auto(
                ErrorType::GrammarInconsistency,
                Section::Contract,
                doc_span,
                "missing `Domain ... endDomain` block",
            ));
        }
        if doc.header.is_some() && !doc.closed {
            let at = p.toks.last().map(|t| t.span).unwrap_or(doc_span);
            diagnostics.push(Diagnostic::auto(
                ErrorType::IncorrectSyntax,
                Section::Contract,
                at,
                "missing `endContract`",
            ));
        }
        if doc.header.is_none() {
            complete = false;
            diagnostics.push(Diagnostic::auto(
                ErrorType::GrammarInconsistency,
                Section::Contract,
                doc_span,
                "missing `Contract Name (...)` signature",
            ));
        }
    }
    diagnostics.sort_by_key(|d| d.sort_key());

    let spec = complete.then(|| {
        let mut spec = doc.body;
        spec.domain = doc.domain.unwrap_or_default();
        resolve_concept_kinds(&mut spec.domain);
        if let Some((name, params, span)) = doc.header {
            spec.name = name;
            spec.signature = params;
            spec.header_span = span.into();
        }
        spec.span = doc_span.into();
        spec
    });
    ParseResult { spec, diagnostics }
}

/// Concepts declared as specialisations of other concepts take the kind of
/// the first base kind found along their parent chain.
fn resolve_concept_kinds(domain: &mut DomainModel) {
    let lookup: Vec<(String, Option<String>, ConceptKind)> =
        domain.concepts.iter().map(|c| (c.name.clone(), c.parent.clone(), c.kind)).collect();
    for c in domain.concepts.iter_mut() {
        let mut parent = c.parent.clone();
        let mut seen = vec![c.name.clone()];
        c.kind = loop {
            let Some(p) = parent else { break c.kind };
            if seen.contains(&p) {
                break ConceptKind::Asset;
            }
            match lookup.iter().find(|(n, _, _)| *n == p) {
                Some((_, None, kind)) => break *kind,
                Some((_, next, _)) => {
                    seen.push(p);
                    parent = next.clone();
                }
                None => break ConceptKind::Asset,
            }
        };
    }
}

struct SyntaxError {
    taxonomy: ErrorType,
    span: SourceSpan,
    message: String,
}

type PResult<T> = Result<T, SyntaxError>;

enum Operand {
    Sit(Situation),
    Val(Value),
}

struct Document {
    domain: Option<DomainModel>,
    header: Option<(String, Vec<Parameter>, SourceSpan)>,
    body: ContractSpec,
    closed: bool,
}

const STRUCTURAL: &[&str] = &[
    "Domain",
    "endDomain",
    "Contract",
    "endContract",
    "Declarations",
    "Preconditions",
    "Postconditions",
    "Obligations",
    "SurvivingObligations",
    "Powers",
    "Constraints",
];

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    diags: Vec<Diagnostic>,
    section: Section,
    regions: Vec<((u32, u32), Section)>,
    depth: u32,
    seen_blocks: Vec<Block>,
}

impl Parser {
    // ----- token helpers -------------------------------------------------

    fn peek(&self) -> &Token {
        self.peek_n(0)
    }

    fn peek_n(&self, n: usize) -> &Token {
        let last = self.toks.len() - 1;
        &self.toks[(self.pos + n).min(last)]
    }

    fn at_eof(&self) -> bool {
        self.peek().kind == TokenKind::Eof
    }

    fn bump(&mut self) -> Token {
        let t = self.peek().clone();
        if t.kind != TokenKind::Eof {
            self.pos += 1;
        }
        t
    }

    fn prev_span(&self) -> SourceSpan {
        self.toks[self.pos.saturating_sub(1)].span
    }

    fn since(&self, start: SourceSpan) -> SourceSpan {
        if self.pos == 0 {
            return start;
        }
        start.to(self.prev_span())
    }

    fn error<T>(&self, message: impl Into<String>) -> PResult<T> {
        let t = self.peek();
        let found = if t.kind == TokenKind::Eof { "end of input".to_string() } else { format!("`{}`", t.lexeme) };
        Err(SyntaxError {
            taxonomy: ErrorType::IncorrectSyntax,
            span: t.span,
            message: format!("{}, found {found}", message.into()),
        })
    }

    fn expect_punct(&mut self, p: &str) -> PResult<Token> {
        if self.peek().is_punct(p) {
            Ok(self.bump())
        } else {
            self.error(format!("expected `{p}`"))
        }
    }

    fn expect_ident(&mut self, what: &str) -> PResult<Token> {
        if self.peek().kind == TokenKind::Identifier {
            Ok(self.bump())
        } else {
            self.error(format!("expected {what}"))
        }
    }

    fn report(&mut self, taxonomy: ErrorType, span: SourceSpan, message: impl Into<String>) {
        self.diags.push(Diagnostic::auto(taxonomy, self.section, span, message));
    }

    fn enter(&mut self, section: Section) {
        self.section = section;
        let s = self.peek().span;
        self.regions.push(((s.start_line, s.start_col), section));
    }

    /// Canonical structural keyword this token stands for, if any. Identifiers
    /// differing only in case count, unless they are clearly used as names.
    fn structural_keyword(&self) -> Option<&'static str> {
        let t = self.peek();
        match t.kind {
            TokenKind::Keyword => STRUCTURAL.iter().find(|k| **k == t.lexeme).copied(),
            TokenKind::Identifier => {
                let next = self.peek_n(1);
                if next.is_punct(".") || next.is_punct(":") || next.is_punct("(") || next.kind == TokenKind::Operator {
                    return None;
                }
                STRUCTURAL.iter().find(|k| k.eq_ignore_ascii_case(&t.lexeme)).copied()
            }
            _ => None,
        }
    }

    /// Consumes a structural keyword, reporting case deviations.
    fn take_structural(&mut self, kw: &str) -> Token {
        let t = self.bump();
        if t.lexeme != kw {
            self.report(ErrorType::IncorrectSyntax, t.span, format!("keyword `{}` must be written `{kw}`", t.lexeme));
        }
        t
    }

    /// `endprecondition`-style markers that close nothing.
    fn at_spurious_end_marker(&self) -> bool {
        let t = self.peek();
        let next = self.peek_n(1);
        t.kind == TokenKind::Identifier
            && t.lexeme.len() > 3
            && t.lexeme[..3].eq_ignore_ascii_case("end")
            && !(next.is_punct(":") || next.is_punct(".") || next.is_punct("(") || next.kind == TokenKind::Operator)
    }

    fn skip_end_marker(&mut self) {
        let t = self.bump();
        self.report(ErrorType::IncorrectSyntax, t.span, format!("unnecessary end marker `{}`", t.lexeme));
        if self.peek().is_punct(";") {
            self.bump();
        }
    }

    /// Skips to just after the next `;`, or up to the next structural keyword.
    /// Always consumes at least one token when not at a sync point.
    fn recover(&mut self, start: usize) {
        while !self.at_eof() {
            if self.peek().is_punct(";") {
                self.bump();
                return;
            }
            if self.structural_keyword().is_some() && self.pos > start {
                return;
            }
            if self.structural_keyword().is_some() && self.pos == start {
                // Statement failed on its first token and that token starts a
                // section: leave it for the caller.
                return;
            }
            self.bump();
        }
    }

    fn statement<T>(&mut self, f: impl FnOnce(&mut Self) -> PResult<T>) -> Option<T> {
        let start = self.pos;
        self.depth = 0;
        match f(self) {
            Ok(v) => Some(v),
            Err(e) => {
                self.diags.push(Diagnostic::auto(e.taxonomy, self.section, e.span, e.message));
                self.recover(start);
                if self.pos == start && !self.at_eof() && self.structural_keyword().is_none() {
                    self.bump();
                }
                None
            }
        }
    }

    // ----- document structure ---------------------------------------------

    fn document(&mut self) -> Document {
        let mut doc = Document { domain: None, header: None, body: ContractSpec::default(), closed: false };
        while !self.at_eof() {
            match self.structural_keyword() {
                Some("Domain") => {
                    let d = self.domain();
                    match &mut doc.domain {
                        Some(existing) => {
                            let span = d.span.get().unwrap_or(self.prev_span());
                            self.section = Section::Contract;
                            self.report(ErrorType::GrammarInconsistency, span, "repeated `Domain` block");
                            existing.concepts.extend(d.concepts);
                        }
                        None => doc.domain = Some(d),
                    }
                }
                Some("Contract") => {
                    let h = self.header();
                    if doc.header.is_some() {
                        self.section = Section::Contract;
                        let span = h.as_ref().map(|h| h.2).unwrap_or(self.prev_span());
                        self.report(ErrorType::GrammarInconsistency, span, "repeated contract signature");
                    } else {
                        doc.header = h;
                    }
                }
                Some("endContract") => {
                    self.take_structural("endContract");
                    doc.closed = true;
                    if self.peek().is_punct(";") {
                        self.bump();
                    }
                }
                Some("endDomain") => {
                    self.enter(Section::Domain);
                    let t = self.bump();
                    self.report(ErrorType::IncorrectSyntax, t.span, "`endDomain` without a matching `Domain`");
                }
                Some(kw) => {
                    let block = Block::from_keyword(kw).expect("section keyword");
                    self.block(block, &mut doc.body);
                }
                None if self.at_spurious_end_marker() => self.skip_end_marker(),
                None => {
                    self.enter(Section::Contract);
                    self.statement(|p| -> PResult<()> { p.error("expected a section keyword") });
                }
            }
        }
        doc
    }

    fn domain(&mut self) -> DomainModel {
        self.enter(Section::Domain);
        let start = self.take_structural("Domain").span;
        let name = match self.expect_ident("a domain name") {
            Ok(t) => t.lexeme,
            Err(e) => {
                self.report(e.taxonomy, e.span, e.message);
                String::new()
            }
        };
        let mut concepts = Vec::new();
        loop {
            if self.at_eof() {
                let span = self.peek().span;
                self.report(ErrorType::IncorrectSyntax, span, "missing `endDomain`");
                break;
            }
            match self.structural_keyword() {
                Some("endDomain") => {
                    self.take_structural("endDomain");
                    if self.peek().is_punct(";") {
                        self.bump();
                    }
                    break;
                }
                Some(_) => {
                    let span = self.peek().span;
                    self.report(ErrorType::IncorrectSyntax, span, "missing `endDomain`");
                    break;
                }
                None => {}
            }
            if self.at_spurious_end_marker() {
                self.skip_end_marker();
                continue;
            }
            if let Some(c) = self.statement(Self::concept) {
                concepts.push(c);
            }
        }
        DomainModel { name, concepts, span: self.since(start).into() }
    }

    fn concept(&mut self) -> PResult<DomainConcept> {
        let name = self.expect_ident("a concept name")?;
        if self.peek().is_punct(":") {
            self.bump();
        }
        let t = self.peek();
        let is_article = t.is_keyword("isA")
            || t.is_keyword("isAn")
            || (t.kind == TokenKind::Identifier
                && (t.lexeme.eq_ignore_ascii_case("isA") || t.lexeme.eq_ignore_ascii_case("isAn")));
        if !is_article {
            return self.error("expected `isA` or `isAn`");
        }
        let article = self.bump();
        if article.kind == TokenKind::Identifier {
            self.report(
                ErrorType::IncorrectSyntax,
                article.span,
                format!("keyword `{}` must be written `isA` or `isAn`", article.lexeme),
            );
        }
        let base = self.expect_ident("a base concept")?;
        let mut concept = DomainConcept {
            name: name.lexeme,
            kind: ConceptKind::Asset,
            parent: None,
            attributes: Vec::new(),
            enum_literals: Vec::new(),
            span: Span::NONE,
            parent_span: base.span.into(),
        };
        match ConceptKind::from_name(&base.lexeme) {
            Some(ConceptKind::Enumeration) => {
                concept.kind = ConceptKind::Enumeration;
                self.expect_punct("(")?;
                loop {
                    concept.enum_literals.push(self.expect_ident("an enumeration literal")?.lexeme);
                    if self.peek().is_punct(",") {
                        self.bump();
                    } else {
                        break;
                    }
                }
                self.expect_punct(")")?;
                if !self.peek().is_punct(";") {
                    return self.error("expected `;` after enumeration literals");
                }
            }
            Some(kind) => concept.kind = kind,
            None => concept.parent = Some(base.lexeme),
        }
        if self.peek().is_keyword("with") {
            self.bump();
            concept.attributes = self.attribute_list()?;
        } else if self.peek().kind == TokenKind::Identifier {
            concept.attributes = self.attribute_list()?;
        }
        self.expect_punct(";")?;
        concept.span = self.since(name.span).into();
        Ok(concept)
    }

    fn attribute_list(&mut self) -> PResult<Vec<Attribute>> {
        let mut attrs = vec![self.attribute()?];
        while self.peek().is_punct(",") {
            self.bump();
            attrs.push(self.attribute()?);
        }
        Ok(attrs)
    }

    fn at_env_marker(&self) -> bool {
        let t = self.peek();
        t.kind == TokenKind::Identifier && t.lexeme == "Env" && self.peek_n(1).kind == TokenKind::Identifier
    }

    fn attribute(&mut self) -> PResult<Attribute> {
        let start = self.peek().span;
        let is_env = self.at_env_marker();
        if is_env {
            self.bump();
        }
        let name = self.expect_ident("an attribute name")?;
        self.expect_punct(":")?;
        let ty = self.expect_ident("an attribute type")?;
        Ok(Attribute {
            name: name.lexeme,
            type_name: ty.lexeme,
            is_env,
            span: self.since(start).into(),
            type_span: ty.span.into(),
        })
    }

    fn header(&mut self) -> Option<(String, Vec<Parameter>, SourceSpan)> {
        self.enter(Section::Signature);
        let start = self.take_structural("Contract").span;
        let parsed = self.statement(|p| {
            let name = p.expect_ident("a contract name")?.lexeme;
            p.expect_punct("(")?;
            let mut params = Vec::new();
            if !p.peek().is_punct(")") {
                loop {
                    params.push(p.parameter()?);
                    if p.peek().is_punct(",") {
                        p.bump();
                    } else {
                        break;
                    }
                }
            }
            p.expect_punct(")")?;
            if p.peek().is_punct(";") {
                p.bump();
            }
            Ok((name, params))
        });
        parsed.map(|(name, params)| (name, params, self.since(start)))
    }

    fn parameter(&mut self) -> PResult<Parameter> {
        let name = self.expect_ident("a parameter name")?;
        self.expect_punct(":")?;
        let ty = self.expect_ident("a parameter type")?;
        let initializer = if self.peek().is_op(":=") {
            self.bump();
            Some(self.value()?)
        } else {
            None
        };
        Ok(Parameter {
            name: name.lexeme,
            type_name: ty.lexeme,
            initializer,
            span: self.since(name.span).into(),
            type_span: ty.span.into(),
        })
    }

    fn block(&mut self, block: Block, spec: &mut ContractSpec) {
        if self.seen_blocks.contains(&block) {
            self.section = Section::Contract;
            let span = self.peek().span;
            self.report(ErrorType::GrammarInconsistency, span, format!("repeated `{}` section", block.keyword()));
        }
        self.seen_blocks.push(block);
        self.enter(block.into());
        self.take_structural(block.keyword());
        if self.peek().is_punct(":") {
            let t = self.bump();
            self.report(ErrorType::IncorrectSyntax, t.span, "section keywords take no `:`");
        }
        loop {
            if self.at_eof() || self.structural_keyword().is_some() {
                break;
            }
            if self.at_spurious_end_marker() {
                self.skip_end_marker();
                continue;
            }
            if self.peek().is_punct(";") {
                let t = self.bump();
                self.report(ErrorType::IncorrectSyntax, t.span, "empty statement");
                continue;
            }
            match block {
                Block::Declarations => {
                    if let Some(item) = self.statement(Self::declaration_statement) {
                        match item {
                            DeclItem::Decl(d) => spec.declarations.push(d),
                            DeclItem::Norm(n) => spec.misplaced.push(Misplaced { block, item: MisplacedItem::Norm(n) }),
                        }
                    }
                }
                Block::Preconditions | Block::Postconditions | Block::Constraints => {
                    if let Some(s) = self.statement(|p| {
                        let s = p.situation()?;
                        p.expect_punct(";")?;
                        Ok(s)
                    }) {
                        match block {
                            Block::Preconditions => spec.preconditions.push(s),
                            Block::Postconditions => spec.postconditions.push(s),
                            _ => spec.constraints.push(s),
                        }
                    }
                }
                Block::Obligations | Block::SurvivingObligations | Block::Powers => {
                    if let Some(item) = self.statement(Self::norm_statement) {
                        let expected = if block == Block::Powers { NormKind::Power } else { NormKind::Obligation };
                        match item {
                            NormItem::Norm(n) if n.kind == expected => match block {
                                Block::Obligations => spec.obligations.push(n),
                                Block::SurvivingObligations => spec.surviving_obligations.push(n),
                                _ => spec.powers.push(n),
                            },
                            NormItem::Norm(n) => spec.misplaced.push(Misplaced { block, item: MisplacedItem::Norm(n) }),
                            NormItem::Attribute(a) => {
                                spec.misplaced.push(Misplaced { block, item: MisplacedItem::Attribute(a) })
                            }
                        }
                    }
                }
            }
        }
    }

    // ----- statements -----------------------------------------------------

    fn at_norm_keyword(&self) -> bool {
        let t = self.peek();
        let kw = t.is_keyword("Obligation")
            || t.is_keyword("Power")
            || (t.kind == TokenKind::Identifier && (t.lexeme == "O" || t.lexeme == "P"));
        kw && self.peek_n(1).is_punct("(")
    }

    /// `[trigger ->] Obligation(p1, p2, antecedent, consequent)` after `name:`.
    fn norm_body(&mut self, name: Token) -> PResult<Norm> {
        let trigger = if self.at_norm_keyword() {
            None
        } else {
            let t = self.situation()?;
            if !self.peek().is_op("->") {
                return self.error("expected `->` after the trigger");
            }
            self.bump();
            Some(t)
        };
        if !self.at_norm_keyword() {
            return self.error("expected `Obligation(`, `Power(`, `O(` or `P(`");
        }
        let kw = self.bump();
        let kind = if kw.lexeme.starts_with('O') { NormKind::Obligation } else { NormKind::Power };
        self.expect_punct("(")?;
        let first_party = self.party()?;
        self.expect_punct(",")?;
        let second_party = self.party()?;
        self.expect_punct(",")?;
        let antecedent = self.situation()?;
        self.expect_punct(",")?;
        let consequent = self.situation()?;
        self.expect_punct(")")?;
        self.expect_punct(";")?;
        Ok(Norm {
            name: name.lexeme,
            kind,
            trigger,
            first_party,
            second_party,
            antecedent,
            consequent,
            span: self.since(name.span).into(),
        })
    }

    fn party(&mut self) -> PResult<Value> {
        if self.peek().kind != TokenKind::Identifier {
            return self.error("expected a party reference");
        }
        let v = self.value()?;
        if v.as_path().is_none() {
            return Err(SyntaxError {
                taxonomy: ErrorType::IncorrectSyntax,
                span: v.span.get().unwrap_or(self.prev_span()),
                message: "a party must be a role reference".into(),
            });
        }
        Ok(v)
    }

    fn norm_statement(&mut self) -> PResult<NormItem> {
        if self.at_env_marker() {
            return Ok(NormItem::Attribute(self.attribute_then_semi()?));
        }
        let name = self.expect_ident("a norm name")?;
        self.expect_punct(":")?;
        let t = self.peek();
        if t.kind == TokenKind::Identifier && self.peek_n(1).is_punct(";") {
            let ty = self.bump();
            self.bump();
            return Ok(NormItem::Attribute(Attribute {
                name: name.lexeme,
                type_name: ty.lexeme,
                is_env: false,
                span: self.since(name.span).into(),
                type_span: ty.span.into(),
            }));
        }
        Ok(NormItem::Norm(self.norm_body(name)?))
    }

    fn attribute_then_semi(&mut self) -> PResult<Attribute> {
        let mut a = self.attribute()?;
        self.expect_punct(";")?;
        a.span = a.span.join(self.prev_span().into());
        Ok(a)
    }

    fn declaration_statement(&mut self) -> PResult<DeclItem> {
        let name = self.expect_ident("a declaration name")?;
        self.expect_punct(":")?;
        // A declaration has a bare type name here; anything that reads like a
        // situation or a norm keyword is a norm written in the wrong block.
        let (t, n) = (self.peek(), self.peek_n(1));
        let declaration_shaped = t.kind == TokenKind::Identifier
            && !(n.is_punct("(") || n.is_punct(".") || (n.kind == TokenKind::Operator && !n.is_op(":=")));
        let norm_shaped =
            self.at_norm_keyword() || (!declaration_shaped && t.kind != TokenKind::Eof && !t.is_punct(";"));
        if norm_shaped {
            return Ok(DeclItem::Norm(self.norm_body(name)?));
        }
        let ty = self.expect_ident("a type name")?;
        let mut initializers = Vec::new();
        if self.peek().is_keyword("with") {
            self.bump();
            loop {
                let attr = self.expect_ident("an attribute name")?;
                if !self.peek().is_op(":=") {
                    return self.error("expected `:=`");
                }
                self.bump();
                let value = self.value()?;
                initializers.push(Initializer { attribute: attr.lexeme, value, span: self.since(attr.span).into() });
                if self.peek().is_punct(",") {
                    self.bump();
                } else {
                    break;
                }
            }
        }
        let value = if self.peek().is_op(":=") {
            self.bump();
            Some(self.value()?)
        } else {
            None
        };
        self.expect_punct(";")?;
        Ok(DeclItem::Decl(Declaration {
            name: name.lexeme,
            type_name: ty.lexeme,
            initializers,
            value,
            span: self.since(name.span).into(),
            type_span: ty.span.into(),
        }))
    }

    // ----- expressions ----------------------------------------------------

    fn descend(&mut self) -> PResult<()> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return self.error(format!("expression nesting exceeds {MAX_DEPTH} levels"));
        }
        Ok(())
    }

    fn situation(&mut self) -> PResult<Situation> {
        let start = self.peek().span;
        let op = self.or_operand()?;
        self.to_situation(op, start)
    }

    fn to_situation(&self, op: Operand, start: SourceSpan) -> PResult<Situation> {
        match op {
            Operand::Sit(s) => Ok(s),
            Operand::Val(Value { kind: ValueKind::Bool(true), span }) => {
                Ok(Situation { kind: SituationKind::True, span })
            }
            Operand::Val(v) => Err(SyntaxError {
                taxonomy: ErrorType::IncorrectSyntax,
                span: v.span.get().unwrap_or(start),
                message: "expected a situation (predicate, comparison or `true`), found a value".into(),
            }),
        }
    }

    fn connective(
        &mut self,
        kw: &str,
        next: fn(&mut Self) -> PResult<Operand>,
        build: fn(Vec<Situation>) -> SituationKind,
    ) -> PResult<Operand> {
        let start = self.peek().span;
        let first = next(self)?;
        if !self.peek().is_keyword(kw) {
            return Ok(first);
        }
        let mut items = vec![self.to_situation(first, start)?];
        while self.peek().is_keyword(kw) {
            self.bump();
            let s = self.peek().span;
            let op = next(self)?;
            items.push(self.to_situation(op, s)?);
        }
        Ok(Operand::Sit(Situation { kind: build(items), span: self.since(start).into() }))
    }

    fn or_operand(&mut self) -> PResult<Operand> {
        self.connective("or", Self::and_operand, SituationKind::Or)
    }

    fn and_operand(&mut self) -> PResult<Operand> {
        self.connective("and", Self::unary_operand, SituationKind::And)
    }

    fn unary_operand(&mut self) -> PResult<Operand> {
        if self.peek().is_keyword("not") {
            let start = self.bump().span;
            self.descend()?;
            let s = self.peek().span;
            let inner = self.unary_operand()?;
            let inner = self.to_situation(inner, s)?;
            self.depth -= 1;
            return Ok(Operand::Sit(Situation {
                kind: SituationKind::Not(Box::new(inner)),
                span: self.since(start).into(),
            }));
        }
        self.primary_operand()
    }

    fn primary_operand(&mut self) -> PResult<Operand> {
        self.descend()?;
        let start = self.peek().span;
        let result = if self.peek().is_punct("(") {
            self.bump();
            let inner = self.or_operand()?;
            self.expect_punct(")")?;
            match inner {
                Operand::Sit(s) => {
                    if self.at_arith_op() || self.at_compare_op() {
                        return self.error("a situation cannot be used as a value");
                    }
                    Operand::Sit(s)
                }
                Operand::Val(mut v) => {
                    v.span = self.since(start).into();
                    let v = self.arith_tail(v, 1)?;
                    self.comparison_tail(v)?
                }
            }
        } else if self.peek().kind == TokenKind::Identifier && self.peek_n(1).is_punct("(") {
            let name = self.bump();
            self.bump();
            let mut args = Vec::new();
            if !self.peek().is_punct(")") {
                loop {
                    args.push(match self.or_operand()? {
                        Operand::Sit(s) => Arg::Situation(s),
                        Operand::Val(v) => Arg::Value(v),
                    });
                    if self.peek().is_punct(",") {
                        self.bump();
                    } else {
                        break;
                    }
                }
            }
            self.expect_punct(")")?;
            if self.at_arith_op() || self.at_compare_op() {
                return self.error("predicate calls cannot be used as values");
            }
            Operand::Sit(Situation {
                kind: SituationKind::Predicate { name: name.lexeme, args },
                span: self.since(start).into(),
            })
        } else {
            let v = self.value()?;
            self.comparison_tail(v)?
        };
        self.depth -= 1;
        Ok(result)
    }

    fn comparison_tail(&mut self, left: Value) -> PResult<Operand> {
        if !self.at_compare_op() {
            return Ok(Operand::Val(left));
        }
        let op = CompareOp::from_symbol(&self.bump().lexeme).expect("comparison operator");
        let right = self.value()?;
        let span = left.span.join(right.span);
        Ok(Operand::Sit(Situation { kind: SituationKind::Compare { op, left, right }, span }))
    }

    fn at_compare_op(&self) -> bool {
        let t = self.peek();
        t.kind == TokenKind::Operator && CompareOp::from_symbol(&t.lexeme).is_some()
    }

    fn at_arith_op(&self) -> bool {
        self.arith_op().is_some()
    }

    fn arith_op(&self) -> Option<ArithOp> {
        let t = self.peek();
        (t.kind == TokenKind::Operator).then(|| ArithOp::from_symbol(&t.lexeme)).flatten()
    }

    fn value(&mut self) -> PResult<Value> {
        let lhs = self.atom()?;
        self.arith_tail(lhs, 1)
    }

    /// Precedence climbing over `+ - * / %`, all left-associative.
    fn arith_tail(&mut self, mut lhs: Value, min_prec: u8) -> PResult<Value> {
        while let Some(op) = self.arith_op().filter(|op| op.precedence() >= min_prec) {
            self.bump();
            let mut rhs = self.atom()?;
            while let Some(next) = self.arith_op().filter(|n| n.precedence() > op.precedence()) {
                rhs = self.arith_tail(rhs, next.precedence())?;
            }
            let span = lhs.span.join(rhs.span);
            lhs = Value { kind: ValueKind::Binary { op, lhs: Box::new(lhs), rhs: Box::new(rhs) }, span };
        }
        Ok(lhs)
    }

    fn atom(&mut self) -> PResult<Value> {
        self.descend()?;
        let t = self.peek().clone();
        let kind = match t.kind {
            TokenKind::Number => {
                self.bump();
                let n: f64 = t.lexeme.parse().map_err(|_| SyntaxError {
                    taxonomy: ErrorType::IncorrectSyntax,
                    span: t.span,
                    message: format!("invalid number `{}`", t.lexeme),
                })?;
                ValueKind::Number(Number(n))
            }
            TokenKind::Str => {
                self.bump();
                ValueKind::Str(unescape(&t.lexeme))
            }
            TokenKind::Date => {
                self.bump();
                ValueKind::Date(t.lexeme.clone())
            }
            TokenKind::Keyword if t.lexeme == "true" || t.lexeme == "false" => {
                self.bump();
                ValueKind::Bool(t.lexeme == "true")
            }
            TokenKind::Identifier => {
                self.bump();
                let mut segments = vec![t.lexeme.clone()];
                while self.peek().is_punct(".") {
                    self.bump();
                    segments.push(self.expect_ident("an identifier after `.`")?.lexeme);
                }
                if self.peek().is_punct("(") {
                    return self.error("function calls are not supported in values");
                }
                ValueKind::Path(segments)
            }
            TokenKind::Punct if t.lexeme == "(" => {
                self.bump();
                let mut v = self.value()?;
                self.expect_punct(")")?;
                v.span = self.since(t.span).into();
                self.depth -= 1;
                return Ok(v);
            }
            _ => return self.error("expected a value"),
        };
        self.depth -= 1;
        Ok(Value { kind, span: self.since(t.span).into() })
    }
}

#[allow(clippy::large_enum_variant)]
enum DeclItem {
    Decl(Declaration),
    Norm(Norm),
}

#[allow(clippy::large_enum_variant)]
enum NormItem {
    Norm(Norm),
    Attribute(Attribute),
}

#[cfg(test)]
mod tests;
