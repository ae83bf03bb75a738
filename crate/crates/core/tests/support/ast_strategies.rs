//! Proptest strategies for syntax trees that the canonical printer and the
//! parser must agree on.

use proptest::prelude::*;
use symboleo_core::ast::*;

// Generated names carry a prefix that no keyword, base type or end marker has.
fn lower() -> impl Strategy<Value = String> {
    "x[a-z0-9]{0,5}"
}

fn upper() -> impl Strategy<Value = String> {
    "K[a-z0-9]{0,5}"
}

fn type_name() -> impl Strategy<Value = String> {
    prop_oneof![
        Just("Number".to_string()),
        Just("String".to_string()),
        Just("Date".to_string()),
        Just("Boolean".to_string()),
        upper(),
    ]
}

fn leaf_value() -> impl Strategy<Value = Value> {
    prop_oneof![
        prop::collection::vec(lower(), 1..4).prop_map(|p| Value::new(ValueKind::Path(p))),
        (0u32..1_000_000).prop_map(|n| Value::new(ValueKind::Number(Number(f64::from(n) / 100.0)))),
        "[a-zA-Z0-9 ,.]{0,8}".prop_map(|s| Value::new(ValueKind::Str(s))),
        prop::sample::select(vec!["2024-03-01", "2023-12-31T23:59", "2025-01-15T08:30:00Z"])
            .prop_map(|d| Value::new(ValueKind::Date(d.to_string()))),
        any::<bool>().prop_map(|b| Value::new(ValueKind::Bool(b))),
    ]
}

fn value() -> impl Strategy<Value = Value> {
    leaf_value().prop_recursive(3, 12, 2, |inner| {
        (
            prop::sample::select(vec![ArithOp::Add, ArithOp::Sub, ArithOp::Mul, ArithOp::Div, ArithOp::Rem]),
            inner.clone(),
            inner,
        )
            .prop_map(|(op, l, r)| Value::new(ValueKind::Binary { op, lhs: Box::new(l), rhs: Box::new(r) }))
    })
}

const PREDICATE_NAMES: [&str; 13] = [
    "Happens",
    "HappensAfter",
    "WhappensBefore",
    "ShappensBefore",
    "HappensWithin",
    "Violated",
    "Fulfilled",
    "Triggered",
    "Suspended",
    "Resumed",
    "Terminated",
    "IsEqual",
    "Interval",
];

fn compare() -> impl Strategy<Value = Situation> {
    (
        prop::sample::select(vec![
            CompareOp::Eq,
            CompareOp::Ne,
            CompareOp::Lt,
            CompareOp::Le,
            CompareOp::Gt,
            CompareOp::Ge,
        ]),
        value(),
        value(),
    )
        .prop_map(|(op, left, right)| Situation::new(SituationKind::Compare { op, left, right }))
}

pub fn situation() -> impl Strategy<Value = Situation> {
    let leaf = prop_oneof![
        Just(Situation::truth()),
        (prop::sample::select(PREDICATE_NAMES.to_vec()), prop::collection::vec(value(), 1..3))
            .prop_map(|(n, args)| Situation::predicate(n, args.into_iter().map(Arg::Value).collect())),
        compare(),
    ];
    leaf.prop_recursive(4, 24, 3, |inner| {
        // A bare `true` argument reads back as a boolean value.
        let arg = prop_oneof![
            value().prop_map(Arg::Value),
            inner.clone().prop_filter("true argument", |s| s.kind != SituationKind::True).prop_map(Arg::Situation),
        ];
        prop_oneof![
            (prop::sample::select(PREDICATE_NAMES.to_vec()), prop::collection::vec(arg, 1..3))
                .prop_map(|(n, args)| Situation::predicate(n, args)),
            prop::collection::vec(inner.clone(), 2..4).prop_map(|xs| Situation::new(SituationKind::And(xs))),
            prop::collection::vec(inner.clone(), 2..4).prop_map(|xs| Situation::new(SituationKind::Or(xs))),
            inner.prop_map(|s| Situation::new(SituationKind::Not(Box::new(s)))),
        ]
    })
}

fn attribute() -> impl Strategy<Value = Attribute> {
    (lower(), type_name(), any::<bool>()).prop_map(|(name, type_name, is_env)| Attribute {
        name,
        type_name,
        is_env,
        span: Span::NONE,
        type_span: Span::NONE,
    })
}

// Parties are role references.
fn party() -> impl Strategy<Value = Value> {
    prop::collection::vec(lower(), 1..3).prop_map(|p| Value::new(ValueKind::Path(p)))
}

fn norm(kind: NormKind) -> impl Strategy<Value = Norm> {
    (lower(), prop::option::of(situation()), party(), party(), situation(), situation()).prop_map(
        move |(name, trigger, first_party, second_party, antecedent, consequent)| Norm {
            name,
            kind,
            trigger,
            first_party,
            second_party,
            antecedent,
            consequent,
            span: Span::NONE,
        },
    )
}

/// Concept shapes before names and parents are fixed up.
#[derive(Clone, Debug)]
enum Shape {
    Base(ConceptKind, Vec<Attribute>),
    Enumeration(Vec<String>),
    Child(usize, Vec<Attribute>),
}

fn shape() -> impl Strategy<Value = Shape> {
    let attrs = || prop::collection::vec(attribute(), 0..3);
    prop_oneof![
        (prop::sample::select(vec![ConceptKind::Role, ConceptKind::Asset, ConceptKind::Event]), attrs())
            .prop_map(|(k, a)| Shape::Base(k, a)),
        prop::collection::vec(upper(), 1..4).prop_map(Shape::Enumeration),
        (any::<usize>(), attrs()).prop_map(|(i, a)| Shape::Child(i, a)),
    ]
}

fn concepts() -> impl Strategy<Value = Vec<DomainConcept>> {
    (prop::collection::vec(upper(), 0..6), prop::collection::vec(shape(), 6)).prop_map(|(names, shapes)| {
        let mut out: Vec<DomainConcept> = Vec::new();
        for (i, (name, shape)) in names.into_iter().zip(shapes).enumerate() {
            let name = format!("{name}{i}");
            let mut c = DomainConcept {
                name,
                kind: ConceptKind::Asset,
                parent: None,
                attributes: Vec::new(),
                enum_literals: Vec::new(),
                span: Span::NONE,
                parent_span: Span::NONE,
            };
            // Children specialise an earlier non-enumeration concept and
            // inherit its kind.
            let parents: Vec<&DomainConcept> = out.iter().filter(|p| p.kind != ConceptKind::Enumeration).collect();
            match shape {
                Shape::Base(kind, attrs) => {
                    c.kind = kind;
                    c.attributes = attrs;
                }
                Shape::Child(i, attrs) if !parents.is_empty() => {
                    let p = parents[i % parents.len()];
                    c.kind = p.kind;
                    c.parent = Some(p.name.clone());
                    c.attributes = attrs;
                }
                Shape::Child(_, attrs) => {
                    c.kind = ConceptKind::Role;
                    c.attributes = attrs;
                }
                Shape::Enumeration(lits) => {
                    c.kind = ConceptKind::Enumeration;
                    c.enum_literals = lits;
                }
            }
            out.push(c);
        }
        out
    })
}

fn parameter() -> impl Strategy<Value = Parameter> {
    (lower(), type_name(), prop::option::of(value())).prop_map(|(name, type_name, initializer)| Parameter {
        name,
        type_name,
        initializer,
        span: Span::NONE,
        type_span: Span::NONE,
    })
}

fn declaration() -> impl Strategy<Value = Declaration> {
    let init = (lower(), value()).prop_map(|(attribute, value)| Initializer { attribute, value, span: Span::NONE });
    (lower(), type_name(), prop::collection::vec(init, 0..3), prop::option::of(value())).prop_map(
        |(name, type_name, initializers, value)| Declaration {
            name,
            type_name,
            value: if initializers.is_empty() { value } else { None },
            initializers,
            span: Span::NONE,
            type_span: Span::NONE,
        },
    )
}

fn misplaced() -> impl Strategy<Value = Misplaced> {
    let item = |block: Block| -> BoxedStrategy<Misplaced> {
        let wrong = match block {
            Block::Powers => NormKind::Obligation,
            _ => NormKind::Power,
        };
        let norm_item = norm(wrong).prop_map(move |n| Misplaced { block, item: MisplacedItem::Norm(n) });
        if block.holds_norms() {
            prop_oneof![
                norm_item,
                attribute().prop_map(move |a| Misplaced { block, item: MisplacedItem::Attribute(a) })
            ]
            .boxed()
        } else {
            norm_item.boxed()
        }
    };
    prop_oneof![
        item(Block::Declarations),
        item(Block::Obligations),
        item(Block::SurvivingObligations),
        item(Block::Powers),
    ]
}

pub fn spec() -> impl Strategy<Value = ContractSpec> {
    let body = (
        prop::collection::vec(declaration(), 0..3),
        prop::collection::vec(situation(), 0..2),
        prop::collection::vec(situation(), 0..2),
        prop::collection::vec(norm(NormKind::Obligation), 0..3),
        prop::collection::vec(norm(NormKind::Obligation), 0..2),
        prop::collection::vec(norm(NormKind::Power), 0..3),
        prop::collection::vec(situation(), 0..2),
        prop::collection::vec(misplaced(), 0..3),
    );
    (lower(), concepts(), upper(), prop::collection::vec(parameter(), 0..4), body).prop_map(
        |(domain_name, concepts, name, signature, body)| {
            let (
                declarations,
                preconditions,
                postconditions,
                obligations,
                surviving_obligations,
                powers,
                constraints,
                mut misplaced,
            ) = body;
            // The printer emits misplaced items block by block.
            misplaced.sort_by_key(|m| m.block);
            ContractSpec {
                domain: DomainModel { name: domain_name, concepts, span: Span::NONE },
                name,
                signature,
                declarations,
                preconditions,
                postconditions,
                obligations,
                surviving_obligations,
                powers,
                constraints,
                misplaced,
                span: Span::NONE,
                header_span: Span::NONE,
            }
        },
    )
}
