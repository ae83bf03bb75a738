use super::*;

const SALE: &str = r#"
Domain saleD
  Seller isA Role with returnAddress: String, name: String;
  Buyer isA Role with warehouse: String;
  Currency isAn Enumeration(CAD, USD);
  PerishableGood isA Asset with quantity: Number, quality: String;
  Meat isA PerishableGood;
  Delivered isAn Event with Env item: Meat, deliveryAddress: String, Env delDueDate: Date;
  Paid isAn Event with amount: Number, currency: Currency, from: Buyer, to: Seller, payDueDate: Date;
endDomain
Contract MeatSale (buyer: Buyer, seller: Seller, qnt: Number, amt: Number, curr: Currency, payDueDate: Date, delAdd: String, delDueDateDays: Number)
  Declarations
    goods: Meat with quantity := qnt;
    delivered: Delivered with item := goods, deliveryAddress := delAdd, delDueDate := 2024-06-01;
    paid: Paid with amount := amt, currency := curr, from := buyer, to := seller, payDueDate := payDueDate;
  Preconditions
    IsEqual(goods.quality, "AAA");
  Obligations
    delivery: Obligation(seller, buyer, true, WhappensBefore(delivered, delivered.delDueDate));
    payment: O(buyer, seller, true, WhappensBefore(paid, paid.payDueDate));
    latePayment: Happens(Violated(obligations.payment)) -> Obligation(buyer, seller, true, Happens(paid) and paid.amount >= amt * (1 + 10 / 100));
  Powers
    suspendDelivery: Happens(Violated(obligations.payment)) -> Power(seller, buyer, true, Suspended(obligations.delivery));
  Constraints
    not(IsEqual(buyer, seller));
endContract
"#;

fn clean(src: &str) -> ContractSpec {
    let r = parse(src);
    assert!(r.diagnostics.is_empty(), "unexpected diagnostics: {:#?}", r.diagnostics);
    r.spec.expect("spec")
}

fn ids(r: &ParseResult) -> Vec<u8> {
    r.diagnostics.iter().map(|d| d.taxonomy.id()).collect()
}

#[test]
fn parses_a_complete_contract() {
    let spec = clean(SALE);
    assert_eq!(spec.domain.name, "saleD");
    assert_eq!(spec.domain.concepts.len(), 7);
    assert_eq!(spec.name, "MeatSale");
    assert_eq!(spec.signature.len(), 8);
    assert_eq!(spec.declarations.len(), 3);
    assert_eq!(spec.obligations.len(), 3);
    assert_eq!(spec.powers.len(), 1);
    assert_eq!(spec.constraints.len(), 1);
    assert!(spec.misplaced.is_empty());

    let meat = spec.domain.concept("Meat").unwrap();
    assert_eq!(meat.parent.as_deref(), Some("PerishableGood"));
    assert_eq!(meat.kind, ConceptKind::Asset);
    let delivered = spec.domain.concept("Delivered").unwrap();
    assert_eq!(delivered.kind, ConceptKind::Event);
    assert_eq!(delivered.attributes.iter().filter(|a| a.is_env).count(), 2);
    assert_eq!(spec.domain.concept("Currency").unwrap().enum_literals, ["CAD", "USD"]);

    let late = &spec.obligations[2];
    assert!(late.trigger.is_some());
    assert!(matches!(late.consequent.kind, SituationKind::And(ref xs) if xs.len() == 2));
    assert_eq!(spec.powers[0].kind, NormKind::Power);
}

#[test]
fn printer_round_trip_on_sample() {
    let spec = clean(SALE);
    let printed = crate::ast::format(&spec);
    let again = clean(&printed);
    assert_eq!(spec, again);
    assert_eq!(printed, crate::ast::format(&again));
}

#[test]
fn spans_cover_nodes() {
    let spec = clean(SALE);
    let payment = &spec.obligations[1];
    let span = payment.span.get().unwrap();
    assert_eq!((span.start_line, span.start_col), (20, 5));
    assert_eq!(span.end_line, 20);
    let c = spec.domain.concept("Meat").unwrap();
    assert_eq!(c.parent_span.get().unwrap().start_line, 7);
}

#[test]
fn empty_source_is_rejected_in_full_mode() {
    let r = parse("");
    assert!(r.spec.is_none());
    assert!(ids(&r).iter().all(|&id| id == 9));
    assert_eq!(r.diagnostics.len(), 2);
}

#[test]
fn fragment_mode_accepts_partial_sources() {
    let r = parse_fragment("Powers\n  p1: Power(a, b, true, Terminated(self));\n");
    assert!(r.diagnostics.is_empty(), "{:?}", r.diagnostics);
    let spec = r.spec.unwrap();
    assert_eq!(spec.powers.len(), 1);
    assert!(!spec.has_header());
    let r = parse_fragment("");
    assert_eq!(r.spec, Some(ContractSpec::default()));
}

#[test]
fn recovers_after_bad_statement() {
    let src = "Obligations\n  o1: Obligation(a, b, true, Happens(e)\n  o2: Obligation(a, b, true, Happens(e));\n  o3: Obligation(a, b, true, Happens(e));\n";
    let r = parse_fragment(src);
    assert_eq!(ids(&r), [15]);
    assert_eq!(r.diagnostics[0].section, Section::ObligationsPowers);
    let spec = r.spec.unwrap();
    // o1 swallows o2 up to its `;`, o3 survives.
    assert_eq!(spec.obligations.len(), 1);
    assert_eq!(spec.obligations[0].name, "o3");
}

#[test]
fn keyword_case_is_reported_then_accepted() {
    let r = parse_fragment("obligations\n  o: O(a, b, true, Happens(e));\n");
    assert_eq!(ids(&r), [15]);
    assert_eq!(r.spec.unwrap().obligations.len(), 1);
}

#[test]
fn lowercase_norm_reference_is_not_a_keyword() {
    let r = parse_fragment("Powers\n  p: Power(a, b, true, Suspended(obligations.o));\n");
    assert!(r.diagnostics.is_empty(), "{:?}", r.diagnostics);
}

#[test]
fn spurious_end_marker() {
    let src = "Preconditions\n  Happens(e);\nendprecondition;\nPostconditions\n  Happens(f);\n";
    let r = parse_fragment(src);
    assert_eq!(ids(&r), [15]);
    assert!(r.diagnostics[0].message.contains("endprecondition"));
    let spec = r.spec.unwrap();
    assert_eq!((spec.preconditions.len(), spec.postconditions.len()), (1, 1));
}

#[test]
fn section_colon_is_tolerated() {
    let r = parse_fragment("Constraints:\n  x > 1;\n");
    assert_eq!(ids(&r), [15]);
    assert_eq!(r.spec.unwrap().constraints.len(), 1);
}

#[test]
fn misplaced_items_are_kept() {
    let src = "Declarations\n  d: Happens(e) -> O(a, b, true, Happens(f));\n  x: Number;\nObligations\n  amount: Number;\n  p: P(a, b, true, Terminated(self));\n";
    let r = parse_fragment(src);
    assert!(r.diagnostics.is_empty(), "{:?}", r.diagnostics);
    let spec = r.spec.unwrap();
    assert_eq!(spec.declarations.len(), 1);
    let blocks: Vec<Block> = spec.misplaced.iter().map(|m| m.block).collect();
    assert_eq!(blocks, [Block::Declarations, Block::Obligations, Block::Obligations]);
    assert!(matches!(spec.misplaced[1].item, MisplacedItem::Attribute(_)));
    assert!(matches!(&spec.misplaced[2].item, MisplacedItem::Norm(n) if n.kind == NormKind::Power));
}

#[test]
fn env_attribute_in_norm_block_is_misplaced() {
    let r = parse_fragment("Obligations\n  Env amount: Number;\n");
    let spec = r.spec.unwrap();
    assert!(matches!(&spec.misplaced[0].item, MisplacedItem::Attribute(a) if a.is_env && a.name == "amount"));
}

#[test]
fn arithmetic_precedence() {
    let r = parse_fragment("Constraints\n  a + b * c - d > (a - b) / 2;\n");
    let spec = r.spec.unwrap();
    assert_eq!(spec.constraints[0].to_string(), "a + b * c - d > (a - b) / 2");
    let SituationKind::Compare { left, .. } = &spec.constraints[0].kind else { panic!() };
    assert!(matches!(&left.kind, ValueKind::Binary { op: ArithOp::Sub, .. }));
}

#[test]
fn parenthesised_values_and_situations() {
    let r = parse_fragment(
        "Constraints\n  (x + 1) * 2 == y;\n  (Happens(a) or Happens(b)) and c < d;\n  not(not(x == 1));\n",
    );
    assert!(r.diagnostics.is_empty(), "{:?}", r.diagnostics);
    let spec = r.spec.unwrap();
    assert!(matches!(spec.constraints[1].kind, SituationKind::And(_)));
    assert!(matches!(spec.constraints[2].kind, SituationKind::Not(_)));
}

#[test]
fn value_where_situation_expected() {
    let r = parse_fragment("Preconditions\n  amount;\n");
    assert_eq!(ids(&r), [15]);
    assert_eq!(r.diagnostics[0].section, Section::Precondition);
}

#[test]
fn deep_nesting_is_bounded() {
    let depth = 200;
    let src =
        format!("Constraints\n  {}x == 1{};\nPostconditions\n  Happens(e);\n", "(".repeat(depth), ")".repeat(depth));
    let r = parse_fragment(&src);
    assert!(r.diagnostics.iter().any(|d| d.message.contains("nesting")));
    assert_eq!(r.spec.unwrap().postconditions.len(), 1);

    let ok = format!("Constraints\n  {}x == 1{};\n", "(".repeat(30), ")".repeat(30));
    assert!(parse_fragment(&ok).diagnostics.is_empty());
}

#[test]
fn lex_errors_become_syntax_diagnostics_in_their_section() {
    let r = parse_fragment("Declarations\n  x: Number;\nConstraints\n  x > 1 # 2;\n");
    assert!(r.diagnostics.iter().all(|d| d.taxonomy == ErrorType::IncorrectSyntax));
    assert!(r.diagnostics.iter().any(|d| d.section == Section::Constraints));
}

#[test]
fn missing_end_domain() {
    let r = parse(
        "Domain d\n  A isA Role;\nContract C (a: A)\n  Obligations\n    o: O(a, a, true, Happens(a));\nendContract\n",
    );
    assert_eq!(ids(&r), [15]);
    assert_eq!(r.diagnostics[0].section, Section::Domain);
    assert!(r.spec.is_some());
}

#[test]
fn repeated_sections_are_merged_and_reported() {
    let r = parse_fragment("Constraints\n  x > 1;\nConstraints\n  x < 5;\n");
    assert_eq!(ids(&r), [9]);
    assert_eq!(r.diagnostics[0].section, Section::Contract);
    assert_eq!(r.spec.unwrap().constraints.len(), 2);
}

#[test]
fn repeated_domain_is_grammar_inconsistency() {
    let src = format!("{SALE}\nDomain other\n  X isA Role;\nendDomain\n");
    let r = parse(&src);
    assert_eq!(ids(&r), [9]);
    assert_eq!(r.spec.unwrap().domain.concepts.len(), 8);
}

#[test]
fn enumeration_with_attributes_is_rejected() {
    let r = parse_fragment("Domain d\n  Color isAn Enumeration(Red) with x: Number;\nendDomain\n");
    assert_eq!(ids(&r), [15]);
}

#[test]
fn concept_colon_and_bare_attributes() {
    let r = parse_fragment(
        "Domain d\n  Paid: isAn Event with Env amount: Number;\n  Seller isA Role name: String;\nendDomain\n",
    );
    assert!(r.diagnostics.is_empty(), "{:?}", r.diagnostics);
    let d = r.spec.unwrap().domain;
    assert!(d.concepts[0].attributes[0].is_env);
    assert_eq!(d.concepts[1].attributes[0].name, "name");
}

#[test]
fn parent_cycles_terminate() {
    let r = parse_fragment("Domain d\n  A isA B;\n  B isA A;\nendDomain\n");
    assert!(r.diagnostics.is_empty());
    assert!(r.spec.unwrap().domain.concepts.iter().all(|c| c.kind == ConceptKind::Asset));
}

#[test]
fn garbage_never_panics_and_always_progresses() {
    for src in [
        "(((",
        ")))",
        "Obligations ;;; : : ->",
        "Domain",
        "Contract",
        "Contract X (",
        "a b c d",
        "\"unterminated",
        "endContract endContract",
    ] {
        let r = parse(src);
        assert!(r.spec.is_none() || !r.diagnostics.is_empty() || src.is_empty());
        assert!(!r.diagnostics.is_empty(), "{src}");
    }
}

#[test]
fn missing_end_contract() {
    let r = parse("Domain d\n  A isA Role;\nendDomain\nContract C (a: A)\n  Obligations\n");
    assert_eq!(r.diagnostics.iter().map(|d| d.taxonomy.id()).collect::<Vec<_>>(), [15]);
    assert_eq!(r.diagnostics[0].section, Section::Contract);
    assert!(r.spec.is_some());
}
