use super::*;
use crate::parser::{parse, parse_fragment};

macro_rules! corpus {
    ($name:literal) => {
        include_str!(concat!(env!("CARGO_MANIFEST_DIR"), "/../../corpus/", $name))
    };
}

fn full(src: &str) -> ContractSpec {
    let r = parse(src);
    assert!(r.diagnostics.is_empty(), "parse diagnostics: {:#?}", r.diagnostics);
    r.spec.unwrap()
}

fn fragment(src: &str) -> ContractSpec {
    let r = parse_fragment(src);
    assert!(r.diagnostics.is_empty(), "parse diagnostics: {:#?}", r.diagnostics);
    r.spec.unwrap()
}

fn lint_fragment(src: &str) -> Vec<Diagnostic> {
    lint_with(&fragment(src), LintOptions { fragment: true })
}

fn ids(ds: &[Diagnostic]) -> Vec<u8> {
    ds.iter().map(|d| d.taxonomy.id()).collect()
}

#[test]
fn symbol_table_of_basic_listing() {
    let spec = full(corpus!("listing-basic.symboleo"));
    let (t, dups) = build_symbols(&spec);
    assert!(dups.is_empty());
    assert_eq!(t.concepts.keys().copied().collect::<Vec<_>>(), ["Deliv", "Seller"]);
    assert_eq!(t.declarations.keys().copied().collect::<Vec<_>>(), ["b"]);
    assert_eq!(t.norms.keys().copied().collect::<Vec<_>>(), ["delivery", "suspendDelivery"]);
}

#[test]
fn empty_spec_has_empty_table() {
    let spec = ContractSpec::default();
    let (t, dups) = build_symbols(&spec);
    assert!(dups.is_empty() && t.concepts.is_empty() && t.norms.is_empty());
    assert!(lint(&spec).is_empty());
}

#[test]
fn duplicate_norm_names() {
    let spec = full(corpus!("duplicate-norm.symboleo"));
    let (_, dups) = build_symbols(&spec);
    assert_eq!(dups.len(), 1);
    assert_eq!(dups[0].taxonomy, ErrorType::GrammarInconsistency);
    assert_eq!(dups[0].section, Section::ObligationsPowers);
    assert_eq!(ids(&lint(&spec)), [9]);
}

#[test]
fn incorrect_power_consequent() {
    let spec = fragment(corpus!("power-incorrect.symboleo"));
    let (t, _) = build_symbols(&spec);
    let ds = check_power_consequents(&spec, &t);
    assert_eq!(ds.len(), 1);
    assert_eq!(ds[0].weight, 3);
    assert_eq!(ds[0].span, spec.powers[0].consequent.span.get());

    let all = lint_fragment(corpus!("power-incorrect.symboleo"));
    assert_eq!(all, ds);
    assert_eq!(all[0].section, Section::ObligationsPowers);
}

#[test]
fn corrected_power_consequent() {
    assert!(lint_fragment(corpus!("power-corrected.symboleo")).is_empty());
}

#[test]
fn degenerate_power_consequent() {
    let ds = lint_fragment("Powers\n  p: P(a, b, true, true);\n");
    assert_eq!(ids(&ds), [9]);
}

#[test]
fn power_on_contract_and_conjunction() {
    let ds = lint_fragment("Powers\n  p: P(a, b, true, Terminated(self) and Suspended(obligations.x));\n");
    assert!(ds.is_empty(), "{ds:?}");
    let ds = lint_fragment("Powers\n  p: P(a, b, true, Terminated(other));\n");
    assert_eq!(ids(&ds), [9]);
}

#[test]
fn env_pair() {
    let bad = lint(&full(corpus!("env-incorrect.symboleo")));
    assert_eq!(ids(&bad), [10]);
    assert_eq!(bad[0].section, Section::Domain);
    let good = lint(&full(corpus!("env-corrected.symboleo")));
    assert!(good.is_empty(), "{good:?}");
}

#[test]
fn env_on_role() {
    let ds = lint(&full(corpus!("env-on-role.symboleo")));
    assert_eq!(ids(&ds), [10]);
    assert_eq!(ds[0].section, Section::Domain);
    assert!(ds[0].message.contains("Landlord"));
}

#[test]
fn combined_defects_are_the_union() {
    let ds = lint(&full(corpus!("combined.symboleo")));
    assert_eq!(ids(&ds), [10, 9]);
    assert_eq!(ds[0].section, Section::Domain);
    assert_eq!(ds[1].section, Section::ObligationsPowers);
    // Deterministic.
    assert_eq!(ds, lint(&full(corpus!("combined.symboleo"))));
}

#[test]
fn string_used_in_arithmetic() {
    let ds = lint(&full(corpus!("datatype.symboleo")));
    assert_eq!(ids(&ds), [8]);
    assert_eq!(ds[0].section, Section::ObligationsPowers);
}

#[test]
fn initializer_in_signature() {
    let ds = lint(&full(corpus!("signature-init.symboleo")));
    assert_eq!(ids(&ds), [7]);
    assert_eq!(ds[0].section, Section::Signature);
}

#[test]
fn end_markers_are_syntax_only() {
    let r = parse(corpus!("end-markers.symboleo"));
    assert_eq!(r.diagnostics.iter().map(|d| d.taxonomy.id()).collect::<Vec<_>>(), [15, 15]);
    let ds = lint(&r.spec.unwrap());
    assert!(ds.is_empty(), "{ds:?}");
}

#[test]
fn exact_type_match_in_initializer() {
    let src = "Domain d\n  Buyer isA Role with buyername: String;\nendDomain\nContract C (name: String)\n  Declarations\n    b: Buyer with buyername := name;\nendContract\n";
    assert!(lint(&full(src)).is_empty());
}

#[test]
fn initializer_type_mismatch_and_unknown_attribute() {
    let src = "Domain d\n  Buyer isA Role with buyername: String;\nendDomain\nContract C (n: Number)\n  Declarations\n    b: Buyer with buyername := n, age := 3;\nendContract\n";
    let ds = lint(&full(src));
    assert_eq!(ids(&ds), [8, 7]);
    assert!(ds.iter().all(|d| d.section == Section::Declarations));
}

#[test]
fn references_and_arity() {
    let base = "Domain d\n  A isA Role;\n  E isAn Event;\nendDomain\nContract C (a: A, e: E)\n  Obligations\n    payment: O(a, a, true, Happens(e));\n  Powers\n";
    let ok = format!("{base}    p: Happens(Violated(obligations.payment)) -> P(a, a, true, Suspended(obligations.payment));\nendContract\n");
    assert!(lint(&full(&ok)).is_empty());

    let missing = format!("{base}    p: Happens(Violated(obligations.nothing)) -> P(a, a, true, Suspended(obligations.payment));\nendContract\n");
    let ds = lint(&full(&missing));
    assert_eq!(ids(&ds), [9]);
    assert!(ds[0].message.contains("nothing"));

    let arity =
        format!("{base}    p: HappensWithin(e) -> P(a, a, true, Suspended(obligations.payment));\nendContract\n");
    let ds = lint(&full(&arity));
    assert_eq!(ids(&ds), [15]);
}

#[test]
fn unresolved_types() {
    let src =
        "Domain d\n  A isA Role with x: Money;\n  B isA Missing;\nendDomain\nContract C (a: A, z: Zed)\nendContract\n";
    let ds = lint(&full(src));
    assert_eq!(ids(&ds), [9, 9, 9]);
    let sections: Vec<Section> = ds.iter().map(|d| d.section).collect();
    assert_eq!(sections, [Section::Domain, Section::Domain, Section::Signature]);
}

#[test]
fn event_arguments_must_be_events() {
    let src = "Domain d\n  A isA Role;\nendDomain\nContract C (a: A, deposit: Number)\n  Obligations\n    o: O(a, a, true, Happens(deposit));\nendContract\n";
    assert_eq!(ids(&lint(&full(src))), [8]);
}

#[test]
fn misplaced_items() {
    let src = "Domain d\n  A isA Role;\n  E isAn Event;\nendDomain\nContract C (a: A, e: E)\n  Declarations\n    d: O(a, a, true, Happens(e));\n  Obligations\n    amount: Number;\nendContract\n";
    let ds = lint(&full(src));
    assert_eq!(ids(&ds), [7, 7]);
    assert_eq!(ds[0].section, Section::Declarations);
    assert_eq!(ds[1].section, Section::ObligationsPowers);
}

#[test]
fn one_finding_per_span_highest_weight_wins() {
    let span = SourceSpan::new(1, 1, 1, 5);
    let a = Diagnostic::auto(ErrorType::IncorrectSyntax, Section::Domain, span, "a");
    let b = Diagnostic::auto(ErrorType::StructureRoles, Section::Domain, span, "b");
    let c = Diagnostic::auto(ErrorType::GrammarInconsistency, Section::Domain, span, "c");
    let d = Diagnostic::auto(ErrorType::IncorrectDataType, Section::Domain, span, "d");
    assert_eq!(finish(vec![a.clone(), b.clone(), a.clone()]), [b]);
    assert_eq!(finish(vec![c, d.clone()]), [d]);
}

#[test]
fn env_snippet_pair() {
    let bad = lint_fragment(corpus!("env-snippet-incorrect.symboleo"));
    assert_eq!(ids(&bad), [10, 10, 10, 10]);
    assert!(bad.iter().all(|d| d.section == Section::Declarations));
    assert!(lint_fragment(corpus!("env-snippet-corrected.symboleo")).is_empty());
}

#[test]
fn scenario_specs_are_clean() {
    for src in [
        include_str!("../../../../assets/scenarios/A/spec.symboleo"),
        include_str!("../../../../assets/scenarios/B/spec.symboleo"),
        include_str!("../../../../assets/scenarios/C/spec.symboleo"),
    ] {
        let ds = lint(&full(src));
        assert!(ds.is_empty(), "{ds:#?}");
    }
}
