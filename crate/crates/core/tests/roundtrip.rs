//! parse(format(x)) == x for generated trees and for every shipped source.

#[path = "support/ast_strategies.rs"]
mod strategies;

use proptest::prelude::*;
use std::path::Path;
use strategies::{situation, spec};
use symboleo_core::ast::*;
use symboleo_core::harness::extract_code;
use symboleo_core::parser::{parse, parse_fragment};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn generated_specs_round_trip(spec in spec()) {
        let text = format(&spec);
        let back = parse(&text);
        prop_assert!(back.spec.is_some(), "no tree for:\n{}", text);
        prop_assert_eq!(back.spec.as_ref(), Some(&spec), "source:\n{}", text);
    }

    #[test]
    fn generated_situations_round_trip(s in situation()) {
        let text = format!("Constraints\n  {s};\n");
        let back = parse_fragment(&text);
        prop_assert!(back.diagnostics.is_empty(), "{:?}\n{}", back.diagnostics, text);
        prop_assert_eq!(&back.spec.unwrap().constraints, &vec![s]);
    }
}

fn root() -> &'static Path {
    Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/../.."))
}

fn sources() -> Vec<(String, String, bool)> {
    let mut out = Vec::new();
    let mut add_dir = |dir: &Path, fragment_names: &[&str]| {
        let mut entries: Vec<_> = std::fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
        entries.sort();
        for p in entries {
            if p.extension().is_some_and(|e| e == "symboleo") {
                let name = p.file_name().unwrap().to_string_lossy().to_string();
                let fragment = fragment_names.iter().any(|f| name.starts_with(f));
                out.push((p.display().to_string(), std::fs::read_to_string(&p).unwrap(), fragment));
            }
        }
    };
    add_dir(&root().join("corpus"), &["power-", "env-snippet-"]);
    for s in ["A", "B", "C"] {
        add_dir(&root().join("assets/scenarios").join(s), &[]);
    }
    let fixtures = root().join("fixtures");
    for endpoint in std::fs::read_dir(&fixtures).unwrap() {
        for f in std::fs::read_dir(endpoint.unwrap().path()).unwrap() {
            let p = f.unwrap().path();
            let raw = std::fs::read_to_string(&p).unwrap();
            out.push((p.display().to_string(), extract_code(&raw).unwrap(), false));
        }
    }
    out
}

#[test]
fn shipped_sources_round_trip() {
    let all = sources();
    assert!(all.len() >= 26, "{}", all.len());
    for (name, src, fragment) in all {
        let first = if fragment { parse_fragment(&src) } else { parse(&src) };
        let spec = first.spec.unwrap_or_else(|| panic!("{name}: no tree"));
        let text = format(&spec);
        let again = if fragment { parse_fragment(&text) } else { parse(&text) };
        assert!(again.diagnostics.is_empty(), "{name}: {:?}\n{text}", again.diagnostics);
        assert_eq!(again.spec.as_ref(), Some(&spec), "{name}");
        // Canonical output is a fixed point.
        assert_eq!(format(&again.spec.unwrap()), text, "{name}");
    }
}
