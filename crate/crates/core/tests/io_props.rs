mod common;

use std::collections::BTreeMap;

use common::{gen, oracle};
use dmc_core::io::{fixtures, load_network, parse, serialize, Item, LoadError, ProblemDocument};
use dmc_core::{ActivatorMode, Condition, Network, SatisfactionValue};
use proptest::prelude::*;

fn with_comments(mut doc: ProblemDocument, at: &[usize], name: String) -> ProblemDocument {
    for (k, &i) in at.iter().enumerate() {
        let i = i % (doc.items.len() + 1);
        doc.items.insert(i, Item::Comment(format!("note {k}")));
    }
    doc.name = name;
    doc
}

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::with_cases(300) })]

    #[test]
    fn serialize_then_parse_is_identity(
        seed in any::<u64>(),
        at in prop::collection::vec(any::<usize>(), 0..4),
        name in "[ -~]{0,12}",
    ) {
        let doc = with_comments(ProblemDocument::from_network(&gen::general(seed)), &at, name);
        let text = serialize(&doc);
        let back = parse(&text).map_err(|e| TestCaseError::fail(format!("{e}\n{text}")))?;
        prop_assert_eq!(&back, &doc);
        prop_assert_eq!(serialize(&back), text);
    }

    #[test]
    fn documents_lower_back_to_their_network(seed in any::<u64>()) {
        let net = gen::general(seed);
        let back = ProblemDocument::from_network(&net).to_network().unwrap();
        prop_assert_eq!(back, net);
    }

    #[test]
    fn parser_never_panics(text in "[a-z\"{}\\[\\]:=!# \n0-9-]{0,80}") {
        let _ = parse(&text);
        let _ = parse(&format!("problem \"p\"\n{text}"));
    }
}

#[test]
fn committed_fixtures_match_their_builders() {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures");
    for (file, doc) in [
        ("car.dmc", fixtures::build_car_fixture()),
        ("car-strict.dmc", fixtures::build_car_strict_fixture()),
        ("mackworth.dmc", fixtures::build_mackworth_fixture()),
    ] {
        let text = std::fs::read_to_string(format!("{dir}/{file}")).unwrap();
        assert_eq!(serialize(&doc), text, "{file} differs from its builder");
        assert_eq!(parse(&text).unwrap(), doc);
        assert!(load_network(&text).is_ok());
    }
}

#[test]
fn fixture_lookup_names() {
    for name in ["car", "car-strict", "mackworth"] {
        assert!(fixtures::fixture_by_name(name).is_some());
    }
    assert!(fixtures::fixture_by_name("nope").is_none());
}

#[test]
fn car_variables_follow_the_table() {
    let net = fixtures::build_car_fixture().to_network().unwrap();
    let table: Vec<(&str, &[&str], bool)> = vec![
        ("package", &["luxury", "deluxe", "standard"], true),
        ("frame", &["convertible", "sedan", "hatchback"], true),
        ("engine", &["small", "med", "large"], true),
        ("battery", &["small", "med", "large"], false),
        ("sunroof", &["sr1", "sr2"], false),
        ("airconditioner", &["ac1", "ac2"], false),
        ("glass", &["tinted", "non-tinted"], false),
        ("opener", &["auto", "manual"], false),
    ];
    assert_eq!(net.variables.len(), table.len());
    for (v, (name, domain, initial)) in net.variables.iter().zip(table) {
        assert_eq!(v.name, name);
        assert_eq!(v.domain, domain);
        assert_eq!(v.initial, initial);
    }
}

/// Every assignment of the named variables, as a full assignment vector.
fn assignments(net: &Network, vars: &[&str]) -> Vec<Vec<Option<usize>>> {
    let ids: Vec<usize> = vars.iter().map(|v| net.variable_by_name(v).unwrap().0).collect();
    let mut out = vec![vec![None; net.variables.len()]];
    for &i in &ids {
        out = out
            .into_iter()
            .flat_map(|a| {
                (0..net.variables[i].domain.len()).map(move |x| {
                    let mut a = a.clone();
                    a[i] = Some(x);
                    a
                })
            })
            .collect();
    }
    out
}

type Rule = fn(&dyn Fn(&str) -> String) -> bool;
type RuleCase = (&'static str, Vec<&'static str>, Option<(&'static str, &'static str)>, Rule);

/// Each compatibility rule's meta is Satisfied exactly when the implication
/// holds, where the left-hand conjuncts not in the meta are carried by the
/// activator that switches the meta on.
#[test]
fn compatibility_lowering_is_sound() {
    let net = fixtures::build_car_strict_fixture().to_network().unwrap();
    let all = vec![true; net.constraints.len()];
    let rules: Vec<RuleCase> = vec![
        ("compat13", vec!["package", "airconditioner"], None, |v| !(v("package") == "standard") || v("airconditioner") != "ac2"),
        ("compat14", vec!["package", "airconditioner"], None, |v| !(v("package") == "luxury") || v("airconditioner") != "ac1"),
        ("compat15", vec!["package", "frame"], None, |v| !(v("package") == "standard") || v("frame") != "convertible"),
        (
            "compat16",
            vec!["opener", "airconditioner", "battery"],
            Some(("opener", "auto")),
            |v| !(v("opener") == "auto" && v("airconditioner") == "ac1") || v("battery") == "med",
        ),
        (
            "compat17",
            vec!["opener", "airconditioner", "battery"],
            Some(("opener", "auto")),
            |v| !(v("opener") == "auto" && v("airconditioner") == "ac2") || v("battery") == "large",
        ),
        (
            "compat18",
            vec!["sunroof", "airconditioner", "glass"],
            Some(("sunroof", "sr1")),
            |v| !(v("sunroof") == "sr1" && v("airconditioner") == "ac2") || v("glass") != "tinted",
        ),
    ];
    for (meta, scope, guard, rule) in rules {
        let c = net.constraint_by_name(meta).unwrap();
        if let Some((gv, gx)) = guard {
            assert!(guard_switches_on(&net, c, gv, gx), "{meta} is not gated by {gv} = {gx}");
        }
        let mut seen = BTreeMap::new();
        for a in assignments(&net, &scope) {
            let name = |v: &str| {
                let id = net.variable_by_name(v).unwrap();
                net.variable(id).domain[a[id.0].unwrap()].clone()
            };
            let guard_on = guard.is_none_or(|(gv, gx)| name(gv) == gx);
            let value = oracle::value_of(&net, &all, &a, c);
            let lowered = !guard_on || value == SatisfactionValue::Satisfied;
            assert_eq!(lowered, rule(&name), "{meta} under {a:?}");
            *seen.entry(lowered).or_insert(0) += 1;
        }
        assert_eq!(seen.len(), 2, "{meta} should both hold and fail somewhere");
    }
}

/// True if the constraint or one of its ancestors is switched on only by
/// an activator watching `var = value`.
fn guard_switches_on(net: &Network, c: dmc_core::ConstraintId, var: &str, value: &str) -> bool {
    let mut node = Some(c);
    while let Some(n) = node {
        let hit = net.activators.iter().any(|a| {
            a.mode == ActivatorMode::Activate
                && a.targets.contains(&n)
                && matches!(a.condition, Condition::ConstraintSatisfied(w)
                    if net.describe_base(w).as_deref() == Some(&format!("{var} = {value}")))
        });
        if hit {
            return true;
        }
        node = net.parent(n);
    }
    false
}

#[test]
fn semantic_errors_are_collected() {
    let text = "problem \"d\"\nvar x { a b }\nvar x { a }\nbase b1: y = a\nbase b2: x = q\ntop t children [b1 b2 gone]\nactive [t]\n";
    match load_network(text) {
        Err(LoadError::Semantic(errs)) => assert!(errs.len() >= 4, "{errs:?}"),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn syntax_errors_report_line_and_column() {
    let e = parse("problem \"p\"\nvar x { a b }\nbase b1 x = a\n").unwrap_err();
    assert_eq!(e.line, 3);
    assert_eq!(e.column, 9);
    assert!(matches!(load_network("problem \"p\"\nbase b1: x ~ a\n"), Err(LoadError::Syntax(_))));
}
