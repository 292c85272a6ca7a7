use std::fmt::Write;

use super::{CondDecl, Item, ProblemDocument};
use crate::model::ActivatorMode;

fn quote(s: &str) -> String {
    let mut out = String::from("\"");
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

/// Canonical text form: one declaration per line, a blank line before
/// each comment block.
pub fn serialize(doc: &ProblemDocument) -> String {
    let mut out = String::new();
    let mut items = doc.items.iter().peekable();
    while let Some(Item::Comment(c)) = items.peek() {
        writeln!(out, "# {c}").unwrap();
        items.next();
    }
    writeln!(out, "problem {}", quote(&doc.name)).unwrap();
    let mut prev_comment = false;
    for item in items {
        match item {
            Item::Comment(c) => {
                if !prev_comment {
                    out.push('\n');
                }
                writeln!(out, "# {c}").unwrap();
            }
            Item::Var(v) => {
                write!(out, "var {} {{ {} }}", v.name, v.domain.join(" ")).unwrap();
                if v.initial {
                    out.push_str(" initial");
                }
                out.push('\n');
            }
            Item::Base(b) => {
                writeln!(out, "base {}: {} {} {}", b.name, b.var, b.relation.symbol(), b.value)
                    .unwrap();
            }
            Item::Meta(m) => {
                write!(out, "{} {}", m.keyword.as_str(), m.name).unwrap();
                if let Some((min, max)) = m.bounds {
                    write!(out, " min {min} max {max}").unwrap();
                }
                writeln!(out, " children [{}]", m.children.join(" ")).unwrap();
            }
            Item::Activator(a) => {
                let cond = match &a.condition {
                    CondDecl::Satisfied(c) => format!("satisfied {c}"),
                    CondDecl::VariableActive(v) => format!("variable-active {v}"),
                };
                let mode = match a.mode {
                    ActivatorMode::Activate => "activate",
                    ActivatorMode::RequireInactive => "require-inactive",
                };
                writeln!(out, "activator {} when {cond} {mode} [{}]", a.name, a.targets.join(" "))
                    .unwrap();
            }
            Item::Active(ids) => writeln!(out, "active [{}]", ids.join(" ")).unwrap(),
        }
        prev_comment = matches!(item, Item::Comment(_));
    }
    out
}
