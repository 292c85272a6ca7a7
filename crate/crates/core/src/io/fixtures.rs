//! Bundled problems: the car configuration problem (two encodings) and the
//! classic four-variable inconsistent network.

use super::{ActivatorDecl, BaseDecl, CondDecl, Item, MetaDecl, MetaKeyword, ProblemDocument, VarDecl};
use crate::model::{ActivatorMode, Relation};

/// Checked-in text of [`build_car_fixture`].
pub const CAR_DMC: &str = include_str!("../../fixtures/car.dmc");
/// Checked-in text of [`build_car_strict_fixture`].
pub const CAR_STRICT_DMC: &str = include_str!("../../fixtures/car-strict.dmc");
/// Checked-in text of [`build_mackworth_fixture`].
pub const MACKWORTH_DMC: &str = include_str!("../../fixtures/mackworth.dmc");

struct Builder {
    doc: ProblemDocument,
}

impl Builder {
    fn new(name: &str) -> Self {
        Builder {
            doc: ProblemDocument {
                name: name.into(),
                items: Vec::new(),
            },
        }
    }

    fn comment(&mut self, text: &str) {
        self.doc.items.push(Item::Comment(text.into()));
    }

    fn var(&mut self, name: &str, domain: &[&str], initial: bool) {
        self.doc.items.push(Item::Var(VarDecl {
            name: name.into(),
            domain: domain.iter().map(|s| s.to_string()).collect(),
            initial,
        }));
    }

    fn base(&mut self, name: &str, var: &str, relation: Relation, value: &str) -> String {
        self.doc.items.push(Item::Base(BaseDecl {
            name: name.into(),
            var: var.into(),
            relation,
            value: value.into(),
        }));
        name.into()
    }

    fn meta(&mut self, keyword: MetaKeyword, name: &str, bounds: Option<(usize, usize)>, children: &[String]) -> String {
        self.doc.items.push(Item::Meta(MetaDecl {
            name: name.into(),
            keyword,
            bounds,
            children: children.to_vec(),
        }));
        name.into()
    }

    fn activator(&mut self, name: &str, condition: CondDecl, mode: ActivatorMode, targets: &[String]) {
        self.doc.items.push(Item::Activator(ActivatorDecl {
            name: name.into(),
            condition,
            mode,
            targets: targets.to_vec(),
        }));
    }

    fn active(&mut self, ids: Vec<String>) {
        self.doc.items.push(Item::Active(ids));
    }

    /// Names declared since item `from`, constraints only.
    fn constraints_since(&self, from: usize) -> Vec<String> {
        self.doc.items[from..]
            .iter()
            .filter_map(|i| match i {
                Item::Base(b) => Some(b.name.clone()),
                Item::Meta(m) => Some(m.name.clone()),
                _ => None,
            })
            .collect()
    }

    fn mark(&self) -> usize {
        self.doc.items.len()
    }
}

use Relation::{Equal as EQ, NotEqual as NE};

/// A disjunction of unary literals `(var, relation, value)`.
fn disjunction(b: &mut Builder, name: &str, literals: &[(&str, Relation, &str)]) -> String {
    let kids: Vec<String> = literals
        .iter()
        .enumerate()
        .map(|(i, (var, rel, val))| b.base(&format!("{name}_{}", i + 1), var, *rel, val))
        .collect();
    b.meta(MetaKeyword::Meta, name, Some((1, kids.len())), &kids)
}

/// A conjunction of unary literals.
fn conjunction(b: &mut Builder, name: &str, literals: &[(&str, Relation, &str)]) -> String {
    let kids: Vec<String> = literals
        .iter()
        .enumerate()
        .map(|(i, (var, rel, val))| b.base(&format!("{name}_{}", i + 1), var, *rel, val))
        .collect();
    b.meta(MetaKeyword::Meta, name, Some((kids.len(), kids.len())), &kids)
}

/// Exactly one value literal per domain value, `prefix_value` each.
fn exactly_one(b: &mut Builder, var: &str, prefix: &str, domain: &[&str]) -> String {
    let kids: Vec<String> = domain
        .iter()
        .map(|v| b.base(&format!("{prefix}_{v}"), var, EQ, v))
        .collect();
    b.meta(MetaKeyword::Meta, &format!("one_{var}"), Some((1, 1)), &kids)
}

/// Places a condition meta below a `min 0 max 1` holder so it is evaluated
/// without constraining anything.
fn free_holder(b: &mut Builder, name: &str, inner: String) -> String {
    b.meta(MetaKeyword::Meta, name, Some((0, 1)), &[inner])
}

const PACKAGE: [&str; 3] = ["luxury", "deluxe", "standard"];
const FRAME: [&str; 3] = ["convertible", "sedan", "hatchback"];
const ENGINE: [&str; 3] = ["small", "med", "large"];
const BATTERY: [&str; 3] = ["small", "med", "large"];
const SUNROOF: [&str; 2] = ["sr1", "sr2"];
const AIRCON: [&str; 2] = ["ac1", "ac2"];
const GLASS: [&str; 2] = ["tinted", "non-tinted"];
const OPENER: [&str; 2] = ["auto", "manual"];

fn car_variables(b: &mut Builder) {
    b.var("package", &PACKAGE, true);
    b.var("frame", &FRAME, true);
    b.var("engine", &ENGINE, true);
    b.var("battery", &BATTERY, false);
    b.var("sunroof", &SUNROOF, false);
    b.var("airconditioner", &AIRCON, false);
    b.var("glass", &GLASS, false);
    b.var("opener", &OPENER, false);
}

struct Sections {
    package: Vec<String>,
    frame: Vec<String>,
    engine: Vec<String>,
    battery: Vec<String>,
    sunroof: Vec<String>,
    airconditioner: Vec<String>,
    glass: Vec<String>,
    opener: Vec<String>,
}

impl Sections {
    fn roots(&self) -> Vec<String> {
        [
            &self.package,
            &self.frame,
            &self.engine,
            &self.battery,
            &self.sunroof,
            &self.airconditioner,
            &self.glass,
            &self.opener,
        ]
        .iter()
        .map(|s| s.last().cloned().expect("section root"))
        .collect()
    }
}

/// Emits one section: whatever `body` declares, then the exactly-one
/// meta, then `tail`, all under an AllReceiver. Returns the subtree with
/// the section root last.
fn section(
    b: &mut Builder,
    var: &str,
    prefix: &str,
    domain: &[&str],
    body: impl FnOnce(&mut Builder) -> Vec<String>,
    tail: impl FnOnce(&mut Builder) -> Vec<String>,
) -> Vec<String> {
    let from = b.mark();
    b.comment(&format!("{var} section"));
    let mut kids = body(b);
    kids.push(exactly_one(b, var, prefix, domain));
    kids.extend(tail(b));
    b.meta(MetaKeyword::AllReceiver, &format!("sec_{var}"), None, &kids);
    b.constraints_since(from)
}

fn plain(b: &mut Builder, var: &str, prefix: &str, domain: &[&str]) -> Vec<String> {
    section(b, var, prefix, domain, |_| vec![], |_| vec![])
}

fn car_finish(b: &mut Builder, s: &Sections) {
    b.comment("whole problem");
    b.meta(MetaKeyword::Top, "top", None, &s.roots());
}

fn car_initial(b: &mut Builder, s: &Sections) {
    let mut init = vec!["top".to_string()];
    for sec in [&s.package, &s.frame, &s.engine] {
        init.extend(sec.iter().cloned());
    }
    b.active(init);
}

fn sat(c: &str) -> CondDecl {
    CondDecl::Satisfied(c.into())
}

fn var_active(v: &str) -> CondDecl {
    CondDecl::VariableActive(v.into())
}

use ActivatorMode::{Activate as ACT, RequireInactive as NOT};

/// The shared activity rules 2 and 4 to 11. Rules 1 and 3 differ between
/// the two encodings and are emitted by the caller.
fn common_activity(b: &mut Builder, s: &Sections) {
    b.activator("rv2", sat("pkg_luxury"), ACT, &s.airconditioner);
    b.activator("rv4", sat("sunroof_sr2"), ACT, &s.opener);
    b.activator("rv5", sat("sunroof_sr1"), ACT, &s.airconditioner);
    b.activator("arv6", var_active("sunroof"), ACT, &s.glass);
    b.activator("arv7", var_active("engine"), ACT, &s.battery);
    b.activator("arv8", var_active("opener"), ACT, &s.sunroof);
    b.activator("arv9", var_active("glass"), ACT, &s.sunroof);
    b.activator("rn10", sat("sunroof_sr1"), NOT, &s.opener);
    b.activator("rn11", sat("frame_convertible"), NOT, &s.sunroof);
}

fn aircon_section(b: &mut Builder) -> Vec<String> {
    section(
        b,
        "airconditioner",
        "ac",
        &AIRCON,
        |b| {
            vec![
                disjunction(b, "compat14", &[("package", NE, "luxury"), ("airconditioner", NE, "ac1")]),
                disjunction(b, "compat13", &[("package", NE, "standard"), ("airconditioner", NE, "ac2")]),
            ]
        },
        |_| vec![],
    )
}

/// The car configuration problem encoded so that its solution counts are
/// the published ones: 288 in total, 153 with the deluxe package.
///
/// Two readings differ from a literal one. A convertible frame vetoes the
/// sunroof-requiring rules 1 and 3 instead of making them fail, and the
/// compatibility rules with two-literal premises (12, 16, 17, 18) are left
/// out. [`build_car_strict_fixture`] keeps every rule literally.
pub fn build_car_fixture() -> ProblemDocument {
    let mut b = Builder::new("car");
    b.comment("Car configuration with accessory packages.");
    b.comment("Counts: 288 solutions, 153 with package = deluxe.");
    b.comment("A convertible frame vetoes the sunroof-requiring rules 1 and 3.");
    b.comment("Rules 12, 16, 17 and 18 are not part of this encoding; see car-strict.dmc.");
    car_variables(&mut b);
    let package = plain(&mut b, "package", "pkg", &PACKAGE);
    let frame = section(
        &mut b,
        "frame",
        "frame",
        &FRAME,
        |b| vec![disjunction(b, "compat15", &[("package", NE, "standard"), ("frame", NE, "convertible")])],
        |b| {
            let c1 = conjunction(b, "cond1", &[("package", EQ, "luxury"), ("frame", NE, "convertible")]);
            let h1 = free_holder(b, "hold1", c1);
            let c3 = conjunction(b, "cond3", &[("package", EQ, "deluxe"), ("frame", NE, "convertible")]);
            let h3 = free_holder(b, "hold3", c3);
            vec![h1, h3]
        },
    );
    let engine = plain(&mut b, "engine", "engine", &ENGINE);
    let battery = plain(&mut b, "battery", "battery", &BATTERY);
    let sunroof = plain(&mut b, "sunroof", "sunroof", &SUNROOF);
    let airconditioner = aircon_section(&mut b);
    let glass = plain(&mut b, "glass", "glass", &GLASS);
    let opener = plain(&mut b, "opener", "opener", &OPENER);
    let s = Sections {
        package,
        frame,
        engine,
        battery,
        sunroof,
        airconditioner,
        glass,
        opener,
    };
    car_finish(&mut b, &s);
    b.comment("activity rules");
    b.activator("rv1", sat("cond1"), ACT, &s.sunroof);
    b.activator("rv3", sat("cond3"), ACT, &s.sunroof);
    common_activity(&mut b, &s);
    car_initial(&mut b, &s);
    b.doc
}

/// The car configuration problem with every activity and compatibility
/// rule read literally: a compatibility rule applies once all of its
/// variables are active, and a require-not rule forbids its target.
pub fn build_car_strict_fixture() -> ProblemDocument {
    let mut b = Builder::new("car-strict");
    b.comment("Car configuration, every rule read literally.");
    b.comment("Counts: 198 solutions, 120 with package = deluxe.");
    car_variables(&mut b);
    let package = plain(&mut b, "package", "pkg", &PACKAGE);
    let frame = section(
        &mut b,
        "frame",
        "frame",
        &FRAME,
        |b| vec![disjunction(b, "compat15", &[("package", NE, "standard"), ("frame", NE, "convertible")])],
        |_| vec![],
    );
    let engine = plain(&mut b, "engine", "engine", &ENGINE);
    let battery = section(
        &mut b,
        "battery",
        "battery",
        &BATTERY,
        |_| vec![],
        |b| {
            let c = conjunction(b, "cond12", &[("battery", EQ, "small"), ("engine", EQ, "small")]);
            vec![free_holder(b, "hold12", c)]
        },
    );
    let sunroof_from = b.mark();
    let mut sunroof = section(
        &mut b,
        "sunroof",
        "sunroof",
        &SUNROOF,
        |b| {
            vec![disjunction(b, "compat18", &[("airconditioner", NE, "ac2"), ("glass", NE, "tinted")])]
        },
        |_| vec![],
    );
    let compat18 = b.constraints_since(sunroof_from)[..3].to_vec();
    sunroof.retain(|c| !compat18.contains(c));
    let airconditioner = aircon_section(&mut b);
    let glass = plain(&mut b, "glass", "glass", &GLASS);
    let opener_from = b.mark();
    let mut opener = section(
        &mut b,
        "opener",
        "opener",
        &OPENER,
        |_| vec![],
        |b| {
            let d16 = disjunction(b, "compat16", &[("airconditioner", NE, "ac1"), ("battery", EQ, "med")]);
            let d17 = disjunction(b, "compat17", &[("airconditioner", NE, "ac2"), ("battery", EQ, "large")]);
            vec![b.meta(MetaKeyword::AllReceiver, "auto_rules", None, &[d16, d17])]
        },
    );
    let opener_all = b.constraints_since(opener_from);
    let auto_rules: Vec<String> = opener_all
        .iter()
        .filter(|c| c.starts_with("compat16") || c.starts_with("compat17") || *c == "auto_rules")
        .cloned()
        .collect();
    opener.retain(|c| !auto_rules.contains(c));
    let s = Sections {
        package,
        frame,
        engine,
        battery,
        sunroof,
        airconditioner,
        glass,
        opener,
    };
    car_finish(&mut b, &s);
    b.comment("activity rules");
    b.activator("rv1", sat("pkg_luxury"), ACT, &s.sunroof);
    b.activator("rv3", sat("pkg_deluxe"), ACT, &s.sunroof);
    common_activity(&mut b, &s);
    b.activator("rn12", sat("cond12"), NOT, &s.airconditioner);
    b.comment("compatibility rules whose variables join the problem later");
    b.activator("on16", sat("opener_auto"), ACT, &["auto_rules".to_string()]);
    let pick = |prefix: &str| -> Vec<String> {
        auto_rules
            .iter()
            .filter(|c| c.starts_with(prefix))
            .cloned()
            .collect()
    };
    b.activator("on16_ac", var_active("airconditioner"), ACT, &pick("compat16"));
    b.activator("on17_ac", var_active("airconditioner"), ACT, &pick("compat17"));
    b.activator("on18", sat("sunroof_sr1"), ACT, &compat18);
    car_initial(&mut b, &s);
    b.doc
}

/// The inconsistent four-variable network used to compare against
/// ordinary backtracking and arc consistency. Each binary relation is a
/// conjunction of support rows: for every value p of the first variable,
/// either x != p or y takes one of the values p allows.
pub fn build_mackworth_fixture() -> ProblemDocument {
    let mut b = Builder::new("mackworth");
    b.comment("Four variables, four binary relations, no solution.");
    b.comment("Variables are declared in the order ordinary backtracking visits them.");
    let vars: [(&str, &[&str]); 4] = [
        ("v2", &["a", "b", "c"]),
        ("v3", &["a", "b"]),
        ("v5", &["a", "b"]),
        ("v4", &["a", "b"]),
    ];
    for (v, dom) in vars {
        b.var(v, dom, true);
    }
    let domain = |v: &str| vars.iter().find(|d| d.0 == v).map_or(&[][..], |d| d.1);
    type Relation<'a> = (&'a str, &'a str, &'a str, &'a [(&'a str, &'a str)]);
    let relations: [Relation; 4] = [
        ("r23", "v2", "v3", &[("b", "a"), ("c", "a"), ("c", "b")]),
        ("r35", "v3", "v5", &[("a", "b")]),
        ("r34", "v3", "v4", &[("a", "b"), ("b", "a"), ("b", "b")]),
        ("r45", "v4", "v5", &[("a", "a"), ("a", "b"), ("b", "a")]),
    ];
    let mut roots = Vec::new();
    for (name, x, y, tuples) in relations {
        // One row per value p of x: x != p, or y takes a supported value.
        b.comment(&format!("{x} {y}"));
        let mut rows = Vec::new();
        for &p in domain(x) {
            let row = format!("{name}_{p}");
            let sup: Vec<&str> = tuples.iter().filter(|t| t.0 == p).map(|t| t.1).collect();
            if sup.len() == domain(y).len() {
                continue;
            }
            if sup.is_empty() {
                rows.push(b.base(&row, x, NE, p));
                continue;
            }
            let away = b.base(&format!("{row}_{x}"), x, NE, p);
            let lits: Vec<String> = sup
                .iter()
                .map(|q| b.base(&format!("{row}_{y}{q}"), y, EQ, q))
                .collect();
            let support = if lits.len() == 1 {
                lits.into_iter().next().unwrap()
            } else {
                let n = lits.len();
                b.meta(MetaKeyword::Meta, &format!("{row}_sup"), Some((1, n)), &lits)
            };
            rows.push(b.meta(MetaKeyword::Meta, &row, Some((1, 2)), &[away, support]));
        }
        let n = rows.len();
        roots.push(b.meta(MetaKeyword::Meta, name, Some((n, n)), &rows));
    }
    b.meta(MetaKeyword::Top, "top", None, &roots);
    let all: Vec<String> = b.constraints_since(0);
    b.active(all);
    b.doc
}

/// Fixture documents by CLI name.
pub fn fixture_by_name(name: &str) -> Option<ProblemDocument> {
    match name {
        "car" => Some(build_car_fixture()),
        "car-strict" => Some(build_car_strict_fixture()),
        "mackworth" => Some(build_mackworth_fixture()),
        _ => None,
    }
}
