//! Synthetic Java monolith with planted services: each service is a ring of
//! six classes calling their next two neighbours through fields and sharing a
//! service-specific vocabulary. One sparse call links consecutive services.
//! Two stand-alone utility classes share nothing with anything.

#![allow(dead_code)]

use std::fmt::Write as _;
use std::path::Path;

pub struct Service {
    pub package: &'static str,
    pub verb: &'static str,
    pub words: [&'static str; 3],
    pub classes: [&'static str; 6],
}

pub const SERVICES: [Service; 3] = [
    Service {
        package: "billing",
        verb: "settle",
        words: ["invoice", "tariff", "ledger"],
        classes: ["Invoice", "Tariff", "Ledger", "Receipt", "Charge", "Refund"],
    },
    Service {
        package: "catalog",
        verb: "browse",
        words: ["product", "category", "listing"],
        classes: [
            "Product", "Category", "Listing", "Brand", "Variant", "Showcase",
        ],
    },
    Service {
        package: "shipping",
        verb: "dispatch",
        words: ["parcel", "courier", "route"],
        classes: [
            "Parcel", "Courier", "Route", "Depot", "Manifest", "Tracking",
        ],
    },
];

pub const UTILITIES: [(&str, &str); 2] = [
    ("Horoscope", "astrology zodiac planet"),
    ("WeatherGlyph", "thunder drizzle barometer"),
];

fn lower_first(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(f) => f.to_lowercase().chain(c).collect(),
        None => String::new(),
    }
}

fn service_class(s: &Service, i: usize, cross: Option<(&str, &str, &str)>) -> String {
    let name = s.classes[i];
    let next: Vec<&str> = (1..=2).map(|d| s.classes[(i + d) % 6]).collect();
    let [w0, w1, w2] = s.words;
    let mut out = String::new();
    let _ = writeln!(out, "package shop.{};\n", s.package);
    if let Some((pkg, class, _)) = cross {
        let _ = writeln!(out, "import shop.{pkg}.{class};\n");
    }
    let _ = writeln!(
        out,
        "/** {name} keeps the {w0} {w1} {w2} state of the {} domain. */",
        s.package
    );
    let _ = writeln!(out, "public class {name} {{");
    for n in &next {
        let _ = writeln!(out, "    private {n} {};", lower_first(n));
    }
    if let Some((_, class, _)) = cross {
        let _ = writeln!(out, "    private {class} {};", lower_first(class));
    }
    let _ = writeln!(out, "    private int {w0}Count;\n");
    let _ = writeln!(out, "    // {w1} {w2} rules for {w0}");
    let _ = writeln!(
        out,
        "    public void {}{name}(String {w0}Code, int {w1}Total) {{",
        s.verb
    );
    let _ = writeln!(out, "        int {w2}Balance = {w1}Total + {w0}Count;");
    for n in &next {
        let _ = writeln!(
            out,
            "        {}.{}{n}({w0}Code, {w2}Balance);",
            lower_first(n),
            s.verb
        );
    }
    if let Some((_, class, method)) = cross {
        let _ = writeln!(
            out,
            "        {}.{method}({w0}Code, {w2}Balance);",
            lower_first(class)
        );
    }
    out.push_str("    }\n}\n");
    out
}

fn utility_class(name: &str, words: &str) -> String {
    let w: Vec<&str> = words.split(' ').collect();
    format!(
        "package shop.misc;\n\n/** {words} */\npublic class {name} {{\n    private int {};\n\n    public int {}(int {}) {{\n        return {} + {};\n    }}\n}}\n",
        w[0], w[1], w[2], w[2], w[0]
    )
}

/// Writes the sources under `root` and returns the ground-truth JSON. The
/// utility classes form their own service.
pub fn write_monolith(root: &Path) -> String {
    for (si, s) in SERVICES.iter().enumerate() {
        let dir = root.join("shop").join(s.package);
        std::fs::create_dir_all(&dir).unwrap();
        for i in 0..6 {
            // class 0 of each service calls class 3 of the next one
            let cross = (i == 0 && si + 1 < SERVICES.len()).then(|| {
                let t = &SERVICES[si + 1];
                let method = format!("{}{}", t.verb, t.classes[3]);
                (t.package, t.classes[3], method)
            });
            let src = service_class(s, i, cross.as_ref().map(|(p, c, m)| (*p, *c, m.as_str())));
            std::fs::write(dir.join(format!("{}.java", s.classes[i])), src).unwrap();
        }
    }
    let misc = root.join("shop").join("misc");
    std::fs::create_dir_all(&misc).unwrap();
    for (name, words) in UTILITIES {
        std::fs::write(
            misc.join(format!("{name}.java")),
            utility_class(name, words),
        )
        .unwrap();
    }
    truth_json()
}

pub fn truth_json() -> String {
    let mut services = serde_json::Map::new();
    for s in &SERVICES {
        let members: Vec<String> = s
            .classes
            .iter()
            .map(|c| format!("shop.{}.{c}", s.package))
            .collect();
        services.insert(s.package.to_string(), members.into());
    }
    let misc: Vec<String> = UTILITIES
        .iter()
        .map(|(n, _)| format!("shop.misc.{n}"))
        .collect();
    services.insert("misc".into(), misc.into());
    let mut text =
        serde_json::to_string_pretty(&serde_json::json!({ "services": services })).unwrap();
    text.push('\n');
    text
}
