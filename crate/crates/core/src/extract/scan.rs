use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use walkdir::WalkDir;

use super::java::{self, FileUnit, Receiver, Site, TypeUnit};
use super::{CallGraph, ClassRecord, ProjectFacts};
use crate::error::{Error, Result};

pub const JAVA_LIKE: &str = "java-like";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScanWarning {
    pub path: String,
    pub message: String,
}

impl std::fmt::Display for ScanWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

#[derive(Debug, Clone)]
pub struct Scan {
    pub facts: ProjectFacts,
    /// Files that could not be read or parsed, and duplicate declarations.
    /// None of these abort the scan.
    pub warnings: Vec<ScanWarning>,
}

/// Parses every `.java` file under `root` and builds the class-level call
/// graph.
///
/// An invocation site is attributed to the declared type of its receiver when
/// that is a field, parameter or local of a project type. Otherwise it goes to
/// the unique project class declaring a method of that name, and is dropped
/// when there is none or more than one. Receivers of a known non-project type
/// are external and dropped. Unqualified calls to a method the caller itself
/// declares are self-calls. `new T(..)` counts as a call to `T`.
pub fn scan_sources(root: &Path, profile: &str) -> Result<Scan> {
    if profile != JAVA_LIKE && profile != "java" {
        return Err(Error::UnsupportedProfile(profile.to_string()));
    }
    fs::read_dir(root).map_err(|e| Error::io(root, e))?;

    let mut paths = Vec::new();
    for entry in WalkDir::new(root).sort_by_file_name() {
        let entry = entry.map_err(|e| {
            let path = e.path().unwrap_or(root).to_path_buf();
            Error::io(path, e.into())
        })?;
        if entry.file_type().is_file() && entry.path().extension().is_some_and(|ext| ext == "java")
        {
            paths.push(entry.into_path());
        }
    }

    let parsed: Vec<(String, std::result::Result<FileUnit, String>)> = paths
        .par_iter()
        .map(|path| {
            let rel = relative(root, path);
            let unit = fs::read_to_string(path)
                .map_err(|e| format!("unreadable: {e}"))
                .and_then(|src| java::parse(&src).map_err(|e| format!("skipped, {e}")));
            (rel, unit)
        })
        .collect();

    let mut warnings = Vec::new();
    let mut units: BTreeMap<String, Located> = BTreeMap::new();
    for (path, result) in parsed {
        let file = match result {
            Ok(file) => file,
            Err(message) => {
                warnings.push(ScanWarning { path, message });
                continue;
            }
        };
        let FileUnit {
            package,
            imports,
            types,
        } = file;
        for ty in types {
            let qualified = qualify(package.as_deref(), &ty.name);
            if units.contains_key(&qualified) {
                warnings.push(ScanWarning {
                    path: path.clone(),
                    message: format!("duplicate declaration of `{qualified}` ignored"),
                });
                continue;
            }
            units.insert(
                qualified,
                Located {
                    path: path.clone(),
                    package: package.clone(),
                    imports: imports.clone(),
                    unit: ty,
                },
            );
        }
    }
    if units.is_empty() {
        return Err(Error::EmptyProject(root.to_path_buf()));
    }

    // BTreeMap iteration order is the id order
    let located: Vec<(&String, &Located)> = units.iter().collect();
    let index = ProjectIndex::new(&located);
    let mut graph = CallGraph::new(located.len());
    for (id, (_, loc)) in located.iter().enumerate() {
        for site in &loc.unit.sites {
            if let Some(target) = index.resolve_site(id, loc, site) {
                graph.add(id, target, 1);
            }
        }
    }

    let classes = located
        .iter()
        .enumerate()
        .map(|(id, (name, loc))| ClassRecord {
            id,
            qualified_name: (*name).clone(),
            source_path: loc.path.clone(),
            identifiers: loc.unit.identifiers.clone(),
            comments: loc.unit.comments.clone(),
        })
        .collect();
    Ok(Scan {
        facts: ProjectFacts::new(classes, graph)?,
        warnings,
    })
}

struct Located {
    path: String,
    package: Option<String>,
    imports: Vec<String>,
    unit: TypeUnit,
}

fn qualify(package: Option<&str>, name: &str) -> String {
    match package {
        Some(p) => format!("{p}.{name}"),
        None => name.to_string(),
    }
}

fn relative(root: &Path, path: &Path) -> String {
    let rel = path.strip_prefix(root).unwrap_or(path);
    rel.components()
        .map(|c| c.as_os_str().to_string_lossy())
        .collect::<Vec<_>>()
        .join("/")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum TypeRes {
    Project(usize),
    External,
}

struct ProjectIndex {
    /// Fully qualified names, nested types included, to top-level id.
    qualified: HashMap<String, usize>,
    /// Simple and `Outer.Inner` names to every id declaring them.
    simple: HashMap<String, BTreeSet<usize>>,
    methods: HashMap<String, BTreeSet<usize>>,
}

impl ProjectIndex {
    fn new(located: &[(&String, &Located)]) -> Self {
        let mut qualified = HashMap::new();
        let mut simple: HashMap<String, BTreeSet<usize>> = HashMap::new();
        let mut methods: HashMap<String, BTreeSet<usize>> = HashMap::new();
        for (id, (name, loc)) in located.iter().enumerate() {
            qualified.insert((*name).clone(), id);
            simple.entry(loc.unit.name.clone()).or_default().insert(id);
            for nested in &loc.unit.nested {
                qualified.insert(format!("{name}.{nested}"), id);
                let relative = format!("{}.{nested}", loc.unit.name);
                simple.entry(relative).or_default().insert(id);
                let last = nested.rsplit('.').next().unwrap_or(nested);
                simple.entry(last.to_string()).or_default().insert(id);
            }
            for m in &loc.unit.methods {
                methods.entry(m.clone()).or_default().insert(id);
            }
        }
        ProjectIndex {
            qualified,
            simple,
            methods,
        }
    }

    fn resolve_type(&self, owner: usize, loc: &Located, name: &str) -> TypeRes {
        if let Some(&id) = self.qualified.get(name) {
            return TypeRes::Project(id);
        }
        let head = name.split('.').next().unwrap_or(name);
        let tail = &name[head.len()..];

        // a type nested in the current class
        let nested_here = loc.unit.name == head
            || loc
                .unit
                .nested
                .iter()
                .any(|n| n.rsplit('.').next() == Some(head));
        let own_member = tail.is_empty()
            || self
                .simple
                .get(name)
                .is_some_and(|ids| ids.contains(&owner));
        if nested_here && own_member {
            return TypeRes::Project(owner);
        }
        // single-type import
        for import in &loc.imports {
            if import.rsplit('.').next() == Some(head) && !import.ends_with(".*") {
                let full = format!("{import}{tail}");
                return match self.qualified.get(&full) {
                    Some(&id) => TypeRes::Project(id),
                    None => TypeRes::External,
                };
            }
        }
        if let Some(&id) = self.qualified.get(&qualify(loc.package.as_deref(), name)) {
            return TypeRes::Project(id);
        }
        for import in &loc.imports {
            if let Some(prefix) = import.strip_suffix(".*") {
                if let Some(&id) = self.qualified.get(&format!("{prefix}.{name}")) {
                    return TypeRes::Project(id);
                }
            }
        }
        match self.simple.get(name) {
            Some(ids) if ids.len() == 1 => TypeRes::Project(*ids.iter().next().unwrap()),
            _ => TypeRes::External,
        }
    }

    fn unique_method(&self, method: &str) -> Option<usize> {
        match self.methods.get(method) {
            Some(ids) if ids.len() == 1 => ids.iter().next().copied(),
            _ => None,
        }
    }

    fn resolve_site(&self, owner: usize, loc: &Located, site: &Site) -> Option<usize> {
        let (receiver, method) = match site {
            Site::New(ty) => return self.project(owner, loc, ty),
            Site::Call { receiver, method } => (receiver, method.as_str()),
        };
        match receiver {
            Receiver::Implicit | Receiver::This => {
                if loc.unit.methods.contains(method) {
                    Some(owner)
                } else {
                    self.unique_method(method)
                }
            }
            Receiver::Typed(ty) => self.project(owner, loc, ty),
            Receiver::Name(chain) => {
                let dotted = chain.join(".");
                match self.resolve_type(owner, loc, &dotted) {
                    TypeRes::Project(id) => Some(id),
                    // an unknown capitalised name is a type outside the project
                    TypeRes::External
                        if chain
                            .last()
                            .and_then(|s| s.chars().next())
                            .is_some_and(char::is_uppercase) =>
                    {
                        None
                    }
                    TypeRes::External => self.unique_method(method),
                }
            }
            Receiver::Expr => self.unique_method(method),
        }
    }

    fn project(&self, owner: usize, loc: &Located, ty: &str) -> Option<usize> {
        match self.resolve_type(owner, loc, ty) {
            TypeRes::Project(id) => Some(id),
            TypeRes::External => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tree(files: &[(&str, &str)]) -> tempfile::TempDir {
        let dir = tempfile::tempdir().unwrap();
        for (path, src) in files {
            let full = dir.path().join(path);
            fs::create_dir_all(full.parent().unwrap()).unwrap();
            fs::write(full, src).unwrap();
        }
        dir
    }

    fn scan(files: &[(&str, &str)]) -> Scan {
        let dir = tree(files);
        scan_sources(dir.path(), JAVA_LIKE).unwrap()
    }

    #[test]
    fn field_typed_receiver_counts_each_site() {
        let s = scan(&[
            (
                "p/A.java",
                "package p; class A { B b; void m() { b.f(); b.f(); } }",
            ),
            ("p/B.java", "package p; class B { void f() {} }"),
        ]);
        let g = s.facts.call_graph();
        assert_eq!(s.facts.names(), vec!["p.A", "p.B"]);
        assert_eq!(g.calls(0, 1), 2);
        assert_eq!(g.calls(1, 0), 0);
    }

    #[test]
    fn single_class_without_calls() {
        let s = scan(&[("A.java", "class A { int x; }")]);
        assert_eq!(s.facts.call_graph().rows(), vec![vec![0]]);
    }

    #[test]
    fn ambiguous_unqualified_call_is_dropped() {
        let s = scan(&[
            ("A.java", "class A { void m(int x) { log(x); } }"),
            ("B.java", "class B { void log(int v) {} }"),
            ("C.java", "class C { void log(int v) {} }"),
        ]);
        assert_eq!(s.facts.call_graph().edges().count(), 0);
    }

    #[test]
    fn unique_name_rule_applies_to_unresolved_receivers() {
        let s = scan(&[
            (
                "A.java",
                "class A { void m() { log(1); factory().build(); } }",
            ),
            ("B.java", "class B { void log(int v) {} }"),
            ("C.java", "class C { void build() {} }"),
        ]);
        let g = s.facts.call_graph();
        assert_eq!(g.calls(0, 1), 1);
        assert_eq!(g.calls(0, 2), 1);
    }

    #[test]
    fn own_methods_are_self_calls_and_externals_are_ignored() {
        let s = scan(&[
            (
                "A.java",
                "import java.util.List; class A { List<B> items; String s; \
                 void log() {} void m() { log(); this.log(); items.add(null); s.log(); Math.max(1, 2); } }",
            ),
            ("B.java", "class B { void log() {} void add(B b) {} void max(int a, int b) {} }"),
        ]);
        let g = s.facts.call_graph();
        assert_eq!(g.calls(0, 0), 2);
        assert_eq!(g.calls(0, 1), 0);
    }

    #[test]
    fn constructors_and_static_calls() {
        let s = scan(&[
            ("a/A.java", "package a; import b.B; class A { void m() { new B(); B.util(); b.B.util(); new C().go(); } }"),
            ("a/C.java", "package a; class C { void go() {} }"),
            ("b/B.java", "package b; public class B { static void util() {} }"),
        ]);
        let names = s.facts.names();
        assert_eq!(names, vec!["a.A", "a.C", "b.B"]);
        let g = s.facts.call_graph();
        assert_eq!(g.calls(0, 2), 3);
        assert_eq!(g.calls(0, 1), 2);
    }

    #[test]
    fn nested_types_fold_into_top_level() {
        let s = scan(&[
            (
                "A.java",
                "class A { static class Inner { D d; void f() { d.g(); } } }",
            ),
            (
                "D.java",
                "class D { void g() {} A.Inner i; void h() { i.f(); new A.Inner(); } }",
            ),
        ]);
        assert_eq!(s.facts.len(), 2);
        let g = s.facts.call_graph();
        assert_eq!(g.calls(0, 1), 1);
        assert_eq!(g.calls(1, 0), 2);
        assert!(s.facts.classes()[0]
            .identifiers
            .contains(&"Inner".to_string()));
    }

    #[test]
    fn broken_file_is_skipped_with_warning() {
        let s = scan(&[
            ("A.java", "class A { void m() { "),
            ("B.java", "class B { }"),
            ("notes.txt", "class C { }"),
        ]);
        assert_eq!(s.facts.names(), vec!["B"]);
        assert_eq!(s.warnings.len(), 1);
        assert_eq!(s.warnings[0].path, "A.java");
    }

    #[test]
    fn empty_tree_and_bad_profile() {
        let dir = tree(&[]);
        assert!(matches!(
            scan_sources(dir.path(), JAVA_LIKE),
            Err(Error::EmptyProject(_))
        ));
        assert!(matches!(
            scan_sources(dir.path(), "cobol"),
            Err(Error::UnsupportedProfile(_))
        ));
        assert!(matches!(
            scan_sources(&dir.path().join("missing"), JAVA_LIKE),
            Err(Error::Io { .. })
        ));
    }

    #[test]
    fn scan_is_deterministic() {
        let files = [
            (
                "x/A.java",
                "package x; class A { B b; void m() { b.f(); helper(); } }",
            ),
            (
                "x/B.java",
                "package x; class B { void f() {} void helper() {} }",
            ),
        ];
        let dir = tree(&files);
        let a = scan_sources(dir.path(), JAVA_LIKE).unwrap();
        let b = scan_sources(dir.path(), JAVA_LIKE).unwrap();
        assert_eq!(a.facts, b.facts);
    }
}
