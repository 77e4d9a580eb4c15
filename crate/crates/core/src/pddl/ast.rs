use std::collections::BTreeMap;
use std::fmt;

pub const ROOT_TYPE: &str = "object";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypedName {
    pub name: String,
    pub type_name: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeDecl {
    pub name: String,
    pub parent: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredicateDecl {
    pub name: String,
    pub parameters: Vec<TypedName>,
}

/// A predicate applied to arguments. In a domain the arguments are `?`
/// variables, in a task they are object names.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom {
    pub predicate: String,
    pub args: Vec<String>,
}

impl Atom {
    pub fn new(predicate: impl Into<String>, args: Vec<String>) -> Self {
        Atom { predicate: predicate.into(), args }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Condition {
    Pos(Atom),
    Neg(Atom),
    Eq(String, String),
    NotEq(String, String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionSchema {
    pub name: String,
    pub parameters: Vec<TypedName>,
    pub precondition: Vec<Condition>,
    pub add: Vec<Atom>,
    pub del: Vec<Atom>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DomainAst {
    pub name: String,
    pub requirements: Vec<String>,
    /// Declared types; `object` is implicit and never listed.
    pub types: Vec<TypeDecl>,
    pub predicates: Vec<PredicateDecl>,
    pub actions: Vec<ActionSchema>,
    /// Predicates introduced by negative-precondition compilation, mapping
    /// the complement predicate to the predicate it negates.
    pub complements: BTreeMap<String, String>,
}

impl DomainAst {
    pub fn predicate(&self, name: &str) -> Option<&PredicateDecl> {
        self.predicates.iter().find(|p| p.name == name)
    }

    pub fn has_type(&self, name: &str) -> bool {
        name == ROOT_TYPE || self.types.iter().any(|t| t.name == name)
    }

    pub fn parent_of(&self, name: &str) -> Option<&str> {
        self.types.iter().find(|t| t.name == name).map(|t| t.parent.as_str())
    }

    /// True if `sub` equals `sup` or inherits from it.
    pub fn is_subtype(&self, sub: &str, sup: &str) -> bool {
        let mut current = sub;
        // The hierarchy is validated acyclic at parse time; the bound guards
        // against hand-built ASTs.
        for _ in 0..=self.types.len() + 1 {
            if current == sup {
                return true;
            }
            match self.parent_of(current) {
                Some(parent) => current = parent,
                None => return sup == ROOT_TYPE,
            }
        }
        false
    }

    pub fn has_negative_preconditions(&self) -> bool {
        self.actions
            .iter()
            .any(|a| a.precondition.iter().any(|c| matches!(c, Condition::Neg(_))))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaskAst {
    pub name: String,
    pub domain_name: String,
    pub objects: Vec<TypedName>,
    pub init: Vec<Atom>,
    pub goal: Vec<Atom>,
}

impl TaskAst {
    pub fn object_type(&self, name: &str) -> Option<&str> {
        self.objects.iter().find(|o| o.name == name).map(|o| o.type_name.as_str())
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}", self.predicate)?;
        for a in &self.args {
            write!(f, " {a}")?;
        }
        write!(f, ")")
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Condition::Pos(a) => write!(f, "{a}"),
            Condition::Neg(a) => write!(f, "(not {a})"),
            Condition::Eq(x, y) => write!(f, "(= {x} {y})"),
            Condition::NotEq(x, y) => write!(f, "(not (= {x} {y}))"),
        }
    }
}

fn write_typed_list(f: &mut fmt::Formatter<'_>, items: &[TypedName]) -> fmt::Result {
    for (i, item) in items.iter().enumerate() {
        if i > 0 {
            write!(f, " ")?;
        }
        write!(f, "{} - {}", item.name, item.type_name)?;
    }
    Ok(())
}

fn write_conjunction<T: fmt::Display>(f: &mut fmt::Formatter<'_>, items: &[T]) -> fmt::Result {
    write!(f, "(and")?;
    for item in items {
        write!(f, " {item}")?;
    }
    write!(f, ")")
}

/// Canonical PDDL rendering; parsing the output yields an equal AST.
impl fmt::Display for DomainAst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "(define (domain {})", self.name)?;
        if !self.requirements.is_empty() {
            writeln!(f, "  (:requirements {})", self.requirements.join(" "))?;
        }
        if !self.types.is_empty() {
            write!(f, "  (:types")?;
            for t in &self.types {
                write!(f, " {} - {}", t.name, t.parent)?;
            }
            writeln!(f, ")")?;
        }
        write!(f, "  (:predicates")?;
        for p in &self.predicates {
            write!(f, "\n    ({}", p.name)?;
            if !p.parameters.is_empty() {
                write!(f, " ")?;
                write_typed_list(f, &p.parameters)?;
            }
            write!(f, ")")?;
        }
        writeln!(f, ")")?;
        for a in &self.actions {
            writeln!(f, "  (:action {}", a.name)?;
            write!(f, "    :parameters (")?;
            write_typed_list(f, &a.parameters)?;
            writeln!(f, ")")?;
            write!(f, "    :precondition ")?;
            write_conjunction(f, &a.precondition)?;
            write!(f, "\n    :effect (and")?;
            for atom in &a.add {
                write!(f, " {atom}")?;
            }
            for atom in &a.del {
                write!(f, " (not {atom})")?;
            }
            writeln!(f, "))")?;
        }
        writeln!(f, ")")
    }
}

impl fmt::Display for TaskAst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "(define (problem {})", self.name)?;
        writeln!(f, "  (:domain {})", self.domain_name)?;
        write!(f, "  (:objects ")?;
        write_typed_list(f, &self.objects)?;
        writeln!(f, ")")?;
        write!(f, "  (:init")?;
        for atom in &self.init {
            write!(f, "\n    {atom}")?;
        }
        writeln!(f, ")")?;
        write!(f, "  (:goal ")?;
        write_conjunction(f, &self.goal)?;
        writeln!(f, "))")
    }
}
