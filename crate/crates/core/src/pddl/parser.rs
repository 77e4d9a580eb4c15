use std::collections::{BTreeMap, HashSet};

use super::ast::*;
use super::lexer::{read, Position, SExpr};
use super::PddlError;

pub const SUPPORTED_REQUIREMENTS: &[&str] =
    &[":strips", ":typing", ":negative-preconditions", ":equality"];

const UNSUPPORTED_CONNECTIVES: &[&str] = &["or", "imply", "exists", "forall", "when"];

fn expect_list<'a>(e: &'a SExpr, what: &str) -> Result<&'a [SExpr], PddlError> {
    e.as_list()
        .ok_or_else(|| PddlError::syntax(e.position(), what, &e.describe()))
}

fn expect_symbol<'a>(e: &'a SExpr, what: &str) -> Result<&'a str, PddlError> {
    e.as_symbol()
        .ok_or_else(|| PddlError::syntax(e.position(), what, &e.describe()))
}

fn expect_keyword(e: Option<&SExpr>, keyword: &str, after: Position) -> Result<(), PddlError> {
    match e {
        Some(SExpr::Symbol(s, _)) if s == keyword => Ok(()),
        Some(other) => Err(PddlError::syntax(other.position(), &format!("`{keyword}`"), &other.describe())),
        None => Err(PddlError::syntax(after, &format!("`{keyword}`"), "`)`")),
    }
}

/// Parses `(define (<kind> <name>) ...)` and returns the name and sections.
fn parse_header<'a>(root: &'a SExpr, kind: &str) -> Result<(String, &'a [SExpr]), PddlError> {
    let items = expect_list(root, "`(define ...)`")?;
    expect_keyword(items.first(), "define", root.position())?;
    let header = items
        .get(1)
        .ok_or_else(|| PddlError::syntax(root.position(), &format!("`({kind} <name>)`"), "`)`"))?;
    let header_items = expect_list(header, &format!("`({kind} <name>)`"))?;
    expect_keyword(header_items.first(), kind, header.position())?;
    let name = header_items
        .get(1)
        .ok_or_else(|| PddlError::syntax(header.position(), "a name", "`)`"))
        .and_then(|e| expect_symbol(e, "a name"))?;
    if header_items.len() > 2 {
        return Err(PddlError::syntax(header_items[2].position(), "`)`", &header_items[2].describe()));
    }
    Ok((name.to_string(), &items[2..]))
}

fn section_head(e: &SExpr) -> Result<(&str, &[SExpr]), PddlError> {
    let items = expect_list(e, "a `(:section ...)`")?;
    let head = items
        .first()
        .ok_or_else(|| PddlError::syntax(e.position(), "a section keyword", "`()`"))?;
    let head = expect_symbol(head, "a section keyword")?;
    Ok((head, &items[1..]))
}

/// Parses `a b - t c` into typed names; untyped names default to `object`.
fn parse_typed_list(items: &[SExpr], variables: bool) -> Result<Vec<TypedName>, PddlError> {
    let mut out = Vec::new();
    let mut pending: Vec<String> = Vec::new();
    let mut i = 0;
    while i < items.len() {
        let sym = expect_symbol(&items[i], "a name")?;
        if sym == "-" {
            let type_expr = items
                .get(i + 1)
                .ok_or_else(|| PddlError::syntax(items[i].position(), "a type name", "`)`"))?;
            if let Some(list) = type_expr.as_list() {
                if list.first().and_then(SExpr::as_symbol) == Some("either") {
                    return Err(PddlError::unsupported("either types", type_expr.position()));
                }
            }
            let type_name = expect_symbol(type_expr, "a type name")?;
            if pending.is_empty() {
                return Err(PddlError::syntax(items[i].position(), "a name before `-`", "`-`"));
            }
            for name in pending.drain(..) {
                out.push(TypedName { name, type_name: type_name.to_string() });
            }
            i += 2;
            continue;
        }
        if variables && !sym.starts_with('?') {
            return Err(PddlError::syntax(items[i].position(), "a `?variable`", &items[i].describe()));
        }
        if !variables && sym.starts_with('?') {
            return Err(PddlError::syntax(items[i].position(), "a name", &items[i].describe()));
        }
        pending.push(sym.to_string());
        i += 1;
    }
    for name in pending {
        out.push(TypedName { name, type_name: ROOT_TYPE.to_string() });
    }
    Ok(out)
}

fn parse_atom(items: &[SExpr], at: Position) -> Result<Atom, PddlError> {
    let head = items
        .first()
        .ok_or_else(|| PddlError::syntax(at, "a predicate name", "`()`"))?;
    let predicate = expect_symbol(head, "a predicate name")?;
    let args = items[1..]
        .iter()
        .map(|a| expect_symbol(a, "a term").map(str::to_string))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Atom::new(predicate, args))
}

fn parse_requirements(items: &[SExpr]) -> Result<Vec<String>, PddlError> {
    let mut out = Vec::new();
    for item in items {
        let r = expect_symbol(item, "a requirement flag")?;
        if !SUPPORTED_REQUIREMENTS.contains(&r) {
            return Err(PddlError::UnsupportedRequirement(r.to_string()));
        }
        out.push(r.to_string());
    }
    Ok(out)
}

fn parse_precondition(e: &SExpr, out: &mut Vec<Condition>) -> Result<(), PddlError> {
    let items = expect_list(e, "a precondition")?;
    let Some(head) = items.first() else {
        return Ok(());
    };
    let head = expect_symbol(head, "a predicate or connective")?;
    match head {
        "and" => {
            for sub in &items[1..] {
                parse_precondition(sub, out)?;
            }
        }
        "not" => {
            if items.len() != 2 {
                return Err(PddlError::syntax(e.position(), "exactly one argument to `not`", "more"));
            }
            let inner = expect_list(&items[1], "an atom")?;
            match inner.first().and_then(SExpr::as_symbol) {
                Some("=") => {
                    let (x, y) = parse_equality(inner, items[1].position())?;
                    out.push(Condition::NotEq(x, y));
                }
                Some(h) if UNSUPPORTED_CONNECTIVES.contains(&h) || h == "and" || h == "not" => {
                    return Err(PddlError::unsupported(&format!("negated `{h}`"), items[1].position()));
                }
                _ => out.push(Condition::Neg(parse_atom(inner, items[1].position())?)),
            }
        }
        "=" => {
            let (x, y) = parse_equality(items, e.position())?;
            out.push(Condition::Eq(x, y));
        }
        h if UNSUPPORTED_CONNECTIVES.contains(&h) => {
            return Err(PddlError::unsupported(&format!("`{h}` conditions"), e.position()));
        }
        _ => out.push(Condition::Pos(parse_atom(items, e.position())?)),
    }
    Ok(())
}

fn parse_equality(items: &[SExpr], at: Position) -> Result<(String, String), PddlError> {
    if items.len() != 3 {
        return Err(PddlError::syntax(at, "`(= ?x ?y)`", "wrong argument count"));
    }
    Ok((
        expect_symbol(&items[1], "a term")?.to_string(),
        expect_symbol(&items[2], "a term")?.to_string(),
    ))
}

fn parse_effect(e: &SExpr, add: &mut Vec<Atom>, del: &mut Vec<Atom>) -> Result<(), PddlError> {
    let items = expect_list(e, "an effect")?;
    let Some(head) = items.first() else {
        return Ok(());
    };
    let head = expect_symbol(head, "a predicate or `and`")?;
    match head {
        "and" => {
            for sub in &items[1..] {
                parse_effect(sub, add, del)?;
            }
        }
        "not" => {
            if items.len() != 2 {
                return Err(PddlError::syntax(e.position(), "exactly one argument to `not`", "more"));
            }
            let inner = expect_list(&items[1], "an atom")?;
            if inner.first().and_then(SExpr::as_symbol) == Some("=") {
                return Err(PddlError::UnsupportedEquality("equality in an effect".into()));
            }
            del.push(parse_atom(inner, items[1].position())?);
        }
        "=" => return Err(PddlError::UnsupportedEquality("equality in an effect".into())),
        "forall" | "when" | "increase" | "decrease" | "assign" => {
            return Err(PddlError::unsupported(&format!("`{head}` effects"), e.position()));
        }
        _ => add.push(parse_atom(items, e.position())?),
    }
    Ok(())
}

fn parse_action(items: &[SExpr], at: Position) -> Result<ActionSchema, PddlError> {
    let name = items
        .first()
        .ok_or_else(|| PddlError::syntax(at, "an action name", "`)`"))
        .and_then(|e| expect_symbol(e, "an action name"))?
        .to_string();
    let mut parameters = Vec::new();
    let mut precondition = Vec::new();
    let (mut add, mut del) = (Vec::new(), Vec::new());
    let mut i = 1;
    while i < items.len() {
        let key = expect_symbol(&items[i], "an action keyword")?;
        let value = items
            .get(i + 1)
            .ok_or_else(|| PddlError::syntax(items[i].position(), "a value", "`)`"))?;
        match key {
            ":parameters" => parameters = parse_typed_list(expect_list(value, "a parameter list")?, true)?,
            ":precondition" => parse_precondition(value, &mut precondition)?,
            ":effect" => parse_effect(value, &mut add, &mut del)?,
            _ => {
                return Err(PddlError::syntax(
                    items[i].position(),
                    "`:parameters`, `:precondition` or `:effect`",
                    &items[i].describe(),
                ))
            }
        }
        i += 2;
    }
    Ok(ActionSchema { name, parameters, precondition, add, del })
}

fn parse_types(items: &[SExpr], types: &mut Vec<TypeDecl>) -> Result<(), PddlError> {
    let decls = parse_typed_list(items, false)?;
    for decl in decls {
        if decl.name == ROOT_TYPE {
            continue;
        }
        if let Some(existing) = types.iter().find(|t| t.name == decl.name) {
            if existing.parent != decl.type_name {
                return Err(PddlError::MultipleParents(decl.name));
            }
            continue;
        }
        types.push(TypeDecl { name: decl.name, parent: decl.type_name });
    }
    Ok(())
}

pub fn parse_domain(text: &str) -> Result<DomainAst, PddlError> {
    let root = read(text)?;
    let (name, sections) = parse_header(&root, "domain")?;
    let mut domain = DomainAst {
        name,
        requirements: Vec::new(),
        types: Vec::new(),
        predicates: Vec::new(),
        actions: Vec::new(),
        complements: BTreeMap::new(),
    };
    for section in sections {
        let (head, rest) = section_head(section)?;
        match head {
            ":requirements" => domain.requirements.extend(parse_requirements(rest)?),
            ":types" => parse_types(rest, &mut domain.types)?,
            ":predicates" => {
                for p in rest {
                    let items = expect_list(p, "a predicate declaration")?;
                    let name = items
                        .first()
                        .ok_or_else(|| PddlError::syntax(p.position(), "a predicate name", "`()`"))
                        .and_then(|e| expect_symbol(e, "a predicate name"))?;
                    if domain.predicate(name).is_some() {
                        return Err(PddlError::DuplicatePredicate(name.to_string()));
                    }
                    let parameters = parse_typed_list(&items[1..], true)?;
                    domain.predicates.push(PredicateDecl { name: name.to_string(), parameters });
                }
            }
            ":action" => domain.actions.push(parse_action(rest, section.position())?),
            ":constants" | ":functions" | ":derived" | ":durative-action" => {
                return Err(PddlError::unsupported(&format!("`{head}` sections"), section.position()));
            }
            _ => {
                return Err(PddlError::syntax(section.position(), "a domain section", &format!("`{head}`")));
            }
        }
    }
    // Parents referenced but never declared become children of `object`.
    let implicit: Vec<String> = domain
        .types
        .iter()
        .map(|t| t.parent.clone())
        .filter(|p| p != ROOT_TYPE)
        .collect();
    for parent in implicit {
        if !domain.has_type(&parent) {
            domain.types.push(TypeDecl { name: parent, parent: ROOT_TYPE.to_string() });
        }
    }
    validate_domain(&domain)?;
    Ok(domain)
}

fn validate_domain(domain: &DomainAst) -> Result<(), PddlError> {
    for t in &domain.types {
        let mut seen = HashSet::new();
        let mut current = t.name.as_str();
        while let Some(parent) = domain.parent_of(current) {
            if !seen.insert(current) {
                return Err(PddlError::CyclicTypes(t.name.clone()));
            }
            current = parent;
        }
    }
    for p in &domain.predicates {
        for param in &p.parameters {
            if !domain.has_type(&param.type_name) {
                return Err(PddlError::UnknownType(param.type_name.clone()));
            }
        }
    }
    let mut action_names = HashSet::new();
    for a in &domain.actions {
        if !action_names.insert(&a.name) {
            return Err(PddlError::DuplicateName(a.name.clone()));
        }
        let mut params = HashSet::new();
        for param in &a.parameters {
            if !domain.has_type(&param.type_name) {
                return Err(PddlError::UnknownType(param.type_name.clone()));
            }
            if !params.insert(param.name.as_str()) {
                return Err(PddlError::DuplicateName(param.name.clone()));
            }
        }
        let check_atom = |atom: &Atom| -> Result<(), PddlError> {
            let decl = domain
                .predicate(&atom.predicate)
                .ok_or_else(|| PddlError::UnknownPredicate(atom.predicate.clone()))?;
            if decl.parameters.len() != atom.args.len() {
                return Err(PddlError::ArityMismatch {
                    atom: atom.to_string(),
                    expected: decl.parameters.len(),
                    found: atom.args.len(),
                });
            }
            for arg in &atom.args {
                if !params.contains(arg.as_str()) {
                    return Err(PddlError::UnknownVariable { variable: arg.clone(), action: a.name.clone() });
                }
            }
            Ok(())
        };
        for c in &a.precondition {
            match c {
                Condition::Pos(atom) | Condition::Neg(atom) => check_atom(atom)?,
                Condition::Eq(x, y) | Condition::NotEq(x, y) => {
                    for v in [x, y] {
                        if !params.contains(v.as_str()) {
                            return Err(PddlError::UnsupportedEquality(format!(
                                "`{v}` in action `{}` is not a parameter",
                                a.name
                            )));
                        }
                    }
                }
            }
        }
        for atom in a.add.iter().chain(&a.del) {
            check_atom(atom)?;
        }
    }
    Ok(())
}

pub fn parse_task(text: &str, domain: &DomainAst) -> Result<TaskAst, PddlError> {
    let root = read(text)?;
    let (name, sections) = parse_header(&root, "problem")?;
    let mut domain_name = None;
    let mut objects = Vec::new();
    let mut init = Vec::new();
    let mut goal = Vec::new();
    for section in sections {
        let (head, rest) = section_head(section)?;
        match head {
            ":domain" => {
                let d = rest
                    .first()
                    .ok_or_else(|| PddlError::syntax(section.position(), "a domain name", "`)`"))
                    .and_then(|e| expect_symbol(e, "a domain name"))?;
                domain_name = Some(d.to_string());
            }
            ":requirements" => {
                parse_requirements(rest)?;
            }
            ":objects" => objects.extend(parse_typed_list(rest, false)?),
            ":init" => {
                for item in rest {
                    let items = expect_list(item, "a ground atom")?;
                    if let Some(h @ ("not" | "=" | "and")) = items.first().and_then(SExpr::as_symbol) {
                        return Err(PddlError::unsupported(&format!("`{h}` in the initial state"), item.position()));
                    }
                    let atom = parse_atom(items, item.position())?;
                    if !init.contains(&atom) {
                        init.push(atom);
                    }
                }
            }
            ":goal" => {
                let mut conds = Vec::new();
                let g = rest
                    .first()
                    .ok_or_else(|| PddlError::syntax(section.position(), "a goal formula", "`)`"))?;
                parse_precondition(g, &mut conds)?;
                for c in conds {
                    match c {
                        Condition::Pos(atom) => {
                            if !goal.contains(&atom) {
                                goal.push(atom);
                            }
                        }
                        Condition::Neg(_) => return Err(PddlError::unsupported("negative goals", g.position())),
                        Condition::Eq(..) | Condition::NotEq(..) => {
                            return Err(PddlError::UnsupportedEquality("equality in the goal".into()))
                        }
                    }
                }
            }
            ":metric" | ":constraints" => {
                return Err(PddlError::unsupported(&format!("`{head}` sections"), section.position()));
            }
            _ => {
                return Err(PddlError::syntax(section.position(), "a problem section", &format!("`{head}`")));
            }
        }
    }
    let domain_name =
        domain_name.ok_or_else(|| PddlError::syntax(root.position(), "a `(:domain ...)` section", "none"))?;
    if domain_name != domain.name {
        return Err(PddlError::DomainMismatch { expected: domain.name.clone(), found: domain_name });
    }
    let task = TaskAst { name, domain_name, objects, init, goal };
    validate_task(&task, domain)?;
    Ok(task)
}

fn validate_task(task: &TaskAst, domain: &DomainAst) -> Result<(), PddlError> {
    let mut names = HashSet::new();
    for o in &task.objects {
        if !domain.has_type(&o.type_name) {
            return Err(PddlError::UnknownType(o.type_name.clone()));
        }
        if !names.insert(o.name.as_str()) {
            return Err(PddlError::DuplicateName(o.name.clone()));
        }
    }
    for atom in task.init.iter().chain(&task.goal) {
        let decl = domain
            .predicate(&atom.predicate)
            .ok_or_else(|| PddlError::UnknownPredicate(atom.predicate.clone()))?;
        if decl.parameters.len() != atom.args.len() {
            return Err(PddlError::ArityMismatch {
                atom: atom.to_string(),
                expected: decl.parameters.len(),
                found: atom.args.len(),
            });
        }
        for arg in &atom.args {
            if !names.contains(arg.as_str()) {
                return Err(PddlError::UnknownObjectType(arg.clone()));
            }
        }
    }
    Ok(())
}
