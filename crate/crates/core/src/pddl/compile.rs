//! Elimination of negative preconditions.
//!
//! Every predicate `p` that occurs negated in a precondition gets a
//! complement `not-p` with the same parameters. Negated occurrences become
//! positive `not-p` atoms, effects keep `p` and `not-p` complementary, and the
//! initial state is extended so that exactly one of the two holds for every
//! type-consistent grounding.

use std::collections::{BTreeMap, BTreeSet};

use super::ast::*;
use super::ground::objects_of_type;

fn complement_name(domain: &DomainAst, predicate: &str) -> String {
    let mut name = format!("not-{predicate}");
    while domain.predicate(&name).is_some() {
        name.insert_str(0, "x");
    }
    name
}

pub fn compile_negative_preconditions(domain: &DomainAst, task: &TaskAst) -> (DomainAst, TaskAst) {
    let negated: BTreeSet<String> = domain
        .actions
        .iter()
        .flat_map(|a| a.precondition.iter())
        .filter_map(|c| match c {
            Condition::Neg(atom) => Some(atom.predicate.clone()),
            _ => None,
        })
        .collect();
    if negated.is_empty() {
        return (domain.clone(), task.clone());
    }

    let mut out = domain.clone();
    out.requirements.retain(|r| r != ":negative-preconditions");
    let mut complement_of: BTreeMap<String, String> = BTreeMap::new();
    for p in &negated {
        let name = complement_name(&out, p);
        let decl = domain.predicate(p).expect("validated domain").clone();
        out.predicates.push(PredicateDecl { name: name.clone(), parameters: decl.parameters });
        out.complements.insert(name.clone(), p.clone());
        complement_of.insert(p.clone(), name);
    }

    for action in &mut out.actions {
        for cond in &mut action.precondition {
            if let Condition::Neg(atom) = cond {
                let twin = Atom::new(complement_of[&atom.predicate].clone(), atom.args.clone());
                *cond = Condition::Pos(twin);
            }
        }
        let mut extra_add = Vec::new();
        let mut extra_del = Vec::new();
        for atom in &action.add {
            if let Some(twin) = complement_of.get(&atom.predicate) {
                extra_del.push(Atom::new(twin.clone(), atom.args.clone()));
            }
        }
        for atom in &action.del {
            if let Some(twin) = complement_of.get(&atom.predicate) {
                extra_add.push(Atom::new(twin.clone(), atom.args.clone()));
            }
        }
        action.add.extend(extra_add);
        action.del.extend(extra_del);
    }

    let mut out_task = task.clone();
    for (p, twin) in &complement_of {
        let decl = domain.predicate(p).expect("validated domain");
        let domains: Vec<Vec<&str>> = decl
            .parameters
            .iter()
            .map(|param| objects_of_type(domain, task, &param.type_name))
            .collect();
        for_each_tuple(&domains, &mut |args| {
            let args: Vec<String> = args.iter().map(|s| s.to_string()).collect();
            let positive = Atom::new(p.clone(), args.clone());
            if !task.init.contains(&positive) {
                out_task.init.push(Atom::new(twin.clone(), args));
            }
        });
    }
    (out, out_task)
}

/// Calls `f` with every tuple of the cartesian product, in lexicographic order.
pub(crate) fn for_each_tuple<'a>(domains: &[Vec<&'a str>], f: &mut dyn FnMut(&[&'a str])) {
    if domains.iter().any(Vec::is_empty) {
        return;
    }
    let mut idx = vec![0usize; domains.len()];
    let mut tuple: Vec<&str> = domains.iter().map(|d| d[0]).collect();
    loop {
        f(&tuple);
        let mut k = domains.len();
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < domains[k].len() {
                tuple[k] = domains[k][idx[k]];
                break;
            }
            idx[k] = 0;
            tuple[k] = domains[k][0];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pddl::{parse_domain, parse_task};

    const DOMAIN: &str = "(define (domain d) (:requirements :strips :typing :negative-preconditions)
        (:types loc)
        (:predicates (occupied ?l - loc) (here ?l - loc))
        (:action enter :parameters (?l - loc)
          :precondition (and (here ?l) (not (occupied ?l)))
          :effect (occupied ?l))
        (:action leave :parameters (?l - loc)
          :precondition (occupied ?l)
          :effect (not (occupied ?l))))";
    const TASK: &str = "(define (problem p) (:domain d) (:objects a b c - loc)
        (:init (here a) (occupied b)) (:goal (occupied a)))";

    #[test]
    fn init_grows_by_unoccupied_count() {
        let d = parse_domain(DOMAIN).unwrap();
        let t = parse_task(TASK, &d).unwrap();
        let (cd, ct) = compile_negative_preconditions(&d, &t);
        assert!(!cd.has_negative_preconditions());
        assert_eq!(ct.init.len(), t.init.len() + (3 - 1));
        assert!(ct.init.contains(&Atom::new("not-occupied", vec!["a".into()])));
        assert!(!ct.init.contains(&Atom::new("not-occupied", vec!["b".into()])));
        let enter = &cd.actions[0];
        assert!(enter.precondition.contains(&Condition::Pos(Atom::new("not-occupied", vec!["?l".into()]))));
        assert!(enter.del.contains(&Atom::new("not-occupied", vec!["?l".into()])));
        let leave = &cd.actions[1];
        assert!(leave.add.contains(&Atom::new("not-occupied", vec!["?l".into()])));
        assert_eq!(cd.complements.get("not-occupied").map(String::as_str), Some("occupied"));
    }

    #[test]
    fn identity_without_negation() {
        let d = parse_domain(
            "(define (domain d) (:predicates (p)) (:action a :parameters () :precondition (p) :effect (not (p))))",
        )
        .unwrap();
        let t = parse_task("(define (problem x) (:domain d) (:init (p)) (:goal (p)))", &d).unwrap();
        let (cd, ct) = compile_negative_preconditions(&d, &t);
        assert_eq!(cd, d);
        assert_eq!(ct, t);
    }

    #[test]
    fn tuples_are_lexicographic() {
        let mut seen = Vec::new();
        for_each_tuple(&[vec!["a", "b"], vec!["x", "y"]], &mut |t| seen.push(t.join("")));
        assert_eq!(seen, ["ax", "ay", "bx", "by"]);
        let mut count = 0;
        for_each_tuple(&[], &mut |_| count += 1);
        assert_eq!(count, 1);
    }
}
