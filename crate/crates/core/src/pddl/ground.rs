use std::collections::{BTreeSet, HashMap, HashSet};

use super::ast::*;
use super::compile::for_each_tuple;
use super::PddlError;
use crate::state_space::State;

pub type FactId = usize;

/// A fully instantiated action with unit cost.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GroundAction {
    pub name: String,
    pub pre: Vec<FactId>,
    pub add: Vec<FactId>,
    pub del: Vec<FactId>,
}

impl GroundAction {
    pub fn cost(&self) -> u32 {
        1
    }

    /// Sorts and deduplicates the fact lists and removes from `del` every fact
    /// also in `add`, so that deletes-then-adds becomes order-free.
    fn normalize(&mut self) {
        for v in [&mut self.pre, &mut self.add, &mut self.del] {
            v.sort_unstable();
            v.dedup();
        }
        let add = &self.add;
        self.del.retain(|f| add.binary_search(f).is_err());
    }
}

/// A propositional planning task over dense fact ids `0..num_facts()`.
#[derive(Debug, Clone)]
pub struct GroundTask {
    name: String,
    fact_names: Vec<String>,
    fact_ids: HashMap<String, FactId>,
    actions: Vec<GroundAction>,
    initial: State,
    goal: Vec<FactId>,
}

impl GroundTask {
    /// Assembles a task from explicit parts, normalizing each action.
    pub fn from_parts(
        name: impl Into<String>,
        fact_names: Vec<String>,
        actions: Vec<GroundAction>,
        initial: &[FactId],
        goal: &[FactId],
    ) -> Result<Self, PddlError> {
        let n = fact_names.len();
        let check = |ids: &[FactId], what: &str| -> Result<(), PddlError> {
            match ids.iter().find(|&&f| f >= n) {
                Some(f) => Err(PddlError::InvalidFact(format!("{what} references fact {f} of {n}"))),
                None => Ok(()),
            }
        };
        check(initial, "initial state")?;
        check(goal, "goal")?;
        let mut seen = HashSet::new();
        let mut normalized = Vec::with_capacity(actions.len());
        for mut a in actions {
            check(&a.pre, &a.name)?;
            check(&a.add, &a.name)?;
            check(&a.del, &a.name)?;
            a.normalize();
            if seen.insert(a.clone()) {
                normalized.push(a);
            }
        }
        let fact_ids = fact_names.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
        let mut goal = goal.to_vec();
        goal.sort_unstable();
        goal.dedup();
        Ok(GroundTask {
            name: name.into(),
            initial: State::from_facts(n, initial.iter().copied()),
            fact_names,
            fact_ids,
            actions: normalized,
            goal,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn num_facts(&self) -> usize {
        self.fact_names.len()
    }

    pub fn fact_name(&self, id: FactId) -> &str {
        &self.fact_names[id]
    }

    pub fn fact_names(&self) -> &[String] {
        &self.fact_names
    }

    pub fn fact_id(&self, name: &str) -> Option<FactId> {
        self.fact_ids.get(name).copied()
    }

    pub fn actions(&self) -> &[GroundAction] {
        &self.actions
    }

    pub fn initial_state(&self) -> &State {
        &self.initial
    }

    pub fn goal(&self) -> &[FactId] {
        &self.goal
    }

    pub fn is_goal_state(&self, s: &State) -> bool {
        self.goal.iter().all(|&g| s.contains(g))
    }

    /// Builds a state from printable fact names, rejecting unknown facts.
    pub fn state_from_names<I, S>(&self, names: I) -> Result<State, PddlError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut ids = Vec::new();
        for n in names {
            let n = n.as_ref();
            ids.push(self.fact_id(n).ok_or_else(|| PddlError::InvalidFact(n.to_string()))?);
        }
        Ok(State::from_facts(self.num_facts(), ids))
    }

    /// Printable facts of `s`, sorted lexicographically.
    pub fn state_names(&self, s: &State) -> Vec<String> {
        let mut names: Vec<String> = s.iter().map(|f| self.fact_names[f].clone()).collect();
        names.sort();
        names
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct GroundOptions {
    /// Drop facts that are neither initially true nor added by any action,
    /// together with the actions that require them.
    pub prune_unreachable: bool,
}

/// Objects whose type is `type_name` or one of its subtypes, in declaration order.
pub fn objects_of_type<'a>(domain: &DomainAst, task: &'a TaskAst, type_name: &str) -> Vec<&'a str> {
    task.objects
        .iter()
        .filter(|o| domain.is_subtype(&o.type_name, type_name))
        .map(|o| o.name.as_str())
        .collect()
}

pub fn ground(domain: &DomainAst, task: &TaskAst) -> Result<GroundTask, PddlError> {
    ground_with(domain, task, GroundOptions::default())
}

struct RawAction {
    name: String,
    pre: Vec<Atom>,
    add: Vec<Atom>,
    del: Vec<Atom>,
}

fn instantiate(atom: &Atom, binding: &HashMap<&str, &str>) -> Atom {
    Atom::new(
        atom.predicate.clone(),
        atom.args.iter().map(|a| binding.get(a.as_str()).copied().unwrap_or(a).to_string()).collect(),
    )
}

/// Instantiates every schema with every type-consistent object tuple.
///
/// Actions come out in schema declaration order, then in lexicographic order
/// of the object tuple (objects ordered as declared in the task).
pub fn ground_with(domain: &DomainAst, task: &TaskAst, options: GroundOptions) -> Result<GroundTask, PddlError> {
    let mut raw = Vec::new();
    for schema in &domain.actions {
        if schema.precondition.iter().any(|c| matches!(c, Condition::Neg(_))) {
            return Err(PddlError::UncompiledNegation(schema.name.clone()));
        }
        let domains: Vec<Vec<&str>> = schema
            .parameters
            .iter()
            .map(|p| objects_of_type(domain, task, &p.type_name))
            .collect();
        for_each_tuple(&domains, &mut |tuple| {
            let binding: HashMap<&str, &str> = schema
                .parameters
                .iter()
                .map(|p| p.name.as_str())
                .zip(tuple.iter().copied())
                .collect();
            let value = |v: &str| binding.get(v).copied().unwrap_or(v).to_string();
            let mut pre = Vec::new();
            for c in &schema.precondition {
                match c {
                    Condition::Pos(atom) => pre.push(instantiate(atom, &binding)),
                    Condition::Eq(x, y) if value(x) != value(y) => return,
                    Condition::NotEq(x, y) if value(x) == value(y) => return,
                    _ => {}
                }
            }
            let mut name = format!("({}", schema.name);
            for o in tuple {
                name.push(' ');
                name.push_str(o);
            }
            name.push(')');
            raw.push(RawAction {
                name,
                pre,
                add: schema.add.iter().map(|a| instantiate(a, &binding)).collect(),
                del: schema.del.iter().map(|a| instantiate(a, &binding)).collect(),
            });
        });
    }

    if !domain.complements.is_empty() {
        derive_complement_effects(domain, &mut raw);
    }

    let init: BTreeSet<String> = task.init.iter().map(Atom::to_string).collect();
    let goal: Vec<String> = task.goal.iter().map(Atom::to_string).collect();
    let added: HashSet<String> = raw.iter().flat_map(|a| a.add.iter().map(Atom::to_string)).collect();
    for g in &goal {
        if !init.contains(g) && !added.contains(g) {
            return Err(PddlError::GoalUnreachableStatically(g.clone()));
        }
    }

    if options.prune_unreachable {
        let possible = |f: &String| init.contains(f) || added.contains(f);
        raw.retain(|a| a.pre.iter().all(|p| possible(&p.to_string())));
        for a in &mut raw {
            a.del.retain(|d| possible(&d.to_string()));
        }
    }

    let mut universe: BTreeSet<String> = init.clone();
    universe.extend(goal.iter().cloned());
    for a in &raw {
        for atom in a.pre.iter().chain(&a.add).chain(&a.del) {
            universe.insert(atom.to_string());
        }
    }
    let fact_names: Vec<String> = universe.into_iter().collect();
    let ids: HashMap<&str, FactId> = fact_names.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
    let to_ids = |atoms: &[Atom]| -> Vec<FactId> { atoms.iter().map(|a| ids[a.to_string().as_str()]).collect() };

    let actions: Vec<GroundAction> = raw
        .iter()
        .map(|a| GroundAction { name: a.name.clone(), pre: to_ids(&a.pre), add: to_ids(&a.add), del: to_ids(&a.del) })
        .collect();
    let initial: Vec<FactId> = init.iter().map(|f| ids[f.as_str()]).collect();
    let goal_ids: Vec<FactId> = goal.iter().map(|f| ids[f.as_str()]).collect();
    GroundTask::from_parts(task.name.clone(), fact_names, actions, &initial, &goal_ids)
}

/// Recomputes the effects on complement predicates from the net effect on the
/// predicates they negate: a net add of `p(x)` deletes `not-p(x)`, a net
/// delete adds it. This keeps the pair consistent even when a schema both
/// adds and deletes the same ground atom.
fn derive_complement_effects(domain: &DomainAst, raw: &mut [RawAction]) {
    let twin_of: HashMap<&str, &str> =
        domain.complements.iter().map(|(twin, p)| (p.as_str(), twin.as_str())).collect();
    for a in raw {
        a.add.retain(|x| !domain.complements.contains_key(&x.predicate));
        a.del.retain(|x| !domain.complements.contains_key(&x.predicate));
        let mut twin_add = Vec::new();
        let mut twin_del = Vec::new();
        for atom in &a.add {
            if let Some(twin) = twin_of.get(atom.predicate.as_str()) {
                twin_del.push(Atom::new(*twin, atom.args.clone()));
            }
        }
        for atom in &a.del {
            if a.add.contains(atom) {
                continue;
            }
            if let Some(twin) = twin_of.get(atom.predicate.as_str()) {
                twin_add.push(Atom::new(*twin, atom.args.clone()));
            }
        }
        a.add.extend(twin_add);
        a.del.extend(twin_del);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pddl::{parse_domain, parse_task};

    fn pair(domain: &str, task: &str) -> (DomainAst, TaskAst) {
        let d = parse_domain(domain).unwrap();
        let t = parse_task(task, &d).unwrap();
        (d, t)
    }

    #[test]
    fn two_params_over_three_objects() {
        let (d, t) = pair(
            "(define (domain d) (:types o) (:predicates (p ?x - o ?y - o))
              (:action a :parameters (?x - o ?y - o) :precondition (and) :effect (p ?x ?y)))",
            "(define (problem t) (:domain d) (:objects a b c - o) (:init) (:goal (and)))",
        );
        assert_eq!(ground(&d, &t).unwrap().actions().len(), 9);
    }

    #[test]
    fn inequality_drops_the_diagonal() {
        let (d, t) = pair(
            "(define (domain d) (:requirements :equality) (:types o) (:predicates (p ?x - o ?y - o))
              (:action a :parameters (?x - o ?y - o) :precondition (not (= ?x ?y)) :effect (p ?x ?y)))",
            "(define (problem t) (:domain d) (:objects a b c - o) (:init) (:goal (and)))",
        );
        let g = ground(&d, &t).unwrap();
        assert_eq!(g.actions().len(), 6);
        assert_eq!(g.actions()[0].name, "(a a b)");
    }

    #[test]
    fn equality_keeps_the_diagonal() {
        let (d, t) = pair(
            "(define (domain d) (:types o) (:predicates (p ?x - o))
              (:action a :parameters (?x - o ?y - o) :precondition (= ?x ?y) :effect (p ?x)))",
            "(define (problem t) (:domain d) (:objects a b c - o) (:init) (:goal (and)))",
        );
        assert_eq!(ground(&d, &t).unwrap().actions().len(), 3);
    }

    #[test]
    fn statically_unreachable_goal() {
        let (d, t) = pair(
            "(define (domain d) (:predicates (p) (q)) (:action a :parameters () :precondition (p) :effect (not (p))))",
            "(define (problem t) (:domain d) (:init (p)) (:goal (q)))",
        );
        assert_eq!(ground(&d, &t).unwrap_err(), PddlError::GoalUnreachableStatically("(q)".into()));
    }

    #[test]
    fn add_wins_over_delete() {
        let (d, t) = pair(
            "(define (domain d) (:types o) (:predicates (p ?x - o))
              (:action a :parameters (?x - o ?y - o) :precondition (and) :effect (and (p ?x) (not (p ?y)))))",
            "(define (problem t) (:domain d) (:objects a b - o) (:init) (:goal (and)))",
        );
        let g = ground(&d, &t).unwrap();
        let diag = g.actions().iter().find(|a| a.name == "(a a a)").unwrap();
        assert_eq!(diag.add.len(), 1);
        assert!(diag.del.is_empty());
        for a in g.actions() {
            assert!(a.add.iter().all(|f| !a.del.contains(f)));
        }
    }

    #[test]
    fn pruning_drops_impossible_facts() {
        let (d, t) = pair(
            "(define (domain d) (:predicates (p) (q) (r))
              (:action a :parameters () :precondition (q) :effect (r))
              (:action b :parameters () :precondition (p) :effect (r)))",
            "(define (problem t) (:domain d) (:init (p)) (:goal (r)))",
        );
        let full = ground(&d, &t).unwrap();
        assert_eq!((full.num_facts(), full.actions().len()), (3, 2));
        let pruned = ground_with(&d, &t, GroundOptions { prune_unreachable: true }).unwrap();
        assert_eq!((pruned.num_facts(), pruned.actions().len()), (2, 1));
        assert_eq!(pruned.actions()[0].name, "(b)");
    }

    #[test]
    fn negation_must_be_compiled_first() {
        let (d, t) = pair(
            "(define (domain d) (:predicates (p)) (:action a :parameters () :precondition (not (p)) :effect (p)))",
            "(define (problem t) (:domain d) (:init) (:goal (p)))",
        );
        assert!(matches!(ground(&d, &t), Err(PddlError::UncompiledNegation(_))));
    }

    #[test]
    fn from_parts_rejects_bad_ids() {
        let a = GroundAction { name: "(a)".into(), pre: vec![3], add: vec![], del: vec![] };
        assert!(GroundTask::from_parts("t", vec!["(p)".into()], vec![a], &[], &[]).is_err());
    }
}
