//! Test support: fixture loading and reference implementations written
//! independently of the library's own oracles.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};
use std::hash::Hash;

use dhsynth::candidate_runtime::builtin::builtin_heuristic;
use dhsynth::fixtures::{fixtures_dir, load_fixture, FixtureKind, Manifest};
use dhsynth::heuristics::{Heuristic, HeuristicValue};
use dhsynth::pddl::{Atom, Condition, DomainAst, TaskAst};
use dhsynth::pddl::{self, GroundTask};
use dhsynth::state_space::{replay, ExplicitGraph, State, TransitionSystem};
use dhsynth::validator::{Counterexample, CounterexampleKind};

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

pub const HEURISTICS: [&str; 4] = ["ff", "goal-count", "blind", "table"];

pub struct PddlFixture {
    pub id: String,
    pub domain_text: String,
    pub task_text: String,
    pub task: GroundTask,
}

pub fn manifest() -> Manifest {
    Manifest::load(&fixtures_dir()).expect("manifest loads")
}

pub fn pddl_fixtures() -> Vec<PddlFixture> {
    manifest()
        .of_kind(FixtureKind::Pddl)
        .map(|e| {
            let f = load_fixture(&e.id).unwrap();
            let dhsynth::fixtures::FixtureData::Pddl { domain_text, task_text, task } = f.data else { unreachable!() };
            PddlFixture { id: e.id.clone(), domain_text, task_text, task }
        })
        .collect()
}

pub fn graph_fixtures() -> Vec<(String, ExplicitGraph)> {
    manifest()
        .of_kind(FixtureKind::Graph)
        .map(|e| {
            let f = load_fixture(&e.id).unwrap();
            (e.id.clone(), f.graph().unwrap().0.clone())
        })
        .collect()
}

/// `table` is the perfect heuristic on PDDL tasks.
pub fn heuristic<'t>(name: &str, task: &'t GroundTask) -> Box<dyn Heuristic<State> + 't> {
    let name = if name == "table" { "perfect" } else { name };
    builtin_heuristic(name, task).unwrap_or_else(|| panic!("no heuristic {name}"))
}

/// Every reachable state with its successor list, by recursive DFS.
pub struct Space<S> {
    pub initial: S,
    pub succ: HashMap<S, Vec<(String, S)>>,
    pub goals: HashSet<S>,
}

pub fn explore<T: TransitionSystem>(ts: &T) -> Space<T::State> {
    fn visit<T: TransitionSystem>(ts: &T, s: T::State, out: &mut Space<T::State>) {
        if out.succ.contains_key(&s) {
            return;
        }
        let list: Vec<(String, T::State)> = ts.successors(&s).into_iter().map(|(l, t)| (l.to_string(), t)).collect();
        if ts.is_goal(&s) {
            out.goals.insert(s.clone());
        }
        out.succ.insert(s, list.clone());
        for (_, t) in list {
            visit(ts, t, out);
        }
    }
    let initial = ts.initial();
    let mut space = Space { initial: initial.clone(), succ: HashMap::new(), goals: HashSet::new() };
    visit(ts, initial, &mut space);
    space
}

impl<S: Clone + Eq + Hash> Space<S> {
    /// Fixpoint iteration: a state is solvable if it is a goal or has a
    /// solvable successor.
    pub fn solvable(&self) -> HashSet<S> {
        let mut solvable = self.goals.clone();
        loop {
            let before = solvable.len();
            for (s, list) in &self.succ {
                if !solvable.contains(s) && list.iter().any(|(_, t)| solvable.contains(t)) {
                    solvable.insert(s.clone());
                }
            }
            if solvable.len() == before {
                return solvable;
            }
        }
    }

    pub fn values<H: Heuristic<S> + ?Sized>(&self, h: &H) -> HashMap<S, HeuristicValue> {
        self.succ.keys().map(|s| (s.clone(), h.evaluate(s).expect("heuristic evaluates"))).collect()
    }
}

/// S↓ per the definition: alive states reachable from the initial state
/// through strictly improving transitions between alive states.
pub fn s_down<S: Clone + Eq + Hash>(space: &Space<S>, h: &HashMap<S, HeuristicValue>) -> HashSet<S> {
    let solvable = space.solvable();
    let alive = |s: &S| solvable.contains(s) && !space.goals.contains(s);
    let mut set = HashSet::new();
    let mut work = Vec::new();
    if alive(&space.initial) {
        set.insert(space.initial.clone());
        work.push(space.initial.clone());
    }
    while let Some(s) = work.pop() {
        for (_, t) in &space.succ[&s] {
            if h[t] < h[&s] && alive(t) && set.insert(t.clone()) {
                work.push(t.clone());
            }
        }
    }
    set
}

/// The direct property, with an unsolvable non-goal initial state counted
/// as a failure.
pub fn reference_direct<S: Clone + Eq + Hash>(space: &Space<S>, h: &HashMap<S, HeuristicValue>) -> bool {
    let solvable = space.solvable();
    if !space.goals.contains(&space.initial) && !solvable.contains(&space.initial) {
        return false;
    }
    s_down(space, h).iter().all(|s| {
        let improving: Vec<&S> = space.succ[s].iter().filter(|(_, t)| h[t] < h[s]).map(|(_, t)| t).collect();
        !improving.is_empty() && improving.iter().all(|t| solvable.contains(*t))
    })
}

pub fn reference_dda<S: Clone + Eq + Hash>(space: &Space<S>, h: &HashMap<S, HeuristicValue>) -> bool {
    let solvable = space.solvable();
    if !space.goals.contains(&space.initial) && !solvable.contains(&space.initial) {
        return false;
    }
    space.succ.keys().filter(|s| solvable.contains(*s) && !space.goals.contains(*s)).all(|s| {
        let improving: Vec<&S> = space.succ[s].iter().filter(|(_, t)| h[t] < h[s]).map(|(_, t)| t).collect();
        !improving.is_empty() && improving.iter().all(|t| solvable.contains(*t))
    })
}

/// True if the goal is reachable from `s` ignoring delete effects.
pub fn relaxed_solvable(task: &GroundTask, s: &State) -> bool {
    let mut facts: BTreeSet<usize> = s.iter().collect();
    loop {
        let before = facts.len();
        for a in task.actions() {
            if a.pre.iter().all(|p| facts.contains(p)) {
                facts.extend(a.add.iter().copied());
            }
        }
        if facts.len() == before {
            return task.goal().iter().all(|g| facts.contains(g));
        }
    }
}

/// Length of an optimal delete-relaxed plan from `s`, by breadth-first
/// search over fact sets.
pub fn optimal_relaxed_plan_length(task: &GroundTask, s: &State) -> Option<usize> {
    let start: BTreeSet<usize> = s.iter().collect();
    let goal_in = |f: &BTreeSet<usize>| task.goal().iter().all(|g| f.contains(g));
    let mut seen = HashSet::from([start.clone()]);
    let mut queue = VecDeque::from([(start, 0usize)]);
    while let Some((facts, d)) = queue.pop_front() {
        if goal_in(&facts) {
            return Some(d);
        }
        for a in task.actions() {
            if a.pre.iter().all(|p| facts.contains(p)) && a.add.iter().any(|f| !facts.contains(f)) {
                let mut next = facts.clone();
                next.extend(a.add.iter().copied());
                if seen.insert(next.clone()) {
                    queue.push_back((next, d + 1));
                }
            }
        }
    }
    None
}

/// Original-semantics interpreter for domains with negative preconditions:
/// states are sets of ground atoms, nothing is compiled away.
pub struct Interpreter {
    actions: Vec<(String, Vec<Condition>, Vec<Atom>, Vec<Atom>)>,
    pub init: BTreeSet<String>,
    goal: Vec<String>,
}

fn ground_atom(a: &Atom, b: &HashMap<String, String>) -> String {
    let args: Vec<&str> = a.args.iter().map(|x| b.get(x).map_or(x.as_str(), String::as_str)).collect();
    if args.is_empty() {
        format!("({})", a.predicate)
    } else {
        format!("({} {})", a.predicate, args.join(" "))
    }
}

impl Interpreter {
    pub fn new(domain: &DomainAst, task: &TaskAst) -> Self {
        let mut actions = Vec::new();
        for schema in &domain.actions {
            let choices: Vec<Vec<String>> = schema
                .parameters
                .iter()
                .map(|p| {
                    task.objects.iter().filter(|o| domain.is_subtype(&o.type_name, &p.type_name)).map(|o| o.name.clone()).collect()
                })
                .collect();
            let mut tuples: Vec<Vec<String>> = vec![vec![]];
            for c in &choices {
                tuples = tuples.into_iter().flat_map(|t| c.iter().map(move |o| [t.clone(), vec![o.clone()]].concat())).collect();
            }
            for tuple in tuples {
                let b: HashMap<String, String> =
                    schema.parameters.iter().map(|p| p.name.clone()).zip(tuple.iter().cloned()).collect();
                let resolve = |x: &String| b.get(x).cloned().unwrap_or_else(|| x.clone());
                let pre = schema
                    .precondition
                    .iter()
                    .map(|c| match c {
                        Condition::Pos(a) => Condition::Pos(Atom::new(ground_atom(a, &b), vec![])),
                        Condition::Neg(a) => Condition::Neg(Atom::new(ground_atom(a, &b), vec![])),
                        Condition::Eq(x, y) => Condition::Eq(resolve(x), resolve(y)),
                        Condition::NotEq(x, y) => Condition::NotEq(resolve(x), resolve(y)),
                    })
                    .collect();
                let add = schema.add.iter().map(|a| Atom::new(ground_atom(a, &b), vec![])).collect();
                let del = schema.del.iter().map(|a| Atom::new(ground_atom(a, &b), vec![])).collect();
                let name = if tuple.is_empty() { format!("({})", schema.name) } else { format!("({} {})", schema.name, tuple.join(" ")) };
                actions.push((name, pre, add, del));
            }
        }
        let none = HashMap::new();
        Interpreter {
            actions,
            init: task.init.iter().map(|a| ground_atom(a, &none)).collect(),
            goal: task.goal.iter().map(|a| ground_atom(a, &none)).collect(),
        }
    }

    pub fn is_goal(&self, s: &BTreeSet<String>) -> bool {
        self.goal.iter().all(|g| s.contains(g))
    }

    pub fn successors(&self, s: &BTreeSet<String>) -> Vec<(String, BTreeSet<String>)> {
        let mut out = Vec::new();
        for (name, pre, add, del) in &self.actions {
            let ok = pre.iter().all(|c| match c {
                Condition::Pos(a) => s.contains(&a.predicate),
                Condition::Neg(a) => !s.contains(&a.predicate),
                Condition::Eq(x, y) => x == y,
                Condition::NotEq(x, y) => x != y,
            });
            if ok {
                let mut t = s.clone();
                for d in del {
                    t.remove(&d.predicate);
                }
                for a in add {
                    t.insert(a.predicate.clone());
                }
                out.push((name.clone(), t));
            }
        }
        out
    }

    /// Breadth-first enumeration, capped.
    pub fn reachable(&self, cap: usize) -> BTreeMap<BTreeSet<String>, Vec<(String, BTreeSet<String>)>> {
        let mut out = BTreeMap::new();
        let mut queue = VecDeque::from([self.init.clone()]);
        while let Some(s) = queue.pop_front() {
            if out.contains_key(&s) {
                continue;
            }
            assert!(out.len() < cap, "reference state space exceeds {cap}");
            let succ = self.successors(&s);
            for (_, t) in &succ {
                if !out.contains_key(t) {
                    queue.push_back(t.clone());
                }
            }
            out.insert(s, succ);
        }
        out
    }
}

pub fn parse_pair(domain_text: &str, task_text: &str) -> (DomainAst, TaskAst) {
    let d = pddl::parse_domain(domain_text).unwrap();
    let t = pddl::parse_task(task_text, &d).unwrap();
    (d, t)
}

/// Checks a counterexample against the task independently of the validator.
pub fn check_counterexample<T: TransitionSystem, H: Heuristic<T::State> + ?Sized>(
    ts: &T,
    h: &H,
    cx: &Counterexample,
) -> Result<(), String> {
    let trace = replay(ts, &cx.path_from_initial).ok_or("path does not replay")?;
    let values: Vec<HeuristicValue> = trace.iter().map(|s| h.evaluate(s).unwrap()).collect();
    ensure!(values.windows(2).all(|w| w[1] < w[0]), "path values not strictly decreasing: {values:?}");
    let last = trace.last().unwrap();
    ensure!(ts.describe(last) == cx.state, "path ends at {:?}, not the reported state", ts.describe(last));
    ensure!(*values.last().unwrap() == cx.h_state, "reported h_state differs from h");
    ensure!(!ts.is_goal(last), "reported state is a goal");
    let succ = ts.successors(last);
    match cx.kind {
        CounterexampleKind::Plateau => {
            ensure!(!succ.is_empty(), "plateau state has no successors");
            ensure!(cx.successors.len() == succ.len(), "successor list incomplete");
            for ((label, s), reported) in succ.iter().zip(&cx.successors) {
                ensure!(reported.action == *label, "successor order differs");
                ensure!(reported.h == h.evaluate(s).unwrap(), "successor value differs for {label}");
                ensure!(reported.h >= cx.h_state, "successor {label} improves");
            }
        }
        CounterexampleKind::DeadEnd => {
            ensure!(succ.is_empty() && cx.successors.is_empty(), "dead end has successors");
            ensure!(values.len() >= 2, "dead end at the initial state");
            let parent = values[values.len() - 2];
            ensure!(cx.parent_h == Some(parent), "parent_h {:?} differs from {parent}", cx.parent_h);
            ensure!(cx.h_state < parent, "dead end does not improve on its parent");
            let suggestion = cx.suggestion.as_deref().ok_or("missing suggestion")?;
            ensure!(suggestion.contains(&format!(">= {parent}")), "suggestion `{suggestion}` does not ask for h >= {parent}");
        }
    }
    Ok(())
}

fn predicate_of(fact: &str) -> &str {
    fact.trim_start_matches('(').split([' ', ')']).next().unwrap_or("")
}

/// Compares the grounded task, with complement facts projected out, against
/// the interpreter: same reachable states, same labelled transitions.
/// Returns the number of states and transitions.
pub fn compare_with_interpreter(domain_text: &str, task_text: &str) -> Result<(usize, usize), String> {
    let (domain, task) = parse_pair(domain_text, task_text);
    let (compiled_domain, _) = pddl::compile_negative_preconditions(&domain, &task);
    let complements = compiled_domain.complements.clone();
    let interpreter = Interpreter::new(&domain, &task);
    let reference = interpreter.reachable(10_000);
    let grounded = pddl::load(domain_text, task_text).map_err(|e| e.to_string())?;
    let space = explore(&grounded);

    let project = |s: &State| -> BTreeSet<String> {
        grounded.state_names(s).into_iter().filter(|f| !complements.contains_key(predicate_of(f))).collect()
    };
    // exactly one of p and its complement holds everywhere
    for s in space.succ.keys() {
        let names: BTreeSet<String> = grounded.state_names(s).into_iter().collect();
        for fact in grounded.fact_names() {
            if let Some(original) = complements.get(predicate_of(fact)) {
                let twin = fact.replacen(predicate_of(fact), original, 1);
                ensure!(names.contains(fact) != names.contains(&twin), "{fact} and {twin} agree");
            }
        }
    }
    let mut image = BTreeSet::new();
    for (s, succ) in &space.succ {
        let p = project(s);
        ensure!(image.insert(p.clone()), "two compiled states project to {p:?}");
        ensure!(grounded.is_goal(s) == interpreter.is_goal(&p), "goal test differs at {p:?}");
        let reference_succ = reference.get(&p).ok_or_else(|| format!("{p:?} unreachable in the reference"))?;
        let mut ours: Vec<(String, BTreeSet<String>)> = succ.iter().map(|(l, t)| (l.clone(), project(t))).collect();
        let mut theirs = reference_succ.clone();
        ours.sort();
        theirs.sort();
        ensure!(ours == theirs, "transitions differ at {p:?}");
    }
    ensure!(project(&space.initial) == interpreter.init, "initial states differ");
    ensure!(image.len() == reference.len(), "{} compiled states vs {} reference states", image.len(), reference.len());
    Ok((image.len(), space.succ.values().map(Vec::len).sum()))
}
