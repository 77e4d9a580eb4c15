//! PDDL front end: parsing, canonical printing, negative-precondition
//! compilation and grounding.
//!
//! The accepted fragment is STRIPS with `:typing`, `:negative-preconditions`
//! and `:equality`. Equality is only allowed between action parameters, where
//! it is evaluated during grounding. Types use single inheritance with the
//! implicit root `object`.

mod ast;
mod compile;
mod ground;
mod lexer;
mod parser;

use thiserror::Error;

pub use ast::{ActionSchema, Atom, Condition, DomainAst, PredicateDecl, TaskAst, TypeDecl, TypedName, ROOT_TYPE};
pub use compile::compile_negative_preconditions;
pub use ground::{ground, ground_with, objects_of_type, FactId, GroundAction, GroundOptions, GroundTask};
pub use lexer::Position;
pub use parser::{parse_domain, parse_task, SUPPORTED_REQUIREMENTS};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PddlError {
    #[error("syntax error at {line}:{column}: expected {expected}, found {found}")]
    Syntax { line: usize, column: usize, expected: String, found: String },
    #[error("unsupported requirement `{0}`")]
    UnsupportedRequirement(String),
    #[error("unsupported feature at {line}:{column}: {feature}")]
    UnsupportedFeature { feature: String, line: usize, column: usize },
    #[error("unsupported equality: {0}")]
    UnsupportedEquality(String),
    #[error("atom {atom} has {found} arguments, predicate expects {expected}")]
    ArityMismatch { atom: String, expected: usize, found: usize },
    #[error("unknown predicate `{0}`")]
    UnknownPredicate(String),
    #[error("unknown type `{0}`")]
    UnknownType(String),
    #[error("variable `{variable}` is not a parameter of action `{action}`")]
    UnknownVariable { variable: String, action: String },
    #[error("undeclared object `{0}`")]
    UnknownObjectType(String),
    #[error("task is for domain `{found}`, expected `{expected}`")]
    DomainMismatch { expected: String, found: String },
    #[error("duplicate predicate `{0}`")]
    DuplicatePredicate(String),
    #[error("duplicate name `{0}`")]
    DuplicateName(String),
    #[error("type `{0}` declared with more than one parent")]
    MultipleParents(String),
    #[error("type hierarchy has a cycle through `{0}`")]
    CyclicTypes(String),
    #[error("action `{0}` still has negative preconditions; compile them first")]
    UncompiledNegation(String),
    #[error("goal atom {0} is neither initially true nor added by any action")]
    GoalUnreachableStatically(String),
    #[error("invalid fact reference: {0}")]
    InvalidFact(String),
}

impl PddlError {
    pub(crate) fn syntax(at: Position, expected: &str, found: &str) -> Self {
        PddlError::Syntax {
            line: at.line,
            column: at.column,
            expected: expected.to_string(),
            found: found.to_string(),
        }
    }

    pub(crate) fn unsupported(feature: &str, at: Position) -> Self {
        PddlError::UnsupportedFeature { feature: feature.to_string(), line: at.line, column: at.column }
    }
}

/// Parses, compiles and grounds a domain/task pair in one step.
pub fn load(domain_text: &str, task_text: &str) -> Result<GroundTask, PddlError> {
    load_with(domain_text, task_text, GroundOptions::default())
}

pub fn load_with(domain_text: &str, task_text: &str, options: GroundOptions) -> Result<GroundTask, PddlError> {
    let domain = parse_domain(domain_text)?;
    let task = parse_task(task_text, &domain)?;
    let (domain, task) = compile_negative_preconditions(&domain, &task);
    ground_with(&domain, &task, options)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_domain() {
        let d = parse_domain("(define (domain tiny) (:predicates (done)) (:action noop :parameters () :effect (and)))")
            .unwrap();
        assert_eq!(d.predicates.len(), 1);
        assert_eq!(d.actions.len(), 1);
        assert!(d.actions[0].precondition.is_empty());
    }

    #[test]
    fn derived_predicates_are_rejected() {
        let err = parse_domain("(define (domain d) (:requirements :strips :derived-predicates) (:predicates (p)))")
            .unwrap_err();
        assert_eq!(err, PddlError::UnsupportedRequirement(":derived-predicates".into()));
    }

    #[test]
    fn conditional_effects_are_rejected() {
        let err = parse_domain(
            "(define (domain d) (:predicates (p) (q))
               (:action a :parameters () :precondition (and) :effect (when (p) (q))))",
        )
        .unwrap_err();
        assert!(matches!(err, PddlError::UnsupportedFeature { .. }));
        assert!(matches!(
            parse_domain("(define (domain d) (:requirements :adl))"),
            Err(PddlError::UnsupportedRequirement(_))
        ));
    }

    #[test]
    fn syntax_errors_carry_positions() {
        let err = parse_domain("(define (domain d)\n  (:predicates (p))\n  (:action a :parameters ?x))").unwrap_err();
        match err {
            PddlError::Syntax { line, column, .. } => assert_eq!((line, column), (3, 26)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn multiple_parents_are_rejected() {
        let err = parse_domain("(define (domain d) (:types a - b a - c))").unwrap_err();
        assert_eq!(err, PddlError::MultipleParents("a".into()));
    }

    #[test]
    fn subtypes_ground_under_parent() {
        let d = parse_domain(
            "(define (domain d) (:types car truck - vehicle) (:predicates (moved ?v - vehicle))
               (:action go :parameters (?v - vehicle) :precondition (and) :effect (moved ?v)))",
        )
        .unwrap();
        assert!(d.is_subtype("car", "vehicle"));
        assert!(d.is_subtype("car", "object"));
        assert!(!d.is_subtype("vehicle", "car"));
        let t = parse_task("(define (problem p) (:domain d) (:objects c - car t - truck) (:init) (:goal (and)))", &d)
            .unwrap();
        assert_eq!(ground(&d, &t).unwrap().actions().len(), 2);
    }

    #[test]
    fn task_cross_checks() {
        let d = parse_domain("(define (domain d) (:types o) (:predicates (p ?x - o)))").unwrap();
        assert_eq!(
            parse_task("(define (problem t) (:domain d) (:objects a - o) (:init (p b)) (:goal (p a)))", &d)
                .unwrap_err(),
            PddlError::UnknownObjectType("b".into())
        );
        assert!(matches!(
            parse_task("(define (problem t) (:domain d) (:objects a - o) (:init (p a a)) (:goal (p a)))", &d),
            Err(PddlError::ArityMismatch { .. })
        ));
        assert!(matches!(
            parse_task("(define (problem t) (:domain other) (:objects a - o) (:init) (:goal (p a)))", &d),
            Err(PddlError::DomainMismatch { .. })
        ));
        let t = parse_task("(define (problem t) (:domain d) (:objects a - o) (:init (p a)) (:goal (p a)))", &d).unwrap();
        let g = ground(&d, &t).unwrap();
        assert!(g.is_goal_state(g.initial_state()));
    }

    #[test]
    fn variables_must_be_parameters() {
        let err = parse_domain(
            "(define (domain d) (:predicates (p ?x)) (:action a :parameters (?x) :precondition (p ?y) :effect (p ?x)))",
        )
        .unwrap_err();
        assert!(matches!(err, PddlError::UnknownVariable { .. }));
    }
}
