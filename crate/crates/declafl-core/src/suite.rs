//! Test-suite representation and execution.
//!
//! A suite file shares the model grammar: predicates plus `run`/`check`
//! commands. Each command becomes a `TestCase`; running one solves the
//! facts conjoined with the invoked body (negated for checks) and compares
//! the status against the expectation.

use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::ast::{self, Command, CommandKind, Model, NodeId, ParagraphKind, ParamInfo};
use crate::error::{Error, Result};
use crate::finder::{self, Budget, CommandSpec, Scope, Status, Unbounded};

/// Expected satisfiability of a command.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Expectation {
    ExpectSat,
    ExpectUnsat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TestKind {
    Run,
    Check,
}

#[derive(Debug, Clone)]
pub struct TestCase {
    pub name: String,
    pub kind: TestKind,
    /// Body formula to solve (assertion body for checks, before negation).
    pub body: NodeId,
    /// Parameters of the invoked predicate, existentially bound.
    pub params: Vec<ParamInfo>,
    pub scope: Scope,
    pub expectation: Expectation,
}

impl TestCase {
    pub fn negate(&self) -> bool {
        self.kind == TestKind::Check
    }
}

/// Outcome of one test. Errored tests are excluded from pass/fail
/// denominators.
#[derive(Debug, Clone)]
pub struct TestResult {
    pub test: String,
    pub status: Option<Status>,
    pub passed: bool,
    pub errored: Option<Error>,
    pub core: Option<BTreeSet<NodeId>>,
}

impl TestResult {
    pub fn is_failed(&self) -> bool {
        self.errored.is_none() && !self.passed
    }

    pub fn is_passed(&self) -> bool {
        self.errored.is_none() && self.passed
    }
}

/// Classification is a pure function of status and expectation.
pub fn classify(status: Status, expectation: Expectation) -> bool {
    matches!(
        (status, expectation),
        (Status::Sat, Expectation::ExpectSat) | (Status::Unsat, Expectation::ExpectUnsat)
    )
}

/// Append the paragraphs of a suite source to the model and collect its
/// commands into test cases. Commands default: run expects SAT, check
/// expects UNSAT.
pub fn load_suite(model: &mut Model, source: &str, filename: &str) -> Result<Vec<TestCase>> {
    let file_index = model.sources.len() as u16;
    ast::parse_into(model, source, filename)?;
    for para in &model.paragraphs {
        if para.from_suite
            && !matches!(
                para.kind,
                ParagraphKind::Predicate | ParagraphKind::Function | ParagraphKind::Assertion
            )
        {
            return Err(Error::Syntax {
                message: alloc::format!(
                    "test files may only declare predicates, functions, and assertions; `{}` is not allowed",
                    para.name
                ),
                span: model.span(para.node),
            });
        }
    }
    crate::analysis::resolve(model)?;
    let commands: Vec<Command> = model
        .commands
        .iter()
        .filter(|c| c.span.file == file_index)
        .cloned()
        .collect();
    suite_from_commands(model, &commands)
}

/// Build test cases from already-parsed commands.
pub fn suite_from_commands(model: &Model, commands: &[Command]) -> Result<Vec<TestCase>> {
    let mut out = Vec::new();
    for cmd in commands {
        out.push(command_to_test(model, cmd)?);
    }
    Ok(out)
}

fn command_to_test(model: &Model, cmd: &Command) -> Result<TestCase> {
    let scope = Scope::from_ast(&cmd.scope);
    match cmd.kind {
        CommandKind::Run => {
            let pred = model.pred_index(&cmd.name).ok_or(Error::UnmatchedCommand {
                name: cmd.name.clone(),
                span: cmd.span,
            })?;
            let p = &model.preds[pred];
            Ok(TestCase {
                name: cmd.name.clone(),
                kind: TestKind::Run,
                body: p.body,
                params: p.params.clone(),
                scope,
                expectation: match cmd.expect {
                    Some(false) => Expectation::ExpectUnsat,
                    _ => Expectation::ExpectSat,
                },
            })
        }
        CommandKind::Check => {
            let idx = model.assert_index(&cmd.name).ok_or(Error::UnmatchedCommand {
                name: cmd.name.clone(),
                span: cmd.span,
            })?;
            let a = &model.asserts[idx];
            Ok(TestCase {
                name: cmd.name.clone(),
                kind: TestKind::Check,
                body: a.body,
                params: Vec::new(),
                scope,
                expectation: match cmd.expect {
                    Some(true) => Expectation::ExpectSat,
                    _ => Expectation::ExpectUnsat,
                },
            })
        }
    }
}

/// Run one test against a model.
pub fn run_test(
    model: &Model,
    test: &TestCase,
    want_core: bool,
    budget: &dyn Budget,
) -> TestResult {
    let spec = CommandSpec { body: test.body, negate: test.negate(), params: &test.params };
    let outcome = finder::ground_command(model, &spec, &test.scope)
        .and_then(|g| finder::solve_budgeted(model, &g, false, budget).map(|r| (g, r)));
    match outcome {
        Err(e) => TestResult {
            test: test.name.clone(),
            status: None,
            passed: false,
            errored: Some(e),
            core: None,
        },
        Ok((g, r)) => {
            let passed = classify(r.status, test.expectation);
            // Cores are computed lazily, only for failing UNSAT tests.
            let core = if want_core && !passed && r.status == Status::Unsat {
                let all: BTreeSet<NodeId> = g.conjunct_nodes.iter().copied().collect();
                finder::minimize_core_budgeted(&g, &all, budget).ok()
            } else {
                None
            };
            TestResult {
                test: test.name.clone(),
                status: Some(r.status),
                passed,
                errored: None,
                core,
            }
        }
    }
}

/// Run a suite in order. Errored tests are marked and excluded from
/// totals by consumers.
pub fn run_tests(model: &Model, suite: &[TestCase], want_cores: bool) -> Result<Vec<TestResult>> {
    run_tests_budgeted(model, suite, want_cores, &Unbounded)
}

pub fn run_tests_budgeted(
    model: &Model,
    suite: &[TestCase],
    want_cores: bool,
    budget: &dyn Budget,
) -> Result<Vec<TestResult>> {
    if suite.is_empty() {
        return Err(Error::NoFailingTests);
    }
    Ok(suite.iter().map(|t| run_test(model, t, want_cores, budget)).collect())
}

/// (failed, passed) counts over non-errored results.
pub fn totals(results: &[TestResult]) -> (u32, u32) {
    let failed = results.iter().filter(|r| r.is_failed()).count() as u32;
    let passed = results.iter().filter(|r| r.is_passed()).count() as u32;
    (failed, passed)
}

/// Look up a test by name.
pub fn find_test<'a>(suite: &'a [TestCase], name: &str) -> Result<&'a TestCase> {
    suite
        .iter()
        .find(|t| t.name == name)
        .ok_or(Error::UnknownTest { name: name.to_string() })
}
