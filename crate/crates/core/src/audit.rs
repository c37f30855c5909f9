//! Oracle suites run against a built identification host.

use serde::Serialize;

use crate::counterexample::{audit_split, check_plan, CheckMode, IdentificationPlan, PlanReport, SplitAudit};
use crate::digraph::Digraph;
use crate::oracle::{all_embeddings, max_disjoint_copies, periodicity_probe, tail_confinement, Confinement, CopyCount, Periodicity, SearchBudget};

pub const COPY_PREFIX: usize = 10;
/// Copies demanded, capped at the number of constituents.
pub const COPY_TARGET: usize = 4;
pub const PERIODICITY_SHIFTS: usize = 30;
pub const PERIODICITY_WINDOW: usize = 100;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConfinementSummary {
    /// Length of the traced embeddings (twice the window).
    pub length: usize,
    pub window: usize,
    pub embeddings: usize,
    pub confined: usize,
    pub mixed: usize,
    pub split: SplitAudit,
    /// Set when the embedding search hit its result cap.
    pub truncated: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SuiteReport {
    pub plan: PlanReport,
    pub copies: CopyCount,
    pub confinement: Option<ConfinementSummary>,
    pub periodicity: Option<Periodicity>,
    pub failures: Vec<String>,
}

impl SuiteReport {
    pub fn ok(&self) -> bool {
        self.plan.ok() && self.failures.is_empty()
    }
}

/// Traces every embedding of length twice the deepest identification and
/// checks that its final window stays on one constituent and splits
/// cleanly at every identification vertex.
pub fn confinement_summary(d: &Digraph, plan: &IdentificationPlan, c: usize, budget: SearchBudget) -> Result<ConfinementSummary, String> {
    let spec = plan.spec().map_err(|e| e.to_string())?;
    let window = plan.deepest().max(1);
    let length = 2 * window;
    let embs = all_embeddings(d, &spec, length, budget.max_results).map_err(|e| e.to_string())?;
    let mut s = ConfinementSummary {
        length,
        window,
        embeddings: embs.len(),
        confined: 0,
        mixed: 0,
        split: SplitAudit::default(),
        truncated: embs.len() >= budget.max_results,
    };
    for e in &embs {
        match tail_confinement(d, e, window) {
            Confinement::Confined(_) => s.confined += 1,
            Confinement::Mixed(_) => s.mixed += 1,
        }
        audit_split(d, plan, c, &spec, e, &mut s.split);
    }
    Ok(s)
}

/// `check_plan` followed by the oracle checks for the plan's mode.
pub fn run_suite(d: &Digraph, plan: &IdentificationPlan, mode: CheckMode, budget: SearchBudget) -> SuiteReport {
    let report = check_plan(d, plan, mode);
    let mut failures = Vec::new();
    let spec = match plan.spec() {
        Ok(s) => s,
        Err(e) => {
            failures.push(e.to_string());
            return SuiteReport { plan: report, copies: CopyCount::BudgetExceeded { best: 0 }, confinement: None, periodicity: None, failures };
        }
    };
    let target = COPY_TARGET.min(d.ray_labels().count());
    let copies = max_disjoint_copies(d, &spec, COPY_PREFIX, target, budget);
    match copies {
        CopyCount::AtLeast(_) => {}
        CopyCount::Exactly(k) => failures.push(format!("only {k} disjoint prefix copies of length {COPY_PREFIX}")),
        CopyCount::BudgetExceeded { best } => failures.push(format!("copy search ran out of budget at {best}")),
    }
    let (confinement, periodicity) = match mode {
        CheckMode::Bounded { c } => match confinement_summary(d, plan, c, budget) {
            Ok(s) => {
                if s.truncated {
                    failures.push(format!("embedding search capped at {}", s.embeddings));
                }
                if s.mixed > 0 {
                    failures.push(format!("{} embeddings with mixed tails", s.mixed));
                }
                if s.split.violations > 0 || s.split.direction_changes > 0 {
                    failures.push(format!("{} split violations, {} direction changes", s.split.violations, s.split.direction_changes));
                }
                (Some(s), None)
            }
            Err(e) => {
                failures.push(e);
                (None, None)
            }
        },
        CheckMode::Unbounded => {
            let p = periodicity_probe(&spec, PERIODICITY_SHIFTS, PERIODICITY_WINDOW);
            if let Periodicity::PeriodicWitness(a, b) = p {
                failures.push(format!("tails at shifts {a} and {b} agree"));
            }
            (None, Some(p))
        }
    };
    SuiteReport { plan: report, copies, confinement, periodicity, failures }
}
