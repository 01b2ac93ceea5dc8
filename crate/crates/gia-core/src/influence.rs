//! Candidate scoring and budgeted greedy target selection.
//!
//! Phase 1 solves the restricted margin LP per (candidate, neighbor, label)
//! and keeps verified flips. Phase 2 merges each label-consistent group into
//! one final perturbation, re-evaluates every receptive neighbor under it and
//! scores the candidate by the number of mode-qualified flips. Greedy
//! selection then picks candidates by residual score, excluding neighbors
//! already claimed by earlier picks.

use crate::error::{Error, Result};
use crate::graph::PropagationOperator;
use crate::perturb::{
    aggregate_final_perturbation, optimal_pair_perturbation, FeaturePerturbation,
    GlobalPerturbation, PairwiseSolution, PerturbationDomain, SnapDirection,
};
use crate::scalar::Scalar;
use crate::surrogate::{argmax, SurrogateModel};
use ndarray::Array2;
use rayon::prelude::*;
use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::Write;
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AttackModeKind {
    /// Degrade overall accuracy; flips may go to any label.
    Untargeted,
    /// Misclassify nodes currently predicted as the target label.
    DegradeLabel,
    /// Lure nodes into being predicted as the target label.
    LureLabel,
}

/// Attack objective plus the ablation switches.
#[derive(Debug, Clone, Copy)]
pub struct AttackMode {
    pub kind: AttackModeKind,
    pub target_label: Option<usize>,
    pub consistency: bool,
    pub global_perturbation: bool,
}

impl AttackMode {
    pub fn untargeted() -> Self {
        AttackMode {
            kind: AttackModeKind::Untargeted,
            target_label: None,
            consistency: true,
            global_perturbation: false,
        }
    }

    pub fn degrade_label(target: usize) -> Self {
        AttackMode {
            kind: AttackModeKind::DegradeLabel,
            target_label: Some(target),
            consistency: true,
            global_perturbation: false,
        }
    }

    pub fn lure_label(target: usize) -> Self {
        AttackMode {
            kind: AttackModeKind::LureLabel,
            target_label: Some(target),
            consistency: true,
            global_perturbation: false,
        }
    }

    pub fn validate(&self, num_labels: usize) -> Result<()> {
        match self.kind {
            AttackModeKind::Untargeted => Ok(()),
            AttackModeKind::DegradeLabel | AttackModeKind::LureLabel => match self.target_label {
                Some(t) if t < num_labels => Ok(()),
                Some(t) => Err(Error::Label {
                    label: t,
                    num_labels,
                }),
                None => Err(Error::Config(
                    "label-oriented mode needs a target label".into(),
                )),
            },
        }
    }
}

/// Shared read-only state for scoring candidates.
pub struct AttackContext<'a, F: Scalar> {
    pub model: &'a SurrogateModel<F>,
    pub op: &'a PropagationOperator<F>,
    pub features: &'a Array2<F>,
    pub domain: &'a PerturbationDomain<F>,
    pub mode: AttackMode,
    clean_logits: Array2<F>,
    clean_labels: Vec<usize>,
}

impl<'a, F: Scalar> AttackContext<'a, F> {
    pub fn new(
        model: &'a SurrogateModel<F>,
        op: &'a PropagationOperator<F>,
        features: &'a Array2<F>,
        propagated: &Array2<F>,
        domain: &'a PerturbationDomain<F>,
        mode: AttackMode,
    ) -> Result<Self> {
        mode.validate(model.num_labels())?;
        let clean_logits = model.logits_all(propagated);
        let clean_labels = clean_logits
            .rows()
            .into_iter()
            .map(|r| argmax(r.as_slice().expect("contiguous logits")))
            .collect();
        Ok(AttackContext {
            model,
            op,
            features,
            domain,
            mode,
            clean_logits,
            clean_labels,
        })
    }

    pub fn clean_label(&self, node: usize) -> usize {
        self.clean_labels[node]
    }

    pub fn clean_labels(&self) -> &[usize] {
        &self.clean_labels
    }
}

/// A candidate's merged perturbation and the neighbors it flips.
#[derive(Debug, Clone)]
pub struct CandidateScore<F> {
    pub candidate: usize,
    /// Consistent misclassification label; unset in the inconsistency
    /// ablation and for zero-score candidates.
    pub chosen_label: Option<usize>,
    pub final_perturbation: FeaturePerturbation<F>,
    pub affected: Vec<usize>,
    pub score: usize,
    /// Per-pair flip count before aggregation (diagnostic only).
    pub pairwise_flip_count: usize,
}

fn mode_qualified<F: Scalar>(
    ctx: &AttackContext<F>,
    group_label: Option<usize>,
    clean: usize,
    new: usize,
) -> bool {
    match ctx.mode.kind {
        AttackModeKind::Untargeted => match group_label {
            Some(c) => new == c && clean != c,
            None => new != clean,
        },
        AttackModeKind::DegradeLabel => {
            let t = ctx.mode.target_label.expect("validated");
            clean == t && new != t
        }
        AttackModeKind::LureLabel => {
            let t = ctx.mode.target_label.expect("validated");
            new == t && clean != t
        }
    }
}

/// Scores one candidate and returns the pairwise solutions behind the score.
pub fn score_candidate_with_solutions<F: Scalar>(
    ctx: &AttackContext<F>,
    i: usize,
) -> (CandidateScore<F>, Vec<PairwiseSolution<F>>) {
    let receptive = ctx.op.receptive_neighbors(i);
    let num_labels = ctx.model.num_labels();
    let all_labels: Vec<usize> = (0..num_labels).collect();

    let mut solutions: Vec<PairwiseSolution<F>> = Vec::new();
    for &j in &receptive {
        let c_hat = ctx.clean_labels[j];
        let targets: &[usize] = match ctx.mode.kind {
            AttackModeKind::Untargeted => &all_labels,
            AttackModeKind::DegradeLabel => {
                // Only neighbors currently predicted as the target label matter.
                if c_hat != ctx.mode.target_label.expect("validated") {
                    continue;
                }
                &all_labels
            }
            AttackModeKind::LureLabel => {
                std::slice::from_ref(ctx.mode.target_label.as_ref().expect("validated"))
            }
        };
        if let Some(sol) = optimal_pair_perturbation(
            ctx.model,
            ctx.op,
            ctx.clean_logits.row(j),
            ctx.features.row(i),
            i,
            j,
            targets,
            ctx.domain,
        ) {
            solutions.push(sol);
        }
    }

    // Group per achieved label under consistency, or pool everything.
    let mut groups: Vec<(Option<usize>, Vec<&PairwiseSolution<F>>)> = Vec::new();
    if ctx.mode.consistency {
        let mut by_label: BTreeMap<usize, Vec<&PairwiseSolution<F>>> = BTreeMap::new();
        for sol in &solutions {
            by_label.entry(sol.target_label).or_default().push(sol);
        }
        groups.extend(by_label.into_iter().map(|(c, sols)| (Some(c), sols)));
    } else if !solutions.is_empty() {
        groups.push((None, solutions.iter().collect()));
    }

    let pairwise_flip_count = groups.iter().map(|(_, s)| s.len()).max().unwrap_or(0);

    let mut best: Option<CandidateScore<F>> = None;
    for (label, sols) in &groups {
        let eps = aggregate_final_perturbation(sols, ctx.domain, ctx.features.row(i));
        if eps.is_empty() {
            continue;
        }
        let delta = ctx.model.logit_delta(&eps);
        let mut affected = Vec::new();
        for &j in &receptive {
            let alpha = ctx.op.weight(i, j);
            let shifted = &ctx.clean_logits.row(j).to_owned() + &delta.mapv(|v| v * alpha);
            let new_label = argmax(shifted.as_slice().expect("contiguous logits"));
            if mode_qualified(ctx, *label, ctx.clean_labels[j], new_label) {
                affected.push(j);
            }
        }
        let replace = match &best {
            None => true,
            Some(b) => affected.len() > b.score,
        };
        if replace {
            best = Some(CandidateScore {
                candidate: i,
                chosen_label: *label,
                final_perturbation: eps,
                affected: affected.clone(),
                score: affected.len(),
                pairwise_flip_count,
            });
        }
    }

    let score = best.unwrap_or(CandidateScore {
        candidate: i,
        chosen_label: None,
        final_perturbation: FeaturePerturbation::empty(),
        affected: Vec::new(),
        score: 0,
        pairwise_flip_count,
    });
    (score, solutions)
}

pub fn score_candidate<F: Scalar>(ctx: &AttackContext<F>, i: usize) -> CandidateScore<F> {
    score_candidate_with_solutions(ctx, i).0
}

/// Scores all candidates in parallel; output order follows the input order,
/// never completion order.
pub fn score_candidates<F: Scalar>(
    ctx: &AttackContext<F>,
    candidates: &[usize],
) -> Vec<CandidateScore<F>> {
    candidates
        .par_iter()
        .map(|&i| score_candidate(ctx, i))
        .collect()
}

/// One selected target with the neighbors newly claimed at selection time.
#[derive(Debug, Clone)]
pub struct PlanEntry<F> {
    pub node: usize,
    pub perturbation: FeaturePerturbation<F>,
    pub affected: Vec<usize>,
}

/// Greedy selection outcome.
#[derive(Debug, Clone)]
pub struct AttackPlan<F> {
    pub entries: Vec<PlanEntry<F>>,
    pub covered: Vec<usize>,
    pub predicted_impact: usize,
}

impl<F: Scalar> AttackPlan<F> {
    pub fn selected_nodes(&self) -> Vec<usize> {
        self.entries.iter().map(|e| e.node).collect()
    }
}

/// Picks up to `node_budget` candidates by residual influence. A neighbor
/// counted for one pick is excluded from later residual scores; affected sets
/// stay fixed (no re-optimization against the used set).
pub fn greedy_select<F: Scalar>(
    scores: &[CandidateScore<F>],
    node_budget: usize,
) -> AttackPlan<F> {
    assert!(node_budget >= 1, "node budget must be at least 1");
    let mut used: BTreeSet<usize> = BTreeSet::new();
    let mut taken: BTreeSet<usize> = BTreeSet::new();
    let mut entries = Vec::new();

    for _ in 0..node_budget {
        let mut best: Option<(usize, usize)> = None; // (residual, node)
        for s in scores {
            if taken.contains(&s.candidate) {
                continue;
            }
            let residual = s.affected.iter().filter(|j| !used.contains(j)).count();
            let better = match best {
                None => true,
                Some((r, n)) => residual > r || (residual == r && s.candidate < n),
            };
            if better {
                best = Some((residual, s.candidate));
            }
        }
        let Some((residual, node)) = best else { break };
        if residual == 0 {
            break;
        }
        let score = scores
            .iter()
            .find(|s| s.candidate == node)
            .expect("winner came from scores");
        let fresh: Vec<usize> = score
            .affected
            .iter()
            .filter(|j| !used.contains(j))
            .copied()
            .collect();
        used.extend(fresh.iter().copied());
        taken.insert(node);
        entries.push(PlanEntry {
            node,
            perturbation: score.final_perturbation.clone(),
            affected: fresh,
        });
    }

    let covered: Vec<usize> = used.into_iter().collect();
    let predicted_impact = covered.len();
    AttackPlan {
        entries,
        covered,
        predicted_impact,
    }
}

/// Ablation: collapse all candidates' final perturbations into one shared
/// (feature, direction) template. Features rank by how often they appear;
/// disagreeing directions resolve by majority, ties snap upward.
pub fn build_global_perturbation_ablation<F: Scalar>(
    scores: &[CandidateScore<F>],
    dom: &PerturbationDomain<F>,
) -> GlobalPerturbation {
    let mut up: BTreeMap<usize, usize> = BTreeMap::new();
    let mut down: BTreeMap<usize, usize> = BTreeMap::new();
    for s in scores {
        for &(d, delta) in s.final_perturbation.entries() {
            if delta > F::zero() {
                *up.entry(d).or_default() += 1;
            } else {
                *down.entry(d).or_default() += 1;
            }
        }
    }
    let mut features: BTreeSet<usize> = up.keys().chain(down.keys()).copied().collect();
    let mut ranked: Vec<(usize, usize)> = features
        .iter()
        .map(|&d| {
            (
                d,
                up.get(&d).copied().unwrap_or(0) + down.get(&d).copied().unwrap_or(0),
            )
        })
        .collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    ranked.truncate(dom.feature_budget);
    features = ranked.iter().map(|&(d, _)| d).collect();

    let entries = features
        .into_iter()
        .map(|d| {
            let u = up.get(&d).copied().unwrap_or(0);
            let l = down.get(&d).copied().unwrap_or(0);
            let dir = if u >= l {
                SnapDirection::Upper
            } else {
                SnapDirection::Lower
            };
            (d, dir)
        })
        .collect();
    GlobalPerturbation { entries }
}

/// Writes the plan summary: one comment line with the run parameters, then
/// `node,affected_count,affected` rows (affected ids space-separated).
pub fn dump_plan<F: Scalar>(
    path: &Path,
    plan: &AttackPlan<F>,
    mode: &str,
    node_budget: usize,
    feature_budget: usize,
) -> Result<()> {
    let mut out = format!(
        "# mode={mode} B_n={node_budget} B_f={feature_budget} predicted_impact={}\n",
        plan.predicted_impact
    );
    out.push_str("node,affected_count,affected\n");
    for entry in &plan.entries {
        let ids: Vec<String> = entry.affected.iter().map(|j| j.to_string()).collect();
        out.push_str(&format!(
            "{},{},{}\n",
            entry.node,
            entry.affected.len(),
            ids.join(" ")
        ));
    }
    let mut f = fs::File::create(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    f.write_all(out.as_bytes())
        .map_err(|e| Error::io(path.display().to_string(), e))
}
