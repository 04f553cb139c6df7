//! Information-criterion subset selection.
//!
//! The criterion of a subset `S` is `2 * sum_k min loss_k(S) + F m (|S| + 1)`
//! with `F = 2` (AIC) or `F = ln n` (BIC). The engines minimize it with the
//! exact logistic loss or one of its surrogates:
//!
//! * [`exhaustive_select`] enumerates all `2^p` subsets under the exact loss
//!   and serves as the oracle,
//! * [`stepwise_warm_start`] is greedy forward addition,
//! * [`branch_and_bound`] is best-first search over include/exclude decisions.
//!
//! Ties are broken by smaller `|S|`, then the lexicographically smallest
//! index set. Reported criterion values always come from an exact refit.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;
use std::rc::Rc;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{encode_labels, Dataset, Direction, OrdinalEncoding};
use crate::error::{Error, Result};
use crate::estimator::{fit_exact, fit_pwl, fit_quad, ClassProblem, FitMethod, FitResult};
use crate::loss::TangentSet;

pub const EXHAUSTIVE_LIMIT: usize = 20;
pub const DEFAULT_TIME_LIMIT: Duration = Duration::from_secs(600);
pub const DEFAULT_TOLERANCE: f64 = 1e-9;
const MAX_OPEN_NODES: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Criterion {
    #[default]
    Aic,
    Bic,
}

impl Criterion {
    /// Per-parameter penalty `F`.
    pub fn penalty(self, n: usize) -> f64 {
        match self {
            Criterion::Aic => 2.0,
            Criterion::Bic => (n as f64).ln(),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Criterion::Aic => "aic",
            Criterion::Bic => "bic",
        }
    }
}

impl std::str::FromStr for Criterion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "aic" => Ok(Criterion::Aic),
            "bic" => Ok(Criterion::Bic),
            other => Err(Error::InvalidOption(format!("unknown criterion `{other}`"))),
        }
    }
}

/// Which loss the search minimizes.
#[derive(Debug, Clone, PartialEq)]
pub enum Approx {
    Exact,
    Quad,
    Pwl(TangentSet),
}

impl Approx {
    pub fn method(&self) -> FitMethod {
        match self {
            Approx::Exact => FitMethod::Exact,
            Approx::Quad => FitMethod::Quad,
            Approx::Pwl(_) => FitMethod::Pwl,
        }
    }
}

/// `2 * loss_sum + F m (subset_size + 1)`.
pub fn criterion_value(loss_sum: f64, subset_size: usize, m: usize, penalty: f64) -> f64 {
    2.0 * loss_sum + penalty * m as f64 * (subset_size as f64 + 1.0)
}

pub struct SelectionProblem<'a> {
    data: &'a Dataset,
    encoding: OrdinalEncoding,
    criterion: Criterion,
    approx: Approx,
    class_rows: Vec<(Vec<usize>, Vec<f64>)>,
    pub time_limit: Option<Duration>,
    pub tolerance: f64,
    /// Fit the `m` class subproblems concurrently.
    pub parallel: bool,
    /// Keep a record of every expanded branch-and-bound node.
    pub record_nodes: bool,
}

impl<'a> SelectionProblem<'a> {
    pub fn new(data: &'a Dataset, direction: Direction, criterion: Criterion, approx: Approx) -> Result<Self> {
        if let Approx::Pwl(t) = &approx {
            if !t.has_sentinels() {
                return Err(Error::InvalidTangents(
                    "piecewise-linear selection needs both -inf and +inf sentinels".into(),
                ));
            }
        }
        let encoding = encode_labels(data, direction);
        let class_rows = (0..encoding.m()).map(|k| encoding.active_rows(k)).collect::<Vec<_>>();
        if let Some(k) = class_rows.iter().position(|(r, _)| r.is_empty()) {
            return Err(Error::InvalidDataset(format!("class subproblem {} has no rows", k + 1)));
        }
        Ok(Self {
            data,
            encoding,
            criterion,
            approx,
            class_rows,
            time_limit: Some(DEFAULT_TIME_LIMIT),
            tolerance: DEFAULT_TOLERANCE,
            parallel: false,
            record_nodes: false,
        })
    }

    pub fn with_time_limit(mut self, limit: Option<Duration>) -> Self {
        self.time_limit = limit;
        self
    }

    pub fn with_parallel(mut self, parallel: bool) -> Self {
        self.parallel = parallel;
        self
    }

    pub fn data(&self) -> &Dataset {
        self.data
    }

    pub fn encoding(&self) -> &OrdinalEncoding {
        &self.encoding
    }

    pub fn criterion(&self) -> Criterion {
        self.criterion
    }

    pub fn approx(&self) -> &Approx {
        &self.approx
    }

    pub fn direction(&self) -> Direction {
        self.encoding.direction()
    }

    pub fn penalty(&self) -> f64 {
        self.criterion.penalty(self.data.n())
    }

    pub fn p(&self) -> usize {
        self.data.p()
    }

    pub fn m(&self) -> usize {
        self.encoding.m()
    }

    /// Criterion value for a loss sum over all classes.
    pub fn score(&self, loss_sum: f64, subset_size: usize) -> f64 {
        criterion_value(loss_sum, subset_size, self.m(), self.penalty())
    }

    fn class_problem(&self, k: usize, features: &[usize]) -> Result<ClassProblem> {
        let (rows, signs) = &self.class_rows[k];
        ClassProblem::from_rows(self.data.x(), k, rows.clone(), signs.clone(), features)
    }

    /// Fits every class on `features`.
    fn fit_classes(&self, features: &[usize], method: FitMethod) -> Result<Vec<FitResult>> {
        let fit_one = |k: usize| -> Result<FitResult> {
            let prob = self.class_problem(k, features)?;
            let res = match (method, &self.approx) {
                (FitMethod::Exact, _) => fit_exact(&prob),
                (FitMethod::Quad, _) => fit_quad(&prob),
                (FitMethod::Pwl, Approx::Pwl(tset)) => fit_pwl(&prob, tset),
                (FitMethod::Pwl, _) => Err(Error::InvalidOption("pwl fit without a tangent set".into())),
            };
            res.map_err(|e| Error::NodeFit {
                class: k + 1,
                active: features.len(),
                source: Box::new(e),
            })
        };
        if self.parallel {
            (0..self.m()).into_par_iter().map(fit_one).collect()
        } else {
            (0..self.m()).map(fit_one).collect()
        }
    }

    fn surrogate_fits(&self, features: &[usize]) -> Result<Vec<FitResult>> {
        self.fit_classes(features, self.approx.method())
    }

    pub fn exact_fits(&self, features: &[usize]) -> Result<Vec<FitResult>> {
        self.fit_classes(features, FitMethod::Exact)
    }
}

fn loss_sum(fits: &[FitResult]) -> f64 {
    fits.iter().map(|f| f.loss).sum()
}

/// `true` when `(a_value, a_set)` is strictly preferred to `(b_value, b_set)`.
pub fn prefer(a_value: f64, a_set: &[usize], b_value: f64, b_set: &[usize], tol: f64) -> bool {
    if a_value < b_value - tol {
        return true;
    }
    if a_value > b_value + tol {
        return false;
    }
    match a_set.len().cmp(&b_set.len()) {
        Ordering::Less => true,
        Ordering::Greater => false,
        Ordering::Equal => a_set < b_set,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubsetEvaluation {
    /// Surrogate criterion.
    pub objval: f64,
    /// Exact-refit criterion.
    pub criterion: f64,
    pub surrogate_fits: Vec<FitResult>,
    pub exact_fits: Vec<FitResult>,
}

pub fn evaluate_subset(prob: &SelectionProblem<'_>, subset: &[usize]) -> Result<SubsetEvaluation> {
    let mut s = subset.to_vec();
    s.sort_unstable();
    s.dedup();
    if let Some(&bad) = s.iter().find(|&&j| j >= prob.p()) {
        return Err(Error::InvalidOption(format!("feature index {bad} out of range")));
    }
    let exact_fits = prob.exact_fits(&s)?;
    let criterion = prob.score(loss_sum(&exact_fits), s.len());
    let surrogate_fits = match prob.approx {
        Approx::Exact => exact_fits.clone(),
        _ => prob.surrogate_fits(&s)?,
    };
    let objval = prob.score(loss_sum(&surrogate_fits), s.len());
    Ok(SubsetEvaluation {
        objval,
        criterion,
        surrogate_fits,
        exact_fits,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SelectMethod {
    #[serde(rename = "exhaustive")]
    Exhaustive,
    #[serde(rename = "stepwise")]
    Stepwise,
    #[serde(rename = "bnb-exact")]
    BnbExact,
    #[serde(rename = "bnb-quad")]
    BnbQuad,
    #[serde(rename = "bnb-pwl")]
    BnbPwl,
}

impl SelectMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            SelectMethod::Exhaustive => "exhaustive",
            SelectMethod::Stepwise => "stepwise",
            SelectMethod::BnbExact => "bnb-exact",
            SelectMethod::BnbQuad => "bnb-quad",
            SelectMethod::BnbPwl => "bnb-pwl",
        }
    }

    fn for_bnb(approx: &Approx) -> Self {
        match approx {
            Approx::Exact => SelectMethod::BnbExact,
            Approx::Quad => SelectMethod::BnbQuad,
            Approx::Pwl(_) => SelectMethod::BnbPwl,
        }
    }
}

impl std::str::FromStr for SelectMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "exhaustive" => SelectMethod::Exhaustive,
            "stepwise" => SelectMethod::Stepwise,
            "bnb-exact" => SelectMethod::BnbExact,
            "bnb-quad" => SelectMethod::BnbQuad,
            "bnb-pwl" => SelectMethod::BnbPwl,
            other => return Err(Error::InvalidOption(format!("unknown method `{other}`"))),
        })
    }
}

/// An expanded branch-and-bound node.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeRecord {
    pub fixed_in: Vec<usize>,
    pub fixed_out: Vec<usize>,
    pub undecided: Vec<usize>,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionReport {
    pub method: SelectMethod,
    pub direction: Direction,
    pub criterion: Criterion,
    /// Selected features, 0-based and ascending.
    pub selected: Vec<usize>,
    /// Exact-refit criterion of `selected`.
    pub criterion_value: f64,
    /// Surrogate criterion of `selected` at the surrogate optimum.
    pub objval: f64,
    /// Lower bound on the surrogate optimum.
    pub lower_bound: f64,
    /// The search finished without hitting the time limit.
    pub optimal: bool,
    pub nodes: usize,
    pub incumbent_updates: usize,
    pub wall_time: Duration,
    /// Exact-refit fits on `selected`, one per class.
    pub fits: Vec<FitResult>,
    pub warnings: Vec<String>,
    pub trace: Vec<NodeRecord>,
}

fn box_warnings(label: &str, fits: &[FitResult]) -> Vec<String> {
    fits.iter()
        .enumerate()
        .filter(|(_, f)| f.box_active)
        .map(|(k, _)| format!("{label} fit for class {} has a coefficient on the parameter box", k + 1))
        .collect()
}

fn finish_report(
    prob: &SelectionProblem<'_>,
    method: SelectMethod,
    selected: Vec<usize>,
    objval: f64,
    lower_bound: f64,
    surrogate: &[FitResult],
    exact: Option<Vec<FitResult>>,
    started: Instant,
) -> Result<SelectionReport> {
    let fits = match exact {
        Some(f) => f,
        None => prob.exact_fits(&selected)?,
    };
    let criterion_value = prob.score(loss_sum(&fits), selected.len());
    let mut warnings = box_warnings("exact", &fits);
    if prob.approx.method() != FitMethod::Exact {
        warnings.extend(box_warnings(prob.approx.method().as_str(), surrogate));
    }
    Ok(SelectionReport {
        method,
        direction: prob.direction(),
        criterion: prob.criterion,
        selected,
        criterion_value,
        objval,
        lower_bound,
        optimal: true,
        nodes: 0,
        incumbent_updates: 0,
        wall_time: started.elapsed(),
        fits,
        warnings,
        trace: Vec::new(),
    })
}

/// Enumerates every subset under the exact loss.
pub fn exhaustive_select(prob: &SelectionProblem<'_>) -> Result<SelectionReport> {
    let started = Instant::now();
    let p = prob.p();
    if p > EXHAUSTIVE_LIMIT {
        return Err(Error::TooManyFeatures {
            p,
            limit: EXHAUSTIVE_LIMIT,
        });
    }
    let mut best: Option<(f64, Vec<usize>, Vec<FitResult>)> = None;
    let mut updates = 0;
    for mask in 0u32..(1u32 << p) {
        let subset: Vec<usize> = (0..p).filter(|j| mask & (1 << j) != 0).collect();
        let fits = prob.exact_fits(&subset)?;
        let value = prob.score(loss_sum(&fits), subset.len());
        let take = match &best {
            None => true,
            Some((bv, bs, _)) => prefer(value, &subset, *bv, bs, prob.tolerance),
        };
        if take {
            best = Some((value, subset, fits));
            updates += 1;
        }
    }
    let (value, selected, fits) = best.expect("at least the empty subset");
    let mut report = finish_report(
        prob,
        SelectMethod::Exhaustive,
        selected,
        value,
        value,
        &fits,
        Some(fits.clone()),
        started,
    )?;
    report.nodes = 1 << p;
    report.incumbent_updates = updates;
    Ok(report)
}

/// Greedy forward addition under the problem's surrogate loss, stopping when
/// no single addition lowers the criterion.
pub fn stepwise_warm_start(prob: &SelectionProblem<'_>) -> Result<Vec<usize>> {
    Ok(stepwise_path(prob)?.0)
}

fn stepwise_path(prob: &SelectionProblem<'_>) -> Result<(Vec<usize>, f64, Vec<FitResult>)> {
    let mut current: Vec<usize> = Vec::new();
    let mut fits = prob.surrogate_fits(&current)?;
    let mut value = prob.score(loss_sum(&fits), 0);
    loop {
        let mut best: Option<(f64, usize, Vec<FitResult>)> = None;
        for j in (0..prob.p()).filter(|j| !current.contains(j)) {
            let mut trial = current.clone();
            trial.push(j);
            trial.sort_unstable();
            let trial_fits = prob.surrogate_fits(&trial)?;
            let v = prob.score(loss_sum(&trial_fits), trial.len());
            if best.as_ref().is_none_or(|(bv, _, _)| v < *bv) {
                best = Some((v, j, trial_fits));
            }
        }
        match best {
            Some((v, j, f)) if v < value - prob.tolerance => {
                current.push(j);
                current.sort_unstable();
                value = v;
                fits = f;
            }
            _ => break,
        }
    }
    Ok((current, value, fits))
}

/// Stepwise selection as a standalone engine.
pub fn stepwise_select(prob: &SelectionProblem<'_>) -> Result<SelectionReport> {
    let started = Instant::now();
    let (selected, value, fits) = stepwise_path(prob)?;
    let mut report = finish_report(prob, SelectMethod::Stepwise, selected, value, f64::NEG_INFINITY, &fits, None, started)?;
    // a heuristic proves nothing
    report.optimal = false;
    Ok(report)
}

struct Relaxation {
    active: Vec<usize>,
    fits: Vec<FitResult>,
}

struct Node {
    fixed_in: Vec<usize>,
    undecided: Vec<usize>,
    bound: f64,
    relax: Rc<Relaxation>,
}

struct HeapEntry {
    bound: f64,
    seq: u64,
    node: Node,
}

impl PartialEq for HeapEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for HeapEntry {}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        self.bound
            .total_cmp(&other.bound)
            .then(self.seq.cmp(&other.seq))
    }
}

struct Incumbent {
    value: f64,
    set: Vec<usize>,
    fits: Vec<FitResult>,
}

struct Search<'p, 'a> {
    prob: &'p SelectionProblem<'a>,
    incumbent: Option<Incumbent>,
    updates: usize,
}

impl Search<'_, '_> {
    fn consider(&mut self, set: &[usize], fits: &[FitResult]) {
        let value = self.prob.score(loss_sum(fits), set.len());
        let take = match &self.incumbent {
            None => true,
            Some(inc) => prefer(value, set, inc.value, &inc.set, self.prob.tolerance),
        };
        if take {
            self.incumbent = Some(Incumbent {
                value,
                set: set.to_vec(),
                fits: fits.to_vec(),
            });
            self.updates += 1;
        }
    }

    /// No completion of the node can beat the incumbent, ties included.
    fn prunable(&self, bound: f64, fixed_in: &[usize]) -> bool {
        let Some(inc) = &self.incumbent else {
            return false;
        };
        let tol = self.prob.tolerance;
        if bound > inc.value + tol {
            return true;
        }
        if bound < inc.value - tol {
            return false;
        }
        // only an exact tie resolved by the size / lexicographic rule remains
        match fixed_in.len().cmp(&inc.set.len()) {
            Ordering::Less => false,
            Ordering::Equal => fixed_in >= inc.set.as_slice(),
            Ordering::Greater => true,
        }
    }

    fn node_bound(&self, relax: &Relaxation, fixed_in: usize) -> f64 {
        self.prob.score(loss_sum(&relax.fits), fixed_in)
    }
}

/// Best-first branch and bound on the include/exclude decision per feature.
///
/// The relaxation at a node fits the surrogate with every fixed-in and
/// undecided feature free, while the penalty counts only fixed-in features;
/// both terms can only grow along any completion, so the value is a valid
/// lower bound. The node branches on the undecided feature with the largest
/// `max_k |w_jk|` in its relaxation. The include child shares the parent's
/// relaxation; only exclude children need new fits.
pub fn branch_and_bound(prob: &SelectionProblem<'_>) -> Result<SelectionReport> {
    let started = Instant::now();
    let deadline = prob.time_limit.map(|t| started + t);
    let penalty_step = prob.penalty() * prob.m() as f64;
    let mut search = Search {
        prob,
        incumbent: None,
        updates: 0,
    };

    let empty_fits = prob.surrogate_fits(&[])?;
    search.consider(&[], &empty_fits);
    let (warm, _, warm_fits) = stepwise_path(prob)?;
    search.consider(&warm, &warm_fits);

    let all: Vec<usize> = (0..prob.p()).collect();
    let root_fits = prob.surrogate_fits(&all)?;
    search.consider(&all, &root_fits);
    let root_relax = Rc::new(Relaxation {
        active: all.clone(),
        fits: root_fits,
    });
    let root = Node {
        fixed_in: Vec::new(),
        undecided: all,
        bound: search.node_bound(&root_relax, 0),
        relax: root_relax,
    };

    let mut heap: BinaryHeap<Reverse<HeapEntry>> = BinaryHeap::new();
    let mut stack: Vec<Node> = Vec::new();
    let mut seq = 0u64;
    let mut push = |heap: &mut BinaryHeap<Reverse<HeapEntry>>, stack: &mut Vec<Node>, node: Node| {
        if heap.len() >= MAX_OPEN_NODES {
            stack.push(node);
        } else {
            seq += 1;
            heap.push(Reverse(HeapEntry {
                bound: node.bound,
                seq,
                node,
            }));
        }
    };
    if !root.undecided.is_empty() {
        push(&mut heap, &mut stack, root);
    }

    let mut nodes = 0usize;
    let mut trace = Vec::new();
    let mut timed_out = false;
    loop {
        let node = match stack.pop() {
            Some(n) => n,
            None => match heap.pop() {
                Some(Reverse(e)) => e.node,
                None => break,
            },
        };
        if deadline.is_some_and(|d| Instant::now() >= d) {
            push(&mut heap, &mut stack, node);
            timed_out = true;
            break;
        }
        if search.prunable(node.bound, &node.fixed_in) {
            continue;
        }
        nodes += 1;
        if prob.record_nodes {
            trace.push(NodeRecord {
                fixed_in: node.fixed_in.clone(),
                fixed_out: (0..prob.p())
                    .filter(|j| !node.fixed_in.contains(j) && !node.undecided.contains(j))
                    .collect(),
                undecided: node.undecided.clone(),
                bound: node.bound,
            });
        }

        let relax = &node.relax;
        let branch = node
            .undecided
            .iter()
            .copied()
            .map(|j| {
                let c = relax.active.iter().position(|&a| a == j).expect("undecided is active");
                let score = relax.fits.iter().fold(0.0f64, |acc, f| acc.max(f.coefficients[c].abs()));
                (j, score)
            })
            .fold(None, |best: Option<(usize, f64)>, (j, s)| match best {
                Some((_, bs)) if s <= bs => best,
                _ => Some((j, s)),
            })
            .map(|(j, _)| j)
            .expect("non-leaf node");
        let rest: Vec<usize> = node.undecided.iter().copied().filter(|&j| j != branch).collect();

        // include: same active set, one more penalized feature
        let mut inc_fixed = node.fixed_in.clone();
        inc_fixed.push(branch);
        inc_fixed.sort_unstable();
        let inc_bound = node.bound + penalty_step;
        if !rest.is_empty() && !search.prunable(inc_bound, &inc_fixed) {
            push(
                &mut heap,
                &mut stack,
                Node {
                    fixed_in: inc_fixed,
                    undecided: rest.clone(),
                    bound: inc_bound,
                    relax: Rc::clone(relax),
                },
            );
        }

        // exclude: refit without the branching feature
        let active: Vec<usize> = relax.active.iter().copied().filter(|&j| j != branch).collect();
        let fits = prob.surrogate_fits(&active)?;
        search.consider(&active, &fits);
        let child_relax = Rc::new(Relaxation { active, fits });
        let exc_bound = search.node_bound(&child_relax, node.fixed_in.len());
        if !rest.is_empty() && !search.prunable(exc_bound, &node.fixed_in) {
            push(
                &mut heap,
                &mut stack,
                Node {
                    fixed_in: node.fixed_in.clone(),
                    undecided: rest,
                    bound: exc_bound,
                    relax: child_relax,
                },
            );
        }
    }

    let inc = search.incumbent.take().expect("incumbent seeded");
    let open_min = heap
        .iter()
        .map(|Reverse(e)| e.bound)
        .chain(stack.iter().map(|n| n.bound))
        .fold(f64::INFINITY, f64::min);
    let lower_bound = inc.value.min(open_min);
    log::debug!(
        "branch and bound: {nodes} nodes, {} incumbent updates, {} open, timed out: {timed_out}",
        search.updates,
        heap.len() + stack.len()
    );
    let exact = matches!(prob.approx, Approx::Exact).then(|| inc.fits.clone());
    let mut report = finish_report(
        prob,
        SelectMethod::for_bnb(&prob.approx),
        inc.set,
        inc.value,
        lower_bound,
        &inc.fits,
        exact,
        started,
    )?;
    report.optimal = !timed_out;
    report.nodes = nodes;
    report.incumbent_updates = search.updates;
    report.trace = trace;
    if timed_out {
        report.warnings.push(format!(
            "time limit reached; returning incumbent with global lower bound {lower_bound}"
        ));
    }
    Ok(report)
}

/// Runs the requested engine. `Exhaustive` and `Stepwise` use the problem
/// as given; the branch-and-bound methods require a matching `approx`.
pub fn run(prob: &SelectionProblem<'_>, method: SelectMethod) -> Result<SelectionReport> {
    match method {
        SelectMethod::Exhaustive => exhaustive_select(prob),
        SelectMethod::Stepwise => stepwise_select(prob),
        m => {
            if SelectMethod::for_bnb(&prob.approx) != m {
                return Err(Error::InvalidOption(format!(
                    "method {} does not match the problem's approximation",
                    m.as_str()
                )));
            }
            branch_and_bound(prob)
        }
    }
}
