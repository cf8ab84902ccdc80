//! Off-line reduction of a fully utilized task system to unit servers.
//!
//! Tasks are packed into servers of utilization at most one; servers that
//! are not full are replaced by their duals (utilization `1 - u`, same
//! deadlines) and packed again. Each round roughly halves the number of
//! servers, and every group of tasks eventually ends up under a unit server
//! that owns one (virtual) processor. The result is a forest whose roots are
//! those unit servers.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{TaskId, TaskSystem};
use crate::time::Rational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl std::fmt::Display for NodeId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NodeKind {
    Task(TaskId),
    Pack,
    Dual,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReductionNode {
    pub id: NodeId,
    pub kind: NodeKind,
    pub utilization: Rational,
    pub level: u32,
    pub children: Vec<NodeId>,
    pub parent: Option<NodeId>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ReductionError {
    #[error("cannot dualize a server of utilization {0}; only 0 < u < 1 has a dual")]
    DualOutOfRange(Rational),
    #[error("total utilization {0} is not a positive integer; pad the system first")]
    NotFullyUtilized(Rational),
    #[error("utilization {0} outside (0, 1]")]
    Utilization(Rational),
}

/// Bin-packing heuristic used by the packing step.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PackingHeuristic {
    /// Largest first, each into the open bin with the most room.
    #[default]
    WorstFitDecreasing,
    /// Presentation order, each into the open bin with the most room.
    WorstFit,
    /// Largest first, each into the first open bin with room.
    FirstFitDecreasing,
}

impl std::str::FromStr for PackingHeuristic {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "worst-fit-decreasing" | "wfd" => Ok(PackingHeuristic::WorstFitDecreasing),
            "worst-fit" | "wf" => Ok(PackingHeuristic::WorstFit),
            "first-fit-decreasing" | "ffd" => Ok(PackingHeuristic::FirstFitDecreasing),
            other => Err(format!("unknown packing heuristic `{other}`")),
        }
    }
}

/// Complement of a server utilization.
pub fn dual_utilization(u: &Rational) -> Result<Rational, ReductionError> {
    if !u.is_positive() || *u >= Rational::one() {
        return Err(ReductionError::DualOutOfRange(u.clone()));
    }
    Ok(Rational::one() - u)
}

/// Partition `utilizations` into bins of total at most one such that any two
/// bins together exceed one.
///
/// Bins are returned as index lists. Members appear in input order and bins
/// are ordered by their first member, whatever order the heuristic visited
/// them in.
pub fn pack(utilizations: &[Rational], heuristic: PackingHeuristic) -> Result<Vec<Vec<usize>>, ReductionError> {
    for u in utilizations {
        if !u.is_positive() || *u > Rational::one() {
            return Err(ReductionError::Utilization(u.clone()));
        }
    }
    let mut order: Vec<usize> = (0..utilizations.len()).collect();
    if matches!(heuristic, PackingHeuristic::WorstFitDecreasing | PackingHeuristic::FirstFitDecreasing) {
        // stable: equal utilizations keep presentation order
        order.sort_by(|&a, &b| utilizations[b].cmp(&utilizations[a]));
    }
    let mut bins: Vec<(Rational, Vec<usize>)> = Vec::new();
    for i in order {
        let u = &utilizations[i];
        let target = match heuristic {
            PackingHeuristic::WorstFit | PackingHeuristic::WorstFitDecreasing => bins
                .iter()
                .enumerate()
                .filter(|(_, (load, _))| load + u <= Rational::one())
                // most room; ties to the lowest index
                .min_by(|(ia, (la, _)), (ib, (lb, _))| la.cmp(lb).then(ia.cmp(ib)))
                .map(|(k, _)| k),
            PackingHeuristic::FirstFitDecreasing => bins.iter().position(|(load, _)| load + u <= Rational::one()),
        };
        match target {
            Some(k) => {
                bins[k].0 += u;
                bins[k].1.push(i);
            }
            None => bins.push((u.clone(), vec![i])),
        }
    }
    let mut bins: Vec<Vec<usize>> = bins
        .into_iter()
        .map(|(_, mut members)| {
            members.sort_unstable();
            members
        })
        .collect();
    bins.sort_by_key(|b| b[0]);
    Ok(bins)
}

/// True when no two members could share a bin.
pub fn is_packed(utilizations: &[Rational]) -> bool {
    utilizations.len() <= 1
        || utilizations.iter().enumerate().all(|(i, a)| utilizations[i + 1..].iter().all(|b| a + b > Rational::one()))
}

/// One round of the reduction on a list of server utilizations: pack, set
/// aside the unit servers, dualize the rest.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReduceStep {
    pub packed: Vec<Rational>,
    pub bins: Vec<Vec<usize>>,
    /// Indices into `packed` that are unit servers.
    pub finished: Vec<usize>,
    /// Duals of the non-unit packed servers, in `packed` order.
    pub duals: Vec<Rational>,
}

pub fn reduce(utilizations: &[Rational], heuristic: PackingHeuristic) -> Result<ReduceStep, ReductionError> {
    let bins = pack(utilizations, heuristic)?;
    let packed: Vec<Rational> = bins.iter().map(|b| b.iter().map(|&i| &utilizations[i]).sum()).collect();
    let mut finished = Vec::new();
    let mut duals = Vec::new();
    for (k, u) in packed.iter().enumerate() {
        if *u == Rational::one() {
            finished.push(k);
        } else {
            duals.push(dual_utilization(u)?);
        }
    }
    Ok(ReduceStep { packed, bins, finished, duals })
}

/// Server utilizations seen at one reduction level.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LevelRow {
    pub level: u32,
    /// The servers to pack at this level (tasks at level zero, duals above).
    pub servers: Vec<Rational>,
    /// The packed servers.
    pub packed: Vec<Rational>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReductionForest {
    pub nodes: Vec<ReductionNode>,
    pub roots: Vec<NodeId>,
    pub rows: Vec<LevelRow>,
    pub heuristic: PackingHeuristic,
}

struct Draft {
    kind: NodeKind,
    utilization: Rational,
    level: u32,
    children: Vec<usize>,
}

pub fn build_forest(system: &TaskSystem, heuristic: PackingHeuristic) -> Result<ReductionForest, ReductionError> {
    let total = system.total_utilization();
    if !total.is_integer() || !total.is_positive() {
        return Err(ReductionError::NotFullyUtilized(total));
    }
    let mut drafts: Vec<Draft> = system
        .tasks
        .iter()
        .map(|t| Draft { kind: NodeKind::Task(t.id), utilization: t.utilization.clone(), level: 0, children: vec![] })
        .collect();
    let mut current: Vec<usize> = (0..drafts.len()).collect();
    let mut roots: Vec<usize> = Vec::new();
    let mut rows = Vec::new();
    let mut level = 0u32;

    loop {
        let utils: Vec<Rational> = current.iter().map(|&i| drafts[i].utilization.clone()).collect();
        let step = reduce(&utils, heuristic)?;
        debug_assert!(is_packed(&step.packed));
        rows.push(LevelRow { level, servers: utils, packed: step.packed.clone() });

        let mut open = Vec::new();
        for (bin, u) in step.bins.iter().zip(&step.packed) {
            let id = drafts.len();
            drafts.push(Draft {
                kind: NodeKind::Pack,
                utilization: u.clone(),
                level,
                children: bin.iter().map(|&k| current[k]).collect(),
            });
            if *u == Rational::one() {
                roots.push(id);
            } else {
                open.push(id);
            }
        }
        if open.is_empty() {
            break;
        }
        debug_assert!(open.len() >= 3, "an integer packed set of non-unit servers has at least three members");
        level += 1;
        current = open
            .into_iter()
            .map(|p| {
                let id = drafts.len();
                let utilization = dual_utilization(&drafts[p].utilization).expect("non-unit packed server");
                drafts.push(Draft { kind: NodeKind::Dual, utilization, level, children: vec![p] });
                id
            })
            .collect();
    }

    // number nodes in pre-order so ids are stable and parents precede children
    let mut order = Vec::with_capacity(drafts.len());
    let mut stack: Vec<usize> = roots.iter().rev().copied().collect();
    while let Some(i) = stack.pop() {
        order.push(i);
        stack.extend(drafts[i].children.iter().rev().copied());
    }
    let mut new_id = vec![u32::MAX; drafts.len()];
    for (k, &i) in order.iter().enumerate() {
        new_id[i] = k as u32;
    }
    let mut nodes: Vec<ReductionNode> = order
        .iter()
        .map(|&i| {
            let d = &drafts[i];
            ReductionNode {
                id: NodeId(new_id[i]),
                kind: d.kind,
                utilization: d.utilization.clone(),
                level: d.level,
                children: d.children.iter().map(|&c| NodeId(new_id[c])).collect(),
                parent: None,
            }
        })
        .collect();
    for k in 0..nodes.len() {
        for c in nodes[k].children.clone() {
            nodes[c.index()].parent = Some(NodeId(k as u32));
        }
    }
    let roots = roots.iter().map(|&i| NodeId(new_id[i])).collect();
    Ok(ReductionForest { nodes, roots, rows, heuristic })
}

impl ReductionForest {
    pub fn node(&self, id: NodeId) -> &ReductionNode {
        &self.nodes[id.index()]
    }

    /// Number of reduction levels: the highest root level.
    pub fn levels(&self) -> u32 {
        self.roots.iter().map(|&r| self.node(r).level).max().unwrap_or(0)
    }

    pub fn root_levels(&self) -> Vec<u32> {
        self.roots.iter().map(|&r| self.node(r).level).collect()
    }

    pub fn leaves(&self) -> impl Iterator<Item = (NodeId, TaskId)> + '_ {
        self.nodes.iter().filter_map(|n| match n.kind {
            NodeKind::Task(t) => Some((n.id, t)),
            _ => None,
        })
    }

    /// Tasks under each root, one list per root.
    pub fn proper_sets(&self) -> Vec<Vec<TaskId>> {
        self.roots
            .iter()
            .map(|&r| {
                let mut out = Vec::new();
                let mut stack = vec![r];
                while let Some(n) = stack.pop() {
                    let node = self.node(n);
                    if let NodeKind::Task(t) = node.kind {
                        out.push(t);
                    }
                    stack.extend(node.children.iter().rev().copied());
                }
                out
            })
            .collect()
    }

    /// Processors available at `level`: the real ones at level zero, the
    /// total dual utilization above.
    pub fn processors_at(&self, level: u32) -> u32 {
        let total: Rational = if level == 0 {
            self.nodes.iter().filter(|n| matches!(n.kind, NodeKind::Task(_))).map(|n| &n.utilization).sum()
        } else {
            self.nodes.iter().filter(|n| n.kind == NodeKind::Dual && n.level == level).map(|n| &n.utilization).sum()
        };
        total.to_i64().expect("level utilization is an integer") as u32
    }

    /// Post-order: every node after all of its descendants.
    pub fn bottom_up(&self) -> Vec<NodeId> {
        let mut out = Vec::with_capacity(self.nodes.len());
        for &r in &self.roots {
            let mut stack = vec![(r, false)];
            while let Some((n, expanded)) = stack.pop() {
                if expanded {
                    out.push(n);
                } else {
                    stack.push((n, true));
                    stack.extend(self.node(n).children.iter().rev().map(|&c| (c, false)));
                }
            }
        }
        out
    }

    /// Text dump: one line per node, then the utilization rows per level.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        writeln!(out, "# runsched forest v1").unwrap();
        writeln!(
            out,
            "heuristic {}",
            match self.heuristic {
                PackingHeuristic::WorstFitDecreasing => "worst-fit-decreasing",
                PackingHeuristic::WorstFit => "worst-fit",
                PackingHeuristic::FirstFitDecreasing => "first-fit-decreasing",
            }
        )
        .unwrap();
        writeln!(out, "levels {}", self.levels()).unwrap();
        let roots: Vec<String> = self.roots.iter().map(|r| r.to_string()).collect();
        writeln!(out, "roots {}", roots.join(" ")).unwrap();
        for n in &self.nodes {
            let kind = match n.kind {
                NodeKind::Task(t) => format!("task:{t}"),
                NodeKind::Pack => "pack".to_string(),
                NodeKind::Dual => "dual".to_string(),
            };
            let children: Vec<String> = n.children.iter().map(|c| c.to_string()).collect();
            writeln!(
                out,
                "node {} {} {} level={} children={}",
                n.id,
                kind,
                n.utilization,
                n.level,
                if children.is_empty() { "-".to_string() } else { children.join(",") }
            )
            .unwrap();
        }
        for row in &self.rows {
            let servers: Vec<String> = row.servers.iter().map(|u| u.to_string()).collect();
            let packed: Vec<String> = row.packed.iter().map(|u| u.to_string()).collect();
            writeln!(out, "row psi{} {}", row.level, servers.join(" ")).unwrap();
            writeln!(out, "row pack{} {}", row.level, packed.join(" ")).unwrap();
        }
        out
    }
}
