//! Prefix trees of histories.
//!
//! Node 0 is the empty history; every other node appends one step to its
//! parent. Sets of histories produced by one strong adversary branch only at
//! flip responses, but the checkers accept any prefix tree.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap};

use serde::{Deserialize, Serialize};
use slin_engine::RunRecord;
use slin_history::{History, ObjectId, ObjectInfo, ProcessId, StepRecord, Value};

use crate::CheckError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeNode {
    pub parent: Option<usize>,
    pub step: Option<StepRecord>,
    pub children: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HistoryTree {
    registry: History,
    nodes: Vec<TreeNode>,
}

#[derive(Serialize, Deserialize)]
struct NodeJson {
    id: usize,
    parent: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    appended_step: Option<StepRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    coin_outcome: Option<Value>,
}

#[derive(Serialize, Deserialize)]
struct TreeJson {
    #[serde(default)]
    processes: Vec<ProcessId>,
    #[serde(default)]
    objects: Vec<ObjectInfo>,
    #[serde(default)]
    nodes: Vec<NodeJson>,
}

fn merge_registry(into: &mut History, from: &History) -> Result<(), CheckError> {
    into.processes.extend(from.processes.iter().copied());
    for (id, info) in &from.objects {
        match into.objects.get(id) {
            Some(existing) if existing != info => {
                return Err(CheckError::MalformedTree(format!(
                    "object {id} is registered twice with different descriptions"
                )))
            }
            Some(_) => {}
            None => {
                into.objects.insert(*id, info.clone());
            }
        }
    }
    Ok(())
}

impl HistoryTree {
    /// A tree holding only the empty history over `registry`'s processes and
    /// objects.
    pub fn new(registry: &History) -> Self {
        HistoryTree {
            registry: registry.empty_like(),
            nodes: vec![TreeNode {
                parent: None,
                step: None,
                children: Vec::new(),
            }],
        }
    }

    pub fn registry(&self) -> &History {
        &self.registry
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.len() == 1
    }

    pub fn node(&self, v: usize) -> &TreeNode {
        &self.nodes[v]
    }

    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    pub fn children(&self, v: usize) -> &[usize] {
        &self.nodes[v].children
    }

    pub fn leaves(&self) -> Vec<usize> {
        (0..self.nodes.len())
            .filter(|v| self.nodes[*v].children.is_empty())
            .collect()
    }

    /// The child of `v` that appends `step`, created if absent.
    pub fn child(&mut self, v: usize, step: &StepRecord) -> usize {
        if let Some(c) = self.nodes[v].children.iter().copied().find(|c| {
            self.nodes[*c]
                .step
                .as_ref()
                .is_some_and(|s| s.same_event(step))
        }) {
            return c;
        }
        let mut step = step.clone();
        step.index = self.depth(v);
        let id = self.nodes.len();
        self.nodes.push(TreeNode {
            parent: Some(v),
            step: Some(step),
            children: Vec::new(),
        });
        self.nodes[v].children.push(id);
        id
    }

    /// Adds `h` as a path from the root; returns its last node.
    pub fn insert(&mut self, h: &History) -> Result<usize, CheckError> {
        merge_registry(&mut self.registry, h)?;
        let mut v = 0;
        for s in &h.steps {
            v = self.child(v, s);
        }
        Ok(v)
    }

    pub fn from_histories(hs: &[History]) -> Result<Self, CheckError> {
        let first = hs
            .first()
            .ok_or_else(|| CheckError::MalformedTree("no histories".into()))?;
        let mut t = HistoryTree::new(first);
        for h in hs {
            t.insert(h)?;
        }
        t.validate()?;
        Ok(t)
    }

    /// The tree of the interpreted histories of `runs`.
    pub fn from_runs(runs: &[(Vec<Value>, RunRecord)]) -> Result<Self, CheckError> {
        let hs: Vec<History> = runs.iter().map(|(_, r)| r.history.interpret()).collect();
        Self::from_histories(&hs)
    }

    /// The tree of `Γ(H‖O)` over the histories of `runs`.
    pub fn from_object_runs(
        runs: &[(Vec<Value>, RunRecord)],
        o: ObjectId,
    ) -> Result<Self, CheckError> {
        let hs = runs
            .iter()
            .map(|(_, r)| Ok(r.history.project_method_intervals(o)?.interpret()))
            .collect::<Result<Vec<_>, CheckError>>()?;
        Self::from_histories(&hs)
    }

    pub fn depth(&self, mut v: usize) -> usize {
        let mut d = 0;
        while let Some(p) = self.nodes[v].parent {
            d += 1;
            v = p;
        }
        d
    }

    /// The history ending at node `v`.
    pub fn history(&self, mut v: usize) -> History {
        let mut steps = Vec::new();
        while let Some(p) = self.nodes[v].parent {
            steps.extend(self.nodes[v].step.clone());
            v = p;
        }
        let mut h = self.registry.empty_like();
        for s in steps.into_iter().rev() {
            h.push_step(s);
        }
        h
    }

    /// The node whose history has the same events as `h`.
    pub fn locate(&self, h: &History) -> Option<usize> {
        let mut v = 0;
        for s in &h.steps {
            v = self.nodes[v].children.iter().copied().find(|c| {
                self.nodes[*c]
                    .step
                    .as_ref()
                    .is_some_and(|t| t.same_event(s))
            })?;
        }
        Some(v)
    }

    /// Whether every node with several children branches on the response of
    /// one flip.
    pub fn branches_at_flips(&self) -> bool {
        self.nodes.iter().all(|n| {
            if n.children.len() < 2 {
                return true;
            }
            let steps: Vec<&StepRecord> = n
                .children
                .iter()
                .filter_map(|c| self.nodes[*c].step.as_ref())
                .collect();
            steps.iter().all(|s| s.is_flip() && s.is_rsp())
                && steps
                    .iter()
                    .all(|s| s.process == steps[0].process && s.object == steps[0].object)
        })
    }

    /// Checks the tree's shape and that every leaf history is well formed.
    pub fn validate(&self) -> Result<(), CheckError> {
        let bad = |m: String| Err(CheckError::MalformedTree(m));
        let root = &self.nodes[0];
        if root.parent.is_some() || root.step.is_some() {
            return bad("node 0 must be the empty root".into());
        }
        for (v, n) in self.nodes.iter().enumerate().skip(1) {
            match n.parent {
                Some(p) if p < v && self.nodes[p].children.contains(&v) => {}
                _ => return bad(format!("node {v} has no valid parent")),
            }
            if n.step.is_none() {
                return bad(format!("node {v} appends no step"));
            }
        }
        for (v, n) in self.nodes.iter().enumerate() {
            for (i, a) in n.children.iter().enumerate() {
                if self.nodes.get(*a).and_then(|c| c.parent) != Some(v) {
                    return bad(format!("node {v} lists {a} as a child"));
                }
                for b in &n.children[i + 1..] {
                    let (sa, sb) = (&self.nodes[*a].step, &self.nodes[*b].step);
                    if let (Some(x), Some(y)) = (sa, sb) {
                        if x.same_event(y) {
                            return bad(format!("nodes {a} and {b} duplicate a step"));
                        }
                    }
                }
            }
        }
        for leaf in self.leaves() {
            self.history(leaf)
                .validate()
                .map_err(|e| CheckError::MalformedTree(format!("history at node {leaf}: {e}")))?;
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        let nodes = self
            .nodes
            .iter()
            .enumerate()
            .map(|(id, n)| NodeJson {
                id,
                parent: n.parent,
                coin_outcome: n
                    .step
                    .as_ref()
                    .filter(|s| s.is_flip() && s.is_rsp())
                    .map(|s| s.payload.clone()),
                appended_step: n.step.clone(),
            })
            .collect();
        let t = TreeJson {
            processes: self.registry.processes.iter().copied().collect(),
            objects: self.registry.objects.values().cloned().collect(),
            nodes,
        };
        serde_json::to_string_pretty(&t).expect("tree serializes")
    }

    /// Parses the node-list format. Ids may come in any order; the result is
    /// renumbered so that parents precede children.
    pub fn from_json(text: &str) -> Result<Self, CheckError> {
        let bad = |m: String| CheckError::MalformedTree(m);
        let t: TreeJson =
            serde_json::from_str(text).map_err(|e| CheckError::Json(e.to_string()))?;
        let registry = History::new(t.processes, t.objects);
        // an empty node list is the tree of the empty history
        if t.nodes.is_empty() {
            return Ok(HistoryTree::new(&registry));
        }
        let mut by_id: BTreeMap<usize, &NodeJson> = BTreeMap::new();
        for n in &t.nodes {
            if by_id.insert(n.id, n).is_some() {
                return Err(bad(format!("duplicate node id {}", n.id)));
            }
        }
        let roots: Vec<usize> = t
            .nodes
            .iter()
            .filter(|n| n.parent.is_none())
            .map(|n| n.id)
            .collect();
        let [root] = roots[..] else {
            return Err(bad(format!("expected one root, found {}", roots.len())));
        };
        if by_id[&root].appended_step.is_some() {
            return Err(bad("the root appends a step".into()));
        }
        let mut kids: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for n in &t.nodes {
            if let Some(p) = n.parent {
                if !by_id.contains_key(&p) {
                    return Err(bad(format!("node {} has unknown parent {p}", n.id)));
                }
                kids.entry(p).or_default().push(n.id);
            }
        }
        // smallest ready id first, so topologically numbered input keeps its ids
        let mut tree = HistoryTree::new(&registry);
        let mut placed: BTreeMap<usize, usize> = BTreeMap::from([(root, 0)]);
        let mut ready: BinaryHeap<Reverse<usize>> = kids
            .get(&root)
            .into_iter()
            .flatten()
            .map(|c| Reverse(*c))
            .collect();
        while let Some(Reverse(c)) = ready.pop() {
            let n = by_id[&c];
            let parent = placed[&n.parent.expect("only the root lacks a parent")];
            let step = n
                .appended_step
                .as_ref()
                .ok_or_else(|| bad(format!("node {c} appends no step")))?;
            if let Some(outcome) = &n.coin_outcome {
                if !(step.is_flip() && step.is_rsp() && step.payload == *outcome) {
                    return Err(bad(format!(
                        "node {c} has a coin outcome but no matching flip response"
                    )));
                }
            }
            let before = tree.len();
            let v = tree.child(parent, step);
            if v < before {
                return Err(bad(format!("node {c} duplicates a sibling")));
            }
            placed.insert(c, v);
            ready.extend(kids.get(&c).into_iter().flatten().map(|k| Reverse(*k)));
        }
        let seen = placed;
        if seen.len() != t.nodes.len() {
            return Err(bad("some nodes are unreachable from the root".into()));
        }
        tree.validate()?;
        Ok(tree)
    }
}
