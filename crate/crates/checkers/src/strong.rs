//! Strong linearizability of a history tree.
//!
//! The search assigns each node a sequential history extending its parent's.
//! A node's image is accepted only if every child subtree can be completed
//! from it; extensions are tried shortest first.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::rc::Rc;

use serde_json::json;
use slin_history::{History, ObjectId, SeqSpec, SpecState, StepRecord, Value};

use crate::table::{bit, OpTable};
use crate::tree::HistoryTree;
use crate::{CheckError, OpKey, MAX_PENDING, MAX_TREE_NODES};

const MAX_VISITS: usize = 2_000_000;
const MAX_FRONTIER: usize = 200_000;

/// A sequential history for every node of a tree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub images: BTreeMap<usize, History>,
}

impl Witness {
    pub fn image(&self, v: usize) -> Option<&History> {
        self.images.get(&v)
    }

    /// Node id mapped to its image's steps.
    pub fn to_json(&self) -> serde_json::Value {
        let map: serde_json::Map<String, serde_json::Value> = self
            .images
            .iter()
            .map(|(v, h)| (v.to_string(), json!(h.steps)))
            .collect();
        serde_json::Value::Object(map)
    }

    pub fn from_json(tree: &HistoryTree, text: &str) -> Result<Self, CheckError> {
        let raw: BTreeMap<usize, Vec<StepRecord>> =
            serde_json::from_str(text).map_err(|e| CheckError::Json(e.to_string()))?;
        let images = raw
            .into_iter()
            .map(|(v, steps)| {
                let mut h = tree.registry().empty_like();
                for s in steps {
                    h.push_step(s);
                }
                (v, h)
            })
            .collect();
        Ok(Witness { images })
    }
}

/// Which extensions the search tries first at each node.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Preference {
    /// Fewest newly committed operations first.
    #[default]
    Fewest,
    /// Most newly committed operations first; pending operations are
    /// committed eagerly, which tends to place flips late.
    Most,
}

type Image = Vec<(OpKey, Value)>;
type MemoKey = (usize, u128, Vec<SpecState>, Vec<(usize, Value)>);
/// Committed-ops mask, object states, and the extension so far.
type Partial = (u128, Vec<SpecState>, Vec<(usize, Value)>);

struct Search<'t> {
    tree: &'t HistoryTree,
    specs: &'t BTreeMap<ObjectId, SeqSpec>,
    tables: HashMap<usize, Rc<OpTable>>,
    /// Successful nodes map to the images chosen for their children.
    memo: HashMap<MemoKey, Option<Vec<Image>>>,
    visits: usize,
    preference: Preference,
}

impl Search<'_> {
    fn table(&mut self, v: usize) -> Result<Rc<OpTable>, CheckError> {
        if let Some(t) = self.tables.get(&v) {
            return Ok(t.clone());
        }
        let h = self.tree.history(v).interpret();
        let t = OpTable::new(&h, self.specs)?;
        if t.pending() > MAX_PENDING {
            return Err(CheckError::TooLarge(format!(
                "node {v} has {} pending operations (limit {MAX_PENDING})",
                t.pending()
            )));
        }
        let t = Rc::new(t);
        self.tables.insert(v, t.clone());
        Ok(t)
    }

    fn key(&mut self, v: usize, image: &Image) -> Result<Option<MemoKey>, CheckError> {
        let t = self.table(v)?;
        let Some((done, states)) = t.replay(image) else {
            return Ok(None);
        };
        let assumed = image
            .iter()
            .filter_map(|(k, r)| {
                let i = t.index_of(*k)?;
                t.entries[i].ret.is_none().then(|| (i, r.clone()))
            })
            .collect();
        Ok(Some((v, done, states, assumed)))
    }

    /// Every way to extend `image` into a linearization of node `v`'s
    /// history, fewest new operations first.
    fn extensions(&mut self, v: usize, image: &Image) -> Result<Vec<Image>, CheckError> {
        let t = self.table(v)?;
        let Some((done, states)) = t.replay(image) else {
            return Ok(Vec::new());
        };
        let required = t.required();
        let mut out = Vec::new();
        let mut seen: HashSet<Partial> = HashSet::new();
        let mut frontier: Vec<Partial> = vec![(done, states, Vec::new())];
        while !frontier.is_empty() {
            let mut next = Vec::new();
            for (done, states, seq) in frontier {
                if done & required == required {
                    out.push(t.keyed(&seq));
                }
                for &i in &t.order {
                    if !t.enabled(i, done) {
                        continue;
                    }
                    let mut st = states.clone();
                    let Some(r) = t.step(i, &mut st, None) else {
                        continue;
                    };
                    let mut seq2 = seq.clone();
                    seq2.push((i, r));
                    let mut pend: Vec<(usize, Value)> = seq2
                        .iter()
                        .filter(|(j, _)| t.entries[*j].ret.is_none())
                        .cloned()
                        .collect();
                    pend.sort();
                    if seen.insert((done | bit(i), st.clone(), pend)) {
                        next.push((done | bit(i), st, seq2));
                    }
                }
            }
            if seen.len() > MAX_FRONTIER {
                return Err(CheckError::TooLarge(format!(
                    "more than {MAX_FRONTIER} partial extensions at node {v}"
                )));
            }
            frontier = next;
        }
        if self.preference == Preference::Most {
            out.reverse();
        }
        Ok(out)
    }

    /// Whether `image`, already valid at `v`, extends to all of `v`'s subtree.
    fn solve(&mut self, v: usize, image: &Image) -> Result<bool, CheckError> {
        self.visits += 1;
        if self.visits > MAX_VISITS {
            return Err(CheckError::TooLarge(format!(
                "search exceeded {MAX_VISITS} steps"
            )));
        }
        let key = self.key(v, image)?.expect("image is valid at its node");
        if let Some(hit) = self.memo.get(&key) {
            return Ok(hit.is_some());
        }
        let mut chosen = Vec::new();
        for c in self.tree.children(v).to_vec() {
            let mut found = None;
            for ext in self.extensions(c, image)? {
                let mut img = image.clone();
                img.extend(ext);
                if self.solve(c, &img)? {
                    found = Some(img);
                    break;
                }
            }
            match found {
                Some(img) => chosen.push(img),
                None => {
                    self.memo.insert(key, None);
                    return Ok(false);
                }
            }
        }
        self.memo.insert(key, Some(chosen));
        Ok(true)
    }

    fn collect(
        &mut self,
        v: usize,
        image: Image,
        out: &mut BTreeMap<usize, History>,
    ) -> Result<(), CheckError> {
        let key = self.key(v, &image)?.expect("image is valid at its node");
        let chosen = self.memo[&key].clone().expect("node was solved");
        let t = self.table(v)?;
        let seq: Vec<(usize, Value)> = image
            .iter()
            .map(|(k, r)| (t.index_of(*k).expect("op in table"), r.clone()))
            .collect();
        out.insert(v, t.to_history(self.tree.registry(), &seq));
        for (c, img) in self.tree.children(v).to_vec().into_iter().zip(chosen) {
            self.collect(c, img, out)?;
        }
        Ok(())
    }
}

/// Finds a function from nodes to sequential histories such that every image
/// linearizes its node's interpreted history and every child's image extends
/// its parent's. `None` when no such function exists.
pub fn check_strong_lin(
    tree: &HistoryTree,
    specs: &BTreeMap<ObjectId, SeqSpec>,
) -> Result<Option<Witness>, CheckError> {
    check_strong_lin_with(tree, specs, Preference::Fewest)
}

/// [`check_strong_lin`] with an explicit extension order. The answer does not
/// depend on it; the witness may.
pub fn check_strong_lin_with(
    tree: &HistoryTree,
    specs: &BTreeMap<ObjectId, SeqSpec>,
    preference: Preference,
) -> Result<Option<Witness>, CheckError> {
    if tree.len() > MAX_TREE_NODES {
        return Err(CheckError::TooLarge(format!(
            "{} tree nodes (limit {MAX_TREE_NODES})",
            tree.len()
        )));
    }
    tree.validate()?;
    let mut s = Search {
        tree,
        specs,
        tables: HashMap::new(),
        memo: HashMap::new(),
        visits: 0,
        preference,
    };
    for root in s.extensions(0, &Vec::new())? {
        if s.solve(0, &root)? {
            let mut images = BTreeMap::new();
            s.collect(0, root, &mut images)?;
            return Ok(Some(Witness { images }));
        }
    }
    Ok(None)
}
