//! Binary merge trees, cuts, and their JSON / Newick encodings.
//!
//! Node ids follow creation order: leaves are `0..m` (the datum's row index),
//! and the node created by the `t`-th merge (1-based) has id `m + t - 1`.
//!
//! # JSON layout
//!
//! ```text
//! {
//!   "format": "bregtree-dendrogram",
//!   "version": 1,
//!   "model": "<model tag>",
//!   "stat_layout": "<description of the stat vector>",
//!   "num_leaves": m,
//!   "nodes": [
//!     {"id": 0, "children": null, "size": 1, "merge_cost": null,
//!      "merge_order": null, "stat": [..]},
//!     ...
//!     {"id": m, "children": [a, b], "size": 2, "merge_cost": 1.5e0,
//!      "merge_order": 1, "stat": [..]}
//!   ]
//! }
//! ```
//!
//! `size` counts observations: 1 per point, or the token count of a
//! document under the multinomial model.
//!
//! Floats are written with 17 significant digits; an infinite merge cost is
//! the string `"inf"`. Children are listed smaller id first.

use std::fmt::Write as _;

use serde_json::Value;

use crate::bregman::StatVec;
use crate::cluster::ClusterSummary;
use crate::error::{Error, Result};

pub const JSON_FORMAT: &str = "bregtree-dendrogram";
pub const JSON_VERSION: u64 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub summary: ClusterSummary,
    /// `(smaller id, larger id)` for internal nodes.
    pub children: Option<(usize, usize)>,
    pub merge_cost: Option<f64>,
    /// 1-based position in the merge sequence.
    pub merge_order: Option<usize>,
}

impl Node {
    pub fn id(&self) -> usize {
        self.summary.id
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_none()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dendrogram {
    nodes: Vec<Node>,
    num_leaves: usize,
    model: String,
    stat_layout: String,
}

impl Dendrogram {
    /// Starts a tree from leaf summaries whose ids must be `0..m`.
    pub(crate) fn from_leaves(leaves: Vec<ClusterSummary>, model: &str) -> Self {
        let num_leaves = leaves.len();
        let mut nodes = Vec::with_capacity(2 * num_leaves.max(1) - 1);
        for (i, s) in leaves.into_iter().enumerate() {
            debug_assert_eq!(s.id, i);
            nodes.push(Node {
                summary: s,
                children: None,
                merge_cost: None,
                merge_order: None,
            });
        }
        Dendrogram {
            nodes,
            num_leaves,
            model: model.to_string(),
            stat_layout: String::new(),
        }
    }

    pub(crate) fn push_merge(&mut self, left: usize, right: usize, cost: f64, summary: ClusterSummary) {
        debug_assert!(left < right);
        debug_assert_eq!(summary.id, self.nodes.len());
        let order = self.nodes.len() - self.num_leaves + 1;
        self.nodes.push(Node {
            summary,
            children: Some((left, right)),
            merge_cost: Some(cost),
            merge_order: Some(order),
        });
    }

    pub fn with_model(mut self, model: impl Into<String>) -> Self {
        self.model = model.into();
        self
    }

    pub fn with_stat_layout(mut self, layout: impl Into<String>) -> Self {
        self.stat_layout = layout.into();
        self
    }

    pub fn num_leaves(&self) -> usize {
        self.num_leaves
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, id: usize) -> &Node {
        &self.nodes[id]
    }

    pub fn model(&self) -> &str {
        &self.model
    }

    pub fn stat_layout(&self) -> &str {
        &self.stat_layout
    }

    pub fn root(&self) -> &Node {
        self.nodes.last().expect("dendrogram has at least one node")
    }

    /// Internal nodes in merge order.
    pub fn merges(&self) -> &[Node] {
        &self.nodes[self.num_leaves..]
    }

    /// Parent id of every node; `None` for the root.
    pub fn parents(&self) -> Vec<Option<usize>> {
        let mut parent = vec![None; self.nodes.len()];
        for n in self.merges() {
            let (a, b) = n.children.expect("internal node");
            parent[a] = Some(n.id());
            parent[b] = Some(n.id());
        }
        parent
    }

    /// Leaf indices under `id`, ascending.
    pub fn leaves_under(&self, id: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![id];
        while let Some(n) = stack.pop() {
            match self.nodes[n].children {
                None => out.push(n),
                Some((a, b)) => {
                    stack.push(a);
                    stack.push(b);
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Node ids of the `k` clusters left after undoing the last `k - 1`
    /// merges, ascending.
    pub fn cut_ids(&self, k: usize) -> Result<Vec<usize>> {
        let m = self.num_leaves;
        if k == 0 || k > m {
            return Err(Error::usage(format!("cut size {k} outside 1..={m}")));
        }
        let mut ids = vec![self.nodes.len() - 1];
        for undone in (self.nodes.len() - (k - 1)..self.nodes.len()).rev() {
            let pos = ids.iter().position(|&i| i == undone).expect("cut frontier contains node");
            ids.swap_remove(pos);
            let (a, b) = self.nodes[undone].children.expect("internal node");
            ids.push(a);
            ids.push(b);
        }
        ids.sort_unstable();
        Ok(ids)
    }

    pub fn cut(&self, k: usize) -> Result<Vec<ClusterSummary>> {
        Ok(self
            .cut_ids(k)?
            .into_iter()
            .map(|i| self.nodes[i].summary.clone())
            .collect())
    }

    /// Structural checks: leaf count, child ordering, sizes, merge orders.
    pub fn validate(&self) -> Result<()> {
        let m = self.num_leaves;
        if m == 0 || self.nodes.len() != 2 * m - 1 {
            return Err(Error::Format(format!(
                "{} nodes for {m} leaves",
                self.nodes.len()
            )));
        }
        let mut has_parent = vec![false; self.nodes.len()];
        for (i, n) in self.nodes.iter().enumerate() {
            if n.id() != i {
                return Err(Error::Format(format!("node at position {i} has id {}", n.id())));
            }
            match (i < m, n.children) {
                (true, None) => {}
                (false, Some((a, b))) => {
                    if !(a < b && b < i) {
                        return Err(Error::Format(format!("node {i} has children ({a}, {b})")));
                    }
                    for c in [a, b] {
                        if has_parent[c] {
                            return Err(Error::Format(format!("node {c} has two parents")));
                        }
                        has_parent[c] = true;
                    }
                    let size = self.nodes[a].summary.size + self.nodes[b].summary.size;
                    if n.summary.size != size {
                        return Err(Error::Format(format!("node {i} size mismatch")));
                    }
                    if n.merge_order != Some(i - m + 1) {
                        return Err(Error::Format(format!("node {i} has merge order {:?}", n.merge_order)));
                    }
                }
                _ => return Err(Error::Format(format!("node {i} is misplaced"))),
            }
        }
        Ok(())
    }

    /// Newick string; each edge length is the parent's merge cost.
    pub fn to_newick(&self) -> String {
        enum Step {
            Open(usize),
            Sep,
            Close(usize),
        }
        let root = self.nodes.len() - 1;
        let parent = self.parents();
        let branch = |id: usize, out: &mut String| {
            if let Some(p) = parent[id] {
                let cost = self.nodes[p].merge_cost.unwrap_or(0.0);
                let _ = write!(out, ":{}", fmt_newick(cost));
            }
        };
        let mut out = String::new();
        let mut stack = vec![Step::Open(root)];
        while let Some(step) = stack.pop() {
            match step {
                Step::Open(id) => match self.nodes[id].children {
                    None => {
                        let _ = write!(out, "{id}");
                        branch(id, &mut out);
                    }
                    Some((a, b)) => {
                        out.push('(');
                        stack.push(Step::Close(id));
                        stack.push(Step::Open(b));
                        stack.push(Step::Sep);
                        stack.push(Step::Open(a));
                    }
                },
                Step::Sep => out.push(','),
                Step::Close(id) => {
                    let _ = write!(out, "){id}");
                    branch(id, &mut out);
                }
            }
        }
        out.push(';');
        out
    }

    pub fn to_json(&self) -> String {
        let mut s = String::new();
        s.push_str("{\n");
        let _ = writeln!(s, "  \"format\": \"{JSON_FORMAT}\",");
        let _ = writeln!(s, "  \"version\": {JSON_VERSION},");
        let _ = writeln!(s, "  \"model\": {},", Value::String(self.model.clone()));
        let _ = writeln!(s, "  \"stat_layout\": {},", Value::String(self.stat_layout.clone()));
        let _ = writeln!(s, "  \"num_leaves\": {},", self.num_leaves);
        s.push_str("  \"nodes\": [\n");
        for (i, n) in self.nodes.iter().enumerate() {
            s.push_str("    {\"id\": ");
            let _ = write!(s, "{}", n.id());
            s.push_str(", \"children\": ");
            match n.children {
                Some((a, b)) => {
                    let _ = write!(s, "[{a}, {b}]");
                }
                None => s.push_str("null"),
            }
            let _ = write!(s, ", \"size\": {}", n.summary.size);
            s.push_str(", \"merge_cost\": ");
            match n.merge_cost {
                Some(c) => s.push_str(&fmt_json_float(c)),
                None => s.push_str("null"),
            }
            s.push_str(", \"merge_order\": ");
            match n.merge_order {
                Some(o) => {
                    let _ = write!(s, "{o}");
                }
                None => s.push_str("null"),
            }
            s.push_str(", \"stat\": [");
            for (j, v) in n.summary.stat.iter().enumerate() {
                if j > 0 {
                    s.push_str(", ");
                }
                s.push_str(&fmt_json_float(*v));
            }
            s.push_str("]}");
            if i + 1 < self.nodes.len() {
                s.push(',');
            }
            s.push('\n');
        }
        s.push_str("  ]\n}\n");
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let v: Value = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        let fmt_err = |msg: &str| Error::Format(msg.to_string());
        if v.get("format").and_then(Value::as_str) != Some(JSON_FORMAT) {
            return Err(fmt_err("missing or unknown \"format\""));
        }
        if v.get("version").and_then(Value::as_u64) != Some(JSON_VERSION) {
            return Err(fmt_err("unsupported \"version\""));
        }
        let model = v.get("model").and_then(Value::as_str).unwrap_or_default().to_string();
        let stat_layout = v
            .get("stat_layout")
            .and_then(Value::as_str)
            .unwrap_or_default()
            .to_string();
        let num_leaves = v
            .get("num_leaves")
            .and_then(Value::as_u64)
            .ok_or_else(|| fmt_err("missing \"num_leaves\""))? as usize;
        let raw = v
            .get("nodes")
            .and_then(Value::as_array)
            .ok_or_else(|| fmt_err("missing \"nodes\""))?;
        let mut nodes = Vec::with_capacity(raw.len());
        for n in raw {
            let field = |k: &str| n.get(k).ok_or_else(|| Error::Format(format!("node missing \"{k}\"")));
            let id = field("id")?.as_u64().ok_or_else(|| fmt_err("bad id"))? as usize;
            let size = field("size")?.as_u64().ok_or_else(|| fmt_err("bad size"))? as usize;
            let children = match field("children")? {
                Value::Null => None,
                Value::Array(c) if c.len() == 2 => {
                    let a = c[0].as_u64().ok_or_else(|| fmt_err("bad child"))? as usize;
                    let b = c[1].as_u64().ok_or_else(|| fmt_err("bad child"))? as usize;
                    Some((a, b))
                }
                _ => return Err(fmt_err("bad children")),
            };
            let merge_cost = match field("merge_cost")? {
                Value::Null => None,
                other => Some(parse_json_float(other)?),
            };
            let merge_order = match field("merge_order")? {
                Value::Null => None,
                o => Some(o.as_u64().ok_or_else(|| fmt_err("bad merge_order"))? as usize),
            };
            let stat = field("stat")?
                .as_array()
                .ok_or_else(|| fmt_err("bad stat"))?
                .iter()
                .map(parse_json_float)
                .collect::<Result<Vec<f64>>>()?;
            let stat = StatVec::new(stat).map_err(|e| Error::Format(e.to_string()))?;
            nodes.push(Node {
                summary: ClusterSummary::new(id, size, stat).map_err(|e| Error::Format(e.to_string()))?,
                children,
                merge_cost,
                merge_order,
            });
        }
        let tree = Dendrogram {
            nodes,
            num_leaves,
            model,
            stat_layout,
        };
        tree.validate()?;
        Ok(tree)
    }
}

fn fmt_json_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x > 0.0 {
        "\"inf\"".to_string()
    } else {
        "\"-inf\"".to_string()
    }
}

fn parse_json_float(v: &Value) -> Result<f64> {
    match v {
        Value::Number(n) => n.as_f64().ok_or_else(|| Error::Format("bad number".into())),
        Value::String(s) if s == "inf" => Ok(f64::INFINITY),
        Value::String(s) if s == "-inf" => Ok(f64::NEG_INFINITY),
        _ => Err(Error::Format(format!("expected a number, found {v}"))),
    }
}

fn fmt_newick(x: f64) -> String {
    if x.is_finite() {
        format!("{x}")
    } else {
        "inf".to_string()
    }
}
