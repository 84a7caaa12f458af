//! Per-execution dynamic call trees built from enter/exit traces.
//!
//! Nodes live in an arena indexed by [`NodeId`]. Ids are assigned in Enter
//! order, so a parent always has a smaller id than its descendants and a
//! reverse scan over the arena visits children before parents.

use serde::{Deserialize, Serialize};

use crate::trace::{validate_trace, EventKind, MethodId, TestTrace, TraceError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NodeId(pub usize);

/// One call event: a vertex occurrence of the dynamic call graph.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CallNode {
    pub method: MethodId,
    pub thread: u64,
    pub t_start_ns: u64,
    pub duration_ns: u64,
    pub depth: usize,
    pub parent: Option<NodeId>,
    /// Calls issued by this frame, in time order.
    pub children: Vec<NodeId>,
}

impl CallNode {
    pub fn t_end_ns(&self) -> u64 {
        self.t_start_ns + self.duration_ns
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CallTree {
    pub test_name: MethodId,
    pub sample_index: u32,
    nodes: Vec<CallNode>,
    roots: Vec<NodeId>,
}

impl CallTree {
    pub fn nodes(&self) -> &[CallNode] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> &CallNode {
        &self.nodes[id.0]
    }

    /// Top-level frames, ordered by first Enter. A thread normally has one
    /// (the test method); a thread that returns to the top level and calls
    /// again contributes one root per top-level frame.
    pub fn roots(&self) -> &[NodeId] {
        &self.roots
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn ids(&self) -> impl DoubleEndedIterator<Item = NodeId> + ExactSizeIterator {
        (0..self.nodes.len()).map(NodeId)
    }

    pub fn subtree_size(&self, id: NodeId) -> usize {
        let mut count = 0;
        let mut stack = vec![id];
        while let Some(n) = stack.pop() {
            count += 1;
            stack.extend(self.node(n).children.iter().copied());
        }
        count
    }

    /// Earliest root start and latest root end, or `None` for an empty tree.
    pub fn span_ns(&self) -> Option<(u64, u64)> {
        let start = self.roots.iter().map(|r| self.node(*r).t_start_ns).min()?;
        let end = self.roots.iter().map(|r| self.node(*r).t_end_ns()).max()?;
        Some((start, end))
    }
}

/// Builds the call tree of one execution. The trace must be valid.
pub fn build_call_trees(trace: &TestTrace) -> Result<CallTree, TraceError> {
    let violations = validate_trace(trace);
    if !violations.is_empty() {
        return Err(TraceError::Invalid(violations));
    }

    let mut nodes: Vec<CallNode> = Vec::with_capacity(trace.enter_count());
    let mut roots = Vec::new();
    let mut open: std::collections::BTreeMap<u64, Vec<NodeId>> = Default::default();

    for event in &trace.events {
        let stack = open.entry(event.thread).or_default();
        match event.kind {
            EventKind::Enter => {
                let id = NodeId(nodes.len());
                let parent = stack.last().copied();
                match parent {
                    Some(p) => nodes[p.0].children.push(id),
                    None => roots.push(id),
                }
                nodes.push(CallNode {
                    method: event.method.clone(),
                    thread: event.thread,
                    t_start_ns: event.t_ns,
                    duration_ns: 0,
                    depth: stack.len(),
                    parent,
                    children: Vec::new(),
                });
                stack.push(id);
            }
            EventKind::Exit => {
                // validated above: the stack top is the matching frame
                let id = stack.pop().expect("validated trace");
                let node = &mut nodes[id.0];
                node.duration_ns = event.t_ns - node.t_start_ns;
            }
        }
    }

    Ok(CallTree {
        test_name: trace.test_name.clone(),
        sample_index: trace.sample_index,
        nodes,
        roots,
    })
}

/// The calls issued by `id`, one entry per call event.
pub fn adjacency(tree: &CallTree, id: NodeId) -> &[NodeId] {
    &tree.node(id).children
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MethodInterval {
    pub node: NodeId,
    pub parent: Option<NodeId>,
    pub method: MethodId,
    pub thread: u64,
    pub t_start_ns: u64,
    pub duration_ns: u64,
    pub depth: usize,
}

/// One interval per node, ordered by start time (ties keep Enter order).
pub fn method_intervals(tree: &CallTree) -> Vec<MethodInterval> {
    let mut out: Vec<MethodInterval> = tree
        .ids()
        .map(|id| {
            let n = tree.node(id);
            MethodInterval {
                node: id,
                parent: n.parent,
                method: n.method.clone(),
                thread: n.thread,
                t_start_ns: n.t_start_ns,
                duration_ns: n.duration_ns,
                depth: n.depth,
            }
        })
        .collect();
    out.sort_by_key(|i| (i.t_start_ns, i.node));
    out
}
