#![allow(dead_code)]

use apienergy_core::trace::{MethodId, TestTrace, TraceEvent};
use proptest::prelude::*;

pub const METHODS: &[&str] = &[
    "app.Main::run",
    "app.util.Helper::help",
    "app.util.Helper::other",
    "com.lib.Codec::encode",
    "java.util.HashMap::put",
    "java.util.ArrayList::add",
    "java.lang.String::trim",
    "android.os.Parcel::writeInt",
    "android.util.Log::d",
    "javax.crypto.Cipher::init",
];

pub fn mid(s: &str) -> MethodId {
    s.parse().unwrap()
}

/// Oracle classifier for the default platform rules, written against the
/// rendered name rather than the classifier type.
pub fn is_api(name: &str) -> bool {
    ["android.", "java.", "javax."].iter().any(|p| name.starts_with(p))
}

/// A rooted tree as a parent array; `parent[i] < i`.
#[derive(Debug, Clone)]
pub struct GenTree {
    pub parent: Vec<Option<usize>>,
    pub method: Vec<usize>,
}

impl GenTree {
    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn children(&self, n: usize) -> Vec<usize> {
        (0..self.len()).filter(|&c| self.parent[c] == Some(n)).collect()
    }

    pub fn name(&self, n: usize) -> &'static str {
        METHODS[self.method[n]]
    }

    pub fn depth(&self, n: usize) -> usize {
        let mut d = 0;
        let mut cur = n;
        while let Some(p) = self.parent[cur] {
            d += 1;
            cur = p;
        }
        d
    }

    /// Builds from raw choices: node `i > 0` hangs under one of the earlier
    /// nodes that still has room below it.
    pub fn from_choices(choices: &[(u32, usize)], max_depth: usize) -> Self {
        let mut parent = vec![None];
        let mut depth = vec![0usize];
        let mut method = vec![choices.first().map_or(0, |c| c.1 % METHODS.len())];
        for &(pick, m) in choices.iter().skip(1) {
            let open: Vec<usize> = (0..parent.len()).filter(|&i| depth[i] + 1 < max_depth).collect();
            if open.is_empty() {
                break;
            }
            let p = open[pick as usize % open.len()];
            parent.push(Some(p));
            depth.push(depth[p] + 1);
            method.push(m % METHODS.len());
        }
        Self { parent, method }
    }

    /// Emits a single-thread trace in preorder. Returns the trace and, for
    /// each emitted node in Enter order, its index in `self`.
    pub fn to_trace(&self, step_ns: &[u64]) -> (TestTrace, Vec<usize>) {
        let mut events = Vec::new();
        let mut order = Vec::new();
        let mut t = 0u64;
        let mut k = 0usize;
        let mut next_step = || {
            let s = step_ns.get(k).copied().unwrap_or(1);
            k += 1;
            s
        };
        fn walk(
            tree: &GenTree,
            n: usize,
            t: &mut u64,
            next: &mut dyn FnMut() -> u64,
            events: &mut Vec<TraceEvent>,
            order: &mut Vec<usize>,
        ) {
            order.push(n);
            events.push(TraceEvent::enter(mid(tree.name(n)), 1, *t));
            for c in tree.children(n) {
                *t += next();
                walk(tree, c, t, next, events, order);
            }
            *t += next();
            events.push(TraceEvent::exit(mid(tree.name(n)), 1, *t));
        }
        walk(self, 0, &mut t, &mut next_step, &mut events, &mut order);
        (
            TestTrace {
                test_name: mid("app.SuiteTest::testCase"),
                sample_index: 0,
                events,
            },
            order,
        )
    }

    /// Appends a new leaf under `parent`.
    pub fn with_leaf(&self, parent: usize, method: usize) -> Self {
        let mut t = self.clone();
        t.parent.push(Some(parent));
        t.method.push(method);
        t
    }
}

/// Post-order brute force of the utilization recursion, keyed by the
/// indices of `tree`.
pub fn brute_force_uapi(tree: &GenTree) -> Vec<u64> {
    fn subtree_has_api(tree: &GenTree, n: usize) -> bool {
        is_api(tree.name(n)) || tree.children(n).iter().any(|&c| subtree_has_api(tree, c))
    }
    fn value(tree: &GenTree, n: usize, pruned: bool, out: &mut Vec<u64>) -> u64 {
        let kids = tree.children(n);
        if pruned {
            for c in kids {
                value(tree, c, true, out);
            }
            out[n] = 0;
            return 0;
        }
        if is_api(tree.name(n)) {
            for c in kids {
                value(tree, c, true, out);
            }
            out[n] = 1;
            return 1;
        }
        let sum: u64 = kids.iter().map(|&c| value(tree, c, false, out)).sum();
        let v = if subtree_has_api(tree, n) { 1 + sum } else { 0 };
        out[n] = v;
        v
    }
    let mut out = vec![0; tree.len()];
    value(tree, 0, false, &mut out);
    out
}

/// API nodes without an API ancestor.
pub fn brute_force_interactions(tree: &GenTree) -> u64 {
    (0..tree.len())
        .filter(|&n| {
            if !is_api(tree.name(n)) {
                return false;
            }
            let mut cur = tree.parent[n];
            while let Some(p) = cur {
                if is_api(tree.name(p)) {
                    return false;
                }
                cur = tree.parent[p];
            }
            true
        })
        .count() as u64
}

pub fn tree_strategy(max_nodes: usize, max_depth: usize) -> impl Strategy<Value = GenTree> {
    prop::collection::vec((any::<u32>(), 0..METHODS.len()), 1..=max_nodes)
        .prop_map(move |choices| GenTree::from_choices(&choices, max_depth))
}
