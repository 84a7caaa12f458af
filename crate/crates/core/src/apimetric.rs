//! API-interaction classification and the API-utilization metrics.
//!
//! A node is an *API interaction* when its method matches a classifier
//! rule. Evaluation over a call tree:
//!
//! * an API node has utilization 1; anything it calls is untraced platform
//!   internals and is pruned,
//! * a node whose subtree contains no API node has utilization 0,
//! * any other node has `1 + sum(children)`.
//!
//! The relative form divides by `N + 1`, `N` being the number of API
//! interactions of the population the value is compared within.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::callgraph::{CallTree, NodeId};
use crate::trace::MethodId;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ApiRule {
    pub prefix: String,
    pub label: String,
}

impl ApiRule {
    pub fn new(prefix: impl Into<String>, label: impl Into<String>) -> Self {
        Self {
            prefix: prefix.into(),
            label: label.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClassifierError {
    #[error("API rule prefix must not be empty")]
    EmptyPrefix,
    #[error("API rule label for prefix `{0}` must not be empty")]
    EmptyLabel(String),
    #[error("duplicate API rule prefix `{0}`")]
    DuplicatePrefix(String),
}

/// Package-prefix rules; the longest matching prefix wins.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<ApiRule>", into = "Vec<ApiRule>")]
pub struct ApiClassifier {
    rules: Vec<ApiRule>,
}

impl ApiClassifier {
    pub fn new(rules: Vec<ApiRule>) -> Result<Self, ClassifierError> {
        let mut seen = std::collections::BTreeSet::new();
        for rule in &rules {
            if rule.prefix.is_empty() {
                return Err(ClassifierError::EmptyPrefix);
            }
            if rule.label.is_empty() {
                return Err(ClassifierError::EmptyLabel(rule.prefix.clone()));
            }
            if !seen.insert(rule.prefix.as_str()) {
                return Err(ClassifierError::DuplicatePrefix(rule.prefix.clone()));
            }
        }
        Ok(Self { rules })
    }

    /// The Java and Android platform packages.
    pub fn android_platform() -> Self {
        Self::new(vec![
            ApiRule::new("android.", "android"),
            ApiRule::new("java.", "java"),
            ApiRule::new("javax.", "javax"),
        ])
        .expect("static rules are valid")
    }

    pub fn rules(&self) -> &[ApiRule] {
        &self.rules
    }

    /// Label of the longest rule prefixing the canonical method name.
    pub fn classify(&self, method: &MethodId) -> Option<&str> {
        let name = method.to_string();
        self.rules
            .iter()
            .filter(|r| name.starts_with(&r.prefix))
            .max_by_key(|r| r.prefix.len())
            .map(|r| r.label.as_str())
    }
}

impl TryFrom<Vec<ApiRule>> for ApiClassifier {
    type Error = ClassifierError;

    fn try_from(rules: Vec<ApiRule>) -> Result<Self, Self::Error> {
        Self::new(rules)
    }
}

impl From<ApiClassifier> for Vec<ApiRule> {
    fn from(c: ApiClassifier) -> Self {
        c.rules
    }
}

/// Per-node role during evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NodeRole {
    /// Calls into the API.
    Api,
    /// Inside an API call; not evaluated.
    Pruned,
    /// Library or test code.
    Internal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UapiProfile {
    pub test_name: MethodId,
    pub sample_index: u32,
    /// Sum over the tree roots.
    pub root_uapi: u64,
    /// Indexed by [`NodeId`]; pruned nodes hold 0.
    pub node_values: Vec<u64>,
    pub node_roles: Vec<NodeRole>,
    pub total_api_interactions: u64,
    pub api_distribution: BTreeMap<String, u64>,
}

impl UapiProfile {
    pub fn value(&self, id: NodeId) -> u64 {
        self.node_values[id.0]
    }
}

pub fn uapi(tree: &CallTree, classifier: &ApiClassifier) -> UapiProfile {
    let n = tree.len();
    let mut roles = Vec::with_capacity(n);
    let mut labels: Vec<Option<&str>> = Vec::with_capacity(n);
    for id in tree.ids() {
        let node = tree.node(id);
        let pruned = node
            .parent
            .is_some_and(|p| roles[p.0] != NodeRole::Internal);
        if pruned {
            roles.push(NodeRole::Pruned);
            labels.push(None);
            continue;
        }
        let label = classifier.classify(&node.method);
        roles.push(if label.is_some() {
            NodeRole::Api
        } else {
            NodeRole::Internal
        });
        labels.push(label);
    }

    let mut values = vec![0u64; n];
    let mut reaches_api = vec![false; n];
    for id in tree.ids().rev() {
        let i = id.0;
        match roles[i] {
            NodeRole::Pruned => {}
            NodeRole::Api => {
                values[i] = 1;
                reaches_api[i] = true;
            }
            NodeRole::Internal => {
                let children = &tree.node(id).children;
                if children.iter().any(|c| reaches_api[c.0]) {
                    reaches_api[i] = true;
                    values[i] = 1 + children.iter().map(|c| values[c.0]).sum::<u64>();
                }
            }
        }
    }

    let mut api_distribution = BTreeMap::new();
    for label in labels.into_iter().flatten() {
        *api_distribution.entry(label.to_owned()).or_insert(0) += 1;
    }
    UapiProfile {
        test_name: tree.test_name.clone(),
        sample_index: tree.sample_index,
        root_uapi: tree.roots().iter().map(|r| values[r.0]).sum(),
        node_values: values,
        node_roles: roles,
        total_api_interactions: api_distribution.values().sum(),
        api_distribution,
    }
}

/// API interactions grouped by classifier label.
pub fn api_distribution(tree: &CallTree, classifier: &ApiClassifier) -> BTreeMap<String, u64> {
    uapi(tree, classifier).api_distribution
}

/// Utilization per method within one tree: the sum over that method's nodes.
pub fn method_uapi(tree: &CallTree, profile: &UapiProfile) -> BTreeMap<MethodId, u64> {
    let mut out = BTreeMap::new();
    for id in tree.ids() {
        *out.entry(tree.node(id).method.clone()).or_insert(0) += profile.value(id);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RUapiValue {
    pub value: f64,
    pub numerator: u64,
    pub n_base: u64,
}

pub fn ruapi(uapi: u64, n_base: u64) -> RUapiValue {
    RUapiValue {
        value: uapi as f64 / (n_base as f64 + 1.0),
        numerator: uapi,
        n_base,
    }
}
