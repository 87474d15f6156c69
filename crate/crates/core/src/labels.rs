//! Dense interning of node labels.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Dense index of a first-order node inside one [`Labels`] table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl NodeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// Bijection between text labels and contiguous [`NodeId`]s, in insertion order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Labels {
    names: Vec<String>,
    index: HashMap<String, NodeId>,
}

impl Labels {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_names<I, S>(names: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut labels = Labels::new();
        for name in names {
            labels.intern(name.into());
        }
        labels
    }

    /// Returns the id for `name`, allocating the next index if unseen.
    pub fn intern(&mut self, name: impl AsRef<str> + Into<String>) -> NodeId {
        if let Some(&id) = self.index.get(name.as_ref()) {
            return id;
        }
        let id = NodeId(self.names.len() as u32);
        let name = name.into();
        self.index.insert(name.clone(), id);
        self.names.push(name);
        id
    }

    pub fn get(&self, name: &str) -> Option<NodeId> {
        self.index.get(name).copied()
    }

    pub fn name(&self, id: NodeId) -> &str {
        &self.names[id.index()]
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn ids(&self) -> impl Iterator<Item = NodeId> {
        (0..self.names.len() as u32).map(NodeId)
    }

    /// Renders a tuple of ids as `a,b,c`.
    pub fn join(&self, tuple: &[NodeId], sep: &str) -> String {
        let mut out = String::new();
        for (i, id) in tuple.iter().enumerate() {
            if i > 0 {
                out.push_str(sep);
            }
            out.push_str(self.name(*id));
        }
        out
    }
}
