//! Forests of binary decision trees decided by strict majority vote.

use serde::{Deserialize, Serialize};

use super::{ite, DecisionFunction};
use crate::error::{Error, Result};
use crate::logic::Var;
use crate::sdd::{Ix, SddManager, FALSE, TRUE};
use crate::vtree::Vtree;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TreeNode {
    Leaf(bool),
    Test { feature: String, low: Box<TreeNode>, high: Box<TreeNode> },
}

impl TreeNode {
    fn eval(&self, features: &[String], values: &[bool]) -> bool {
        match self {
            TreeNode::Leaf(b) => *b,
            TreeNode::Test { feature, low, high } => {
                let i = features.iter().position(|f| f == feature).expect("validated feature");
                if values[i] {
                    high.eval(features, values)
                } else {
                    low.eval(features, values)
                }
            }
        }
    }

    fn check(&self, features: &[String]) -> Result<()> {
        match self {
            TreeNode::Leaf(_) => Ok(()),
            TreeNode::Test { feature, low, high } => {
                if !features.contains(feature) {
                    return Err(Error::InvalidModel(format!("tree tests unknown feature {feature:?}")));
                }
                low.check(features)?;
                high.check(features)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecisionForest {
    pub features: Vec<String>,
    pub trees: Vec<TreeNode>,
    #[serde(default)]
    pub protected: Vec<String>,
}

impl DecisionForest {
    pub fn new(features: Vec<String>, trees: Vec<TreeNode>, protected: Vec<String>) -> Result<Self> {
        if trees.len() % 2 == 0 {
            return Err(Error::InvalidModel(format!("{} trees can tie; need an odd count", trees.len())));
        }
        if features.is_empty() {
            return Err(Error::InvalidModel("forest has no features".into()));
        }
        for t in &trees {
            t.check(&features)?;
        }
        for p in &protected {
            if !features.contains(p) {
                return Err(Error::InvalidModel(format!("unknown protected feature {p:?}")));
            }
        }
        Ok(DecisionForest { features, trees, protected })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let f: DecisionForest = serde_json::from_str(text)?;
        DecisionForest::new(f.features, f.trees, f.protected)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("forest serializes")
    }

    pub fn protected_vars(&self) -> Vec<Var> {
        self.protected
            .iter()
            .filter_map(|p| self.features.iter().position(|f| f == p))
            .map(|i| Var::new(i as u32 + 1))
            .collect()
    }

    /// Majority vote; values[i] is feature i.
    pub fn decide(&self, values: &[bool]) -> bool {
        let yes = self.trees.iter().filter(|t| t.eval(&self.features, values)).count();
        2 * yes > self.trees.len()
    }

    /// OBDD over features in declaration order.
    pub fn compile(&self) -> Result<DecisionFunction> {
        let vars: Vec<Var> = (1..=self.features.len() as u32).map(Var::new).collect();
        let mut mgr = SddManager::new(Vtree::right_linear(&vars)?);
        let trees: Vec<Ix> = self.trees.iter().map(|t| self.tree_sdd(&mut mgr, t)).collect();
        let root = at_least(&mut mgr, &trees, trees.len().div_ceil(2));
        let root = mgr.wrap(root);
        DecisionFunction::new(mgr, root, self.features.clone())
    }

    fn tree_sdd(&self, mgr: &mut SddManager, t: &TreeNode) -> Ix {
        match t {
            TreeNode::Leaf(b) => {
                if *b {
                    TRUE
                } else {
                    FALSE
                }
            }
            TreeNode::Test { feature, low, high } => {
                let i = self.features.iter().position(|f| f == feature).expect("validated feature");
                let hi = self.tree_sdd(mgr, high);
                let lo = self.tree_sdd(mgr, low);
                ite(mgr, Var::new(i as u32 + 1), hi, lo)
            }
        }
    }
}

/// At least `k` of `fs` hold, by dynamic programming over the count so far.
fn at_least(mgr: &mut SddManager, fs: &[Ix], k: usize) -> Ix {
    // need[j]: at least j of the remaining functions hold.
    let mut need: Vec<Ix> = (0..=k).map(|j| if j == 0 { TRUE } else { FALSE }).collect();
    for &f in fs.iter().rev() {
        let nf = mgr.negate_ix(f);
        for j in (1..=k).rev() {
            let take = mgr.and(f, need[j - 1]);
            let skip = mgr.and(nf, need[j]);
            need[j] = mgr.or(take, skip);
        }
    }
    need[k]
}
