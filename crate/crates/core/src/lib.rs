pub mod bn;
pub mod error;
pub mod logic;
pub mod nnf;
pub mod psdd;
pub mod scalar;
pub mod sdd;
pub mod spaces;
mod varset;
pub mod xai;
pub mod vtree;

pub use error::{Error, ErrorKind, Result};
pub use logic::{Cnf, Lit, Term, Var, WeightMap};
pub use nnf::{Check, Marginals, NnfBuilder, NnfCircuit, NnfNode, PropertyViolation};
pub use scalar::{Probability, Weight};
pub use sdd::{ClauseOrder, Op, Sdd, SddManager, SddView};
pub use vtree::{Vtree, VtreeNode, VtreeShape};
pub use bn::{Backend, BayesNet, BnEncoding, CompiledBn, Query, VtreeKind};
pub use psdd::{sample_space_dataset, Dataset, Psdd, PsddNode};
pub use spaces::{Graph, GridRouteSpace, RankingSpace};
pub use xai::{DecisionForest, DecisionFunction, NaiveBayes, ReasonCircuit, Robustness};
pub use xai::{NbFeature, TreeNode};

pub type Rational = num_rational::BigRational;
pub type WeightsF64 = WeightMap<f64>;
pub type WeightsF32 = WeightMap<f32>;
pub type ExactWeights = WeightMap<Rational>;
pub type PsddF64 = Psdd<f64>;
pub type PsddF32 = Psdd<f32>;
