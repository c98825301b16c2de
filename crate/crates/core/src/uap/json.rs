//! Certificate serialization as a flat node table.
//!
//! ```text
//! {"root": 0,
//!  "functions": [{"n": N, "re": [...], "im": [...]}, ...],
//!  "nodes": [{"order": d, "M": bound, "func": i,
//!             "weights": [...], "columns": [j, ...],
//!             "coeffs": [[{"const": [re, im]} | {"node": k, "shift": s, "conj": b}, ...], ...]}]}
//! ```
//!
//! Order-0 nodes omit `weights`, `columns` and `coeffs`. Shared sub-certificates
//! appear once in the node table.

use std::collections::HashMap;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{Certificate, CertifiedFunction, Coefficient, NodeRef, Representation};
use crate::error::{Error, Result};
use crate::io::FunctionJson;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CoefficientJson {
    Const {
        #[serde(rename = "const")]
        value: [f64; 2],
    },
    Node {
        node: usize,
        shift: usize,
        conj: bool,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NodeJson {
    pub order: usize,
    #[serde(rename = "M")]
    pub bound: f64,
    pub func: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub columns: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coeffs: Option<Vec<Vec<CoefficientJson>>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CertificateJson {
    pub root: usize,
    pub functions: Vec<FunctionJson>,
    pub nodes: Vec<NodeJson>,
}

struct Writer {
    functions: Vec<FunctionJson>,
    nodes: Vec<Option<NodeJson>>,
    ids: HashMap<*const CertifiedFunction, usize>,
}

impl Writer {
    fn function(&mut self, f: &crate::cyclic::GroupFunction) -> usize {
        self.functions.push(FunctionJson::from_function(f));
        self.functions.len() - 1
    }

    fn node(&mut self, cf: &CertifiedFunction) -> usize {
        let ptr = cf as *const CertifiedFunction;
        if let Some(&id) = self.ids.get(&ptr) {
            return id;
        }
        let id = self.nodes.len();
        self.nodes.push(None);
        self.ids.insert(ptr, id);
        let func = self.function(cf.func());
        let json = match cf.cert() {
            Certificate::Constant { bound } => NodeJson {
                order: 0,
                bound: *bound,
                func,
                weights: None,
                columns: None,
                coeffs: None,
            },
            Certificate::Representation(rep) => {
                let columns = rep.columns.iter().map(|g| self.function(g)).collect();
                let coeffs = rep
                    .coeffs
                    .iter()
                    .map(|row| {
                        row.iter()
                            .map(|c| match c {
                                Coefficient::Constant(z) => CoefficientJson::Const { value: [z.re, z.im] },
                                Coefficient::Node(r) => CoefficientJson::Node {
                                    node: self.node(&r.node),
                                    shift: r.shift,
                                    conj: r.conj,
                                },
                            })
                            .collect()
                    })
                    .collect();
                NodeJson {
                    order: rep.order,
                    bound: rep.bound,
                    func,
                    weights: Some(rep.weights.clone()),
                    columns: Some(columns),
                    coeffs: Some(coeffs),
                }
            }
        };
        self.nodes[id] = Some(json);
        id
    }
}

impl CertificateJson {
    pub fn from_certified(cf: &CertifiedFunction) -> Self {
        let mut w = Writer {
            functions: Vec::new(),
            nodes: Vec::new(),
            ids: HashMap::new(),
        };
        let root = w.node(cf);
        CertificateJson {
            root,
            functions: w.functions,
            nodes: w.nodes.into_iter().map(|n| n.expect("every node is written")).collect(),
        }
    }

    pub fn to_certified(&self) -> Result<CertifiedFunction> {
        let functions = self
            .functions
            .iter()
            .map(FunctionJson::to_function)
            .collect::<Result<Vec<_>>>()?;
        let mut built: Vec<Option<Arc<CertifiedFunction>>> = vec![None; self.nodes.len()];
        let root = self.build(self.root, &functions, &mut built, usize::MAX)?;
        Ok(Arc::try_unwrap(root).unwrap_or_else(|shared| (*shared).clone()))
    }

    fn build(
        &self,
        id: usize,
        functions: &[crate::cyclic::GroupFunction],
        built: &mut Vec<Option<Arc<CertifiedFunction>>>,
        parent_order: usize,
    ) -> Result<Arc<CertifiedFunction>> {
        let node = self
            .nodes
            .get(id)
            .ok_or_else(|| Error::Input(format!("node {id} does not exist")))?;
        if node.order >= parent_order {
            return Err(Error::Input(format!(
                "node {id} has order {} under a parent of order {parent_order}",
                node.order
            )));
        }
        if let Some(done) = &built[id] {
            return Ok(done.clone());
        }
        let function = |i: usize| {
            functions
                .get(i)
                .cloned()
                .ok_or_else(|| Error::Input(format!("function {i} does not exist")))
        };
        let func = function(node.func)?;
        let cert = if node.order == 0 {
            Certificate::Constant { bound: node.bound }
        } else {
            let missing = || Error::Input(format!("node {id} of order {} lacks its tables", node.order));
            let weights = node.weights.clone().ok_or_else(missing)?;
            let columns = node
                .columns
                .as_ref()
                .ok_or_else(missing)?
                .iter()
                .map(|&i| function(i))
                .collect::<Result<Vec<_>>>()?;
            let mut coeffs = Vec::new();
            for row in node.coeffs.as_ref().ok_or_else(missing)? {
                let mut out = Vec::with_capacity(row.len());
                for c in row {
                    out.push(match c {
                        CoefficientJson::Const { value } => Coefficient::Constant(Complex64::new(value[0], value[1])),
                        CoefficientJson::Node { node: child, shift, conj } => Coefficient::Node(NodeRef {
                            node: self.build(*child, functions, built, node.order)?,
                            shift: *shift % func.modulus(),
                            conj: *conj,
                        }),
                    });
                }
                coeffs.push(out);
            }
            Certificate::Representation(Representation {
                order: node.order,
                bound: node.bound,
                weights,
                columns,
                coeffs,
            })
        };
        let cf = Arc::new(CertifiedFunction::from_parts(func, cert)?);
        built[id] = Some(cf.clone());
        Ok(cf)
    }
}
