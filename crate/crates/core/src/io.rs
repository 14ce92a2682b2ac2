//! Serialization surfaces: matrices as headerless CSV or JSON
//! arrays-of-arrays, chains as a JSON spec holding either inline matrices or
//! a generator name plus parameters.

use serde::{Deserialize, Serialize};

use crate::chain::Chain;
use crate::dynamics::Trajectory;
use crate::error::{Error, Result};
use crate::matrix::StochasticMatrix;
use crate::models::{
    cucker_smale_simulate, flocking_condition, jlm_chain, krause_chain,
    random_doubly_stochastic_chain, paper_example_chain, CsKernel, CuckerSmaleParams,
    CuckerSmaleRun, FlockingCheck, JlmParams, KrauseKernel, KrauseParams, PaperExample,
};

/// Row-major headerless CSV with `.` decimals and LF line endings.
pub fn matrix_to_csv(m: &StochasticMatrix) -> String {
    let mut out = String::new();
    for row in m.rows() {
        let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn matrix_from_csv(text: &str, tol_row: f64) -> Result<StochasticMatrix> {
    let rows: Vec<Vec<f64>> = text
        .lines()
        .filter(|line| !line.trim().is_empty())
        .map(|line| {
            line.split(',')
                .map(|cell| {
                    cell.trim()
                        .parse::<f64>()
                        .map_err(|e| Error::InvalidParams(format!("bad CSV cell {cell:?}: {e}")))
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    StochasticMatrix::validate(&rows, tol_row)
}

pub fn matrix_to_json(m: &StochasticMatrix) -> String {
    serde_json::to_string(m).expect("matrix serialization is infallible")
}

pub fn matrix_from_json(text: &str) -> Result<StochasticMatrix> {
    serde_json::from_str(text).map_err(|e| Error::InvalidParams(format!("bad matrix JSON: {e}")))
}

/// Kernel description accepted in manifests.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum KernelSpec {
    Indicator { radius: f64 },
    Tent { radius: f64 },
}

impl KernelSpec {
    fn to_kernel(&self) -> KrauseKernel {
        match *self {
            Self::Indicator { radius } => KrauseKernel::Indicator { radius },
            Self::Tent { radius } => KrauseKernel::Tent { radius },
        }
    }
}

/// Chain description: inline matrices or a named generator with parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ChainSpec {
    Inline {
        #[serde(default)]
        start: usize,
        matrices: Vec<StochasticMatrix>,
    },
    Generator {
        name: String,
        #[serde(default)]
        params: serde_json::Value,
    },
}

#[derive(Debug, Clone, Deserialize)]
struct KrauseSpecParams {
    x0: Vec<f64>,
    kernel: KernelSpec,
}

#[derive(Debug, Clone, Deserialize)]
struct JlmSpecParams {
    x0: Vec<f64>,
    radius: f64,
}

#[derive(Debug, Clone, Deserialize)]
struct RandomDsParams {
    s: usize,
    #[serde(default = "default_mix")]
    mix: usize,
}

fn default_mix() -> usize {
    2
}

#[derive(Debug, Clone, Deserialize)]
struct CsSpecParams {
    x0: Vec<[f64; 3]>,
    v0: Vec<[f64; 3]>,
    h: f64,
    kernel: CsKernelSpec,
}

#[derive(Debug, Clone, Deserialize)]
struct CsKernelSpec {
    k: f64,
    sigma: f64,
    beta: f64,
}

/// A chain realized from a spec, along with whatever the generator produced
/// on the side: the coupled trajectory for endogenous models, flocking data
/// for the velocity-coupling model, and a default initial state for
/// simulation analyses.
pub struct RealizedChain {
    pub chain: Chain,
    pub coupled_trajectory: Option<Trajectory>,
    pub flocking: Option<FlockingCheck>,
    pub cs_run: Option<CuckerSmaleRun>,
    pub default_x0: Option<Vec<f64>>,
}

fn parse_params<T: serde::de::DeserializeOwned>(
    name: &str,
    params: &serde_json::Value,
) -> Result<T> {
    serde_json::from_value(params.clone())
        .map_err(|e| Error::InvalidParams(format!("generator {name:?} parameters: {e}")))
}

/// Builds the chain described by `spec`. Endogenous and random generators
/// realize exactly `horizon` steps; `seed` feeds the random generator only.
pub fn realize_chain(spec: &ChainSpec, horizon: usize, seed: u64) -> Result<RealizedChain> {
    match spec {
        ChainSpec::Inline { start, matrices } => {
            let chain = Chain::from_matrices_at(*start, matrices.clone())?;
            Ok(RealizedChain {
                chain,
                coupled_trajectory: None,
                flocking: None,
                cs_run: None,
                default_x0: None,
            })
        }
        ChainSpec::Generator { name, params } => match name.as_str() {
            "inv_n" | "non_balanced" | "swap" => {
                let chain = paper_example_chain(name.parse::<PaperExample>()?);
                Ok(RealizedChain {
                    chain,
                    coupled_trajectory: None,
                    flocking: None,
                    cs_run: None,
                    default_x0: Some(vec![0.0, 1.0]),
                })
            }
            "krause" => {
                let p: KrauseSpecParams = parse_params(name, params)?;
                let (chain, traj) = krause_chain(
                    &KrauseParams { kernel: p.kernel.to_kernel(), x0: p.x0.clone() },
                    horizon,
                )?;
                Ok(RealizedChain {
                    chain,
                    coupled_trajectory: Some(traj),
                    flocking: None,
                    cs_run: None,
                    default_x0: Some(p.x0),
                })
            }
            "jlm" => {
                let p: JlmSpecParams = parse_params(name, params)?;
                let (chain, traj) =
                    jlm_chain(&JlmParams { radius: p.radius, x0: p.x0.clone() }, horizon)?;
                Ok(RealizedChain {
                    chain,
                    coupled_trajectory: Some(traj),
                    flocking: None,
                    cs_run: None,
                    default_x0: Some(p.x0),
                })
            }
            "random_doubly_stochastic" => {
                let p: RandomDsParams = parse_params(name, params)?;
                let chain = random_doubly_stochastic_chain(seed, p.s, horizon, p.mix)?;
                Ok(RealizedChain {
                    chain,
                    coupled_trajectory: None,
                    flocking: None,
                    cs_run: None,
                    default_x0: None,
                })
            }
            "cucker_smale" => {
                let p: CsSpecParams = parse_params(name, params)?;
                let cs = CuckerSmaleParams {
                    h: p.h,
                    kernel: CsKernel::Parametric {
                        k: p.kernel.k,
                        sigma: p.kernel.sigma,
                        beta: p.kernel.beta,
                    },
                    x0: p.x0,
                    v0: p.v0.clone(),
                };
                let flocking = flocking_condition(&cs)?;
                let run = cucker_smale_simulate(&cs, horizon)?;
                // The x-coordinates of the initial velocities make a natural
                // scalar state for the generic analyses.
                let default_x0 = Some(p.v0.iter().map(|v| v[0]).collect());
                Ok(RealizedChain {
                    chain: run.chain.clone(),
                    coupled_trajectory: None,
                    flocking: Some(flocking),
                    cs_run: Some(run),
                    default_x0,
                })
            }
            other => Err(Error::InvalidParams(format!("unknown generator {other:?}"))),
        },
    }
}

/// Records `[start, n_end)` of a chain as an inline spec; re-ingesting it
/// reproduces the analyses of the original chain on that window.
pub fn chain_to_inline_spec(chain: &Chain, n_end: usize) -> Result<ChainSpec> {
    Ok(ChainSpec::Inline { start: chain.start(), matrices: chain.realize(n_end)? })
}
