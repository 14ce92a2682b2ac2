//! The two-agent reference chains used throughout the test and demo
//! surfaces.
//!
//! `inv_n` is the time-varying symmetric chain with diagonal `1/n`, indexed
//! from `n = 1` (the `n = 0` term is dropped; every asymptotic property is
//! unaffected). It is doubly stochastic at every step and every cumulative
//! entry sum diverges, which the fixture declares analytically: the diagonal
//! mass grows only harmonically and a finite-window tail rule would miss it.
//!
//! `non_balanced` is the constant chain `[[1/2, 1/2], [1, 0]]`, whose
//! asymmetry constant is infinite. `swap` is the constant permutation chain,
//! doubly stochastic with zero diagonal.

use std::str::FromStr;

use crate::chain::Chain;
use crate::error::Error;
use crate::matrix::StochasticMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PaperExample {
    InvN,
    NonBalanced,
    Swap,
}

impl FromStr for PaperExample {
    type Err = Error;

    fn from_str(name: &str) -> Result<Self, Error> {
        match name {
            "inv_n" => Ok(Self::InvN),
            "non_balanced" => Ok(Self::NonBalanced),
            "swap" => Ok(Self::Swap),
            other => Err(Error::InvalidParams(format!(
                "unknown example chain {other:?}; expected inv_n, non_balanced, or swap"
            ))),
        }
    }
}

impl PaperExample {
    pub fn name(self) -> &'static str {
        match self {
            Self::InvN => "inv_n",
            Self::NonBalanced => "non_balanced",
            Self::Swap => "swap",
        }
    }
}

pub fn paper_example_chain(which: PaperExample) -> Chain {
    match which {
        PaperExample::InvN => Chain::from_fn(2, 1, None, |n| {
            let p = 1.0 / n as f64;
            StochasticMatrix::validate(&[vec![p, 1.0 - p], vec![1.0 - p, p]], 1e-12)
        })
        .with_label("inv_n")
        .with_declared_unbounded(vec![(0, 0), (0, 1), (1, 0), (1, 1)]),
        PaperExample::NonBalanced => {
            let m = StochasticMatrix::validate(&[vec![0.5, 0.5], vec![1.0, 0.0]], 1e-12)
                .expect("fixture is stochastic");
            Chain::constant(m)
                .with_label("non_balanced")
                .with_declared_unbounded(vec![(0, 0), (0, 1), (1, 0)])
        }
        PaperExample::Swap => {
            let m = StochasticMatrix::validate(&[vec![0.0, 1.0], vec![1.0, 0.0]], 1e-12)
                .expect("fixture is stochastic");
            Chain::constant(m).with_label("swap")
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::certificates::{balanced_asymmetry_constant, certify_chain, is_doubly_stochastic};

    #[test]
    fn inv_n_at_two_is_uniform() {
        let chain = paper_example_chain(PaperExample::InvN);
        let a2 = chain.matrix_at(2).unwrap();
        assert_eq!(a2.row(0), &[0.5, 0.5]);
        assert_eq!(a2.row(1), &[0.5, 0.5]);
        assert!(chain.matrix_at(0).is_err());
    }

    #[test]
    fn non_balanced_certificate_is_infinite() {
        let chain = paper_example_chain(PaperExample::NonBalanced);
        let (m, w) = balanced_asymmetry_constant(&chain.matrix_at(0).unwrap()).unwrap();
        assert!(m.is_infinite());
        let w = w.unwrap();
        assert_eq!((w.s1.as_slice(), w.s2.as_slice()), ([0].as_slice(), [1].as_slice()));
    }

    #[test]
    fn swap_is_doubly_stochastic_with_unit_constant() {
        let chain = paper_example_chain(PaperExample::Swap);
        assert!(is_doubly_stochastic(&chain.matrix_at(0).unwrap(), 1e-12));
        let report = certify_chain(&chain, 10).unwrap();
        assert_eq!(report.chain_m, 1.0);
        assert_eq!(report.chain_k, 1.0);
        assert_eq!(report.delta, 0.0);
    }

    #[test]
    fn names_round_trip() {
        for which in [PaperExample::InvN, PaperExample::NonBalanced, PaperExample::Swap] {
            assert_eq!(which.name().parse::<PaperExample>().unwrap(), which);
        }
        assert!("bogus".parse::<PaperExample>().is_err());
    }
}
