//! The reduced K-node network tracking the full weighted pool with K² + K
//! quantities: one active weight per node and one K×K matrix of transition
//! weights. Symbol `a_j` is bound to node `j` (so the alphabet may not be
//! larger than the node count); nodes past the alphabet participate in the
//! transition mixing but never receive observations or emit scores.
//!
//! One observation of `a_j` applies, in order: reward the observed node's
//! active weight ×λ, renormalize the active weights, redistribute the active
//! weights through the (old) transition rows, reward column `j` of every
//! transition row ×λ, and renormalize each row. Scores are the incoming
//! weight at each symbol node before any update.

use crate::alphabet::{Alphabet, Symbol};
use crate::error::{Error, Result};
use crate::predictor::RunTrace;
use crate::scalar::{argmax, normalize, RatioSpec, Scalar};

/// The reduced network state.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanFieldNetwork<S: Scalar> {
    k: usize,
    alphabet: Alphabet,
    /// Length K, sums to one.
    w_active: Vec<S>,
    /// K×K; each row sums to one. Entry (i, j) is the fraction of node i's
    /// outgoing weight that lands on node j.
    w_trans: Vec<Vec<S>>,
    lambda: RatioSpec,
    lambda_scalar: S,
}

/// Display-form dump of a network's weights ("p/q" strings in exact mode).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetworkState {
    pub w_active: Vec<String>,
    pub w_trans: Vec<Vec<String>>,
}

impl<S: Scalar> MeanFieldNetwork<S> {
    /// The fully symmetric starting network: every weight 1/K.
    pub fn init_uniform(k: usize, alphabet: Alphabet, lambda: RatioSpec) -> Result<Self> {
        let uniform = vec![S::from_ratio(1, k.max(1) as u64); k];
        MeanFieldNetwork::from_parts(alphabet, uniform.clone(), vec![uniform; k], lambda)
    }

    /// Builds a network from explicit weights; the active vector and each
    /// row are normalized on entry.
    pub fn from_parts(
        alphabet: Alphabet,
        w_active: Vec<S>,
        w_trans: Vec<Vec<S>>,
        lambda: RatioSpec,
    ) -> Result<Self> {
        let k = w_active.len();
        if k == 0 {
            return Err(Error::NoStates);
        }
        if alphabet.size() > k {
            return Err(Error::AlphabetExceedsNodes {
                alphabet: alphabet.size(),
                k,
            });
        }
        if !lambda.at_least_one() {
            return Err(Error::LambdaOutOfRange(lambda.to_string()));
        }
        if w_trans.len() != k || w_trans.iter().any(|row| row.len() != k) {
            return Err(Error::InvalidSpec(format!(
                "transition weights must form a {k}x{k} matrix"
            )));
        }
        let w_active = normalize(&w_active)?;
        let w_trans = w_trans
            .iter()
            .map(|row| normalize(row))
            .collect::<Result<Vec<_>>>()?;
        Ok(MeanFieldNetwork {
            k,
            alphabet,
            w_active,
            w_trans,
            lambda,
            lambda_scalar: lambda.to_scalar(),
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn lambda(&self) -> RatioSpec {
        self.lambda
    }

    pub fn w_active(&self) -> &[S] {
        &self.w_active
    }

    pub fn w_trans(&self) -> &[Vec<S>] {
        &self.w_trans
    }

    /// Per-symbol scores: the weight arriving at each symbol node if the
    /// active weights flowed through the transition rows right now. The
    /// network's prediction is the argmax (ties toward the lowest symbol).
    pub fn predict_scores(&self) -> Vec<S> {
        (0..self.alphabet.size())
            .map(|j| {
                let mut score = S::zero();
                for (i, active) in self.w_active.iter().enumerate() {
                    score = score.add(&active.mul(&self.w_trans[i][j]));
                }
                score
            })
            .collect()
    }

    pub fn predict(&self) -> Symbol {
        argmax(&self.predict_scores())
    }

    /// Reward the observed node's active weight and renormalize.
    fn boost_active(&mut self, symbol: Symbol) -> Result<()> {
        self.w_active[symbol] = self.w_active[symbol].mul(&self.lambda_scalar);
        self.w_active = normalize(&self.w_active)?;
        Ok(())
    }

    /// Redistribute active weight through the current transition rows.
    fn mix_active(&mut self) {
        self.w_active = (0..self.k)
            .map(|j| {
                let mut incoming = S::zero();
                for (i, active) in self.w_active.iter().enumerate() {
                    incoming = incoming.add(&active.mul(&self.w_trans[i][j]));
                }
                incoming
            })
            .collect();
    }

    /// Reward the observed column of every transition row and renormalize
    /// each row.
    fn boost_rows(&mut self, symbol: Symbol) -> Result<()> {
        for row in self.w_trans.iter_mut() {
            row[symbol] = row[symbol].mul(&self.lambda_scalar);
            *row = normalize(row)?;
        }
        Ok(())
    }

    /// One observation, applying the three update rules in order with
    /// renormalization after each multiplicative reward.
    pub fn observe(&mut self, symbol: Symbol) -> Result<()> {
        self.alphabet.check(symbol)?;
        self.boost_active(symbol)?;
        self.mix_active();
        self.boost_rows(symbol)?;
        Ok(())
    }

    /// Folds predict + observe over a sequence, tracing the network's own
    /// mistakes.
    pub fn run(&mut self, sequence: &[Symbol]) -> Result<RunTrace> {
        let mut trace = RunTrace::new();
        for (i, &symbol) in sequence.iter().enumerate() {
            trace.push(i + 1, self.predict(), symbol);
            self.observe(symbol)?;
        }
        Ok(trace)
    }

    /// Weights in display form for reports.
    pub fn dump(&self) -> NetworkState {
        NetworkState {
            w_active: self.w_active.iter().map(Scalar::display).collect(),
            w_trans: self
                .w_trans
                .iter()
                .map(|row| row.iter().map(Scalar::display).collect())
                .collect(),
        }
    }
}

/// Builds a fresh uniform network and runs it over the sequence, returning
/// the mistake trace alongside the final network.
pub fn run_network<S: Scalar>(
    k: usize,
    alphabet: Alphabet,
    lambda: RatioSpec,
    sequence: &[Symbol],
) -> Result<(RunTrace, MeanFieldNetwork<S>)> {
    let mut net = MeanFieldNetwork::init_uniform(k, alphabet, lambda)?;
    let trace = net.run(sequence)?;
    Ok((trace, net))
}
