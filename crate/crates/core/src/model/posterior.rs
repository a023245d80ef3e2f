use serde::{Deserialize, Serialize};

use super::problem::Problem;
use crate::error::{Error, Result};

/// A finitely supported belief over state indices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Posterior {
    support: Vec<usize>,
    weights: Vec<f64>,
}

impl Posterior {
    /// Zero weights are pruned; the remaining entries are sorted by state index.
    pub fn new(support: Vec<usize>, weights: Vec<f64>) -> Result<Self> {
        if support.len() != weights.len() {
            return Err(Error::InvalidPosterior("support and weights differ in length".into()));
        }
        let mut pairs: Vec<(usize, f64)> = support.into_iter().zip(weights).filter(|(_, w)| *w != 0.0).collect();
        if let Some((_, w)) = pairs.iter().find(|(_, w)| !(*w > 0.0) || !w.is_finite()) {
            return Err(Error::InvalidPosterior(format!("weight {w} is not positive")));
        }
        pairs.sort_by_key(|p| p.0);
        if pairs.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidPosterior("duplicate support index".into()));
        }
        if pairs.is_empty() {
            return Err(Error::InvalidPosterior("empty support".into()));
        }
        let total: f64 = pairs.iter().map(|p| p.1).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidPosterior(format!("weights sum to {total}")));
        }
        let (support, weights) = pairs.into_iter().unzip();
        Ok(Posterior { support, weights })
    }

    /// Like [`Posterior::new`] but rescales the weights to sum to one first.
    pub fn normalized(support: Vec<usize>, weights: Vec<f64>) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return Err(Error::InvalidPosterior("weights sum to zero".into()));
        }
        Posterior::new(support, weights.into_iter().map(|w| w / total).collect())
    }

    pub fn degenerate(i: usize) -> Self {
        Posterior { support: vec![i], weights: vec![1.0] }
    }

    /// Posterior equal to a dense weight vector over all states.
    pub fn from_dense(weights: &[f64]) -> Result<Self> {
        Posterior::normalized((0..weights.len()).collect(), weights.to_vec())
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
    pub fn len(&self) -> usize {
        self.support.len()
    }
    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }
    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.support.iter().copied().zip(self.weights.iter().copied())
    }

    /// ∫ f(x) dμ over state values.
    pub fn expect(&self, problem: &Problem, f: impl Fn(f64) -> f64) -> f64 {
        self.iter().map(|(i, w)| w * f(problem.state(i))).sum()
    }

    pub fn dense(&self, n_states: usize) -> Vec<f64> {
        let mut d = vec![0.0; n_states];
        for (i, w) in self.iter() {
            d[i] = w;
        }
        d
    }
}

/// A weighted list of posteriors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Signal {
    atoms: Vec<(Posterior, f64)>,
}

impl Signal {
    pub fn new(atoms: Vec<(Posterior, f64)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidSignal("no atoms".into()));
        }
        if let Some((_, m)) = atoms.iter().find(|(_, m)| !(*m > 0.0)) {
            return Err(Error::InvalidSignal(format!("atom mass {m} is not positive")));
        }
        let total: f64 = atoms.iter().map(|a| a.1).sum();
        if (total - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidSignal(format!("atom masses sum to {total}")));
        }
        Ok(Signal { atoms })
    }

    /// The signal revealing every prior-supported state.
    pub fn full_disclosure(problem: &Problem) -> Self {
        let atoms = problem
            .prior()
            .iter()
            .enumerate()
            .filter(|(_, w)| **w > 0.0)
            .map(|(i, w)| (Posterior::degenerate(i), *w))
            .collect();
        Signal { atoms }
    }

    /// The uninformative signal.
    pub fn no_disclosure(problem: &Problem) -> Result<Self> {
        Signal::new(vec![(Posterior::from_dense(problem.prior())?, 1.0)])
    }

    pub fn atoms(&self) -> &[(Posterior, f64)] {
        &self.atoms
    }

    /// State marginal Σ_k m_k μ_k.
    pub fn marginal(&self, n_states: usize) -> Vec<f64> {
        let mut out = vec![0.0; n_states];
        for (mu, m) in &self.atoms {
            for (i, w) in mu.iter() {
                out[i] += m * w;
            }
        }
        out
    }

    /// Largest deviation of the state marginal from the prior.
    pub fn bayes_residual(&self, problem: &Problem) -> f64 {
        self.marginal(problem.n_states())
            .iter()
            .zip(problem.prior())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prunes_and_sorts() {
        let p = Posterior::new(vec![3, 0, 2], vec![0.5, 0.5, 0.0]).unwrap();
        assert_eq!(p.support(), &[0, 3]);
        assert_eq!(p.weights(), &[0.5, 0.5]);
    }

    #[test]
    fn rejects_invalid() {
        assert!(Posterior::new(vec![0, 0], vec![0.5, 0.5]).is_err());
        assert!(Posterior::new(vec![0, 1], vec![0.5, 0.4]).is_err());
        assert!(Posterior::new(vec![0, 1], vec![1.5, -0.5]).is_err());
        assert!(Posterior::new(vec![], vec![]).is_err());
    }

    #[test]
    fn signal_masses() {
        let a = Posterior::degenerate(0);
        assert!(Signal::new(vec![(a.clone(), 0.5)]).is_err());
        assert!(Signal::new(vec![(a.clone(), 0.5), (Posterior::degenerate(1), 0.5)]).is_ok());
    }
}
