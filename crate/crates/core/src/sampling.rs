//! Weighted index sampling with Vose's alias method.

use rand::Rng;

/// O(1) sampler over indices `0..n` with probability proportional to the
/// construction weights. Each draw consumes exactly two values from the
/// generator: one index and one coin.
#[derive(Debug, Clone)]
pub struct AliasTable {
    prob: Vec<f64>,
    alias: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AliasError {
    #[error("no weights")]
    Empty,
    #[error("weight {index} is negative or not finite")]
    InvalidWeight { index: usize },
    #[error("weights sum to zero")]
    ZeroTotal,
}

impl AliasTable {
    pub fn new(weights: &[f64]) -> Result<Self, AliasError> {
        if weights.is_empty() {
            return Err(AliasError::Empty);
        }
        if let Some(index) = weights.iter().position(|w| !w.is_finite() || *w < 0.0) {
            return Err(AliasError::InvalidWeight { index });
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            return Err(AliasError::ZeroTotal);
        }
        let n = weights.len();
        let mut scaled: Vec<f64> = weights.iter().map(|w| w * n as f64 / total).collect();
        let mut prob = vec![0.0; n];
        let mut alias: Vec<usize> = (0..n).collect();
        let (mut small, mut large): (Vec<usize>, Vec<usize>) = (0..n).partition(|&i| scaled[i] < 1.0);
        while let (Some(s), Some(&l)) = (small.pop(), large.last()) {
            prob[s] = scaled[s];
            alias[s] = l;
            scaled[l] -= 1.0 - scaled[s];
            if scaled[l] < 1.0 {
                large.pop();
                small.push(l);
            }
        }
        // Leftovers differ from 1 only by rounding.
        for i in large.into_iter().chain(small) {
            prob[i] = 1.0;
            alias[i] = i;
        }
        Ok(AliasTable { prob, alias })
    }

    pub fn len(&self) -> usize {
        self.prob.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prob.is_empty()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let column = rng.gen_range(0..self.prob.len());
        let coin: f64 = rng.gen();
        if coin < self.prob[column] {
            column
        } else {
            self.alias[column]
        }
    }

    /// Probability of each index implied by the table; matches the
    /// normalized construction weights up to rounding.
    pub fn implied_probabilities(&self) -> Vec<f64> {
        let n = self.prob.len() as f64;
        let mut p = vec![0.0; self.prob.len()];
        for (i, (&keep, &alias)) in self.prob.iter().zip(&self.alias).enumerate() {
            p[i] += keep / n;
            p[alias] += (1.0 - keep) / n;
        }
        p
    }
}
