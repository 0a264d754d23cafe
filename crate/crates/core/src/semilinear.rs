//! Semilinear sets: finite unions of linear sets {b + k1·a1 + … + km·am}
//! over N^d, with exact membership by bounded coefficient search (sound and
//! complete because non-zero periods strictly consume magnitude).

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearSet {
    pub base: Vec<u64>,
    pub periods: Vec<Vec<u64>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SemilinearSet {
    pub components: Vec<LinearSet>,
}

#[derive(Debug, Error)]
pub enum SemilinearError {
    #[error("dimension mismatch: set has dimension {set}, vector has {vector}")]
    DimensionMismatch { set: usize, vector: usize },
    #[error("linear set has inconsistent dimensions")]
    Ragged,
}

impl LinearSet {
    pub fn dimension(&self) -> usize {
        self.base.len()
    }

    fn check(&self) -> Result<(), SemilinearError> {
        if self.periods.iter().any(|p| p.len() != self.base.len()) {
            return Err(SemilinearError::Ragged);
        }
        Ok(())
    }

    /// True iff v = base + Σ ki·periods[i] for some k ∈ N^m.
    pub fn contains(&self, v: &[u64]) -> Result<bool, SemilinearError> {
        self.check()?;
        if v.len() != self.dimension() {
            return Err(SemilinearError::DimensionMismatch {
                set: self.dimension(),
                vector: v.len(),
            });
        }
        // Residual target after subtracting the base; all-zero periods can
        // never change it and are dropped.
        let mut target = Vec::with_capacity(v.len());
        for (t, b) in v.iter().zip(&self.base) {
            match t.checked_sub(*b) {
                Some(d) => target.push(d),
                None => return Ok(false),
            }
        }
        let periods: Vec<&Vec<u64>> = self
            .periods
            .iter()
            .filter(|p| p.iter().any(|&c| c > 0))
            .collect();
        Ok(consume(&target, &periods))
    }
}

/// DFS over coefficient choices: for each period in turn, try every
/// multiple that stays within the residual target.
fn consume(target: &[u64], periods: &[&Vec<u64>]) -> bool {
    if target.iter().all(|&t| t == 0) {
        return true;
    }
    let Some((p, rest)) = periods.split_first() else {
        return false;
    };
    let mut residual = target.to_vec();
    loop {
        if consume(&residual, rest) {
            return true;
        }
        for (r, &c) in residual.iter_mut().zip(p.iter()) {
            match r.checked_sub(c) {
                Some(d) => *r = d,
                None => return false,
            }
        }
    }
}

impl SemilinearSet {
    pub fn contains(&self, v: &[u64]) -> Result<bool, SemilinearError> {
        for comp in &self.components {
            if comp.contains(v)? {
                return Ok(true);
            }
        }
        Ok(false)
    }
}
