use crate::error::{Error, Result};

/// Selects one of the two factors of ℝⁿ × ℝᵐ.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Factor {
    First,
    Second,
}

impl Factor {
    pub fn other(self) -> Factor {
        match self {
            Factor::First => Factor::Second,
            Factor::Second => Factor::First,
        }
    }
}

/// Dimensions and exponents n, m, p, q, α, β.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExponentConfig {
    n: usize,
    m: usize,
    p: f64,
    q: f64,
    alpha: f64,
    beta: f64,
}

const BALANCE_TOL: f64 = 1e-12;

impl ExponentConfig {
    pub fn new(n: usize, m: usize, p: f64, q: f64, alpha: f64, beta: f64) -> Result<Self> {
        if n == 0 || m == 0 {
            return Err(Error::InvalidExponents(format!(
                "dimensions must be positive, got n={n}, m={m}"
            )));
        }
        if !(p > 1.0 && q > p && q.is_finite()) {
            return Err(Error::InvalidExponents(format!(
                "need 1 < p < q < ∞, got p={p}, q={q}"
            )));
        }
        if !(alpha > 0.0 && alpha < n as f64) {
            return Err(Error::InvalidExponents(format!(
                "need 0 < alpha < n, got alpha={alpha}, n={n}"
            )));
        }
        if !(beta > 0.0 && beta < m as f64) {
            return Err(Error::InvalidExponents(format!(
                "need 0 < beta < m, got beta={beta}, m={m}"
            )));
        }
        Ok(ExponentConfig {
            n,
            m,
            p,
            q,
            alpha,
            beta,
        })
    }

    /// The exponents with α/n = β/m = 1/p − 1/q.
    pub fn balanced(n: usize, m: usize, p: f64, q: f64) -> Result<Self> {
        let gap = 1.0 / p - 1.0 / q;
        Self::new(n, m, p, q, n as f64 * gap, m as f64 * gap)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Hölder conjugate p/(p−1).
    pub fn dual_p(&self) -> f64 {
        self.p / (self.p - 1.0)
    }

    pub fn dim(&self, factor: Factor) -> usize {
        match factor {
            Factor::First => self.n,
            Factor::Second => self.m,
        }
    }

    /// α on the first factor, β on the second.
    pub fn order(&self, factor: Factor) -> f64 {
        match factor {
            Factor::First => self.alpha,
            Factor::Second => self.beta,
        }
    }

    pub fn is_balanced(&self) -> bool {
        let gap = 1.0 / self.p - 1.0 / self.q;
        let close = |a: f64, b: f64| (a - b).abs() <= BALANCE_TOL * a.abs().max(b.abs());
        close(self.alpha / self.n as f64, gap) && close(self.beta / self.m as f64, gap)
    }
}
