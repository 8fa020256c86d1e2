//! The F-polynomial value type shared by the three computation routes.
//!
//! An [`FPolynomial`] is a polynomial with integer coefficients in the
//! variables `u_0 .. u_{n-1}`.  Terms are serialized in descending graded
//! lexicographic order, e.g. `2*u1*u2*u5 + u0*u2*u5 + ... + 1`, and the
//! format round-trips through [`FPolynomial::parse`].

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

/// Errors from parsing the textual polynomial format.
#[derive(Debug, Error)]
pub enum PolyParseError {
    #[error("bad term `{0}`")]
    BadTerm(String),
    #[error("variable index {0} out of range for {1} variables")]
    VarOutOfRange(usize, usize),
}

/// A sparse multivariate polynomial in `u_0 .. u_{n-1}` with integer
/// coefficients; zero coefficients are never stored.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FPolynomial {
    /// Number of variables.
    pub n: usize,
    terms: BTreeMap<Vec<u32>, i64>,
}

impl FPolynomial {
    /// The zero polynomial.
    pub fn zero(n: usize) -> Self {
        FPolynomial {
            n,
            terms: BTreeMap::new(),
        }
    }

    /// The constant polynomial 1.
    pub fn one(n: usize) -> Self {
        let mut p = Self::zero(n);
        p.add_term(&vec![0; n], 1);
        p
    }

    /// Adds `coeff * u^expo` to the polynomial.
    pub fn add_term(&mut self, expo: &[u32], coeff: i64) {
        assert_eq!(expo.len(), self.n);
        let entry = self.terms.entry(expo.to_vec()).or_insert(0);
        *entry += coeff;
        if *entry == 0 {
            self.terms.remove(expo);
        }
    }

    /// The coefficient of `u^expo` (zero when absent).
    pub fn coefficient(&self, expo: &[u32]) -> i64 {
        self.terms.get(expo).copied().unwrap_or(0)
    }

    /// Number of terms with nonzero coefficient.
    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    /// Iterates over `(exponent, coefficient)` pairs in map order.
    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &i64)> {
        self.terms.iter()
    }

    /// Evaluates the polynomial at `u_i = 1` for all `i`.
    pub fn eval_at_one(&self) -> i64 {
        self.terms.values().sum()
    }

    /// Terms sorted in descending graded lexicographic order.
    fn sorted_terms(&self) -> Vec<(&Vec<u32>, i64)> {
        let mut v: Vec<(&Vec<u32>, i64)> = self.terms.iter().map(|(e, &c)| (e, c)).collect();
        v.sort_by(|a, b| {
            let da: u32 = a.0.iter().sum();
            let db: u32 = b.0.iter().sum();
            // Higher total degree first; ties broken by ascending
            // lexicographic order on the exponent vector.
            db.cmp(&da).then_with(|| a.0.cmp(b.0))
        });
        v
    }

    /// Parses the `Display` format back into a polynomial over `n` variables.
    pub fn parse(s: &str, n: usize) -> Result<Self, PolyParseError> {
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let mut p = Self::zero(n);
        if compact == "0" {
            return Ok(p);
        }
        for term in compact.split('+') {
            let mut coeff: i64 = 1;
            let mut expo = vec![0u32; n];
            let mut saw_factor = false;
            for factor in term.split('*') {
                if factor.is_empty() {
                    return Err(PolyParseError::BadTerm(term.into()));
                }
                if let Some(rest) = factor.strip_prefix('u') {
                    let (idx_str, exp_str) = match rest.split_once('^') {
                        Some((i, e)) => (i, e),
                        None => (rest, "1"),
                    };
                    let idx: usize = idx_str
                        .parse()
                        .map_err(|_| PolyParseError::BadTerm(term.into()))?;
                    let e: u32 = exp_str
                        .parse()
                        .map_err(|_| PolyParseError::BadTerm(term.into()))?;
                    if idx >= n {
                        return Err(PolyParseError::VarOutOfRange(idx, n));
                    }
                    expo[idx] += e;
                } else {
                    coeff = factor
                        .parse()
                        .map_err(|_| PolyParseError::BadTerm(term.into()))?;
                }
                saw_factor = true;
            }
            if !saw_factor {
                return Err(PolyParseError::BadTerm(term.into()));
            }
            p.add_term(&expo, coeff);
        }
        Ok(p)
    }
}

impl fmt::Display for FPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (expo, coeff) in self.sorted_terms() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let mut factors: Vec<String> = Vec::new();
            if coeff != 1 || expo.iter().all(|&e| e == 0) {
                factors.push(coeff.to_string());
            }
            for (i, &e) in expo.iter().enumerate() {
                match e {
                    0 => {}
                    1 => factors.push(format!("u{i}")),
                    _ => factors.push(format!("u{i}^{e}")),
                }
            }
            write!(f, "{}", factors.join("*"))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display_and_parse_round_trip() {
        let mut p = FPolynomial::zero(6);
        p.add_term(&[0, 0, 0, 0, 0, 0], 1);
        p.add_term(&[0, 1, 1, 0, 0, 1], 2);
        p.add_term(&[1, 0, 1, 0, 0, 1], 1);
        p.add_term(&[0, 1, 2, 0, 1, 1], 1);
        let text = p.to_string();
        assert_eq!(text, "u1*u2^2*u4*u5 + 2*u1*u2*u5 + u0*u2*u5 + 1");
        let back = FPolynomial::parse(&text, 6).unwrap();
        assert_eq!(back, p);
    }

    #[test]
    fn zero_and_one() {
        assert_eq!(FPolynomial::zero(3).to_string(), "0");
        assert_eq!(FPolynomial::one(3).to_string(), "1");
        assert_eq!(FPolynomial::parse("0", 3).unwrap(), FPolynomial::zero(3));
    }

    #[test]
    fn cancellation_removes_terms() {
        let mut p = FPolynomial::zero(2);
        p.add_term(&[1, 0], 3);
        p.add_term(&[1, 0], -3);
        assert_eq!(p, FPolynomial::zero(2));
    }
}
