//! Ground-truth F-polynomials via exact seed mutation with principal
//! coefficients.
//!
//! A [`Seed`] carries a framed quiver together with one Laurent polynomial
//! per mutable vertex, expressed in the initial variables
//! `x_0 .. x_{n-1}, y_0 .. y_{n-1}`.  Mutation applies the exchange relation
//! with exact multivariate division; a failed division would contradict the
//! Laurent phenomenon and is reported as an error rather than papered over.
//!
//! The F-polynomial of a cluster variable is obtained by substituting
//! `x_i := 1`, leaving a polynomial in the frozen variables (relabeled
//! `u_0 .. u_{n-1}`).  [`enumerate_cluster_variables`] breadth-first-searches
//! the (finite) seed graph and returns every non-initial cluster variable's
//! F-polynomial keyed by denominator vector.

use std::collections::{BTreeMap, HashSet, VecDeque};
use std::fmt;

use thiserror::Error;

use crate::poly::FPolynomial;
use crate::quiver::Quiver;

/// Errors from seed mutation and enumeration.
#[derive(Debug, Error)]
pub enum OracleError {
    /// A mutation division left a remainder: the Laurent phenomenon failed,
    /// which signals a construction bug upstream.
    #[error("inexact division during mutation at vertex {0}: Laurent phenomenon violated")]
    InexactDivision(usize),
    /// Mutation was requested at a frozen or out-of-range vertex.
    #[error("vertex {0} is not mutable")]
    NotMutable(usize),
    /// The seed BFS hit its depth limit before closing.
    #[error("cluster enumeration incomplete at depth {0}")]
    IncompleteEnumeration(usize),
    /// No cluster variable matched the requested target.
    #[error("no cluster variable with denominator vector {0:?}")]
    TargetNotFound(Vec<i64>),
}

/// A sparse Laurent polynomial over `Z` in `nvars` variables; exponents may
/// be negative, zero coefficients are never stored.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LaurentPoly {
    /// Number of variables.
    pub nvars: usize,
    terms: BTreeMap<Vec<i32>, i64>,
}

impl LaurentPoly {
    /// The zero polynomial.
    pub fn zero(nvars: usize) -> Self {
        LaurentPoly {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    /// The constant 1.
    pub fn one(nvars: usize) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(&vec![0; nvars], 1);
        p
    }

    /// The single variable `x_i`.
    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        let mut p = Self::zero(nvars);
        p.add_term(&e, 1);
        p
    }

    /// Adds `coeff * x^expo`.
    pub fn add_term(&mut self, expo: &[i32], coeff: i64) {
        assert_eq!(expo.len(), self.nvars);
        let entry = self.terms.entry(expo.to_vec()).or_insert(0);
        *entry += coeff;
        if *entry == 0 {
            self.terms.remove(expo);
        }
    }

    /// Whether this is the zero polynomial.
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Iterates over `(exponent, coefficient)` pairs.
    pub fn terms(&self) -> impl Iterator<Item = (&Vec<i32>, &i64)> {
        self.terms.iter()
    }

    /// Sum of two polynomials.
    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.nvars, other.nvars);
        let mut out = self.clone();
        for (e, &c) in other.terms() {
            out.add_term(e, c);
        }
        out
    }

    /// Product of two polynomials.
    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.nvars, other.nvars);
        let mut out = Self::zero(self.nvars);
        for (ea, &ca) in self.terms() {
            for (eb, &cb) in other.terms() {
                let e: Vec<i32> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.add_term(&e, ca * cb);
            }
        }
        out
    }

    /// Graded-lex leading term: maximal by (total degree, exponent vector).
    fn leading(&self) -> Option<(&Vec<i32>, i64)> {
        self.terms
            .iter()
            .max_by(|a, b| {
                let da: i32 = a.0.iter().sum();
                let db: i32 = b.0.iter().sum();
                da.cmp(&db).then_with(|| a.0.cmp(b.0))
            })
            .map(|(e, &c)| (e, c))
    }

    /// Per-variable minimum and maximum exponents over all terms.
    fn exponent_box(&self) -> Option<(Vec<i32>, Vec<i32>)> {
        let mut it = self.terms.keys();
        let first = it.next()?;
        let mut lo = first.clone();
        let mut hi = first.clone();
        for e in it {
            for i in 0..self.nvars {
                lo[i] = lo[i].min(e[i]);
                hi[i] = hi[i].max(e[i]);
            }
        }
        Some((lo, hi))
    }

    /// Exact division in the Laurent ring: returns `q` with `self = q * g`,
    /// or `None` when no such Laurent polynomial exists.
    ///
    /// Uses leading-term elimination under the graded-lex order.  Because a
    /// Laurent monomial always divides another, inexactness is detected via
    /// the Newton polytope: every quotient monomial of an exact division
    /// must lie in the box `[min(f)-min(g), max(f)-max(g)]` per variable,
    /// which also bounds the number of elimination steps.
    pub fn exact_div(&self, g: &Self) -> Option<Self> {
        assert_eq!(self.nvars, g.nvars);
        if g.is_zero() {
            return None;
        }
        if self.is_zero() {
            return Some(Self::zero(self.nvars));
        }
        let (flo, fhi) = self.exponent_box().unwrap();
        let (glo, ghi) = g.exponent_box().unwrap();
        let qlo: Vec<i32> = flo.iter().zip(&glo).map(|(a, b)| a - b).collect();
        let qhi: Vec<i32> = fhi.iter().zip(&ghi).map(|(a, b)| a - b).collect();
        let (ge, gc) = g.leading().unwrap();
        let ge = ge.clone();
        let mut rem = self.clone();
        let mut q = Self::zero(self.nvars);
        while let Some((fe, fc)) = rem.leading() {
            if fc % gc != 0 {
                return None;
            }
            let te: Vec<i32> = fe.iter().zip(&ge).map(|(a, b)| a - b).collect();
            if te.iter().zip(&qlo).any(|(t, lo)| t < lo)
                || te.iter().zip(&qhi).any(|(t, hi)| t > hi)
            {
                return None;
            }
            let tc = fc / gc;
            let mut t = Self::zero(self.nvars);
            t.add_term(&te, tc);
            q.add_term(&te, tc);
            rem = rem.add(&t.mul(g).negate());
        }
        Some(q)
    }

    fn negate(&self) -> Self {
        let mut out = Self::zero(self.nvars);
        for (e, &c) in self.terms() {
            out.add_term(e, -c);
        }
        out
    }
}

impl fmt::Display for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(e, c)| {
                let mut factors: Vec<String> = Vec::new();
                if *c != 1 || e.iter().all(|&x| x == 0) {
                    factors.push(c.to_string());
                }
                for (i, &x) in e.iter().enumerate() {
                    match x {
                        0 => {}
                        1 => factors.push(format!("x{i}")),
                        _ => factors.push(format!("x{i}^{x}")),
                    }
                }
                factors.join("*")
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// An extended seed: a principally extended quiver plus one Laurent
/// polynomial per mutable vertex, in the `2n` initial variables (mutable `x`
/// then frozen `y`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Seed {
    /// The extended quiver (vertices `0..n` mutable, `n..2n` frozen).
    pub quiver: Quiver,
    /// Cluster entries for the mutable vertices.
    pub cluster: Vec<LaurentPoly>,
}

impl Seed {
    /// The initial extended seed of `q`: the principal extension with frozen
    /// vertices `n .. 2n` attached by arrows `i -> n + i`, and
    /// `cluster[i] = x_i`.
    ///
    /// The attachment direction is chosen so that the exponent vectors of the
    /// resulting F-polynomials index submodule dimension vectors of the
    /// associated Jacobian-algebra module (the convention used by the
    /// e-vector and dimer routes); the opposite attachment would index
    /// quotients instead.
    pub fn initial(q: &Quiver) -> Self {
        assert_eq!(q.frozen, 0, "quiver must be unframed");
        let mut arrows = q.arrows().to_vec();
        for i in 0..q.n {
            arrows.push((i, q.n + i));
        }
        let extended = Quiver::with_frozen(2 * q.n, q.n, arrows)
            .expect("principal extension of a valid quiver is valid");
        let cluster = (0..q.n).map(|i| LaurentPoly::var(2 * q.n, i)).collect();
        Seed {
            quiver: extended,
            cluster,
        }
    }

    /// Value of vertex `v` in the ambient field: a cluster entry for mutable
    /// vertices, the frozen generator itself otherwise.
    pub fn value(&self, v: usize) -> LaurentPoly {
        let n = self.cluster.len();
        if v < n {
            self.cluster[v].clone()
        } else {
            LaurentPoly::var(2 * n, v)
        }
    }

    /// Canonical key for breadth-first deduplication: the sorted cluster
    /// content (in finite type the cluster determines the seed).
    pub fn key(&self) -> Vec<LaurentPoly> {
        let mut k = self.cluster.clone();
        k.sort();
        k
    }
}

/// Mutates the seed at mutable vertex `k`: the exchange relation
/// `x_k' * x_k = prod_{i -> k} x_i + prod_{k -> j} x_j` with exact division,
/// and quiver mutation.  Frozen variables participate as sources/targets.
pub fn mutate_seed(s: &Seed, k: usize) -> Result<Seed, OracleError> {
    let n = s.cluster.len();
    if k >= n {
        return Err(OracleError::NotMutable(k));
    }
    let nvars = 2 * n;
    let mut in_prod = LaurentPoly::one(nvars);
    for i in s.quiver.arrows_into(k) {
        in_prod = in_prod.mul(&s.value(i));
    }
    let mut out_prod = LaurentPoly::one(nvars);
    for j in s.quiver.arrows_from(k) {
        out_prod = out_prod.mul(&s.value(j));
    }
    let numerator = in_prod.add(&out_prod);
    let new_entry = numerator
        .exact_div(&s.cluster[k])
        .ok_or(OracleError::InexactDivision(k))?;
    let mut cluster = s.cluster.clone();
    cluster[k] = new_entry;
    let quiver = s.quiver.mutate(k).map_err(|_| OracleError::NotMutable(k))?;
    Ok(Seed { quiver, cluster })
}

/// Extracts the F-polynomial of a cluster variable by substituting
/// `x_i := 1` and relabeling the frozen variables `u_0 .. u_{n-1}`.
pub fn f_polynomial_of_variable(x: &LaurentPoly, n: usize) -> FPolynomial {
    assert_eq!(x.nvars, 2 * n);
    let mut f = FPolynomial::zero(n);
    for (e, &c) in x.terms() {
        let u: Vec<u32> = e[n..]
            .iter()
            .map(|&y| u32::try_from(y).expect("frozen exponents are nonnegative"))
            .collect();
        f.add_term(&u, c);
    }
    f
}

/// Denominator vector of a cluster variable: `d_i` is the negated minimum
/// exponent of `x_i` over all terms (initial variables get an entry `-1`).
pub fn denominator_vector(x: &LaurentPoly, n: usize) -> Vec<i64> {
    let mut d = vec![i64::MIN; n];
    for (e, _) in x.terms() {
        for i in 0..n {
            d[i] = d[i].max(-(e[i] as i64));
        }
    }
    d
}

/// How [`f_polynomial_mutation`] identifies its target cluster variable.
#[derive(Debug, Clone)]
pub enum Target {
    /// Apply this mutation word to the initial seed; the variable created by
    /// the final mutation is the target.
    Word(Vec<usize>),
    /// Search the cluster-variable enumeration for this denominator vector.
    Denominator(Vec<i64>),
}

/// Computes the F-polynomial of one cluster variable of `q` identified by a
/// mutation word or a denominator vector.
pub fn f_polynomial_mutation(q: &Quiver, target: &Target) -> Result<FPolynomial, OracleError> {
    match target {
        Target::Word(word) => {
            let mut seed = Seed::initial(q);
            let mut last = None;
            for &k in word {
                seed = mutate_seed(&seed, k)?;
                last = Some(k);
            }
            let k = last.unwrap_or(0);
            if word.is_empty() {
                return Ok(FPolynomial::one(q.n));
            }
            Ok(f_polynomial_of_variable(&seed.cluster[k], q.n))
        }
        Target::Denominator(d) => {
            let vars = enumerate_cluster_variables(q, 64)?;
            vars.get(d)
                .cloned()
                .ok_or_else(|| OracleError::TargetNotFound(d.clone()))
        }
    }
}

/// Breadth-first search over seeds until closure, returning every
/// non-initial cluster variable's F-polynomial keyed by denominator vector.
/// Terminates because type `D_n` is of finite cluster type; `depth_limit`
/// guards against runaway input.
pub fn enumerate_cluster_variables(
    q: &Quiver,
    depth_limit: usize,
) -> Result<BTreeMap<Vec<i64>, FPolynomial>, OracleError> {
    let n = q.n;
    let init = Seed::initial(q);
    let initial_vars: HashSet<LaurentPoly> = init.cluster.iter().cloned().collect();
    let mut out: BTreeMap<Vec<i64>, FPolynomial> = BTreeMap::new();
    let mut seen: HashSet<Vec<LaurentPoly>> = HashSet::new();
    seen.insert(init.key());
    let mut frontier = vec![init];
    let mut depth = 0;
    while !frontier.is_empty() {
        if depth > depth_limit {
            return Err(OracleError::IncompleteEnumeration(depth_limit));
        }
        let mut next = Vec::new();
        for seed in &frontier {
            for k in 0..n {
                let m = mutate_seed(seed, k)?;
                let x = &m.cluster[k];
                if !initial_vars.contains(x) {
                    let d = denominator_vector(x, n);
                    let f = f_polynomial_of_variable(x, n);
                    if let Some(prev) = out.get(&d) {
                        debug_assert_eq!(
                            prev, &f,
                            "two cluster variables share denominator vector {d:?}"
                        );
                    } else {
                        out.insert(d, f);
                    }
                }
                if seen.insert(m.key()) {
                    next.push(m);
                }
            }
        }
        frontier = next;
        depth += 1;
    }
    Ok(out)
}

/// Convenience queue-based variant used by tests that need the seed count.
pub fn count_seeds(q: &Quiver, depth_limit: usize) -> Result<usize, OracleError> {
    let init = Seed::initial(q);
    let mut seen: HashSet<Vec<LaurentPoly>> = HashSet::new();
    seen.insert(init.key());
    let mut queue = VecDeque::from([(init, 0usize)]);
    while let Some((seed, d)) = queue.pop_front() {
        if d >= depth_limit {
            return Err(OracleError::IncompleteEnumeration(depth_limit));
        }
        for k in 0..q.n {
            let m = mutate_seed(&seed, k)?;
            if seen.insert(m.key()) {
                queue.push_back((m, d + 1));
            }
        }
    }
    Ok(seen.len())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quiver(n: usize, arrows: &[(usize, usize)]) -> Quiver {
        Quiver::new(n, arrows.to_vec()).unwrap()
    }

    /// The once-punctured pentagon quiver (vertices 0-based): a self-folded
    /// pair 3, 4 attached to 2, and an internal triangle on 0, 1, 2.
    fn pentagon() -> Quiver {
        quiver(5, &[(1, 0), (0, 2), (2, 1), (3, 2), (4, 2)])
    }

    #[test]
    fn exchange_relation_punctured_pentagon() {
        // Mutating at vertex 2 (the paper's vertex 3, 1-based) must produce
        // x_2' = (x_0 x_3 x_4 + x_1) / x_2.
        let seed = Seed::initial(&pentagon());
        let m = mutate_seed(&seed, 2).unwrap();
        // The frozen arrow 2 -> 7 contributes y_2 to the outgoing product.
        let mut with_coeff = LaurentPoly::zero(10);
        with_coeff.add_term(&[1, 0, -1, 1, 1, 0, 0, 0, 0, 0], 1);
        with_coeff.add_term(&[0, 1, -1, 0, 0, 0, 0, 1, 0, 0], 1);
        assert_eq!(m.cluster[2], with_coeff);
    }

    #[test]
    fn mutation_is_involutive_on_seeds() {
        let seed = Seed::initial(&pentagon());
        for k in 0..5 {
            let twice = mutate_seed(&mutate_seed(&seed, k).unwrap(), k).unwrap();
            assert_eq!(twice, seed);
        }
    }

    #[test]
    fn framed_a1_f_polynomial() {
        let q = quiver(1, &[]);
        let f = f_polynomial_mutation(&q, &Target::Word(vec![0])).unwrap();
        assert_eq!(f.to_string(), "u0 + 1");
    }

    #[test]
    fn framed_a2_f_polynomials() {
        let q = quiver(2, &[(0, 1)]);
        let f = f_polynomial_mutation(&q, &Target::Word(vec![0])).unwrap();
        assert_eq!(f.to_string(), "u0 + 1");
        let vars = enumerate_cluster_variables(&q, 16).unwrap();
        // A_2 has 5 cluster variables, 2 initial.
        assert_eq!(vars.len(), 3);
        for f in vars.values() {
            assert_eq!(f.coefficient(&vec![0; 2]), 1);
            assert!(f.terms().all(|(_, &c)| c > 0));
        }
    }

    #[test]
    fn d4_enumeration_counts() {
        let q = quiver(4, &[(0, 2), (1, 2), (2, 3)]);
        let vars = enumerate_cluster_variables(&q, 32).unwrap();
        // Type D_n has n^2 cluster variables, n of them initial.
        assert_eq!(vars.len(), 12);
        for f in vars.values() {
            assert_eq!(f.coefficient(&vec![0; 4]), 1);
            assert!(f.terms().all(|(_, &c)| c > 0));
        }
    }

    /// The running D_6 type IV example: central 3-cycle `5 -> 3 -> 4 -> 5`,
    /// spike 2 (triangle `3 -> 2 -> 5`), and a tail 3-cycle `2 -> 1 -> 0 -> 2`.
    fn d6_type_iv() -> Quiver {
        quiver(
            6,
            &[
                (5, 3),
                (3, 4),
                (4, 5),
                (3, 2),
                (2, 5),
                (2, 1),
                (1, 0),
                (0, 2),
            ],
        )
    }

    #[test]
    fn d6_type_iv_deep_variable() {
        // The variable with denominator vector (1,1,2,1,1,1) has a 22-term
        // F-polynomial whose only coefficients bigger than 1 are the 2's on
        // u1*u2*u5 and u1*u2*u4*u5.  Its linear terms are u1 and u5: the
        // vertices whose only outgoing arrows (1 -> 0 and 5 -> 3) carry zero
        // maps in the associated module, so the unit vectors there index
        // one-dimensional submodules.
        let expected = FPolynomial::parse(
            "1+u1+u5+u1*u5+u4*u5+u1*u2+u2*u5+u2*u4*u5+u1*u4*u5+2*u1*u2*u5+u0*u2*u5\
             +2*u1*u2*u4*u5+u0*u2*u4*u5+u1*u2^2*u5+u0*u1*u2*u5+u1*u2*u3*u4*u5+u1*u2^2*u4*u5\
             +u0*u1*u2*u4*u5+u0*u1*u2^2*u5+u1*u2^2*u3*u4*u5+u0*u1*u2^2*u4*u5+u0*u1*u2^2*u3*u4*u5",
            6,
        )
        .unwrap();
        let vars = enumerate_cluster_variables(&d6_type_iv(), 64).unwrap();
        // D_6 has 6^2 cluster variables, 6 of them initial.
        assert_eq!(vars.len(), 30);
        let deep = vars.get(&vec![1, 1, 2, 1, 1, 1]).expect("deep variable");
        assert_eq!(*deep, expected);
    }

    #[test]
    fn exact_division_detects_failure() {
        let f = LaurentPoly::var(2, 0).add(&LaurentPoly::one(2));
        let g = LaurentPoly::var(2, 1).add(&LaurentPoly::one(2));
        assert!(f.exact_div(&g).is_none());
        let prod = f.mul(&g);
        assert_eq!(prod.exact_div(&g).unwrap(), f);
        assert_eq!(prod.exact_div(&f).unwrap(), g);
    }
}
