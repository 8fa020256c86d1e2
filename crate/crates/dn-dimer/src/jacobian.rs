//! Potentials, cyclic derivatives, Jacobian ideals, and the arc-to-module
//! construction with singular-arrow detection.
//!
//! A [`Potential`] is a finite integer combination of oriented cycles in a
//! quiver; its cyclic derivatives generate the Jacobian ideal.  Modules over
//! the Jacobian algebra attached to arcs on the once-punctured polygon are
//! built by [`module_from_arc`]; arrows carrying the zero map between nonzero
//! spaces are *singular* and drive the dimer model's minimal matching.
//!
//! Arrows are identified by their `(source, target)` pair; quivers arising
//! from triangulations of the once-punctured polygon never carry parallel
//! arrows, so the pair is unambiguous.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::surface::{
    crossing_number, potential_from_triangulation, quiver_from_triangulation, tagged_crossing,
    Arc, TaggedArc, Triangulation,
};

/// Errors from potential and module construction.
#[derive(Debug, Error)]
pub enum JacobianError {
    /// The arrow sequence does not close up into a cycle.
    #[error("arrow sequence is not a cycle")]
    NotACycle,
    /// The Grassmannian point count was requested beyond the size gate.
    #[error("module too large for point counting: total dimension {0} > {1}")]
    TooLarge(usize, usize),
    /// Unsupported finite field size.
    #[error("unsupported field size {0}; use 2, 3, or 5")]
    BadFieldSize(u64),
    /// A constructed module violated a Jacobian relation (construction bug).
    #[error("relation violated: {0}")]
    RelationViolation(String),
    /// The arc's computed crossings disagree with its crossing numbers.
    #[error("crossing mismatch: {0}")]
    CrossingMismatch(String),
}

/// A directed path, stored as a sequence of arrows composed left to right:
/// the target of each arrow equals the source of the next.
pub type Path = Vec<(usize, usize)>;

/// Rotates a cycle to its lexicographically smallest rotation.
fn canonical_rotation(cycle: &[(usize, usize)]) -> Path {
    let mut best: Path = cycle.to_vec();
    for r in 1..cycle.len() {
        let mut rot: Path = cycle[r..].to_vec();
        rot.extend_from_slice(&cycle[..r]);
        if rot < best {
            best = rot;
        }
    }
    best
}

/// A finite integer combination of cycles in a quiver, stored up to cyclic
/// equivalence (each cycle in canonical rotation), sorted for determinism.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Potential {
    terms: Vec<(i64, Path)>,
}

impl Potential {
    /// The zero potential.
    pub fn zero() -> Self {
        Potential::default()
    }

    /// Adds `coeff` times the cycle `arrows` (composed left to right).
    pub fn add_cycle(&mut self, coeff: i64, arrows: Path) -> Result<(), JacobianError> {
        if arrows.is_empty() {
            return Err(JacobianError::NotACycle);
        }
        for i in 0..arrows.len() {
            let next = (i + 1) % arrows.len();
            if arrows[i].1 != arrows[next].0 {
                return Err(JacobianError::NotACycle);
            }
        }
        let canon = canonical_rotation(&arrows);
        match self.terms.iter_mut().find(|(_, c)| *c == canon) {
            Some((c, _)) => *c += coeff,
            None => self.terms.push((coeff, canon)),
        }
        self.terms.retain(|(c, _)| *c != 0);
        self.terms.sort_by(|a, b| a.1.cmp(&b.1));
        Ok(())
    }

    /// The terms as `(coefficient, cycle)` pairs in deterministic order.
    pub fn terms(&self) -> &[(i64, Path)] {
        &self.terms
    }

    /// Whether the potential has no terms.
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// The set of arrows appearing in some term.
    pub fn arrows(&self) -> BTreeSet<(usize, usize)> {
        self.terms
            .iter()
            .flat_map(|(_, c)| c.iter().copied())
            .collect()
    }
}

/// A formal integer combination of paths (e.g. a cyclic derivative or a
/// Jacobian ideal generator), sorted and with zero coefficients dropped.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PathSum {
    terms: Vec<(i64, Path)>,
}

impl PathSum {
    /// The zero combination.
    pub fn zero() -> Self {
        PathSum::default()
    }

    /// Adds `coeff` times `path`.
    pub fn add_path(&mut self, coeff: i64, path: Path) {
        match self.terms.iter_mut().find(|(_, p)| *p == path) {
            Some((c, _)) => *c += coeff,
            None => self.terms.push((coeff, path)),
        }
        self.terms.retain(|(c, _)| *c != 0);
        self.terms.sort_by(|a, b| a.1.cmp(&b.1));
    }

    /// The terms as `(coefficient, path)` pairs in deterministic order.
    pub fn terms(&self) -> &[(i64, Path)] {
        &self.terms
    }

    /// Whether the combination has no terms.
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

/// The formal cyclic derivative of `w` with respect to `arrow`: for each
/// occurrence of the arrow in a cycle, the remainder of the cycle read
/// cyclically starting just after that occurrence.
pub fn cyclic_derivative(w: &Potential, arrow: (usize, usize)) -> PathSum {
    let mut out = PathSum::zero();
    for (coeff, cycle) in w.terms() {
        for (j, &a) in cycle.iter().enumerate() {
            if a == arrow {
                let mut rest: Path = cycle[j + 1..].to_vec();
                rest.extend_from_slice(&cycle[..j]);
                out.add_path(*coeff, rest);
            }
        }
    }
    out
}

/// Generators of the Jacobian ideal of `w`: one cyclic derivative per arrow
/// appearing in `w`, keyed by the arrow, in sorted arrow order.
pub fn jacobian_ideal(w: &Potential) -> Vec<((usize, usize), PathSum)> {
    w.arrows()
        .into_iter()
        .map(|a| (a, cyclic_derivative(w, a)))
        .collect()
}

/// Deterministic single-character-ish labels (`a`, `b`, ..., `z`, `a1`, ...)
/// for a sorted arrow list.
pub fn arrow_labels(arrows: &[(usize, usize)]) -> Vec<String> {
    (0..arrows.len())
        .map(|i| {
            let letter = (b'a' + (i % 26) as u8) as char;
            if i < 26 {
                letter.to_string()
            } else {
                format!("{letter}{}", i / 26)
            }
        })
        .collect()
}

/// Writes a path term using the given arrow labeling.
fn write_word(
    f: &mut fmt::Formatter<'_>,
    path: &[(usize, usize)],
    labeled: &[(usize, usize)],
    labels: &[String],
) -> fmt::Result {
    let multi = labels.iter().any(|l| l.len() > 1);
    for (i, a) in path.iter().enumerate() {
        if multi && i > 0 {
            write!(f, ".")?;
        }
        match labeled.binary_search(a) {
            Ok(pos) => write!(f, "{}", labels[pos])?,
            Err(_) => write!(f, "({}->{})", a.0, a.1)?,
        }
    }
    Ok(())
}

/// Writes a term list (`terms` of a potential or path sum) in the `+`/`-`
/// separated word format, labeling arrows by their sorted order within the
/// object itself.
fn write_terms(f: &mut fmt::Formatter<'_>, terms: &[(i64, Path)]) -> fmt::Result {
    if terms.is_empty() {
        return write!(f, "0");
    }
    let arrows: Vec<(usize, usize)> = terms
        .iter()
        .flat_map(|(_, p)| p.iter().copied())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let labels = arrow_labels(&arrows);
    for (i, (coeff, path)) in terms.iter().enumerate() {
        if i == 0 {
            if *coeff < 0 {
                write!(f, "-")?;
            }
        } else if *coeff < 0 {
            write!(f, "-")?;
        } else {
            write!(f, "+")?;
        }
        let mag = coeff.unsigned_abs();
        if mag != 1 {
            write!(f, "{mag}*")?;
        }
        write_word(f, path, &arrows, &labels)?;
    }
    Ok(())
}

impl fmt::Display for Potential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_terms(f, &self.terms)
    }
}

impl fmt::Display for PathSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_terms(f, &self.terms)
    }
}

/// An exact rational number; all geometry below fits comfortably in `i128`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Rat {
    n: i128,
    d: i128,
}

impl Rat {
    fn new(n: i128, d: i128) -> Self {
        debug_assert!(d != 0);
        let s = if d < 0 { -1 } else { 1 };
        let g = gcd(n.unsigned_abs(), d.unsigned_abs()).max(1) as i128;
        Rat {
            n: s * n / g,
            d: s * d / g,
        }
    }

    fn from_int(n: i128) -> Self {
        Rat { n, d: 1 }
    }

    fn add(self, o: Rat) -> Rat {
        Rat::new(self.n * o.d + o.n * self.d, self.d * o.d)
    }

    fn mul(self, o: Rat) -> Rat {
        Rat::new(self.n * o.n, self.d * o.d)
    }
}

fn gcd(a: u128, b: u128) -> u128 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

impl PartialOrd for Rat {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Rat {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.n * other.d).cmp(&(other.n * self.d))
    }
}

/// An arc drawn in the unrolled strip over the boundary line: chords and
/// loops are "tents" (piecewise-linear arches) and plain radii are
/// verticals up to the puncture line.  A notched radius is drawn as the
/// loop around the puncture at the same foot; the crossing sequence is
/// corrected afterwards (see `build_module`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Strand {
    Tent { a: i64, b: i64 },
    Vert { f: i64 },
}

impl Strand {
    fn translated(self, k: i64, n: i64) -> Strand {
        match self {
            Strand::Tent { a, b } => Strand::Tent {
                a: a + k * n,
                b: b + k * n,
            },
            Strand::Vert { f } => Strand::Vert { f: f + k * n },
        }
    }

    fn x_range(self) -> (i64, i64) {
        match self {
            Strand::Tent { a, b } => (a, b),
            Strand::Vert { f } => (f, f),
        }
    }

    /// Scaled integer polyline.  Tents are widened by their span so that
    /// arcs sharing a foot are drawn strictly nested (longer arc outside),
    /// which keeps all crossing points distinct.
    fn polyline(self, n: i64) -> Vec<(i64, i64)> {
        let s = 4 * n;
        let h = s * n * n;
        match self {
            Strand::Tent { a, b } => {
                let x0 = s * a - (b - a);
                let x1 = s * b + (b - a);
                vec![(x0, 0), ((x0 + x1) / 2, x1 - x0), (x1, 0)]
            }
            Strand::Vert { f } => vec![(s * f, 0), (s * f, h)],
        }
    }
}

fn strand_of_tagged(g: &TaggedArc, n: i64) -> Strand {
    match *g {
        TaggedArc::Chord { start, span } => Strand::Tent {
            a: start as i64,
            b: (start + span) as i64,
        },
        TaggedArc::Radius {
            foot,
            notched: false,
        } => Strand::Vert { f: foot as i64 },
        TaggedArc::Radius {
            foot,
            notched: true,
        } => Strand::Tent {
            a: foot as i64,
            b: foot as i64 + n,
        },
    }
}

fn strand_of_plain(a: &Arc, n: i64) -> Strand {
    match *a {
        Arc::Chord { start, span } => Strand::Tent {
            a: start as i64,
            b: (start + span) as i64,
        },
        Arc::Radius { foot } => Strand::Vert { f: foot as i64 },
        Arc::Loop { foot } => Strand::Tent {
            a: foot as i64,
            b: foot as i64 + n,
        },
    }
}

/// Whether two strands (the second already translated) cross exactly once;
/// all shared-endpoint and parallel configurations are non-crossing.
fn strands_cross(g: Strand, t: Strand) -> bool {
    match (g, t) {
        (Strand::Tent { a: c, b: d }, Strand::Tent { a, b }) => {
            (a < c && c < b && b < d) || (c < a && a < d && d < b)
        }
        (Strand::Tent { a, b }, Strand::Vert { f })
        | (Strand::Vert { f }, Strand::Tent { a, b }) => a < f && f < b,
        (Strand::Vert { .. }, Strand::Vert { .. }) => false,
    }
}

/// Transversal intersection of two closed segments, as the parameter along
/// the first segment together with the intersection point.
fn segment_intersection(
    a1: (i64, i64),
    a2: (i64, i64),
    b1: (i64, i64),
    b2: (i64, i64),
) -> Option<(Rat, (Rat, Rat))> {
    let r = (a2.0 - a1.0, a2.1 - a1.1);
    let s = (b2.0 - b1.0, b2.1 - b1.1);
    let cross = |u: (i64, i64), v: (i64, i64)| u.0 as i128 * v.1 as i128 - u.1 as i128 * v.0 as i128;
    let denom = cross(r, s);
    if denom == 0 {
        return None;
    }
    let qp = (b1.0 - a1.0, b1.1 - a1.1);
    let t = Rat::new(cross(qp, s), denom);
    let u = Rat::new(cross(qp, r), denom);
    let zero = Rat::from_int(0);
    let one = Rat::from_int(1);
    if t < zero || t > one || u < zero || u > one {
        return None;
    }
    let px = Rat::from_int(a1.0 as i128).add(t.mul(Rat::from_int(r.0 as i128)));
    let py = Rat::from_int(a1.1 as i128).add(t.mul(Rat::from_int(r.1 as i128)));
    Some((t, (px, py)))
}

/// The single crossing point of two strands known to cross, as a position
/// along `gpoly` (`gamma`'s polyline): segment index plus parameter.
fn crossing_position(
    gpoly: &[(i64, i64)],
    tau: Strand,
    n: i64,
) -> Result<(usize, Rat), JacobianError> {
    let tpoly = tau.polyline(n);
    let mut hits: Vec<((usize, Rat), (Rat, Rat))> = Vec::new();
    for gi in 0..gpoly.len() - 1 {
        for ti in 0..tpoly.len() - 1 {
            if let Some((t, pt)) =
                segment_intersection(gpoly[gi], gpoly[gi + 1], tpoly[ti], tpoly[ti + 1])
            {
                if !hits.iter().any(|(_, p)| *p == pt) {
                    hits.push(((gi, t), pt));
                }
            }
        }
    }
    if hits.len() != 1 {
        return Err(JacobianError::CrossingMismatch(format!(
            "expected one transversal point, found {}",
            hits.len()
        )));
    }
    Ok(hits[0].0)
}

/// A module over the Jacobian algebra of a triangulation, built from an arc.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArcModule {
    /// Dimension vector: the crossing vector of the arc.
    pub dims: Vec<u8>,
    /// One matrix per quiver arrow, shaped `dims[target] x dims[source]`.
    pub maps: BTreeMap<(usize, usize), Vec<Vec<i64>>>,
    /// Arrows carrying the zero map between nonzero spaces.
    pub singular: BTreeSet<(usize, usize)>,
}

/// The singular arrows of a module: zero matrices between nonzero spaces.
pub fn singular_arrows(m: &ArcModule) -> BTreeSet<(usize, usize)> {
    m.singular.clone()
}

/// Builds the module attached to a tagged arc `g` not in the triangulation;
/// its dimension vector is the tagged crossing vector of `g`.
pub fn module_from_arc(t: &Triangulation, g: &TaggedArc) -> Result<ArcModule, JacobianError> {
    let tv = t.tagged_view();
    let expected: Vec<u8> = tv
        .iter()
        .map(|o| tagged_crossing(g, o, t.n) as u8)
        .collect();
    // A notched radius is drawn as its lollipop: the loop at the same foot,
    // with the two crossings of each arc straddling the foot identified.
    let folded = matches!(
        *g,
        TaggedArc::Radius {
            notched: true,
            ..
        }
    );
    build_module(t, strand_of_tagged(g, t.n as i64), &expected, folded, true)
}

/// Builds the module attached to a plain ideal arc (including loops, which
/// are not tagged arcs); its dimension vector is the plain crossing vector.
pub fn module_from_ideal_arc(t: &Triangulation, a: &Arc) -> Result<ArcModule, JacobianError> {
    let expected: Vec<u8> = t
        .arcs()
        .iter()
        .map(|b| crossing_number(a, b, t.n) as u8)
        .collect();
    build_module(t, strand_of_plain(a, t.n as i64), &expected, false, false)
}

fn build_module(
    t: &Triangulation,
    gamma: Strand,
    expected: &[u8],
    folded: bool,
    tagged: bool,
) -> Result<ArcModule, JacobianError> {
    let n = t.n as i64;
    let tv = t.tagged_view();
    let strands: Vec<Strand> = tv.iter().map(|g| strand_of_tagged(g, n)).collect();
    // Traverse gamma with decreasing x for tents (so that wrapping segments
    // run clockwise ahead of the traversal), upward for radial strands.
    let mut gpoly = gamma.polyline(n);
    if matches!(gamma, Strand::Tent { .. }) {
        gpoly.reverse();
    }
    // All crossings of gamma with every translate of every arc of T.
    let (gx0, gx1) = gamma.x_range();
    let mut crossings: Vec<((usize, Rat), usize)> = Vec::new();
    for (i, tau) in strands.iter().enumerate() {
        let (tx0, tx1) = tau.x_range();
        let k_min = (gx0 - tx1).div_euclid(n) - 1;
        let k_max = (gx1 - tx0).div_euclid(n) + 1;
        for k in k_min..=k_max {
            let tk = tau.translated(k, n);
            if strands_cross(gamma, tk) {
                crossings.push((crossing_position(&gpoly, tk, n)?, i));
            }
        }
    }
    crossings.sort_by(|a, b| a.0 .0.cmp(&b.0 .0).then(a.0 .1.cmp(&b.0 .1)));
    // Self-folded pockets: the notched radius is drawn as the loop at its
    // foot, so gamma meets a pocket in passes (loop, radius, loop).  Each
    // pass carries a single tagged crossing of the notched radius: the two
    // loop crossings are identified when gamma is an embedded arc, and
    // vanish when gamma itself wraps the puncture the same way.  The
    // clockwise-forward loop crossing of a pass stays transparent for the
    // radius crossing it flanks.
    let mut deleted = vec![false; crossings.len()];
    let mut pass_exit: BTreeMap<usize, usize> = BTreeMap::new();
    let mut pass_entry: BTreeMap<usize, usize> = BTreeMap::new();
    let mut pass_merge: Vec<(usize, usize, usize)> = Vec::new();
    if tagged {
        for (ir, s) in tv.iter().enumerate() {
            let TaggedArc::Radius {
                foot,
                notched: false,
            } = *s
            else {
                continue;
            };
            let Some(il) = tv.iter().position(|o| {
                *o == TaggedArc::Radius {
                    foot,
                    notched: true,
                }
            }) else {
                continue;
            };
            for m in 0..crossings.len() {
                if crossings[m].1 != ir {
                    continue;
                }
                let flanked = m > 0
                    && m + 1 < crossings.len()
                    && crossings[m - 1].1 == il
                    && crossings[m + 1].1 == il;
                if !flanked {
                    return Err(JacobianError::CrossingMismatch(format!(
                        "pocket radius crossing at position {m} is not flanked by loop crossings"
                    )));
                }
                if folded {
                    deleted[m - 1] = true;
                    deleted[m + 1] = true;
                } else {
                    pass_merge.push((il, m - 1, m + 1));
                }
                pass_exit.insert(m, m + 1);
                // A pass that runs through the pocket (different arcs, or
                // the end of the curve, on its two sides) is transparent in
                // both directions; a pass that turns back (the same arc on
                // both sides) keeps only the clockwise-forward exit.
                let before = m.checked_sub(2).map(|p| crossings[p].1);
                let after = crossings.get(m + 2).map(|c| c.1);
                let through = match (before, after) {
                    (Some(a), Some(b)) => a != b,
                    _ => true,
                };
                if through {
                    pass_entry.insert(m, m - 1);
                }
            }
        }
    }
    // Raw crossing slots per arc that survive pass deletion, as indices
    // into the ordered sequence.
    let alive_slots: Vec<Vec<usize>> = (0..t.n)
        .map(|i| {
            crossings
                .iter()
                .enumerate()
                .filter(|(m, (_, arc))| *arc == i && !deleted[*m])
                .map(|(m, _)| m)
                .collect()
        })
        .collect();
    // Basis classes per arc: surviving crossings, with the pair of a pass
    // identified, and with the pair of crossings of a straddling arc
    // collapsed when the curve is a folded lollipop.
    let classes: Vec<Vec<Vec<usize>>> = (0..t.n)
        .map(|i| {
            let alive = &alive_slots[i];
            if folded && alive.len() == 2 && expected[i] == 1 {
                return vec![alive.clone()];
            }
            let mut groups: Vec<Vec<usize>> = alive.iter().map(|&m| vec![m]).collect();
            for &(arc, lo, hi) in &pass_merge {
                if arc != i {
                    continue;
                }
                let g1 = groups.iter().position(|g| g.contains(&lo)).unwrap();
                let g2 = groups.iter().position(|g| g.contains(&hi)).unwrap();
                if g1 != g2 {
                    let moved = std::mem::take(&mut groups[g2]);
                    groups[g1].extend(moved);
                    groups[g1].sort_unstable();
                }
            }
            groups.retain(|g| !g.is_empty());
            groups
        })
        .collect();
    let dims: Vec<u8> = classes.iter().map(|c| c.len() as u8).collect();
    if dims != expected {
        return Err(JacobianError::CrossingMismatch(format!(
            "crossing sequence gives {dims:?}, crossing numbers give {expected:?}"
        )));
    }
    // Two crossings are adjacent when every crossing between them is gone
    // (a deleted pass pair), or is the forward loop crossing of a pass
    // whose radius crossing is one of the endpoints.  Wrapping steps use
    // the strict form of the test.
    let adjacent = |a: usize, b: usize, wrap: bool| {
        let (lo, hi) = (a.min(b), a.max(b));
        (lo + 1..hi).all(|m| {
            deleted[m]
                || (!wrap
                    && (pass_exit.get(&a) == Some(&m)
                        || pass_exit.get(&b) == Some(&m)
                        || pass_entry.get(&a) == Some(&m)
                        || pass_entry.get(&b) == Some(&m)))
        })
    };
    let q = quiver_from_triangulation(t);
    let mut maps: BTreeMap<(usize, usize), Vec<Vec<i64>>> = BTreeMap::new();
    let mut singular: BTreeSet<(usize, usize)> = BTreeSet::new();
    for &(i, k) in q.arrows() {
        let src = &classes[i];
        let tgt = &classes[k];
        let mut mat = vec![vec![0i64; src.len()]; tgt.len()];
        for (a_idx, class_a) in src.iter().enumerate() {
            for (b_idx, class_b) in tgt.iter().enumerate() {
                // Segment between consecutive crossings lies in one
                // triangle; otherwise a later crossing of the target arc
                // reached by wrapping clockwise around the puncture counts.
                let hit = class_a.iter().any(|&ra| {
                    class_b.iter().any(|&qb| {
                        adjacent(ra, qb, false)
                            || alive_slots[k]
                                .iter()
                                .any(|&qb2| qb2 > qb && adjacent(ra, qb2, true))
                    })
                });
                if hit {
                    mat[b_idx][a_idx] = 1;
                }
            }
        }
        if !src.is_empty() && !tgt.is_empty() && mat.iter().flatten().all(|&v| v == 0) {
            singular.insert((i, k));
        }
        maps.insert((i, k), mat);
    }
    let m = ArcModule {
        dims,
        maps,
        singular,
    };
    check_relations(&m, &potential_from_triangulation(t))?;
    Ok(m)
}

fn mat_mul(a: &[Vec<i64>], b: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let rows = a.len();
    let inner = b.len();
    let cols = if inner == 0 { 0 } else { b[0].len() };
    let mut out = vec![vec![0i64; cols]; rows];
    for (r, row) in out.iter_mut().enumerate() {
        for (c, v) in row.iter_mut().enumerate() {
            for m in 0..inner {
                *v += a[r][m] * b[m][c];
            }
        }
    }
    out
}

/// Checks that every Jacobian-ideal generator composites to the zero matrix
/// on the module.
fn check_relations(m: &ArcModule, w: &Potential) -> Result<(), JacobianError> {
    for (arrow, gen) in jacobian_ideal(w) {
        let mut total: Option<Vec<Vec<i64>>> = None;
        for (coeff, path) in gen.terms() {
            let src = path[0].0;
            let mut comp: Vec<Vec<i64>> = (0..m.dims[src])
                .map(|r| {
                    (0..m.dims[src])
                        .map(|c| i64::from(r == c))
                        .collect()
                })
                .collect();
            for step in path {
                let n = m
                    .maps
                    .get(step)
                    .ok_or_else(|| JacobianError::RelationViolation(format!(
                        "missing map for arrow {step:?}"
                    )))?;
            comp = mat_mul(n, &comp);
            }
            let scaled: Vec<Vec<i64>> = comp
                .iter()
                .map(|row| row.iter().map(|v| coeff * v).collect())
                .collect();
            total = Some(match total {
                None => scaled,
                Some(t) => t
                    .iter()
                    .zip(&scaled)
                    .map(|(r1, r2)| r1.iter().zip(r2).map(|(x, y)| x + y).collect())
                    .collect(),
            });
        }
        if let Some(t) = total {
            if t.iter().flatten().any(|&v| v != 0) {
                return Err(JacobianError::RelationViolation(format!(
                    "derivative of {arrow:?} is nonzero on the module: gen {:?} total {t:?}",
                    gen.terms()
                )));
            }
        }
    }
    Ok(())
}

/// Brute-force indecomposability check over the two-element field: searches
/// the endomorphism space for a nontrivial idempotent.  Intended for the
/// small modules produced here (total dimension at most 10).
pub fn is_indecomposable(m: &ArcModule) -> bool {
    let dims: Vec<usize> = m.dims.iter().map(|&d| d as usize).collect();
    let total_vars: usize = dims.iter().map(|d| d * d).sum();
    if total_vars == 0 || total_vars > 60 {
        return true;
    }
    let offset: Vec<usize> = dims
        .iter()
        .scan(0usize, |acc, d| {
            let o = *acc;
            *acc += d * d;
            Some(o)
        })
        .collect();
    let var = |v: usize, r: usize, c: usize| offset[v] + r * dims[v] + c;
    // Linear constraints over F_2: N E_src = E_tgt N for every arrow.
    let mut rows: Vec<u64> = Vec::new();
    for (&(i, k), mat) in &m.maps {
        for r in 0..dims[k] {
            for c in 0..dims[i] {
                let mut row: u64 = 0;
                for mid in 0..dims[i] {
                    if mat[r][mid] % 2 != 0 {
                        row ^= 1 << var(i, mid, c);
                    }
                }
                for mid in 0..dims[k] {
                    if mat[mid][c] % 2 != 0 {
                        row ^= 1 << var(k, r, mid);
                    }
                }
                if row != 0 {
                    rows.push(row);
                }
            }
        }
    }
    // Gaussian elimination to a nullspace basis.
    let mut pivots: Vec<(usize, u64)> = Vec::new();
    for mut row in rows {
        for &(p, prow) in &pivots {
            if row >> p & 1 == 1 {
                row ^= prow;
            }
        }
        if row != 0 {
            let p = row.trailing_zeros() as usize;
            pivots.push((p, row));
        }
    }
    let pivot_cols: BTreeSet<usize> = pivots.iter().map(|&(p, _)| p).collect();
    let free: Vec<usize> = (0..total_vars).filter(|v| !pivot_cols.contains(v)).collect();
    if free.len() > 16 {
        return true;
    }
    let solve = |assignment: u64| -> u64 {
        let mut sol: u64 = 0;
        for (bit, &v) in free.iter().enumerate() {
            if assignment >> bit & 1 == 1 {
                sol |= 1 << v;
            }
        }
        // Back-substitute pivots (each pivot row: pivot var + others).
        for &(p, prow) in pivots.iter().rev() {
            let parity = (prow & sol).count_ones() % 2;
            if parity == 1 {
                sol |= 1 << p;
            }
            let _ = p;
        }
        sol
    };
    let identity: u64 = {
        let mut s = 0u64;
        for (v, d) in dims.iter().enumerate() {
            for r in 0..*d {
                s |= 1 << var(v, r, r);
            }
        }
        s
    };
    for assignment in 1..(1u64 << free.len()) {
        let sol = solve(assignment);
        if sol == 0 || sol == identity {
            continue;
        }
        // Idempotency per vertex over F_2.
        let entry = |v: usize, r: usize, c: usize| (sol >> var(v, r, c) & 1) as u64;
        let mut idempotent = true;
        'check: for (v, d) in dims.iter().enumerate() {
            for r in 0..*d {
                for c in 0..*d {
                    let mut acc = 0u64;
                    for mid in 0..*d {
                        acc ^= entry(v, r, mid) & entry(v, mid, c);
                    }
                    if acc != entry(v, r, c) {
                        idempotent = false;
                        break 'check;
                    }
                }
            }
        }
        if idempotent {
            return false;
        }
    }
    true
}

/// Whether some submodule of `m` has dimension vector `e`.  The submodule
/// Grassmannians arising here have polynomial point counts, so emptiness is
/// independent of the field and the two-element field suffices.
pub fn submodule_dimension_feasible(m: &ArcModule, e: &[usize]) -> Result<bool, JacobianError> {
    Ok(grassmannian_point_count(m, e, 2)? > 0)
}

/// Counts submodules with dimension vector `e` over the `q`-element field
/// by exhaustive enumeration of invariant subspace tuples.
pub fn grassmannian_point_count(
    m: &ArcModule,
    e: &[usize],
    q: u64,
) -> Result<u64, JacobianError> {
    if !matches!(q, 2 | 3 | 5) {
        return Err(JacobianError::BadFieldSize(q));
    }
    let total: usize = m.dims.iter().map(|&d| d as usize).sum();
    if total > 10 {
        return Err(JacobianError::TooLarge(total, 10));
    }
    let dims: Vec<usize> = m.dims.iter().map(|&d| d as usize).collect();
    if e.len() != dims.len() || e.iter().zip(&dims).any(|(&ei, &di)| ei > di) {
        return Ok(0);
    }
    let spaces: Vec<Vec<Vec<Vec<u64>>>> = dims
        .iter()
        .zip(e)
        .map(|(&d, &ei)| subspaces(d, ei, q))
        .collect();
    let mut count = 0u64;
    let mut choice = vec![0usize; dims.len()];
    'outer: loop {
        let tuple: Vec<&Vec<Vec<u64>>> = choice
            .iter()
            .zip(&spaces)
            .map(|(&c, s)| &s[c])
            .collect();
        let invariant = m.maps.iter().all(|(&(i, k), mat)| {
            tuple[i].iter().all(|v| {
                let mut w: Vec<u64> = (0..dims[k])
                    .map(|r| {
                        (0..dims[i])
                            .map(|c| (mat[r][c].rem_euclid(q as i64) as u64) * v[c] % q)
                            .sum::<u64>()
                            % q
                    })
                    .collect();
                reduce_mod(&mut w, tuple[k], q);
                w.iter().all(|&x| x == 0)
            })
        });
        if invariant {
            count += 1;
        }
        for pos in 0..dims.len() {
            choice[pos] += 1;
            if choice[pos] < spaces[pos].len() {
                continue 'outer;
            }
            choice[pos] = 0;
        }
        break;
    }
    Ok(count)
}

/// All `e`-dimensional subspaces of `F_q^d`, each as a reduced-echelon basis.
fn subspaces(d: usize, e: usize, q: u64) -> Vec<Vec<Vec<u64>>> {
    if e == 0 {
        return vec![Vec::new()];
    }
    let mut seen: BTreeSet<Vec<Vec<u64>>> = BTreeSet::new();
    let mut vectors = vec![0u64; e * d];
    loop {
        let mat: Vec<Vec<u64>> = (0..e).map(|r| vectors[r * d..(r + 1) * d].to_vec()).collect();
        if let Some(rref) = reduced_echelon(&mat, q) {
            seen.insert(rref);
        }
        let mut pos = 0;
        loop {
            if pos == vectors.len() {
                return seen.into_iter().collect();
            }
            vectors[pos] += 1;
            if vectors[pos] < q {
                break;
            }
            vectors[pos] = 0;
            pos += 1;
        }
    }
}

/// Reduced row echelon form over `F_q`, or `None` when the rows are
/// dependent.
fn reduced_echelon(mat: &[Vec<u64>], q: u64) -> Option<Vec<Vec<u64>>> {
    let mut m: Vec<Vec<u64>> = mat.to_vec();
    let rows = m.len();
    let cols = if rows == 0 { 0 } else { m[0].len() };
    let inv = |a: u64| -> u64 {
        (1..q).find(|&x| a * x % q == 1).expect("unit in prime field")
    };
    let mut rank = 0;
    for col in 0..cols {
        let Some(piv) = (rank..rows).find(|&r| m[r][col] % q != 0) else {
            continue;
        };
        m.swap(rank, piv);
        let scale = inv(m[rank][col] % q);
        for x in m[rank].iter_mut() {
            *x = *x % q * scale % q;
        }
        for r in 0..rows {
            if r != rank && m[r][col] % q != 0 {
                let factor = m[r][col] % q;
                for c in 0..cols {
                    m[r][c] = (m[r][c] + (q - factor) * m[rank][c]) % q;
                }
            }
        }
        rank += 1;
        if rank == rows {
            break;
        }
    }
    (rank == rows).then_some(m)
}

/// Reduces `w` against an echelon basis in place.
fn reduce_mod(w: &mut [u64], basis: &[Vec<u64>], q: u64) {
    for b in basis {
        let pivot = b.iter().position(|&x| x % q == 1).expect("echelon pivot");
        let factor = w[pivot] % q;
        if factor != 0 {
            for (wi, bi) in w.iter_mut().zip(b) {
                *wi = (*wi + (q - factor) * bi) % q;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn four_cycle_derivatives() {
        // W = the single 4-cycle 0->1->2->3->0; derivative w.r.t. each arrow
        // is the complementary length-3 path.
        let mut w = Potential::zero();
        w.add_cycle(1, vec![(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        let d = cyclic_derivative(&w, (0, 1));
        assert_eq!(d.terms(), &[(1, vec![(1, 2), (2, 3), (3, 0)])]);
        let d = cyclic_derivative(&w, (2, 3));
        assert_eq!(d.terms(), &[(1, vec![(3, 0), (0, 1), (1, 2)])]);
        assert_eq!(jacobian_ideal(&w).len(), 4);
        // An arrow not in the potential differentiates to zero.
        assert!(cyclic_derivative(&w, (1, 0)).is_zero());
    }

    #[test]
    fn two_triangle_potential_ideal() {
        // Quiver on 0..5 with arrows nu:0->1, eps:1->2, delta:2->3,
        // alpha:3->4, beta:4->2, gamma:3->1 and W = (alpha beta delta)
        // + (eps delta gamma).  The ideal is generated by
        // beta delta, delta alpha, delta gamma, eps delta, alpha beta + gamma eps.
        let mut w = Potential::zero();
        w.add_cycle(1, vec![(3, 4), (4, 2), (2, 3)]).unwrap();
        w.add_cycle(1, vec![(1, 2), (2, 3), (3, 1)]).unwrap();
        let gens = jacobian_ideal(&w);
        assert_eq!(gens.len(), 5);
        let get = |arrow: (usize, usize)| -> &PathSum {
            &gens.iter().find(|(a, _)| *a == arrow).unwrap().1
        };
        // d/d(alpha) = beta delta.
        assert_eq!(get((3, 4)).terms(), &[(1, vec![(4, 2), (2, 3)])]);
        // d/d(beta) = delta alpha.
        assert_eq!(get((4, 2)).terms(), &[(1, vec![(2, 3), (3, 4)])]);
        // d/d(eps) = delta gamma.
        assert_eq!(get((1, 2)).terms(), &[(1, vec![(2, 3), (3, 1)])]);
        // d/d(gamma) = eps delta.
        assert_eq!(get((3, 1)).terms(), &[(1, vec![(1, 2), (2, 3)])]);
        // d/d(delta) = alpha beta + gamma eps.
        assert_eq!(
            get((2, 3)).terms(),
            &[
                (1, vec![(3, 1), (1, 2)]),
                (1, vec![(3, 4), (4, 2)]),
            ]
        );
    }

    #[test]
    fn cyclic_equivalence_is_canonical() {
        // The same cycle entered in two rotations lands on one term.
        let mut w1 = Potential::zero();
        w1.add_cycle(1, vec![(0, 1), (1, 2), (2, 0)]).unwrap();
        let mut w2 = Potential::zero();
        w2.add_cycle(1, vec![(1, 2), (2, 0), (0, 1)]).unwrap();
        assert_eq!(w1, w2);
        assert_eq!(
            cyclic_derivative(&w1, (1, 2)),
            cyclic_derivative(&w2, (1, 2))
        );
    }

    #[test]
    fn display_words() {
        let mut w = Potential::zero();
        w.add_cycle(1, vec![(0, 1), (1, 2), (2, 0)]).unwrap();
        w.add_cycle(1, vec![(2, 3), (3, 4), (4, 2)]).unwrap();
        // Arrows sorted: (0,1)=a, (1,2)=b, (2,0)=c, (2,3)=d, (3,4)=e, (4,2)=f.
        assert_eq!(w.to_string(), "abc+def");
        assert_eq!(Potential::zero().to_string(), "0");
    }

    #[test]
    fn bad_cycle_rejected() {
        let mut w = Potential::zero();
        assert!(w.add_cycle(1, vec![(0, 1), (2, 0)]).is_err());
        assert!(w.add_cycle(1, vec![(0, 1), (1, 2)]).is_err());
    }

    use crate::poly::FPolynomial;
    use crate::quiver::Quiver;
    use crate::surface::{all_tagged_arcs, crossing_vector, realize_triangulation};

    /// Punctured heptagon with three radii; the plain loop at vertex 6 cuts
    /// out a five-crossing module whose maps are pinned below.
    #[test]
    fn heptagon_loop_module() {
        let t: Triangulation =
            "n=7\nchord 4 6 cw\nchord 4 0 cw\nradius 0\nradius 2\nradius 4\nchord 0 2 cw\nchord 2 4 cw"
                .parse()
                .unwrap();
        let m = module_from_ideal_arc(&t, &Arc::Loop { foot: 6 }).unwrap();
        assert_eq!(m.dims, vec![0, 2, 1, 1, 1, 0, 0]);
        assert_eq!(m.singular, BTreeSet::from([(4, 2)]));
        assert_eq!(m.maps[&(1, 4)], vec![vec![1, 0]]);
        assert_eq!(m.maps[&(2, 1)], vec![vec![1], vec![1]]);
        assert_eq!(m.maps[&(2, 3)], vec![vec![1]]);
        assert_eq!(m.maps[&(3, 4)], vec![vec![1]]);
        assert_eq!(m.maps[&(4, 2)], vec![vec![0]]);
        // A loop is not a tagged arc, and its module splits as the direct
        // sum of the plain and notched radius modules at the same foot.
        assert!(!is_indecomposable(&m));
        let plain = module_from_arc(
            &t,
            &TaggedArc::Radius {
                foot: 6,
                notched: false,
            },
        )
        .unwrap();
        assert_eq!(plain.dims, vec![0, 1, 0, 0, 0, 0, 0]);
        assert!(is_indecomposable(&plain));
        let notched = module_from_arc(
            &t,
            &TaggedArc::Radius {
                foot: 6,
                notched: true,
            },
        )
        .unwrap();
        assert_eq!(notched.dims, vec![0, 1, 1, 1, 1, 0, 0]);
        assert!(is_indecomposable(&notched));
        let sum: Vec<u8> = plain
            .dims
            .iter()
            .zip(&notched.dims)
            .map(|(a, b)| a + b)
            .collect();
        assert_eq!(sum, m.dims);
    }

    /// Two triangles glued along one arrow: the arc with dimension vector
    /// (1,2,1,1,1) has the shared arrow as its unique singular arrow.
    #[test]
    fn two_triangle_module() {
        let q: Quiver = "n=5\narrows=0->1,1->2,2->3,3->4,4->2,3->1".parse().unwrap();
        let t = realize_triangulation(&q).unwrap();
        let target = vec![1u8, 2, 1, 1, 1];
        let g = all_tagged_arcs(5)
            .into_iter()
            .find(|g| crossing_vector(&t, g) == target)
            .expect("arc with dims (1,2,1,1,1)");
        let m = module_from_arc(&t, &g).unwrap();
        assert_eq!(m.dims, target);
        assert_eq!(m.singular, BTreeSet::from([(2, 3)]));
        assert!(is_indecomposable(&m));
    }

    /// Every tagged arc outside the triangulation yields a module whose
    /// maps satisfy the Jacobian relations (checked inside the builder).
    #[test]
    fn catalog_relation_sweep() {
        let quivers = [
            "n=4\narrows=0->2,1->2,2->3",
            "n=4\narrows=2->0,0->3,2->1,1->3,3->2",
            "n=4\narrows=0->1,1->2,2->3,3->0",
            "n=5\narrows=0->2,1->0,2->1,3->2,4->2",
            "n=5\narrows=0->1,1->2,2->0,1->3,3->0,2->4,4->1",
            "n=6\narrows=5->3,3->4,4->5,3->2,2->5,2->1,1->0,0->2",
        ];
        for text in quivers {
            let q: Quiver = text.parse().unwrap();
            let t = realize_triangulation(&q).expect("realizable");
            let mut built = 0usize;
            for g in all_tagged_arcs(t.n) {
                let d = crossing_vector(&t, &g);
                if d.iter().all(|&e| e == 0) {
                    continue;
                }
                let m = module_from_arc(&t, &g)
                    .unwrap_or_else(|e| panic!("{text}: arc {g:?}: {e}"));
                assert_eq!(m.dims, d);
                built += 1;
            }
            assert!(built >= t.n * t.n - t.n, "{text}: built {built}");
        }
    }

    /// The deep arc with dimension vector (1,1,2,1,1,1): its two singular
    /// arrows, and its F-polynomial recovered from Grassmannian point
    /// counts over three prime fields via interpolation at q = 1.
    #[test]
    fn deep_arc_module_and_euler_characteristics() {
        let q: Quiver = "n=6\narrows=5->3,3->4,4->5,3->2,2->5,2->1,1->0,0->2"
            .parse()
            .unwrap();
        let t = realize_triangulation(&q).unwrap();
        let target = vec![1u8, 1, 2, 1, 1, 1];
        let g = all_tagged_arcs(6)
            .into_iter()
            .find(|g| crossing_vector(&t, g) == target)
            .expect("arc with dims (1,1,2,1,1,1)");
        let m = module_from_arc(&t, &g).unwrap();
        assert_eq!(m.singular, BTreeSet::from([(1, 0), (5, 3)]));
        assert!(is_indecomposable(&m));
        let mut f = FPolynomial::zero(6);
        let mut e = vec![0usize; 6];
        loop {
            let a = grassmannian_point_count(&m, &e, 2).unwrap() as i64;
            let b = grassmannian_point_count(&m, &e, 3).unwrap() as i64;
            let c = grassmannian_point_count(&m, &e, 5).unwrap() as i64;
            // Lagrange interpolation of the (at most quadratic) counting
            // polynomial, evaluated at q = 1.
            let num = 8 * a - 6 * b + c;
            assert_eq!(num % 3, 0, "non-polynomial counts at {e:?}");
            let chi = num / 3;
            if chi != 0 {
                let expo: Vec<u32> = e.iter().map(|&x| x as u32).collect();
                f.add_term(&expo, chi);
            }
            let mut pos = 0;
            loop {
                if pos == 6 {
                    let expected = FPolynomial::parse(
                        "1+u1+u5+u1*u5+u4*u5+u1*u2+u2*u5+u2*u4*u5+u1*u4*u5+2*u1*u2*u5\
                         +u0*u2*u5+2*u1*u2*u4*u5+u0*u2*u4*u5+u1*u2^2*u5+u0*u1*u2*u5\
                         +u1*u2*u3*u4*u5+u1*u2^2*u4*u5+u0*u1*u2*u4*u5+u0*u1*u2^2*u5\
                         +u1*u2^2*u3*u4*u5+u0*u1*u2^2*u4*u5+u0*u1*u2^2*u3*u4*u5",
                        6,
                    )
                    .unwrap();
                    assert_eq!(f, expected);
                    return;
                }
                e[pos] += 1;
                if e[pos] <= m.dims[pos] as usize {
                    break;
                }
                e[pos] = 0;
                pos += 1;
            }
        }
    }

    #[test]
    fn grassmannian_extremes_and_errors() {
        let t: Triangulation =
            "n=7\nchord 4 6 cw\nchord 4 0 cw\nradius 0\nradius 2\nradius 4\nchord 0 2 cw\nchord 2 4 cw"
                .parse()
                .unwrap();
        let m = module_from_ideal_arc(&t, &Arc::Loop { foot: 6 }).unwrap();
        let zero = vec![0usize; 7];
        let full: Vec<usize> = m.dims.iter().map(|&d| d as usize).collect();
        for q in [2, 3, 5] {
            assert_eq!(grassmannian_point_count(&m, &zero, q).unwrap(), 1);
            assert_eq!(grassmannian_point_count(&m, &full, q).unwrap(), 1);
        }
        assert!(matches!(
            grassmannian_point_count(&m, &zero, 4),
            Err(JacobianError::BadFieldSize(4))
        ));
        let big = ArcModule {
            dims: vec![6, 5],
            maps: BTreeMap::new(),
            singular: BTreeSet::new(),
        };
        assert!(matches!(
            grassmannian_point_count(&big, &[0, 0], 2),
            Err(JacobianError::TooLarge(11, 10))
        ));
    }

    /// End-to-end agreement: for every tagged arc, the F-polynomial from
    /// Grassmannian point counts of its module equals the mutation-computed
    /// F-polynomial of the cluster variable with the same denominator
    /// vector.
    #[test]
    fn modules_match_mutation_f_polynomials() {
        let quivers = [
            "n=4\narrows=0->2,1->2,2->3",
            "n=4\narrows=2->0,0->3,2->1,1->3,3->2",
            "n=4\narrows=0->1,1->2,2->3,3->0",
            "n=5\narrows=0->2,1->0,2->1,3->2,4->2",
            "n=5\narrows=2->0,0->3,2->1,1->3,3->2,3->4",
            "n=5\narrows=0->1,1->2,2->0,1->3,3->0,2->4,4->1",
        ];
        for text in quivers {
            let q: Quiver = text.parse().unwrap();
            let t = realize_triangulation(&q).expect("realizable");
            let oracle = crate::oracle::enumerate_cluster_variables(&q, 64).expect("oracle");
            let mut compared = 0usize;
            for g in all_tagged_arcs(t.n) {
                let d = crossing_vector(&t, &g);
                if d.iter().all(|&e| e == 0) {
                    continue;
                }
                let m = module_from_arc(&t, &g).expect("module");
                let mut f = FPolynomial::zero(t.n);
                let mut e = vec![0usize; t.n];
                loop {
                    let a = grassmannian_point_count(&m, &e, 2).unwrap() as i64;
                    let b = grassmannian_point_count(&m, &e, 3).unwrap() as i64;
                    let c = grassmannian_point_count(&m, &e, 5).unwrap() as i64;
                    let num = 8 * a - 6 * b + c;
                    assert_eq!(num % 3, 0, "{text}: non-polynomial counts at {e:?}");
                    if num != 0 {
                        let expo: Vec<u32> = e.iter().map(|&x| x as u32).collect();
                        f.add_term(&expo, num / 3);
                    }
                    let mut pos = 0;
                    loop {
                        if pos == t.n {
                            break;
                        }
                        e[pos] += 1;
                        if e[pos] <= m.dims[pos] as usize {
                            break;
                        }
                        e[pos] = 0;
                        pos += 1;
                    }
                    if pos == t.n {
                        break;
                    }
                }
                let dv: Vec<i64> = d.iter().map(|&x| x as i64).collect();
                let expected = oracle
                    .get(&dv)
                    .unwrap_or_else(|| panic!("{text}: no cluster variable with d-vector {dv:?}"));
                assert_eq!(&f, expected, "{text}: F-polynomial mismatch at {dv:?}");
                compared += 1;
            }
            assert_eq!(compared, q.n * q.n - q.n, "{text}");
        }
    }

    #[test]
    fn direct_sum_is_decomposable() {
        let m = ArcModule {
            dims: vec![2],
            maps: BTreeMap::new(),
            singular: BTreeSet::new(),
        };
        assert!(!is_indecomposable(&m));
    }
}
